//! Command dispatch: turn a parameter table into a report.

use roughpower::evolution::{evolve, Equation, EvolutionConfig, Integrator};
use roughpower::experiments::{refinement_classifier, run_scan, witness_probe, ScanSpec, Target, WitnessSpec, DEFAULT_BAND};
use roughpower::profiles::{corpus, kink_field, window, witness_field, CorpusKind};
use roughpower::report::{Cell, Metadata, Report, VerdictRow};
use roughpower::selftest::run_selftest;
use roughpower::spaces::{
    besov_norm_lp, besov_norm_modulus, besov_norm_spline, check_q, sobolev_norm, strichartz_functional_norm, Flavor,
};
use roughpower::spectral::{Field, Grid};
use roughpower::{Error, Result};

use crate::params::Params;

pub const COMMANDS: [&str; 8] = ["norms", "evolve", "scan-abs", "scan-nonlinear", "scan-heat", "scan-nls", "witness", "selftest"];

/// a finished report and whether the run hit a numerical failure
pub struct Outcome {
    pub report: Report,
    /// one line per scan point (or per check)
    pub summary: Vec<String>,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome::with_failure(report, None)
    }

    fn with_failure(report: Report, failure: Option<String>) -> Self {
        let summary = report.summary_lines();
        Outcome { report, summary, failure }
    }
}

fn pow2(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

pub fn run(command: &str, params: &Params, seed: u64) -> Result<Outcome> {
    match command {
        "norms" => norms(params, seed),
        "evolve" => evolve_command(params, seed),
        "scan-abs" => scan(Target::AbsValue, params, seed),
        "scan-nonlinear" => scan(Target::NonlinearEstimate, params, seed),
        "scan-heat" => scan(Target::HeatThreshold, params, seed),
        "scan-nls" => scan(Target::NlsThreshold, params, seed),
        "witness" => witness(params, seed),
        "selftest" => selftest(params, seed),
        other => Err(Error::Precondition(format!("unknown command `{other}`"))),
    }
}

fn profile_field(params: &Params, grid: Grid, seed: u64) -> Result<Field> {
    let delta = params.f64("delta", 0.1)?;
    let shift = params.f64("shift", 0.0)?;
    match params.text("profile", "witness").as_str() {
        "witness" => Ok(witness_field(grid, delta, shift)),
        "kink" => Ok(kink_field(grid, delta, shift)),
        "window" => Ok(Field::from_real_fn(grid, |x| delta * window(x - shift))),
        "corpus" => {
            let index = params.usize("index", 0)?;
            let members = corpus(seed, index + 1, CorpusKind::Complex);
            Ok(members[index].sample(grid))
        }
        other => Err(Error::Precondition(format!("unknown profile `{other}`; expected witness, kink, window or corpus"))),
    }
}

const NORM_KEYS: [&str; 12] = ["profile", "delta", "shift", "index", "kind", "s", "q", "r", "m", "n", "length", "band"];

fn norms(params: &Params, seed: u64) -> Result<Outcome> {
    params.check_known("norms", &NORM_KEYS)?;
    let q = params.f64("q", 2.0)?;
    check_q(q)?;
    let r = params.f64("r", q)?;
    let s_list = params.f64_list("s", &[0.5, 1.0])?;
    let resolutions = params.size_list("n", &pow2(10, 12))?;
    let length = params.f64("length", 16.0)?;
    let band = params.f64("band", DEFAULT_BAND)?;
    let kinds: Vec<String> = params.text("kind", "sobolev").split(',').map(|k| k.trim().to_string()).collect();
    let profile = params.text("profile", "witness");

    let mut report = Report::new("norms", Metadata::new(seed, length), &["series", "profile", "s", "q", "n", "value"]);
    report.metadata.band = band;
    for kind in &kinds {
        for &s in &s_list {
            let mut values = Vec::new();
            for &n in &resolutions {
                let grid = Grid::new(n, length)?;
                let u = profile_field(params, grid, seed)?;
                let m = params.usize("m", s.floor() as usize + 1)? as u32;
                let value = match kind.as_str() {
                    "sobolev" => sobolev_norm(&u, s, q, Flavor::Inhomogeneous)?,
                    "riesz" => sobolev_norm(&u, s, q, Flavor::Homogeneous)?,
                    "besov-lp" => besov_norm_lp(&u, s, q, r)?,
                    "besov-modulus" => besov_norm_modulus(&u, s, q, m)?,
                    "besov-spline" => besov_norm_spline(&u, s, q)?,
                    "strichartz" => strichartz_functional_norm(&u, s, q)?,
                    other => {
                        return Err(Error::Precondition(format!(
                            "unknown norm kind `{other}`; expected sobolev, riesz, besov-lp, besov-modulus, besov-spline or strichartz"
                        )))
                    }
                };
                values.push(value);
                report.push_row(vec![kind.as_str().into(), profile.as_str().into(), s.into(), q.into(), n.into(), value.into()]);
            }
            if values.len() >= 3 {
                let verdict = refinement_classifier(&values, band)?;
                report.verdicts.push(VerdictRow { series: kind.clone(), s, verdict, note: String::new() });
            }
        }
    }
    Ok(Outcome::ok(report))
}

const EVOLVE_KEYS: [&str; 15] = [
    "equation", "integrator", "p", "coupling", "dt", "t_final", "cutoff", "oversample", "save_every", "n", "length",
    "profile", "delta", "shift", "index",
];

fn evolve_command(params: &Params, seed: u64) -> Result<Outcome> {
    params.check_known("evolve", &EVOLVE_KEYS)?;
    let p = params.f64("p", 2.5)?;
    let coupling = params.f64("coupling", 1.0)?;
    let dt = params.f64("dt", 1e-4)?;
    let t_final = params.f64("t_final", 0.01)?;
    let mut cfg = match params.text("equation", "heat").as_str() {
        "heat" => EvolutionConfig::heat(p, coupling, dt, t_final),
        "nls" | "schrodinger" => EvolutionConfig::schrodinger(p, coupling, dt, t_final),
        other => return Err(Error::Precondition(format!("unknown equation `{other}`; expected heat or nls"))),
    };
    if let Some(name) = params.raw("integrator") {
        cfg.integrator = match name {
            "etd1" => Integrator::Etd1,
            "etd2" => Integrator::Etd2,
            "strang" => Integrator::Strang,
            other => return Err(Error::Precondition(format!("unknown integrator `{other}`; expected etd1, etd2 or strang"))),
        };
    }
    cfg.freq_cutoff_j = match params.raw("cutoff") {
        None | Some("none") => None,
        Some(_) => Some(params.usize("cutoff", 0)? as u32),
    };
    cfg.oversample = params.usize("oversample", 2)?;
    cfg.save_every = params.usize("save_every", 10)?;
    cfg.validate()?;
    let length = params.f64("length", 16.0)?;
    let grid = Grid::new(params.usize("n", 1024)?, length)?;
    let u0 = profile_field(params, grid, seed)?;

    let traj = evolve(&u0, &cfg)?;
    let mut report = Report::new("evolve", Metadata::new(seed, length), &["series", "t", "mass", "alias_mass", "l2", "max_abs"]);
    let series = match cfg.equation {
        Equation::Heat => "heat",
        Equation::Schrodinger => "nls",
    };
    for (slice, diag) in traj.slices.slices.iter().zip(&traj.diagnostics) {
        report.push_row(vec![
            series.into(),
            diag.time.into(),
            diag.mass.into(),
            diag.alias_mass.into(),
            slice.l2().into(),
            slice.max_abs().into(),
        ]);
    }
    report.notes.push(format!("integrator {:?}; p = {p}; coupling = {coupling}; dt = {dt}", cfg.integrator));
    report.notes.push(format!("mass drift {}", traj.mass_drift()));
    let failure = traj.blow_up.as_ref().map(|b| format!("blow-up after t = {}: {}", b.last_valid_time, b.reason));
    if let Some(f) = &failure {
        report.notes.push(f.clone());
    }
    Ok(Outcome::with_failure(report, failure))
}

const SCAN_KEYS: [&str; 12] =
    ["p", "q", "s", "n", "length", "corpus_size", "band", "delta", "t_star", "dt_cap", "coupling", "tail_level"];

fn scan(target: Target, params: &Params, seed: u64) -> Result<Outcome> {
    params.check_known(target.command(), &SCAN_KEYS)?;
    let (p, q, s) = match target {
        Target::AbsValue => (1.0, 2.0, vec![1.25, 1.75]),
        Target::NonlinearEstimate => (2.5, 2.0, vec![2.6, 2.9, 3.2]),
        _ => (2.5, 2.0, vec![4.6, 5.4]),
    };
    let mut spec = ScanSpec::new(
        target,
        params.f64("p", p)?,
        params.f64("q", q)?,
        params.f64_list("s", &s)?,
        params.size_list("n", &pow2(12, 15))?,
    );
    spec.seed = seed;
    spec.length = params.f64("length", spec.length)?;
    spec.corpus_size = params.usize("corpus_size", spec.corpus_size)?;
    spec.band = params.f64("band", spec.band)?;
    let t = &mut spec.threshold;
    t.delta = params.f64("delta", t.delta)?;
    t.t_star = params.f64("t_star", t.t_star)?;
    t.dt_cap = params.f64("dt_cap", t.dt_cap)?;
    t.coupling = params.f64("coupling", t.coupling)?;
    t.tail_level = params.usize("tail_level", t.tail_level as usize)? as u32;
    t.length = spec.length;
    t.band = spec.band;
    spec.validate()?;
    match run_scan(&spec) {
        Ok(r) => Ok(Outcome::ok(r.to_report())),
        Err(e @ (Error::Numerical(_) | Error::Range { .. })) => partial(target.command(), spec.metadata(), e),
        Err(e) => Err(e),
    }
}

// header-only report carrying the failure, so an artifact exists even when compute stops
fn partial(command: &str, metadata: Metadata, e: Error) -> Result<Outcome> {
    let mut report = Report::new(command, metadata, &["series", "p", "q", "s", "n", "value", "reference", "check"]);
    report.notes.push(e.to_string());
    Ok(Outcome::with_failure(report, Some(e.to_string())))
}

const WITNESS_KEYS: [&str; 9] = ["p", "q", "t", "x_levels", "n", "length", "delta", "coupling", "steps_per_t"];

fn witness(params: &Params, seed: u64) -> Result<Outcome> {
    params.check_known("witness", &WITNESS_KEYS)?;
    let mut spec = WitnessSpec::new(params.f64("p", 2.5)?, params.f64("q", 2.0)?, params.f64_list("t", &[0.005])?);
    spec.seed = seed;
    let levels: Vec<usize> = spec.x_levels.iter().map(|&k| k as usize).collect();
    spec.x_levels = params.size_list("x_levels", &levels)?.into_iter().map(|k| k as u32).collect();
    spec.n = params.usize("n", spec.n)?;
    spec.length = params.f64("length", spec.length)?;
    spec.delta = params.f64("delta", spec.delta)?;
    spec.coupling = params.f64("coupling", spec.coupling)?;
    spec.steps_per_t = params.usize("steps_per_t", spec.steps_per_t)?;
    spec.validate()?;
    match witness_probe(&spec) {
        Ok(r) => Ok(Outcome::ok(r.to_report())),
        Err(e @ (Error::Numerical(_) | Error::Range { .. })) => {
            let mut report =
                Report::new("witness", Metadata::new(seed, spec.length), &["series", "p", "q", "t", "x", "h", "i_x", "i_xh", "value"]);
            report.notes.push(e.to_string());
            Ok(Outcome::with_failure(report, Some(e.to_string())))
        }
        Err(e) => Err(e),
    }
}

fn selftest(params: &Params, seed: u64) -> Result<Outcome> {
    params.check_known("selftest", &[])?;
    let checks = run_selftest();
    let mut report = Report::new("selftest", Metadata::new(seed, 16.0), &["module", "check", "passed", "detail"]);
    for c in &checks {
        let passed = if c.passed { "pass" } else { "fail" };
        report.push_row(vec![c.module.as_str().into(), c.name.as_str().into(), passed.into(), Cell::Text(c.detail.clone())]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    report.notes.push(format!("{} of {} checks passed", checks.len() - failed, checks.len()));
    let failure = (failed > 0).then(|| format!("{failed} self-checks failed"));
    let mut summary: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}: {} ({})", if c.passed { "pass" } else { "FAIL" }, c.module, c.name, c.detail))
        .collect();
    summary.extend(report.notes.iter().cloned());
    Ok(Outcome { report, summary, failure })
}
