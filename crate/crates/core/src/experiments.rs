//! Refinement studies: threshold scans, estimate-ratio sweeps, the witness probe and the
//! divergence classifier. "Diverged" always means a divergence signature under grid
//! refinement, never a proof of non-existence.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::evolution::{evolve_spectrum, EvolutionConfig, Equation, Integrator};
use crate::nonlinearity::{estimate_ratio_main, pieces_pointwise, DEFAULT_EPS};
use crate::profiles::{corpus, kink_field, witness_field, witness_spectrum, CorpusKind};
use crate::report::{Cell, Metadata, Report, VerdictRow};
use crate::spaces::{check_q, sobolev_norm_spectrum, sobolev_tail_norm, spline_residual_sum, Flavor};
use crate::spectral::{Grid, Spectrum};

/// default convergence band for successive ratios
pub const DEFAULT_BAND: f64 = 0.1;
/// largest rms residual of the log2 fit accepted as a clean divergence
pub const FIT_RESIDUAL_MAX: f64 = 0.2;
/// tails below this fraction of the full norm at every resolution are roundoff
pub const NOISE_FLOOR: f64 = 1e-6;
/// matched cutoff rule for regularized evolution scans
pub const CUTOFF_RULE: &str = "j = log2(N) - 2";
/// lowest LP level of the tail norm used by the threshold scans
pub const TAIL_LEVEL: u32 = 5;
/// spread allowed for a bounded estimate ratio across refinements
pub const BOUNDED_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    Converged,
    Diverged,
    Inconclusive,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Converged => "converged",
            VerdictStatus::Diverged => "diverged",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(VerdictStatus::Converged),
            "diverged" => Ok(VerdictStatus::Diverged),
            "inconclusive" => Ok(VerdictStatus::Inconclusive),
            other => precondition(format!("unknown verdict `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceVerdict {
    pub status: VerdictStatus,
    /// log2 growth per refinement, present only when diverged
    pub exponent: Option<f64>,
    /// rms residual of the log-linear fit
    pub confidence: f64,
}

/// least-squares line y = a x + b; returns (a, b, rms residual)
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

/// classify per-resolution values: converged when every successive ratio lies in
/// [1 - band, 1 + band]; diverged when every log2 ratio is positive and log-linear
pub fn refinement_classifier(values: &[f64], band: f64) -> Result<DivergenceVerdict> {
    if values.len() < 3 {
        return precondition(format!("classifier needs at least 3 resolutions, got {}", values.len()));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Ok(DivergenceVerdict { status: VerdictStatus::Inconclusive, exponent: None, confidence: f64::INFINITY });
    }
    let logs: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let xs: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    let (slope, _, rms) = fit_line(&xs, &logs);
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let status = if ratios.iter().all(|r| (1.0 - band..=1.0 + band).contains(r)) {
        VerdictStatus::Converged
    } else if ratios.iter().all(|r| *r > 1.0) && rms < FIT_RESIDUAL_MAX {
        VerdictStatus::Diverged
    } else {
        VerdictStatus::Inconclusive
    };
    let exponent = (status == VerdictStatus::Diverged).then_some(slope);
    Ok(DivergenceVerdict { status, exponent, confidence: rms })
}

/// converged when max/min over the resolutions is at most `factor`, else the band classifier
pub fn bounded_classifier(values: &[f64], factor: f64, band: f64) -> Result<DivergenceVerdict> {
    let v = refinement_classifier(values, band)?;
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    if lo > 0.0 && hi / lo <= factor {
        return Ok(DivergenceVerdict { status: VerdictStatus::Converged, exponent: None, confidence: v.confidence });
    }
    Ok(v)
}

/// (v_k^r - v_{k-1}^r) / (v_{k-1}^r - v_{k-2}^r) over the last three values; >= 1 means the
/// increments no longer shrink under refinement
pub fn increment_ratio(values: &[f64], r: f64) -> Result<f64> {
    let k = values.len();
    if k < 3 {
        return precondition("increment ratio needs three values");
    }
    let a = values[k - 3].powf(r);
    let b = values[k - 2].powf(r);
    let c = values[k - 1].powf(r);
    Ok((c - b) / (b - a))
}

/// bisection for the smallest s where `diverging(s)` holds; needs a sign change on [lo, hi]
pub fn locate_threshold(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut diverging: impl FnMut(f64) -> Result<bool>,
) -> Result<f64> {
    if !(lo < hi && tol > 0.0) {
        return precondition("bisection needs lo < hi and a positive tolerance");
    }
    if diverging(lo)? || !diverging(hi)? {
        return Err(Error::Unresolved(format!("no transition bracketed in [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if diverging(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_resolutions(resolutions: &[usize]) -> Result<()> {
    if resolutions.len() < 3 {
        return precondition("at least three resolutions are needed");
    }
    if resolutions.iter().any(|n| !n.is_power_of_two()) || resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return precondition("resolutions must be strictly increasing powers of two");
    }
    Ok(())
}

/// log2 N, used for the matched cutoff
pub fn matched_cutoff(n: usize) -> u32 {
    (n.trailing_zeros()).saturating_sub(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    AbsValue,
    NonlinearEstimate,
    HeatThreshold,
    NlsThreshold,
    Witness,
}

impl Target {
    pub fn command(&self) -> &'static str {
        match self {
            Target::AbsValue => "scan-abs",
            Target::NonlinearEstimate => "scan-nonlinear",
            Target::HeatThreshold => "scan-heat",
            Target::NlsThreshold => "scan-nls",
            Target::Witness => "witness",
        }
    }
}

/// parameters of an evolution threshold scan
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub delta: f64,
    pub t_star: f64,
    pub length: f64,
    /// upper bound on the time step; schrödinger runs also obey dt <= 2 / xi_max^2
    pub dt_cap: f64,
    pub coupling: f64,
    pub band: f64,
    pub tail_level: u32,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { delta: 0.1, t_star: 0.01, length: 64.0, dt_cap: 1e-4, coupling: 1.0, band: DEFAULT_BAND, tail_level: TAIL_LEVEL }
    }
}

/// what to scan and at which resolutions
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub target: Target,
    pub p: f64,
    pub q: f64,
    pub s_list: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub length: f64,
    pub seed: u64,
    pub corpus_size: usize,
    pub band: f64,
    pub threshold: ThresholdConfig,
}

impl ScanSpec {
    pub fn new(target: Target, p: f64, q: f64, s_list: Vec<f64>, resolutions: Vec<usize>) -> Self {
        let threshold = ThresholdConfig::default();
        let length = match target {
            Target::HeatThreshold | Target::NlsThreshold => threshold.length,
            _ => 16.0,
        };
        ScanSpec { target, p, q, s_list, resolutions, length, seed: 0, corpus_size: 20, band: DEFAULT_BAND, threshold }
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if self.s_list.is_empty() {
            return precondition("s list must be nonempty");
        }
        if self.target != Target::Witness {
            check_resolutions(&self.resolutions)?;
        }
        if !(self.length > 0.0) {
            return precondition("grid length must be positive");
        }
        match self.target {
            Target::AbsValue => {
                if self.s_list.iter().any(|s| !(*s > 0.0 && *s < 2.0)) {
                    return precondition("absolute-value scans need 0 < s < 2");
                }
            }
            Target::NlsThreshold if self.q != 2.0 => {
                return precondition("schrödinger scans are posed in H^s (q = 2)");
            }
            Target::Witness => {}
            _ => {
                if !(self.p > 1.0) {
                    return precondition(format!("power p = {} must exceed 1", self.p));
                }
            }
        }
        Ok(())
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = Metadata::new(self.seed, self.length);
        m.band = self.band;
        m
    }
}

/// one (series, s, N) measurement
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub series: String,
    pub s: f64,
    pub n: usize,
    /// the classified quantity
    pub value: f64,
    /// companion quantity (full norm, ratio denominator)
    pub reference: f64,
    /// sanity column (mass drift per unit time, homogeneity defect)
    pub check: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub spec: ScanSpec,
    pub rows: Vec<ScanRow>,
    pub verdicts: Vec<VerdictRow>,
    pub notes: Vec<String>,
    /// false when a diverged s is followed by a non-diverged larger s in one series
    pub monotone: bool,
}

impl ScanReport {
    fn new(spec: &ScanSpec) -> Self {
        ScanReport { spec: spec.clone(), rows: Vec::new(), verdicts: Vec::new(), notes: Vec::new(), monotone: true }
    }

    pub fn verdict(&self, series: &str, s: f64) -> Option<&DivergenceVerdict> {
        self.verdicts.iter().find(|v| v.series == series && (v.s - s).abs() < 1e-12).map(|v| &v.verdict)
    }

    pub fn values(&self, series: &str, s: f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.series == series && (r.s - s).abs() < 1e-12).map(|r| r.value).collect()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new(
            self.spec.target.command(),
            self.spec.metadata(),
            &["series", "p", "q", "s", "n", "value", "reference", "check"],
        );
        for row in &self.rows {
            r.push_row(vec![
                row.series.as_str().into(),
                self.spec.p.into(),
                self.spec.q.into(),
                row.s.into(),
                row.n.into(),
                row.value.into(),
                Cell::Num(row.reference),
                Cell::Num(row.check),
            ]);
        }
        r.verdicts = self.verdicts.clone();
        r.notes = self.notes.clone();
        if !self.monotone {
            r.notes.push("threshold monotonicity violated; scan inconclusive".into());
        }
        r
    }
}

/// a diverged s followed by a non-diverged larger s within one series breaks monotonicity
pub fn check_threshold_monotonicity(report: &mut ScanReport) -> bool {
    let mut series: Vec<String> = report.verdicts.iter().map(|v| v.series.clone()).collect();
    series.dedup();
    let mut ok = true;
    for name in series {
        let mut vs: Vec<&VerdictRow> = report.verdicts.iter().filter(|v| v.series == name).collect();
        vs.sort_by(|a, b| a.s.total_cmp(&b.s));
        let mut seen = false;
        for v in vs {
            match v.verdict.status {
                VerdictStatus::Diverged => seen = true,
                VerdictStatus::Converged if seen => ok = false,
                _ => {}
            }
        }
    }
    report.monotone = ok;
    ok
}

/// dispatch a scan by target
pub fn run_scan(spec: &ScanSpec) -> Result<ScanReport> {
    spec.validate()?;
    match spec.target {
        Target::AbsValue => abs_value_scan(spec),
        Target::NonlinearEstimate => nonlinear_estimate_scan(spec),
        Target::HeatThreshold => threshold_scan(spec, Equation::Heat),
        Target::NlsThreshold => threshold_scan(spec, Equation::Schrodinger),
        Target::Witness => precondition("the witness probe has its own driver"),
    }
}

// ---- absolute value ------------------------------------------------------------------

/// kink location used by the spline scans, off every dyadic knot
pub const SPLINE_KINK_SHIFT: f64 = 1.0 / 3.0;

fn abs_profile(n: usize, length: f64, shift: f64) -> Result<crate::spectral::Field> {
    Ok(kink_field(Grid::new(n, length)?, 1.0, shift))
}

/// per-resolution norms of |chi(x) x|: H^s by Plancherel when q = 2, otherwise the spline
/// residual sum of the kink shifted off the dyadic knots
pub fn abs_value_norms(q: f64, s: f64, resolutions: &[usize], length: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    resolutions
        .par_iter()
        .map(|&n| {
            if q == 2.0 {
                let f = abs_profile(n, length, 0.0)?;
                sobolev_norm_spectrum(&f.to_spectrum(), s, Flavor::Inhomogeneous)
            } else {
                let f = abs_profile(n, length, SPLINE_KINK_SHIFT)?;
                spline_residual_sum(&f, s, q)
            }
        })
        .collect()
}

pub fn abs_value_scan(spec: &ScanSpec) -> Result<ScanReport> {
    spec.validate()?;
    let mut report = ScanReport::new(spec);
    let series = if spec.q == 2.0 { "abs-sobolev" } else { "abs-spline" };
    for &s in &spec.s_list {
        let vals = abs_value_norms(spec.q, s, &spec.resolutions, spec.length)?;
        for (&n, &v) in spec.resolutions.iter().zip(&vals) {
            report.rows.push(ScanRow { series: series.into(), s, n, value: v, reference: 0.0, check: 0.0 });
        }
        let verdict = refinement_classifier(&vals, spec.band)?;
        report.verdicts.push(VerdictRow { series: series.into(), s, verdict, note: String::new() });
    }
    report.notes.push(format!("expected transition at s = 1 + 1/q = {}", 1.0 + 1.0 / spec.q));
    check_threshold_monotonicity(&mut report);
    Ok(report)
}

/// bisection over s for the abs-value transition using the increment-ratio predicate
pub fn abs_value_threshold(q: f64, resolutions: &[usize], length: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    check_resolutions(resolutions)?;
    let r = q;
    if q == 2.0 {
        // spectra do not depend on s
        let specs: Vec<Spectrum> = resolutions
            .iter()
            .map(|&n| Ok(abs_profile(n, length, 0.0)?.to_spectrum()))
            .collect::<Result<_>>()?;
        locate_threshold(lo, hi, tol, |s| {
            let vals: Vec<f64> =
                specs.iter().map(|sp| sobolev_norm_spectrum(sp, s, Flavor::Inhomogeneous)).collect::<Result<_>>()?;
            Ok(increment_ratio(&vals, r)? >= 1.0)
        })
    } else {
        locate_threshold(lo, hi, tol, |s| {
            let vals = abs_value_norms(q, s, resolutions, length)?;
            Ok(increment_ratio(&vals, r)? >= 1.0)
        })
    }
}

// ---- superposition estimate ----------------------------------------------------------

/// shifts of the kink family: transversal zeros at these points
pub const KINK_SHIFTS: [f64; 3] = [0.0, 0.3, -0.55];

/// data scaling used by the homogeneity check; a power of four keeps
/// |cu| and |cu|^{p-1} exactly representable multiples for half-integer p
pub const HOMOGENEITY_SCALE: f64 = 4.0;

pub fn nonlinear_estimate_scan(spec: &ScanSpec) -> Result<ScanReport> {
    spec.validate()?;
    let mut report = ScanReport::new(spec);
    let members = corpus(spec.seed, spec.corpus_size, CorpusKind::RealWithZeros);
    let (p, q) = (spec.p, spec.q);
    let grids: Vec<Grid> = spec.resolutions.iter().map(|&n| Grid::new(n, spec.length)).collect::<Result<_>>()?;

    // (series, per-resolution fields)
    let mut inputs: Vec<(String, Vec<crate::spectral::Field>)> = Vec::new();
    for (i, m) in members.iter().enumerate() {
        inputs.push((format!("corpus{i:02}"), grids.iter().map(|&g| m.sample(g)).collect()));
    }
    for (i, &c) in KINK_SHIFTS.iter().enumerate() {
        inputs.push((format!("kink{i}"), grids.iter().map(|&g| witness_field(g, 1.0, c)).collect()));
    }

    for &s in &spec.s_list {
        let results: Vec<Vec<ScanRow>> = inputs
            .par_iter()
            .map(|(name, fields)| {
                fields
                    .iter()
                    .map(|u| {
                        let a = estimate_ratio_main(u, p, s, q, DEFAULT_EPS)?;
                        let b = estimate_ratio_main(&u.scale(Complex64::new(HOMOGENEITY_SCALE, 0.0)), p, s, q, DEFAULT_EPS)?;
                        Ok(ScanRow {
                            series: name.clone(),
                            s,
                            n: u.grid.n(),
                            value: a.ratio,
                            reference: a.denominator,
                            check: (b.ratio - a.ratio).abs() / a.ratio,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for rows in results {
            let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
            let name = rows[0].series.clone();
            let verdict = if name.starts_with("corpus") {
                bounded_classifier(&vals, BOUNDED_FACTOR, spec.band)?
            } else {
                refinement_classifier(&vals, spec.band)?
            };
            report.rows.extend(rows);
            report.verdicts.push(VerdictRow { series: name, s, verdict, note: String::new() });
        }
    }
    report.notes.push(format!("estimate claimed for p <= s < p + 1/q = {}", p + 1.0 / q));
    check_threshold_monotonicity(&mut report);
    Ok(report)
}

/// worst max/min spread of the corpus ratios across resolutions at one s
pub fn corpus_spread(report: &ScanReport, s: f64) -> f64 {
    let mut names: Vec<&str> =
        report.rows.iter().filter(|r| r.series.starts_with("corpus")).map(|r| r.series.as_str()).collect();
    names.dedup();
    names
        .iter()
        .map(|n| {
            let v = report.values(n, s);
            v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min)
        })
        .fold(0.0, f64::max)
}

// ---- evolution thresholds ------------------------------------------------------------

/// time step of a threshold scan at one resolution
pub fn scan_time_step(equation: Equation, grid: Grid, cap: f64) -> f64 {
    match equation {
        Equation::Heat => cap,
        Equation::Schrodinger => cap.min(2.0 / grid.xi_max_abs().powi(2)),
    }
}

struct ThresholdPoint {
    n: usize,
    tails: Vec<f64>,
    fulls: Vec<f64>,
    drift: f64,
    blow_up: Option<f64>,
}

fn threshold_point(spec: &ScanSpec, equation: Equation, n: usize) -> Result<ThresholdPoint> {
    let t = &spec.threshold;
    let grid = Grid::new(n, spec.length)?;
    let u0 = witness_spectrum(grid, t.delta);
    let cfg = EvolutionConfig {
        equation,
        p: spec.p,
        coupling: t.coupling,
        freq_cutoff_j: Some(matched_cutoff(n)),
        dt: scan_time_step(equation, grid, t.dt_cap),
        t_final: t.t_star,
        integrator: match equation {
            Equation::Heat => Integrator::Etd1,
            Equation::Schrodinger => Integrator::Strang,
        },
        oversample: 2,
        save_every: 0,
    };
    let tr = evolve_spectrum(&u0, &cfg)?;
    let blow_up = tr.blow_up.as_ref().map(|b| b.last_valid_time);
    let spec_t = &tr.final_spectrum;
    let mut tails = Vec::new();
    let mut fulls = Vec::new();
    for &s in &spec.s_list {
        tails.push(sobolev_tail_norm(spec_t, s, t.tail_level)?);
        fulls.push(sobolev_norm_spectrum(spec_t, s, Flavor::Inhomogeneous)?);
    }
    Ok(ThresholdPoint { n, tails, fulls, drift: tr.mass_drift() / t.t_star, blow_up })
}

fn threshold_scan(spec: &ScanSpec, equation: Equation) -> Result<ScanReport> {
    let t = &spec.threshold;
    if !(t.t_star > 0.0 && t.delta > 0.0) {
        return precondition("t* and delta must be positive");
    }
    let points: Vec<ThresholdPoint> =
        spec.resolutions.par_iter().map(|&n| threshold_point(spec, equation, n)).collect::<Result<_>>()?;
    let mut report = ScanReport::new(spec);
    let series = match equation {
        Equation::Heat => "heat-tail",
        Equation::Schrodinger => "nls-tail",
    };
    let blown = points.iter().any(|pt| pt.blow_up.is_some());
    for (k, &s) in spec.s_list.iter().enumerate() {
        for pt in &points {
            report.rows.push(ScanRow {
                series: series.into(),
                s,
                n: pt.n,
                value: pt.tails[k],
                reference: pt.fulls[k],
                check: pt.drift,
            });
        }
        let tails: Vec<f64> = points.iter().map(|pt| pt.tails[k]).collect();
        let below_floor = points.iter().all(|pt| pt.tails[k] < NOISE_FLOOR * pt.fulls[k]);
        let (verdict, note) = if blown {
            (
                DivergenceVerdict { status: VerdictStatus::Inconclusive, exponent: None, confidence: f64::INFINITY },
                "blow-up before t*".to_string(),
            )
        } else if below_floor {
            (
                DivergenceVerdict { status: VerdictStatus::Converged, exponent: None, confidence: 0.0 },
                "tail_resolved=false".to_string(),
            )
        } else {
            (refinement_classifier(&tails, spec.band)?, String::new())
        };
        report.verdicts.push(VerdictRow { series: series.into(), s, verdict, note });
    }
    for pt in &points {
        if let Some(tb) = pt.blow_up {
            report.notes.push(format!("N = {}: blow-up flag, last valid time {tb}", pt.n));
        }
    }
    let p = spec.p;
    match equation {
        Equation::Heat => report.notes.push(format!(
            "expected threshold p + 2 + 1/q = {}; cutoff {CUTOFF_RULE}; tail P_(>={}) in H^s",
            p + 2.0 + 1.0 / spec.q,
            t.tail_level
        )),
        Equation::Schrodinger => {
            report.notes.push(format!(
                "expected threshold p + 5/2 = {}; cutoff {CUTOFF_RULE}; tail P_(>={}) in H^s",
                p + 2.5,
                t.tail_level
            ));
            if p < 1.5 {
                report.notes.push(format!(
                    "p < 3/2: documented well-posed window ends at min(3p; p + 5/2) = {}",
                    (3.0 * p).min(p + 2.5)
                ));
            }
        }
    }
    check_threshold_monotonicity(&mut report);
    Ok(report)
}

pub fn heat_threshold_scan(p: f64, q: f64, s_list: &[f64], resolutions: &[usize], cfg: &ThresholdConfig) -> Result<ScanReport> {
    let mut spec = ScanSpec::new(Target::HeatThreshold, p, q, s_list.to_vec(), resolutions.to_vec());
    spec.length = cfg.length;
    spec.band = cfg.band;
    spec.threshold = cfg.clone();
    run_scan(&spec)
}

pub fn nls_threshold_scan(p: f64, s_list: &[f64], resolutions: &[usize], cfg: &ThresholdConfig) -> Result<ScanReport> {
    let mut spec = ScanSpec::new(Target::NlsThreshold, p, 2.0, s_list.to_vec(), resolutions.to_vec());
    spec.length = cfg.length;
    spec.band = cfg.band;
    spec.threshold = cfg.clone();
    run_scan(&spec)
}

// ---- witness probe -------------------------------------------------------------------

/// parameters of the witness probe
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub coupling: f64,
    pub t_list: Vec<f64>,
    /// x = 2^-k for k in this list
    pub x_levels: Vec<u32>,
    pub n: usize,
    pub length: f64,
    /// time steps per smallest t
    pub steps_per_t: usize,
    pub seed: u64,
}

impl WitnessSpec {
    pub fn new(p: f64, q: f64, t_list: Vec<f64>) -> Self {
        WitnessSpec {
            p,
            q,
            delta: 0.1,
            coupling: 1.0,
            t_list,
            x_levels: (4..=9).collect(),
            n: 1024,
            length: 16.0,
            steps_per_t: 64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        let n = self.p.floor();
        if !(self.p > 1.0 && self.p > n) {
            return precondition(format!("p = {} must lie strictly between two integers n >= 1", self.p));
        }
        if self.t_list.is_empty() || self.t_list.iter().any(|t| !(*t > 0.0)) {
            return precondition("t list must be nonempty and positive");
        }
        if self.x_levels.is_empty() || self.x_levels.iter().any(|k| *k < 2) {
            return precondition("x samples must be dyadic in (0, 1/4]");
        }
        if !(self.delta > 0.0) || self.steps_per_t == 0 {
            return precondition("delta and steps per t must be positive");
        }
        Grid::new(self.n, self.length).map(|_| ())
    }
}

/// the four step sizes relative to x
pub const WITNESS_H_FACTORS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
/// quadrature nodes of the lower-bound integral (log-r midpoints, y midpoints)
pub const WITNESS_R_NODES: usize = 16;
pub const WITNESS_Y_NODES: usize = 16;
/// tolerated odd-symmetry defect relative to max |I|
pub const ODD_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub t: f64,
    pub x: f64,
    pub h: f64,
    pub i_x: f64,
    pub i_xh: f64,
    /// |I(t,x+h) - I(t,x)| / (t x^{p-n})
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzRow {
    pub t: f64,
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub spec: WitnessSpec,
    pub n_floor: u32,
    pub rows: Vec<WitnessRow>,
    pub strichartz: Vec<StrichartzRow>,
    /// fitted x-exponent of the lower-bound integral per t
    pub strichartz_exponents: Vec<(f64, f64)>,
    pub odd_defect: f64,
}

impl WitnessReport {
    /// max/min of the Hölder ratios over every x and h at time t
    pub fn holder_spread(&self, t: f64) -> f64 {
        spread(self.rows.iter().filter(|r| r.t == t).map(|r| r.ratio))
    }

    /// max/min over x for each fixed h factor at time t
    pub fn holder_spread_per_h(&self, t: f64) -> Vec<(f64, f64)> {
        WITNESS_H_FACTORS
            .iter()
            .map(|&f| (f, spread(self.rows.iter().filter(|r| r.t == t && (r.h / r.x - f).abs() < 1e-12).map(|r| r.ratio))))
            .collect()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new(
            Target::Witness.command(),
            Metadata::new(self.spec.seed, self.spec.length),
            &["series", "p", "q", "t", "x", "h", "i_x", "i_xh", "value"],
        );
        let sp = &self.spec;
        for w in &self.rows {
            r.push_row(vec![
                "holder".into(),
                sp.p.into(),
                sp.q.into(),
                w.t.into(),
                w.x.into(),
                w.h.into(),
                w.i_x.into(),
                w.i_xh.into(),
                w.ratio.into(),
            ]);
        }
        for s in &self.strichartz {
            r.push_row(vec![
                "strichartz".into(),
                sp.p.into(),
                sp.q.into(),
                s.t.into(),
                s.x.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                s.value.into(),
            ]);
        }
        for &(t, e) in &self.strichartz_exponents {
            r.notes.push(format!("t = {t}: lower-bound x-exponent {e} (expected {})", -2.0 / sp.q));
            r.notes.push(format!("t = {t}: holder max/min over x and h {}", self.holder_spread(t)));
            for (f, s) in self.holder_spread_per_h(t) {
                r.notes.push(format!("t = {t}: holder max/min over x at h = {f} x: {s}"));
            }
        }
        r.notes.push(format!("odd-symmetry defect {}", self.odd_defect));
        r
    }
}

fn spread(it: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for v in it {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi / lo
}

/// trigonometric interpolant and its derivative at x, with a rotating phasor
fn eval_with_derivative(spec: &Spectrum, x: f64) -> (Complex64, Complex64) {
    let g = spec.grid;
    let n = g.n();
    let dk = 2.0 * std::f64::consts::PI / g.length();
    let arg = x - g.x(0);
    let (mut u, mut ux) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let step = Complex64::from_polar(1.0, dk * arg);
    let lo = -(n as i64) / 2;
    let mut ph = Complex64::from_polar(1.0, dk * arg * lo as f64);
    for m in lo..lo + n as i64 {
        if (m - lo) % 64 == 0 {
            ph = Complex64::from_polar(1.0, dk * arg * m as f64);
        }
        let k = if m < 0 { (m + n as i64) as usize } else { m as usize };
        let c = spec.coeffs[k] * ph;
        u += c;
        if m != lo {
            ux += c * Complex64::new(0.0, dk * m as f64);
        }
        ph *= step;
    }
    (u, ux)
}

/// evolve w from delta chi(x) x by the heat flow with the power nonlinearity and form
/// I(t, x) = int_0^t (N + N')(w) ds at off-grid points
pub fn witness_probe(spec: &WitnessSpec) -> Result<WitnessReport> {
    spec.validate()?;
    let p = spec.p;
    let nf = p.floor() as u32;
    let grid = Grid::new(spec.n, spec.length)?;
    let t_min = spec.t_list.iter().cloned().fold(f64::MAX, f64::min);
    let t_max = spec.t_list.iter().cloned().fold(0.0, f64::max);
    let dt = t_min / spec.steps_per_t as f64;
    let steps = (t_max / dt).round() as usize;
    for &t in &spec.t_list {
        if ((t / dt) - (t / dt).round()).abs() > 1e-9 {
            return precondition(format!("t = {t} is not a multiple of the step {dt}"));
        }
    }
    let cfg = EvolutionConfig {
        integrator: Integrator::Etd2,
        save_every: 1,
        ..EvolutionConfig::heat(p, spec.coupling, dt, steps as f64 * dt)
    };
    let traj = evolve_spectrum(&witness_spectrum(grid, spec.delta), &cfg)?;
    if traj.blow_up.is_some() {
        return Err(Error::Numerical("witness flow blew up".into()));
    }
    let spectra: Vec<Spectrum> = traj.slices.slices.iter().map(|f| f.to_spectrum()).collect();

    // evaluation points: holder pairs, their mirrors and the lower-bound nodes
    let xs: Vec<f64> = spec.x_levels.iter().map(|&k| 2f64.powi(-(k as i32))).collect();
    let mut pts: Vec<f64> = Vec::new();
    let gamma = p - nf as f64 + 1.0 / spec.q;
    let r_nodes = |x: f64| -> Vec<f64> {
        let (a, b) = ((x / 2.0).ln(), (2.0 * x).ln());
        (0..WITNESS_R_NODES).map(|i| (a + (i as f64 + 0.5) * (b - a) / WITNESS_R_NODES as f64).exp()).collect()
    };
    let y_nodes: Vec<f64> = (0..WITNESS_Y_NODES).map(|i| 0.5 + 0.5 * (i as f64 + 0.5) / WITNESS_Y_NODES as f64).collect();
    for &x in &xs {
        pts.push(x);
        pts.push(-x);
        for f in WITNESS_H_FACTORS {
            pts.push(x + f * x);
            pts.push(-(x + f * x));
        }
        for r in r_nodes(x) {
            for &y in &y_nodes {
                pts.push(x + r * y);
            }
        }
    }
    // integrand (N + N') at every slice and point
    let integrand: Vec<Vec<f64>> = spectra
        .par_iter()
        .map(|sp| {
            let (u, ux): (Vec<Complex64>, Vec<Complex64>) = pts.iter().map(|&x| eval_with_derivative(sp, x)).unzip();
            let (a, b, _) = pieces_pointwise(&u, &ux, nf, p);
            a.iter().zip(&b).map(|(x, y)| (x + y).re).collect()
        })
        .collect();
    let idx = |x: f64| pts.iter().position(|&v| v == x).expect("evaluation point registered");

    let mut rows = Vec::new();
    let mut strichartz = Vec::new();
    let mut exponents = Vec::new();
    let mut odd_defect: f64 = 0.0;
    for &t in &spec.t_list {
        let m = (t / dt).round() as usize;
        // trapezoid in time over slices 0..=m
        let i_at = |k: usize| -> f64 {
            let mut acc = 0.5 * (integrand[0][k] + integrand[m][k]);
            for row in &integrand[1..m] {
                acc += row[k];
            }
            acc * dt
        };
        let mut i_max: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for &x in &xs {
            let ix = i_at(idx(x));
            defect = defect.max((ix + i_at(idx(-x))).abs());
            i_max = i_max.max(ix.abs());
            for f in WITNESS_H_FACTORS {
                let h = f * x;
                let ixh = i_at(idx(x + h));
                defect = defect.max((ixh + i_at(idx(-(x + h)))).abs());
                i_max = i_max.max(ixh.abs());
                let ratio = (ixh - ix).abs() / (t * x.powf(p - nf as f64));
                rows.push(WitnessRow { t, x, h, i_x: ix, i_xh: ixh, ratio });
            }
            // int_{x/2}^{2x} | int_{1/2}^{1} |I(x+ry) - I(x)| / r^gamma dy |^2 dr / r
            let dlogr = 4f64.ln() / WITNESS_R_NODES as f64;
            let dy = 0.5 / WITNESS_Y_NODES as f64;
            let mut outer = 0.0;
            for r in r_nodes(x) {
                let inner: f64 =
                    y_nodes.iter().map(|&y| (i_at(idx(x + r * y)) - ix).abs()).sum::<f64>() * dy / r.powf(gamma);
                outer += inner * inner * dlogr;
            }
            strichartz.push(StrichartzRow { t, x, value: outer });
        }
        let rel = if i_max > 0.0 { defect / i_max } else { defect };
        odd_defect = odd_defect.max(rel);
        let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
        let ly: Vec<f64> = strichartz.iter().filter(|s| s.t == t).map(|s| s.value.log2()).collect();
        exponents.push((t, fit_line(&lx, &ly).0));
    }
    if odd_defect > ODD_TOLERANCE {
        return Err(Error::Numerical(format!("odd symmetry of I violated: relative defect {odd_defect:e}")));
    }
    Ok(WitnessReport { spec: spec.clone(), n_floor: nf, rows, strichartz, strichartz_exponents: exponents, odd_defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifier_examples() {
        let v = refinement_classifier(&[1.0, 1.01, 1.005], 0.05).unwrap();
        assert_eq!(v.status, VerdictStatus::Converged);
        assert_eq!(v.exponent, None);
        let v = refinement_classifier(&[1.0, 2.0, 4.0, 8.0], 0.1).unwrap();
        assert_eq!(v.status, VerdictStatus::Diverged);
        assert!((v.exponent.unwrap() - 1.0).abs() < 1e-14);
        assert!(v.confidence < 1e-14);
        let v = refinement_classifier(&[1.0, 1.5, 1.4, 2.2], 0.1).unwrap();
        assert_eq!(v.status, VerdictStatus::Inconclusive);
        assert!(refinement_classifier(&[1.0, 2.0], 0.1).is_err());
    }

    #[test]
    fn bounded_classifier_accepts_factor_two() {
        let v = bounded_classifier(&[1.0, 1.3, 1.6, 1.9], 2.0, 0.1).unwrap();
        assert_eq!(v.status, VerdictStatus::Converged);
        let v = bounded_classifier(&[1.0, 1.5, 2.25, 3.4], 2.0, 0.1).unwrap();
        assert_eq!(v.status, VerdictStatus::Diverged);
    }

    #[test]
    fn increment_ratio_of_geometric_series() {
        // partial sums of 2^{-k}: increments halve
        let v = [1.0, 1.5, 1.75];
        assert!((increment_ratio(&v, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bisection_finds_step() {
        let t = locate_threshold(0.0, 2.0, 1e-6, |s| Ok(s >= 1.234)).unwrap();
        assert!((t - 1.234).abs() < 1e-6);
        assert!(locate_threshold(0.0, 1.0, 1e-3, |_| Ok(true)).is_err());
    }

    #[test]
    fn monotonicity_flag() {
        let spec = ScanSpec::new(Target::AbsValue, 1.0, 2.0, vec![1.0], vec![4, 8, 16]);
        let mut r = ScanReport::new(&spec);
        let d = |status| DivergenceVerdict { status, exponent: None, confidence: 0.0 };
        r.verdicts.push(VerdictRow { series: "a".into(), s: 1.0, verdict: d(VerdictStatus::Diverged), note: String::new() });
        r.verdicts.push(VerdictRow { series: "a".into(), s: 1.5, verdict: d(VerdictStatus::Converged), note: String::new() });
        assert!(!check_threshold_monotonicity(&mut r));
        r.verdicts[1].verdict.status = VerdictStatus::Diverged;
        assert!(check_threshold_monotonicity(&mut r));
    }

    #[test]
    fn spec_validation() {
        let ok = ScanSpec::new(Target::AbsValue, 1.0, 2.0, vec![1.25], vec![1024, 2048, 4096]);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.resolutions = vec![1024, 1024, 4096];
        assert!(bad.validate().is_err());
        bad = ok.clone();
        bad.q = 1.0;
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("(1, inf)"), "{msg}");
        bad = ok.clone();
        bad.s_list = vec![2.5];
        assert!(bad.validate().is_err());
        let nls = ScanSpec::new(Target::NlsThreshold, 2.5, 3.0, vec![4.6], vec![1024, 2048, 4096]);
        assert!(nls.validate().is_err());
    }

    #[test]
    fn matched_cutoff_rule() {
        assert_eq!(matched_cutoff(4096), 10);
        assert_eq!(matched_cutoff(2), 0);
    }

    #[test]
    fn phasor_evaluation_matches_direct() {
        let g = Grid::new(256, 16.0).unwrap();
        let sp = witness_spectrum(g, 0.3);
        let d = Spectrum { grid: g, coeffs: crate::nonlinearity::derivative(&sp.to_physical()).to_spectrum().coeffs };
        for x in [0.0, 0.013, -1.7, 3.3] {
            let (u, ux) = eval_with_derivative(&sp, x);
            assert!((u - sp.eval_at(x)).norm() < 1e-12);
            assert!((ux - d.eval_at(x)).norm() < 1e-11);
        }
    }

    #[test]
    fn abs_scan_small() {
        let spec = ScanSpec::new(Target::AbsValue, 1.0, 2.0, vec![1.25, 1.75], vec![1024, 2048, 4096]);
        let r = run_scan(&spec).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.verdicts.len(), 2);
        assert_eq!(r.verdict("abs-sobolev", 1.25).unwrap().status, VerdictStatus::Converged);
        assert_eq!(r.verdict("abs-sobolev", 1.75).unwrap().status, VerdictStatus::Diverged);
        assert!(r.monotone);
    }
}
