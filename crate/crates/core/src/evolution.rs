//! Linear propagators, frequency-regularized NLH/NLS steppers, the time antiderivative,
//! the time truncation and the data-difference probe.
//!
//! Heat: u_t = u_xx + lambda |u|^{p-1} u.
//! Schrödinger: (i d_t - d_xx) u = lambda |u|^{p-1} u, so uhat_t = i xi^2 uhat - i lambda Fhat
//! and the linear group is exp(i t xi^2).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::nonlinearity::power_value;
use crate::spectral::{
    bump, fft_forward, fft_inverse, lp_below_symbol, Field, SpaceTimeField, Spectrum, SymbolSpec,
};

/// L2 size above which a run is declared blown up
pub const BLOW_UP_NORM: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equation {
    Heat,
    Schrodinger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    Etd1,
    Etd2,
    Strang,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub equation: Equation,
    pub p: f64,
    /// lambda; +-1 for the flagship equations, 0 switches the nonlinearity off
    pub coupling: f64,
    /// P_{<j} regularization of the nonlinearity
    pub freq_cutoff_j: Option<u32>,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    /// oversampling factor of the grid on which |u|^{p-1}u is evaluated
    pub oversample: usize,
    /// save a slice every this many steps; 0 keeps only the initial and final slices
    pub save_every: usize,
}

impl EvolutionConfig {
    pub fn heat(p: f64, coupling: f64, dt: f64, t_final: f64) -> Self {
        EvolutionConfig {
            equation: Equation::Heat,
            p,
            coupling,
            freq_cutoff_j: None,
            dt,
            t_final,
            integrator: Integrator::Etd1,
            oversample: 2,
            save_every: 0,
        }
    }

    pub fn schrodinger(p: f64, coupling: f64, dt: f64, t_final: f64) -> Self {
        EvolutionConfig {
            equation: Equation::Schrodinger,
            integrator: Integrator::Strang,
            ..Self::heat(p, coupling, dt, t_final)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return precondition(format!("power p = {} must exceed 1", self.p));
        }
        if !self.coupling.is_finite() {
            return precondition("coupling must be finite");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return precondition("time step must be positive");
        }
        if !(self.t_final >= self.dt * (1.0 - 1e-12)) {
            return precondition(format!("t_final = {} must be at least dt = {}", self.t_final, self.dt));
        }
        if self.oversample < 2 {
            return precondition("oversampling factor must be at least 2");
        }
        match (self.equation, self.integrator) {
            (Equation::Heat, Integrator::Etd1 | Integrator::Etd2) => Ok(()),
            (Equation::Schrodinger, Integrator::Strang) => Ok(()),
            (e, i) => precondition(format!("integrator {i:?} is not available for {e:?}")),
        }
    }

    /// number of steps and the step actually used (t_final / steps)
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

/// exp(-t xi^2) or exp(i t xi^2) applied exactly
pub fn linear_propagate(field: &Field, t: f64, equation: Equation) -> Result<Field> {
    if !t.is_finite() {
        return precondition("propagation time must be finite");
    }
    match equation {
        Equation::Heat => {
            if t < 0.0 {
                return precondition("backward heat propagation is ill-posed");
            }
            crate::spectral::apply_symbol(field, SymbolSpec::Heat(t))
        }
        Equation::Schrodinger => crate::spectral::apply_symbol(field, SymbolSpec::Schrodinger(t)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceDiagnostics {
    pub time: f64,
    /// L^d sum |c|^2
    pub mass: f64,
    /// largest relative alias mass of the nonlinearity since the previous save
    pub alias_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub last_valid_time: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub config: EvolutionConfig,
    pub slices: SpaceTimeField,
    pub diagnostics: Vec<SliceDiagnostics>,
    /// spectrum at the last valid time
    pub final_spectrum: Spectrum,
    pub final_time: f64,
    pub blow_up: Option<BlowUp>,
}

impl Trajectory {
    /// largest relative mass deviation from the initial slice
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mass;
        self.diagnostics.iter().map(|d| (d.mass - m0).abs() / m0).fold(0.0, f64::max)
    }
}

// |u|^{p-1}u (or its Strang increment) evaluated on an oversampled grid and truncated
struct Nonlinear {
    n: usize,
    m: usize,
    p: f64,
    cutoff: Vec<f64>,
    // fine-grid index of each coarse mode (the coarse Nyquist mode is dropped)
    fine: Vec<Option<usize>>,
}

impl Nonlinear {
    fn new(grid: crate::spectral::Grid, cfg: &EvolutionConfig) -> Self {
        let n = grid.n();
        let m = n * cfg.oversample;
        let cutoff = (0..n)
            .map(|k| match cfg.freq_cutoff_j {
                Some(j) => lp_below_symbol(j as i32, grid.wavenumber(k).abs()),
                None => 1.0,
            })
            .collect();
        let fine = (0..n)
            .map(|k| {
                let md = grid.mode(k);
                if k == n / 2 {
                    None
                } else if md >= 0 {
                    Some(md as usize)
                } else {
                    Some((m as i64 + md) as usize)
                }
            })
            .collect();
        Nonlinear { n, m, p: cfg.p, cutoff, fine }
    }

    fn fine_values(&self, uhat: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        for (k, c) in uhat.iter().enumerate() {
            if let Some(i) = self.fine[k] {
                buf[i] = *c;
            }
        }
        fft_inverse(&mut buf);
        buf
    }

    // forward transform of fine samples, truncation and cutoff; returns the alias share too
    fn truncate(&self, mut buf: Vec<Complex64>) -> (Vec<Complex64>, f64) {
        fft_forward(&mut buf);
        let total: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        let mut kept = 0.0;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for k in 0..self.n {
            if let Some(i) = self.fine[k] {
                kept += buf[i].norm_sqr();
                out[k] = buf[i] * self.cutoff[k];
            }
        }
        let alias = if total > 0.0 { (total - kept).max(0.0) / total } else { 0.0 };
        (out, alias)
    }

    fn eval(&self, uhat: &[Complex64]) -> (Vec<Complex64>, f64) {
        let vals: Vec<Complex64> = self.fine_values(uhat).into_iter().map(|z| power_value(z, self.p)).collect();
        self.truncate(vals)
    }

    // increment u (exp(-i lambda dt |u|^{p-1}) - 1) of the exact phase rotation
    fn phase_increment(&self, uhat: &[Complex64], lambda_dt: f64) -> (Vec<Complex64>, f64) {
        let vals: Vec<Complex64> = self
            .fine_values(uhat)
            .into_iter()
            .map(|z| {
                let a = z.norm();
                if a == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let y = -lambda_dt * a.powf(self.p - 1.0);
                let h = (0.5 * y).sin();
                z * Complex64::new(-2.0 * h * h, y.sin())
            })
            .collect();
        self.truncate(vals)
    }
}

fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

fn mass_of(uhat: &[Complex64], length: f64) -> f64 {
    length * uhat.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// evolve from physical initial data
pub fn evolve(u0: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    if !u0.is_finite() {
        return precondition("initial data must be finite");
    }
    evolve_spectrum(&u0.to_spectrum(), cfg)
}

/// evolve from an initial spectrum (lets callers supply exact coefficients)
pub fn evolve_spectrum(u0: &Spectrum, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = u0.grid;
    if grid.dim() != 1 {
        return precondition("evolution is implemented in one dimension");
    }
    let (steps, dt) = cfg.steps();
    let xi2: Vec<f64> = grid.wavenumbers().iter().map(|x| x * x).collect();
    let nl = Nonlinear::new(grid, cfg);
    let lambda = cfg.coupling;
    let active = lambda != 0.0;

    // per-mode linear factors
    let (lin, half, p1, p2): (Vec<Complex64>, Vec<Complex64>, Vec<f64>, Vec<f64>) = match cfg.equation {
        Equation::Heat => (
            xi2.iter().map(|&k| Complex64::new((-k * dt).exp(), 0.0)).collect(),
            Vec::new(),
            xi2.iter().map(|&k| phi1(-k * dt)).collect(),
            xi2.iter().map(|&k| phi2(-k * dt)).collect(),
        ),
        Equation::Schrodinger => (
            Vec::new(),
            xi2.iter().map(|&k| Complex64::from_polar(1.0, 0.5 * k * dt)).collect(),
            Vec::new(),
            Vec::new(),
        ),
    };

    let mut u = u0.coeffs.clone();
    let save_every = if cfg.save_every == 0 { steps } else { cfg.save_every };
    let mut slices = vec![Spectrum { grid, coeffs: u.clone() }.to_physical()];
    let mut diags = vec![SliceDiagnostics { time: 0.0, mass: mass_of(&u, grid.length()), alias_mass: 0.0 }];
    let mut alias_since_save: f64 = 0.0;
    let mut blow_up = None;
    let mut last_valid = u.clone();
    let mut last_time = 0.0;

    for step in 1..=steps {
        match cfg.integrator {
            Integrator::Etd1 => {
                let (f, a) = if active { nl.eval(&u) } else { (vec![Complex64::new(0.0, 0.0); u.len()], 0.0) };
                alias_since_save = alias_since_save.max(a);
                for k in 0..u.len() {
                    u[k] = lin[k] * u[k] + f[k] * (dt * p1[k] * lambda);
                }
            }
            Integrator::Etd2 => {
                if active {
                    let (f0, a0) = nl.eval(&u);
                    let stage: Vec<Complex64> =
                        (0..u.len()).map(|k| lin[k] * u[k] + f0[k] * (dt * p1[k] * lambda)).collect();
                    let (f1, a1) = nl.eval(&stage);
                    alias_since_save = alias_since_save.max(a0).max(a1);
                    for k in 0..u.len() {
                        u[k] = stage[k] + (f1[k] - f0[k]) * (dt * p2[k] * lambda);
                    }
                } else {
                    for k in 0..u.len() {
                        u[k] *= lin[k];
                    }
                }
            }
            Integrator::Strang => {
                for k in 0..u.len() {
                    u[k] *= half[k];
                }
                if active {
                    let (d, a) = nl.phase_increment(&u, lambda * dt);
                    alias_since_save = alias_since_save.max(a);
                    for k in 0..u.len() {
                        u[k] += d[k];
                    }
                }
                for k in 0..u.len() {
                    u[k] *= half[k];
                }
            }
        }
        let mass = mass_of(&u, grid.length());
        let t = step as f64 * dt;
        if !mass.is_finite() || mass.sqrt() > BLOW_UP_NORM {
            blow_up = Some(BlowUp {
                last_valid_time: last_time,
                reason: if mass.is_finite() { "norm above blow-up threshold".into() } else { "non-finite values".into() },
            });
            break;
        }
        last_valid.clone_from(&u);
        last_time = t;
        if step % save_every == 0 {
            slices.push(Spectrum { grid, coeffs: u.clone() }.to_physical());
            diags.push(SliceDiagnostics { time: t, mass, alias_mass: alias_since_save });
            alias_since_save = 0.0;
        }
    }
    let slices = SpaceTimeField::new(save_every as f64 * dt, slices, 0)?;
    Ok(Trajectory {
        config: *cfg,
        slices,
        diagnostics: diags,
        final_spectrum: Spectrum { grid, coeffs: last_valid },
        final_time: last_time,
        blow_up,
    })
}

/// final-time error ||u_dt - u_{dt/2}||_2 for each dt, and the fitted log-log slope
pub fn self_convergence(u0: &Spectrum, cfg: &EvolutionConfig, dts: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut errs = Vec::with_capacity(dts.len());
    for &dt in dts {
        let a = evolve_spectrum(u0, &EvolutionConfig { dt, save_every: 0, ..*cfg })?;
        let b = evolve_spectrum(u0, &EvolutionConfig { dt: dt / 2.0, save_every: 0, ..*cfg })?;
        let d: Vec<Complex64> = a.final_spectrum.coeffs.iter().zip(&b.final_spectrum.coeffs).map(|(x, y)| x - y).collect();
        errs.push(Spectrum { grid: u0.grid, coeffs: d }.l2());
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    Ok((errs, crate::experiments::fit_line(&xs, &ys).0))
}

/// (d_t^{-1} F)(t) = int_0^t F by the cumulative trapezoid rule anchored at the origin slice
pub fn time_antiderivative(stf: &SpaceTimeField) -> SpaceTimeField {
    let dt = stf.time_step;
    let o = stf.origin_index;
    let g = stf.grid();
    let mut out = vec![Field::zeros(g); stf.len()];
    for i in o + 1..stf.len() {
        let prev = out[i - 1].clone();
        let inc = stf.slices[i - 1].add(&stf.slices[i]).scale(Complex64::new(0.5 * dt, 0.0));
        out[i] = prev.add(&inc);
    }
    for i in (0..o).rev() {
        let next = out[i + 1].clone();
        let inc = stf.slices[i].add(&stf.slices[i + 1]).scale(Complex64::new(0.5 * dt, 0.0));
        out[i] = next.sub(&inc);
    }
    SpaceTimeField { time_step: dt, slices: out, origin_index: o }
}

fn scale_in_time(stf: &SpaceTimeField, f: impl Fn(f64) -> f64) -> SpaceTimeField {
    let slices = stf
        .slices
        .iter()
        .enumerate()
        .map(|(i, s)| s.scale(Complex64::new(f(stf.time(i)), 0.0)))
        .collect();
    SpaceTimeField { time_step: stf.time_step, slices, origin_index: stf.origin_index }
}

/// spectral time derivative of eta(t) F(t), exact where eta = 1 (|t| <= 1)
pub fn tapered_time_derivative(stf: &SpaceTimeField) -> SpaceTimeField {
    let tapered = scale_in_time(stf, bump);
    let m = tapered.len();
    let mut buf = tapered.to_spectrum();
    let g = stf.grid().size();
    for r in 0..m {
        let tau = if m % 2 == 0 && r == m / 2 { 0.0 } else { tapered.temporal_frequency(r) };
        // time spectrum uses exp(-i tau t) forward, so d/dt is multiplication by i tau
        for c in 0..g {
            buf[r * g + c] *= Complex64::new(0.0, tau);
        }
    }
    tapered.from_spectrum(buf)
}

/// F_T = eta_{T1} d_t^{-1}(eta_T d_t F) + eta_1(t) F(0, x); agrees with F on [-T, T]
pub fn time_truncate(stf: &SpaceTimeField, t_small: f64, t1: f64) -> Result<SpaceTimeField> {
    if !(t_small > 0.0) {
        return precondition("T must be positive");
    }
    if t_small > t1 / 8.0 {
        return precondition(format!("T = {t_small} must be at most T1/8 = {}", t1 / 8.0));
    }
    if t1 > 0.125 {
        return precondition(format!("T1 = {t1} must be at most 1/8"));
    }
    let first = stf.time(0);
    let last = stf.time(stf.len() - 1);
    if !(first <= -2.0 + 1e-12 && last >= 2.0 - 1e-12) {
        return precondition(format!("time window [{first}, {last}] must span [-2, 2]"));
    }
    let dfdt = tapered_time_derivative(stf);
    let inner = scale_in_time(&dfdt, |t| bump(t / t_small));
    let prim = time_antiderivative(&inner);
    let f0 = stf.slices[stf.origin_index].clone();
    let slices = prim
        .slices
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let t = stf.time(i);
            a.scale(Complex64::new(bump(t / t1), 0.0)).add(&f0.scale(Complex64::new(bump(t), 0.0)))
        })
        .collect();
    Ok(SpaceTimeField { time_step: stf.time_step, slices, origin_index: stf.origin_index })
}

/// sup over saved times of ||u_a(t) - u_b(t)||_q / ||u_a(0) - u_b(0)||_q
pub fn difference_probe(u0a: &Field, u0b: &Field, cfg: &EvolutionConfig, q: f64) -> Result<f64> {
    if u0a.grid != u0b.grid {
        return precondition("data live on different grids");
    }
    let d0 = u0a.sub(u0b).lq(q);
    if d0 == 0.0 {
        return precondition("identical data give 0/0");
    }
    let cfg = EvolutionConfig { save_every: 1, ..*cfg };
    let a = evolve(u0a, &cfg)?;
    let b = evolve(u0b, &cfg)?;
    if a.blow_up.is_some() || b.blow_up.is_some() {
        return Err(Error::Numerical("blow-up during the difference probe".into()));
    }
    Ok(a.slices
        .slices
        .iter()
        .zip(&b.slices.slices)
        .map(|(x, y)| x.sub(y).lq(q) / d0)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{witness_field, CorpusKind, CorpusMember};
    use crate::spectral::Grid;

    fn grid() -> Grid {
        Grid::new(256, 16.0).unwrap()
    }

    #[test]
    fn propagate_identity_and_unitarity() {
        let u = CorpusMember::generate(1, 0, CorpusKind::Complex).sample(grid());
        let same = linear_propagate(&u, 0.0, Equation::Schrodinger).unwrap();
        assert!(same.sub(&u).max_abs() < 1e-14);
        let v = linear_propagate(&u, 0.37, Equation::Schrodinger).unwrap();
        assert!((v.l2() - u.l2()).abs() < 1e-12 * u.l2());
        assert!(linear_propagate(&u, -0.1, Equation::Heat).is_err());
    }

    #[test]
    fn heat_mode_decay() {
        let g = grid();
        let xi0 = g.wavenumber(6);
        let u = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi0 * x));
        let v = linear_propagate(&u, 0.2, Equation::Heat).unwrap();
        let f = (-0.2 * xi0 * xi0).exp();
        assert!(v.sub(&u.scale(Complex64::new(f, 0.0))).max_abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let mut c = EvolutionConfig::heat(2.5, 1.0, 1e-3, 0.01);
        assert!(c.validate().is_ok());
        c.integrator = Integrator::Strang;
        assert!(c.validate().is_err());
        let mut s = EvolutionConfig::schrodinger(0.5, 1.0, 1e-3, 0.01);
        assert!(s.validate().is_err());
        s.p = 3.0;
        s.oversample = 1;
        assert!(s.validate().is_err());
    }

    #[test]
    fn zero_coupling_is_linear_flow() {
        let g = grid();
        let u = CorpusMember::generate(3, 1, CorpusKind::Complex).sample(g);
        for (eq, integ) in [
            (Equation::Heat, Integrator::Etd1),
            (Equation::Heat, Integrator::Etd2),
            (Equation::Schrodinger, Integrator::Strang),
        ] {
            let cfg = EvolutionConfig {
                equation: eq,
                integrator: integ,
                save_every: 5,
                ..EvolutionConfig::heat(2.5, 0.0, 1e-3, 0.02)
            };
            let tr = evolve(&u, &cfg).unwrap();
            for (i, s) in tr.slices.slices.iter().enumerate() {
                let t = tr.slices.time(i);
                let lin = linear_propagate(&u, t, eq).unwrap();
                assert!(s.sub(&lin).max_abs() < 1e-10, "{eq:?} {t}");
            }
        }
    }

    #[test]
    fn nls_cubic_conserves_mass() {
        let u = witness_field(grid(), 0.5, 0.0);
        let cfg = EvolutionConfig { save_every: 100, ..EvolutionConfig::schrodinger(3.0, -1.0, 1e-3, 1.0) };
        let tr = evolve(&u, &cfg).unwrap();
        assert!(tr.blow_up.is_none());
        assert!(tr.mass_drift() <= 1e-6, "{}", tr.mass_drift());
    }

    #[test]
    fn blow_up_is_flagged() {
        // strongly focusing heat with large data
        let g = Grid::new(64, 16.0).unwrap();
        let u = Field::from_real_fn(g, |_| 50.0);
        let cfg = EvolutionConfig::heat(3.0, 1.0, 1e-3, 1.0);
        let tr = evolve(&u, &cfg).unwrap();
        let b = tr.blow_up.expect("blow-up expected");
        assert!(b.last_valid_time < 1.0);
        assert!(tr.final_time == b.last_valid_time);
    }

    #[test]
    fn antiderivative_rules() {
        let g = Grid::new(8, 1.0).unwrap();
        let stf = SpaceTimeField::from_fn(g, 0.01, 10, 10, |_, _| Complex64::new(2.0, -1.0));
        let a = time_antiderivative(&stf);
        assert!(a.slices[a.origin_index].max_abs() == 0.0);
        for (i, s) in a.slices.iter().enumerate() {
            let t = a.time(i);
            let want = Complex64::new(2.0 * t, -t);
            assert!(s.values.iter().all(|v| (v - want).norm() < 1e-14));
        }
    }

    #[test]
    fn truncation_preconditions() {
        let g = Grid::new(8, 1.0).unwrap();
        let stf = SpaceTimeField::from_fn(g, 1.0 / 64.0, 192, 192, |_, _| Complex64::new(1.0, 0.0));
        assert!(time_truncate(&stf, 1.0 / 32.0, 1.0 / 8.0).is_err());
        assert!(time_truncate(&stf, 1.0 / 64.0, 0.25).is_err());
        let short = SpaceTimeField::from_fn(g, 1.0 / 64.0, 64, 64, |_, _| Complex64::new(1.0, 0.0));
        assert!(time_truncate(&short, 1.0 / 64.0, 1.0 / 8.0).is_err());
    }

    #[test]
    fn static_field_truncates_to_itself() {
        let g = Grid::new(8, 1.0).unwrap();
        let stf = SpaceTimeField::from_fn(g, 1.0 / 256.0, 768, 768, |_, x| Complex64::new(x.cos(), 0.0));
        let ft = time_truncate(&stf, 1.0 / 64.0, 1.0 / 8.0).unwrap();
        assert!(ft.max_abs_diff(&stf, (-1.0, 1.0)) < 1e-10);
        for (i, s) in ft.slices.iter().enumerate() {
            if ft.time(i).abs() > 2.0 {
                assert_eq!(s.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn difference_probe_isometry_at_zero_coupling() {
        let g = grid();
        let a = CorpusMember::generate(8, 0, CorpusKind::Complex).sample(g);
        let b = a.add(&CorpusMember::generate(8, 1, CorpusKind::Complex).sample(g).scale(Complex64::new(0.01, 0.0)));
        let cfg = EvolutionConfig::schrodinger(2.5, 0.0, 1e-3, 0.02);
        let r = difference_probe(&a, &b, &cfg, 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(difference_probe(&a, &a, &cfg, 2.0).is_err());
    }
}
