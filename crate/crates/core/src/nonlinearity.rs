//! The power nonlinearity lambda |u|^{p-1} u, the Hölder-bound probe, the two leading
//! derivative pieces and the ratio evaluators for the superposition estimates.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::spaces::{critical_exponent, sobolev_norm, Flavor};
use crate::spectral::{Field, Spectrum};
use crate::splines::{knot_stride, spline_approx};

/// relative floor below which |u| counts as zero in negative powers
pub const ZERO_MASK_FLOOR: f64 = 1e-12;
/// default epsilon in the epsilon-shifted norms
pub const DEFAULT_EPS: f64 = 0.05;

/// p and the coupling of lambda |u|^{p-1} u
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub p: f64,
    pub lambda: Complex64,
}

impl PowerLaw {
    pub fn new(p: f64, lambda: Complex64) -> Result<Self> {
        if !(p > 1.0) {
            return precondition(format!("power p = {p} must exceed 1"));
        }
        if lambda.norm() == 0.0 {
            return precondition("coupling lambda must be nonzero");
        }
        Ok(PowerLaw { p, lambda })
    }

    /// smallest integer m with 0 <= s - m < 1
    pub fn derivative_order(s: f64) -> i32 {
        s.floor() as i32
    }

    pub fn apply(&self, u: &Field) -> Field {
        power_values(u, self.p).scale(self.lambda)
    }
}

/// |z|^{p-1} z, with the value 0 at z = 0
pub fn power_value(z: Complex64, p: f64) -> Complex64 {
    let a = z.norm();
    if a == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * magnitude_power(a, p - 1.0)
    }
}

/// a^e for a > 0; integer and half-integer exponents go through powi and sqrt,
/// which are exactly homogeneous under power-of-four scaling of a
fn magnitude_power(a: f64, e: f64) -> f64 {
    let twice = 2.0 * e;
    if twice.fract() == 0.0 && twice.abs() < 64.0 {
        let k = e.floor() as i32;
        if e.fract() == 0.0 {
            a.powi(k)
        } else {
            a.powi(k) * a.sqrt()
        }
    } else {
        a.powf(e)
    }
}

fn power_values(u: &Field, p: f64) -> Field {
    u.map(|z| power_value(z, p))
}

/// pointwise lambda |u|^{p-1} u
pub fn power_apply(u: &Field, p: f64, lambda: Complex64) -> Result<Field> {
    Ok(PowerLaw::new(p, lambda)?.apply(u))
}

/// parameters of the precise Hölder bound
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderProbe {
    pub z: Complex64,
    pub h: Complex64,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: i32,
    pub beta: f64,
}

impl HolderProbe {
    pub fn new(z: Complex64, h: Complex64, alpha1: f64, alpha2: i32, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return precondition(format!("beta = {beta} must lie in [0, 1]"));
        }
        Ok(HolderProbe { z, h, alpha: alpha1 + alpha2 as f64, alpha1, alpha2, beta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderOutcome {
    pub lhs: f64,
    pub rhs: f64,
    /// h = 0, or a singular point where the right side is infinite
    pub pass_by_convention: bool,
}

impl HolderOutcome {
    pub fn ratio(&self) -> f64 {
        if self.pass_by_convention {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

// |w|^{a1} w^{a2}; None at w = 0 when the total exponent is not positive
fn holder_map(w: Complex64, alpha1: f64, alpha2: i32) -> Option<Complex64> {
    let r = w.norm();
    let alpha = alpha1 + alpha2 as f64;
    if r == 0.0 {
        return if alpha > 0.0 { Some(Complex64::new(0.0, 0.0)) } else { None };
    }
    Some((w / r).powi(alpha2) * r.powf(alpha))
}

/// lhs = | |z+h|^{a1}(z+h)^{a2} - |z|^{a1} z^{a2} | / |h|^beta and rhs = |z+h|^{a-b} + |z|^{a-b}
pub fn precise_holder_probe(probe: &HolderProbe) -> HolderOutcome {
    let zh = probe.z + probe.h;
    let e = probe.alpha - probe.beta;
    let pw = |w: Complex64| if w.norm() == 0.0 && e < 0.0 { f64::INFINITY } else { w.norm().powf(e) };
    let rhs = pw(zh) + pw(probe.z);
    if probe.h.norm() == 0.0 {
        return HolderOutcome { lhs: 0.0, rhs, pass_by_convention: true };
    }
    match (holder_map(zh, probe.alpha1, probe.alpha2), holder_map(probe.z, probe.alpha1, probe.alpha2)) {
        (Some(a), Some(b)) if rhs.is_finite() => {
            let lhs = (a - b).norm() / probe.h.norm().powf(probe.beta);
            HolderOutcome { lhs, rhs, pass_by_convention: false }
        }
        _ => HolderOutcome { lhs: f64::INFINITY, rhs, pass_by_convention: true },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderMonteCarlo {
    pub samples: usize,
    pub seed: u64,
    pub max_ratio: f64,
    pub argmax: HolderProbe,
}

/// random probes with alpha in [-2, 3], beta in [0, 1], integer alpha2 in [-2, 3] and
/// log-uniform |z|, |h|/|z| over six decades
pub fn holder_monte_carlo(samples: usize, seed: u64) -> HolderMonteCarlo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0;
    let mut arg = HolderProbe {
        z: Complex64::new(1.0, 0.0),
        h: Complex64::new(0.0, 0.0),
        alpha: 0.0,
        alpha1: 0.0,
        alpha2: 0,
        beta: 0.0,
    };
    let tau = 2.0 * std::f64::consts::PI;
    for _ in 0..samples {
        let alpha: f64 = rng.gen_range(-2.0..3.0);
        let beta: f64 = rng.gen_range(0.0..=1.0);
        let alpha2: i32 = rng.gen_range(-2..=3);
        let rz = 10f64.powf(rng.gen_range(-3.0..3.0));
        let z = Complex64::from_polar(rz, rng.gen_range(0.0..tau));
        let rh = rz * 10f64.powf(rng.gen_range(-3.0..3.0));
        let h = Complex64::from_polar(rh, rng.gen_range(0.0..tau));
        let probe = HolderProbe { z, h, alpha, alpha1: alpha - alpha2 as f64, alpha2, beta };
        let r = precise_holder_probe(&probe).ratio();
        if r > best {
            best = r;
            arg = probe;
        }
    }
    HolderMonteCarlo { samples, seed, max_ratio: best, argmax: arg }
}

/// constants (C1, C2) of the two extreme monomials of d^m(|u|^{p-1}u):
/// C1 |u|^{p+1-2m} u_x Re(ubar u_x)^{m-1} and C2 |u|^{p-1-2m} u Re(ubar u_x)^m
pub fn leading_constants(m: u32, p: f64) -> (f64, f64) {
    // a: coefficient of the u_x monomial, b: of the u monomial
    let (mut a, mut b) = (0.0, 1.0);
    for k in 0..m {
        let k = k as f64;
        let gamma_b = p - 1.0 - 2.0 * k;
        let gamma_a = p + 1.0 - 2.0 * k;
        let na = a * gamma_a + b;
        let nb = b * gamma_b;
        a = na;
        b = nb;
    }
    (a, b)
}

/// pointwise leading pieces from samples of u and u_x; returns (N, N', masked count)
pub fn pieces_pointwise(
    u: &[Complex64],
    ux: &[Complex64],
    m: u32,
    p: f64,
) -> (Vec<Complex64>, Vec<Complex64>, usize) {
    let (c1, c2) = leading_constants(m, p);
    let mi = m as i32;
    let e1 = p + 1.0 - 2.0 * m as f64;
    let e2 = p - 1.0 - 2.0 * m as f64;
    let umax = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = ZERO_MASK_FLOOR * umax;
    let zero = Complex64::new(0.0, 0.0);
    let mut n1 = Vec::with_capacity(u.len());
    let mut n2 = Vec::with_capacity(u.len());
    let mut masked = 0;
    for (&z, &zx) in u.iter().zip(ux) {
        let a = z.norm();
        let b = (z.conj() * zx).re;
        let small = a <= floor;
        if small && (e1 < 0.0 || e2 < 0.0) {
            masked += 1;
        }
        let v1 = if small && e1 < 0.0 { zero } else { zx * (c1 * a.powf(e1) * b.powi(mi - 1)) };
        let v2 = if small && e2 < 0.0 { zero } else { z * (c2 * a.powf(e2) * b.powi(mi)) };
        n1.push(v1);
        n2.push(v2);
    }
    (n1, n2, masked)
}

fn spectral_derivative(field: &Field, order: u32) -> Field {
    let spec = field.to_spectrum();
    let g = spec.grid;
    let n = g.n();
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k == n / 2 && order % 2 == 1 {
                return Complex64::new(0.0, 0.0);
            }
            c * Complex64::new(0.0, g.wavenumber(k)).powu(order)
        })
        .collect();
    Spectrum { grid: g, coeffs }.to_physical()
}

/// spectral derivative u_x of a 1d field
pub fn derivative(field: &Field) -> Field {
    spectral_derivative(field, 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeadingPieces {
    pub n: Field,
    pub n_prime: Field,
    /// spectral d^m(|u|^{p-1}u) - N - N'
    pub residual: Field,
    pub c1: f64,
    pub c2: f64,
    pub mask_fraction: f64,
    /// more than 10% of the points were masked
    pub unreliable: bool,
}

pub fn leading_pieces(u: &Field, m: u32, p: f64) -> Result<LeadingPieces> {
    if m < 1 {
        return precondition("derivative order m must be at least 1");
    }
    if !(p > 1.0) {
        return precondition(format!("power p = {p} must exceed 1"));
    }
    if u.grid.dim() != 1 {
        return precondition("leading pieces are implemented in one dimension");
    }
    let ux = derivative(u);
    let (n1, n2, masked) = pieces_pointwise(&u.values, &ux.values, m, p);
    let (c1, c2) = leading_constants(m, p);
    let n = Field { grid: u.grid, values: n1 };
    let n_prime = Field { grid: u.grid, values: n2 };
    let full = spectral_derivative(&power_values(u, p), m);
    let residual = full.sub(&n).sub(&n_prime);
    let mask_fraction = masked as f64 / u.values.len() as f64;
    Ok(LeadingPieces { n, n_prime, residual, c1, c2, mask_fraction, unreliable: mask_fraction > 0.1 })
}

/// a ratio together with its two sides
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioOutcome {
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// the regularity lies inside the strip where the estimate is claimed
    pub in_strip: bool,
}

fn ratio_of(numerator: f64, denominator: f64, in_strip: bool) -> Result<RatioOutcome> {
    if !(denominator > 0.0) {
        return precondition("ratio denominator vanishes");
    }
    Ok(RatioOutcome { ratio: numerator / denominator, numerator, denominator, in_strip })
}

/// ||G(u)||_{W^{s,q}} / ( ||u||_{W^{1/q+eps,q}}^{p-1} ||u||_{W^{s,q}} ), G(u) = |u|^{p-1}u
pub fn estimate_ratio_main(u: &Field, p: f64, s: f64, q: f64, eps: f64) -> Result<RatioOutcome> {
    if !(p > 1.0) {
        return precondition(format!("power p = {p} must exceed 1"));
    }
    let num = sobolev_norm(&power_values(u, p), s, q, Flavor::Inhomogeneous)?;
    let low = sobolev_norm(u, 1.0 / q + eps, q, Flavor::Inhomogeneous)?;
    let high = sobolev_norm(u, s, q, Flavor::Inhomogeneous)?;
    ratio_of(num, low.powf(p - 1.0) * high, p <= s && s < p + 1.0 / q)
}

/// the same ratio with ||u||_inf in place of the W^{1/q+eps,q} factor (exploratory)
pub fn estimate_ratio_main_linf(u: &Field, p: f64, s: f64, q: f64) -> Result<RatioOutcome> {
    if !(p > 1.0) {
        return precondition(format!("power p = {p} must exceed 1"));
    }
    let num = sobolev_norm(&power_values(u, p), s, q, Flavor::Inhomogeneous)?;
    let high = sobolev_norm(u, s, q, Flavor::Inhomogeneous)?;
    ratio_of(num, u.max_abs().powf(p - 1.0) * high, p <= s && s < p + 1.0 / q)
}

/// left side measured at s - 2 + eps or s - 2 - eps
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shift {
    Plus,
    Minus,
}

/// ||G(u)||_{W^{s-2 +- eps, q}} / ( ||u||_{W^{s0,q}}^{p-1} ||u||_{W^{s,q}} ) in one dimension
pub fn estimate_ratio_heat(
    u: &Field,
    p: f64,
    s: f64,
    q: f64,
    s0: f64,
    shift: Shift,
    eps: f64,
) -> Result<RatioOutcome> {
    let sc = critical_exponent(p, q, u.grid.dim() as u32)?;
    if s0 < 2f64.max(sc) {
        return precondition(format!("s0 = {s0} must be at least max(2, s_c) = {}", 2f64.max(sc)));
    }
    if s < s0 {
        return precondition(format!("s = {s} must be at least s0 = {s0}"));
    }
    let left = match shift {
        Shift::Plus => s - 2.0 + eps,
        Shift::Minus => s - 2.0 - eps,
    };
    let num = sobolev_norm(&power_values(u, p), left, q, Flavor::Inhomogeneous)?;
    let base = sobolev_norm(u, s0, q, Flavor::Inhomogeneous)?;
    let high = sobolev_norm(u, s, q, Flavor::Inhomogeneous)?;
    ratio_of(num, base.powf(p - 1.0) * high, s < p + 2.0 + 1.0 / q)
}

/// exponents ((2s-p-1)/2 + eps, (3p-2s+1)/2 - eps) of the H^2 and H^1 factors; they sum to p
pub fn interp_exponents(p: f64, s: f64, eps: f64) -> (f64, f64) {
    ((2.0 * s - p - 1.0) / 2.0 + eps, (3.0 * p - 2.0 * s + 1.0) / 2.0 - eps)
}

/// ||(N, N')||_{H^{s-2}} / ( ||u||_{H^2}^a ||u||_{H^1}^b ) with m = 2 pieces
pub fn estimate_ratio_interp(u: &Field, p: f64, s: f64, eps: f64) -> Result<RatioOutcome> {
    if !(p > 1.5) {
        return precondition(format!("power p = {p} must exceed 3/2"));
    }
    if !(s > 2.0 && s < 3.0) {
        return precondition(format!("s = {s} must lie in (2, 3)"));
    }
    if !(p <= s && s < p + 0.5) {
        return precondition(format!("s = {s} must satisfy p <= s < p + 1/2"));
    }
    let lp = leading_pieces(u, 2, p)?;
    let a = sobolev_norm(&lp.n, s - 2.0, 2.0, Flavor::Inhomogeneous)?;
    let b = sobolev_norm(&lp.n_prime, s - 2.0, 2.0, Flavor::Inhomogeneous)?;
    let (ea, eb) = interp_exponents(p, s, eps);
    let h2 = sobolev_norm(u, 2.0, 2.0, Flavor::Inhomogeneous)?;
    let h1 = sobolev_norm(u, 1.0, 2.0, Flavor::Inhomogeneous)?;
    ratio_of((a * a + b * b).sqrt(), h2.powf(ea) * h1.powf(eb), true)
}

/// N evaluated on the level-j spline u_j with its exact per-interval slope
pub fn spline_piece(u: &Field, j: u32, m: u32, p: f64) -> Result<Field> {
    let stride = knot_stride(u.grid, j)?;
    let (sp, uj) = spline_approx(u, j)?;
    let ux: Vec<Complex64> = (0..u.grid.n()).map(|i| sp.slopes[i / stride]).collect();
    let (n1, _, _) = pieces_pointwise(&uj.values, &ux, m, p);
    Ok(Field { grid: u.grid, values: n1 })
}

/// ||N_{j+1} - N_j||_{L^q} for j in `levels`
pub fn spline_limit_differences(u: &Field, levels: &[u32], m: u32, p: f64, q: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(levels.len());
    for &j in levels {
        let a = spline_piece(u, j, m, p)?;
        let b = spline_piece(u, j + 1, m, p)?;
        out.push(b.sub(&a).lq(q));
    }
    Ok(out)
}
