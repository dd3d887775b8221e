//! Sobolev, Besov (three characterizations), difference-functional and line norms,
//! frequency envelopes and exponent arithmetic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::spectral::{lp_below_symbol, lp_block_symbol, lq_norm, Field, Grid, Spectrum};
use crate::splines::{knot_stride, max_level, spline_approx};

/// inhomogeneous <D>^s or homogeneous |D|^s
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Inhomogeneous,
    Homogeneous,
}

/// q must lie strictly between 1 and infinity
pub fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        precondition(format!("integrability q = {q} must lie in the open interval (1, inf)"))
    }
}

/// which norm characterization to compute
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    pub q: f64,
    pub flavor: Flavor,
    /// present for a Besov norm B^s_{q,r}; r may be infinite
    pub besov_r: Option<f64>,
}

impl NormSpec {
    pub fn sobolev(s: f64, q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(NormSpec { s, q, flavor: Flavor::Inhomogeneous, besov_r: None })
    }

    pub fn besov(s: f64, q: f64, r: f64) -> Result<Self> {
        check_q(q)?;
        if !(r >= 1.0) {
            return precondition(format!("besov index r = {r} must be >= 1"));
        }
        Ok(NormSpec { s, q, flavor: Flavor::Inhomogeneous, besov_r: Some(r) })
    }

    pub fn norm(&self, field: &Field) -> Result<f64> {
        match self.besov_r {
            Some(r) => besov_norm_lp(field, self.s, self.q, r),
            None => sobolev_norm(field, self.s, self.q, self.flavor),
        }
    }
}

fn weight(flavor: Flavor, s: f64) -> impl Fn(f64) -> f64 {
    move |xi: f64| match flavor {
        Flavor::Inhomogeneous => (1.0 + xi * xi).powf(s / 2.0),
        Flavor::Homogeneous => {
            if xi == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                xi.powf(s)
            }
        }
    }
}

fn finite_or_range(v: f64, grid: Grid) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range { freq: grid.xi_max_abs() })
    }
}

/// H^s norm of a spectrum by Plancherel
pub fn sobolev_norm_spectrum(spec: &Spectrum, s: f64, flavor: Flavor) -> Result<f64> {
    finite_or_range(spec.weighted_l2(weight(flavor, s)), spec.grid)
}

/// ||P_{>=k0} u||_{H^s}, the high-frequency tail of the H^s norm
pub fn sobolev_tail_norm(spec: &Spectrum, s: f64, k0: u32) -> Result<f64> {
    let w = weight(Flavor::Inhomogeneous, s);
    let v = spec.weighted_l2(|xi| w(xi) * (1.0 - lp_below_symbol(k0 as i32, xi)).sqrt());
    finite_or_range(v, spec.grid)
}

/// ||<D>^s u||_{L^q} (or |D|^s) with spacing-weighted quadrature; Plancherel when q = 2
pub fn sobolev_norm(field: &Field, s: f64, q: f64, flavor: Flavor) -> Result<f64> {
    check_q(q)?;
    let spec = field.to_spectrum();
    if flavor == Flavor::Homogeneous && s < 0.0 && spec.coeffs[0].norm() > 0.0 {
        return precondition("homogeneous norm with s < 0 is undefined for a field with nonzero mean");
    }
    if q == 2.0 {
        return sobolev_norm_spectrum(&spec, s, flavor);
    }
    let w = weight(flavor, s);
    let out = spec.multiply_radial(w).to_physical();
    finite_or_range(lq_norm(&out.values, field.grid.cell(), q), field.grid)
}

/// L^q norms of the dyadic blocks P_0 .. P_top
pub fn block_norms(field: &Field, q: f64) -> Vec<f64> {
    let spec = field.to_spectrum();
    (0..=field.grid.lp_top_level())
        .map(|j| {
            let b = spec.multiply_radial(|x| lp_block_symbol(j, x));
            if q == 2.0 {
                b.l2()
            } else {
                lq_norm(&b.to_physical().values, field.grid.cell(), q)
            }
        })
        .collect()
}

/// ( ||P_0 u||_q^r + sum_{j>=1} 2^{jsr} ||P_j u||_q^r )^{1/r}, the sup when r is infinite
pub fn besov_norm_lp(field: &Field, s: f64, q: f64, r: f64) -> Result<f64> {
    check_q(q)?;
    if !(r >= 1.0) {
        return precondition(format!("besov index r = {r} must be >= 1"));
    }
    let terms: Vec<f64> = block_norms(field, q)
        .into_iter()
        .enumerate()
        .map(|(j, b)| if j == 0 { b } else { 2f64.powf(j as f64 * s) * b })
        .collect();
    Ok(lr_combine(&terms, r))
}

fn lr_combine(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().cloned().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// the shifts h = 2^-j 2^{-i/4} sampled down to the grid spacing
pub fn modulus_shifts(grid: Grid, j: i32) -> Vec<f64> {
    let top = 2f64.powi(-j);
    let dx = grid.spacing();
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let h = top * 2f64.powf(-(i as f64) / 4.0);
        if h < dx * (1.0 - 1e-12) {
            break;
        }
        out.push(h);
        i += 1;
    }
    out
}

// || delta_h^m f ||_q with the shift applied spectrally
fn difference_norm(spec: &Spectrum, m: u32, h: f64, q: f64) -> f64 {
    let g = spec.grid;
    let w = g.wavenumbers();
    let coeffs: Vec<Complex64> = spec
        .coeffs
        .iter()
        .zip(&w)
        .map(|(c, &xi)| c * (Complex64::from_polar(1.0, xi * h) - 1.0).powu(m))
        .collect();
    let d = Spectrum { grid: g, coeffs };
    if q == 2.0 {
        d.l2()
    } else {
        lq_norm(&d.to_physical().values, g.cell(), q)
    }
}

/// omega_m(2^-j, f)_q: largest sampled ||delta_h^m f||_q over h in (0, 2^-j]
pub fn modulus_of_smoothness(field: &Field, m: u32, j: i32, q: f64) -> Result<f64> {
    check_q(q)?;
    if !(1..=3).contains(&m) {
        return precondition(format!("modulus order m = {m} must be 1, 2 or 3"));
    }
    if field.grid.dim() != 1 {
        return precondition("modulus of smoothness is implemented in one dimension");
    }
    let hs = modulus_shifts(field.grid, j);
    if hs.is_empty() {
        return Err(Error::Unresolved(format!(
            "scale 2^-{j} is below the grid spacing {}",
            field.grid.spacing()
        )));
    }
    let spec = field.to_spectrum();
    Ok(hs.iter().map(|&h| difference_norm(&spec, m, h, q)).fold(0.0, f64::max))
}

/// levels j >= 0 with 2^-j at least the grid spacing
pub fn resolved_levels(grid: Grid) -> Vec<i32> {
    let dx = grid.spacing();
    (0..64).take_while(|&j| 2f64.powi(-j) >= dx * (1.0 - 1e-12)).collect()
}

/// ||f||_q + || 2^{js} omega_m(2^-j, f)_q ||_{l^q_j} over the resolved levels
pub fn besov_norm_modulus(field: &Field, s: f64, q: f64, m: u32) -> Result<f64> {
    check_q(q)?;
    if !(m as f64 > s) {
        return precondition(format!("modulus order m = {m} must exceed s = {s}"));
    }
    let mut acc = 0.0;
    for j in resolved_levels(field.grid) {
        let w = modulus_of_smoothness(field, m, j, q)?;
        acc += (2f64.powf(j as f64 * s) * w).powf(q);
    }
    Ok(field.lq(q) + acc.powf(1.0 / q))
}

/// per-level terms 2^{jsq} ||f - f_j||_q^q of the spline characterization
pub fn spline_residual_terms(field: &Field, s: f64, q: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    let top = max_level(field.grid)?;
    let mut out = Vec::with_capacity(top as usize + 1);
    for j in 0..=top {
        let (_, r) = spline_approx(field, j)?;
        let e = field.sub(&r).lq(q);
        out.push(2f64.powf(j as f64 * s * q) * e.powf(q));
    }
    Ok(out)
}

/// ( sum_j 2^{jsq} ||f - f_j||_q^q )^{1/q} without the validity check on s
pub fn spline_residual_sum(field: &Field, s: f64, q: f64) -> Result<f64> {
    Ok(spline_residual_terms(field, s, q)?.iter().sum::<f64>().powf(1.0 / q))
}

/// ||f||_q + ( sum_j 2^{jsq} ||f - f_j||_q^q )^{1/q}, stated for 1/q < s < 1 + 1/q
pub fn besov_norm_spline(field: &Field, s: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if !(s > 1.0 / q && s < 1.0 + 1.0 / q) {
        return precondition(format!(
            "s = {s} outside the spline validity strip ({}, {})",
            1.0 / q,
            1.0 + 1.0 / q
        ));
    }
    knot_stride(field.grid, 0)?;
    Ok(field.lq(q) + spline_residual_sum(field, s, q)?)
}

/// points per octave in the radial quadrature of the difference functional
pub const STRICHARTZ_R_PER_OCTAVE: usize = 8;
/// midpoint nodes in the y integral
pub const STRICHARTZ_Y_NODES: usize = 64;

/// ||D_s f||_{L^q} for several s at once, with
/// D_s f(x)^2 = int_0^inf | int_{|y|<1} |f(x+ry) - f(x)| dy / r^s |^2 dr / r
pub fn strichartz_functional_norms(field: &Field, s_list: &[f64], q: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    if let Some(bad) = s_list.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
        return precondition(format!("difference functional needs 0 < s < 1, got {bad}"));
    }
    let g = field.grid;
    if g.dim() != 1 {
        return precondition("difference functional is implemented in one dimension");
    }
    let dx = g.spacing();
    let n = g.n();
    let octaves = (g.length() / 4.0 / dx).log2();
    let n_r = (octaves * STRICHARTZ_R_PER_OCTAVE as f64).ceil().max(1.0) as usize;
    let dlog = std::f64::consts::LN_2 / STRICHARTZ_R_PER_OCTAVE as f64;
    let r_top = dx * (n_r as f64 * dlog).exp();
    let spec = field.to_spectrum();
    let w = g.wavenumbers();
    let dy = 2.0 / STRICHARTZ_Y_NODES as f64;

    // inner[i][x] = int |f(x + r_i y) - f(x)| dy, independent of s
    let mut inner = vec![vec![0.0; n]; n_r];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, row) in inner.iter_mut().enumerate() {
        let r = dx * ((i as f64 + 0.5) * dlog).exp();
        for k in 0..STRICHARTZ_Y_NODES {
            let y = -1.0 + (k as f64 + 0.5) * dy;
            for (b, (c, &xi)) in buf.iter_mut().zip(spec.coeffs.iter().zip(&w)) {
                *b = c * Complex64::from_polar(1.0, xi * r * y);
            }
            crate::spectral::fft_inverse(&mut buf);
            for (acc, (sh, f0)) in row.iter_mut().zip(buf.iter().zip(&field.values)) {
                *acc += (sh - f0).norm() * dy;
            }
        }
    }
    let deriv = Spectrum {
        grid: g,
        coeffs: spec.coeffs.iter().zip(&w).map(|(c, &xi)| c * Complex64::new(0.0, xi)).collect(),
    }
    .to_physical();
    let dfdx: Vec<f64> = deriv.values.iter().map(|v| v.norm()).collect();
    let far: Vec<f64> = field
        .values
        .iter()
        .map(|f0| 2.0 * field.values.iter().map(|z| (z - f0).norm()).sum::<f64>() / n as f64)
        .collect();

    let mut out = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let mut vals = Vec::with_capacity(n);
        for x in 0..n {
            let mut d2 = 0.0;
            for (i, row) in inner.iter().enumerate() {
                let r = dx * ((i as f64 + 0.5) * dlog).exp();
                d2 += row[x] * row[x] * r.powf(-2.0 * s) * dlog;
            }
            // r < dx: |f(x+ry) - f(x)| ~ r |y| |f'(x)|
            d2 += dfdx[x] * dfdx[x] * dx.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
            // r > r_top: the shifts x + ry sweep the torus, so the y integral tends to
            // twice the mean of |f(z) - f(x)| over z
            d2 += far[x] * far[x] * r_top.powf(-2.0 * s) / (2.0 * s);
            vals.push(Complex64::new(d2.sqrt(), 0.0));
        }
        out.push(lq_norm(&vals, dx, q));
    }
    Ok(out)
}

/// ||D_s f||_{L^q} for one s
pub fn strichartz_functional_norm(field: &Field, s: f64, q: f64) -> Result<f64> {
    Ok(strichartz_functional_norms(field, &[s], q)?[0])
}

/// sum over both axes of the L^q norm (transverse) of the line W^{s,q} norms
pub fn fubini_norm(field: &Field, s: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let g = field.grid;
    if g.dim() != 2 {
        return precondition("line-norm composition needs a 2d field");
    }
    let n = g.n();
    let line_grid = Grid::new(n, g.length())?;
    let mut total = 0.0;
    for axis in 0..2 {
        let mut lines = Vec::with_capacity(n);
        for t in 0..n {
            let vals: Vec<Complex64> = (0..n)
                .map(|i| if axis == 0 { field.values[i * n + t] } else { field.values[t * n + i] })
                .collect();
            let line = Field { grid: line_grid, values: vals };
            if !line.is_finite() {
                return Err(Error::Numerical(format!("slice {t} along axis {} is non-finite", axis + 1)));
            }
            let v = sobolev_norm(&line, s, q, Flavor::Inhomogeneous)?;
            if !v.is_finite() {
                return Err(Error::Numerical(format!("slice {t} along axis {} is non-finite", axis + 1)));
            }
            lines.push(Complex64::new(v, 0.0));
        }
        total += lq_norm(&lines, g.spacing(), q);
    }
    Ok(total)
}

/// a slowly varying majorant c_j of the dyadic pieces
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSeq {
    pub delta: f64,
    pub entries: Vec<f64>,
    /// documented bound on sum c_j^2 (see `frequency_envelope`)
    pub square_sum_bound: f64,
}

impl EnvelopeSeq {
    /// slowly varying, square-summable, c_0 within a factor 4 of 1
    pub fn check(&self) -> Result<()> {
        let c = &self.entries;
        for j in 0..c.len() {
            for k in 0..c.len() {
                let lim = 2f64.powf(self.delta * (j as f64 - k as f64).abs()) * c[k];
                if c[j] > lim * (1.0 + 1e-12) {
                    return Err(Error::Numerical(format!("envelope not slowly varying at ({j},{k})")));
                }
            }
        }
        let sq: f64 = c.iter().map(|v| v * v).sum();
        if sq > self.square_sum_bound * (1.0 + 1e-12) {
            return Err(Error::Numerical("envelope square sum exceeds its bound".into()));
        }
        if !(c[0] >= 0.25 && c[0] <= 4.0) {
            return Err(Error::Numerical(format!("c_0 = {} not within a factor 4 of 1", c[0])));
        }
        Ok(())
    }
}

/// c_j = 2^{-delta j} + ||u||^{-1} max_k 2^{-delta |j-k|} ||P_k u||, norms taken in `spec`.
/// The square sum is bounded by 2A + 2BR with A = 1/(1-2^{-2 delta}),
/// B = (1+2^{-2 delta})/(1-2^{-2 delta}) and R = sum_k ||P_k u||^2 / ||u||^2.
pub fn frequency_envelope(field: &Field, spec: &NormSpec, delta: f64) -> Result<EnvelopeSeq> {
    if !(delta > 0.0) {
        return precondition("envelope delta must be positive");
    }
    let total = spec.norm(field)?;
    if total == 0.0 {
        return precondition("frequency envelope of the zero field is undefined");
    }
    let sp = field.to_spectrum();
    let top = field.grid.lp_top_level();
    let mut pieces = Vec::with_capacity(top as usize + 1);
    for k in 0..=top {
        let b = sp.multiply_radial(|x| lp_block_symbol(k, x)).to_physical();
        pieces.push(spec.norm(&b)? / total);
    }
    let entries: Vec<f64> = (0..=top)
        .map(|j| {
            let m = pieces
                .iter()
                .enumerate()
                .map(|(k, p)| 2f64.powf(-delta * (j - k as i32).abs() as f64) * p)
                .fold(0.0, f64::max);
            2f64.powf(-delta * j as f64) + m
        })
        .collect();
    let e = 2f64.powf(-2.0 * delta);
    let a = 1.0 / (1.0 - e);
    let b = (1.0 + e) / (1.0 - e);
    let r: f64 = pieces.iter().map(|p| p * p).sum();
    Ok(EnvelopeSeq { delta, entries, square_sum_bound: 2.0 * a + 2.0 * b * r })
}

/// d/q - 2/(p-1)
pub fn critical_exponent(p: f64, q: f64, d: u32) -> Result<f64> {
    if !(p > 1.0) {
        return precondition(format!("power p = {p} must exceed 1"));
    }
    if !(q > 1.0) {
        return precondition(format!("integrability q = {q} must exceed 1"));
    }
    if d < 1 {
        return precondition("dimension must be at least 1");
    }
    Ok(d as f64 / q - 2.0 / (p - 1.0))
}

/// 2/q + d/r = d/2 with 2 <= q, r <= inf and (q, r, d) != (2, inf, 2)
pub fn admissible_pair(q: f64, r: f64, d: u32) -> bool {
    if !(q >= 2.0 && r >= 2.0) {
        return false;
    }
    let lhs = 2.0 / q + d as f64 / r;
    if (lhs - d as f64 / 2.0).abs() > 1e-12 {
        return false;
    }
    !(q == 2.0 && r.is_infinite() && d == 2)
}
