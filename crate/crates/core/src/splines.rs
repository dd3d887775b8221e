//! Dyadic piecewise-linear approximation, knot difference tables, sign-change sets
//! and the first/second order difference sums.
//!
//! Knots sit at k 2^-j. Grids are required to contain every knot, which holds when
//! the spacing L/N is a power of two and L/2 is a multiple of 2^-j.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::spectral::{Field, Grid};

/// level-j interpolant on the periodic grid
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSpline {
    pub level: u32,
    /// position of knot 0 (the left end of the torus)
    pub origin: f64,
    pub step: f64,
    pub knot_values: Vec<Complex64>,
    /// per-interval slopes 2^j (v_{k+1} - v_k)
    pub slopes: Vec<Complex64>,
}

impl DyadicSpline {
    pub fn len(&self) -> usize {
        self.knot_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knot_values.is_empty()
    }

    /// periodic evaluation at any x
    pub fn eval(&self, x: f64) -> Complex64 {
        let k_total = self.len() as f64;
        let mut u = (x - self.origin) / self.step;
        u -= (u / k_total).floor() * k_total;
        let k = (u.floor() as usize).min(self.len() - 1);
        let frac = u - k as f64;
        self.knot_values[k] + self.slopes[k] * (frac * self.step)
    }
}

/// knots per grid stride at level j, or an error when the level is finer than the grid
/// or the knots are not grid points
pub fn knot_stride(grid: Grid, j: u32) -> Result<usize> {
    if grid.dim() != 1 {
        return precondition("dyadic splines are one dimensional");
    }
    let step = 2f64.powi(-(j as i32));
    let dx = grid.spacing();
    if step < dx * (1.0 - 1e-12) {
        return Err(Error::Unresolved(format!(
            "level {j} (2^-j = {step}) is finer than the grid spacing {dx}"
        )));
    }
    let ratio = step / dx;
    let stride = ratio.round();
    let half = grid.length() / 2.0 / step;
    if (ratio - stride).abs() > 1e-9 || (half - half.round()).abs() > 1e-9 {
        return precondition(format!("grid with spacing {dx} is not aligned to level {j} knots"));
    }
    let stride = stride as usize;
    if grid.n() % stride != 0 {
        return precondition(format!("grid size {} is not a multiple of the knot stride", grid.n()));
    }
    Ok(stride)
}

/// the finest level whose knots are grid points
pub fn max_level(grid: Grid) -> Result<u32> {
    let mut j = 0;
    knot_stride(grid, 0)?;
    while knot_stride(grid, j + 1).is_ok() {
        j += 1;
    }
    Ok(j)
}

fn knots(field: &Field, j: u32) -> Result<(usize, Vec<Complex64>)> {
    let stride = knot_stride(field.grid, j)?;
    let values = field.values.iter().step_by(stride).copied().collect();
    Ok((stride, values))
}

/// level-j piecewise-linear interpolant and its resampling on the grid
pub fn spline_approx(field: &Field, j: u32) -> Result<(DyadicSpline, Field)> {
    let (stride, kv) = knots(field, j)?;
    let step = 2f64.powi(-(j as i32));
    let k = kv.len();
    let slopes: Vec<Complex64> = (0..k).map(|i| (kv[(i + 1) % k] - kv[i]) / step).collect();
    let mut values = Vec::with_capacity(field.grid.n());
    for i in 0..k {
        let a = kv[i];
        let b = kv[(i + 1) % k];
        for r in 0..stride {
            let t = r as f64 / stride as f64;
            values.push(a + (b - a) * t);
        }
    }
    let spline = DyadicSpline { level: j, origin: field.grid.x(0), step, knot_values: kv, slopes };
    Ok((spline, Field { grid: field.grid, values }))
}

/// knot difference table of order 1 or 2
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffTable {
    pub level: u32,
    pub order: u8,
    pub entries: Vec<Complex64>,
}

/// Delta_{j,k} = u((k+1) 2^-j) - u(k 2^-j), or the second difference Delta_{j,k+1} - Delta_{j,k}
/// (periodic indices)
pub fn finite_diffs(field: &Field, j: u32, order: u8) -> Result<DiffTable> {
    if order != 1 && order != 2 {
        return precondition("difference order must be 1 or 2");
    }
    let (_, kv) = knots(field, j)?;
    let k = kv.len();
    let d1: Vec<Complex64> = (0..k).map(|i| kv[(i + 1) % k] - kv[i]).collect();
    let entries = if order == 1 {
        d1
    } else {
        (0..k).map(|i| d1[(i + 1) % k] - d1[i]).collect()
    };
    Ok(DiffTable { level: j, order, entries })
}

/// one representative per monotonicity run, realizing the run's largest |Delta|
pub fn run_representatives(diffs: &[f64]) -> Vec<usize> {
    let peak = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if peak == 0.0 {
        return Vec::new();
    }
    // differences at roundoff size near the window edges join either neighbouring run
    let floor = 1e-14 * peak;
    let mut out = Vec::new();
    let mut sign = 0.0;
    let mut best = 0usize;
    for (k, &d) in diffs.iter().enumerate() {
        if d.abs() <= floor {
            continue;
        }
        let sg = d.signum();
        if sign == 0.0 {
            sign = sg;
            best = k;
        } else if sg == sign {
            if d.abs() > diffs[best].abs() {
                best = k;
            }
        } else {
            out.push(best);
            sign = sg;
            best = k;
        }
    }
    if sign != 0.0 {
        out.push(best);
    }
    out
}

/// Lambda_j index sets for the real and imaginary components
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChangeSets {
    pub level: u32,
    pub real: Vec<usize>,
    pub imag: Vec<usize>,
}

pub fn sign_change_sets(field: &Field, j: u32) -> Result<SignChangeSets> {
    let t = finite_diffs(field, j, 1)?;
    let re: Vec<f64> = t.entries.iter().map(|c| c.re).collect();
    let im: Vec<f64> = t.entries.iter().map(|c| c.im).collect();
    Ok(SignChangeSets { level: j, real: run_representatives(&re), imag: run_representatives(&im) })
}

/// which component varies more on each interval (diagnostic only)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Real,
    Imag,
}

pub fn variation_selector(field: &Field, j: u32) -> Result<Vec<Component>> {
    let t = finite_diffs(field, j, 1)?;
    Ok(t.entries
        .iter()
        .map(|d| if d.re.abs() >= d.im.abs() { Component::Real } else { Component::Imag })
        .collect())
}

/// ( sum_j sum_k 2^{j(sq-1)} |Delta|^q )^{1/q} over the resolved levels; order 1 sums over
/// the sign-change sets of each component, order 2 over all knots
pub fn oswald_sum(field: &Field, s: f64, q: f64, order: u8) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return precondition(format!("integrability q = {q} must lie in (1, inf)"));
    }
    if !(1.0..1.0 + 1.0 / q).contains(&s) {
        return precondition(format!("s = {s} outside the strip 1 <= s < 1 + 1/q = {}", 1.0 + 1.0 / q));
    }
    let top = max_level(field.grid)?;
    let mut acc = 0.0;
    for j in 0..=top {
        let w = 2f64.powf(j as f64 * (s * q - 1.0));
        let t = finite_diffs(field, j, order)?;
        let level_sum: f64 = if order == 1 {
            let sets = sign_change_sets(field, j)?;
            let a: f64 = sets.real.iter().map(|&k| t.entries[k].re.abs().powf(q)).sum();
            let b: f64 = sets.imag.iter().map(|&k| t.entries[k].im.abs().powf(q)).sum();
            a + b
        } else {
            t.entries.iter().map(|d| d.norm().powf(q)).sum()
        };
        acc += w * level_sum;
    }
    Ok(acc.powf(1.0 / q))
}
