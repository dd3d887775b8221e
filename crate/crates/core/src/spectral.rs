//! Periodic grids, fields, FFTs, multipliers and dyadic projections.
//!
//! Conventions used everywhere in the crate:
//! - grid points are x_n = (n - N/2) * L/N, so the first sample sits at -L/2
//! - the forward transform carries the 1/N factor, the inverse carries none
//! - xi is the angular frequency 2*pi*k/L, with k in fft order
//!   (the Nyquist index maps to -N/2)

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

/// identifier of the bump profile, embedded in reports
pub const BUMP_ID: &str = "psi-ratio-v1";

/// half width of the enlarged temporal band used by the near-modulation projector
pub const MODULATION_ENLARGEMENT: i32 = 3;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// forward dft of a contiguous buffer, scaled by 1/n
pub fn fft_forward(buf: &mut [Complex64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    plan(n, false).process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// inverse dft of a contiguous buffer, unscaled
pub fn fft_inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    plan(buf.len(), true).process(buf);
}

// strided transform along the slow axis of an n x n array
fn fft_columns(buf: &mut [Complex64], n: usize, inverse: bool) {
    let f = plan(n, inverse);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        f.process(&mut col);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
}

/// the smooth step psi(t) = exp(-1/t) for t > 0, 0 otherwise
fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// radial bump: 1 on [0,1], 0 on [2,inf), smooth in between
pub fn bump(r: f64) -> f64 {
    let r = r.abs();
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - r);
        let b = psi(r - 1.0);
        a / (a + b)
    }
}

/// P_{<j}: phi0(xi / 2^(j-1)) for j >= 1 and the zero symbol for j = 0
pub fn lp_below_symbol(j: i32, xi: f64) -> f64 {
    if j <= 0 {
        0.0
    } else {
        bump(xi / 2f64.powi(j - 1))
    }
}

/// P_j: phi0 for j = 0, otherwise the dyadic difference supported on 2^(j-1) <= |xi| <= 2^(j+1)
pub fn lp_block_symbol(j: i32, xi: f64) -> f64 {
    if j < 0 {
        0.0
    } else if j == 0 {
        bump(xi)
    } else {
        lp_below_symbol(j + 1, xi) - lp_below_symbol(j, xi)
    }
}

/// P_{>=j} = 1 - P_{<j}
pub fn lp_above_symbol(j: i32, xi: f64) -> f64 {
    1.0 - lp_below_symbol(j, xi)
}

/// uniform periodic grid in one or two dimensions (square in 2d)
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
    dim: usize,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Self::with_dim(n, length, 1)
    }

    pub fn new_2d(n: usize, length: f64) -> Result<Self> {
        Self::with_dim(n, length, 2)
    }

    fn with_dim(n: usize, length: f64, dim: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return precondition(format!("grid size {n} must be a power of two >= 2"));
        }
        if !(length.is_finite() && length > 0.0) {
            return precondition(format!("grid length {length} must be positive"));
        }
        if dim != 1 && dim != 2 {
            return precondition("grid dimension must be 1 or 2");
        }
        Ok(Grid { n, length, dim })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// number of samples (n^dim)
    pub fn size(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// volume element of the left-endpoint quadrature
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// total volume L^dim
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// signed mode number of fft index k
    pub fn mode(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// angular frequency of fft index k along one axis
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * self.mode(k) as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.wavenumber(k)).collect()
    }

    /// |xi| for every flat spectral index
    pub fn abs_wavenumbers(&self) -> Vec<f64> {
        let w = self.wavenumbers();
        if self.dim == 1 {
            w.iter().map(|v| v.abs()).collect()
        } else {
            let mut out = Vec::with_capacity(self.size());
            for a in &w {
                for b in &w {
                    out.push((a * a + b * b).sqrt());
                }
            }
            out
        }
    }

    /// largest |xi| on one axis (the Nyquist frequency)
    pub fn xi_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// largest |xi| over the whole lattice
    pub fn xi_max_abs(&self) -> f64 {
        self.xi_max() * (self.dim as f64).sqrt()
    }

    /// smallest level J with P_{<J+1} = 1 on the lattice, so blocks 0..=J partition unity
    pub fn lp_top_level(&self) -> i32 {
        let mut j = 0;
        while 2f64.powi(j) < self.xi_max_abs() {
            j += 1;
        }
        j
    }

    pub fn refined(&self, factor: usize) -> Result<Grid> {
        Grid::with_dim(self.n * factor, self.length, self.dim)
    }
}

/// complex samples on a grid; row-major in 2d with the first axis slow
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return precondition(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.size()
            ));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![Complex64::new(0.0, 0.0); grid.size()] }
    }

    /// sample a 1d profile
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        assert_eq!(grid.dim(), 1, "from_fn needs a 1d grid");
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Field { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// sample a 2d profile
    pub fn from_fn_2d(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        assert_eq!(grid.dim(), 2, "from_fn_2d needs a 2d grid");
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                values.push(f(grid.x(i), grid.x(k)));
            }
        }
        Field { grid, values }
    }

    /// f = Re u
    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// g = Im u
    pub fn imag_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn add(&self, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Field { grid: self.grid, values }
    }

    pub fn sub(&self, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Field { grid: self.grid, values }
    }

    pub fn mul(&self, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Field { grid: self.grid, values }
    }

    /// spacing-weighted l2 norm
    pub fn l2(&self) -> f64 {
        (self.grid.cell() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// spacing-weighted L^q norm, q >= 1
    pub fn lq(&self, q: f64) -> f64 {
        lq_norm(&self.values, self.grid.cell(), q)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_spectrum(&self) -> Spectrum {
        let mut buf = self.values.clone();
        let n = self.grid.n();
        if self.grid.dim() == 1 {
            fft_forward(&mut buf);
        } else {
            for row in buf.chunks_mut(n) {
                fft_forward(row);
            }
            fft_columns(&mut buf, n, false);
            let s = 1.0 / n as f64;
            for v in buf.iter_mut() {
                *v *= s;
            }
        }
        Spectrum { grid: self.grid, coeffs: buf }
    }
}

/// L^q quadrature of samples with cell volume `cell`
pub fn lq_norm(values: &[Complex64], cell: f64, q: f64) -> f64 {
    if q == 2.0 {
        return (cell * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    }
    if q.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    (cell * values.iter().map(|v| v.norm().powf(q)).sum::<f64>()).powf(1.0 / q)
}

/// fourier coefficients in fft order (1/N-normalized)
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Spectrum { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.size()] }
    }

    /// build a 1d spectrum from a function of the angular frequency
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        assert_eq!(grid.dim(), 1, "from_fn needs a 1d grid");
        let coeffs = grid.wavenumbers().into_iter().map(f).collect();
        Spectrum { grid, coeffs }
    }

    pub fn to_physical(&self) -> Field {
        let mut buf = self.coeffs.clone();
        let n = self.grid.n();
        if self.grid.dim() == 1 {
            fft_inverse(&mut buf);
        } else {
            for row in buf.chunks_mut(n) {
                fft_inverse(row);
            }
            fft_columns(&mut buf, n, true);
        }
        Field { grid: self.grid, values: buf }
    }

    /// multiply by a real radial symbol
    pub fn multiply_radial(&self, symbol: impl Fn(f64) -> f64) -> Spectrum {
        let xs = self.grid.abs_wavenumbers();
        let coeffs = self.coeffs.iter().zip(&xs).map(|(c, &x)| c * symbol(x)).collect();
        Spectrum { grid: self.grid, coeffs }
    }

    /// weighted square sum L^d sum |c|^2 w(|xi|)^2 (Plancherel)
    pub fn weighted_l2(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let xs = self.grid.abs_wavenumbers();
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&xs)
            .map(|(c, &x)| {
                let w = weight(x);
                c.norm_sqr() * w * w
            })
            .sum();
        (self.grid.volume() * s).sqrt()
    }

    pub fn l2(&self) -> f64 {
        self.weighted_l2(|_| 1.0)
    }

    /// restrict or zero-pad a 1d spectrum to another size; the Nyquist mode is dropped
    pub fn resized(&self, n_new: usize) -> Result<Spectrum> {
        if self.grid.dim() != 1 {
            return precondition("resizing is implemented for 1d spectra");
        }
        let grid = Grid::new(n_new, self.grid.length())?;
        let mut out = vec![Complex64::new(0.0, 0.0); n_new];
        let half = self.grid.n().min(n_new) / 2;
        for k in 0..self.grid.n() {
            let m = self.grid.mode(k);
            if m.unsigned_abs() as usize >= half {
                continue;
            }
            let idx = if m >= 0 { m as usize } else { (n_new as i64 + m) as usize };
            out[idx] = self.coeffs[k];
        }
        Ok(Spectrum { grid, coeffs: out })
    }

    /// evaluate the trigonometric interpolant at an arbitrary point (1d)
    pub fn eval_at(&self, x: f64) -> Complex64 {
        let x0 = self.grid.x(0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.wavenumber(k);
            acc += c * Complex64::from_polar(1.0, xi * (x - x0));
        }
        acc
    }
}

/// the multiplier families in scope
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SymbolSpec {
    /// <xi>^s
    Bessel(f64),
    /// |xi|^s
    Riesz(f64),
    /// exp(-t |xi|^2)
    Heat(f64),
    /// exp(i t |xi|^2)
    Schrodinger(f64),
    LpBlock(u32),
    LpBelow(u32),
    LpAbove(u32),
}

impl SymbolSpec {
    pub fn eval(&self, xi: f64) -> Complex64 {
        let re = |v: f64| Complex64::new(v, 0.0);
        match *self {
            SymbolSpec::Bessel(s) => re((1.0 + xi * xi).powf(s / 2.0)),
            SymbolSpec::Riesz(s) => {
                if xi == 0.0 {
                    if s > 0.0 {
                        re(0.0)
                    } else if s == 0.0 {
                        re(1.0)
                    } else {
                        // zero mode is set to 0 and flagged by apply_symbol_flagged
                        re(0.0)
                    }
                } else {
                    re(xi.abs().powf(s))
                }
            }
            SymbolSpec::Heat(t) => re((-t * xi * xi).exp()),
            SymbolSpec::Schrodinger(t) => Complex64::from_polar(1.0, t * xi * xi),
            SymbolSpec::LpBlock(j) => re(lp_block_symbol(j as i32, xi)),
            SymbolSpec::LpBelow(j) => re(lp_below_symbol(j as i32, xi)),
            SymbolSpec::LpAbove(j) => re(lp_above_symbol(j as i32, xi)),
        }
    }

    /// true when the zero mode was forced to 0 (riesz with negative order)
    pub fn zero_mode_flag(&self) -> bool {
        matches!(*self, SymbolSpec::Riesz(s) if s < 0.0)
    }
}

/// symbol(xi) * uhat(xi) on a spectrum
pub fn apply_symbol_spectrum(spec: &Spectrum, symbol: SymbolSpec) -> Result<Spectrum> {
    let xs = spec.grid.abs_wavenumbers();
    let mut coeffs = Vec::with_capacity(spec.coeffs.len());
    for (c, &x) in spec.coeffs.iter().zip(&xs) {
        let m = symbol.eval(x);
        let v = c * m;
        if !(m.re.is_finite() && m.im.is_finite() && v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Range { freq: x });
        }
        coeffs.push(v);
    }
    Ok(Spectrum { grid: spec.grid, coeffs })
}

/// inverse transform of symbol(xi) * uhat(xi)
pub fn apply_symbol(field: &Field, symbol: SymbolSpec) -> Result<Field> {
    if !field.is_finite() {
        return precondition("input field has non-finite samples");
    }
    Ok(apply_symbol_spectrum(&field.to_spectrum(), symbol)?.to_physical())
}

/// like apply_symbol, also reporting whether the zero mode was zeroed
pub fn apply_symbol_flagged(field: &Field, symbol: SymbolSpec) -> Result<(Field, bool)> {
    let out = apply_symbol(field, symbol)?;
    let mean_nonzero = field.to_spectrum().coeffs[0].norm() > 0.0;
    Ok((out, symbol.zero_mode_flag() && mean_nonzero))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpKind {
    Block,
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Space,
    Time,
}

fn lp_symbol(kind: LpKind, j: i32, xi: f64) -> f64 {
    match kind {
        LpKind::Block => lp_block_symbol(j, xi),
        LpKind::Below => lp_below_symbol(j, xi),
        LpKind::Above => lp_above_symbol(j, xi),
    }
}

// the operator is identically zero on a band whose support starts above `top`
fn lp_truncated(kind: LpKind, j: u32, top: f64) -> bool {
    match kind {
        LpKind::Block | LpKind::Above => j >= 1 && 2f64.powi(j as i32 - 1) >= top,
        LpKind::Below => false,
    }
}

/// result of a projection together with the above-Nyquist flag
#[derive(Clone, Debug, PartialEq)]
pub struct Projected<T> {
    pub value: T,
    pub truncated: bool,
}

/// spatial projection P_j, P_{<j} or P_{>=j}
pub fn lp_project(field: &Field, j: u32, kind: LpKind) -> Projected<Field> {
    let truncated = lp_truncated(kind, j, field.grid.xi_max_abs());
    if truncated {
        return Projected { value: Field::zeros(field.grid), truncated };
    }
    let s = field.to_spectrum().multiply_radial(|x| lp_symbol(kind, j as i32, x));
    Projected { value: s.to_physical(), truncated }
}

/// spatial projection applied directly to a spectrum
pub fn lp_project_spectrum(spec: &Spectrum, j: u32, kind: LpKind) -> Spectrum {
    spec.multiply_radial(|x| lp_symbol(kind, j as i32, x))
}

/// temporal projection S_j, S_{<j} or S_{>=j} on a space-time field
pub fn lp_project_time(stf: &SpaceTimeField, j: u32, kind: LpKind) -> Projected<SpaceTimeField> {
    let top = PI / stf.time_step;
    let truncated = lp_truncated(kind, j, top);
    let value = stf.apply_spacetime_symbol(|tau, _| lp_symbol(kind, j as i32, tau));
    Projected { value, truncated }
}

/// projection along the chosen axis
pub fn lp_project_axis(
    stf: &SpaceTimeField,
    axis: Axis,
    j: u32,
    kind: LpKind,
) -> Projected<SpaceTimeField> {
    match axis {
        Axis::Time => lp_project_time(stf, j, kind),
        Axis::Space => {
            let top = stf.grid().xi_max_abs();
            let truncated = lp_truncated(kind, j, top);
            let value = stf.apply_spacetime_symbol(|_, xi| lp_symbol(kind, j as i32, xi));
            Projected { value, truncated }
        }
    }
}

fn check_same_grid(a: &Field, b: &Field) -> Result<()> {
    if a.grid != b.grid {
        return precondition("fields live on different grids");
    }
    Ok(())
}

fn blocks(field: &Field) -> Vec<Field> {
    let spec = field.to_spectrum();
    (0..=field.grid.lp_top_level() as u32)
        .map(|j| lp_project_spectrum(&spec, j, LpKind::Block).to_physical())
        .collect()
}

/// paraproduct T_v u = sum_k P_{<k-4} v * P_k u
pub fn paraproduct(v: &Field, u: &Field) -> Result<Field> {
    check_same_grid(v, u)?;
    let vs = v.to_spectrum();
    let ub = blocks(u);
    let mut out = Field::zeros(u.grid);
    for (k, uk) in ub.iter().enumerate() {
        let low = k as i32 - 4;
        if low <= 0 {
            continue;
        }
        let vlow = lp_project_spectrum(&vs, low as u32, LpKind::Below).to_physical();
        out = out.add(&vlow.mul(uk));
    }
    Ok(out)
}

/// resonant part sum_{|j-k|<=4} P_j u * P_k v, computed directly
pub fn resonant(u: &Field, v: &Field) -> Result<Field> {
    check_same_grid(u, v)?;
    let ub = blocks(u);
    let vb = blocks(v);
    let mut out = Field::zeros(u.grid);
    for (j, uj) in ub.iter().enumerate() {
        for (k, vk) in vb.iter().enumerate() {
            if (j as i64 - k as i64).abs() <= 4 {
                out = out.add(&uj.mul(vk));
            }
        }
    }
    Ok(out)
}

/// time-stamped stack of fields with a uniform step
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    pub time_step: f64,
    pub slices: Vec<Field>,
    pub origin_index: usize,
}

impl SpaceTimeField {
    pub fn new(time_step: f64, slices: Vec<Field>, origin_index: usize) -> Result<Self> {
        if !(time_step > 0.0 && time_step.is_finite()) {
            return precondition("time step must be positive");
        }
        if slices.is_empty() {
            return precondition("space-time field needs at least one slice");
        }
        if origin_index >= slices.len() {
            return precondition("origin index outside the slice range");
        }
        let g = slices[0].grid;
        if slices.iter().any(|s| s.grid != g) {
            return precondition("all slices must share one grid");
        }
        Ok(SpaceTimeField { time_step, slices, origin_index })
    }

    /// sample F(t, x) at t = (i - origin) * dt
    pub fn from_fn(
        grid: Grid,
        time_step: f64,
        n_before: usize,
        n_after: usize,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let slices = (0..n_before + n_after + 1)
            .map(|i| {
                let t = (i as f64 - n_before as f64) * time_step;
                Field::from_fn(grid, |x| f(t, x))
            })
            .collect();
        SpaceTimeField { time_step, slices, origin_index: n_before }
    }

    pub fn grid(&self) -> Grid {
        self.slices[0].grid
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.origin_index as f64) * self.time_step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// angular temporal frequency of fft index m
    pub fn temporal_frequency(&self, m: usize) -> f64 {
        let n = self.len();
        let mm = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * mm / (n as f64 * self.time_step)
    }

    /// space-time spectrum: time index slow, spatial spectrum fast
    pub fn to_spectrum(&self) -> Vec<Complex64> {
        let m = self.len();
        let g = self.grid().size();
        let mut buf = Vec::with_capacity(m * g);
        for s in &self.slices {
            buf.extend(s.to_spectrum().coeffs);
        }
        let f = plan(m, false);
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        let sc = 1.0 / m as f64;
        for c in 0..g {
            for r in 0..m {
                col[r] = buf[r * g + c];
            }
            f.process(&mut col);
            for r in 0..m {
                buf[r * g + c] = col[r] * sc;
            }
        }
        buf
    }

    pub(crate) fn from_spectrum(&self, mut buf: Vec<Complex64>) -> SpaceTimeField {
        let m = self.len();
        let grid = self.grid();
        let g = grid.size();
        let f = plan(m, true);
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for c in 0..g {
            for r in 0..m {
                col[r] = buf[r * g + c];
            }
            f.process(&mut col);
            for r in 0..m {
                buf[r * g + c] = col[r];
            }
        }
        let slices = buf
            .chunks(g)
            .map(|ch| Spectrum { grid, coeffs: ch.to_vec() }.to_physical())
            .collect();
        SpaceTimeField { time_step: self.time_step, slices, origin_index: self.origin_index }
    }

    /// multiply the space-time spectrum by symbol(|tau|, |xi|)
    pub fn apply_spacetime_symbol(&self, symbol: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
        let mut buf = self.to_spectrum();
        let xs = self.grid().abs_wavenumbers();
        let g = xs.len();
        for r in 0..self.len() {
            let tau = self.temporal_frequency(r).abs();
            for c in 0..g {
                buf[r * g + c] *= symbol(tau, xs[c]);
            }
        }
        self.from_spectrum(buf)
    }

    /// total space-time energy sum |F|^2 dt dx
    pub fn energy(&self) -> f64 {
        let cell = self.grid().cell() * self.time_step;
        self.slices.iter().flat_map(|s| s.values.iter()).map(|v| v.norm_sqr()).sum::<f64>() * cell
    }

    pub fn max_abs_diff(&self, other: &SpaceTimeField, t_range: (f64, f64)) -> f64 {
        let mut m: f64 = 0.0;
        for (i, (a, b)) in self.slices.iter().zip(&other.slices).enumerate() {
            let t = self.time(i);
            if t < t_range.0 - 1e-12 || t > t_range.1 + 1e-12 {
                continue;
            }
            for (x, y) in a.values.iter().zip(&b.values) {
                m = m.max((x - y).norm());
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Near,
    Far,
}

// S~_{2j}: temporal bands 2j-3 ..= 2j+3
fn enlarged_band(j: i32, tau: f64) -> f64 {
    let lo = 2 * j - MODULATION_ENLARGEMENT;
    let hi = 2 * j + MODULATION_ENLARGEMENT;
    lp_below_symbol(hi + 1, tau) - lp_below_symbol(lo.max(0), tau)
}

/// symbol of the near-modulation projector, sum_j S~_{2j}(tau) P_j(xi)
pub fn near_symbol(tau: f64, xi: f64, top_level: i32) -> f64 {
    let mut acc = 0.0;
    for j in 0..=top_level {
        let p = lp_block_symbol(j, xi);
        if p != 0.0 {
            acc += enlarged_band(j, tau) * p;
        }
    }
    acc
}

/// near (|tau| ~ |xi|^2) or far projection of a space-time field
pub fn modulation_project(stf: &SpaceTimeField, region: Modulation) -> Result<SpaceTimeField> {
    if stf.len() < 8 {
        return precondition(format!("time window has {} samples, at least 8 needed", stf.len()));
    }
    let top = stf.grid().lp_top_level();
    Ok(match region {
        Modulation::Near => stf.apply_spacetime_symbol(|tau, xi| near_symbol(tau, xi, top)),
        Modulation::Far => stf.apply_spacetime_symbol(|tau, xi| 1.0 - near_symbol(tau, xi, top)),
    })
}

/// energy shares (near, far, total): each space-time mode contributes m|F|^2 to near and
/// (1-m)|F|^2 to far, m the near symbol, so near + far = total
pub fn modulation_energy_split(stf: &SpaceTimeField) -> Result<(f64, f64, f64)> {
    if stf.len() < 8 {
        return precondition(format!("time window has {} samples, at least 8 needed", stf.len()));
    }
    let buf = stf.to_spectrum();
    let xs = stf.grid().abs_wavenumbers();
    let g = xs.len();
    let top = stf.grid().lp_top_level();
    let (mut near, mut total) = (0.0, 0.0);
    for r in 0..stf.len() {
        let tau = stf.temporal_frequency(r).abs();
        for c in 0..g {
            let e = buf[r * g + c].norm_sqr();
            near += near_symbol(tau, xs[c], top) * e;
            total += e;
        }
    }
    Ok((near, total - near, total))
}
