//! Test profiles: the standard window, the witness datum, seeded corpora.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{Field, Grid, Spectrum};

/// the standard window chi(x) = exp(-x^2/2)
pub fn window(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

/// derivative of the window
pub fn window_dx(x: f64) -> f64 {
    -x * window(x)
}

/// chi(x) * x, smooth with a single transversal zero at the origin
pub fn witness(x: f64) -> f64 {
    x * window(x)
}

/// delta * chi(x - shift) (x - shift) sampled on the grid
pub fn witness_field(grid: Grid, delta: f64, shift: f64) -> Field {
    Field::from_real_fn(grid, |x| delta * witness(x - shift))
}

/// |delta * chi(x - shift) (x - shift)|: one kink, Lipschitz
pub fn kink_field(grid: Grid, delta: f64, shift: f64) -> Field {
    Field::from_real_fn(grid, |x| (delta * witness(x - shift)).abs())
}

/// exact fourier coefficients of delta * chi(x) x on the torus (gaussian tails neglected)
pub fn witness_spectrum(grid: Grid, delta: f64) -> Spectrum {
    let x0 = grid.x(0);
    let l = grid.length();
    Spectrum::from_fn(grid, |xi| {
        // fourier transform of x exp(-x^2/2) is -i sqrt(2 pi) xi exp(-xi^2/2)
        let fhat = Complex64::new(0.0, -(2.0 * PI).sqrt() * xi * (-0.5 * xi * xi).exp());
        Complex64::from_polar(delta / l, xi * x0) * fhat
    })
}

/// mass of |u|^2 in the outer eighths of the torus relative to the total
pub fn outer_tail_mass(field: &Field) -> f64 {
    let g = field.grid;
    let l = g.length();
    let mut outer = 0.0;
    let mut total = 0.0;
    for (i, v) in field.values.iter().enumerate() {
        let x = g.x(i % g.n());
        let e = v.norm_sqr();
        total += e;
        if x.abs() >= 3.0 * l / 8.0 {
            outer += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

/// flavour of a seeded corpus member
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    /// complex windowed trigonometric sum
    Complex,
    /// real windowed trigonometric sum, generically with transversal zeros
    RealWithZeros,
}

/// a windowed trigonometric sum chi(x) * sum_k a_k exp(i (w_k x + phi_k))
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusMember {
    pub kind: CorpusKind,
    pub amps: Vec<Complex64>,
    pub freqs: Vec<f64>,
    pub phases: Vec<f64>,
}

impl CorpusMember {
    pub fn generate(seed: u64, index: u64, kind: CorpusKind) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let modes = 4;
        let mut amps = Vec::with_capacity(modes);
        let mut freqs = Vec::with_capacity(modes);
        let mut phases = Vec::with_capacity(modes);
        for _ in 0..modes {
            let a: f64 = rng.gen_range(0.2..1.0);
            let b: f64 = match kind {
                CorpusKind::Complex => rng.gen_range(-1.0..1.0),
                CorpusKind::RealWithZeros => 0.0,
            };
            amps.push(Complex64::new(a, b));
            freqs.push(rng.gen_range(0.5..4.0));
            phases.push(rng.gen_range(0.0..2.0 * PI));
        }
        CorpusMember { kind, amps, freqs, phases }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((a, w), ph) in self.amps.iter().zip(&self.freqs).zip(&self.phases) {
            match self.kind {
                CorpusKind::Complex => acc += a * Complex64::from_polar(1.0, w * x + ph),
                CorpusKind::RealWithZeros => acc += a.re * (w * x + ph).cos(),
            }
        }
        acc * window(x)
    }

    pub fn sample(&self, grid: Grid) -> Field {
        Field::from_fn(grid, |x| self.eval(x))
    }
}

/// a seeded corpus of `count` members
pub fn corpus(seed: u64, count: usize, kind: CorpusKind) -> Vec<CorpusMember> {
    (0..count as u64).map(|i| CorpusMember::generate(seed, i, kind)).collect()
}

/// a seeded 2d member: a sum of windowed plane waves, some separable, some radial
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusMember2d {
    pub amps: Vec<f64>,
    pub freqs: Vec<(f64, f64)>,
    pub phases: Vec<f64>,
    pub radial: bool,
}

impl CorpusMember2d {
    pub fn generate(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        let modes = 3;
        let amps = (0..modes).map(|_| rng.gen_range(0.2..1.0)).collect();
        let freqs = (0..modes).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
        let phases = (0..modes).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        CorpusMember2d { amps, freqs, phases, radial: index % 2 == 1 }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let mut acc = 0.0;
        for ((a, (w1, w2)), ph) in self.amps.iter().zip(&self.freqs).zip(&self.phases) {
            if self.radial {
                let r = (x1 * x1 + x2 * x2).sqrt();
                acc += a * (w1.abs() * r + ph).cos();
            } else {
                acc += a * (w1 * x1 + w2 * x2 + ph).cos();
            }
        }
        acc * window(x1) * window(x2)
    }

    pub fn sample(&self, grid: Grid) -> Field {
        Field::from_fn_2d(grid, |a, b| Complex64::new(self.eval(a, b), 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_spectrum_matches_sampled_transform() {
        let g = Grid::new(1024, 16.0).unwrap();
        let exact = witness_spectrum(g, 0.1);
        let sampled = witness_field(g, 0.1, 0.0).to_spectrum();
        let err: f64 = exact
            .coeffs
            .iter()
            .zip(&sampled.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-15, "{err}");
    }

    #[test]
    fn window_tail_mass_is_negligible() {
        let g = Grid::new(4096, 16.0).unwrap();
        assert!(outer_tail_mass(&witness_field(g, 1.0, 0.0)) < 1e-10);
        for m in corpus(1, 5, CorpusKind::Complex) {
            assert!(outer_tail_mass(&m.sample(g)) < 1e-10);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = corpus(42, 3, CorpusKind::RealWithZeros);
        let b = corpus(42, 3, CorpusKind::RealWithZeros);
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
