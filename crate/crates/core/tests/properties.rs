use num_complex::Complex64;
use proptest::prelude::*;
use roughpower::evolution::{linear_propagate, Equation};
use roughpower::experiments::{refinement_classifier, VerdictStatus};
use roughpower::nonlinearity::{estimate_ratio_main, power_apply};
use roughpower::report::{Cell, Format, Metadata, Report, VerdictRow};
use roughpower::spaces::{frequency_envelope, sobolev_norm, Flavor, NormSpec};
use roughpower::spectral::{apply_symbol, lp_project, Field, Grid, LpKind, SymbolSpec};
use roughpower::splines::{finite_diffs, spline_approx};

fn field_from(grid: Grid, data: &[(f64, f64)]) -> Field {
    Field::new(grid, data.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn samples(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

// smooth periodic data: a few low modes with random amplitudes
fn smooth(grid: Grid, amps: &[(f64, f64)]) -> Field {
    let l = grid.length();
    Field::from_fn(grid, |x| {
        amps.iter()
            .enumerate()
            .map(|(k, &(a, b))| Complex64::new(a, b) * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k as f64 + 1.0) * x / l))
            .sum::<Complex64>()
            + Complex64::new(0.3, 0.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_sum_to_the_field(data in samples(128), length in 4.0..32.0f64) {
        let g = Grid::new(128, length).unwrap();
        let u = field_from(g, &data);
        let mut sum = Field::zeros(g);
        for j in 0..=g.lp_top_level() as u32 {
            sum = sum.add(&lp_project(&u, j, LpKind::Block).value);
        }
        prop_assert!(sum.sub(&u).l2() <= 1e-12 * u.l2().max(1e-300));
    }

    #[test]
    fn below_and_above_split_the_field(data in samples(128), j in 0u32..6) {
        let g = Grid::new(128, 16.0).unwrap();
        let u = field_from(g, &data);
        let lo = lp_project(&u, j, LpKind::Below).value;
        let hi = lp_project(&u, j, LpKind::Above).value;
        prop_assert!(lo.add(&hi).sub(&u).max_abs() <= 1e-12);
    }

    #[test]
    fn bessel_multipliers_compose(data in samples(64), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = Grid::new(64, 8.0).unwrap();
        let u = field_from(g, &data);
        let two = apply_symbol(&apply_symbol(&u, SymbolSpec::Bessel(a)).unwrap(), SymbolSpec::Bessel(b)).unwrap();
        let one = apply_symbol(&u, SymbolSpec::Bessel(a + b)).unwrap();
        let scale = one.max_abs().max(1.0);
        prop_assert!(two.sub(&one).max_abs() <= 1e-11 * scale);
    }

    #[test]
    fn schrodinger_flow_is_unitary_and_reversible(data in samples(64), t in -1.0..1.0f64) {
        let g = Grid::new(64, 8.0).unwrap();
        let u = field_from(g, &data);
        let v = linear_propagate(&u, t, Equation::Schrodinger).unwrap();
        prop_assert!((v.l2() - u.l2()).abs() <= 1e-12 * u.l2());
        let back = linear_propagate(&v, -t, Equation::Schrodinger).unwrap();
        prop_assert!(back.sub(&u).max_abs() <= 1e-12);
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(data in samples(128), s in -1.0..2.0f64, ds in 0.0..1.0f64, q in 1.2..4.0f64) {
        let g = Grid::new(128, 16.0).unwrap();
        let u = field_from(g, &data);
        let a = sobolev_norm(&u, s, 2.0, Flavor::Inhomogeneous).unwrap();
        let b = sobolev_norm(&u, s + ds, 2.0, Flavor::Inhomogeneous).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
        // and scales linearly for every q
        let c = sobolev_norm(&u.scale(Complex64::new(0.0, -3.0)), s, q, Flavor::Inhomogeneous).unwrap();
        let d = sobolev_norm(&u, s, q, Flavor::Inhomogeneous).unwrap();
        prop_assert!((c - 3.0 * d).abs() <= 1e-12 * c);
    }

    #[test]
    fn power_is_phase_equivariant(data in samples(64), theta in 0.0..6.3f64, p in 1.1..4.0f64) {
        let g = Grid::new(64, 8.0).unwrap();
        let u = field_from(g, &data);
        let rot = Complex64::from_polar(1.0, theta);
        let one = Complex64::new(1.0, 0.0);
        let a = power_apply(&u.scale(rot), p, one).unwrap();
        let b = power_apply(&u, p, one).unwrap().scale(rot);
        prop_assert!(a.sub(&b).max_abs() <= 1e-14);
    }

    #[test]
    fn estimate_ratio_is_scale_invariant(amps in samples(4), k in 1i32..4, s in 1.0..3.0f64) {
        let g = Grid::new(256, 16.0).unwrap();
        let u = smooth(g, &amps);
        let a = estimate_ratio_main(&u, 2.5, s, 2.0, 0.05).unwrap();
        let b = estimate_ratio_main(&u.scale(Complex64::new(4f64.powi(k), 0.0)), 2.5, s, 2.0, 0.05).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-10 * a.ratio);
    }

    #[test]
    fn envelope_is_slowly_varying_and_majorizes(data in samples(128), delta in 0.05..0.5f64) {
        let g = Grid::new(128, 16.0).unwrap();
        let u = field_from(g, &data);
        let spec = NormSpec::sobolev(0.5, 2.0).unwrap();
        let env = frequency_envelope(&u, &spec, delta).unwrap();
        prop_assert!(env.check().is_ok());
        let total = spec.norm(&u).unwrap();
        for (j, c) in env.entries.iter().enumerate() {
            let piece = spec.norm(&lp_project(&u, j as u32, LpKind::Block).value).unwrap();
            prop_assert!(piece <= c * total * (1.0 + 1e-12));
        }
    }

    #[test]
    fn first_differences_telescope(data in samples(256), j in 0u32..5) {
        let g = Grid::new(256, 16.0).unwrap();
        let u = field_from(g, &data);
        let t = finite_diffs(&u, j, 1).unwrap();
        // periodic differences sum to zero, and partial sums recover the knot values
        let stride = 256 / t.entries.len();
        let mut acc = u.values[0];
        for (k, d) in t.entries.iter().enumerate().take(t.entries.len() - 1) {
            acc += d;
            prop_assert!((acc - u.values[(k + 1) * stride]).norm() <= 1e-13);
        }
        let total: Complex64 = t.entries.iter().sum();
        prop_assert!(total.norm() <= 1e-13);
    }

    #[test]
    fn spline_of_a_spline_is_itself(data in samples(256), j in 0u32..3, extra in 0u32..2) {
        let g = Grid::new(256, 16.0).unwrap();
        let u = field_from(g, &data);
        let (_, f) = spline_approx(&u, j).unwrap();
        let (_, ff) = spline_approx(&f, j + extra).unwrap();
        prop_assert!(ff.sub(&f).max_abs() <= 1e-14);
    }

    #[test]
    fn geometric_sequences_diverge_with_their_rate(v0 in 0.1..10.0f64, rate in 0.3..2.0f64, len in 3usize..6) {
        let values: Vec<f64> = (0..len).map(|i| v0 * 2f64.powf(rate * i as f64)).collect();
        let v = refinement_classifier(&values, 0.1).unwrap();
        prop_assert_eq!(v.status, VerdictStatus::Diverged);
        prop_assert!((v.exponent.unwrap() - rate).abs() <= 1e-9);
    }

    #[test]
    fn flat_sequences_converge(v0 in 0.1..10.0f64, wiggle in prop::collection::vec(-0.04..0.04f64, 4)) {
        let values: Vec<f64> = wiggle.iter().map(|w| v0 * (1.0 + w)).collect();
        let v = refinement_classifier(&values, 0.1).unwrap();
        prop_assert_eq!(v.status, VerdictStatus::Converged);
    }

    #[test]
    fn reports_round_trip(
        values in prop::collection::vec((-1e300..1e300f64, 0usize..1 << 20), 0..12),
        seed in any::<u64>(),
        note in "[a-z ,]{0,20}",
    ) {
        let mut r = Report::new("scan-abs", Metadata::new(seed, 16.0), &["series", "s", "n", "value"]);
        for &(v, n) in &values {
            r.push_row(vec![Cell::from("series-a"), Cell::from(1.25), Cell::from(n), Cell::from(v)]);
        }
        if let Ok(verdict) = refinement_classifier(&[1.0, 2.0, 4.0, 8.0], 0.1) {
            r.verdicts.push(VerdictRow { series: "series-a".into(), s: 1.25, verdict, note: String::new() });
        }
        r.notes.push(note.replace(',', ";"));
        for f in [Format::Csv, Format::Json] {
            let back = Report::parse(&r.serialize(f).unwrap(), f).unwrap();
            prop_assert_eq!(&back, &r);
        }
    }
}
