mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qlwave::energy::{modified_energy, rep_u_residual};
use qlwave::filters::{scalar_inequality_margin, sinc};
use qlwave::integrator::{linear_propagator, step, IntegratorConfig, StatePair};
use qlwave::problem::{ellipticity_report, model_problem, model_problem_quasilinear, paper_initial_data};
use qlwave::reference::error_h2h1;
use qlwave::spectral::{
    dealiased_product, inner_product, interpolate, multiplier, project, sobolev_norm, synthesize, NormOrder, SpectralField,
};
use qlwave::FilterSpec;

fn field_with_degree(degree: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), degree + 1).prop_map(|modes| {
        let m: Vec<Complex64> = modes
            .iter()
            .enumerate()
            .map(|(j, &(re, im))| Complex64::new(re, if j == 0 { 0.0 } else { im }))
            .collect();
        SpectralField::from_nonnegative_modes(&m).unwrap()
    })
}

fn field() -> impl Strategy<Value = SpectralField> {
    (1usize..=16).prop_flat_map(field_with_degree)
}

fn field_pair() -> impl Strategy<Value = (SpectralField, SpectralField)> {
    (1usize..=16).prop_flat_map(|k| (field_with_degree(k), field_with_degree(k)))
}

fn filter() -> impl Strategy<Value = FilterSpec> {
    prop::sample::select(catalog())
}

fn admissible_filter() -> impl Strategy<Value = FilterSpec> {
    prop::sample::select(admissible())
}

fn is_hermitian(f: &SpectralField) -> bool {
    let k = f.degree() as i64;
    (-k..=k).all(|j| f.coeff(-j) == f.coeff(j).conj())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_inverts_synthesis(f in field()) {
        let k = f.degree();
        let back = interpolate(&synthesize(&f, 2 * k + 1).unwrap(), k).unwrap();
        prop_assert!(back.max_abs_diff(&f) <= 1e-12 * sobolev_norm(&f, 0).max(1.0));
    }

    #[test]
    fn projection_is_orthogonal(v in field_with_degree(6), w in field_with_degree(14), s in 0u32..3) {
        let lhs = inner_product(&v, &project(&w, 6), s);
        let rhs = inner_product(&v, &w, s);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn dealiased_product_matches_convolution((f, g) in field_pair()) {
        let ours = dealiased_product(&f, &g);
        let dense = convolve(&coeffs(&f), &coeffs(&g));
        let scale = dense.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_diff(&coeffs(&ours), &dense) <= 1e-13 * scale);
    }

    #[test]
    fn real_multipliers_keep_fields_real(f in field(), tau in 0.0f64..5.0, spec in filter()) {
        let g = multiplier(|w| spec.phi(tau * w), &f).unwrap();
        prop_assert!(is_hermitian(&g));
        let g = multiplier(|w| (tau * w).cos(), &f).unwrap();
        prop_assert!(is_hermitian(&g));
    }

    #[test]
    fn sobolev_norms_increase_with_order(f in field(), s in 0.0f64..4.0, ds in 0.0f64..2.0) {
        prop_assert!(sobolev_norm(&f, NormOrder::new(s).unwrap()) <= sobolev_norm(&f, NormOrder::new(s + ds).unwrap()) * (1.0 + 1e-15));
    }

    #[test]
    fn psi_is_sinc_times_phi(xi in 0.0f64..1000.0, spec in admissible_filter()) {
        prop_assert!((spec.psi1(xi) - sinc(xi) * spec.phi(xi)).abs() <= 1e-15);
    }

    #[test]
    fn sinc_filter_bounds(xi in 0.0f64..1000.0, c in 0.5f64..4.0, a0 in 0.0f64..20.0) {
        let spec = FilterSpec::sinc_c(c).unwrap();
        let phi = spec.phi(xi);
        let s = (xi / 2.0).sin();
        prop_assert!(a0 * s * s * phi * phi <= a0 / (4.0 * c * c) * (1.0 + 1e-12) + 1e-300);
        if xi <= 3.0 {
            let c0 = f64::max(1.0, (c * c + 1.0) / 6.0);
            prop_assert!((1.0 - phi).abs() <= c0 * xi * xi + 1e-15);
        }
    }

    #[test]
    fn scalar_inequality_interior_follows_endpoints(xi in 0.0f64..50.0, t in 0.0f64..1.0) {
        let spec = FilterSpec::sinc_c(2.0).unwrap();
        let (delta, a0) = (0.15, 13.0);
        let lo = -1.0 + delta / 2.0;
        let hi = a0 + delta / 2.0;
        if scalar_inequality_margin(&spec, delta, lo, xi) >= 0.0 && scalar_inequality_margin(&spec, delta, hi, xi) >= 0.0 {
            prop_assert!(scalar_inequality_margin(&spec, delta, lo + t * (hi - lo), xi) >= -1e-12);
        }
    }

    #[test]
    fn ellipticity_is_resolved_by_refinement(u in field_with_degree(4)) {
        let p = model_problem(1.0);
        let a = ellipticity_report(&p, &u, 64).unwrap();
        let b = ellipticity_report(&p, &u, 128).unwrap();
        // The 64-node grid is a subset of the 128-node grid.
        prop_assert!(b.delta_est <= a.delta_est + 1e-12);
        prop_assert!(b.a0_est >= a.a0_est - 1e-12);
    }

    #[test]
    fn linear_flow_preserves_the_pair_norm((u, v) in field_pair(), t in -20.0f64..20.0) {
        let s = StatePair::new(u, v).unwrap();
        let r = linear_propagator(&s, t);
        prop_assert!((r.norm(1.0) - s.norm(1.0)).abs() <= 1e-12 * s.norm(1.0).max(1e-300));
    }

    #[test]
    fn linear_steps_are_exact((u, v) in field_pair(), tau in 0.01f64..2.0, spec in filter()) {
        let s = StatePair::new(u, v).unwrap();
        let cfg = IntegratorConfig::new(tau, s.degree(), spec).unwrap();
        let one = step(&s, &model_problem(0.0), &cfg).unwrap();
        prop_assert!(error_h2h1(&one, &linear_propagator(&s, tau)).unwrap() <= 1e-12 * s.norm(1.0).max(1.0));
    }

    #[test]
    fn single_steps_stay_bounded((u, v) in field_pair(), tau in 0.01f64..1.0, spec in admissible_filter()) {
        // Data with ⫼·⫼₁ at most M stay within a fixed multiple after one step.
        let m = 1.0;
        let n = StatePair::new(u.clone(), v.clone()).unwrap().norm(1.0).max(1e-300);
        let s = StatePair::new(u.scale(m / n), v.scale(m / n)).unwrap();
        let cfg = IntegratorConfig::new(tau, s.degree(), spec).unwrap();
        let one = step(&s, &model_problem(1.0), &cfg).unwrap();
        prop_assert!(one.is_finite());
        prop_assert!(one.norm(1.0) <= 10.0 * m);
    }

    #[test]
    fn method_is_symmetric((u, v) in field_pair(), tau in 0.01f64..1.0, spec in filter()) {
        let p = model_problem(1.0);
        let s = StatePair::new(u.scale(0.2), v.scale(0.2)).unwrap();
        let cfg = IntegratorConfig::new(tau, s.degree(), spec).unwrap();
        let back = step(&step(&s, &p, &cfg).unwrap().reversed(), &p, &cfg).unwrap().reversed();
        prop_assert!(back.max_abs_diff(&s) <= 1e-12);
    }

    #[test]
    fn rep_u_identity((e, u) in field_pair(), tau in 0.001f64..3.0, spec in admissible_filter(), kappa in -1.0f64..1.0) {
        let cfg = IntegratorConfig::new(tau, e.degree(), spec).unwrap();
        prop_assert!(rep_u_residual(&e, &u.scale(0.3), &model_problem(kappa), &cfg).unwrap() <= 1e-11);
    }

    #[test]
    fn energy_is_quadratic((e, ed) in field_pair(), lambda in prop::sample::select(vec![2.0, 10.0])) {
        let k = e.degree();
        let p = model_problem_quasilinear(1.0);
        let u = paper_initial_data(k).u;
        let cfg = IntegratorConfig::new(0.1, k, FilterSpec::sinc_c(2.0).unwrap()).unwrap();
        let base = modified_energy(&e, &ed, &u, &p, &cfg).unwrap().e_value;
        let scaled = modified_energy(&e.scale(lambda), &ed.scale(lambda), &u, &p, &cfg).unwrap().e_value;
        prop_assert!((scaled - lambda * lambda * base).abs() <= 1e-12 * scaled.abs().max(1e-300));
    }

    #[test]
    fn initial_data_decrease(k in 1usize..200) {
        let s = paper_initial_data(k);
        for f in [&s.u, &s.udot] {
            for j in 0..k as i64 {
                prop_assert!(f.coeff(j).re > f.coeff(j + 1).re && f.coeff(j + 1).re > 0.0);
            }
        }
    }
}
