//! Quasilinear wave problems `∂ₜ²u = ∂ₓ²u - u + κ a(u) ∂ₓ²u + κ g(u, ∂ₓu)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::StatePair;
use crate::spectral::{synthesize, SpectralField};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type PairGradFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

const ORIGIN_TOLERANCE: f64 = 1e-14;

/// Coefficient `κ` and the nonlinearities `a`, `g` of the equation.
///
/// Both functions are evaluated pointwise on grids only. Derivatives may be
/// attached for diagnostics; the integrator never calls them.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub kappa: f64,
    a: ScalarFn,
    g: PairFn,
    g_vanishes: bool,
    pub da: Option<ScalarFn>,
    pub dg: Option<PairGradFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("kappa", &self.kappa)
            .field("g_vanishes", &self.g_vanishes)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Registers a problem; checks `a(0) = 0` and `g(0, 0) = 0`.
    pub fn new(
        name: impl Into<String>,
        kappa: f64,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            name: name.into(),
            kappa,
            a: Arc::new(a),
            g: Arc::new(g),
            g_vanishes: false,
            da: None,
            dg: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A problem with `g ≡ 0`, the purely quasilinear case.
    pub fn quasilinear(
        name: impl Into<String>,
        kappa: f64,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut spec = ProblemSpec::new(name, kappa, a, |_, _| 0.0)?;
        spec.g_vanishes = true;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be finite, got {}", self.kappa)));
        }
        let a0 = (self.a)(0.0);
        if !(a0.abs() <= ORIGIN_TOLERANCE) {
            return Err(Error::Config(format!("a(0) must vanish, got {a0}")));
        }
        let g0 = (self.g)(0.0, 0.0);
        if !(g0.abs() <= ORIGIN_TOLERANCE) {
            return Err(Error::Config(format!("g(0, 0) must vanish, got {g0}")));
        }
        Ok(())
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        ProblemSpec { kappa, ..self.clone() }
    }

    #[inline]
    pub fn a(&self, u: f64) -> f64 {
        (self.a)(u)
    }

    #[inline]
    pub fn g(&self, u: f64, ux: f64) -> f64 {
        (self.g)(u, ux)
    }

    /// True when the problem was registered with `g ≡ 0`.
    pub fn g_vanishes(&self) -> bool {
        self.g_vanishes
    }
}

/// `a(u) = u`, `g(u, uₓ) = uₓ² + κu³`.
pub fn model_problem(kappa: f64) -> ProblemSpec {
    let mut p = ProblemSpec::new("model", kappa, |u| u, move |u, ux| ux * ux + kappa * u * u * u)
        .expect("model problem satisfies a(0) = g(0,0) = 0");
    p.da = Some(Arc::new(|_| 1.0));
    p.dg = Some(Arc::new(move |u, ux| (3.0 * kappa * u * u, 2.0 * ux)));
    p
}

/// The model problem with `g` switched off, `a(u) = u`.
pub fn model_problem_quasilinear(kappa: f64) -> ProblemSpec {
    let mut p = ProblemSpec::quasilinear("model-a", kappa, |u| u).expect("a(0) = 0");
    p.da = Some(Arc::new(|_| 1.0));
    p
}

/// Looks up a named problem.
pub fn problem_by_name(name: &str, kappa: f64) -> Result<ProblemSpec> {
    match name {
        "model" => Ok(model_problem(kappa)),
        "model-a" => Ok(model_problem_quasilinear(kappa)),
        "linear" => Ok(model_problem(0.0).with_kappa(0.0)),
        _ => Err(Error::Config(format!(
            "unknown problem '{name}' (expected model, model-a or linear)"
        ))),
    }
}

/// Initial data with coefficients `(1+|j|^{11+1/50})^{-1/2}` for `u₀` and
/// `(1+|j|^{9+1/50})^{-1/2}` for `u̇₀`, truncated to `|j| ≤ K`.
///
/// The data lie in `H⁵ × H⁴` but in no `H^{5+σ} × H^{4+σ}` with `σ ≥ 1/100`.
pub fn paper_initial_data(degree: usize) -> StatePair {
    let coeff = |p: f64| move |j: i64| Complex64::new((1.0 + (j.unsigned_abs() as f64).powf(p)).powf(-0.5), 0.0);
    let u = SpectralField::from_fn(degree, coeff(11.0 + 1.0 / 50.0));
    let udot = SpectralField::from_fn(degree, coeff(9.0 + 1.0 / 50.0));
    StatePair::new(u, udot).expect("equal degrees")
}

/// Grid estimates of `δ = min(1 + κa(u))` and `A₀ = max(κa(u))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticityReport {
    pub delta_est: f64,
    pub a0_est: f64,
    pub grid_size: usize,
    /// Set when `delta_est ≤ 0`: the equation has lost its wave character.
    pub hyperbolicity_lost: bool,
}

/// Evaluates `κ a(u)` at `nodes` equispaced points.
pub fn ellipticity_report(p: &ProblemSpec, u: &SpectralField, nodes: usize) -> Result<EllipticityReport> {
    let grid = synthesize(u, nodes)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in grid.values() {
        let ka = p.kappa * p.a(v);
        if !ka.is_finite() {
            return Err(Error::NonFinite(format!("kappa*a(u) = {ka} at u = {v}")));
        }
        lo = lo.min(ka);
        hi = hi.max(ka);
    }
    let delta_est = 1.0 + lo;
    Ok(EllipticityReport {
        delta_est,
        a0_est: hi,
        grid_size: nodes,
        hyperbolicity_lost: delta_est <= 0.0,
    })
}

/// [`ellipticity_report`] on the default `4K+1` grid.
pub fn ellipticity_report_default(p: &ProblemSpec, u: &SpectralField) -> Result<EllipticityReport> {
    ellipticity_report(p, u, 4 * u.degree() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{pair_norm, NormOrder};

    #[test]
    fn model_problem_vanishes_at_origin() {
        for kappa in [0.01, 1.0] {
            let p = model_problem(kappa);
            assert_eq!(p.a(0.0), 0.0);
            assert_eq!(p.g(0.0, 0.0), 0.0);
            assert_eq!(p.kappa, kappa);
            assert_eq!(p.g(2.0, 3.0), 9.0 + kappa * 8.0);
        }
    }

    #[test]
    fn registration_rejects_bad_origin() {
        assert!(ProblemSpec::new("bad", 1.0, |u| u + 1.0, |_, _| 0.0).is_err());
        assert!(ProblemSpec::new("bad", 1.0, |u| u, |_, _| 0.5).is_err());
        assert!(ProblemSpec::new("bad", f64::NAN, |u| u, |_, _| 0.0).is_err());
        assert!(problem_by_name("nope", 1.0).is_err());
    }

    #[test]
    fn initial_data_coefficients() {
        let s = paper_initial_data(8);
        assert_eq!(s.u.coeff(0).re, 1.0);
        assert!((s.u.coeff(1).re - 0.5f64.sqrt()).abs() < 1e-16);
        assert_eq!(s.u.coeff(-3), s.u.coeff(3));
        for j in 0..8i64 {
            assert!(s.u.coeff(j).re > s.u.coeff(j + 1).re && s.u.coeff(j + 1).re > 0.0);
            assert!(s.udot.coeff(j).re > s.udot.coeff(j + 1).re && s.udot.coeff(j + 1).re > 0.0);
            assert_eq!(s.u.coeff(j).im, 0.0);
        }
    }

    #[test]
    fn initial_data_regularity_threshold() {
        // Doubling increments of ⫼·⫼₄² shrink geometrically (factor 2^{-0.02},
        // a convergent tail) while those of ⫼·⫼_{4.01}² tend to a constant
        // (a harmonic, divergent tail).
        let s4 = NormOrder::new(4.0).unwrap();
        let s401 = NormOrder::new(4.01).unwrap();
        let sizes = [256usize, 512, 1024, 2048, 4096];
        let sums = |s: NormOrder| -> Vec<f64> {
            sizes
                .iter()
                .map(|&k| {
                    let d = paper_initial_data(k);
                    pair_norm(&d.u, &d.udot, s).powi(2)
                })
                .collect()
        };
        let inc = |v: Vec<f64>| -> Vec<f64> { v.windows(2).map(|w| w[1] - w[0]).collect() };
        let conv = inc(sums(s4));
        let div = inc(sums(s401));
        for w in conv.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 2f64.powf(-0.02)).abs() < 2e-3, "ratio {ratio}");
        }
        for w in div.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 1.0).abs() < 2e-3, "ratio {ratio}");
        }
        // Each doubling adds about 4 ln 2 to the divergent sum (two fields, both signs of j).
        assert!((div.last().unwrap() - 4.0 * 2f64.ln()).abs() < 0.05);
    }

    #[test]
    fn ellipticity_examples() {
        let p = model_problem(1.0);
        let r = ellipticity_report(&p, &SpectralField::zeros(4), 17).unwrap();
        assert_eq!((r.delta_est, r.a0_est), (1.0, 0.0));
        assert!(!r.hyperbolicity_lost);

        let q = ProblemSpec::quasilinear("neg", -1.0, |u| u).unwrap();
        let r = ellipticity_report(&q, &SpectralField::constant(2.0), 5).unwrap();
        assert!((r.delta_est + 1.0).abs() < 1e-15);
        assert!(r.hyperbolicity_lost);

        assert!(ellipticity_report(&p, &SpectralField::cos_mode(4, 1.0), 8).is_err());
    }

    #[test]
    fn ellipticity_of_initial_data() {
        let p = model_problem(1.0);
        let d = paper_initial_data(512);
        let r = ellipticity_report_default(&p, &d.u).unwrap();
        assert!(r.a0_est <= 13.0 && r.a0_est > 2.0);
        assert!(r.delta_est > 0.0);
        let finer = ellipticity_report(&p, &d.u, 8 * 512 + 1).unwrap();
        assert!((finer.delta_est - r.delta_est).abs() <= 1e-10 + 1e-3);
    }

    #[test]
    fn ellipticity_grid_refinement_invariance() {
        // For a field whose extrema sit at grid nodes, refinement changes nothing.
        let p = model_problem(0.5);
        let u = SpectralField::cos_mode(3, 0.8);
        let a = ellipticity_report(&p, &u, 18).unwrap();
        let b = ellipticity_report(&p, &u, 36).unwrap();
        assert!((a.delta_est - b.delta_est).abs() <= 1e-10);
        assert!((a.a0_est - b.a0_est).abs() <= 1e-10);
    }
}
