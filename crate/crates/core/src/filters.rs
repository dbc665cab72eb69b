//! Filter functions `φ` and `ψ₁` of the trigonometric integrator and sampled
//! checks of their admissibility conditions.
//!
//! The integrator replaces the nonlinearity `f(u)` by `ψ₁(τΩ) f(φ(τΩ)u)`.
//! The catalog contains the unfiltered impulse method, the filters of
//! Hairer–Lubich and Grimm–Hochbruck, and the one-parameter family
//! `φ(ξ) = sinc(cξ)`, `ψ₁(ξ) = sinc(ξ) sinc(cξ)` intended for large
//! nonlinearities.
//!
//! Admissibility is a statement for all `ξ ≥ 0`; here it is certified on
//! sample grids.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Below this magnitude `sinc` is evaluated from its Taylor polynomial.
const SINC_TAYLOR_CUTOFF: f64 = 1e-2;

/// Slack allowed for rounding when testing an inequality on a sample point.
const ROUNDOFF_SLACK: f64 = 1e-14;

/// Pointwise tolerance for `ψ₁ = sinc · φ`.
pub const PSI_PHI_TOLERANCE: f64 = 1e-12;

/// `sin(x)/x` with `sinc(0) = 1`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_TAYLOR_CUTOFF {
        let x2 = x * x;
        // 1 - x²/6 + x⁴/120 - x⁶/5040
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterKind {
    /// `φ = ψ₁ = 1` (Deuflhard's impulse method).
    Impulse,
    /// `φ = 1`, `ψ₁ = sinc`.
    HairerLubich,
    /// `φ = sinc`, `ψ₁ = sinc²`.
    GrimmHochbruck,
    /// `φ(ξ) = sinc(cξ)`, `ψ₁(ξ) = sinc(ξ) sinc(cξ)`.
    SincC(f64),
}

/// A filter pair together with the constant `c₀` of the bounds
/// `|1 - φ(ξ)|, |1 - ψ₁(ξ)| ≤ c₀ ξ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub c0: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind) -> Result<Self> {
        if let FilterKind::SincC(c) = kind {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Config(format!("sinc filter parameter must be >= 0, got {c}")));
            }
        }
        let mut spec = FilterSpec { kind, c0: 0.0 };
        spec.c0 = match kind {
            FilterKind::HairerLubich | FilterKind::GrimmHochbruck => 1.0,
            FilterKind::SincC(c) => f64::max(1.0, (c * c + 1.0) / 6.0),
            FilterKind::Impulse => spec.estimate_c0(&default_xi_grid()),
        };
        Ok(spec)
    }

    pub fn impulse() -> Self {
        FilterSpec::new(FilterKind::Impulse).expect("catalog filter")
    }

    pub fn hairer_lubich() -> Self {
        FilterSpec::new(FilterKind::HairerLubich).expect("catalog filter")
    }

    pub fn grimm_hochbruck() -> Self {
        FilterSpec::new(FilterKind::GrimmHochbruck).expect("catalog filter")
    }

    pub fn sinc_c(c: f64) -> Result<Self> {
        FilterSpec::new(FilterKind::SincC(c))
    }

    #[inline]
    pub fn phi(&self, xi: f64) -> f64 {
        match self.kind {
            FilterKind::Impulse | FilterKind::HairerLubich => 1.0,
            FilterKind::GrimmHochbruck => sinc(xi),
            FilterKind::SincC(c) => sinc(c * xi),
        }
    }

    #[inline]
    pub fn psi1(&self, xi: f64) -> f64 {
        match self.kind {
            FilterKind::Impulse => 1.0,
            FilterKind::HairerLubich => sinc(xi),
            FilterKind::GrimmHochbruck => {
                let s = sinc(xi);
                s * s
            }
            FilterKind::SincC(c) => sinc(xi) * sinc(c * xi),
        }
    }

    /// `sup |1 - φ(ξ)|/ξ², |1 - ψ₁(ξ)|/ξ²` over the positive grid points.
    pub fn estimate_c0(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .filter(|&&xi| xi > 0.0)
            .map(|&xi| {
                let x2 = xi * xi;
                f64::max((1.0 - self.phi(xi)).abs() / x2, (1.0 - self.psi1(xi)).abs() / x2)
            })
            .fold(0.0, f64::max)
    }

    /// Short identifier used in CSV output and on the command line.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FilterKind::Impulse => write!(f, "impulse"),
            FilterKind::HairerLubich => write!(f, "hl"),
            FilterKind::GrimmHochbruck => write!(f, "gh"),
            FilterKind::SincC(c) => write!(f, "sinc:{c}"),
        }
    }
}

impl FromStr for FilterSpec {
    type Err = Error;

    /// Accepts `impulse`, `hl`, `gh` and `sinc:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "impulse" => Ok(FilterSpec::impulse()),
            "hl" => Ok(FilterSpec::hairer_lubich()),
            "gh" => Ok(FilterSpec::grimm_hochbruck()),
            _ => match s.strip_prefix("sinc:") {
                Some(c) => {
                    let c: f64 = c
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad sinc parameter in filter '{s}'")))?;
                    FilterSpec::sinc_c(c)
                }
                None => Err(Error::Config(format!(
                    "unknown filter '{s}' (expected impulse, hl, gh or sinc:<c>)"
                ))),
            },
        }
    }
}

/// Default admissibility grid: `ξ = 0` followed by 10⁴ log-spaced points in
/// `[1e-6, 1e3]`.
pub fn default_xi_grid() -> Vec<f64> {
    let n = 10_000;
    let (lo, hi) = (1e-6f64.ln(), 1e3f64.ln());
    std::iter::once(0.0)
        .chain((0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()))
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Outcome of the sampled admissibility checks.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    /// `|φ|, |ψ₁| ≤ 1` and `|1-φ|, |1-ψ₁| ≤ c₀ξ²`.
    pub assumption1_ok: bool,
    /// `ψ₁ = sinc · φ`.
    pub assumption2_ok: bool,
    /// `A₀ sin(ξ/2)² φ(ξ)² ≤ 1 - δ`.
    pub assumption3_ok: bool,
    pub margin1: f64,
    pub margin2: f64,
    pub margin3: f64,
    /// Smallest slack over all three checks, and where it occurred.
    pub worst_margin: f64,
    pub worst_xi: f64,
    pub delta: f64,
    pub a0: f64,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        self.assumption1_ok && self.assumption2_ok && self.assumption3_ok
    }
}

fn validate_delta_a0(delta: f64, a0: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(a0.is_finite() && a0 >= 0.0) {
        return Err(Error::Config(format!("A0 must be finite and >= 0, got {a0}")));
    }
    Ok(())
}

/// Checks the three filter conditions on the sample points `xi_grid`.
pub fn check_assumptions(spec: &FilterSpec, delta: f64, a0: f64, xi_grid: &[f64]) -> Result<AdmissibilityReport> {
    validate_delta_a0(delta, a0)?;
    if xi_grid.is_empty() {
        return Err(Error::Config("empty xi grid".into()));
    }
    if let Some(x) = xi_grid.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Config(format!("xi grid contains invalid point {x}")));
    }

    let mut m1 = (f64::INFINITY, 0.0);
    let mut m2 = (f64::INFINITY, 0.0);
    let mut m3 = (f64::INFINITY, 0.0);
    let track = |m: &mut (f64, f64), slack: f64, xi: f64| {
        if slack < m.0 {
            *m = (slack, xi);
        }
    };

    for &xi in xi_grid {
        let phi = spec.phi(xi);
        let psi = spec.psi1(xi);
        let bound = spec.c0 * xi * xi;
        for slack in [
            1.0 - phi.abs(),
            bound - (1.0 - phi).abs(),
            1.0 - psi.abs(),
            bound - (1.0 - psi).abs(),
        ] {
            track(&mut m1, slack, xi);
        }
        track(&mut m2, PSI_PHI_TOLERANCE - (psi - sinc(xi) * phi).abs(), xi);
        let half = (0.5 * xi).sin();
        track(&mut m3, (1.0 - delta) - a0 * half * half * phi * phi, xi);
    }

    let worst = [m1, m2, m3]
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("three margins");
    Ok(AdmissibilityReport {
        assumption1_ok: m1.0 >= -ROUNDOFF_SLACK,
        assumption2_ok: m2.0 >= 0.0,
        assumption3_ok: m3.0 >= -ROUNDOFF_SLACK,
        margin1: m1.0,
        margin2: m2.0,
        margin3: m3.0,
        worst_margin: worst.0,
        worst_xi: worst.1,
        delta,
        a0,
    })
}

/// Smallest `c` for which `sinc:<c>` satisfies the large-data condition:
/// `½ √(A₀/(1-δ))`.
pub fn min_c_for(a0: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(a0.is_finite() && a0 >= 0.0) {
        return Err(Error::Config(format!("A0 must be finite and >= 0, got {a0}")));
    }
    Ok(0.5 * (a0 / (1.0 - delta)).sqrt())
}

/// Left side minus right side of
/// `A cos(ξ) φ(ξ)² - ¼ A² sin(ξ)² φ(ξ)⁴ ≥ -1 + δ/2`.
pub fn scalar_inequality_margin(spec: &FilterSpec, delta: f64, a: f64, xi: f64) -> f64 {
    let phi2 = spec.phi(xi).powi(2);
    let s = xi.sin();
    a * xi.cos() * phi2 - 0.25 * a * a * s * s * phi2 * phi2 - (-1.0 + 0.5 * delta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarInequalityReport {
    pub min_margin: f64,
    pub worst_a: f64,
    pub worst_xi: f64,
}

impl ScalarInequalityReport {
    pub fn certified(&self) -> bool {
        self.min_margin >= 0.0
    }
}

/// Minimum of [`scalar_inequality_margin`] over the product grid.
pub fn lemma_scalar_inequality(
    spec: &FilterSpec,
    delta: f64,
    a_grid: &[f64],
    xi_grid: &[f64],
) -> Result<ScalarInequalityReport> {
    if a_grid.is_empty() || xi_grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let mut report = ScalarInequalityReport {
        min_margin: f64::INFINITY,
        worst_a: f64::NAN,
        worst_xi: f64::NAN,
    };
    for &xi in xi_grid {
        for &a in a_grid {
            let m = scalar_inequality_margin(spec, delta, a, xi);
            if m < report.min_margin {
                report = ScalarInequalityReport {
                    min_margin: m,
                    worst_a: a,
                    worst_xi: xi,
                };
            }
        }
    }
    Ok(report)
}

/// The admissible range `[-1 + δ/2, A₀ + δ/2]` of `A`, sampled at `n` points.
pub fn scalar_inequality_a_grid(a0: f64, delta: f64, n: usize) -> Vec<f64> {
    linspace(-1.0 + 0.5 * delta, a0 + 0.5 * delta, n)
}
