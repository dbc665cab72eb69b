//! Modified-energy diagnostics.
//!
//! The energy of an error pair `(e, ė)` along a solution `u` is
//! `𝓔(e, ė, u) = ⫼(e, ė)⫼₁² + κ 𝓤(Φe, Φu)` with
//! `𝓤(e, u) = ⟨cos(τΩ)∂ₓ²e, a(u)∂ₓ²e⟩₀ - ¼τ²κ ‖Ψ₁(a(u)∂ₓ²e)‖₁²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::integrator::{f_k_on, Integrator, IntegratorConfig, StatePair};
use crate::problem::{ellipticity_report_default, ProblemSpec};
use crate::spectral::{
    bracket, dealiased_product, derivative, inner_product, interpolate_composition, sobolev_norm_sq,
    SpectralField,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    /// `⫼(e, ė)⫼₁²`.
    pub pair_norm_sq: f64,
    /// `𝓤(Φe, Φu)`.
    pub u_value: f64,
    /// `pair_norm_sq + κ u_value`.
    pub e_value: f64,
    /// Filled in only by callers that ran [`positivity_check`].
    pub positivity_margin: Option<f64>,
    /// Filled in only by callers that ran [`energy_change_residual`].
    pub identity_residual: Option<f64>,
}

/// Which version of `𝓤` to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UVariant {
    /// `aᴷ(u)` from `2K+1` nodes and `𝒫ᴷ` applied to `aᴷ(u)∂ₓ²e`.
    Projected,
    /// `a(u)` interpolated at degree `a_degree` and no projection anywhere.
    SemiDiscrete { a_degree: usize },
}

/// `Φ` at time step `τ`, on a field of any degree.
fn apply_phi(f: &SpectralField, tau: f64, filter: &FilterSpec) -> SpectralField {
    f.map_modes(|j| filter.phi(tau * bracket(j)))
}

fn apply_psi1(f: &SpectralField, tau: f64, filter: &FilterSpec) -> SpectralField {
    f.map_modes(|j| filter.psi1(tau * bracket(j)))
}

fn apply_cos(f: &SpectralField, tau: f64) -> SpectralField {
    f.map_modes(|j| (tau * bracket(j)).cos())
}

/// Degree-`degree` interpolant of `a(u)`.
pub fn a_field(u: &SpectralField, p: &ProblemSpec, degree: usize) -> Result<SpectralField> {
    let a = interpolate_composition(u, degree, |v| p.a(v))?;
    if !a.is_finite() {
        return Err(Error::NonFinite("a(u) is not finite".into()));
    }
    Ok(a)
}

fn same_degree(name: &str, a: &SpectralField, b: &SpectralField) -> Result<()> {
    if a.degree() != b.degree() {
        return Err(Error::Config(format!(
            "{name}: degrees {} and {} differ",
            a.degree(),
            b.degree()
        )));
    }
    Ok(())
}

/// `𝓤(e, u)` in the requested variant.
pub fn u_term(
    e: &SpectralField,
    u: &SpectralField,
    p: &ProblemSpec,
    cfg: &IntegratorConfig,
    variant: UVariant,
) -> Result<f64> {
    same_degree("U term", e, u)?;
    let k = e.degree();
    let d2e = derivative(e, 2);
    let prod = match variant {
        UVariant::Projected => dealiased_product(&a_field(u, p, k)?, &d2e).with_degree(k),
        UVariant::SemiDiscrete { a_degree } => dealiased_product(&a_field(u, p, a_degree)?, &d2e),
    };
    let first = inner_product(&apply_cos(&d2e, cfg.tau), &prod, 0);
    let second = sobolev_norm_sq(&apply_psi1(&prod, cfg.tau, &cfg.filter), 1);
    Ok(first - 0.25 * cfg.tau * cfg.tau * p.kappa * second)
}

/// `𝓔(e, ė, u)` with the projected `𝓤`.
pub fn modified_energy(
    e: &SpectralField,
    edot: &SpectralField,
    u: &SpectralField,
    p: &ProblemSpec,
    cfg: &IntegratorConfig,
) -> Result<EnergyReport> {
    modified_energy_with(e, edot, u, p, cfg, UVariant::Projected)
}

pub fn modified_energy_with(
    e: &SpectralField,
    edot: &SpectralField,
    u: &SpectralField,
    p: &ProblemSpec,
    cfg: &IntegratorConfig,
    variant: UVariant,
) -> Result<EnergyReport> {
    same_degree("energy", e, edot)?;
    same_degree("energy", e, u)?;
    let pair_norm_sq = sobolev_norm_sq(e, 2) + sobolev_norm_sq(edot, 1);
    let u_value = if p.kappa == 0.0 {
        0.0
    } else {
        let phi_e = apply_phi(e, cfg.tau, &cfg.filter);
        let phi_u = apply_phi(u, cfg.tau, &cfg.filter);
        u_term(&phi_e, &phi_u, p, cfg, variant)?
    };
    Ok(EnergyReport {
        pair_norm_sq,
        u_value,
        e_value: pair_norm_sq + p.kappa * u_value,
        positivity_margin: None,
        identity_residual: None,
    })
}

/// The operator
/// `𝓛(u) = κ Φ a(u) cos(τΩ) Φ - ¼κ² Φ a(u) sin²(τΩ) Φ² a(u) Φ`
/// with `a(u)` replaced by `aᴷ(u)`.
///
/// Intermediate products keep their full degree; only the result is
/// truncated to the degree of the argument.
#[derive(Clone, Debug)]
pub struct LOperator {
    a: SpectralField,
    kappa: f64,
    tau: f64,
    filter: FilterSpec,
}

impl LOperator {
    pub fn new(u: &SpectralField, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<Self> {
        Ok(LOperator {
            a: a_field(u, p, u.degree())?,
            kappa: p.kappa,
            tau: cfg.tau,
            filter: cfg.filter,
        })
    }

    pub fn apply(&self, v: &SpectralField) -> SpectralField {
        let (tau, filter) = (self.tau, &self.filter);
        let w = apply_phi(v, tau, filter);
        let first = apply_phi(&dealiased_product(&self.a, &apply_cos(&w, tau)), tau, filter);
        let inner = dealiased_product(&self.a, &w)
            .map_modes(|j| {
                let x = tau * bracket(j);
                let (s, f) = (x.sin(), filter.phi(x));
                s * s * f * f
            });
        let second = apply_phi(&dealiased_product(&self.a, &inner), tau, filter);
        let k = v.degree();
        first
            .with_degree(k)
            .scale(self.kappa)
            .axpy(-0.25 * self.kappa * self.kappa, &second.with_degree(k))
    }

    /// `⟨𝓛v, v⟩₀`.
    pub fn quadratic_form(&self, v: &SpectralField) -> f64 {
        inner_product(&self.apply(v), v, 0)
    }
}

/// `𝓛(u)v`.
pub fn l_apply(u: &SpectralField, v: &SpectralField, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<SpectralField> {
    Ok(LOperator::new(u, p, cfg)?.apply(v))
}

/// Residual `|κ𝓤(Φe, Φu) - ⟨𝓛(Φu)∂ₓ²e, ∂ₓ²e⟩₀| / (1 + |κ𝓤|)`, both sides
/// built from `aᴷ` with unprojected products.
pub fn rep_u_residual(e: &SpectralField, u: &SpectralField, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<f64> {
    same_degree("repU", e, u)?;
    let phi_e = apply_phi(e, cfg.tau, &cfg.filter);
    let phi_u = apply_phi(u, cfg.tau, &cfg.filter);
    let lhs = p.kappa * u_term(&phi_e, &phi_u, p, cfg, UVariant::SemiDiscrete { a_degree: u.degree() })?;
    let d2e = derivative(e, 2);
    let rhs = LOperator::new(&phi_u, p, cfg)?.quadratic_form(&d2e);
    Ok((lhs - rhs).abs() / (1.0 + lhs.abs()))
}

/// Options for [`positivity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PositivityOptions {
    /// Ellipticity lower bound; defaults to the grid estimate for `u`.
    pub delta: Option<f64>,
    /// Ellipticity upper bound; defaults to the grid estimate for `u`.
    pub a0: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeMargin {
    pub label: String,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    /// Smallest `(‖v‖₀² + ⟨𝓛(Φu)v, v⟩₀)/‖v‖₀² - δ/8` over all probes.
    pub margin: f64,
    pub worst_probe: String,
    pub delta: f64,
    pub a0: f64,
    pub probes: Vec<ProbeMargin>,
}

impl PositivityReport {
    pub fn certified(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Samples the Rayleigh quotient of `1 + 𝓛(Φu)` with `n_samples` random
/// probes and every single-mode probe `cos(jx)`, `sin(jx)`, `|j| ≤ K`.
pub fn positivity_check(
    u: &SpectralField,
    p: &ProblemSpec,
    cfg: &IntegratorConfig,
    n_samples: usize,
    opts: PositivityOptions,
) -> Result<PositivityReport> {
    let ell = ellipticity_report_default(p, u)?;
    let delta = opts.delta.unwrap_or(ell.delta_est);
    let a0 = opts.a0.unwrap_or(ell.a0_est);
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("delta = {delta} is not positive")));
    }
    if ell.delta_est < 0.5 * delta {
        return Err(Error::Precondition(format!(
            "delta bound fails: min(1 + kappa a(u)) = {} < delta/2 = {}",
            ell.delta_est,
            0.5 * delta
        )));
    }
    if ell.a0_est > a0 + 0.5 * delta {
        return Err(Error::Precondition(format!(
            "A0 bound fails: max(kappa a(u)) = {} > A0 + delta/2 = {}",
            ell.a0_est,
            a0 + 0.5 * delta
        )));
    }
    let k = u.degree();
    let op = LOperator::new(&apply_phi(u, cfg.tau, &cfg.filter), p, cfg)?;
    let rayleigh = |v: &SpectralField| {
        let nv = sobolev_norm_sq(v, 0);
        (nv + op.quadratic_form(v)) / nv - delta / 8.0
    };

    let mut probes = Vec::with_capacity(n_samples + 2 * k + 1);
    for j in 0..=k {
        probes.push(ProbeMargin {
            label: format!("cos{j}"),
            margin: rayleigh(&SpectralField::cos_mode(j, 1.0).with_degree(k)),
        });
        if j > 0 {
            probes.push(ProbeMargin {
                label: format!("sin{j}"),
                margin: rayleigh(&SpectralField::sin_mode(j, 1.0).with_degree(k)),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..n_samples {
        let v = random_field(&mut rng, k);
        probes.push(ProbeMargin {
            label: format!("random{i}"),
            margin: rayleigh(&v),
        });
    }
    let worst = probes
        .iter()
        .min_by(|x, y| x.margin.total_cmp(&y.margin))
        .expect("at least the mean-mode probe");
    if !worst.margin.is_finite() {
        return Err(Error::NonFinite(format!("Rayleigh quotient of probe {}", worst.label)));
    }
    Ok(PositivityReport {
        margin: worst.margin,
        worst_probe: worst.label.clone(),
        delta,
        a0,
        probes,
    })
}

/// A real field with independent standard normal coefficients, normalized in L².
pub fn random_field(rng: &mut ChaCha8Rng, degree: usize) -> SpectralField {
    let mut modes = Vec::with_capacity(degree + 1);
    for j in 0..=degree {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if j == 0 { 0.0 } else { StandardNormal.sample(rng) };
        modes.push(Complex64::new(re, im));
    }
    let v = SpectralField::from_nonnegative_modes(&modes).expect("nonempty");
    let n = sobolev_norm_sq(&v, 0).sqrt();
    v.scale(1.0 / n)
}

/// Both sides of the energy-change identity for one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyChange {
    /// `𝓔(u₊ - v₊, u̇₊ - v̇₊, u₊)`.
    pub lhs: f64,
    /// `𝓔(u - v, u̇ - v̇, u) + κ𝓡(Φu₊, Φu, Φv₊, Φv)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Advances `un` and `vn` one step and compares the energy of their
/// difference with the prediction from the explicit remainder.
///
/// Every term uses the discrete nonlinearity `𝒫ᴷfᴷ` and `aᴷ`, for which the
/// identity is exact.
pub fn energy_change(un: &StatePair, vn: &StatePair, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<EnergyChange> {
    if !p.g_vanishes() {
        return Err(Error::Unsupported(
            "the energy-change identity is only available for g = 0".into(),
        ));
    }
    let integ = Integrator::new(p, cfg)?;
    let un1 = integ.step(un)?;
    let vn1 = integ.step(vn)?;
    let d0 = un.sub(vn);
    let d1 = un1.sub(&vn1);
    let lhs = modified_energy(&d1.u, &d1.udot, &un1.u, p, cfg)?.e_value;
    let before = modified_energy(&d0.u, &d0.udot, &un.u, p, cfg)?.e_value;

    let phi = |f: &SpectralField| apply_phi(f, cfg.tau, &cfg.filter);
    let (pu1, pu0, pv1, pv0) = (phi(&un1.u), phi(&un.u), phi(&vn1.u), phi(&vn.u));
    let rem = Remainder { p, cfg };
    let r = rem.tilde(&pu1, &pu0, &pv1, &pv0)? + rem.star(&pu1, &pv1)? - rem.star(&pu0, &pv0)?;
    let rhs = before + p.kappa * r;
    Ok(EnergyChange {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / (1.0 + lhs.abs()),
    })
}

/// `|LHS - RHS| / (1 + |LHS|)` of [`energy_change`].
pub fn energy_change_residual(un: &StatePair, vn: &StatePair, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(energy_change(un, vn, p, cfg)?.residual)
}

struct Remainder<'a> {
    p: &'a ProblemSpec,
    cfg: &'a IntegratorConfig,
}

impl Remainder<'_> {
    fn f(&self, u: &SpectralField) -> Result<SpectralField> {
        Ok(f_k_on(u, self.p, self.cfg.dealias_nodes)?.with_degree(u.degree()))
    }

    /// `⟨u - v, F(u') - F(v')⟩₁ - ⟨u' - v', F(u) - F(v)⟩₁`.
    fn tilde(&self, u: &SpectralField, u1: &SpectralField, v: &SpectralField, v1: &SpectralField) -> Result<f64> {
        let fu1 = &self.f(u1)? - &self.f(v1)?;
        let fu = &self.f(u)? - &self.f(v)?;
        Ok(inner_product(&(u - v), &fu1, 1) - inner_product(&(u1 - v1), &fu, 1))
    }

    /// `⟨cos(τΩ)(u - v), A⟩₀ + ⟨cos(τΩ)(u - v), B⟩₁ + ½τ²κ⟨Ψ₁A, Ψ₁B⟩₁ + ¼τ²κ‖Ψ₁B‖₁²`
    /// with `A = 𝒫ᴷ(aᴷ(u)∂ₓ²(u - v))` and `B = 𝒫ᴷ((aᴷ(u) - aᴷ(v))∂ₓ²v)`.
    fn star(&self, u: &SpectralField, v: &SpectralField) -> Result<f64> {
        let k = u.degree();
        let (tau, kappa, filter) = (self.cfg.tau, self.p.kappa, &self.cfg.filter);
        let au = a_field(u, self.p, k)?;
        let av = a_field(v, self.p, k)?;
        let d = u - v;
        let a = dealiased_product(&au, &derivative(&d, 2)).with_degree(k);
        let b = dealiased_product(&(&au - &av), &derivative(v, 2)).with_degree(k);
        let cd = apply_cos(&d, tau);
        let (pa, pb) = (apply_psi1(&a, tau, filter), apply_psi1(&b, tau, filter));
        Ok(inner_product(&cd, &a, 0)
            + inner_product(&cd, &b, 1)
            + 0.5 * tau * tau * kappa * inner_product(&pa, &pb, 1)
            + 0.25 * tau * tau * kappa * sobolev_norm_sq(&pb, 1))
    }
}
