//! The fully discrete trigonometric integrator.
//!
//! One step maps `(u, u̇)` to
//!
//! ```text
//! u₊ = cos(τΩ)u + τ sinc(τΩ)u̇ + ½τ² sinc(τΩ) κ f̂(u)
//! u̇₊ = -Ω sin(τΩ)u + cos(τΩ)u̇ + ½τ cos(τΩ) κ f̂(u) + ½τ κ f̂(u₊)
//! ```
//!
//! with `Ω = (1 - ∂ₓ²)^{1/2}` and the filtered nonlinearity
//! `f̂(u) = 𝒫ᴷ Ψ₁ fᴷ(Φu)`.

use crate::energy::{modified_energy, EnergyReport};
use crate::error::{Error, Result};
use crate::filters::{sinc, FilterSpec};
use crate::problem::ProblemSpec;
use crate::spectral::{
    bracket, derivative, interpolate_unchecked, pair_norm, product_on_grid, synthesize_unchecked,
    SpectralField,
};

/// Position and velocity `(u, u̇)`, both of degree `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePair {
    pub u: SpectralField,
    pub udot: SpectralField,
}

impl StatePair {
    pub fn new(u: SpectralField, udot: SpectralField) -> Result<Self> {
        if u.degree() != udot.degree() {
            return Err(Error::Config(format!(
                "state degrees differ: u has {}, udot has {}",
                u.degree(),
                udot.degree()
            )));
        }
        Ok(StatePair { u, udot })
    }

    pub fn zeros(degree: usize) -> Self {
        StatePair {
            u: SpectralField::zeros(degree),
            udot: SpectralField::zeros(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    /// `⫼(u, u̇)⫼_s`.
    pub fn norm(&self, s: f64) -> f64 {
        pair_norm(&self.u, &self.udot, crate::spectral::NormOrder::new(s).expect("s >= 0"))
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.udot.is_finite()
    }

    pub fn with_degree(&self, degree: usize) -> StatePair {
        StatePair {
            u: self.u.with_degree(degree),
            udot: self.udot.with_degree(degree),
        }
    }

    /// `(u, -u̇)`.
    pub fn reversed(&self) -> StatePair {
        StatePair {
            u: self.u.clone(),
            udot: -&self.udot,
        }
    }

    pub fn sub(&self, other: &StatePair) -> StatePair {
        StatePair {
            u: &self.u - &other.u,
            udot: &self.udot - &other.udot,
        }
    }

    pub fn max_abs_diff(&self, other: &StatePair) -> f64 {
        self.u.max_abs_diff(&other.u).max(self.udot.max_abs_diff(&other.udot))
    }
}

/// Default bound on `⫼state⫼₁` before a run is aborted.
pub const DEFAULT_MAX_NORM: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub tau: f64,
    pub degree: usize,
    pub filter: FilterSpec,
    /// Grid size for the exact degree-`2K` product; at least `4K+1`.
    pub dealias_nodes: usize,
    /// Optional user bound on `τ`; `None` imposes nothing.
    pub tau_max: Option<f64>,
    /// Reuse `f̂(u₊)` as the next step's `f̂(u)`.
    pub fsal: bool,
    pub max_norm: f64,
    /// Evaluate the modified energy every this many steps in [`evolve`].
    pub energy_every: Option<usize>,
}

/// Smallest power of two that is at least `4K+1`.
pub fn default_dealias_nodes(degree: usize) -> usize {
    (4 * degree + 1).next_power_of_two()
}

impl IntegratorConfig {
    pub fn new(tau: f64, degree: usize, filter: FilterSpec) -> Result<Self> {
        let cfg = IntegratorConfig {
            tau,
            degree,
            filter,
            dealias_nodes: default_dealias_nodes(degree),
            tau_max: None,
            fsal: true,
            max_norm: DEFAULT_MAX_NORM,
            energy_every: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if self.degree < 1 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if let Some(tmax) = self.tau_max {
            if self.tau > tmax {
                return Err(Error::Config(format!("tau = {} exceeds tau_max = {tmax}", self.tau)));
            }
        }
        if self.dealias_nodes < 4 * self.degree + 1 {
            return Err(Error::Aliasing {
                degree: 2 * self.degree,
                nodes: self.dealias_nodes,
                required: 4 * self.degree + 1,
            });
        }
        if !(self.max_norm > 0.0) {
            return Err(Error::Config(format!("max_norm must be positive, got {}", self.max_norm)));
        }
        if self.energy_every == Some(0) {
            return Err(Error::Config("energy_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        let cfg = IntegratorConfig { tau, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `fᴷ(u) = aᴷ(u) ∂ₓ²u + gᴷ(u, ∂ₓu)` of degree `2K`, evaluated on the
/// default dealiasing grid.
pub fn f_k(u: &SpectralField, p: &ProblemSpec) -> Result<SpectralField> {
    f_k_on(u, p, default_dealias_nodes(u.degree()))
}

/// [`f_k`] with the product evaluated on `nodes ≥ 4K+1` points.
pub fn f_k_on(u: &SpectralField, p: &ProblemSpec, nodes: usize) -> Result<SpectralField> {
    let k = u.degree();
    if nodes < 4 * k + 1 {
        return Err(Error::Aliasing {
            degree: 2 * k,
            nodes,
            required: 4 * k + 1,
        });
    }
    let n = 2 * k + 1;
    let u_vals = synthesize_unchecked(u, n);
    let a_vals: Vec<f64> = u_vals.iter().map(|&v| p.a(v)).collect();
    if let Some(i) = a_vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("a(u) = {} at u = {}", a_vals[i], u_vals[i])));
    }
    let a_k = interpolate_unchecked(&a_vals, k);
    let mut out = product_on_grid(&a_k, &derivative(u, 2), nodes);
    if !p.g_vanishes() {
        let ux_vals = synthesize_unchecked(&derivative(u, 1), n);
        let g_vals: Vec<f64> = u_vals.iter().zip(&ux_vals).map(|(&v, &w)| p.g(v, w)).collect();
        if let Some(i) = g_vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "g(u, ux) = {} at (u, ux) = ({}, {})",
                g_vals[i], u_vals[i], ux_vals[i]
            )));
        }
        out = &out + &interpolate_unchecked(&g_vals, k);
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("f^K(u) has non-finite coefficients".into()));
    }
    Ok(out)
}

/// `f̂ᴷ(u) = 𝒫ᴷ Ψ₁ fᴷ(Φu)` of degree `K`.
pub fn fhat_k(u: &SpectralField, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<SpectralField> {
    Integrator::new(p, cfg)?.fhat(u)
}

/// Exact flow of `ü = ∂ₓ²u - u` over time `t`.
pub fn linear_propagator(state: &StatePair, t: f64) -> StatePair {
    let k = state.degree();
    let sym: Vec<(f64, f64, f64, f64)> = (0..=k as i64)
        .map(|j| {
            let w = bracket(j);
            ((t * w).cos(), (t * w).sin(), t * sinc(t * w), w)
        })
        .collect();
    let at = |j: i64| sym[j.unsigned_abs() as usize];
    let u = SpectralField::from_fn(k, |j| {
        let (c, _, tsc, _) = at(j);
        state.u.coeff(j) * c + state.udot.coeff(j) * tsc
    });
    let udot = SpectralField::from_fn(k, |j| {
        let (c, s, _, w) = at(j);
        state.u.coeff(j) * (-w * s) + state.udot.coeff(j) * c
    });
    StatePair { u, udot }
}

/// One step of the method in one-step form.
pub fn step(state: &StatePair, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<StatePair> {
    Integrator::new(p, cfg)?.step(state)
}

/// One step in kick–rotate–kick form; agrees with [`step`] up to roundoff.
pub fn step_split(state: &StatePair, p: &ProblemSpec, cfg: &IntegratorConfig) -> Result<StatePair> {
    Integrator::new(p, cfg)?.step_split(state)
}

/// Per-mode symbols at `τ⟨j⟩`, `j = 0..=K`.
#[derive(Clone, Debug)]
struct Symbols {
    omega: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    sinc: Vec<f64>,
    phi: Vec<f64>,
    psi1: Vec<f64>,
}

impl Symbols {
    fn new(tau: f64, degree: usize, filter: &FilterSpec) -> Self {
        let omega: Vec<f64> = (0..=degree as i64).map(bracket).collect();
        let arg = |w: &f64| tau * w;
        Symbols {
            cos: omega.iter().map(|w| arg(w).cos()).collect(),
            sin: omega.iter().map(|w| arg(w).sin()).collect(),
            sinc: omega.iter().map(|w| sinc(arg(w))).collect(),
            phi: omega.iter().map(|w| filter.phi(arg(w))).collect(),
            psi1: omega.iter().map(|w| filter.psi1(arg(w))).collect(),
            omega,
        }
    }
}

/// A problem bound to a configuration, with cached symbols.
#[derive(Clone, Debug)]
pub struct Integrator<'a> {
    problem: &'a ProblemSpec,
    cfg: IntegratorConfig,
    sym: Symbols,
}

impl<'a> Integrator<'a> {
    pub fn new(problem: &'a ProblemSpec, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Integrator {
            problem,
            cfg: cfg.clone(),
            sym: Symbols::new(cfg.tau, cfg.degree, &cfg.filter),
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.problem
    }

    fn check_degree(&self, f: &SpectralField) -> Result<()> {
        if f.degree() != self.cfg.degree {
            return Err(Error::Config(format!(
                "field has degree {}, integrator is configured for K = {}",
                f.degree(),
                self.cfg.degree
            )));
        }
        Ok(())
    }

    /// `f̂ᴷ(u)`. Identically zero when `κ = 0`, so `f` is never sampled then.
    pub fn fhat(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_degree(u)?;
        if self.problem.kappa == 0.0 {
            return Ok(SpectralField::zeros(self.cfg.degree));
        }
        let phi_u = u.map_modes(|j| self.sym.phi[j as usize]);
        let f = f_k_on(&phi_u, self.problem, self.cfg.dealias_nodes)?;
        Ok(f.with_degree(self.cfg.degree).map_modes(|j| self.sym.psi1[j as usize]))
    }

    /// One step given `f̂(u)`; also returns `f̂(u₊)`.
    fn advance(&self, state: &StatePair, f0: &SpectralField) -> Result<(StatePair, SpectralField)> {
        let s = &self.sym;
        let tau = self.cfg.tau;
        let kap = self.problem.kappa;
        let k = self.cfg.degree;
        let m = |j: i64| j.unsigned_abs() as usize;
        let u1 = SpectralField::from_fn(k, |j| {
            let i = m(j);
            state.u.coeff(j) * s.cos[i]
                + state.udot.coeff(j) * (tau * s.sinc[i])
                + f0.coeff(j) * (0.5 * tau * tau * s.sinc[i] * kap)
        });
        let f1 = self.fhat(&u1)?;
        let udot1 = SpectralField::from_fn(k, |j| {
            let i = m(j);
            state.u.coeff(j) * (-s.omega[i] * s.sin[i])
                + state.udot.coeff(j) * s.cos[i]
                + f0.coeff(j) * (0.5 * tau * s.cos[i] * kap)
                + f1.coeff(j) * (0.5 * tau * kap)
        });
        Ok((StatePair { u: u1, udot: udot1 }, f1))
    }

    pub fn step(&self, state: &StatePair) -> Result<StatePair> {
        self.check_degree(&state.udot)?;
        let f0 = self.fhat(&state.u)?;
        Ok(self.advance(state, &f0)?.0)
    }

    /// Half kick, rotation of `(Ωu, u̇)`, half kick.
    pub fn step_split(&self, state: &StatePair) -> Result<StatePair> {
        self.check_degree(&state.udot)?;
        let s = &self.sym;
        let half = 0.5 * self.cfg.tau * self.problem.kappa;
        let k = self.cfg.degree;
        let m = |j: i64| j.unsigned_abs() as usize;
        let f0 = self.fhat(&state.u)?;
        let v = state.udot.axpy(half, &f0);
        let ou = state.u.map_modes(|j| s.omega[j as usize]);
        let ou1 = SpectralField::from_fn(k, |j| {
            let i = m(j);
            ou.coeff(j) * s.cos[i] + v.coeff(j) * s.sin[i]
        });
        let w = SpectralField::from_fn(k, |j| {
            let i = m(j);
            ou.coeff(j) * (-s.sin[i]) + v.coeff(j) * s.cos[i]
        });
        let u1 = ou1.map_modes(|j| 1.0 / s.omega[j as usize]);
        let f1 = self.fhat(&u1)?;
        Ok(StatePair {
            udot: w.axpy(half, &f1),
            u: u1,
        })
    }

    /// Runs `n_steps` steps; see [`evolve`].
    pub fn evolve(
        &self,
        state0: &StatePair,
        n_steps: usize,
        mut observer: impl FnMut(&StepRecord<'_>),
    ) -> Result<StatePair> {
        self.check_degree(&state0.u)?;
        self.check_degree(&state0.udot)?;
        let mut state = state0.clone();
        self.observe(0, &state, &mut observer)?;
        let mut cached: Option<SpectralField> = None;
        for n in 1..=n_steps {
            let f0 = match cached.take() {
                Some(f) => f,
                None => self.fhat(&state.u).map_err(|e| divergence(n, e))?,
            };
            let (next, f1) = self.advance(&state, &f0).map_err(|e| divergence(n, e))?;
            if !next.is_finite() {
                return Err(Error::Divergence {
                    step: n,
                    reason: "state has non-finite coefficients".into(),
                });
            }
            let norm = next.norm(1.0);
            if !(norm <= self.cfg.max_norm) {
                return Err(Error::Guard {
                    step: n,
                    norm,
                    bound: self.cfg.max_norm,
                });
            }
            if self.cfg.fsal {
                cached = Some(f1);
            }
            state = next;
            self.observe(n, &state, &mut observer)?;
        }
        Ok(state)
    }

    fn observe(
        &self,
        n: usize,
        state: &StatePair,
        observer: &mut impl FnMut(&StepRecord<'_>),
    ) -> Result<()> {
        let energy = match self.cfg.energy_every {
            Some(every) if n.is_multiple_of(every) => Some(modified_energy(
                &state.u,
                &state.udot,
                &state.u,
                self.problem,
                &self.cfg,
            )?),
            _ => None,
        };
        observer(&StepRecord {
            n,
            t: n as f64 * self.cfg.tau,
            state,
            energy,
        });
        Ok(())
    }
}

fn divergence(step: usize, e: Error) -> Error {
    match e {
        Error::NonFinite(reason) => Error::Divergence { step, reason },
        other => other,
    }
}

/// What the [`evolve`] observer sees after step `n` (and once for `n = 0`).
#[derive(Debug)]
pub struct StepRecord<'s> {
    pub n: usize,
    pub t: f64,
    pub state: &'s StatePair,
    /// `𝓔(u_n, u̇_n, u_n)` when requested by `energy_every`.
    pub energy: Option<EnergyReport>,
}

/// Iterates [`step`] `n_steps` times, calling `observer` for `n = 0..=n_steps`.
pub fn evolve(
    state0: &StatePair,
    p: &ProblemSpec,
    cfg: &IntegratorConfig,
    n_steps: usize,
    observer: impl FnMut(&StepRecord<'_>),
) -> Result<StatePair> {
    Integrator::new(p, cfg)?.evolve(state0, n_steps, observer)
}

/// [`evolve`] with no observer.
pub fn evolve_quiet(state0: &StatePair, p: &ProblemSpec, cfg: &IntegratorConfig, n_steps: usize) -> Result<StatePair> {
    evolve(state0, p, cfg, n_steps, |_| {})
}

/// Number of steps of size `tau` that reach `t_final`, if it is an integer.
pub fn steps_for(t_final: f64, tau: f64) -> Result<usize> {
    let n = (t_final / tau).round();
    if !(n >= 0.0) || ((n * tau - t_final).abs() > 1e-9 * t_final.abs().max(1.0)) {
        return Err(Error::Config(format!(
            "T = {t_final} is not an integer multiple of tau = {tau}"
        )));
    }
    Ok(n as usize)
}

