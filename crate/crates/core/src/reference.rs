//! Reference solutions and error measures.

use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::integrator::{evolve_quiet, steps_for, Integrator, IntegratorConfig, StatePair};
use crate::problem::ProblemSpec;
use crate::spectral::{pair_norm, sobolev_norm_sq};

/// How reference solutions are produced and validated.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceConfig {
    /// `τ_ref = τ_min / refine_factor`.
    pub refine_factor: usize,
    /// Also run a second filter at `τ_ref` and compare.
    pub cross_check: bool,
    /// Bound on the extrapolated error of the reference, relative to `max(1, ⫼ref⫼₁)`.
    pub tolerance: f64,
    pub filter: FilterSpec,
    pub cross_filter: FilterSpec,
    pub max_norm: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            refine_factor: 64,
            cross_check: false,
            tolerance: 1e-6,
            filter: FilterSpec::sinc_c(2.0).expect("c = 2 is valid"),
            cross_filter: FilterSpec::grimm_hochbruck(),
            max_norm: crate::integrator::DEFAULT_MAX_NORM,
        }
    }
}

impl ReferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.refine_factor < 2 {
            return Err(Error::Config(format!(
                "reference.refine_factor must be at least 2, got {}",
                self.refine_factor
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("reference tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub state: StatePair,
    pub tau_ref: f64,
    /// `⫼ref(τ_ref) - ref(2τ_ref)⫼₁ / 3`, the second-order Richardson estimate.
    pub error_estimate: f64,
    /// `⫼ref - ref_cross⫼₁` when a cross-check ran.
    pub cross_difference: Option<f64>,
}

fn run(p: &ProblemSpec, state0: &StatePair, t_final: f64, tau: f64, filter: FilterSpec, max_norm: f64) -> Result<StatePair> {
    let mut cfg = IntegratorConfig::new(tau, state0.degree(), filter)?;
    cfg.max_norm = max_norm;
    evolve_quiet(state0, p, &cfg, steps_for(t_final, tau)?)
}

/// Solution at `T` with the reference filter at `τ_ref = τ_min / refine_factor`.
///
/// A second run at `2τ_ref` gives the Richardson error estimate, which must
/// stay below the configured tolerance.
pub fn reference_solution(
    p: &ProblemSpec,
    state0: &StatePair,
    t_final: f64,
    tau_min: f64,
    rc: &ReferenceConfig,
) -> Result<Reference> {
    rc.validate()?;
    if !(t_final > 0.0) {
        return Err(Error::Config(format!("T must be positive, got {t_final}")));
    }
    let tau_ref = tau_min / rc.refine_factor as f64;
    let fail = |e: Error| Error::Reference(format!("reference run at tau = {tau_ref:e} failed: {e}"));
    let fine = run(p, state0, t_final, tau_ref, rc.filter, rc.max_norm).map_err(fail)?;
    let coarse = run(p, state0, t_final, 2.0 * tau_ref, rc.filter, rc.max_norm).map_err(fail)?;
    let error_estimate = error_h2h1(&fine, &coarse)? / 3.0;
    let scale = fine.norm(1.0).max(1.0);
    if error_estimate > rc.tolerance * scale {
        return Err(Error::Reference(format!(
            "halving tau_ref = {:e} moved the solution by {:e}, above {:e}",
            2.0 * tau_ref,
            3.0 * error_estimate,
            3.0 * rc.tolerance * scale
        )));
    }
    let cross_difference = if rc.cross_check {
        let other = run(p, state0, t_final, tau_ref, rc.cross_filter, rc.max_norm).map_err(fail)?;
        let d = error_h2h1(&fine, &other)?;
        let allowed = 10.0 * error_estimate.max(f64::EPSILON * scale);
        if d > allowed {
            return Err(Error::Reference(format!(
                "filters {} and {} disagree by {d:e}, more than 10x the refinement error {error_estimate:e}",
                rc.filter, rc.cross_filter
            )));
        }
        Some(d)
    } else {
        None
    };
    Ok(Reference {
        state: fine,
        tau_ref,
        error_estimate,
        cross_difference,
    })
}

/// `⫼state - ref⫼₁`.
pub fn error_h2h1(state: &StatePair, reference: &StatePair) -> Result<f64> {
    if state.degree() != reference.degree() {
        return Err(Error::Config(format!(
            "cannot compare degree {} with degree {}",
            state.degree(),
            reference.degree()
        )));
    }
    Ok(pair_norm_diff(state, reference))
}

/// `⫼state - ref⫼₁` after zero-padding `state` to the degree of `reference`,
/// so the unresolved tail of the reference counts as error.
pub fn error_h2h1_padded(state: &StatePair, reference: &StatePair) -> Result<f64> {
    if state.degree() > reference.degree() {
        return Err(Error::Config(format!(
            "reference degree {} is below state degree {}",
            reference.degree(),
            state.degree()
        )));
    }
    Ok(pair_norm_diff(&state.with_degree(reference.degree()), reference))
}

fn pair_norm_diff(a: &StatePair, b: &StatePair) -> f64 {
    let d = a.sub(b);
    pair_norm(&d.u, &d.udot, 1)
}

/// Fraction of `‖u‖₀` carried by the top 10% of modes.
pub fn spectral_tail(u: &crate::spectral::SpectralField) -> f64 {
    let k = u.degree() as i64;
    let cut = k - (k as f64 * 0.1).ceil() as i64;
    let tail: f64 = u.modes().filter(|(j, _)| j.abs() > cut).map(|(_, c)| c.norm_sqr()).sum();
    let total = sobolev_norm_sq(u, 0);
    if total == 0.0 {
        0.0
    } else {
        (tail / total).sqrt()
    }
}

/// Largest admissible [`spectral_tail`] for [`local_error`].
pub const LOCAL_ERROR_TAIL: f64 = 1e-8;

/// Whether the local error is measured on the one-step or the split form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepForm {
    OneStep,
    Split,
}

/// One step of size `τ` minus the reference solution at `τ`, in `⫼·⫼₁`.
pub fn local_error(
    p: &ProblemSpec,
    state0: &StatePair,
    tau: f64,
    filter: FilterSpec,
    rc: &ReferenceConfig,
) -> Result<f64> {
    local_error_with(p, state0, tau, filter, rc, StepForm::OneStep)
}

pub fn local_error_with(
    p: &ProblemSpec,
    state0: &StatePair,
    tau: f64,
    filter: FilterSpec,
    rc: &ReferenceConfig,
    form: StepForm,
) -> Result<f64> {
    let tail = spectral_tail(&state0.u);
    if tail >= LOCAL_ERROR_TAIL {
        return Err(Error::Precondition(format!(
            "initial data under-resolved: top 10% of modes carry {tail:e} of the L2 norm"
        )));
    }
    let cfg = IntegratorConfig::new(tau, state0.degree(), filter)?;
    let integ = Integrator::new(p, &cfg)?;
    let one = match form {
        StepForm::OneStep => integ.step(state0)?,
        StepForm::Split => integ.step_split(state0)?,
    };
    let reference = reference_solution(p, state0, tau, tau, rc)?;
    error_h2h1(&one, &reference.state)
}
