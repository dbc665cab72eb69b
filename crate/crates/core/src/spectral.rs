//! Trigonometric polynomials on the periodic interval [0, 2π).
//!
//! A [`SpectralField`] of degree `K` stores the complex Fourier coefficients
//! `c_j`, `j = -K..=K`, of a real-valued function `Σ c_j e^{ijx}`. The full
//! spectrum is kept and Hermitian symmetry `c_{-j} = conj(c_j)` is enforced
//! whenever a field is built from raw coefficients.
//!
//! Transforms go through `rustfft`. Synthesis accepts any grid with at least
//! `2K+1` nodes; trigonometric interpolation uses exactly `2K+1` nodes so that
//! the interpolant of degree `K` is unique and no Nyquist mode appears.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Products whose degree is at most this are formed by direct convolution.
pub const DIRECT_PRODUCT_MAX_DEGREE: usize = 32;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Klein–Gordon weight `⟨j⟩ = √(j²+1)`, the symbol of `Ω = √(1-∂ₓ²)`.
#[inline]
pub fn bracket(j: i64) -> f64 {
    let j = j as f64;
    (j * j + 1.0).sqrt()
}

/// Sobolev index `s ≥ 0` of the norm `‖v‖_s² = Σ ⟨j⟩^{2s} |v̂_j|²`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct NormOrder(f64);

impl NormOrder {
    pub const L2: NormOrder = NormOrder(0.0);

    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(NormOrder(s))
        } else {
            Err(Error::Config(format!("Sobolev index must be finite and >= 0, got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `⟨j⟩^{2s}`, evaluated as an integer power of `j²+1` when `s` is integral.
    #[inline]
    pub fn weight(self, j: i64) -> f64 {
        let base = (j as f64) * (j as f64) + 1.0;
        if self.0.fract() == 0.0 && self.0 <= 64.0 {
            base.powi(self.0 as i32)
        } else {
            base.powf(self.0)
        }
    }
}

impl From<u32> for NormOrder {
    fn from(s: u32) -> Self {
        NormOrder(s as f64)
    }
}

/// A real trigonometric polynomial `Σ_{|j|≤K} c_j e^{ijx}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(degree: usize) -> Self {
        SpectralField {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * degree + 1],
        }
    }

    /// Builds a field from coefficients ordered `j = -K..=K`.
    ///
    /// The coefficients are symmetrized to `(c_j + conj(c_{-j}))/2`, so the
    /// result is always a real field.
    pub fn from_coeffs(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::Config(format!(
                "degree {degree} needs {} coefficients, got {}",
                2 * degree + 1,
                coeffs.len()
            )));
        }
        let mut f = SpectralField { degree, coeffs };
        f.symmetrize();
        Ok(f)
    }

    /// Builds a field from a coefficient function of the mode index.
    pub fn from_fn(degree: usize, mut coeff: impl FnMut(i64) -> Complex64) -> Self {
        let k = degree as i64;
        let coeffs = (-k..=k).map(&mut coeff).collect();
        let mut f = SpectralField { degree, coeffs };
        f.symmetrize();
        f
    }

    /// Builds a field of degree `K` from `c_0, c_1, ..., c_K`; negative modes
    /// are filled in by conjugation.
    pub fn from_nonnegative_modes(modes: &[Complex64]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("at least the mean mode is required".into()));
        }
        let degree = modes.len() - 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
        coeffs[degree] = Complex64::new(modes[0].re, 0.0);
        for (j, c) in modes.iter().enumerate().skip(1) {
            coeffs[degree + j] = *c;
            coeffs[degree - j] = c.conj();
        }
        Ok(SpectralField { degree, coeffs })
    }

    pub fn constant(value: f64) -> Self {
        SpectralField {
            degree: 0,
            coeffs: vec![Complex64::new(value, 0.0)],
        }
    }

    /// `amplitude · cos(kx)`.
    pub fn cos_mode(k: usize, amplitude: f64) -> Self {
        let mut f = SpectralField::zeros(k);
        if k == 0 {
            f.coeffs[0] = Complex64::new(amplitude, 0.0);
        } else {
            f.coeffs[0] = Complex64::new(0.5 * amplitude, 0.0);
            f.coeffs[2 * k] = Complex64::new(0.5 * amplitude, 0.0);
        }
        f
    }

    /// `amplitude · sin(kx)`.
    pub fn sin_mode(k: usize, amplitude: f64) -> Self {
        let mut f = SpectralField::zeros(k);
        if k > 0 {
            f.coeffs[2 * k] = Complex64::new(0.0, -0.5 * amplitude);
            f.coeffs[0] = Complex64::new(0.0, 0.5 * amplitude);
        }
        f
    }

    fn symmetrize(&mut self) {
        let k = self.degree;
        self.coeffs[k].im = 0.0;
        for j in 1..=k {
            let avg = (self.coeffs[k + j] + self.coeffs[k - j].conj()) * 0.5;
            self.coeffs[k + j] = avg;
            self.coeffs[k - j] = avg.conj();
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients ordered `j = -K..=K`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of mode `j`; zero outside the represented range.
    #[inline]
    pub fn coeff(&self, j: i64) -> Complex64 {
        let k = self.degree as i64;
        if j.abs() > k {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(j + k) as usize]
        }
    }

    /// Iterator over `(j, c_j)` for `j = -K..=K`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - k, *c))
    }

    /// Re-expresses the field at another degree: zero-padding when growing,
    /// truncation (the L²-orthogonal projection) when shrinking.
    pub fn with_degree(&self, degree: usize) -> SpectralField {
        if degree == self.degree {
            return self.clone();
        }
        let d = degree as i64;
        SpectralField {
            degree,
            coeffs: (-d..=d).map(|j| self.coeff(j)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest coefficient-wise modulus of `self - other` over all modes.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        let d = self.degree.max(other.degree) as i64;
        (-d..=d)
            .map(|j| (self.coeff(j) - other.coeff(j)).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> SpectralField {
        SpectralField {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor · other`.
    pub fn axpy(&self, factor: f64, other: &SpectralField) -> SpectralField {
        let d = self.degree.max(other.degree) as i64;
        SpectralField {
            degree: d as usize,
            coeffs: (-d..=d)
                .map(|j| self.coeff(j) + other.coeff(j) * factor)
                .collect(),
        }
    }

    /// Applies a per-mode real symbol `m(j)`. Symmetry is preserved because
    /// every caller passes a symbol that is even in `j`.
    pub(crate) fn map_modes(&self, mut m: impl FnMut(i64) -> f64) -> SpectralField {
        let k = self.degree as i64;
        let mut coeffs = self.coeffs.clone();
        for j in 0..=k {
            let w = m(j);
            coeffs[(k + j) as usize] *= w;
            if j > 0 {
                coeffs[(k - j) as usize] *= w;
            }
        }
        SpectralField {
            degree: self.degree,
            coeffs,
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

/// Samples of a real function at the nodes `x_k = 2πk/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("a grid needs at least one node".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("grid value at node {k} is {}", values[k])));
        }
        Ok(GridFunction { values })
    }

    /// Samples `f` at the `n` equispaced nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new((0..n).map(|k| f(node(k, n))).collect())
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// The `k`-th of `n` equispaced nodes on [0, 2π).
#[inline]
pub fn node(k: usize, n: usize) -> f64 {
    std::f64::consts::TAU * k as f64 / n as f64
}

/// Evaluates `f` at `n ≥ 2K+1` equispaced nodes.
pub fn synthesize(f: &SpectralField, n: usize) -> Result<GridFunction> {
    let required = 2 * f.degree + 1;
    if n < required {
        return Err(Error::Aliasing {
            degree: f.degree,
            nodes: n,
            required,
        });
    }
    let values = synthesize_unchecked(f, n);
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("synthesized value at node {k}")));
    }
    Ok(GridFunction { values })
}

pub(crate) fn synthesize_unchecked(f: &SpectralField, n: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, c) in f.modes() {
        buf[j.rem_euclid(n as i64) as usize] = c;
    }
    plan(n, true).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Trigonometric interpolation `𝓘^K`: the unique degree-`K` polynomial
/// through `2K+1` equispaced samples.
pub fn interpolate(g: &GridFunction, degree: usize) -> Result<SpectralField> {
    let n = 2 * degree + 1;
    if g.nodes() != n {
        return Err(Error::Config(format!(
            "degree-{degree} interpolation needs exactly {n} nodes, got {}",
            g.nodes()
        )));
    }
    Ok(interpolate_unchecked(g.values(), degree))
}

pub(crate) fn interpolate_unchecked(values: &[f64], degree: usize) -> SpectralField {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, false).process(&mut buf);
    let inv = 1.0 / n as f64;
    SpectralField::from_fn(degree, |j| buf[j.rem_euclid(n as i64) as usize] * inv)
}

/// Degree-`K` interpolant of `h(f(x))` from samples on the `2K+1` nodes.
///
/// `f` may have any degree; only its point values enter.
pub fn interpolate_composition(
    f: &SpectralField,
    degree: usize,
    h: impl Fn(f64) -> f64,
) -> Result<SpectralField> {
    let mut vals = sample_any(f, 2 * degree + 1);
    for v in vals.iter_mut() {
        *v = h(*v);
    }
    let g = GridFunction::new(vals)?;
    Ok(interpolate_unchecked(g.values(), degree))
}

/// Point values of `f` at `n` nodes, with no resolution requirement.
pub(crate) fn sample_any(f: &SpectralField, n: usize) -> Vec<f64> {
    if n > 2 * f.degree {
        return synthesize_unchecked(f, n);
    }
    // Fold modes onto the grid; aliasing is the point here.
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, c) in f.modes() {
        buf[j.rem_euclid(n as i64) as usize] += c;
    }
    plan(n, true).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// L²-orthogonal projection `𝒫^K` onto trigonometric polynomials of degree `K`.
///
/// For `K` larger than the input degree this is the identity (zero padded).
pub fn project(f: &SpectralField, degree: usize) -> SpectralField {
    f.with_degree(degree)
}

/// Fourier multiplier: `c_j ↦ m(⟨j⟩) c_j`.
///
/// Time-scaled operators such as `cos(τΩ)` are built by passing
/// `|w| (tau * w).cos()`.
pub fn multiplier(m: impl Fn(f64) -> f64, f: &SpectralField) -> Result<SpectralField> {
    let k = f.degree as i64;
    let symbol: Vec<f64> = (0..=k).map(|j| m(bracket(j))).collect();
    if let Some(j) = symbol.iter().position(|w| !w.is_finite()) {
        return Err(Error::NonFinite(format!(
            "multiplier is {} at <j> = {}",
            symbol[j],
            bracket(j as i64)
        )));
    }
    Ok(f.map_modes(|j| symbol[j as usize]))
}

/// Spectral derivative `∂ₓ^order`: `c_j ↦ (ij)^order c_j`.
pub fn derivative(f: &SpectralField, order: u32) -> SpectralField {
    let k = f.degree as i64;
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let j = (i as i64 - k) as f64;
            let mag = j.powi(order as i32);
            // i^order rotates by quarter turns.
            match order % 4 {
                0 => c * mag,
                1 => Complex64::new(-c.im, c.re) * mag,
                2 => -c * mag,
                _ => Complex64::new(c.im, -c.re) * mag,
            }
        })
        .collect();
    SpectralField {
        degree: f.degree,
        coeffs,
    }
}

/// Exact coefficients of the product `f · g`, a field of degree `K₁+K₂`.
///
/// Small products use direct convolution; larger ones are evaluated on a
/// power-of-two grid with at least `2(K₁+K₂)+1` nodes, which resolves every
/// product mode without aliasing.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let total = f.degree + g.degree;
    if total <= DIRECT_PRODUCT_MAX_DEGREE {
        convolve(f, g)
    } else {
        product_on_grid(f, g, (2 * total + 1).next_power_of_two())
    }
}

/// Like [`dealiased_product`] but on an explicit grid of `nodes` points.
pub fn dealiased_product_on(f: &SpectralField, g: &SpectralField, nodes: usize) -> Result<SpectralField> {
    let total = f.degree + g.degree;
    if nodes < 2 * total + 1 {
        return Err(Error::Aliasing {
            degree: total,
            nodes,
            required: 2 * total + 1,
        });
    }
    Ok(product_on_grid(f, g, nodes))
}

pub(crate) fn product_on_grid(f: &SpectralField, g: &SpectralField, n: usize) -> SpectralField {
    let total = f.degree + g.degree;
    let fv = synthesize_unchecked(f, n);
    let gv = synthesize_unchecked(g, n);
    let mut buf: Vec<Complex64> = fv
        .iter()
        .zip(&gv)
        .map(|(a, b)| Complex64::new(a * b, 0.0))
        .collect();
    plan(n, false).process(&mut buf);
    let inv = 1.0 / n as f64;
    SpectralField::from_fn(total, |j| buf[j.rem_euclid(n as i64) as usize] * inv)
}

/// Direct `O(K₁K₂)` coefficient convolution.
pub fn convolve(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let total = f.degree + g.degree;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * total + 1];
    for (i, a) in f.coeffs.iter().enumerate() {
        for (l, b) in g.coeffs.iter().enumerate() {
            out[i + l] += a * b;
        }
    }
    let mut p = SpectralField {
        degree: total,
        coeffs: out,
    };
    p.symmetrize();
    p
}

/// `‖f‖_s² = Σ ⟨j⟩^{2s} |c_j|²`.
pub fn sobolev_norm_sq(f: &SpectralField, s: impl Into<NormOrder>) -> f64 {
    let s = s.into();
    f.modes().map(|(j, c)| s.weight(j) * c.norm_sqr()).sum()
}

/// `‖f‖_s`.
pub fn sobolev_norm(f: &SpectralField, s: impl Into<NormOrder>) -> f64 {
    sobolev_norm_sq(f, s).sqrt()
}

/// `⫼(u, u̇)⫼_s = (‖u‖²_{s+1} + ‖u̇‖²_s)^{1/2}`.
pub fn pair_norm(u: &SpectralField, udot: &SpectralField, s: impl Into<NormOrder>) -> f64 {
    let s = s.into();
    let s1 = NormOrder(s.0 + 1.0);
    (sobolev_norm_sq(u, s1) + sobolev_norm_sq(udot, s)).sqrt()
}

/// `⟨f, g⟩_s = Σ ⟨j⟩^{2s} conj(f̂_j) ĝ_j`, real for real fields.
pub fn inner_product(f: &SpectralField, g: &SpectralField, s: impl Into<NormOrder>) -> f64 {
    let s = s.into();
    let d = f.degree.min(g.degree) as i64;
    (-d..=d)
        .map(|j| s.weight(j) * (f.coeff(j).conj() * g.coeff(j)).re)
        .sum()
}
