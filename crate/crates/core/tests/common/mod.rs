//! Dense O(K²) re-implementation of the fully discrete method, sharing no
//! code with the library beyond the coefficient container.

#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use qlwave::filters::{FilterKind, FilterSpec};
use qlwave::SpectralField;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Coefficients `j = -K..=K` as a plain vector.
pub fn coeffs(f: &SpectralField) -> Vec<Complex64> {
    let k = f.degree() as i64;
    (-k..=k).map(|j| f.coeff(j)).collect()
}

pub fn field(v: Vec<Complex64>) -> SpectralField {
    let k = (v.len() - 1) / 2;
    SpectralField::from_coeffs(k, v).unwrap()
}

fn bracket(j: i64) -> f64 {
    ((j * j) as f64 + 1.0).sqrt()
}

fn plain_sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

pub fn phi(kind: FilterKind, x: f64) -> f64 {
    match kind {
        FilterKind::Impulse | FilterKind::HairerLubich => 1.0,
        FilterKind::GrimmHochbruck => plain_sinc(x),
        FilterKind::SincC(cc) => plain_sinc(cc * x),
    }
}

pub fn psi1(kind: FilterKind, x: f64) -> f64 {
    match kind {
        FilterKind::Impulse => 1.0,
        FilterKind::HairerLubich => plain_sinc(x),
        FilterKind::GrimmHochbruck => plain_sinc(x) * plain_sinc(x),
        FilterKind::SincC(cc) => plain_sinc(x) * plain_sinc(cc * x),
    }
}

/// Point value by direct summation.
pub fn eval(v: &[Complex64], x: f64) -> f64 {
    let k = ((v.len() - 1) / 2) as i64;
    v.iter()
        .enumerate()
        .map(|(i, cj)| (cj * Complex64::from_polar(1.0, (i as i64 - k) as f64 * x)).re)
        .sum()
}

/// Degree-`k` interpolant of point values on `2k+1` nodes by direct DFT.
pub fn dft_interpolate(values: &[f64], k: usize) -> Vec<Complex64> {
    let n = values.len();
    assert_eq!(n, 2 * k + 1);
    let k = k as i64;
    (-k..=k)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(m, &y)| Complex64::from_polar(y, -(j as f64) * TAU * m as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Full linear convolution of two centered coefficient vectors.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (l, y) in b.iter().enumerate() {
            out[i + l] += x * y;
        }
    }
    out
}

pub fn scale_modes(v: &[Complex64], m: impl Fn(i64) -> f64) -> Vec<Complex64> {
    let k = ((v.len() - 1) / 2) as i64;
    v.iter().enumerate().map(|(i, x)| x * m(i as i64 - k)).collect()
}

pub fn truncate(v: &[Complex64], k: usize) -> Vec<Complex64> {
    let l = (v.len() - 1) / 2;
    v[l - k..=l + k].to_vec()
}

pub struct DenseProblem<'a> {
    pub kappa: f64,
    pub a: &'a dyn Fn(f64) -> f64,
    pub g: Option<&'a dyn Fn(f64, f64) -> f64>,
}

/// `fᴷ(u)` of degree `2K`.
pub fn dense_f(u: &[Complex64], p: &DenseProblem) -> Vec<Complex64> {
    let k = (u.len() - 1) / 2;
    let n = 2 * k + 1;
    let nodes: Vec<f64> = (0..n).map(|m| TAU * m as f64 / n as f64).collect();
    let a_vals: Vec<f64> = nodes.iter().map(|&x| (p.a)(eval(u, x))).collect();
    let a_k = dft_interpolate(&a_vals, k);
    let uxx = scale_modes(u, |j| -((j * j) as f64));
    let mut out = convolve(&a_k, &uxx);
    if let Some(g) = p.g {
        let ux: Vec<Complex64> = {
            let kk = k as i64;
            u.iter().enumerate().map(|(i, x)| x * c(0.0, (i as i64 - kk) as f64)).collect()
        };
        let g_vals: Vec<f64> = nodes.iter().map(|&x| g(eval(u, x), eval(&ux, x))).collect();
        let g_k = dft_interpolate(&g_vals, k);
        for (i, x) in g_k.iter().enumerate() {
            out[k + i] += x;
        }
    }
    out
}

/// `𝒫ᴷ Ψ₁ fᴷ(Φu)`.
pub fn dense_fhat(u: &[Complex64], p: &DenseProblem, tau: f64, kind: FilterKind) -> Vec<Complex64> {
    let k = (u.len() - 1) / 2;
    let phi_u = scale_modes(u, |j| phi(kind, tau * bracket(j)));
    let f = dense_f(&phi_u, p);
    truncate(&scale_modes(&f, |j| psi1(kind, tau * bracket(j))), k)
}

/// One step of the method from its defining formulas.
pub fn dense_step(
    u: &[Complex64],
    udot: &[Complex64],
    p: &DenseProblem,
    tau: f64,
    filter: &FilterSpec,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let kind = filter.kind;
    let k = ((u.len() - 1) / 2) as i64;
    let f0 = dense_fhat(u, p, tau, kind);
    let u1: Vec<Complex64> = (0..u.len())
        .map(|i| {
            let w = bracket(i as i64 - k);
            let (cs, sc) = ((tau * w).cos(), plain_sinc(tau * w));
            u[i] * cs + udot[i] * (tau * sc) + f0[i] * (0.5 * tau * tau * sc * p.kappa)
        })
        .collect();
    let f1 = dense_fhat(&u1, p, tau, kind);
    let udot1: Vec<Complex64> = (0..u.len())
        .map(|i| {
            let w = bracket(i as i64 - k);
            let (cs, sn) = ((tau * w).cos(), (tau * w).sin());
            u[i] * (-w * sn) + udot[i] * cs + f0[i] * (0.5 * tau * cs * p.kappa) + f1[i] * (0.5 * tau * p.kappa)
        })
        .collect();
    (u1, udot1)
}

/// A real field with uniformly random coefficients of size `amp`.
pub fn random_field(rng: &mut impl rand::Rng, k: usize, amp: f64) -> SpectralField {
    let modes: Vec<Complex64> = (0..=k)
        .map(|j| {
            let im = if j == 0 { 0.0 } else { rng.random_range(-amp..amp) };
            c(rng.random_range(-amp..amp), im)
        })
        .collect();
    SpectralField::from_nonnegative_modes(&modes).unwrap()
}

/// A random field whose coefficients decay like `|j|^{-decay}`.
pub fn smooth_random_field(rng: &mut impl rand::Rng, k: usize, amp: f64, decay: f64) -> SpectralField {
    let modes: Vec<Complex64> = (0..=k)
        .map(|j| {
            let w = amp / (1.0 + j as f64).powf(decay);
            let im = if j == 0 { 0.0 } else { rng.random_range(-w..w) };
            c(rng.random_range(-w..w), im)
        })
        .collect();
    SpectralField::from_nonnegative_modes(&modes).unwrap()
}

pub fn catalog() -> Vec<FilterSpec> {
    vec![
        FilterSpec::impulse(),
        FilterSpec::hairer_lubich(),
        FilterSpec::grimm_hochbruck(),
        FilterSpec::sinc_c(2.0).unwrap(),
        FilterSpec::sinc_c(3.0).unwrap(),
    ]
}

pub fn admissible() -> Vec<FilterSpec> {
    catalog().into_iter().filter(|f| f.kind != FilterKind::Impulse).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
