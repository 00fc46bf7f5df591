//! Closed forms, bounds and asymptotic expansions used as oracles.
//!
//! Every formula here has an independent derivation (disc automorphisms,
//! orthonormal expansions of weighted spaces, elementary estimates with the
//! distance to the boundary); the solver is tested against them, never the
//! other way round.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::{k_cut, Basis};
use crate::domain::Domain;
use crate::error::{PbergError, Result};
use crate::quad::QuadGrid;

/// Diagonal kernel of the unit disc: `1 / (pi (1 - |z|^2)^2)`, independent
/// of the exponent.
pub fn disc_diag_closed(z: Complex64) -> f64 {
    let t = 1.0 - z.norm_sqr();
    1.0 / (PI * t * t)
}

/// Off-diagonal kernel of the unit disc:
/// `(1/pi) ((1 - |z|^2) / (1 - conj(z) zeta))^{4/p} (1 - |z|^2)^{-2}`.
///
/// The complex power takes the principal branch; `1 - conj(z) zeta` has
/// positive real part on the disc, so no cut is crossed.
pub fn disc_kernel_closed(p: f64, zeta: Complex64, z: Complex64) -> Result<Complex64> {
    if zeta.norm() >= 1.0 || z.norm() >= 1.0 {
        return Err(PbergError::Range(format!(
            "disc kernel needs |zeta|, |z| < 1; got {zeta}, {z}"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let t = 1.0 - z.norm_sqr();
    let base = Complex64::new(t, 0.0) / (one - z.conj() * zeta);
    Ok(base.powf(4.0 / p) / Complex64::new(PI * t * t, 0.0))
}

/// Scaled-disc diagonal kernel: `K_{D_R}(z) = K_D(z/R) / R^2`.
pub fn scaled_disc_diag_closed(radius: f64, z: Complex64) -> f64 {
    disc_diag_closed(z / radius) / (radius * radius)
}

/// Two-term small-`|z|` expansion of the punctured-disc kernel:
/// `(2 - p k_p)/(2 pi |z|^{p k_p}) + ((4 - p k_p)/(2 pi)) |z|^{2 - p k_p}`.
pub fn punctured_asym(p: f64, r: f64) -> Result<f64> {
    let k = k_cut(p)? as f64;
    if !(r > 0.0 && r < 1.0) {
        return Err(PbergError::Range(format!("need 0 < |z| < 1, got {r}")));
    }
    let pk = p * k;
    Ok((2.0 - pk) / (2.0 * PI * r.powf(pk)) + (4.0 - pk) / (2.0 * PI) * r.powf(2.0 - pk))
}

/// Lower and upper bounds for the punctured-disc kernel near the puncture.
/// The lower bound is valid for `|z| < (2 - p k_p)/(p k_p)`; the upper bound
/// uses a free parameter `rho` in `(|z|, 1)`, by default `sqrt(|z|)`.
pub fn punctured_bounds(p: f64, r: f64, rho: Option<f64>) -> Result<(f64, f64)> {
    let k = k_cut(p)? as f64;
    let pk = p * k;
    if !(r > 0.0 && r < 1.0) {
        return Err(PbergError::Range(format!("need 0 < |z| < 1, got {r}")));
    }
    if r >= (2.0 - pk) / pk {
        return Err(PbergError::Range(format!(
            "lower bound requires |z| < (2 - p k_p)/(p k_p) = {}",
            (2.0 - pk) / pk
        )));
    }
    let rho = rho.unwrap_or_else(|| r.sqrt());
    if !(rho > r && rho < 1.0) {
        return Err(PbergError::Range(format!("need |z| < rho < 1, got rho = {rho}")));
    }
    let lower = (2.0 - pk + pk * r * r) / (2.0 * PI * r.powf(pk) * (1.0 - r * r).powi(2));
    let q = (r / rho) * (r / rho);
    let upper = (2.0 - pk + pk * q) / (2.0 * PI * r.powf(pk) * (1.0 - q).powi(2));
    Ok((lower, upper))
}

/// Weighted disc kernel for the radial power weight `|w|^{p k_p}`:
/// `(2 - p k_p + p k_p w conj(z)) / (2 pi (1 - w conj(z))^2)`.
pub fn weighted_disc_closed(p: f64, w: Complex64, z: Complex64) -> Result<Complex64> {
    let k = k_cut(p)? as f64;
    if w.norm() >= 1.0 || z.norm() >= 1.0 {
        return Err(PbergError::Range("need |w|, |z| < 1".into()));
    }
    let pk = p * k;
    let one = Complex64::new(1.0, 0.0);
    let s = w * z.conj();
    Ok((Complex64::new(2.0 - pk, 0.0) + pk * s) / ((one - s).powi(2) * (2.0 * PI)))
}

/// Distance-based kernel bounds on a planar domain for `p < 2`:
/// `(2-p)/(2 pi R^{2-p}) delta(z)^{-p} <= K_p(z) <= delta(z)^{-2}/pi`
/// with `R` the diameter of the domain.
pub fn lemma_b6_bounds(p: f64, domain: Domain, z: Complex64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 2.0) {
        return Err(PbergError::Range(format!("bounds require 0 < p < 2, got {p}")));
    }
    domain.require_interior(z)?;
    let delta = domain.boundary_distance(z);
    let diam = domain.diameter();
    let lower = (2.0 - p) / (2.0 * PI * diam.powf(2.0 - p)) * delta.powf(-p);
    let upper = 1.0 / (PI * delta * delta);
    Ok((lower, upper))
}

/// Maximal residual of the mean-value property `f(a) = (1/|Omega|) int f`
/// over the basis elements (discrete average on the grid).
pub fn mean_value_residual(grid: &QuadGrid, basis: &Basis, a: Complex64) -> f64 {
    let total = grid.total_weight();
    let b = basis.eval_matrix(grid);
    let va = basis.eval(a);
    let mut worst = 0.0_f64;
    for j in 0..basis.len() {
        let mut avg = Complex64::new(0.0, 0.0);
        for i in 0..grid.len() {
            avg += grid.weights[i] * b[(i, j)];
        }
        avg /= total;
        worst = worst.max((va[j] - avg).norm());
    }
    worst
}

/// Two-term least-squares fit against the punctured-disc expansion.
#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub p: f64,
    pub k_p: i32,
    /// Fitted coefficient of `|z|^{-p k_p}`.
    pub leading: f64,
    /// Fitted coefficient of `|z|^{2 - p k_p}`.
    pub second: f64,
    /// Per-sample residuals of the fit, in the rescaled variable
    /// `y = K |z|^{p k_p}`.
    pub residuals: Vec<f64>,
    pub samples: Vec<(f64, f64)>,
}

/// Fits `K(r) ~ A r^{-p k_p} + B r^{2 - p k_p}` from `(r, K)` samples by
/// linear least squares in the rescaled variable `y = K r^{p k_p} = A + B r^2`.
pub fn fit_puncture(p: f64, samples: &[(f64, f64)]) -> Result<AsymptoticFit> {
    let k = k_cut(p)?;
    if samples.len() < 4 {
        return Err(PbergError::Parameter(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    for &(r, _) in samples {
        if !(r >= 1e-3 * 0.999 && r <= 0.2 * 1.001) {
            return Err(PbergError::Range(format!(
                "fit radii must lie in [1e-3, 0.2], got {r}"
            )));
        }
    }
    let pk = p * k as f64;
    let mut s00 = 0.0;
    let mut s01 = 0.0;
    let mut s11 = 0.0;
    let mut t0 = 0.0;
    let mut t1 = 0.0;
    for &(r, kv) in samples {
        let y = kv * r.powf(pk);
        let u = r * r;
        s00 += 1.0;
        s01 += u;
        s11 += u * u;
        t0 += y;
        t1 += u * y;
    }
    let det = s00 * s11 - s01 * s01;
    if det.abs() < 1e-300 || !det.is_finite() {
        return Err(PbergError::FitRank);
    }
    let a = (s11 * t0 - s01 * t1) / det;
    let b = (s00 * t1 - s01 * t0) / det;
    let residuals = samples
        .iter()
        .map(|&(r, kv)| kv * r.powf(pk) - a - b * r * r)
        .collect();
    Ok(AsymptoticFit {
        p,
        k_p: k,
        leading: a,
        second: b,
        residuals,
        samples: samples.to_vec(),
    })
}

/// `(1 - s)^{-1/p}`: the Banach–Mazur distance bound from a Schwarz content.
pub fn bm_bound(s: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(PbergError::Range(format!("bound needs p >= 1, got {p}")));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(PbergError::Range(format!(
            "content must lie in [0, 1) for a finite bound, got {s}"
        )));
    }
    Ok((1.0 - s).powf(-1.0 / p))
}

/// Evaluates a combination of basis elements at `z`.
pub fn eval_in_basis(basis: &Basis, coeffs: &DVector<Complex64>, z: Complex64) -> Complex64 {
    basis.func_value(coeffs, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn disc_closed_forms() {
        let v = disc_kernel_closed(2.0, Complex64::new(0.6, 0.0), Complex64::new(0.3, 0.0))
            .unwrap();
        assert_abs_diff_eq!(v.re, 0.47339364, epsilon = 5e-7);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        for p in [1.0, 2.0, 3.7] {
            let c = disc_kernel_closed(p, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
                .unwrap();
            assert_abs_diff_eq!(c.re, 1.0 / PI, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(
            disc_diag_closed(Complex64::new(0.5, 0.0)),
            0.565884242,
            epsilon = 1e-6
        );
        assert!(disc_kernel_closed(2.0, Complex64::new(1.1, 0.0), Complex64::new(0.0, 0.0))
            .is_err());
    }

    #[test]
    fn punctured_asymptote_values() {
        // p = 1, |z| = 0.05: 1/(2 pi 0.05) + (3/(2 pi)) 0.05
        let v = punctured_asym(1.0, 0.05).unwrap();
        assert_abs_diff_eq!(v, 3.2070, epsilon = 1e-4);
        // p = 2/3: leading exponent p k_p = 4/3, coefficient 1/(3 pi)
        let p = 2.0 / 3.0;
        let r = 0.01;
        let v = punctured_asym(p, r).unwrap();
        let lead = 1.0 / (3.0 * PI) / r.powf(4.0 / 3.0);
        assert!((v - lead) / lead < 0.01);
    }

    #[test]
    fn punctured_bounds_bracket_asym() {
        let r = 0.05;
        let (lo, hi) = punctured_bounds(1.0, r, None).unwrap();
        let mid = punctured_asym(1.0, r).unwrap();
        assert!(lo <= mid * 1.001, "lo {lo} vs mid {mid}");
        assert!(mid <= hi * 1.001, "mid {mid} vs hi {hi}");
        // out of validity range for the lower bound: p = 1.5 needs |z| < 1/3
        assert!(punctured_bounds(1.5, 0.5, None).is_err());
    }

    #[test]
    fn weighted_disc_values_and_zero_free() {
        let v = weighted_disc_closed(1.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(v.re, 1.0 / (2.0 * PI), epsilon = 1e-14);
        let v = weighted_disc_closed(1.0, Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0))
            .unwrap();
        assert_abs_diff_eq!(v.re, 0.35368, epsilon = 1e-5);
        // zero-free for |z| < (2 - p k_p)/(p k_p) = 1 at p = 1
        for i in 0..20 {
            let z = Complex64::from_polar(0.04 * i as f64, 0.37 * i as f64);
            for j in 0..10 {
                let w = Complex64::from_polar(0.09 * j as f64, -0.81 * j as f64);
                let v = weighted_disc_closed(1.0, w, z).unwrap();
                assert!(v.norm() > 1e-3);
            }
        }
    }

    #[test]
    fn b6_bounds_disc_center() {
        let (lo, hi) = lemma_b6_bounds(1.0, Domain::UnitDisc, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(lo, 1.0 / (4.0 * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0 / PI, epsilon = 1e-12);
        let k = 1.0 / PI; // disc kernel at 0
        assert!(lo <= k && k <= hi);
        assert!(lemma_b6_bounds(2.5, Domain::UnitDisc, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_expansion() {
        let p = 1.0;
        let (a_true, b_true) = (1.0 / (2.0 * PI), 3.0 / (2.0 * PI));
        let samples: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let r = 1e-3 + (0.1 - 1e-3) * i as f64 / 7.0;
                (r, a_true / r + b_true * r)
            })
            .collect();
        let fit = fit_puncture(p, &samples).unwrap();
        assert_abs_diff_eq!(fit.leading, a_true, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.second, b_true, epsilon = 1e-10);
        assert!(fit_puncture(p, &samples[..3]).is_err());
    }

    #[test]
    fn bm_bound_values() {
        assert_abs_diff_eq!(bm_bound(0.5, 1.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bm_bound(0.75, 2.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bm_bound(0.0, 1.7).unwrap(), 1.0, epsilon = 1e-14);
        assert!(bm_bound(1.0, 2.0).is_err());
    }
}
