//! Hardy-space norms on the unit disc, the Carleman area–boundary
//! inequality, the Hardy-to-Bergman embedding ratio at `n = 1`, and a Szego
//! kernel cross-check from boundary Gram matrices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::Basis;
use crate::domain::Domain;
use crate::error::{PbergError, Result};
use crate::quad::{circle_rule, QuadGrid};

/// Angles used on each sampling circle.
pub const CIRCLE_POINTS: usize = 256;

fn require_disc(basis: &Basis) -> Result<()> {
    match basis.domain {
        Domain::UnitDisc => Ok(()),
        _ => Err(PbergError::UnsupportedDomain(
            "Hardy norms are implemented on the unit disc".into(),
        )),
    }
}

/// `int_{|z|=r} |f|^p ds` for each radius (arc-length measure).
pub fn boundary_p_means(
    p: f64,
    basis: &Basis,
    coeffs: &DVector<Complex64>,
    radii: &[f64],
) -> Result<Vec<f64>> {
    require_disc(basis)?;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let (nodes, weights) = circle_rule(r, CIRCLE_POINTS);
        let vals = basis.eval_matrix_at(&nodes) * coeffs;
        out.push(
            vals.iter()
                .zip(&weights)
                .map(|(v, &w)| w * v.norm().powf(p))
                .sum(),
        );
    }
    Ok(out)
}

/// The sampling radii `1 - 2^{-k}` together with the boundary circle itself
/// (span elements are polynomials, continuous up to the closure, and the
/// boundary value is the supremum of the monotone interior means).
pub fn hardy_radii() -> Vec<f64> {
    let mut radii: Vec<f64> = (1..=14).map(|k| 1.0 - 0.5_f64.powi(k)).collect();
    radii.push(1.0);
    radii
}

/// `||f||_{H^p}^p`: supremum of the boundary p-means over the sampling
/// circles.
pub fn hardy_norm_p(p: f64, basis: &Basis, coeffs: &DVector<Complex64>) -> Result<f64> {
    let means = boundary_p_means(p, basis, coeffs, &hardy_radii())?;
    Ok(means.into_iter().fold(0.0, f64::max))
}

/// Carleman's inequality: returns
/// `(int_D |f|^2, (1/(4 pi)) (int_{dD} |f| ds)^2)`; the left side never
/// exceeds the right, with equality for constants.
pub fn carleman_check(
    basis: &Basis,
    coeffs: &DVector<Complex64>,
    grid: &QuadGrid,
) -> Result<(f64, f64)> {
    require_disc(basis)?;
    let vals = basis.eval_matrix(grid) * coeffs;
    let lhs: f64 = vals
        .iter()
        .zip(&grid.weights)
        .map(|(v, &w)| w * v.norm_sqr())
        .sum();
    let (nodes, weights) = circle_rule(1.0, CIRCLE_POINTS);
    let bvals = basis.eval_matrix_at(&nodes) * coeffs;
    let line: f64 = bvals
        .iter()
        .zip(&weights)
        .map(|(v, &w)| w * v.norm())
        .sum();
    Ok((lhs, line * line / (4.0 * PI)))
}

/// `||f||_{A^{2p}} / ||f||_{H^p}`: the Hardy-to-Bergman embedding ratio at
/// exponent `q = 2p`.
pub fn hl_ratio(
    p: f64,
    basis: &Basis,
    coeffs: &DVector<Complex64>,
    grid: &QuadGrid,
) -> Result<f64> {
    require_disc(basis)?;
    let vals = basis.eval_matrix(grid) * coeffs;
    let a_norm: f64 = vals
        .iter()
        .zip(&grid.weights)
        .map(|(v, &w)| w * v.norm().powf(2.0 * p))
        .sum::<f64>()
        .powf(1.0 / (2.0 * p));
    let h_norm = hardy_norm_p(p, basis, coeffs)?.powf(1.0 / p);
    Ok(a_norm / h_norm)
}

/// Szego kernel diagonal of the unit disc from the boundary Gram of the
/// monomials: converges to `1 / (2 pi (1 - |z|^2))`.
pub fn szego_diag(max_degree: i32, z: Complex64) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(PbergError::Range("need |z| < 1".into()));
    }
    let n = (max_degree + 1) as usize;
    let (nodes, weights) = circle_rule(1.0, CIRCLE_POINTS);
    let b = DMatrix::from_fn(nodes.len(), n, |i, j| nodes[i].powi(j as i32));
    let g = crate::basis::weighted_gram(&b, &weights);
    let v = DVector::from_fn(n, |j, _| z.powi(j as i32));
    let u = g
        .clone()
        .lu()
        .solve(&v)
        .ok_or(PbergError::RankDeficient)?;
    let s: Complex64 = v.iter().zip(u.iter()).map(|(a, b)| b.conj() * a).sum();
    Ok(s.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_basis;
    use crate::quad::build_grid;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn setup() -> (Basis, QuadGrid) {
        let basis = make_basis(Domain::UnitDisc, 2.0, 12).unwrap();
        let grid = build_grid(Domain::UnitDisc, 32, 64).unwrap();
        (basis, grid)
    }

    #[test]
    fn carleman_equality_for_constants() {
        let (basis, grid) = setup();
        let mut c = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
        c[0] = Complex64::new(1.0, 0.0);
        let (lhs, rhs) = carleman_check(&basis, &c, &grid).unwrap();
        assert_abs_diff_eq!(lhs, PI, epsilon = 1e-10);
        assert_abs_diff_eq!(rhs, PI, epsilon = 1e-10);
    }

    #[test]
    fn carleman_holds_for_random_polynomials() {
        let (basis, grid) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let c = DVector::from_fn(11, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let mut full = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
            for j in 0..11 {
                full[j] = c[j];
            }
            let (lhs, rhs) = carleman_check(&basis, &full, &grid).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-10), "lhs {lhs} > rhs {rhs}");
        }
    }

    #[test]
    fn monomial_hardy_norms_and_ratio() {
        let (basis, grid) = setup();
        let p = 2.0;
        let mut prev_ratio = f64::INFINITY;
        for k in 0..=4 {
            let mut c = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
            c[k] = Complex64::new(1.0, 0.0);
            let h = hardy_norm_p(p, &basis, &c).unwrap();
            assert_abs_diff_eq!(h, 2.0 * PI, epsilon = 1e-9);
            let a: f64 = {
                let vals = basis.eval_matrix(&grid) * &c;
                vals.iter()
                    .zip(&grid.weights)
                    .map(|(v, &w)| w * v.norm().powf(2.0 * p))
                    .sum()
            };
            assert_abs_diff_eq!(a, PI / (p * k as f64 + 1.0), epsilon = 1e-9);
            let ratio = hl_ratio(p, &basis, &c, &grid).unwrap();
            assert!(ratio.is_finite() && ratio < prev_ratio);
            prev_ratio = ratio;
        }
    }

    #[test]
    fn boundary_means_monotone() {
        let (basis, _) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let c = DVector::from_fn(basis.len(), |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            // compare theta-means (arc-length mean divided by circumference)
            let radii = [0.3, 0.5, 0.7, 0.9, 0.99];
            let means = boundary_p_means(1.5, &basis, &c, &radii).unwrap();
            for i in 1..radii.len() {
                let m_prev = means[i - 1] / (2.0 * PI * radii[i - 1]);
                let m_next = means[i] / (2.0 * PI * radii[i]);
                assert!(m_next >= m_prev * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn szego_matches_closed_form() {
        let s0 = szego_diag(24, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s0, 1.0 / (2.0 * PI), epsilon = 1e-10);
        let s = szego_diag(24, Complex64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(s, 1.0 / (2.0 * PI * 0.75), epsilon = 1e-6);
    }

    #[test]
    fn non_disc_rejected() {
        let basis = make_basis(Domain::Annulus(0.5), 2.0, 8).unwrap();
        let c = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
        assert!(hardy_norm_p(2.0, &basis, &c).is_err());
    }
}
