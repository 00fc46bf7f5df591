//! Weighted `L^2` Bergman kernels by Gram factorization, the bridge identity
//! between the off-diagonal p-kernel and a weighted kernel for `1 <= p <= 2`,
//! and the Narasimhan–Simha metric coefficient.
//!
//! A [`WeightedKernel`] is the reproducing kernel of the basis span under the
//! discrete inner product `<f, g> = sum_i w_i e^{-phi_i} f_i conj(g_i)`:
//! `K_phi(zeta, z) = b(z)^H G^{-1} b(zeta)` with `G` the weighted Gram.

use nalgebra::{Cholesky, DVector, Dyn};
use num_complex::Complex64;

use crate::basis::{hermitian_condition, weighted_gram, Basis, GRAM_COND_LIMIT};
use crate::domain::Domain;
use crate::error::{PbergError, Result};
use crate::kernels::{Engine, BOX_ANGLES, BOX_RADII};
use crate::quad::QuadGrid;
use crate::util::{ls_slope, par_map};

/// Reproducing kernel of a weighted discrete `L^2` space over a basis span.
pub struct WeightedKernel {
    pub basis: Basis,
    pub nodes: Vec<Complex64>,
    /// `w_i e^{-phi_i}`.
    pub node_weights: Vec<f64>,
    scale: DVector<f64>,
    chol: Cholesky<Complex64, Dyn>,
}

impl WeightedKernel {
    /// Builds the kernel from node values of the weight exponent `phi`.
    pub fn build(grid: &QuadGrid, basis: &Basis, phi: &[f64]) -> Result<WeightedKernel> {
        assert_eq!(phi.len(), grid.len());
        let mut node_weights = Vec::with_capacity(grid.len());
        for (i, &w) in grid.weights.iter().enumerate() {
            let wi = w * (-phi[i]).exp();
            if !wi.is_finite() {
                return Err(PbergError::Parameter(format!(
                    "weight e^-phi not integrable at node {i} (phi = {})",
                    phi[i]
                )));
            }
            node_weights.push(wi);
        }
        let b = basis.eval_matrix(grid);
        let g = weighted_gram(&b, &node_weights);
        let n = g.nrows();
        let mut scale = DVector::from_element(n, 0.0);
        for j in 0..n {
            let d = g[(j, j)].re;
            if !(d > 0.0) || !d.is_finite() {
                return Err(PbergError::IllConditioned {
                    cond: f64::INFINITY,
                    limit: GRAM_COND_LIMIT,
                });
            }
            scale[j] = 1.0 / d.sqrt();
        }
        let mut gs = g;
        for j in 0..n {
            for k in 0..n {
                gs[(j, k)] *= scale[j] * scale[k];
            }
        }
        let cond = hermitian_condition(&gs);
        if !(cond <= GRAM_COND_LIMIT) {
            return Err(PbergError::IllConditioned {
                cond,
                limit: GRAM_COND_LIMIT,
            });
        }
        let chol = Cholesky::new(gs).ok_or(PbergError::IllConditioned {
            cond,
            limit: GRAM_COND_LIMIT,
        })?;
        Ok(WeightedKernel {
            basis: basis.clone(),
            nodes: grid.nodes.clone(),
            node_weights,
            scale,
            chol,
        })
    }

    /// Solves `G u = b(z)` through the scaled Cholesky factorization.
    fn representer(&self, z: Complex64) -> DVector<Complex64> {
        let v = self.basis.eval(z);
        let mut rhs = v;
        for j in 0..rhs.len() {
            rhs[j] *= self.scale[j];
        }
        let mut u = self.chol.solve(&rhs);
        for j in 0..u.len() {
            u[j] *= self.scale[j];
        }
        u
    }

    /// `K_phi(zeta, z)`, holomorphic in `zeta`, conjugate-holomorphic in `z`.
    pub fn eval(&self, zeta: Complex64, z: Complex64) -> Complex64 {
        let u = self.representer(z);
        self.basis
            .eval(zeta)
            .iter()
            .zip(u.iter())
            .map(|(b, u)| u.conj() * b)
            .sum()
    }

    /// `K_phi(point_j, z)` for many evaluation points at once.
    pub fn eval_many(&self, points: &[Complex64], z: Complex64) -> Vec<Complex64> {
        let u = self.representer(z);
        let b = self.basis.eval_matrix_at(points);
        let mut out = Vec::with_capacity(points.len());
        for i in 0..points.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..u.len() {
                acc += u[j].conj() * b[(i, j)];
            }
            out.push(acc);
        }
        out
    }

    pub fn diag(&self, z: Complex64) -> f64 {
        self.eval(z, z).re
    }

    /// Residual of the reproducing property for a span element given by
    /// `coeffs`: `|<f, K(., z)> - f(z)|`.
    pub fn reproducing_residual(&self, coeffs: &DVector<Complex64>, z: Complex64) -> f64 {
        let kvals = self.eval_many(&self.nodes, z);
        let b = self.basis.eval_matrix_at(&self.nodes);
        let f = &b * coeffs;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.nodes.len() {
            acc += self.node_weights[i] * f[i] * kvals[i].conj();
        }
        (acc - self.basis.func_value(coeffs, z)).norm()
    }
}

#[derive(Debug, Clone)]
pub struct Thm2Report {
    pub p: f64,
    pub z: Complex64,
    pub kp: f64,
    /// `sup_zeta |K_p(zeta, z) - K_w(zeta, z)| / K_p(z)` over the grid nodes.
    pub residual: f64,
    /// Nodes where `|m_p|` was floored before taking the logarithm.
    pub floored: usize,
    pub basis_size: usize,
}

/// Compares the off-diagonal p-kernel with the weighted `L^2` kernel for the
/// weight `(2-p) log |m_p(., z)|`; the two coincide on the span up to solver
/// tolerance for `1 <= p <= 2`.
pub fn thm2_residual(engine: &Engine, z: Complex64) -> Result<Thm2Report> {
    let p = engine.p;
    if !(1.0..=2.0).contains(&p) {
        return Err(PbergError::Parameter(format!(
            "the weighted-kernel identity is asserted for 1 <= p <= 2, got {p}"
        )));
    }
    let sol = engine.point_solution(z)?;
    let kp = 1.0 / sol.objective;
    let mut floored = 0;
    let phi: Vec<f64> = sol
        .node_values
        .iter()
        .map(|m| {
            let r = m.norm();
            let r = if r < 1e-12 {
                floored += 1;
                1e-12
            } else {
                r
            };
            (2.0 - p) * r.ln()
        })
        .collect();
    let wk = WeightedKernel::build(&engine.grid, &engine.basis, &phi)?;
    let kw = wk.eval_many(&engine.grid.nodes, z);
    let mut sup = 0.0_f64;
    for i in 0..engine.grid.len() {
        let kp_off = sol.node_values[i] * kp;
        sup = sup.max((kp_off - kw[i]).norm());
    }
    Ok(Thm2Report {
        p,
        z,
        kp,
        residual: sup / kp,
        floored,
        basis_size: engine.basis.len(),
    })
}

#[derive(Debug, Clone)]
pub struct NsReport {
    /// `d^2 log K_{2,p} / dz dzbar` at `z` by the circle-average estimator.
    pub coeff: f64,
    pub reliable: bool,
    /// `K_{2,p}(z)` itself.
    pub k2p: f64,
    /// `log K_p(z)` (from the radial interpolant of solver values).
    pub log_kp: f64,
}

/// Radial interpolant of `log K_p` built from solver values at probe radii;
/// the model domains are rotation invariant so `K_p` depends on `|z|` only.
pub struct RadialKernelProfile {
    log_r: Vec<f64>,
    log_k: Vec<f64>,
}

impl RadialKernelProfile {
    /// Solves `K_p` on `n_probe` log-spaced radii covering the grid.
    pub fn build(engine: &Engine, n_probe: usize) -> Result<RadialKernelProfile> {
        let radii = &engine.grid.radii;
        if radii.is_empty() {
            return Err(PbergError::Parameter("grid has no radial structure".into()));
        }
        let r_lo = radii.first().unwrap().max(1e-4);
        let r_hi = radii.last().unwrap().min(1.0 - 1e-9) * 0.9999;
        let probes: Vec<f64> = (0..n_probe)
            .map(|i| {
                let t = i as f64 / (n_probe - 1) as f64;
                (r_lo.ln() * (1.0 - t) + r_hi.ln() * t).exp()
            })
            .collect();
        let values = par_map(probes.clone(), |r| {
            engine.kernel_value(Complex64::new(r, 0.0))
        });
        let mut log_r = Vec::with_capacity(n_probe);
        let mut log_k = Vec::with_capacity(n_probe);
        for (r, v) in probes.into_iter().zip(values) {
            log_r.push(r.ln());
            log_k.push(v?.ln());
        }
        Ok(RadialKernelProfile { log_r, log_k })
    }

    /// Piecewise-linear interpolation in `(log r, log K)` with linear
    /// extrapolation from the end slopes.
    pub fn log_kp(&self, r: f64) -> f64 {
        let x = r.ln();
        let n = self.log_r.len();
        if x <= self.log_r[0] {
            let slope = (self.log_k[1] - self.log_k[0]) / (self.log_r[1] - self.log_r[0]);
            return self.log_k[0] + slope * (x - self.log_r[0]);
        }
        if x >= self.log_r[n - 1] {
            let slope =
                (self.log_k[n - 1] - self.log_k[n - 2]) / (self.log_r[n - 1] - self.log_r[n - 2]);
            return self.log_k[n - 1] + slope * (x - self.log_r[n - 1]);
        }
        let j = self.log_r.partition_point(|&lr| lr <= x).min(n - 1);
        let (x0, x1) = (self.log_r[j - 1], self.log_r[j]);
        let (y0, y1) = (self.log_k[j - 1], self.log_k[j]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Builds the Narasimhan–Simha weighted kernel `K_{Omega, log K_p}` for the
/// engine's domain and exponent.
pub fn ns_weighted_kernel(engine: &Engine, n_probe: usize) -> Result<(WeightedKernel, RadialKernelProfile)> {
    let profile = RadialKernelProfile::build(engine, n_probe)?;
    let phi: Vec<f64> = engine
        .grid
        .nodes
        .iter()
        .map(|w| profile.log_kp(w.norm()))
        .collect();
    let wk = WeightedKernel::build(&engine.grid, &engine.basis, &phi)?;
    Ok((wk, profile))
}

/// Narasimhan–Simha metric coefficient `dd-bar log K_{2,p}(z)` by the
/// circle-average estimator with Richardson extrapolation.
pub fn ns_metric_coeff(engine: &Engine, z: Complex64, n_probe: usize) -> Result<NsReport> {
    engine.domain.require_interior(z)?;
    let (wk, profile) = ns_weighted_kernel(engine, n_probe)?;
    ns_metric_coeff_with(engine.domain, &wk, &profile, z)
}

/// Variant reusing a prebuilt weighted kernel (one build serves many `z`).
pub fn ns_metric_coeff_with(
    domain: Domain,
    wk: &WeightedKernel,
    profile: &RadialKernelProfile,
    z: Complex64,
) -> Result<NsReport> {
    domain.require_interior(z)?;
    let dist = domain.boundary_distance(z);
    let log_center = wk.diag(z).ln();
    let mut est = Vec::with_capacity(BOX_RADII.len());
    for &rel in &BOX_RADII {
        let r = rel * dist;
        let mut acc = 0.0;
        for j in 0..BOX_ANGLES {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / BOX_ANGLES as f64;
            acc += wk.diag(z + Complex64::from_polar(r, theta)).ln();
        }
        est.push((acc / BOX_ANGLES as f64 - log_center) / (r * r));
    }
    let mut extr = Vec::new();
    for w in est.windows(2) {
        extr.push((4.0 * w[1] - w[0]) / 3.0);
    }
    let value = *extr.last().unwrap();
    let reliable = (extr[1] - extr[0]).abs() <= (est[1] - est[0]).abs().max(1e-10) * 1.5;
    Ok(NsReport {
        coeff: value,
        reliable,
        k2p: wk.diag(z),
        log_kp: profile.log_kp(z.norm()),
    })
}

/// Fits the small-radius Laurent structure `K_{2,p}(r) ~ a_{-1} r^{-2} + a_0`
/// and returns `(a_{-1}, a_0)`; `a_{-1} > 0` witnesses the `1/z` mode.
pub fn ns_series_leading(wk: &WeightedKernel, radii: &[f64]) -> (f64, f64) {
    // linear LS of y = K * r^2 against r^2: y = a_{-1} + a_0 r^2
    let x: Vec<f64> = radii.iter().map(|r| r * r).collect();
    let y: Vec<f64> = radii.iter().map(|&r| wk.diag(Complex64::new(r, 0.0)) * r * r).collect();
    let slope = ls_slope(&x, &y);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let intercept = my - slope * mx;
    (intercept, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_basis, orthonormalize};
    use crate::quad::build_grid;
    use crate::solver::SolveOptions;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn disc_setup() -> (QuadGrid, Basis) {
        let grid = build_grid(Domain::UnitDisc, 32, 64).unwrap();
        let basis = make_basis(Domain::UnitDisc, 2.0, 24).unwrap();
        let on = orthonormalize(&basis, &grid).unwrap();
        (grid, on)
    }

    #[test]
    fn unweighted_kernel_matches_disc_closed_form() {
        let (grid, basis) = disc_setup();
        let wk = WeightedKernel::build(&grid, &basis, &vec![0.0; grid.len()]).unwrap();
        for (zeta, z) in [
            (Complex64::new(0.3, 0.1), Complex64::new(0.2, -0.4)),
            (Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)),
            (Complex64::new(-0.4, 0.2), Complex64::new(0.1, 0.3)),
        ] {
            let got = wk.eval(zeta, z);
            let one = Complex64::new(1.0, 0.0);
            let expect = one / ((one - zeta * z.conj()).powi(2) * PI);
            assert!(
                (got - expect).norm() < 1e-8,
                "K({zeta}, {z}) = {got} vs {expect}"
            );
        }
    }

    #[test]
    fn weighted_kernel_matches_power_weight_closed_form() {
        // weight |w|^{p k_p} with p = 1 on the unit disc, graded grid for the
        // radial singularity
        let grid = crate::quad::build_grid_graded(Domain::UnitDisc, 32, 64, 1e-36).unwrap();
        let basis = orthonormalize(&make_basis(Domain::UnitDisc, 2.0, 24).unwrap(), &grid).unwrap();
        let phi: Vec<f64> = grid.nodes.iter().map(|w| w.norm().ln()).collect();
        let wk = WeightedKernel::build(&grid, &basis, &phi).unwrap();
        for (w, z) in [
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
            (Complex64::new(0.3, 0.2), Complex64::new(-0.2, 0.4)),
        ] {
            let got = wk.eval(w, z);
            let expect = crate::oracles::weighted_disc_closed(1.0, w, z).unwrap();
            assert!(
                (got - expect).norm() < 1e-8,
                "K({w}, {z}) = {got} vs {expect}"
            );
        }
    }

    #[test]
    fn reproducing_hermitian_and_diagonal_maximality() {
        let (grid, basis) = disc_setup();
        // a nontrivial smooth weight
        let phi: Vec<f64> = grid.nodes.iter().map(|z| 0.3 * z.norm_sqr()).collect();
        let wk = WeightedKernel::build(&grid, &basis, &phi).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let z = Complex64::new(0.35, -0.2);
        for _ in 0..5 {
            let coeffs = DVector::from_fn(basis.len(), |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            assert!(wk.reproducing_residual(&coeffs, z) < 1e-8);
        }
        let zeta = Complex64::new(-0.1, 0.4);
        let kzz = wk.eval(z, zeta);
        let kzz2 = wk.eval(zeta, z);
        assert!((kzz - kzz2.conj()).norm() < 1e-10);
        // Cauchy-Schwarz in the reproducing space
        let dz = wk.diag(z);
        let dzeta = wk.diag(zeta);
        assert!(dz * dzeta * (1.0 + 1e-8) >= kzz.norm_sqr());
    }

    #[test]
    fn thm2_residual_p2_machine_zero() {
        let engine =
            Engine::new(Domain::UnitDisc, 2.0, 24, 32, 64, SolveOptions::default()).unwrap();
        let rep = thm2_residual(&engine, Complex64::new(0.4, 0.0)).unwrap();
        assert!(rep.residual < 1e-9, "residual {}", rep.residual);
    }

    #[test]
    fn thm2_residual_p15_small_and_shrinking() {
        let mut residuals = Vec::new();
        for n in [12, 24] {
            let engine =
                Engine::new(Domain::UnitDisc, 1.5, n, 32, 64, SolveOptions::default()).unwrap();
            let rep = thm2_residual(&engine, Complex64::new(0.4, 0.0)).unwrap();
            residuals.push(rep.residual);
        }
        assert!(residuals[1] < 1e-2, "residual {}", residuals[1]);
        assert!(residuals[1] <= residuals[0] * 1.1 + 1e-9);
    }

    #[test]
    fn thm2_residual_annulus_p1() {
        let engine =
            Engine::new(Domain::Annulus(0.5), 1.0, 24, 32, 64, SolveOptions::default()).unwrap();
        let rep = thm2_residual(&engine, Complex64::new(0.7, 0.0)).unwrap();
        assert!(rep.residual < 2e-2, "residual {}", rep.residual);
    }

    #[test]
    fn ns_metric_disc_rotation_invariant() {
        let engine =
            Engine::new(Domain::UnitDisc, 2.0, 16, 32, 64, SolveOptions::default()).unwrap();
        let (wk, profile) = ns_weighted_kernel(&engine, 16).unwrap();
        let r = 0.3;
        let a = ns_metric_coeff_with(
            Domain::UnitDisc,
            &wk,
            &profile,
            Complex64::new(r, 0.0),
        )
        .unwrap();
        let b = ns_metric_coeff_with(
            Domain::UnitDisc,
            &wk,
            &profile,
            Complex64::from_polar(r, 1.1),
        )
        .unwrap();
        assert!(a.coeff > 0.0);
        assert_abs_diff_eq!(a.coeff, b.coeff, epsilon = 1e-6 * a.coeff.abs().max(1.0));
    }
}
