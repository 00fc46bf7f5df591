//! p-Bergman kernels, metrics, Levi forms and curvature checks.
//!
//! An [`Engine`] bundles a domain, an interior grid, and an orthonormalized
//! basis at a fixed exponent `p`; kernel quantities are read off constrained
//! solves. `p = 2` bypasses the iteration entirely: with an orthonormal
//! basis the diagonal kernel is the squared norm of the evaluation vector
//! and the two-constraint metric problem reduces to a 2x2 system.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::{make_basis, orthonormalize, Basis, DotNoConj};
use crate::domain::Domain;
use crate::error::{PbergError, Result};
use crate::quad::{build_grid, QuadGrid};
use crate::solver::{metric_problem, point_problem, solve_with_start, LpSolution, SolveOptions};
use crate::util::par_map;

/// Default relative radii (times the boundary distance) for circle-average
/// second-derivative estimators.
pub const BOX_RADII: [f64; 3] = [0.08, 0.04, 0.02];
/// Angles per circle in the averaging estimators.
pub const BOX_ANGLES: usize = 64;

#[derive(Debug, Clone)]
pub struct KernelReport {
    pub z: Complex64,
    pub p: f64,
    pub kp: f64,
    pub m: f64,
    pub basis_size: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct MetricReport {
    pub z: Complex64,
    pub direction: Complex64,
    pub p: f64,
    /// `m_p(z; X)`: minimal norm with `f(z) = 0`, `Xf(z) = 1`.
    pub m_px: f64,
    /// `M_p(z; X) = 1 / m_p(z; X)`.
    pub sup_deriv: f64,
    /// `B_p(z; X) = K_p(z)^{-1/p} M_p(z; X)`.
    pub b_p: f64,
    pub kp: f64,
}

#[derive(Debug, Clone)]
pub struct LeviReport {
    /// Richardson-extrapolated generalized Levi form of `log K_p` at `(z; X)`.
    pub value: f64,
    /// Raw `r^{-2}`-scaled circle averages, largest radius first.
    pub raw: Vec<f64>,
    /// False when the extrapolation tail is inconsistent.
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct DerivIdentityReport {
    /// Finite-difference gradient of `K_p` (x and y components).
    pub fd: [f64; 2],
    /// `p Re d/dzeta K_p(zeta, z)|_{zeta=z}` mapped to the two real
    /// coordinates.
    pub analytic: [f64; 2],
    pub residual: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct HscReport {
    /// Curvature of the pulled-back metric along the affine test disc
    /// `t -> z + tX` (a lower bound for the holomorphic sectional curvature).
    pub lhs: f64,
    /// Upper bound `(2/p) L / B_p^2 + p/2` from the Levi form of `log K_p`.
    pub rhs: f64,
    pub pass: bool,
    pub b_p: f64,
    pub levi: f64,
}

#[derive(Debug, Clone)]
pub struct RpReport {
    pub r_p: f64,
    /// `phi_p(r_p)`, the minimal kernel value found.
    pub value: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Domain + grid + orthonormal basis at a fixed exponent.
pub struct Engine {
    pub domain: Domain,
    pub p: f64,
    pub grid: QuadGrid,
    pub basis: Basis,
    pub opts: SolveOptions,
}

impl Engine {
    pub fn new(
        domain: Domain,
        p: f64,
        max_degree: i32,
        n_r: usize,
        n_theta: usize,
        opts: SolveOptions,
    ) -> Result<Engine> {
        let grid = build_grid(domain, n_r, n_theta)?;
        Engine::with_grid(domain, p, max_degree, grid, opts)
    }

    pub fn with_grid(
        domain: Domain,
        p: f64,
        max_degree: i32,
        grid: QuadGrid,
        opts: SolveOptions,
    ) -> Result<Engine> {
        let basis = orthonormalize(&make_basis(domain, p, max_degree)?, &grid)?;
        Ok(Engine {
            domain,
            p,
            grid,
            basis,
            opts,
        })
    }

    fn is_p2(&self) -> bool {
        (self.p - 2.0).abs() < 1e-15
    }

    /// Full extremal solution for the constraint `f(z) = 1`.
    pub fn point_solution(&self, z: Complex64) -> Result<LpSolution> {
        self.point_solution_warm(z, None)
    }

    pub fn point_solution_warm(
        &self,
        z: Complex64,
        start: Option<&DVector<Complex64>>,
    ) -> Result<LpSolution> {
        self.domain.require_interior(z)?;
        let prob = point_problem(self.p, &self.grid, &self.basis, z);
        solve_with_start(&prob, &self.opts, start)
    }

    /// `K_p(z)` alone. For `p = 2` this is the closed-form span kernel
    /// `sum_k |b_k(z)|^2` (the basis is orthonormal), exact and cheap.
    pub fn kernel_value(&self, z: Complex64) -> Result<f64> {
        self.domain.require_interior(z)?;
        if self.is_p2() {
            let v = self.basis.eval(z);
            return Ok(v.norm_squared());
        }
        Ok(1.0 / self.point_solution(z)?.objective)
    }

    fn kernel_value_warm(&self, z: Complex64, start: Option<&DVector<Complex64>>) -> Result<f64> {
        if self.is_p2() {
            return self.kernel_value(z);
        }
        Ok(1.0 / self.point_solution_warm(z, start)?.objective)
    }

    pub fn kernel_diag(&self, z: Complex64) -> Result<KernelReport> {
        self.domain.require_interior(z)?;
        if self.is_p2() {
            let kp = self.kernel_value(z)?;
            return Ok(KernelReport {
                z,
                p: self.p,
                kp,
                m: kp.powf(-0.5),
                basis_size: self.basis.len(),
                iterations: 1,
                converged: true,
            });
        }
        let sol = self.point_solution(z)?;
        Ok(KernelReport {
            z,
            p: self.p,
            kp: 1.0 / sol.objective,
            m: sol.m,
            basis_size: self.basis.len(),
            iterations: sol.iterations,
            converged: sol.converged,
        })
    }

    /// Off-diagonal kernel `K_p(zeta, z) = m_p(zeta, z) K_p(z)`, read from
    /// the minimizer normalized by `m_p(z, z) = 1`.
    pub fn kernel_offdiag(&self, zeta: Complex64, z: Complex64) -> Result<Complex64> {
        self.domain.require_interior(zeta)?;
        let sol = self.point_solution(z)?;
        let kp = 1.0 / sol.objective;
        Ok(self.basis.func_value(&sol.coeffs, zeta) * kp)
    }

    /// Metric data at `(z; X)` from the two-constraint problem.
    pub fn metric(&self, z: Complex64, direction: Complex64) -> Result<MetricReport> {
        self.domain.require_interior(z)?;
        if direction.norm() == 0.0 {
            return Err(PbergError::Parameter("direction X must be nonzero".into()));
        }
        let kp = self.kernel_value(z)?;
        let m_px = if self.is_p2() {
            self.metric_m2(z, direction)?.sqrt()
        } else {
            let prob = metric_problem(self.p, &self.grid, &self.basis, z, direction);
            solve_with_start(&prob, &self.opts, None)?.m
        };
        let sup_deriv = 1.0 / m_px;
        Ok(MetricReport {
            z,
            direction,
            p: self.p,
            m_px,
            sup_deriv,
            b_p: kp.powf(-1.0 / self.p) * sup_deriv,
            kp,
        })
    }

    /// `m_2(z; X)^2` by exact linear algebra: `min ||c||^2` subject to the
    /// two constraint rows (orthonormal basis makes the Gram the identity).
    fn metric_m2(&self, z: Complex64, direction: Complex64) -> Result<f64> {
        let a1 = self.basis.eval(z);
        let a2 = self.basis.eval_deriv(z) * direction;
        let g11 = a1.norm_squared();
        let g22 = a2.norm_squared();
        let g12: Complex64 = a1.iter().zip(a2.iter()).map(|(x, y)| x.conj() * y).sum();
        let det = g11 * g22 - g12.norm_sqr();
        if det <= 0.0 {
            return Err(PbergError::RankDeficient);
        }
        Ok(g11 / det)
    }

    /// Generalized Levi form of `log K_p` at `(z; X)` via scaled circle
    /// averages, Richardson-extrapolated over a geometric radius list.
    pub fn levi_log_kernel(
        &self,
        z: Complex64,
        direction: Complex64,
        rel_radii: &[f64],
    ) -> Result<LeviReport> {
        self.domain.require_interior(z)?;
        let xnorm = direction.norm();
        if xnorm == 0.0 {
            return Err(PbergError::Parameter("direction X must be nonzero".into()));
        }
        let dist = self.domain.boundary_distance(z) / xnorm;
        let log_center = self.kernel_value(z)?.ln();
        let mut raw = Vec::with_capacity(rel_radii.len());
        for &rel in rel_radii {
            let r = rel * dist;
            if r <= 0.0 {
                return Err(PbergError::Parameter(format!("invalid circle radius {r}")));
            }
            let avg = self.circle_average_log_kernel(z, direction, r)?;
            raw.push((avg - log_center) / (r * r));
        }
        let (value, reliable) = richardson_tail(&raw);
        Ok(LeviReport {
            value,
            raw,
            reliable,
        })
    }

    /// Mean of `log K_p(z + r e^{i theta} X)` over [`BOX_ANGLES`] angles.
    /// For iterative exponents the circle is split into arcs processed in
    /// parallel; within an arc each solve warm-starts from its neighbour.
    fn circle_average_log_kernel(
        &self,
        z: Complex64,
        direction: Complex64,
        r: f64,
    ) -> Result<f64> {
        if self.is_p2() {
            let mut acc = 0.0;
            for j in 0..BOX_ANGLES {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / BOX_ANGLES as f64;
                let w = z + Complex64::from_polar(r, theta) * direction;
                acc += self.kernel_value(w)?.ln();
            }
            return Ok(acc / BOX_ANGLES as f64);
        }
        const CHUNKS: usize = 8;
        let per = BOX_ANGLES / CHUNKS;
        let chunk_ids: Vec<usize> = (0..CHUNKS).collect();
        let sums = par_map(chunk_ids, |ci| -> Result<f64> {
            let mut warm: Option<DVector<Complex64>> = None;
            let mut acc = 0.0;
            for j in (ci * per)..((ci + 1) * per) {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / BOX_ANGLES as f64;
                let w = z + Complex64::from_polar(r, theta) * direction;
                let sol = self.point_solution_warm(w, warm.as_ref())?;
                acc += (1.0 / sol.objective).ln();
                warm = Some(sol.coeffs);
            }
            Ok(acc)
        });
        let mut acc = 0.0;
        for s in sums {
            acc += s?;
        }
        Ok(acc / BOX_ANGLES as f64)
    }

    /// Residual of the interior derivative identity: the finite-difference
    /// gradient of `K_p` against `p Re` of the holomorphic derivative of the
    /// off-diagonal kernel in its first argument.
    pub fn derivative_identity(&self, z: Complex64, h: f64) -> Result<DerivIdentityReport> {
        self.domain.require_interior(z)?;
        if !(h > 0.0) {
            return Err(PbergError::Parameter(format!("invalid step {h}")));
        }
        // analytic side from the minimizer expansion
        let sol = self.point_solution(z)?;
        let kp = 1.0 / sol.objective;
        let dkdz = self.basis.eval_deriv(z).dot_no_conj(&sol.coeffs) * kp;
        let analytic = [self.p * dkdz.re, -self.p * dkdz.im];

        // central differences with a three-level Richardson consistency check
        let mut fd = [0.0; 2];
        let mut warm: Option<DVector<Complex64>> = Some(sol.coeffs.clone());
        for (axis, dir) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]
            .into_iter()
            .enumerate()
        {
            let steps = [2.0 * h, h, 0.5 * h];
            let mut centrals = Vec::with_capacity(3);
            for &s in &steps {
                let kplus = self.kernel_value_warm(z + dir * s, warm.as_ref())?;
                let kminus = self.kernel_value_warm(z - dir * s, warm.as_ref())?;
                warm = Some(sol.coeffs.clone());
                centrals.push((kplus - kminus) / (2.0 * s));
            }
            let r1 = (4.0 * centrals[1] - centrals[0]) / 3.0;
            let r2 = (4.0 * centrals[2] - centrals[1]) / 3.0;
            let scale = r2.abs().max(1.0);
            if (r2 - r1).abs() > 1e-2 * scale {
                return Err(PbergError::StepSize(format!(
                    "axis {axis}: Richardson levels {r1:.6e} vs {r2:.6e}"
                )));
            }
            fd[axis] = r2;
        }
        Ok(DerivIdentityReport {
            fd,
            analytic,
            residual: [fd[0] - analytic[0], fd[1] - analytic[1]],
        })
    }

    /// Curvature inequality on the affine test disc `t -> z + tX`: the
    /// Gaussian curvature of the pulled-back metric must not exceed
    /// `(2/p) * i ddbar log K_p / B_p^2 + p/2`. Meaningful for `p >= 2`.
    pub fn hsc_testdisc(&self, z: Complex64, direction: Complex64) -> Result<HscReport> {
        if self.p < 2.0 {
            return Err(PbergError::Parameter(
                "the curvature inequality is asserted for p >= 2 only".into(),
            ));
        }
        let metric0 = self.metric(z, direction)?;
        let levi = self.levi_log_kernel(z, direction, &BOX_RADII)?;

        // Box log B_p^2 along the test disc via the same circle estimator;
        // arcs run in parallel with warm-started solves along each arc.
        let dist = self.domain.boundary_distance(z) / direction.norm();
        let log_b2_center = 2.0 * metric0.b_p.ln();
        let mut est = Vec::with_capacity(BOX_RADII.len());
        for &rel in &BOX_RADII {
            let r = rel * dist;
            const CHUNKS: usize = 8;
            let per = BOX_ANGLES / CHUNKS;
            let chunk_ids: Vec<usize> = (0..CHUNKS).collect();
            let sums = par_map(chunk_ids, |ci| -> Result<f64> {
                let mut warm_point: Option<DVector<Complex64>> = None;
                let mut warm_metric: Option<DVector<Complex64>> = None;
                let mut acc = 0.0;
                for j in (ci * per)..((ci + 1) * per) {
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / BOX_ANGLES as f64;
                    let w = z + Complex64::from_polar(r, theta) * direction;
                    let kp = if self.is_p2() {
                        self.kernel_value(w)?
                    } else {
                        let sol = self.point_solution_warm(w, warm_point.as_ref())?;
                        warm_point = Some(sol.coeffs.clone());
                        1.0 / sol.objective
                    };
                    let m_px = if self.is_p2() {
                        self.metric_m2(w, direction)?.sqrt()
                    } else {
                        let prob =
                            metric_problem(self.p, &self.grid, &self.basis, w, direction);
                        let sol = solve_with_start(&prob, &self.opts, warm_metric.as_ref())?;
                        warm_metric = Some(sol.coeffs.clone());
                        sol.m
                    };
                    let b_p = kp.powf(-1.0 / self.p) / m_px;
                    acc += 2.0 * b_p.ln();
                }
                Ok(acc)
            });
            let mut acc = 0.0;
            for s in sums {
                acc += s?;
            }
            let avg = acc / BOX_ANGLES as f64;
            est.push((avg - log_b2_center) / (r * r));
        }
        let (box_log_b2, _) = richardson_tail(&est);
        // Gaussian curvature of lambda |dt|^2 is -(2 / lambda) Box log lambda.
        let lhs = -2.0 * box_log_b2 / (metric0.b_p * metric0.b_p);
        let rhs = (2.0 / self.p) * levi.value / (metric0.b_p * metric0.b_p) + self.p / 2.0;
        Ok(HscReport {
            lhs,
            rhs,
            pass: lhs <= rhs + 1e-9,
            b_p: metric0.b_p,
            levi: levi.value,
        })
    }

    /// Residual of the Mobius transformation rule on the unit disc:
    /// `K_p(z) = K_p(F_a(z)) |F_a'(z)|^2` with `F_a(z) = (z - a)/(1 - conj(a) z)`.
    pub fn transform_invariance_residual(&self, z: Complex64, a: Complex64) -> Result<f64> {
        match self.domain {
            Domain::UnitDisc => {}
            _ => {
                return Err(PbergError::UnsupportedDomain(
                    "the Mobius invariance check runs on the unit disc".into(),
                ))
            }
        }
        if a.norm() >= 1.0 {
            return Err(PbergError::Parameter("automorphism parameter needs |a| < 1".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        let fa = (z - a) / (one - a.conj() * z);
        let dfa = (one - Complex64::new(a.norm_sqr(), 0.0)) / (one - a.conj() * z).powi(2);
        let lhs = self.kernel_value(z)?;
        let rhs = self.kernel_value(fa)? * dfa.norm_sqr();
        Ok((lhs - rhs).abs())
    }

    /// Golden-section search for the radius minimizing `K_p` on the
    /// punctured disc (exploratory: the true value is an open problem).
    pub fn rp_explore(&self) -> Result<RpReport> {
        if self.domain != Domain::PuncturedDisc {
            return Err(PbergError::UnsupportedDomain(
                "r_p exploration runs on the punctured disc".into(),
            ));
        }
        let phi = |r: f64| -> Result<f64> { self.kernel_value(Complex64::new(r, 0.0)) };
        let (mut a, mut b) = (0.05_f64, 0.95_f64);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = phi(c)?;
        let mut fd = phi(d)?;
        while (b - a) > 1e-4 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = phi(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = phi(d)?;
            }
        }
        let r_p = 0.5 * (a + b);
        let value = phi(r_p)?;
        let sample_r: Vec<f64> = (0..12).map(|i| 0.08 + 0.8 * i as f64 / 11.0).collect();
        let mut samples = Vec::new();
        for &r in &sample_r {
            samples.push((r, phi(r)?));
        }
        Ok(RpReport { r_p, value, samples })
    }
}

/// Richardson extrapolation of `E(r) ~ L + c r^2` over a geometric radius
/// list (largest first); returns the extrapolated value and whether the
/// difference tail behaved consistently.
fn richardson_tail(est: &[f64]) -> (f64, bool) {
    if est.len() < 2 {
        return (est.first().copied().unwrap_or(0.0), false);
    }
    let mut extr = Vec::new();
    for w in est.windows(2) {
        extr.push((4.0 * w[1] - w[0]) / 3.0);
    }
    let value = *extr.last().unwrap();
    let reliable = if extr.len() >= 2 {
        let d_last = (extr[extr.len() - 1] - extr[extr.len() - 2]).abs();
        let d_first = (est[1] - est[0]).abs();
        d_last <= d_first.max(1e-12) * 1.5
    } else {
        true
    };
    (value, reliable)
}

/// `K` at `(N, 2N)` for a crude truncation-convergence estimate; used by the
/// CLI report rows.
pub fn kernel_diag_with_refinement(
    domain: Domain,
    p: f64,
    z: Complex64,
    max_degree: i32,
    n_r: usize,
    n_theta: usize,
    opts: &SolveOptions,
) -> Result<(KernelReport, f64)> {
    let engine = Engine::new(domain, p, max_degree, n_r, n_theta, opts.clone())?;
    let report = engine.kernel_diag(z)?;
    let engine2 = Engine::new(domain, p, 2 * max_degree, n_r, n_theta, opts.clone())?;
    let refined = engine2.kernel_value(z)?;
    Ok((report, refined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn disc_engine(p: f64) -> Engine {
        Engine::new(Domain::UnitDisc, p, 24, 32, 64, SolveOptions::default()).unwrap()
    }

    #[test]
    fn disc_diag_matches_closed_form_across_p() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let engine = disc_engine(p);
            for z in [
                Complex64::new(0.0, 0.0),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.0, 0.6),
            ] {
                let kp = engine.kernel_value(z).unwrap();
                let oracle = oracles::disc_diag_closed(z);
                let rel = (kp - oracle).abs() / oracle;
                assert!(rel < 5e-3, "p = {p}, z = {z}: rel err {rel}");
            }
        }
    }

    #[test]
    fn disc_diag_p3_at_half() {
        let engine = disc_engine(3.0);
        let kp = engine.kernel_value(Complex64::new(0.5, 0.0)).unwrap();
        assert!((kp - 0.56588).abs() < 5e-3);
    }

    #[test]
    fn punctured_diag_leading_order() {
        let engine =
            Engine::new(Domain::PuncturedDisc, 1.0, 24, 32, 64, SolveOptions::default()).unwrap();
        let kp = engine.kernel_value(Complex64::new(0.05, 0.0)).unwrap();
        // leading order 1/(2 pi |z|) = 3.1831; the full value carries a
        // positive second-order term
        assert!((kp - 3.1831).abs() / 3.1831 < 2e-2, "kp = {kp}");
        assert!(kp > 3.1831);
    }

    #[test]
    fn offdiag_p4_center_is_constant() {
        let engine = disc_engine(4.0);
        let v = engine
            .kernel_offdiag(Complex64::new(0.5, 0.2), Complex64::new(0.0, 0.0))
            .unwrap();
        assert!((v - Complex64::new(1.0 / PI, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn offdiag_p2_matches_closed_form_and_hermitian() {
        let engine = disc_engine(2.0);
        let zeta = Complex64::new(0.6, 0.0);
        let z = Complex64::new(0.3, 0.0);
        let v = engine.kernel_offdiag(zeta, z).unwrap();
        let oracle = oracles::disc_kernel_closed(2.0, zeta, z).unwrap();
        assert!((v - oracle).norm() / oracle.norm() < 1e-6);
        assert_abs_diff_eq!(v.re, 0.47339364, epsilon = 1e-4);
        let w = engine.kernel_offdiag(z, zeta).unwrap();
        assert!((v - w.conj()).norm() < 1e-8);
    }

    #[test]
    fn derivative_identity_disc_p2() {
        let engine = disc_engine(2.0);
        let rep = engine
            .derivative_identity(Complex64::new(0.4, 0.0), 1e-4)
            .unwrap();
        // closed form: dK/dx = 4x / (pi (1 - x^2)^3) at x = 0.4
        let exact = 4.0 * 0.4 / (PI * (1.0 - 0.16f64).powi(3));
        assert!((rep.fd[0] - exact).abs() / exact < 1e-3);
        assert!((rep.analytic[0] - exact).abs() / exact < 1e-3);
        assert!(rep.residual[0].abs() / exact < 1e-3);
        assert!(rep.residual[1].abs() < 1e-3);
    }

    #[test]
    fn derivative_identity_center_symmetry() {
        let engine = disc_engine(3.0);
        let rep = engine
            .derivative_identity(Complex64::new(0.0, 0.0), 1e-4)
            .unwrap();
        for v in rep.fd.iter().chain(rep.analytic.iter()) {
            assert!(v.abs() < 1e-5, "expected vanishing gradient, got {v}");
        }
    }

    #[test]
    fn metric_b2_at_center() {
        let engine = disc_engine(2.0);
        let m = engine
            .metric(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(m.b_p, 2f64.sqrt(), epsilon = 1e-6);
        // homogeneity in |X|
        let m2 = engine
            .metric(Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(m2.b_p, 2.0 * 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn metric_p4_survives_random_feasible_perturbations() {
        let engine = disc_engine(4.0);
        let z = Complex64::new(0.0, 0.0);
        let x = Complex64::new(1.0, 0.0);
        let prob = metric_problem(4.0, &engine.grid, &engine.basis, z, x);
        let sol = crate::solver::solve(&prob, &engine.opts).unwrap();
        // perturbation oracle: no feasible perturbation may lower the objective
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = engine.basis.len();
        let a1 = engine.basis.eval(z);
        let a2 = engine.basis.eval_deriv(z) * x;
        let b = engine.basis.eval_matrix(&engine.grid);
        let objective = |c: &DVector<Complex64>| -> f64 {
            (&b * c)
                .iter()
                .zip(&engine.grid.weights)
                .map(|(f, &w)| w * f.norm().powi(4))
                .sum()
        };
        let base = objective(&sol.coeffs);
        for _ in 0..2000 {
            let noise = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            // project onto the intersection of the two constraint kernels
            let g11 = a1.norm_squared();
            let g22 = a2.norm_squared();
            let g12: Complex64 = a1.iter().zip(a2.iter()).map(|(x, y)| x.conj() * y).sum();
            let det = g11 * g22 - g12.norm_sqr();
            let r1: Complex64 = a1.iter().zip(noise.iter()).map(|(x, y)| x.conj() * y).sum();
            let r2: Complex64 = a2.iter().zip(noise.iter()).map(|(x, y)| x.conj() * y).sum();
            let alpha = (g22 * r1 - g12 * r2) / det;
            let beta = (g11 * r2 - g12.conj() * r1) / det;
            let feas = &noise - &a1 * alpha - &a2 * beta;
            let cand = &sol.coeffs + feas * Complex64::new(0.05, 0.0);
            assert!(objective(&cand) >= base * (1.0 - 1e-9));
        }
    }

    #[test]
    fn levi_disc_p2_center() {
        let engine = disc_engine(2.0);
        let rep = engine
            .levi_log_kernel(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &BOX_RADII)
            .unwrap();
        assert!((rep.value - 2.0).abs() < 1e-3, "levi {}", rep.value);
        assert!(rep.reliable);
    }

    #[test]
    fn levi_disc_p3_offcenter() {
        let engine = disc_engine(3.0);
        let rep = engine
            .levi_log_kernel(Complex64::new(0.2, 0.0), Complex64::new(1.0, 0.0), &BOX_RADII)
            .unwrap();
        let exact = 2.0 / (1.0 - 0.04f64).powi(2);
        assert!(
            (rep.value - exact).abs() < 5e-3,
            "levi {} vs {exact}",
            rep.value
        );
    }

    #[test]
    fn hsc_disc_p2_center() {
        let engine = disc_engine(2.0);
        let rep = engine
            .hsc_testdisc(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
            .unwrap();
        assert!((rep.lhs + 2.0).abs() < 2e-2, "lhs {}", rep.lhs);
        assert!((rep.rhs - 2.0).abs() < 2e-2, "rhs {}", rep.rhs);
        assert!(rep.pass);
    }

    #[test]
    fn mobius_invariance() {
        let engine = disc_engine(2.0);
        let res = engine
            .transform_invariance_residual(Complex64::new(0.2, 0.0), Complex64::new(0.3, 0.0))
            .unwrap();
        assert!(res < 1e-6, "residual {res}");
        // identity map is exact
        let res0 = engine
            .transform_invariance_residual(Complex64::new(0.2, 0.1), Complex64::new(0.0, 0.0))
            .unwrap();
        assert!(res0 < 1e-12);
        let engine3 = disc_engine(3.0);
        let res3 = engine3
            .transform_invariance_residual(Complex64::new(0.0, 0.1), Complex64::new(0.5, 0.0))
            .unwrap();
        assert!(res3 < 1e-4, "residual {res3}");
    }

    #[test]
    fn trivial_lower_bound_and_domain_monotonicity() {
        // K_p >= 1/|Omega| everywhere; smaller domain has larger kernel
        let big = disc_engine(3.0);
        let small = Engine::new(Domain::Disc(0.9), 3.0, 24, 32, 64, SolveOptions::default())
            .unwrap();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.2)] {
            let kb = big.kernel_value(z).unwrap();
            let ks = small.kernel_value(z).unwrap();
            assert!(kb >= 1.0 / PI - 1e-9);
            assert!(ks >= kb * (1.0 - 1e-9), "K_small {ks} < K_big {kb}");
        }
    }

    #[test]
    fn geometry_errors() {
        let engine = disc_engine(2.0);
        assert!(engine.kernel_value(Complex64::new(1.0, 0.0)).is_err());
        assert!(engine.kernel_value(Complex64::new(1.2, 0.0)).is_err());
    }
}
