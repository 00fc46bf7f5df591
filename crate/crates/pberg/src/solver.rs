//! Constrained `L^p` minimization over a basis span.
//!
//! Solves `min sum_i w_i |f(node_i)|^p` over `f = sum_k c_k b_k` subject to
//! linear functional constraints (point values, directional derivatives) by
//! iteratively reweighted least squares: each iterate freezes the node
//! weights `w_i |f_i|^{p-2}` and solves the resulting equality-constrained
//! weighted least-squares problem through its KKT system in complex
//! arithmetic. For `p > 1` the underlying problem is convex with a strictly
//! convex norm, so the fixed point is the unique constrained minimizer of the
//! span; for `p = 1` (and the exploratory `p < 1` mode) the absolute value is
//! smoothed as `sqrt(|f|^2 + eps^2)` with a warm-started continuation in
//! `eps`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::Basis;
use crate::error::{PbergError, Result};
use crate::quad::QuadGrid;

/// A linear functional over the basis span, with its prescribed value.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `f(z) = rhs`
    Value { z: Complex64, rhs: Complex64 },
    /// `X f'(z) = rhs` (directional derivative along the complex direction `X`)
    Derivative {
        z: Complex64,
        direction: Complex64,
        rhs: Complex64,
    },
}

#[derive(Debug, Clone)]
pub struct LpProblem<'a> {
    pub p: f64,
    pub grid: &'a QuadGrid,
    pub basis: &'a Basis,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative objective-change convergence threshold.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative floor on `|f|` in the reweighting, guarding `p < 2`.
    pub eps_floor: f64,
    /// Multistart count for the nonconvex `p < 1` mode.
    pub multistarts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-11,
            max_iter: 300,
            eps_floor: 1e-8,
            multistarts: 6,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub coeffs: DVector<Complex64>,
    /// `sum_i w_i |f_i|^p = m^p` (raw, unsmoothed).
    pub objective: f64,
    /// `objective^{1/p}`.
    pub m: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the objective gradient projected on the constraint null
    /// space, relative to the full gradient norm.
    pub first_order_residual: f64,
    /// Nodes whose reweighting hit the `eps_floor` clamp in the last iterate.
    pub floored_nodes: usize,
    /// Set for `p < 1`: no optimality claim, best of the multistarts.
    pub nonconvex: bool,
    /// Objective after each accepted IRLS step (starting value included).
    pub objective_trace: Vec<f64>,
    /// Function values at the grid nodes for the final iterate.
    pub node_values: Vec<Complex64>,
}

/// Builds the dense constraint row for a functional.
fn constraint_row(basis: &Basis, c: &Constraint) -> (DVector<Complex64>, Complex64) {
    match c {
        Constraint::Value { z, rhs } => (basis.eval(*z), *rhs),
        Constraint::Derivative { z, direction, rhs } => (basis.eval_deriv(*z) * *direction, *rhs),
    }
}

struct Workspace {
    b: DMatrix<Complex64>,
    weights: Vec<f64>,
    rows: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
}

impl Workspace {
    fn new(problem: &LpProblem) -> Result<Self> {
        let b = problem.basis.eval_matrix(problem.grid);
        let m = problem.constraints.len();
        if m == 0 {
            return Err(PbergError::Parameter("no constraints given".into()));
        }
        let n = problem.basis.len();
        let mut rows = DMatrix::from_element(m, n, Complex64::new(0.0, 0.0));
        let mut rhs = DVector::from_element(m, Complex64::new(0.0, 0.0));
        for (i, c) in problem.constraints.iter().enumerate() {
            let (row, r) = constraint_row(problem.basis, c);
            rows.row_mut(i).tr_copy_from(&row);
            rhs[i] = r;
        }
        // rank check on the small row Gram
        let gram = &rows * rows.adjoint();
        let eigs = gram.symmetric_eigenvalues();
        let max = eigs.iter().cloned().fold(f64::MIN, f64::max);
        let min = eigs.iter().cloned().fold(f64::MAX, f64::min);
        if !(min > 1e-24 * max.max(1e-300)) {
            return Err(PbergError::RankDeficient);
        }
        Ok(Workspace {
            b,
            weights: problem.grid.weights.clone(),
            rows,
            rhs,
        })
    }

    fn node_values(&self, c: &DVector<Complex64>) -> Vec<Complex64> {
        let f = &self.b * c;
        f.iter().cloned().collect()
    }

    fn objective(&self, values: &[Complex64], p: f64) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .map(|(f, &w)| w * f.norm().powf(p))
            .sum()
    }

    fn smoothed_objective(&self, values: &[Complex64], p: f64, eps: f64) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .map(|(f, &w)| w * (f.norm_sqr() + eps * eps).powf(0.5 * p))
            .sum()
    }

    /// Solves the equality-constrained weighted least squares
    /// `min c^H (B^H diag(omega) B) c  s.t.  A c = d` via the KKT system.
    fn weighted_ls(&self, omega: &[f64]) -> Result<DVector<Complex64>> {
        let n = self.b.ncols();
        let m = self.rows.nrows();
        let mut wb = self.b.clone();
        for (i, &o) in omega.iter().enumerate() {
            let mut row = wb.row_mut(i);
            for v in row.iter_mut() {
                *v *= o;
            }
        }
        let mut mat = self.b.ad_mul(&wb); // B^H diag(omega) B
        let mut trace = 0.0;
        for j in 0..n {
            trace += mat[(j, j)].re;
        }
        let ridge = 1e-14 * (trace / n as f64).max(1e-300);
        for j in 0..n {
            mat[(j, j)] += Complex64::new(ridge, 0.0);
        }
        let dim = n + m;
        let mut kkt = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        kkt.view_mut((0, 0), (n, n)).copy_from(&mat);
        kkt.view_mut((0, n), (n, m)).copy_from(&self.rows.adjoint());
        kkt.view_mut((n, 0), (m, n)).copy_from(&self.rows);
        let mut rhs = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for i in 0..m {
            rhs[n + i] = self.rhs[i];
        }
        let lu = kkt.lu();
        let sol = lu.solve(&rhs).ok_or(PbergError::RankDeficient)?;
        Ok(sol.rows(0, n).into_owned())
    }

    /// Least-norm feasible point (also the `p = 2` minimizer when the basis
    /// is orthonormal).
    fn feasible_start(&self) -> Result<DVector<Complex64>> {
        self.weighted_ls(&self.weights)
    }

    /// Gradient of the objective with respect to conj(c), up to the factor p/2.
    fn gradient(&self, values: &[Complex64], p: f64) -> DVector<Complex64> {
        let scaled: DVector<Complex64> = DVector::from_iterator(
            values.len(),
            values.iter().zip(&self.weights).map(|(f, &w)| {
                let r = f.norm();
                if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    w * r.powf(p - 2.0) * f
                }
            }),
        );
        self.b.ad_mul(&scaled)
    }

    /// Relative norm of the gradient component in the constraint null space.
    fn stationarity(&self, values: &[Complex64], p: f64) -> f64 {
        let g = self.gradient(values, p);
        let gnorm = g.norm();
        if gnorm == 0.0 {
            return 0.0;
        }
        // project g onto range(A^H) and subtract
        let a = &self.rows;
        let gram = a * a.adjoint();
        let ag = a * &g;
        let lu = gram.lu();
        match lu.solve(&ag) {
            Some(y) => {
                let proj = a.adjoint() * y;
                ((g - proj).norm() / gnorm).min(1.0)
            }
            None => 1.0,
        }
    }
}

/// IRLS phases: `p = 2` is a single weighted solve; `p > 1` runs plain IRLS;
/// `p <= 1` runs the smoothing continuation.
fn smoothing_schedule(p: f64) -> Vec<f64> {
    if p <= 1.0 {
        vec![1e-2, 1e-4, 1e-6, 0.0]
    } else {
        vec![0.0]
    }
}

fn run_irls(
    ws: &Workspace,
    p: f64,
    opts: &SolveOptions,
    start: DVector<Complex64>,
) -> Result<(DVector<Complex64>, usize, bool, usize, Vec<f64>)> {
    let mut c = start;
    let mut values = ws.node_values(&c);
    let mut trace = vec![ws.objective(&values, p)];
    let mut iterations = 0;
    let mut converged = false;
    let mut floored = 0;
    for &eps in &smoothing_schedule(p) {
        let obj_fn = |vals: &[Complex64]| {
            if eps > 0.0 {
                ws.smoothed_objective(vals, p, eps)
            } else {
                ws.objective(vals, p)
            }
        };
        let mut obj = obj_fn(&values);
        let mut phase_converged = false;
        // On the unsmoothed phase the objective flattens out before the
        // first-order condition is tight, so a small objective change alone
        // is not accepted as convergence: the stationarity residual must
        // reach its target too (or visibly stall, e.g. at floored zeros).
        let check_stationarity = eps == 0.0 && p >= 1.05;
        let mut prev_stat = f64::INFINITY;
        let mut stat_stall = 0;
        while iterations < opts.max_iter {
            iterations += 1;
            let fmax = values.iter().map(|f| f.norm()).fold(0.0, f64::max);
            let floor = opts.eps_floor * fmax.max(1e-300);
            floored = 0;
            let omega: Vec<f64> = values
                .iter()
                .zip(&ws.weights)
                .map(|(f, &w)| {
                    if eps > 0.0 {
                        w * (f.norm_sqr() + eps * eps).powf(0.5 * (p - 2.0))
                    } else if p < 2.0 {
                        let r = f.norm();
                        let clamped = if r < floor {
                            floored += 1;
                            floor
                        } else {
                            r
                        };
                        w * clamped.powf(p - 2.0)
                    } else {
                        w * f.norm().powf(p - 2.0)
                    }
                })
                .collect();
            let target = ws.weighted_ls(&omega)?;
            // damped step: halve toward the previous iterate while the
            // objective would increase
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = &c * Complex64::new(1.0 - t, 0.0) + &target * Complex64::new(t, 0.0);
                let cand_values = ws.node_values(&cand);
                let cand_obj = obj_fn(&cand_values);
                if cand_obj <= obj * (1.0 + 1e-14) {
                    let rel = (obj - cand_obj).abs() / obj.max(1e-300);
                    c = cand;
                    values = cand_values;
                    obj = cand_obj;
                    trace.push(ws.objective(&values, p));
                    accepted = true;
                    if rel < opts.tol {
                        if check_stationarity {
                            let stat = ws.stationarity(&values, p);
                            if stat <= 1e-8 {
                                phase_converged = true;
                            } else if stat > 0.9 * prev_stat {
                                stat_stall += 1;
                                if stat_stall >= 3 {
                                    phase_converged = true;
                                }
                            } else {
                                stat_stall = 0;
                            }
                            prev_stat = stat;
                        } else {
                            phase_converged = true;
                        }
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // no descent direction left at this weighting: treat as
                // converged for this phase
                phase_converged = true;
            }
            if phase_converged {
                break;
            }
        }
        converged = phase_converged;
    }
    Ok((c, iterations, converged, floored, trace))
}

/// Solves the constrained minimization. For `p >= 1` the result is the
/// (unique for `p > 1`) constrained minimizer over the span; its objective is
/// an upper bound for the true `m_p^p` over the full space. For `p < 1` the
/// solve is a best-effort multistart and the solution is flagged
/// `nonconvex`.
pub fn solve(problem: &LpProblem, opts: &SolveOptions) -> Result<LpSolution> {
    solve_with_start(problem, opts, None)
}

/// Like [`solve`] but optionally warm-started from a previous solution's
/// coefficients (used heavily by circle-average estimators).
pub fn solve_with_start(
    problem: &LpProblem,
    opts: &SolveOptions,
    start: Option<&DVector<Complex64>>,
) -> Result<LpSolution> {
    let p = problem.p;
    if !(p > 0.0) || !p.is_finite() {
        return Err(PbergError::Parameter(format!("invalid exponent p = {p}")));
    }
    let ws = Workspace::new(problem)?;

    let finish = |ws: &Workspace,
                  c: DVector<Complex64>,
                  iterations: usize,
                  converged: bool,
                  floored: usize,
                  trace: Vec<f64>|
     -> LpSolution {
        let values = ws.node_values(&c);
        let objective = ws.objective(&values, p);
        let stationarity = ws.stationarity(&values, p);
        LpSolution {
            coeffs: c,
            objective,
            m: objective.powf(1.0 / p),
            iterations,
            converged,
            first_order_residual: stationarity,
            floored_nodes: floored,
            nonconvex: p < 1.0,
            objective_trace: trace,
            node_values: values,
        }
    };

    let init = match start {
        Some(c) => c.clone(),
        None => ws.feasible_start()?,
    };

    if (p - 2.0).abs() < 1e-15 {
        let sol = finish(&ws, init, 1, true, 0, Vec::new());
        return Ok(sol);
    }

    if p >= 1.0 {
        let (c, iterations, converged, floored, trace) = run_irls(&ws, p, opts, init)?;
        let sol = finish(&ws, c, iterations, converged, floored, trace);
        if !sol.converged {
            return Err(PbergError::Convergence {
                iterations: sol.iterations,
                last: Box::new(sol),
            });
        }
        return Ok(sol);
    }

    // nonconvex exploratory mode: multistart and keep the best
    let mut starts: Vec<DVector<Complex64>> = Vec::new();
    if let Some(c) = start {
        // a warm start replaces the p = 1 continuation run
        starts.push(c.clone());
    } else {
        let p1 = LpProblem {
            p: 1.0,
            ..problem.clone()
        };
        if let Ok(sol1) = solve(&p1, opts) {
            starts.push(sol1.coeffs);
        }
    }
    // the least-norm feasible point ("constants-like" start)
    starts.push(ws.feasible_start()?);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = problem.basis.len();
    while starts.len() < opts.multistarts.max(2) {
        let base = starts[starts.len() % 2].clone();
        let noise = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        // project the noise onto the constraint null space to stay feasible
        let a = &ws.rows;
        let gram = a * a.adjoint();
        let an = a * &noise;
        if let Some(y) = gram.clone().lu().solve(&an) {
            let feas_noise = &noise - a.adjoint() * y;
            starts.push(base + feas_noise * Complex64::new(0.3, 0.0));
        } else {
            break;
        }
    }
    let mut best: Option<LpSolution> = None;
    for s in starts {
        if let Ok((c, iterations, converged, floored, trace)) = run_irls(&ws, p, opts, s) {
            let sol = finish(&ws, c, iterations, converged, floored, trace);
            let better = match &best {
                Some(b) => sol.objective < b.objective,
                None => true,
            };
            if better {
                best = Some(sol);
            }
        }
    }
    best.ok_or(PbergError::RankDeficient)
}

/// Residual of the reproducing identity (the defining property of the
/// off-diagonal kernel) against a test function in the span:
///
/// `residual = f(z) - K_p(z) * sum_i w_i |m_i|^{p-2} conj(m_i) f_i`
///
/// where `m` is the minimizer for the constraint `f(z) = 1` and
/// `K_p(z) = 1/objective`. For `p < 2` the integrand is clamped at the
/// relative floor near zeros of `m`; the clamp count is returned.
pub fn reproducing_residual(
    solution: &LpSolution,
    grid: &QuadGrid,
    basis: &Basis,
    z: Complex64,
    testf: &DVector<Complex64>,
    p: f64,
) -> (Complex64, usize) {
    let fz = basis.func_value(testf, z);
    let kp = 1.0 / solution.objective;
    let b = basis.eval_matrix(grid);
    let fvals = &b * testf;
    let mmax = solution
        .node_values
        .iter()
        .map(|m| m.norm())
        .fold(0.0, f64::max);
    let floor = 1e-8 * mmax.max(1e-300);
    let mut clamped = 0;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..grid.len() {
        let m = solution.node_values[i];
        let r = m.norm();
        let reff = if p < 2.0 && r < floor {
            clamped += 1;
            floor
        } else {
            r
        };
        if reff == 0.0 {
            continue;
        }
        acc += grid.weights[i] * reff.powf(p - 2.0) * m.conj() * fvals[i];
    }
    (fz - kp * acc, clamped)
}

/// Convenience: point-evaluation problem `f(z) = 1` (the extremal problem
/// behind the kernel diagonal).
pub fn point_problem<'a>(
    p: f64,
    grid: &'a QuadGrid,
    basis: &'a Basis,
    z: Complex64,
) -> LpProblem<'a> {
    LpProblem {
        p,
        grid,
        basis,
        constraints: vec![Constraint::Value {
            z,
            rhs: Complex64::new(1.0, 0.0),
        }],
    }
}

/// Convenience: the metric problem `f(z) = 0`, `X f'(z) = 1`.
pub fn metric_problem<'a>(
    p: f64,
    grid: &'a QuadGrid,
    basis: &'a Basis,
    z: Complex64,
    direction: Complex64,
) -> LpProblem<'a> {
    LpProblem {
        p,
        grid,
        basis,
        constraints: vec![
            Constraint::Value {
                z,
                rhs: Complex64::new(0.0, 0.0),
            },
            Constraint::Derivative {
                z,
                direction,
                rhs: Complex64::new(1.0, 0.0),
            },
        ],
    }
}
