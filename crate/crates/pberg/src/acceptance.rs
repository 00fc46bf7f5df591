//! The verification suite: one entry per acceptance criterion, each with its
//! tolerance pinned in code. `run_all` replays every criterion and reports a
//! pass/fail outcome per entry; the `pberg verify` subcommand and the
//! `acceptance` integration test are thin wrappers around it.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::make_basis;
use crate::domain::{Domain, Region};
use crate::error::Result;
use crate::hardy;
use crate::kernels::{Engine, BOX_RADII};
use crate::oracles;
use crate::quad::{build_grid, build_grid_graded, DEEP_U_MIN};
use crate::schwarz::{nonchebyshev_demo, SchwarzLab, SchwarzOptions};
use crate::solver::{reproducing_residual, SolveOptions};
use crate::util::par_map;
use crate::weighted::{self, thm2_residual};

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
}

/// Default basis degree and grid sizes of the suite.
pub const DEGREE: i32 = 24;
pub const N_R: usize = 32;
pub const N_THETA: usize = 64;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn disc_engine(p: f64) -> Result<Engine> {
    Engine::new(Domain::UnitDisc, p, DEGREE, N_R, N_THETA, opts())
}

fn annulus_engine(p: f64) -> Result<Engine> {
    Engine::new(Domain::Annulus(0.5), p, DEGREE, N_R, N_THETA, opts())
}

fn punctured_engine(p: f64) -> Result<Engine> {
    Engine::new(Domain::PuncturedDisc, p, DEGREE, N_R, N_THETA, opts())
}

struct Check {
    pass: bool,
    details: String,
}

fn run_criterion(
    id: usize,
    name: &'static str,
    f: impl FnOnce() -> Result<Check>,
) -> CriterionOutcome {
    match f() {
        Ok(check) => CriterionOutcome {
            id,
            name,
            pass: check.pass,
            details: check.details,
        },
        Err(e) => CriterionOutcome {
            id,
            name,
            pass: false,
            details: format!("error: {e}"),
        },
    }
}

/// Runs the whole suite, invoking `on_done` after each criterion.
pub fn run_all_with(quick: bool, mut on_done: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let _ = quick; // the full suite already fits the quick-run budget
    let fns: Vec<(usize, &'static str, Box<dyn FnOnce() -> Result<Check>>)> = vec![
        (1, "disc diagonal oracle", Box::new(c01_disc_diag)),
        (2, "disc off-diagonal oracle", Box::new(c02_disc_offdiag)),
        (3, "reproducing property", Box::new(c03_reproducing)),
        (4, "derivative identity", Box::new(c04_derivative_identity)),
        (5, "weighted-kernel identity (1<=p<=2)", Box::new(c05_thm2)),
        (6, "Schwarz content of concentric discs", Box::new(c06_schwarz)),
        (7, "puncture asymptotics and bound corridor", Box::new(c07_puncture_asym)),
        (8, "weighted disc kernel closed form", Box::new(c08_weighted_disc)),
        (9, "t-monotonicity of normalized kernels", Box::new(c09_t_monotone)),
        (10, "metric, Levi form and curvature bound", Box::new(c10_metric_curvature)),
        (11, "Narasimhan-Simha coefficient at the puncture", Box::new(c11_ns_puncture)),
        (12, "Carleman and Hardy checks", Box::new(c12_carleman_hardy)),
        (13, "non-Chebyshev construction", Box::new(c13_nonchebyshev)),
        (14, "mean-value rigidity", Box::new(c14_mean_value)),
        (15, "Schwarz dimension sweep", Box::new(c15_dim_sweep)),
    ];
    let mut out = Vec::with_capacity(fns.len());
    for (id, name, f) in fns {
        let outcome = run_criterion(id, name, f);
        on_done(&outcome);
        out.push(outcome);
    }
    out
}

pub fn run_all(quick: bool) -> Vec<CriterionOutcome> {
    run_all_with(quick, |_| {})
}

/// 1. Solver `K_p(z)` against `1/(pi (1-|z|^2)^2)`, rel err <= 5e-3,
/// p in {1, 1.5, 2, 3, 4}, z in {0, 0.3, 0.6i}.
fn c01_disc_diag() -> Result<Check> {
    let points = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.0),
        Complex64::new(0.0, 0.6),
    ];
    let ps = [1.0, 1.5, 2.0, 3.0, 4.0];
    let cases: Vec<f64> = ps.to_vec();
    let results = par_map(cases, |p| -> Result<f64> {
        let engine = disc_engine(p)?;
        let mut worst = 0.0_f64;
        for &z in &points {
            let kp = engine.kernel_value(z)?;
            let oracle = oracles::disc_diag_closed(z);
            worst = worst.max((kp - oracle).abs() / oracle);
        }
        Ok(worst)
    });
    let mut worst = 0.0_f64;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(Check {
        pass: worst <= 5e-3,
        details: format!("max rel err {worst:.3e} (tol 5e-3)"),
    })
}

/// 2. Off-diagonal kernel against the closed form, rel err <= 1e-2,
/// p in {1, 2, 4}, (zeta, z) in {(0.6, 0.3), (0.5i, 0.2)}.
fn c02_disc_offdiag() -> Result<Check> {
    let pairs = [
        (Complex64::new(0.6, 0.0), Complex64::new(0.3, 0.0)),
        (Complex64::new(0.0, 0.5), Complex64::new(0.2, 0.0)),
    ];
    let mut worst = 0.0_f64;
    for p in [1.0, 2.0, 4.0] {
        let engine = disc_engine(p)?;
        for &(zeta, z) in &pairs {
            let got = engine.kernel_offdiag(zeta, z)?;
            let oracle = oracles::disc_kernel_closed(p, zeta, z)?;
            worst = worst.max((got - oracle).norm() / oracle.norm());
        }
    }
    Ok(Check {
        pass: worst <= 1e-2,
        details: format!("max rel err {worst:.3e} (tol 1e-2)"),
    })
}

/// 3. Reproducing identity residual: <= 1e-8 at p = 2, <= 1e-3 at
/// p in {1.5, 3}, over 5 span elements and z in {0, 0.4}.
fn c03_reproducing() -> Result<Check> {
    let raw = make_basis(Domain::UnitDisc, 2.0, DEGREE)?;
    let mut details = String::new();
    let mut pass = true;
    for (p, tol) in [(2.0, 1e-8), (1.5, 1e-3), (3.0, 1e-3)] {
        let engine = disc_engine(p)?;
        let mut worst = 0.0_f64;
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.0)] {
            let sol = engine.point_solution(z)?;
            for k in 0..5 {
                let mut coeffs = DVector::from_element(raw.len(), Complex64::new(0.0, 0.0));
                coeffs[k] = Complex64::new(1.0, 0.0);
                let (res, _) =
                    reproducing_residual(&sol, &engine.grid, &raw, z, &coeffs, p);
                worst = worst.max(res.norm());
            }
        }
        pass &= worst <= tol;
        details.push_str(&format!("p={p}: {worst:.2e} (tol {tol:.0e}); "));
    }
    Ok(Check { pass, details })
}

/// 4. Interior derivative identity: finite differences against
/// `p Re d_zeta K_p(., z)|_z`, rel err <= 1e-3, on disc and annulus,
/// p in {1.5, 2, 3}.
fn c04_derivative_identity() -> Result<Check> {
    let cases: Vec<(Domain, Complex64)> = vec![
        (Domain::UnitDisc, Complex64::new(0.4, 0.0)),
        (Domain::UnitDisc, Complex64::new(0.2, 0.3)),
        (Domain::Annulus(0.5), Complex64::new(0.7, 0.0)),
        (Domain::Annulus(0.5), Complex64::new(-0.1, 0.68)),
    ];
    let ps = [1.5, 2.0, 3.0];
    let mut worst = 0.0_f64;
    for p in ps {
        let jobs: Vec<(Domain, Complex64)> = cases.clone();
        let results = par_map(jobs, |(domain, z)| -> Result<f64> {
            let engine = Engine::new(domain, p, DEGREE, N_R, N_THETA, opts())?;
            let rep = engine.derivative_identity(z, 1e-4)?;
            let scale = (rep.analytic[0].hypot(rep.analytic[1])).max(1.0);
            Ok(rep.residual[0].hypot(rep.residual[1]) / scale)
        });
        for r in results {
            worst = worst.max(r?);
        }
    }
    Ok(Check {
        pass: worst <= 1e-3,
        details: format!("max rel err {worst:.3e} (tol 1e-3)"),
    })
}

/// 5. Off-diagonal kernel vs weighted L2 kernel: sup residual <= 1e-2 K_p(z)
/// for p in {1, 1.2, 1.5, 2} on disc (z in {0.4, 0.7}) and annulus (z = 0.7),
/// and the residual must not grow from N = 12 to N = 24 (10% noise slack,
/// mirroring the module invariant's quadrature-noise allowance).
fn c05_thm2() -> Result<Check> {
    let mut pass = true;
    let mut worst = 0.0_f64;
    let mut growth_note = String::new();
    let cases: Vec<(Domain, Complex64, f64)> = {
        let mut v = Vec::new();
        for p in [1.0, 1.2, 1.5, 2.0] {
            v.push((Domain::UnitDisc, Complex64::new(0.4, 0.0), p));
            v.push((Domain::UnitDisc, Complex64::new(0.7, 0.0), p));
            v.push((Domain::Annulus(0.5), Complex64::new(0.7, 0.0), p));
        }
        v
    };
    let results = par_map(cases, |(domain, z, p)| -> Result<(f64, f64, f64)> {
        let e24 = Engine::new(domain, p, 24, N_R, N_THETA, opts())?;
        let r24 = thm2_residual(&e24, z)?.residual;
        let e12 = Engine::new(domain, p, 12, N_R, N_THETA, opts())?;
        let r12 = thm2_residual(&e12, z)?.residual;
        Ok((p, r24, r12))
    });
    for r in results {
        let (p, r24, r12) = r?;
        worst = worst.max(r24);
        if r24 > r12 * 1.1 + 1e-9 {
            pass = false;
            growth_note.push_str(&format!("p={p}: N24 {r24:.2e} > N12 {r12:.2e}; "));
        }
    }
    pass &= worst <= 1e-2;
    Ok(Check {
        pass,
        details: format!("max sup-residual/K_p {worst:.3e} (tol 1e-2) {growth_note}"),
    })
}

/// 6. s_2(D_r, D) = r^2 to 1e-6 (eigen path) for r in {0.3, 0.5, 0.7};
/// general-p ascent within 1e-3 for p in {1, 3}; half-content radius
/// 1/sqrt(2) within 1e-3.
fn c06_schwarz() -> Result<Check> {
    let lab = SchwarzLab::new(
        Domain::UnitDisc,
        2.0,
        DEGREE,
        N_R,
        N_THETA,
        SchwarzOptions::default(),
    )?;
    let mut pass = true;
    let mut details = String::new();
    let mut worst_eig = 0.0_f64;
    for r in [0.3, 0.5, 0.7] {
        let (s, _) = lab.content_p2(&Region::SubDisc(r))?;
        worst_eig = worst_eig.max((s - r * r).abs());
    }
    pass &= worst_eig <= 1e-6;
    details.push_str(&format!("eig |s - r^2| {worst_eig:.2e} (tol 1e-6); "));

    let mut worst_gen = 0.0_f64;
    for p in [1.0, 3.0] {
        for r in [0.3, 0.5, 0.7] {
            let res = lab.content_general(&Region::SubDisc(r), p)?;
            worst_gen = worst_gen.max((res.estimate - r * r).abs());
        }
    }
    pass &= worst_gen <= 1e-3;
    details.push_str(&format!("ascent |s - r^2| {worst_gen:.2e} (tol 1e-3); "));

    let mut worst_half = 0.0_f64;
    for p in [1.0, 2.0, 1.5] {
        let r = lab.half_content_radius(p)?;
        worst_half = worst_half.max((r - std::f64::consts::FRAC_1_SQRT_2).abs());
    }
    pass &= worst_half <= 1e-3;
    details.push_str(&format!("|r_half - 0.70711| {worst_half:.2e} (tol 1e-3)"));
    Ok(Check { pass, details })
}

/// 7. Puncture asymptotics: fitted leading coefficient within 1% of
/// `(2 - p k_p)/(2 pi)` and second within 5% of `(4 - p k_p)/(2 pi)` for
/// p in {2/3, 1, 1.5}; solver values inside the bound corridor (1e-3 slack).
fn c07_puncture_asym() -> Result<Check> {
    let ps = [2.0 / 3.0, 1.0, 1.5];
    let radii: Vec<f64> = (0..8)
        .map(|i| {
            let t = i as f64 / 7.0;
            (1e-3_f64.ln() * (1.0 - t) + 0.1_f64.ln() * t).exp()
        })
        .collect();
    let mut pass = true;
    let mut details = String::new();
    for p in ps {
        let engine = punctured_engine(p)?;
        // warm-chain the solves from the largest radius inward
        let mut samples = Vec::new();
        let mut warm: Option<DVector<Complex64>> = None;
        for &r in radii.iter().rev() {
            let sol = engine.point_solution_warm(Complex64::new(r, 0.0), warm.as_ref())?;
            warm = Some(sol.coeffs.clone());
            samples.push((r, 1.0 / sol.objective));
        }
        samples.reverse();
        let fit = oracles::fit_puncture(p, &samples)?;
        let pk = p * fit.k_p as f64;
        let a_true = (2.0 - pk) / (2.0 * PI);
        let b_true = (4.0 - pk) / (2.0 * PI);
        let a_err = (fit.leading - a_true).abs() / a_true;
        let b_err = (fit.second - b_true).abs() / b_true;
        pass &= a_err <= 0.01 && b_err <= 0.05;
        let mut corridor = true;
        for &(r, kv) in &samples {
            let (lo, hi) = oracles::punctured_bounds(p, r, None)?;
            corridor &= kv >= lo * (1.0 - 1e-3) && kv <= hi * (1.0 + 1e-3);
        }
        pass &= corridor;
        details.push_str(&format!(
            "p={p:.3}: A err {a_err:.2e}, B err {b_err:.2e}, corridor {corridor}; "
        ));
    }
    Ok(Check { pass, details })
}

/// 8. Weighted disc kernel for the power weight against the closed form:
/// absolute error <= 1e-8 at 10 sample pairs, p in {1, 1.5}.
fn c08_weighted_disc() -> Result<Check> {
    let grid = build_grid_graded(Domain::UnitDisc, N_R, N_THETA, DEEP_U_MIN)?;
    let basis = crate::basis::orthonormalize(
        &make_basis(Domain::UnitDisc, 2.0, DEGREE)?,
        &grid,
    )?;
    let pairs: Vec<(Complex64, Complex64)> = vec![
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
        (Complex64::new(0.3, 0.2), Complex64::new(-0.2, 0.4)),
        (Complex64::new(-0.4, 0.1), Complex64::new(0.3, 0.3)),
        (Complex64::new(0.1, -0.5), Complex64::new(0.2, 0.0)),
        (Complex64::new(0.55, 0.0), Complex64::new(0.0, 0.55)),
        (Complex64::new(0.25, 0.25), Complex64::new(0.25, -0.25)),
        (Complex64::new(0.0, 0.35), Complex64::new(-0.35, 0.0)),
        (Complex64::new(0.45, -0.2), Complex64::new(-0.1, -0.3)),
        (Complex64::new(0.2, 0.1), Complex64::new(0.5, 0.2)),
    ];
    let mut worst = 0.0_f64;
    for p in [1.0, 1.5] {
        let k = crate::basis::k_cut(p)? as f64;
        let phi: Vec<f64> = grid.nodes.iter().map(|w| p * k * w.norm().ln()).collect();
        let wk = weighted::WeightedKernel::build(&grid, &basis, &phi)?;
        for &(w, z) in &pairs {
            let got = wk.eval(w, z);
            let expect = oracles::weighted_disc_closed(p, w, z)?;
            worst = worst.max((got - expect).norm());
        }
    }
    Ok(Check {
        pass: worst <= 1e-8,
        details: format!("max abs err {worst:.3e} (tol 1e-8)"),
    })
}

/// 9. `|Omega|^{1/t} K_t(z)^{1/t}` nonincreasing over
/// t in {1, 1.5, 2, 2.5, 3, 4} at three annulus points, slack 1e-6.
fn c09_t_monotone() -> Result<Check> {
    let ts = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0];
    let points = [
        Complex64::new(0.7, 0.0),
        Complex64::new(0.0, -0.6),
        Complex64::new(0.55, 0.55),
    ];
    let engines: Vec<Engine> = {
        let jobs: Vec<f64> = ts.to_vec();
        let res = par_map(jobs, annulus_engine);
        let mut v = Vec::new();
        for e in res {
            v.push(e?);
        }
        v
    };
    let measure = engines[0].grid.total_weight();
    let mut pass = true;
    let mut worst_violation = 0.0_f64;
    for &z in &points {
        let mut prev = f64::INFINITY;
        for engine in &engines {
            let kp = engine.kernel_value(z)?;
            let val = measure.powf(1.0 / engine.p) * kp.powf(1.0 / engine.p);
            if val > prev + 1e-6 {
                pass = false;
                worst_violation = worst_violation.max(val - prev);
            }
            prev = val;
        }
    }
    Ok(Check {
        pass,
        details: if pass {
            "nonincreasing at all points (slack 1e-6)".into()
        } else {
            format!("violated by {worst_violation:.3e}")
        },
    })
}

/// 10. `B_2(0; 1) = sqrt(2)` within 1e-3; Levi form >= B_p^2 (1 - 5e-3) at
/// 20 sampled (z, X); the curvature inequality holds on every sampled affine
/// test disc, p in {2, 3}.
fn c10_metric_curvature() -> Result<Check> {
    let mut pass = true;
    let mut details = String::new();

    let d2 = disc_engine(2.0)?;
    let b2 = d2
        .metric(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?
        .b_p;
    let b2_err = (b2 - 2f64.sqrt()).abs();
    pass &= b2_err <= 1e-3;
    details.push_str(&format!("|B_2(0;1) - sqrt2| {b2_err:.2e}; "));

    // 10 sampled (z, X) per exponent, disc and annulus mixed
    let disc_samples = [
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(0.3, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(0.0, 0.45), Complex64::new(0.6, 0.8)),
        (Complex64::new(-0.25, 0.2), Complex64::new(0.0, 1.0)),
        (Complex64::new(0.5, 0.1), Complex64::new(1.0, -0.5)),
        (Complex64::new(0.15, -0.35), Complex64::new(2.0, 0.0)),
    ];
    let annulus_samples = [
        (Complex64::new(0.7, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(0.0, 0.65), Complex64::new(1.0, 1.0)),
        (Complex64::new(-0.75, 0.1), Complex64::new(0.0, 1.0)),
        (Complex64::new(0.5, -0.5), Complex64::new(1.0, 0.0)),
    ];
    for p in [2.0, 3.0] {
        let de = disc_engine(p)?;
        let ae = annulus_engine(p)?;
        let mut worst_margin = f64::INFINITY;
        let jobs: Vec<(bool, Complex64, Complex64)> = disc_samples
            .iter()
            .map(|&(z, x)| (true, z, x))
            .chain(annulus_samples.iter().map(|&(z, x)| (false, z, x)))
            .collect();
        let results = par_map(jobs, |(on_disc, z, x)| -> Result<f64> {
            let engine = if on_disc { &de } else { &ae };
            let levi = engine.levi_log_kernel(z, x, &BOX_RADII)?;
            let b = engine.metric(z, x)?.b_p;
            Ok(levi.value - b * b * (1.0 - 5e-3))
        });
        for r in results {
            worst_margin = worst_margin.min(r?);
        }
        pass &= worst_margin >= 0.0;
        details.push_str(&format!(
            "p={p}: min Levi - B^2(1-5e-3) margin {worst_margin:.3e}; "
        ));

        // curvature inequality on sampled affine test discs
        let hsc_samples: Vec<(bool, Complex64, Complex64)> = vec![
            (true, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            (true, Complex64::new(0.1, 0.0), Complex64::new(1.0, 0.0)),
            (true, Complex64::new(0.0, 0.3), Complex64::new(1.0, 0.5)),
            (false, Complex64::new(0.7, 0.0), Complex64::new(1.0, 0.0)),
        ];
        for (on_disc, z, x) in hsc_samples {
            let engine = if on_disc { &de } else { &ae };
            let rep = engine.hsc_testdisc(z, x)?;
            pass &= rep.pass;
            if !rep.pass {
                details.push_str(&format!(
                    "HSC FAILED p={p} z={z}: lhs {:.4} > rhs {:.4}; ",
                    rep.lhs, rep.rhs
                ));
            }
        }
    }
    Ok(Check { pass, details })
}

/// 11. The Narasimhan-Simha coefficient stays within a factor 2 over
/// |z| in {0.1, 0.03, 0.01} on the punctured disc at p = 1, while
/// `log K_p` varies by more than 2; the fitted `1/|z|^2` mode is positive.
fn c11_ns_puncture() -> Result<Check> {
    let engine = punctured_engine(1.0)?;
    let (wk, profile) = weighted::ns_weighted_kernel(&engine, 20)?;
    let radii = [0.1, 0.03, 0.01];
    let mut coeffs = Vec::new();
    for &r in &radii {
        let rep = weighted::ns_metric_coeff_with(
            Domain::PuncturedDisc,
            &wk,
            &profile,
            Complex64::new(r, 0.0),
        )?;
        coeffs.push(rep.coeff);
    }
    let cmax = coeffs.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = coeffs.iter().cloned().fold(f64::MAX, f64::min);
    let bounded = cmin > 0.0 && cmax / cmin <= 2.0;
    let log_contrast =
        (profile.log_kp(0.01) - profile.log_kp(0.1)).abs();
    let contrast = log_contrast > 2.0;
    let (a_minus1, _a0) = weighted::ns_series_leading(&wk, &[0.02, 0.03, 0.05, 0.08, 0.12]);
    let laurent = a_minus1 > 0.0;
    Ok(Check {
        pass: bounded && contrast && laurent,
        details: format!(
            "coeff range [{cmin:.4}, {cmax:.4}] (ratio {:.3} <= 2), log K_p contrast {log_contrast:.2} > 2, a_-1 {a_minus1:.3e} > 0",
            cmax / cmin
        ),
    })
}

/// 12. Carleman equality (pi, pi) for constants to 1e-10; the inequality
/// holds for 200 seeded random polynomials of degree <= 10; the
/// Hardy-to-Bergman ratio stays finite (maximum recorded).
fn c12_carleman_hardy() -> Result<Check> {
    use rand::{Rng, SeedableRng};
    let basis = make_basis(Domain::UnitDisc, 2.0, 12)?;
    let grid = build_grid(Domain::UnitDisc, N_R, N_THETA)?;
    let mut c = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
    c[0] = Complex64::new(1.0, 0.0);
    let (lhs, rhs) = hardy::carleman_check(&basis, &c, &grid)?;
    let mut pass = (lhs - PI).abs() <= 1e-10 && (rhs - PI).abs() <= 1e-10;
    let mut details = format!("constants: ({lhs:.12}, {rhs:.12}); ");

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut violations = 0;
    let mut max_ratio = 0.0_f64;
    for _ in 0..200 {
        let mut coeffs = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
        for j in 0..=10 {
            coeffs[j] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let (l, r) = hardy::carleman_check(&basis, &coeffs, &grid)?;
        if l > r * (1.0 + 1e-10) {
            violations += 1;
        }
        let ratio = hardy::hl_ratio(1.0, &basis, &coeffs, &grid)?;
        if !ratio.is_finite() {
            violations += 1;
        }
        max_ratio = max_ratio.max(ratio);
    }
    pass &= violations == 0;
    details.push_str(&format!(
        "200 random polynomials: {violations} violations, max A^2/H^1 ratio {max_ratio:.6}"
    ));
    Ok(Check { pass, details })
}

/// 13. Two distinct best approximations at distance pi/2 (within 2e-3) and
/// no candidate below pi/2 - 1e-6.
fn c13_nonchebyshev() -> Result<Check> {
    let half = PI / 2.0;
    let mut pass = true;
    let mut details = String::new();
    for (p, candidates) in [(1.0, 100), (0.5, 100)] {
        let rep = nonchebyshev_demo(p, candidates, 42, DEGREE, N_R, N_THETA)?;
        let ok = (rep.dist_h1 - half).abs() <= 2e-3
            && (rep.dist_h2 - half).abs() <= 2e-3
            && (rep.mass_inside - half).abs() <= 2e-3
            && (rep.mass_outside - half).abs() <= 2e-3
            && rep.candidate_min >= half - 1e-6;
        pass &= ok;
        details.push_str(&format!(
            "p={p}: d(h1) {:.6}, d(h2) {:.6}, min candidate {:.6}; ",
            rep.dist_h1, rep.dist_h2, rep.candidate_min
        ));
    }
    Ok(Check { pass, details })
}

/// 14. `K_p(0) |D| = 1` within 1e-6 on the disc; `K_p(a) |Omega| > 1 + 1e-3`
/// off-centre and on the annulus; mean-value residual of span elements at
/// the centre <= 1e-10.
fn c14_mean_value() -> Result<Check> {
    let mut pass = true;
    let mut details = String::new();
    for p in [1.0, 2.0, 3.0] {
        let engine = disc_engine(p)?;
        let k0 = engine.kernel_value(Complex64::new(0.0, 0.0))?;
        let err = (k0 * PI - 1.0).abs();
        pass &= err <= 1e-6;
        details.push_str(&format!("p={p}: |K(0) pi - 1| {err:.2e}; "));
        for a in [Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.5)] {
            let ka = engine.kernel_value(a)?;
            pass &= ka * PI > 1.0 + 1e-3;
        }
    }
    let annulus = annulus_engine(2.0)?;
    let area = Domain::Annulus(0.5).area();
    for a in [
        Complex64::new(0.7, 0.0),
        Complex64::new(0.0, 0.6),
        Complex64::new(-0.85, 0.0),
    ] {
        let ka = annulus.kernel_value(a)?;
        pass &= ka * area > 1.0 + 1e-3;
    }
    let grid = build_grid(Domain::UnitDisc, N_R, N_THETA)?;
    let basis = make_basis(Domain::UnitDisc, 2.0, 12)?;
    let mv = oracles::mean_value_residual(&grid, &basis, Complex64::new(0.0, 0.0));
    pass &= mv <= 1e-10;
    details.push_str(&format!("mean-value residual {mv:.2e}"));
    Ok(Check { pass, details })
}

/// 15. Boundary-layer sweep on the disc: fitted exponent of `1 - s_p` in
/// eps equals 1 within 0.1.
fn c15_dim_sweep() -> Result<Check> {
    let lab = SchwarzLab::new(
        Domain::UnitDisc,
        2.0,
        DEGREE,
        N_R,
        N_THETA,
        SchwarzOptions::default(),
    )?;
    let mut pass = true;
    let mut details = String::new();
    for p in [2.0, 1.0] {
        let sweep = lab.dim_sweep(p, &[0.2, 0.1, 0.05])?;
        let ok = (sweep.slope - 1.0).abs() <= 0.1;
        pass &= ok;
        details.push_str(&format!(
            "p={p}: slope {:.4}, dimension {:.4}; ",
            sweep.slope, sweep.dimension
        ));
    }
    Ok(Check { pass, details })
}
