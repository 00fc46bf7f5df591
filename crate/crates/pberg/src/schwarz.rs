//! p-Schwarz contents `s_p(E, Omega) = sup int_E |f|^p / int_Omega |f|^p`.
//!
//! For `p = 2` the supremum over the span is the largest generalized
//! eigenvalue of the restricted Gram against the full Gram, computed exactly.
//! For general `p` a projected-gradient ascent on the ratio provides a lower
//! bound, anchored by the `p = 2` path and multistarts.
//!
//! Restricted integrals over radial regions (concentric discs, bands, their
//! complements) use dedicated band quadratures, so contents converge far
//! beyond the node-mask quantization; indicator regions fall back to the
//! node-level mask.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{gram_matrix, make_basis, orthonormalize, weighted_gram, Basis};
use crate::domain::{Domain, Region};
use crate::error::{PbergError, Result};
use crate::quad::{band_grid, build_grid, mask, QuadGrid};
use crate::util::{ls_slope, par_map};

/// First zero of the Bessel function J_0; the first Dirichlet eigenvalue of
/// the Laplacian on the unit disc is its square.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404825557695773;

/// `lambda_1` of a disc of the given radius; `None` on domains without a
/// hard-coded value (annulus eigenvalues need Bessel cross-products).
pub fn laplace_lambda1(domain: Domain) -> Option<f64> {
    match domain {
        Domain::UnitDisc | Domain::PuncturedDisc => {
            Some(BESSEL_J0_FIRST_ZERO * BESSEL_J0_FIRST_ZERO)
        }
        Domain::Disc(r) => Some(BESSEL_J0_FIRST_ZERO * BESSEL_J0_FIRST_ZERO / (r * r)),
        Domain::Annulus(_) => None,
    }
}

#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone)]
pub struct SchwarzResult {
    pub region: String,
    pub p: f64,
    /// Best ratio found (a lower bound for the truncated-space supremum).
    pub estimate: f64,
    /// Exact generalized-eigenvalue content; populated at `p = 2`.
    pub exact_eig: Option<f64>,
    pub maximizer: DVector<Complex64>,
    pub multistarts: usize,
    pub bound_checks: Vec<BoundCheck>,
}

#[derive(Debug, Clone)]
pub struct SchwarzOptions {
    pub multistarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SchwarzOptions {
    fn default() -> Self {
        SchwarzOptions {
            multistarts: 8,
            seed: 42,
            max_iter: 500,
            tol: 1e-13,
        }
    }
}

/// Domain, grid and basis shared by the content computations.
pub struct SchwarzLab {
    pub domain: Domain,
    pub grid: QuadGrid,
    pub basis: Basis,
    pub n_r: usize,
    pub n_theta: usize,
    pub opts: SchwarzOptions,
}

impl SchwarzLab {
    pub fn new(
        domain: Domain,
        p_basis: f64,
        max_degree: i32,
        n_r: usize,
        n_theta: usize,
        opts: SchwarzOptions,
    ) -> Result<SchwarzLab> {
        let grid = build_grid(domain, n_r, n_theta)?;
        let basis = orthonormalize(&make_basis(domain, p_basis, max_degree)?, &grid)?;
        Ok(SchwarzLab {
            domain,
            grid,
            basis,
            n_r,
            n_theta,
            opts,
        })
    }

    /// Quadrature over `E` (exact band rules where possible).
    pub fn region_quad(&self, region: &Region) -> Result<QuadGrid> {
        region.validate(&self.domain)?;
        match region {
            Region::SubDisc(r) => band_grid(self.domain, 0.0, *r, self.n_r, self.n_theta),
            Region::AnnularBand(a, b) => band_grid(self.domain, *a, *b, self.n_r, self.n_theta),
            Region::Complement(inner) => match inner.as_ref() {
                Region::SubDisc(r) => {
                    band_grid(self.domain, *r, self.domain.outer_radius(), self.n_r, self.n_theta)
                }
                Region::AnnularBand(a, b) => {
                    let mut parts = Vec::new();
                    if let Ok(g) = band_grid(self.domain, 0.0, *a, self.n_r, self.n_theta) {
                        parts.push(g);
                    }
                    if let Ok(g) = band_grid(
                        self.domain,
                        *b,
                        self.domain.outer_radius(),
                        self.n_r,
                        self.n_theta,
                    ) {
                        parts.push(g);
                    }
                    concat_grids(self.domain, parts)
                }
                Region::Complement(x) => self.region_quad(x),
                Region::Indicator(_) => mask(&self.grid, region),
            },
            Region::Indicator(_) => mask(&self.grid, region),
        }
    }

    /// Exact `p = 2` content: the largest generalized eigenvalue of
    /// `(G_E, G_Omega)` over the span. Returns the value and an eigenvector.
    pub fn content_p2(&self, region: &Region) -> Result<(f64, DVector<Complex64>)> {
        let egrid = self.region_quad(region)?;
        let b_e = self.basis.eval_matrix(&egrid);
        let g_e = weighted_gram(&b_e, &egrid.weights);
        let g_full = gram_matrix(&self.basis, &self.grid);
        let chol = nalgebra::Cholesky::new(g_full).ok_or(PbergError::IllConditioned {
            cond: f64::INFINITY,
            limit: crate::basis::GRAM_COND_LIMIT,
        })?;
        let l = chol.l();
        // A = L^{-1} G_E L^{-H}, Hermitian with the same spectrum
        let y = l.solve_lower_triangular(&g_e).ok_or(PbergError::RankDeficient)?;
        let yh = y.adjoint();
        let a_t = l.solve_lower_triangular(&yh).ok_or(PbergError::RankDeficient)?;
        let a = a_t.adjoint();
        let eig = SymmetricEigen::new(a);
        let mut best = f64::MIN;
        let mut idx = 0;
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > best {
                best = lam;
                idx = i;
            }
        }
        // map the eigenvector back through L^{-H}
        let v = eig.eigenvectors.column(idx).into_owned();
        let lh = l.adjoint();
        let c = solve_upper(&lh, &v)?;
        Ok((best, c))
    }

    /// Ratio `int_E |f|^p / int_Omega |f|^p` for the coefficient vector.
    fn ratio(&self, b_e: &DMatrix<Complex64>, egrid: &QuadGrid, c: &DVector<Complex64>, p: f64) -> f64 {
        let num = p_mass(b_e, &egrid.weights, c, p);
        let b_full = self.basis.eval_matrix(&self.grid);
        let den = p_mass(&b_full, &self.grid.weights, c, p);
        num / den
    }

    /// Projected-gradient ascent on the ratio; returns the best value found
    /// over the multistarts (a lower bound for the span's supremum).
    pub fn content_general(&self, region: &Region, p: f64) -> Result<SchwarzResult> {
        if !(p > 0.0) {
            return Err(PbergError::Parameter(format!("content needs p > 0, got {p}")));
        }
        let egrid = self.region_quad(region)?;
        let b_e = self.basis.eval_matrix(&egrid);
        let b_full = self.basis.eval_matrix(&self.grid);
        let n = self.basis.len();

        let (eig_val, eig_vec) = self.content_p2(region)?;

        let mut starts: Vec<DVector<Complex64>> = Vec::new();
        // the constant function: element 0 of the (triangular) basis
        let mut constant = DVector::from_element(n, Complex64::new(0.0, 0.0));
        constant[0] = Complex64::new(1.0, 0.0);
        starts.push(constant);
        starts.push(eig_vec.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        while starts.len() < self.opts.multistarts {
            starts.push(DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            }));
        }

        let results = par_map(starts, |c0| self.ascend(&b_e, &egrid, &b_full, c0, p));
        let mut best: Option<(f64, DVector<Complex64>)> = None;
        let mut count = 0;
        for r in results {
            let (val, c) = r?;
            count += 1;
            let better = match &best {
                Some((bv, _)) => val > *bv,
                None => true,
            };
            if better {
                best = Some((val, c));
            }
        }
        let (estimate, maximizer) = best.ok_or_else(|| {
            PbergError::Ascent("no multistart produced a finite ratio".into())
        })?;
        Ok(SchwarzResult {
            region: format!("{region:?}"),
            p,
            estimate,
            exact_eig: if (p - 2.0).abs() < 1e-12 {
                Some(eig_val)
            } else {
                None
            },
            maximizer,
            multistarts: count,
            bound_checks: Vec::new(),
        })
    }

    fn ascend(
        &self,
        b_e: &DMatrix<Complex64>,
        egrid: &QuadGrid,
        b_full: &DMatrix<Complex64>,
        c0: DVector<Complex64>,
        p: f64,
    ) -> Result<(f64, DVector<Complex64>)> {
        let mut c = c0;
        let den0 = p_mass(b_full, &self.grid.weights, &c, p);
        if !(den0 > 0.0) || !den0.is_finite() {
            return Err(PbergError::Ascent("start has vanishing norm".into()));
        }
        c /= Complex64::new(den0.powf(1.0 / p), 0.0);
        let mut value = p_mass(b_e, &egrid.weights, &c, p);
        let mut step = 0.5;
        let mut flat = 0;
        for _ in 0..self.opts.max_iter {
            let grad = ratio_gradient(b_e, egrid, b_full, &self.grid, &c, p, value);
            let gnorm = grad.norm();
            if !gnorm.is_finite() {
                return Err(PbergError::Ascent("gradient blew up".into()));
            }
            if gnorm < 1e-15 {
                break;
            }
            let mut accepted = false;
            for _ in 0..30 {
                let mut cand = &c + &grad * Complex64::new(step / gnorm.max(1e-300), 0.0);
                let den = p_mass(b_full, &self.grid.weights, &cand, p);
                if den > 0.0 && den.is_finite() {
                    cand /= Complex64::new(den.powf(1.0 / p), 0.0);
                    let v = p_mass(b_e, &egrid.weights, &cand, p);
                    if v >= value - 1e-16 {
                        let gain = v - value;
                        c = cand;
                        value = v;
                        accepted = true;
                        step = (step * 1.3).min(2.0);
                        if gain < self.opts.tol * value.max(1e-6) {
                            flat += 1;
                        } else {
                            flat = 0;
                        }
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted || flat >= 3 {
                break;
            }
        }
        Ok((value, c))
    }

    /// Node-mask variant (consistent discrete measure on both sides); used
    /// by the set-algebra property checks.
    pub fn content_masked(&self, region: &Region, p: f64) -> Result<f64> {
        let egrid = mask(&self.grid, region)?;
        let b_e = self.basis.eval_matrix(&egrid);
        let b_full = self.basis.eval_matrix(&self.grid);
        let n = self.basis.len();
        let mut best = 0.0_f64;
        let mut starts: Vec<DVector<Complex64>> = Vec::new();
        let mut constant = DVector::from_element(n, Complex64::new(0.0, 0.0));
        constant[0] = Complex64::new(1.0, 0.0);
        starts.push(constant);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        for _ in 0..4 {
            starts.push(DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            }));
        }
        for c0 in starts {
            let (v, _) = self.ascend(&b_e, &egrid, &b_full, c0, p)?;
            best = best.max(v);
        }
        Ok(best)
    }

    /// Upper-bound checks from the first Laplace eigenvalue; recorded and
    /// flagged, skipped (empty) when no eigenvalue table exists.
    pub fn bound_checks(&self, s: f64, d: f64) -> Vec<BoundCheck> {
        let mut checks = Vec::new();
        if let Some(lambda1) = laplace_lambda1(self.domain) {
            for (name, cnum) in [("eigenvalue-136", 136.0), ("eigenvalue-128", 128.0)] {
                let c = cnum / lambda1;
                let bound = c / (c + d * d);
                checks.push(BoundCheck {
                    name: name.into(),
                    bound,
                    satisfied: s <= bound + 1e-9,
                });
            }
        }
        checks
    }

    /// Radius of the concentric disc with content 1/2 (bisection).
    pub fn half_content_radius(&self, p: f64) -> Result<f64> {
        let value = |r: f64| -> Result<f64> {
            if (p - 2.0).abs() < 1e-12 {
                Ok(self.content_p2(&Region::SubDisc(r))?.0)
            } else {
                Ok(self.content_general(&Region::SubDisc(r), p)?.estimate)
            }
        };
        let (mut lo, mut hi) = (0.55_f64, 0.85_f64);
        let flo = value(lo)? - 0.5;
        let fhi = value(hi)? - 0.5;
        if flo.signum() == fhi.signum() {
            return Err(PbergError::Bisection(format!(
                "content - 1/2 has the same sign at r = {lo} and r = {hi}"
            )));
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let fm = value(mid)? - 0.5;
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-6 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Boundary-layer sweep: contents of `Omega_eps = SubDisc(1 - eps)`,
    /// log-log slope of `1 - s`, and the Schwarz-dimension estimate
    /// `2 - slope`.
    pub fn dim_sweep(&self, p: f64, eps_list: &[f64]) -> Result<DimSweep> {
        if eps_list.len() < 2 {
            return Err(PbergError::Parameter("need at least two epsilons".into()));
        }
        let outer = self.domain.outer_radius();
        let mut rows = Vec::new();
        for &eps in eps_list {
            if !(eps > 0.0 && eps < 0.3 * outer) {
                return Err(PbergError::Parameter(format!("eps {eps} outside (0, 0.3)")));
            }
            let region = Region::SubDisc(outer * (1.0 - eps));
            let s = if (p - 2.0).abs() < 1e-12 {
                self.content_p2(&region)?.0
            } else {
                self.content_general(&region, p)?.estimate
            };
            let one_minus = 1.0 - s;
            if !(one_minus > 0.0) {
                return Err(PbergError::Range(format!(
                    "content did not stay below 1 at eps = {eps}"
                )));
            }
            rows.push((eps, s, one_minus));
        }
        // sanity: s increases as eps decreases
        for w in rows.windows(2) {
            if w[0].0 > w[1].0 && w[0].1 > w[1].1 + 1e-9 {
                return Err(PbergError::Range(
                    "contents not monotone along the sweep".into(),
                ));
            }
        }
        let x: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.2.ln()).collect();
        let slope = ls_slope(&x, &y);
        Ok(DimSweep {
            p,
            rows,
            slope,
            dimension: 2.0 - slope,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DimSweep {
    pub p: f64,
    /// `(eps, s_p, 1 - s_p)` rows.
    pub rows: Vec<(f64, f64, f64)>,
    pub slope: f64,
    pub dimension: f64,
}

#[derive(Debug, Clone)]
pub struct ChebyshevReport {
    pub p: f64,
    /// `int_E |f_E|^p` and `int_{Omega \ E} |f_E|^p` (both must be pi/2).
    pub mass_inside: f64,
    pub mass_outside: f64,
    /// Distances from `g` to the two best approximations.
    pub dist_h1: f64,
    pub dist_h2: f64,
    /// Smallest distance among the random candidates.
    pub candidate_min: f64,
    pub candidates: usize,
}

/// Two distinct best approximations at equal distance: on the unit disc with
/// `E` the concentric disc of content 1/2, the constants `h1 = 0`, `h2 = 1`
/// both minimize the distance to the splice `g = 0 on E, 1 off E`, and no
/// candidate from the span may do better than `pi/2` (up to tolerance).
pub fn nonchebyshev_demo(
    p: f64,
    candidates: usize,
    seed: u64,
    max_degree: i32,
    n_r: usize,
    n_theta: usize,
) -> Result<ChebyshevReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(PbergError::Parameter(format!(
            "the non-uniqueness construction needs 0 < p <= 1, got {p}"
        )));
    }
    let r_half = std::f64::consts::FRAC_1_SQRT_2;
    let domain = Domain::UnitDisc;
    let inside = band_grid(domain, 0.0, r_half, n_r, n_theta)?;
    let outside = band_grid(domain, r_half, 1.0, n_r, n_theta)?;
    let full = build_grid(domain, n_r, n_theta)?;
    let basis = orthonormalize(&make_basis(domain, 2.0, max_degree)?, &full)?;
    let b_in = basis.eval_matrix(&inside);
    let b_out = basis.eval_matrix(&outside);
    let half_area = std::f64::consts::PI / 2.0;

    // the content maximizer f_E = 1 splits its mass evenly
    let mass_inside: f64 = inside.weights.iter().sum();
    let mass_outside: f64 = outside.weights.iter().sum();

    // distance(h) = int_E |h|^p + int_{Omega\E} |1 - h|^p
    let distance = |c: &DVector<Complex64>| -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let f_in = &b_in * c;
        let f_out = &b_out * c;
        let di: f64 = f_in
            .iter()
            .zip(&inside.weights)
            .map(|(f, &w)| w * f.norm().powf(p))
            .sum();
        let dd: f64 = f_out
            .iter()
            .zip(&outside.weights)
            .map(|(f, &w)| w * (one - f).norm().powf(p))
            .sum();
        di + dd
    };

    let n = basis.len();
    let zero = DVector::from_element(n, Complex64::new(0.0, 0.0));
    let mut one_c = zero.clone();
    // the constant 1 in the orthonormalized basis: element 0 is c0 * z^0
    let b0 = basis.eval(Complex64::new(0.0, 0.0))[0];
    one_c[0] = Complex64::new(1.0, 0.0) / b0;

    let dist_h1 = distance(&zero);
    let dist_h2 = distance(&one_c);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidate_min = f64::INFINITY;
    for i in 0..candidates {
        let c = if i < 4 {
            // structured near-minimizer probes around h1 and h2
            let base = if i % 2 == 0 { &zero } else { &one_c };
            let noise = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            base + noise * Complex64::new(0.02, 0.0)
        } else {
            DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            })
        };
        let d = distance(&c);
        candidate_min = candidate_min.min(d);
        if d < half_area - 1e-6 {
            return Err(PbergError::CounterexampleViolation {
                found: d,
                expected: half_area,
            });
        }
    }
    Ok(ChebyshevReport {
        p,
        mass_inside,
        mass_outside,
        dist_h1,
        dist_h2,
        candidate_min,
        candidates,
    })
}

fn p_mass(b: &DMatrix<Complex64>, weights: &[f64], c: &DVector<Complex64>, p: f64) -> f64 {
    let f = b * c;
    f.iter()
        .zip(weights)
        .map(|(v, &w)| w * v.norm().powf(p))
        .sum()
}

/// Wirtinger gradient of the ratio at a point normalized to full mass 1.
fn ratio_gradient(
    b_e: &DMatrix<Complex64>,
    egrid: &QuadGrid,
    b_full: &DMatrix<Complex64>,
    full: &QuadGrid,
    c: &DVector<Complex64>,
    p: f64,
    value: f64,
) -> DVector<Complex64> {
    let grad_part = |b: &DMatrix<Complex64>, weights: &[f64]| -> DVector<Complex64> {
        let f = b * c;
        let fmax = f.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let floor = 1e-14 * fmax;
        let scaled = DVector::from_iterator(
            f.len(),
            f.iter().zip(weights).map(|(v, &w)| {
                let r = v.norm().max(floor);
                w * r.powf(p - 2.0) * v
            }),
        );
        b.ad_mul(&scaled)
    };
    let ge = grad_part(b_e, &egrid.weights);
    let gf = grad_part(b_full, &full.weights);
    ge - gf * Complex64::new(value, 0.0)
}

fn concat_grids(domain: Domain, parts: Vec<QuadGrid>) -> Result<QuadGrid> {
    if parts.is_empty() {
        return Err(PbergError::EmptyRegion);
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut radii = Vec::new();
    let provenance = parts[0].provenance;
    for g in parts {
        nodes.extend(g.nodes);
        weights.extend(g.weights);
        radii.extend(g.radii);
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(QuadGrid {
        domain,
        nodes,
        weights,
        boundary_nodes: Vec::new(),
        boundary_weights: Vec::new(),
        provenance,
        radii,
    })
}

fn solve_upper(
    u: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let n = u.nrows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for k in (i + 1)..n {
            acc -= u[(i, k)] * x[k];
        }
        if u[(i, i)].norm() == 0.0 {
            return Err(PbergError::RankDeficient);
        }
        x[i] = acc / u[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn disc_lab() -> SchwarzLab {
        SchwarzLab::new(
            Domain::UnitDisc,
            2.0,
            24,
            32,
            64,
            SchwarzOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn subdisc_content_p2_is_r_squared() {
        let lab = disc_lab();
        for r in [0.3, 0.5, 0.7] {
            let (s, _) = lab.content_p2(&Region::SubDisc(r)).unwrap();
            assert_abs_diff_eq!(s, r * r, epsilon = 1e-6);
        }
    }

    #[test]
    fn complement_content_at_least_area_fraction() {
        let lab = disc_lab();
        let region = Region::Complement(Box::new(Region::SubDisc(0.5)));
        let (s, _) = lab.content_p2(&region).unwrap();
        assert!(s >= 0.75 - 1e-9, "content {s}");
        assert!(s <= 1.0 + 1e-9);
    }

    #[test]
    fn general_p_matches_example_and_eig() {
        let lab = disc_lab();
        let r1 = lab.content_general(&Region::SubDisc(0.5), 1.0).unwrap();
        assert!((r1.estimate - 0.25).abs() < 1e-3, "s_1 {}", r1.estimate);
        let r3 = lab.content_general(&Region::SubDisc(0.6), 3.0).unwrap();
        assert!((r3.estimate - 0.36).abs() < 1e-3, "s_3 {}", r3.estimate);
        let r2 = lab.content_general(&Region::SubDisc(0.5), 2.0).unwrap();
        assert!((r2.estimate - r2.exact_eig.unwrap()).abs() < 1e-6);
    }

    #[test]
    fn monotonicity_and_lower_bound_masked() {
        let lab = disc_lab();
        let s_small = lab.content_masked(&Region::SubDisc(0.4), 1.5).unwrap();
        let s_large = lab.content_masked(&Region::SubDisc(0.6), 1.5).unwrap();
        assert!(s_small <= s_large + 1e-9);
        // property (e): s >= |E|/|Omega| under the same discrete measure
        let egrid = mask(&lab.grid, &Region::SubDisc(0.4)).unwrap();
        let frac = egrid.total_weight() / lab.grid.total_weight();
        assert!(s_small >= frac - 1e-9);
    }

    #[test]
    fn subadditivity_disjoint_regions() {
        let lab = disc_lab();
        let e1 = Region::SubDisc(0.3);
        let e2 = Region::AnnularBand(0.5, 0.7);
        let union = Region::Indicator(std::sync::Arc::new(|z: Complex64| {
            let r = z.norm();
            r <= 0.3 || (0.5..=0.7).contains(&r)
        }));
        let s1 = lab.content_masked(&e1, 1.5).unwrap();
        let s2 = lab.content_masked(&e2, 1.5).unwrap();
        let su = lab.content_masked(&union, 1.5).unwrap();
        assert!(su <= s1 + s2 + 1e-6, "su {su} vs {s1} + {s2}");
    }

    #[test]
    fn bound_checks_from_eigenvalue() {
        let lab = disc_lab();
        let checks = lab.bound_checks(0.25, 0.5);
        assert_eq!(checks.len(), 2);
        // 136/lambda1 / (136/lambda1 + 0.25) with lambda1 = j01^2
        let lambda1 = BESSEL_J0_FIRST_ZERO * BESSEL_J0_FIRST_ZERO;
        let c = 136.0 / lambda1;
        assert_abs_diff_eq!(checks[0].bound, c / (c + 0.25), epsilon = 1e-12);
        assert!(checks.iter().all(|c| c.satisfied));
    }

    #[test]
    fn half_content_radius_all_p() {
        let lab = disc_lab();
        for p in [1.0, 2.0, 1.5] {
            let r = lab.half_content_radius(p).unwrap();
            assert!(
                (r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3,
                "p = {p}: r = {r}"
            );
        }
    }

    #[test]
    fn kernel_ratio_bounded_by_content() {
        // K_{D,p}(z) / K_{D_0.9,p}(z) <= s_p(D_0.9, D) at sample points
        let lab = disc_lab();
        let (s, _) = lab.content_p2(&Region::SubDisc(0.9)).unwrap();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.2)] {
            let ratio = crate::oracles::disc_diag_closed(z)
                / crate::oracles::scaled_disc_diag_closed(0.9, z);
            assert!(ratio <= s + 1e-3, "ratio {ratio} vs s {s}");
        }
    }

    #[test]
    fn dimension_sweep_disc() {
        let lab = disc_lab();
        let sweep = lab.dim_sweep(2.0, &[0.2, 0.1, 0.05]).unwrap();
        assert!((sweep.dimension - 1.0).abs() < 0.1, "dim {}", sweep.dimension);
        // sanity: s increases as eps decreases
        assert!(sweep.rows[2].1 > sweep.rows[0].1);
    }

    #[test]
    fn nonchebyshev_structure() {
        let rep = nonchebyshev_demo(1.0, 100, 42, 24, 32, 64).unwrap();
        let half = PI / 2.0;
        assert!((rep.mass_inside - half).abs() < 2e-3);
        assert!((rep.mass_outside - half).abs() < 2e-3);
        assert!((rep.dist_h1 - half).abs() < 2e-3);
        assert!((rep.dist_h2 - half).abs() < 2e-3);
        assert!(rep.candidate_min >= half - 1e-6);
        let rep = nonchebyshev_demo(0.5, 50, 7, 24, 32, 64).unwrap();
        assert!((rep.dist_h1 - half).abs() < 2e-3);
        assert!((rep.dist_h2 - half).abs() < 2e-3);
        assert!(rep.candidate_min >= half - 1e-6);
    }

    #[test]
    fn degenerate_band_region_errors() {
        let lab = disc_lab();
        assert!(matches!(
            lab.region_quad(&Region::AnnularBand(0.5, 0.5)),
            Err(PbergError::EmptyRegion)
        ));
    }
}
