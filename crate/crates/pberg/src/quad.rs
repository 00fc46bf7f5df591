//! Interior and boundary quadrature over the model domains.
//!
//! All rules are tensor products of a radial rule and a uniform (trapezoid)
//! rule in angle; the trapezoid rule is spectrally accurate for the periodic
//! integrands arising here. The radial variable differs per domain:
//!
//! * discs use Gauss–Legendre in `u = r^2`, which integrates `∫ z^a conj(z)^b`
//!   exactly for `a = b <= 2 n_r - 1`;
//! * the annulus uses Gauss–Legendre in `v = log r`, which handles the full
//!   symmetric range of Laurent powers at machine precision;
//! * the punctured disc uses a composite rule: the disc rule on the outer
//!   panel plus dyadically graded Gauss panels toward the puncture, so that
//!   the fractional-power densities `r^{1-p k_p}` of `A^p` norms are resolved.
//!
//! The origin is never a node, so the punctured disc needs no special casing
//! at the puncture itself.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{Domain, Region};
use crate::error::{PbergError, Result};

/// Gauss order of each graded radial panel. A dyadic panel `[a, 2a]` in the
/// squared-radius variable sees integrands `u^beta` with `beta > -1`; order 8
/// keeps the per-panel relative error near 3e-13 in the worst case used here.
const PANEL_ORDER: usize = 8;

/// Default graded depth in the squared-radius variable for the punctured
/// disc. The truncated singular mass scales like `u_min^{1 - p k_p / 2}`.
pub const DEFAULT_U_MIN: f64 = 1e-21;

/// Deeper grading used when weighted Gram matrices must reach 1e-8 accuracy
/// against closed forms (singular radial weights).
pub const DEEP_U_MIN: f64 = 1e-36;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; standard and accurate to
/// machine precision for the orders used in this crate.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th positive root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by upward recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Interior (and optionally boundary) quadrature nodes over a [`Domain`].
#[derive(Debug, Clone)]
pub struct QuadGrid {
    pub domain: Domain,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub boundary_nodes: Vec<Complex64>,
    pub boundary_weights: Vec<f64>,
    /// `(n_r, n_theta)` rule sizes this grid was built from.
    pub provenance: (usize, usize),
    /// Distinct radial levels in increasing order (tensor structure).
    pub radii: Vec<f64>,
}

impl QuadGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn total_boundary_weight(&self) -> f64 {
        self.boundary_weights.iter().sum()
    }
}

/// Radial levels and their one-dimensional weights (the angle factor is a
/// uniform `2 pi / n_theta`).
struct RadialRule {
    radii: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Legendre in `u = r^2` on `[lo2, hi2]` (squared radii).
fn radial_u_rule(lo2: f64, hi2: f64, n: usize) -> RadialRule {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (hi2 - lo2);
    let mid = 0.5 * (hi2 + lo2);
    let radii: Vec<f64> = x.iter().map(|&xi| (mid + half * xi).sqrt()).collect();
    // ∫ f r dr = (1/2) ∫ f du
    let weights: Vec<f64> = w.iter().map(|&wi| 0.5 * half * wi).collect();
    RadialRule { radii, weights }
}

/// Gauss–Legendre in `v = log r` on `[log r_in, log r_out]`.
fn radial_log_rule(r_in: f64, r_out: f64, n: usize) -> RadialRule {
    let (x, w) = gauss_legendre(n);
    let (a, b) = (r_in.ln(), r_out.ln());
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut radii = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&xi, &wi) in x.iter().zip(&w) {
        let v = mid + half * xi;
        let r = v.exp();
        radii.push(r);
        // ∫ f r dr = ∫ f e^{2v} dv
        weights.push(half * wi * r * r);
    }
    RadialRule { radii, weights }
}

/// Composite graded radial rule for the punctured disc: disc rule on the
/// outer panel `[R^2/4, R^2]`, dyadic Gauss panels below, down to `u_min`.
fn radial_graded_rule(outer: f64, n_top: usize, u_min: f64) -> RadialRule {
    let r2 = outer * outer;
    let mut panels = vec![(r2 / 4.0, r2, n_top)];
    let mut hi = r2 / 4.0;
    while hi > u_min {
        let lo = (hi / 2.0).max(u_min);
        panels.push((lo, hi, PANEL_ORDER));
        hi = lo;
    }
    let mut radii = Vec::new();
    let mut weights = Vec::new();
    // Assemble from the innermost panel out so radii come out increasing.
    for &(lo, hi, n) in panels.iter().rev() {
        let rule = radial_u_rule(lo, hi, n);
        radii.extend(rule.radii);
        weights.extend(rule.weights);
    }
    RadialRule { radii, weights }
}

fn tensor_grid(domain: Domain, rule: RadialRule, n_r: usize, n_theta: usize) -> QuadGrid {
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(rule.radii.len() * n_theta);
    let mut weights = Vec::with_capacity(rule.radii.len() * n_theta);
    for (&r, &wr) in rule.radii.iter().zip(&rule.weights) {
        for j in 0..n_theta {
            let theta = dtheta * j as f64;
            nodes.push(Complex64::from_polar(r, theta));
            weights.push(wr * dtheta);
        }
    }
    QuadGrid {
        domain,
        nodes,
        weights,
        boundary_nodes: Vec::new(),
        boundary_weights: Vec::new(),
        provenance: (n_r, n_theta),
        radii: rule.radii,
    }
}

/// Builds the interior tensor quadrature for `domain` with `n_r` radial and
/// `n_theta` angular points.
pub fn build_grid(domain: Domain, n_r: usize, n_theta: usize) -> Result<QuadGrid> {
    if n_r < 4 || n_theta < 8 {
        return Err(PbergError::Parameter(format!(
            "grid sizes too small: n_r = {n_r} (>= 4), n_theta = {n_theta} (>= 8)"
        )));
    }
    let rule = match domain {
        Domain::UnitDisc => radial_u_rule(0.0, 1.0, n_r),
        Domain::Disc(r) => radial_u_rule(0.0, r * r, n_r),
        Domain::Annulus(r_in) => radial_log_rule(r_in, 1.0, n_r),
        Domain::PuncturedDisc => radial_graded_rule(1.0, n_r, DEFAULT_U_MIN),
    };
    Ok(tensor_grid(domain, rule, n_r, n_theta))
}

/// Graded variant for disc-type domains, used when integrands carry an
/// algebraic singularity at the origin (singular radial weights). `u_min`
/// is the graded depth in the squared-radius variable.
pub fn build_grid_graded(
    domain: Domain,
    n_r: usize,
    n_theta: usize,
    u_min: f64,
) -> Result<QuadGrid> {
    if n_r < 4 || n_theta < 8 {
        return Err(PbergError::Parameter(format!(
            "grid sizes too small: n_r = {n_r}, n_theta = {n_theta}"
        )));
    }
    let outer = match domain {
        Domain::UnitDisc | Domain::PuncturedDisc => 1.0,
        Domain::Disc(r) => r,
        Domain::Annulus(_) => {
            return Err(PbergError::UnsupportedDomain(
                "graded grids are for disc-type domains".into(),
            ))
        }
    };
    if !(u_min > 0.0 && u_min < outer * outer / 4.0) {
        return Err(PbergError::Parameter(format!("invalid graded depth {u_min}")));
    }
    Ok(tensor_grid(domain, radial_graded_rule(outer, n_r, u_min), n_r, n_theta))
}

/// Quadrature over the radial band `{lo <= |z| <= hi}` intersected with the
/// domain. Used for exact restricted integrals over rotationally symmetric
/// regions (node-level masks quantize areas; this does not).
pub fn band_grid(
    domain: Domain,
    lo: f64,
    hi: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<QuadGrid> {
    if n_r < 4 || n_theta < 8 {
        return Err(PbergError::Parameter(format!(
            "grid sizes too small: n_r = {n_r}, n_theta = {n_theta}"
        )));
    }
    let lo_eff = lo.max(domain.inner_radius());
    let hi_eff = hi.min(domain.outer_radius());
    if !(hi_eff > lo_eff) {
        return Err(PbergError::EmptyRegion);
    }
    let rule = match domain {
        Domain::UnitDisc | Domain::Disc(_) => radial_u_rule(lo_eff * lo_eff, hi_eff * hi_eff, n_r),
        Domain::Annulus(_) => radial_log_rule(lo_eff, hi_eff, n_r),
        Domain::PuncturedDisc => {
            if lo_eff <= 0.0 {
                radial_graded_rule(hi_eff, n_r, DEFAULT_U_MIN)
            } else {
                radial_u_rule(lo_eff * lo_eff, hi_eff * hi_eff, n_r)
            }
        }
    };
    Ok(tensor_grid(domain, rule, n_r, n_theta))
}

/// `m` uniform nodes on the boundary circle with arc-length weights
/// `2 pi R / m`. Only disc-type boundaries are supported; the Hardy-space
/// machinery downstream is restricted to those.
pub fn boundary_grid(domain: Domain, m: usize) -> Result<QuadGrid> {
    if m < 16 {
        return Err(PbergError::Parameter(format!("boundary count {m} < 16")));
    }
    let radius = match domain {
        Domain::UnitDisc => 1.0,
        Domain::Disc(r) => r,
        Domain::Annulus(_) | Domain::PuncturedDisc => {
            return Err(PbergError::UnsupportedDomain(
                "boundary Hardy norms are only supported on discs".into(),
            ))
        }
    };
    let (nodes, weights) = circle_rule(radius, m);
    Ok(QuadGrid {
        domain,
        nodes: Vec::new(),
        weights: Vec::new(),
        boundary_nodes: nodes,
        boundary_weights: weights,
        provenance: (0, m),
        radii: Vec::new(),
    })
}

/// Uniform arc-length rule on the circle `|z| = radius`.
pub fn circle_rule(radius: f64, m: usize) -> (Vec<Complex64>, Vec<f64>) {
    let w = 2.0 * PI * radius / m as f64;
    let nodes = (0..m)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / m as f64))
        .collect();
    (nodes, vec![w; m])
}

/// Restricts `grid` to the nodes lying in `region`; weights are unchanged.
pub fn mask(grid: &QuadGrid, region: &Region) -> Result<QuadGrid> {
    region.validate(&grid.domain)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (&z, &w) in grid.nodes.iter().zip(&grid.weights) {
        if region.contains(z) {
            nodes.push(z);
            weights.push(w);
        }
    }
    if nodes.is_empty() {
        return Err(PbergError::EmptyRegion);
    }
    let mut radii: Vec<f64> = nodes.iter().map(|z| z.norm()).collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    Ok(QuadGrid {
        domain: grid.domain,
        nodes,
        weights,
        boundary_nodes: Vec::new(),
        boundary_weights: Vec::new(),
        provenance: grid.provenance,
        radii,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_matches_reference_degree_3() {
        let (x, w) = gauss_legendre(3);
        let x_ref = [-0.7745966692414834, 0.0, 0.7745966692414834];
        let w_ref = [0.5555555555555556, 0.8888888888888888, 0.5555555555555556];
        for i in 0..3 {
            assert_abs_diff_eq!(x[i], x_ref[i], epsilon = 1e-14);
            assert_abs_diff_eq!(w[i], w_ref[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        // degree 2n-1 exactness
        let (x, w) = gauss_legendre(10);
        let int: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(18)).sum();
        assert_abs_diff_eq!(int, 2.0 / 19.0, epsilon = 1e-14);
    }

    #[test]
    fn disc_grid_area_and_moment() {
        let g = build_grid(Domain::UnitDisc, 32, 64).unwrap();
        assert_abs_diff_eq!(g.total_weight(), PI, epsilon = 1e-12);
        let m2: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(z, &w)| w * z.norm_sqr())
            .sum();
        assert_abs_diff_eq!(m2, PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn annulus_grid_area() {
        let g = build_grid(Domain::Annulus(0.5), 32, 64).unwrap();
        assert_abs_diff_eq!(g.total_weight(), PI * 0.75, epsilon = 1e-10);
    }

    #[test]
    fn punctured_grid_area_and_no_origin() {
        let g = build_grid(Domain::PuncturedDisc, 32, 64).unwrap();
        assert_abs_diff_eq!(g.total_weight(), PI, epsilon = 1e-10);
        assert!(g.nodes.iter().all(|z| z.norm() > 0.0));
    }

    #[test]
    fn monomial_exactness_on_disc() {
        // ∫_D z^a conj(z)^b = 0 for a != b and pi/(a+1) for a = b <= 2 n_r - 2.
        let n_r = 8;
        let g = build_grid(Domain::UnitDisc, n_r, 64).unwrap();
        for a in 0..=(2 * n_r - 2) {
            let int: Complex64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .map(|(z, &w)| w * z.powi(a as i32) * z.conj().powi(a as i32))
                .sum();
            assert_abs_diff_eq!(int.re, PI / (a as f64 + 1.0), epsilon = 1e-12);
            assert_abs_diff_eq!(int.im, 0.0, epsilon = 1e-12);
        }
        let cross: Complex64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(z, &w)| w * z.powi(3) * z.conj().powi(5))
            .sum();
        assert!(cross.norm() < 1e-12);
    }

    #[test]
    fn punctured_grid_resolves_fractional_singularity() {
        // ∫_{D*} |z|^{-p k_p} for p = 1.5: density r^{-1.5}, total 2 pi / 0.5.
        let g = build_grid(Domain::PuncturedDisc, 32, 64).unwrap();
        let int: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(z, &w)| w * z.norm().powf(-1.5))
            .sum();
        let exact = 2.0 * PI / 0.5;
        // truncated singular mass below the graded depth is ~ u_min^(1 - p k_p / 2)
        assert!((int - exact).abs() / exact < 1e-5, "rel err {}", (int - exact).abs() / exact);
    }

    #[test]
    fn refinement_does_not_worsen_area() {
        for domain in [Domain::UnitDisc, Domain::Annulus(0.5), Domain::PuncturedDisc] {
            let errs: Vec<f64> = [8usize, 16, 32]
                .iter()
                .map(|&n| {
                    let g = build_grid(domain, n, 32).unwrap();
                    (g.total_weight() - domain.area()).abs()
                })
                .collect();
            assert!(errs[1] <= errs[0] + 1e-13);
            assert!(errs[2] <= errs[1] + 1e-13);
        }
    }

    #[test]
    fn boundary_grid_sums() {
        let g = boundary_grid(Domain::UnitDisc, 128).unwrap();
        assert_abs_diff_eq!(g.total_boundary_weight(), 2.0 * PI, epsilon = 1e-12);
        let re_sum: f64 = g
            .boundary_nodes
            .iter()
            .zip(&g.boundary_weights)
            .map(|(z, &w)| w * z.re)
            .sum();
        assert_abs_diff_eq!(re_sum, 0.0, epsilon = 1e-12);

        let g2 = boundary_grid(Domain::Disc(2.0), 64).unwrap();
        assert_abs_diff_eq!(g2.total_boundary_weight(), 4.0 * PI, epsilon = 1e-12);

        assert!(boundary_grid(Domain::Annulus(0.5), 64).is_err());
        assert!(boundary_grid(Domain::UnitDisc, 8).is_err());
    }

    #[test]
    fn mask_areas_and_partition() {
        // Node-level masking quantizes the area; a fine radial rule keeps the
        // error under the documented 2e-3.
        let g = build_grid(Domain::UnitDisc, 4096, 16).unwrap();
        let e = Region::SubDisc(0.5);
        let inside = mask(&g, &e).unwrap();
        assert!((inside.total_weight() - PI / 4.0).abs() < 2e-3);
        let outside = mask(&g, &Region::Complement(Box::new(e.clone()))).unwrap();
        assert!((outside.total_weight() - 3.0 * PI / 4.0).abs() < 2e-3);
        // exact partition
        assert_abs_diff_eq!(
            inside.total_weight() + outside.total_weight(),
            g.total_weight(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn degenerate_band_is_empty() {
        let g = build_grid(Domain::UnitDisc, 32, 64).unwrap();
        let band = Region::AnnularBand(0.5, 0.5);
        match mask(&g, &band) {
            Err(PbergError::EmptyRegion) => {}
            other => panic!("expected EmptyRegion, got {other:?}"),
        }
    }

    #[test]
    fn invalid_grid_sizes_rejected() {
        assert!(build_grid(Domain::UnitDisc, 3, 64).is_err());
        assert!(build_grid(Domain::UnitDisc, 32, 4).is_err());
    }
}
