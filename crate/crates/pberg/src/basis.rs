//! Truncated holomorphic bases adapted to each domain.
//!
//! Discs carry monomial bases. The annulus carries a symmetric Laurent basis.
//! The punctured disc carries the Laurent basis of `A^p`: negative powers are
//! admissible exactly down to `z^{-k_p}` with `k_p = max{k in Z^+ : k < 2/p}`,
//! and for `p >= 2` the negative powers disappear (removable singularity, the
//! space coincides with `A^p` of the full disc).
//!
//! Raw power bases become exponentially ill-conditioned with degree, so every
//! solve first orthonormalizes against the discrete `L^2` inner product of a
//! grid (column scaling followed by Cholesky of the scaled Gram).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::domain::Domain;
use crate::error::{PbergError, Result};
use crate::quad::QuadGrid;

/// Condition-number limit on the (scaled) Gram before orthonormalization
/// refuses to proceed.
pub const GRAM_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Monomial { max_degree: i32 },
    Laurent { min_power: i32, max_degree: i32 },
}

/// An ordered, finite family of holomorphic functions on a domain. Elements
/// are linear combinations of integer powers of `z`; the combination matrix
/// is upper triangular so truncated prefixes stay nested.
#[derive(Debug, Clone)]
pub struct Basis {
    pub kind: BasisKind,
    pub domain: Domain,
    /// Raw powers, ascending.
    pub powers: Vec<i32>,
    /// Optional change of basis: element `j` is `sum_k z^powers[k] * T[(k, j)]`.
    transform: Option<DMatrix<Complex64>>,
}

/// Largest positive integer strictly below `2/p`: the deepest admissible pole
/// order in `A^p` of the punctured disc.
pub fn k_cut(p: f64) -> Result<i32> {
    if !(p > 0.0 && p < 2.0) {
        return Err(PbergError::Parameter(format!(
            "k_cut requires 0 < p < 2 (A^p(D*) has no negative powers for p >= 2), got {p}"
        )));
    }
    let q = 2.0 / p;
    // Snap tolerance guards boundary cases such as p = 2/3 where floating
    // point puts 2/p a few ulps above the integer.
    let k = (q - 1e-9).floor() as i32;
    Ok(k.max(1))
}

/// Builds the truncated basis adapted to `domain` at exponent `p`.
pub fn make_basis(domain: Domain, p: f64, max_degree: i32) -> Result<Basis> {
    if max_degree < 2 {
        return Err(PbergError::Parameter(format!(
            "basis degree must be >= 2, got {max_degree}"
        )));
    }
    let (kind, powers) = match domain {
        Domain::UnitDisc | Domain::Disc(_) => (
            BasisKind::Monomial { max_degree },
            (0..=max_degree).collect::<Vec<_>>(),
        ),
        Domain::Annulus(_) => (
            BasisKind::Laurent {
                min_power: -max_degree,
                max_degree,
            },
            (-max_degree..=max_degree).collect(),
        ),
        Domain::PuncturedDisc => {
            if p >= 2.0 {
                // The spaces coincide with those of the full disc.
                (
                    BasisKind::Monomial { max_degree },
                    (0..=max_degree).collect(),
                )
            } else {
                let k = k_cut(p)?;
                (
                    BasisKind::Laurent {
                        min_power: -k,
                        max_degree,
                    },
                    (-k..=max_degree).collect(),
                )
            }
        }
    };
    Ok(Basis {
        kind,
        domain,
        powers,
        transform: None,
    })
}

impl Basis {
    pub fn len(&self) -> usize {
        match &self.transform {
            Some(t) => t.ncols(),
            None => self.powers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn raw_eval(&self, z: Complex64) -> DVector<Complex64> {
        DVector::from_iterator(self.powers.len(), self.powers.iter().map(|&k| z.powi(k)))
    }

    fn raw_deriv(&self, z: Complex64) -> DVector<Complex64> {
        DVector::from_iterator(
            self.powers.len(),
            self.powers.iter().map(|&k| {
                if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(k as f64, 0.0) * z.powi(k - 1)
                }
            }),
        )
    }

    /// Values of all basis elements at `z` (a row of the evaluation matrix).
    pub fn eval(&self, z: Complex64) -> DVector<Complex64> {
        let raw = self.raw_eval(z);
        match &self.transform {
            Some(t) => t.tr_mul_unchecked(&raw),
            None => raw,
        }
    }

    /// Derivatives of all basis elements at `z`.
    pub fn eval_deriv(&self, z: Complex64) -> DVector<Complex64> {
        let raw = self.raw_deriv(z);
        match &self.transform {
            Some(t) => t.tr_mul_unchecked(&raw),
            None => raw,
        }
    }

    /// Function value of the combination `sum_j c_j b_j` at `z`.
    pub fn func_value(&self, coeffs: &DVector<Complex64>, z: Complex64) -> Complex64 {
        self.eval(z).dot_no_conj(coeffs)
    }

    /// Dense evaluation matrix `B[i, j] = b_j(node_i)` over a grid.
    pub fn eval_matrix(&self, grid: &QuadGrid) -> DMatrix<Complex64> {
        self.eval_matrix_at(&grid.nodes)
    }

    pub fn eval_matrix_at(&self, points: &[Complex64]) -> DMatrix<Complex64> {
        let raw = DMatrix::from_fn(points.len(), self.powers.len(), |i, j| {
            points[i].powi(self.powers[j])
        });
        match &self.transform {
            Some(t) => &raw * t,
            None => raw,
        }
    }

    pub fn deriv_matrix_at(&self, points: &[Complex64]) -> DMatrix<Complex64> {
        let raw = DMatrix::from_fn(points.len(), self.powers.len(), |i, j| {
            let k = self.powers[j];
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(k as f64, 0.0) * points[i].powi(k - 1)
            }
        });
        match &self.transform {
            Some(t) => &raw * t,
            None => raw,
        }
    }

    /// Truncates to the first `n` elements (nested span).
    pub fn truncate(&self, n: usize) -> Basis {
        assert!(n <= self.len());
        match &self.transform {
            Some(t) => Basis {
                kind: self.kind,
                domain: self.domain,
                powers: self.powers.clone(),
                transform: Some(t.columns(0, n).into_owned()),
            },
            None => Basis {
                kind: self.kind,
                domain: self.domain,
                powers: self.powers[..n].to_vec(),
                transform: None,
            },
        }
    }
}

/// Discrete `L^2(grid)` Gram matrix of a basis.
pub fn gram_matrix(basis: &Basis, grid: &QuadGrid) -> DMatrix<Complex64> {
    let b = basis.eval_matrix(grid);
    weighted_gram(&b, &grid.weights)
}

/// `G = B^H diag(w) B` for arbitrary node weights `w`.
pub fn weighted_gram(b: &DMatrix<Complex64>, w: &[f64]) -> DMatrix<Complex64> {
    let n = b.ncols();
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        for k in j..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..b.nrows() {
                acc += w[i] * b[(i, j)].conj() * b[(i, k)];
            }
            g[(j, k)] = acc;
            if j != k {
                g[(k, j)] = acc.conj();
            }
        }
    }
    g
}

/// Orthonormalizes `basis` against the discrete `L^2` inner product of
/// `grid`. Columns are scaled to unit norm first, then the scaled Gram is
/// Cholesky-factored; the returned basis spans the same space and its
/// discrete Gram is the identity to roundoff.
pub fn orthonormalize(basis: &Basis, grid: &QuadGrid) -> Result<Basis> {
    let g = gram_matrix(basis, grid);
    let n = g.nrows();
    let mut scale = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        let d = g[(j, j)].re;
        if !(d > 0.0) || !d.is_finite() {
            return Err(PbergError::IllConditioned {
                cond: f64::INFINITY,
                limit: GRAM_COND_LIMIT,
            });
        }
        scale[j] = Complex64::new(1.0 / d.sqrt(), 0.0);
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
    let chol = nalgebra::Cholesky::new(gs).ok_or(PbergError::IllConditioned {
        cond,
        limit: GRAM_COND_LIMIT,
    })?;
    // new basis = old * diag(scale) * L^{-H}; upper triangular, nesting kept
    let l = chol.l();
    let mut t = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        t[(j, j)] = scale[j];
    }
    // T <- T * L^{-H}: solve T_new L^H = T row-wise, i.e. L conj = ...
    // easier: L^{-H} = (L^H)^{-1}; compute by back-substitution on columns.
    let lh = l.adjoint();
    let tnew = solve_upper_triangular(&lh, &t);
    let combined = match &basis.transform {
        Some(prev) => prev * &tnew,
        None => tnew,
    };
    Ok(Basis {
        kind: basis.kind,
        domain: basis.domain,
        powers: basis.powers.clone(),
        transform: Some(combined),
    })
}

/// Solves `U X = B` for upper-triangular `U` (returns `U^{-1} B`).
fn solve_upper_triangular(
    u: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let n = u.nrows();
    let mut x = b.clone();
    for col in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut acc = x[(i, col)];
            for k in (i + 1)..n {
                acc -= u[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = acc / u[(i, i)];
        }
    }
    x
}

/// Condition number of a Hermitian positive semidefinite matrix via its
/// eigenvalues.
pub fn hermitian_condition(g: &DMatrix<Complex64>) -> f64 {
    let eig = g.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Small extension trait: nalgebra's `dot` conjugates, the holomorphic
/// pairing here must not.
pub trait DotNoConj {
    fn dot_no_conj(&self, other: &Self) -> Complex64;
}

impl DotNoConj for DVector<Complex64> {
    fn dot_no_conj(&self, other: &Self) -> Complex64 {
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }
}

/// `transpose(T) * v` without conjugation.
trait TrMulUnchecked {
    fn tr_mul_unchecked(&self, v: &DVector<Complex64>) -> DVector<Complex64>;
}

impl TrMulUnchecked for DMatrix<Complex64> {
    fn tr_mul_unchecked(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::from_element(self.ncols(), Complex64::new(0.0, 0.0));
        for j in 0..self.ncols() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..self.nrows() {
                acc += self[(i, j)] * v[i];
            }
            out[j] = acc;
        }
        out
    }
}
