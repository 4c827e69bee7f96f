//! Tolerance-aware dense linear algebra: symmetric eigendecomposition,
//! Moore-Penrose pseudoinverse, numerical rank and nullspaces.
//!
//! Eigen- and singular-value decompositions are delegated to `nalgebra`.
//! Everything built on top (zero thresholds, pseudoinversion, subspace
//! comparison) lives here so that every consumer uses the same policy.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::scalar::{abs, abs_floor, epsilon, from_f64, from_usize, max_abs, scale_of, to_f64, Real};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub eigenvalues: DVector<T>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: DMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<T> {
        let u = &self.eigenvectors;
        u * DMatrix::from_diagonal(&self.eigenvalues) * u.transpose()
    }

    /// Number of eigenvalues at or below the zero threshold.
    pub fn zero_count(&self, policy: TolPolicy<T>) -> usize {
        let thr = policy.threshold(self.eigenvalues.len(), self.spectral_radius());
        self.eigenvalues.iter().filter(|&&l| abs(l) <= thr).count()
    }

    fn spectral_radius(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |m, &l| m.max(abs(l)))
    }
}

/// Rule deciding which eigen/singular values count as zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TolPolicy<T> {
    /// `λ <= n · eps · λ_max`.
    #[default]
    Standard,
    /// `λ <= rel · λ_max`.
    Relative(T),
    /// `λ <= abs`.
    Absolute(T),
}

impl<T: Real> TolPolicy<T> {
    pub fn threshold(self, n: usize, largest: T) -> T {
        match self {
            TolPolicy::Standard => from_usize::<T>(n.max(1)) * epsilon::<T>() * largest,
            TolPolicy::Relative(rel) => rel * largest,
            TolPolicy::Absolute(a) => a,
        }
    }
}

/// Largest entry of `|A - Aᵀ|` (square input assumed).
pub fn asymmetry<T: Real>(a: &DMatrix<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(abs(a[(i, j)] - a[(j, i)]));
        }
    }
    worst
}

fn require_square<T: Real>(a: &DMatrix<T>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

fn require_symmetric<T: Real>(a: &DMatrix<T>) -> Result<()> {
    require_square(a)?;
    let rel = from_f64::<T>(1e-12).max(epsilon::<T>() * from_f64(8.0));
    let allowed = rel * scale_of(a);
    let found = asymmetry(a);
    if found > allowed {
        return Err(Error::NotSymmetric {
            max_asymmetry: to_f64(found),
            allowed: to_f64(allowed),
        });
    }
    Ok(())
}

/// Symmetric eigendecomposition with ascending eigenvalues.
pub fn eig_symmetric<T: Real>(a: &DMatrix<T>) -> Result<EigenDecomposition<T>> {
    require_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    // Symmetrize exactly so the solver sees a bitwise-symmetric input.
    let sym = (a + a.transpose()) * from_f64::<T>(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[x]
            .partial_cmp(&eig.eigenvalues[y])
            .expect("finite eigenvalues")
            .then(x.cmp(&y))
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Moore-Penrose pseudoinverse of a symmetric matrix, by inverting the
/// eigenvalues above the policy threshold.
pub fn pseudoinverse<T: Real>(a: &DMatrix<T>, policy: TolPolicy<T>) -> Result<DMatrix<T>> {
    let eig = eig_symmetric(a)?;
    Ok(pinv_from_eig(&eig, policy))
}

pub fn pinv_from_eig<T: Real>(eig: &EigenDecomposition<T>, policy: TolPolicy<T>) -> DMatrix<T> {
    let n = eig.eigenvalues.len();
    let thr = policy.threshold(n, eig.spectral_radius());
    let inv = eig
        .eigenvalues
        .map(|l| if abs(l) <= thr { T::zero() } else { T::one() / l });
    let u = &eig.eigenvectors;
    let p = u * DMatrix::from_diagonal(&inv) * u.transpose();
    // Exact symmetry keeps the Penrose symmetry axioms at rounding level.
    (&p + p.transpose()) * from_f64::<T>(0.5)
}

fn singular_values<T: Real>(a: &DMatrix<T>) -> DVector<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(0);
    }
    SVD::new(a.clone(), false, false).singular_values
}

/// Numerical rank: singular values above `max(m, n) · eps · σ_max`.
pub fn rank<T: Real>(a: &DMatrix<T>) -> usize {
    rank_with(a, TolPolicy::Standard)
}

pub fn rank_with<T: Real>(a: &DMatrix<T>, policy: TolPolicy<T>) -> usize {
    let sv = singular_values(a);
    let largest = sv.iter().fold(T::zero(), |m, &s| m.max(s));
    let thr = policy.threshold(a.nrows().max(a.ncols()), largest);
    sv.iter().filter(|&&s| s > thr).count()
}

/// Smallest singular value (zero for matrices with more columns than rows).
pub fn min_singular_value<T: Real>(a: &DMatrix<T>) -> T {
    if a.ncols() > a.nrows() {
        return T::zero();
    }
    singular_values(a)
        .iter()
        .fold(None, |m: Option<T>, &s| Some(m.map_or(s, |m| m.min(s))))
        .unwrap_or(T::zero())
}

/// Orthonormal basis of the nullspace of `a` (one column per dimension).
///
/// Computed from the right singular vectors of `a` padded with zero rows to
/// a square matrix, independently of any eigendecomposition.
pub fn nullspace_oracle<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let rows = m.max(n);
    let padded = DMatrix::from_fn(rows, n, |r, c| if r < m { a[(r, c)] } else { T::zero() });
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let largest = svd.singular_values.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let thr = TolPolicy::Standard.threshold(rows, largest);
    let mut null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= thr)
        .collect();
    null.sort_unstable();
    DMatrix::from_fn(n, null.len(), |r, c| v_t[(null[c], r)])
}

/// Orthonormal basis of the column space of `a`.
pub fn column_basis<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let largest = svd.singular_values.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let thr = TolPolicy::Standard.threshold(m.max(n), largest);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > thr)
        .collect();
    DMatrix::from_fn(m, keep.len(), |r, c| u[(r, keep[c])])
}

/// Largest residual of projecting the orthonormal columns of `q` onto the
/// span of the orthonormal columns of `basis`.
fn projection_residual<T: Real>(q: &DMatrix<T>, basis: &DMatrix<T>) -> T {
    if q.ncols() == 0 {
        return T::zero();
    }
    if basis.ncols() == 0 {
        return max_abs(q);
    }
    let proj = basis * (basis.transpose() * q);
    max_abs(&(q - proj))
}

/// True iff `a` and `b` span the same column space: equal numerical ranks
/// and mutual projection residuals below `tol`.
pub fn column_space_equal<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: T) -> bool {
    if a.nrows() != b.nrows() {
        return false;
    }
    let qa = column_basis(a);
    let qb = column_basis(b);
    qa.ncols() == qb.ncols() && projection_residual(&qa, &qb) <= tol && projection_residual(&qb, &qa) <= tol
}

/// The four Penrose residuals `‖AXA−A‖, ‖XAX−X‖, ‖(AX)ᵀ−AX‖, ‖(XA)ᵀ−XA‖`
/// in the max-entry norm.
pub fn penrose_residuals<T: Real>(a: &DMatrix<T>, x: &DMatrix<T>) -> [T; 4] {
    let ax = a * x;
    let xa = x * a;
    [
        max_abs(&(&ax * a - a)),
        max_abs(&(&xa * x - x)),
        max_abs(&(ax.transpose() - &ax)),
        max_abs(&(xa.transpose() - &xa)),
    ]
}

/// `I - J/n`, the orthogonal projector onto the complement of `span{1}`.
pub fn centering_projector<T: Real>(n: usize) -> DMatrix<T> {
    let inv = T::one() / from_usize::<T>(n);
    DMatrix::from_fn(n, n, |i, j| if i == j { T::one() - inv } else { -inv })
}

/// Relative-with-floor bound `max(tol · scale, floor)`.
pub fn bound<T: Real>(tol: T, scale: T) -> T {
    (tol * scale).max(abs_floor())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CirculantSpec, Graph};

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && max_abs(&(a - b)) < tol
    }

    #[test]
    fn eigen_examples() {
        let e = eig_symmetric(&DMatrix::<f64>::identity(3, 3)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));

        let c4 = Graph::<f64>::cycle(4).unwrap().laplacian();
        let e = eig_symmetric(&c4).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }

        let k4 = Graph::<f64>::complete(4).unwrap().laplacian();
        let e = eig_symmetric(&k4).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([0.0, 4.0, 4.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_invariants_hold() {
        let l = CirculantSpec::<f64>::unweighted(17, &[1, 3, 4])
            .unwrap()
            .compile()
            .laplacian();
        let e = eig_symmetric(&l).unwrap();
        let u = &e.eigenvectors;
        assert!(max_abs(&(u.transpose() * u - DMatrix::identity(17, 17))) < 1e-10);
        assert!(max_abs(&(e.reconstruct() - &l)) < 1e-9 * scale_of(&l));
        assert!(e.eigenvalues[0].abs() < 1e-12 && e.eigenvalues[1] > 1e-6);
        assert_eq!(e.zero_count(TolPolicy::Standard), 1);
    }

    #[test]
    fn eigen_rejects_asymmetric_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(eig_symmetric(&a), Err(Error::NotSymmetric { .. })));
        let r = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(eig_symmetric(&r), Err(Error::NotSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn pseudoinverse_examples() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(pseudoinverse(&z, TolPolicy::Standard).unwrap(), z);

        let k4 = Graph::<f64>::complete(4).unwrap().laplacian();
        let p = pseudoinverse(&k4, TolPolicy::Standard).unwrap();
        assert!(close(&p, &(&k4 / 16.0), 1e-12));

        let c4 = Graph::<f64>::cycle(4).unwrap().laplacian();
        let p = pseudoinverse(&c4, TolPolicy::Standard).unwrap();
        let row: Vec<f64> = p.row(0).iter().copied().collect();
        for (got, want) in row.iter().zip([0.3125, -0.0625, -0.1875, -0.0625]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn penrose_axioms_on_weighted_graph() {
        let g = Graph::new(
            5,
            [
                (0, 1, 0.5),
                (1, 2, 2.0),
                (2, 3, 1.5),
                (3, 4, 3.0),
                (0, 4, 0.25),
                (1, 3, 1.0),
            ],
        )
        .unwrap();
        let l = g.laplacian();
        let p = pseudoinverse(&l, TolPolicy::Standard).unwrap();
        let bound = 1e-9 * scale_of(&l);
        assert!(penrose_residuals(&l, &p).iter().all(|&r| r < bound));
        assert!(close(&(&l * &p), &centering_projector(5), 1e-9));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&DMatrix::<f64>::identity(5, 5)), 5);
        assert_eq!(rank(&Graph::<f64>::cycle(6).unwrap().laplacian()), 5);
        let two = CirculantSpec::<f64>::unweighted(6, &[2]).unwrap().compile();
        assert_eq!(rank(&two.laplacian()), 4);
        assert_eq!(rank(&DMatrix::<f64>::zeros(3, 2)), 0);
    }

    #[test]
    fn nullspace_examples() {
        let l = Graph::<f64>::cycle(7).unwrap().laplacian();
        let b = nullspace_oracle(&l);
        assert_eq!(b.ncols(), 1);
        let c = b[(0, 0)];
        assert!(b.iter().all(|&v| (v - c).abs() < 1e-12));

        assert_eq!(nullspace_oracle(&DMatrix::<f64>::identity(3, 3)).ncols(), 0);

        let l8 = Graph::<f64>::cycle(8).unwrap().laplacian();
        let sampled = crate::graph::select_rows(&l8, &[0, 1, 3, 4, 6]);
        let b = nullspace_oracle(&sampled);
        assert_eq!(b.ncols(), 3);
        assert!(max_abs(&(&sampled * &b)) < 1e-9 * scale_of(&sampled));
    }

    #[test]
    fn column_space_examples() {
        let b = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 2.0, 1.0, 0.0, 3.0, -1.0, 1.0]);
        let r = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 4.0]);
        assert!(column_space_equal(&b, &(&b * r), 1e-10));

        let ones = DMatrix::<f64>::from_element(5, 1, 1.0);
        let e0 = DMatrix::<f64>::from_fn(5, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        assert!(!column_space_equal(&ones, &e0, 1e-8));
        assert!(!column_space_equal(&b, &b.columns(0, 1).into_owned(), 1e-8));
        assert!(column_space_equal(
            &DMatrix::<f64>::zeros(3, 0),
            &DMatrix::zeros(3, 0),
            1e-8
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let l = Graph::<f32>::cycle(6).unwrap().laplacian();
        let p = pseudoinverse(&l, TolPolicy::Standard).unwrap();
        let res = penrose_residuals(&l, &p);
        assert!(res.iter().all(|&r| r < 1e-5), "{res:?}");
        assert_eq!(rank(&l), 5);
    }
}
