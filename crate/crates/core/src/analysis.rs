//! The cosparse analysis model with the Laplacian as analysis operator.
//!
//! For a connected graph and a cosupport `Λ`, the signals annihilated by the
//! rows `Λ` of `L` form
//!
//! ```text
//! N(Ψ_Λ L) = span{1} ⊕ L† Ψ_{Λ^∁}ᵀ W
//! ```
//!
//! where `W` is the `m x (m-1)` zero-column-sum matrix built by [`w_matrix`]
//! (`m = |Λ^∁|`). This module builds that basis, measures cosparsity, and
//! provides the subspace-dimension (`κ`) and spark measures together with
//! brute-force and randomized checks of the resulting uniqueness bound.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{sampling_matrix, select_columns, select_rows, Cosupport, Graph};
use crate::linalg::{column_basis, min_singular_value, nullspace_oracle, pseudoinverse, rank, TolPolicy};
use crate::scalar::{abs, abs_floor, from_usize, max_abs_slice, Real, Ring};

/// The `m x (m-1)` basis matrix of zero-sum vectors: column `k` holds
/// `m-1-k` on row `k`, `-1` below it and zeros above.
pub fn w_matrix<T: Ring>(m: usize) -> DMatrix<T> {
    w_matrix_with_offset(m, 0)
}

/// [`w_matrix`] with `offset` added to every diagonal entry. Nonzero offsets
/// break the zero-sum property; used as a negative control.
pub fn w_matrix_with_offset<T: Ring>(m: usize, offset: i64) -> DMatrix<T> {
    assert!(m >= 1, "support must be nonempty");
    let off = T::from_i64(offset).expect("small offset");
    DMatrix::from_fn(m, m - 1, |r, c| {
        if r == c {
            from_usize::<T>(m - 1 - c) + off
        } else if r > c {
            -T::one()
        } else {
            T::zero()
        }
    })
}

/// Basis of `N(Ψ_Λ L)`: the constant vector plus `|Λ^∁| - 1` smooth columns.
#[derive(Debug, Clone)]
pub struct NullspaceBasis<T: Real> {
    pub constant_part: DVector<T>,
    /// `L† Ψ_{Λ^∁}ᵀ W`.
    pub smooth_part: DMatrix<T>,
    pub cosupport: Cosupport,
}

impl<T: Real> NullspaceBasis<T> {
    /// `[1 | smooth_part]`.
    pub fn matrix(&self) -> DMatrix<T> {
        let n = self.constant_part.len();
        let k = self.smooth_part.ncols();
        DMatrix::from_fn(n, k + 1, |r, c| {
            if c == 0 {
                self.constant_part[r]
            } else {
                self.smooth_part[(r, c - 1)]
            }
        })
    }

    pub fn dimension(&self) -> usize {
        rank(&self.matrix())
    }

    /// The signal `z·1 + smooth_part·c`.
    pub fn combine(&self, z: T, c: &[T]) -> Result<DVector<T>> {
        if c.len() != self.smooth_part.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.smooth_part.ncols(),
                found: c.len(),
            });
        }
        let coeffs = DVector::from_column_slice(c);
        Ok(&self.constant_part * z + &self.smooth_part * coeffs)
    }
}

fn require_proper(lam: &Cosupport) -> Result<()> {
    if lam.complement().is_empty() {
        return Err(Error::FullCosupport);
    }
    Ok(())
}

/// Builds the nullspace basis of `Ψ_Λ L` for a connected graph.
pub fn prop1_basis<T: Real>(g: &Graph<T>, lam: &Cosupport) -> Result<NullspaceBasis<T>> {
    g.require_connected()?;
    check_size(g.n(), lam)?;
    require_proper(lam)?;
    let l_pinv = pseudoinverse(&g.laplacian(), TolPolicy::Standard)?;
    prop1_basis_with_pinv(&l_pinv, lam)
}

/// Same as [`prop1_basis`] with a precomputed `L†`; the caller guarantees
/// the graph is connected.
pub fn prop1_basis_with_pinv<T: Real>(l_pinv: &DMatrix<T>, lam: &Cosupport) -> Result<NullspaceBasis<T>> {
    check_size(l_pinv.nrows(), lam)?;
    require_proper(lam)?;
    let w = w_matrix(lam.complement().len());
    basis_from_w(l_pinv, lam, &w)
}

/// Assembles `[1 | L† Ψᵀ w]` for an arbitrary `w` with `|Λ^∁|` rows.
pub fn basis_from_w<T: Real>(l_pinv: &DMatrix<T>, lam: &Cosupport, w: &DMatrix<T>) -> Result<NullspaceBasis<T>> {
    let n = l_pinv.nrows();
    let support = lam.complement();
    if w.nrows() != support.len() {
        return Err(Error::DimensionMismatch {
            expected: support.len(),
            found: w.nrows(),
        });
    }
    // L† Ψᵀ w only touches the support columns of L†.
    let smooth_part = select_columns(l_pinv, support) * w;
    Ok(NullspaceBasis {
        constant_part: DVector::from_element(n, T::one()),
        smooth_part,
        cosupport: lam.clone(),
    })
}

fn check_size(n: usize, lam: &Cosupport) -> Result<()> {
    if lam.n() != n {
        return Err(Error::SizeMismatch(lam.n(), n));
    }
    Ok(())
}

/// `n x (m-1)` basis of consecutive differences `e_{a_k} - e_{a_{k+1}}` over
/// the sorted support `a = Λ^∁`.
pub fn pairwise_difference_basis<T: Ring>(lam: &Cosupport) -> Result<DMatrix<T>> {
    let support = lam.complement();
    if support.len() < 2 {
        return Err(Error::SupportTooSmall {
            needed: 2,
            found: support.len(),
        });
    }
    let mut b = DMatrix::zeros(lam.n(), support.len() - 1);
    for (c, (&a, &next)) in support.iter().tuple_windows().enumerate() {
        b[(a, c)] = T::one();
        b[(next, c)] = -T::one();
    }
    Ok(b)
}

/// `Ψ_{Λ^∁}ᵀ W`, the zero-sum coefficient vectors embedded in `R^n`.
pub fn embedded_w<T: Ring>(lam: &Cosupport) -> DMatrix<T> {
    let support = lam.complement();
    sampling_matrix::<T>(lam.n(), support).transpose() * w_matrix::<T>(support.len().max(1))
}

/// Cosparsity of `x` under `lap`: `l = #{i : |(Lx)_i| <= max(tol·‖Lx‖_∞, floor)}`
/// and the cosupport holding those indices.
pub fn cosparsity<T: Real>(lap: &DMatrix<T>, x: &DVector<T>, tol: T) -> Result<(usize, Cosupport)> {
    if x.len() != lap.ncols() {
        return Err(Error::DimensionMismatch {
            expected: lap.ncols(),
            found: x.len(),
        });
    }
    let y = lap * x;
    let thr = (tol * max_abs_slice(y.as_slice())).max(abs_floor());
    let zeros: Vec<usize> = (0..y.len()).filter(|&i| abs(y[i]) <= thr).collect();
    let lam = Cosupport::from_lambda(x.len(), &zeros)?;
    Ok((zeros.len(), lam))
}

/// `κ_L(l)`, the largest dimension of an analysis subspace with at least
/// `l` annihilated rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kappa {
    pub dim: usize,
    /// `l >= n`: only constants survive, outside the `n - l` formula.
    pub saturated: bool,
}

pub fn kappa<T: Ring>(g: &Graph<T>, l: usize) -> Result<Kappa> {
    g.require_connected()?;
    let n = g.n();
    Ok(if l < n {
        Kappa {
            dim: n - l,
            saturated: false,
        }
    } else {
        Kappa {
            dim: 1,
            saturated: true,
        }
    })
}

/// `max_{|Λ| >= l} dim N(Ψ_Λ lap)` by exhaustive enumeration of cosupports.
pub fn kappa_brute_force<T: Real>(lap: &DMatrix<T>, l: usize) -> usize {
    let n = lap.nrows();
    (l..=n)
        .flat_map(|size| (0..n).combinations(size))
        .map(|lam| nullspace_oracle(&select_rows(lap, &lam)).ncols())
        .max()
        .unwrap_or(0)
}

/// Minimum number of measurements `2(n - l)` guaranteeing at most one
/// `l`-cosparse solution. Zero when `l >= n` (constants only).
pub fn uniqueness_bound(n: usize, l: usize) -> usize {
    2 * n.saturating_sub(l)
}

/// `spark(L†) = n` on a connected graph.
pub fn spark_pinv<T: Ring>(g: &Graph<T>) -> Result<usize> {
    g.require_connected()?;
    Ok(g.n())
}

/// Smallest number of linearly dependent columns, by exhaustive search.
/// Returns `ncols + 1` when all columns are independent.
pub fn spark_brute_force<T: Real>(m: &DMatrix<T>) -> usize {
    let k_max = m.ncols();
    for k in 1..=k_max {
        let dependent = (0..k_max)
            .combinations(k)
            .any(|cols| rank(&select_columns(m, &cols)) < k);
        if dependent {
            return k;
        }
    }
    k_max + 1
}

/// Smallest singular value over all `k`-column subsets.
pub fn min_subset_singular_value<T: Real>(m: &DMatrix<T>, k: usize) -> T {
    (0..m.ncols())
        .combinations(k)
        .map(|cols| min_singular_value(&select_columns(m, &cols)))
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |a| a.min(s))))
        .unwrap_or_else(T::zero)
}

/// Outcome of one randomized uniqueness trial.
#[derive(Debug, Clone, Copy)]
pub struct UniquenessTrial<T> {
    /// `min ‖M(x₁ - x₂)‖` over unit-norm differences of `l`-cosparse signals.
    pub min_gap: T,
    pub pairs_checked: usize,
}

/// Draws a Gaussian `m x n` measurement matrix and returns the smallest
/// measurement gap between any two distinct `l`-cosparse signals.
///
/// Two signals from cosupports `Λ₁, Λ₂` share measurements iff `M` has a
/// nontrivial kernel on `W_{Λ₁} + W_{Λ₂}`; the gap is the smallest singular
/// value of `M` restricted to an orthonormal basis of that sum.
pub fn uniqueness_trial<T: Real, R: Rng + ?Sized>(
    lap: &DMatrix<T>,
    l: usize,
    m: usize,
    rng: &mut R,
) -> UniquenessTrial<T> {
    let n = lap.nrows();
    let meas = DMatrix::<T>::from_fn(m, n, |_, _| {
        let v: f64 = rng.sample(StandardNormal);
        crate::scalar::from_f64(v)
    });
    let subspaces: Vec<DMatrix<T>> = (0..n)
        .combinations(l)
        .map(|lam| nullspace_oracle(&select_rows(lap, &lam)))
        .collect();
    let mut min_gap: Option<T> = None;
    let mut pairs = 0;
    for (a, b) in (0..subspaces.len())
        .tuple_combinations::<(usize, usize)>()
        .chain((0..subspaces.len()).map(|i| (i, i)))
    {
        let joined = DMatrix::from_fn(n, subspaces[a].ncols() + subspaces[b].ncols(), |r, c| {
            if c < subspaces[a].ncols() {
                subspaces[a][(r, c)]
            } else {
                subspaces[b][(r, c - subspaces[a].ncols())]
            }
        });
        let q = column_basis(&joined);
        let gap = min_singular_value(&(&meas * q));
        min_gap = Some(min_gap.map_or(gap, |g: T| g.min(gap)));
        pairs += 1;
    }
    UniquenessTrial {
        min_gap: min_gap.unwrap_or_else(T::zero),
        pairs_checked: pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CirculantSpec;
    use crate::linalg::column_space_equal;
    use crate::scalar::max_abs;

    #[test]
    fn w_matrix_examples() {
        assert_eq!(w_matrix::<i64>(1).shape(), (1, 0));
        assert_eq!(w_matrix::<i64>(2), DMatrix::from_row_slice(2, 1, &[1, -1]));
        assert_eq!(
            w_matrix::<i64>(3),
            DMatrix::from_row_slice(3, 2, &[2, 0, -1, 1, -1, -1])
        );
        let w = w_matrix::<i64>(5);
        assert_eq!(w.row(4).iter().copied().collect::<Vec<_>>(), vec![-1, -1, -1, -1]);
        assert_eq!(w[(3, 3)], 1);
    }

    #[test]
    fn w_columns_are_zero_sum_and_independent() {
        for m in 1..12 {
            let w = w_matrix::<f64>(m);
            for c in w.column_iter() {
                assert_eq!(c.sum(), 0.0);
            }
            assert_eq!(rank(&w), m - 1);
        }
    }

    #[test]
    fn single_vertex_support_gives_constants() {
        let g = Graph::<f64>::cycle(7).unwrap();
        let lam = Cosupport::from_complement(7, &[3]).unwrap();
        let b = prop1_basis(&g, &lam).unwrap();
        assert_eq!(b.smooth_part.ncols(), 0);
        assert_eq!(b.dimension(), 1);
    }

    #[test]
    fn eight_cycle_two_knots() {
        let g = Graph::<f64>::cycle(8).unwrap();
        let lam = Cosupport::from_complement(8, &[2, 5]).unwrap();
        let b = prop1_basis(&g, &lam).unwrap();
        assert_eq!(b.dimension(), 2);
        let sampled = select_rows(&g.laplacian(), lam.lambda());
        assert!(column_space_equal(&b.matrix(), &nullspace_oracle(&sampled), 1e-9));
        assert!(max_abs(&(&sampled * b.matrix())) < 1e-9);
        // The smooth column is L†(e_2 - e_5): piecewise linear, knots at 2 and 5.
        let x = b.smooth_part.column(0).into_owned();
        let (l, found) = cosparsity(&g.laplacian(), &x, 1e-9).unwrap();
        assert_eq!(l, 6);
        assert_eq!(found.complement(), &[2, 5]);
    }

    #[test]
    fn prop1_rejections() {
        let two = Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let lam = Cosupport::from_complement(4, &[0, 2]).unwrap();
        assert_eq!(
            prop1_basis(&two, &lam).unwrap_err(),
            Error::Disconnected { components: 2 }
        );
        let c = Graph::<f64>::cycle(4).unwrap();
        let full = Cosupport::from_lambda(4, &[0, 1, 2, 3]).unwrap();
        assert_eq!(prop1_basis(&c, &full).unwrap_err(), Error::FullCosupport);
        let wrong = Cosupport::from_lambda(5, &[0]).unwrap();
        assert_eq!(prop1_basis(&c, &wrong).unwrap_err(), Error::SizeMismatch(5, 4));
    }

    #[test]
    fn pairwise_basis_examples() {
        let lam = Cosupport::from_complement(4, &[0, 1]).unwrap();
        assert_eq!(
            pairwise_difference_basis::<i64>(&lam).unwrap(),
            DMatrix::from_column_slice(4, 1, &[1, -1, 0, 0])
        );
        let lam = Cosupport::from_complement(8, &[2, 5]).unwrap();
        let b = pairwise_difference_basis::<i64>(&lam).unwrap();
        assert_eq!(b[(2, 0)], 1);
        assert_eq!(b[(5, 0)], -1);
        assert_eq!(b.iter().filter(|&&v| v != 0).count(), 2);

        let lam = Cosupport::from_complement(8, &[1, 3, 6]).unwrap();
        let b = pairwise_difference_basis::<f64>(&lam).unwrap();
        assert!(column_space_equal(&b, &embedded_w::<f64>(&lam), 1e-10));

        let single = Cosupport::from_complement(8, &[4]).unwrap();
        assert!(pairwise_difference_basis::<f64>(&single).is_err());
    }

    #[test]
    fn cosparsity_examples() {
        let g = Graph::<f64>::cycle(8).unwrap();
        let l = g.laplacian();
        let (count, lam) = cosparsity(&l, &DVector::from_element(8, 1.0), 1e-9).unwrap();
        assert_eq!(count, 8);
        assert!(lam.complement().is_empty());

        let p = crate::circulant::cycle_pinv::<f64>(8).unwrap();
        let x = p.column(2) - p.column(5);
        let (count, lam) = cosparsity(&l, &x, 1e-9).unwrap();
        assert_eq!(count, 6);
        assert_eq!(lam.complement(), &[2, 5]);

        let x = p.column(0).into_owned();
        assert_eq!(cosparsity(&l, &x, 1e-9).unwrap().0, 0);
    }

    #[test]
    fn kappa_examples() {
        let c8 = Graph::<f64>::cycle(8).unwrap();
        assert_eq!(
            kappa(&c8, 6).unwrap(),
            Kappa {
                dim: 2,
                saturated: false
            }
        );
        assert_eq!(kappa(&c8, 0).unwrap().dim, 8);
        assert_eq!(
            kappa(&c8, 8).unwrap(),
            Kappa {
                dim: 1,
                saturated: true
            }
        );
        let c6 = Graph::<f64>::cycle(6).unwrap();
        assert_eq!(kappa_brute_force(&c6.laplacian(), 4), 2);
    }

    #[test]
    fn uniqueness_bound_examples() {
        assert_eq!(uniqueness_bound(8, 6), 4);
        assert_eq!(uniqueness_bound(8, 8), 0);
    }

    #[test]
    fn spark_examples() {
        let c5 = Graph::<f64>::cycle(5).unwrap();
        assert_eq!(spark_pinv(&c5).unwrap(), 5);
        let k4 = Graph::<f64>::complete(4).unwrap();
        assert_eq!(spark_pinv(&k4).unwrap(), 4);
        let p = pseudoinverse(&k4.laplacian(), TolPolicy::Standard).unwrap();
        assert_eq!(spark_brute_force(&p), 4);

        let g = CirculantSpec::<f64>::unweighted(6, &[1, 2]).unwrap().compile();
        let p = pseudoinverse(&g.laplacian(), TolPolicy::Standard).unwrap();
        assert!(min_subset_singular_value(&p, 5) > 1e-8);
        assert_eq!(spark_brute_force(&p), 6);
    }

    #[test]
    fn randomized_uniqueness_on_six_cycle() {
        use rand::SeedableRng;
        let l = Graph::<f64>::cycle(6).unwrap().laplacian();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let t = uniqueness_trial(&l, 4, 4, &mut rng);
        assert_eq!(t.pairs_checked, 15 * 14 / 2 + 15);
        assert!(t.min_gap > 1e-6);
        // With too few measurements some pair of cosparse subspaces collides.
        let t = uniqueness_trial(&l, 4, 2, &mut rng);
        assert!(t.min_gap < 1e-10);
    }
}
