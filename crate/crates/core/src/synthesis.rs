//! The sparse synthesis model with dictionary `L†`, and its circulant
//! refinements.
//!
//! Signals are `x = L† c` for sparse `c`. An `x` of this form is sparse
//! under `L` only when `c` sums to zero; the checks here measure that, the
//! discontinuity relation `L (L† Sᵀ) = Sᵀ`, the two-hop knot structure of
//! `L†` under `L²`, and the piecewise-polynomial degree of signals on
//! circulant graphs.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::analysis::prop1_basis_with_pinv;
use crate::circulant::{cycle_pinv, lemma1_decompose, lemma2_pinv_factorization, RepresenterPolynomial};
use crate::error::{Error, Result};
use crate::graph::{CirculantSpec, Cosupport, Graph};
use crate::linalg::{pseudoinverse, TolPolicy};
use crate::scalar::{abs, abs_floor, from_f64, from_usize, max_abs, max_abs_slice, Real};

/// Relative threshold deciding whether an annihilator output entry is a knot.
pub const KNOT_REL_TOL: f64 = 1e-7;

/// Indices where `|v_i| > max(KNOT_REL_TOL · ‖v‖_∞, floor)`.
pub fn knot_support<T: Real>(v: &[T]) -> Vec<usize> {
    let thr = (from_f64::<T>(KNOT_REL_TOL) * max_abs_slice(v)).max(abs_floor());
    (0..v.len()).filter(|&i| abs(v[i]) > thr).collect()
}

/// `x = L†_{support} coeffs`.
pub fn synthesize<T: Real>(l_pinv: &DMatrix<T>, support: &[usize], coeffs: &[T]) -> Result<DVector<T>> {
    if support.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: support.len(),
            found: coeffs.len(),
        });
    }
    let n = l_pinv.nrows();
    let mut x = DVector::zeros(n);
    for (&j, &c) in support.iter().zip(coeffs) {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        x += l_pinv.column(j) * c;
    }
    Ok(x)
}

/// `S† = L† Sᵀ`.
pub fn incidence_pinv<T: Real>(l_pinv: &DMatrix<T>, s: &DMatrix<T>) -> DMatrix<T> {
    l_pinv * s.transpose()
}

/// True iff `|Σ c_i| <= tol · ‖c‖_1`, i.e. `c` lies in the range of `L` on a
/// connected graph.
pub fn structured_sparsity_check<T: Real>(c: &[T], tol: T) -> bool {
    let sum = c.iter().fold(T::zero(), |a, &b| a + b);
    let l1 = c.iter().fold(T::zero(), |a, &b| a + abs(b));
    abs(sum) <= tol * l1
}

/// `‖L (L† Sᵀ) - Sᵀ‖` in the max-entry norm.
pub fn discontinuity_property_residual<T: Real>(g: &Graph<T>) -> Result<T> {
    g.require_connected()?;
    let l = g.laplacian();
    let s = g.incidence();
    let l_pinv = pseudoinverse(&l, TolPolicy::Standard)?;
    Ok(max_abs(&(&l * incidence_pinv(&l_pinv, &s) - s.transpose())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoHopKnotCheck<T> {
    /// `‖L² L† - L‖`.
    pub residual: T,
    /// Knots of `L² (L†)_j`.
    pub knots: Vec<usize>,
    /// `None` when `L²` has no structural zero (graph too dense).
    pub knot_match: Option<bool>,
}

/// Compares the support of `L² (L†)_j` with the support of `L_j`.
pub fn two_hop_knot_check<T: Real>(g: &Graph<T>, j: usize) -> Result<TwoHopKnotCheck<T>> {
    g.require_connected()?;
    let n = g.n();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    let l = g.laplacian();
    let l_pinv = pseudoinverse(&l, TolPolicy::Standard)?;
    let l2 = &l * &l;
    let residual = max_abs(&(&l2 * &l_pinv - &l));
    let image = &l2 * l_pinv.column(j);
    let knots = knot_support(image.as_slice());
    let sparse_enough = g.hop_distances().iter().flatten().any(|d| d.is_none_or(|d| d > 2));
    let knot_match = sparse_enough.then(|| {
        let col = l.column(j).into_owned();
        knots == knot_support(col.as_slice())
    });
    Ok(TwoHopKnotCheck {
        residual,
        knots,
        knot_match,
    })
}

/// Cyclic forward difference of order `d`: entry `s` is
/// `Σ_k (-1)^(d-k) C(d,k) x_{s+k}` with indices mod `n`.
pub fn cyclic_difference<T: Real>(x: &[T], order: usize) -> Vec<T> {
    let mut cur = x.to_vec();
    let n = x.len();
    for _ in 0..order {
        cur = (0..n).map(|s| cur[(s + 1) % n] - cur[s]).collect();
    }
    cur
}

/// Forward differences of order `d` on a non-cyclic slice.
fn linear_difference<T: Real>(x: &[T], order: usize) -> Vec<T> {
    let mut cur = x.to_vec();
    for _ in 0..order {
        if cur.len() < 2 {
            return Vec::new();
        }
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    cur
}

/// `(L_C x)_i = 2 x_i - x_{i-1} - x_{i+1}`.
pub fn cycle_laplacian_apply<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n)
        .map(|i| x[i] + x[i] - x[(i + n - 1) % n] - x[(i + 1) % n])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment<T> {
    /// First vertex (inclusive).
    pub start: usize,
    /// Number of vertices, counted cyclically from `start`.
    pub len: usize,
    /// Smallest degree whose differences vanish on the segment.
    pub degree: usize,
    /// Largest annihilator output inside the segment (0 for exact pieces).
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseProfile<T> {
    pub knots: Vec<usize>,
    pub segments: Vec<Segment<T>>,
    /// Order of the cyclic difference used to place knots.
    pub annihilator_order: usize,
}

impl<T> PiecewiseProfile<T> {
    pub fn max_degree(&self) -> usize {
        self.segments.iter().map(|s| s.degree).max().unwrap_or(0)
    }
}

/// Splits a cyclic signal into polynomial pieces.
///
/// With `order = 1` a knot `k` marks a jump between `x_k` and `x_{k+1}`.
/// With `order = d >= 2` windows of `d + 1` consecutive samples are tested
/// and `k` is a knot when every window holding `k` strictly inside is
/// broken; neighbouring pieces share the knot sample. For `d = 2` this is the
/// support of `L_C x`. On each piece the reported degree is the smallest `p`
/// whose `(p+1)`-th differences stay within `tol · max(1, ‖x‖_∞)`.
pub fn piecewise_degree_profile<T: Real>(x: &[T], order: usize, tol: T) -> PiecewiseProfile<T> {
    assert!(order >= 1, "annihilator order must be positive");
    let n = x.len();
    let scale = max_abs_slice(x).max(T::one());
    let flat = tol * scale;
    let diffs = cyclic_difference(x, order);
    let thr = (from_f64::<T>(KNOT_REL_TOL) * max_abs_slice(&diffs)).max(flat);
    let broken: Vec<bool> = diffs.iter().map(|&v| abs(v) > thr).collect();
    let knots: Vec<usize> = if order == 1 {
        (0..n).filter(|&k| broken[k]).collect()
    } else {
        (0..n)
            .filter(|&k| (1..order).all(|off| broken[(k + n - off) % n]))
            .collect()
    };

    let degree_of = |vals: &[T]| -> usize {
        (0..vals.len())
            .find(|&p| linear_difference(vals, p + 1).iter().all(|&v| abs(v) <= flat))
            .unwrap_or(vals.len().saturating_sub(1))
    };

    let segments = if knots.is_empty() {
        let p = (0..n)
            .find(|&p| cyclic_difference(x, p + 1).iter().all(|&v| abs(v) <= flat))
            .unwrap_or(n - 1);
        vec![Segment {
            start: 0,
            len: n,
            degree: p,
            residual: max_abs_slice(&diffs),
        }]
    } else {
        let m = knots.len();
        (0..m)
            .map(|a| {
                let ka = knots[a];
                let kb = if m == 1 {
                    ka + n
                } else if a + 1 < m {
                    knots[a + 1]
                } else {
                    knots[0] + n
                };
                // Pieces share knot samples for d >= 2; jumps sit between samples for d = 1.
                let (start, end) = if order == 1 { (ka + 1, kb) } else { (ka, kb) };
                let vals: Vec<T> = (start..=end).map(|i| x[i % n]).collect();
                let residual = max_abs_slice(&linear_difference(&vals, order));
                Segment {
                    start: start % n,
                    len: vals.len(),
                    degree: degree_of(&vals),
                    residual,
                }
            })
            .collect()
    };
    PiecewiseProfile {
        knots,
        segments,
        annihilator_order: order,
    }
}

/// Largest cyclic `order`-th difference over windows that do not hold any
/// of `knots` strictly inside.
pub fn offknot_difference<T: Real>(x: &[T], order: usize, knots: &[usize]) -> T {
    let n = x.len();
    let diffs = cyclic_difference(x, order);
    (0..n)
        .filter(|&s| !(1..order).any(|off| knots.contains(&((s + off) % n))))
        .fold(T::zero(), |m, s| m.max(abs(diffs[s])))
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report<T> {
    pub n: usize,
    pub support: Vec<usize>,
    /// Max cyclic second difference, off the support, of `P x` over the
    /// analysis basis signals `x`.
    pub analysis_offknot_second_difference: T,
    pub analysis_max_degree: usize,
    /// Max cyclic third difference of `P (L†)_j` away from `j`, over all `j`.
    pub synthesis_offknot_third_difference: T,
    pub synthesis_max_degree: usize,
    /// `‖P L† - L_C†‖`.
    pub unperturbed_atom_residual: T,
    /// `‖P⁻¹ L_C† - L†‖` and the scale it is judged against.
    pub lemma2_residual: T,
    pub lemma2_scale: T,
    /// Max off-support second difference of the perturbed analysis signals
    /// (informational: how visible the perturbation is).
    pub perturbed_offknot_second_difference: T,
    /// Largest hop distance from the support at which the perturbed second
    /// difference still exceeds `1e-6` of its peak.
    pub perturbation_spread: usize,
    pub tol: T,
    pub passed: bool,
}

/// Checks the degree split on a circulant graph: unperturbed analysis
/// signals are piecewise linear, unperturbed synthesis atoms piecewise
/// quadratic, and the perturbation is exactly `P⁻¹`.
pub fn theorem2_verify<T: Real>(spec: &CirculantSpec<T>, lam: &Cosupport, tol: T) -> Result<Theorem2Report<T>> {
    let n = spec.n();
    if lam.n() != n {
        return Err(Error::SizeMismatch(lam.n(), n));
    }
    let fact = lemma2_pinv_factorization(spec)?;
    let p = fact.p.to_matrix();
    let l = spec.compile().laplacian();
    let l_pinv = pseudoinverse(&l, TolPolicy::Standard)?;
    let lc_pinv = cycle_pinv::<T>(n)?;
    let support = lam.complement().to_vec();

    let basis = prop1_basis_with_pinv(&l_pinv, lam)?;
    let mut analysis_diff = T::zero();
    let mut analysis_degree = 0;
    let mut perturbed_diff = T::zero();
    let mut spread = 0;
    let hops = hop_distance_to_set(n, &support);
    for col in basis.smooth_part.column_iter() {
        let x = col.into_owned();
        let unperturbed = &p * &x;
        analysis_diff = analysis_diff.max(offknot_difference(unperturbed.as_slice(), 2, &support));
        let prof = piecewise_degree_profile(unperturbed.as_slice(), 2, tol);
        analysis_degree = analysis_degree.max(prof.max_degree());

        let lc_x = cycle_laplacian_apply(x.as_slice());
        let peak = max_abs_slice(&lc_x);
        for (i, &v) in lc_x.iter().enumerate() {
            if support.contains(&i) {
                continue;
            }
            perturbed_diff = perturbed_diff.max(abs(v));
            if abs(v) > peak * from_f64(1e-6) {
                spread = spread.max(hops[i]);
            }
        }
    }

    let unperturbed_atoms = &p * &l_pinv;
    let unperturbed_atom_residual = max_abs(&(&unperturbed_atoms - &lc_pinv));
    let mut synthesis_diff = T::zero();
    let mut synthesis_degree = 0;
    for j in 0..n {
        let atom = unperturbed_atoms.column(j).into_owned();
        synthesis_diff = synthesis_diff.max(offknot_difference(atom.as_slice(), 3, &[j]));
        let prof = piecewise_degree_profile(atom.as_slice(), 3, tol);
        synthesis_degree = synthesis_degree.max(prof.max_degree());
    }

    let lemma2_bound = from_f64::<T>(1e-8) * fact.scale;
    let passed = analysis_diff < tol
        && analysis_degree <= 1
        && synthesis_diff < tol
        && synthesis_degree <= 2
        && fact.residual < lemma2_bound;
    Ok(Theorem2Report {
        n,
        support,
        analysis_offknot_second_difference: analysis_diff,
        analysis_max_degree: analysis_degree,
        synthesis_offknot_third_difference: synthesis_diff,
        synthesis_max_degree: synthesis_degree,
        unperturbed_atom_residual,
        lemma2_residual: fact.residual,
        lemma2_scale: fact.scale,
        perturbed_offknot_second_difference: perturbed_diff,
        perturbation_spread: spread,
        tol,
        passed,
    })
}

/// Cyclic hop distance from each vertex to the nearest element of `set`.
pub fn hop_distance_to_set(n: usize, set: &[usize]) -> Vec<usize> {
    (0..n)
        .map(|i| {
            set.iter()
                .map(|&k| {
                    let d = (i + n - k) % n;
                    d.min(n - d)
                })
                .min()
                .unwrap_or(n)
        })
        .collect()
}

/// `(‖S† - Sᵀ/n‖, ‖L† - L/n²‖)` on the unweighted complete graph.
pub fn complete_graph_identities<T: Real>(n: usize) -> Result<(T, T)> {
    let g = Graph::<T>::complete(n)?;
    let l = g.laplacian();
    let s = g.incidence();
    let l_pinv = pseudoinverse(&l, TolPolicy::Standard)?;
    let nn = from_usize::<T>(n);
    let res_s = max_abs(&(incidence_pinv(&l_pinv, &s) - s.transpose() / nn));
    let res_l = max_abs(&(&l_pinv - &l / (nn * nn)));
    Ok((res_s, res_l))
}

#[derive(Debug, Clone, Serialize)]
pub struct Absorption<T: Real> {
    #[serde(skip)]
    pub p: DVector<T>,
    #[serde(skip)]
    pub x: DVector<T>,
    pub lc_support: Vec<usize>,
    pub expected_lc_support: Vec<usize>,
    pub l_support: Vec<usize>,
    pub expected_l_support: Vec<usize>,
    pub passed: bool,
}

/// Builds `p = (P_j ∗ (e_k - e_l)) mod n` and `x = L† p`, then checks that
/// `x` is sparse under both `L_C` (pattern `{j+k, j+l}`) and `L`
/// (pattern `supp p`).
pub fn absorb_discontinuity<T: Real>(spec: &CirculantSpec<T>, j: usize, k: usize, l: usize) -> Result<Absorption<T>> {
    let n = spec.n();
    for v in [j, k, l] {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, n });
        }
    }
    if k == l {
        return Err(Error::DuplicateIndex(k));
    }
    let p_rep: RepresenterPolynomial<T> = lemma1_decompose(spec)?;
    let row = p_rep.first_row();
    let col_j: Vec<T> = (0..n).map(|i| row[(i + n - j) % n]).collect();
    let p = DVector::from_fn(n, |i, _| col_j[(i + n - k) % n] - col_j[(i + n - l) % n]);

    let lap = spec.compile().laplacian();
    let l_pinv = pseudoinverse(&lap, TolPolicy::Standard)?;
    let x = &l_pinv * &p;
    let lc_x = cycle_laplacian_apply(x.as_slice());
    let l_x = &lap * &x;

    let lc_support = knot_support(&lc_x);
    let mut expected_lc_support = vec![(j + k) % n, (j + l) % n];
    expected_lc_support.sort_unstable();
    let l_support = knot_support(l_x.as_slice());
    let expected_l_support = knot_support(p.as_slice());
    let passed = lc_support == expected_lc_support && l_support == expected_l_support;
    Ok(Absorption {
        p,
        x,
        lc_support,
        expected_lc_support,
        l_support,
        expected_l_support,
        passed,
    })
}
