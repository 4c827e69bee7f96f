//! Symmetric circulant matrices through their representer polynomials.
//!
//! A symmetric circulant of size `n` with first row
//! `[l_0, l_1, ..., l_M, 0, ..., 0, l_M, ..., l_1]` is represented by the
//! Laurent polynomial `l(z) = l_0 + Σ l_i (z^i + z^-i)` reduced modulo
//! `z^n = 1`. Products of circulants are products of polynomials, and the
//! eigenvalues are the polynomial evaluated at the `n`-th roots of unity.
//!
//! The factorization of a circulant Laplacian through the simple cycle,
//! `L = P L_C`, and the resulting `L† = P⁻¹ L_C†` also live here, together
//! with the closed-form pseudoinverse of the cycle Laplacian.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{CirculantSpec, Graph};
use crate::linalg::{pseudoinverse, TolPolicy};
use crate::scalar::{abs, epsilon, from_f64, from_usize, max_abs, scale_of, Real, Ring};

#[derive(Debug, Clone, PartialEq)]
pub struct RepresenterPolynomial<T> {
    n: usize,
    coeffs: Vec<T>,
}

impl<T: Ring> RepresenterPolynomial<T> {
    /// `coeffs = (l_0, l_1, ..., l_M)`; at most `⌊n/2⌋ + 1` entries. When `n`
    /// is even the last admissible coefficient sits on the antipodal
    /// diagonal and appears once in the first row. Trailing zeros are
    /// dropped.
    pub fn new(n: usize, coeffs: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if coeffs.len() > n / 2 + 1 {
            return Err(Error::RepresenterTooLong { len: coeffs.len(), n });
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Ok(Self { n, coeffs })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, vec![T::one()]).expect("constant polynomial fits every n")
    }

    /// `l_C(z) = 2 - z - z^-1`, the Laplacian of the simple cycle.
    pub fn cycle_laplacian(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::CycleTooSmall(n));
        }
        let two = T::one() + T::one();
        Self::new(n, vec![two, -T::one()])
    }

    /// Recovers the polynomial from the first row of a symmetric circulant.
    pub fn from_first_row(row: &[T]) -> Result<Self> {
        let n = row.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        for d in 1..n {
            if row[d] != row[n - d] {
                return Err(Error::Parse(format!(
                    "first row is not symmetric at offsets {d} and {}",
                    n - d
                )));
            }
        }
        Self::new(n, row[..=n / 2].to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Highest nonzero offset `M`.
    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).copied().unwrap_or_else(T::zero)
    }

    pub fn first_row(&self) -> Vec<T> {
        (0..self.n).map(|d| self.coeff(d.min(self.n - d))).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<T> {
        let row = self.first_row();
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n])
    }

    /// `l(1)`, the common row sum of the circulant.
    pub fn row_sum(&self) -> T {
        self.first_row().into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Product modulo `z^n = 1`. Bandwidths adding up to `n/2` or more wrap
    /// around and the result is simply the full symmetric first row.
    pub fn multiply_mod(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        let n = self.n;
        let a = self.first_row();
        let b = other.first_row();
        let mut c = vec![T::zero(); n];
        for (i, &ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                c[(i + j) % n] += ai * bj;
            }
        }
        Self::from_first_row(&c)
    }

    pub fn map<U: Ring>(&self, f: impl Fn(T) -> U) -> RepresenterPolynomial<U> {
        RepresenterPolynomial::new(self.n, self.coeffs.iter().map(|&c| f(c)).collect())
            .expect("same length fits the same n")
    }
}

impl<T: Real> RepresenterPolynomial<T> {
    /// `l(ω^k)` for `k = 0..n`, i.e. the circulant's eigenvalues in DFT order.
    pub fn symbol(&self) -> Vec<T> {
        let n = self.n;
        let row = self.first_row();
        let step = T::two_pi() / from_usize::<T>(n);
        (0..n)
            .map(|k| {
                row.iter().enumerate().fold(T::zero(), |acc, (d, &r)| {
                    acc + r * (step * from_usize::<T>((d * k) % n)).cos()
                })
            })
            .collect()
    }
}

/// Representer of the Laplacian of a circulant graph: `l_0 = 2 Σ d_k`,
/// `l_{s_k} = -d_k`. Requires bandwidth `M < n/2`.
pub fn laplacian_representer<T: Ring>(spec: &CirculantSpec<T>) -> Result<RepresenterPolynomial<T>> {
    let n = spec.n();
    let m = spec.bandwidth();
    if 2 * m >= n {
        return Err(Error::BandwidthTooLarge { bandwidth: m, n });
    }
    let mut coeffs = vec![T::zero(); m + 1];
    for &(s, d) in spec.generators() {
        coeffs[0] += d + d;
        coeffs[s] = -d;
    }
    RepresenterPolynomial::new(n, coeffs)
}

/// The factor `P` with `L = P L_C` for a circulant graph containing the unit
/// hop. `P_0 = Σ i d_i` and `P_i = Σ_{k>i} (k - i) d_k`, with `d_i = 0` for
/// hops outside the generating set.
pub fn lemma1_decompose<T: Ring>(spec: &CirculantSpec<T>) -> Result<RepresenterPolynomial<T>> {
    if !spec.contains_hop(1) {
        return Err(Error::MissingUnitGenerator);
    }
    let n = spec.n();
    let m = spec.bandwidth();
    if 2 * m >= n {
        return Err(Error::BandwidthTooLarge { bandwidth: m, n });
    }
    Ok(cycle_cofactor(spec))
}

/// Fejér-kernel cofactor of a circulant Laplacian, without hypothesis checks.
/// `l(z) = Σ d_k (2 - z^k - z^-k)` and each term factors as
/// `(2 - z - z^-1) · (k + Σ_{i<k} (k - i)(z^i + z^-i))`.
#[allow(clippy::needless_range_loop)]
pub(crate) fn cycle_cofactor<T: Ring>(spec: &CirculantSpec<T>) -> RepresenterPolynomial<T> {
    let m = spec.bandwidth();
    let mut coeffs = vec![T::zero(); m.max(1)];
    for i in 0..m.max(1) {
        for k in (i + 1).max(1)..=m {
            let mult = if i == 0 { k } else { k - i };
            coeffs[i] += from_usize::<T>(mult) * spec.weight_at(k);
        }
    }
    RepresenterPolynomial::new(spec.n(), coeffs).expect("cofactor is narrower than the Laplacian")
}

/// Entry `(i, j)` of the cycle-Laplacian pseudoinverse:
/// `(n-1)(n+1)/(12n) - |j-i|/2 + (j-i)²/(2n)`.
///
/// Evaluated as a single quotient of integers, so it is exact for
/// [`Rational`](crate::scalar::Rational) and correctly rounded for floats.
pub fn cycle_pinv_entry<T: Ring>(n: usize, i: usize, j: usize) -> T {
    let n_i = n as i64;
    let d = (j as i64 - i as i64).abs();
    let numer = n_i * n_i - 1 - 6 * n_i * d + 6 * d * d;
    let numer = T::from_i64(numer).expect("integer fits scalar");
    numer / from_usize::<T>(12 * n)
}

/// Closed-form `L_C†` for the `n`-cycle.
pub fn cycle_pinv<T: Ring>(n: usize) -> Result<DMatrix<T>> {
    if n < 3 {
        return Err(Error::CycleTooSmall(n));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| cycle_pinv_entry(n, i, j)))
}

/// Dense inverse of a positive definite circulant via Cholesky.
pub fn perturbation_inverse<T: Real>(p: &RepresenterPolynomial<T>) -> Result<DMatrix<T>> {
    let symbol = p.symbol();
    let largest = symbol.iter().fold(T::zero(), |a, &s| a.max(abs(s)));
    let floor = epsilon::<T>() * from_usize::<T>(p.n()) * largest;
    if symbol.iter().any(|&s| s <= floor) {
        return Err(Error::NotPositiveDefinite);
    }
    let m = p.to_matrix();
    let chol = m.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.inverse())
}

/// Inverse of a nonsingular circulant from its symbol: the first row is the
/// inverse DFT of `1 / l(ω^k)`.
pub fn circulant_inverse_by_symbol<T: Real>(p: &RepresenterPolynomial<T>) -> Result<DMatrix<T>> {
    let n = p.n();
    let symbol = p.symbol();
    let floor = epsilon::<T>() * from_usize::<T>(n) * symbol.iter().fold(T::zero(), |a, &s| a.max(abs(s)));
    if symbol.iter().any(|&s| abs(s) <= floor) {
        return Err(Error::NotPositiveDefinite);
    }
    let step = T::two_pi() / from_usize::<T>(n);
    let inv_n = T::one() / from_usize::<T>(n);
    let row: Vec<T> = (0..n)
        .map(|d| {
            symbol.iter().enumerate().fold(T::zero(), |acc, (k, &s)| {
                acc + (step * from_usize::<T>((d * k) % n)).cos() / s
            }) * inv_n
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n]))
}

/// Result of checking `L† = P⁻¹ L_C†` on a circulant graph.
#[derive(Debug, Clone)]
pub struct Lemma2Factorization<T: Real> {
    pub p: RepresenterPolynomial<T>,
    pub p_inv: DMatrix<T>,
    /// `‖P⁻¹ L_C† - L†‖` (max-entry norm), with `L†` from the dense eigensolver.
    pub residual: T,
    /// `max(1, ‖L†‖)`, the scale the residual is judged against.
    pub scale: T,
}

pub fn lemma2_pinv_factorization<T: Real>(spec: &CirculantSpec<T>) -> Result<Lemma2Factorization<T>> {
    let p = lemma1_decompose(spec)?;
    let p_inv = perturbation_inverse(&p)?;
    let lc_pinv = cycle_pinv::<T>(spec.n())?;
    let l = spec.compile().laplacian();
    let l_pinv = pseudoinverse(&l, TolPolicy::Standard)?;
    let residual = max_abs(&(&p_inv * &lc_pinv - &l_pinv));
    Ok(Lemma2Factorization {
        p,
        p_inv,
        residual,
        scale: scale_of(&l_pinv),
    })
}

/// Off-diagonal decay of a circulant inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile<T> {
    /// `(d, max |entry|)` over entries at cyclic distance `d` from the diagonal,
    /// for `d = 0..=⌊n/2⌋`.
    pub entries: Vec<(usize, T)>,
    /// Non-increasing everywhere, and strictly decreasing while the values
    /// are above the rounding floor.
    pub decreasing: bool,
}

impl<T: Real> DecayProfile<T> {
    pub fn at(&self, d: usize) -> T {
        self.entries[d].1
    }

    /// `value(d) / value(0)`.
    pub fn ratio(&self, d: usize) -> T {
        self.at(d) / self.at(0)
    }
}

pub fn decay_profile<T: Real>(p_inv: &DMatrix<T>) -> DecayProfile<T> {
    let n = p_inv.nrows();
    let half = n / 2;
    let mut entries: Vec<(usize, T)> = (0..=half).map(|d| (d, T::zero())).collect();
    for i in 0..n {
        for j in 0..n {
            let off = (j + n - i) % n;
            let d = off.min(n - off);
            entries[d].1 = entries[d].1.max(abs(p_inv[(i, j)]));
        }
    }
    let floor = epsilon::<T>() * from_f64::<T>(64.0) * entries[0].1;
    let decreasing = entries.windows(2).all(|w| {
        let (prev, cur) = (w[0].1, w[1].1);
        if prev <= floor {
            cur <= floor
        } else {
            cur < prev
        }
    });
    DecayProfile { entries, decreasing }
}

/// `L = laplacian(compile(spec))` for a circulant spec, as a convenience.
pub fn circulant_laplacian<T: Ring>(spec: &CirculantSpec<T>) -> DMatrix<T> {
    let g: Graph<T> = spec.compile();
    g.laplacian()
}
