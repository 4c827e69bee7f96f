//! Undirected weighted graphs and their difference operators.
//!
//! Vertices are labelled `0..n`. Every edge is stored once as `(i, j, w)`
//! with `i < j`, and edges are kept in lexicographic order. That order is
//! also the row order of the incidence matrix, whose rows are oriented from
//! the lower to the higher endpoint.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{abs, default_tol, max_abs, Real, Ring};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
}

impl<T: Ring> Graph<T> {
    /// Builds a graph from `(i, j, w)` triples. Endpoints may be given in
    /// either order; self-loops, duplicates and non-positive weights are
    /// rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut out = Vec::new();
        for (a, b, w) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            // Negated so NaN is rejected too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(w > T::zero()) {
                return Err(Error::NonPositiveWeight(i, j));
            }
            out.push(Edge { i, j, weight: w });
        }
        out.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = out.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::DuplicateEdge(w[0].i, w[0].j));
        }
        Ok(Self { n, edges: out })
    }

    /// Simple cycle `0 - 1 - ... - (n-1) - 0` with unit weights.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::CycleTooSmall(n));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n, T::one())))
    }

    /// Unweighted complete graph.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, T::one()))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> DMatrix<T> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.i, e.j)] = e.weight;
            a[(e.j, e.i)] = e.weight;
        }
        a
    }

    /// Weighted vertex degrees.
    pub fn degrees(&self) -> Vec<T> {
        let l = self.laplacian();
        (0..self.n).map(|i| l[(i, i)]).collect()
    }

    /// Combinatorial Laplacian `L = D - A`.
    ///
    /// The diagonal is the negated sum of the row's off-diagonal entries,
    /// accumulated in column order, so `L 1 = 0` holds exactly whenever the
    /// scalar arithmetic is exact.
    pub fn laplacian(&self) -> DMatrix<T> {
        let mut l = self.adjacency().map(|v| -v);
        for i in 0..self.n {
            let mut off = T::zero();
            for j in 0..self.n {
                if j != i {
                    off += l[(i, j)];
                }
            }
            l[(i, i)] = -off;
        }
        l
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    /// Component label per vertex (labels in first-visit order).
    pub fn component_labels(&self) -> Vec<usize> {
        let adj = self.neighbors();
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn connected_components(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components() == 1
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        match self.connected_components() {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    /// Unweighted BFS hop distances from `source` (`None` if unreachable).
    pub fn hop_distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let adj = self.neighbors();
        bfs(&adj, source)
    }

    /// All-pairs hop distances.
    pub fn hop_distances(&self) -> Vec<Vec<Option<usize>>> {
        let adj = self.neighbors();
        (0..self.n).map(|s| bfs(&adj, s)).collect()
    }

    /// True iff the graph has unit weights on every pair of distinct vertices.
    pub fn is_unweighted_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2 && self.edges.iter().all(|e| e.weight == T::one())
    }

    /// Converts the weights to another scalar type.
    pub fn map_weights<U: Ring>(&self, f: impl Fn(T) -> U) -> Result<Graph<U>> {
        Graph::new(self.n, self.edges.iter().map(|e| (e.i, e.j, f(e.weight))))
    }
}

fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

impl<T: Real> Graph<T> {
    /// Oriented edge-vertex incidence matrix, `|E| x n`. Row `k` belongs to
    /// the `k`-th edge `(i, j)` in lexicographic order and carries `+sqrt(w)`
    /// at `i` and `-sqrt(w)` at `j`.
    pub fn incidence(&self) -> DMatrix<T> {
        let mut s = DMatrix::zeros(self.edges.len(), self.n);
        for (k, e) in self.edges.iter().enumerate() {
            let r = e.weight.sqrt();
            s[(k, e.i)] = r;
            s[(k, e.j)] = -r;
        }
        s
    }

    /// Checks that `L^k` vanishes on every pair more than `k` hops apart.
    pub fn khop_localization_check(&self, k: usize) -> bool {
        self.khop_localization_check_tol(k, default_tol())
    }

    pub fn khop_localization_check_tol(&self, k: usize, tol: T) -> bool {
        assert!(k >= 1, "hop count must be positive");
        let l = self.laplacian();
        let mut power = l.clone();
        for _ in 1..k {
            power = &power * &l;
        }
        let bound = tol * max_abs(&power).max(T::one());
        let dist = self.hop_distances();
        (0..self.n).all(|i| {
            (0..self.n).all(|j| match dist[i][j] {
                Some(d) if d <= k => true,
                _ => abs(power[(i, j)]) <= bound,
            })
        })
    }
}

/// A generating set `{(s_k, d_k)}` of hop distances and weights defining a
/// circulant graph on `n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpec<T> {
    n: usize,
    generators: Vec<(usize, T)>,
}

impl<T: Ring> CirculantSpec<T> {
    pub fn new<I>(n: usize, generators: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, T)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let half = n / 2;
        let mut gens: Vec<(usize, T)> = Vec::new();
        for (s, d) in generators {
            if s == 0 || s > half {
                return Err(Error::GeneratorOutOfRange { s, n, half });
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(d > T::zero()) {
                return Err(Error::NonPositiveWeight(0, s));
            }
            gens.push((s, d));
        }
        gens.sort_by_key(|g| g.0);
        if let Some(w) = gens.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateGenerator(w[0].0));
        }
        Ok(Self { n, generators: gens })
    }

    /// Generating set with unit weights.
    pub fn unweighted(n: usize, hops: &[usize]) -> Result<Self> {
        Self::new(n, hops.iter().map(|&s| (s, T::one())))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[(usize, T)] {
        &self.generators
    }

    /// Largest hop distance (0 for an empty generating set).
    pub fn bandwidth(&self) -> usize {
        self.generators.last().map_or(0, |g| g.0)
    }

    /// Weight attached to hop distance `hop` (zero when not generated).
    pub fn weight_at(&self, hop: usize) -> T {
        self.generators.iter().find(|g| g.0 == hop).map_or(T::zero(), |g| g.1)
    }

    pub fn contains_hop(&self, hop: usize) -> bool {
        self.generators.iter().any(|g| g.0 == hop)
    }

    /// Edges `(i, (i + s) mod n)` for every vertex and generator. A
    /// generator equal to `n/2` pairs each vertex with its antipode and
    /// contributes each such edge once.
    pub fn compile(&self) -> Graph<T> {
        let n = self.n;
        let mut edges = Vec::new();
        for &(s, d) in &self.generators {
            let starts = if 2 * s == n { s } else { n };
            for i in 0..starts {
                edges.push((i, (i + s) % n, d));
            }
        }
        Graph::new(n, edges).expect("validated circulant spec yields a simple graph")
    }

    pub fn map_weights<U: Ring>(&self, f: impl Fn(T) -> U) -> Result<CirculantSpec<U>> {
        CirculantSpec::new(self.n, self.generators.iter().map(|&(s, d)| (s, f(d))))
    }
}

/// A cosupport `Λ` (the zero locations of an analysis representation) and its
/// complement `Λ^∁` (the support), both sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cosupport {
    n: usize,
    lambda: Vec<usize>,
    complement: Vec<usize>,
}

impl Cosupport {
    pub fn from_lambda(n: usize, lambda: &[usize]) -> Result<Self> {
        let lambda = sorted_unique(n, lambda)?;
        let complement = (0..n).filter(|i| lambda.binary_search(i).is_err()).collect();
        Ok(Self { n, lambda, complement })
    }

    pub fn from_complement(n: usize, complement: &[usize]) -> Result<Self> {
        let complement = sorted_unique(n, complement)?;
        let lambda = (0..n).filter(|i| complement.binary_search(i).is_err()).collect();
        Ok(Self { n, lambda, complement })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[usize] {
        &self.lambda
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    /// Cosparsity level `l = |Λ|`.
    pub fn level(&self) -> usize {
        self.lambda.len()
    }
}

fn sorted_unique(n: usize, idx: &[usize]) -> Result<Vec<usize>> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    if let Some(&bad) = v.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateIndex(w[0]));
    }
    Ok(v)
}

/// Row-sampling matrix `Ψ` with `Ψ[r, idx[r]] = 1`.
pub fn sampling_matrix<T: Ring>(n: usize, idx: &[usize]) -> DMatrix<T> {
    let mut psi = DMatrix::zeros(idx.len(), n);
    for (r, &c) in idx.iter().enumerate() {
        psi[(r, c)] = T::one();
    }
    psi
}

/// Rows `idx` of `m` (that is, `Ψ_idx m`).
pub fn select_rows<T: Ring>(m: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

/// Columns `idx` of `m`.
pub fn select_columns<T: Ring>(m: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn edge_set(g: &Graph<f64>) -> Vec<(usize, usize)> {
        g.edges().iter().map(|e| (e.i, e.j)).collect()
    }

    #[test]
    fn four_cycle_from_spec() {
        let g = CirculantSpec::<f64>::unweighted(4, &[1]).unwrap().compile();
        assert_eq!(edge_set(&g), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
    }

    #[test]
    fn antipodal_generator_emits_each_edge_once() {
        let g = CirculantSpec::<f64>::unweighted(6, &[1, 3]).unwrap().compile();
        let set = edge_set(&g);
        for e in [(0, 3), (1, 4), (2, 5)] {
            assert_eq!(set.iter().filter(|&&x| x == e).count(), 1);
        }
        assert_eq!(g.edge_count(), 9);
        assert!(g.degrees().iter().all(|&d| d == 3.0));
    }

    #[test]
    fn fig1_graph_is_six_regular() {
        let g = CirculantSpec::<f64>::unweighted(64, &[1, 2, 3]).unwrap().compile();
        assert_eq!(g.edge_count(), 64 * 3);
        assert!(g.degrees().iter().all(|&d| d == 6.0));
    }

    #[test]
    fn circulant_spec_rejects_bad_generators() {
        assert!(matches!(
            CirculantSpec::<f64>::unweighted(6, &[4]),
            Err(Error::GeneratorOutOfRange { s: 4, .. })
        ));
        assert!(matches!(
            CirculantSpec::<f64>::unweighted(6, &[0]),
            Err(Error::GeneratorOutOfRange { .. })
        ));
        assert_eq!(
            CirculantSpec::<f64>::unweighted(8, &[2, 1, 2]),
            Err(Error::DuplicateGenerator(2))
        );
        assert!(CirculantSpec::new(8, [(1, -1.0)]).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let c4 = Graph::<f64>::cycle(4).unwrap().laplacian();
        assert_eq!(
            c4.row(0).iter().copied().collect::<Vec<_>>(),
            vec![2.0, -1.0, 0.0, -1.0]
        );

        let k4 = Graph::<i64>::complete(4).unwrap().laplacian();
        let expected = DMatrix::<i64>::from_fn(4, 4, |i, j| if i == j { 3 } else { -1 });
        assert_eq!(k4, expected);

        let l = CirculantSpec::<i64>::unweighted(8, &[1, 2])
            .unwrap()
            .compile()
            .laplacian();
        assert_eq!(
            l.row(0).iter().copied().collect::<Vec<_>>(),
            vec![4, -1, -1, 0, 0, 0, -1, -1]
        );
    }

    #[test]
    fn incidence_examples() {
        let g = Graph::new(2, [(0, 1, 4.0)]).unwrap();
        let s = g.incidence();
        assert_eq!(s, DMatrix::from_row_slice(1, 2, &[2.0, -2.0]));
        assert_eq!(
            s.transpose() * &s,
            DMatrix::from_row_slice(2, 2, &[4.0, -4.0, -4.0, 4.0])
        );

        let c4 = Graph::<f64>::cycle(4).unwrap();
        let s = c4.incidence();
        assert!(max_abs(&(s.transpose() * &s - c4.laplacian())) < 1e-12);

        let k4 = Graph::<f64>::complete(4).unwrap().incidence();
        assert_eq!(k4.nrows(), 6);
        for row in k4.row_iter() {
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == -1.0).count(), 1);
        }
    }

    #[test]
    fn component_counts() {
        assert_eq!(Graph::<f64>::cycle(4).unwrap().connected_components(), 1);
        let two = Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(two.connected_components(), 2);
        let evens_odds = CirculantSpec::<f64>::unweighted(6, &[2]).unwrap().compile();
        assert_eq!(evens_odds.connected_components(), 2);
    }

    #[test]
    fn khop_examples() {
        let c8 = Graph::<f64>::cycle(8).unwrap();
        assert!(c8.khop_localization_check(1));
        assert!(c8.khop_localization_check(2));
        let l = c8.laplacian();
        let l2 = &l * &l;
        assert_eq!(l2[(0, 4)], 0.0);
        assert_eq!(l2[(0, 2)], 1.0);
        assert!(Graph::<f64>::complete(4).unwrap().khop_localization_check(2));
    }

    #[test]
    fn graph_construction_errors() {
        assert_eq!(Graph::<f64>::new(0, []), Err(Error::EmptyGraph));
        assert_eq!(Graph::new(3, [(1, 1, 1.0)]), Err(Error::SelfLoop(1)));
        assert_eq!(
            Graph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge(0, 1))
        );
        assert_eq!(Graph::new(3, [(0, 1, 0.0)]), Err(Error::NonPositiveWeight(0, 1)));
        assert_eq!(Graph::new(3, [(0, 1, f64::NAN)]), Err(Error::NonPositiveWeight(0, 1)));
        assert_eq!(
            Graph::new(3, [(0, 5, 1.0)]),
            Err(Error::VertexOutOfRange { vertex: 5, n: 3 })
        );
    }

    #[test]
    fn exact_laplacian_rows_sum_to_zero() {
        let g = Graph::new(
            4,
            [
                (0, 1, Rational::new(1, 3)),
                (1, 2, Rational::new(2, 7)),
                (0, 3, Rational::new(5, 2)),
            ],
        )
        .unwrap();
        let l = g.laplacian();
        for row in l.row_iter() {
            assert_eq!(
                row.iter().fold(Rational::from_integer(0), |a, &b| a + b),
                Rational::from_integer(0)
            );
        }
    }

    #[test]
    fn cosupport_partitions_vertices() {
        let c = Cosupport::from_complement(8, &[5, 2]).unwrap();
        assert_eq!(c.complement(), &[2, 5]);
        assert_eq!(c.lambda(), &[0, 1, 3, 4, 6, 7]);
        assert_eq!(c.level(), 6);
        assert_eq!(
            Cosupport::from_lambda(4, &[4]),
            Err(Error::IndexOutOfRange { index: 4, n: 4 })
        );
        assert_eq!(Cosupport::from_lambda(4, &[1, 1]), Err(Error::DuplicateIndex(1)));
    }
}
