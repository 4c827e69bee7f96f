//! The aggregated verification run behind `gcos verify`.
//!
//! Each suite records residuals against tolerances. A check aggregates many
//! cases into the worst value seen, naming the case that produced it, so the
//! report stays small while still listing every kind of residual.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    basis_from_w, cosparsity, kappa, kappa_brute_force, spark_brute_force, spark_pinv, uniqueness_trial,
    w_matrix_with_offset,
};
use crate::circulant::{
    circulant_laplacian, cycle_pinv, decay_profile, lemma1_decompose, lemma2_pinv_factorization, perturbation_inverse,
};
use crate::error::{Error, Result};
use crate::figure::{fig1_checks, Fig1, CONCENTRATION_HOPS, DEFAULT_ATOMS, DEFAULT_N, OUTSIDE_RATIO_MAX};
use crate::graph::{select_rows, CirculantSpec, Cosupport, Graph};
use crate::linalg::{
    centering_projector, column_space_equal, nullspace_oracle, penrose_residuals, pseudoinverse, rank, TolPolicy,
};
use crate::scalar::{max_abs, scale_of, Ring};
use crate::synthesis::{
    absorb_discontinuity, complete_graph_identities, cyclic_difference, discontinuity_property_residual,
    structured_sparsity_check, synthesize, theorem2_verify, two_hop_knot_check,
};

pub const DEFAULT_SEED: u64 = 42;

/// Deliberate corruptions used to show the suites can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Faults {
    /// Adds one to every diagonal entry of `W` in the analysis-basis suite.
    pub w_off_by_one: bool,
    /// Shifts synthesis coefficients so they no longer sum to zero.
    pub nonzero_sum_coeffs: bool,
}

impl Faults {
    pub fn parse(name: &str) -> Result<Self> {
        let mut f = Faults::default();
        for part in name.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match part {
                "w-off-by-one" => f.w_off_by_one = true,
                "nonzero-sum-coeffs" => f.nonzero_sum_coeffs = true,
                other => return Err(Error::Parse(format!("unknown fault {other:?}"))),
            }
        }
        Ok(f)
    }
}

/// A graph supplied by the user, added to every suite it qualifies for.
#[derive(Debug, Clone)]
pub enum UserGraph {
    General(Graph<f64>),
    Circulant(CirculantSpec<f64>),
}

impl UserGraph {
    pub fn graph(&self) -> Graph<f64> {
        match self {
            UserGraph::General(g) => g.clone(),
            UserGraph::Circulant(s) => s.compile(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub mpp_graphs: usize,
    pub prop1_pairs: usize,
    pub circulant_specs: usize,
    pub uniqueness_trials: usize,
    pub cycle_max_n: usize,
    pub complete_max_n: usize,
    pub brute_force_max_n: usize,
    /// Overrides the residual tolerances that default to `1e-9`.
    pub tol: Option<f64>,
    pub graph: Option<UserGraph>,
    pub faults: Faults,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            mpp_graphs: 50,
            prop1_pairs: 200,
            circulant_specs: 100,
            uniqueness_trials: 100,
            cycle_max_n: 256,
            complete_max_n: 32,
            brute_force_max_n: 6,
            tol: None,
            graph: None,
            faults: Faults::default(),
        }
    }
}

impl VerifyConfig {
    /// Sets every randomized case count to `trials`.
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.mpp_graphs = trials;
        self.prop1_pairs = trials;
        self.circulant_specs = trials;
        self.uniqueness_trials = trials;
        self
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value <= tol`.
    AtMost,
    /// Passes when `value > tol`.
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub bound: Bound,
    pub tol: f64,
    /// Worst value over all cases (largest for `at_most`, smallest for `above`).
    pub value: f64,
    pub worst_case: String,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, bound: Bound, tol: f64) -> Self {
        let value = match bound {
            Bound::AtMost => 0.0,
            Bound::Above => f64::INFINITY,
        };
        Self {
            name: name.into(),
            bound,
            tol,
            value,
            worst_case: String::new(),
            cases: 0,
            failures: 0,
            passed: true,
        }
    }

    fn record(&mut self, value: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        let ok = match self.bound {
            Bound::AtMost => value <= self.tol,
            Bound::Above => value > self.tol,
        };
        let worse = match self.bound {
            Bound::AtMost => value.is_nan() || value > self.value,
            Bound::Above => value.is_nan() || value < self.value,
        };
        if !ok {
            self.failures += 1;
            self.passed = false;
        }
        if worse && !self.value.is_nan() || self.cases == 1 {
            self.value = value;
            self.worst_case = case();
        }
    }

    /// Counts mismatches: `value` is 1 for a failing case, tolerance 0.
    fn record_bool(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { 1.0 }, case);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

impl Suite {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            passed: true,
            checks: Vec::new(),
            error: None,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, bound: Bound, tol: f64) -> usize {
        self.checks.push(Check::new(name, bound, tol));
        self.checks.len() - 1
    }

    fn finish(mut self) -> Self {
        self.passed = self.error.is_none() && self.checks.iter().all(|c| c.passed);
        self
    }

    fn first_failure(&self) -> Option<String> {
        if let Some(e) = &self.error {
            return Some(format!("{}: {e}", self.name));
        }
        self.checks.iter().find(|c| !c.passed).map(|c| {
            format!(
                "{}/{}: {:e} vs tol {:e} at {}",
                self.name, c.name, c.value, c.tol, c.worst_case
            )
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub faults: Faults,
    pub passed: bool,
    pub first_failure: Option<String>,
    pub suites: Vec<Suite>,
}

impl VerifyReport {
    pub fn suite(&self, name: &str) -> Option<&Suite> {
        self.suites.iter().find(|s| s.name == name)
    }
}

// --- random inputs --------------------------------------------------------

/// Random spanning tree on a shuffled vertex order plus each remaining pair
/// with probability `density`; weights uniform in `[0.5, 2)`.
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Result<Graph<f64>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for k in 1..n {
        let u = order[k];
        let v = order[rng.random_range(0..k)];
        present[u][v] = true;
        present[v][u] = true;
        edges.push((u, v, rng.random_range(0.5..2.0)));
    }
    for (i, j) in (0..n).tuple_combinations() {
        if !present[i][j] && rng.random_bool(density) {
            edges.push((i, j, rng.random_range(0.5..2.0)));
        }
    }
    Graph::new(n, edges)
}

/// Integer-weight circulant spec with `1 ∈ S` and bandwidth `M < n/2`.
pub fn random_lemma1_spec<R: Rng + ?Sized>(rng: &mut R, n_max: usize) -> Result<CirculantSpec<i64>> {
    let n = rng.random_range(3..=n_max.max(3));
    let m = rng.random_range(1..=((n - 1) / 2).clamp(1, 6));
    let mut gens = vec![(1usize, rng.random_range(1..=5i64))];
    for s in 2..=m {
        if s == m || rng.random_bool(0.5) {
            gens.push((s, rng.random_range(1..=5i64)));
        }
    }
    CirculantSpec::new(n, gens)
}

fn random_cosupport<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Cosupport> {
    let m = rng.random_range(1..n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    Cosupport::from_complement(n, &idx[..m])
}

/// Connected circulant graphs on `n` vertices, one per hop set.
pub fn connected_circulants(n: usize) -> Vec<CirculantSpec<f64>> {
    let half = n / 2;
    (1..=half)
        .powerset()
        .filter(|hops| !hops.is_empty())
        .filter_map(|hops| CirculantSpec::<f64>::unweighted(n, &hops).ok())
        .filter(|s| s.compile().is_connected())
        .collect()
}

fn spec_name<T: Ring + std::fmt::Debug>(spec: &CirculantSpec<T>) -> String {
    format!("n={} S={:?}", spec.n(), spec.generators())
}

// --- suites ----------------------------------------------------------------

fn mpp_suite(cfg: &VerifyConfig, graphs: &[(String, Graph<f64>)]) -> Result<Suite> {
    let mut s = Suite::new("mpp_axioms");
    let tol = cfg.tol();
    let names = [
        "penrose_axa",
        "penrose_xax",
        "penrose_ax_symmetric",
        "penrose_xa_symmetric",
    ];
    let ids: Vec<usize> = names.iter().map(|n| s.check(n, Bound::AtMost, tol)).collect();
    let proj = s.check("projection_identity", Bound::AtMost, tol);
    for (name, g) in graphs {
        let l = g.laplacian();
        let lp = pseudoinverse(&l, TolPolicy::Standard)?;
        let scale = scale_of(&l).max(scale_of(&lp));
        let r = penrose_residuals(&l, &lp);
        for (k, &id) in ids.iter().enumerate() {
            s.checks[id].record(r[k] / scale, || name.clone());
        }
        if g.is_connected() {
            let res = max_abs(&(&l * &lp - centering_projector::<f64>(g.n())));
            s.checks[proj].record(res, || name.clone());
        } else {
            s.notes
                .push(format!("{name}: disconnected, projection identity skipped"));
        }
    }
    Ok(s)
}

fn prop1_suite(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Suite> {
    let mut s = Suite::new("prop1");
    let tol = cfg.tol();
    let span = s.check("column_space_mismatches", Bound::AtMost, 0.0);
    let rank_c = s.check("rank_mismatches", Bound::AtMost, 0.0);
    let annih = s.check("annihilation_residual", Bound::AtMost, tol);
    let offset = i64::from(cfg.faults.w_off_by_one);

    let mut cases: Vec<(String, Graph<f64>, Cosupport)> = Vec::new();
    for t in 0..cfg.prop1_pairs {
        let n = rng.random_range(3..=24);
        let density = rng.random_range(0.05..0.5);
        let g = random_connected_graph(rng, n, density)?;
        let lam = random_cosupport(rng, n)?;
        cases.push((format!("trial {t} n={n} complement={:?}", lam.complement()), g, lam));
    }
    if let Some(user) = &cfg.graph {
        let g = user.graph();
        if g.is_connected() && g.n() >= 2 {
            let n = g.n();
            for comp in [vec![0], vec![0, n / 2], (0..n - 1).collect::<Vec<_>>()] {
                let mut comp = comp;
                comp.dedup();
                let lam = Cosupport::from_complement(n, &comp)?;
                cases.push((format!("user graph complement={comp:?}"), g.clone(), lam));
            }
        } else {
            s.notes
                .push("user graph disconnected: the analysis basis needs a connected graph".into());
        }
    }

    for (name, g, lam) in &cases {
        let l = g.laplacian();
        let lp = pseudoinverse(&l, TolPolicy::Standard)?;
        let m = lam.complement().len();
        let w = w_matrix_with_offset::<f64>(m, offset);
        let basis = basis_from_w(&lp, lam, &w)?.matrix();
        let restricted = select_rows(&l, lam.lambda());
        let oracle = nullspace_oracle(&restricted);
        s.checks[span].record_bool(column_space_equal(&basis, &oracle, 1e-8), || name.clone());
        s.checks[rank_c].record_bool(rank(&basis) == m && oracle.ncols() == m, || name.clone());
        let res = max_abs(&(&restricted * &basis)) / scale_of(&basis);
        s.checks[annih].record(res, || name.clone());
    }
    Ok(s)
}

fn cycle_suite(cfg: &VerifyConfig) -> Result<Suite> {
    let mut s = Suite::new("cycle_pinv");
    let res = s.check("closed_form_vs_eigensolver", Bound::AtMost, cfg.tol());
    let col = s.check("column_second_difference", Bound::AtMost, 1e-10);
    for n in 3..=cfg.cycle_max_n.max(3) {
        let closed = cycle_pinv::<f64>(n)?;
        let dense = pseudoinverse(&Graph::<f64>::cycle(n)?.laplacian(), TolPolicy::Standard)?;
        s.checks[res].record(max_abs(&(&closed - &dense)), || format!("n={n}"));
        // Column 0: second difference is 1/n - 1 at vertex 0 and 1/n elsewhere.
        let c: Vec<f64> = closed.column(0).iter().copied().collect();
        let d2 = cyclic_difference(&c, 2);
        let inv = 1.0 / n as f64;
        let dev = (0..n)
            .map(|s_| {
                let v = (s_ + 1) % n;
                let want = if v == 0 { inv - 1.0 } else { inv };
                (d2[s_] - want).abs()
            })
            .fold(0.0, f64::max);
        s.checks[col].record(dev, || format!("n={n}"));
    }
    Ok(s)
}

fn lemma_specs(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Vec<CirculantSpec<i64>>> {
    let mut specs = vec![
        CirculantSpec::unweighted(64, &[1, 2, 3])?,
        CirculantSpec::unweighted(3, &[1])?,
    ];
    for _ in 0..cfg.circulant_specs {
        specs.push(random_lemma1_spec(rng, 64)?);
    }
    Ok(specs)
}

fn to_float(spec: &CirculantSpec<i64>) -> Result<CirculantSpec<f64>> {
    spec.map_weights(|w| w as f64)
}

fn lemma1_suite(specs: &[CirculantSpec<i64>]) -> Result<Suite> {
    let mut s = Suite::new("lemma1");
    let exact = s.check("exact_integer_residual", Bound::AtMost, 0.0);
    let float = s.check("float_residual", Bound::AtMost, 1e-12);
    let pd = s.check("min_eigenvalue", Bound::Above, 0.0);
    for spec in specs {
        let name = || spec_name(spec);
        let p = lemma1_decompose(spec)?;
        let lc = Graph::<i64>::cycle(spec.n())?.laplacian();
        let diff = p.to_matrix() * &lc - circulant_laplacian(spec);
        let worst = diff.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        s.checks[exact].record(worst as f64, name);

        let fspec = to_float(spec)?;
        let pf = lemma1_decompose(&fspec)?;
        let lcf = Graph::<f64>::cycle(spec.n())?.laplacian();
        s.checks[float].record(max_abs(&(pf.to_matrix() * lcf - circulant_laplacian(&fspec))), name);
        let min_eig = pf.symbol().into_iter().fold(f64::INFINITY, f64::min);
        s.checks[pd].record(min_eig, name);
    }
    Ok(s)
}

fn lemma2_suite(specs: &[CirculantSpec<i64>]) -> Result<Suite> {
    let mut s = Suite::new("lemma2");
    let res = s.check("relative_residual", Bound::AtMost, 1e-8);
    for spec in specs {
        let f = lemma2_pinv_factorization(&to_float(spec)?)?;
        s.checks[res].record(f.residual / f.scale, || spec_name(spec));
    }
    Ok(s)
}

fn decay_suite() -> Result<Suite> {
    let mut s = Suite::new("decay");
    let mono = s.check("s12_not_decreasing", Bound::AtMost, 0.0);
    let r12 = s.check("s12_ratio_at_10", Bound::AtMost, 1e-4);
    let r123 = s.check("s123_ratio_at_10", Bound::AtMost, 1e-3);
    let p12 = lemma1_decompose(&CirculantSpec::<f64>::unweighted(64, &[1, 2])?)?;
    let d12 = decay_profile(&perturbation_inverse(&p12)?);
    s.checks[mono].record_bool(d12.decreasing, || "n=64 S={1,2}".into());
    s.checks[r12].record(d12.ratio(10), || "n=64 S={1,2}".into());
    let p123 = lemma1_decompose(&CirculantSpec::<f64>::unweighted(64, &[1, 2, 3])?)?;
    let d123 = decay_profile(&perturbation_inverse(&p123)?);
    s.checks[r123].record(d123.ratio(10), || "n=64 S={1,2,3}".into());
    if !d123.decreasing {
        s.notes
            .push("S={1,2,3}: decay oscillates (complex symbol roots); envelope checked".into());
    }
    Ok(s)
}

fn theorem2_suite(cfg: &VerifyConfig) -> Result<Suite> {
    let mut s = Suite::new("theorem2");
    let a2 = s.check("analysis_offknot_second_difference", Bound::AtMost, 1e-10);
    let a_deg = s.check("analysis_degree_above_1", Bound::AtMost, 0.0);
    let s3 = s.check("synthesis_offknot_third_difference", Bound::AtMost, 1e-10);
    let s_deg = s.check("synthesis_degree_above_2", Bound::AtMost, 0.0);
    let atom = s.check("unperturbed_atom_residual", Bound::AtMost, 1e-10);
    let l2 = s.check("lemma2_relative_residual", Bound::AtMost, 1e-8);

    let mut cases = vec![(
        CirculantSpec::<f64>::unweighted(DEFAULT_N, &[1, 2, 3])?,
        Cosupport::from_complement(DEFAULT_N, &[DEFAULT_ATOMS.0, DEFAULT_ATOMS.1])?,
    )];
    if let Some(UserGraph::Circulant(spec)) = &cfg.graph {
        let n = spec.n();
        if spec.contains_hop(1) && 2 * spec.bandwidth() < n {
            let mut comp = vec![0, n / 2];
            comp.dedup();
            cases.push((spec.clone(), Cosupport::from_complement(n, &comp)?));
        }
    }
    for (spec, lam) in &cases {
        let name = || format!("{} complement={:?}", spec_name(spec), lam.complement());
        let r = theorem2_verify(spec, lam, 1e-10)?;
        s.checks[a2].record(r.analysis_offknot_second_difference, name);
        s.checks[a_deg].record_bool(r.analysis_max_degree <= 1, name);
        s.checks[s3].record(r.synthesis_offknot_third_difference, name);
        s.checks[s_deg].record_bool(r.synthesis_max_degree <= 2, name);
        s.checks[atom].record(r.unperturbed_atom_residual, name);
        s.checks[l2].record(r.lemma2_residual / r.lemma2_scale, name);
        s.notes.push(format!(
            "{}: perturbed off-knot second difference {:e}, visible up to {} hops",
            name(),
            r.perturbed_offknot_second_difference,
            r.perturbation_spread
        ));
    }
    Ok(s)
}

fn complete_suite(cfg: &VerifyConfig) -> Result<Suite> {
    let mut s = Suite::new("complete_graph");
    let rs = s.check("incidence_pinv_residual", Bound::AtMost, 1e-10);
    let rl = s.check("laplacian_pinv_residual", Bound::AtMost, 1e-10);
    for n in 2..=cfg.complete_max_n.max(2) {
        let (a, b) = complete_graph_identities::<f64>(n)?;
        s.checks[rs].record(a, || format!("K_{n}"));
        s.checks[rl].record(b, || format!("K_{n}"));
    }
    Ok(s)
}

fn discontinuity_suite(cfg: &VerifyConfig, graphs: &[(String, Graph<f64>)]) -> Result<Suite> {
    let mut s = Suite::new("discontinuity");
    let res = s.check("incidence_residual", Bound::AtMost, cfg.tol());
    let two = s.check("two_hop_residual", Bound::AtMost, cfg.tol());
    let knots = s.check("two_hop_knot_mismatches", Bound::AtMost, 0.0);
    for (name, g) in graphs.iter().filter(|(_, g)| g.is_connected()) {
        s.checks[res].record(discontinuity_property_residual(g)?, || name.clone());
        let c = two_hop_knot_check(g, 0)?;
        s.checks[two].record(c.residual, || name.clone());
        if let Some(ok) = c.knot_match {
            s.checks[knots].record_bool(ok, || name.clone());
        }
    }
    Ok(s)
}

fn synthesis_suite(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, graphs: &[(String, Graph<f64>)]) -> Result<Suite> {
    let mut s = Suite::new("synthesis");
    let res = s.check("analysis_of_synthesis_residual", Bound::AtMost, cfg.tol());
    let zs = s.check("structured_sparsity_failures", Bound::AtMost, 0.0);
    let sup = s.check("knot_recovery_mismatches", Bound::AtMost, 0.0);
    for (name, g) in graphs.iter().filter(|(_, g)| g.is_connected() && g.n() >= 2) {
        let n = g.n();
        let l = g.laplacian();
        let lp = pseudoinverse(&l, TolPolicy::Standard)?;
        let k = rng.random_range(2..=n.min(6));
        let mut support: Vec<usize> = (0..n).collect();
        support.shuffle(rng);
        support.truncate(k);
        support.sort_unstable();
        let mut c: Vec<f64> = (0..k)
            .map(|_| rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let mean = c.iter().sum::<f64>() / k as f64;
        c.iter_mut().for_each(|v| *v -= mean);
        if cfg.faults.nonzero_sum_coeffs {
            c[0] += 1.0;
        }
        let x = synthesize(&lp, &support, &c)?;
        let lx = &l * &x;
        let mut target = nalgebra::DVector::zeros(n);
        for (&j, &v) in support.iter().zip(&c) {
            target[j] = v;
        }
        let case = || format!("{name} support={support:?}");
        s.checks[res].record(
            max_abs(&DMatrix::from_column_slice(n, 1, (lx - &target).as_slice())),
            case,
        );
        s.checks[zs].record_bool(structured_sparsity_check(&c, 1e-12), case);
        let (_, lam) = cosparsity(&l, &x, 1e-9)?;
        s.checks[sup].record_bool(lam.complement() == support.as_slice(), case);
    }
    Ok(s)
}

fn kappa_suite(cfg: &VerifyConfig) -> Result<Suite> {
    let mut s = Suite::new("kappa_spark");
    let kc = s.check("kappa_mismatches", Bound::AtMost, 0.0);
    let sc = s.check("spark_mismatches", Bound::AtMost, 0.0);
    let mut graphs: Vec<(String, Graph<f64>)> = (2..=cfg.brute_force_max_n)
        .flat_map(connected_circulants)
        .map(|spec| (spec_name(&spec), spec.compile()))
        .collect();
    if let Some(user) = &cfg.graph {
        let g = user.graph();
        if g.is_connected() && g.n() <= 8 {
            graphs.push(("user graph".into(), g));
        }
    }
    for (name, g) in &graphs {
        let n = g.n();
        let lap = g.laplacian();
        for l in 0..=n {
            let want = kappa(g, l)?;
            let got = kappa_brute_force(&lap, l);
            let formula = if l < n { n - l } else { 1 };
            s.checks[kc].record_bool(got == want.dim && want.dim == formula, || format!("{name} l={l}"));
        }
        let lp = pseudoinverse(&lap, TolPolicy::Standard)?;
        s.checks[sc].record_bool(spark_brute_force(&lp) == spark_pinv(g)?, || name.clone());
    }
    Ok(s)
}

pub const UNIQUENESS_N: usize = 6;
pub const UNIQUENESS_L: usize = 4;
pub const UNIQUENESS_M: usize = 4;
pub const UNIQUENESS_GAP: f64 = 1e-6;

fn uniqueness_suite(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<Suite> {
    let mut s = Suite::new("uniqueness");
    let gap = s.check("min_measurement_gap", Bound::Above, UNIQUENESS_GAP);
    let lap = Graph::<f64>::cycle(UNIQUENESS_N)?.laplacian();
    for t in 0..cfg.uniqueness_trials {
        let r = uniqueness_trial(&lap, UNIQUENESS_L, UNIQUENESS_M, rng);
        s.checks[gap].record(r.min_gap, || format!("trial {t}"));
    }
    s.notes.push("randomized evidence, not a proof".into());
    Ok(s)
}

fn absorption_suite(specs: &[CirculantSpec<i64>], rng: &mut ChaCha8Rng) -> Result<Suite> {
    let mut s = Suite::new("absorption");
    let c = s.check("pattern_mismatches", Bound::AtMost, 0.0);
    for spec in specs {
        let n = spec.n();
        let j = rng.random_range(0..n);
        let k = rng.random_range(0..n);
        let l = (k + rng.random_range(1..n)) % n;
        let a = absorb_discontinuity(&to_float(spec)?, j, k, l)?;
        s.checks[c].record_bool(a.passed, || format!("{} j={j} k={k} l={l}", spec_name(spec)));
    }
    Ok(s)
}

fn figure_suite() -> Result<Suite> {
    let mut s = Suite::new("figure");
    let a = s.check("a_offknot_second_difference", Bound::AtMost, 1e-10);
    let curv = s.check("a_atom_curvature_deviation", Bound::AtMost, 1e-10);
    let hops = s.check("b_argmax_hops", Bound::AtMost, CONCENTRATION_HOPS as f64);
    let ratio = s.check("b_outside_ratio", Bound::AtMost, OUTSIDE_RATIO_MAX);
    let knots = s.check("c_knot_mismatch", Bound::AtMost, 0.0);
    let fig = Fig1::<f64>::build(DEFAULT_N, DEFAULT_ATOMS.0, DEFAULT_ATOMS.1)?;
    let r = fig1_checks(&fig)?;
    let name = || format!("n={} atoms={:?}", r.n, r.atoms);
    s.checks[a].record(r.a_offknot_second_difference, name);
    s.checks[curv].record(r.a_atom_curvature_deviation, name);
    s.checks[hops].record(r.b_argmax_hops as f64, name);
    s.checks[ratio].record(r.b_outside_ratio, name);
    s.checks[knots].record_bool(r.c_support == vec![DEFAULT_ATOMS.0, DEFAULT_ATOMS.1], name);
    Ok(s)
}

fn run_suite(name: &str, f: impl FnOnce() -> Result<Suite>) -> Suite {
    match f() {
        Ok(s) => s.finish(),
        Err(e) => {
            let mut s = Suite::new(name);
            s.error = Some(e.to_string());
            s.finish()
        }
    }
}

pub fn run(cfg: &VerifyConfig) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut graphs: Vec<(String, Graph<f64>)> = Vec::new();
    for t in 0..cfg.mpp_graphs {
        let n = rng.random_range(2..=64);
        let density = rng.random_range(0.02..0.4);
        if let Ok(g) = random_connected_graph(&mut rng, n, density) {
            graphs.push((format!("random graph {t} n={n}"), g));
        }
    }
    for n in [3, 4, 8, 16] {
        graphs.push((format!("cycle n={n}"), Graph::cycle(n).expect("n >= 3")));
    }
    for n in [2, 5, 8] {
        graphs.push((format!("complete n={n}"), Graph::complete(n).expect("n >= 2")));
    }
    if let Some(user) = &cfg.graph {
        graphs.push(("user graph".into(), user.graph()));
    }

    let specs = lemma_specs(cfg, &mut rng);
    let user_int: Option<CirculantSpec<i64>> = match &cfg.graph {
        Some(UserGraph::Circulant(spec))
            if spec.contains_hop(1)
                && 2 * spec.bandwidth() < spec.n()
                && spec
                    .generators()
                    .iter()
                    .all(|&(_, w)| w.fract() == 0.0 && w.abs() < 1e6) =>
        {
            spec.map_weights(|w| w as i64).ok()
        }
        _ => None,
    };
    let specs = specs.map(|mut v| {
        v.extend(user_int);
        v
    });
    for spec in specs.iter().flatten() {
        if let Ok(f) = to_float(spec) {
            graphs.push((format!("circulant {}", spec_name(spec)), f.compile()));
        }
    }

    let mut suites = vec![
        run_suite("mpp_axioms", || mpp_suite(cfg, &graphs)),
        run_suite("prop1", || prop1_suite(cfg, &mut rng)),
        run_suite("cycle_pinv", || cycle_suite(cfg)),
    ];
    match &specs {
        Ok(specs) => {
            suites.push(run_suite("lemma1", || lemma1_suite(specs)));
            suites.push(run_suite("lemma2", || lemma2_suite(specs)));
            suites.push(run_suite("absorption", || absorption_suite(specs, &mut rng)));
        }
        Err(e) => {
            for name in ["lemma1", "lemma2", "absorption"] {
                suites.push(run_suite(name, || Err(e.clone())));
            }
        }
    }
    suites.push(run_suite("decay", decay_suite));
    suites.push(run_suite("theorem2", || theorem2_suite(cfg)));
    suites.push(run_suite("complete_graph", || complete_suite(cfg)));
    suites.push(run_suite("discontinuity", || discontinuity_suite(cfg, &graphs)));
    suites.push(run_suite("synthesis", || synthesis_suite(cfg, &mut rng, &graphs)));
    suites.push(run_suite("kappa_spark", || kappa_suite(cfg)));
    suites.push(run_suite("uniqueness", || uniqueness_suite(cfg, &mut rng)));
    suites.push(run_suite("figure", figure_suite));

    let first_failure = suites.iter().find_map(Suite::first_failure);
    VerifyReport {
        seed: cfg.seed,
        faults: cfg.faults,
        passed: first_failure.is_none(),
        first_failure,
        suites,
    }
}
