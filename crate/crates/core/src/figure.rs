//! Data and SVG rendering for the circulant comparison figure: two
//! synthesis atoms `(L†)_i`, `(L†)_j` and their difference on the cycle
//! `S = {1}` (panel a) and on `S = {1,2,3}` (panel b), and the difference
//! signal drawn over the vertex ring (panel c).

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::Serialize;

use crate::analysis::cosparsity;
use crate::circulant::lemma1_decompose;
use crate::error::Result;
use crate::graph::CirculantSpec;
use crate::io::{columns_to_csv, signal_to_csv};
use crate::linalg::{pseudoinverse, TolPolicy};
use crate::scalar::{default_tol, to_f64, Real};
use crate::synthesis::{cyclic_difference, hop_distance_to_set, offknot_difference, synthesize};

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_ATOMS: (usize, usize) = (21, 41);

#[derive(Debug, Clone)]
pub struct AtomPanel<T: Real> {
    pub spec: CirculantSpec<T>,
    pub i: usize,
    pub j: usize,
    pub atom_i: DVector<T>,
    pub atom_j: DVector<T>,
    pub difference: DVector<T>,
}

impl<T: Real> AtomPanel<T> {
    pub fn build(spec: CirculantSpec<T>, i: usize, j: usize) -> Result<Self> {
        let l_pinv = pseudoinverse(&spec.compile().laplacian(), TolPolicy::Standard)?;
        let atom_i = synthesize(&l_pinv, &[i], &[T::one()])?;
        let atom_j = synthesize(&l_pinv, &[j], &[T::one()])?;
        let difference = synthesize(&l_pinv, &[i, j], &[T::one(), -T::one()])?;
        Ok(Self {
            spec,
            i,
            j,
            atom_i,
            atom_j,
            difference,
        })
    }

    pub fn to_csv(&self) -> String {
        columns_to_csv(
            &["atom_i", "atom_j", "difference"],
            &[&self.atom_i, &self.atom_j, &self.difference],
        )
    }
}

#[derive(Debug, Clone)]
pub struct Fig1<T: Real> {
    pub panel_a: AtomPanel<T>,
    pub panel_b: AtomPanel<T>,
}

impl<T: Real> Fig1<T> {
    pub fn build(n: usize, i: usize, j: usize) -> Result<Self> {
        Ok(Self {
            panel_a: AtomPanel::build(CirculantSpec::unweighted(n, &[1])?, i, j)?,
            panel_b: AtomPanel::build(CirculantSpec::unweighted(n, &[1, 2, 3])?, i, j)?,
        })
    }

    /// Panel (c) is the panel (b) difference signal.
    pub fn panel_c(&self) -> &DVector<T> {
        &self.panel_b.difference
    }

    pub fn panel_c_csv(&self) -> String {
        signal_to_csv(self.panel_c())
    }
}

/// Quantitative summary of the figure's qualitative claims.
#[derive(Debug, Clone, Serialize)]
pub struct Fig1Checks {
    pub n: usize,
    pub atoms: (usize, usize),
    /// Max `|Δ² diff_a|` away from the two knots (exactly piecewise linear).
    pub a_offknot_second_difference: f64,
    /// Max `|Δ² atom - 1/n|` away from the atom's knot, panel (a).
    pub a_atom_curvature_deviation: f64,
    /// Hop distance from the knots of the largest `|l(1)·diff_b - diff_a|`.
    pub b_argmax_hops: usize,
    /// Largest aligned deviation more than 5 hops from the knots, relative to
    /// its peak.
    pub b_outside_ratio: f64,
    /// Support of `L diff_b` on the panel (b) graph.
    pub c_support: Vec<usize>,
    pub c_cosparsity: usize,
}

pub const CONCENTRATION_HOPS: usize = 5;
pub const OUTSIDE_RATIO_MAX: f64 = 0.05;

impl Fig1Checks {
    pub fn passed(&self) -> bool {
        let (i, j) = self.atoms;
        let mut want = vec![i, j];
        want.sort_unstable();
        want.dedup();
        let knots_ok = if i == j {
            self.c_support.is_empty()
        } else {
            self.c_support == want
        };
        self.a_offknot_second_difference < 1e-10
            && self.a_atom_curvature_deviation < 1e-10
            && self.b_argmax_hops <= CONCENTRATION_HOPS
            && self.b_outside_ratio < OUTSIDE_RATIO_MAX
            && knots_ok
    }
}

pub fn fig1_checks<T: Real>(fig: &Fig1<T>) -> Result<Fig1Checks> {
    let a = &fig.panel_a;
    let b = &fig.panel_b;
    let n = a.difference.len();
    let knots = [a.i, a.j];

    let a_diff = to_f64(offknot_difference(a.difference.as_slice(), 2, &knots));
    let inv_n = 1.0 / n as f64;
    let mut curvature = 0.0f64;
    for (atom, k) in [(&a.atom_i, a.i), (&a.atom_j, a.j)] {
        let d2 = cyclic_difference(atom.as_slice(), 2);
        for (s, &v) in d2.iter().enumerate() {
            if (s + 1) % n != k {
                curvature = curvature.max((to_f64(v) - inv_n).abs());
            }
        }
    }

    let p1 = to_f64(lemma1_decompose(&b.spec)?.row_sum());
    let aligned: Vec<f64> = (0..n)
        .map(|v| (p1 * to_f64(b.difference[v]) - to_f64(a.difference[v])).abs())
        .collect();
    let hops = hop_distance_to_set(n, &knots);
    let (argmax, peak) = aligned
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (v, &x)| if x > bv { (v, x) } else { (bi, bv) });
    let outside = (0..n)
        .filter(|&v| hops[v] > CONCENTRATION_HOPS)
        .map(|v| aligned[v])
        .fold(0.0f64, f64::max);
    let b_outside_ratio = if peak > 0.0 { outside / peak } else { 0.0 };

    let lap = b.spec.compile().laplacian();
    let (c_cosparsity, lam) = cosparsity(&lap, &b.difference, default_tol())?;

    Ok(Fig1Checks {
        n,
        atoms: (a.i, a.j),
        a_offknot_second_difference: a_diff,
        a_atom_curvature_deviation: curvature,
        b_argmax_hops: if peak > 0.0 { hops[argmax] } else { 0 },
        b_outside_ratio,
        c_support: lam.complement().to_vec(),
        c_cosparsity,
    })
}

// --- SVG -------------------------------------------------------------------

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

pub struct Series<'a> {
    pub name: &'a str,
    pub values: Vec<f64>,
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of several series sampled at `0..len`.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let len = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    let x_max = len.saturating_sub(1).max(1) as f64;
    let px = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}"/>"#);
    let _ = writeln!(out, "</g>");
    for t in nice_ticks(0.0, x_max, 8) {
        let x = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            y0 + 18.0
        );
    }
    for t in nice_ticks(lo, hi, 6) {
        let y = py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    if lo < 0.0 && hi > 0.0 {
        let y = py(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#999" stroke-dasharray="4 3"/>"##
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i as f64), py(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN + 16.0 * k as f64;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn fmt_tick(t: f64) -> String {
    let t = if t.abs() < 1e-12 { 0.0 } else { t };
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Vertices on a ring, each drawn as a marker displaced radially by its
/// value and colored by sign; graph edges drawn underneath.
pub fn ring_scatter_svg(title: &str, values: &[f64], edges: &[(usize, usize)]) -> String {
    let n = values.len().max(1);
    let (cx, cy) = (WIDTH / 2.0, HEIGHT / 2.0 + 10.0);
    let base = (HEIGHT - 2.0 * MARGIN) / 2.0 * 0.75;
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let angle = |i: usize| std::f64::consts::TAU * i as f64 / n as f64 - std::f64::consts::FRAC_PI_2;
    let ring = |i: usize| (cx + base * angle(i).cos(), cy + base * angle(i).sin());
    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(out, r##"<g stroke="#cccccc" stroke-width="0.6">"##);
    for &(i, j) in edges {
        let (x0, y0) = ring(i);
        let (x1, y1) = ring(j);
        let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}"/>"#);
    }
    let _ = writeln!(out, "</g>");
    for (i, &v) in values.iter().enumerate() {
        let r = base + 0.25 * base * v / peak;
        let (x, y) = (cx + r * angle(i).cos(), cy + r * angle(i).sin());
        let color = if v >= 0.0 { PALETTE[0] } else { PALETTE[1] };
        let size = 1.5 + 4.0 * v.abs() / peak;
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{size:.2}" fill="{color}"/>"#);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">vertex ring (radial offset and size: value; blue +, red -)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0
    );
    out.push_str("</svg>\n");
    out
}

fn to_vec<T: Real>(v: &DVector<T>) -> Vec<f64> {
    v.iter().map(|&x| to_f64(x)).collect()
}

pub fn panel_svg<T: Real>(panel: &AtomPanel<T>, title: &str) -> String {
    let name_i = format!("L† e_{}", panel.i);
    let name_j = format!("L† e_{}", panel.j);
    let name_d = format!("L† (e_{} - e_{})", panel.i, panel.j);
    line_plot_svg(
        title,
        "vertex",
        "value",
        &[
            Series {
                name: &name_i,
                values: to_vec(&panel.atom_i),
            },
            Series {
                name: &name_j,
                values: to_vec(&panel.atom_j),
            },
            Series {
                name: &name_d,
                values: to_vec(&panel.difference),
            },
        ],
    )
}

pub fn panel_c_svg<T: Real>(fig: &Fig1<T>) -> String {
    let g = fig.panel_b.spec.compile();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.i, e.j)).collect();
    ring_scatter_svg(
        &format!(
            "(c) L† (e_{} - e_{}) on circulant S = {{1,2,3}}",
            fig.panel_b.i, fig.panel_b.j
        ),
        &to_vec(fig.panel_c()),
        &edges,
    )
}

/// `(file name, contents)` for every artifact of the figure.
pub fn fig1_files<T: Real>(fig: &Fig1<T>) -> Vec<(String, String)> {
    vec![
        ("fig1a.csv".into(), fig.panel_a.to_csv()),
        (
            "fig1a.svg".into(),
            panel_svg(&fig.panel_a, "(a) piecewise-smooth atoms on circulant S = {1}"),
        ),
        ("fig1b.csv".into(), fig.panel_b.to_csv()),
        (
            "fig1b.svg".into(),
            panel_svg(&fig.panel_b, "(b) piecewise-smooth atoms on circulant S = {1,2,3}"),
        ),
        ("fig1c.csv".into(), fig.panel_c_csv()),
        ("fig1c.svg".into(), panel_c_svg(fig)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_figure_checks_pass() {
        let fig = Fig1::<f64>::build(DEFAULT_N, 21, 41).unwrap();
        let c = fig1_checks(&fig).unwrap();
        assert!(c.passed(), "{c:?}");
        assert_eq!(c.c_support, vec![21, 41]);
        assert_eq!(c.c_cosparsity, 62);
        assert_eq!(c.b_argmax_hops, 0);
    }

    #[test]
    fn identical_atoms_give_zero_difference() {
        let fig = Fig1::<f64>::build(32, 7, 7).unwrap();
        assert!(fig.panel_a.difference.iter().all(|&v| v == 0.0));
        assert!(fig.panel_b.difference.iter().all(|&v| v == 0.0));
        let c = fig1_checks(&fig).unwrap();
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let fig = Fig1::<f64>::build(16, 3, 9).unwrap();
        for (name, body) in fig1_files(&fig) {
            if name.ends_with(".svg") {
                assert!(body.starts_with("<svg"));
                assert!(body.trim_end().ends_with("</svg>"));
            }
        }
        let svg = panel_svg(&fig.panel_a, "t");
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(">vertex<"));
    }

    #[test]
    fn ticks_cover_range() {
        assert_eq!(nice_ticks(0.0, 63.0, 8), vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        assert_eq!(fmt_tick(-0.0), "0");
        assert_eq!(fmt_tick(0.25), "0.25");
    }
}
