//! Standalone SVG figures.
//!
//! Colour ramps: significant cells are green, darker for smaller p
//! (`p ≤ 0.001`, `p ≤ 0.01`, otherwise). Signed results use blue for
//! positive or above-median and red for negative or below-median, with the
//! same three depths. Non-significant cells are light grey.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::cluster::Dendrogram;
use crate::data::CataTable;
use crate::error::{Error, Result};
use crate::l1pca::{EllipseSpec, L1PcaModel, ScreeTable};
use crate::perm::{TestId, TestReport};
use crate::stats::{Sign, TermSummary};

pub const NON_SIGNIFICANT: &str = "#e5e5e5";
const GREEN: [&str; 3] = ["#1a7f37", "#4cae6b", "#a6dba0"];
const BLUE: [&str; 3] = ["#08519c", "#3182bd", "#9ecae1"];
const RED: [&str; 3] = ["#a50f15", "#de2d26", "#fc9272"];
const INK: &str = "#333333";

/// Fill for one hypothesis.
pub fn cell_colour(p_value: f64, significant: bool, sign: Option<Sign>) -> &'static str {
    if !significant {
        return NON_SIGNIFICANT;
    }
    let depth = if p_value <= 0.001 {
        0
    } else if p_value <= 0.01 {
        1
    } else {
        2
    };
    match sign {
        Some(Sign::Positive) => BLUE[depth],
        Some(Sign::Negative) => RED[depth],
        _ => GREEN[depth],
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Canvas {
    width: f64,
    height: f64,
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, title: Option<&str>) {
        let _ = write!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}""#
        );
        match title {
            Some(t) => {
                let _ = writeln!(self.body, "><title>{}</title></rect>", escape(t));
            }
            None => self.body.push_str("/>\n"),
        }
    }

    fn outline(&mut self, x: f64, y: f64, w: f64, h: f64) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="{INK}" stroke-width="0.8"/>"#
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    fn dashed(&mut self, x1: f64, y1: f64, x2: f64, y2: f64) {
        let _ = writeln!(
            self.body,
            r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#999999" stroke-width="0.8" stroke-dasharray="4 3"/>"##
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}"/>"#
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{d}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    }

    fn text_rotated(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" transform="rotate(-90 {x:.2} {y:.2})">{}</text>"#,
            escape(s)
        );
    }

    fn title(&mut self, s: &str) {
        let x = self.width / 2.0;
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
            escape(s)
        );
    }

    fn finish(self) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.0} {h:.0}" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="11" fill="{ink}">"#,
                "\n",
                r##"<rect width="100%" height="100%" fill="#ffffff"/>"##,
                "\n{body}</svg>\n"
            ),
            w = self.width.ceil(),
            h = self.height.ceil(),
            ink = INK,
            body = self.body
        )
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Evenly spaced round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + step * 1e-9 {
        out.push(if v.abs() < step * 1e-9 { 0.0 } else { v });
        v += step;
    }
    out
}

/// Screen positions of every dendrogram node along the leaf axis, plus
/// heights. Leaves occupy slots `0..n` in leaf order.
fn node_layout(d: &Dendrogram) -> (Vec<f64>, Vec<f64>) {
    let n = d.labels.len();
    let mut pos = vec![0.0; n + d.merges.len()];
    let mut height = vec![0.0; n + d.merges.len()];
    for (slot, &leaf) in d.leaf_order().iter().enumerate() {
        pos[leaf] = slot as f64;
    }
    for (s, m) in d.merges.iter().enumerate() {
        pos[n + s] = (pos[m.left] + pos[m.right]) / 2.0;
        height[n + s] = m.height;
    }
    (pos, height)
}

/// Draws a dendrogram with leaves along one axis. `leaf_at(slot)` gives the
/// centre coordinate of a leaf slot, `depth(h)` maps a merge height to the
/// other axis.
fn draw_dendrogram(
    c: &mut Canvas,
    d: &Dendrogram,
    horizontal_leaves: bool,
    leaf_at: impl Fn(f64) -> f64,
    depth: impl Fn(f64) -> f64,
) {
    let (pos, height) = node_layout(d);
    let n = d.labels.len();
    for (s, m) in d.merges.iter().enumerate() {
        let h = depth(height[n + s]);
        for child in [m.left, m.right] {
            let a = leaf_at(pos[child]);
            let ch = depth(height[child]);
            if horizontal_leaves {
                c.line(a, ch, a, h, INK, 1.0);
            } else {
                c.line(ch, a, h, a, INK, 1.0);
            }
        }
        let (a, b) = (leaf_at(pos[m.left]), leaf_at(pos[m.right]));
        if horizontal_leaves {
            c.line(a, h, b, h, INK, 1.0);
        } else {
            c.line(h, a, h, b, INK, 1.0);
        }
    }
}

fn label_order(labels: &[String], dendrogram: Option<&Dendrogram>) -> Result<Vec<usize>> {
    let Some(d) = dendrogram else {
        return Ok((0..labels.len()).collect());
    };
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if d.labels.len() != labels.len() {
        return Err(Error::Dimensions("dendrogram does not match the report labels".into()));
    }
    d.leaf_order()
        .iter()
        .map(|&leaf| {
            index
                .get(d.labels[leaf].as_str())
                .copied()
                .ok_or_else(|| Error::Dimensions(format!("label {} not in report", d.labels[leaf])))
        })
        .collect()
}

fn distinct(values: impl Iterator<Item = Option<String>>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in values.flatten() {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

const CELL: f64 = 16.0;

fn legend(c: &mut Canvas, x: f64, y: f64, signed: bool) {
    let mut entries: Vec<(&str, String)> = vec![(NON_SIGNIFICANT, "not significant".into())];
    let depth = ["p <= 0.001", "p <= 0.01", "p > 0.01"];
    if signed {
        for (i, d) in depth.iter().enumerate() {
            entries.push((BLUE[i], format!("above / positive, {d}")));
        }
        for (i, d) in depth.iter().enumerate() {
            entries.push((RED[i], format!("below / negative, {d}")));
        }
    } else {
        for (i, d) in depth.iter().enumerate() {
            entries.push((GREEN[i], format!("significant, {d}")));
        }
    }
    for (i, (colour, text)) in entries.iter().enumerate() {
        let yy = y + i as f64 * 15.0;
        c.rect(x, yy, 11.0, 11.0, colour, None);
        c.text(x + 16.0, yy + 9.5, "start", text);
    }
}

fn legend_height(signed: bool) -> f64 {
    if signed {
        7.0 * 15.0
    } else {
        4.0 * 15.0
    }
}

/// Heatmap of one test family's p-values.
///
/// Test 2 is a single row of terms, Test 3 a products × terms grid, Test 4 a
/// products × products grid and Test 5 one products × products panel per
/// term. `clustering` holds the product and term dendrograms; when given,
/// rows and columns follow their leaf orders and the trees are drawn beside
/// the grid (Tests 2 and 3).
pub fn render_heatmap(report: &TestReport, clustering: Option<(&Dendrogram, &Dendrogram)>) -> Result<String> {
    let products = distinct(
        report
            .rows
            .iter()
            .flat_map(|r| [r.product.clone(), r.product2.clone()]),
    );
    let terms = distinct(report.rows.iter().map(|r| r.term.clone()));
    let (pd, td) = match clustering {
        Some((p, t)) => (Some(p), Some(t)),
        None => (None, None),
    };
    let title = format!(
        "{}: {} of {} significant{}",
        report.test,
        report.n_significant(),
        report.rows.len(),
        if report.fdr_controlled {
            format!(" (FDR {})", fmt_num(report.alpha))
        } else {
            format!(" (p <= {})", fmt_num(report.alpha))
        }
    );
    match report.test {
        TestId::Global => {
            let mut c = Canvas::new(320.0, 140.0);
            c.title(&title);
            let r = &report.rows[0];
            c.rect(40.0, 40.0, 40.0, 40.0, cell_colour(r.p_value, r.significant, None), Some(&format!("p = {}", r.p_value)));
            c.outline(40.0, 40.0, 40.0, 40.0);
            c.text(90.0, 64.0, "start", &format!("p = {}", r.p_value));
            Ok(c.finish())
        }
        TestId::Term | TestId::Cell => {
            let row_labels: Vec<String> = if report.test == TestId::Term {
                vec!["MAD".into()]
            } else {
                products.clone()
            };
            let row_order = if report.test == TestId::Term {
                vec![0]
            } else {
                label_order(&products, pd)?
            };
            let col_order = label_order(&terms, td)?;
            let lookup: HashMap<(usize, usize), usize> = report
                .rows
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let t = terms.iter().position(|x| Some(x) == r.term.as_ref()).unwrap_or(0);
                    let p = match report.test {
                        TestId::Term => 0,
                        _ => products.iter().position(|x| Some(x) == r.product.as_ref()).unwrap_or(0),
                    };
                    ((p, t), k)
                })
                .collect();

            let tree_band = if td.is_some() { 80.0 } else { 0.0 };
            let left_tree = if pd.is_some() && report.test == TestId::Cell { 80.0 } else { 0.0 };
            let label_w = 12.0 + 7.0 * row_labels.iter().map(|l| l.chars().count()).max().unwrap_or(1) as f64;
            let term_label_h = 12.0 + 6.5 * terms.iter().map(|l| l.chars().count()).max().unwrap_or(1) as f64;
            let x0 = 20.0 + left_tree;
            let y0 = 34.0 + tree_band;
            let grid_w = CELL * col_order.len() as f64;
            let grid_h = CELL * row_order.len() as f64;
            let signed = report.test == TestId::Cell;
            let width = (x0 + grid_w + label_w + 20.0).max(300.0);
            let height = y0 + grid_h + term_label_h + legend_height(signed) + 30.0;
            let mut c = Canvas::new(width, height);
            c.title(&title);

            for (ri, &p) in row_order.iter().enumerate() {
                for (ci, &t) in col_order.iter().enumerate() {
                    let x = x0 + ci as f64 * CELL;
                    let y = y0 + ri as f64 * CELL;
                    match lookup.get(&(p, t)) {
                        Some(&k) => {
                            let r = &report.rows[k];
                            let tip = format!(
                                "{}{}: statistic {}, p = {}",
                                r.product.as_deref().map(|s| format!("{s} / ")).unwrap_or_default(),
                                r.term.as_deref().unwrap_or(""),
                                fmt_num(r.statistic),
                                r.p_value
                            );
                            c.rect(x, y, CELL, CELL, cell_colour(r.p_value, r.significant, if signed { r.sign } else { None }), Some(&tip));
                        }
                        None => c.rect(x, y, CELL, CELL, "#ffffff", None),
                    }
                }
                c.text(x0 + grid_w + 6.0, y0 + ri as f64 * CELL + CELL * 0.75, "start", &row_labels[p]);
            }
            c.outline(x0, y0, grid_w, grid_h);
            for (ci, &t) in col_order.iter().enumerate() {
                c.text_rotated(x0 + ci as f64 * CELL + CELL * 0.7, y0 + grid_h + 6.0, "end", &terms[t]);
            }
            if let Some(t) = td {
                let top = t.merges.iter().map(|m| m.height).fold(0.0, f64::max).max(1e-12);
                draw_dendrogram(
                    &mut c,
                    t,
                    true,
                    |slot| x0 + slot * CELL + CELL / 2.0,
                    |h| y0 - 4.0 - (tree_band - 10.0) * h / top,
                );
            }
            if let (Some(p), true) = (pd, left_tree > 0.0) {
                let top = p.merges.iter().map(|m| m.height).fold(0.0, f64::max).max(1e-12);
                draw_dendrogram(
                    &mut c,
                    p,
                    false,
                    |slot| y0 + slot * CELL + CELL / 2.0,
                    |h| x0 - 4.0 - (left_tree - 10.0) * h / top,
                );
            }
            legend(&mut c, 20.0, y0 + grid_h + term_label_h + 10.0, signed);
            Ok(c.finish())
        }
        TestId::Pair => {
            let order = label_order(&products, pd)?;
            let np = products.len();
            let mut grid = vec![None; np * np];
            for r in &report.rows {
                let i = products.iter().position(|x| Some(x) == r.product.as_ref()).unwrap_or(0);
                let j = products.iter().position(|x| Some(x) == r.product2.as_ref()).unwrap_or(0);
                grid[i * np + j] = Some(r);
                grid[j * np + i] = Some(r);
            }
            let label_w = 12.0 + 7.0 * products.iter().map(|l| l.chars().count()).max().unwrap_or(1) as f64;
            let x0 = 20.0 + label_w;
            let y0 = 40.0;
            let side = CELL * np as f64;
            let mut c = Canvas::new((x0 + side + 20.0).max(340.0), y0 + side + label_w + legend_height(false) + 30.0);
            c.title(&title);
            for (ri, &i) in order.iter().enumerate() {
                c.text(x0 - 6.0, y0 + ri as f64 * CELL + CELL * 0.75, "end", &products[i]);
                for (ci, &j) in order.iter().enumerate() {
                    let (x, y) = (x0 + ci as f64 * CELL, y0 + ri as f64 * CELL);
                    match grid[i * np + j] {
                        Some(r) => {
                            let tip = format!("{} vs {}: statistic {}, p = {}", products[i], products[j], fmt_num(r.statistic), r.p_value);
                            c.rect(x, y, CELL, CELL, cell_colour(r.p_value, r.significant, None), Some(&tip));
                        }
                        None => c.rect(x, y, CELL, CELL, "#ffffff", None),
                    }
                }
            }
            for (ci, &j) in order.iter().enumerate() {
                c.text_rotated(x0 + ci as f64 * CELL + CELL * 0.7, y0 + side + 6.0, "end", &products[j]);
            }
            c.outline(x0, y0, side, side);
            legend(&mut c, 20.0, y0 + side + label_w + 10.0, false);
            Ok(c.finish())
        }
        TestId::PairTerm => {
            let order = label_order(&products, pd)?;
            let np = products.len();
            let nt = terms.len();
            // (term, i, j) -> (row, signed as i − j)
            let mut grid: Vec<Option<(usize, bool)>> = vec![None; nt * np * np];
            for (k, r) in report.rows.iter().enumerate() {
                let i = products.iter().position(|x| Some(x) == r.product.as_ref()).unwrap_or(0);
                let j = products.iter().position(|x| Some(x) == r.product2.as_ref()).unwrap_or(0);
                let t = terms.iter().position(|x| Some(x) == r.term.as_ref()).unwrap_or(0);
                grid[(t * np + i) * np + j] = Some((k, false));
                grid[(t * np + j) * np + i] = Some((k, true));
            }
            let cell = 7.0;
            let side = cell * np as f64;
            let per_row = 6usize;
            let panel_w = side + 16.0;
            let panel_h = side + 26.0;
            let rows_of_panels = nt.div_ceil(per_row);
            let width = (20.0 + per_row.min(nt) as f64 * panel_w + 20.0).max(360.0);
            let top = 40.0;
            let height = top + rows_of_panels as f64 * panel_h + legend_height(true) + 30.0;
            let mut c = Canvas::new(width, height);
            c.title(&title);
            for t in 0..nt {
                let px = 20.0 + (t % per_row) as f64 * panel_w;
                let py = top + (t / per_row) as f64 * panel_h;
                let name: String = terms[t].chars().take(16).collect();
                c.text(px, py + 10.0, "start", &name);
                let gy = py + 16.0;
                for (ri, &i) in order.iter().enumerate() {
                    for (ci, &j) in order.iter().enumerate() {
                        let (x, y) = (px + ci as f64 * cell, gy + ri as f64 * cell);
                        match grid[(t * np + i) * np + j] {
                            Some((k, swapped)) => {
                                let r = &report.rows[k];
                                let sign = r.sign.map(|s| if swapped { flip(s) } else { s });
                                let tip = format!(
                                    "{}: {} vs {}, p = {}",
                                    terms[t], products[i], products[j], r.p_value
                                );
                                c.rect(x, y, cell, cell, cell_colour(r.p_value, r.significant, sign), Some(&tip));
                            }
                            None => c.rect(x, y, cell, cell, "#ffffff", None),
                        }
                    }
                }
                c.outline(px, gy, side, side);
            }
            legend(&mut c, 20.0, top + rows_of_panels as f64 * panel_h + 10.0, true);
            Ok(c.finish())
        }
    }
}

fn flip(s: Sign) -> Sign {
    match s {
        Sign::Positive => Sign::Negative,
        Sign::Negative => Sign::Positive,
        Sign::Zero => Sign::Zero,
    }
}

/// Linear map from data to screen.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi - lo < 1e-12 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
        Self { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

/// Bar chart of the Test 1 null distribution as `(value, count)` pairs, with
/// the observed statistic marked.
pub fn render_null_chart(histogram: &[(f64, usize)], observed: f64, p_value: f64) -> String {
    let (w, h) = (560.0, 360.0);
    let (l, r, t, b) = (60.0, 20.0, 40.0, 50.0);
    let mut c = Canvas::new(w, h);
    c.title(&format!("Test 1 null distribution: observed {}, p = {}", fmt_num(observed), p_value));
    let lo = histogram.iter().map(|x| x.0).fold(observed, f64::min);
    let hi = histogram.iter().map(|x| x.0).fold(observed, f64::max);
    let pad = ((hi - lo) * 0.05).max(0.5);
    let xa = Axis::new(lo - pad, hi + pad, l, w - r);
    let top = histogram.iter().map(|x| x.1).max().unwrap_or(1).max(1) as f64;
    let ya = Axis::new(0.0, top * 1.05, h - b, t);
    let step = histogram
        .windows(2)
        .map(|p| p[1].0 - p[0].0)
        .fold(f64::INFINITY, f64::min);
    let bar = if step.is_finite() {
        ((xa.map(lo + step) - xa.map(lo)) * 0.8).clamp(1.0, 30.0)
    } else {
        12.0
    };
    for &(v, n) in histogram {
        let x = xa.map(v);
        c.rect(x - bar / 2.0, ya.map(n as f64), bar, ya.map(0.0) - ya.map(n as f64), "#7f7f7f", Some(&format!("{}: {n}", fmt_num(v))));
    }
    c.line(xa.map(observed), t, xa.map(observed), h - b, "#c0392b", 2.0);
    c.text(xa.map(observed) + 4.0, t + 12.0, "start", "observed");
    axes(&mut c, &xa, &ya, "median of term MADs (%)", "permutations");
    c.finish()
}

fn axes(c: &mut Canvas, xa: &Axis, ya: &Axis, xlabel: &str, ylabel: &str) {
    let (x0, x1) = (xa.from, xa.to);
    let (y0, y1) = (ya.from, ya.to);
    c.line(x0, y0, x1, y0, INK, 1.0);
    c.line(x0, y0, x0, y1, INK, 1.0);
    for v in ticks(xa.lo, xa.hi) {
        let x = xa.map(v);
        c.line(x, y0, x, y0 + 4.0, INK, 1.0);
        c.text(x, y0 + 16.0, "middle", &fmt_num(v));
    }
    for v in ticks(ya.lo, ya.hi) {
        let y = ya.map(v);
        c.line(x0 - 4.0, y, x0, y, INK, 1.0);
        c.text(x0 - 6.0, y + 4.0, "end", &fmt_num(v));
    }
    c.text((x0 + x1) / 2.0, y0 + 34.0, "middle", xlabel);
    c.text_rotated(x0 - 42.0, (y0 + y1) / 2.0, "middle", ylabel);
}

/// Term medians and MADs, terms in decreasing MAD order. MAD bars are shaded
/// by the term's Test 2 result when one is given.
pub fn render_mad_chart(summaries: &[TermSummary], term_test: Option<&TestReport>) -> String {
    let mut order: Vec<usize> = (0..summaries.len()).collect();
    order.sort_by(|&a, &b| summaries[b].mad.total_cmp(&summaries[a].mad).then(a.cmp(&b)));
    let label_h = 12.0 + 6.5 * summaries.iter().map(|s| s.term.chars().count()).max().unwrap_or(1) as f64;
    let slot = 22.0;
    let (l, r, t) = (60.0, 20.0, 50.0);
    let w = (l + r + slot * summaries.len() as f64).max(360.0);
    let plot_h = 260.0;
    let h = t + plot_h + label_h + 30.0;
    let mut c = Canvas::new(w, h);
    c.title("Term medians (outline) and MADs (filled)");
    let top = summaries
        .iter()
        .map(|s| s.median.max(s.mad))
        .fold(0.0, f64::max)
        .max(1.0);
    let ya = Axis::new(0.0, top * 1.05, t + plot_h, t);
    let xa = Axis::new(0.0, summaries.len() as f64, l, l + slot * summaries.len() as f64);
    for (i, &k) in order.iter().enumerate() {
        let s = &summaries[k];
        let x = xa.map(i as f64);
        let row = term_test.and_then(|rep| rep.rows.iter().find(|r| r.term.as_deref() == Some(&s.term)));
        let fill = match row {
            Some(r) => cell_colour(r.p_value, r.significant, None),
            None => "#7f7f7f",
        };
        let tip = format!("{}: median {}, MAD {}", s.term, fmt_num(s.median), fmt_num(s.mad));
        c.rect(x + 3.0, ya.map(s.mad), 8.0, ya.map(0.0) - ya.map(s.mad), fill, Some(&tip));
        let mh = ya.map(0.0) - ya.map(s.median);
        let _ = writeln!(
            c.body,
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="{:.2}" fill="none" stroke="{INK}" stroke-width="0.8"/>"#,
            x + 11.0,
            ya.map(s.median),
            mh
        );
        c.text_rotated(x + slot * 0.6, t + plot_h + 6.0, "end", &s.term);
    }
    c.line(l, t + plot_h, xa.to, t + plot_h, INK, 1.0);
    c.line(l, t + plot_h, l, t, INK, 1.0);
    for v in ticks(ya.lo, ya.hi) {
        let y = ya.map(v);
        c.line(l - 4.0, y, l, y, INK, 1.0);
        c.text(l - 6.0, y + 4.0, "end", &fmt_num(v));
    }
    c.text_rotated(18.0, t + plot_h / 2.0, "middle", "percentage of assessors");
    c.finish()
}

/// Both dendrograms with their leaf labels.
pub fn render_dendrograms(products: &Dendrogram, terms: &Dendrogram) -> String {
    let row = 16.0;
    let tree_w = 260.0;
    let label_w = 12.0 + 7.0 * products.labels.iter().chain(&terms.labels).map(|l| l.chars().count()).max().unwrap_or(1) as f64;
    let w = 40.0 + tree_w + label_w;
    let h1 = row * products.labels.len() as f64;
    let h2 = row * terms.labels.len() as f64;
    let h = 40.0 + h1 + 40.0 + h2 + 20.0;
    let mut c = Canvas::new(w, h);
    c.title("Complete-linkage dendrograms");
    let mut y = 40.0;
    for (name, d, block) in [("products", products, h1), ("terms", terms, h2)] {
        c.text(20.0, y - 6.0, "start", name);
        let top = d.merges.iter().map(|m| m.height).fold(0.0, f64::max).max(1e-12);
        let right = 20.0 + tree_w;
        draw_dendrogram(&mut c, d, false, |s| y + s * row + row / 2.0, |hh| right - (tree_w - 10.0) * hh / top);
        for (slot, &leaf) in d.leaf_order().iter().enumerate() {
            c.text(right + 6.0, y + slot as f64 * row + row * 0.75, "start", &d.labels[leaf]);
        }
        y += block + 40.0;
    }
    c.finish()
}

/// Products as points on components 1 and 2, terms as loading vectors
/// multiplied by `loading_scale` (omitted when 0), ellipses overlaid. When a
/// scree table is given the axes carry `prop_1` and the gain at `K = 2`.
pub fn render_biplot(
    model: &L1PcaModel,
    ellipses: &[EllipseSpec],
    loading_scale: f64,
    scree: Option<&ScreeTable>,
) -> Result<String> {
    if model.components < 2 {
        return Err(Error::InvalidParameter("biplot needs at least two components".into()));
    }
    if !loading_scale.is_finite() || loading_scale < 0.0 {
        return Err(Error::InvalidParameter(format!("loading scale {loading_scale}")));
    }
    let mut xs: Vec<f64> = vec![0.0];
    let mut ys: Vec<f64> = vec![0.0];
    for s in &model.scores {
        xs.push(s[0]);
        ys.push(s[1]);
    }
    if loading_scale > 0.0 {
        for l in &model.loadings {
            xs.push(l[0] * loading_scale);
            ys.push(l[1] * loading_scale);
        }
    }
    for e in ellipses {
        let r = e.semi_axes[0];
        xs.extend([e.center[0] - r, e.center[0] + r]);
        ys.extend([e.center[1] - r, e.center[1] + r]);
    }
    let (xlo, xhi) = bounds(&xs);
    let (ylo, yhi) = bounds(&ys);
    let side = 520.0;
    let span = (xhi - xlo).max(yhi - ylo).max(1e-9) * 1.1;
    let (cx, cy) = ((xlo + xhi) / 2.0, (ylo + yhi) / 2.0);
    let (l, t) = (70.0, 40.0);
    let xa = Axis::new(cx - span / 2.0, cx + span / 2.0, l, l + side);
    let ya = Axis::new(cy - span / 2.0, cy + span / 2.0, t + side, t);
    let unit = side / span;
    let mut c = Canvas::new(l + side + 30.0, t + side + 60.0);
    c.title(&format!("L1-PCA biplot, K = {}, prop = {}", model.components, fmt_num(model.prop)));

    c.dashed(xa.map(xa.lo), ya.map(0.0), xa.map(xa.hi), ya.map(0.0));
    c.dashed(xa.map(0.0), ya.map(ya.lo), xa.map(0.0), ya.map(ya.hi));
    for e in ellipses {
        let _ = writeln!(
            c.body,
            r##"<ellipse cx="{:.2}" cy="{:.2}" rx="{:.2}" ry="{:.2}" transform="rotate({:.3} {:.2} {:.2})" fill="#3182bd" fill-opacity="0.08" stroke="#3182bd" stroke-width="1"><title>{}</title></ellipse>"##,
            xa.map(e.center[0]),
            ya.map(e.center[1]),
            e.semi_axes[0] * unit,
            e.semi_axes[1] * unit,
            -e.angle.to_degrees(),
            xa.map(e.center[0]),
            ya.map(e.center[1]),
            escape(&e.label)
        );
    }
    if loading_scale > 0.0 {
        for (term, l) in model.terms.iter().zip(&model.loadings) {
            let (x, y) = (xa.map(l[0] * loading_scale), ya.map(l[1] * loading_scale));
            c.line(xa.map(0.0), ya.map(0.0), x, y, "#c0392b", 0.8);
            let _ = writeln!(
                c.body,
                r##"<text x="{x:.2}" y="{y:.2}" fill="#c0392b" font-size="9" text-anchor="middle">{}</text>"##,
                escape(term)
            );
        }
    }
    for (name, s) in model.products.iter().zip(&model.scores) {
        let (x, y) = (xa.map(s[0]), ya.map(s[1]));
        c.circle(x, y, 3.5, "#08519c");
        c.text(x + 5.0, y - 5.0, "start", name);
    }
    c.outline(l, t, side, side);
    for v in ticks(xa.lo, xa.hi) {
        let x = xa.map(v);
        c.line(x, t + side, x, t + side + 4.0, INK, 1.0);
        c.text(x, t + side + 16.0, "middle", &fmt_num(v));
    }
    for v in ticks(ya.lo, ya.hi) {
        let y = ya.map(v);
        c.line(l - 4.0, y, l, y, INK, 1.0);
        c.text(l - 6.0, y + 4.0, "end", &fmt_num(v));
    }
    let (ax1, ax2) = match scree.filter(|s| s.entries.len() >= 2) {
        Some(s) => (
            format!("component 1 (prop_1 = {})", fmt_num(s.entries[0].prop)),
            format!("component 2 (gain = {})", fmt_num(s.entries[1].gain)),
        ),
        None => ("component 1".into(), "component 2".into()),
    };
    c.text(l + side / 2.0, t + side + 36.0, "middle", &ax1);
    c.text_rotated(l - 46.0, t + side / 2.0, "middle", &ax2);
    Ok(c.finish())
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Gains per component count as bars, cumulative `prop_K` as a line.
pub fn render_scree(scree: &ScreeTable) -> String {
    let (w, h) = (520.0, 340.0);
    let (l, r, t, b) = (60.0, 20.0, 40.0, 50.0);
    let mut c = Canvas::new(w, h);
    c.title("L1-PCA gains (bars) and explained proportion (line)");
    let n = scree.entries.len();
    let lo = scree.entries.iter().map(|e| e.gain).fold(0.0, f64::min);
    let xa = Axis::new(0.5, n as f64 + 0.5, l, w - r);
    let ya = Axis::new(lo.min(0.0), 1.0, h - b, t);
    let bar = ((w - l - r) / n.max(1) as f64 * 0.6).min(40.0);
    for e in &scree.entries {
        let x = xa.map(e.components as f64);
        let (y1, y2) = (ya.map(e.gain.max(0.0)), ya.map(e.gain.min(0.0)));
        c.rect(x - bar / 2.0, y1, bar, y2 - y1, "#7f7f7f", Some(&format!("K = {}: gain {}", e.components, fmt_num(e.gain))));
    }
    let pts: Vec<(f64, f64)> = scree
        .entries
        .iter()
        .map(|e| (xa.map(e.components as f64), ya.map(e.prop)))
        .collect();
    c.polyline(&pts, "#08519c");
    for &(x, y) in &pts {
        c.circle(x, y, 3.0, "#08519c");
    }
    axes(&mut c, &xa, &ya, "components K", "proportion");
    c.finish()
}

/// Observed table percentages against the model's reconstruction.
pub fn render_reconstruction(table: &[Vec<f64>], reconstruction: &[Vec<f64>]) -> String {
    let (w, h) = (420.0, 420.0);
    let (l, r, t, b) = (60.0, 20.0, 40.0, 50.0);
    let mut c = Canvas::new(w, h);
    c.title("Table against reconstruction");
    let all: Vec<f64> = table.iter().chain(reconstruction).flatten().copied().collect();
    let (lo, hi) = bounds(&all);
    let (lo, hi) = (lo.min(0.0), hi.max(1.0));
    let xa = Axis::new(lo, hi, l, w - r);
    let ya = Axis::new(lo, hi, h - b, t);
    c.dashed(xa.map(lo), ya.map(lo), xa.map(hi), ya.map(hi));
    for (row, rec) in table.iter().zip(reconstruction) {
        for (&x, &y) in row.iter().zip(rec) {
            c.circle(xa.map(x), ya.map(y), 2.0, "#08519c");
        }
    }
    axes(&mut c, &xa, &ya, "table (%)", "reconstruction (%)");
    c.finish()
}

/// Convenience for a fitted model on its own table.
pub fn reconstruction_rows(model: &L1PcaModel) -> Vec<Vec<f64>> {
    let r = model.reconstruction();
    r.row_iter().map(|row| row.iter().copied().collect()).collect()
}

pub fn table_rows(table: &CataTable) -> Vec<Vec<f64>> {
    (0..table.n_products()).map(|p| table.row(p)).collect()
}
