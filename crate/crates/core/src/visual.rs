//! Deterministic SVG output: the layered ontology graph and isometric
//! volumetric plots.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::ontology::{Corpus, OntologyGraph};
use crate::render_html::escape;
use crate::scenario_space::{volumetric_cells, Aspect, Cell, Level, Phase, Volumetric};

pub const NODE_WIDTH: f64 = 180.0;
pub const NODE_HEIGHT: f64 = 46.0;
pub const SLOT_GAP: f64 = 40.0;
pub const LAYER_GAP: f64 = 60.0;
pub const MARGIN: f64 = 20.0;
/// Extra room right of the widest layer for back-edge detours.
const DETOUR: f64 = 24.0;
const TITLE_LIMIT: usize = 24;

/// Formats a coordinate with two decimals and no negative zero.
pub(crate) fn num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".to_string()
    } else if r.fract() == 0.0 {
        format!("{r:.0}")
    } else {
        let s = format!("{r:.2}");
        s.trim_end_matches('0').to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePlacement {
    pub layer: usize,
    pub slot: usize,
    /// Top-left corner of the node box.
    pub x: f64,
    pub y: f64,
}

impl NodePlacement {
    pub fn center(&self) -> (f64, f64) {
        (self.x + NODE_WIDTH / 2.0, self.y + NODE_HEIGHT / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRoute {
    pub points: Vec<(f64, f64)>,
    pub label: (f64, f64),
    pub back_edge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayout {
    /// Parallel to `graph.nodes`.
    pub nodes: Vec<NodePlacement>,
    /// Parallel to `graph.edges`; `None` for edges whose endpoints are not nodes.
    pub edges: Vec<Option<EdgeRoute>>,
    pub width: f64,
    pub height: f64,
}

/// Marks back-edges by a depth-first traversal that starts nodes and follows
/// successors in identifier order. Self-loops count as back-edges.
fn find_back_edges(graph: &OntologyGraph) -> (Vec<bool>, Vec<usize>) {
    let n = graph.nodes.len();
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ei, e) in graph.edges.iter().enumerate() {
        if let (Some(s), Some(t)) = (graph.node_index(&e.source), graph.node_index(&e.target)) {
            succ[s].push((t, ei));
        }
    }
    for list in &mut succ {
        list.sort();
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut color = vec![Color::White; n];
    let mut back = vec![false; graph.edges.len()];
    let mut finish_order = Vec::with_capacity(n);
    for root in 0..n {
        if color[root] != Color::White {
            continue;
        }
        color[root] = Color::Grey;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, next)) = stack.last_mut() {
            let v = *v;
            if let Some(&(t, ei)) = succ[v].get(*next) {
                *next += 1;
                match color[t] {
                    Color::White => {
                        color[t] = Color::Grey;
                        stack.push((t, 0));
                    }
                    Color::Grey => back[ei] = true,
                    Color::Black => {}
                }
            } else {
                color[v] = Color::Black;
                finish_order.push(v);
                stack.pop();
            }
        }
    }
    (back, finish_order)
}

/// Longest-path layering over the forward edges (sinks in layer 0), slots
/// assigned by identifier within each layer.
pub fn layout_graph(graph: &OntologyGraph) -> GraphLayout {
    let n = graph.nodes.len();
    let (back, finish_order) = find_back_edges(graph);

    let mut forward: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, e) in graph.edges.iter().enumerate() {
        if back[ei] {
            continue;
        }
        if let (Some(s), Some(t)) = (graph.node_index(&e.source), graph.node_index(&e.target)) {
            forward[s].push(t);
        }
    }
    // Targets of forward edges finish before their sources.
    let mut layer = vec![0usize; n];
    for &v in &finish_order {
        layer[v] = forward[v].iter().map(|&t| layer[t] + 1).max().unwrap_or(0);
    }

    let layer_count = layer.iter().max().map_or(0, |m| m + 1);
    let mut per_layer = vec![0usize; layer_count];
    let mut nodes = Vec::with_capacity(n);
    for &l in &layer {
        let slot = per_layer[l];
        per_layer[l] += 1;
        nodes.push(NodePlacement {
            layer: l,
            slot,
            x: slot as f64 * (NODE_WIDTH + SLOT_GAP) + MARGIN,
            y: l as f64 * (NODE_HEIGHT + LAYER_GAP) + MARGIN,
        });
    }

    let mut seen_pairs: Vec<(usize, usize)> = Vec::new();
    let edges = graph
        .edges
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let (s, t) = (graph.node_index(&e.source)?, graph.node_index(&e.target)?);
            let duplicate = seen_pairs.iter().filter(|p| **p == (s, t)).count();
            seen_pairs.push((s, t));
            let (sp, tp) = (nodes[s], nodes[t]);
            let points = if back[ei] || sp.layer <= tp.layer {
                let (sx, sy) = (sp.x + NODE_WIDTH, sp.center().1);
                let (tx, ty) = (tp.x + NODE_WIDTH, tp.center().1);
                let out = sx.max(tx) + DETOUR / 2.0 + 4.0 * duplicate.min(2) as f64;
                if s == t {
                    vec![(sx, sy - 8.0), (out, sy - 8.0), (out, ty + 8.0), (tx, ty + 8.0)]
                } else {
                    vec![(sx, sy), (out, sy), (out, ty), (tx, ty)]
                }
            } else {
                vec![(sp.center().0, sp.y), (tp.center().0, tp.y + NODE_HEIGHT)]
            };
            let (lx, ly) = midpoint(&points);
            Some(EdgeRoute {
                points,
                label: (lx, ly - 4.0 - 12.0 * duplicate as f64),
                back_edge: back[ei] || sp.layer <= tp.layer,
            })
        })
        .collect();

    let max_slots = per_layer.iter().copied().max().unwrap_or(0);
    let width = if n == 0 {
        2.0 * MARGIN
    } else {
        2.0 * MARGIN + max_slots as f64 * (NODE_WIDTH + SLOT_GAP) - SLOT_GAP + DETOUR
    };
    let height = if n == 0 {
        2.0 * MARGIN
    } else {
        2.0 * MARGIN + layer_count as f64 * (NODE_HEIGHT + LAYER_GAP) - LAYER_GAP
    };
    GraphLayout { nodes, edges, width, height }
}

/// Point halfway along the polyline by arc length.
fn midpoint(points: &[(f64, f64)]) -> (f64, f64) {
    let seg_len = |a: (f64, f64), b: (f64, f64)| ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let total: f64 = points.windows(2).map(|w| seg_len(w[0], w[1])).sum();
    let mut remaining = total / 2.0;
    for w in points.windows(2) {
        let l = seg_len(w[0], w[1]);
        if l >= remaining && l > 0.0 {
            let t = remaining / l;
            return (w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1));
        }
        remaining -= l;
    }
    points.first().copied().unwrap_or((0.0, 0.0))
}

pub fn truncate_title(title: &str) -> String {
    if title.chars().count() > TITLE_LIMIT {
        let mut s: String = title.chars().take(TITLE_LIMIT).collect();
        s.push('…');
        s
    } else {
        title.to_string()
    }
}

const GRAPH_DEFS: &str = concat!(
    "<defs>\n",
    "<marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto-start-reverse\">",
    "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#333333\"/></marker>\n",
    "</defs>\n",
);

/// Nodes in identifier order, then edges in graph order.
pub fn render_graph_svg(layout: &GraphLayout, graph: &OntologyGraph, corpus: &Corpus) -> String {
    let mut svg = String::new();
    let (w, h) = (num(layout.width), num(layout.height));
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">"
    );
    svg.push_str(GRAPH_DEFS);
    for (id, p) in graph.nodes.iter().zip(&layout.nodes) {
        let title = corpus.get(id).map_or(id.as_str(), |d| d.title());
        let (cx, cy) = p.center();
        let _ = writeln!(
            svg,
            "<g class=\"node\" id=\"node-{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"8\" ry=\"8\" fill=\"#f4f6fb\" stroke=\"#34495e\"/><text x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-size=\"13\">{}</text></g>",
            escape(id),
            num(p.x),
            num(p.y),
            num(NODE_WIDTH),
            num(NODE_HEIGHT),
            num(cx),
            num(cy),
            escape(&truncate_title(title)),
        );
    }
    for (edge, route) in graph.edges.iter().zip(&layout.edges) {
        let Some(route) = route else { continue };
        let points: Vec<String> = route.points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        let dash = if route.back_edge { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            svg,
            "<g class=\"edge\" data-source=\"{}\" data-target=\"{}\"><polyline points=\"{}\" fill=\"none\" stroke=\"#333333\"{dash} marker-end=\"url(#arrow)\"/><text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" fill=\"#555555\">{}</text></g>",
            escape(&edge.source),
            escape(&edge.target),
            points.join(" "),
            num(route.label.0),
            num(route.label.1),
            escape(&edge.nature),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Isometric projection: aspect to the lower right, level to the lower left,
/// phase upwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoProjection {
    pub scale: f64,
    pub x_offset: f64,
    pub y_offset: f64,
}

const COS30: f64 = 0.866_025_403_784_438_6;
const SIN30: f64 = 0.5;

impl IsoProjection {
    pub const DEFAULT_SCALE: f64 = 18.0;
    pub const THUMBNAIL_SCALE: f64 = 6.0;

    pub fn new(scale: f64, x_offset: f64, y_offset: f64) -> Self {
        IsoProjection { scale, x_offset, y_offset }
    }

    /// Projects a point given in (aspect, phase, level) grid units.
    pub fn project(&self, a: f64, p: f64, l: f64) -> (f64, f64) {
        let s = self.scale;
        ((a - l) * COS30 * s + self.x_offset, (a + l) * SIN30 * s - p * s + self.y_offset)
    }

    pub fn project_cell(&self, c: Cell) -> (f64, f64) {
        self.project(c.aspect as f64, c.phase as f64, c.level as f64)
    }
}

const FACE_TOP: &str = "#d6e4f5";
const FACE_LEFT: &str = "#9dbbe0";
const FACE_RIGHT: &str = "#6b93c9";
const FACE_STROKE: &str = "#2c4a70";

/// Cells in painter order: far to near, then by (aspect, phase, level).
pub fn painter_order(cells: &BTreeSet<Cell>) -> Vec<Cell> {
    let mut v: Vec<Cell> = cells.iter().copied().collect();
    v.sort_by_key(|c| (c.aspect as u32 + c.phase as u32 + c.level as u32, *c));
    v
}

/// The three visible faces of the unit cube at `c`: top, left (level side),
/// right (aspect side).
pub fn cube_faces(proj: &IsoProjection, c: Cell) -> [[(f64, f64); 4]; 3] {
    let (a, p, l) = (c.aspect as f64, c.phase as f64, c.level as f64);
    let pt = |da: f64, dp: f64, dl: f64| proj.project(a + da, p + dp, l + dl);
    [
        [pt(0.0, 1.0, 0.0), pt(1.0, 1.0, 0.0), pt(1.0, 1.0, 1.0), pt(0.0, 1.0, 1.0)],
        [pt(0.0, 0.0, 1.0), pt(1.0, 0.0, 1.0), pt(1.0, 1.0, 1.0), pt(0.0, 1.0, 1.0)],
        [pt(1.0, 0.0, 0.0), pt(1.0, 0.0, 1.0), pt(1.0, 1.0, 1.0), pt(1.0, 1.0, 0.0)],
    ]
}

fn polygon(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{},{}", num(*x), num(*y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Draws the grid frame and one cube per covered cell.
pub fn render_volumetric_svg(v: &Volumetric, thumbnail: bool) -> String {
    let (a_len, p_len, l_len) = (Aspect::ALL.len() as f64, Phase::ALL.len() as f64, Level::ALL.len() as f64);
    let s = if thumbnail { IsoProjection::THUMBNAIL_SCALE } else { IsoProjection::DEFAULT_SCALE };
    let (pad_x, pad_top, pad_bottom) = if thumbnail { (2.0, 2.0, 2.0) } else { (96.0, 16.0, 16.0) };
    let proj = IsoProjection::new(s, l_len * COS30 * s + pad_x, p_len * s + pad_top);
    let width = (a_len + l_len) * COS30 * s + 2.0 * pad_x;
    let height = (a_len + l_len) * SIN30 * s + p_len * s + pad_top + pad_bottom;

    let mut svg = String::new();
    let (w, h) = (num(width), num(height));
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">"
    );

    // Frame: ground grid, back walls' outline and the vertical axis.
    svg.push_str("<g class=\"frame\" stroke=\"#b0b0b0\" stroke-width=\"0.5\" fill=\"none\">\n");
    let line = |svg: &mut String, a: (f64, f64), b: (f64, f64)| {
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1)
        );
    };
    for i in 0..=Aspect::ALL.len() {
        let a = i as f64;
        line(&mut svg, proj.project(a, 0.0, 0.0), proj.project(a, 0.0, l_len));
    }
    for i in 0..=Level::ALL.len() {
        let l = i as f64;
        line(&mut svg, proj.project(0.0, 0.0, l), proj.project(a_len, 0.0, l));
    }
    for i in 1..=Phase::ALL.len() {
        let p = i as f64;
        line(&mut svg, proj.project(0.0, p, l_len), proj.project(0.0, p, 0.0));
        line(&mut svg, proj.project(0.0, p, 0.0), proj.project(a_len, p, 0.0));
    }
    line(&mut svg, proj.project(0.0, 0.0, l_len), proj.project(0.0, p_len, l_len));
    line(&mut svg, proj.project(0.0, 0.0, 0.0), proj.project(0.0, p_len, 0.0));
    line(&mut svg, proj.project(a_len, 0.0, 0.0), proj.project(a_len, p_len, 0.0));
    svg.push_str("</g>\n");

    if !thumbnail {
        svg.push_str("<g class=\"labels\" font-size=\"9\" fill=\"#444444\">\n");
        for aspect in Aspect::ALL {
            let (x, y) = proj.project(aspect.ordinal() as f64 + 0.5, 0.0, l_len);
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                num(x - 4.0),
                num(y + 10.0),
                aspect.as_str()
            );
        }
        for level in Level::ALL {
            let (x, y) = proj.project(a_len, 0.0, level.ordinal() as f64 + 0.5);
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"start\">{}</text>",
                num(x + 4.0),
                num(y + 10.0),
                escape(level.as_str())
            );
        }
        for phase in Phase::ALL {
            let (x, y) = proj.project(0.0, phase.ordinal() as f64 + 0.5, l_len);
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                num(x - 4.0),
                num(y + 3.0),
                phase.as_str()
            );
        }
        svg.push_str("</g>\n");
    }

    svg.push_str(&format!("<g class=\"cubes\" stroke=\"{FACE_STROKE}\" stroke-width=\"0.5\">\n"));
    for cell in painter_order(&volumetric_cells(v)) {
        let [top, left, right] = cube_faces(&proj, cell);
        for (class, fill, face) in [("top", FACE_TOP, top), ("left", FACE_LEFT, left), ("right", FACE_RIGHT, right)] {
            let _ = writeln!(
                svg,
                "<polygon class=\"{class}\" fill=\"{fill}\" points=\"{}\"/>",
                polygon(&face)
            );
        }
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}
