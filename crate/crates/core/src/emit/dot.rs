use std::fmt::Write;

use crate::matrix::RelationshipMatrix;
use crate::model::FactorCategory;

/// Widest edge, drawn for the largest cell count.
const MAX_PENWIDTH: f64 = 6.0;

fn shape(category: FactorCategory) -> &'static str {
    match category {
        FactorCategory::Component => "box",
        FactorCategory::Function => "ellipse",
        FactorCategory::ControlFactor => "diamond",
        FactorCategory::NoiseFactor => "parallelogram",
        FactorCategory::Action => "hexagon",
        FactorCategory::Effect => "trapezium",
        FactorCategory::Harm => "doubleoctagon",
    }
}

fn quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// The merged failure network as a Graphviz digraph. Nodes are `f<id>`;
/// every nonzero cell becomes an edge labelled with its count, with pen
/// width proportional to the count.
pub fn export_dot(m: &RelationshipMatrix) -> String {
    let mut out = String::from("digraph failure_network {\n");
    let max = m.edges().map(|(_, _, c)| c).max().unwrap_or(1) as f64;
    for f in m.factors() {
        let _ = writeln!(
            out,
            "  f{} [label={}, shape={}, category={}];",
            f.id,
            quoted(&format!("{}: {}", f.id, f.display_name)),
            shape(f.category),
            f.category.keyword()
        );
    }
    let factors = m.factors();
    for (r, c, count) in m.edges() {
        let _ = writeln!(
            out,
            "  f{} -> f{} [label=\"{}\", penwidth={:.2}];",
            factors[r].id,
            factors[c].id,
            count,
            MAX_PENWIDTH * count as f64 / max
        );
    }
    out.push_str("}\n");
    out
}
