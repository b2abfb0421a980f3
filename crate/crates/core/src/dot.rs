//! Graphviz output: one rank per level, subdiagram edges drawn bold.

use std::fmt::Write;

use crate::diagram::{BratteliDiagram, Subdiagram};

const STYLES: [&str; 2] = ["style=bold, color=blue", "style=bold, color=red"];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Render `diagram` with up to two highlighted subdiagrams. An edge in both is
/// drawn with the style of the first.
pub fn render_dot(diagram: &BratteliDiagram, subs: &[&Subdiagram]) -> String {
    let mut out = String::new();
    out.push_str("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle, fontsize=10];\n");
    for n in 0..=diagram.depth() {
        let _ = write!(out, "  {{ rank=same;");
        for v in diagram.vertices(n) {
            let _ = write!(out, " {};", quote(&format!("{n}:{v}")));
        }
        out.push_str(" }\n");
        for (i, v) in diagram.vertices(n).iter().enumerate() {
            let bold = subs.iter().position(|s| s.in_w(n, i));
            let attrs = match bold {
                Some(k) if n > 0 => format!(", {}", STYLES[k.min(1)]),
                _ => String::new(),
            };
            let _ = writeln!(out, "  {} [label={}{attrs}];", quote(&format!("{n}:{v}")), quote(v));
        }
    }
    for n in 1..=diagram.depth() {
        for (k, e) in diagram.edges(n).iter().enumerate() {
            let s = format!("{}:{}", n - 1, diagram.vertices(n - 1)[e.source]);
            let r = format!("{n}:{}", diagram.vertices(n)[e.range]);
            let style = match subs.iter().position(|sub| sub.in_f(n, k)) {
                Some(j) => format!(", {}", STYLES[j.min(1)]),
                None => String::new(),
            };
            let _ = writeln!(out, "  {} -> {} [label={}{style}];", quote(&s), quote(&r), quote(&e.id));
        }
    }
    out.push_str("}\n");
    out
}
