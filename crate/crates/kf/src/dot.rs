//! Graphviz rendering of diagrams and lassos.

use std::fmt::Write;

use kf_core::fkd::LinearFkd;
use kf_core::semantics::{LassoModel, World};
use kf_core::syntax::print;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '<' | '>' | '{' | '}' | '|' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

/// The chain left to right. Successor pairs are solid, skips dashed and
/// reflexive pairs drawn as loops. Node labels list the world id and its
/// sentences.
pub fn fkd_to_dot(d: &LinearFkd) -> String {
    let mut s = String::new();
    s.push_str("digraph fkd {\n\trankdir=LR;\n\tnode [shape=record];\n");
    for (k, w) in d.worlds().iter().enumerate() {
        let body: Vec<String> = w.sentences.iter().map(|f| escape(&print(f))).collect();
        let _ = writeln!(s, "\tw{k} [label=\"{{w{k} (id {})|{}}}\"];", w.id.0, body.join("\\l"));
    }
    for (i, j) in d.relation() {
        let style = if j == i + 1 { "" } else if i == j { " [style=dotted]" } else { " [style=dashed]" };
        let _ = writeln!(s, "\tw{i} -> w{j}{style};");
    }
    s.push_str("}\n");
    s
}

fn facts(w: &World) -> String {
    let parts: Vec<String> = w
        .facts
        .iter()
        .map(|f| {
            if f.args.is_empty() {
                f.pred.to_string()
            } else {
                let args: Vec<String> = f.args.iter().map(|a| a.to_string()).collect();
                format!("{}({})", f.pred, args.join(","))
            }
        })
        .collect();
    escape(&parts.join(" "))
}

/// Prefix positions `p0, p1, …` then loop positions `l0, l1, …`, with the
/// back edge from the last loop position to `l0`.
pub fn lasso_to_dot(m: &LassoModel) -> String {
    let mut s = String::from("digraph lasso {\n\trankdir=LR;\n");
    let names: Vec<String> = (0..m.prefix().len())
        .map(|k| format!("p{k}"))
        .chain((0..m.cycle().len()).map(|k| format!("l{k}")))
        .collect();
    for (name, w) in names.iter().zip(m.prefix().iter().chain(m.cycle())) {
        let _ = writeln!(s, "\t{name} [label=\"{name}: {}\"];", facts(w));
    }
    for pair in names.windows(2) {
        let _ = writeln!(s, "\t{} -> {};", pair[0], pair[1]);
    }
    let _ = writeln!(s, "\t{} -> l0 [constraint=false];", names.last().expect("loops are nonempty"));
    s.push_str("}\n");
    s
}
