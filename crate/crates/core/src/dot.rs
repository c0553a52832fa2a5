//! Graphviz rendering of an unfolding.

use std::fmt::Write;
use std::io;
use std::path::Path;

use crate::domains::TransformerId;
use crate::pes::Pes;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Events become boxes labelled `e<id>: <text>`; immediate causality is a
/// solid arc, direct conflict a dashed undirected edge, cutoffs are striped.
pub fn to_dot<E: Clone>(pes: &Pes<E>, label_text: impl Fn(TransformerId) -> String) -> String {
    let mut out = String::from("digraph unfolding {\n  node [shape=box];\n");
    for ev in pes.events() {
        let style = if ev.cutoff { ", style=striped, fillcolor=\"gray:white\"" } else { "" };
        let _ = writeln!(
            out,
            "  e{} [label=\"e{}: {}\"{}];",
            ev.id,
            ev.id,
            escape(&label_text(ev.label)),
            style
        );
    }
    for ev in pes.events() {
        let mut causes = ev.causes.clone();
        causes.sort_unstable();
        for c in causes {
            let _ = writeln!(out, "  e{c} -> e{};", ev.id);
        }
    }
    for ev in pes.events() {
        let mut conf: Vec<_> = ev.conflicts.iter().copied().filter(|&o| o > ev.id).collect();
        conf.sort_unstable();
        for o in conf {
            let _ = writeln!(out, "  e{} -> e{o} [style=dashed, dir=none];", ev.id);
        }
    }
    out.push_str("}\n");
    out
}

pub fn write_dot<E: Clone>(pes: &Pes<E>, label_text: impl Fn(TransformerId) -> String, path: &Path) -> io::Result<()> {
    std::fs::write(path, to_dot(pes, label_text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indep::{build_independence, Mode};
    use crate::lang::{parse_program, Program};
    use crate::unfolder::{unfold, UnfoldOptions};
    use crate::IntervalInstance;

    #[test]
    fn empty_pes_is_header_only() {
        let pes: Pes<u8> = Pes::new();
        assert_eq!(to_dot(&pes, |_| String::new()), "digraph unfolding {\n  node [shape=box];\n}\n");
    }

    #[test]
    fn chain_has_one_arc() {
        let p: Program<i64> = parse_program("global g = 0; thread { g = 1; g = g + 1; }").unwrap();
        let inst = IntervalInstance::new(&p);
        let r = build_independence(&p, Mode::Heap);
        let res = unfold(&inst, &r, &UnfoldOptions::plain()).unwrap();
        let dot = to_dot(&res.pes, |f| p.stmt_text(&p.edges[f].stmt));
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("e0 -> e1;"));
        assert!(dot.contains("label=\"e1: g = g + 1\""));
    }

    #[test]
    fn racing_writes_give_dashed_edges() {
        let p: Program<i64> = parse_program("global g = 0; thread { g = 1; } thread { g = 2; }").unwrap();
        let inst = IntervalInstance::new(&p);
        let r = build_independence(&p, Mode::Heap);
        let res = unfold(&inst, &r, &UnfoldOptions::default()).unwrap();
        let dot = to_dot(&res.pes, |f| f.to_string());
        assert!(dot.contains("e0 -> e1 [style=dashed, dir=none];"));
    }
}
