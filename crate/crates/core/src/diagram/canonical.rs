use std::collections::HashMap;

use crate::diagram::ast::{DiagramAst, Wire};

/// A diagram rewritten as a loop-free core plus the set of feedback wires
/// that were cut; re-adding `feedback_pairs` to `loop_free` reproduces the
/// original wiring.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub loop_free: DiagramAst,
    pub feedback_pairs: Vec<Wire>,
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    White,
    Gray,
    Black,
}

/// Cut a deterministic feedback arc set: depth-first search rooted at the
/// nodes in lexicographic name order, out-wires visited sorted by
/// (sink node, sink port, source port); back edges are the cut set.
pub fn canonicalize(ast: &DiagramAst) -> CanonicalForm {
    let mut names: Vec<&str> = ast.nodes.iter().map(|n| n.name.as_str()).collect();
    names.sort_unstable();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();

    // adjacency as wire indices, deterministically ordered
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    let mut order: Vec<usize> = (0..ast.wires.len()).collect();
    order.sort_by(|&a, &b| {
        let (wa, wb) = (&ast.wires[a], &ast.wires[b]);
        (&wa.to.node, &wa.to.port, &wa.from.port).cmp(&(&wb.to.node, &wb.to.port, &wb.from.port))
    });
    for wi in order {
        let w = &ast.wires[wi];
        if let Some(&i) = index.get(w.from.node.as_str()) {
            adj[i].push(wi);
        }
    }

    let mut mark = vec![Mark::White; names.len()];
    let mut cut: Vec<usize> = Vec::new();

    fn dfs(
        u: usize,
        ast: &DiagramAst,
        index: &HashMap<&str, usize>,
        adj: &[Vec<usize>],
        mark: &mut [Mark],
        cut: &mut Vec<usize>,
    ) {
        mark[u] = Mark::Gray;
        for &wi in &adj[u] {
            let v = index[ast.wires[wi].to.node.as_str()];
            match mark[v] {
                Mark::Gray => cut.push(wi),
                Mark::White => dfs(v, ast, index, adj, mark, cut),
                Mark::Black => {}
            }
        }
        mark[u] = Mark::Black;
    }

    for root in 0..names.len() {
        if mark[root] == Mark::White {
            dfs(root, ast, &index, &adj, &mut mark, &mut cut);
        }
    }

    cut.sort_unstable();
    let mut loop_free = ast.clone();
    let feedback_pairs: Vec<Wire> = cut.iter().map(|&wi| ast.wires[wi].clone()).collect();
    let mut keep = vec![true; ast.wires.len()];
    for &wi in &cut {
        keep[wi] = false;
    }
    let mut it = keep.iter();
    loop_free.wires.retain(|_| *it.next().unwrap());
    CanonicalForm {
        loop_free,
        feedback_pairs,
    }
}
