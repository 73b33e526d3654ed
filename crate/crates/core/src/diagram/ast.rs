use std::fmt::Write as _;

use crate::dp::MergeOp;

/// Source location of a declaration (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SrcLoc {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeDef {
    /// `catalogue("path")` — a `.cat`/`.dpt` table file.
    Catalogue { path: String },
    /// `builtin(model, "path")` — a built-in model with a parameter file
    /// (or directory, for the sensor catalogue).
    Builtin { model: String, path: String },
    /// `sum(n, plus|max, unit)` — merge node with fun ports `in1..inN`
    /// and res port `total`.
    Sum { n: usize, op: MergeOp, unit: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeDecl {
    pub name: String,
    pub def: NodeDef,
    pub loc: SrcLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortRef {
    pub node: String,
    pub port: String,
    /// Optional `[unit]` annotation, validated against the declared poset.
    pub unit: Option<String>,
    pub loc: SrcLoc,
}

/// A functionality-port → resource-port connection.
#[derive(Clone, Debug, PartialEq)]
pub struct Wire {
    pub from: PortRef,
    pub to: PortRef,
    pub loc: SrcLoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Fun,
    Res,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expose {
    pub side: Side,
    pub port: PortRef,
    pub alias: String,
    pub loc: SrcLoc,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagramAst {
    pub nodes: Vec<NodeDecl>,
    pub wires: Vec<Wire>,
    pub exposes: Vec<Expose>,
}

impl DiagramAst {
    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// Structural equality ignoring source locations, for round-trip checks.
    pub fn same_shape(&self, other: &DiagramAst) -> bool {
        let strip = |a: &DiagramAst| print_diagram(a);
        strip(self) == strip(other)
    }
}

fn port(p: &PortRef) -> String {
    match &p.unit {
        Some(u) => format!("{}.{}[{}]", p.node, p.port, u),
        None => format!("{}.{}", p.node, p.port),
    }
}

/// Render an AST back to diagram syntax; `parse_diagram` of the output
/// yields a structurally equal AST.
pub fn print_diagram(ast: &DiagramAst) -> String {
    let mut s = String::new();
    for n in &ast.nodes {
        let def = match &n.def {
            NodeDef::Catalogue { path } => format!("catalogue(\"{path}\")"),
            NodeDef::Builtin { model, path } => format!("builtin({model}, \"{path}\")"),
            NodeDef::Sum { n, op, unit } => {
                let op = match op {
                    MergeOp::Plus => "plus",
                    MergeOp::Max => "max",
                };
                format!("sum({n}, {op}, {unit})")
            }
        };
        let _ = writeln!(s, "node {} = {}", n.name, def);
    }
    for w in &ast.wires {
        let _ = writeln!(s, "wire {} -> {}", port(&w.from), port(&w.to));
    }
    for e in &ast.exposes {
        let side = match e.side {
            Side::Fun => "fun",
            Side::Res => "res",
        };
        let _ = writeln!(s, "expose {} {} as {}", side, port(&e.port), e.alias);
    }
    s
}
