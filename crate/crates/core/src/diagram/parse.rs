use crate::diagram::ast::*;
use crate::diagram::validate::{Diagnostic, Severity};
use crate::dp::MergeOp;
use crate::error::DiagramError;

/// Cursor over one source line with 1-based column tracking.
struct Line<'a> {
    text: &'a str,
    line: usize,
    pos: usize,
}

impl<'a> Line<'a> {
    fn loc(&self) -> SrcLoc {
        SrcLoc {
            line: self.line,
            col: self.pos + 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic {
            loc: self.loc(),
            severity: Severity::Error,
            message: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(' ') || self.rest().starts_with('\t') {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty() || self.rest().starts_with('#')
    }

    fn expect(&mut self, token: &str) -> Result<(), Diagnostic> {
        self.skip_ws();
        if let Some(rest) = self.rest().strip_prefix(token) {
            self.pos = self.text.len() - rest.len();
            Ok(())
        } else {
            Err(self.err(format!("expected {token:?}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        self.skip_ws();
        let s = self.rest();
        let n = s
            .char_indices()
            .take_while(|(_, c)| c.is_ascii_alphanumeric() || *c == '_')
            .count();
        if n == 0 {
            return Err(self.err(format!("expected {what} (identifier)")));
        }
        self.pos += n;
        Ok(s[..n].to_string())
    }

    fn quoted(&mut self) -> Result<String, Diagnostic> {
        self.expect("\"")?;
        let s = self.rest();
        match s.find('"') {
            Some(i) => {
                let out = s[..i].to_string();
                self.pos += i + 1;
                Ok(out)
            }
            None => Err(self.err("unterminated string literal")),
        }
    }

    fn integer(&mut self) -> Result<usize, Diagnostic> {
        self.skip_ws();
        let s = self.rest();
        let n = s.chars().take_while(|c| c.is_ascii_digit()).count();
        if n == 0 {
            return Err(self.err("expected an integer"));
        }
        self.pos += n;
        s[..n]
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    /// A unit token: anything up to the closing `)`, trimmed.
    fn unit_token(&mut self) -> Result<String, Diagnostic> {
        self.skip_ws();
        let s = self.rest();
        let n = s.chars().take_while(|c| *c != ')' && *c != '#').count();
        let u = s[..n].trim_end().to_string();
        if u.is_empty() {
            return Err(self.err("expected a unit"));
        }
        self.pos += n;
        Ok(u)
    }

    /// `node.port` with an optional `[unit]` suffix.
    fn port_ref(&mut self) -> Result<PortRef, Diagnostic> {
        self.skip_ws();
        let loc = self.loc();
        let node = self.ident("node name")?;
        self.expect(".")?;
        let port = self.ident("port name")?;
        let unit = if self.rest().starts_with('[') {
            self.pos += 1;
            let s = self.rest();
            match s.find(']') {
                Some(i) => {
                    let u = s[..i].to_string();
                    self.pos += i + 1;
                    Some(u)
                }
                None => return Err(self.err("expected ']' after unit")),
            }
        } else {
            None
        };
        Ok(PortRef {
            node,
            port,
            unit,
            loc,
        })
    }
}

fn parse_node(l: &mut Line, loc: SrcLoc) -> Result<NodeDecl, Diagnostic> {
    let name = l.ident("node name")?;
    l.expect("=")?;
    l.skip_ws();
    let kind_loc = l.loc();
    let kind = l.ident("node kind (catalogue, builtin or sum)")?;
    l.expect("(")?;
    let def = match kind.as_str() {
        "catalogue" => NodeDef::Catalogue { path: l.quoted()? },
        "builtin" => {
            let model = l.ident("builtin model name")?;
            l.expect(",")?;
            NodeDef::Builtin {
                model,
                path: l.quoted()?,
            }
        }
        "sum" => {
            let n = l.integer()?;
            l.expect(",")?;
            l.skip_ws();
            let op_loc = l.loc();
            let op = match l.ident("merge op (plus or max)")?.as_str() {
                "plus" => MergeOp::Plus,
                "max" => MergeOp::Max,
                other => {
                    return Err(Diagnostic {
                        loc: op_loc,
                        severity: Severity::Error,
                        message: format!("unknown merge op {other:?}, expected plus or max"),
                    })
                }
            };
            l.expect(",")?;
            let unit = l.unit_token()?;
            NodeDef::Sum { n, op, unit }
        }
        other => {
            return Err(Diagnostic {
                loc: kind_loc,
                severity: Severity::Error,
                message: format!("unknown node kind {other:?}, expected catalogue, builtin or sum"),
            })
        }
    };
    l.expect(")")?;
    Ok(NodeDecl { name, def, loc })
}

/// Parse diagram source. The first syntax error aborts the parse; the
/// error carries its line and column.
pub fn parse_diagram(text: &str) -> Result<DiagramAst, DiagramError> {
    let mut ast = DiagramAst::default();
    for (i, raw) in text.lines().enumerate() {
        let mut l = Line {
            text: raw,
            line: i + 1,
            pos: 0,
        };
        if l.at_end() {
            continue;
        }
        let loc = l.loc();
        let keyword = l.ident("declaration keyword").map_err(DiagramError::Parse)?;
        let result: Result<(), Diagnostic> = (|| {
            match keyword.as_str() {
                "node" => {
                    let n = parse_node(&mut l, loc)?;
                    if ast.node(&n.name).is_some() {
                        return Err(Diagnostic {
                            loc,
                            severity: Severity::Error,
                            message: format!("duplicate node name {:?}", n.name),
                        });
                    }
                    ast.nodes.push(n);
                }
                "wire" => {
                    let from = l.port_ref()?;
                    l.expect("->")?;
                    let to = l.port_ref()?;
                    ast.wires.push(Wire { from, to, loc });
                }
                "expose" => {
                    l.skip_ws();
                    let side_loc = l.loc();
                    let side = match l.ident("side (fun or res)")?.as_str() {
                        "fun" => Side::Fun,
                        "res" => Side::Res,
                        other => {
                            return Err(Diagnostic {
                                loc: side_loc,
                                severity: Severity::Error,
                                message: format!("unknown side {other:?}, expected fun or res"),
                            })
                        }
                    };
                    let port = l.port_ref()?;
                    l.expect("as")?;
                    let alias = l.ident("exposed port name")?;
                    ast.exposes.push(Expose {
                        side,
                        port,
                        alias,
                        loc,
                    });
                }
                other => {
                    return Err(Diagnostic {
                        loc,
                        severity: Severity::Error,
                        message: format!(
                            "unknown declaration {other:?}, expected node, wire or expose"
                        ),
                    })
                }
            }
            if !l.at_end() {
                return Err(l.err("trailing input after declaration"));
            }
            Ok(())
        })();
        result.map_err(DiagramError::Parse)?;
    }
    if ast.nodes.is_empty() {
        return Err(DiagramError::Parse(Diagnostic {
            loc: SrcLoc { line: 1, col: 1 },
            severity: Severity::Error,
            message: "no nodes declared".to_string(),
        }));
    }
    Ok(ast)
}
