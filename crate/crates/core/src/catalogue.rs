//! Catalogue (`.cat`) and DPI-table (`.dpt`) files.
//!
//! Layout: a YAML-style header declaring the block kind and the
//! functionality/resource ports with their poset signatures, a CSV body
//! (one implementation per row, `;`-separated samples inside curve cells),
//! and a trailing sha256 checksum line over everything above it.
//!
//! ```text
//! mcd-table 1
//! kind: vehicle
//! fun:
//!   dynamic_performance: num[m/s^2]
//! res:
//!   cost: num[CHF]
//! rows:
//! impl,dynamic_performance,cost
//! sedan_small,3.2,16000
//! sha256: 9f8e...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dp::{ImplId, MonotoneTable};
use crate::error::CatalogueError;
use crate::poset::{Poset, Value};
use crate::Dpi;

pub const MAGIC: &str = "mcd-table 1";

#[derive(Clone, Debug)]
pub struct PortDecl {
    pub name: String,
    pub poset: Poset,
}

#[derive(Clone, Debug)]
pub struct CatRow {
    pub name: String,
    pub fun: Vec<Value>,
    pub res: Vec<Value>,
}

#[derive(Clone, Debug)]
pub struct CatalogueFile {
    pub schema_version: u32,
    pub block_kind: String,
    pub fun_ports: Vec<PortDecl>,
    pub res_ports: Vec<PortDecl>,
    pub rows: Vec<CatRow>,
    pub warnings: Vec<String>,
}

/// Collapse a port list into the table's poset: a product for several
/// ports, the bare poset for one.
fn ports_poset(ports: &[PortDecl]) -> Poset {
    if ports.len() == 1 {
        ports[0].poset.clone()
    } else {
        Poset::Product(ports.iter().map(|p| p.poset.clone()).collect())
    }
}

fn pack(values: Vec<Value>) -> Value {
    if values.len() == 1 {
        values.into_iter().next().unwrap()
    } else {
        Value::Tuple(values)
    }
}

impl CatalogueFile {
    pub fn fun_poset(&self) -> Poset {
        ports_poset(&self.fun_ports)
    }

    pub fn res_poset(&self) -> Poset {
        ports_poset(&self.res_ports)
    }

    pub fn to_table(&self) -> MonotoneTable {
        let mut t = MonotoneTable::new(self.fun_poset(), self.res_poset());
        for row in &self.rows {
            t.rows.push((
                pack(row.fun.clone()),
                pack(row.res.clone()),
                ImplId::atom(&row.name),
            ));
        }
        t
    }

    pub fn to_dpi(&self) -> Dpi {
        self.to_table().to_dpi()
    }

    /// Rebuild a file image from an in-memory table; `fun_names`/`res_names`
    /// must match the table's factor counts.
    pub fn from_table(
        block_kind: &str,
        table: &MonotoneTable,
        fun_names: &[&str],
        res_names: &[&str],
    ) -> CatalogueFile {
        let split_ports = |poset: &Poset, names: &[&str]| -> Vec<PortDecl> {
            let factors = match poset {
                Poset::Product(fs) if names.len() > 1 => fs.clone(),
                other => vec![other.clone()],
            };
            assert_eq!(factors.len(), names.len(), "port name count mismatch");
            names
                .iter()
                .zip(factors)
                .map(|(n, p)| PortDecl {
                    name: n.to_string(),
                    poset: p,
                })
                .collect()
        };
        let fun_ports = split_ports(&table.fun_poset, fun_names);
        let res_ports = split_ports(&table.res_poset, res_names);
        let unpack = |v: &Value, n: usize| -> Vec<Value> {
            if n == 1 {
                vec![v.clone()]
            } else {
                v.as_tuple().expect("tuple row").to_vec()
            }
        };
        let rows = table
            .rows
            .iter()
            .map(|(f, r, id)| CatRow {
                name: id.render(),
                fun: unpack(f, fun_names.len()),
                res: unpack(r, res_names.len()),
            })
            .collect();
        CatalogueFile {
            schema_version: 1,
            block_kind: block_kind.to_string(),
            fun_ports,
            res_ports,
            rows,
            warnings: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "kind: {}", self.block_kind);
        let _ = writeln!(s, "fun:");
        for p in &self.fun_ports {
            let _ = writeln!(s, "  {}: {}", p.name, render_sig(&p.poset));
        }
        let _ = writeln!(s, "res:");
        for p in &self.res_ports {
            let _ = writeln!(s, "  {}: {}", p.name, render_sig(&p.poset));
        }
        let _ = writeln!(s, "rows:");
        let mut header = vec!["impl".to_string()];
        header.extend(self.fun_ports.iter().map(|p| p.name.clone()));
        header.extend(self.res_ports.iter().map(|p| p.name.clone()));
        let _ = writeln!(s, "{}", header.join(","));
        for row in &self.rows {
            let mut cells = vec![row.name.clone()];
            cells.extend(row.fun.iter().map(render_cell));
            cells.extend(row.res.iter().map(render_cell));
            let _ = writeln!(s, "{}", cells.join(","));
        }
        let digest = Sha256::digest(s.as_bytes());
        let _ = writeln!(s, "sha256: {:x}", digest);
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), CatalogueError> {
        std::fs::write(path, self.render()).map_err(|e| CatalogueError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<CatalogueFile, CatalogueError> {
        let text = std::fs::read_to_string(path).map_err(|e| CatalogueError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        parse_catalogue(&text, &path.display().to_string())
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

fn parse_num(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        t => t.parse().ok(),
    }
}

fn render_cell(v: &Value) -> String {
    match v {
        Value::Num(x) => fmt_num(*x),
        Value::Label(l) => l.clone(),
        Value::Curve(vs) => vs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(";"),
        Value::Tuple(vs) => vs.iter().map(render_cell).collect::<Vec<_>>().join("|"),
    }
}

/// On-disk poset signature, loss-free (unlike [`Poset::signature`], which
/// abbreviates finite orders and curve grids for error messages).
pub fn render_sig(p: &Poset) -> String {
    match p {
        Poset::Numeric { unit } => format!("num[{unit}]"),
        Poset::Opposite(inner) => format!("op({})", render_sig(inner)),
        Poset::Curve {
            grid,
            unit,
            ascending,
        } => format!(
            "curve[{unit}]{{{}}}({})",
            grid.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(","),
            if *ascending { "asc" } else { "desc" }
        ),
        Poset::Finite { labels, closure } => {
            let n = labels.len();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && closure[i * n + j] {
                        edges.push(format!("{}<{}", labels[i], labels[j]));
                    }
                }
            }
            if edges.is_empty() {
                format!("finite{{{}}}", labels.join(","))
            } else {
                format!("finite{{{};{}}}", labels.join(","), edges.join(","))
            }
        }
        Poset::Product(fs) => {
            // not used at port level, but keep the printer total
            let parts: Vec<String> = fs.iter().map(render_sig).collect();
            format!("({})", parts.join(" * "))
        }
    }
}

/// Parse the signature grammar:
/// `num[unit] | op(sig) | curve[unit]{g0,g1,...}(asc|desc) | finite{l,...;a<b,...}
///  | (sig * sig * ...)`
pub fn parse_sig(s: &str) -> Result<Poset, String> {
    let s = s.trim();
    if s.starts_with('(') && s.ends_with(')') {
        // product port: split on top-level " * "
        let body = &s[1..s.len() - 1];
        let mut parts = Vec::new();
        let mut depth = 0i32;
        let mut start = 0usize;
        let bytes = body.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'(' | b'{' | b'[' => depth += 1,
                b')' | b'}' | b']' => depth -= 1,
                b'*' if depth == 0 => {
                    parts.push(&body[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
            i += 1;
        }
        parts.push(&body[start..]);
        if parts.len() >= 2 {
            let fs = parts
                .into_iter()
                .map(parse_sig)
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Poset::Product(fs));
        }
        // fall through: a parenthesized non-product is not in the grammar
    }
    if let Some(rest) = s.strip_prefix("num[") {
        let unit = rest.strip_suffix(']').ok_or("missing ] in num signature")?;
        return Ok(Poset::numeric(unit));
    }
    if let Some(rest) = s.strip_prefix("op(") {
        let inner = rest.strip_suffix(')').ok_or("missing ) in op signature")?;
        return Ok(Poset::opposite(parse_sig(inner)?));
    }
    if let Some(rest) = s.strip_prefix("curve[") {
        let (unit, rest) = rest.split_once(']').ok_or("missing ] in curve signature")?;
        let rest = rest.strip_prefix('{').ok_or("missing { in curve signature")?;
        let (grid_s, rest) = rest.split_once('}').ok_or("missing } in curve signature")?;
        let dir = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or("missing direction in curve signature")?;
        let ascending = match dir {
            "asc" => true,
            "desc" => false,
            other => return Err(format!("bad curve direction {other:?}")),
        };
        let grid: Vec<f64> = grid_s
            .split(',')
            .map(|t| parse_num(t).ok_or_else(|| format!("bad grid value {t:?}")))
            .collect::<Result<_, _>>()?;
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err("curve grid must be strictly increasing".to_string());
        }
        return Ok(Poset::curve(grid, unit, ascending));
    }
    if let Some(rest) = s.strip_prefix("finite{") {
        let body = rest.strip_suffix('}').ok_or("missing } in finite signature")?;
        let (labels_s, edges_s) = match body.split_once(';') {
            Some((l, e)) => (l, Some(e)),
            None => (body, None),
        };
        let labels: Vec<&str> = labels_s.split(',').map(str::trim).collect();
        let mut edges: Vec<(&str, &str)> = Vec::new();
        if let Some(es) = edges_s {
            for e in es.split(',') {
                let (lo, hi) = e
                    .split_once('<')
                    .ok_or_else(|| format!("bad edge {e:?} in finite signature"))?;
                edges.push((lo.trim(), hi.trim()));
            }
        }
        return Poset::finite(&labels, &edges).map_err(|e| e.to_string());
    }
    Err(format!("unrecognized poset signature {s:?}"))
}

/// Split a CSV row into cells; commas inside braces or parentheses belong
/// to the implementation id (composite ids render as `{a=...,b=...}`).
fn split_row(line: &str) -> Vec<&str> {
    let mut cells = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in line.char_indices() {
        match ch {
            '{' | '(' => depth += 1,
            '}' | ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                cells.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    cells.push(&line[start..]);
    cells
}

fn parse_cell(s: &str, poset: &Poset) -> Result<Value, String> {
    let base = match poset {
        Poset::Opposite(inner) => inner,
        p => p,
    };
    match base {
        Poset::Numeric { .. } => parse_num(s)
            .map(Value::Num)
            .ok_or_else(|| format!("malformed number {s:?}")),
        Poset::Finite { labels, .. } => {
            let t = s.trim();
            if labels.iter().any(|l| l == t) {
                Ok(Value::Label(t.to_string()))
            } else {
                Err(format!("unknown label {t:?}"))
            }
        }
        Poset::Curve { grid, .. } => {
            let vs: Vec<f64> = s
                .split(';')
                .map(|t| parse_num(t).ok_or_else(|| format!("malformed sample {t:?}")))
                .collect::<Result<_, _>>()?;
            if vs.len() != grid.len() {
                return Err(format!(
                    "curve cell has {} samples, grid has {}",
                    vs.len(),
                    grid.len()
                ));
            }
            Ok(Value::Curve(vs))
        }
        Poset::Product(fs) => {
            let parts: Vec<&str> = s.split('|').collect();
            if parts.len() != fs.len() {
                return Err(format!(
                    "tuple cell has {} parts, poset has {} factors",
                    parts.len(),
                    fs.len()
                ));
            }
            let vs = parts
                .iter()
                .zip(fs)
                .map(|(p, f)| parse_cell(p, f))
                .collect::<Result<_, _>>()?;
            Ok(Value::Tuple(vs))
        }
        Poset::Opposite(_) => unreachable!(),
    }
}

/// Parse a value in catalogue cell syntax (`;` curve samples, `|` tuple
/// elements) against a port poset; used for CLI functionality assignments.
pub fn parse_value(s: &str, poset: &Poset) -> Result<Value, String> {
    parse_cell(s, poset)
}

/// Unit string of a port's base poset (numbers and curves only); public so
/// query unit annotations can be validated against diagram ports.
pub fn unit_of(p: &Poset) -> Option<String> {
    port_unit(p)
}

/// Unit string of a port's base poset, for CSV-header validation.
pub(crate) fn port_unit(p: &Poset) -> Option<String> {
    match p {
        Poset::Numeric { unit } | Poset::Curve { unit, .. } => Some(unit.clone()),
        Poset::Opposite(inner) => port_unit(inner),
        _ => None,
    }
}

pub fn parse_catalogue(text: &str, path: &str) -> Result<CatalogueFile, CatalogueError> {
    let err = |line: usize, msg: String| CatalogueError::Format {
        path: path.to_string(),
        line,
        msg,
    };
    let lines: Vec<&str> = text.lines().collect();

    // checksum line must be last and must match everything above it
    let (check_idx, checksum) = lines
        .iter()
        .enumerate()
        .rev()
        .find(|(_, l)| !l.trim().is_empty())
        .and_then(|(i, l)| l.strip_prefix("sha256: ").map(|c| (i, c.trim())))
        .ok_or_else(|| err(lines.len(), "missing sha256 checksum line".to_string()))?;
    let body_len = text.rfind("sha256: ").unwrap();
    let digest = format!("{:x}", Sha256::digest(text[..body_len].as_bytes()));
    if digest != checksum {
        return Err(CatalogueError::Checksum {
            path: path.to_string(),
        });
    }

    let mut it = lines[..check_idx].iter().enumerate();
    let (_, first) = it
        .next()
        .ok_or_else(|| err(1, "empty file".to_string()))?;
    let schema_version = match first.trim() {
        MAGIC => 1,
        other => return Err(err(1, format!("bad magic line {other:?}"))),
    };
    let (_, kind_line) = it
        .next()
        .ok_or_else(|| err(2, "missing kind line".to_string()))?;
    let block_kind = kind_line
        .strip_prefix("kind: ")
        .ok_or_else(|| err(2, "expected `kind: <label>`".to_string()))?
        .trim()
        .to_string();

    // fun: / res: port blocks
    let mut fun_ports = Vec::new();
    let mut res_ports = Vec::new();
    let mut section: Option<&str> = None;
    let mut rows_start = None;
    for (i, line) in it {
        let t = line.trim_end();
        match t {
            "fun:" => section = Some("fun"),
            "res:" => section = Some("res"),
            "rows:" => {
                rows_start = Some(i + 1);
                break;
            }
            _ => {
                let (name, sig) = t
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| err(i + 1, format!("expected `name: signature`, got {t:?}")))?;
                let poset = parse_sig(sig).map_err(|m| err(i + 1, m))?;
                let decl = PortDecl {
                    name: name.trim().to_string(),
                    poset,
                };
                match section {
                    Some("fun") => fun_ports.push(decl),
                    Some("res") => res_ports.push(decl),
                    _ => return Err(err(i + 1, "port declared outside fun:/res:".to_string())),
                }
            }
        }
    }
    let rows_start =
        rows_start.ok_or_else(|| err(check_idx, "missing rows: section".to_string()))?;
    if fun_ports.is_empty() || res_ports.is_empty() {
        return Err(err(
            rows_start,
            "need at least one fun port and one res port".to_string(),
        ));
    }

    let mut warnings = Vec::new();
    let body = &lines[rows_start..check_idx];
    if body.is_empty() {
        warnings.push("empty rows section".to_string());
        return Ok(CatalogueFile {
            schema_version,
            block_kind,
            fun_ports,
            res_ports,
            rows: Vec::new(),
            warnings,
        });
    }

    // CSV header: impl + port names in declared order, optional [unit] suffix
    let header: Vec<&str> = body[0].split(',').map(str::trim).collect();
    let expected: Vec<&PortDecl> = fun_ports.iter().chain(res_ports.iter()).collect();
    if header.len() != expected.len() + 1 || header[0] != "impl" {
        return Err(err(
            rows_start + 1,
            format!(
                "CSV header must be `impl,{}`",
                expected.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(",")
            ),
        ));
    }
    for (cell, decl) in header[1..].iter().zip(&expected) {
        let (name, unit) = match cell.split_once('[') {
            Some((n, u)) => (n, u.strip_suffix(']')),
            None => (*cell, None),
        };
        if name != decl.name {
            return Err(err(
                rows_start + 1,
                format!("CSV column {name:?} does not match declared port {:?}", decl.name),
            ));
        }
        if let Some(u) = unit {
            let declared = port_unit(&decl.poset).unwrap_or_default();
            if u != declared {
                return Err(CatalogueError::UnitMismatch {
                    path: path.to_string(),
                    port: decl.name.clone(),
                    declared,
                    found: u.to_string(),
                });
            }
        }
    }

    let mut rows = Vec::new();
    for (k, line) in body[1..].iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells = split_row(line);
        if cells.len() != expected.len() + 1 {
            let missing = expected
                .get(cells.len().saturating_sub(1))
                .map(|p| p.name.clone())
                .unwrap_or_else(|| "?".to_string());
            return Err(CatalogueError::MissingColumn {
                path: path.to_string(),
                row: k + 1,
                port: missing,
            });
        }
        let name = cells[0].trim().to_string();
        let mut fun = Vec::new();
        let mut res = Vec::new();
        for (j, decl) in expected.iter().enumerate() {
            let v = parse_cell(cells[j + 1], &decl.poset)
                .map_err(|m| err(rows_start + 2 + k, format!("port {:?}: {m}", decl.name)))?;
            if j < fun_ports.len() {
                fun.push(v);
            } else {
                res.push(v);
            }
        }
        rows.push(CatRow { name, fun, res });
    }
    Ok(CatalogueFile {
        schema_version,
        block_kind,
        fun_ports,
        res_ports,
        rows,
        warnings,
    })
}
