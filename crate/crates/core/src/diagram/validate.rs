use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use nalgebra::Matrix2;
use serde::Deserialize;

use crate::av::blocks::{load_sensor_dir, sensor_dpi};
use crate::av::lateral::{lateral_control_dpi, LateralGridPoint, LateralParams};
use crate::catalogue::{port_unit, CatalogueFile};
use crate::diagram::ast::*;
use crate::dp::{weighted_sum_node, Dpi};
use crate::error::{DiagramError, ModelError};
use crate::poset::Poset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A located validation or parse message, rendered as
/// `line:col: severity: message`.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub loc: SrcLoc,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(loc: SrcLoc, message: String) -> Diagnostic {
        Diagnostic {
            loc,
            severity: Severity::Error,
            message,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {}: {}",
            self.loc.line, self.loc.col, sev, self.message
        )
    }
}

/// A node with its DPI and named, factor-aligned port lists.
pub struct ResolvedNode {
    pub name: String,
    pub fun_ports: Vec<(String, Poset)>,
    pub res_ports: Vec<(String, Poset)>,
    pub dpi: Dpi,
}

fn split_ports(names: Vec<String>, poset: &Poset) -> Vec<(String, Poset)> {
    let factors = match poset {
        Poset::Product(fs) if names.len() > 1 => fs.clone(),
        other => vec![other.clone()],
    };
    assert_eq!(names.len(), factors.len(), "port name / factor mismatch");
    names.into_iter().zip(factors).collect()
}

/// Parameter file for the builtin lateral-control block; the design grid
/// is either the explicit `grid` list of (alpha, precision scale,
/// observation frequency, control frequency) points, or the cartesian
/// product of the four sweep lists.
#[derive(Deserialize)]
struct LateralConfig {
    v: f64,
    c: f64,
    noise: [f64; 2],
    q0: [[f64; 2]; 2],
    r0: f64,
    base_obs_precision: [f64; 2],
    base_obs_frequency: f64,
    #[serde(default)]
    alphas: Vec<f64>,
    #[serde(default)]
    precision_scales: Vec<f64>,
    #[serde(default)]
    obs_frequencies: Vec<f64>,
    #[serde(default)]
    ctrl_frequencies: Vec<f64>,
    #[serde(default)]
    grid: Vec<[f64; 4]>,
    noise_levels: Vec<f64>,
}

fn lateral_from_config(path: &Path) -> Result<Dpi, DiagramError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        DiagramError::Model(ModelError::BadParam(format!("{}: {e}", path.display())))
    })?;
    let cfg: LateralConfig = serde_json::from_str(&text).map_err(|e| {
        DiagramError::Model(ModelError::BadParam(format!("{}: {e}", path.display())))
    })?;
    let base = LateralParams {
        v: cfg.v,
        c: cfg.c,
        noise: cfg.noise,
        q0: Matrix2::new(cfg.q0[0][0], cfg.q0[0][1], cfg.q0[1][0], cfg.q0[1][1]),
        r0: cfg.r0,
        alpha: 1.0,
        obs_precision: cfg.base_obs_precision,
        obs_frequency: cfg.base_obs_frequency,
        ctrl_frequency: 10.0,
    };
    let mut grid: Vec<LateralGridPoint> = cfg
        .grid
        .iter()
        .map(|&[alpha, precision_scale, obs_frequency, ctrl_frequency]| LateralGridPoint {
            alpha,
            precision_scale,
            obs_frequency,
            ctrl_frequency,
        })
        .collect();
    for &alpha in &cfg.alphas {
        for &precision_scale in &cfg.precision_scales {
            for &obs_frequency in &cfg.obs_frequencies {
                for &ctrl_frequency in &cfg.ctrl_frequencies {
                    grid.push(LateralGridPoint {
                        alpha,
                        precision_scale,
                        obs_frequency,
                        ctrl_frequency,
                    });
                }
            }
        }
    }
    let (dpi, _report) = lateral_control_dpi(&grid, &cfg.noise_levels, &base)?;
    Ok(dpi)
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Load every node's DPI and port table; paths are resolved against
/// `base_dir`.
pub fn resolve_nodes(
    ast: &DiagramAst,
    base_dir: &Path,
) -> Result<Vec<ResolvedNode>, DiagramError> {
    let mut out = Vec::new();
    for n in &ast.nodes {
        let (fun_names, res_names, dpi) = match &n.def {
            NodeDef::Catalogue { path } => {
                let file = CatalogueFile::load(&base_dir.join(path))?;
                let f: Vec<String> = file.fun_ports.iter().map(|p| p.name.clone()).collect();
                let r: Vec<String> = file.res_ports.iter().map(|p| p.name.clone()).collect();
                (f, r, file.to_dpi())
            }
            NodeDef::Builtin { model, path } => match model.as_str() {
                "sensors" => {
                    let records = load_sensor_dir(&base_dir.join(path))?;
                    (
                        names(&["sensing", "acq_frequency"]),
                        names(&["cost", "mass", "power", "latency_tolerance"]),
                        sensor_dpi(&records)?,
                    )
                }
                "lateral" => (
                    names(&["noise_handled"]),
                    names(&[
                        "obs_precision",
                        "obs_frequency",
                        "ctrl_frequency",
                        "actuation",
                        "tracking_error",
                        "discomfort",
                    ]),
                    lateral_from_config(&base_dir.join(path))?,
                ),
                other => {
                    return Err(DiagramError::Parse(Diagnostic::error(
                        n.loc,
                        format!("unknown builtin model {other:?}"),
                    )))
                }
            },
            NodeDef::Sum { n: arity, op, unit } => {
                let dpi = weighted_sum_node(*arity, Poset::numeric(unit), *op, None)
                    .map_err(|e| DiagramError::Compose {
                        loc: format!("{}:{}", n.loc.line, n.loc.col),
                        source: e,
                    })?;
                let f: Vec<String> = (1..=*arity).map(|k| format!("in{k}")).collect();
                (f, names(&["total"]), dpi)
            }
        };
        out.push(ResolvedNode {
            name: n.name.clone(),
            fun_ports: split_ports(fun_names, &dpi.fun_poset),
            res_ports: split_ports(res_names, &dpi.res_poset),
            dpi,
        });
    }
    Ok(out)
}

/// Structural validation; an empty result means the diagram is compilable.
pub fn validate(ast: &DiagramAst, nodes: &[ResolvedNode]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let by_name: HashMap<&str, &ResolvedNode> =
        nodes.iter().map(|n| (n.name.as_str(), n)).collect();

    // port lookup helpers; record a diagnostic and return None on failure
    let lookup = |r: &PortRef, side: Side, out: &mut Vec<Diagnostic>| -> Option<Poset> {
        let Some(node) = by_name.get(r.node.as_str()) else {
            out.push(Diagnostic::error(
                r.loc,
                format!("unknown node {:?}", r.node),
            ));
            return None;
        };
        let ports = match side {
            Side::Fun => &node.fun_ports,
            Side::Res => &node.res_ports,
        };
        let Some((_, poset)) = ports.iter().find(|(p, _)| *p == r.port) else {
            let kind = match side {
                Side::Fun => "functionality",
                Side::Res => "resource",
            };
            out.push(Diagnostic::error(
                r.loc,
                format!("node {:?} has no {kind} port {:?}", r.node, r.port),
            ));
            return None;
        };
        if let Some(unit) = &r.unit {
            let declared = port_unit(poset);
            if declared.as_deref() != Some(unit.as_str()) {
                out.push(Diagnostic::error(
                    r.loc,
                    format!(
                        "unit mismatch on {}.{}: annotated [{unit}], declared [{}]",
                        r.node,
                        r.port,
                        declared.unwrap_or_else(|| "-".to_string())
                    ),
                ));
            }
        }
        Some(poset.clone())
    };

    for w in &ast.wires {
        let from = lookup(&w.from, Side::Fun, &mut out);
        let to = lookup(&w.to, Side::Res, &mut out);
        if let (Some(f), Some(t)) = (from, to) {
            if f != t {
                out.push(Diagnostic::error(
                    w.loc,
                    format!(
                        "poset mismatch: {}.{} is {} but {}.{} is {}",
                        w.from.node,
                        w.from.port,
                        f.signature(),
                        w.to.node,
                        w.to.port,
                        t.signature()
                    ),
                ));
            }
        }
    }
    for e in &ast.exposes {
        lookup(&e.port, e.side, &mut out);
    }

    // every port used exactly once (wired xor exposed)
    let mut uses: HashMap<(String, Side, String), Vec<SrcLoc>> = HashMap::new();
    for w in &ast.wires {
        uses.entry((w.from.node.clone(), Side::Fun, w.from.port.clone()))
            .or_default()
            .push(w.loc);
        uses.entry((w.to.node.clone(), Side::Res, w.to.port.clone()))
            .or_default()
            .push(w.loc);
    }
    for e in &ast.exposes {
        uses.entry((e.port.node.clone(), e.side, e.port.port.clone()))
            .or_default()
            .push(e.loc);
    }
    for node in nodes {
        for (side, ports) in [(Side::Fun, &node.fun_ports), (Side::Res, &node.res_ports)] {
            for (port, _) in ports {
                let key = (node.name.clone(), side, port.clone());
                match uses.get(&key).map(Vec::len).unwrap_or(0) {
                    0 => {
                        let decl = ast.node(&node.name).map(|n| n.loc).unwrap_or_default();
                        let kind = match side {
                            Side::Fun => "functionality",
                            Side::Res => "resource",
                        };
                        out.push(Diagnostic::error(
                            decl,
                            format!(
                                "dangling {kind} port {}.{}: neither wired nor exposed",
                                node.name, port
                            ),
                        ));
                    }
                    1 => {}
                    k => {
                        let loc = uses[&key][1];
                        out.push(Diagnostic::error(
                            loc,
                            format!("port {}.{} used {k} times", node.name, port),
                        ));
                    }
                }
            }
        }
    }

    // distinct exposed aliases
    for (i, e) in ast.exposes.iter().enumerate() {
        if ast.exposes[..i].iter().any(|p| p.alias == e.alias) {
            out.push(Diagnostic::error(
                e.loc,
                format!("duplicate exposed name {:?}", e.alias),
            ));
        }
    }

    out.sort_by_key(|d| (d.loc.line, d.loc.col));
    out
}
