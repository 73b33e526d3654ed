//! `solve` and `sweep`: compile a diagram, evaluate functionality queries,
//! and certify sweep monotonicity by upper-set inclusion.

use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};

use mcd_core::antichain::Antichain;
use mcd_core::catalogue::{parse_value, unit_of};
use mcd_core::diagram::{compile, parse_diagram, Compiled, PortInfo};
use mcd_core::poset::Value;

use crate::solution::{
    impl_to_json, value_to_json, CertPair, Certificate, PortMeta, QueryResult, SolutionFile,
    SolutionPoint,
};
use crate::write_out;

pub fn load_diagram(path: &Path) -> Result<Compiled> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read diagram {}", path.display()))?;
    let ast = parse_diagram(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    compile(&ast, base).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Parse one `port=value[unit]` assignment against the diagram's exposed
/// functionality ports.
fn parse_assignment(spec: &str, ports: &[PortInfo]) -> Result<(String, Value)> {
    let (name, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("bad assignment {spec:?}, expected port=value[unit]"))?;
    let port = ports
        .iter()
        .find(|p| p.alias == name)
        .ok_or_else(|| anyhow!("unknown functionality port {name:?}"))?;
    // optional [unit] suffix, validated against the declared poset
    let value_str = if raw.ends_with(']') {
        let open = raw
            .rfind('[')
            .ok_or_else(|| anyhow!("{spec:?}: unmatched ']'"))?;
        let unit = &raw[open + 1..raw.len() - 1];
        let declared = unit_of(&port.poset);
        if declared.as_deref() != Some(unit) {
            bail!(
                "{spec:?}: unit [{unit}] does not match port {name}'s declared [{}]",
                declared.unwrap_or_else(|| "-".to_string())
            );
        }
        &raw[..open]
    } else {
        raw
    };
    let value = parse_value(value_str, &port.poset)
        .map_err(|e| anyhow!("{spec:?}: {e}"))?;
    Ok((name.to_string(), value))
}

/// Assemble the full functionality tuple; every exposed port must be
/// assigned exactly once.
fn build_query(assignments: &[(String, Value)], ports: &[PortInfo]) -> Result<Value> {
    let mut parts = Vec::with_capacity(ports.len());
    for p in ports {
        let hits: Vec<&Value> = assignments
            .iter()
            .filter(|(n, _)| *n == p.alias)
            .map(|(_, v)| v)
            .collect();
        match hits.len() {
            0 => bail!("functionality port {:?} is not assigned", p.alias),
            1 => parts.push(hits[0].clone()),
            _ => bail!("functionality port {:?} assigned more than once", p.alias),
        }
    }
    Ok(if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        Value::Tuple(parts)
    })
}

fn port_meta(ports: &[PortInfo]) -> Vec<PortMeta> {
    ports
        .iter()
        .map(|p| PortMeta {
            name: p.alias.clone(),
            unit: unit_of(&p.poset),
        })
        .collect()
}

fn run_query(
    compiled: &Compiled,
    assignments: &[(String, Value)],
) -> Result<(QueryResult, Antichain)> {
    let q = build_query(assignments, &compiled.fun_ports)?;
    let points = compiled
        .dpi
        .eval_h_with_impls(&q)
        .map_err(|e| anyhow!("query failed: {e}"))?;
    let antichain = Antichain::from_points(
        points.iter().map(|(v, _)| v.clone()).collect(),
        compiled.dpi.res_poset.clone(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let mut fun = serde_json::Map::new();
    for (n, v) in assignments {
        fun.insert(n.clone(), value_to_json(v));
    }
    let json_points = points
        .iter()
        .map(|(r, id)| {
            let parts: Vec<&Value> = if compiled.res_ports.len() == 1 {
                vec![r]
            } else {
                r.as_tuple().unwrap_or_default().iter().collect()
            };
            let mut res = serde_json::Map::new();
            for (p, v) in compiled.res_ports.iter().zip(parts) {
                res.insert(p.alias.clone(), value_to_json(v));
            }
            SolutionPoint {
                res,
                impls: impl_to_json(id),
            }
        })
        .collect();
    Ok((
        QueryResult {
            fun,
            feasible: !points.is_empty(),
            points: json_points,
        },
        antichain,
    ))
}

pub fn cmd_solve(diagram: &Path, fun: &[String], out: &str) -> Result<ExitCode> {
    let compiled = load_diagram(diagram)?;
    let assignments: Vec<(String, Value)> = fun
        .iter()
        .map(|s| parse_assignment(s, &compiled.fun_ports))
        .collect::<Result<_>>()?;
    let (result, _) = run_query(&compiled, &assignments)?;
    let feasible = result.feasible;
    let n_points = result.points.len();
    let file = SolutionFile {
        diagram: diagram.display().to_string(),
        fun_ports: port_meta(&compiled.fun_ports),
        res_ports: port_meta(&compiled.res_ports),
        sweep_port: None,
        queries: vec![result],
        certificate: None,
    };
    write_out(out, &format!("{}\n", serde_json::to_string_pretty(&file)?))?;
    if feasible {
        eprintln!("feasible: {n_points} minimal design(s)");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("infeasible: empty antichain");
        Ok(ExitCode::from(2))
    }
}

pub fn cmd_sweep(diagram: &Path, fun: &[String], sweep: &str, out: &str) -> Result<ExitCode> {
    let compiled = load_diagram(diagram)?;
    let base: Vec<(String, Value)> = fun
        .iter()
        .map(|s| parse_assignment(s, &compiled.fun_ports))
        .collect::<Result<_>>()?;
    let (port, values_raw) = sweep
        .split_once('=')
        .ok_or_else(|| anyhow!("bad sweep {sweep:?}, expected port=v1,v2,..."))?;
    if !compiled.fun_ports.iter().any(|p| p.alias == port) {
        bail!("unknown sweep port {port:?}");
    }
    let mut queries = Vec::new();
    let mut chains: Vec<(String, Antichain)> = Vec::new();
    let mut all_feasible = true;
    for v in values_raw.split(',') {
        let mut assignments = base.clone();
        assignments.push(parse_assignment(&format!("{port}={v}"), &compiled.fun_ports)?);
        let (result, antichain) = run_query(&compiled, &assignments)?;
        all_feasible &= result.feasible;
        eprintln!(
            "{port}={v}: {}",
            if result.feasible {
                format!("{} minimal design(s)", result.points.len())
            } else {
                "infeasible".to_string()
            }
        );
        queries.push(result);
        chains.push((v.trim().to_string(), antichain));
    }
    // monotonicity certificate: each query's upper set must contain the
    // next one's (higher functionality demands at least as many resources)
    let mut pairs = Vec::new();
    let mut pass = true;
    for w in chains.windows(2) {
        let nested = w[0].1.upper_set_includes(&w[1].1).map_err(|e| anyhow!("{e}"))?;
        pass &= nested;
        pairs.push(CertPair {
            from: w[0].0.clone(),
            to: w[1].0.clone(),
            nested,
        });
    }
    eprintln!("monotonicity certificate: {}", if pass { "pass" } else { "fail" });
    let file = SolutionFile {
        diagram: diagram.display().to_string(),
        fun_ports: port_meta(&compiled.fun_ports),
        res_ports: port_meta(&compiled.res_ports),
        sweep_port: Some(port.to_string()),
        queries,
        certificate: Some(Certificate { pairs, pass }),
    };
    write_out(out, &format!("{}\n", serde_json::to_string_pretty(&file)?))?;
    Ok(if all_feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
