use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use crate::diagram::ast::{DiagramAst, Side};
use crate::diagram::canonical::{canonicalize, CanonicalForm};
use crate::diagram::validate::{resolve_nodes, validate, ResolvedNode, Severity};
use crate::dp::{
    loop_trace, min_frontier, Dpi, DpiBackend, FeedbackSpec, ImplId, MinPoint,
};
use crate::error::{DiagramError, DpError};
use crate::poset::{Poset, Value};

/// One exposed port of a compiled diagram.
#[derive(Clone, Debug)]
pub struct PortInfo {
    pub alias: String,
    pub node: String,
    pub port: String,
    pub poset: Poset,
}

/// A compiled diagram: the traced DPI plus its exposed-port tables and the
/// canonical form it was built from.
pub struct Compiled {
    pub dpi: Dpi,
    pub canonical: CanonicalForm,
    pub fun_ports: Vec<PortInfo>,
    pub res_ports: Vec<PortInfo>,
}

/// Where a node's functionality port gets its demand during evaluation.
enum FunSource {
    /// Factor index into the inner DPI's functionality tuple.
    External(usize),
    /// Requirement computed at (earlier node's order index, res port index).
    Wired { node: usize, res_port: usize },
}

struct NodeEval {
    name: String,
    dpi: Dpi,
    fun_sources: Vec<FunSource>,
    res_count: usize,
    res_posets: Vec<Poset>,
}

/// Demand propagation over the loop-free DAG: nodes are evaluated
/// consumer-first, so every functionality demand is either external or a
/// requirement already computed downstream; alternatives branch on each
/// node's minimal antichain and are pruned to the frontier at the end.
struct DagBackend {
    order: Vec<NodeEval>,
    fun_count: usize,
    /// (order index, res port index) per inner resource factor.
    outputs: Vec<(usize, usize)>,
    res_poset: Poset,
    /// Order index of the node that consumes each computed requirement as
    /// its demand; exposed/fed-back requirements have no consumer here.
    consumer: HashMap<(usize, usize), usize>,
}

/// Requirements computed per node (indexed by order, then res port); the
/// per-node vectors are shared so branching an alternative is cheap.
type Reqs = Vec<Arc<Vec<Value>>>;
type Alt = (Reqs, Vec<(String, ImplId)>);

impl DagBackend {
    /// Requirement coordinates that can still influence the result after
    /// step `k`: final outputs, plus demands of nodes not yet evaluated.
    fn live_after(&self, k: usize) -> Vec<(usize, usize)> {
        let mut live: Vec<(usize, usize)> = self.outputs.iter().copied().filter(|c| c.0 <= k).collect();
        for (&coord, &c) in &self.consumer {
            if coord.0 <= k && c > k {
                live.push(coord);
            }
        }
        live.sort_unstable();
        live.dedup();
        live
    }

    /// Keep only alternatives minimal on the live coordinates. Anything
    /// dominated there leads to dominated final points for every downstream
    /// completion, since all node maps are monotone.
    fn prune(&self, mut alts: Vec<Alt>, k: usize) -> Result<Vec<Alt>, DpError> {
        if alts.len() < 2 {
            return Ok(alts);
        }
        let live = self.live_after(k);
        alts.sort_by(|a, b| {
            live.iter()
                .map(|&(n, p)| crate::poset::repr_cmp(&a.0[n][p], &b.0[n][p]))
                .find(|o| *o != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        let dominates = |a: &Alt, b: &Alt| -> Result<bool, DpError> {
            for &(n, p) in &live {
                if !crate::poset::leq(&a.0[n][p], &b.0[n][p], &self.order[n].res_posets[p])? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let mut kept: Vec<Alt> = Vec::new();
        'outer: for cand in alts {
            let mut i = 0;
            while i < kept.len() {
                if dominates(&kept[i], &cand)? {
                    continue 'outer;
                }
                if dominates(&cand, &kept[i])? {
                    kept.swap_remove(i);
                } else {
                    i += 1;
                }
            }
            kept.push(cand);
        }
        Ok(kept)
    }
}

impl DpiBackend for DagBackend {
    fn eval_min(&self, f: &Value) -> Result<Vec<MinPoint>, DpError> {
        let trace = std::env::var_os("MCD_TRACE").is_some();
        let t0 = std::time::Instant::now();
        let fs: Vec<Value> = if self.fun_count == 1 {
            vec![f.clone()]
        } else {
            f.as_tuple()
                .ok_or(DpError::Unsupported("diagram query arity mismatch"))?
                .to_vec()
        };
        if fs.len() != self.fun_count {
            return Err(DpError::Unsupported("diagram query arity mismatch"));
        }

        // one alternative: requirements per node so far + design choices
        let empty = Arc::new(Vec::new());
        let mut alts: Vec<Alt> = vec![(vec![empty; self.order.len()], Vec::new())];
        for (k, node) in self.order.iter().enumerate() {
            let mut next: Vec<Alt> = Vec::new();
            for (reqs, impls) in &alts {
                let parts: Vec<Value> = node
                    .fun_sources
                    .iter()
                    .map(|src| match src {
                        FunSource::External(i) => fs[*i].clone(),
                        FunSource::Wired { node, res_port } => reqs[*node][*res_port].clone(),
                    })
                    .collect();
                let demand = if parts.len() == 1 {
                    parts.into_iter().next().unwrap()
                } else {
                    Value::Tuple(parts)
                };
                for (r, id) in node.dpi.eval_h_with_impls(&demand)? {
                    let rf: Vec<Value> = if node.res_count == 1 {
                        vec![r]
                    } else {
                        r.as_tuple().expect("node res arity").to_vec()
                    };
                    let mut reqs2 = reqs.clone();
                    reqs2[k] = Arc::new(rf);
                    let mut impls2 = impls.clone();
                    impls2.push((node.name.clone(), id));
                    next.push((reqs2, impls2));
                }
            }
            let before = next.len();
            alts = self.prune(next, k)?;
            if trace {
                eprintln!(
                    "trace: dag node {} ({}): {} -> {} alt(s), {:.2?}",
                    k,
                    node.name,
                    before,
                    alts.len(),
                    t0.elapsed()
                );
            }
            if alts.is_empty() {
                return Ok(Vec::new());
            }
        }

        let mut points: Vec<MinPoint> = Vec::with_capacity(alts.len());
        for (reqs, mut impls) in alts {
            let parts: Vec<Value> = self
                .outputs
                .iter()
                .map(|&(n, p)| reqs[n][p].clone())
                .collect();
            let r = if parts.len() == 1 {
                parts.into_iter().next().unwrap()
            } else {
                Value::Tuple(parts)
            };
            impls.sort_by(|a, b| a.0.cmp(&b.0));
            points.push((r, ImplId::Named(impls)));
        }
        min_frontier(points, &self.res_poset)
    }

    fn describe(&self) -> String {
        format!("diagram({} nodes)", self.order.len())
    }
}

fn pack(mut ps: Vec<Poset>) -> Poset {
    if ps.len() == 1 {
        ps.pop().unwrap()
    } else {
        Poset::Product(ps)
    }
}

/// Compile a validated diagram into a single DPI. Catalogue and parameter
/// paths are resolved against `base_dir`.
pub fn compile(ast: &DiagramAst, base_dir: &Path) -> Result<Compiled, DiagramError> {
    let nodes = resolve_nodes(ast, base_dir)?;
    let diags: Vec<_> = validate(ast, &nodes)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !diags.is_empty() {
        return Err(DiagramError::Invalid(diags));
    }
    let canonical = canonicalize(ast);

    let by_name: HashMap<&str, (usize, &ResolvedNode)> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), (i, n)))
        .collect();
    let port_idx = |node: &str, side: Side, port: &str| -> usize {
        let (_, n) = by_name[node];
        let list = match side {
            Side::Fun => &n.fun_ports,
            Side::Res => &n.res_ports,
        };
        list.iter().position(|(p, _)| p == port).expect("validated port")
    };

    // computation order over the loop-free DAG: a node is evaluated after
    // every node its functionality wires point at (consumers first)
    let n = nodes.len();
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n]; // deps[a] = nodes a waits for
    for w in &canonical.loop_free.wires {
        let a = by_name[w.from.node.as_str()].0;
        let b = by_name[w.to.node.as_str()].0;
        deps[a].push(b);
    }
    let mut order_of: Vec<usize> = vec![usize::MAX; n]; // node idx -> order idx
    let mut order: Vec<usize> = Vec::with_capacity(n); // order idx -> node idx
    let mut names_sorted: Vec<usize> = (0..n).collect();
    names_sorted.sort_by(|&a, &b| nodes[a].name.cmp(&nodes[b].name));
    while order.len() < n {
        let next = names_sorted
            .iter()
            .copied()
            .find(|&i| {
                order_of[i] == usize::MAX
                    && deps[i].iter().all(|&d| order_of[d] != usize::MAX)
            })
            .expect("canonical loop_free is acyclic");
        order_of[next] = order.len();
        order.push(next);
    }

    // inner functionality factors: exposed fun ports, then the source fun
    // port of each cut wire; inner resources: exposed res ports, then the
    // sink res port of each cut wire
    let exposed_fun: Vec<_> = ast.exposes.iter().filter(|e| e.side == Side::Fun).collect();
    let exposed_res: Vec<_> = ast.exposes.iter().filter(|e| e.side == Side::Res).collect();

    let mut fun_slot: HashMap<(String, String), usize> = HashMap::new();
    let mut inner_fun_posets: Vec<Poset> = Vec::new();
    for e in &exposed_fun {
        let i = port_idx(&e.port.node, Side::Fun, &e.port.port);
        let poset = by_name[e.port.node.as_str()].1.fun_ports[i].1.clone();
        fun_slot.insert((e.port.node.clone(), e.port.port.clone()), inner_fun_posets.len());
        inner_fun_posets.push(poset);
    }
    for w in &canonical.feedback_pairs {
        let i = port_idx(&w.from.node, Side::Fun, &w.from.port);
        let poset = by_name[w.from.node.as_str()].1.fun_ports[i].1.clone();
        fun_slot.insert((w.from.node.clone(), w.from.port.clone()), inner_fun_posets.len());
        inner_fun_posets.push(poset);
    }

    let mut outputs: Vec<(usize, usize)> = Vec::new();
    let mut inner_res_posets: Vec<Poset> = Vec::new();
    for e in &exposed_res {
        let (i, node) = by_name[e.port.node.as_str()];
        let p = port_idx(&e.port.node, Side::Res, &e.port.port);
        outputs.push((order_of[i], p));
        inner_res_posets.push(node.res_ports[p].1.clone());
    }
    for w in &canonical.feedback_pairs {
        let (i, node) = by_name[w.to.node.as_str()];
        let p = port_idx(&w.to.node, Side::Res, &w.to.port);
        outputs.push((order_of[i], p));
        inner_res_posets.push(node.res_ports[p].1.clone());
    }

    // wired demand sources from the loop-free wires
    let mut wired: HashMap<(String, String), (usize, usize)> = HashMap::new();
    for w in &canonical.loop_free.wires {
        let (i, _) = by_name[w.to.node.as_str()];
        let p = port_idx(&w.to.node, Side::Res, &w.to.port);
        wired.insert(
            (w.from.node.clone(), w.from.port.clone()),
            (order_of[i], p),
        );
    }

    let evals: Vec<NodeEval> = order
        .iter()
        .map(|&i| {
            let node = &nodes[i];
            let fun_sources = node
                .fun_ports
                .iter()
                .map(|(port, _)| {
                    let key = (node.name.clone(), port.clone());
                    if let Some(&slot) = fun_slot.get(&key) {
                        FunSource::External(slot)
                    } else {
                        let (n2, p2) = wired[&key];
                        FunSource::Wired { node: n2, res_port: p2 }
                    }
                })
                .collect();
            NodeEval {
                name: node.name.clone(),
                dpi: node.dpi.clone(),
                fun_sources,
                res_count: node.res_ports.len(),
                res_posets: node.res_ports.iter().map(|(_, p)| p.clone()).collect(),
            }
        })
        .collect();

    // requirement consumers: evaluating the owner of a wired fun port
    // reads the requirement computed at the wire's sink res port
    let mut consumer: HashMap<(usize, usize), usize> = HashMap::new();
    for w in &canonical.loop_free.wires {
        let (to, _) = by_name[w.to.node.as_str()];
        let p = port_idx(&w.to.node, Side::Res, &w.to.port);
        let (from, _) = by_name[w.from.node.as_str()];
        consumer.insert((order_of[to], p), order_of[from]);
    }

    let inner_res_poset = pack(inner_res_posets.clone());
    let backend = DagBackend {
        order: evals,
        fun_count: inner_fun_posets.len(),
        outputs,
        res_poset: inner_res_poset.clone(),
        consumer,
    };
    let inner = Dpi::custom(pack(inner_fun_posets), inner_res_poset, Arc::new(backend));

    let pairs: Vec<(usize, usize)> = (0..canonical.feedback_pairs.len())
        .map(|k| (exposed_res.len() + k, exposed_fun.len() + k))
        .collect();
    let dpi = loop_trace(inner, FeedbackSpec { pairs }).map_err(|e| DiagramError::Compose {
        loc: "diagram".to_string(),
        source: e,
    })?;

    let info = |e: &&crate::diagram::ast::Expose, side: Side| -> PortInfo {
        let i = port_idx(&e.port.node, side, &e.port.port);
        let list = match side {
            Side::Fun => &by_name[e.port.node.as_str()].1.fun_ports,
            Side::Res => &by_name[e.port.node.as_str()].1.res_ports,
        };
        PortInfo {
            alias: e.alias.clone(),
            node: e.port.node.clone(),
            port: e.port.port.clone(),
            poset: list[i].1.clone(),
        }
    };
    Ok(Compiled {
        dpi,
        canonical,
        fun_ports: exposed_fun.iter().map(|e| info(e, Side::Fun)).collect(),
        res_ports: exposed_res.iter().map(|e| info(e, Side::Res)).collect(),
    })
}
