//! Design problems with implementations (DPIs), their query maps and the
//! series / parallel / loop composition operators.
//!
//! A DPI relates a functionality poset F and a resource poset R through a
//! set of implementations with `prov`/`req` maps. The map `h` sends a
//! functionality to the minimum antichain of resources providing it; `h'`
//! sends a resource to the maximum antichain of functionalities it affords.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::antichain::Antichain;
use crate::error::DpError;
use crate::poset::{join, leq, repr_cmp, Poset, Value};

/// Identifier of a design choice; composites preserve the component ids so
/// solutions can be printed as concrete selections.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ImplId {
    Unit,
    Atom(String),
    Pair(Box<ImplId>, Box<ImplId>),
    /// Node-name keyed choices of a compiled diagram.
    Named(Vec<(String, ImplId)>),
}

impl ImplId {
    pub fn atom(s: &str) -> ImplId {
        ImplId::Atom(s.to_string())
    }

    pub fn render(&self) -> String {
        match self {
            ImplId::Unit => "-".to_string(),
            ImplId::Atom(s) => s.clone(),
            ImplId::Pair(a, b) => format!("({},{})", a.render(), b.render()),
            ImplId::Named(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(k, v)| format!("{k}={}", v.render()))
                    .collect();
                format!("{{{}}}", parts.join(","))
            }
        }
    }
}

/// One implementation: what it provides and what it requires.
#[derive(Clone, Debug)]
pub struct Impl {
    pub id: ImplId,
    pub prov: Value,
    pub req: Value,
}

/// A resource point together with the design choice achieving it.
pub type MinPoint = (Value, ImplId);

/// Minimal frontier of (value, witness) pairs under `poset`; deterministic
/// in the face of ties (canonical sort first).
pub fn min_frontier(mut points: Vec<MinPoint>, poset: &Poset) -> Result<Vec<MinPoint>, DpError> {
    points.sort_by(|a, b| repr_cmp(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
    // equal representations collapse to the first candidate, exactly as the
    // dominance loop below would do, but cheaper
    points.dedup_by(|a, b| repr_cmp(&a.0, &b.0) == std::cmp::Ordering::Equal);
    let mut kept: Vec<MinPoint> = Vec::new();
    'outer: for cand in points {
        let mut i = 0;
        while i < kept.len() {
            if leq(&kept[i].0, &cand.0, poset)? {
                continue 'outer;
            }
            if leq(&cand.0, &kept[i].0, poset)? {
                kept.swap_remove(i);
            } else {
                i += 1;
            }
        }
        kept.push(cand);
    }
    kept.sort_by(|a, b| repr_cmp(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(kept)
}

/// Backend trait for design problems with a custom evaluation strategy
/// (compiled diagrams use this).
pub trait DpiBackend: Send + Sync {
    /// Minimal resources (with witnesses) providing functionality `f`.
    fn eval_min(&self, f: &Value) -> Result<Vec<MinPoint>, DpError>;
    fn describe(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MergeOp {
    Plus,
    Max,
}

/// Which resource factors of the inner problem wire back to which
/// functionality factors.
#[derive(Clone, Debug)]
pub struct FeedbackSpec {
    /// (resource factor index, functionality factor index) pairs.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone)]
pub enum DpiKind {
    Table(Vec<Impl>),
    Identity,
    Series(Box<Dpi>, Box<Dpi>),
    Parallel(Box<Dpi>, Box<Dpi>),
    Sum {
        n: usize,
        op: MergeOp,
        weights: Option<Vec<f64>>,
    },
    Loop {
        inner: Box<Dpi>,
        spec: FeedbackSpec,
        max_iter: usize,
    },
    Custom(Arc<dyn DpiBackend>),
}

impl fmt::Debug for DpiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpiKind::Table(t) => write!(f, "Table({} impls)", t.len()),
            DpiKind::Identity => write!(f, "Identity"),
            DpiKind::Series(a, b) => write!(f, "Series({:?},{:?})", a.kind, b.kind),
            DpiKind::Parallel(a, b) => write!(f, "Parallel({:?},{:?})", a.kind, b.kind),
            DpiKind::Sum { n, op, .. } => write!(f, "Sum({n},{op:?})"),
            DpiKind::Loop { inner, spec, .. } => {
                write!(f, "Loop({:?},{} pairs)", inner.kind, spec.pairs.len())
            }
            DpiKind::Custom(c) => write!(f, "Custom({})", c.describe()),
        }
    }
}

/// Default iteration budget for the loop fixed point; far above any
/// catalogue-induced chain height.
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug)]
pub struct Dpi {
    pub fun_poset: Poset,
    pub res_poset: Poset,
    kind: DpiKind,
}

fn poset_factors(p: &Poset) -> Vec<Poset> {
    match p {
        Poset::Product(fs) => fs.clone(),
        other => vec![other.clone()],
    }
}

fn value_factors(v: &Value, p: &Poset) -> Vec<Value> {
    match (p, v) {
        (Poset::Product(_), Value::Tuple(vs)) => vs.clone(),
        _ => vec![v.clone()],
    }
}

fn assemble(parts: Vec<Value>, original_was_product: bool) -> Value {
    if original_was_product {
        Value::Tuple(parts)
    } else {
        debug_assert_eq!(parts.len(), 1);
        parts.into_iter().next().unwrap()
    }
}

fn pack_factors(mut factors: Vec<Poset>) -> Poset {
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Poset::Product(factors)
    }
}

fn pack_values(mut parts: Vec<Value>) -> Value {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Value::Tuple(parts)
    }
}

impl Dpi {
    pub fn from_table(fun_poset: Poset, res_poset: Poset, impls: Vec<Impl>) -> Dpi {
        Dpi {
            fun_poset,
            res_poset,
            kind: DpiKind::Table(impls),
        }
    }

    pub fn identity(poset: Poset) -> Dpi {
        Dpi {
            fun_poset: poset.clone(),
            res_poset: poset,
            kind: DpiKind::Identity,
        }
    }

    pub fn custom(fun_poset: Poset, res_poset: Poset, backend: Arc<dyn DpiBackend>) -> Dpi {
        Dpi {
            fun_poset,
            res_poset,
            kind: DpiKind::Custom(backend),
        }
    }

    pub fn kind(&self) -> &DpiKind {
        &self.kind
    }

    /// The h map: minimum antichain of resources which provide `f`.
    pub fn eval_h(&self, f: &Value) -> Result<Antichain, DpError> {
        let pts = self.eval_h_with_impls(f)?;
        Ok(Antichain::from_points(
            pts.into_iter().map(|(v, _)| v).collect(),
            self.res_poset.clone(),
        )?)
    }

    /// As [`eval_h`], keeping the implementation choice behind each minimal
    /// resource point.
    pub fn eval_h_with_impls(&self, f: &Value) -> Result<Vec<MinPoint>, DpError> {
        match &self.kind {
            DpiKind::Table(impls) => {
                let mut pts = Vec::new();
                for i in impls {
                    if leq(f, &i.prov, &self.fun_poset)? {
                        pts.push((i.req.clone(), i.id.clone()));
                    }
                }
                min_frontier(pts, &self.res_poset)
            }
            DpiKind::Identity => Ok(vec![(f.clone(), ImplId::Unit)]),
            DpiKind::Series(d1, d2) => {
                let mut pts = Vec::new();
                for (r1, i1) in d1.eval_h_with_impls(f)? {
                    for (r2, i2) in d2.eval_h_with_impls(&r1)? {
                        pts.push((r2, ImplId::Pair(Box::new(i1.clone()), Box::new(i2))));
                    }
                }
                min_frontier(pts, &self.res_poset)
            }
            DpiKind::Parallel(d1, d2) => {
                let fs = f.as_tuple().ok_or_else(|| DpError::Order(
                    crate::error::OrderError::KindMismatch {
                        poset: self.fun_poset.signature(),
                        element: f.render(),
                    },
                ))?;
                if fs.len() != 2 {
                    return Err(DpError::Unsupported("parallel expects a pair"));
                }
                let mut pts = Vec::new();
                for (r1, i1) in d1.eval_h_with_impls(&fs[0])? {
                    for (r2, i2) in d2.eval_h_with_impls(&fs[1])? {
                        pts.push((
                            Value::Tuple(vec![r1.clone(), r2]),
                            ImplId::Pair(Box::new(i1.clone()), Box::new(i2)),
                        ));
                    }
                }
                min_frontier(pts, &self.res_poset)
            }
            DpiKind::Sum { n, op, weights } => {
                let fs = f.as_tuple().ok_or(DpError::Unsupported("sum expects a tuple"))?;
                if fs.len() != *n {
                    return Err(DpError::Unsupported("sum arity mismatch"));
                }
                let mut xs = Vec::with_capacity(*n);
                for v in fs {
                    xs.push(v.as_num().ok_or(DpError::Unsupported("sum expects numbers"))?);
                }
                let merged = match op {
                    MergeOp::Plus => match weights {
                        Some(w) => xs.iter().zip(w).map(|(x, w)| x * w).sum(),
                        None => xs.iter().sum(),
                    },
                    MergeOp::Max => xs.iter().cloned().fold(0.0f64, f64::max),
                };
                Ok(vec![(Value::Num(merged), ImplId::Unit)])
            }
            DpiKind::Loop {
                inner,
                spec,
                max_iter,
            } => eval_loop(inner, spec, *max_iter, &self.res_poset, f),
            DpiKind::Custom(b) => b.eval_min(f),
        }
    }

    /// The h' map: maximum antichain of functionalities provided by `r`.
    /// Supported for enumerable structures (tables and their series/parallel
    /// compositions).
    pub fn eval_h_prime(&self, r: &Value) -> Result<Antichain, DpError> {
        let pts = self.eval_h_prime_points(r)?;
        // maximal elements == minimal in the opposite order
        let op = Poset::opposite(self.fun_poset.clone());
        let maxed = min_frontier(pts, &op)?;
        Ok(Antichain::from_points(
            maxed.into_iter().map(|(v, _)| v).collect(),
            op,
        )?)
    }

    fn eval_h_prime_points(&self, r: &Value) -> Result<Vec<MinPoint>, DpError> {
        match &self.kind {
            DpiKind::Table(impls) => {
                let mut pts = Vec::new();
                for i in impls {
                    if leq(&i.req, r, &self.res_poset)? {
                        pts.push((i.prov.clone(), i.id.clone()));
                    }
                }
                Ok(pts)
            }
            DpiKind::Identity => Ok(vec![(r.clone(), ImplId::Unit)]),
            DpiKind::Series(d1, d2) => {
                let mut pts = Vec::new();
                for (m, _) in d2.eval_h_prime_points(r)? {
                    pts.extend(d1.eval_h_prime_points(&m)?);
                }
                Ok(pts)
            }
            DpiKind::Parallel(d1, d2) => {
                let rs = r.as_tuple().ok_or(DpError::Unsupported("parallel expects a pair"))?;
                let mut pts = Vec::new();
                for (f1, i1) in d1.eval_h_prime_points(&rs[0])? {
                    for (f2, i2) in d2.eval_h_prime_points(&rs[1])? {
                        pts.push((
                            Value::Tuple(vec![f1.clone(), f2]),
                            ImplId::Pair(Box::new(i1.clone()), Box::new(i2)),
                        ));
                    }
                }
                Ok(pts)
            }
            _ => Err(DpError::Unsupported("h' on this structure")),
        }
    }

    /// Implementations feasible at (f, r): prov ⪰ f and req ⪯ r. Supported
    /// for enumerable structures.
    pub fn implementations_at(&self, f: &Value, r: &Value) -> Result<Vec<ImplId>, DpError> {
        let impls = self
            .enumerate_impls()?
            .ok_or(DpError::Unsupported("implementations_at on this structure"))?;
        let mut out = Vec::new();
        for i in impls {
            if leq(f, &i.prov, &self.fun_poset)? && leq(&i.req, r, &self.res_poset)? {
                out.push(i.id);
            }
        }
        out.sort();
        Ok(out)
    }

    /// All implementations of an enumerable structure; None when the
    /// implementation set is not finite (identity, sums).
    pub fn enumerate_impls(&self) -> Result<Option<Vec<Impl>>, DpError> {
        match &self.kind {
            DpiKind::Table(impls) => Ok(Some(impls.clone())),
            DpiKind::Series(d1, d2) => {
                let (Some(a), Some(b)) = (d1.enumerate_impls()?, d2.enumerate_impls()?) else {
                    return Ok(None);
                };
                let mut out = Vec::new();
                for i1 in &a {
                    for i2 in &b {
                        if leq(&i1.req, &i2.prov, &d2.fun_poset)? {
                            out.push(Impl {
                                id: ImplId::Pair(Box::new(i1.id.clone()), Box::new(i2.id.clone())),
                                prov: i1.prov.clone(),
                                req: i2.req.clone(),
                            });
                        }
                    }
                }
                Ok(Some(out))
            }
            DpiKind::Parallel(d1, d2) => {
                let (Some(a), Some(b)) = (d1.enumerate_impls()?, d2.enumerate_impls()?) else {
                    return Ok(None);
                };
                let mut out = Vec::new();
                for i1 in &a {
                    for i2 in &b {
                        out.push(Impl {
                            id: ImplId::Pair(Box::new(i1.id.clone()), Box::new(i2.id.clone())),
                            prov: Value::Tuple(vec![i1.prov.clone(), i2.prov.clone()]),
                            req: Value::Tuple(vec![i1.req.clone(), i2.req.clone()]),
                        });
                    }
                }
                Ok(Some(out))
            }
            DpiKind::Loop { inner, spec, .. } => {
                let Some(impls) = inner.enumerate_impls()? else {
                    return Ok(None);
                };
                let fun_factors = poset_factors(&inner.fun_poset);
                let res_factors = poset_factors(&inner.res_poset);
                let mut out = Vec::new();
                for i in impls {
                    let pf = value_factors(&i.prov, &inner.fun_poset);
                    let rf = value_factors(&i.req, &inner.res_poset);
                    let mut consistent = true;
                    for &(ri, fi) in &spec.pairs {
                        if !leq(&rf[ri], &pf[fi], &fun_factors[fi])? {
                            consistent = false;
                            break;
                        }
                    }
                    if !consistent {
                        continue;
                    }
                    let kept_f: Vec<Value> = pf
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !spec.pairs.iter().any(|&(_, fi)| fi == *k))
                        .map(|(_, v)| v.clone())
                        .collect();
                    let kept_r: Vec<Value> = rf
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !spec.pairs.iter().any(|&(ri, _)| ri == *k))
                        .map(|(_, v)| v.clone())
                        .collect();
                    let _ = &res_factors;
                    out.push(Impl {
                        id: i.id,
                        prov: pack_values(kept_f),
                        req: pack_values(kept_r),
                    });
                }
                Ok(Some(out))
            }
            _ => Ok(None),
        }
    }
}

/// Series composition: the resources of `d1` are demanded as functionality
/// of `d2` (a shared middle poset).
pub fn series(d1: Dpi, d2: Dpi) -> Result<Dpi, DpError> {
    if d1.res_poset != d2.fun_poset {
        return Err(DpError::MiddleMismatch {
            left: d1.res_poset.signature(),
            right: d2.fun_poset.signature(),
        });
    }
    Ok(Dpi {
        fun_poset: d1.fun_poset.clone(),
        res_poset: d2.res_poset.clone(),
        kind: DpiKind::Series(Box::new(d1), Box::new(d2)),
    })
}

/// Parallel composition: product on both sides.
pub fn parallel(d1: Dpi, d2: Dpi) -> Dpi {
    Dpi {
        fun_poset: Poset::Product(vec![d1.fun_poset.clone(), d2.fun_poset.clone()]),
        res_poset: Poset::Product(vec![d1.res_poset.clone(), d2.res_poset.clone()]),
        kind: DpiKind::Parallel(Box::new(d1), Box::new(d2)),
    }
}

/// A merge node: n numeric inputs folded by `+` or `max` into one output.
pub fn sum_node(n: usize, poset: Poset, op: MergeOp) -> Result<Dpi, DpError> {
    weighted_sum_node(n, poset, op, None)
}

pub fn weighted_sum_node(
    n: usize,
    poset: Poset,
    op: MergeOp,
    weights: Option<Vec<f64>>,
) -> Result<Dpi, DpError> {
    if !matches!(poset, Poset::Numeric { .. }) {
        return Err(DpError::BadMerge {
            merge: format!("{op:?}"),
            poset: poset.signature(),
        });
    }
    if let Some(w) = &weights {
        if let Some(&bad) = w.iter().find(|&&x| x < 0.0) {
            return Err(DpError::NegativeWeight(bad));
        }
    }
    if n == 1 && weights.is_none() {
        return Ok(Dpi::identity(poset));
    }
    Ok(Dpi {
        fun_poset: Poset::Product(vec![poset.clone(); n]),
        res_poset: poset,
        kind: DpiKind::Sum { n, op, weights },
    })
}

/// Loop (trace) composition: the listed resource factors of `inner` are fed
/// back as its own functionality factors; the remaining factors stay exposed.
pub fn loop_trace(inner: Dpi, spec: FeedbackSpec) -> Result<Dpi, DpError> {
    loop_trace_with_budget(inner, spec, DEFAULT_MAX_ITER)
}

pub fn loop_trace_with_budget(
    inner: Dpi,
    spec: FeedbackSpec,
    max_iter: usize,
) -> Result<Dpi, DpError> {
    let fun_factors = poset_factors(&inner.fun_poset);
    let res_factors = poset_factors(&inner.res_poset);
    for &(ri, fi) in &spec.pairs {
        if ri >= res_factors.len() {
            return Err(DpError::FeedbackIndex(ri));
        }
        if fi >= fun_factors.len() {
            return Err(DpError::FeedbackIndex(fi));
        }
        if res_factors[ri] != fun_factors[fi] {
            return Err(DpError::FeedbackMismatch {
                res: res_factors[ri].signature(),
                fun: fun_factors[fi].signature(),
            });
        }
    }
    let kept_f: Vec<Poset> = fun_factors
        .iter()
        .enumerate()
        .filter(|(k, _)| !spec.pairs.iter().any(|&(_, fi)| fi == *k))
        .map(|(_, p)| p.clone())
        .collect();
    let kept_r: Vec<Poset> = res_factors
        .iter()
        .enumerate()
        .filter(|(k, _)| !spec.pairs.iter().any(|&(ri, _)| ri == *k))
        .map(|(_, p)| p.clone())
        .collect();
    Ok(Dpi {
        fun_poset: pack_factors(kept_f),
        res_poset: pack_factors(kept_r),
        kind: DpiKind::Loop {
            inner: Box::new(inner),
            spec,
            max_iter,
        },
    })
}

/// Kleene ascent: iterate `step` from `bottom` until the upper set stops
/// changing; returns the least fixed point of a monotone step map.
pub fn kleene_lfp<F>(step: F, bottom: Antichain, max_iter: usize) -> Result<Antichain, DpError>
where
    F: Fn(&Antichain) -> Result<Antichain, DpError>,
{
    let mut curr = bottom;
    for _ in 0..max_iter {
        let next = step(&curr)?;
        if next.same_upper_set(&curr)? {
            return Ok(next);
        }
        curr = next;
    }
    let last = step(&curr)?;
    Err(DpError::NonConvergence {
        iters: max_iter,
        prev: curr.len(),
        curr: last.len(),
    })
}

/// Fixed-point evaluation of a loop composite at exposed functionality `f`.
fn eval_loop(
    inner: &Dpi,
    spec: &FeedbackSpec,
    max_iter: usize,
    exposed_res_poset: &Poset,
    f: &Value,
) -> Result<Vec<MinPoint>, DpError> {
    let fun_factors = poset_factors(&inner.fun_poset);
    let res_factors = poset_factors(&inner.res_poset);
    let fun_is_product = matches!(inner.fun_poset, Poset::Product(_));
    let exposed_fun_idx: Vec<usize> = (0..fun_factors.len())
        .filter(|k| !spec.pairs.iter().any(|&(_, fi)| fi == *k))
        .collect();
    let exposed_res_idx: Vec<usize> = (0..res_factors.len())
        .filter(|k| !spec.pairs.iter().any(|&(ri, _)| ri == *k))
        .collect();

    let f_parts: Vec<Value> = if exposed_fun_idx.len() == 1 {
        vec![f.clone()]
    } else {
        f.as_tuple()
            .map(|t| t.to_vec())
            .unwrap_or_else(|| vec![f.clone()])
    };
    if f_parts.len() != exposed_fun_idx.len() {
        return Err(DpError::Unsupported("loop query arity mismatch"));
    }

    // assemble the inner functionality from exposed parts + fed values
    let inner_query = |fed: &[(usize, Value)]| -> Value {
        let mut parts: Vec<Option<Value>> = vec![None; fun_factors.len()];
        for (k, idx) in exposed_fun_idx.iter().enumerate() {
            parts[*idx] = Some(f_parts[k].clone());
        }
        for (fi, v) in fed {
            parts[*fi] = Some(v.clone());
        }
        assemble(parts.into_iter().map(|p| p.unwrap()).collect(), fun_is_product)
    };

    // fed functionality values extracted from a full inner resource point
    let fed_from = |r: &Value| -> Vec<(usize, Value)> {
        let rf = value_factors(r, &inner.res_poset);
        spec.pairs
            .iter()
            .map(|&(ri, fi)| (fi, rf[ri].clone()))
            .collect()
    };

    let bottom_fed: Vec<(usize, Value)> = spec
        .pairs
        .iter()
        .map(|&(_, fi)| {
            fun_factors[fi]
                .bottom()
                .map(|b| (fi, b))
                .ok_or(DpError::Unsupported("feedback poset has no bottom"))
        })
        .collect::<Result<_, _>>()?;

    // Kleene ascent over antichains of the full inner resource poset, with a
    // pointwise join so each iterate dominates its feed.
    let trace = std::env::var_os("MCD_TRACE").is_some();
    // Distinct fed-back value tuples are few compared to antichain points,
    // and the inner map depends only on them, so memoize inner evals.
    let mut memo: std::collections::HashMap<String, Vec<MinPoint>> =
        std::collections::HashMap::new();
    let mut eval_fed = |fed: &[(usize, Value)]| -> Result<Vec<MinPoint>, DpError> {
        let key = format!("{fed:?}");
        if let Some(hit) = memo.get(&key) {
            return Ok(hit.clone());
        }
        let got = inner.eval_h_with_impls(&inner_query(fed))?;
        memo.insert(key, got.clone());
        Ok(got)
    };

    let mut curr: Vec<MinPoint> = inner.eval_h_with_impls(&inner_query(&bottom_fed))?;
    let mut converged = false;
    for it in 0..max_iter {
        if trace {
            eprintln!("trace: kleene iter {it}, antichain size {}", curr.len());
        }
        let mut cand: Vec<MinPoint> = Vec::new();
        for (r, _) in &curr {
            let fed = fed_from(r);
            for (r2, i2) in eval_fed(&fed)? {
                cand.push((join(r, &r2, &inner.res_poset)?, i2));
            }
        }
        let next = min_frontier(cand, &inner.res_poset)?;
        if same_upper_set_points(&next, &curr, &inner.res_poset)? {
            curr = next;
            converged = true;
            break;
        }
        curr = next;
    }
    if !converged && !curr.is_empty() {
        return Err(DpError::NonConvergence {
            iters: max_iter,
            prev: curr.len(),
            curr: curr.len(),
        });
    }

    // Extraction: keep only self-consistent implementation-backed points and
    // project away the fed-back coordinates.
    let mut out: Vec<MinPoint> = Vec::new();
    for (r, _) in &curr {
        let fed = fed_from(r);
        for (r2, i2) in eval_fed(&fed)? {
            let rf2 = value_factors(&r2, &inner.res_poset);
            let rf = value_factors(r, &inner.res_poset);
            let mut ok = true;
            for &(ri, _) in &spec.pairs {
                if !leq(&rf2[ri], &rf[ri], &res_factors[ri])? {
                    ok = false;
                    break;
                }
            }
            if ok {
                let kept: Vec<Value> = exposed_res_idx.iter().map(|&k| rf2[k].clone()).collect();
                out.push((pack_values(kept), i2));
            }
        }
    }
    min_frontier(out, exposed_res_poset)
}

fn same_upper_set_points(
    a: &[MinPoint],
    b: &[MinPoint],
    poset: &Poset,
) -> Result<bool, DpError> {
    let contains = |set: &[MinPoint], v: &Value| -> Result<bool, DpError> {
        for (x, _) in set {
            if leq(x, v, poset)? {
                return Ok(true);
            }
        }
        Ok(false)
    };
    for (v, _) in a {
        if !contains(b, v)? {
            return Ok(false);
        }
    }
    for (v, _) in b {
        if !contains(a, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Backing store for catalogue- and simulation-derived DPIs.
#[derive(Clone, Debug)]
pub struct MonotoneTable {
    pub fun_poset: Poset,
    pub res_poset: Poset,
    pub rows: Vec<(Value, Value, ImplId)>,
}

impl MonotoneTable {
    pub fn new(fun_poset: Poset, res_poset: Poset) -> MonotoneTable {
        MonotoneTable {
            fun_poset,
            res_poset,
            rows: Vec::new(),
        }
    }

    /// Propagate rows downward in functionality so that anything feasible at
    /// a stronger functionality is recorded feasible at every weaker one,
    /// then prune dominated resources per functionality value.
    pub fn monotone_closure(&self) -> Result<MonotoneTable, DpError> {
        let mut rows = self.rows.clone();
        let n = self.rows.len();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (f1, _, _) = &self.rows[i];
                let (f2, r2, id2) = &self.rows[j];
                if leq(f1, f2, &self.fun_poset)? && !leq(f2, f1, &self.fun_poset)? {
                    rows.push((f1.clone(), r2.clone(), id2.clone()));
                }
            }
        }
        // per-functionality pruning
        let mut pruned: Vec<(Value, Value, ImplId)> = Vec::new();
        for (f, r, id) in rows {
            let group: Vec<MinPoint> = pruned
                .iter()
                .filter(|(f2, _, _)| {
                    crate::poset::value_eq(&f, f2, &self.fun_poset).unwrap_or(false)
                })
                .map(|(_, r2, id2)| (r2.clone(), id2.clone()))
                .collect();
            let mut dominated = false;
            for (r2, _) in &group {
                if leq(r2, &r, &self.res_poset)? {
                    dominated = true;
                    break;
                }
            }
            if !dominated {
                pruned.retain(|(f2, r2, _)| {
                    !(crate::poset::value_eq(&f, f2, &self.fun_poset).unwrap_or(false)
                        && leq(&r, r2, &self.res_poset).unwrap_or(false)
                        && !leq(r2, &r, &self.res_poset).unwrap_or(true))
                });
                pruned.push((f, r, id));
            }
        }
        pruned.sort_by(|a, b| repr_cmp(&a.0, &b.0).then_with(|| repr_cmp(&a.1, &b.1)));
        Ok(MonotoneTable {
            fun_poset: self.fun_poset.clone(),
            res_poset: self.res_poset.clone(),
            rows: pruned,
        })
    }

    pub fn to_dpi(&self) -> Dpi {
        let impls = self
            .rows
            .iter()
            .map(|(f, r, id)| Impl {
                id: id.clone(),
                prov: f.clone(),
                req: r.clone(),
            })
            .collect();
        Dpi::from_table(self.fun_poset.clone(), self.res_poset.clone(), impls)
    }
}
