//! Poset representations and the decidable order on their elements.
//!
//! A poset is one of: the nonnegative extended reals, a finite set given by
//! Hasse edges, the opposite of another poset, a product of posets, or a
//! sampled curve compared pointwise over a fixed distance grid.

use serde::{Deserialize, Serialize};

use crate::error::OrderError;

/// Relative tolerance used for numeric equality in dedup and antisymmetry.
pub const EPS: f64 = 1e-9;

/// Numeric equality within relative tolerance [`EPS`].
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true; // covers +inf == +inf
    }
    if a.is_infinite() || b.is_infinite() {
        return false;
    }
    (a - b).abs() <= EPS * f64::max(1.0, f64::max(a.abs(), b.abs()))
}

/// a ⪯ b on the nonnegative extended reals, up to [`EPS`].
pub fn num_leq(a: f64, b: f64) -> bool {
    a <= b || approx_eq(a, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Poset {
    /// Nonnegative reals extended with +∞; bottom 0, top +∞, ascending order.
    Numeric { unit: String },
    /// Finite set; the order is the reflexive-transitive closure of the
    /// Hasse edges, precomputed at construction.
    Finite {
        labels: Vec<String>,
        /// closure[i * n + j] == true iff labels[i] ⪯ labels[j].
        closure: Vec<bool>,
    },
    Opposite(Box<Poset>),
    Product(Vec<Poset>),
    /// Real-valued samples on a shared strictly increasing distance grid,
    /// compared pointwise. `ascending: false` reverses the pointwise order
    /// (smaller sample values are greater elements).
    Curve {
        grid: Vec<f64>,
        unit: String,
        ascending: bool,
    },
}

impl Poset {
    pub fn numeric(unit: &str) -> Poset {
        Poset::Numeric {
            unit: unit.to_string(),
        }
    }

    pub fn opposite(inner: Poset) -> Poset {
        Poset::Opposite(Box::new(inner))
    }

    pub fn product(factors: Vec<Poset>) -> Poset {
        Poset::Product(factors)
    }

    /// Finite poset from explicit Hasse edges `(lower, upper)` given as labels.
    pub fn finite(labels: &[&str], hasse: &[(&str, &str)]) -> Result<Poset, OrderError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let n = labels.len();
        let idx = |l: &str| -> Result<usize, OrderError> {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| OrderError::UnknownLabel {
                    label: l.to_string(),
                })
        };
        let mut closure = vec![false; n * n];
        for i in 0..n {
            closure[i * n + i] = true;
        }
        for (lo, hi) in hasse {
            let (i, j) = (idx(lo)?, idx(hi)?);
            closure[i * n + j] = true;
        }
        // Floyd-Warshall reachability.
        for k in 0..n {
            for i in 0..n {
                if closure[i * n + k] {
                    for j in 0..n {
                        if closure[k * n + j] {
                            closure[i * n + j] = true;
                        }
                    }
                }
            }
        }
        Ok(Poset::Finite { labels, closure })
    }

    pub fn curve(grid: Vec<f64>, unit: &str, ascending: bool) -> Poset {
        Poset::Curve {
            grid,
            unit: unit.to_string(),
            ascending,
        }
    }

    /// Short human-readable signature, used in error messages and for the
    /// exact signature matching of diagram wires.
    pub fn signature(&self) -> String {
        match self {
            Poset::Numeric { unit } => format!("num[{unit}]"),
            Poset::Finite { labels, .. } => format!("finite{{{}}}", labels.join(",")),
            Poset::Opposite(p) => format!("op({})", p.signature()),
            Poset::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| f.signature()).collect();
                format!("({})", parts.join("x"))
            }
            Poset::Curve {
                grid,
                unit,
                ascending,
            } => format!(
                "curve[{unit};{}pts;{}]",
                grid.len(),
                if *ascending { "asc" } else { "desc" }
            ),
        }
    }

    fn label_index(&self, label: &str) -> Result<usize, OrderError> {
        match self {
            Poset::Finite { labels, .. } => {
                labels
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| OrderError::UnknownLabel {
                        label: label.to_string(),
                    })
            }
            _ => Err(OrderError::UnknownLabel {
                label: label.to_string(),
            }),
        }
    }

    /// Least element if one exists.
    pub fn bottom(&self) -> Option<Value> {
        match self {
            Poset::Numeric { .. } => Some(Value::Num(0.0)),
            Poset::Finite { labels, closure } => {
                let n = labels.len();
                let mut bot = None;
                for i in 0..n {
                    if (0..n).all(|j| closure[i * n + j]) {
                        bot = Some(Value::Label(labels[i].clone()));
                        break;
                    }
                }
                bot
            }
            Poset::Opposite(p) => p.top(),
            Poset::Product(fs) => {
                let mut vs = Vec::with_capacity(fs.len());
                for f in fs {
                    vs.push(f.bottom()?);
                }
                Some(Value::Tuple(vs))
            }
            Poset::Curve {
                grid, ascending, ..
            } => {
                let v = if *ascending { 0.0 } else { f64::INFINITY };
                Some(Value::Curve(vec![v; grid.len()]))
            }
        }
    }

    /// Greatest element if one exists.
    pub fn top(&self) -> Option<Value> {
        match self {
            Poset::Numeric { .. } => Some(Value::Num(f64::INFINITY)),
            Poset::Finite { labels, closure } => {
                let n = labels.len();
                let mut top = None;
                for i in 0..n {
                    if (0..n).all(|j| closure[j * n + i]) {
                        top = Some(Value::Label(labels[i].clone()));
                        break;
                    }
                }
                top
            }
            Poset::Opposite(p) => p.bottom(),
            Poset::Product(fs) => {
                let mut vs = Vec::with_capacity(fs.len());
                for f in fs {
                    vs.push(f.top()?);
                }
                Some(Value::Tuple(vs))
            }
            Poset::Curve {
                grid, ascending, ..
            } => {
                let v = if *ascending { f64::INFINITY } else { 0.0 };
                Some(Value::Curve(vec![v; grid.len()]))
            }
        }
    }
}

/// A tagged element of some poset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Value {
    Num(f64),
    Label(String),
    Tuple(Vec<Value>),
    Curve(Vec<f64>),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(vs) => Some(vs),
            _ => None,
        }
    }

    /// Compact display form, also used in solution files.
    pub fn render(&self) -> String {
        match self {
            Value::Num(x) => format!("{x}"),
            Value::Label(l) => l.clone(),
            Value::Tuple(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.render()).collect();
                format!("({})", parts.join(";"))
            }
            Value::Curve(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| format!("{v}")).collect();
                format!("[{}]", parts.join(";"))
            }
        }
    }
}

fn mismatch(poset: &Poset, v: &Value) -> OrderError {
    OrderError::KindMismatch {
        poset: poset.signature(),
        element: v.render(),
    }
}

/// p ⪯ q in `poset`. Incomparability is not an error: the result is simply
/// false in both directions.
pub fn leq(p: &Value, q: &Value, poset: &Poset) -> Result<bool, OrderError> {
    match (poset, p, q) {
        (Poset::Numeric { .. }, Value::Num(a), Value::Num(b)) => Ok(num_leq(*a, *b)),
        (Poset::Finite { labels, closure }, Value::Label(a), Value::Label(b)) => {
            let n = labels.len();
            let (i, j) = (poset.label_index(a)?, poset.label_index(b)?);
            Ok(closure[i * n + j])
        }
        (Poset::Opposite(inner), _, _) => leq(q, p, inner),
        (Poset::Product(fs), Value::Tuple(ps), Value::Tuple(qs)) => {
            if ps.len() != fs.len() || qs.len() != fs.len() {
                return Err(mismatch(poset, if ps.len() != fs.len() { p } else { q }));
            }
            for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                if !leq(a, b, f)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (
            Poset::Curve {
                grid, ascending, ..
            },
            Value::Curve(a),
            Value::Curve(b),
        ) => {
            if a.len() != grid.len() || b.len() != grid.len() {
                return Err(mismatch(poset, if a.len() != grid.len() { p } else { q }));
            }
            Ok(a.iter().zip(b).all(|(x, y)| {
                if *ascending {
                    num_leq(*x, *y)
                } else {
                    num_leq(*y, *x)
                }
            }))
        }
        _ => Err(mismatch(poset, p)),
    }
}

/// Equality under the poset's tolerance (numeric values within [`EPS`]).
pub fn value_eq(p: &Value, q: &Value, poset: &Poset) -> Result<bool, OrderError> {
    match (poset, p, q) {
        (Poset::Numeric { .. }, Value::Num(a), Value::Num(b)) => Ok(approx_eq(*a, *b)),
        (Poset::Finite { .. }, Value::Label(a), Value::Label(b)) => Ok(a == b),
        (Poset::Opposite(inner), _, _) => value_eq(p, q, inner),
        (Poset::Product(fs), Value::Tuple(ps), Value::Tuple(qs)) => {
            if ps.len() != fs.len() || qs.len() != fs.len() {
                return Err(mismatch(poset, p));
            }
            for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                if !value_eq(a, b, f)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Poset::Curve { grid, .. }, Value::Curve(a), Value::Curve(b)) => {
            if a.len() != grid.len() || b.len() != grid.len() {
                return Err(mismatch(poset, p));
            }
            Ok(a.iter().zip(b).all(|(x, y)| approx_eq(*x, *y)))
        }
        _ => Err(mismatch(poset, p)),
    }
}

/// Least upper bound of two elements, where it exists.
pub fn join(p: &Value, q: &Value, poset: &Poset) -> Result<Value, OrderError> {
    match (poset, p, q) {
        (Poset::Numeric { .. }, Value::Num(a), Value::Num(b)) => Ok(Value::Num(a.max(*b))),
        (Poset::Finite { labels, closure }, Value::Label(_), Value::Label(_)) => {
            let n = labels.len();
            let (i, j) = (
                poset.label_index(match p {
                    Value::Label(l) => l,
                    _ => unreachable!(),
                })?,
                poset.label_index(match q {
                    Value::Label(l) => l,
                    _ => unreachable!(),
                })?,
            );
            // common upper bounds, then their minimal elements
            let ubs: Vec<usize> = (0..n)
                .filter(|&k| closure[i * n + k] && closure[j * n + k])
                .collect();
            let minimal: Vec<usize> = ubs
                .iter()
                .copied()
                .filter(|&k| {
                    ubs.iter()
                        .all(|&m| m == k || !(closure[m * n + k] && m != k))
                })
                .collect();
            if minimal.len() == 1 {
                Ok(Value::Label(labels[minimal[0]].clone()))
            } else {
                Err(OrderError::NoJoin {
                    poset: poset.signature(),
                    left: p.render(),
                    right: q.render(),
                })
            }
        }
        (Poset::Opposite(inner), _, _) => meet(p, q, inner),
        (Poset::Product(fs), Value::Tuple(ps), Value::Tuple(qs)) => {
            if ps.len() != fs.len() || qs.len() != fs.len() {
                return Err(mismatch(poset, p));
            }
            let mut out = Vec::with_capacity(fs.len());
            for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                out.push(join(a, b, f)?);
            }
            Ok(Value::Tuple(out))
        }
        (
            Poset::Curve {
                grid, ascending, ..
            },
            Value::Curve(a),
            Value::Curve(b),
        ) => {
            if a.len() != grid.len() || b.len() != grid.len() {
                return Err(mismatch(poset, p));
            }
            let vs = a
                .iter()
                .zip(b)
                .map(|(x, y)| if *ascending { x.max(*y) } else { x.min(*y) })
                .collect();
            Ok(Value::Curve(vs))
        }
        _ => Err(mismatch(poset, p)),
    }
}

/// Greatest lower bound of two elements, where it exists.
pub fn meet(p: &Value, q: &Value, poset: &Poset) -> Result<Value, OrderError> {
    match (poset, p, q) {
        (Poset::Numeric { .. }, Value::Num(a), Value::Num(b)) => Ok(Value::Num(a.min(*b))),
        (Poset::Finite { labels, closure }, Value::Label(a), Value::Label(b)) => {
            let n = labels.len();
            let (i, j) = (poset.label_index(a)?, poset.label_index(b)?);
            let lbs: Vec<usize> = (0..n)
                .filter(|&k| closure[k * n + i] && closure[k * n + j])
                .collect();
            let maximal: Vec<usize> = lbs
                .iter()
                .copied()
                .filter(|&k| {
                    lbs.iter()
                        .all(|&m| m == k || !(closure[k * n + m] && m != k))
                })
                .collect();
            if maximal.len() == 1 {
                Ok(Value::Label(labels[maximal[0]].clone()))
            } else {
                Err(OrderError::NoJoin {
                    poset: poset.signature(),
                    left: p.render(),
                    right: q.render(),
                })
            }
        }
        (Poset::Opposite(inner), _, _) => join(p, q, inner),
        (Poset::Product(fs), Value::Tuple(ps), Value::Tuple(qs)) => {
            if ps.len() != fs.len() || qs.len() != fs.len() {
                return Err(mismatch(poset, p));
            }
            let mut out = Vec::with_capacity(fs.len());
            for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                out.push(meet(a, b, f)?);
            }
            Ok(Value::Tuple(out))
        }
        (
            Poset::Curve {
                grid, ascending, ..
            },
            Value::Curve(a),
            Value::Curve(b),
        ) => {
            if a.len() != grid.len() || b.len() != grid.len() {
                return Err(mismatch(poset, p));
            }
            let vs = a
                .iter()
                .zip(b)
                .map(|(x, y)| if *ascending { x.min(*y) } else { x.max(*y) })
                .collect();
            Ok(Value::Curve(vs))
        }
        _ => Err(mismatch(poset, p)),
    }
}

/// Deterministic total order on element representations, used only for
/// canonical sorting of antichains and file output. Not the poset order.
pub fn repr_cmp(a: &Value, b: &Value) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    use Value::*;
    match (a, b) {
        (Num(x), Num(y)) => x.total_cmp(y),
        (Label(x), Label(y)) => x.cmp(y),
        (Tuple(xs), Tuple(ys)) => {
            for (x, y) in xs.iter().zip(ys) {
                let c = repr_cmp(x, y);
                if c != Ordering::Equal {
                    return c;
                }
            }
            xs.len().cmp(&ys.len())
        }
        (Curve(xs), Curve(ys)) => {
            for (x, y) in xs.iter().zip(ys) {
                let c = x.total_cmp(y);
                if c != Ordering::Equal {
                    return c;
                }
            }
            xs.len().cmp(&ys.len())
        }
        (Num(_), _) => Ordering::Less,
        (_, Num(_)) => Ordering::Greater,
        (Label(_), _) => Ordering::Less,
        (_, Label(_)) => Ordering::Greater,
        (Tuple(_), _) => Ordering::Less,
        (_, Tuple(_)) => Ordering::Greater,
    }
}

/// A sensor curve: per-grid-point values over strictly increasing distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<SampledCurve, OrderError> {
        if grid.len() != values.len() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OrderError::KindMismatch {
                poset: "sampled-curve".into(),
                element: format!("{} grid points, {} values", grid.len(), values.len()),
            });
        }
        Ok(SampledCurve { grid, values })
    }

    /// Value at distance `d` by linear interpolation, clamped at the ends.
    pub fn at(&self, d: f64) -> f64 {
        let g = &self.grid;
        if d <= g[0] {
            return self.values[0];
        }
        if d >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let i = g.partition_point(|&x| x <= d) - 1;
        let t = (d - g[i]) / (g[i + 1] - g[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    /// Resample onto a canonical grid by linear interpolation.
    pub fn resample(&self, grid: &[f64]) -> SampledCurve {
        SampledCurve {
            grid: grid.to_vec(),
            values: grid.iter().map(|&d| self.at(d)).collect(),
        }
    }
}
