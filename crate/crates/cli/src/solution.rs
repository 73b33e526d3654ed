//! On-disk solution model shared by `solve`, `sweep` and `export`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use mcd_core::dp::ImplId;
use mcd_core::poset::Value;

#[derive(Serialize, Deserialize)]
pub struct PortMeta {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct SolutionPoint {
    /// Exposed resource values keyed by port name.
    pub res: serde_json::Map<String, Json>,
    /// Chosen implementation per diagram node.
    pub impls: serde_json::Map<String, Json>,
}

#[derive(Serialize, Deserialize)]
pub struct QueryResult {
    /// Functionality assignment keyed by port name.
    pub fun: serde_json::Map<String, Json>,
    pub feasible: bool,
    pub points: Vec<SolutionPoint>,
}

#[derive(Serialize, Deserialize)]
pub struct CertPair {
    pub from: String,
    pub to: String,
    pub nested: bool,
}

#[derive(Serialize, Deserialize)]
pub struct Certificate {
    pub pairs: Vec<CertPair>,
    pub pass: bool,
}

#[derive(Serialize, Deserialize)]
pub struct SolutionFile {
    pub diagram: String,
    pub fun_ports: Vec<PortMeta>,
    pub res_ports: Vec<PortMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_port: Option<String>,
    pub queries: Vec<QueryResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Num(x) if x.is_infinite() => json!("inf"),
        Value::Num(x) => json!(x),
        Value::Label(l) => json!(l),
        Value::Tuple(vs) => Json::Array(vs.iter().map(value_to_json).collect()),
        Value::Curve(vs) => Json::Array(vs.iter().map(|x| json!(x)).collect()),
    }
}

/// Implementation witness as JSON: a compiled diagram yields a node-keyed
/// object, anything else renders as a single string.
pub fn impl_to_json(id: &ImplId) -> serde_json::Map<String, Json> {
    let mut out = serde_json::Map::new();
    match id {
        ImplId::Named(pairs) => {
            for (node, inner) in pairs {
                out.insert(node.clone(), json!(inner.render()));
            }
        }
        other => {
            out.insert("impl".to_string(), json!(other.render()));
        }
    }
    out
}
