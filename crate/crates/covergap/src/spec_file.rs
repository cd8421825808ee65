//! Chain-spec files.
//!
//! Two shapes are accepted:
//! `{"family": "cycle", "params": {"n": 32}}` (plus `"seed"` for random
//! families) and `{"n": 3, "P": [[...], ...], "labels": [...]}`. A matrix
//! spec may also carry `"transitive_hint": true`.

use std::path::Path;

use covergap_core::linalg::Matrix;
use covergap_core::{ChainSpec, Family};
use serde_json::{Map, Value};

use crate::canonical;
use crate::InputError;

/// Parsed spec file, before the chain is built.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecSource {
    Family(Family),
    Matrix {
        p: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
        transitive_hint: bool,
    },
}

impl SpecSource {
    pub fn build(&self) -> Result<ChainSpec, covergap_core::Error> {
        match self {
            SpecSource::Family(f) => ChainSpec::from_family(f),
            SpecSource::Matrix {
                p,
                labels,
                transitive_hint,
            } => Ok(ChainSpec::from_matrix(Matrix::from_rows(p)?, labels.clone())?
                .with_transitive_hint(*transitive_hint)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let v: Value = serde_json::from_str(text).map_err(|e| InputError(format!("spec JSON: {e}")))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self, InputError> {
        let Value::Object(mut obj) = v else {
            return Err(InputError("spec must be a JSON object".into()));
        };
        if let Some(name) = obj.remove("family") {
            let name = name
                .as_str()
                .ok_or_else(|| InputError("\"family\" must be a string".into()))?
                .to_owned();
            let params = match obj.remove("params") {
                None => Map::new(),
                Some(Value::Object(m)) => m,
                Some(_) => return Err(InputError("\"params\" must be an object".into())),
            };
            let seed = obj.remove("seed");
            if let Some(k) = obj.keys().next() {
                return Err(InputError(format!("unknown spec key {k:?}")));
            }
            return family_from_parts(&name, params, seed).map(SpecSource::Family);
        }
        let rows = obj
            .remove("P")
            .ok_or_else(|| InputError("spec needs either \"family\" or \"P\"".into()))?;
        let p: Vec<Vec<f64>> =
            serde_json::from_value(rows).map_err(|e| InputError(format!("\"P\": {e}")))?;
        if let Some(n) = obj.remove("n") {
            let n = n.as_u64().ok_or_else(|| InputError("\"n\" must be a non-negative integer".into()))?;
            if n as usize != p.len() {
                return Err(InputError(format!("\"n\" is {n} but P has {} rows", p.len())));
            }
        }
        let labels = match obj.remove("labels") {
            None | Some(Value::Null) => None,
            Some(l) => Some(serde_json::from_value(l).map_err(|e| InputError(format!("\"labels\": {e}")))?),
        };
        let transitive_hint = match obj.remove("transitive_hint") {
            None => false,
            Some(Value::Bool(b)) => b,
            Some(_) => return Err(InputError("\"transitive_hint\" must be a boolean".into())),
        };
        if let Some(k) = obj.keys().next() {
            return Err(InputError(format!("unknown spec key {k:?}")));
        }
        Ok(SpecSource::Matrix {
            p,
            labels,
            transitive_hint,
        })
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical document for this spec.
    pub fn to_value(&self) -> Value {
        match self {
            SpecSource::Family(f) => {
                let Value::Object(mut params) = serde_json::to_value(f).expect("families serialize") else {
                    unreachable!("families serialize to objects")
                };
                params.remove("family");
                let seed = params.remove("seed");
                let mut out = Map::new();
                out.insert("family".into(), Value::String(f.name().into()));
                out.insert("params".into(), Value::Object(params));
                if let Some(s) = seed {
                    out.insert("seed".into(), s);
                }
                Value::Object(out)
            }
            SpecSource::Matrix {
                p,
                labels,
                transitive_hint,
            } => {
                let mut out = Map::new();
                out.insert("n".into(), Value::from(p.len()));
                out.insert("P".into(), serde_json::to_value(p).expect("floats serialize"));
                if let Some(l) = labels {
                    out.insert("labels".into(), serde_json::to_value(l).expect("strings serialize"));
                }
                if *transitive_hint {
                    out.insert("transitive_hint".into(), Value::Bool(true));
                }
                Value::Object(out)
            }
        }
    }

    pub fn to_canonical_json(&self) -> String {
        canonical::value_to_string(&self.to_value())
    }
}

/// Builds a [`Family`] from a name, its parameters and an optional seed.
pub fn family_from_parts(
    name: &str,
    mut params: Map<String, Value>,
    seed: Option<Value>,
) -> Result<Family, InputError> {
    if let Some(s) = seed {
        if params.insert("seed".into(), s).is_some() {
            return Err(InputError("seed given both inside and outside params".into()));
        }
    }
    if name == "random_reversible" && !params.contains_key("seed") {
        params.insert("seed".into(), Value::from(0u64));
    }
    params.insert("family".into(), Value::String(name.into()));
    serde_json::from_value(Value::Object(params))
        .map_err(|e| InputError(format!("family {name:?}: {e}")))
}

/// Parses `K=V` pairs; `V` is read as JSON when possible, else as a string.
/// Edge lists may also be written `edges=0-1,1-2`.
pub fn params_from_pairs(pairs: &[String]) -> Result<Map<String, Value>, InputError> {
    let mut m = Map::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| InputError(format!("parameter {pair:?} is not K=V")))?;
        let value = if k == "edges" && !v.trim_start().starts_with('[') {
            edge_list(v)?
        } else {
            serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()))
        };
        if m.insert(k.to_owned(), value).is_some() {
            return Err(InputError(format!("parameter {k:?} given twice")));
        }
    }
    Ok(m)
}

fn edge_list(s: &str) -> Result<Value, InputError> {
    let mut edges = Vec::new();
    for e in s.split(',').filter(|e| !e.is_empty()) {
        let bad = || InputError(format!("edge {e:?} is not A-B"));
        let (a, b) = e.split_once('-').ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        edges.push(Value::from(vec![a, b]));
    }
    Ok(Value::Array(edges))
}
