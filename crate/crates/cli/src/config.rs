//! Flat key-value configuration: schema defaults, then the config file, then `key=value`.

use std::collections::BTreeMap;
use std::path::Path;

use stretchperc::env::GapDistribution;
use toml::Value;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Uint,
    Dist,
    UintList,
    Text,
}

/// One accepted key with its default, rendered as it would be typed on the command line.
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

pub const fn key(name: &'static str, kind: Kind, default: &'static str) -> Key {
    Key {
        name,
        kind,
        default,
    }
}

/// Keys every experiment takes besides its own.
pub const COMMON: [Key; 2] = [key("seed", Kind::Uint, "1"), key("out", Kind::Text, "results")];

/// Resolved values in key order.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved(pub BTreeMap<String, Value>);

fn schema_error(msg: String) -> Failure {
    Failure::Schema(msg)
}

fn parse(kind: Kind, name: &str, raw: &str) -> Result<Value, Failure> {
    let bad = |what: &str| schema_error(format!("`{name}`: expected {what}, got `{raw}`"));
    let raw = raw.trim();
    Ok(match kind {
        Kind::Float => Value::Float(raw.parse().map_err(|_| bad("a number"))?),
        Kind::Uint => {
            let v: u64 = raw.parse().map_err(|_| bad("a non-negative integer"))?;
            Value::Integer(i64::try_from(v).map_err(|_| bad("an integer below 2^63"))?)
        }
        Kind::Dist => {
            let d: GapDistribution = raw
                .parse()
                .map_err(|e| schema_error(format!("`{name}`: {e}")))?;
            Value::String(d.to_string())
        }
        Kind::UintList => {
            let items = raw
                .split(',')
                .map(|s| s.trim().parse::<u32>().map(|v| Value::Integer(v as i64)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("a comma-separated list of integers"))?;
            if items.is_empty() {
                return Err(bad("a non-empty list"));
            }
            Value::Array(items)
        }
        Kind::Text => Value::String(raw.to_string()),
    })
}

/// Command-line form of a value read from a config file.
fn as_raw(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(as_raw).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, Value>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Resource(format!("{}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| schema_error(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (k, v) in table {
        if v.is_table() {
            return Err(schema_error(format!("`{k}`: nested tables are not accepted")));
        }
        out.insert(k, v);
    }
    Ok(out)
}

pub fn parse_override(s: &str) -> Result<(String, String), Failure> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| schema_error(format!("expected key=value, got `{s}`")))?;
    Ok((k.trim().to_string(), v.to_string()))
}

pub fn resolve(
    experiment: &str,
    keys: &[Key],
    file: BTreeMap<String, Value>,
    overrides: &[(String, String)],
) -> Result<Resolved, Failure> {
    let find = |name: &str| keys.iter().chain(&COMMON).find(|k| k.name == name);
    let mut out = BTreeMap::new();
    for k in keys.iter().chain(&COMMON) {
        out.insert(k.name.to_string(), parse(k.kind, k.name, k.default)?);
    }
    let mut file_pairs = Vec::new();
    for (k, v) in file {
        if k != "experiment" {
            file_pairs.push((k, as_raw(&v)));
        } else if v.as_str() != Some(experiment) {
            return Err(schema_error(format!(
                "config is for experiment {v}, not `{experiment}`"
            )));
        }
    }
    for (name, raw) in file_pairs.iter().chain(overrides) {
        let k = find(name).ok_or_else(|| {
            let known: Vec<&str> = keys.iter().chain(&COMMON).map(|k| k.name).collect();
            schema_error(format!(
                "unknown key `{name}` for `{experiment}`; accepted: {}",
                known.join(", ")
            ))
        })?;
        out.insert(name.clone(), parse(k.kind, name, raw)?);
    }
    Ok(Resolved(out))
}

impl Resolved {
    fn get(&self, name: &str) -> &Value {
        self.0
            .get(name)
            .unwrap_or_else(|| panic!("`{name}` is not in the schema"))
    }

    pub fn f64(&self, name: &str) -> f64 {
        self.get(name).as_float().expect("schema type")
    }

    pub fn i64(&self, name: &str) -> i64 {
        self.get(name).as_integer().expect("schema type")
    }

    pub fn u64(&self, name: &str) -> u64 {
        self.i64(name) as u64
    }

    pub fn u32(&self, name: &str) -> Result<u32, Failure> {
        u32::try_from(self.i64(name))
            .map_err(|_| schema_error(format!("`{name}` must be below 2^32")))
    }

    pub fn dist(&self, name: &str) -> GapDistribution {
        self.text(name).parse().expect("validated on resolution")
    }

    pub fn list(&self, name: &str) -> Vec<u32> {
        let a = self.get(name).as_array().expect("schema type");
        a.iter().map(|v| v.as_integer().expect("schema type") as u32).collect()
    }

    pub fn text(&self, name: &str) -> &str {
        self.get(name).as_str().expect("schema type")
    }

    /// TOML that resolves back to the same values.
    pub fn to_toml(&self, experiment: &str) -> String {
        let mut t = toml::Table::new();
        t.insert("experiment".into(), Value::String(experiment.into()));
        for (k, v) in &self.0 {
            t.insert(k.clone(), v.clone());
        }
        toml::to_string(&t).expect("flat table serializes")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).expect("plain values serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: [Key; 3] = [
        key("p", Kind::Float, "0.5"),
        key("dist", Kind::Dist, "geometric:0.1"),
        key("n_list", Kind::UintList, "3,4"),
    ];

    #[test]
    fn layering() {
        let mut file = BTreeMap::new();
        file.insert("p".to_string(), Value::Float(0.7));
        file.insert("n_list".to_string(), Value::Array(vec![Value::Integer(5)]));
        let over = vec![parse_override("seed=9").unwrap()];
        let r = resolve("x", &KEYS, file, &over).unwrap();
        assert_eq!(r.f64("p"), 0.7);
        assert_eq!(r.u64("seed"), 9);
        assert_eq!(r.list("n_list"), vec![5]);
        assert_eq!(r.text("out"), "results");
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let bad = |s: &str| resolve("x", &KEYS, BTreeMap::new(), &[parse_override(s).unwrap()]);
        assert!(matches!(bad("q=1"), Err(Failure::Schema(_))));
        assert!(matches!(bad("p=abc"), Err(Failure::Schema(_))));
        assert!(matches!(bad("dist=normal:1"), Err(Failure::Schema(_))));
        assert!(matches!(bad("seed=-1"), Err(Failure::Schema(_))));
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn toml_echo_resolves_to_itself() {
        let r = resolve("x", &KEYS, BTreeMap::new(), &[]).unwrap();
        let table: toml::Table = r.to_toml("x").parse().unwrap();
        let again = resolve("x", &KEYS, table.into_iter().collect(), &[]).unwrap();
        assert_eq!(r, again);
    }
}
