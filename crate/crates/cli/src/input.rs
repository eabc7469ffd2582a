//! JSON inputs with pointer-style error locations.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use coorbit::besov::Packet;
use coorbit::matgroup::{GroupSpec, GroupSpecJson};
use coorbit::{Error, RunConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_path_to_error::Segment;

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        if e.inner().is_syntax() || e.inner().is_eof() {
            return anyhow!("{origin}: malformed JSON: {}", e.inner());
        }
        let at = pointer(e.path());
        let at = if at.is_empty() { "/".to_string() } else { at };
        anyhow!("{origin}: schema violation at {at}: {}", e.inner())
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn to_spec(raw: GroupSpecJson, prefix: &str, origin: &str) -> Result<GroupSpec> {
    GroupSpec::try_from(raw).map_err(|e| match e {
        Error::InvalidSpec { pointer, message } => {
            anyhow!("{origin}: schema violation at {prefix}{pointer}: {message}")
        }
        other => anyhow!("{origin}: {other}"),
    })
}

pub fn load_group(path: &Path) -> Result<GroupSpec> {
    let origin = path.display().to_string();
    to_spec(parse(&read(path)?, &origin)?, "", &origin)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairJson {
    a: GroupSpecJson,
    b: GroupSpecJson,
}

/// `{"a": group, "b": group}`.
pub fn load_pair(path: &Path) -> Result<(GroupSpec, GroupSpec)> {
    let origin = path.display().to_string();
    let raw: PairJson = parse(&read(path)?, &origin)?;
    let a = to_spec(raw.a, "/a", &origin)?;
    let b = to_spec(raw.b, "/b", &origin)?;
    if a.dim != b.dim {
        return Err(anyhow!("{origin}: groups act on dimensions {} and {}", a.dim, b.dim));
    }
    Ok((a, b))
}

/// A JSON array of packets.
pub fn load_battery(path: &Path, dim: usize) -> Result<Vec<Packet>> {
    let origin = path.display().to_string();
    let packets: Vec<Packet> = parse(&read(path)?, &origin)?;
    if packets.is_empty() {
        return Err(anyhow!("{origin}: battery is empty"));
    }
    for (i, p) in packets.iter().enumerate() {
        p.validate().map_err(|e| anyhow!("{origin}: packet /{i}: {e}"))?;
        if p.center.len() != dim {
            return Err(anyhow!("{origin}: packet /{i} has dimension {}, expected {dim}", p.center.len()));
        }
    }
    Ok(packets)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let origin = path.display().to_string();
    parse(&read(path)?, &origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_for_nested_type_error() {
        let err = parse::<PairJson>(r#"{"a": {"kind": "Cyclic", "dim": 2, "matrix": [[2, "x"], [0, 2]]}, "b": {}}"#, "pair")
            .unwrap_err()
            .to_string();
        assert!(err.contains("/a/matrix"), "{err}");
    }

    #[test]
    fn pointer_for_semantic_error() {
        let raw: PairJson = parse(
            r#"{"a": {"kind": "Cyclic", "dim": 2}, "b": {"kind": "ScalarSimilitude", "dim": 2}}"#,
            "pair",
        )
        .unwrap();
        let err = to_spec(raw.a, "/a", "pair").unwrap_err().to_string();
        assert!(err.contains("/a/matrix"), "{err}");
    }
}
