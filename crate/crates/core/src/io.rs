//! Versioned text formats: fan files (JSON), trace files (JSON lines) and
//! group specs (JSON). Unknown fields are rejected; parse errors carry the
//! line and column of the offending input.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouprep::{Block, GroupError, Monomial, MonomialGroup};
use crate::stackyfan::{FanError, Ray, StackyFan, Step, StepTrace};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported schemaVersion {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub type Result<T> = std::result::Result<T, IoError>;

fn parse_err(e: serde_json::Error, line_offset: usize) -> IoError {
    IoError::Parse { line: e.line() + line_offset, column: e.column(), message: e.to_string() }
}

fn check_version(v: u32) -> Result<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(IoError::Version(v))
    }
}

/// An integer written as a JSON number when it fits in `i64`, else as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum WireInt {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for WireInt {
    fn from(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => WireInt::Small(v),
            None => WireInt::Big(x.to_string()),
        }
    }
}

impl WireInt {
    fn value(&self) -> std::result::Result<BigInt, String> {
        match self {
            WireInt::Small(v) => Ok(BigInt::from(*v)),
            WireInt::Big(s) => s.parse().map_err(|_| format!("not an integer: {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct WireRay {
    beta: Vec<WireInt>,
    order: u64,
    in_d: bool,
    distinguished: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct WireFan {
    schema_version: u32,
    lattice_rank: usize,
    rays: Vec<WireRay>,
    cones: Vec<Vec<usize>>,
}

/// Fan file text. Only maximal cones are written; faces are implied.
pub fn fan_to_string(f: &StackyFan) -> String {
    let wire = WireFan {
        schema_version: SCHEMA_VERSION,
        lattice_rank: f.rank(),
        rays: f
            .rays()
            .iter()
            .map(|r| WireRay { beta: r.beta.iter().map(WireInt::from).collect(), order: r.order, in_d: r.in_d, distinguished: r.distinguished })
            .collect(),
        cones: f.maximal_cones(),
    };
    let mut s = serde_json::to_string_pretty(&wire).expect("fan serializes");
    s.push('\n');
    s
}

pub fn parse_fan(text: &str) -> Result<StackyFan> {
    let wire: WireFan = serde_json::from_str(text).map_err(|e| parse_err(e, 0))?;
    check_version(wire.schema_version)?;
    let mut rays = Vec::with_capacity(wire.rays.len());
    for (i, r) in wire.rays.iter().enumerate() {
        let beta = r
            .beta
            .iter()
            .map(WireInt::value)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| FanError::Malformed(format!("ray {i}: {m}")))?;
        rays.push(Ray { beta, order: r.order, in_d: r.in_d, distinguished: r.distinguished });
    }
    Ok(StackyFan::new(wire.lattice_rank, rays, &wire.cones)?)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TraceHeader {
    schema_version: u32,
    input_hash: String,
}

/// Trace file text: a header line, then one JSON record per step.
pub fn trace_to_string(t: &StepTrace) -> String {
    let mut s = serde_json::to_string(&TraceHeader { schema_version: SCHEMA_VERSION, input_hash: t.input_hash.clone() }).expect("header");
    s.push('\n');
    for step in &t.steps {
        s.push_str(&step_line(step));
    }
    s
}

/// One trace record, newline terminated, for appending to a trace file.
pub fn step_line(step: &Step) -> String {
    let mut s = serde_json::to_string(step).expect("step serializes");
    s.push('\n');
    s
}

pub fn parse_trace(text: &str) -> Result<StepTrace> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (i0, first) = lines.next().ok_or(IoError::Parse { line: 1, column: 0, message: "empty trace".into() })?;
    let header: TraceHeader = serde_json::from_str(first).map_err(|e| parse_err(e, i0))?;
    check_version(header.schema_version)?;
    let mut steps = Vec::new();
    for (i, l) in lines {
        steps.push(serde_json::from_str(l).map_err(|e| parse_err(e, i))?);
    }
    Ok(StepTrace { input_hash: header.input_hash, steps })
}

/// A monomial group with named coordinate blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GroupSpec {
    pub schema_version: u32,
    pub degree: usize,
    pub conductor: u32,
    pub generators: Vec<Monomial>,
    #[serde(default)]
    pub blocks: BTreeMap<String, Block>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<Arc<MonomialGroup>> {
        Ok(MonomialGroup::new(self.degree, self.conductor, self.generators.clone())?)
    }

    /// A named block; `all` means every coordinate unless redefined.
    pub fn block(&self, name: &str) -> Option<Block> {
        self.blocks.get(name).copied().or_else(|| (name == "all").then(|| Block::all(self.degree)))
    }
}

pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let spec: GroupSpec = serde_json::from_str(text).map_err(|e| parse_err(e, 0))?;
    check_version(spec.schema_version)?;
    Ok(spec)
}

pub fn group_spec_to_string(g: &GroupSpec) -> String {
    let mut s = serde_json::to_string_pretty(g).expect("group spec serializes");
    s.push('\n');
    s
}
