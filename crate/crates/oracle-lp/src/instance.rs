//! Instance files, ground-truth sidecars, and generators.
//!
//! Instances travel as JSON with every rational written in "p/q" text form
//! -- never as floats -- so entries round-trip bit-identically:
//! `{"m": 2, "n": 2, "L": 9, "A": [["1/2", "-3"], ...], "b": ["0", ...]}`.
//! The ground-truth feasibility verdict lives in a separate sidecar file so
//! a solver process can be handed the instance path alone and cannot read
//! the answer by accident.

use crate::lp::{self, LpInstance};
use crate::lowerbound::AdversarialFamily;
use crate::rat::{format_rat, parse_rat, Rat};
use crate::vecn::QVec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad rational literal {0:?}")]
    BadRational(String),
    #[error("inconsistent sizes: {0}")]
    BadShape(String),
    #[error("lp failure: {0}")]
    Lp(#[from] lp::LpError),
    #[error("no strictly feasible instance found in {0} rejection samples")]
    RejectionExhausted(usize),
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceJson {
    m: usize,
    n: usize,
    #[serde(rename = "L")]
    l: u64,
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
    b: Vec<String>,
}

fn parse_rat_or(s: &str) -> Result<Rat, InstanceError> {
    parse_rat(s).ok_or_else(|| InstanceError::BadRational(s.to_string()))
}

pub fn instance_to_json(inst: &LpInstance) -> String {
    let doc = InstanceJson {
        m: inst.m,
        n: inst.n,
        l: inst.l,
        a: inst
            .a
            .iter()
            .map(|row| row.iter().map(format_rat).collect())
            .collect(),
        b: inst.b.iter().map(format_rat).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("instance serialization is infallible")
}

pub fn instance_from_json(text: &str) -> Result<LpInstance, InstanceError> {
    let doc: InstanceJson = serde_json::from_str(text)?;
    if doc.a.len() != doc.m || doc.b.len() != doc.m {
        return Err(InstanceError::BadShape(format!(
            "m = {} but A has {} rows and b has {} entries",
            doc.m,
            doc.a.len(),
            doc.b.len()
        )));
    }
    let mut a = Vec::with_capacity(doc.m);
    for row in &doc.a {
        if row.len() != doc.n {
            return Err(InstanceError::BadShape(format!(
                "n = {} but a row has {} entries",
                doc.n,
                row.len()
            )));
        }
        a.push(row.iter().map(|s| parse_rat_or(s)).collect::<Result<QVec, _>>()?);
    }
    let b = doc.b.iter().map(|s| parse_rat_or(s)).collect::<Result<QVec, _>>()?;
    let inst = LpInstance::new(a, b);
    // The stored L is authoritative for budget formulas; keep it.
    Ok(LpInstance { l: doc.l, ..inst })
}

pub fn write_instance(path: &Path, inst: &LpInstance) -> Result<(), InstanceError> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<LpInstance, InstanceError> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

/// Ground-truth strict-feasibility verdict for an instance, stored next to
/// it (never inside it).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Verdict {
    pub feasible: bool,
    /// A strictly feasible point when one exists, in "p/q" form.
    pub witness: Option<Vec<String>>,
}

pub fn verdict_path(instance_path: &Path) -> PathBuf {
    let mut os = instance_path.as_os_str().to_owned();
    os.push(".verdict.json");
    PathBuf::from(os)
}

pub fn compute_verdict(inst: &LpInstance) -> Result<Verdict, InstanceError> {
    match lp::lp_feasible_strict(&inst.rows())? {
        lp::StrictOutcome::Feasible(x) => Ok(Verdict {
            feasible: true,
            witness: Some(x.iter().map(format_rat).collect()),
        }),
        lp::StrictOutcome::Infeasible => Ok(Verdict { feasible: false, witness: None }),
    }
}

pub fn write_verdict(instance_path: &Path, v: &Verdict) -> Result<(), InstanceError> {
    std::fs::write(verdict_path(instance_path), serde_json::to_string_pretty(v)?)?;
    Ok(())
}

pub fn read_verdict(instance_path: &Path) -> Result<Verdict, InstanceError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(verdict_path(instance_path))?)?)
}

/// Uniform integer entries in [-(2^bits - 1), 2^bits - 1]; zero rows are
/// resampled so every constraint defines a half-space.
pub fn gen_random(m: usize, n: usize, bits: u32, seed: u64) -> LpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi: i64 = (1i64 << bits) - 1;
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        let row: QVec = loop {
            let r: QVec = (0..n).map(|_| crate::rat::int(rng.gen_range(-hi..=hi))).collect();
            if !crate::vecn::is_zero(&r) {
                break r;
            }
        };
        a.push(row);
        b.push(crate::rat::int(rng.gen_range(-hi..=hi)));
    }
    LpInstance::new(a, b)
}

/// Rejection-samples until the generated instance is strictly feasible.
pub fn gen_feasible(
    m: usize,
    n: usize,
    bits: u32,
    seed: u64,
    max_tries: usize,
) -> Result<LpInstance, InstanceError> {
    for t in 0..max_tries {
        let inst = gen_random(m, n, bits, seed.wrapping_add(t as u64).wrapping_mul(0x9e37_79b9));
        if lp::lp_feasible_strict(&inst.rows())?.is_feasible() {
            return Ok(inst);
        }
    }
    Err(InstanceError::RejectionExhausted(max_tries))
}

/// Serialized adversarial family: base polytope rows, touching half-spaces,
/// certified shift, and the k candidate systems.
#[derive(Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub delta: String,
    /// Strict rows (a, b) meaning a.y > b, entries "p/q".
    pub base_rows: Vec<(Vec<String>, String)>,
    pub touching: Vec<(Vec<String>, String)>,
    pub vertices: Vec<Vec<String>>,
}

pub fn family_to_json(f: &AdversarialFamily) -> String {
    let row = |(a, b): &(QVec, Rat)| {
        (a.iter().map(format_rat).collect::<Vec<_>>(), format_rat(b))
    };
    let doc = FamilyJson {
        n: f.n,
        m: f.m,
        k: f.k,
        delta: format_rat(&f.delta),
        base_rows: f.base_rows.iter().map(row).collect(),
        touching: f.touching.iter().map(row).collect(),
        vertices: f
            .vertices
            .iter()
            .map(|v| v.iter().map(format_rat).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("family serialization is infallible")
}
