//! Simulated verification oracles over hidden instances.
//!
//! A solver never sees A or b; it sees only (m, n, L) and a query interface
//! that answers `Feasible` or the index of one violated constraint.
//! Constraint indices in replies are 1-based; index m+1 is reserved for the
//! positivity constraint introduced by homogenization.

use crate::lp::LpInstance;
use crate::rat::{format_rat, Rat};
use crate::vecn::{self, QVec};
use num::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleReply {
    Feasible,
    ViolatedIndex(usize),
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error("constraint row {0} is zero; distances undefined")]
    ZeroRow(usize),
    #[error("query dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Append-only query log. One entry per charged query.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub entries: Vec<(QVec, OracleReply)>,
    pub seed: u64,
}

impl Transcript {
    pub fn push(&mut self, x: QVec, reply: OracleReply) {
        self.entries.push((x, reply));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Line-oriented log: coordinates in "p/q" form, then the reply.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for (x, reply) in &self.entries {
            let coords: Vec<String> = x.iter().map(format_rat).collect();
            let tail = match reply {
                OracleReply::Feasible => "feasible".to_string(),
                OracleReply::ViolatedIndex(i) => format!("violated {i}"),
            };
            out.push_str(&format!("{} -> {}\n", coords.join(" "), tail));
        }
        out
    }
}

/// How a simulated oracle breaks ties among equally valid reply indices.
pub enum TiePolicy {
    FirstIndex,
    RandomSeeded(ChaCha8Rng),
    /// Receives the query and the 1-based candidate indices; must return
    /// one of the candidates.
    AdversaryCallback(Box<dyn FnMut(&[Rat], &[usize]) -> usize + Send>),
}

impl TiePolicy {
    pub fn random(seed: u64) -> Self {
        TiePolicy::RandomSeeded(ChaCha8Rng::seed_from_u64(seed))
    }

    fn pick(&mut self, x: &[Rat], candidates: &[usize]) -> usize {
        debug_assert!(!candidates.is_empty());
        match self {
            TiePolicy::FirstIndex => candidates[0],
            TiePolicy::RandomSeeded(rng) => candidates[rng.gen_range(0..candidates.len())],
            TiePolicy::AdversaryCallback(f) => {
                let i = f(x, candidates);
                assert!(candidates.contains(&i), "callback returned non-candidate {i}");
                i
            }
        }
    }
}

impl std::fmt::Debug for TiePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TiePolicy::FirstIndex => write!(f, "FirstIndex"),
            TiePolicy::RandomSeeded(_) => write!(f, "RandomSeeded"),
            TiePolicy::AdversaryCallback(_) => write!(f, "AdversaryCallback"),
        }
    }
}

/// Worst-case oracle: any violated index may be returned; the policy
/// chooses among all of them.
pub fn worst_case_query(hidden: &LpInstance, x: &[Rat], policy: &mut TiePolicy) -> OracleReply {
    let violated = hidden.violated(x);
    if violated.is_empty() {
        OracleReply::Feasible
    } else {
        let candidates: Vec<usize> = violated.iter().map(|i| i + 1).collect();
        OracleReply::ViolatedIndex(policy.pick(x, &candidates))
    }
}

/// Furthest oracle: returns an index maximizing the Euclidean distance
/// (b_i - <a_i, x>) / |a_i| over violated constraints. Compared exactly on
/// squared distances cross-multiplied by squared norms; ties go to the
/// policy.
pub fn furthest_query(
    hidden: &LpInstance,
    x: &[Rat],
    policy: &mut TiePolicy,
) -> Result<OracleReply, OracleError> {
    if x.len() != hidden.n {
        return Err(OracleError::DimensionMismatch { expected: hidden.n, got: x.len() });
    }
    for (i, row) in hidden.a.iter().enumerate() {
        if vecn::is_zero(row) {
            return Err(OracleError::ZeroRow(i + 1));
        }
    }
    let violated = hidden.violated(x);
    if violated.is_empty() {
        return Ok(OracleReply::Feasible);
    }
    // d_i^2 * |a_j|^2 vs d_j^2 * |a_i|^2 with d_i = b_i - <a_i,x> >= 0.
    let mut best: Vec<usize> = vec![violated[0]];
    let dist = |i: usize| -> (Rat, Rat) {
        let d = &hidden.b[i] - vecn::dot(&hidden.a[i], x);
        debug_assert!(!d.is_negative());
        (&d * &d, vecn::norm_sq(&hidden.a[i]))
    };
    let (mut bd2, mut bn2) = dist(best[0]);
    for &i in &violated[1..] {
        let (d2, n2) = dist(i);
        let lhs = &d2 * &bn2;
        let rhs = &bd2 * &n2;
        if lhs > rhs {
            best = vec![i];
            bd2 = d2;
            bn2 = n2;
        } else if lhs == rhs {
            best.push(i);
        }
    }
    let candidates: Vec<usize> = best.iter().map(|i| i + 1).collect();
    Ok(OracleReply::ViolatedIndex(policy.pick(x, &candidates)))
}

/// The interface a solver sees: sizes plus queries. Implementations log
/// every query to their transcript.
pub trait QueryOracle {
    fn m(&self) -> usize;
    fn n(&self) -> usize;
    fn l(&self) -> u64;
    fn query(&mut self, x: &[Rat]) -> OracleReply;
    fn queries(&self) -> usize;
    fn transcript(&self) -> &Transcript;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    WorstCase,
    Furthest,
}

/// Simulated oracle owning its hidden instance.
#[derive(Debug)]
pub struct SimOracle {
    hidden: LpInstance,
    kind: OracleKind,
    policy: TiePolicy,
    transcript: Transcript,
}

impl SimOracle {
    pub fn new(hidden: LpInstance, kind: OracleKind, policy: TiePolicy) -> Self {
        SimOracle { hidden, kind, policy, transcript: Transcript::default() }
    }

    pub fn hidden(&self) -> &LpInstance {
        &self.hidden
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

impl QueryOracle for SimOracle {
    fn m(&self) -> usize {
        self.hidden.m
    }
    fn n(&self) -> usize {
        self.hidden.n
    }
    fn l(&self) -> u64 {
        self.hidden.l
    }
    fn query(&mut self, x: &[Rat]) -> OracleReply {
        let reply = match self.kind {
            OracleKind::WorstCase => worst_case_query(&self.hidden, x, &mut self.policy),
            OracleKind::Furthest => furthest_query(&self.hidden, x, &mut self.policy)
                .expect("furthest oracle misconfigured"),
        };
        self.transcript.push(x.to_vec(), reply.clone());
        reply
    }
    fn queries(&self) -> usize {
        self.transcript.len()
    }
    fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

/// Homogenization wrapper: queries live in R^(n+1) as (x, y). When y <= 0
/// the reply is m+1; otherwise x/y is forwarded to the inner oracle. The
/// original system Ax > b is feasible exactly when Ax - by > 0, y > 0 is.
pub struct Homogenized<O: QueryOracle> {
    inner: O,
    transcript: Transcript,
}

impl<O: QueryOracle> Homogenized<O> {
    pub fn new(inner: O) -> Self {
        Homogenized { inner, transcript: Transcript::default() }
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: QueryOracle> QueryOracle for Homogenized<O> {
    fn m(&self) -> usize {
        self.inner.m() + 1
    }
    fn n(&self) -> usize {
        self.inner.n() + 1
    }
    fn l(&self) -> u64 {
        self.inner.l()
    }
    fn query(&mut self, xy: &[Rat]) -> OracleReply {
        let n = self.inner.n();
        assert_eq!(xy.len(), n + 1, "homogenized query dimension");
        let y = &xy[n];
        let reply = if !y.is_positive() {
            OracleReply::ViolatedIndex(self.inner.m() + 1)
        } else {
            let x: QVec = xy[..n].iter().map(|c| c / y).collect();
            self.inner.query(&x)
        };
        self.transcript.push(xy.to_vec(), reply.clone());
        reply
    }
    fn queries(&self) -> usize {
        self.transcript.len()
    }
    fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}
