//! Adversarial lower-bound instance families built from cyclic polytopes.
//!
//! The dual of a cyclic polytope C(n, m) is a polytope P with m facets and
//! k = Theta(m^floor(n/2)) vertices. Shrinking a supporting half-space at
//! each vertex by a common rational shift delta yields k pairwise-disjoint
//! "pockets" inside P; the family of strict systems
//! LP_i = { interior of P } ∩ { pocket half-space i } is what an adaptive
//! adversary uses to force any solver to spend at least k - 1 queries: as
//! long as fewer than k queries have been made, the adversary answers
//! "constraint m+1 violated" even for queries that land inside a pocket,
//! eliminating at most one candidate system per query.

use crate::lp::{self, LpInstance};
use crate::oracle::{OracleReply, QueryOracle, Transcript};
use crate::rat::{int, pow2, Rat};
use crate::vecn::{self, QVec};
use num::{One, Signed, Zero};

#[derive(Debug, Clone, thiserror::Error)]
pub enum LowerBoundError {
    #[error("cyclic polytope requires m > n >= 2, got n={n}, m={m}")]
    BadDimensions { n: usize, m: usize },
    #[error("no shift delta certified disjoint pockets after {0} halvings")]
    DeltaSearchFailed(usize),
    #[error("lp failure: {0}")]
    Lp(#[from] lp::LpError),
}

/// Combinatorics of the cyclic polytope C(n, m) on moment-curve points
/// c(t) = (t, t^2, ..., t^n) with parameters t_i = i for i = 1..m.
#[derive(Debug, Clone)]
pub struct CyclicPolytope {
    pub n: usize,
    pub m: usize,
    /// Moment-curve parameters, ascending.
    pub t: Vec<i64>,
    /// Vertex coordinates c(t_i), exact.
    pub vertices: Vec<QVec>,
    /// Facets as sorted n-element index sets into `vertices`.
    pub facets: Vec<Vec<usize>>,
}

/// Gale's evenness condition: an n-subset S of {0..m-1} spans a facet of
/// C(n, m) iff every pair of indices outside S has an even number of
/// elements of S strictly between them.
fn gale_even(s: &[usize], m: usize) -> bool {
    let member = |x: usize| s.binary_search(&x).is_ok();
    for i in 0..m {
        if member(i) {
            continue;
        }
        for j in i + 1..m {
            if member(j) {
                continue;
            }
            let between = s.iter().filter(|&&k| i < k && k < j).count();
            if between % 2 != 0 {
                return false;
            }
        }
    }
    true
}

fn subsets(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(start: usize, m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, n, cur, out);
            cur.pop();
        }
    }
    rec(0, m, n, &mut cur, &mut out);
    out
}

pub fn cyclic_polytope(n: usize, m: usize) -> Result<CyclicPolytope, LowerBoundError> {
    if n < 2 || m <= n {
        return Err(LowerBoundError::BadDimensions { n, m });
    }
    let t: Vec<i64> = (1..=m as i64).collect();
    let vertices: Vec<QVec> = t
        .iter()
        .map(|&ti| (1..=n as u32).map(|p| int(ti.pow(p))).collect())
        .collect();
    let facets = subsets(m, n)
        .into_iter()
        .filter(|s| gale_even(s, m))
        .collect();
    Ok(CyclicPolytope { n, m, t, vertices, facets })
}

fn binomial(a: u64, b: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Maximum vertex count of an n-polytope with m facets (tight at the dual
/// cyclic polytope): C(m - floor((n+1)/2), m - n) + C(m - floor((n+2)/2), m - n).
pub fn ubt_count(n: usize, m: usize) -> u64 {
    let (n, m) = (n as u64, m as u64);
    binomial(m - (n + 1) / 2, m - n) + binomial(m - (n + 2) / 2, m - n)
}

/// Solves the square system M x = rhs by exact Gaussian elimination.
/// Returns None when M is singular.
fn solve_square(mut mat: Vec<QVec>, mut rhs: QVec) -> Option<QVec> {
    let d = rhs.len();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = mat[col][col].clone();
        for c in col..d {
            mat[col][c] = &mat[col][c] / &p;
        }
        rhs[col] = &rhs[col] / &p;
        for r in 0..d {
            if r == col || mat[r][col].is_zero() {
                continue;
            }
            let f = mat[r][col].clone();
            for c in col..d {
                mat[r][c] = &mat[r][c] - &(&f * &mat[col][c]);
            }
            rhs[r] = &rhs[r] - &(&f * &rhs[col]);
        }
    }
    Some(rhs)
}

/// The adversary's instance family: the dual polytope P of C(n, m), one
/// touching half-space per vertex of P, and the certified inward shift.
#[derive(Debug, Clone)]
pub struct AdversarialFamily {
    pub n: usize,
    pub m: usize,
    /// Number of vertices of P (= pockets = candidate systems).
    pub k: usize,
    /// Interior of P as strict rows (a, b) meaning a.y > b; m rows.
    pub base_rows: Vec<(QVec, Rat)>,
    /// Vertices v_1..v_k of P, exact.
    pub vertices: Vec<QVec>,
    /// Touching half-spaces: (c_i, d_i) with c_i.y <= d_i on P, equality
    /// exactly at v_i.
    pub touching: Vec<(QVec, Rat)>,
    /// Certified inward shift: pocket i is {y in int P : c_i.y > d_i - delta}.
    pub delta: Rat,
    /// The k candidate systems LP_i, each with m + 1 strict constraints.
    pub instances: Vec<LpInstance>,
}

impl AdversarialFamily {
    /// True when y is in the open interior of P.
    pub fn in_interior(&self, y: &[Rat]) -> bool {
        self.base_rows
            .iter()
            .all(|(a, b)| vecn::dot(a, y) > *b)
    }

    /// Index of the (unique, by disjointness) open pocket containing y,
    /// assuming y is interior to P.
    pub fn pocket_of(&self, y: &[Rat]) -> Option<usize> {
        self.touching
            .iter()
            .position(|(c, d)| vecn::dot(c, y) > d - &self.delta)
    }
}

/// Builds the dual polytope of C(n, m) about the centroid of its
/// moment-curve vertices, enumerates its k vertices from the Gale facet
/// list, erects one touching half-space per vertex, and shrinks all of
/// them by a common delta certified by exact LP: every pocket strictly
/// nonempty, every pair of pockets disjoint.
pub fn build_adversarial_family(n: usize, m: usize) -> Result<AdversarialFamily, LowerBoundError> {
    let cp = cyclic_polytope(n, m)?;
    // Centroid of the moment-curve vertices; shifted vertex directions w_i.
    let mut centroid = vecn::zeros(n);
    for v in &cp.vertices {
        centroid = vecn::add(&centroid, v);
    }
    let inv_m = Rat::one() / int(m as i64);
    centroid = vecn::scale(&centroid, &inv_m);
    let w: Vec<QVec> = cp.vertices.iter().map(|v| vecn::sub(v, &centroid)).collect();

    // Polar dual P = { y : w_i . y <= 1 }; interior rows -w_i . y > -1.
    let base_rows: Vec<(QVec, Rat)> = w
        .iter()
        .map(|wi| (vecn::neg(wi), -Rat::one()))
        .collect();

    // Each Gale facet S of C(n, m) is a vertex of P: the solution of
    // w_i . y = 1 for i in S. The dual of a simplicial polytope is simple,
    // so the n equations are independent.
    let mut vertices = Vec::with_capacity(cp.facets.len());
    let mut touching = Vec::with_capacity(cp.facets.len());
    for s in &cp.facets {
        let mat: Vec<QVec> = s.iter().map(|&i| w[i].clone()).collect();
        let rhs: QVec = vec![Rat::one(); n];
        let v = solve_square(mat, rhs).expect("facet equations are independent");
        // Touching normal: sum of the active facet normals of P. On P,
        // c . y <= |S| = n with equality only at this vertex.
        let mut c = vecn::zeros(n);
        for &i in s {
            c = vecn::add(&c, &w[i]);
        }
        vertices.push(v);
        touching.push((c, int(n as i64)));
    }
    let k = vertices.len();
    debug_assert_eq!(k as u64, ubt_count(n, m));

    // Halving search for delta, certified exactly. Starting large keeps
    // the certified pockets as fat as the geometry allows, which keeps the
    // feasible cones of the candidate systems wide and the solver runs of
    // the experiment harness short.
    let max_halvings = 48;
    let mut delta = pow2(-1);
    'search: for _ in 0..max_halvings {
        // Every pocket strictly nonempty.
        for (c, d) in &touching {
            let mut rows = base_rows.clone();
            rows.push((c.clone(), d - &delta));
            if !lp::lp_feasible_strict(&rows)?.is_feasible() {
                delta = &delta / &int(2);
                continue 'search;
            }
        }
        // Every pair of open pockets disjoint.
        for i in 0..k {
            for j in i + 1..k {
                let mut rows = base_rows.clone();
                rows.push((touching[i].0.clone(), &touching[i].1 - &delta));
                rows.push((touching[j].0.clone(), &touching[j].1 - &delta));
                if lp::lp_feasible_strict(&rows)?.is_feasible() {
                    delta = &delta / &int(2);
                    continue 'search;
                }
            }
        }
        // Certified: build the k candidate systems LP_i.
        let instances = touching
            .iter()
            .map(|(c, d)| {
                let mut a: Vec<QVec> = base_rows.iter().map(|(r, _)| r.clone()).collect();
                let mut b: QVec = base_rows.iter().map(|(_, b)| b.clone()).collect();
                a.push(c.clone());
                b.push(d - &delta);
                LpInstance::new(a, b)
            })
            .collect();
        return Ok(AdversarialFamily {
            n,
            m,
            k,
            base_rows,
            vertices,
            touching,
            delta,
            instances,
        });
    }
    Err(LowerBoundError::DeltaSearchFailed(max_halvings))
}

/// The adaptive adversary as a query oracle over m + 1 constraints.
///
/// Before the k-th query: a point outside the interior of P earns the
/// first violated base index; an interior point earns index m + 1 even if
/// it lies inside a pocket (the corresponding candidate system is then
/// marked inconsistent). At the k-th query the adversary commits to a
/// surviving candidate -- preferring one whose pocket does not contain the
/// query -- and answers truthfully for it from then on.
#[derive(Debug)]
pub struct AdversaryOracle {
    family: AdversarialFamily,
    consistent: Vec<bool>,
    committed: Option<usize>,
    transcript: Transcript,
}

impl AdversaryOracle {
    pub fn new(family: AdversarialFamily) -> Self {
        let k = family.k;
        AdversaryOracle {
            family,
            consistent: vec![true; k],
            committed: None,
            transcript: Transcript::default(),
        }
    }

    pub fn family(&self) -> &AdversarialFamily {
        &self.family
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }

    pub fn committed_instance(&self) -> Option<&LpInstance> {
        self.committed.map(|i| &self.family.instances[i])
    }

    pub fn surviving(&self) -> usize {
        self.consistent.iter().filter(|&&c| c).count()
    }

    fn commit(&mut self, avoid_pocket: Option<usize>) {
        let pick = (0..self.family.k)
            .filter(|&i| self.consistent[i])
            .find(|&i| Some(i) != avoid_pocket)
            .or_else(|| (0..self.family.k).find(|&i| self.consistent[i]));
        let i = pick.expect("at most q-1 candidates eliminated by q-1 queries");
        self.committed = Some(i);
        self.consistent = (0..self.family.k).map(|j| j == i).collect();
    }

    fn truthful(&self, i: usize, x: &[Rat]) -> OracleReply {
        match self.family.instances[i].violated(x).first() {
            None => OracleReply::Feasible,
            Some(&j) => OracleReply::ViolatedIndex(j + 1),
        }
    }

    /// Checks the whole transcript against the committed instance: every
    /// violated-index reply must name a genuinely violated constraint and
    /// every Feasible reply a genuinely feasible point.
    pub fn replay_consistent(&self) -> bool {
        let Some(inst) = self.committed_instance() else {
            return self.transcript.is_empty();
        };
        self.transcript.entries.iter().all(|(x, reply)| match reply {
            OracleReply::Feasible => inst.satisfies_strict(x),
            OracleReply::ViolatedIndex(j) => {
                *j >= 1 && *j <= inst.m && vecn::dot(&inst.a[j - 1], x) <= inst.b[j - 1]
            }
        })
    }
}

impl QueryOracle for AdversaryOracle {
    fn m(&self) -> usize {
        self.family.m + 1
    }

    fn n(&self) -> usize {
        self.family.n
    }

    fn l(&self) -> u64 {
        self.family
            .instances
            .iter()
            .map(|inst| inst.l)
            .max()
            .unwrap_or(1)
    }

    fn query(&mut self, x: &[Rat]) -> OracleReply {
        let reply = if let Some(i) = self.committed {
            self.truthful(i, x)
        } else if !self.family.in_interior(x) {
            // Violated base constraint: same row in every candidate, so no
            // candidate is eliminated. FirstIndex tie policy.
            let j = self
                .family
                .base_rows
                .iter()
                .position(|(a, b)| vecn::dot(a, x) <= *b)
                .expect("not interior implies a violated base row");
            OracleReply::ViolatedIndex(j + 1)
        } else {
            let pocket = self.family.pocket_of(x);
            if self.transcript.len() + 1 < self.family.k {
                // Deferral: claim the touching constraint is violated. If x
                // is in pocket i this is a lie about LP_i; eliminate it.
                if let Some(i) = pocket {
                    self.consistent[i] = false;
                }
                OracleReply::ViolatedIndex(self.family.m + 1)
            } else {
                // Query number k: commit to a surviving candidate, dodging
                // the queried pocket when any other survivor remains.
                self.commit(pocket);
                self.truthful(self.committed.unwrap(), x)
            }
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

/// One run of the worst-case solver against the adversary.
#[derive(Debug, Clone)]
pub struct LowerBoundRun {
    pub seed: u64,
    pub queries: usize,
    pub k: usize,
    /// Witness returned by the solver, verified against the committed
    /// candidate system.
    pub witness: QVec,
    pub committed: usize,
}

/// Runs the covering solver against the adversary once per seed and checks
/// the floor: every run must spend at least k - 1 queries and end with a
/// witness strictly feasible for the committed candidate system, with the
/// whole transcript consistent under replay.
pub fn run_lowerbound_experiment(
    n: usize,
    m: usize,
    seeds: &[u64],
    config: &crate::covering::SolverConfig,
) -> Result<Vec<LowerBoundRun>, LowerBoundError> {
    let family = build_adversarial_family(n, m)?;
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let oracle = AdversaryOracle::new(family.clone());
        let (out, _stats, hom) = crate::covering::solve_worstcase(oracle, config)
            .map_err(|e| match e {
                crate::covering::SolveError::Lp(le) => LowerBoundError::Lp(le),
                other => panic!("covering solver failed against adversary: {other}"),
            })?;
        let adversary = hom.into_inner();
        let queries = adversary.queries();
        let k = family.k;
        assert!(
            queries >= k - 1,
            "adversary floor breached: {queries} queries < k - 1 = {}",
            k - 1
        );
        let witness = match out {
            crate::covering::SolveOutcome::Solution(x) => x,
            crate::covering::SolveOutcome::Infeasible => {
                panic!("solver declared infeasible; every candidate system is feasible")
            }
        };
        let committed = adversary
            .committed()
            .expect("a finished run must have committed");
        assert!(
            adversary.committed_instance().unwrap().satisfies_strict(&witness),
            "witness does not verify against the committed candidate"
        );
        assert!(adversary.replay_consistent(), "transcript replay failed");
        runs.push(LowerBoundRun { seed, queries, k, witness, committed });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::SolverConfig;
    use crate::vecn::dot;

    /// Brute-force facet oracle: an n-subset spans a facet iff all other
    /// vertices lie strictly on one side of its affine hull.
    fn brute_force_facets(cp: &CyclicPolytope) -> Vec<Vec<usize>> {
        let n = cp.n;
        let mut out = Vec::new();
        'subset: for s in subsets(cp.m, n) {
            // Hyperplane through the n points: normal from the nullspace of
            // the (n-1) x n difference matrix, found by trying each
            // coordinate as the free variable.
            let p0 = &cp.vertices[s[0]];
            let diffs: Vec<QVec> = s[1..]
                .iter()
                .map(|&i| vecn::sub(&cp.vertices[i], p0))
                .collect();
            let normal = (0..n).find_map(|free| {
                let mat: Vec<QVec> = diffs
                    .iter()
                    .map(|d| {
                        (0..n).filter(|&c| c != free).map(|c| d[c].clone()).collect()
                    })
                    .collect();
                let rhs: QVec = diffs.iter().map(|d| -&d[free]).collect();
                solve_square(mat, rhs).map(|sol| {
                    let mut a = vecn::zeros(n);
                    a[free] = Rat::one();
                    let mut idx = 0;
                    for c in 0..n {
                        if c != free {
                            a[c] = sol[idx].clone();
                            idx += 1;
                        }
                    }
                    a
                })
            });
            let Some(a) = normal else { continue };
            let b = dot(&a, p0);
            let mut sign = 0i32;
            for (i, v) in cp.vertices.iter().enumerate() {
                if s.contains(&i) {
                    continue;
                }
                let val = dot(&a, v) - &b;
                if val.is_zero() {
                    continue 'subset; // degenerate: not a facet of a simplicial polytope
                }
                let this = if val.is_positive() { 1 } else { -1 };
                if sign == 0 {
                    sign = this;
                } else if sign != this {
                    continue 'subset;
                }
            }
            out.push(s);
        }
        out
    }

    #[test]
    fn pentagon_has_five_edges() {
        let cp = cyclic_polytope(2, 5).unwrap();
        assert_eq!(cp.facets.len(), 5);
    }

    #[test]
    fn c_3_6_has_eight_facets() {
        // Simplicial 3-polytope with 6 vertices: Euler gives 2m - 4 facets.
        let cp = cyclic_polytope(3, 6).unwrap();
        assert_eq!(cp.facets.len(), 8);
    }

    #[test]
    fn c_4_8_has_twenty_facets() {
        let cp = cyclic_polytope(4, 8).unwrap();
        assert_eq!(cp.facets.len(), 20);
    }

    #[test]
    fn rejects_too_few_points() {
        assert!(cyclic_polytope(3, 3).is_err());
        assert!(cyclic_polytope(1, 5).is_err());
    }

    #[test]
    fn gale_matches_brute_force_enumeration() {
        for n in 2..=4usize {
            for m in (n + 1)..=8usize {
                let cp = cyclic_polytope(n, m).unwrap();
                let mut gale = cp.facets.clone();
                let mut brute = brute_force_facets(&cp);
                gale.sort();
                brute.sort();
                assert_eq!(gale, brute, "facet mismatch at n={n}, m={m}");
            }
        }
    }

    #[test]
    fn ubt_closed_form_values() {
        assert_eq!(ubt_count(2, 5), 5);
        assert_eq!(ubt_count(3, 5), 6);
        assert_eq!(ubt_count(4, 8), 20);
        for m in 3..=16 {
            assert_eq!(ubt_count(2, m), m as u64, "polygon: m vertices");
        }
        for m in 4..=12 {
            assert_eq!(ubt_count(3, m), 2 * m as u64 - 4, "simplicial 3-polytope");
        }
    }

    #[test]
    fn ubt_matches_facet_enumeration() {
        for n in 2..=4usize {
            for m in (n + 1)..=8usize {
                let cp = cyclic_polytope(n, m).unwrap();
                assert_eq!(cp.facets.len() as u64, ubt_count(n, m), "n={n}, m={m}");
            }
        }
    }

    #[test]
    fn family_quadrilateral() {
        let fam = build_adversarial_family(2, 4).unwrap();
        assert_eq!(fam.k, 4);
        assert_eq!(fam.instances.len(), 4);
        for inst in &fam.instances {
            assert_eq!(inst.m, 5);
            assert!(lp::lp_feasible_strict(&inst.rows()).unwrap().is_feasible());
        }
    }

    #[test]
    fn family_pockets_nonempty_and_disjoint_2_6() {
        let fam = build_adversarial_family(2, 6).unwrap();
        assert_eq!(fam.k, 6);
        // Construction certifies by LP; re-check independently here.
        for inst in &fam.instances {
            assert!(lp::lp_feasible_strict(&inst.rows()).unwrap().is_feasible());
        }
        for i in 0..fam.k {
            for j in i + 1..fam.k {
                let mut rows = fam.base_rows.clone();
                rows.push((fam.touching[i].0.clone(), &fam.touching[i].1 - &fam.delta));
                rows.push((fam.touching[j].0.clone(), &fam.touching[j].1 - &fam.delta));
                assert!(
                    !lp::lp_feasible_strict(&rows).unwrap().is_feasible(),
                    "pockets {i} and {j} overlap"
                );
            }
        }
    }

    #[test]
    fn family_4_8_has_twenty_pockets() {
        let fam = build_adversarial_family(4, 8).unwrap();
        assert_eq!(fam.k, 20);
        for inst in &fam.instances {
            assert!(lp::lp_feasible_strict(&inst.rows()).unwrap().is_feasible());
        }
    }

    #[test]
    fn touching_halfspaces_support_exactly_one_vertex() {
        let fam = build_adversarial_family(2, 5).unwrap();
        for (i, (c, d)) in fam.touching.iter().enumerate() {
            for (j, v) in fam.vertices.iter().enumerate() {
                let val = dot(c, v);
                if i == j {
                    assert_eq!(val, *d, "touching plane must pass through its vertex");
                } else {
                    assert!(val < *d, "touching plane must miss other vertices");
                }
            }
        }
    }

    #[test]
    fn adversary_reply_semantics() {
        let fam = build_adversarial_family(2, 4).unwrap();
        let m = fam.m;
        let mut adv = AdversaryOracle::new(fam.clone());
        // Far outside P: some base index <= m.
        let far = vec![int(1_000_000), int(1_000_000)];
        match adv.query(&far) {
            OracleReply::ViolatedIndex(j) => assert!(j >= 1 && j <= m),
            OracleReply::Feasible => panic!("far point cannot be feasible"),
        }
        // Interior point avoiding all pockets: the centroid of P's
        // vertices shrunk toward the origin (origin is interior of P).
        let origin = vecn::zeros(2);
        assert!(fam.in_interior(&origin));
        assert_eq!(fam.pocket_of(&origin), None, "origin must avoid the thin pockets");
        assert_eq!(adv.query(&origin), OracleReply::ViolatedIndex(m + 1));
    }

    #[test]
    fn adversary_defers_and_commits() {
        let fam = build_adversarial_family(2, 4).unwrap();
        let k = fam.k;
        let m = fam.m;
        // Interior points inside each pocket: move from the origin toward
        // each vertex until the pocket test passes.
        let pocket_points: Vec<QVec> = (0..k)
            .map(|i| {
                let v = &fam.vertices[i];
                let mut lo = Rat::zero();
                let mut hi = Rat::one();
                for _ in 0..64 {
                    let mid = (&lo + &hi) / int(2);
                    let p = vecn::scale(v, &mid);
                    if fam.in_interior(&p) && fam.pocket_of(&p) == Some(i) {
                        return p;
                    }
                    if fam.in_interior(&p) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                panic!("no interior pocket point found for vertex {i}")
            })
            .collect();
        let mut adv = AdversaryOracle::new(fam);
        // Queries 1..k-1 inside distinct pockets: all deferred with m+1.
        for p in pocket_points.iter().take(k - 1) {
            assert_eq!(adv.query(p), OracleReply::ViolatedIndex(m + 1));
        }
        assert_eq!(adv.surviving(), 1, "k - 1 distinct pockets eliminated");
        assert!(adv.committed().is_none());
        // Query k commits to the last survivor and answers truthfully.
        let reply = adv.query(&pocket_points[k - 1]);
        let committed = adv.committed().expect("commit at query k");
        assert_eq!(committed, k - 1);
        assert_eq!(reply, OracleReply::Feasible);
        assert!(adv.replay_consistent(), "all prior replies consistent with LP_i");
    }

    #[test]
    fn adversary_keeps_two_candidates_before_k_minus_one_queries() {
        let fam = build_adversarial_family(2, 6).unwrap();
        let k = fam.k;
        let mut adv = AdversaryOracle::new(fam.clone());
        // Hammer the adversary with pocket points; before query k - 1 at
        // least two candidates must remain alive.
        // Scaling a vertex by 1 - delta/(2n) keeps it interior and inside
        // its (delta/n)-thin pocket.
        let shrink = Rat::one() - &fam.delta / int(2 * fam.n as i64);
        for i in 0..k - 2 {
            let p = vecn::scale(&fam.vertices[i % k], &shrink);
            assert!(fam.in_interior(&p) && fam.pocket_of(&p) == Some(i % k));
            adv.query(&p);
            assert!(adv.surviving() >= 2, "after {} queries", i + 1);
        }
    }

    #[test]
    fn experiment_floor_2_4() {
        let runs =
            run_lowerbound_experiment(2, 4, &[0], &SolverConfig::with_cap(40)).unwrap();
        assert_eq!(runs[0].k, 4);
        assert!(runs[0].queries >= 3);
    }

    #[test]
    fn experiment_floor_2_6() {
        let runs =
            run_lowerbound_experiment(2, 6, &[0, 1], &SolverConfig::with_cap(40)).unwrap();
        for r in &runs {
            assert_eq!(r.k, 6);
            assert!(r.queries >= 5, "floor k - 1 = 5, got {}", r.queries);
        }
    }

    #[test]
    fn experiment_floor_grows_linearly_in_m_for_n_2() {
        let mut floors = Vec::new();
        for m in [4usize, 8, 12, 16] {
            let runs =
                run_lowerbound_experiment(2, m, &[0], &SolverConfig::with_cap(40)).unwrap();
            assert_eq!(runs[0].k, m, "k = m for polygons");
            assert!(runs[0].queries >= m - 1);
            floors.push(runs[0].queries);
        }
        for w in floors.windows(2) {
            assert!(w[1] > w[0], "query floor must grow with m");
        }
    }
}
