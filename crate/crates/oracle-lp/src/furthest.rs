//! Ellipsoid-based solver for the furthest-violation oracle model.
//!
//! The hidden constraint system A x > b is sought as a single point in
//! R^{m(n+1)} (row-normalized, so each row of A is a unit vector). Every
//! oracle interaction yields linear inequalities that the hidden point must
//! satisfy; these drive a central/deep-cut ellipsoid method over candidate
//! instances. When the current candidate system is infeasible, the solver
//! compares the candidate's generalized Voronoi diagram (cells where one
//! constraint is the furthest-violated one) against the hidden diagram by
//! probing facet neighborhoods, and decides infeasibility through the
//! support system at an extreme point of the candidate.
//!
//! Also provided: the homogeneous solver for A x > 0 (spherical Voronoi
//! recognition) and a polynomial-time routine for instances with at most as
//! many constraints as variables, which are almost surely feasible.

use crate::lp::{
    d_extreme, lp_feasible_strict, maximize, Constraint, ExtremeResult, LpError, LpInstance,
    LpOutcome, StrictOutcome,
};
use crate::oracle::{OracleReply, QueryOracle};
use crate::rat::{self, pow2, Rat};
use crate::vecn::{self, QVec};
use nalgebra::{DMatrix, DVector};
use num::{BigInt, One, Signed, Zero};

/// Tunable exponents and budgets. Several quantities in the underlying
/// procedure shrink like 2^(-c*L) with L the instance bit size; the caps
/// below bound those exponents so that runs stay at desk scale and within
/// f64 ellipsoid resolution. Every cap is surfaced here and recorded in the
/// per-run report.
#[derive(Debug, Clone)]
pub struct FurthestConfig {
    pub max_iterations: usize,
    pub max_queries: usize,
    /// Iteration budget for the nested homogeneous solve at an extreme point.
    pub sub_max_iterations: usize,
    /// Required facet margin 2^(-min(10L, cap)) for a cell pair to count as
    /// adjacent.
    pub margin_exp_cap: i64,
    /// On-facet probe offsets 2^(-min(10L, cap)).
    pub offset_exp_cap: i64,
    /// Cross-facet perturbation component bound 2^(-min(2L, cap)).
    pub eps_exp_cap: i64,
    /// Support-ball radius 2^(-min(6L, cap)) around the extreme point.
    pub ball_exp_cap: i64,
    /// Stop once the ellipsoid's enclosing box side drops below
    /// 2^(-min(4L+4, cap)); the rounded center is then decided best-effort.
    pub stop_exp_cap: i64,
    /// Candidate coordinates are rounded to denominators <= 2^min(2L, cap).
    pub snap_denom_exp: u64,
    /// Half-width 2^cap of the box in which facet points are searched.
    pub probe_box_exp: i64,
    pub no_progress_limit: usize,
    pub pool_cap: usize,
    pub recognition_tol: f64,
}

impl Default for FurthestConfig {
    fn default() -> Self {
        FurthestConfig {
            max_iterations: 4000,
            max_queries: 50_000,
            sub_max_iterations: 800,
            margin_exp_cap: 24,
            offset_exp_cap: 12,
            eps_exp_cap: 14,
            ball_exp_cap: 8,
            stop_exp_cap: 36,
            snap_denom_exp: 24,
            probe_box_exp: 12,
            no_progress_limit: 40,
            pool_cap: 512,
            recognition_tol: 1e-6,
        }
    }
}

impl FurthestConfig {
    /// Configuration for the nested homogeneous solve. The nested oracle is
    /// read through a small ball around an extreme point, where replies
    /// carry noise on the order of the outer confirmation accuracy; probe
    /// displacements therefore must be coarser than the outer ones.
    fn sub_config(&self) -> FurthestConfig {
        FurthestConfig {
            max_iterations: self.sub_max_iterations,
            margin_exp_cap: 10,
            offset_exp_cap: 3,
            eps_exp_cap: 4,
            stop_exp_cap: 20,
            snap_denom_exp: 12,
            ..self.clone()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FurthestError {
    #[error("lp failure: {0}")]
    Lp(#[from] LpError),
    #[error("zero row {0} in input")]
    ZeroRow(usize),
    #[error("site recovery residual above tolerance")]
    NonRecoverable,
    #[error("recovered constraint system is degenerate")]
    DegenerateInput,
    #[error("query budget exhausted")]
    Budget,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// 2^(-min(mult*l, cap)) as an exact rational.
fn capped_pow2_neg(mult: u64, l: u64, cap: i64) -> Rat {
    let e = ((mult as i64).saturating_mul(l as i64)).min(cap);
    pow2(-e)
}

// ---------------------------------------------------------------------------
// Ellipsoid
// ---------------------------------------------------------------------------

/// E = { center + F u : |u| <= 1 } where `factor` is the square-root factor
/// F of the shape matrix P = F F^T. Storing the factor instead of P itself
/// keeps updates numerically stable even when the ellipsoid becomes very
/// anisotropic: the factor's condition number is the square root of P's.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub factor: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn ball(dim: usize, radius: f64) -> Self {
        assert!(dim >= 2, "ellipsoid dimension must be at least 2");
        Ellipsoid {
            center: DVector::zeros(dim),
            factor: DMatrix::identity(dim, dim) * radius,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Side length of the smallest axis-aligned box containing E along its
    /// widest axis: 2 * sqrt(max_k P_kk) with P_kk = |row_k F|^2.
    pub fn max_box_side(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.dim() {
            worst = worst.max(self.factor.row(k).norm_squared());
        }
        2.0 * worst.sqrt()
    }

    pub fn volume_proxy(&self) -> f64 {
        let d = self.factor.determinant();
        d * d
    }
}

#[derive(Debug)]
pub enum CutOutcome {
    Shrunk(Ellipsoid),
    /// The ellipsoid already lies inside the kept half-space.
    Unchanged,
    /// The kept half-space misses the ellipsoid entirely.
    Empty,
}

/// Minimal-volume ellipsoid containing { z in E : <normal, z> <= offset }
/// (central or deep cut depending on where the boundary passes).
pub fn ellipsoid_cut(e: &Ellipsoid, normal: &[f64], offset: f64) -> CutOutcome {
    let d = e.dim();
    assert_eq!(normal.len(), d, "cut dimension");
    let g = DVector::from_column_slice(normal);
    // v = F^T g, so g^T P g = |v|^2 computed without ever forming P.
    let v = e.factor.transpose() * &g;
    let gpg = v.norm_squared();
    if !(gpg > 1e-300) || !gpg.is_finite() {
        return CutOutcome::Unchanged;
    }
    let denom = gpg.sqrt();
    let alpha = (g.dot(&e.center) - offset) / denom;
    if !alpha.is_finite() {
        return CutOutcome::Unchanged;
    }
    let df = d as f64;
    if alpha >= 1.0 {
        return CutOutcome::Empty;
    }
    if alpha <= -1.0 / df {
        return CutOutcome::Unchanged;
    }
    let tau = (1.0 + df * alpha) / (df + 1.0);
    let sigma = 2.0 * (1.0 + df * alpha) / ((df + 1.0) * (1.0 + alpha));
    let delta = df * df / (df * df - 1.0) * (1.0 - alpha * alpha);
    // P' = delta (P - sigma b b^T) with b = P g / |v| factors exactly as
    // F' = sqrt(delta) (F - kappa (F vhat) vhat^T), kappa = 1 - sqrt(1-sigma).
    let vhat = &v / denom;
    let b = &e.factor * &vhat;
    let center = &e.center - &b * tau;
    let kappa = 1.0 - (1.0 - sigma).max(0.0).sqrt();
    let factor = (&e.factor - &b * vhat.transpose() * kappa) * delta.sqrt();
    if center.iter().any(|x| !x.is_finite()) || factor.iter().any(|x| !x.is_finite()) {
        return CutOutcome::Unchanged;
    }
    CutOutcome::Shrunk(Ellipsoid { center, factor })
}

// ---------------------------------------------------------------------------
// Cut pool
// ---------------------------------------------------------------------------

/// A half-space <normal, z> <= offset known to contain the hidden point.
#[derive(Debug, Clone)]
struct PoolCut {
    normal: Vec<f64>,
    offset: f64,
}

#[derive(Debug, Default)]
struct CutPool {
    /// (cut, permanent). Permanent cuts encode the prior (coordinate boxes)
    /// and are never evicted or dropped.
    cuts: Vec<(PoolCut, bool)>,
    cap: usize,
}

/// Cut depth of `cut` at the current ellipsoid, if well defined.
fn cut_depth(e: &Ellipsoid, cut: &PoolCut) -> Option<f64> {
    let g = DVector::from_column_slice(&cut.normal);
    let gpg = (e.factor.transpose() * &g).norm_squared();
    if !(gpg > 1e-300) || !gpg.is_finite() {
        return None;
    }
    let alpha = (g.dot(&e.center) - cut.offset) / gpg.sqrt();
    alpha.is_finite().then_some(alpha)
}

/// Applies `cut` with a small dimensionless slack: the plane is backed off
/// by SLACK * sqrt(g' P g) so that accumulated floating-point error across
/// thousands of cuts can never push the true point outside the ellipsoid.
/// The depth is also clamped just below 1 when rounding makes the kept
/// half-space miss the ellipsoid entirely (the cut is known valid, so the
/// miss is numerical).
fn apply_cut_clamped(e: &Ellipsoid, cut: &PoolCut, alpha: f64) -> Option<Ellipsoid> {
    const SLACK: f64 = 1e-5;
    let g = DVector::from_column_slice(&cut.normal);
    let gpg = (e.factor.transpose() * &g).norm_squared();
    if !(gpg > 1e-300) || !gpg.is_finite() {
        return None;
    }
    let width = gpg.sqrt();
    let depth = (alpha - SLACK).min(0.9);
    let offset = g.dot(&e.center) - depth * width;
    match ellipsoid_cut(e, &cut.normal, offset) {
        CutOutcome::Shrunk(next) => {
            #[cfg(test)]
            debug_check_containment(e, &next, cut, alpha, depth);
            Some(next)
        }
        _ => None,
    }
}

#[cfg(test)]
fn debug_mahalanobis(e: &Ellipsoid, z: &[f64]) -> f64 {
    // Solve F u = z - c; maha = |u|^2.
    let d = DVector::from_column_slice(z) - &e.center;
    match e.factor.clone().lu().solve(&d) {
        Some(u) => u.norm_squared(),
        None => f64::NAN,
    }
}

#[cfg(test)]
fn debug_check_containment(
    before: &Ellipsoid,
    after: &Ellipsoid,
    cut: &PoolCut,
    alpha: f64,
    depth: f64,
) {
    debug_hidden::POINT.with(|p| {
        if let Some(z) = p.borrow().as_ref() {
            if z.len() == before.dim() {
                let mb = debug_mahalanobis(before, z);
                let ma = debug_mahalanobis(after, z);
                assert!(
                    !((0.0..=1.0).contains(&mb) && ma.is_finite() && ma > 1.0 + 1e-6),
                    "hidden point evicted: maha {mb:.6} -> {ma:.6} \
                     alpha={alpha:.4e} depth={depth:.4e} normal={:?} offset={:.4e}",
                    cut.normal,
                    cut.offset
                );
            }
        }
    });
}

#[cfg(test)]
pub(crate) mod debug_hidden {
    use std::cell::RefCell;
    thread_local! {
        /// Normalized hidden point for cut-validity checking in tests.
        pub static POINT: RefCell<Option<Vec<f64>>> = const { RefCell::new(None) };
    }
}

#[cfg(test)]
fn debug_check_cut(cut: &PoolCut) {
    debug_hidden::POINT.with(|p| {
        if let Some(z) = p.borrow().as_ref() {
            if z.len() == cut.normal.len() {
                let lhs: f64 = cut.normal.iter().zip(z).map(|(g, v)| g * v).sum();
                let scale: f64 = cut.normal.iter().map(|g| g.abs()).sum::<f64>() + cut.offset.abs();
                assert!(
                    lhs <= cut.offset + 1e-6 * (1.0 + scale),
                    "invalid cut: g.z = {lhs:.6e} > offset {:.6e} (normal {:?})",
                    cut.offset,
                    cut.normal
                );
            }
        }
    });
}

impl CutPool {
    fn new(cap: usize) -> Self {
        CutPool { cuts: Vec::new(), cap }
    }

    fn push(&mut self, cut: PoolCut) {
        #[cfg(test)]
        debug_check_cut(&cut);
        let transient = self.cuts.iter().filter(|(_, p)| !p).count();
        if transient >= self.cap {
            if let Some(pos) = self.cuts.iter().position(|(_, p)| !p) {
                self.cuts.remove(pos);
            }
        }
        self.cuts.push((cut, false));
    }

    fn push_permanent(&mut self, cut: PoolCut) {
        self.cuts.push((cut, true));
    }

    /// Depth of the most violated pool cut at the current center, and its
    /// index.
    fn most_violated(&self, e: &Ellipsoid) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (idx, (cut, _)) in self.cuts.iter().enumerate() {
            if let Some(alpha) = cut_depth(e, cut) {
                if alpha > best.map(|(_, a)| a).unwrap_or(1e-9) {
                    best = Some((idx, alpha));
                }
            }
        }
        best
    }

    /// Records freshly learned cuts and applies the deepest one right away.
    /// Fresh cuts typically pass through the current center (the query point
    /// was derived from it), so they shrink the ellipsoid even at depth
    /// alpha ~ 0; the pool then re-applies them later once violated again.
    /// Returns true when the ellipsoid shrank.
    fn apply_fresh(&mut self, e: &mut Ellipsoid, cuts: Vec<PoolCut>) -> bool {
        let mut best: Option<(f64, PoolCut)> = None;
        for cut in cuts {
            if let Some(alpha) = cut_depth(e, &cut) {
                if best.as_ref().map(|(a, _)| alpha > *a).unwrap_or(true) {
                    best = Some((alpha, cut.clone()));
                }
            }
            self.push(cut);
        }
        if let Some((alpha, cut)) = best {
            if let Some(next) = apply_cut_clamped(e, &cut, alpha) {
                *e = next;
                return true;
            }
        }
        false
    }

    /// Applies the deepest violated pool cut, if any. Returns true when the
    /// ellipsoid shrank.
    fn apply_best(&mut self, e: &mut Ellipsoid) -> bool {
        if let Some((idx, alpha)) = self.most_violated(e) {
            let (cut, permanent) = self.cuts[idx].clone();
            match apply_cut_clamped(e, &cut, alpha) {
                Some(next) => {
                    *e = next;
                    return true;
                }
                None => {
                    if !permanent {
                        self.cuts.remove(idx);
                    }
                }
            }
        }
        false
    }
}

// ---------------------------------------------------------------------------
// Candidate snapping and cut construction
// ---------------------------------------------------------------------------

fn snap(xs: &[f64], denom: &BigInt) -> QVec {
    xs.iter()
        .map(|&x| {
            if !x.is_finite() {
                return Rat::zero();
            }
            match Rat::from_float(x) {
                Some(r) => rat::best_approx(&r, denom),
                None => Rat::zero(),
            }
        })
        .collect()
}

/// Z layout for the general solver: block i holds (a_i (n entries), b_i).
fn z_index(i: usize, j: usize, n: usize) -> usize {
    i * (n + 1) + j
}

/// Keep f_worse(q) - f_better(q) <= 0 where f_i(q) = Z_{b_i} - <Z_{a_i}, q>.
/// Valid for the hidden point whenever the oracle preferred `better` at q.
fn gcut_pair(m: usize, n: usize, q: &[Rat], better: usize, worse: usize) -> PoolCut {
    let mut normal = vec![0.0; m * (n + 1)];
    for (c, qc) in q.iter().enumerate() {
        let v = vecn::rat_to_f64(qc);
        normal[z_index(worse, c, n)] -= v;
        normal[z_index(better, c, n)] += v;
    }
    normal[z_index(worse, n, n)] += 1.0;
    normal[z_index(better, n, n)] -= 1.0;
    PoolCut { normal, offset: 0.0 }
}

/// Keep -f_better(q) <= 0: the replied constraint really is violated at q.
fn gcut_viol(m: usize, n: usize, q: &[Rat], better: usize) -> PoolCut {
    let mut normal = vec![0.0; m * (n + 1)];
    for (c, qc) in q.iter().enumerate() {
        normal[z_index(better, c, n)] += vecn::rat_to_f64(qc);
    }
    normal[z_index(better, n, n)] -= 1.0;
    PoolCut { normal, offset: 0.0 }
}

/// Rows of the hidden point are unit vectors, so <u, a_i> <= 1 for any unit
/// direction u. Linearized at the current center row when its norm exceeds 1.
fn gcut_norm(m: usize, n: usize, i: usize, row: &[f64]) -> Option<PoolCut> {
    let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 1.01) || !norm.is_finite() {
        return None;
    }
    let mut normal = vec![0.0; m * (n + 1)];
    for (c, v) in row.iter().enumerate() {
        normal[z_index(i, c, n)] = v / norm;
    }
    Some(PoolCut { normal, offset: 1.0 })
}

/// Homogeneous layout: block i holds a_i (n entries).
fn hcut_pair(m: usize, n: usize, q: &[Rat], better: usize, worse: usize) -> PoolCut {
    let mut normal = vec![0.0; m * n];
    for (c, qc) in q.iter().enumerate() {
        let v = vecn::rat_to_f64(qc);
        normal[better * n + c] += v;
        normal[worse * n + c] -= v;
    }
    PoolCut { normal, offset: 0.0 }
}

fn hcut_viol(m: usize, n: usize, q: &[Rat], better: usize) -> PoolCut {
    let mut normal = vec![0.0; m * n];
    for (c, qc) in q.iter().enumerate() {
        normal[better * n + c] += vecn::rat_to_f64(qc);
    }
    PoolCut { normal, offset: 0.0 }
}

/// Static prior cuts: each coordinate of a normalized row lies in [-1, 1]
/// and each normalized offset in [-b_bound, b_bound]. Seeded into the pool
/// so the ellipsoid cannot inflate along directions no reply constrains.
fn box_cuts_general(m: usize, n: usize, b_bound: f64) -> Vec<PoolCut> {
    let dim = m * (n + 1);
    let mut cuts = Vec::new();
    for i in 0..m {
        for c in 0..=n {
            let bound = if c == n { b_bound } else { 1.0 };
            for sign in [1.0, -1.0] {
                let mut normal = vec![0.0; dim];
                normal[z_index(i, c, n)] = sign;
                cuts.push(PoolCut { normal, offset: bound });
            }
        }
    }
    cuts
}

fn box_cuts_hom(m: usize, n: usize) -> Vec<PoolCut> {
    let dim = m * n;
    let mut cuts = Vec::new();
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut normal = vec![0.0; dim];
            normal[k] = sign;
            cuts.push(PoolCut { normal, offset: 1.0 });
        }
    }
    cuts
}

fn hcut_norm(m: usize, n: usize, i: usize, row: &[f64]) -> Option<PoolCut> {
    let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 1.01) || !norm.is_finite() {
        return None;
    }
    let mut normal = vec![0.0; m * n];
    for (c, v) in row.iter().enumerate() {
        normal[i * n + c] = v / norm;
    }
    Some(PoolCut { normal, offset: 1.0 })
}

// ---------------------------------------------------------------------------
// Generalized Voronoi cells
// ---------------------------------------------------------------------------

/// Cell i of the diagram induced by f_i(x) = b_i - <a_i, x>: the region
/// where constraint i is the furthest violated one (up to row scaling).
#[derive(Debug, Clone)]
pub struct VorCell {
    pub index: usize,
    /// Each entry (c, r) encodes the half-space { x : <c, x> <= r }, i.e.
    /// f_index(x) >= f_j(x) for one competitor j.
    pub inequalities: Vec<(QVec, Rat)>,
    pub empty: bool,
}

/// Builds the cells of the generalized diagram of (a, b). Cell i is
/// { x : b_i - <a_i,x> >= b_j - <a_j,x> for all j }; cells tile R^n and
/// cells that are nowhere maximal are flagged empty.
pub fn build_gvor(a: &[QVec], b: &[Rat]) -> Result<Vec<VorCell>, FurthestError> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(FurthestError::Dimension("rows of a and b must match".into()));
    }
    let n = a[0].len();
    let mut cells = Vec::with_capacity(m);
    for i in 0..m {
        let mut inequalities = Vec::new();
        for j in 0..m {
            if j == i {
                continue;
            }
            // f_i >= f_j  <=>  <a_i - a_j, x> <= b_i - b_j
            let coeffs = vecn::sub(&a[i], &a[j]);
            let rhs = &b[i] - &b[j];
            inequalities.push((coeffs, rhs));
        }
        let cons: Vec<Constraint> = inequalities
            .iter()
            .map(|(c, r)| Constraint::le(c.clone(), r.clone()))
            .collect();
        let empty = match maximize(&vecn::zeros(n), &cons)? {
            LpOutcome::Infeasible => true,
            _ => false,
        };
        cells.push(VorCell { index: i, inequalities, empty });
    }
    Ok(cells)
}

// ---------------------------------------------------------------------------
// Consistency check (facet probing)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeReply {
    Feasible,
    /// 1-based constraint index.
    Index(usize),
    /// The caller wants the check abandoned (used by nested runs).
    Stop,
}

/// A separating certificate: the oracle preferred `better` at `point` while
/// the candidate strictly prefers `worse` there. Both indices 0-based.
#[derive(Debug, Clone)]
pub struct SepCut {
    pub point: QVec,
    pub better: usize,
    pub worse: usize,
}

#[derive(Debug)]
pub enum SameVorOutcome {
    /// Every probe got the expected reply: the hidden diagram agrees with
    /// the candidate's on all probed facets.
    Confirmed,
    Separating(SepCut),
    /// A probe point satisfied the hidden system.
    FoundSolution(QVec),
    Stopped,
}

/// Exact basis of the hyperplane <normal, z> = 0 (n-1 vectors), mutually
/// orthogonalized and scaled to roughly unit length. For a zero normal the
/// first n-1 standard basis vectors are returned.
fn hyperplane_basis(normal: &[Rat]) -> Vec<QVec> {
    let n = normal.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut raw: Vec<QVec> = Vec::new();
    if vecn::is_zero(normal) {
        for k in 0..n - 1 {
            raw.push(vecn::unit(n, k));
        }
    } else {
        let pivot = (0..n)
            .max_by(|&p, &q| normal[p].abs().cmp(&normal[q].abs()))
            .unwrap();
        for k in 0..n {
            if k == pivot {
                continue;
            }
            let mut v = vecn::unit(n, k);
            v[pivot] = -&normal[k] / &normal[pivot];
            raw.push(v);
        }
    }
    // Gram-Schmidt (exact orthogonalization, approximate scaling). Linear
    // combinations stay exactly inside the hyperplane.
    let mut basis: Vec<QVec> = Vec::new();
    for mut v in raw {
        for u in &basis {
            let c = vecn::dot(&v, u) / vecn::norm_sq(u);
            v = vecn::sub(&v, &vecn::scale(u, &c));
        }
        if vecn::is_zero(&v) {
            continue;
        }
        // Scale to roughly unit norm with a small-denominator factor.
        let n2 = vecn::norm_sq(&v);
        let inv = rat::sqrt_approx(&(Rat::one() / &n2), 30);
        let s = rat::best_approx(&inv, &BigInt::from(1u64 << 20));
        if s.is_positive() {
            v = vecn::scale(&v, &s);
        }
        basis.push(v);
    }
    basis
}

/// Probes the facets of the candidate diagram against the oracle. For each
/// adjacent pair of nonempty cells (i, j) it finds a point on the shared
/// facet with a margin over every other cell, slides it to n-1 additional
/// facet points, and queries both sides of each; any unexpected reply is a
/// separating certificate.
pub fn same_vor(
    a: &[QVec],
    b: &[Rat],
    cells: &[VorCell],
    l: u64,
    cfg: &FurthestConfig,
    probes: &mut usize,
    probe: &mut dyn FnMut(&[Rat]) -> ProbeReply,
) -> Result<SameVorOutcome, FurthestError> {
    let m = a.len();
    let n = a[0].len();
    let live: Vec<usize> = cells.iter().filter(|c| !c.empty).map(|c| c.index).collect();
    let margin_req = capped_pow2_neg(10, l, cfg.margin_exp_cap);
    let offset = capped_pow2_neg(10, l, cfg.offset_exp_cap);
    let eps_bound = capped_pow2_neg(2, l, cfg.eps_exp_cap);
    let box_bound = pow2(cfg.probe_box_exp);

    let f = |i: usize, x: &[Rat]| -> Rat { &b[i] - vecn::dot(&a[i], x) };

    for (pi, &i) in live.iter().enumerate() {
        for &j in &live[pi + 1..] {
            let dir = vecn::sub(&a[i], &a[j]);
            let db = &b[i] - &b[j];
            if vecn::is_zero(&dir) {
                // Identical linear forms: either never tied (skip) or the
                // cells coincide and no probe can distinguish them.
                continue;
            }
            // Maximize t subject to f_i(y) = f_j(y), f_i(y) >= f_k(y) + t,
            // |y_c| <= B, t <= 1. Variables (y, t).
            let mut cons = Vec::new();
            let mut eq = dir.clone();
            eq.push(Rat::zero());
            cons.push(Constraint::eq(eq, db.clone()));
            for k in 0..m {
                if k == i || k == j {
                    continue;
                }
                let mut c = vecn::sub(&a[i], &a[k]);
                c.push(Rat::one());
                cons.push(Constraint::le(c, &b[i] - &b[k]));
            }
            for c_idx in 0..n {
                let mut up = vecn::zeros(n + 1);
                up[c_idx] = Rat::one();
                cons.push(Constraint::le(up, box_bound.clone()));
                let mut dn = vecn::zeros(n + 1);
                dn[c_idx] = -Rat::one();
                cons.push(Constraint::le(dn, box_bound.clone()));
            }
            let mut cap = vecn::zeros(n + 1);
            cap[n] = Rat::one();
            cons.push(Constraint::le(cap, Rat::one()));
            let mut obj = vecn::zeros(n + 1);
            obj[n] = Rat::one();
            let (y1, margin) = match maximize(&obj, &cons)? {
                LpOutcome::Optimal { x, value } if value > margin_req => {
                    (x[..n].to_vec(), value)
                }
                _ => continue, // not robustly adjacent
            };

            // Facet points: y1 plus offsets along the facet hyperplane.
            let mut points = vec![y1.clone()];
            for z in hyperplane_basis(&dir) {
                let mut delta = offset.clone();
                let mut ok = false;
                for _ in 0..40 {
                    let y = vecn::add(&y1, &vecn::scale(&z, &delta));
                    let fi = f(i, &y);
                    let good = (0..m)
                        .filter(|&k| k != i && k != j)
                        .all(|k| &fi - f(k, &y) > &margin / rat::int(2))
                        && fi == f(j, &y);
                    if good {
                        points.push(y);
                        ok = true;
                        break;
                    }
                    delta /= rat::int(2);
                }
                let _ = ok;
            }

            // Cross-facet perturbation along a_j - a_i increases f_i - f_j.
            let eps_dir = vecn::sub(&a[j], &a[i]);
            let max_comp = eps_dir
                .iter()
                .map(|v| v.abs())
                .max()
                .unwrap_or_else(Rat::zero);
            if !max_comp.is_positive() {
                continue;
            }
            let mut eta = &eps_bound / &max_comp;

            for y in &points {
                // Shrink eta until both probe points keep their strict
                // candidate-side ordering against every other cell.
                let mut eps = vecn::scale(&eps_dir, &eta);
                let mut valid = false;
                for _ in 0..60 {
                    let qp = vecn::add(y, &eps);
                    let qm = vecn::sub(y, &eps);
                    let ok_p = (0..m)
                        .filter(|&k| k != i)
                        .all(|k| f(i, &qp) > f(k, &qp));
                    let ok_m = (0..m)
                        .filter(|&k| k != j)
                        .all(|k| f(j, &qm) > f(k, &qm));
                    if ok_p && ok_m {
                        valid = true;
                        break;
                    }
                    eta /= rat::int(2);
                    eps = vecn::scale(&eps_dir, &eta);
                }
                if !valid {
                    continue;
                }
                let qp = vecn::add(y, &eps);
                let qm = vecn::sub(y, &eps);
                for (q, expected) in [(qp, i), (qm, j)] {
                    *probes += 1;
                    match probe(&q) {
                        ProbeReply::Feasible => {
                            return Ok(SameVorOutcome::FoundSolution(q));
                        }
                        ProbeReply::Stop => return Ok(SameVorOutcome::Stopped),
                        ProbeReply::Index(r1) => {
                            let r = r1 - 1;
                            if r != expected {
                                return Ok(SameVorOutcome::Separating(SepCut {
                                    point: q,
                                    better: r,
                                    worse: expected,
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SameVorOutcome::Confirmed)
}

// ---------------------------------------------------------------------------
// Non-degeneracy
// ---------------------------------------------------------------------------

fn det_rat(cols: &[QVec]) -> Rat {
    let n = cols.len();
    if n == 0 {
        return Rat::one();
    }
    debug_assert!(cols.iter().all(|c| c.len() == n));
    let mut m: Vec<QVec> = (0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return Rat::zero(),
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..n {
                let sub = &factor * &m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    det
}

fn rank_rat(rows: &[QVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut m: Vec<QVec> = rows.to_vec();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        if row >= m.len() {
            break;
        }
        let pivot = (row..m.len()).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => continue,
        };
        m.swap(pivot, row);
        let p = m[row][col].clone();
        for r in row + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..n {
                let sub = &factor * &m[row][c];
                m[r][c] -= sub;
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

fn for_each_subset(m: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for v in start..m {
            cur.push(v);
            if !rec(v + 1, m, k, cur, f) {
                return false;
            }
            cur.pop();
        }
        true
    }
    rec(0, m, k, &mut Vec::new(), f)
}

/// True iff no direction is spherically equidistant from more than n of the
/// normalized rows. Decided exactly: for every (n+1)-subset, the matrix of
/// pairwise differences of normalized rows must be nonsingular; its
/// determinant is a rational combination of square roots of the squared row
/// norms, tested for zero algebraically.
pub fn check_nondegenerate(rows: &[QVec]) -> Result<bool, FurthestError> {
    for (i, row) in rows.iter().enumerate() {
        if vecn::is_zero(row) {
            return Err(FurthestError::ZeroRow(i + 1));
        }
    }
    let m = rows.len();
    if m == 0 {
        return Ok(true);
    }
    let n = rows[0].len();
    if m <= n {
        return Ok(true);
    }
    let norms: Vec<Rat> = rows.iter().map(|r| vecn::norm_sq(r)).collect();
    let ok = for_each_subset(m, n + 1, &mut |subset: &[usize]| {
        // D * prod sqrt(N) = det(a_{s1}..a_{sn}) sqrt(N_{s0})
        //                    - sum_k det(.. a_{s0} at slot k ..) sqrt(N_{sk})
        let s0 = subset[0];
        let rest = &subset[1..];
        let main_cols: Vec<QVec> = rest.iter().map(|&s| rows[s].clone()).collect();
        let mut terms: Vec<(Rat, Rat)> = vec![(det_rat(&main_cols), norms[s0].clone())];
        for (k, &sk) in rest.iter().enumerate() {
            let mut cols = main_cols.clone();
            cols[k] = rows[s0].clone();
            terms.push((-det_rat(&cols), norms[sk].clone()));
        }
        // Degenerate subset found => stop with false.
        !rat::sqrt_combination_is_zero(&terms)
    });
    Ok(ok)
}

// ---------------------------------------------------------------------------
// Site recognition (homogeneous diagrams)
// ---------------------------------------------------------------------------

/// Recovers unit-norm sites generating the confirmed homogeneous diagram of
/// the candidate rows. Facets of the diagram between adjacent cells i, j
/// have normals parallel to a_i - a_j; the recovered sites must reproduce
/// every such facet with the correct orientation while sitting on the unit
/// sphere. Solved by a damped Gauss-Newton iteration initialized at the
/// normalized candidate rows.
pub fn recognize_sites(rows: &[QVec], cfg: &FurthestConfig) -> Result<Vec<Vec<f64>>, FurthestError> {
    let m = rows.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let n = rows[0].len();
    let rows_f: Vec<Vec<f64>> = rows.iter().map(|r| vecn::to_f64(r)).collect();
    let mut init: Vec<Vec<f64>> = Vec::with_capacity(m);
    for r in &rows_f {
        let norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(FurthestError::NonRecoverable);
        }
        init.push(r.iter().map(|v| v / norm).collect());
    }

    // Adjacent pairs of the homogeneous diagram with their facet normals.
    let b0 = vec![Rat::zero(); m];
    let cells = build_gvor(rows, &b0)?;
    let live: Vec<usize> = cells.iter().filter(|c| !c.empty).map(|c| c.index).collect();
    let l_local = rows.iter().flatten().map(rat::bit_size).sum::<u64>().max(1);
    let margin_req = capped_pow2_neg(10, l_local, cfg.margin_exp_cap);
    let box_bound = pow2(cfg.probe_box_exp);
    let mut pairs: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (pi, &i) in live.iter().enumerate() {
        for &j in &live[pi + 1..] {
            let dir = vecn::sub(&rows[i], &rows[j]);
            if vecn::is_zero(&dir) {
                continue;
            }
            // Adjacency: a tied point with a margin over every other cell.
            let mut cons = Vec::new();
            let mut eq = dir.clone();
            eq.push(Rat::zero());
            cons.push(Constraint::eq(eq, Rat::zero()));
            for k in 0..m {
                if k == i || k == j {
                    continue;
                }
                let mut c = vecn::sub(&rows[i], &rows[k]);
                c.push(Rat::one());
                cons.push(Constraint::le(c, Rat::zero()));
            }
            for c_idx in 0..n {
                let mut up = vecn::zeros(n + 1);
                up[c_idx] = Rat::one();
                cons.push(Constraint::le(up, box_bound.clone()));
                let mut dn = vecn::zeros(n + 1);
                dn[c_idx] = -Rat::one();
                cons.push(Constraint::le(dn, box_bound.clone()));
            }
            let mut cap = vecn::zeros(n + 1);
            cap[n] = Rat::one();
            cons.push(Constraint::le(cap, Rat::one()));
            let mut obj = vecn::zeros(n + 1);
            obj[n] = Rat::one();
            if let LpOutcome::Optimal { value, .. } = maximize(&obj, &cons)? {
                if value > margin_req {
                    let df = vecn::to_f64(&dir);
                    let norm: f64 = df.iter().map(|v| v * v).sum::<f64>().sqrt();
                    pairs.push((i, j, df.iter().map(|v| v / norm).collect()));
                }
            }
        }
    }

    if pairs.is_empty() {
        // Nothing constrains the sites beyond unit norm; the normalized
        // candidate rows are the natural representatives.
        return Ok(init);
    }

    // Residuals: per pair, the component of (s_i - s_j) orthogonal to the
    // facet normal (n entries); per site, ||s_i||^2 - 1.
    let nvars = m * n;
    let nres = pairs.len() * n + m;
    let mut x = DVector::from_iterator(nvars, init.iter().flatten().cloned());
    let mut final_res = f64::INFINITY;
    for _ in 0..200 {
        let mut r = DVector::zeros(nres);
        let mut jac = DMatrix::zeros(nres, nvars);
        let mut row = 0;
        for (i, j, nu) in &pairs {
            for c in 0..n {
                let mut w = 0.0;
                for k in 0..n {
                    let diff = x[i * n + k] - x[j * n + k];
                    let p = if c == k { 1.0 } else { 0.0 } - nu[c] * nu[k];
                    w += p * diff;
                    jac[(row, i * n + k)] = p;
                    jac[(row, j * n + k)] = -p;
                }
                r[row] = w;
                row += 1;
            }
        }
        for i in 0..m {
            let mut nrm = 0.0;
            for k in 0..n {
                nrm += x[i * n + k] * x[i * n + k];
                jac[(row, i * n + k)] = 2.0 * x[i * n + k];
            }
            r[row] = nrm - 1.0;
            row += 1;
        }
        final_res = r.amax();
        if final_res < 1e-13 {
            break;
        }
        let jt = jac.transpose();
        let mut lhs = &jt * &jac;
        for d in 0..nvars {
            lhs[(d, d)] += 1e-10;
        }
        let rhs = &jt * &r;
        match lhs.lu().solve(&rhs) {
            Some(step) => x -= step,
            None => return Err(FurthestError::NonRecoverable),
        }
    }
    if !(final_res < cfg.recognition_tol) {
        return Err(FurthestError::NonRecoverable);
    }
    // Orientation: cell i lies where <a_i - a_j, x> <= 0, so the recovered
    // difference must keep a nonnegative component along the facet normal.
    for (i, j, nu) in &pairs {
        let mut along = 0.0;
        for k in 0..n {
            along += (x[i * n + k] - x[j * n + k]) * nu[k];
        }
        if along < -1e-6 {
            return Err(FurthestError::NonRecoverable);
        }
    }
    Ok((0..m).map(|i| (0..n).map(|k| x[i * n + k]).collect()).collect())
}

// ---------------------------------------------------------------------------
// Homogeneous solver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomReply {
    Feasible,
    /// 1-based constraint index.
    Index(usize),
    Stop,
}

/// How the oracle behind a homogeneous solve replies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomMode {
    /// Replies name a violated constraint and feasible queries are
    /// acknowledged; answers can confirm a solution directly.
    Restricted,
    /// Replies always name the cell of the query point and never confirm
    /// feasibility (the view seen through a ball around an extreme point);
    /// decisions come from diagram recognition alone.
    Unrestricted,
}

#[derive(Debug)]
pub enum HomOutcome {
    Solution(QVec),
    Infeasible,
    /// The oracle asked to stop (nested runs record why on their side).
    Stopped,
    Nonconformant { feasible_guess: Option<QVec> },
}

#[derive(Debug, Default, Clone)]
pub struct HomStats {
    pub iterations: usize,
    pub queries: usize,
    pub samevor_probes: usize,
}

/// Decides A x > 0 for a hidden matrix with unit-norm rows behind a
/// furthest-violation oracle. The candidate matrix lives in R^{mn}; when it
/// is infeasible, its spherical diagram is checked for consistency against
/// the oracle and, once confirmed, the generating sites are recovered and
/// the recovered system decided exactly.
pub fn solve_homogeneous(
    m: usize,
    n: usize,
    l: u64,
    mode: HomMode,
    cfg: &FurthestConfig,
    query: &mut dyn FnMut(&[Rat]) -> HomReply,
) -> Result<(HomOutcome, HomStats), FurthestError> {
    if m == 0 || n == 0 {
        return Err(FurthestError::Dimension("m and n must be positive".into()));
    }
    let dim = m * n;
    if dim < 2 {
        return Err(FurthestError::Dimension("need m*n >= 2".into()));
    }
    let mut ell = Ellipsoid::ball(dim, 2.0 * (dim as f64).sqrt());
    let mut pool = CutPool::new(cfg.pool_cap);
    for cut in box_cuts_hom(m, n) {
        pool.push_permanent(cut);
    }
    let mut stats = HomStats::default();
    let denom = BigInt::from(1u8) << cfg.snap_denom_exp.min(2 * l).max(4) as usize;
    let stop_eps = {
        let e = (4 * l as i64 + 4).min(cfg.stop_exp_cap);
        (2f64).powi(-(e as i32))
    };
    let mut no_progress = 0usize;
    let b0 = vec![Rat::zero(); m];

    while stats.iterations < cfg.max_iterations {
        stats.iterations += 1;
        let mut applied = 0;
        while applied < 100 && pool.apply_best(&mut ell) {
            applied += 1;
        }
        let stop_now = ell.max_box_side() < stop_eps;

        // Snap the center to a bounded-denominator candidate; nudge zero
        // rows so the diagram is well formed.
        let center: Vec<f64> = ell.center.iter().cloned().collect();
        let mut rows: Vec<QVec> = (0..m)
            .map(|i| snap(&center[i * n..(i + 1) * n], &denom))
            .collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if vecn::is_zero(row) {
                row[i % n] = pow2(-8);
            }
        }

        if mode == HomMode::Restricted {
            let strict_rows: Vec<(QVec, Rat)> =
                rows.iter().map(|r| (r.clone(), Rat::zero())).collect();
            if let StrictOutcome::Feasible(w) = lp_feasible_strict(&strict_rows)? {
                stats.queries += 1;
                match query(&w) {
                    HomReply::Feasible => return Ok((HomOutcome::Solution(w), stats)),
                    HomReply::Stop => return Ok((HomOutcome::Stopped, stats)),
                    HomReply::Index(r1) => {
                        let r = r1 - 1;
                        let mut cuts = vec![hcut_viol(m, n, &w, r)];
                        for j in 0..m {
                            if j != r {
                                cuts.push(hcut_pair(m, n, &w, r, j));
                            }
                        }
                        for i in 0..m {
                            if let Some(c) = hcut_norm(m, n, i, &center[i * n..(i + 1) * n]) {
                                cuts.push(c);
                            }
                        }
                        if pool.apply_fresh(&mut ell, cuts) {
                            no_progress = 0;
                        } else {
                            no_progress += 1;
                        }
                        if stop_now || no_progress > cfg.no_progress_limit {
                            return Ok((HomOutcome::Nonconformant { feasible_guess: None }, stats));
                        }
                        continue;
                    }
                }
            }
        }

        // Diagram route.
        let cells = build_gvor(&rows, &b0)?;
        let sv = {
            let queries = &mut stats.queries;
            let mut probe = |q: &[Rat]| -> ProbeReply {
                *queries += 1;
                match query(q) {
                    HomReply::Feasible => ProbeReply::Feasible,
                    HomReply::Index(i) => ProbeReply::Index(i),
                    HomReply::Stop => ProbeReply::Stop,
                }
            };
            same_vor(&rows, &b0, &cells, l, cfg, &mut stats.samevor_probes, &mut probe)?
        };
        match sv {
            SameVorOutcome::FoundSolution(q) => return Ok((HomOutcome::Solution(q), stats)),
            SameVorOutcome::Stopped => return Ok((HomOutcome::Stopped, stats)),
            SameVorOutcome::Separating(sep) => {
                let mut cuts = vec![hcut_pair(m, n, &sep.point, sep.better, sep.worse)];
                for i in 0..m {
                    if let Some(c) = hcut_norm(m, n, i, &center[i * n..(i + 1) * n]) {
                        cuts.push(c);
                    }
                }
                if pool.apply_fresh(&mut ell, cuts) {
                    no_progress = 0;
                } else {
                    no_progress += 1;
                }
            }
            SameVorOutcome::Confirmed => {
                match recognize_sites(&rows, cfg) {
                    Err(FurthestError::NonRecoverable) => {
                        no_progress += 1;
                    }
                    Err(e) => return Err(e),
                    Ok(sites) => {
                        let site_denom = BigInt::from(1u64) << 20;
                        let rounded: Vec<QVec> = sites
                            .iter()
                            .map(|s| snap(s, &site_denom))
                            .collect();
                        if rounded.iter().any(|r| vecn::is_zero(r)) {
                            no_progress += 1;
                        } else if !check_nondegenerate(&rounded)? {
                            match mode {
                                // Top level: the hidden input itself is
                                // degenerate and out of scope.
                                HomMode::Restricted => {
                                    return Err(FurthestError::DegenerateInput)
                                }
                                // Nested level: noisy localization can
                                // collapse recovered sites; keep refining.
                                HomMode::Unrestricted => no_progress += 1,
                            }
                        } else {
                            let strict_rows: Vec<(QVec, Rat)> =
                                rounded.iter().map(|r| (r.clone(), Rat::zero())).collect();
                            match lp_feasible_strict(&strict_rows)? {
                                StrictOutcome::Infeasible => {
                                    return Ok((HomOutcome::Infeasible, stats));
                                }
                                StrictOutcome::Feasible(w) => match mode {
                                    HomMode::Unrestricted => {
                                        return Ok((HomOutcome::Solution(w), stats));
                                    }
                                    HomMode::Restricted => {
                                        stats.queries += 1;
                                        match query(&w) {
                                            HomReply::Feasible => {
                                                return Ok((HomOutcome::Solution(w), stats));
                                            }
                                            HomReply::Stop => {
                                                return Ok((HomOutcome::Stopped, stats));
                                            }
                                            HomReply::Index(r1) => {
                                                let r = r1 - 1;
                                                let mut cuts = vec![hcut_viol(m, n, &w, r)];
                                                for j in 0..m {
                                                    if j != r {
                                                        cuts.push(hcut_pair(m, n, &w, r, j));
                                                    }
                                                }
                                                if pool.apply_fresh(&mut ell, cuts) {
                                                    no_progress = 0;
                                                } else {
                                                    no_progress += 1;
                                                }
                                            }
                                        }
                                    }
                                },
                            }
                        }
                    }
                }
            }
        }
        if stop_now || no_progress > cfg.no_progress_limit {
            return Ok((HomOutcome::Nonconformant { feasible_guess: None }, stats));
        }
    }
    Ok((HomOutcome::Nonconformant { feasible_guess: None }, stats))
}

// ---------------------------------------------------------------------------
// General solver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum FurthestOutcome {
    Solution(QVec),
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The outcome was confirmed through the oracle (a feasible reply, or an
    /// infeasibility certificate reached through the support-system route).
    Verified,
    /// Budgets or precision ran out; the outcome is the exact feasibility of
    /// the best candidate instance, reported best-effort.
    Nonconformant,
}

#[derive(Debug, Clone)]
pub struct FurthestReport {
    pub ellipsoid_iterations: usize,
    pub samevor_probes: usize,
    pub queries: usize,
    pub status: SolveStatus,
}

enum SubEvent {
    GlobalFeasible(QVec),
    Outer { point: QVec, reply: usize },
}

/// Decides the hidden system A x > b behind a furthest-violation oracle.
/// Instances with m <= n are dispatched to `solve_small_m`.
pub fn solve_furthest(
    oracle: &mut dyn QueryOracle,
    cfg: &FurthestConfig,
) -> Result<(FurthestOutcome, FurthestReport), FurthestError> {
    let (m, n, l) = (oracle.m(), oracle.n(), oracle.l());
    if m == 0 || n == 0 {
        return Err(FurthestError::Dimension("m and n must be positive".into()));
    }
    if m <= n {
        return solve_small_m(oracle, cfg);
    }
    let dim = m * (n + 1);
    let radius = (1.0 + (2f64).powi(l.min(16) as i32)) * (dim as f64).sqrt();
    let mut ell = Ellipsoid::ball(dim, radius);
    let mut pool = CutPool::new(cfg.pool_cap);
    for cut in box_cuts_general(m, n, (2f64).powi((2 * l).min(16) as i32)) {
        pool.push_permanent(cut);
    }
    let start_queries = oracle.queries();
    let mut iterations = 0usize;
    let mut samevor_probes = 0usize;
    let mut no_progress = 0usize;
    let denom = BigInt::from(1u8) << cfg.snap_denom_exp.min(2 * l).max(4) as usize;
    let stop_eps = {
        let e = (4 * l as i64 + 4).min(cfg.stop_exp_cap);
        (2f64).powi(-(e as i32))
    };
    let eps_star_cap = capped_pow2_neg(6, l, cfg.ball_exp_cap);

    let report = |iterations: usize, probes: usize, q: usize, status: SolveStatus| FurthestReport {
        ellipsoid_iterations: iterations,
        samevor_probes: probes,
        queries: q,
        status,
    };

    while iterations < cfg.max_iterations {
        iterations += 1;
        if oracle.queries() - start_queries > cfg.max_queries {
            return Err(FurthestError::Budget);
        }
        let mut applied = 0;
        while applied < 100 && pool.apply_best(&mut ell) {
            applied += 1;
        }

        let center: Vec<f64> = ell.center.iter().cloned().collect();
        let mut a_rows: Vec<QVec> = (0..m)
            .map(|i| snap(&center[i * (n + 1)..i * (n + 1) + n], &denom))
            .collect();
        for (i, row) in a_rows.iter_mut().enumerate() {
            if vecn::is_zero(row) {
                row[i % n] = pow2(-8);
            }
        }
        let b_vec: QVec = (0..m)
            .map(|i| snap(&center[i * (n + 1) + n..(i + 1) * (n + 1)], &denom)[0].clone())
            .collect();
        let inst = LpInstance::new(a_rows.clone(), b_vec.clone());
        let stop_now = ell.max_box_side() < stop_eps;
        let give_up = no_progress > cfg.no_progress_limit;

        if stop_now || give_up {
            // Best-effort: decide the rounded candidate exactly and confirm
            // what the oracle allows.
            return match lp_feasible_strict(&inst.rows())? {
                StrictOutcome::Feasible(w) => match oracle.query(&w) {
                    OracleReply::Feasible => Ok((
                        FurthestOutcome::Solution(w),
                        report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                    )),
                    OracleReply::ViolatedIndex(_) => Ok((
                        FurthestOutcome::Solution(w),
                        report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Nonconformant),
                    )),
                },
                StrictOutcome::Infeasible => {
                    // A lucky feasible reply at the extreme point still
                    // rescues the run; otherwise an unverified infeasibility
                    // claim is all that is left.
                    if let ExtremeResult::Finite { p, .. } = d_extreme(&inst, false)? {
                        if let OracleReply::Feasible = oracle.query(&p) {
                            return Ok((
                                FurthestOutcome::Solution(p),
                                report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                            ));
                        }
                    }
                    Ok((
                        FurthestOutcome::Infeasible,
                        report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Nonconformant),
                    ))
                }
            };
        }

        match lp_feasible_strict(&inst.rows())? {
            StrictOutcome::Feasible(w) => {
                match oracle.query(&w) {
                    OracleReply::Feasible => {
                        return Ok((
                            FurthestOutcome::Solution(w),
                            report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                        ));
                    }
                    OracleReply::ViolatedIndex(r1) => {
                        let r = r1 - 1;
                        let mut cuts = vec![gcut_viol(m, n, &w, r)];
                        for j in 0..m {
                            if j != r {
                                cuts.push(gcut_pair(m, n, &w, r, j));
                            }
                        }
                        for i in 0..m {
                            if let Some(c) =
                                gcut_norm(m, n, i, &center[i * (n + 1)..i * (n + 1) + n])
                            {
                                cuts.push(c);
                            }
                        }
                        if pool.apply_fresh(&mut ell, cuts) {
                            no_progress = 0;
                        } else {
                            no_progress += 1;
                        }
                    }
                }
                continue;
            }
            StrictOutcome::Infeasible => {}
        }

        // Candidate infeasible: compare diagrams.
        let cells = build_gvor(&a_rows, &b_vec)?;
        let sv = {
            let probes = &mut samevor_probes;
            let mut probe = |q: &[Rat]| -> ProbeReply {
                match oracle.query(q) {
                    OracleReply::Feasible => ProbeReply::Feasible,
                    OracleReply::ViolatedIndex(i) => ProbeReply::Index(i),
                }
            };
            same_vor(&a_rows, &b_vec, &cells, l, cfg, probes, &mut probe)?
        };
        match sv {
            SameVorOutcome::FoundSolution(q) => {
                return Ok((
                    FurthestOutcome::Solution(q),
                    report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                ));
            }
            SameVorOutcome::Stopped => unreachable!("top-level probes never stop"),
            SameVorOutcome::Separating(sep) => {
                // The reply names a violated constraint, so both the pair
                // ordering and the violation itself are valid cuts.
                let mut cuts = vec![
                    gcut_pair(m, n, &sep.point, sep.better, sep.worse),
                    gcut_viol(m, n, &sep.point, sep.better),
                ];
                for i in 0..m {
                    if let Some(c) = gcut_norm(m, n, i, &center[i * (n + 1)..i * (n + 1) + n]) {
                        cuts.push(c);
                    }
                }
                if pool.apply_fresh(&mut ell, cuts) {
                    no_progress = 0;
                } else {
                    no_progress += 1;
                }
                continue;
            }
            SameVorOutcome::Confirmed => {}
        }

        // Diagrams agree on every probed facet: route the decision through
        // an extreme point of the candidate.
        let (d_val, p, support) = match d_extreme(&inst, false)? {
            ExtremeResult::Finite { d, p, support } => (d, p, support),
            ExtremeResult::NegInfinity => {
                no_progress += 1;
                continue;
            }
        };
        match oracle.query(&p) {
            OracleReply::Feasible => {
                return Ok((
                    FurthestOutcome::Solution(p),
                    report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                ));
            }
            OracleReply::ViolatedIndex(r1) => {
                let r = r1 - 1;
                if !support.contains(&r) {
                    // The candidate strictly prefers every support index at p.
                    let cuts = vec![gcut_pair(m, n, &p, r, support[0])];
                    if pool.apply_fresh(&mut ell, cuts) {
                        no_progress = 0;
                    } else {
                        no_progress += 1;
                    }
                    continue;
                }
                if support.len() < 2 {
                    no_progress += 1;
                    continue;
                }
                // Support-system route: restrict queries to a small ball
                // around p, where the oracle's replies describe the
                // homogeneous system { <a_s, z> > 0 : s in support }.
                let mut gap: Option<Rat> = None;
                for i in 0..m {
                    if support.contains(&i) {
                        continue;
                    }
                    let g = &d_val - (&b_vec[i] - vecn::dot(&a_rows[i], &p));
                    gap = Some(match gap {
                        None => g,
                        Some(cur) => cur.min(g),
                    });
                }
                let mut eps_star = eps_star_cap.clone();
                if let Some(g) = gap {
                    if !g.is_positive() {
                        no_progress += 1;
                        continue;
                    }
                    eps_star = eps_star.min(g / rat::int(4));
                }
                // Pre-probe the ball along +-e_k. The localized view only
                // matches the homogeneous support system when the hidden
                // distances of the support rows are equal at p; a constant
                // reply means one row still dominates, which is itself a
                // set of valid pairwise cuts at p.
                let half = &eps_star / rat::int(2);
                let mut pre_replies: Vec<usize> = Vec::new();
                let mut pre_event: Option<SubEvent> = None;
                'pre: for k in 0..n {
                    for sign in [1i64, -1] {
                        let mut x = p.clone();
                        x[k] += &half * rat::int(sign);
                        match oracle.query(&x) {
                            OracleReply::Feasible => {
                                return Ok((
                                    FurthestOutcome::Solution(x),
                                    report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                                ));
                            }
                            OracleReply::ViolatedIndex(q1) => {
                                let qr = q1 - 1;
                                if support.contains(&qr) {
                                    pre_replies.push(qr);
                                } else {
                                    pre_event = Some(SubEvent::Outer { point: x, reply: qr });
                                    break 'pre;
                                }
                            }
                        }
                    }
                }
                if let Some(SubEvent::Outer { point, reply }) = pre_event {
                    let fr = &b_vec[reply] - vecn::dot(&a_rows[reply], &point);
                    let mut cuts = Vec::new();
                    for &s in &support {
                        if (&b_vec[s] - vecn::dot(&a_rows[s], &point)) > fr {
                            cuts.push(gcut_pair(m, n, &point, reply, s));
                        }
                    }
                    if pool.apply_fresh(&mut ell, cuts) {
                        no_progress = 0;
                    } else {
                        no_progress += 1;
                    }
                    continue;
                }
                if !pre_replies.is_empty() && pre_replies.iter().all(|&r| r == pre_replies[0]) {
                    let dominant = pre_replies[0];
                    let cuts: Vec<PoolCut> = support
                        .iter()
                        .filter(|&&s| s != dominant)
                        .map(|&s| gcut_pair(m, n, &p, dominant, s))
                        .collect();
                    if pool.apply_fresh(&mut ell, cuts) {
                        no_progress = 0;
                    } else {
                        no_progress += 1;
                    }
                    continue;
                }

                let mut event: Option<SubEvent> = None;
                let sub_result = {
                    let event_ref = &mut event;
                    let support_ref = &support;
                    let p_ref = &p;
                    let mut sub_query = |z: &[Rat]| -> HomReply {
                        let norm1: Rat =
                            z.iter().map(|v| v.abs()).fold(Rat::zero(), |acc, v| acc + v);
                        let scale = &eps_star / (Rat::one() + norm1);
                        let x = vecn::add(p_ref, &vecn::scale(z, &scale));
                        match oracle.query(&x) {
                            OracleReply::Feasible => {
                                *event_ref = Some(SubEvent::GlobalFeasible(x));
                                HomReply::Stop
                            }
                            OracleReply::ViolatedIndex(r1) => {
                                let r = r1 - 1;
                                match support_ref.iter().position(|&s| s == r) {
                                    Some(pos) => HomReply::Index(pos + 1),
                                    None => {
                                        *event_ref = Some(SubEvent::Outer { point: x, reply: r });
                                        HomReply::Stop
                                    }
                                }
                            }
                        }
                    };
                    solve_homogeneous(
                        support.len(),
                        n,
                        l,
                        HomMode::Unrestricted,
                        &cfg.sub_config(),
                        &mut sub_query,
                    )?
                };
                let (sub_outcome, sub_stats) = sub_result;
                samevor_probes += sub_stats.samevor_probes;
                match sub_outcome {
                    HomOutcome::Infeasible => {
                        // The support system of the hidden instance is
                        // infeasible, hence so is the hidden instance.
                        return Ok((
                            FurthestOutcome::Infeasible,
                            report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                        ));
                    }
                    HomOutcome::Solution(w) => {
                        // The hidden support system is feasible while the
                        // candidate's is not; some support row of the
                        // candidate has <a'_s, w> <= 0, and the hidden row
                        // satisfies <a_s, w> > 0.
                        let worst = support
                            .iter()
                            .copied()
                            .min_by(|&x, &y| {
                                vecn::dot(&a_rows[x], &w).cmp(&vecn::dot(&a_rows[y], &w))
                            })
                            .unwrap();
                        let mut normal = vec![0.0; dim];
                        for (c, wc) in w.iter().enumerate() {
                            normal[z_index(worst, c, n)] = -vecn::rat_to_f64(wc);
                        }
                        if pool.apply_fresh(&mut ell, vec![PoolCut { normal, offset: 0.0 }]) {
                            no_progress = 0;
                        } else {
                            no_progress += 1;
                        }
                    }
                    HomOutcome::Stopped => match event {
                        Some(SubEvent::GlobalFeasible(x)) => {
                            return Ok((
                                FurthestOutcome::Solution(x),
                                report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Verified),
                            ));
                        }
                        Some(SubEvent::Outer { point, reply }) => {
                            // Candidate argmax at the probe point.
                            let e_best = (0..m)
                                .max_by(|&x, &y| {
                                    (&b_vec[x] - vecn::dot(&a_rows[x], &point))
                                        .cmp(&(&b_vec[y] - vecn::dot(&a_rows[y], &point)))
                                })
                                .unwrap();
                            let fe = &b_vec[e_best] - vecn::dot(&a_rows[e_best], &point);
                            let fr = &b_vec[reply] - vecn::dot(&a_rows[reply], &point);
                            let mut cuts = Vec::new();
                            if fe > fr {
                                cuts.push(gcut_pair(m, n, &point, reply, e_best));
                            }
                            if pool.apply_fresh(&mut ell, cuts) {
                                no_progress = 0;
                            } else {
                                no_progress += 1;
                            }
                        }
                        None => no_progress += 1,
                    },
                    HomOutcome::Nonconformant { .. } => {
                        no_progress += 1;
                    }
                }
            }
        }
    }
    // Iteration budget exhausted: best-effort decision on the last candidate.
    let center: Vec<f64> = ell.center.iter().cloned().collect();
    let a_rows: Vec<QVec> = (0..m)
        .map(|i| snap(&center[i * (n + 1)..i * (n + 1) + n], &denom))
        .collect();
    let b_vec: QVec = (0..m)
        .map(|i| snap(&center[i * (n + 1) + n..(i + 1) * (n + 1)], &denom)[0].clone())
        .collect();
    let inst = LpInstance::new(a_rows, b_vec);
    let outcome = match lp_feasible_strict(&inst.rows())? {
        StrictOutcome::Feasible(w) => FurthestOutcome::Solution(w),
        StrictOutcome::Infeasible => FurthestOutcome::Infeasible,
    };
    Ok((
        outcome,
        report(iterations, samevor_probes, oracle.queries() - start_queries, SolveStatus::Nonconformant),
    ))
}

// ---------------------------------------------------------------------------
// Few constraints (m <= n)
// ---------------------------------------------------------------------------

/// Perturbs the rows to a full-rank matrix, changing each entry by at most
/// `eps` times the row scale. The perturbation pattern rotates with `seed`
/// so that repeated calls explore different directions.
fn full_rank_perturb(rows: &[QVec], eps: &Rat, seed: usize) -> Vec<QVec> {
    let m = rows.len();
    let n = rows[0].len();
    let mut out = rows.to_vec();
    for attempt in 0..n {
        if rank_rat(&out) == m {
            return out;
        }
        out = rows.to_vec();
        for (i, row) in out.iter_mut().enumerate() {
            let scale = row
                .iter()
                .map(|v| v.abs())
                .max()
                .unwrap_or_else(Rat::zero)
                .max(Rat::one());
            let col = (i + seed + attempt) % n;
            row[col] += eps * &scale;
        }
    }
    out
}

/// Solves A x = rhs for full-row-rank A (m <= n), free variables set to 0.
fn solve_exact_system(a: &[QVec], rhs: &[Rat]) -> Option<QVec> {
    let m = a.len();
    let n = a[0].len();
    let mut mat: Vec<QVec> = a
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut v = row.clone();
            v.push(r.clone());
            v
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row >= m {
            break;
        }
        let p = (row..m).find(|&r| !mat[r][col].is_zero());
        let p = match p {
            Some(p) => p,
            None => continue,
        };
        mat.swap(p, row);
        let pv = mat[row][col].clone();
        for r in 0..m {
            if r == row || mat[r][col].is_zero() {
                continue;
            }
            let factor = &mat[r][col] / &pv;
            for c in col..=n {
                let sub = &factor * &mat[row][c];
                mat[r][c] -= sub;
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    if row < m {
        // Rank-deficient: consistent only if the remaining rhs vanished.
        for r in row..m {
            if !mat[r][n].is_zero() {
                return None;
            }
        }
    }
    let mut x = vecn::zeros(n);
    for (r, c) in pivots {
        x[c] = &mat[r][n] / &mat[r][c];
    }
    Some(x)
}

/// Solver for m <= n: such systems are almost surely feasible, and an
/// infeasible candidate center can always be perturbed to a nearby
/// full-rank (hence feasible) system whose solution is worth querying.
pub fn solve_small_m(
    oracle: &mut dyn QueryOracle,
    cfg: &FurthestConfig,
) -> Result<(FurthestOutcome, FurthestReport), FurthestError> {
    let (m, n, l) = (oracle.m(), oracle.n(), oracle.l());
    if m > n {
        return Err(FurthestError::Dimension("requires m <= n".into()));
    }
    let dim = m * (n + 1);
    let radius = (1.0 + (2f64).powi(l.min(16) as i32)) * (dim as f64).sqrt();
    let mut ell = Ellipsoid::ball(dim, radius);
    let mut pool = CutPool::new(cfg.pool_cap);
    for cut in box_cuts_general(m, n, (2f64).powi((2 * l).min(16) as i32)) {
        pool.push_permanent(cut);
    }
    let start_queries = oracle.queries();
    let mut iterations = 0usize;
    let denom = BigInt::from(1u8) << cfg.snap_denom_exp.min(2 * l).max(4) as usize;
    let stop_eps = {
        let e = (4 * l as i64 + 4).min(cfg.stop_exp_cap);
        (2f64).powi(-(e as i32))
    };
    let eps = pow2(-6);

    while iterations < cfg.max_iterations {
        iterations += 1;
        if oracle.queries() - start_queries > cfg.max_queries {
            return Err(FurthestError::Budget);
        }
        let mut applied = 0;
        while applied < 100 && pool.apply_best(&mut ell) {
            applied += 1;
        }
        let stop_now = ell.max_box_side() < stop_eps;

        let center: Vec<f64> = ell.center.iter().cloned().collect();
        let a_rows: Vec<QVec> = (0..m)
            .map(|i| snap(&center[i * (n + 1)..i * (n + 1) + n], &denom))
            .collect();
        let b_vec: QVec = (0..m)
            .map(|i| snap(&center[i * (n + 1) + n..(i + 1) * (n + 1)], &denom)[0].clone())
            .collect();
        let inst = LpInstance::new(a_rows.clone(), b_vec.clone());

        // Query point: a strict solution of the candidate if it has one,
        // otherwise of a full-rank perturbation (always feasible).
        let w = match lp_feasible_strict(&inst.rows())? {
            StrictOutcome::Feasible(w) => w,
            StrictOutcome::Infeasible => {
                let pert = full_rank_perturb(&a_rows, &eps, iterations);
                let target: QVec = b_vec.iter().map(|b| b + Rat::one()).collect();
                match solve_exact_system(&pert, &target) {
                    Some(x) => x,
                    None => {
                        continue;
                    }
                }
            }
        };
        match oracle.query(&w) {
            OracleReply::Feasible => {
                return Ok((
                    FurthestOutcome::Solution(w),
                    FurthestReport {
                        ellipsoid_iterations: iterations,
                        samevor_probes: 0,
                        queries: oracle.queries() - start_queries,
                        status: SolveStatus::Verified,
                    },
                ));
            }
            OracleReply::ViolatedIndex(r1) => {
                let r = r1 - 1;
                let mut cuts = vec![gcut_viol(m, n, &w, r)];
                for j in 0..m {
                    if j != r {
                        cuts.push(gcut_pair(m, n, &w, r, j));
                    }
                }
                for i in 0..m {
                    if let Some(c) = gcut_norm(m, n, i, &center[i * (n + 1)..i * (n + 1) + n]) {
                        cuts.push(c);
                    }
                }
                pool.apply_fresh(&mut ell, cuts);
            }
        }
        if stop_now {
            break;
        }
    }
    // Best-effort: report the candidate (systems with m <= n and full-rank
    // rows are feasible, so this nearly always carries a solution guess).
    let center: Vec<f64> = ell.center.iter().cloned().collect();
    let a_rows: Vec<QVec> = (0..m)
        .map(|i| snap(&center[i * (n + 1)..i * (n + 1) + n], &denom))
        .collect();
    let b_vec: QVec = (0..m)
        .map(|i| snap(&center[i * (n + 1) + n..(i + 1) * (n + 1)], &denom)[0].clone())
        .collect();
    let inst = LpInstance::new(a_rows, b_vec);
    let outcome = match lp_feasible_strict(&inst.rows())? {
        StrictOutcome::Feasible(w) => FurthestOutcome::Solution(w),
        StrictOutcome::Infeasible => FurthestOutcome::Infeasible,
    };
    Ok((
        outcome,
        FurthestReport {
            ellipsoid_iterations: iterations,
            samevor_probes: 0,
            queries: oracle.queries() - start_queries,
            status: SolveStatus::Nonconformant,
        },
    ))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
