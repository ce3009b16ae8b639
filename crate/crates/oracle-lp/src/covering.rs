//! Worst-case-oracle solver: the convex-hull-covering framework with
//! recursive sector-cylinder search.
//!
//! The search runs over homogeneous systems Ax > 0. A subspace is carried
//! as a rational frame whose columns are nearly orthonormal; sector
//! boundaries inside a frame's leading plane are exact rational direction
//! vectors, while the angular widths driving the halving/termination
//! schedule are kept as exact dyadic numbers in units of pi. Every
//! geometric decision (region membership, cell enumeration, containment)
//! is exact with respect to the realized rational directions; the dyadic
//! bookkeeping only schedules the bisection and the small-cylinder cutoff.

use crate::geom::{self, ConeH, ConeV};
use crate::lp::{self, StrictOutcome};
use crate::oracle::{Homogenized, OracleReply, QueryOracle};
use crate::rat::{self, Rat};
use crate::vecn::{self, QVec};
use num::{BigInt, One, Signed, Zero};
use std::collections::HashMap;
use std::time::Instant;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError {
    #[error("query budget exhausted ({0} queries)")]
    QueryBudget(usize),
    #[error("dimension {0} exceeds the supported desk scale")]
    DimensionCap(usize),
    #[error("geometry failure: {0}")]
    Geom(#[from] geom::GeomError),
    #[error("lp failure: {0}")]
    Lp(#[from] lp::LpError),
}

/// A subspace of R^n as an ordered list of spanning columns (close to
/// orthonormal; closeness is maintained by renormalizing each new leading
/// column to near-unit length).
#[derive(Debug, Clone)]
pub struct Frame {
    pub cols: Vec<QVec>,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        Frame { cols: (0..n).map(|i| vecn::unit(n, i)).collect() }
    }

    pub fn d(&self) -> usize {
        self.cols.len()
    }

    /// Embeds subspace coordinates u into R^n.
    pub fn apply(&self, u: &[Rat]) -> QVec {
        let n = self.cols[0].len();
        let mut x = vecn::zeros(n);
        for (c, ui) in self.cols.iter().zip(u) {
            x = vecn::add(&x, &vecn::scale(c, ui));
        }
        x
    }

    /// Pulls an ambient linear functional h back to subspace coordinates:
    /// <h, apply(u)> = <pullback(h), u> exactly.
    pub fn pullback(&self, h: &[Rat]) -> QVec {
        self.cols.iter().map(|c| vecn::dot(c, h)).collect()
    }

    /// The child frame for the planar direction w = (w1, w2) inside the
    /// leading plane: first column w1 b1 + w2 b2 (renormalized to roughly
    /// unit length, which preserves its direction exactly), then b3..bd.
    pub fn child(&self, w: &[Rat; 2]) -> Frame {
        let lead = vecn::add(
            &vecn::scale(&self.cols[0], &w[0]),
            &vecn::scale(&self.cols[1], &w[1]),
        );
        let lead = approx_normalize(&lead);
        let mut cols = vec![lead];
        cols.extend(self.cols[2..].iter().cloned());
        Frame { cols }
    }
}

/// Rescales v by a rational close to 1/|v|; direction unchanged. A first
/// exact power-of-two rescale brings the norm near 1 so the subsequent
/// denominator-bounded rounding of the scale factor can never collapse it
/// to zero, no matter how large or small v is.
fn approx_normalize(v: &[Rat]) -> QVec {
    let n2 = vecn::norm_sq(v);
    if n2.is_zero() || n2.is_one() {
        return v.to_vec();
    }
    // 2^(2e) roughly equals n2
    let e = (n2.numer().bits() as i64 - n2.denom().bits() as i64) / 2;
    let v = vecn::scale(v, &rat::pow2(-e));
    let n2 = vecn::norm_sq(&v);
    let s = rat::sqrt_approx(&n2.recip(), 40);
    let s = rat::best_approx(&s, &BigInt::from(1u64 << 30));
    debug_assert!(s.is_positive());
    vecn::scale(&v, &s)
}

/// An angular sector inside the leading plane of a frame. `alpha`/`beta`
/// are the nominal boundary angles in units of pi (exact dyadics driving
/// the halving schedule); `lo`/`hi` are the realized rational boundary
/// directions in leading-plane coordinates. Widths above pi occur only for
/// the transient full-circle start.
#[derive(Debug, Clone)]
pub struct SectorCylinder {
    pub alpha: Rat,
    pub beta: Rat,
    pub lo: [Rat; 2],
    pub hi: [Rat; 2],
    /// Last witness found outside every region, in subspace coordinates;
    /// rechecked first on later containment passes.
    witness: Option<QVec>,
}

impl SectorCylinder {
    pub fn full_circle() -> Self {
        SectorCylinder {
            alpha: Rat::zero(),
            beta: rat::int(2),
            lo: [Rat::one(), Rat::zero()],
            hi: [Rat::one(), Rat::zero()],
            witness: None,
        }
    }

    pub fn width(&self) -> Rat {
        &self.beta - &self.alpha
    }

    /// Strict homogeneous constraints (rows g with g.u > 0 required) that
    /// carve the sector out of the leading plane of a d-dimensional
    /// subspace. Width-pi sectors contribute one halfplane; narrower
    /// sectors two.
    fn sector_rows(&self, d: usize) -> Vec<(QVec, Rat)> {
        let mut rows = Vec::new();
        // cross2(lo, u) > 0  <=>  -lo2 u1 + lo1 u2 > 0
        let mut r1 = vecn::zeros(d);
        r1[0] = -self.lo[1].clone();
        r1[1] = self.lo[0].clone();
        rows.push((r1, Rat::zero()));
        if self.width() < Rat::one() {
            // cross2(u, hi) > 0  <=>  hi2 u1 - hi1 u2 > 0
            let mut r2 = vecn::zeros(d);
            r2[0] = self.hi[1].clone();
            r2[1] = -self.hi[0].clone();
            rows.push((r2, Rat::zero()));
        }
        rows
    }

    /// Realized bisecting direction, strictly between lo and hi. Exact for
    /// the full-circle and width-pi splits; otherwise an approximate
    /// angular bisector whose coordinates are truncated to a precision
    /// matched to the sector width and then verified by exact cross
    /// products.
    pub fn midpoint_direction(&self) -> [Rat; 2] {
        let w = self.width();
        if w == rat::int(2) {
            return [-self.lo[0].clone(), -self.lo[1].clone()];
        }
        if w == Rat::one() {
            return [-self.lo[1].clone(), self.lo[0].clone()];
        }
        // bisector of unit(lo), unit(hi) is lo |hi|/|lo| + hi up to scale
        let ratio2 = vecn::norm_sq(&self.hi) / vecn::norm_sq(&self.lo);
        // precision keyed to the nominal width: a width of p/2^e pi needs
        // about e bits to stay strictly inside after truncation
        let e = (w.denom().bits() as u64).max(1);
        for extra in [24u64, 64, 160] {
            let bits = e + extra;
            let rho = rat::sqrt_approx(&ratio2, bits);
            let m = [
                &self.lo[0] * &rho + &self.hi[0],
                &self.lo[1] * &rho + &self.hi[1],
            ];
            let bound = BigInt::one() << (bits + 8) as usize;
            let m = [rat::best_approx(&m[0], &bound), rat::best_approx(&m[1], &bound)];
            let a = vecn::cross2(&self.lo, &m);
            let b = vecn::cross2(&m, &self.hi);
            if a.is_positive() && b.is_positive() {
                // renormalize (positive scale: betweenness preserved)
                let m = approx_normalize(&m);
                return [m[0].clone(), m[1].clone()];
            }
        }
        // Last resort: the untruncated bisector is correct by construction.
        let rho = rat::sqrt_approx(&ratio2, e + 200);
        let m = [
            &self.lo[0] * &rho + &self.hi[0],
            &self.lo[1] * &rho + &self.hi[1],
        ];
        assert!(
            vecn::cross2(&self.lo, &m).is_positive()
                && vecn::cross2(&m, &self.hi).is_positive(),
            "bisector escaped its sector"
        );
        let m = approx_normalize(&m);
        [m[0].clone(), m[1].clone()]
    }

    /// Splits at the realized midpoint; children share the new boundary.
    pub fn split(&self) -> (SectorCylinder, SectorCylinder, [Rat; 2]) {
        let gamma = (&self.alpha + &self.beta) / rat::int(2);
        let mid = self.midpoint_direction();
        let left = SectorCylinder {
            alpha: self.alpha.clone(),
            beta: gamma.clone(),
            lo: self.lo.clone(),
            hi: mid.clone(),
            witness: self.witness.clone(),
        };
        let right = SectorCylinder {
            alpha: gamma,
            beta: self.beta.clone(),
            lo: mid.clone(),
            hi: self.hi.clone(),
            witness: self.witness.clone(),
        };
        (left, right, mid)
    }
}

/// The global exclusion state: one conic hull per oracle reply index,
/// shared across all recursion levels.
#[derive(Debug)]
pub struct RegionState {
    pub regions: Vec<ConeV>,
    /// Per region: facet set plus whether it came from the direct
    /// enumeration (region full-dimensional and pointed), the precondition
    /// for the incremental hull step.
    facet_cache: HashMap<usize, (ConeH, bool)>,
    pub ray_budget: usize,
}

impl RegionState {
    pub fn new(m: usize, dim: usize, ray_budget: usize) -> Self {
        RegionState {
            regions: vec![ConeV::empty(dim); m],
            facet_cache: HashMap::new(),
            ray_budget,
        }
    }

    /// Region(i) <- conic hull of Region(i) and the ray x. Index 1-based.
    pub fn update(&mut self, i: usize, x: &[Rat]) -> Result<(), SolveError> {
        assert!(i >= 1 && i <= self.regions.len(), "region index {i} out of range");
        let idx = i - 1;
        // Rays inside the current hull are the common case during a corner
        // chase; the cached facet representation settles them with dot
        // products before any hull update runs.
        let known_outside = !self.regions[idx].rays.is_empty();
        if known_outside {
            self.ensure_facets(idx)?;
            let (h, direct) = self.facet_cache.remove(&idx).expect("just ensured");
            if h.contains(x) {
                self.facet_cache.insert(idx, (h, direct));
                return Ok(());
            }
            if direct {
                let r = vecn::canonicalize_ray(x).expect("outside ray is nonzero");
                if let Some((cone, hn)) = geom::cone_add_ray(&self.regions[idx], &h, &r) {
                    self.regions[idx] = cone;
                    self.facet_cache.insert(idx, (hn, true));
                    return Ok(());
                }
            }
        }
        let (cone, facets) = geom::conv_union_with_facets(&self.regions[idx], x, known_outside)?;
        self.regions[idx] = cone;
        match facets {
            Some(h) => {
                self.facet_cache.insert(idx, (h, true));
            }
            None => {
                self.facet_cache.remove(&idx);
            }
        }
        Ok(())
    }

    fn ensure_facets(&mut self, idx: usize) -> Result<(), SolveError> {
        // Entries are invalidated eagerly on every hull change, so presence
        // means fresh.
        if !self.facet_cache.contains_key(&idx) {
            let tagged = geom::cone_facets_tagged(&self.regions[idx], self.ray_budget)?;
            self.facet_cache.insert(idx, tagged);
        }
        Ok(())
    }

    fn facets(&mut self, idx: usize) -> Result<&ConeH, SolveError> {
        self.ensure_facets(idx)?;
        Ok(&self.facet_cache[&idx].0)
    }

    /// True when the point (ambient coordinates) lies in some region.
    /// Membership is read off the cached facet representations.
    pub fn covers(&mut self, x: &[Rat]) -> Result<bool, SolveError> {
        for idx in 0..self.regions.len() {
            if !self.regions[idx].rays.is_empty() && self.facets(idx)?.contains(x) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Per-run statistics emitted alongside the verdict.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub queries: usize,
    pub max_depth: usize,
    pub cylinders_created: usize,
    pub cylinders_removed: usize,
    pub containment_checks: usize,
    pub wall_ms: u128,
}

#[derive(Debug, Clone)]
pub enum HomogeneousOutcome {
    Solution(QVec),
    NoSolution,
}

pub struct SolverConfig {
    pub max_queries: usize,
    pub ray_budget: usize,
    /// Cutoff width is 2^(-(2n+3)L) by default; desk-scale sweeps may cap
    /// the exponent to keep infeasible runs tractable. A capped run that
    /// reports no solution is only as trustworthy as the cap, so harness
    /// code cross-checks such verdicts against the exact LP.
    pub cutoff_exponent_cap: Option<i64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_queries: 200_000, ray_budget: 256, cutoff_exponent_cap: None }
    }
}

impl SolverConfig {
    pub fn with_cap(cap: i64) -> Self {
        SolverConfig { cutoff_exponent_cap: Some(cap), ..Default::default() }
    }

    fn cutoff(&self, n: usize, l: u64) -> Rat {
        let mut e = (2 * n as i64 + 3) * l as i64;
        if let Some(cap) = self.cutoff_exponent_cap {
            e = e.min(cap);
        }
        rat::pow2(-e)
    }
}

struct Search<'a, O: QueryOracle> {
    oracle: &'a mut O,
    state: RegionState,
    stats: RunStats,
    cutoff: Rat,
    max_queries: usize,
}

impl<'a, O: QueryOracle> Search<'a, O> {
    fn query(&mut self, x: &[Rat]) -> Result<OracleReply, SolveError> {
        if self.oracle.queries() >= self.max_queries {
            return Err(SolveError::QueryBudget(self.oracle.queries()));
        }
        let r = self.oracle.query(x);
        self.stats.queries = self.oracle.queries();
        Ok(r)
    }

    /// Recursive search of the subspace spanned by `frame`. Returns a
    /// feasible point (halting everything above) or None when the whole
    /// subspace is exhausted.
    fn run(&mut self, frame: &Frame, depth: usize) -> Result<Option<QVec>, SolveError> {
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let d = frame.d();
        if d == 1 {
            for x in [frame.cols[0].clone(), vecn::neg(&frame.cols[0])] {
                match self.query(&x)? {
                    OracleReply::Feasible => return Ok(Some(x)),
                    OracleReply::ViolatedIndex(i) => self.state.update(i, &x)?,
                }
            }
            return Ok(None);
        }

        // angle-0 subspace first: (b1, b3, ..., bd)
        let zero_child = Frame {
            cols: std::iter::once(frame.cols[0].clone())
                .chain(frame.cols[2..].iter().cloned())
                .collect(),
        };
        if let Some(x) = self.run(&zero_child, depth + 1)? {
            return Ok(Some(x));
        }

        let mut cylinders = vec![SectorCylinder::full_circle()];
        self.stats.cylinders_created += 1;
        loop {
            // widest cylinder; ties to the smallest alpha
            let Some(best) = (0..cylinders.len()).max_by(|&i, &j| {
                cylinders[i]
                    .width()
                    .cmp(&cylinders[j].width())
                    .then(cylinders[j].alpha.cmp(&cylinders[i].alpha))
            }) else {
                return Ok(None);
            };
            if cylinders[best].width() < self.cutoff {
                return Ok(None);
            }
            // Lazy pruning: only the split candidate is ever tested for
            // coverage, so one loop turn costs at most one containment
            // check instead of re-checking the whole queue after every
            // split. Queued cylinders are tested when their turn comes.
            // The transient full circle has no faithful sector rows and is
            // always split.
            if cylinders[best].width() < rat::int(2) {
                self.stats.containment_checks += 1;
                let t0 = Instant::now();
                let contained = cylinder_contained(&mut cylinders[best], frame, &mut self.state)?;
                if t0.elapsed().as_secs_f64() > 0.5 && std::env::var("COVER_TRACE").is_ok() {
                    eprintln!("[trace] contained d={} width={} took {:?} -> {contained}", frame.d(), cylinders[best].width(), t0.elapsed());
                }
                if contained {
                    cylinders.swap_remove(best);
                    self.stats.cylinders_removed += 1;
                    continue;
                }
            }
            let (left, right, mid) = cylinders[best].split();
            let child = frame.child(&mid);
            if let Some(x) = self.run(&child, depth + 1)? {
                return Ok(Some(x));
            }
            cylinders.swap_remove(best);
            cylinders.push(left);
            cylinders.push(right);
            self.stats.cylinders_created += 2;
        }
    }
}

/// Decides whether the realized sector cylinder (in the leading plane of
/// `frame`, times the rest of the subspace) is covered by the union of the
/// region cones. The facet hyperplanes of every nonempty region are pulled
/// back to subspace coordinates; each full-dimensional cell of their
/// arrangement inside the sector gets one relative-interior witness (by
/// slack maximization), and region membership of a cell is read off its
/// witness. Lower-dimensional cells are covered automatically because the
/// regions are closed.
pub fn cylinder_contained(
    cyl: &mut SectorCylinder,
    frame: &Frame,
    state: &mut RegionState,
) -> Result<bool, SolveError> {
    let d = frame.d();
    let sector = cyl.sector_rows(d);

    // A memoized uncovered witness that still verifies settles it cheaply.
    if let Some(u) = &cyl.witness {
        let inside_sector = sector.iter().all(|(g, _)| vecn::dot(g, u).is_positive());
        if inside_sector && !state.covers(&frame.apply(u))? {
            return Ok(false);
        }
        cyl.witness = None;
    }

    // Planar subspaces admit a direct angular sweep: the arrangement cells
    // inside the sector are the angular intervals between the plane lines,
    // enumerable with exact cross products instead of one LP per cell.
    if d == 2 {
        // Boundary rays of the sector cone (plus the perpendicular of `lo`
        // for width-pi sectors, whose boundary rays are opposite). A line
        // meets the sector's interior iff its normal takes strictly
        // positive and strictly negative values on these generators -- a
        // conic hull lies on one side of a line exactly when all its
        // generators do.
        let mut gens: Vec<QVec> = vec![
            vec![cyl.lo[0].clone(), cyl.lo[1].clone()],
            vec![cyl.hi[0].clone(), cyl.hi[1].clone()],
        ];
        if cyl.width() >= Rat::one() {
            gens.push(vec![-&cyl.lo[1], cyl.lo[0].clone()]);
        }
        let cuts_sector = |g: &QVec| {
            let mut pos = false;
            let mut neg = false;
            for w in &gens {
                let v = vecn::dot(g, w);
                pos |= v.is_positive();
                neg |= v.is_negative();
                if pos && neg {
                    return true;
                }
            }
            false
        };

        // Pulled-back facet normals of all nonempty regions, restricted to
        // the lines that cut the sector and deduplicated up to sign
        // (opposite normals define the same line).
        let mut planes: Vec<QVec> = Vec::new();
        for idx in 0..state.regions.len() {
            if state.regions[idx].rays.is_empty() {
                continue;
            }
            let facets = state.facets(idx)?;
            for h in &facets.normals {
                let g = frame.pullback(h);
                if let Some(c) = vecn::canonicalize_ray(&g) {
                    if !cuts_sector(&c) {
                        continue;
                    }
                    let neg = vecn::neg(&c);
                    if !planes.iter().any(|p| *p == c || *p == neg) {
                        planes.push(c);
                    }
                }
            }
        }
        return contained_2d(cyl, frame, state, &sector, &planes);
    }

    // Higher-dimensional subspaces: a point escapes the union of regions
    // exactly when it strictly violates one facet of every nonempty
    // region, so search by choosing one facet per region depth-first with
    // LP pruning. The sector is uncovered iff some choice stays feasible;
    // the first feasible leaf yields a witness immediately, which keeps
    // the common "not contained" answer cheap.
    let mut facet_lists: Vec<Vec<QVec>> = Vec::new();
    for idx in 0..state.regions.len() {
        if state.regions[idx].rays.is_empty() {
            continue;
        }
        let facets = state.facets(idx)?;
        facet_lists.push(facets.normals.iter().map(|h| frame.pullback(h)).collect());
    }
    // Fewest escape routes first: smaller branching near the root of the
    // search tree and earlier pruning.
    facet_lists.sort_by_key(|f| f.len());
    let mut rows = sector.clone();
    if let Some(u) = escape_point(&mut rows, &facet_lists, 0)? {
        cyl.witness = Some(u);
        return Ok(false);
    }
    Ok(true)
}

/// Depth-first search for a point that strictly satisfies `rows` and
/// strictly violates at least one facet (listed per region in
/// `facet_lists[k..]`) of every remaining region.
fn escape_point(
    rows: &mut Vec<(QVec, Rat)>,
    facet_lists: &[Vec<QVec>],
    k: usize,
) -> Result<Option<QVec>, SolveError> {
    match lp::lp_feasible_strict(rows)? {
        StrictOutcome::Infeasible => return Ok(None),
        StrictOutcome::Feasible(u) => {
            if k == facet_lists.len() {
                return Ok(Some(u));
            }
        }
    }
    for h in &facet_lists[k] {
        if vecn::is_zero(h) {
            continue; // facet orthogonal to the subspace: never violated here
        }
        rows.push((h.clone(), Rat::zero()));
        let found = escape_point(rows, facet_lists, k + 1)?;
        rows.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Angular-sweep containment for a width < pi (or exactly pi) sector of a
/// planar subspace. The candidate boundary rays are the sector edges, the
/// two directions of every pulled-back facet line, and the perpendicular
/// of `lo` (which caps the only possible width-pi gap). One interior
/// witness per angular cell -- the sum of its two boundary rays -- settles
/// coverage, because the regions are closed and the cells are open.
fn contained_2d(
    cyl: &mut SectorCylinder,
    frame: &Frame,
    state: &mut RegionState,
    sector: &[(QVec, Rat)],
    planes: &[QVec],
) -> Result<bool, SolveError> {
    let lo = vec![cyl.lo[0].clone(), cyl.lo[1].clone()];
    let hi = vec![cyl.hi[0].clone(), cyl.hi[1].clone()];
    let inside = |r: &[Rat]| sector.iter().all(|(g, _)| vecn::dot(g, r).is_positive());

    let mut rays: Vec<QVec> = Vec::new();
    for g in planes {
        let r = vec![-g[1].clone(), g[0].clone()];
        if inside(&r) {
            rays.push(r.clone());
        }
        let nr = vecn::neg(&r);
        if inside(&nr) {
            rays.push(nr);
        }
    }
    let perp = vec![-lo[1].clone(), lo[0].clone()];
    if inside(&perp) {
        rays.push(perp);
    }
    // All rays lie strictly inside the sector, hence in the open halfplane
    // left of `lo`; the cross product is a total angular order there.
    rays.sort_by(|a, b| {
        let c = vecn::cross2(a, b);
        if c.is_positive() {
            std::cmp::Ordering::Less
        } else if c.is_negative() {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    rays.dedup_by(|a, b| vecn::same_ray(a, b));

    let mut walk = Vec::with_capacity(rays.len() + 2);
    walk.push(lo);
    walk.extend(rays);
    walk.push(hi);
    for pair in walk.windows(2) {
        if !vecn::cross2(&pair[0], &pair[1]).is_positive() {
            continue; // duplicate direction; no open cell between them
        }
        let u = vecn::add(&pair[0], &pair[1]);
        if !state.covers(&frame.apply(&u))? {
            cyl.witness = Some(u);
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves the homogeneous problem Ax > 0 hidden behind the oracle over
/// R^n (n = oracle dimension). Desk-scale cap n <= 5.
pub fn solve_homogeneous_covering<O: QueryOracle>(
    oracle: &mut O,
    config: &SolverConfig,
) -> Result<(HomogeneousOutcome, RunStats), SolveError> {
    let n = oracle.n();
    if n > 5 {
        return Err(SolveError::DimensionCap(n));
    }
    let start = Instant::now();
    let cutoff = config.cutoff(n, oracle.l());
    let state = RegionState::new(oracle.m(), n, config.ray_budget);
    let mut search = Search {
        oracle,
        state,
        stats: RunStats::default(),
        cutoff,
        max_queries: config.max_queries,
    };
    let frame = Frame::identity(n);
    let out = search.run(&frame, 0)?;
    let mut stats = search.stats;
    stats.wall_ms = start.elapsed().as_millis();
    Ok(match out {
        Some(x) => (HomogeneousOutcome::Solution(x), stats),
        None => (HomogeneousOutcome::NoSolution, stats),
    })
}

/// Planar warmup: the n = 2 homogeneous case on the standard frame.
pub fn solve_2d<O: QueryOracle>(
    oracle: &mut O,
    config: &SolverConfig,
) -> Result<(HomogeneousOutcome, RunStats), SolveError> {
    assert_eq!(oracle.n(), 2, "planar solver requires dimension 2");
    solve_homogeneous_covering(oracle, config)
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solution(QVec),
    Infeasible,
}

/// Full pipeline for an inhomogeneous system Ax > b: homogenize to
/// Ax - by > 0, y > 0 over R^(n+1), search, and map (x, y) back to x/y.
pub fn solve_worstcase<O: QueryOracle>(
    inner: O,
    config: &SolverConfig,
) -> Result<(SolveOutcome, RunStats, Homogenized<O>), SolveError> {
    let mut hom = Homogenized::new(inner);
    let (out, stats) = solve_homogeneous_covering(&mut hom, config)?;
    let out = match out {
        HomogeneousOutcome::NoSolution => SolveOutcome::Infeasible,
        HomogeneousOutcome::Solution(xy) => {
            let n = xy.len() - 1;
            let y = xy[n].clone();
            assert!(y.is_positive(), "feasible homogeneous point must have y > 0");
            SolveOutcome::Solution(xy[..n].iter().map(|c| c / &y).collect())
        }
    };
    Ok((out, stats, hom))
}
