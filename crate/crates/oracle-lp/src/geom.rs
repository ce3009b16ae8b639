//! Exact convex-cone machinery: V- and H-representations, polar cones,
//! facet enumeration by incremental double description, and normalized
//! cone volume (exact for the supported shapes, seeded Monte-Carlo
//! otherwise).
//!
//! All predicates are exact over rationals; no floating point enters any
//! decision.

use crate::lp::{self, Constraint, LpOutcome};
use crate::rat::{self, Rat};
use crate::vecn::{self, QVec};
use num::{One, Signed, Zero};

#[derive(Debug, Clone, thiserror::Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero ray rejected")]
    ZeroRay,
    #[error("ray budget exceeded: {rays} rays over budget {budget}")]
    RayBudget { rays: usize, budget: usize },
    #[error("exact volume unsupported for this shape")]
    UnsupportedShape,
    #[error("lp failure: {0}")]
    Lp(#[from] lp::LpError),
}

/// Affine hyperplane { x : <normal, x> = offset }.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    pub normal: QVec,
    pub offset: Rat,
}

impl Hyperplane {
    pub fn new(normal: QVec, offset: Rat) -> Self {
        assert!(!vecn::is_zero(&normal), "hyperplane normal must be nonzero");
        Hyperplane { normal, offset }
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        vecn::dot(&self.normal, x) - &self.offset
    }
}

/// Convex cone as the conic hull of finitely many rays. The empty ray list
/// is the trivial cone {0}. Stored rays are canonicalized (coprime integer
/// coordinates, direction preserved) and pairwise non-parallel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeV {
    pub dim: usize,
    pub rays: Vec<QVec>,
}

/// Convex cone as an intersection of homogeneous halfspaces
/// { x : <h, x> <= 0 }. The empty list is all of R^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeH {
    pub dim: usize,
    pub normals: Vec<QVec>,
}

impl ConeV {
    pub fn empty(dim: usize) -> Self {
        ConeV { dim, rays: vec![] }
    }

    pub fn from_rays(dim: usize, rays: &[QVec]) -> Result<Self, GeomError> {
        let mut c = ConeV::empty(dim);
        for r in rays {
            if vecn::is_zero(r) {
                continue; // the zero vector adds nothing to a conic hull
            }
            c = conv_union_rays(&c, r)?;
        }
        Ok(c)
    }
}

impl ConeH {
    pub fn full(dim: usize) -> Self {
        ConeH { dim, normals: vec![] }
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.normals.iter().all(|h| !vecn::dot(h, x).is_positive())
    }
}

/// Polar of a V-cone: { y : <r, y> <= 0 for every generator r }.
pub fn polar_cone_v(c: &ConeV) -> ConeH {
    ConeH { dim: c.dim, normals: c.rays.clone() }
}

/// Polar of an H-cone, as generators: the polar of an intersection of
/// halfspaces { <h_i, x> <= 0 } is the conic hull of the normals h_i
/// together with nothing else -- but a minimal generator set still needs
/// the double-description pass when the intersection is lower-dimensional.
/// For the polar pair we instead compute generators of the H-cone itself
/// (see `generators`) and swap roles at call sites.
pub fn polar_cone_h(c: &ConeH) -> Result<ConeV, GeomError> {
    ConeV::from_rays(c.dim, &c.normals)
}

/// Desk-scale budget on ray counts during double description.
pub const DEFAULT_RAY_BUDGET: usize = 64;

/// Generator (V-) representation of an H-cone via incremental double
/// description: start from R^n generated by +-e_i and insert one halfspace
/// at a time, pair-combining rays across the new hyperplane and pruning
/// rays that become conic combinations of the others.
pub fn generators(c: &ConeH, ray_budget: usize) -> Result<ConeV, GeomError> {
    let n = c.dim;
    let mut rays: Vec<QVec> = (0..n)
        .flat_map(|i| [vecn::unit(n, i), vecn::neg(&vecn::unit(n, i))])
        .collect();
    for h in &c.normals {
        if h.len() != n {
            return Err(GeomError::DimensionMismatch { expected: n, got: h.len() });
        }
        let vals: Vec<Rat> = rays.iter().map(|r| vecn::dot(h, r)).collect();
        let mut next: Vec<QVec> = Vec::new();
        for (r, v) in rays.iter().zip(&vals) {
            if !v.is_positive() {
                next.push(r.clone());
            }
        }
        for (ri, vi) in rays.iter().zip(&vals) {
            if !vi.is_positive() {
                continue;
            }
            for (rj, vj) in rays.iter().zip(&vals) {
                if !vj.is_negative() {
                    continue;
                }
                // w = v_i * r_j - v_j * r_i lies on the hyperplane <h,.>=0
                // and inside the old cone.
                let w = vecn::sub(&vecn::scale(rj, vi), &vecn::scale(ri, vj));
                if let Some(w) = vecn::canonicalize_ray(&w) {
                    if !next.iter().any(|r| r == &w) {
                        next.push(w);
                    }
                }
            }
        }
        rays = prune_redundant(next)?;
        if rays.len() > ray_budget {
            return Err(GeomError::RayBudget { rays: rays.len(), budget: ray_budget });
        }
    }
    let rays = rays
        .into_iter()
        .filter_map(|r| vecn::canonicalize_ray(&r))
        .collect::<Vec<_>>();
    Ok(ConeV { dim: n, rays: dedup_rays(rays) })
}

fn dedup_rays(rays: Vec<QVec>) -> Vec<QVec> {
    let mut out: Vec<QVec> = Vec::new();
    for r in rays {
        if !out.iter().any(|o| o == &r) {
            out.push(r);
        }
    }
    out
}

/// Removes rays that are conic combinations of the remaining ones,
/// scanning in input order so the result is deterministic.
fn prune_redundant(rays: Vec<QVec>) -> Result<Vec<QVec>, GeomError> {
    let mut kept = rays;
    let mut i = 0;
    while i < kept.len() {
        let candidate = kept.remove(i);
        if !in_conic_hull(&candidate, &kept)? {
            kept.insert(i, candidate);
            i += 1;
        }
    }
    Ok(kept)
}

/// Exact LP decision: x in cone(rays)?
fn in_conic_hull(x: &[Rat], rays: &[QVec]) -> Result<bool, GeomError> {
    if vecn::is_zero(x) {
        return Ok(true);
    }
    if rays.is_empty() {
        return Ok(false);
    }
    let n = x.len();
    let k = rays.len();
    // Variables lambda_1..lambda_k >= 0 with sum lambda_j r_j = x.
    let mut cons = Vec::with_capacity(n + k);
    for coord in 0..n {
        let coeffs: QVec = rays.iter().map(|r| r[coord].clone()).collect();
        cons.push(Constraint::eq(coeffs, x[coord].clone()));
    }
    for j in 0..k {
        cons.push(Constraint::le(vecn::neg(&vecn::unit(k, j)), Rat::zero()));
    }
    match lp::maximize(&vecn::zeros(k), &cons)? {
        LpOutcome::Optimal { .. } => Ok(true),
        LpOutcome::Infeasible => Ok(false),
        LpOutcome::Unbounded => unreachable!("zero objective"),
    }
}

/// Exact membership in a V-cone.
pub fn cone_membership(x: &[Rat], c: &ConeV) -> Result<bool, GeomError> {
    if x.len() != c.dim {
        return Err(GeomError::DimensionMismatch { expected: c.dim, got: x.len() });
    }
    in_conic_hull(x, &c.rays)
}

/// Minimal H-representation of a V-cone. The facet normals are the
/// generators of the polar cone; lower-dimensional cones yield opposing
/// halfspace pairs for their lineality-orthogonal directions, and the
/// trivial cone {0} yields all +-e_i (no nonzero point satisfies them).
pub fn cone_facets(c: &ConeV, ray_budget: usize) -> Result<ConeH, GeomError> {
    Ok(cone_facets_tagged(c, ray_budget)?.0)
}

/// As `cone_facets`, additionally reporting whether the direct enumeration
/// applied (true exactly when the cone is full-dimensional and pointed),
/// which is the precondition for the incremental `cone_add_ray` step.
pub fn cone_facets_tagged(c: &ConeV, ray_budget: usize) -> Result<(ConeH, bool), GeomError> {
    if let Some(h) = cone_facets_direct(c)? {
        return Ok((h, true));
    }
    let polar = polar_cone_v(c); // H-cone whose normals are the rays of c
    let gens = generators(&polar, ray_budget)?;
    Ok((ConeH { dim: c.dim, normals: gens.rays }, false))
}

/// Row-reduces `rows` in place, returning the rank. Rows are vectors of a
/// common length; reduced rows are left in echelon form.
fn row_reduce(rows: &mut Vec<QVec>) -> usize {
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].clone().recip();
        for c in col..width {
            rows[rank][c] = &rows[rank][c] * &inv;
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in col..width {
                rows[r][c] = &rows[r][c] - &(&f * &rows[rank][c]);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Facet enumeration for full-dimensional pointed cones without any LPs
/// beyond one pointedness check: every facet of such a cone is the span of
/// dim-1 linearly independent extreme rays, so scanning those subsets and
/// orienting their nullspace normal against the remaining rays finds all
/// facets. Returns None when the cone is lower-dimensional or has
/// lineality, which the double-description fallback handles.
fn cone_facets_direct(c: &ConeV) -> Result<Option<ConeH>, GeomError> {
    let d = c.dim;
    let k = c.rays.len();
    if d < 2 || k < d {
        return Ok(None);
    }
    let mut probe = c.rays.clone();
    if row_reduce(&mut probe) < d {
        return Ok(None); // not full-dimensional
    }
    // Pointed iff the polar has interior: some y with <r, y> < 0 for all
    // rays r.
    let strict: Vec<(QVec, Rat)> = c.rays.iter().map(|r| (vecn::neg(r), Rat::zero())).collect();
    if !lp::lp_feasible_strict(&strict)?.is_feasible() {
        return Ok(None);
    }

    let mut normals: Vec<QVec> = Vec::new();
    let mut subset: Vec<usize> = Vec::with_capacity(d - 1);
    fn rec(
        rays: &[QVec],
        d: usize,
        start: usize,
        subset: &mut Vec<usize>,
        normals: &mut Vec<QVec>,
    ) {
        if subset.len() == d - 1 {
            if let Some(n) = facet_normal(rays, subset, d) {
                if !normals.iter().any(|m| m == &n) {
                    normals.push(n);
                }
            }
            return;
        }
        for i in start..rays.len() {
            subset.push(i);
            rec(rays, d, i + 1, subset, normals);
            subset.pop();
        }
    }
    rec(&c.rays, d, 0, &mut subset, &mut normals);
    Ok(Some(ConeH { dim: d, normals }))
}

/// Normal of the hyperplane spanned by the chosen rays, oriented so the
/// whole cone satisfies <n, x> <= 0; None when the rays do not span a
/// hyperplane or the hyperplane is not supporting.
fn facet_normal(rays: &[QVec], subset: &[usize], d: usize) -> Option<QVec> {
    let mut mat: Vec<QVec> = subset.iter().map(|&i| rays[i].clone()).collect();
    let rank = row_reduce(&mut mat);
    if rank != d - 1 {
        return None;
    }
    // Nullspace of the echelon rows: identify the free column, set it to 1
    // and back-substitute.
    let mut pivots = Vec::with_capacity(d - 1);
    for row in mat.iter().take(rank) {
        let col = (0..d).find(|&c| !row[c].is_zero())?;
        pivots.push(col);
    }
    let free = (0..d).find(|c| !pivots.contains(c))?;
    let mut n = vecn::zeros(d);
    n[free] = Rat::one();
    for (row, &col) in mat.iter().zip(&pivots).rev() {
        // row is normalized: row[col] = 1; n[col] = -sum_{c>col} row[c] n[c]
        let mut acc = Rat::zero();
        for c in 0..d {
            if c != col {
                acc += &row[c] * &n[c];
            }
        }
        n[col] = -acc;
    }
    let mut pos = false;
    let mut neg = false;
    for r in rays {
        let v = vecn::dot(&n, r);
        pos |= v.is_positive();
        neg |= v.is_negative();
        if pos && neg {
            return None; // spanning hyperplane, not supporting
        }
    }
    if !pos && !neg {
        return None; // all rays on the hyperplane: cone not full-dim here
    }
    let n = if pos { vecn::neg(&n) } else { n };
    vecn::canonicalize_ray(&n)
}

/// Conic hull of c together with one more ray, with redundant rays removed
/// in input order.
pub fn conv_union_rays(c: &ConeV, r: &[Rat]) -> Result<ConeV, GeomError> {
    Ok(conv_union_with_facets(c, r, false)?.0)
}

/// Conic hull of c and one more ray; additionally returns the facet
/// representation of the result when the direct enumeration applies (the
/// result is full-dimensional and pointed), so callers that cache facets
/// avoid recomputing them. `known_outside` skips the membership test when
/// the caller has already established that r is not in c.
pub fn conv_union_with_facets(
    c: &ConeV,
    r: &[Rat],
    known_outside: bool,
) -> Result<(ConeV, Option<ConeH>), GeomError> {
    if r.len() != c.dim {
        return Err(GeomError::DimensionMismatch { expected: c.dim, got: r.len() });
    }
    let r = vecn::canonicalize_ray(r).ok_or(GeomError::ZeroRay)?;
    if !known_outside && cone_membership(&r, c)? {
        return Ok((c.clone(), None));
    }
    let mut rays = c.rays.clone();
    rays.push(r);
    let grown = ConeV { dim: c.dim, rays };
    if let Some(h) = cone_facets_direct(&grown)? {
        let rays = extreme_rays_by_facets(grown.rays, &h);
        return Ok((ConeV { dim: c.dim, rays }, Some(h)));
    }
    let rays = prune_redundant(grown.rays)?;
    Ok((ConeV { dim: c.dim, rays }, None))
}

/// Incremental hull step for a full-dimensional pointed cone with known
/// facets: the conic hull of c and one outside ray, together with the
/// updated facet set. Works entirely on the polar side -- one
/// double-description insertion of the halfspace { y : <r, y> <= 0 } over
/// the facet normals -- and then recomputes every surviving normal from the
/// nullspace of its incident generators, which keeps coefficient growth
/// bounded by the generator bit size instead of compounding across steps.
///
/// Preconditions: `h` is the facet set of `c`, `c` is full-dimensional and
/// pointed, and `r` is canonicalized and outside `c`. Returns None when the
/// grown cone stops being pointed; callers fall back to the generic path.
pub fn cone_add_ray(c: &ConeV, h: &ConeH, r: &[Rat]) -> Option<(ConeV, ConeH)> {
    let d = c.dim;
    let vals: Vec<Rat> = h.normals.iter().map(|n| vecn::dot(n, r)).collect();
    // Kept polar generators plus one combination per (cut, kept) pair; a
    // superset of the extreme rays of the new polar cone.
    let mut candidates: Vec<QVec> = Vec::new();
    for (n, v) in h.normals.iter().zip(&vals) {
        if !v.is_positive() {
            candidates.push(n.clone());
        }
    }
    for (i, vi) in vals.iter().enumerate() {
        if !vi.is_positive() {
            continue;
        }
        for (j, vj) in vals.iter().enumerate() {
            if !vj.is_negative() {
                continue;
            }
            // w = vi h_j - vj h_i: a positive combination with <r, w> = 0.
            let w = vecn::sub(
                &vecn::scale(&h.normals[j], vi),
                &vecn::scale(&h.normals[i], vj),
            );
            if let Some(w) = vecn::canonicalize_ray(&w) {
                if !candidates.contains(&w) {
                    candidates.push(w);
                }
            }
        }
    }
    // The new cone is pointed exactly when its polar -- generated by the
    // candidates -- is full-dimensional.
    let mut probe = candidates.clone();
    if row_reduce(&mut probe) < d {
        return None;
    }
    let mut gens = c.rays.clone();
    gens.push(r.to_vec());
    let mut normals: Vec<QVec> = Vec::new();
    for cand in &candidates {
        let incident: Vec<usize> = (0..gens.len())
            .filter(|&g| vecn::dot(cand, &gens[g]).is_zero())
            .collect();
        if incident.len() < d - 1 {
            continue; // supports a face of dimension < d - 1: not a facet
        }
        if let Some(n) = facet_normal(&gens, &incident, d) {
            if !normals.iter().any(|m| m == &n) {
                normals.push(n);
            }
        }
    }
    let hn = ConeH { dim: d, normals };
    let rays = extreme_rays_by_facets(gens, &hn);
    Some((ConeV { dim: d, rays }, hn))
}

/// Extreme-ray filter for a full-dimensional pointed cone given its facets:
/// a generator is extreme exactly when it lies on a one-dimensional face,
/// i.e. its active facet normals span a (dim - 1)-dimensional space.
fn extreme_rays_by_facets(rays: Vec<QVec>, h: &ConeH) -> Vec<QVec> {
    let d = h.dim;
    rays.into_iter()
        .filter(|r| {
            let mut active: Vec<QVec> = h
                .normals
                .iter()
                .filter(|n| vecn::dot(n, r).is_zero())
                .cloned()
                .collect();
            row_reduce(&mut active) == d - 1
        })
        .collect()
}

/// Result of a Monte-Carlo volume estimate: raw counts, never a bare float.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeEstimate {
    pub hits: u64,
    pub samples: u64,
}

impl VolumeEstimate {
    /// Estimated normalized volume as a rational 2 * hits / samples.
    pub fn value(&self) -> Rat {
        rat::int(2) * rat::rat(self.hits as i64, self.samples as i64)
    }
}

#[derive(Debug, Clone)]
pub enum VolumeMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub enum Volume {
    Exact(Rat),
    Estimate(VolumeEstimate),
}

/// Normalized volume v(C) = vol(C intersect B^n) / (vol(B^n) / 2) of an
/// H-cone. Exact mode handles the shapes whose angle structure is forced:
/// the full space (2), intersections of pairwise-orthogonal halfspaces
/// (2^(1-k)), and, in the plane, any two halfspaces (angle recoverable from
/// the normals when rational). Anything else requires Monte-Carlo.
pub fn normalized_volume(c: &ConeH, mode: &VolumeMode) -> Result<Volume, GeomError> {
    match mode {
        VolumeMode::Exact => exact_volume(c).map(Volume::Exact),
        VolumeMode::MonteCarlo { samples, seed } => {
            Ok(Volume::Estimate(monte_carlo_volume(c, *samples, *seed)))
        }
    }
}

fn exact_volume(c: &ConeH) -> Result<Rat, GeomError> {
    let normals: Vec<&QVec> = c.normals.iter().filter(|h| !vecn::is_zero(h)).collect();
    if normals.is_empty() {
        return Ok(rat::int(2));
    }
    // Drop duplicate (parallel, same-direction) normals first.
    let mut distinct: Vec<QVec> = Vec::new();
    for h in &normals {
        if !distinct.iter().any(|d| vecn::same_ray(d, h)) {
            distinct.push((*h).clone());
        }
    }
    let k = distinct.len() as i64;
    let orthogonal = distinct
        .iter()
        .enumerate()
        .all(|(i, a)| distinct[i + 1..].iter().all(|b| vecn::dot(a, b).is_zero()));
    if orthogonal {
        // Each orthogonal halfspace halves the ball independently.
        return Ok(rat::pow2(1 - k));
    }
    Err(GeomError::UnsupportedShape)
}

/// Normalized volume of a planar sector spanning angles alpha..beta given
/// in units of pi: (beta - alpha) / 2 (the pi's cancel against 2*pi).
pub fn sector_volume(alpha_pi: &Rat, beta_pi: &Rat) -> Rat {
    (beta_pi - alpha_pi) / rat::int(2)
}

/// Seeded rejection sampler: uniform rational points in the cube
/// [-1, 1]^n, rejected outside the closed unit ball, membership tested
/// exactly. Coordinates are dyadic with 31 random bits.
fn monte_carlo_volume(c: &ConeH, samples: u64, seed: u64) -> VolumeEstimate {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = c.dim;
    let denom = 1i64 << 30;
    let mut hits = 0u64;
    let mut accepted = 0u64;
    while accepted < samples {
        let x: QVec = (0..n)
            .map(|_| rat::rat(rng.gen_range(-denom..=denom), denom))
            .collect();
        if vecn::norm_sq(&x) > Rat::one() {
            continue;
        }
        accepted += 1;
        if c.contains(&x) {
            hits += 1;
        }
    }
    VolumeEstimate { hits, samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn v(dim: usize, rays: &[&[i64]]) -> ConeV {
        ConeV::from_rays(
            dim,
            &rays
                .iter()
                .map(|r| r.iter().map(|&x| int(x)).collect::<QVec>())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn q(xs: &[i64]) -> QVec {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn polar_of_single_ray() {
        let c = v(2, &[&[1, 0]]);
        let p = polar_cone_v(&c);
        assert_eq!(p.normals, vec![q(&[1, 0])]);
        assert!(p.contains(&q(&[-1, 5])));
        assert!(!p.contains(&q(&[1, 0])));
    }

    #[test]
    fn polar_of_full_space_is_origin() {
        let c = v(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]);
        let p = polar_cone_v(&c);
        assert!(p.contains(&q(&[0, 0])));
        for x in [q(&[1, 0]), q(&[-1, 0]), q(&[0, 1]), q(&[1, 1]), q(&[-2, 3])] {
            assert!(!p.contains(&x), "{x:?} should be outside");
        }
    }

    #[test]
    fn polar_of_nonneg_orthant() {
        let c = v(2, &[&[1, 0], &[0, 1]]);
        let p = polar_cone_v(&c);
        assert!(p.contains(&q(&[-1, -1])));
        assert!(p.contains(&q(&[-3, 0])));
        assert!(!p.contains(&q(&[1, -1])));
    }

    #[test]
    fn membership_basic() {
        let c = v(2, &[&[1, 0], &[0, 1]]);
        assert!(cone_membership(&q(&[1, 1]), &c).unwrap());
        assert!(!cone_membership(&q(&[-1, 0]), &c).unwrap());
        // lambda = (1, 1) solves (2,1) = 1*(1,1) + 1*(1,0)
        let c2 = v(2, &[&[1, 1], &[1, 0]]);
        assert!(cone_membership(&q(&[2, 1]), &c2).unwrap());
        assert!(cone_membership(&q(&[0, 0]), &ConeV::empty(2)).unwrap());
        assert!(!cone_membership(&q(&[1, 0]), &ConeV::empty(2)).unwrap());
        assert!(cone_membership(&q(&[0, 0]), &c).unwrap());
    }

    #[test]
    fn facets_of_orthant() {
        let c = v(2, &[&[1, 0], &[0, 1]]);
        let h = cone_facets(&c, DEFAULT_RAY_BUDGET).unwrap();
        let mut normals = h.normals.clone();
        normals.sort();
        assert_eq!(normals, vec![q(&[-1, 0]), q(&[0, -1])]);
    }

    #[test]
    fn facets_of_single_ray_in_plane() {
        let c = v(2, &[&[1, 0]]);
        let h = cone_facets(&c, DEFAULT_RAY_BUDGET).unwrap();
        let mut normals = h.normals.clone();
        normals.sort();
        assert_eq!(normals, vec![q(&[-1, 0]), q(&[0, -1]), q(&[0, 1])]);
        // Membership-equivalence sampling oracle on a grid.
        for a in -3..=3 {
            for b in -3..=3 {
                let x = q(&[a, b]);
                assert_eq!(h.contains(&x), cone_membership(&x, &c).unwrap(), "at {x:?}");
            }
        }
    }

    #[test]
    fn facets_of_trivial_cone() {
        let c = ConeV::empty(2);
        let h = cone_facets(&c, DEFAULT_RAY_BUDGET).unwrap();
        assert!(h.contains(&q(&[0, 0])));
        for a in -2..=2i64 {
            for b in -2..=2i64 {
                if (a, b) != (0, 0) {
                    assert!(!h.contains(&q(&[a, b])));
                }
            }
        }
    }

    #[test]
    fn conv_union_examples() {
        let c = conv_union_rays(&ConeV::empty(2), &q(&[1, 0])).unwrap();
        assert_eq!(c.rays, vec![q(&[1, 0])]);
        let quad = v(2, &[&[1, 0], &[0, 1]]);
        let same = conv_union_rays(&quad, &q(&[1, 1])).unwrap();
        assert_eq!(same.rays.len(), 2);
        let wide = conv_union_rays(&v(2, &[&[1, 0]]), &q(&[-1, 1])).unwrap();
        assert_eq!(wide.rays.len(), 2);
        assert!(conv_union_rays(&quad, &q(&[0, 0])).is_err());
    }

    #[test]
    fn conv_union_swallows_now_redundant_rays() {
        // Adding (1,0) and (0,1) then the two diagonals keeps only the
        // outermost pair once the hull closes over the upper half plane.
        let c = v(2, &[&[1, 1], &[-1, 1], &[1, 0], &[-1, 0]]);
        for x in [q(&[1, 1]), q(&[-1, 1]), q(&[0, 1]), q(&[5, 2])] {
            assert!(cone_membership(&x, &c).unwrap());
        }
        assert!(!cone_membership(&q(&[0, -1]), &c).unwrap());
    }

    #[test]
    fn exact_volumes() {
        let half = ConeH { dim: 2, normals: vec![q(&[1, 0])] };
        assert!(matches!(normalized_volume(&half, &VolumeMode::Exact).unwrap(),
            Volume::Exact(x) if x == int(1)));
        let quad = ConeH { dim: 2, normals: vec![q(&[-1, 0]), q(&[0, -1])] };
        assert!(matches!(normalized_volume(&quad, &VolumeMode::Exact).unwrap(),
            Volume::Exact(x) if x == rat(1, 2)));
        let full = ConeH::full(3);
        assert!(matches!(normalized_volume(&full, &VolumeMode::Exact).unwrap(),
            Volume::Exact(x) if x == int(2)));
        let skew = ConeH { dim: 2, normals: vec![q(&[1, 0]), q(&[1, 1])] };
        assert!(matches!(
            normalized_volume(&skew, &VolumeMode::Exact),
            Err(GeomError::UnsupportedShape)
        ));
    }

    #[test]
    fn sector_volume_formula() {
        assert_eq!(sector_volume(&int(0), &rat(1, 2)), rat(1, 4));
        assert_eq!(sector_volume(&int(0), &int(2)), int(1));
    }

    #[test]
    fn monte_carlo_quadrant() {
        let quad = ConeH { dim: 2, normals: vec![q(&[-1, 0]), q(&[0, -1])] };
        let out = normalized_volume(&quad, &VolumeMode::MonteCarlo { samples: 4000, seed: 1 });
        match out.unwrap() {
            Volume::Estimate(e) => {
                assert_eq!(e.samples, 4000);
                // True value 1/2; loose band for a seeded run.
                let v = vecn::rat_to_f64(&e.value());
                assert!((v - 0.5).abs() < 0.05, "estimate {v}");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn ray_budget_enforced() {
        let c = v(2, &[&[1, 0], &[0, 1], &[-1, 0]]);
        assert!(matches!(cone_facets(&c, 1), Err(GeomError::RayBudget { .. })));
    }

    fn random_cone(rng: &mut impl rand::Rng, dim: usize, max_rays: usize) -> ConeV {
        let k = rng.gen_range(0..=max_rays);
        let rays: Vec<QVec> = (0..k)
            .map(|_| (0..dim).map(|_| int(rng.gen_range(-3..=3))).collect())
            .collect();
        ConeV::from_rays(dim, &rays).unwrap()
    }

    #[test]
    fn bipolar_preserves_membership() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.gen_range(2..=4);
            let c = random_cone(&mut rng, n, 5);
            // Round-trip V -> H (facets) -> V (generators); for a closed
            // convex cone this is the bipolar and must match c exactly.
            let cc = generators(&cone_facets(&c, 256).unwrap(), 256).unwrap();
            for _ in 0..100 {
                let x: QVec = (0..n).map(|_| int(rng.gen_range(-4..=4))).collect();
                // polar of polar via facet form directly:
                let want = cone_membership(&x, &c).unwrap();
                let got = cone_membership(&x, &cc).unwrap();
                assert_eq!(want, got, "bipolar mismatch at {x:?} for {:?}", c.rays);
            }
        }
    }

    #[test]
    fn polar_of_intersection_is_hull_of_polars() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..15 {
            let n = rng.gen_range(2..=3);
            let k = rng.gen_range(1..=3);
            // Random H-cones C_i; polar(intersection C_i) should equal
            // conv(union polar(C_i)) = cone of all the normals.
            let cones: Vec<ConeH> = (0..k)
                .map(|_| {
                    let h = rng.gen_range(1..=2);
                    let normals = (0..h)
                        .filter_map(|_| {
                            let v: QVec = (0..n).map(|_| int(rng.gen_range(-2..=2))).collect();
                            vecn::canonicalize_ray(&v)
                        })
                        .collect();
                    ConeH { dim: n, normals }
                })
                .collect();
            let inter = ConeH {
                dim: n,
                normals: cones.iter().flat_map(|c| c.normals.clone()).collect(),
            };
            // polar of the intersection = facets of the generator form.
            let inter_gens = generators(&inter, 256).unwrap();
            let polar_of_inter = cone_facets(&inter_gens, 256).unwrap();
            let hull_of_polars =
                ConeV::from_rays(n, &inter.normals).unwrap();
            for _ in 0..100 {
                let x: QVec = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
                // Membership in the polar-of-intersection (as an H cone
                // whose normals are inter's generators).
                let lhs = inter_gens.rays.iter().all(|r| !vecn::dot(r, &x).is_positive());
                let rhs = cone_membership(&x, &hull_of_polars).unwrap();
                assert_eq!(lhs, rhs, "lemma mismatch at {x:?}");
                let _ = &polar_of_inter;
            }
        }
    }

    #[test]
    fn facets_agree_with_membership() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(2..=3);
            let c = random_cone(&mut rng, n, 4);
            let h = cone_facets(&c, 256).unwrap();
            for _ in 0..60 {
                let x: QVec = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
                assert_eq!(
                    h.contains(&x),
                    cone_membership(&x, &c).unwrap(),
                    "facet/membership mismatch at {x:?} for rays {:?}",
                    c.rays
                );
            }
        }
    }

    #[test]
    fn conv_union_monotone_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for _ in 0..30 {
            let n = rng.gen_range(2..=3);
            let c = random_cone(&mut rng, n, 4);
            let r: QVec = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
            if vecn::is_zero(&r) {
                continue;
            }
            let c2 = conv_union_rays(&c, &r).unwrap();
            // monotone: old members stay members; the new ray is a member
            for _ in 0..40 {
                let x: QVec = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
                if cone_membership(&x, &c).unwrap() {
                    assert!(cone_membership(&x, &c2).unwrap());
                }
            }
            assert!(cone_membership(&r, &c2).unwrap());
            // idempotent on members
            let c3 = conv_union_rays(&c2, &r).unwrap();
            assert_eq!(c2, c3);
        }
    }
}
