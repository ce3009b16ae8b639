//! Exact LP feasibility and optimization over rationals.
//!
//! The solver is a dense two-phase tableau simplex with Bland's rule, which
//! terminates on every input. Strict systems Ax > b are decided by slack
//! maximization, never by epsilon perturbation.

use crate::rat::{self, Rat};
use crate::vecn::{self, QVec};
use num::{BigInt, One, Signed, Zero};

#[derive(Debug, Clone, thiserror::Error)]
pub enum LpError {
    #[error("simplex iteration cap exceeded (possible cycling)")]
    IterationLimit,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite floating input")]
    NonFinite,
    #[error("row {0} of the constraint matrix is zero")]
    ZeroRow(usize),
    #[error("rows are not unit-normalized and normalization was required")]
    NonUnitRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: QVec,
    pub rel: Rel,
    pub rhs: Rat,
}

impl Constraint {
    pub fn le(coeffs: QVec, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Rel::Le, rhs }
    }
    pub fn eq(coeffs: QVec, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Rel::Eq, rhs }
    }
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: QVec, value: Rat },
    Infeasible,
    Unbounded,
}

const ITER_CAP: usize = 200_000;

/// Maximizes `obj . x` over free variables x subject to mixed Le/Eq
/// constraints. Bland's rule guarantees termination.
pub fn maximize(obj: &[Rat], constraints: &[Constraint]) -> Result<LpOutcome, LpError> {
    let n = obj.len();
    for c in constraints {
        if c.coeffs.len() != n {
            return Err(LpError::DimensionMismatch { expected: n, got: c.coeffs.len() });
        }
    }
    let m = constraints.len();
    if m == 0 {
        // Unconstrained: bounded only for a zero objective.
        return Ok(if obj.iter().all(|c| c.is_zero()) {
            LpOutcome::Optimal { x: vecn::zeros(n), value: Rat::zero() }
        } else {
            LpOutcome::Unbounded
        });
    }

    // Standard form: x_j = p_j - q_j with p, q >= 0, slack per Le row,
    // artificial per row, rhs made nonnegative by row negation.
    let n_split = 2 * n;
    let n_slack = constraints.iter().filter(|c| c.rel == Rel::Le).count();
    let nv = n_split + n_slack + m; // artificials occupy the tail
    let art0 = n_split + n_slack;

    let mut tab: Vec<QVec> = Vec::with_capacity(m);
    let mut rhs: QVec = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut slack_idx = 0usize;
    for (i, c) in constraints.iter().enumerate() {
        let flip = c.rhs.is_negative();
        let sgn = if flip { -Rat::one() } else { Rat::one() };
        let mut row = vecn::zeros(nv);
        for j in 0..n {
            row[2 * j] = &c.coeffs[j] * &sgn;
            row[2 * j + 1] = -&row[2 * j];
        }
        if c.rel == Rel::Le {
            row[n_split + slack_idx] = sgn.clone();
            slack_idx += 1;
        }
        row[art0 + i] = Rat::one();
        tab.push(row);
        rhs.push(&c.rhs * &sgn);
        basis.push(art0 + i);
    }

    // Phase 1: maximize -(sum of artificials).
    let mut phase1_obj = vecn::zeros(nv);
    for j in art0..nv {
        phase1_obj[j] = -Rat::one();
    }
    let mut iters = 0usize;
    let status = simplex_loop(&mut tab, &mut rhs, &mut basis, &phase1_obj, nv, &mut iters)?;
    debug_assert!(!matches!(status, LoopStatus::Unbounded), "phase 1 is bounded");
    let p1_value = objective_value(&rhs, &basis, &phase1_obj);
    if p1_value.is_negative() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive artificials out of the basis where possible; rows that cannot
    // pivot are redundant and get neutralized.
    for i in 0..m {
        if basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| !tab[i][j].is_zero()) {
                pivot(&mut tab, &mut rhs, &mut basis, i, j);
            }
        }
    }

    // Phase 2 with the real objective over split variables; artificials are
    // forbidden from entering.
    let mut phase2_obj = vecn::zeros(nv);
    for j in 0..n {
        phase2_obj[2 * j] = obj[j].clone();
        phase2_obj[2 * j + 1] = -obj[j].clone();
    }
    let status = simplex_loop(&mut tab, &mut rhs, &mut basis, &phase2_obj, art0, &mut iters)?;
    if matches!(status, LoopStatus::Unbounded) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vecn::zeros(n);
    for (i, &b) in basis.iter().enumerate() {
        if b < n_split {
            let j = b / 2;
            if b % 2 == 0 {
                x[j] += &rhs[i];
            } else {
                x[j] -= &rhs[i];
            }
        }
    }
    let value = vecn::dot(obj, &x);
    Ok(LpOutcome::Optimal { x, value })
}

enum LoopStatus {
    Optimal,
    Unbounded,
}

fn objective_value(rhs: &[Rat], basis: &[usize], obj: &[Rat]) -> Rat {
    basis.iter().zip(rhs).map(|(&b, v)| &obj[b] * v).sum()
}

fn simplex_loop(
    tab: &mut [QVec],
    rhs: &mut [Rat],
    basis: &mut [usize],
    obj: &[Rat],
    enter_limit: usize,
    iters: &mut usize,
) -> Result<LoopStatus, LpError> {
    let m = tab.len();
    loop {
        *iters += 1;
        if *iters > ITER_CAP {
            return Err(LpError::IterationLimit);
        }
        // Reduced costs priced against the current basis; Bland: smallest
        // index with positive reduced cost enters.
        let mut entering = None;
        'cols: for j in 0..enter_limit {
            if basis.contains(&j) {
                continue;
            }
            let mut red = obj[j].clone();
            for i in 0..m {
                if !tab[i][j].is_zero() {
                    red -= &obj[basis[i]] * &tab[i][j];
                }
            }
            if red.is_positive() {
                entering = Some(j);
                break 'cols;
            }
        }
        let Some(j) = entering else {
            return Ok(LoopStatus::Optimal);
        };
        // Ratio test; Bland: among minimal ratios pick the row whose basic
        // variable has the smallest index.
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..m {
            if tab[i][j].is_positive() {
                let ratio = &rhs[i] / &tab[i][j];
                match &leave {
                    None => leave = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < *br || (ratio == *br && basis[i] < basis[*bi]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((i, _)) = leave else {
            return Ok(LoopStatus::Unbounded);
        };
        pivot(tab, rhs, basis, i, j);
    }
}

fn pivot(tab: &mut [QVec], rhs: &mut [Rat], basis: &mut [usize], pr: usize, pc: usize) {
    let m = tab.len();
    let piv = tab[pr][pc].clone();
    let inv = piv.recip();
    for v in tab[pr].iter_mut() {
        *v *= &inv;
    }
    rhs[pr] *= &inv;
    for i in 0..m {
        if i != pr && !tab[i][pc].is_zero() {
            let f = tab[i][pc].clone();
            for j in 0..tab[i].len() {
                let d = &tab[pr][j] * &f;
                tab[i][j] -= d;
            }
            let d = &rhs[pr] * &f;
            rhs[i] -= d;
        }
    }
    basis[pr] = pc;
}

/// Outcome of a strict feasibility question for a system a_i . x > b_i.
#[derive(Debug, Clone)]
pub enum StrictOutcome {
    Feasible(QVec),
    Infeasible,
}

impl StrictOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, StrictOutcome::Feasible(_))
    }
}

/// Decides the strict system { a_i . x > b_i } exactly by maximizing the
/// common slack t (capped at 1 so the LP stays bounded). Feasible iff the
/// optimal slack is positive. The empty system is feasible at the origin.
pub fn lp_feasible_strict(rows: &[(QVec, Rat)]) -> Result<StrictOutcome, LpError> {
    if rows.is_empty() {
        return Ok(StrictOutcome::Feasible(vec![]));
    }
    let n = rows[0].0.len();
    // Variables (x_1..x_n, t); maximize t subject to -a.x + t <= -b, t <= 1.
    let mut cons = Vec::with_capacity(rows.len() + 1);
    for (a, b) in rows {
        if a.len() != n {
            return Err(LpError::DimensionMismatch { expected: n, got: a.len() });
        }
        let mut c = vecn::neg(a);
        c.push(Rat::one());
        cons.push(Constraint::le(c, -b));
    }
    let mut cap = vecn::zeros(n);
    cap.push(Rat::one());
    cons.push(Constraint::le(cap, Rat::one()));
    let mut obj = vecn::zeros(n);
    obj.push(Rat::one());
    match maximize(&obj, &cons)? {
        LpOutcome::Optimal { x, value } => {
            if value.is_positive() {
                Ok(StrictOutcome::Feasible(x[..n].to_vec()))
            } else {
                Ok(StrictOutcome::Infeasible)
            }
        }
        LpOutcome::Infeasible => Ok(StrictOutcome::Infeasible),
        LpOutcome::Unbounded => unreachable!("slack is capped"),
    }
}

/// Strict feasibility in the presence of extra weak/equality side
/// constraints; the slack applies to the strict rows only.
pub fn lp_feasible_strict_with(
    strict_rows: &[(QVec, Rat)],
    side: &[Constraint],
) -> Result<StrictOutcome, LpError> {
    let n = strict_rows
        .first()
        .map(|r| r.0.len())
        .or_else(|| side.first().map(|c| c.coeffs.len()))
        .unwrap_or(0);
    let mut cons = Vec::new();
    for (a, b) in strict_rows {
        let mut c = vecn::neg(a);
        c.push(Rat::one());
        cons.push(Constraint::le(c, -b));
    }
    for c in side {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(Rat::zero());
        cons.push(Constraint { coeffs, rel: c.rel, rhs: c.rhs.clone() });
    }
    let mut cap = vecn::zeros(n);
    cap.push(Rat::one());
    cons.push(Constraint::le(cap, Rat::one()));
    let mut obj = vecn::zeros(n);
    obj.push(Rat::one());
    match maximize(&obj, &cons)? {
        LpOutcome::Optimal { x, value } => {
            if value.is_positive() {
                Ok(StrictOutcome::Feasible(x[..n].to_vec()))
            } else {
                Ok(StrictOutcome::Infeasible)
            }
        }
        LpOutcome::Infeasible => Ok(StrictOutcome::Infeasible),
        LpOutcome::Unbounded => unreachable!("slack is capped"),
    }
}

/// A hidden or known constraint system A x > b with its size bound.
/// JSON (de)serialization lives in the instance module, which writes
/// rationals in "p/q" text form rather than as floats.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub m: usize,
    pub n: usize,
    /// Binary size bound of (A, b).
    pub l: u64,
    pub a: Vec<QVec>,
    pub b: QVec,
}

impl LpInstance {
    pub fn new(a: Vec<QVec>, b: QVec) -> Self {
        let m = a.len();
        let n = a.first().map(|r| r.len()).unwrap_or(0);
        let l = a
            .iter()
            .flatten()
            .chain(b.iter())
            .map(rat::bit_size)
            .sum::<u64>()
            .max(1);
        LpInstance { m, n, l, a, b }
    }

    pub fn rows(&self) -> Vec<(QVec, Rat)> {
        self.a.iter().cloned().zip(self.b.iter().cloned()).collect()
    }

    /// Indices of constraints violated (a_i . x <= b_i) at x.
    pub fn violated(&self, x: &[Rat]) -> Vec<usize> {
        (0..self.m)
            .filter(|&i| vecn::dot(&self.a[i], x) <= self.b[i])
            .collect()
    }

    pub fn satisfies_strict(&self, x: &[Rat]) -> bool {
        self.violated(x).is_empty()
    }
}

/// Value and minimizer of max_i (b_i - a_i . x), with the support set of
/// indices attaining the maximum at the minimizer.
#[derive(Debug, Clone)]
pub enum ExtremeResult {
    NegInfinity,
    Finite { d: Rat, p: QVec, support: Vec<usize> },
}

/// Computes min_x max_i (b_i - a_i . x). When `require_unit_rows` is set,
/// rows must have exact unit norm so the values are Euclidean distances.
pub fn d_extreme(inst: &LpInstance, require_unit_rows: bool) -> Result<ExtremeResult, LpError> {
    if require_unit_rows {
        for row in &inst.a {
            if vecn::norm_sq(row) != Rat::one() {
                return Err(LpError::NonUnitRows);
            }
        }
    }
    // Variables (x, z); minimize z subject to b_i - a_i.x <= z.
    let n = inst.n;
    let mut cons = Vec::with_capacity(inst.m);
    for i in 0..inst.m {
        let mut c = vecn::neg(&inst.a[i]);
        c.push(-Rat::one());
        cons.push(Constraint::le(c, -&inst.b[i]));
    }
    let mut obj = vecn::zeros(n);
    obj.push(-Rat::one());
    match maximize(&obj, &cons)? {
        LpOutcome::Unbounded => Ok(ExtremeResult::NegInfinity),
        LpOutcome::Infeasible => unreachable!("epigraph system is always feasible"),
        LpOutcome::Optimal { x, .. } => {
            let p = x[..n].to_vec();
            let d = (0..inst.m)
                .map(|i| &inst.b[i] - vecn::dot(&inst.a[i], &p))
                .max()
                .expect("m >= 1");
            let support = (0..inst.m)
                .filter(|&i| &inst.b[i] - vecn::dot(&inst.a[i], &p) == d)
                .collect();
            Ok(ExtremeResult::Finite { d, p, support })
        }
    }
}

/// Per-coordinate best rational approximation with denominators bounded by
/// `denom_bound`, via continued fractions.
pub fn round_to_precision(xs: &[f64], denom_bound: &BigInt) -> Result<QVec, LpError> {
    xs.iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(LpError::NonFinite);
            }
            let r = Rat::from_float(x).ok_or(LpError::NonFinite)?;
            Ok(rat::best_approx(&r, denom_bound))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};
    use num::BigInt;

    #[test]
    fn strict_1d() {
        // {x > 0, -x > -1} feasible at 1/2
        let out = lp_feasible_strict(&[(vec![int(1)], int(0)), (vec![int(-1)], int(-1))]).unwrap();
        match out {
            StrictOutcome::Feasible(x) => assert_eq!(x, vec![rat(1, 2)]),
            _ => panic!("expected feasible"),
        }
        // {x > 0, -x > 0} infeasible
        let out = lp_feasible_strict(&[(vec![int(1)], int(0)), (vec![int(-1)], int(0))]).unwrap();
        assert!(!out.is_feasible());
    }

    #[test]
    fn empty_system_feasible_at_origin() {
        assert!(lp_feasible_strict(&[]).unwrap().is_feasible());
    }

    #[test]
    fn d_extreme_1d_symmetric() {
        // x > 1 and x < 0: d = 1/2 at p = 1/2, support {0, 1}
        let inst = LpInstance::new(vec![vec![int(1)], vec![int(-1)]], vec![int(1), int(0)]);
        match d_extreme(&inst, true).unwrap() {
            ExtremeResult::Finite { d, p, support } => {
                assert_eq!(d, rat(1, 2));
                assert_eq!(p, vec![rat(1, 2)]);
                assert_eq!(support, vec![0, 1]);
            }
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn d_extreme_unbounded() {
        // x > 0 alone: value unbounded below
        let inst = LpInstance::new(vec![vec![int(1)]], vec![int(0)]);
        assert!(matches!(d_extreme(&inst, true).unwrap(), ExtremeResult::NegInfinity));
    }

    #[test]
    fn d_extreme_2d_degenerate_direction() {
        // Rows (1,0), (-1,0), (0,1); b = (1,0,0): d = 1/2, support {0,1}.
        let inst = LpInstance::new(
            vec![vec![int(1), int(0)], vec![int(-1), int(0)], vec![int(0), int(1)]],
            vec![int(1), int(0), int(0)],
        );
        match d_extreme(&inst, true).unwrap() {
            ExtremeResult::Finite { d, p, support } => {
                assert_eq!(d, rat(1, 2));
                assert_eq!(p[0], rat(1, 2));
                // returned witness must attain the value exactly
                assert!(support.contains(&0) && support.contains(&1));
            }
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn d_extreme_grid_oracle() {
        // Brute-force grid minimization of max_i (b_i - a_i.x) as the
        // independent check on a 2D infeasible system.
        let inst = LpInstance::new(
            vec![vec![int(1), int(0)], vec![int(-1), int(0)], vec![int(0), int(1)], vec![int(0), int(-1)]],
            vec![int(2), int(0), int(2), int(0)],
        );
        let mut best = int(1000);
        for i in -40..=40 {
            for j in -40..=40 {
                let x = vec![rat(i, 10), rat(j, 10)];
                let v = (0..inst.m)
                    .map(|k| &inst.b[k] - vecn::dot(&inst.a[k], &x))
                    .max()
                    .unwrap();
                if v < best {
                    best = v;
                }
            }
        }
        match d_extreme(&inst, true).unwrap() {
            ExtremeResult::Finite { d, .. } => assert_eq!(d, best),
            _ => panic!(),
        }
    }

    #[test]
    fn maximize_simple() {
        // max x + y st x <= 2, y <= 3
        let out = maximize(
            &[int(1), int(1)],
            &[
                Constraint::le(vec![int(1), int(0)], int(2)),
                Constraint::le(vec![int(0), int(1)], int(3)),
            ],
        )
        .unwrap();
        match out {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(5)),
            _ => panic!(),
        }
    }

    #[test]
    fn maximize_unbounded_and_infeasible() {
        let out = maximize(&[int(1)], &[Constraint::le(vec![int(-1)], int(0))]).unwrap();
        assert!(matches!(out, LpOutcome::Unbounded));
        let out = maximize(
            &[int(0)],
            &[
                Constraint::le(vec![int(1)], int(0)),
                Constraint::le(vec![int(-1)], int(-1)),
            ],
        )
        .unwrap();
        assert!(matches!(out, LpOutcome::Infeasible));
    }

    #[test]
    fn equality_constraints() {
        // max x st x + y = 1, y >= 0 (as -y <= 0), x <= 5
        let out = maximize(
            &[int(1), int(0)],
            &[
                Constraint::eq(vec![int(1), int(1)], int(1)),
                Constraint::le(vec![int(0), int(-1)], int(0)),
                Constraint::le(vec![int(1), int(0)], int(5)),
            ],
        )
        .unwrap();
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, int(1));
                assert_eq!(&x[0] + &x[1], int(1));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn round_to_precision_examples() {
        let out = round_to_precision(&[0.5], &BigInt::from(10)).unwrap();
        assert_eq!(out, vec![rat(1, 2)]);
        let out = round_to_precision(&[0.3333334], &BigInt::from(10)).unwrap();
        assert_eq!(out, vec![rat(1, 3)]);
        let out = round_to_precision(&[3.14159265], &BigInt::from(120)).unwrap();
        assert_eq!(out, vec![rat(355, 113)]);
        assert!(round_to_precision(&[f64::NAN], &BigInt::from(10)).is_err());
    }

    /// Fourier-Motzkin elimination oracle for strict systems; test-only.
    fn fm_strict_feasible(rows: &[(QVec, Rat)]) -> bool {
        fn rec(rows: Vec<(QVec, Rat)>, n: usize) -> bool {
            if n == 0 {
                // All constraints are 0 > b_i.
                return rows.iter().all(|(_, b)| b.is_negative());
            }
            let k = n - 1;
            let mut lower = Vec::new(); // x_k > bound
            let mut upper = Vec::new(); // x_k < bound
            let mut rest = Vec::new();
            for (a, b) in rows {
                let c = a[k].clone();
                let mut red = a[..k].to_vec();
                if c.is_zero() {
                    rest.push((red, b));
                } else {
                    // a'.x' + c x_k > b  =>  x_k >/(or </) (b - a'.x')/c
                    let inv = c.recip();
                    red = vecn::scale(&red, &-&inv);
                    let bb = &b * &inv;
                    if inv.is_positive() {
                        lower.push((red, bb)); // x_k > bb + red.x'
                    } else {
                        upper.push((red, bb));
                    }
                }
            }
            // Combine each (lower, upper) pair: upper bound > lower bound.
            for (la, lb) in &lower {
                for (ua, ub) in &upper {
                    let a = vecn::sub(ua, la);
                    let b = lb - ub;
                    rest.push((a, b));
                }
            }
            rec(rest, k)
        }
        if rows.is_empty() {
            return true;
        }
        let n = rows[0].0.len();
        rec(rows.to_vec(), n)
    }

    #[test]
    fn agrees_with_fourier_motzkin() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=5);
            let rows: Vec<(QVec, Rat)> = (0..m)
                .map(|_| {
                    let a: QVec = (0..n).map(|_| int(rng.gen_range(-4..=4))).collect();
                    (a, int(rng.gen_range(-4..=4)))
                })
                .collect();
            let lp = lp_feasible_strict(&rows).unwrap().is_feasible();
            let fm = fm_strict_feasible(&rows);
            assert_eq!(lp, fm, "disagreement on {:?}", rows);
        }
    }

    #[test]
    fn no_cycling_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=8);
            let rows: Vec<(QVec, Rat)> = (0..m)
                .map(|_| {
                    let a: QVec = (0..n).map(|_| int(rng.gen_range(-65535..=65535))).collect();
                    (a, int(rng.gen_range(-65535..=65535)))
                })
                .collect();
            // The iteration cap inside maximize() would error on cycling.
            lp_feasible_strict(&rows).unwrap();
        }
    }

    #[test]
    fn solution_bit_bound_on_feasible_system() {
        // A feasible 3x2 system: components of the returned point stay
        // within the (nN)^n numerator/denominator bound.
        let rows = vec![
            (vec![int(3), int(1)], int(2)),
            (vec![int(-1), int(4)], int(-7)),
            (vec![int(2), int(-5)], int(-9)),
        ];
        let n = 2u32;
        let cap = BigInt::from(2 * 9u64).pow(n); // (nN)^n with N = 9
        match lp_feasible_strict(&rows).unwrap() {
            StrictOutcome::Feasible(x) => {
                for c in &x {
                    assert!(c.numer().abs() <= cap && c.denom() <= &cap, "oversized {:?}", c);
                }
            }
            _ => panic!("expected feasible"),
        }
    }
}
