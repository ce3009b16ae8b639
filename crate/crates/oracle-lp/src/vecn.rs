//! Small exact-rational vector helpers shared by every module.

use crate::rat::Rat;
use num::{BigInt, Integer, One, Signed, Zero};

pub type QVec = Vec<Rat>;

pub fn zeros(n: usize) -> QVec {
    vec![Rat::zero(); n]
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rat], s: &Rat) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Rat]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn norm_sq(a: &[Rat]) -> Rat {
    dot(a, a)
}

pub fn is_zero(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// 2D cross product a.x*b.y - a.y*b.x of the first two coordinates.
pub fn cross2(a: &[Rat], b: &[Rat]) -> Rat {
    &a[0] * &b[1] - &a[1] * &b[0]
}

pub fn unit(n: usize, i: usize) -> QVec {
    let mut v = zeros(n);
    v[i] = Rat::from_integer(1.into());
    v
}

/// Scales a nonzero vector to the coprime integer vector with the same
/// direction (denominators cleared, common content divided out, signs
/// preserved). Canonical form for rays; keeping stored rays and normals
/// integer makes the sign tests downstream run without any gcd reduction
/// of fractions.
pub fn canonicalize_ray(a: &[Rat]) -> Option<QVec> {
    if a.iter().all(|x| x.is_zero()) {
        return None;
    }
    let mut l = BigInt::one();
    for x in a {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = a.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let mut g = BigInt::zero();
    for v in &ints {
        g = g.gcd(v);
    }
    Some(ints.into_iter().map(|v| Rat::from_integer(v / &g)).collect())
}

/// True when b is a positive multiple of a.
pub fn same_ray(a: &[Rat], b: &[Rat]) -> bool {
    match (canonicalize_ray(a), canonicalize_ray(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

pub fn to_f64(a: &[Rat]) -> Vec<f64> {
    a.iter().map(|x| rat_to_f64(x)).collect()
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
