//! Exact rational scalars and the handful of number-theoretic helpers the
//! geometry layer needs (dyadic rounding, integer square roots, square-free
//! decomposition).

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

pub type Rat = BigRational;

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Number of bits in the binary encoding of a rational (numerator plus
/// denominator plus sign). Bit sizes of instances are sums of these.
pub fn bit_size(r: &Rat) -> u64 {
    let nbits = r.numer().abs().bits().max(1);
    let dbits = r.denom().bits().max(1);
    nbits + dbits + 1
}

/// 2^e as a rational, for possibly negative e.
pub fn pow2(e: i64) -> Rat {
    let one = BigInt::one();
    if e >= 0 {
        Rat::from_integer(one << e as usize)
    } else {
        Rat::new(one.clone(), one << (-e) as usize)
    }
}

/// Parses the "p/q" or "p" textual form used in instance files.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(p))
        }
    }
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floor of the integer square root.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative");
    n.sqrt()
}

/// Rational approximation of sqrt(x) with relative error about 2^-bits,
/// rounding direction unspecified. x must be nonnegative.
pub fn sqrt_approx(x: &Rat, bits: u64) -> Rat {
    assert!(!x.is_negative(), "sqrt of negative");
    if x.is_zero() {
        return Rat::zero();
    }
    // sqrt(p/q) = sqrt(p*q)/q; scale by 4^bits to keep the requested bits.
    let scale = BigInt::one() << (2 * bits as usize);
    let scaled = (x.numer() * x.denom()) * &scale;
    let root = isqrt(&scaled);
    Rat::new(root, x.denom() * (BigInt::one() << bits as usize))
}

/// Best rational approximation with denominator at most `denom_bound`,
/// computed from the continued fraction expansion (convergents and the
/// best semiconvergent).
pub fn best_approx(x: &Rat, denom_bound: &BigInt) -> Rat {
    assert!(denom_bound >= &BigInt::one());
    if x.denom() <= denom_bound {
        return x.clone();
    }
    // Convergents p/q of the continued fraction of x.
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (x.numer().div_floor(x.denom()), BigInt::one());
    let mut frac = x - Rat::from_integer(p1.clone());
    while !frac.is_zero() {
        let inv = frac.recip();
        let a = inv.numer().div_floor(inv.denom());
        frac = inv - Rat::from_integer(a.clone());
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > *denom_bound {
            // Best semiconvergent: largest k with q0 + k*q1 <= bound.
            let k = (denom_bound - &q0).div_floor(&q1);
            let ps = &p0 + &k * &p1;
            let qs = &q0 + &k * &q1;
            let semi = Rat::new(ps, qs.clone());
            let conv = Rat::new(p1.clone(), q1.clone());
            // The semiconvergent only beats the convergent when k is at
            // least half the next partial quotient; compare directly.
            return if qs >= BigInt::one() && (x - &semi).abs() < (x - &conv).abs() {
                semi
            } else {
                conv
            };
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    Rat::new(p1, q1)
}

/// Rounds to the nearest multiple of 2^-bits.
pub fn round_dyadic(x: &Rat, bits: u64) -> Rat {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * Rat::from_integer(scale.clone());
    let rounded = (scaled + rat(1, 2)).floor();
    rounded / Rat::from_integer(scale)
}

/// Writes n = s^2 * f with f square-free. Returns (s, f). Intended for the
/// desk-scale integers arising from squared norms.
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    assert!(n.is_positive());
    let mut s = BigInt::one();
    let mut f = BigInt::one();
    let mut rem = n.clone();
    let mut p = BigInt::from(2u32);
    while &p * &p * &p <= rem {
        let mut mult = 0u32;
        while (&rem % &p).is_zero() {
            rem /= &p;
            mult += 1;
        }
        if mult > 0 {
            for _ in 0..mult / 2 {
                s *= &p;
            }
            if mult % 2 == 1 {
                f *= &p;
            }
        }
        p += 1;
    }
    // rem is now 1, a prime, a prime square, or a product of two primes.
    let r = isqrt(&rem);
    if &r * &r == rem {
        s *= r;
    } else {
        f *= rem;
    }
    (s, f)
}

/// Exact test for sum_i c_i * sqrt(q_i) == 0 with q_i > 0 rational. Uses
/// linear independence of square roots of distinct square-free integers.
pub fn sqrt_combination_is_zero(terms: &[(Rat, Rat)]) -> bool {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<BigInt, Rat> = BTreeMap::new();
    for (c, q) in terms {
        if c.is_zero() {
            continue;
        }
        assert!(q.is_positive(), "sqrt of nonpositive in combination");
        // sqrt(p/q) = sqrt(p*q)/q = (s/q) * sqrt(f)
        let (s, f) = squarefree_decompose(&(q.numer() * q.denom()));
        let coeff = c * Rat::new(s, q.denom().clone());
        *groups.entry(f).or_insert_with(Rat::zero) += coeff;
    }
    groups.values().all(|v| v.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0", "-12"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
        assert!(parse_rat("1/0").is_none());
    }

    #[test]
    fn best_approx_pi() {
        // Enumeration oracle: among all q <= 120, 355/113 minimizes the error.
        let x = Rat::new(BigInt::from(314159265u64), BigInt::from(100000000u64));
        let mut best = (Rat::zero(), None::<Rat>);
        for q in 1..=120i64 {
            let p = (&x * int(q) + rat(1, 2)).floor();
            let cand = p / int(q);
            let err = (&x - &cand).abs();
            if best.1.is_none() || err < best.0 {
                best = (err, Some(cand));
            }
        }
        assert_eq!(best.1.unwrap(), rat(355, 113));
        assert_eq!(best_approx(&x, &BigInt::from(120)), rat(355, 113));
    }

    #[test]
    fn best_approx_simple() {
        assert_eq!(best_approx(&rat(1, 2), &BigInt::from(10)), rat(1, 2));
        let x = Rat::new(BigInt::from(3333334u64), BigInt::from(10000000u64));
        assert_eq!(best_approx(&x, &BigInt::from(10)), rat(1, 3));
    }

    #[test]
    fn squarefree() {
        let (s, f) = squarefree_decompose(&BigInt::from(72));
        assert_eq!((s, f), (BigInt::from(6), BigInt::from(2)));
        let (s, f) = squarefree_decompose(&BigInt::from(49));
        assert_eq!((s, f), (BigInt::from(7), BigInt::from(1)));
    }

    #[test]
    fn sqrt_combination() {
        // sqrt(8) - 2 sqrt(2) = 0
        assert!(sqrt_combination_is_zero(&[(int(1), int(8)), (int(-2), int(2))]));
        // sqrt(2) + sqrt(3) != 0
        assert!(!sqrt_combination_is_zero(&[(int(1), int(2)), (int(1), int(3))]));
    }

    #[test]
    fn sqrt_approx_close() {
        let two = int(2);
        let s = sqrt_approx(&two, 60);
        let err = (&s * &s - two).abs();
        assert!(err < pow2(-55));
    }
}
