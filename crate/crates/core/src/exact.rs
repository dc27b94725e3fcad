//! Exact scalar arithmetic.
//!
//! Every structure constant of the algebra lives in ℚ(√q, √(q+1)): the
//! convolution recurrence is integral, the normalized generator is
//! T′(𝔭) = q^{−1/2}T(𝔭), and norms of cell functions involve √((q+1)/q).
//! [`QExt`] represents that field with four rational coordinates
//! (a, b, c, d) ↦ a + b√q + c√(q+1) + d√(q(q+1)).
//!
//! When q or q+1 is itself a perfect square (q = 3, 4, 8, 9, …) the naive
//! 4-coordinate ring has zero divisors, so the constructor folds square
//! radicands into the rational coordinates; tuples are therefore canonical
//! representatives of the actual number field for every q ≥ 2, and every
//! nonzero element is invertible.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::Error;

pub type Rational = num_rational::BigRational;

/// `n` as an exact rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` reduced, positive denominator. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// q^k as an exact rational, k possibly negative.
pub fn rat_pow(q: u64, k: i64) -> Rational {
    let p = BigInt::from(q).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

fn exact_sqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&c| c.checked_mul(c) == Some(n))
}

/// Element of ℚ(√q, √(q+1)), the coefficient field of the algebra at
/// residue cardinality `q`.
///
/// Coordinates are kept canonical: if q (resp. q+1) is a perfect square its
/// radical is folded away, so equality of tuples is equality of numbers.
/// Arithmetic between different `q` contexts panics.
#[derive(Clone, PartialEq, Eq)]
pub struct QExt {
    q: u64,
    c: [Rational; 4],
}

impl QExt {
    /// a + b√q + c√(q+1) + d√(q(q+1)), canonicalized.
    pub fn new(q: u64, a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        assert!(q >= 2, "q must be at least 2");
        let (mut a, mut b, mut c, mut d) = (a, b, c, d);
        if let Some(k) = exact_sqrt(q) {
            // √q = k: b·√q → a, d·√q·√(q+1) → c
            let k = rat_int(k as i64);
            a += &k * &b;
            c += &k * &d;
            b = Rational::zero();
            d = Rational::zero();
        }
        if let Some(k) = exact_sqrt(q + 1) {
            // √(q+1) = k: c·√(q+1) → a, d·√q·√(q+1) → b
            let k = rat_int(k as i64);
            a += &k * &c;
            b += &k * &d;
            c = Rational::zero();
            d = Rational::zero();
        }
        QExt { q, c: [a, b, c, d] }
    }

    pub fn from_rational(q: u64, a: Rational) -> Self {
        QExt::new(q, a, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn from_int(q: u64, n: i64) -> Self {
        QExt::from_rational(q, rat_int(n))
    }

    pub fn zero(q: u64) -> Self {
        QExt::from_int(q, 0)
    }

    pub fn one(q: u64) -> Self {
        QExt::from_int(q, 1)
    }

    pub fn sqrt_q(q: u64) -> Self {
        QExt::new(
            q,
            Rational::zero(),
            Rational::one(),
            Rational::zero(),
            Rational::zero(),
        )
    }

    pub fn sqrt_q_plus_one(q: u64) -> Self {
        QExt::new(
            q,
            Rational::zero(),
            Rational::zero(),
            Rational::one(),
            Rational::zero(),
        )
    }

    /// √((q+1)/q) = √(q(q+1))/q — the norm of every cell function beyond the unit.
    pub fn sqrt_ratio(q: u64) -> Self {
        QExt::new(
            q,
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
            rat(1, q as i64),
        )
    }

    /// q^{k/2} for any integer k (negative allowed).
    pub fn q_half_pow(q: u64, k: i64) -> Self {
        let whole = rat_pow(q, k.div_euclid(2));
        if k.rem_euclid(2) == 0 {
            QExt::from_rational(q, whole)
        } else {
            QExt::sqrt_q(q).scale(&whole)
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coords(&self) -> &[Rational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(Zero::is_zero)
    }

    /// The rational coordinate; the whole value iff `is_rational`.
    pub fn rational_part(&self) -> &Rational {
        &self.c[0]
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then(|| &self.c[0])
    }

    pub fn scale(&self, r: &Rational) -> QExt {
        QExt {
            q: self.q,
            c: [
                &self.c[0] * r,
                &self.c[1] * r,
                &self.c[2] * r,
                &self.c[3] * r,
            ],
        }
    }

    /// √q ↦ −√q (also negates √(q(q+1))).
    fn conj_sqrt_q(&self) -> QExt {
        QExt {
            q: self.q,
            c: [
                self.c[0].clone(),
                -self.c[1].clone(),
                self.c[2].clone(),
                -self.c[3].clone(),
            ],
        }
    }

    /// √(q+1) ↦ −√(q+1) (also negates √(q(q+1))).
    fn conj_sqrt_q_plus_one(&self) -> QExt {
        QExt {
            q: self.q,
            c: [
                self.c[0].clone(),
                self.c[1].clone(),
                -self.c[2].clone(),
                -self.c[3].clone(),
            ],
        }
    }

    /// Multiplicative inverse via the product of Galois conjugates;
    /// `Err(DivisionByZero)` on zero.
    pub fn inv(&self) -> crate::Result<QExt> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let s1 = self.conj_sqrt_q();
        let s2 = self.conj_sqrt_q_plus_one();
        let s3 = s1.conj_sqrt_q_plus_one();
        let cof = &(&s1 * &s2) * &s3;
        let norm = self * &cof;
        debug_assert!(norm.is_rational(), "field norm must be rational");
        debug_assert!(!norm.c[0].is_zero(), "nonzero element has nonzero norm");
        Ok(cof.scale(&norm.c[0].recip()))
    }

    pub fn to_f64(&self) -> f64 {
        let q = self.q as f64;
        rat_to_f64(&self.c[0])
            + rat_to_f64(&self.c[1]) * q.sqrt()
            + rat_to_f64(&self.c[2]) * (q + 1.0).sqrt()
            + rat_to_f64(&self.c[3]) * (q * (q + 1.0)).sqrt()
    }

    fn ctx(&self, rhs: &QExt) {
        assert!(
            self.q == rhs.q,
            "QExt context mismatch: q={} vs q={}",
            self.q,
            rhs.q
        );
    }

    /// Parse either a bare rational `p/r` or a 4-tuple `(a,b,c,d)` in context `q`.
    pub fn parse(q: u64, s: &str) -> crate::Result<QExt> {
        let s = s.trim();
        let bad = |what: &str| Error::Parse(format!("{what}: {s:?}"));
        if let Some(inner) = s.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| bad("unclosed tuple"))?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 4 {
                return Err(bad("expected 4 coordinates"));
            }
            let mut coords = Vec::with_capacity(4);
            for p in parts {
                coords.push(
                    p.trim()
                        .parse::<Rational>()
                        .map_err(|_| bad("bad rational"))?,
                );
            }
            let mut it = coords.into_iter();
            Ok(QExt::new(
                q,
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
            ))
        } else {
            let r = s.parse::<Rational>().map_err(|_| bad("bad rational"))?;
            Ok(QExt::from_rational(q, r))
        }
    }
}

impl Add<&QExt> for &QExt {
    type Output = QExt;
    fn add(self, rhs: &QExt) -> QExt {
        self.ctx(rhs);
        QExt {
            q: self.q,
            c: [
                &self.c[0] + &rhs.c[0],
                &self.c[1] + &rhs.c[1],
                &self.c[2] + &rhs.c[2],
                &self.c[3] + &rhs.c[3],
            ],
        }
    }
}

impl Sub<&QExt> for &QExt {
    type Output = QExt;
    fn sub(self, rhs: &QExt) -> QExt {
        self.ctx(rhs);
        QExt {
            q: self.q,
            c: [
                &self.c[0] - &rhs.c[0],
                &self.c[1] - &rhs.c[1],
                &self.c[2] - &rhs.c[2],
                &self.c[3] - &rhs.c[3],
            ],
        }
    }
}

impl Mul<&QExt> for &QExt {
    type Output = QExt;
    fn mul(self, rhs: &QExt) -> QExt {
        self.ctx(rhs);
        let q = rat_int(self.q as i64);
        let q1 = rat_int(self.q as i64 + 1);
        let qq1 = &q * &q1;
        let (x, y) = (&self.c, &rhs.c);
        let a =
            &x[0] * &y[0] + &q * (&x[1] * &y[1]) + &q1 * (&x[2] * &y[2]) + &qq1 * (&x[3] * &y[3]);
        let b = &x[0] * &y[1] + &x[1] * &y[0] + &q1 * (&x[2] * &y[3] + &x[3] * &y[2]);
        let c = &x[0] * &y[2] + &x[2] * &y[0] + &q * (&x[1] * &y[3] + &x[3] * &y[1]);
        let d = &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] + &x[2] * &y[1];
        // canonical coordinates are closed under this product, but route
        // through the constructor so the invariant never depends on that
        QExt::new(self.q, a, b, c, d)
    }
}

impl Neg for &QExt {
    type Output = QExt;
    fn neg(self) -> QExt {
        QExt {
            q: self.q,
            c: [
                -self.c[0].clone(),
                -self.c[1].clone(),
                -self.c[2].clone(),
                -self.c[3].clone(),
            ],
        }
    }
}

impl Add for QExt {
    type Output = QExt;
    fn add(self, rhs: QExt) -> QExt {
        &self + &rhs
    }
}

impl Sub for QExt {
    type Output = QExt;
    fn sub(self, rhs: QExt) -> QExt {
        &self - &rhs
    }
}

impl Mul for QExt {
    type Output = QExt;
    fn mul(self, rhs: QExt) -> QExt {
        &self * &rhs
    }
}

impl Neg for QExt {
    type Output = QExt;
    fn neg(self) -> QExt {
        -&self
    }
}

impl fmt::Display for QExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.c[0], self.c[1], self.c[2], self.c[3]
        )
    }
}

impl fmt::Debug for QExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QExt[q={}]{}", self.q, self)
    }
}
