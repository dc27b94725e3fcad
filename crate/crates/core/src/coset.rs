//! Ground-truth coset oracle for small prime q.
//!
//! T(𝔭ⁿ) is, by definition, a finite union of left cosets K·x of integral
//! matrices with determinant valuation n. This module enumerates canonical
//! representatives explicitly, reduces arbitrary integral matrices to their
//! canonical coset representative, and re-derives the convolution recurrence
//! T(𝔭)∘T(𝔭ⁿ) = T(𝔭ⁿ⁺¹) + q·T(𝔭ⁿ⁻¹) by brute-force multiset counting —
//! certifying the cell volumes and structure constants the algebra layer
//! takes as closed forms.
//!
//! Everything here is exact i64 arithmetic. Entries are never reduced mod a
//! power of ϖ: doing so would perturb determinants and break the guarantee
//! that first-column gcds are (unit multiples of) powers of q, which is what
//! makes row reduction land in canonical form. At the mandated scales
//! (prime q ≤ 13, n ≤ 6) all intermediates stay far below i64 range.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::{Error, Result};

pub type Mat2 = [[i64; 2]; 2];

/// Canonical left-coset representative [[ϖᵃ, b],[0, ϖ^{n−a}]], 0 ≤ b < ϖ^{n−a},
/// of the integral matrices with determinant valuation n. Distinct reps are
/// distinct cosets; `primitive` marks content zero (the n-th Cartan cell).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub struct CosetRep {
    pub a: u32,
    pub n: u32,
    pub b: i64,
    pub primitive: bool,
}

impl CosetRep {
    pub fn matrix(&self, q: u64) -> Mat2 {
        let qa = (q as i64).pow(self.a);
        let qd = (q as i64).pow(self.n - self.a);
        [[qa, self.b], [0, qd]]
    }
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn require_oracle_params(q: u64, n: u32, n_cap: u32) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::InvalidParameter(format!(
            "coset oracle requires prime q, got {q}"
        )));
    }
    if n > n_cap {
        return Err(Error::ResourceLimit(format!(
            "coset enumeration capped at n = {n_cap}, got {n}"
        )));
    }
    Ok(())
}

/// All left cosets in the support of T(𝔭ⁿ), sorted by (a, b).
/// Count: 1 + q + … + qⁿ.
pub fn enumerate_t_cosets(q: u64, n: u32) -> Result<Vec<CosetRep>> {
    require_oracle_params(q, n, 6)?;
    let mut reps = Vec::new();
    for a in 0..=n {
        let d = n - a;
        let qd = (q as i64).pow(d);
        for b in 0..qd {
            let content_positive = a >= 1 && d >= 1 && b % q as i64 == 0;
            reps.push(CosetRep {
                a,
                n,
                b,
                primitive: !content_positive,
            });
        }
    }
    Ok(reps)
}

/// The cosets of the n-th Cartan cell (primitive matrices only).
/// Count: 1 for n = 0, (q+1)·qⁿ⁻¹ otherwise.
pub fn enumerate_cell_cosets(q: u64, n: u32) -> Result<Vec<CosetRep>> {
    Ok(enumerate_t_cosets(q, n)?
        .into_iter()
        .filter(|r| r.primitive)
        .collect())
}

pub fn t_coset_count(q: u64, n: u32) -> u64 {
    (0..=n).map(|k| q.pow(k)).sum()
}

pub fn cell_coset_count(q: u64, n: u32) -> u64 {
    if n == 0 {
        1
    } else {
        (q + 1) * q.pow(n - 1)
    }
}

fn inv_mod(u: i64, m: i64) -> i64 {
    // extended Euclid; caller guarantees gcd(u, m) = 1, m ≥ 1
    let (mut r0, mut r1) = (m, u.rem_euclid(m));
    let (mut s0, mut s1) = (0i64, 1i64);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    debug_assert!(r0 == 1, "inv_mod of non-unit");
    s0.rem_euclid(m)
}

/// Reduce an integral matrix with det = u·qᴺ (u coprime to q, N ≥ 0) to the
/// canonical representative of its left K-coset, by integer row operations
/// plus a unit rescale mod q^{n−a}. Idempotent, and constant on cosets:
/// reduce(k·g) = reduce(g) for any k integral with det(k) coprime to q.
pub fn hnf_reduce(q: u64, m: Mat2) -> Result<CosetRep> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0 {
        return Err(Error::Domain("matrix is singular".into()));
    }
    let qi = q as i64;
    let mut detval = 0u32;
    let mut d = det.abs();
    while d % qi == 0 {
        d /= qi;
        detval += 1;
    }

    let mut m = m;
    // zero the (1,0) entry by the Euclidean algorithm on the first column
    while m[1][0] != 0 {
        let k = m[0][0].div_euclid(m[1][0]);
        m[0][0] -= k * m[1][0];
        m[0][1] -= k * m[1][1];
        m.swap(0, 1);
    }
    for row in m.iter_mut() {
        if row[0] < 0 || (row[0] == 0 && row[1] < 0) {
            row[0] = -row[0];
            row[1] = -row[1];
        }
    }

    // split unit parts: over the q-adic integers only the q-power survives
    let split = |mut g: i64| {
        let mut v = 0u32;
        while g % qi == 0 {
            g /= qi;
            v += 1;
        }
        (v, g)
    };
    let (a, u1) = split(m[0][0]);
    let (dv, _u2) = split(m[1][1]);
    debug_assert!(a + dv == detval);
    let qd = qi.pow(dv);
    let b = (m[0][1].rem_euclid(qd) * inv_mod(u1, qd)).rem_euclid(qd);
    let content_positive = a >= 1 && dv >= 1 && b % qi == 0;
    Ok(CosetRep {
        a,
        n: detval,
        b,
        primitive: !content_positive,
    })
}

fn mat_mul(x: Mat2, y: Mat2) -> Mat2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

/// Certify that reduction is constant on left cosets Kx: for every
/// canonical representative g at valuation ≤ n_max, reduction is idempotent
/// and `trials` random elements k ∈ K (entries sampled mod ϖ^{n+2}, unit
/// determinant mod ϖ) satisfy reduce(k·g) = reduce(g).
pub fn verify_reduction_invariance(q: u64, n_max: u32, seed: u64, trials: usize) -> Result<bool> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for n in 0..=n_max {
        let modulus = (q as i64).pow(n + 2);
        for rep in enumerate_t_cosets(q, n)? {
            let g = rep.matrix(q);
            if hnf_reduce(q, g)? != rep {
                return Ok(false);
            }
            for _ in 0..trials {
                let k = loop {
                    let k: Mat2 = [
                        [rng.gen_range(0..modulus), rng.gen_range(0..modulus)],
                        [rng.gen_range(0..modulus), rng.gen_range(0..modulus)],
                    ];
                    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
                    if det.rem_euclid(q as i64) != 0 {
                        break k;
                    }
                };
                if hnf_reduce(q, mat_mul(k, g))? != rep {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Certify T(𝔭)∘T(𝔭ⁿ) = T(𝔭ⁿ⁺¹) + q·T(𝔭ⁿ⁻¹) by counting: reduce every
/// product xᵢ·yⱼ of coset reps and compare the resulting multiset against
/// the predicted multiplicities (1 for every coset at valuation n+1, plus q
/// more on cosets of content ≥ 1, which make up the ϖ·T(𝔭ⁿ⁻¹) term).
pub fn verify_recurrence(q: u64, n: u32) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidParameter("recurrence needs n ≥ 1".into()));
    }
    require_oracle_params(q, n, 4)?;
    let t1 = enumerate_t_cosets(q, 1)?;
    let tn = enumerate_t_cosets(q, n)?;

    let mut found: BTreeMap<(u32, i64), u64> = BTreeMap::new();
    for x in &t1 {
        for y in &tn {
            let r = hnf_reduce(q, mat_mul(x.matrix(q), y.matrix(q)))?;
            debug_assert!(r.n == n + 1);
            *found.entry((r.a, r.b)).or_insert(0) += 1;
        }
    }

    let mut expected: BTreeMap<(u32, i64), u64> = BTreeMap::new();
    for r in enumerate_t_cosets(q, n + 1)? {
        let mult = if r.primitive { 1 } else { 1 + q };
        expected.insert((r.a, r.b), mult);
    }
    Ok(found == expected)
}
