//! The spherical Hecke algebra of PGL₂ at residue cardinality q.
//!
//! Elements are finitely supported functions on the radial index n ≥ 0
//! (the Cartan cell K·diag(1, ϖⁿ)·K), expressed in one of five bases:
//!
//! * `T` — Hecke sums T(𝔭ⁿ), the characteristic function of integral
//!   matrices with determinant valuation n, modulo the center;
//! * `Psi` — cell indicators Ψₙ = ch(K diag(1,ϖⁿ) K), with
//!   Ψₙ = T(𝔭ⁿ) − T(𝔭ⁿ⁻²);
//! * `Phi` — scaled cells Φₙ = q^{−n/2}Ψₙ, the convolution-friendly form;
//! * `E` — the orthonormal family e₀ = Φ₀, eₙ = Φₙ/‖Φₙ‖ with
//!   ‖Φₙ‖ = √((q+1)/q) for n ≥ 1;
//! * `TPrime` — polynomials in the normalized generator T′(𝔭) = q^{−1/2}T(𝔭),
//!   the presentation in which convolution is plain polynomial multiplication
//!   and the spherical transform reads off coefficients.
//!
//! All coefficients live in [`QExt`], so every identity the algebra satisfies
//! (the convolution recurrence, the Φ relations, the Chebyshev expansion
//! q^{−n/2}T(𝔭ⁿ) = Uₙ(T′/2)) holds exactly, not merely to rounding.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::exact::{rat_int, rat_pow, QExt, Rational};
use crate::{Error, Result};

/// Haar volume of the n-th Cartan cell, normalized so vol(K) = 1:
/// 1 for n = 0, (q+1)q^{n−1} otherwise (vertex counts of the (q+1)-regular tree).
pub fn cell_volume(q: u64, n: usize) -> Rational {
    if n == 0 {
        rat_int(1)
    } else {
        rat_int(q as i64 + 1) * rat_pow(q, n as i64 - 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BasisTag {
    T,
    Psi,
    Phi,
    NormalizedE,
    PolyInTPrime,
}

impl BasisTag {
    pub const ALL: [BasisTag; 5] = [
        BasisTag::T,
        BasisTag::Psi,
        BasisTag::Phi,
        BasisTag::NormalizedE,
        BasisTag::PolyInTPrime,
    ];
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisTag::T => "T",
            BasisTag::Psi => "Psi",
            BasisTag::Phi => "Phi",
            BasisTag::NormalizedE => "E",
            BasisTag::PolyInTPrime => "TPrime",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BasisTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" => Ok(BasisTag::T),
            "Psi" | "psi" => Ok(BasisTag::Psi),
            "Phi" | "phi" => Ok(BasisTag::Phi),
            "E" | "e" => Ok(BasisTag::NormalizedE),
            "TPrime" | "tprime" => Ok(BasisTag::PolyInTPrime),
            _ => Err(Error::Parse(format!("unknown basis tag {s:?}"))),
        }
    }
}

/// An element of the algebra: finitely many exact coefficients against one
/// of the five bases. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HeckeElement {
    q: u64,
    basis: BasisTag,
    coeffs: BTreeMap<usize, QExt>,
}

impl HeckeElement {
    /// The unit of convolution, ch_K, as a T-basis element.
    pub fn unit(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        Ok(HeckeElement::basis_vector(q, BasisTag::T, 0))
    }

    /// Single basis vector: T(𝔭ⁿ), Ψₙ, Φₙ, eₙ, or (T′)ⁿ depending on `basis`.
    pub fn basis_vector(q: u64, basis: BasisTag, n: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(n, QExt::one(q));
        HeckeElement { q, basis, coeffs }
    }

    pub fn t(q: u64, n: usize) -> Self {
        HeckeElement::basis_vector(q, BasisTag::T, n)
    }

    pub fn psi(q: u64, n: usize) -> Self {
        HeckeElement::basis_vector(q, BasisTag::Psi, n)
    }

    pub fn phi(q: u64, n: usize) -> Self {
        HeckeElement::basis_vector(q, BasisTag::Phi, n)
    }

    pub fn normalized_e(q: u64, n: usize) -> Self {
        HeckeElement::basis_vector(q, BasisTag::NormalizedE, n)
    }

    /// T′(𝔭) = q^{−1/2} T(𝔭).
    pub fn t_prime(q: u64) -> Self {
        HeckeElement::basis_vector(q, BasisTag::PolyInTPrime, 1)
    }

    pub fn zero(q: u64, basis: BasisTag) -> Self {
        HeckeElement {
            q,
            basis,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_coeffs<I>(q: u64, basis: BasisTag, coeffs: I) -> Self
    where
        I: IntoIterator<Item = (usize, QExt)>,
    {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            assert!(c.q() == q, "QExt context mismatch: q={} vs q={q}", c.q());
            if !c.is_zero() {
                let cur = map.remove(&n).map(|p: QExt| &p + &c).unwrap_or(c);
                if cur.is_zero() {
                    map.remove(&n);
                } else {
                    map.insert(n, cur);
                }
            }
        }
        HeckeElement {
            q,
            basis,
            coeffs: map,
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient against basis index n (zero when absent).
    pub fn coeff(&self, n: usize) -> QExt {
        self.coeffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| QExt::zero(self.q))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &QExt)> {
        self.coeffs.iter().map(|(n, c)| (*n, c))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    fn ctx(&self, rhs: &HeckeElement) {
        assert!(
            self.q == rhs.q,
            "HeckeElement context mismatch: q={} vs q={}",
            self.q,
            rhs.q
        );
    }

    fn insert_nonzero(map: &mut BTreeMap<usize, QExt>, n: usize, c: QExt) {
        if !c.is_zero() {
            map.insert(n, c);
        }
    }

    fn add_into(map: &mut BTreeMap<usize, QExt>, q: u64, n: usize, c: &QExt) {
        let cur = map.remove(&n).unwrap_or_else(|| QExt::zero(q));
        let next = &cur + c;
        Self::insert_nonzero(map, n, next);
    }

    /// Coefficients against the T basis (the conversion hub).
    fn to_t_coeffs(&self) -> BTreeMap<usize, QExt> {
        let q = self.q;
        match self.basis {
            BasisTag::T => self.coeffs.clone(),
            BasisTag::Psi => {
                // Ψₙ = T(𝔭ⁿ) − T(𝔭ⁿ⁻²)
                let mut out = BTreeMap::new();
                for (&n, c) in &self.coeffs {
                    Self::add_into(&mut out, q, n, c);
                    if n >= 2 {
                        Self::add_into(&mut out, q, n - 2, &-c);
                    }
                }
                out
            }
            BasisTag::Phi => {
                // Φₙ = q^{−n/2} Ψₙ
                let psi =
                    self.map_coeffs(BasisTag::Psi, |n, c| c * &QExt::q_half_pow(q, -(n as i64)));
                psi.to_t_coeffs()
            }
            BasisTag::NormalizedE => {
                // eₙ = Φₙ/‖Φₙ‖, ‖Φ₀‖ = 1, ‖Φₙ‖ = √((q+1)/q)
                let h_inv = QExt::sqrt_ratio(q).inv().expect("norm is nonzero");
                let phi =
                    self.map_coeffs(
                        BasisTag::Phi,
                        |n, c| {
                            if n == 0 {
                                c.clone()
                            } else {
                                c * &h_inv
                            }
                        },
                    );
                phi.to_t_coeffs()
            }
            BasisTag::PolyInTPrime => {
                // (T′)ᵐ = q^{−m/2} T(𝔭)ᵐ, with T(𝔭)ᵐ by iterating
                // T(𝔭)·T(𝔭ⁿ) = T(𝔭ⁿ⁺¹) + q T(𝔭ⁿ⁻¹)
                let mut out = BTreeMap::new();
                let top = match self.max_index() {
                    Some(m) => m,
                    None => return out,
                };
                let mut power: Vec<QExt> = vec![QExt::one(q)]; // T(𝔭)⁰
                for m in 0..=top {
                    if let Some(c) = self.coeffs.get(&m) {
                        let s = c * &QExt::q_half_pow(q, -(m as i64));
                        for (k, e) in power.iter().enumerate() {
                            if !e.is_zero() {
                                Self::add_into(&mut out, q, k, &(&s * e));
                            }
                        }
                    }
                    if m < top {
                        power = Self::multiply_by_t(q, &power);
                    }
                }
                out
            }
        }
    }

    /// One application of convolution by T(𝔭) to a dense T-coefficient vector.
    fn multiply_by_t(q: u64, v: &[QExt]) -> Vec<QExt> {
        let qq = QExt::from_int(q, q as i64);
        let mut out = vec![QExt::zero(q); v.len() + 1];
        for (n, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out[n + 1] = &out[n + 1] + c;
            if n >= 1 {
                out[n - 1] = &out[n - 1] + &(c * &qq);
            }
        }
        out
    }

    fn map_coeffs<F>(&self, basis: BasisTag, f: F) -> HeckeElement
    where
        F: Fn(usize, &QExt) -> QExt,
    {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&n, c)| (n, f(n, c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        HeckeElement {
            q: self.q,
            basis,
            coeffs,
        }
    }

    fn from_t_coeffs(q: u64, target: BasisTag, t: BTreeMap<usize, QExt>) -> HeckeElement {
        match target {
            BasisTag::T => HeckeElement {
                q,
                basis: BasisTag::T,
                coeffs: t,
            },
            BasisTag::Psi => {
                // T(𝔭ⁿ) = Σ_{r ≤ n/2} Ψ_{n−2r}
                let mut out = BTreeMap::new();
                for (&n, c) in &t {
                    let mut m = n as i64;
                    while m >= 0 {
                        Self::add_into(&mut out, q, m as usize, c);
                        m -= 2;
                    }
                }
                HeckeElement {
                    q,
                    basis: BasisTag::Psi,
                    coeffs: out,
                }
            }
            BasisTag::Phi => {
                let psi = Self::from_t_coeffs(q, BasisTag::Psi, t);
                psi.map_coeffs(BasisTag::Phi, |n, c| c * &QExt::q_half_pow(q, n as i64))
            }
            BasisTag::NormalizedE => {
                let h = QExt::sqrt_ratio(q);
                let phi = Self::from_t_coeffs(q, BasisTag::Phi, t);
                phi.map_coeffs(BasisTag::NormalizedE, |n, c| {
                    if n == 0 {
                        c.clone()
                    } else {
                        c * &h
                    }
                })
            }
            BasisTag::PolyInTPrime => {
                // T(𝔭ⁿ) = q^{n/2} Vₙ(T′) with V₀ = 1, V₁ = y, Vₙ₊₁ = y·Vₙ − Vₙ₋₁
                // (Vₙ(y) = Uₙ(y/2), the monic Chebyshev form)
                let mut out = BTreeMap::new();
                let top = t.keys().next_back().copied().unwrap_or(0);
                let mut v_prev: Vec<QExt> = vec![QExt::one(q)];
                let mut v_cur: Vec<QExt> = vec![QExt::zero(q), QExt::one(q)];
                for n in 0..=top {
                    let v_n: &[QExt] = if n == 0 { &v_prev } else { &v_cur };
                    if let Some(c) = t.get(&n) {
                        let s = c * &QExt::q_half_pow(q, n as i64);
                        for (k, e) in v_n.iter().enumerate() {
                            if !e.is_zero() {
                                Self::add_into(&mut out, q, k, &(&s * e));
                            }
                        }
                    }
                    if n >= 1 && n < top {
                        // Vₙ₊₁ = y·Vₙ − Vₙ₋₁
                        let mut next = vec![QExt::zero(q); v_cur.len() + 1];
                        for (k, e) in v_cur.iter().enumerate() {
                            next[k + 1] = &next[k + 1] + e;
                        }
                        for (k, e) in v_prev.iter().enumerate() {
                            next[k] = &next[k] - e;
                        }
                        v_prev = std::mem::take(&mut v_cur);
                        v_cur = next;
                    }
                }
                HeckeElement {
                    q,
                    basis: BasisTag::PolyInTPrime,
                    coeffs: out,
                }
            }
        }
    }

    /// Re-express against `target`; exact, and invertible for every pair.
    pub fn change_basis(&self, target: BasisTag) -> HeckeElement {
        if target == self.basis {
            return self.clone();
        }
        HeckeElement::from_t_coeffs(self.q, target, self.to_t_coeffs())
    }

    /// Convolution product. The algebra is ℂ[T′] under ∘, so the product is
    /// computed by polynomial multiplication in the TPrime presentation and
    /// returned in the basis of `self`.
    pub fn convolve(&self, rhs: &HeckeElement) -> HeckeElement {
        self.ctx(rhs);
        let a = self.change_basis(BasisTag::PolyInTPrime);
        let b = rhs.change_basis(BasisTag::PolyInTPrime);
        let mut out = BTreeMap::new();
        for (&i, ci) in &a.coeffs {
            for (&j, cj) in &b.coeffs {
                Self::add_into(&mut out, self.q, i + j, &(ci * cj));
            }
        }
        let prod = HeckeElement {
            q: self.q,
            basis: BasisTag::PolyInTPrime,
            coeffs: out,
        };
        prod.change_basis(self.basis)
    }

    /// The *-involution f*(g) = conj(f(g⁻¹)). Cartan cells are stable under
    /// inversion and all coefficients are real, so * fixes every element;
    /// it is kept explicit so adjointness statements read as written.
    pub fn star(&self) -> HeckeElement {
        self.clone()
    }

    /// L²(G) pairing ⟨f, g⟩ = ∫ f·conj(g): cells are disjoint, so this is
    /// Σₙ fₙ gₙ vol(cell n) over cell values (the Ψ coefficients).
    pub fn inner_product(&self, rhs: &HeckeElement) -> QExt {
        self.ctx(rhs);
        let a = self.change_basis(BasisTag::Psi);
        let b = rhs.change_basis(BasisTag::Psi);
        let mut acc = QExt::zero(self.q);
        for (&n, ca) in &a.coeffs {
            if let Some(cb) = b.coeffs.get(&n) {
                acc = &acc + &(ca * cb).scale(&cell_volume(self.q, n));
            }
        }
        acc
    }

    /// ‖f‖² = ⟨f, f⟩ (rational for rational-coefficient inputs).
    pub fn norm_squared(&self) -> QExt {
        self.inner_product(self)
    }

    pub fn scale(&self, s: &QExt) -> HeckeElement {
        if s.is_zero() {
            return HeckeElement::zero(self.q, self.basis);
        }
        self.map_coeffs(self.basis, |_, c| c * s)
    }

    /// Sum, computed in the basis of `self`.
    pub fn add(&self, rhs: &HeckeElement) -> HeckeElement {
        self.ctx(rhs);
        let rhs = rhs.change_basis(self.basis);
        let mut out = self.coeffs.clone();
        for (&n, c) in &rhs.coeffs {
            Self::add_into(&mut out, self.q, n, c);
        }
        HeckeElement {
            q: self.q,
            basis: self.basis,
            coeffs: out,
        }
    }

    pub fn sub(&self, rhs: &HeckeElement) -> HeckeElement {
        self.add(&rhs.scale(&-QExt::one(rhs.q)))
    }

    /// Equality as algebra elements (coefficients compared in a common basis).
    pub fn eq_as_elements(&self, rhs: &HeckeElement) -> bool {
        self.q == rhs.q && self.to_t_coeffs() == rhs.to_t_coeffs()
    }

    /// Canonical text form `Basis:{n:(a,b,c,d),...}`, parseable by [`HeckeElement::parse`].
    pub fn to_canonical_string(&self) -> String {
        let body: Vec<String> = self
            .coeffs
            .iter()
            .map(|(n, c)| format!("{n}:{c}"))
            .collect();
        format!("{}:{{{}}}", self.basis, body.join(","))
    }

    /// Inverse of [`HeckeElement::to_canonical_string`]; coefficients may be
    /// 4-tuples or bare rationals.
    pub fn parse(q: u64, s: &str) -> Result<HeckeElement> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        let s = s.trim();
        let bad = |what: &str| Error::Parse(format!("{what} in element {s:?}"));
        let (tag, rest) = s.split_once(':').ok_or_else(|| bad("missing basis tag"))?;
        let basis: BasisTag = tag.trim().parse()?;
        let rest = rest.trim();
        let body = rest
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| bad("expected {{...}} coefficient block"))?;
        let mut coeffs = Vec::new();
        for entry in split_top_level(body) {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let (idx, val) = entry
                .split_once(':')
                .ok_or_else(|| bad("expected n:coeff"))?;
            let n: usize = idx.trim().parse().map_err(|_| bad("bad index"))?;
            coeffs.push((n, QExt::parse(q, val)?));
        }
        Ok(HeckeElement::from_coeffs(q, basis, coeffs))
    }
}

/// Split on commas that are not nested inside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl fmt::Display for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

/// Matrix of f ↦ T′(𝔭) ∘ f on span{e₀, …, e_{n_max}} in the orthonormal
/// basis; entry (i, j) is the eᵢ-coefficient of T′ ∘ eⱼ. Tridiagonal with
/// zero diagonal, (0,1)/(1,0) entries √((q+1)/q), all other off-diagonal
/// entries 1; the outflow from e_{n_max} to e_{n_max+1} is truncated.
pub fn radial_action_matrix(q: u64, n_max: usize) -> Vec<Vec<QExt>> {
    assert!(n_max >= 2, "truncation must be at least 2");
    let n = n_max + 1;
    let mut m = vec![vec![QExt::zero(q); n]; n];
    let h = QExt::sqrt_ratio(q);
    m[0][1] = h.clone();
    m[1][0] = h;
    for i in 1..n - 1 {
        m[i][i + 1] = QExt::one(q);
        m[i + 1][i] = QExt::one(q);
    }
    m
}

/// A radial function given by its finitely many cell values (the Ψ-basis
/// coefficient sequence), in floating point for spectral-side work.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    q: u64,
    values: Vec<Complex64>,
}

impl RadialFunction {
    pub fn new(q: u64, values: Vec<Complex64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "radial function needs at least one value".into(),
            ));
        }
        Ok(RadialFunction { q, values })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, n: usize) -> Complex64 {
        self.values[n]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Radial convolution action of T′(𝔭):
    /// (T′ ∘ f)(0) = (q+1) q^{−1/2} f(1),
    /// (T′ ∘ f)(n) = q^{1/2} f(n+1) + q^{−1/2} f(n−1) for n ≥ 1.
    /// The output loses the last index (f(len) is unknown).
    pub fn radial_apply(&self) -> Result<RadialFunction> {
        if self.values.len() < 2 {
            return Err(Error::InvalidParameter(
                "radial_apply needs at least two values".into(),
            ));
        }
        let sq = (self.q as f64).sqrt();
        let mut out = Vec::with_capacity(self.values.len() - 1);
        out.push(self.values[1] * ((self.q as f64 + 1.0) / sq));
        for n in 1..self.values.len() - 1 {
            out.push(self.values[n + 1] * sq + self.values[n - 1] / sq);
        }
        Ok(RadialFunction {
            q: self.q,
            values: out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn omega1(q: u64) -> Rational {
        rat(q as i64 + 1, q as i64)
    }

    #[test]
    fn unit_and_volumes() {
        let u = HeckeElement::unit(2).unwrap();
        assert_eq!(u.basis(), BasisTag::T);
        assert!(u.coeff(0).is_one());
        assert!(HeckeElement::unit(1).is_err());
        assert_eq!(cell_volume(2, 0), rat_int(1));
        assert_eq!(cell_volume(2, 1), rat_int(3));
        assert_eq!(cell_volume(2, 3), rat_int(12));
        assert_eq!(cell_volume(3, 2), rat_int(12));
        assert_eq!(cell_volume(5, 4), rat_int(750));
    }

    #[test]
    fn basis_change_closed_forms() {
        let q = 2;
        let psi2_t = HeckeElement::psi(q, 2).change_basis(BasisTag::T);
        assert_eq!(psi2_t.coeff(2), QExt::one(q));
        assert_eq!(psi2_t.coeff(0), -QExt::one(q));
        assert_eq!(psi2_t.support().count(), 2);

        let t2_psi = HeckeElement::t(q, 2).change_basis(BasisTag::Psi);
        assert!(t2_psi.coeff(2).is_one() && t2_psi.coeff(0).is_one());

        // Φ₂ = T′² − ((q+1)/q)·1 in the polynomial presentation
        for q in [2u64, 3, 5] {
            let phi2_tp = HeckeElement::phi(q, 2).change_basis(BasisTag::PolyInTPrime);
            assert!(phi2_tp.coeff(2).is_one());
            assert_eq!(phi2_tp.coeff(0), QExt::from_rational(q, -omega1(q)));
            assert_eq!(phi2_tp.support().count(), 2);
        }

        // e₁ = Φ₁/‖Φ₁‖
        let e1_phi = HeckeElement::normalized_e(3, 1).change_basis(BasisTag::Phi);
        assert_eq!(e1_phi.coeff(1), QExt::sqrt_ratio(3).inv().unwrap());
    }

    #[test]
    fn convolution_recurrence() {
        for q in [2u64, 3, 5] {
            let t1 = HeckeElement::t(q, 1);
            for n in 1..=20usize {
                let lhs = t1.convolve(&HeckeElement::t(q, n));
                let rhs = HeckeElement::t(q, n + 1)
                    .add(&HeckeElement::t(q, n - 1).scale(&QExt::from_int(q, q as i64)));
                assert_eq!(lhs, rhs, "T(p)∘T(p^{n}) at q={q}");
            }
        }
    }

    #[test]
    fn unit_is_identity() {
        let q = 3;
        let u = HeckeElement::unit(q).unwrap();
        for f in [
            HeckeElement::t(q, 4),
            HeckeElement::phi(q, 3),
            HeckeElement::from_coeffs(
                q,
                BasisTag::Psi,
                [(0, QExt::from_rational(q, rat(1, 2))), (5, QExt::sqrt_q(q))],
            ),
        ] {
            assert!(u.convolve(&f).eq_as_elements(&f));
            assert!(f.convolve(&u).eq_as_elements(&f));
        }
    }

    #[test]
    fn phi_relations() {
        for q in [2u64, 3, 5] {
            let tp = HeckeElement::t_prime(q);
            // T′ ∘ Φ₀ = Φ₁
            assert!(tp
                .convolve(&HeckeElement::phi(q, 0))
                .eq_as_elements(&HeckeElement::phi(q, 1)));
            // T′ ∘ Φ₁ = Φ₂ + ((q+1)/q) Φ₀
            let rhs = HeckeElement::phi(q, 2)
                .add(&HeckeElement::phi(q, 0).scale(&QExt::from_rational(q, omega1(q))));
            assert!(tp.convolve(&HeckeElement::phi(q, 1)).eq_as_elements(&rhs));
            // T′ ∘ Φₙ = Φₙ₊₁ + Φₙ₋₁ for n ≥ 2
            for n in 2..=20usize {
                let rhs = HeckeElement::phi(q, n + 1).add(&HeckeElement::phi(q, n - 1));
                assert!(
                    tp.convolve(&HeckeElement::phi(q, n)).eq_as_elements(&rhs),
                    "phi relation at q={q}, n={n}"
                );
            }
        }
    }

    #[test]
    fn chebyshev_expansion_of_t() {
        // q^{-n/2} T(p^n) = U_n(T'/2), with U_n built by its own recurrence
        // and the right side assembled by repeated convolution.
        for q in [2u64, 3] {
            let tp_t = HeckeElement::t_prime(q).change_basis(BasisTag::T);
            let mut tp_pow: Vec<HeckeElement> = vec![HeckeElement::unit(q).unwrap()];
            for k in 1..=10 {
                tp_pow.push(tp_pow[k - 1].convolve(&tp_t));
            }
            let mut u_prev: Vec<Rational> = vec![rat_int(1)];
            let mut u_cur: Vec<Rational> = vec![rat_int(0), rat_int(2)];
            for n in 0..=10usize {
                let u_n = if n == 0 { &u_prev } else { &u_cur };
                let mut rhs = HeckeElement::zero(q, BasisTag::T);
                for (k, c) in u_n.iter().enumerate() {
                    let s = QExt::from_rational(q, c * rat(1, 1i64 << k));
                    rhs = rhs.add(&tp_pow[k].scale(&s));
                }
                let lhs = HeckeElement::t(q, n).scale(&QExt::q_half_pow(q, -(n as i64)));
                assert!(lhs.eq_as_elements(&rhs), "Chebyshev expansion n={n} q={q}");
                if (1..10).contains(&n) {
                    let mut next = vec![rat_int(0); u_cur.len() + 1];
                    for (k, c) in u_cur.iter().enumerate() {
                        next[k + 1] += c * rat_int(2);
                    }
                    for (k, c) in u_prev.iter().enumerate() {
                        next[k] -= c;
                    }
                    u_prev = std::mem::take(&mut u_cur);
                    u_cur = next;
                }
            }
        }
    }

    #[test]
    fn inner_products() {
        for q in [2u64, 3, 5] {
            let one = QExt::one(q);
            assert_eq!(
                HeckeElement::unit(q).unwrap().norm_squared(),
                one,
                "vol(K) = 1"
            );
            for n in 1..=6usize {
                assert_eq!(
                    HeckeElement::phi(q, n).norm_squared(),
                    QExt::from_rational(q, omega1(q)),
                    "‖Φₙ‖² at q={q}, n={n}"
                );
                assert_eq!(HeckeElement::normalized_e(q, n).norm_squared(), one);
                assert_eq!(
                    HeckeElement::psi(q, n).norm_squared(),
                    QExt::from_rational(q, cell_volume(q, n))
                );
            }
            assert!(HeckeElement::phi(q, 1)
                .inner_product(&HeckeElement::phi(q, 3))
                .is_zero());
            assert_eq!(
                HeckeElement::t(q, 1).norm_squared(),
                QExt::from_int(q, q as i64 + 1)
            );
        }
    }

    #[test]
    fn radial_matrix_matches_convolution() {
        for q in [2u64, 3] {
            let n_max = 8;
            let m = radial_action_matrix(q, n_max);
            let tp = HeckeElement::t_prime(q);
            for j in 0..=n_max {
                let col = tp
                    .convolve(&HeckeElement::normalized_e(q, j))
                    .change_basis(BasisTag::NormalizedE);
                for (i, row) in m.iter().enumerate() {
                    assert_eq!(row[j], col.coeff(i), "entry ({i},{j}) at q={q}");
                }
            }
        }
    }

    #[test]
    fn radial_apply_examples() {
        let q = 2;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let ind = RadialFunction::new(q, vec![one, zero, zero, zero]).unwrap();
        let out = ind.radial_apply().unwrap();
        assert_eq!(out.len(), 3);
        assert!((out.value(0) - zero).norm() < 1e-15);
        assert!((out.value(1) - Complex64::new(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((out.value(2) - zero).norm() < 1e-15);
        assert!(RadialFunction::new(q, vec![one])
            .unwrap()
            .radial_apply()
            .is_err());
        assert!(RadialFunction::new(q, vec![]).is_err());
    }

    #[test]
    fn canonical_string_round_trip() {
        let q = 2;
        let f = HeckeElement::from_coeffs(
            q,
            BasisTag::Phi,
            [
                (0, QExt::one(q)),
                (2, QExt::from_rational(q, rat(-3, 2))),
                (5, QExt::sqrt_q(q)),
            ],
        );
        let s = f.to_canonical_string();
        assert_eq!(s, "Phi:{0:(1,0,0,0),2:(-3/2,0,0,0),5:(0,1,0,0)}");
        assert_eq!(HeckeElement::parse(q, &s).unwrap(), f);
        // bare rationals accepted for coefficients
        let g = HeckeElement::parse(q, "T:{1:1}").unwrap();
        assert_eq!(g, HeckeElement::t(q, 1));
        assert!(HeckeElement::parse(q, "X:{0:1}").is_err());
        assert!(HeckeElement::parse(q, "T:0:1").is_err());
    }

    #[test]
    #[should_panic(expected = "context mismatch")]
    fn convolve_mixed_contexts_panics() {
        let _ = HeckeElement::t(2, 1).convolve(&HeckeElement::t(3, 1));
    }

    fn small_qext(q: u64) -> impl Strategy<Value = QExt> {
        ((-9i64..=9, 1i64..=3), (-4i64..=4, 1i64..=2)).prop_map(move |((an, ad), (bn, bd))| {
            QExt::new(q, rat(an, ad), rat(bn, bd), rat_int(0), rat_int(0))
        })
    }

    fn element(q: u64) -> impl Strategy<Value = HeckeElement> {
        let entry = (0usize..=8, small_qext(q));
        (
            proptest::sample::select(BasisTag::ALL.to_vec()),
            proptest::collection::vec(entry, 0..5),
        )
            .prop_map(move |(basis, entries)| HeckeElement::from_coeffs(q, basis, entries))
    }

    fn any_element() -> impl Strategy<Value = HeckeElement> {
        prop_oneof![element(2), element(3), element(5)]
    }

    proptest! {
        #[test]
        fn basis_round_trips_are_exact(f in any_element()) {
            for target in BasisTag::ALL {
                let back = f.change_basis(target).change_basis(f.basis());
                prop_assert_eq!(&back, &f);
            }
        }

        #[test]
        fn convolution_commutes_and_associates(f in any_element()) {
            let q = f.q();
            let g = HeckeElement::from_coeffs(q, BasisTag::Phi,
                [(0, QExt::from_rational(q, rat(1, 2))), (3, QExt::one(q))]);
            let h = HeckeElement::t(q, 2);
            prop_assert!(f.convolve(&g).eq_as_elements(&g.convolve(&f)));
            prop_assert!(f.convolve(&g.convolve(&h)).eq_as_elements(&f.convolve(&g).convolve(&h)));
        }

        #[test]
        fn star_is_an_involutive_homomorphism(f in any_element()) {
            let q = f.q();
            let g = HeckeElement::psi(q, 2);
            prop_assert_eq!(f.star().star(), f.clone());
            prop_assert!(f.convolve(&g).star().eq_as_elements(&f.star().convolve(&g.star())));
        }

        #[test]
        fn generator_is_self_adjoint(f in any_element()) {
            let q = f.q();
            let g = HeckeElement::from_coeffs(q, BasisTag::Psi,
                [(1, QExt::one(q)), (2, QExt::from_rational(q, rat(2, 3)))]);
            let tp = HeckeElement::t_prime(q);
            prop_assert_eq!(
                tp.convolve(&f).inner_product(&g),
                f.inner_product(&tp.convolve(&g))
            );
        }

        #[test]
        fn element_string_round_trip(f in any_element()) {
            prop_assert_eq!(HeckeElement::parse(f.q(), &f.to_canonical_string()).unwrap(), f);
        }
    }
}
