//! The spectral side: the Kesten measure and its orthogonal polynomials.
//!
//! The vacuum distribution of T′(𝔭) is the Kesten measure of the
//! (q+1)-regular tree,
//!
//! dμ_q(x) = (q+1)/((q^{1/2}+q^{−1/2})² − x²) · √(4−x²)/(2π) dx  on [−2, 2],
//!
//! a free-Meixner law: the semicircle density divided by a quadratic with
//! roots just outside the support. Its Stieltjes transform is available both
//! in closed form and as the periodic continued fraction induced by the
//! Jacobi weights (ω₁, 1, 1, …); Stieltjes–Perron inversion recovers the
//! density, and monic orthogonal polynomials are Chebyshev combinations
//! Pₙ = Uₙ(x/2) − q^{−1}Uₙ₋₂(x/2).
//!
//! Quadrature uses the substitution x = 2cosθ, which absorbs the edge
//! square root: integrands become smooth 2π-periodic functions of θ, so the
//! trapezoid rule converges geometrically (the default 4096 nodes are far
//! past the accuracy floor for every integrand used here).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::exact::{rat_int, rat_to_f64, Rational};
use crate::fock::JacobiCoefficients;
use crate::{Error, Result};

pub const DEFAULT_NODES: usize = 4096;

/// Kesten density at `x`; zero outside [−2, 2].
pub fn kesten_density(q: u64, x: f64) -> f64 {
    if x.abs() >= 2.0 {
        return 0.0;
    }
    let qf = q as f64;
    let c2 = qf + 2.0 + 1.0 / qf; // (q^{1/2} + q^{-1/2})²
    (qf + 1.0) / (c2 - x * x) * (4.0 - x * x).sqrt() / (2.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceDensity {
    /// Wigner semicircle √(4−x²)/(2π), the q → ∞ limit.
    Semicircle,
    /// Vertical Sato–Tate density at prime p (written here in its
    /// √(1 − x²/4) normalization); coincides with the Kesten density at q = p.
    Serre(u64),
}

pub fn reference_density(kind: ReferenceDensity, x: f64) -> f64 {
    if x.abs() >= 2.0 {
        return 0.0;
    }
    match kind {
        ReferenceDensity::Semicircle => (4.0 - x * x).sqrt() / (2.0 * PI),
        ReferenceDensity::Serre(p) => {
            let pf = p as f64;
            let c2 = pf.sqrt() + 1.0 / pf.sqrt();
            (pf + 1.0) / PI * (1.0 - x * x / 4.0).sqrt() / (c2 * c2 - x * x)
        }
    }
}

/// The measure as an object: support, density, mass, moments.
#[derive(Clone, Copy, Debug)]
pub struct SpectralMeasure {
    q: u64,
}

impl SpectralMeasure {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        Ok(SpectralMeasure { q })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn support(&self) -> (f64, f64) {
        (-2.0, 2.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        kesten_density(self.q, x)
    }

    pub fn total_mass(&self) -> f64 {
        integrate(self.q, |_| 1.0)
    }

    pub fn moment(&self, m: u32) -> f64 {
        moment_numeric(self.q, m)
    }
}

/// ∫ f dμ_q by the trapezoid rule in θ (x = 2cosθ), `nodes` panels on [0, π].
pub fn integrate_with_nodes<F: Fn(f64) -> f64>(q: u64, f: F, nodes: usize) -> f64 {
    assert!(nodes >= 2, "need at least two quadrature panels");
    let qf = q as f64;
    let c2 = qf + 2.0 + 1.0 / qf;
    let h = PI / nodes as f64;
    let mut sum = 0.0;
    // integrand vanishes like sin²θ at both endpoints, so the boundary
    // trapezoid terms are exactly zero
    for j in 1..nodes {
        let theta = h * j as f64;
        let (sin, cos) = theta.sin_cos();
        let x = 2.0 * cos;
        let weight = (qf + 1.0) * 2.0 * sin * sin / (PI * (c2 - x * x));
        sum += f(x) * weight;
    }
    sum * h
}

pub fn integrate<F: Fn(f64) -> f64>(q: u64, f: F) -> f64 {
    integrate_with_nodes(q, f, DEFAULT_NODES)
}

/// m-th moment ∫ xᵐ dμ_q by quadrature.
pub fn moment_numeric(q: u64, m: u32) -> f64 {
    moment_numeric_with_nodes(q, m, DEFAULT_NODES)
}

pub fn moment_numeric_with_nodes(q: u64, m: u32, nodes: usize) -> f64 {
    integrate_with_nodes(q, |x| x.powi(m as i32), nodes)
}

fn gamma(q: u64) -> f64 {
    (q as f64 + 1.0) / q as f64
}

/// Stieltjes transform G(z) = ∫ dμ(x)/(z−x) as the depth-truncated periodic
/// continued fraction 1/(z − ω₁/(z − 1/(z − ⋯))).
pub fn stieltjes_cf(q: u64, z: Complex64, depth: usize) -> Result<Complex64> {
    if depth == 0 {
        return Err(Error::InvalidParameter(
            "continued fraction needs depth ≥ 1".into(),
        ));
    }
    if z.im == 0.0 {
        return Err(Error::Domain(
            "continued fraction evaluated on the real axis".into(),
        ));
    }
    let mut tail = Complex64::new(0.0, 0.0);
    for _ in 0..depth - 1 {
        tail = (z - tail).inv();
    }
    Ok((z - gamma(q) * tail).inv())
}

/// G(z) in closed form,
///   G(z) = ((2−γ)z − γ√(z²−4)) / (2(1−γ)z² + 2γ²),   γ = (q+1)/q,
/// with the branch √(z²−4) ~ z at ∞ realized as √(z−2)·√(z+2) in principal
/// branches. Defined off the cut [−2, 2].
pub fn stieltjes_closed(q: u64, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re.abs() <= 2.0 {
        return Err(Error::Domain("z on the branch cut [-2, 2]".into()));
    }
    let g = gamma(q);
    let w = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    let den = 2.0 * (1.0 - g) * z * z + 2.0 * g * g;
    if den.norm() <= 1e-6 * z.norm_sqr().max(1.0) {
        // removable zeros of the printed denominator at z² = γ²/(γ−1):
        // rationalizing with ((2−γ)z + γw) gives the equivalent pole-free form
        return Ok(2.0 / ((2.0 - g) * z + g * w));
    }
    Ok(((2.0 - g) * z - g * w) / den)
}

/// Stieltjes–Perron recovery of the density: −Im G(x + iε)/π.
pub fn stieltjes_inversion(q: u64, x: f64, eps: f64) -> f64 {
    assert!(
        eps > 0.0,
        "need a positive offset into the upper half-plane"
    );
    let g = stieltjes_closed(q, Complex64::new(x, eps)).expect("x + iε is off the cut");
    -g.im / PI
}

/// Dense polynomial with exact rational coefficients (index = degree);
/// trailing zeros are trimmed, so equality is exact equality of polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::new(vec![rat_int(1)])
    }

    pub fn monomial(deg: usize) -> Self {
        let mut coeffs = vec![rat_int(0); deg + 1];
        coeffs[deg] = rat_int(1);
        Polynomial { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with deg 0 for constants; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(|| rat_int(0))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// P(s·x): coefficient k picks up sᵏ.
    pub fn stretch(&self, s: &Rational) -> Polynomial {
        let mut pow = rat_int(1);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * &pow;
                pow *= s;
                out
            })
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rat_to_f64(c))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + rat_to_f64(c))
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(rat_int(0), |acc, c| acc * x + c)
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![rat_int(0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c < &rat_int(0) { "-" } else { "+" };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let unit_mag = mag == rat_int(1);
            match (k, unit_mag) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{k}")?,
                (_, false) => write!(f, "{mag}*x^{k}")?,
            }
        }
        Ok(())
    }
}

/// Chebyshev U of the second kind: U₀ = 1, U₁ = 2y, Uₙ = 2y·Uₙ₋₁ − Uₙ₋₂.
pub fn chebyshev_u(n: usize) -> Polynomial {
    let two_y = Polynomial::new(vec![rat_int(0), rat_int(2)]);
    let mut prev = Polynomial::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two_y.clone();
    for _ in 1..n {
        let next = &(&two_y * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Monic orthogonal polynomials of the Kesten measure:
/// P₀ = 1, P₁ = x, Pₙ₊₁ = x·Pₙ − ωₙ·Pₙ₋₁ (α ≡ 0).
pub fn orthopoly(q: u64, n: usize) -> Polynomial {
    let jacobi = JacobiCoefficients::new(q);
    let x = Polynomial::monomial(1);
    let mut prev = Polynomial::one();
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for k in 1..n {
        let next = &(&x * &cur) - &prev.scale(&jacobi.omega(k));
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::fock::moment_path_sum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_closed_values() {
        // ρ₂(0) = 2/(3π)
        assert!((kesten_density(2, 0.0) - 2.0 / (3.0 * PI)).abs() < 1e-15);
        assert_eq!(kesten_density(2, 2.0), 0.0);
        assert_eq!(kesten_density(2, -2.5), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x: f64 = rng.gen_range(-2.0..2.0);
            for q in [2u64, 3, 5] {
                assert!((kesten_density(q, x) - kesten_density(q, -x)).abs() < 1e-16);
                assert!(kesten_density(q, x) > 0.0);
            }
        }
    }

    #[test]
    fn measure_has_mass_one() {
        for q in [2u64, 3, 5] {
            let mu = SpectralMeasure::new(q).unwrap();
            assert!((mu.total_mass() - 1.0).abs() < 1e-13, "mass at q={q}");
            assert_eq!(mu.support(), (-2.0, 2.0));
        }
        assert!(SpectralMeasure::new(1).is_err());
    }

    #[test]
    fn quadrature_matches_exact_moments() {
        for q in [2u64, 3, 5] {
            for m in (0..=20u32).step_by(2) {
                let exact = rat_to_f64(&moment_path_sum(q, m as usize));
                let quad = moment_numeric(q, m);
                assert!(
                    (exact - quad).abs() <= 1e-11 * exact.max(1.0),
                    "m={m} q={q}: {exact} vs {quad}"
                );
            }
            for m in [1u32, 3, 9, 15] {
                assert!(moment_numeric(q, m).abs() < 1e-11, "odd moment m={m}");
            }
        }
    }

    #[test]
    fn continued_fraction_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [2u64, 3, 5] {
            for _ in 0..20 {
                let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..2.0));
                let cf = stieltjes_cf(q, z, 200).unwrap();
                let closed = stieltjes_closed(q, z).unwrap();
                assert!((cf - closed).norm() < 1e-12, "q={q} z={z}");
                // Herglotz: upper half-plane maps to lower (G has Im < 0 up top)
                assert!(closed.im < 0.0);
                // real symmetry: G(z̄) = conj G(z)
                let conj = stieltjes_closed(q, z.conj()).unwrap();
                assert!((conj - closed.conj()).norm() < 1e-15);
            }
        }
        assert!(stieltjes_cf(2, Complex64::new(3.0, 0.0), 200).is_err());
        assert!(stieltjes_cf(2, Complex64::new(0.0, 1.0), 0).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        // off the cut on the real axis and at complex points, G is the
        // actual Cauchy integral of the density
        for q in [2u64, 3] {
            for z in [
                Complex64::new(3.0, 0.0),
                Complex64::new(-2.7, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(-1.2, -0.8),
            ] {
                let g = stieltjes_closed(q, z).unwrap();
                let re = integrate(q, |x| ((z - x).inv()).re);
                let im = integrate(q, |x| ((z - x).inv()).im);
                assert!((g - Complex64::new(re, im)).norm() < 1e-11, "q={q} z={z}");
            }
        }
        // fixed-point value at z = 3, q = 2: G = 1/(3 − γ(3−√5)/2)
        let k = (3.0 - 5.0f64.sqrt()) / 2.0;
        let expect = 1.0 / (3.0 - 1.5 * k);
        assert!((stieltjes_closed(2, Complex64::new(3.0, 0.0)).unwrap().re - expect).abs() < 1e-14);
        assert!(stieltjes_closed(2, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn printed_denominator_zeros_are_removable() {
        // 2(1−γ)z² + 2γ² vanishes at z = ±γ/√(γ−1), outside the support;
        // the transform itself is regular there
        for q in [2u64, 3, 5] {
            let g = gamma(q);
            let z0 = g / (g - 1.0).sqrt();
            for z in [
                Complex64::new(z0, 0.0),
                Complex64::new(-z0, 0.0),
                Complex64::new(z0 + 1e-9, 0.0),
                Complex64::new(z0, 1e-9),
            ] {
                let val = stieltjes_closed(q, z).unwrap();
                assert!(val.re.is_finite() && val.im.is_finite());
                let re = integrate(q, |x| ((z - x).inv()).re);
                assert!((val.re - re).abs() < 1e-9, "q={q} z={z} got {val}");
            }
        }
    }

    #[test]
    fn inversion_recovers_density() {
        for q in [2u64, 3, 5] {
            for k in 0..39 {
                let x = -1.9 + 0.1 * k as f64;
                let rec = stieltjes_inversion(q, x, 1e-8);
                assert!((rec - kesten_density(q, x)).abs() < 1e-5, "q={q} x={x}");
            }
        }
    }

    #[test]
    fn reference_density_relations() {
        assert!((reference_density(ReferenceDensity::Semicircle, 0.0) - 1.0 / PI).abs() < 1e-16);
        for q in [2u64, 3, 5] {
            for k in 0..=40 {
                let x = -2.0 + 0.1 * k as f64;
                let serre = reference_density(ReferenceDensity::Serre(q), x);
                assert!((serre - kesten_density(q, x)).abs() < 1e-14, "q={q} x={x}");
            }
        }
        // q → ∞ limit is the semicircle
        let big = 1_000_000u64;
        for k in 0..=40 {
            let x = -2.0 + 0.1 * k as f64;
            let diff = kesten_density(big, x) - reference_density(ReferenceDensity::Semicircle, x);
            assert!(diff.abs() < 1e-5, "x={x}");
        }
    }

    #[test]
    fn chebyshev_structure() {
        assert_eq!(chebyshev_u(0), Polynomial::one());
        assert_eq!(
            chebyshev_u(1),
            Polynomial::new(vec![rat_int(0), rat_int(2)])
        );
        assert_eq!(
            chebyshev_u(2),
            Polynomial::new(vec![rat_int(-1), rat_int(0), rat_int(4)])
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let theta: f64 = rng.gen_range(0.05..PI - 0.05);
            for n in 0..=10usize {
                let lhs = chebyshev_u(n).eval_f64(theta.cos()) * theta.sin();
                let rhs = ((n as f64 + 1.0) * theta).sin();
                assert!((lhs - rhs).abs() < 1e-12, "n={n} theta={theta}");
            }
        }
    }

    #[test]
    fn orthopoly_chebyshev_identity_exact() {
        assert_eq!(
            orthopoly(2, 2),
            Polynomial::new(vec![rat(-3, 2), rat_int(0), rat_int(1)])
        );
        let half = rat(1, 2);
        for q in [2u64, 3, 5] {
            let qinv = rat(1, q as i64);
            assert_eq!(orthopoly(q, 0), Polynomial::one());
            assert_eq!(orthopoly(q, 1), Polynomial::monomial(1));
            for n in 2..=15usize {
                let p = orthopoly(q, n);
                assert_eq!(p.coeff(n), rat_int(1), "monic at n={n}");
                let u_n = chebyshev_u(n).stretch(&half);
                let u_n2 = chebyshev_u(n - 2).stretch(&half);
                assert_eq!(&p, &(&u_n - &u_n2.scale(&qinv)), "identity at q={q} n={n}");
            }
        }
    }

    #[test]
    fn orthopoly_orthogonality_numeric() {
        for q in [2u64, 3, 5] {
            let polys: Vec<Polynomial> = (0..=10).map(|n| orthopoly(q, n)).collect();
            let omega1 = (q as f64 + 1.0) / q as f64;
            for m in 0..=10usize {
                for n in 0..=10usize {
                    let val = integrate(q, |x| polys[m].eval_f64(x) * polys[n].eval_f64(x));
                    let expect = if m != n {
                        0.0
                    } else if n == 0 {
                        1.0
                    } else {
                        omega1
                    };
                    assert!((val - expect).abs() < 1e-8, "q={q} ({m},{n}): {val}");
                }
            }
        }
    }

    #[test]
    fn polynomial_arithmetic_and_display() {
        let p = Polynomial::new(vec![rat_int(1), rat_int(1)]); // 1 + x
        let sq = &p * &p;
        assert_eq!(
            sq,
            Polynomial::new(vec![rat_int(1), rat_int(2), rat_int(1)])
        );
        assert_eq!(sq.degree(), Some(2));
        assert_eq!((&sq - &sq).degree(), None);
        assert_eq!(sq.eval_rational(&rat(1, 2)), rat(9, 4));
        assert_eq!(orthopoly(2, 2).to_string(), "x^2 - 3/2");
        assert_eq!(Polynomial::zero().to_string(), "0");
        assert_eq!(
            Polynomial::new(vec![rat_int(0), rat(-1, 3)]).to_string(),
            "-1/3*x"
        );
    }
}
