//! Macdonald spherical functions, the Plancherel measure, and the
//! spherical Fourier transform.
//!
//! The tempered spherical functions are indexed by s = it with t running
//! over one period [0, 2π/ln q); the associated character of the Hecke
//! algebra sends T′(𝔭) to x(t) = 2cos(t·ln q). Macdonald's formula
//!
//! Ω_s(n) = q^{−n/2}/(1+q^{−1}) · [ c(s)·q^{−ns} + c(−s)·q^{ns} ],
//! c(s) = (1 − q^{−1}q^{2s})/(1 − q^{2s}),
//!
//! has removable singularities where q^{2s} = 1; there the two c-terms blow
//! up against each other and the value is recovered by Richardson
//! extrapolation in a real offset δ off the unitary axis (legitimate because
//! Ω is even and periodic in s, so the removable points are critical points
//! and the even-order extrapolation converges to the limit value).
//!
//! The spherical transform ℱ sends a Hecke element to the polynomial in
//! x that its polynomial-in-T′ coordinates spell out; the inverse transform
//! integrates against Ω and the Plancherel density
//!
//! w(t) = (1+q^{−1})·ln q/(4π) · 4sin²θ / (1 − 2cos(2θ)/q + q^{−2}),
//! θ = t·ln q,
//!
//! which has total mass exactly 1 over a full period and pushes forward to
//! the Kesten measure under t ↦ x(t).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::exact::{rat_to_f64, QExt};
use crate::hecke::{cell_volume, BasisTag, HeckeElement};
use crate::report::Report;
use crate::spectral::{self, Polynomial};
use crate::{Error, Result};

/// A point s = it of the tempered spectrum, stored as t reduced to one
/// period [0, 2π/ln q).
#[derive(Clone, Copy, Debug)]
pub struct SpectralParam {
    q: u64,
    t: f64,
}

impl SpectralParam {
    pub fn new(q: u64, t: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        let period = 2.0 * PI / (q as f64).ln();
        Ok(SpectralParam {
            q,
            t: t.rem_euclid(period),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn period(q: u64) -> f64 {
        2.0 * PI / (q as f64).ln()
    }

    /// The T′-eigenvalue of this character: x = 2cos(t·ln q) ∈ [−2, 2].
    pub fn x(&self) -> f64 {
        2.0 * (self.t * (self.q as f64).ln()).cos()
    }

    pub fn spherical(&self, n: usize) -> f64 {
        spherical_macdonald(self.q, n, self.t)
    }

    pub fn density(&self) -> f64 {
        plancherel_density(self.q, self.t)
    }
}

/// Harish-Chandra c-function at the point s (any complex s with q^{2s} ≠ 1).
pub fn c_function(q: u64, s: Complex64) -> Complex64 {
    let z = (2.0 * s * (q as f64).ln()).exp(); // q^{2s}
    (1.0 - z / q as f64) / (1.0 - z)
}

fn macdonald_raw(q: u64, n: usize, s: Complex64) -> Complex64 {
    let lnq = (q as f64).ln();
    let growth = (n as f64 * s * lnq).exp(); // q^{ns}
    let prefactor = (q as f64).powf(-(n as f64) / 2.0) / (1.0 + 1.0 / q as f64);
    prefactor * (c_function(q, s) / growth + c_function(q, -s) * growth)
}

/// Macdonald spherical function Ω_s(n) at s = it.
///
/// Real-valued on the tempered spectrum. n = 0 returns exactly 1 (the two
/// c-terms telescope: c(s) + c(−s) = 1 + q^{−1} identically). Within
/// |1 − q^{2it}| < 1e-9 of a removable point the value is taken at the
/// point itself by Richardson extrapolation — the error of that snap is
/// quadratically small since Ω is even around these points. Between that
/// window and distance ~1e-6 the raw formula loses up to ~ε/|1 − q^{2it}|
/// to cancellation; the verification grids sit far from the windows.
pub fn spherical_macdonald(q: u64, n: usize, t: f64) -> f64 {
    assert!(q >= 2, "q must be at least 2");
    if n == 0 {
        return 1.0;
    }
    let lnq = (q as f64).ln();
    let theta = t * lnq;
    let z = Complex64::new(0.0, 2.0 * theta).exp();
    if (1.0 - z).norm() < 1e-9 {
        // snap to the nearest removable point t₀ = kπ/ln q and extrapolate
        // in a real offset: A(δ) = (Ω(it₀+δ) + Ω(it₀−δ))/2 has only even
        // Laurent terms, so (4A(δ/2) − A(δ))/3 converges like δ⁴. At these
        // points q^{2(it₀+δ)} = q^{2δ} is real and 1 − q^{2δ} is computed
        // through exp_m1, so the pole cancellation costs no precision; the
        // growth factor only picks up the sign (−1)^{nk}.
        let k = (theta / PI).round() as i64;
        let sign = if (k * n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let qf = q as f64;
        let delta = 1e-5 / lnq;
        let one_sided = |d: f64| -> f64 {
            let em = (2.0 * d * lnq).exp_m1(); // q^{2d} − 1, full precision
            let c_plus = (1.0 - (1.0 + em) / qf) / -em;
            let em_inv = (-2.0 * d * lnq).exp_m1();
            let c_minus = (1.0 - (1.0 + em_inv) / qf) / -em_inv;
            let growth = sign * (n as f64 * d * lnq).exp();
            let prefactor = qf.powf(-(n as f64) / 2.0) / (1.0 + 1.0 / qf);
            prefactor * (c_plus / growth + c_minus * growth)
        };
        let avg = |d: f64| (one_sided(d) + one_sided(-d)) / 2.0;
        return (4.0 * avg(delta / 2.0) - avg(delta)) / 3.0;
    }
    macdonald_raw(q, n, Complex64::new(0.0, t)).re
}

/// Ω_s(0..=n_max) for the character with T′-eigenvalue x, by the radial
/// three-term recurrence: Ω(1) = x√q/(q+1),
/// Ω(n+1) = q^{−1/2}(x·Ω(n) − q^{−1/2}Ω(n−1)).
pub fn spherical_by_recurrence(q: u64, x: f64, n_max: usize) -> Vec<f64> {
    assert!(q >= 2, "q must be at least 2");
    let qf = q as f64;
    let sqrt_q = qf.sqrt();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(x * sqrt_q / (qf + 1.0));
    for n in 1..n_max {
        let next = (x * out[n] - out[n - 1] / sqrt_q) / sqrt_q;
        out.push(next);
    }
    out
}

/// Plancherel density w(t) on one period [0, 2π/ln q); mass exactly 1.
pub fn plancherel_density(q: u64, t: f64) -> f64 {
    let qf = q as f64;
    let lnq = qf.ln();
    let theta = t * lnq;
    let sin = theta.sin();
    let denom = 1.0 - 2.0 * (2.0 * theta).cos() / qf + 1.0 / (qf * qf);
    (1.0 + 1.0 / qf) * lnq / (4.0 * PI) * 4.0 * sin * sin / denom
}

/// ∫ f(t) dν(t) over one period against the Plancherel measure, by the
/// periodic trapezoid rule with `nodes` points.
pub fn integrate_plancherel<F: Fn(f64) -> f64>(q: u64, f: F, nodes: usize) -> f64 {
    assert!(nodes >= 2, "need at least two quadrature nodes");
    let period = SpectralParam::period(q);
    let h = period / nodes as f64;
    let mut sum = 0.0;
    for j in 0..nodes {
        let t = h * j as f64;
        sum += f(t) * plancherel_density(q, t);
    }
    sum * h
}

/// Image of a Hecke element under the spherical transform: the polynomial
/// in x = ℱ(T′) spelled out by its polynomial-in-T′ coordinates. Exact.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpectralPolynomial {
    q: u64,
    coeffs: Vec<QExt>,
}

impl SpectralPolynomial {
    pub fn new(q: u64, mut coeffs: Vec<QExt>) -> Self {
        while coeffs.last().is_some_and(QExt::is_zero) {
            coeffs.pop();
        }
        SpectralPolynomial { q, coeffs }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> QExt {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| QExt::zero(self.q))
    }

    pub fn coeffs(&self) -> &[QExt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(QExt::to_f64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn eval_param(&self, s: &SpectralParam) -> f64 {
        assert_eq!(self.q, s.q(), "SpectralPolynomial context mismatch");
        self.eval_f64(s.x())
    }

    /// Downgrade to a rational-coefficient polynomial if no radicals occur.
    pub fn to_rational_polynomial(&self) -> Option<Polynomial> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.as_rational().cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(Polynomial::new(coeffs))
    }

    pub fn mul(&self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        assert_eq!(self.q, rhs.q, "SpectralPolynomial context mismatch");
        if self.is_zero() || rhs.is_zero() {
            return SpectralPolynomial::new(self.q, Vec::new());
        }
        let mut out = vec![QExt::zero(self.q); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        SpectralPolynomial::new(self.q, out)
    }

    pub fn add(&self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        assert_eq!(self.q, rhs.q, "SpectralPolynomial context mismatch");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        SpectralPolynomial::new(
            self.q,
            (0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect(),
        )
    }
}

impl fmt::Display for SpectralPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{k}")?,
            }
        }
        Ok(())
    }
}

/// Spherical transform of an exact Hecke element.
pub fn fourier(f: &HeckeElement) -> SpectralPolynomial {
    let poly = f.change_basis(BasisTag::PolyInTPrime);
    let deg = poly.max_index().map_or(0, |d| d + 1);
    let mut coeffs = vec![QExt::zero(f.q()); deg];
    for (n, c) in poly.iter() {
        coeffs[n] = c.clone();
    }
    SpectralPolynomial::new(f.q(), coeffs)
}

/// A radial function with floating-point values on the Cartan cells —
/// Hecke elements as the inverse transform reconstructs them (the value on
/// cell n is the Ψₙ-coordinate).
#[derive(Clone, Debug)]
pub struct NumericHeckeElement {
    q: u64,
    values: Vec<f64>,
}

impl NumericHeckeElement {
    pub fn new(q: u64, values: Vec<f64>) -> Self {
        NumericHeckeElement { q, values }
    }

    pub fn from_exact(f: &HeckeElement) -> Self {
        let psi = f.change_basis(BasisTag::Psi);
        let len = psi.max_index().map_or(0, |n| n + 1);
        let values = (0..len).map(|n| psi.coeff(n).to_f64()).collect();
        NumericHeckeElement { q: f.q(), values }
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

    pub fn coeff(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_distance(&self, other: &NumericHeckeElement) -> f64 {
        assert_eq!(self.q, other.q, "NumericHeckeElement context mismatch");
        let len = self.len().max(other.len());
        (0..len)
            .map(|n| (self.coeff(n) - other.coeff(n)).abs())
            .fold(0.0, f64::max)
    }

    /// L²(G//K) pairing Σ f(n)g(n)vol(cell n).
    pub fn pairing(&self, other: &NumericHeckeElement) -> f64 {
        assert_eq!(self.q, other.q, "NumericHeckeElement context mismatch");
        let len = self.len().min(other.len());
        (0..len)
            .map(|n| self.coeff(n) * other.coeff(n) * rat_to_f64(&cell_volume(self.q, n)))
            .sum()
    }
}

/// Inverse spherical transform: (ℱ*α)(n) = ∫ Ω_t(n)·α(x(t)) dν(t) for
/// n ≤ n_max. The periodic trapezoid rule doubles from 128 nodes until the
/// whole coefficient vector moves by less than `tol`, giving up past 2^14
/// nodes. Ω is evaluated by the radial recurrence.
pub fn inverse_fourier<F: Fn(f64) -> f64>(
    q: u64,
    alpha: F,
    n_max: usize,
    tol: f64,
) -> Result<NumericHeckeElement> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "q must be at least 2, got {q}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let lnq = (q as f64).ln();
    let period = SpectralParam::period(q);
    let pass = |nodes: usize| -> Vec<f64> {
        let h = period / nodes as f64;
        let mut acc = vec![0.0; n_max + 1];
        for j in 0..nodes {
            let t = h * j as f64;
            let w = plancherel_density(q, t);
            if w == 0.0 {
                continue;
            }
            let x = 2.0 * (t * lnq).cos();
            let scale = alpha(x) * w;
            for (n, omega) in spherical_by_recurrence(q, x, n_max).into_iter().enumerate() {
                acc[n] += omega * scale;
            }
        }
        acc.iter().map(|s| s * h).collect()
    };
    let mut nodes = 128;
    let mut cur = pass(nodes);
    while nodes < (1 << 14) {
        nodes *= 2;
        let next = pass(nodes);
        let diff = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        cur = next;
        if diff < tol {
            return Ok(NumericHeckeElement::new(q, cur));
        }
    }
    Err(Error::Accuracy(format!(
        "inverse transform did not stabilize to {tol:e} within {} nodes",
        1 << 14
    )))
}

/// Certify ℱ(Φₙ) = Pₙ, exactly on coefficients and numerically against the
/// Macdonald formula: Pₙ(x(t)) = q^{−n/2}·vol(cell n)·Ω_t(n) on `grid`
/// midpoints of one period, n ≤ n_max, within `tol`.
pub fn verify_unitary_identity(q: u64, n_max: usize, grid: usize, tol: f64) -> Result<Report> {
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    let mut report = Report::new("unitary_identity", q);
    let phis: Vec<HeckeElement> = (0..=n_max).map(|n| HeckeElement::phi(q, n)).collect();

    let mut exact_ok = true;
    for (n, phi) in phis.iter().enumerate() {
        exact_ok &= fourier(phi).to_rational_polynomial() == Some(spectral::orthopoly(q, n));
    }
    report.check_bool(
        "transform_of_phi_is_orthopoly",
        exact_ok,
        format!("F(Phi_n) = P_n with exact rational coefficients, n <= {n_max}"),
    );

    let period = SpectralParam::period(q);
    let qf = q as f64;
    let mut max_err: f64 = 0.0;
    for (n, phi) in phis.iter().enumerate() {
        let poly = fourier(phi).to_f64_coeffs();
        let scale = qf.powf(-(n as f64) / 2.0) * rat_to_f64(&cell_volume(q, n));
        for k in 0..grid {
            let t = (k as f64 + 0.5) * period / grid as f64;
            let x = 2.0 * (t * qf.ln()).cos();
            let lhs = poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
            let rhs = scale * spherical_macdonald(q, n, t);
            max_err = max_err.max((lhs - rhs).abs());
        }
    }
    report.check_error(
        "polynomial_matches_macdonald",
        max_err,
        tol,
        format!("{grid} spectral points, n <= {n_max}"),
    );
    Ok(report)
}

/// Certify the transform pair: ℱ*∘ℱ = id on Φₙ (n ≤ n_max), ℱ∘ℱ* = id on
/// monomials xᵐ (m ≤ n_max), the Parseval identity on random elements,
/// unit Plancherel mass (at tol/100), and the pushforward of ν to the
/// Kesten measure under t ↦ x(t) (at tol/10).
pub fn verify_inversion(q: u64, n_max: usize, tol: f64) -> Result<Report> {
    use rand::{Rng, SeedableRng};
    let mut report = Report::new("fourier_inversion", q);

    let mass = integrate_plancherel(q, |_| 1.0, 4096);
    report.check_error(
        "plancherel_mass",
        (mass - 1.0).abs(),
        tol / 100.0,
        "total mass of the Plancherel measure over one period",
    );

    let mut max_err: f64 = 0.0;
    for n in 0..=n_max {
        let phi = HeckeElement::phi(q, n);
        let image = fourier(&phi).to_f64_coeffs();
        let alpha = move |x: f64| image.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let back = inverse_fourier(q, alpha, n_max + 2, tol / 10.0)?;
        max_err = max_err.max(back.sup_distance(&NumericHeckeElement::from_exact(&phi)));
    }
    report.check_error(
        "inverse_after_forward",
        max_err,
        tol,
        format!("F*F(Phi_n) = Phi_n on cell coordinates, n <= {n_max}"),
    );

    // F(Psi_n) = q^{n/2} P_n, so a numeric element maps to a float polynomial
    let polys: Vec<Vec<f64>> = (0..=n_max + 2)
        .map(|n| {
            let p = spectral::orthopoly(q, n);
            let scale = (q as f64).powf(n as f64 / 2.0);
            (0..=n).map(|k| rat_to_f64(&p.coeff(k)) * scale).collect()
        })
        .collect();
    let mut max_err: f64 = 0.0;
    for m in 0..=n_max {
        let back = inverse_fourier(q, |x| x.powi(m as i32), n_max + 2, tol / 10.0)?;
        let mut coeffs = vec![0.0; n_max + 3];
        for (n, poly) in polys.iter().enumerate() {
            for (k, c) in poly.iter().enumerate() {
                coeffs[k] += back.coeff(n) * c;
            }
        }
        for (k, c) in coeffs.iter().enumerate() {
            let expect = if k == m { 1.0 } else { 0.0 };
            max_err = max_err.max((c - expect).abs());
        }
    }
    report.check_error(
        "forward_after_inverse",
        max_err,
        tol,
        format!("FF*(x^m) = x^m on coefficients, m <= {n_max}"),
    );

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2718);
    let mut max_err: f64 = 0.0;
    for _ in 0..5 {
        let mut draw = || {
            let coeffs: Vec<(usize, QExt)> = (0..=6)
                .map(|n| {
                    (
                        n,
                        QExt::new(
                            q,
                            crate::exact::rat(rng.gen_range(-3i64..=3), 1),
                            crate::exact::rat(rng.gen_range(-2i64..=2), 2),
                            crate::exact::rat(rng.gen_range(-2i64..=2), 3),
                            crate::exact::rat(rng.gen_range(-1i64..=1), 1),
                        ),
                    )
                })
                .collect();
            HeckeElement::from_coeffs(q, BasisTag::Psi, coeffs)
        };
        let f = draw();
        let g = draw();
        let exact = f.inner_product(&g).to_f64();
        let fc = fourier(&f).to_f64_coeffs();
        let gc = fourier(&g).to_f64_coeffs();
        let lnq = (q as f64).ln();
        let spectral_side = integrate_plancherel(
            q,
            |t| {
                let x = 2.0 * (t * lnq).cos();
                let fv = fc.iter().rev().fold(0.0, |acc, c| acc * x + c);
                let gv = gc.iter().rev().fold(0.0, |acc, c| acc * x + c);
                fv * gv
            },
            4096,
        );
        let scale = exact.abs().max(1.0);
        max_err = max_err.max((exact - spectral_side).abs() / scale);
    }
    report.check_error(
        "parseval",
        max_err,
        tol,
        "<f,g> on the group side equals the spectral integral, random f,g",
    );

    let p2 = spectral::orthopoly(q, 2);
    let p3 = spectral::orthopoly(q, 3);
    type NamedFn = (String, Box<dyn Fn(f64) -> f64>);
    let mut test_fns: Vec<NamedFn> = vec![
        ("1".into(), Box::new(|_| 1.0)),
        ("x".into(), Box::new(|x| x)),
        ("x^2".into(), Box::new(|x| x * x)),
        ("x^3".into(), Box::new(|x| x * x * x)),
    ];
    test_fns.push(("P_2".into(), Box::new(move |x| p2.eval_f64(x))));
    test_fns.push(("P_3".into(), Box::new(move |x| p3.eval_f64(x))));
    let lnq = (q as f64).ln();
    let mut max_err: f64 = 0.0;
    for (_, h) in &test_fns {
        let plancherel_side = integrate_plancherel(q, |t| h(2.0 * (t * lnq).cos()), 4096);
        let kesten_side = spectral::integrate(q, h);
        max_err = max_err.max((plancherel_side - kesten_side).abs());
    }
    report.check_error(
        "pushforward_to_kesten",
        max_err,
        tol / 10.0,
        "integrals of 1, x, x^2, x^3, P_2, P_3 agree under x = 2cos(t ln q)",
    );

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::hecke::RadialFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectral_param_basics() {
        let period = SpectralParam::period(2);
        let s = SpectralParam::new(2, 0.3 + 2.0 * period).unwrap();
        assert!((s.t() - 0.3).abs() < 1e-12);
        assert!((s.x() - 2.0 * (0.3 * 2f64.ln()).cos()).abs() < 1e-15);
        assert!(SpectralParam::new(1, 0.0).is_err());
        assert_eq!(SpectralParam::new(2, 0.0).unwrap().x(), 2.0);
    }

    #[test]
    fn macdonald_matches_recurrence() {
        for q in [2u64, 3, 5] {
            let period = SpectralParam::period(q);
            for k in 0..50 {
                let t = (k as f64 + 0.5) * period / 50.0;
                let x = 2.0 * (t * (q as f64).ln()).cos();
                let rec = spherical_by_recurrence(q, x, 28);
                for (n, expect) in rec.iter().enumerate() {
                    let mac = spherical_macdonald(q, n, t);
                    assert!(
                        (mac - expect).abs() < 1e-10,
                        "q={q} n={n} t={t}: {mac} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn macdonald_n0_telescopes_to_one() {
        // the generic-point formula itself gives 1, not only the shortcut
        for q in [2u64, 3, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..20 {
                let s = Complex64::new(0.0, rng.gen_range(0.05..1.0));
                let raw = macdonald_raw(q, 0, s);
                assert!(
                    (raw - Complex64::new(1.0, 0.0)).norm() < 1e-11,
                    "q={q} s={s}"
                );
            }
            assert_eq!(spherical_macdonald(q, 0, 0.37), 1.0);
            assert_eq!(spherical_macdonald(q, 0, 0.0), 1.0);
        }
    }

    #[test]
    fn macdonald_at_removable_points() {
        for q in [2u64, 3, 5] {
            let lnq = (q as f64).ln();
            for (k, x) in [(0usize, 2.0f64), (1, -2.0), (2, 2.0)] {
                let t0 = k as f64 * PI / lnq;
                let rec = spherical_by_recurrence(q, x, 12);
                for (n, &rec_n) in rec.iter().enumerate() {
                    for t in [t0, t0 + 1e-12, t0 - 1e-12] {
                        let mac = spherical_macdonald(q, n, t);
                        assert!(
                            (mac - rec_n).abs() < 5e-9,
                            "q={q} n={n} t={t}: {mac} vs {rec_n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn macdonald_bounded_by_one() {
        for q in [2u64, 3] {
            let period = SpectralParam::period(q);
            for k in 0..200 {
                let t = (k as f64 + 0.5) * period / 200.0;
                for n in 0..=28usize {
                    assert!(spherical_macdonald(q, n, t).abs() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn recurrence_satisfies_radial_eigenequation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for q in [2u64, 3, 5] {
            for _ in 0..25 {
                let x: f64 = rng.gen_range(-2.0..2.0);
                let omega = spherical_by_recurrence(q, x, 20);
                let radial =
                    RadialFunction::new(q, omega.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                        .unwrap();
                let applied = radial.radial_apply().unwrap();
                for (n, &om) in omega.iter().enumerate().take(applied.len()) {
                    let expect = x * om;
                    assert!(
                        (applied.value(n).re - expect).abs() < 1e-12 * (1.0 + expect.abs()),
                        "q={q} x={x} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn plancherel_density_facts() {
        for q in [2u64, 3, 5] {
            let mass = integrate_plancherel(q, |_| 1.0, 4096);
            assert!((mass - 1.0).abs() < 1e-12, "q={q}: mass {mass}");
            let period = SpectralParam::period(q);
            assert!(plancherel_density(q, 0.0).abs() < 1e-15);
            // w = (1+1/q) ln q/(4π) · |c(it)|⁻²
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            for _ in 0..20 {
                let t = rng.gen_range(0.02..period / 2.0 - 0.02);
                let c = c_function(q, Complex64::new(0.0, t));
                let via_c = (1.0 + 1.0 / q as f64) * (q as f64).ln() / (4.0 * PI) / c.norm_sqr();
                let w = plancherel_density(q, t);
                assert!((w - via_c).abs() < 1e-12 * w.max(1.0), "q={q} t={t}");
                assert!(w > 0.0);
            }
        }
    }

    #[test]
    fn fourier_exact_images() {
        for q in [2u64, 3, 5] {
            for n in 0..=12usize {
                let phi = fourier(&HeckeElement::phi(q, n));
                assert_eq!(
                    phi.to_rational_polynomial(),
                    Some(spectral::orthopoly(q, n)),
                    "Phi_{n} at q={q}"
                );
                // Psi_n maps to q^{n/2} P_n, irrational for odd n
                let psi = fourier(&HeckeElement::psi(q, n));
                let scale = QExt::q_half_pow(q, n as i64);
                for k in 0..=n {
                    let expect =
                        QExt::from_rational(q, spectral::orthopoly(q, n).coeff(k)) * scale.clone();
                    assert_eq!(psi.coeff(k), expect, "Psi_{n} coeff {k} at q={q}");
                }
            }
            // unit maps to 1, T' maps to x
            assert_eq!(
                fourier(&HeckeElement::unit(q).unwrap()).coeffs(),
                &[QExt::one(q)]
            );
            let tp = fourier(&HeckeElement::t_prime(q));
            assert_eq!(tp.coeffs(), &[QExt::zero(q), QExt::one(q)]);
        }
    }

    #[test]
    fn fourier_is_an_algebra_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for q in [2u64, 3] {
            for _ in 0..8 {
                let mut draw = || {
                    let coeffs: Vec<(usize, QExt)> = (0..=4)
                        .map(|n| {
                            (
                                n,
                                QExt::new(
                                    q,
                                    rat(rng.gen_range(-3i64..=3), 1),
                                    rat(rng.gen_range(-2i64..=2), 1),
                                    rat(rng.gen_range(-2i64..=2), 2),
                                    rat(rng.gen_range(-1i64..=1), 1),
                                ),
                            )
                        })
                        .collect();
                    HeckeElement::from_coeffs(q, BasisTag::Psi, coeffs)
                };
                let f = draw();
                let g = draw();
                let lhs = fourier(&f.convolve(&g));
                let rhs = fourier(&f).mul(&fourier(&g));
                assert_eq!(lhs, rhs);
                let sum = fourier(&f.add(&g));
                assert_eq!(sum, fourier(&f).add(&fourier(&g)));
            }
        }
    }

    #[test]
    fn inverse_transform_closed_forms() {
        for q in [2u64, 3, 5] {
            let unit = inverse_fourier(q, |_| 1.0, 6, 1e-11).unwrap();
            assert!((unit.coeff(0) - 1.0).abs() < 1e-10);
            for n in 1..=6 {
                assert!(unit.coeff(n).abs() < 1e-10, "q={q} n={n}");
            }

            let tp = inverse_fourier(q, |x| x, 6, 1e-11).unwrap();
            let expect = 1.0 / (q as f64).sqrt();
            assert!((tp.coeff(1) - expect).abs() < 1e-10);
            assert!(tp.coeff(0).abs() < 1e-10 && tp.coeff(2).abs() < 1e-10);

            let sq = inverse_fourier(q, |x| x * x, 6, 1e-11).unwrap();
            let omega1 = (q as f64 + 1.0) / q as f64;
            assert!((sq.coeff(0) - omega1).abs() < 1e-10);
            assert!((sq.coeff(2) - 1.0 / q as f64).abs() < 1e-10);
            assert!(sq.coeff(1).abs() < 1e-10 && sq.coeff(3).abs() < 1e-10);
        }
        assert!(inverse_fourier(1, |_| 1.0, 2, 1e-9).is_err());
        assert!(inverse_fourier(2, |_| 1.0, 2, -1.0).is_err());
    }

    #[test]
    fn numeric_elements_track_exact_ones() {
        let f = HeckeElement::t(2, 3);
        let num = NumericHeckeElement::from_exact(&f);
        // T(p^3) is the indicator of cells 3 and 1
        assert_eq!(num.values(), &[0.0, 1.0, 0.0, 1.0]);
        let g = NumericHeckeElement::new(2, vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(num.sup_distance(&g), 0.0);
        // pairing matches the exact inner product: ||T(p^3)||² = vol₁+vol₃
        let exact = f.inner_product(&f).to_f64();
        assert!((num.pairing(&g) - exact).abs() < 1e-12);
    }

    #[test]
    fn unitary_identity_report_passes() {
        for q in [2u64, 3] {
            let report = verify_unitary_identity(q, 10, 200, 1e-9).unwrap();
            assert!(report.passed, "{}", report.render_text());
            assert_eq!(report.checks.len(), 2);
        }
        assert!(verify_unitary_identity(2, 3, 0, 1e-9).is_err());
    }

    #[test]
    fn inversion_report_passes() {
        for q in [2u64, 3] {
            let report = verify_inversion(q, 10, 1e-8).unwrap();
            assert!(report.passed, "{}", report.render_text());
            assert_eq!(report.checks.len(), 5);
        }
    }

    #[test]
    fn spectral_polynomial_display() {
        let p = fourier(&HeckeElement::phi(2, 2));
        assert_eq!(p.to_string(), "(-3/2,0,0,0) + (1,0,0,0)*x^2");
        assert_eq!(SpectralPolynomial::new(2, vec![]).to_string(), "0");
    }
}
