//! The interacting Fock space underlying the algebra's spectral theory.
//!
//! In the orthonormal cell basis {eₙ}, convolution by T′(𝔭) decomposes as
//! B⁺ + B⁻ + B⁰ with B⁺eₙ = √(ωₙ₊₁)·eₙ₊₁, B⁻ its transpose, B⁰ = 0, where
//! the Jacobi weights are ω₁ = (q+1)/q and ωₙ = 1 for n ≥ 2 — a rank-one
//! perturbation of the free (Wigner) Fock structure. Moments of T′(𝔭) in the
//! vacuum state are weighted Dyck-path sums over these coefficients, computed
//! here both exactly (lattice-path dynamic programming over ℚ) and
//! numerically (tridiagonal matrix powers), so the two can be cross-checked
//! against quadrature over the spectral measure.

use crate::exact::{rat, rat_int, rat_to_f64, QExt, Rational};
use crate::hecke::radial_action_matrix;
use crate::{Error, Result};

/// Jacobi parameters (ωₙ, αₙ) of the orthogonalization; ω is 1-indexed.
#[derive(Clone, Copy, Debug)]
pub struct JacobiCoefficients {
    q: u64,
}

impl JacobiCoefficients {
    pub fn new(q: u64) -> Self {
        assert!(q >= 2, "q must be at least 2");
        JacobiCoefficients { q }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// ω₁ = (q+1)/q, ωₙ = 1 for n ≥ 2.
    pub fn omega(&self, n: usize) -> Rational {
        assert!(n >= 1, "Jacobi weights are 1-indexed");
        if n == 1 {
            rat(self.q as i64 + 1, self.q as i64)
        } else {
            rat_int(1)
        }
    }

    /// αₙ ≡ 0: the measure is symmetric.
    pub fn alpha(&self, _n: usize) -> Rational {
        rat_int(0)
    }

    pub fn omega_f64(&self, n: usize) -> f64 {
        rat_to_f64(&self.omega(n))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OperatorKind {
    Creation,
    Annihilation,
    Preservation,
}

/// A truncated Fock-space operator on span{e₀, …, e_N}; entry (i, j) is the
/// eᵢ-coefficient of the image of eⱼ.
#[derive(Clone, Debug)]
pub struct FockOperator {
    kind: OperatorKind,
    q: u64,
    entries: Vec<Vec<QExt>>,
}

impl FockOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &QExt {
        &self.entries[i][j]
    }

    pub fn matrix(&self) -> &[Vec<QExt>] {
        &self.entries
    }
}

/// The triple (B⁺, B⁻, B⁰) truncated at e_N (outflow from e_N is dropped).
pub fn build_operators(q: u64, n_max: usize) -> (FockOperator, FockOperator, FockOperator) {
    assert!(n_max >= 2, "truncation must be at least 2");
    let jacobi = JacobiCoefficients::new(q);
    let dim = n_max + 1;
    let zero = || vec![vec![QExt::zero(q); dim]; dim];
    let (mut up, mut down, preserve) = (zero(), zero(), zero());
    for n in 0..n_max {
        // √ω₁ = √((q+1)/q); √ωₙ = 1 for n ≥ 2
        let w = if n == 0 {
            QExt::sqrt_ratio(q)
        } else {
            QExt::one(q)
        };
        debug_assert_eq!(
            &w * &w,
            QExt::from_rational(q, jacobi.omega(n + 1)),
            "entry is the square root of the Jacobi weight"
        );
        up[n + 1][n] = w.clone();
        down[n][n + 1] = w;
    }
    (
        FockOperator {
            kind: OperatorKind::Creation,
            q,
            entries: up,
        },
        FockOperator {
            kind: OperatorKind::Annihilation,
            q,
            entries: down,
        },
        FockOperator {
            kind: OperatorKind::Preservation,
            q,
            entries: preserve,
        },
    )
}

/// Exact check that B⁺ + B⁻ + B⁰ reproduces the radial action matrix of
/// T′(𝔭) entry by entry (both sides truncate identically at e_N).
pub fn quantum_decomposition_check(q: u64, n_max: usize) -> bool {
    let (up, down, preserve) = build_operators(q, n_max);
    let radial = radial_action_matrix(q, n_max);
    for (i, row) in radial.iter().enumerate() {
        for (j, expected) in row.iter().enumerate() {
            let sum = &(up.entry(i, j) + down.entry(i, j)) + preserve.entry(i, j);
            if sum != *expected {
                return false;
            }
        }
    }
    true
}

/// m-th vacuum moment ⟨e₀, (T′)ᵐ e₀⟩ as an exact weighted Dyck-path sum:
/// dynamic programming over path level, an up-step into level l carrying
/// weight ω_l and down-steps weight 1. Odd m vanish (the walk is bipartite).
pub fn moment_path_sum(q: u64, m: usize) -> Rational {
    let jacobi = JacobiCoefficients::new(q);
    let levels = m / 2 + 1;
    let mut cur = vec![rat_int(0); levels + 1];
    cur[0] = rat_int(1);
    for _ in 0..m {
        let mut next = vec![rat_int(0); levels + 1];
        for l in 0..=levels {
            if cur[l].numer() == &num_bigint::BigInt::from(0) {
                continue;
            }
            if l < levels {
                let w = &cur[l] * jacobi.omega(l + 1);
                next[l + 1] += w;
            }
            if l >= 1 {
                next[l - 1] += &cur[l];
            }
        }
        cur = next;
    }
    cur[0].clone()
}

/// Same moment by floating-point powers of the truncated Jacobi matrix.
/// Requires n_max > m/2 so no mass reaches the truncation boundary.
pub fn moment_matrix_power(q: u64, m: usize, n_max: usize) -> Result<f64> {
    if 2 * n_max <= m {
        return Err(Error::Truncation(format!(
            "truncation {n_max} cannot hold paths of length {m}; need n_max > m/2"
        )));
    }
    let jacobi = JacobiCoefficients::new(q);
    let dim = n_max + 1;
    let off: Vec<f64> = (1..dim).map(|n| jacobi.omega_f64(n).sqrt()).collect();
    let mut v = vec![0.0f64; dim];
    v[0] = 1.0;
    for _ in 0..m {
        let mut w = vec![0.0f64; dim];
        for i in 0..dim {
            if i >= 1 {
                w[i] += off[i - 1] * v[i - 1];
            }
            if i + 1 < dim {
                w[i] += off[i] * v[i + 1];
            }
        }
        v = w;
    }
    Ok(v[0])
}
