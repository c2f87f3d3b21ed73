//! The quantum state space `H_N`.
//!
//! States are `N` complex amplitudes `Ψ(Q)` indexed by `Q ∈ Z_N`, with the
//! `1/N`-weighted inner product. Phases are carried as exact rationals until
//! the final exponentiation so that phase sums over orbits of length up to
//! `N` accumulate no rounding error.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::util::ratio_to_f64;

const TAU: f64 = std::f64::consts::TAU;

/// An exact rational phase `x`, to be read through `e_N(x) = exp(2πi x / N)`.
///
/// Adding any integer multiple of `N` to `x` leaves `e_N(x)` unchanged, so
/// values are compared and evaluated after reduction mod `N`. Denominators
/// stay tiny in practice (they divide `2K` for an orbit of length `K`), and
/// intermediate numerators are reduced eagerly, so `i128` arithmetic never
/// comes close to overflow for any lattice size this crate targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseRational {
    num: i128,
    den: i128, // > 0, gcd(num, den) = 1
}

impl PhaseRational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "phase denominator must be nonzero");
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        PhaseRational { num, den }
    }

    pub fn from_int(n: i128) -> Self {
        PhaseRational { num: n, den: 1 }
    }

    pub fn zero() -> Self {
        PhaseRational { num: 0, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn add(&self, other: &PhaseRational) -> PhaseRational {
        PhaseRational::new(self.num * other.den + other.num * self.den, self.den * other.den)
    }

    pub fn sub(&self, other: &PhaseRational) -> PhaseRational {
        PhaseRational::new(self.num * other.den - other.num * self.den, self.den * other.den)
    }

    pub fn mul_int(&self, k: i128) -> PhaseRational {
        PhaseRational::new(self.num * k, self.den)
    }

    /// Canonical representative in `[0, m)` of the value mod `m`.
    pub fn reduce_mod(&self, m: i128) -> PhaseRational {
        debug_assert!(m > 0);
        let md = m * self.den;
        let r = self.num.rem_euclid(md);
        PhaseRational::new(r, self.den)
    }

    /// Equality of the induced phases `e_N(·)` at dimension `n`.
    pub fn eq_mod(&self, other: &PhaseRational, n: i128) -> bool {
        self.sub(other).reduce_mod(n) == PhaseRational::zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// `e_N(x) = exp(2πi x / N)`, with `x` reduced mod `N` before any float
/// conversion so the argument to `exp` stays in `[0, 2π)`.
pub fn phase_e_n(x: &PhaseRational, n: usize) -> Complex64 {
    let r = x.reduce_mod(n as i128);
    let angle = TAU * (r.num as f64) / (r.den as f64 * n as f64);
    Complex64::from_polar(1.0, angle)
}

/// An element of `H_N`: amplitudes `Ψ(0), …, Ψ(N−1)`, periodic in `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        assert!(!amps.is_empty(), "H_N needs N >= 1");
        StateVector { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        StateVector { amps: vec![Complex64::new(0.0, 0.0); dim] }
    }

    /// `√N · δ_{Q0}`, the normalised point mass.
    pub fn delta(dim: usize, q0: usize) -> Self {
        let mut v = StateVector::zeros(dim);
        v.amps[q0 % dim] = Complex64::new((dim as f64).sqrt(), 0.0);
        v
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        StateVector { amps: vec![value; dim] }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Amplitude at `Q`, with index arithmetic mod `N`.
    pub fn amp(&self, q: i64) -> Complex64 {
        let n = self.amps.len() as i64;
        self.amps[q.rem_euclid(n) as usize]
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        inner_product(self, self).expect("same dim").re.max(0.0).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> StateVector {
        StateVector { amps: self.amps.iter().map(|a| a * c).collect() }
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(StateVector {
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect(),
        })
    }
}

/// `⟨ψ, φ⟩ = (1/N) Σ_Q conj(Ψ(Q)) Φ(Q)`, summed in index order.
pub fn inner_product(psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch(psi.dim(), phi.dim()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in psi.amps.iter().zip(&phi.amps) {
        acc += a.conj() * b;
    }
    Ok(acc / psi.dim() as f64)
}

/// Lattice Gaussian centred at `s`:
/// `Ψ_s(Q) = Σ_{|m| ≤ m_max} √N · exp(−(Q/N − s − m)² N)`.
///
/// The width is `O(1/√N)`, so the periodisation tail beyond `m_max = 3` is
/// far below 1e-12 for every `N ≥ 2`. Amplitudes are real and positive.
pub fn gaussian_state(s: &BigRational, n: usize, m_max: i64) -> StateVector {
    assert!(n >= 1 && m_max >= 1);
    let s = ratio_to_f64(s);
    let sqrt_n = (n as f64).sqrt();
    let amps = (0..n)
        .map(|q| {
            let x = q as f64 / n as f64;
            let mut sum = 0.0;
            for m in -m_max..=m_max {
                let d = x - s - m as f64;
                sum += (-d * d * n as f64).exp();
            }
            Complex64::new(sqrt_n * sum, 0.0)
        })
        .collect();
    StateVector::new(amps)
}
