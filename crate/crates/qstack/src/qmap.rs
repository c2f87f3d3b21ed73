//! The quantised unitary `U_N` and its spectrum in closed form.
//!
//! `U_N Ψ(Q) = e_N(−(f̂⁻¹Q)²) Ψ(f̂⁻¹Q)` is a phase permutation, so its
//! spectrum decomposes over the cycles of `f̂`. A cycle of length `K`
//! carries `K` orthonormal eigenfunctions supported on it, with exact
//! rational eigenphases
//!
//! `θ_k = −S + (N/K)·k`,   `S = (Σ_{Q∈orbit} Q²)/K`,
//!
//! and amplitudes built from the recursion `Ψ(f̂Q) = e_N(−θ − Q²) Ψ(Q)`.
//! The sign conventions follow directly from the `U_N` formula above; they
//! are pinned against the dense diagonalisation oracle in the tests and
//! frozen (a fixed point `Q0` has eigenphase `−Q0² mod N`).

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dense::CMat;
use crate::discretize::DiscreteMap;
use crate::error::{Error, Result};
use crate::hilbert::{phase_e_n, PhaseRational, StateVector};
use crate::util::fmt_f64;

/// `f̂_N` with its precomputed inverse and the phase table `e_N(−Q²)`.
#[derive(Clone, Debug)]
pub struct UnitaryMap {
    map: DiscreteMap,
    inv: Vec<usize>,
    /// `phases[Q] = e_N(−Q²)`.
    phases: Vec<Complex64>,
}

impl UnitaryMap {
    pub fn new(map: DiscreteMap) -> Self {
        let n = map.n();
        let inv = map.inverse_perm();
        let phases = (0..n)
            .map(|q| {
                let q2 = (q as i128) * (q as i128);
                phase_e_n(&PhaseRational::from_int(-q2), n)
            })
            .collect();
        UnitaryMap { map, inv, phases }
    }

    pub fn n(&self) -> usize {
        self.map.n()
    }

    pub fn map(&self) -> &DiscreteMap {
        &self.map
    }

    pub fn fhat(&self, q: usize) -> usize {
        self.map.fhat(q)
    }

    pub fn fhat_inv(&self, q: usize) -> usize {
        self.inv[q]
    }
}

/// `U_N ψ`: `out(Q) = e_N(−(f̂⁻¹Q)²) ψ(f̂⁻¹Q)`.
pub fn apply_u(u: &UnitaryMap, psi: &StateVector) -> Result<StateVector> {
    if psi.dim() != u.n() {
        return Err(Error::DimensionMismatch(psi.dim(), u.n()));
    }
    let amps = (0..u.n())
        .map(|q| {
            let qp = u.inv[q];
            u.phases[qp] * psi.amps()[qp]
        })
        .collect();
    Ok(StateVector::new(amps))
}

/// `U_N* ψ`: `out(Q) = e_N(Q²) ψ(f̂Q)`.
pub fn apply_u_adjoint(u: &UnitaryMap, psi: &StateVector) -> Result<StateVector> {
    if psi.dim() != u.n() {
        return Err(Error::DimensionMismatch(psi.dim(), u.n()));
    }
    let amps = (0..u.n())
        .map(|q| u.phases[q].conj() * psi.amps()[u.map.fhat(q)])
        .collect();
    Ok(StateVector::new(amps))
}

/// Cycles of a bijection of `Z_N`, each starting at its minimal element,
/// sorted by that element.
#[derive(Clone, Debug)]
pub struct OrbitDecomposition {
    orbits: Vec<Vec<usize>>,
}

impl OrbitDecomposition {
    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

pub fn orbit_decompose(map: &DiscreteMap) -> OrbitDecomposition {
    let n = map.n();
    let mut visited = vec![false; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut q = start;
        loop {
            visited[q] = true;
            cycle.push(q);
            q = map.fhat(q);
            if q == start {
                break;
            }
        }
        orbits.push(cycle);
    }
    OrbitDecomposition { orbits }
}

/// The exact orbit action `S = (Σ_{Q∈orbit} Q²) / K`.
pub fn orbit_action(orbit: &[usize]) -> PhaseRational {
    assert!(!orbit.is_empty());
    let sum: i128 = orbit.iter().map(|&q| (q as i128) * (q as i128)).sum();
    PhaseRational::new(sum, orbit.len() as i128)
}

/// One eigenpair of `U_N`: an exact rational eigenphase and a normalised
/// eigenvector supported on its orbit.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub theta: PhaseRational,
    pub orbit_id: usize,
    pub k: usize,
    /// Orbit points in cycle order (`Q0, f̂Q0, …`), shared between the `K`
    /// pairs of one orbit.
    pub support: Arc<Vec<usize>>,
    /// Amplitudes on the support, in the same order.
    pub amps: Vec<Complex64>,
}

impl EigenPair {
    pub fn orbit_len(&self) -> usize {
        self.support.len()
    }

    pub fn to_state_vector(&self, n: usize) -> StateVector {
        let mut v = StateVector::zeros(n);
        for (&q, &a) in self.support.iter().zip(&self.amps) {
            v.amps_mut()[q] = a;
        }
        v
    }

    /// `‖U ψ − e_N(θ) ψ‖`, evaluated on the orbit support only (the
    /// complement is exactly zero).
    pub fn residual(&self, u: &UnitaryMap) -> f64 {
        let n = u.n();
        let lambda = phase_e_n(&self.theta, n);
        let k = self.support.len();
        // amp at position index: support[i] has amplitude amps[i]; the
        // predecessor of support[i] in the cycle is support[(i+k-1)%k].
        let mut acc = 0.0f64;
        for i in 0..k {
            let q = self.support[i];
            let prev = self.support[(i + k - 1) % k];
            debug_assert_eq!(u.fhat(prev), q);
            let u_psi = u.phases[prev] * self.amps[(i + k - 1) % k];
            acc += (u_psi - lambda * self.amps[i]).norm_sqr();
        }
        (acc / n as f64).sqrt()
    }

    /// `(1/K) Σ_{Q∈orbit} g(Q)` — the orbit average used for q-only
    /// expectations, where `|Ψ|²` is exactly uniform on the support.
    pub fn orbit_mean<F: Fn(usize) -> f64>(&self, g: F) -> f64 {
        let k = self.support.len();
        self.support.iter().map(|&q| g(q)).sum::<f64>() / k as f64
    }
}

/// The `K` orthonormal eigenpairs carried by one orbit.
pub fn eigenpairs_for_orbit(orbit: &[usize], orbit_id: usize, n: usize) -> Vec<EigenPair> {
    let k_len = orbit.len();
    debug_assert!(k_len >= 1);
    let s_action = orbit_action(orbit);
    let support = Arc::new(orbit.to_vec());
    let scale = (n as f64 / k_len as f64).sqrt();
    let mut out = Vec::with_capacity(k_len);
    for k in 0..k_len {
        // θ_k = −S + (N/K)·k, exact.
        let theta = PhaseRational::new(n as i128 * k as i128, k_len as i128)
            .sub(&s_action)
            .reduce_mod(n as i128);
        let mut amps = Vec::with_capacity(k_len);
        let mut phase = PhaseRational::zero();
        amps.push(Complex64::new(scale, 0.0));
        for j in 1..k_len {
            // Ψ(f̂Q) = e_N(−θ − Q²) Ψ(Q)
            let prev_q = orbit[j - 1] as i128;
            phase = phase
                .sub(&theta)
                .sub(&PhaseRational::from_int(prev_q * prev_q))
                .reduce_mod(n as i128);
            amps.push(phase_e_n(&phase, n) * scale);
        }
        out.push(EigenPair { theta, orbit_id, k, support: support.clone(), amps });
    }
    out
}

/// All `N` eigenpairs. For large `N` prefer [`for_each_eigenpair`], which
/// never materialises more than one orbit's pairs at a time.
pub fn full_spectrum(u: &UnitaryMap) -> Vec<EigenPair> {
    let dec = orbit_decompose(u.map());
    let mut out = Vec::with_capacity(u.n());
    for (id, orbit) in dec.orbits().iter().enumerate() {
        out.extend(eigenpairs_for_orbit(orbit, id, u.n()));
    }
    out
}

/// Visit every eigenpair orbit by orbit.
pub fn for_each_eigenpair<F: FnMut(&EigenPair)>(u: &UnitaryMap, mut f: F) {
    let dec = orbit_decompose(u.map());
    for (id, orbit) in dec.orbits().iter().enumerate() {
        for pair in eigenpairs_for_orbit(orbit, id, u.n()) {
            f(&pair);
        }
    }
}

/// Dense matrix of `U_N`: `M[Q, Q'] = e_N(−Q'²)` when `f̂(Q') = Q`, else 0.
/// Oracle only; guarded by `limit`.
pub fn dense_matrix(u: &UnitaryMap, limit: usize) -> Result<CMat> {
    let n = u.n();
    if n > limit {
        return Err(Error::OracleLimit { n, limit });
    }
    let mut m = CMat::zeros(n);
    for qp in 0..n {
        m.set(u.fhat(qp), qp, u.phases[qp]);
    }
    Ok(m)
}

/// Spectrum CSV: `orbit_id,K,k,theta_num,theta_den,residual`, one row per
/// eigenpair, orbit by orbit. Returns the largest residual seen.
pub fn write_spectrum_csv<W: Write>(
    u: &UnitaryMap,
    w: &mut W,
    header: Option<&str>,
) -> Result<f64> {
    if let Some(h) = header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "orbit_id,K,k,theta_num,theta_den,residual")?;
    let mut worst = 0.0f64;
    let mut rows: Vec<String> = Vec::new();
    for_each_eigenpair(u, |pair| {
        let r = pair.residual(u);
        worst = worst.max(r);
        rows.push(format!(
            "{},{},{},{},{},{}",
            pair.orbit_id,
            pair.orbit_len(),
            pair.k,
            pair.theta.num(),
            pair.theta.den(),
            fmt_f64(r)
        ));
    });
    for row in rows {
        writeln!(w, "{row}")?;
    }
    Ok(worst)
}
