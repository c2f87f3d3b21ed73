//! Weyl quantisation on `H_N`: translation operators, `Op_N[a]`, traces,
//! expectation values, the Egorov defect, and the ergodicity variance.
//!
//! The lattice action of the translation `T_N(n)` is
//!
//! `(T_N(n) Ψ)(Q) = e_N(−n1 n2 / 2) · e_N(n1 Q) · Ψ(Q − n2)`,
//!
//! derived from the displacement-operator factorisation; the half-integer
//! central phase is carried exactly. A Fourier mode `m` of an observable
//! quantises through the pairing `m ↦ T_N(−m2, m1)`. This pairing is the
//! unique choice under which all four oracle identities hold at once —
//! the composition law, unitarity, Hermiticity for real symbols, and the
//! multiplication-operator reduction for q-only symbols — and under which
//! conjugation by the shear quantisation `diag(e_N(−Q²))` reproduces the
//! exact Fourier pullback of `skew`. The tests below freeze all of it.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;

use crate::cutstack::ClassicalMap;
use crate::dense::CMat;
use crate::discretize::{delta_n, DeltaReport};
use crate::error::{Error, Result};
use crate::hilbert::{inner_product, phase_e_n, PhaseRational, StateVector};
use crate::qmap::{dense_matrix, EigenPair, UnitaryMap};
use crate::skew::{pullback_f1, FourierObservable};
use crate::util::fmt_f64;
use num_bigint::BigInt;
use num_rational::BigRational;

const TAU: f64 = std::f64::consts::TAU;

/// Index pair of a lattice translation `T_N(n) = T(n1/N, n2/N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslationIndex {
    pub n1: i64,
    pub n2: i64,
}

impl TranslationIndex {
    pub fn new(n1: i64, n2: i64) -> Self {
        TranslationIndex { n1, n2 }
    }
}

fn check_range(n1: i64, n2: i64, n: usize) -> Result<()> {
    let lim = n as i64;
    if n1.abs() >= lim || n2.abs() >= lim {
        Err(Error::SupportExceedsN(n1.abs().max(n2.abs()), n))
    } else {
        Ok(())
    }
}

/// Apply `T_N(n)` to a state.
pub fn apply_translation(n: TranslationIndex, psi: &StateVector) -> Result<StateVector> {
    let dim = psi.dim();
    check_range(n.n1, n.n2, dim)?;
    let central = phase_e_n(&PhaseRational::new(-(n.n1 as i128) * n.n2 as i128, 2), dim);
    let amps = (0..dim as i64)
        .map(|q| {
            let angle = TAU * ((n.n1 as i128 * q as i128).rem_euclid(dim as i128) as f64)
                / dim as f64;
            central * Complex64::from_polar(1.0, angle) * psi.amp(q - n.n2)
        })
        .collect();
    Ok(StateVector::new(amps))
}

/// The translation index a Fourier mode quantises through.
fn mode_translation(m: (i64, i64)) -> TranslationIndex {
    TranslationIndex::new(-m.1, m.0)
}

/// `Op_N[a] ψ = Σ_n â_n T_N(·) ψ`. For q-only symbols this is exactly
/// multiplication by `a(Q/N)` and is evaluated as such.
pub fn apply_op(a: &FourierObservable, psi: &StateVector) -> Result<StateVector> {
    let n = psi.dim();
    if a.support_radius() >= n as i64 {
        return Err(Error::SupportExceedsN(a.support_radius(), n));
    }
    if a.is_q_only() {
        let amps = (0..n)
            .map(|q| {
                let val = a.eval(q as f64 / n as f64, 0.0);
                val * psi.amps()[q]
            })
            .collect();
        return Ok(StateVector::new(amps));
    }
    let mut out = StateVector::zeros(n);
    for (&m, &c) in a.coeffs() {
        let t = apply_translation(mode_translation(m), psi)?;
        for (o, v) in out.amps_mut().iter_mut().zip(t.amps()) {
            *o += c * v;
        }
    }
    Ok(out)
}

/// Dense matrix of `Op_N[a]` (oracle paths).
pub fn op_dense(a: &FourierObservable, n: usize) -> Result<CMat> {
    if a.support_radius() >= n as i64 {
        return Err(Error::SupportExceedsN(a.support_radius(), n));
    }
    let mut m = CMat::zeros(n);
    for (&mode, &c) in a.coeffs() {
        let t = mode_translation(mode);
        let central = phase_e_n(&PhaseRational::new(-(t.n1 as i128) * t.n2 as i128, 2), n);
        for q in 0..n as i64 {
            let col = (q - t.n2).rem_euclid(n as i64) as usize;
            let angle =
                TAU * ((t.n1 as i128 * q as i128).rem_euclid(n as i128) as f64) / n as f64;
            m.add_to(q as usize, col, c * central * Complex64::from_polar(1.0, angle));
        }
    }
    Ok(m)
}

/// `(1/N) Tr Op_N[a]`. Within the aliasing-free range `|n_i| < N` every
/// translation except `n = 0` is traceless, so this equals `â_0` exactly.
pub fn op_trace(a: &FourierObservable, n: usize) -> Result<Complex64> {
    if a.support_radius() >= n as i64 {
        return Err(Error::SupportExceedsN(a.support_radius(), n));
    }
    Ok(a.mean())
}

/// `⟨ψ, Op_N[a] ψ⟩`.
pub fn expectation(a: &FourierObservable, psi: &StateVector) -> Result<Complex64> {
    inner_product(psi, &apply_op(a, psi)?)
}

/// Expectation of a q-only symbol in an orbit eigenfunction: the position
/// density is exactly uniform on the orbit, so this is the orbit average
/// `(1/K) Σ_{Q∈orbit} a(Q/N)` — the `δ_orbit` integral of `a`.
pub fn expectation_orbit(a: &FourierObservable, support: &[usize], n: usize) -> Complex64 {
    debug_assert!(a.is_q_only());
    let mut acc = Complex64::new(0.0, 0.0);
    for &q in support {
        acc += a.eval(q as f64 / n as f64, 0.0);
    }
    acc / support.len() as f64
}

/// `(1/N) Σ_k |⟨ψ_k, Op_N[a] ψ_k⟩ − â_0|` over a complete eigenpair family.
pub fn qe_variance(a: &FourierObservable, pairs: &[EigenPair], n: usize) -> Result<f64> {
    if pairs.len() != n {
        return Err(Error::IncompleteBasis { got: pairs.len(), want: n });
    }
    let mean = a.mean();
    let mut acc = 0.0f64;
    if a.is_q_only() {
        // All K pairs of one orbit share the same expectation.
        let mut cache: HashMap<usize, Complex64> = HashMap::new();
        for pair in pairs {
            let e = *cache
                .entry(pair.orbit_id)
                .or_insert_with(|| expectation_orbit(a, &pair.support, n));
            acc += (e - mean).norm();
        }
    } else {
        for pair in pairs {
            let e = expectation(a, &pair.to_state_vector(n))?;
            acc += (e - mean).norm();
        }
    }
    Ok(acc / n as f64)
}

/// Streaming variant of [`qe_variance`] for q-only symbols: never builds
/// eigenvectors, only orbit averages.
pub fn qe_variance_spectrum(u: &UnitaryMap, a: &FourierObservable) -> Result<f64> {
    if !a.is_q_only() {
        return Err(Error::Config("streaming qe variance needs a q-only observable".into()));
    }
    if a.support_radius() >= u.n() as i64 {
        return Err(Error::SupportExceedsN(a.support_radius(), u.n()));
    }
    let mean = a.mean();
    let dec = crate::qmap::orbit_decompose(u.map());
    let n = u.n();
    let mut acc = 0.0f64;
    for orbit in dec.orbits() {
        let e = expectation_orbit(a, orbit, n);
        acc += orbit.len() as f64 * (e - mean).norm();
    }
    Ok(acc / n as f64)
}

/// Outcome of an Egorov defect measurement.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EgorovReport {
    /// `‖U* Op_N[a] U − Op_N[a∘F]‖` (sup over the lattice on the q-only
    /// path, spectral norm on the dense path).
    pub defect: f64,
    /// The accompanying `δ_N(ε)` measurement.
    pub delta: DeltaReport,
    /// Whether the multiplication-operator fast path was taken.
    pub q_only_path: bool,
}

/// Measure `‖U* Op_N[a] U − Op_N[a∘F]‖` against a classical evaluator.
///
/// q-only path: the conjugation is exactly multiplication by `a∘f_N`, so the
/// norm is `sup_Q |a(f_N(Q/N)) − a(f(Q/N))|` over points where `f` is
/// defined. General path: dense matrices up to `oracle_limit`, with `a∘F`
/// realised as the exact shear pullback followed by substituting `f` into
/// the q-dependence on the lattice; requires `f` total.
pub fn egorov_defect(
    a: &FourierObservable,
    f: &dyn ClassicalMap,
    u: &UnitaryMap,
    epsilon: f64,
    fs_image: &[BigRational],
    oracle_limit: usize,
) -> Result<EgorovReport> {
    let n = u.n();
    let delta = delta_n(f, u.map(), epsilon, fs_image);
    if a.is_q_only() {
        let mut sup = 0.0f64;
        for q in 0..n {
            let x = BigRational::new(BigInt::from(q), BigInt::from(n));
            if let Some(y) = f.eval_f64(&x) {
                let got = a.eval(u.fhat(q) as f64 / n as f64, 0.0);
                let want = a.eval(y, 0.0);
                sup = sup.max((got - want).norm());
            }
        }
        return Ok(EgorovReport { defect: sup, delta, q_only_path: true });
    }
    if n > oracle_limit {
        return Err(Error::OracleLimit { n, limit: oracle_limit });
    }
    // Dense path. B = Op[pullback(a) with f substituted into the q-phase].
    let b = pullback_f1(a);
    let mut bm = CMat::zeros(n);
    for (&(m1, m2), &c) in b.coeffs() {
        let central = phase_e_n(&PhaseRational::new((m1 as i128) * m2 as i128, 2), n);
        for q in 0..n as i64 {
            let x = BigRational::new(BigInt::from(q), BigInt::from(n));
            let y = f.eval_f64(&x).ok_or_else(|| {
                Error::Config("dense Egorov path needs a totally defined classical map".into())
            })?;
            let col = (q - m1).rem_euclid(n as i64) as usize;
            let qphase = Complex64::from_polar(1.0, -TAU * m2 as f64 * y);
            bm.add_to(q as usize, col, c * central * qphase);
        }
    }
    let ud = dense_matrix(u, oracle_limit)?;
    let am = op_dense(a, n)?;
    let defect = ud.adjoint().mul(&am).mul(&ud).sub(&bm).spectral_norm();
    Ok(EgorovReport { defect, delta, q_only_path: false })
}

/// Matrix-element export: `orbit_id,k,theta,re_expect,im_expect` per
/// eigenpair, for a q-only observable.
pub fn write_matrix_elements_csv<W: Write>(
    u: &UnitaryMap,
    a: &FourierObservable,
    w: &mut W,
    header: Option<&str>,
) -> Result<()> {
    if !a.is_q_only() {
        return Err(Error::Config("matrix-element export needs a q-only observable".into()));
    }
    if let Some(h) = header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "orbit_id,k,theta,re_expect,im_expect")?;
    let mut rows = Vec::new();
    crate::qmap::for_each_eigenpair(u, |pair| {
        let e = expectation_orbit(a, &pair.support, u.n());
        rows.push(format!(
            "{},{},{},{},{}",
            pair.orbit_id,
            pair.k,
            fmt_f64(pair.theta.to_f64()),
            fmt_f64(e.re),
            fmt_f64(e.im)
        ));
    });
    for row in rows {
        writeln!(w, "{row}")?;
    }
    Ok(())
}
