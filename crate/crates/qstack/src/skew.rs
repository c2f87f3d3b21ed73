//! The skew product `F(p,q) = (p + 2q, f(q))` on the torus and the Fourier
//! side of the observable algebra.
//!
//! Observables are finitely supported Fourier sums
//! `a(z) = Σ_n â_n e(−ω(z,n))` with `z = (q,p)`, `ω(z,n) = q n2 − p n1` and
//! `e(x) = exp(2πi x)`; the basis function of mode `n` is therefore
//! `E_n(q,p) = e(n1 p − n2 q)`. A mode with `n1 = 0` depends on `q` alone.
//! Conjugating by the shear `F^{(1)}(p,q) = (p+2q, q)` sends `E_n` to
//! `E_{(n1, n2−2n1)}` — an exact coefficient remap, pinned here by a grid
//! sampling test and frozen.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cutstack::{ClassicalMap, IntervalQ};
use crate::error::{Error, Result};
use crate::util::{frac_mod_1, ratio_to_f64};

const TAU: f64 = std::f64::consts::TAU;

/// A point `z = (q, p)` on the torus, both coordinates reduced into `[0,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    pub p: BigRational,
    pub q: BigRational,
}

impl TorusPoint {
    pub fn new(p: BigRational, q: BigRational) -> Self {
        TorusPoint { p: frac_mod_1(&p), q: frac_mod_1(&q) }
    }
}

/// A trigonometric polynomial on the torus held by its Fourier coefficients.
#[derive(Clone, Debug, Default)]
pub struct FourierObservable {
    coeffs: BTreeMap<(i64, i64), Complex64>,
}

impl FourierObservable {
    pub fn new() -> Self {
        FourierObservable { coeffs: BTreeMap::new() }
    }

    pub fn constant(c: f64) -> Self {
        let mut a = FourierObservable::new();
        a.set((0, 0), Complex64::new(c, 0.0));
        a
    }

    /// `a(q) = cos(2π k q)`, a real q-only observable.
    pub fn cos_q(k: i64) -> Self {
        let mut a = FourierObservable::new();
        a.set((0, k), Complex64::new(0.5, 0.0));
        a.set((0, -k), Complex64::new(0.5, 0.0));
        a
    }

    /// `a(q) = sin(2π k q)`.
    pub fn sin_q(k: i64) -> Self {
        let mut a = FourierObservable::new();
        a.set((0, k), Complex64::new(0.0, 0.5));
        a.set((0, -k), Complex64::new(0.0, -0.5));
        a
    }

    pub fn set(&mut self, n: (i64, i64), c: Complex64) {
        if c.norm() == 0.0 {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, c);
        }
    }

    pub fn coeff(&self, n: (i64, i64)) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(i64, i64), &Complex64)> {
        self.coeffs.iter()
    }

    pub fn mode_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest `max(|n1|, |n2|)` over the support.
    pub fn support_radius(&self) -> i64 {
        self.coeffs.keys().map(|(a, b)| a.abs().max(b.abs())).max().unwrap_or(0)
    }

    /// The mean `∫ a dz`.
    pub fn mean(&self) -> Complex64 {
        self.coeff((0, 0))
    }

    pub fn is_q_only(&self) -> bool {
        self.coeffs.keys().all(|(n1, _)| *n1 == 0)
    }

    /// Whether `â_{−n} = conj(â_n)` holds for all modes (within `tol`).
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(&(n1, n2), &c)| {
            (self.coeff((-n1, -n2)) - c.conj()).norm() <= tol
        })
    }

    /// Pointwise evaluation (reference path; hot paths use `values_on_lattice`).
    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(n1, n2), &c) in &self.coeffs {
            let angle = TAU * (n1 as f64 * p - n2 as f64 * q);
            acc += c * Complex64::from_polar(1.0, angle);
        }
        acc
    }

    /// Real part of a q-only observable at position `q`.
    pub fn eval_q(&self, q: f64) -> f64 {
        debug_assert!(self.is_q_only());
        self.eval(q, 0.0).re
    }

    /// `a(Q/N)` for all lattice points, q-only observables.
    pub fn values_on_lattice(&self, n: usize) -> Vec<f64> {
        (0..n).map(|q| self.eval_q(q as f64 / n as f64)).collect()
    }

    /// Max of `|a′(q)|` over a fine grid; the Lipschitz budget used in
    /// defect reports.
    pub fn lipschitz_q(&self) -> f64 {
        let grid = 4096.max(16 * self.support_radius() as usize);
        (0..grid)
            .map(|j| {
                let q = j as f64 / grid as f64;
                let mut d = Complex64::new(0.0, 0.0);
                for (&(_, n2), &c) in &self.coeffs {
                    let angle = -TAU * n2 as f64 * q;
                    d += c * Complex64::new(0.0, -TAU * n2 as f64) * Complex64::from_polar(1.0, angle);
                }
                d.norm()
            })
            .fold(0.0, f64::max)
    }
}

/* JSON wire form: {"n1,n2": [re, im], ...} *********************************/

impl Serialize for FourierObservable {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, [f64; 2]> = self
            .coeffs
            .iter()
            .map(|(&(n1, n2), c)| (format!("{n1},{n2}"), [c.re, c.im]))
            .collect();
        map.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FourierObservable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let map: BTreeMap<String, [f64; 2]> = BTreeMap::deserialize(de)?;
        let mut out = FourierObservable::new();
        for (k, [re, im]) in map {
            let (n1, n2) = k
                .split_once(',')
                .ok_or_else(|| D::Error::custom(format!("bad mode key {k:?}")))?;
            let n1: i64 = n1.trim().parse().map_err(D::Error::custom)?;
            let n2: i64 = n2.trim().parse().map_err(D::Error::custom)?;
            out.set((n1, n2), Complex64::new(re, im));
        }
        Ok(out)
    }
}

/// Apply the skew product at a point: `F(p,q) = (p + 2q mod 1, f(q))`.
pub fn eval_f(f: &dyn ClassicalMap, z: &TorusPoint) -> Result<TorusPoint> {
    let fq = f.eval(&z.q).ok_or_else(|| Error::singular(&z.q))?;
    let two = BigRational::from_integer(2.into());
    Ok(TorusPoint::new(&z.p + two * &z.q, fq))
}

/// Exact pullback under the shear `F^{(1)}(p,q) = (p+2q, q)`:
/// output coefficient at `m` is the input coefficient at `(m1, m2 + 2 m1)`.
pub fn pullback_f1(a: &FourierObservable) -> FourierObservable {
    let mut out = FourierObservable::new();
    for (&(n1, n2), &c) in a.coeffs() {
        out.set((n1, n2 - 2 * n1), c);
    }
    out
}

/// Inverse of [`pullback_f1`]; the remap is a bijection of `Z²`.
pub fn pullback_f1_inv(a: &FourierObservable) -> FourierObservable {
    let mut out = FourierObservable::new();
    for (&(n1, n2), &c) in a.coeffs() {
        out.set((n1, n2 + 2 * n1), c);
    }
    out
}

/// Deviation report accompanying every constructed bump.
#[derive(Clone, Debug, Serialize)]
pub struct BumpReport {
    /// sup |a − 1| on the requested support.
    pub dev_on_support: f64,
    /// sup |a| outside the margin collar.
    pub dev_off_collar: f64,
    /// Max |a′| on a fine grid.
    pub lipschitz: f64,
    /// Set when the degree could not resolve the margin (deviation > 0.5).
    pub degree_too_small: bool,
}

// C^infty step: 0 for t <= 0, 1 for t >= 1.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let phi = (-1.0 / t).exp();
        let psi = (-1.0 / (1.0 - t)).exp();
        phi / (phi + psi)
    }
}

/// A real q-only trigonometric polynomial of degree `n_max` that is close to
/// 1 on `support` and close to 0 outside the `margin` collar.
///
/// The target is a smooth plateau (C^infty step on each side) sampled on a
/// fine grid and projected onto modes `|n2| <= n_max`; the realness symmetry
/// `â_{−n} = conj(â_n)` is enforced exactly. The achieved deviations are
/// returned alongside and feed the Egorov defect budget.
pub fn bump_observable(
    support: &IntervalQ,
    margin: &BigRational,
    n_max: i64,
) -> Result<(FourierObservable, BumpReport)> {
    if !margin.is_positive() {
        return Err(Error::Config("bump margin must be positive".into()));
    }
    let l = ratio_to_f64(support.left());
    let r = ratio_to_f64(support.right());
    let m = ratio_to_f64(margin);
    if r - l >= 1.0 {
        // Full circle: the constant observable.
        let report = BumpReport {
            dev_on_support: 0.0,
            dev_off_collar: 0.0,
            lipschitz: 0.0,
            degree_too_small: false,
        };
        return Ok((FourierObservable::constant(1.0), report));
    }
    if support.left() < margin || support.right() + margin > BigRational::one() {
        return Err(Error::Config("support with margin collar must fit inside [0,1)".into()));
    }

    let plateau = |q: f64| smooth_step((q - (l - m)) / m) * smooth_step(((r + m) - q) / m);

    let grid = (16 * n_max.max(64) as usize).next_power_of_two();
    let samples: Vec<f64> = (0..grid).map(|j| plateau(j as f64 / grid as f64)).collect();

    let mut a = FourierObservable::new();
    for k in 0..=n_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &g) in samples.iter().enumerate() {
            let angle = TAU * k as f64 * j as f64 / grid as f64;
            acc += g * Complex64::from_polar(1.0, angle);
        }
        acc /= grid as f64;
        if k == 0 {
            a.set((0, 0), Complex64::new(acc.re, 0.0));
        } else {
            a.set((0, k), acc);
            a.set((0, -k), acc.conj());
        }
    }

    let fine = 4 * grid;
    let mut dev_on = 0.0f64;
    let mut dev_off = 0.0f64;
    for j in 0..fine {
        let q = j as f64 / fine as f64;
        let v = a.eval_q(q);
        if q >= l && q <= r {
            dev_on = dev_on.max((v - 1.0).abs());
        }
        if q < l - m || q > r + m {
            dev_off = dev_off.max(v.abs());
        }
    }
    let report = BumpReport {
        dev_on_support: dev_on,
        dev_off_collar: dev_off,
        lipschitz: a.lipschitz_q(),
        degree_too_small: dev_on.max(dev_off) > 0.5,
    };
    Ok((a, report))
}
