//! Target invariant measures on `[0,1)` and the distances used to quantify
//! weak convergence of orbit measures.

use std::sync::Arc;

use num_rational::BigRational;

use crate::cutstack::IntervalQ;
use crate::util::ratio_to_f64;

/// A probability measure on `[0,1)` that experiments compare orbit measures
/// against.
#[derive(Clone)]
pub enum MeasureTarget {
    /// Lebesgue measure on `[0,1)`.
    Lebesgue,
    /// Normalised Lebesgue measure on a subinterval.
    ComponentLebesgue(IntervalQ),
    /// Finitely many atoms `(position, mass)`; masses must sum to 1.
    Atomic(Vec<(BigRational, BigRational)>),
    /// Convex combination of targets; weights must sum to 1.
    Mixture(Vec<(f64, MeasureTarget)>),
    /// Arbitrary CDF evaluator `F(x) = μ([0,x])`, continuous targets only.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for MeasureTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureTarget::Lebesgue => write!(f, "Lebesgue"),
            MeasureTarget::ComponentLebesgue(iv) => {
                write!(f, "ComponentLebesgue[{:?}]", iv)
            }
            MeasureTarget::Atomic(atoms) => write!(f, "Atomic({} atoms)", atoms.len()),
            MeasureTarget::Mixture(parts) => write!(f, "Mixture({} parts)", parts.len()),
            MeasureTarget::Custom(_) => write!(f, "Custom(cdf)"),
        }
    }
}

impl MeasureTarget {
    /// `μ([0,x])`, right-continuous, with `cdf(x ≥ 1) = 1`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            MeasureTarget::Lebesgue => x.min(1.0),
            MeasureTarget::ComponentLebesgue(iv) => {
                let l = ratio_to_f64(iv.left());
                let r = ratio_to_f64(iv.right());
                ((x - l) / (r - l)).clamp(0.0, 1.0)
            }
            MeasureTarget::Atomic(atoms) => atoms
                .iter()
                .filter(|(p, _)| ratio_to_f64(p) <= x)
                .map(|(_, m)| ratio_to_f64(m))
                .sum(),
            MeasureTarget::Mixture(parts) => {
                parts.iter().map(|(w, t)| w * t.cdf(x)).sum()
            }
            MeasureTarget::Custom(f) => f(x).clamp(0.0, 1.0),
        }
    }

    /// Left limit `μ([0,x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            MeasureTarget::Atomic(atoms) => atoms
                .iter()
                .filter(|(p, _)| ratio_to_f64(p) < x)
                .map(|(_, m)| ratio_to_f64(m))
                .sum(),
            MeasureTarget::Mixture(parts) => {
                parts.iter().map(|(w, t)| w * t.cdf_left(x)).sum()
            }
            _ => self.cdf(x),
        }
    }

    /// `μ([l, r))` with exact rational endpoints (used by the ε-q-good test).
    pub fn mass(&self, l: &BigRational, r: &BigRational) -> f64 {
        match self {
            MeasureTarget::Atomic(atoms) => atoms
                .iter()
                .filter(|(p, _)| p >= l && p < r)
                .map(|(_, m)| ratio_to_f64(m))
                .sum(),
            MeasureTarget::Mixture(parts) => {
                parts.iter().map(|(w, t)| w * t.mass(l, r)).sum()
            }
            _ => self.cdf_left(ratio_to_f64(r)) - self.cdf_left(ratio_to_f64(l)),
        }
    }

    /// Positions where the CDF kinks or jumps; Kolmogorov suprema are
    /// evaluated here in addition to the empirical atoms.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            MeasureTarget::Lebesgue => vec![0.0, 1.0],
            MeasureTarget::ComponentLebesgue(iv) => {
                vec![ratio_to_f64(iv.left()), ratio_to_f64(iv.right())]
            }
            MeasureTarget::Atomic(atoms) => atoms.iter().map(|(p, _)| ratio_to_f64(p)).collect(),
            MeasureTarget::Mixture(parts) => {
                let mut pts: Vec<f64> = parts.iter().flat_map(|(_, t)| t.breakpoints()).collect();
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            }
            MeasureTarget::Custom(_) => (0..=64).map(|k| k as f64 / 64.0).collect(),
        }
    }
}

/// Kolmogorov distance between an atomic empirical measure (sorted positions
/// with masses) and a target: `sup_x |F_m(x) − F_t(x)|` evaluated at the atom
/// positions and the target breakpoints, from both sides.
pub fn kolmogorov(atoms: &[(f64, f64)], target: &MeasureTarget) -> f64 {
    debug_assert!(atoms.windows(2).all(|w| w[0].0 <= w[1].0));
    let mut sup = 0.0f64;
    // Empirical CDF immediately before and at each atom.
    let mut acc = 0.0;
    for &(x, m) in atoms {
        sup = sup.max((acc - target.cdf_left(x)).abs());
        acc += m;
        sup = sup.max((acc - target.cdf(x)).abs());
    }
    // Target breakpoints against the empirical CDF.
    for bp in target.breakpoints() {
        let emp = atoms.iter().take_while(|(x, _)| *x <= bp).map(|(_, m)| m).sum::<f64>();
        let emp_left = atoms.iter().take_while(|(x, _)| *x < bp).map(|(_, m)| m).sum::<f64>();
        sup = sup.max((emp - target.cdf(bp)).abs());
        sup = sup.max((emp_left - target.cdf_left(bp)).abs());
    }
    sup
}

/// Wasserstein-1 distance `∫ |F_m − F_t| dx` on `[0,1]`, by trapezoid rule on
/// a grid refined with all breakpoints. Secondary metric.
pub fn wasserstein1(atoms: &[(f64, f64)], target: &MeasureTarget) -> f64 {
    let mut xs: Vec<f64> = (0..=2048).map(|k| k as f64 / 2048.0).collect();
    xs.extend(atoms.iter().map(|(x, _)| *x));
    xs.extend(target.breakpoints());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let emp = |x: f64| atoms.iter().take_while(|(p, _)| *p <= x).map(|(_, m)| m).sum::<f64>();
    let mut acc = 0.0;
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        acc += (emp(mid) - target.cdf(mid)).abs() * (w[1] - w[0]);
    }
    acc
}
