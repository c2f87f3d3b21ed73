//! From a stage family to a bijection of `Z_N`.
//!
//! The lattice points inside each stack column advance level-to-level (the
//! internal orbit segments); a gluing policy closes the columns into periodic
//! orbits; whatever remains is completed to a bijection by a greedy pass that
//! sends each point as close as possible to its classical image. Unitarity of
//! the quantisation needs `f̂_N` bijective, so the completion is not optional;
//! completion points are tagged in the provenance and excluded from `δ_N`
//! through the `ε_N` collar.

use std::collections::BTreeSet;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::cutstack::{ClassicalMap, CutStackProgram, StackFamily};
use crate::error::{Error, Result};
use crate::measure::MeasureTarget;
use crate::util::{circle_dist_f64, ratio_to_f64};

/// Where each lattice point's image came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    InternalSegment,
    Glue,
    NearestCompletion,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::InternalSegment => "internal-segment",
            Provenance::Glue => "glue",
            Provenance::NearestCompletion => "nearest-completion",
        }
    }
}

/// The discretisation `f̂_N`: a bijection of `{0,…,N−1}` with per-point
/// provenance and the stage it was built from.
#[derive(Clone, Debug)]
pub struct DiscreteMap {
    perm: Vec<usize>,
    provenance: Vec<Provenance>,
    stage: usize,
}

impl DiscreteMap {
    pub fn from_perm(perm: Vec<usize>, provenance: Vec<Provenance>, stage: usize) -> Result<Self> {
        let n = perm.len();
        assert_eq!(provenance.len(), n);
        let mut seen = vec![false; n];
        for &img in &perm {
            if img >= n || std::mem::replace(&mut seen[img], true) {
                return Err(Error::NonBijective { image: img });
            }
        }
        Ok(DiscreteMap { perm, provenance, stage })
    }

    pub fn identity(n: usize) -> Self {
        DiscreteMap {
            perm: (0..n).collect(),
            provenance: vec![Provenance::InternalSegment; n],
            stage: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// `f̂_N(q)`.
    pub fn fhat(&self, q: usize) -> usize {
        self.perm[q]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn inverse_perm(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.perm.len()];
        for (q, &img) in self.perm.iter().enumerate() {
            inv[img] = q;
        }
        inv
    }

    pub fn fraction_internal(&self) -> f64 {
        let k = self
            .provenance
            .iter()
            .filter(|p| **p == Provenance::InternalSegment)
            .count();
        k as f64 / self.n() as f64
    }

    /// CSV export: `Q,image,provenance`, ordered by `Q`.
    pub fn write_csv<W: Write>(&self, w: &mut W, header: Option<&str>) -> Result<()> {
        if let Some(h) = header {
            writeln!(w, "# {h}")?;
        }
        writeln!(w, "Q,image,provenance")?;
        for (q, (&img, prov)) in self.perm.iter().zip(&self.provenance).enumerate() {
            writeln!(w, "{q},{img},{}", prov.as_str())?;
        }
        Ok(())
    }
}

/// Lattice points of one level: the contiguous range `start..start+count`.
#[derive(Clone, Copy, Debug)]
pub struct LevelPoints {
    pub start: usize,
    pub count: usize,
}

/// Per-stack segment data: the first `k` points of every level form `k`
/// column orbits of length `h`.
#[derive(Clone, Debug)]
pub struct StackSegments {
    pub stack: usize,
    pub levels: Vec<LevelPoints>,
    pub k: usize,
}

impl StackSegments {
    pub fn height(&self) -> usize {
        self.levels.len()
    }

    /// Points of column `e`, bottom to top.
    pub fn column(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.levels.iter().map(move |l| l.start + e)
    }

    pub fn bottom_point(&self, e: usize) -> usize {
        self.levels[0].start + e
    }

    pub fn top_point(&self, e: usize) -> usize {
        self.levels[self.height() - 1].start + e
    }
}

#[derive(Clone, Debug)]
pub struct SegmentIndex {
    pub n: usize,
    pub stacks: Vec<StackSegments>,
}

impl SegmentIndex {
    /// Number of lattice points covered by column orbits.
    pub fn internal_point_count(&self) -> usize {
        self.stacks.iter().map(|s| s.k * s.height()).sum()
    }
}

/// Enumerate `G_{i,j} = D_N ∩ I_j^i` left to right, keep the first
/// `K_i = min_j |G_{i,j}|` points of every level, and map the e-th point of
/// level `j` to the e-th point of level `j+1`.
pub fn internal_segments(family: &StackFamily, n: usize) -> (Vec<Option<usize>>, SegmentIndex) {
    let mut partial = vec![None; n];
    let mut stacks = Vec::with_capacity(family.stacks().len());
    for (i, s) in family.stacks().iter().enumerate() {
        let levels: Vec<LevelPoints> = s
            .intervals()
            .iter()
            .map(|iv| {
                let (start, end) = iv.lattice_range(n);
                LevelPoints { start, count: end.saturating_sub(start) }
            })
            .collect();
        let k = levels.iter().map(|l| l.count).min().unwrap_or(0);
        let seg = StackSegments { stack: i, levels, k };
        for j in 0..seg.height().saturating_sub(1) {
            for e in 0..k {
                partial[seg.levels[j].start + e] = Some(seg.levels[j + 1].start + e);
            }
        }
        stacks.push(seg);
    }
    (partial, SegmentIndex { n, stacks })
}

/// Parameters of the cross-stack blend: chain segments from `μ1`-good and
/// `μ2`-good stacks into one periodic orbit with point counts in proportion
/// `α1 : α2`.
#[derive(Clone, Debug)]
pub struct BlendParams {
    pub mu1: MeasureTarget,
    pub mu2: MeasureTarget,
    pub alpha1: f64,
    pub alpha2: f64,
    pub q: u32,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub enum GluingPolicy {
    /// Close every column into its own cycle, top to bottom.
    PeriodicPerStack,
    /// Chain all columns into one long cycle.
    SingleOrbitConcat,
    /// Targeted blend of two measures across good stacks.
    CrossStackBlend(BlendParams),
}

/// Point-count bookkeeping emitted by the blend policy.
#[derive(Clone, Debug, Serialize)]
pub struct BlendReport {
    pub good_mu1: Vec<usize>,
    pub good_mu2: Vec<usize>,
    pub points_mu1: usize,
    pub points_mu2: usize,
    pub ratio: f64,
}

#[derive(Debug)]
pub struct GlueOutcome {
    pub map: DiscreteMap,
    pub blend: Option<BlendReport>,
}

/// Close the internal segments into periodic orbits per the policy, then
/// complete to a bijection: a greedy nearest-available pass toward `f(x)`
/// (ties to the smaller index), then sorted matching of the residue where
/// `f` is undefined.
pub fn glue(
    partial: &[Option<usize>],
    index: &SegmentIndex,
    policy: &GluingPolicy,
    family: &StackFamily,
    classical: &dyn ClassicalMap,
) -> Result<GlueOutcome> {
    let n = index.n;
    let mut perm: Vec<Option<usize>> = partial.to_vec();
    let mut prov = vec![Provenance::NearestCompletion; n];
    for (q, img) in partial.iter().enumerate() {
        if img.is_some() {
            prov[q] = Provenance::InternalSegment;
        }
    }

    let mut set_glue = |perm: &mut Vec<Option<usize>>, from: usize, to: usize| {
        debug_assert!(perm[from].is_none(), "gluing an already mapped point");
        perm[from] = Some(to);
        prov[from] = Provenance::Glue;
    };

    // A stack of height 1 has no internal orbit segment (top = bottom), so
    // its points carry no dynamical information to close into cycles; they
    // are left to the nearest-point completion instead.
    let glueable = |seg: &StackSegments| seg.height() > 1;

    let mut blend_report = None;
    match policy {
        GluingPolicy::PeriodicPerStack => {
            for seg in index.stacks.iter().filter(|s| glueable(s)) {
                for e in 0..seg.k {
                    set_glue(&mut perm, seg.top_point(e), seg.bottom_point(e));
                }
            }
        }
        GluingPolicy::SingleOrbitConcat => {
            let cols: Vec<(usize, usize)> = index
                .stacks
                .iter()
                .filter(|s| glueable(s))
                .flat_map(|seg| (0..seg.k).map(move |e| (seg.stack, e)))
                .collect();
            for (c, &(i, e)) in cols.iter().enumerate() {
                let (i2, e2) = cols[(c + 1) % cols.len()];
                let top = index.stacks[i].top_point(e);
                let next_bottom = index.stacks[i2].bottom_point(e2);
                set_glue(&mut perm, top, next_bottom);
            }
        }
        GluingPolicy::CrossStackBlend(params) => {
            let good1 = good_stacks(family, &params.mu1, params.q, params.epsilon);
            let good2 = good_stacks(family, &params.mu2, params.q, params.epsilon);
            if good1.is_empty() {
                return Err(Error::Gluing("no ε-q-good stacks for μ1".into()));
            }
            if good2.is_empty() {
                return Err(Error::Gluing("no ε-q-good stacks for μ2".into()));
            }
            if good1.iter().any(|i| good2.contains(i)) {
                return Err(Error::Gluing(
                    "a stack is ε-q-good for both targets; decrease epsilon".into(),
                ));
            }
            let good1: Vec<usize> =
                good1.into_iter().filter(|&i| glueable(&index.stacks[i])).collect();
            let good2: Vec<usize> =
                good2.into_iter().filter(|&i| glueable(&index.stacks[i])).collect();
            if good1.is_empty() || good2.is_empty() {
                return Err(Error::Gluing("good stacks all have height 1 at this stage".into()));
            }
            let points2: usize = good2
                .iter()
                .map(|&i| index.stacks[i].k * index.stacks[i].height())
                .sum();
            let target1 = points2 as f64 * params.alpha1 / params.alpha2;
            // Take columns from the μ1-good stacks while this improves the
            // point-count ratio.
            let mut selected: Vec<(usize, usize)> = Vec::new();
            let mut points1 = 0usize;
            'outer: for &i in &good1 {
                let h = index.stacks[i].height();
                for e in 0..index.stacks[i].k {
                    let better = ((points1 + h) as f64 - target1).abs()
                        <= (points1 as f64 - target1).abs();
                    if !better {
                        break 'outer;
                    }
                    selected.push((i, e));
                    points1 += h;
                }
            }
            if selected.is_empty() {
                return Err(Error::Gluing("blend selected no μ1 segments".into()));
            }
            let mut cols = selected;
            for &i in &good2 {
                for e in 0..index.stacks[i].k {
                    cols.push((i, e));
                }
            }
            for (c, &(i, e)) in cols.iter().enumerate() {
                let (i2, e2) = cols[(c + 1) % cols.len()];
                set_glue(&mut perm, index.stacks[i].top_point(e), index.stacks[i2].bottom_point(e2));
            }
            blend_report = Some(BlendReport {
                good_mu1: good1,
                good_mu2: good2,
                points_mu1: points1,
                points_mu2: points2,
                ratio: points1 as f64 / points2 as f64,
            });
        }
    }

    // Completion. Free image slots are whatever the cycles did not claim.
    let mut free: BTreeSet<usize> = (0..n).collect();
    for img in perm.iter().flatten() {
        free.remove(img);
    }
    let mut residue = Vec::new();
    for q in 0..n {
        if perm[q].is_some() {
            continue;
        }
        let x = BigRational::new(BigInt::from(q), BigInt::from(n));
        match classical.eval(&x) {
            Some(y) => {
                let ideal = round_to_lattice(&y, n);
                let slot = nearest_free(&free, ideal, n)
                    .ok_or_else(|| Error::Gluing("no free image slots left".into()))?;
                free.remove(&slot);
                perm[q] = Some(slot);
            }
            None => residue.push(q),
        }
    }
    // Residue: arbitrary but deterministic sorted-to-sorted matching.
    for q in residue {
        let slot = *free.iter().next().expect("counts match");
        free.remove(&slot);
        perm[q] = Some(slot);
    }

    let perm: Vec<usize> = perm.into_iter().map(|p| p.expect("complete")).collect();
    let map = DiscreteMap::from_perm(perm, prov, family.stage())?;
    Ok(GlueOutcome { map, blend: blend_report })
}

/// Round `y ∈ [0,1)` to the nearest lattice index mod `N` (half rounds up).
fn round_to_lattice(y: &BigRational, n: usize) -> usize {
    let two = BigInt::from(2);
    let num = BigInt::from(n) * y.numer() * &two + y.denom();
    let den = y.denom() * two;
    let q = num.div_floor(&den).mod_floor(&BigInt::from(n));
    q.to_usize().expect("lattice index")
}

/// Nearest member of `free` to `ideal` in circular distance; at equal
/// distance the numerically smaller index wins.
fn nearest_free(free: &BTreeSet<usize>, ideal: usize, n: usize) -> Option<usize> {
    if free.is_empty() {
        return None;
    }
    for d in 0..=(n / 2) {
        let up = (ideal + d) % n;
        let down = (ideal + n - d) % n;
        let has_up = free.contains(&up);
        let has_down = free.contains(&down);
        match (has_up, has_down) {
            (true, true) => return Some(up.min(down)),
            (true, false) => return Some(up),
            (false, true) => return Some(down),
            (false, false) => {}
        }
    }
    None
}

/// Quality report for the approximation `f_N` against a classical evaluator.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaReport {
    /// `sup |f_N(Q/N) − f(Q/N)|` over considered points (circle metric).
    pub delta: f64,
    /// The same sup restricted to internal-segment points.
    pub delta_internal: f64,
    /// The same sup restricted to completion points; the bijective
    /// completion is what dominates `delta` when leftovers must jump.
    pub delta_completion: f64,
    /// Lattice points at distance `< ε` from `f(S)` (skipped).
    pub excluded_collar: usize,
    /// Points where the evaluator is undefined at this stage (skipped,
    /// counted).
    pub excluded_undefined: usize,
    /// Points entering the supremum.
    pub considered: usize,
    /// Set when no point qualified; `delta` is then 0 by convention.
    pub vacuous: bool,
}

/// `δ_N(ε)`: the sup of `|f_N − f|` over lattice points at circle distance
/// at least `ε` from the singular image set.
pub fn delta_n(
    f: &dyn ClassicalMap,
    map: &DiscreteMap,
    epsilon: f64,
    fs_image: &[BigRational],
) -> DeltaReport {
    let n = map.n();
    let fs: Vec<f64> = fs_image.iter().map(ratio_to_f64).collect();
    let mut delta = 0.0f64;
    let mut delta_internal = 0.0f64;
    let mut delta_completion = 0.0f64;
    let mut excluded_collar = 0;
    let mut excluded_undefined = 0;
    let mut considered = 0;
    for q in 0..n {
        let xf = q as f64 / n as f64;
        let dist = fs
            .iter()
            .map(|s| circle_dist_f64(xf, *s))
            .fold(f64::INFINITY, f64::min);
        if dist < epsilon {
            excluded_collar += 1;
            continue;
        }
        let x = BigRational::new(BigInt::from(q), BigInt::from(n));
        match f.eval_f64(&x) {
            None => excluded_undefined += 1,
            Some(y) => {
                considered += 1;
                let got = map.fhat(q) as f64 / n as f64;
                let d = circle_dist_f64(got, y);
                delta = delta.max(d);
                match map.provenance()[q] {
                    Provenance::InternalSegment => delta_internal = delta_internal.max(d),
                    Provenance::NearestCompletion => delta_completion = delta_completion.max(d),
                    Provenance::Glue => {}
                }
            }
        }
    }
    DeltaReport {
        delta,
        delta_internal,
        delta_completion,
        excluded_collar,
        excluded_undefined,
        considered,
        vacuous: considered == 0,
    }
}

/// Smallest lattice occupancy over all intervals of the family.
pub fn min_lattice_count(family: &StackFamily, n: usize) -> usize {
    family
        .stacks()
        .iter()
        .flat_map(|s| s.intervals().iter())
        .map(|iv| {
            let (a, b) = iv.lattice_range(n);
            b.saturating_sub(a)
        })
        .min()
        .unwrap_or(0)
}

/// Largest stage `n` whose intervals all hold at least `kappa` lattice
/// points; floors at stage 1.
pub fn schedule_n_of_n(program: &CutStackProgram, n: usize, kappa: usize) -> Result<usize> {
    for stage in (1..=program.n_stages()).rev() {
        let family = program.refine(stage)?;
        if min_lattice_count(&family, n) >= kappa {
            return Ok(stage);
        }
    }
    Ok(1)
}

/// The stage schedule `n(N)` over a sweep: per `N`, the deepest stage whose
/// intervals all hold at least `kappa` lattice points.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxSchedule {
    pub kappa: usize,
    /// `(N, n(N))` pairs in sweep order.
    pub pairs: Vec<(usize, usize)>,
}

impl ApproxSchedule {
    pub fn compute(program: &CutStackProgram, sweep: &[usize], kappa: usize) -> Result<Self> {
        let pairs = sweep
            .iter()
            .map(|&n| Ok((n, schedule_n_of_n(program, n, kappa)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ApproxSchedule { kappa, pairs })
    }

    /// Stage for a given `N`, if it is in the sweep.
    pub fn stage_for(&self, n: usize) -> Option<usize> {
        self.pairs.iter().find(|(m, _)| *m == n).map(|(_, s)| *s)
    }

    /// Every emitted pair keeps at least `kappa` points per interval (except
    /// at the stage-1 floor, where the program has nothing coarser to offer).
    pub fn verify(&self, program: &CutStackProgram, n: usize) -> Result<bool> {
        match self.stage_for(n) {
            None => Ok(false),
            Some(stage) => {
                let family = program.refine(stage)?;
                Ok(min_lattice_count(&family, n) >= self.kappa || stage == 1)
            }
        }
    }
}

/// `ε_N` for a stage family: the maximal stack width.
pub fn epsilon_n(family: &StackFamily) -> f64 {
    ratio_to_f64(&family.max_width())
}

/// Indices of stacks whose column through the base midpoint visits every
/// denominator-`q` interval with frequency within `epsilon` of `mu`.
pub fn good_stacks(family: &StackFamily, mu: &MeasureTarget, q: u32, epsilon: f64) -> Vec<usize> {
    let q = q.max(1);
    let mut out = Vec::new();
    for (i, s) in family.stacks().iter().enumerate() {
        let h = s.height();
        let base = s.bottom().left().clone();
        let mid = s.bottom().midpoint();
        // Occupancy of the elementary cells [c/q, (c+1)/q).
        let mut cells = vec![0usize; q as usize];
        for j in 0..h {
            let x = &mid + (s.level(j).left() - &base);
            let xf = ratio_to_f64(&x);
            let c = ((xf * q as f64).floor() as usize).min(q as usize - 1);
            cells[c] += 1;
        }
        let mut prefix = vec![0usize; q as usize + 1];
        for c in 0..q as usize {
            prefix[c + 1] = prefix[c] + cells[c];
        }
        let mut good = true;
        'intervals: for p1 in 0..q {
            for p2 in (p1 + 1)..=q {
                let l = BigRational::new(BigInt::from(p1), BigInt::from(q));
                let r = BigRational::new(BigInt::from(p2), BigInt::from(q));
                let freq = (prefix[p2 as usize] - prefix[p1 as usize]) as f64 / h as f64;
                if (freq - mu.mass(&l, &r)).abs() > epsilon {
                    good = false;
                    break 'intervals;
                }
            }
        }
        if good {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutstack::{build_iet, FamilyMap, IetSpec, IntervalQ, Stack};
    use crate::util::parse_ratio;
    use num_traits::One;

    fn r(s: &str) -> BigRational {
        parse_ratio(s).unwrap()
    }

    fn height2_family() -> StackFamily {
        let s = Stack::new(vec![
            IntervalQ::new(r("0"), r("1/2")).unwrap(),
            IntervalQ::new(r("1/2"), r("1")).unwrap(),
        ])
        .unwrap();
        StackFamily::new(vec![s], 1).unwrap()
    }

    #[test]
    fn internal_segments_height2_n4() {
        let fam = height2_family();
        let (partial, index) = internal_segments(&fam, 4);
        // levels: {0,1} and {2,3}; 0->2, 1->3.
        assert_eq!(partial[0], Some(2));
        assert_eq!(partial[1], Some(3));
        assert_eq!(partial[2], None);
        assert_eq!(partial[3], None);
        assert_eq!(index.stacks[0].k, 2);
        assert_eq!(index.internal_point_count(), 4);
    }

    #[test]
    fn height1_family_has_no_segments() {
        let s = Stack::new(vec![IntervalQ::new(r("0"), r("1")).unwrap()]).unwrap();
        let fam = StackFamily::new(vec![s], 1).unwrap();
        let (partial, index) = internal_segments(&fam, 8);
        assert!(partial.iter().all(Option::is_none));
        assert_eq!(index.internal_point_count(), 8);
    }

    #[test]
    fn periodic_per_stack_closes_columns() {
        let fam = height2_family();
        let (partial, index) = internal_segments(&fam, 4);
        let out = glue(&partial, &index, &GluingPolicy::PeriodicPerStack, &fam, &FamilyMap(fam.clone()))
            .unwrap();
        // cycles (0 2)(1 3)
        assert_eq!(out.map.perm(), &[2, 3, 0, 1]);
        assert_eq!(out.map.provenance()[2], Provenance::Glue);
    }

    #[test]
    fn single_orbit_concat_chains_columns() {
        let fam = height2_family();
        let (partial, index) = internal_segments(&fam, 4);
        let out = glue(&partial, &index, &GluingPolicy::SingleOrbitConcat, &fam, &FamilyMap(fam.clone()))
            .unwrap();
        // Columns (0,2) and (1,3): top of col 0 -> bottom of col 1, top of
        // col 1 -> bottom of col 0: one 4-cycle 0→2→1→3→0.
        assert_eq!(out.map.perm(), &[2, 3, 1, 0]);
        let mut q = 0usize;
        let mut len = 0usize;
        loop {
            q = out.map.fhat(q);
            len += 1;
            if q == 0 {
                break;
            }
        }
        assert_eq!(len, 4);
    }

    #[test]
    fn internal_points_track_the_family_map() {
        // |f_N x − f x| = O(1/N) on internal points, explicit bound 2/N.
        let alpha = r("610/987");
        let prog = crate::cutstack::rotation_towers(&alpha, 8).unwrap();
        let fam = prog.refine(6).unwrap();
        let n = 512usize;
        let (partial, index) = internal_segments(&fam, n);
        let fmap = FamilyMap(fam.clone());
        let mut checked = 0;
        for (q, img) in partial.iter().enumerate() {
            if let Some(img) = img {
                let x = BigRational::new(BigInt::from(q), BigInt::from(n));
                let y = fmap.eval_f64(&x).expect("internal points are not tops");
                let d = circle_dist_f64(*img as f64 / n as f64, y);
                assert!(d <= 2.0 / n as f64, "point {q}: drift {d}");
                checked += 1;
            }
        }
        assert!(checked > n / 2);
        let _ = index;
    }

    #[test]
    fn glue_produces_bijections_across_policies() {
        let alpha = r("610/987");
        let prog = crate::cutstack::rotation_towers(&alpha, 8).unwrap();
        for n in [64usize, 129, 512] {
            let stage = schedule_n_of_n(&prog, n, 8).unwrap();
            let fam = prog.refine(stage).unwrap();
            let (partial, index) = internal_segments(&fam, n);
            for policy in [GluingPolicy::PeriodicPerStack, GluingPolicy::SingleOrbitConcat] {
                let out = glue(&partial, &index, &policy, &fam, &FamilyMap(fam.clone())).unwrap();
                let mut sorted = out.map.perm().to_vec();
                sorted.sort_unstable();
                assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn lattice_compatible_rotation_has_zero_delta() {
        // f = rotation by k/N and the exact discretisation: δ_N = 0.
        let n = 64usize;
        let alpha = r("16/64");
        let (rot, fam) = build_iet(&IetSpec::rotation(&alpha).unwrap()).unwrap();
        let (partial, index) = internal_segments(&fam, n);
        let out = glue(&partial, &index, &GluingPolicy::PeriodicPerStack, &fam, &rot).unwrap();
        let rep = delta_n(&rot, &out.map, 1e-9, &[]);
        assert_eq!(rep.delta, 0.0);
        assert_eq!(rep.excluded_undefined, 0);
        assert!(!rep.vacuous);
    }

    #[test]
    fn delta_vacuous_when_collar_covers_circle() {
        let map = DiscreteMap::identity(8);
        let (ident, _) = build_iet(&IetSpec { permutation: vec![1], lengths: vec![BigRational::one()] })
            .unwrap();
        let rep = delta_n(&ident, &map, 0.6, &[r("1/2")]);
        assert!(rep.vacuous);
        assert_eq!(rep.delta, 0.0);
    }

    #[test]
    fn covered_fraction_bound() {
        // Column orbits miss at most one point per interval, so the covered
        // fraction is at least 1 − (#intervals)/N at any fixed stage.
        let prog = crate::cutstack::rotation_towers(&r("610/987"), 10).unwrap();
        for stage in [4usize, 6, 8] {
            let fam = prog.refine(stage).unwrap();
            let intervals = fam.interval_count();
            for n in [256usize, 1024, 4096] {
                let (_, index) = internal_segments(&fam, n);
                let covered = index.internal_point_count();
                assert!(
                    covered + intervals >= n,
                    "stage {stage}, N={n}: covered {covered}, intervals {intervals}"
                );
            }
        }
    }

    #[test]
    fn schedule_type_over_sweep() {
        let prog = crate::cutstack::build_full_shift_program(9).unwrap();
        let sched = ApproxSchedule::compute(&prog, &[64, 256, 1024], 8).unwrap();
        assert_eq!(sched.pairs.len(), 3);
        for &(n, _) in &sched.pairs {
            assert!(sched.verify(&prog, n).unwrap());
        }
        assert_eq!(sched.stage_for(256), Some(5));
        assert_eq!(sched.stage_for(7), None);
    }

    #[test]
    fn schedule_counts_dyadic_widths() {
        // widths b_n = 2^{1−n} on the full-shift program: kappa = 8 needs
        // N·2^{−n} ≥ 8.
        let prog = crate::cutstack::build_full_shift_program(9).unwrap();
        let stage = schedule_n_of_n(&prog, 256, 8).unwrap();
        // max stage with 256/2^n >= 8 is n = 5.
        assert_eq!(stage, 5);
        let stage = schedule_n_of_n(&prog, 4, 8).unwrap();
        assert_eq!(stage, 1, "floors at stage 1");
        // Monotone over a doubling sweep.
        let mut last = 0;
        for n in [128usize, 256, 512, 1024, 2048, 4096, 8192] {
            let s = schedule_n_of_n(&prog, n, 8).unwrap();
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn good_stacks_vacuous_bounds() {
        let fam = height2_family();
        // ε ≥ 1 admits every stack; q = 1 admits every stack for any ε > 0.
        assert_eq!(good_stacks(&fam, &MeasureTarget::Lebesgue, 4, 1.0), vec![0]);
        assert_eq!(good_stacks(&fam, &MeasureTarget::Lebesgue, 1, 1e-9), vec![0]);
    }

    #[test]
    fn rotation_tower_stacks_are_lebesgue_good() {
        let alpha = r("610/987");
        let prog = crate::cutstack::rotation_towers(&alpha, 12).unwrap();
        let fam = prog.refine(12).unwrap();
        // Towers at a deep stage equidistribute; discrepancy at q = 4 is
        // far below 0.15.
        let good = good_stacks(&fam, &MeasureTarget::Lebesgue, 4, 0.15);
        assert_eq!(good.len(), fam.stacks().len());
    }

    #[test]
    fn blend_on_two_component_map() {
        let (map, prog) = crate::cutstack::build_two_component(&r("610/987"), &r("408/985"), 8)
            .unwrap();
        let n = 1024usize;
        let stage = schedule_n_of_n(&prog, n, 8).unwrap();
        let fam = prog.refine(stage).unwrap();
        let (partial, index) = internal_segments(&fam, n);
        let left = MeasureTarget::ComponentLebesgue(IntervalQ::new(r("0"), r("1/2")).unwrap());
        let right = MeasureTarget::ComponentLebesgue(IntervalQ::new(r("1/2"), r("1")).unwrap());
        let policy = GluingPolicy::CrossStackBlend(BlendParams {
            mu1: left,
            mu2: right,
            alpha1: 0.5,
            alpha2: 0.5,
            q: 4,
            epsilon: 0.15,
        });
        let out = glue(&partial, &index, &policy, &fam, &map).unwrap();
        let mut sorted = out.map.perm().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        let blend = out.blend.unwrap();
        assert!((blend.ratio - 1.0).abs() < 0.25, "ratio {}", blend.ratio);
    }

    #[test]
    fn csv_export_shape() {
        let map = DiscreteMap::identity(3);
        let mut buf = Vec::new();
        map.write_csv(&mut buf, Some("config_hash=abc")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# config_hash=abc");
        assert_eq!(lines[1], "Q,image,provenance");
        assert_eq!(lines[2], "0,0,internal-segment");
        assert_eq!(lines.len(), 5);
    }
}
