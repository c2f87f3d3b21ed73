//! Builders for the shipped map classes: finite interval exchanges, rotation
//! tower programs, the two-ergodic-component map, and a finite-stage model of
//! the full two-symbol shift.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::util::{fmt_ratio, frac_mod_1};

use super::program::{CutInstr, CutStackProgram, StackInstr, StageInstr};
use super::{ClassicalMap, IntervalQ, Stack, StackFamily};

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/* Interval exchange transformations ****************************************/

/// Combinatorial data of an IET: a permutation of `{1..m}` and exact lengths
/// summing to 1.
#[derive(Clone, Debug)]
pub struct IetSpec {
    /// `permutation[i]` is the (1-based) position interval `i+1` is sent to.
    pub permutation: Vec<usize>,
    pub lengths: Vec<BigRational>,
}

impl IetSpec {
    pub fn validate(&self) -> Result<()> {
        let m = self.permutation.len();
        if m == 0 || self.lengths.len() != m {
            return Err(Error::Config("permutation and lengths must have equal size >= 1".into()));
        }
        let mut seen = vec![false; m];
        for &p in &self.permutation {
            if p == 0 || p > m || std::mem::replace(&mut seen[p - 1], true) {
                return Err(Error::Config(format!("not a permutation of 1..{m}")));
            }
        }
        for v in &self.lengths {
            if !v.is_positive() {
                return Err(Error::Config("lengths must be positive".into()));
            }
        }
        let total: BigRational = self.lengths.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::Config(format!("lengths sum to {}, not 1", fmt_ratio(&total))));
        }
        Ok(())
    }

    /// Rotation by `alpha` as the 2-IET with lengths `(1−α, α)`.
    pub fn rotation(alpha: &BigRational) -> Result<IetSpec> {
        if !(alpha.is_positive() && alpha < &BigRational::one()) {
            return Err(Error::Config("rotation angle must lie in (0,1)".into()));
        }
        Ok(IetSpec {
            permutation: vec![2, 1],
            lengths: vec![BigRational::one() - alpha, alpha.clone()],
        })
    }
}

/// A finite IET as a piecewise-translation evaluator. Total: defined on all
/// of `[0,1)`.
#[derive(Clone, Debug)]
pub struct IetMap {
    /// Branch cut points `u_0 = 0 < u_1 < … < u_m = 1`.
    cuts: Vec<BigRational>,
    /// Translation added on branch `i` (`x ∈ [u_i, u_{i+1})`).
    offsets: Vec<BigRational>,
}

impl IetMap {
    fn branch(&self, x: &BigRational) -> usize {
        let idx = self.cuts.partition_point(|u| u <= x);
        idx - 1
    }

    pub fn branch_count(&self) -> usize {
        self.offsets.len()
    }

    /// All branch cut points including 0 and 1.
    pub fn singular_points(&self) -> Vec<BigRational> {
        self.cuts.clone()
    }

    /// One-sided limit values of the map at its singular points, reduced
    /// mod 1 — the set `f(S)` of the exchange.
    pub fn singular_image(&self) -> Vec<BigRational> {
        let mut pts = Vec::new();
        let m = self.offsets.len();
        for i in 0..m {
            pts.push(frac_mod_1(&(&self.cuts[i] + &self.offsets[i])));
            pts.push(frac_mod_1(&(&self.cuts[i + 1] + &self.offsets[i])));
        }
        pts.sort();
        pts.dedup();
        pts
    }

    pub fn inverse(&self) -> IetMap {
        let m = self.offsets.len();
        let mut branches: Vec<(BigRational, BigRational, BigRational)> = (0..m)
            .map(|i| {
                let dl = &self.cuts[i] + &self.offsets[i];
                let dr = &self.cuts[i + 1] + &self.offsets[i];
                (dl, dr, -self.offsets[i].clone())
            })
            .collect();
        branches.sort_by(|a, b| a.0.cmp(&b.0));
        let mut cuts: Vec<BigRational> = branches.iter().map(|b| b.0.clone()).collect();
        cuts.push(BigRational::one());
        IetMap { cuts, offsets: branches.into_iter().map(|b| b.2).collect() }
    }
}

impl ClassicalMap for IetMap {
    fn eval(&self, x: &BigRational) -> Option<BigRational> {
        if x.is_negative() || x >= &BigRational::one() {
            return None;
        }
        let i = self.branch(x);
        Some(x + &self.offsets[i])
    }
}

/// Build the evaluator for `T_{π,v}` together with the equivalent stage-1
/// stack family (one height-1 stack per exchanged interval).
pub fn build_iet(spec: &IetSpec) -> Result<(IetMap, StackFamily)> {
    spec.validate()?;
    let m = spec.permutation.len();
    let mut cuts = Vec::with_capacity(m + 1);
    cuts.push(BigRational::zero());
    for v in &spec.lengths {
        let last = cuts.last().unwrap().clone();
        cuts.push(last + v);
    }
    // Destination offset of interval i: total length of intervals placed
    // before it under the permutation.
    let mut offsets = Vec::with_capacity(m);
    for i in 0..m {
        let mut dest = BigRational::zero();
        for j in 0..m {
            if spec.permutation[j] < spec.permutation[i] {
                dest += &spec.lengths[j];
            }
        }
        offsets.push(dest - &cuts[i]);
    }
    let map = IetMap { cuts: cuts.clone(), offsets };
    let stacks = (0..m)
        .map(|i| Stack::new(vec![IntervalQ::new(cuts[i].clone(), cuts[i + 1].clone())?]))
        .collect::<Result<Vec<_>>>()?;
    Ok((map, StackFamily::new(stacks, 1)?))
}

/* Rotation towers **********************************************************/

// Post-cut view used while generating tower programs: each piece remembers
// which entry stack it came from and its horizontal offset inside it.
struct Piece {
    stack: Stack,
    entry: usize,
    offset: BigRational,
}

fn materialize(cur: &[Stack], fracs: &[Vec<BigRational>]) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    for (i, s) in cur.iter().enumerate() {
        if fracs[i].is_empty() {
            out.push(Piece { stack: s.clone(), entry: i, offset: BigRational::zero() });
        } else {
            let w = s.width();
            let pieces = super::cut_stack(s, &fracs[i])?;
            let mut offsets = vec![BigRational::zero()];
            for f in &fracs[i] {
                offsets.push(f * &w);
            }
            for (p, off) in pieces.into_iter().zip(offsets) {
                out.push(Piece { stack: p, entry: i, offset: off });
            }
        }
    }
    Ok(out)
}

/// Cutting-and-stacking tower program for the rotation `x ↦ x + α mod 1`.
///
/// Each stage: any stack whose top straddles the rotation's branch point is
/// pre-cut there, then one stack whose top image lands inside another stack's
/// base is found, a matching vertical slice of the target is cut out, and the
/// slice is stacked on. This is the classical two-tower renormalisation; the
/// family map agrees with the rotation wherever it is defined, and stack
/// widths shrink stage by stage.
///
/// `alpha` is typically a high-denominator convergent standing in for an
/// irrational angle; the builder errors once the requested stage count
/// exceeds what the rational resolution supports.
pub fn rotation_towers(alpha: &BigRational, stages: usize) -> Result<CutStackProgram> {
    let one = BigRational::one();
    if !(alpha.is_positive() && alpha < &one) {
        return Err(Error::Config("rotation angle must lie in (0,1)".into()));
    }
    let d = &one - alpha; // branch point of the rotation on [0,1)
    let initial = vec![
        Stack::new(vec![IntervalQ::new(BigRational::zero(), d.clone())?])?,
        Stack::new(vec![IntervalQ::new(d.clone(), one.clone())?])?,
    ];
    let mut cur = initial.clone();
    let mut out = CutStackProgram { initial, stages: Vec::new() };

    for stage in 2..=stages.max(1) {
        let mut fracs: Vec<Vec<BigRational>> = vec![Vec::new(); cur.len()];
        for (i, s) in cur.iter().enumerate() {
            let t = s.top();
            if t.left() < &d && &d < t.right() {
                fracs[i].push((&d - t.left()) / s.width());
            }
        }

        let post = materialize(&cur, &fracs)?;
        let image = |p: &Piece| -> (BigRational, BigRational) {
            let t = p.stack.top();
            let off = if t.left() >= &d { alpha - &one } else { alpha.clone() };
            (t.left() + &off, t.right() + &off)
        };
        let mut found = None;
        'search: for (si, s) in post.iter().enumerate() {
            let (jl, jr) = image(s);
            for (ti, t) in post.iter().enumerate() {
                if ti == si {
                    continue;
                }
                let b = t.stack.bottom();
                if b.left() <= &jl && &jr <= b.right() {
                    found = Some((si, ti, &jl - b.left()));
                    break 'search;
                }
            }
        }
        let Some((si, ti, woff)) = found else {
            return Err(Error::Stage {
                stage,
                msg: format!(
                    "rotation tower construction exhausted for alpha = {} (rational resolution)",
                    fmt_ratio(alpha)
                ),
            });
        };

        // Cut the matching window out of the target's entry stack.
        let s_id = (post[si].entry, post[si].offset.clone());
        let t_entry = post[ti].entry;
        let t_off = post[ti].offset.clone();
        let w_slice = post[si].stack.width();
        let w_entry = cur[t_entry].width();
        let lo = &t_off + &woff;
        let hi = &lo + &w_slice;
        for cutpos in [lo.clone(), hi] {
            if cutpos.is_positive() && cutpos < w_entry {
                let f = &cutpos / &w_entry;
                if !fracs[t_entry].contains(&f) {
                    fracs[t_entry].push(f);
                }
            }
        }
        for fs in fracs.iter_mut() {
            fs.sort();
        }

        let post = materialize(&cur, &fracs)?;
        let find = |entry: usize, off: &BigRational| {
            post.iter().position(|p| p.entry == entry && &p.offset == off).unwrap()
        };
        let lower = find(s_id.0, &s_id.1);
        let upper = find(t_entry, &lo);

        let instr = StageInstr {
            cuts: fracs
                .iter()
                .enumerate()
                .filter(|(_, fs)| !fs.is_empty())
                .map(|(i, fs)| CutInstr { stack: i, fractions: fs.clone() })
                .collect(),
            stacks: vec![StackInstr { lower, upper }],
        };
        cur = super::program::apply_stage(cur, &instr)
            .map_err(|e| Error::Stage { stage, msg: e.to_string() })?;
        out.stages.push(instr);
    }
    Ok(out)
}

/* Two-component map ********************************************************/

/// Rotation by `alpha1` on `[0,1/2)` and by `alpha2` on `[1/2,1)`, both
/// rescaled; the halves are invariant components carrying the normalised
/// Lebesgue measures `μ1`, `μ2`.
#[derive(Clone, Debug)]
pub struct TwoComponentMap {
    pub alpha1: BigRational,
    pub alpha2: BigRational,
}

impl ClassicalMap for TwoComponentMap {
    fn eval(&self, x: &BigRational) -> Option<BigRational> {
        if x.is_negative() || x >= &BigRational::one() {
            return None;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        if x < &half() {
            let y = frac_mod_1(&(&two * x + &self.alpha1));
            Some(y / &two)
        } else {
            let y = frac_mod_1(&(&two * x - BigRational::one() + &self.alpha2));
            Some((y + BigRational::one()) / &two)
        }
    }
}

impl TwoComponentMap {
    /// `f(S)` analogue: component-wise rotation singular images plus the
    /// component boundary.
    pub fn singular_image(&self) -> Vec<BigRational> {
        let two = BigRational::from_integer(BigInt::from(2));
        let mut pts = vec![
            BigRational::zero(),
            &self.alpha1 / &two,
            half(),
            half() + &self.alpha2 / &two,
        ];
        pts.sort();
        pts.dedup();
        pts
    }
}

/// Build the two-component evaluator and its tower program: rotation towers
/// on each half, run in lockstep. `stages` counts per-component stages.
pub fn build_two_component(
    alpha1: &BigRational,
    alpha2: &BigRational,
    stages: usize,
) -> Result<(TwoComponentMap, CutStackProgram)> {
    let left = rotation_towers(alpha1, stages)?;
    let right = rotation_towers(alpha2, stages)?;
    let map = TwoComponentMap { alpha1: alpha1.clone(), alpha2: alpha2.clone() };

    let squeeze = |stacks: &[Stack], into_right: bool| -> Result<Vec<Stack>> {
        let two = BigRational::from_integer(BigInt::from(2));
        stacks
            .iter()
            .map(|s| {
                let ivs = s
                    .intervals()
                    .iter()
                    .map(|iv| {
                        let (mut l, mut r) = (iv.left() / &two, iv.right() / &two);
                        if into_right {
                            l += half();
                            r += half();
                        }
                        IntervalQ::new(l, r)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Stack::new(ivs)
            })
            .collect()
    };

    let mut initial = squeeze(&left.initial, false)?;
    initial.extend(squeeze(&right.initial, true)?);

    // Merge stage instructions, offsetting all right-component indices by the
    // left component's concurrent stack counts.
    let mut merged = Vec::new();
    let mut l_entry = left.initial.len();
    for k in 0..left.stages.len().min(right.stages.len()) {
        let li = &left.stages[k];
        let ri = &right.stages[k];
        let l_postcut = l_entry + li.cuts.iter().map(|c| c.fractions.len()).sum::<usize>();
        let mut cuts = li.cuts.clone();
        cuts.extend(ri.cuts.iter().map(|c| CutInstr {
            stack: c.stack + l_entry,
            fractions: c.fractions.clone(),
        }));
        let mut stacks = li.stacks.clone();
        stacks.extend(ri.stacks.iter().map(|s| StackInstr {
            lower: s.lower + l_postcut,
            upper: s.upper + l_postcut,
        }));
        merged.push(StageInstr { cuts, stacks });
        l_entry = l_postcut - li.stacks.len();
    }
    Ok((map, CutStackProgram { initial, stages: merged }))
}

/* Full shift model *********************************************************/

/// Finite-stage cutting-and-stacking model of the two-symbol shift with the
/// symmetric Bernoulli partition `[0,1/2), [1/2,1)`.
///
/// Every stage halves all widths (`max width at stage n is exactly 2^{−n}`):
/// even stages cut each stack in half and stack the right slices onto the
/// left slices of the cyclically next stack, doubling heights; odd stages
/// only cut, doubling the stack count. The family map has no periodic point
/// at any finite stage, and column words concatenate across stages.
pub fn build_full_shift_program(stages: usize) -> Result<CutStackProgram> {
    let initial = vec![
        Stack::new(vec![IntervalQ::new(BigRational::zero(), half())?])?,
        Stack::new(vec![IntervalQ::new(half(), BigRational::one())?])?,
    ];
    let mut out = CutStackProgram { initial, stages: Vec::new() };
    let mut count = 2usize;
    for stage in 2..=stages.max(1) {
        let cuts = (0..count)
            .map(|i| CutInstr { stack: i, fractions: vec![half()] })
            .collect::<Vec<_>>();
        if stage % 2 == 0 {
            // Halves: L_i at slot 2i, R_i at slot 2i+1. Stack R_{i+1 mod s}
            // onto L_i.
            let stacks = (0..count)
                .map(|i| StackInstr { lower: 2 * i, upper: 2 * ((i + 1) % count) + 1 })
                .collect();
            out.stages.push(StageInstr { cuts, stacks });
        } else {
            out.stages.push(StageInstr { cuts, stacks: Vec::new() });
            count *= 2;
        }
    }
    Ok(out)
}
