//! Exact-rational cutting and stacking.
//!
//! A stack is a column of disjoint, equal-width, closed-left/open-right
//! subintervals of `[0,1)`; a stack family partitions `[0,1)` and defines the
//! partial map that sends every non-top point to the point directly above it.
//! Stage sequences refine a family by cutting and stacking, and the induced
//! partial maps extend one another.
//!
//! Every endpoint in this layer is an arbitrary-precision rational: width
//! equality, partition seams, and singularity membership are all decided
//! exactly, with zero float involvement.

pub mod builders;
pub mod program;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::util::{fmt_ratio, ratio_to_f64};

pub use builders::{
    build_full_shift_program, build_iet, build_two_component, rotation_towers, IetMap, IetSpec,
    TwoComponentMap,
};
pub use program::{CutInstr, CutStackProgram, StackInstr, StageInstr};

/// A half-open interval `[left, right) ⊂ [0,1]` with exact endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalQ {
    left: BigRational,
    right: BigRational,
}

impl IntervalQ {
    pub fn new(left: BigRational, right: BigRational) -> Result<Self> {
        if left < right
            && !left.is_negative()
            && right <= BigRational::one()
        {
            Ok(IntervalQ { left, right })
        } else {
            Err(Error::BadInterval { left: fmt_ratio(&left), right: fmt_ratio(&right) })
        }
    }

    pub fn left(&self) -> &BigRational {
        &self.left
    }

    pub fn right(&self) -> &BigRational {
        &self.right
    }

    pub fn width(&self) -> BigRational {
        &self.right - &self.left
    }

    /// Closed-left, open-right membership.
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.left <= x && x < &self.right
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.left + &self.right) / BigRational::from_integer(BigInt::from(2))
    }

    /// Lattice points `Q/N ∈ [left, right)`, returned as the range `start..end`.
    pub fn lattice_range(&self, n: usize) -> (usize, usize) {
        let nn = BigInt::from(n);
        let start = (self.left.numer() * &nn).div_ceil(self.left.denom());
        let end = (self.right.numer() * &nn).div_ceil(self.right.denom());
        let to_usize = |b: BigInt| -> usize {
            use num_traits::ToPrimitive;
            b.to_usize().expect("lattice index fits usize")
        };
        (to_usize(start), to_usize(end))
    }
}

/// A column of equal-width intervals; `intervals[0]` is the bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stack {
    intervals: Vec<IntervalQ>,
}

impl Stack {
    pub fn new(intervals: Vec<IntervalQ>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::BadFamily("stack of height 0".into()));
        }
        let w = intervals[0].width();
        for iv in &intervals[1..] {
            if iv.width() != w {
                return Err(Error::WidthMismatch(fmt_ratio(&w), fmt_ratio(&iv.width())));
            }
        }
        Ok(Stack { intervals })
    }

    pub fn height(&self) -> usize {
        self.intervals.len()
    }

    pub fn width(&self) -> BigRational {
        self.intervals[0].width()
    }

    pub fn bottom(&self) -> &IntervalQ {
        &self.intervals[0]
    }

    pub fn top(&self) -> &IntervalQ {
        self.intervals.last().unwrap()
    }

    pub fn level(&self, j: usize) -> &IntervalQ {
        &self.intervals[j]
    }

    pub fn intervals(&self) -> &[IntervalQ] {
        &self.intervals
    }
}

/// Cut a stack at the given width fractions (strictly increasing, in `(0,1)`).
///
/// Every level is split at the same relative positions; piece `0` is the
/// leftmost. Pieces inherit the height and widths `(f_1, f_2−f_1, …, 1−f_k)`
/// times the original width.
pub fn cut_stack(s: &Stack, fractions: &[BigRational]) -> Result<Vec<Stack>> {
    if fractions.is_empty() {
        return Err(Error::BadCutFractions("empty fraction list".into()));
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut prev = zero.clone();
    for f in fractions {
        if !(f > &prev && f < &one) {
            return Err(Error::BadCutFractions(format!(
                "fractions must be strictly increasing in (0,1), got {}",
                fmt_ratio(f)
            )));
        }
        prev = f.clone();
    }
    let w = s.width();
    let mut offsets = Vec::with_capacity(fractions.len() + 2);
    offsets.push(zero);
    for f in fractions {
        offsets.push(f * &w);
    }
    offsets.push(w);

    let mut pieces = Vec::with_capacity(offsets.len() - 1);
    for k in 0..offsets.len() - 1 {
        let ivs = s
            .intervals
            .iter()
            .map(|iv| IntervalQ {
                left: iv.left() + &offsets[k],
                right: iv.left() + &offsets[k + 1],
            })
            .collect();
        pieces.push(Stack { intervals: ivs });
    }
    Ok(pieces)
}

/// Stack `upper` on top of `lower`. Widths must agree exactly and the interval
/// sets must be disjoint.
pub fn stack_onto(lower: &Stack, upper: &Stack) -> Result<Stack> {
    if lower.width() != upper.width() {
        return Err(Error::WidthMismatch(fmt_ratio(&lower.width()), fmt_ratio(&upper.width())));
    }
    for a in &lower.intervals {
        for b in &upper.intervals {
            if a.left() < b.right() && b.left() < a.right() {
                return Err(Error::Overlap(fmt_ratio(a.left())));
            }
        }
    }
    let mut intervals = lower.intervals.clone();
    intervals.extend(upper.intervals.iter().cloned());
    Ok(Stack { intervals })
}

/// A finite stack family partitioning `[0,1)`, tagged with its stage number.
#[derive(Clone, Debug)]
pub struct StackFamily {
    stacks: Vec<Stack>,
    stage: usize,
    // Sorted (left, stack, level) index for point location.
    locate: Vec<(BigRational, usize, usize)>,
}

impl StackFamily {
    pub fn new(stacks: Vec<Stack>, stage: usize) -> Result<Self> {
        if stacks.is_empty() {
            return Err(Error::BadFamily("empty family".into()));
        }
        let mut locate: Vec<(BigRational, usize, usize)> = Vec::new();
        for (i, s) in stacks.iter().enumerate() {
            for (j, iv) in s.intervals.iter().enumerate() {
                locate.push((iv.left().clone(), i, j));
            }
        }
        locate.sort_by(|a, b| a.0.cmp(&b.0));
        // Exact partition check: adjacent intervals must tile [0,1).
        let mut cursor = BigRational::zero();
        for (left, i, j) in &locate {
            if left != &cursor {
                return Err(if left < &cursor {
                    Error::Overlap(fmt_ratio(left))
                } else {
                    Error::BadFamily(format!("gap at {}", fmt_ratio(&cursor)))
                });
            }
            cursor = stacks[*i].intervals[*j].right().clone();
        }
        if cursor != BigRational::one() {
            return Err(Error::BadFamily(format!("union ends at {}", fmt_ratio(&cursor))));
        }
        Ok(StackFamily { stacks, stage, locate })
    }

    pub fn stacks(&self) -> &[Stack] {
        &self.stacks
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn interval_count(&self) -> usize {
        self.locate.len()
    }

    /// The stack and level containing `x ∈ [0,1)`.
    pub fn locate(&self, x: &BigRational) -> Result<(usize, usize)> {
        if x.is_negative() || x >= &BigRational::one() {
            return Err(Error::OutOfDomain(fmt_ratio(x)));
        }
        let idx = self.locate.partition_point(|(l, _, _)| l <= x);
        let (_, i, j) = &self.locate[idx - 1];
        debug_assert!(self.stacks[*i].intervals[*j].contains(x));
        Ok((*i, *j))
    }

    /// The family map: `x ↦ x + ∂⁻I_{j+1} − ∂⁻I_j` on non-top levels,
    /// `None` on tops.
    pub fn eval_map(&self, x: &BigRational) -> Result<Option<BigRational>> {
        let (i, j) = self.locate(x)?;
        let s = &self.stacks[i];
        if j + 1 == s.height() {
            return Ok(None);
        }
        Ok(Some(x + s.intervals[j + 1].left() - s.intervals[j].left()))
    }

    pub fn max_width(&self) -> BigRational {
        self.stacks.iter().map(|s| s.width()).max().unwrap()
    }

    pub fn min_width(&self) -> BigRational {
        self.stacks.iter().map(|s| s.width()).min().unwrap()
    }

    /// Total mass `Σ` over all intervals of widths; `1` for a valid family.
    pub fn total_mass(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for s in &self.stacks {
            acc += s.width() * BigRational::from_integer(BigInt::from(s.height()));
        }
        acc
    }

    /// Boundary points of top and bottom intervals of this family.
    pub fn top_bottom_boundaries(&self) -> Vec<BigRational> {
        let mut pts = Vec::new();
        for s in &self.stacks {
            for iv in [s.bottom(), s.top()] {
                pts.push(iv.left().clone());
                pts.push(iv.right().clone());
            }
        }
        pts.sort();
        pts.dedup();
        pts
    }
}

/// A classical map on `[0,1)`, possibly undefined on part of its domain
/// (stage maps are undefined on tops).
pub trait ClassicalMap {
    fn eval(&self, x: &BigRational) -> Option<BigRational>;

    fn eval_f64(&self, x: &BigRational) -> Option<f64> {
        self.eval(x).map(|y| ratio_to_f64(&y))
    }
}

/// A `StackFamily` viewed as a classical map.
#[derive(Clone, Debug)]
pub struct FamilyMap(pub StackFamily);

impl ClassicalMap for FamilyMap {
    fn eval(&self, x: &BigRational) -> Option<BigRational> {
        self.0.eval_map(x).ok().flatten()
    }
}
