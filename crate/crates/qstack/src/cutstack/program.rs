//! Stage programs: a declared initial family plus, per stage, a batch of cut
//! instructions followed by a batch of stacking instructions.
//!
//! Execution semantics (also the JSON contract):
//!
//! * `cuts`: at most one instruction per stack, indices referring to the
//!   family as it stood when the stage began. The post-cut list replaces each
//!   cut stack by its pieces in place, left to right.
//! * `stacks`: pairs `(lower, upper)` of indices into the post-cut list,
//!   applied in order. The result lands in slot `lower`; slot `upper` becomes
//!   a tombstone that may not be referenced again. Tombstones are dropped
//!   when the stage ends, so the next stage sees a compact list.
//!
//! Rationals ride as `"p/q"` strings in JSON.

use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::util::{fmt_ratio, parse_ratio};

use super::{cut_stack, stack_onto, IntervalQ, Stack, StackFamily};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutInstr {
    pub stack: usize,
    #[serde(serialize_with = "ser_ratios", deserialize_with = "de_ratios")]
    pub fractions: Vec<BigRational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StackInstr {
    pub lower: usize,
    pub upper: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageInstr {
    #[serde(default)]
    pub cuts: Vec<CutInstr>,
    #[serde(default)]
    pub stacks: Vec<StackInstr>,
}

/// A full program: `refine(1)` is the declared initial family, `refine(k)`
/// applies the first `k−1` stage instruction blocks.
#[derive(Clone, Debug)]
pub struct CutStackProgram {
    pub initial: Vec<Stack>,
    pub stages: Vec<StageInstr>,
}

impl CutStackProgram {
    /// Number of available stages, counting the initial family as stage 1.
    pub fn n_stages(&self) -> usize {
        self.stages.len() + 1
    }

    /// The stage-`n` family, `1 ≤ n ≤ n_stages()`.
    pub fn refine(&self, stage: usize) -> Result<StackFamily> {
        if stage == 0 || stage > self.n_stages() {
            return Err(Error::Stage {
                stage,
                msg: format!("program has stages 1..={}", self.n_stages()),
            });
        }
        let mut cur = self.initial.clone();
        StackFamily::new(cur.clone(), 1)?; // validate declared family
        for (k, instr) in self.stages[..stage - 1].iter().enumerate() {
            cur = apply_stage(cur, instr).map_err(|e| Error::Stage {
                stage: k + 2,
                msg: e.to_string(),
            })?;
        }
        StackFamily::new(cur, stage)
    }

    /// Max stack width per stage — the program's declared `b_n` sequence.
    pub fn width_sequence(&self) -> Result<Vec<BigRational>> {
        (1..=self.n_stages()).map(|n| Ok(self.refine(n)?.max_width())).collect()
    }

    /// Stage-`n` approximation of the singularity set: all boundary points of
    /// top and bottom intervals of stages `1..=n`, deduplicated and sorted.
    pub fn singularity_points(&self, stage: usize) -> Result<Vec<BigRational>> {
        let mut pts = Vec::new();
        for k in 1..=stage.min(self.n_stages()) {
            pts.extend(self.refine(k)?.top_bottom_boundaries());
        }
        pts.sort();
        pts.dedup();
        Ok(pts)
    }
}

pub(crate) fn apply_stage(entry: Vec<Stack>, instr: &StageInstr) -> Result<Vec<Stack>> {
    let mut seen = vec![false; entry.len()];
    for c in &instr.cuts {
        if c.stack >= entry.len() {
            return Err(Error::BadFamily(format!("cut index {} out of range", c.stack)));
        }
        if std::mem::replace(&mut seen[c.stack], true) {
            return Err(Error::BadFamily(format!("stack {} cut twice", c.stack)));
        }
    }
    // Build the post-cut list.
    let mut post: Vec<Option<Stack>> = Vec::new();
    for (i, s) in entry.into_iter().enumerate() {
        match instr.cuts.iter().find(|c| c.stack == i) {
            Some(c) => post.extend(cut_stack(&s, &c.fractions)?.into_iter().map(Some)),
            None => post.push(Some(s)),
        }
    }
    // Apply stackings; `upper` slots become tombstones.
    for op in &instr.stacks {
        if op.lower >= post.len() || op.upper >= post.len() || op.lower == op.upper {
            return Err(Error::BadFamily(format!("bad stacking {} <- {}", op.lower, op.upper)));
        }
        let upper = post[op.upper]
            .take()
            .ok_or_else(|| Error::BadFamily(format!("slot {} already consumed", op.upper)))?;
        let lower = post[op.lower]
            .take()
            .ok_or_else(|| Error::BadFamily(format!("slot {} already consumed", op.lower)))?;
        post[op.lower] = Some(stack_onto(&lower, &upper)?);
    }
    Ok(post.into_iter().flatten().collect())
}

/* JSON wire form ***********************************************************/

#[derive(Serialize, Deserialize)]
struct ProgramWire {
    /// Initial stacks; each is either a single `[l, r]` interval (height-1
    /// stack) or a list of intervals (explicit column).
    initial: Vec<serde_json::Value>,
    stages: Vec<StageInstr>,
}

impl Serialize for CutStackProgram {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let initial = self
            .initial
            .iter()
            .map(|s| {
                let ivs: Vec<[String; 2]> = s
                    .intervals()
                    .iter()
                    .map(|iv| [fmt_ratio(iv.left()), fmt_ratio(iv.right())])
                    .collect();
                if ivs.len() == 1 {
                    serde_json::to_value(&ivs[0]).unwrap()
                } else {
                    serde_json::to_value(&ivs).unwrap()
                }
            })
            .collect();
        ProgramWire { initial, stages: self.stages.clone() }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CutStackProgram {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = ProgramWire::deserialize(de)?;
        let mut initial = Vec::with_capacity(wire.initial.len());
        for v in wire.initial {
            let ivs: Vec<[String; 2]> = match serde_json::from_value::<[String; 2]>(v.clone()) {
                Ok(single) => vec![single],
                Err(_) => serde_json::from_value(v).map_err(D::Error::custom)?,
            };
            let intervals = ivs
                .iter()
                .map(|[l, r]| {
                    let l = parse_ratio(l).map_err(|e| D::Error::custom(e.to_string()))?;
                    let r = parse_ratio(r).map_err(|e| D::Error::custom(e.to_string()))?;
                    IntervalQ::new(l, r).map_err(|e| D::Error::custom(e.to_string()))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            initial.push(Stack::new(intervals).map_err(|e| D::Error::custom(e.to_string()))?);
        }
        Ok(CutStackProgram { initial, stages: wire.stages })
    }
}

fn ser_ratios<S: Serializer>(v: &[BigRational], ser: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<String> = v.iter().map(fmt_ratio).collect();
    strs.serialize(ser)
}

fn de_ratios<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<BigRational>, D::Error> {
    let strs: Vec<String> = Vec::deserialize(de)?;
    strs.iter().map(|s| parse_ratio(s).map_err(|e| D::Error::custom(e.to_string()))).collect()
}
