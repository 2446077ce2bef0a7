//! Exhaustive enumeration of measurement records.
//!
//! Depth-first over the record tree, carrying π_d·F_{a_t}⋯F_{a_1}·p(ρ_d) for
//! every prior state d. For Model I with a prior diagonal in Z, records that
//! differ by a rotation about Z (or a reflection of the Y axis) have identical
//! joint likelihoods, so only one record per orbit is visited and weighted by
//! the orbit size. A symmetric ↑/↓ prior additionally allows flipping every Z
//! outcome together with swapping the two prior states.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::models::model1_outcomes;
use crate::trajectory::{Instrument, Prior};

/// Largest |O|^T accepted for exhaustive enumeration.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;

pub fn check_capacity(outcomes: usize, steps: usize) -> Result<()> {
    let total = (outcomes as u128).checked_pow(steps as u32);
    match total {
        Some(n) if n <= ENUMERATION_LIMIT => Ok(()),
        _ => Err(Error::Capacity { outcomes, steps }),
    }
}

// Model I outcome indices.
const XP: usize = 0;
const XM: usize = 1;
const YP: usize = 2;
const YM: usize = 3;
const ZP: usize = 4;
const ZM: usize = 5;

#[derive(Debug, Clone, Copy)]
struct Symmetry {
    /// Rotations about Z and the Y reflection.
    transverse: bool,
    /// Joint Z flip with swap of the two prior states.
    z_flip: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Seen {
    transverse: bool,
    y: bool,
    z: bool,
}

fn detect_symmetry(inst: &Instrument, prior: &Prior) -> Option<Symmetry> {
    if inst.kraus().labels() != model1_outcomes() {
        return None;
    }
    let z_diagonal = prior.states().iter().all(|s| s.px == 0.0 && s.py == 0.0);
    if !z_diagonal {
        return None;
    }
    let z_flip = prior.len() == 2
        && prior.prob(0) == prior.prob(1)
        && prior.state(0).p0 == prior.state(1).p0
        && prior.state(0).pz == -prior.state(1).pz;
    Some(Symmetry { transverse: true, z_flip })
}

/// Children of a node as (outcome, orbit multiplier, updated flags).
fn children(n: usize, sym: Option<Symmetry>, seen: Seen, out: &mut Vec<(usize, f64, Seen)>) {
    out.clear();
    let Some(sym) = sym else {
        out.extend((0..n).map(|a| (a, 1.0, seen)));
        return;
    };
    if !seen.transverse && sym.transverse {
        out.push((XP, 4.0, Seen { transverse: true, ..seen }));
    } else {
        out.push((XP, 1.0, seen));
        out.push((XM, 1.0, seen));
        if !seen.y {
            out.push((YP, 2.0, Seen { y: true, ..seen }));
        } else {
            out.push((YP, 1.0, seen));
            out.push((YM, 1.0, seen));
        }
    }
    if sym.z_flip && !seen.z {
        out.push((ZP, 2.0, Seen { z: true, ..seen }));
    } else {
        out.push((ZP, 1.0, seen));
        out.push((ZM, 1.0, seen));
    }
}

struct Walker<'a, F> {
    inst: &'a Instrument,
    t_max: usize,
    sym: Option<Symmetry>,
    visit: F,
    joint: Vec<f64>,
    scratch: Vec<Vec<(usize, f64, Seen)>>,
}

impl<F: FnMut(usize, f64, &[f64])> Walker<'_, F> {
    fn descend(&mut self, depth: usize, parent: &[[f64; 4]], weight: f64, seen: Seen, stack: &mut [Vec<[f64; 4]>]) {
        let mut kids = core::mem::take(&mut self.scratch[depth]);
        children(self.inst.outcome_count(), self.sym, seen, &mut kids);
        let (buf, rest) = stack.split_first_mut().expect("stack depth matches t_max");
        for &(y, mult, next) in &kids {
            let f = self.inst.shown_superop(y);
            let w = weight * mult;
            if depth + 1 == self.t_max {
                for (j, v) in self.joint.iter_mut().zip(parent) {
                    *j = f.trace_of(v);
                }
                (self.visit)(depth + 1, w, &self.joint);
            } else {
                for ((b, j), v) in buf.iter_mut().zip(self.joint.iter_mut()).zip(parent) {
                    *b = f.apply_array(v);
                    *j = b[0];
                }
                (self.visit)(depth + 1, w, &self.joint);
                self.descend(depth + 1, buf, w, next, rest);
            }
        }
        self.scratch[depth] = kids;
    }
}

/// Calls `visit(depth, weight, joint)` for the root and for every
/// (representative) record of length 1..=t_max, where `joint[d]` is
/// π_d·Pr[record | ρ_d]. `visit` must be invariant under swapping prior
/// states that the prior treats symmetrically.
pub(crate) fn for_each_record<F>(inst: &Instrument, prior: &Prior, t_max: usize, visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &[f64]),
{
    traverse(inst, prior, t_max, detect_symmetry(inst, prior), visit)
}

/// Same traversal without symmetry reduction.
#[cfg(test)]
pub(crate) fn for_each_record_plain<F>(inst: &Instrument, prior: &Prior, t_max: usize, visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &[f64]),
{
    traverse(inst, prior, t_max, None, visit)
}

fn traverse<F>(inst: &Instrument, prior: &Prior, t_max: usize, sym: Option<Symmetry>, mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &[f64]),
{
    check_capacity(inst.outcome_count(), t_max)?;
    let d = prior.len();
    let root: Vec<[f64; 4]> = prior
        .states()
        .iter()
        .zip(prior.probs())
        .map(|(s, p)| s.scale(*p).to_array())
        .collect();
    let root_joint: Vec<f64> = root.iter().map(|v| v[0]).collect();
    visit(0, 1.0, &root_joint);
    if t_max == 0 {
        return Ok(());
    }
    let mut stack = vec![vec![[0.0; 4]; d]; t_max];
    let mut walker = Walker {
        inst,
        t_max,
        sym,
        visit,
        joint: vec![0.0; d],
        scratch: vec![Vec::new(); t_max],
    };
    walker.descend(0, &root, 1.0, Seen::default(), &mut stack);
    Ok(())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
