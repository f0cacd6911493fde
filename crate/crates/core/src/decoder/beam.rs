//! One step of the CTC prefix beam recursion.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;
use hashbrown::HashMap;

use super::{BeamHypothesis, Decoder, Extension};
use crate::math::{log_add_exp, LN_10};

#[derive(Clone, Copy)]
enum Source {
    Stay(usize),
    Extend(usize, u32),
}

struct Candidate {
    source: Source,
    p_blank: f64,
    p_nonblank: f64,
    lm_score: f64,
    fused_score: f64,
    /// Parent that contributed a new-token extension into this prefix.
    parent: Option<usize>,
}

/// Min-heap of the best `capacity` scores seen so far.
struct Threshold {
    capacity: usize,
    heap: BinaryHeap<Reverse<OrdF64>>,
}

struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Threshold {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            heap: BinaryHeap::new(),
        }
    }

    /// Score a candidate must reach to possibly enter the beam.
    fn bar(&self) -> f64 {
        if self.heap.len() < self.capacity {
            f64::NEG_INFINITY
        } else {
            self.heap.peek().map_or(f64::NEG_INFINITY, |r| r.0 .0)
        }
    }

    fn offer(&mut self, score: f64) {
        if self.capacity == usize::MAX {
            return;
        }
        if self.heap.len() < self.capacity {
            self.heap.push(Reverse(OrdF64(score)));
        } else if score > self.bar() {
            self.heap.pop();
            self.heap.push(Reverse(OrdF64(score)));
        }
    }
}

impl Decoder<'_> {
    /// Advances every hypothesis by one frame and keeps the best
    /// `beam_size` prefixes.
    ///
    /// Blank keeps the prefix and moves its mass to `p_blank`; repeating the
    /// last token keeps the prefix via `p_nonblank`; any other token (or a
    /// repeat after a blank) extends the prefix and adds its LM increment.
    /// Extensions whose score bound cannot reach the current beam are never
    /// materialized, so the result equals exhaustive scoring followed by
    /// truncation.
    pub fn ctc_step(&self, hyps: &[BeamHypothesis], frame: &[f64]) -> Vec<BeamHypothesis> {
        let blank = self.vocab.blank_index();
        let weight = self.config.alpha * LN_10;
        let beta = self.config.beta;
        let beam_size = self.config.beam_size;

        // (parent, token) extensions that land on a prefix already in the beam
        let positions: HashMap<&[u32], usize> = hyps
            .iter()
            .enumerate()
            .map(|(i, h)| (h.prefix.as_slice(), i))
            .collect();
        let mut collisions: HashMap<(usize, u32), usize> = HashMap::new();
        for (j, h) in hyps.iter().enumerate() {
            if let Some((&last, parent)) = h.prefix.split_last() {
                if let Some(&i) = positions.get(parent) {
                    collisions.insert((i, last), j);
                }
            }
        }

        let mut candidates: Vec<Candidate> = Vec::with_capacity(hyps.len() * 2);
        for (j, h) in hyps.iter().enumerate() {
            let total = h.acoustic_score();
            let p_blank = total + frame[blank];
            let p_nonblank = match h.prefix.last() {
                Some(&last) => h.p_nonblank + frame[last as usize],
                None => f64::NEG_INFINITY,
            };
            candidates.push(Candidate {
                source: Source::Stay(j),
                p_blank,
                p_nonblank,
                lm_score: h.lm_score,
                fused_score: 0.0,
                parent: None,
            });
        }
        for (&(i, token), &j) in &collisions {
            let parent = &hyps[i];
            let base = self.extension_base(parent, token);
            let c = &mut candidates[j];
            c.p_nonblank = log_add_exp(c.p_nonblank, base + frame[token as usize]);
            c.parent = Some(i);
        }
        let mut threshold = Threshold::new(beam_size);
        candidates.retain_mut(|c| {
            let acoustic = log_add_exp(c.p_blank, c.p_nonblank);
            if acoustic == f64::NEG_INFINITY {
                return false;
            }
            let Source::Stay(j) = c.source else {
                unreachable!()
            };
            c.fused_score = acoustic + weight * c.lm_score + beta * hyps[j].prefix.len() as f64;
            threshold.offer(c.fused_score);
            true
        });

        let mut order: Vec<u32> = (0..frame.len() as u32)
            .filter(|&t| t as usize != blank && frame[t as usize] > f64::NEG_INFINITY)
            .collect();
        order.sort_by(|&a, &b| {
            frame[b as usize]
                .total_cmp(&frame[a as usize])
                .then(a.cmp(&b))
        });
        let max_gain = weight * self.lm.max_increment();

        for (i, parent) in hyps.iter().enumerate() {
            let total = parent.acoustic_score();
            if total == f64::NEG_INFINITY {
                continue;
            }
            let length_bonus = beta * (parent.prefix.len() + 1) as f64;
            let lm_base = weight * parent.lm_score;
            for &token in &order {
                let emitted = frame[token as usize];
                let bound = total + emitted + lm_base + max_gain + length_bonus;
                if bound < threshold.bar() {
                    break;
                }
                if collisions.contains_key(&(i, token)) {
                    continue;
                }
                let acoustic = self.extension_base(parent, token) + emitted;
                if acoustic == f64::NEG_INFINITY {
                    continue;
                }
                let lm_score = parent.lm_score
                    + self
                        .lm
                        .increment_ids(&parent.lm_context, self.lm_ids[token as usize]);
                let fused_score = acoustic + weight * lm_score + length_bonus;
                if fused_score < threshold.bar() {
                    continue;
                }
                threshold.offer(fused_score);
                candidates.push(Candidate {
                    source: Source::Extend(i, token),
                    p_blank: f64::NEG_INFINITY,
                    p_nonblank: acoustic,
                    lm_score,
                    fused_score,
                    parent: Some(i),
                });
            }
        }

        let bar = threshold.bar();
        candidates.retain(|c| c.fused_score >= bar);
        let mut out: Vec<BeamHypothesis> = candidates
            .into_iter()
            .map(|c| self.materialize(hyps, c))
            .collect();
        self.prune(&mut out);
        out
    }

    /// Log-mass a parent contributes before emitting `token` as a new
    /// output symbol: a repeat needs an intervening blank.
    fn extension_base(&self, parent: &BeamHypothesis, token: u32) -> f64 {
        if parent.prefix.last() == Some(&token) {
            parent.p_blank
        } else {
            parent.acoustic_score()
        }
    }

    fn materialize(&self, hyps: &[BeamHypothesis], c: Candidate) -> BeamHypothesis {
        let extension = c.parent.map(|i| {
            let p = &hyps[i];
            let token = match c.source {
                Source::Extend(_, t) => t,
                Source::Stay(j) => *hyps[j].prefix.last().unwrap_or(&0),
            };
            Extension {
                token,
                parent_p_blank: p.p_blank,
                parent_p_nonblank: p.p_nonblank,
                parent_lm_score: p.lm_score,
                parent_lm_context: p.lm_context.clone(),
            }
        });
        match c.source {
            Source::Stay(j) => {
                let h = &hyps[j];
                BeamHypothesis {
                    prefix: h.prefix.clone(),
                    p_blank: c.p_blank,
                    p_nonblank: c.p_nonblank,
                    lm_score: c.lm_score,
                    fused_score: c.fused_score,
                    lm_context: h.lm_context.clone(),
                    extension,
                    injected: h.injected.clone(),
                }
            }
            Source::Extend(i, token) => {
                let p = &hyps[i];
                let mut prefix = Vec::with_capacity(p.prefix.len() + 1);
                prefix.extend_from_slice(&p.prefix);
                prefix.push(token);
                let mut lm_context = p.lm_context.clone();
                self.lm
                    .advance_context(&mut lm_context, self.lm_ids[token as usize]);
                BeamHypothesis {
                    prefix,
                    p_blank: c.p_blank,
                    p_nonblank: c.p_nonblank,
                    lm_score: c.lm_score,
                    fused_score: c.fused_score,
                    lm_context,
                    extension,
                    injected: p.injected.clone(),
                }
            }
        }
    }
}
