//! Homophone extension: re-estimated probabilities and sibling injection.

use alloc::vec::Vec;
use hashbrown::HashMap;

use super::{BeamHypothesis, DecodeError, Decoder, HeInjection};
use crate::math::log_add_exp;

/// Probability assigned to a homophone `h` injected in place of the emitted
/// character `c`:
///
/// `max(a_p, (1 - gamma) * a_p + gamma * q * max(0, 1 - log10 n))`
///
/// where `a_p` is the acoustic probability of `c`, `q` that of `h` at the same
/// frame, and `n` the number of pronunciations of `h`. The result is never
/// below `a_p`.
pub fn homophone_adjusted_prob(a_p: f64, q: f64, n: u32, gamma: f64) -> Result<f64, DecodeError> {
    if !(0.0..=1.0).contains(&a_p) || !(0.0..=1.0).contains(&q) {
        return Err(DecodeError::InvalidProbability);
    }
    if n == 0 {
        return Err(DecodeError::InvalidPronCount);
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(DecodeError::InvalidConfig("gamma must lie in [0, 1]"));
    }
    let discount = (1.0 - libm::log10(n as f64)).max(0.0);
    let mixed = (1.0 - gamma) * a_p + gamma * q * discount;
    Ok(a_p.max(mixed))
}

impl Decoder<'_> {
    /// Adds homophone siblings for every hypothesis whose prefix was extended
    /// during this step, then prunes originals and siblings together to the
    /// beam size. `hyps` is the output of [`ctc_step`](Self::ctc_step) for the
    /// same `frame`.
    pub fn extend_homophones(
        &self,
        hyps: Vec<BeamHypothesis>,
        frame: &[f64],
        step: usize,
        audit: &mut Vec<HeInjection>,
    ) -> Vec<BeamHypothesis> {
        if !self.config.he_enabled {
            return hyps;
        }
        let organic = hyps.len();
        let mut all = hyps;
        let mut by_prefix: HashMap<Vec<u32>, usize> = all
            .iter()
            .enumerate()
            .map(|(i, h)| (h.prefix.clone(), i))
            .collect();

        for k in 0..organic {
            let Some(ext) = all[k].extension.clone() else {
                continue;
            };
            let source = ext.token as usize;
            let homophones = &self.homophones[source];
            if homophones.is_empty() {
                continue;
            }
            let a_p = libm::exp(frame[source]).min(1.0);
            let parent_len = all[k].prefix.len() - 1;
            let parent_last = parent_len.checked_sub(1).map(|i| all[k].prefix[i]);
            for &(h, pron) in homophones {
                let q = libm::exp(frame[h as usize]).min(1.0);
                let p = match homophone_adjusted_prob(a_p, q, pron, self.config.gamma) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                audit.push(HeInjection {
                    step,
                    source: self.vocab.char_of(source).unwrap_or('\u{fffd}'),
                    injected: self.vocab.char_of(h as usize).unwrap_or('\u{fffd}'),
                    prob: p,
                });
                let base = if parent_last == Some(h) {
                    ext.parent_p_blank
                } else {
                    log_add_exp(ext.parent_p_blank, ext.parent_p_nonblank)
                };
                let p_nonblank = base + libm::log(p);
                if p_nonblank == f64::NEG_INFINITY {
                    continue;
                }
                let mut prefix = Vec::with_capacity(parent_len + 1);
                prefix.extend_from_slice(&all[k].prefix[..parent_len]);
                prefix.push(h);

                if let Some(&existing) = by_prefix.get(&prefix) {
                    let hyp = &mut all[existing];
                    if p_nonblank > hyp.p_nonblank {
                        hyp.p_nonblank = p_nonblank;
                        hyp.fused_score =
                            self.fuse(hyp.p_blank, hyp.p_nonblank, hyp.lm_score, hyp.prefix.len());
                    }
                    continue;
                }

                let lm_id = self.lm_ids[h as usize];
                let lm_score =
                    ext.parent_lm_score + self.lm.increment_ids(&ext.parent_lm_context, lm_id);
                let mut lm_context = ext.parent_lm_context.clone();
                self.lm.advance_context(&mut lm_context, lm_id);
                let mut injected = all[k].injected.clone();
                injected.retain(|&pos| pos < parent_len);
                injected.push(parent_len);
                let fused_score = self.fuse(f64::NEG_INFINITY, p_nonblank, lm_score, prefix.len());
                by_prefix.insert(prefix.clone(), all.len());
                all.push(BeamHypothesis {
                    prefix,
                    p_blank: f64::NEG_INFINITY,
                    p_nonblank,
                    lm_score,
                    fused_score,
                    lm_context,
                    extension: None,
                    injected,
                });
            }
        }
        self.prune(&mut all);
        all
    }
}
