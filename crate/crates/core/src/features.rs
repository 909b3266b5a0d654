//! The five feature functions of the log-linear alignment models and their
//! combiners: the four-feature segmentation transition (Step 1) and the
//! five-feature relaxation transition (Step 2, adding the isochrony score).
//!
//! The engine defaults below (punctuation heuristic, length-ratio proxy,
//! min/max rate ratios, exp-of-L1 isochrony) keep every score in (0, 1] so
//! logs stay finite and non-positive. Each is replaceable behind the scorer
//! plug-in contract in `external`.

use std::cell::Cell;

use crate::duration::{non_space_chars, DurationOracle};
use crate::error::Error;
use crate::model::{source_intervals, Interval, SentencePair};
use crate::score::LogScore;
use crate::time::Micros;

/// Floor applied to any score before taking logs, keeping DP totals finite.
pub const SCORE_FLOOR: f64 = 1e-6;

/// Log-linear weights `w1..w5`. `w1..w4` drive segmentation (Step 1) and are
/// tuned on the unit simplex; `w5` weights the isochrony score in Step 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
}

impl FeatureWeights {
    pub fn new(w1: f64, w2: f64, w3: f64, w4: f64, w5: f64) -> Result<FeatureWeights, Error> {
        let w = FeatureWeights { w1, w2, w3, w4, w5 };
        for (name, v) in [("w1", w1), ("w2", w2), ("w3", w3), ("w4", w4), ("w5", w5)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be a nonnegative finite number")));
            }
        }
        Ok(w)
    }

    /// Uniform Step-1 weights with a unit isochrony weight.
    pub fn uniform() -> FeatureWeights {
        FeatureWeights { w1: 0.25, w2: 0.25, w3: 0.25, w4: 0.25, w5: 1.0 }
    }
}

fn feat_log(score: f64) -> f64 {
    score.clamp(SCORE_FLOOR, 1.0).ln()
}

/// `s1`: language-model score of a target break after word `j` (1-based).
/// Sentence-final breaks are forced; otherwise a punctuation heuristic.
pub fn lm_break_score(target_words: &[String], j: usize) -> f64 {
    debug_assert!(j >= 1 && j <= target_words.len());
    if j == target_words.len() {
        return 1.0;
    }
    match target_words[j - 1].chars().last() {
        Some('.') | Some('!') | Some('?') | Some(';') | Some(':') => 0.9,
        Some(',') => 0.6,
        _ => 0.1,
    }
}

/// `s2`: cross-lingual semantic match proxy. Scores 1 when the segment-level
/// target/source character-length ratio equals the sentence-level ratio, and
/// decays as `exp(-|ln(seg_ratio / sent_ratio)|)`.
pub fn semantic_match_score(
    src_seg_chars: u64,
    tgt_seg_chars: u64,
    src_sent_chars: u64,
    tgt_sent_chars: u64,
) -> f64 {
    if src_seg_chars == 0 || tgt_seg_chars == 0 || src_sent_chars == 0 || tgt_sent_chars == 0 {
        return SCORE_FLOOR;
    }
    let x = (tgt_seg_chars as f64 * src_sent_chars as f64) / (src_seg_chars as f64 * tgt_sent_chars as f64);
    if x <= 1.0 {
        x
    } else {
        1.0 / x
    }
}

/// `s3`: speaking-rate variation across consecutive target segments,
/// `min/max` of the two rates. The first segment has no predecessor and
/// scores 1.
pub fn rate_variation_score(prev_rate: Option<f64>, rate: f64) -> f64 {
    match prev_rate {
        None => 1.0,
        Some(p) => rate_ratio(p, rate),
    }
}

/// `s4`: speaking-rate match across source and target segments.
pub fn rate_match_score(source_rate: f64, target_rate: f64) -> f64 {
    rate_ratio(source_rate, target_rate)
}

fn rate_ratio(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if a <= b {
        a / b
    } else {
        b / a
    }
}

/// `s5`: isochrony score `exp(-(|dl| + |dr|))` over relaxation fractions.
pub fn isochrony_score(delta_left: f64, delta_right: f64) -> f64 {
    (-(delta_left.abs() + delta_right.abs())).exp()
}

/// Precomputed per-sentence quantities shared by the segmentation and
/// relaxation scorers. Immutable apart from the transition-evaluation
/// counter, which exists so tests can assert the DP complexity ceiling.
pub struct SentenceContext<'a> {
    pub pair: &'a SentencePair,
    /// Source phrase intervals, one per segment.
    pub intervals: Vec<Interval>,
    pub src_seg_chars: Vec<u64>,
    pub src_sent_chars: u64,
    pub tgt_sent_chars: u64,
    /// Prefix sums over target words: `tgt_prefix_chars[j]` covers words `1..=j`.
    pub tgt_prefix_chars: Vec<u64>,
    pub tgt_prefix_dur: Vec<Micros>,
    /// `r_e(t)` per segment over the original interval.
    pub source_rates: Vec<f64>,
    /// Whole-sentence target rate: duration of all `m` words over the summed
    /// interval lengths. Used as the predecessor-rate proxy in Step 1, where
    /// the true previous-segment rate is outside the first-order DP state.
    pub sentence_target_rate: f64,
    pub min_pause: Micros,
    pub evals: Cell<u64>,
}

impl<'a> SentenceContext<'a> {
    pub fn new(
        pair: &'a SentencePair,
        oracle: &dyn DurationOracle,
        source_language: &str,
    ) -> Result<SentenceContext<'a>, Error> {
        let intervals = source_intervals(&pair.source);

        let mut src_seg_chars = Vec::with_capacity(intervals.len());
        let mut src_sent_chars = 0u64;
        let mut prev = 0usize;
        for &b in &pair.source.breakpoints {
            let chars: u64 = pair.source.words[prev..b].iter().map(|w| non_space_chars(&w.text)).sum();
            src_sent_chars += chars;
            src_seg_chars.push(chars);
            prev = b;
        }

        let m = pair.target.word_count();
        let mut tgt_prefix_chars = Vec::with_capacity(m + 1);
        let mut tgt_prefix_dur = Vec::with_capacity(m + 1);
        tgt_prefix_chars.push(0);
        tgt_prefix_dur.push(0);
        for w in &pair.target.words {
            let c = non_space_chars(w);
            tgt_prefix_chars.push(tgt_prefix_chars.last().unwrap() + c);
            let d = oracle.duration(std::slice::from_ref(w), &pair.target.language)?;
            tgt_prefix_dur.push(tgt_prefix_dur.last().unwrap() + d);
        }
        let tgt_sent_chars = *tgt_prefix_chars.last().unwrap();

        let mut source_rates = Vec::with_capacity(intervals.len());
        let mut total_interval: Micros = 0;
        let mut prev = 0usize;
        for (t, &b) in pair.source.breakpoints.iter().enumerate() {
            let tokens: Vec<String> = pair.source.words[prev..b].iter().map(|w| w.text.clone()).collect();
            let dur = oracle.duration(&tokens, source_language)?;
            source_rates.push(crate::duration::speaking_rate(dur, intervals[t])?);
            total_interval += intervals[t].len();
            prev = b;
        }
        if total_interval <= 0 {
            return Err(Error::DegenerateInterval);
        }
        let sentence_target_rate = *tgt_prefix_dur.last().unwrap() as f64 / total_interval as f64;

        Ok(SentenceContext {
            pair,
            intervals,
            src_seg_chars,
            src_sent_chars,
            tgt_sent_chars,
            tgt_prefix_chars,
            tgt_prefix_dur,
            source_rates,
            sentence_target_rate,
            min_pause: pair.source.min_pause,
            evals: Cell::new(0),
        })
    }

    pub fn segment_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn target_word_count(&self) -> usize {
        self.tgt_prefix_chars.len() - 1
    }

    /// Target segment synthesis duration for words `j_prev+1 ..= j`.
    pub fn target_span_duration(&self, j_prev: usize, j: usize) -> Micros {
        self.tgt_prefix_dur[j] - self.tgt_prefix_dur[j_prev]
    }

    pub fn target_span_chars(&self, j_prev: usize, j: usize) -> u64 {
        self.tgt_prefix_chars[j] - self.tgt_prefix_chars[j_prev]
    }
}

/// Step-1 transition log-score for placing breakpoint `j` after `j_prev` as
/// segment `t` (1-based), with `r_f` computed over the unrelaxed interval.
pub fn transition_score_step1(
    ctx: &SentenceContext<'_>,
    weights: &FeatureWeights,
    j_prev: usize,
    j: usize,
    t: usize,
) -> LogScore {
    debug_assert!(j_prev < j && t >= 1 && t <= ctx.segment_count());
    ctx.evals.set(ctx.evals.get() + 1);

    let s1 = lm_break_score(&ctx.pair.target.words, j);
    let s2 = semantic_match_score(
        ctx.src_seg_chars[t - 1],
        ctx.target_span_chars(j_prev, j),
        ctx.src_sent_chars,
        ctx.tgt_sent_chars,
    );
    let interval = ctx.intervals[t - 1];
    let target_rate = ctx.target_span_duration(j_prev, j) as f64 / interval.len() as f64;
    let s3 = if t == 1 {
        1.0
    } else {
        rate_variation_score(Some(ctx.sentence_target_rate), target_rate)
    };
    let s4 = rate_match_score(ctx.source_rates[t - 1], target_rate);

    let v = weights.w1 * feat_log(s1)
        + weights.w2 * feat_log(s2)
        + weights.w3 * feat_log(s3)
        + weights.w4 * feat_log(s4);
    LogScore::from_f64(v)
}

/// Step-2 transition log-score for one segment under relaxations
/// `(delta_left, delta_right)` (signed fractions of the minimum pause).
/// Breakpoints are fixed, so `s1` and `s2` are per-segment constants passed
/// in; `r_f` is computed by the caller over the relaxed interval.
#[allow(clippy::too_many_arguments)]
pub fn transition_score_step2(
    weights: &FeatureWeights,
    s1: f64,
    s2: f64,
    source_rate: f64,
    target_rate: f64,
    prev_target_rate: Option<f64>,
    delta_left: f64,
    delta_right: f64,
) -> LogScore {
    let s3 = rate_variation_score(prev_target_rate, target_rate);
    let s4 = rate_match_score(source_rate, target_rate);
    let s5 = isochrony_score(delta_left, delta_right);
    let v = weights.w1 * feat_log(s1)
        + weights.w2 * feat_log(s2)
        + weights.w3 * feat_log(s3)
        + weights.w4 * feat_log(s4)
        + weights.w5 * feat_log(s5);
    LogScore::from_f64(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lm_break_defaults() {
        let words = toks(&["hola,", "que", "tal.", "bien"]);
        assert_eq!(lm_break_score(&words, 4), 1.0); // forced sentence-final break
        assert_eq!(lm_break_score(&words, 3), 0.9);
        assert_eq!(lm_break_score(&words, 1), 0.6);
        assert_eq!(lm_break_score(&words, 2), 0.1);
        // punctuation break >= non-punctuation break
        assert!(lm_break_score(&words, 3) >= lm_break_score(&words, 2));
    }

    #[test]
    fn semantic_match_identity_and_double() {
        // segment ratio equals sentence ratio -> 1
        assert_eq!(semantic_match_score(10, 12, 50, 60), 1.0);
        // segment ratio double the sentence ratio -> 0.5
        let s = semantic_match_score(10, 20, 50, 50);
        assert!((s - 0.5).abs() < 1e-12);
        // symmetric in which side is longer
        assert_eq!(semantic_match_score(10, 20, 50, 50), semantic_match_score(20, 10, 50, 50));
    }

    #[test]
    fn rate_scores() {
        assert_eq!(rate_variation_score(Some(1.2), 1.2), 1.0);
        assert_eq!(rate_variation_score(Some(1.0), 2.0), 0.5);
        assert_eq!(rate_variation_score(Some(2.0), 1.0), 0.5);
        assert_eq!(rate_variation_score(None, 7.3), 1.0);
        assert_eq!(rate_match_score(1.0, 1.0), 1.0);
        assert!((rate_match_score(1.0, 1.5) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rate_match_score(1.0, 1.5), rate_match_score(1.5, 1.0));
        // scale invariance
        for c in [0.5, 2.0, 17.0] {
            assert!((rate_match_score(1.1 * c, 0.8 * c) - rate_match_score(1.1, 0.8)).abs() < 1e-12);
        }
    }

    #[test]
    fn isochrony_values() {
        assert_eq!(isochrony_score(0.0, 0.0), 1.0);
        assert!((isochrony_score(0.25, -0.25) - (-0.5f64).exp()).abs() < 1e-12);
        // depends only on |dl| + |dr|
        assert_eq!(isochrony_score(0.5, 0.25), isochrony_score(-0.75, 0.0));
    }

    #[test]
    fn step2_formula_reductions() {
        let w = FeatureWeights::new(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let s = transition_score_step2(&w, 1.0, 1.0, 1.0, 1.0, None, 0.5, 0.0);
        assert!((s.to_f64() + 0.5).abs() < 1e-8);
        // all features 1 -> 0
        let w = FeatureWeights::uniform();
        let s = transition_score_step2(&w, 1.0, 1.0, 1.0, 1.0, Some(1.0), 0.0, 0.0);
        assert_eq!(s, LogScore::ZERO);
    }

    #[test]
    fn weights_reject_negative() {
        assert!(FeatureWeights::new(0.5, 0.5, -0.1, 0.1, 0.0).is_err());
    }
}
