//! Step 1: find target breakpoints maximizing the Markovian log-linear model
//! by dynamic programming, plus an exhaustive oracle used by the test suite.
//!
//! Both searches share the transition scorer and the tie-break
//! (lexicographically smallest breakpoint sequence among exact score ties),
//! so they must agree bit-for-bit on every instance within oracle bounds.

use crate::duration::DurationOracle;
use crate::error::Error;
use crate::features::{transition_score_step1, FeatureWeights, SentenceContext};
use crate::model::{Segmentation, SentencePair};
use crate::score::LogScore;

/// Hard cap on the oracle's enumeration size.
pub const ORACLE_LIMIT: u128 = 1_000_000;

/// Segments a sentence pair: returns breakpoints `j` with `j_k = m`
/// maximizing the summed Step-1 transition scores.
pub fn segment(
    pair: &SentencePair,
    weights: &FeatureWeights,
    oracle: &dyn DurationOracle,
) -> Result<Segmentation, Error> {
    let ctx = SentenceContext::new(pair, oracle, "")?;
    Ok(segment_with_ctx(&ctx, weights)?.0)
}

/// DP segmentation over a prebuilt context; also returns the model score.
pub fn segment_with_ctx(
    ctx: &SentenceContext<'_>,
    weights: &FeatureWeights,
) -> Result<(Segmentation, LogScore), Error> {
    let k = ctx.segment_count();
    let m = ctx.target_word_count();
    if m < k {
        return Err(Error::InfeasibleSegmentation { words: m, segments: k, sentence: None });
    }

    // Suffix values: v[t][j] = best score of segments t+2..k given that
    // segment t+1 (1-based) ends at word j. Feasible j for segment t (1-based)
    // lie in [t, m - (k - t)].
    let mut v = vec![vec![LogScore::NEG_INF; m + 1]; k];
    // the last segment must end exactly at m; any earlier end is a dead state
    v[k - 1][m] = LogScore::ZERO;
    for t in (1..k).rev() {
        // transitions from segment t ending at j to segment t+1 ending at j2
        for j in feasible_range(t, k, m) {
            let mut best = LogScore::NEG_INF;
            for j2 in feasible_range(t + 1, k, m) {
                if j2 <= j {
                    continue;
                }
                let cand = transition_score_step1(ctx, weights, j, j2, t + 1) + v[t][j2];
                if cand > best {
                    best = cand;
                }
            }
            v[t - 1][j] = best;
        }
    }

    // Greedy front reconstruction: picking the smallest j at each step among
    // score-optimal continuations yields the lexicographically smallest
    // breakpoint sequence.
    let mut breakpoints = Vec::with_capacity(k);
    let mut total = LogScore::ZERO;
    let mut j_prev = 0usize;
    for t in 1..=k {
        let mut best: Option<(usize, LogScore, LogScore)> = None;
        for j in feasible_range(t, k, m) {
            if j <= j_prev {
                continue;
            }
            let edge = transition_score_step1(ctx, weights, j_prev, j, t);
            let cand = edge + v[t - 1][j];
            match best {
                Some((_, b, _)) if cand <= b => {}
                _ => best = Some((j, cand, edge)),
            }
        }
        let (j, _, edge) = best.expect("feasible split exists when m >= k");
        total += edge;
        breakpoints.push(j);
        j_prev = j;
    }

    Ok((Segmentation { breakpoints }, total))
}

fn feasible_range(t: usize, k: usize, m: usize) -> std::ops::RangeInclusive<usize> {
    t..=(m - (k - t))
}

/// Exhaustive argmax over all `C(m-1, k-1)` segmentations, same scorer and
/// tie-break as [`segment_with_ctx`]. Test oracle only.
pub fn brute_force_segment(
    ctx: &SentenceContext<'_>,
    weights: &FeatureWeights,
) -> Result<(Segmentation, LogScore), Error> {
    let k = ctx.segment_count();
    let m = ctx.target_word_count();
    if m < k {
        return Err(Error::InfeasibleSegmentation { words: m, segments: k, sentence: None });
    }
    let size = binomial(m as u128 - 1, k as u128 - 1);
    if size > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { size, limit: ORACLE_LIMIT });
    }

    let mut best: Option<(Vec<usize>, LogScore)> = None;
    let mut prefix = Vec::with_capacity(k);
    // enumerate internal breakpoints lexicographically ascending; strict
    // improvement keeps the first (lexicographically smallest) optimum
    enumerate(ctx, weights, k, m, 0, LogScore::ZERO, &mut prefix, &mut best);
    let (breakpoints, score) = best.expect("at least one segmentation exists");
    Ok((Segmentation { breakpoints }, score))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    ctx: &SentenceContext<'_>,
    weights: &FeatureWeights,
    k: usize,
    m: usize,
    t: usize,
    acc: LogScore,
    prefix: &mut Vec<usize>,
    best: &mut Option<(Vec<usize>, LogScore)>,
) {
    if t == k {
        if best.as_ref().map(|(_, b)| acc > *b).unwrap_or(true) {
            *best = Some((prefix.clone(), acc));
        }
        return;
    }
    let j_prev = if t == 0 { 0 } else { prefix[t - 1] };
    for j in (j_prev + 1)..=(m - (k - t - 1)) {
        if t + 1 == k && j != m {
            continue;
        }
        let edge = transition_score_step1(ctx, weights, j_prev, j, t + 1);
        prefix.push(j);
        enumerate(ctx, weights, k, m, t + 1, acc + edge, prefix, best);
        prefix.pop();
    }
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}
