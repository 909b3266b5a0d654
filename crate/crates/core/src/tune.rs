//! Weight tuning by exhaustive sweep.
//!
//! Step 1 weights live on the unit simplex and are swept on a lattice
//! (`grid_step` = 0.1 gives 286 candidates), scored by segmentation F1
//! against the corpus's reference breakpoints. Step 2 sweeps a fixed list of
//! isochrony weights and scores each by the mean per-clip rate smoothness of
//! the resulting alignments. Both sweeps are deterministic; ties go to the
//! lexicographically largest weight vector (step 1) and the largest isochrony
//! weight (step 2), so repeated runs agree byte for byte.

use crate::duration::DurationOracle;
use crate::error::Error;
use crate::features::{FeatureWeights, SentenceContext};
use crate::metrics::{segmentation_f1, smooth_pairs};
use crate::model::Clip;
use crate::pipeline::{dub_isochrone, Mode, PipelineConfig};
use crate::segment::segment_with_ctx;

/// Isochrony weight candidates for the Step-2 sweep, ascending.
pub const W5_CANDIDATES: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Sweeps `(w1..w4)` over the unit simplex lattice with the given step,
/// maximizing segmentation F1 on the annotated sentences. `w5` is carried
/// through unchanged.
pub fn tune_step1(
    clips: &[Clip],
    oracle: &dyn DurationOracle,
    grid_step: f64,
    w5: f64,
) -> Result<(FeatureWeights, f64), Error> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidInput("grid step must be in (0, 1]".into()));
    }
    let n = (1.0 / grid_step).round() as u32;
    if n == 0 {
        return Err(Error::InvalidInput("grid step too large".into()));
    }

    // contexts for annotated sentences only
    let mut items = Vec::new();
    for clip in clips {
        for pair in &clip.pairs {
            if let Some(r) = &pair.reference {
                if r.segment_count() < 2 {
                    continue;
                }
                let ctx = SentenceContext::new(pair, oracle, &clip.source_language)?;
                items.push((ctx, r.breakpoints.clone()));
            }
        }
    }
    if items.is_empty() {
        return Err(Error::UndefinedMetric("no annotated multi-segment sentences to tune on".into()));
    }

    let mut best: Option<(FeatureWeights, f64)> = None;
    // ascending lexicographic enumeration + non-strict improvement keeps the
    // lexicographically largest optimum
    for a in 0..=n {
        for b in 0..=(n - a) {
            for c in 0..=(n - a - b) {
                let d = n - a - b - c;
                let w = FeatureWeights::new(
                    a as f64 / n as f64,
                    b as f64 / n as f64,
                    c as f64 / n as f64,
                    d as f64 / n as f64,
                    w5,
                )?;
                let mut pairs = Vec::with_capacity(items.len());
                for (ctx, reference) in &items {
                    let (seg, _) = segment_with_ctx(ctx, &w)?;
                    pairs.push((seg.breakpoints, reference.clone()));
                }
                let f1 = segmentation_f1(&pairs)?;
                if best.as_ref().map(|(_, b)| f1 >= *b).unwrap_or(true) {
                    best = Some((w, f1));
                }
            }
        }
    }
    Ok(best.expect("simplex lattice is nonempty"))
}

/// Sweeps the isochrony weight over [`W5_CANDIDATES`], maximizing the mean
/// per-clip smoothness of isochrone alignments at the given sigma.
pub fn tune_step2(
    clips: &[Clip],
    oracle: &dyn DurationOracle,
    base: &FeatureWeights,
    sigma: f64,
) -> Result<(f64, f64), Error> {
    let mut best: Option<(f64, f64)> = None;
    for &w5 in &W5_CANDIDATES {
        let cfg = PipelineConfig {
            mode: Mode::Iso,
            weights: FeatureWeights::new(base.w1, base.w2, base.w3, base.w4, w5)?,
            ..PipelineConfig::default()
        };
        let mut sum = 0.0;
        let mut clips_scored = 0usize;
        for clip in clips {
            let results = dub_isochrone(clip, &cfg, oracle)?;
            let rates: Vec<f64> = results
                .iter()
                .flat_map(|r| r.segments.iter().map(|s| s.target_rate))
                .collect();
            let (ok, total) = smooth_pairs(&rates, sigma);
            if total > 0 {
                sum += ok as f64 / total as f64;
                clips_scored += 1;
            }
        }
        if clips_scored == 0 {
            return Err(Error::UndefinedMetric("no clip has two or more segments".into()));
        }
        let mean = sum / clips_scored as f64;
        // ascending candidates + non-strict improvement keeps the largest w5
        if best.as_ref().map(|(_, b)| mean >= *b).unwrap_or(true) {
            best = Some((w5, mean));
        }
    }
    Ok(best.expect("candidate list is nonempty"))
}
