//! Evaluation metrics: speaking-rate smoothness and fluency, word error rate
//! through a (mock or external) transcriber, relative intelligibility,
//! translation length compliance, and segmentation accuracy.
//!
//! WER, smoothness, fluency, and F1 are all micro-averaged across the corpus:
//! one ratio of summed numerators over summed denominators, not a mean of
//! per-clip ratios.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duration::{non_space_chars, DurationOracle};
use crate::error::Error;
use crate::model::Clip;
use crate::pipeline::AlignmentResult;

/// Lowercases, strips non-alphanumeric characters, and splits on whitespace.
/// Words reduced to nothing by stripping are dropped.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|w| {
            let t: String = w.chars().filter(|c| c.is_alphanumeric()).flat_map(|c| c.to_lowercase()).collect();
            if t.is_empty() {
                None
            } else {
                Some(t)
            }
        })
        .collect()
}

/// Word-level Levenshtein distance.
pub fn edit_distance(reference: &[String], hypothesis: &[String]) -> usize {
    let (n, m) = (reference.len(), hypothesis.len());
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; m + 1];
    for i in 1..=n {
        cur[0] = i;
        for j in 1..=m {
            let sub = prev[j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Word error rate: edit distance over reference length.
pub fn wer(reference: &[String], hypothesis: &[String]) -> Result<f64, Error> {
    if reference.is_empty() {
        return Err(Error::UndefinedMetric("WER over an empty reference".into()));
    }
    Ok(edit_distance(reference, hypothesis) as f64 / reference.len() as f64)
}

/// Fraction of adjacent segment pairs whose rate ratio `min/max` is at least
/// `1 - sigma`. `rates` is the clip-wide segment rate sequence.
pub fn smooth_pairs(rates: &[f64], sigma: f64) -> (usize, usize) {
    let mut ok = 0;
    let total = rates.len().saturating_sub(1);
    for w in rates.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.min(b) / a.max(b) >= 1.0 - sigma {
            ok += 1;
        }
    }
    (ok, total)
}

pub fn smoothness(rates: &[f64], sigma: f64) -> Result<f64, Error> {
    let (ok, total) = smooth_pairs(rates, sigma);
    if total == 0 {
        return Err(Error::UndefinedMetric("smoothness needs at least two segments".into()));
    }
    Ok(ok as f64 / total as f64)
}

/// Fraction of segment rates inside the closed band `[lo, hi]`.
pub fn fluency(rates: &[f64], band: (f64, f64)) -> Result<f64, Error> {
    if rates.is_empty() {
        return Err(Error::UndefinedMetric("fluency needs at least one segment".into()));
    }
    let ok = rates.iter().filter(|&&r| r >= band.0 && r <= band.1).count();
    Ok(ok as f64 / rates.len() as f64)
}

/// Relative intelligibility: `(1 - WER_aligned) / (1 - WER_baseline)`.
pub fn intelligibility(wer_aligned: f64, wer_baseline: f64) -> Result<f64, Error> {
    if 1.0 - wer_baseline <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((1.0 - wer_aligned) / (1.0 - wer_baseline))
}

/// Integer-exact translation length compliance: target character count within
/// ±10% of the source count, i.e. `9·src ≤ 10·tgt ≤ 11·src`.
pub fn length_compliant(src_chars: u64, tgt_chars: u64) -> bool {
    9 * src_chars <= 10 * tgt_chars && 10 * tgt_chars <= 11 * src_chars
}

/// Micro-averaged F1 of predicted internal breakpoints against references.
/// Each item is `(hypothesis, reference)` breakpoint lists including the final
/// index; sentences whose reference has a single segment are excluded.
pub fn segmentation_f1(items: &[(Vec<usize>, Vec<usize>)]) -> Result<f64, Error> {
    let mut tp = 0usize;
    let mut hyp_total = 0usize;
    let mut ref_total = 0usize;
    let mut scored = false;
    for (hyp, reference) in items {
        if reference.len() < 2 {
            continue;
        }
        scored = true;
        let h = &hyp[..hyp.len() - 1];
        let r = &reference[..reference.len() - 1];
        hyp_total += h.len();
        ref_total += r.len();
        tp += h.iter().filter(|j| r.contains(j)).count();
    }
    if !scored {
        return Err(Error::UndefinedMetric("no multi-segment reference segmentations".into()));
    }
    if hyp_total == 0 && ref_total == 0 {
        return Ok(1.0);
    }
    let p = if hyp_total == 0 { 0.0 } else { tp as f64 / hyp_total as f64 };
    let r = if ref_total == 0 { 0.0 } else { tp as f64 / ref_total as f64 };
    if p + r == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * p * r / (p + r))
}

/// Produces a transcript of target words spoken at the given per-word rates.
pub trait Transcriber {
    fn transcribe(
        &self,
        clip_id: &str,
        sentence: usize,
        words: &[String],
        rates: &[f64],
    ) -> Result<Vec<String>, Error>;
}

/// Deterministic transcriber model: each word is corrupted independently with
/// probability `clamp((rate - 1.3) / 0.7, 0, 1)`. The uniform draw per word
/// depends only on `(seed, clip, sentence, word index)`, so raising a word's
/// rate can only corrupt it, never repair it.
pub struct MockTranscriber {
    pub seed: u64,
}

impl MockTranscriber {
    pub fn new(seed: u64) -> MockTranscriber {
        MockTranscriber { seed }
    }

    pub fn corruption_probability(rate: f64) -> f64 {
        ((rate - 1.3) / 0.7).clamp(0.0, 1.0)
    }

    fn word_draw(&self, clip_id: &str, sentence: usize, word: usize) -> f64 {
        // stable FNV-1a mix of the identifying tuple
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(&self.seed.to_le_bytes());
        eat(clip_id.as_bytes());
        eat(&(sentence as u64).to_le_bytes());
        eat(&(word as u64).to_le_bytes());
        ChaCha8Rng::seed_from_u64(h).gen::<f64>()
    }
}

impl Transcriber for MockTranscriber {
    fn transcribe(
        &self,
        clip_id: &str,
        sentence: usize,
        words: &[String],
        rates: &[f64],
    ) -> Result<Vec<String>, Error> {
        if words.len() != rates.len() {
            return Err(Error::InvalidInput("one rate per word required".into()));
        }
        Ok(words
            .iter()
            .zip(rates)
            .enumerate()
            .map(|(i, (w, &r))| {
                let p = MockTranscriber::corruption_probability(r);
                if self.word_draw(clip_id, sentence, i) < p {
                    format!("x{w}")
                } else {
                    w.clone()
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricParams {
    pub sigma: f64,
    pub band: (f64, f64),
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { sigma: 0.25, band: (0.8, 1.3) }
    }
}

/// Corpus-level evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub smoothness: f64,
    pub fluency: f64,
    pub wer: f64,
    pub wer_baseline: f64,
    pub intelligibility: f64,
    pub length_compliance: f64,
    /// `None` when the corpus carries no reference segmentations.
    pub segmentation_accuracy: Option<f64>,
    pub sentences: usize,
    pub segments: usize,
}

/// Evaluates alignments against their corpus. Rates are recomputed from the
/// relaxed intervals and the duration model; the baseline arm speaks each
/// whole target sentence over its source sentence span.
pub fn evaluate(
    clips: &[Clip],
    alignments: &[AlignmentResult],
    oracle: &dyn DurationOracle,
    transcriber: &dyn Transcriber,
    params: &MetricParams,
) -> Result<Report, Error> {
    let mut smooth_ok = 0usize;
    let mut smooth_total = 0usize;
    let mut fluent_ok = 0usize;
    let mut segments = 0usize;
    let mut edits = 0usize;
    let mut edits_baseline = 0usize;
    let mut ref_words = 0usize;
    let mut compliant = 0usize;
    let mut sentences = 0usize;
    let mut seg_items: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();

    for clip in clips {
        let mut clip_rates: Vec<f64> = Vec::new();
        for (i, pair) in clip.pairs.iter().enumerate() {
            let a = alignments
                .iter()
                .find(|a| a.clip_id == clip.id && a.sentence_index == i)
                .ok_or_else(|| {
                    Error::InvalidInput(format!("no alignment for clip '{}' sentence {}", clip.id, i))
                })?;
            sentences += 1;

            // per-segment and per-word rates under the alignment
            let mut word_rates: Vec<f64> = Vec::with_capacity(pair.target.word_count());
            let mut j_prev = 0usize;
            for (t, &j) in a.breakpoints.iter().enumerate() {
                let words = &pair.target.words[j_prev..j];
                let dur = oracle.duration(words, &pair.target.language)?;
                let len = a.segments[t].relaxed_interval.len();
                if len <= 0 {
                    return Err(Error::DegenerateInterval);
                }
                let rate = dur as f64 / len as f64;
                clip_rates.push(rate);
                word_rates.extend(std::iter::repeat_n(rate, words.len()));
                segments += 1;
                j_prev = j;
            }

            // aligned arm vs baseline arm (whole sentence over source span)
            let hyp = transcriber.transcribe(&clip.id, i, &pair.target.words, &word_rates)?;
            let span = pair.source.span();
            if span.len() <= 0 {
                return Err(Error::DegenerateInterval);
            }
            let base_rate = oracle.duration(&pair.target.words, &pair.target.language)? as f64
                / span.len() as f64;
            let base_rates = vec![base_rate; pair.target.word_count()];
            let hyp_base = transcriber.transcribe(&clip.id, i, &pair.target.words, &base_rates)?;

            let reference = normalize_tokens(&pair.target.words.join(" "));
            if reference.is_empty() {
                return Err(Error::UndefinedMetric(format!(
                    "clip '{}' sentence {} has an empty normalized reference",
                    clip.id, i
                )));
            }
            edits += edit_distance(&reference, &normalize_tokens(&hyp.join(" ")));
            edits_baseline += edit_distance(&reference, &normalize_tokens(&hyp_base.join(" ")));
            ref_words += reference.len();

            let src_chars: u64 = pair.source.words.iter().map(|w| non_space_chars(&w.text)).sum();
            let tgt_chars: u64 = pair.target.words.iter().map(|w| non_space_chars(w)).sum();
            if length_compliant(src_chars, tgt_chars) {
                compliant += 1;
            }

            if let Some(r) = &pair.reference {
                seg_items.push((a.breakpoints.clone(), r.breakpoints.clone()));
            }
        }
        let (ok, total) = smooth_pairs(&clip_rates, params.sigma);
        smooth_ok += ok;
        smooth_total += total;
        fluent_ok += clip_rates.iter().filter(|&&r| r >= params.band.0 && r <= params.band.1).count();
    }

    if sentences == 0 {
        return Err(Error::UndefinedMetric("empty corpus".into()));
    }
    if smooth_total == 0 {
        return Err(Error::UndefinedMetric("smoothness needs at least two segments per corpus".into()));
    }
    let wer_aligned = edits as f64 / ref_words as f64;
    let wer_baseline = edits_baseline as f64 / ref_words as f64;
    let segmentation_accuracy = if seg_items.is_empty() {
        None
    } else {
        Some(segmentation_f1(&seg_items)?)
    };

    Ok(Report {
        smoothness: smooth_ok as f64 / smooth_total as f64,
        fluency: fluent_ok as f64 / segments as f64,
        wer: wer_aligned,
        wer_baseline,
        intelligibility: intelligibility(wer_aligned, wer_baseline)?,
        length_compliance: compliant as f64 / sentences as f64,
        segmentation_accuracy,
        sentences,
        segments,
    })
}
