//! Seeded synthetic corpus generator. Clips mimic the shape of dubbing data:
//! four sentences per clip, two to three pause-separated source phrases per
//! sentence, and target sentences whose character count is a configurable
//! multiple of the source's (verbose targets stress the relaxation step).
//! All times are generated at millisecond granularity so corpora survive the
//! wire round trip exactly; identical configs give identical corpora.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::{Clip, Segmentation, SentencePair, SourceSentence, TargetSentence, TimedWord};
use crate::time::ms_to_us;

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub clips: usize,
    pub seed: u64,
    /// Probability that a sentence is off-screen.
    pub offscreen_ratio: f64,
    /// Target/source character-count ratio range.
    pub verbosity: (f64, f64),
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { clips: 10, seed: 0, offscreen_ratio: 0.5, verbosity: (1.1, 1.4) }
    }
}

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

fn word(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| LETTERS[rng.gen_range(0..LETTERS.len())] as char).collect()
}

/// Generates a validated corpus. Gaps inside a phrase stay below the 300 ms
/// pause threshold; gaps between phrases land in [300, 900] ms, between
/// sentences in [400, 1500] ms.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<Clip>, Error> {
    if !(0.0..=1.0).contains(&cfg.offscreen_ratio) {
        return Err(Error::InvalidInput("offscreen ratio must be in [0, 1]".into()));
    }
    if !(cfg.verbosity.0 > 0.0 && cfg.verbosity.0 <= cfg.verbosity.1) {
        return Err(Error::InvalidInput("verbosity range must be positive and ordered".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut clips = Vec::with_capacity(cfg.clips);
    for c in 0..cfg.clips {
        let mut pairs = Vec::with_capacity(4);
        let mut clock_ms: i64 = rng.gen_range(0..500);
        for _ in 0..4 {
            let (pair, end_ms) = sentence(&mut rng, cfg, clock_ms)?;
            clock_ms = end_ms + rng.gen_range(400..=1500);
            pairs.push(pair);
        }
        clips.push(Clip {
            id: format!("sim{c:04}"),
            pairs,
            source_language: "en".into(),
            target_language: "es".into(),
        });
    }
    Ok(clips)
}

fn sentence(rng: &mut ChaCha8Rng, cfg: &SimConfig, start_ms: i64) -> Result<(SentencePair, i64), Error> {
    let k = rng.gen_range(2..=3);
    let mut words = Vec::new();
    let mut seg_chars: Vec<u64> = Vec::with_capacity(k);
    let mut t_ms = start_ms;
    for seg in 0..k {
        let n_words = rng.gen_range(2..=4);
        let mut chars = 0u64;
        for i in 0..n_words {
            if !(seg == 0 && i == 0) {
                // within-phrase gap, strictly below the pause threshold
                t_ms += rng.gen_range(50..=250);
            }
            let len = rng.gen_range(3..=8);
            chars += len as u64;
            let dur_ms = (len as f64 * 80.0 * rng.gen_range(0.85..=1.25)).round() as i64;
            words.push(TimedWord::new(word(rng, len), ms_to_us(t_ms), ms_to_us(t_ms + dur_ms)));
            t_ms += dur_ms;
        }
        seg_chars.push(chars);
        if seg + 1 < k {
            t_ms += rng.gen_range(300..=900);
        }
    }
    let end_ms = t_ms;
    let source = SourceSentence::from_words(words, ms_to_us(300))?;
    if source.segment_count() != k {
        return Err(Error::InvalidInput("generated pause structure disagrees with plan".into()));
    }

    // target: verbose translation, segment character budgets proportional to
    // the source's, punctuation closing every non-final segment
    let verbosity = rng.gen_range(cfg.verbosity.0..=cfg.verbosity.1);
    let mut tgt_words: Vec<String> = Vec::new();
    let mut breakpoints = Vec::with_capacity(k);
    for (seg, &chars) in seg_chars.iter().enumerate() {
        let budget = ((chars as f64 * verbosity).round() as i64).max(3);
        let mut used = 0i64;
        while used < budget {
            let len = rng.gen_range(3..=8).min((budget - used).max(3)) as usize;
            tgt_words.push(word(rng, len));
            used += len as i64;
        }
        if seg + 1 < k {
            let last = tgt_words.last_mut().unwrap();
            last.push(if rng.gen_bool(0.5) { ',' } else { '.' });
        }
        breakpoints.push(tgt_words.len());
    }
    let reference = Some(Segmentation::new(breakpoints, tgt_words.len())?);
    let onscreen = !rng.gen_bool(cfg.offscreen_ratio);
    let pair = SentencePair {
        source,
        target: TargetSentence::new(tgt_words, onscreen, "es"),
        reference,
    };
    Ok((pair, end_ms))
}
