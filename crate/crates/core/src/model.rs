//! Domain types: timed words, sentences, clips, segmentations, and the
//! breakpoint/interval operations that derive phrase structure from pauses.

use crate::error::{Error, Violation};
use crate::time::Micros;

/// A source-language word with its forced-alignment timestamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedWord {
    pub text: String,
    pub start: Micros,
    pub end: Micros,
}

impl TimedWord {
    pub fn new(text: impl Into<String>, start: Micros, end: Micros) -> TimedWord {
        TimedWord { text: text.into(), start, end }
    }
}

/// A half-open-in-spirit time interval; `end > begin` for phrase intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub begin: Micros,
    pub end: Micros,
}

impl Interval {
    pub fn new(begin: Micros, end: Micros) -> Interval {
        Interval { begin, end }
    }

    pub fn len(&self) -> Micros {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0
    }
}

/// Source sentence: `n` timed words plus `k` breakpoints (1-based word
/// indices, strictly increasing, last one equal to `n`). Every internal
/// breakpoint sits before a pause of at least `min_pause`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSentence {
    pub words: Vec<TimedWord>,
    pub breakpoints: Vec<usize>,
    pub min_pause: Micros,
}

impl SourceSentence {
    pub fn new(words: Vec<TimedWord>, breakpoints: Vec<usize>, min_pause: Micros) -> Result<SourceSentence, Error> {
        let s = SourceSentence { words, breakpoints, min_pause };
        if let Some(v) = s.check().into_iter().next() {
            return Err(Error::InvalidInput(v.to_string()));
        }
        Ok(s)
    }

    /// Builds a sentence by detecting breakpoints from pauses.
    pub fn from_words(words: Vec<TimedWord>, min_pause: Micros) -> Result<SourceSentence, Error> {
        let breakpoints = detect_breakpoints(&words, min_pause)?;
        SourceSentence::new(words, breakpoints, min_pause)
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Whole-sentence time span (first word start to last word end).
    pub fn span(&self) -> Interval {
        Interval::new(self.words[0].start, self.words[self.words.len() - 1].end)
    }

    fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.words.len();
        if n == 0 {
            out.push(Violation { sentence: None, rule: "empty-sentence", detail: "no words".into() });
            return out;
        }
        for (i, w) in self.words.iter().enumerate() {
            if w.text.is_empty() {
                out.push(Violation { sentence: None, rule: "empty-word", detail: format!("word {}", i + 1) });
            }
            if w.start < 0 || w.end < w.start {
                out.push(Violation {
                    sentence: None,
                    rule: "word-times",
                    detail: format!("word {} has start {} end {}", i + 1, w.start, w.end),
                });
            }
            if i > 0 && w.start < self.words[i - 1].end {
                out.push(Violation {
                    sentence: None,
                    rule: "word-overlap",
                    detail: format!("word {} starts before word {} ends", i + 1, i),
                });
            }
        }
        if self.breakpoints.is_empty() || *self.breakpoints.last().unwrap() != n {
            out.push(Violation {
                sentence: None,
                rule: "breakpoint-final",
                detail: format!("breakpoints must end at {}", n),
            });
        }
        for t in 0..self.breakpoints.len() {
            let b = self.breakpoints[t];
            if b < 1 || b > n || (t > 0 && b <= self.breakpoints[t - 1]) {
                out.push(Violation {
                    sentence: None,
                    rule: "breakpoint-order",
                    detail: format!("breakpoint {} out of order", b),
                });
            }
        }
        // Internal breakpoints must sit before a pause of at least min_pause.
        for &b in self.breakpoints.iter().take(self.breakpoints.len().saturating_sub(1)) {
            if b >= 1 && b < n {
                let pause = self.words[b].start - self.words[b - 1].end;
                if pause < self.min_pause {
                    out.push(Violation {
                        sentence: None,
                        rule: "breakpoint-pause",
                        detail: format!("pause after word {} is {}us < {}us", b, pause, self.min_pause),
                    });
                }
            }
        }
        out
    }
}

/// Target-language sentence: tokens, on/off-screen flag, language code.
/// Mixed-visibility sentences are flagged on-screen at ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSentence {
    pub words: Vec<String>,
    pub onscreen: bool,
    pub language: String,
}

impl TargetSentence {
    pub fn new(words: Vec<String>, onscreen: bool, language: impl Into<String>) -> TargetSentence {
        TargetSentence { words, onscreen, language: language.into() }
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePair {
    pub source: SourceSentence,
    pub target: TargetSentence,
    /// Reference target breakpoints when the sentence is annotated (tuning
    /// and segmentation-accuracy evaluation).
    pub reference: Option<Segmentation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub id: String,
    pub pairs: Vec<SentencePair>,
    pub source_language: String,
    pub target_language: String,
}

impl Clip {
    /// Media extent of the clip: span of its timed words. Off-screen runs are
    /// clamped to this.
    pub fn extent(&self) -> Interval {
        let begin = self.pairs.first().map(|p| p.source.span().begin).unwrap_or(0);
        let end = self.pairs.last().map(|p| p.source.span().end).unwrap_or(0);
        Interval::new(begin, end)
    }
}

/// Target-side breakpoints `j_1 < j_2 < ... < j_k = m` (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub breakpoints: Vec<usize>,
}

impl Segmentation {
    pub fn new(breakpoints: Vec<usize>, m: usize) -> Result<Segmentation, Error> {
        if breakpoints.is_empty() || *breakpoints.last().unwrap() != m {
            return Err(Error::InvalidInput(format!("segmentation must end at {}", m)));
        }
        for t in 0..breakpoints.len() {
            if breakpoints[t] < 1 || (t > 0 && breakpoints[t] <= breakpoints[t - 1]) {
                return Err(Error::InvalidInput("segmentation breakpoints must be strictly increasing".into()));
            }
        }
        Ok(Segmentation { breakpoints })
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Word-index range (0-based, half-open) of segment `t` (0-based).
    pub fn segment_range(&self, t: usize) -> std::ops::Range<usize> {
        let lo = if t == 0 { 0 } else { self.breakpoints[t - 1] };
        lo..self.breakpoints[t]
    }
}

/// Returns all 1-based word indices followed by a pause of at least
/// `min_pause` (inclusive comparison), plus the final index `n`.
pub fn detect_breakpoints(words: &[TimedWord], min_pause: Micros) -> Result<Vec<usize>, Error> {
    if words.is_empty() {
        return Err(Error::InvalidInput("cannot detect breakpoints in an empty word list".into()));
    }
    if min_pause <= 0 {
        return Err(Error::InvalidInput("min_pause must be positive".into()));
    }
    for i in 1..words.len() {
        if words[i].start < words[i - 1].end {
            return Err(Error::InvalidInput(format!("words {} and {} overlap", i, i + 1)));
        }
    }
    let n = words.len();
    let mut out = Vec::new();
    for i in 1..n {
        let pause = words[i].start - words[i - 1].end;
        if pause >= min_pause {
            out.push(i);
        }
    }
    out.push(n);
    Ok(out)
}

/// Phrase intervals of a source sentence: interval `t` runs from the start of
/// the first word after breakpoint `t-1` to the end of word `i_t`.
pub fn source_intervals(sentence: &SourceSentence) -> Vec<Interval> {
    let mut out = Vec::with_capacity(sentence.breakpoints.len());
    let mut prev = 0usize;
    for &b in &sentence.breakpoints {
        out.push(Interval::new(sentence.words[prev].start, sentence.words[b - 1].end));
        prev = b;
    }
    out
}

/// Collects every invariant violation in a clip. An empty report means the
/// clip is well-formed.
pub fn validate_clip(clip: &Clip) -> Vec<Violation> {
    let mut out = Vec::new();
    if clip.pairs.is_empty() {
        out.push(Violation { sentence: None, rule: "empty-clip", detail: "clip has no sentences".into() });
        return out;
    }
    for (i, pair) in clip.pairs.iter().enumerate() {
        for mut v in pair.source.check() {
            v.sentence = Some(i);
            out.push(v);
        }
        if pair.target.words.is_empty() {
            out.push(Violation { sentence: Some(i), rule: "empty-target", detail: "target has no words".into() });
        }
        if let Some(seg) = &pair.reference {
            let m = pair.target.word_count();
            if seg.breakpoints.last() != Some(&m) {
                out.push(Violation {
                    sentence: Some(i),
                    rule: "reference-breakpoints",
                    detail: format!("reference must end at {}", m),
                });
            }
        }
        if i > 0 {
            let prev_end = clip.pairs[i - 1].source.span().end;
            if pair.source.span().begin < prev_end {
                out.push(Violation {
                    sentence: Some(i),
                    rule: "sentence-order",
                    detail: "sentence starts before the previous one ends".into(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::ms_to_us;

    fn w(text: &str, start_ms: i64, end_ms: i64) -> TimedWord {
        TimedWord::new(text, ms_to_us(start_ms), ms_to_us(end_ms))
    }

    #[test]
    fn detect_breakpoints_thresholds_gaps() {
        // gaps after words 1,2,3: 100ms, 350ms, 50ms
        let words = vec![w("a", 0, 500), w("b", 600, 1000), w("c", 1350, 1800), w("d", 1850, 2200)];
        let bps = detect_breakpoints(&words, ms_to_us(300)).unwrap();
        assert_eq!(bps, vec![2, 4]);
    }

    #[test]
    fn detect_breakpoints_single_word() {
        let bps = detect_breakpoints(&[w("hi", 0, 300)], ms_to_us(300)).unwrap();
        assert_eq!(bps, vec![1]);
    }

    #[test]
    fn detect_breakpoints_inclusive_at_threshold() {
        // all gaps 290ms < 300ms: only the final index
        let words = vec![w("a", 0, 100), w("b", 390, 500), w("c", 790, 900)];
        assert_eq!(detect_breakpoints(&words, ms_to_us(300)).unwrap(), vec![3]);
        // exactly 300ms counts ("at least 300ms" reads inclusive)
        let words = vec![w("a", 0, 100), w("b", 400, 500)];
        assert_eq!(detect_breakpoints(&words, ms_to_us(300)).unwrap(), vec![1, 2]);
    }

    #[test]
    fn detect_breakpoints_empty_is_error() {
        assert!(detect_breakpoints(&[], ms_to_us(300)).is_err());
    }

    #[test]
    fn detect_breakpoints_monotone_in_min_pause() {
        let words = vec![w("a", 0, 100), w("b", 500, 600), w("c", 1300, 1400), w("d", 1500, 1600)];
        let mut prev: Option<Vec<usize>> = None;
        for pause_ms in [100, 300, 400, 700, 800] {
            let bps = detect_breakpoints(&words, ms_to_us(pause_ms)).unwrap();
            if let Some(p) = &prev {
                assert!(bps.iter().all(|b| p.contains(b)), "raising min_pause added a breakpoint");
            }
            prev = Some(bps);
        }
    }

    #[test]
    fn source_intervals_read_off_timestamps() {
        let words = vec![w("a", 0, 400), w("b", 500, 1000), w("c", 2450, 3000), w("d", 3050, 3600)];
        let s = SourceSentence::new(words, vec![2, 4], ms_to_us(300)).unwrap();
        let iv = source_intervals(&s);
        assert_eq!(iv.len(), 2);
        assert_eq!(iv[0], Interval::new(0, ms_to_us(1000)));
        assert_eq!(iv[1], Interval::new(ms_to_us(2450), ms_to_us(3600)));
        assert!(iv[0].end <= iv[1].begin);
    }

    #[test]
    fn source_intervals_k1_spans_sentence() {
        let s = SourceSentence::from_words(vec![w("a", 100, 400), w("b", 450, 900)], ms_to_us(300)).unwrap();
        let iv = source_intervals(&s);
        assert_eq!(iv, vec![Interval::new(ms_to_us(100), ms_to_us(900))]);
    }

    fn tiny_clip() -> Clip {
        let src = SourceSentence::from_words(vec![w("hello", 0, 400), w("world", 450, 900)], ms_to_us(300)).unwrap();
        let tgt = TargetSentence::new(vec!["hola".into(), "mundo".into()], true, "es");
        Clip {
            id: "c0".into(),
            pairs: vec![SentencePair { source: src, target: tgt, reference: None }],
            source_language: "en".into(),
            target_language: "es".into(),
        }
    }

    #[test]
    fn validate_clip_well_formed() {
        assert!(validate_clip(&tiny_clip()).is_empty());
    }

    #[test]
    fn validate_clip_flags_short_pause() {
        let mut clip = tiny_clip();
        // force an internal breakpoint over a 50ms pause
        clip.pairs[0].source.breakpoints = vec![1, 2];
        let report = validate_clip(&clip);
        assert!(report.iter().any(|v| v.rule == "breakpoint-pause"), "{report:?}");
    }

    #[test]
    fn validate_clip_flags_sentence_overlap() {
        let mut clip = tiny_clip();
        let mut second = clip.pairs[0].clone();
        second.source = SourceSentence::from_words(vec![w("x", 800, 850), w("y", 900, 1200)], ms_to_us(300)).unwrap();
        clip.pairs.push(second);
        let report = validate_clip(&clip);
        assert!(report.iter().any(|v| v.rule == "sentence-order"));
    }

    #[test]
    fn segmentation_counts_by_enumeration() {
        // exactly C(m-1, k-1) valid segmentations for (m, k)
        fn binom(n: usize, k: usize) -> usize {
            if k > n {
                return 0;
            }
            let mut r = 1usize;
            for i in 0..k {
                r = r * (n - i) / (i + 1);
            }
            r
        }
        fn count(m: usize, k: usize) -> usize {
            // enumerate strictly increasing sequences ending at m
            fn rec(next: usize, left: usize, m: usize) -> usize {
                if left == 0 {
                    return 1;
                }
                (next..=(m - left)).map(|j| rec(j + 1, left - 1, m)).sum()
            }
            if k == 0 || m < k {
                0
            } else {
                rec(1, k - 1, m)
            }
        }
        for m in 1..=10 {
            for k in 1..=m {
                assert_eq!(count(m, k), binom(m - 1, k - 1), "m={m} k={k}");
            }
        }
    }
}
