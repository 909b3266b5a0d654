//! Synthesis-duration oracle and speaking-rate computation.
//!
//! The engine never runs a real TTS voice; it only needs a deterministic,
//! additive `duration(text)` function. The default model charges a fixed
//! time per non-space character (configurable per language, with optional
//! per-token overrides), which makes segment durations sum exactly to the
//! sentence duration. Any replacement oracle must keep determinism and
//! additivity over token concatenation.

use std::collections::HashMap;

use crate::error::Error;
use crate::model::Interval;
use crate::time::Micros;

/// Default synthesis cost: 0.08 s per non-space character (~12.5 chars/s).
pub const DEFAULT_US_PER_CHAR: i64 = 80_000;

/// Pluggable duration oracle standing in for "TTS run at normal speed".
pub trait DurationOracle: Send + Sync {
    /// Synthesized duration of a token list in the given language.
    /// Deterministic, strictly increasing in non-space character count, and
    /// additive over concatenation of token lists.
    fn duration(&self, tokens: &[String], language: &str) -> Result<Micros, Error>;
}

/// Character-count duration model.
#[derive(Debug, Clone)]
pub struct CharDurationModel {
    pub default_us_per_char: i64,
    pub per_language: HashMap<String, i64>,
    /// Exact per-token durations taking precedence over the character rate.
    pub token_overrides: HashMap<String, i64>,
}

impl Default for CharDurationModel {
    fn default() -> Self {
        CharDurationModel {
            default_us_per_char: DEFAULT_US_PER_CHAR,
            per_language: HashMap::new(),
            token_overrides: HashMap::new(),
        }
    }
}

impl CharDurationModel {
    pub fn with_rate(us_per_char: i64) -> CharDurationModel {
        CharDurationModel { default_us_per_char: us_per_char, ..Default::default() }
    }

    fn rate_for(&self, language: &str) -> i64 {
        *self.per_language.get(language).unwrap_or(&self.default_us_per_char)
    }
}

/// Non-space characters of a token (the unit the duration model charges for).
pub fn non_space_chars(token: &str) -> u64 {
    token.chars().filter(|c| !c.is_whitespace()).count() as u64
}

impl DurationOracle for CharDurationModel {
    fn duration(&self, tokens: &[String], language: &str) -> Result<Micros, Error> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput("cannot synthesize an empty token list".into()));
        }
        let rate = self.rate_for(language);
        if rate <= 0 {
            return Err(Error::InvalidInput("duration rate must be positive".into()));
        }
        let mut total: i64 = 0;
        let mut chars: u64 = 0;
        for tok in tokens {
            match self.token_overrides.get(tok) {
                Some(&us) => {
                    total += us;
                    chars += 1;
                }
                None => {
                    let c = non_space_chars(tok);
                    chars += c;
                    total += c as i64 * rate;
                }
            }
        }
        if chars == 0 {
            return Err(Error::InvalidInput("token list has no non-space characters".into()));
        }
        Ok(total)
    }
}

/// Speaking rate: synthesized duration over allotted interval length.
/// `r > 1` means the speech must be compressed to fit.
pub fn speaking_rate(duration: Micros, interval: Interval) -> Result<f64, Error> {
    let len = interval.len();
    if len <= 0 {
        return Err(Error::DegenerateInterval);
    }
    Ok(duration as f64 / len as f64)
}

/// `r_e(t)`: source-side rate of a segment over its original interval.
pub fn source_rate(
    model: &dyn DurationOracle,
    segment_tokens: &[String],
    language: &str,
    interval: Interval,
) -> Result<f64, Error> {
    speaking_rate(model.duration(segment_tokens, language)?, interval)
}

/// `r_f(t)`: target-side rate of a segment over its (possibly relaxed)
/// interval.
pub fn target_rate(
    model: &dyn DurationOracle,
    segment_tokens: &[String],
    language: &str,
    relaxed_interval: Interval,
) -> Result<f64, Error> {
    speaking_rate(model.duration(segment_tokens, language)?, relaxed_interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::ms_to_us;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn duration_is_chars_times_rate() {
        let m = CharDurationModel::default();
        // 10 non-space chars at 0.08 s/char -> 0.80 s
        let d = m.duration(&toks(&["abcde", "fghij"]), "en").unwrap();
        assert_eq!(d, ms_to_us(800));
    }

    #[test]
    fn duration_empty_errors() {
        let m = CharDurationModel::default();
        assert!(m.duration(&[], "en").is_err());
        assert!(m.duration(&toks(&["", ""]), "en").is_err());
    }

    #[test]
    fn duration_additive_over_concatenation() {
        let m = CharDurationModel::default();
        let a = toks(&["uno", "dos"]);
        let b = toks(&["tres,", "cuatro."]);
        let mut ab = a.clone();
        ab.extend(b.clone());
        assert_eq!(
            m.duration(&ab, "es").unwrap(),
            m.duration(&a, "es").unwrap() + m.duration(&b, "es").unwrap()
        );
    }

    #[test]
    fn per_language_rate_and_overrides() {
        let mut m = CharDurationModel::default();
        m.per_language.insert("de".into(), 100_000);
        m.token_overrides.insert("uhh".into(), 500_000);
        assert_eq!(m.duration(&toks(&["ab"]), "de").unwrap(), 200_000);
        assert_eq!(m.duration(&toks(&["uhh"]), "de").unwrap(), 500_000);
    }

    #[test]
    fn rates_divide_duration_by_interval() {
        let iv = |a, b| Interval::new(ms_to_us(a), ms_to_us(b));
        assert_eq!(speaking_rate(ms_to_us(1200), iv(0, 1200)).unwrap(), 1.0);
        assert_eq!(speaking_rate(ms_to_us(1500), iv(0, 1000)).unwrap(), 1.5);
        assert_eq!(speaking_rate(ms_to_us(2000), iv(500, 1500)).unwrap(), 2.0);
        // halving the interval doubles the rate
        let r1 = speaking_rate(ms_to_us(900), iv(0, 1000)).unwrap();
        let r2 = speaking_rate(ms_to_us(900), iv(0, 500)).unwrap();
        assert_eq!(r2, 2.0 * r1);
        assert!(matches!(speaking_rate(100, iv(5, 5)), Err(Error::DegenerateInterval)));
    }

    #[test]
    fn rate_invariant_under_time_translation() {
        let d = ms_to_us(700);
        let a = speaking_rate(d, Interval::new(ms_to_us(100), ms_to_us(900))).unwrap();
        let b = speaking_rate(d, Interval::new(ms_to_us(5100), ms_to_us(5900))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rate_strictly_decreasing_in_interval_length() {
        let d = ms_to_us(1000);
        let mut prev = f64::INFINITY;
        for len_ms in [400, 800, 1000, 1300, 2600] {
            let r = speaking_rate(d, Interval::new(0, ms_to_us(len_ms))).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }
}
