//! Time is integer microseconds everywhere inside the engine.
//!
//! The wire formats carry integer milliseconds; quarter-fractions of any
//! millisecond quantity are exact in microseconds, so grid relaxations,
//! lattice quanta and character-based synthesis durations never round.

/// Microseconds since clip start (or a duration in microseconds).
pub type Micros = i64;

pub const US_PER_MS: i64 = 1_000;

pub fn ms_to_us(ms: i64) -> Micros {
    ms * US_PER_MS
}

/// Microseconds to milliseconds, round-half-even.
pub fn us_to_ms_half_even(us: Micros) -> i64 {
    debug_assert!(us >= 0);
    let q = us / US_PER_MS;
    let r = us % US_PER_MS;
    if r > 500 || (r == 500 && q % 2 != 0) {
        q + 1
    } else {
        q
    }
}

pub fn us_to_secs(us: Micros) -> f64 {
    us as f64 / 1_000_000.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_even_rounding() {
        assert_eq!(us_to_ms_half_even(1_499), 1);
        assert_eq!(us_to_ms_half_even(1_500), 2);
        assert_eq!(us_to_ms_half_even(2_500), 2);
        assert_eq!(us_to_ms_half_even(3_500), 4);
        assert_eq!(us_to_ms_half_even(1_501), 2);
        assert_eq!(us_to_ms_half_even(0), 0);
    }
}
