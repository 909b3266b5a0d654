//! Prosodic alignment engine for automatic dubbing.
//!
//! Given a source-language sentence with word-level timestamps and a
//! target-language translation, the engine segments the translation to match
//! the source phrase/pause structure (a dynamic program over target
//! breakpoints) and then relaxes segment time boundaries to improve speaking
//! rate control, either locally per sentence (isochrone dubbing) or globally
//! across runs of off-screen sentences (on/off dubbing). Automatic metrics
//! (smoothness, fluency, intelligibility, WER, length compliance) and a
//! two-step weight tuner round out the toolkit.

pub mod duration;
pub mod error;
pub mod external;
pub mod features;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod relax;
pub mod score;
pub mod segment;
pub mod simulate;
pub mod time;
pub mod tune;

pub use error::Error;
pub use model::{Clip, Interval, Segmentation, SentencePair, SourceSentence, TargetSentence, TimedWord};
pub use score::LogScore;
pub use time::Micros;
