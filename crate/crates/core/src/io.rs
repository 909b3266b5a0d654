//! Wire formats: JSONL corpus (one clip per line), JSONL alignments (header
//! record + one record per sentence), and the flat weights file.
//!
//! All times are integer milliseconds on the wire and microseconds in memory;
//! the µs→ms direction rounds half-even. Serialization is deterministic:
//! fixed field order, no maps, so identical inputs give identical bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::features::FeatureWeights;
use crate::metrics::MetricParams;
use crate::model::{validate_clip, Clip, Interval, Segmentation, SentencePair, SourceSentence, TargetSentence, TimedWord};
use crate::pipeline::{AlignmentResult, Mode, SegmentResult};
use crate::time::{ms_to_us, us_to_ms_half_even, Micros};

#[derive(Debug, Serialize, Deserialize)]
struct WireWord {
    w: String,
    start_ms: i64,
    end_ms: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireSentence {
    src_words: Vec<WireWord>,
    tgt_text: String,
    onscreen: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ref_breakpoints: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireClip {
    id: String,
    lang_src: String,
    lang_tgt: String,
    sentences: Vec<WireSentence>,
}

/// Parses a JSONL corpus. Blank lines are skipped; parse errors carry the
/// 1-based line number; every clip is validated before being returned.
pub fn parse_corpus<R: Read>(reader: R, min_pause: Micros) -> Result<Vec<Clip>, Error> {
    let mut clips = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireClip = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let clip = clip_from_wire(wire, min_pause)
            .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let violations = validate_clip(&clip);
        if !violations.is_empty() {
            return Err(Error::Validation { clip: clip.id, violations });
        }
        clips.push(clip);
    }
    Ok(clips)
}

fn clip_from_wire(wire: WireClip, min_pause: Micros) -> Result<Clip, Error> {
    let mut pairs = Vec::with_capacity(wire.sentences.len());
    for s in wire.sentences {
        let words: Vec<TimedWord> = s
            .src_words
            .into_iter()
            .map(|w| TimedWord::new(w.w, ms_to_us(w.start_ms), ms_to_us(w.end_ms)))
            .collect();
        let source = SourceSentence::from_words(words, min_pause)?;
        let tgt_words: Vec<String> = s.tgt_text.split_whitespace().map(|w| w.to_string()).collect();
        let reference = match s.ref_breakpoints {
            None => None,
            Some(bps) => Some(Segmentation::new(bps, tgt_words.len())?),
        };
        pairs.push(SentencePair {
            source,
            target: TargetSentence::new(tgt_words, s.onscreen, wire.lang_tgt.clone()),
            reference,
        });
    }
    Ok(Clip { id: wire.id, pairs, source_language: wire.lang_src, target_language: wire.lang_tgt })
}

pub fn serialize_corpus<W: Write>(writer: W, clips: &[Clip]) -> Result<(), Error> {
    let mut w = BufWriter::new(writer);
    for clip in clips {
        let wire = WireClip {
            id: clip.id.clone(),
            lang_src: clip.source_language.clone(),
            lang_tgt: clip.target_language.clone(),
            sentences: clip
                .pairs
                .iter()
                .map(|p| WireSentence {
                    src_words: p
                        .source
                        .words
                        .iter()
                        .map(|tw| WireWord {
                            w: tw.text.clone(),
                            start_ms: us_to_ms_half_even(tw.start),
                            end_ms: us_to_ms_half_even(tw.end),
                        })
                        .collect(),
                    tgt_text: p.target.words.join(" "),
                    onscreen: p.target.onscreen,
                    ref_breakpoints: p.reference.as_ref().map(|r| r.breakpoints.clone()),
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &wire).map_err(io_from_json)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_corpus(path: &Path, min_pause: Micros) -> Result<Vec<Clip>, Error> {
    parse_corpus(File::open(path)?, min_pause)
}

pub fn write_corpus(path: &Path, clips: &[Clip]) -> Result<(), Error> {
    serialize_corpus(File::create(path)?, clips)
}

#[derive(Debug, Serialize, Deserialize)]
struct WireHeader {
    format: String,
    version: u32,
    mode: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireSegment {
    text: String,
    src_start_ms: i64,
    src_end_ms: i64,
    start_ms: i64,
    end_ms: i64,
    r_e: f64,
    r_f: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireAlignment {
    clip: String,
    sentence: usize,
    onscreen: bool,
    breakpoints: Vec<usize>,
    segments: Vec<WireSegment>,
    score: Option<f64>,
    warnings: Vec<String>,
}

/// Writes alignments as JSONL: a header record carrying the mode, then one
/// record per sentence. An empty result list yields just the header.
pub fn serialize_alignments<W: Write>(writer: W, mode: Mode, results: &[AlignmentResult]) -> Result<(), Error> {
    let mut w = BufWriter::new(writer);
    let header = WireHeader { format: "dubalign-alignments".into(), version: 1, mode: mode.as_str().into() };
    serde_json::to_writer(&mut w, &header).map_err(io_from_json)?;
    w.write_all(b"\n")?;
    for r in results {
        let wire = WireAlignment {
            clip: r.clip_id.clone(),
            sentence: r.sentence_index,
            onscreen: r.onscreen,
            breakpoints: r.breakpoints.clone(),
            segments: r
                .segments
                .iter()
                .map(|s| WireSegment {
                    text: s.target_text.clone(),
                    src_start_ms: us_to_ms_half_even(s.source_interval.begin),
                    src_end_ms: us_to_ms_half_even(s.source_interval.end),
                    start_ms: us_to_ms_half_even(s.relaxed_interval.begin),
                    end_ms: us_to_ms_half_even(s.relaxed_interval.end),
                    r_e: s.source_rate,
                    r_f: s.target_rate,
                })
                .collect(),
            score: r.score,
            warnings: r.warnings.clone(),
        };
        serde_json::to_writer(&mut w, &wire).map_err(io_from_json)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_alignments(path: &Path, mode: Mode, results: &[AlignmentResult]) -> Result<(), Error> {
    serialize_alignments(File::create(path)?, mode, results)
}

/// Reads an alignments file back; intervals are restored at ms precision.
pub fn read_alignments(path: &Path) -> Result<(Mode, Vec<AlignmentResult>), Error> {
    let mut lines = BufReader::new(File::open(path)?).lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "missing header record".into() })?;
    let header: WireHeader =
        serde_json::from_str(&first?).map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if header.format != "dubalign-alignments" || header.version != 1 {
        return Err(Error::Parse { line: 1, message: "unrecognized alignments header".into() });
    }
    let mode: Mode = header.mode.parse()?;
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireAlignment = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
        out.push(AlignmentResult {
            clip_id: wire.clip,
            sentence_index: wire.sentence,
            mode,
            onscreen: wire.onscreen,
            breakpoints: wire.breakpoints,
            segments: wire
                .segments
                .into_iter()
                .map(|s| SegmentResult {
                    target_text: s.text,
                    source_interval: Interval::new(ms_to_us(s.src_start_ms), ms_to_us(s.src_end_ms)),
                    relaxed_interval: Interval::new(ms_to_us(s.start_ms), ms_to_us(s.end_ms)),
                    source_rate: s.r_e,
                    target_rate: s.r_f,
                })
                .collect(),
            score: wire.score,
            warnings: wire.warnings,
        });
    }
    Ok((mode, out))
}

/// Flat weights record; the single source of tuning truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsFile {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub metric_params: MetricParams,
}

impl WeightsFile {
    pub fn new(weights: &FeatureWeights, metric_params: MetricParams) -> WeightsFile {
        WeightsFile {
            w1: weights.w1,
            w2: weights.w2,
            w3: weights.w3,
            w4: weights.w4,
            w5: weights.w5,
            metric_params,
        }
    }

    pub fn weights(&self) -> Result<FeatureWeights, Error> {
        FeatureWeights::new(self.w1, self.w2, self.w3, self.w4, self.w5)
    }
}

pub fn read_weights(path: &Path) -> Result<WeightsFile, Error> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { line: 1, message: e.to_string() })
}

pub fn write_weights(path: &Path, file: &WeightsFile) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, file).map_err(io_from_json)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn io_from_json(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::ms_to_us;

    const LINE: &str = r#"{"id":"c1","lang_src":"en","lang_tgt":"es","sentences":[{"src_words":[{"w":"hello","start_ms":0,"end_ms":400},{"w":"there","start_ms":800,"end_ms":1200}],"tgt_text":"hola amigo mío","onscreen":true,"ref_breakpoints":[1,3]}]}"#;

    #[test]
    fn parse_minimal_clip() {
        let clips = parse_corpus(LINE.as_bytes(), ms_to_us(300)).unwrap();
        assert_eq!(clips.len(), 1);
        let clip = &clips[0];
        assert_eq!(clip.id, "c1");
        assert_eq!(clip.pairs[0].source.breakpoints, vec![1, 2]);
        assert_eq!(clip.pairs[0].target.words.len(), 3);
        assert_eq!(clip.pairs[0].reference.as_ref().unwrap().breakpoints, vec![1, 3]);
    }

    #[test]
    fn parse_error_names_line() {
        let text = format!("{LINE}\nnot json\n");
        let err = parse_corpus(text.as_bytes(), ms_to_us(300)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_onscreen_flag_is_parse_error() {
        let line = r#"{"id":"c","lang_src":"en","lang_tgt":"es","sentences":[{"src_words":[{"w":"a","start_ms":0,"end_ms":100}],"tgt_text":"b"}]}"#;
        let err = parse_corpus(line.as_bytes(), ms_to_us(300)).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("onscreen"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corpus_round_trip_is_semantically_identical() {
        let clips = parse_corpus(LINE.as_bytes(), ms_to_us(300)).unwrap();
        let mut buf = Vec::new();
        serialize_corpus(&mut buf, &clips).unwrap();
        let again = parse_corpus(buf.as_slice(), ms_to_us(300)).unwrap();
        assert_eq!(clips, again);
        // and byte-determinism of serialization
        let mut buf2 = Vec::new();
        serialize_corpus(&mut buf2, &again).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn alignments_empty_list_writes_header_only() {
        let mut buf = Vec::new();
        serialize_alignments(&mut buf, Mode::OnOff, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains(r#""mode":"onoff""#));
    }

    #[test]
    fn alignments_round_trip() {
        let results = vec![AlignmentResult {
            clip_id: "c1".into(),
            sentence_index: 0,
            mode: Mode::Iso,
            onscreen: true,
            breakpoints: vec![2, 3],
            segments: vec![SegmentResult {
                target_text: "hola amigo".into(),
                source_interval: Interval::new(0, ms_to_us(1200)),
                relaxed_interval: Interval::new(0, ms_to_us(1275)),
                source_rate: 0.9,
                target_rate: 1.1,
            }],
            score: Some(-0.25),
            warnings: vec![],
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        write_alignments(&path, Mode::Iso, &results).unwrap();
        let (mode, back) = read_alignments(&path).unwrap();
        assert_eq!(mode, Mode::Iso);
        assert_eq!(back, results);
    }

    #[test]
    fn weights_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        let file = WeightsFile::new(&FeatureWeights::uniform(), MetricParams::default());
        write_weights(&path, &file).unwrap();
        let back = read_weights(&path).unwrap();
        assert_eq!(back.weights().unwrap(), FeatureWeights::uniform());
        assert_eq!(back.metric_params.sigma, 0.25);
    }
}
