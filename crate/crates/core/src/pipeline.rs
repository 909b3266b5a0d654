//! Clip-level orchestration of the two dubbing conditions.
//!
//! Isochrone dubbing (`iso`) applies segmentation + local relaxation to every
//! sentence independently. On/off dubbing (`onoff`) shares the segmentation
//! step, relaxes on-screen sentences locally (bit-identical to `iso`), then
//! relaxes maximal runs of consecutive off-screen sentences globally and
//! trims any segment slower than normal speed back to rate 1.

use crate::duration::DurationOracle;
use crate::error::Error;
use crate::features::{FeatureWeights, SentenceContext};
use crate::model::{Clip, Interval, Segmentation};
use crate::relax::{
    eq7_log, relax_global, relax_local, trim_slow_segments, LocalConstraints, OffscreenRun,
    RelaxationPlan, RunSegment,
};
use crate::score::LogScore;
use crate::segment::segment_with_ctx;
use crate::time::{ms_to_us, Micros};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Iso,
    OnOff,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Iso => "iso",
            Mode::OnOff => "onoff",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode, Error> {
        match s {
            "iso" => Ok(Mode::Iso),
            "onoff" => Ok(Mode::OnOff),
            other => Err(Error::InvalidInput(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub weights: FeatureWeights,
    /// Minimum pause defining source breaks and the local relaxation unit.
    pub min_pause: Micros,
    /// Lattice quantum for global relaxation.
    pub quantum: Micros,
    /// Residual pause kept at internal breakpoints after local relaxation.
    pub min_residual: Micros,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Iso,
            weights: FeatureWeights::uniform(),
            min_pause: ms_to_us(300),
            quantum: ms_to_us(75),
            min_residual: 0,
        }
    }
}

/// One aligned segment of a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentResult {
    pub target_text: String,
    pub source_interval: Interval,
    pub relaxed_interval: Interval,
    pub source_rate: f64,
    pub target_rate: f64,
}

/// Alignment of one sentence: chosen breakpoints, relaxed intervals, rates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub clip_id: String,
    pub sentence_index: usize,
    pub mode: Mode,
    pub onscreen: bool,
    pub breakpoints: Vec<usize>,
    pub segments: Vec<SegmentResult>,
    /// Total model score (Step 1 plus Step 2); `None` when the sentence sits
    /// in an unintelligible off-screen run.
    pub score: Option<f64>,
    pub warnings: Vec<String>,
}

/// Isochrone dubbing: segmentation and local relaxation per sentence.
pub fn dub_isochrone(
    clip: &Clip,
    cfg: &PipelineConfig,
    oracle: &dyn DurationOracle,
) -> Result<Vec<AlignmentResult>, Error> {
    let mut out = Vec::with_capacity(clip.pairs.len());
    for i in 0..clip.pairs.len() {
        let (result, _) = align_local(clip, cfg, oracle, i, Mode::Iso)?;
        out.push(result);
    }
    Ok(out)
}

/// On/off dubbing: shared segmentation, local relaxation for on-screen
/// sentences, global relaxation + trim for off-screen runs.
pub fn dub_onoff(
    clip: &Clip,
    cfg: &PipelineConfig,
    oracle: &dyn DurationOracle,
) -> Result<Vec<AlignmentResult>, Error> {
    let n = clip.pairs.len();
    let mut results: Vec<Option<AlignmentResult>> = vec![None; n];
    let mut relaxed_spans: Vec<Option<Interval>> = vec![None; n];

    // on-screen sentences first (their relaxed intervals bound the runs)
    for i in 0..n {
        if clip.pairs[i].target.onscreen {
            let (result, span) = align_local(clip, cfg, oracle, i, Mode::OnOff)?;
            relaxed_spans[i] = Some(span);
            results[i] = Some(result);
        }
    }

    // maximal consecutive off-screen runs
    let extent = clip.extent();
    let mut i = 0;
    while i < n {
        if clip.pairs[i].target.onscreen {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !clip.pairs[i].target.onscreen {
            i += 1;
        }
        let end = i; // run covers sentences start..end

        let left_bound = if start == 0 {
            extent.begin
        } else {
            relaxed_spans[start - 1].expect("on-screen neighbor already relaxed").end
        };
        let right_bound = if end == n {
            extent.end
        } else {
            relaxed_spans[end].expect("on-screen neighbor already relaxed").begin
        };

        align_run(clip, cfg, oracle, start..end, left_bound, right_bound, &mut results)?;
    }

    Ok(results.into_iter().map(|r| r.expect("every sentence aligned")).collect())
}

/// Segment + locally relax one sentence; returns the result and the span of
/// its relaxed intervals.
fn align_local(
    clip: &Clip,
    cfg: &PipelineConfig,
    oracle: &dyn DurationOracle,
    i: usize,
    mode: Mode,
) -> Result<(AlignmentResult, Interval), Error> {
    let pair = &clip.pairs[i];
    let ctx = SentenceContext::new(pair, oracle, &clip.source_language)?;
    let (seg, step1) = segment_with_ctx(&ctx, &cfg.weights).map_err(|e| at_sentence(e, i))?;
    let cons = LocalConstraints {
        min_residual: cfg.min_residual,
        left_silence: edge_silence(clip, i, Side::Left),
        right_silence: edge_silence(clip, i, Side::Right),
    };
    let plan = relax_local(&ctx, &seg, &cfg.weights, cons)?;
    let span = Interval::new(
        plan.segments.first().unwrap().interval.begin,
        plan.segments.last().unwrap().interval.end,
    );
    let score = step1 + plan.score;
    let result = build_result(clip, i, mode, &ctx, &seg, &plan, Some(score.to_f64()));
    Ok((result, span))
}

fn align_run(
    clip: &Clip,
    cfg: &PipelineConfig,
    oracle: &dyn DurationOracle,
    range: std::ops::Range<usize>,
    left_bound: Micros,
    right_bound: Micros,
    results: &mut [Option<AlignmentResult>],
) -> Result<(), Error> {
    // segment each sentence of the run and flatten its phrases
    let mut run_segments = Vec::new();
    let mut per_sentence: Vec<(usize, SentenceContext<'_>, Segmentation, LogScore, usize)> = Vec::new();
    for i in range.clone() {
        let pair = &clip.pairs[i];
        let ctx = SentenceContext::new(pair, oracle, &clip.source_language)?;
        let (seg, step1) = segment_with_ctx(&ctx, &cfg.weights).map_err(|e| at_sentence(e, i))?;
        let first = run_segments.len();
        let mut j_prev = 0usize;
        for t in 0..ctx.segment_count() {
            let j = seg.breakpoints[t];
            run_segments.push(RunSegment {
                interval: ctx.intervals[t],
                target_duration: ctx.target_span_duration(j_prev, j),
            });
            j_prev = j;
        }
        per_sentence.push((i, ctx, seg, step1, first));
    }

    let run = OffscreenRun { segments: run_segments.clone(), left_bound, right_bound };
    let plan = relax_global(&run, cfg.quantum)?;
    let durations: Vec<Micros> = run_segments.iter().map(|s| s.target_duration).collect();
    let plan = trim_slow_segments(&plan, &durations);

    for (i, ctx, seg, step1, first) in per_sentence {
        let k = ctx.segment_count();
        let slice = RelaxationPlan {
            segments: plan.segments[first..first + k].to_vec(),
            score: plan.score,
            warnings: plan.warnings.clone(),
        };
        // per-sentence Step-2 score: intelligibility of its final intervals
        let eq7_total: LogScore = (0..k)
            .map(|t| eq7_log(durations[first + t], slice.segments[t].interval.len()))
            .sum();
        let score = if eq7_total.is_finite() {
            Some((step1 + eq7_total).to_f64())
        } else {
            None
        };
        results[i] = Some(build_result(clip, i, Mode::OnOff, &ctx, &seg, &slice, score));
    }
    Ok(())
}

fn build_result(
    clip: &Clip,
    i: usize,
    mode: Mode,
    ctx: &SentenceContext<'_>,
    seg: &Segmentation,
    plan: &RelaxationPlan,
    score: Option<f64>,
) -> AlignmentResult {
    let pair = &clip.pairs[i];
    let mut segments = Vec::with_capacity(seg.segment_count());
    let mut j_prev = 0usize;
    for t in 0..seg.segment_count() {
        let j = seg.breakpoints[t];
        let relaxed = plan.segments[t].interval;
        segments.push(SegmentResult {
            target_text: pair.target.words[j_prev..j].join(" "),
            source_interval: ctx.intervals[t],
            relaxed_interval: relaxed,
            source_rate: ctx.source_rates[t],
            target_rate: ctx.target_span_duration(j_prev, j) as f64 / relaxed.len() as f64,
        });
        j_prev = j;
    }
    AlignmentResult {
        clip_id: clip.id.clone(),
        sentence_index: i,
        mode,
        onscreen: pair.target.onscreen,
        breakpoints: seg.breakpoints.clone(),
        segments,
        score,
        warnings: plan.warnings.clone(),
    }
}

enum Side {
    Left,
    Right,
}

/// Silence available to a sentence at its clip-side boundary: half the gap to
/// the neighboring sentence (so independently relaxed neighbors can never
/// overlap), zero at the clip edges.
fn edge_silence(clip: &Clip, i: usize, side: Side) -> Micros {
    match side {
        Side::Left => {
            if i == 0 {
                0
            } else {
                (clip.pairs[i].source.span().begin - clip.pairs[i - 1].source.span().end) / 2
            }
        }
        Side::Right => {
            if i + 1 == clip.pairs.len() {
                0
            } else {
                (clip.pairs[i + 1].source.span().begin - clip.pairs[i].source.span().end) / 2
            }
        }
    }
}

fn at_sentence(e: Error, i: usize) -> Error {
    match e {
        Error::InfeasibleSegmentation { words, segments, .. } => {
            Error::InfeasibleSegmentation { words, segments, sentence: Some(i) }
        }
        other => other,
    }
}
