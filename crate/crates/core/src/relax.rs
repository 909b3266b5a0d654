//! Step 2: time-boundary relaxation.
//!
//! On-screen sentences get the local relaxation DP: per segment a pair
//! `(delta_left, delta_right)` of signed quarter-fractions of the minimum
//! pause, scored by the five-feature log-linear model. Off-screen sentence
//! runs get the global relaxation DP: one boundary position per inter-phrase
//! or inter-sentence gap, chosen on a lattice quantized at `q`, scored by the
//! piecewise intelligibility function of the target speaking rate. A final
//! trim pass contracts any off-screen segment slower than normal speed back
//! to rate 1.
//!
//! Tie-break everywhere: highest score, then smallest total absolute boundary
//! shift, then lexicographically smallest assignment. The brute-force oracles
//! replicate all three levels exactly.

use crate::error::Error;
use crate::features::{lm_break_score, semantic_match_score, transition_score_step2, FeatureWeights, SentenceContext};
use crate::model::{Interval, Segmentation};
use crate::score::LogScore;
use crate::time::Micros;

pub use crate::segment::ORACLE_LIMIT;

/// Signed relaxation fraction in quarters of the minimum pause: -4..=4
/// encodes {0, ±1/4, ±2/4, ±3/4, ±4/4}. Positive values extend the interval
/// outward on their side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridDelta(pub i8);

impl GridDelta {
    pub const ZERO: GridDelta = GridDelta(0);

    pub fn fraction(self) -> f64 {
        self.0 as f64 / 4.0
    }

    /// Outward shift in microseconds for a minimum pause of `de`.
    pub fn shift_us(self, de: Micros) -> i64 {
        self.0 as i64 * de / 4
    }

    pub fn abs_quarters(self) -> i64 {
        self.0.unsigned_abs() as i64
    }
}

/// The 9 grid values per side, ascending.
pub const GRID: [GridDelta; 9] = [
    GridDelta(-4),
    GridDelta(-3),
    GridDelta(-2),
    GridDelta(-1),
    GridDelta(0),
    GridDelta(1),
    GridDelta(2),
    GridDelta(3),
    GridDelta(4),
];

const COMBOS: usize = 81;

fn combo(c: usize) -> (GridDelta, GridDelta) {
    (GRID[c / 9], GRID[c % 9])
}

/// One segment of a relaxation plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRelaxation {
    /// Relaxed interval `s*_t`.
    pub interval: Interval,
    /// Grid fractions for local plans; `None` for global plans, which report
    /// absolute shifts only.
    pub delta: Option<(GridDelta, GridDelta)>,
    /// Signed outward shift on each side in microseconds
    /// (`original.begin - relaxed.begin` and `relaxed.end - original.end`).
    pub shift_left_us: i64,
    pub shift_right_us: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationPlan {
    pub segments: Vec<SegmentRelaxation>,
    pub score: LogScore,
    pub warnings: Vec<String>,
}

/// Feasibility bounds for the local DP.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalConstraints {
    /// Residual pause that must survive at every internal breakpoint.
    pub min_residual: Micros,
    /// Silence available before the sentence (limits the first `delta_left`).
    pub left_silence: Micros,
    /// Silence available after the sentence (limits the last `delta_right`).
    pub right_silence: Micros,
}

/// Per-sentence precomputation shared by the local DP and its oracle.
struct LocalInstance {
    intervals: Vec<Interval>,
    target_durations: Vec<Micros>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    source_rates: Vec<f64>,
    de: Micros,
    cons: LocalConstraints,
}

impl LocalInstance {
    fn new(ctx: &SentenceContext<'_>, seg: &Segmentation, cons: LocalConstraints) -> Result<LocalInstance, Error> {
        let k = ctx.segment_count();
        if seg.segment_count() != k {
            return Err(Error::InvalidInput(format!(
                "segmentation has {} segments, source has {}",
                seg.segment_count(),
                k
            )));
        }
        let m = ctx.target_word_count();
        if seg.breakpoints.last() != Some(&m) {
            return Err(Error::InvalidInput("segmentation does not cover the target sentence".into()));
        }
        let mut target_durations = Vec::with_capacity(k);
        let mut s1 = Vec::with_capacity(k);
        let mut s2 = Vec::with_capacity(k);
        let mut j_prev = 0usize;
        for t in 0..k {
            let j = seg.breakpoints[t];
            target_durations.push(ctx.target_span_duration(j_prev, j));
            s1.push(lm_break_score(&ctx.pair.target.words, j));
            s2.push(semantic_match_score(
                ctx.src_seg_chars[t],
                ctx.target_span_chars(j_prev, j),
                ctx.src_sent_chars,
                ctx.tgt_sent_chars,
            ));
            j_prev = j;
        }
        for t in 1..k {
            let gap = ctx.intervals[t].begin - ctx.intervals[t - 1].end;
            if gap < cons.min_residual {
                return Err(Error::InvalidInput(format!(
                    "gap before segment {} is below min_residual",
                    t + 1
                )));
            }
        }
        Ok(LocalInstance {
            intervals: ctx.intervals.clone(),
            target_durations,
            s1,
            s2,
            source_rates: ctx.source_rates.clone(),
            de: ctx.min_pause,
            cons,
        })
    }

    fn k(&self) -> usize {
        self.intervals.len()
    }

    fn relaxed(&self, t: usize, c: usize) -> Interval {
        let (dl, dr) = combo(c);
        Interval::new(
            self.intervals[t].begin - dl.shift_us(self.de),
            self.intervals[t].end + dr.shift_us(self.de),
        )
    }

    fn combo_feasible(&self, t: usize, c: usize) -> bool {
        let (dl, dr) = combo(c);
        let iv = self.relaxed(t, c);
        if iv.len() <= 0 {
            return false;
        }
        if t == 0 && dl.shift_us(self.de) > self.cons.left_silence {
            return false;
        }
        if t == self.k() - 1 && dr.shift_us(self.de) > self.cons.right_silence {
            return false;
        }
        true
    }

    /// Combined intrusion of consecutive segments into their shared gap.
    fn pair_feasible(&self, t: usize, c_prev: usize, c: usize) -> bool {
        debug_assert!(t >= 1);
        let (_, dr_prev) = combo(c_prev);
        let (dl, _) = combo(c);
        let prev_end = self.intervals[t - 1].end + dr_prev.shift_us(self.de);
        let begin = self.intervals[t].begin - dl.shift_us(self.de);
        prev_end + self.cons.min_residual <= begin
    }

    fn rate(&self, t: usize, c: usize) -> f64 {
        self.target_durations[t] as f64 / self.relaxed(t, c).len() as f64
    }

    fn edge(&self, weights: &FeatureWeights, t: usize, c_prev: Option<usize>, c: usize) -> LogScore {
        let (dl, dr) = combo(c);
        let prev_rate = c_prev.map(|cp| self.rate(t - 1, cp));
        transition_score_step2(
            weights,
            self.s1[t],
            self.s2[t],
            self.source_rates[t],
            self.rate(t, c),
            prev_rate,
            dl.fraction(),
            dr.fraction(),
        )
    }

    fn combo_shift(&self, c: usize) -> i64 {
        let (dl, dr) = combo(c);
        dl.abs_quarters() + dr.abs_quarters()
    }

    fn plan_from(&self, choices: &[usize], score: LogScore) -> RelaxationPlan {
        let segments = choices
            .iter()
            .enumerate()
            .map(|(t, &c)| {
                let (dl, dr) = combo(c);
                SegmentRelaxation {
                    interval: self.relaxed(t, c),
                    delta: Some((dl, dr)),
                    shift_left_us: dl.shift_us(self.de),
                    shift_right_us: dr.shift_us(self.de),
                }
            })
            .collect();
        RelaxationPlan { segments, score, warnings: Vec::new() }
    }
}

/// Optimizes `(delta_left, delta_right)` per segment by dynamic programming,
/// maximizing the summed Step-2 transition scores subject to non-overlap,
/// residual pause, and edge-silence constraints.
#[allow(clippy::needless_range_loop)]
pub fn relax_local(
    ctx: &SentenceContext<'_>,
    seg: &Segmentation,
    weights: &FeatureWeights,
    cons: LocalConstraints,
) -> Result<RelaxationPlan, Error> {
    let inst = LocalInstance::new(ctx, seg, cons)?;
    let k = inst.k();

    // v[t][c]: best (score, shift) over segments t+1..k-1 given segment t
    // uses combo c; None when c is infeasible at t or has no feasible suffix.
    let mut v: Vec<Vec<Option<(LogScore, i64)>>> = vec![vec![None; COMBOS]; k];
    for c in 0..COMBOS {
        if inst.combo_feasible(k - 1, c) {
            v[k - 1][c] = Some((LogScore::ZERO, 0));
        }
    }
    for t in (0..k - 1).rev() {
        for c in 0..COMBOS {
            if !inst.combo_feasible(t, c) {
                continue;
            }
            let mut best: Option<(LogScore, i64)> = None;
            for c2 in 0..COMBOS {
                let Some((s2, sh2)) = v[t + 1][c2] else { continue };
                if !inst.pair_feasible(t + 1, c, c2) {
                    continue;
                }
                let cand = (inst.edge(weights, t + 1, Some(c), c2) + s2, inst.combo_shift(c2) + sh2);
                if better(cand, best) {
                    best = Some(cand);
                }
            }
            v[t][c] = best;
        }
    }

    // Greedy front reconstruction (lexicographically smallest optimum).
    let mut choices = Vec::with_capacity(k);
    let mut total = LogScore::ZERO;
    for t in 0..k {
        let c_prev = choices.last().copied();
        let mut best: Option<(usize, (LogScore, i64), LogScore)> = None;
        for c in 0..COMBOS {
            let Some((s, sh)) = v[t][c] else { continue };
            if let Some(cp) = c_prev {
                if !inst.pair_feasible(t, cp, c) {
                    continue;
                }
            }
            let edge = inst.edge(weights, t, c_prev, c);
            let cand = (edge + s, inst.combo_shift(c) + sh);
            if best.as_ref().map(|(_, b, _)| better(cand, Some(*b))).unwrap_or(true) {
                best = Some((c, cand, edge));
            }
        }
        let (c, _, edge) = best.ok_or_else(|| {
            Error::InvalidInput("no feasible relaxation assignment (zero relaxation blocked by constraints)".into())
        })?;
        total += edge;
        choices.push(c);
    }

    Ok(inst.plan_from(&choices, total))
}

/// `cand` strictly better than `best`: higher score, then smaller shift.
fn better(cand: (LogScore, i64), best: Option<(LogScore, i64)>) -> bool {
    match best {
        None => true,
        Some((bs, bsh)) => cand.0 > bs || (cand.0 == bs && cand.1 < bsh),
    }
}

/// Exhaustive argmax over all feasible grid assignments; test oracle for
/// [`relax_local`].
pub fn brute_force_relax_local(
    ctx: &SentenceContext<'_>,
    seg: &Segmentation,
    weights: &FeatureWeights,
    cons: LocalConstraints,
) -> Result<RelaxationPlan, Error> {
    let inst = LocalInstance::new(ctx, seg, cons)?;
    let k = inst.k();
    let size = (COMBOS as u128).pow(k as u32);
    if size > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { size, limit: ORACLE_LIMIT });
    }

    let mut best: Option<(Vec<usize>, LogScore, i64)> = None;
    let mut prefix = Vec::with_capacity(k);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        inst: &LocalInstance,
        weights: &FeatureWeights,
        t: usize,
        acc: LogScore,
        shift: i64,
        prefix: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, LogScore, i64)>,
    ) {
        if t == inst.k() {
            let strictly_better = match best {
                None => true,
                Some((_, bs, bsh)) => acc > *bs || (acc == *bs && shift < *bsh),
            };
            if strictly_better {
                *best = Some((prefix.clone(), acc, shift));
            }
            return;
        }
        for c in 0..COMBOS {
            if !inst.combo_feasible(t, c) {
                continue;
            }
            let c_prev = prefix.last().copied();
            if let Some(cp) = c_prev {
                if !inst.pair_feasible(t, cp, c) {
                    continue;
                }
            }
            let edge = inst.edge(weights, t, c_prev, c);
            prefix.push(c);
            rec(inst, weights, t + 1, acc + edge, shift + inst.combo_shift(c), prefix, best);
            prefix.pop();
        }
    }
    rec(&inst, weights, 0, LogScore::ZERO, 0, &mut prefix, &mut best);
    let (choices, score, _) =
        best.ok_or_else(|| Error::InvalidInput("no feasible relaxation assignment".into()))?;
    Ok(inst.plan_from(&choices, score))
}

/// One segment of an off-screen run: its original phrase interval and the
/// synthesis duration of its target text.
#[derive(Debug, Clone, Copy)]
pub struct RunSegment {
    pub interval: Interval,
    pub target_duration: Micros,
}

/// A maximal run of consecutive off-screen sentences, flattened to segments.
/// `left_bound`/`right_bound` are absolute times the run may not cross
/// (relaxed intervals of on-screen neighbors, or the clip extent).
#[derive(Debug, Clone)]
pub struct OffscreenRun {
    pub segments: Vec<RunSegment>,
    pub left_bound: Micros,
    pub right_bound: Micros,
}

/// Piecewise intelligibility score of a target speaking rate (the global
/// relaxation objective): 1 up to normal speed, linearly decaying to 0 at
/// twice normal speed, 0 beyond.
pub fn eq7(rate: f64) -> f64 {
    if rate <= 1.0 {
        1.0
    } else if rate <= 2.0 {
        2.0 - rate
    } else {
        0.0
    }
}

/// Log of [`eq7`] over a synthesis duration and a relaxed interval length;
/// `NEG_INF` when the rate exceeds twice normal speed.
pub fn eq7_log(duration: Micros, len: Micros) -> LogScore {
    debug_assert!(len > 0);
    let s = eq7(duration as f64 / len as f64);
    if s <= 0.0 {
        LogScore::NEG_INF
    } else {
        LogScore::from_f64(s.ln())
    }
}

/// Candidate boundary positions, ascending, for each of the `N+1` boundaries
/// of a run of `N` segments. Each lattice is anchored at the original
/// boundary (so the zero-shift assignment is always available) and steps by
/// `q` across the available gap, with the far gap edge always included.
pub fn boundary_lattice(run: &OffscreenRun, q: Micros) -> Vec<Vec<Micros>> {
    let n = run.segments.len();
    let left = run.left_bound.min(run.segments[0].interval.begin);
    let right = run.right_bound.max(run.segments[n - 1].interval.end);
    let mut out = Vec::with_capacity(n + 1);

    // boundary 0: from the original first-segment start down to the left bound
    let mut first = Vec::new();
    let mut b = run.segments[0].interval.begin;
    while b >= left {
        first.push(b);
        b -= q;
    }
    if *first.last().unwrap() != left {
        first.push(left);
    }
    first.reverse();
    out.push(first);

    // internal boundaries: from the left segment's end up to the right
    // segment's start
    for g in 1..n {
        let lo = run.segments[g - 1].interval.end;
        let hi = run.segments[g].interval.begin;
        out.push(ascending_candidates(lo, hi, q));
    }

    // boundary N: from the original last-segment end up to the right bound
    out.push(ascending_candidates(run.segments[n - 1].interval.end, right, q));
    out
}

fn ascending_candidates(lo: Micros, hi: Micros, q: Micros) -> Vec<Micros> {
    let mut out = Vec::new();
    let mut b = lo;
    while b <= hi {
        out.push(b);
        b += q;
    }
    if *out.last().unwrap() != hi {
        out.push(hi);
    }
    out
}

fn lattice_originals(run: &OffscreenRun) -> Vec<Micros> {
    let n = run.segments.len();
    let mut orig = Vec::with_capacity(n + 1);
    orig.push(run.segments[0].interval.begin);
    for g in 1..=n {
        orig.push(run.segments[g - 1].interval.end);
    }
    orig
}

/// Globally relaxes an off-screen run: picks one boundary per gap from the
/// lattice so that segments tile the run, maximizing the summed log
/// intelligibility scores. If every assignment scores zero somewhere, the
/// run is unintelligible; the plan then maximizes total relaxed duration and
/// carries a warning.
#[allow(clippy::needless_range_loop)]
pub fn relax_global(run: &OffscreenRun, quantum: Micros) -> Result<RelaxationPlan, Error> {
    check_run(run, quantum)?;
    let lattice = boundary_lattice(run, quantum);
    let orig = lattice_originals(run);
    let n = run.segments.len();

    // v[g][ci]: best (score, shift) over segments g+1..n given boundary g at
    // lattice[g][ci]. Scores may be NEG_INF (unintelligible suffix).
    let mut v: Vec<Vec<(LogScore, i64)>> = Vec::with_capacity(n + 1);
    for g in 0..=n {
        v.push(vec![(LogScore::ZERO, 0); lattice[g].len()]);
    }
    for g in (0..n).rev() {
        for ci in 0..lattice[g].len() {
            let b = lattice[g][ci];
            let mut best: Option<(LogScore, i64)> = None;
            for (cj, &b2) in lattice[g + 1].iter().enumerate() {
                let (s2, sh2) = v[g + 1][cj];
                let cand = (
                    eq7_log(run.segments[g].target_duration, b2 - b) + s2,
                    (b2 - orig[g + 1]).abs() + sh2,
                );
                if better(cand, best) {
                    best = Some(cand);
                }
            }
            v[g][ci] = best.expect("lattice is never empty");
        }
    }

    // front choice of boundary 0
    let mut best: Option<(usize, (LogScore, i64))> = None;
    for (ci, &b) in lattice[0].iter().enumerate() {
        let (s, sh) = v[0][ci];
        let cand = (s, (b - orig[0]).abs() + sh);
        if best.as_ref().map(|(_, bb)| better(cand, Some(*bb))).unwrap_or(true) {
            best = Some((ci, cand));
        }
    }
    let (c0, (total, _)) = best.unwrap();

    if !total.is_finite() {
        return Ok(fallback_plan(run, &lattice, &orig));
    }

    // reconstruct boundaries left to right
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(lattice[0][c0]);
    for g in 0..n {
        let b = *bounds.last().unwrap();
        let mut best: Option<(usize, (LogScore, i64))> = None;
        for (cj, &b2) in lattice[g + 1].iter().enumerate() {
            let (s2, sh2) = v[g + 1][cj];
            let cand = (
                eq7_log(run.segments[g].target_duration, b2 - b) + s2,
                (b2 - orig[g + 1]).abs() + sh2,
            );
            if best.as_ref().map(|(_, bb)| better(cand, Some(*bb))).unwrap_or(true) {
                best = Some((cj, cand));
            }
        }
        bounds.push(lattice[g + 1][best.unwrap().0]);
    }

    Ok(plan_from_bounds(run, &bounds, total, Vec::new()))
}

fn check_run(run: &OffscreenRun, quantum: Micros) -> Result<(), Error> {
    if run.segments.is_empty() {
        return Err(Error::InvalidInput("off-screen run has no segments".into()));
    }
    if quantum <= 0 {
        return Err(Error::InvalidInput("lattice quantum must be positive".into()));
    }
    for g in 1..run.segments.len() {
        if run.segments[g].interval.begin < run.segments[g - 1].interval.end {
            return Err(Error::InvalidInput("run segments overlap".into()));
        }
    }
    Ok(())
}

fn fallback_plan(run: &OffscreenRun, lattice: &[Vec<Micros>], orig: &[Micros]) -> RelaxationPlan {
    // Maximize total relaxed duration (widest span), then minimize shift:
    // leftmost first boundary, rightmost last, originals in between.
    let n = run.segments.len();
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(lattice[0][0]);
    for item in orig.iter().take(n).skip(1) {
        bounds.push(*item);
    }
    bounds.push(*lattice[n].last().unwrap());
    plan_from_bounds(run, &bounds, LogScore::NEG_INF, vec!["unintelligible-run".to_string()])
}

fn plan_from_bounds(run: &OffscreenRun, bounds: &[Micros], score: LogScore, warnings: Vec<String>) -> RelaxationPlan {
    let segments = run
        .segments
        .iter()
        .enumerate()
        .map(|(g, seg)| SegmentRelaxation {
            interval: Interval::new(bounds[g], bounds[g + 1]),
            delta: None,
            shift_left_us: seg.interval.begin - bounds[g],
            shift_right_us: bounds[g + 1] - seg.interval.end,
        })
        .collect();
    RelaxationPlan { segments, score, warnings }
}

/// Exhaustive argmax over all lattice boundary tuples; test oracle for
/// [`relax_global`].
pub fn brute_force_relax_global(run: &OffscreenRun, quantum: Micros) -> Result<RelaxationPlan, Error> {
    check_run(run, quantum)?;
    let lattice = boundary_lattice(run, quantum);
    let orig = lattice_originals(run);
    let n = run.segments.len();
    let size: u128 = lattice.iter().map(|c| c.len() as u128).product();
    if size > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { size, limit: ORACLE_LIMIT });
    }

    let mut best: Option<(Vec<Micros>, LogScore, i64)> = None;
    let mut bounds: Vec<Micros> = Vec::with_capacity(n + 1);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        run: &OffscreenRun,
        lattice: &[Vec<Micros>],
        orig: &[Micros],
        g: usize,
        acc: LogScore,
        shift: i64,
        bounds: &mut Vec<Micros>,
        best: &mut Option<(Vec<Micros>, LogScore, i64)>,
    ) {
        let n = run.segments.len();
        if g == n + 1 {
            let strictly_better = match best {
                None => true,
                Some((_, bs, bsh)) => acc > *bs || (acc == *bs && shift < *bsh),
            };
            if strictly_better {
                *best = Some((bounds.clone(), acc, shift));
            }
            return;
        }
        for &b in &lattice[g] {
            let edge = if g == 0 {
                LogScore::ZERO
            } else {
                eq7_log(run.segments[g - 1].target_duration, b - bounds[g - 1])
            };
            bounds.push(b);
            rec(run, lattice, orig, g + 1, acc + edge, shift + (b - orig[g]).abs(), bounds, best);
            bounds.pop();
        }
    }
    rec(run, &lattice, &orig, 0, LogScore::ZERO, 0, &mut bounds, &mut best);
    let (bounds, score, _) = best.unwrap();
    if !score.is_finite() {
        return Ok(fallback_plan(run, &lattice, &orig));
    }
    Ok(plan_from_bounds(run, &bounds, score, Vec::new()))
}

/// Contracts every off-screen segment slower than normal speed so its rate
/// becomes exactly 1 (start fixed, end pulled in). Faster segments are left
/// alone. Idempotent.
pub fn trim_slow_segments(plan: &RelaxationPlan, target_durations: &[Micros]) -> RelaxationPlan {
    debug_assert_eq!(plan.segments.len(), target_durations.len());
    let segments = plan
        .segments
        .iter()
        .zip(target_durations)
        .map(|(seg, &dur)| {
            if dur < seg.interval.len() {
                let new_end = seg.interval.begin + dur;
                SegmentRelaxation {
                    interval: Interval::new(seg.interval.begin, new_end),
                    delta: seg.delta,
                    shift_left_us: seg.shift_left_us,
                    shift_right_us: seg.shift_right_us - (seg.interval.end - new_end),
                }
            } else {
                seg.clone()
            }
        })
        .collect();
    RelaxationPlan { segments, score: plan.score, warnings: plan.warnings.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duration::CharDurationModel;
    use crate::model::{SentencePair, SourceSentence, TargetSentence, TimedWord};
    use crate::time::ms_to_us;

    fn make_pair(src_words: &[(&str, i64, i64)], tgt: &[&str]) -> SentencePair {
        let words = src_words
            .iter()
            .map(|(w, s, e)| TimedWord::new(*w, ms_to_us(*s), ms_to_us(*e)))
            .collect();
        SentencePair {
            source: SourceSentence::from_words(words, ms_to_us(300)).unwrap(),
            target: TargetSentence::new(tgt.iter().map(|s| s.to_string()).collect(), true, "xx"),
            reference: None,
        }
    }

    fn two_segment_pair() -> SentencePair {
        make_pair(
            &[("hello", 0, 400), ("there", 450, 900), ("again", 1400, 1900)],
            &["bonjour", "encore", "une", "fois"],
        )
    }

    #[test]
    fn huge_isochrony_weight_forces_zero_deltas() {
        let pair = two_segment_pair();
        let model = CharDurationModel::default();
        let ctx = SentenceContext::new(&pair, &model, "").unwrap();
        let seg = Segmentation::new(vec![2, 4], 4).unwrap();
        let w = FeatureWeights::new(0.25, 0.25, 0.25, 0.25, 1e6).unwrap();
        let plan = relax_local(&ctx, &seg, &w, LocalConstraints::default()).unwrap();
        for s in &plan.segments {
            assert_eq!(s.delta, Some((GridDelta::ZERO, GridDelta::ZERO)));
        }
    }

    #[test]
    fn local_dp_matches_brute_force_k2() {
        let pair = two_segment_pair();
        let model = CharDurationModel::default();
        let ctx = SentenceContext::new(&pair, &model, "").unwrap();
        let seg = Segmentation::new(vec![2, 4], 4).unwrap();
        let w = FeatureWeights::uniform();
        let cons = LocalConstraints { min_residual: 0, left_silence: ms_to_us(150), right_silence: ms_to_us(500) };
        let dp = relax_local(&ctx, &seg, &w, cons).unwrap();
        let bf = brute_force_relax_local(&ctx, &seg, &w, cons).unwrap();
        assert_eq!(dp, bf);
    }

    #[test]
    fn local_optimum_at_least_zero_plan() {
        let pair = two_segment_pair();
        let model = CharDurationModel::default();
        let ctx = SentenceContext::new(&pair, &model, "").unwrap();
        let seg = Segmentation::new(vec![3, 4], 4).unwrap();
        let w = FeatureWeights::uniform();
        let plan = relax_local(&ctx, &seg, &w, LocalConstraints::default()).unwrap();

        // score of the all-zero assignment, via the oracle machinery
        let inst = LocalInstance::new(&ctx, &seg, LocalConstraints::default()).unwrap();
        let zero = GRID.iter().position(|d| d.0 == 0).unwrap() * 9 + 4;
        let mut acc = LogScore::ZERO;
        let mut prev = None;
        for t in 0..inst.k() {
            acc += inst.edge(&w, t, prev, zero);
            prev = Some(zero);
        }
        assert!(plan.score >= acc);
    }

    #[test]
    fn blocked_edges_single_segment_yields_zero_plan() {
        let pair = make_pair(&[("solo", 0, 500)], &["seulement"]);
        let model = CharDurationModel::default();
        let ctx = SentenceContext::new(&pair, &model, "").unwrap();
        let seg = Segmentation::new(vec![1], 1).unwrap();
        // no silence on either side: only contraction or zero is feasible,
        // and with a huge isochrony weight zero wins
        let w = FeatureWeights::new(0.25, 0.25, 0.25, 0.25, 100.0).unwrap();
        let plan = relax_local(&ctx, &seg, &w, LocalConstraints::default()).unwrap();
        assert_eq!(plan.segments[0].delta, Some((GridDelta::ZERO, GridDelta::ZERO)));
        assert_eq!(plan.segments[0].interval, ctx.intervals[0]);
    }

    #[test]
    fn eq7_branch_values() {
        assert_eq!(eq7(0.8), 1.0);
        assert_eq!(eq7(1.5), 0.5);
        assert_eq!(eq7(2.5), 0.0);
        assert_eq!(eq7(1.0), 1.0);
        assert_eq!(eq7(2.0), 0.0);
        // non-increasing on a grid of rates
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let r = 0.1 * i as f64;
            let s = eq7(r);
            assert!(s <= prev + 1e-12);
            prev = s;
        }
    }

    fn simple_run() -> OffscreenRun {
        OffscreenRun {
            segments: vec![
                RunSegment { interval: Interval::new(ms_to_us(1000), ms_to_us(2000)), target_duration: ms_to_us(1400) },
                RunSegment { interval: Interval::new(ms_to_us(2600), ms_to_us(3400)), target_duration: ms_to_us(900) },
            ],
            left_bound: ms_to_us(400),
            right_bound: ms_to_us(4000),
        }
    }

    #[test]
    fn global_dp_matches_brute_force() {
        let run = simple_run();
        let q = ms_to_us(75);
        let dp = relax_global(&run, q).unwrap();
        let bf = brute_force_relax_global(&run, q).unwrap();
        assert_eq!(dp, bf);
    }

    #[test]
    fn global_zero_shift_when_already_slow() {
        let run = OffscreenRun {
            segments: vec![
                RunSegment { interval: Interval::new(0, ms_to_us(1000)), target_duration: ms_to_us(800) },
                RunSegment { interval: Interval::new(ms_to_us(1400), ms_to_us(2400)), target_duration: ms_to_us(600) },
            ],
            left_bound: 0,
            right_bound: ms_to_us(3000),
        };
        let plan = relax_global(&run, ms_to_us(75)).unwrap();
        assert_eq!(plan.score, LogScore::ZERO);
        // segments tile the run; internal boundaries anchor at the left
        // segment's end, so the inter-segment gap goes to the second segment
        // and no boundary moves off its anchor
        assert_eq!(plan.segments[0].interval, Interval::new(0, ms_to_us(1000)));
        assert_eq!(plan.segments[1].interval, Interval::new(ms_to_us(1000), ms_to_us(2400)));
        assert_eq!(plan.segments[0].shift_right_us, 0);
        assert_eq!(plan.segments[1].shift_right_us, 0);
    }

    #[test]
    fn global_optimum_at_least_identity() {
        let run = simple_run();
        let plan = relax_global(&run, ms_to_us(75)).unwrap();
        let identity: LogScore = run
            .segments
            .iter()
            .map(|s| eq7_log(s.target_duration, s.interval.len()))
            .sum();
        assert!(plan.score >= identity);
    }

    #[test]
    fn global_unintelligible_fallback() {
        let run = OffscreenRun {
            segments: vec![RunSegment {
                interval: Interval::new(ms_to_us(1000), ms_to_us(1500)),
                target_duration: ms_to_us(10_000),
            }],
            left_bound: ms_to_us(800),
            right_bound: ms_to_us(2000),
        };
        let plan = relax_global(&run, ms_to_us(75)).unwrap();
        assert_eq!(plan.warnings, vec!["unintelligible-run".to_string()]);
        // widest possible span
        assert_eq!(plan.segments[0].interval, Interval::new(ms_to_us(800), ms_to_us(2000)));
        let bf = brute_force_relax_global(&run, ms_to_us(75)).unwrap();
        assert_eq!(plan, bf);
    }

    #[test]
    fn trim_examples_and_idempotence() {
        let plan = RelaxationPlan {
            segments: vec![
                SegmentRelaxation {
                    interval: Interval::new(0, ms_to_us(2000)),
                    delta: None,
                    shift_left_us: 0,
                    shift_right_us: 0,
                },
                SegmentRelaxation {
                    interval: Interval::new(ms_to_us(2500), ms_to_us(3500)),
                    delta: None,
                    shift_left_us: 0,
                    shift_right_us: 0,
                },
            ],
            score: LogScore::ZERO,
            warnings: Vec::new(),
        };
        let durs = vec![ms_to_us(1000), ms_to_us(1300)];
        let trimmed = trim_slow_segments(&plan, &durs);
        // r_f = 0.5 over 2s -> contracted to 1s at rate exactly 1
        assert_eq!(trimmed.segments[0].interval, Interval::new(0, ms_to_us(1000)));
        // r_f = 1.3 -> unchanged
        assert_eq!(trimmed.segments[1].interval, plan.segments[1].interval);
        assert_eq!(trim_slow_segments(&trimmed, &durs), trimmed);
    }
}
