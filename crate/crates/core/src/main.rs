use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dubalign::duration::{CharDurationModel, DurationOracle};
use dubalign::error::Error;
use dubalign::external::{CommandDurationOracle, CommandTranscriber, DEFAULT_TIMEOUT};
use dubalign::features::FeatureWeights;
use dubalign::io::{
    read_alignments, read_corpus, read_weights, write_alignments, write_corpus, write_weights,
    WeightsFile,
};
use dubalign::metrics::{evaluate, MetricParams, MockTranscriber, Transcriber};
use dubalign::pipeline::{dub_isochrone, dub_onoff, AlignmentResult, Mode, PipelineConfig};
use dubalign::simulate::{simulate, SimConfig};
use dubalign::time::ms_to_us;
use dubalign::tune::{tune_step1, tune_step2};

#[derive(Parser)]
#[command(name = "dubalign", version, about = "Prosodic alignment for automatic dubbing")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Align a corpus: segment target sentences and relax time boundaries.
    Align(AlignArgs),
    /// Compute automatic metrics for an alignments file.
    Evaluate(EvaluateArgs),
    /// Tune model weights on an annotated corpus.
    Tune(TuneArgs),
    /// Generate a seeded synthetic corpus.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct AlignArgs {
    /// Dubbing condition: "iso" or "onoff".
    #[arg(long)]
    mode: String,
    #[arg(long)]
    corpus: PathBuf,
    /// Weights file (see `tune`).
    #[arg(long)]
    weights: PathBuf,
    /// Global relaxation lattice quantum in milliseconds.
    #[arg(long, default_value_t = 75)]
    quantum_ms: i64,
    /// Minimum pause defining source breaks, in milliseconds.
    #[arg(long, default_value_t = 300)]
    min_pause_ms: i64,
    /// External duration command (line protocol); default is the built-in
    /// character model.
    #[arg(long)]
    duration_cmd: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    alignments: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// External transcriber command (line protocol); default is the seeded
    /// mock transcriber.
    #[arg(long)]
    transcriber_cmd: Option<String>,
    /// Smoothness tolerance.
    #[arg(long, default_value_t = 0.25)]
    sigma: f64,
    /// Fluent speaking-rate band, "lo:hi".
    #[arg(long, default_value = "0.8:1.3")]
    band: String,
    /// Seed for the mock transcriber.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    min_pause_ms: i64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct TuneArgs {
    /// Which sweep to run: "step1" (segmentation weights) or "step2"
    /// (isochrony weight).
    step: String,
    #[arg(long)]
    corpus: PathBuf,
    /// Simplex lattice step for step1.
    #[arg(long, default_value_t = 0.1)]
    grid_step: f64,
    /// Starting weights file; defaults to uniform weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    min_pause_ms: i64,
    #[arg(long)]
    out_weights: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    clips: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability that a sentence is off-screen.
    #[arg(long, default_value_t = 0.5)]
    offscreen_ratio: f64,
    /// Target/source character ratio range, "lo:hi".
    #[arg(long, default_value = "1.1:1.4")]
    verbosity: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Cmd::Align(a) => align(a),
        Cmd::Evaluate(a) => evaluate_cmd(a),
        Cmd::Tune(a) => tune(a),
        Cmd::Simulate(a) => simulate_cmd(a),
    }
}

fn align(a: AlignArgs) -> Result<(), Error> {
    let mode: Mode = a.mode.parse()?;
    let clips = read_corpus(&a.corpus, ms_to_us(a.min_pause_ms))?;
    let weights_file = read_weights(&a.weights)?;
    let cfg = PipelineConfig {
        mode,
        weights: weights_file.weights()?,
        min_pause: ms_to_us(a.min_pause_ms),
        quantum: ms_to_us(a.quantum_ms),
        min_residual: 0,
    };
    let oracle: Box<dyn DurationOracle> = match &a.duration_cmd {
        Some(cmd) => Box::new(CommandDurationOracle::spawn(cmd, DEFAULT_TIMEOUT)?),
        None => Box::new(CharDurationModel::default()),
    };
    let mut results: Vec<AlignmentResult> = Vec::new();
    for clip in &clips {
        let r = match mode {
            Mode::Iso => dub_isochrone(clip, &cfg, oracle.as_ref())?,
            Mode::OnOff => dub_onoff(clip, &cfg, oracle.as_ref())?,
        };
        results.extend(r);
    }
    write_alignments(&a.out, mode, &results)
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<(), Error> {
    let clips = read_corpus(&a.corpus, ms_to_us(a.min_pause_ms))?;
    let (_, alignments) = read_alignments(&a.alignments)?;
    let params = MetricParams { sigma: a.sigma, band: parse_range(&a.band)? };
    let transcriber: Box<dyn Transcriber> = match &a.transcriber_cmd {
        Some(cmd) => Box::new(CommandTranscriber::spawn(cmd, DEFAULT_TIMEOUT)?),
        None => Box::new(MockTranscriber::new(a.seed)),
    };
    let oracle = CharDurationModel::default();
    let report = evaluate(&clips, &alignments, &oracle, transcriber.as_ref(), &params)?;
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    std::fs::write(&a.report, text)?;
    Ok(())
}

fn tune(a: TuneArgs) -> Result<(), Error> {
    let clips = read_corpus(&a.corpus, ms_to_us(a.min_pause_ms))?;
    let oracle = CharDurationModel::default();
    let (base, params) = match &a.weights {
        Some(path) => {
            let f = read_weights(path)?;
            (f.weights()?, f.metric_params)
        }
        None => (FeatureWeights::uniform(), MetricParams::default()),
    };
    let tuned = match a.step.as_str() {
        "step1" => {
            let (w, _f1) = tune_step1(&clips, &oracle, a.grid_step, base.w5)?;
            w
        }
        "step2" => {
            let (w5, _s) = tune_step2(&clips, &oracle, &base, params.sigma)?;
            FeatureWeights::new(base.w1, base.w2, base.w3, base.w4, w5)?
        }
        other => return Err(Error::InvalidInput(format!("unknown tuning step '{other}'"))),
    };
    write_weights(&a.out_weights, &WeightsFile::new(&tuned, params))
}

fn simulate_cmd(a: SimulateArgs) -> Result<(), Error> {
    let cfg = SimConfig {
        clips: a.clips,
        seed: a.seed,
        offscreen_ratio: a.offscreen_ratio,
        verbosity: parse_range(&a.verbosity)?,
    };
    let clips = simulate(&cfg)?;
    write_corpus(&a.out, &clips)
}

fn parse_range(text: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!("expected lo:hi, got '{text}'")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| Error::InvalidInput(format!("bad number '{}'", parts[0])))?;
    let hi: f64 = parts[1].parse().map_err(|_| Error::InvalidInput(format!("bad number '{}'", parts[1])))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidInput(format!("range '{text}' is not ordered")));
    }
    Ok((lo, hi))
}
