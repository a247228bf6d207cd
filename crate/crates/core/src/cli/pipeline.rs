//! Batch run over a speaker manifest.
//!
//! Output layout under the output directory:
//!
//! ```text
//! <speaker>.anatomy.json
//! <speaker>.anatomy.svg      (--plots, and always for the anatomy command)
//! <utterance>.tv.csv
//! <utterance>.tvs.svg        (--plots)
//! ```

use std::collections::HashSet;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{error, info, warn};
use rayon::prelude::*;
use thiserror::Error;

use super::plot;
use super::tv_csv::{write_tv_csv, AngleUnit};
use crate::anatomy::SpeakerAnatomy;
use crate::ingest::{self, FormatOptions, IngestError, Manifest, SpeakerEntry, TraceKind};
use crate::tract_variables::{compute_trajectory, TvOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest_path: PathBuf,
    pub output_dir: PathBuf,
    pub angle_unit: AngleUnit,
    pub clamp_tbcd: bool,
    pub target_rate: f64,
    pub emit_plots: bool,
    pub parallelism: usize,
}

impl RunConfig {
    pub fn new(manifest_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest_path: manifest_path.into(),
            output_dir: output_dir.into(),
            angle_unit: AngleUnit::Radians,
            clamp_tbcd: false,
            target_rate: ingest::DEFAULT_RATE_HZ,
            emit_plots: false,
            parallelism: 1,
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if !(self.target_rate.is_finite() && self.target_rate > 0.0) {
            return Err(PipelineError::Config(format!(
                "target rate must be positive, got {}",
                self.target_rate
            )));
        }
        if self.parallelism == 0 {
            return Err(PipelineError::Config("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Ingest(#[from] IngestError),
    #[error("{0}")]
    Data(String),
}

impl PipelineError {
    /// 1 for configuration and I/O problems, 2 for bad data.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Io { .. } => 1,
            PipelineError::Ingest(IngestError::Io { .. } | IngestError::Manifest { .. }) => 1,
            PipelineError::Ingest(_) | PipelineError::Data(_) => 2,
        }
    }
}

fn io_context(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::Io { context, source }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceOutcome {
    pub speaker_id: String,
    pub utterance_id: String,
    pub frames: usize,
    pub frames_mistracked: usize,
    pub output: PathBuf,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub anatomies: Vec<PathBuf>,
    pub utterances: Vec<UtteranceOutcome>,
    pub speaker_failures: Vec<(String, PipelineError)>,
    pub utterance_failures: Vec<(String, PipelineError)>,
}

impl RunSummary {
    /// Any speaker failure is fatal; utterance failures only when none succeeded.
    pub fn exit_code(&self) -> i32 {
        let fatal: Vec<&PipelineError> = if !self.speaker_failures.is_empty() {
            self.speaker_failures.iter().map(|f| &f.1).collect()
        } else if self.utterances.is_empty() && !self.utterance_failures.is_empty() {
            self.utterance_failures.iter().map(|f| &f.1).collect()
        } else {
            return 0;
        };
        if fatal.iter().any(|e| e.exit_code() == 1) {
            1
        } else {
            2
        }
    }
}

/// Loads traces and builds the anatomy for one manifest entry.
pub fn load_speaker(entry: &SpeakerEntry) -> Result<SpeakerAnatomy, PipelineError> {
    let (palate, warnings) = ingest::parse_trace_file(&entry.palate, TraceKind::Palate)?;
    warnings.iter().for_each(|w| warn!("{w}"));
    let wall = match &entry.posterior_wall {
        Some(path) => {
            let (wall, warnings) = ingest::parse_trace_file(path, TraceKind::Wall)?;
            warnings.iter().for_each(|w| warn!("{w}"));
            Some(wall)
        }
        None => None,
    };
    SpeakerAnatomy::build(&entry.speaker_id, palate, wall, entry.sex, entry.thickness_mm)
        .map_err(|e| PipelineError::Data(e.to_string()))
}

fn write_anatomy(
    anatomy: &SpeakerAnatomy,
    output_dir: &Path,
    with_plot: bool,
) -> Result<PathBuf, PipelineError> {
    let path = output_dir.join(format!("{}.anatomy.json", anatomy.speaker_id));
    let mut text = serde_json::to_string_pretty(anatomy)
        .map_err(|e| PipelineError::Data(format!("serializing anatomy: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(io_context(path.display().to_string()))?;
    if with_plot {
        let svg = output_dir.join(format!("{}.anatomy.svg", anatomy.speaker_id));
        fs::write(&svg, plot::anatomy_svg(anatomy)).map_err(io_context(svg.display().to_string()))?;
    }
    Ok(path)
}

fn check_unique_utterances(manifest: &Manifest) -> Result<(), PipelineError> {
    let mut seen = HashSet::new();
    let mut speakers = HashSet::new();
    for s in &manifest.speakers {
        if !speakers.insert(s.speaker_id.as_str()) {
            return Err(PipelineError::Config(format!("duplicate speaker id {}", s.speaker_id)));
        }
        for u in &s.utterances {
            let id = ingest::utterance_id(u);
            if !seen.insert(id.clone()) {
                return Err(PipelineError::Config(format!(
                    "duplicate utterance id {id} (speaker {})",
                    s.speaker_id
                )));
            }
        }
    }
    Ok(())
}

fn process_utterance(
    path: &Path,
    anatomy: &SpeakerAnatomy,
    config: &RunConfig,
) -> Result<UtteranceOutcome, PipelineError> {
    let utterance_id = ingest::utterance_id(path);
    let options = FormatOptions {
        speaker_id: anatomy.speaker_id.clone(),
        utterance_id: utterance_id.clone(),
        native_rate: None,
    };
    let (raw, mut report) = ingest::parse_pellet_file(path, &options)?;
    let resampled = ingest::resample_with_report(&raw, config.target_rate, &mut report)?;
    for w in &report.warnings {
        warn!("{w}");
    }
    let tvs = compute_trajectory(
        &resampled,
        anatomy,
        TvOptions {
            clamp_tbcd: config.clamp_tbcd,
        },
    );

    let output = config.output_dir.join(format!("{utterance_id}.tv.csv"));
    let file = fs::File::create(&output).map_err(io_context(output.display().to_string()))?;
    write_tv_csv(&tvs, config.angle_unit, BufWriter::new(file))
        .map_err(io_context(output.display().to_string()))?;
    if config.emit_plots {
        let svg = config.output_dir.join(format!("{utterance_id}.tvs.svg"));
        fs::write(&svg, plot::tvs_svg(&tvs, config.angle_unit))
            .map_err(io_context(svg.display().to_string()))?;
    }

    Ok(UtteranceOutcome {
        speaker_id: anatomy.speaker_id.clone(),
        utterance_id,
        frames: tvs.frames.len(),
        frames_mistracked: report.frames_mistracked,
        output,
    })
}

/// Runs the whole manifest. Errors are returned only for problems that stop
/// the run before any speaker is processed; everything else is collected in
/// the summary.
pub fn run_pipeline(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let manifest = Manifest::load(&config.manifest_path)?;
    check_unique_utterances(&manifest)?;
    fs::create_dir_all(&config.output_dir)
        .map_err(io_context(config.output_dir.display().to_string()))?;

    let mut summary = RunSummary::default();
    let mut jobs = Vec::new();
    for entry in &manifest.speakers {
        match load_speaker(entry).and_then(|a| {
            let path = write_anatomy(&a, &config.output_dir, config.emit_plots)?;
            Ok((a, path))
        }) {
            Ok((anatomy, path)) => {
                info!("speaker {}: anatomy written to {}", entry.speaker_id, path.display());
                summary.anatomies.push(path);
                jobs.extend(entry.utterances.iter().map(|u| (u.clone(), anatomy.clone())));
            }
            Err(e) => {
                error!("speaker {}: {e}", entry.speaker_id);
                summary.speaker_failures.push((entry.speaker_id.clone(), e));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|(path, anatomy)| (path, process_utterance(path, anatomy, config)))
            .collect()
    });

    for (path, result) in results {
        match result {
            Ok(outcome) => {
                info!(
                    "{}: {} frames ({} mistracked in input) -> {}",
                    outcome.utterance_id,
                    outcome.frames,
                    outcome.frames_mistracked,
                    outcome.output.display()
                );
                summary.utterances.push(outcome);
            }
            Err(e) => {
                error!("{}: {e}", path.display());
                summary.utterance_failures.push((path.display().to_string(), e));
            }
        }
    }
    Ok(summary)
}

/// Anatomy only: JSON and SVG per speaker.
pub fn run_anatomy(manifest_path: &Path, output_dir: &Path) -> Result<RunSummary, PipelineError> {
    let manifest = Manifest::load(manifest_path)?;
    fs::create_dir_all(output_dir).map_err(io_context(output_dir.display().to_string()))?;
    let mut summary = RunSummary::default();
    for entry in &manifest.speakers {
        match load_speaker(entry).and_then(|a| write_anatomy(&a, output_dir, true)) {
            Ok(path) => summary.anatomies.push(path),
            Err(e) => {
                error!("speaker {}: {e}", entry.speaker_id);
                summary.speaker_failures.push((entry.speaker_id.clone(), e));
            }
        }
    }
    Ok(summary)
}
