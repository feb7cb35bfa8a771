//! `keygest` command line: key-frame extraction, entropy/decision-graph
//! inspection, training, prediction, evaluation, and synthetic dataset
//! generation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use keygest::config::load_config;
use keygest::{
    cutoff_distance, density_profile, entropy_curve, evaluate, extract_keyframes_with,
    generate_synthetic, load_dataset, load_model, load_sequence, local_extrema, normalized_points,
    pairwise_distances, predict_sequence, save_model, save_sequence_pgm, train, DensityKernel,
    EvalReport, PipelineConfig,
};

#[derive(Parser)]
#[command(name = "keygest", version, about = "Key-frame based dynamic hand gesture recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of key frames N.
    #[arg(long)]
    n_keyframes: Option<usize>,
    /// Dictionary size D for the appearance codebook.
    #[arg(long)]
    dictionary_size: Option<usize>,
    /// Density kernel: cutoff or gaussian.
    #[arg(long)]
    kernel: Option<DensityKernel>,
    /// Dense patch grid stride in pixels.
    #[arg(long)]
    stride: Option<usize>,
    /// SVM regularization constant.
    #[arg(long)]
    svm_c: Option<f64>,
    /// SVM training epochs.
    #[arg(long)]
    svm_epochs: Option<usize>,
    /// Master random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random splits for evaluation.
    #[arg(long)]
    splits: Option<usize>,
    #[arg(long)]
    train_frac: Option<f64>,
    #[arg(long)]
    val_frac: Option<f64>,
    #[arg(long)]
    test_frac: Option<f64>,
    /// Cutoff distance override (default: percentile heuristic).
    #[arg(long)]
    d_c: Option<f64>,
    /// Measure per-stage wall-clock timings (evaluation reports only).
    #[arg(long)]
    timings: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> keygest::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.n_keyframes {
            cfg.n_keyframes = v;
        }
        if let Some(v) = self.dictionary_size {
            cfg.dictionary_size = v;
        }
        if let Some(v) = self.kernel {
            cfg.kernel = v;
        }
        if let Some(v) = self.stride {
            cfg.stride = v;
        }
        if let Some(v) = self.svm_c {
            cfg.svm_c = v;
        }
        if let Some(v) = self.svm_epochs {
            cfg.svm_epochs = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.splits {
            cfg.splits = v;
        }
        if let Some(v) = self.train_frac {
            cfg.train_frac = v;
        }
        if let Some(v) = self.val_frac {
            cfg.val_frac = v;
        }
        if let Some(v) = self.test_frac {
            cfg.test_frac = v;
        }
        if let Some(v) = self.d_c {
            cfg.d_c = Some(v);
        }
        if self.timings {
            cfg.measure_timings = true;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract key frames from one sequence directory.
    Extract {
        /// Directory of PNG/PGM frames in lexicographic order.
        #[arg(long)]
        input: PathBuf,
        /// Number of key frames.
        #[arg(long, short, default_value_t = 5)]
        n: usize,
        /// Density kernel: cutoff or gaussian.
        #[arg(long, default_value_t = DensityKernel::Gaussian)]
        kernel: DensityKernel,
        /// Cutoff distance override.
        #[arg(long)]
        d_c: Option<f64>,
        /// Resize frames to WxH before processing.
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the per-frame entropy curve as JSON.
    Entropy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit per-extreme-point (rho, delta) pairs for decision graphs.
    DecisionGraph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DensityKernel::Gaussian)]
        kernel: DensityKernel,
        #[arg(long)]
        d_c: Option<f64>,
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model on a `<root>/<class>/<sequence>/` dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Classify one sequence with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated stratified-split evaluation with single-cue ablations.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        /// Output format: json or table.
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic labeled dataset of moving textured shapes.
    Synth {
        /// Dataset root directory to create.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        classes: usize,
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 40)]
        frames: usize,
        #[arg(long, value_parser = parse_size, default_value = "64x64")]
        size: (usize, usize),
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.trim().parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height in {s:?}"))?;
    Ok((w, h))
}

fn emit(out: &Option<PathBuf>, text: String) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> std::io::Result<()> {
    emit(out, serde_json::to_string_pretty(value).expect("report types serialize"))
}

#[derive(Serialize)]
struct ExtractOutput {
    source_id: String,
    indices: Vec<usize>,
    fallback_used: bool,
    entropy_bits: Vec<f64>,
}

#[derive(Serialize)]
struct EntropyOutput {
    source_id: String,
    entropy_bits: Vec<f64>,
}

#[derive(Serialize)]
struct GraphPoint {
    frame_index: usize,
    x: f64,
    y: f64,
    rho: f64,
    delta: f64,
}

#[derive(Serialize)]
struct DecisionGraphOutput {
    source_id: String,
    kernel: DensityKernel,
    d_c: f64,
    points: Vec<GraphPoint>,
}

#[derive(Serialize)]
struct PredictOutput {
    source_id: String,
    label: String,
    label_id: usize,
}

fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<12} {}\n", "Mode", "Accuracy"));
    for (name, stats) in [
        ("appearance", &report.appearance),
        ("motion", &report.motion),
        ("fused", &report.fused),
    ] {
        out.push_str(&format!("{:<12} {:.2}% \u{b1} {:.2}%\n", name, stats.mean_pct, stats.std_pct));
    }
    if let Some(t) = &report.timings {
        out.push_str("\nStage timings (median of 5 runs, seconds)\n");
        out.push_str(&format!("{:<22} {:.4}\n", "Entropy Calculation", t.entropy_s));
        out.push_str(&format!("{:<22} {:.4}\n", "Density Clustering", t.density_clustering_s));
        out.push_str(&format!("{:<22} {:.4}\n", "Feature Extraction", t.feature_extraction_s));
        out.push_str(&format!("{:<22} {:.6}\n", "SVM Classification", t.svm_classification_s));
    }
    out
}

fn run() -> keygest::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Extract { input, n, kernel, d_c, resize, out } => {
            let seq = load_sequence(&input, resize)?;
            let keys = extract_keyframes_with(&seq, n, kernel, d_c)?;
            let curve = entropy_curve(&seq);
            let output = ExtractOutput {
                source_id: seq.source_id().to_string(),
                indices: keys.indices,
                fallback_used: keys.fallback_used,
                entropy_bits: curve.values().to_vec(),
            };
            emit_json(&out, &output)?;
        }
        Command::Entropy { input, resize, out } => {
            let seq = load_sequence(&input, resize)?;
            let curve = entropy_curve(&seq);
            let output = EntropyOutput {
                source_id: seq.source_id().to_string(),
                entropy_bits: curve.values().to_vec(),
            };
            emit_json(&out, &output)?;
        }
        Command::DecisionGraph { input, kernel, d_c, resize, out } => {
            let seq = load_sequence(&input, resize)?;
            let curve = entropy_curve(&seq);
            let extrema = local_extrema(&curve);
            let points = normalized_points(&curve, &extrema);
            let output = if points.is_empty() {
                DecisionGraphOutput {
                    source_id: seq.source_id().to_string(),
                    kernel,
                    d_c: d_c.unwrap_or(0.0),
                    points: Vec::new(),
                }
            } else {
                let distances = pairwise_distances(&points)?;
                let d_c = d_c.unwrap_or_else(|| cutoff_distance(&distances));
                let profile = density_profile(&distances, d_c, kernel)?;
                DecisionGraphOutput {
                    source_id: seq.source_id().to_string(),
                    kernel,
                    d_c,
                    points: extrema
                        .points()
                        .iter()
                        .enumerate()
                        .map(|(i, p)| GraphPoint {
                            frame_index: p.frame_index,
                            x: points[i].x,
                            y: points[i].y,
                            rho: profile.rho[i],
                            delta: profile.delta[i],
                        })
                        .collect(),
                }
            };
            emit_json(&out, &output)?;
        }
        Command::Train { data, out, resize, config } => {
            let cfg = config.resolve()?;
            let dataset = load_dataset(&data, resize)?;
            let model = train(&dataset, &cfg)?;
            save_model(&model, &out)?;
            let summary = serde_json::json!({
                "model": out,
                "classes": model.classifier.labels().names(),
                "feature_dim": model.classifier.dim(),
                "fusion_weights": model.fusion.weights(),
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
        }
        Command::Predict { model, input, resize, out } => {
            let model = load_model(&model)?;
            let seq = load_sequence(&input, resize)?;
            let label = predict_sequence(&model, &seq)?;
            let output = PredictOutput {
                source_id: seq.source_id().to_string(),
                label: label.name,
                label_id: label.id,
            };
            emit_json(&out, &output)?;
        }
        Command::Evaluate { data, resize, format, out, config } => {
            let cfg = config.resolve()?;
            let dataset = load_dataset(&data, resize)?;
            let report = evaluate(&dataset, &cfg)?;
            match format.as_str() {
                "table" => emit(&out, render_table(&report))?,
                "json" => emit_json(&out, &report)?,
                other => {
                    return Err(keygest::Error::InvalidConfig(format!(
                        "unknown format {other:?} (use json or table)"
                    )))
                }
            }
        }
        Command::Synth { out, classes, per_class, frames, size, seed } => {
            let dataset = generate_synthetic(classes, per_class, frames, size, seed)?;
            for seq in &dataset {
                let dir: &Path = out.as_ref();
                save_sequence_pgm(seq, &dir.join(seq.source_id()))?;
            }
            let summary = serde_json::json!({
                "root": out,
                "classes": classes,
                "sequences": dataset.len(),
                "frames_per_sequence": frames,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
        }
    }
    Ok(())
}

fn main() {
    env_logger::init();
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
