//! End-to-end train/test pipeline: key-frame extraction, appearance BoF
//! and LBP-TOP featurization, accuracy-derived fusion weights, one-vs-rest
//! linear SVM, plus the repeated stratified-split evaluation protocol and
//! a per-stage timing harness.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bof::{encode, train_codebook, Codebook};
use crate::density::DensityKernel;
use crate::descriptors::{dense_patch_descriptors, lbp_top, LBP_TOP_LEN};
use crate::error::{Error, Result};
use crate::fusion::{fuse, fusion_weights, CueAccuracies, FusionWeights};
use crate::keyframes::{extract_keyframes_with, subsample, KeyFrameSet};
use crate::sequence::{to_grayscale_stack, FrameSequence};
use crate::svm::{accuracy, predict, train_svm, GestureLabel, LabelTable, LinearModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Tunable pipeline parameters. The defaults follow the reference setup:
/// 5 key frames, a 16-word dictionary, gaussian kernel, 50/25/25 splits
/// repeated 20 times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub n_keyframes: usize,
    pub dictionary_size: usize,
    pub kernel: DensityKernel,
    pub stride: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub seed: u64,
    pub splits: usize,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    /// Cutoff-distance override; `None` uses the percentile heuristic.
    pub d_c: Option<f64>,
    /// Attach wall-clock stage timings to evaluation reports. Off by
    /// default so reports stay byte-reproducible.
    pub measure_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_keyframes: 5,
            dictionary_size: 16,
            kernel: DensityKernel::Gaussian,
            stride: 16,
            svm_c: 1.0,
            svm_epochs: 200,
            seed: 7,
            splits: 20,
            train_frac: 0.5,
            val_frac: 0.25,
            test_frac: 0.25,
            d_c: None,
            measure_timings: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_keyframes < 3 {
            return Err(Error::InvalidConfig(
                "n_keyframes must be at least 3 (motion planes need temporal extent 3)".into(),
            ));
        }
        if self.dictionary_size == 0 {
            return Err(Error::InvalidConfig("dictionary_size must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1".into()));
        }
        if !self.svm_c.is_finite() || self.svm_c <= 0.0 {
            return Err(Error::InvalidConfig("svm_c must be positive".into()));
        }
        if self.svm_epochs == 0 {
            return Err(Error::InvalidConfig("svm_epochs must be at least 1".into()));
        }
        if self.splits == 0 {
            return Err(Error::InvalidConfig("splits must be at least 1".into()));
        }
        for (name, v) in [("train_frac", self.train_frac), ("val_frac", self.val_frac), ("test_frac", self.test_frac)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.train_frac + self.val_frac + self.test_frac > 1.0 + 1e-9 {
            return Err(Error::InvalidConfig("split fractions must sum to at most 1".into()));
        }
        if let Some(d_c) = self.d_c {
            if !d_c.is_finite() || d_c <= 0.0 {
                return Err(Error::NonPositiveCutoff(d_c));
            }
        }
        Ok(())
    }

    /// Feature dimension of the fused representation.
    pub fn fused_dim(&self) -> usize {
        self.n_keyframes * self.dictionary_size + LBP_TOP_LEN
    }
}

/// Everything trained: codebook, fusion weights, classifier, and the
/// configuration snapshot they were produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub format_version: u32,
    pub config: PipelineConfig,
    pub codebook: Codebook,
    pub fusion: FusionWeights,
    pub classifier: LinearModel,
}

impl TrainedModel {
    /// Checks the cross-component dimension contract.
    pub fn validate(&self) -> Result<()> {
        let expected = self.config.fused_dim();
        if self.classifier.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.classifier.dim() });
        }
        if self.codebook.len() != self.config.dictionary_size {
            return Err(Error::DimensionMismatch {
                expected: self.config.dictionary_size,
                found: self.codebook.len(),
            });
        }
        if self.fusion.len() != 2 {
            return Err(Error::WrongWeightCount { expected: 2, found: self.fusion.len() });
        }
        Ok(())
    }
}

/// Featurization of one sequence that does not depend on any trained
/// component: key frames, raw patch descriptors per key frame, and the
/// L1-normalized LBP-TOP histogram.
#[derive(Debug, Clone)]
pub struct SequenceFeatures {
    pub source_id: String,
    pub label: Option<String>,
    pub keyframes: KeyFrameSet,
    pub patch_vectors: Vec<Vec<Vec<f64>>>,
    pub motion_hist: Vec<f64>,
}

/// Extract the training-independent features of a sequence.
pub fn extract_features(seq: &FrameSequence, cfg: &PipelineConfig) -> Result<SequenceFeatures> {
    let keys = extract_keyframes_with(seq, cfg.n_keyframes, cfg.kernel, cfg.d_c)?;
    let keyseq = subsample(seq, &keys)?;

    let mut patch_vectors = Vec::with_capacity(keyseq.len());
    for frame in keyseq.frames() {
        let descs = dense_patch_descriptors(frame, cfg.stride)?;
        patch_vectors.push(descs.into_iter().map(|d| d.vector).collect());
    }

    let hist = lbp_top(&to_grayscale_stack(&keyseq))?;
    let total: f64 = hist.bins().iter().sum();
    let motion_hist: Vec<f64> = if total > 0.0 {
        hist.bins().iter().map(|b| b / total).collect()
    } else {
        hist.bins().to_vec()
    };

    Ok(SequenceFeatures {
        source_id: seq.source_id().to_string(),
        label: seq.label().map(|s| s.to_string()),
        keyframes: keys,
        patch_vectors,
        motion_hist,
    })
}

/// hist1 for precomputed features: per-key-frame BoF blocks in temporal
/// order, zero-padded to `n_keyframes` blocks when the sequence had fewer
/// frames than requested.
pub fn appearance_histogram_from(features: &SequenceFeatures, codebook: &Codebook, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    let d = codebook.len();
    let mut hist = vec![0.0; cfg.n_keyframes * d];
    for (k, vectors) in features.patch_vectors.iter().take(cfg.n_keyframes).enumerate() {
        let block = encode(vectors, codebook)?;
        hist[k * d..(k + 1) * d].copy_from_slice(block.weights());
    }
    Ok(hist)
}

fn fused_histogram(features: &SequenceFeatures, codebook: &Codebook, weights: &FusionWeights, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    let hist1 = appearance_histogram_from(features, codebook, cfg)?;
    fuse(&hist1, &features.motion_hist, weights)
}

fn pooled_descriptors(features: &[&SequenceFeatures]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for f in features {
        for frame_descs in &f.patch_vectors {
            out.extend(frame_descs.iter().cloned());
        }
    }
    out
}

fn labels_of(table: &LabelTable, ids: &[usize]) -> Vec<GestureLabel> {
    ids.iter().map(|&id| table.label(id)).collect()
}

fn resolve_label_ids(features: &[SequenceFeatures]) -> Result<(LabelTable, Vec<usize>)> {
    for f in features {
        if f.label.is_none() {
            return Err(Error::MissingLabel { source_id: f.source_id.clone() });
        }
    }
    let table = LabelTable::from_names(features.iter().map(|f| f.label.as_deref().unwrap()))?;
    if table.num_classes() < 2 {
        return Err(Error::SingleClass);
    }
    let ids = features
        .iter()
        .map(|f| table.id_of(f.label.as_deref().unwrap()).expect("name from table"))
        .collect();
    Ok((table, ids))
}

fn group_by_class(ids: &[usize], num_classes: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); num_classes];
    for (i, &id) in ids.iter().enumerate() {
        groups[id].push(i);
    }
    groups
}

/// Per-class shuffled split into train/validation(/test) index sets.
fn stratified_split(
    groups: &[Vec<usize>],
    table: &LabelTable,
    fracs: (f64, f64, Option<f64>),
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let (train_frac, val_frac, test_frac) = fracs;
    let min_needed = if test_frac.is_some() { 4 } else { 2 };
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (class, members) in groups.iter().enumerate() {
        let m = members.len();
        if m < min_needed {
            return Err(Error::CannotStratify {
                name: table.names()[class].clone(),
                count: m,
                min: min_needed,
            });
        }
        let mut shuffled = members.clone();
        shuffled.shuffle(rng);

        let n_train = ((train_frac * m as f64).floor() as usize).max(1);
        let n_val = ((val_frac * m as f64).floor() as usize).max(1);
        match test_frac {
            Some(_) => {
                if n_train + n_val >= m {
                    return Err(Error::CannotStratify {
                        name: table.names()[class].clone(),
                        count: m,
                        min: min_needed,
                    });
                }
                train.extend_from_slice(&shuffled[..n_train]);
                validation.extend_from_slice(&shuffled[n_train..n_train + n_val]);
                test.extend_from_slice(&shuffled[n_train + n_val..]);
            }
            None => {
                // Two-way split: everything beyond train is validation.
                let n_train = n_train.min(m - 1);
                train.extend_from_slice(&shuffled[..n_train]);
                validation.extend_from_slice(&shuffled[n_train..]);
            }
        }
    }
    Ok((train, validation, test))
}

struct FittedSplit {
    codebook: Codebook,
    weights: FusionWeights,
    cue_accuracies: [f64; 2],
    appearance_model: LinearModel,
    motion_model: LinearModel,
    fused_model: LinearModel,
}

/// Fit every component on one train/validation split. Single-cue models
/// are scored on the validation set to derive the fusion weights; the
/// returned classifiers are refit on train+validation.
fn fit_split(
    features: &[SequenceFeatures],
    ids: &[usize],
    table: &LabelTable,
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<FittedSplit> {
    let train_features: Vec<&SequenceFeatures> = train_idx.iter().map(|&i| &features[i]).collect();
    let descriptors = pooled_descriptors(&train_features);
    let codebook = train_codebook(&descriptors, cfg.dictionary_size, seed)?;

    let hist1: Vec<Vec<f64>> = features
        .iter()
        .map(|f| appearance_histogram_from(f, &codebook, cfg))
        .collect::<Result<_>>()?;
    let hist2: Vec<Vec<f64>> = features.iter().map(|f| f.motion_hist.clone()).collect();

    let gather = |idx: &[usize], hists: &[Vec<f64>]| -> (Vec<Vec<f64>>, Vec<GestureLabel>) {
        let fs = idx.iter().map(|&i| hists[i].clone()).collect();
        let ls = labels_of(table, &idx.iter().map(|&i| ids[i]).collect::<Vec<_>>());
        (fs, ls)
    };

    // Single-cue classifiers on the train part, scored on validation.
    let (tr1, trl) = gather(train_idx, &hist1);
    let (va1, val) = gather(val_idx, &hist1);
    let appearance_probe = train_svm(&tr1, &trl, cfg.svm_c, cfg.svm_epochs, seed)?;
    let r_a = accuracy(&appearance_probe, &va1, &val)?;

    let (tr2, _) = gather(train_idx, &hist2);
    let (va2, _) = gather(val_idx, &hist2);
    let motion_probe = train_svm(&tr2, &trl, cfg.svm_c, cfg.svm_epochs, seed)?;
    let r_m = accuracy(&motion_probe, &va2, &val)?;

    let weights = fusion_weights(&CueAccuracies::new(vec![r_a, r_m])?);

    // Refit on train+validation for the final models.
    let mut fit_idx: Vec<usize> = train_idx.to_vec();
    fit_idx.extend_from_slice(val_idx);
    let (fit1, fitl) = gather(&fit_idx, &hist1);
    let (fit2, _) = gather(&fit_idx, &hist2);
    let appearance_model = train_svm(&fit1, &fitl, cfg.svm_c, cfg.svm_epochs, seed)?;
    let motion_model = train_svm(&fit2, &fitl, cfg.svm_c, cfg.svm_epochs, seed)?;

    let fused: Vec<Vec<f64>> = features
        .iter()
        .zip(hist1.iter())
        .map(|(f, h1)| fuse(h1, &f.motion_hist, &weights))
        .collect::<Result<_>>()?;
    let fit_fused: Vec<Vec<f64>> = fit_idx.iter().map(|&i| fused[i].clone()).collect();
    let fused_model = train_svm(&fit_fused, &fitl, cfg.svm_c, cfg.svm_epochs, seed)?;

    Ok(FittedSplit {
        codebook,
        weights,
        cue_accuracies: [r_a, r_m],
        appearance_model,
        motion_model,
        fused_model,
    })
}

/// Train a model on a full labeled dataset. An internal stratified
/// train/validation split (in the configured ratio) supplies the cue
/// accuracies for the fusion weights; the final classifier is refit on
/// everything.
pub fn train(dataset: &[FrameSequence], cfg: &PipelineConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let features: Vec<SequenceFeatures> =
        dataset.iter().map(|s| extract_features(s, cfg)).collect::<Result<_>>()?;
    let (table, ids) = resolve_label_ids(&features)?;
    let groups = group_by_class(&ids, table.num_classes());

    let ratio = cfg.train_frac / (cfg.train_frac + cfg.val_frac);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (train_idx, val_idx, _) = stratified_split(&groups, &table, (ratio, 1.0 - ratio, None), &mut rng)?;

    let fitted = fit_split(&features, &ids, &table, &train_idx, &val_idx, cfg, cfg.seed)?;
    let model = TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        config: cfg.clone(),
        codebook: fitted.codebook,
        fusion: fitted.weights,
        classifier: fitted.fused_model,
    };
    model.validate()?;
    Ok(model)
}

/// Featurize and classify one sequence with a trained model.
pub fn predict_sequence(model: &TrainedModel, seq: &FrameSequence) -> Result<GestureLabel> {
    let features = extract_features(seq, &model.config)?;
    let fused = fused_histogram(&features, &model.codebook, &model.fusion, &model.config)?;
    predict(&model.classifier, &fused)
}

/// Accuracy summary of one featurization mode over all splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    pub per_split_pct: Vec<f64>,
    pub mean_pct: f64,
    pub std_pct: f64,
}

impl ModeStats {
    fn from_values(values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        Self { per_split_pct: values, mean_pct: mean, std_pct: var.sqrt() }
    }
}

/// Wall-clock stage timings, medians of 5 runs, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub entropy_s: f64,
    pub density_clustering_s: f64,
    pub feature_extraction_s: f64,
    pub svm_classification_s: f64,
}

/// Evaluation protocol output: per-split accuracies for the three
/// featurization modes, per-split fusion weights, and the fused model's
/// confusion matrix summed over splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub splits: usize,
    pub labels: Vec<String>,
    pub appearance: ModeStats,
    pub motion: ModeStats,
    pub fused: ModeStats,
    pub fusion_weights_per_split: Vec<Vec<u32>>,
    pub cue_accuracies_per_split: Vec<Vec<f64>>,
    /// confusion[true][predicted], fused mode, summed over splits.
    pub confusion: Vec<Vec<u64>>,
    pub timings: Option<StageTimings>,
}

fn split_seed(base: u64, split: usize) -> u64 {
    base.wrapping_add((split as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Run the repeated stratified-split protocol: per split, fit on
/// train(+validation) and score appearance-only, motion-only, and fused
/// models on the held-out test set.
pub fn evaluate(dataset: &[FrameSequence], cfg: &PipelineConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let features: Vec<SequenceFeatures> =
        dataset.iter().map(|s| extract_features(s, cfg)).collect::<Result<_>>()?;
    let (table, ids) = resolve_label_ids(&features)?;
    let groups = group_by_class(&ids, table.num_classes());
    let num_classes = table.num_classes();

    let mut appearance_acc = Vec::with_capacity(cfg.splits);
    let mut motion_acc = Vec::with_capacity(cfg.splits);
    let mut fused_acc = Vec::with_capacity(cfg.splits);
    let mut weights_history = Vec::with_capacity(cfg.splits);
    let mut cue_history = Vec::with_capacity(cfg.splits);
    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    let mut last_fitted: Option<FittedSplit> = None;

    for split in 0..cfg.splits {
        let seed = split_seed(cfg.seed, split);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (train_idx, val_idx, test_idx) = stratified_split(
            &groups,
            &table,
            (cfg.train_frac, cfg.val_frac, Some(cfg.test_frac)),
            &mut rng,
        )?;
        let fitted = fit_split(&features, &ids, &table, &train_idx, &val_idx, cfg, seed)?;

        let hist1_test: Vec<Vec<f64>> = test_idx
            .iter()
            .map(|&i| appearance_histogram_from(&features[i], &fitted.codebook, cfg))
            .collect::<Result<_>>()?;
        let test_labels = labels_of(&table, &test_idx.iter().map(|&i| ids[i]).collect::<Vec<_>>());

        appearance_acc.push(accuracy(&fitted.appearance_model, &hist1_test, &test_labels)?);

        let hist2_test: Vec<Vec<f64>> = test_idx.iter().map(|&i| features[i].motion_hist.clone()).collect();
        motion_acc.push(accuracy(&fitted.motion_model, &hist2_test, &test_labels)?);

        let mut correct = 0usize;
        for (row, &i) in test_idx.iter().enumerate() {
            let fused = fuse(&hist1_test[row], &features[i].motion_hist, &fitted.weights)?;
            let predicted = predict(&fitted.fused_model, &fused)?;
            confusion[ids[i]][predicted.id] += 1;
            if predicted.id == ids[i] {
                correct += 1;
            }
        }
        fused_acc.push(100.0 * correct as f64 / test_idx.len() as f64);
        weights_history.push(fitted.weights.weights().to_vec());
        cue_history.push(fitted.cue_accuracies.to_vec());
        last_fitted = Some(fitted);
    }

    let timings = if cfg.measure_timings {
        let fitted = last_fitted.expect("at least one split ran");
        let model = TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            config: cfg.clone(),
            codebook: fitted.codebook.clone(),
            fusion: fitted.weights.clone(),
            classifier: fitted.fused_model.clone(),
        };
        Some(time_stages(&model, &dataset[0])?)
    } else {
        None
    };

    Ok(EvalReport {
        splits: cfg.splits,
        labels: table.names().to_vec(),
        appearance: ModeStats::from_values(appearance_acc),
        motion: ModeStats::from_values(motion_acc),
        fused: ModeStats::from_values(fused_acc),
        fusion_weights_per_split: weights_history,
        cue_accuracies_per_split: cue_history,
        confusion,
        timings,
    })
}

fn median_of_5(mut times: [f64; 5]) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[2]
}

fn time_runs(mut f: impl FnMut()) -> f64 {
    let mut runs = [0.0; 5];
    for slot in runs.iter_mut() {
        let start = Instant::now();
        f();
        *slot = start.elapsed().as_secs_f64();
    }
    median_of_5(runs)
}

/// Median-of-5 wall-clock timings of the four pipeline stages on one
/// sequence.
pub fn time_stages(model: &TrainedModel, seq: &FrameSequence) -> Result<StageTimings> {
    let cfg = &model.config;

    let entropy_s = time_runs(|| {
        std::hint::black_box(crate::entropy::entropy_curve(seq));
    });

    let curve = crate::entropy::entropy_curve(seq);
    let density_clustering_s = time_runs(|| {
        std::hint::black_box(crate::keyframes::keyframes_from_curve(&curve, cfg.n_keyframes, cfg.kernel, cfg.d_c));
    });

    let features = extract_features(seq, cfg)?;
    let feature_extraction_s = time_runs(|| {
        let f = extract_features(seq, cfg).expect("featurization already succeeded once");
        std::hint::black_box(fused_histogram(&f, &model.codebook, &model.fusion, cfg).expect("fuse"));
    });

    let fused = fused_histogram(&features, &model.codebook, &model.fusion, cfg)?;
    let svm_classification_s = time_runs(|| {
        std::hint::black_box(predict(&model.classifier, &fused).expect("dims validated"));
    });

    Ok(StageTimings { entropy_s, density_clustering_s, feature_extraction_s, svm_classification_s })
}
