//! Key-frame extraction and dynamic hand gesture recognition.
//!
//! The pipeline selects representative frames from a gesture video by
//! clustering the local extrema of the per-frame entropy curve with
//! density peaks, then classifies the gesture from a weighted fusion of
//! appearance (per-key-frame bag-of-features over dense patch gradients)
//! and motion (LBP-TOP) histograms with one-vs-rest linear SVMs.

pub mod bof;
pub mod config;
pub mod density;
pub mod descriptors;
pub mod entropy;
pub mod error;
pub mod fusion;
pub mod keyframes;
pub mod model_io;
pub mod pipeline;
pub mod sequence;
pub mod svm;
pub mod synth;

pub use bof::{appearance_histogram, encode, train_codebook, BofHistogram, Codebook};
pub use density::{
    cutoff_distance, density_profile, local_density, normalized_points, pairwise_distances,
    propagate_labels, select_centers, separation_delta, Clustering, DensityKernel, DensityProfile,
    DistanceMatrix, Point2D,
};
pub use descriptors::{
    dense_patch_descriptors, lbp_code, lbp_top, uniform_bin, LbpTopHistogram, PatchDescriptor,
    LBP_TOP_LEN, PATCH_DESC_LEN, PATCH_SIZE, UNIFORM_BINS,
};
pub use entropy::{entropy_curve, image_entropy, local_extrema, EntropyCurve, ExtremeKind, ExtremePoint, ExtremeSet};
pub use error::{Error, Result};
pub use fusion::{fuse, fusion_weights, CueAccuracies, FusionWeights};
pub use keyframes::{extract_keyframes, extract_keyframes_with, subsample, KeyFrameSet};
pub use model_io::{load_model, model_from_bytes, model_to_bytes, save_model};
pub use pipeline::{
    evaluate, extract_features, predict_sequence, time_stages, train, EvalReport, ModeStats,
    PipelineConfig, StageTimings, TrainedModel, MODEL_FORMAT_VERSION,
};
pub use sequence::{
    load_dataset, load_sequence, save_sequence_pgm, to_grayscale_stack, Frame, FrameSequence, Volume,
};
pub use svm::{accuracy, predict, train_svm, GestureLabel, LabelTable, LinearModel};
pub use synth::generate_synthetic;
