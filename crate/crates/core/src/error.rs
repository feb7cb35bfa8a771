//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// All failure modes surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("directory not found or not readable: {0}")]
    MissingDirectory(PathBuf),

    #[error("sequence too short: found {found} frames, need at least {min}")]
    SequenceTooShort { found: usize, min: usize },

    #[error("cannot decode frame {path}: {reason}")]
    UndecodableFrame { path: PathBuf, reason: String },

    #[error("frame {path} is {found_w}x{found_h} but the sequence is {expected_w}x{expected_h} and no target size was given")]
    InconsistentDimensions {
        path: PathBuf,
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },

    #[error("frame is {width}x{height}; both sides must be at least {min}")]
    FrameTooSmall { width: usize, height: usize, min: usize },

    #[error("pixel buffer holds {found} values, expected {expected}")]
    BadPixelBuffer { expected: usize, found: usize },

    #[error("cutoff distance must be positive, got {0}")]
    NonPositiveCutoff(f64),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("frame index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("key frame set is empty")]
    EmptyKeySet,

    #[error("stride must be at least 1")]
    InvalidStride,

    #[error("frame is {width}x{height}, smaller than one {patch}x{patch} patch")]
    FrameSmallerThanPatch { width: usize, height: usize, patch: usize },

    #[error("pixel ({x}, {y}) is on the border; LBP needs all 8 neighbors")]
    BorderPixel { x: usize, y: usize },

    #[error("volume extent {extent} along {axis} is below the minimum of 3")]
    VolumeTooSmall { axis: &'static str, extent: usize },

    #[error("descriptor set is empty")]
    EmptyDescriptorSet,

    #[error("dictionary size must be at least 1")]
    InvalidDictionarySize,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("accuracy {0} outside [0, 100]")]
    AccuracyOutOfRange(f64),

    #[error("no cue accuracies given")]
    NoCues,

    #[error("expected {expected} fusion weights, found {found}")]
    WrongWeightCount { expected: usize, found: usize },

    #[error("training set contains a single class; need at least 2")]
    SingleClass,

    #[error("class id {id} has no samples")]
    EmptyClass { id: usize },

    #[error("labels are not dense 0..{expected_classes} or names are not unique")]
    BadLabelTable { expected_classes: usize },

    #[error("sequence {source_id} has no label")]
    MissingLabel { source_id: String },

    #[error("class {name} has {count} samples; need at least {min} to stratify")]
    CannotStratify { name: String, count: usize, min: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("model format version {found} not supported (expected {expected})")]
    ModelVersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
