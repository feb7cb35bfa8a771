//! Key-frame extraction: entropy curve -> local extrema -> density-peaks
//! clustering -> the frame indices of the selected cluster centers.
//!
//! Degenerate inputs (flat or monotone entropy, fewer extrema than
//! requested frames) never fail; they take an evenly-spaced fallback.

use crate::density::{
    cutoff_distance, density_profile, normalized_points, pairwise_distances, select_centers,
    DensityKernel,
};
use crate::entropy::{entropy_curve, local_extrema, EntropyCurve};
use crate::error::{Error, Result};
use crate::sequence::FrameSequence;

/// Selected key frames of one sequence. Indices are 1-based, strictly
/// increasing, and there are exactly `min(n_requested, sequence length)`
/// of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFrameSet {
    pub indices: Vec<usize>,
    pub n_requested: usize,
    pub fallback_used: bool,
}

/// Extract `n` key frames using the default cutoff-distance heuristic.
pub fn extract_keyframes(seq: &FrameSequence, n: usize, kernel: DensityKernel) -> Result<KeyFrameSet> {
    extract_keyframes_with(seq, n, kernel, None)
}

/// As [`extract_keyframes`], with an explicit cutoff-distance override.
pub fn extract_keyframes_with(
    seq: &FrameSequence,
    n: usize,
    kernel: DensityKernel,
    d_c: Option<f64>,
) -> Result<KeyFrameSet> {
    if n == 0 {
        return Err(Error::InvalidConfig("number of key frames must be at least 1".into()));
    }
    let curve = entropy_curve(seq);
    Ok(keyframes_from_curve(&curve, n, kernel, d_c))
}

/// Run the selection on an already-computed entropy curve.
pub fn keyframes_from_curve(
    curve: &EntropyCurve,
    n: usize,
    kernel: DensityKernel,
    d_c: Option<f64>,
) -> KeyFrameSet {
    let extrema = local_extrema(curve);
    let target = n.min(curve.len());

    if extrema.len() >= n {
        let points = normalized_points(curve, &extrema);
        let distances = pairwise_distances(&points).expect("extrema set is non-empty here");
        let d_c = d_c.unwrap_or_else(|| cutoff_distance(&distances));
        // A non-positive cutoff cannot happen: the heuristic floors at 1e-6.
        if let Ok(profile) = density_profile(&distances, d_c, kernel) {
            let centers = select_centers(&profile, n);
            let mut indices: Vec<usize> =
                centers.iter().map(|&c| extrema.points()[c].frame_index).collect();
            indices.sort_unstable();
            return KeyFrameSet { indices, n_requested: n, fallback_used: false };
        }
    }

    KeyFrameSet {
        indices: fallback_indices(extrema.frame_indices(), curve.len(), target),
        n_requested: n,
        fallback_used: true,
    }
}

/// Fallback selection: keep every extreme-point index, fill the missing
/// slots with evenly spaced interior indices (ties-to-even rounding over
/// [2, n-1], mirroring the extrema domain), skip duplicates, and top up
/// with the lowest unused indices.
fn fallback_indices(extreme_indices: Vec<usize>, n_frames: usize, target: usize) -> Vec<usize> {
    let mut chosen = vec![false; n_frames + 1];
    let mut out = Vec::with_capacity(target);
    for idx in extreme_indices {
        if !chosen[idx] {
            chosen[idx] = true;
            out.push(idx);
        }
        if out.len() == target {
            break;
        }
    }

    let missing = target - out.len();
    if missing > 0 && n_frames >= 3 {
        let lo = 2.0;
        let hi = (n_frames - 1) as f64;
        for k in 0..missing {
            let pos = if missing == 1 {
                (lo + hi) / 2.0
            } else {
                lo + (hi - lo) * k as f64 / (missing - 1) as f64
            };
            let idx = (pos.round_ties_even() as usize).clamp(1, n_frames);
            if !chosen[idx] {
                chosen[idx] = true;
                out.push(idx);
            }
        }
    }

    let mut next_unused = 1;
    while out.len() < target {
        while chosen[next_unused] {
            next_unused += 1;
        }
        chosen[next_unused] = true;
        out.push(next_unused);
    }

    out.sort_unstable();
    out
}

/// Replace a sequence by its key frames, preserving order, label, and
/// source id.
pub fn subsample(seq: &FrameSequence, keys: &KeyFrameSet) -> Result<FrameSequence> {
    if keys.indices.is_empty() {
        return Err(Error::EmptyKeySet);
    }
    let n = seq.len();
    let mut frames = Vec::with_capacity(keys.indices.len());
    for &idx in &keys.indices {
        if idx == 0 || idx > n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
        frames.push(seq.frames()[idx - 1].clone());
    }
    FrameSequence::new(frames, seq.source_id().to_string(), seq.label().map(|s| s.to_string()))
}
