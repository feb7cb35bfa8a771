//! Bag-of-features encoding: a k-means visual codebook plus normalized
//! nearest-codeword histograms.
//!
//! Training is fully deterministic given the seed: k-means++ seeding from
//! a ChaCha stream, Lloyd iterations to an assignment fixpoint (at most
//! 100), empty clusters reseeded to the point farthest from its assigned
//! centroid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::descriptors::PatchDescriptor;
use crate::error::{Error, Result};
use crate::keyframes::KeyFrameSet;
use crate::sequence::FrameSequence;

const MAX_LLOYD_ITERATIONS: usize = 100;

/// A visual dictionary of `dim`-dimensional centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centroids: Vec<Vec<f64>>,
    dim: usize,
    seed: u64,
}

impl Codebook {
    pub fn from_parts(centroids: Vec<Vec<f64>>, dim: usize, seed: u64) -> Self {
        Self { centroids, dim, seed }
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Dictionary size D.
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }
}

/// L1-normalized histogram of nearest-codeword votes.
#[derive(Debug, Clone, PartialEq)]
pub struct BofHistogram {
    weights: Vec<f64>,
}

impl BofHistogram {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid index, equidistant ties to the lowest index.
#[inline]
fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn kmeans_plus_plus(points: &[Vec<f64>], d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(d);
    centroids.push(points[rng.random_range(0..points.len())].clone());
    let mut min_sq = vec![0.0f64; points.len()];
    while centroids.len() < d {
        let newest = centroids.last().unwrap();
        let mut total = 0.0;
        for (p, slot) in points.iter().zip(min_sq.iter_mut()) {
            let d_new = sq_dist(p, newest);
            *slot = if centroids.len() == 1 { d_new } else { slot.min(d_new) };
            total += *slot;
        }
        if total <= 0.0 {
            // Every point coincides with a centroid already; duplicates
            // are unavoidable from here on.
            centroids.push(points[0].clone());
            continue;
        }
        // Weighted pick proportional to squared distance.
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = points.len() - 1;
        for (i, &w) in min_sq.iter().enumerate() {
            acc += w;
            if target < acc {
                chosen = i;
                break;
            }
        }
        centroids.push(points[chosen].clone());
    }
    centroids
}

fn recompute_centroids(points: &[Vec<f64>], assignment: &[usize], d: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; dim]; d];
    let mut counts = vec![0usize; d];
    for (p, &a) in points.iter().zip(assignment.iter()) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p.iter()) {
            *s += v;
        }
    }
    for (sum, &count) in sums.iter_mut().zip(counts.iter()) {
        if count > 0 {
            for s in sum.iter_mut() {
                *s /= count as f64;
            }
        }
    }
    (sums, counts)
}

/// Train a codebook of `d` visual words.
///
/// Asking for more words than there are distinct descriptors leaves
/// duplicate centroids and logs a warning.
pub fn train_codebook(descriptors: &[Vec<f64>], d: usize, seed: u64) -> Result<Codebook> {
    if descriptors.is_empty() {
        return Err(Error::EmptyDescriptorSet);
    }
    if d == 0 {
        return Err(Error::InvalidDictionarySize);
    }
    let dim = descriptors[0].len();
    for desc in descriptors {
        if desc.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: desc.len() });
        }
    }

    let distinct = {
        let mut keys: Vec<Vec<u64>> = descriptors
            .iter()
            .map(|desc| desc.iter().map(|v| v.to_bits()).collect())
            .collect();
        keys.sort();
        keys.dedup();
        keys.len()
    };
    if d > distinct {
        log::warn!("dictionary size {d} exceeds the {distinct} distinct descriptors; duplicate centroids will remain");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(descriptors, d, &mut rng);
    let mut assignment: Vec<usize> = descriptors.iter().map(|p| nearest_centroid(p, &centroids)).collect();

    for _ in 0..MAX_LLOYD_ITERATIONS {
        let (mut new_centroids, counts) = recompute_centroids(descriptors, &assignment, d, dim);

        // Reseed empty clusters to the point farthest from its assigned
        // centroid; each reseed consumes that point.
        let mut taken = vec![false; descriptors.len()];
        for cluster in 0..d {
            if counts[cluster] > 0 {
                continue;
            }
            let mut far_idx = None;
            let mut far_d = -1.0;
            for (i, p) in descriptors.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let dist = sq_dist(p, &new_centroids[assignment[i]]);
                if dist > far_d {
                    far_d = dist;
                    far_idx = Some(i);
                }
            }
            if let Some(i) = far_idx {
                new_centroids[cluster] = descriptors[i].clone();
                taken[i] = true;
            }
        }

        let new_assignment: Vec<usize> =
            descriptors.iter().map(|p| nearest_centroid(p, &new_centroids)).collect();
        let converged = new_assignment == assignment;
        centroids = new_centroids;
        assignment = new_assignment;
        if converged {
            break;
        }
    }

    Ok(Codebook { centroids, dim, seed })
}

/// Within-cluster sum of squared distances for a given assignment.
pub fn kmeans_sse(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points.iter().zip(assignment.iter()).map(|(p, &a)| sq_dist(p, &centroids[a])).sum()
}

/// Nearest-centroid assignment of every point.
pub fn assign_to_codebook(points: &[Vec<f64>], codebook: &Codebook) -> Vec<usize> {
    points.iter().map(|p| nearest_centroid(p, codebook.centroids())).collect()
}

/// Encode a descriptor set as an L1-normalized vote histogram. The empty
/// set encodes to all zeros.
pub fn encode(descriptors: &[Vec<f64>], codebook: &Codebook) -> Result<BofHistogram> {
    let mut weights = vec![0.0; codebook.len()];
    if descriptors.is_empty() {
        return Ok(BofHistogram { weights });
    }
    for desc in descriptors {
        if desc.len() != codebook.dim() {
            return Err(Error::DimensionMismatch { expected: codebook.dim(), found: desc.len() });
        }
        weights[nearest_centroid(desc, codebook.centroids())] += 1.0;
    }
    let total = descriptors.len() as f64;
    for w in &mut weights {
        *w /= total;
    }
    Ok(BofHistogram { weights })
}

/// hist1: per-key-frame BoF histograms of dense patch descriptors,
/// concatenated in temporal order. Length = (number of key frames) x D.
pub fn appearance_histogram(keyseq: &FrameSequence, codebook: &Codebook, stride: usize) -> Result<Vec<f64>> {
    let mut hist = Vec::with_capacity(keyseq.len() * codebook.len());
    for frame in keyseq.frames() {
        let descs = crate::descriptors::dense_patch_descriptors(frame, stride)?;
        let vectors: Vec<Vec<f64>> = descs.into_iter().map(|d| d.vector).collect();
        hist.extend_from_slice(encode(&vectors, codebook)?.weights());
    }
    Ok(hist)
}

/// Attach 1-based key-frame indices to dense descriptors of a subsampled
/// sequence, for callers that keep descriptor provenance.
pub fn keyframe_descriptors(keyseq: &FrameSequence, keys: &KeyFrameSet, stride: usize) -> Result<Vec<PatchDescriptor>> {
    let mut all = Vec::new();
    for (frame, &src_idx) in keyseq.frames().iter().zip(keys.indices.iter()) {
        let mut descs = crate::descriptors::dense_patch_descriptors(frame, stride)?;
        for d in &mut descs {
            d.frame_index = src_idx;
        }
        all.extend(descs);
    }
    Ok(all)
}
