//! Density-peaks clustering of 2-D points.
//!
//! Each point gets a local density `rho` (cutoff or gaussian kernel) and a
//! separation `delta`, the distance to the nearest point of higher
//! density. Centers are the points with the largest `delta`; labels
//! spread from high to low density. Everything is deterministic: density
//! ties are broken by point index, so "higher density" is a total order.

use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyCurve, ExtremeSet};
use crate::error::{Error, Result};

/// Density kernel of the local-density estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DensityKernel {
    Cutoff,
    /// Continuous kernel; the default since it makes density ties unlikely.
    #[default]
    Gaussian,
}

impl std::str::FromStr for DensityKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cutoff" => Ok(Self::Cutoff),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::InvalidConfig(format!("unknown kernel {other:?} (use cutoff or gaussian)"))),
        }
    }
}

impl std::fmt::Display for DensityKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Cutoff => write!(f, "cutoff"),
            Self::Gaussian => write!(f, "gaussian"),
        }
    }
}

/// A point in the (normalized frame index, normalized entropy) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Symmetric pairwise Euclidean distance table.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Largest pairwise distance (0 for a single point).
    pub fn max_distance(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Map extreme points into the unit square: frame index i (1-based, over a
/// curve of length n) goes to (i-1)/(n-1) and entropy is min-max scaled
/// over the whole curve. A constant curve puts every y at 0. Without this
/// the index axis would dominate the Euclidean metric.
pub fn normalized_points(curve: &EntropyCurve, extrema: &ExtremeSet) -> Vec<Point2D> {
    let n = curve.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in curve.values() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    extrema
        .points()
        .iter()
        .map(|p| {
            let x = if n > 1 { (p.frame_index - 1) as f64 / (n - 1) as f64 } else { 0.0 };
            let y = if span > 0.0 { (p.entropy - lo) / span } else { 0.0 };
            Point2D::new(x, y)
        })
        .collect()
}

/// Full pairwise Euclidean distance table.
pub fn pairwise_distances(points: &[Point2D]) -> Result<DistanceMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let n = points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].distance(&points[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// Neighborhood radius heuristic: the 2nd percentile of the sorted nonzero
/// pairwise distances (position ceil(0.02*len), 1-based), floored at 1e-6.
pub fn cutoff_distance(distances: &DistanceMatrix) -> f64 {
    const FLOOR: f64 = 1e-6;
    let n = distances.len();
    let mut nonzero: Vec<f64> = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distances.get(i, j);
            if d > 0.0 {
                nonzero.push(d);
            }
        }
    }
    if nonzero.is_empty() {
        return FLOOR;
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((nonzero.len() as f64) * 0.02).ceil() as usize;
    let idx = rank.clamp(1, nonzero.len()) - 1;
    nonzero[idx].max(FLOOR)
}

/// Per-point density and separation quantities.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    /// Local density per point. Integer-valued under the cutoff kernel.
    pub rho: Vec<f64>,
    /// Distance to the nearest point of higher (tie-broken) density; the
    /// densest point gets the maximum pairwise distance.
    pub delta: Vec<f64>,
    /// Index of that nearest higher-density point; `None` marks the
    /// densest point.
    pub nearest_higher: Vec<Option<usize>>,
    /// Point indices sorted by descending density, ties by ascending index.
    pub order: Vec<usize>,
}

/// True when point `a` precedes point `b` in the density order.
#[inline]
fn denser(rho: &[f64], a: usize, b: usize) -> bool {
    rho[a] > rho[b] || (rho[a] == rho[b] && a < b)
}

/// Local density of every point.
///
/// Cutoff: the number of other points strictly closer than `d_c`.
/// Gaussian: sum over other points of exp(-(d/d_c)^2).
pub fn local_density(distances: &DistanceMatrix, d_c: f64, kernel: DensityKernel) -> Result<Vec<f64>> {
    if d_c <= 0.0 {
        return Err(Error::NonPositiveCutoff(d_c));
    }
    let n = distances.len();
    let mut rho = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = 0.0;
        for l in 0..n {
            if l == k {
                continue;
            }
            let d = distances.get(k, l);
            match kernel {
                DensityKernel::Cutoff => {
                    if d < d_c {
                        acc += 1.0;
                    }
                }
                DensityKernel::Gaussian => {
                    let r = d / d_c;
                    acc += (-r * r).exp();
                }
            }
        }
        rho.push(acc);
    }
    Ok(rho)
}

/// Separation distance and nearest-higher link for every point.
///
/// Equidistant higher-density candidates resolve to the lowest index.
pub fn separation_delta(distances: &DistanceMatrix, rho: &[f64]) -> Result<(Vec<f64>, Vec<Option<usize>>)> {
    let n = distances.len();
    if rho.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.len() });
    }
    let mut delta = vec![0.0; n];
    let mut nearest = vec![None; n];
    for k in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for l in 0..n {
            if l == k || !denser(rho, l, k) {
                continue;
            }
            let d = distances.get(k, l);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, l));
            }
        }
        match best {
            Some((d, l)) => {
                delta[k] = d;
                nearest[k] = Some(l);
            }
            None => {
                // The densest point under the tie-broken order.
                delta[k] = distances.max_distance();
                nearest[k] = None;
            }
        }
    }
    Ok((delta, nearest))
}

/// Compute the full (rho, delta, nearest-higher, order) profile.
pub fn density_profile(distances: &DistanceMatrix, d_c: f64, kernel: DensityKernel) -> Result<DensityProfile> {
    let rho = local_density(distances, d_c, kernel)?;
    let (delta, nearest_higher) = separation_delta(distances, &rho)?;
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| {
        rho[b].partial_cmp(&rho[a]).unwrap().then(a.cmp(&b))
    });
    Ok(DensityProfile { rho, delta, nearest_higher, order })
}

/// Cluster centers and per-point assignments. `assignment[i]` holds the
/// point index of i's center, so every center is assigned to itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub centers: Vec<usize>,
    pub assignment: Vec<usize>,
}

/// Indices of the `n_centers` largest delta values, ties by higher rho
/// then lower index. Asking for more centers than points yields all points.
pub fn select_centers(profile: &DensityProfile, n_centers: usize) -> Vec<usize> {
    let m = profile.delta.len();
    let mut by_delta: Vec<usize> = (0..m).collect();
    by_delta.sort_by(|&a, &b| {
        profile.delta[b]
            .partial_cmp(&profile.delta[a])
            .unwrap()
            .then(profile.rho[b].partial_cmp(&profile.rho[a]).unwrap())
            .then(a.cmp(&b))
    });
    by_delta.truncate(n_centers.min(m));
    by_delta
}

/// Spread labels down the density ordering: a center keeps itself, every
/// other point adopts the assignment of its nearest higher-density point,
/// which has already been visited.
pub fn propagate_labels(profile: &DensityProfile, centers: &[usize]) -> Result<Clustering> {
    if centers.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let m = profile.rho.len();
    let is_center = {
        let mut v = vec![false; m];
        for &c in centers {
            v[c] = true;
        }
        v
    };
    let mut assignment = vec![usize::MAX; m];
    for &p in &profile.order {
        if is_center[p] {
            assignment[p] = p;
        } else {
            // Only the densest point lacks a denser neighbor, and center
            // selection always includes it (its delta is the global
            // maximum); an arbitrary center list might not.
            let up = profile.nearest_higher[p].ok_or_else(|| {
                Error::InvalidConfig("the densest point must be among the centers".into())
            })?;
            assignment[p] = assignment[up];
        }
    }
    Ok(Clustering { centers: centers.to_vec(), assignment })
}
