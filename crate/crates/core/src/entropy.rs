//! Per-frame image entropy and local extreme points of the entropy curve.
//!
//! Entropy is the Shannon entropy, in bits, of a frame's 256-bin intensity
//! histogram. Frame indices are 1-based throughout, matching the curve's
//! E(f_i) vs i reading.

use crate::sequence::{Frame, FrameSequence};

/// Shannon entropy of the frame's intensity histogram, in bits.
/// Empty bins contribute nothing; the result lies in [0, 8].
pub fn image_entropy(frame: &Frame) -> f64 {
    let mut hist = [0u64; 256];
    for &p in frame.pixels() {
        hist[p as usize] += 1;
    }
    let total = frame.pixels().len() as f64;
    let mut h = 0.0;
    for &count in hist.iter() {
        if count > 0 {
            let p = count as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Entropy values of one sequence, one per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    values: Vec<f64>,
}

impl EntropyCurve {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value for 1-based frame index `i`.
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - 1]
    }
}

/// Entropy of every frame, in order.
pub fn entropy_curve(seq: &FrameSequence) -> EntropyCurve {
    EntropyCurve::new(seq.frames().iter().map(image_entropy).collect())
}

/// Whether an extreme point is a local maximum or minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremeKind {
    Maximum,
    Minimum,
}

/// One local extreme of the entropy curve. `frame_index` is 1-based and
/// always interior (2..=n-1): endpoints have only one neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremePoint {
    pub frame_index: usize,
    pub entropy: f64,
}

/// Local maxima and minima of a curve, sorted by frame index.
/// The two kinds are disjoint since both tests are strict.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeSet {
    points: Vec<ExtremePoint>,
    kinds: Vec<ExtremeKind>,
}

impl ExtremeSet {
    pub fn points(&self) -> &[ExtremePoint] {
        &self.points
    }

    pub fn kinds(&self) -> &[ExtremeKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExtremePoint, ExtremeKind)> {
        self.points.iter().zip(self.kinds.iter().copied())
    }

    /// 1-based frame indices, ascending.
    pub fn frame_indices(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.frame_index).collect()
    }
}

/// Interior points strictly above both neighbors are maxima, strictly
/// below both are minima. Plateaus and monotone stretches yield nothing;
/// an empty result is valid here and handled by the caller.
pub fn local_extrema(curve: &EntropyCurve) -> ExtremeSet {
    let v = curve.values();
    let mut points = Vec::new();
    let mut kinds = Vec::new();
    if v.len() >= 3 {
        for i in 1..v.len() - 1 {
            if v[i] > v[i - 1] && v[i] > v[i + 1] {
                points.push(ExtremePoint { frame_index: i + 1, entropy: v[i] });
                kinds.push(ExtremeKind::Maximum);
            } else if v[i] < v[i - 1] && v[i] < v[i + 1] {
                points.push(ExtremePoint { frame_index: i + 1, entropy: v[i] });
                kinds.push(ExtremeKind::Minimum);
            }
        }
    }
    ExtremeSet { points, kinds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Frame;
    use proptest::prelude::*;

    fn frame_of(pixels: Vec<u8>, w: usize, h: usize) -> Frame {
        Frame::new(w, h, pixels).unwrap()
    }

    #[test]
    fn entropy_identities() {
        // Single bin.
        let constant = frame_of(vec![128; 64], 8, 8);
        assert!(image_entropy(&constant).abs() < 1e-12);

        // Two equal bins.
        let mut half = vec![0u8; 64];
        half[32..].fill(255);
        assert!((image_entropy(&frame_of(half, 8, 8)) - 1.0).abs() < 1e-12);

        // 256 distinct levels, one pixel each.
        let all: Vec<u8> = (0..=255).collect();
        assert!((image_entropy(&frame_of(all, 16, 16)) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn curve_is_pointwise() {
        let frames = vec![
            frame_of(vec![0; 9], 3, 3),
            frame_of(vec![7; 9], 3, 3),
            frame_of(vec![9; 9], 3, 3),
        ];
        let seq = FrameSequence::new(frames, "s", None).unwrap();
        assert_eq!(entropy_curve(&seq).values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn extrema_direct_application() {
        let set = local_extrema(&EntropyCurve::new(vec![1.0, 3.0, 2.0, 4.0, 1.0]));
        assert_eq!(set.frame_indices(), vec![2, 3, 4]);
        assert_eq!(set.kinds(), &[ExtremeKind::Maximum, ExtremeKind::Minimum, ExtremeKind::Maximum]);
    }

    #[test]
    fn monotone_and_plateau_yield_nothing() {
        assert!(local_extrema(&EntropyCurve::new(vec![1.0, 2.0, 3.0, 4.0, 5.0])).is_empty());
        assert!(local_extrema(&EntropyCurve::new(vec![2.0, 2.0, 2.0, 2.0])).is_empty());
    }

    #[test]
    fn endpoints_never_extreme() {
        let set = local_extrema(&EntropyCurve::new(vec![9.0, 1.0, 8.0]));
        assert_eq!(set.frame_indices(), vec![2]);
        assert_eq!(set.kinds(), &[ExtremeKind::Minimum]);
    }

    proptest! {
        #[test]
        fn entropy_is_histogram_only(mut pixels in proptest::collection::vec(any::<u8>(), 36..=36), swap in 0usize..36, with in 0usize..36) {
            let before = image_entropy(&frame_of(pixels.clone(), 6, 6));
            pixels.swap(swap, with);
            let after = image_entropy(&frame_of(pixels, 6, 6));
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn entropy_invariant_under_intensity_relabeling(pixels in proptest::collection::vec(any::<u8>(), 25..=25), offset in 1u8..=255) {
            // Adding a constant mod 256 is a bijection on intensities.
            let before = image_entropy(&frame_of(pixels.clone(), 5, 5));
            let relabeled: Vec<u8> = pixels.iter().map(|&p| p.wrapping_add(offset)).collect();
            let after = image_entropy(&frame_of(relabeled, 5, 5));
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn entropy_bounded(pixels in proptest::collection::vec(any::<u8>(), 9..=9)) {
            let h = image_entropy(&frame_of(pixels, 3, 3));
            prop_assert!((0.0..=8.0 + 1e-12).contains(&h));
        }

        #[test]
        fn maxima_minima_disjoint_and_shift_invariant(values in proptest::collection::vec(0.0f64..8.0, 3..40), shift in -100.0f64..100.0) {
            let set = local_extrema(&EntropyCurve::new(values.clone()));
            let max_idx: Vec<usize> = set.iter().filter(|(_, k)| *k == ExtremeKind::Maximum).map(|(p, _)| p.frame_index).collect();
            let min_idx: Vec<usize> = set.iter().filter(|(_, k)| *k == ExtremeKind::Minimum).map(|(p, _)| p.frame_index).collect();
            prop_assert!(max_idx.iter().all(|i| !min_idx.contains(i)));

            let indices = set.frame_indices();
            prop_assert!(indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(indices.iter().all(|&i| 2 <= i && i < values.len()));

            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let set2 = local_extrema(&EntropyCurve::new(shifted));
            prop_assert_eq!(indices, set2.frame_indices());
            prop_assert_eq!(set.kinds(), set2.kinds());
        }
    }
}
