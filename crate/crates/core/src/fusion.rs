//! Cue weighting and fusion. Single-cue validation accuracies map to
//! small integer weights: the worst cue always gets 1, the rest scale
//! linearly with their margin over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-cue classification accuracies, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct CueAccuracies {
    values: Vec<f64>,
}

impl CueAccuracies {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoCues);
        }
        for &v in &values {
            if !(0.0..=100.0).contains(&v) || !v.is_finite() {
                return Err(Error::AccuracyOutOfRange(v));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Positive integer multipliers, one per cue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionWeights {
    weights: Vec<u32>,
}

impl FusionWeights {
    pub fn from_weights(weights: Vec<u32>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Half-away-from-zero rounding, fixed for cross-platform bit-exactness.
#[inline]
fn round_half_away(v: f64) -> f64 {
    v.round()
}

/// Weights from accuracies:
///
/// T  = (R - min(R)) / ((100 - min(R)) / 10)
/// T1 = round(T)
/// T2 = T * (max(T1) - 1) / max(T) + 1
/// W  = round(T2), clamped to at least 1 per cue
///
/// All-equal accuracies (which includes an all-100 sweep) short-circuit
/// to all-ones: equal evidence gets equal weight and the formulas would
/// otherwise divide by zero.
pub fn fusion_weights(r: &CueAccuracies) -> FusionWeights {
    let values = r.values();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return FusionWeights { weights: vec![1; values.len()] };
    }

    let denom = (100.0 - min) / 10.0;
    let t: Vec<f64> = values.iter().map(|&v| (v - min) / denom).collect();
    let t1: Vec<f64> = t.iter().map(|&v| round_half_away(v)).collect();
    let max_t = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_t1 = t1.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights = t
        .iter()
        .map(|&v| {
            let t2 = v * (max_t1 - 1.0) / max_t + 1.0;
            round_half_away(t2).max(1.0) as u32
        })
        .collect();
    FusionWeights { weights }
}

/// hist = [alpha * hist1 || beta * hist2].
pub fn fuse(hist1: &[f64], hist2: &[f64], w: &FusionWeights) -> Result<Vec<f64>> {
    if w.len() != 2 {
        return Err(Error::WrongWeightCount { expected: 2, found: w.len() });
    }
    let (alpha, beta) = (w.weights()[0] as f64, w.weights()[1] as f64);
    let mut out = Vec::with_capacity(hist1.len() + hist2.len());
    out.extend(hist1.iter().map(|v| alpha * v));
    out.extend(hist2.iter().map(|v| beta * v));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn weights_of(values: &[f64]) -> Vec<u32> {
        fusion_weights(&CueAccuracies::new(values.to_vec()).unwrap()).weights().to_vec()
    }

    #[test]
    fn benchmark_cue_accuracies_give_8_and_1() {
        // T = {8.054..., 0}, T1 = {8, 0}, T2 = {8.0, 1.0}, W = {8, 1}.
        assert_eq!(weights_of(&[92.37, 60.78]), vec![8, 1]);
    }

    #[test]
    fn extreme_pair_gives_10_and_1() {
        // T = {10, 0}, T1 = {10, 0}, T2 = {10, 1}, W = {10, 1}.
        assert_eq!(weights_of(&[100.0, 0.0]), vec![10, 1]);
    }

    #[test]
    fn degenerate_cases_collapse_to_ones() {
        // All equal.
        assert_eq!(weights_of(&[50.0, 50.0]), vec![1, 1]);
        // Both perfect: min(R) = 100 would divide by zero.
        assert_eq!(weights_of(&[100.0, 100.0]), vec![1, 1]);
        // max(T1) = 0 with max(T) > 0: T = {0, 0.38}; the raw formula
        // would invert the order, the clamp pins both to 1.
        assert_eq!(weights_of(&[50.0, 51.9]), vec![1, 1]);
    }

    #[test]
    fn single_cue_gets_weight_one() {
        assert_eq!(weights_of(&[73.5]), vec![1]);
    }

    #[test]
    fn out_of_range_accuracy_rejected() {
        assert!(matches!(CueAccuracies::new(vec![101.0, 50.0]), Err(Error::AccuracyOutOfRange(_))));
        assert!(matches!(CueAccuracies::new(vec![-0.5]), Err(Error::AccuracyOutOfRange(_))));
        assert!(matches!(CueAccuracies::new(vec![]), Err(Error::NoCues)));
    }

    #[test]
    fn fuse_concatenates_weighted_blocks() {
        let w = FusionWeights::from_weights(vec![8, 1]);
        let fused = fuse(&[0.5, 0.5], &[1.0, 0.0], &w).unwrap();
        assert_eq!(fused, vec![4.0, 4.0, 1.0, 0.0]);

        let ones = FusionWeights::from_weights(vec![1, 1]);
        let plain = fuse(&[0.25, 0.75], &[0.1], &ones).unwrap();
        assert_eq!(plain, vec![0.25, 0.75, 0.1]);

        let bad = FusionWeights::from_weights(vec![1, 2, 3]);
        assert!(matches!(fuse(&[1.0], &[1.0], &bad), Err(Error::WrongWeightCount { .. })));
    }

    #[test]
    fn fused_length_matches_expected_dimensions() {
        // N=5, D=16 appearance plus 177-d motion: 257 total.
        let hist1 = vec![0.0; 5 * 16];
        let hist2 = vec![0.0; 177];
        let fused = fuse(&hist1, &hist2, &FusionWeights::from_weights(vec![8, 1])).unwrap();
        assert_eq!(fused.len(), 257);
    }

    proptest! {
        #[test]
        fn worst_cue_gets_one_and_max_matches_t1(values in proptest::collection::vec(0.0f64..=100.0, 2..5)) {
            let r = CueAccuracies::new(values.clone()).unwrap();
            let w = fusion_weights(&r);
            prop_assert!(w.weights().iter().all(|&x| x >= 1));

            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if min != max {
                // The (first) minimal-accuracy cue carries weight exactly 1.
                let argmin = values.iter().position(|&v| v == min).unwrap();
                prop_assert_eq!(w.weights()[argmin], 1);

                // max(W) = max(T1) whenever the scaling is not clamped away.
                let denom = (100.0 - min) / 10.0;
                let t: Vec<f64> = values.iter().map(|&v| (v - min) / denom).collect();
                let max_t1 = t.iter().map(|&v| v.round()).fold(f64::NEG_INFINITY, f64::max);
                if max_t1 >= 1.0 {
                    let max_w = *w.weights().iter().max().unwrap();
                    prop_assert_eq!(max_w, max_t1 as u32);
                }
            }
        }

        #[test]
        fn weights_invariant_under_cue_permutation(values in proptest::collection::vec(0.0f64..=100.0, 2..5), rot in 0usize..5) {
            let w1 = weights_of(&values);
            let mut rotated = values.clone();
            rotated.rotate_left(rot % values.len());
            let mut w2 = weights_of(&rotated);
            w2.rotate_right(rot % values.len());
            prop_assert_eq!(w1, w2);
        }

        #[test]
        fn fuse_is_linear_per_block(
            h1 in proptest::collection::vec(-3.0f64..3.0, 1..6),
            h2 in proptest::collection::vec(-3.0f64..3.0, 1..6),
            scale in 0.5f64..2.0,
        ) {
            let w = FusionWeights::from_weights(vec![3, 2]);
            let base = fuse(&h1, &h2, &w).unwrap();
            let scaled_h1: Vec<f64> = h1.iter().map(|v| v * scale).collect();
            let fused = fuse(&scaled_h1, &h2, &w).unwrap();
            for i in 0..h1.len() {
                prop_assert!((fused[i] - base[i] * scale).abs() < 1e-12);
            }
            for i in h1.len()..base.len() {
                prop_assert!((fused[i] - base[i]).abs() < 1e-12);
            }
        }
    }
}
