//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see
//! them). Oracles here are written independently of the library code
//! paths they check.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use keygest::{
    density_profile, entropy_curve, evaluate, fuse, fusion_weights, generate_synthetic,
    image_entropy, keyframes::keyframes_from_curve, lbp_top, local_density, local_extrema,
    pairwise_distances, propagate_labels, select_centers, separation_delta, to_grayscale_stack,
    CueAccuracies, DensityKernel, EntropyCurve, ExtremeKind, Frame, FrameSequence, PipelineConfig,
    Point2D, LBP_TOP_LEN,
};

fn pass(name: &str, detail: String) {
    println!("acceptance: {name} ... PASS ({detail})");
}

#[test]
fn entropy_identities() {
    let start = Instant::now();

    let constant = Frame::new(8, 8, vec![128; 64]).unwrap();
    assert!(image_entropy(&constant).abs() < 1e-9);

    let mut two_bins = vec![0u8; 64];
    two_bins[32..].fill(255);
    let h2 = image_entropy(&Frame::new(8, 8, two_bins).unwrap());
    assert!((h2 - 1.0).abs() < 1e-9);

    let all_levels: Vec<u8> = (0..=255).collect();
    let h256 = image_entropy(&Frame::new(16, 16, all_levels).unwrap());
    assert!((h256 - 8.0).abs() < 1e-9);

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.3}s, budget 1s");
    pass("entropy identities", format!("0.0 / 1.0 / 8.0 bits in {elapsed:.3}s"));
}

#[test]
fn extrema_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE17A);
    for case in 0..1000 {
        let n = rng.random_range(3..=50);
        // Every third curve is drawn from a coarse value grid to force
        // plateaus and ties.
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if case % 3 == 0 {
                    rng.random_range(0..=4) as f64 * 2.0
                } else {
                    rng.random_range(0.0..8.0)
                }
            })
            .collect();

        // Literal re-evaluation of the strict neighbor tests.
        let mut expected_max = Vec::new();
        let mut expected_min = Vec::new();
        for i in 1..n - 1 {
            if values[i] > values[i + 1] && values[i] > values[i - 1] {
                expected_max.push(i + 1);
            }
            if values[i + 1] > values[i] && values[i - 1] > values[i] {
                expected_min.push(i + 1);
            }
        }

        let set = local_extrema(&EntropyCurve::new(values));
        let got_max: Vec<usize> = set
            .iter()
            .filter(|(_, k)| *k == ExtremeKind::Maximum)
            .map(|(p, _)| p.frame_index)
            .collect();
        let got_min: Vec<usize> = set
            .iter()
            .filter(|(_, k)| *k == ExtremeKind::Minimum)
            .map(|(p, _)| p.frame_index)
            .collect();
        assert_eq!(got_max, expected_max, "maxima mismatch on case {case}");
        assert_eq!(got_min, expected_min, "minima mismatch on case {case}");
        assert!(got_max.iter().all(|i| !got_min.contains(i)), "overlap on case {case}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.3}s, budget 5s");
    pass("extrema correctness", format!("1000 fuzzed curves in {elapsed:.3}s"));
}

/// Brute-force density-peaks oracle: literal density sums, separation by
/// scanning all denser points, centers by sorted delta, labels down the
/// density order. Shares no code with the library implementation.
mod oracle {
    use keygest::DensityKernel;

    pub struct Outcome {
        pub rho: Vec<f64>,
        pub delta: Vec<f64>,
        pub centers: Vec<usize>,
        pub assignment: Vec<usize>,
    }

    pub fn run(points: &[(f64, f64)], d_c: f64, kernel: DensityKernel, n_centers: usize) -> Outcome {
        let m = points.len();
        let dist = |a: usize, b: usize| -> f64 {
            let dx = points[a].0 - points[b].0;
            let dy = points[a].1 - points[b].1;
            (dx * dx + dy * dy).sqrt()
        };

        let mut rho = vec![0.0f64; m];
        for (k, slot) in rho.iter_mut().enumerate() {
            for l in 0..m {
                if l == k {
                    continue;
                }
                match kernel {
                    DensityKernel::Cutoff => {
                        if dist(k, l) - d_c < 0.0 {
                            *slot += 1.0;
                        }
                    }
                    DensityKernel::Gaussian => {
                        let r = dist(k, l) / d_c;
                        *slot += (-(r * r)).exp();
                    }
                }
            }
        }

        // Total density order: higher rho first, index breaks ties.
        let denser = |a: usize, b: usize| rho[a] > rho[b] || (rho[a] == rho[b] && a < b);

        let mut max_pairwise = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                max_pairwise = max_pairwise.max(dist(a, b));
            }
        }

        let mut delta = vec![0.0f64; m];
        let mut nearest = vec![None; m];
        for k in 0..m {
            let mut best: Option<(f64, usize)> = None;
            for l in 0..m {
                if l != k && denser(l, k) {
                    let d = dist(k, l);
                    if best.is_none() || d < best.unwrap().0 {
                        best = Some((d, l));
                    }
                }
            }
            match best {
                Some((d, l)) => {
                    delta[k] = d;
                    nearest[k] = Some(l);
                }
                None => delta[k] = max_pairwise,
            }
        }

        let mut by_delta: Vec<usize> = (0..m).collect();
        by_delta.sort_by(|&a, &b| {
            delta[b]
                .partial_cmp(&delta[a])
                .unwrap()
                .then(rho[b].partial_cmp(&rho[a]).unwrap())
                .then(a.cmp(&b))
        });
        let centers: Vec<usize> = by_delta.into_iter().take(n_centers.min(m)).collect();

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| rho[b].partial_cmp(&rho[a]).unwrap().then(a.cmp(&b)));
        let mut assignment = vec![usize::MAX; m];
        for &p in &order {
            if centers.contains(&p) {
                assignment[p] = p;
            } else {
                assignment[p] = assignment[nearest[p].expect("non-top point")];
            }
        }

        Outcome { rho, delta, centers, assignment }
    }
}

#[test]
fn density_peaks_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0_5EED);
    for case in 0..100 {
        let m = rng.random_range(1..=12);
        let mut coords: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        // A third of the cases duplicate a point to force density ties.
        if case % 3 == 0 && m >= 2 {
            coords[m - 1] = coords[0];
        }
        let d_c = rng.random_range(0.05..0.8);
        let n_centers = rng.random_range(1..=m + 2);

        for kernel in [DensityKernel::Cutoff, DensityKernel::Gaussian] {
            let expected = oracle::run(&coords, d_c, kernel, n_centers);

            let points: Vec<Point2D> = coords.iter().map(|&(x, y)| Point2D::new(x, y)).collect();
            let table = pairwise_distances(&points).unwrap();
            let rho = local_density(&table, d_c, kernel).unwrap();
            let (delta, _) = separation_delta(&table, &rho).unwrap();
            let profile = density_profile(&table, d_c, kernel).unwrap();
            let centers = select_centers(&profile, n_centers);
            let clustering = propagate_labels(&profile, &centers).unwrap();

            for i in 0..m {
                match kernel {
                    DensityKernel::Cutoff => {
                        assert_eq!(rho[i], expected.rho[i], "case {case} point {i} rho");
                        assert_eq!(rho[i].fract(), 0.0);
                    }
                    DensityKernel::Gaussian => {
                        assert!((rho[i] - expected.rho[i]).abs() < 1e-12, "case {case} point {i} rho");
                    }
                }
                assert!((delta[i] - expected.delta[i]).abs() < 1e-12, "case {case} point {i} delta");
            }
            assert_eq!(centers, expected.centers, "case {case} centers ({kernel})");
            assert_eq!(clustering.assignment, expected.assignment, "case {case} assignment ({kernel})");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.3}s, budget 10s");
    pass("density-peaks oracle equivalence", format!("100 point sets x 2 kernels in {elapsed:.3}s"));
}

#[test]
fn fusion_weight_reproduction() {
    let start = Instant::now();

    let weights = fusion_weights(&CueAccuracies::new(vec![92.37, 60.78]).unwrap());
    assert_eq!(weights.weights(), &[8, 1]);

    // Degenerate cases: equal evidence, both perfect, and all-T1-zero.
    assert_eq!(fusion_weights(&CueAccuracies::new(vec![50.0, 50.0]).unwrap()).weights(), &[1, 1]);
    assert_eq!(fusion_weights(&CueAccuracies::new(vec![100.0, 100.0]).unwrap()).weights(), &[1, 1]);
    assert_eq!(fusion_weights(&CueAccuracies::new(vec![50.0, 51.9]).unwrap()).weights(), &[1, 1]);

    let extreme = fusion_weights(&CueAccuracies::new(vec![100.0, 0.0]).unwrap());
    assert_eq!(extreme.weights(), &[10, 1]);

    let fused = fuse(&[0.5, 0.5], &[1.0, 0.0], &weights).unwrap();
    assert_eq!(fused, vec![4.0, 4.0, 1.0, 0.0]);

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.3}s, budget 1s");
    pass("fusion-weight reproduction", format!("W = {{8, 1}} and degenerate cases in {elapsed:.3}s"));
}

#[test]
fn lbp_top_shape_and_mass() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1B9);
    for case in 0..10 {
        let w = rng.random_range(4..=12);
        let h = rng.random_range(3..=12);
        let t = rng.random_range(3..=7);
        let frames: Vec<Frame> = (0..t)
            .map(|_| {
                let pixels: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
                Frame::new(w, h, pixels).unwrap()
            })
            .collect();
        let vol = to_grayscale_stack(&FrameSequence::new(frames, format!("v{case}"), None).unwrap());
        let hist = lbp_top(&vol).unwrap();
        assert_eq!(hist.len(), LBP_TOP_LEN);
        assert_eq!(hist.len(), 177);

        let expected = [
            (t * (w - 2) * (h - 2)) as f64,
            (h * (w - 2) * (t - 2)) as f64,
            (w * (h - 2) * (t - 2)) as f64,
        ];
        for (plane, &want) in expected.iter().enumerate() {
            let sum: f64 = hist.block(plane).iter().sum();
            assert_eq!(sum, want, "case {case} plane {plane} ({w}x{h}x{t})");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.3}s, budget 5s");
    pass("lbp-top shape and mass", format!("length 177, site counts on 10 volumes in {elapsed:.3}s"));
}

#[test]
fn keyframe_contract_fuzzing() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED_F00D);
    let mut fallbacks = 0usize;
    for case in 0..1000 {
        let n = rng.random_range(3..=30);
        let kernel = if case % 2 == 0 { DensityKernel::Gaussian } else { DensityKernel::Cutoff };
        let n_req = rng.random_range(1..=8);

        let curve = match case % 5 {
            // Flat entropy.
            0 => EntropyCurve::new(vec![rng.random_range(0.0..8.0); n]),
            // Strictly monotone entropy.
            1 => {
                let base: f64 = rng.random_range(0.0..1.0);
                EntropyCurve::new((0..n).map(|i| base + i as f64 * 0.07).collect())
            }
            // Random real sequences through the full pixel path.
            2 => {
                let frames: Vec<Frame> = (0..n)
                    .map(|_| {
                        let pixels: Vec<u8> = (0..64).map(|_| rng.random()).collect();
                        Frame::new(8, 8, pixels).unwrap()
                    })
                    .collect();
                entropy_curve(&FrameSequence::new(frames, format!("f{case}"), None).unwrap())
            }
            // Coarse grid curves (ties and plateaus).
            3 => EntropyCurve::new((0..n).map(|_| rng.random_range(0..=3) as f64).collect()),
            // Smooth random curves.
            _ => EntropyCurve::new((0..n).map(|_| rng.random_range(0.0..8.0)).collect()),
        };

        let keys = keyframes_from_curve(&curve, n_req, kernel, None);
        assert_eq!(keys.indices.len(), n_req.min(n), "case {case} count");
        assert!(keys.indices.windows(2).all(|w| w[0] < w[1]), "case {case} sorted/unique");
        assert!(keys.indices.iter().all(|&i| 1 <= i && i <= n), "case {case} range");
        if keys.fallback_used {
            fallbacks += 1;
        }
    }
    assert!(fallbacks > 0, "fuzz must exercise the fallback path");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.3}s, budget 30s");
    pass("key-frame contract fuzzing", format!("1000 curves, {fallbacks} fallbacks, in {elapsed:.3}s"));
}

#[test]
fn end_to_end_synthetic_benchmark() {
    let start = Instant::now();
    let dataset = generate_synthetic(6, 20, 40, (64, 64), 42).unwrap();
    assert_eq!(dataset.len(), 120);

    let cfg = PipelineConfig { seed: 42, ..PipelineConfig::default() };
    assert_eq!(cfg.splits, 20);
    let report = evaluate(&dataset, &cfg).unwrap();

    let fused = report.fused.mean_pct;
    let appearance = report.appearance.mean_pct;
    let motion = report.motion.mean_pct;
    assert!(
        fused >= appearance.max(motion) - 1.0,
        "fused {fused:.2}% below best single cue {:.2}% - 1pp",
        appearance.max(motion)
    );
    assert!(fused >= 85.0, "fused accuracy {fused:.2}% below 85%");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "took {elapsed:.1}s, budget 600s");
    pass(
        "end-to-end synthetic benchmark",
        format!(
            "fused {fused:.2}% +- {:.2}%, appearance {appearance:.2}%, motion {motion:.2}%, 20 splits in {elapsed:.1}s",
            report.fused.std_pct
        ),
    );
}

#[test]
fn efficiency_scaled_timings() {
    let start = Instant::now();
    // One 100-frame sequence at the reference 320x240 resolution.
    let seq = generate_synthetic(1, 1, 100, (320, 240), 3).unwrap().pop().unwrap();

    let mut runs = [0.0f64; 5];
    for slot in runs.iter_mut() {
        let t0 = Instant::now();
        let curve = entropy_curve(&seq);
        let keys = keyframes_from_curve(&curve, 5, DensityKernel::Gaussian, None);
        std::hint::black_box(keys);
        *slot = t0.elapsed().as_secs_f64();
    }
    runs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = runs[2];
    assert!(median <= 2.0, "entropy + clustering took {median:.3}s, budget 2s");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "suite took {elapsed:.1}s, budget 60s");
    pass("efficiency", format!("entropy + clustering median {median:.3}s on 100 frames at 320x240"));
}

#[test]
fn evaluate_determinism() {
    let dataset = generate_synthetic(4, 5, 10, (32, 32), 99).unwrap();
    let cfg = PipelineConfig {
        n_keyframes: 3,
        dictionary_size: 8,
        svm_epochs: 80,
        splits: 3,
        seed: 99,
        ..PipelineConfig::default()
    };
    let a = serde_json::to_vec(&evaluate(&dataset, &cfg).unwrap()).unwrap();
    let b = serde_json::to_vec(&evaluate(&dataset, &cfg).unwrap()).unwrap();
    assert_eq!(a, b, "two runs must serialize byte-identically");
    pass("determinism", format!("two evaluate runs, {} identical JSON bytes", a.len()));
}
