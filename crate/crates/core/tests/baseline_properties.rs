use icu_core::baselines::{nb_fit, nb_predict, saps2_score, score_to_classifier, sofa_score};
use icu_core::metrics::{confusion_matrix, f1_binary};
use icu_core::preprocess::{ChannelGrid, Frame};
use icu_core::{rng, VitalChannel, N_CHANNELS};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn plausible_cell() -> impl Strategy<Value = (usize, VitalChannel, f64)> {
    (0usize..6, 0..N_CHANNELS, 0.0f64..1.0).prop_map(|(t, c, u)| {
        let channel = VitalChannel::from_index(c).unwrap();
        let (lo, hi) = channel.plausible_range();
        (t, channel, lo + u * (hi - lo))
    })
}

fn grid_of(cells: &[(usize, VitalChannel, f64)]) -> ChannelGrid {
    let mut g = ChannelGrid::empty("s", Frame::H6);
    for &(t, c, v) in cells {
        g.set(t, c, v);
    }
    g
}

/// Direct product of Gaussian densities and priors, normalized.
fn brute_force_posterior(x: &[f64], features: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<f64> {
    let d = x.len();
    let mut joint = Vec::with_capacity(k);
    for c in 0..k {
        let rows: Vec<&Vec<f64>> = features
            .iter()
            .zip(labels)
            .filter(|r| *r.1 == c)
            .map(|r| r.0)
            .collect();
        let n = rows.len() as f64;
        let mut p = n / features.len() as f64;
        for j in 0..d {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).max(1e-9);
            p *= (-(x[j] - mean).powi(2) / (2.0 * var)).exp()
                / (2.0 * std::f64::consts::PI * var).sqrt();
        }
        joint.push(p);
    }
    let z: f64 = joint.iter().sum();
    joint.iter().map(|p| p / z).collect()
}

#[test]
fn naive_bayes_matches_brute_force() {
    let mut r = rng::seeded(555);
    let unit = Normal::new(0.0f64, 1.0).unwrap();
    for _ in 0..20 {
        let k = r.random_range(2..=4usize);
        let d = r.random_range(1..=5usize);
        let n = r.random_range(4 * k..40);
        let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        let features: Vec<Vec<f64>> = labels
            .iter()
            .map(|&l| {
                (0..d)
                    .map(|_| l as f64 * 0.7 + unit.sample(&mut r))
                    .collect()
            })
            .collect();
        let model = nb_fit(&features, &labels).unwrap();
        let x: Vec<f64> = (0..d).map(|_| unit.sample(&mut r)).collect();
        let got = nb_predict(&model, &x);
        let want = brute_force_posterior(&x, &features, &labels, k);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn scores_never_drop_when_cells_are_added(
        base in proptest::collection::vec(plausible_cell(), 0..30),
        extra in proptest::collection::vec(plausible_cell(), 1..10),
        age in 0.0f64..110.0
    ) {
        let small = grid_of(&base);
        let mut big = small.clone();
        for (t, c, v) in extra {
            if !big.mask[t][c.index()] {
                big.set(t, c, v);
            }
        }
        for (a, b) in [
            (saps2_score(&small, age).unwrap(), saps2_score(&big, age).unwrap()),
            (sofa_score(&small).unwrap(), sofa_score(&big).unwrap()),
        ] {
            prop_assert!(b.total >= a.total);
            for (ca, cb) in a.components.iter().zip(&b.components) {
                prop_assert!(cb.points >= ca.points);
            }
        }
    }

    #[test]
    fn score_totals_are_component_sums(cells in proptest::collection::vec(plausible_cell(), 0..40), age in 0.0f64..110.0) {
        let g = grid_of(&cells);
        let s = saps2_score(&g, age).unwrap();
        prop_assert_eq!(s.total, s.components.iter().map(|c| c.points).sum::<u32>());
        let p = s.mortality_probability.unwrap();
        prop_assert!(p > 0.0 && p < 1.0);
        let sofa = sofa_score(&g).unwrap();
        prop_assert!(sofa.components.iter().all(|c| c.points <= 4));
    }

    #[test]
    fn threshold_reports_its_own_f1(cells in proptest::collection::vec((0u8..30, 0u8..2), 1..60)) {
        let scores: Vec<f64> = cells.iter().map(|c| f64::from(c.0)).collect();
        let labels: Vec<u8> = cells.iter().map(|c| c.1).collect();
        let choice = score_to_classifier(&scores, &labels);
        let truth: Vec<usize> = labels.iter().map(|&l| usize::from(l)).collect();
        let pred: Vec<usize> = scores.iter().map(|&s| usize::from(s >= choice.threshold)).collect();
        let f1 = f1_binary(&confusion_matrix(&truth, &pred, 2).unwrap()).value;
        prop_assert_eq!(f1, choice.f1);
        // No other midpoint cut does better.
        let mut distinct = scores.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        for t in distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])) {
            let pred: Vec<usize> = scores.iter().map(|&s| usize::from(s >= t)).collect();
            prop_assert!(f1_binary(&confusion_matrix(&truth, &pred, 2).unwrap()).value <= choice.f1 + 1e-15);
        }
    }
}
