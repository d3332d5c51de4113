mod common;

use common::planted_windows;
use icu_core::nn::{
    dropout_mask, load_model, predict, save_model, train, ModelConfig, Network, NnError,
    Prediction, Task, TrainedModel,
};
use icu_core::preprocess::{ChannelGrid, ChannelStats, Frame};
use icu_core::rng;
use icu_core::N_CHANNELS;

fn quick_cfg(epochs: usize) -> ModelConfig {
    ModelConfig {
        hidden_units: 16,
        epochs,
        batch_size: 32,
        seed: 5,
        ..ModelConfig::default()
    }
}

#[test]
fn overfits_small_planted_set() {
    let (windows, stats) = planted_windows(24, 0.5, Frame::H6, 11);
    let windows = &windows[..20.min(windows.len())];
    let cfg = ModelConfig {
        epochs: 200,
        ..ModelConfig::default()
    };
    let model = train(windows, Task::Binary, &cfg, &stats).unwrap();
    let last = *model.training_log.last().unwrap();
    assert!(last < 0.05, "final mean BCE {last}");
}

#[test]
fn training_is_deterministic() {
    let (windows, stats) = planted_windows(60, 0.3, Frame::H6, 2);
    let a = train(&windows, Task::Binary, &quick_cfg(3), &stats).unwrap();
    let b = train(&windows, Task::Binary, &quick_cfg(3), &stats).unwrap();
    assert_eq!(a, b);
    let c = train(
        &windows,
        Task::Binary,
        &ModelConfig {
            seed: 6,
            ..quick_cfg(3)
        },
        &stats,
    )
    .unwrap();
    assert_ne!(a.network, c.network);
}

#[test]
fn log_has_one_entry_per_epoch() {
    let (windows, stats) = planted_windows(30, 0.3, Frame::H6, 3);
    let m = train(&windows, Task::Binary, &quick_cfg(1), &stats).unwrap();
    assert_eq!(m.training_log.len(), 1);
    assert!(train(&windows, Task::Binary, &quick_cfg(0), &stats).is_err());
}

#[test]
fn loss_decreases_over_training() {
    let (windows, stats) = planted_windows(200, 0.3, Frame::H6, 4);
    let cfg = ModelConfig {
        hidden_units: 32,
        ..ModelConfig::default()
    };
    let m = train(&windows, Task::Binary, &cfg, &stats).unwrap();
    assert_eq!(m.training_log.len(), 60);
    assert!(
        m.training_log[59] < m.training_log[0],
        "{:?}",
        m.training_log
    );
}

#[test]
fn multiclass_training() {
    let (windows, stats) = planted_windows(160, 1.0, Frame::H12, 8);
    let deaths: Vec<_> = windows
        .into_iter()
        .filter(|w| w.los_class.is_some())
        .collect();
    let m = train(&deaths, Task::Multiclass, &quick_cfg(5), &stats).unwrap();
    let p = predict(&m, &deaths[0].grid).unwrap();
    assert_eq!(p.probs.len(), 4);
    assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn multiclass_needs_los_labels() {
    let (windows, stats) = planted_windows(40, 0.3, Frame::H6, 9);
    assert!(matches!(
        train(&windows, Task::Multiclass, &quick_cfg(1), &stats),
        Err(NnError::MissingLosClass(_))
    ));
    assert_eq!(
        train(&[], Task::Binary, &quick_cfg(1), &stats),
        Err(NnError::EmptyTrainingSet)
    );
}

fn zero_model(task: Task) -> TrainedModel {
    TrainedModel {
        network: Network::zeros(N_CHANNELS, 4, task.classes()),
        stats: ChannelStats {
            mean: [0.0; N_CHANNELS],
            sd: [1.0; N_CHANNELS],
        },
        task,
        frame: Frame::H6,
        config: ModelConfig::default(),
        training_log: vec![],
    }
}

#[test]
fn zero_model_decisions() {
    let g = ChannelGrid::empty("s", Frame::H6);
    let p = predict(&zero_model(Task::Binary), &g).unwrap();
    assert_eq!(p.probs, vec![0.5]);
    assert_eq!(p.decision(), 1);
    let p = predict(&zero_model(Task::Multiclass), &g).unwrap();
    assert_eq!(p.probs, vec![0.25; 4]);
    assert_eq!(p.decision(), 0);
    assert_eq!(
        Prediction {
            probs: vec![0.1, 0.4, 0.4, 0.1]
        }
        .decision(),
        1
    );
    assert_eq!(
        Prediction {
            probs: vec![0.4999]
        }
        .decision(),
        0
    );
}

#[test]
fn frame_mismatch_rejected() {
    let g = ChannelGrid::empty("s", Frame::H12);
    assert_eq!(
        predict(&zero_model(Task::Binary), &g),
        Err(NnError::FrameMismatch {
            trained: 6,
            given: 12
        })
    );
}

#[test]
fn prediction_is_pure_and_survives_save_load() {
    let (windows, stats) = planted_windows(50, 0.4, Frame::H6, 12);
    let m = train(&windows, Task::Binary, &quick_cfg(2), &stats).unwrap();
    let text = save_model(&m);
    let loaded = load_model(&text).unwrap();
    assert_eq!(loaded, m);
    assert_eq!(save_model(&loaded), text);
    for w in &windows {
        let a = predict(&m, &w.grid).unwrap();
        assert_eq!(a, predict(&m, &w.grid).unwrap());
        assert_eq!(a, predict(&loaded, &w.grid).unwrap());
        assert!(a.probs[0] > 0.0 && a.probs[0] < 1.0);
    }
}

#[test]
fn corrupt_model_files_rejected() {
    let text = save_model(&zero_model(Task::Multiclass));
    assert!(load_model(&text.replace("icu-lstm-model v1", "icu-lstm-model v9")).is_err());
    assert!(load_model(&text.replace("frame_hours 6", "frame_hours 7")).is_err());
    assert!(load_model(&text.replace("hidden_units 64", "hidden_units 5")).is_err());
    assert!(load_model(&text[..text.len() - 5]).is_err());
}

#[test]
fn dropout_statistics() {
    let mut r = rng::seeded(2024);
    let rate = 0.2;
    let mask = dropout_mask(100_000, rate, &mut r).unwrap();
    let kept = mask.iter().filter(|&&m| m > 0.0).count() as f64 / mask.len() as f64;
    assert!((0.795..=0.805).contains(&kept), "kept fraction {kept}");
    // Inverted scaling keeps E[m * a] = a for a unit activation.
    let mean = mask.iter().sum::<f64>() / mask.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean multiplier {mean}");
    assert!(dropout_mask(8, 0.0, &mut r).is_none());
}
