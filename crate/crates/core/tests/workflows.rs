//! Cross-module workflows exercised end to end through the library API.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mggp::baselines::{self, BaselineKind};
use mggp::dataio::{self, SplitSpec};
use mggp::engine::{self, GpConfig};
use mggp::fitting;
use mggp::solar;

#[test]
fn angstrom_line_underfits_compared_to_quadratic_baseline() {
    // On the synthetic data the clearness index carries seasonal and
    // latitudinal structure a plain sunshine-ratio line cannot express.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let ds = dataio::synth_generate(&mut rng, 192, 0.01);
    let s_ratio = &ds.input_columns()[4];
    let model = solar::angstrom_fit(s_ratio, ds.target()).unwrap();
    let line_preds: Vec<f64> = s_ratio.iter().map(|s| model.predict(*s)).collect();
    let line_rmse = fitting::rmse(ds.target(), &line_preds);

    let (_, quad) = baselines::fit_baseline(&ds, BaselineKind::Quadratic).unwrap();
    assert!(
        line_rmse > quad.rmse,
        "Angstrom line {line_rmse} should fit worse than quadratic {}",
        quad.rmse
    );
}

#[test]
fn full_pipeline_split_scale_run_predict() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let ds = dataio::synth_generate(&mut rng, 192, 0.01);
    let (train, test) = dataio::split(&ds, &SplitSpec::new(0.70, 8));
    let config = GpConfig {
        population_size: 40,
        generations: 25,
        rng_seed: 8,
        ..GpConfig::default()
    };
    let trace = engine::run(&config, &train, Some(&test), 2).unwrap();

    // The fitted model beats predicting the training mean on held-out data.
    let test_metrics = trace.test_metrics.expect("test metrics available");
    assert!(test_metrics.r2 > 0.0, "test R2 {}", test_metrics.r2);

    // Predictions through the persistence path agree with run-time metrics.
    let preds = trace
        .best
        .predict_columns(test.input_columns(), &trace.scaling)
        .unwrap();
    let recomputed = fitting::rmse(test.target(), &preds);
    assert!((recomputed - test_metrics.rmse).abs() < 1e-12);
}

#[test]
fn engine_beats_angstrom_on_modulated_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let ds = dataio::synth_generate(&mut rng, 192, 0.01);
    let (train, test) = dataio::split(&ds, &SplitSpec::new(0.70, 12));
    let config = GpConfig {
        population_size: 60,
        generations: 40,
        rng_seed: 12,
        ..GpConfig::default()
    };
    let trace = engine::run(&config, &train, Some(&test), 2).unwrap();

    let s_train = &train.input_columns()[4];
    let angstrom = solar::angstrom_fit(s_train, train.target()).unwrap();
    let line_preds: Vec<f64> = s_train.iter().map(|s| angstrom.predict(*s)).collect();
    let line_rmse = fitting::rmse(train.target(), &line_preds);
    assert!(
        trace.best.fitness < line_rmse,
        "evolved model {} should beat the sunshine line {line_rmse}",
        trace.best.fitness
    );
}
