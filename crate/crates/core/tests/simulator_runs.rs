//! End-to-end simulator runs: continuous reference algorithm, standard-error
//! scaling, divergence reporting and seeding.

mod common;

use adaquant::analysis::mse_drift_continuous;
use adaquant::simulator::{EstimatorConfig, SimError};
use adaquant::{run_continuous_reference, run_experiment};

use common::{cauchy, constant, drift, gauss, wiener};

#[test]
fn continuous_reference_wiener_gauss() {
    let config = wiener(gauss(), 2, 1e-3, 500, 20_000, 1000);
    let result = run_continuous_reference(&config).unwrap();
    assert_eq!(result.fisher, 2.0);
    let target = 1e-3 / 2.0_f64.sqrt();
    assert_eq!(result.theory_mse, target);
    assert!(
        (result.asymptotic_mse / target - 1.0).abs() < 0.1,
        "{}",
        result.asymptotic_mse
    );
}

#[test]
fn continuous_reference_drift_gauss() {
    let config = drift(
        gauss(),
        EstimatorConfig::quantized(2),
        1e-5,
        500,
        20_000,
        1000,
    );
    let result = run_continuous_reference(&config).unwrap();
    let target = mse_drift_continuous(1e-4, 2.0);
    assert!(
        (result.asymptotic_mse / target - 1.0).abs() < 0.15,
        "{} vs {target}",
        result.asymptotic_mse
    );
}

#[test]
fn continuous_reference_cauchy_stays_bounded() {
    let mut config = constant(cauchy(), 2, 1000, 1000);
    config.initial.spread = 1.0;
    let result = run_continuous_reference(&config).unwrap();
    assert!(result.diverged.is_empty());
    assert_eq!(result.replications_used, 1000);
    let ratio = result.asymptotic_mse / result.theory_mse;
    assert!(ratio.is_finite() && ratio < 1.5, "{ratio}");
}

#[test]
fn standard_error_shrinks_with_replications() {
    let small = run_experiment(&wiener(gauss(), 2, 1e-2, 400, 4000, 500)).unwrap();
    let large = run_experiment(&wiener(gauss(), 2, 1e-2, 1600, 4000, 500)).unwrap();
    let ratio = small.asymptotic_se / large.asymptotic_se;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
    let doubled = run_experiment(&wiener(gauss(), 2, 1e-2, 800, 4000, 500)).unwrap();
    let ratio = small.asymptotic_se / doubled.asymptotic_se;
    assert!(
        (ratio / std::f64::consts::SQRT_2 - 1.0).abs() < 0.2,
        "{ratio}"
    );
}

#[test]
fn divergence_dominated_run_is_an_error() {
    let mut config = constant(gauss(), 2, 50, 100);
    config.initial.offset = 2e6;
    match run_experiment(&config) {
        Err(SimError::DivergenceDominated {
            count,
            total,
            first,
        }) => {
            assert_eq!(total, 50);
            assert!(count > 25);
            assert_eq!(first, 0);
        }
        other => panic!("expected divergence error, got {other:?}"),
    }
}

#[test]
fn seeds_select_streams() {
    let mut config = wiener(cauchy(), 3, 1e-2, 130, 500, 50);
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    assert_eq!(a.mse_curve, b.mse_curve);
    assert_eq!(a.asymptotic_se, b.asymptotic_se);
    config.run.seed = 2;
    let c = run_experiment(&config).unwrap();
    assert_ne!(a.mse_curve, c.mse_curve);
}
