use capillary::calibration::{
    calibrate_cubic, calibrate_kp, default_cubic_bounds, default_kp_bounds, forward_q, AnnealerConfig, KpStepOptions,
    ProductSplit,
};
use capillary::models::{AbsorptionModel, CubicModel, CubicParams, KpModel, KpParams};
use capillary::solver::SolverConfig;
use capillary::{ExperimentSetup, ImbibitionDataset, MaterialSpec};

const MU: f64 = 8.9e-3;

fn material() -> MaterialSpec {
    MaterialSpec::new("synthetic", 0.4, None).unwrap()
}

fn setup() -> ExperimentSetup {
    ExperimentSetup {
        h1: 1.0,
        h2: 0.025,
        rho: 1.0,
        mu: MU,
        tf: 300.0,
        theta_ext: 2.1e-3,
        temperature: None,
        relative_humidity: None,
    }
}

fn data_from(model: &dyn AbsorptionModel) -> ImbibitionDataset {
    let times: Vec<f64> = (1..=10).map(|k| 30.0 * k as f64).collect();
    let probe = ImbibitionDataset::new(times.iter().map(|&t| (t, 1.0)).collect()).unwrap();
    let q = forward_q(model, &probe, &material(), &setup(), &SolverConfig::new(0.1)).unwrap();
    ImbibitionDataset::new(times.into_iter().zip(q).collect()).unwrap()
}

fn annealer(evals: usize, seed: u64) -> AnnealerConfig {
    AnnealerConfig {
        cooling_factor: 0.8,
        iterations_per_temperature: 30,
        max_evaluations: evals,
        rng_seed: seed,
        ..Default::default()
    }
}

#[test]
fn cubic_fit_recovers_synthetic_truth() {
    let truth = CubicParams::new(0.5, 0.9, 5e-3).unwrap();
    let data = data_from(&CubicModel::new(truth).unwrap());
    let mut bounds = default_cubic_bounds();
    bounds.intervals[2].lower = -4.0;
    bounds.intervals[2].upper = -1.0;
    let fit = calibrate_cubic(
        &data,
        &material(),
        &setup(),
        &SolverConfig::new(0.1),
        &bounds,
        &annealer(1500, 3),
    )
    .unwrap();
    assert!(fit.error < 1e-6, "{fit:?}");
    assert!((fit.params.d / truth.d - 1.0).abs() < 0.05, "{:?}", fit.params);
    assert_eq!(fit.evaluations, fit.trace.len());
}

#[test]
fn kp_step_never_ends_above_its_start() {
    let truth = KpParams::new(0.45, 0.95, 0.3, 1.0, 2e-4, 2.0).unwrap();
    let data = data_from(&KpModel::new(truth, MU).unwrap());
    let warm = CubicParams::new(0.47, 0.93, 4e-3).unwrap();
    let options = KpStepOptions {
        split: ProductSplit::KnownPermeability(1e-9),
        ..Default::default()
    };
    for seed in 0..3 {
        let fit = calibrate_kp(
            &data,
            &material(),
            &setup(),
            &SolverConfig::new(0.1),
            &default_kp_bounds(),
            &annealer(200, seed),
            &warm,
            &options,
        )
        .unwrap();
        assert!(
            fit.error <= fit.trace[0].1,
            "seed {seed}: {} > {}",
            fit.error,
            fit.trace[0].1
        );
        assert!((fit.params.s_r - warm.s_r).abs() <= 0.05 + 1e-12);
        let k_s = fit.params.k_s.unwrap();
        let c = fit.params.c.unwrap();
        assert!((k_s * c / fit.params.conductance_product - 1.0).abs() < 1e-12);
    }
}

#[test]
fn same_seed_same_fit() {
    let data = data_from(&CubicModel::new(CubicParams::new(0.4, 0.95, 2e-3).unwrap()).unwrap());
    let run = || {
        calibrate_cubic(
            &data,
            &material(),
            &setup(),
            &SolverConfig::new(0.1),
            &default_cubic_bounds(),
            &annealer(150, 9),
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.params, b.params);
    assert_eq!(a.trace, b.trace);
}
