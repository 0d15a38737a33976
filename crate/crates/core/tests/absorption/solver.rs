use capillary::models::{AbsorptionModel, CubicModel, CubicParams, KpModel, KpParams};
use capillary::solver::{simulate, SimulationResult, SolverConfig, TopBoundary};
use capillary::{ExperimentSetup, MaterialSpec};
use proptest::prelude::*;

const MU: f64 = 8.9e-3;

fn setup(h1: f64, tf: f64, theta_ext: f64) -> ExperimentSetup {
    ExperimentSetup {
        h1,
        h2: 0.0,
        rho: 1.0,
        mu: MU,
        tf,
        theta_ext,
        temperature: None,
        relative_humidity: None,
    }
}

fn run(model: &dyn AbsorptionModel, n0: f64, s: &ExperimentSetup, dz: f64, top: TopBoundary) -> SimulationResult {
    let material = MaterialSpec::new("test", n0, None).unwrap();
    let mut cfg = SolverConfig::new(dz);
    cfg.top_bc = top;
    cfg.snapshot_times = vec![s.tf / 4.0, s.tf / 2.0, s.tf];
    cfg.q_times = (1..=40).map(|k| s.tf * k as f64 / 40.0).map(|t| t.min(s.tf)).collect();
    simulate(model, &material, s, &cfg).unwrap()
}

#[test]
fn robin_approaches_dirichlet_as_rate_grows() {
    let model = CubicModel::new(CubicParams::new(0.3, 0.95, 5e-3).unwrap()).unwrap();
    let s = setup(0.5, 400.0, 0.01);
    let dirichlet = run(&model, 0.4, &s, 0.025, TopBoundary::Dirichlet);
    let reference = &dirichlet.profiles.last().unwrap().theta;
    let gaps: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&k_w| {
            let r = run(&model, 0.4, &s, 0.025, TopBoundary::Robin { k_w });
            let theta = &r.profiles.last().unwrap().theta;
            theta
                .iter()
                .zip(reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    // first order in 1 / k_w
    assert!(gaps[1] < 0.2 * gaps[0] && gaps[2] < 0.2 * gaps[1], "{gaps:?}");
}

#[test]
fn uptake_converges_under_refinement() {
    let model = KpModel::new(KpParams::new(0.4, 0.95, 0.3, 1.0, 2e-3, 2.0).unwrap(), MU).unwrap();
    let s = setup(1.0, 300.0, 0.0);
    let q: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dz| run(&model, 0.4, &s, dz, TopBoundary::Dirichlet).q_at(300.0).unwrap())
        .collect();
    let (d1, d2) = ((q[1] - q[0]).abs(), (q[2] - q[1]).abs());
    assert!(d2 < d1, "{q:?}");
    assert!(d2 / q[2] < 0.02, "{q:?}");
}

#[test]
fn dry_top_is_reached_later_on_taller_specimens() {
    let model = CubicModel::new(CubicParams::new(0.3, 0.95, 1e-2).unwrap()).unwrap();
    let material = MaterialSpec::new("test", 0.4, None).unwrap();
    let cfg = SolverConfig::new(0.05);
    let short = simulate(&model, &material, &setup(0.5, 2000.0, 0.0), &cfg).unwrap();
    let tall = simulate(&model, &material, &setup(1.0, 2000.0, 0.0), &cfg).unwrap();
    let (a, b) = (short.breakthrough_time.unwrap(), tall.breakthrough_time.unwrap());
    assert!(b > 2.0 * a, "{a} {b}");
}

#[test]
fn rejects_output_after_final_time() {
    let model = CubicModel::new(CubicParams::new(0.3, 0.95, 1e-2).unwrap()).unwrap();
    let material = MaterialSpec::new("test", 0.4, None).unwrap();
    let mut cfg = SolverConfig::new(0.05);
    cfg.snapshot_times = vec![120.0];
    assert!(simulate(&model, &material, &setup(1.0, 100.0, 0.0), &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounded_and_monotone(
        n0 in 0.2..0.6f64,
        s_r in 0.05..0.7f64,
        width in 0.1..0.3f64,
        log_d in -3.0..-2.0f64,
        nodes in 10usize..30,
        robin in proptest::option::of(0.0..3.0f64),
    ) {
        let s_s = (s_r + width).min(1.0);
        let model = CubicModel::new(CubicParams::new(s_r, s_s, 10f64.powf(log_d)).unwrap()).unwrap();
        let s = setup(1.0, 200.0, 0.005 * n0);
        let top = robin.map_or(TopBoundary::Dirichlet, |e| TopBoundary::Robin { k_w: 10f64.powf(e) });
        let r = run(&model, n0, &s, 1.0 / nodes as f64, top);
        let tol = 1e-12;
        for p in &r.profiles {
            prop_assert!(p.theta.iter().all(|&t| t >= -tol && t <= n0 + tol));
        }
        prop_assert!(r.q_curve.windows(2).all(|w| w[1].1 >= w[0].1 - tol));
        prop_assert!(r.q_curve.last().unwrap().1 <= n0 * 1.0 + tol);
    }
}
