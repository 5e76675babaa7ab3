use std::f64::consts::PI;

use vpfp_core::diagnostics::{CsvSink, DiagnosticsRecord};
use vpfp_core::fluid::run_ddp;
use vpfp_core::{run_convergence_sweep, run_vpfp, Error, SimConfig};

fn small() -> SimConfig {
    SimConfig {
        nx: 32,
        nv: 64,
        t_final: 0.05,
        epsilon: 0.2,
        ..SimConfig::default()
    }
}

#[test]
fn zero_horizon_emits_one_record() {
    let mut c = small();
    c.t_final = 0.0;
    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let state = run_vpfp(&c, &mut records).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(state.t, 0.0);
    assert!(records[0].is_well_formed());
}

#[test]
fn run_is_deterministic_and_conservative() {
    let c = small();
    let run = || {
        let mut sink = CsvSink::new(Vec::new(), &c.p_list).unwrap();
        run_vpfp(&c, &mut sink).unwrap();
        String::from_utf8(sink.into_inner()).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.lines().count(), 1 + 65);
    assert!(a.starts_with("t,mass,lp_norm_p2,lp_norm_p4,f_minus_rhoeps_M_l2"));

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    run_vpfp(&c, &mut records).unwrap();
    let m0 = records[0].mass;
    for r in &records {
        assert!(r.is_well_formed());
        assert!((r.mass - m0).abs() <= 1e-10 * m0);
        assert!(r.min_f >= -1e-13 * r.max_f);
    }
}

#[test]
fn fluid_norm_decays_towards_the_mean() {
    let c = SimConfig::default();
    let traj = run_ddp(&c.clone().resolved()).unwrap();
    let grid = vpfp_core::build_grids(&c).unwrap();
    let norms: Vec<f64> = traj.rho.iter().map(|r| r.l2_norm(&grid.x)).collect();
    for w in norms.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-14));
    }
    assert!(norms.iter().all(|n| *n >= 1.0 - 1e-12));
    // The cosine mode decays at about 1 + 4π².
    let last = traj.rho.last().unwrap();
    assert!(
        last.sub(&vpfp_core::SpatialField::constant(128, 1.0))
            .sup_norm()
            < 0.5 * (-(1.0 + 4.0 * PI * PI) * 0.4f64).exp()
    );
}

#[test]
fn duplicate_epsilons_are_rejected() {
    let mut c = small();
    c.epsilons = Some(vec![0.2, 0.1, 0.2]);
    assert!(matches!(
        run_convergence_sweep(&c, 1),
        Err(Error::Config { .. })
    ));
}

#[test]
fn sweep_decomposition_decreases_with_epsilon() {
    let c = SimConfig {
        epsilons: Some(vec![0.2, 0.1, 0.05, 0.025]),
        ..SimConfig::default()
    };
    let result = run_convergence_sweep(&c, 4).unwrap();
    assert!(!result.partial);
    for pair in result.entries.windows(2) {
        let (a, b) = (&pair[0].errors, &pair[1].errors);
        for (x, y) in [(a.e1, b.e1), (a.e2, b.e2), (a.e3, b.e3)] {
            assert!(x / y >= 1.5, "{x} -> {y}");
        }
        assert!(b.total <= b.e1 + b.e2 + b.e3 + 1e-12);
    }
}
