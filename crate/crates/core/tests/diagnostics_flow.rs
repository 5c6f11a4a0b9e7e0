//! End-to-end diagnostics on known shapes: the full report pipeline, verdict
//! calibration, and the identity checks that distinguish balls from non-balls.

use caplab_core::closed_forms::{serrin_constant, PLaplaceParams};
use caplab_core::diagnostics::{
    calibrate_null_thresholds, capacity_flux, capacity_volume, conformal_checks, curvature_gap,
    overdetermination_profile, p_function_field, pohozaev_residual, run_diagnostics,
    shape_derivative_check, soap_bubble_deficit, symmetry_signals, symmetry_verdict, Verdict,
};
use caplab_core::geometry::{h0, isoperimetric_deficit, StarDomain};
use caplab_core::solver::{
    solve_conformal_exterior, solve_exterior_capacitary, solve_torsion, ProblemKind, SolverConfig,
};

fn cfg(n_r: usize, n_a: usize) -> SolverConfig {
    SolverConfig { n_r, n_a, ..SolverConfig::default() }
}

#[test]
fn ball_run_is_consistent_with_ball_and_matches_serrin() {
    let d = StarDomain::ball(2, vec![0.0, 0.0], 1.0).unwrap();
    let c = cfg(96, 32);
    let res = solve_exterior_capacitary(&d, 1.5, &c).unwrap();

    let prof = overdetermination_profile(&res, false).unwrap();
    let params = PLaplaceParams::new(1.5, 2).unwrap();
    let expected = serrin_constant(&params, h0(&d)).unwrap();
    assert!(prof.rel_spread <= 1e-2, "ball spread {}", prof.rel_spread);
    assert!(
        (prof.mean - expected).abs() / expected <= 1e-2,
        "mean {} vs serrin {expected}",
        prof.mean
    );

    let poho = pohozaev_residual(&res, false).unwrap();
    assert!(poho <= 2e-2, "ball pohozaev {poho}");

    // P-function constant across the mesh within 2%.
    let pf = p_function_field(&res, false).unwrap();
    let p_exact = 1.0; // ((N-p)/(p-1))^p R^{-p} = 1 for R = 1, p = 1.5, N = 2
    for &v in &pf.nodal {
        assert!((v - p_exact).abs() <= 2e-2, "P value {v} off the constant");
    }
    assert!(pf.stats.far_ring_vs_limit_rel <= 5e-2);

    // Calibrated verdict: the ball itself must read consistent_with_ball.
    let thr = calibrate_null_thresholds(ProblemKind::ExteriorCapacitary, &d, 1.5, &c).unwrap();
    let signals = symmetry_signals(&res, false).unwrap();
    assert_eq!(symmetry_verdict(&signals, &thr), Verdict::ConsistentWithBall);

    let report = run_diagnostics(&res, false, Some(&thr)).unwrap();
    assert_eq!(report.verdict.unwrap().verdict, Verdict::ConsistentWithBall);
    assert!(report.capacity.is_some());
}

#[test]
fn ellipse_run_shows_every_asphericity_signal() {
    let d = StarDomain::ellipse(2, vec![0.0, 0.0], 1.5, 1.0).unwrap();
    let c = cfg(96, 48);
    let res = solve_exterior_capacitary(&d, 1.5, &c).unwrap();

    // Serrin overdetermination breaks by at least 5%.
    let prof = overdetermination_profile(&res, false).unwrap();
    assert!(prof.rel_spread >= 5e-2, "ellipse spread {}", prof.rel_spread);

    // Pohozaev still holds (it is an identity, not a symmetry test).
    let poho = pohozaev_residual(&res, false).unwrap();
    assert!(poho <= 2e-2, "ellipse pohozaev {poho}");

    // Discrete maximum principle for P.
    let pf = p_function_field(&res, false).unwrap();
    assert!(pf.stats.interior_excess_rel <= 2e-2, "excess {}", pf.stats.interior_excess_rel);

    // Curvature gap changes sign.
    let gap = curvature_gap(&d, 1024).unwrap();
    assert!(gap.gap_min < 0.0 && gap.gap_max > 0.0, "gap {gap:?}");

    // Verdict against the equal-volume ball null.
    let thr = calibrate_null_thresholds(ProblemKind::ExteriorCapacitary, &d, 1.5, &c).unwrap();
    let signals = symmetry_signals(&res, false).unwrap();
    assert_eq!(symmetry_verdict(&signals, &thr), Verdict::NotBall);
}

#[test]
fn soap_bubble_separates_ball_from_ellipse_with_margin() {
    let c = cfg(96, 96);
    let ball = StarDomain::ball(2, vec![0.0, 0.0], 1.0).unwrap();
    let ball_run = solve_torsion(&ball, &c).unwrap();
    let ball_soap = soap_bubble_deficit(&ball_run, false).unwrap();
    assert!(
        ball_soap.deficit.abs() <= 1e-2 * ball_soap.grad_sq_integral,
        "ball soap-bubble deficit {} vs energy {}",
        ball_soap.deficit,
        ball_soap.grad_sq_integral
    );

    let ellipse = StarDomain::ellipse(2, vec![0.0, 0.0], 1.5, 1.0).unwrap();
    let ell_run = solve_torsion(&ellipse, &c).unwrap();
    let ell_soap = soap_bubble_deficit(&ell_run, false).unwrap();
    assert!(ell_soap.deficit > 0.0, "ellipse deficit {}", ell_soap.deficit);
    // Margin: at least 5x the ball null at the same resolution.
    assert!(
        ell_soap.relative > 5.0 * ball_soap.relative.abs().max(1e-9),
        "ellipse {} vs ball null {}",
        ell_soap.relative,
        ball_soap.relative
    );

    // Sign stability under refinement.
    let finer = solve_torsion(&ellipse, &cfg(144, 144)).unwrap();
    let finer_soap = soap_bubble_deficit(&finer, false).unwrap();
    assert!(finer_soap.deficit > 0.0);
    assert!(
        (finer_soap.relative - ell_soap.relative).abs() <= 0.2 * ell_soap.relative,
        "deficit unstable: {} -> {}",
        ell_soap.relative,
        finer_soap.relative
    );
}

#[test]
fn conformal_identity_and_deficit_relation() {
    let c = cfg(96, 48);
    let disk = StarDomain::ball(2, vec![0.0, 0.0], 1.0).unwrap();
    let res = solve_conformal_exterior(&disk, &c).unwrap();
    let report = conformal_checks(&res, false).unwrap();
    assert!(report.identity_residual_rel <= 2e-2, "identity {}", report.identity_residual_rel);
    assert!(report.isoperimetric_residual.abs() <= 1e-10, "disk residual");

    // The algebraic relation residual = -N * deficit holds for any domain.
    let ellipse = StarDomain::ellipse(2, vec![0.0, 0.0], 2.0, 1.0).unwrap();
    let res = solve_conformal_exterior(&ellipse, &cfg(64, 48)).unwrap();
    let report = conformal_checks(&res, false).unwrap();
    let deficit = isoperimetric_deficit(&ellipse);
    assert!(
        (report.isoperimetric_residual + 2.0 * deficit).abs() <= 1e-9 * deficit,
        "relation broke: residual {}, deficit {}",
        report.isoperimetric_residual,
        deficit
    );
    assert!(report.isoperimetric_residual < 0.0);
}

#[test]
fn shape_derivative_matches_dilation_and_volume_preserving_directions() {
    // p = 2, N = 3 axisymmetric sphere.
    let d = StarDomain::trig(3, vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![]).unwrap();
    let c = cfg(128, 32);

    // Pure dilation: Cap(R) = 4 pi R, so under the outward normal-speed
    // convention both the finite difference and the Hadamard boundary
    // integral equal +4 pi.
    let dilation = shape_derivative_check(&d, &c, &[1.0, 0.0, 0.0], 0.03).unwrap();
    let four_pi = 4.0 * std::f64::consts::PI;
    assert!(
        (dilation.finite_difference - four_pi).abs() <= 5e-2 * four_pi,
        "fd {}",
        dilation.finite_difference
    );
    assert!(
        dilation.relative_mismatch <= 5e-2,
        "hadamard {} vs fd {}",
        dilation.hadamard,
        dilation.finite_difference
    );

    // A non-trivial axisymmetric perturbation direction.
    let bump = shape_derivative_check(&d, &c, &[0.0, 0.0, 1.0], 0.03).unwrap();
    assert!(
        bump.relative_mismatch <= 5e-2,
        "bump direction mismatch {}",
        bump.relative_mismatch
    );
}

#[test]
fn interior_and_capacity_cross_checks_on_the_sphere() {
    let d = StarDomain::ball(3, vec![0.0; 3], 1.0).unwrap();
    let res = solve_exterior_capacitary(&d, 2.0, &cfg(128, 48)).unwrap();
    let four_pi = 4.0 * std::f64::consts::PI;
    let cap_f = capacity_flux(&res, false).unwrap();
    let cap_v = capacity_volume(&res, false).unwrap();
    assert!((cap_f - four_pi).abs() / four_pi <= 1e-2, "flux {cap_f}");
    assert!((cap_v - four_pi).abs() / four_pi <= 1e-2, "volume {cap_v}");
    assert!((cap_f - cap_v).abs() / four_pi <= 5e-3, "disagreement {cap_f} vs {cap_v}");
}
