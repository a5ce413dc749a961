use otrates_core::measures::GaussianSpec;
use otrates_core::ratelab::{
    fit_loglog_slope, geometric_grid, run_gaussian_sweep, run_sinkhorn_sweep, verify_envelope, EnvelopeForm, GapField,
    SinkhornSweepParams,
};
use otrates_core::{sup_gap_on_ball, SymMatrix};

#[test]
fn sinkhorn_sweep_one_dimensional() {
    let mu = GaussianSpec::standard(1);
    let nu = GaussianSpec::isotropic(1, 2.0).unwrap();
    let params = SinkhornSweepParams::with_defaults(1, 2.0);
    let eps = [1.0, 0.7, 0.5, 0.35, 0.25];
    let sweep = run_sinkhorn_sweep(&mu, &nu, &params, &eps).unwrap();
    let rows = &sweep.records;
    assert_eq!(rows.len(), eps.len());
    assert!(rows.iter().all(|r| r.converged && r.residual <= 1e-8));
    assert!(rows.iter().all(|r| r.prop11_bound.is_none() && r.cost_eps.is_some()));

    let half = rows.iter().find(|r| r.eps == 0.5).unwrap();
    let exact = sup_gap_on_ball(mu.covariance(), nu.covariance(), 0.5, 2.0).unwrap();
    assert!(
        (half.sup_gap_grad - exact).abs() < 1e-3,
        "{} vs {exact}",
        half.sup_gap_grad
    );

    for w in rows.windows(2) {
        assert!(
            w[1].sup_gap_grad <= w[0].sup_gap_grad,
            "{} -> {}",
            w[0].sup_gap_grad,
            w[1].sup_gap_grad
        );
    }
    // Iteration counts accumulate along the warm-started sweep.
    assert!(rows.windows(2).all(|w| w[1].iterations > w[0].iterations));
}

#[test]
fn sinkhorn_sweep_tracks_closed_form_rows() {
    let a = SymMatrix::from_diagonal(&[1.0, 0.6]);
    let b = SymMatrix::from_diagonal(&[1.5, 1.0]);
    let eps = [1.0, 0.6];
    let mut params = SinkhornSweepParams::with_defaults(2, 1.5);
    params.points_per_axis = 41;
    let sweep = run_sinkhorn_sweep(
        &GaussianSpec::new(a.clone()).unwrap(),
        &GaussianSpec::new(b.clone()).unwrap(),
        &params,
        &eps,
    )
    .unwrap();
    let exact = run_gaussian_sweep(&a, &b, 1.5, &eps).unwrap();
    for (s, e) in sweep.records.iter().zip(&exact) {
        assert!((s.sup_gap_grad - e.sup_gap_grad).abs() < 1e-3);
        assert!((s.l2_gap_grad_sq - e.l2_gap_grad_sq).abs() < 1e-3);
        assert!((s.l2_gap_pot_sq - e.l2_gap_pot_sq).abs() < 1e-3);
        assert!(s.sup_gap_pot <= e.sup_gap_pot + 1e-3);
    }
}

#[test]
fn forced_non_convergence_is_flagged() {
    let g = GaussianSpec::standard(1);
    let mut params = SinkhornSweepParams::with_defaults(1, 1.0);
    params.points_per_axis = 101;
    params.max_iter = 1;
    let sweep = run_sinkhorn_sweep(&g, &g, &params, &[0.3, 0.1]).unwrap();
    assert!(sweep.records.iter().all(|r| !r.converged && r.residual > params.tol));
}

#[test]
fn closed_form_sweep_rates() {
    let a = SymMatrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 0.8, 0.1], vec![0.0, 0.1, 1.2]]).unwrap();
    let b = SymMatrix::from_rows(&[vec![2.0, -0.4, 0.2], vec![-0.4, 1.0, 0.0], vec![0.2, 0.0, 0.5]]).unwrap();
    let rows = run_gaussian_sweep(&a, &b, 3.0, &geometric_grid(1e-1, 1e-3, 10).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.within_bound()));
    let fit = fit_loglog_slope(&rows, GapField::SupGapGrad, 1.0 / 7.0).unwrap();
    assert!((0.95..=1.05).contains(&fit.slope));
    let l2 = fit_loglog_slope(&rows, GapField::L2GapGradSq, 2.0).unwrap();
    assert!((1.9..=2.1).contains(&l2.slope));
    let pot = verify_envelope(&rows, GapField::SupGapPot, 1.0 / 7.0, EnvelopeForm::PowerPlusLinear);
    assert!(pot.holds);
}
