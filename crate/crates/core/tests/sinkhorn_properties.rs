use otrates_core::measures::DiscreteMeasure;
use otrates_core::sinkhorn::{
    normalize_potentials, schrodinger_residual, EntropicPotential, SinkhornOptions, SinkhornSolver,
};
use proptest::prelude::*;

/// Small random 1-D measure on distinct, sorted points.
fn measure() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-3.0..3.0f64, 0.1..1.0f64), 2..12).prop_filter_map("distinct points", |mut pw| {
        pw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if pw.windows(2).any(|w| w[1].0 - w[0].0 < 1e-3) {
            return None;
        }
        let (p, w): (Vec<_>, Vec<_>) = pw.into_iter().map(|(p, w)| (vec![p], w)).unzip();
        DiscreteMeasure::new(p, w).ok()
    })
}

fn solve(mu: &DiscreteMeasure, nu: &DiscreteMeasure, eps: f64) -> otrates_core::DualPotentials {
    SinkhornSolver::new(mu, nu)
        .unwrap()
        .solve_scaled(eps, None, &SinkhornOptions::default())
        .unwrap()
        .potentials
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_is_gauge_invariant(mu in measure(), nu in measure(), eps in 0.2..2.0f64, s in -5.0..5.0f64) {
        let pots = solve(&mu, &nu, eps);
        let mut shifted = pots.clone();
        shifted.f.iter_mut().for_each(|f| *f += s);
        shifted.g.iter_mut().for_each(|g| *g -= s);
        let r0 = schrodinger_residual(&pots, &mu, &nu).unwrap();
        let r1 = schrodinger_residual(&shifted, &mu, &nu).unwrap();
        prop_assert!(r0 <= 1e-8);
        prop_assert!((r0 - r1).abs() <= 1e-11);
        let (a, b) = (normalize_potentials(&pots, &mu).unwrap(), normalize_potentials(&shifted, &mu).unwrap());
        for (x, y) in a.f.iter().zip(&b.f) {
            prop_assert!((x - y).abs() <= 1e-11);
        }
    }

    #[test]
    fn map_is_monotone_and_in_hull(mu in measure(), nu in measure(), eps in 0.2..2.0f64, x in -20.0..20.0f64, dx in 1e-3..5.0f64) {
        let pots = solve(&mu, &nu, eps);
        let p = EntropicPotential::new(&pots, &nu).unwrap();
        let (lo, hi) = (nu.point(0)[0], nu.point(nu.len() - 1)[0]);
        let (t0, t1) = (p.gradient(&[x])[0], p.gradient(&[x + dx])[0]);
        prop_assert!(t0 >= lo - 1e-12 && t0 <= hi + 1e-12);
        // Gradient of a convex function in 1-D is nondecreasing.
        prop_assert!(t1 >= t0 - 1e-12);
        let mid = p.value(&[x + 0.5 * dx]);
        prop_assert!(0.5 * (p.value(&[x]) + p.value(&[x + dx])) - mid >= -1e-10);
    }
}
