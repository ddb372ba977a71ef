use zeno_transfer::continuum::compare_fictitious_from;
use zeno_transfer::prelude::*;
use zeno_transfer::Error;

#[test]
fn single_dot_decays_exponentially_in_a_wide_band() {
    // Γ₂ = 0: dot 1 alone above a wide Lorentzian band decays at Γ.
    let sys = SystemParams::new(0.0, 0.0, 0.0, 1.0, 0.0, 100.0).unwrap();
    let res = build_reservoir(&sys, 8000, 20.0 * sys.lambda).unwrap();
    let times = uniform_grid(3.0, 31);
    let psi0 = AmplitudeState::in_dots(C64::new(1.0, 0.0), C64::new(0.0, 0.0), res.len());
    let traj = schrodinger_evolve(&psi0, &sys, &res, &times).unwrap();
    for (&t, &p1) in times.iter().zip(&traj.p1) {
        assert!((p1 - (-t).exp()).abs() < 2e-2, "t = {t}: {p1}");
    }
    assert!(traj.p2.iter().all(|&p| p == 0.0));
}

#[test]
fn deviation_shrinks_with_bandwidth_at_fixed_spacing() {
    let sys = SystemParams::symmetric(5.0).unwrap();
    let mut previous = f64::INFINITY;
    for (n, w) in [(500, 5.0), (1000, 10.0), (2000, 20.0)] {
        let dev = compare_fictitious(&sys, n, w * sys.lambda, 10.0).unwrap().sup_deviation();
        assert!(dev < previous, "N = {n}: {dev} vs {previous}");
        previous = dev;
    }
    assert!(previous < 1e-4);
}

#[test]
fn coarse_spacing_is_refused() {
    // 2W/N = 1 gives a recurrence time of 2π < 10.
    let sys = SystemParams::symmetric(5.0).unwrap();
    assert!(matches!(
        compare_fictitious(&sys, 50, 25.0, 10.0),
        Err(Error::RecurrenceViolation { .. })
    ));
}

#[test]
fn dark_superposition_never_leaks_into_the_continuum() {
    let sys = SystemParams::symmetric(5.0).unwrap();
    let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let cmp = compare_fictitious_from([a, -a], &sys, 1000, 50.0, 10.0, 41).unwrap();
    for (p1, p2) in cmp.oracle.p1.iter().zip(&cmp.oracle.p2) {
        assert!((p1 + p2 - 1.0).abs() < 1e-10);
    }
    assert!(cmp.sup_dots < 1e-9);
}

#[test]
fn oracle_stays_normalized() {
    let sys = SystemParams::symmetric(5.0).unwrap();
    let cmp = compare_fictitious(&sys, 2000, 50.0, 10.0).unwrap();
    assert!(cmp.oracle.norm.iter().all(|n| (n - 1.0).abs() < 1e-8));
    assert!(cmp.sup_deviation() < 1e-2);
}
