use nalgebra::Vector3;
use proptest::prelude::*;
use zeno_transfer::dynamics::{unvectorize, vectorize};
use zeno_transfer::model::{max_modulus, Matrix3c};
use zeno_transfer::prelude::*;

fn system() -> impl Strategy<Value = SystemParams> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..2.0, 0.0f64..2.0, 0.5f64..30.0)
        .prop_map(|(e1, e2, er, g1, g2, l)| SystemParams::new(e1, e2, er, g1, g2, l).unwrap())
}

fn detector() -> impl Strategy<Value = DetectorParams> {
    (0.0f64..40.0, 0.0f64..40.0).prop_map(|(a, b)| DetectorParams::new(a, b).unwrap())
}

fn amplitudes() -> impl Strategy<Value = [C64; 3]> {
    prop::array::uniform6(-1.0f64..1.0).prop_filter_map("non-zero", |v| {
        let a = [C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5])];
        let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-3).then(|| a.map(|z| z / n))
    })
}

fn mixed_state() -> impl Strategy<Value = DensityMatrix> {
    (amplitudes(), amplitudes(), 0.0f64..1.0).prop_map(|(a, b, p)| {
        let (ra, rb) = (DensityMatrix::pure_state(a).unwrap(), DensityMatrix::pure_state(b).unwrap());
        DensityMatrix::from_matrix(ra.matrix() * C64::from(p) + rb.matrix() * C64::from(1.0 - p)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_law(sys in system(), det in detector(), rho in mixed_state()) {
        let l = build_liouvillian(&sys, &det).unwrap();
        let rate = l.rhs(rho.matrix()).trace().re;
        let expected = -2.0 * sys.lambda * rho.population(Level::Well);
        prop_assert!((rate - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn semigroup(sys in system(), det in detector(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let l = build_liouvillian(&sys, &det).unwrap();
        let composed = l.propagator(s).unwrap() * l.propagator(t).unwrap();
        let direct = l.propagator(s + t).unwrap();
        prop_assert!(max_modulus(&(composed - direct)) < 1e-10);
    }

    #[test]
    fn trajectories_stay_physical_and_leak_monotonically(
        sys in system(), det in detector(), rho in mixed_state(),
    ) {
        let traj = build_liouvillian(&sys, &det).unwrap().evolve(&rho, &uniform_grid(5.0, 26)).unwrap();
        for r in &traj {
            prop_assert!(r.hermiticity_error() <= 1e-12);
            prop_assert!(r.eigenvalues()[0] >= -1e-10);
        }
        for w in traj.windows(2) {
            prop_assert!(w[1].trace() <= w[0].trace() + 1e-12);
        }
    }

    #[test]
    fn unmonitored_pure_states_stay_pure(sys in system(), psi in amplitudes(), t in 0.0f64..3.0) {
        let rho = DensityMatrix::pure_state(psi).unwrap();
        let out = evolve(&rho, &sys, &DetectorParams::OFF, &[t]).unwrap()[0];

        let mut h_eff = sys.hamiltonian();
        h_eff[(2, 2)] -= C64::new(0.0, sys.lambda);
        let u = (h_eff * C64::new(0.0, -t)).exp();
        let phi = u * Vector3::from(psi);
        let expected: Matrix3c = phi * phi.adjoint();
        prop_assert!(max_modulus(&(out.matrix() - expected)) < 1e-10);
        let ev = out.eigenvalues();
        prop_assert!(ev[0].abs() < 1e-9 && ev[1].abs() < 1e-9);
    }

    #[test]
    fn vectorization_round_trips(rho in mixed_state()) {
        prop_assert_eq!(unvectorize(&vectorize(rho.matrix())), *rho.matrix());
    }

    #[test]
    fn measurement_step_never_creates_probability(rho in mixed_state(), sys in system(), tau in 1e-3f64..1.0) {
        let u = build_liouvillian(&sys, &DetectorParams::OFF).unwrap().propagator(tau).unwrap();
        let next = step_nonselective(&rho, &u);
        prop_assert!(next.trace() <= rho.trace() + 1e-12);
        prop_assert_eq!(next.get(Level::Dot1, Level::Well), C64::new(0.0, 0.0));
        prop_assert!(next.eigenvalues()[0] >= -1e-10);
    }
}
