//! Property tests over the polarization algebra.

use proptest::prelude::*;

use polstab_core::fiber::ScramblerState;
use polstab_core::jones::{fidelity, qber_from_visibility, JonesVector};
use polstab_core::stokes::StokesVector;
use polstab_core::unitary::PolUnitary;

fn arb_unit_vector() -> impl Strategy<Value = StokesVector> {
    (any::<[f64; 3]>().prop_filter("finite components", |v| {
        v.iter().all(|x| x.is_finite())
    }))
    .prop_filter_map("non-degenerate direction", |v| {
        let s = StokesVector::new(
            v[0].rem_euclid(2.0) - 1.0,
            v[1].rem_euclid(2.0) - 1.0,
            v[2].rem_euclid(2.0) - 1.0,
        );
        s.normalized().ok()
    })
}

fn arb_angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

proptest! {
    #[test]
    fn jones_stokes_round_trip(s in arb_unit_vector()) {
        let j = JonesVector::from_stokes(&s).unwrap();
        prop_assert!(j.is_normalized(1e-12));
        prop_assert!(j.stokes().approx_eq(&s, 1e-10));
    }

    #[test]
    fn rotations_preserve_fidelity(
        axis in arb_unit_vector(),
        angle in arb_angle(),
        a in arb_unit_vector(),
        b in arb_unit_vector(),
    ) {
        let u = PolUnitary::rotation_about(&axis, angle).unwrap();
        let ja = JonesVector::from_stokes(&a).unwrap();
        let jb = JonesVector::from_stokes(&b).unwrap();
        let before = fidelity(&ja, &jb);
        let after = fidelity(&u.apply_jones(&ja), &u.apply_jones(&jb));
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn composition_acts_like_sequential_rotation(
        ax1 in arb_unit_vector(),
        an1 in arb_angle(),
        ax2 in arb_unit_vector(),
        an2 in arb_angle(),
        probe in arb_unit_vector(),
    ) {
        let u = PolUnitary::rotation_about(&ax1, an1).unwrap();
        let v = PolUnitary::rotation_about(&ax2, an2).unwrap();
        let composed = u.mul(&v).rotate(&probe);
        let sequential = u.rotate(&v.rotate(&probe));
        prop_assert!(composed.approx_eq(&sequential, 1e-10));
    }

    #[test]
    fn rotation_between_connects_non_antipodal_points(
        a in arb_unit_vector(),
        b in arb_unit_vector(),
    ) {
        prop_assume!(1.0 + a.dot(&b) > 1e-6);
        let u = PolUnitary::rotation_between(&a, &b).unwrap();
        prop_assert!(u.rotate(&a).approx_eq(&b, 1e-10));
        // Minimal-angle choice: never more than the great-circle angle.
        prop_assert!(u.rotation_angle() <= a.angle_to(&b) + 1e-9);
    }

    #[test]
    fn scrambler_pattern_is_periodic(
        freq in 0.1f64..20.0,
        t in 0.0f64..5.0,
    ) {
        let s = ScramblerState::new(freq);
        let d = s.unitary_at(t).rotation_distance(&s.unitary_at(t + s.period_s()));
        prop_assert!(d < 1e-6, "distance {d}");
    }

    #[test]
    fn visibility_maps_into_half_interval(v in 0.0f64..=1.0) {
        let q = qber_from_visibility(v).unwrap();
        prop_assert!((0.0..=0.5).contains(&q));
    }
}
