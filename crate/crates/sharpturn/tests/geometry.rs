use std::f64::consts::PI;

use proptest::prelude::*;
use sharpturn::geometry::{coords, smooth_profile, transform_frame, waveguide_value, Frame, PhasePoint};
use sharpturn::ModelParams;

fn frames() -> impl Strategy<Value = Frame> {
    prop_oneof![Just(Frame::Initial), Just(Frame::Intermediate), Just(Frame::Final)]
}

proptest! {
    #[test]
    fn transforms_preserve_speed(
        alpha in 0.0f64..0.3,
        beta in 0.2f64..1.3,
        pos in prop::array::uniform2(-10.0f64..10.0),
        vel in prop::array::uniform2(-3.0f64..3.0),
        from in frames(),
        to in frames(),
    ) {
        let p = ModelParams::two_turn(alpha, beta);
        let a = PhasePoint::new(pos, vel);
        let b = transform_frame(&p, a, from, to).unwrap();
        let back = transform_frame(&p, b, to, from).unwrap();
        let speed = |v: [f64; 2]| v[0].hypot(v[1]);
        prop_assert!((speed(a.vel) - speed(b.vel)).abs() <= 1e-14 * speed(a.vel).max(1.0));
        for k in 0..2 {
            prop_assert!((back.pos[k] - pos[k]).abs() < 1e-12);
            prop_assert!((back.vel[k] - vel[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_becomes_linear_far_inside(psi in -40.0f64..-3.0, beta in 0.2f64..1.3) {
        let prof = smooth_profile(&ModelParams::one_turn(beta).with_b(1e-3)).unwrap();
        let lin = psi * beta.tan();
        // the deviation is e^ψ/(1 + e^ψ); allow for rounding in 1 + e^ψ
        prop_assert!(((prof.v(psi) - lin) / lin).abs() <= psi.exp() + 4.0 * f64::EPSILON);
    }

    #[test]
    fn sharp_waveguide_is_the_transverse_coordinate(x in -10.0f64..-0.5, y in -2.0f64..2.0) {
        // far from the turns the valley is y = 0
        let p = ModelParams::two_turn(PI / 30.0, PI / 3.0);
        let c = coords(&p, x, y);
        prop_assume!(c.xp < -0.1 && c.xi < -0.1);
        prop_assert!((waveguide_value(&p, x, y).abs() - y.abs()).abs() < 1e-12);
    }
}
