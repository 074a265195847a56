#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use nrxx::boundary::{
    apply_wall_bc, apply_wall_bc_counted, ghost_state, mirror, wall_density, HalfSpaceTable, Side,
    WallSpec,
};
use nrxx::moments::{count_up_to, MomentSpace, MomentState, MultiIndex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn wall_strategy() -> impl Strategy<Value = (usize, u64, f64, [f64; 3], f64, bool)> {
    (
        3usize..=8,
        any::<u64>(),
        0.0f64..=1.0,
        prop::array::uniform3(-0.7f64..0.7),
        0.5f64..2.0,
        any::<bool>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wall_output_conserves((m, seed, chi, uw, tw, left) in wall_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, m, 0.15);
        let side = if left { Side::Left } else { Side::Right };
        let wall = WallSpec::new(chi, [uw[0], 0.0, uw[2]], tw, side).unwrap();
        let fb = apply_wall_bc(&s, &wall).unwrap();
        for d in 0..3 {
            prop_assert!(fb.get(MultiIndex::unit(d)).abs() < 1e-12);
        }
        prop_assert!(fb.trace_moment().abs() < 1e-12);
        prop_assert_eq!(fb.u[1], 0.0);
        prop_assert_eq!(fb.theta, s.theta);
        prop_assert_eq!(fb.rho(), s.rho());
        let flux = if left { wall_mass_flux(&mirror(&s), &wall.mirrored()) } else { wall_mass_flux(&s, &wall) };
        prop_assert!(flux.abs() < 1e-6, "mass flux {flux}");
    }

    #[test]
    fn ghost_average_reproduces_the_boundary_state((m, seed, chi, uw, tw, left) in wall_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, m, 0.1);
        let side = if left { Side::Left } else { Side::Right };
        let wall = WallSpec::new(chi, [uw[0], 0.0, uw[2]], tw, side).unwrap();
        let fb = apply_wall_bc(&s, &wall).unwrap();
        let g = ghost_state(&s, &wall).unwrap();
        prop_assert!((g.rho() - s.rho()).abs() < 1e-14);
        prop_assert!((g.u[1] + s.u[1]).abs() < 1e-14);
        for (i, c) in fb.coeffs().iter().enumerate() {
            let avg = 0.5 * (g.coeffs()[i] + s.coeffs()[i]);
            prop_assert!((avg - c).abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_reflects_the_normal_velocity(seed in any::<u64>(), xi in prop::array::uniform3(-2.0f64..2.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, 4, 0.2);
        let a = mirror(&s).expansion_eval([xi[0], -xi[1], xi[2]]);
        let b = s.expansion_eval(xi);
        prop_assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn odd_slots_vanish_linearly_as_chi_goes_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = random_state(&mut rng, 6, 0.2);
    let at = |chi: f64| {
        apply_wall_bc(
            &s,
            &WallSpec::new(chi, [0.3, 0.0, 0.0], 1.2, Side::Right).unwrap(),
        )
        .unwrap()
    };
    let zero = at(0.0);
    let (a, b) = (at(1e-3), at(1e-4));
    for (i, idx) in s.space().indices().iter().enumerate() {
        if idx.0[1] % 2 == 1 {
            assert_eq!(zero.coeffs()[i], 0.0);
            let (sa, sb) = (a.coeffs()[i] / 1e-3, b.coeffs()[i] / 1e-4);
            assert!(
                (sa - sb).abs() <= 2e-3 * sa.abs().max(1e-12),
                "{idx}: {sa} vs {sb}"
            );
        } else {
            assert_eq!(a.coeffs()[i], s.coeffs()[i]);
        }
    }
}

#[test]
fn cost_is_order_m_times_n_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let wall = WallSpec::new(0.7, [0.1, 0.0, 0.0], 1.0, Side::Right).unwrap();
    let mut ratios = Vec::new();
    for m in 3..=20 {
        let s = random_state(&mut rng, m, 0.05);
        let (_, ops) = apply_wall_bc_counted(&s, &wall).unwrap();
        ratios.push(ops as f64 / (m as f64 * count_up_to(m + 1) as f64));
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(max <= 1.0, "{ratios:?}");
    // no growth beyond a constant: the last ratios stay near the first
    assert!(ratios[ratios.len() - 1] <= 1.5 * ratios[0], "{ratios:?}");
}

#[test]
fn wall_density_examples() {
    let space = MomentSpace::new(5).unwrap();
    let wall = WallSpec::new(1.0, [0.0; 3], 1.0, Side::Right).unwrap();
    let s = MomentState::maxwellian(&space, 1.3, [0.2, 0.0, 0.0], 1.0).unwrap();
    assert!((wall_density(&s, &wall) - 1.3).abs() < 1e-14);
    let hot = MomentState::maxwellian(&space, 1.3, [0.0; 3], 4.0).unwrap();
    assert!((wall_density(&hot, &wall) - 2.6).abs() < 1e-14);
}

#[test]
fn table_matches_half_line_quadrature() {
    let t = HalfSpaceTable::build(8);
    let q = Composite::new(0.0, 40.0, 200, 12);
    for m in 0..=8 {
        for n in 0..=8 {
            let want = q
                .integrate(|x| he_explicit(m, x) * he_explicit(n, x) * (-0.5 * x * x).exp())
                / ((2.0 * std::f64::consts::PI).sqrt() * factorial(m));
            assert!(
                (t.get(m, n) - want).abs() < 1e-12 * want.abs().max(1.0),
                "S({m},{n})"
            );
        }
    }
}
