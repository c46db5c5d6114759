use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sgkink_core::backlund::{
    apply_linearized_f2, backlund_residual, forward_transform, inverse_transform, operator_i,
    solve_linearized_f2, FContext,
};
use sgkink_core::exact::{a_of_beta, kink_state, KinkParams};
use sgkink_core::field::{pair_energy_norm, Field, Grid, NormSpec};
use sgkink_core::integrator::{Scheme, SchemeKind, Stepper};
use sgkink_core::{State, Topology};

fn grid() -> Grid {
    Grid::new(-64.0, 64.0, 4096).unwrap()
}

fn zero_state(g: Grid) -> State {
    State::new(Field::zeros(g), Field::zeros(g), 0.0, Topology::Zero).unwrap()
}

/// Smooth random bump sum `sum c_k exp(-(x - x_k)^2 / w_k)`.
fn random_bumps(g: Grid, rng: &mut ChaCha8Rng, k: usize) -> Field {
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.5..3.0)))
        .collect();
    Field::from_fn(g, |x| {
        bumps
            .iter()
            .map(|(c, x0, w)| c * (-(x - x0) * (x - x0) / w).exp())
            .sum()
    })
    .unwrap()
}

fn random_phi(g: Grid, seed: u64, size: f64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_bumps(g, &mut rng, 4);
    let pt = random_bumps(g, &mut rng, 4);
    let s = size / pair_energy_norm(&p, &pt).unwrap();
    State::new(p.scale(s), pt.scale(s), 0.0, Topology::Zero).unwrap()
}

#[test]
fn kink_and_vacuum_are_partners() {
    let g = grid();
    for beta in [0.0, 0.5, -0.5] {
        let p = KinkParams::new(beta, 0.7).unwrap();
        let f = kink_state(&p, &g, 0.0).unwrap();
        let (r1, r2) = backlund_residual(&f, &zero_state(g), p.a()).unwrap();
        assert!(r1.sup_norm() < 1e-10 && r2.sup_norm() < 1e-10, "{beta}");
        let (w1, _) = backlund_residual(&f, &zero_state(g), 2.0 * p.a()).unwrap();
        assert!(w1.sup_norm() > 0.1);
    }
}

#[test]
fn forward_from_vacuum_is_the_kink() {
    let g = grid();
    for beta in [0.0, 0.5, -0.5] {
        let center = 0.3141;
        let f = forward_transform(&zero_state(g), a_of_beta(beta), center).unwrap();
        let q = kink_state(&KinkParams::new(beta, center).unwrap(), &g, 0.0).unwrap();
        let e = f.phi().try_sub(q.phi()).unwrap().sup_norm();
        let et = f.phi_t().try_sub(q.phi_t()).unwrap().sup_norm();
        assert!(e < 1e-8 && et < 1e-8, "beta {beta}: {e} {et}");
    }
}

#[test]
fn forward_output_satisfies_both_equations() {
    let g = grid();
    let phi = random_phi(g, 7, 0.05);
    let a = a_of_beta(0.2);
    let f = forward_transform(&phi, a, 1.0).unwrap();
    let (r1, r2) = backlund_residual(&f, &phi, a).unwrap();
    assert!(r1.sup_norm() < 1e-8, "{}", r1.sup_norm());
    assert!(r2.sup_norm() < 1e-12, "{}", r2.sup_norm());
    let v = f.phi().values();
    let c = g.nearest(1.0);
    assert!((v[c] - std::f64::consts::PI).abs() < 0.1);
}

#[test]
fn forward_rejects_large_phi() {
    let g = grid();
    let phi = random_phi(g, 3, 0.5);
    assert!(forward_transform(&phi, 1.0, 0.0).is_err());
}

#[test]
fn inverse_recovers_kink_parameters() {
    let g = grid();
    let (b1, x1) = (0.23, 0.4);
    let f = kink_state(&KinkParams::new(b1, x1).unwrap(), &g, 0.0).unwrap();
    let r = inverse_transform(&f, 0.2, 0.3).unwrap();
    assert!((r.delta - (a_of_beta(b1) - a_of_beta(0.2))).abs() < 1e-9, "{}", r.delta);
    assert!((r.y - 0.1).abs() < 1e-9, "{}", r.y);
    assert!((r.beta - b1).abs() < 1e-9);
    assert!(r.phi.phi().sup_norm() < 1e-9);
    assert!(r.phi.phi_t().sup_norm() < 1e-9);
    assert!(r.residual_norm < 1e-9);
}

#[test]
fn round_trip_recovers_phi() {
    let g = grid();
    for seed in [1u64, 2, 3] {
        let phi = random_phi(g, seed, 0.05);
        let a = a_of_beta(0.2);
        let f = forward_transform(&phi, a, 0.5).unwrap();
        let r = inverse_transform(&f, 0.2, 0.5).unwrap();
        let e0 = r.phi.phi().try_sub(phi.phi()).unwrap().sup_norm();
        let e1 = r.phi.phi_t().try_sub(phi.phi_t()).unwrap().sup_norm();
        assert!(e0 < 1e-6 && e1 < 1e-6, "seed {seed}: {e0} {e1}");
        assert!(r.delta.abs() < 1e-6, "{}", r.delta);
        assert!(r.residual_norm < 1e-8, "{}", r.residual_norm);
    }
}

#[test]
fn linear_solve_meets_residual_and_bound() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for beta0 in [0.0, 0.4] {
        let ctx = FContext {
            beta0,
            t: 1.0,
            x0: -0.3,
        };
        let rhs = random_bumps(g, &mut rng, 6);
        let s = solve_linearized_f2(&rhs, &ctx).unwrap();
        let back = apply_linearized_f2(s.lambda, &s.w, &ctx).unwrap();
        let res = back.try_sub(&rhs).unwrap().sup_norm();
        assert!(res < 1e-8, "{res}");
        // Young's inequality with |cosh ratio| <= 2 exp(-gamma |x - y|)
        let gamma = ctx.gamma0();
        let c = (2.0 * 2f64.sqrt() + 2.0) / gamma.sqrt();
        let l2 = sgkink_core::field::norm(&rhs, NormSpec::Lp(2.0)).unwrap();
        assert!(s.w.sup_norm() <= c * l2);
    }
}

#[test]
fn operator_i_obeys_exponential_bound() {
    let g = Grid::new(-32.0, 32.0, 1024).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_bumps(g, &mut rng, 5);
    let (beta, center, t) = (0.4, 0.2, 1.5);
    let gamma = 1.0 / (1.0f64 - beta * beta).sqrt();
    let i = operator_i(&f, beta, center, t).unwrap();
    for (k, x) in g.points().enumerate().step_by(7) {
        let bound: f64 = g
            .points()
            .zip(f.values())
            .map(|(y, v)| 2.0 * (-gamma * (x - y).abs()).exp() * v.abs() * g.dx())
            .sum();
        assert!(i.values()[k].abs() <= bound + 1e-12);
    }
}

#[test]
fn partners_stay_partners_under_evolution() {
    // both fields evolved independently; the residual is integrator error
    let res = |n: usize, dt: f64| {
        let g = Grid::new(-32.0, 32.0, n).unwrap();
        let phi = random_phi(g, 9, 0.05);
        let a = a_of_beta(0.2);
        let f = forward_transform(&phi, a, 0.0).unwrap();
        let sch = Scheme::new(SchemeKind::Leapfrog, dt).unwrap();
        let mut sf = Stepper::new(&f, sch).unwrap();
        let mut sp = Stepper::new(&phi, sch).unwrap();
        sf.advance_to(10.0).unwrap();
        sp.advance_to(10.0).unwrap();
        let (r1, r2) = backlund_residual(&sf.state(), &sp.state(), a).unwrap();
        r1.sup_norm().max(r2.sup_norm())
    };
    let coarse = res(1024, 1.0 / 32.0);
    let fine = res(2048, 1.0 / 64.0);
    assert!(coarse < 1e-2);
    let ratio = coarse / fine;
    assert!((3.0..5.5).contains(&ratio), "{coarse} {fine} {ratio}");
}
