//! Hand-evaluated single steps and fixed points of every update rule.

use splitfeas::solvers::{
    step_am_sf1p, step_cq_multiset, step_cq_sf1p, step_padmm_sf1, step_pg_sf1p, step_pg_sf3,
    step_wpadmm_sf4,
};
use splitfeas::{
    run, Algorithm, InitialPoint, IterateState, LinearMap, NMode, ProblemInstance, SetSpec,
    SolverConfig, Termination,
};

fn close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

fn ball(r: f64) -> SetSpec {
    SetSpec::ball(vec![0.0, 0.0], r).unwrap()
}

fn whole() -> SetSpec {
    SetSpec::Whole { dimension: 2 }
}

fn identity_problem(c: SetSpec, q: SetSpec) -> ProblemInstance {
    ProblemInstance::single(c, LinearMap::identity(2), q).unwrap()
}

fn config(alg: Algorithm, p: &ProblemInstance) -> SolverConfig {
    SolverConfig::defaults(alg, p).unwrap()
}

#[test]
fn pg_sf1p_hand_step() {
    let p = identity_problem(whole(), whole());
    let mut cfg = config(Algorithm::PgSf1p, &p);
    cfg.lambda = 1.0;
    cfg.tau = 2.0;
    cfg.override_requirements = true;
    let s = IterateState::new(vec![1.0, 0.0]).with_u(vec![0.0, 0.0]);
    let next = step_pg_sf1p(&s, &p, &cfg).unwrap();
    close(&next.x, &[0.5, 0.0], 1e-15);
    close(next.u.as_ref().unwrap(), &[0.5, 0.0], 1e-15);
}

#[test]
fn pg_sf1p_swap_symmetry() {
    let p = identity_problem(ball(1.0), ball(1.0));
    let cfg = config(Algorithm::PgSf1p, &p);
    let a = step_pg_sf1p(&IterateState::new(vec![0.3, -2.0]).with_u(vec![1.5, 0.2]), &p, &cfg).unwrap();
    let b = step_pg_sf1p(&IterateState::new(vec![1.5, 0.2]).with_u(vec![0.3, -2.0]), &p, &cfg).unwrap();
    close(&a.x, b.u.as_ref().unwrap(), 1e-15);
    close(a.u.as_ref().unwrap(), &b.x, 1e-15);
}

#[test]
fn am_two_hand_steps() {
    let p = identity_problem(ball(1.0), ball(1.0));
    let mut cfg = config(Algorithm::AmSf1p, &p);
    cfg.max_iter = 2;
    let init = InitialPoint::default_for(Algorithm::AmSf1p, &p, vec![3.0, 0.0]).unwrap();
    let trace = run(&p, &cfg, &init).unwrap();
    let last = trace.last();
    close(&last.x, &[1.0, 0.0], 1e-12);
    close(last.u.as_ref().unwrap(), &[1.0, 0.0], 1e-12);
    assert_eq!(last.residual_c, 0.0);
    assert_eq!(last.residual_q, 0.0);
    assert_eq!(trace.termination, Termination::ResidualTol);
}

#[test]
fn am_orthogonal_step_is_projection_of_adjoint() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let a = LinearMap::from_rows(&[vec![r, r], vec![r, -r]]).unwrap();
    let p = ProblemInstance::single(ball(1.0), a.clone(), SetSpec::boxed(vec![-5.0; 2], vec![5.0; 2]).unwrap()).unwrap();
    let cfg = config(Algorithm::AmSf1p, &p);
    let u = vec![3.0, 1.0];
    let next = step_am_sf1p(&IterateState::new(vec![0.0, 0.0]).with_u(u.clone()), &p, &cfg).unwrap();
    let expected = p.set_c.project(&a.apply_adjoint(&u).unwrap()).unwrap();
    close(&next.x, &expected, 1e-12);
}

#[test]
fn cq_hand_step() {
    let p = identity_problem(ball(10.0), SetSpec::finite(vec![vec![0.0, 0.0]]).unwrap());
    let mut cfg = config(Algorithm::CqSf1p, &p);
    cfg.lambda = 1.0;
    cfg.tau = 21.0 / 20.0;
    let next = step_cq_sf1p(&IterateState::new(vec![1.0, 0.0]).with_u(vec![0.0, 0.0]), &p, &cfg).unwrap();
    close(next.u.as_ref().unwrap(), &[0.0, 0.0], 0.0);
    close(&next.x, &[1.0 / 21.0, 0.0], 1e-15);
}

#[test]
fn pg_sf3_hand_step() {
    let p = identity_problem(ball(10.0), ball(1.0));
    let mut cfg = config(Algorithm::PgSf3, &p);
    cfg.tau = 1.25;
    let next = step_pg_sf3(&IterateState::new(vec![2.0, 0.0]), &p, &cfg).unwrap();
    close(&next.x, &[1.2, 0.0], 1e-15);
}

#[test]
fn pg_sf3_scaling_invariance() {
    let base = LinearMap::from_rows(&[vec![1.0, 0.5], vec![-0.3, 1.0]]).unwrap();
    let c = 3.0;
    let scaled = LinearMap::from_rows(&base.to_rows().iter().map(|r| r.iter().map(|v| c * v).collect()).collect::<Vec<_>>()).unwrap();
    let p1 = ProblemInstance::single(ball(4.0), base, ball(1.0)).unwrap();
    let p2 = ProblemInstance::single(ball(4.0), scaled, ball(c)).unwrap();
    let mut cfg1 = config(Algorithm::PgSf3, &p1);
    cfg1.tau = 2.0;
    let mut cfg2 = cfg1.clone();
    cfg2.tau = c * c * cfg1.tau;
    let s = IterateState::new(vec![2.0, -1.5]);
    let a = step_pg_sf3(&s, &p1, &cfg1).unwrap();
    let b = step_pg_sf3(&s, &p2, &cfg2).unwrap();
    close(&a.x, &b.x, 1e-12);
}

#[test]
fn pg_sf3_rejects_nonconvex_q_without_override() {
    let p = identity_problem(ball(10.0), SetSpec::sparsity(2, 1).unwrap());
    let mut cfg = config(Algorithm::PgSf3, &p);
    let s = IterateState::new(vec![2.0, 1.0]);
    assert!(step_pg_sf3(&s, &p, &cfg).is_err());
    cfg.override_requirements = true;
    assert!(step_pg_sf3(&s, &p, &cfg).is_ok());
}

#[test]
fn wpadmm_linearized_hand_step() {
    let p = identity_problem(ball(1.0), whole());
    let mut cfg = config(Algorithm::WpadmmSf4(NMode::Linearized), &p);
    cfg.rho = 1.0;
    cfg.tau = 2.0;
    let s = IterateState::new(vec![2.0, 0.0]).with_u(vec![0.0, 0.0]).with_y(vec![0.0, 0.0]);
    let next = step_wpadmm_sf4(&s, &p, &cfg).unwrap();
    close(next.u.as_ref().unwrap(), &[2.0, 0.0], 0.0);
    close(&next.x, &[1.5, 0.0], 1e-15);
}

#[test]
fn cq_multiset_hand_step() {
    let q1 = ball(1.0);
    let q2 = SetSpec::boxed(vec![-1.0; 2], vec![1.0; 2]).unwrap();
    let p = ProblemInstance::multiset(whole(), vec![LinearMap::identity(2); 2], vec![q1, q2]).unwrap();
    let mut cfg = config(Algorithm::CqMultiset, &p);
    cfg.tau = 2.5;
    let next = step_cq_multiset(&IterateState::new(vec![2.0, 0.0]), &p, &cfg).unwrap();
    close(&next.x, &[1.2, 0.0], 1e-15);
}

#[test]
fn cq_multiset_single_pair_matches_pg_sf3_bitwise() {
    let a = LinearMap::from_rows(&[vec![1.0, 0.2], vec![0.1, 0.7], vec![-0.4, 0.3]]).unwrap();
    let q = SetSpec::boxed(vec![-0.5; 3], vec![0.5; 3]).unwrap();
    let p = ProblemInstance::single(ball(2.0), a, q).unwrap();
    let mut multi = config(Algorithm::CqMultiset, &p);
    let mut single = config(Algorithm::PgSf3, &p);
    multi.tau = 1.7;
    single.tau = 1.7;
    let mut s = IterateState::new(vec![3.0, -1.0]);
    for _ in 0..20 {
        let a = step_cq_multiset(&s, &p, &multi).unwrap();
        let b = step_pg_sf3(&s, &p, &single).unwrap();
        assert_eq!(a.x, b.x);
        s = a;
    }
}

#[test]
fn padmm_multiplier_update() {
    let a = LinearMap::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
    let p = ProblemInstance::single(ball(1.0), a.clone(), ball(0.5)).unwrap();
    let mut cfg = config(Algorithm::PadmmSf1, &p);
    cfg.rho = 2.0;
    let s = IterateState::new(vec![0.8, 0.1]).with_u(vec![0.0, 2.0]).with_y(vec![0.0, 0.0]);
    let next = step_padmm_sf1(&s, &p, &cfg).unwrap();
    let ax = a.apply(&next.x).unwrap();
    let u = next.u.as_ref().unwrap();
    let y = next.y.as_ref().unwrap();
    for i in 0..2 {
        assert_eq!(y[i], 2.0 * (ax[i] - u[i]));
    }
}

#[test]
fn padmm_zero_weight_u_step_projects_ax() {
    let a = LinearMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let p = ProblemInstance::single(ball(5.0), a, ball(1.0)).unwrap();
    let mut cfg = config(Algorithm::PadmmSf1, &p);
    cfg.tau1 = 0.0;
    let s = IterateState::new(vec![1.0, 1.0]).with_u(vec![9.0, 9.0]).with_y(vec![0.0, 0.0]);
    let next = step_padmm_sf1(&s, &p, &cfg).unwrap();
    let expected = ball(1.0).project(&[2.0, 1.0]).unwrap();
    close(next.u.as_ref().unwrap(), &expected, 1e-15);
}

/// A consistent point with `u = Ax`, `y = 0` is left unchanged by every rule.
#[test]
fn feasible_points_are_fixed() {
    let a = LinearMap::from_rows(&[vec![0.6, 0.8], vec![-0.8, 0.6]]).unwrap();
    let x = vec![0.3, -0.2];
    let ax = a.apply(&x).unwrap();
    let p = ProblemInstance::single(ball(1.0), a, ball(1.0)).unwrap().with_witness(x.clone()).unwrap();
    let state = IterateState::new(x.clone()).with_u(ax.clone()).with_y(vec![0.0; 2]);
    for alg in Algorithm::ALL {
        let cfg = config(alg, &p);
        let s = match alg {
            Algorithm::PgSf3 | Algorithm::CqMultiset => IterateState::new(x.clone()),
            a if !a.is_lagrangian() => IterateState::new(x.clone()).with_u(ax.clone()),
            _ => state.clone(),
        };
        let next = splitfeas::solvers::Stepper::new(&p, &cfg).unwrap().step(&s).unwrap();
        close(&next.x, &x, 1e-10);
        if let Some(u) = &next.u {
            close(u, &ax, 1e-10);
        }
        if let Some(y) = &next.y {
            close(y, &[0.0, 0.0], 1e-9);
        }
    }
}

#[test]
fn run_from_witness_stops_immediately() {
    let x = vec![0.1, 0.2];
    let p = identity_problem(ball(1.0), ball(1.0)).with_witness(x.clone()).unwrap();
    for alg in [Algorithm::CqSf1p, Algorithm::PgSf1p, Algorithm::WpadmmSf4(NMode::ProxIdentity)] {
        let cfg = config(alg, &p);
        let init = InitialPoint::default_for(alg, &p, x.clone()).unwrap();
        let trace = run(&p, &cfg, &init).unwrap();
        assert!(trace.iterations() <= 1, "{alg}");
        assert_eq!(trace.termination, Termination::ResidualTol);
    }
}

#[test]
fn cq_geometric_decay_ten_steps() {
    let p = ProblemInstance::single(
        SetSpec::ball(vec![0.0], 10.0).unwrap(),
        LinearMap::identity(1),
        SetSpec::finite(vec![vec![0.0]]).unwrap(),
    )
    .unwrap();
    let mut cfg = config(Algorithm::CqSf1p, &p);
    cfg.tau = 21.0;
    cfg.max_iter = 10;
    cfg.residual_tol = 1e-300;
    let init = InitialPoint::default_for(Algorithm::CqSf1p, &p, vec![1.0]).unwrap();
    let trace = run(&p, &cfg, &init).unwrap();
    assert_eq!(trace.records.len(), 11);
    for r in &trace.records {
        assert!((r.x[0] - (20.0f64 / 21.0).powi(r.k as i32)).abs() <= 1e-14);
    }
}

#[test]
fn wrong_initial_dimensions_are_errors() {
    let p = identity_problem(ball(1.0), ball(1.0));
    let cfg = config(Algorithm::CqSf1p, &p);
    let init = InitialPoint { x0: vec![0.0; 3], u0: None, y0: None };
    assert!(run(&p, &cfg, &init).is_err());
    let cfg = config(Algorithm::PgSf1p, &p);
    let init = InitialPoint { x0: vec![0.0; 2], u0: None, y0: None };
    assert!(run(&p, &cfg, &init).is_err());
}
