mod common;

use common::{instance, random_orthogonal, random_symmetric, Instance};
use proptest::prelude::*;
use riccati_geom_core::cgcare::{
    derived_matrices, normal_rank_popov, solve_reduced, spectral_factor_sample, verify_cgcare,
};
use riccati_geom_core::geometry::{
    check_kernel_output_nulling, friend_certificate, isa_sequence, kernel_of_solution,
    largest_output_nulling, reachability_on, reachability_with_friend, r0x, reachable_subspace,
};
use riccati_geom_core::hamiltonian::{invariant_zeros, pencil_decompose, rank_scan, rosenbrock_rank};
use riccati_geom_core::linalg::{eig, pinv, rank, Svd};
use riccati_geom_core::popov::{factor_popov, input_split, popov_function};
use riccati_geom_core::sample::{rng, sample_points, uniform_matrix};
use riccati_geom_core::sim::{cost, lyapunov_cost, quadrature_cost, CostMethod};
use riccati_geom_core::stabilize::{stabilizing_gain, verify_stabilization};
use riccati_geom_core::{Complex64, Matrix, PopovTriple, Settings, Spectrum, Subspace};

const TOL: f64 = 1e-8;
const DEFECT: f64 = 1e-7;

fn settings() -> Settings {
    Settings::default()
}

fn scale(inst: &Instance) -> f64 {
    let s = &inst.sigma;
    1.0 + s.scale() + inst.x.norm() * (1.0 + s.a().norm() + s.b().norm()).powi(2)
}

fn poles(a: &Matrix) -> Vec<Complex64> {
    eig(a).unwrap().iter().flat_map(|z| [*z, -*z]).collect()
}

fn get(seed: u64) -> Result<Instance, TestCaseError> {
    match instance(seed) {
        Some(i) => Ok(i),
        None => Err(TestCaseError::reject("reduced solver declined the instance")),
    }
}

fn cases() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        max_global_rejects: 4096,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn popov_function_invariant_under_x(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let mut g = rng(seed ^ 0x5a5a);
        let x = random_symmetric(&mut g, s.n()).scale(3.0);
        for z in sample_points(seed, 3, &poles(s.a()), 0.05) {
            let plain = popov_function(s, z, None, TOL).unwrap();
            let with_x = popov_function(s, z, Some(&x), TOL).unwrap();
            let mag = 1.0 + plain.max_abs();
            prop_assert!(plain.max_diff(&with_x) <= 1e-8 * mag);
        }
    }

    #[test]
    fn factorization_and_kernel_projector(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let f = factor_popov(s, TOL).unwrap();
        prop_assert!(f.reconstruction_defect(s) <= TOL * s.pi().norm().max(1.0));
        let split = input_split(s, TOL).unwrap();
        let g = &split.g;
        prop_assert!((s.r() * g).max_abs() <= DEFECT * s.scale());
        prop_assert!((g * g).max_diff(g) <= 1e-12);
        prop_assert_eq!(rank(g, TOL).unwrap(), s.m() - rank(s.r(), TOL).unwrap());
    }

    #[test]
    fn riccati_identities(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let sc = scale(&inst);
        let dm = derived_matrices(s, &inst.x, TOL).unwrap();
        let rp = pinv(s.r(), TOL).unwrap();
        let schur = &dm.q_x - &(&(&dm.s_x * &rp) * &dm.s_x.transpose());
        prop_assert!(schur.norm() <= DEFECT * sc);
        let lyap = &(&(&inst.x * &dm.a_x) + &(&dm.a_x.transpose() * &inst.x)) + &dm.q0x;
        prop_assert!(lyap.norm() <= DEFECT * sc);
        let cc = &dm.c_x.transpose() * &dm.c_x;
        prop_assert!(cc.max_diff(&dm.q0x) <= DEFECT * sc);
    }

    #[test]
    fn spectral_factor_and_normal_rank(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        for z in sample_points(seed, 5, &poles(s.a()), 0.05) {
            let w = spectral_factor_sample(s, &inst.x, z, TOL).unwrap();
            let wm = spectral_factor_sample(s, &inst.x, -z, TOL).unwrap();
            let phi = popov_function(s, z, None, TOL).unwrap();
            prop_assert!((&wm.transpose() * &w).max_diff(&phi) <= 1e-8 * (1.0 + phi.max_abs()));
        }
        prop_assert_eq!(
            normal_rank_popov(s, &inst.x, settings()).unwrap(),
            rank(s.r(), TOL).unwrap()
        );
    }

    #[test]
    fn r0_lies_in_output_kernel_and_kernel_of_x(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let sc = scale(&inst);
        let r0 = r0x(s, &inst.x, TOL).unwrap();
        prop_assert_eq!(r0.dim(), inst.r);
        let dm = derived_matrices(s, &inst.x, TOL).unwrap();
        prop_assert!((&dm.c_x * r0.basis()).norm() <= DEFECT * sc);
        prop_assert!((&inst.x * r0.basis()).norm() <= DEFECT * sc);
    }

    #[test]
    fn kernel_of_x_is_output_nulling(seed in any::<u64>()) {
        let inst = get(seed)?;
        let rep = check_kernel_output_nulling(&inst.sigma, &inst.x, TOL).unwrap();
        prop_assert!(rep.is_output_nulling);
        prop_assert!(rep.friend_is_minus_kx, "{:?}", rep);
    }

    #[test]
    fn r0_independent_of_solution(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let dec = pencil_decompose(s, &inst.x, TOL).unwrap();
        prop_assume!(inst.m1 > 0 && dec.r < s.n());
        let other = eig(&dec.gamma).unwrap().negated();
        let y = match solve_reduced(s, Some(&other), settings()) {
            Ok(c) => c.x,
            Err(_) => return Err(TestCaseError::reject("no second solution")),
        };
        prop_assert!(verify_cgcare(s, &y, TOL).unwrap().is_cgcare());
        let rx = r0x(s, &inst.x, TOL).unwrap();
        let ry = r0x(s, &y, TOL).unwrap();
        prop_assert!(rx.equals(&ry, TOL).unwrap());
        let ax = derived_matrices(s, &inst.x, TOL).unwrap().a_x;
        let ay = derived_matrices(s, &y, TOL).unwrap().a_x;
        let p = rx.basis();
        prop_assert!((&ax * p).max_diff(&(&ay * p)) <= DEFECT * (scale(&inst) + y.norm() * s.b().norm().powi(2)));
    }

    #[test]
    fn reachability_on_kernel_equals_r0(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let (ker, _) = kernel_of_solution(&inst.x, TOL).unwrap();
        let rstar = reachability_on(s.a(), s.b(), &inst.c, &inst.d, &ker, TOL).unwrap();
        let r0 = r0x(s, &inst.x, TOL).unwrap();
        prop_assert!(rstar.equals(&r0, TOL).unwrap(), "R* dim {} vs R0 dim {}", rstar.dim(), r0.dim());
    }

    #[test]
    fn reachability_friend_independent(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let (ker, _) = kernel_of_solution(&inst.x, TOL).unwrap();
        prop_assume!(!ker.is_zero());
        let cert = friend_certificate(s.a(), s.b(), &inst.c, &inst.d, &ker, TOL).unwrap();
        // another friend: move Ω along the homogeneous solutions
        let k = ker.dim();
        let lhs = Matrix::block2(ker.basis(), s.b(), &Matrix::zeros(inst.c.rows(), k), &inst.d);
        let null = Subspace::kernel(&lhs, TOL).unwrap();
        prop_assume!(!null.is_zero());
        let mut g = rng(seed ^ 0xf00d);
        let shift = null.basis() * &uniform_matrix(&mut g, null.dim(), k);
        let omega_shift = shift.rows_range(k, s.m());
        let other = &cert.friend - &(&omega_shift * &ker.basis().transpose());
        let r1 = reachability_with_friend(s.a(), s.b(), &inst.d, &ker, &cert.friend, TOL).unwrap();
        let r2 = reachability_with_friend(s.a(), s.b(), &inst.d, &ker, &other, TOL).unwrap();
        prop_assert!(r1.equals(&r2, TOL).unwrap());
    }

    #[test]
    fn isa_is_monotone_and_output_nulling(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let seq = isa_sequence(s.a(), s.b(), &inst.c, &inst.d, TOL).unwrap();
        prop_assert!(seq.len() <= s.n() + 2);
        for w in seq.windows(2) {
            prop_assert!(w[0].contains(&w[1], TOL).unwrap());
        }
        let cert = largest_output_nulling(s.a(), s.b(), &inst.c, &inst.d, TOL).unwrap();
        let (ker, _) = kernel_of_solution(&inst.x, TOL).unwrap();
        // ker X is output-nulling, hence inside V*
        prop_assert!(cert.v.contains(&ker, 1e-6).unwrap());
    }

    #[test]
    fn pencil_structure(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let n = s.n();
        let dec = pencil_decompose(s, &inst.x, TOL).unwrap();
        let m1 = rank(s.r(), TOL).unwrap();
        prop_assert_eq!(dec.normal_rank, 2 * n + m1);
        prop_assert_eq!(dec.infinite_multiplicity, m1);
        prop_assert_eq!(dec.r, r0x(s, &inst.x, TOL).unwrap().dim());
        prop_assert!(dec.r0block.inverse().is_ok());
        prop_assert_eq!(reachable_subspace(&dec.a11, &dec.b21, TOL).unwrap().dim(), dec.r);
        let pts = sample_points(seed, 5, &poles(s.a()), 0.05);
        for rs in rank_scan(s, &inst.x, &pts, TOL).unwrap() {
            prop_assert_eq!(rs.rank, 2 * n + m1);
        }
        let zeros = invariant_zeros(s, &inst.x, settings()).unwrap();
        prop_assert!(zeros.matches(&zeros.negated(), 1e-8 * (1.0 + dec.gamma.norm())));
        let ax = derived_matrices(s, &inst.x, TOL).unwrap().a_x;
        let controllable = eig(&dec.a11).unwrap();
        let rest = eig(&ax).unwrap().remove(&controllable);
        prop_assert!(rest.matches(&eig(&dec.gamma).unwrap(), 1e-6 * (1.0 + ax.norm())));
    }

    #[test]
    fn zeros_invariant_under_feedback_injection_similarity(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 2 + (seed % 4) as usize;
        let m = 1 + (seed / 4 % 3) as usize;
        let a = uniform_matrix(&mut g, n, n);
        let b = uniform_matrix(&mut g, n, m);
        let c = uniform_matrix(&mut g, m, n);
        let d = uniform_matrix(&mut g, m, m).add_scaled_identity(2.0);
        let zeros = eig(&(&a - &(&(&b * &d.inverse().unwrap()) * &c))).unwrap();
        let f = uniform_matrix(&mut g, m, n);
        let h = uniform_matrix(&mut g, n, m);
        let t = random_orthogonal(&mut g, n).add_scaled_identity(0.5);
        let ti = t.inverse().unwrap();
        let quads = [
            (a.clone(), b.clone(), c.clone(), d.clone()),
            (&a + &(&b * &f), b.clone(), &c + &(&d * &f), d.clone()),
            (&a + &(&h * &c), &b + &(&h * &d), c.clone(), d.clone()),
            (&(&ti * &a) * &t, &ti * &b, &c * &t, d.clone()),
        ];
        let avoid: Vec<Complex64> = zeros.iter().copied().collect();
        let generic = sample_points(seed, 4, &avoid, 0.05);
        for (qa, qb, qc, qd) in &quads {
            for z in &zeros {
                prop_assert!(rosenbrock_rank(qa, qb, qc, qd, *z, TOL).unwrap() < n + m);
            }
            for z in &generic {
                prop_assert_eq!(rosenbrock_rank(qa, qb, qc, qd, *z, TOL).unwrap(), n + m);
            }
            let zq = eig(&(qa - &(&(qb * &qd.inverse().unwrap()) * qc))).unwrap();
            prop_assert!(zq.matches(&zeros, 1e-6 * (1.0 + a.norm() + b.norm() * c.norm())));
        }
    }

    #[test]
    fn stabilization_invariants(seed in any::<u64>()) {
        let inst = get(seed)?;
        prop_assume!(inst.r > 0);
        let s = &inst.sigma;
        let res = stabilizing_gain(s, &inst.x, None, settings()).unwrap();
        let rep = verify_stabilization(s, &inst.x, &res, settings()).unwrap();
        prop_assert!(rep.equation.passed, "{:?}", rep.equation);
        prop_assert!(rep.invariance.passed && rep.output_nulling.passed);
        prop_assert!(rep.quotient_spectrum.passed, "{:?}", rep.quotient_spectrum);
        if let Some(c) = rep.cost {
            prop_assert!(c.passed, "{:?}", c);
        }
        let p = res.r0.basis();
        let away = &Matrix::identity(s.n()) - &(p * &p.transpose());
        prop_assert!((&res.l * &away).max_abs() <= 1e-10 * (1.0 + res.l.max_abs()));
        // assigned eigenvalues appear in A_X + B L
        let ax = derived_matrices(s, &inst.x, TOL).unwrap().a_x;
        let full = eig(&(&ax + &(s.b() * &res.l))).unwrap();
        prop_assert!(full.matches(&res.assigned.union(&res.untouched), 1e-6 * (1.0 + ax.norm())));
        let restricted = eig(&(&(&p.transpose() * &(&ax + &(s.b() * &res.l))) * p)).unwrap();
        let wanted = Spectrum::real(&(1..=inst.r).map(|i| -(i as f64)).collect::<Vec<_>>());
        prop_assert!(restricted.matches(&wanted, 1e-6));
    }

    #[test]
    fn lyapunov_and_quadrature_agree(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 1 + (seed % 5) as usize;
        let raw = uniform_matrix(&mut g, n, n);
        let shift = eig(&raw).unwrap().max_real() + 0.2;
        let a = raw.add_scaled_identity(-shift.max(0.0) - 0.1);
        let c = uniform_matrix(&mut g, n, n);
        let q = &c.transpose() * &c;
        let x0 = uniform_matrix(&mut g, n, 1).column(0);
        let l = lyapunov_cost(&a, &q, &x0).unwrap();
        let qd = quadrature_cost(&a, &q, &x0).unwrap();
        prop_assert_eq!(qd.method, CostMethod::Quadrature);
        prop_assert!((l.value - qd.value).abs() <= (1e-6f64).max(2.0 * qd.tail_bound) * (1.0 + l.value));
        prop_assert!(l.value >= -1e-12);
    }

    #[test]
    fn cost_is_nonnegative(seed in any::<u64>()) {
        let inst = get(seed)?;
        let s = &inst.sigma;
        let mut g = rng(seed ^ 7);
        let k = uniform_matrix(&mut g, s.m(), s.n());
        let x0 = uniform_matrix(&mut g, s.n(), 1).column(0);
        let j = cost(s, &k, &x0, TOL).unwrap();
        prop_assert!(!j.is_finite() || j.value >= -1e-9 * (1.0 + j.value.abs()));
    }

    #[test]
    fn regular_case_recovers_classical_care(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 1 + (seed % 6) as usize;
        let m = 1 + (seed / 6 % 3) as usize;
        let a = uniform_matrix(&mut g, n, n);
        let b = uniform_matrix(&mut g, n, m);
        let c = uniform_matrix(&mut g, n, n);
        let rf = uniform_matrix(&mut g, m, m).add_scaled_identity(2.0);
        let sigma = PopovTriple::new(
            a,
            b,
            &c.transpose() * &c,
            Matrix::zeros(n, m),
            &rf.transpose() * &rf,
        )
        .unwrap();
        let sol = solve_reduced(&sigma, None, settings()).unwrap();
        // same conditioning domain as the shared generator
        prop_assume!(sol.x.norm() <= 1e3);
        prop_assert!(sol.residual_norm <= 1e-8 * (1.0 + sol.x.norm()));
        let ax = derived_matrices(&sigma, &sol.x, TOL).unwrap().a_x;
        prop_assert!(eig(&ax).unwrap().is_hurwitz());
        let z = invariant_zeros(&sigma, &sol.x, settings()).unwrap();
        prop_assert!(z.matches(&eig(&ax).unwrap().mirrored(), 1e-8 * (1.0 + ax.norm())));
    }
}

#[test]
fn generator_acceptance_rate() {
    let ok = (0..200u64).filter(|&s| instance(s).is_some()).count();
    assert!(ok >= 150, "only {} of 200 generated instances were solvable", ok);
}

#[test]
fn svd_reconstructs() {
    let mut g = rng(3);
    let a = uniform_matrix(&mut g, 5, 3);
    let svd = Svd::new(&a).unwrap();
    let mut us = svd.u.clone();
    for j in 0..3 {
        for i in 0..5 {
            us[(i, j)] *= svd.s[j];
        }
    }
    assert!((&us * &svd.v.transpose()).max_diff(&a) < 1e-13);
}
