use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use homoclinic::fountain::{beta_estimate, beta_profile, fountain_table, r_n_compute, BasisSplit, FountainConfig};
use homoclinic::lattice::{
    energy, norm_inf, norm_lp, norm_x_pow, residual, CoefficientField, LatticeSeq, ProblemSpec, Profile, Window,
};
use homoclinic::nonlinearity::{check_hypothesis, Condition, NonlinearitySpec, SamplingPlan, Verdict, WeightConvention};
use homoclinic::solver::{
    deflated_solve_traced, mountain_pass_traced, newton_solve, SolutionSet, SolverConfig,
};

fn field(a: Vec<f64>, b: Vec<f64>) -> CoefficientField {
    let window = Window::new((b.len() - 1) / 2).unwrap();
    let first = window.k_min();
    CoefficientField::new(window, Profile::Table { first, values: a }, Profile::Table { first, values: b }, None).unwrap()
}

/// Window half-width, coefficients and a profile on it.
fn lattice_case() -> impl Strategy<Value = (CoefficientField, Vec<f64>)> {
    (1usize..8).prop_flat_map(|k| {
        let n = 2 * k + 1;
        (
            prop::collection::vec(0.2f64..5.0, n + 1),
            prop::collection::vec(0.2f64..20.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
            .prop_map(|(a, b, u)| (field(a, b), u))
    })
}

fn nonlinearity(p: f64, pick: u8) -> NonlinearitySpec {
    match pick % 3 {
        0 => NonlinearitySpec::example_log(p, 2.0, 2.0, WeightConvention::Shifted).unwrap(),
        1 => NonlinearitySpec::example_log(p, 1.5, 1.0, WeightConvention::Absolute).unwrap(),
        _ => NonlinearitySpec::pure_power(p, p + 1.5, 0.7).unwrap(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_even_and_residual_odd((coeffs, u) in lattice_case(), p in prop::sample::select(vec![2.0, 3.0, 2.5]), pick in 0u8..3) {
        let w = coeffs.window();
        let spec = ProblemSpec::new(p, 1.3, coeffs, nonlinearity(p, pick)).unwrap();
        let u = LatticeSeq::new(w, u).unwrap();
        let (j, jm) = (energy(&u, &spec).unwrap().total, energy(&u.neg(), &spec).unwrap().total);
        prop_assert!(rel(j, jm) <= 1e-12, "{j} vs {jm}");
        let (r, rm) = (residual(&u, &spec), residual(&u.neg(), &spec));
        for (x, y) in r.values().iter().zip(rm.values()) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn phi_is_p_homogeneous((coeffs, u) in lattice_case(), p in 1.2f64..5.0, c in -20.0f64..20.0) {
        let u = LatticeSeq::new(coeffs.window(), u).unwrap();
        let lhs = norm_x_pow(&u.scaled(c), &coeffs, p);
        let rhs = c.abs().powf(p) * norm_x_pow(&u, &coeffs, p);
        prop_assert!(rel(lhs, rhs) <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn embedding_chain((coeffs, u) in lattice_case(), p in 1.1f64..6.0) {
        let u = LatticeSeq::new(coeffs.window(), u).unwrap();
        let x = norm_x_pow(&u, &coeffs, p).powf(1.0 / p);
        let slack = 1e-12 * x.max(1e-300);
        prop_assert!(norm_inf(&u) <= norm_lp(&u, p) + slack);
        prop_assert!(norm_lp(&u, p) <= coeffs.b0().powf(-1.0 / p) * x + slack);
    }

    #[test]
    fn lp_norms_ordered((coeffs, u) in lattice_case(), p in 1.1f64..4.0, dq in 0.0f64..4.0) {
        let u = LatticeSeq::new(coeffs.window(), u).unwrap();
        prop_assert!(norm_lp(&u, p + dq) <= norm_lp(&u, p) * (1.0 + 1e-12));
    }

    #[test]
    fn primitive_differentiates_to_f(k in -60i64..60, t in 0.1f64..10.0, neg: bool, pick in 0u8..3, p in prop::sample::select(vec![2.0, 3.0])) {
        let nl = nonlinearity(p, pick);
        let t = if neg { -t } else { t };
        let h = 1e-5 * t.abs();
        let fd = (nl.primitive(k, t + h).unwrap() - nl.primitive(k, t - h).unwrap()) / (2.0 * h);
        let f = nl.f(k, t);
        prop_assert!((fd - f).abs() <= 1e-6 * f.abs().max(1e-300), "{fd} vs {f}");
        prop_assert!((nl.f(k, -t) + f).abs() <= 1e-12 * f.abs());
        let big = nl.primitive(k, t).unwrap();
        prop_assert!(rel(nl.primitive(k, -t).unwrap(), big) <= 1e-12);
        let curly = nl.curly_f(k, t).unwrap();
        prop_assert!((curly - (f * t - p * big)).abs() <= 1e-10, "{curly}");
    }

    #[test]
    fn lambda_decreases_energy(k in 1usize..6, seed in 0u64..1000, l1 in 0.1f64..5.0, dl in 0.01f64..5.0) {
        let w = Window::new(k).unwrap();
        let spec = ProblemSpec::new(
            2.0,
            l1,
            CoefficientField::new(w, Profile::Constant { value: 1.0 }, Profile::Polynomial { exponent: 2.0 }, None).unwrap(),
            nonlinearity(2.0, 0),
        )
        .unwrap();
        let u = LatticeSeq::from_fn(w, |j| ((j as f64 + seed as f64) * 0.7).sin() + 0.1).unwrap();
        let e = energy(&u, &spec).unwrap();
        prop_assume!(e.psi > 0.0);
        let j2 = energy(&u, &spec.with_lambda(l1 + dl).unwrap()).unwrap().total;
        prop_assert!(j2 < e.total);
    }
}

#[test]
fn zero_is_critical() {
    let w = Window::new(4).unwrap();
    for pick in 0..3 {
        let spec = ProblemSpec::new(2.0, 1.0, CoefficientField::constant(w, 1.0, 1.0).unwrap(), nonlinearity(2.0, pick)).unwrap();
        assert!(residual(&LatticeSeq::zeros(w), &spec).values().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn h2_constant_stable_under_refinement() {
    let nl = nonlinearity(2.0, 0);
    let plan = SamplingPlan { k_max: 100, t_min: 1e-3, t_max: 1e3, q: Some(4.0), ..SamplingPlan::default() };
    let d1 = check_hypothesis(&nl, Condition::H2, &plan).unwrap().constants["d"];
    let fine = SamplingPlan { per_decade: 2 * plan.per_decade, ..plan };
    let d2 = check_hypothesis(&nl, Condition::H2, &fine).unwrap().constants["d"];
    assert!(d1.is_finite() && d1 > 0.0);
    assert!((d2 - d1).abs() <= 0.05 * d1, "{d1} -> {d2}");
}

#[test]
fn refutations_survive_larger_plans() {
    let small = SamplingPlan { k_max: 60, per_decade: 4, ..SamplingPlan::default() };
    let large = SamplingPlan { k_max: 150, per_decade: 12, t_max: 1e9, ..SamplingPlan::default() };
    let nls = [
        nonlinearity(2.0, 0),
        nonlinearity(2.0, 2),
        NonlinearitySpec::zero(2.0).unwrap(),
        NonlinearitySpec::p_power(2.0, 1.0).unwrap(),
    ];
    for nl in &nls {
        for c in Condition::ALL.into_iter().filter(|c| *c != Condition::B) {
            let a = check_hypothesis(nl, c, &small).unwrap().verdict;
            let b = check_hypothesis(nl, c, &large).unwrap().verdict;
            if a.is_refuted() {
                assert!(b.is_refuted(), "{c} for {}: refuted on the small plan, {:?} on the large one", nl.label(), b);
            }
            assert!(!(a.is_refuted() && b == Verdict::SatisfiedOnSamples));
        }
    }
}

fn k2_spec() -> ProblemSpec {
    let w = Window::new(2).unwrap();
    ProblemSpec::new(2.0, 1.0, CoefficientField::constant(w, 1.0, 1.0).unwrap(), NonlinearitySpec::pure_power(2.0, 4.0, 1.0).unwrap()).unwrap()
}

#[test]
fn converged_results_reverify() {
    let spec = k2_spec();
    let cfg = SolverConfig::default();
    for amp in [0.5, 1.5, 3.0] {
        let u0 = LatticeSeq::from_fn(spec.window(), |k| amp / (1.0 + k.abs() as f64)).unwrap();
        let res = newton_solve(&u0, &spec, &cfg).unwrap();
        if res.converged {
            assert!(norm_inf(&residual(&res.u, &spec)) <= cfg.residual_tol);
        }
    }
}

#[test]
fn deflation_is_sound() {
    let spec = k2_spec();
    let cfg = SolverConfig::default();
    let w = spec.window();
    let mut known = SolutionSet::new();
    known.insert(newton_solve(&LatticeSeq::zeros(w), &spec, &cfg).unwrap());
    let mut new_roots = 0;
    for (i, amp) in [1.2, 1.5, 2.0, -1.0].into_iter().enumerate() {
        let u0 = LatticeSeq::spike(w, i as i64 - 1, amp);
        let (res, trace) = deflated_solve_traced(&known, &u0, &spec, &cfg).unwrap();
        if res.converged {
            assert!(trace.polish_shift < 10.0 * cfg.residual_tol, "{}", trace.polish_shift);
            assert!(trace.distance_to_known > SolutionSet::DEDUP_TOL);
            assert!(!known.contains(&res.u));
            known.insert(res);
            new_roots += 1;
        }
    }
    assert!(new_roots >= 2);
}

#[test]
fn mountain_pass_steps_descend() {
    let spec = k2_spec();
    let w = spec.window();
    let (res, trace) =
        mountain_pass_traced(&LatticeSeq::zeros(w), &LatticeSeq::spike(w, 0, 4.0), &spec, &SolverConfig::default()).unwrap();
    assert!(res.converged && res.energy > 0.0);
    assert!(!trace.steps.is_empty());
    assert!(trace.steps.iter().all(|s| s.energy_after < s.energy_before));
}

fn gram(split: &BasisSplit, coeffs: &CoefficientField, n: usize) -> DMatrix<f64> {
    let sites = split.z_sites(n);
    let w = coeffs.window();
    let quad = |x: &LatticeSeq, y: &LatticeSeq| {
        (norm_x_pow(&x.axpy(1.0, y), coeffs, 2.0) - norm_x_pow(&x.sub(y), coeffs, 2.0)) / 4.0
    };
    DMatrix::from_fn(sites.len(), sites.len(), |i, j| {
        quad(&LatticeSeq::spike(w, sites[i], 1.0), &LatticeSeq::spike(w, sites[j], 1.0))
    })
}

#[test]
fn beta_matches_eigenvalue_oracle_for_p_q_2() {
    let w = Window::new(6).unwrap();
    let coeffs = CoefficientField::new(w, Profile::Polynomial { exponent: 0.5 }, Profile::Polynomial { exponent: 2.0 }, None).unwrap();
    let split = BasisSplit::new(&coeffs, 2.0).unwrap();
    for n in 1..=split.dim() {
        let lam_min = SymmetricEigen::new(gram(&split, &coeffs, n)).eigenvalues.min();
        let exact = lam_min.powf(-0.5);
        let est = beta_estimate(&split, &coeffs, n, 2.0, 4, 3).unwrap().value;
        assert!(est <= exact * (1.0 + 1e-9), "n = {n}: estimate {est} above sup {exact}");
        assert!(rel(est, exact) <= 1e-6, "n = {n}: {est} vs {exact}");
    }
}

#[test]
fn beta_profiles_monotone() {
    let w = Window::new(8).unwrap();
    let coeffs = CoefficientField::new(w, Profile::Constant { value: 1.0 }, Profile::Polynomial { exponent: 1.5 }, None).unwrap();
    for p in [2.0, 3.0] {
        let split = BasisSplit::new(&coeffs, p).unwrap();
        for q in [p, p + 2.0] {
            let prof = beta_profile(&split, &coeffs, q, 3, 11).unwrap();
            assert!(prof.windows(2).all(|x| x[1].value <= x[0].value + 1e-9));
        }
    }
}

/// The sup defining `β_n` sits on the weakest spike left in `Z_n`. When
/// `b` is smaller at `+j` than at `-j`, each step of the spiral order drops
/// that maximizer and `r_n` strictly increases; under reflection symmetry
/// (or the opposite skew) consecutive `n` can share it and `r_n` ties.
fn r_n_column(skew: f64) -> Vec<homoclinic::fountain::FountainData> {
    let w = Window::new(6).unwrap();
    let b: Vec<f64> = w.sites().map(|k| 1.0 + (k * k) as f64 + skew * k as f64).collect();
    let coeffs = CoefficientField::new(w, Profile::Constant { value: 1.0 }, Profile::Table { first: -6, values: b }, None).unwrap();
    let spec = ProblemSpec::new(2.0, 1.0, coeffs, nonlinearity(2.0, 0)).unwrap();
    let cfg = FountainConfig { samples: 50, c_n_samples: 200, ..FountainConfig::default() };
    fountain_table(&spec, 0.1, 4.0, &cfg).unwrap()
}

#[test]
fn r_n_grows_with_n() {
    let rows = r_n_column(-0.3);
    let rs: Vec<f64> = rows.iter().filter_map(|r| r.r_n).collect();
    assert!(rs.len() >= 3);
    assert!(rs.windows(2).all(|x| x[1] > x[0]), "{rs:?}");
    for skew in [0.0, 0.3] {
        let rs: Vec<f64> = r_n_column(skew).iter().filter_map(|r| r.r_n).collect();
        assert!(rs.windows(2).all(|x| x[1] >= x[0]), "{rs:?}");
    }
    let bounds: Vec<f64> = rows.iter().filter_map(|r| r.a_n_bound).collect();
    assert!(bounds.windows(2).all(|x| x[1] >= x[0]));
    for r in &rows {
        let again = r_n_compute(0.1, 4.0, 1.0, 2.0, r.beta_p, r.beta_q).unwrap();
        assert_eq!(again, r.r_n);
    }
}
