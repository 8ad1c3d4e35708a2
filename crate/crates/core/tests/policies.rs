use causal_bandits::environment::{optimal_action, sample_observation, NoiseModel, SemParameters};
use causal_bandits::estimation::{ConfidenceSpec, EstimatorBank, NodeEstimator};
use causal_bandits::policies::{
    baseline_ucb_choose, linsem_ts_gaussian_choose, linsem_ucb_choose, AscentSettings, BaselineUcb,
    KnownDistPolicy, KnownMode, LinSemTsGaussian, LinSemUcb, Policy, PolicyError, TsScratch, UcbWorkspace,
};
use causal_bandits::rng::{stream, Purpose};
use causal_bandits::sem::{enumerate_actions, validate_dag, InterventionAction, WeightMatrix};
use nalgebra::{DMatrix, DVector};

fn chain() -> SemParameters {
    let dag = validate_dag(&[vec![], vec![0]], 1).unwrap();
    let obs = WeightMatrix::from_edges(&dag, &[(0, 1, 0.5)]).unwrap();
    let int = WeightMatrix::from_edges(&dag, &[(0, 1, -0.5)]).unwrap();
    SemParameters::new(dag, obs, int, NoiseModel::gaussian(vec![1.0, 1.0])).unwrap()
}

fn chain_arms() -> Vec<InterventionAction> {
    vec![InterventionAction::EMPTY, InterventionAction::from_nodes([1])]
}

/// Estimator whose point estimate is exactly `theta`.
fn exact(parents: &[usize], theta: &[f64]) -> NodeEstimator {
    let d = parents.len();
    NodeEstimator::from_parts(parents, DMatrix::identity(d, d), DVector::from_column_slice(theta), 1).unwrap()
}

fn exact_bank(p: &SemParameters) -> EstimatorBank {
    let dag = p.dag();
    let mut bank = EstimatorBank::new(dag);
    for i in 0..dag.node_count() {
        bank.set_estimator(i, false, exact(dag.parents(i), &p.obs_columns()[i]));
        bank.set_estimator(i, true, exact(dag.parents(i), &p.int_columns()[i]));
    }
    bank
}

fn run<P: Policy>(policy: &mut P, p: &SemParameters, rounds: usize, seed: u64) -> Vec<InterventionAction> {
    let mut env = stream(seed, 0, 0, Purpose::Environment);
    (1..=rounds)
        .map(|t| {
            let a = policy.choose(t).unwrap();
            let x = sample_observation(p, a, &mut env);
            policy.observe(a, &x).unwrap();
            a
        })
        .collect()
}

#[test]
fn ts_is_deterministic_under_fixed_seed() {
    let p = chain();
    let make = || {
        LinSemTsGaussian::new(p.dag(), chain_arms(), p.noise().mean().to_vec(), 1.0, stream(3, 0, 0, Purpose::Policy))
            .unwrap()
    };
    assert_eq!(run(&mut make(), &p, 300, 11), run(&mut make(), &p, 300, 11));
}

#[test]
fn ts_draws_two_samples_per_node_per_round() {
    let p = chain();
    let mut ts =
        LinSemTsGaussian::new(p.dag(), chain_arms(), p.noise().mean().to_vec(), 1.0, stream(3, 0, 0, Purpose::Policy))
            .unwrap();
    run(&mut ts, &p, 37, 5);
    assert_eq!(ts.draws(), 37 * 2 * 2);
}

#[test]
fn ts_with_zero_scale_and_exact_estimates_exploits() {
    let p = chain();
    let bank = exact_bank(&p);
    let mut scratch = TsScratch::new(p.dag());
    let mut rng = stream(1, 0, 0, Purpose::Policy);
    for _ in 0..5 {
        let a = linsem_ts_gaussian_choose(&bank, p.dag(), &chain_arms(), p.noise().mean(), 0.0, &mut rng, &mut scratch)
            .unwrap();
        assert_eq!(a, InterventionAction::EMPTY);
    }
}

#[test]
fn ts_converges_on_chain() {
    let p = chain();
    let (best, _) = optimal_action(&p, &chain_arms()).unwrap();
    let mut hits = 0;
    for rep in 0..20 {
        let mut ts = LinSemTsGaussian::new(
            p.dag(),
            chain_arms(),
            p.noise().mean().to_vec(),
            1.0,
            stream(42, 0, rep, Purpose::Policy),
        )
        .unwrap();
        let actions = run(&mut ts, &p, 2000, 1000 + rep);
        hits += actions[1900..].iter().filter(|&&a| a == best).count();
    }
    let rate = hits as f64 / 2000.0;
    assert!(rate >= 0.9, "rate {rate}");
}

#[test]
fn ucb_zero_radius_with_exact_estimates_picks_best() {
    let p = chain();
    let mut ws = UcbWorkspace::new(p.dag(), AscentSettings::default()).unwrap();
    ws.bank = exact_bank(&p);
    let spec = ConfidenceSpec::new(0.0).unwrap();
    let mut rng = stream(1, 0, 0, Purpose::Policy);
    let a = linsem_ucb_choose(&mut ws, p.dag(), &chain_arms(), p.noise().mean(), &spec, &mut rng).unwrap();
    assert_eq!(a, InterventionAction::EMPTY);
    assert!((ws.ucb_values()[0] - 1.5).abs() < 1e-12);
    assert!((ws.ucb_values()[1] - 0.5).abs() < 1e-12);
}

#[test]
fn ucb_round_one_is_deterministic_and_symmetric() {
    let dag = validate_dag(&[vec![], vec![0], vec![0], vec![1, 2]], 3).unwrap();
    let arms = enumerate_actions(InterventionAction::from_nodes([1, 2])).unwrap();
    let nu = vec![1.0; 4];
    let spec = ConfidenceSpec::new(2.0).unwrap();
    let pick = || {
        let mut ws = UcbWorkspace::new(&dag, AscentSettings::default()).unwrap();
        let mut rng = stream(9, 0, 0, Purpose::Policy);
        let a = linsem_ucb_choose(&mut ws, &dag, &arms, &nu, &spec, &mut rng).unwrap();
        (a, ws.ucb_values().to_vec(), ws.center_values().to_vec())
    };
    let (a, ucb, center) = pick();
    assert_eq!((a, ucb.clone()), {
        let (b, u, _) = pick();
        (b, u)
    });
    for (&u, &c) in ucb.iter().zip(&center) {
        assert_eq!(c, 1.0);
        assert!(u >= c);
    }
    // A fresh bank makes every arm's feasible set identical.
    for &u in &ucb {
        assert!((u - ucb[0]).abs() < 1e-6, "{ucb:?}");
    }
    assert!(arms.contains(&a));
}

#[test]
fn ucb_single_node_returns_empty_arm() {
    let dag = validate_dag(&[vec![]], 0).unwrap();
    let arms = enumerate_actions(InterventionAction::from_nodes([0])).unwrap();
    let mut ws = UcbWorkspace::new(&dag, AscentSettings::default()).unwrap();
    let spec = ConfidenceSpec::new(3.0).unwrap();
    let mut rng = stream(9, 0, 0, Purpose::Policy);
    let a = linsem_ucb_choose(&mut ws, &dag, &arms, &[0.7], &spec, &mut rng).unwrap();
    assert_eq!(a, InterventionAction::EMPTY);
    assert!(ws.ucb_values().iter().all(|&u| u == 0.7));
}

#[test]
fn ucb_policy_learns_chain() {
    let p = chain();
    let spec = ConfidenceSpec::new(1.5).unwrap();
    let mut ucb = LinSemUcb::new(
        p.dag(),
        chain_arms(),
        p.noise().mean().to_vec(),
        spec,
        AscentSettings::default(),
        stream(4, 0, 0, Purpose::Policy),
    )
    .unwrap();
    let actions = run(&mut ucb, &p, 400, 8);
    let late = actions[300..].iter().filter(|a| a.is_empty()).count();
    assert!(late >= 90, "{late}");
    let ws = ucb.workspace();
    for (&u, &c) in ws.ucb_values().iter().zip(ws.center_values()) {
        assert!(u >= c);
    }
}

#[test]
fn baseline_initial_sweep_then_bonus() {
    assert_eq!(baseline_ucb_choose(&[0.0; 4], &[0, 0, 0, 0], 1, 1.0), 0);
    assert_eq!(baseline_ucb_choose(&[5.0, 0.0, 0.0, 0.0], &[1, 0, 0, 0], 2, 1.0), 1);
    assert_eq!(baseline_ucb_choose(&[1.0, 1.0], &[3, 7], 10, 1.0), 0);
    assert_eq!(baseline_ucb_choose(&[1.0, 1.0], &[7, 3], 10, 1.0), 1);
    assert_eq!(baseline_ucb_choose(&[0.2, 0.9, 0.4], &[100, 1, 5], 106, 0.0), 1);
}

#[test]
fn baseline_policy_sweeps_in_order_and_converges_greedily() {
    let p = chain();
    let mut b = BaselineUcb::new(chain_arms(), 0.0).unwrap();
    let actions = run(&mut b, &p, 200, 2);
    assert_eq!(&actions[..2], &chain_arms()[..]);
    let (best, _) = optimal_action(&p, &chain_arms()).unwrap();
    assert!(actions[100..].iter().all(|&a| a == best));
}

#[test]
fn known_dist_with_exact_reward_column_picks_best() {
    let p = chain();
    for mode in [KnownMode::Ts { sigma: 0.0 }, KnownMode::Ucb { spec: ConfidenceSpec::new(0.0).unwrap() }] {
        let mut k = KnownDistPolicy::new(&p, chain_arms(), mode, stream(1, 0, 0, Purpose::Policy)).unwrap();
        k.set_reward_estimators(exact(&[0], &[0.5]), exact(&[0], &[-0.5]));
        for t in 1..=5 {
            let a = k.choose(t).unwrap();
            assert_eq!(a, InterventionAction::EMPTY);
            k.observe(a, &[1.0, 1.5]).unwrap();
            k.set_reward_estimators(exact(&[0], &[0.5]), exact(&[0], &[-0.5]));
        }
    }
}

#[test]
fn known_dist_first_round_ties_to_empty_arm() {
    let dag = validate_dag(&[vec![], vec![0], vec![0], vec![1, 2]], 3).unwrap();
    let obs = WeightMatrix::from_edges(&dag, &[(0, 1, 0.6), (0, 2, -0.7), (1, 3, 0.3), (2, 3, 0.9)]).unwrap();
    let int = WeightMatrix::from_edges(&dag, &[(0, 1, -0.6), (0, 2, 0.7), (1, 3, -0.3), (2, 3, -0.9)]).unwrap();
    let p = SemParameters::new(dag, obs, int, NoiseModel::gaussian(vec![1.0; 4])).unwrap();
    let arms = enumerate_actions(InterventionAction::from_nodes([1, 2])).unwrap();
    let mut k = KnownDistPolicy::new(&p, arms, KnownMode::Ts { sigma: 0.0 }, stream(1, 0, 0, Purpose::Policy)).unwrap();
    assert!(k.scores().unwrap().iter().all(|&s| s == 1.0));
    assert_eq!(k.choose(1).unwrap(), InterventionAction::EMPTY);
}

#[test]
fn contract_violations_are_reported() {
    let p = chain();
    let mut b = BaselineUcb::new(chain_arms(), 1.0).unwrap();
    assert_eq!(b.observe(InterventionAction::EMPTY, &[0.0, 0.0]), Err(PolicyError::ObserveWithoutChoose));
    let a = b.choose(1).unwrap();
    assert_eq!(b.choose(1), Err(PolicyError::ChooseTwice));
    assert!(matches!(
        b.observe(InterventionAction::from_nodes([1]), &[0.0, 0.0]),
        Err(PolicyError::ActionMismatch { .. })
    ));
    b.observe(a, &[0.0, 1.0]).unwrap();
    let _ = p;
}

#[test]
fn adaptive_radius_follows_running_max_norm() {
    use causal_bandits::estimation::confidence_radius;
    let p = chain();
    let mut ucb = LinSemUcb::new(
        p.dag(),
        chain_arms(),
        p.noise().mean().to_vec(),
        ConfidenceSpec::new(5.0).unwrap(),
        AscentSettings::default(),
        stream(4, 0, 0, Purpose::Policy),
    )
    .unwrap()
    .with_adaptive_radius(100);
    assert_eq!(ucb.spec().beta, confidence_radius(2, 100, 1, 0.0));
    let a = ucb.choose(1).unwrap();
    ucb.observe(a, &[3.0, 4.0]).unwrap();
    assert_eq!(ucb.spec().beta, confidence_radius(2, 100, 1, 5.0));
    let a = ucb.choose(2).unwrap();
    ucb.observe(a, &[0.3, 0.4]).unwrap();
    assert_eq!(ucb.spec().beta, confidence_radius(2, 100, 1, 5.0));
}
