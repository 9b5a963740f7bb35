use num_complex::Complex64;
use proptest::prelude::*;
use rfauth::attacker::*;
use rfauth::signal::{random_qpsk_packet, IqSignal};
use rfauth::{Error, Rng};

const RATE: f64 = 1e6;

fn small_policy(state_def: PolicyStateDef, len: usize, seed: u64) -> GaussianRecurrentPolicy {
    GaussianRecurrentPolicy::new(state_def, 8, -4.0, len, &mut Rng::new(seed)).unwrap()
}

fn packet(len: usize, rng: &mut Rng) -> IqSignal {
    random_qpsk_packet(len, RATE, rng).unwrap()
}

/// Radial distortion of each sample relative to its nearest QPSK point.
fn radial_distortion(s: &IqSignal) -> f64 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    s.samples()
        .iter()
        .map(|x| {
            let z = Complex64::new(a.copysign(x.re), a.copysign(x.im));
            ((x - z) * z.conj()).re
        })
        .sum::<f64>()
        / s.len() as f64
}

#[test]
fn entropy_of_unit_variance_gaussian() {
    let h = gaussian_entropy([0.0, 0.0]);
    let expected = (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    assert!((h - expected).abs() < 1e-9);
    assert!((h - 2.8379).abs() < 1e-4);
}

#[test]
fn entropy_negative_for_small_variance() {
    let v = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);
    assert!(gaussian_entropy([v.ln(), v.ln()]).abs() < 1e-12);
    assert!(gaussian_entropy([LOG_VAR_MIN, LOG_VAR_MIN]) < 0.0);
}

#[test]
fn log_prob_at_mode() {
    let lp = gaussian_log_prob([0.3, -0.2], [0.3, -0.2], [0.0, 0.0]);
    assert!((lp + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    let lv = [-2.0, 1.0];
    let lp = gaussian_log_prob([1.0, 1.0], [1.0, 1.0], lv);
    let expected = -(2.0 * std::f64::consts::PI).ln() - 0.5 * (lv[0] + lv[1]);
    assert!((lp - expected).abs() < 1e-12);
}

#[test]
fn log_var_squash_bounds() {
    assert_eq!(squash_log_var(-3.5), -3.5);
    assert_eq!(squash_log_var(1e3), LOG_VAR_MAX);
    assert_eq!(squash_log_var(-1e3), LOG_VAR_MIN);
}

#[test]
fn clip_examples() {
    let s = Complex64::new(0.6, 0.8);
    assert_eq!(clip_action([0.9, 0.8], s, 0.2), [0.8, 0.8]);
    assert_eq!(clip_action([0.65, 0.7], s, 0.2), [0.65, 0.7]);
    assert_eq!(clip_action([0.3, 1.2], Complex64::new(0.0, 0.0), 0.2), [0.0, 0.0]);
}

proptest! {
    #[test]
    fn clip_stays_in_box(re in -3.0..3.0f64, im in -3.0..3.0f64, sr in -1.5..1.5f64, si in -1.5..1.5f64, eps in 0.0..0.5f64) {
        let s = Complex64::new(sr, si);
        let a = clip_action([re, im], s, eps);
        let r = eps * s.norm() + 1e-12;
        prop_assert!((a[0] - sr).abs() <= r && (a[1] - si).abs() <= r);
    }

    #[test]
    fn reward_to_go_matches_direct_sum(rewards in prop::collection::vec(0.0..1.0f64, 1..40), gamma in 0.0..1.0f64) {
        let q = reward_to_go(&rewards, &[], gamma);
        for t in 0..rewards.len() {
            let direct: f64 = rewards[t..].iter().enumerate().map(|(k, r)| gamma.powi(k as i32) * r).sum();
            prop_assert!((q[t] - direct).abs() < 1e-9);
        }
    }
}

#[test]
fn clipping_invariant_over_random_trajectories() {
    let mut rng = Rng::new(11);
    let len = 32;
    let policy = GaussianRecurrentPolicy::new(PolicyStateDef::Recurrent, 8, 0.0, len, &mut rng).unwrap();
    for _ in 0..100 {
        let z = packet(len, &mut rng);
        let (d, _) = policy.distributions(z.samples()).unwrap();
        let tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);
        for (a, s) in tr.actions.iter().zip(z.samples()) {
            let r = 0.2 * s.norm() + 1e-12;
            assert!((a[0] - s.re).abs() <= r && (a[1] - s.im).abs() <= r);
        }
    }
}

#[test]
fn undiscounted_unit_rewards_give_arithmetic_series() {
    let q = reward_to_go(&[1.0; 256], &[], 1.0);
    for (t, v) in q.iter().enumerate() {
        assert_eq!(*v, (256 - t) as f64);
    }
}

#[test]
fn reward_to_go_includes_entropy_bonus() {
    let q = reward_to_go(&[1.0, 0.0], &[0.5, 0.25], 1.0);
    assert_eq!(q, vec![1.75, 0.25]);
}

#[test]
fn stepwise_matches_sequence_forward() {
    for def in [PolicyStateDef::Recurrent, PolicyStateDef::Memoryless] {
        let mut rng = Rng::new(5);
        let len = 12;
        let policy = small_policy(def, len, 3);
        let z = packet(len, &mut rng);
        let (d, _) = policy.distributions(z.samples()).unwrap();
        let mut state = policy.initial_state(z.samples()[0]);
        for t in 0..len {
            let out = policy_step(&policy, &state, &mut rng).unwrap();
            for k in 0..2 {
                assert!((out.mean[k] - d.means[t][k]).abs() < 1e-10, "{def:?} t={t}");
                assert!((out.log_var[k] - d.log_vars[t][k]).abs() < 1e-10);
            }
            assert!((out.entropy - gaussian_entropy(d.log_vars[t])).abs() < 1e-10);
            assert!((out.log_prob - gaussian_log_prob(out.action, out.mean, out.log_var)).abs() < 1e-12);
            if t + 1 < len {
                state = rfauth::attacker::PolicyState {
                    sample: z.samples()[t + 1],
                    hidden: out.next_hidden.0.clone(),
                    cell: out.next_hidden.1.clone(),
                };
            }
        }
    }
}

#[test]
fn initial_variance_is_as_configured() {
    let p = GaussianRecurrentPolicy::new(PolicyStateDef::Recurrent, 8, -6.0, 16, &mut Rng::new(1)).unwrap();
    let z = packet(16, &mut Rng::new(2));
    let (d, _) = p.distributions(z.samples()).unwrap();
    for lv in &d.log_vars {
        assert!((lv[0] + 6.0).abs() < 1e-9 && (lv[1] + 6.0).abs() < 1e-9);
    }
}

fn surrogate_check(def: PolicyStateDef, eta: f64, credit: EntropyCredit) -> f64 {
    let mut rng = Rng::new(21);
    let len = 10;
    let mut policy = GaussianRecurrentPolicy::new(def, 5, -1.0, len, &mut rng).unwrap();
    let z = packet(len, &mut rng);
    let (d, cache) = policy.distributions(z.samples()).unwrap();
    let mut tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);
    tr.rewards = (0..len).map(|_| if rng.uniform() < 0.5 { 1.0 } else { 0.0 }).collect();
    let w = step_weights(&tr, 0.9, eta, credit).unwrap();
    let g = policy_gradient(&policy, &tr, &d, &cache, &w, eta).unwrap().flat();

    let p0 = policy.network().flat_params();
    let h = 1e-6;
    let mut fd = vec![0.0; p0.len()];
    // every tenth parameter plus the head keeps this fast
    let picks: Vec<usize> = (0..p0.len()).filter(|i| i % 10 == 0 || *i + 60 >= p0.len()).collect();
    for &i in &picks {
        let mut p = p0.clone();
        p[i] += h;
        set(&mut policy, &p);
        let up = surrogate_objective(&policy, &tr, &w, eta).unwrap();
        p[i] -= 2.0 * h;
        set(&mut policy, &p);
        let down = surrogate_objective(&policy, &tr, &w, eta).unwrap();
        fd[i] = (up - down) / (2.0 * h);
    }
    set(&mut policy, &p0);
    let a: Vec<f64> = picks.iter().map(|&i| g[i]).collect();
    let b: Vec<f64> = picks.iter().map(|&i| fd[i]).collect();
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    diff / b.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-8)
}

fn set(policy: &mut GaussianRecurrentPolicy, p: &[f64]) {
    policy.set_flat_params(p).unwrap();
}

#[test]
fn policy_gradient_matches_finite_differences() {
    for def in [PolicyStateDef::Recurrent, PolicyStateDef::Memoryless] {
        for (eta, credit) in [(0.0, EntropyCredit::RewardToGo), (0.7, EntropyCredit::RewardToGo), (0.7, EntropyCredit::Direct)] {
            let e = surrogate_check(def, eta, credit);
            assert!(e < 1e-3, "{def:?} eta={eta} {credit:?}: rel err {e}");
        }
    }
}

#[test]
fn zero_rewards_and_entropy_give_zero_gradient() {
    let mut rng = Rng::new(4);
    let policy = small_policy(PolicyStateDef::Recurrent, 8, 1);
    let z = packet(8, &mut rng);
    let (d, cache) = policy.distributions(z.samples()).unwrap();
    let mut tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);
    tr.rewards = vec![0.0; 8];
    let w = step_weights(&tr, 1.0, 0.0, EntropyCredit::RewardToGo).unwrap();
    let g = policy_gradient(&policy, &tr, &d, &cache, &w, 0.0).unwrap();
    assert_eq!(g.norm(), 0.0);
}

#[test]
fn weights_require_rewards() {
    let mut rng = Rng::new(4);
    let policy = small_policy(PolicyStateDef::Memoryless, 8, 1);
    let z = packet(8, &mut rng);
    let (d, _) = policy.distributions(z.samples()).unwrap();
    let tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);
    assert!(matches!(step_weights(&tr, 1.0, 0.0, EntropyCredit::Direct), Err(Error::InvalidState(_))));
}

#[test]
fn reward_estimation_counts_and_averages() {
    let mut rng = Rng::new(8);
    let len = 16;
    let policy = small_policy(PolicyStateDef::Recurrent, len, 2);
    let rollout = RolloutPolicy::from_policy(&policy);
    let z = packet(len, &mut rng);
    let (d, _) = policy.distributions(z.samples()).unwrap();
    let tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);

    // alternating oracle: with M = 4 exactly two of every four calls accept
    let mut calls = 0u64;
    let mut oracle = |_: &IqSignal| -> rfauth::Result<bool> {
        calls += 1;
        Ok(calls % 2 == 0)
    };
    let r = estimate_rewards(&tr, &rollout, &mut oracle, 4, RATE, 0.2, &mut rng).unwrap();
    assert_eq!(calls, 4 * (len as u64 - 1) + 1);
    assert_eq!(r.len(), len);
    assert!(r[..len - 1].iter().all(|&v| v == 0.5));
    assert!(r.iter().all(|&v| (0.0..=1.0).contains(&v)));

    let mut calls = 0u64;
    let mut once = |_: &IqSignal| -> rfauth::Result<bool> {
        calls += 1;
        Ok(true)
    };
    let r = estimate_rewards(&tr, &rollout, &mut once, 1, RATE, 0.2, &mut rng).unwrap();
    assert_eq!(calls, len as u64);
    assert!(r.iter().all(|&v| v == 1.0));
}

#[test]
fn reward_estimation_propagates_oracle_failure() {
    let mut rng = Rng::new(8);
    let policy = small_policy(PolicyStateDef::Recurrent, 8, 2);
    let rollout = RolloutPolicy::from_policy(&policy);
    let z = packet(8, &mut rng);
    let (d, _) = policy.distributions(z.samples()).unwrap();
    let tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);
    let mut broken = |_: &IqSignal| -> rfauth::Result<bool> { Err(Error::NumericFailure("link down".into())) };
    assert!(matches!(
        estimate_rewards(&tr, &rollout, &mut broken, 1, RATE, 0.2, &mut rng),
        Err(Error::NumericFailure(_))
    ));
    let mut ok = |_: &IqSignal| -> rfauth::Result<bool> { Ok(true) };
    assert!(estimate_rewards(&tr, &rollout, &mut ok, 0, RATE, 0.2, &mut rng).is_err());
}

#[test]
fn rollout_completion_keeps_prefix() {
    let mut rng = Rng::new(9);
    let len = 12;
    let policy = small_policy(PolicyStateDef::Recurrent, len, 2);
    let z = packet(len, &mut rng);
    let (d, _) = policy.distributions(z.samples()).unwrap();
    let tr = sample_trajectory(z.samples(), &d, 0.2, &mut rng);
    let a = complete_with_rollout(&tr, 5, &d, 0.2, RATE, &mut rng).unwrap();
    for t in 0..5 {
        assert_eq!([a.samples()[t].re, a.samples()[t].im], tr.actions[t]);
    }
    assert!(complete_with_rollout(&tr, 0, &d, 0.2, RATE, &mut rng).is_err());
    assert!(complete_with_rollout(&tr, len + 1, &d, 0.2, RATE, &mut rng).is_err());
}

#[test]
fn rollout_sync_is_exact_and_deterministic() {
    let mut a = small_policy(PolicyStateDef::Recurrent, 8, 1);
    let b = small_policy(PolicyStateDef::Recurrent, 8, 2);
    let mut rollout = RolloutPolicy::from_policy(&b);
    assert_ne!(rollout.policy().network().flat_params(), a.network().flat_params());
    sync_rollout(&a, &mut rollout).unwrap();
    assert_eq!(rollout.policy().network().flat_params(), a.network().flat_params());
    // later changes to the generator do not leak into the roll-out copy
    let p: Vec<f64> = a.network().flat_params().iter().map(|v| v + 1.0).collect();
    a.set_flat_params(&p).unwrap();
    assert_ne!(rollout.policy().network().flat_params(), a.network().flat_params());
}

#[test]
fn identity_pretraining_reaches_small_error() {
    let mut rng = Rng::new(13);
    let len = 64;
    let signals: Vec<IqSignal> = (0..16).map(|_| packet(len, &mut rng)).collect();
    let mut policy = GaussianRecurrentPolicy::new(PolicyStateDef::Recurrent, 32, -6.0, len, &mut rng).unwrap();
    let before = mean_reconstruction_rms(&policy, &signals).unwrap();
    let report = pretrain_identity(&mut policy, &signals, 150, 0.01, &mut rng).unwrap();
    assert!(report.final_rms < 0.01, "rms {} (before {before})", report.final_rms);
    assert_eq!(report.epoch_losses.len(), 150);
    // fresh packets reconstruct too
    let fresh: Vec<IqSignal> = (0..4).map(|_| packet(len, &mut rng)).collect();
    assert!(mean_reconstruction_rms(&policy, &fresh).unwrap() < 0.02);
}

fn toy_attack(seed: u64, iterations: usize) -> FoolingCurve {
    let len = 64;
    let mut rng = Rng::new(seed);
    let signals: Vec<IqSignal> = (0..16).map(|_| packet(len, &mut rng)).collect();
    let config = AttackConfig {
        iterations,
        hidden: 16,
        init_log_var: -6.0,
        entropy_coef: 0.0,
        eval_packets: 50,
        ..AttackConfig::default()
    };
    let mut policy =
        GaussianRecurrentPolicy::new(config.state_def, config.hidden, config.init_log_var, len, &mut rng).unwrap();
    pretrain_identity(&mut policy, &signals, 150, 0.01, &mut rng).unwrap();
    let mut rollout = RolloutPolicy::from_policy(&policy);
    let threshold = 0.004;
    let oracle = move |s: &IqSignal| radial_distortion(s) > threshold;
    let mut packets = |r: &mut Rng| Ok(packet(len, r));
    let mut feedback = |s: &IqSignal| Ok(oracle(s));
    let eps = config.epsilon;
    let n_eval = config.eval_packets;
    let mut evaluate = |p: &GaussianRecurrentPolicy, r: &mut Rng| {
        let mut hits = 0;
        for _ in 0..n_eval {
            let z = packet(len, r);
            hits += usize::from(oracle(&sample_distorted(p, &z, eps, r)?));
        }
        Ok(hits as f64 / n_eval as f64)
    };
    let hooks = AttackHooks { packet: &mut packets, feedback: &mut feedback, evaluate: &mut evaluate, stop: None };
    run_attack(&mut policy, &mut rollout, &config, hooks, &mut rng).unwrap()
}

#[test]
fn toy_oracle_attack_learns() {
    let curve = toy_attack(3, 50);
    let rates = curve.rates();
    let best = rates.iter().cloned().fold(0.0, f64::max);
    assert!(best >= 0.9, "initial {} then {rates:?}", curve.initial);
    assert!(best > curve.initial);
    assert_eq!(curve.len(), 50);
    for (i, r) in curve.records.iter().enumerate() {
        assert_eq!(r.iteration, i + 1);
        assert_eq!(r.updates, i as u64 + 1);
        assert_eq!(r.feedback_count, 64 * (i as u64 + 1));
    }
}

#[test]
fn always_accept_oracle_fools_immediately() {
    let len = 16;
    let mut rng = Rng::new(1);
    let config = AttackConfig { iterations: 2, hidden: 4, eval_packets: 5, ..AttackConfig::default() };
    let mut policy = GaussianRecurrentPolicy::new(config.state_def, 4, -6.0, len, &mut rng).unwrap();
    let mut rollout = RolloutPolicy::from_policy(&policy);
    let mut packets = |r: &mut Rng| Ok(packet(len, r));
    let mut feedback = |_: &IqSignal| Ok(true);
    let mut evaluate = |_: &GaussianRecurrentPolicy, _: &mut Rng| Ok(1.0);
    let hooks = AttackHooks { packet: &mut packets, feedback: &mut feedback, evaluate: &mut evaluate, stop: None };
    let curve = run_attack(&mut policy, &mut rollout, &config, hooks, &mut rng).unwrap();
    assert!(curve.records.iter().all(|r| r.fooling_rate == 1.0 && r.mean_reward == 1.0));
    assert_eq!(rollout.policy().network().flat_params(), policy.network().flat_params());
}

#[test]
fn stop_hook_ends_early_and_runs_are_deterministic() {
    let run = || {
        let len = 16;
        let mut rng = Rng::new(77);
        let config = AttackConfig { iterations: 10, hidden: 4, eval_packets: 5, ..AttackConfig::default() };
        let mut policy = GaussianRecurrentPolicy::new(config.state_def, 4, -6.0, len, &mut rng).unwrap();
        let mut rollout = RolloutPolicy::from_policy(&policy);
        let mut packets = |r: &mut Rng| Ok(packet(len, r));
        let mut feedback = |s: &IqSignal| Ok(radial_distortion(s) > 0.0);
        let mut evaluate = |p: &GaussianRecurrentPolicy, r: &mut Rng| {
            let s = sample_distorted(p, &packet(len, r), 0.2, r)?;
            Ok(if radial_distortion(&s) > 0.0 { 1.0 } else { 0.0 })
        };
        let mut stop = |c: &FoolingCurve| c.len() >= 4;
        let hooks = AttackHooks { packet: &mut packets, feedback: &mut feedback, evaluate: &mut evaluate, stop: Some(&mut stop) };
        let curve = run_attack(&mut policy, &mut rollout, &config, hooks, &mut rng).unwrap();
        (curve, policy.network().flat_params())
    };
    let (a, pa) = run();
    let (b, pb) = run();
    assert_eq!(a.len(), 4);
    assert_eq!(a.initial, b.initial);
    assert_eq!(pa, pb);
    let strip = |c: &FoolingCurve| c.records.iter().map(|r| (r.fooling_rate, r.feedback_count, r.mean_reward)).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_validation() {
    assert!(AttackConfig::default().validate().is_ok());
    assert!(AttackConfig { baseline: Baseline::Learned, ..AttackConfig::default() }.validate().is_err());
    assert!(AttackConfig { mc_searches: 0, ..AttackConfig::default() }.validate().is_err());
    assert!(AttackConfig { epsilon: -0.1, ..AttackConfig::default() }.validate().is_err());
    assert!(AttackConfig { init_log_var: 5.0, ..AttackConfig::default() }.validate().is_err());
    assert_eq!(AttackConfig::default().feedbacks_per_update(256), 256);
    assert_eq!(AttackConfig { mc_searches: 4, ..AttackConfig::default() }.feedbacks_per_update(256), 1021);
}
