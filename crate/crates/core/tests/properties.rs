use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use qdtransfer::optics::TargetState;
use qdtransfer::protocol::{run_entanglement_verification, run_transfer, NoiseModel, Sampling};
use qdtransfer::state::{Dof, LabeledState, PureState, QuantumChannel};

type M = DMatrix<Complex64>;

fn complex_matrix(rows: usize, cols: usize, raw: &[f64]) -> M {
    M::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(raw[k], raw[k + 1])
    })
}

fn density(raw: &[f64]) -> LabeledState {
    let a = complex_matrix(16, 16, raw);
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    LabeledState::from_matrix(&Dof::ALL, rho / Complex64::new(tr, 0.0)).unwrap()
}

fn unitary(d: usize, raw: &[f64]) -> M {
    complex_matrix(d, d, raw).qr().q()
}

/// Two Kraus operators from a random isometry `C^d → C^2d`.
fn kraus_pair(d: usize, raw: &[f64]) -> Vec<M> {
    let q = complex_matrix(2 * d, d, raw).qr().q();
    vec![q.rows(0, d).into_owned(), q.rows(d, d).into_owned()]
}

fn targets() -> impl Strategy<Value = Vec<Dof>> {
    (Just(Dof::ALL.to_vec()).prop_shuffle(), 1usize..=2).prop_map(|(v, n)| v[..n].to_vec())
}

fn raw(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn bit_position(d: Dof) -> usize {
    3 - Dof::ALL.iter().position(|&x| x == d).unwrap()
}

/// `op` on `targets` (first target most significant) embedded in the
/// 16-dim canonical space, entry by entry.
fn brute_embed(op: &M, targets: &[Dof]) -> M {
    let sub = |i: usize| targets.iter().fold(0, |acc, &t| acc << 1 | (i >> bit_position(t)) & 1);
    let mask: usize = targets.iter().map(|&t| 1 << bit_position(t)).sum();
    M::from_fn(16, 16, |i, j| if i & !mask == j & !mask { op[(sub(i), sub(j))] } else { Complex64::new(0.0, 0.0) })
}

fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(Config { cases: 64, ..Config::default() })]

    #[test]
    fn channels_keep_states_valid(r in raw(512), t in targets(), k in raw(64)) {
        let rho = density(&r);
        let d = 1 << t.len();
        let ch = QuantumChannel::cptp(&t, kraus_pair(d, &k[..4 * d * d])).unwrap();
        let out = rho.apply(&ch).unwrap();
        prop_assert!(out.validate().is_ok());
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition_matches_sequential_application(r in raw(512), t in targets(), a in raw(64), b in raw(32)) {
        let rho = density(&r);
        let d = 1 << t.len();
        let first = QuantumChannel::cptp(&t, kraus_pair(d, &a[..4 * d * d])).unwrap();
        let second = QuantumChannel::unitary(&t, unitary(d, &b[..2 * d * d])).unwrap();
        let lhs = rho.apply(&first.then(&second).unwrap()).unwrap();
        let rhs = rho.apply(&first).unwrap().apply(&second).unwrap();
        prop_assert!(max_diff(lhs.matrix(), rhs.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_commutes_with_disjoint_channels(r in raw(512), order in Just(Dof::ALL.to_vec()).prop_shuffle(), k in raw(32)) {
        let rho = density(&r);
        let (on, off) = (&order[..1], &order[2..]);
        let ch = QuantumChannel::cptp(on, kraus_pair(2, &k[..16])).unwrap();
        let lhs = rho.apply(&ch).unwrap().partial_trace(off).unwrap();
        let rhs = rho.partial_trace(off).unwrap().apply(&ch).unwrap();
        prop_assert!(max_diff(lhs.matrix(), rhs.matrix()) < 1e-12);
        prop_assert!((lhs.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_matches_brute_force(r in raw(512), t in targets(), u in raw(32)) {
        let rho = density(&r);
        let d = 1 << t.len();
        let op = unitary(d, &u[..2 * d * d]);
        let out = rho.apply(&QuantumChannel::unitary(&t, op.clone()).unwrap()).unwrap();
        let full = brute_embed(&op, &t);
        let expected = &full * rho.matrix() * full.adjoint();
        prop_assert!(max_diff(out.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn pure_and_density_paths_agree(a in raw(32), t in targets(), u in raw(32)) {
        let amps: Vec<Complex64> = (0..16).map(|i| Complex64::new(a[2 * i], a[2 * i + 1])).collect();
        let mut psi = PureState::new(&Dof::ALL, amps).unwrap();
        psi.normalize().unwrap();
        let d = 1 << t.len();
        let op = unitary(d, &u[..2 * d * d]);
        let rho = psi.to_density().apply(&QuantumChannel::unitary(&t, op.clone()).unwrap()).unwrap();
        psi.apply_op(&op, &t).unwrap();
        prop_assert!(max_diff(psi.to_density().matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_is_associative(r in raw(512), order in Just(Dof::ALL.to_vec()).prop_shuffle()) {
        let rho = density(&r);
        let once = rho.partial_trace(&order[..2]).unwrap();
        let twice = rho.partial_trace(&order[..1]).unwrap().partial_trace(&order[1..2]).unwrap();
        prop_assert!(max_diff(once.matrix(), twice.matrix()) < 1e-12);
    }
}

fn noise_strategy() -> impl Strategy<Value = NoiseModel> {
    (0.0f64..0.3, 0.0f64..0.08, 0.9f64..1.0, 1.0f64..3.0, 1.0f64..5.0, 0.0f64..1.5, 0.0f64..0.3).prop_map(
        |(w, e, r, t2s, t2, tu, p)| {
            let mut n = NoiseModel::device();
            n.source.reexcitation_weight = w;
            n.source.init_error = e;
            n.spin.readout_fidelity = r;
            n.spin.t2_star_ns = t2s;
            n.spin.t2_echo_us = t2;
            n.timing.unrefocused_ns = tu;
            n.optics.analyzer_depolarization = p;
            n
        },
    )
}

#[test]
fn monte_carlo_matches_exact_oracle() {
    let config = Config { cases: 10, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (noise_strategy(), 0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU, any::<u64>());
    runner
        .run(&strategy, |(noise, theta, phi, seed)| {
            let t = TargetState::from_bloch(theta, phi);
            let mc = Sampling::monte_carlo(20_000, seed);
            let exact = run_transfer(&t, &noise, &Sampling::exact()).unwrap().result.fidelity.value;
            let sampled = run_transfer(&t, &noise, &mc).unwrap().result.fidelity;
            prop_assert!(sampled.within(exact, 3.0), "transfer {sampled} vs {exact}");
            let e = run_entanglement_verification(&noise, &Sampling::exact()).unwrap();
            let m = run_entanglement_verification(&noise, &mc).unwrap();
            prop_assert!(
                m.result.fidelity.within(e.result.fidelity.value, 3.0),
                "F {} vs {}",
                m.result.fidelity,
                e.result.fidelity
            );
            Ok(())
        })
        .unwrap();
}
