//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qdtransfer::optics::TargetState;
use qdtransfer::protocol::{
    classical_baseline, composite_fidelity, ghz_expansion, ideal_composite, run_entanglement_verification, run_fringe,
    run_spin_sweep, run_transfer, GhzOutcome, LossModel, NoiseModel, Sampling, SweepKind,
};
use qdtransfer::source::ResourceKind;
use qdtransfer::spin::SpinParams;
use qdtransfer::stats::Estimate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

struct Report {
    failures: Vec<u32>,
}

impl Report {
    fn line(&mut self, n: u32, pass: bool, title: &str, detail: String, elapsed: Duration) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] C{n:<2} {title}: {detail} ({:.2} s)", elapsed.as_secs_f64());
        if !pass {
            self.failures.push(n);
        }
    }
}

fn z(e: &Estimate, expected: f64) -> f64 {
    if e.stderr > 0.0 {
        (e.value - expected).abs() / e.stderr
    } else if (e.value - expected).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn z2(a: &Estimate, b: &Estimate) -> f64 {
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    if se > 0.0 {
        (a.value - b.value).abs() / se
    } else if (a.value - b.value).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn axis_targets() -> [(&'static str, TargetState); 3] {
    [("H", TargetState::h()), ("D+", TargetState::d_plus()), ("sigma+", TargetState::sigma_plus())]
}

/// `|Φ⟩ = |ψ⟩_p ⊗ (|↓ r T⟩ − |↑ b R⟩)/√2`, index `s f p path`.
fn composite_by_hand(t: &TargetState) -> [C; 16] {
    let mut v = [C::new(0.0, 0.0); 16];
    let amp = [t.alpha, t.beta];
    for p in 0..2 {
        v[p << 1] = amp[p] * FRAC_1_SQRT_2;
        v[0b1101 | p << 1] = -amp[p] * FRAC_1_SQRT_2;
    }
    v
}

/// Printed branch operators applied to `(α, β)`: `σ_z, I, −iσ_y, −σ_x`, halved.
fn printed_branch(k: usize, t: &TargetState) -> [C; 2] {
    let (a, b) = (t.alpha, t.beta);
    let h = 0.5;
    match k {
        0 => [a * h, -b * h],
        1 => [a * h, b * h],
        // −iσ_y (a, b) = (−b, a)
        2 => [-b * h, a * h],
        _ => [-b * h, -a * h],
    }
}

/// `⟨k|Φ⟩` with the GHZ vectors written out by hand over `f p path`.
fn branch_by_hand(k: usize, phi: &[C; 16]) -> [C; 2] {
    let (i, j, sign) = match k {
        0 => (0b000, 0b111, 1.0),
        1 => (0b000, 0b111, -1.0),
        2 => (0b101, 0b010, 1.0),
        _ => (0b101, 0b010, -1.0),
    };
    [0, 1].map(|s| (phi[s << 3 | i] + phi[s << 3 | j] * sign) * FRAC_1_SQRT_2)
}

fn dist(a: &[C; 2], b: &[C; 2]) -> f64 {
    ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
}

fn dist_up_to_phase(a: &[C; 2], b: &[C; 2]) -> f64 {
    let inner = b[0].conj() * a[0] + b[1].conj() * a[1];
    let ph = if inner.norm() > 0.0 { inner / inner.norm() } else { C::new(1.0, 0.0) };
    dist(a, &[b[0] * ph, b[1] * ph])
}

fn c1(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE05);
    let (mut state_err, mut derived_err, mut prob_err, mut printed_phase_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut printed_literal_err = [0.0f64; 4];
    for _ in 0..50 {
        let t = TargetState::random(&mut rng);
        let phi = composite_by_hand(&t);
        let built = ideal_composite(&t).unwrap();
        for (a, b) in built.amplitudes().iter().zip(phi.iter()) {
            state_err = state_err.max((a - b).norm());
        }
        for (k, (o, v)) in ghz_expansion(&t).unwrap().into_iter().enumerate() {
            assert_eq!(o, GhzOutcome::ALL[k]);
            derived_err = derived_err.max(dist(&v, &branch_by_hand(k, &phi)));
            prob_err = prob_err.max((v[0].norm_sqr() + v[1].norm_sqr() - 0.25).abs());
            let printed = printed_branch(k, &t);
            printed_literal_err[k] = printed_literal_err[k].max(dist(&v, &printed));
            printed_phase_err = printed_phase_err.max(dist_up_to_phase(&v, &printed));
        }
    }
    let elapsed = start.elapsed();
    let literal_ok: Vec<bool> = printed_literal_err.iter().map(|e| *e < 1e-12).collect();
    let pass = state_err < 1e-12
        && derived_err < 1e-12
        && prob_err < 1e-12
        && printed_phase_err < 1e-12
        && elapsed < Duration::from_secs(1);
    r.line(
        1,
        pass,
        "GHZ-basis expansion",
        format!(
            "|Φ| err {state_err:.1e}, branch err {derived_err:.1e}, p=1/4 err {prob_err:.1e}, \
             vs printed (σz, I, −iσy, −σx)/2 up to phase {printed_phase_err:.1e}; \
             literal match per branch {literal_ok:?} (χ⁺ branch is +iσy/2, sign differs from print)"
        ),
        elapsed,
    );
}

fn c2(r: &mut Report) {
    let start = Instant::now();
    let noise = NoiseModel::ideal();
    let mut worst_exact = 0.0f64;
    let mut worst_z = 0.0f64;
    for (_, t) in axis_targets() {
        let e = run_transfer(&t, &noise, &Sampling::exact()).unwrap();
        worst_exact = worst_exact.max((e.result.fidelity.value - 1.0).abs());
        for o in &e.per_outcome {
            worst_exact = worst_exact.max((o.fidelity.value - 1.0).abs());
        }
        let m = run_transfer(&t, &noise, &Sampling::monte_carlo(10_000, 21)).unwrap();
        worst_z = worst_z.max(z(&m.result.fidelity, 1.0));
        for o in &m.per_outcome {
            worst_z = worst_z.max(z(&o.fidelity, 1.0));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_exact < 1e-10 && worst_z <= 3.0 && elapsed < Duration::from_secs(10);
    r.line(
        2,
        pass,
        "ideal transfer",
        format!("exact max |F−1| {worst_exact:.1e}, MC 10^4 max deviation {worst_z:.2} σ"),
        elapsed,
    );
}

fn c3(r: &mut Report) {
    let start = Instant::now();
    let f = composite_fidelity(Estimate::exact(0.942), Estimate::exact(0.609), Estimate::exact(0.690)).value;
    let by_hand = (0.942 + (0.609 + 0.690) / 2.0) / 2.0;
    let pass = (f - 0.796).abs() <= 0.001 && (f - by_hand).abs() < 1e-15;
    r.line(
        3,
        pass,
        "composite fidelity of (0.942, 0.609, 0.690)",
        format!("F = {f:.5} (target 0.796 ± 0.001)"),
        start.elapsed(),
    );
}

fn c4(r: &mut Report) {
    let start = Instant::now();
    let v = run_entanglement_verification(&NoiseModel::calibrated(), &Sampling::monte_carlo(100_000, 404)).unwrap();
    let elapsed = start.elapsed();
    let pass = (v.f_zz.value - 0.942).abs() <= 0.02
        && (v.result.fidelity.value - 0.796).abs() <= 0.03
        && elapsed < Duration::from_secs(60);
    r.line(
        4,
        pass,
        "calibrated entanglement, 10^5 trials",
        format!(
            "F_ZZ {} (0.942 ± 0.02), F {} (0.796 ± 0.03); V_XX {}, V_YY {}",
            v.f_zz, v.result.fidelity, v.v_xx, v.v_yy
        ),
        elapsed,
    );
}

fn c5(r: &mut Report) {
    let start = Instant::now();
    let noise = NoiseModel::calibrated();
    let f: Vec<Estimate> = axis_targets()
        .iter()
        .map(|(_, t)| run_transfer(t, &noise, &Sampling::monte_carlo(100_000, 505)).unwrap().result.fidelity)
        .collect();
    let elapsed = start.elapsed();
    let (h, d, s) = (f[0].value, f[1].value, f[2].value);
    let pass = h > d
        && h > s
        && (h - 0.85).abs() <= 0.05
        && (d - 0.75).abs() <= 0.05
        && (s - 0.75).abs() <= 0.05
        && elapsed < Duration::from_secs(120);
    r.line(
        5,
        pass,
        "calibrated transfer, 10^5 trials",
        format!("H {} (0.85 ± 0.05), D+ {} and sigma+ {} (0.75 ± 0.05)", f[0], f[1], f[2]),
        elapsed,
    );
}

fn c6(r: &mut Report) {
    let start = Instant::now();
    let p = SpinParams::default();
    let mc = Sampling::monte_carlo(40_000, 606);
    let spans = [38.0, 500.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0];
    let t2 = run_spin_sweep(SweepKind::Echo, &spans, &p, &mc).unwrap().fit.unwrap();
    let delays: Vec<f64> = (0..13).map(|i| 0.25 * f64::from(i)).collect();
    let t2s = run_spin_sweep(SweepKind::Ramsey, &delays, &p, &mc).unwrap().fit.unwrap();
    let frozen = SpinParams { t2_echo_us: f64::INFINITY, ..p };
    let refocus: Vec<f64> = [0.0, 38.0, 1000.0, 12_345.6]
        .iter()
        .map(|&s| run_spin_sweep(SweepKind::Echo, &[s], &frozen, &Sampling::exact()).unwrap().points[0].1.value)
        .collect();
    let worst = refocus.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let pass = (t2.value / 2.7 - 1.0).abs() <= 0.10 && (t2s.value / 1.7 - 1.0).abs() <= 0.05 && worst < 1e-10;
    r.line(
        6,
        pass,
        "echo and Ramsey decay",
        format!("T2 {t2} us (2.7 ± 10%), T2* {t2s} ns (1.7 ± 5%), static-noise echo |V−1| {worst:.1e}"),
        start.elapsed(),
    );
}

fn c7(r: &mut Report) {
    let start = Instant::now();
    let phases: Vec<f64> = (0..24).map(|i| f64::from(i) * TAU / 24.0).collect();
    let f = run_fringe(&NoiseModel::calibrated(), &phases, &Sampling::monte_carlo(50_000, 707)).unwrap();
    let dev = z(&f.fit.visibility, f.analytic_visibility);
    r.line(
        7,
        dev <= 3.0,
        "RF-phase fringe",
        format!("fitted visibility {} vs coherence {:.4}: {dev:.2} σ", f.fit.visibility, f.analytic_visibility),
        start.elapsed(),
    );
}

fn c8(r: &mut Report) {
    let start = Instant::now();
    let product = 0.08 * 0.20 * 0.40 * 0.50 * 0.36 * 0.30;
    let overall = LossModel::default().overall().unwrap();
    let t = TargetState::d_plus();
    let lossless = NoiseModel { loss: LossModel::none(), ..NoiseModel::calibrated() };
    let mut lossy = NoiseModel::calibrated();
    lossy.loss.apply_to_trials = true;
    let a = run_transfer(&t, &lossless, &Sampling::monte_carlo(100_000, 808)).unwrap().result;
    let b = run_transfer(&t, &lossy, &Sampling::monte_carlo(10_000_000, 809)).unwrap().result;
    let ea = run_transfer(&t, &lossless, &Sampling::exact()).unwrap().result;
    let eb = run_transfer(&t, &lossy, &Sampling::exact()).unwrap().result;
    let dz = z2(&a.fidelity, &b.fidelity);
    let rz = z(&b.success_rate, product);
    let pass = (overall - product).abs() < 1e-15
        && (overall - 3.5e-4).abs() < 0.1e-4
        && dz <= 3.0
        && rz <= 3.0
        && (ea.fidelity.value - eb.fidelity.value).abs() < 1e-12;
    r.line(
        8,
        pass,
        "loss invariance and herald rate",
        format!(
            "overall {overall:.4e}; heralded F {} vs lossless {} ({dz:.2} σ); rate {:.4e} ± {:.1e} vs {product:.4e} ({rz:.2} σ)",
            b.fidelity, a.fidelity, b.success_rate.value, b.success_rate.stderr
        ),
        start.elapsed(),
    );
}

fn random_noise(rng: &mut ChaCha8Rng) -> NoiseModel {
    let mut n = NoiseModel::device();
    n.source.reexcitation_weight = rng.random_range(0.0..0.3);
    n.source.init_error = rng.random_range(0.0..0.08);
    n.spin.readout_fidelity = rng.random_range(0.9..1.0);
    n.spin.t2_star_ns = rng.random_range(1.0..3.0);
    n.spin.t2_echo_us = rng.random_range(1.0..5.0);
    n.timing.unrefocused_ns = rng.random_range(0.0..1.5);
    n.timing.storage_half_span_ns = rng.random_range(5.0..500.0);
    n.optics.analyzer_depolarization = rng.random_range(0.0..0.3);
    n
}

fn c9(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let noise = random_noise(&mut rng);
        let t = TargetState::random(&mut rng);
        let mc = Sampling::monte_carlo(20_000, 900 + i);
        let (e, m) = (run_transfer(&t, &noise, &Sampling::exact()).unwrap(), run_transfer(&t, &noise, &mc).unwrap());
        worst = worst.max(z(&m.result.fidelity, e.result.fidelity.value));
        let (e, m) = (
            run_entanglement_verification(&noise, &Sampling::exact()).unwrap(),
            run_entanglement_verification(&noise, &mc).unwrap(),
        );
        for (a, b) in [(m.f_zz, e.f_zz), (m.v_xx, e.v_xx), (m.v_yy, e.v_yy)] {
            worst = worst.max(z(&a, b.value));
        }
    }
    r.line(
        9,
        worst <= 3.0,
        "Monte Carlo vs exact, 10 random configurations",
        format!("largest deviation {worst:.2} σ over 40 comparisons"),
        start.elapsed(),
    );
}

fn c10(r: &mut Report) {
    let start = Instant::now();
    let mut noise = NoiseModel::ideal();
    noise.source.resource = ResourceKind::ClassicallyCorrelated;
    let sep = run_entanglement_verification(&noise, &Sampling::monte_carlo(100_000, 1010)).unwrap().result.fidelity;
    let exact = classical_baseline(&TargetState::d_plus(), &Sampling::exact()).unwrap();
    let mc = classical_baseline(&TargetState::d_plus(), &Sampling::monte_carlo(100_000, 1011)).unwrap();
    let succ = &mc.measure_prepare.success_rate;
    let pass = sep.value <= 0.5 + 3.0 * sep.stderr
        && (exact.measure_prepare.success_rate.value - 0.5).abs() < 1e-12
        && z(succ, 0.5) <= 3.0;
    r.line(
        10,
        pass,
        "classical bounds",
        format!(
            "separable-resource F {sep} (≤ 0.5 + 3σ); measure-and-prepare success exact {:.4}, MC {succ}",
            exact.measure_prepare.success_rate.value
        ),
        start.elapsed(),
    );
}

fn main() {
    // Warm the calibration cache so timed criteria measure only the run.
    let cal = Instant::now();
    let _ = NoiseModel::calibrated();
    println!("calibration: {:.2} s", cal.elapsed().as_secs_f64());

    let mut report = Report { failures: Vec::new() };
    c1(&mut report);
    c2(&mut report);
    c3(&mut report);
    c4(&mut report);
    c5(&mut report);
    c6(&mut report);
    c7(&mut report);
    c8(&mut report);
    c9(&mut report);
    c10(&mut report);
    if report.failures.is_empty() {
        println!("acceptance: 10/10 criteria passed");
    } else {
        println!("acceptance: failed criteria {:?}", report.failures);
        std::process::exit(1);
    }
}
