//! Config-driven experiment runners and CSV emission.

mod config;

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{
    Eq5Config, Experiment, FringeConfig, NamedTarget, Profile, RunConfig, SweepConfig, TargetSpec, TransferConfig,
};

use crate::error::{Error, Result};
use crate::optics::TargetState;
use crate::protocol::{
    classical_baseline, ghz_expansion, loss_budget, run_entanglement_verification, run_fringe, run_spin_sweep,
    run_transfer, Engine, GhzOutcome, LossReading, Sampling, SweepKind,
};
use crate::state::ops::{self, CMatrix};
use crate::stats::Estimate;

/// Fixed column set of each experiment's CSV.
pub fn columns(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::Entangle => &["basis", "photon_outcome", "spin_bit", "probability", "stderr", "count"],
        Experiment::Transfer => &[
            "target",
            "alpha_re",
            "alpha_im",
            "beta_re",
            "beta_im",
            "outcome",
            "detector",
            "correction",
            "probability",
            "probability_stderr",
            "fidelity",
            "fidelity_stderr",
        ],
        Experiment::Echo => &["span_ns", "visibility", "stderr"],
        Experiment::Fringe => &["rf_phase_rad", "theta_rad", "trials", "coincidences", "probability", "stderr"],
        Experiment::Lossbudget => &["stage", "value", "efficiency", "cumulative"],
        Experiment::Eq5check => &[
            "sample",
            "alpha_re",
            "alpha_im",
            "beta_re",
            "beta_im",
            "outcome",
            "probability",
            "error",
            "printed_error",
            "printed_error_up_to_phase",
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub csv: String,
    pub summary: String,
}

impl RunOutput {
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

struct Csv {
    out: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new(config: &RunConfig) -> Result<Self> {
        let mut head = String::new();
        for line in config.to_toml()?.lines() {
            if line.is_empty() {
                head.push_str("#\n");
            } else {
                let _ = writeln!(head, "# {line}");
            }
        }
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(head.into_bytes());
        out.write_record(columns(config.experiment)).map_err(csv_error)?;
        Ok(Self { out })
    }

    fn row(&mut self, cells: &[String]) -> Result<()> {
        self.out.write_record(cells).map_err(csv_error)
    }

    fn finish(self) -> Result<String> {
        let bytes = self.out.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn pm(e: &Estimate) -> String {
    format!("{:.4} ± {:.4}", e.value, e.stderr)
}

/// Executes the configured experiment. The CSV depends only on the config,
/// not on where it is written.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let eff = config.effective()?;
    let mut csv = Csv::new(&RunConfig { output_path: None, ..eff.clone() })?;
    let summary = match eff.experiment {
        Experiment::Entangle => entangle(&eff, &mut csv)?,
        Experiment::Transfer => transfer(&eff, &mut csv)?,
        Experiment::Echo => echo(&eff, &mut csv)?,
        Experiment::Fringe => fringe(&eff, &mut csv)?,
        Experiment::Lossbudget => lossbudget(&eff, &mut csv)?,
        Experiment::Eq5check => eq5check(&eff, &mut csv)?,
    };
    Ok(RunOutput { experiment: eff.experiment, csv: csv.finish()?, summary })
}

fn entangle(c: &RunConfig, csv: &mut Csv) -> Result<String> {
    let r = run_entanglement_verification(&c.noise_model()?, &c.sampling())?;
    for (basis, joint) in &r.joint {
        for (photon, row) in joint.iter().enumerate() {
            for (spin, p) in row.iter().enumerate() {
                let count = match c.engine {
                    Engine::Exact => 0,
                    Engine::MonteCarlo => r.result.counts.count(photon as u8 + 1, spin as u8, Some(*basis)),
                };
                csv.row(&[
                    format!("{basis:?}"),
                    photon.to_string(),
                    spin.to_string(),
                    num(p.value),
                    num(p.stderr),
                    count.to_string(),
                ])?;
            }
        }
    }
    let f = &r.result.fidelity;
    let mut s = String::new();
    let _ = writeln!(s, "quantity        value");
    let _ = writeln!(s, "F_ZZ            {}", pm(&r.f_zz));
    let _ = writeln!(s, "V_XX            {}", pm(&r.v_xx));
    let _ = writeln!(s, "V_YY            {}", pm(&r.v_yy));
    let _ = writeln!(s, "F               {}", pm(f));
    let _ = writeln!(s, "success rate    {}", pm(&r.result.success_rate));
    let _ = writeln!(
        s,
        "classical bound 0.5000  (F exceeds it by {:.1} σ)",
        if f.stderr > 0.0 { (f.value - 0.5) / f.stderr } else { f64::INFINITY }
    );
    Ok(s)
}

fn transfer(c: &RunConfig, csv: &mut Csv) -> Result<String> {
    let noise = c.noise_model()?;
    let sampling = c.sampling();
    let mut s = String::new();
    let _ = writeln!(s, "{:<24} {:<18} {:<18}", "target", "fidelity", "success rate");
    for spec in &c.transfer.targets {
        let t = spec.state();
        let r = run_transfer(&t, &noise, &sampling)?;
        let label = spec.label();
        let amps = [num(t.alpha.re), num(t.alpha.im), num(t.beta.re), num(t.beta.im)];
        for o in &r.per_outcome {
            let mut row = vec![label.clone()];
            row.extend(amps.iter().cloned());
            row.extend([
                o.outcome.name().to_string(),
                o.outcome.detector().to_string(),
                o.outcome.correction().name().to_string(),
                num(o.probability.value),
                num(o.probability.stderr),
                num(o.fidelity.value),
                num(o.fidelity.stderr),
            ]);
            csv.row(&row)?;
        }
        let mut row = vec![label.clone()];
        row.extend(amps.iter().cloned());
        row.extend([
            "all".to_string(),
            "0".to_string(),
            "-".to_string(),
            num(r.result.success_rate.value),
            num(r.result.success_rate.stderr),
            num(r.result.fidelity.value),
            num(r.result.fidelity.stderr),
        ]);
        csv.row(&row)?;
        let _ = writeln!(s, "{:<24} {:<18} {:<18}", label, pm(&r.result.fidelity), pm(&r.result.success_rate));
    }
    let base = classical_baseline(&TargetState::h(), &Sampling { engine: Engine::Exact, ..sampling })?;
    let _ = writeln!(
        s,
        "classical bound: fidelity {:.4}; measure-and-prepare success {:.4}; random guess fidelity {:.4}",
        base.entanglement_bound, base.measure_prepare.success_rate.value, base.random_guess.value
    );
    Ok(s)
}

fn echo(c: &RunConfig, csv: &mut Csv) -> Result<String> {
    let noise = c.noise_model()?;
    let r = run_spin_sweep(c.sweep.sequence, &c.sweep.spans(), &noise.spin, &c.sampling())?;
    for (span, v) in &r.points {
        csv.row(&[num(*span), num(v.value), num(v.stderr)])?;
    }
    let (name, unit) = match r.kind {
        SweepKind::Echo => ("T2", "us"),
        SweepKind::Ramsey => ("T2*", "ns"),
    };
    let mut s = String::new();
    match &r.fit {
        Ok(e) => {
            let _ = writeln!(s, "fitted {name} = {} {unit}", pm(e));
        }
        Err(e) => {
            let _ = writeln!(s, "fit failed: {e}");
        }
    }
    Ok(s)
}

fn fringe(c: &RunConfig, csv: &mut Csv) -> Result<String> {
    let n = c.fringe.steps;
    let phases: Vec<f64> = (0..n).map(|i| f64::from(i) * TAU / f64::from(n)).collect();
    let r = run_fringe(&c.noise_model()?, &phases, &c.sampling())?;
    for p in &r.points {
        csv.row(&[
            num(p.rf_phase_rad),
            num(p.theta_rad),
            p.trials.to_string(),
            p.coincidences.to_string(),
            num(p.probability.value),
            num(p.probability.stderr),
        ])?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "fitted visibility    {}", pm(&r.fit.visibility));
    let _ = writeln!(s, "expected visibility  {:.4}", r.analytic_visibility);
    let _ = writeln!(s, "fringe phase         {:.4} rad", r.fit.phase);
    let _ = writeln!(s, "sideband efficiency  {:.4}", r.efficiency);
    Ok(s)
}

fn lossbudget(c: &RunConfig, csv: &mut Csv) -> Result<String> {
    let loss = c.noise_model()?.loss;
    let mut cumulative = 1.0;
    for (stage, (name, eff)) in loss.stages.iter().zip(loss.efficiencies()) {
        cumulative *= eff;
        csv.row(&[name, num(stage.value), num(eff), num(cumulative)])?;
    }
    let overall = loss.overall()?;
    let other = match loss.reading {
        LossReading::Efficiency => LossReading::Loss,
        LossReading::Loss => LossReading::Efficiency,
    };
    let alt = crate::protocol::LossModel { reading: other, ..loss.clone() }.overall()?;
    let mut s = String::new();
    let _ = writeln!(s, "overall efficiency ({:?} reading)  {overall:.4e}", loss.reading);
    let _ = writeln!(s, "overall efficiency ({other:?} reading)  {alt:.4e}");
    let _ = writeln!(s, "heralds per 10^6 pairs              {:.1}", overall * 1e6);
    let _ = writeln!(s, "applied to trials                   {}", loss.apply_to_trials);
    debug_assert_eq!(loss_budget(&loss.efficiencies()).ok(), Some(overall));
    Ok(s)
}

/// `A_k` as commonly printed, with `−iσ_y/2` for `χ⁺`.
fn printed_operator(o: GhzOutcome) -> CMatrix {
    match o {
        GhzOutcome::ChiPlus => ops::pauli_y() * Complex64::new(0.0, -0.5),
        _ => o.expansion_operator(),
    }
}

fn distance(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
}

fn distance_up_to_phase(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let inner = b[0].conj() * a[0] + b[1].conj() * a[1];
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    distance(a, &[b[0] * phase, b[1] * phase])
}

fn apply(m: &CMatrix, t: &TargetState) -> [Complex64; 2] {
    [m[(0, 0)] * t.alpha + m[(0, 1)] * t.beta, m[(1, 0)] * t.alpha + m[(1, 1)] * t.beta]
}

fn eq5check(c: &RunConfig, csv: &mut Csv) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut targets = vec![TargetState::h(), TargetState::d_plus(), TargetState::sigma_plus()];
    targets.extend((0..c.eq5.samples).map(|_| TargetState::random(&mut rng)));
    let (mut worst, mut worst_printed, mut worst_phase) = (0.0f64, 0.0f64, 0.0f64);
    for (i, t) in targets.iter().enumerate() {
        for (o, v) in ghz_expansion(t)? {
            let expected = apply(&o.expansion_operator(), t);
            let printed = apply(&printed_operator(o), t);
            let (e, ep, eph) = (distance(&v, &expected), distance(&v, &printed), distance_up_to_phase(&v, &printed));
            worst = worst.max(e);
            worst_printed = worst_printed.max(ep);
            worst_phase = worst_phase.max(eph);
            csv.row(&[
                i.to_string(),
                num(t.alpha.re),
                num(t.alpha.im),
                num(t.beta.re),
                num(t.beta.im),
                o.name().to_string(),
                num(v[0].norm_sqr() + v[1].norm_sqr()),
                num(e),
                num(ep),
                num(eph),
            ])?;
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "targets checked                  {}", targets.len());
    let _ = writeln!(s, "max error vs A_k                 {worst:.3e}");
    let _ = writeln!(s, "max error vs printed A_k         {worst_printed:.3e}");
    let _ = writeln!(s, "  up to a global phase           {worst_phase:.3e}");
    let _ = writeln!(s, "A_k: xi+ -> Z/2, xi- -> I/2, chi+ -> +iY/2 (printed -iY/2), chi- -> -X/2");
    Ok(s)
}

/// Command-line interface of the `qdtransfer` binary.
#[derive(Debug, clap::Parser)]
#[command(name = "qdtransfer", version, about = "Photon-to-spin state transfer simulator")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Experiment,
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub trials: Option<u64>,
    /// exact | mc
    #[arg(long, value_name = "ENGINE")]
    pub engine: Option<Engine>,
    /// CSV destination; defaults to the config's `output_path`, then
    /// `<command>.csv`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::new(self.command),
        };
        c.experiment = self.command;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(e) = self.engine {
            c.engine = e;
        }
        if let Some(o) = &self.out {
            c.output_path = Some(o.display().to_string());
        }
        Ok(c)
    }

    /// Runs the command; returns the summary and the CSV path written.
    pub fn execute(&self) -> Result<(String, PathBuf)> {
        let c = self.config()?;
        let out = run(&c)?;
        let path = PathBuf::from(c.output_path.clone().unwrap_or_else(|| format!("{}.csv", c.experiment.name())));
        out.write(&path)?;
        Ok((out.summary, path))
    }
}
