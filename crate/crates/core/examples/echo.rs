//! Spin-echo and Ramsey sweeps with decay fits for T2 and T2*.

use qdtransfer::protocol::{run_spin_sweep, Sampling, SweepKind};
use qdtransfer::spin::SpinParams;

fn main() -> qdtransfer::Result<()> {
    let p = SpinParams::default();
    let sampling = Sampling::monte_carlo(40_000, 3);

    let spans = [38.0, 500.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0];
    let echo = run_spin_sweep(SweepKind::Echo, &spans, &p, &sampling)?;
    println!("echo span_ns  visibility");
    for (t, v) in &echo.points {
        println!("{t:>12.0}  {v}");
    }
    println!("T2 = {} us\n", echo.fit?);

    let delays: Vec<f64> = (0..13).map(|i| 0.25 * f64::from(i)).collect();
    let ramsey = run_spin_sweep(SweepKind::Ramsey, &delays, &p, &sampling)?;
    println!("ramsey delay_ns  visibility");
    for (t, v) in &ramsey.points {
        println!("{t:>15.2}  {v}");
    }
    println!("T2* = {} ns", ramsey.fit?);
    Ok(())
}
