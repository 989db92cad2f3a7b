//! Expands the composite state over the GHZ basis and compares each branch
//! with the Pauli operator it should carry.

use qdtransfer::optics::TargetState;
use qdtransfer::protocol::{ghz_expansion, GhzOutcome};
use rand::SeedableRng;

fn main() -> qdtransfer::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let t = TargetState::random(&mut rng);
        for (o, v) in ghz_expansion(&t)? {
            let a = o.expansion_operator();
            let e0 = a[(0, 0)] * t.alpha + a[(0, 1)] * t.beta;
            let e1 = a[(1, 0)] * t.alpha + a[(1, 1)] * t.beta;
            worst = worst.max((v[0] - e0).norm()).max((v[1] - e1).norm());
        }
    }
    for o in GhzOutcome::ALL {
        let a = o.expansion_operator();
        let cell = |i, j| {
            let z: num_complex::Complex64 = a[(i, j)];
            format!("{:+.1}{:+.1}i", z.re + 0.0, z.im + 0.0)
        };
        println!(
            "{:<4} detector {}  A_k = [[{}, {}], [{}, {}]]",
            o.name(),
            o.detector(),
            cell(0, 0),
            cell(0, 1),
            cell(1, 0),
            cell(1, 1)
        );
    }
    println!("largest deviation over 50 random targets: {worst:.2e}");
    Ok(())
}
