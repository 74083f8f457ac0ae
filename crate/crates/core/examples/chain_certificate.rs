//! Discrete ratchet: transition matrix, stationary vector, contraction
//! constant and the monotone-gap certificate, for a range of diffusion times.

use ratchet_lab::chain::{certify_gap, kappa, stationary, verify_monotone, TransitionMatrix};
use ratchet_lab::RatchetPotential;

fn main() -> ratchet_lab::Result<()> {
    let p = RatchetPotential::new(3, 0.1, 1.0)?;
    let m = TransitionMatrix::build(&p, 0.5)?;
    println!("P at tau = 0.5 (minima {:?})", p.minima());
    for i in 0..m.k() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.6}")).collect();
        println!("  [{}]", row.join(", "));
    }

    println!("\n{:>5} {:>10} {:>12} {:>12} {:>10}", "tau", "kappa", "min gap", "gap*e^pi2t", "verdict");
    for tau in [0.3, 0.4, 0.5, 0.6, 0.8, 1.0] {
        let m = TransitionMatrix::build(&p, tau)?;
        let mu = stationary(&m)?;
        let mono = verify_monotone(&mu, tau);
        let cert = certify_gap(&m);
        println!(
            "{tau:>5.2} {:>10.6} {:>12.4e} {:>12.6} {:>10?}",
            kappa(&m)?,
            mono.min_gap,
            mono.scaled_min_gap,
            cert.verdict
        );
        for reason in cert.failure_reasons() {
            println!("      {reason}");
        }
    }

    // Equal basins: no preferred direction.
    let sym = TransitionMatrix::build(&RatchetPotential::new(2, 0.25, 1.0)?, 0.5)?;
    println!("\nsymmetric wells: {:?}", certify_gap(&sym).verdict);
    Ok(())
}
