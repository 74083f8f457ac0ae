//! Parameter ladder: longer ratchet phases, longer diffusion and weaker noise
//! together. Rows are computed in parallel and come back in ladder order.

use ratchet_lab::fokker_planck::{GridSettings, SolverSettings};
use ratchet_lab::measures::{sweep, SweepLadder};
use ratchet_lab::RatchetPotential;

fn main() -> ratchet_lab::Result<()> {
    let p = RatchetPotential::new(2, 0.2, 1.0)?;
    let ladder = SweepLadder {
        points: 5,
        ..SweepLadder::default()
    };
    let rows = sweep(&p, &ladder, &GridSettings::with_cells(512), &SolverSettings::default())?;

    println!("{:>2} {:>7} {:>5} {:>7} {:>11} {:>11} {:>7}", "n", "t_tr", "tau", "sigma", "gap", "distance", "ratio");
    for r in &rows {
        let a = &r.analysis;
        println!(
            "{:>2} {:>7.3} {:>5.2} {:>7.4} {:>11.4e} {:>11.4e} {:>7.3}",
            r.index, a.t_tr, a.tau, a.sigma, a.well_gaps[0], a.distance, a.consistency_ratio
        );
    }
    Ok(())
}
