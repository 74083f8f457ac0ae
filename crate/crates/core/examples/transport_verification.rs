//! Full transport check: the periodic orbit of a ratchet and of its mirror
//! image must push mass in opposite directions, within the chain's bound.

use ratchet_lab::fokker_planck::{GridSettings, RatchetSchedule, SolverSettings};
use ratchet_lab::measures::verify_transport;
use ratchet_lab::RatchetPotential;

fn main() -> ratchet_lab::Result<()> {
    let sched = RatchetSchedule::from_tau(0.05, 4.0, 0.5)?;
    let solver = SolverSettings::default();

    for (k, a) in [(2, 0.2), (3, 0.1), (2, 0.25)] {
        let p = RatchetPotential::new(k, a, 1.0)?;
        // Cells must divide evenly among the wells.
        let grid = GridSettings::with_cells(342 * k);
        let report = verify_transport(&p, &sched, &grid, &solver)?;
        println!("k = {k}, a = {a}: expected {:?}, passed {}", report.expected, report.passed);
        for (name, orbit) in [("original", &report.original), ("mirrored", &report.mirrored)] {
            let Some(o) = orbit else { continue };
            println!(
                "  {name:<8} {:?} gaps {:?}\n           distance {:.3e} <= bound {:.3e} (kappa {:.4})",
                o.direction, o.well_gaps, o.distance, o.certified_bound, o.kappa
            );
        }
        for f in &report.failures {
            println!("  failure: {f}");
        }
    }
    Ok(())
}
