//! How close the ratchet phase gets to a Dirac comb on the minima, measured
//! in W1. The minima are flat to fifth order, so the floor shrinks only like
//! σ^{1/5}.

use ratchet_lab::fokker_planck::DensityGrid;
use ratchet_lab::measures::ratchet_localization_check;
use ratchet_lab::RatchetPotential;

fn main() -> ratchet_lab::Result<()> {
    let p = RatchetPotential::new(2, 0.2, 1.0)?;
    let rho0 = DensityGrid::uniform(1024)?;
    let durations = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0];

    for sigma in [0.05, 1e-2, 1e-3, 1e-4] {
        let trace = ratchet_localization_check(&p, sigma, &rho0, &durations, None)?;
        let line: Vec<String> = trace.iter().map(|pt| format!("{:.4}", pt.distance)).collect();
        let floor = trace.last().unwrap().distance;
        println!(
            "sigma {sigma:>7.0e}: {}   floor/sigma^0.2 = {:.4}",
            line.join(" "),
            floor / sigma.powf(0.2)
        );
    }
    Ok(())
}
