//! Fixed point of the period map (ratchet phase then free diffusion), and how
//! its well masses compare with the discrete chain.

use ratchet_lab::chain::{stationary, TransitionMatrix};
use ratchet_lab::fokker_planck::{find_periodic, GridSettings, RatchetSchedule, SolverSettings};
use ratchet_lab::measures::well_masses;
use ratchet_lab::RatchetPotential;

fn main() -> ratchet_lab::Result<()> {
    let p = RatchetPotential::new(2, 0.2, 1.0)?;
    let sched = RatchetSchedule::from_tau(0.05, 4.0, 0.5)?;
    let grid = GridSettings::default();
    let orbit = find_periodic(&p, &sched, &grid, &SolverSettings::default())?;

    println!("converged in {} cycles", orbit.cycles());
    for (i, r) in orbit.trace.iter().enumerate() {
        println!("  cycle {:>2}: |Δρ|₁ = {r:.3e}", i + 1);
    }
    if let Some(q) = orbit.contraction_estimate() {
        println!("contraction per cycle ≈ {q:.3e}");
    }

    let masses = well_masses(&orbit.density, &p)?;
    let mu = stationary(&TransitionMatrix::build(&p, sched.tau())?)?.mu;
    println!("\nwell masses {:?}", masses.as_slice());
    println!("chain  mu   {mu:?}");
    println!("H² norm of the orbit {:.6}", orbit.density.sobolev_h2_norm()?);
    Ok(())
}
