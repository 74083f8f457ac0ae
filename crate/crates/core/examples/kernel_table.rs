//! Neumann heat kernel on [0, 1]: the image sum and the cosine series agree
//! everywhere, and the switch between them sits at s = 1/π.

use ratchet_lab::kernel::KernelEval;

fn main() -> ratchet_lab::Result<()> {
    let eval = KernelEval::default();
    println!("switch at s = {:.6}", eval.switch_time);
    println!("{:>6} {:>6} {:>8} {:>14} {:>10}", "xi", "x", "s", "G", "|img-cos|");
    for s in [0.002, 0.05, 0.3, 1.0] {
        for xi in [0.0, 0.3] {
            for x in [0.0, 0.25, 0.5, 1.0] {
                let g = eval.green(xi, x, s)?;
                let diff = (eval.green_images(xi, x, s)? - eval.green_cosine(xi, x, s)?).abs();
                println!("{xi:>6.2} {x:>6.2} {s:>8.3} {g:>14.8} {diff:>10.1e}");
            }
        }
    }

    // Mass leaving [0, x] from a point source at 0.3.
    println!("\nCDF from xi = 0.3 at s = 0.05");
    for x in [0.1, 0.2, 0.3, 0.4, 0.6, 1.0] {
        println!("  F({x:.1}) = {:.10}", eval.green_cdf(0.3, x, 0.05)?);
    }
    Ok(())
}
