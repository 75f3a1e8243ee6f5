//! Coherent states and the truncated displacement operator.

use condibeam::fock::{coherent_state, displacement_op, fock_state, TruncationPolicy};
use num_complex::Complex64 as C64;

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(32)?;
    let alpha = C64::new(1.2, -0.5);

    let coh = coherent_state(alpha, &policy)?;
    let displaced_vac = displacement_op(alpha, &policy)?.apply(&fock_state(0, &policy)?)?;
    println!("<n> of |alpha>           {:.12}", coh.mean_photon_number());
    println!("|alpha|^2                {:.12}", alpha.norm_sqr());
    println!("fidelity D|0> vs |alpha> {:.15}", coh.fidelity(&displaced_vac)?);
    println!("tail mass above level 28 {:.3e}", coh.tail_mass(28));

    // too large for this cutoff
    match coherent_state(C64::new(5.0, 0.0), &policy) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("|5> at cutoff 32: {e}"),
    }
    Ok(())
}
