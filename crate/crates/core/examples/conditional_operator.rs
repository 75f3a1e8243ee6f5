//! Closed-form conditional operator against the brute-force two-mode oracle.

use condibeam::conditional::{apply_conditional, y_displaced_fock, BeamSplitterParams, ReferencePrep};
use condibeam::fock::{FockVector, TruncationPolicy};
use condibeam::oracle::oracle_y;
use num_complex::Complex64 as C64;

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(48)?;
    let bs = BeamSplitterParams::from_angles(1.0, 0.4, -1.1)?;
    let (m, n) = (2, 3);
    let (alpha, beta) = (C64::new(0.3, -0.2), C64::new(-0.4, 0.6));

    let y = y_displaced_fock(m, n, alpha, beta, &bs, &policy)?;
    let reference = oracle_y(
        &ReferencePrep::displaced_fock(m, alpha),
        &ReferencePrep::displaced_fock(n, beta),
        &bs,
        &policy,
    )?;
    println!("s = {:.4}", bs.s());
    println!("relative difference on {} levels: {:.2e}", policy.safe_levels(), y.rel_diff_on_block(&reference, policy.safe_levels()));

    let mut amps = vec![C64::new(0.0, 0.0); policy.dim()];
    amps[1] = C64::new(0.6, 0.0);
    amps[2] = C64::new(0.0, 0.8);
    let out = apply_conditional(&y, &FockVector::from_amplitudes(amps))?;
    println!("outcome probability {:.10}", out.probability);
    println!("output <n>          {:.10}", out.state.mean_photon_number());
    Ok(())
}
