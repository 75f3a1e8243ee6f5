//! Two-photon interference on a balanced splitter from the full unitary.

use condibeam::conditional::BeamSplitterParams;
use condibeam::fock::{fock_state, TruncationPolicy};
use condibeam::oracle::{bs_unitary, bs_unitary_factored, TwoModeState};

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(16)?;
    let bs = BeamSplitterParams::balanced();
    let u = bs_unitary(&bs, &policy);
    let one = fock_state(1, &policy)?;
    let out = u.apply(&TwoModeState::product(&one, &one)?)?;
    for (k1, k2) in [(2, 0), (1, 1), (0, 2)] {
        println!("P({k1},{k2}) = {:.12}", out.amps()[(k1, k2)].norm_sqr());
    }
    let factored = bs_unitary_factored(&bs, &policy)?;
    println!("generator vs factored form: {:.2e}", u.max_diff_on_block(&factored, policy.safe_levels()));
    Ok(())
}
