//! Displaced cat-like state from a coherent signal and a Fock reference.

use condibeam::cat::{chi_state, scheme_b_state, CatSpec};
use condibeam::conditional::BeamSplitterParams;
use condibeam::fock::{displacement_op, TruncationPolicy};

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(64)?;
    let bs = BeamSplitterParams::balanced();
    for n in [2, 4] {
        let spec = CatSpec::separated(n);
        let out = scheme_b_state(&spec, &bs, &policy)?;
        let target = displacement_op(spec.beta, &policy)?.apply(&chi_state(&spec, &policy)?)?;
        println!("n = {n}: p = {:.10}, fidelity with D(beta)chi = {:.12}", out.probability, out.state.fidelity(&target)?);
    }
    Ok(())
}
