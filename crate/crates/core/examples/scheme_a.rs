//! Cat-like state from a Fock state and a displaced Fock measurement.

use condibeam::cat::{cat_norm_and_prob, chi_state, scheme_a, CatSpec};
use condibeam::conditional::BeamSplitterParams;
use condibeam::fock::TruncationPolicy;
use num_complex::Complex64 as C64;

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(48)?;
    let bs = BeamSplitterParams::balanced();
    println!(" n   p(n)          closed form   fidelity");
    for n in [1, 2, 4, 6, 10] {
        let beta_prime = C64::new((n as f64 / 2.0).sqrt(), 0.0);
        let out = scheme_a(n, beta_prime, &bs, &policy)?;
        let spec = CatSpec::new(n, out.beta);
        let (_, p) = cat_norm_and_prob(&spec);
        let f = out.state.fidelity(&chi_state(&spec, &policy)?)?;
        println!("{n:>2}   {:.10}  {p:.10}  {f:.12}", out.probability);
    }
    Ok(())
}
