//! Cat generation with a photodetector of finite efficiency.

use condibeam::cat::{cat_norm_and_prob, chi_state, CatSpec};
use condibeam::conditional::BeamSplitterParams;
use condibeam::fock::{displacement_op, fock_state, TruncationPolicy};
use condibeam::oracle::{conditional_reduce, photon_counting_povm, TwoModeState};
use num_complex::Complex64 as C64;

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(32)?;
    let bs = BeamSplitterParams::balanced();
    let n = 3;
    let beta_prime = C64::new(1.5f64.sqrt(), 0.0);
    let d = displacement_op(beta_prime, &policy)?;
    let input = TwoModeState::product(&fock_state(n, &policy)?, &fock_state(0, &policy)?)?;
    let spec = CatSpec::new(n, -beta_prime);
    let chi = chi_state(&spec, &policy)?;
    println!("ideal probability {:.6}", cat_norm_and_prob(&spec).1);
    println!(" eta   p         purity    fidelity");
    for eta in [1.0, 0.95, 0.9, 0.8, 0.6] {
        let povm = photon_counting_povm(eta, &policy)?;
        let element = d.compose(povm.element(n).expect("n below cutoff"))?.compose(&d.adjoint())?;
        let (rho, p) = conditional_reduce(&input, &element, &bs, &policy)?;
        println!("{eta:.2}  {p:.6}  {:.6}  {:.6}", rho.purity(), rho.overlap_with_pure(&chi)?);
    }
    Ok(())
}
