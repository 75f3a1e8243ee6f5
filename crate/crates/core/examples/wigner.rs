//! Wigner function of a cat-like state, closed form against numeric transform.

use condibeam::cat::{chi_state, CatSpec};
use condibeam::fock::TruncationPolicy;
use condibeam::phase_space::{wigner_cat_closed, wigner_numeric, Axis, IntegrationSpec};

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(32)?;
    let spec = CatSpec::separated(3);
    let chi = chi_state(&spec, &policy)?;
    let axis = Axis::new("x", -4.0, 4.0, 41)?;
    let paxis = Axis::new("p", -4.0, 4.0, 41)?;
    let numeric = wigner_numeric(&chi, &axis, &paxis, &IntegrationSpec::default())?;
    let closed = wigner_cat_closed(&spec, &axis, &paxis)?;
    println!("max |closed - numeric| = {:.2e}", closed.max_abs_diff(&numeric)?);
    println!("integral               = {:.6}", numeric.integrate());
    let min = numeric.values().iter().copied().fold(f64::INFINITY, f64::min);
    println!("most negative value    = {min:.6}");
    Ok(())
}
