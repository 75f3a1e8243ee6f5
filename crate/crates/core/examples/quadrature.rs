//! Quadrature distributions of a cat-like state at a few phases.

use condibeam::cat::{chi_state, CatSpec};
use condibeam::fock::TruncationPolicy;
use condibeam::phase_space::{quadrature_chi_closed, quadrature_dist, Axis};

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(32)?;
    let spec = CatSpec::separated(10);
    let chi = chi_state(&spec, &policy)?;
    let x = Axis::new("x", -7.0, 7.0, 281)?;
    for phi in [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
        let p = quadrature_dist(&chi, &x, phi);
        let closed = quadrature_chi_closed(&spec, &x, p.axis2());
        let (xm, _, pm) = p.argmax();
        println!(
            "phi = {phi:.4}: norm {:.8}, peak p({xm:+.2}) = {pm:.5}, closed-form diff {:.1e}",
            p.integrate(),
            p.max_abs_diff(&closed)?
        );
    }
    Ok(())
}
