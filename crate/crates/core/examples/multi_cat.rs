//! Multiple cat-like state: Husimi maxima and zeros.

use condibeam::cat::{multi_cat_state, CatSpec};
use condibeam::fock::TruncationPolicy;
use condibeam::phase_space::{husimi, husimi_multi_cat_closed, Axis};
use num_complex::Complex64 as C64;

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(128)?;
    let spec = CatSpec::multi(10, C64::new(4.2, 0.0), 5)?;
    let state = multi_cat_state(&spec, &policy)?;
    let ax = Axis::new("re", -8.0, 8.0, 161)?;
    let ay = Axis::new("im", -8.0, 8.0, 161)?;
    let q = husimi(&state, &ax, &ay);
    println!("closed form vs overlap: {:.2e}", q.max_abs_diff(&husimi_multi_cat_closed(&spec, &ax, &ay))?);
    println!("<n> = {:.4}", state.mean_photon_number());
    for (x, y, v) in q.local_maxima(0.2) {
        let a = C64::new(x, y);
        println!("maximum at |alpha| = {:.2}, arg = {:+.3} rad, Q = {v:.5}", a.norm(), a.arg());
    }
    Ok(())
}
