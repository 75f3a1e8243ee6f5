//! s-ordered monomials: closed form against recursive conversion, and the
//! normal-reordering identity.

use condibeam::fock::TruncationPolicy;
use condibeam::ordering::{antinormal_product, normal_reorder, s_ordered_monomial, s_to_t_convert, OrderedMonomialSpec};

fn main() -> condibeam::Result<()> {
    let policy = TruncationPolicy::with_cutoff(24)?;
    let safe = policy.safe_levels();
    for s in [1.5, 3.0, 9.0] {
        let mut worst = 0.0f64;
        for m in 0..=3 {
            for n in 0..=3 {
                let closed = s_ordered_monomial(OrderedMonomialSpec::new(m, n, s)?, &policy)?;
                let converted = s_to_t_convert(m, n, s, 1.0, &policy)?;
                worst = worst.max(closed.rel_diff_on_block(&converted, safe));
            }
        }
        println!("s = {s:<4} max relative difference {worst:.2e}");
    }
    let reordered = normal_reorder(3, 2, &policy)?;
    let direct = antinormal_product(3, 2, &policy);
    println!("a^3 (a†)^2 normal-reordered vs direct product: {:.2e}", reordered.rel_diff_on_block(&direct, safe));
    Ok(())
}
