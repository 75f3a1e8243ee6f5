//! Special polynomials: three-term recurrences against explicit sums.

use condibeam::poly::{assoc_laguerre, assoc_laguerre_sum, hermite, hermite_sum, jacobi, jacobi_recurrence};
use num_complex::Complex64 as C64;

fn main() {
    let x = 0.73;
    for k in [0, 3, 8, 12] {
        println!("H_{k:<2}({x})  recurrence {:>16.6}  sum {:>16.6}", hermite(k, x), hermite_sum(k, x));
    }
    let z = C64::new(1.1, -0.4);
    for (n, a) in [(4, 0.0), (6, 2.5), (10, 3.0)] {
        let r = assoc_laguerre(n, a, z);
        let s = assoc_laguerre_sum(n, a, z);
        println!("L_{n}^{a}({z})  diff {:.2e}", (r - s).norm());
    }
    let (b, c, w) = (2.0, -1.5, 0.3);
    for m in [1, 4, 7] {
        let direct = jacobi(m, b, c, w);
        match jacobi_recurrence(m, b, c, w) {
            Some(rec) => println!("P_{m}^({b},{c})({w})  sum {direct:.12}  recurrence {rec:.12}"),
            None => println!("P_{m}^({b},{c})({w})  sum {direct:.12}  recurrence singular"),
        }
    }
}
