//! Hermite, Laguerre and Jacobi polynomials.
//!
//! Each family has a fast evaluation route (three-term recurrence) and an
//! explicit finite-sum route. The Jacobi polynomial is defined through the
//! finite sum with generalized binomial coefficients so that negative-integer
//! parameters, as produced by the diagonal operator `n̂ − n` on low Fock
//! levels, are well defined.

use num_complex::Complex64 as C64;

/// Largest `k` for which the falling-factorial product is evaluated directly.
const DIRECT_BINOMIAL_MAX: usize = 20;

pub fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// `k!` as a float; exact up to 22!.
pub fn factorial(k: usize) -> f64 {
    if k <= 22 {
        (1..=k).fold(1.0, |acc, i| acc * i as f64)
    } else {
        ln_factorial(k).exp()
    }
}

/// `C(n, k)` for nonnegative integers; exact while the result fits in 53 bits.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
        if acc < 9.0e15 {
            acc = acc.round();
        }
    }
    acc
}

/// Generalized binomial coefficient `r (r−1) … (r−k+1) / k!` for real `r`.
pub fn gen_binomial(r: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k <= DIRECT_BINOMIAL_MAX {
        let mut acc = 1.0;
        for i in 0..k {
            acc *= (r - i as f64) / (i + 1) as f64;
        }
        return acc;
    }
    // log-space product; a vanishing factor makes the whole product zero
    let mut sign = 1.0;
    let mut ln = -ln_factorial(k);
    for i in 0..k {
        let f = r - i as f64;
        if f == 0.0 {
            return 0.0;
        }
        if f < 0.0 {
            sign = -sign;
        }
        ln += f.abs().ln();
    }
    sign * ln.exp()
}

/// Physicists' Hermite polynomial `H_k(x)` by upward recurrence.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_k(x) = Σ_j (−1)^j k! / (j! (k−2j)!) (2x)^{k−2j}`.
pub fn hermite_sum(k: usize, x: f64) -> f64 {
    (0..=k / 2)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let ln_c = ln_factorial(k) - ln_factorial(j) - ln_factorial(k - 2 * j);
            sign * ln_c.exp() * (2.0 * x).powi((k - 2 * j) as i32)
        })
        .sum()
}

/// Orthonormal Hermite functions `ψ_k(x) = π^{-1/4} e^{-x²/2} H_k(x) / √(2^k k!)`
/// for `k = 0..=kmax`, computed with the normalized recurrence (no overflow).
pub fn hermite_functions(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if kmax >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for k in 2..=kmax {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * out[k - 1] - ((kf - 1.0) / kf).sqrt() * out[k - 2];
        out.push(next);
    }
    out
}

/// Laguerre polynomial `L_n(z)`.
pub fn laguerre(n: usize, z: C64) -> C64 {
    assoc_laguerre(n, 0.0, z)
}

/// Associated Laguerre polynomial `L_n^a(z)` by upward recurrence in the
/// degree. The recurrence has no parameter-dependent divisions, so any real
/// `a` (negative integers included) is admissible.
pub fn assoc_laguerre(n: usize, a: f64, z: C64) -> C64 {
    let mut prev = C64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = C64::new(1.0 + a, 0.0) - z;
    for k in 1..n {
        let kf = k as f64;
        let next = ((C64::new(2.0 * kf + 1.0 + a, 0.0) - z) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Real-argument specialization of [`assoc_laguerre`].
pub fn assoc_laguerre_real(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_0^a(x) … L_nmax^a(x)` in one pass.
pub fn assoc_laguerre_sequence(nmax: usize, a: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax >= 1 {
        out.push(1.0 + a - x);
    }
    for k in 1..nmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `L_n^a(z) = Σ_{j=0}^n C(n+a, n−j) (−z)^j / j!`.
pub fn assoc_laguerre_sum(n: usize, a: f64, z: C64) -> C64 {
    let mut term_pow = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=n {
        if j > 0 {
            term_pow *= -z / j as f64;
        }
        acc += gen_binomial(n as f64 + a, n - j) * term_pow;
    }
    acc
}

/// Jacobi polynomial `P_m^{(b,c)}(z)` from the finite sum
/// `2^{−m} Σ_j C(m+b, j) C(m+c, m−j) (z−1)^{m−j} (z+1)^j`.
pub fn jacobi(m: usize, b: f64, c: f64, z: f64) -> f64 {
    let mf = m as f64;
    let sum: f64 = (0..=m)
        .map(|j| {
            gen_binomial(mf + b, j)
                * gen_binomial(mf + c, m - j)
                * (z - 1.0).powi((m - j) as i32)
                * (z + 1.0).powi(j as i32)
        })
        .sum();
    sum * 0.5f64.powi(m as i32)
}

/// Three-term recurrence for `P_m^{(b,c)}(z)`. Returns `None` when a
/// recurrence denominator vanishes (degenerate parameter combinations); the
/// finite-sum route [`jacobi`] covers those.
pub fn jacobi_recurrence(m: usize, b: f64, c: f64, z: f64) -> Option<f64> {
    let mut prev = 1.0;
    if m == 0 {
        return Some(prev);
    }
    let mut cur = (b + 1.0) + (b + c + 2.0) * (z - 1.0) / 2.0;
    for n in 1..m {
        let nf = n as f64;
        let s = 2.0 * nf + b + c;
        let denom = 2.0 * (nf + 1.0) * (nf + b + c + 1.0) * s;
        if denom == 0.0 {
            return None;
        }
        let next = ((s + 1.0) * ((s + 2.0) * s * z + b * b - c * c) * cur
            - 2.0 * (nf + b) * (nf + c) * (s + 2.0) * prev)
            / denom;
        prev = cur;
        cur = next;
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.37), 1.0);
        assert_eq!(hermite(1, 0.0), 0.0);
        // 16x⁴ − 48x² + 12 at x = 1
        assert_eq!(hermite(4, 1.0), -20.0);
        assert!(close(hermite_sum(4, 1.0), -20.0, 1e-14));
    }

    #[test]
    fn hermite_functions_match_polynomials() {
        let x = 0.83;
        let psi = hermite_functions(10, x);
        for (k, v) in psi.iter().enumerate() {
            let direct = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp() * hermite(k, x)
                / (2f64.powi(k as i32) * factorial(k)).sqrt();
            assert!(close(*v, direct, 1e-13), "k={k}");
        }
    }

    #[test]
    fn laguerre_values() {
        for n in 0..6 {
            assert_eq!(laguerre(n, C64::new(0.0, 0.0)), C64::new(1.0, 0.0));
        }
        // L₁(x) = 1 − x
        assert!((assoc_laguerre_real(1, 0.0, 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(assoc_laguerre(0, -3.0, C64::new(2.0, 1.0)), C64::new(1.0, 0.0));
        let seq = assoc_laguerre_sequence(7, 2.0, 1.3);
        for (n, v) in seq.iter().enumerate() {
            assert!(close(*v, assoc_laguerre_real(n, 2.0, 1.3), 1e-13));
        }
    }

    #[test]
    fn laguerre_negative_parameter() {
        // L_2^{-1}(x) = C(1,2) − C(1,1) x + C(1,0) x²/2 = −x + x²/2
        let x = 0.7;
        let expect = -x + x * x / 2.0;
        assert!(close(assoc_laguerre_real(2, -1.0, x), expect, 1e-14));
        assert!(close(assoc_laguerre_sum(2, -1.0, C64::new(x, 0.0)).re, expect, 1e-14));
    }

    #[test]
    fn binomials() {
        assert_eq!(gen_binomial(5.0, 2), 10.0);
        assert_eq!(binomial(40, 25), 40225345056.0);
        assert_eq!(binomial(60, 60), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(gen_binomial(-1.0, 3), -1.0);
        assert_eq!(gen_binomial(2.5, 0), 1.0);
        assert_eq!(gen_binomial(3.0, 25), 0.0);
        // log-space branch against the exact integer value C(40, 25)
        assert!(close(gen_binomial(40.0, 25), 40225345056.0, 1e-12));
        // (−1 choose k) = (−1)^k
        assert!(close(gen_binomial(-1.0, 23), -1.0, 1e-12));
    }

    #[test]
    fn jacobi_values() {
        assert_eq!(jacobi(0, 0.3, -2.0, 0.4), 1.0);
        for m in 0..7 {
            let (b, c) = (1.5, -3.0);
            assert!(close(jacobi(m, b, c, 1.0), gen_binomial(m as f64 + b, m), 1e-13));
        }
        // brute force: 2⁻² Σ_j C(3, j) C(−1, 2−j) (−1)^{2−j} (1)^j
        let brute = 0.25
            * (gen_binomial(3.0, 0) * gen_binomial(-1.0, 2) * 1.0
                - gen_binomial(3.0, 1) * gen_binomial(-1.0, 1)
                + gen_binomial(3.0, 2) * gen_binomial(-1.0, 0) * 1.0);
        assert!(close(jacobi(2, 1.0, -3.0, 0.0), brute, 1e-15));
        assert!(close(brute, 1.75, 1e-15));
    }
}
