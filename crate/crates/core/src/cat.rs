//! Schrödinger-cat-like states produced by conditional measurement.
//!
//! * `|χ⟩ ∝ Σ_{k≤n} L_{n−k}^k(|β|²) (−β)^k/√k! |k⟩`, the output of a Fock
//!   state `|n⟩` mixed with vacuum when `D̂(β′)|n⟩` is detected on a 50:50
//!   splitter (scheme a),
//! * its displaced twin `D̂(β)|χ⟩` from a coherent signal and Fock
//!   reference, `|n⟩` detected (scheme b),
//! * the multi-cat family `[(â†)^k − (β*)^k]^n |0⟩`.

use num_complex::Complex64 as C64;

use crate::conditional::{
    apply_conditional, y_displaced_fock, BeamSplitterParams, ReferencePrep,
};
use crate::error::{Error, Result};
use crate::fock::{
    annihilation_matrix, coherent_state, displacement_matrix_exact, fock_state, working_dim,
    FockVector, TruncationPolicy,
};
use crate::linalg::CMatrix;
use crate::poly::{assoc_laguerre_real, binomial, factorial, laguerre, ln_factorial};

/// Cat parameters. `beta` is always the amplitude appearing in the state,
/// never the measured displacement `β′`; see [`beta_from_measured`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatSpec {
    pub n: usize,
    pub beta: C64,
    /// Multiplicity of the multi-cat family, `k ≥ 1`.
    pub k: usize,
}

impl CatSpec {
    pub fn new(n: usize, beta: C64) -> Self {
        Self { n, beta, k: 1 }
    }

    pub fn multi(n: usize, beta: C64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "multiplicity must be at least 1"));
        }
        Ok(Self { n, beta, k })
    }

    /// `β = √(n/2)` on the real axis, where the two components separate.
    pub fn separated(n: usize) -> Self {
        Self::new(n, C64::new((n as f64 / 2.0).sqrt(), 0.0))
    }
}

/// `β = β′ e^{i(φ_T + φ_R + π)}`.
pub fn beta_from_measured(beta_prime: C64, bs: &BeamSplitterParams) -> C64 {
    beta_prime * C64::from_polar(1.0, bs.phi_t() + bs.phi_r() + std::f64::consts::PI)
}

/// Inverse of [`beta_from_measured`].
pub fn measured_from_beta(beta: C64, bs: &BeamSplitterParams) -> C64 {
    beta * C64::from_polar(1.0, -(bs.phi_t() + bs.phi_r() + std::f64::consts::PI))
}

/// `L_{n−k}^k(|β|²)` for `k = 0..=n`.
fn laguerre_weights(n: usize, beta: C64) -> Vec<f64> {
    let x = beta.norm_sqr();
    (0..=n).map(|k| assoc_laguerre_real(n - k, k as f64, x)).collect()
}

/// `N = Σ_k |β|^{2k}/k! L_{n−k}^k(|β|²)²` and `p = 2^{−n} e^{−|β|²} N`.
pub fn cat_norm_and_prob(spec: &CatSpec) -> (f64, f64) {
    let x = spec.beta.norm_sqr();
    let norm: f64 = laguerre_weights(spec.n, spec.beta)
        .iter()
        .enumerate()
        .map(|(k, l)| x.powi(k as i32) / factorial(k) * l * l)
        .sum();
    let p = (-(spec.n as f64) * std::f64::consts::LN_2 - x).exp() * norm;
    (norm, p)
}

fn check_support(top: usize, policy: &TruncationPolicy) -> Result<()> {
    if top > policy.cutoff() {
        return Err(Error::CutoffExceeded {
            n: top,
            cutoff: policy.cutoff(),
        });
    }
    Ok(())
}

/// Normalized `|χ⟩` from its Fock expansion. The squared norm of the
/// expansion is checked against `N` of [`cat_norm_and_prob`].
pub fn chi_state(spec: &CatSpec, policy: &TruncationPolicy) -> Result<FockVector> {
    check_support(spec.n, policy)?;
    let weights = laguerre_weights(spec.n, spec.beta);
    let mut amps = vec![C64::new(0.0, 0.0); policy.dim()];
    let mut pow = C64::new(1.0, 0.0);
    for (k, l) in weights.iter().enumerate() {
        amps[k] = pow * (*l / factorial(k).sqrt());
        pow *= -spec.beta;
    }
    let v = FockVector::from_amplitudes(amps);
    let (norm, _) = cat_norm_and_prob(spec);
    let direct = v.norm_sqr();
    if (direct - norm).abs() > 1e-9 * norm.max(1.0) {
        return Err(Error::Consistency(format!(
            "cat norm {norm} disagrees with the expansion norm {direct}"
        )));
    }
    v.normalize()
}

/// `(â − β)^n (â† + β*)^n |0⟩`, normalized. Both factors are evaluated with
/// exact ladder matrices: the vector never leaves levels `0..=n`.
pub fn chi_state_operator_route(spec: &CatSpec, policy: &TruncationPolicy) -> Result<FockVector> {
    check_support(spec.n, policy)?;
    let dim = spec.n + 1;
    let a = annihilation_matrix(dim);
    let id = CMatrix::identity(dim, dim);
    let raise = a.adjoint() + &id * spec.beta.conj();
    let lower = &a - &id * spec.beta;
    let mut v = nalgebra::DVector::from_element(dim, C64::new(0.0, 0.0));
    v[0] = C64::new(1.0, 0.0);
    for _ in 0..spec.n {
        v = &raise * v;
    }
    for _ in 0..spec.n {
        v = &lower * v;
    }
    let padded: Vec<C64> = (0..policy.dim())
        .map(|k| if k < dim { v[k] } else { C64::new(0.0, 0.0) })
        .collect();
    FockVector::from_amplitudes(padded).normalize()
}

/// `L_n[β D̂†(β) â† D̂(β)] |0⟩`, normalized, with the displaced creation
/// operator formed from explicit displacement matrices.
pub fn chi_state_displaced_route(spec: &CatSpec, policy: &TruncationPolicy) -> Result<FockVector> {
    check_support(spec.n, policy)?;
    let top = spec.n + 1;
    let w = working_dim(spec.beta.norm(), top, 0, 1e-30)?;
    let d = displacement_matrix_exact(spec.beta, w, w);
    let ad = annihilation_matrix(w).adjoint();
    let shifted = d.adjoint() * ad * &d * spec.beta;
    // L_n(X) = Σ_j C(n, j) (−X)^j / j!
    let mut term = nalgebra::DVector::from_element(w, C64::new(0.0, 0.0));
    term[0] = C64::new(1.0, 0.0);
    let mut acc = term.clone();
    for j in 1..=spec.n {
        term = &shifted * term;
        let c = binomial(spec.n, j) * if j % 2 == 0 { 1.0 } else { -1.0 } / factorial(j);
        acc += &term * C64::new(c, 0.0);
    }
    let amps: Vec<C64> = (0..policy.dim())
        .map(|k| if k <= spec.n { acc[k] } else { C64::new(0.0, 0.0) })
        .collect();
    FockVector::from_amplitudes(amps).normalize()
}

/// Output state, success probability and effective cat amplitude of a
/// conditional-generation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeOutcome {
    pub state: FockVector,
    pub probability: f64,
    pub beta: C64,
}

/// Scheme a: signal `|n⟩`, reference vacuum, `D̂(β′)|n⟩` detected. The
/// closed-form conditional operator is used.
pub fn scheme_a(
    n: usize,
    beta_prime: C64,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<SchemeOutcome> {
    let y = y_displaced_fock(0, n, C64::new(0.0, 0.0), beta_prime, bs, policy)?;
    let out = apply_conditional(&y, &fock_state(n, policy)?)?;
    Ok(SchemeOutcome {
        state: out.state,
        probability: out.probability,
        beta: beta_from_measured(beta_prime, bs),
    })
}

/// Scheme a through the two-mode oracle instead of the closed form.
pub fn scheme_a_oracle(
    n: usize,
    beta_prime: C64,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<SchemeOutcome> {
    let y = crate::oracle::oracle_y(
        &ReferencePrep::vacuum(),
        &ReferencePrep::displaced_fock(n, beta_prime),
        bs,
        policy,
    )?;
    let out = apply_conditional(&y, &fock_state(n, policy)?)?;
    Ok(SchemeOutcome {
        state: out.state,
        probability: out.probability,
        beta: beta_from_measured(beta_prime, bs),
    })
}

/// Scheme b: coherent signal `|β/T⟩`, reference `|n⟩`, `|n⟩` detected on a
/// balanced splitter. The output equals `D̂(β)|χ⟩` up to a global phase,
/// which is left in place.
pub fn scheme_b_state(spec: &CatSpec, bs: &BeamSplitterParams, policy: &TruncationPolicy) -> Result<SchemeOutcome> {
    let t = bs.t();
    if (t.norm_sqr() - 0.5).abs() > 1e-12 {
        return Err(Error::param("theta", format!("scheme b needs |T|² = 0.5, got {}", t.norm_sqr())));
    }
    let zero = C64::new(0.0, 0.0);
    let signal = coherent_state(spec.beta / t, policy)?;
    let y = y_displaced_fock(spec.n, spec.n, zero, zero, bs, policy)?;
    let out = apply_conditional(&y, &signal)?;
    Ok(SchemeOutcome {
        state: out.state,
        probability: out.probability,
        beta: spec.beta,
    })
}

/// `ln N_k` with `N_k = Σ_j C(n,j)² |β|^{2k(n−j)} (kj)!`.
pub fn multi_cat_ln_norm(spec: &CatSpec) -> f64 {
    let ln_b2 = spec.beta.norm_sqr().ln();
    let terms: Vec<f64> = (0..=spec.n)
        .filter_map(|j| {
            let pow = spec.k * (spec.n - j);
            if pow > 0 && spec.beta.norm_sqr() == 0.0 {
                return None;
            }
            let ln_pow = if pow == 0 { 0.0 } else { pow as f64 * ln_b2 };
            Some(2.0 * binomial(spec.n, j).ln() + ln_pow + ln_factorial(spec.k * j))
        })
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

pub fn multi_cat_norm(spec: &CatSpec) -> f64 {
    multi_cat_ln_norm(spec).exp()
}

/// `N_k^{−1/2} [(â†)^k − (β*)^k]^n |0⟩`, expanded binomially with amplitudes
/// accumulated in log space.
pub fn multi_cat_state(spec: &CatSpec, policy: &TruncationPolicy) -> Result<FockVector> {
    if spec.k == 0 {
        return Err(Error::param("k", "multiplicity must be at least 1"));
    }
    let top = spec.k * spec.n;
    if top > policy.cutoff() / 2 {
        return Err(Error::CutoffExceeded {
            n: top,
            cutoff: policy.cutoff() / 2,
        });
    }
    let ln_norm = multi_cat_ln_norm(spec);
    let b = spec.beta.conj().powu(spec.k as u32);
    let mut amps = vec![C64::new(0.0, 0.0); policy.dim()];
    for j in 0..=spec.n {
        let pow = spec.n - j;
        // C(n,j) (−β*^k)^{n−j} √((kj)!)
        let mag_ln = binomial(spec.n, j).ln() + 0.5 * ln_factorial(spec.k * j) - 0.5 * ln_norm;
        let phase = if pow == 0 {
            C64::new(1.0, 0.0)
        } else if b.norm() == 0.0 {
            continue;
        } else {
            C64::from_polar(1.0, pow as f64 * (-b).arg())
        };
        let ln_b = if pow == 0 { 0.0 } else { pow as f64 * b.norm().ln() };
        amps[spec.k * j] = phase * (mag_ln + ln_b).exp();
    }
    let v = FockVector::from_amplitudes(amps);
    let direct = v.norm_sqr();
    if (direct - 1.0).abs() > 1e-9 {
        return Err(Error::Consistency(format!(
            "multi-cat normalization off: direct norm² {direct}"
        )));
    }
    Ok(v)
}

/// `(1/πN) |L_n[β(α* + β*)]|² e^{−|α|²}`.
pub fn husimi_chi_value(spec: &CatSpec, alpha: C64) -> f64 {
    let (norm, _) = cat_norm_and_prob(spec);
    let l = laguerre(spec.n, spec.beta * (alpha.conj() + spec.beta.conj()));
    l.norm_sqr() * (-alpha.norm_sqr()).exp() / (std::f64::consts::PI * norm)
}

/// `(1/πN_k) |α^k − β^k|^{2n} e^{−|α|²}`.
pub fn husimi_multi_cat_value(spec: &CatSpec, alpha: C64) -> f64 {
    let d = alpha.powu(spec.k as u32) - spec.beta.powu(spec.k as u32);
    if d.norm() == 0.0 {
        return if spec.n == 0 { (-alpha.norm_sqr()).exp() / std::f64::consts::PI } else { 0.0 };
    }
    let ln = 2.0 * spec.n as f64 * d.norm().ln() - alpha.norm_sqr() - multi_cat_ln_norm(spec);
    ln.exp() / std::f64::consts::PI
}
