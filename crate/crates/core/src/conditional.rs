//! Closed-form conditional beam-splitter operator `Ŷ = ⟨Ψ_out2|Û|Ψ_in2⟩`
//! acting on the signal mode, and its application to signal states.
//!
//! For references `D̂(α)F(â†)|0⟩` (input) and `D̂(β)G(â†)|0⟩` (measured),
//!
//! ```text
//! Ŷ = D̂((α−Tβ)/R*) · Σ_{m,n} f_m g_n* R^m (−R*/T)^n {(â†)^m â^n}_s · T^n̂ · D̂((β−T*α)/R*)
//! ```
//!
//! with `s = 2/|R|² − 1`. The displacements can be large (`∝ 1/|R|`), so the
//! product is formed in a padded working space built from exact matrix
//! elements and then restricted to the cutoff; every returned element is
//! accurate, not only the safe block.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    attenuation_op, displacement_matrix_exact, working_dim, FockOperator, FockVector,
    TruncationPolicy,
};
use crate::linalg::{rel_frobenius_on_block, CMatrix};
use crate::ordering::s_ordered_matrix;
use crate::poly::factorial;

/// Below this `|R|²` the closed form is cross-checked against the oracle.
pub const CONDITIONING_THRESHOLD: f64 = 0.05;

/// Probability mass of a displaced Fock column allowed to fall outside the
/// working space.
const WORKING_TAIL: f64 = 1e-26;

const DEGENERATE: f64 = 1e-12;

/// Lossless beam splitter, `T = e^{iφ_T} cos θ`, `R = e^{iφ_R} sin θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterParams {
    theta: f64,
    phi_t: f64,
    phi_r: f64,
}

impl BeamSplitterParams {
    pub fn from_angles(theta: f64, phi_t: f64, phi_r: f64) -> Result<Self> {
        for (name, v) in [("theta", theta), ("phi_T", phi_t), ("phi_R", phi_r)] {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        Ok(Self { theta, phi_t, phi_r })
    }

    /// 50:50 splitter with real positive `T` and `R`.
    pub fn balanced() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_4,
            phi_t: 0.0,
            phi_r: 0.0,
        }
    }

    /// From complex transmittance and reflectance with `|T|² + |R|² = 1`.
    pub fn from_tr(t: C64, r: C64) -> Result<Self> {
        let total = t.norm_sqr() + r.norm_sqr();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("T/R", format!("|T|² + |R|² = {total}, expected 1")));
        }
        Ok(Self {
            theta: r.norm().atan2(t.norm()),
            phi_t: t.arg(),
            phi_r: r.arg(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi_t(&self) -> f64 {
        self.phi_t
    }

    pub fn phi_r(&self) -> f64 {
        self.phi_r
    }

    pub fn t(&self) -> C64 {
        C64::from_polar(self.theta.cos(), self.phi_t)
    }

    pub fn r(&self) -> C64 {
        C64::from_polar(self.theta.sin(), self.phi_r)
    }

    /// Ordering parameter `s = 2/|R|² − 1` (infinite for `R = 0`).
    pub fn s(&self) -> f64 {
        2.0 / self.r().norm_sqr() - 1.0
    }

    pub(crate) fn require_closed_form(&self) -> Result<()> {
        let (t_abs, r_abs) = (self.t().norm(), self.r().norm());
        if t_abs < DEGENERATE || r_abs < DEGENERATE {
            return Err(Error::DegenerateBeamSplitter { t_abs, r_abs });
        }
        Ok(())
    }
}

/// `F(â†) = Σ_k c_k (â†)^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPolynomial {
    coeffs: Vec<C64>,
}

impl OperatorPolynomial {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::param("coeffs", "coefficients must be finite"));
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `(â†)^m / √m!`, which creates `|m⟩` from the vacuum.
    pub fn fock(m: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); m + 1];
        coeffs[m] = C64::new(1.0 / factorial(m).sqrt(), 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `‖F(â†)|0⟩‖² = Σ_k |c_k|² k!`.
    pub fn vacuum_norm_sqr(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * factorial(k))
            .sum()
    }

    /// Rescaled so that `F(â†)|0⟩` is a unit vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.vacuum_norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroProbability(0.0));
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|c| c / n).collect(),
        })
    }

    /// Amplitudes `c_k √k!` of `F(â†)|0⟩`.
    pub fn vacuum_amplitudes(&self) -> Vec<C64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * factorial(k).sqrt())
            .collect()
    }
}

/// Reference-mode preparation or measured state `D̂(displacement) F(â†)|0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePrep {
    pub poly: OperatorPolynomial,
    pub displacement: C64,
}

impl ReferencePrep {
    pub fn new(poly: OperatorPolynomial, displacement: C64) -> Self {
        Self { poly, displacement }
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    pub fn fock(n: usize) -> Self {
        Self::new(OperatorPolynomial::fock(n), C64::new(0.0, 0.0))
    }

    pub fn displaced_fock(n: usize, displacement: C64) -> Self {
        Self::new(OperatorPolynomial::fock(n), displacement)
    }

    pub fn coherent(alpha: C64) -> Self {
        Self::displaced_fock(0, alpha)
    }

    /// The represented vector in the truncated space, built from exact
    /// displacement elements. A displaced preparation fails when more than
    /// `tail_tol` of its probability sits in, or beyond, the top 10% of
    /// levels; an undisplaced one is exact whenever its degree fits.
    pub fn state(&self, policy: &TruncationPolicy) -> Result<FockVector> {
        let deg = self.poly.degree();
        if deg > policy.cutoff() {
            return Err(Error::CutoffExceeded {
                n: deg,
                cutoff: policy.cutoff(),
            });
        }
        let src = self.poly.vacuum_amplitudes();
        let d = displacement_matrix_exact(self.displacement, policy.dim(), deg + 1);
        let amps: Vec<C64> = (0..policy.dim())
            .map(|p| (0..=deg).map(|q| d[(p, q)] * src[q]).sum())
            .collect();
        if self.displacement == C64::new(0.0, 0.0) {
            return Ok(FockVector::from_amplitudes(amps));
        }
        let full = self.poly.vacuum_norm_sqr();
        let below: f64 = amps[..policy.tail_start()].iter().map(|a| a.norm_sqr()).sum();
        let tail = ((full - below) / full).max(0.0);
        if tail > policy.tail_tol() {
            return Err(Error::Truncation {
                what: "reference state",
                measured: tail,
                limit: policy.tail_tol(),
            });
        }
        Ok(FockVector::from_amplitudes(amps))
    }
}

/// Term `coeff · {(â†)^m â^n}_s` of the s-ordered kernel.
pub(crate) type KernelTerm = (usize, usize, C64);

pub(crate) fn y_core(
    terms: &[KernelTerm],
    alpha: C64,
    beta: C64,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<FockOperator> {
    let (t, r, s) = (bs.t(), bs.r(), bs.s());
    let left = (alpha - t * beta) / r.conj();
    let right = (beta - t.conj() * alpha) / r.conj();
    let dim = policy.dim();
    let raise = terms.iter().map(|&(m, _, _)| m).max().unwrap_or(0);
    let w = working_dim(right.norm(), policy.cutoff(), 0, WORKING_TAIL)? + raise;

    let mut kernel = CMatrix::zeros(w, w);
    for &(m, n, c) in terms {
        kernel += s_ordered_matrix(m, n, s, w) * c;
    }
    for q in 0..w {
        let tq = t.powu(q as u32);
        for e in kernel.column_mut(q).iter_mut() {
            *e *= tq;
        }
    }
    let d_right = displacement_matrix_exact(right, w, dim);
    let d_left = displacement_matrix_exact(left, dim, w);
    FockOperator::from_matrix(d_left * (kernel * d_right))
}

fn guard(
    y: FockOperator,
    prep_in: impl FnOnce() -> ReferencePrep,
    prep_out: impl FnOnce() -> ReferencePrep,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<FockOperator> {
    let r2 = bs.r().norm_sqr();
    if r2 >= CONDITIONING_THRESHOLD {
        return Ok(y);
    }
    log::warn!("|R|² = {r2:.3e} is below {CONDITIONING_THRESHOLD}; cross-checking the closed form against the two-mode oracle");
    let reference = crate::oracle::oracle_y(&prep_in(), &prep_out(), bs, policy)?;
    let d = rel_frobenius_on_block(y.matrix(), reference.matrix(), policy.safe_levels());
    if d > 1e-8 {
        return Err(Error::IllConditioned(d));
    }
    Ok(y)
}

fn check_degrees(total: usize, limit: usize) -> Result<()> {
    if total > limit {
        Err(Error::CutoffExceeded { n: total, cutoff: limit })
    } else {
        Ok(())
    }
}

/// `R^m (−R*)^n / (T^n √(m! n!))`.
pub(crate) fn fock_term_coeff(m: usize, n: usize, bs: &BeamSplitterParams) -> C64 {
    let (t, r) = (bs.t(), bs.r());
    r.powu(m as u32) * (-r.conj()).powu(n as u32) / (t.powu(n as u32) * (factorial(m) * factorial(n)).sqrt())
}

/// `Ŷ` for the displaced Fock reference `D̂(α)|m⟩` and the measured displaced
/// Fock state `D̂(β)|n⟩`.
pub fn y_displaced_fock(
    m: usize,
    n: usize,
    alpha: C64,
    beta: C64,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<FockOperator> {
    bs.require_closed_form()?;
    check_degrees(m.max(n), policy.cutoff() / 4)?;
    let y = y_core(&[(m, n, fock_term_coeff(m, n, bs))], alpha, beta, bs, policy)?;
    guard(
        y,
        || ReferencePrep::displaced_fock(m, alpha),
        || ReferencePrep::displaced_fock(n, beta),
        bs,
        policy,
    )
}

fn general_terms(f: &OperatorPolynomial, g: &OperatorPolynomial, bs: &BeamSplitterParams) -> Vec<KernelTerm> {
    let (t, r) = (bs.t(), bs.r());
    let x = -r.conj() / t;
    let mut terms = Vec::new();
    for (m, fm) in f.coeffs().iter().enumerate() {
        for (n, gn) in g.coeffs().iter().enumerate() {
            let c = fm * gn.conj() * r.powu(m as u32) * x.powu(n as u32);
            if c != C64::new(0.0, 0.0) {
                terms.push((m, n, c));
            }
        }
    }
    terms
}

/// `Ŷ` for undisplaced references `F(â†)|0⟩` (input) and `G(â†)|0⟩`
/// (measured).
pub fn y_general(
    f: &OperatorPolynomial,
    g: &OperatorPolynomial,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<FockOperator> {
    bs.require_closed_form()?;
    check_degrees(f.degree() + g.degree(), policy.cutoff() / 2)?;
    let zero = C64::new(0.0, 0.0);
    let terms = general_terms(f, g, bs);
    if terms.is_empty() {
        return FockOperator::from_matrix(CMatrix::zeros(policy.dim(), policy.dim()));
    }
    let y = y_core(&terms, zero, zero, bs, policy)?;
    guard(
        y,
        || ReferencePrep::new(f.clone(), zero),
        || ReferencePrep::new(g.clone(), zero),
        bs,
        policy,
    )
}

/// `Ŷ` for displaced references `D̂(α)F(â†)|0⟩` and `D̂(β)G(â†)|0⟩`.
pub fn y_displaced_general(
    prep: &ReferencePrep,
    meas: &ReferencePrep,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<FockOperator> {
    bs.require_closed_form()?;
    check_degrees(prep.poly.degree() + meas.poly.degree(), policy.cutoff() / 2)?;
    let terms = general_terms(&prep.poly, &meas.poly, bs);
    if terms.is_empty() {
        return FockOperator::from_matrix(CMatrix::zeros(policy.dim(), policy.dim()));
    }
    let y = y_core(&terms, prep.displacement, meas.displacement, bs, policy)?;
    guard(y, || prep.clone(), || meas.clone(), bs, policy)
}

/// Normalized conditional output and its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalOutcome {
    pub state: FockVector,
    pub probability: f64,
}

/// `p = ‖Ŷ|ψ⟩‖²`, `|ψ_out⟩ = Ŷ|ψ⟩/√p`.
pub fn apply_conditional(y: &FockOperator, psi_in: &FockVector) -> Result<ConditionalOutcome> {
    let n2 = psi_in.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n2.sqrt()));
    }
    let out = y.apply(psi_in)?;
    let norm = out.norm();
    if norm < 1e-14 {
        return Err(Error::ZeroProbability(norm * norm));
    }
    let probability = norm * norm;
    if probability > 1.0 + 1e-9 {
        return Err(Error::Consistency(format!(
            "conditional probability {probability} exceeds one"
        )));
    }
    Ok(ConditionalOutcome {
        state: out.normalize()?,
        probability,
    })
}

/// `T^n̂`, the conditional operator for vacuum in and vacuum detected.
pub fn vacuum_conditional(bs: &BeamSplitterParams, policy: &TruncationPolicy) -> Result<FockOperator> {
    attenuation_op(bs.t(), policy)
}
