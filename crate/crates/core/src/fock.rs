//! Truncated single-mode Fock space: states, ladder and diagonal operators,
//! displacement, attenuation and quadrature eigenstates.
//!
//! Every object lives in the span of `|0⟩ … |N_c⟩`. Identities that hold only
//! in infinite dimension are expected to hold on the *safe block*, the lowest
//! `⌈N_c/2⌉` levels, see [`TruncationPolicy::safe_levels`].

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, CMatrix};
use crate::poly::{assoc_laguerre_real, assoc_laguerre_sequence, hermite_functions, ln_factorial};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Cutoff and tail tolerance shared by every constructor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    cutoff: usize,
    tail_tol: f64,
}

impl TruncationPolicy {
    pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
    pub const MIN_CUTOFF: usize = 8;

    pub fn new(cutoff: usize, tail_tol: f64) -> Result<Self> {
        if cutoff < Self::MIN_CUTOFF {
            return Err(Error::param(
                "cutoff",
                format!("must be at least {}, got {cutoff}", Self::MIN_CUTOFF),
            ));
        }
        if !(tail_tol > 0.0 && tail_tol.is_finite()) {
            return Err(Error::param("tail_tol", format!("must be positive, got {tail_tol}")));
        }
        Ok(Self { cutoff, tail_tol })
    }

    pub fn with_cutoff(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, Self::DEFAULT_TAIL_TOL)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Number of levels in the safe block, `⌈N_c/2⌉`.
    pub fn safe_levels(&self) -> usize {
        self.cutoff.div_ceil(2)
    }

    /// First level of the top 10% of the retained levels.
    pub fn tail_start(&self) -> usize {
        self.dim() - self.dim().div_ceil(10)
    }
}

/// Pure single-mode state (possibly unnormalized) over `|0⟩ … |N_c⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
}

impl FockVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "a Fock vector needs at least the vacuum level");
        Self {
            amps: DVector::from_vec(amps),
        }
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        assert!(!amps.is_empty());
        Self { amps }
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self {
            amps: DVector::zeros(cutoff + 1),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroProbability(n * n));
        }
        Ok(Self {
            amps: &self.amps / C64::new(n, 0.0),
        })
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        check_cutoffs(self.cutoff(), other.cutoff())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|⟨a|b⟩| / (‖a‖ ‖b‖)`.
    pub fn fidelity(&self, other: &FockVector) -> Result<f64> {
        let ip = self.inner(other)?;
        Ok(ip.norm() / (self.norm() * other.norm()))
    }

    /// Probability mass on levels `from..=N_c`.
    pub fn tail_mass(&self, from: usize) -> f64 {
        self.amps.iter().skip(from).map(|a| a.norm_sqr()).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        let w: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| k as f64 * a.norm_sqr())
            .sum();
        w / self.norm_sqr()
    }

    /// Zero-padded or truncated copy at another cutoff.
    pub fn resized(&self, cutoff: usize) -> Self {
        let mut out = DVector::zeros(cutoff + 1);
        let n = out.len().min(self.amps.len());
        out.rows_mut(0, n).copy_from(&self.amps.rows(0, n));
        Self { amps: out }
    }
}

/// Square complex matrix over the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    mat: CMatrix,
}

impl FockOperator {
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::param(
                "matrix",
                format!("must be square and non-empty, got {}x{}", mat.nrows(), mat.ncols()),
            ));
        }
        Ok(Self { mat })
    }

    pub fn identity(cutoff: usize) -> Self {
        Self {
            mat: CMatrix::identity(cutoff + 1, cutoff + 1),
        }
    }

    pub fn from_diagonal(cutoff: usize, f: impl Fn(usize) -> C64) -> Self {
        let diag = DVector::from_fn(cutoff + 1, |k, _| f(k));
        Self {
            mat: CMatrix::from_diagonal(&diag),
        }
    }

    /// `â` with `â[k−1, k] = √k`.
    pub fn annihilation(cutoff: usize) -> Self {
        Self {
            mat: annihilation_matrix(cutoff + 1),
        }
    }

    pub fn creation(cutoff: usize) -> Self {
        Self {
            mat: annihilation_matrix(cutoff + 1).transpose(),
        }
    }

    pub fn number(cutoff: usize) -> Self {
        Self::from_diagonal(cutoff, |k| C64::new(k as f64, 0.0))
    }

    pub fn cutoff(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        check_cutoffs(self.cutoff(), v.cutoff())?;
        Ok(FockVector::from_dvector(&self.mat * &v.amps))
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &FockOperator) -> Result<FockOperator> {
        check_cutoffs(self.cutoff(), rhs.cutoff())?;
        Ok(Self {
            mat: &self.mat * &rhs.mat,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { mat: &self.mat * c }
    }

    /// Relative Frobenius distance to `reference` on the lowest `levels` levels.
    pub fn rel_diff_on_block(&self, reference: &FockOperator, levels: usize) -> f64 {
        crate::linalg::rel_frobenius_on_block(&self.mat, &reference.mat, levels)
    }

    /// Largest singular value of the leading `levels × levels` block.
    pub fn spectral_norm_on_block(&self, levels: usize) -> f64 {
        let b = crate::linalg::leading_block(&self.mat, levels);
        b.singular_values().iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn annihilation_matrix(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    m
}

pub(crate) fn check_cutoffs(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(Error::CutoffMismatch { left, right })
    } else {
        Ok(())
    }
}

pub fn fock_state(n: usize, policy: &TruncationPolicy) -> Result<FockVector> {
    if n > policy.cutoff() {
        return Err(Error::CutoffExceeded {
            n,
            cutoff: policy.cutoff(),
        });
    }
    let mut v = FockVector::zeros(policy.cutoff());
    v.amps[n] = ONE;
    Ok(v)
}

/// `Σ_{k ≥ from} e^{−μ} μ^k / k!`, summed directly so that tiny tails are
/// resolved.
pub fn poisson_tail(mean: f64, from: usize) -> f64 {
    if from == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut acc = 0.0;
    let mut k = from;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_factorial(k)).exp();
        acc += term;
        if (k as f64 > mean && term <= 1e-18 * acc) || term == 0.0 && k as f64 > mean {
            break;
        }
        k += 1;
    }
    acc
}

fn check_coherent_tail(alpha: C64, policy: &TruncationPolicy, what: &'static str) -> Result<()> {
    let tail = poisson_tail(alpha.norm_sqr(), policy.tail_start());
    if tail > policy.tail_tol() {
        return Err(Error::Truncation {
            what,
            measured: tail,
            limit: policy.tail_tol(),
        });
    }
    Ok(())
}

/// Coherent state `|α⟩`, renormalized after truncation.
pub fn coherent_state(alpha: C64, policy: &TruncationPolicy) -> Result<FockVector> {
    check_coherent_tail(alpha, policy, "coherent state")?;
    let v = FockVector::from_amplitudes(coherent_amplitudes(alpha, policy.cutoff()));
    v.normalize()
}

/// Untruncated-normalization amplitudes `e^{−|α|²/2} α^k / √k!`.
pub(crate) fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut cur = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(cur);
    for k in 1..=cutoff {
        cur = cur * alpha / (k as f64).sqrt();
        amps.push(cur);
    }
    amps
}

/// `D̂(α) = exp(αâ† − α*â)` as the exponential of the truncated generator.
///
/// The result is exactly unitary in the truncated space; its matrix elements
/// agree with the infinite-dimensional ones on the safe block. Use
/// [`displacement_matrix_exact`] when exact elements up to the cutoff matter.
pub fn displacement_op(alpha: C64, policy: &TruncationPolicy) -> Result<FockOperator> {
    check_coherent_tail(alpha, policy, "displacement")?;
    let dim = policy.dim();
    if alpha == ZERO {
        return Ok(FockOperator::identity(policy.cutoff()));
    }
    let a = annihilation_matrix(dim);
    let adag = a.adjoint();
    // D = exp(G), G anti-Hermitian, so D = exp(−i·(iG)) with iG Hermitian
    let g = &adag * alpha - &a * alpha.conj();
    let h = &g * C64::new(0.0, 1.0);
    Ok(FockOperator {
        mat: exp_i_hermitian(&h, -1.0),
    })
}

/// `⟨p|D̂(α)|q⟩` from the associated-Laguerre closed form.
pub fn displacement_element(alpha: C64, p: usize, q: usize) -> C64 {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return if p == q { ONE } else { ZERO };
    }
    let (lo, hi) = (p.min(q), p.max(q));
    let d = hi - lo;
    let lag = assoc_laguerre_real(lo, d as f64, x);
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + d as f64 * alpha.norm().ln() - 0.5 * x;
    let base = if p >= q { alpha } else { -alpha.conj() };
    C64::from_polar(ln_mag.exp() * lag, d as f64 * base.arg())
}

/// Exact matrix elements `⟨p|D̂(α)|q⟩` for `p < rows`, `q < cols`.
pub fn displacement_matrix_exact(alpha: C64, rows: usize, cols: usize) -> CMatrix {
    let x = alpha.norm_sqr();
    let mut m = CMatrix::zeros(rows, cols);
    if x == 0.0 {
        for k in 0..rows.min(cols) {
            m[(k, k)] = ONE;
        }
        return m;
    }
    let ln_r = alpha.norm().ln();
    let lnf: Vec<f64> = (0..rows.max(cols)).map(ln_factorial).collect();
    let arg_lower = alpha.arg();
    let arg_upper = (-alpha.conj()).arg();
    // one Laguerre sequence per diagonal offset d = |p − q|
    let dmax = rows.max(cols);
    for d in 0..dmax {
        let below = rows.saturating_sub(d).min(cols); // p = q + d, q < below
        let above = cols.saturating_sub(d).min(rows); // q = p + d, p < above
        let len = below.max(above);
        if len == 0 {
            continue;
        }
        let lag = assoc_laguerre_sequence(len - 1, d as f64, x);
        let ln_pow = d as f64 * ln_r - 0.5 * x;
        for lo in 0..len {
            let ln_mag = 0.5 * (lnf[lo] - lnf[lo + d]) + ln_pow;
            let mag = ln_mag.exp() * lag[lo];
            if lo < below {
                m[(lo + d, lo)] = C64::from_polar(mag, d as f64 * arg_lower);
            }
            if d > 0 && lo < above {
                m[(lo, lo + d)] = C64::from_polar(mag, d as f64 * arg_upper);
            }
        }
    }
    m
}

/// Probability mass of `D̂(α)|k⟩` on levels above `above`, with `r = |α|`.
pub fn displaced_fock_tail(r: f64, k: usize, above: usize) -> f64 {
    if r == 0.0 {
        return if k > above { 1.0 } else { 0.0 };
    }
    let alpha = C64::new(r, 0.0);
    let turning = ((k as f64).sqrt() + r).powi(2);
    let mut acc = 0.0;
    let mut p = above + 1;
    loop {
        let term = displacement_element(alpha, p, k).norm_sqr();
        acc += term;
        if p as f64 > turning + 10.0 && term <= 1e-20 * acc.max(f64::MIN_POSITIVE) {
            break;
        }
        if p > above + 100_000 {
            break;
        }
        p += 1;
    }
    acc
}

/// Smallest working dimension `W > cutoff` such that `D̂(α)|cutoff⟩` leaks less
/// than `tol` above `W − 1`.
pub(crate) fn working_dim(r: f64, cutoff: usize, extra: usize, tol: f64) -> Result<usize> {
    let limit = 8 * cutoff + 256;
    let mut top = cutoff + extra + 4;
    loop {
        let tail = displaced_fock_tail(r, cutoff + extra, top);
        if tail <= tol {
            return Ok(top + 1);
        }
        if top >= limit {
            return Err(Error::Truncation {
                what: "displacement working space",
                measured: tail,
                limit: tol,
            });
        }
        top = (top + (top / 8).max(8)).min(limit);
    }
}

/// `T^n̂` for `0 < |T| ≤ 1`.
pub fn attenuation_op(t: C64, policy: &TruncationPolicy) -> Result<FockOperator> {
    if t == ZERO {
        return Err(Error::DegenerateTransmittance);
    }
    if t.norm() > 1.0 + 1e-12 {
        return Err(Error::param("T", format!("|T| must not exceed 1, got {}", t.norm())));
    }
    Ok(FockOperator::from_diagonal(policy.cutoff(), |k| t.powu(k as u32)))
}

/// Largest admissible `|x|` for a quadrature eigenstate: the classical turning
/// point of the first level in the top 10%. Beyond it every retained level is
/// in its evanescent region and the truncated series carries no information.
pub fn quadrature_limit(policy: &TruncationPolicy) -> f64 {
    (2.0 * policy.tail_start() as f64 + 1.0).sqrt()
}

/// Truncated quadrature eigenstate `|x, φ⟩` with amplitudes
/// `π^{−1/4} e^{−x²/2} e^{ikφ} H_k(x) / √(2^k k!)`.
pub fn quadrature_state(x: f64, phi: f64, policy: &TruncationPolicy) -> Result<FockVector> {
    let limit = quadrature_limit(policy);
    if !x.is_finite() || x.abs() > limit {
        return Err(Error::Truncation {
            what: "quadrature state",
            measured: x.abs(),
            limit,
        });
    }
    let psi = hermite_functions(policy.cutoff(), x);
    Ok(FockVector::from_amplitudes(
        psi.iter()
            .enumerate()
            .map(|(k, h)| C64::from_polar(*h, k as f64 * phi))
            .collect(),
    ))
}

/// Wavefunction `⟨x, φ|ψ⟩`. Exact for any truncated `ψ`, so no range limit
/// applies.
pub fn wavefunction(state: &FockVector, x: f64, phi: f64) -> C64 {
    let psi = hermite_functions(state.cutoff(), x);
    state
        .amps()
        .iter()
        .zip(psi)
        .enumerate()
        .map(|(k, (c, h))| *c * C64::from_polar(h, -(k as f64) * phi))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{leading_block, max_abs};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn policy(c: usize) -> TruncationPolicy {
        TruncationPolicy::with_cutoff(c).unwrap()
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (inner + 0.5 * (f(a) + f(b)))
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::with_cutoff(7).is_err());
        assert!(TruncationPolicy::new(16, 0.0).is_err());
        let p = policy(48);
        assert_eq!(p.safe_levels(), 24);
        assert_eq!(p.tail_start(), 44);
    }

    #[test]
    fn fock_states() {
        let p = policy(16);
        let v0 = fock_state(0, &p).unwrap();
        assert_eq!(v0.amps()[0], ONE);
        assert!(v0.amps()[1..].iter().all(|a| *a == ZERO));
        let v2 = fock_state(2, &p).unwrap();
        assert_eq!(v2.amps()[2], ONE);
        let ip = fock_state(3, &p).unwrap().inner(&fock_state(5, &p).unwrap()).unwrap();
        assert_eq!(ip, ZERO);
        assert_eq!(
            fock_state(17, &p),
            Err(Error::CutoffExceeded { n: 17, cutoff: 16 })
        );
    }

    #[test]
    fn coherent_states() {
        let p = policy(32);
        assert_eq!(coherent_state(ZERO, &p).unwrap(), fock_state(0, &p).unwrap());
        let c = coherent_state(C64::new(1.0, 0.0), &p).unwrap();
        assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
        let ratio = (c.amps()[2] / c.amps()[0]).norm();
        assert!((ratio - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(matches!(
            coherent_state(C64::new(5.0, 0.0), &p),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn ladder_commutator_below_cutoff() {
        let c = 20;
        let a = FockOperator::annihilation(c);
        let ad = FockOperator::creation(c);
        let comm = a.compose(&ad).unwrap().matrix() - ad.compose(&a).unwrap().matrix();
        let block = leading_block(&comm, c);
        assert!(max_abs(&(block - CMatrix::identity(c, c))) < 1e-14);
        let n = FockOperator::number(c);
        let v = n.apply(&fock_state(3, &policy(c)).unwrap()).unwrap();
        assert_eq!(v.amps()[3], C64::new(3.0, 0.0));
    }

    #[test]
    fn vector_plumbing() {
        let p = policy(10);
        let u = FockVector::from_amplitudes((0..11).map(|k| C64::new(k as f64, 0.5)).collect());
        let v = FockVector::from_amplitudes((0..11).map(|k| C64::new(1.0, -(k as f64))).collect());
        assert_eq!(u.inner(&v).unwrap(), v.inner(&u).unwrap().conj());
        for k in 0..=10 {
            assert_eq!(fock_state(k, &p).unwrap().norm(), 1.0);
        }
        let w = FockVector::zeros(12);
        assert_eq!(u.inner(&w), Err(Error::CutoffMismatch { left: 10, right: 12 }));
        assert!(FockOperator::identity(10).apply(&w).is_err());
        assert!(w.normalize().is_err());
    }

    #[test]
    fn displacement_identity_and_inverse() {
        let p = policy(32);
        let d0 = displacement_op(ZERO, &p).unwrap();
        assert_eq!(d0, FockOperator::identity(32));
        let alpha = C64::new(0.9, -0.4);
        let d = displacement_op(alpha, &p).unwrap();
        let dinv = displacement_op(-alpha, &p).unwrap();
        let prod = leading_block(d.compose(&dinv).unwrap().matrix(), p.safe_levels());
        assert!(max_abs(&(prod - CMatrix::identity(16, 16))) < 1e-10);
        // D|0⟩ = |α⟩
        let col = d.apply(&fock_state(0, &p).unwrap()).unwrap();
        let coh = coherent_state(alpha, &p).unwrap();
        assert!((col.fidelity(&coh).unwrap() - 1.0).abs() < 1e-12);
        assert!(col.amps().iter().zip(coh.amps()).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn displacement_unitary_on_central_block() {
        for cutoff in [32, 48] {
            let p = policy(cutoff);
            for alpha in [C64::new(2.0, 0.0), C64::new(-1.1, 1.6), C64::new(0.0, 0.5)] {
                let d = displacement_op(alpha, &p).unwrap();
                let dd = d.adjoint().compose(&d).unwrap();
                let k = p.safe_levels() + 1;
                let b = leading_block(dd.matrix(), k);
                assert!(max_abs(&(b - CMatrix::identity(k, k))) < 1e-10);
            }
        }
    }

    #[test]
    fn displacement_conjugates_number_operator() {
        // D†(α) n̂ D(α) = (â† + α*)(â + α)
        let p = policy(40);
        let alpha = C64::new(0.7, 0.2);
        let d = displacement_op(alpha, &p).unwrap();
        let n = FockOperator::number(40);
        let lhs = d.adjoint().compose(&n).unwrap().compose(&d).unwrap();
        let a = annihilation_matrix(41);
        let id = CMatrix::identity(41, 41);
        let shifted = (a.adjoint() + &id * alpha.conj()) * (a + &id * alpha);
        let k = p.safe_levels();
        assert!(max_abs(&(leading_block(lhs.matrix(), k) - leading_block(&shifted, k))) < 1e-10);
    }

    #[test]
    fn exact_elements_agree_with_exponential() {
        let p = policy(96);
        let alpha = C64::new(-1.3, 0.8);
        let expm = displacement_op(alpha, &p).unwrap();
        let exact = displacement_matrix_exact(alpha, 97, 97);
        let k = p.safe_levels();
        assert!(max_abs(&(leading_block(expm.matrix(), k) - leading_block(&exact, k))) < 1e-10);
        assert_eq!(exact[(5, 2)], displacement_element(alpha, 5, 2));
        assert!((exact[(2, 7)] - displacement_element(alpha, 2, 7)).norm() < 1e-15);
        // column norms of the exact elements reach one only with the full tail
        let col = exact.column(10).norm_squared() + displaced_fock_tail(alpha.norm(), 10, 96);
        assert!((col - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attenuation() {
        let p = policy(16);
        assert_eq!(attenuation_op(ONE, &p).unwrap(), FockOperator::identity(16));
        let t = C64::new(0.0, FRAC_1_SQRT_2);
        let op = attenuation_op(t, &p).unwrap();
        assert!((op.matrix()[(3, 3)] - t * t * t).norm() < 1e-15);
        assert_eq!(attenuation_op(ZERO, &p), Err(Error::DegenerateTransmittance));
        // T^n̂|α⟩ = e^{−|α|²(1−|T|²)/2} |Tα⟩
        let p = policy(32);
        let t = C64::new(FRAC_1_SQRT_2, 0.0);
        let alpha = ONE;
        let lhs = attenuation_op(t, &p)
            .unwrap()
            .apply(&coherent_state(alpha, &p).unwrap())
            .unwrap();
        let factor = (-alpha.norm_sqr() * (1.0 - t.norm_sqr()) / 2.0).exp();
        let rhs = coherent_state(t * alpha, &p).unwrap();
        for (l, r) in lhs.amps().iter().zip(rhs.amps()) {
            assert!((l - r * factor).norm() < 1e-10);
        }
    }

    #[test]
    fn quadrature_states() {
        let p = policy(32);
        let x = 0.6;
        let q = quadrature_state(x, 0.0, &p).unwrap();
        let ip = q.inner(&fock_state(0, &p).unwrap()).unwrap();
        assert!((ip.re - PI.powf(-0.25) * (-x * x / 2.0).exp()).abs() < 1e-15);
        assert_eq!(quadrature_state(0.0, 0.0, &p).unwrap().amps()[1], ZERO);
        assert!(quadrature_state(9.0, 0.0, &p).is_err());
    }

    #[test]
    fn quadrature_normalization_of_coherent_state() {
        let p = policy(32);
        let c = coherent_state(ONE, &p).unwrap();
        let total = trapezoid(|x| wavefunction(&c, x, 0.0).norm_sqr(), -9.0, 9.0, 1800);
        assert!((total - 1.0).abs() < 1e-6);
        // the overlap with |x,0⟩ is the same number through either route
        let via_state = quadrature_state(0.4, 0.0, &p).unwrap().inner(&c).unwrap();
        assert!((via_state - wavefunction(&c, 0.4, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hermite_function_orthogonality() {
        let p = policy(16);
        for k in 0..=6 {
            for l in 0..=6 {
                let fk = fock_state(k, &p).unwrap();
                let fl = fock_state(l, &p).unwrap();
                let v = trapezoid(
                    |x| (wavefunction(&fk, x, 0.3).conj() * wavefunction(&fl, x, 0.3)).re,
                    -10.0,
                    10.0,
                    2000,
                );
                let expect = if k == l { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-6, "k={k} l={l} v={v}");
            }
        }
    }
}
