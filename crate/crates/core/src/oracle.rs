//! Brute-force two-mode simulation used as ground truth for the closed forms.
//!
//! The beam splitter conserves the total photon number `N = k₁ + k₂`, so
//! [`TwoModeOperator`] stores one block per `N`. Each block is computed from
//! the *complete* `(N+1)`-dimensional photon-number subspace and only then
//! restricted to `k₁, k₂ ≤ N_c`, which makes every stored element exact
//! rather than a truncation artifact.

use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use twofloat::TwoFloat;

use crate::conditional::{BeamSplitterParams, ReferencePrep};
use crate::error::{Error, Result};
use crate::fock::{check_cutoffs, FockOperator, FockVector, TruncationPolicy};
use crate::linalg::CMatrix;
use crate::poly::binomial;

/// Pure two-mode state with amplitudes `amps[(k₁, k₂)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    amps: CMatrix,
}

impl TwoModeState {
    pub fn from_matrix(amps: CMatrix) -> Result<Self> {
        if amps.nrows() != amps.ncols() || amps.nrows() == 0 {
            return Err(Error::param("amps", "two-mode amplitudes must be a square array"));
        }
        Ok(Self { amps })
    }

    pub fn product(signal: &FockVector, reference: &FockVector) -> Result<Self> {
        check_cutoffs(signal.cutoff(), reference.cutoff())?;
        Ok(Self {
            amps: signal.as_dvector() * reference.as_dvector().transpose(),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.amps.nrows() - 1
    }

    pub fn amps(&self) -> &CMatrix {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn inner(&self, other: &TwoModeState) -> Result<C64> {
        check_cutoffs(self.cutoff(), other.cutoff())?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Photon-number-conserving two-mode operator stored as blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeOperator {
    cutoff: usize,
    /// `blocks[N][(k₁' − lo, k₁ − lo)]` with `lo = max(0, N − N_c)`.
    blocks: Vec<CMatrix>,
}

fn block_range(cutoff: usize, total: usize) -> (usize, usize) {
    (total.saturating_sub(cutoff), total.min(cutoff))
}

impl TwoModeOperator {
    fn from_full_blocks(cutoff: usize, mut full: impl FnMut(usize) -> CMatrix) -> Self {
        let blocks = (0..=2 * cutoff)
            .map(|total| {
                let (lo, hi) = block_range(cutoff, total);
                let b = full(total);
                b.view((lo, lo), (hi - lo + 1, hi - lo + 1)).into_owned()
            })
            .collect();
        Self { cutoff, blocks }
    }

    pub fn identity(cutoff: usize) -> Self {
        Self::from_full_blocks(cutoff, |n| CMatrix::identity(n + 1, n + 1))
    }

    /// `L̂₂ = (â₁†â₂ − â₂†â₁)/(2i)`.
    pub fn l2(cutoff: usize) -> Self {
        Self::from_full_blocks(cutoff, l2_block)
    }

    /// `L̂₃ = (n̂₁ − n̂₂)/2`.
    pub fn l3(cutoff: usize) -> Self {
        Self::from_full_blocks(cutoff, |n| {
            CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n + 1, |k, _| {
                C64::new(k as f64 - n as f64 / 2.0, 0.0)
            }))
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn block(&self, total: usize) -> Option<&CMatrix> {
        self.blocks.get(total)
    }

    /// `⟨j₁, j₂|Ô|i₁, i₂⟩`.
    pub fn element(&self, j1: usize, j2: usize, i1: usize, i2: usize) -> C64 {
        let c = self.cutoff;
        if j1 + j2 != i1 + i2 || j1.max(j2).max(i1).max(i2) > c {
            return C64::new(0.0, 0.0);
        }
        let total = i1 + i2;
        let (lo, _) = block_range(c, total);
        self.blocks[total][(j1 - lo, i1 - lo)]
    }

    pub fn apply(&self, state: &TwoModeState) -> Result<TwoModeState> {
        check_cutoffs(self.cutoff, state.cutoff())?;
        let c = self.cutoff;
        let mut out = CMatrix::zeros(c + 1, c + 1);
        for (total, b) in self.blocks.iter().enumerate() {
            let (lo, hi) = block_range(c, total);
            let v = nalgebra::DVector::from_fn(hi - lo + 1, |k, _| state.amps[(lo + k, total - lo - k)]);
            let w = b * v;
            for k in 0..=(hi - lo) {
                out[(lo + k, total - lo - k)] = w[k];
            }
        }
        Ok(TwoModeState { amps: out })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// `self · rhs`. Exact for blocks that were complete in both factors
    /// (`N ≤ N_c`); higher blocks multiply their restrictions.
    pub fn compose(&self, rhs: &TwoModeOperator) -> Result<TwoModeOperator> {
        check_cutoffs(self.cutoff, rhs.cutoff)?;
        Ok(Self {
            cutoff: self.cutoff,
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a * b).collect(),
        })
    }

    /// Dense matrix over the product basis, index `k₁ (N_c+1) + k₂`.
    pub fn to_dense(&self) -> CMatrix {
        let d = self.cutoff + 1;
        let mut out = CMatrix::zeros(d * d, d * d);
        for (total, b) in self.blocks.iter().enumerate() {
            let (lo, hi) = block_range(self.cutoff, total);
            for r in lo..=hi {
                for c in lo..=hi {
                    out[(r * d + total - r, c * d + total - c)] = b[(r - lo, c - lo)];
                }
            }
        }
        out
    }

    /// Largest elementwise difference over indices `< levels` in both modes.
    pub fn max_diff_on_block(&self, other: &TwoModeOperator, levels: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for total in 0..=2 * (levels.saturating_sub(1)) {
            let (lo, hi) = block_range(self.cutoff, total);
            for r in lo..=hi {
                for c in lo..=hi {
                    if r < levels && c < levels && total - r < levels && total - c < levels {
                        let d = self.blocks[total][(r - lo, c - lo)] - other.blocks[total][(r - lo, c - lo)];
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
        worst
    }
}

fn l2_block(total: usize) -> CMatrix {
    let mut b = CMatrix::zeros(total + 1, total + 1);
    for k in 0..total {
        let v = 0.5 * (((k + 1) * (total - k)) as f64).sqrt();
        b[(k + 1, k)] = C64::new(0.0, -v);
        b[(k, k + 1)] = C64::new(0.0, v);
    }
    b
}

type RealEigen = nalgebra::SymmetricEigen<f64, nalgebra::Dyn>;

/// Eigendecomposition of the real tridiagonal `J` for one block. It does not
/// depend on the beam-splitter angles, so it is computed once per block.
fn l2_eigen(total: usize) -> Arc<RealEigen> {
    static CACHE: Mutex<Vec<Arc<RealEigen>>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    while cache.len() <= total {
        let t = cache.len();
        let mut j = nalgebra::DMatrix::<f64>::zeros(t + 1, t + 1);
        for k in 0..t {
            let v = 0.5 * (((k + 1) * (t - k)) as f64).sqrt();
            j[(k + 1, k)] = v;
            j[(k, k + 1)] = v;
        }
        cache.push(Arc::new(RealEigen::new(j)));
    }
    Arc::clone(&cache[total])
}

/// `e^{iτL̂₂}` on the block with `total` photons. `L̂₂ = D†JD` with
/// `D = diag(i^k)` and `J` real symmetric tridiagonal, so only a real
/// eigendecomposition is needed.
fn l2_rotation_block(total: usize, tau: f64) -> CMatrix {
    let dim = total + 1;
    let eig = l2_eigen(total);
    let v = &eig.eigenvectors;
    let (mut vc, mut vs) = (v.clone(), v.clone());
    for (k, l) in eig.eigenvalues.iter().enumerate() {
        let (sn, cs) = (tau * l).sin_cos();
        vc.column_mut(k).scale_mut(cs);
        vs.column_mut(k).scale_mut(sn);
    }
    let cos = vc * v.transpose();
    let sin = vs * v.transpose();
    let i_pow = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    CMatrix::from_fn(dim, dim, |r, c| {
        C64::new(cos[(r, c)], sin[(r, c)]) * i_pow[(c + 4 - r % 4) % 4]
    })
}

/// `Û = e^{i(φ_T+φ_R)L̂₃} e^{2iθL̂₂} e^{i(φ_T−φ_R)L̂₃}`, blockwise.
pub fn bs_unitary(bs: &BeamSplitterParams, policy: &TruncationPolicy) -> TwoModeOperator {
    let (theta, pt, pr) = (bs.theta(), bs.phi_t(), bs.phi_r());
    TwoModeOperator::from_full_blocks(policy.cutoff(), |total| {
        let mut u = l2_rotation_block(total, 2.0 * theta);
        for r in 0..=total {
            let l3 = r as f64 - total as f64 / 2.0;
            let left = C64::from_polar(1.0, (pt + pr) * l3);
            for c in 0..=total {
                let l3c = c as f64 - total as f64 / 2.0;
                u[(r, c)] *= left * C64::from_polar(1.0, (pt - pr) * l3c);
            }
        }
        u
    })
}

#[derive(Clone, Copy)]
struct Cdd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Cdd {
    fn zero() -> Self {
        Self::from_c64(C64::new(0.0, 0.0))
    }

    fn from_c64(z: C64) -> Self {
        Self {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn scale(self, x: TwoFloat) -> Self {
        Self {
            re: self.re * x,
            im: self.im * x,
        }
    }

    fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }

    fn abs_sqr(self) -> TwoFloat {
        self.re * self.re + self.im * self.im
    }

    fn recip(self) -> Self {
        let d = self.abs_sqr();
        Self {
            re: self.re / d,
            im: -self.im / d,
        }
    }

    fn to_c64(self) -> C64 {
        C64::new(f64::from(self.re), f64::from(self.im))
    }

    fn powers(self, n: usize) -> Vec<Cdd> {
        let mut out = Vec::with_capacity(n + 1);
        let mut cur = Self::from_c64(C64::new(1.0, 0.0));
        for _ in 0..=n {
            out.push(cur);
            cur = cur.mul(self);
        }
        out
    }
}

fn binomial_dd(n: usize, k: usize) -> TwoFloat {
    let mut acc = TwoFloat::from(1.0);
    for i in 0..k {
        acc = acc * TwoFloat::from((n - i) as f64) / TwoFloat::from((i + 1) as f64);
    }
    acc
}

/// Relative precision assumed for the double-double arithmetic.
const DD_EPS: f64 = 1e-30;

/// `Û = T^{n̂₁} e^{−R* â₂†â₁} e^{R â₁†â₂} T^{−n̂₂}` in double-double arithmetic.
///
/// The factored form cancels catastrophically: terms grow roughly like
/// `((1+|R|²)/|T|²)^N` while the result stays bounded. Each block carries an
/// a-priori error estimate; the call fails with [`Error::IllConditioned`] when
/// the estimate for any block touching the safe block exceeds `1e-10`.
/// Blocks above the safe block are returned as computed and may be
/// inaccurate. For `|T| < 1e-12` the generator form is returned instead.
pub fn bs_unitary_factored(bs: &BeamSplitterParams, policy: &TruncationPolicy) -> Result<TwoModeOperator> {
    let t64 = bs.t();
    if t64.norm() < 1e-12 {
        log::info!("T = 0: factored beam-splitter form undefined, using the generator form");
        return Ok(bs_unitary(bs, policy));
    }
    // rescale T so that |T|² + |R|² = 1 holds in double-double
    let r = Cdd::from_c64(bs.r());
    let t_raw = Cdd::from_c64(t64);
    let t_abs = (TwoFloat::from(1.0) - r.abs_sqr()).sqrt();
    let t = t_raw.scale(t_abs / t_raw.abs_sqr().sqrt());
    let cutoff = policy.cutoff();
    let max_total = 2 * cutoff;
    let t_pow = t.powers(max_total);
    let t_inv_pow = t.recip().powers(max_total);
    let r_pow = r.powers(max_total);
    let mr_pow = r.conj().neg().powers(max_total);
    let safe_total = 2 * (policy.safe_levels().saturating_sub(1));

    let mut worst_safe: f64 = 0.0;
    let mut non_finite = false;
    let op = TwoModeOperator::from_full_blocks(cutoff, |total| {
        let dim = total + 1;
        // E1[c, b] = R^{c−b} √(C(c, c−b) C(N−b, c−b)), c ≥ b
        let mut e1 = vec![vec![Cdd::zero(); dim]; dim];
        let mut e2 = vec![vec![Cdd::zero(); dim]; dim];
        for b in 0..dim {
            for c in b..dim {
                let j = c - b;
                let w = (binomial_dd(c, j) * binomial_dd(total - b, j)).sqrt();
                e1[c][b] = r_pow[j].scale(w);
            }
        }
        // E2[a, c] = (−R*)^{c−a} √(C(c, c−a) C(N−a, c−a)), c ≥ a
        for c in 0..dim {
            for a in 0..=c {
                let j = c - a;
                let w = (binomial_dd(c, j) * binomial_dd(total - c + j, j)).sqrt();
                e2[a][c] = mr_pow[j].scale(w);
            }
        }
        let mut out = CMatrix::zeros(dim, dim);
        let mut block_err: f64 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = Cdd::zero();
                let mut mag = 0.0;
                for c in a.max(b)..dim {
                    let term = e2[a][c].mul(e1[c][b]);
                    mag += term.to_c64().norm();
                    acc = acc.add(term);
                }
                let outer = t_pow[a].mul(t_inv_pow[total - b]);
                let v = acc.mul(outer).to_c64();
                let err = DD_EPS * dim as f64 * mag * outer.to_c64().norm();
                if !(v.re.is_finite() && v.im.is_finite() && err.is_finite()) {
                    non_finite = true;
                }
                block_err = block_err.max(err);
                out[(a, b)] = v;
            }
        }
        if total <= safe_total {
            worst_safe = worst_safe.max(block_err);
        }
        out
    });
    if non_finite || worst_safe > 1e-10 {
        return Err(Error::IllConditioned(if non_finite { f64::INFINITY } else { worst_safe }));
    }
    Ok(op)
}

/// Contracts a precomputed `Û` with reference states:
/// `Y[j, i] = Σ_{k,l} ⟨j, l|Û|i, k⟩ ⟨Ψ_out2|l⟩ ⟨k|Ψ_in2⟩`.
pub fn conditional_operator(
    u: &TwoModeOperator,
    ref_in: &FockVector,
    ref_out: &FockVector,
) -> Result<FockOperator> {
    let c = u.cutoff();
    check_cutoffs(c, ref_in.cutoff())?;
    check_cutoffs(c, ref_out.cutoff())?;
    let (vin, vout) = (ref_in.amps(), ref_out.amps());
    let mut y = CMatrix::zeros(c + 1, c + 1);
    for i in 0..=c {
        for k in 0..=c {
            if vin[k] == C64::new(0.0, 0.0) {
                continue;
            }
            let total = i + k;
            let (lo, hi) = block_range(c, total);
            let b = &u.blocks[total];
            for j in lo..=hi {
                let l = total - j;
                y[(j, i)] += vout[l].conj() * b[(j - lo, i - lo)] * vin[k];
            }
        }
    }
    FockOperator::from_matrix(y)
}

/// `Ŷ` from the full two-mode unitary for arbitrary reference preparations.
pub fn oracle_y(
    ref_in: &ReferencePrep,
    ref_out: &ReferencePrep,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<FockOperator> {
    let vin = ref_in.state(policy)?;
    let vout = ref_out.state(policy)?;
    conditional_operator(&bs_unitary(bs, policy), &vin, &vout)
}

/// Single-mode density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues ≥ −1e-10).
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::param("rho", "density matrix must be square"));
        }
        let herm = crate::linalg::max_abs(&(&mat - mat.adjoint()));
        if herm > 1e-12 {
            return Err(Error::param("rho", format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::NotNormalized(tr.re));
        }
        let h = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = nalgebra::SymmetricEigen::new(h.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::param("rho", format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { mat: h })
    }

    pub fn pure(state: &FockVector) -> Result<Self> {
        let v = state.normalize()?;
        Self::new(v.as_dvector() * v.as_dvector().adjoint())
    }

    /// `X / Tr X` for a positive operator `X`, Hermitian-symmetrized first.
    pub(crate) fn from_unnormalized(x: CMatrix) -> Result<(Self, f64)> {
        let h = (&x + x.adjoint()) * C64::new(0.5, 0.0);
        let p = h.trace().re;
        if p < 1e-14 {
            return Err(Error::ZeroProbability(p));
        }
        Ok((Self::new(h / C64::new(p, 0.0))?, p))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn cutoff(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// `⟨ψ|ϱ̂|ψ⟩` for normalized `ψ`.
    pub fn overlap_with_pure(&self, state: &FockVector) -> Result<f64> {
        check_cutoffs(self.cutoff(), state.cutoff())?;
        let v = state.as_dvector();
        Ok((v.adjoint() * &self.mat * v)[(0, 0)].re)
    }
}

/// Photon counting with quantum efficiency `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonCountingPovm {
    efficiency: f64,
    elements: Vec<FockOperator>,
}

impl PhotonCountingPovm {
    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn elements(&self) -> &[FockOperator] {
        &self.elements
    }

    pub fn element(&self, n: usize) -> Option<&FockOperator> {
        self.elements.get(n)
    }

    /// `p(n|k) = C(k,n) η^n (1−η)^{k−n}`.
    pub fn weight(&self, n: usize, k: usize) -> f64 {
        count_weight(self.efficiency, n, k)
    }
}

fn count_weight(eta: f64, n: usize, k: usize) -> f64 {
    if n > k {
        return 0.0;
    }
    binomial(k, n) * eta.powi(n as i32) * (1.0 - eta).powi((k - n) as i32)
}

/// `Π̂(n) = Σ_{k=n}^{N_c} C(k,n) η^n (1−η)^{k−n} |k⟩⟨k|`, `n = 0..=N_c`.
pub fn photon_counting_povm(eta: f64, policy: &TruncationPolicy) -> Result<PhotonCountingPovm> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta", format!("efficiency must lie in (0, 1], got {eta}")));
    }
    let c = policy.cutoff();
    let elements = (0..=c)
        .map(|n| FockOperator::from_diagonal(c, |k| C64::new(count_weight(eta, n, k), 0.0)))
        .collect();
    Ok(PhotonCountingPovm {
        efficiency: eta,
        elements,
    })
}

/// Output signal state `Tr₂[Û ϱ̂_in Û† (Î ⊗ Π̂)] / p` and the outcome
/// probability `p` for a pure two-mode input.
pub fn conditional_reduce(
    state_in: &TwoModeState,
    povm_element: &FockOperator,
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<(DensityOperator, f64)> {
    check_cutoffs(policy.cutoff(), state_in.cutoff())?;
    check_cutoffs(policy.cutoff(), povm_element.cutoff())?;
    let n2 = state_in.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n2.sqrt()));
    }
    let out = bs_unitary(bs, policy).apply(state_in)?;
    let lost = n2 - out.norm_sqr();
    if lost > policy.tail_tol() {
        return Err(Error::Truncation {
            what: "beam-splitter output",
            measured: lost,
            limit: policy.tail_tol(),
        });
    }
    let a = out.amps();
    let rho = a * povm_element.matrix().transpose() * a.adjoint();
    let (rho, p) = DensityOperator::from_unnormalized(rho)?;
    if p > 1.0 + 1e-9 {
        return Err(Error::Consistency(format!("outcome probability {p} exceeds one")));
    }
    Ok((rho, p))
}

/// Mixed reference preparations and measurement decomposed over pure states:
/// `ϱ̂_out1 ∝ Σ p(Ψ_in2) Σ p(l|Ψ_out2) Ŷ ϱ̂_in1 Ŷ†`, with every `Ŷ` from the
/// oracle. Reference states are normalized before use.
pub fn conditional_reduce_mixed(
    rho_in1: &DensityOperator,
    ref_ensemble: &[(f64, ReferencePrep)],
    meas_ensemble: &[(f64, ReferencePrep)],
    bs: &BeamSplitterParams,
    policy: &TruncationPolicy,
) -> Result<(DensityOperator, f64)> {
    check_cutoffs(policy.cutoff(), rho_in1.cutoff())?;
    if ref_ensemble.iter().chain(meas_ensemble).any(|(w, _)| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::param("weights", "ensemble weights must be nonnegative"));
    }
    let total: f64 = ref_ensemble.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::param("ref_ensemble", format!("weights sum to {total}, expected 1")));
    }
    let u = bs_unitary(bs, policy);
    let ins = ref_ensemble
        .iter()
        .map(|(w, p)| Ok((*w, p.state(policy)?.normalize()?)))
        .collect::<Result<Vec<_>>>()?;
    let outs = meas_ensemble
        .iter()
        .map(|(w, p)| Ok((*w, p.state(policy)?.normalize()?)))
        .collect::<Result<Vec<_>>>()?;
    let dim = policy.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for (wi, vin) in &ins {
        for (wo, vout) in &outs {
            let w = wi * wo;
            if w == 0.0 {
                continue;
            }
            let y = conditional_operator(&u, vin, vout)?;
            acc += y.matrix() * rho_in1.matrix() * y.matrix().adjoint() * C64::new(w, 0.0);
        }
    }
    let (rho, p) = DensityOperator::from_unnormalized(acc)?;
    if p > 1.0 + 1e-9 {
        return Err(Error::Consistency(format!("outcome probability {p} exceeds one")));
    }
    Ok((rho, p))
}
