//! Reduced oracle-equivalence and normalization checks run by
//! `condibeam selftest`. The report is deterministic: fixed parameters, no
//! timing.

use num_complex::Complex64 as C64;

use crate::cat::{
    cat_norm_and_prob, chi_state, chi_state_displaced_route, chi_state_operator_route, measured_from_beta,
    multi_cat_norm, multi_cat_state, scheme_a, CatSpec,
};
use crate::conditional::{apply_conditional, fock_term_coeff, y_core, BeamSplitterParams, ReferencePrep};
use crate::error::Result;
use crate::fock::{fock_state, FockOperator, FockVector, TruncationPolicy};
use crate::linalg::{max_abs, rel_frobenius_on_block};
use crate::oracle::{conditional_reduce, oracle_y, photon_counting_povm, TwoModeState};
use crate::ordering::{s_ordered_via_normal, s_ordered_matrix};
use crate::phase_space::{husimi, Axis};

/// Deliberate fault injected into the closed-form operator, used to check
/// that the suite can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// `(−R*)^n` replaced by `(R*)^n` in the kernel coefficient.
    FlipSign,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.note.is_none() && self.error <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed() { "ok  " } else { "FAIL" };
            match &c.note {
                Some(n) => s.push_str(&format!("{status} {:<30} error: {n}\n", c.name)),
                None => s.push_str(&format!(
                    "{status} {:<30} max_err={:.3e} tol={:.1e}\n",
                    c.name, c.error, c.tolerance
                )),
            }
        }
        match self.first_failure() {
            None => s.push_str(&format!("selftest passed ({} checks)\n", self.checks.len())),
            Some(c) => s.push_str(&format!("selftest FAILED: first failing property `{}`\n", c.name)),
        }
        s
    }
}

fn check(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> CheckResult {
    match f() {
        Ok(error) => CheckResult {
            name,
            error,
            tolerance,
            note: None,
        },
        Err(e) => CheckResult {
            name,
            error: f64::INFINITY,
            tolerance,
            note: Some(e.to_string()),
        },
    }
}

type YConfig = (usize, usize, C64, C64, f64, f64, f64);

const Y_CONFIGS: [YConfig; 6] = [
    (0, 1, C64::new(0.0, 0.0), C64::new(0.5, 0.0), std::f64::consts::FRAC_PI_4, 0.0, 0.0),
    (1, 1, C64::new(0.3, -0.2), C64::new(-0.4, 0.6), std::f64::consts::FRAC_PI_3, 0.4, -1.1),
    (2, 3, C64::new(-0.7, 0.1), C64::new(0.2, 0.9), 1.0, 2.0, 0.3),
    (3, 0, C64::new(0.5, 0.5), C64::new(0.0, 0.0), std::f64::consts::FRAC_PI_4, -0.6, 0.9),
    (1, 2, C64::new(0.0, -0.8), C64::new(0.6, 0.3), 1.0, 0.0, 1.5),
    (0, 3, C64::new(0.9, 0.0), C64::new(-0.1, -0.5), std::f64::consts::FRAC_PI_3, 1.2, 0.2),
];

fn mutated_y(
    cfg: &YConfig,
    mutation: Mutation,
    policy: &TruncationPolicy,
) -> Result<(FockOperator, BeamSplitterParams)> {
    let &(m, n, alpha, beta, theta, pt, pr) = cfg;
    let bs = BeamSplitterParams::from_angles(theta, pt, pr)?;
    let mut coeff = fock_term_coeff(m, n, &bs);
    if mutation == Mutation::FlipSign && n % 2 == 1 {
        coeff = -coeff;
    }
    Ok((y_core(&[(m, n, coeff)], alpha, beta, &bs, policy)?, bs))
}

/// Runs every check at cutoff 24.
pub fn run_selftest(mutation: Mutation) -> SelftestReport {
    let policy = TruncationPolicy::with_cutoff(24).expect("valid cutoff");
    let safe = policy.safe_levels();
    let mut checks = Vec::new();

    checks.push(check("closed-form-vs-oracle", 1e-8, || {
        let mut worst = 0.0f64;
        for cfg in &Y_CONFIGS {
            let (y, bs) = mutated_y(cfg, mutation, &policy)?;
            let reference = oracle_y(
                &ReferencePrep::displaced_fock(cfg.0, cfg.2),
                &ReferencePrep::displaced_fock(cfg.1, cfg.3),
                &bs,
                &policy,
            )?;
            worst = worst.max(rel_frobenius_on_block(y.matrix(), reference.matrix(), safe));
        }
        Ok(worst)
    }));

    checks.push(check("probability-consistency", 1e-8, || {
        let mut worst = 0.0f64;
        for cfg in &Y_CONFIGS {
            let (y, bs) = mutated_y(cfg, mutation, &policy)?;
            let amps: Vec<C64> = (0..policy.dim())
                .map(|k| if k <= 3 { C64::new(1.0 + k as f64, 0.5 * k as f64) } else { C64::new(0.0, 0.0) })
                .collect();
            let psi = FockVector::from_amplitudes(amps).normalize()?;
            let p_closed = apply_conditional(&y, &psi)?.probability;
            let meas = ReferencePrep::displaced_fock(cfg.1, cfg.3).state(&policy)?;
            let element = FockOperator::from_matrix(meas.as_dvector() * meas.as_dvector().adjoint())?;
            let reference = ReferencePrep::displaced_fock(cfg.0, cfg.2).state(&policy)?;
            let input = TwoModeState::product(&psi, &reference)?;
            let (_, p_oracle) = conditional_reduce(&input, &element, &bs, &policy)?;
            worst = worst.max((p_closed - p_oracle).abs());
        }
        Ok(worst)
    }));

    checks.push(check("ordering-closed-vs-recursive", 1e-9, || {
        let mut worst = 0.0f64;
        for s in [1.5, 3.0, 9.0] {
            for m in 0..=6 {
                for n in 0..=6 - m {
                    let a = s_ordered_matrix(m, n, s, 16);
                    let b = s_ordered_via_normal(m, n, s, 16);
                    let scale = max_abs(&b).max(1.0);
                    worst = worst.max(max_abs(&(a - b)) / scale);
                }
            }
        }
        Ok(worst)
    }));

    checks.push(check("cat-routes", 1e-10, || {
        let mut worst = 0.0f64;
        for (n, beta) in [(1, C64::new(0.7, 0.0)), (4, C64::new(-0.8, 1.1)), (7, C64::new(0.0, 1.9))] {
            let spec = CatSpec::new(n, beta);
            let a = chi_state(&spec, &policy)?;
            for b in [chi_state_operator_route(&spec, &policy)?, chi_state_displaced_route(&spec, &policy)?] {
                worst = worst.max(1.0 - a.fidelity(&b)?);
            }
        }
        Ok(worst)
    }));

    checks.push(check("cat-probability-spot", 5e-5, || {
        let (_, p) = cat_norm_and_prob(&CatSpec::new(1, C64::new(0.5f64.sqrt(), 0.0)));
        Ok((p - 0.2274).abs())
    }));

    checks.push(check("scheme-a-probability", 1e-10, || {
        let bs = BeamSplitterParams::balanced();
        let mut worst = 0.0f64;
        for n in [1, 2, 4] {
            let beta = C64::new((n as f64 / 2.0).sqrt(), 0.0);
            let out = scheme_a(n, measured_from_beta(beta, &bs), &bs, &policy)?;
            let (_, p) = cat_norm_and_prob(&CatSpec::new(n, beta));
            worst = worst.max((out.probability - p).abs());
        }
        Ok(worst)
    }));

    checks.push(check("multi-cat-normalization", 1e-10, || {
        let spec = CatSpec::multi(3, C64::new(1.3, 0.4), 3)?;
        let s = multi_cat_state(&spec, &policy)?;
        let k1 = CatSpec::multi(1, C64::new(0.6, -0.2), 1)?;
        Ok((s.norm_sqr() - 1.0).abs().max((multi_cat_norm(&k1) - 1.4).abs()))
    }));

    checks.push(check("povm-completeness", 1e-12, || {
        let povm = photon_counting_povm(0.7, &policy)?;
        let dim = policy.dim();
        let mut total = crate::CMatrix::zeros(dim, dim);
        for e in povm.elements() {
            total += e.matrix();
        }
        Ok(max_abs(&(total - crate::CMatrix::identity(dim, dim))))
    }));

    checks.push(check("husimi-normalization", 1e-4, || {
        let st = fock_state(2, &policy)?;
        let ax = Axis::new("re", -6.0, 6.0, 121)?;
        Ok((husimi(&st, &ax, &ax).integrate() - 1.0).abs())
    }));

    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes_and_is_deterministic() {
        let a = run_selftest(Mutation::None);
        assert!(a.passed(), "{}", a.text());
        assert_eq!(a.text(), run_selftest(Mutation::None).text());
    }

    #[test]
    fn sign_mutation_is_caught() {
        let r = run_selftest(Mutation::FlipSign);
        assert!(!r.passed());
        assert_eq!(r.first_failure().unwrap().name, "closed-form-vs-oracle");
    }
}
