//! Husimi, Wigner and quadrature distributions on rectangular grids.
//!
//! Phase-space points use `α = (x + ip)/√2`, so the vacuum has
//! `W = e^{−x²−p²}/π` and `Q(α) = e^{−|α|²}/π`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::cat::{cat_norm_and_prob, husimi_chi_value, husimi_multi_cat_value, CatSpec};
use crate::error::{Error, Result};
use crate::fock::{wavefunction, FockVector};
use crate::poly::{assoc_laguerre_real, factorial, hermite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Husimi,
    Wigner,
    Quadrature,
}

impl GridKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridKind::Husimi => "husimi",
            GridKind::Wigner => "wigner",
            GridKind::Quadrature => "quadrature",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "husimi" => Some(GridKind::Husimi),
            "wigner" => Some(GridKind::Wigner),
            "quadrature" => Some(GridKind::Quadrature),
            _ => None,
        }
    }
}

/// Uniform axis `min, min + h, …, max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    name: String,
    min: f64,
    max: f64,
    points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, points: usize) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::param("axis", "name must be a single non-empty word"));
        }
        if points < 2 {
            return Err(Error::param("axis", format!("{name}: need at least 2 points")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::param("axis", format!("{name}: need finite min < max")));
        }
        Ok(Self { name, min, max, points })
    }

    /// Degenerate axis holding a fixed parameter such as a phase.
    pub fn single(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            min: value,
            max: value,
            points: 1,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.points - 1) as f64
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    fn weights(&self) -> Vec<f64> {
        if self.points < 2 {
            return vec![1.0];
        }
        let h = self.step();
        let mut w = vec![h; self.points];
        w[0] *= 0.5;
        w[self.points - 1] *= 0.5;
        w
    }

    fn header(&self, slot: usize) -> String {
        format!("# axis{slot} {} {} {} {}", self.name, self.min, self.max, self.points)
    }
}

/// Values on `axis1 × axis2`, row-major with `axis1` outer.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    kind: GridKind,
    axis1: Axis,
    axis2: Axis,
    values: Vec<f64>,
}

impl GridFunction {
    fn tabulate(kind: GridKind, axis1: &Axis, axis2: &Axis, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(axis1.points * axis2.points);
        for a in axis1.values() {
            for b in axis2.values() {
                values.push(f(a, b));
            }
        }
        Self {
            kind,
            axis1: axis1.clone(),
            axis2: axis2.clone(),
            values,
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn axis1(&self) -> &Axis {
        &self.axis1
    }

    pub fn axis2(&self) -> &Axis {
        &self.axis2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.points + j]
    }

    /// Trapezoid rule over every axis with more than one point.
    pub fn integrate(&self) -> f64 {
        let w1 = self.axis1.weights();
        let w2 = self.axis2.weights();
        let mut acc = 0.0;
        for (i, a) in w1.iter().enumerate() {
            for (j, b) in w2.iter().enumerate() {
                acc += a * b * self.value(i, j);
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        if self.axis1 != other.axis1 || self.axis2 != other.axis2 {
            return Err(Error::param("grid", "grids differ"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `(axis1, axis2, value)` of the largest entry.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if *v > acc.1 { (k, *v) } else { acc });
        let (i, j) = (k / self.axis2.points, k % self.axis2.points);
        (self.axis1.value(i), self.axis2.value(j), v)
    }

    /// Interior points not below any of their eight neighbours and above
    /// `frac` times the global maximum.
    pub fn local_maxima(&self, frac: f64) -> Vec<(f64, f64, f64)> {
        let (n1, n2) = (self.axis1.points, self.axis2.points);
        let top = self.argmax().2;
        let mut out = Vec::new();
        if n1 < 3 || n2 < 3 {
            return out;
        }
        for i in 1..n1 - 1 {
            for j in 1..n2 - 1 {
                let v = self.value(i, j);
                if v < frac * top {
                    continue;
                }
                let peak = (i - 1..=i + 1)
                    .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                    .filter(|&(a, b)| (a, b) != (i, j))
                    .all(|(a, b)| self.value(a, b) <= v);
                if peak {
                    out.push((self.axis1.value(i), self.axis2.value(j), v));
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.axis1.header(1));
        let _ = writeln!(s, "{}", self.axis2.header(2));
        let _ = writeln!(s, "# kind {}", self.kind.as_str());
        for i in 0..self.axis1.points {
            for j in 0..self.axis2.points {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    self.axis1.value(i),
                    self.axis2.value(j),
                    self.value(i, j)
                );
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::param("csv", what.to_string());
        let mut lines = text.lines();
        let mut axis = |slot: usize| -> Result<Axis> {
            let line = lines.next().ok_or_else(|| bad("missing axis header"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 || f[0] != "#" || f[1] != format!("axis{slot}") {
                return Err(bad("malformed axis header"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad axis bound"));
            let points: usize = f[5].parse().map_err(|_| bad("bad point count"))?;
            let (min, max) = (num(f[3])?, num(f[4])?);
            if points == 1 && min == max {
                Ok(Axis::single(f[2], min))
            } else {
                Axis::new(f[2], min, max, points)
            }
        };
        let axis1 = axis(1)?;
        let axis2 = axis(2)?;
        let kind_line = lines.next().ok_or_else(|| bad("missing kind"))?;
        let kind = kind_line
            .strip_prefix("# kind ")
            .and_then(GridKind::parse)
            .ok_or_else(|| bad("malformed kind line"))?;
        let values = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.rsplit(',')
                    .next()
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| bad("bad row"))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != axis1.points * axis2.points {
            return Err(bad("row count does not match the axes"));
        }
        Ok(Self { kind, axis1, axis2, values })
    }
}

/// `⟨α|ψ⟩ = e^{−|α|²/2} Σ_k (α*)^k/√k! c_k`, exact for a truncated `ψ`.
pub fn coherent_overlap(state: &FockVector, alpha: C64) -> C64 {
    let mut term = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (k, c) in state.amps().iter().enumerate() {
        if k > 0 {
            term *= alpha.conj() / (k as f64).sqrt();
        }
        acc += term * c;
    }
    acc
}

/// `Q(α) = |⟨α|ψ⟩|²/π` with `axis1 = Re α`, `axis2 = Im α`. The overlap is
/// summed exactly over the retained levels, so the grid extent is not limited
/// by the cutoff.
pub fn husimi(state: &FockVector, axis1: &Axis, axis2: &Axis) -> GridFunction {
    GridFunction::tabulate(GridKind::Husimi, axis1, axis2, |re, im| {
        coherent_overlap(state, C64::new(re, im)).norm_sqr() / std::f64::consts::PI
    })
}

pub fn husimi_chi_closed(spec: &CatSpec, axis1: &Axis, axis2: &Axis) -> GridFunction {
    GridFunction::tabulate(GridKind::Husimi, axis1, axis2, |re, im| {
        husimi_chi_value(spec, C64::new(re, im))
    })
}

pub fn husimi_multi_cat_closed(spec: &CatSpec, axis1: &Axis, axis2: &Axis) -> GridFunction {
    GridFunction::tabulate(GridKind::Husimi, axis1, axis2, |re, im| {
        husimi_multi_cat_value(spec, C64::new(re, im))
    })
}

/// Quadrature grid for the `y` integral of the numeric Wigner transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationSpec {
    pub step: f64,
    /// `None` picks `4 + 2√⟨n⟩`.
    pub half_range: Option<f64>,
    /// Largest tolerated integrand `|ψ(x−L)ψ(x+L)|` at the range ends. For
    /// Gaussian tails the neglected part of `W` is roughly `tol/(2πL)`.
    pub tail_tol: f64,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            step: 0.02,
            half_range: None,
            tail_tol: 1e-6,
        }
    }
}

/// `W(x,p) = (1/π) ∫ dy e^{2ipy} ⟨x−y|ψ⟩⟨ψ|x+y⟩`, trapezoid rule in `y`.
pub fn wigner_numeric(
    state: &FockVector,
    x_axis: &Axis,
    p_axis: &Axis,
    spec: &IntegrationSpec,
) -> Result<GridFunction> {
    if !(spec.step > 0.0 && spec.step <= 0.02) {
        return Err(Error::param("step", "integration step must lie in (0, 0.02]"));
    }
    let half = spec
        .half_range
        .unwrap_or_else(|| 4.0 + 2.0 * state.mean_photon_number().sqrt());
    if !(half.is_finite() && half > 0.0) {
        return Err(Error::param("half_range", "must be positive and finite"));
    }
    let m = (2.0 * half / spec.step).ceil() as usize;
    let h = 2.0 * half / m as f64;
    let ys: Vec<f64> = (0..=m).map(|j| -half + j as f64 * h).collect();
    let mut weights = vec![h; m + 1];
    weights[0] *= 0.5;
    weights[m] *= 0.5;

    let ps = p_axis.values();
    let mut values = Vec::with_capacity(x_axis.points() * ps.len());
    for x in x_axis.values() {
        let f: Vec<C64> = ys
            .iter()
            .map(|&y| wavefunction(state, x - y, 0.0) * wavefunction(state, x + y, 0.0).conj())
            .collect();
        let tail = f[0].norm().max(f[m].norm());
        if tail > spec.tail_tol {
            return Err(Error::IntegrationRange { tail, half_range: half });
        }
        for &p in &ps {
            let s: C64 = ys
                .iter()
                .zip(&f)
                .zip(&weights)
                .map(|((&y, fy), w)| C64::from_polar(*w, 2.0 * p * y) * fy)
                .sum();
            values.push(s.re / std::f64::consts::PI);
        }
    }
    Ok(GridFunction {
        kind: GridKind::Wigner,
        axis1: x_axis.clone(),
        axis2: p_axis.clone(),
        values,
    })
}

/// Double sum over `|k⟩⟨m|` contributions, `z = √2(x + ip)`. With
/// `transposed` the second sum takes `L_k^{k−m}` instead of `L_m^{k−m}`.
fn wigner_cat_sum(spec: &CatSpec, norm: f64, x: f64, p: f64, transposed: bool) -> C64 {
    let n = spec.n;
    let b = spec.beta;
    let b2 = b.norm_sqr();
    let z = C64::new(x, p) * std::f64::consts::SQRT_2;
    let z2 = z.norm_sqr();
    let lag: Vec<f64> = (0..=n).map(|k| assoc_laguerre_real(n - k, k as f64, b2)).collect();
    let mut s = C64::new(0.0, 0.0);
    for m in 0..=n {
        let bm = (-b.conj()).powu(m as u32);
        for k in 0..=m {
            let l = assoc_laguerre_real(k, (m - k) as f64, z2);
            s += b.powu(k as u32) * bm * z.powu((m - k) as u32) * (lag[k] * lag[m] * l / factorial(m));
        }
        for k in m + 1..=n {
            let deg = if transposed { k } else { m };
            let l = assoc_laguerre_real(deg, (k - m) as f64, z2);
            s += b.powu(k as u32) * bm * (-z.conj()).powu((k - m) as u32) * (lag[k] * lag[m] * l / factorial(k));
        }
    }
    s * ((-(x * x + p * p)).exp() / (std::f64::consts::PI * norm))
}

/// Closed-form Wigner function of `|χ⟩`. Fails if the sum picks up an
/// imaginary part above `1e-12`.
pub fn wigner_cat_closed(spec: &CatSpec, x_axis: &Axis, p_axis: &Axis) -> Result<GridFunction> {
    let (norm, _) = cat_norm_and_prob(spec);
    let mut worst = 0.0f64;
    let g = GridFunction::tabulate(GridKind::Wigner, x_axis, p_axis, |x, p| {
        let w = wigner_cat_sum(spec, norm, x, p, false);
        worst = worst.max(w.im.abs());
        w.re
    });
    if worst > 1e-12 {
        return Err(Error::Consistency(format!(
            "closed-form Wigner function has imaginary part {worst:e}"
        )));
    }
    Ok(g)
}

/// `p(x, φ) = |⟨x, φ|ψ⟩|²` on `x_axis` at a fixed phase.
pub fn quadrature_dist(state: &FockVector, x_axis: &Axis, phi: f64) -> GridFunction {
    quadrature_map(state, x_axis, &Axis::single("phi", phi))
}

/// `p(x, φ)` over both `x` and `φ`.
pub fn quadrature_map(state: &FockVector, x_axis: &Axis, phi_axis: &Axis) -> GridFunction {
    GridFunction::tabulate(GridKind::Quadrature, x_axis, phi_axis, |x, phi| {
        wavefunction(state, x, phi).norm_sqr()
    })
}

/// `p(x, φ)` of `|χ⟩` from its Hermite expansion:
/// `(1/√π N) |Σ_k L_{n−k}^k(|β|²) (−β* e^{iφ}/√2)^k H_k(x)/k!|² e^{−x²}`.
pub fn quadrature_chi_closed(spec: &CatSpec, x_axis: &Axis, phi_axis: &Axis) -> GridFunction {
    let (norm, _) = cat_norm_and_prob(spec);
    let b2 = spec.beta.norm_sqr();
    let lag: Vec<f64> = (0..=spec.n)
        .map(|k| assoc_laguerre_real(spec.n - k, k as f64, b2))
        .collect();
    GridFunction::tabulate(GridKind::Quadrature, x_axis, phi_axis, |x, phi| {
        let w = -spec.beta.conj() * C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi);
        let s: C64 = lag
            .iter()
            .enumerate()
            .map(|(k, l)| w.powu(k as u32) * (l * hermite(k, x) / factorial(k)))
            .sum();
        s.norm_sqr() * (-x * x).exp() / (std::f64::consts::PI.sqrt() * norm)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::chi_state;
    use crate::fock::{coherent_state, fock_state, TruncationPolicy};
    use std::f64::consts::PI;

    fn policy(c: usize) -> TruncationPolicy {
        TruncationPolicy::with_cutoff(c).unwrap()
    }

    fn axis(name: &str, lo: f64, hi: f64, n: usize) -> Axis {
        Axis::new(name, lo, hi, n).unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new("x", 0.0, 1.0, 1).is_err());
        assert!(Axis::new("x", 1.0, 1.0, 5).is_err());
        assert!(Axis::new("two words", 0.0, 1.0, 5).is_err());
        let a = axis("x", -4.0, 4.0, 81);
        assert!((a.step() - 0.1).abs() < 1e-15);
        assert_eq!(a.value(80), 4.0);
    }

    #[test]
    fn vacuum_distributions() {
        let vac = fock_state(0, &policy(16)).unwrap();
        let ax = axis("x", -2.0, 2.0, 9);
        let q = husimi(&vac, &ax, &ax);
        for (i, a) in ax.values().iter().enumerate() {
            for (j, b) in ax.values().iter().enumerate() {
                let exact = (-(a * a + b * b)).exp() / PI;
                assert!((q.value(i, j) - exact).abs() < 1e-15);
            }
        }
        let wide = IntegrationSpec {
            half_range: Some(7.0),
            ..IntegrationSpec::default()
        };
        let w = wigner_numeric(&vac, &ax, &ax, &wide).unwrap();
        for (i, a) in ax.values().iter().enumerate() {
            for (j, b) in ax.values().iter().enumerate() {
                let exact = (-(a * a + b * b)).exp() / PI;
                assert!((w.value(i, j) - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_photon_wigner_origin() {
        let one = fock_state(1, &policy(16)).unwrap();
        let ax = axis("x", -1.0, 1.0, 3);
        let w = wigner_numeric(&one, &ax, &ax, &IntegrationSpec::default()).unwrap();
        assert!((w.value(1, 1) + 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn closed_wigner_matches_numeric_and_transposed_index_does_not() {
        let p = policy(24);
        let spec = CatSpec::new(3, C64::from_polar(1.2, 0.7));
        let chi = chi_state(&spec, &p).unwrap();
        let ax = axis("x", -2.0, 2.0, 9);
        let closed = wigner_cat_closed(&spec, &ax, &ax).unwrap();
        let num = wigner_numeric(&chi, &ax, &ax, &IntegrationSpec::default()).unwrap();
        assert!(closed.max_abs_diff(&num).unwrap() < 1e-8);

        let (norm, _) = cat_norm_and_prob(&spec);
        let worst = ax
            .values()
            .iter()
            .flat_map(|&x| ax.values().into_iter().map(move |q| (x, q)))
            .map(|(x, q)| {
                (wigner_cat_sum(&spec, norm, x, q, true) - wigner_cat_sum(&spec, norm, x, q, false)).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn wigner_rotation_covariance() {
        let p = policy(24);
        let st = chi_state(&CatSpec::new(2, C64::new(0.9, 0.2)), &p).unwrap();
        let phi: f64 = 0.8;
        let rotated = FockVector::from_amplitudes(
            st.amps()
                .iter()
                .enumerate()
                .map(|(k, c)| c * C64::from_polar(1.0, -(k as f64) * phi))
                .collect(),
        );
        let spec = IntegrationSpec::default();
        let (x, q) = (0.7, -0.4);
        let (xr, qr) = (x * phi.cos() + q * phi.sin(), -x * phi.sin() + q * phi.cos());
        let w0 = wigner_numeric(&st, &Axis::single("x", x), &Axis::single("p", q), &spec).unwrap();
        let w1 = wigner_numeric(&rotated, &Axis::single("x", xr), &Axis::single("p", qr), &spec).unwrap();
        assert!((w0.values()[0] - w1.values()[0]).abs() < 1e-10);
    }

    #[test]
    fn integration_range_error() {
        let st = coherent_state(C64::new(3.0, 0.0), &policy(48)).unwrap();
        let ax = axis("x", -1.0, 1.0, 3);
        let spec = IntegrationSpec {
            half_range: Some(1.0),
            ..IntegrationSpec::default()
        };
        assert!(matches!(
            wigner_numeric(&st, &ax, &ax, &spec),
            Err(Error::IntegrationRange { .. })
        ));
        let coarse = IntegrationSpec {
            step: 0.1,
            ..IntegrationSpec::default()
        };
        assert!(wigner_numeric(&st, &ax, &ax, &coarse).is_err());
    }

    #[test]
    fn husimi_normalized_and_closed_forms() {
        let p = policy(48);
        let spec = CatSpec::new(4, C64::new(2f64.sqrt(), 0.0));
        let chi = chi_state(&spec, &p).unwrap();
        let ax = axis("re", -7.0, 7.0, 141);
        let q = husimi(&chi, &ax, &ax);
        assert!((q.integrate() - 1.0).abs() < 1e-4);
        let closed = husimi_chi_closed(&spec, &ax, &ax);
        assert!(q.max_abs_diff(&closed).unwrap() < 1e-12);
    }

    #[test]
    fn quadrature_marginals() {
        let p = policy(24);
        let spec = CatSpec::new(3, C64::from_polar(1.1, -0.4));
        let chi = chi_state(&spec, &p).unwrap();
        let x = axis("x", -7.0, 7.0, 281);
        let phis = axis("phi", 0.0, PI, 7);
        let map = quadrature_map(&chi, &x, &phis);
        let closed = quadrature_chi_closed(&spec, &x, &phis);
        assert!(map.max_abs_diff(&closed).unwrap() < 1e-12);
        let one = quadrature_dist(&chi, &x, 0.3);
        assert!((one.integrate() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_roundtrip() {
        let vac = fock_state(0, &policy(8)).unwrap();
        let x = axis("x", -1.0, 1.0, 5);
        let g = quadrature_dist(&vac, &x, 0.5);
        let text = g.to_csv();
        assert!(text.starts_with("# axis1 x -1 1 5\n# axis2 phi 0.5 0.5 1\n# kind quadrature\n"));
        assert_eq!(GridFunction::from_csv(&text).unwrap(), g);
        assert!(GridFunction::from_csv("# axis1 x 0 1\n").is_err());
    }
}
