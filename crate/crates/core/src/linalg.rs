use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

/// `exp(i·t·H)` for Hermitian `H`, via its spectral decomposition.
pub fn exp_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, t * lambda);
        for entry in scaled.column_mut(j).iter_mut() {
            *entry *= phase;
        }
    }
    scaled * v.adjoint()
}

/// Top-left `k × k` block.
pub fn leading_block(m: &CMatrix, k: usize) -> CMatrix {
    let k = k.min(m.nrows()).min(m.ncols());
    m.view((0, 0), (k, k)).into_owned()
}

/// `‖a − b‖_F / ‖b‖_F` on the leading `k × k` block (absolute when `b`
/// vanishes there).
pub fn rel_frobenius_on_block(a: &CMatrix, b: &CMatrix, k: usize) -> f64 {
    let a = leading_block(a, k);
    let b = leading_block(b, k);
    let diff = (&a - &b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_of_pauli_y() {
        // exp(i t σ_y) = cos t I + i sin t σ_y
        let i = C64::new(0.0, 1.0);
        let sy = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]);
        let t = 0.3;
        let u = exp_i_hermitian(&sy, t);
        let expect = CMatrix::identity(2, 2) * C64::new(t.cos(), 0.0) + &sy * (i * t.sin());
        assert!(max_abs(&(u - expect)) < 1e-14);
    }
}
