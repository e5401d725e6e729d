//! Dense state-space helpers.
//!
//! Basis index `b` encodes qubit `j` in bit `n-1-j`, so qubit 0 is the most
//! significant bit and `|q0 q1 … q(n-1)⟩` reads like the Pauli strings. A
//! Pauli operator acts on a basis state as a signed permutation, which lets
//! projectors be applied in `O(4^n)` without forming Kronecker products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::pauli::PauliOperator;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default largest qubit count for which dense matrices are built.
pub const DEFAULT_DENSE_CAP: usize = 12;

const I_POWERS: [Complex64; 4] =
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];

/// `P|b⟩ = i^base · (-1)^{|z ∧ b|} · |b ⊕ flip⟩`.
#[derive(Clone, Copy, Debug)]
pub struct Monomial {
    flip: usize,
    zmask: usize,
    base: u8,
}

impl Monomial {
    pub fn new(p: &PauliOperator) -> Self {
        let n = p.n();
        assert!(n < usize::BITS as usize, "too many qubits for a dense index");
        let to_mask = |bits: &crate::bits::BitVec| bits.ones().fold(0usize, |m, j| m | 1 << (n - 1 - j));
        // Y = iXZ, and Z acts before X on the ket.
        let base = ((p.phase() as usize + p.y_count()) % 4) as u8;
        Self { flip: to_mask(p.x_bits()), zmask: to_mask(p.z_bits()), base }
    }

    /// Coefficient of `P|b⟩` on `|b ⊕ flip⟩`.
    #[inline]
    pub fn coeff(&self, b: usize) -> Complex64 {
        let k = self.base as u32 + 2 * ((self.zmask & b).count_ones() & 1);
        I_POWERS[(k % 4) as usize]
    }

    pub fn flip(&self) -> usize {
        self.flip
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (b, &amp) in v.iter().enumerate() {
            out[b ^ self.flip] = self.coeff(b) * amp;
        }
    }

    /// `v ← (1 + P)/2 · v`.
    pub fn project(&self, v: &mut [Complex64]) {
        let mut pv = vec![Complex64::new(0.0, 0.0); v.len()];
        self.apply(v, &mut pv);
        for (a, b) in v.iter_mut().zip(&pv) {
            *a = (*a + b) * 0.5;
        }
    }

    /// `M ← (1 + P)/2 · M`, column by column.
    pub fn project_left(&self, m: &mut CMatrix) {
        let rows = m.nrows();
        let mut buf = vec![Complex64::new(0.0, 0.0); rows];
        for mut col in m.column_iter_mut() {
            let slice = col.as_mut_slice();
            self.apply(slice, &mut buf);
            for (a, b) in slice.iter_mut().zip(&buf) {
                *a = (*a + b) * 0.5;
            }
        }
    }

    /// `M ← M · (1 + P)/2`, using `(M P)[:, j] = coeff(j) · M[:, j ⊕ flip]`.
    pub fn project_right(&self, m: &mut CMatrix) {
        let original = m.clone();
        for j in 0..m.ncols() {
            let k = self.coeff(j);
            let src = original.column(j ^ self.flip);
            let mut dst = m.column_mut(j);
            for r in 0..dst.len() {
                dst[r] = (dst[r] + k * src[r]) * 0.5;
            }
        }
    }
}

/// Dense matrix of a Pauli operator.
pub fn pauli_matrix(p: &PauliOperator) -> CMatrix {
    let dim = 1usize << p.n();
    let m = Monomial::new(p);
    let mut out = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        out[(b ^ m.flip, b)] = m.coeff(b);
    }
    out
}

/// `∏ (1 + S)/2` as a dense matrix.
pub fn projector_matrix(n: usize, ops: &[PauliOperator]) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::identity(dim, dim);
    for op in ops {
        Monomial::new(op).project_left(&mut m);
    }
    m
}

/// Applies `∏ (1 + S)/2` to a vector in place.
pub fn project_vector(ops: &[PauliOperator], v: &mut [Complex64]) {
    for op in ops {
        Monomial::new(op).project(v);
    }
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `|ψ⟩⟨ψ|`.
pub fn outer(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Vector of i.i.d. complex standard Gaussians (unnormalized).
pub fn gaussian_vector<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    use rand_distr::StandardNormal;
    CVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn projector_application_matches_matrix_products() {
        let ops = [pauli("XZY"), pauli("-ZIZ")];
        let dim = 8;
        let id = CMatrix::identity(dim, dim);
        let half = Complex64::new(0.5, 0.0);
        let explicit = ops.iter().fold(id.clone(), |acc, p| acc * ((&id + pauli_matrix(p)) * half));
        assert!(max_abs_diff(&projector_matrix(3, &ops), &explicit) < 1e-14);

        let mut m = CMatrix::from_fn(dim, dim, |r, c| Complex64::new(r as f64, c as f64 * 0.5));
        let expected = &m * ((&id + pauli_matrix(&ops[0])) * half);
        Monomial::new(&ops[0]).project_right(&mut m);
        assert!(max_abs_diff(&m, &expected) < 1e-12);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // X on qubit 0 maps |000⟩ to |100⟩ = index 4.
        let m = pauli_matrix(&pauli("XII"));
        assert_eq!(m[(4, 0)], Complex64::new(1.0, 0.0));
    }
}
