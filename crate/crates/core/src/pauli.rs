//! Pauli matrices and a few standard qubit states.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

fn m2(entries: [(f64, f64); 4]) -> ComplexMatrix {
    let data = entries.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    ComplexMatrix::from_vec(2, data).expect("2x2")
}

pub fn identity() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn x() -> ComplexMatrix {
    m2([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
}

pub fn y() -> ComplexMatrix {
    m2([(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)])
}

pub fn z() -> ComplexMatrix {
    m2([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)])
}

/// `|0><0|`
pub fn ket0_projector() -> ComplexMatrix {
    m2([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])
}

/// `|1><1|`
pub fn ket1_projector() -> ComplexMatrix {
    m2([(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])
}

/// Projector onto `(|00> + |11>) / sqrt(2)`.
pub fn bell_phi_plus() -> ComplexMatrix {
    ghz_projector(2)
}

/// Projector onto `(|0...0> + |1...1>) / sqrt(2)` on `n` qubits.
pub fn ghz_projector(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim);
    let half = Complex64::new(0.5, 0.0);
    for &i in &[0, dim - 1] {
        for &j in &[0, dim - 1] {
            m[(i, j)] = half;
        }
    }
    m
}

/// Density matrix `(I + bx X + by Y + bz Z) / 2` for a Bloch vector with `|b| <= 1`.
pub fn bloch_state(b: [f64; 3]) -> ComplexMatrix {
    let [bx, by, bz] = b;
    m2([
        ((1.0 + bz) / 2.0, 0.0),
        (bx / 2.0, -by / 2.0),
        (bx / 2.0, by / 2.0),
        ((1.0 - bz) / 2.0, 0.0),
    ])
}

/// Real Bloch coefficients `(Tr(aX)/2, Tr(aY)/2, Tr(aZ)/2)` of a 2x2 Hermitian matrix.
pub fn bloch_vector(a: &ComplexMatrix) -> [f64; 3] {
    let t = |p: &ComplexMatrix| a.trace_product(p).expect("2x2").re / 2.0;
    [t(&x()), t(&y()), t(&z())]
}
