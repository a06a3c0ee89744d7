//! Built-in observable families and states, generated from the Pauli matrices.

use std::f64::consts::SQRT_2;

use crate::linalg::ComplexMatrix;
use crate::observable::ObservableFamily;
use crate::pauli::{x, y, z};

fn family(dims: Vec<usize>, ops: Vec<Vec<ComplexMatrix>>) -> ObservableFamily {
    ObservableFamily::new(dims, ops).expect("built-in fixture is valid")
}

/// `B = XYX + XYZ + ZZZ` on three qubits.
pub fn tripartite_pauli() -> ObservableFamily {
    family(
        vec![2, 2, 2],
        vec![vec![x(), y(), x()], vec![x(), y(), z()], vec![z(), z(), z()]],
    )
}

/// CHSH operator `A1 B1 + A1 B2 + A2 B1 - A2 B2` with `A1 = Z`, `A2 = X`,
/// `B1 = (Z + X)/sqrt 2`, `B2 = (Z - X)/sqrt 2`.
pub fn chsh() -> ObservableFamily {
    let (a1, a2) = (z(), x());
    let b1 = (&z() + &x()).scale(1.0 / SQRT_2);
    let b2 = (&z() - &x()).scale(1.0 / SQRT_2);
    family(
        vec![2, 2],
        vec![
            vec![a1.clone(), b1.clone()],
            vec![a1, b2.clone()],
            vec![a2.clone(), b1],
            vec![a2, -&b2],
        ],
    )
}

/// `B = X^(x)n + Y^(x)n + Z^(x)n`.
pub fn pauli_site(n: usize) -> ObservableFamily {
    assert!(n >= 1, "pauli-site family needs at least one site");
    family(vec![2; n], [x(), y(), z()].iter().map(|p| vec![p.clone(); n]).collect())
}
