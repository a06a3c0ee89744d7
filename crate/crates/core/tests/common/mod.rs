//! Test-side generators and reference computations. The references use
//! nalgebra and direct index arithmetic, never the library's own kernels.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use paritybound::{ComplexMatrix, ObservableFamily};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<Complex64>) -> ComplexMatrix {
    let d = m.nrows();
    ComplexMatrix::from_vec(d, (0..d * d).map(|k| m[(k / d, k % d)]).collect()).unwrap()
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvals(m: &ComplexMatrix) -> Vec<f64> {
    let h = to_na(m);
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenvector of the largest eigenvalue.
pub fn top_eigvec(m: &ComplexMatrix) -> Vec<Complex64> {
    let h = to_na(m);
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let k = (0..eig.eigenvalues.len())
        .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap();
    eig.eigenvectors.column(k).iter().copied().collect()
}

pub fn op_norm(m: &ComplexMatrix) -> f64 {
    to_na(m).singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    to_na(m).singular_values().iter().sum()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `(a (x) b)[(i,k),(j,l)] = a[i,j] b[k,l]` by direct indexing.
pub fn naive_kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (a.dim(), b.dim());
    let d = p * q;
    let mut data = vec![c(0.0, 0.0); d * d];
    for i in 0..p {
        for j in 0..p {
            for k in 0..q {
                for l in 0..q {
                    data[(i * q + k) * d + (j * q + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    ComplexMatrix::from_vec(d, data).unwrap()
}

pub fn naive_kron_all(ms: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = naive_kron(&acc, m);
    }
    acc
}

pub fn na_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    from_na(&(to_na(a) * to_na(b)))
}

/// `u_i` as a dense matrix.
pub fn dense_term(fam: &ObservableFamily, i: usize) -> ComplexMatrix {
    naive_kron_all(fam.term(i))
}

/// `B` as a dense matrix.
pub fn dense_b(fam: &ObservableFamily) -> ComplexMatrix {
    let mut acc = dense_term(fam, 0);
    for i in 1..fam.terms() {
        acc = &acc + &dense_term(fam, i);
    }
    acc
}

/// `Re Tr(a b)`.
pub fn trace_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut s = c(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s.re
}

/// Random Hermitian matrix with operator norm in `[0.2, 1]`; occasionally a
/// reflection or a multiple of the identity, so commuting and anticommuting
/// pairs show up.
pub fn random_contraction(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let kind: f64 = rng.random();
    if kind < 0.1 {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return ComplexMatrix::identity(d).scale(s);
    }
    let mut g = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = gaussian(rng);
        }
    }
    let h = (&g + &g.adjoint()).scale(0.5);
    if kind < 0.35 {
        // reflection 2P - I from the spectral signs of h
        let hn = to_na(&h);
        let eig = hn.symmetric_eigen();
        let signs = eig.eigenvalues.map(|v| c(v.signum(), 0.0));
        let r = &eig.eigenvectors * DMatrix::from_diagonal(&signs) * eig.eigenvectors.adjoint();
        let r = from_na(&r);
        return (&r + &r.adjoint()).scale(0.5);
    }
    let scale = rng.random_range(0.2..1.0) / op_norm(&h);
    h.scale(scale)
}

pub fn random_family(rng: &mut ChaCha8Rng, dims: &[usize], m: usize) -> ObservableFamily {
    let ops = (0..m)
        .map(|_| dims.iter().map(|&d| random_contraction(d, rng)).collect())
        .collect();
    ObservableFamily::new(dims.to_vec(), ops).unwrap()
}

/// `G G* / Tr(G G*)` with `G` a `d x rank` complex Gaussian matrix.
pub fn random_density(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = DMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let rho = from_na(&(rho / tr));
    (&rho + &rho.adjoint()).scale(0.5)
}

/// Reduced matrices of a two-site state, by explicit index sums.
pub fn two_site_marginals(rho: &ComplexMatrix, d1: usize, d2: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut a = ComplexMatrix::zeros(d1);
    let mut b = ComplexMatrix::zeros(d2);
    for i in 0..d1 {
        for j in 0..d1 {
            for k in 0..d2 {
                a[(i, j)] += rho[(i * d2 + k, j * d2 + k)];
            }
        }
    }
    for k in 0..d2 {
        for l in 0..d2 {
            for i in 0..d1 {
                b[(k, l)] += rho[(i * d2 + k, i * d2 + l)];
            }
        }
    }
    (a, b)
}

/// `-sum p ln p` over the spectrum.
pub fn von_neumann(m: &ComplexMatrix) -> f64 {
    eigvals(m).iter().filter(|&&p| p > 1e-300).map(|&p| -p * p.ln()).sum()
}

/// `2^(1-n) sum_{|S| even} prod_{S} ||[a,b]|| prod_{not S} ||{a,b}||`,
/// enumerating subsets recursively.
pub fn reference_defect(fam: &ObservableFamily, i: usize, j: usize) -> f64 {
    let n = fam.sites();
    let mut comm = Vec::new();
    let mut anti = Vec::new();
    for r in 0..n {
        let (a, b) = (fam.op(i, r), fam.op(j, r));
        let (ab, ba) = (na_mul(a, b), na_mul(b, a));
        comm.push(op_norm(&(&ab - &ba)));
        anti.push(op_norm(&(&ab + &ba)));
    }
    fn rec(r: usize, parity: usize, acc: f64, comm: &[f64], anti: &[f64]) -> f64 {
        if r == comm.len() {
            return if parity.is_multiple_of(2) { acc } else { 0.0 };
        }
        rec(r + 1, parity + 1, acc * comm[r], comm, anti) + rec(r + 1, parity, acc * anti[r], comm, anti)
    }
    2f64.powi(1 - n as i32) * rec(0, 0, 1.0, &comm, &anti)
}

/// Random traceless Hermitian contraction.
pub fn random_centered(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let h = random_contraction(d, rng);
    let shift = h.trace().re / d as f64;
    let h = &h - &ComplexMatrix::identity(d).scale(shift);
    let norm = op_norm(&h);
    if norm < 1e-8 {
        // h was a multiple of the identity up to rounding
        return ComplexMatrix::zeros(d);
    }
    h.scale(rng.random_range(0.3..1.0) / norm)
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    g.qr().q()
}

/// Pauli string given as site labels in `0..4` (I, X, Y, Z).
pub fn pauli_string(labels: &[u8]) -> Vec<ComplexMatrix> {
    labels
        .iter()
        .map(|&l| match l {
            0 => paritybound::pauli::identity(),
            1 => paritybound::pauli::x(),
            2 => paritybound::pauli::y(),
            _ => paritybound::pauli::z(),
        })
        .collect()
}

/// `u . sigma` for a uniformly random unit vector `u`.
pub fn random_bloch_reflection(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let v: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let [x, y, z] = v.map(|t| t / n);
    ComplexMatrix::from_rows(&[vec![c(z, 0.0), c(x, -y)], vec![c(x, y), c(-z, 0.0)]]).unwrap()
}
