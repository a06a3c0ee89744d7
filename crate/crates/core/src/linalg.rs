//! Dense complex linear algebra sized for small tensor-product spaces.
//!
//! Everything here works on [`ComplexMatrix`], a square row-major matrix of
//! `Complex64` entries. Spectral routines run through a cyclic Jacobi
//! eigensolver for Hermitian input, which is deterministic for identical
//! input bits and accurate to a few ulps on the desk-scale problems this crate
//! targets.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{validation, Error, Result};

/// Maximum entrywise deviation `|a - a*|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalue floor used by [`matrix_log_psd`].
pub const DEFAULT_LOG_CLAMP: f64 = 1e-14;
/// Default cap on the dimension of any assembled tensor-product operator.
pub const DEFAULT_MAX_DIM: usize = 4096;
/// Eigenvalues below `-PSD_TOL` make a matrix non-PSD.
pub const PSD_TOL: f64 = 1e-10;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Numeric knobs shared by the higher-level modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    pub hermitian_tol: f64,
    pub log_clamp: f64,
    pub max_dim: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: HERMITIAN_TOL,
            log_clamp: DEFAULT_LOG_CLAMP,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Square dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries, rejecting non-finite values.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(validation("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(validation(format!(
                "non-finite entry at ({}, {})",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(validation(format!("row {i} has {} entries, expected {dim}", r.len())));
        }
        Self::from_vec(dim, rows.iter().flatten().copied().collect())
    }

    /// Real-valued row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        check_same_dim(self, other)?;
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self[(i, j)] * other[(j, i)];
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(self.matmul_unchecked(other))
    }

    fn matmul_unchecked(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - self*`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `(self + self*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// Maximum entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Validates Hermiticity at [`HERMITIAN_TOL`] and returns the exactly Hermitian part.
    pub fn checked_hermitian(&self) -> Result<Self> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(validation(format!(
                "matrix is not Hermitian (max |a - a*| = {defect:e})"
            )));
        }
        Ok(self.hermitian_part())
    }
}

/// Serialized as row-major nested arrays of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut rows = serializer.serialize_seq(Some(self.dim))?;
        for i in 0..self.dim {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|z| [z.re, z.im]).collect();
            rows.serialize_element(&row)?;
        }
        rows.end()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(validation(format!("dimension mismatch: {} vs {}", a.dim, b.dim)));
    }
    Ok(())
}

fn zip_with(a: &ComplexMatrix, b: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> ComplexMatrix {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    ComplexMatrix {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.matmul_unchecked(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Kronecker product checked against [`DEFAULT_MAX_DIM`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_capped(a, b, DEFAULT_MAX_DIM)
}

/// Kronecker product; block `(p, q)` of the result is `a[p][q] * b`.
pub fn kron_capped(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let dim = a.dim.checked_mul(b.dim).ok_or(Error::Capacity {
        dim: usize::MAX,
        cap: max_dim,
    })?;
    if dim > max_dim {
        return Err(Error::Capacity { dim, cap: max_dim });
    }
    let (na, nb) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(dim);
    for p in 0..na {
        for q in 0..na {
            let s = a[(p, q)];
            for i in 0..nb {
                for j in 0..nb {
                    out[(p * nb + i, q * nb + j)] = s * b[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

/// Left-to-right Kronecker product of a nonempty list of factors.
pub fn kron_all<'a, I>(factors: I, max_dim: usize) -> Result<ComplexMatrix>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let mut iter = factors.into_iter();
    let first = iter.next().ok_or_else(|| validation("kron of an empty factor list"))?;
    if first.dim > max_dim {
        return Err(Error::Capacity {
            dim: first.dim,
            cap: max_dim,
        });
    }
    iter.try_fold(first.clone(), |acc, f| kron_capped(&acc, f, max_dim))
}

/// Kronecker product of vectors, same ordering as [`kron`].
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(a, b)?;
    Ok(&(a * b) - &(b * a))
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(a, b)?;
    Ok(&(a * b) + &(b * a))
}

/// Spectral decomposition `A = V diag(values) V*` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
    /// Jacobi sweeps performed.
    pub sweeps: usize,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// Eigenvector of the largest eigenvalue. Among exactly tied top eigenvalues the
    /// one listed last in ascending order is returned.
    pub fn top(&self) -> (f64, Vec<Complex64>) {
        let k = self.values.len() - 1;
        (self.values[k], self.vector(k))
    }

    /// Number of eigenvalues within `tol` of the largest one.
    pub fn top_multiplicity(&self, tol: f64) -> usize {
        let top = *self.values.last().expect("nonempty spectrum");
        self.values.iter().filter(|&&v| top - v <= tol).count()
    }

    /// `V diag(f(values)) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.vectors[(i, k)] * self.vectors[(j, k)].conj() * fv[k];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix (checked at [`HERMITIAN_TOL`]).
///
/// The input is symmetrized after the check so the solver sees exactly
/// Hermitian data. Eigenvalues come back ascending; ties keep the order in
/// which the Jacobi iteration left them on the diagonal.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let h = a.checked_hermitian()?;
    jacobi_eig(h)
}

fn jacobi_eig(mut a: ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.dim();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let mut sweeps = 0;

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    if scale > 0.0 {
        loop {
            let off = off_norm(&a);
            if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
                break;
            }
            if sweeps >= MAX_JACOBI_SWEEPS {
                return Err(Error::NoConvergence { sweeps, residual: off });
            }
            sweeps += 1;
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

/// One complex Jacobi rotation annihilating `a[(p, q)]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Diagonal tiny relative to both entries: annihilate without rotating.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Operator (spectral) norm. Hermitian input uses `max |eigenvalue|`; anything
/// else uses the square root of the top eigenvalue of `a* a`.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.is_hermitian(HERMITIAN_TOL) {
        let eig = hermitian_eig(a)?;
        Ok(eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    } else {
        let gram = &a.adjoint() * a;
        let eig = jacobi_eig(gram.hermitian_part())?;
        Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }
}

/// Trace norm (sum of singular values).
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.is_hermitian(HERMITIAN_TOL) {
        let eig = hermitian_eig(a)?;
        Ok(eig.values.iter().map(|v| v.abs()).sum())
    } else {
        let gram = &a.adjoint() * a;
        let eig = jacobi_eig(gram.hermitian_part())?;
        Ok(eig.values.iter().map(|v| v.max(0.0).sqrt()).sum())
    }
}

/// `V diag(log max(lambda, clamp)) V*` for a Hermitian PSD matrix.
pub fn matrix_log_psd(a: &ComplexMatrix, clamp: f64) -> Result<ComplexMatrix> {
    if !(clamp > 0.0) {
        return Err(validation(format!("log clamp must be positive, got {clamp}")));
    }
    let eig = hermitian_eig(a)?;
    if let Some(&min) = eig.values.first() {
        if min < -PSD_TOL {
            return Err(validation(format!(
                "matrix is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
    }
    Ok(eig.apply(|v| v.max(clamp).ln()))
}

/// Row-major strides for a tensor-product index: site 0 is most significant.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        s[r] = s[r + 1] * dims[r + 1];
    }
    s
}

fn check_site_layout(m: &ComplexMatrix, dims: &[usize], site: usize) -> Result<()> {
    if site >= dims.len() {
        return Err(validation(format!(
            "site index {site} out of range for {} sites",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if total != m.dim() {
        return Err(validation(format!(
            "site dimensions {dims:?} multiply to {total}, matrix has dim {}",
            m.dim()
        )));
    }
    Ok(())
}

/// Reduced matrix on `site`, tracing out every other site.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], site: usize) -> Result<ComplexMatrix> {
    check_site_layout(m, dims, site)?;
    let d = dims[site];
    let stride = strides(dims)[site];
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..m.dim() {
        let a = (i / stride) % d;
        let base = i - a * stride;
        for b in 0..d {
            out[(a, b)] += m[(i, base + b * stride)];
        }
    }
    Ok(out)
}

/// `I_r / d_r (x) Tr_r(m)` with the identity reinserted at `site`.
pub fn mix_site(m: &ComplexMatrix, dims: &[usize], site: usize) -> Result<ComplexMatrix> {
    check_site_layout(m, dims, site)?;
    let d = dims[site];
    let stride = strides(dims)[site];
    let n = m.dim();
    let inv_d = 1.0 / d as f64;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let ir = (i / stride) % d;
        let ibase = i - ir * stride;
        for j in 0..n {
            let jr = (j / stride) % d;
            if ir != jr {
                continue;
            }
            let jbase = j - jr * stride;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += m[(ibase + k * stride, jbase + k * stride)];
            }
            out[(i, j)] = acc * inv_d;
        }
    }
    Ok(out)
}
