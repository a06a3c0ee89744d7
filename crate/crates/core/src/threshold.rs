//! Product-state threshold `sup_{sigma in P} Tr(sigma B)`: see-saw lower
//! estimates, the local l2 site constants `C_r`, and the explicit upper bound
//! `prod_r C_r^(1/2)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{validation, Result};
use crate::linalg::{hermitian_eig, kron_all, ComplexMatrix, PSD_TOL};
use crate::observable::ObservableFamily;

/// Eigenvalue gap below which a top eigenvalue counts as degenerate.
const TIE_TOL: f64 = 1e-12;
const L2_MAX_ITERS: usize = 1000;
const L2_TOL: f64 = 1e-15;

/// A product state `sigma^(1) (x) ... (x) sigma^(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductState {
    factors: Vec<ComplexMatrix>,
}

impl ProductState {
    /// Each factor must be Hermitian PSD with unit trace.
    pub fn new(factors: Vec<ComplexMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(validation("product state needs at least one factor"));
        }
        let mut checked = Vec::with_capacity(factors.len());
        for (r, f) in factors.into_iter().enumerate() {
            checked.push(check_density(f).map_err(|e| validation(format!("factor {r}: {e}")))?);
        }
        Ok(Self { factors: checked })
    }

    /// Product of pure states: each vector is normalized before use.
    pub fn pure(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let factors = vectors
            .iter()
            .map(|v| {
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(norm > 0.0) {
                    return Err(validation("zero state vector"));
                }
                let unit: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
                Ok(ComplexMatrix::projector(&unit))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(ComplexMatrix::dim).collect()
    }

    /// Dense tensor product.
    pub fn to_dense(&self, max_dim: usize) -> Result<ComplexMatrix> {
        kron_all(&self.factors, max_dim)
    }
}

fn check_density(m: ComplexMatrix) -> Result<ComplexMatrix> {
    let h = m.checked_hermitian()?;
    let tr = h.trace().re;
    if (tr - 1.0).abs() > 1e-12 {
        return Err(validation(format!("trace is {tr}, expected 1")));
    }
    let eig = hermitian_eig(&h)?;
    if eig.values[0] < -PSD_TOL {
        return Err(validation(format!(
            "not positive semidefinite (eigenvalue {:e})",
            eig.values[0]
        )));
    }
    Ok(h)
}

/// `(Tr(sigma_r a_i^(r)))_i` for one site.
pub fn expectation_vector(fam: &ObservableFamily, site: usize, sigma: &ComplexMatrix) -> Result<Vec<f64>> {
    if site >= fam.sites() {
        return Err(validation(format!(
            "site {site} out of range for {} sites",
            fam.sites()
        )));
    }
    if sigma.dim() != fam.dims()[site] {
        return Err(validation(format!(
            "state on site {site} has dim {}, expected {}",
            sigma.dim(),
            fam.dims()[site]
        )));
    }
    (0..fam.terms())
        .map(|i| Ok(sigma.trace_product(fam.op(i, site))?.re))
        .collect()
}

/// `Tr(sigma B) = sum_i prod_r Tr(sigma_r a_i^(r))`, without building `B`.
pub fn product_value(fam: &ObservableFamily, sigma: &ProductState) -> Result<f64> {
    if sigma.factors.len() != fam.sites() {
        return Err(validation(format!(
            "product state has {} factors, family has {} sites",
            sigma.factors.len(),
            fam.sites()
        )));
    }
    let xs = sigma
        .factors
        .iter()
        .enumerate()
        .map(|(r, s)| expectation_vector(fam, r, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(multilinear_value(&xs))
}

fn multilinear_value(xs: &[Vec<f64>]) -> f64 {
    let m = xs[0].len();
    (0..m).map(|i| xs.iter().map(|x| x[i]).product::<f64>()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// Best product value found, with the product state that attains it.
///
/// `gamma` is a certified lower bound on the threshold; no global optimality
/// is claimed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub gamma: f64,
    pub certificate: ProductState,
    pub restarts_used: usize,
    /// Sweeps performed by the winning restart.
    pub iterations: usize,
    /// Whether the winning restart met the tolerance before `max_iters`.
    pub converged: bool,
    /// Site updates (winning restart) whose top eigenvalue was degenerate.
    pub degenerate_updates: usize,
}

/// Trajectory of one see-saw run.
#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub state: ProductState,
    pub value: f64,
    /// Objective before the first sweep followed by the value after each sweep.
    pub history: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    pub degenerate_updates: usize,
}

/// Random pure product state from normalized complex Gaussian vectors.
pub fn random_pure_product<R: Rng>(dims: &[usize], rng: &mut R) -> ProductState {
    let vectors: Vec<Vec<Complex64>> = dims
        .iter()
        .map(|&d| {
            (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    ProductState::pure(&vectors).expect("Gaussian vector is nonzero")
}

/// Coordinate ascent from `init`: each site is replaced by the top-eigenvector
/// projector of its effective operator `K_r = sum_i (prod_{s != r} x_i^(s)) a_i^(r)`.
pub fn seesaw_from(fam: &ObservableFamily, init: ProductState, max_iters: usize, tol: f64) -> Result<SeesawRun> {
    let n = fam.sites();
    let m = fam.terms();
    let mut factors = init.factors;
    if factors.len() != n {
        return Err(validation(format!(
            "initial state has {} factors, family has {n} sites",
            factors.len()
        )));
    }
    let mut xs = factors
        .iter()
        .enumerate()
        .map(|(r, s)| expectation_vector(fam, r, s))
        .collect::<Result<Vec<_>>>()?;
    let mut value = multilinear_value(&xs);
    let mut history = vec![value];
    let mut converged = false;
    let mut sweeps = 0;
    let mut ties = 0;

    while sweeps < max_iters {
        sweeps += 1;
        let before = value;
        for r in 0..n {
            let d = fam.dims()[r];
            let mut k = ComplexMatrix::zeros(d);
            for i in 0..m {
                let coef: f64 = (0..n).filter(|&s| s != r).map(|s| xs[s][i]).product();
                if coef != 0.0 {
                    k = &k + &fam.op(i, r).scale(coef);
                }
            }
            let eig = hermitian_eig(&k)?;
            if eig.top_multiplicity(TIE_TOL) > 1 {
                ties += 1;
            }
            let (_, v) = eig.top();
            factors[r] = ComplexMatrix::projector(&v);
            xs[r] = expectation_vector(fam, r, &factors[r])?;
        }
        value = multilinear_value(&xs);
        history.push(value);
        if value - before < tol {
            converged = true;
            break;
        }
    }

    Ok(SeesawRun {
        state: ProductState { factors },
        value,
        history,
        sweeps,
        converged,
        degenerate_updates: ties,
    })
}

/// Generator for restart `stream` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multi-restart see-saw estimate of the product threshold.
///
/// Restarts run in parallel on independent seeded streams; the winner is the
/// lowest restart index among those with the largest value.
pub fn seesaw_threshold(fam: &ObservableFamily, opts: &SeesawOptions) -> Result<ThresholdResult> {
    if opts.restarts == 0 {
        return Err(validation("see-saw needs at least one restart"));
    }
    let runs: Vec<SeesawRun> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = restart_rng(opts.seed, k as u64);
            let init = random_pure_product(fam.dims(), &mut rng);
            seesaw_from(fam, init, opts.max_iters, opts.tol)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, run) in runs.iter().enumerate().skip(1) {
        if run.value > runs[best].value {
            best = k;
        }
    }
    let run = runs.into_iter().nth(best).expect("at least one restart");
    let gamma = product_value(fam, &run.state)?;
    Ok(ThresholdResult {
        gamma,
        certificate: run.state,
        restarts_used: opts.restarts,
        iterations: run.sweeps,
        converged: run.converged,
        degenerate_updates: run.degenerate_updates,
    })
}

/// `max_sigma sum_i Tr(sigma a_i^(r))^2` at one site, as attained by a local
/// state found by search. Never above the true constant; see
/// [`l2_site_constant_bound`] for a value that is never below it.
///
/// The objective is convex in `sigma`, so the search runs over pure states with
/// the conditional-gradient update `sigma <- top projector of sum_i x_i a_i`.
/// For qubit sites with traceless operators the closed form
/// `lambda_max(sum_i w_i w_i^T)` over Bloch vectors is also evaluated and the
/// larger of the two is returned.
pub fn l2_site_constant(fam: &ObservableFamily, site: usize, restarts: usize, seed: u64) -> Result<f64> {
    if site >= fam.sites() {
        return Err(validation(format!(
            "site {site} out of range for {} sites",
            fam.sites()
        )));
    }
    if restarts == 0 {
        return Err(validation("site constant needs at least one restart"));
    }
    let d = fam.dims()[site];
    let ops = fam.site_ops(site);
    let objective =
        |sigma: &ComplexMatrix| -> Result<Vec<f64>> { ops.iter().map(|a| Ok(sigma.trace_product(a)?.re)).collect() };

    let mut best = 0.0f64;
    for k in 0..restarts {
        let mut rng = restart_rng(seed, ((site as u64) << 32) | k as u64);
        let init = random_pure_product(&[d], &mut rng);
        let sigma = init.factors.into_iter().next().expect("one factor");
        let mut x = objective(&sigma)?;
        let mut value: f64 = x.iter().map(|v| v * v).sum();
        for _ in 0..L2_MAX_ITERS {
            let mut grad = ComplexMatrix::zeros(d);
            for (a, &xi) in ops.iter().zip(&x) {
                grad = &grad + &a.scale(xi);
            }
            let (_, v) = hermitian_eig(&grad)?.top();
            let next_x = objective(&ComplexMatrix::projector(&v))?;
            let next_value: f64 = next_x.iter().map(|v| v * v).sum();
            let improved = next_value - value;
            if improved > 0.0 {
                x = next_x;
                value = next_value;
            }
            if improved < L2_TOL {
                break;
            }
        }
        best = best.max(value);
    }

    if let Some(closed) = qubit_closed_form(&ops)? {
        best = best.max(closed);
    }
    Ok(best)
}

/// `lambda_max(sum_i w_i w_i^T)` when every operator is a traceless qubit operator.
fn qubit_closed_form(ops: &[&ComplexMatrix]) -> Result<Option<f64>> {
    if ops.iter().any(|a| a.dim() != 2 || a.trace().norm() / 2.0 > 1e-12) {
        return Ok(None);
    }
    let mut gram = [0.0f64; 9];
    for a in ops {
        let w = crate::pauli::bloch_vector(a);
        for p in 0..3 {
            for q in 0..3 {
                gram[p * 3 + q] += w[p] * w[q];
            }
        }
    }
    let g = ComplexMatrix::from_real(3, &gram)?;
    Ok(hermitian_eig(&g)?.values.last().copied())
}

/// Upper bound on the site constant valid for every state:
/// `(||c|| + (lambda_max(G) (1 - 1/d))^(1/2))^2` with `c_i = Tr(a_i)/d` and
/// `G_ij = Re Tr(a_i^0 a_j^0)` over the traceless parts. Equals the site
/// constant for traceless qubit operators.
pub fn l2_site_constant_bound(fam: &ObservableFamily, site: usize) -> Result<f64> {
    if site >= fam.sites() {
        return Err(validation(format!(
            "site {site} out of range for {} sites",
            fam.sites()
        )));
    }
    let d = fam.dims()[site];
    let ops = fam.site_ops(site);
    let m = ops.len();
    let id = ComplexMatrix::identity(d);
    let means: Vec<f64> = ops.iter().map(|a| a.trace().re / d as f64).collect();
    let centered: Vec<ComplexMatrix> = ops.iter().zip(&means).map(|(a, &c)| *a - &id.scale(c)).collect();
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let g = centered[i].trace_product(&centered[j])?.re;
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let top = hermitian_eig(&ComplexMatrix::from_real(m, &gram)?)?
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    let offset = means.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok((offset + (top * (1.0 - 1.0 / d as f64)).sqrt()).powi(2))
}

/// [`l2_site_constant_bound`] for every site.
pub fn l2_site_constant_bounds(fam: &ObservableFamily) -> Result<Vec<f64>> {
    (0..fam.sites()).map(|r| l2_site_constant_bound(fam, r)).collect()
}

/// Site constants for every site.
pub fn l2_site_constants(fam: &ObservableFamily, restarts: usize, seed: u64) -> Result<Vec<f64>> {
    (0..fam.sites())
        .map(|r| l2_site_constant(fam, r, restarts, seed))
        .collect()
}

/// `prod_r C_r^(1/2)`. The estimate pairs two sites by Cauchy-Schwarz, so
/// it needs at least two; one site gives no bound (try `a_1 = a_2 = I`).
pub fn explicit_threshold_bound(constants: &[f64]) -> Result<f64> {
    if constants.len() < 2 {
        return Err(validation(format!(
            "explicit bound needs at least two sites, got {}",
            constants.len()
        )));
    }
    if let Some((r, c)) = constants.iter().enumerate().find(|(_, c)| !(**c >= 0.0)) {
        return Err(validation(format!("site constant {r} is {c}, must be >= 0")));
    }
    Ok(constants.iter().map(|c| c.sqrt()).product())
}
