//! Total correlation `D(rho || rho_1 (x) ... (x) rho_n)`, the excess above a
//! product threshold, and the trace-distance and Pinsker-type lower bounds
//! that follow from the defect denominator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::linalg::{
    hermitian_eig, kron_all, partial_trace, strides, trace_norm, ComplexMatrix, DEFAULT_LOG_CLAMP, PSD_TOL,
};
use crate::observable::{DefectReport, ObservableFamily};
use crate::threshold::{explicit_threshold_bound, ProductState};

/// A reference eigenvalue below the clamp may carry at most this much weight of `rho`.
pub const SUPPORT_WEIGHT_TOL: f64 = 1e-8;
/// Negative total correlation within this margin is rounded to zero.
pub const NEGATIVE_ENTROPY_TOL: f64 = 1e-9;

/// Density matrix on `H_1 (x) ... (x) H_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityState {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityState {
    /// Checks Hermiticity, unit trace (`1e-12`) and positivity (`-1e-10`).
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(validation(format!("invalid site dimensions {dims:?}")));
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if total != Some(matrix.dim()) {
            return Err(validation(format!(
                "site dimensions {dims:?} do not match state dimension {}",
                matrix.dim()
            )));
        }
        let matrix = matrix.checked_hermitian()?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(validation(format!("state trace is {tr}, expected 1")));
        }
        let min = hermitian_eig(&matrix)?.values[0];
        if min < -PSD_TOL {
            return Err(validation(format!(
                "state is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(Self { dims, matrix })
    }

    /// Normalized pure state `|psi><psi|`.
    pub fn pure(dims: Vec<usize>, psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(validation("zero state vector"));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(dims, ComplexMatrix::projector(&unit))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::new(dims, ComplexMatrix::identity(d).scale(1.0 / d as f64))
    }

    pub fn from_product(sigma: &ProductState, max_dim: usize) -> Result<Self> {
        Self::new(sigma.dims(), sigma.to_dense(max_dim)?)
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        Self { dims, matrix }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn sites(&self) -> usize {
        self.dims.len()
    }

    /// Marginal `rho_r` (zero-based site index).
    pub fn marginal(&self, site: usize) -> Result<ComplexMatrix> {
        Ok(partial_trace(&self.matrix, &self.dims, site)?.hermitian_part())
    }

    pub fn marginals(&self) -> Result<Vec<ComplexMatrix>> {
        (0..self.sites()).map(|r| self.marginal(r)).collect()
    }

    /// `rho_1 (x) ... (x) rho_n`.
    pub fn marginal_product(&self) -> Result<ComplexMatrix> {
        kron_all(&self.marginals()?, usize::MAX)
    }

    /// `Re Tr(rho A)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        Ok(self.matrix.trace_product(op)?.re)
    }
}

/// `sum lambda ln lambda` over eigenvalues at or above `clamp`.
pub fn negative_entropy(m: &ComplexMatrix, clamp: f64) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(eig.values.iter().filter(|&&v| v >= clamp).map(|&v| v * v.ln()).sum())
}

/// Total correlation with the default eigenvalue clamp.
pub fn total_correlation(rho: &DensityState) -> Result<f64> {
    total_correlation_with(rho, DEFAULT_LOG_CLAMP)
}

/// `Tr(rho ln rho) - Tr(rho ln (rho_1 (x) ... (x) rho_n))`, natural log.
///
/// The reference state is diagonalized factor by factor, so its eigenvalues
/// are products of marginal eigenvalues and its logarithm is a sum of local
/// logarithms. A product eigenvector whose local eigenvalue falls below
/// `clamp` contributes nothing, provided `rho` puts at most
/// [`SUPPORT_WEIGHT_TOL`] weight on it.
pub fn total_correlation_with(rho: &DensityState, clamp: f64) -> Result<f64> {
    let marginal_eigs = rho.marginals()?.iter().map(hermitian_eig).collect::<Result<Vec<_>>>()?;
    let basis = kron_all(marginal_eigs.iter().map(|e| &e.vectors), usize::MAX)?;
    let st = strides(rho.dims());
    let n = rho.matrix.dim();
    let rho_m = &rho.matrix;

    let mut cross = 0.0;
    for k in 0..n {
        // weight <v_k| rho |v_k>
        let mut w = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let vi = basis[(i, k)].conj();
            if vi.re == 0.0 && vi.im == 0.0 {
                continue;
            }
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += rho_m[(i, j)] * basis[(j, k)];
            }
            w += vi * row;
        }
        let w = w.re;
        let mut log_mu = 0.0;
        let mut below = None;
        for (r, e) in marginal_eigs.iter().enumerate() {
            let lam = e.values[(k / st[r]) % rho.dims[r]];
            if lam < clamp {
                below = Some(lam);
                break;
            }
            log_mu += lam.ln();
        }
        match below {
            Some(lam) if w > SUPPORT_WEIGHT_TOL => {
                return Err(Error::Support {
                    eigenvalue: lam,
                    weight: w,
                });
            }
            Some(_) => {}
            None => cross += w * log_mu,
        }
    }

    let value = negative_entropy(rho_m, clamp)? - cross;
    if value < -NEGATIVE_ENTROPY_TOL {
        return Err(Error::Numeric(format!(
            "total correlation came out negative ({value:e})"
        )));
    }
    Ok(value.max(0.0))
}

/// `||rho - rho_1 (x) ... (x) rho_n||_1`.
pub fn marginal_trace_distance(rho: &DensityState) -> Result<f64> {
    trace_norm(&(&rho.matrix - &rho.marginal_product()?))
}

fn check_dims(fam: &ObservableFamily, rho: &DensityState) -> Result<()> {
    if fam.dims() != rho.dims() {
        return Err(validation(format!(
            "family dims {:?} do not match state dims {:?}",
            fam.dims(),
            rho.dims()
        )));
    }
    Ok(())
}

/// `Tr(rho B)`, summed term by term.
pub fn observable_expectation(fam: &ObservableFamily, rho: &DensityState, max_dim: usize) -> Result<f64> {
    check_dims(fam, rho)?;
    let mut total = 0.0;
    for i in 0..fam.terms() {
        total += rho.expectation(&fam.term_operator(i, max_dim)?)?;
    }
    Ok(total)
}

/// `(Tr(rho B) - gamma)_+`.
pub fn excess(fam: &ObservableFamily, rho: &DensityState, gamma: f64, max_dim: usize) -> Result<f64> {
    Ok(positive_part(observable_expectation(fam, rho, max_dim)? - gamma))
}

pub fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

fn check_denominator(denominator: f64) -> Result<()> {
    if !(denominator > 0.0) {
        return Err(validation(format!("denominator must be positive, got {denominator}")));
    }
    Ok(())
}

/// `excess / denominator^(1/2)`: lower bound on the trace distance to the product set.
pub fn trace_distance_lower_bound(excess: f64, denominator: f64) -> Result<f64> {
    check_denominator(denominator)?;
    Ok(excess / denominator.sqrt())
}

/// `excess^2 / (2 denominator)`: lower bound on the total correlation.
pub fn itot_lower_bound(excess: f64, denominator: f64) -> Result<f64> {
    check_denominator(denominator)?;
    Ok(excess * excess / (2.0 * denominator))
}

/// Where the threshold value in a report came from.
///
/// The lower bounds are valid only when `gamma_used` is at least the true
/// product threshold, i.e. for [`Exact`](Self::Exact) and
/// [`CertifiedUpperBound`](Self::CertifiedUpperBound).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaProvenance {
    /// Known closed-form threshold.
    Exact,
    /// `prod_r C_r^(1/2)` or another proven upper bound.
    CertifiedUpperBound,
    /// See-saw estimate: a lower bound on the threshold, so the bounds are heuristic.
    HeuristicEstimate,
    /// Supplied by the caller without a stated guarantee.
    UserSupplied,
}

impl GammaProvenance {
    pub fn bounds_certified(self) -> bool {
        matches!(self, Self::Exact | Self::CertifiedUpperBound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub expectation: f64,
    pub gamma_used: f64,
    pub gamma_provenance: GammaProvenance,
    pub excess: f64,
    pub denominator: f64,
    pub trace_dist_lb: f64,
    pub itot_lb: f64,
    pub itot_exact: Option<f64>,
    /// `itot_exact - itot_lb`.
    pub gap: Option<f64>,
    /// `||rho - rho_1 (x) ... (x) rho_n||_1`, filled together with `itot_exact`.
    pub marginal_trace_distance: Option<f64>,
}

/// Full excess / bound chain for one state and threshold value.
pub fn correlation_report(
    fam: &ObservableFamily,
    rho: &DensityState,
    gamma: f64,
    provenance: GammaProvenance,
    defects: &DefectReport,
    compute_exact: bool,
    max_dim: usize,
) -> Result<CorrelationReport> {
    if defects.terms != fam.terms() || defects.sites != fam.sites() {
        return Err(validation("defect report does not belong to this family"));
    }
    let expectation = observable_expectation(fam, rho, max_dim)?;
    let excess = positive_part(expectation - gamma);
    let denominator = defects.denominator;
    let itot_lb = itot_lower_bound(excess, denominator)?;
    let (itot_exact, distance) = if compute_exact {
        (Some(total_correlation(rho)?), Some(marginal_trace_distance(rho)?))
    } else {
        (None, None)
    };
    Ok(CorrelationReport {
        expectation,
        gamma_used: gamma,
        gamma_provenance: provenance,
        excess,
        denominator,
        trace_dist_lb: trace_distance_lower_bound(excess, denominator)?,
        itot_lb,
        itot_exact,
        gap: itot_exact.map(|v| v - itot_lb),
        marginal_trace_distance: distance,
    })
}

/// Bound chain with the explicit threshold `prod_r C_r^(1/2)`. The result is
/// a valid bound only if every `constants[r]` satisfies the site condition,
/// e.g. values from [`crate::threshold::l2_site_constants`].
pub fn explicit_itot_bound(
    fam: &ObservableFamily,
    rho: &DensityState,
    constants: &[f64],
    defects: &DefectReport,
    compute_exact: bool,
    max_dim: usize,
) -> Result<CorrelationReport> {
    if constants.len() != fam.sites() {
        return Err(validation(format!(
            "expected {} site constants, got {}",
            fam.sites(),
            constants.len()
        )));
    }
    let gamma = explicit_threshold_bound(constants)?;
    correlation_report(
        fam,
        rho,
        gamma,
        GammaProvenance::CertifiedUpperBound,
        defects,
        compute_exact,
        max_dim,
    )
}
