//! Observable families `B = sum_i a_i^(1) (x) ... (x) a_i^(n)`, their parity
//! defect weights and the resulting norm bound `||B||^2 <= m + sum phi_ij`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{validation, Result};
use crate::linalg::{anticommutator, commutator, kron_all, operator_norm, ComplexMatrix, HERMITIAN_TOL};

/// Local operators may exceed unit norm by this much (rounding on exact unitaries).
pub const CONTRACTION_TOL: f64 = 1e-9;
/// Upper limit on the site count for the even-subset enumeration.
pub const MAX_PARITY_SITES: usize = 30;

/// Table of local self-adjoint contractions; `op(i, r)` acts on site `r` of term `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableFamily {
    dims: Vec<usize>,
    ops: Vec<Vec<ComplexMatrix>>,
}

impl ObservableFamily {
    /// Validates shapes, Hermiticity and the contraction property. Operators are
    /// stored symmetrized.
    pub fn new(dims: Vec<usize>, ops: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(validation("observable family needs at least one site"));
        }
        if let Some(r) = dims.iter().position(|&d| d == 0) {
            return Err(validation(format!("site {r} has dimension 0")));
        }
        if ops.is_empty() {
            return Err(validation("observable family needs at least one term"));
        }
        let mut stored = Vec::with_capacity(ops.len());
        for (i, term) in ops.into_iter().enumerate() {
            if term.len() != dims.len() {
                return Err(validation(format!(
                    "term {i} has {} local operators, expected {}",
                    term.len(),
                    dims.len()
                )));
            }
            let mut row = Vec::with_capacity(term.len());
            for (r, a) in term.into_iter().enumerate() {
                if a.dim() != dims[r] {
                    return Err(validation(format!(
                        "operator ({i}, {r}) has dim {}, site {r} has dim {}",
                        a.dim(),
                        dims[r]
                    )));
                }
                let defect = a.hermitian_defect();
                if defect > HERMITIAN_TOL {
                    return Err(validation(format!(
                        "operator ({i}, {r}) is not Hermitian (max |a - a*| = {defect:e})"
                    )));
                }
                let a = a.hermitian_part();
                let norm = operator_norm(&a)?;
                if norm > 1.0 + CONTRACTION_TOL {
                    return Err(validation(format!(
                        "operator ({i}, {r}) is not a contraction: ||a|| = {norm}"
                    )));
                }
                row.push(a);
            }
            stored.push(row);
        }
        Ok(Self { dims, ops: stored })
    }

    /// Number of sites `n`.
    pub fn sites(&self) -> usize {
        self.dims.len()
    }

    /// Number of terms `m`.
    pub fn terms(&self) -> usize {
        self.ops.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn op(&self, term: usize, site: usize) -> &ComplexMatrix {
        &self.ops[term][site]
    }

    pub fn term(&self, term: usize) -> &[ComplexMatrix] {
        &self.ops[term]
    }

    pub fn ops(&self) -> &[Vec<ComplexMatrix>] {
        &self.ops
    }

    /// Operators at one site, in term order.
    pub fn site_ops(&self, site: usize) -> Vec<&ComplexMatrix> {
        self.ops.iter().map(|t| &t[site]).collect()
    }

    /// Dimension of the full tensor space, saturating on overflow.
    pub fn product_dim(&self) -> usize {
        self.dims.iter().fold(1usize, |acc, &d| acc.saturating_mul(d))
    }

    /// Elementary tensor `u_i`.
    pub fn term_operator(&self, term: usize, max_dim: usize) -> Result<ComplexMatrix> {
        self.check_term(term)?;
        kron_all(&self.ops[term], max_dim)
    }

    /// Dense `B`.
    pub fn assemble(&self, max_dim: usize) -> Result<ComplexMatrix> {
        let mut b = self.term_operator(0, max_dim)?;
        for i in 1..self.terms() {
            b = &b + &self.term_operator(i, max_dim)?;
        }
        Ok(b)
    }

    fn check_term(&self, term: usize) -> Result<()> {
        if term >= self.terms() {
            return Err(validation(format!(
                "term index {term} out of range for {} terms",
                self.terms()
            )));
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_term(i)?;
        self.check_term(j)?;
        if i >= j {
            return Err(validation(format!("pair ({i}, {j}) requires i < j")));
        }
        Ok(())
    }

    /// Per-site `||[a_i, a_j]||` and `||{a_i, a_j}||`.
    pub fn pair_norms(&self, i: usize, j: usize) -> Result<PairNorms> {
        self.check_pair(i, j)?;
        let mut comm = Vec::with_capacity(self.sites());
        let mut anti = Vec::with_capacity(self.sites());
        for r in 0..self.sites() {
            let (a, b) = (&self.ops[i][r], &self.ops[j][r]);
            comm.push(operator_norm(&commutator(a, b)?)?);
            anti.push(operator_norm(&anticommutator(a, b)?)?);
        }
        Ok(PairNorms { comm, anti })
    }

    /// Parity defect weight `phi_ij` for `i < j` (zero-based term indices).
    pub fn defect_weight(&self, i: usize, j: usize) -> Result<f64> {
        if self.sites() > MAX_PARITY_SITES {
            return Err(validation(format!(
                "defect weights support at most {MAX_PARITY_SITES} sites, got {}",
                self.sites()
            )));
        }
        Ok(self.pair_norms(i, j)?.defect_weight())
    }

    /// Defect table and denominator; `compute_exact` also builds `B` densely.
    pub fn defect_report(&self, compute_exact: bool, max_dim: usize) -> Result<DefectReport> {
        let m = self.terms();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        let weights: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| self.defect_weight(i, j))
            .collect::<Result<_>>()?;

        let mut phi = vec![vec![0.0; m]; m];
        for (&(i, j), &w) in pairs.iter().zip(&weights) {
            phi[i][j] = w;
        }
        let defect_sum: f64 = weights.iter().sum();
        let denominator = m as f64 + defect_sum;

        let mut report = DefectReport {
            terms: m,
            sites: self.sites(),
            phi,
            defect_sum,
            denominator,
            exact_norm_sq: None,
            bound_satisfied: None,
            slack: None,
        };
        if compute_exact {
            let norm = operator_norm(&self.assemble(max_dim)?)?;
            let norm_sq = norm * norm;
            report.exact_norm_sq = Some(norm_sq);
            report.bound_satisfied = Some(norm_sq <= denominator + 1e-9);
            report.slack = Some(denominator - norm_sq);
        }
        Ok(report)
    }

    /// `2^(1-n) sum_{|S| even} T_S`, the even-parity form of `u_i u_j + u_j u_i`.
    pub fn mixed_term_parity_expansion(&self, i: usize, j: usize, max_dim: usize) -> Result<ComplexMatrix> {
        self.check_pair(i, j)?;
        let n = self.sites();
        if n > MAX_PARITY_SITES {
            return Err(validation(format!(
                "parity expansion supports at most {MAX_PARITY_SITES} sites"
            )));
        }
        let product = self.product_dim();
        if product > max_dim {
            return Err(crate::Error::Capacity {
                dim: product,
                cap: max_dim,
            });
        }
        let mut comm = Vec::with_capacity(n);
        let mut anti = Vec::with_capacity(n);
        for r in 0..n {
            comm.push(commutator(&self.ops[i][r], &self.ops[j][r])?);
            anti.push(anticommutator(&self.ops[i][r], &self.ops[j][r])?);
        }
        let mut acc = ComplexMatrix::zeros(product);
        for mask in 0u32..(1u32 << n) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            let factors = (0..n).map(|r| if mask & (1 << r) != 0 { &comm[r] } else { &anti[r] });
            acc = &acc + &kron_all(factors, max_dim)?;
        }
        Ok(acc.scale(2f64.powi(1 - n as i32)))
    }

    /// Appends identity operators on new sites of the given dimensions.
    pub fn extend(&self, extra_dims: &[usize]) -> Result<Self> {
        if extra_dims.is_empty() {
            return Err(validation("extension needs at least one extra site"));
        }
        if extra_dims.contains(&0) {
            return Err(validation("extension site dimensions must be positive"));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(extra_dims);
        let ops = self
            .ops
            .iter()
            .map(|term| {
                let mut t = term.clone();
                t.extend(extra_dims.iter().map(|&d| ComplexMatrix::identity(d)));
                t
            })
            .collect();
        Ok(Self { dims, ops })
    }
}

/// Local commutator and anticommutator norms of one term pair, by site.
#[derive(Debug, Clone, PartialEq)]
pub struct PairNorms {
    pub comm: Vec<f64>,
    pub anti: Vec<f64>,
}

impl PairNorms {
    /// Even-subset sum: site `r` in `S` contributes its commutator norm,
    /// sites outside `S` their anticommutator norm.
    pub fn defect_weight(&self) -> f64 {
        let n = self.comm.len();
        let mut total = 0.0;
        for mask in 0u64..(1u64 << n) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            let mut prod = 1.0;
            for r in 0..n {
                prod *= if mask & (1 << r) != 0 {
                    self.comm[r]
                } else {
                    self.anti[r]
                };
                if prod == 0.0 {
                    break;
                }
            }
            total += prod;
        }
        total * 2f64.powi(1 - n as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub terms: usize,
    pub sites: usize,
    /// `phi[i][j]` for `i < j`; zero on and below the diagonal.
    pub phi: Vec<Vec<f64>>,
    pub defect_sum: f64,
    /// `m + defect_sum`.
    pub denominator: f64,
    pub exact_norm_sq: Option<f64>,
    pub bound_satisfied: Option<bool>,
    /// `denominator - exact_norm_sq`.
    pub slack: Option<f64>,
}
