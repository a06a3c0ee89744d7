//! JSON problem specifications, built-in fixtures and report envelopes.

use std::f64::consts::{LN_2, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::{DensityState, GammaProvenance};
use crate::error::{validation, Error, Result};
use crate::fixtures;
use crate::linalg::ComplexMatrix;
use crate::observable::ObservableFamily;
use crate::pauli;

/// Version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Row-major nested arrays of `[re, im]` pairs.
pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSpec {
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// A problem as read from JSON: `operators[i][r]` is the operator of term `i`
/// at site `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub sites: Vec<SiteSpec>,
    pub m: usize,
    pub operators: Vec<Vec<RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// How `gamma` was obtained; defaults to user-supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_kind: Option<GammaProvenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_constants: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySpec>,
}

impl ProblemSpec {
    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.dim).collect()
    }

    /// Builds and validates the observable family.
    pub fn family(&self) -> Result<ObservableFamily> {
        let dims = self.dims();
        if self.operators.len() != self.m {
            return Err(validation(format!(
                "m = {} but {} operator rows were given",
                self.m,
                self.operators.len()
            )));
        }
        let mut ops = Vec::with_capacity(self.m);
        for (i, row) in self.operators.iter().enumerate() {
            if row.len() != dims.len() {
                return Err(validation(format!(
                    "operators[{i}] has {} entries, expected one per site ({})",
                    row.len(),
                    dims.len()
                )));
            }
            let mut term = Vec::with_capacity(row.len());
            for (r, raw) in row.iter().enumerate() {
                let what = format!("operators[{i}][{r}]");
                term.push(matrix_from_raw(raw, dims[r], &what)?);
            }
            ops.push(term);
        }
        ObservableFamily::new(dims, ops)
    }

    /// The state, when present.
    pub fn density_state(&self) -> Result<Option<DensityState>> {
        let Some(raw) = &self.state else {
            return Ok(None);
        };
        let dims = self.dims();
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| validation("state dimension overflows"))?;
        let m = matrix_from_raw(raw, total, "state")?;
        DensityState::new(dims, m).map(Some)
    }

    /// Validates everything that is present.
    pub fn validate(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(validation("sites must be nonempty"));
        }
        if let Some(r) = self.sites.iter().position(|s| s.dim == 0) {
            return Err(validation(format!("sites[{r}].dim must be >= 1")));
        }
        self.family()?;
        self.density_state()?;
        if self.gamma.is_some_and(|g| !g.is_finite()) {
            return Err(validation("gamma must be finite"));
        }
        if let Some(c) = &self.c_constants {
            if c.len() != self.sites.len() {
                return Err(validation(format!(
                    "c_constants has {} entries, expected {}",
                    c.len(),
                    self.sites.len()
                )));
            }
            if let Some(r) = c.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(validation(format!("c_constants[{r}] must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn from_family(fam: &ObservableFamily) -> Self {
        Self {
            sites: fam.dims().iter().map(|&dim| SiteSpec { dim }).collect(),
            m: fam.terms(),
            operators: fam
                .ops()
                .iter()
                .map(|term| term.iter().map(matrix_to_raw).collect())
                .collect(),
            state: None,
            gamma: None,
            gamma_kind: None,
            c_constants: None,
            decay: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Parses and validates a JSON problem specification.
pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn matrix_to_raw(m: &ComplexMatrix) -> RawMatrix {
    (0..m.dim())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Converts nested `[re, im]` rows, naming `what` in errors.
pub fn matrix_from_raw(raw: &RawMatrix, dim: usize, what: &str) -> Result<ComplexMatrix> {
    if raw.len() != dim {
        return Err(validation(format!("{what} has {} rows, expected {dim}", raw.len())));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (k, row) in raw.iter().enumerate() {
        if row.len() != dim {
            return Err(validation(format!(
                "{what} row {k} has {} entries, expected {dim}",
                row.len()
            )));
        }
        data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    ComplexMatrix::from_vec(dim, data).map_err(|e| validation(format!("{what}: {e}")))
}

/// Expected value for one fixture quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub key: &'static str,
    pub value: f64,
    pub tol: f64,
}

/// Named built-in problem plus the values it must reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub spec: ProblemSpec,
    pub expected: Vec<Expected>,
}

impl Fixture {
    pub fn expected(&self, key: &str) -> Option<&Expected> {
        self.expected.iter().find(|e| e.key == key)
    }
}

pub const FIXTURE_NAMES: &[&str] = &[
    "tripartite-pauli",
    "chsh",
    "pauli-site-3",
    "pauli-site-4",
    "depolarizing-demo",
];

fn exp(key: &'static str, value: f64, tol: f64) -> Expected {
    Expected { key, value, tol }
}

/// Looks up a fixture: `tripartite-pauli`, `chsh`, `pauli-site-<n>` (n >= 2)
/// or `depolarizing-demo`.
pub fn fixture(name: &str) -> Result<Fixture> {
    let (spec, expected) = match name {
        "tripartite-pauli" => {
            let spec = ProblemSpec::from_family(&fixtures::tripartite_pauli());
            let expected = vec![
                exp("phi[0][1]", 0.0, 1e-12),
                exp("phi[0][2]", 0.0, 1e-12),
                exp("phi[1][2]", 2.0, 1e-12),
                exp("denominator", 5.0, 1e-12),
                exp("exact_norm_sq", 5.0, 1e-9),
            ];
            (spec, expected)
        }
        "chsh" => {
            let mut spec = ProblemSpec::from_family(&fixtures::chsh());
            spec.state = Some(matrix_to_raw(&pauli::bell_phi_plus()));
            spec.gamma = Some(SQRT_2);
            spec.gamma_kind = Some(GammaProvenance::Exact);
            // each site carries two copies of a Pauli pair, so C_r = 2
            spec.c_constants = Some(vec![2.0, 2.0]);
            let expected = vec![
                exp("phi[0][3]", 2.0, 1e-12),
                exp("phi[1][2]", 2.0, 1e-12),
                exp("denominator", 8.0, 1e-12),
                exp("exact_norm_sq", 8.0, 1e-9),
                exp("seesaw_gamma", SQRT_2, 1e-6),
                exp("explicit_bound", 2.0, 1e-12),
                exp("expectation", 2.0 * SQRT_2, 1e-10),
                exp("excess", SQRT_2, 1e-10),
                exp("trace_dist_lb", 0.5, 1e-10),
                exp("itot_lb", 0.125, 1e-9),
                exp("itot_exact", 2.0 * LN_2, 1e-9),
            ];
            (spec, expected)
        }
        "depolarizing-demo" => {
            let mut spec = ProblemSpec::from_family(&fixtures::chsh());
            spec.state = Some(matrix_to_raw(&pauli::bell_phi_plus()));
            spec.gamma = Some(SQRT_2);
            spec.gamma_kind = Some(GammaProvenance::Exact);
            spec.decay = Some(DecaySpec {
                lambda: None,
                t_max: Some(1.0),
                steps: Some(101),
            });
            let expected = vec![
                exp("expectation_t0", 2.0 * SQRT_2, 1e-10),
                exp("window_end", 0.5 * LN_2, 0.01),
            ];
            (spec, expected)
        }
        other => {
            let n = other
                .strip_prefix("pauli-site-")
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&n| (2..=10).contains(&n))
                .ok_or_else(|| {
                    validation(format!(
                        "unknown fixture '{other}' (known: tripartite-pauli, chsh, pauli-site-<2..10>, depolarizing-demo)"
                    ))
                })?;
            let mut spec = ProblemSpec::from_family(&fixtures::pauli_site(n));
            spec.state = Some(matrix_to_raw(&pauli::ghz_projector(n)));
            spec.gamma = Some(1.0);
            spec.gamma_kind = Some(GammaProvenance::Exact);
            spec.c_constants = Some(vec![1.0; n]);
            let denominator = if n % 2 == 0 { 9.0 } else { 3.0 };
            let expected = vec![
                exp("denominator", denominator, 1e-12),
                exp("site_constant", 1.0, 1e-6),
                exp("site_constant_bound", 1.0, 1e-12),
                exp("explicit_bound", 1.0, 1e-12),
                exp("seesaw_gamma", 1.0, 1e-6),
                exp("itot_coefficient", 1.0 / (2.0 * denominator), 1e-12),
            ];
            (spec, expected)
        }
    };
    Ok(Fixture {
        name: name.to_string(),
        spec,
        expected,
    })
}

/// `{"schema": 1, "command": ..., "report": ...}`.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub source: &'a str,
    pub report: T,
}

pub fn envelope_json<T: Serialize>(command: &str, source: &str, report: T) -> String {
    let env = Envelope {
        schema: SCHEMA_VERSION,
        command,
        source,
        report,
    };
    serde_json::to_string_pretty(&env).expect("report serializes")
}
