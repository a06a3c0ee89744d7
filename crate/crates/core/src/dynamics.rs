//! Product depolarizing noise and the decay, survival and integrated bounds
//! for the excess under an assumed entropy decay rate.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{itot_lower_bound, positive_part, total_correlation, DensityState};
use crate::error::{validation, Error, Result};
use crate::linalg::{mix_site, ComplexMatrix};
use crate::observable::ObservableFamily;

/// Tolerance on `|Tr(a)| / d` for a family to count as centered.
pub const CENTERED_TOL: f64 = 1e-12;
/// Allowed mismatch between the dense trajectory and the closed form.
pub const DUALITY_TOL: f64 = 1e-10;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(validation(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `X <- e^-t X + (1 - e^-t) I_r/d_r (x) Tr_r X` at every site, ascending.
///
/// The local depolarizer is self-dual, so the same map serves the
/// Schrodinger and Heisenberg pictures.
pub fn depolarize_matrix(m: &ComplexMatrix, dims: &[usize], t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    let keep = (-t).exp();
    let mut out = m.clone();
    for r in 0..dims.len() {
        let mixed = mix_site(&out, dims, r)?;
        out = &out.scale(keep) + &mixed.scale(1.0 - keep);
    }
    Ok(out)
}

/// `rho_t` under the product depolarizing semigroup.
pub fn depolarize_state(rho: &DensityState, t: f64) -> Result<DensityState> {
    let m = depolarize_matrix(rho.matrix(), rho.dims(), t)?.hermitian_part();
    Ok(DensityState::from_parts_unchecked(rho.dims().to_vec(), m))
}

/// Heisenberg-picture action on an operator.
pub fn heisenberg_depolarize(op: &ComplexMatrix, dims: &[usize], t: f64) -> Result<ComplexMatrix> {
    depolarize_matrix(op, dims, t)
}

/// Every local operator has (numerically) zero normalized trace.
pub fn is_centered(fam: &ObservableFamily) -> bool {
    fam.ops()
        .iter()
        .all(|term| term.iter().all(|a| a.trace().norm() / a.dim() as f64 <= CENTERED_TOL))
}

/// Scalar `e^(-n t)` by which a centered `B` decays.
pub fn heisenberg_decay(fam: &ObservableFamily, t: f64) -> Result<f64> {
    check_time(t)?;
    if !is_centered(fam) {
        return Err(validation(
            "family is not centered; the scalar decay formula does not apply",
        ));
    }
    Ok((-(fam.sites() as f64) * t).exp())
}

/// Times at which the closed-form excess is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "end", rename_all = "kebab-case")]
pub enum PositivityWindow {
    Empty,
    /// `0 <= t < end`.
    Until(f64),
    /// Every `t >= 0`.
    All,
}

impl PositivityWindow {
    pub fn contains(&self, t: f64) -> bool {
        match *self {
            Self::Empty => false,
            Self::Until(end) => (0.0..end).contains(&t),
            Self::All => t >= 0.0,
        }
    }
}

/// Window where `(e^(-n t) tr0 - gamma)_+ > 0`.
pub fn excess_positivity_window(tr0: f64, gamma: f64, sites: usize) -> PositivityWindow {
    if !(tr0 > gamma) || sites == 0 {
        PositivityWindow::Empty
    } else if gamma > 0.0 {
        PositivityWindow::Until((tr0 / gamma).ln() / sites as f64)
    } else {
        PositivityWindow::All
    }
}

/// Inputs to the decay bounds: the assumed rate in
/// `I_tot(rho_t) <= e^(-2 lambda t) I_tot(rho_0)`, the initial total
/// correlation and the defect denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayParams {
    pub lambda: f64,
    pub itot0: f64,
    pub denominator: f64,
}

impl DecayParams {
    pub fn new(lambda: f64, itot0: f64, denominator: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(validation(format!("lambda must be finite and > 0, got {lambda}")));
        }
        if !(itot0 >= 0.0) || !itot0.is_finite() {
            return Err(validation(format!("itot0 must be finite and >= 0, got {itot0}")));
        }
        if !(denominator > 0.0) || !denominator.is_finite() {
            return Err(validation(format!(
                "denominator must be finite and > 0, got {denominator}"
            )));
        }
        Ok(Self {
            lambda,
            itot0,
            denominator,
        })
    }

    fn amplitude(&self) -> f64 {
        (2.0 * self.itot0).sqrt() * self.denominator.sqrt()
    }
}

/// `e^(-lambda t) (2 I_0)^(1/2) M^(1/2)`.
pub fn decay_excess_bound(p: &DecayParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((-p.lambda * t).exp() * p.amplitude())
}

/// Earliest time after which the excess is guaranteed to be at most `epsilon`.
pub fn survival_time(p: &DecayParams, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(validation(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(((p.amplitude() / epsilon).ln() / p.lambda).max(0.0))
}

/// `I_0 M / lambda`, bounding the time integral of the squared excess.
pub fn integrated_excess_bound(p: &DecayParams) -> f64 {
    p.itot0 * p.denominator / p.lambda
}

/// `rho_t` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTrace {
    pub times: Vec<f64>,
    pub expectation: Vec<f64>,
    pub excess: Vec<f64>,
    pub itot_lb: Vec<f64>,
    pub gamma: f64,
    pub denominator: f64,
}

pub const DECAY_CSV_HEADER: &str = "t,expectation,excess,itot_lb";

impl DecayTrace {
    /// CSV with header [`DECAY_CSV_HEADER`], 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(80 * (self.times.len() + 1));
        out.push_str(DECAY_CSV_HEADER);
        out.push('\n');
        for k in 0..self.times.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[k], self.expectation[k], self.excess[k], self.itot_lb[k]
            );
        }
        out
    }
}

/// `steps` points from 0 to `t_max`, both endpoints included.
pub fn uniform_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(validation(format!("need at least 2 grid points, got {steps}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(validation(format!("t_max must be finite and > 0, got {t_max}")));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k == steps - 1 { t_max } else { t_max * k as f64 / last })
        .collect())
}

/// Evaluates `Tr(rho_t B)`, the excess over `gamma` and the total-correlation
/// lower bound on a uniform grid. Each point is computed from `t` directly.
/// Centered families are cross-checked against `e^(-n t) Tr(rho_0 B)`.
pub fn decay_trace(
    fam: &ObservableFamily,
    rho0: &DensityState,
    gamma: f64,
    denominator: f64,
    t_max: f64,
    steps: usize,
    max_dim: usize,
) -> Result<DecayTrace> {
    let times = uniform_grid(t_max, steps)?;
    let b = fam.assemble(max_dim)?;
    if fam.dims() != rho0.dims() {
        return Err(validation("family and state dimensions differ"));
    }
    let tr0 = rho0.expectation(&b)?;
    let centered = is_centered(fam);
    let n = fam.sites() as f64;

    let expectation: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let value = depolarize_state(rho0, t)?.expectation(&b)?;
            if centered {
                let closed = (-n * t).exp() * tr0;
                if (value - closed).abs() > DUALITY_TOL {
                    return Err(Error::Numeric(format!(
                        "dense expectation {value} differs from closed form {closed} at t = {t}"
                    )));
                }
            }
            Ok(value)
        })
        .collect::<Result<_>>()?;
    let excess: Vec<f64> = expectation.iter().map(|&e| positive_part(e - gamma)).collect();
    let itot_lb = excess
        .iter()
        .map(|&e| itot_lower_bound(e, denominator))
        .collect::<Result<_>>()?;
    Ok(DecayTrace {
        times,
        expectation,
        excess,
        itot_lb,
        gamma,
        denominator,
    })
}

/// `I_tot(rho_t)` at each time.
pub fn total_correlation_trajectory(rho0: &DensityState, times: &[f64]) -> Result<Vec<f64>> {
    times
        .par_iter()
        .map(|&t| total_correlation(&depolarize_state(rho0, t)?))
        .collect()
}

/// A grid point where `I_tot(rho_t) <= e^(-2 lambda t) I_tot(rho_0)` fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayViolation {
    pub t: f64,
    pub itot: f64,
    pub allowed: f64,
}

/// Checks the entropy decay hypothesis for a user-supplied `lambda` along a
/// sampled trajectory (`itot[0]` is taken as `I_tot(rho_0)`).
pub fn check_entropy_decay(times: &[f64], itot: &[f64], lambda: f64, slack: f64) -> Result<Vec<DecayViolation>> {
    if times.len() != itot.len() || times.is_empty() {
        return Err(validation("times and itot must be nonempty and of equal length"));
    }
    let i0 = itot[0];
    Ok(times
        .iter()
        .zip(itot)
        .filter_map(|(&t, &v)| {
            let allowed = (-2.0 * lambda * t).exp() * i0;
            (v > allowed + slack).then_some(DecayViolation { t, itot: v, allowed })
        })
        .collect())
}

/// Trapezoid rule on a (possibly nonuniform) grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::{operator_norm, DEFAULT_MAX_DIM};
    use crate::pauli;
    use std::f64::consts::{LN_2, SQRT_2};

    fn phi_plus() -> DensityState {
        DensityState::new(vec![2, 2], pauli::bell_phi_plus()).unwrap()
    }

    #[test]
    fn depolarize_endpoints() {
        let rho = phi_plus();
        assert_eq!(depolarize_state(&rho, 0.0).unwrap(), rho);
        let late = depolarize_state(&rho, 50.0).unwrap();
        let mixed = ComplexMatrix::identity(4).scale(0.25);
        assert!((late.matrix() - &mixed).max_abs() < 1e-12);
        assert!(depolarize_state(&rho, -0.1).is_err());
        assert!(depolarize_state(&rho, f64::NAN).is_err());
    }

    #[test]
    fn centering() {
        assert!(is_centered(&fixtures::tripartite_pauli()));
        assert!(is_centered(&fixtures::chsh()));
        let with_identity = ObservableFamily::new(vec![2], vec![vec![pauli::identity()]]).unwrap();
        assert!(!is_centered(&with_identity));
        let shifted = (&pauli::x() + &pauli::identity()).scale(0.5);
        let fam = ObservableFamily::new(vec![2], vec![vec![shifted]]).unwrap();
        assert!(!is_centered(&fam));
        assert!(heisenberg_decay(&fam, 1.0).is_err());
    }

    #[test]
    fn heisenberg_scalar() {
        let fam = fixtures::tripartite_pauli();
        assert_eq!(heisenberg_decay(&fam, 0.0).unwrap(), 1.0);
        assert!((heisenberg_decay(&fam, LN_2).unwrap() - 0.125).abs() < 1e-15);

        let b = fam.assemble(DEFAULT_MAX_DIM).unwrap();
        for t in [0.1, 0.7, 2.0] {
            let evolved = heisenberg_depolarize(&b, fam.dims(), t).unwrap();
            let diff = &evolved - &b.scale(heisenberg_decay(&fam, t).unwrap());
            assert!(operator_norm(&diff).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn windows() {
        assert_eq!(
            excess_positivity_window(2.0 * SQRT_2, SQRT_2, 2),
            PositivityWindow::Until(0.5 * LN_2)
        );
        assert_eq!(excess_positivity_window(1.0, 1.0, 2), PositivityWindow::Empty);
        assert_eq!(excess_positivity_window(0.5, 1.0, 2), PositivityWindow::Empty);
        assert_eq!(excess_positivity_window(0.0, -1.0, 3), PositivityWindow::All);
        assert!(PositivityWindow::All.contains(10.0));
        assert!(!PositivityWindow::Until(1.0).contains(1.0));
    }

    #[test]
    fn decay_params_validation() {
        assert!(DecayParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DecayParams::new(1.0, -1.0, 1.0).is_err());
        assert!(DecayParams::new(1.0, 1.0, 0.0).is_err());
        let p = DecayParams::new(1.0, 2.0, 8.0).unwrap();
        assert!(survival_time(&p, 0.0).is_err());
        assert!(decay_excess_bound(&p, -1.0).is_err());
    }

    #[test]
    fn trace_columns() {
        let fam = fixtures::chsh();
        let rho = phi_plus();
        let tr = decay_trace(&fam, &rho, SQRT_2, 8.0, 2.0, 41, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(tr.times.len(), 41);
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 2.0);
        for (t, e) in tr.times.iter().zip(&tr.expectation) {
            assert!((e - (-2.0 * t).exp() * 2.0 * SQRT_2).abs() < 1e-10);
        }
        let high = decay_trace(&fam, &rho, 10.0, 8.0, 1.0, 5, DEFAULT_MAX_DIM).unwrap();
        assert!(high.excess.iter().all(|&e| e == 0.0));
        assert!(decay_trace(&fam, &rho, SQRT_2, 8.0, 0.0, 2, DEFAULT_MAX_DIM).is_err());
        assert!(decay_trace(&fam, &rho, SQRT_2, 8.0, 1.0, 1, DEFAULT_MAX_DIM).is_err());
    }

    #[test]
    fn csv_layout() {
        let fam = fixtures::chsh();
        let tr = decay_trace(&fam, &phi_plus(), SQRT_2, 8.0, 1.0, 3, DEFAULT_MAX_DIM).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], DECAY_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], 0.5);
        assert_eq!(fields[1], tr.expectation[1]);
    }

    #[test]
    fn entropy_decay_checker() {
        let times = [0.0, 1.0, 2.0];
        let itot = [1.0, (-2.0f64).exp(), (-4.0f64).exp()];
        assert!(check_entropy_decay(&times, &itot, 1.0, 1e-12).unwrap().is_empty());
        let v = check_entropy_decay(&times, &itot, 2.0, 1e-12).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(trapezoid(&[0.0, 1.0, 3.0], &[1.0, 1.0, 0.0]), 2.0);
    }
}
