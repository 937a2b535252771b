//! Martingale and classical optimal transport on discrete marginals.
//!
//! Both problems minimize `sum_ij plan[i][j] c(x_i, y_j)`; the martingale
//! variant adds the per-atom conditional-mean constraints, so its optimum is
//! never below the unconstrained one. Parametric sweeps run one solve per
//! label and return the deterministic minimizer for each.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::couplings::{optimal_coupling, Coupling, CouplingError};
use crate::kernels::{check_pointwise, FiniteKernel, KernelError};
use crate::lp::{self, LpError, LpOutcome, RowSense};
use crate::measures::DiscreteMeasure;
use crate::orders::OrderKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("measures are not cx-ordered; no martingale coupling exists (gap {gap:.3e})")]
    NotOrdered { gap: f64 },
    #[error(
        "cost {value} at ({x:?}, {y:?}) violates the declared bound -{c}*(1+|x|+|y|)"
    )]
    CostBoundViolation {
        value: f64,
        x: Vec<f64>,
        y: Vec<f64>,
        c: f64,
    },
    #[error("cost is not finite at ({x:?}, {y:?}); infinite costs are unsupported")]
    NonFiniteCost { x: Vec<f64>, y: Vec<f64> },
    #[error("cost table shape {rows}x{cols} does not match supports {n}x{m}")]
    TableShape {
        rows: usize,
        cols: usize,
        n: usize,
        m: usize,
    },
    #[error("martingale transport fails for {} label(s): {summary}", failures.len())]
    PerLabelFailure {
        failures: Vec<(String, f64)>,
        summary: String,
    },
    #[error(transparent)]
    Kernel(#[from] Box<KernelError>),
    #[error(transparent)]
    Coupling(#[from] Box<CouplingError>),
    #[error(transparent)]
    Lp(#[from] LpError),
}

type CostClosure = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

enum CostEval {
    /// Euclidean distance `|y - x|`.
    Abs,
    /// Squared Euclidean distance `|y - x|^2`.
    Square,
    /// Sum of coordinate-wise positive parts `sum_k (y_k - x_k)+`.
    Forward,
    /// Explicit values per (source atom, target atom).
    Table(Vec<Vec<f64>>),
    Custom(CostClosure),
}

/// A transport cost together with its declared lower-bound constant `C`:
/// every evaluated pair must satisfy `c(x, y) >= -C (1 + |x| + |y|) - 1e-9`.
pub struct CostSpec {
    eval: CostEval,
    lower_bound: f64,
}

impl std::fmt::Debug for CostSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match &self.eval {
            CostEval::Abs => "abs",
            CostEval::Square => "square",
            CostEval::Forward => "forward",
            CostEval::Table(_) => "table",
            CostEval::Custom(_) => "custom",
        };
        f.debug_struct("CostSpec")
            .field("cost", &name)
            .field("lower_bound", &self.lower_bound)
            .finish()
    }
}

impl CostSpec {
    pub fn abs() -> Self {
        CostSpec {
            eval: CostEval::Abs,
            lower_bound: 0.0,
        }
    }

    pub fn square() -> Self {
        CostSpec {
            eval: CostEval::Square,
            lower_bound: 0.0,
        }
    }

    pub fn forward() -> Self {
        CostSpec {
            eval: CostEval::Forward,
            lower_bound: 0.0,
        }
    }

    /// Cost by name, as accepted on the command line.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "abs" => Some(Self::abs()),
            "square" => Some(Self::square()),
            "forward" => Some(Self::forward()),
            _ => None,
        }
    }

    /// Explicit cost table `values[i][j] = c(x_i, y_j)`.
    pub fn table(values: Vec<Vec<f64>>, lower_bound: f64) -> Self {
        CostSpec {
            eval: CostEval::Table(values),
            lower_bound,
        }
    }

    pub fn custom<F>(f: F, lower_bound: f64) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        CostSpec {
            eval: CostEval::Custom(Box::new(f)),
            lower_bound,
        }
    }

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Evaluates the cost at support pair `(i, j)` and audits the declared
    /// lower bound on the touched points.
    fn at(&self, i: usize, j: usize, x: &[f64], y: &[f64]) -> Result<f64, MotError> {
        let value = match &self.eval {
            CostEval::Abs => crate::wasserstein::euclidean(x, y),
            CostEval::Square => x
                .iter()
                .zip(y)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>(),
            CostEval::Forward => x
                .iter()
                .zip(y)
                .map(|(a, b)| (b - a).max(0.0))
                .sum::<f64>(),
            CostEval::Table(values) => values[i][j],
            CostEval::Custom(f) => f(x, y),
        };
        if !value.is_finite() {
            return Err(MotError::NonFiniteCost {
                x: x.to_vec(),
                y: y.to_vec(),
            });
        }
        let bound = -self.lower_bound * (1.0 + Self::norm(x) + Self::norm(y)) - 1e-9;
        if value < bound {
            return Err(MotError::CostBoundViolation {
                value,
                x: x.to_vec(),
                y: y.to_vec(),
                c: self.lower_bound,
            });
        }
        Ok(value)
    }
}

fn objective(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<Vec<f64>, MotError> {
    if mu.dim() != nu.dim() {
        return Err(MotError::Dimension(mu.dim(), nu.dim()));
    }
    if let CostEval::Table(values) = &cost.eval {
        if values.len() != mu.len() || values.iter().any(|r| r.len() != nu.len()) {
            return Err(MotError::TableShape {
                rows: values.len(),
                cols: values.first().map(|r| r.len()).unwrap_or(0),
                n: mu.len(),
                m: nu.len(),
            });
        }
    }
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            c.push(cost.at(i, j, mu.point(i), nu.point(j))?);
        }
    }
    Ok(c)
}

/// Minimizes the expected cost over martingale couplings of `(mu, nu)`.
///
/// Fails with [`MotError::NotOrdered`] when `mu <=cx nu` does not hold.
pub fn mot_solve(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<(f64, Coupling), MotError> {
    let c = objective(mu, nu, cost)?;
    match optimal_coupling(mu, nu, OrderKind::Cx, c) {
        Ok((coupling, value)) => Ok((value, coupling)),
        Err(CouplingError::NotOrdered { gap, .. }) => Err(MotError::NotOrdered { gap }),
        Err(other) => Err(MotError::Coupling(Box::new(other))),
    }
}

/// Minimizes the expected cost over all couplings of `(mu, nu)`.
pub fn ot_solve(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<(f64, Coupling), MotError> {
    let c = objective(mu, nu, cost)?;
    let n = mu.len();
    let m = nu.len();
    let mut rows = Vec::with_capacity(n + m);
    let mut rhs = Vec::with_capacity(n + m);
    for i in 0..n {
        let mut row = vec![0.0; n * m];
        for j in 0..m {
            row[i * m + j] = 1.0;
        }
        rows.push(row);
        rhs.push(mu.weight(i));
    }
    for j in 0..m {
        let mut row = vec![0.0; n * m];
        for i in 0..n {
            row[i * m + j] = 1.0;
        }
        rows.push(row);
        rhs.push(nu.weight(j));
    }
    let senses = vec![RowSense::Eq; n + m];
    match lp::solve(&lp::LinearProgram::new(c, rows, rhs, senses)?)? {
        LpOutcome::Optimal { solution, value, .. } => {
            let plan: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..m).map(|j| solution[i * m + j].max(0.0)).collect())
                .collect();
            let coupling = Coupling::new(mu.clone(), nu.clone(), plan).map_err(Box::new)?;
            Ok((value, coupling))
        }
        other => unreachable!("transportation LP cannot be {other:?}"),
    }
}

/// Per-label martingale optimal transport across two kernels.
///
/// Labels violating the convex order are reported together; on success the
/// map is keyed by label and byte-deterministic.
pub fn mot_parametric(
    p: &FiniteKernel,
    q: &FiniteKernel,
    cost: &CostSpec,
) -> Result<BTreeMap<String, (f64, Coupling)>, MotError> {
    let verdicts = check_pointwise(p, q, OrderKind::Cx).map_err(Box::new)?;
    let mut failures = Vec::new();
    let mut out = BTreeMap::new();
    for (label, _) in &verdicts.per_label {
        let mu = p.measure(label).expect("params verified");
        let nu = q.measure(label).expect("params verified");
        match mot_solve(mu, nu, cost) {
            Ok(pair) => {
                out.insert(label.clone(), pair);
            }
            Err(MotError::NotOrdered { gap }) => failures.push((label.clone(), gap)),
            Err(other) => return Err(other),
        }
    }
    if !failures.is_empty() {
        let summary = failures
            .iter()
            .map(|(l, g)| format!("{l}: gap {g:.3e}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(MotError::PerLabelFailure { failures, summary });
    }
    Ok(out)
}
