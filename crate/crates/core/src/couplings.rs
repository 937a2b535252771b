//! Construction, verification, decomposition and composition of
//! (sub)martingale couplings of discrete measures.
//!
//! A coupling of `mu` (n atoms) and `nu` (m atoms) is an `n x m` matrix of
//! nonnegative mass whose row sums reproduce `mu` and whose column sums
//! reproduce `nu`. The martingale members additionally satisfy, per source
//! atom `i` and coordinate `k`,
//!
//! ```text
//!     sum_j plan[i][j] * (y_j[k] - x_i[k]) = 0        (martingale)
//!     sum_j plan[i][j] * (y_j[k] - x_i[k]) >= 0       (submartingale)
//! ```
//!
//! On finite supports the singleton sets `{x_i}` generate every Borel set, so
//! these per-atom tests are the exact finite form of the set-indexed
//! martingale characterisation. Feasibility is decided by the deterministic
//! simplex in [`crate::lp`]; when many couplings exist the returned plan is
//! the Bland-rule basic feasible one, with no optimality semantics attached.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, LpError, LpOutcome, RowSense};
use crate::measures::{DiscreteMeasure, MeasureError};
use crate::orders::OrderKind;

/// Marginal tolerance for coupling construction and checks.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("dimension mismatch: source has d={0}, target has d={1}")]
    Dimension(usize, usize),
    #[error("no {kind:?} coupling exists; phase-one gap {gap:.3e}")]
    NotOrdered { kind: OrderKind, gap: f64 },
    #[error("chain step {step} admits no {kind:?} coupling (gap {gap:.3e})")]
    ChainNotOrdered { kind: OrderKind, step: usize, gap: f64 },
    #[error("chain needs at least two measures, got {0}")]
    ChainTooShort(usize),
    #[error("plan shape {rows}x{cols} does not match supports {n}x{m}")]
    PlanShape { rows: usize, cols: usize, n: usize, m: usize },
    #[error("plan entry ({i},{j}) is negative: {value}")]
    NegativeMass { i: usize, j: usize, value: f64 },
    #[error("plan marginals deviate from the stated measures by {residual:.3e}")]
    MarginalMismatch { residual: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Joint mass matrix over two discrete supports with prescribed marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoupling")]
pub struct Coupling {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    plan: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawCoupling {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    plan: Vec<Vec<f64>>,
}

impl TryFrom<RawCoupling> for Coupling {
    type Error = CouplingError;
    fn try_from(raw: RawCoupling) -> Result<Self, CouplingError> {
        Coupling::new(raw.source, raw.target, raw.plan)
    }
}

impl Coupling {
    /// Validates shape, nonnegativity and marginal fidelity (within `1e-9`).
    pub fn new(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        plan: Vec<Vec<f64>>,
    ) -> Result<Self, CouplingError> {
        let n = source.len();
        let m = target.len();
        if plan.len() != n || plan.iter().any(|r| r.len() != m) {
            return Err(CouplingError::PlanShape {
                rows: plan.len(),
                cols: plan.first().map(|r| r.len()).unwrap_or(0),
                n,
                m,
            });
        }
        for (i, row) in plan.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(CouplingError::NegativeMass { i, j, value: v });
                }
            }
        }
        let c = Coupling { source, target, plan };
        let residual = c.marginal_residual();
        if residual > MARGINAL_TOL {
            return Err(CouplingError::MarginalMismatch { residual });
        }
        Ok(c)
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn plan(&self) -> &[Vec<f64>] {
        &self.plan
    }

    /// Largest deviation of a row sum from a source weight or a column sum
    /// from a target weight.
    pub fn marginal_residual(&self) -> f64 {
        let mut res = 0.0f64;
        for (i, row) in self.plan.iter().enumerate() {
            let s: f64 = row.iter().sum();
            res = res.max((s - self.source.weight(i)).abs());
        }
        for j in 0..self.target.len() {
            let s: f64 = self.plan.iter().map(|row| row[j]).sum();
            res = res.max((s - self.target.weight(j)).abs());
        }
        res
    }

    /// Per source atom and coordinate, the conditional-mean drift
    /// `sum_j plan[i][j] (y_j[k] - x_i[k]) / w_i`, i.e.
    /// `E[Y_k | X = x_i] - x_i[k]`. Normalizing by the atom weight makes the
    /// residual scale-free across atoms and equal to the drift computed from
    /// the conditional kernel.
    fn drifts(&self) -> Vec<Vec<f64>> {
        let d = self.source.dim();
        self.plan
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let x = self.source.point(i);
                let w = self.source.weight(i);
                (0..d)
                    .map(|k| {
                        row.iter()
                            .enumerate()
                            .map(|(j, &p)| p * (self.target.point(j)[k] - x[k]))
                            .sum::<f64>()
                            / w
                    })
                    .collect()
            })
            .collect()
    }
}

/// Outcome of a (sub)martingale verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Largest marginal deviation.
    pub marginal_residual: f64,
    /// Martingale check: largest `|drift|`. Submartingale check: largest
    /// positive part of `-drift`, i.e. how far below zero a drift falls.
    pub drift_residual: f64,
    pub passes: bool,
}

/// Independent coupling `plan[i][j] = w_i * v_j`.
pub fn product_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Coupling {
    let plan = mu
        .weights()
        .iter()
        .map(|&w| nu.weights().iter().map(|&v| w * v).collect())
        .collect();
    Coupling {
        source: mu.clone(),
        target: nu.clone(),
        plan,
    }
}

/// Assembles the coupling feasibility system and reshapes the LP solution.
fn coupling_lp(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: OrderKind,
    objective: Option<Vec<f64>>,
) -> Result<Result<(Coupling, f64), f64>, CouplingError> {
    if mu.dim() != nu.dim() {
        return Err(CouplingError::Dimension(mu.dim(), nu.dim()));
    }
    let n = mu.len();
    let m = nu.len();
    let d = mu.dim();
    let vars = n * m;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + m + n * d);
    let mut rhs: Vec<f64> = Vec::with_capacity(n + m + n * d);
    let mut senses: Vec<RowSense> = Vec::with_capacity(n + m + n * d);

    for i in 0..n {
        let mut row = vec![0.0; vars];
        for j in 0..m {
            row[i * m + j] = 1.0;
        }
        rows.push(row);
        rhs.push(mu.weight(i));
        senses.push(RowSense::Eq);
    }
    for j in 0..m {
        let mut row = vec![0.0; vars];
        for i in 0..n {
            row[i * m + j] = 1.0;
        }
        rows.push(row);
        rhs.push(nu.weight(j));
        senses.push(RowSense::Eq);
    }
    let drift_sense = match kind {
        OrderKind::Cx => RowSense::Eq,
        OrderKind::Icx => RowSense::Ge,
    };
    for i in 0..n {
        for k in 0..d {
            let mut row = vec![0.0; vars];
            for j in 0..m {
                row[i * m + j] = nu.point(j)[k] - mu.point(i)[k];
            }
            rows.push(row);
            rhs.push(0.0);
            senses.push(drift_sense);
        }
    }

    let outcome = match objective {
        Some(c) => lp::solve(&lp::LinearProgram::new(c, rows, rhs, senses)?)?,
        None => lp::feasibility(rows, rhs, senses)?,
    };
    match outcome {
        LpOutcome::Optimal { solution, value, .. } => {
            let plan: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..m).map(|j| solution[i * m + j].max(0.0)).collect())
                .collect();
            let coupling = Coupling::new(mu.clone(), nu.clone(), plan)?;
            Ok(Ok((coupling, value)))
        }
        LpOutcome::Infeasible { gap } => Ok(Err(gap)),
        LpOutcome::Unbounded => unreachable!("coupling polytopes are bounded"),
    }
}

/// Deterministic martingale coupling of `mu` and `nu`, or the phase-one gap
/// when none exists (equivalently: when `mu <=cx nu` fails).
pub fn martingale_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<Coupling, CouplingError> {
    match coupling_lp(mu, nu, OrderKind::Cx, None)? {
        Ok((c, _)) => Ok(c),
        Err(gap) => Err(CouplingError::NotOrdered {
            kind: OrderKind::Cx,
            gap,
        }),
    }
}

/// Deterministic submartingale coupling, or the phase-one gap when none
/// exists (equivalently: when `mu <=icx nu` fails).
pub fn submartingale_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<Coupling, CouplingError> {
    match coupling_lp(mu, nu, OrderKind::Icx, None)? {
        Ok((c, _)) => Ok(c),
        Err(gap) => Err(CouplingError::NotOrdered {
            kind: OrderKind::Icx,
            gap,
        }),
    }
}

pub(crate) fn kind_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: OrderKind,
) -> Result<Coupling, CouplingError> {
    match kind {
        OrderKind::Cx => martingale_coupling(mu, nu),
        OrderKind::Icx => submartingale_coupling(mu, nu),
    }
}

pub(crate) fn optimal_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: OrderKind,
    objective: Vec<f64>,
) -> Result<(Coupling, f64), CouplingError> {
    match coupling_lp(mu, nu, kind, Some(objective))? {
        Ok(pair) => Ok(pair),
        Err(gap) => Err(CouplingError::NotOrdered { kind, gap }),
    }
}

/// Checks the singleton-set martingale identity per source atom and
/// coordinate, together with marginal fidelity.
pub fn verify_martingale(c: &Coupling, tol: f64) -> VerificationReport {
    let drift = c
        .drifts()
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let marginal = c.marginal_residual();
    VerificationReport {
        marginal_residual: marginal,
        drift_residual: drift,
        passes: drift <= tol && marginal <= tol,
    }
}

/// Checks `sum_j plan[i][j] (y_j - x_i) >= -tol` coordinate-wise, together
/// with marginal fidelity.
pub fn verify_submartingale(c: &Coupling, tol: f64) -> VerificationReport {
    let deficit = c
        .drifts()
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(-v));
    let deficit = deficit.max(0.0);
    let marginal = c.marginal_residual();
    VerificationReport {
        marginal_residual: marginal,
        drift_residual: deficit,
        passes: deficit <= tol && marginal <= tol,
    }
}

/// Rows of a coupling plan normalized by the source weights: the regular
/// conditional distribution of the second coordinate given the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalKernel {
    source_points: Vec<Vec<f64>>,
    target_points: Vec<Vec<f64>>,
    rows: Vec<Vec<f64>>,
}

impl ConditionalKernel {
    pub fn source_points(&self) -> &[Vec<f64>] {
        &self.source_points
    }

    pub fn target_points(&self) -> &[Vec<f64>] {
        &self.target_points
    }

    /// Probability rows, one per source atom; each sums to 1 within `1e-12`.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Conditional mean of the target given source atom `i`.
    pub fn conditional_mean(&self, i: usize) -> Vec<f64> {
        let d = self.target_points.first().map(|p| p.len()).unwrap_or(0);
        let mut out = vec![0.0; d];
        for (j, &p) in self.rows[i].iter().enumerate() {
            for (o, c) in out.iter_mut().zip(&self.target_points[j]) {
                *o += p * c;
            }
        }
        out
    }

    /// Pushes a weight vector over the source atoms forward one step.
    fn push(&self, weights: &[f64]) -> Vec<f64> {
        let m = self.target_points.len();
        let mut out = vec![0.0; m];
        for (i, &w) in weights.iter().enumerate() {
            for (j, &p) in self.rows[i].iter().enumerate() {
                out[j] += w * p;
            }
        }
        out
    }
}

pub fn conditional_kernel(c: &Coupling) -> ConditionalKernel {
    let rows = c
        .plan
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let w = c.source.weight(i);
            row.iter().map(|&p| p / w).collect()
        })
        .collect();
    ConditionalKernel {
        source_points: c.source.points().to_vec(),
        target_points: c.target.points().to_vec(),
        rows,
    }
}

/// A finite-horizon (sub)martingale law stored as an initial distribution
/// plus one conditional kernel per step, never as the full product tensor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathMeasure {
    initial: DiscreteMeasure,
    kernels: Vec<ConditionalKernel>,
    kind: OrderKind,
}

impl PathMeasure {
    /// Number of time points (input measures).
    pub fn num_steps(&self) -> usize {
        self.kernels.len() + 1
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn initial(&self) -> &DiscreteMeasure {
        &self.initial
    }

    pub fn kernels(&self) -> &[ConditionalKernel] {
        &self.kernels
    }

    /// Marginal law at time point `level` (0-based), obtained by pushing the
    /// initial law through the kernels.
    pub fn marginal(&self, level: usize) -> Result<DiscreteMeasure, MeasureError> {
        assert!(level < self.num_steps(), "level out of range");
        if level == 0 {
            return Ok(self.initial.clone());
        }
        let mut weights = self.initial.weights().to_vec();
        for kernel in &self.kernels[..level] {
            weights = kernel.push(&weights);
        }
        DiscreteMeasure::new(self.kernels[level - 1].target_points().to_vec(), weights)
    }

    /// Per step, per source atom, per coordinate: conditional mean of the
    /// next position minus the current position.
    pub fn step_drifts(&self, step: usize) -> Vec<Vec<f64>> {
        let kernel = &self.kernels[step];
        kernel
            .source_points()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                kernel
                    .conditional_mean(i)
                    .iter()
                    .zip(x.iter())
                    .map(|(m, c)| m - c)
                    .collect()
            })
            .collect()
    }

    /// Largest violation of the path's (sub)martingale property across all
    /// steps and atoms: absolute drift for `Cx`, drift deficit for `Icx`.
    pub fn drift_residual(&self) -> f64 {
        let mut res = 0.0f64;
        for step in 0..self.kernels.len() {
            for atom in self.step_drifts(step) {
                for v in atom {
                    match self.kind {
                        OrderKind::Cx => res = res.max(v.abs()),
                        OrderKind::Icx => res = res.max(-v),
                    }
                }
            }
        }
        res.max(0.0)
    }
}

/// Couples consecutive measures and chains the conditional kernels into a
/// path law whose step-`i` marginal is `measures[i]`.
///
/// Fails with the 1-based index of the first measure that cannot be reached
/// from its predecessor.
pub fn compose_chain(
    measures: &[DiscreteMeasure],
    kind: OrderKind,
) -> Result<PathMeasure, CouplingError> {
    if measures.len() < 2 {
        return Err(CouplingError::ChainTooShort(measures.len()));
    }
    let d = measures[0].dim();
    for m in measures {
        if m.dim() != d {
            return Err(CouplingError::Dimension(d, m.dim()));
        }
    }
    let mut kernels = Vec::with_capacity(measures.len() - 1);
    for (idx, window) in measures.windows(2).enumerate() {
        let coupling = kind_coupling(&window[0], &window[1], kind).map_err(|e| match e {
            CouplingError::NotOrdered { kind, gap } => CouplingError::ChainNotOrdered {
                kind,
                step: idx + 2,
                gap,
            },
            other => other,
        })?;
        kernels.push(conditional_kernel(&coupling));
    }
    Ok(PathMeasure {
        initial: measures[0].clone(),
        kernels,
        kind,
    })
}

/// Result of splitting an increasing-convex-ordered pair into a pointwise
/// dominance step followed by a convex-order step.
#[derive(Debug, Clone, PartialEq)]
pub struct IcxDecomposition {
    /// Pushforward of the source under the conditional-mean map; sits between
    /// the source (pointwise domination) and the target (convex order).
    pub conditional_mean_measure: DiscreteMeasure,
    /// Conditional mean point for each source atom, in source order.
    pub mean_points: Vec<Vec<f64>>,
    /// Per source atom: `x_i <= w_i` coordinate-wise within `1e-9`.
    pub dominance: Vec<bool>,
}

/// From a submartingale coupling of `(mu, nu)`, computes
/// `w_i = E[Y | X = x_i]` and the intermediate measure `W = law of w(X)`.
///
/// The construction guarantees `x_i <= w_i` coordinate-wise and `W <=cx nu`.
pub fn icx_decompose(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<IcxDecomposition, CouplingError> {
    let coupling = submartingale_coupling(mu, nu)?;
    let kernel = conditional_kernel(&coupling);
    let mean_points: Vec<Vec<f64>> = (0..mu.len()).map(|i| kernel.conditional_mean(i)).collect();
    let dominance = mean_points
        .iter()
        .enumerate()
        .map(|(i, w)| {
            mu.point(i)
                .iter()
                .zip(w.iter())
                .all(|(x, w)| *x <= w + MARGINAL_TOL)
        })
        .collect();
    let conditional_mean_measure =
        DiscreteMeasure::new(mean_points.clone(), mu.weights().to_vec())?;
    Ok(IcxDecomposition {
        conditional_mean_measure,
        mean_points,
        dominance,
    })
}
