//! Parameter-indexed families of measures on a finite labeled set.
//!
//! A [`FiniteKernel`] maps each parameter label to a discrete measure. The
//! pointwise operations check the order label by label, construct one
//! (sub)martingale coupling per label, and assemble a joint law
//! `lambda(dx, dy, dtheta) = theta_law(theta) * R_theta(dx, dy)` whose
//! `(X, theta)` and `(Y, theta)` marginals reproduce the inputs.
//!
//! Labels are sorted at construction, so outputs are label-keyed and
//! byte-identical across permutations of the input list. That determinism is
//! the finite-grid residue of measurable selection: the coupling chosen for a
//! label is a pure function of the measures attached to it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::couplings::{
    compose_chain, kind_coupling, verify_martingale, verify_submartingale, Coupling,
    CouplingError, PathMeasure,
};
use crate::measures::{DiscreteMeasure, MeasureError};
use crate::orders::{check_order, OrderError, OrderKind, OrderVerdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("duplicate parameter label {0:?}")]
    DuplicateLabel(String),
    #[error("kernel has no labels")]
    Empty,
    #[error("measures have mixed dimensions: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("parameter lists differ: {0}")]
    ParamMismatch(String),
    #[error("coupling fails for {} label(s): {summary}", failures.len())]
    PerLabelFailure {
        /// Failing labels with their infeasibility gaps; complete, not
        /// fail-fast.
        failures: Vec<(String, f64)>,
        summary: String,
    },
    #[error("chain composition fails for {} label(s): {summary}", failures.len())]
    SequenceFailure {
        /// Failing labels with the 1-based step at which composition stopped.
        failures: Vec<(String, usize)>,
        summary: String,
    },
    #[error("theta law weight for {label:?} is invalid: {weight}")]
    InvalidWeight { label: String, weight: f64 },
    #[error("theta law sums to {0}, too far from 1")]
    WeightSum(f64),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Coupling(#[from] Box<CouplingError>),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A probability kernel on a finite labeled parameter set: one canonical
/// measure per label, common dimension, labels sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct FiniteKernel {
    params: Vec<String>,
    measures: Vec<DiscreteMeasure>,
}

/// Serde surface: `{"params": [...], "measures": {label: measure}}`.
#[derive(Serialize, Deserialize)]
struct RawKernel {
    params: Vec<String>,
    measures: BTreeMap<String, DiscreteMeasure>,
}

impl TryFrom<RawKernel> for FiniteKernel {
    type Error = KernelError;
    fn try_from(raw: RawKernel) -> Result<Self, KernelError> {
        if raw.params.len() != raw.measures.len() {
            return Err(KernelError::ParamMismatch(format!(
                "{} params but {} measures",
                raw.params.len(),
                raw.measures.len()
            )));
        }
        let mut pairs = Vec::with_capacity(raw.params.len());
        for label in raw.params {
            let measure = raw
                .measures
                .get(&label)
                .cloned()
                .ok_or_else(|| KernelError::ParamMismatch(format!("no measure for {label:?}")))?;
            pairs.push((label, measure));
        }
        FiniteKernel::new(pairs)
    }
}

impl From<FiniteKernel> for RawKernel {
    fn from(k: FiniteKernel) -> RawKernel {
        RawKernel {
            params: k.params.clone(),
            measures: k.params.into_iter().zip(k.measures).collect(),
        }
    }
}

impl FiniteKernel {
    pub fn new(pairs: Vec<(String, DiscreteMeasure)>) -> Result<Self, KernelError> {
        if pairs.is_empty() {
            return Err(KernelError::Empty);
        }
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for window in pairs.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(KernelError::DuplicateLabel(window[0].0.clone()));
            }
        }
        let dim = pairs[0].1.dim();
        for (_, m) in &pairs {
            if m.dim() != dim {
                return Err(KernelError::Dimension(dim, m.dim()));
            }
        }
        let (params, measures) = pairs.into_iter().unzip();
        Ok(FiniteKernel { params, measures })
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.measures[0].dim()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least one label
    }

    pub fn measure(&self, label: &str) -> Option<&DiscreteMeasure> {
        self.params
            .binary_search_by(|p| p.as_str().cmp(label))
            .ok()
            .map(|i| &self.measures[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DiscreteMeasure)> {
        self.params
            .iter()
            .map(String::as_str)
            .zip(self.measures.iter())
    }

    fn require_same_params(&self, other: &FiniteKernel) -> Result<(), KernelError> {
        if self.params != other.params {
            return Err(KernelError::ParamMismatch(format!(
                "{:?} vs {:?}",
                self.params, other.params
            )));
        }
        if self.dim() != other.dim() {
            return Err(KernelError::Dimension(self.dim(), other.dim()));
        }
        Ok(())
    }
}

/// One (sub)martingale coupling per label; kind-tagged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingKernel {
    params: Vec<String>,
    couplings: Vec<Coupling>,
    kind: OrderKind,
}

impl CouplingKernel {
    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn coupling(&self, label: &str) -> Option<&Coupling> {
        self.params
            .binary_search_by(|p| p.as_str().cmp(label))
            .ok()
            .map(|i| &self.couplings[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Coupling)> {
        self.params
            .iter()
            .map(String::as_str)
            .zip(self.couplings.iter())
    }

    /// Largest verification residual across labels, with the check matching
    /// the tag: martingale for `Cx`, submartingale for `Icx`.
    pub fn max_residual(&self) -> f64 {
        self.couplings
            .iter()
            .map(|c| {
                let r = match self.kind {
                    OrderKind::Cx => verify_martingale(c, f64::INFINITY),
                    OrderKind::Icx => verify_submartingale(c, f64::INFINITY),
                };
                r.marginal_residual.max(r.drift_residual)
            })
            .fold(0.0, f64::max)
    }
}

/// Per-label order verdicts; the overall verdict is their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseVerdicts {
    pub kind: OrderKind,
    pub per_label: Vec<(String, OrderVerdict)>,
}

impl PointwiseVerdicts {
    pub fn all_hold(&self) -> bool {
        self.per_label.iter().all(|(_, v)| v.holds)
    }

    pub fn failing_labels(&self) -> Vec<&str> {
        self.per_label
            .iter()
            .filter(|(_, v)| !v.holds)
            .map(|(l, _)| l.as_str())
            .collect()
    }
}

/// Runs the order check for every label of `p` against `q`.
pub fn check_pointwise(
    p: &FiniteKernel,
    q: &FiniteKernel,
    kind: OrderKind,
) -> Result<PointwiseVerdicts, KernelError> {
    p.require_same_params(q)?;
    let mut per_label = Vec::with_capacity(p.len());
    for ((label, mu), (_, nu)) in p.iter().zip(q.iter()) {
        let verdict = check_order(mu, nu, kind)?;
        per_label.push((label.to_owned(), verdict));
    }
    Ok(PointwiseVerdicts { kind, per_label })
}

/// Builds one deterministic (sub)martingale coupling per label.
///
/// Identical inputs as canonical values produce a bit-identical kernel. All
/// failing labels are reported together with their infeasibility gaps.
pub fn pointwise_coupling(
    p: &FiniteKernel,
    q: &FiniteKernel,
    kind: OrderKind,
) -> Result<CouplingKernel, KernelError> {
    p.require_same_params(q)?;
    let mut couplings = Vec::with_capacity(p.len());
    let mut failures = Vec::new();
    for ((label, mu), (_, nu)) in p.iter().zip(q.iter()) {
        match kind_coupling(mu, nu, kind) {
            Ok(c) => couplings.push(c),
            Err(CouplingError::NotOrdered { gap, .. }) => failures.push((label.to_owned(), gap)),
            Err(other) => return Err(KernelError::Coupling(Box::new(other))),
        }
    }
    if !failures.is_empty() {
        let summary = failures
            .iter()
            .map(|(l, g)| format!("{l}: gap {g:.3e}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(KernelError::PerLabelFailure { failures, summary });
    }
    Ok(CouplingKernel {
        params: p.params.clone(),
        couplings,
        kind,
    })
}

/// Law of the parameter: positive-or-zero weights on sorted labels, summing
/// to 1. Zero-weight labels are legal; conditional checks treat them as
/// vacuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct ThetaLaw {
    params: Vec<String>,
    weights: Vec<f64>,
}

impl TryFrom<BTreeMap<String, f64>> for ThetaLaw {
    type Error = KernelError;
    fn try_from(map: BTreeMap<String, f64>) -> Result<Self, KernelError> {
        ThetaLaw::new(map.into_iter().collect())
    }
}

impl From<ThetaLaw> for BTreeMap<String, f64> {
    fn from(law: ThetaLaw) -> Self {
        law.params.into_iter().zip(law.weights).collect()
    }
}

impl ThetaLaw {
    pub fn new(pairs: Vec<(String, f64)>) -> Result<Self, KernelError> {
        if pairs.is_empty() {
            return Err(KernelError::Empty);
        }
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for window in pairs.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(KernelError::DuplicateLabel(window[0].0.clone()));
            }
        }
        for (label, w) in &pairs {
            if !w.is_finite() || *w < 0.0 {
                return Err(KernelError::InvalidWeight {
                    label: label.clone(),
                    weight: *w,
                });
            }
        }
        let sum: f64 = pairs.iter().map(|(_, w)| *w).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(KernelError::WeightSum(sum));
        }
        let (params, mut weights): (Vec<_>, Vec<f64>) = pairs.into_iter().unzip();
        for _ in 0..4 {
            let s: f64 = weights.iter().sum();
            if (s - 1.0).abs() <= 1e-12 {
                break;
            }
            for w in &mut weights {
                *w /= s;
            }
        }
        Ok(ThetaLaw { params, weights })
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, label: &str) -> Option<f64> {
        self.params
            .binary_search_by(|p| p.as_str().cmp(label))
            .ok()
            .map(|i| self.weights[i])
    }
}

/// The joint law `theta_law(theta) * R_theta(dx, dy)` over
/// `R^d x R^d x Theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalCoupling {
    theta_law: ThetaLaw,
    kernel: CouplingKernel,
}

/// Residuals of the conditional-coupling identities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    /// Largest deviation of a reconstructed per-label source law from the
    /// coupling's stated source, over labels with positive theta weight.
    pub x_marginal_residual: f64,
    /// Same for target laws.
    pub y_marginal_residual: f64,
    /// Martingale tag: largest `|E[Y|X, theta] - X|`; submartingale tag:
    /// largest deficit of `E[Y|X, theta] - X` below zero.
    pub conditional_mean_residual: f64,
    /// Labels skipped because their theta weight is zero.
    pub vacuous_labels: Vec<String>,
}

impl ConditionalCoupling {
    pub fn theta_law(&self) -> &ThetaLaw {
        &self.theta_law
    }

    pub fn kernel(&self) -> &CouplingKernel {
        &self.kernel
    }

    /// Mixture of the source measures under the theta law.
    pub fn x_marginal(&self) -> Result<DiscreteMeasure, KernelError> {
        self.mixture(|c| c.source())
    }

    /// Mixture of the target measures under the theta law.
    pub fn y_marginal(&self) -> Result<DiscreteMeasure, KernelError> {
        self.mixture(|c| c.target())
    }

    fn mixture<'a, F>(&'a self, pick: F) -> Result<DiscreteMeasure, KernelError>
    where
        F: Fn(&'a Coupling) -> &'a DiscreteMeasure,
    {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, (_, coupling)) in self.kernel.iter().enumerate() {
            let w_theta = self.theta_law.weights()[i];
            if w_theta == 0.0 {
                continue;
            }
            let m = pick(coupling);
            for (p, w) in m.atoms() {
                points.push(p.to_vec());
                weights.push(w_theta * w);
            }
        }
        Ok(DiscreteMeasure::new(points, weights)?)
    }

    /// Checks the marginal identities and the per-(atom, label) conditional
    /// mean identity (`Cx`) or inequality (`Icx`).
    pub fn verify(&self) -> ConditionalReport {
        let mut x_res = 0.0f64;
        let mut y_res = 0.0f64;
        let mut drift_res = 0.0f64;
        let mut vacuous = Vec::new();
        for (i, (label, coupling)) in self.kernel.iter().enumerate() {
            if self.theta_law.weights()[i] == 0.0 {
                vacuous.push(label.to_owned());
                continue;
            }
            let plan = coupling.plan();
            for (a, row) in plan.iter().enumerate() {
                let s: f64 = row.iter().sum();
                x_res = x_res.max((s - coupling.source().weight(a)).abs());
            }
            for b in 0..coupling.target().len() {
                let s: f64 = plan.iter().map(|row| row[b]).sum();
                y_res = y_res.max((s - coupling.target().weight(b)).abs());
            }
            let report = match self.kernel.kind {
                OrderKind::Cx => verify_martingale(coupling, f64::INFINITY),
                OrderKind::Icx => verify_submartingale(coupling, f64::INFINITY),
            };
            drift_res = drift_res.max(report.drift_residual);
        }
        ConditionalReport {
            x_marginal_residual: x_res,
            y_marginal_residual: y_res,
            conditional_mean_residual: drift_res,
            vacuous_labels: vacuous,
        }
    }
}

/// Attaches a parameter law to a coupling kernel, forming the joint law over
/// `(X, Y, theta)`.
pub fn assemble_conditional(
    theta_law: ThetaLaw,
    kernel: CouplingKernel,
) -> Result<ConditionalCoupling, KernelError> {
    if theta_law.params() != kernel.params() {
        return Err(KernelError::ParamMismatch(format!(
            "theta law keys {:?} vs kernel params {:?}",
            theta_law.params(),
            kernel.params()
        )));
    }
    Ok(ConditionalCoupling { theta_law, kernel })
}

/// Per-label chain composition across a sequence of kernels sharing params.
///
/// Every failing label is reported with the first step at which its chain
/// breaks.
pub fn sequence_pointwise_coupling(
    kernels: &[FiniteKernel],
    kind: OrderKind,
) -> Result<BTreeMap<String, PathMeasure>, KernelError> {
    let Some(first) = kernels.first() else {
        return Err(KernelError::Empty);
    };
    for k in &kernels[1..] {
        first.require_same_params(k)?;
    }
    let mut out = BTreeMap::new();
    let mut failures = Vec::new();
    for label in first.params() {
        let chain: Vec<DiscreteMeasure> = kernels
            .iter()
            .map(|k| k.measure(label).expect("params verified").clone())
            .collect();
        match compose_chain(&chain, kind) {
            Ok(path) => {
                out.insert(label.clone(), path);
            }
            Err(CouplingError::ChainNotOrdered { step, .. }) => {
                failures.push((label.clone(), step));
            }
            Err(other) => return Err(KernelError::Coupling(Box::new(other))),
        }
    }
    if !failures.is_empty() {
        let summary = failures
            .iter()
            .map(|(l, s)| format!("{l}: step {s}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(KernelError::SequenceFailure { failures, summary });
    }
    Ok(out)
}
