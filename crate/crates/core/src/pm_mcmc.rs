//! Finite-state pseudo-marginal MCMC: exact augmented chains, exact
//! asymptotic variances, and the variance-ordering construction.
//!
//! A pseudo-marginal chain targets `pi` on a finite state space but carries a
//! positive, mean-one multiplicative weight drawn afresh at every proposal.
//! With finite weight supports the augmented chain over pairs `(x, w)` is an
//! exact finite matrix, so reversibility, invariance and asymptotic variances
//! are linear algebra rather than simulation.
//!
//! The breve construction embeds two such chains, whose weight distributions
//! are coupled state-by-state by martingale couplings, into a common
//! augmented space over triples `(x, w, v)` sharing one invariant law. Its
//! marginal laws and kernels reproduce the two original chains, which is the
//! mechanism behind the asymptotic-variance ordering.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::couplings::{verify_martingale, Coupling};
use crate::measures::DiscreteMeasure;
use crate::orders::check_cx_univariate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmError {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),
    #[error("specs do not share states/target/proposal: {0}")]
    SpecMismatch(String),
    #[error("weight coupling for state {state:?} is invalid: {reason}")]
    CouplingInvalid { state: String, reason: String },
    #[error("weight kernels are not cx-ordered for state(s): {}", states.join(", "))]
    NotOrderedWeights { states: Vec<String> },
    #[error("chain is reducible on its augmented support; the asymptotic variance may depend on the component")]
    Reducible,
    #[error("function values: expected {expected} entries (one per augmented state), got {got}")]
    FunctionLength { expected: usize, got: usize },
}

/// Specification of a finite-state pseudo-marginal chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct PmChainSpec {
    states: Vec<String>,
    target: Vec<f64>,
    proposal: Vec<Vec<f64>>,
    weight_kernels: Vec<DiscreteMeasure>,
}

/// Serde surface:
/// `{"states": [...], "target": [...], "proposal": [[...]], "weights": {state: measure}}`.
#[derive(Serialize, Deserialize)]
struct RawSpec {
    states: Vec<String>,
    target: Vec<f64>,
    proposal: Vec<Vec<f64>>,
    weights: BTreeMap<String, DiscreteMeasure>,
}

impl TryFrom<RawSpec> for PmChainSpec {
    type Error = PmError;
    fn try_from(raw: RawSpec) -> Result<Self, PmError> {
        let mut kernels = Vec::with_capacity(raw.states.len());
        for state in &raw.states {
            let k = raw.weights.get(state).cloned().ok_or_else(|| {
                PmError::InvalidSpec(format!("no weight kernel for state {state:?}"))
            })?;
            kernels.push(k);
        }
        PmChainSpec::new(raw.states, raw.target, raw.proposal, kernels)
    }
}

impl From<PmChainSpec> for RawSpec {
    fn from(spec: PmChainSpec) -> RawSpec {
        RawSpec {
            states: spec.states.clone(),
            target: spec.target,
            proposal: spec.proposal,
            weights: spec.states.into_iter().zip(spec.weight_kernels).collect(),
        }
    }
}

impl PmChainSpec {
    /// Validates and normalizes a chain spec.
    ///
    /// `target` must be strictly positive (accepted within `1e-9` of sum 1,
    /// then renormalized); `proposal` rows likewise. Every weight kernel must
    /// be univariate with strictly positive support and mean within `1e-9`
    /// of 1.
    pub fn new(
        states: Vec<String>,
        target: Vec<f64>,
        proposal: Vec<Vec<f64>>,
        weight_kernels: Vec<DiscreteMeasure>,
    ) -> Result<Self, PmError> {
        let s = states.len();
        if s == 0 {
            return Err(PmError::InvalidSpec("no states".into()));
        }
        let mut sorted = states.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != s {
            return Err(PmError::InvalidSpec("duplicate state names".into()));
        }
        if target.len() != s {
            return Err(PmError::InvalidSpec(format!(
                "target has {} entries for {s} states",
                target.len()
            )));
        }
        if target.iter().any(|&p| !p.is_finite() || p <= 0.0) {
            return Err(PmError::InvalidSpec(
                "target probabilities must be finite and strictly positive".into(),
            ));
        }
        let mut target = target;
        normalize_to_one(&mut target)
            .map_err(|sum| PmError::InvalidSpec(format!("target sums to {sum}, not 1")))?;

        if proposal.len() != s || proposal.iter().any(|row| row.len() != s) {
            return Err(PmError::InvalidSpec(format!(
                "proposal must be a {s}x{s} matrix"
            )));
        }
        let mut proposal = proposal;
        for (i, row) in proposal.iter_mut().enumerate() {
            if row.iter().any(|&q| !q.is_finite() || q < 0.0) {
                return Err(PmError::InvalidSpec(format!(
                    "proposal row {i} has a negative or non-finite entry"
                )));
            }
            normalize_to_one(row).map_err(|sum| {
                PmError::InvalidSpec(format!("proposal row {i} sums to {sum}, not 1"))
            })?;
        }

        if weight_kernels.len() != s {
            return Err(PmError::InvalidSpec(format!(
                "{} weight kernels for {s} states",
                weight_kernels.len()
            )));
        }
        for (i, k) in weight_kernels.iter().enumerate() {
            if k.dim() != 1 {
                return Err(PmError::InvalidSpec(format!(
                    "weight kernel for state {i} must be univariate"
                )));
            }
            if k.points().iter().any(|p| p[0] <= 0.0) {
                return Err(PmError::InvalidSpec(format!(
                    "weight kernel for state {i} has a non-positive support point"
                )));
            }
            let mean = k.mean()[0];
            if (mean - 1.0).abs() > 1e-9 {
                return Err(PmError::InvalidSpec(format!(
                    "weight kernel for state {i} has mean {mean}, not 1"
                )));
            }
        }

        Ok(PmChainSpec {
            states,
            target,
            proposal,
            weight_kernels,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn proposal(&self) -> &[Vec<f64>] {
        &self.proposal
    }

    pub fn weight_kernels(&self) -> &[DiscreteMeasure] {
        &self.weight_kernels
    }

    /// Metropolis--Hastings ratio `r(x, y)`, zero where undefined.
    fn mh_ratio(&self, x: usize, y: usize) -> f64 {
        let q_xy = self.proposal[x][y];
        if q_xy == 0.0 || self.target[x] == 0.0 {
            return 0.0;
        }
        self.target[y] * self.proposal[y][x] / (self.target[x] * q_xy)
    }
}

fn normalize_to_one(v: &mut [f64]) -> Result<(), f64> {
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(sum);
    }
    for _ in 0..4 {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() <= 1e-12 {
            break;
        }
        for w in v.iter_mut() {
            *w /= s;
        }
    }
    Ok(())
}

/// One augmented state: a base state index with its weight, and for breve
/// chains the coupled second weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugState {
    pub state: usize,
    pub weight: f64,
    pub aux: Option<f64>,
}

/// Explicit transition matrix over augmented states with its invariant law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainMatrix {
    state_names: Vec<String>,
    labels: Vec<AugState>,
    transition: Vec<Vec<f64>>,
    invariant: Vec<f64>,
}

impl ChainMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[AugState] {
        &self.labels
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn invariant(&self) -> &[f64] {
        &self.invariant
    }

    /// Lifts a function on base states to the augmented space:
    /// `f(x, w) = f(x)`.
    pub fn lift_state_fn(&self, f_states: &[f64]) -> Result<Vec<f64>, PmError> {
        if f_states.len() != self.state_names.len() {
            return Err(PmError::FunctionLength {
                expected: self.state_names.len(),
                got: f_states.len(),
            });
        }
        Ok(self.labels.iter().map(|a| f_states[a.state]).collect())
    }

    /// True when every augmented state communicates with every other through
    /// strictly positive transition mass.
    pub fn is_irreducible(&self) -> bool {
        let n = self.len();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(a) = stack.pop() {
                for b in 0..n {
                    let edge = if forward {
                        self.transition[a][b]
                    } else {
                        self.transition[b][a]
                    };
                    if edge > 0.0 && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// Builds the augmented pseudo-marginal transition matrix over `(x, w)`
/// pairs, with rejection mass computed as the residual row mass so rows are
/// stochastic bit-exactly.
pub fn build_pm_kernel(spec: &PmChainSpec) -> ChainMatrix {
    let s = spec.states.len();
    let mut labels = Vec::new();
    let mut offset = vec![0usize; s + 1];
    for x in 0..s {
        offset[x] = labels.len();
        for wi in 0..spec.weight_kernels[x].len() {
            labels.push(AugState {
                state: x,
                weight: spec.weight_kernels[x].point(wi)[0],
                aux: None,
            });
        }
    }
    offset[s] = labels.len();
    let n = labels.len();

    let mut transition = vec![vec![0.0; n]; n];
    let mut invariant = vec![0.0; n];
    for (idx, aug) in labels.iter().enumerate() {
        let (x, w) = (aug.state, aug.weight);
        let q_x_w = spec.weight_kernels[x].weight(idx - offset[x]);
        invariant[idx] = spec.target[x] * q_x_w * w;

        let mut accepted = 0.0;
        for y in 0..s {
            let q_xy = spec.proposal[x][y];
            if q_xy == 0.0 {
                continue;
            }
            let r = spec.mh_ratio(x, y);
            for ui in 0..spec.weight_kernels[y].len() {
                let u = spec.weight_kernels[y].point(ui)[0];
                let mass = q_xy
                    * spec.weight_kernels[y].weight(ui)
                    * (r * u / w).min(1.0);
                transition[idx][offset[y] + ui] += mass;
                accepted += mass;
            }
        }
        let rejection = (1.0 - accepted).max(0.0);
        transition[idx][idx] += rejection;
    }

    let total: f64 = invariant.iter().sum();
    for v in &mut invariant {
        *v /= total;
    }

    ChainMatrix {
        state_names: spec.states.clone(),
        labels,
        transition,
        invariant,
    }
}

/// Largest detailed-balance residual
/// `max_{a,b} |law[a] T[a][b] - law[b] T[b][a]|`.
pub fn stationary_check(cm: &ChainMatrix) -> f64 {
    let n = cm.len();
    let mut res = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let flow_ab = cm.invariant[a] * cm.transition[a][b];
            let flow_ba = cm.invariant[b] * cm.transition[b][a];
            res = res.max((flow_ab - flow_ba).abs());
        }
    }
    res
}

/// Solves a dense linear system by Gaussian elimination with partial
/// pivoting. The systems here are small and well conditioned for irreducible
/// chains.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite matrix entries")
        })?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Exact asymptotic variance of the ergodic averages of `f` (one value per
/// augmented state) via the fundamental matrix:
/// `sigma^2 = 2 <f_c, Z f_c>_pi - <f_c, f_c>_pi` with
/// `Z = (I - T + limiting projector)^{-1}` and `f_c = f - pi(f)`.
pub fn asymptotic_variance(cm: &ChainMatrix, f: &[f64]) -> Result<f64, PmError> {
    let n = cm.len();
    if f.len() != n {
        return Err(PmError::FunctionLength {
            expected: n,
            got: f.len(),
        });
    }
    if !cm.is_irreducible() {
        return Err(PmError::Reducible);
    }
    let pi = &cm.invariant;
    let mean: f64 = pi.iter().zip(f).map(|(p, v)| p * v).sum();
    let centered: Vec<f64> = f.iter().map(|v| v - mean).collect();

    // (I - T + Pi) z = f_c, where Pi has the invariant law in every row.
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (if i == j { 1.0 } else { 0.0 }) - cm.transition[i][j] + pi[j];
        }
    }
    let z = solve_dense(a, centered.clone()).ok_or(PmError::Reducible)?;

    let dot = |u: &[f64], v: &[f64]| -> f64 {
        pi.iter()
            .zip(u.iter().zip(v))
            .map(|(p, (a, b))| p * a * b)
            .sum()
    };
    Ok(2.0 * dot(&centered, &z) - dot(&centered, &centered))
}

/// The coupled pair of augmented chains over `(x, w, v)` sharing one
/// invariant law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreveChains {
    pub chain: ChainMatrix,
    pub chain_prime: ChainMatrix,
}

/// Builds the breve embedding of two chains differing only in their weight
/// kernels, from one martingale coupling of the weight laws per state.
///
/// Both returned matrices share the label list and the invariant law
/// `pi(x) R_x(w, v) v`.
pub fn build_breve_kernels(
    spec: &PmChainSpec,
    spec_prime: &PmChainSpec,
    couplings: &[Coupling],
) -> Result<BreveChains, PmError> {
    if spec.states != spec_prime.states {
        return Err(PmError::SpecMismatch("state lists differ".into()));
    }
    if spec.target != spec_prime.target {
        return Err(PmError::SpecMismatch("target laws differ".into()));
    }
    if spec.proposal != spec_prime.proposal {
        return Err(PmError::SpecMismatch("proposal matrices differ".into()));
    }
    let s = spec.states.len();
    if couplings.len() != s {
        return Err(PmError::SpecMismatch(format!(
            "{} couplings for {s} states",
            couplings.len()
        )));
    }
    for (x, c) in couplings.iter().enumerate() {
        if c.source() != &spec.weight_kernels[x] {
            return Err(PmError::CouplingInvalid {
                state: spec.states[x].clone(),
                reason: "coupling source does not match the first weight kernel".into(),
            });
        }
        if c.target() != &spec_prime.weight_kernels[x] {
            return Err(PmError::CouplingInvalid {
                state: spec.states[x].clone(),
                reason: "coupling target does not match the second weight kernel".into(),
            });
        }
        let report = verify_martingale(c, 1e-8);
        if !report.passes {
            return Err(PmError::CouplingInvalid {
                state: spec.states[x].clone(),
                reason: format!(
                    "martingale verification fails: drift {:.3e}, marginal {:.3e}",
                    report.drift_residual, report.marginal_residual
                ),
            });
        }
    }

    // Augmented support: per state, the strictly positive entries of the plan.
    let mut labels = Vec::new();
    let mut offset = vec![0usize; s + 1];
    let mut entries: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(s);
    for (x, coupling) in couplings.iter().enumerate() {
        offset[x] = labels.len();
        let mut per_state = Vec::new();
        for (wi, row) in coupling.plan().iter().enumerate() {
            for (vi, &mass) in row.iter().enumerate() {
                if mass > 0.0 {
                    let w = coupling.source().point(wi)[0];
                    let v = coupling.target().point(vi)[0];
                    labels.push(AugState {
                        state: x,
                        weight: w,
                        aux: Some(v),
                    });
                    per_state.push((wi, vi, mass));
                }
            }
        }
        entries.push(per_state);
    }
    offset[s] = labels.len();
    let n = labels.len();

    let mut invariant = vec![0.0; n];
    for x in 0..s {
        for (k, &(_, _, mass)) in entries[x].iter().enumerate() {
            let v = labels[offset[x] + k].aux.unwrap();
            invariant[offset[x] + k] = spec.target[x] * mass * v;
        }
    }
    let total: f64 = invariant.iter().sum();
    for val in &mut invariant {
        *val /= total;
    }

    let mut t_breve = vec![vec![0.0; n]; n];
    let mut t_breve_prime = vec![vec![0.0; n]; n];
    for (idx, aug) in labels.iter().enumerate() {
        let (x, w, v) = (aug.state, aug.weight, aug.aux.unwrap());
        let mut accepted = 0.0;
        let mut accepted_prime = 0.0;
        for y in 0..s {
            let q_xy = spec.proposal[x][y];
            if q_xy == 0.0 {
                continue;
            }
            let r = spec.mh_ratio(x, y);
            for (k, &(ui, vi, mass)) in entries[y].iter().enumerate() {
                let u = couplings[y].source().point(ui)[0];
                let t = couplings[y].target().point(vi)[0];
                let dest = offset[y] + k;

                let move_mass = q_xy * mass * (t / u) * (r * u / w).min(1.0);
                t_breve[idx][dest] += move_mass;
                accepted += move_mass;

                let move_mass_prime = q_xy * mass * (r * t / v).min(1.0);
                t_breve_prime[idx][dest] += move_mass_prime;
                accepted_prime += move_mass_prime;
            }
        }
        t_breve[idx][idx] += (1.0 - accepted).max(0.0);
        t_breve_prime[idx][idx] += (1.0 - accepted_prime).max(0.0);
    }

    let chain = ChainMatrix {
        state_names: spec.states.clone(),
        labels: labels.clone(),
        transition: t_breve,
        invariant: invariant.clone(),
    };
    let chain_prime = ChainMatrix {
        state_names: spec.states.clone(),
        labels,
        transition: t_breve_prime,
        invariant,
    };
    Ok(BreveChains { chain, chain_prime })
}

/// Residuals of the breve marginalization identities against the two
/// original chains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreveReport {
    /// `sum_v breve_pi(x, w, v)` against `pi~(x, w)`.
    pub law_residual: f64,
    /// `sum_w breve_pi(x, w, v)` against `pi~'(x, v)`.
    pub law_prime_residual: f64,
    /// `sum_t breve_K((x,w,v) -> (y,u,t))` against `K((x,w) -> (y,u))`.
    pub kernel_residual: f64,
    /// `sum_u breve_K'((x,w,v) -> (y,u,t))` against `K'((x,v) -> (y,t))`.
    pub kernel_prime_residual: f64,
    /// Detailed-balance residuals of the two breve chains.
    pub detailed_balance: f64,
    pub detailed_balance_prime: f64,
}

/// Checks that the breve pair marginalizes onto the two original chains.
pub fn breve_marginal_report(
    spec: &PmChainSpec,
    spec_prime: &PmChainSpec,
    breve: &BreveChains,
) -> BreveReport {
    let base = build_pm_kernel(spec);
    let base_prime = build_pm_kernel(spec_prime);

    let find = |cm: &ChainMatrix, state: usize, weight: f64| -> usize {
        cm.labels
            .iter()
            .position(|a| a.state == state && a.weight == weight)
            .expect("augmented state exists in the base chain")
    };

    let n = breve.chain.len();
    // Law marginals.
    let mut law_w = vec![0.0; base.len()];
    let mut law_v = vec![0.0; base_prime.len()];
    for (idx, aug) in breve.chain.labels().iter().enumerate() {
        law_w[find(&base, aug.state, aug.weight)] += breve.chain.invariant[idx];
        law_v[find(&base_prime, aug.state, aug.aux.unwrap())] += breve.chain.invariant[idx];
    }
    let law_residual = law_w
        .iter()
        .zip(base.invariant())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let law_prime_residual = law_v
        .iter()
        .zip(base_prime.invariant())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // Kernel marginals: group destination triples by (y, u) against K, and by
    // (y, t) against K'.
    let mut kernel_residual = 0.0f64;
    let mut kernel_prime_residual = 0.0f64;
    for (idx, aug) in breve.chain.labels().iter().enumerate() {
        let row_w = find(&base, aug.state, aug.weight);
        let mut grouped = vec![0.0; base.len()];
        for dest in 0..n {
            let d = &breve.chain.labels()[dest];
            grouped[find(&base, d.state, d.weight)] += breve.chain.transition[idx][dest];
        }
        for (g, k) in grouped.iter().zip(&base.transition[row_w]) {
            kernel_residual = kernel_residual.max((g - k).abs());
        }

        let row_v = find(&base_prime, aug.state, aug.aux.unwrap());
        let mut grouped = vec![0.0; base_prime.len()];
        for dest in 0..n {
            let d = &breve.chain_prime.labels()[dest];
            grouped[find(&base_prime, d.state, d.aux.unwrap())] +=
                breve.chain_prime.transition[idx][dest];
        }
        for (g, k) in grouped.iter().zip(&base_prime.transition[row_v]) {
            kernel_prime_residual = kernel_prime_residual.max((g - k).abs());
        }
    }

    BreveReport {
        law_residual,
        law_prime_residual,
        kernel_residual,
        kernel_prime_residual,
        detailed_balance: stationary_check(&breve.chain),
        detailed_balance_prime: stationary_check(&breve.chain_prime),
    }
}

/// Outcome of an asymptotic-variance comparison for `f` lifted from the base
/// state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceComparison {
    pub sigma2: f64,
    pub sigma2_prime: f64,
    /// `sigma2 <= sigma2_prime + 1e-8`.
    pub ordered: bool,
    pub gap: f64,
}

/// Compares the exact asymptotic variances of two chains whose weight
/// kernels are cx-ordered state by state.
pub fn compare_variances(
    spec: &PmChainSpec,
    spec_prime: &PmChainSpec,
    f_states: &[f64],
) -> Result<VarianceComparison, PmError> {
    if spec.states != spec_prime.states {
        return Err(PmError::SpecMismatch("state lists differ".into()));
    }
    let mut failing = Vec::new();
    for (x, state) in spec.states.iter().enumerate() {
        let verdict =
            check_cx_univariate(&spec.weight_kernels[x], &spec_prime.weight_kernels[x])
                .expect("weight kernels are univariate by construction");
        if !verdict.holds {
            failing.push(state.clone());
        }
    }
    if !failing.is_empty() {
        return Err(PmError::NotOrderedWeights { states: failing });
    }

    let chain = build_pm_kernel(spec);
    let chain_prime = build_pm_kernel(spec_prime);
    let sigma2 = asymptotic_variance(&chain, &chain.lift_state_fn(f_states)?)?;
    let sigma2_prime =
        asymptotic_variance(&chain_prime, &chain_prime.lift_state_fn(f_states)?)?;
    Ok(VarianceComparison {
        sigma2,
        sigma2_prime,
        ordered: sigma2 <= sigma2_prime + 1e-8,
        gap: sigma2_prime - sigma2,
    })
}

/// Ergodic-average simulation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub average: f64,
    /// Batch-means estimate of the asymptotic variance; 0 when fewer than
    /// two batches fit.
    pub variance_estimate: f64,
    pub steps: u64,
    pub seed: u64,
}

fn sample_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Runs the chain for `steps` samples from a stationary start and returns
/// the ergodic average of `f` with a batch-means variance estimate.
/// Deterministic for a fixed seed.
pub fn simulate(cm: &ChainMatrix, f: &[f64], steps: u64, seed: u64) -> Result<SimReport, PmError> {
    if f.len() != cm.len() {
        return Err(PmError::FunctionLength {
            expected: cm.len(),
            got: f.len(),
        });
    }
    if !cm.is_irreducible() {
        return Err(PmError::Reducible);
    }
    assert!(steps >= 1, "need at least one step");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = sample_index(&mut rng, &cm.invariant);

    let batch_size = (steps as f64).sqrt().floor() as u64;
    let num_batches = if batch_size > 0 { steps / batch_size } else { 0 };
    let mut batch_means = Vec::with_capacity(num_batches as usize);
    let mut batch_acc = 0.0;
    let mut total = 0.0;
    for k in 0..steps {
        let value = f[state];
        total += value;
        batch_acc += value;
        if batch_size > 0 && (k + 1) % batch_size == 0 && batch_means.len() < num_batches as usize
        {
            batch_means.push(batch_acc / batch_size as f64);
            batch_acc = 0.0;
        }
        state = sample_index(&mut rng, &cm.transition[state]);
    }
    let average = total / steps as f64;

    let variance_estimate = if batch_means.len() >= 2 {
        let grand: f64 = batch_means.iter().sum::<f64>() / batch_means.len() as f64;
        let ss: f64 = batch_means.iter().map(|m| (m - grand).powi(2)).sum();
        batch_size as f64 * ss / (batch_means.len() - 1) as f64
    } else {
        0.0
    };

    Ok(SimReport {
        average,
        variance_estimate,
        steps,
        seed,
    })
}
