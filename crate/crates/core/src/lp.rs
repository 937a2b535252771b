//! Self-contained two-phase primal simplex for small dense LPs.
//!
//! Variables are nonnegative; rows carry a sense (`=`, `>=`, `<=`). Rows are
//! scaled to unit max-norm before solving so the absolute feasibility
//! tolerance stays meaningful for constraint entries of magnitude
//! `O(max |support|)`. Pivoting follows Bland's rule (lowest-index entering
//! and leaving among ties), which guarantees termination and makes the solver
//! a deterministic function of the problem bytes.

use thiserror::Error;

/// Absolute feasibility tolerance after row scaling.
pub const FEAS_TOL: f64 = 1e-9;

/// Pivot threshold; entries at most this size are treated as zero.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in LP data")]
    NonFinite,
    #[error("iteration limit of {0} pivots exceeded; instance is numerically pathological")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RowSense {
    Eq,
    Ge,
    Le,
}

/// `min c'x  s.t.  A x (sense) b,  x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    senses: Vec<RowSense>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<f64>,
        constraints: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        senses: Vec<RowSense>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        let m = constraints.len();
        if n == 0 || m == 0 {
            return Err(LpError::DimensionMismatch(
                "need at least one variable and one constraint".into(),
            ));
        }
        if rhs.len() != m || senses.len() != m {
            return Err(LpError::DimensionMismatch(format!(
                "{m} constraint rows but {} rhs entries and {} senses",
                rhs.len(),
                senses.len()
            )));
        }
        for row in &constraints {
            if row.len() != n {
                return Err(LpError::DimensionMismatch(format!(
                    "constraint row of length {} does not match {n} variables",
                    row.len()
                )));
            }
        }
        let finite = objective.iter().all(|v| v.is_finite())
            && rhs.iter().all(|v| v.is_finite())
            && constraints.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NonFinite);
        }
        Ok(LinearProgram {
            objective,
            constraints,
            rhs,
            senses,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }
}

/// Solve result. `Optimal` solutions are basic: at most `m` nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        solution: Vec<f64>,
        value: f64,
        /// Simplex multipliers for the original rows (one per constraint).
        duals: Vec<f64>,
    },
    Infeasible {
        /// Phase-one objective: total artificial mass that cannot be removed.
        gap: f64,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// Minimizes the LP objective with the two-phase simplex.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    Tableau::standardize(lp).run(&lp.objective, false)
}

/// Pure feasibility (phase one only): zero objective over the same rows.
///
/// Returns the deterministic basic feasible point found by Bland's rule, or
/// `Infeasible` with the phase-one gap.
pub fn feasibility(
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    senses: Vec<RowSense>,
) -> Result<LpOutcome, LpError> {
    let n = constraints.first().map(|r| r.len()).unwrap_or(0);
    let lp = LinearProgram::new(vec![0.0; n], constraints, rhs, senses)?;
    Tableau::standardize(&lp).run(&lp.objective, true)
}

/// Dense simplex tableau over structural, slack and artificial columns.
struct Tableau {
    /// body[i][j] for rows i, columns j; rhs kept separately.
    body: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    num_structural: usize,
    /// Column index where artificial variables start.
    art_start: usize,
    /// Per original row: multiplier mapping scaled duals back to the input rows.
    row_unscale: Vec<f64>,
    iteration_limit: usize,
}

impl Tableau {
    fn standardize(lp: &LinearProgram) -> Tableau {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let num_slack = lp
            .senses
            .iter()
            .filter(|s| !matches!(s, RowSense::Eq))
            .count();
        let art_start = n + num_slack;
        let total = art_start + m;

        let mut body = vec![vec![0.0; total]; m];
        let mut rhs = vec![0.0; m];
        let mut row_unscale = vec![0.0; m];
        let mut slack_col = n;
        for i in 0..m {
            let scale = lp.constraints[i]
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()))
                .max(f64::MIN_POSITIVE); // all-zero rows pass through unscaled
            let scale = if scale > f64::MIN_POSITIVE { scale } else { 1.0 };
            for j in 0..n {
                body[i][j] = lp.constraints[i][j] / scale;
            }
            rhs[i] = lp.rhs[i] / scale;
            match lp.senses[i] {
                RowSense::Eq => {}
                RowSense::Le => {
                    body[i][slack_col] = 1.0;
                    slack_col += 1;
                }
                RowSense::Ge => {
                    body[i][slack_col] = -1.0;
                    slack_col += 1;
                }
            }
            // Flip rows with negative rhs so phase one starts from b >= 0.
            let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
            if flip < 0.0 {
                for v in body[i].iter_mut() {
                    *v = -*v;
                }
                rhs[i] = -rhs[i];
            }
            row_unscale[i] = flip / scale;
            body[i][art_start + i] = 1.0;
        }

        Tableau {
            body,
            rhs,
            basis: (art_start..total).collect(),
            num_structural: n,
            art_start,
            row_unscale,
            iteration_limit: 50 * (total + m),
        }
    }

    fn run(mut self, objective: &[f64], phase_one_only: bool) -> Result<LpOutcome, LpError> {
        let m = self.body.len();

        // Phase one: minimize the sum of artificials.
        let mut phase1_cost = vec![0.0; self.art_start + m];
        for j in self.art_start..self.art_start + m {
            phase1_cost[j] = 1.0;
        }
        match self.optimize(&phase1_cost, false)? {
            Step::Optimal(gap) => {
                if gap > FEAS_TOL {
                    return Ok(LpOutcome::Infeasible { gap });
                }
            }
            Step::Unbounded => unreachable!("phase one is bounded below by zero"),
        }

        if !phase_one_only {
            // Phase two: original objective, artificials barred from entering.
            let mut cost = vec![0.0; self.art_start + m];
            cost[..self.num_structural].copy_from_slice(objective);
            match self.optimize(&cost, true)? {
                Step::Optimal(_) => {}
                Step::Unbounded => return Ok(LpOutcome::Unbounded),
            }
        }

        let mut solution = vec![0.0; self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                solution[b] = self.rhs[i];
            }
        }
        let value: f64 = objective
            .iter()
            .zip(&solution)
            .map(|(c, x)| c * x)
            .sum();

        // The artificial block of the tableau holds B^{-1}; multipliers are
        // y_i = c_B' (B^{-1} e_i), mapped back through row scaling and flips.
        let cost_of = |col: usize| -> f64 {
            if col < self.num_structural && !phase_one_only {
                objective[col]
            } else {
                0.0
            }
        };
        let mut duals = vec![0.0; m];
        for i in 0..m {
            let mut y = 0.0;
            for (k, &b) in self.basis.iter().enumerate() {
                y += cost_of(b) * self.body[k][self.art_start + i];
            }
            duals[i] = y * self.row_unscale[i];
        }

        Ok(LpOutcome::Optimal {
            solution,
            value,
            duals,
        })
    }

    /// Bland-rule simplex iterations for the given cost vector.
    /// Returns the optimal objective value over the current feasible region.
    fn optimize(&mut self, cost: &[f64], bar_artificials: bool) -> Result<Step, LpError> {
        let m = self.body.len();
        let total = cost.len();
        for _ in 0..self.iteration_limit {
            // Reduced costs r_j = c_j - c_B' (B^{-1} A_j); entering column is
            // the lowest index with r_j < -tol.
            let mut entering = None;
            'cols: for j in 0..total {
                if bar_artificials && j >= self.art_start {
                    continue;
                }
                if self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    r -= cost[b] * self.body[i][j];
                }
                if r < -PIVOT_TOL {
                    entering = Some(j);
                    break 'cols;
                }
            }
            let Some(enter) = entering else {
                let obj: f64 = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b] * self.rhs[i])
                    .sum();
                return Ok(Step::Optimal(obj));
            };

            // Ratio test; ties resolved toward the smallest basis variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.body[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-15
                                || (ratio <= lr + 1e-15 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((li, _)) = leave else {
                return Ok(Step::Unbounded);
            };
            self.pivot(li, enter);
        }
        Err(LpError::IterationLimit(self.iteration_limit))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.body.len();
        let piv = self.body[row][col];
        for v in self.body[row].iter_mut() {
            *v /= piv;
        }
        self.rhs[row] /= piv;
        self.body[row][col] = 1.0;
        let pivot_row = self.body[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..m {
            if i == row {
                continue;
            }
            let factor = self.body[i][col];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in self.body[i].iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.body[i][col] = 0.0;
            self.rhs[i] -= factor * pivot_rhs;
            if self.rhs[i].abs() < 1e-15 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}

enum Step {
    Optimal(f64),
    Unbounded,
}
