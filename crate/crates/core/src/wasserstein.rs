//! Wasserstein-1 distance between discrete measures.
//!
//! The primary route is the transportation LP with Euclidean ground cost
//! `|x - y|`. For univariate measures the CDF-area formula gives an exact
//! independent oracle. The dual side is exercised by families of 1-Lipschitz
//! functions of the form `min_k (q_k + |x - y_k|)`, whose mean gaps lower
//! bound the distance.

use thiserror::Error;

use crate::couplings::{Coupling, CouplingError};
use crate::lp::{self, LpError, LpOutcome, RowSense};
use crate::measures::DiscreteMeasure;
use crate::orders::{generate_family, FamilyKind, TestFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WassersteinError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("univariate distance requires d=1, got d={0}")]
    NotUnivariate(usize),
    #[error("dual bound requires a lipschitz_min family, got {0:?}")]
    KindMismatch(FamilyKind),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Coupling(#[from] Box<CouplingError>),
}

pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Wasserstein-1 distance and an optimal transport plan via the
/// transportation LP with cost `|x_i - y_j|`.
pub fn w1_lp(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<(f64, Coupling), WassersteinError> {
    if mu.dim() != nu.dim() {
        return Err(WassersteinError::Dimension(mu.dim(), nu.dim()));
    }
    let n = mu.len();
    let m = nu.len();
    let mut objective = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            objective.push(euclidean(mu.point(i), nu.point(j)));
        }
    }
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
    let outcome = lp::solve(&lp::LinearProgram::new(objective, rows, rhs, senses)?)?;
    match outcome {
        LpOutcome::Optimal { solution, value, .. } => {
            let plan: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..m).map(|j| solution[i * m + j].max(0.0)).collect())
                .collect();
            let coupling =
                Coupling::new(mu.clone(), nu.clone(), plan).map_err(Box::new)?;
            Ok((value.max(0.0), coupling))
        }
        // The transportation polytope is nonempty (product coupling) and the
        // objective is bounded below by zero.
        other => unreachable!("transportation LP cannot be {other:?}"),
    }
}

/// Exact univariate Wasserstein-1 via the CDF-area formula
/// `int |F_mu(t) - F_nu(t)| dt`, summed over the merged support intervals.
pub fn w1_univariate(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<f64, WassersteinError> {
    if mu.dim() != 1 {
        return Err(WassersteinError::NotUnivariate(mu.dim()));
    }
    if nu.dim() != 1 {
        return Err(WassersteinError::NotUnivariate(nu.dim()));
    }
    let mut ts: Vec<f64> = mu
        .points()
        .iter()
        .chain(nu.points())
        .map(|p| p[0])
        .collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();

    let mut total = 0.0;
    let mut f_mu = 0.0;
    let mut f_nu = 0.0;
    let (mut i, mut j) = (0, 0);
    for window in ts.windows(2) {
        let (t, next) = (window[0], window[1]);
        while i < mu.len() && mu.point(i)[0] <= t {
            f_mu += mu.weight(i);
            i += 1;
        }
        while j < nu.len() && nu.point(j)[0] <= t {
            f_nu += nu.weight(j);
            j += 1;
        }
        total += (f_mu - f_nu).abs() * (next - t);
    }
    Ok(total)
}

/// Builds a Lipschitz dual family whose anchors cover a box containing both
/// supports inflated by 1; outside that box a 1-Lipschitz function cannot
/// widen the mean gap on these supports.
pub fn lipschitz_family_for(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    count: usize,
    max_pieces: usize,
    seed: u64,
) -> TestFamily {
    let bound = mu
        .points()
        .iter()
        .chain(nu.points())
        .flatten()
        .fold(0.0f64, |acc, c| acc.max(c.abs()))
        + 1.0;
    generate_family(
        FamilyKind::LipschitzMin,
        count,
        max_pieces,
        bound,
        mu.dim(),
        seed,
    )
}

/// Best lower bound on `W1(mu, nu)` over the family:
/// `max_g |E_mu g - E_nu g|`. Weak duality keeps this below the LP value.
pub fn dual_lower_bound(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    family: &TestFamily,
) -> Result<f64, WassersteinError> {
    if family.kind != FamilyKind::LipschitzMin {
        return Err(WassersteinError::KindMismatch(family.kind));
    }
    if mu.dim() != nu.dim() {
        return Err(WassersteinError::Dimension(mu.dim(), nu.dim()));
    }
    let mut best = 0.0f64;
    for member in &family.members {
        let gap = mu.expectation(|x| member.eval(x)).unwrap()
            - nu.expectation(|x| member.eval(x)).unwrap();
        best = best.max(gap.abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::{LipschitzPiece, Rational, TestFunction};

    fn m1(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(points.iter().map(|&p| vec![p]).collect(), weights.to_vec()).unwrap()
    }

    #[test]
    fn point_mass_distance() {
        let d0 = m1(&[0.0], &[1.0]);
        let da = m1(&[-2.5], &[1.0]);
        let (v, plan) = w1_lp(&d0, &da).unwrap();
        assert!((v - 2.5).abs() <= 1e-12);
        assert_eq!(plan.plan(), &[vec![1.0]]);
        assert_eq!(w1_univariate(&d0, &da).unwrap(), 2.5);
    }

    #[test]
    fn split_to_center() {
        let mu = m1(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[0.5], &[1.0]);
        let (v, _) = w1_lp(&mu, &nu).unwrap();
        assert!((v - 0.5).abs() <= 1e-9);
        assert!((w1_univariate(&mu, &nu).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn identical_measures() {
        let mu = m1(&[-1.0, 0.25, 3.0], &[0.25, 0.5, 0.25]);
        let (v, plan) = w1_lp(&mu, &mu).unwrap();
        assert!(v.abs() <= 1e-12);
        // Optimal mass stays on the diagonal.
        for (i, row) in plan.plan().iter().enumerate() {
            assert!((row[i] - mu.weight(i)).abs() <= 1e-9);
        }
        assert_eq!(w1_univariate(&mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn dyadic_spread_distance() {
        let mu = m1(&[-1.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[-2.0, 2.0], &[0.5, 0.5]);
        assert!((w1_univariate(&mu, &nu).unwrap() - 1.0).abs() <= 1e-12);
        let (v, _) = w1_lp(&mu, &nu).unwrap();
        assert!((v - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn univariate_oracle_matches_lp_on_fixed_grid() {
        let measures: Vec<DiscreteMeasure> = vec![
            m1(&[0.0], &[1.0]),
            m1(&[-1.0, 2.0], &[0.75, 0.25]),
            m1(&[-2.0, 0.5, 1.0], &[0.25, 0.25, 0.5]),
            m1(&[3.0], &[1.0]),
        ];
        for a in &measures {
            for b in &measures {
                let (v, _) = w1_lp(a, b).unwrap();
                let u = w1_univariate(a, b).unwrap();
                assert!((v - u).abs() <= 1e-8, "{v} vs {u}");
            }
        }
    }

    #[test]
    fn dual_bound_exact_on_point_masses() {
        // g(x) = |x - 1| separates d_0 from d_1 at the full distance.
        let family = TestFamily::from_members(
            FamilyKind::LipschitzMin,
            vec![TestFunction::LipschitzMin {
                pieces: vec![LipschitzPiece {
                    offset: Rational { num: 0, den: 1 },
                    anchor: vec![Rational { num: 1, den: 1 }],
                }],
            }],
        );
        let d0 = m1(&[0.0], &[1.0]);
        let d1 = m1(&[1.0], &[1.0]);
        let bound = dual_lower_bound(&d0, &d1, &family).unwrap();
        assert!((bound - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dual_bound_zero_on_equal_measures() {
        let mu = m1(&[-1.0, 1.0], &[0.5, 0.5]);
        let family = lipschitz_family_for(&mu, &mu, 50, 4, 3);
        assert_eq!(dual_lower_bound(&mu, &mu, &family).unwrap(), 0.0);
    }

    #[test]
    fn dual_bound_below_lp_value() {
        let mu = m1(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[0.5], &[1.0]);
        let family = lipschitz_family_for(&mu, &nu, 500, 4, 7);
        let bound = dual_lower_bound(&mu, &nu, &family).unwrap();
        let (v, _) = w1_lp(&mu, &nu).unwrap();
        assert!(bound > 0.0);
        assert!(bound <= v + 1e-8);
    }

    #[test]
    fn kind_mismatch() {
        let mu = m1(&[0.0], &[1.0]);
        let family = generate_family(FamilyKind::MaxAffine, 3, 2, 4.0, 1, 0);
        assert!(matches!(
            dual_lower_bound(&mu, &mu, &family),
            Err(WassersteinError::KindMismatch(_))
        ));
    }
}
