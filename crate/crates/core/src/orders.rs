//! Decision procedures for the convex (`<=cx`) and increasing convex
//! (`<=icx`) stochastic orders.
//!
//! Univariate pairs are decided exactly by breakpoint tests: `t -> E|X-t|`
//! and `t -> E(X-t)+` are piecewise linear with kinks only at support points,
//! and the mean conditions pin down the behaviour at infinity, so checking
//! the finitely many support breakpoints decides the order. In any dimension
//! the order is decided by (sub)martingale coupling feasibility. Randomized
//! families of max-affine test functions provide necessary-condition screens:
//! a finite family can falsify an order but never prove it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::couplings::{kind_coupling, CouplingError};
use crate::measures::DiscreteMeasure;
use crate::ORDER_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("univariate check requires d=1, got d={0}")]
    NotUnivariate(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("family kind {family:?} cannot screen the {requested:?} order")]
    KindMismatch {
        family: FamilyKind,
        requested: OrderKind,
    },
    #[error(transparent)]
    Coupling(#[from] Box<CouplingError>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Cx,
    Icx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    UnivariateBreakpoint,
    LpFeasibility,
    FamilyScreen,
}

/// Which scalar test function witnessed a univariate violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakpointTest {
    /// `x -> |x - t|`
    AbsDeviation,
    /// `x -> (x - t)+`
    PositivePart,
}

/// Evidence attached to a failed order check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Mean condition failed: equality for cx, `mean(mu) <= mean(nu)` for icx.
    MeanGap {
        mu_mean: Vec<f64>,
        nu_mean: Vec<f64>,
    },
    /// A breakpoint test function separates the measures by `gap`.
    Breakpoint {
        t: f64,
        test: BreakpointTest,
        gap: f64,
    },
    /// The coupling LP is infeasible by this phase-one gap.
    InfeasibilityGap { gap: f64 },
    /// A test-family member separates the measures by `gap`.
    FamilyMember { index: usize, gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub method: CheckMethod,
}

impl OrderVerdict {
    fn holds(method: CheckMethod) -> Self {
        OrderVerdict {
            holds: true,
            witness: None,
            method,
        }
    }

    fn fails(method: CheckMethod, witness: Witness) -> Self {
        OrderVerdict {
            holds: false,
            witness: Some(witness),
            method,
        }
    }
}

/// Merged support values of two univariate measures, deduplicated.
fn breakpoints(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<f64> {
    let mut ts: Vec<f64> = mu
        .points()
        .iter()
        .chain(nu.points())
        .map(|p| p[0])
        .collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    ts
}

fn require_univariate(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(), OrderError> {
    if mu.dim() != 1 {
        return Err(OrderError::NotUnivariate(mu.dim()));
    }
    if nu.dim() != 1 {
        return Err(OrderError::NotUnivariate(nu.dim()));
    }
    Ok(())
}

/// Exact univariate convex-order test via `E|X-t| <= E|Y-t|` at support
/// breakpoints plus the equal-means condition.
pub fn check_cx_univariate(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<OrderVerdict, OrderError> {
    check_cx_univariate_with_tol(mu, nu, ORDER_TOL)
}

pub fn check_cx_univariate_with_tol(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: f64,
) -> Result<OrderVerdict, OrderError> {
    require_univariate(mu, nu)?;
    let (mm, nm) = (mu.mean()[0], nu.mean()[0]);
    if (mm - nm).abs() > tol {
        return Ok(OrderVerdict::fails(
            CheckMethod::UnivariateBreakpoint,
            Witness::MeanGap {
                mu_mean: vec![mm],
                nu_mean: vec![nm],
            },
        ));
    }
    for t in breakpoints(mu, nu) {
        let f = |x: &[f64]| (x[0] - t).abs();
        let gap = mu.expectation(f).unwrap() - nu.expectation(f).unwrap();
        if gap > tol {
            return Ok(OrderVerdict::fails(
                CheckMethod::UnivariateBreakpoint,
                Witness::Breakpoint {
                    t,
                    test: BreakpointTest::AbsDeviation,
                    gap,
                },
            ));
        }
    }
    Ok(OrderVerdict::holds(CheckMethod::UnivariateBreakpoint))
}

/// Exact univariate increasing-convex-order test via `E(X-t)+ <= E(Y-t)+` at
/// support breakpoints plus the mean inequality (the `t -> -inf` limit).
pub fn check_icx_univariate(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<OrderVerdict, OrderError> {
    check_icx_univariate_with_tol(mu, nu, ORDER_TOL)
}

pub fn check_icx_univariate_with_tol(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: f64,
) -> Result<OrderVerdict, OrderError> {
    require_univariate(mu, nu)?;
    let (mm, nm) = (mu.mean()[0], nu.mean()[0]);
    if mm > nm + tol {
        return Ok(OrderVerdict::fails(
            CheckMethod::UnivariateBreakpoint,
            Witness::MeanGap {
                mu_mean: vec![mm],
                nu_mean: vec![nm],
            },
        ));
    }
    for t in breakpoints(mu, nu) {
        let f = |x: &[f64]| (x[0] - t).max(0.0);
        let gap = mu.expectation(f).unwrap() - nu.expectation(f).unwrap();
        if gap > tol {
            return Ok(OrderVerdict::fails(
                CheckMethod::UnivariateBreakpoint,
                Witness::Breakpoint {
                    t,
                    test: BreakpointTest::PositivePart,
                    gap,
                },
            ));
        }
    }
    Ok(OrderVerdict::holds(CheckMethod::UnivariateBreakpoint))
}

/// Decides `mu <=cx nu` in any dimension by martingale-coupling feasibility.
pub fn check_cx(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OrderVerdict, OrderError> {
    check_order(mu, nu, OrderKind::Cx)
}

/// Decides `mu <=icx nu` in any dimension by submartingale-coupling
/// feasibility.
pub fn check_icx(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OrderVerdict, OrderError> {
    check_order(mu, nu, OrderKind::Icx)
}

pub fn check_order(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: OrderKind,
) -> Result<OrderVerdict, OrderError> {
    if mu.dim() != nu.dim() {
        return Err(OrderError::Dimension(mu.dim(), nu.dim()));
    }
    match kind_coupling(mu, nu, kind) {
        Ok(_) => Ok(OrderVerdict::holds(CheckMethod::LpFeasibility)),
        Err(CouplingError::NotOrdered { gap, .. }) => Ok(OrderVerdict::fails(
            CheckMethod::LpFeasibility,
            Witness::InfeasibilityGap { gap },
        )),
        Err(other) => Err(OrderError::Coupling(Box::new(other))),
    }
}

// ---------------------------------------------------------------------------
// Test families
// ---------------------------------------------------------------------------

/// A rational number with denominator bounded by [`MAX_DENOMINATOR`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

pub const MAX_DENOMINATOR: i64 = 64;

impl Rational {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: Vec<Rational>,
    pub intercept: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzPiece {
    pub offset: Rational,
    pub anchor: Vec<Rational>,
}

/// One member of a test family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TestFunction {
    /// `x -> max_k (slope_k . x + intercept_k)`; convex, and increasing when
    /// all slopes are coordinate-wise nonnegative.
    MaxAffine { pieces: Vec<AffinePiece> },
    /// `x -> min_k (offset_k + |x - anchor_k|)`; 1-Lipschitz.
    LipschitzMin { pieces: Vec<LipschitzPiece> },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::MaxAffine { pieces } => pieces
                .iter()
                .map(|p| {
                    p.intercept.value()
                        + p.slope
                            .iter()
                            .zip(x)
                            .map(|(a, c)| a.value() * c)
                            .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max),
            TestFunction::LipschitzMin { pieces } => pieces
                .iter()
                .map(|p| {
                    let dist = p
                        .anchor
                        .iter()
                        .zip(x)
                        .map(|(a, c)| (c - a.value()).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    p.offset.value() + dist
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Convex max-affine functions: screens `<=cx`.
    MaxAffine,
    /// Increasing convex max-affine functions: screens `<=icx`.
    MaxAffineIncreasing,
    /// 1-Lipschitz minima of shifted cones: dual bounds for Wasserstein-1.
    LipschitzMin,
}

/// A finite, seed-deterministic family of test functions with rational
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub seed: u64,
    pub members: Vec<TestFunction>,
}

impl TestFamily {
    /// Hand-built family; `seed` is recorded as 0.
    pub fn from_members(kind: FamilyKind, members: Vec<TestFunction>) -> Self {
        TestFamily {
            kind,
            seed: 0,
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn random_rational<R: Rng>(rng: &mut R, bound: f64, nonnegative: bool) -> Rational {
    let den = rng.random_range(1..=MAX_DENOMINATOR);
    let max_num = (bound * den as f64).floor() as i64;
    let num = if nonnegative {
        rng.random_range(0..=max_num.max(0))
    } else {
        rng.random_range(-max_num.max(0)..=max_num.max(0))
    };
    Rational { num, den }
}

/// Generates a pseudo-random family of `count` members in dimension `dim`.
///
/// Members are drawn sequentially from a ChaCha stream, so for a fixed seed a
/// larger `count` extends the smaller family as a prefix. Coefficients are
/// rational with denominators at most 64 and magnitude at most `coeff_range`.
pub fn generate_family(
    kind: FamilyKind,
    count: usize,
    max_pieces: usize,
    coeff_range: f64,
    dim: usize,
    seed: u64,
) -> TestFamily {
    assert!(count >= 1, "count must be at least 1");
    assert!(max_pieces >= 1, "max_pieces must be at least 1");
    assert!(dim >= 1, "dim must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = (0..count)
        .map(|_| {
            let pieces = rng.random_range(1..=max_pieces);
            match kind {
                FamilyKind::MaxAffine | FamilyKind::MaxAffineIncreasing => {
                    let nonneg = matches!(kind, FamilyKind::MaxAffineIncreasing);
                    let pieces = (0..pieces)
                        .map(|_| AffinePiece {
                            slope: (0..dim)
                                .map(|_| random_rational(&mut rng, coeff_range, nonneg))
                                .collect(),
                            intercept: random_rational(&mut rng, coeff_range, false),
                        })
                        .collect();
                    TestFunction::MaxAffine { pieces }
                }
                FamilyKind::LipschitzMin => {
                    let pieces = (0..pieces)
                        .map(|_| LipschitzPiece {
                            offset: random_rational(&mut rng, coeff_range, false),
                            anchor: (0..dim)
                                .map(|_| random_rational(&mut rng, coeff_range, false))
                                .collect(),
                        })
                        .collect();
                    TestFunction::LipschitzMin { pieces }
                }
            }
        })
        .collect();
    TestFamily { kind, seed, members }
}

/// Necessary-condition screen: evaluates every family member and reports the
/// first violation `E_mu phi > E_nu phi + tol`, if any.
///
/// A verdict of `holds` only means "no violation found in this finite
/// family"; it is never a proof of the order.
pub fn screen_order(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: OrderKind,
    family: &TestFamily,
) -> Result<OrderVerdict, OrderError> {
    screen_order_with_tol(mu, nu, kind, family, ORDER_TOL)
}

pub fn screen_order_with_tol(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kind: OrderKind,
    family: &TestFamily,
    tol: f64,
) -> Result<OrderVerdict, OrderError> {
    let compatible = matches!(
        (kind, family.kind),
        (OrderKind::Cx, FamilyKind::MaxAffine)
            | (OrderKind::Icx, FamilyKind::MaxAffineIncreasing)
    );
    if !compatible {
        return Err(OrderError::KindMismatch {
            family: family.kind,
            requested: kind,
        });
    }
    if mu.dim() != nu.dim() {
        return Err(OrderError::Dimension(mu.dim(), nu.dim()));
    }
    for (index, member) in family.members.iter().enumerate() {
        let gap = mu.expectation(|x| member.eval(x)).unwrap()
            - nu.expectation(|x| member.eval(x)).unwrap();
        if gap > tol {
            return Ok(OrderVerdict::fails(
                CheckMethod::FamilyScreen,
                Witness::FamilyMember { index, gap },
            ));
        }
    }
    Ok(OrderVerdict::holds(CheckMethod::FamilyScreen))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(points.iter().map(|&p| vec![p]).collect(), weights.to_vec()).unwrap()
    }

    #[test]
    fn cx_univariate_examples() {
        let mu = m1(&[-1.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[-2.0, 2.0], &[0.5, 0.5]);
        assert!(check_cx_univariate(&mu, &nu).unwrap().holds);

        // Breakpoint table, frozen from direct evaluation: E|X-t| over
        // t in {-2,-1,1,2} is (2,1,1,2); E|Y-t| is constant 2 on [-2,2].
        for (t, ex, ey) in [
            (-2.0, 2.0, 2.0),
            (-1.0, 1.0, 2.0),
            (1.0, 1.0, 2.0),
            (2.0, 2.0, 2.0),
        ] {
            assert_eq!(mu.expectation(|x| (x[0] - t).abs()).unwrap(), ex);
            assert_eq!(nu.expectation(|x| (x[0] - t).abs()).unwrap(), ey);
        }

        let d0 = m1(&[0.0], &[1.0]);
        assert!(check_cx_univariate(&d0, &d0).unwrap().holds);

        let d1 = m1(&[1.0], &[1.0]);
        let verdict = check_cx_univariate(&d0, &d1).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(verdict.witness, Some(Witness::MeanGap { .. })));
    }

    #[test]
    fn icx_univariate_examples() {
        let d0 = m1(&[0.0], &[1.0]);
        let half = m1(&[0.0, 1.0], &[0.5, 0.5]);
        assert!(check_icx_univariate(&d0, &half).unwrap().holds);

        let d1 = m1(&[1.0], &[1.0]);
        let verdict = check_icx_univariate(&d1, &d0).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(verdict.witness, Some(Witness::MeanGap { .. })));

        // cx implies icx.
        let mu = m1(&[-1.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[-2.0, 2.0], &[0.5, 0.5]);
        assert!(check_icx_univariate(&mu, &nu).unwrap().holds);
    }

    #[test]
    fn icx_breakpoint_witness() {
        // Same mean but mu has a heavier upper tail: (X-t)+ catches it.
        let mu = m1(&[0.0, 2.0], &[0.5, 0.5]);
        let nu = m1(&[1.0], &[1.0]);
        let verdict = check_icx_univariate(&mu, &nu).unwrap();
        assert!(!verdict.holds);
        match verdict.witness {
            Some(Witness::Breakpoint { test, gap, .. }) => {
                assert_eq!(test, BreakpointTest::PositivePart);
                assert!(gap > ORDER_TOL);
            }
            other => panic!("expected breakpoint witness, got {other:?}"),
        }
    }

    #[test]
    fn lp_check_examples() {
        let center = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        let corners = DiscreteMeasure::new(
            vec![
                vec![-1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0],
            ],
            vec![0.25; 4],
        )
        .unwrap();
        assert!(check_cx(&center, &corners).unwrap().holds);

        let shifted = DiscreteMeasure::dirac(vec![1.0, 0.0]).unwrap();
        let verdict = check_cx(&shifted, &corners).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(
            verdict.witness,
            Some(Witness::InfeasibilityGap { .. })
        ));

        let mu = m1(&[-1.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[-2.0, 2.0], &[0.5, 0.5]);
        assert!(check_cx(&mu, &nu).unwrap().holds);
        assert!(check_icx(&mu, &nu).unwrap().holds);

        let d0 = m1(&[0.0], &[1.0]);
        let half = m1(&[0.0, 1.0], &[0.5, 0.5]);
        assert!(check_icx(&d0, &half).unwrap().holds);
        assert!(!check_icx(&m1(&[1.0], &[1.0]), &d0).unwrap().holds);
    }

    #[test]
    fn univariate_and_lp_agree_on_small_grid() {
        // Every pair of measures on {-1, 0, 1} with dyadic weights.
        let weight_sets: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 0.5, 0.5],
            vec![0.25, 0.5, 0.25],
            vec![0.5, 0.25, 0.25],
            vec![0.25, 0.25, 0.5],
        ];
        let measures: Vec<DiscreteMeasure> = weight_sets
            .iter()
            .map(|w| m1(&[-1.0, 0.0, 1.0], w))
            .collect();
        for a in &measures {
            for b in &measures {
                let uni = check_cx_univariate(a, b).unwrap().holds;
                let lp = check_cx(a, b).unwrap().holds;
                assert_eq!(uni, lp, "cx disagreement on {a:?} vs {b:?}");
                let uni = check_icx_univariate(a, b).unwrap().holds;
                let lp = check_icx(a, b).unwrap().holds;
                assert_eq!(uni, lp, "icx disagreement on {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn family_generation_deterministic() {
        let a = generate_family(FamilyKind::MaxAffine, 5, 3, 4.0, 2, 42);
        let b = generate_family(FamilyKind::MaxAffine, 5, 3, 4.0, 2, 42);
        assert_eq!(a, b);
        let c = generate_family(FamilyKind::MaxAffine, 5, 3, 4.0, 2, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn family_prefix_extension() {
        let small = generate_family(FamilyKind::LipschitzMin, 10, 4, 3.0, 1, 7);
        let large = generate_family(FamilyKind::LipschitzMin, 100, 4, 3.0, 1, 7);
        assert_eq!(&large.members[..10], &small.members[..]);
    }

    #[test]
    fn single_affine_member() {
        let fam = generate_family(FamilyKind::MaxAffine, 1, 1, 4.0, 1, 0);
        match &fam.members[0] {
            TestFunction::MaxAffine { pieces } => assert_eq!(pieces.len(), 1),
            other => panic!("expected max-affine member, got {other:?}"),
        }
    }

    #[test]
    fn increasing_members_are_monotone() {
        let fam = generate_family(FamilyKind::MaxAffineIncreasing, 50, 5, 4.0, 2, 11);
        let lows = [[-1.0, -2.0], [0.0, 0.0], [0.5, -0.25]];
        let highs = [[0.0, -1.0], [1.0, 2.0], [0.5, 0.75]];
        for member in &fam.members {
            if let TestFunction::MaxAffine { pieces } = member {
                for p in pieces {
                    assert!(p.slope.iter().all(|r| r.num >= 0));
                }
            }
            for (lo, hi) in lows.iter().zip(&highs) {
                assert!(member.eval(lo) <= member.eval(hi) + 1e-12);
            }
        }
    }

    #[test]
    fn screen_finds_mean_violation() {
        let d0 = m1(&[0.0], &[1.0]);
        let d1 = m1(&[1.0], &[1.0]);
        // Family containing phi(x) = -x.
        let family = TestFamily::from_members(
            FamilyKind::MaxAffine,
            vec![TestFunction::MaxAffine {
                pieces: vec![AffinePiece {
                    slope: vec![Rational { num: -1, den: 1 }],
                    intercept: Rational { num: 0, den: 1 },
                }],
            }],
        );
        let verdict = screen_order(&d0, &d1, OrderKind::Cx, &family).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(
            verdict.witness,
            Some(Witness::FamilyMember { index: 0, .. })
        ));
    }

    #[test]
    fn screen_never_flags_equal_measures() {
        let mu = m1(&[-1.0, 0.5, 2.0], &[0.25, 0.5, 0.25]);
        for seed in 0..5 {
            let family = generate_family(FamilyKind::MaxAffine, 100, 5, 4.0, 1, seed);
            assert!(screen_order(&mu, &mu, OrderKind::Cx, &family).unwrap().holds);
        }
    }

    #[test]
    fn screen_catches_reversed_order() {
        // mu = (1/2) d_{-2} + (1/2) d_2 is a spread of nu, so mu <=cx nu is
        // false and a modest random family finds a separating function.
        let mu = m1(&[-2.0, 2.0], &[0.5, 0.5]);
        let nu = m1(&[-1.0, 1.0], &[0.5, 0.5]);
        let family = generate_family(FamilyKind::MaxAffine, 200, 5, 4.0, 1, 1);
        let verdict = screen_order(&mu, &nu, OrderKind::Cx, &family).unwrap();
        assert!(!verdict.holds);
    }

    #[test]
    fn screen_kind_mismatch() {
        let mu = m1(&[0.0], &[1.0]);
        let family = generate_family(FamilyKind::MaxAffine, 3, 2, 4.0, 1, 0);
        assert!(matches!(
            screen_order(&mu, &mu, OrderKind::Icx, &family),
            Err(OrderError::KindMismatch { .. })
        ));
        let lip = generate_family(FamilyKind::LipschitzMin, 3, 2, 4.0, 1, 0);
        assert!(matches!(
            screen_order(&mu, &mu, OrderKind::Cx, &lip),
            Err(OrderError::KindMismatch { .. })
        ));
    }

    #[test]
    fn dimension_errors() {
        let mu = m1(&[0.0], &[1.0]);
        let nu2 = DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            check_cx_univariate(&nu2, &nu2),
            Err(OrderError::NotUnivariate(2))
        ));
        assert!(matches!(
            check_cx(&mu, &nu2),
            Err(OrderError::Dimension(1, 2))
        ));
    }
}
