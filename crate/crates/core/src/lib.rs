//! # cxmart
//!
//! Convex stochastic orders and martingale couplings for finitely supported
//! probability measures on `R^d`.
//!
//! The crate decides `mu <=cx nu` (convex order) and `mu <=icx nu` (increasing
//! convex order), constructs and verifies the (sub)martingale couplings that
//! characterise those orders, computes Wasserstein-1 distances and martingale
//! optimal transport plans, and builds finite-state pseudo-marginal MCMC chains
//! whose asymptotic variances are ordered whenever the weight distributions are
//! ordered per state.
//!
//! ## Modules
//!
//! | Module | What it does |
//! |--------|--------------|
//! | [`measures`] | Finitely supported measures in canonical form |
//! | [`lp`] | Dense two-phase simplex with Bland's rule |
//! | [`orders`] | `<=cx` / `<=icx` decision procedures and test families |
//! | [`couplings`] | (Sub)martingale couplings, chains, icx decomposition |
//! | [`wasserstein`] | W1 via LP, CDF oracle, dual Lipschitz bounds |
//! | [`kernels`] | Parameter-indexed measures, pointwise couplings |
//! | [`mot`] | Martingale and classical optimal transport |
//! | [`pm_mcmc`] | Pseudo-marginal chains and exact asymptotic variances |
//! | [`instances`] | Seeded instance generators (mean-preserving spreads) |
//!
//! ## Quick start
//!
//! ```rust
//! use cxmart::measures::DiscreteMeasure;
//! use cxmart::orders::check_cx;
//! use cxmart::couplings::{martingale_coupling, verify_martingale};
//!
//! let mu = DiscreteMeasure::new(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
//! let nu = DiscreteMeasure::new(vec![vec![-2.0], vec![2.0]], vec![0.5, 0.5]).unwrap();
//!
//! assert!(check_cx(&mu, &nu).unwrap().holds);
//! let coupling = martingale_coupling(&mu, &nu).unwrap();
//! assert!(verify_martingale(&coupling, 1e-8).passes);
//! ```
//!
//! All decision procedures are deterministic: identical inputs produce
//! bit-identical outputs, including the returned coupling plans. Values are
//! immutable after construction and safe to share across threads.

pub mod couplings;
pub mod instances;
pub mod kernels;
pub mod lp;
pub mod measures;
pub mod mot;
pub mod orders;
pub mod pm_mcmc;
pub mod wasserstein;

/// Default tolerance for order decisions and expectation comparisons.
pub const ORDER_TOL: f64 = 1e-9;
