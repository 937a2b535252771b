//! Seeded instance generators.
//!
//! Ordered pairs are built by mean-preserving spreads: replacing an atom `x`
//! by `{x - delta, x + delta}` with half its weight each preserves the
//! barycenter, so the result dominates the original in the convex order.
//! Generators re-verify the intended property before returning; they never
//! assume it.
//!
//! Coordinates are drawn from a dyadic grid so spread arithmetic stays exact
//! and generated instances are reproducible across platforms.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::couplings::kind_coupling;
use crate::kernels::FiniteKernel;
use crate::measures::DiscreteMeasure;
use crate::orders::{check_cx_univariate, check_icx_univariate, OrderKind};
use crate::pm_mcmc::PmChainSpec;

/// Random measure with up to `atoms` support points on the dyadic grid
/// `Z/8` in `[-4, 4]^dim`.
pub fn random_measure(atoms: usize, dim: usize, seed: u64) -> DiscreteMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_measure_with(&mut rng, atoms, dim)
}

pub(crate) fn random_measure_with<R: Rng>(rng: &mut R, atoms: usize, dim: usize) -> DiscreteMeasure {
    assert!(atoms >= 1 && dim >= 1);
    loop {
        let points: Vec<Vec<f64>> = (0..atoms)
            .map(|_| {
                (0..dim)
                    .map(|_| rng.random_range(-32i32..=32) as f64 / 8.0)
                    .collect()
            })
            .collect();
        let counts: Vec<u32> = (0..atoms).map(|_| rng.random_range(1..=8)).collect();
        let total: u32 = counts.iter().sum();
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        // Duplicate points merge; only a fully degenerate draw can fail.
        if let Ok(m) = DiscreteMeasure::new(points, weights) {
            return m;
        }
    }
}

/// Mean-preserving spread: splits a random subset of atoms along a random
/// coordinate. The result dominates `m` in the convex order.
pub(crate) fn spread_of<R: Rng>(rng: &mut R, m: &DiscreteMeasure) -> DiscreteMeasure {
    let dim = m.dim();
    loop {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut split_any = false;
        for (p, w) in m.atoms() {
            if rng.random_range(0..4) < 3 {
                split_any = true;
                let axis = rng.random_range(0..dim);
                let delta = rng.random_range(1i32..=8) as f64 / 8.0;
                let mut lo = p.to_vec();
                let mut hi = p.to_vec();
                lo[axis] -= delta;
                hi[axis] += delta;
                points.push(lo);
                points.push(hi);
                weights.push(w / 2.0);
                weights.push(w / 2.0);
            } else {
                points.push(p.to_vec());
                weights.push(w);
            }
        }
        if split_any {
            return DiscreteMeasure::new(points, weights).expect("spread preserves mass");
        }
    }
}

/// A cx-ordered pair `(mu, nu)` with `nu` a mean-preserving spread of `mu`.
/// The order is re-verified before returning.
pub fn spread_pair(atoms: usize, dim: usize, seed: u64) -> (DiscreteMeasure, DiscreteMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mu = random_measure_with(&mut rng, atoms, dim);
        let nu = spread_of(&mut rng, &mu);
        if verified(&mu, &nu, OrderKind::Cx) {
            return (mu, nu);
        }
    }
}

/// An icx-ordered pair: a spread followed by an upward shift of the target.
pub fn icx_pair(atoms: usize, dim: usize, seed: u64) -> (DiscreteMeasure, DiscreteMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mu = random_measure_with(&mut rng, atoms, dim);
        let spread = spread_of(&mut rng, &mu);
        let shift: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(0i32..=8) as f64 / 8.0)
            .collect();
        let points: Vec<Vec<f64>> = spread
            .points()
            .iter()
            .map(|p| p.iter().zip(&shift).map(|(c, s)| c + s).collect())
            .collect();
        let nu = DiscreteMeasure::new(points, spread.weights().to_vec())
            .expect("shift preserves support structure");
        if verified(&mu, &nu, OrderKind::Icx) {
            return (mu, nu);
        }
    }
}

fn verified(mu: &DiscreteMeasure, nu: &DiscreteMeasure, kind: OrderKind) -> bool {
    if mu.dim() == 1 {
        let verdict = match kind {
            OrderKind::Cx => check_cx_univariate(mu, nu),
            OrderKind::Icx => check_icx_univariate(mu, nu),
        };
        verdict.map(|v| v.holds).unwrap_or(false)
    } else {
        kind_coupling(mu, nu, kind).is_ok()
    }
}

/// A univariate pair that provably violates the requested order, produced by
/// perturbing the target of an ordered pair until the exact breakpoint test
/// fails.
pub fn broken_pair(kind: OrderKind, atoms: usize, seed: u64) -> (DiscreteMeasure, DiscreteMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mu = random_measure_with(&mut rng, atoms, 1);
        let base = spread_of(&mut rng, &mu);
        // Move one atom; downward moves chip at the mean condition, inward
        // moves chip at the spread condition.
        let mut points = base.points().to_vec();
        let idx = rng.random_range(0..points.len());
        let delta = rng.random_range(2i32..=12) as f64 / 8.0;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        points[idx][0] += sign * delta;
        let Ok(nu) = DiscreteMeasure::new(points, base.weights().to_vec()) else {
            continue;
        };
        let broken = match kind {
            OrderKind::Cx => !check_cx_univariate(&mu, &nu).unwrap().holds,
            OrderKind::Icx => !check_icx_univariate(&mu, &nu).unwrap().holds,
        };
        if broken {
            return (mu, nu);
        }
    }
}

/// A chain `mu_1 <=cx mu_2 <=cx ... <=cx mu_len` of iterated spreads.
pub fn spread_chain(len: usize, atoms: usize, dim: usize, seed: u64) -> Vec<DiscreteMeasure> {
    assert!(len >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = Vec::with_capacity(len);
    chain.push(random_measure_with(&mut rng, atoms, dim));
    for _ in 1..len {
        let next = spread_of(&mut rng, chain.last().unwrap());
        chain.push(next);
    }
    chain
}

/// A pointwise-ordered pair of kernels over `num_labels` labels.
pub fn kernel_pair(
    num_labels: usize,
    atoms: usize,
    dim: usize,
    kind: OrderKind,
    seed: u64,
) -> (FiniteKernel, FiniteKernel) {
    assert!(num_labels >= 1);
    let mut lows = Vec::with_capacity(num_labels);
    let mut highs = Vec::with_capacity(num_labels);
    for i in 0..num_labels {
        let pair_seed = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        let (mu, nu) = match kind {
            OrderKind::Cx => spread_pair(atoms, dim, pair_seed),
            OrderKind::Icx => icx_pair(atoms, dim, pair_seed),
        };
        let label = format!("theta{i:03}");
        lows.push((label.clone(), mu));
        highs.push((label, nu));
    }
    (
        FiniteKernel::new(lows).expect("labels are unique"),
        FiniteKernel::new(highs).expect("labels are unique"),
    )
}

/// Random positive univariate measure with mean exactly normalized to 1 and
/// strictly positive support.
fn random_weight_kernel<R: Rng>(rng: &mut R, max_atoms: usize) -> DiscreteMeasure {
    let atoms = rng.random_range(1..=max_atoms);
    loop {
        let points: Vec<Vec<f64>> = (0..atoms)
            .map(|_| vec![rng.random_range(2i32..=16) as f64 / 8.0])
            .collect();
        let counts: Vec<u32> = (0..atoms).map(|_| rng.random_range(1..=4)).collect();
        let total: u32 = counts.iter().sum();
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let Ok(m) = DiscreteMeasure::new(points, weights) else {
            continue;
        };
        let mean = m.mean()[0];
        let scaled: Vec<Vec<f64>> = m.points().iter().map(|p| vec![p[0] / mean]).collect();
        if let Ok(m) = DiscreteMeasure::new(scaled, m.weights().to_vec()) {
            return m;
        }
    }
}

/// Splits weight atoms without leaving the positive half-line.
fn spread_weight_kernel<R: Rng>(rng: &mut R, m: &DiscreteMeasure) -> DiscreteMeasure {
    loop {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut split_any = false;
        for (p, w) in m.atoms() {
            if rng.random_range(0..4) < 3 {
                split_any = true;
                let delta = p[0] * rng.random_range(1..=4) as f64 / 8.0;
                points.push(vec![p[0] - delta]);
                points.push(vec![p[0] + delta]);
                weights.push(w / 2.0);
                weights.push(w / 2.0);
            } else {
                points.push(vec![p[0]]);
                weights.push(w);
            }
        }
        if split_any {
            return DiscreteMeasure::new(points, weights).expect("spread preserves mass");
        }
    }
}

/// A pseudo-marginal spec pair sharing states, target and proposal, where
/// the second spec's weight kernels are per-state mean-preserving spreads of
/// the first's. Weight-kernel orderedness is re-verified.
pub fn pm_spec_pair(num_states: usize, max_weight_atoms: usize, seed: u64) -> (PmChainSpec, PmChainSpec) {
    assert!(num_states >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<String> = (0..num_states).map(|i| format!("x{i}")).collect();

    let counts: Vec<u32> = (0..num_states).map(|_| rng.random_range(1..=8)).collect();
    let total: u32 = counts.iter().sum();
    let target: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();

    let proposal: Vec<Vec<f64>> = (0..num_states)
        .map(|_| {
            let row: Vec<u32> = (0..num_states).map(|_| rng.random_range(1..=8)).collect();
            let total: u32 = row.iter().sum();
            row.iter().map(|&c| c as f64 / total as f64).collect()
        })
        .collect();

    loop {
        let kernels: Vec<DiscreteMeasure> = (0..num_states)
            .map(|_| random_weight_kernel(&mut rng, max_weight_atoms))
            .collect();
        let spreads: Vec<DiscreteMeasure> = kernels
            .iter()
            .map(|k| spread_weight_kernel(&mut rng, k))
            .collect();
        let ordered = kernels
            .iter()
            .zip(&spreads)
            .all(|(a, b)| check_cx_univariate(a, b).map(|v| v.holds).unwrap_or(false));
        if !ordered {
            continue;
        }
        let spec = PmChainSpec::new(
            states.clone(),
            target.clone(),
            proposal.clone(),
            kernels,
        );
        let spec_prime = PmChainSpec::new(
            states.clone(),
            target.clone(),
            proposal.clone(),
            spreads,
        );
        match (spec, spec_prime) {
            (Ok(a), Ok(b)) => return (a, b),
            // Spread arithmetic can push a mean outside the 1e-9 gate in
            // pathological draws; redraw.
            _ => continue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::{check_cx, check_icx};

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(spread_pair(5, 1, 3), spread_pair(5, 1, 3));
        assert_eq!(icx_pair(4, 2, 9), icx_pair(4, 2, 9));
        assert_eq!(
            broken_pair(OrderKind::Cx, 4, 5),
            broken_pair(OrderKind::Cx, 4, 5)
        );
        assert_eq!(pm_spec_pair(3, 3, 2), pm_spec_pair(3, 3, 2));
    }

    #[test]
    fn single_atom_spread() {
        let (mu, nu) = spread_pair(1, 1, 0);
        assert_eq!(mu.len(), 1);
        assert_eq!(nu.len(), 2);
        assert!((mu.mean()[0] - nu.mean()[0]).abs() <= 1e-12);
    }

    #[test]
    fn spread_pairs_pass_lp_check() {
        for seed in 0..25 {
            let (mu, nu) = spread_pair(5, 1, seed);
            assert!(check_cx(&mu, &nu).unwrap().holds, "seed {seed}");
        }
        for seed in 0..10 {
            let (mu, nu) = spread_pair(3, 2, seed);
            assert!(check_cx(&mu, &nu).unwrap().holds, "seed {seed}");
        }
    }

    #[test]
    fn icx_pairs_pass_lp_check() {
        for seed in 0..25 {
            let (mu, nu) = icx_pair(5, 1, seed);
            assert!(check_icx(&mu, &nu).unwrap().holds, "seed {seed}");
        }
    }

    #[test]
    fn broken_pairs_fail_checks() {
        for seed in 0..25 {
            let (mu, nu) = broken_pair(OrderKind::Cx, 5, seed);
            assert!(!check_cx_univariate(&mu, &nu).unwrap().holds);
        }
        for seed in 0..25 {
            let (mu, nu) = broken_pair(OrderKind::Icx, 5, seed);
            assert!(!check_icx_univariate(&mu, &nu).unwrap().holds);
        }
    }

    #[test]
    fn chains_are_ordered() {
        let chain = spread_chain(5, 4, 1, 11);
        assert_eq!(chain.len(), 5);
        for w in chain.windows(2) {
            assert!(check_cx_univariate(&w[0], &w[1]).unwrap().holds);
        }
    }

    #[test]
    fn pm_pairs_are_valid_and_ordered() {
        for seed in 0..10 {
            let (spec, spec_prime) = pm_spec_pair(3, 3, seed);
            assert_eq!(spec.states(), spec_prime.states());
            for (a, b) in spec
                .weight_kernels()
                .iter()
                .zip(spec_prime.weight_kernels())
            {
                assert!(check_cx_univariate(a, b).unwrap().holds);
            }
        }
    }
}
