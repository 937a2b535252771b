//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Every tolerance is pinned in code. Generators are seeded, so the suite is
//! deterministic end to end. Criterion 10 (command-line contract) lives in
//! the CLI crate's own integration tests.

use cxmart::couplings::{
    compose_chain, conditional_kernel, icx_decompose, martingale_coupling,
    submartingale_coupling, verify_martingale, verify_submartingale,
};
use cxmart::instances::{
    broken_pair, icx_pair, kernel_pair, pm_spec_pair, random_measure, spread_chain, spread_pair,
};
use cxmart::kernels::{assemble_conditional, pointwise_coupling, ThetaLaw};
use cxmart::measures::DiscreteMeasure;
use cxmart::mot::{mot_solve, ot_solve, CostSpec};
use cxmart::orders::{
    check_cx, check_cx_univariate, check_icx, check_icx_univariate, generate_family,
    screen_order, FamilyKind, OrderKind,
};
use cxmart::pm_mcmc::{
    asymptotic_variance, breve_marginal_report, build_breve_kernels, build_pm_kernel,
    compare_variances, stationary_check, PmChainSpec,
};
use cxmart::wasserstein::{dual_lower_bound, lipschitz_family_for, w1_lp, w1_univariate};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn second_moment(m: &DiscreteMeasure) -> f64 {
    m.expectation(|x| x.iter().map(|c| c * c).sum()).unwrap()
}

/// Criterion 1: on 500 spread pairs and 500 order-breaking perturbations per
/// order kind, the order check agrees with coupling feasibility in every
/// case, and every produced coupling verifies at 1e-8.
#[test]
fn criterion_1_strassen_equivalence() {
    let mut cases = 0;
    for seed in 0..500u64 {
        let (mu, nu) = spread_pair(2 + (seed as usize % 9), 1, seed);
        assert!(check_cx(&mu, &nu).unwrap().holds, "cx spread pair {seed}");
        let coupling = martingale_coupling(&mu, &nu).expect("ordered pair couples");
        assert!(verify_martingale(&coupling, 1e-8).passes, "seed {seed}");
        cases += 1;

        let (mu, nu) = broken_pair(OrderKind::Cx, 2 + (seed as usize % 9), 10_000 + seed);
        assert!(!check_cx(&mu, &nu).unwrap().holds, "broken cx pair {seed}");
        assert!(martingale_coupling(&mu, &nu).is_err());
        cases += 1;
    }
    for seed in 0..500u64 {
        let (mu, nu) = icx_pair(2 + (seed as usize % 9), 1, seed);
        assert!(check_icx(&mu, &nu).unwrap().holds, "icx pair {seed}");
        let coupling = submartingale_coupling(&mu, &nu).expect("ordered pair couples");
        assert!(verify_submartingale(&coupling, 1e-8).passes, "seed {seed}");
        cases += 1;

        let (mu, nu) = broken_pair(OrderKind::Icx, 2 + (seed as usize % 9), 20_000 + seed);
        assert!(!check_icx(&mu, &nu).unwrap().holds, "broken icx pair {seed}");
        assert!(submartingale_coupling(&mu, &nu).is_err());
        cases += 1;
    }
    assert_eq!(cases, 2000);
    println!("criterion 1 (Strassen equivalence, 2x1000 cases): PASS");
}

/// Criterion 2: the univariate breakpoint tests and the LP tests agree on
/// 1000 pairs per order kind, with ordered, broken and unrelated pairs mixed.
#[test]
fn criterion_2_univariate_oracle_agreement() {
    let mut disagreements = 0;
    let mut total = 0;
    for seed in 0..1000u64 {
        let (mu, nu) = match seed % 3 {
            0 => spread_pair(2 + (seed as usize % 7), 1, 30_000 + seed),
            1 => broken_pair(OrderKind::Cx, 2 + (seed as usize % 7), 31_000 + seed),
            _ => (
                random_measure(1 + (seed as usize % 8), 1, 32_000 + seed),
                random_measure(1 + (seed as usize % 5), 1, 33_000 + seed),
            ),
        };
        let uni = check_cx_univariate(&mu, &nu).unwrap().holds;
        let lp = check_cx(&mu, &nu).unwrap().holds;
        if uni != lp {
            disagreements += 1;
        }
        let uni = check_icx_univariate(&mu, &nu).unwrap().holds;
        let lp = check_icx(&mu, &nu).unwrap().holds;
        if uni != lp {
            disagreements += 1;
        }
        total += 2;
    }
    assert_eq!(disagreements, 0, "oracle disagreements out of {total}");
    println!("criterion 2 (breakpoint <=> LP, {total} checks): PASS");
}

/// Criterion 3: a 500-member max-affine screen never flags a cx-ordered
/// pair; a 2000-member screen falsifies at least 95% of non-ordered pairs.
#[test]
fn criterion_3_countable_family_screens() {
    let sound_family = generate_family(FamilyKind::MaxAffine, 500, 5, 4.0, 1, 1003);
    for seed in 0..500u64 {
        let (mu, nu) = spread_pair(2 + (seed as usize % 9), 1, seed);
        let verdict = screen_order(&mu, &nu, OrderKind::Cx, &sound_family).unwrap();
        assert!(verdict.holds, "screen flagged an ordered pair, seed {seed}");
    }

    let falsifier = generate_family(FamilyKind::MaxAffine, 2000, 5, 4.0, 1, 1004);
    let mut caught = 0;
    for seed in 0..500u64 {
        let (mu, nu) = broken_pair(OrderKind::Cx, 2 + (seed as usize % 9), 10_000 + seed);
        if !screen_order(&mu, &nu, OrderKind::Cx, &falsifier).unwrap().holds {
            caught += 1;
        }
    }
    assert!(
        caught >= 475,
        "screen caught only {caught}/500 non-ordered pairs"
    );
    println!("criterion 3 (family screens, soundness 500/500, falsified {caught}/500 >= 475): PASS");
}

/// Criterion 4: pointwise couplings over 50-label kernels are
/// byte-deterministic across runs and label permutations, and the assembled
/// conditional coupling reproduces its marginals and the per-label
/// conditional-mean identity within 1e-9.
#[test]
fn criterion_4_pointwise_coupling_determinism() {
    for (kind, seed) in [(OrderKind::Cx, 40_001u64), (OrderKind::Icx, 40_002u64)] {
        let (p, q) = kernel_pair(50, 5, 1, kind, seed);
        let first = pointwise_coupling(&p, &q, kind).unwrap();
        let second = pointwise_coupling(&p, &q, kind).unwrap();
        let bytes_first = serde_json::to_vec(&first).unwrap();
        let bytes_second = serde_json::to_vec(&second).unwrap();
        assert_eq!(bytes_first, bytes_second, "repeat run differs");

        // Rebuild the kernels with the label list reversed.
        let mut rev_p: Vec<_> = p.iter().map(|(l, m)| (l.to_owned(), m.clone())).collect();
        let mut rev_q: Vec<_> = q.iter().map(|(l, m)| (l.to_owned(), m.clone())).collect();
        rev_p.reverse();
        rev_q.reverse();
        let permuted = pointwise_coupling(
            &cxmart::kernels::FiniteKernel::new(rev_p).unwrap(),
            &cxmart::kernels::FiniteKernel::new(rev_q).unwrap(),
            kind,
        )
        .unwrap();
        assert_eq!(
            bytes_first,
            serde_json::to_vec(&permuted).unwrap(),
            "label permutation changed the output"
        );

        let n = p.len() as f64;
        let law = ThetaLaw::new(
            p.params()
                .iter()
                .map(|l| (l.clone(), 1.0 / n))
                .collect(),
        )
        .unwrap();
        let conditional = assemble_conditional(law, first).unwrap();
        let report = conditional.verify();
        assert!(report.x_marginal_residual <= 1e-9);
        assert!(report.y_marginal_residual <= 1e-9);
        assert!(report.conditional_mean_residual <= 1e-9);
    }
    println!("criterion 4 (50-label determinism + conditional assembly): PASS");
}

/// Criterion 5: length-5 cx chains compose with marginal and
/// conditional-mean residuals within 1e-9 on 100 seeded instances.
#[test]
fn criterion_5_chain_composition() {
    for seed in 0..100u64 {
        let chain = spread_chain(5, 2 + (seed as usize % 3), 1, 50_000 + seed);
        let path = compose_chain(&chain, OrderKind::Cx).unwrap();
        for (i, expected) in chain.iter().enumerate() {
            let marginal = path.marginal(i).unwrap();
            let residual = marginal.linf_distance(expected).unwrap();
            assert!(residual <= 1e-9, "marginal {i} residual {residual:.3e}, seed {seed}");
        }
        assert!(
            path.drift_residual() <= 1e-9,
            "drift residual {:.3e}, seed {seed}",
            path.drift_residual()
        );
    }
    println!("criterion 5 (length-5 chains, 100 instances): PASS");
}

/// Criterion 6: the icx decomposition dominates the source pointwise and its
/// intermediate measure is convex-dominated by the target, on 200 instances.
#[test]
fn criterion_6_icx_decomposition() {
    for seed in 0..200u64 {
        let (mu, nu) = icx_pair(2 + (seed as usize % 8), 1, 60_000 + seed);
        let dec = icx_decompose(&mu, &nu).unwrap();
        assert!(
            dec.dominance.iter().all(|&b| b),
            "pointwise dominance fails at seed {seed}"
        );
        assert!(
            check_cx(&dec.conditional_mean_measure, &nu).unwrap().holds,
            "W <=cx nu fails at seed {seed}"
        );
    }
    println!("criterion 6 (icx decomposition, 200 instances): PASS");
}

/// Criterion 7: W1 oracle agreement on 1000 pairs, metric axioms on 200
/// triples, and dual lower bounds that never exceed the LP value and grow
/// monotonically with the family.
#[test]
fn criterion_7_wasserstein() {
    for seed in 0..1000u64 {
        let mu = random_measure(1 + (seed as usize % 10), 1, 70_000 + seed);
        let nu = random_measure(1 + ((seed as usize * 7) % 10), 1, 71_000 + seed);
        let (lp_value, plan) = w1_lp(&mu, &nu).unwrap();
        let exact = w1_univariate(&mu, &nu).unwrap();
        assert!(
            (lp_value - exact).abs() <= 1e-8,
            "seed {seed}: LP {lp_value} vs CDF {exact}"
        );
        assert!(plan.marginal_residual() <= 1e-9);
    }

    for seed in 0..200u64 {
        let a = random_measure(1 + (seed as usize % 6), 1, 72_000 + seed);
        let b = random_measure(1 + (seed as usize % 4), 1, 73_000 + seed);
        let c = random_measure(1 + (seed as usize % 5), 1, 74_000 + seed);
        let (ab, _) = w1_lp(&a, &b).unwrap();
        let (ba, _) = w1_lp(&b, &a).unwrap();
        let (bc, _) = w1_lp(&b, &c).unwrap();
        let (ac, _) = w1_lp(&a, &c).unwrap();
        assert!((ab - ba).abs() <= 1e-9, "symmetry at seed {seed}");
        assert!(ac <= ab + bc + 1e-8, "triangle at seed {seed}");
        let (aa, _) = w1_lp(&a, &a).unwrap();
        assert!(aa <= 1e-12);
        if a != b {
            assert!(ab > 1e-9, "indiscernibles at seed {seed}");
        }
    }

    for seed in 0..20u64 {
        let mu = random_measure(4, 1, 75_000 + seed);
        let nu = random_measure(4, 1, 76_000 + seed);
        let (w1, _) = w1_lp(&mu, &nu).unwrap();
        let mut previous = 0.0;
        for count in [10, 100, 1000] {
            let family = lipschitz_family_for(&mu, &nu, count, 4, 77_000 + seed);
            let bound = dual_lower_bound(&mu, &nu, &family).unwrap();
            assert!(bound <= w1 + 1e-8, "dual bound exceeds W1 at seed {seed}");
            assert!(
                bound >= previous - 1e-12,
                "bound not monotone in family size at seed {seed}"
            );
            previous = bound;
        }
    }
    println!("criterion 7 (W1 oracle, metric axioms, dual bounds): PASS");
}

/// Exhaustive basic-solution enumeration for `min c'x, Ax = b, x >= 0`:
/// solves every column subset exactly and keeps the best feasible vertex.
/// Independent of the simplex implementation.
fn enumerate_vertices_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let rows = a.len();
    let cols = c.len();
    let mut best: Option<f64> = None;
    for mask in 1u32..(1 << cols) {
        let support: Vec<usize> = (0..cols).filter(|j| mask & (1 << j) != 0).collect();
        if support.len() > rows {
            continue;
        }
        // Gaussian elimination on the overdetermined system A_S x = b.
        let k = support.len();
        let mut m: Vec<Vec<f64>> = (0..rows)
            .map(|i| {
                let mut row: Vec<f64> = support.iter().map(|&j| a[i][j]).collect();
                row.push(b[i]);
                row
            })
            .collect();
        let mut rank = 0;
        for col in 0..k {
            let pivot = (rank..rows).max_by(|&x, &y| {
                m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()
            });
            let Some(p) = pivot else { break };
            if m[p][col].abs() < 1e-10 {
                continue;
            }
            m.swap(rank, p);
            let pv = m[rank][col];
            for val in &mut m[rank] {
                *val /= pv;
            }
            for r in 0..rows {
                if r != rank && m[r][col].abs() > 0.0 {
                    let f = m[r][col];
                    for cc in 0..=k {
                        let upd = m[rank][cc];
                        m[r][cc] -= f * upd;
                    }
                }
            }
            rank += 1;
        }
        if rank < k {
            continue; // dependent columns: covered by a smaller support
        }
        // Consistency of the remaining rows.
        if (rank..rows).any(|r| m[r][k].abs() > 1e-7) {
            continue;
        }
        let x: Vec<f64> = (0..k).map(|i| m[i][k]).collect();
        if x.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let value: f64 = support.iter().zip(&x).map(|(&j, v)| c[j] * v).sum();
        best = Some(match best {
            None => value,
            Some(cur) => cur.min(value),
        });
    }
    best
}

/// Builds the martingale-coupling equality system for the vertex oracle.
fn martingale_system(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = mu.len();
    let m = nu.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; n * m];
        for j in 0..m {
            row[i * m + j] = 1.0;
        }
        a.push(row);
        b.push(mu.weight(i));
    }
    for j in 0..m {
        let mut row = vec![0.0; n * m];
        for i in 0..n {
            row[i * m + j] = 1.0;
        }
        a.push(row);
        b.push(nu.weight(j));
    }
    for i in 0..n {
        let mut row = vec![0.0; n * m];
        for j in 0..m {
            row[i * m + j] = nu.point(j)[0] - mu.point(i)[0];
        }
        a.push(row);
        b.push(0.0);
    }
    (a, b)
}

/// Criterion 8: quadratic-cost invariance across feasible martingale plans,
/// the ot <= mot sandwich, and vertex-enumeration agreement on tiny
/// instances.
#[test]
fn criterion_8_martingale_optimal_transport() {
    let mut rng = ChaCha8Rng::seed_from_u64(80_000);
    let mut oracle_checked = 0;
    for seed in 0..200u64 {
        let (mu, nu) = spread_pair(2 + (seed as usize % 3), 1, 81_000 + seed);
        let target = second_moment(&nu) - second_moment(&mu);

        // Three distinct feasible martingale plans: the Bland basic plan and
        // two optima under unrelated random costs.
        let feasible = martingale_coupling(&mu, &nu).unwrap();
        let mut plans = vec![feasible];
        for _ in 0..2 {
            let table: Vec<Vec<f64>> = (0..mu.len())
                .map(|_| (0..nu.len()).map(|_| rng.random_range(-4.0..4.0)).collect())
                .collect();
            let (_, plan) = mot_solve(&mu, &nu, &CostSpec::table(table, 8.0)).unwrap();
            plans.push(plan);
        }
        for plan in &plans {
            assert!(verify_martingale(plan, 1e-8).passes);
            let cost: f64 = plan
                .plan()
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &p)| {
                            let d = nu.point(j)[0] - mu.point(i)[0];
                            p * d * d
                        })
                        .sum::<f64>()
                })
                .sum();
            assert!(
                (cost - target).abs() <= 1e-8,
                "quadratic invariance at seed {seed}: {cost} vs {target}"
            );
        }

        let (mot_sq, _) = mot_solve(&mu, &nu, &CostSpec::square()).unwrap();
        let (ot_sq, _) = ot_solve(&mu, &nu, &CostSpec::square()).unwrap();
        assert!(ot_sq <= mot_sq + 1e-8, "sandwich (square) at seed {seed}");
        let (mot_abs, _) = mot_solve(&mu, &nu, &CostSpec::abs()).unwrap();
        let (ot_abs, _) = ot_solve(&mu, &nu, &CostSpec::abs()).unwrap();
        assert!(ot_abs <= mot_abs + 1e-8, "sandwich (abs) at seed {seed}");

        // Vertex-enumeration oracle on tiny instances.
        if mu.len() * nu.len() <= 9 {
            let (a, b) = martingale_system(&mu, &nu);
            let mut costs = Vec::with_capacity(mu.len() * nu.len());
            for i in 0..mu.len() {
                for j in 0..nu.len() {
                    let d = nu.point(j)[0] - mu.point(i)[0];
                    costs.push(d * d);
                }
            }
            let oracle = enumerate_vertices_min(&costs, &a, &b)
                .expect("feasible instance has a vertex");
            assert!(
                (oracle - mot_sq).abs() <= 1e-7,
                "vertex oracle at seed {seed}: {oracle} vs {mot_sq}"
            );
            oracle_checked += 1;
        }
    }
    assert!(oracle_checked > 50, "too few tiny instances: {oracle_checked}");
    println!(
        "criterion 8 (MOT invariance, sandwich, {oracle_checked} vertex-oracle agreements): PASS"
    );
}

/// Criterion 9: variance ordering over 200 random 3-state chains with 5
/// random test functions each, detailed balance and breve marginal
/// identities within 1e-10, and the iid 2-state variance 1/4 within 1e-12.
#[test]
fn criterion_9_pseudo_marginal_ordering() {
    let mut comparisons = 0;
    for seed in 0..200u64 {
        let (spec, spec_prime) = pm_spec_pair(3, 3, 90_000 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(91_000 + seed);
        for _ in 0..5 {
            let f: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let report = compare_variances(&spec, &spec_prime, &f).unwrap();
            assert!(
                report.sigma2 <= report.sigma2_prime + 1e-8,
                "variance order violated at seed {seed}: {report:?}"
            );
            comparisons += 1;
        }

        let chain = build_pm_kernel(&spec);
        let chain_prime = build_pm_kernel(&spec_prime);
        assert!(stationary_check(&chain) <= 1e-10, "seed {seed}");
        assert!(stationary_check(&chain_prime) <= 1e-10, "seed {seed}");

        let couplings: Vec<_> = spec
            .weight_kernels()
            .iter()
            .zip(spec_prime.weight_kernels())
            .map(|(a, b)| martingale_coupling(a, b).unwrap())
            .collect();
        let breve = build_breve_kernels(&spec, &spec_prime, &couplings).unwrap();
        let report = breve_marginal_report(&spec, &spec_prime, &breve);
        assert!(report.detailed_balance <= 1e-10, "seed {seed}: {report:?}");
        assert!(
            report.detailed_balance_prime <= 1e-10,
            "seed {seed}: {report:?}"
        );
        assert!(report.law_residual <= 1e-10, "seed {seed}: {report:?}");
        assert!(report.law_prime_residual <= 1e-10, "seed {seed}: {report:?}");
        assert!(report.kernel_residual <= 1e-10, "seed {seed}: {report:?}");
        assert!(
            report.kernel_prime_residual <= 1e-10,
            "seed {seed}: {report:?}"
        );
    }
    assert_eq!(comparisons, 1000);

    // The iid two-state chain has sigma^2 = 1/4 for the state indicator.
    let unit = DiscreteMeasure::new(vec![vec![1.0]], vec![1.0]).unwrap();
    let spec = PmChainSpec::new(
        vec!["s0".into(), "s1".into()],
        vec![0.5, 0.5],
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        vec![unit.clone(), unit],
    )
    .unwrap();
    let cm = build_pm_kernel(&spec);
    let f = cm.lift_state_fn(&[0.0, 1.0]).unwrap();
    let sigma2 = asymptotic_variance(&cm, &f).unwrap();
    assert!((sigma2 - 0.25).abs() <= 1e-12, "iid variance {sigma2}");

    println!("criterion 9 (PM variance ordering, 1000/1000; residuals <= 1e-10; iid 1/4): PASS");
}
