//! The acceptance gate: one test per shipped guarantee, each printing a
//! single `criterion N: PASS/FAIL` line with the measured quantity and its
//! threshold. Tolerances are stated inline; nothing here is tuned to pass.

use tvsaddle::config::{execute, ExperimentConfig};
use tvsaddle::gossip::{gossip_round, rounds_for_accuracy, NodeStates};
use tvsaddle::graph::TopologySequence;
use tvsaddle::linalg::SymMatrix;
use tvsaddle::metrics::{distance_sq, evaluate, fit_linear_rate, fit_sublinear_rate};
use tvsaddle::mixing::{chi_of, laplacian_of, validate_assumption4, Assumption4Violation, GossipMatrix};
use tvsaddle::problems::{
    check_operator_constants, MatrixGameSpec, QuadraticParams, QuadraticSpec, SaddleProblem,
};
use tvsaddle::solver::{centralized_extra_step, run, run_from, RunOutcome, SolverConfig};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
}

/// Deterministic pseudo-random values in [-1, 1] without touching an RNG.
fn noise(seed: u64, i: usize, j: usize) -> f64 {
    let x = (seed ^ ((i as u64) << 32) ^ (j as u64)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

/// Criterion 1: on the rotating star with M=3 (chi = 3, rho = 2/3), the
/// deviation of zero-mean inputs shrinks by at least the factor rho every
/// round, over 50 rounds, with additive slack 1e-9.
#[test]
fn gossip_contraction_is_at_least_rho_per_round() {
    let m = 3;
    let dim = 3;
    let topo = TopologySequence::from_spec("rotating_star:period=1", m).unwrap();
    let chi = chi_of(&topo, 50).unwrap();
    assert!((chi - 3.0).abs() <= 1e-9, "chi = {chi}");
    let rho = 2.0 / 3.0;

    // Zero-mean random inputs: draw, then subtract the column means.
    let mut rows: Vec<Vec<f64>> =
        (0..m).map(|i| (0..dim).map(|j| noise(41, i, j)).collect()).collect();
    for j in 0..dim {
        let mean: f64 = rows.iter().map(|r| r[j]).sum::<f64>() / m as f64;
        for r in rows.iter_mut() {
            r[j] -= mean;
        }
    }
    let mut states = NodeStates::from_rows(&rows).unwrap();

    let mut worst_ratio: f64 = 0.0;
    let mut pass = true;
    for _ in 0..50 {
        let before = states.deviation_norm();
        states = gossip_round(&states, &topo).unwrap();
        let after = states.deviation_norm();
        if after > rho * before + 1e-9 {
            pass = false;
        }
        if before > 0.0 {
            worst_ratio = worst_ratio.max(after / before);
        }
    }
    report(
        "1",
        pass,
        &format!("worst per-round deviation ratio {worst_ratio:.9} vs rho = {rho:.9} (slack 1e-9, 50 rounds)"),
    );
    assert!(pass);
}

/// Criterion 2: one multiplication on the complete graph averages exactly —
/// consensus error at most 1e-12 — for M in {2, 3, 5, 10}.
#[test]
fn complete_graph_averages_in_one_round() {
    let mut pass = true;
    let mut details = Vec::new();
    for m in [2usize, 3, 5, 10] {
        let topo = TopologySequence::from_spec("complete", m).unwrap();
        let rows: Vec<Vec<f64>> =
            (0..m).map(|i| (0..4).map(|j| 5.0 * noise(17, i, j)).collect()).collect();
        let states = NodeStates::from_rows(&rows).unwrap();
        let mixed = gossip_round(&states, &topo).unwrap();
        let dev = mixed.deviation_norm();
        if dev > 1e-12 {
            pass = false;
        }
        details.push(format!("M={m}: {dev:.2e}"));
    }
    report("2", pass, &format!("one-round deviation [{}] vs 1e-12", details.join(", ")));
    assert!(pass);
}

/// Criterion 3: on a complete graph with H=0, the decentralized method
/// reproduces centralized extragradient to 1e-10 over 50 iterations, on a
/// strongly monotone quadratic and on matching pennies.
#[test]
fn complete_graph_run_matches_centralized_extragradient() {
    let quad = SaddleProblem::quadratic(
        QuadraticSpec::generate(&QuadraticParams {
            nodes: 5,
            nx: 2,
            ny: 2,
            mu: 0.1,
            l_max: 1.0,
            heterogeneity: 0.7,
            seed: 8,
        })
        .unwrap(),
    )
    .unwrap();
    let pennies = SaddleProblem::matching_pennies(5, 0.5, 3).unwrap();

    let mut pass = true;
    let mut details = Vec::new();
    for (label, problem, z0) in [
        ("quadratic", &quad, vec![1.5; 4]),
        ("pennies", &pennies, vec![0.9, 0.1, 0.2, 0.8]),
    ] {
        let topo = TopologySequence::from_spec("complete", problem.nodes()).unwrap();
        let gamma = problem.default_gamma();
        let cfg = SolverConfig { gamma, gossip_steps: 0, iterations: 50, record_every: 1 };
        let dec = run(problem, &topo, &cfg, &z0).unwrap();
        let cen = centralized_extra_step(problem, &z0, gamma, 50, 1).unwrap();
        let dec = dec.trajectory();
        let cen = cen.trajectory();
        assert_eq!(dec.points.len(), cen.points.len());
        let mut worst: f64 = 0.0;
        for (d, c) in dec.points.iter().zip(&cen.points) {
            worst = worst.max(distance_sq(&d.mean_iterate, &c.mean_iterate).sqrt());
            worst = worst.max(distance_sq(&d.ergodic_average, &c.ergodic_average).sqrt());
        }
        if worst > 1e-10 {
            pass = false;
        }
        details.push(format!("{label}: {worst:.2e}"));
    }
    report("3", pass, &format!("worst trajectory discrepancy [{}] vs 1e-10, 50 iterations", details.join(", ")));
    assert!(pass);
}

/// The pinned strongly monotone instance shared by both clauses of
/// criterion 4: mu = 0.1, L = 1, five nodes on a ring, gamma = 1/(4L), and
/// per-phase gossip depth from the certified budget for a 1e-10 contraction.
fn linear_rate_run() -> (SaddleProblem, Vec<tvsaddle::metrics::MetricPoint>, f64, u64) {
    let problem = SaddleProblem::quadratic(
        QuadraticSpec::generate(&QuadraticParams {
            nodes: 5,
            nx: 2,
            ny: 2,
            mu: 0.1,
            l_max: 1.0,
            heterogeneity: 0.5,
            seed: 0,
        })
        .unwrap(),
    )
    .unwrap();
    let topo = TopologySequence::from_spec("ring", 5).unwrap();
    let chi = chi_of(&topo, 1).unwrap();
    let budget = rounds_for_accuracy(chi, 1e-10).unwrap();
    let cfg = SolverConfig {
        gamma: 0.25,
        gossip_steps: budget - 1,
        iterations: 1000,
        record_every: 1,
    };
    let z0 = vec![0.0; problem.dim()];
    let outcome = run(&problem, &topo, &cfg, &z0).unwrap();
    assert!(outcome.completed(), "conservative step size cannot diverge");
    let metrics = evaluate(&problem, outcome.trajectory());
    (problem, metrics, chi, budget)
}

/// Criterion 4, rate clause: the fitted per-communication-round exponent of
/// the mean iterate's squared distance must be at most half the guaranteed
/// exponent -mu/(8 L chi).
#[test]
fn linear_rate_per_round_exponent_meets_half_the_bound() {
    let (_, metrics, chi, budget) = linear_rate_run();
    let series: Vec<(f64, f64)> = metrics
        .iter()
        .filter_map(|p| p.dist_sq.map(|d| (p.comm_rounds as f64, d)))
        .collect();
    let slope = fit_linear_rate(&series).unwrap();
    let required = -0.1 / (8.0 * 1.0 * chi) * 0.5;
    let pass = slope <= required;
    report(
        "4a",
        pass,
        &format!(
            "fitted exponent per round {slope:.6e} vs required <= {required:.6e} \
             (chi = {chi:.6}, {budget} gossip rounds per phase; \
             per-iteration exponent {:.6e})",
            slope * (2 * budget) as f64
        ),
    );
    assert!(
        pass,
        "fitted per-round exponent {slope:.3e} does not reach half the guaranteed \
         per-round bound {required:.3e}; see the pass/fail line for the measured numbers"
    );
}

/// Criterion 4, budget clause: the run reaches squared distance 1e-8 within
/// 100 * chi * (L/mu) * ln(R0^2 / 1e-8) iterations.
#[test]
fn linear_rate_reaches_target_within_iteration_budget() {
    let (_, metrics, chi, _) = linear_rate_run();
    let r0_sq = metrics[0].dist_sq.unwrap();
    let allowed = (100.0 * chi * (1.0 / 0.1) * (r0_sq / 1e-8).ln()).ceil() as u64;
    let reached = metrics
        .iter()
        .find(|p| p.dist_sq.map(|d| d <= 1e-8).unwrap_or(false))
        .map(|p| p.iteration);
    let pass = reached.map(|k| k <= allowed).unwrap_or(false);
    report(
        "4b",
        pass,
        &format!(
            "squared distance hits 1e-8 at iteration {reached:?} vs allowed {allowed} \
             (R0^2 = {r0_sq:.3e}, chi = {chi:.6}, L/mu = 10)"
        ),
    );
    assert!(pass);
}

/// Criterion 5: matching pennies over a rotating star, K = 5000 — the
/// log-log slope of the ergodic gap over the last decade of iterations is
/// -1 +/- 0.2, and the fitter provably separates 1/k from 1/sqrt(k).
#[test]
fn ergodic_gap_decays_like_one_over_k() {
    let problem = SaddleProblem::matching_pennies(5, 0.5, 3).unwrap();
    let topo = TopologySequence::from_spec("rotating_star:period=1", 5).unwrap();
    let chi = chi_of(&topo, 50).unwrap();
    let budget = rounds_for_accuracy(chi, 1e-10).unwrap();
    let cfg = SolverConfig {
        gamma: problem.default_gamma(),
        gossip_steps: budget - 1,
        iterations: 5000,
        record_every: 50,
    };
    let z0 = vec![0.9, 0.1, 0.2, 0.8];
    let outcome = run(&problem, &topo, &cfg, &z0).unwrap();
    let metrics = evaluate(&problem, outcome.trajectory());

    // Restrict to the last decade (k in [500, 5000]); the fitter uses the
    // tail half of what it is given, so the fitted window sits inside it.
    let series: Vec<(f64, f64)> = metrics
        .iter()
        .filter(|p| p.iteration >= 500)
        .filter_map(|p| p.gap.map(|g| (p.iteration as f64, g)))
        .collect();
    let slope = fit_sublinear_rate(&series).unwrap();
    let pass_slope = (slope - (-1.0)).abs() <= 0.2;

    // Control: the same fitter on synthetic 1/k and 1/sqrt(k) data.
    let ks: Vec<f64> = (1..=200).map(|k| k as f64 * 25.0).collect();
    let one_over_k: Vec<(f64, f64)> = ks.iter().map(|&k| (k, 3.0 / k)).collect();
    let one_over_sqrt: Vec<(f64, f64)> = ks.iter().map(|&k| (k, 3.0 / k.sqrt())).collect();
    let s1 = fit_sublinear_rate(&one_over_k).unwrap();
    let s2 = fit_sublinear_rate(&one_over_sqrt).unwrap();
    let pass_control = (s1 + 1.0).abs() <= 0.05 && (s2 + 0.5).abs() <= 0.05 && s1 < -0.75 && s2 > -0.75;

    let pass = pass_slope && pass_control;
    report(
        "5",
        pass,
        &format!(
            "ergodic-gap slope {slope:.4} vs -1 +/- 0.2 over k in [500, 5000]; \
             control fits: 1/k -> {s1:.4}, 1/sqrt(k) -> {s2:.4}"
        ),
    );
    assert!(pass);
}

/// Criterion 6: solving the regularized game until its own gap certificate
/// is at most eps/2 leaves the original game's gap at most eps, for
/// eps in {0.1, 0.01}. The penalty is anchored away from the equilibrium so
/// the transfer is exercised, not vacuous.
#[test]
fn regularized_solve_transfers_to_the_original_game() {
    let game = SaddleProblem::matching_pennies(5, 0.5, 3).unwrap();
    let topo = TopologySequence::from_spec("rotating_star:period=1", 5).unwrap();
    let chi = chi_of(&topo, 50).unwrap();
    let budget = rounds_for_accuracy(chi, 1e-10).unwrap();
    let anchor = vec![0.9, 0.1, 0.2, 0.8];

    let mut pass = true;
    let mut details = Vec::new();
    for eps in [0.1, 0.01] {
        let reg = game.clone().regularize_at(eps, &anchor).unwrap();
        let cfg = SolverConfig {
            gamma: reg.default_gamma(),
            gossip_steps: budget - 1,
            iterations: 500,
            record_every: 500,
        };
        let mut states =
            NodeStates::replicate(&reg.project(&anchor).unwrap(), reg.nodes()).unwrap();
        let mut total = 0u64;
        let z = loop {
            let RunOutcome::Completed(trajectory) =
                run_from(&reg, &topo, &cfg, states).unwrap()
            else {
                panic!("conservative step size cannot diverge");
            };
            total += cfg.iterations;
            let z = trajectory.last().mean_iterate.clone();
            if reg.gap(&z).unwrap() <= eps / 2.0 {
                break z;
            }
            assert!(total < 200_000, "no convergence within the iteration guard");
            states = trajectory.final_states;
        };
        let reg_gap = reg.gap(&z).unwrap();
        let orig_gap = game.gap(&z).unwrap();
        if orig_gap > eps {
            pass = false;
        }
        details.push(format!(
            "eps={eps}: proxy gap {reg_gap:.3e} <= {:.0e} after {total} iterations, original gap {orig_gap:.3e}",
            eps / 2.0
        ));
    }
    report("6", pass, &format!("{}", details.join("; ")));
    assert!(pass);
}

/// Criterion 7: the validator passes every Laplacian generated over 100
/// random connected graphs, and flags a disconnected matrix and a
/// sparsity-violating one.
#[test]
fn validator_accepts_generated_graphs_and_flags_planted_defects() {
    let mut clean = 0usize;
    let mut graphs = 0usize;
    for seed in 0..100u64 {
        let m = 3 + (seed as usize % 8);
        let p = [0.15, 0.3, 0.5][seed as usize % 3];
        let topo =
            TopologySequence::from_spec(&format!("random:p={p},seed={seed}"), m).unwrap();
        for t in 0..3 {
            graphs += 1;
            let g = laplacian_of(&topo, t).unwrap();
            if validate_assumption4(&g, &topo, t).is_empty() {
                clean += 1;
            }
        }
    }

    // Planted defect 1: a two-component Laplacian on four nodes.
    let path = TopologySequence::from_spec("path", 4).unwrap();
    let disconnected = GossipMatrix::from_matrix(
        SymMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0, 0.0],
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, -1.0],
            vec![0.0, 0.0, -1.0, 1.0],
        ])
        .unwrap(),
        0,
    )
    .unwrap();
    let flags = validate_assumption4(&disconnected, &path, 0);
    let caught_disconnected =
        flags.iter().any(|v| matches!(v, Assumption4Violation::KernelTooLarge { .. }));

    // Planted defect 2: a valid Laplacian of the wrong graph.
    let ring = laplacian_of(&TopologySequence::from_spec("ring", 4).unwrap(), 0).unwrap();
    let flags = validate_assumption4(&ring, &path, 0);
    let caught_sparsity =
        flags.iter().any(|v| matches!(v, Assumption4Violation::SparsityMismatch { .. }));

    let pass = clean == graphs && caught_disconnected && caught_sparsity;
    report(
        "7",
        pass,
        &format!(
            "{clean}/{graphs} generated Laplacians clean over 100 random graphs; \
             disconnected flagged: {caught_disconnected}; wrong sparsity flagged: {caught_sparsity}"
        ),
    );
    assert!(pass);
}

/// Criterion 8: empirical monotonicity and Lipschitz constants on 1000
/// random feasible pairs stay within the claimed mu and L_max for every
/// instance family.
#[test]
fn operator_constants_hold_across_instance_families() {
    let quad = SaddleProblem::quadratic(
        QuadraticSpec::generate(&QuadraticParams {
            nodes: 4,
            nx: 3,
            ny: 2,
            mu: 0.2,
            l_max: 1.5,
            heterogeneity: 0.8,
            seed: 12,
        })
        .unwrap(),
    )
    .unwrap();
    let game = SaddleProblem::matrix_game(MatrixGameSpec::random(4, 3, 3, 13).unwrap()).unwrap();
    let pennies = SaddleProblem::matching_pennies(5, 0.5, 3).unwrap();
    let reg = pennies.clone().regularize(0.05).unwrap();

    let mut pass = true;
    let mut details = Vec::new();
    for (label, problem) in
        [("quadratic", &quad), ("game", &game), ("pennies", &pennies), ("regularized", &reg)]
    {
        let check = check_operator_constants(problem, 1000, 77).unwrap();
        assert_eq!(check.samples, 1000);
        let mono_ok = check.min_monotonicity_ratio >= problem.mu() - 1e-9;
        let lip_ok = check.max_lipschitz_ratio <= problem.l_max() * (1.0 + 1e-8);
        if !(mono_ok && lip_ok) {
            pass = false;
        }
        details.push(format!(
            "{label}: mono {:.3e} >= mu {:.3e}, lip {:.4} <= L_max {:.4}",
            check.min_monotonicity_ratio,
            problem.mu(),
            check.max_lipschitz_ratio,
            problem.l_max()
        ));
    }
    report("8", pass, &format!("1000 pairs per family — {}", details.join("; ")));
    assert!(pass);
}

/// Criterion 9: executing the same config with the same seed twice produces
/// byte-identical trajectory files.
#[test]
fn identical_seeds_reproduce_byte_identical_output() {
    let texts = [
        "problem=quadratic:mu=0.1,L=1,het=0.5,seed=0\ntopology=ring\nM=5\nK=200\nH=4\nseed=1\nrecord_every=10\n",
        "problem=matrix_game:nx=2,ny=2,seed=1\ntopology=rotating_star:period=1\nM=5\nK=200\nH=4\nseed=2\nrecord_every=10\n",
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (i, text) in texts.iter().enumerate() {
        let cfg = ExperimentConfig::parse(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        execute(&cfg, Some(&a)).unwrap();
        execute(&cfg, Some(&b)).unwrap();
        let csv_a = std::fs::read(a.join("trajectory.csv")).unwrap();
        let csv_b = std::fs::read(b.join("trajectory.csv")).unwrap();
        let header_a = std::fs::read(a.join("header.json")).unwrap();
        let header_b = std::fs::read(b.join("header.json")).unwrap();
        let same = csv_a == csv_b && header_a == header_b;
        if !same {
            pass = false;
        }
        details.push(format!("config {}: {} bytes, identical: {same}", i + 1, csv_a.len()));
    }
    report("9", pass, &format!("{}", details.join("; ")));
    assert!(pass);
}
