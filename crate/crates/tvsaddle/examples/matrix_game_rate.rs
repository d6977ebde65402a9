//! Convex-concave (not strongly monotone) problems converge sublinearly:
//! the duality gap of the time-averaged iterate decays like 1/k.
//!
//! The instance is a matching-pennies game spread across five nodes — each
//! node sees a different perturbation of the payoff matrix, but the network
//! average is the classic game with the uniform mixed equilibrium. The
//! communication graph is a star whose hub moves every round.

use tvsaddle::graph::TopologySequence;
use tvsaddle::metrics::{evaluate, fit_sublinear_rate};
use tvsaddle::problems::SaddleProblem;
use tvsaddle::solver::{run, SolverConfig};

fn main() -> tvsaddle::Result<()> {
    let problem = SaddleProblem::matching_pennies(5, 0.5, 3)?;
    let topo = TopologySequence::from_spec("rotating_star:period=1", problem.nodes())?;
    println!(
        "matching pennies across {} nodes (payoff spread 0.5), L_max = {:.3}, mu = {}",
        problem.nodes(),
        problem.l_max(),
        problem.mu()
    );

    let cfg = SolverConfig {
        gamma: problem.default_gamma(),
        gossip_steps: 20,
        iterations: 4000,
        record_every: 250,
    };
    // Start away from the equilibrium: x favors heads, y favors tails.
    let z0 = vec![0.9, 0.1, 0.2, 0.8];
    let outcome = run(&problem, &topo, &cfg, &z0)?;
    let metrics = evaluate(&problem, outcome.trajectory());

    println!();
    println!(
        "{:>6} {:>10} {:>14} {:>14} {:>12}",
        "k", "rounds", "ergodic gap", "1/k guide", "consensus"
    );
    let mut guide_scale = None;
    for p in &metrics {
        let gap = p.gap.expect("games carry a gap certificate");
        if p.iteration == 0 {
            println!("{:>6} {:>10} {:>14.6e} {:>14} {:>12.2e}", 0, p.comm_rounds, gap, "-", p.consensus);
            continue;
        }
        let scale = *guide_scale.get_or_insert(gap * p.iteration as f64);
        println!(
            "{:>6} {:>10} {:>14.6e} {:>14.6e} {:>12.2e}",
            p.iteration,
            p.comm_rounds,
            gap,
            scale / p.iteration as f64,
            p.consensus
        );
    }

    let series: Vec<(f64, f64)> = metrics
        .iter()
        .filter(|p| p.iteration > 0)
        .filter_map(|p| p.gap.map(|g| (p.iteration as f64, g)))
        .collect();
    let exponent = fit_sublinear_rate(&series)?;
    println!();
    println!("fitted decay: gap ~ k^{exponent:.3} (the ergodic-average guarantee is k^-1)");

    // The 1/k ergodic rate is the worst-case guarantee for every
    // convex-concave instance. This particular game is friendlier: its
    // equilibrium is interior, so even the plain iterate converges.
    let last = metrics.last().unwrap();
    let z = outcome.trajectory().last().mean_iterate.clone();
    let last_gap = problem.gap(&z).expect("feasible point");
    println!(
        "final ergodic gap {:.3e} (guaranteed); final plain-iterate gap {:.3e} \
         (a bonus of this instance, not of the class)",
        last.gap.unwrap(),
        last_gap
    );
    Ok(())
}
