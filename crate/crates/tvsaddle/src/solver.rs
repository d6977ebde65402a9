//! The decentralized extra-step solver and its centralized counterpart.
//!
//! Each iteration performs two operator applications per node, each followed
//! by a multi-round gossip average and a projection:
//!
//! 1. every node takes a forward step from its current point with its local
//!    operator, the network averages the results, and the projection yields
//!    the half-step point;
//! 2. every node takes a second step **from its pre-half-step point** using
//!    the operator evaluated at the half-step, averages, and projects.
//!
//! With `gossip_steps = h`, one iteration therefore costs `2 (h + 1)`
//! communication rounds and two local operator evaluations per node. Step
//! sizes up to `1 / (4 l_max)` are safe for any problem this crate
//! generates; larger values are accepted and may diverge, which the run
//! reports as an outcome rather than silently producing garbage.

use crate::error::{Error, Result};
use crate::gossip::{gossip_cached, NodeStates};
use crate::graph::TopologySequence;
use crate::linalg::add_scaled;
use crate::mixing::MixingCache;
use crate::problems::SaddleProblem;

/// Magnitude beyond which an iterate is declared divergent.
const DIVERGENCE_LIMIT: f64 = 1e12;

/// Knobs for a solver run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Step size; the safe default is [`SaddleProblem::default_gamma`].
    pub gamma: f64,
    /// Gossip parameter `h`: each averaging phase multiplies by `h + 1`
    /// round-specific mixing matrices.
    pub gossip_steps: u64,
    /// Number of extra-step iterations.
    pub iterations: u64,
    /// Record a trajectory point every this many iterations (the initial
    /// and final points are always recorded).
    pub record_every: u64,
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "step size must be finite and positive, got {}",
                self.gamma
            )));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// One recorded instant of a run.
#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    /// Iterations completed within this run.
    pub iteration: u64,
    /// Total gossip multiplications consumed by the node states, including
    /// any from earlier runs the states were resumed from.
    pub comm_rounds: u64,
    /// Local operator evaluations per node within this run.
    pub operator_evals: u64,
    /// Average of the node iterates.
    pub mean_iterate: Vec<f64>,
    /// Running average of the half-step means — the ergodic iterate whose
    /// gap converges on merely convex-concave problems.
    pub ergodic_average: Vec<f64>,
    /// Mean squared deviation of node iterates from their average.
    pub consensus_error: f64,
}

/// Recorded points plus the final node states (for resumption).
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_states: NodeStates,
}

impl Trajectory {
    /// The last recorded point.
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("a trajectory always records its initial point")
    }
}

/// How a run ended: the full iteration budget, or an early divergence with
/// the points recorded up to the last healthy iterate.
#[derive(Clone, Debug)]
pub enum RunOutcome {
    Completed(Trajectory),
    Diverged { iteration: u64, detail: String, partial: Trajectory },
}

impl RunOutcome {
    /// The trajectory, regardless of how the run ended.
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            RunOutcome::Completed(t) => t,
            RunOutcome::Diverged { partial, .. } => partial,
        }
    }

    pub fn completed(&self) -> bool {
        matches!(self, RunOutcome::Completed(_))
    }
}

/// Both states produced by one iteration.
#[derive(Clone, Debug)]
pub struct StepResult {
    /// The nodes after the full iteration.
    pub states: NodeStates,
    /// The projected half-step the second operator evaluation used.
    pub half_step: NodeStates,
}

enum StepOutcome {
    Advanced(StepResult),
    Diverged(String),
}

fn blowup(states: &NodeStates) -> Option<String> {
    for (m, row) in states.rows().enumerate() {
        for (d, v) in row.iter().enumerate() {
            if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
                return Some(format!("node {m} coordinate {d} reached {v:.3e}"));
            }
        }
    }
    None
}

fn check_shapes(
    problem: &SaddleProblem,
    topo: &TopologySequence,
    states: &NodeStates,
) -> Result<()> {
    if topo.node_count() != problem.nodes() {
        return Err(Error::invalid(format!(
            "topology has {} nodes but the problem has {}",
            topo.node_count(),
            problem.nodes()
        )));
    }
    if states.node_count() != problem.nodes() {
        return Err(Error::invalid(format!(
            "states have {} nodes but the problem has {}",
            states.node_count(),
            problem.nodes()
        )));
    }
    if states.dim() != problem.dim() {
        return Err(Error::invalid(format!(
            "states have dimension {} but the problem has {}",
            states.dim(),
            problem.dim()
        )));
    }
    Ok(())
}

fn step_cached(
    problem: &SaddleProblem,
    topo: &TopologySequence,
    states: &NodeStates,
    gamma: f64,
    gossip_steps: u64,
    cache: &mut MixingCache,
) -> Result<StepOutcome> {
    // Forward step, average, project: the half-step point.
    let mut hat = states.clone();
    for m in 0..states.node_count() {
        let mut row = states.row(m).to_vec();
        let g = problem.local_operator(m, &row);
        add_scaled(&mut row, -gamma, &g);
        hat.set_row(m, &row);
    }
    if let Some(detail) = blowup(&hat) {
        return Ok(StepOutcome::Diverged(detail));
    }
    let mut half = gossip_cached(&hat, topo, gossip_steps, cache)?;
    for m in 0..half.node_count() {
        let projected = problem.project(half.row(m))?;
        half.set_row(m, &projected);
    }

    // Extra step from the original point, with the operator at the half step.
    let mut hat = half.clone();
    for m in 0..states.node_count() {
        let mut row = states.row(m).to_vec();
        let g = problem.local_operator(m, half.row(m));
        add_scaled(&mut row, -gamma, &g);
        hat.set_row(m, &row);
    }
    if let Some(detail) = blowup(&hat) {
        return Ok(StepOutcome::Diverged(detail));
    }
    let mut next = gossip_cached(&hat, topo, gossip_steps, cache)?;
    for m in 0..next.node_count() {
        let projected = problem.project(next.row(m))?;
        next.set_row(m, &projected);
    }

    Ok(StepOutcome::Advanced(StepResult { states: next, half_step: half }))
}

/// One extra-step iteration from explicit node states. Divergence surfaces
/// as [`Error::Divergence`] (with the iteration index of this single step,
/// zero).
pub fn extra_step_iteration(
    problem: &SaddleProblem,
    topo: &TopologySequence,
    states: &NodeStates,
    gamma: f64,
    gossip_steps: u64,
) -> Result<StepResult> {
    check_shapes(problem, topo, states)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("step size must be finite and positive, got {gamma}")));
    }
    let mut cache = MixingCache::new();
    match step_cached(problem, topo, states, gamma, gossip_steps, &mut cache)? {
        StepOutcome::Advanced(result) => Ok(result),
        StepOutcome::Diverged(detail) => Err(Error::Divergence { iteration: 0, detail }),
    }
}

/// Run the decentralized extra-step method from a common initial point
/// (projected, then replicated to every node).
pub fn run(
    problem: &SaddleProblem,
    topo: &TopologySequence,
    cfg: &SolverConfig,
    z0: &[f64],
) -> Result<RunOutcome> {
    let start = problem.project(z0)?;
    let states = NodeStates::replicate(&start, problem.nodes())?;
    run_from(problem, topo, cfg, states)
}

/// Run from explicit node states, continuing their gossip round cursor —
/// the resumption path for solve-until-accuracy loops. The ergodic average
/// restarts with this run.
pub fn run_from(
    problem: &SaddleProblem,
    topo: &TopologySequence,
    cfg: &SolverConfig,
    states: NodeStates,
) -> Result<RunOutcome> {
    cfg.validate()?;
    check_shapes(problem, topo, &states)?;

    let dim = problem.dim();
    let mut ergodic_sum = vec![0.0; dim];
    let mut ergodic_count = 0u64;
    let record = |k: u64, s: &NodeStates, sum: &[f64], count: u64| {
        let mean = s.mean_row();
        let ergodic = if count == 0 {
            mean.clone()
        } else {
            sum.iter().map(|v| v / count as f64).collect()
        };
        TrajectoryPoint {
            iteration: k,
            comm_rounds: s.round_cursor(),
            operator_evals: 2 * k,
            mean_iterate: mean,
            ergodic_average: ergodic,
            consensus_error: consensus_error(s),
        }
    };

    let mut points = vec![record(0, &states, &ergodic_sum, 0)];
    let mut current = states;
    let mut cache = MixingCache::new();
    for k in 1..=cfg.iterations {
        let outcome = step_cached(problem, topo, &current, cfg.gamma, cfg.gossip_steps, &mut cache)?;
        match outcome {
            StepOutcome::Diverged(detail) => {
                return Ok(RunOutcome::Diverged {
                    iteration: k,
                    detail,
                    partial: Trajectory { points, final_states: current },
                });
            }
            StepOutcome::Advanced(StepResult { states: next, half_step }) => {
                add_scaled(&mut ergodic_sum, 1.0, &half_step.mean_row());
                ergodic_count += 1;
                current = next;
                if k % cfg.record_every == 0 || k == cfg.iterations {
                    points.push(record(k, &current, &ergodic_sum, ergodic_count));
                }
            }
        }
    }
    Ok(RunOutcome::Completed(Trajectory { points, final_states: current }))
}

/// The same method with exact averaging for free: a single sequence driven
/// by the mean operator. Communication counters stay at zero and consensus
/// is exact.
pub fn centralized_extra_step(
    problem: &SaddleProblem,
    z0: &[f64],
    gamma: f64,
    iterations: u64,
    record_every: u64,
) -> Result<RunOutcome> {
    let cfg =
        SolverConfig { gamma, gossip_steps: 0, iterations, record_every };
    cfg.validate()?;
    let mut z = problem.project(z0)?;
    let dim = problem.dim();
    let mut ergodic_sum = vec![0.0; dim];
    let mut ergodic_count = 0u64;
    let record = |k: u64, z: &[f64], sum: &[f64], count: u64| TrajectoryPoint {
        iteration: k,
        comm_rounds: 0,
        operator_evals: 2 * k,
        mean_iterate: z.to_vec(),
        ergodic_average: if count == 0 {
            z.to_vec()
        } else {
            sum.iter().map(|v| v / count as f64).collect()
        },
        consensus_error: 0.0,
    };
    let mut points = vec![record(0, &z, &ergodic_sum, 0)];
    for k in 1..=iterations {
        let mut hat = z.clone();
        add_scaled(&mut hat, -gamma, &problem.operator(&z));
        if let Some(detail) = blowup_row(&hat) {
            return Ok(RunOutcome::Diverged {
                iteration: k,
                detail,
                partial: Trajectory { points, final_states: NodeStates::replicate(&z, 1)? },
            });
        }
        let half = problem.project(&hat)?;
        let mut hat = z.clone();
        add_scaled(&mut hat, -gamma, &problem.operator(&half));
        if let Some(detail) = blowup_row(&hat) {
            return Ok(RunOutcome::Diverged {
                iteration: k,
                detail,
                partial: Trajectory { points, final_states: NodeStates::replicate(&z, 1)? },
            });
        }
        z = problem.project(&hat)?;
        add_scaled(&mut ergodic_sum, 1.0, &half);
        ergodic_count += 1;
        if k % record_every == 0 || k == iterations {
            points.push(record(k, &z, &ergodic_sum, ergodic_count));
        }
    }
    Ok(RunOutcome::Completed(Trajectory {
        points,
        final_states: NodeStates::replicate(&z, 1)?,
    }))
}

fn blowup_row(row: &[f64]) -> Option<String> {
    for (d, v) in row.iter().enumerate() {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Some(format!("coordinate {d} reached {v:.3e}"));
        }
    }
    None
}

/// Mean squared deviation of the node rows from their average.
pub fn consensus_error(states: &NodeStates) -> f64 {
    let d = states.deviation_norm();
    d * d / states.node_count() as f64
}
