//! Experiment configuration: plain-text parsing with collected issues,
//! resolution of `auto` settings into concrete solver parameters, run
//! execution with JSON/CSV output, parameter sweeps, and assumption
//! validation reports.
//!
//! Config files hold one `key=value` pair per line; blank lines and lines
//! starting with `#` are skipped. Keys: `problem`, `topology`, `M`, `K`
//! (required), `gamma`, `H`, `seed`, `record_every`, `out` (optional).
//! Malformed input never defaults silently — every problem is reported with
//! its line and field.
//!
//! Seeds flow top-down: the `TVSADDLE_SEED` environment variable overrides
//! the config seed; a problem spec without its own `seed=` inherits the
//! config seed; a random topology without one inherits the config seed
//! plus one.

use crate::error::{Error, Result};
use crate::gossip::rounds_for_accuracy;
use crate::graph::{parse_kv_args, TopologySequence};
use crate::metrics::{evaluate, fit_linear_rate, fit_sublinear_rate, MetricPoint};
use crate::mixing::{chi_of, laplacian_of, rho_of, validate_assumption4};
use crate::problems::{
    check_operator_constants, MatrixGameSpec, OperatorCheck, QuadraticParams, QuadraticSpec,
    SaddleProblem,
};
use crate::solver::{run, RunOutcome, SolverConfig, Trajectory};
use serde_json::json;
use std::fmt;
use std::path::{Path, PathBuf};

/// One problem found while parsing a config.
#[derive(Debug)]
pub struct ConfigIssue {
    /// 1-based config line; 0 for file-level issues such as missing keys.
    pub line: usize,
    pub field: String,
    pub message: String,
}

/// Every issue found in one parse, reported together.
#[derive(Debug)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configuration errors:")?;
        for issue in &self.0 {
            writeln!(f, "  line {}: {}: {}", issue.line, issue.field, issue.message)?;
        }
        Ok(())
    }
}

/// Step-size setting: resolved from the problem, or fixed.
#[derive(Clone, Debug, PartialEq)]
pub enum GammaSetting {
    /// `1 / (4 l_max)` of the resolved problem.
    Auto,
    Fixed(f64),
}

impl GammaSetting {
    fn parse(value: &str) -> std::result::Result<Self, String> {
        if value == "auto" {
            return Ok(GammaSetting::Auto);
        }
        let g: f64 = value.parse().map_err(|_| format!("'{value}' is neither 'auto' nor a number"))?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(format!("step size must be finite and positive, got {g}"));
        }
        Ok(GammaSetting::Fixed(g))
    }

    fn canonical(&self) -> String {
        match self {
            GammaSetting::Auto => "auto".into(),
            GammaSetting::Fixed(g) => format!("{g}"),
        }
    }
}

/// Gossip-depth setting: a consensus-accuracy target to resolve against the
/// topology's contraction factor, or a fixed parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum GossipSetting {
    /// Choose the smallest depth whose worst-case contraction reaches
    /// `eps / (10 K)` per averaging phase.
    Auto { eps: f64 },
    Fixed(u64),
}

impl GossipSetting {
    fn parse(value: &str) -> std::result::Result<Self, String> {
        if value == "auto" {
            return Ok(GossipSetting::Auto { eps: 1e-6 });
        }
        if let Some(args) = value.strip_prefix("auto:") {
            let pairs = parse_kv_args(args).map_err(|e| e.to_string())?;
            let mut eps = None;
            for (k, v) in pairs {
                match k.as_str() {
                    "eps" => {
                        let e: f64 =
                            v.parse().map_err(|_| format!("auto eps '{v}' is not a number"))?;
                        if !(e > 0.0 && e.is_finite()) {
                            return Err(format!("auto eps must be finite and positive, got {e}"));
                        }
                        eps = Some(e);
                    }
                    other => return Err(format!("unknown auto parameter '{other}'")),
                }
            }
            return Ok(GossipSetting::Auto {
                eps: eps.ok_or_else(|| "auto:... requires eps=<value>".to_string())?,
            });
        }
        let h: u64 = value
            .parse()
            .map_err(|_| format!("'{value}' is neither 'auto', 'auto:eps=..', nor an integer"))?;
        Ok(GossipSetting::Fixed(h))
    }

    fn canonical(&self) -> String {
        match self {
            GossipSetting::Auto { eps } => format!("auto:eps={eps}"),
            GossipSetting::Fixed(h) => format!("{h}"),
        }
    }
}

/// A parsed experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Problem spec, e.g. `quadratic:nx=2,ny=2,mu=0.1,L=1,het=0.5` or
    /// `matrix_game:nx=2,ny=2|regularize:eps=0.1`.
    pub problem: String,
    /// Topology spec, e.g. `ring` or `rotating_star:period=2`.
    pub topology: String,
    /// Node count `M`.
    pub nodes: usize,
    /// Iteration count `K`.
    pub iterations: u64,
    pub gamma: GammaSetting,
    pub gossip: GossipSetting,
    pub seed: u64,
    pub record_every: u64,
    /// Output directory for [`execute`]; overridable on the command line.
    pub out: String,
}

impl ExperimentConfig {
    /// Parse config text, reporting every issue at once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut issues = Vec::new();
        let mut problem = None;
        let mut topology = None;
        let mut nodes = None;
        let mut iterations = None;
        let mut gamma = None;
        let mut gossip = None;
        let mut seed = None;
        let mut record_every = None;
        let mut out = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                issues.push(ConfigIssue {
                    line,
                    field: trimmed.to_string(),
                    message: "expected key=value".into(),
                });
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            let mut push = |field: &str, message: String| {
                issues.push(ConfigIssue { line, field: field.to_string(), message });
            };
            macro_rules! set_once {
                ($slot:ident, $field:literal, $parsed:expr) => {{
                    if $slot.is_some() {
                        push($field, "duplicate key".into());
                    } else {
                        match $parsed {
                            Ok(v) => $slot = Some(v),
                            Err(m) => push($field, m),
                        }
                    }
                }};
            }
            match key {
                "problem" => set_once!(
                    problem,
                    "problem",
                    validate_problem_spec(value).map(|_| value.to_string())
                ),
                "topology" => set_once!(
                    topology,
                    "topology",
                    validate_topology_spec(value).map(|_| value.to_string())
                ),
                "M" => set_once!(nodes, "M", parse_nodes(value)),
                "K" => set_once!(
                    iterations,
                    "K",
                    value.parse::<u64>().map_err(|_| format!("'{value}' is not an integer"))
                ),
                "gamma" => set_once!(gamma, "gamma", GammaSetting::parse(value)),
                "H" => set_once!(gossip, "H", GossipSetting::parse(value)),
                "seed" => set_once!(
                    seed,
                    "seed",
                    value.parse::<u64>().map_err(|_| format!("'{value}' is not an unsigned integer"))
                ),
                "record_every" => set_once!(record_every, "record_every", parse_record_every(value)),
                "out" => set_once!(
                    out,
                    "out",
                    if value.is_empty() {
                        Err("output path must not be empty".to_string())
                    } else {
                        Ok(value.to_string())
                    }
                ),
                other => push(other, "unknown key".into()),
            }
        }

        for (slot_empty, field) in [
            (problem.is_none(), "problem"),
            (topology.is_none(), "topology"),
            (nodes.is_none(), "M"),
            (iterations.is_none(), "K"),
        ] {
            if slot_empty && !issues.iter().any(|i| i.field == field) {
                issues.push(ConfigIssue {
                    line: 0,
                    field: field.to_string(),
                    message: "required key is missing".into(),
                });
            }
        }
        if !issues.is_empty() {
            return Err(Error::Config(ConfigErrors(issues)));
        }
        Ok(ExperimentConfig {
            problem: problem.unwrap(),
            topology: topology.unwrap(),
            nodes: nodes.unwrap(),
            iterations: iterations.unwrap(),
            gamma: gamma.unwrap_or(GammaSetting::Auto),
            gossip: gossip.unwrap_or(GossipSetting::Auto { eps: 1e-6 }),
            seed: seed.unwrap_or(0),
            record_every: record_every.unwrap_or(1),
            out: out.unwrap_or_else(|| "results".to_string()),
        })
    }

    /// Parse a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Apply a single `key=value` override (the `--set` flag, sweep values).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let fail = |m: String| Error::invalid(format!("override {key}={value}: {m}"));
        match key {
            "problem" => {
                validate_problem_spec(value).map_err(fail)?;
                self.problem = value.to_string();
            }
            "topology" => {
                validate_topology_spec(value).map_err(fail)?;
                self.topology = value.to_string();
            }
            "M" => self.nodes = parse_nodes(value).map_err(fail)?,
            "K" => {
                self.iterations =
                    value.parse().map_err(|_| fail(format!("'{value}' is not an integer")))?
            }
            "gamma" => self.gamma = GammaSetting::parse(value).map_err(fail)?,
            "H" => self.gossip = GossipSetting::parse(value).map_err(fail)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| fail(format!("'{value}' is not an unsigned integer")))?
            }
            "record_every" => self.record_every = parse_record_every(value).map_err(fail)?,
            "out" => {
                if value.is_empty() {
                    return Err(fail("output path must not be empty".into()));
                }
                self.out = value.to_string();
            }
            other => return Err(Error::invalid(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// The canonical text form: every key, in fixed order, with defaults
    /// materialized. Parsing it reproduces this config exactly.
    pub fn canonical_string(&self) -> String {
        format!(
            "problem={}\ntopology={}\nM={}\nK={}\ngamma={}\nH={}\nseed={}\nrecord_every={}\nout={}\n",
            self.problem,
            self.topology,
            self.nodes,
            self.iterations,
            self.gamma.canonical(),
            self.gossip.canonical(),
            self.seed,
            self.record_every,
            self.out,
        )
    }
}

fn parse_nodes(value: &str) -> std::result::Result<usize, String> {
    let m: usize = value.parse().map_err(|_| format!("'{value}' is not an integer"))?;
    if m == 0 {
        return Err("node count must be at least 1".into());
    }
    Ok(m)
}

fn parse_record_every(value: &str) -> std::result::Result<u64, String> {
    let r: u64 = value.parse().map_err(|_| format!("'{value}' is not an integer"))?;
    if r == 0 {
        return Err("record_every must be at least 1".into());
    }
    Ok(r)
}

/// Structural check of a problem spec (kinds, keys, numeric ranges), without
/// building the instance.
fn validate_problem_spec(spec: &str) -> std::result::Result<(), String> {
    let mut segments = spec.split('|');
    let base = segments.next().expect("split yields at least one segment").trim();
    let (kind, args) = match base.split_once(':') {
        Some((k, a)) => (k.trim(), a.trim()),
        None => (base, ""),
    };
    let pairs = parse_kv_args(args).map_err(|e| e.to_string())?;
    match kind {
        "quadratic" => {
            for (k, v) in &pairs {
                match k.as_str() {
                    "nx" | "ny" => {
                        let n: usize =
                            v.parse().map_err(|_| format!("{k} '{v}' is not an integer"))?;
                        if n == 0 {
                            return Err(format!("{k} must be at least 1"));
                        }
                    }
                    "mu" => {
                        let mu: f64 = v.parse().map_err(|_| format!("mu '{v}' is not a number"))?;
                        if !(mu >= 0.0 && mu.is_finite()) {
                            return Err(format!("mu must be finite and nonnegative, got {mu}"));
                        }
                    }
                    "L" => {
                        let l: f64 = v.parse().map_err(|_| format!("L '{v}' is not a number"))?;
                        if !(l > 0.0 && l.is_finite()) {
                            return Err(format!("L must be finite and positive, got {l}"));
                        }
                    }
                    "het" => {
                        let h: f64 = v.parse().map_err(|_| format!("het '{v}' is not a number"))?;
                        if !(0.0..=1.0).contains(&h) {
                            return Err(format!("het must lie in [0, 1], got {h}"));
                        }
                    }
                    "seed" => {
                        v.parse::<u64>()
                            .map_err(|_| format!("seed '{v}' is not an unsigned integer"))?;
                    }
                    other => return Err(format!("unknown quadratic parameter '{other}'")),
                }
            }
        }
        "matrix_game" => {
            for (k, v) in &pairs {
                match k.as_str() {
                    "nx" | "ny" => {
                        let n: usize =
                            v.parse().map_err(|_| format!("{k} '{v}' is not an integer"))?;
                        if n == 0 {
                            return Err(format!("{k} must be at least 1"));
                        }
                    }
                    "seed" => {
                        v.parse::<u64>()
                            .map_err(|_| format!("seed '{v}' is not an unsigned integer"))?;
                    }
                    other => return Err(format!("unknown matrix_game parameter '{other}'")),
                }
            }
        }
        other => return Err(format!("unknown problem kind '{other}'")),
    }
    for modifier in segments {
        let modifier = modifier.trim();
        let (name, args) = match modifier.split_once(':') {
            Some((n, a)) => (n.trim(), a.trim()),
            None => (modifier, ""),
        };
        match name {
            "regularize" => {
                let pairs = parse_kv_args(args).map_err(|e| e.to_string())?;
                let mut eps = None;
                for (k, v) in pairs {
                    match k.as_str() {
                        "eps" => {
                            let e: f64 =
                                v.parse().map_err(|_| format!("eps '{v}' is not a number"))?;
                            if !(e > 0.0 && e.is_finite()) {
                                return Err(format!("eps must be finite and positive, got {e}"));
                            }
                            eps = Some(e);
                        }
                        other => return Err(format!("unknown regularize parameter '{other}'")),
                    }
                }
                if eps.is_none() {
                    return Err("regularize requires eps=<value>".into());
                }
            }
            other => return Err(format!("unknown problem modifier '{other}'")),
        }
    }
    Ok(())
}

/// Structural check of a topology spec, without the node count.
fn validate_topology_spec(spec: &str) -> std::result::Result<(), String> {
    let (kind, args) = match spec.split_once(':') {
        Some((k, a)) => (k.trim(), a.trim()),
        None => (spec.trim(), ""),
    };
    match kind {
        "ring" | "path" | "complete" | "star" => {
            if !args.is_empty() {
                return Err(format!("topology '{kind}' takes no parameters"));
            }
        }
        "rotating_star" => {
            let pairs = parse_kv_args(args).map_err(|e| e.to_string())?;
            let mut period = None;
            for (k, v) in pairs {
                match k.as_str() {
                    "period" => {
                        let p: u64 =
                            v.parse().map_err(|_| format!("period '{v}' is not an integer"))?;
                        if p == 0 {
                            return Err("period must be at least 1".into());
                        }
                        period = Some(p);
                    }
                    other => return Err(format!("unknown rotating_star parameter '{other}'")),
                }
            }
            if period.is_none() {
                return Err("rotating_star requires period=<rounds>".into());
            }
        }
        "random" => {
            let pairs = parse_kv_args(args).map_err(|e| e.to_string())?;
            let mut p_seen = false;
            for (k, v) in pairs {
                match k.as_str() {
                    "p" => {
                        let p: f64 = v.parse().map_err(|_| format!("p '{v}' is not a number"))?;
                        if !(p > 0.0 && p <= 1.0) {
                            return Err(format!("p must lie in (0, 1], got {p}"));
                        }
                        p_seen = true;
                    }
                    "seed" => {
                        v.parse::<u64>()
                            .map_err(|_| format!("seed '{v}' is not an unsigned integer"))?;
                    }
                    other => return Err(format!("unknown random parameter '{other}'")),
                }
            }
            if !p_seen {
                return Err("random requires p=<probability>".into());
            }
        }
        other => return Err(format!("unknown topology kind '{other}'")),
    }
    Ok(())
}

/// A config with every `auto` resolved into concrete runnable pieces.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub problem: SaddleProblem,
    pub topology: TopologySequence,
    pub solver: SolverConfig,
    /// The effective seed (after any environment override).
    pub seed: u64,
    /// Worst-case gossip eigenvalue ratio over the run's full round horizon.
    pub chi: f64,
    /// Per-round contraction factor `1 - 1/chi`.
    pub rho: f64,
    /// Problem spec with the inherited seed materialized.
    pub problem_spec: String,
    /// Topology spec with the inherited seed materialized.
    pub topology_spec: String,
}

/// Resolve a config into a runnable experiment: apply the `TVSADDLE_SEED`
/// override, materialize inherited seeds, build the problem and topology,
/// and turn `auto` settings into numbers.
pub fn resolve(cfg: &ExperimentConfig) -> Result<ResolvedExperiment> {
    let seed = match std::env::var("TVSADDLE_SEED") {
        Ok(s) => s.trim().parse::<u64>().map_err(|_| {
            Error::invalid(format!("TVSADDLE_SEED must be an unsigned integer, got '{s}'"))
        })?,
        Err(std::env::VarError::NotPresent) => cfg.seed,
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err(Error::invalid("TVSADDLE_SEED is not valid unicode"))
        }
    };

    let problem_spec = inherit_problem_seed(&cfg.problem, seed);
    let problem = build_problem(&problem_spec, cfg.nodes)?;

    let topology_spec = inherit_topology_seed(&cfg.topology, seed.wrapping_add(1));
    let topology = TopologySequence::from_spec(&topology_spec, cfg.nodes)?;

    let gamma = match cfg.gamma {
        GammaSetting::Auto => problem.default_gamma(),
        GammaSetting::Fixed(g) => g,
    };

    let k = cfg.iterations;
    let gossip_steps = match cfg.gossip {
        GossipSetting::Fixed(h) => h,
        GossipSetting::Auto { eps } => {
            // Target consensus accuracy per averaging phase: a tenth of the
            // per-iteration error budget.
            let target = (eps / (10.0 * k.max(1) as f64)).min(0.5);
            let bootstrap_horizon = (2 * k).max(1);
            let chi_boot = chi_of(&topology, bootstrap_horizon)?;
            rounds_for_accuracy(chi_boot, target)? - 1
        }
    };

    let horizon = (2 * (gossip_steps + 1) * k).max(1);
    let chi = chi_of(&topology, horizon)?;
    let rho = rho_of(chi)?;

    Ok(ResolvedExperiment {
        solver: SolverConfig {
            gamma,
            gossip_steps,
            iterations: k,
            record_every: cfg.record_every,
        },
        problem,
        topology,
        seed,
        chi,
        rho,
        problem_spec,
        topology_spec,
    })
}

fn inherit_problem_seed(spec: &str, seed: u64) -> String {
    let mut segments = spec.split('|');
    let base = segments.next().expect("split yields at least one segment").trim();
    let rest: Vec<&str> = segments.collect();
    let base_with_seed = if base_has_seed(base) {
        base.to_string()
    } else if base.contains(':') {
        format!("{base},seed={seed}")
    } else {
        format!("{base}:seed={seed}")
    };
    let mut out = base_with_seed;
    for segment in rest {
        out.push('|');
        out.push_str(segment.trim());
    }
    out
}

fn base_has_seed(base: &str) -> bool {
    match base.split_once(':') {
        Some((_, args)) => parse_kv_args(args)
            .map(|pairs| pairs.iter().any(|(k, _)| k == "seed"))
            .unwrap_or(false),
        None => false,
    }
}

fn inherit_topology_seed(spec: &str, seed: u64) -> String {
    if !spec.trim_start().starts_with("random") {
        return spec.to_string();
    }
    if base_has_seed(spec) {
        return spec.to_string();
    }
    if spec.contains(':') {
        format!("{spec},seed={seed}")
    } else {
        format!("{spec}:seed={seed}")
    }
}

/// Build a problem from its (seed-materialized) spec string.
fn build_problem(spec: &str, nodes: usize) -> Result<SaddleProblem> {
    validate_problem_spec(spec).map_err(|m| Error::invalid(format!("problem spec: {m}")))?;
    let mut segments = spec.split('|');
    let base = segments.next().expect("split yields at least one segment").trim();
    let (kind, args) = match base.split_once(':') {
        Some((k, a)) => (k.trim(), a.trim()),
        None => (base, ""),
    };
    let pairs = parse_kv_args(args)?;
    let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    let mut problem = match kind {
        "quadratic" => {
            let params = QuadraticParams {
                nodes,
                nx: get("nx").map(|v| v.parse().unwrap()).unwrap_or(2),
                ny: get("ny").map(|v| v.parse().unwrap()).unwrap_or(2),
                mu: get("mu").map(|v| v.parse().unwrap()).unwrap_or(0.1),
                l_max: get("L").map(|v| v.parse().unwrap()).unwrap_or(1.0),
                heterogeneity: get("het").map(|v| v.parse().unwrap()).unwrap_or(0.5),
                seed: get("seed").map(|v| v.parse().unwrap()).unwrap_or(0),
            };
            SaddleProblem::quadratic(QuadraticSpec::generate(&params)?)?
        }
        "matrix_game" => {
            let nx = get("nx").map(|v| v.parse().unwrap()).unwrap_or(2);
            let ny = get("ny").map(|v| v.parse().unwrap()).unwrap_or(2);
            let seed = get("seed").map(|v| v.parse().unwrap()).unwrap_or(0);
            SaddleProblem::matrix_game(MatrixGameSpec::random(nodes, nx, ny, seed)?)?
        }
        other => return Err(Error::invalid(format!("unknown problem kind '{other}'"))),
    };

    for modifier in segments {
        let modifier = modifier.trim();
        let (name, args) = match modifier.split_once(':') {
            Some((n, a)) => (n.trim(), a.trim()),
            None => (modifier, ""),
        };
        match name {
            "regularize" => {
                let pairs = parse_kv_args(args)?;
                let eps = pairs
                    .iter()
                    .find(|(k, _)| k == "eps")
                    .map(|(_, v)| v.parse::<f64>().unwrap())
                    .expect("validated above");
                problem = problem.regularize(eps)?;
            }
            other => return Err(Error::invalid(format!("unknown problem modifier '{other}'"))),
        }
    }
    Ok(problem)
}

/// The JSON run header recording every resolved quantity.
pub fn header_json(cfg: &ExperimentConfig, resolved: &ResolvedExperiment) -> String {
    let d = match resolved.problem.diameter() {
        Some(d) => json!(d),
        None => json!("unbounded"),
    };
    let value = json!({
        "gamma": resolved.solver.gamma,
        "H": resolved.solver.gossip_steps,
        "K": cfg.iterations,
        "chi": resolved.chi,
        "rho": resolved.rho,
        "L": resolved.problem.l_global(),
        "L_max": resolved.problem.l_max(),
        "mu": resolved.problem.mu(),
        "D": d,
        "seed": resolved.seed,
        "problem": resolved.problem_spec,
        "topology": resolved.topology_spec,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("header serializes");
    text.push('\n');
    text
}

/// The CSV trajectory: `k,rounds,dist_sq,gap,consensus`, dropping the
/// `dist_sq` column when no solution is known and the `gap` column when the
/// problem has no gap certificate.
pub fn trajectory_csv(problem: &SaddleProblem, trajectory: &Trajectory) -> String {
    let metrics = evaluate(problem, trajectory);
    let has_dist = metrics.iter().any(|p| p.dist_sq.is_some());
    let has_gap = metrics.iter().any(|p| p.gap.is_some());
    let mut out = String::from("k,rounds");
    if has_dist {
        out.push_str(",dist_sq");
    }
    if has_gap {
        out.push_str(",gap");
    }
    out.push_str(",consensus\n");
    for p in &metrics {
        out.push_str(&format!("{},{}", p.iteration, p.comm_rounds));
        if has_dist {
            match p.dist_sq {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        if has_gap {
            match p.gap {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        out.push_str(&format!(",{}\n", p.consensus));
    }
    out
}

/// What [`execute`] did.
#[derive(Clone, Debug)]
pub struct ExecutionReport {
    pub completed: bool,
    pub diverged_at: Option<u64>,
    pub divergence_detail: Option<String>,
    pub out_dir: PathBuf,
    /// Metrics of the last recorded point.
    pub final_point: MetricPoint,
}

/// Run one experiment and write `header.json` plus `trajectory.csv` into the
/// output directory (the config's `out` unless overridden). A divergent run
/// still writes both files, truncated at the last healthy iterate.
pub fn execute(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExecutionReport> {
    let resolved = resolve(cfg)?;
    let z0 = resolved.problem.default_initial()?;
    let outcome = run(&resolved.problem, &resolved.topology, &resolved.solver, &z0)?;

    let dir = out_dir.unwrap_or_else(|| Path::new(&cfg.out)).to_path_buf();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("header.json"), header_json(cfg, &resolved))?;
    let trajectory = outcome.trajectory();
    std::fs::write(dir.join("trajectory.csv"), trajectory_csv(&resolved.problem, trajectory))?;

    let final_point = evaluate(&resolved.problem, trajectory)
        .pop()
        .expect("a trajectory always records its initial point");
    let (completed, diverged_at, divergence_detail) = match &outcome {
        RunOutcome::Completed(_) => (true, None, None),
        RunOutcome::Diverged { iteration, detail, .. } => {
            (false, Some(*iteration), Some(detail.clone()))
        }
    };
    Ok(ExecutionReport { completed, diverged_at, divergence_detail, out_dir: dir, final_point })
}

/// One member of a sweep, as recorded in `summary.json`.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub param: String,
    pub value: String,
    pub directory: String,
    pub completed: bool,
    pub diverged_at: Option<u64>,
    pub final_dist_sq: Option<f64>,
    pub final_gap: Option<f64>,
    /// Fitted geometric rate of `dist_sq` per communication round.
    pub rate_dist_per_round: Option<f64>,
    /// Fitted polynomial exponent of the ergodic gap per iteration.
    pub rate_gap_exponent: Option<f64>,
}

/// What [`sweep`] did.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub out_dir: PathBuf,
}

/// Sweep one parameter over the given values: each member runs in its own
/// subdirectory, and `summary.json` collects outcomes and fitted rates in
/// sweep order. The parameter name takes any config key, plus `chi` as an
/// alias for `topology` (the topology determines `chi`).
pub fn sweep(
    cfg: &ExperimentConfig,
    param: &str,
    values: &[String],
    out_dir: Option<&Path>,
) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::invalid("a sweep needs at least one value"));
    }
    let key = if param == "chi" { "topology" } else { param };
    let root = out_dir.unwrap_or_else(|| Path::new(&cfg.out)).to_path_buf();
    std::fs::create_dir_all(&root)?;

    let mut entries = Vec::with_capacity(values.len());
    for value in values {
        let mut member = cfg.clone();
        member.set(key, value)?;
        let directory = format!("{key}_{}", sanitize(value));
        let report = execute(&member, Some(&root.join(&directory)))?;

        let resolved = resolve(&member)?;
        let metrics = read_metrics(&resolved)?;
        let dist_series: Vec<(f64, f64)> = metrics
            .iter()
            .filter_map(|p| p.dist_sq.map(|v| (p.comm_rounds as f64, v)))
            .collect();
        let gap_series: Vec<(f64, f64)> = metrics
            .iter()
            .filter(|p| p.iteration > 0)
            .filter_map(|p| p.gap.map(|v| (p.iteration as f64, v)))
            .collect();

        entries.push(SweepEntry {
            param: key.to_string(),
            value: value.clone(),
            directory,
            completed: report.completed,
            diverged_at: report.diverged_at,
            final_dist_sq: report.final_point.dist_sq,
            final_gap: report.final_point.gap,
            rate_dist_per_round: fit_linear_rate(&dist_series).ok(),
            rate_gap_exponent: fit_sublinear_rate(&gap_series).ok(),
        });
    }

    let summary: Vec<_> = entries
        .iter()
        .map(|e| {
            json!({
                "param": e.param,
                "value": e.value,
                "directory": e.directory,
                "completed": e.completed,
                "diverged_at": e.diverged_at,
                "final_dist_sq": e.final_dist_sq,
                "final_gap": e.final_gap,
                "rate_dist_per_round": e.rate_dist_per_round,
                "rate_gap_exponent": e.rate_gap_exponent,
            })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!(summary)).expect("summary serializes");
    text.push('\n');
    std::fs::write(root.join("summary.json"), text)?;

    Ok(SweepReport { entries, out_dir: root })
}

fn read_metrics(resolved: &ResolvedExperiment) -> Result<Vec<MetricPoint>> {
    // Re-run deterministically instead of re-parsing the CSV: identical
    // config and seed reproduce the trajectory bit for bit.
    let z0 = resolved.problem.default_initial()?;
    let outcome = run(&resolved.problem, &resolved.topology, &resolved.solver, &z0)?;
    Ok(evaluate(&resolved.problem, outcome.trajectory()))
}

fn sanitize(value: &str) -> String {
    value
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '-' })
        .collect()
}

/// One assumption violation found at a specific round.
#[derive(Clone, Debug)]
pub struct RoundViolation {
    pub round: u64,
    pub description: String,
}

/// Everything [`validate_experiment`] checked.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub rounds_checked: u64,
    pub chi: f64,
    pub rho: f64,
    pub violations: Vec<RoundViolation>,
    /// Empirical operator constants on random feasible pairs.
    pub operator: OperatorCheck,
    pub mu: f64,
    pub l_max: f64,
}

/// Check the resolved experiment's standing assumptions: every gossip matrix
/// over the first `rounds` rounds (default: the run's horizon, capped at
/// 200), plus the problem's claimed operator constants on sampled pairs.
pub fn validate_experiment(
    cfg: &ExperimentConfig,
    rounds: Option<u64>,
) -> Result<ValidationReport> {
    let resolved = resolve(cfg)?;
    let full_horizon =
        (2 * (resolved.solver.gossip_steps + 1) * resolved.solver.iterations).max(1);
    let rounds_checked = rounds.unwrap_or_else(|| full_horizon.min(200)).max(1);

    let mut violations = Vec::new();
    for t in 0..rounds_checked {
        match laplacian_of(&resolved.topology, t) {
            Ok(g) => {
                for v in validate_assumption4(&g, &resolved.topology, t) {
                    violations.push(RoundViolation { round: t, description: v.to_string() });
                }
            }
            Err(e) => violations.push(RoundViolation { round: t, description: e.to_string() }),
        }
    }

    let chi = chi_of(&resolved.topology, rounds_checked)?;
    let rho = rho_of(chi)?;
    let operator = check_operator_constants(&resolved.problem, 200, resolved.seed.wrapping_add(2))?;

    Ok(ValidationReport {
        rounds_checked,
        chi,
        rho,
        violations,
        operator,
        mu: resolved.problem.mu(),
        l_max: resolved.problem.l_max(),
    })
}
