//! Thin command-line front end over the library's config layer.
//!
//! ```text
//! tvsaddle run <config-file> [--set key=value ...] [--out dir]
//! tvsaddle sweep <config-file> --over <param> --values a,b,c [--set key=value ...] [--out dir]
//! tvsaddle validate <config-file> [--set key=value ...] [--rounds N]
//! ```
//!
//! Exit codes: 0 on success, 2 when a run diverges or validation finds
//! violations (partial output is still written), 1 on configuration or I/O
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tvsaddle::config::{
    execute, sweep, validate_experiment, ExperimentConfig,
};

const USAGE: &str = "\
usage:
  tvsaddle run <config-file> [--set key=value ...] [--out dir]
  tvsaddle sweep <config-file> --over <param> --values a,b,c [--set key=value ...] [--out dir]
  tvsaddle validate <config-file> [--set key=value ...] [--rounds N]

config keys: problem, topology, M, K (required); gamma, H, seed, record_every, out.
The TVSADDLE_SEED environment variable overrides the config seed.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(args: &[String]) -> Result<ExitCode, String> {
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return Ok(ExitCode::from(1));
    };
    match command.as_str() {
        "run" => cmd_run(&args[1..]),
        "sweep" => cmd_sweep(&args[1..]),
        "validate" => cmd_validate(&args[1..]),
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown command '{other}'\n{USAGE}")),
    }
}

/// Shared flag parsing: the config path, `--set` overrides, and any
/// command-specific flags handed back as (name, value) pairs.
struct CommonArgs {
    config: PathBuf,
    sets: Vec<(String, String)>,
    extra: Vec<(String, String)>,
}

fn parse_common(args: &[String], extra_flags: &[&str]) -> Result<CommonArgs, String> {
    let mut config = None;
    let mut sets = Vec::new();
    let mut extra = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if arg == "--set" {
            let kv = it.next().ok_or("--set expects key=value")?;
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set '{kv}': expected key=value"))?;
            sets.push((k.trim().to_string(), v.trim().to_string()));
        } else if let Some(flag) = arg.strip_prefix("--") {
            if extra_flags.contains(&flag) {
                let value = it.next().ok_or_else(|| format!("--{flag} expects a value"))?;
                extra.push((flag.to_string(), value.clone()));
            } else {
                return Err(format!("unknown flag '--{flag}'"));
            }
        } else if config.is_none() {
            config = Some(PathBuf::from(arg));
        } else {
            return Err(format!("unexpected argument '{arg}'"));
        }
    }
    Ok(CommonArgs {
        config: config.ok_or("a config file is required")?,
        sets,
        extra,
    })
}

fn load_config(path: &Path, sets: &[(String, String)]) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::from_file(path).map_err(|e| e.to_string())?;
    for (k, v) in sets {
        cfg.set(k, v).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn out_override(extra: &[(String, String)]) -> Option<PathBuf> {
    extra
        .iter()
        .rev()
        .find(|(flag, _)| flag == "out")
        .map(|(_, v)| PathBuf::from(v))
}

fn cmd_run(args: &[String]) -> Result<ExitCode, String> {
    let common = parse_common(args, &["out"])?;
    let cfg = load_config(&common.config, &common.sets)?;
    let out = out_override(&common.extra);
    let report = execute(&cfg, out.as_deref()).map_err(|e| e.to_string())?;

    println!("wrote {}", report.out_dir.join("header.json").display());
    println!("wrote {}", report.out_dir.join("trajectory.csv").display());
    let p = &report.final_point;
    let mut line = format!(
        "final: k={} rounds={} consensus={:.3e}",
        p.iteration, p.comm_rounds, p.consensus
    );
    if let Some(d) = p.dist_sq {
        line.push_str(&format!(" dist_sq={d:.6e}"));
    }
    if let Some(g) = p.gap {
        line.push_str(&format!(" gap={g:.6e}"));
    }
    println!("{line}");
    if report.completed {
        Ok(ExitCode::SUCCESS)
    } else {
        let at = report.diverged_at.unwrap_or(0);
        let detail = report.divergence_detail.unwrap_or_default();
        eprintln!("run diverged at iteration {at}: {detail}");
        eprintln!("partial trajectory written to {}", report.out_dir.display());
        Ok(ExitCode::from(2))
    }
}

fn cmd_sweep(args: &[String]) -> Result<ExitCode, String> {
    let common = parse_common(args, &["out", "over", "values"])?;
    let cfg = load_config(&common.config, &common.sets)?;
    let out = out_override(&common.extra);

    let param = common
        .extra
        .iter()
        .find(|(flag, _)| flag == "over")
        .map(|(_, v)| v.clone())
        .ok_or("sweep requires --over <param>")?;
    let value_args: Vec<&String> = common
        .extra
        .iter()
        .filter(|(flag, _)| flag == "values")
        .map(|(_, v)| v)
        .collect();
    if value_args.is_empty() {
        return Err("sweep requires --values a,b,c".into());
    }
    // One --values is a comma-separated list; repeated --values flags each
    // carry one literal value (for values that themselves contain commas).
    let values: Vec<String> = if value_args.len() == 1 {
        value_args[0].split(',').map(|v| v.trim().to_string()).collect()
    } else {
        value_args.iter().map(|v| v.trim().to_string()).collect()
    };

    let report = sweep(&cfg, &param, &values, out.as_deref()).map_err(|e| e.to_string())?;
    for entry in &report.entries {
        let status = if entry.completed { "completed" } else { "diverged" };
        let mut line = format!("{}={}  {status}  dir={}", entry.param, entry.value, entry.directory);
        if let Some(d) = entry.final_dist_sq {
            line.push_str(&format!("  dist_sq={d:.6e}"));
        }
        if let Some(g) = entry.final_gap {
            line.push_str(&format!("  gap={g:.6e}"));
        }
        println!("{line}");
    }
    println!("wrote {}", report.out_dir.join("summary.json").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: &[String]) -> Result<ExitCode, String> {
    let common = parse_common(args, &["rounds"])?;
    let cfg = load_config(&common.config, &common.sets)?;
    let rounds = common
        .extra
        .iter()
        .find(|(flag, _)| flag == "rounds")
        .map(|(_, v)| v.parse::<u64>().map_err(|_| format!("--rounds '{v}' is not an integer")))
        .transpose()?;

    let report = validate_experiment(&cfg, rounds).map_err(|e| e.to_string())?;
    println!(
        "checked {} gossip rounds: chi={:.6} rho={:.6}",
        report.rounds_checked, report.chi, report.rho
    );
    println!(
        "operator over {} sampled pairs: monotonicity >= {:.6e} (claimed mu {:.6e}), lipschitz <= {:.6e} (claimed L_max {:.6e})",
        report.operator.samples,
        report.operator.min_monotonicity_ratio,
        report.mu,
        report.operator.max_lipschitz_ratio,
        report.l_max
    );
    if report.violations.is_empty() {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &report.violations {
            eprintln!("round {}: {}", v.round, v.description);
        }
        eprintln!("{} violation(s) found", report.violations.len());
        Ok(ExitCode::from(2))
    }
}
