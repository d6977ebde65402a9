//! Library-level check of the `TVSADDLE_SEED` environment override.
//!
//! Environment variables are process-global, so this lives in its own test
//! binary as a single test: nothing else can race the variable here.

use tvsaddle::config::{resolve, ExperimentConfig};

#[test]
fn environment_seed_beats_config_seed() {
    let cfg = ExperimentConfig::parse(
        "problem=matrix_game\ntopology=random:p=0.6\nM=4\nK=5\nseed=7\n",
    )
    .unwrap();

    std::env::remove_var("TVSADDLE_SEED");
    let plain = resolve(&cfg).unwrap();
    assert_eq!(plain.seed, 7);
    assert_eq!(plain.problem_spec, "matrix_game:seed=7");
    assert_eq!(plain.topology_spec, "random:p=0.6,seed=8");

    std::env::set_var("TVSADDLE_SEED", "99");
    let overridden = resolve(&cfg).unwrap();
    assert_eq!(overridden.seed, 99);
    assert_eq!(overridden.problem_spec, "matrix_game:seed=99");
    assert_eq!(overridden.topology_spec, "random:p=0.6,seed=100");

    std::env::set_var("TVSADDLE_SEED", "minus two");
    let err = resolve(&cfg).unwrap_err();
    assert!(err.to_string().contains("TVSADDLE_SEED"));

    // A spec carrying its own seed keeps it even under the override.
    std::env::set_var("TVSADDLE_SEED", "5");
    let mut pinned = cfg.clone();
    pinned.set("problem", "matrix_game:seed=41").unwrap();
    let resolved = resolve(&pinned).unwrap();
    assert_eq!(resolved.seed, 5);
    assert_eq!(resolved.problem_spec, "matrix_game:seed=41");

    std::env::remove_var("TVSADDLE_SEED");
}
