//! The two numbers that price communication: the gossip condition number
//! `chi` and the per-round contraction factor `rho = 1 - 1/chi`.
//!
//! Well-connected graphs (complete) mix in one round; sparse or centralized
//! ones (rings, stars, paths) pay more. For a time-varying sequence, `chi`
//! is the worst round in the horizon — one bad round prices the whole run.

use tvsaddle::gossip::rounds_for_accuracy;
use tvsaddle::graph::TopologySequence;
use tvsaddle::mixing::{chi_of, rho_of};

fn main() -> tvsaddle::Result<()> {
    let cases: Vec<(&str, usize)> = vec![
        ("complete", 8),
        ("star", 8),
        ("ring", 5),
        ("ring", 10),
        ("ring", 20),
        ("path", 10),
        ("rotating_star:period=1", 8),
        ("random:p=0.3,seed=11", 8),
        ("random:p=0.8,seed=11", 8),
    ];

    println!(
        "{:<24} {:>3} {:>10} {:>8} {:>16}",
        "topology", "M", "chi", "rho", "rounds to 1e-6"
    );
    for (spec, m) in cases {
        let topo = TopologySequence::from_spec(spec, m)?;
        // For static graphs any horizon works; for switching ones, take the
        // worst round over a representative window.
        let chi = chi_of(&topo, 50)?;
        let rho = rho_of(chi)?;
        let budget = rounds_for_accuracy(chi, 1e-6)?;
        println!("{spec:<24} {m:>3} {chi:>10.4} {rho:>8.4} {budget:>16}");
    }

    println!();
    println!("ring chi grows quadratically with M, so the round budget does too:");
    println!("{:>4} {:>12} {:>18}", "M", "chi", "rounds to 1e-6");
    for m in [4, 8, 16, 32, 64] {
        let topo = TopologySequence::from_spec("ring", m)?;
        let chi = chi_of(&topo, 1)?;
        println!("{m:>4} {chi:>12.2} {:>18}", rounds_for_accuracy(chi, 1e-6)?);
    }
    Ok(())
}
