//! Decentralized averaging: node state storage, gossip rounds against a
//! time-varying topology, and the round budget needed for a target accuracy.
//!
//! A gossip call with parameter `h` performs `h + 1` multiplications by the
//! round-specific mixing matrix (the loop runs over `0..=h`). Each
//! multiplication preserves the average of the node rows and shrinks the
//! disagreement around it by at least the round's contraction factor.

use crate::error::{Error, Result};
use crate::graph::TopologySequence;
use crate::linalg::check_finite;
use crate::mixing::MixingCache;

/// One `dim`-vector per node, with a cursor into the topology's round
/// sequence so repeated gossip calls keep consuming fresh graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeStates {
    m: usize,
    dim: usize,
    data: Vec<f64>,
    round_cursor: u64,
}

impl NodeStates {
    /// Build from explicit per-node rows; the cursor starts at round zero.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("node states need at least one node"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::invalid("node states need at least one coordinate"));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "node {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            check_finite(row, "node state")?;
            data.extend_from_slice(row);
        }
        Ok(NodeStates { m: rows.len(), dim, data, round_cursor: 0 })
    }

    /// Give every one of `m` nodes a copy of the same row.
    pub fn replicate(row: &[f64], m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("node states need at least one node"));
        }
        if row.is_empty() {
            return Err(Error::invalid("node states need at least one coordinate"));
        }
        check_finite(row, "node state")?;
        let mut data = Vec::with_capacity(m * row.len());
        for _ in 0..m {
            data.extend_from_slice(row);
        }
        Ok(NodeStates { m, dim: row.len(), data, round_cursor: 0 })
    }

    pub fn node_count(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Next topology round this state will gossip over.
    pub fn round_cursor(&self) -> u64 {
        self.round_cursor
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Average of the node rows.
    pub fn mean_row(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for row in self.rows() {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for acc in &mut mean {
            *acc /= self.m as f64;
        }
        mean
    }

    /// Frobenius norm of the stacked deviations from the mean row; zero
    /// exactly when the nodes agree.
    pub fn deviation_norm(&self) -> f64 {
        let mean = self.mean_row();
        let mut sq = 0.0;
        for row in self.rows() {
            for (v, mu) in row.iter().zip(&mean) {
                sq += (v - mu) * (v - mu);
            }
        }
        sq.sqrt()
    }

    pub(crate) fn set_row(&mut self, i: usize, row: &[f64]) {
        self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(row);
    }

    pub(crate) fn advance_cursor(&mut self, by: u64) {
        self.round_cursor += by;
    }
}

fn check_m(states: &NodeStates, topo: &TopologySequence) -> Result<()> {
    if states.node_count() != topo.node_count() {
        return Err(Error::invalid(format!(
            "states have {} nodes but the topology has {}",
            states.node_count(),
            topo.node_count()
        )));
    }
    Ok(())
}

/// One multiplication by the mixing matrix of the graph at the state's
/// current round; advances the cursor by one.
pub fn gossip_round(states: &NodeStates, topo: &TopologySequence) -> Result<NodeStates> {
    let mut cache = MixingCache::new();
    gossip_cached(states, topo, 0, &mut cache)
}

/// `h + 1` successive mixing multiplications starting at the state's current
/// round. `gossip(s, topo, 0)` is a single multiplication.
pub fn gossip(states: &NodeStates, topo: &TopologySequence, h: u64) -> Result<NodeStates> {
    let mut cache = MixingCache::new();
    gossip_cached(states, topo, h, &mut cache)
}

/// Gossip with a caller-owned mixing cache, so long runs factor their
/// eigendecompositions over distinct edge sets only.
pub(crate) fn gossip_cached(
    states: &NodeStates,
    topo: &TopologySequence,
    h: u64,
    cache: &mut MixingCache,
) -> Result<NodeStates> {
    check_m(states, topo)?;
    let mut out = states.clone();
    let m = states.node_count();
    let dim = states.dim();
    let mut next = vec![0.0; m * dim];
    for _ in 0..=h {
        let mixing = cache.at(topo, out.round_cursor)?;
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            for j in 0..m {
                let w = mixing.wt.get(i, j);
                if w == 0.0 {
                    continue;
                }
                let row_j = out.row(j);
                let target = &mut next[i * dim..(i + 1) * dim];
                for (acc, v) in target.iter_mut().zip(row_j) {
                    *acc += w * v;
                }
            }
        }
        out.data.copy_from_slice(&next);
        out.advance_cursor(1);
    }
    Ok(out)
}

/// Smallest number of mixing multiplications that certifies a worst-case
/// disagreement contraction to `target`, i.e. the least `n` with
/// `rho^n <= target` for `rho = 1 - 1/chi`.
pub fn rounds_for_accuracy(chi: f64, target: f64) -> Result<u64> {
    if !(chi >= 1.0 && chi.is_finite()) {
        return Err(Error::invalid(format!("chi must be finite and at least 1, got {chi}")));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target must lie in (0, 1), got {target}")));
    }
    let rho = 1.0 - 1.0 / chi;
    if rho == 0.0 {
        return Ok(1);
    }
    // Epsilon-guarded ceiling so an exactly-integer ratio is not pushed up a
    // step by floating-point noise; the loop below restores the guarantee.
    let raw = target.ln() / rho.ln();
    let mut n = (raw - 1e-9).ceil().max(1.0) as u64;
    while rho.powi(n as i32) > target {
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StaticKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn random_states(m: usize, dim: usize, seed: u64) -> NodeStates {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> =
            (0..m).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        NodeStates::from_rows(&rows).unwrap()
    }

    #[test]
    fn path_two_single_round_averages() {
        let topo = TopologySequence::make_static(StaticKind::Path, 2).unwrap();
        let s = NodeStates::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        assert_close(s.deviation_norm(), std::f64::consts::SQRT_2, 1e-12);
        let out = gossip_round(&s, &topo).unwrap();
        assert_close(out.row(0)[0], 1.0, 1e-12);
        assert_close(out.row(1)[0], 1.0, 1e-12);
        assert_eq!(out.round_cursor(), 1);
    }

    #[test]
    fn h_parameter_counts_multiplications_inclusively() {
        let topo = TopologySequence::make_rotating_star(4, 1).unwrap();
        let s = random_states(4, 3, 7);

        let once = gossip(&s, &topo, 0).unwrap();
        assert_eq!(once, gossip_round(&s, &topo).unwrap());
        assert_eq!(once.round_cursor(), 1);

        let mut manual = s.clone();
        for _ in 0..3 {
            manual = gossip_round(&manual, &topo).unwrap();
        }
        let batched = gossip(&s, &topo, 2).unwrap();
        assert_eq!(batched.round_cursor(), 3);
        for i in 0..4 {
            for d in 0..3 {
                assert_close(batched.row(i)[d], manual.row(i)[d], 1e-12);
            }
        }
    }

    #[test]
    fn gossip_preserves_the_mean() {
        let topo = TopologySequence::make_rotating_star(5, 2).unwrap();
        let s = random_states(5, 4, 11);
        let before = s.mean_row();
        let out = gossip(&s, &topo, 9).unwrap();
        let after = out.mean_row();
        for (a, b) in before.iter().zip(&after) {
            assert_close(*a, *b, 1e-12);
        }
    }

    #[test]
    fn per_round_contraction_on_a_ring() {
        let topo = TopologySequence::make_static(StaticKind::Ring, 5).unwrap();
        let chi = crate::mixing::chi_of(&topo, 1).unwrap();
        let rho = crate::mixing::rho_of(chi).unwrap();
        let mut s = random_states(5, 2, 3);
        let mut dev = s.deviation_norm();
        for _ in 0..20 {
            s = gossip_round(&s, &topo).unwrap();
            let next = s.deviation_norm();
            assert!(next <= rho * dev + 1e-9, "{next} vs {}", rho * dev);
            dev = next;
        }
    }

    #[test]
    fn complete_graph_reaches_consensus_in_one_multiplication() {
        for m in [2usize, 3, 5, 10] {
            let topo = TopologySequence::make_static(StaticKind::Complete, m).unwrap();
            let s = random_states(m, 3, m as u64);
            let out = gossip_round(&s, &topo).unwrap();
            assert!(out.deviation_norm() <= 1e-12, "m = {m}: {}", out.deviation_norm());
        }
    }

    #[test]
    fn node_count_mismatch_is_rejected() {
        let topo = TopologySequence::make_static(StaticKind::Complete, 2).unwrap();
        let s = NodeStates::replicate(&[1.5, -0.5], 3).unwrap();
        assert!(gossip_round(&s, &topo).is_err());
    }

    #[test]
    fn budget_matches_closed_form() {
        assert_eq!(rounds_for_accuracy(1.0, 0.5).unwrap(), 1);
        assert_eq!(rounds_for_accuracy(2.0, 0.25).unwrap(), 2);
        assert_eq!(rounds_for_accuracy(3.0, 1e-6).unwrap(), 35);
        assert_eq!(rounds_for_accuracy(5.0, 1e-10).unwrap(), 104);
    }

    #[test]
    fn budget_certifies_the_contraction() {
        for (chi, target) in [(1.5, 1e-3), (2.618034, 1e-10), (10.0, 1e-8), (4.0, 0.0625)] {
            let n = rounds_for_accuracy(chi, target).unwrap();
            let rho = 1.0 - 1.0 / chi;
            assert!(rho.powi(n as i32) <= target, "chi {chi} target {target}: n = {n}");
            if n > 1 {
                assert!(
                    rho.powi(n as i32 - 1) > target,
                    "chi {chi} target {target}: n = {n} is not minimal"
                );
            }
        }
    }

    #[test]
    fn ring_five_budget_at_tight_accuracy() {
        let topo = TopologySequence::make_static(StaticKind::Ring, 5).unwrap();
        let chi = crate::mixing::chi_of(&topo, 1).unwrap();
        assert_close(chi, 2.618034, 1e-6);
        assert_eq!(rounds_for_accuracy(chi, 1e-10).unwrap(), 48);
    }

    #[test]
    fn budget_rejects_bad_arguments() {
        assert!(rounds_for_accuracy(0.5, 0.1).is_err());
        assert!(rounds_for_accuracy(f64::INFINITY, 0.1).is_err());
        assert!(rounds_for_accuracy(2.0, 0.0).is_err());
        assert!(rounds_for_accuracy(2.0, 1.0).is_err());
    }

    #[test]
    fn replicate_is_exact_consensus() {
        let s = NodeStates::replicate(&[0.25, -1.0, 3.0], 6).unwrap();
        assert_eq!(s.node_count(), 6);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.deviation_norm(), 0.0);
        assert_eq!(s.mean_row(), vec![0.25, -1.0, 3.0]);
    }

    #[test]
    fn construction_rejects_bad_rows() {
        assert!(NodeStates::from_rows(&[]).is_err());
        assert!(NodeStates::from_rows(&[vec![]]).is_err());
        assert!(NodeStates::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(NodeStates::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(NodeStates::replicate(&[1.0], 0).is_err());
    }

    #[test]
    fn time_varying_consensus_at_certified_budget() {
        let topo = TopologySequence::make_rotating_star(5, 1).unwrap();
        let chi = crate::mixing::chi_of(&topo, 200).unwrap();
        let n = rounds_for_accuracy(chi, 1e-10).unwrap();
        let s = random_states(5, 2, 42);
        let before = s.deviation_norm();
        let out = gossip(&s, &topo, n - 1).unwrap();
        assert!(out.deviation_norm() <= 1e-10 * before * 1.0001);
    }
}
