//! Time-varying communication graphs: static baselines, a rotating star, and
//! seeded random connected sequences.
//!
//! A [`TopologySequence`] maps a round index `t` to an undirected edge list.
//! Every generator is deterministic in its parameters, so a round can be
//! re-queried at any time and always yields the same graph.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed graphs available at every round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StaticKind {
    Ring,
    Path,
    Complete,
    /// Star with center 0.
    Star,
}

impl StaticKind {
    fn name(self) -> &'static str {
        match self {
            StaticKind::Ring => "ring",
            StaticKind::Path => "path",
            StaticKind::Complete => "complete",
            StaticKind::Star => "star",
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Static { kind: StaticKind, edges: Vec<(usize, usize)> },
    /// Star whose center is `(t / period) mod M`.
    RotatingStar { period: u64 },
    /// Erdős–Rényi draw per round, repaired to connectivity with a random
    /// spanning tree. Deterministic in `(seed, t)`.
    Random { edge_prob: f64, seed: u64 },
}

/// A deterministic sequence of undirected graphs on `M` nodes.
#[derive(Clone, Debug)]
pub struct TopologySequence {
    m: usize,
    kind: Kind,
}

impl TopologySequence {
    pub fn make_static(kind: StaticKind, m: usize) -> Result<Self> {
        let min = match kind {
            StaticKind::Ring => 3,
            _ => 2,
        };
        if m < min {
            return Err(Error::invalid(format!(
                "a {} graph needs at least {min} nodes, got {m}",
                kind.name()
            )));
        }
        let edges = match kind {
            StaticKind::Ring => {
                let mut e: Vec<_> = (0..m - 1).map(|i| (i, i + 1)).collect();
                e.push((0, m - 1));
                e.sort_unstable();
                e
            }
            StaticKind::Path => (0..m - 1).map(|i| (i, i + 1)).collect(),
            StaticKind::Complete => {
                (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect()
            }
            StaticKind::Star => star_edges(m, 0),
        };
        Ok(TopologySequence { m, kind: Kind::Static { kind, edges } })
    }

    pub fn make_rotating_star(m: usize, period: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("a star needs at least 2 nodes, got {m}")));
        }
        if period == 0 {
            return Err(Error::invalid("rotating star period must be at least 1"));
        }
        Ok(TopologySequence { m, kind: Kind::RotatingStar { period } })
    }

    pub fn make_random_connected(m: usize, edge_prob: f64, seed: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!(
                "a random connected graph needs at least 2 nodes, got {m}"
            )));
        }
        if !(edge_prob > 0.0 && edge_prob <= 1.0) {
            return Err(Error::invalid(format!(
                "edge probability must lie in (0, 1], got {edge_prob}"
            )));
        }
        Ok(TopologySequence { m, kind: Kind::Random { edge_prob, seed } })
    }

    /// Parse a topology description as used in config files:
    /// `ring`, `path`, `complete`, `star`, `rotating_star:period=P`,
    /// `random:p=0.3,seed=5`.
    pub fn from_spec(spec: &str, m: usize) -> Result<Self> {
        let (head, args) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let no_args = |args: Option<&str>| -> Result<()> {
            match args {
                Some(a) if !a.is_empty() => {
                    Err(Error::invalid(format!("topology '{head}' takes no parameters, got '{a}'")))
                }
                _ => Ok(()),
            }
        };
        match head {
            "ring" => {
                no_args(args)?;
                TopologySequence::make_static(StaticKind::Ring, m)
            }
            "path" => {
                no_args(args)?;
                TopologySequence::make_static(StaticKind::Path, m)
            }
            "complete" => {
                no_args(args)?;
                TopologySequence::make_static(StaticKind::Complete, m)
            }
            "star" => {
                no_args(args)?;
                TopologySequence::make_static(StaticKind::Star, m)
            }
            "rotating_star" => {
                let mut period: Option<u64> = None;
                for (key, value) in parse_kv_args(args.unwrap_or(""))? {
                    match key.as_str() {
                        "period" => {
                            period = Some(value.parse().map_err(|_| {
                                Error::invalid(format!("rotating_star period '{value}' is not an integer"))
                            })?)
                        }
                        other => {
                            return Err(Error::invalid(format!(
                                "unknown rotating_star parameter '{other}'"
                            )))
                        }
                    }
                }
                let period = period
                    .ok_or_else(|| Error::invalid("rotating_star requires period=<rounds>"))?;
                TopologySequence::make_rotating_star(m, period)
            }
            "random" => {
                let mut p: Option<f64> = None;
                let mut seed: Option<u64> = None;
                for (key, value) in parse_kv_args(args.unwrap_or(""))? {
                    match key.as_str() {
                        "p" => {
                            p = Some(value.parse().map_err(|_| {
                                Error::invalid(format!("random edge probability '{value}' is not a number"))
                            })?)
                        }
                        "seed" => {
                            seed = Some(value.parse().map_err(|_| {
                                Error::invalid(format!("random seed '{value}' is not an integer"))
                            })?)
                        }
                        other => {
                            return Err(Error::invalid(format!("unknown random parameter '{other}'")))
                        }
                    }
                }
                let p = p.ok_or_else(|| Error::invalid("random requires p=<probability>"))?;
                let seed = seed.ok_or_else(|| Error::invalid("random requires seed=<integer>"))?;
                TopologySequence::make_random_connected(m, p, seed)
            }
            other => Err(Error::invalid(format!("unknown topology kind '{other}'"))),
        }
    }

    /// Canonical form of the topology string this sequence parses from.
    pub fn spec_string(&self) -> String {
        match &self.kind {
            Kind::Static { kind, .. } => kind.name().to_string(),
            Kind::RotatingStar { period } => format!("rotating_star:period={period}"),
            Kind::Random { edge_prob, seed } => format!("random:p={edge_prob},seed={seed}"),
        }
    }

    pub fn node_count(&self) -> usize {
        self.m
    }

    /// Edge list at round `t`, sorted, each edge as `(i, j)` with `i < j`.
    pub fn edges_at(&self, t: u64) -> Vec<(usize, usize)> {
        match &self.kind {
            Kind::Static { edges, .. } => edges.clone(),
            Kind::RotatingStar { period } => {
                let center = ((t / period) % self.m as u64) as usize;
                star_edges(self.m, center)
            }
            Kind::Random { edge_prob, seed } => random_connected_edges(self.m, *edge_prob, *seed, t),
        }
    }
}

fn star_edges(m: usize, center: usize) -> Vec<(usize, usize)> {
    let mut e: Vec<_> = (0..m)
        .filter(|&i| i != center)
        .map(|i| (center.min(i), center.max(i)))
        .collect();
    e.sort_unstable();
    e
}

pub(crate) fn parse_kv_args(args: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for part in args.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected key=value, got '{part}'")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn random_connected_edges(m: usize, p: f64, seed: u64, t: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t.wrapping_add(1));
    let mut edges: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();
    for i in 0..m {
        for j in (i + 1)..m {
            if rng.gen_bool(p) {
                edges.insert((i, j));
            }
        }
    }
    let edge_vec: Vec<_> = edges.iter().copied().collect();
    if !is_connected(&edge_vec, m).expect("generated edges are in range") {
        // Repair with a uniformly random spanning tree: attach each node of a
        // random permutation to a random earlier node.
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        for idx in 1..m {
            let a = perm[idx];
            let b = perm[rng.gen_range(0..idx)];
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges.into_iter().collect()
}

/// Breadth-first connectivity check over an undirected edge list.
pub fn is_connected(edges: &[(usize, usize)], m: usize) -> Result<bool> {
    if m == 0 {
        return Err(Error::invalid("graph needs at least one node"));
    }
    let mut adj = vec![Vec::new(); m];
    for &(i, j) in edges {
        if i >= m || j >= m {
            return Err(Error::invalid(format!(
                "edge ({i}, {j}) out of range for {m} nodes"
            )));
        }
        if i == j {
            return Err(Error::invalid(format!("self-loop ({i}, {j}) is not allowed")));
        }
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; m];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    Ok(count == m)
}
