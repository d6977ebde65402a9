//! Gossip matrices built from graph Laplacians, their spectral quantities,
//! and the normalized mixing form used for averaging.
//!
//! For a connected graph, the Laplacian `W = D - A` is symmetric positive
//! semidefinite with kernel spanned by the constant vector. Its normalized
//! mixing matrix `W~ = I - W / lambda_max(W)` is doubly stochastic, keeps row
//! means intact, and shrinks the disagreement component by at least
//! `rho = 1 - 1/chi` per multiplication, where `chi` is the worst ratio of
//! the largest to the smallest nonzero Laplacian eigenvalue over the rounds
//! in play.

use crate::error::{Error, Result};
use crate::graph::{is_connected, TopologySequence};
use crate::linalg::{sym_eigvals, Matrix, SymMatrix};
use std::collections::HashMap;
use std::sync::Arc;

/// A graph Laplacian at one round, with its extreme eigenvalues attached.
#[derive(Clone, Debug)]
pub struct GossipMatrix {
    w: SymMatrix,
    lambda_max: f64,
    lambda_min_nonzero: f64,
    round: u64,
}

impl GossipMatrix {
    /// Wrap an arbitrary symmetric matrix, computing its spectrum but making
    /// no assumption checks — [`validate_assumption4`] does those.
    pub fn from_matrix(w: SymMatrix, round: u64) -> Result<Self> {
        let n = w.dim();
        if n < 2 {
            return Err(Error::invalid("a gossip matrix needs at least 2 nodes"));
        }
        let eig = sym_eigvals(&w)?;
        Ok(GossipMatrix { lambda_max: eig[0], lambda_min_nonzero: eig[n - 2], w, round })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// Largest eigenvalue `lambda_1`.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Second-smallest eigenvalue `lambda_{M-1}`; positive iff the graph is
    /// connected.
    pub fn lambda_min_nonzero(&self) -> f64 {
        self.lambda_min_nonzero
    }

    pub fn round(&self) -> u64 {
        self.round
    }
}

/// The normalized averaging matrix `W~ = I - W / lambda_max(W)`.
#[derive(Clone, Debug)]
pub struct MixingMatrix {
    wt: SymMatrix,
    round: u64,
}

impl MixingMatrix {
    pub fn matrix(&self) -> &SymMatrix {
        &self.wt
    }

    pub fn dim(&self) -> usize {
        self.wt.dim()
    }

    pub fn round(&self) -> u64 {
        self.round
    }
}

/// Laplacian of the graph at round `t`, rejecting disconnected rounds.
pub fn laplacian_of(topo: &TopologySequence, t: u64) -> Result<GossipMatrix> {
    let m = topo.node_count();
    if m < 2 {
        return Err(Error::invalid("a gossip matrix needs at least 2 nodes"));
    }
    let edges = topo.edges_at(t);
    if !is_connected(&edges, m)? {
        return Err(Error::invalid(format!("graph at round {t} is disconnected")));
    }
    let mut w = Matrix::zeros(m, m);
    for &(i, j) in &edges {
        w.set(i, j, -1.0);
        w.set(j, i, -1.0);
        w.set(i, i, w.get(i, i) + 1.0);
        w.set(j, j, w.get(j, j) + 1.0);
    }
    GossipMatrix::from_matrix(SymMatrix::new(w)?, t)
}

/// Normalize a gossip matrix into its averaging form.
pub fn mixing_of(g: &GossipMatrix) -> Result<MixingMatrix> {
    if !(g.lambda_max() > 0.0) {
        return Err(Error::invalid(format!(
            "largest gossip eigenvalue must be positive, got {}",
            g.lambda_max()
        )));
    }
    let n = g.dim();
    let mut wt = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            wt.set(i, j, wt.get(i, j) - g.matrix().get(i, j) / g.lambda_max());
        }
    }
    Ok(MixingMatrix { wt: SymMatrix::new(wt)?, round: g.round() })
}

/// Worst-case eigenvalue ratio `chi = max_t lambda_1 / lambda_{M-1}` over
/// rounds `0..horizon`.
pub fn chi_of(topo: &TopologySequence, horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::invalid("chi horizon must cover at least one round"));
    }
    let mut cache = MixingCache::new();
    let mut chi: f64 = 1.0;
    for t in 0..horizon {
        let data = cache.at(topo, t)?;
        chi = chi.max(data.lambda_max / data.lambda_min_nonzero);
    }
    Ok(chi)
}

/// Per-round contraction factor `rho = 1 - 1/chi`.
pub fn rho_of(chi: f64) -> Result<f64> {
    if !(chi >= 1.0 && chi.is_finite()) {
        return Err(Error::invalid(format!("chi must be finite and at least 1, got {chi}")));
    }
    Ok(1.0 - 1.0 / chi)
}

/// One way a candidate gossip matrix can break the standing assumptions.
#[derive(Clone, Debug, PartialEq)]
pub enum Assumption4Violation {
    /// An eigenvalue falls below `-1e-10`.
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    /// `W * 1` is not (numerically) the zero vector.
    ConstantsNotInKernel { residual: f64 },
    /// The kernel has dimension above one — the underlying graph is
    /// disconnected.
    KernelTooLarge { second_smallest: f64 },
    /// A nonzero off-diagonal entry without a corresponding edge.
    SparsityMismatch { i: usize, j: usize, value: f64 },
}

impl std::fmt::Display for Assumption4Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assumption4Violation::NotPositiveSemidefinite { min_eigenvalue } => {
                write!(f, "not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")
            }
            Assumption4Violation::ConstantsNotInKernel { residual } => {
                write!(f, "constant vectors are not in the kernel (|W*1| = {residual:.3e})")
            }
            Assumption4Violation::KernelTooLarge { second_smallest } => {
                write!(
                    f,
                    "kernel dimension exceeds one (second-smallest eigenvalue {second_smallest:.3e}); graph is disconnected"
                )
            }
            Assumption4Violation::SparsityMismatch { i, j, value } => {
                write!(f, "entry ({i}, {j}) = {value:.3e} has no edge at this round")
            }
        }
    }
}

/// Check a gossip matrix against the standing assumptions at round `t`:
/// positive semidefinite, kernel exactly the constants, and sparsity matching
/// the round's edge set. Symmetry is already enforced by [`SymMatrix`].
/// Returns every violation found; an empty list means the matrix is valid.
pub fn validate_assumption4(
    g: &GossipMatrix,
    topo: &TopologySequence,
    t: u64,
) -> Vec<Assumption4Violation> {
    let mut violations = Vec::new();
    let n = g.dim();

    if let Ok(eig) = sym_eigvals(g.matrix()) {
        let min = eig[n - 1];
        if min < -1e-10 {
            violations.push(Assumption4Violation::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        let second_smallest = eig[n - 2];
        if second_smallest <= 1e-10 {
            violations.push(Assumption4Violation::KernelTooLarge { second_smallest });
        }
    }

    let ones = vec![1.0; n];
    let residual = crate::linalg::norm(&g.matrix().matvec(&ones));
    if residual > 1e-10 {
        violations.push(Assumption4Violation::ConstantsNotInKernel { residual });
    }

    let edges: std::collections::BTreeSet<(usize, usize)> =
        topo.edges_at(t).into_iter().collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = g.matrix().get(i, j);
            if v.abs() > 1e-12 && !edges.contains(&(i, j)) {
                violations.push(Assumption4Violation::SparsityMismatch { i, j, value: v });
            }
        }
    }
    violations
}

/// Spectral data shared by gossip and mixing consumers of one edge set.
#[derive(Debug)]
pub(crate) struct CachedMixing {
    pub wt: SymMatrix,
    pub lambda_max: f64,
    pub lambda_min_nonzero: f64,
}

/// Memoizes mixing matrices per distinct edge set. Time-varying sequences
/// with cyclic structure (rotating star in particular) hit the cache on all
/// but their first few rounds.
#[derive(Debug, Default)]
pub(crate) struct MixingCache {
    map: HashMap<Vec<(usize, usize)>, Arc<CachedMixing>>,
}

impl MixingCache {
    pub(crate) fn new() -> Self {
        MixingCache { map: HashMap::new() }
    }

    pub(crate) fn at(&mut self, topo: &TopologySequence, t: u64) -> Result<Arc<CachedMixing>> {
        let edges = topo.edges_at(t);
        if let Some(hit) = self.map.get(&edges) {
            return Ok(Arc::clone(hit));
        }
        let g = laplacian_of(topo, t)?;
        let mixing = mixing_of(&g)?;
        let data = Arc::new(CachedMixing {
            wt: mixing.wt,
            lambda_max: g.lambda_max(),
            lambda_min_nonzero: g.lambda_min_nonzero(),
        });
        self.map.insert(edges, Arc::clone(&data));
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StaticKind;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn path_two_laplacian() {
        let topo = TopologySequence::make_static(StaticKind::Path, 2).unwrap();
        let g = laplacian_of(&topo, 0).unwrap();
        assert_close(g.matrix().get(0, 0), 1.0, 0.0);
        assert_close(g.matrix().get(0, 1), -1.0, 0.0);
        assert_close(g.lambda_max(), 2.0, 1e-9);
        assert_close(g.lambda_min_nonzero(), 2.0, 1e-9);
        let wt = mixing_of(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_close(wt.matrix().get(i, j), 0.5, 1e-12);
            }
        }
    }

    #[test]
    fn complete_three_mixing_is_uniform() {
        let topo = TopologySequence::make_static(StaticKind::Complete, 3).unwrap();
        let g = laplacian_of(&topo, 0).unwrap();
        let wt = mixing_of(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_close(wt.matrix().get(i, j), 1.0 / 3.0, 1e-12);
            }
        }
    }

    #[test]
    fn star_three_spectrum() {
        let topo = TopologySequence::make_static(StaticKind::Star, 3).unwrap();
        let g = laplacian_of(&topo, 0).unwrap();
        let eig = sym_eigvals(g.matrix()).unwrap();
        assert_close(eig[0], 3.0, 1e-9);
        assert_close(eig[1], 1.0, 1e-9);
        assert_close(eig[2], 0.0, 1e-9);
        assert_close(g.lambda_max(), 3.0, 1e-9);
        assert_close(g.lambda_min_nonzero(), 1.0, 1e-9);
    }

    #[test]
    fn mixing_preserves_constants() {
        for topo in [
            TopologySequence::make_static(StaticKind::Ring, 5).unwrap(),
            TopologySequence::make_static(StaticKind::Star, 4).unwrap(),
            TopologySequence::make_rotating_star(4, 1).unwrap(),
        ] {
            let wt = mixing_of(&laplacian_of(&topo, 2).unwrap()).unwrap();
            let ones = vec![1.0; wt.dim()];
            let out = wt.matrix().matvec(&ones);
            for v in out {
                assert_close(v, 1.0, 1e-10);
            }
        }
    }

    #[test]
    fn mixing_eigenvalues_lie_in_unit_interval() {
        let topo = TopologySequence::make_random_connected(6, 0.4, 5).unwrap();
        for t in 0..10 {
            let g = laplacian_of(&topo, t).unwrap();
            let wt = mixing_of(&g).unwrap();
            let eig = sym_eigvals(wt.matrix()).unwrap();
            assert!(eig[0] <= 1.0 + 1e-10);
            assert!(eig[wt.dim() - 1] >= -1e-10);
            // Second-largest mixing eigenvalue is 1 - lambda_{M-1}/lambda_1.
            let expected = 1.0 - g.lambda_min_nonzero() / g.lambda_max();
            assert_close(eig[1], expected, 1e-9);
        }
    }

    #[test]
    fn chi_examples() {
        let complete = TopologySequence::make_static(StaticKind::Complete, 5).unwrap();
        assert_close(chi_of(&complete, 10).unwrap(), 1.0, 1e-9);
        let path2 = TopologySequence::make_static(StaticKind::Path, 2).unwrap();
        assert_close(chi_of(&path2, 10).unwrap(), 1.0, 1e-9);
        let rot = TopologySequence::make_rotating_star(3, 1).unwrap();
        assert_close(chi_of(&rot, 10).unwrap(), 3.0, 1e-9);
    }

    #[test]
    fn rho_examples() {
        assert_close(rho_of(1.0).unwrap(), 0.0, 0.0);
        assert_close(rho_of(2.0).unwrap(), 0.5, 1e-15);
        assert_close(rho_of(3.0).unwrap(), 2.0 / 3.0, 1e-15);
        assert!(rho_of(0.5).is_err());
        assert!(rho_of(f64::NAN).is_err());
    }

    #[test]
    fn validator_accepts_proper_laplacians() {
        let topo = TopologySequence::make_rotating_star(4, 2).unwrap();
        for t in 0..8 {
            let g = laplacian_of(&topo, t).unwrap();
            assert!(validate_assumption4(&g, &topo, t).is_empty());
        }
    }

    #[test]
    fn validator_flags_disconnected_kernel() {
        // Two disjoint pairs: block-diagonal Laplacian, kernel dimension 2.
        let w = SymMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0, 0.0],
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, -1.0],
            vec![0.0, 0.0, -1.0, 1.0],
        ])
        .unwrap();
        let g = GossipMatrix::from_matrix(w, 0).unwrap();
        let topo = TopologySequence::make_static(StaticKind::Complete, 4).unwrap();
        let violations = validate_assumption4(&g, &topo, 0);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Assumption4Violation::KernelTooLarge { .. })));
    }

    #[test]
    fn validator_flags_sparsity_mismatch() {
        // A path graph's Laplacian altered to couple the endpoints directly.
        let topo = TopologySequence::make_static(StaticKind::Path, 3).unwrap();
        let w = SymMatrix::from_rows(&[
            vec![2.0, -1.0, -1.0],
            vec![-1.0, 2.0, -1.0],
            vec![-1.0, -1.0, 2.0],
        ])
        .unwrap();
        let g = GossipMatrix::from_matrix(w, 0).unwrap();
        let violations = validate_assumption4(&g, &topo, 0);
        assert!(violations.iter().any(|v| matches!(
            v,
            Assumption4Violation::SparsityMismatch { i: 0, j: 2, .. }
        )));
    }

    #[test]
    fn validator_flags_indefinite_matrix() {
        let w = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let g = GossipMatrix::from_matrix(w, 0).unwrap();
        let topo = TopologySequence::make_static(StaticKind::Path, 2).unwrap();
        let violations = validate_assumption4(&g, &topo, 0);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Assumption4Violation::NotPositiveSemidefinite { .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Assumption4Violation::ConstantsNotInKernel { .. })));
    }

    #[test]
    fn disconnected_round_is_rejected() {
        // p so small that the raw draw is empty; the repair keeps it
        // connected, so build disconnection directly instead.
        let w = SymMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let g = GossipMatrix::from_matrix(w, 0).unwrap();
        assert!(mixing_of(&g).is_err());

        let topo = TopologySequence::make_static(StaticKind::Path, 2).unwrap();
        assert!(laplacian_of(&topo, 0).is_ok());
    }

    #[test]
    fn contraction_of_disagreement_component() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let topo = TopologySequence::make_rotating_star(5, 1).unwrap();
        for t in 0..10 {
            let g = laplacian_of(&topo, t).unwrap();
            let wt = mixing_of(&g).unwrap();
            let rho_round = 1.0 - g.lambda_min_nonzero() / g.lambda_max();
            let m = wt.dim();
            // Random zero-mean vector.
            let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean: f64 = v.iter().sum::<f64>() / m as f64;
            for x in &mut v {
                *x -= mean;
            }
            let out = wt.matrix().matvec(&v);
            let n_in = crate::linalg::norm(&v);
            let n_out = crate::linalg::norm(&out);
            assert!(n_out <= rho_round * n_in + 1e-9, "round {t}: {n_out} vs {n_in}");
        }
    }

    #[test]
    fn cache_reuses_cyclic_edge_sets() {
        let topo = TopologySequence::make_rotating_star(4, 1).unwrap();
        let mut cache = MixingCache::new();
        let a = cache.at(&topo, 0).unwrap();
        let b = cache.at(&topo, 4).unwrap(); // same center again
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.map.len(), 1);
        cache.at(&topo, 1).unwrap();
        assert_eq!(cache.map.len(), 2);
    }
}
