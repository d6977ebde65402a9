//! Saddle-point problem oracles: local operators, projections, objective
//! values, and duality-gap certificates, plus seeded generators whose
//! smoothness and strong-monotonicity constants are known exactly.
//!
//! A problem assigns each node `m` a local payoff `f_m(x, y)`; the network
//! objective is the average. The node operator stacks the minimizing block's
//! gradient with the negated maximizing block's gradient,
//! `F_m(z) = (grad_x f_m, -grad_y f_m)`, so a saddle point of the average
//! objective is a root (or fixed point of the projected step) of the mean
//! operator.
//!
//! Two families are built in:
//!
//! * **Quadratic**: `f_m(x, y) = x'A_m x / 2 + x'B_m y - y'C_m y / 2
//!   + a_m'x - c_m'y`, unconstrained. With positive-definite mean blocks it
//!   is strongly-convex-strongly-concave and has a closed-form solution.
//! * **Matrix game**: `f_m(x, y) = x'A_m y` over a product of probability
//!   simplexes; merely convex-concave, with an exact best-response gap.
//!
//! [`SaddleProblem::regularize_at`] adds a small strongly-convex-concave
//! penalty around an anchor, converting a bounded convex-concave problem
//! into a strongly monotone one whose accurate solutions nearly solve the
//! original.

use crate::error::{Error, Result};
use crate::linalg::{
    self, add_scaled, check_finite, dot, norm, project_simplex, spectral_norm, sub, sym_eigvals,
    Matrix, SymMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Per-node quadratic data. All vectors run over nodes.
#[derive(Clone, Debug)]
pub struct QuadraticSpec {
    /// Symmetric `nx x nx` curvature of the minimizing block.
    pub a: Vec<Matrix>,
    /// `nx x ny` coupling.
    pub b: Vec<Matrix>,
    /// Symmetric `ny x ny` curvature of the maximizing block.
    pub c: Vec<Matrix>,
    /// Linear term on `x`.
    pub lin_x: Vec<Vec<f64>>,
    /// Linear term on `y` (entering the payoff as `-lin_y'y`).
    pub lin_y: Vec<Vec<f64>>,
}

/// Knobs for [`QuadraticSpec::generate`].
#[derive(Clone, Debug)]
pub struct QuadraticParams {
    pub nodes: usize,
    pub nx: usize,
    pub ny: usize,
    /// Requested strong-convexity-concavity modulus of the mean objective;
    /// realized exactly (every node's block spectra touch it at one index).
    pub mu: f64,
    /// Requested bound on every node's operator Lipschitz constant;
    /// realized as an upper bound.
    pub l_max: f64,
    /// How far node data may spread around the mean, in `[0, 1]`;
    /// zero makes all nodes identical.
    pub heterogeneity: f64,
    pub seed: u64,
}

/// Per-node payoff matrices of a two-player zero-sum game on simplexes.
#[derive(Clone, Debug)]
pub struct MatrixGameSpec {
    /// `nx x ny` payoff per node, paid by the `x` player to the `y` player.
    pub payoffs: Vec<Matrix>,
}

#[derive(Clone, Debug)]
struct QuadraticData {
    a: Vec<Matrix>,
    b: Vec<Matrix>,
    c: Vec<Matrix>,
    lin_x: Vec<Vec<f64>>,
    lin_y: Vec<Vec<f64>>,
    mean_a: Matrix,
    mean_b: Matrix,
    mean_c: Matrix,
    mean_lin_x: Vec<f64>,
    mean_lin_y: Vec<f64>,
}

#[derive(Clone, Debug)]
enum Kind {
    Quadratic(QuadraticData),
    MatrixGame { payoffs: Vec<Matrix>, mean: Matrix },
    Regularized { base: Box<SaddleProblem>, strength: f64, anchor: Vec<f64> },
}

/// A finite-sum saddle-point problem with exact oracles.
#[derive(Clone, Debug)]
pub struct SaddleProblem {
    nodes: usize,
    nx: usize,
    ny: usize,
    kind: Kind,
    l_max: f64,
    l_global: f64,
    mu: f64,
    solution: Option<Vec<f64>>,
}

impl SaddleProblem {
    /// Build a quadratic problem from explicit node data. Constants are
    /// computed from the matrices: `l_max` is the largest node operator
    /// norm, `l_global` the mean operator norm, and `mu` the smallest
    /// eigenvalue across the mean curvature blocks.
    pub fn quadratic(spec: QuadraticSpec) -> Result<Self> {
        let nodes = spec.a.len();
        if nodes == 0 {
            return Err(Error::invalid("a problem needs at least one node"));
        }
        if spec.b.len() != nodes
            || spec.c.len() != nodes
            || spec.lin_x.len() != nodes
            || spec.lin_y.len() != nodes
        {
            return Err(Error::invalid(format!(
                "inconsistent node counts: a {}, b {}, c {}, lin_x {}, lin_y {}",
                spec.a.len(),
                spec.b.len(),
                spec.c.len(),
                spec.lin_x.len(),
                spec.lin_y.len()
            )));
        }
        let nx = spec.a[0].rows();
        let ny = spec.c[0].rows();
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("curvature blocks must be nonempty"));
        }
        for m in 0..nodes {
            // SymMatrix::new is the symmetry check; the result is discarded.
            SymMatrix::new(spec.a[m].clone())
                .map_err(|e| Error::invalid(format!("a[{m}]: {e}")))?;
            SymMatrix::new(spec.c[m].clone())
                .map_err(|e| Error::invalid(format!("c[{m}]: {e}")))?;
            if spec.a[m].rows() != nx || spec.c[m].rows() != ny {
                return Err(Error::invalid(format!("node {m} block sizes differ from node 0")));
            }
            if spec.b[m].rows() != nx || spec.b[m].cols() != ny {
                return Err(Error::invalid(format!(
                    "b[{m}] is {}x{}, expected {nx}x{ny}",
                    spec.b[m].rows(),
                    spec.b[m].cols()
                )));
            }
            if spec.lin_x[m].len() != nx || spec.lin_y[m].len() != ny {
                return Err(Error::invalid(format!("node {m} linear term sizes differ")));
            }
            check_finite(&spec.lin_x[m], "lin_x")?;
            check_finite(&spec.lin_y[m], "lin_y")?;
        }

        let mean_a = mean_matrix(&spec.a);
        let mean_b = mean_matrix(&spec.b);
        let mean_c = mean_matrix(&spec.c);
        let mean_lin_x = mean_vector(&spec.lin_x);
        let mean_lin_y = mean_vector(&spec.lin_y);

        let mut l_max: f64 = 0.0;
        for m in 0..nodes {
            let full = assemble_operator_matrix(&spec.a[m], &spec.b[m], &spec.c[m]);
            l_max = l_max.max(spectral_norm(&full)?);
        }
        let l_global = spectral_norm(&assemble_operator_matrix(&mean_a, &mean_b, &mean_c))?;

        let eig_a = sym_eigvals(&SymMatrix::new(mean_a.clone())?)?;
        let eig_c = sym_eigvals(&SymMatrix::new(mean_c.clone())?)?;
        let mu_raw = eig_a[nx - 1].min(eig_c[ny - 1]);
        if mu_raw < -1e-9 {
            return Err(Error::invalid(format!(
                "mean objective is not convex-concave (curvature eigenvalue {mu_raw:.3e})"
            )));
        }
        let mu = mu_raw.max(0.0);

        // Closed-form saddle of the mean objective, when the mean operator
        // matrix is invertible.
        let mean_full = assemble_operator_matrix(&mean_a, &mean_b, &mean_c);
        let mut rhs: Vec<f64> = Vec::with_capacity(nx + ny);
        rhs.extend(mean_lin_x.iter().map(|v| -v));
        rhs.extend(mean_lin_y.iter().map(|v| -v));
        let solution = linalg::solve_linear(&mean_full, &rhs).ok();

        Ok(SaddleProblem {
            nodes,
            nx,
            ny,
            kind: Kind::Quadratic(QuadraticData {
                a: spec.a,
                b: spec.b,
                c: spec.c,
                lin_x: spec.lin_x,
                lin_y: spec.lin_y,
                mean_a,
                mean_b,
                mean_c,
                mean_lin_x,
                mean_lin_y,
            }),
            l_max,
            l_global,
            mu,
            solution,
        })
    }

    /// Build a matrix game over probability simplexes.
    pub fn matrix_game(spec: MatrixGameSpec) -> Result<Self> {
        let nodes = spec.payoffs.len();
        if nodes == 0 {
            return Err(Error::invalid("a problem needs at least one node"));
        }
        let nx = spec.payoffs[0].rows();
        let ny = spec.payoffs[0].cols();
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("payoff matrices must be nonempty"));
        }
        for (m, p) in spec.payoffs.iter().enumerate() {
            if p.rows() != nx || p.cols() != ny {
                return Err(Error::invalid(format!(
                    "payoff[{m}] is {}x{}, expected {nx}x{ny}",
                    p.rows(),
                    p.cols()
                )));
            }
            if !p.max_abs().is_finite() {
                return Err(Error::invalid(format!("payoff[{m}] has non-finite entries")));
            }
        }
        let mean = mean_matrix(&spec.payoffs);
        let mut l_max: f64 = 0.0;
        for p in &spec.payoffs {
            l_max = l_max.max(spectral_norm(p)?);
        }
        let l_global = spectral_norm(&mean)?;
        Ok(SaddleProblem {
            nodes,
            nx,
            ny,
            kind: Kind::MatrixGame { payoffs: spec.payoffs, mean },
            l_max,
            l_global,
            mu: 0.0,
            solution: None,
        })
    }

    /// The classic two-strategy zero-sum game whose mean payoff is
    /// `[[1, -1], [-1, 1]]`, with node payoffs spread around it by `spread`
    /// in cancelling pairs so the average stays at the designed matrix to
    /// machine precision. The unique equilibrium — both players uniform —
    /// is attached as the known solution.
    pub fn matching_pennies(nodes: usize, spread: f64, seed: u64) -> Result<Self> {
        if !(spread >= 0.0 && spread.is_finite()) {
            return Err(Error::invalid(format!("spread must be finite and nonnegative, got {spread}")));
        }
        let base = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]])?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entry_devs: Vec<Vec<f64>> = Vec::with_capacity(4);
        for _ in 0..4 {
            entry_devs.push(paired_deviations(nodes, &mut rng));
        }
        let mut payoffs = Vec::with_capacity(nodes);
        for m in 0..nodes {
            let mut p = base.clone();
            for (e, dev) in entry_devs.iter().enumerate() {
                let (i, j) = (e / 2, e % 2);
                p.set(i, j, p.get(i, j) + spread * dev[m]);
            }
            payoffs.push(p);
        }
        SaddleProblem::matrix_game(MatrixGameSpec { payoffs })?
            .with_known_solution(&[0.5, 0.5, 0.5, 0.5])
    }

    /// Attach a known saddle point after verifying it is a fixed point of
    /// the projected mean-operator step.
    pub fn with_known_solution(mut self, z: &[f64]) -> Result<Self> {
        if z.len() != self.dim() {
            return Err(Error::invalid(format!(
                "solution has {} coordinates, expected {}",
                z.len(),
                self.dim()
            )));
        }
        check_finite(z, "solution")?;
        let gamma = self.default_gamma();
        let step = sub(z, &self.operator(z).iter().map(|v| gamma * v).collect::<Vec<_>>());
        let candidate = self.project(&step)?;
        let residual = norm(&sub(&candidate, z));
        if residual > 1e-8 {
            return Err(Error::invalid(format!(
                "claimed solution is not a fixed point (residual {residual:.3e})"
            )));
        }
        self.solution = Some(z.to_vec());
        Ok(self)
    }

    /// Regularize around the default initial point. See [`Self::regularize_at`].
    pub fn regularize(self, eps: f64) -> Result<Self> {
        let anchor = self.default_initial()?;
        self.regularize_at(eps, &anchor)
    }

    /// Add `eps / (4 D^2) * (|x - x0|^2 - |y - y0|^2)` to every node payoff,
    /// where `D` is the feasible-set diameter and `z0 = (x0, y0)` the anchor.
    /// The result is strongly monotone with modulus `eps / (2 D^2)`, and any
    /// point solving it to gap `eps / 2` has gap at most `eps` on the
    /// original problem.
    pub fn regularize_at(self, eps: f64, anchor: &[f64]) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("eps must be finite and positive, got {eps}")));
        }
        let d = self.diameter().ok_or_else(|| {
            Error::invalid("regularization needs a bounded feasible set")
        })?;
        if anchor.len() != self.dim() {
            return Err(Error::invalid(format!(
                "anchor has {} coordinates, expected {}",
                anchor.len(),
                self.dim()
            )));
        }
        check_finite(anchor, "anchor")?;
        let strength = eps / (2.0 * d * d);
        // The anchored penalty keeps an existing solution valid only if it
        // coincides with the anchor (the penalty gradient vanishes there).
        let solution = match &self.solution {
            Some(s) if norm(&sub(s, anchor)) <= 1e-12 => Some(s.clone()),
            _ => None,
        };
        Ok(SaddleProblem {
            nodes: self.nodes,
            nx: self.nx,
            ny: self.ny,
            l_max: self.l_max + strength,
            l_global: self.l_global + strength,
            mu: self.mu + strength,
            solution,
            kind: Kind::Regularized { base: Box::new(self), strength, anchor: anchor.to_vec() },
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Total decision dimension `nx + ny`.
    pub fn dim(&self) -> usize {
        self.nx + self.ny
    }

    /// Largest node-operator Lipschitz constant.
    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    /// Lipschitz constant of the mean operator.
    pub fn l_global(&self) -> f64 {
        self.l_global
    }

    /// Strong-monotonicity modulus of the mean operator (zero for merely
    /// convex-concave problems).
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Euclidean diameter bound for the feasible set, if bounded.
    pub fn diameter(&self) -> Option<f64> {
        match &self.kind {
            Kind::Quadratic(_) => None,
            // Each simplex has diameter at most sqrt(2); the conservative
            // product bound adds the blocks linearly.
            Kind::MatrixGame { .. } => Some(2.0 * std::f64::consts::SQRT_2),
            Kind::Regularized { base, .. } => base.diameter(),
        }
    }

    /// The saddle point of the mean objective, when known.
    pub fn solution(&self) -> Option<&[f64]> {
        self.solution.as_deref()
    }

    /// Largest step size with the standard safety margin, `1 / (4 l_max)`.
    pub fn default_gamma(&self) -> f64 {
        if self.l_max > 0.0 {
            1.0 / (4.0 * self.l_max)
        } else {
            1.0
        }
    }

    /// Projection of the origin — zeros for unconstrained problems, uniform
    /// mixed strategies for games.
    pub fn default_initial(&self) -> Result<Vec<f64>> {
        self.project(&vec![0.0; self.dim()])
    }

    /// Node `m`'s operator `F_m(z)`.
    pub fn local_operator(&self, m: usize, z: &[f64]) -> Vec<f64> {
        assert!(m < self.nodes, "node index {m} out of range for {} nodes", self.nodes);
        assert_eq!(z.len(), self.dim(), "operator input has the wrong dimension");
        match &self.kind {
            Kind::Quadratic(q) => {
                quadratic_operator(&q.a[m], &q.b[m], &q.c[m], &q.lin_x[m], &q.lin_y[m], z, self.nx)
            }
            Kind::MatrixGame { payoffs, .. } => game_operator(&payoffs[m], z, self.nx),
            Kind::Regularized { base, strength, anchor } => {
                let mut g = base.local_operator(m, z);
                add_scaled(&mut g, *strength, &sub(z, anchor));
                g
            }
        }
    }

    /// The mean operator, evaluated through the averaged problem data.
    pub fn operator(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.dim(), "operator input has the wrong dimension");
        match &self.kind {
            Kind::Quadratic(q) => quadratic_operator(
                &q.mean_a,
                &q.mean_b,
                &q.mean_c,
                &q.mean_lin_x,
                &q.mean_lin_y,
                z,
                self.nx,
            ),
            Kind::MatrixGame { mean, .. } => game_operator(mean, z, self.nx),
            Kind::Regularized { base, strength, anchor } => {
                let mut g = base.operator(z);
                add_scaled(&mut g, *strength, &sub(z, anchor));
                g
            }
        }
    }

    /// Node `m`'s payoff at `z`.
    pub fn local_value(&self, m: usize, z: &[f64]) -> f64 {
        assert!(m < self.nodes, "node index {m} out of range for {} nodes", self.nodes);
        assert_eq!(z.len(), self.dim(), "value input has the wrong dimension");
        match &self.kind {
            Kind::Quadratic(q) => {
                quadratic_value(&q.a[m], &q.b[m], &q.c[m], &q.lin_x[m], &q.lin_y[m], z, self.nx)
            }
            Kind::MatrixGame { payoffs, .. } => game_value(&payoffs[m], z, self.nx),
            Kind::Regularized { base, strength, anchor } => {
                base.local_value(m, z) + penalty_value(*strength, anchor, z, self.nx)
            }
        }
    }

    /// The mean payoff at `z`.
    pub fn value(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.dim(), "value input has the wrong dimension");
        match &self.kind {
            Kind::Quadratic(q) => quadratic_value(
                &q.mean_a,
                &q.mean_b,
                &q.mean_c,
                &q.mean_lin_x,
                &q.mean_lin_y,
                z,
                self.nx,
            ),
            Kind::MatrixGame { mean, .. } => game_value(mean, z, self.nx),
            Kind::Regularized { base, strength, anchor } => {
                base.value(z) + penalty_value(*strength, anchor, z, self.nx)
            }
        }
    }

    /// Euclidean projection onto the feasible set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::invalid(format!(
                "projection input has {} coordinates, expected {}",
                z.len(),
                self.dim()
            )));
        }
        match &self.kind {
            Kind::Quadratic(_) => {
                check_finite(z, "projection input")?;
                Ok(z.to_vec())
            }
            Kind::MatrixGame { .. } => {
                let mut out = project_simplex(&z[..self.nx])?;
                out.extend(project_simplex(&z[self.nx..])?);
                Ok(out)
            }
            Kind::Regularized { base, .. } => base.project(z),
        }
    }

    /// Duality gap of the mean objective at `z`:
    /// `max_y' f(x, y') - min_x' f(x', y)` over the feasible set. `None`
    /// when no exact certificate exists for this problem.
    pub fn gap(&self, z: &[f64]) -> Option<f64> {
        assert_eq!(z.len(), self.dim(), "gap input has the wrong dimension");
        let (x, y) = z.split_at(self.nx);
        match &self.kind {
            Kind::Quadratic(q) => {
                if self.mu <= 0.0 {
                    return None;
                }
                // Best responses solve the first-order conditions of the
                // mean objective in one block with the other fixed.
                let mut rhs_y = q.mean_b.t_matvec(x);
                for (r, c) in rhs_y.iter_mut().zip(&q.mean_lin_y) {
                    *r -= c;
                }
                let best_y = linalg::solve_linear(&q.mean_c, &rhs_y).ok()?;
                let mut rhs_x = q.mean_b.matvec(y);
                for (r, a) in rhs_x.iter_mut().zip(&q.mean_lin_x) {
                    *r = -(*r + a);
                }
                let best_x = linalg::solve_linear(&q.mean_a, &rhs_x).ok()?;
                let mut z_up = x.to_vec();
                z_up.extend(best_y);
                let mut z_down = best_x;
                z_down.extend(y.iter().copied());
                Some(self.value(&z_up) - self.value(&z_down))
            }
            Kind::MatrixGame { mean, .. } => {
                // Linear payoffs attain their best responses at vertices.
                let col_scores = mean.t_matvec(x);
                let row_scores = mean.matvec(y);
                let best_up = col_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let best_down = row_scores.iter().cloned().fold(f64::INFINITY, f64::min);
                Some(best_up - best_down)
            }
            Kind::Regularized { base, strength, anchor } => match &base.kind {
                Kind::MatrixGame { mean, .. } => {
                    Some(regularized_game_gap(mean, *strength, anchor, z, self.nx))
                }
                _ => None,
            },
        }
    }
}

/// Maximum over nodes of the operator's claimed-versus-observed constants on
/// random feasible pairs; used to validate a problem instance empirically.
#[derive(Clone, Copy, Debug)]
pub struct OperatorCheck {
    /// Smallest observed `<F(z1) - F(z2), z1 - z2> / |z1 - z2|^2` for the
    /// mean operator; at least `mu` up to rounding when the claim holds.
    pub min_monotonicity_ratio: f64,
    /// Largest observed `|F_m(z1) - F_m(z2)| / |z1 - z2|` over nodes; at
    /// most `l_max` up to rounding when the claim holds.
    pub max_lipschitz_ratio: f64,
    /// Number of pairs actually measured.
    pub samples: usize,
}

/// Sample random feasible pairs and measure the mean operator's
/// monotonicity and every node operator's Lipschitz ratio.
pub fn check_operator_constants(
    problem: &SaddleProblem,
    pairs: usize,
    seed: u64,
) -> Result<OperatorCheck> {
    if pairs == 0 {
        return Err(Error::invalid("need at least one sample pair"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = problem.dim();
    let mut min_mono = f64::INFINITY;
    let mut max_lip: f64 = 0.0;
    let mut used = 0;
    // A (near-)single-point feasible set yields no usable pairs; the attempt
    // cap keeps that case from looping forever and reports the checks as
    // vacuous (samples = 0, inf/0 ratios over the empty set).
    let mut attempts = 0usize;
    let max_attempts = pairs.saturating_mul(50).saturating_add(1000);
    while used < pairs && attempts < max_attempts {
        attempts += 1;
        let raw1: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let raw2: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let z1 = problem.project(&raw1)?;
        let z2 = problem.project(&raw2)?;
        let delta = sub(&z1, &z2);
        let dist = norm(&delta);
        if dist < 1e-9 {
            continue;
        }
        let diff_mean = sub(&problem.operator(&z1), &problem.operator(&z2));
        min_mono = min_mono.min(dot(&diff_mean, &delta) / (dist * dist));
        for m in 0..problem.nodes() {
            let diff = sub(&problem.local_operator(m, &z1), &problem.local_operator(m, &z2));
            max_lip = max_lip.max(norm(&diff) / dist);
        }
        used += 1;
    }
    Ok(OperatorCheck { min_monotonicity_ratio: min_mono, max_lipschitz_ratio: max_lip, samples: used })
}

impl QuadraticSpec {
    /// Draw a seeded instance realizing the requested constants: the mean
    /// curvature blocks have smallest eigenvalue exactly `mu`, and every
    /// node operator norm is at most `l_max`. Node data are drawn as exact
    /// zero-mean pairs around shared mean data in shared eigenbases, so the
    /// averaged problem keeps the designed spectrum.
    pub fn generate(params: &QuadraticParams) -> Result<Self> {
        let QuadraticParams { nodes, nx, ny, mu, l_max, heterogeneity, seed } = *params;
        if nodes == 0 || nx == 0 || ny == 0 {
            return Err(Error::invalid("nodes, nx, and ny must all be positive"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be finite and nonnegative, got {mu}")));
        }
        if !(l_max > mu && l_max.is_finite()) {
            return Err(Error::invalid(format!("l_max must be finite and exceed mu, got {l_max}")));
        }
        if !(0.0..=1.0).contains(&heterogeneity) {
            return Err(Error::invalid(format!(
                "heterogeneity must lie in [0, 1], got {heterogeneity}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Budget split: curvature spectra reach 3/4 of the way from mu to
        // l_max; the coupling block takes the remaining quarter, so
        // |node operator| <= max curvature + |coupling| <= l_max.
        let a_hi = mu + 0.75 * (l_max - mu);
        let b_cap = 0.25 * (l_max - mu);

        let q_a = random_orthogonal(nx, &mut rng);
        let q_c = random_orthogonal(ny, &mut rng);

        let a = heterogeneous_curvature(nodes, &q_a, mu, a_hi, heterogeneity, &mut rng);
        let c = heterogeneous_curvature(nodes, &q_c, mu, a_hi, heterogeneity, &mut rng);

        let k = nx.min(ny);
        let mean_sigmas = linspace(0.4 * b_cap, 0.8 * b_cap, k);
        let mut sigma_devs = Vec::with_capacity(k);
        for _ in 0..k {
            sigma_devs.push(paired_deviations(nodes, &mut rng));
        }
        let mut b = Vec::with_capacity(nodes);
        for m in 0..nodes {
            let sigmas: Vec<f64> = (0..k)
                .map(|i| mean_sigmas[i] + 0.2 * b_cap * heterogeneity * sigma_devs[i][m])
                .collect();
            b.push(singular_assemble(&q_a, &q_c, &sigmas));
        }

        let lin_x = heterogeneous_linear(nodes, nx, heterogeneity, &mut rng);
        let lin_y = heterogeneous_linear(nodes, ny, heterogeneity, &mut rng);

        Ok(QuadraticSpec { a, b, c, lin_x, lin_y })
    }
}

impl MatrixGameSpec {
    /// Draw a seeded game: mean payoff entries uniform in `[-1, 1]`, node
    /// payoffs spread around the mean in exact zero-sum pairs.
    pub fn random(nodes: usize, nx: usize, ny: usize, seed: u64) -> Result<Self> {
        if nodes == 0 || nx == 0 || ny == 0 {
            return Err(Error::invalid("nodes, nx, and ny must all be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mean = Matrix::zeros(nx, ny);
        for i in 0..nx {
            for j in 0..ny {
                mean.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let mut entry_devs = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            entry_devs.push(paired_deviations(nodes, &mut rng));
        }
        let mut payoffs = Vec::with_capacity(nodes);
        for m in 0..nodes {
            let mut p = mean.clone();
            for i in 0..nx {
                for j in 0..ny {
                    p.set(i, j, p.get(i, j) + 0.5 * entry_devs[i * ny + j][m]);
                }
            }
            payoffs.push(p);
        }
        Ok(MatrixGameSpec { payoffs })
    }
}

fn mean_matrix(mats: &[Matrix]) -> Matrix {
    let mut out = Matrix::zeros(mats[0].rows(), mats[0].cols());
    let scale = 1.0 / mats.len() as f64;
    for mat in mats {
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                out.set(i, j, out.get(i, j) + scale * mat.get(i, j));
            }
        }
    }
    out
}

fn mean_vector(vecs: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vecs[0].len()];
    let scale = 1.0 / vecs.len() as f64;
    for v in vecs {
        for (acc, x) in out.iter_mut().zip(v) {
            *acc += scale * x;
        }
    }
    out
}

/// Stack the blocks into the operator's matrix `[[A, B], [-B', C]]`.
fn assemble_operator_matrix(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    let nx = a.rows();
    let ny = c.rows();
    let mut full = Matrix::zeros(nx + ny, nx + ny);
    for i in 0..nx {
        for j in 0..nx {
            full.set(i, j, a.get(i, j));
        }
        for j in 0..ny {
            full.set(i, nx + j, b.get(i, j));
        }
    }
    for i in 0..ny {
        for j in 0..nx {
            full.set(nx + i, j, -b.get(j, i));
        }
        for j in 0..ny {
            full.set(nx + i, nx + j, c.get(i, j));
        }
    }
    full
}

fn quadratic_operator(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    lin_x: &[f64],
    lin_y: &[f64],
    z: &[f64],
    nx: usize,
) -> Vec<f64> {
    let (x, y) = z.split_at(nx);
    let mut gx = a.matvec(x);
    add_scaled(&mut gx, 1.0, &b.matvec(y));
    add_scaled(&mut gx, 1.0, lin_x);
    let mut gy = c.matvec(y);
    add_scaled(&mut gy, -1.0, &b.t_matvec(x));
    add_scaled(&mut gy, 1.0, lin_y);
    gx.extend(gy);
    gx
}

fn quadratic_value(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    lin_x: &[f64],
    lin_y: &[f64],
    z: &[f64],
    nx: usize,
) -> f64 {
    let (x, y) = z.split_at(nx);
    0.5 * dot(x, &a.matvec(x)) + dot(x, &b.matvec(y)) - 0.5 * dot(y, &c.matvec(y))
        + dot(lin_x, x)
        - dot(lin_y, y)
}

fn game_operator(payoff: &Matrix, z: &[f64], nx: usize) -> Vec<f64> {
    let (x, y) = z.split_at(nx);
    let mut g = payoff.matvec(y);
    g.extend(payoff.t_matvec(x).iter().map(|v| -v));
    g
}

fn game_value(payoff: &Matrix, z: &[f64], nx: usize) -> f64 {
    let (x, y) = z.split_at(nx);
    dot(x, &payoff.matvec(y))
}

fn penalty_value(strength: f64, anchor: &[f64], z: &[f64], nx: usize) -> f64 {
    let alpha = strength / 2.0;
    let dx: f64 = z[..nx]
        .iter()
        .zip(&anchor[..nx])
        .map(|(v, a)| (v - a) * (v - a))
        .sum();
    let dy: f64 = z[nx..]
        .iter()
        .zip(&anchor[nx..])
        .map(|(v, a)| (v - a) * (v - a))
        .sum();
    alpha * (dx - dy)
}

/// Exact duality gap for a regularized matrix game. Both inner problems are
/// strongly concave/convex quadratics over a simplex whose optimizers are
/// Euclidean projections of shifted anchors.
fn regularized_game_gap(
    mean: &Matrix,
    strength: f64,
    anchor: &[f64],
    z: &[f64],
    nx: usize,
) -> f64 {
    let alpha = strength / 2.0;
    let (x, y) = z.split_at(nx);
    let (x0, y0) = anchor.split_at(nx);

    // max over y' of  (A'x)'y' - alpha |y' - y0|^2.
    let col_scores = mean.t_matvec(x);
    let mut target_y = y0.to_vec();
    add_scaled(&mut target_y, 1.0 / (2.0 * alpha), &col_scores);
    let best_y = project_simplex(&target_y).expect("simplex projection of finite data");
    let up = dot(&col_scores, &best_y) - alpha * dist_sq(&best_y, y0);

    // min over x' of  (A y)'x' + alpha |x' - x0|^2.
    let row_scores = mean.matvec(y);
    let mut target_x = x0.to_vec();
    add_scaled(&mut target_x, -1.0 / (2.0 * alpha), &row_scores);
    let best_x = project_simplex(&target_x).expect("simplex projection of finite data");
    let down = dot(&row_scores, &best_x) + alpha * dist_sq(&best_x, x0);

    alpha * dist_sq(x, x0) + up - down + alpha * dist_sq(y, y0)
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Values in `[-1, 1]` with an exactly zero sum: drawn in `(d, -d)` pairs,
/// with a trailing zero when the count is odd.
fn paired_deviations(nodes: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = vec![0.0; nodes];
    for i in 0..nodes / 2 {
        let d = rng.gen_range(-1.0..1.0);
        out[2 * i] = d;
        out[2 * i + 1] = -d;
    }
    out
}

/// Random orthogonal matrix: modified Gram-Schmidt on Gaussian columns.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    'redraw: loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for u in &basis {
                let proj = dot(&v, u);
                add_scaled(&mut v, -proj, u);
            }
            let len = norm(&v);
            if len < 1e-8 {
                continue 'redraw;
            }
            for x in &mut v {
                *x /= len;
            }
            basis.push(v);
        }
        let mut q = Matrix::zeros(n, n);
        for (j, col) in basis.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                q.set(i, j, *v);
            }
        }
        return q;
    }
}

/// `Q diag(s) Q'`, written symmetrically so the symmetry check is exact.
fn eigen_assemble(q: &Matrix, spectrum: &[f64]) -> Matrix {
    let n = q.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut v = 0.0;
            for (k, s) in spectrum.iter().enumerate() {
                v += q.get(i, k) * s * q.get(j, k);
            }
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

/// `Qa diag(s) Qc'` for a rectangular coupling block.
fn singular_assemble(q_a: &Matrix, q_c: &Matrix, sigmas: &[f64]) -> Matrix {
    let nx = q_a.rows();
    let ny = q_c.rows();
    let mut out = Matrix::zeros(nx, ny);
    for i in 0..nx {
        for j in 0..ny {
            let mut v = 0.0;
            for (k, s) in sigmas.iter().enumerate() {
                v += q_a.get(i, k) * s * q_c.get(j, k);
            }
            out.set(i, j, v);
        }
    }
    out
}

/// Per-node curvature blocks sharing the eigenbasis `q`: mean spectrum runs
/// linearly from `mu` to `hi`, node spectra wobble around it without leaving
/// `[mu, hi]`, and the eigenvalue at `mu` is pinned there for every node.
fn heterogeneous_curvature(
    nodes: usize,
    q: &Matrix,
    mu: f64,
    hi: f64,
    heterogeneity: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Matrix> {
    let n = q.rows();
    let mean_spectrum = linspace(mu, hi, n);
    let mut devs = Vec::with_capacity(n);
    for s in &mean_spectrum {
        let width = heterogeneity * (s - mu).min(hi - s);
        let node_devs = paired_deviations(nodes, rng);
        devs.push((width, node_devs));
    }
    (0..nodes)
        .map(|m| {
            let spectrum: Vec<f64> = mean_spectrum
                .iter()
                .zip(&devs)
                .map(|(s, (width, node_devs))| s + width * node_devs[m])
                .collect();
            eigen_assemble(q, &spectrum)
        })
        .collect()
}

fn heterogeneous_linear(
    nodes: usize,
    len: usize,
    heterogeneity: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mean: Vec<f64> = (0..len).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut devs = Vec::with_capacity(len);
    for _ in 0..len {
        devs.push(paired_deviations(nodes, rng));
    }
    (0..nodes)
        .map(|m| {
            mean.iter()
                .zip(&devs)
                .map(|(v, node_devs)| v + 0.5 * heterogeneity * node_devs[m])
                .collect()
        })
        .collect()
}
