//! Extremal sources and the modulus `σ_D` by alternating bathtub maximization.
//!
//! For a fixed point `x̂` the best source in
//! `{0 ≤ f ≤ 1, Σ f h^n = β}` is the indicator of the superlevel set of
//! `G(x̂, ·)` with measure `β` (bathtub principle). For a fixed source the
//! best point is the argmax of `u_f`. Alternating the two exact maximizations
//! ascends the bilinear objective `u_f(x̂) = Σ_y G(x̂, y) f(y) h^n`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::Lcg64;
use crate::grid::{GridDomain, ScalarField};
use crate::solver::{green_column_with, solve_poisson_with, torsion_function, GreenColumn, PoissonSolution, SolverOptions};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Objective increase below which an alternating run is declared stalled.
pub const STALL_TOLERANCE: f64 = 1e-12;

/// Cells within this distance of the maximum of `û` are reported as ties.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Greedy bathtub fill: cells ordered by `score` descending (ties by
/// ascending index) get weight 1 until the next full cell would overshoot
/// `beta`; the next cell takes the fractional remainder.
///
/// Returns the weights and the level `α`, the score of the last touched cell
/// (the top score when `beta = 0`).
pub fn fill_weights(score: &[f64], cell_volume: f64, beta: f64) -> (Vec<f64>, f64) {
    let n = score.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let mut weights = vec![0.0; n];
    if n == 0 {
        return (weights, 0.0);
    }
    let units = beta / cell_volume;
    if units >= n as f64 * (1.0 - 1e-14) {
        weights.iter_mut().for_each(|w| *w = 1.0);
        return (weights, score[order[n - 1]]);
    }
    let full = units.floor() as usize;
    let frac = units - full as f64;
    for &c in &order[..full] {
        weights[c] = 1.0;
    }
    let mut alpha = score[order[0]];
    if full > 0 {
        alpha = score[order[full - 1]];
    }
    if frac > 0.0 {
        weights[order[full]] = frac;
        alpha = score[order[full]];
    }
    (weights, alpha)
}

/// Discrete extremal source for one Green column.
#[derive(Debug, Clone)]
pub struct BathtubSet {
    pub level_alpha: f64,
    pub weights: ScalarField,
    pub mass: f64,
}

impl BathtubSet {
    /// `Σ g w h^n` against a column on the same grid.
    pub fn objective(&self, g: &GreenColumn) -> f64 {
        weighted_sum(g.g.values(), self.weights.values()) * self.weights.domain().cell_volume()
    }
}

fn weighted_sum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_beta(d: &GridDomain, beta: f64) -> Result<f64> {
    let m = d.measure();
    if !(beta.is_finite() && beta >= 0.0 && beta <= m * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange { what: "beta", value: beta, lo: 0.0, hi: m });
    }
    Ok(beta.min(m))
}

/// Maximizes `Σ g w h^n` over `0 ≤ w ≤ 1` with `Σ w h^n = beta`.
pub fn calibrate_bathtub(g: &GreenColumn, beta: f64) -> Result<BathtubSet> {
    let d = g.g.domain();
    let beta = check_beta(d, beta)?;
    let (weights, level_alpha) = fill_weights(g.g.values(), d.cell_volume(), beta);
    let weights = ScalarField::new(Arc::clone(d), weights)?;
    let mass = weights.values().iter().sum::<f64>() * d.cell_volume();
    Ok(BathtubSet { level_alpha, weights, mass })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerOptions {
    pub solver: SolverOptions,
    pub max_outer_iterations: usize,
    /// Pseudorandom interior starts in addition to the torsion argmax.
    pub random_starts: usize,
    pub seed: u64,
    /// Extra starting cells tried after the torsion argmax.
    pub extra_starts: Vec<usize>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            solver: SolverOptions::default(),
            max_outer_iterations: 50,
            random_starts: 4,
            seed: DEFAULT_SEED,
            extra_starts: Vec::new(),
        }
    }
}

impl OptimizerOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        OptimizerOptions { solver: SolverOptions::with_rtol(rtol), ..Self::default() }
    }
}

/// One point `(β, σ_D(β))` with optimizer diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaPoint {
    pub beta: f64,
    pub sigma: f64,
    pub argmax_cell: usize,
    pub argmax_center: [f64; 3],
    pub level_alpha: f64,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    pub start_cell: usize,
    /// Cells where `û` is within [`TIE_TOLERANCE`] of `σ`.
    pub tied_cells: Vec<usize>,
    /// Per-start final objectives, in start order.
    pub start_objectives: Vec<f64>,
    /// Extremal source `f̂`.
    #[serde(skip)]
    pub weights: ScalarField,
    /// `û = u_{f̂}`.
    #[serde(skip)]
    pub solution: ScalarField,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaCurve {
    pub measure: f64,
    pub spacing: f64,
    pub dim: usize,
    pub points: Vec<SigmaPoint>,
}

impl SigmaCurve {
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[0].sigma <= w[1].sigma + tol)
    }
}

struct ChainState {
    bathtub: BathtubSet,
    solution: PoissonSolution,
    sigma: f64,
    argmax: usize,
}

struct Chain {
    start: usize,
    history: Vec<f64>,
    best: ChainState,
    iterations: usize,
}

/// Alternating maximizer with a Green-column cache shared across `β` values.
pub struct ExtremalOptimizer {
    domain: Arc<GridDomain>,
    opts: OptimizerOptions,
    torsion_argmax: usize,
    random_cells: Vec<usize>,
    columns: HashMap<usize, GreenColumn>,
}

impl ExtremalOptimizer {
    pub fn new(domain: &Arc<GridDomain>, opts: OptimizerOptions) -> Result<Self> {
        let torsion = torsion_function(domain, opts.solver.rtol)?;
        let mut rng = Lcg64::new(opts.seed);
        let random_cells = (0..opts.random_starts).map(|_| rng.below(domain.len())).collect();
        Ok(ExtremalOptimizer {
            domain: Arc::clone(domain),
            torsion_argmax: torsion.u.argmax(),
            random_cells,
            opts,
            columns: HashMap::new(),
        })
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn torsion_argmax(&self) -> usize {
        self.torsion_argmax
    }

    fn column(&mut self, cell: usize) -> Result<&GreenColumn> {
        if !self.columns.contains_key(&cell) {
            let col = green_column_with(&self.domain, cell, &self.opts.solver)?;
            self.columns.insert(cell, col);
        }
        Ok(&self.columns[&cell])
    }

    fn step(&mut self, x: usize, beta: f64) -> Result<ChainState> {
        let opts = self.opts.solver;
        let domain = Arc::clone(&self.domain);
        let bathtub = calibrate_bathtub(self.column(x)?, beta)?;
        let solution = solve_poisson_with(&domain, &bathtub.weights, &opts, None)?;
        let (sigma, argmax) = solution.u.max_with_cell();
        Ok(ChainState { bathtub, solution, sigma, argmax })
    }

    fn run_chain(&mut self, start: usize, beta: f64, visited: &mut HashMap<usize, usize>, id: usize) -> Result<Chain> {
        let mut x = start;
        let mut history = Vec::new();
        let mut best: Option<ChainState> = None;
        let mut iterations = 0;
        while iterations < self.opts.max_outer_iterations {
            let state = self.step(x, beta)?;
            iterations += 1;
            visited.entry(x).or_insert(id);
            let prev = history.last().copied();
            if let Some(p) = prev {
                // Both half-steps are exact maximizations; a drop is solver noise.
                if state.sigma < p {
                    break;
                }
            }
            history.push(state.sigma);
            let next = state.argmax;
            best = Some(state);
            if next == x || prev.is_some_and(|p| history[history.len() - 1] - p < STALL_TOLERANCE) {
                break;
            }
            // A cell already explored by another start continues identically.
            if visited.get(&next).is_some_and(|&owner| owner != id) {
                break;
            }
            x = next;
        }
        let best = best.expect("at least one iteration");
        Ok(Chain { start, history, best, iterations })
    }

    /// Best alternating-ascent result over all starts.
    pub fn optimize(&mut self, beta: f64) -> Result<SigmaPoint> {
        self.optimize_with_starts(beta, &[])
    }

    fn optimize_with_starts(&mut self, beta: f64, extra: &[usize]) -> Result<SigmaPoint> {
        let beta = check_beta(&self.domain, beta)?;
        let mut starts = vec![self.torsion_argmax];
        starts.extend(self.opts.extra_starts.iter().copied().filter(|&c| c < self.domain.len()));
        starts.extend(extra.iter().copied().filter(|&c| c < self.domain.len()));
        starts.extend(self.random_cells.iter().copied());
        let mut seen = std::collections::HashSet::new();
        starts.retain(|c| seen.insert(*c));

        if beta == 0.0 {
            let zero = ScalarField::zeros(&self.domain);
            let cell = self.torsion_argmax;
            let g_top = self.column(cell)?.g.max();
            return Ok(SigmaPoint {
                beta: 0.0,
                sigma: 0.0,
                argmax_cell: cell,
                argmax_center: self.domain.center(cell),
                level_alpha: g_top,
                iterations: 0,
                objective_history: vec![0.0],
                start_cell: cell,
                tied_cells: Vec::new(),
                start_objectives: vec![0.0; starts.len()],
                weights: zero.clone(),
                solution: zero,
            });
        }

        let mut visited = HashMap::new();
        let mut best: Option<Chain> = None;
        let mut start_objectives = Vec::with_capacity(starts.len());
        for (id, &start) in starts.iter().enumerate() {
            if visited.contains_key(&start) {
                // Already on an explored trajectory.
                let owner = visited[&start];
                start_objectives.push(start_objectives[owner]);
                continue;
            }
            let chain = self.run_chain(start, beta, &mut visited, id)?;
            start_objectives.push(chain.best.sigma);
            if best.as_ref().is_none_or(|b| chain.best.sigma > b.best.sigma) {
                best = Some(chain);
            }
        }
        let chain = best.expect("at least one start");
        let state = chain.best;
        let sigma = state.sigma;
        let tied_cells = state
            .solution
            .u
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= sigma - TIE_TOLERANCE)
            .map(|(i, _)| i)
            .collect();
        Ok(SigmaPoint {
            beta,
            sigma,
            argmax_cell: state.argmax,
            argmax_center: self.domain.center(state.argmax),
            level_alpha: state.bathtub.level_alpha,
            iterations: chain.iterations,
            objective_history: chain.history,
            start_cell: chain.start,
            tied_cells,
            start_objectives,
            weights: state.bathtub.weights,
            solution: state.solution.u,
        })
    }

    /// Sigma points for ascending `betas`; each point also starts from the
    /// previous point's extremal cell, which makes the curve non-decreasing.
    pub fn curve(&mut self, betas: &[f64]) -> Result<SigmaCurve> {
        if betas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("betas must be sorted ascending".into()));
        }
        let mut points: Vec<SigmaPoint> = Vec::with_capacity(betas.len());
        for &beta in betas {
            let extra: Vec<usize> = points.last().map(|p| vec![p.argmax_cell]).unwrap_or_default();
            points.push(self.optimize_with_starts(beta, &extra)?);
        }
        Ok(SigmaCurve { measure: self.domain.measure(), spacing: self.domain.spacing(), dim: self.domain.dim(), points })
    }
}

pub fn optimize_extremal(d: &Arc<GridDomain>, beta: f64, opts: &OptimizerOptions) -> Result<SigmaPoint> {
    check_beta(d, beta)?;
    ExtremalOptimizer::new(d, opts.clone())?.optimize(beta)
}

pub fn sigma_curve(d: &Arc<GridDomain>, betas: &[f64], opts: &OptimizerOptions) -> Result<SigmaCurve> {
    for &b in betas {
        check_beta(d, b)?;
    }
    ExtremalOptimizer::new(d, opts.clone())?.curve(betas)
}

/// Max-norm of the centered-difference gradient of `u` at the extremal cell.
pub fn stationarity_check(sp: &SigmaPoint, u: &ScalarField) -> Result<f64> {
    let d = u.domain();
    let cell = sp.argmax_cell;
    if cell >= d.len() || d.touches_boundary(cell) {
        return Err(Error::GradientUnavailable { cell });
    }
    let h = d.spacing();
    let nb = d.neighbors(cell);
    let v = u.values();
    Ok((0..d.dim())
        .map(|a| ((v[nb[2 * a + 1] as usize] - v[nb[2 * a] as usize]) / (2.0 * h)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_domain, Shape};

    fn toy_column(values: &[f64]) -> GreenColumn {
        // A thin strip with h = 1 gives one cell per value.
        let n = values.len();
        let mut mask = vec![false; (n + 2) * 3];
        for i in 0..n {
            mask[(n + 2) + i + 1] = true;
        }
        let d = Arc::new(GridDomain::from_mask(2, 1.0, [n + 2, 3, 1], [0.0; 3], mask).unwrap());
        GreenColumn { source: 0, g: ScalarField::new(d, values.to_vec()).unwrap() }
    }

    #[test]
    fn three_cell_toy() {
        let g = toy_column(&[3.0, 2.0, 1.0]);
        let set = calibrate_bathtub(&g, 1.5).unwrap();
        assert_eq!(set.weights.values(), &[1.0, 0.5, 0.0]);
        assert_eq!(set.level_alpha, 2.0);
        assert_eq!(set.objective(&g), 4.0);
        assert_eq!(set.mass, 1.5);
    }

    #[test]
    fn empty_and_full_mass() {
        let g = toy_column(&[0.5, 2.0, 1.0, 2.0]);
        let empty = calibrate_bathtub(&g, 0.0).unwrap();
        assert!(empty.weights.values().iter().all(|&w| w == 0.0));
        assert_eq!(empty.mass, 0.0);
        let full = calibrate_bathtub(&g, 4.0).unwrap();
        assert!(full.weights.values().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn ties_break_by_index() {
        let g = toy_column(&[1.0, 2.0, 1.0, 2.0]);
        let set = calibrate_bathtub(&g, 2.5).unwrap();
        assert_eq!(set.weights.values(), &[0.5, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn beta_out_of_range() {
        let g = toy_column(&[1.0, 2.0]);
        assert!(matches!(calibrate_bathtub(&g, -0.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(calibrate_bathtub(&g, 2.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn zero_beta_gives_zero_sigma() {
        let d = make_domain(&Shape::Square { side: 1.0 }, 1.0 / 16.0).unwrap();
        let sp = optimize_extremal(&d, 0.0, &OptimizerOptions::default()).unwrap();
        assert_eq!(sp.sigma, 0.0);
    }

    #[test]
    fn full_beta_gives_torsion_max() {
        let d = make_domain(&Shape::Disk { radius: 1.0 }, 1.0 / 32.0).unwrap();
        let sp = optimize_extremal(&d, d.measure(), &OptimizerOptions::default()).unwrap();
        let torsion = torsion_function(&d, 1e-10).unwrap();
        assert!((sp.sigma - torsion.u.max()).abs() < 1e-9);
        assert_eq!(sp.argmax_cell, d.centermost_cell());
        let grad = stationarity_check(&sp, &sp.solution).unwrap();
        assert!(grad <= 1e-6, "{grad}");
    }

    #[test]
    fn history_is_monotone_and_sigma_is_max() {
        let d = make_domain(&Shape::LShape { side: 1.0 }, 1.0 / 32.0).unwrap();
        let sp = optimize_extremal(&d, 0.2, &OptimizerOptions::default()).unwrap();
        assert!(sp.objective_history.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(sp.sigma, sp.solution.max());
        assert_eq!(*sp.objective_history.last().unwrap(), sp.sigma);
        assert!((sp.weights.norm_l1() - 0.2).abs() < 1e-12);
        assert!(sp.tied_cells.contains(&sp.argmax_cell));
    }

    #[test]
    fn curve_rejects_unsorted_betas() {
        let d = make_domain(&Shape::Square { side: 1.0 }, 1.0 / 16.0).unwrap();
        assert!(sigma_curve(&d, &[0.5, 0.2], &OptimizerOptions::default()).is_err());
        assert!(sigma_curve(&d, &[0.5, 2.0], &OptimizerOptions::default()).is_err());
    }

    #[test]
    fn boundary_argmax_has_no_gradient_check() {
        let d = make_domain(&Shape::Square { side: 1.0 }, 1.0 / 16.0).unwrap();
        let mut sp = optimize_extremal(&d, 0.25, &OptimizerOptions::default()).unwrap();
        sp.argmax_cell = 0;
        assert!(matches!(stationarity_check(&sp, &sp.solution), Err(Error::GradientUnavailable { cell: 0 })));
    }
}
