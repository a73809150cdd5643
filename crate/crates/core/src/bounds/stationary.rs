//! Single-letter bounds over stationary input laws.
//!
//! The feasible set is the polytope of pmfs `P` on `grid^{k+1}` whose first-`k`
//! and last-`k` marginals agree and whose per-coordinate average intensity is at
//! most `alpha`. Two concave objectives are maximized over it with away-step
//! Frank-Wolfe, each linear step solved exactly as a small LP:
//!
//! * joint: `I(X_{1:k+1}; Y_{k+1})`,
//! * conditional: `I(X_{k+1}; Y_{k+1} | X_{1:k})`.
//!
//! Both are evaluated through their degree-one homogeneous extensions to the
//! positive orthant, whose gradients are `D(W_t || q)` and `D(W_{u,x} || q_u)`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::capacity_solver::{ba_capacity, output_distribution, row_divergence, SolverConfig};
use crate::channel_model::{
    build_block_channel, BlockChannelSpec, ChannelSpec, DiscreteChannel, InputGrid, TupleIndexer,
    DEFAULT_TAIL_EPS,
};
use crate::error::{invalid, Error, Result};

const LINE_SEARCH_STEPS: usize = 60;
const COST_SLACK: f64 = 1e-12;
/// Frank-Wolfe iterations are capped here regardless of `SolverConfig::max_iters`.
pub const FW_MAX_ITERS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryObjective {
    /// `I(X_{1:k+1}; Y_{k+1})`
    Joint,
    /// `I(X_{k+1}; Y_{k+1} | X_{1:k})`
    Conditional,
}

/// Optimum of one stationary program.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult {
    /// Objective at the returned pmf, nats.
    pub value: f64,
    /// Joint pmf over `grid^{k+1}`, first coordinate most significant.
    pub joint: Vec<f64>,
    /// Frank-Wolfe duality gap; the program's maximum lies in `[value, value + fw_gap]`.
    pub fw_gap: f64,
    pub iterations: usize,
}

/// Both stationary bounds of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryBound {
    pub upper: StationaryResult,
    pub lower: StationaryResult,
}

/// The stationary polytope together with the one-slot channel `W(y | x_{1:k+1})`.
#[derive(Debug, Clone)]
pub struct StationaryProblem {
    channel: DiscreteChannel,
    indexer: TupleIndexer,
    alpha: f64,
}

impl StationaryProblem {
    pub fn new(spec: &ChannelSpec, grid: &InputGrid, tail_eps: f64) -> Result<Self> {
        let bspec = BlockChannelSpec::new(spec.clone(), grid.clone(), 1, tail_eps)?;
        let channel = build_block_channel(&bspec)?;
        Ok(Self {
            channel,
            indexer: TupleIndexer::new(grid.len(), spec.memory() + 1),
            alpha: spec.alpha,
        })
    }

    pub fn channel(&self) -> &DiscreteChannel {
        &self.channel
    }

    pub fn dim(&self) -> usize {
        self.channel.n_inputs()
    }

    fn m(&self) -> usize {
        self.indexer.base
    }

    fn k(&self) -> usize {
        self.indexer.len - 1
    }

    /// Number of `x_{1:k}` contexts, `m^k`.
    fn contexts(&self) -> usize {
        self.dim() / self.m()
    }

    /// Largest violation of the marginal equalities.
    pub fn stationarity_residual(&self, joint: &[f64]) -> f64 {
        let (m, ctx) = (self.m(), self.contexts());
        let mut diff = vec![0.0; ctx];
        for (t, p) in joint.iter().enumerate() {
            // leading k digits are t / m, trailing k digits are t % ctx
            diff[t / m] += p;
            diff[t % ctx] -= p;
        }
        diff.iter().fold(0.0, |a, d| a.max(d.abs()))
    }

    /// `E[mean of the tuple]` under `joint`.
    pub fn expected_cost(&self, joint: &[f64]) -> f64 {
        joint.iter().zip(self.channel.cost()).map(|(p, c)| p * c).sum()
    }

    /// The i.i.d. law `pi^{k+1}` with `pi` the marginal on the grid.
    pub fn iid(&self, marginal: &[f64]) -> Result<Vec<f64>> {
        if marginal.len() != self.m() {
            return invalid("marginal length differs from the grid size");
        }
        Ok((0..self.dim())
            .map(|t| self.indexer.decode(t).iter().map(|&d| marginal[d]).product())
            .collect())
    }

    /// Objective at an unnormalized positive weight vector (homogeneous extension).
    pub fn objective(&self, kind: StationaryObjective, joint: &[f64]) -> f64 {
        match kind {
            StationaryObjective::Joint => {
                let total: f64 = joint.iter().sum();
                let mut q = output_distribution(&self.channel, joint);
                q.iter_mut().for_each(|v| *v /= total);
                joint
                    .iter()
                    .zip(self.channel.rows())
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, row)| p * row_divergence(row, &q))
                    .sum()
            }
            StationaryObjective::Conditional => (0..self.contexts())
                .map(|u| {
                    let block = &joint[u * self.m()..(u + 1) * self.m()];
                    match self.context_output(u, block) {
                        None => 0.0,
                        Some(q) => block
                            .iter()
                            .enumerate()
                            .filter(|(_, p)| **p > 0.0)
                            .map(|(x, p)| p * row_divergence(self.channel.row(u * self.m() + x), &q))
                            .sum(),
                    }
                })
                .sum(),
        }
    }

    /// Gradient of [`Self::objective`]; every entry is finite at points with full support.
    pub fn gradient(&self, kind: StationaryObjective, joint: &[f64]) -> Vec<f64> {
        self.gradient_with(kind, joint, None)
    }

    /// As [`Self::gradient`]; contexts with zero mass use `D(W_{u,x} || fallback_u)`,
    /// a supergradient whenever `fallback_u` is any output law.
    fn gradient_with(
        &self,
        kind: StationaryObjective,
        joint: &[f64],
        fallback: Option<&[Vec<f64>]>,
    ) -> Vec<f64> {
        match kind {
            StationaryObjective::Joint => {
                let total: f64 = joint.iter().sum();
                let mut q = output_distribution(&self.channel, joint);
                q.iter_mut().for_each(|v| *v /= total);
                self.channel.rows().map(|row| row_divergence(row, &q)).collect()
            }
            StationaryObjective::Conditional => {
                let m = self.m();
                let mut g = Vec::with_capacity(self.dim());
                for u in 0..self.contexts() {
                    let block = &joint[u * m..(u + 1) * m];
                    let q = match (self.context_output(u, block), fallback) {
                        (Some(q), _) => q,
                        (None, Some(f)) => f[u].clone(),
                        // no reference law: the block's uniform mixture
                        (None, None) => self
                            .context_output(u, &vec![1.0; m])
                            .expect("uniform block has mass"),
                    };
                    g.extend((0..m).map(|x| row_divergence(self.channel.row(u * m + x), &q)));
                }
                g
            }
        }
    }

    /// `q_u(y) = sum_x P(u,x) W(y|u,x) / P(u)`, or `None` when `P(u) = 0`.
    fn context_output(&self, u: usize, block: &[f64]) -> Option<Vec<f64>> {
        let mass: f64 = block.iter().sum();
        if mass <= 0.0 {
            return None;
        }
        let mut q = vec![0.0; self.channel.n_outputs()];
        for (x, p) in block.iter().enumerate() {
            if *p > 0.0 {
                for (qy, w) in q.iter_mut().zip(self.channel.row(u * self.m() + x)) {
                    *qy += p / mass * w;
                }
            }
        }
        Some(q)
    }

    /// A vertex of the polytope maximizing `c . P`.
    pub fn lp_vertex(&self, c: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let (m, ctx) = (self.m(), self.contexts());
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = c.iter().map(|ci| lp.add_var(*ci, (0.0, f64::INFINITY))).collect();
        lp.add_constraint(vars.iter().map(|v| (*v, 1.0)), ComparisonOp::Eq, 1.0);
        // one marginal equality is implied by the others and the total mass
        for u in 0..ctx.saturating_sub(1) {
            let mut coef = vec![0.0; n];
            for x in 0..m {
                coef[u * m + x] += 1.0;
                coef[x * ctx + u] -= 1.0;
            }
            let expr: Vec<_> = coef
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(t, a)| (vars[t], *a))
                .collect();
            if !expr.is_empty() {
                lp.add_constraint(expr, ComparisonOp::Eq, 0.0);
            }
        }
        let cost = self.channel.cost();
        lp.add_constraint(
            vars.iter().zip(cost).map(|(v, c)| (*v, *c)),
            ComparisonOp::Le,
            self.alpha + COST_SLACK,
        );
        let sol = lp.solve().map_err(|e| Error::LinearProgram(e.to_string()))?;
        let mut s: Vec<f64> = vars.iter().map(|v| sol[*v].max(0.0)).collect();
        let total: f64 = s.iter().sum();
        s.iter_mut().for_each(|x| *x /= total);
        Ok(s)
    }

    /// Feasible full-support starting point: i.i.d. with marginal
    /// `(1 - e) delta_0 + e * uniform`, `e` as large as the cost allows.
    fn start(&self) -> Result<Vec<f64>> {
        let m = self.m();
        let grid_mean = self.mean_grid_point();
        let e = if grid_mean <= 0.0 {
            1.0
        } else {
            (self.alpha / grid_mean).min(1.0)
        };
        let mut marginal = vec![e / m as f64; m];
        marginal[0] += 1.0 - e;
        self.iid(&marginal)
    }

    fn mean_grid_point(&self) -> f64 {
        // cost of (x, x, ..., x) is x; these sit at indices x * (1 + m + ... + m^k)
        let stride: usize = (0..=self.k()).map(|j| self.m().pow(j as u32)).sum();
        (0..self.m()).map(|x| self.channel.cost()[x * stride]).sum::<f64>() / self.m() as f64
    }

    /// Capacity-achieving output law of each context's rows, for zero-mass contexts.
    fn context_references(&self, config: &SolverConfig) -> Result<Vec<Vec<f64>>> {
        let m = self.m();
        (0..self.contexts())
            .map(|u| {
                let rows: Vec<Vec<f64>> = (0..m).map(|x| self.channel.row(u * m + x).to_vec()).collect();
                let sub = DiscreteChannel::from_rows(rows, vec![0.0; m])?;
                let cap = ba_capacity(&sub, None, config)?;
                Ok(output_distribution(&sub, &cap.input_dist))
            })
            .collect()
    }

    /// Away-step Frank-Wolfe on `kind`.
    pub fn solve(&self, kind: StationaryObjective, config: &SolverConfig) -> Result<StationaryResult> {
        config.validate()?;
        let n = self.dim();
        if self.alpha <= COST_SLACK {
            // only the all-zero tuple is affordable
            let mut joint = vec![0.0; n];
            joint[0] = 1.0;
            return Ok(StationaryResult {
                value: 0.0,
                joint,
                fw_gap: 0.0,
                iterations: 0,
            });
        }
        let fallback = match kind {
            StationaryObjective::Conditional => Some(self.context_references(config)?),
            StationaryObjective::Joint => None,
        };
        let grad = |p: &[f64]| self.gradient_with(kind, p, fallback.as_deref());
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

        let mut p = self.start()?;
        let mut atoms: Vec<(Vec<f64>, f64)> = vec![(p.clone(), 1.0)];
        let max_iters = config.max_iters.min(FW_MAX_ITERS);
        let mut gap = f64::INFINITY;
        for it in 0..max_iters {
            let g = grad(&p);
            let gp = dot(&g, &p);
            let s = self.lp_vertex(&g)?;
            gap = dot(&g, &s) - gp;
            if gap <= config.tol {
                let value = self.objective(kind, &p);
                return Ok(StationaryResult {
                    value,
                    joint: p,
                    fw_gap: gap.max(0.0),
                    iterations: it,
                });
            }
            let (away_idx, away_val) = atoms
                .iter()
                .enumerate()
                .map(|(i, (a, _))| (i, dot(&g, a)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("active set is nonempty");
            let away_gap = gp - away_val;
            if gap >= away_gap || atoms.len() == 1 {
                let d: Vec<f64> = s.iter().zip(&p).map(|(a, b)| a - b).collect();
                let gamma = self.line_search(&grad, &p, &d, 1.0, gap);
                for (_, w) in atoms.iter_mut() {
                    *w *= 1.0 - gamma;
                }
                match atoms.iter_mut().find(|(a, _)| same_point(a, &s)) {
                    Some((_, w)) => *w += gamma,
                    None => atoms.push((s, gamma)),
                }
                step(&mut p, &d, gamma);
            } else {
                let w_away = atoms[away_idx].1;
                let gamma_max = w_away / (1.0 - w_away);
                let d: Vec<f64> = p.iter().zip(&atoms[away_idx].0).map(|(a, b)| a - b).collect();
                let gamma = self.line_search(&grad, &p, &d, gamma_max, away_gap);
                for (_, w) in atoms.iter_mut() {
                    *w *= 1.0 + gamma;
                }
                atoms[away_idx].1 -= gamma;
                step(&mut p, &d, gamma);
            }
            atoms.retain(|(_, w)| *w > 1e-15);
            let total: f64 = atoms.iter().map(|(_, w)| w).sum();
            atoms.iter_mut().for_each(|(_, w)| *w /= total);
        }
        Err(Error::NonConvergence {
            iterations: max_iters,
            gap,
        })
    }

    /// Maximizes the concave 1-D restriction on `[0, gamma_max]` by bisection on the
    /// sign of its derivative.
    fn line_search(
        &self,
        grad: &impl Fn(&[f64]) -> Vec<f64>,
        p: &[f64],
        d: &[f64],
        gamma_max: f64,
        slope0: f64,
    ) -> f64 {
        if slope0 <= 0.0 || gamma_max <= 0.0 {
            return 0.0;
        }
        let slope = |gamma: f64| {
            let mut x = p.to_vec();
            step(&mut x, d, gamma);
            grad(&x).iter().zip(d).map(|(a, b)| a * b).sum::<f64>()
        };
        if slope(gamma_max) >= 0.0 {
            return gamma_max;
        }
        let (mut lo, mut hi) = (0.0, gamma_max);
        for _ in 0..LINE_SEARCH_STEPS {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn step(p: &mut [f64], d: &[f64], gamma: f64) {
    for (x, dx) in p.iter_mut().zip(d) {
        *x = (*x + gamma * dx).max(0.0);
    }
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// `max I(X_{1:k+1}; Y_{k+1})` over stationary pmfs on `grid^{k+1}` with average cost `<= alpha`.
pub fn theorem2_upper(
    spec: &ChannelSpec,
    grid: &InputGrid,
    config: &SolverConfig,
) -> Result<StationaryResult> {
    StationaryProblem::new(spec, grid, DEFAULT_TAIL_EPS)?.solve(StationaryObjective::Joint, config)
}

/// `max I(X_{k+1}; Y_{k+1} | X_{1:k})` over the same stationary pmfs.
pub fn theorem2_lower(
    spec: &ChannelSpec,
    grid: &InputGrid,
    config: &SolverConfig,
) -> Result<StationaryResult> {
    StationaryProblem::new(spec, grid, DEFAULT_TAIL_EPS)?
        .solve(StationaryObjective::Conditional, config)
}

/// Both stationary bounds, sharing one channel build.
pub fn theorem2_bounds(
    spec: &ChannelSpec,
    grid: &InputGrid,
    config: &SolverConfig,
) -> Result<StationaryBound> {
    let problem = StationaryProblem::new(spec, grid, DEFAULT_TAIL_EPS)?;
    let (upper, lower) = rayon::join(
        || problem.solve(StationaryObjective::Joint, config),
        || problem.solve(StationaryObjective::Conditional, config),
    );
    Ok(StationaryBound {
        upper: upper?,
        lower: lower?,
    })
}
