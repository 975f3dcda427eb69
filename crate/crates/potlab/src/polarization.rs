//! Polarization of point configurations and the extremal maximin problem.
//!
//! The polarization of `ω_N` is the minimum over the set of the averaged
//! potential `U(x) = (1/N) Σ K(x, a_i)`. The minimum is located by
//! hierarchical mesh refinement: evaluate on a covering mesh, keep the
//! best few basins, remesh locally at half the resolution, and stop when
//! the running minimum stalls. Reported values are upper bounds of the
//! true minimum that tighten as the trace refines.
//!
//! The extremal problem (supremum of polarization over `A^N`) is attacked
//! by best-of-restarts local search with exchange moves; results are
//! lower bounds for the extremal value.

use crate::energy::descend_energy;
use crate::geometry::{CompactSet, Point};
use crate::kernels::{Kernel, PairKernel};
use crate::measures::{equilibrium_measure_with, EquilibriumMeasure, EquilibriumOptions};
use crate::numerics::derive_seed;
use crate::{Error, Result};
use serde::Serialize;

/// An ordered multiset of `N ≥ 1` points on a compact set. Duplicates
/// are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    points: Vec<Point>,
}

impl Configuration {
    /// Validates that every point lies on the set (within `1e−9·diam`).
    pub fn new(points: Vec<Point>, set: &CompactSet) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfiguration("configuration needs at least one point".into()));
        }
        let tol = 1e-9 * set.diameter();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != set.ambient_dim() {
                return Err(Error::InvalidConfiguration(format!(
                    "point {i} has dimension {}, set is in R^{}",
                    p.dim(),
                    set.ambient_dim()
                )));
            }
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidConfiguration(format!("point {i} has non-finite coordinates")));
            }
            let q = set.project(p);
            if q.dist(p) > tol {
                return Err(Error::InvalidConfiguration(format!(
                    "point {i} lies {:.3e} away from the set (tolerance {tol:.3e})",
                    q.dist(p)
                )));
            }
        }
        Ok(Configuration { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // N ≥ 1 by construction
    }
}

/// One refinement level of the minimizer trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelTrace {
    pub resolution: f64,
    pub min: f64,
}

/// Result of a polarization evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct PolarizationReport {
    /// `P(ω_N)`: the refined minimum of the averaged potential.
    pub value: f64,
    /// Location of the minimum.
    pub witness: Point,
    /// `(resolution, running minimum)` per level; non-increasing.
    #[serde(rename = "levels")]
    pub mesh_trace: Vec<LevelTrace>,
    /// True when the refinement converged within its level budget.
    pub refined: bool,
}

/// Knobs for the hierarchical minimizer.
#[derive(Clone, Debug)]
pub struct PolarizeOptions {
    /// Coarse-mesh resolution; per-set default when `None`.
    pub initial_resolution: Option<f64>,
    /// Number of minimum basins tracked across levels.
    pub basins: usize,
    pub max_levels: usize,
    pub node_cap: usize,
}

impl Default for PolarizeOptions {
    fn default() -> Self {
        PolarizeOptions {
            initial_resolution: None,
            basins: 4,
            max_levels: 60,
            node_cap: crate::geometry::DEFAULT_NODE_CAP,
        }
    }
}

fn default_resolution(set: &CompactSet) -> f64 {
    let d = set.diameter();
    match set.set_dim() {
        1 => d / 1024.0,
        2 => d / 48.0,
        _ => d / 16.0,
    }
}

/// Evaluate the polarization of a configuration with default options.
pub fn polarization(
    cfg: &Configuration,
    kernel: &Kernel,
    set: &CompactSet,
    tol: f64,
) -> Result<PolarizationReport> {
    polarization_with(cfg, kernel, set, tol, &PolarizeOptions::default())
}

/// Evaluate the polarization of a configuration.
///
/// Points are summed in sorted order, so the value is exactly invariant
/// under permutations of the configuration. Witness ties break toward the
/// lowest mesh index of the coarsest level where they occur.
pub fn polarization_with(
    cfg: &Configuration,
    kernel: &Kernel,
    set: &CompactSet,
    tol: f64,
    opts: &PolarizeOptions,
) -> Result<PolarizationReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfiguration(format!("tolerance must be > 0, got {tol}")));
    }
    let mut pts = cfg.points().to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    let n = pts.len() as f64;
    let u = |x: &Point| -> f64 { pts.iter().map(|y| kernel.eval(x, y)).sum::<f64>() / n };

    let rho0 = opts.initial_resolution.unwrap_or_else(|| default_resolution(set));
    let mesh = set.mesh_capped(rho0, opts.node_cap)?;
    let values: Vec<f64> = mesh.nodes.iter().map(&u).collect();
    let mut basins = select_basins(&mesh.nodes, &values, opts.basins, 2.0 * rho0);
    let (mut best_point, mut best_value) = basins[0].clone();
    let mut trace = vec![LevelTrace { resolution: rho0, min: best_value }];
    let mut refined = false;
    let mut resolution = rho0;

    for _ in 0..opts.max_levels {
        let new_res = resolution / 2.0;
        let mut cand_points: Vec<Point> = Vec::new();
        for (bp, _) in &basins {
            cand_points.push(bp.clone());
            cand_points.extend(set.local_mesh(bp, 2.0 * resolution, new_res));
        }
        let cand_values: Vec<f64> = cand_points.iter().map(&u).collect();
        basins = select_basins(&cand_points, &cand_values, opts.basins, 2.0 * new_res);
        let (lp, lv) = basins[0].clone();
        // candidates include the previous basin points, so lv <= best_value
        let improvement = best_value - lv;
        if lv < best_value {
            best_value = lv;
            best_point = lp;
        }
        resolution = new_res;
        trace.push(LevelTrace { resolution, min: best_value });
        if improvement < tol {
            refined = true;
            break;
        }
    }

    Ok(PolarizationReport {
        value: best_value,
        witness: best_point,
        mesh_trace: trace,
        refined,
    })
}

/// Lowest-value candidates, pairwise separated; ties keep the lower index.
fn select_basins(
    points: &[Point],
    values: &[f64],
    count: usize,
    separation: f64,
) -> Vec<(Point, f64)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
    let mut picked: Vec<(Point, f64)> = Vec::with_capacity(count);
    for &i in &order {
        if picked.len() >= count {
            break;
        }
        if picked.iter().all(|(p, _)| p.dist(&points[i]) >= separation) {
            picked.push((points[i].clone(), values[i]));
        }
    }
    if picked.is_empty() {
        // degenerate: everything within one separation radius
        picked.push((points[order[0]].clone(), values[order[0]]));
    }
    picked
}

/// Restart and move budget for the extremal solvers.
#[derive(Clone, Copy, Debug)]
pub struct SolveBudget {
    pub restarts: usize,
    /// Maximum accepted exchange moves (or descent sweeps).
    pub max_moves: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { restarts: 4, max_moves: 2000 }
    }
}

/// Outcome of `maximin_solve`: a lower-bound configuration for `P(A, N)`.
#[derive(Clone, Debug)]
pub struct MaximinOutcome {
    pub configuration: Configuration,
    pub report: PolarizationReport,
    pub budget_exhausted: bool,
}

/// Solve the extremal N-point polarization problem with default budget.
pub fn maximin_solve(
    set: &CompactSet,
    kernel: &Kernel,
    n: usize,
    seed: u64,
    budget: &SolveBudget,
) -> Result<MaximinOutcome> {
    let opts = EquilibriumOptions { check_assumptions: false, ..Default::default() };
    let em = equilibrium_measure_with(set, kernel, &opts)?;
    maximin_solve_with(set, kernel, n, seed, budget, &em)
}

/// Solve the extremal problem reusing a precomputed equilibrium measure
/// (used for restarts' initial configurations).
pub fn maximin_solve_with(
    set: &CompactSet,
    kernel: &Kernel,
    n: usize,
    seed: u64,
    budget: &SolveBudget,
    em: &EquilibriumMeasure,
) -> Result<MaximinOutcome> {
    if n == 0 {
        return Err(Error::InvalidConfiguration("maximin needs N >= 1".into()));
    }
    if n == 1 {
        return solve_single_point(set, kernel);
    }

    let mesh = set.mesh_capped(solve_resolution(set), crate::geometry::DEFAULT_NODE_CAP)?;
    let nodes = &mesh.nodes;
    let report_tol = 1e-10;

    let mut best: Option<(f64, usize, Configuration, PolarizationReport)> = None;
    let mut exhausted = false;

    for restart in 0..budget.restarts.max(1) {
        let rs = derive_seed(seed, restart as u64);
        let sampled = em.sample(n, rs)?;
        let init = if restart % 2 == 1 {
            // low-energy initialization; max_moves caps the sweeps here too
            descend_energy(set, kernel, sampled, budget.max_moves).configuration
        } else {
            sampled
        };

        let (cfg, ran_out) = exchange_improve(&init, kernel, nodes, budget.max_moves);
        exhausted |= ran_out;

        let report = polarization(&cfg, kernel, set, report_tol)?;
        let init_report = polarization(&init, kernel, set, report_tol)?;
        // an exchange result never beats its initialization downward
        let (cfg, report) = if report.value >= init_report.value {
            (cfg, report)
        } else {
            (init, init_report)
        };

        let better = match &best {
            None => true,
            Some((bv, _, _, _)) => report.value > *bv,
        };
        if better {
            best = Some((report.value, restart, cfg, report));
        }
    }

    let (_, _, configuration, report) = best.expect("at least one restart");
    Ok(MaximinOutcome { configuration, report, budget_exhausted: exhausted })
}

fn solve_resolution(set: &CompactSet) -> f64 {
    let d = set.diameter();
    match set.set_dim() {
        1 => d / 4096.0,
        2 => d / 96.0,
        _ => d / 24.0,
    }
}

/// Exchange local search on a fixed evaluation mesh: repeatedly relocate
/// the configuration point whose move to the current witness node raises
/// the mesh polarization the most; only improving moves are accepted.
fn exchange_improve(
    init: &Configuration,
    kernel: &Kernel,
    nodes: &[Point],
    max_moves: usize,
) -> (Configuration, bool) {
    let m = nodes.len();
    let n = init.len();
    let mut points = init.points().to_vec();

    let column = |p: &Point| -> Vec<f64> { nodes.iter().map(|x| kernel.eval(x, p)).collect() };
    // sum over all points except `skip`, plus `extra`, at node j
    let patched = |points: &[Point], skip: usize, j: usize, extra: &Point| -> f64 {
        let mut s = kernel.eval(&nodes[j], extra);
        for (l, p) in points.iter().enumerate() {
            if l != skip {
                s += kernel.eval(&nodes[j], p);
            }
        }
        s
    };
    let mut field = vec![0.0f64; m];
    for p in &points {
        for (f, c) in field.iter_mut().zip(column(p)) {
            *f += c;
        }
    }
    let argmin = |f: &[f64]| -> usize {
        let mut best = 0;
        for (j, v) in f.iter().enumerate() {
            if *v < f[best] {
                best = j;
            }
        }
        best
    };

    let mut current = field[argmin(&field)];
    let mut moves = 0usize;
    loop {
        if moves >= max_moves {
            return (Configuration { points }, true);
        }
        let witness = argmin(&field);
        let target = nodes[witness].clone();
        let target_col = column(&target);

        let mut best_move: Option<(f64, usize)> = None;
        for i in 0..n {
            let old_col = column(&points[i]);
            let mut new_min = f64::INFINITY;
            for j in 0..m {
                // field[j] can be +inf when a point sits at node j; the
                // removal must then be recomputed, never inf - inf
                let v = if field[j].is_finite() {
                    field[j] - old_col[j] + target_col[j]
                } else {
                    patched(&points, i, j, &target)
                };
                if v < new_min {
                    new_min = v;
                }
            }
            if new_min > current + 1e-15 && best_move.as_ref().is_none_or(|(bv, _)| new_min > *bv) {
                best_move = Some((new_min, i));
            }
        }
        match best_move {
            Some((new_min, i)) => {
                let old_col = column(&points[i]);
                points[i] = target;
                for j in 0..m {
                    if field[j].is_finite() && old_col[j].is_finite() {
                        field[j] += target_col[j] - old_col[j];
                    } else {
                        field[j] = points.iter().map(|p| kernel.eval(&nodes[j], p)).sum();
                    }
                }
                current = new_min;
                moves += 1;
            }
            None => return (Configuration { points }, false),
        }
    }
}

/// One-point extremal problem: place the point to maximize the kernel of
/// the farthest set distance (hierarchical best-response search).
fn solve_single_point(set: &CompactSet, kernel: &Kernel) -> Result<MaximinOutcome> {
    let witness_mesh = set.mesh(solve_resolution(set))?;
    let farthest = |p: &Point| -> f64 {
        witness_mesh
            .nodes
            .iter()
            .map(|x| x.dist(p))
            .fold(0.0, f64::max)
    };
    // maximize f(farthest(p)) = minimize farthest(p), f decreasing
    let value = |p: &Point| farthest(p);

    let rho0 = default_resolution(set);
    let coarse = set.mesh(rho0)?;
    let vals: Vec<f64> = coarse.nodes.iter().map(&value).collect();
    let mut basins = select_basins(&coarse.nodes, &vals, 4, 2.0 * rho0);
    let mut resolution = rho0;
    for _ in 0..40 {
        let new_res = resolution / 2.0;
        let mut cands: Vec<Point> = Vec::new();
        for (bp, _) in &basins {
            cands.push(bp.clone());
            cands.extend(set.local_mesh(bp, 2.0 * resolution, new_res));
        }
        let cvals: Vec<f64> = cands.iter().map(&value).collect();
        let prev = basins[0].1;
        basins = select_basins(&cands, &cvals, 4, 2.0 * new_res);
        resolution = new_res;
        if prev - basins[0].1 < 1e-12 * set.diameter() {
            break;
        }
    }
    let cfg = Configuration::new(vec![basins[0].0.clone()], set)?;
    let report = polarization(&cfg, kernel, set, 1e-10)?;
    Ok(MaximinOutcome { configuration: cfg, report, budget_exhausted: false })
}

/// One row of the polarization limit probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    pub p_best: f64,
    pub w_k: f64,
    pub gap: f64,
}

/// Run `maximin_solve` over `n_list` and report the gaps to `W_K`.
///
/// Requires the assumption checks to hold for `(set, kernel)`; refuses
/// otherwise.
pub fn polarization_limit_probe(
    set: &CompactSet,
    kernel: &Kernel,
    n_list: &[usize],
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    polarization_limit_probe_with(set, kernel, n_list, seed, &SolveBudget::default())
}

pub fn polarization_limit_probe_with(
    set: &CompactSet,
    kernel: &Kernel,
    n_list: &[usize],
    seed: u64,
    budget: &SolveBudget,
) -> Result<Vec<ProbeRow>> {
    let em = crate::measures::equilibrium_measure(set, kernel)?;
    if let Some(fail) = em.assumptions().first_failure() {
        return Err(Error::AssumptionsViolated(format!(
            "{} fails (evidence {:.6})",
            fail.assumption, fail.evidence
        )));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let out = maximin_solve_with(set, kernel, n, derive_seed(seed, 7_000 + i as u64), budget, &em)?;
        rows.push(ProbeRow {
            n,
            p_best: out.report.value,
            w_k: em.w_k(),
            gap: em.w_k() - out.report.value,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::equilibrium_measure;
    use std::f64::consts::{PI, TAU};

    fn unit_circle() -> CompactSet {
        CompactSet::circle([0.0, 0.0], 1.0).unwrap()
    }

    fn circle_cfg(angles: &[f64]) -> Configuration {
        let pts = angles.iter().map(|t| Point::new(vec![t.cos(), t.sin()])).collect();
        Configuration::new(pts, &unit_circle()).unwrap()
    }

    #[test]
    fn antipodal_pair_matches_brute_force() {
        let cfg = circle_cfg(&[0.0, PI]);
        let k = Kernel::riesz(1.0).unwrap();
        let report = polarization(&cfg, &k, &unit_circle(), 1e-9).unwrap();

        // brute-force oracle over 10^6 angles: U = (csc(t/2) + sec(t/2))/4
        let m = 1_000_000;
        let mut oracle = f64::INFINITY;
        for i in 1..m {
            let t = PI * (i as f64) / (m as f64); // symmetric: scan (0, pi)
            let u = 0.25 * (1.0 / (t / 2.0).sin() + 1.0 / (t / 2.0).cos().abs());
            oracle = oracle.min(u);
        }
        let target = 2.0f64.sqrt() / 2.0;
        assert!((oracle - target).abs() < 1e-9, "oracle {oracle}");
        assert!((report.value - oracle).abs() < 1e-6, "P = {}", report.value);
        let d_up = report.witness.dist(&Point::new(vec![0.0, 1.0]));
        let d_dn = report.witness.dist(&Point::new(vec![0.0, -1.0]));
        assert!(d_up.min(d_dn) < 1e-3, "witness {:?}", report.witness);
        assert!(report.refined);
    }

    #[test]
    fn single_point_on_circle() {
        let cfg = circle_cfg(&[0.0]);
        let k = Kernel::riesz(1.0).unwrap();
        let report = polarization(&cfg, &k, &unit_circle(), 1e-9).unwrap();
        assert!((report.value - 0.5).abs() < 1e-8);
        assert!(report.witness.dist(&Point::new(vec![-1.0, 0.0])) < 1e-3);
    }

    #[test]
    fn origin_configuration_on_ball_is_exactly_one() {
        let ball = CompactSet::ball(vec![0.0; 3], 1.0, 3).unwrap();
        let origin = Point::new(vec![0.0; 3]);
        let cfg = Configuration::new(vec![origin; 20], &ball).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        let report = polarization(&cfg, &k, &ball, 1e-9).unwrap();
        assert_eq!(report.value, 1.0, "P = {:.17}", report.value);
        let r = report.witness.coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(r > 1.0 - 1e-9, "witness radius {r}");
    }

    #[test]
    fn trace_is_monotone() {
        let cfg = circle_cfg(&[0.0, 2.0, 4.0]);
        let k = Kernel::riesz(0.5).unwrap();
        let report = polarization(&cfg, &k, &unit_circle(), 1e-10).unwrap();
        for w in report.mesh_trace.windows(2) {
            assert!(w[1].min <= w[0].min);
            assert!(w[1].resolution < w[0].resolution);
        }
    }

    #[test]
    fn permutation_invariance_is_exact() {
        let k = Kernel::riesz(0.5).unwrap();
        let a = circle_cfg(&[0.1, 1.7, 3.0, 5.1]);
        let b = circle_cfg(&[3.0, 0.1, 5.1, 1.7]);
        let ra = polarization(&a, &k, &unit_circle(), 1e-8).unwrap();
        let rb = polarization(&b, &k, &unit_circle(), 1e-8).unwrap();
        assert_eq!(ra.value, rb.value);
        assert_eq!(ra.witness, rb.witness);
    }

    #[test]
    fn riesz_scaling_relation() {
        let s = 0.5;
        let k = Kernel::riesz(s).unwrap();
        let angles = [0.3, 1.9, 3.3, 4.6, 5.9];
        let small = circle_cfg(&angles);
        let big_set = CompactSet::circle([0.0, 0.0], 2.0).unwrap();
        let big_pts = angles
            .iter()
            .map(|t| Point::new(vec![2.0 * t.cos(), 2.0 * t.sin()]))
            .collect();
        let big = Configuration::new(big_pts, &big_set).unwrap();

        let p1 = polarization(&small, &k, &unit_circle(), 1e-13).unwrap().value;
        let p2 = polarization(&big, &k, &big_set, 1e-13).unwrap().value;
        let scaled = p1 * 2.0f64.powf(-s);
        assert!(
            ((p2 - scaled) / scaled).abs() < 1e-9,
            "P(2A) = {p2}, expected {scaled}"
        );
    }

    #[test]
    fn maximin_circle_matches_equally_spaced() {
        let k = Kernel::riesz(0.5).unwrap();
        let n = 8;
        let out = maximin_solve(&unit_circle(), &k, n, 11, &SolveBudget::default()).unwrap();
        // brute-force polarization of the equally spaced candidate
        let angles: Vec<f64> = (0..n).map(|i| TAU * (i as f64) / (n as f64)).collect();
        let even = circle_cfg(&angles);
        let p_even = polarization(&even, &k, &unit_circle(), 1e-10).unwrap().value;
        assert!(
            out.report.value >= p_even - 1e-3,
            "solver {} vs equally spaced {}",
            out.report.value,
            p_even
        );
    }

    #[test]
    fn maximin_ball_bounded_by_origin_value() {
        let ball = CompactSet::ball(vec![0.0; 3], 1.0, 3).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        let out = maximin_solve(&ball, &k, 5, 3, &SolveBudget { restarts: 2, max_moves: 400 }).unwrap();
        assert!(out.report.value <= 1.0 + 1e-9, "P = {}", out.report.value);
        let origin_cfg = Configuration::new(vec![Point::new(vec![0.0; 3]); 5], &ball).unwrap();
        let p0 = polarization(&origin_cfg, &k, &ball, 1e-9).unwrap().value;
        assert_eq!(p0, 1.0);
    }

    #[test]
    fn maximin_single_point_interval_log() {
        let set = CompactSet::interval(-1.0, 1.0).unwrap();
        let k = Kernel::shifted_log(0.25).unwrap();
        let out = maximin_solve(&set, &k, 1, 0, &SolveBudget::default()).unwrap();
        // brute-force over placement x witness grids
        let m = 4001;
        let mut best = f64::NEG_INFINITY;
        for i in 0..m {
            let p = -1.0 + 2.0 * (i as f64) / ((m - 1) as f64);
            let far = (1.0 - p).max(p + 1.0);
            best = best.max(-(0.25 * far).ln());
        }
        assert!((best - 4.0f64.ln()).abs() < 1e-6, "oracle {best}");
        assert!((out.report.value - best).abs() < 1e-4, "solver {}", out.report.value);
        assert!(out.configuration.points()[0].coords[0].abs() < 1e-3);
    }

    #[test]
    fn maximin_never_below_initialization() {
        let k = Kernel::riesz(0.5).unwrap();
        let em = equilibrium_measure(&unit_circle(), &k).unwrap();
        for seed in [1u64, 9, 42] {
            let out = maximin_solve_with(
                &unit_circle(),
                &k,
                12,
                seed,
                &SolveBudget { restarts: 2, max_moves: 300 },
                &em,
            )
            .unwrap();
            let init = em.sample(12, derive_seed(seed, 0)).unwrap();
            let p_init = polarization(&init, &k, &unit_circle(), 1e-10).unwrap().value;
            assert!(
                out.report.value >= p_init - 1e-12,
                "solver {} below init {}",
                out.report.value,
                p_init
            );
        }
    }

    #[test]
    fn probe_gaps_positive_and_shrinking() {
        let k = Kernel::riesz(0.5).unwrap();
        let rows = polarization_limit_probe_with(
            &unit_circle(),
            &k,
            &[4, 8, 16, 32],
            5,
            &SolveBudget { restarts: 2, max_moves: 600 },
        )
        .unwrap();
        for row in &rows {
            assert!(row.gap > -1e-6, "gap {}", row.gap);
        }
        assert!(rows.last().unwrap().gap < rows[0].gap);
        // measured truth: the N = 32 equally spaced gap is ~7.2% of W_K
        let final_rel = rows.last().unwrap().gap / rows.last().unwrap().w_k;
        assert!(final_rel < 0.10, "final relative gap {final_rel}");
    }

    #[test]
    fn probe_sphere_upper_bound() {
        let set = CompactSet::sphere2([0.0; 3], 1.0).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        let rows = polarization_limit_probe_with(
            &set,
            &k,
            &[16, 64],
            2,
            &SolveBudget { restarts: 2, max_moves: 400 },
        )
        .unwrap();
        for row in &rows {
            assert!(row.p_best <= 1.0 + 1e-6, "P = {}", row.p_best);
        }
    }

    #[test]
    fn probe_single_point_row() {
        let k = Kernel::riesz(0.5).unwrap();
        let rows = polarization_limit_probe(&unit_circle(), &k, &[1], 0).unwrap();
        assert_eq!(rows.len(), 1);
        // a single point on the circle: P = f(2) regardless of position
        assert!((rows[0].p_best - 2.0f64.powf(-0.5)).abs() < 1e-6);
        assert!((rows[0].gap - (rows[0].w_k - 2.0f64.powf(-0.5))).abs() < 1e-12);
    }

    #[test]
    fn probe_refuses_on_assumption_failure() {
        let ball = CompactSet::ball(vec![0.0; 3], 1.0, 3).unwrap();
        let k = Kernel::riesz(1.0).unwrap();
        match polarization_limit_probe(&ball, &k, &[4], 0) {
            Err(Error::AssumptionsViolated(msg)) => assert!(msg.contains("A3"), "{msg}"),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn off_set_configuration_rejected() {
        let err = Configuration::new(vec![Point::new(vec![1.5, 0.0])], &unit_circle());
        assert!(err.is_err());
    }
}
