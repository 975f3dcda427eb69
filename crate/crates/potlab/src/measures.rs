//! Probability measures on compact sets: quadrature measures, counting
//! measures, equilibrium measures with their constant `W_K`, sampling,
//! and a bounded-Lipschitz surrogate for weak-star convergence.
//!
//! Equilibrium measures come in two flavors. Closed forms (uniform arc
//! measure on a circle, normalized surface measure on the 2-sphere,
//! arcsine measure on an interval) carry an accurate potential evaluated
//! through a one-dimensional integral reduction. Every other set/kernel
//! pair is solved numerically: minimize `wᵀKw` over the probability
//! simplex on a covering mesh, with the kernel diagonal truncated at the
//! local mesh spacing.

use crate::geometry::{fibonacci_lattice, CompactSet, Point};
use crate::kernels::{Kernel, PairKernel};
use crate::numerics::{derive_seed, project_simplex, tanh_sinh};
use crate::polarization::Configuration;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// How a quadrature measure was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Numerical,
    Counting,
}

/// Nodes and non-negative weights summing to one.
#[derive(Clone, Debug)]
pub struct QuadratureMeasure {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    provenance: Provenance,
}

impl QuadratureMeasure {
    pub fn new(nodes: Vec<Point>, weights: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidMeasure(
                "need equally many nodes and weights, at least one".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure("weights must be finite and >= 0".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {sum}, not 1")));
        }
        if provenance == Provenance::Counting {
            let n = nodes.len() as f64;
            if weights.iter().any(|&w| (w - 1.0 / n).abs() > 1e-15) {
                return Err(Error::InvalidMeasure("counting weights must all equal 1/N".into()));
            }
        }
        Ok(QuadratureMeasure { nodes, weights, provenance })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Discrete potential `U^μ(x) = Σ_i w_i K(x, n_i)`; `+∞` when `x`
    /// coincides with a positively weighted node of a singular kernel.
    pub fn potential<K: PairKernel>(&self, k: &K, x: &Point) -> f64 {
        let mut acc = 0.0;
        for (n, &w) in self.nodes.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            acc += w * k.eval(x, n);
        }
        acc
    }

    /// Quadrature energy `ΣΣ w_i w_j K(n_i, n_j)`, diagonal included.
    ///
    /// For counting measures the diagonal atoms carry `K(x,x) = +∞`, so
    /// the value is `+∞` (use `discrete_energy` for the point energy).
    /// For continuous-provenance measures the diagonal is the cell
    /// self-interaction, truncated at the local spacing: `w_i² f(δ_i)`
    /// with `δ_i` the nearest-node distance.
    pub fn energy(&self, k: &Kernel) -> f64 {
        let n = self.nodes.len();
        let mut off = 0.0;
        for i in 0..n {
            if self.weights[i] == 0.0 {
                continue;
            }
            for j in (i + 1)..n {
                if self.weights[j] == 0.0 {
                    continue;
                }
                off += 2.0 * self.weights[i] * self.weights[j] * k.eval(&self.nodes[i], &self.nodes[j]);
            }
        }
        let diag = match self.provenance {
            Provenance::Counting => f64::INFINITY,
            _ => {
                let nn = self.nearest_spacings();
                self.weights
                    .iter()
                    .zip(&nn)
                    .map(|(&w, &d)| if w == 0.0 { 0.0 } else { w * w * k.radial(d) })
                    .sum()
            }
        };
        off + diag
    }

    /// Nearest-neighbor distance of every node.
    pub fn nearest_spacings(&self) -> Vec<f64> {
        let n = self.nodes.len();
        if n == 1 {
            return vec![f64::INFINITY];
        }
        let mut nn = vec![f64::INFINITY; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.nodes[i].dist(&self.nodes[j]);
                if d < nn[i] {
                    nn[i] = d;
                }
                if d < nn[j] {
                    nn[j] = d;
                }
            }
        }
        nn
    }

    /// Largest nearest-neighbor spacing: the measure's resolution scale.
    pub fn resolution_estimate(&self) -> f64 {
        self.nearest_spacings().into_iter().fold(0.0, f64::max)
    }

    /// CSV export with header `x0,...,x{t-1},weight`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let t = self.nodes[0].dim();
        let mut header: Vec<String> = (0..t).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        writeln!(w, "{}", header.join(","))?;
        for (p, wt) in self.nodes.iter().zip(&self.weights) {
            let mut row: Vec<String> = p.coords.iter().map(|c| format!("{c}")).collect();
            row.push(format!("{wt}"));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Counting measure `ν_N` of a configuration: weight `1/N` on every
/// point, multiplicities preserved.
pub fn counting_measure(cfg: &Configuration) -> QuadratureMeasure {
    let n = cfg.len() as f64;
    QuadratureMeasure::new(
        cfg.points().to_vec(),
        vec![1.0 / n; cfg.len()],
        Provenance::Counting,
    )
    .expect("counting measure of a valid configuration")
}

/// Estimated bounded-Lipschitz distance between two measures.
///
/// Takes the supremum of `|∫g dμ − ∫g dν|` over a seeded dictionary of
/// 1-Lipschitz probe functions `g_a(x) = min(|x − a|, diam)`, anchors
/// drawn uniformly from the bounding box of both supports. A lower bound
/// of the true distance; metrizes weak convergence as probes grow.
pub fn bl_distance(mu: &QuadratureMeasure, nu: &QuadratureMeasure, probes: usize, seed: u64) -> f64 {
    assert!(probes > 0, "need at least one probe");
    let dim = mu.nodes[0].dim();
    assert_eq!(dim, nu.nodes[0].dim(), "measures live in different ambient spaces");
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in mu.nodes.iter().chain(nu.nodes.iter()) {
        for d in 0..dim {
            lo[d] = lo[d].min(p.coords[d]);
            hi[d] = hi[d].max(p.coords[d]);
        }
    }
    let diam: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..probes {
        let anchor = Point::new(
            (0..dim)
                .map(|d| lo[d] + (hi[d] - lo[d]) * rng.random::<f64>())
                .collect(),
        );
        let g = |m: &QuadratureMeasure| -> f64 {
            m.nodes
                .iter()
                .zip(&m.weights)
                .map(|(p, &w)| w * p.dist(&anchor).min(diam))
                .sum()
        };
        best = best.max((g(mu) - g(nu)).abs());
    }
    best
}

/// `∫ |U^{ν_ω}(x) − p| dμ(x)` by quadrature, with the kernel truncated at
/// the quadrature's resolution so that configuration points falling on
/// quadrature nodes do not blow up the integrand.
pub fn flatness_l1(mu: &QuadratureMeasure, k: &Kernel, cfg: &Configuration, p: f64) -> f64 {
    let delta = mu.resolution_estimate();
    let kd = k.minorant(delta).expect("positive resolution");
    let n = cfg.len() as f64;
    mu.nodes
        .iter()
        .zip(&mu.weights)
        .map(|(x, &w)| {
            if w == 0.0 {
                return 0.0;
            }
            let u: f64 = cfg.points().iter().map(|y| kd.eval(x, y)).sum::<f64>() / n;
            w * (u - p).abs()
        })
        .sum()
}

/// Status of one of the four structural assumptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssumptionStatus {
    Pass,
    Fail,
    Unverified,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionEntry {
    pub assumption: String,
    pub status: AssumptionStatus,
    pub evidence: f64,
}

/// Per-assumption verdicts with numeric evidence:
///
/// * A1 (finite energy): quadrature energy; fails when the kernel
///   exponent reaches the set dimension.
/// * A2 (uniqueness): from theory for closed forms, else unverified.
/// * A3 (full support): fraction of validation-mesh points within one
///   resolution of a positively weighted node; must be 1.
/// * A4 (constant potential): max relative deviation of the equilibrium
///   potential from `W_K` over the validation mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn status(&self, name: &str) -> Option<AssumptionStatus> {
        self.entries.iter().find(|e| e.assumption == name).map(|e| e.status)
    }

    pub fn evidence(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.assumption == name).map(|e| e.evidence)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status == AssumptionStatus::Pass)
    }

    pub fn any_fail(&self) -> bool {
        self.entries.iter().any(|e| e.status == AssumptionStatus::Fail)
    }

    pub fn first_failure(&self) -> Option<&AssumptionEntry> {
        self.entries.iter().find(|e| e.status == AssumptionStatus::Fail)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum EquilibriumForm {
    CircleUniform,
    SphereUniform,
    IntervalArcsine,
    Numerical,
}

/// Knobs for `equilibrium_measure_with`.
#[derive(Clone, Debug)]
pub struct EquilibriumOptions {
    /// Node count for closed-form quadratures.
    pub quadrature_nodes: usize,
    /// Target mesh size for the numerical simplex solver.
    pub numerical_nodes: usize,
    /// Relative tolerance for the A4 constancy check.
    pub a4_rel_tol: f64,
    /// Validation mesh is this much finer than the quadrature.
    pub validation_factor: f64,
    pub qp_max_iters: usize,
    /// Relative objective decrease below which the solver is converged.
    pub qp_tol: f64,
    /// Skip the assumption checks (internal initializers only); the
    /// report then marks everything unverified.
    pub check_assumptions: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            quadrature_nodes: 4096,
            numerical_nodes: 1100,
            a4_rel_tol: 1e-3,
            validation_factor: 4.0,
            qp_max_iters: 60_000,
            qp_tol: 1e-13,
            check_assumptions: true,
        }
    }
}

/// An equilibrium measure: quadrature nodes/weights, the constant `W_K`,
/// and the assumption report gathered at construction.
#[derive(Clone, Debug)]
pub struct EquilibriumMeasure {
    base: QuadratureMeasure,
    w_k: f64,
    assumptions: AssumptionReport,
    set: CompactSet,
    kernel: Kernel,
    form: EquilibriumForm,
    resolution: f64,
}

impl EquilibriumMeasure {
    pub fn base(&self) -> &QuadratureMeasure {
        &self.base
    }

    pub fn w_k(&self) -> f64 {
        self.w_k
    }

    pub fn assumptions(&self) -> &AssumptionReport {
        &self.assumptions
    }

    pub fn set(&self) -> &CompactSet {
        &self.set
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn is_closed_form(&self) -> bool {
        self.form != EquilibriumForm::Numerical
    }

    /// Equilibrium potential `U^{μ_eq}(x)` for `x` on the set.
    ///
    /// Closed forms evaluate the exact one-dimensional reduction (for the
    /// rotation-symmetric measures this is a constant); the numerical
    /// branch evaluates the quadrature potential with the kernel
    /// truncated at the mesh resolution.
    pub fn equilibrium_potential(&self, x: &Point) -> f64 {
        match self.form {
            EquilibriumForm::CircleUniform | EquilibriumForm::SphereUniform => self.w_k,
            EquilibriumForm::IntervalArcsine => {
                let CompactSet::Interval { a, b } = self.set else { unreachable!() };
                arcsine_potential(&self.kernel, a, b, x.coords[0])
            }
            EquilibriumForm::Numerical => {
                let kd = self.kernel.minorant(self.resolution).expect("positive resolution");
                self.base.potential(&kd, x)
            }
        }
    }

    /// Draw `n` i.i.d. points with distribution `μ_eq`; deterministic in
    /// the seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Configuration> {
        if n == 0 {
            return Err(Error::InvalidConfiguration("cannot sample 0 points".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Point> = (0..n)
            .map(|_| match self.form {
                EquilibriumForm::CircleUniform => {
                    let CompactSet::Circle { center, radius } = self.set else { unreachable!() };
                    let t = TAU * rng.random::<f64>();
                    Point::new(vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()])
                }
                EquilibriumForm::SphereUniform => {
                    let CompactSet::Sphere2 { center, radius } = self.set else { unreachable!() };
                    use rand_distr::StandardNormal;
                    loop {
                        let v: [f64; 3] = [
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                        ];
                        let nm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                        if nm > 1e-12 {
                            break Point::new(vec![
                                center[0] + radius * v[0] / nm,
                                center[1] + radius * v[1] / nm,
                                center[2] + radius * v[2] / nm,
                            ]);
                        }
                    }
                }
                EquilibriumForm::IntervalArcsine => {
                    let CompactSet::Interval { a, b } = self.set else { unreachable!() };
                    let u: f64 = rng.random();
                    let x = (PI * u).cos();
                    Point::new(vec![0.5 * (a + b) + 0.5 * (b - a) * x])
                }
                EquilibriumForm::Numerical => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut chosen = self.base.nodes.len() - 1;
                    for (i, &w) in self.base.weights.iter().enumerate() {
                        acc += w;
                        if u < acc {
                            chosen = i;
                            break;
                        }
                    }
                    self.base.nodes[chosen].clone()
                }
            })
            .collect();
        Configuration::new(points, &self.set)
    }
}

/// Compute the equilibrium measure of `(set, kernel)` with defaults.
pub fn equilibrium_measure(set: &CompactSet, kernel: &Kernel) -> Result<EquilibriumMeasure> {
    equilibrium_measure_with(set, kernel, &EquilibriumOptions::default())
}

/// Compute the equilibrium measure of `(set, kernel)`.
///
/// Closed-form branches: circle with Riesz `s ∈ (0,1)` or shifted log
/// (uniform arc measure), 2-sphere with Riesz `s ∈ (0,2)` (normalized
/// surface measure), interval with shifted log (arcsine measure). All
/// other combinations are solved numerically on a covering mesh.
pub fn equilibrium_measure_with(
    set: &CompactSet,
    kernel: &Kernel,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumMeasure> {
    kernel.check_positive_on(set)?;
    let form = match (set, kernel) {
        (CompactSet::Circle { .. }, Kernel::Riesz { s }) if *s < 1.0 => EquilibriumForm::CircleUniform,
        (CompactSet::Circle { .. }, Kernel::ShiftedLog { .. }) => EquilibriumForm::CircleUniform,
        (CompactSet::Sphere2 { .. }, Kernel::Riesz { s }) if *s < 2.0 => EquilibriumForm::SphereUniform,
        (CompactSet::Interval { .. }, Kernel::ShiftedLog { .. }) => EquilibriumForm::IntervalArcsine,
        _ => EquilibriumForm::Numerical,
    };

    let (base, w_k) = match form {
        EquilibriumForm::CircleUniform => {
            let CompactSet::Circle { center, radius } = set else { unreachable!() };
            let n = opts.quadrature_nodes.max(8);
            let nodes: Vec<Point> = (0..n)
                .map(|i| {
                    let t = TAU * (i as f64) / (n as f64);
                    Point::new(vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()])
                })
                .collect();
            let base = QuadratureMeasure::new(nodes, vec![1.0 / n as f64; n], Provenance::ClosedForm)?;
            (base, circle_constant(kernel, *radius))
        }
        EquilibriumForm::SphereUniform => {
            let CompactSet::Sphere2 { center, radius } = set else { unreachable!() };
            let n = opts.quadrature_nodes.max(16);
            let nodes = fibonacci_lattice(center, *radius, n);
            let base = QuadratureMeasure::new(nodes, vec![1.0 / n as f64; n], Provenance::ClosedForm)?;
            (base, sphere_constant(kernel, *radius))
        }
        EquilibriumForm::IntervalArcsine => {
            let CompactSet::Interval { a, b } = set else { unreachable!() };
            let n = opts.quadrature_nodes.max(8);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let nodes: Vec<Point> = (1..=n)
                .map(|k| {
                    let t = ((2 * k - 1) as f64) * PI / (2.0 * n as f64);
                    Point::new(vec![mid + half * t.cos()])
                })
                .collect();
            let base = QuadratureMeasure::new(nodes, vec![1.0 / n as f64; n], Provenance::ClosedForm)?;
            let w_k = arcsine_potential(kernel, *a, *b, mid);
            (base, w_k)
        }
        EquilibriumForm::Numerical => solve_numerical(set, kernel, opts)?,
    };

    let resolution = base.resolution_estimate();
    let mut em = EquilibriumMeasure {
        base,
        w_k,
        assumptions: AssumptionReport { entries: vec![] },
        set: set.clone(),
        kernel: *kernel,
        form,
        resolution,
    };
    em.assumptions = if opts.check_assumptions {
        check_assumptions(&em, opts)
    } else {
        AssumptionReport {
            entries: ["A1", "A2", "A3", "A4"]
                .iter()
                .map(|name| AssumptionEntry {
                    assumption: (*name).into(),
                    status: AssumptionStatus::Unverified,
                    evidence: 0.0,
                })
                .collect(),
        }
    };
    Ok(em)
}

/// Re-run the assumption checks of an equilibrium measure.
pub fn assumption_check(em: &EquilibriumMeasure) -> AssumptionReport {
    check_assumptions(em, &EquilibriumOptions::default())
}

/// `W_K` of the uniform measure on a circle of radius `r`:
/// `(1/π) ∫_0^π f(2r sin u) du`.
fn circle_constant(kernel: &Kernel, r: f64) -> f64 {
    tanh_sinh(
        |_, ga, gb| {
            let su = if ga < gb { ga.sin() } else { gb.sin() };
            kernel.radial(2.0 * r * su)
        },
        0.0,
        PI,
        1e-12,
    ) / PI
}

/// `W_K` of the normalized surface measure on a sphere of radius `r`:
/// `∫_0^π f(2r sin(θ/2)) sin(θ)/2 dθ`.
fn sphere_constant(kernel: &Kernel, r: f64) -> f64 {
    tanh_sinh(
        |_, ga, gb| {
            let (sh, ch) = if ga < gb {
                ((0.5 * ga).sin(), (0.5 * ga).cos())
            } else {
                ((0.5 * gb).cos(), (0.5 * gb).sin())
            };
            kernel.radial(2.0 * r * sh) * sh * ch
        },
        0.0,
        PI,
        1e-12,
    )
}

/// Arcsine potential `(1/π)∫_a^b f(|x−y|)/sqrt((y−a)(b−y)) dy` at `x`.
fn arcsine_potential(kernel: &Kernel, a: f64, b: f64, x: f64) -> f64 {
    let piece = |lo: f64, hi: f64, x_at_hi: bool| -> f64 {
        if hi - lo <= 0.0 {
            return 0.0;
        }
        tanh_sinh(
            |y, ga, gb| {
                // distance to the singularity end of this piece
                let r = if x_at_hi { gb } else { ga };
                let da = if lo == a { ga } else { y - a };
                let db = if hi == b { gb } else { b - y };
                kernel.radial(r) / (da * db).sqrt()
            },
            lo,
            hi,
            1e-12,
        )
    };
    (piece(a, x, true) + piece(x, b, false)) / PI
}

/// Simplex-constrained quadratic program for the numerical branch:
/// minimize `wᵀKw` by projected gradient with a safeguarded
/// Barzilai-Borwein step. Returns the measure and its energy.
fn solve_numerical(
    set: &CompactSet,
    kernel: &Kernel,
    opts: &EquilibriumOptions,
) -> Result<(QuadratureMeasure, f64)> {
    // choose a mesh resolution that lands near the node target
    let mut res = set.diameter() / 8.0;
    let mut mesh = set.mesh(res)?;
    for _ in 0..24 {
        let m = mesh.nodes.len();
        if m > opts.numerical_nodes * 8 / 5 {
            res *= 1.3;
        } else if m < opts.numerical_nodes * 3 / 5 {
            res *= 0.78;
        } else {
            break;
        }
        mesh = set.mesh(res)?;
    }
    let nodes = mesh.nodes;
    let m = nodes.len();

    // kernel matrix with the diagonal truncated at local spacing
    let mut nn = vec![f64::INFINITY; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = nodes[i].dist(&nodes[j]);
            if d < nn[i] {
                nn[i] = d;
            }
            if d < nn[j] {
                nn[j] = d;
            }
        }
    }
    let mut kmat = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            kmat[i * m + j] = if i == j {
                kernel.radial(nn[i])
            } else {
                kernel.eval(&nodes[i], &nodes[j])
            };
        }
    }
    let matvec = |w: &[f64], out: &mut [f64]| {
        for i in 0..m {
            let row = &kmat[i * m..(i + 1) * m];
            out[i] = row.iter().zip(w).map(|(k, x)| k * x).sum();
        }
    };

    let mut w = vec![1.0 / m as f64; m];
    let mut kw = vec![0.0; m];
    matvec(&w, &mut kw);
    let mut obj: f64 = w.iter().zip(&kw).map(|(a, b)| a * b).sum();
    let lip = (0..m)
        .map(|i| kmat[i * m..(i + 1) * m].iter().map(|k| k.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * 2.0;
    let mut alpha = 1.0 / lip;
    let mut prev_w: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut stall = 0usize;
    let mut converged = false;

    for _ in 0..opts.qp_max_iters {
        let mut cand: Vec<f64> = w.iter().zip(&kw).map(|(wi, g)| wi - alpha * 2.0 * g).collect();
        project_simplex(&mut cand);
        let mut kc = vec![0.0; m];
        matvec(&cand, &mut kc);
        let cand_obj: f64 = cand.iter().zip(&kc).map(|(a, b)| a * b).sum();
        if cand_obj <= obj {
            let rel_drop = (obj - cand_obj) / obj.abs().max(1e-300);
            let moved: f64 = cand.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
            // Barzilai-Borwein step from the accepted pair
            if let Some((pw, pg)) = &prev_w {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for i in 0..m {
                    let si = cand[i] - pw[i];
                    let yi = 2.0 * (kc[i] - pg[i]);
                    ss += si * si;
                    sy += si * yi;
                }
                if sy > 0.0 {
                    alpha = (ss / sy).clamp(1e-3 / lip, 1e4 / lip);
                }
            }
            prev_w = Some((w.clone(), kw.clone()));
            w = cand;
            kw = kc;
            obj = cand_obj;
            if rel_drop < opts.qp_tol && moved < 1e-12 {
                stall += 1;
                if stall >= 8 {
                    converged = true;
                    break;
                }
            } else {
                stall = 0;
            }
        } else {
            alpha *= 0.5;
            if alpha < 1e-18 / lip {
                converged = true; // step underflow: stationary
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "simplex QP did not converge in {} iterations ({} nodes)",
            opts.qp_max_iters, m
        )));
    }
    let base = QuadratureMeasure::new(nodes, normalize(w), Provenance::Numerical)?;
    Ok((base, obj))
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

fn check_assumptions(em: &EquilibriumMeasure, opts: &EquilibriumOptions) -> AssumptionReport {
    let mut entries = Vec::with_capacity(4);

    // A1: finite energy. The truncated quadrature energy is the evidence;
    // a Riesz exponent at or above the set dimension diverges.
    let quad_energy = em.base.energy(&em.kernel);
    let a1_ok = match em.kernel {
        Kernel::Riesz { s } => s < em.set.set_dim() as f64,
        Kernel::ShiftedLog { .. } => true,
    };
    entries.push(AssumptionEntry {
        assumption: "A1".into(),
        status: if a1_ok { AssumptionStatus::Pass } else { AssumptionStatus::Fail },
        evidence: quad_energy,
    });

    // A2: uniqueness of the equilibrium measure.
    entries.push(AssumptionEntry {
        assumption: "A2".into(),
        status: if em.is_closed_form() { AssumptionStatus::Pass } else { AssumptionStatus::Unverified },
        evidence: 0.0,
    });

    // validation mesh, finer than the quadrature scale
    let val_res = em.resolution / opts.validation_factor;
    let validation = em
        .set
        .mesh(val_res)
        .or_else(|_| em.set.mesh(em.resolution))
        .map(|m| m.nodes)
        .unwrap_or_else(|_| em.base.nodes.clone());

    // A3: support covers the whole set.
    let charged: Vec<&Point> = em
        .base
        .nodes
        .iter()
        .zip(em.base.weights())
        .filter(|(_, &w)| w > 1e-12)
        .map(|(p, _)| p)
        .collect();
    let covered = validation
        .iter()
        .filter(|v| charged.iter().any(|c| c.dist(v) <= em.resolution))
        .count();
    let fraction = covered as f64 / validation.len() as f64;
    entries.push(AssumptionEntry {
        assumption: "A3".into(),
        status: if fraction >= 1.0 { AssumptionStatus::Pass } else { AssumptionStatus::Fail },
        evidence: fraction,
    });

    // A4: potential constancy over the validation mesh.
    let scale = em.w_k.abs().max(f64::MIN_POSITIVE);
    let mut max_dev = 0.0f64;
    for v in &validation {
        let u = em.equilibrium_potential(v);
        let dev = (u - em.w_k).abs() / scale;
        if dev > max_dev {
            max_dev = dev;
        }
    }
    let a4_pass = max_dev <= opts.a4_rel_tol && em.w_k > 0.0;
    entries.push(AssumptionEntry {
        assumption: "A4".into(),
        status: if a4_pass { AssumptionStatus::Pass } else { AssumptionStatus::Fail },
        evidence: max_dev,
    });

    AssumptionReport { entries }
}

/// Total mass the measure puts strictly inside a ball set, more than
/// `margin` away from the boundary sphere. Diagnostic for the solid-ball
/// experiment, where the equilibrium charge should live on the boundary.
pub fn interior_mass(em: &EquilibriumMeasure, margin: f64) -> f64 {
    match em.set() {
        CompactSet::Ball { center, radius, .. } => em
            .base
            .nodes
            .iter()
            .zip(em.base.weights())
            .filter(|(p, _)| {
                let d: f64 = center
                    .iter()
                    .zip(&p.coords)
                    .map(|(c, x)| (x - c) * (x - c))
                    .sum::<f64>()
                    .sqrt();
                d < radius - margin
            })
            .map(|(_, &w)| w)
            .sum(),
        _ => 0.0,
    }
}

/// Derive a fresh sampling seed for the `i`-th draw of an experiment.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    derive_seed(seed, stream)
}
