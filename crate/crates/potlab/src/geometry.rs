//! Compact sets in `R^t` with meshing, projection, and sampling.
//!
//! Every set here has a closed-form description, so projection and
//! diameter are exact (curve unions are the exception: they are handled
//! through fine parametric meshes with a resolution-bounded error).
//! Meshes are covering meshes: `resolution` bounds the distance from any
//! set point to its nearest node.

use crate::numerics::golden_min;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// Default cap on mesh node counts.
pub const DEFAULT_NODE_CAP: usize = 4_000_000;

/// Fibonacci-lattice covering constant: a lattice of `n` points on the
/// unit sphere has covering radius below `FIB_COVER / sqrt(n)` (measured
/// 2.4–2.6 over 200..8000 nodes; 3.0 leaves margin).
const FIB_COVER: f64 = 3.0;

/// A point of `R^t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Total lexicographic order on finite coordinates.
    pub(crate) fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.partial_cmp(b).expect("non-finite coordinate") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// A closed parametric curve in the plane: an axis-aligned ellipse
/// `t ↦ center + (rx cos t, ry sin t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub rx: f64,
    pub ry: f64,
}

impl Ellipse {
    pub fn at(&self, t: f64) -> Point {
        Point::new(vec![
            self.center[0] + self.rx * t.cos(),
            self.center[1] + self.ry * t.sin(),
        ])
    }

    fn max_speed(&self) -> f64 {
        self.rx.max(self.ry)
    }

    /// Parameter of the point nearest to `p`: coarse scan then
    /// golden-section refinement.
    fn nearest_param(&self, p: &Point) -> f64 {
        let m = 1024;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..m {
            let t = TAU * (i as f64) / (m as f64);
            let d = self.at(t).dist(p);
            if d < best.0 {
                best = (d, t);
            }
        }
        let w = TAU / (m as f64);
        golden_min(|t| self.at(t).dist(p), best.1 - w, best.1 + w, 60)
    }
}

/// A compact subset of `R^t`.
#[derive(Clone, Debug, PartialEq)]
pub enum CompactSet {
    Interval { a: f64, b: f64 },
    Circle { center: [f64; 2], radius: f64 },
    Sphere2 { center: [f64; 3], radius: f64 },
    Ball { center: Vec<f64>, radius: f64, dim: usize },
    CurveUnion(CurveUnionSet),
}

/// Validated union of disjoint closed curves, with its meshed diameter.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveUnionSet {
    curves: Vec<Ellipse>,
    diameter: f64,
    diameter_error: f64,
}

impl CurveUnionSet {
    pub fn curves(&self) -> &[Ellipse] {
        &self.curves
    }
}

impl CompactSet {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidSet(format!("interval requires b > a, got [{a}, {b}]")));
        }
        Ok(CompactSet::Interval { a, b })
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("circle radius must be > 0, got {radius}")));
        }
        Ok(CompactSet::Circle { center, radius })
    }

    pub fn sphere2(center: [f64; 3], radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("sphere radius must be > 0, got {radius}")));
        }
        Ok(CompactSet::Sphere2 { center, radius })
    }

    pub fn ball(center: Vec<f64>, radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("ball radius must be > 0, got {radius}")));
        }
        if center.len() != dim {
            return Err(Error::InvalidSet("ball center dimension mismatch".into()));
        }
        if !(dim == 2 || dim == 3) {
            return Err(Error::Unsupported(format!("ball ambient dimension {dim}")));
        }
        Ok(CompactSet::Ball { center, radius, dim })
    }

    /// A union of disjoint closed curves. Disjointness is validated on a
    /// fine parametric mesh: any intersecting pair would put mesh nodes
    /// within twice the validation covering radius of each other.
    pub fn curve_union(curves: Vec<Ellipse>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidSet("curve union needs at least one curve".into()));
        }
        for c in &curves {
            if !(c.rx > 0.0 && c.ry > 0.0 && c.rx.is_finite() && c.ry.is_finite()) {
                return Err(Error::InvalidSet("ellipse radii must be positive".into()));
            }
        }
        let scale = curves.iter().map(|c| c.max_speed()).fold(0.0, f64::max);
        let res = scale / 256.0;
        let meshes: Vec<Vec<Point>> = curves.iter().map(|c| curve_nodes(c, res)).collect();
        for i in 0..curves.len() {
            for j in (i + 1)..curves.len() {
                let mut min_d = f64::INFINITY;
                for p in &meshes[i] {
                    for q in &meshes[j] {
                        min_d = min_d.min(p.dist(q));
                    }
                }
                if min_d <= 2.0 * res {
                    return Err(Error::InvalidSet(format!(
                        "curves {i} and {j} are not clearly disjoint (mesh distance {min_d:.3e})"
                    )));
                }
            }
        }
        let all: Vec<&Point> = meshes.iter().flatten().collect();
        let mut diam = 0.0f64;
        for (i, p) in all.iter().enumerate() {
            for q in &all[i + 1..] {
                diam = diam.max(p.dist(q));
            }
        }
        Ok(CompactSet::CurveUnion(CurveUnionSet {
            curves,
            diameter: diam,
            diameter_error: 2.0 * res,
        }))
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            CompactSet::Interval { .. } => 1,
            CompactSet::Circle { .. } | CompactSet::CurveUnion(_) => 2,
            CompactSet::Sphere2 { .. } => 3,
            CompactSet::Ball { dim, .. } => *dim,
        }
    }

    /// Hausdorff dimension (known for every supported closed form).
    pub fn set_dim(&self) -> usize {
        match self {
            CompactSet::Interval { .. } | CompactSet::Circle { .. } | CompactSet::CurveUnion(_) => 1,
            CompactSet::Sphere2 { .. } => 2,
            CompactSet::Ball { dim, .. } => *dim,
        }
    }

    /// Exact for closed forms; for curve unions the meshed value
    /// (true diameter exceeds it by at most `diameter_error`).
    pub fn diameter(&self) -> f64 {
        match self {
            CompactSet::Interval { a, b } => b - a,
            CompactSet::Circle { radius, .. }
            | CompactSet::Sphere2 { radius, .. }
            | CompactSet::Ball { radius, .. } => 2.0 * radius,
            CompactSet::CurveUnion(cu) => cu.diameter,
        }
    }

    /// Nearest point of the set (total function; exact for closed forms).
    pub fn project(&self, p: &Point) -> Point {
        match self {
            CompactSet::Interval { a, b } => Point::new(vec![p.coords[0].clamp(*a, *b)]),
            CompactSet::Circle { center, radius } => {
                radial_project(&center[..], *radius, p, false)
            }
            CompactSet::Sphere2 { center, radius } => {
                radial_project(&center[..], *radius, p, false)
            }
            CompactSet::Ball { center, radius, .. } => {
                let d = dist_to(center, p);
                if d <= *radius {
                    p.clone()
                } else {
                    radial_project(center, *radius, p, true)
                }
            }
            CompactSet::CurveUnion(cu) => {
                let mut best: Option<(f64, Point)> = None;
                for c in &cu.curves {
                    let q = c.at(c.nearest_param(p));
                    let d = q.dist(p);
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, q));
                    }
                }
                best.unwrap().1
            }
        }
    }

    /// Covering mesh with covering radius at most `resolution`.
    pub fn mesh(&self, resolution: f64) -> Result<Mesh> {
        self.mesh_capped(resolution, DEFAULT_NODE_CAP)
    }

    pub fn mesh_capped(&self, resolution: f64, cap: usize) -> Result<Mesh> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidSet(format!("mesh resolution must be > 0, got {resolution}")));
        }
        let nodes = match self {
            CompactSet::Interval { a, b } => {
                let n = ((b - a) / resolution).ceil() as usize;
                check_cap(n + 1, resolution, cap)?;
                (0..=n)
                    .map(|i| {
                        let t = (i as f64) / (n as f64);
                        Point::new(vec![a + (b - a) * t])
                    })
                    .collect()
            }
            CompactSet::Circle { center, radius } => {
                let n = ((TAU * radius) / resolution).ceil().max(3.0) as usize;
                check_cap(n, resolution, cap)?;
                (0..n)
                    .map(|i| {
                        let t = TAU * (i as f64) / (n as f64);
                        Point::new(vec![
                            center[0] + radius * t.cos(),
                            center[1] + radius * t.sin(),
                        ])
                    })
                    .collect()
            }
            CompactSet::Sphere2 { center, radius } => {
                let n = (FIB_COVER * radius / resolution).powi(2).ceil().max(14.0) as usize;
                check_cap(n + 6, resolution, cap)?;
                sphere_nodes(center, *radius, n)
            }
            CompactSet::Ball { center, radius, dim } => {
                ball_nodes(center, *radius, *dim, resolution, cap)?
            }
            CompactSet::CurveUnion(cu) => {
                let mut nodes = Vec::new();
                for c in &cu.curves {
                    nodes.extend(curve_nodes(c, resolution));
                }
                check_cap(nodes.len(), resolution, cap)?;
                nodes
            }
        };
        Ok(Mesh {
            set: self.clone(),
            nodes,
            resolution,
            cap,
        })
    }

    /// Nodes covering the intersection of the set with the ball
    /// `|x − around| ≤ window`, at roughly the given resolution. Used by
    /// the hierarchical polarization minimizer; always contains `around`
    /// projected onto the set.
    pub(crate) fn local_mesh(&self, around: &Point, window: f64, resolution: f64) -> Vec<Point> {
        let mut nodes = vec![self.project(around)];
        match self {
            CompactSet::Interval { a, b } => {
                let x = around.coords[0];
                let lo = (x - window).max(*a);
                let hi = (x + window).min(*b);
                if hi > lo {
                    let n = ((hi - lo) / resolution).ceil().max(1.0) as usize;
                    for i in 0..=n {
                        nodes.push(Point::new(vec![lo + (hi - lo) * (i as f64) / (n as f64)]));
                    }
                }
            }
            CompactSet::Circle { center, radius } => {
                let t0 = (around.coords[1] - center[1]).atan2(around.coords[0] - center[0]);
                let half_arc = (window / radius).min(PI);
                let step = resolution / radius;
                let n = (2.0 * half_arc / step).ceil().max(2.0) as usize;
                for i in 0..=n {
                    let t = t0 - half_arc + 2.0 * half_arc * (i as f64) / (n as f64);
                    nodes.push(Point::new(vec![
                        center[0] + radius * t.cos(),
                        center[1] + radius * t.sin(),
                    ]));
                }
            }
            CompactSet::Sphere2 { center, radius } => {
                // 3-D box grid, keep points near the sphere, project.
                for g in box_grid(&around.coords, window, resolution * 0.5) {
                    let d = dist_to(center, &g);
                    if (d - radius).abs() <= resolution * 1.8 && d > 0.0 {
                        nodes.push(radial_project(center, *radius, &g, false));
                    }
                }
            }
            CompactSet::Ball { center, radius, .. } => {
                for g in box_grid(&around.coords, window, resolution * 0.5) {
                    let d = dist_to(center, &g);
                    if d <= *radius {
                        nodes.push(g);
                    } else if d - radius <= resolution * 1.8 {
                        nodes.push(radial_project(center, *radius, &g, true));
                    }
                }
                if dist_to(center, around) <= window {
                    nodes.push(Point::new(center.clone()));
                }
            }
            CompactSet::CurveUnion(cu) => {
                for c in &cu.curves {
                    let t0 = c.nearest_param(around);
                    if c.at(t0).dist(around) > window + resolution {
                        continue;
                    }
                    let min_speed = c.rx.min(c.ry);
                    let half = (window / min_speed).min(PI);
                    let step = resolution / c.max_speed();
                    let n = (2.0 * half / step).ceil().max(2.0) as usize;
                    for i in 0..=n {
                        let t = t0 - half + 2.0 * half * (i as f64) / (n as f64);
                        nodes.push(c.at(t));
                    }
                }
            }
        }
        nodes
    }

    /// Pseudo-uniform random points of the set (used by covering tests
    /// and as generic initializers; not an equilibrium sampler).
    pub fn random_points<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        (0..n)
            .map(|_| match self {
                CompactSet::Interval { a, b } => {
                    Point::new(vec![a + (b - a) * rng.random::<f64>()])
                }
                CompactSet::Circle { center, radius } => {
                    let t = TAU * rng.random::<f64>();
                    Point::new(vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()])
                }
                CompactSet::Sphere2 { center, radius } => {
                    let v = random_unit3(rng);
                    Point::new(vec![
                        center[0] + radius * v[0],
                        center[1] + radius * v[1],
                        center[2] + radius * v[2],
                    ])
                }
                CompactSet::Ball { center, radius, dim } => {
                    let r = *radius * rng.random::<f64>().powf(1.0 / (*dim as f64));
                    if *dim == 2 {
                        let t = TAU * rng.random::<f64>();
                        Point::new(vec![center[0] + r * t.cos(), center[1] + r * t.sin()])
                    } else {
                        let v = random_unit3(rng);
                        Point::new(vec![
                            center[0] + r * v[0],
                            center[1] + r * v[1],
                            center[2] + r * v[2],
                        ])
                    }
                }
                CompactSet::CurveUnion(cu) => {
                    let i = rng.random_range(0..cu.curves.len());
                    cu.curves[i].at(TAU * rng.random::<f64>())
                }
            })
            .collect()
    }
}

/// A covering mesh of a compact set.
#[derive(Clone, Debug)]
pub struct Mesh {
    set: CompactSet,
    pub nodes: Vec<Point>,
    pub resolution: f64,
    cap: usize,
}

impl Mesh {
    /// Remesh the parent set at half the resolution.
    pub fn refine(&self) -> Result<Mesh> {
        self.set.mesh_capped(self.resolution / 2.0, self.cap)
    }

    pub fn set(&self) -> &CompactSet {
        &self.set
    }

    /// CSV export with header `x0,x1,...,x{t-1}`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let t = self.set.ambient_dim();
        let header: Vec<String> = (0..t).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in &self.nodes {
            let row: Vec<String> = p.coords.iter().map(|c| format!("{c}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_cap(n: usize, resolution: f64, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::MeshCapacity { resolution, cap })
    } else {
        Ok(())
    }
}

fn dist_to(center: &[f64], p: &Point) -> f64 {
    center
        .iter()
        .zip(&p.coords)
        .map(|(c, x)| (x - c) * (x - c))
        .sum::<f64>()
        .sqrt()
}

/// Radial projection of `p` onto the sphere `|x − center| = radius`.
/// With `clamp_inside`, the result is nudged so its computed distance to
/// the center never exceeds `radius` (keeps ball meshes inside the ball).
fn radial_project(center: &[f64], radius: f64, p: &Point, clamp_inside: bool) -> Point {
    let d = dist_to(center, p);
    if d == 0.0 {
        // arbitrary but deterministic direction
        let mut coords = center.to_vec();
        coords[0] += radius;
        return Point::new(coords);
    }
    let mut coords: Vec<f64> = center
        .iter()
        .zip(&p.coords)
        .map(|(c, x)| c + (x - c) * (radius / d))
        .collect();
    if clamp_inside {
        let q = Point::new(coords.clone());
        if dist_to(center, &q) > radius {
            let shrink = 1.0 - 4.0 * f64::EPSILON;
            for (c, x) in center.iter().zip(coords.iter_mut()) {
                *x = c + (*x - c) * shrink;
            }
        }
    }
    Point::new(coords)
}

fn random_unit3<R: Rng>(rng: &mut R) -> [f64; 3] {
    use rand_distr::StandardNormal;
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Fibonacci lattice of `n` points on the sphere `|x − center| = radius`.
pub(crate) fn fibonacci_lattice(center: &[f64; 3], radius: f64, n: usize) -> Vec<Point> {
    let golden_angle = PI * (3.0 - 5.0f64.sqrt());
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - (2.0 * (i as f64) + 1.0) / (n as f64);
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * (i as f64);
        let u = [rho * phi.cos(), rho * phi.sin(), z];
        nodes.push(Point::new(vec![
            center[0] + radius * u[0],
            center[1] + radius * u[1],
            center[2] + radius * u[2],
        ]));
    }
    nodes
}

/// Fibonacci lattice plus the six axis points (whose distance to the
/// center is exact in floating point).
fn sphere_nodes(center: &[f64; 3], radius: f64, n: usize) -> Vec<Point> {
    let mut nodes = fibonacci_lattice(center, radius, n);
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut c = center.to_vec();
            c[axis] += sign * radius;
            nodes.push(Point::new(c));
        }
    }
    nodes
}

/// Circle lattice of `n ≥ 3` points, plus the four axis points.
fn circle_nodes_exact(center: &[f64], radius: f64, n: usize) -> Vec<Point> {
    let mut nodes = Vec::with_capacity(n + 4);
    for i in 0..n {
        let t = TAU * (i as f64) / (n as f64);
        nodes.push(Point::new(vec![
            center[0] + radius * t.cos(),
            center[1] + radius * t.sin(),
        ]));
    }
    for axis in 0..2 {
        for sign in [-1.0, 1.0] {
            let mut c = center.to_vec();
            c[axis] += sign * radius;
            nodes.push(Point::new(c));
        }
    }
    nodes
}

/// Concentric shells plus the center. The outermost shell sits exactly on
/// the boundary; boundary nodes are clamped to computed distance ≤ radius.
fn ball_nodes(center: &[f64], radius: f64, dim: usize, resolution: f64, cap: usize) -> Result<Vec<Point>> {
    let shell_res = resolution / std::f64::consts::SQRT_2;
    let n_shells = (radius / shell_res).ceil().max(1.0) as usize;
    let mut nodes = vec![Point::new(center.to_vec())];
    for k in 1..=n_shells {
        let r = radius * (k as f64) / (n_shells as f64);
        let raw: Vec<Point> = if dim == 3 {
            let c3 = [center[0], center[1], center[2]];
            let n = (FIB_COVER * r / shell_res).powi(2).ceil().max(6.0) as usize;
            sphere_nodes(&c3, r, n)
        } else {
            let n = ((TAU * r) / shell_res).ceil().max(3.0) as usize;
            circle_nodes_exact(center, r, n)
        };
        for p in raw {
            nodes.push(clamp_into_ball(center, radius, p));
        }
        check_cap(nodes.len(), resolution, cap)?;
    }
    Ok(nodes)
}

fn clamp_into_ball(center: &[f64], radius: f64, mut p: Point) -> Point {
    for _ in 0..4 {
        if dist_to(center, &p) <= radius {
            return p;
        }
        let shrink = 1.0 - 4.0 * f64::EPSILON;
        for (c, x) in center.iter().zip(p.coords.iter_mut()) {
            *x = c + (*x - c) * shrink;
        }
    }
    p
}

fn curve_nodes(c: &Ellipse, resolution: f64) -> Vec<Point> {
    let n = ((TAU * c.max_speed()) / resolution).ceil().max(8.0) as usize;
    (0..n).map(|i| c.at(TAU * (i as f64) / (n as f64))).collect()
}

/// Axis-aligned grid over the box `around ± window` with the given step.
fn box_grid(around: &[f64], window: f64, step: f64) -> Vec<Point> {
    let per_axis = ((2.0 * window / step).ceil() as usize).clamp(1, 40);
    let dim = around.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|d| around[d] - window + 2.0 * window * (idx[d] as f64) / (per_axis as f64))
            .collect();
        out.push(Point::new(p));
        // odometer
        let mut d = 0;
        loop {
            if d == dim {
                return out;
            }
            idx[d] += 1;
            if idx[d] <= per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
