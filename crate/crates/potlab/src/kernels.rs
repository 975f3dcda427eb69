//! Lower-semicontinuous radial kernels `K(x, y) = f(|x − y|)`.
//!
//! Two families: Riesz `f(r) = r^{−s}` with `s > 0`, and shifted
//! logarithmic `f(r) = −log(c·r)` with `c > 0`. Both take the value `+∞`
//! on the diagonal; that value is the IEEE infinity, never a large float,
//! so coincident points are detected exactly by energy sums.

use crate::geometry::{CompactSet, Point};
use crate::{Error, Result};

/// Anything that evaluates a symmetric pair potential.
pub trait PairKernel {
    /// Kernel profile at distance `r ≥ 0` (extended-real).
    fn radial(&self, r: f64) -> f64;

    fn eval(&self, x: &Point, y: &Point) -> f64 {
        if x == y {
            return f64::INFINITY;
        }
        self.radial(x.dist(y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// `f(r) = r^{−s}`, `s > 0`.
    Riesz { s: f64 },
    /// `f(r) = −log(c·r)`, `c > 0`.
    ShiftedLog { c: f64 },
}

impl Kernel {
    pub fn riesz(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidKernel(format!("riesz exponent must be > 0, got {s}")));
        }
        Ok(Kernel::Riesz { s })
    }

    pub fn shifted_log(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidKernel(format!("log shift must be > 0, got {c}")));
        }
        Ok(Kernel::ShiftedLog { c })
    }

    /// Default shift for a given set: `c = 1/(2·diam A)`, which keeps
    /// `K > 0` on `A × A` with margin.
    pub fn shifted_log_for(set: &CompactSet) -> Self {
        Kernel::ShiftedLog { c: 1.0 / (2.0 * set.diameter()) }
    }

    /// A shifted-log kernel must satisfy `c · diam(A) ≤ 1` so that the
    /// kernel stays non-negative on the set; Riesz kernels always do.
    pub fn check_positive_on(&self, set: &CompactSet) -> Result<()> {
        if let Kernel::ShiftedLog { c } = self {
            if c * set.diameter() > 1.0 {
                return Err(Error::InvalidKernel(format!(
                    "shifted log with c = {c} is negative on a set of diameter {}",
                    set.diameter()
                )));
            }
        }
        Ok(())
    }

    /// Derivative `f'(r)` for `r > 0`; used by energy gradients.
    pub fn radial_slope(&self, r: f64) -> f64 {
        match self {
            Kernel::Riesz { s } => -s * r.powf(-s - 1.0),
            Kernel::ShiftedLog { .. } => -1.0 / r,
        }
    }

    /// The continuous minorant `f_δ(r) = min(f(r), f(δ))`: bounded by `f`,
    /// increasing to `f` pointwise as `δ → 0⁺`.
    pub fn minorant(&self, delta: f64) -> Result<MinorantKernel> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidKernel(format!("minorant delta must be > 0, got {delta}")));
        }
        Ok(MinorantKernel { kernel: *self, cap: self.radial(delta) })
    }
}

impl PairKernel for Kernel {
    fn radial(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return f64::INFINITY;
        }
        match self {
            Kernel::Riesz { s } => r.powf(-s),
            Kernel::ShiftedLog { c } => -(c * r).ln(),
        }
    }
}

/// Truncation of a kernel at level `f(δ)`; continuous and finite.
#[derive(Clone, Copy, Debug)]
pub struct MinorantKernel {
    kernel: Kernel,
    cap: f64,
}

impl MinorantKernel {
    pub fn cap(&self) -> f64 {
        self.cap
    }
}

impl PairKernel for MinorantKernel {
    fn radial(&self, r: f64) -> f64 {
        self.kernel.radial(r).min(self.cap)
    }

    fn eval(&self, x: &Point, y: &Point) -> f64 {
        if x == y {
            return self.cap;
        }
        self.radial(x.dist(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec())
    }

    #[test]
    fn riesz_values() {
        let k = Kernel::riesz(2.0).unwrap();
        assert_eq!(k.eval(&pt(&[1.0, 0.0]), &pt(&[-1.0, 0.0])), 0.25);
        let k1 = Kernel::riesz(1.0).unwrap();
        assert_eq!(k1.eval(&pt(&[0.3, 0.4]), &pt(&[0.3, 0.4])), f64::INFINITY);
    }

    #[test]
    fn shifted_log_values() {
        let k = Kernel::shifted_log(0.25).unwrap();
        let v = k.eval(&pt(&[-1.0]), &pt(&[1.0]));
        assert!((v - 2.0f64.ln()).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn minorant_truncates() {
        let k = Kernel::riesz(1.0).unwrap();
        let m = k.minorant(0.1).unwrap();
        assert_eq!(m.radial(0.0), 10.0);
        assert_eq!(m.radial(0.05), 10.0);
        assert_eq!(m.radial(0.5), 2.0);
        assert_eq!(m.radial(0.1), k.radial(0.1));

        let lg = Kernel::shifted_log(0.25).unwrap().minorant(0.01).unwrap();
        let want = -(0.25f64 * 0.01).ln();
        assert!((lg.radial(0.001) - want).abs() < 1e-12);
        assert!((lg.radial(0.01) - want).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Kernel::riesz(0.0).is_err());
        assert!(Kernel::riesz(-1.0).is_err());
        assert!(Kernel::shifted_log(0.0).is_err());
    }

    #[test]
    fn log_positivity_check() {
        let set = CompactSet::interval(-1.0, 1.0).unwrap();
        assert!(Kernel::shifted_log(0.25).unwrap().check_positive_on(&set).is_ok());
        assert!(Kernel::shifted_log(0.6).unwrap().check_positive_on(&set).is_err());
        let auto = Kernel::shifted_log_for(&set);
        assert_eq!(auto, Kernel::ShiftedLog { c: 0.25 });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn symmetry_exact(ax in -2.0..2.0f64, ay in -2.0..2.0f64,
                          bx in -2.0..2.0f64, by in -2.0..2.0f64,
                          s in 0.1..3.0f64) {
            let k = Kernel::riesz(s).unwrap();
            let (x, y) = (pt(&[ax, ay]), pt(&[bx, by]));
            prop_assert_eq!(k.eval(&x, &y), k.eval(&y, &x));
            let lg = Kernel::shifted_log(0.25).unwrap();
            prop_assert_eq!(lg.eval(&x, &y), lg.eval(&y, &x));
        }

        #[test]
        fn monotone_decreasing(r1 in 1e-3..1.0f64, r2 in 1e-3..1.0f64, s in 0.1..3.0f64) {
            prop_assume!(r1 != r2);
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            let k = Kernel::riesz(s).unwrap();
            prop_assert!(k.radial(lo) > k.radial(hi));
            // shifted log decreasing for r <= 1/c
            let lg = Kernel::shifted_log(0.5).unwrap();
            prop_assert!(lg.radial(lo) > lg.radial(hi));
        }

        #[test]
        fn minorant_below_and_monotone_in_delta(r in 0.0..2.0f64, delta in 1e-4..0.5f64) {
            for k in [Kernel::riesz(0.7).unwrap(), Kernel::shifted_log(0.25).unwrap()] {
                let m = k.minorant(delta).unwrap();
                let m_half = k.minorant(delta / 2.0).unwrap();
                prop_assert!(m.radial(r) <= k.radial(r));
                // halving delta moves the minorant up toward f
                prop_assert!(m_half.radial(r) >= m.radial(r));
            }
        }
    }
}
