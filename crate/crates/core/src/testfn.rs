//! Compactly supported test functions for the weak-form residual.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Shape of the bump profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionKind {
    /// `phi(s) = (4 s (1-s))^3` on the support, in the normalized coordinate
    /// `s = (x-a)/(b-a)`. The cubed parabola has triple zeros at the ends,
    /// so `phi` is twice continuously differentiable across the cut-off.
    PolynomialBump,
    /// `phi(s) = sin^3(pi s)`, likewise C^2 across the cut-off.
    SineBump,
}

/// A C^2 bump supported on `(a, b)` strictly inside the grid domain, with
/// its first two derivatives sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct TestFunction {
    kind: TestFunctionKind,
    support: (f64, f64),
    phi: Vec<f64>,
    dphi: Vec<f64>,
    d2phi: Vec<f64>,
}

impl TestFunction {
    pub fn new(kind: TestFunctionKind, grid: Grid1D, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!(
                "support requires a < b, got ({a}, {b})"
            )));
        }
        if a <= grid.x_min() || b >= grid.x_max() {
            return Err(Error::InvalidParameter(format!(
                "support ({a}, {b}) must lie strictly inside ({}, {})",
                grid.x_min(),
                grid.x_max()
            )));
        }
        let n = grid.len();
        let mut phi = vec![0.0; n];
        let mut dphi = vec![0.0; n];
        let mut d2phi = vec![0.0; n];
        let len = b - a;
        for j in 0..n {
            let x = grid.node(j);
            if x <= a || x >= b {
                continue;
            }
            let s = (x - a) / len;
            let (p, dp_ds, d2p_ds2) = match kind {
                TestFunctionKind::PolynomialBump => {
                    // q = 4 s (1 - s), phi = q^3.
                    let q = 4.0 * s * (1.0 - s);
                    let dq = 4.0 * (1.0 - 2.0 * s);
                    let d2q = -8.0;
                    (
                        q * q * q,
                        3.0 * q * q * dq,
                        6.0 * q * dq * dq + 3.0 * q * q * d2q,
                    )
                }
                TestFunctionKind::SineBump => {
                    let t = std::f64::consts::PI * s;
                    let (sn, cs) = t.sin_cos();
                    let pi = std::f64::consts::PI;
                    (
                        sn * sn * sn,
                        3.0 * pi * sn * sn * cs,
                        3.0 * pi * pi * sn * (2.0 * cs * cs - sn * sn),
                    )
                }
            };
            phi[j] = p;
            dphi[j] = dp_ds / len;
            d2phi[j] = d2p_ds2 / (len * len);
        }
        Ok(TestFunction {
            kind,
            support: (a, b),
            phi,
            dphi,
            d2phi,
        })
    }

    pub fn kind(&self) -> TestFunctionKind {
        self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn dphi(&self) -> &[f64] {
        &self.dphi
    }

    pub fn d2phi(&self) -> &[f64] {
        &self.d2phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BcKind;

    #[test]
    fn vanishes_outside_support() {
        let g = Grid1D::new(0.0, 1.0, 101, BcKind::Dirichlet0).unwrap();
        let tf = TestFunction::new(TestFunctionKind::PolynomialBump, g, 0.25, 0.75).unwrap();
        for j in 0..g.len() {
            let x = g.node(j);
            if x <= 0.25 || x >= 0.75 {
                assert_eq!(tf.phi()[j], 0.0);
                assert_eq!(tf.dphi()[j], 0.0);
            }
        }
        assert!(tf.phi().iter().cloned().fold(0.0f64, f64::max) > 0.9);
    }

    #[test]
    fn rejects_support_touching_boundary() {
        let g = Grid1D::new(0.0, 1.0, 16, BcKind::Dirichlet0).unwrap();
        assert!(TestFunction::new(TestFunctionKind::SineBump, g, 0.0, 0.5).is_err());
        assert!(TestFunction::new(TestFunctionKind::SineBump, g, 0.5, 1.0).is_err());
        assert!(TestFunction::new(TestFunctionKind::SineBump, g, 0.7, 0.2).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = Grid1D::new(0.0, 2.0, 2001, BcKind::Dirichlet0).unwrap();
        for kind in [TestFunctionKind::PolynomialBump, TestFunctionKind::SineBump] {
            let tf = TestFunction::new(kind, g, 0.4, 1.3).unwrap();
            let dx = g.dx();
            for j in 1..g.len() - 1 {
                let x = g.node(j);
                // The third derivative jumps at the support edges, so the
                // centered second difference converges slowly there.
                if (x - 0.4).abs() < 2.5 * dx || (x - 1.3).abs() < 2.5 * dx {
                    continue;
                }
                let fd1 = (tf.phi()[j + 1] - tf.phi()[j - 1]) / (2.0 * dx);
                let fd2 = (tf.phi()[j + 1] - 2.0 * tf.phi()[j] + tf.phi()[j - 1]) / (dx * dx);
                assert!((fd1 - tf.dphi()[j]).abs() < 5e-4, "{kind:?} dphi at {j}");
                assert!((fd2 - tf.d2phi()[j]).abs() < 5e-2, "{kind:?} d2phi at {j}");
            }
        }
    }
}
