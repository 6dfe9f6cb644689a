//! Uniform one-dimensional grids.
//!
//! All solvers in this crate operate on node-centered uniform meshes. The
//! spacing convention differs between boundary-condition kinds: a periodic
//! grid of `n` nodes covers `[x_min, x_max)` with spacing `(x_max - x_min)/n`
//! (the right endpoint is identified with the left), while Dirichlet and
//! Neumann grids include both endpoints, spacing `(x_max - x_min)/(n - 1)`.

use crate::error::{Error, Result};

/// Boundary-condition kind attached to a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Wrap-around topology, right endpoint identified with the left.
    Periodic,
    /// Homogeneous Dirichlet: field values pinned to zero at both endpoints.
    Dirichlet0,
    /// Homogeneous Neumann: zero normal derivative via ghost reflection.
    Neumann0,
}

impl BcKind {
    pub fn name(&self) -> &'static str {
        match self {
            BcKind::Periodic => "periodic",
            BcKind::Dirichlet0 => "dirichlet0",
            BcKind::Neumann0 => "neumann0",
        }
    }
}

/// Node-centered uniform 1-D mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    bc: BcKind,
}

impl Grid1D {
    /// Builds a grid, rejecting degenerate extents and fewer than 4 nodes.
    pub fn new(x_min: f64, x_max: f64, n: usize, bc: BcKind) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("extent must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max = {x_max} must exceed x_min = {x_min}"
            )));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need n >= 4 nodes, got {n}")));
        }
        Ok(Grid1D { x_min, x_max, n, bc })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    /// Domain length `x_max - x_min`.
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Mesh spacing per the convention of the boundary-condition kind.
    pub fn dx(&self) -> f64 {
        match self.bc {
            BcKind::Periodic => self.width() / self.n as f64,
            BcKind::Dirichlet0 | BcKind::Neumann0 => self.width() / (self.n - 1) as f64,
        }
    }

    /// Coordinate of node `j`.
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j < self.n);
        self.x_min + j as f64 * self.dx()
    }

    /// All node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed displacement of node `j` from node 0 in the periodic metric,
    /// i.e. mapped into `(-width/2, width/2]`. Only meaningful on periodic
    /// grids, where it indexes convolution kernels.
    pub fn periodic_displacement(&self, j: usize) -> f64 {
        debug_assert!(j < self.n);
        let half = self.n / 2;
        if j <= half {
            j as f64 * self.dx()
        } else {
            (j as f64 - self.n as f64) * self.dx()
        }
    }
}

/// Time-stepping control: step size, final time and snapshot cadence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub t_end: f64,
    pub store_every: usize,
}

impl StepControl {
    pub fn new(dt: f64, t_end: f64, store_every: usize) -> Result<Self> {
        if !(dt.is_finite() && t_end.is_finite()) || dt <= 0.0 || dt > t_end {
            return Err(Error::InvalidParameter(format!(
                "step control requires 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
            )));
        }
        if store_every == 0 {
            return Err(Error::InvalidParameter(
                "store_every must be a positive integer".into(),
            ));
        }
        Ok(StepControl { dt, t_end, store_every })
    }

    /// Number of full steps of size `dt`; a shorter final step is appended
    /// when `dt` does not divide `t_end`.
    pub fn full_steps(&self) -> usize {
        let k = (self.t_end / self.dt + 1e-9).floor() as usize;
        k.max(1)
    }

    /// Length of the trailing partial step, zero when `dt` divides `t_end`.
    pub fn remainder(&self) -> f64 {
        let rem = self.t_end - self.full_steps() as f64 * self.dt;
        if rem > 1e-12 * self.t_end {
            rem
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_spacing_includes_endpoints() {
        let g = Grid1D::new(0.0, 1.0, 5, BcKind::Dirichlet0).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn periodic_spacing_excludes_right_endpoint() {
        let g = Grid1D::new(0.0, 1.0, 4, BcKind::Periodic).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn rejects_reversed_extent_and_tiny_grids() {
        assert!(Grid1D::new(1.0, 0.0, 8, BcKind::Periodic).is_err());
        assert!(Grid1D::new(0.0, 1.0, 3, BcKind::Periodic).is_err());
        assert!(Grid1D::new(0.0, f64::NAN, 8, BcKind::Periodic).is_err());
    }

    #[test]
    fn periodic_displacement_wraps() {
        let g = Grid1D::new(0.0, 1.0, 8, BcKind::Periodic).unwrap();
        assert_eq!(g.periodic_displacement(0), 0.0);
        assert_eq!(g.periodic_displacement(1), 0.125);
        assert_eq!(g.periodic_displacement(4), 0.5);
        assert_eq!(g.periodic_displacement(7), -0.125);
    }

    #[test]
    fn step_control_validates() {
        assert!(StepControl::new(0.1, 1.0, 1).is_ok());
        assert!(StepControl::new(0.0, 1.0, 1).is_err());
        assert!(StepControl::new(2.0, 1.0, 1).is_err());
        assert!(StepControl::new(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn step_control_splits_time_interval() {
        let s = StepControl::new(0.3, 1.0, 1).unwrap();
        assert_eq!(s.full_steps(), 3);
        assert!((s.remainder() - 0.1).abs() < 1e-12);
        let exact = StepControl::new(0.25, 1.0, 1).unwrap();
        assert_eq!(exact.full_steps(), 4);
        assert_eq!(exact.remainder(), 0.0);
    }
}
