//! Nodal scalar fields and the norms used throughout the experiments.

use crate::error::{Error, Result};
use crate::grid::{BcKind, Grid1D};

/// Real-valued nodal function on a [`Grid1D`].
///
/// Construction through [`Field::from_values`] enforces the invariants
/// (finite entries, boundary zeros on Dirichlet grids). Conservation-law
/// steps impose Dirichlet data weakly through ghost cells and may leave
/// nonzero outflow values at the wall; they build their output through the
/// lenient internal constructor and document this.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    /// Zero field.
    pub fn zeros(grid: Grid1D) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at the nodes; on Dirichlet grids the boundary nodes are
    /// forced to exactly zero.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        if grid.bc() == BcKind::Dirichlet0 {
            values[0] = 0.0;
            *values.last_mut().unwrap() = 0.0;
        }
        Field { grid, values }
    }

    /// Validating constructor: length must match, entries finite, and on
    /// Dirichlet grids the boundary entries must be exactly zero.
    pub fn from_values(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite entry".into()));
        }
        if grid.bc() == BcKind::Dirichlet0 && (values[0] != 0.0 || *values.last().unwrap() != 0.0)
        {
            return Err(Error::InvalidField(
                "Dirichlet0 field must vanish at both boundary nodes".into(),
            ));
        }
        Ok(Field { grid, values })
    }

    /// Internal constructor for solver output; checks length only.
    pub(crate) fn from_values_raw(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Max-norm.
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete L1 norm `sum |u_j| dx`.
    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.dx()
    }

    /// Discrete L2 norm `sqrt(sum u_j^2 dx)`.
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    /// Discrete mass `sum u_j dx`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Max-norm of the difference; grids must match.
    pub fn linf_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Discrete L1 distance.
    pub fn l1_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx())
    }

    /// Discrete L2 distance.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok((self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            * self.grid.dx())
        .sqrt())
    }

    /// Maximum absolute one-sided slope, used as a steepness measure.
    pub fn max_abs_gradient(&self) -> f64 {
        let dx = self.grid.dx();
        let mut m: f64 = 0.0;
        for w in self.values.windows(2) {
            m = m.max(((w[1] - w[0]) / dx).abs());
        }
        if self.grid.bc() == BcKind::Periodic {
            let n = self.values.len();
            m = m.max(((self.values[0] - self.values[n - 1]) / dx).abs());
        }
        m
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "fields live on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// Stored snapshots of a time-dependent solve: pairs `(t, field)`.
pub type Trajectory = Vec<(f64, Field)>;
