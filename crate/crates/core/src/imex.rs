//! Theta-method IMEX time stepping: a stiff linear part treated implicitly,
//! everything else explicit.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BcKind, Grid1D};
use crate::stencil::{apply_operator, OperatorKind, ShiftedOperator};

/// The implicitly treated linear operator `L = coeff * D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearPart {
    Zero,
    Diff2 { coeff: f64 },
    Diff4 { coeff: f64 },
}

impl LinearPart {
    pub fn apply(&self, u: &Field) -> Field {
        match *self {
            LinearPart::Zero => Field::zeros(u.grid()),
            LinearPart::Diff2 { coeff } => scale(apply_operator(OperatorKind::Diff2, u), coeff),
            LinearPart::Diff4 { coeff } => scale(apply_operator(OperatorKind::Diff4, u), coeff),
        }
    }

    fn factor_shift(&self, grid: Grid1D, theta_dt: f64) -> Result<Option<ShiftedOperator>> {
        match *self {
            LinearPart::Zero => Ok(None),
            LinearPart::Diff2 { coeff } => Ok(Some(ShiftedOperator::new(
                grid,
                OperatorKind::Diff2,
                theta_dt * coeff,
            )?)),
            LinearPart::Diff4 { coeff } => Ok(Some(ShiftedOperator::new(
                grid,
                OperatorKind::Diff4,
                theta_dt * coeff,
            )?)),
        }
    }
}

fn scale(mut f: Field, c: f64) -> Field {
    for v in f.values_mut() {
        *v *= c;
    }
    f
}

/// One theta-IMEX step: solves `(I - theta dt L) u+ = u + dt ((1-theta) L u + N(u))`.
///
/// `theta = 1` is backward Euler in `L`, `theta = 1/2` Crank-Nicolson; the
/// nonlinear right-hand side `N` is always explicit. On Dirichlet grids the
/// boundary values stay pinned to zero.
pub fn theta_step(
    u: &Field,
    lin: &LinearPart,
    nonlin: impl Fn(&Field) -> Field,
    dt: f64,
    theta: f64,
) -> Result<Field> {
    let stepper = ThetaStepper::new(u.grid(), *lin, dt, theta)?;
    Ok(stepper.step(u, &nonlin))
}

/// Reusable theta stepper; factors the implicit matrix once per `(dt, theta)`.
pub struct ThetaStepper {
    grid: Grid1D,
    lin: LinearPart,
    dt: f64,
    theta: f64,
    shift: Option<ShiftedOperator>,
}

impl ThetaStepper {
    pub fn new(grid: Grid1D, lin: LinearPart, dt: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let shift = lin.factor_shift(grid, theta * dt)?;
        Ok(ThetaStepper {
            grid,
            lin,
            dt,
            theta,
            shift,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &Field, nonlin: &dyn Fn(&Field) -> Field) -> Field {
        let n = self.grid.len();
        let lu = self.lin.apply(u);
        let nu = nonlin(u);
        let mut rhs: Vec<f64> = (0..n)
            .map(|j| {
                u.values()[j]
                    + self.dt * ((1.0 - self.theta) * lu.values()[j] + nu.values()[j])
            })
            .collect();
        if self.grid.bc() == BcKind::Dirichlet0 {
            rhs[0] = 0.0;
            rhs[n - 1] = 0.0;
        }
        let out = match &self.shift {
            Some(op) => op.solve(&rhs),
            None => rhs,
        };
        Field::from_values_raw(self.grid, out)
    }
}
