//! Empirical weak-formulation residual.
//!
//! A trajectory satisfies the weak form of its equation against a compactly
//! supported time-independent test function `phi` when
//!
//! ```text
//!   int u(T) phi dx - int u(0) phi dx + int int F dx dt = 0,
//! ```
//!
//! where `F = alpha * u_x * phi_x` for the heat equation (one integration by
//! parts in space) and `F = -(u^2/2) * phi_x` for Burgers. The residual is
//! the absolute value of the left-hand side under trapezoidal quadrature in
//! both space and time. It is a diagnostic: small values certify consistency
//! with the weak form at the quadrature/scheme order, nothing more.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::BcKind;
use crate::testfn::TestFunction;

/// Equation whose weak form is being tested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeakForm {
    /// `du/dt = alpha * u_xx`.
    Heat { alpha: f64 },
    /// `du/dt + d(u^2/2)/dx = 0`.
    Burgers,
}

/// Trapezoidal quadrature weight of node `j`.
fn trapz_weight(bc: BcKind, n: usize, j: usize) -> f64 {
    match bc {
        BcKind::Periodic => 1.0,
        _ => {
            if j == 0 || j == n - 1 {
                0.5
            } else {
                1.0
            }
        }
    }
}

/// Centered spatial derivative (one-sided at bounded-domain endpoints).
fn gradient(u: &Field) -> Vec<f64> {
    let g = u.grid();
    let n = g.len();
    let v = u.values();
    let dx = g.dx();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = (v[j + 1] - v[j - 1]) / (2.0 * dx);
    }
    match g.bc() {
        BcKind::Periodic => {
            out[0] = (v[1] - v[n - 1]) / (2.0 * dx);
            out[n - 1] = (v[0] - v[n - 2]) / (2.0 * dx);
        }
        _ => {
            out[0] = (v[1] - v[0]) / dx;
            out[n - 1] = (v[n - 1] - v[n - 2]) / dx;
        }
    }
    out
}

fn space_integral(values: impl Iterator<Item = f64>, bc: BcKind, n: usize, dx: f64) -> f64 {
    values
        .enumerate()
        .map(|(j, v)| trapz_weight(bc, n, j) * v)
        .sum::<f64>()
        * dx
}

/// Weak-form residual of a stored trajectory against `phi`.
///
/// Requires at least three snapshots at uniform time spacing; the test
/// function must be supported strictly inside the domain (enforced at its
/// construction) and sampled on the same grid as the snapshots.
pub fn weak_residual(
    snapshots: &[(f64, Field)],
    equation: WeakForm,
    phi: &TestFunction,
) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    let grid = snapshots[0].1.grid();
    if phi.phi().len() != grid.len() {
        return Err(Error::GridMismatch(
            "test function sampled on a different grid".into(),
        ));
    }
    let dt0 = snapshots[1].0 - snapshots[0].0;
    for w in snapshots.windows(2) {
        let dt = w[1].0 - w[0].0;
        if dt <= 0.0 || (dt - dt0).abs() > 1e-9 * dt0.abs().max(1e-300) {
            return Err(Error::InvalidParameter(
                "snapshots must be uniformly spaced in time".into(),
            ));
        }
        w[0].1.check_same_grid(&w[1].1)?;
    }

    let n = grid.len();
    let bc = grid.bc();
    let dx = grid.dx();

    let moment = |u: &Field| -> f64 {
        space_integral(
            u.values().iter().zip(phi.phi()).map(|(a, b)| a * b),
            bc,
            n,
            dx,
        )
    };

    let flux_term = |u: &Field| -> f64 {
        match equation {
            WeakForm::Heat { alpha } => {
                let grad = gradient(u);
                space_integral(
                    grad.iter().zip(phi.dphi()).map(|(a, b)| alpha * a * b),
                    bc,
                    n,
                    dx,
                )
            }
            WeakForm::Burgers => space_integral(
                u.values()
                    .iter()
                    .zip(phi.dphi())
                    .map(|(v, dp)| -(v * v / 2.0) * dp),
                bc,
                n,
                dx,
            ),
        }
    };

    // Trapezoid in time over the snapshot sequence.
    let m = snapshots.len();
    let mut time_integral = 0.0;
    for (k, (_, u)) in snapshots.iter().enumerate() {
        let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
        time_integral += w * flux_term(u);
    }
    time_integral *= dt0;

    let boundary_in_time = moment(&snapshots[m - 1].1) - moment(&snapshots[0].1);
    Ok((boundary_in_time + time_integral).abs())
}
