//! Finite-difference stencils and their matrix assembly.
//!
//! `diff2` is the centered 3-point second difference, `diff4` the 5-point
//! fourth difference. Boundary handling:
//!   - Periodic: index wrap.
//!   - Neumann0: even ghost reflection (`u_{-1} = u_1`, and `u_{-2} = u_2`
//!     for the 5-point stencil).
//!   - Dirichlet0: boundary rows are zero; `diff4` additionally closes the
//!     next-to-boundary row with the odd ghost `u_{-1} = -u_1`, which is the
//!     `u'' = 0` wall condition and keeps the operator symmetric.

use crate::banded::{BandedLu, BandedMatrix, CyclicLu, CyclicMatrix};
use crate::error::Result;
use crate::field::Field;
use crate::grid::{BcKind, Grid1D};

/// Which difference operator an implicit step shifts against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Diff2,
    Diff4,
}

/// Centered 3-point second difference with boundary handling.
///
/// Written in difference form so that constant fields cancel exactly in
/// floating point before the `1/dx^2` amplification.
pub fn diff2(u: &Field) -> Field {
    let grid = u.grid();
    let n = grid.len();
    let v = u.values();
    let inv = 1.0 / (grid.dx() * grid.dx());
    let d2 = |a: f64, b: f64, c: f64| ((a - b) + (c - b)) * inv;
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = d2(v[j - 1], v[j], v[j + 1]);
    }
    match grid.bc() {
        BcKind::Periodic => {
            out[0] = d2(v[n - 1], v[0], v[1]);
            out[n - 1] = d2(v[n - 2], v[n - 1], v[0]);
        }
        BcKind::Neumann0 => {
            out[0] = 2.0 * (v[1] - v[0]) * inv;
            out[n - 1] = 2.0 * (v[n - 2] - v[n - 1]) * inv;
        }
        BcKind::Dirichlet0 => {
            out[0] = 0.0;
            out[n - 1] = 0.0;
        }
    }
    Field::from_values_raw(grid, out)
}

/// 5-point fourth difference with boundary handling; difference form as in
/// [`diff2`].
pub fn diff4(u: &Field) -> Field {
    let grid = u.grid();
    let n = grid.len();
    let v = u.values();
    let dx2 = grid.dx() * grid.dx();
    let inv = 1.0 / (dx2 * dx2);
    let d4 = |a: f64, b: f64, c: f64, d: f64, e: f64| {
        ((a - c) - 4.0 * (b - c) - 4.0 * (d - c) + (e - c)) * inv
    };
    let mut out = vec![0.0; n];
    for j in 2..n - 2 {
        out[j] = d4(v[j - 2], v[j - 1], v[j], v[j + 1], v[j + 2]);
    }
    match grid.bc() {
        BcKind::Periodic => {
            let at = |i: isize| v[i.rem_euclid(n as isize) as usize];
            for &j in &[0usize, 1, n - 2, n - 1] {
                let i = j as isize;
                out[j] = d4(at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2));
            }
        }
        BcKind::Neumann0 => {
            // Even ghosts: u_{-1} = u_1, u_{-2} = u_2 (and mirrored on the right).
            out[0] = (-8.0 * (v[1] - v[0]) + 2.0 * (v[2] - v[0])) * inv;
            out[1] = (-4.0 * (v[0] - v[1]) - 4.0 * (v[2] - v[1]) + (v[3] - v[1])) * inv;
            out[n - 2] =
                ((v[n - 4] - v[n - 2]) - 4.0 * (v[n - 3] - v[n - 2]) - 4.0 * (v[n - 1] - v[n - 2]))
                    * inv;
            out[n - 1] = (2.0 * (v[n - 3] - v[n - 1]) - 8.0 * (v[n - 2] - v[n - 1])) * inv;
        }
        BcKind::Dirichlet0 => {
            // Odd ghost u_{-1} = -u_1 closes the next-to-boundary rows.
            out[0] = 0.0;
            out[n - 1] = 0.0;
            out[1] = (-4.0 * v[0] + 5.0 * v[1] - 4.0 * v[2] + v[3]) * inv;
            out[n - 2] = (v[n - 4] - 4.0 * v[n - 3] + 5.0 * v[n - 2] - 4.0 * v[n - 1]) * inv;
        }
    }
    Field::from_values_raw(grid, out)
}

/// Applies the named operator.
pub fn apply_operator(kind: OperatorKind, u: &Field) -> Field {
    match kind {
        OperatorKind::Diff2 => diff2(u),
        OperatorKind::Diff4 => diff4(u),
    }
}

fn stencil_coeffs(kind: OperatorKind, dx: f64) -> Vec<f64> {
    match kind {
        OperatorKind::Diff2 => {
            let c = 1.0 / (dx * dx);
            vec![c, -2.0 * c, c]
        }
        OperatorKind::Diff4 => {
            let c = 1.0 / (dx * dx * dx * dx);
            vec![c, -4.0 * c, 6.0 * c, -4.0 * c, c]
        }
    }
}

/// Factored form of `I - alpha * D` on the grid, matching the stencils above
/// row for row so that eigenvector identities hold exactly.
#[derive(Debug, Clone)]
pub enum ShiftedOperator {
    Banded(BandedLu),
    Cyclic(CyclicLu),
}

impl ShiftedOperator {
    /// Assembles and factors `I - alpha * D`.
    pub fn new(grid: Grid1D, kind: OperatorKind, alpha: f64) -> Result<Self> {
        let n = grid.len();
        let coeffs = stencil_coeffs(kind, grid.dx());
        let w = coeffs.len() / 2;
        match grid.bc() {
            BcKind::Periodic => {
                let shifted: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| if i == w { 1.0 - alpha * c } else { -alpha * c })
                    .collect();
                Ok(ShiftedOperator::Cyclic(CyclicMatrix::new(n, shifted).factor()?))
            }
            BcKind::Dirichlet0 | BcKind::Neumann0 => {
                let mut a = BandedMatrix::zeros(n, w, w);
                let rows = operator_rows(grid, kind);
                for (i, row) in rows.iter().enumerate() {
                    a.set(i, i, 1.0);
                    for &(j, c) in row {
                        a.add(i, j, -alpha * c);
                    }
                }
                Ok(ShiftedOperator::Banded(a.factor()?))
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            ShiftedOperator::Banded(lu) => lu.solve(rhs),
            ShiftedOperator::Cyclic(lu) => lu.solve(rhs),
        }
    }
}

/// Sparse rows of the raw difference operator on a bounded grid, mirroring
/// the ghost closures of `diff2`/`diff4`.
fn operator_rows(grid: Grid1D, kind: OperatorKind) -> Vec<Vec<(usize, f64)>> {
    let n = grid.len();
    let dx = grid.dx();
    let coeffs = stencil_coeffs(kind, dx);
    let w = coeffs.len() / 2;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (o, &c) in coeffs.iter().enumerate() {
            let j = i as isize + o as isize - w as isize;
            if j >= 0 && (j as usize) < n {
                row.push((j as usize, c));
            }
        }
    }
    let inv2 = 1.0 / (dx * dx);
    let inv4 = inv2 * inv2;
    match (grid.bc(), kind) {
        (BcKind::Dirichlet0, OperatorKind::Diff2) => {
            rows[0].clear();
            rows[n - 1].clear();
        }
        (BcKind::Dirichlet0, OperatorKind::Diff4) => {
            rows[0].clear();
            rows[n - 1].clear();
            rows[1] = vec![
                (0, -4.0 * inv4),
                (1, 5.0 * inv4),
                (2, -4.0 * inv4),
                (3, inv4),
            ];
            rows[n - 2] = vec![
                (n - 4, inv4),
                (n - 3, -4.0 * inv4),
                (n - 2, 5.0 * inv4),
                (n - 1, -4.0 * inv4),
            ];
        }
        (BcKind::Neumann0, OperatorKind::Diff2) => {
            rows[0] = vec![(0, -2.0 * inv2), (1, 2.0 * inv2)];
            rows[n - 1] = vec![(n - 2, 2.0 * inv2), (n - 1, -2.0 * inv2)];
        }
        (BcKind::Neumann0, OperatorKind::Diff4) => {
            rows[0] = vec![(0, 6.0 * inv4), (1, -8.0 * inv4), (2, 2.0 * inv4)];
            rows[1] = vec![
                (0, -4.0 * inv4),
                (1, 7.0 * inv4),
                (2, -4.0 * inv4),
                (3, inv4),
            ];
            rows[n - 2] = vec![
                (n - 4, inv4),
                (n - 3, -4.0 * inv4),
                (n - 2, 7.0 * inv4),
                (n - 1, -4.0 * inv4),
            ];
            rows[n - 1] = vec![
                (n - 3, 2.0 * inv4),
                (n - 2, -8.0 * inv4),
                (n - 1, 6.0 * inv4),
            ];
        }
        (BcKind::Periodic, _) => unreachable!("periodic operators assemble cyclically"),
    }
    rows
}

/// Discrete symbol of `diff2` on a periodic grid for integer mode `k`:
/// the eigenvalue is `-(4/dx^2) sin^2(pi k / n)`.
pub fn diff2_symbol(grid: Grid1D, k: usize) -> f64 {
    let n = grid.len() as f64;
    let s = (std::f64::consts::PI * k as f64 / n).sin();
    -4.0 / (grid.dx() * grid.dx()) * s * s
}

/// Discrete symbol of `diff4` on a periodic grid (the square of `-diff2`'s).
pub fn diff4_symbol(grid: Grid1D, k: usize) -> f64 {
    let s = diff2_symbol(grid, k);
    s * s
}
