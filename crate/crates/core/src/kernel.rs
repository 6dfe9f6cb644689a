//! Discrete convolution kernels on periodic grids.

use crate::dft::{dft, fft_in_place};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BcKind, Grid1D};
use num_complex::Complex64;

/// Convolution kernel sampled node-aligned and centered at node 0: entry `j`
/// is the kernel weight at signed periodic displacement
/// [`Grid1D::periodic_displacement`]`(j)`.
///
/// `mass` is the discrete integral `sum values * dx` as constructed;
/// truncated tail mass is recorded in `deficit` and never silently
/// renormalized away.
#[derive(Debug, Clone)]
pub struct Kernel {
    grid: Grid1D,
    values: Vec<f64>,
    mass: f64,
    support_radius: Option<f64>,
    deficit: f64,
}

impl Kernel {
    pub fn new(
        grid: Grid1D,
        values: Vec<f64>,
        support_radius: Option<f64>,
        deficit: f64,
    ) -> Result<Self> {
        if grid.bc() != BcKind::Periodic {
            return Err(Error::InvalidGrid("kernels require a periodic grid".into()));
        }
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "kernel has {} samples for a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite kernel sample".into()));
        }
        let mass = values.iter().sum::<f64>() * grid.dx();
        Ok(Kernel {
            grid,
            values,
            mass,
            support_radius,
            deficit,
        })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Discrete mass `sum values * dx`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Radius beyond which samples were truncated to exact zero, `None` for
    /// full-support kernels.
    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// Mass lost to truncation and to the finite domain width.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// Circular convolution `(k * u)_j = sum_i k_i u_{j-i} dx`.
    ///
    /// Uses the DFT when the grid size is a power of two, otherwise a direct
    /// sum over the kernel support; the two paths agree to 1e-10.
    pub fn convolve(&self, u: &Field) -> Result<Field> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch(
                "kernel and field live on different grids".into(),
            ));
        }
        let n = self.grid.len();
        if n.is_power_of_two() {
            let mut ku = dft(&self.values)?;
            let uu = dft(u.values())?;
            let dx = self.grid.dx();
            for (a, b) in ku.iter_mut().zip(&uu) {
                *a = *a * b * dx;
            }
            fft_in_place(&mut ku, true)?;
            Ok(Field::from_values_raw(
                self.grid,
                ku.into_iter().map(|c| c.re).collect(),
            ))
        } else {
            Ok(self.convolve_direct(u))
        }
    }

    /// Direct-sum convolution path, iterating only over nonzero samples.
    pub fn convolve_direct(&self, u: &Field) -> Field {
        let n = self.grid.len();
        let dx = self.grid.dx();
        let nonzero: Vec<(usize, f64)> = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        let v = u.values();
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(i, k) in &nonzero {
                let idx = (j + n - i) % n;
                acc += k * v[idx];
            }
            *o = acc * dx;
        }
        Field::from_values_raw(self.grid, out)
    }

    /// Multiplier applied by this kernel to the discrete mode `k` (the
    /// DFT of the samples times `dx`), for symbol checks.
    pub fn mode_multiplier(&self, k: usize) -> Result<Complex64> {
        let spec = dft(&self.values)?;
        Ok(spec[k % self.grid.len()] * self.grid.dx())
    }
}

/// Discrete delta kernel (identity under convolution).
pub fn delta_kernel(grid: Grid1D) -> Result<Kernel> {
    let mut values = vec![0.0; grid.len()];
    values[0] = 1.0 / grid.dx();
    Kernel::new(grid, values, Some(0.0), 0.0)
}
