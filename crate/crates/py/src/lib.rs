//! Python bindings for the reglab core: grids, fields, kernels and the
//! headline operations of each experiment family. Values cross the boundary
//! as plain lists; heavy work stays in Rust.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use reglab::bfheat;
use reglab::burgers;
use reglab::field::Field;
use reglab::greenlink;
use reglab::grid::{BcKind, Grid1D, StepControl};
use reglab::kernel::Kernel;
use reglab::noise;
use reglab::peridyn;
use reglab::rdnonlocal;
use reglab::stencil;

fn err(e: reglab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_bc(bc: &str) -> PyResult<BcKind> {
    match bc.to_lowercase().as_str() {
        "periodic" => Ok(BcKind::Periodic),
        "dirichlet0" => Ok(BcKind::Dirichlet0),
        "neumann0" => Ok(BcKind::Neumann0),
        other => Err(PyValueError::new_err(format!(
            "unknown boundary kind '{other}' (periodic | dirichlet0 | neumann0)"
        ))),
    }
}

/// Uniform 1-D mesh with a boundary-condition kind.
#[pyclass(name = "Grid1D", from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid1D,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(x_min: f64, x_max: f64, n: usize, bc: &str) -> PyResult<Self> {
        Ok(PyGrid {
            inner: Grid1D::new(x_min, x_max, n, parse_bc(bc)?).map_err(err)?,
        })
    }

    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid1D(x_min={}, x_max={}, n={}, bc='{}')",
            self.inner.x_min(),
            self.inner.x_max(),
            self.inner.len(),
            self.inner.bc().name()
        )
    }
}

/// Nodal field on a grid.
#[pyclass(name = "Field", from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: Field,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(grid: PyGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyField {
            inner: Field::from_values(grid.inner, values).map_err(err)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: self.inner.grid(),
        }
    }

    fn linf(&self) -> f64 {
        self.inner.linf()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Discrete convolution kernel on a periodic grid.
#[pyclass(name = "Kernel", from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: Kernel,
}

#[pymethods]
impl PyKernel {
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn deficit(&self) -> f64 {
        self.inner.deficit()
    }
}

/// Centered second difference with boundary handling.
#[pyfunction]
fn diff2(u: &PyField) -> PyField {
    PyField {
        inner: stencil::diff2(&u.inner),
    }
}

/// Five-point fourth difference with boundary handling.
#[pyfunction]
fn diff4(u: &PyField) -> PyField {
    PyField {
        inner: stencil::diff4(&u.inner),
    }
}

/// Forward DFT of a power-of-two-length real vector; returns (re, im).
#[pyfunction]
fn dft(values: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let spec = reglab::dft::dft(&values).map_err(err)?;
    Ok((spec.iter().map(|c| c.re).collect(), spec.iter().map(|c| c.im).collect()))
}

/// Final-time Godunov solution of the inviscid Burgers equation.
#[pyfunction]
fn godunov_run(u0: &PyField, dt: f64, t_end: f64) -> PyResult<PyField> {
    let step = StepControl::new(dt, t_end, usize::MAX).map_err(err)?;
    let traj = burgers::run_godunov(&u0.inner, step).map_err(err)?;
    Ok(PyField {
        inner: traj.into_iter().next_back().unwrap().1,
    })
}

/// Final-time viscous Burgers solution.
#[pyfunction]
fn viscous_run(u0: &PyField, epsilon: f64, dt: f64, t_end: f64) -> PyResult<PyField> {
    let step = StepControl::new(dt, t_end, usize::MAX).map_err(err)?;
    let traj = burgers::run_viscous(&u0.inner, epsilon, step).map_err(err)?;
    Ok(PyField {
        inner: traj.into_iter().next_back().unwrap().1,
    })
}

/// Vanishing-viscosity sweep; returns a dict with distances and trends.
#[pyfunction]
fn vanishing_viscosity_sweep<'py>(
    py: Python<'py>,
    u0: &PyField,
    epsilons: Vec<f64>,
    dt: f64,
    t_end: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let step = StepControl::new(dt, t_end, usize::MAX).map_err(err)?;
    let report = burgers::vanishing_viscosity_sweep(&u0.inner, &epsilons, step).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("epsilons", report.epsilons)?;
    d.set_item("l1_distances", report.l1_distances)?;
    d.set_item("distances_nonincreasing", report.distances_nonincreasing)?;
    d.set_item("max_gradients", report.max_gradients)?;
    d.set_item("steepening_monotone", report.steepening_monotone)?;
    Ok(d)
}

/// Green's-function kernel of `1 - eps d_xx` on a wide periodic grid.
#[pyfunction]
fn exp_kernel(epsilon: f64, grid: PyGrid) -> PyResult<PyKernel> {
    Ok(PyKernel {
        inner: greenlink::exp_kernel(epsilon, grid.inner).map_err(err)?,
    })
}

/// Circular convolution of a kernel with a field.
#[pyfunction]
fn convolve(kernel: &PyKernel, u: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: kernel.inner.convolve(&u.inner).map_err(err)?,
    })
}

/// Nonlocal-vs-regularized wave comparison on a Gaussian bump.
#[pyfunction]
fn wave_equivalence<'py>(
    py: Python<'py>,
    epsilon: f64,
    half_width: f64,
    n: usize,
    dt: f64,
    t_end: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let grid = Grid1D::new(-half_width, half_width, n, BcKind::Periodic).map_err(err)?;
    let u0 = Field::from_fn(grid, |x| (-x * x / 2.0).exp());
    let step = StepControl::new(dt, t_end, usize::MAX).map_err(err)?;
    let report =
        greenlink::equivalence_report(&u0, &Field::zeros(grid), epsilon, step).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("max_diff", report.max_diff)?;
    d.set_item("observed_order", report.observed_order)?;
    d.set_item("kernel_deficit", report.kernel_deficit)?;
    d.set_item("pass", report.pass)?;
    Ok(d)
}

fn parse_flux(kind: &str) -> PyResult<bfheat::FluxFunction> {
    match kind.to_lowercase().as_str() {
        "cubic" => Ok(bfheat::FluxFunction::Cubic),
        "linear" => bfheat::FluxFunction::linear(1.0).map_err(err),
        other => Err(PyValueError::new_err(format!(
            "unknown flux '{other}' (cubic | linear)"
        ))),
    }
}

/// One biharmonic-regularized backward-forward heat step.
#[pyfunction]
fn step_biharmonic(u: &PyField, flux: &str, epsilon: f64, dt: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: bfheat::step_biharmonic(&u.inner, &parse_flux(flux)?, epsilon, dt).map_err(err)?,
    })
}

/// One pseudo-parabolic backward-forward heat step.
#[pyfunction]
fn step_pseudoparabolic(u: &PyField, flux: &str, epsilon: f64, dt: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: bfheat::step_pseudoparabolic(&u.inner, &parse_flux(flux)?, epsilon, dt)
            .map_err(err)?,
    })
}

/// Gradient histogram of a field; returns (edges, counts).
#[pyfunction]
fn young_histogram(u: &PyField, bins: usize) -> PyResult<(Vec<f64>, Vec<u64>)> {
    let h = bfheat::young_histogram(&u.inner, bins).map_err(err)?;
    Ok((h.edges, h.counts))
}

fn parse_micromodulus(kind: &str, amplitude: f64, horizon: f64) -> PyResult<peridyn::Micromodulus> {
    match kind.to_lowercase().as_str() {
        "constant" => peridyn::Micromodulus::constant(amplitude, horizon).map_err(err),
        "triangular" => peridyn::Micromodulus::triangular(amplitude, horizon).map_err(err),
        other => Err(PyValueError::new_err(format!(
            "unknown micromodulus '{other}' (constant | triangular)"
        ))),
    }
}

/// Closed-form raw moment of a micromodulus (even order).
#[pyfunction]
fn peridyn_moment(kind: &str, amplitude: f64, horizon: f64, order: u32) -> PyResult<f64> {
    peridyn::moment(&parse_micromodulus(kind, amplitude, horizon)?, order).map_err(err)
}

/// Bond-based peridynamic operator applied to a field.
#[pyfunction]
fn apply_nonlocal(u: &PyField, kind: &str, amplitude: f64, horizon: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: peridyn::apply_nonlocal_1d(&u.inner, &parse_micromodulus(kind, amplitude, horizon)?)
            .map_err(err)?,
    })
}

/// 3-D moment tensor of the micromodulus with its isotropic fit and Lame
/// constants.
#[pyfunction]
fn moment_tensor<'py>(
    py: Python<'py>,
    kind: &str,
    amplitude: f64,
    horizon: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let t = peridyn::moment_tensor_3d(&parse_micromodulus(kind, amplitude, horizon)?);
    let d = pyo3::types::PyDict::new(py);
    d.set_item("m_xxxx", t.m_xxxx)?;
    d.set_item("m_xxyy", t.m_xxyy)?;
    d.set_item("isotropy_deviation", t.isotropy_deviation)?;
    d.set_item("mu", t.mu_lame)?;
    d.set_item("lambda", t.lambda_lame)?;
    d.set_item("bulk_modulus", t.bulk_modulus)?;
    Ok(d)
}

/// Asymmetric inhibitor Green's kernel of the reaction-diffusion reduction.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn rd_kernel(grid: PyGrid, g: f64, h: f64, f: f64, xi: f64, d: f64) -> PyResult<PyKernel> {
    let params =
        rdnonlocal::RDParams::new(g, h, f, xi, d, 0.0, rdnonlocal::Reaction::BistableCubic)
            .map_err(err)?;
    Ok(PyKernel {
        inner: rdnonlocal::asym_kernel(&params, grid.inner).map_err(err)?,
    })
}

/// Stochastic-heat ensemble statistics; returns a dict of nodal arrays.
#[pyfunction]
fn heat_ensemble<'py>(
    py: Python<'py>,
    grid: PyGrid,
    noise_amp: f64,
    dt: f64,
    t_end: f64,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let step = StepControl::new(dt, t_end, usize::MAX).map_err(err)?;
    let stats = noise::heat_ensemble(
        &Field::zeros(grid.inner),
        |_| 0.0,
        noise_amp,
        step,
        samples,
        noise::SeededRng::new(seed),
    )
    .map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("x", grid.inner.nodes())?;
    d.set_item("mean", stats.mean.values().to_vec())?;
    d.set_item("variance", stats.variance.values().to_vec())?;
    d.set_item("n_samples", stats.n_samples)?;
    Ok(d)
}

#[pymodule]
fn reglab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(diff2, m)?)?;
    m.add_function(wrap_pyfunction!(diff4, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(godunov_run, m)?)?;
    m.add_function(wrap_pyfunction!(viscous_run, m)?)?;
    m.add_function(wrap_pyfunction!(vanishing_viscosity_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(exp_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(wave_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(step_biharmonic, m)?)?;
    m.add_function(wrap_pyfunction!(step_pseudoparabolic, m)?)?;
    m.add_function(wrap_pyfunction!(young_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(peridyn_moment, m)?)?;
    m.add_function(wrap_pyfunction!(apply_nonlocal, m)?)?;
    m.add_function(wrap_pyfunction!(moment_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(rd_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(heat_ensemble, m)?)?;
    Ok(())
}
