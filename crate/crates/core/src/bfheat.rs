//! Backward-forward heat equation with a nonmonotone flux and its two
//! regularisations.
//!
//! The model is `u_t = d/dx phi(u_x)` with `phi` nonmonotone: parabolic
//! where `phi' > 0` and backward-parabolic (ill-posed) where `phi' < 0`.
//! Two regularisations tame it:
//!
//!   - biharmonic: `u_t = d/dx phi(u_x) - eps u_xxxx`, flux explicit and
//!     the fourth-order term implicit (theta = 1);
//!   - pseudo-parabolic: `(I - eps d_xx)(u+ - u)/dt = d/dx phi(u_x)`.
//!
//! The flux divergence uses half-node gradients `p_{j+1/2} = (u_{j+1} -
//! u_j)/dx` and the conservative difference of `phi` at the faces, so both
//! steps conserve mass exactly on periodic grids. Gradient histograms over
//! the cells serve as the empirical diagnostic of the oscillations that
//! develop in the spinodal range; no measure-valued solution object is
//! computed.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BcKind, Grid1D, StepControl};
use crate::imex::{LinearPart, ThetaStepper};
use crate::stencil::{OperatorKind, ShiftedOperator};

/// Piecewise-linear flux with anchored `phi(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFlux {
    breaks: Vec<f64>,
    slopes: Vec<f64>,
    /// phi evaluated at the breakpoints.
    values: Vec<f64>,
}

impl PiecewiseLinearFlux {
    pub fn new(breaks: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints need {} slopes, got {}",
                breaks.len(),
                breaks.len() + 1,
                slopes.len()
            )));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if breaks.iter().chain(slopes.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "breakpoints and slopes must be finite".into(),
            ));
        }
        // Integrate the slopes outward from 0 to anchor phi(0) = 0.
        let mut values = vec![0.0; breaks.len()];
        if !breaks.is_empty() {
            // phi at an arbitrary anchor: pretend phi(breaks[0]) = 0, then
            // shift so that phi(0) = 0.
            for i in 1..breaks.len() {
                values[i] = values[i - 1] + slopes[i] * (breaks[i] - breaks[i - 1]);
            }
            let flux = PiecewiseLinearFlux {
                breaks: breaks.clone(),
                slopes: slopes.clone(),
                values: values.clone(),
            };
            let at_zero = flux.eval(0.0);
            for v in &mut values {
                *v -= at_zero;
            }
        }
        Ok(PiecewiseLinearFlux {
            breaks,
            slopes,
            values,
        })
    }

    fn segment(&self, p: f64) -> usize {
        self.breaks.partition_point(|&b| b <= p)
    }

    fn eval(&self, p: f64) -> f64 {
        let i = self.segment(p);
        if self.breaks.is_empty() {
            return self.slopes[0] * p;
        }
        if i == 0 {
            self.values[0] + self.slopes[0] * (p - self.breaks[0])
        } else {
            self.values[i - 1] + self.slopes[i] * (p - self.breaks[i - 1])
        }
    }

    fn slope(&self, p: f64) -> f64 {
        self.slopes[self.segment(p)]
    }
}

/// Heat-flux density `phi` as a function of the gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxFunction {
    /// `phi(p) = a p`, `a > 0`: the classical monotone case.
    Linear { a: f64 },
    /// `phi(p) = p^3 - p`: the double-well constitutive law with spinodal
    /// band `|p| < 1/sqrt(3)` (where `phi' < 0`) and stable branches at
    /// `p = +-1` where the energy `W = p^4/4 - p^2/2` has its minima.
    Cubic,
    /// Continuous piecewise-linear flux.
    PiecewiseLinear(PiecewiseLinearFlux),
}

impl FluxFunction {
    pub fn linear(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "linear flux requires a > 0, got {a}"
            )));
        }
        Ok(FluxFunction::Linear { a })
    }

    pub fn phi(&self, p: f64) -> f64 {
        match self {
            FluxFunction::Linear { a } => a * p,
            FluxFunction::Cubic => p * p * p - p,
            FluxFunction::PiecewiseLinear(f) => f.eval(p),
        }
    }

    pub fn dphi(&self, p: f64) -> f64 {
        match self {
            FluxFunction::Linear { a } => *a,
            FluxFunction::Cubic => 3.0 * p * p - 1.0,
            FluxFunction::PiecewiseLinear(f) => f.slope(p),
        }
    }

    /// Energy density `W` with `W' = phi` and `W(0) = 0`.
    pub fn energy_density(&self, p: f64) -> f64 {
        match self {
            FluxFunction::Linear { a } => 0.5 * a * p * p,
            FluxFunction::Cubic => 0.25 * p * p * p * p - 0.5 * p * p,
            FluxFunction::PiecewiseLinear(f) => {
                // Integrate segment by segment from 0 to p.
                let (lo, hi, sign) = if p >= 0.0 { (0.0, p, 1.0) } else { (p, 0.0, -1.0) };
                let mut acc = 0.0;
                let mut x = lo;
                loop {
                    let next = f
                        .breaks
                        .iter()
                        .copied()
                        .find(|&b| b > x && b < hi)
                        .unwrap_or(hi);
                    // Trapezoid of an affine function is exact.
                    acc += 0.5 * (f.eval(x) + f.eval(next)) * (next - x);
                    if next >= hi {
                        break;
                    }
                    x = next;
                }
                sign * acc
            }
        }
    }
}

/// Half-node gradients: entry `j` is `(u_{j+1} - u_j)/dx`. Periodic grids
/// get `n` faces (the last wraps); bounded grids `n - 1`.
pub fn cell_gradients(u: &Field) -> Vec<f64> {
    let g = u.grid();
    let v = u.values();
    let n = g.len();
    let dx = g.dx();
    let mut p: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]) / dx).collect();
    if g.bc() == BcKind::Periodic {
        p.push((v[0] - v[n - 1]) / dx);
    }
    p
}

/// Conservative flux divergence `(phi(p_{j+1/2}) - phi(p_{j-1/2}))/dx`,
/// zero at pinned Dirichlet nodes and at Neumann walls.
fn flux_divergence(u: &Field, flux: &FluxFunction) -> Vec<f64> {
    let g = u.grid();
    let n = g.len();
    let dx = g.dx();
    let p = cell_gradients(u);
    let mut div = vec![0.0; n];
    match g.bc() {
        BcKind::Periodic => {
            let face: Vec<f64> = p.iter().map(|&q| flux.phi(q)).collect();
            for j in 0..n {
                let left = face[(j + n - 1) % n];
                div[j] = (face[j] - left) / dx;
            }
        }
        _ => {
            let face: Vec<f64> = p.iter().map(|&q| flux.phi(q)).collect();
            for j in 1..n - 1 {
                div[j] = (face[j] - face[j - 1]) / dx;
            }
        }
    }
    div
}

fn explicit_bound(u: &Field, flux: &FluxFunction) -> f64 {
    let max_slope = cell_gradients(u)
        .iter()
        .map(|&p| flux.dphi(p).abs())
        .fold(0.0f64, f64::max);
    let dx = u.grid().dx();
    if max_slope == 0.0 {
        f64::INFINITY
    } else {
        dx * dx / (2.0 * max_slope)
    }
}

/// Which regularisation a stepper applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularization {
    Biharmonic,
    PseudoParabolic,
}

impl Regularization {
    pub fn name(&self) -> &'static str {
        match self {
            Regularization::Biharmonic => "biharmonic",
            Regularization::PseudoParabolic => "pseudo-parabolic",
        }
    }
}

enum StepKind {
    Biharmonic(ThetaStepper),
    PseudoParabolic(ShiftedOperator),
}

/// Reusable stepper for either regularisation (factors its matrix once).
pub struct BfheatStepper {
    flux: FluxFunction,
    dt: f64,
    kind: StepKind,
}

impl BfheatStepper {
    pub fn new(
        grid: Grid1D,
        reg: Regularization,
        flux: FluxFunction,
        epsilon: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regularisation requires epsilon > 0, got {epsilon}"
            )));
        }
        if grid.bc() == BcKind::Neumann0 {
            return Err(Error::InvalidParameter(
                "backward-forward heat steps support periodic or Dirichlet grids".into(),
            ));
        }
        let kind = match reg {
            Regularization::Biharmonic => StepKind::Biharmonic(ThetaStepper::new(
                grid,
                LinearPart::Diff4 { coeff: -epsilon },
                dt,
                1.0,
            )?),
            Regularization::PseudoParabolic => {
                StepKind::PseudoParabolic(ShiftedOperator::new(grid, OperatorKind::Diff2, epsilon)?)
            }
        };
        Ok(BfheatStepper { flux, dt, kind })
    }

    pub fn step(&self, u: &Field) -> Result<Field> {
        match &self.kind {
            StepKind::Biharmonic(stepper) => {
                let bound = explicit_bound(u, &self.flux);
                if self.dt > bound {
                    return Err(Error::UnstableStep { dt: self.dt, bound });
                }
                let div = flux_divergence(u, &self.flux);
                Ok(stepper.step(u, &|f: &Field| {
                    Field::from_values_raw(f.grid(), div.clone())
                }))
            }
            StepKind::PseudoParabolic(shift) => {
                let div = flux_divergence(u, &self.flux);
                let rhs: Vec<f64> = div.iter().map(|d| self.dt * d).collect();
                let inc = shift.solve(&rhs);
                Ok(Field::from_values_raw(
                    u.grid(),
                    u.values().iter().zip(&inc).map(|(a, b)| a + b).collect(),
                ))
            }
        }
    }

    /// Discrete energy `sum W(p) dx` over the cells.
    pub fn energy(&self, u: &Field) -> f64 {
        energy(u, &self.flux)
    }
}

/// Discrete energy `sum W(p_{j+1/2}) dx` with `W' = phi`.
pub fn energy(u: &Field, flux: &FluxFunction) -> f64 {
    cell_gradients(u)
        .iter()
        .map(|&p| flux.energy_density(p))
        .sum::<f64>()
        * u.grid().dx()
}

/// One explicit-flux, implicit-biharmonic step of
/// `u_t = d/dx phi(u_x) - eps u_xxxx`.
pub fn step_biharmonic(u: &Field, flux: &FluxFunction, epsilon: f64, dt: f64) -> Result<Field> {
    BfheatStepper::new(u.grid(), Regularization::Biharmonic, flux.clone(), epsilon, dt)?.step(u)
}

/// One pseudo-parabolic step: `(I - eps d_xx)(u+ - u) = dt * d/dx phi(u_x)`.
pub fn step_pseudoparabolic(
    u: &Field,
    flux: &FluxFunction,
    epsilon: f64,
    dt: f64,
) -> Result<Field> {
    BfheatStepper::new(
        u.grid(),
        Regularization::PseudoParabolic,
        flux.clone(),
        epsilon,
        dt,
    )?
    .step(u)
}

/// Histogram of cell gradients: the empirical stand-in for the gradient
/// Young measure.
#[derive(Debug, Clone)]
pub struct GradientHistogram {
    /// `bins + 1` edges covering the observed gradient range.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl GradientHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Splits the bins at gradient 0 and reports the two side maxima plus
    /// the saddle between them: `index = saddle_count / min(peak counts)`.
    /// Small values mean a clean two-peak structure.
    pub fn bimodality(&self) -> Option<Bimodality> {
        let nb = self.counts.len();
        let mut left: Option<usize> = None;
        let mut right: Option<usize> = None;
        for i in 0..nb {
            let c = self.bin_center(i);
            if c < 0.0 {
                if left.is_none_or(|l| self.counts[i] > self.counts[l]) {
                    left = Some(i);
                }
            } else if right.is_none_or(|r| self.counts[i] > self.counts[r]) {
                right = Some(i);
            }
        }
        let (l, r) = (left?, right?);
        if self.counts[l] == 0 || self.counts[r] == 0 {
            return None;
        }
        let saddle = (l..=r).map(|i| self.counts[i]).min().unwrap();
        Some(Bimodality {
            left_peak: self.bin_center(l),
            right_peak: self.bin_center(r),
            index: saddle as f64 / self.counts[l].min(self.counts[r]) as f64,
        })
    }
}

/// Two-sided peak structure of a gradient histogram.
#[derive(Debug, Clone, Copy)]
pub struct Bimodality {
    pub left_peak: f64,
    pub right_peak: f64,
    /// Saddle count over the smaller peak count.
    pub index: f64,
}

/// Histogram of the cell gradients of `u` with `bins >= 8` equal-width bins
/// covering the observed range.
pub fn young_histogram(u: &Field, bins: usize) -> Result<GradientHistogram> {
    if bins < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 bins, got {bins}"
        )));
    }
    let p = cell_gradients(u);
    let mut lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &q in &p {
        let mut i = ((q - lo) / width) as usize;
        if i >= bins {
            i = bins - 1;
        }
        counts[i] += 1;
    }
    Ok(GradientHistogram { edges, counts })
}

/// Per-(epsilon, regularisation) run summary.
#[derive(Debug, Clone)]
pub struct RegularizationRun {
    pub epsilon: f64,
    pub regularization: Regularization,
    pub final_field: Field,
    pub histogram: GradientHistogram,
    /// Energy sampled at the stored times.
    pub energy_series: Vec<(f64, f64)>,
    /// Largest single-step energy increase observed (0 when dissipative).
    pub max_energy_increase: f64,
}

/// Comparison of both regularisations across an epsilon list.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub epsilons: Vec<f64>,
    pub runs: Vec<RegularizationRun>,
    /// L2 distance between the two regularisations' finals per epsilon.
    pub pairwise_l2: Vec<f64>,
}

fn run_one(
    u0: &Field,
    reg: Regularization,
    flux: &FluxFunction,
    epsilon: f64,
    step: StepControl,
    bins: usize,
) -> Result<RegularizationRun> {
    let stepper = BfheatStepper::new(u0.grid(), reg, flux.clone(), epsilon, step.dt)?;
    let full = step.full_steps();
    let rem = step.remainder();
    let mut u = u0.clone();
    let mut energy_series = vec![(0.0, stepper.energy(&u))];
    let mut prev_energy = energy_series[0].1;
    let mut max_increase = 0.0f64;
    for k in 1..=full {
        u = stepper.step(&u)?;
        let e = stepper.energy(&u);
        max_increase = max_increase.max(e - prev_energy);
        prev_energy = e;
        if k % step.store_every == 0 && !(k == full && rem == 0.0) {
            energy_series.push((k as f64 * step.dt, e));
        }
    }
    if rem > 0.0 {
        let tail = BfheatStepper::new(u0.grid(), reg, flux.clone(), epsilon, rem)?;
        u = tail.step(&u)?;
        let e = tail.energy(&u);
        max_increase = max_increase.max(e - prev_energy);
    }
    energy_series.push((step.t_end, stepper.energy(&u)));
    let histogram = young_histogram(&u, bins)?;
    Ok(RegularizationRun {
        epsilon,
        regularization: reg,
        final_field: u,
        histogram,
        energy_series,
        max_energy_increase: max_increase,
    })
}

/// Runs both regularisations for every epsilon in the list and reports
/// final fields, gradient histograms, energy series and pairwise distances.
pub fn regularisation_comparison(
    u0: &Field,
    flux: &FluxFunction,
    eps_list: &[f64],
    step: StepControl,
    bins: usize,
) -> Result<ComparisonReport> {
    if eps_list.is_empty() || eps_list.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter(
            "epsilon list must be nonempty and positive".into(),
        ));
    }
    let mut runs = Vec::new();
    let mut pairwise = Vec::new();
    for &eps in eps_list {
        let bi = run_one(u0, Regularization::Biharmonic, flux, eps, step, bins)?;
        let ps = run_one(u0, Regularization::PseudoParabolic, flux, eps, step, bins)?;
        pairwise.push(bi.final_field.l2_distance(&ps.final_field)?);
        runs.push(bi);
        runs.push(ps);
    }
    Ok(ComparisonReport {
        epsilons: eps_list.to_vec(),
        runs,
        pairwise_l2: pairwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::dft;
    use crate::stencil::{diff2_symbol, diff4_symbol};
    use std::f64::consts::PI;

    #[test]
    fn constants_are_fixed_points() {
        let g = Grid1D::new(0.0, 1.0, 32, BcKind::Periodic).unwrap();
        let u = Field::from_fn(g, |_| 1.3);
        let flux = FluxFunction::Cubic;
        let b = step_biharmonic(&u, &flux, 1e-3, 1e-6).unwrap();
        let p = step_pseudoparabolic(&u, &flux, 1e-3, 1e-6).unwrap();
        assert!(b.linf_distance(&u).unwrap() < 1e-14);
        assert!(p.linf_distance(&u).unwrap() < 1e-14);
    }

    #[test]
    fn cubic_flux_shape() {
        let f = FluxFunction::Cubic;
        assert_eq!(f.phi(0.0), 0.0);
        assert_eq!(f.phi(1.0), 0.0);
        let p = 1.0 / 3.0f64.sqrt();
        assert!(f.dphi(p * 0.99) < 0.0, "inside the spinodal band");
        assert!(f.dphi(p * 1.01) > 0.0, "stable branch");
        assert!(f.dphi(1.0) > 0.0);
        // Double-well energy: minima W(+-1) = -1/4, bounded below.
        assert!((f.energy_density(1.0) + 0.25).abs() < 1e-15);
        assert!(f.energy_density(2.0) > 0.0);
    }

    #[test]
    fn piecewise_linear_flux_evaluates_and_integrates() {
        // Hat-shaped nonmonotone flux: slopes +1, -1, +1 with breaks at -1, 1.
        let f = FluxFunction::PiecewiseLinear(
            PiecewiseLinearFlux::new(vec![-1.0, 1.0], vec![1.0, -1.0, 1.0]).unwrap(),
        );
        assert_eq!(f.phi(0.0), 0.0);
        assert!((f.phi(1.0) - (-1.0)).abs() < 1e-15);
        assert!((f.phi(-1.0) - 1.0).abs() < 1e-15);
        assert!((f.phi(2.0) - 0.0).abs() < 1e-15);
        assert_eq!(f.dphi(0.0), -1.0);
        assert_eq!(f.dphi(-2.0), 1.0);
        // W(2) = int_0^2 phi: -0.5 at 1, then rises by -1+0.5 => -1.
        assert!((f.energy_density(2.0) - (-1.0)).abs() < 1e-14);
        assert!(PiecewiseLinearFlux::new(vec![1.0, -1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(PiecewiseLinearFlux::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn biharmonic_mode_amplification_matches_symbol() {
        // Linear flux: one step multiplies mode k by
        // (1 - a dt k2_h) / (1 + dt eps k4_h), checked to 1e-10 per mode.
        let n = 64;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let flux = FluxFunction::linear(1.0).unwrap();
        let eps = 1e-3;
        let dt = 1e-6;
        let u0 = Field::from_fn(g, |x| {
            (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos() + 0.25 * (14.0 * PI * x).sin()
        });
        let u1 = step_biharmonic(&u0, &flux, eps, dt).unwrap();
        let s0 = dft(u0.values()).unwrap();
        let s1 = dft(u1.values()).unwrap();
        for k in 0..n {
            let kk = if k <= n / 2 { k } else { n - k };
            let amp = (1.0 + dt * diff2_symbol(g, kk)) / (1.0 + dt * eps * diff4_symbol(g, kk));
            let expected = s0[k] * amp;
            assert!(
                (s1[k] - expected).norm() <= 1e-10 * s0[k].norm().max(1.0),
                "mode {k}"
            );
        }
    }

    #[test]
    fn pseudoparabolic_mode_amplification_matches_symbol() {
        let n = 64;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let flux = FluxFunction::linear(1.0).unwrap();
        let eps = 0.02;
        let dt = 1e-4;
        for k in [1usize, 3, 9] {
            let u0 = Field::from_fn(g, |x| (2.0 * PI * k as f64 * x).sin());
            let u1 = step_pseudoparabolic(&u0, &flux, eps, dt).unwrap();
            let k2 = -diff2_symbol(g, k);
            let amp = 1.0 - dt * k2 / (1.0 + eps * k2);
            for (a, b) in u1.values().iter().zip(u0.values()) {
                assert!((a - b * amp).abs() < 1e-12, "mode {k}");
            }
        }
    }

    #[test]
    fn pseudoparabolic_damping_is_monotone_in_epsilon() {
        // ||u+ - u||_2 <= dt ||div phi(grad u)||_2 / (1 + eps k1_h^2) on the
        // mean-zero subspace, and the increment shrinks as eps grows.
        let n = 64;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let flux = FluxFunction::Cubic;
        let u = Field::from_fn(g, |x| 0.3 * (2.0 * PI * x).sin() + 0.1 * (6.0 * PI * x).cos());
        let dt = 1e-5;
        let div_norm = {
            let probe = step_pseudoparabolic(&u, &flux, 1e-12, dt).unwrap();
            // At eps ~ 0 the increment is dt * div itself.
            probe.l2_distance(&u).unwrap() / dt
        };
        let k1 = -crate::stencil::diff2_symbol(g, 1);
        let mut prev = f64::INFINITY;
        for eps in [0.1, 1.0, 10.0, 100.0] {
            let out = step_pseudoparabolic(&u, &flux, eps, dt).unwrap();
            let inc = out.l2_distance(&u).unwrap();
            let bound = dt * div_norm / (1.0 + eps * k1);
            assert!(inc <= bound * (1.0 + 1e-9), "eps {eps}: {inc} > {bound}");
            assert!(inc <= prev, "damping not monotone at eps {eps}");
            prev = inc;
        }
    }

    #[test]
    fn both_steps_conserve_mass_on_periodic_grids() {
        let g = Grid1D::new(0.0, 1.0, 128, BcKind::Periodic).unwrap();
        let flux = FluxFunction::Cubic;
        let mut ub = Field::from_fn(g, |x| 0.13 * (2.0 * PI * x).sin());
        let mut up = ub.clone();
        let m0 = ub.mass();
        let bi = BfheatStepper::new(g, Regularization::Biharmonic, flux.clone(), 1e-4, 2e-6)
            .unwrap();
        let ps =
            BfheatStepper::new(g, Regularization::PseudoParabolic, flux, 1e-4, 2e-6).unwrap();
        for _ in 0..50 {
            ub = bi.step(&ub).unwrap();
            up = ps.step(&up).unwrap();
            assert!((ub.mass() - m0).abs() < 1e-10);
            assert!((up.mass() - m0).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_flux_decay_matches_spectral_factor() {
        // u0 = sin(2 pi x): after t = 0.01 the mode has shrunk by
        // e^{-((2pi)^2 + eps (2pi)^4) t} within 1e-4 relative.
        let n = 256;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let flux = FluxFunction::linear(1.0).unwrap();
        let eps = 1e-3;
        let dt = 1e-6;
        let t_end = 0.01;
        let stepper =
            BfheatStepper::new(g, Regularization::Biharmonic, flux, eps, dt).unwrap();
        let mut u = Field::from_fn(g, |x| (2.0 * PI * x).sin());
        for _ in 0..(t_end / dt).round() as usize {
            u = stepper.step(&u).unwrap();
        }
        let w = 2.0 * PI;
        let factor = (-(w * w + eps * w.powi(4)) * t_end).exp();
        let mid = n / 4; // x = 0.25 where sin = 1
        let got = u.values()[mid];
        assert!(
            ((got - factor) / factor).abs() < 1e-4,
            "got {got}, expected {factor}"
        );
    }

    #[test]
    fn unstable_dt_is_rejected() {
        let g = Grid1D::new(0.0, 1.0, 64, BcKind::Periodic).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * PI * x).sin());
        match step_biharmonic(&u, &FluxFunction::linear(1.0).unwrap(), 1e-4, 0.1) {
            Err(Error::UnstableStep { bound, .. }) => assert!(bound < 0.1),
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn histogram_of_linear_profile_is_a_single_bin() {
        // Dyadic values keep every cell slope bitwise identical, so the
        // whole mass lands in the one bin containing the slope.
        let g = Grid1D::new(0.0, 1.0, 17, BcKind::Neumann0).unwrap();
        let u = Field::from_values_raw(g, (0..17).map(|j| j as f64 * 0.25).collect());
        let h = young_histogram(&u, 8).unwrap();
        assert_eq!(h.total(), 16);
        let full: Vec<usize> = (0..8).filter(|&i| h.counts[i] > 0).collect();
        assert_eq!(full.len(), 1, "{:?}", h.counts);
        let i = full[0];
        assert!(h.edges[i] <= 4.0 && 4.0 <= h.edges[i + 1]);
        assert_eq!(h.counts[i], 16);
    }

    #[test]
    fn histogram_of_sawtooth_splits_evenly() {
        let n = 64;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let dx = g.dx();
        // Alternating slopes +1 / -1 per cell.
        let mut vals = vec![0.0; n];
        for j in 1..n {
            vals[j] = vals[j - 1] + if j % 2 == 1 { dx } else { -dx };
        }
        let u = Field::from_values_raw(g, vals);
        let h = young_histogram(&u, 9).unwrap();
        assert_eq!(h.total(), n as u64);
        assert_eq!(h.counts[0], n as u64 / 2);
        assert_eq!(h.counts[8], n as u64 / 2);
        assert!(h.counts[1..8].iter().all(|&c| c == 0));
    }

    #[test]
    fn histogram_requires_enough_bins() {
        let g = Grid1D::new(0.0, 1.0, 16, BcKind::Periodic).unwrap();
        assert!(young_histogram(&Field::zeros(g), 7).is_err());
    }

    #[test]
    fn cubic_spinodal_run_develops_bimodal_gradients() {
        // Initial slope amplitude 0.817 sits in the unstable range
        // (1/sqrt(3), 1); by T = 0.5 the gradients segregate towards the
        // stable branches p = +-1.
        let n = 128;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let u0 = Field::from_fn(g, |x| 0.13 * (2.0 * PI * x).sin());
        // Gradients saturate near the +-1 branches (|phi'| <= ~3.5), so
        // the stability bound dx^2 / (2 max|phi'|) allows dt ~ 8e-6.
        let eps = 1e-4;
        let dt = 4e-6;
        let stepper =
            BfheatStepper::new(g, Regularization::Biharmonic, FluxFunction::Cubic, eps, dt)
                .unwrap();
        let mut u = u0;
        let steps = (0.5 / dt).round() as usize;
        for _ in 0..steps {
            u = stepper.step(&u).unwrap();
        }
        let h = young_histogram(&u, 25).unwrap();
        let bm = h.bimodality().expect("two-sided histogram expected");
        assert!(
            (-1.2..=-0.8).contains(&bm.left_peak),
            "left peak {}",
            bm.left_peak
        );
        assert!(
            (0.8..=1.2).contains(&bm.right_peak),
            "right peak {}",
            bm.right_peak
        );
        assert!(bm.index < 0.5, "bimodality index {}", bm.index);
    }

    #[test]
    fn comparison_of_zero_data_is_all_zero() {
        let g = Grid1D::new(0.0, 1.0, 64, BcKind::Periodic).unwrap();
        let step = StepControl::new(1e-5, 1e-3, 10).unwrap();
        let report = regularisation_comparison(
            &Field::zeros(g),
            &FluxFunction::Cubic,
            &[1e-3],
            step,
            16,
        )
        .unwrap();
        assert!(report.pairwise_l2.iter().all(|&d| d == 0.0));
        for run in &report.runs {
            assert_eq!(run.final_field.linf(), 0.0);
            assert!(run.energy_series.iter().all(|&(_, e)| e == 0.0));
        }
    }

    #[test]
    fn linear_flux_regularisations_converge_to_heat_profile() {
        // For phi(p) = p both regularised equations approach the heat
        // equation as eps -> 0; compare against the exact spectral factor.
        let n = 128;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let u0 = Field::from_fn(g, |x| (2.0 * PI * x).sin());
        let t_end = 0.01;
        let step = StepControl::new(1e-6, t_end, usize::MAX).unwrap();
        let eps_list = [1e-3, 1e-4];
        let report = regularisation_comparison(
            &u0,
            &FluxFunction::linear(1.0).unwrap(),
            &eps_list,
            step,
            16,
        )
        .unwrap();
        let w = 2.0 * PI;
        let heat = Field::from_fn(g, |x| (-(w * w) * t_end).exp() * (w * x).sin());
        let dx = g.dx();
        for run in &report.runs {
            let err = run.final_field.linf_distance(&heat).unwrap();
            // Deviation from the heat profile ~ amp * eps k^4 t ~ 10.3 eps
            // in this configuration; 15 covers both regularisations.
            let budget = 15.0 * (run.epsilon + dx * dx);
            assert!(
                err <= budget,
                "{} eps={}: err {err} > {budget}",
                run.regularization.name(),
                run.epsilon
            );
        }
        // Pairwise distance shrinks with eps (loose factor-10 trend check).
        assert!(report.pairwise_l2[1] <= 10.0 * report.pairwise_l2[0]);
    }

    #[test]
    fn stable_regime_regularizations_agree_with_heat() {
        // Flux monotone (slope 1) in a neighborhood of zero gradient:
        // data with small gradients behaves classically and the two
        // regularisations agree with the heat profile within C (eps + dx^2).
        let flux = FluxFunction::PiecewiseLinear(
            PiecewiseLinearFlux::new(vec![1.0, 2.0], vec![1.0, -1.0, 1.0]).unwrap(),
        );
        let n = 128;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let u0 = Field::from_fn(g, |x| 0.05 * (2.0 * PI * x).sin());
        let t_end = 0.01;
        let step = StepControl::new(1e-6, t_end, usize::MAX).unwrap();
        let report =
            regularisation_comparison(&u0, &flux, &[1e-3, 1e-4], step, 16).unwrap();
        let w = 2.0 * PI;
        let heat = Field::from_fn(g, |x| 0.05 * (-(w * w) * t_end).exp() * (w * x).sin());
        let dx = g.dx();
        for run in &report.runs {
            let err = run.final_field.linf_distance(&heat).unwrap();
            assert!(err <= 15.0 * (run.epsilon + dx * dx) * 0.05 + 1e-12,
                "{} eps={}: {err}", run.regularization.name(), run.epsilon);
        }
        assert!(report.pairwise_l2[1] <= report.pairwise_l2[0] * (1.0 + 1e-9));
    }

    #[test]
    fn biharmonic_energy_dissipates_on_cubic_run() {
        let n = 128;
        let g = Grid1D::new(0.0, 1.0, n, BcKind::Periodic).unwrap();
        let u0 = Field::from_fn(g, |x| 0.13 * (2.0 * PI * x).sin());
        let step = StepControl::new(4e-6, 0.05, 1000).unwrap();
        let report =
            regularisation_comparison(&u0, &FluxFunction::Cubic, &[1e-4], step, 16).unwrap();
        let bi = report
            .runs
            .iter()
            .find(|r| r.regularization == Regularization::Biharmonic)
            .unwrap();
        assert!(
            bi.max_energy_increase <= 1e-8,
            "energy increased by {}",
            bi.max_energy_increase
        );
    }
}
