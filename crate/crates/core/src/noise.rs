//! Regularization by noise: additive space-time white noise for the heat
//! equation (semi-implicit Euler-Maruyama) and Stratonovich transport via
//! Monte Carlo characteristics.
//!
//! Reproducibility contract: every sample draws from its own counter-derived
//! stream (`base_seed ^ sample_index`), and ensemble statistics merge in
//! fixed sample order, so results are bitwise independent of the thread
//! schedule.
//!
//! The white-noise increment per interior node and step has standard
//! deviation `noise_amp * sqrt(dt/dx)`: the standard finite-difference
//! discretization of space-time white noise, whose discrete covariance is
//! `noise_amp^2 * dt / dx * I` per step. For the transport characteristics
//! the noise coefficient is constant, so the Stratonovich and Ito readings
//! coincide and plain Euler-Maruyama is exact in distribution; a Heun
//! drift corrector is available behind a flag for non-constant extensions.

use crate::error::{Error, Result};
use crate::field::{Field, Trajectory};
use crate::grid::{BcKind, Grid1D, StepControl};
use crate::stencil::{OperatorKind, ShiftedOperator};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Base seed from which per-sample streams derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededRng {
    pub seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { seed }
    }

    /// Independent stream for one sample: `seed XOR index`.
    pub fn stream(&self, sample_index: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.seed ^ sample_index)
    }
}

/// Per-node ensemble mean and unbiased variance.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub mean: Field,
    pub variance: Field,
    pub n_samples: usize,
}

/// One-pass Welford accumulation over per-sample nodal vectors, merged in
/// the order given.
fn welford(grid: Grid1D, samples: &[Vec<f64>]) -> EnsembleStats {
    let n = grid.len();
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    for (k, sample) in samples.iter().enumerate() {
        let count = (k + 1) as f64;
        for j in 0..n {
            let delta = sample[j] - mean[j];
            mean[j] += delta / count;
            m2[j] += delta * (sample[j] - mean[j]);
        }
    }
    let denom = (samples.len().max(2) - 1) as f64;
    let variance: Vec<f64> = m2.iter().map(|v| v / denom).collect();
    EnsembleStats {
        mean: Field::from_values_raw(grid, mean),
        variance: Field::from_values_raw(grid, variance),
        n_samples: samples.len(),
    }
}

/// One stochastic heat path with semi-implicit Euler-Maruyama:
/// `(I - dt d_xx) u+ = u + dt f(u) + noise_amp sqrt(dt/dx) xi` with
/// independent standard normals per interior node per step. Dirichlet
/// boundaries stay pinned at zero. Requires `dt <= 1e-2 * t_end` for
/// statistical resolution.
pub fn spde_heat_path(
    u0: &Field,
    forcing: &dyn Fn(f64) -> f64,
    noise_amp: f64,
    step: StepControl,
    rng: &mut ChaCha12Rng,
) -> Result<Trajectory> {
    let grid = u0.grid();
    if grid.bc() != BcKind::Dirichlet0 {
        return Err(Error::InvalidGrid(
            "stochastic heat path requires a Dirichlet grid".into(),
        ));
    }
    if noise_amp < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise amplitude must be nonnegative, got {noise_amp}"
        )));
    }
    if step.dt > 1e-2 * step.t_end {
        return Err(Error::InvalidParameter(format!(
            "dt = {} too coarse for statistical resolution; need dt <= 0.01 t_end = {}",
            step.dt,
            1e-2 * step.t_end
        )));
    }
    let n = grid.len();
    let dx = grid.dx();
    let full = step.full_steps();
    let rem = step.remainder();
    let advance = |u: &Field,
                       dt: f64,
                       solver: &ShiftedOperator,
                       rng: &mut ChaCha12Rng|
     -> Field {
        let scale = noise_amp * (dt / dx).sqrt();
        let mut rhs = vec![0.0; n];
        for j in 1..n - 1 {
            let xi: f64 = rng.sample(StandardNormal);
            rhs[j] = u.values()[j] + dt * forcing(u.values()[j]) + scale * xi;
        }
        Field::from_values_raw(grid, solver.solve(&rhs))
    };
    let solver = ShiftedOperator::new(grid, OperatorKind::Diff2, step.dt)?;
    let mut u = u0.clone();
    let mut traj = vec![(0.0, u.clone())];
    for k in 1..=full {
        u = advance(&u, step.dt, &solver, rng);
        if k % step.store_every == 0 && !(k == full && rem == 0.0) {
            traj.push((k as f64 * step.dt, u.clone()));
        }
    }
    if rem > 0.0 {
        let tail = ShiftedOperator::new(grid, OperatorKind::Diff2, rem)?;
        u = advance(&u, rem, &tail, rng);
    }
    traj.push((step.t_end, u));
    Ok(traj)
}

/// Monte Carlo ensemble of stochastic heat paths: per-sample derived seeds,
/// one-pass statistics merged in sample order (schedule-independent).
pub fn heat_ensemble<F>(
    u0: &Field,
    forcing: F,
    noise_amp: f64,
    step: StepControl,
    n_samples: usize,
    seed: SeededRng,
) -> Result<EnsembleStats>
where
    F: Fn(f64) -> f64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "ensemble needs at least 2 samples, got {n_samples}"
        )));
    }
    let finals: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i as u64);
            spde_heat_path(u0, &|u| forcing(u), noise_amp, step, &mut rng)
                .map(|traj| traj.last().unwrap().1.values().to_vec())
        })
        .collect::<Result<_>>()?;
    Ok(welford(u0.grid(), &finals))
}

/// Drift field of the transport characteristics.
#[derive(Debug, Clone, Copy)]
pub enum DriftField {
    Constant(f64),
    /// `b(x) = sign(x) sqrt(|x|)`: non-Lipschitz at 0.
    SquareRoot,
    Smooth(fn(f64) -> f64),
}

impl DriftField {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DriftField::Constant(c) => c,
            DriftField::SquareRoot => x.signum() * x.abs().sqrt(),
            DriftField::Smooth(f) => f(x),
        }
    }
}

/// Monte Carlo estimate of the transport mean.
#[derive(Debug, Clone)]
pub struct TransportEstimate {
    pub mean: Field,
    pub variance: Field,
    pub n_samples: usize,
    /// Characteristics that left the guard interval (frozen there, counted).
    pub escaped: usize,
}

/// Estimates `E[u(x, t)]` for Stratonovich transport by backward
/// characteristics `dX = -b(X) ds + dW` from every grid node, one shared
/// Brownian path per sample (the stochastic flow drives all nodes at once).
/// Characteristics leaving the guard interval (3x the domain width) are
/// frozen and counted, never extrapolated.
pub fn stochastic_transport_mean<U>(
    u0: U,
    b: DriftField,
    t: f64,
    dt: f64,
    grid: Grid1D,
    n_samples: usize,
    seed: SeededRng,
    heun_corrector: bool,
) -> Result<TransportEstimate>
where
    U: Fn(f64) -> f64 + Sync,
{
    if !(t > 0.0) || !(dt > 0.0) || dt > t {
        return Err(Error::InvalidParameter(format!(
            "need 0 < dt <= t, got dt = {dt}, t = {t}"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "ensemble needs at least 2 samples, got {n_samples}"
        )));
    }
    let width = grid.width();
    let guard_lo = grid.x_min() - width;
    let guard_hi = grid.x_max() + width;
    let n = grid.len();
    let steps = (t / dt).ceil() as usize;
    let results: Vec<(Vec<f64>, usize)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i as u64);
            let mut x: Vec<f64> = (0..n).map(|j| grid.node(j)).collect();
            let mut frozen = vec![false; n];
            let mut remaining = t;
            for _ in 0..steps {
                let h = remaining.min(dt);
                let dw = h.sqrt() * rng.sample::<f64, _>(StandardNormal);
                for (xj, fr) in x.iter_mut().zip(&mut frozen) {
                    if *fr {
                        continue;
                    }
                    let drift = -b.eval(*xj);
                    let mut next = *xj + drift * h + dw;
                    if heun_corrector {
                        let drift2 = -b.eval(next);
                        next = *xj + 0.5 * (drift + drift2) * h + dw;
                    }
                    if next < guard_lo || next > guard_hi {
                        *fr = true;
                        next = next.clamp(guard_lo, guard_hi);
                    }
                    *xj = next;
                }
                remaining -= h;
            }
            let escapes = frozen.iter().filter(|f| **f).count();
            (x.iter().map(|&xi| u0(xi)).collect(), escapes)
        })
        .collect();
    let escaped = results.iter().map(|(_, e)| e).sum();
    let samples: Vec<Vec<f64>> = results.into_iter().map(|(v, _)| v).collect();
    let stats = welford(grid, &samples);
    Ok(TransportEstimate {
        mean: stats.mean,
        variance: stats.variance,
        n_samples,
        escaped,
    })
}

/// Endpoint spread of characteristics started around the non-Lipschitz
/// point of the square-root drift, with and without noise. Qualitative
/// illustration: no pass criterion.
#[derive(Debug, Clone)]
pub struct CoalescenceReport {
    pub starts: Vec<f64>,
    pub endpoints_noise_off: Vec<f64>,
    pub endpoints_noise_on: Vec<f64>,
    /// Empirical standard deviation of the endpoints.
    pub spread_noise_off: f64,
    pub spread_noise_on: f64,
    pub t: f64,
}

fn spread(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Integrates `dX = -b(X) ds + amp dW` forward from each start (independent
/// noise per path) and reports the endpoint spreads for amp = 0 and 1.
pub fn coalescence_diagnostic(
    starts: &[f64],
    t: f64,
    dt: f64,
    seed: SeededRng,
) -> Result<CoalescenceReport> {
    if starts.is_empty() || !(t > 0.0) || !(dt > 0.0) || dt > t {
        return Err(Error::InvalidParameter(
            "need nonempty starts and 0 < dt <= t".into(),
        ));
    }
    let b = DriftField::SquareRoot;
    let steps = (t / dt).ceil() as usize;
    let run = |amp: f64| -> Vec<f64> {
        starts
            .iter()
            .enumerate()
            .map(|(i, &x0)| {
                let mut rng = seed.stream(i as u64);
                let mut x = x0;
                let mut remaining = t;
                for _ in 0..steps {
                    let h = remaining.min(dt);
                    let dw: f64 = rng.sample::<f64, _>(StandardNormal) * h.sqrt();
                    x += -b.eval(x) * h + amp * dw;
                    remaining -= h;
                }
                x
            })
            .collect()
    };
    let endpoints_noise_off = run(0.0);
    let endpoints_noise_on = run(1.0);
    Ok(CoalescenceReport {
        starts: starts.to_vec(),
        spread_noise_off: spread(&endpoints_noise_off),
        spread_noise_on: spread(&endpoints_noise_on),
        endpoints_noise_off,
        endpoints_noise_on,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imex::{LinearPart, ThetaStepper};
    use std::f64::consts::PI;

    fn dirichlet_grid(n: usize) -> Grid1D {
        Grid1D::new(0.0, 1.0, n, BcKind::Dirichlet0).unwrap()
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let g = dirichlet_grid(32);
        let u0 = Field::from_fn(g, |x| (PI * x).sin());
        let step = StepControl::new(1e-3, 0.2, 50).unwrap();
        let run = || {
            let mut rng = SeededRng::new(42).stream(7);
            spde_heat_path(&u0, &|_| 0.0, 1.0, step, &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        for ((ta, ua), (tb, ub)) in a.iter().zip(&b) {
            assert_eq!(ta, tb);
            assert_eq!(ua.values(), ub.values());
        }
    }

    #[test]
    fn ensemble_is_schedule_independent() {
        let g = dirichlet_grid(16);
        let u0 = Field::zeros(g);
        let step = StepControl::new(2e-3, 0.2, usize::MAX).unwrap();
        let run_with_threads = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                heat_ensemble(&u0, |_| 0.0, 1.0, step, 64, SeededRng::new(9)).unwrap()
            })
        };
        let a = run_with_threads(1);
        let b = run_with_threads(4);
        assert_eq!(a.mean.values(), b.mean.values());
        assert_eq!(a.variance.values(), b.variance.values());
    }

    #[test]
    fn zero_noise_matches_deterministic_solver_exactly() {
        let g = dirichlet_grid(64);
        let u0 = Field::from_fn(g, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).sin());
        let step = StepControl::new(1e-3, 0.1, usize::MAX).unwrap();
        let mut rng = SeededRng::new(1).stream(0);
        let noisy = spde_heat_path(&u0, &|u| 0.5 * u, 0.0, step, &mut rng)
            .unwrap()
            .pop()
            .unwrap()
            .1;
        // Deterministic reference: backward Euler in the diffusion with the
        // same explicit forcing.
        let stepper = ThetaStepper::new(g, LinearPart::Diff2 { coeff: 1.0 }, step.dt, 1.0).unwrap();
        let mut u = u0;
        for _ in 0..100 {
            let f = Field::from_values_raw(
                g,
                u.values().iter().map(|&v| 0.5 * v).collect(),
            );
            u = stepper.step(&u, &|_| f.clone());
        }
        assert!(noisy.linf_distance(&u).unwrap() <= 1e-12);
    }

    #[test]
    fn deterministic_heat_decay_matches_spectral_solution() {
        let g = Grid1D::new(0.0, 1.0, 129, BcKind::Dirichlet0).unwrap();
        let u0 = Field::from_fn(g, |x| (PI * x).sin());
        let t_end = 0.1;
        // Backward-Euler rate bias ~ t dt lambda^2 / 2 must stay below the
        // 1e-4 target, hence the small step.
        let step = StepControl::new(2e-5, t_end, usize::MAX).unwrap();
        let mut rng = SeededRng::new(3).stream(0);
        let u = spde_heat_path(&u0, &|_| 0.0, 0.0, step, &mut rng)
            .unwrap()
            .pop()
            .unwrap()
            .1;
        let exact = Field::from_fn(g, |x| (-PI * PI * t_end).exp() * (PI * x).sin());
        assert!(u.linf_distance(&exact).unwrap() < 1e-4);
    }

    #[test]
    fn dt_guard_enforced() {
        let g = dirichlet_grid(16);
        let step = StepControl::new(0.05, 1.0, 1).unwrap();
        let mut rng = SeededRng::new(0).stream(0);
        assert!(spde_heat_path(&Field::zeros(g), &|_| 0.0, 1.0, step, &mut rng).is_err());
    }

    #[test]
    fn ensemble_mean_is_centered() {
        let g = dirichlet_grid(32);
        let u0 = Field::zeros(g);
        let step = StepControl::new(2e-3, 0.3, usize::MAX).unwrap();
        let stats = heat_ensemble(&u0, |_| 0.0, 1.0, step, 2000, SeededRng::new(11)).unwrap();
        for j in 1..g.len() - 1 {
            let se = (stats.variance.values()[j] / stats.n_samples as f64).sqrt();
            assert!(
                stats.mean.values()[j].abs() <= 3.5 * se,
                "node {j}: mean {} vs 3.5 se {}",
                stats.mean.values()[j],
                3.5 * se
            );
        }
    }

    #[test]
    fn forced_identical_streams_have_zero_variance() {
        // Seed chosen so sample 0 and 1 xor to the same stream value:
        // use two explicit identical runs merged manually instead.
        let g = dirichlet_grid(16);
        let u0 = Field::zeros(g);
        let step = StepControl::new(2e-3, 0.2, usize::MAX).unwrap();
        let mut rng = SeededRng::new(5).stream(3);
        let a = spde_heat_path(&u0, &|_| 0.0, 1.0, step, &mut rng)
            .unwrap()
            .pop()
            .unwrap()
            .1;
        let samples = vec![a.values().to_vec(), a.values().to_vec()];
        let stats = welford(g, &samples);
        assert!(stats.variance.linf() == 0.0);
        // And zero noise amplitude gives exactly zero variance.
        let stats0 =
            heat_ensemble(&u0, |_| 0.0, 0.0, step, 8, SeededRng::new(5)).unwrap();
        assert_eq!(stats0.variance.linf(), 0.0);
    }

    #[test]
    fn stationary_variance_approaches_parabola() {
        // Var[u(x)] -> x(1-x)/2: the discrete spatial profile is exact for
        // the 3-point stencil, dt bias ~ 1.5%, Monte Carlo noise ~ 4.5%
        // relative at 1000 samples.
        let g = dirichlet_grid(64);
        let u0 = Field::zeros(g);
        let step = StepControl::new(2.5e-4, 2.0, usize::MAX).unwrap();
        let stats = heat_ensemble(&u0, |_| 0.0, 1.0, step, 1000, SeededRng::new(2024)).unwrap();
        let n = g.len();
        for j in (n / 2 - 2)..=(n / 2 + 2) {
            let x = g.node(j);
            let expected = x * (1.0 - x) / 2.0;
            let got = stats.variance.values()[j];
            assert!(
                ((got - expected) / expected).abs() <= 0.2,
                "node {j}: var {got} vs {expected}"
            );
        }
    }

    #[test]
    fn confidence_interval_width_scales_inversely_with_sqrt_n() {
        // Quadrupling the sample count halves 3 sqrt(Var/n) up to the
        // fluctuation of the variance estimate itself.
        let g = dirichlet_grid(32);
        let u0 = Field::zeros(g);
        let step = StepControl::new(2e-3, 0.5, usize::MAX).unwrap();
        let width = |n_samples: usize| {
            let stats =
                heat_ensemble(&u0, |_| 0.0, 1.0, step, n_samples, SeededRng::new(99)).unwrap();
            let j = g.len() / 2;
            3.0 * (stats.variance.values()[j] / n_samples as f64).sqrt()
        };
        let ratio = width(500) / width(2000);
        assert!((1.8..=2.2).contains(&ratio), "CI width ratio {ratio}");
    }

    #[test]
    fn transport_preserves_constants_exactly() {
        let g = Grid1D::new(-2.0, 2.0, 32, BcKind::Periodic).unwrap();
        let est = stochastic_transport_mean(
            |_| 1.0,
            DriftField::SquareRoot,
            0.5,
            1e-2,
            g,
            16,
            SeededRng::new(7),
            false,
        )
        .unwrap();
        for j in 0..g.len() {
            assert_eq!(est.mean.values()[j], 1.0);
            assert_eq!(est.variance.values()[j], 0.0);
        }
    }

    #[test]
    fn driftless_transport_mean_is_half_diffusive_heat() {
        // E[u0(x - W_t)] equals the heat semigroup with diffusivity 1/2;
        // the oracle is an independent Crank-Nicolson solve.
        let g = Grid1D::new(-4.0, 4.0, 128, BcKind::Periodic).unwrap();
        let u0 = |x: f64| (-x * x).exp();
        let t = 0.5;
        let est = stochastic_transport_mean(
            u0,
            DriftField::Constant(0.0),
            t,
            1e-3,
            g,
            4000,
            SeededRng::new(31),
            false,
        )
        .unwrap();
        assert_eq!(est.escaped, 0);
        let stepper =
            ThetaStepper::new(g, LinearPart::Diff2 { coeff: 0.5 }, 1e-4, 0.5).unwrap();
        let mut v = Field::from_fn(g, u0);
        for _ in 0..((t / 1e-4).round() as usize) {
            v = stepper.step(&v, &|f: &Field| Field::zeros(f.grid()));
        }
        for j in 0..g.len() {
            let se = (est.variance.values()[j] / est.n_samples as f64).sqrt();
            let err = (est.mean.values()[j] - v.values()[j]).abs();
            assert!(
                err <= 3.5 * se + 1.0 * 1e-3,
                "node {j}: err {err}, se {se}"
            );
        }
    }

    #[test]
    fn constant_drift_shifts_the_profile() {
        // E[u(x,t)] = (half-diffusive smoothing of u0)(x - c t); with
        // c t = integer multiple of dx the shift is exact on the grid.
        let g = Grid1D::new(-4.0, 4.0, 256, BcKind::Periodic).unwrap();
        let u0 = |x: f64| (-x * x).exp();
        let c = 1.0;
        let t = 0.5;
        let shift_nodes = (c * t / g.dx()).round() as usize;
        assert_eq!(shift_nodes as f64 * g.dx(), c * t);
        let est = stochastic_transport_mean(
            u0,
            DriftField::Constant(c),
            t,
            1e-3,
            g,
            4000,
            SeededRng::new(17),
            false,
        )
        .unwrap();
        let stepper =
            ThetaStepper::new(g, LinearPart::Diff2 { coeff: 0.5 }, 1e-4, 0.5).unwrap();
        let mut v = Field::from_fn(g, u0);
        for _ in 0..((t / 1e-4).round() as usize) {
            v = stepper.step(&v, &|f: &Field| Field::zeros(f.grid()));
        }
        let n = g.len();
        for j in 0..n {
            // The oracle is periodic while the characteristics live on the
            // line; skip the wrap-affected band near the domain edges.
            if g.node(j).abs() > 3.0 {
                continue;
            }
            // Backward characteristics shift the profile by -ct.
            let src = (j + n - shift_nodes) % n;
            let se = (est.variance.values()[j] / est.n_samples as f64).sqrt();
            let err = (est.mean.values()[j] - v.values()[src]).abs();
            assert!(err <= 3.5 * se + 1e-3, "node {j}: err {err}");
        }
    }

    #[test]
    fn heun_corrector_is_inert_for_constant_drift() {
        let g = Grid1D::new(-2.0, 2.0, 64, BcKind::Periodic).unwrap();
        let run = |heun: bool| {
            stochastic_transport_mean(
                |x: f64| x.sin(),
                DriftField::Constant(0.7),
                0.3,
                1e-2,
                g,
                32,
                SeededRng::new(5),
                heun,
            )
            .unwrap()
        };
        let plain = run(false);
        let heun = run(true);
        assert_eq!(plain.mean.values(), heun.mean.values());
    }

    #[test]
    fn escapes_are_counted_not_extrapolated() {
        let g = Grid1D::new(-1.0, 1.0, 16, BcKind::Periodic).unwrap();
        let est = stochastic_transport_mean(
            |x: f64| x,
            DriftField::Constant(-50.0),
            1.0,
            1e-2,
            g,
            8,
            SeededRng::new(1),
            false,
        )
        .unwrap();
        assert!(est.escaped > 0);
        // Frozen at the guard boundary: u0 there is finite, means bounded.
        assert!(est.mean.linf() <= 3.0 + 1e-12);
    }

    #[test]
    fn coalescence_from_exact_origin_is_deterministic() {
        let starts = vec![0.0; 16];
        let report =
            coalescence_diagnostic(&starts, 1.0, 1e-3, SeededRng::new(77)).unwrap();
        assert!(report
            .endpoints_noise_off
            .iter()
            .all(|&x| x == report.endpoints_noise_off[0]));
        assert_eq!(report.spread_noise_off, 0.0);
        assert!(report.spread_noise_on > 0.0);
    }

    #[test]
    fn coalescence_cluster_spreads_reported() {
        let starts: Vec<f64> = (0..33).map(|i| -1e-6 + 2e-6 * i as f64 / 32.0).collect();
        let report =
            coalescence_diagnostic(&starts, 1.0, 1e-3, SeededRng::new(123)).unwrap();
        // Deterministic square-root drift pulls the whole cluster into the
        // origin within 2 sqrt(|x0|) << t, after which the explicit steps
        // hover in a micro limit cycle of radius ~ dt^2/4; noise produces
        // diffusive spread.
        assert!(report.spread_noise_off <= 1e-6, "{}", report.spread_noise_off);
        assert!(report.spread_noise_on > 0.1, "{}", report.spread_noise_on);
    }
}
