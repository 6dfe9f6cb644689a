//! Activator-inhibitor reaction-diffusion-advection system, its asymmetric
//! nonlocal reduction, and the fast-inhibitor limit comparison.
//!
//! The two-component system is
//!
//! ```text
//!   u_t       = F(u) - g w + u_xx
//!   tau w_t   = h u - f w + xi w_x + D w_xx
//! ```
//!
//! As `tau -> 0` the inhibitor slaves to `w = h * G * u` with the
//! asymmetric exponential kernel `G` built from `f`, `xi`, `D`, and the
//! activator obeys the scalar nonlocal equation
//! `u_t = F(u) + u_xx - sigma * G * u`, `sigma = g h`. The default
//! configuration uses `f = 1`, for which the spec'd slaving `w0 = h G * u0`
//! and coupling strength `sigma = g h` are exact (for general `f` the slow
//! manifold is `w = (h/f) G * u`).

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BcKind, Grid1D, StepControl};
use crate::imex::{LinearPart, ThetaStepper};
use crate::kernel::Kernel;

const WIDTH_DECAY: f64 = 1e-12;
const TRUNCATION_RELATIVE: f64 = 1e-14;

/// Reaction term for the activator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reaction {
    Zero,
    /// `F(u) = u - u^3`.
    BistableCubic,
    /// `F(u) = rate * u`.
    Linear { rate: f64 },
}

impl Reaction {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::BistableCubic => u - u * u * u,
            Reaction::Linear { rate } => rate * u,
        }
    }
}

/// Parameters of the activator-inhibitor model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RDParams {
    /// Inhibitor-to-activator coupling (`-g w` in the activator equation).
    pub g: f64,
    /// Activator-to-inhibitor coupling (`h u`).
    pub h: f64,
    /// Inhibitor decay rate, `f > 0`.
    pub f: f64,
    /// Advection velocity of the inhibitor.
    pub xi: f64,
    /// Inhibitor diffusion, `D > 0`.
    pub d: f64,
    /// Inhibitor relaxation time, `tau >= 0`.
    pub tau: f64,
    /// Activator reaction term.
    pub reaction: Reaction,
}

impl RDParams {
    pub fn new(
        g: f64,
        h: f64,
        f: f64,
        xi: f64,
        d: f64,
        tau: f64,
        reaction: Reaction,
    ) -> Result<Self> {
        if !(d > 0.0) || !(f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need D > 0 and f > 0, got D = {d}, f = {f}"
            )));
        }
        if tau < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "relaxation time must be nonnegative, got {tau}"
            )));
        }
        Ok(RDParams {
            g,
            h,
            f,
            xi,
            d,
            tau,
            reaction,
        })
    }

    /// Nonlocal coupling strength `sigma = g h`.
    pub fn sigma(&self) -> f64 {
        self.g * self.h
    }

    /// Decay rate of the kernel tails: `s = sqrt(xi^2 + 4 D f)`.
    pub fn s(&self) -> f64 {
        (self.xi * self.xi + 4.0 * self.d * self.f).sqrt()
    }

    /// Closed-form kernel mass `(f/s)(2D/(s - xi) + 2D/(s + xi))`; equals 1
    /// because `s^2 - xi^2 = 4 D f`.
    pub fn analytic_kernel_mass(&self) -> f64 {
        let s = self.s();
        (self.f / s) * (2.0 * self.d / (s - self.xi) + 2.0 * self.d / (s + self.xi))
    }

    /// Homogeneous steady state of the coupled system for the bistable
    /// reaction: `u* = sqrt(1 - sigma/f)`, `w* = (h/f) u*`.
    pub fn steady_state(&self) -> Option<(f64, f64)> {
        let ratio = self.sigma() / self.f;
        if ratio >= 1.0 {
            return None;
        }
        let u = (1.0 - ratio).sqrt();
        Some((u, self.h / self.f * u))
    }
}

/// Asymmetric exponential kernel
/// `G(x) = (f/s) e^{-(s/2D)|x|} e^{xi x / 2D}`, `s = sqrt(xi^2 + 4Df)`,
/// sampled as exact cell averages at signed periodic displacements.
pub fn asym_kernel(params: &RDParams, grid: Grid1D) -> Result<Kernel> {
    if grid.bc() != BcKind::Periodic {
        return Err(Error::InvalidGrid(
            "kernel construction requires a periodic grid".into(),
        ));
    }
    let s = params.s();
    let two_d = 2.0 * params.d;
    // Decay rates right and left of the origin.
    let a_pos = (s - params.xi) / two_d;
    let a_neg = (s + params.xi) / two_d;
    let slow = a_pos.min(a_neg);
    let width = grid.width();
    let required = 2.0 * (-WIDTH_DECAY.ln()) / slow;
    if (-slow * width / 2.0).exp() >= WIDTH_DECAY {
        return Err(Error::DomainTooSmall { width, required });
    }
    let amp = params.f / s;
    // Cumulative integral of G.
    let f0 = amp / a_neg; // integral over (-inf, 0]
    let cdf = |x: f64| -> f64 {
        if x <= 0.0 {
            (amp / a_neg) * (a_neg * x).exp()
        } else {
            f0 + (amp / a_pos) * (1.0 - (-a_pos * x).exp())
        }
    };
    let n = grid.len();
    let dx = grid.dx();
    let cell = |d: f64| (cdf(d + 0.5 * dx) - cdf(d - 0.5 * dx)) / dx;
    let mut values = vec![0.0; n];
    if params.xi == 0.0 {
        // Even kernel: mirror the nonnegative side so evenness is exact as
        // sampled.
        for j in 0..=n / 2 {
            let v = cell(grid.periodic_displacement(j));
            values[j] = v;
            if j > 0 && j < n - j {
                values[n - j] = v;
            }
        }
    } else {
        for (j, v) in values.iter_mut().enumerate() {
            *v = cell(grid.periodic_displacement(j));
        }
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut truncated = 0.0;
    let mut radius: f64 = 0.0;
    for (j, v) in values.iter_mut().enumerate() {
        if *v < TRUNCATION_RELATIVE * max {
            truncated += *v * dx;
            *v = 0.0;
        } else {
            radius = radius.max(grid.periodic_displacement(j).abs());
        }
    }
    let mass: f64 = values.iter().sum::<f64>() * dx;
    let deficit = (1.0 - mass).max(truncated);
    Kernel::new(grid, values, Some(radius), deficit)
}

/// Upwind difference for the term `+xi w_x` on the right-hand side: the
/// characteristic speed is `-xi`, so information comes from the right when
/// `xi > 0`.
fn upwind_gradient(w: &Field, xi: f64) -> Vec<f64> {
    let g = w.grid();
    let n = g.len();
    let dx = g.dx();
    let v = w.values();
    let at = |j: isize| v[j.rem_euclid(n as isize) as usize];
    (0..n as isize)
        .map(|j| {
            if xi > 0.0 {
                (at(j + 1) - at(j)) / dx
            } else {
                (at(j) - at(j - 1)) / dx
            }
        })
        .collect()
}

fn check_full_system_stability(params: &RDParams, grid: Grid1D, dt: f64) -> Result<()> {
    // Explicit decay: dt f / tau <= 1; explicit advection CFL:
    // |xi| dt / (tau dx) <= 0.9.
    let decay_bound = params.tau / params.f;
    if dt > decay_bound {
        return Err(Error::UnstableStep {
            dt,
            bound: decay_bound,
        });
    }
    if params.xi != 0.0 {
        let ratio = params.xi.abs() * dt / (params.tau * grid.dx());
        if ratio > 0.9 {
            return Err(Error::CflViolation { ratio, limit: 0.9 });
        }
    }
    Ok(())
}

/// Runs the coupled system with IMEX Crank-Nicolson diffusion and explicit
/// reaction/coupling/advection; requires `tau > 0`.
pub fn full_system_solve(
    u0: &Field,
    w0: &Field,
    params: &RDParams,
    step: StepControl,
) -> Result<Vec<(f64, (Field, Field))>> {
    if !(params.tau > 0.0) {
        return Err(Error::InvalidParameter(
            "full system needs tau > 0 (the tau = 0 limit is the scalar equation)".into(),
        ));
    }
    u0.check_same_grid(w0)?;
    let grid = u0.grid();
    check_full_system_stability(params, grid, step.dt)?;
    let stepper_u = ThetaStepper::new(grid, LinearPart::Diff2 { coeff: 1.0 }, step.dt, 0.5)?;
    let stepper_w = ThetaStepper::new(
        grid,
        LinearPart::Diff2 {
            coeff: params.d / params.tau,
        },
        step.dt,
        0.5,
    )?;
    let explicit = |u: &Field, w: &Field| -> (Field, Field) {
        let wx = upwind_gradient(w, params.xi);
        let nu: Vec<f64> = u
            .values()
            .iter()
            .zip(w.values())
            .map(|(&uu, &ww)| params.reaction.eval(uu) - params.g * ww)
            .collect();
        let nw: Vec<f64> = u
            .values()
            .iter()
            .zip(w.values())
            .zip(&wx)
            .map(|((&uu, &ww), &dwx)| {
                (params.h * uu - params.f * ww + params.xi * dwx) / params.tau
            })
            .collect();
        (
            Field::from_values_raw(grid, nu),
            Field::from_values_raw(grid, nw),
        )
    };
    let full = step.full_steps();
    let rem = step.remainder();
    let mut u = u0.clone();
    let mut w = w0.clone();
    let mut traj = vec![(0.0, (u.clone(), w.clone()))];
    for k in 1..=full {
        let (nu, nw) = explicit(&u, &w);
        let u_next = stepper_u.step(&u, &|_| nu.clone());
        let w_next = stepper_w.step(&w, &|_| nw.clone());
        u = u_next;
        w = w_next;
        if k % step.store_every == 0 && !(k == full && rem == 0.0) {
            traj.push((k as f64 * step.dt, (u.clone(), w.clone())));
        }
    }
    if rem > 0.0 {
        let su = ThetaStepper::new(grid, LinearPart::Diff2 { coeff: 1.0 }, rem, 0.5)?;
        let sw = ThetaStepper::new(
            grid,
            LinearPart::Diff2 {
                coeff: params.d / params.tau,
            },
            rem,
            0.5,
        )?;
        let (nu, nw) = explicit(&u, &w);
        let u_next = su.step(&u, &|_| nu.clone());
        let w_next = sw.step(&w, &|_| nw.clone());
        u = u_next;
        w = w_next;
    }
    traj.push((step.t_end, (u, w)));
    Ok(traj)
}

/// Scalar nonlocal equation `u_t = F(u) + u_xx - sigma * (G * u)`:
/// diffusion implicit (CN), reaction and nonlocal coupling explicit.
pub fn nonlocal_scalar_solve(
    u0: &Field,
    params: &RDParams,
    kernel: &Kernel,
    step: StepControl,
) -> Result<Vec<(f64, Field)>> {
    if kernel.grid() != u0.grid() {
        return Err(Error::GridMismatch(
            "kernel and field live on different grids".into(),
        ));
    }
    let grid = u0.grid();
    let sigma = params.sigma();
    let stepper = ThetaStepper::new(grid, LinearPart::Diff2 { coeff: 1.0 }, step.dt, 0.5)?;
    let explicit = |u: &Field| -> Result<Field> {
        let conv = kernel.convolve(u)?;
        Ok(Field::from_values_raw(
            grid,
            u.values()
                .iter()
                .zip(conv.values())
                .map(|(&uu, &cc)| params.reaction.eval(uu) - sigma * cc)
                .collect(),
        ))
    };
    let full = step.full_steps();
    let rem = step.remainder();
    let mut u = u0.clone();
    let mut traj = vec![(0.0, u.clone())];
    for k in 1..=full {
        let nu = explicit(&u)?;
        u = stepper.step(&u, &|_| nu.clone());
        if k % step.store_every == 0 && !(k == full && rem == 0.0) {
            traj.push((k as f64 * step.dt, u.clone()));
        }
    }
    if rem > 0.0 {
        let tail = ThetaStepper::new(grid, LinearPart::Diff2 { coeff: 1.0 }, rem, 0.5)?;
        let nu = explicit(&u)?;
        u = tail.step(&u, &|_| nu.clone());
    }
    traj.push((step.t_end, u));
    Ok(traj)
}

/// How the inhibitor is initialized in the limit comparison.
#[derive(Debug, Clone)]
pub enum InhibitorInit {
    /// On the slow manifold: `w0 = h * (G * u0)`.
    Slaved,
    /// Explicit initial inhibitor (exposes the initial layer).
    Given(Field),
}

/// Fast-inhibitor limit comparison.
#[derive(Debug, Clone)]
pub struct TauLimitReport {
    pub taus: Vec<f64>,
    /// L2 distance of the full-system activator to the scalar solution at T.
    pub discrepancies: Vec<f64>,
    pub nonincreasing: bool,
    pub scalar_final: Field,
    pub full_finals: Vec<Field>,
}

/// For each `tau` in the decreasing list, runs the full system (inhibitor
/// slaved or given) and compares the activator at the final time against
/// the scalar nonlocal equation.
pub fn tau_limit_report(
    u0: &Field,
    w0_choice: &InhibitorInit,
    params: &RDParams,
    tau_list: &[f64],
    step: StepControl,
) -> Result<TauLimitReport> {
    if tau_list.is_empty() || tau_list.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter(
            "tau list must be nonempty and positive".into(),
        ));
    }
    if tau_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "tau list must be strictly decreasing".into(),
        ));
    }
    let kernel = asym_kernel(params, u0.grid())?;
    let scalar_final = nonlocal_scalar_solve(u0, params, &kernel, step)?
        .pop()
        .unwrap()
        .1;
    let w0 = match w0_choice {
        InhibitorInit::Slaved => {
            let conv = kernel.convolve(u0)?;
            Field::from_values_raw(
                u0.grid(),
                conv.values().iter().map(|&c| params.h * c).collect(),
            )
        }
        InhibitorInit::Given(w) => {
            u0.check_same_grid(w)?;
            w.clone()
        }
    };
    let mut discrepancies = Vec::with_capacity(tau_list.len());
    let mut full_finals = Vec::with_capacity(tau_list.len());
    for &tau in tau_list {
        let p = RDParams { tau, ..*params };
        let final_uw = full_system_solve(u0, &w0, &p, step)?.pop().unwrap().1;
        discrepancies.push(final_uw.0.l2_distance(&scalar_final)?);
        full_finals.push(final_uw.0);
    }
    let nonincreasing = discrepancies
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    Ok(TauLimitReport {
        taus: tau_list.to_vec(),
        discrepancies,
        nonincreasing,
        scalar_final,
        full_finals,
    })
}
