//! Linear peridynamic operator, micromodulus families, Taylor-expansion
//! local surrogates, moment tensors and the vanishing-horizon limit.
//!
//! The bond-based operator integrates pairwise interactions over a finite
//! horizon `delta`; no spatial derivatives appear, so no boundary
//! conditions are imposed: near-boundary nodes simply see the one-sided
//! intersection of their horizon ball with the domain, exactly as the
//! integral is written. The Taylor expansion of the displacement inside the
//! integral produces local differential surrogates whose coefficients are
//! raw moments of the micromodulus; odd-order terms vanish by symmetry.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BcKind, Grid1D};

/// Radial material function with compact support `[0, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Micromodulus {
    /// `lambda(r) = amplitude` for `r < delta`.
    Constant { amplitude: f64, horizon: f64 },
    /// `lambda(r) = amplitude (1 - r/delta)` for `r < delta`.
    Triangular { amplitude: f64, horizon: f64 },
}

impl Micromodulus {
    pub fn constant(amplitude: f64, horizon: f64) -> Result<Self> {
        Self::validate(amplitude, horizon)?;
        Ok(Micromodulus::Constant { amplitude, horizon })
    }

    pub fn triangular(amplitude: f64, horizon: f64) -> Result<Self> {
        Self::validate(amplitude, horizon)?;
        Ok(Micromodulus::Triangular { amplitude, horizon })
    }

    fn validate(amplitude: f64, horizon: f64) -> Result<()> {
        if !(amplitude >= 0.0) || !(horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "micromodulus needs amplitude >= 0 and horizon > 0, got {amplitude}, {horizon}"
            )));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        match *self {
            Micromodulus::Constant { horizon, .. } | Micromodulus::Triangular { horizon, .. } => {
                horizon
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Micromodulus::Constant { amplitude, .. }
            | Micromodulus::Triangular { amplitude, .. } => amplitude,
        }
    }

    /// Pointwise evaluation; identically zero for `r >= delta`.
    pub fn eval(&self, r: f64) -> f64 {
        let delta = self.horizon();
        if r >= delta {
            return 0.0;
        }
        match *self {
            Micromodulus::Constant { amplitude, .. } => amplitude,
            Micromodulus::Triangular { amplitude, .. } => amplitude * (1.0 - r / delta),
        }
    }

    /// Same family with a different horizon and amplitude.
    pub fn with_scale(&self, amplitude: f64, horizon: f64) -> Result<Self> {
        match self {
            Micromodulus::Constant { .. } => Micromodulus::constant(amplitude, horizon),
            Micromodulus::Triangular { .. } => Micromodulus::triangular(amplitude, horizon),
        }
    }

    /// Amplitude making the second surrogate coefficient `c_2 = 1` at the
    /// given horizon (`lambda_0 ~ delta^-5` for both families).
    pub fn fixed_c2_amplitude(&self, horizon: f64) -> f64 {
        match self {
            // c2 = lambda0 delta^5 / 5.
            Micromodulus::Constant { .. } => 5.0 / horizon.powi(5),
            // c2 = lambda0 delta^5 / 30.
            Micromodulus::Triangular { .. } => 30.0 / horizon.powi(5),
        }
    }
}

/// Closed-form raw moment `int_{-delta}^{delta} lambda(|h|) h^q dh` for
/// even `q`; odd orders vanish and are rejected here (use
/// [`raw_moment_quadrature`] to check the cancellation numerically).
pub fn moment(mu: &Micromodulus, order: u32) -> Result<f64> {
    if order % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "raw moments of odd order ({order}) vanish by symmetry; requested closed form is even-only"
        )));
    }
    let delta = mu.horizon();
    let q = order as i32;
    Ok(match mu {
        Micromodulus::Constant { amplitude, .. } => {
            2.0 * amplitude * delta.powi(q + 1) / f64::from(q + 1)
        }
        Micromodulus::Triangular { amplitude, .. } => {
            2.0 * amplitude * delta.powi(q + 1) / (f64::from(q + 1) * f64::from(q + 2))
        }
    })
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess (Abramowitz-Stegun style).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Raw moment by 64-node Gauss-Legendre quadrature; the reference path for
/// the closed forms and the odd-order cancellation. The integrand has a
/// kink at 0 (`lambda(|h|)`), so the two half-intervals are integrated
/// separately; for odd orders the halves cancel exactly.
pub fn raw_moment_quadrature(mu: &Micromodulus, order: u32) -> f64 {
    let delta = mu.horizon();
    let (nodes, weights) = gauss_legendre(64);
    let half = |sign: f64| -> f64 {
        nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| {
                let h = sign * 0.5 * delta * (t + 1.0);
                0.5 * delta * w * mu.eval(h.abs()) * h.powi(order as i32)
            })
            .sum::<f64>()
    };
    half(1.0) + half(-1.0)
}

/// Bond-based peridynamic operator on the grid:
/// `(Lu)_j = sum_{|x_i - x_j| < delta, x_i in domain}
///           lambda(|x_i - x_j|) (x_i - x_j)^2 (u_i - u_j) dx`
/// (midpoint quadrature on the nodes). Near-boundary nodes integrate over
/// the one-sided horizon; no ghost data is invented. Requires
/// `delta >= 2 dx`.
pub fn apply_nonlocal_1d(u: &Field, mu: &Micromodulus) -> Result<Field> {
    let grid = u.grid();
    let dx = grid.dx();
    let delta = mu.horizon();
    if delta < 2.0 * dx {
        return Err(Error::HorizonUnderResolved {
            delta,
            min: 2.0 * dx,
        });
    }
    let n = grid.len();
    let reach = (delta / dx).ceil() as isize;
    let v = u.values();
    let periodic = grid.bc() == BcKind::Periodic;
    let mut out = vec![0.0; n];
    for j in 0..n as isize {
        let mut acc = 0.0;
        for d in -reach..=reach {
            if d == 0 {
                continue;
            }
            let i = j + d;
            let i = if periodic {
                i.rem_euclid(n as isize)
            } else {
                if i < 0 || i >= n as isize {
                    continue;
                }
                i
            };
            let h = d as f64 * dx;
            let lam = mu.eval(h.abs());
            if lam != 0.0 {
                acc += lam * h * h * (v[i as usize] - v[j as usize]);
            }
        }
        out[j as usize] = acc * dx;
    }
    Ok(Field::from_values_raw(grid, out))
}

/// Even-order local surrogate of the nonlocal operator:
/// `L u ~ sum_k c_k u^{(k)}` with `c_k = (1/k!) int lambda |h|^{k+2} dh`
/// over even `k <= order`; odd coefficients vanish identically.
#[derive(Debug, Clone)]
pub struct LocalSurrogate {
    /// `(k, c_k)` pairs for even `k = 2, 4, ..., order`.
    pub coefficients: Vec<(u32, f64)>,
    /// Remainder order marker `m`.
    pub order: u32,
}

pub fn local_surrogate(mu: &Micromodulus, order: u32) -> Result<LocalSurrogate> {
    if order % 2 != 0 || order < 2 {
        return Err(Error::InvalidParameter(format!(
            "surrogate order must be even and >= 2, got {order}"
        )));
    }
    let mut coefficients = Vec::new();
    let mut factorial = 1.0f64;
    let mut k = 0u32;
    while k < order {
        k += 2;
        factorial *= f64::from(k) * f64::from(k - 1);
        coefficients.push((k, moment(mu, k + 2)? / factorial));
    }
    Ok(LocalSurrogate {
        coefficients,
        order,
    })
}

/// Analytic test profiles for the convergence study (the nonlocal operator
/// needs off-derivative values; surrogates need exact derivatives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothProfile {
    Constant { value: f64 },
    /// `u(x) = x^2`.
    Quadratic,
    /// `u(x) = sin(2 pi freq x)`.
    SineWave { freq: f64 },
}

impl SmoothProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SmoothProfile::Constant { value } => value,
            SmoothProfile::Quadratic => x * x,
            SmoothProfile::SineWave { freq } => (2.0 * std::f64::consts::PI * freq * x).sin(),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match *self {
            SmoothProfile::Constant { .. } => 0.0,
            SmoothProfile::Quadratic => 2.0,
            SmoothProfile::SineWave { freq } => {
                let w = 2.0 * std::f64::consts::PI * freq;
                -w * w * (w * x).sin()
            }
        }
    }

    pub fn d4(&self, x: f64) -> f64 {
        match *self {
            SmoothProfile::Constant { .. } | SmoothProfile::Quadratic => 0.0,
            SmoothProfile::SineWave { freq } => {
                let w = 2.0 * std::f64::consts::PI * freq;
                w.powi(4) * (w * x).sin()
            }
        }
    }
}

/// Amplitude normalization across the horizon sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Rescale the amplitude per horizon so `c_2` stays 1 (the local limit
    /// is fixed; `lambda_0 ~ delta^-5`).
    FixedC2,
    /// Keep the amplitude as given (exploratory; `c_2` itself shrinks).
    Raw,
}

/// Vanishing-horizon study outcome.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub deltas: Vec<f64>,
    /// Max error vs the surrogate over nodes at least `delta` from the
    /// boundary.
    pub interior_errors: Vec<f64>,
    /// Max error over the remaining (near-boundary) nodes; tabulated only,
    /// no pass criterion attached.
    pub boundary_errors: Vec<f64>,
    /// Log-log least-squares slope of interior error vs delta.
    pub observed_order: f64,
    pub surrogate_order: u32,
    pub normalization: Normalization,
}

/// Compares the nonlocal operator against its order-`m` local surrogate on
/// an analytic profile over a decreasing horizon list.
pub fn convergence_study(
    profile: &SmoothProfile,
    family: &Micromodulus,
    delta_list: &[f64],
    normalization: Normalization,
    surrogate_order: u32,
    grid: Grid1D,
) -> Result<ConvergenceStudy> {
    if delta_list.is_empty() || delta_list.iter().any(|&d| d <= 0.0) {
        return Err(Error::InvalidParameter(
            "horizon list must be nonempty and positive".into(),
        ));
    }
    if delta_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "horizon list must be strictly decreasing".into(),
        ));
    }
    let u = Field::from_fn(grid, |x| profile.eval(x));
    let mut interior_errors = Vec::with_capacity(delta_list.len());
    let mut boundary_errors = Vec::with_capacity(delta_list.len());
    for &delta in delta_list {
        let amplitude = match normalization {
            Normalization::FixedC2 => family.fixed_c2_amplitude(delta),
            Normalization::Raw => family.amplitude(),
        };
        let mu = family.with_scale(amplitude, delta)?;
        let surrogate = local_surrogate(&mu, surrogate_order)?;
        let lu = apply_nonlocal_1d(&u, &mu)?;
        let mut interior: f64 = 0.0;
        let mut boundary: f64 = 0.0;
        for j in 0..grid.len() {
            let x = grid.node(j);
            let mut predicted = 0.0;
            for &(k, c) in &surrogate.coefficients {
                predicted += c * match k {
                    2 => profile.d2(x),
                    4 => profile.d4(x),
                    _ => unreachable!("surrogate orders limited to 4 in the study"),
                };
            }
            let err = (lu.values()[j] - predicted).abs();
            let near_left = x - grid.x_min() < delta;
            let near_right = grid.x_max() - x < delta;
            if near_left || near_right {
                boundary = boundary.max(err);
            } else {
                interior = interior.max(err);
            }
        }
        interior_errors.push(interior);
        boundary_errors.push(boundary);
    }
    // Log-log least squares for the observed order.
    let pts: Vec<(f64, f64)> = delta_list
        .iter()
        .zip(&interior_errors)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&d, &e)| (d.ln(), e.ln()))
        .collect();
    let observed_order = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NAN
    };
    Ok(ConvergenceStudy {
        deltas: delta_list.to_vec(),
        interior_errors,
        boundary_errors,
        observed_order,
        surrogate_order,
        normalization,
    })
}

/// Fourth-order moment tensor of the 3-D bond-based operator:
/// `M_ijkl = (1/2) int_{B(0,delta)} lambda(|h|) h_i h_j h_k h_l dh`,
/// its isotropic least-squares fit, and the resulting Lame pair.
#[derive(Debug, Clone)]
pub struct MomentTensor3 {
    /// Full 81-entry table, index `((i*3 + j)*3 + k)*3 + l`.
    pub entries: Vec<f64>,
    pub m_xxxx: f64,
    pub m_xxyy: f64,
    pub m_xyxy: f64,
    /// Coefficient of the isotropic structure
    /// `c (d_ij d_kl + d_ik d_jl + d_il d_jk)` fitted by least squares.
    pub isotropic_coefficient: f64,
    /// Relative Frobenius deviation from the isotropic fit.
    pub isotropy_deviation: f64,
    /// Largest violation of index-permutation symmetry.
    pub permutation_asymmetry: f64,
    pub mu_lame: f64,
    pub lambda_lame: f64,
    /// Bulk modulus `K = lambda + 2 mu / 3`.
    pub bulk_modulus: f64,
}

pub fn moment_tensor_3d(mu: &Micromodulus) -> MomentTensor3 {
    let delta = mu.horizon();
    // Radial part: int_0^delta lambda(r) r^6 dr by Gauss-Legendre on [0, delta].
    let (nodes, weights) = gauss_legendre(64);
    let radial: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| {
            let r = 0.5 * delta * (t + 1.0);
            0.5 * delta * w * mu.eval(r) * r.powi(6)
        })
        .sum();
    // Angular part: product rule, Gauss-Legendre in cos(theta) and uniform
    // in phi; exact for the degree-4 integrand.
    let (ct_nodes, ct_weights) = gauss_legendre(8);
    let n_phi = 16;
    let mut angular = vec![0.0f64; 81];
    for (&ct, &wt) in ct_nodes.iter().zip(&ct_weights) {
        let st = (1.0 - ct * ct).sqrt();
        for p in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * p as f64 / n_phi as f64;
            let w = wt * 2.0 * std::f64::consts::PI / n_phi as f64;
            let n = [st * phi.cos(), st * phi.sin(), ct];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            angular[((i * 3 + j) * 3 + k) * 3 + l] +=
                                w * n[i] * n[j] * n[k] * n[l];
                        }
                    }
                }
            }
        }
    }
    let entries: Vec<f64> = angular.iter().map(|a| 0.5 * radial * a).collect();
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * 3 + j) * 3 + k) * 3 + l;
    let m_xxxx = entries[idx(0, 0, 0, 0)];
    let m_xxyy = entries[idx(0, 0, 1, 1)];
    let m_xyxy = entries[idx(0, 1, 0, 1)];
    // Least-squares isotropic coefficient: c = <M, S> / <S, S> with
    // S = d_ij d_kl + d_ik d_jl + d_il d_jk.
    let delta3 = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut ms = 0.0;
    let mut ss = 0.0;
    let mut mm = 0.0;
    let mut residual = 0.0;
    let mut asym: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let s = delta3(i, j) * delta3(k, l)
                        + delta3(i, k) * delta3(j, l)
                        + delta3(i, l) * delta3(j, k);
                    let m = entries[idx(i, j, k, l)];
                    ms += m * s;
                    ss += s * s;
                    mm += m * m;
                    // Permutation symmetry of the integrand.
                    asym = asym.max((m - entries[idx(j, i, k, l)]).abs());
                    asym = asym.max((m - entries[idx(k, j, i, l)]).abs());
                    asym = asym.max((m - entries[idx(l, j, k, i)]).abs());
                    asym = asym.max((m - entries[idx(i, k, j, l)]).abs());
                }
            }
        }
    }
    let c = ms / ss;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let s = delta3(i, j) * delta3(k, l)
                        + delta3(i, k) * delta3(j, l)
                        + delta3(i, l) * delta3(j, k);
                    let r = entries[idx(i, j, k, l)] - c * s;
                    residual += r * r;
                }
            }
        }
    }
    let isotropy_deviation = residual.sqrt() / mm.sqrt().max(f64::MIN_POSITIVE);
    let mu_lame = c;
    let lambda_lame = c;
    let bulk_modulus = lambda_lame + 2.0 * mu_lame / 3.0;
    MomentTensor3 {
        entries,
        m_xxxx,
        m_xxyy,
        m_xyxy,
        isotropic_coefficient: c,
        isotropy_deviation,
        permutation_asymmetry: asym,
        mu_lame,
        lambda_lame,
        bulk_modulus,
    }
}
