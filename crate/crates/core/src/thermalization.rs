//! Nonequilibrium behaviour of the linear walk started at node 0.
//!
//! Before reaching the far boundary the walker is a drifting Gaussian with
//! velocity `v = 2 omega - 1` and diffusion constant `D = 1/2`. Once the
//! profile hits node `N - 1` it deforms into the Boltzmann steady state. The
//! window formulas, the Gaussian + Boltzmann entropy approximation and the
//! step estimates below are all written for `v > 0`; a walk with
//! `omega < 1/2` is the mirror image of one with `1 - omega`.

use std::collections::VecDeque;
use std::f64::consts::{E, PI};
use std::ops::RangeInclusive;

use statrs::function::erf::{erf, erfc};

use crate::equilibrium::{equilibrium_temperature, Scalar};
use crate::error::{Error, Result};
use crate::linear::{log_steady_state, stencil_step, Distribution, LinearWalkSpec};
use crate::numeric::{shannon_entropy, xlogx};

/// Default half-width, in steps, of the centered difference behind `T_est`.
pub const DEFAULT_TEMPERATURE_HALF_WIDTH: usize = 5;

/// `|Delta S| <= SENTINEL_RATIO * |Delta E| / epsilon` marks `T_est` as
/// divergent.
pub const SENTINEL_RATIO: f64 = 1e-12;

fn require_drift(omega: f64) -> Result<()> {
    if omega > 0.5 && omega < 1.0 {
        Ok(())
    } else if omega > 0.5 && omega == 1.0 {
        Err(Error::param(
            "omega",
            omega,
            "deterministic walk has no Boltzmann tail",
        ))
    } else {
        Err(Error::Unsupported(format!(
            "omega = {omega}: drift-free or backward walk; use the mirror 1 - omega"
        )))
    }
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param("t", t, "time must be positive"))
    }
}

/// Drift-diffusion profile of the walk before it feels the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    velocity: f64,
}

impl GaussianProfile {
    pub const DIFFUSION: f64 = 0.5;

    pub fn new(omega: f64) -> Result<Self> {
        if omega > 0.0 && omega < 1.0 {
            Ok(Self {
                velocity: 2.0 * omega - 1.0,
            })
        } else {
            Err(Error::param(
                "omega",
                omega,
                "must lie strictly between 0 and 1",
            ))
        }
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn diffusion(&self) -> f64 {
        Self::DIFFUSION
    }

    pub fn mean(&self, t: f64) -> f64 {
        self.velocity * t
    }

    /// `sqrt(2 D t) = sqrt(t)`.
    pub fn std_dev(&self, t: f64) -> f64 {
        (2.0 * Self::DIFFUSION * t).sqrt()
    }
}

/// `P(x, t) = exp(-(x - v t)^2 / (4 D t)) / sqrt(4 pi D t)`.
pub fn gaussian_probability(profile: &GaussianProfile, x: f64, t: f64) -> Result<f64> {
    require_positive_time(t)?;
    let four_dt = 4.0 * GaussianProfile::DIFFUSION * t;
    let u = x - profile.mean(t);
    Ok((-u * u / four_dt).exp() / (PI * four_dt).sqrt())
}

/// Interval during which the Gaussian front turns into the steady state.
///
/// `t_start` solves `v t + 2 sqrt(t) = N` and `t_end` solves
/// `v t - 2 sqrt(t) = N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalizationWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub t_therm: f64,
}

impl ThermalizationWindow {
    pub fn new(n_nodes: usize, omega: f64) -> Result<Self> {
        if omega <= 0.5 || omega > 1.0 || omega.is_nan() {
            return Err(Error::Unsupported(format!(
                "omega = {omega}: window formulas need 1/2 < omega <= 1"
            )));
        }
        let v = 2.0 * omega - 1.0;
        let r = (1.0 + v * n_nodes as f64).sqrt();
        Ok(Self {
            t_start: ((r - 1.0) / v).powi(2),
            t_end: ((r + 1.0) / v).powi(2),
            t_therm: 4.0 * r / (v * v),
        })
    }

    /// Integer steps `ceil(t_start)..=floor(t_end)`.
    pub fn integer_steps(&self) -> RangeInclusive<usize> {
        (self.t_start.ceil() as usize)..=(self.t_end.floor() as usize)
    }
}

pub fn thermalization_window(n_nodes: usize, omega: f64) -> Result<ThermalizationWindow> {
    ThermalizationWindow::new(n_nodes, omega)
}

/// Entropy of the free Gaussian, `log(2 pi e t) / 2`.
pub fn entropy_gaussian_regime(t: f64) -> Result<f64> {
    require_positive_time(t)?;
    Ok(0.5 * (2.0 * PI * E * t).ln())
}

/// Cutoff `N' = N - k sigma_ss` splitting the approximate profile into its
/// Gaussian part (`x <= N'`) and Boltzmann part (`x > N'`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxEntropyParams {
    n_prime: f64,
    sigma_ss: f64,
    cutoff_sigmas: f64,
}

impl ApproxEntropyParams {
    pub const DEFAULT_CUTOFF_SIGMAS: f64 = 4.0;

    pub fn new(spec: &LinearWalkSpec) -> Result<Self> {
        Self::with_cutoff(spec, Self::DEFAULT_CUTOFF_SIGMAS)
    }

    pub fn with_cutoff(spec: &LinearWalkSpec, cutoff_sigmas: f64) -> Result<Self> {
        require_drift(spec.omega())?;
        if !(cutoff_sigmas >= 0.0 && cutoff_sigmas.is_finite()) {
            return Err(Error::param(
                "cutoff_sigmas",
                cutoff_sigmas,
                "must be a finite nonnegative multiple",
            ));
        }
        // Large-N steady-state spread in node units: 1 / (2 sinh(|log a| / 2)).
        let log_a = spec.omega().ln() - (-spec.omega()).ln_1p();
        let sigma_ss = 1.0 / (2.0 * (0.5 * log_a.abs()).sinh());
        let n = spec.n_nodes() as f64;
        let n_prime = n - cutoff_sigmas * sigma_ss;
        if !(n_prime > 0.0 && n_prime < n) {
            return Err(Error::param("N'", n_prime, "cutoff must lie inside (0, N)"));
        }
        Ok(Self {
            n_prime,
            sigma_ss,
            cutoff_sigmas,
        })
    }

    pub fn n_prime(&self) -> f64 {
        self.n_prime
    }

    pub fn sigma_ss(&self) -> f64 {
        self.sigma_ss
    }

    pub fn cutoff_sigmas(&self) -> f64 {
        self.cutoff_sigmas
    }

    /// First node strictly above the cutoff.
    pub fn tail_start(&self) -> usize {
        self.n_prime.floor() as usize + 1
    }
}

/// Mass of the free Gaussian above the cutoff,
/// `(1 - erf((N' - v t) / sqrt(2 t))) / 2`.
pub fn tail_weight(params: &ApproxEntropyParams, profile: &GaussianProfile, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    0.5 * erfc((params.n_prime - profile.mean(t)) / (2.0 * t).sqrt())
}

/// Approximate profile `P_a = P_G + P_B`: the free Gaussian below `N'` and
/// the steady state weighted by the Gaussian tail mass above it.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxEntropyModel {
    n_nodes: usize,
    params: ApproxEntropyParams,
    profile: GaussianProfile,
    log_a: f64,
    log_norm: f64,
    tail_mass: f64,
    tail_entropy: f64,
}

impl ApproxEntropyModel {
    pub fn new(spec: &LinearWalkSpec) -> Result<Self> {
        Self::with_params(spec, ApproxEntropyParams::new(spec)?)
    }

    pub fn with_params(spec: &LinearWalkSpec, params: ApproxEntropyParams) -> Result<Self> {
        require_drift(spec.omega())?;
        let log_pi = log_steady_state(spec)?;
        let start = params.tail_start().min(spec.n_nodes());
        let tail = &log_pi[start..];
        let tail_mass = tail.iter().map(|l| l.exp()).sum();
        let tail_entropy = -tail.iter().map(|l| l.exp() * l).sum::<f64>();
        let log_a = spec.omega().ln() - (-spec.omega()).ln_1p();
        Ok(Self {
            n_nodes: spec.n_nodes(),
            params,
            profile: GaussianProfile::new(spec.omega())?,
            log_a,
            log_norm: log_pi[0],
            tail_mass,
            tail_entropy,
        })
    }

    pub fn params(&self) -> &ApproxEntropyParams {
        &self.params
    }

    pub fn profile(&self) -> &GaussianProfile {
        &self.profile
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn tail_weight(&self, t: f64) -> f64 {
        tail_weight(&self.params, &self.profile, t)
    }

    /// `P_a(x, t)`; the steady state is evaluated at real `x` through
    /// `pi(x) = pi_0 a^x`.
    pub fn probability(&self, x: f64, t: f64) -> Result<f64> {
        require_positive_time(t)?;
        if x <= self.params.n_prime {
            gaussian_probability(&self.profile, x, t)
        } else {
            Ok(self.tail_weight(t) * (self.log_norm + x * self.log_a).exp())
        }
    }

    /// `int_{-inf}^{N'} P_G + sum_{x > N'} P_B(x)`.
    pub fn total_mass(&self, t: f64) -> Result<f64> {
        require_positive_time(t)?;
        let w = self.tail_weight(t);
        Ok(1.0 - w + w * self.tail_mass)
    }

    /// `-int_{-inf}^{N'} P_G log P_G`, in closed form.
    pub fn gaussian_entropy(&self, t: f64) -> Result<f64> {
        require_positive_time(t)?;
        let u = self.params.n_prime - self.profile.mean(t);
        let z = u / (2.0 * t).sqrt();
        let first = (1.0 + (2.0 * PI * t).ln()) * (1.0 + erf(z)) / 4.0;
        let second = u * (-u * u / (2.0 * t)).exp() / (2.0 * (2.0 * PI * t).sqrt());
        Ok(first - second)
    }

    /// `-sum_{x > N'} w pi_x log(w pi_x)`.
    pub fn boltzmann_entropy(&self, t: f64) -> Result<f64> {
        require_positive_time(t)?;
        let w = self.tail_weight(t);
        Ok(-xlogx(w) * self.tail_mass + w * self.tail_entropy)
    }

    /// `S_a = S_G + S_B`.
    pub fn entropy(&self, t: f64) -> Result<f64> {
        Ok(self.gaussian_entropy(t)? + self.boltzmann_entropy(t)?)
    }
}

/// Settings for [`simulate_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryOptions {
    /// Half-width of the centered difference used for `T_est`.
    pub temperature_half_width: usize,
    /// Keep every `p^(n)`; otherwise only the final distribution is stored.
    pub keep_distributions: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            temperature_half_width: DEFAULT_TEMPERATURE_HALF_WIDTH,
            keep_distributions: false,
        }
    }
}

/// Time series of a simulated trajectory, indexed by step `0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    epsilon: f64,
    equilibrium_temperature: Scalar,
    entropy: Vec<f64>,
    energy: Vec<f64>,
    temperature: Vec<Scalar>,
    entropy_production: Vec<f64>,
    distributions: Option<Vec<Distribution>>,
    final_distribution: Distribution,
}

impl TrajectoryRecord {
    pub fn steps(&self) -> usize {
        self.entropy.len() - 1
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `S(n) = -sum_m p_m log p_m`, in nats.
    pub fn entropy(&self) -> &[f64] {
        &self.entropy
    }

    /// `<E>(n) = epsilon sum_m m p_m`; equal to the heat absorbed since
    /// step 0 for a start at node 0.
    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    /// Centered estimate `Delta E / Delta S`.
    pub fn temperature_estimate(&self) -> &[Scalar] {
        &self.temperature
    }

    /// `S(n) - <E>(n) / T_eq`.
    pub fn entropy_production(&self) -> &[f64] {
        &self.entropy_production
    }

    pub fn equilibrium_temperature(&self) -> Scalar {
        self.equilibrium_temperature
    }

    /// `p^(n)` when the record was built with `keep_distributions`.
    pub fn distribution(&self, n: usize) -> Option<&Distribution> {
        self.distributions.as_ref().and_then(|d| d.get(n))
    }

    pub fn distributions(&self) -> Option<&[Distribution]> {
        self.distributions.as_deref()
    }

    pub fn final_distribution(&self) -> &Distribution {
        &self.final_distribution
    }
}

/// `S_gen(n) = S(n) - E(n) / T_eq`. With a divergent `T_eq` (unbiased walk)
/// the heat term vanishes and `S_gen = S`.
pub fn entropy_production(entropy: &[f64], energy: &[f64], t_eq: Scalar) -> Result<Vec<f64>> {
    if entropy.len() != energy.len() {
        return Err(Error::LengthMismatch {
            expected: entropy.len(),
            got: energy.len(),
        });
    }
    Ok(match t_eq {
        Scalar::Finite(t) => entropy.iter().zip(energy).map(|(s, e)| s - e / t).collect(),
        Scalar::Divergent => entropy.to_vec(),
    })
}

/// `f(b) - f(a)` for `f(x) = x log x`, with `b = a + delta` and `delta`
/// known more accurately than `b - a`.
fn xlogx_difference(a: f64, b: f64, delta: f64) -> f64 {
    if a > 0.0 && b > 0.0 && delta / a > -0.5 {
        delta * b.ln() + a * (delta / a).ln_1p()
    } else {
        xlogx(b) - xlogx(a)
    }
}

struct Snapshot {
    step: usize,
    p: Vec<f64>,
    /// `p - pi`, evolved separately so late-time differences keep their
    /// relative precision.
    dev: Vec<f64>,
}

fn centered_temperature(lo: &Snapshot, hi: &Snapshot, epsilon: f64) -> Scalar {
    let mut d_energy = 0.0;
    let mut d_xlogx = 0.0;
    for m in 0..lo.p.len() {
        let delta = hi.dev[m] - lo.dev[m];
        d_energy += m as f64 * delta;
        d_xlogx += xlogx_difference(lo.p[m], hi.p[m], delta);
    }
    let d_energy = epsilon * d_energy;
    let d_entropy = -d_xlogx;
    if d_entropy.abs() <= SENTINEL_RATIO * d_energy.abs() / epsilon {
        Scalar::Divergent
    } else {
        Scalar::Finite(d_energy / d_entropy)
    }
}

/// Evolve `p0` for `steps` steps with the matrix-free stencil and record the
/// entropy, energy, temperature estimate and entropy production at every
/// step.
pub fn simulate_trajectory(
    spec: &LinearWalkSpec,
    p0: &Distribution,
    steps: usize,
    options: TrajectoryOptions,
) -> Result<TrajectoryRecord> {
    let n = spec.n_nodes();
    if p0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: p0.len(),
        });
    }
    let omega = spec.omega();
    let epsilon = spec.epsilon();
    let t_eq = equilibrium_temperature(omega, epsilon)?;
    let pi: Vec<f64> = log_steady_state(spec)?.into_iter().map(f64::exp).collect();

    let h = options.temperature_half_width;
    let mut entropy = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    let mut temperature = Vec::with_capacity(steps + 1);
    let mut kept = options
        .keep_distributions
        .then(|| Vec::with_capacity(steps + 1));

    let mut window: VecDeque<Snapshot> = VecDeque::with_capacity(2 * h + 2);
    let mut p = p0.probs().to_vec();
    let mut dev: Vec<f64> = p.iter().zip(&pi).map(|(x, q)| x - q).collect();
    let mut p_next = vec![0.0; n];
    let mut dev_next = vec![0.0; n];

    for step in 0..=steps {
        if step > 0 {
            stencil_step(omega, &p, &mut p_next);
            stencil_step(omega, &dev, &mut dev_next);
            std::mem::swap(&mut p, &mut p_next);
            std::mem::swap(&mut dev, &mut dev_next);
            // The deviation must stay in the sum-zero subspace; remove the
            // rounding drift along the fixed point.
            let drift: f64 = dev.iter().sum();
            for (d, q) in dev.iter_mut().zip(&pi) {
                *d -= drift * q;
            }
        }
        entropy.push(shannon_entropy(&p));
        energy.push(epsilon * p.iter().enumerate().map(|(m, x)| m as f64 * x).sum::<f64>());
        if let Some(k) = kept.as_mut() {
            k.push(Distribution::from_raw(p.clone()));
        }

        if window.len() == 2 * h + 1 {
            window.pop_front();
        }
        window.push_back(Snapshot {
            step,
            p: p.clone(),
            dev: dev.clone(),
        });
        // T_est(step - h) is complete once step is available.
        if step >= h {
            let centre = step - h;
            let lo = window
                .iter()
                .find(|s| s.step == centre.saturating_sub(h))
                .expect("window holds the lower edge");
            temperature.push(centered_temperature(lo, window.back().unwrap(), epsilon));
        }
    }
    // Trailing points use a window truncated at the last step.
    let hi = window.back().expect("at least step 0 is recorded");
    for centre in (steps + 1).saturating_sub(h)..=steps {
        if centre < temperature.len() {
            continue;
        }
        let lo = window
            .iter()
            .find(|s| s.step == centre.saturating_sub(h))
            .expect("window holds the lower edge");
        temperature.push(centered_temperature(lo, hi, epsilon));
    }

    let entropy_production = entropy_production(&entropy, &energy, t_eq)?;
    Ok(TrajectoryRecord {
        epsilon,
        equilibrium_temperature: t_eq,
        entropy,
        energy,
        temperature,
        entropy_production,
        distributions: kept,
        final_distribution: Distribution::from_raw(p),
    })
}

/// Comparison of `S_a` against the simulated entropy over the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub delta_max: f64,
    pub delta_rel_max: f64,
    pub mean_rel: f64,
    pub delta_log_n_max: f64,
    pub mean_log_n: f64,
    pub samples: usize,
}

impl ErrorMetrics {
    /// Metrics from paired samples `exact[i]`, `approx[i]`.
    pub fn compare(exact: &[f64], approx: &[f64], n_nodes: usize) -> Result<Self> {
        if exact.len() != approx.len() {
            return Err(Error::LengthMismatch {
                expected: exact.len(),
                got: approx.len(),
            });
        }
        if exact.is_empty() {
            return Err(Error::InvalidState("empty comparison window".into()));
        }
        let log_n = (n_nodes as f64).ln();
        let mut delta_max = 0.0f64;
        let mut delta_rel_max = 0.0f64;
        let mut sum_rel = 0.0;
        let mut sum_delta = 0.0;
        for (s, a) in exact.iter().zip(approx) {
            let d = (a - s).abs();
            let rel = d / s;
            delta_max = delta_max.max(d);
            delta_rel_max = delta_rel_max.max(rel);
            sum_rel += rel;
            sum_delta += d;
        }
        let k = exact.len() as f64;
        Ok(Self {
            delta_max,
            delta_rel_max,
            mean_rel: sum_rel / k,
            delta_log_n_max: delta_max / log_n,
            mean_log_n: sum_delta / k / log_n,
            samples: exact.len(),
        })
    }
}

/// Error of `S_a` against the trajectory entropy over the integer steps of
/// the thermalization window.
pub fn error_metrics(
    trajectory: &TrajectoryRecord,
    model: &ApproxEntropyModel,
) -> Result<ErrorMetrics> {
    let omega = 0.5 * (1.0 + model.profile.velocity());
    let window = ThermalizationWindow::new(model.n_nodes, omega)?;
    let range = window.integer_steps();
    if range.is_empty() {
        return Err(Error::InvalidState(
            "thermalization window has no integer step".into(),
        ));
    }
    let last = *range.end();
    if trajectory.steps() < last {
        return Err(Error::LengthMismatch {
            expected: last + 1,
            got: trajectory.entropy.len(),
        });
    }
    let exact = &trajectory.entropy[range.clone()];
    let approx = range
        .map(|t| model.entropy(t as f64))
        .collect::<Result<Vec<_>>>()?;
    ErrorMetrics::compare(exact, &approx, model.n_nodes)
}

/// `T(t) = 2 v epsilon t`, valid while the profile is a free Gaussian
/// (`0 <= t < t_start`).
pub fn noneq_temperature_analytic(
    profile: &GaussianProfile,
    window: &ThermalizationWindow,
    epsilon: f64,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0 && t < window.t_start) {
        return Err(Error::param(
            "t",
            t,
            "outside the Gaussian regime; use the trajectory estimate",
        ));
    }
    Ok(2.0 * profile.velocity() * epsilon * t)
}

/// Steps needed for a dissipative computation to read out at node `N - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqcEstimate {
    pub n_start: f64,
    /// `N / (2 omega - 1)`.
    pub n_steps: f64,
    pub n_end: f64,
}

pub fn dqc_step_estimates(n_nodes: usize, omega: f64) -> Result<DqcEstimate> {
    let window = ThermalizationWindow::new(n_nodes, omega)?;
    let n_steps = n_nodes as f64 / (2.0 * omega - 1.0);
    // (sqrt(1+vN) - 1)^2 < vN < (sqrt(1+vN) + 1)^2 for every vN > 0.
    debug_assert!(window.t_start < n_steps && n_steps < window.t_end);
    Ok(DqcEstimate {
        n_start: window.t_start,
        n_steps,
        n_end: window.t_end,
    })
}
