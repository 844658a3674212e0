//! Equilibrium statistical mechanics of the thermalized linear walk.
//!
//! The steady state `pi_m ∝ a^m` is read as a Boltzmann law over equally
//! spaced levels `E_m = m * epsilon` (ground state at zero, `k_B = 1`), which
//! fixes `beta * epsilon = -log a`. Everything here is a closed form in
//! `x = beta * epsilon`.
//!
//! Sign convention: `omega = 1 / (1 + e^{beta epsilon})`, so `omega < 1/2`
//! gives `beta > 0` and a positive temperature while `omega > 1/2` is a
//! population inversion with negative temperature. The alternative
//! `1 / (1 + e^{-beta epsilon})` contradicts `T = -epsilon / log(omega/lambda)`
//! and is deliberately not used.
//!
//! Removable singularities at `beta = 0` are handled by splitting each
//! quantity into its uniform-distribution value plus a smooth remainder
//! evaluated by series near the origin.

use crate::error::{Error, Result};
use crate::numeric::{bose_remainder, inv_four_sinh_sq_half, sinh_remainder};

/// Below this `|beta epsilon|` the partition function uses its uniform-limit
/// series.
pub const UNIFORM_BRANCH: f64 = 1e-8;

/// Below this `|beta epsilon|` the two-term closed forms are replaced by
/// cancellation-free remainders.
const SMALL_X: f64 = 0.25;

/// A real result that may diverge at a singular parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Finite(f64),
    /// The quantity has no finite value here (e.g. temperature at
    /// `omega = 1/2`).
    Divergent,
}

impl Scalar {
    pub fn finite(self) -> Option<f64> {
        match self {
            Scalar::Finite(v) => Some(v),
            Scalar::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Scalar::Divergent)
    }

    /// Divergences map to `+inf`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Panics on a divergence.
    pub fn unwrap(self) -> f64 {
        self.finite().expect("divergent value")
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "epsilon",
            epsilon,
            "energy gap must be positive",
        ))
    }
}

fn check_open_probability(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "omega",
            omega,
            "must lie strictly between 0 and 1",
        ))
    }
}

/// `log(omega / (1 - omega))`.
fn log_ratio(omega: f64) -> f64 {
    omega.ln() - (-omega).ln_1p()
}

/// `beta = -log(omega / (1 - omega)) / epsilon`.
pub fn beta_from_omega(omega: f64, epsilon: f64) -> Result<f64> {
    check_open_probability(omega)?;
    check_epsilon(epsilon)?;
    Ok(-log_ratio(omega) / epsilon)
}

/// `omega = 1 / (1 + e^{beta epsilon})`.
pub fn omega_from_beta(beta: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if beta.is_nan() {
        return Err(Error::param("beta", beta, "not a number"));
    }
    Ok(1.0 / (1.0 + (beta * epsilon).exp()))
}

/// `T = -epsilon / log(omega / lambda)`; divergent at `omega = 1/2`.
pub fn equilibrium_temperature(omega: f64, epsilon: f64) -> Result<Scalar> {
    check_open_probability(omega)?;
    check_epsilon(epsilon)?;
    let l = log_ratio(omega);
    Ok(if l == 0.0 {
        Scalar::Divergent
    } else {
        Scalar::Finite(-epsilon / l)
    })
}

/// `E_g = (N - 1) epsilon`, the energy between the `omega -> 0` and
/// `omega -> 1` limits.
pub fn energy_gap(n_nodes: usize, epsilon: f64) -> f64 {
    (n_nodes as f64 - 1.0) * epsilon
}

/// `log(1 - e^{-y})` for `y > 0`.
fn log1mexp(y: f64) -> f64 {
    if y > std::f64::consts::LN_2 {
        (-(-y).exp()).ln_1p()
    } else {
        (-(-y).exp_m1()).ln()
    }
}

/// Equilibrium parameter set. Exactly one of `beta` / `omega` is supplied;
/// the other follows from the bijection above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsemblePoint {
    n_nodes: usize,
    epsilon: f64,
    beta: f64,
    omega: f64,
}

/// Bundle of the main equilibrium scalars at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub z: f64,
    pub log_z: f64,
    pub mean_energy: f64,
    pub energy_variance: f64,
    pub entropy: f64,
    pub free_energy: Scalar,
    pub heat_capacity: f64,
    pub temperature: Scalar,
}

impl EnsemblePoint {
    pub fn from_omega(n_nodes: usize, omega: f64, epsilon: f64) -> Result<Self> {
        if n_nodes < 1 {
            return Err(Error::param("N", 0.0, "need at least one level"));
        }
        let beta = beta_from_omega(omega, epsilon)?;
        Ok(Self {
            n_nodes,
            epsilon,
            beta,
            omega,
        })
    }

    pub fn from_beta(n_nodes: usize, beta: f64, epsilon: f64) -> Result<Self> {
        if n_nodes < 1 {
            return Err(Error::param("N", 0.0, "need at least one level"));
        }
        if !beta.is_finite() {
            return Err(Error::param("beta", beta, "must be finite"));
        }
        let omega = omega_from_beta(beta, epsilon)?;
        Ok(Self {
            n_nodes,
            epsilon,
            beta,
            omega,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `a = omega / (1 - omega) = e^{-beta epsilon}`.
    pub fn ratio(&self) -> f64 {
        (-self.x()).exp()
    }

    /// Energy of level `m`.
    pub fn level(&self, m: usize) -> f64 {
        m as f64 * self.epsilon
    }

    fn x(&self) -> f64 {
        self.beta * self.epsilon
    }

    fn n(&self) -> f64 {
        self.n_nodes as f64
    }

    pub fn temperature(&self) -> Scalar {
        if self.beta == 0.0 {
            Scalar::Divergent
        } else {
            Scalar::Finite(1.0 / self.beta)
        }
    }

    pub fn log_partition_function(&self) -> f64 {
        log_z(self.n(), self.x())
    }

    /// `Z = (a^N - 1) / (a - 1)`; exactly `N` at `beta = 0`. Overflows to
    /// infinity for large `N |beta epsilon|`; use the log form there.
    pub fn partition_function(&self) -> f64 {
        if self.beta == 0.0 {
            self.n()
        } else {
            self.log_partition_function().exp()
        }
    }

    /// `<E> = epsilon/(e^{beta eps} - 1) - N epsilon/(e^{N beta eps} - 1)`.
    pub fn mean_energy(&self) -> f64 {
        self.epsilon * reduced_energy(self.n(), self.x())
    }

    /// `<dE^2> = d^2 log Z / d beta^2`.
    pub fn energy_variance(&self) -> f64 {
        self.epsilon * self.epsilon * reduced_variance(self.n(), self.x())
    }

    /// Large-N standard deviation `epsilon / |2 sinh(beta epsilon / 2)|`.
    pub fn sigma_e_large_n(&self) -> Scalar {
        let x = self.x();
        if x == 0.0 {
            Scalar::Divergent
        } else {
            Scalar::Finite(self.epsilon / (2.0 * (0.5 * x).sinh()).abs())
        }
    }

    /// `S = log Z + beta <E>`, in nats.
    pub fn entropy(&self) -> f64 {
        // S is even in beta; evaluating at |x| keeps the beta < 0 branch from
        // cancelling two terms of size (N-1)|x|.
        let y = self.x().abs();
        log_z(self.n(), y) + y * reduced_energy(self.n(), y)
    }

    /// `dS/dbeta = beta d<E>/dbeta = -beta <dE^2>`.
    pub fn entropy_derivative(&self) -> f64 {
        -self.beta * self.energy_variance()
    }

    /// Large-N form `-beta eps^2 e^{x} / (e^{x} - 1)^2`; divergent at 0 only
    /// in the sense of its `-1/beta` behaviour, so it is reported finite for
    /// `beta != 0`.
    pub fn entropy_derivative_large_n(&self) -> Scalar {
        if self.beta == 0.0 {
            return Scalar::Divergent;
        }
        Scalar::Finite(-self.beta * self.epsilon * self.epsilon * inv_four_sinh_sq_half(self.x()))
    }

    /// Small-|beta| asymptote of the large-N derivative, `-1/beta - epsilon`.
    pub fn entropy_derivative_small_beta(&self) -> Scalar {
        if self.beta == 0.0 {
            Scalar::Divergent
        } else {
            Scalar::Finite(-1.0 / self.beta - self.epsilon)
        }
    }

    /// Helmholtz free energy `F = -log Z / beta`; divergent at `beta = 0`.
    pub fn free_energy(&self) -> Scalar {
        if self.beta == 0.0 {
            Scalar::Divergent
        } else {
            Scalar::Finite(-self.log_partition_function() / self.beta)
        }
    }

    /// `dF/dbeta = log Z / beta^2 + <E> / beta = S / beta^2`.
    pub fn free_energy_derivative(&self) -> Scalar {
        if self.beta == 0.0 {
            Scalar::Divergent
        } else {
            Scalar::Finite(self.entropy() / (self.beta * self.beta))
        }
    }

    /// Large-N form `-log|1 - e^{-x}| / beta^2 + epsilon / (beta (e^x - 1))`.
    pub fn free_energy_derivative_large_n(&self) -> Scalar {
        let x = self.x();
        if x == 0.0 {
            return Scalar::Divergent;
        }
        let b = self.beta;
        Scalar::Finite(-(-x).exp_m1().abs().ln() / (b * b) + self.epsilon / (b * x.exp_m1()))
    }

    /// Small positive beta asymptote `(1 - log(beta epsilon)) / beta^2`.
    pub fn free_energy_derivative_small_beta(&self) -> Result<f64> {
        if self.beta <= 0.0 {
            return Err(Error::param("beta", self.beta, "asymptote needs beta > 0"));
        }
        Ok((1.0 - self.x().ln()) / (self.beta * self.beta))
    }

    /// `C_V = (beta eps)^2 [e^x/(e^x-1)^2 - N^2 e^{Nx}/(e^{Nx}-1)^2]`.
    pub fn heat_capacity(&self) -> f64 {
        let x = self.x();
        x * x * reduced_variance(self.n(), x)
    }

    /// Large-N form `x^2 e^x / (e^x - 1)^2`, with limit 1 at `x = 0`.
    pub fn heat_capacity_large_n(&self) -> f64 {
        let x = self.x();
        if x == 0.0 {
            1.0
        } else {
            x * x * inv_four_sinh_sq_half(x)
        }
    }

    /// Large-N, small-|beta| form `e^{beta epsilon} = (1 - omega) / omega`.
    pub fn heat_capacity_small_beta(&self) -> f64 {
        self.x().exp()
    }

    /// `d<E>/d omega`, the energy needed per unit change of the bias:
    ///
    /// ```text
    /// eps [ 1/(1-2w)^2 - N^2 (1-w)^{N-1} w^{N-1} / ((1-w)^N - w^N)^2 ]
    /// ```
    ///
    /// Near `omega = 1/2` the two terms cancel; there the equivalent form
    /// `<dE^2> / (eps omega lambda)` is used.
    pub fn energy_cost_domega(&self) -> f64 {
        let x = self.x();
        let (omega, lambda) = (self.omega, 1.0 - self.omega);
        if x.abs() < SMALL_X {
            return self.energy_variance() / (self.epsilon * omega * lambda);
        }
        let n = self.n();
        // r = min(a, 1/a) < 1; -x = log a.
        let log_r = -x.abs();
        let power = if x < 0.0 { n + 1.0 } else { n - 1.0 };
        let tail = n * n * (power * log_r).exp() / ((n * log_r).exp_m1().powi(2) * lambda * lambda);
        self.epsilon * (1.0 / (1.0 - 2.0 * omega).powi(2) - tail)
    }

    /// Large-N form `epsilon / (1 - 2 omega)^2`; divergent at `omega = 1/2`.
    pub fn energy_cost_large_n(&self) -> Scalar {
        let d = 1.0 - 2.0 * self.omega;
        if d == 0.0 {
            Scalar::Divergent
        } else {
            Scalar::Finite(self.epsilon / (d * d))
        }
    }

    pub fn thermo(&self) -> ThermoPoint {
        ThermoPoint {
            z: self.partition_function(),
            log_z: self.log_partition_function(),
            mean_energy: self.mean_energy(),
            energy_variance: self.energy_variance(),
            entropy: self.entropy(),
            free_energy: self.free_energy(),
            heat_capacity: self.heat_capacity(),
            temperature: self.temperature(),
        }
    }
}

/// `log sum_{m<N} e^{-x m}`.
fn log_z(n: f64, x: f64) -> f64 {
    if x.abs() < UNIFORM_BRANCH {
        // Cumulant series of the uniform law on 0..N-1 (third cumulant is 0).
        return n.ln() - 0.5 * (n - 1.0) * x + (n * n - 1.0) * x * x / 24.0;
    }
    if x > 0.0 {
        log1mexp(n * x) - log1mexp(x)
    } else {
        let y = -x;
        (n - 1.0) * y + log1mexp(n * y) - log1mexp(y)
    }
}

/// `<E> / epsilon` as a function of `x = beta epsilon`.
fn reduced_energy(n: f64, x: f64) -> f64 {
    if x.abs() < SMALL_X {
        0.5 * (n - 1.0) + bose_remainder(x) - n * bose_remainder(n * x)
    } else {
        1.0 / x.exp_m1() - n / (n * x).exp_m1()
    }
}

/// `<dE^2> / epsilon^2` as a function of `x`.
fn reduced_variance(n: f64, x: f64) -> f64 {
    if x.abs() < SMALL_X {
        sinh_remainder(x) - n * n * sinh_remainder(n * x)
    } else {
        inv_four_sinh_sq_half(x) - n * n * inv_four_sinh_sq_half(n * x)
    }
}
