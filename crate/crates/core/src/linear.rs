//! The linear walk on `N` nodes.
//!
//! From node `i` the walker hops right with probability `omega` (applying
//! `U_i` to its internal state) and left with probability `lambda = 1 - omega`
//! (applying `U_{i-1}†`). The two ends hold the walker in place instead of
//! hopping off the lattice: node 0 keeps weight `lambda`, node `N-1` keeps
//! weight `omega`. Position statistics follow the birth-death chain
//!
//! ```text
//! T[0][0] = lambda, T[i+1][i] = omega, T[i-1][i] = lambda, T[N-1][N-1] = omega
//! ```
//!
//! whose stationary law is the truncated geometric distribution
//! `pi_m = a^m (a - 1) / (a^N - 1)` with `a = omega / lambda`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{InternalOperator, OqwChannel, COMPLETENESS_TOL};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, shannon_entropy};

/// Tolerance on the normalization of a [`Distribution`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Parameters of a linear walk.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWalkSpec {
    n_nodes: usize,
    omega: f64,
    epsilon: f64,
    unitaries: Option<Vec<InternalOperator>>,
}

impl LinearWalkSpec {
    /// A walk with identity unitaries.
    ///
    /// `omega` may sit on the closed interval `[0, 1]`; the absorbing ends are
    /// rejected only by operations that need an ergodic chain.
    pub fn new(n_nodes: usize, omega: f64, epsilon: f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::param("N", n_nodes as f64, "need at least 2 nodes"));
        }
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::param("omega", omega, "must be a probability"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param(
                "epsilon",
                epsilon,
                "energy gap must be positive",
            ));
        }
        Ok(Self {
            n_nodes,
            omega,
            epsilon,
            unitaries: None,
        })
    }

    /// Attaches `U_0 .. U_{N-2}`.
    pub fn with_unitaries(mut self, unitaries: Vec<InternalOperator>) -> Result<Self> {
        if unitaries.len() != self.n_nodes - 1 {
            return Err(Error::LengthMismatch {
                expected: self.n_nodes - 1,
                got: unitaries.len(),
            });
        }
        let dim = unitaries[0].dim();
        for (i, u) in unitaries.iter().enumerate() {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    rows: u.dim(),
                    cols: u.dim(),
                    context: format!("unitary U_{i}"),
                });
            }
            if u.unitarity_defect() > COMPLETENESS_TOL {
                return Err(Error::InvalidState(format!("U_{i} is not unitary")));
            }
        }
        self.unitaries = Some(unitaries);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        1.0 - self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `a = omega / lambda`.
    pub fn ratio(&self) -> f64 {
        self.omega / self.lambda()
    }

    pub fn unitaries(&self) -> Option<&[InternalOperator]> {
        self.unitaries.as_deref()
    }

    /// Internal dimension implied by the unitaries, 1 when there are none.
    pub fn internal_dim(&self) -> usize {
        self.unitaries
            .as_ref()
            .and_then(|u| u.first())
            .map_or(1, InternalOperator::dim)
    }

    /// Same lattice with `omega -> 1 - omega`. Unitaries are dropped; the
    /// mirror only concerns position statistics.
    pub fn mirrored(&self) -> Self {
        Self {
            n_nodes: self.n_nodes,
            omega: 1.0 - self.omega,
            epsilon: self.epsilon,
            unitaries: None,
        }
    }

    fn unitary(&self, i: usize) -> InternalOperator {
        match &self.unitaries {
            Some(u) => u[i].clone(),
            None => InternalOperator::identity(1),
        }
    }
}

/// Probability vector over the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidState("empty distribution".into()));
        }
        if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidState(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// All mass on `node`.
    pub fn localized(n_nodes: usize, node: usize) -> Result<Self> {
        if node >= n_nodes {
            return Err(Error::NodeOutOfRange {
                node,
                node_count: n_nodes,
            });
        }
        let mut probs = vec![0.0; n_nodes];
        probs[node] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(n_nodes: usize) -> Self {
        Self {
            probs: vec![1.0 / n_nodes as f64; n_nodes],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn l1_distance(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Mean node index.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(m, p)| m as f64 * p)
            .sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    /// Node order reversed (`m -> N-1-m`).
    pub fn reversed(&self) -> Self {
        Self {
            probs: self.probs.iter().rev().copied().collect(),
        }
    }
}

/// The Kraus family of the linear walk.
///
/// `B_0^0 = sqrt(lambda) I`, `B_i^{i+1} = sqrt(omega) U_i`,
/// `B_i^{i-1} = sqrt(lambda) U_{i-1}†`, `B_{N-1}^{N-1} = sqrt(omega) I`.
/// Zero-weight edges (only possible at `omega` in `{0, 1}`) are omitted.
pub fn build_channel(spec: &LinearWalkSpec) -> Result<OqwChannel> {
    let n = spec.n_nodes;
    if n < 2 {
        return Err(Error::param("N", n as f64, "need at least 2 nodes"));
    }
    let dim = spec.internal_dim();
    let right = spec.omega.sqrt();
    let left = spec.lambda().sqrt();
    let mut channel = OqwChannel::new(n, dim)?;
    let identity = InternalOperator::identity(dim);
    let mut put = |i: usize, j: usize, op: InternalOperator, w: f64| -> Result<()> {
        if w > 0.0 {
            channel.set_transition(i, j, op.scaled(w))?;
        }
        Ok(())
    };
    put(0, 0, identity.clone(), left)?;
    put(n - 1, n - 1, identity, right)?;
    for i in 0..n - 1 {
        let u = spec.unitary(i);
        put(i + 1, i, u.adjoint(), left)?;
        put(i, i + 1, u, right)?;
    }
    Ok(channel)
}

/// Dense column-stochastic transition matrix of the position chain,
/// `T[(target, source)]`.
pub fn transition_matrix(spec: &LinearWalkSpec) -> DMatrix<f64> {
    let n = spec.n_nodes;
    let (omega, lambda) = (spec.omega, spec.lambda());
    let mut t = DMatrix::zeros(n, n);
    t[(0, 0)] = lambda;
    t[(n - 1, n - 1)] = omega;
    for i in 0..n - 1 {
        t[(i + 1, i)] = omega;
        t[(i, i + 1)] = lambda;
    }
    t
}

/// One application of the transition matrix without materialising it.
pub(crate) fn stencil_step(omega: f64, src: &[f64], dst: &mut [f64]) {
    let n = src.len();
    let lambda = 1.0 - omega;
    dst[0] = lambda * (src[0] + src[1]);
    for m in 1..n - 1 {
        dst[m] = omega * src[m - 1] + lambda * src[m + 1];
    }
    dst[n - 1] = omega * (src[n - 2] + src[n - 1]);
}

/// `T^steps p0`, evaluated matrix-free in O(N) per step.
pub fn markov_evolve(
    spec: &LinearWalkSpec,
    p0: &Distribution,
    steps: usize,
) -> Result<Distribution> {
    if p0.len() != spec.n_nodes {
        return Err(Error::LengthMismatch {
            expected: spec.n_nodes,
            got: p0.len(),
        });
    }
    let mut cur = p0.probs.clone();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..steps {
        stencil_step(spec.omega, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Distribution::from_raw(cur))
}

fn require_ergodic(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "omega",
            omega,
            "absorbing chain has no truncated-geometric steady state",
        ))
    }
}

/// `log pi_m` for every node, computed in the log domain.
pub fn log_steady_state(spec: &LinearWalkSpec) -> Result<Vec<f64>> {
    require_ergodic(spec.omega)?;
    let n = spec.n_nodes;
    if spec.omega == 0.5 {
        return Ok(vec![-(n as f64).ln(); n]);
    }
    let log_a = spec.omega.ln() - (-spec.omega).ln_1p();
    // Shift by the largest exponent so nothing overflows for large N.
    let shift = if log_a > 0.0 {
        (n - 1) as f64 * log_a
    } else {
        0.0
    };
    let exps: Vec<f64> = (0..n).map(|m| m as f64 * log_a - shift).collect();
    let norm = log_sum_exp(&exps);
    Ok(exps.into_iter().map(|x| x - norm).collect())
}

/// Stationary law `pi_m = a^m (a - 1) / (a^N - 1)`; uniform at `omega = 1/2`.
pub fn steady_state(spec: &LinearWalkSpec) -> Result<Distribution> {
    let logs = log_steady_state(spec)?;
    Ok(Distribution::from_raw(
        logs.into_iter().map(f64::exp).collect(),
    ))
}

/// `eta = 2 - 1/omega`, an N-independent lower bound on `pi_{N-1}`.
pub fn boundary_mass_bound(omega: f64) -> Result<f64> {
    if !(omega > 0.5 && omega <= 1.0) {
        return Err(Error::param(
            "omega",
            omega,
            "bound is vacuous unless 1/2 < omega <= 1",
        ));
    }
    Ok(2.0 - 1.0 / omega)
}

/// Internal block carried by the walker at node `m` after starting from
/// `|psi>` at node 0: `U_{m-1} ... U_0 |psi><psi| U_0† ... U_{m-1}†`.
pub fn internal_state_at_node(
    spec: &LinearWalkSpec,
    psi: &[Complex64],
    node: usize,
) -> Result<InternalOperator> {
    if node >= spec.n_nodes {
        return Err(Error::NodeOutOfRange {
            node,
            node_count: spec.n_nodes,
        });
    }
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > COMPLETENESS_TOL {
        return Err(Error::InvalidState(format!(
            "internal state has squared norm {norm2}, expected 1"
        )));
    }
    let mut rho = InternalOperator::projector(psi);
    if let Some(unitaries) = &spec.unitaries {
        if psi.len() != spec.internal_dim() {
            return Err(Error::LengthMismatch {
                expected: spec.internal_dim(),
                got: psi.len(),
            });
        }
        for u in &unitaries[..node] {
            rho = u.conjugate(&rho);
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ValidationReport;
    use approx::assert_relative_eq;

    fn spec(n: usize, omega: f64) -> LinearWalkSpec {
        LinearWalkSpec::new(n, omega, 1.0).unwrap()
    }

    #[test]
    fn two_node_channel_has_four_edges() {
        let ch = build_channel(&spec(2, 2.0 / 3.0)).unwrap();
        assert_eq!(ch.transition_count(), 4);
        let weight = |i, j| ch.transition(i, j).unwrap().matrix()[(0, 0)].re;
        assert_relative_eq!(weight(0, 0), (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(weight(0, 1), (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(weight(1, 0), (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(weight(1, 1), (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn interior_nodes_have_no_self_loop() {
        let ch = build_channel(&spec(3, 2.0 / 3.0)).unwrap();
        assert!(ch.transition(1, 1).is_none());
        assert_eq!(ch.transition_count(), 6);
    }

    #[test]
    fn channels_are_complete() {
        for &omega in &[0.1, 0.5, 2.0 / 3.0, 0.99] {
            for n in [2, 3, 17] {
                let report = build_channel(&spec(n, omega)).unwrap().validate().unwrap();
                assert_eq!(report, ValidationReport::Ok);
            }
        }
    }

    #[test]
    fn transition_matrix_three_nodes() {
        let t = transition_matrix(&spec(3, 2.0 / 3.0));
        let expected = [
            [1.0 / 3.0, 1.0 / 3.0, 0.0],
            [2.0 / 3.0, 0.0, 1.0 / 3.0],
            [0.0, 2.0 / 3.0, 2.0 / 3.0],
        ];
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(t[(r, c)], expected[r][c], epsilon = 1e-15);
            }
        }
        let half = transition_matrix(&spec(2, 0.5));
        assert!(half.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn columns_sum_to_one() {
        for &omega in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let t = transition_matrix(&spec(11, omega));
            for c in 0..11 {
                assert_eq!(t.column(c).sum(), 1.0);
            }
        }
    }

    #[test]
    fn markov_evolve_examples() {
        let s = spec(3, 2.0 / 3.0);
        let p0 = Distribution::localized(3, 0).unwrap();
        assert_eq!(markov_evolve(&s, &p0, 0).unwrap(), p0);
        let p1 = markov_evolve(&s, &p0, 1).unwrap();
        assert_relative_eq!(p1.probs()[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p1.probs()[1], 2.0 / 3.0, epsilon = 1e-15);
        let p500 = markov_evolve(&s, &p0, 500).unwrap();
        let pi = Distribution::new(vec![1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0]).unwrap();
        assert!(p500.l1_distance(&pi) < 1e-8);
        assert!(matches!(
            markov_evolve(&s, &Distribution::uniform(4), 1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn steady_state_examples() {
        let uniform = steady_state(&spec(30, 0.5)).unwrap();
        assert!(uniform
            .probs()
            .iter()
            .all(|&p| (p - 1.0 / 30.0).abs() < 1e-15));
        let up = steady_state(&spec(3, 2.0 / 3.0)).unwrap();
        let down = steady_state(&spec(3, 1.0 / 3.0)).unwrap();
        for (m, expected) in [1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0].iter().enumerate() {
            assert_relative_eq!(up.probs()[m], expected, epsilon = 1e-15);
            assert_relative_eq!(down.probs()[2 - m], expected, epsilon = 1e-15);
        }
        assert!(steady_state(&spec(3, 0.0)).is_err());
        assert!(steady_state(&spec(3, 1.0)).is_err());
    }

    #[test]
    fn steady_state_survives_huge_lattices() {
        for &omega in &[1e-6, 2.0 / 3.0, 1.0 - 1e-6] {
            let pi = steady_state(&spec(1_000_000, omega)).unwrap();
            assert!(pi.probs().iter().all(|p| p.is_finite()));
            assert!((pi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_bound_examples() {
        let eta = boundary_mass_bound(2.0 / 3.0).unwrap();
        assert_relative_eq!(eta, 0.5, epsilon = 1e-15);
        assert!(steady_state(&spec(3, 2.0 / 3.0)).unwrap().probs()[2] >= eta);

        let eta = boundary_mass_bound(0.9).unwrap();
        let pi = steady_state(&spec(100, 0.9)).unwrap();
        // pi_{N-1} -> 1 - 1/a with a = 9
        assert_relative_eq!(pi.probs()[99], 8.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(eta, 8.0 / 9.0, epsilon = 1e-15);
        assert!(pi.probs()[99] >= eta - 1e-15);

        assert!(boundary_mass_bound(0.5 + 1e-9).unwrap() < 1e-8);
        assert!(boundary_mass_bound(0.5).is_err());
        assert!(boundary_mass_bound(0.2).is_err());
    }

    #[test]
    fn internal_state_with_swap() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let swap = InternalOperator::from_rows(2, &[zero, one, one, zero]).unwrap();
        let s = spec(3, 0.5)
            .with_unitaries(vec![swap, InternalOperator::identity(2)])
            .unwrap();
        let rho = internal_state_at_node(&s, &[one, zero], 1).unwrap();
        let m = rho.matrix();
        assert_eq!(m[(1, 1)], one);
        assert_eq!(m[(0, 0)], zero);
        assert_eq!(m[(0, 1)], zero);

        let plain = spec(4, 0.5);
        let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        for node in 0..4 {
            let rho = internal_state_at_node(&plain, &psi, node).unwrap();
            assert_eq!(rho, InternalOperator::projector(&psi));
        }
        assert!(internal_state_at_node(&plain, &[one, one], 0).is_err());
        assert!(internal_state_at_node(&plain, &psi, 4).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(LinearWalkSpec::new(1, 0.5, 1.0).is_err());
        assert!(LinearWalkSpec::new(3, 1.5, 1.0).is_err());
        assert!(LinearWalkSpec::new(3, 0.5, 0.0).is_err());
        assert!(LinearWalkSpec::new(3, 0.5, -1.0).is_err());
        assert!(spec(3, 0.5)
            .with_unitaries(vec![InternalOperator::identity(2)])
            .is_err());
        let not_unitary = InternalOperator::identity(2).scaled(2.0);
        assert!(spec(2, 0.5).with_unitaries(vec![not_unitary]).is_err());
    }
}
