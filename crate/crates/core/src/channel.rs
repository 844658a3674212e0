//! Open-quantum-walk channels on arbitrary graphs.
//!
//! A walk on `node_count` vertices with an internal Hilbert space of
//! dimension `internal_dim` is described by one operator `B_i^j` per directed
//! edge `i -> j`. The full Kraus operators `B_i^j ⊗ |j><i|` are never
//! materialised: after a single step every state is block diagonal in the
//! node basis, so the evolution only ever touches the diagonal blocks
//!
//! ```text
//! rho'_jj = sum_i B_i^j rho_ii B_i^j†
//! ```
//!
//! Transitions are stored sparsely; a missing edge is the zero operator.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Completeness defects up to this max-norm are accepted.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Entrywise tolerance for Hermiticity of state blocks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue allowed in a positive semidefinite block.
pub const PSD_FLOOR: f64 = -1e-10;
/// Tolerance on the total trace of a state.
pub const TRACE_TOL: f64 = 1e-10;

/// A square complex matrix acting on the walker's internal space.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalOperator {
    matrix: DMatrix<Complex64>,
}

impl InternalOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows().max(1),
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                context: "internal operators must be square and non-empty".into(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// The projector `|psi><psi|`.
    pub fn projector(psi: &[Complex64]) -> Self {
        let v = DVector::from_column_slice(psi);
        Self {
            matrix: &v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `self * rho * self†`.
    pub fn conjugate(&self, rho: &Self) -> Self {
        Self {
            matrix: &self.matrix * &rho.matrix * self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Largest entrywise deviation from the identity.
    pub fn identity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &DMatrix::identity(self.dim(), self.dim()))
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        InternalOperator {
            matrix: self.matrix.adjoint() * &self.matrix,
        }
        .identity_defect()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut eig: Vec<f64> = if self.dim() == 1 {
            vec![self.matrix[(0, 0)].re]
        } else {
            let h = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
            h.symmetric_eigenvalues().iter().copied().collect()
        };
        eig.sort_by(|a, b| a.total_cmp(b));
        eig
    }

    /// Hermitian within [`HERMITIAN_TOL`] and eigenvalues above [`PSD_FLOOR`].
    pub fn is_state_block(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
            && self.hermitian_eigenvalues().first().copied().unwrap_or(0.0) >= PSD_FLOOR
    }

    /// `tr(rho^2) / tr(rho)^2`; 1 for a (scaled) pure state.
    pub fn normalized_purity(&self) -> f64 {
        let tr = self.trace().re;
        let sq = (&self.matrix * &self.matrix).trace().re;
        sq / (tr * tr)
    }

    pub(crate) fn add_assign(&mut self, other: &Self) {
        self.matrix += &other.matrix;
    }
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Outcome of checking the completeness relation node by node.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationReport {
    Ok,
    /// Nodes whose defect `||sum_j B_i^j† B_i^j - I||_max` exceeds
    /// [`COMPLETENESS_TOL`], with the defect.
    Defective(Vec<(usize, f64)>),
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationReport::Ok)
    }
}

/// Sparse family of transition operators `B_i^j` keyed by `(source, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OqwChannel {
    node_count: usize,
    internal_dim: usize,
    transitions: BTreeMap<(usize, usize), InternalOperator>,
}

impl OqwChannel {
    pub fn new(node_count: usize, internal_dim: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::param("node_count", 0.0, "must be positive"));
        }
        if internal_dim == 0 {
            return Err(Error::param("internal_dim", 0.0, "must be positive"));
        }
        Ok(Self {
            node_count,
            internal_dim,
            transitions: BTreeMap::new(),
        })
    }

    /// Sets `B_source^target`, replacing any previous operator on that edge.
    ///
    /// Dimensions are not checked here; [`OqwChannel::validate`] reports
    /// them as a structural error.
    pub fn set_transition(
        &mut self,
        source: usize,
        target: usize,
        op: InternalOperator,
    ) -> Result<()> {
        for node in [source, target] {
            if node >= self.node_count {
                return Err(Error::NodeOutOfRange {
                    node,
                    node_count: self.node_count,
                });
            }
        }
        self.transitions.insert((source, target), op);
        Ok(())
    }

    pub fn with_transition(
        mut self,
        source: usize,
        target: usize,
        op: InternalOperator,
    ) -> Result<Self> {
        self.set_transition(source, target, op)?;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn transition(&self, source: usize, target: usize) -> Option<&InternalOperator> {
        self.transitions.get(&(source, target))
    }

    /// All stored edges in `(source, target)` order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, &InternalOperator)> {
        self.transitions.iter().map(|(&(i, j), op)| (i, j, op))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    fn check_dimensions(&self) -> Result<()> {
        for (&(i, j), op) in &self.transitions {
            let m = op.matrix();
            if m.nrows() != self.internal_dim || m.ncols() != self.internal_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.internal_dim,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    context: format!("transition {i} -> {j}"),
                });
            }
        }
        Ok(())
    }

    /// Checks `sum_j B_i^j† B_i^j = I` at every node.
    ///
    /// Operators of the wrong internal dimension are a structural error,
    /// distinct from a completeness failure.
    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_dimensions()?;
        let d = self.internal_dim;
        let mut sums = vec![DMatrix::<Complex64>::zeros(d, d); self.node_count];
        for (&(i, _), op) in &self.transitions {
            sums[i] += op.matrix().adjoint() * op.matrix();
        }
        let identity = DMatrix::<Complex64>::identity(d, d);
        let defects: Vec<(usize, f64)> = sums
            .iter()
            .enumerate()
            .map(|(i, s)| (i, max_abs_diff(s, &identity)))
            .filter(|&(_, defect)| defect > COMPLETENESS_TOL)
            .collect();
        Ok(if defects.is_empty() {
            ValidationReport::Ok
        } else {
            ValidationReport::Defective(defects)
        })
    }

    fn ensure_valid(&self) -> Result<()> {
        match self.validate()? {
            ValidationReport::Ok => Ok(()),
            ValidationReport::Defective(defects) => Err(Error::Incomplete { defects }),
        }
    }

    fn check_state(&self, state: &BlockState) -> Result<()> {
        if state.node_count != self.node_count {
            return Err(Error::LengthMismatch {
                expected: self.node_count,
                got: state.node_count,
            });
        }
        for (&node, block) in &state.blocks {
            if block.dim() != self.internal_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.internal_dim,
                    rows: block.dim(),
                    cols: block.dim(),
                    context: format!("state block at node {node}"),
                });
            }
        }
        Ok(())
    }

    fn step_unchecked(&self, state: &BlockState) -> BlockState {
        let mut out: BTreeMap<usize, InternalOperator> = BTreeMap::new();
        for (&(i, j), op) in &self.transitions {
            if let Some(rho) = state.blocks.get(&i) {
                let term = op.conjugate(rho);
                match out.get_mut(&j) {
                    Some(acc) => acc.add_assign(&term),
                    None => {
                        out.insert(j, term);
                    }
                }
            }
        }
        BlockState {
            node_count: self.node_count,
            blocks: out,
        }
    }
}

/// One application of the walk: `rho'_jj = sum_i B_i^j rho_ii B_i^j†`.
///
/// Refuses channels that fail the completeness check.
pub fn step(channel: &OqwChannel, state: &BlockState) -> Result<BlockState> {
    channel.ensure_valid()?;
    channel.check_state(state)?;
    Ok(channel.step_unchecked(state))
}

/// Applies [`step`] `steps` times, validating the channel once.
pub fn evolve(channel: &OqwChannel, state: &BlockState, steps: usize) -> Result<BlockState> {
    channel.ensure_valid()?;
    channel.check_state(state)?;
    let mut current = state.clone();
    for _ in 0..steps {
        current = channel.step_unchecked(&current);
    }
    Ok(current)
}

/// Like [`evolve`] but calls `visit(n, state)` for `n = 0..=steps`.
pub fn evolve_with<F>(
    channel: &OqwChannel,
    state: &BlockState,
    steps: usize,
    mut visit: F,
) -> Result<BlockState>
where
    F: FnMut(usize, &BlockState),
{
    channel.ensure_valid()?;
    channel.check_state(state)?;
    let mut current = state.clone();
    visit(0, &current);
    for n in 1..=steps {
        current = channel.step_unchecked(&current);
        visit(n, &current);
    }
    Ok(current)
}

/// Block-diagonal walker state `sum_i rho_ii ⊗ |i><i|`.
///
/// Nodes without an entry carry the zero block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    node_count: usize,
    blocks: BTreeMap<usize, InternalOperator>,
}

impl BlockState {
    pub fn new(node_count: usize, blocks: BTreeMap<usize, InternalOperator>) -> Result<Self> {
        let mut dim = None;
        let mut total = 0.0;
        for (&node, block) in &blocks {
            if node >= node_count {
                return Err(Error::NodeOutOfRange { node, node_count });
            }
            match dim {
                None => dim = Some(block.dim()),
                Some(d) if d != block.dim() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        rows: block.dim(),
                        cols: block.dim(),
                        context: format!("state block at node {node}"),
                    })
                }
                _ => {}
            }
            if !block.is_state_block() {
                return Err(Error::InvalidState(format!(
                    "block at node {node} is not Hermitian positive semidefinite"
                )));
            }
            total += block.trace().re;
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "block traces sum to {total}, expected 1"
            )));
        }
        Ok(Self { node_count, blocks })
    }

    /// `|psi><psi| ⊗ |node><node|` for a normalized `psi`.
    pub fn localized(node_count: usize, node: usize, psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "internal state has squared norm {norm2}, expected 1"
            )));
        }
        let mut blocks = BTreeMap::new();
        blocks.insert(node, InternalOperator::projector(psi));
        Self::new(node_count, blocks)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn block(&self, node: usize) -> Option<&InternalOperator> {
        self.blocks.get(&node)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &InternalOperator)> {
        self.blocks.iter().map(|(&i, b)| (i, b))
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.values().map(|b| b.trace().re).sum()
    }

    /// `p_i = tr(rho_ii)` for every node.
    pub fn position_marginal(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.node_count];
        for (&i, block) in &self.blocks {
            p[i] = block.trace().re;
        }
        p
    }

    /// Von Neumann entropy of the full block-diagonal state, in nats.
    pub fn von_neumann_entropy(&self) -> f64 {
        -self
            .blocks
            .values()
            .flat_map(|b| b.hermitian_eigenvalues())
            .map(crate::numeric::xlogx)
            .sum::<f64>()
    }
}

/// Free-function form of [`BlockState::position_marginal`].
pub fn position_marginal(state: &BlockState) -> Vec<f64> {
    state.position_marginal()
}
