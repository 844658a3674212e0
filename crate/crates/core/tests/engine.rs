use nalgebra::DMatrix;
use num_complex::Complex64;
use oqwalk::channel::{evolve_with, step};
use oqwalk::linear::{build_channel, internal_state_at_node, markov_evolve};
use oqwalk::{BlockState, Distribution, InternalOperator, LinearWalkSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{i phi} [[a, -b*], [b, a*]]` with `a = cos(theta) e^{i alpha}`,
/// `b = sin(theta) e^{i gamma}`.
fn su2(theta: f64, alpha: f64, gamma: f64, phi: f64) -> InternalOperator {
    let g = Complex64::from_polar(1.0, phi);
    let a = Complex64::from_polar(theta.cos(), alpha);
    let b = Complex64::from_polar(theta.sin(), gamma);
    InternalOperator::from_rows(2, &[g * a, -g * b.conj(), g * b, g * a.conj()]).unwrap()
}

fn unitary_family(n: usize) -> Vec<InternalOperator> {
    (0..n - 1)
        .map(|i| {
            let k = i as f64;
            su2(0.3 + 0.7 * k, 1.1 * k, 0.4 - 0.9 * k, 0.2 * k)
        })
        .collect()
}

fn psi0() -> Vec<Complex64> {
    let s = 0.5f64.sqrt();
    vec![c(s, 0.0), c(0.0, s)]
}

#[test]
fn engine_marginals_follow_the_position_chain() {
    for &n in &[2usize, 3, 7, 20] {
        for &omega in &[0.2, 0.5, 2.0 / 3.0, 0.9] {
            let spec = LinearWalkSpec::new(n, omega, 1.0)
                .unwrap()
                .with_unitaries(unitary_family(n))
                .unwrap();
            let channel = build_channel(&spec).unwrap();
            let start = BlockState::localized(n, 0, &psi0()).unwrap();
            let p0 = Distribution::localized(n, 0).unwrap();
            let mut chain = p0.clone();
            let mut worst = 0.0f64;
            let mut worst_trace = 0.0f64;
            evolve_with(&channel, &start, 200, |k, state| {
                if k > 0 {
                    chain = markov_evolve(&spec, &chain, 1).unwrap();
                }
                let marginal = state.position_marginal();
                for (a, b) in marginal.iter().zip(chain.probs()) {
                    worst = worst.max((a - b).abs());
                }
                worst_trace = worst_trace.max((state.total_trace() - 1.0).abs());
            })
            .unwrap();
            assert!(worst <= 1e-10, "N={n} omega={omega}: {worst}");
            assert!(
                worst_trace <= 1e-12,
                "N={n} omega={omega}: trace {worst_trace}"
            );
        }
    }
}

#[test]
fn blocks_stay_pure_and_carry_the_path_unitaries() {
    let n = 8;
    let spec = LinearWalkSpec::new(n, 0.7, 1.0)
        .unwrap()
        .with_unitaries(unitary_family(n))
        .unwrap();
    let channel = build_channel(&spec).unwrap();
    let start = BlockState::localized(n, 0, &psi0()).unwrap();
    evolve_with(&channel, &start, 60, |_, state| {
        for (m, block) in state.blocks() {
            let p = block.trace().re;
            if p < 1e-300 {
                continue;
            }
            assert!((block.normalized_purity() - 1.0).abs() < 1e-10);
            let expected = internal_state_at_node(&spec, &psi0(), m).unwrap();
            let diff = (block.matrix() / c(p, 0.0) - expected.matrix())
                .map(|z| z.norm())
                .max();
            assert!(diff < 1e-10, "node {m}: {diff}");
        }
    })
    .unwrap();
}

#[test]
fn shannon_entropy_equals_von_neumann_entropy() {
    for &n in &[5usize, 12, 20] {
        let spec = LinearWalkSpec::new(n, 2.0 / 3.0, 1.0)
            .unwrap()
            .with_unitaries(unitary_family(n))
            .unwrap();
        let channel = build_channel(&spec).unwrap();
        let start = BlockState::localized(n, 0, &psi0()).unwrap();
        evolve_with(&channel, &start, 200, |k, state| {
            let shannon = Distribution::new(state.position_marginal())
                .unwrap()
                .entropy();
            let vn = state.von_neumann_entropy();
            assert!(
                (shannon - vn).abs() <= 1e-10,
                "N={n} n={k}: {shannon} vs {vn}"
            );
        })
        .unwrap();
    }
}

/// Apply the full Kraus operators `B_i^j ⊗ |j><i|` to a state with
/// node coherences and compare against the block update.
#[test]
fn full_kraus_sum_erases_node_coherences() {
    let spec = LinearWalkSpec::new(2, 0.6, 1.0)
        .unwrap()
        .with_unitaries(vec![su2(0.8, 0.3, -1.2, 0.5)])
        .unwrap();
    let channel = build_channel(&spec).unwrap();

    // Pure superposition over both nodes: |Psi> = (|0>|u> + |1>|w>) / sqrt(2).
    let s = 0.5f64.sqrt();
    let u = [c(0.6, 0.0), c(0.0, 0.8)];
    let w = [c(s, 0.0), c(-s * 0.6, s * 0.8)];
    let mut big = DMatrix::<Complex64>::zeros(4, 4);
    let psi: Vec<Complex64> = u.iter().chain(&w).map(|z| z * s).collect();
    for r in 0..4 {
        for col in 0..4 {
            big[(r, col)] = psi[r] * psi[col].conj();
        }
    }

    // Index (node, internal) -> 2 * node + internal.
    let mut out = DMatrix::<Complex64>::zeros(4, 4);
    for (i, j, b) in channel.transitions() {
        let mut kraus = DMatrix::<Complex64>::zeros(4, 4);
        for a in 0..2 {
            for bb in 0..2 {
                kraus[(2 * j + a, 2 * i + bb)] = b.matrix()[(a, bb)];
            }
        }
        out += &kraus * &big * kraus.adjoint();
    }

    for r in 0..2 {
        for col in 0..2 {
            assert!(out[(r, 2 + col)].norm() < 1e-15);
            assert!(out[(2 + r, col)].norm() < 1e-15);
        }
    }

    let diag = |node: usize| {
        let m = big.view((2 * node, 2 * node), (2, 2)).into_owned();
        InternalOperator::new(m).unwrap()
    };
    let blocks = [(0usize, diag(0)), (1usize, diag(1))].into_iter().collect();
    let block_state = BlockState::new(2, blocks).unwrap();
    let stepped = step(&channel, &block_state).unwrap();
    for node in 0..2 {
        let expected = out.view((2 * node, 2 * node), (2, 2)).into_owned();
        let got = stepped.block(node).unwrap().matrix();
        assert!((got - expected).map(|z| z.norm()).max() < 1e-14);
    }
}
