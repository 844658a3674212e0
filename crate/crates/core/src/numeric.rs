//! Small numerical kernels shared by the thermodynamic modules.

/// Below this magnitude the smooth remainders `bose_remainder` and
/// `sinh_remainder` switch to their Taylor series.
const SERIES_CUTOFF: f64 = 0.25;

/// `log(sum(exp(x)))` without overflow. Returns `-inf` for an empty slice.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `x log x` with the continuous extension `0 log 0 = 0`.
#[inline]
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy in nats.
pub(crate) fn shannon_entropy(probs: &[f64]) -> f64 {
    0.0 - probs.iter().map(|&p| xlogx(p)).sum::<f64>()
}

/// `1/(e^y - 1) - 1/y + 1/2`, smooth and odd, with value 0 at the origin.
pub(crate) fn bose_remainder(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        let y2 = y * y;
        // Bernoulli series: y/12 - y^3/720 + y^5/30240 - ...
        y * (1.0 / 12.0
            + y2 * (-1.0 / 720.0
                + y2 * (1.0 / 30240.0
                    + y2 * (-1.0 / 1_209_600.0
                        + y2 * (1.0 / 47_900_160.0 + y2 * (-691.0 / 1_307_674_368_000.0))))))
    } else {
        1.0 / y.exp_m1() - 1.0 / y + 0.5
    }
}

/// `1/(4 sinh^2(y/2)) - 1/y^2`, smooth and even, with value -1/12 at the origin.
pub(crate) fn sinh_remainder(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        let y2 = y * y;
        -1.0 / 12.0
            + y2 * (1.0 / 240.0
                + y2 * (-1.0 / 6048.0
                    + y2 * (1.0 / 172_800.0
                        + y2 * (-1.0 / 5_322_240.0 + y2 * (691.0 / 118_879_488_000.0)))))
    } else {
        inv_four_sinh_sq_half(y) - 1.0 / (y * y)
    }
}

/// `e^y / (e^y - 1)^2 = 1 / (4 sinh^2(y/2))`, zero when `|y|` is large enough
/// to underflow.
pub(crate) fn inv_four_sinh_sq_half(y: f64) -> f64 {
    let a = y.abs();
    if a > 700.0 {
        // e^{-a} / (1 - e^{-a})^2 underflows gracefully.
        return (-a).exp();
    }
    let s = (0.5 * y).sinh();
    1.0 / (4.0 * s * s)
}

/// Integrate `f` over `[a, b]` with composite Simpson's rule on `n` panels.
#[cfg(test)]
pub(crate) fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}
