//! Composite Gauss-Legendre quadrature on panels aligned with integrand
//! breakpoints. For piecewise-polynomial integrands of low degree the rule
//! is exact up to rounding.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes per panel; panels are at most one unit long.
pub const NODES_PER_PANEL: usize = 16;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]` via Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn standard() -> &'static Self {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| Self::new(NODES_PER_PANEL))
    }

    /// `(node, weight)` pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels covering `[lo, hi]`: split at every breakpoint inside the range,
/// then subdivide so no panel is longer than one unit.
pub fn panels(lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    if hi <= lo {
        return Vec::new();
    }
    let mut knots: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let pieces = (w[1] - w[0]).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / pieces as f64;
        for i in 0..pieces {
            let a = w[0] + step * i as f64;
            let b = if i + 1 == pieces { w[1] } else { a + step };
            out.push((a, b));
        }
    }
    out
}

/// `∫_lo^hi f` with panels aligned to `breakpoints`.
pub fn integrate_1d(lo: f64, hi: f64, breakpoints: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::standard();
    panels(lo, hi, breakpoints)
        .into_iter()
        .map(|(a, b)| rule.integrate(a, b, &f))
        .sum()
}

/// `∫∫_{[lo,hi]^2} f` on the tensor product of aligned panels.
pub fn integrate_2d(
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    f: impl Fn(f64, f64) -> f64 + Sync,
) -> f64 {
    use rayon::prelude::*;
    let rule = GaussLegendre::standard();
    let panels = panels(lo, hi, breakpoints);
    panels
        .par_iter()
        .map(|&(ax, bx)| {
            let mut acc = 0.0;
            for (x, wx) in rule.mapped(ax, bx) {
                for &(ay, by) in &panels {
                    for (y, wy) in rule.mapped(ay, by) {
                        acc += wx * wy * f(x, y);
                    }
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let rule = GaussLegendre::new(16);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_degree_31() {
        let rule = GaussLegendre::new(16);
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(30));
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn aligned_panels_integrate_kinks_exactly() {
        let v = integrate_1d(-1.0, 2.0, &[0.0], |x| x.abs());
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn panels_are_at_most_unit_length() {
        for (a, b) in panels(0.0, 5.5, &[2.25]) {
            assert!(b - a <= 1.0 + 1e-12);
        }
    }
}
