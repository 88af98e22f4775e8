//! Gauss–Legendre rules on `[0, 1]` and their tensor products on the unit square.

/// A one-dimensional Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are found by Newton iteration on the Legendre polynomial,
    /// starting from the Chebyshev-like guess `cos(pi (i + 3/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // map [-1, 1] -> [0, 1]
            points[i] = 0.5 * (1.0 - z);
            points[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let h = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + h * t))
            .sum::<f64>()
            * h
    }
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor-product rule on the unit square: `(s, t, weight)` triples.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub nodes: Vec<([f64; 2], f64)>,
    order: usize,
}

impl TensorRule {
    pub fn new(order: usize) -> Self {
        let rule = GaussRule::new(order);
        let mut nodes = Vec::with_capacity(order * order);
        for (&t, &wt) in rule.points.iter().zip(&rule.weights) {
            for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
                nodes.push(([s, t], ws * wt));
            }
        }
        TensorRule { nodes, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in 1..=12 {
            let r = GaussRule::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n={n} sum={s}");
            assert!(r.points.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        for n in 1..=8 {
            let r = GaussRule::new(n);
            for deg in 0..2 * n {
                let got = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let want = 1.0 / (deg as f64 + 1.0);
                assert!((got - want).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn three_point_nodes() {
        let r = GaussRule::new(3);
        let c = 0.5 * (0.6f64).sqrt();
        assert!((r.points[0] - (0.5 - c)).abs() < 1e-15);
        assert!((r.points[1] - 0.5).abs() < 1e-15);
        assert!((r.weights[1] - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_rule_integrates_monomials() {
        let q = TensorRule::new(3);
        let v: f64 = q.nodes.iter().map(|(p, w)| w * p[0].powi(5) * p[1].powi(2)).sum();
        assert!((v - 1.0 / 18.0).abs() < 1e-15);
    }
}
