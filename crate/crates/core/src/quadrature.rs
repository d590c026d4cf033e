//! Gauss-Legendre rules.

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    /// Nodes in `(-1, 1)`, ascending.
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub order: usize,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let (mut p0, mut p1) = (T::one(), x);
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::of(k as f64);
        let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of(n as f64);
    (p1, nf * (x * p1 - p0) / (x * x - T::one()))
}

impl<T: Real> QuadratureRule<T> {
    /// `n`-point Gauss-Legendre rule on `[-1, 1]`, exact for degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let tol = T::epsilon() * T::of(4.0);
        for i in 0..n.div_ceil(2) {
            let guess = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
            let mut x = T::of(guess.cos());
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() <= tol {
                    break;
                }
            }
            let dp = legendre(n, x).1;
            let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights, order: n }
    }

    /// `int_a^b f` with the rule mapped onto `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::of(2.0);
        let mid = (a + b) / T::of(2.0);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * *x);
        }
        acc * half
    }

    /// Composite rule over `panels` equal subintervals.
    pub fn integrate_composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let h = (b - a) / T::of(panels as f64);
        (0..panels).fold(T::zero(), |acc, i| {
            let lo = a + h * T::of(i as f64);
            acc + self.integrate(lo, lo + h, &mut f)
        })
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> (Vec<T>, Vec<T>) {
        let half = (b - a) / T::of(2.0);
        let mid = (a + b) / T::of(2.0);
        let x = self.nodes.iter().map(|&t| mid + half * t).collect();
        let w = self.weights.iter().map(|&w| w * half).collect();
        (x, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 7, 20, 80] {
            let r = QuadratureRule::<f64>::gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "{n}: {s}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let n = 10;
        let r = QuadratureRule::<f64>::gauss_legendre(n);
        for k in 0..2 * n {
            let got = r.integrate(-1.0, 1.0, |x| x.powi(k as i32));
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "x^{k}: {got}");
        }
        let over = r.integrate(-1.0, 1.0, |x| x.powi(2 * n as i32));
        assert!((over - 2.0 / (2.0 * n as f64 + 1.0)).abs() > 1e-8);
    }

    #[test]
    fn double_double_rule() {
        let r = QuadratureRule::<DoubleDouble>::gauss_legendre(30);
        let v = r.integrate(DoubleDouble::ZERO, DoubleDouble::ONE, |x| x.exp());
        let e = DoubleDouble::ONE.exp() - DoubleDouble::ONE;
        assert!((v - e).abs().hi < 1e-30);
    }
}
