//! Gauss–Legendre rules mapped to `[0, 1]`, cached by order.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Nodes in increasing order on `[0, 1]`, weights summing to 1, and barycentric
/// interpolation weights for the same nodes.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub barycentric: Vec<f64>,
}

impl Rule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Barycentric coefficients `c_j` with `p(x) = Σ c_j p(x_j)` for polynomials of
    /// degree below the order.
    pub fn interpolation_row(&self, x: f64) -> Vec<f64> {
        if let Some(j) = self.nodes.iter().position(|&n| n == x) {
            let mut row = vec![0.0; self.order()];
            row[j] = 1.0;
            return row;
        }
        let mut row: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.barycentric)
            .map(|(&n, &b)| b / (x - n))
            .collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|c| *c /= total);
        row
    }
}

fn build(order: usize) -> Rule {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order is positive"));
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nodes = pairs.iter().map(|&(x, _)| 0.5 * (x + 1.0)).collect();
    let weights = pairs.iter().map(|&(_, w)| 0.5 * w).collect();
    // Barycentric weights for Gauss–Legendre points: (−1)^j √((1 − x_j²) λ_j).
    let barycentric = pairs
        .iter()
        .enumerate()
        .map(|(j, &(x, w))| {
            let s = ((1.0 - x * x) * w).sqrt();
            if j % 2 == 0 { s } else { -s }
        })
        .collect();
    Rule { nodes, weights, barycentric }
}

/// Gauss–Legendre rule of the given order on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(build(order.max(1)));
    cache
        .lock()
        .expect("rule cache poisoned")
        .entry(order)
        .or_insert(rule)
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // ∫₀¹ t⁹ dt = 1/10, degree 2·5 − 1.
        assert!((rule.integrate(|t| t.powi(9)) - 0.1).abs() < 1e-15);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn barycentric_reproduces_low_degree() {
        let rule = gauss_legendre(12);
        let f = |t: f64| 3.0 * t.powi(7) - t.powi(2) + 0.5;
        let values: Vec<f64> = rule.nodes.iter().map(|&t| f(t)).collect();
        for x in [0.0, 0.33, 1.0] {
            let row = rule.interpolation_row(x);
            let p: f64 = row.iter().zip(&values).map(|(c, v)| c * v).sum();
            assert!((p - f(x)).abs() < 1e-12, "{x}: {p} vs {}", f(x));
        }
    }
}
