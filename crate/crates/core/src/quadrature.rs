//! Gauss-type quadrature rules and spectral differentiation matrices.
//!
//! Sphere grids integrate in `x = cos(theta)` against the weight
//! `(1 - x^2)^a` with `a = (n - 3) / 2`, which is exactly the polar factor
//! `sin(theta)^(n-2) d(theta)` of the round measure on `S^(n-1)`. Using
//! Gauss–Jacobi nodes for that weight keeps the rule spectrally accurate in
//! every dimension (plain Gauss–Legendre loses that for even `n`).

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrates `f` over the rule's interval.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Affinely maps the rule from `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi_symmetric(n, 0.0)
}

/// Recurrence coefficient `b_k` of the orthonormal polynomials for the weight
/// `(1 - x^2)^a` (the symmetric Jacobi case `alpha = beta = a`).
fn jacobi_offdiag(k: usize, a: f64) -> f64 {
    let k = k as f64;
    let s = 2.0 * k + 2.0 * a;
    (k * (k + 2.0 * a) / ((s + 1.0) * (s - 1.0))).sqrt()
}

/// `int_{-1}^{1} (1 - x^2)^a dx = sqrt(pi) Gamma(a + 1) / Gamma(a + 3/2)`,
/// evaluated for integer and half-integer `a` by the two-step recurrence.
pub fn symmetric_jacobi_mass(a: f64) -> f64 {
    let twice = (2.0 * a).round();
    assert!(
        (2.0 * a - twice).abs() < 1e-12 && twice >= 0.0,
        "weight exponent must be a non-negative half-integer"
    );
    // mu(a) = mu(a - 1) * 2a / (2a + 1)
    let mut k = twice as i64;
    let mut mu = if k % 2 == 0 { 2.0 } else { PI / 2.0 };
    let mut base = if k % 2 == 0 { 0.0 } else { 0.5 };
    k -= if k % 2 == 0 { 0 } else { 1 };
    while k > 0 {
        base += 1.0;
        mu *= 2.0 * base / (2.0 * base + 1.0);
        k -= 2;
    }
    mu
}

/// Evaluates the orthonormal polynomials `p_0..p_n` at `x` and returns
/// `(p_n(x), p_n'(x), sum_{k<n} p_k(x)^2)`.
fn orthonormal_eval(n: usize, a: f64, mu: f64, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mu.sqrt();
    let mut dp = 0.0;
    let mut christoffel = 0.0;
    let mut b_prev = 0.0;
    for k in 0..n {
        christoffel += p * p;
        let b = jacobi_offdiag(k + 1, a);
        let p_next = (x * p - b_prev * p_prev) / b;
        let dp_next = (p + x * dp - b_prev * dp_prev) / b;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        b_prev = b;
    }
    (p, dp, christoffel)
}

/// Gauss rule for the weight `(1 - x^2)^a` on `[-1, 1]`, nodes ascending.
///
/// Golub–Welsch supplies the starting nodes; each is then polished by Newton
/// on the three-term recurrence and the weights are recomputed as Christoffel
/// numbers, which brings both to full double precision.
pub fn gauss_jacobi_symmetric(n: usize, a: f64) -> Rule {
    assert!(n >= 1, "quadrature needs at least one node");
    let mu = symmetric_jacobi_mass(a);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = jacobi_offdiag(k, a);
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.total_cmp(y));

    // Symmetrise: the rule is exactly symmetric about the origin.
    for i in 0..n / 2 {
        let v = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -v;
        nodes[n - 1 - i] = v;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights = vec![0.0; n];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..8 {
            let (p, dp, _) = orthonormal_eval(n, a, mu, *x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
        let (_, _, christoffel) = orthonormal_eval(n, a, mu, *x);
        *w = 1.0 / christoffel;
    }
    for i in 0..n / 2 {
        let v = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -v;
        nodes[n - 1 - i] = v;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Fejér's first rule in `x = cos(theta)` on the midpoint angles
/// `theta_j = (j + 1/2) pi / n`, returned in order of increasing `theta`
/// (decreasing `x`). The weights integrate `f(x) dx` over `[-1, 1]`.
pub fn fejer_first(n: usize) -> (Vec<f64>, Vec<f64>) {
    let thetas: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect();
    let weights = thetas
        .iter()
        .map(|&t| {
            let s: f64 = (1..=n / 2)
                .map(|k| {
                    let k = k as f64;
                    (2.0 * k * t).cos() / (4.0 * k * k - 1.0)
                })
                .sum();
            2.0 / n as f64 * (1.0 - 2.0 * s)
        })
        .collect();
    (thetas, weights)
}

/// Polynomial collocation derivative on an arbitrary set of distinct nodes.
#[derive(Debug, Clone)]
pub struct Differentiator {
    size: usize,
    matrix: Vec<f64>,
}

impl Differentiator {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        // Barycentric weights 1 / prod(x_j - x_k), accumulated in log form.
        // The factor 2 keeps the product O(1) on [-1, 1].
        let mut bary = vec![(0.0_f64, 0.0_f64); n];
        for j in 0..n {
            let mut log_mag = 0.0;
            let mut sign = 1.0;
            for k in 0..n {
                if k != j {
                    let d = 2.0 * (nodes[j] - nodes[k]);
                    log_mag += d.abs().ln();
                    if d < 0.0 {
                        sign = -sign;
                    }
                }
            }
            bary[j] = (sign, -log_mag);
        }
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let ratio = bary[j].0 * bary[i].0 * (bary[j].1 - bary[i].1).exp();
                    matrix[i * n + j] = ratio / (nodes[i] - nodes[j]);
                }
            }
        }
        Self { size: n, matrix }
    }

    /// Derivative of the interpolant of `values` at every node.
    ///
    /// Uses `sum_j D_ij (f_j - f_i)`, so constants differentiate to exactly
    /// zero.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.size);
        (0..self.size)
            .map(|i| {
                let row = &self.matrix[i * self.size..(i + 1) * self.size];
                let fi = values[i];
                row.iter().zip(values).map(|(d, f)| d * (f - fi)).sum()
            })
            .collect()
    }
}
