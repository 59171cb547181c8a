//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! maximize   sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
//! subject to 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! Pairs are chosen by maximal violation for the first index and
//! second-order gain for the second; the solver stops once the gap between
//! the largest and smallest KKT multiplier estimate drops below `tol`.

/// Curvature used when a pair's second derivative is not positive.
const MIN_CURVATURE: f64 = 1e-12;

/// Dense symmetric kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    values: Vec<f64>,
}

impl Gram {
    pub fn from_fn(n: usize, mut k: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = k(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Gram { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Offset `b` of the decision function `sum_i a_i y_i K(x_i, x) + b`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SmoSolution {
    pub fn dual_objective(&self, gram: &Gram, y: &[f64]) -> f64 {
        dual_objective(gram, y, &self.alpha)
    }

    /// `sum_i a_i y_i`.
    pub fn alpha_y_sum(&self, y: &[f64]) -> f64 {
        self.alpha.iter().zip(y).map(|(a, yi)| a * yi).sum()
    }
}

pub fn dual_objective(gram: &Gram, y: &[f64], alpha: &[f64]) -> f64 {
    let n = gram.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram.get(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Largest KKT violation over the training points, measured on
/// `y_i f(x_i)` against the margin 1.
pub fn kkt_violation(gram: &Gram, y: &[f64], alpha: &[f64], bias: f64, c: f64) -> f64 {
    let n = gram.len();
    (0..n)
        .map(|i| {
            let f: f64 = (0..n).map(|j| alpha[j] * y[j] * gram.get(i, j)).sum::<f64>() + bias;
            let margin = y[i] * f;
            if alpha[i] <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if alpha[i] >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Solves the dual for labels `y` in {-1, +1}, starting from `a = 0`.
pub fn solve(gram: &Gram, y: &[f64], c: f64, tol: f64, max_iterations: usize) -> SmoSolution {
    let n = gram.len();
    assert_eq!(y.len(), n, "label count must match the kernel matrix");
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a, with Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    while iterations < max_iterations {
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };

        let k_i = gram.row(i);
        let mut g_max2 = f64::NEG_INFINITY;
        let mut best_gain = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = y[t] * grad[t];
            g_max2 = g_max2.max(v);
            let diff = g_max + v;
            if diff > 0.0 {
                let curvature = (k_i[i] + gram.get(t, t) - 2.0 * k_i[t]).max(MIN_CURVATURE);
                let gain = -(diff * diff) / curvature;
                if gain <= best_gain {
                    best_gain = gain;
                    j_sel = Some(t);
                }
            }
        }
        let j = match j_sel {
            Some(j) if g_max + g_max2 >= tol => j,
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;

        let k_j = gram.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let curvature = (k_i[i] + k_j[j] - 2.0 * k_i[j]).max(MIN_CURVATURE);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / curvature;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / curvature;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (d_i, d_j) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            // Q_ti = y_t y_i K_ti
            grad[t] += y[t] * (y[i] * k_i[t] * d_i + y[j] * k_j[t] * d_j);
        }
    }

    SmoSolution {
        bias: -threshold(&alpha, &grad, y, c),
        alpha,
        iterations,
        converged,
    }
}

/// Offset `rho` (decision = sum a y K - rho): the mean of `y_i G_i` over free
/// multipliers, or the midpoint of the feasible interval when none are free.
fn threshold(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (upper + lower) / 2.0
    }
}
