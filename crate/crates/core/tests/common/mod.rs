//! Independent reference implementations used by the integration tests.
//! They follow the textbook definitions directly and share no code with the
//! library beyond its data types.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use mriseg::dataset_io::LabelMap;
use mriseg::rng::Rng;
use mriseg::{FeatureVector, Tissue};

pub fn random_vector(rng: &mut Rng, scale: f64) -> FeatureVector {
    std::array::from_fn(|_| rng.uniform_range(-scale, scale))
}

pub fn random_grid_vector(rng: &mut Rng, levels: u64) -> FeatureVector {
    std::array::from_fn(|_| rng.below(levels) as f64)
}

pub fn euclid2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    s
}

/// Parzen density with a Gaussian kernel, written out term by term.
pub fn parzen_density(patterns: &[Vec<f64>], sigma: f64, x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let norm = 1.0 / ((2.0 * PI).powf(n / 2.0) * sigma.powf(n));
    let mut acc = 0.0;
    for p in patterns {
        acc += (-euclid2(x, p) / (2.0 * sigma * sigma)).exp();
    }
    norm * acc / patterns.len() as f64
}

/// Bayes decision with uniform priors and costs; lowest code on ties.
pub fn pnn_decision(patterns: &[Vec<Vec<f64>>; 5], sigma: f64, x: &[f64]) -> Tissue {
    let mut best = 0;
    let mut best_score = -1.0;
    for (c, pats) in patterns.iter().enumerate() {
        let s = 0.2 * 1.0 * parzen_density(pats, sigma, x);
        if s > best_score {
            best_score = s;
            best = c;
        }
    }
    Tissue::ALL[best]
}

/// Exhaustive k-NN: sort every point by (distance, index), vote, break vote
/// ties by the closest member and then the lowest code.
pub fn knn_decision(points: &[FeatureVector], labels: &[Tissue], k: usize, x: &[f64]) -> Tissue {
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (euclid2(x, p), i))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = [0usize; 5];
    let mut nearest = [f64::MAX; 5];
    for &(d, i) in &order[..k] {
        let c = labels[i].code() as usize;
        votes[c] += 1;
        if d < nearest[c] {
            nearest[c] = d;
        }
    }
    let top = *votes.iter().max().unwrap();
    let mut best: Option<usize> = None;
    for c in 0..5 {
        if votes[c] != top {
            continue;
        }
        match best {
            None => best = Some(c),
            Some(b) if nearest[c] < nearest[b] => best = Some(c),
            _ => {}
        }
    }
    Tissue::ALL[best.unwrap()]
}

/// Nearest prototype by exhaustive scan, earliest on ties.
pub fn nearest_prototype(weights: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..weights.len() {
        if euclid2(x, &weights[i]) < euclid2(x, &weights[best]) {
            best = i;
        }
    }
    best
}

/// Maximizes the SVM dual by enumerating which multipliers sit at 0, at C
/// or strictly inside, solving the equality-constrained stationarity system
/// on each face and keeping the best feasible point. Exact for small
/// problems with a positive definite kernel matrix.
pub fn dual_optimum(k: &DMatrix<f64>, y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let objective = |a: &[f64]| {
        let av = DVector::from_column_slice(a);
        av.sum() - 0.5 * (av.transpose() * &q * &av)[(0, 0)]
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut r = code;
        for s in state.iter_mut() {
            *s = (r % 3) as u8;
            r /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let m = free.len();
        if m > 0 {
            // [Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B]
            let mut lhs = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    lhs[(r, s)] = q[(i, j)];
                }
                lhs[(r, m)] = y[i];
                lhs[(m, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|j| state[*j] == 1).map(|j| q[(i, j)] * c).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|j| state[*j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = lhs.lu().solve(&rhs) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-12..=c + 1e-12).contains(&a))
            && alpha.iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>().abs() < 1e-9;
        if feasible {
            let v = objective(&alpha);
            if v > best.0 {
                best = (v, alpha);
            }
        }
    }
    best
}

/// Counts computed from a full 5x5 confusion matrix.
pub fn matrix_counts(pred: &LabelMap, truth: &LabelMap, tissue: Tissue) -> (u64, u64, u64) {
    let mut m = [[0u64; 5]; 5];
    for y in 0..truth.height() {
        for x in 0..truth.width() {
            m[pred.get(x, y).code() as usize][truth.get(x, y).code() as usize] += 1;
        }
    }
    let t = tissue.code() as usize;
    let tp = m[t][t];
    let fp: u64 = (0..5).filter(|&j| j != t).map(|j| m[t][j]).sum();
    let fn_: u64 = (0..5).filter(|&i| i != t).map(|i| m[i][t]).sum();
    (tp, fp, fn_)
}

/// F-measure as the rational 2tp / (2tp + fp + fn), with the
/// absent-class convention.
pub fn rational_f(tp: u64, fp: u64, fn_: u64) -> f64 {
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
    }
}
