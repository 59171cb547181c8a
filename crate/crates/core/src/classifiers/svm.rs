//! One-vs-one soft-margin SVM trained by SMO.

use serde::{Deserialize, Serialize};

use super::smo::{self, Gram};
use super::{check_dim, sq_dist, Classifier, ClassifierKind};
use crate::dataset_io::TrainingSet;
use crate::error::{Error, Result};
use crate::tissue::{Tissue, NUM_TISSUES};

/// Multipliers at or below this are dropped from the stored model.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Tolerance on `sum a_i y_i` accepted when loading a model.
pub const BALANCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(p, q)| p * q).sum(),
            Kernel::Rbf { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(
                Error::InvalidConfig(format!("rbf gamma must be positive, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: Kernel,
    pub tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: Kernel::Rbf {
                gamma: 1.0 / crate::FEATURE_DIM as f64,
            },
            tol: 1e-3,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "SVM C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "SVM tolerance must be positive, got {}",
                self.tol
            )));
        }
        self.kernel.validate()
    }
}

/// Iteration budget for a pair of `n` points: ten sweeps of `n` pair
/// updates per point, with a floor for tiny problems.
pub fn iteration_cap(n: usize) -> usize {
    (10 * n * n).max(10_000)
}

/// Binary machine separating `positive` (+1, the lower code) from
/// `negative` (-1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: Tissue,
    pub negative: Tissue,
    /// Support vectors, flattened row-major.
    pub support_vectors: Vec<f64>,
    pub alpha: Vec<f64>,
    /// +1.0 or -1.0 per support vector.
    pub y: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    pub fn support_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn decision(&self, kernel: &Kernel, dim: usize, x: &[f64]) -> f64 {
        self.support_vectors
            .chunks_exact(dim)
            .zip(self.alpha.iter().zip(&self.y))
            .map(|(sv, (a, y))| a * y * kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn alpha_y_sum(&self) -> f64 {
        self.alpha.iter().zip(&self.y).map(|(a, y)| a * y).sum()
    }
}

/// Solver outcome for one class pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDiagnostics {
    pub positive: Tissue,
    pub negative: Tissue,
    pub size: usize,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_violation: f64,
    pub alpha_y_sum: f64,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    dim: usize,
    c: f64,
    kernel: Kernel,
    machines: Vec<BinarySvm>,
    /// Pairs with no samples on at least one side.
    skipped_pairs: Vec<(Tissue, Tissue)>,
    /// Pairs that hit the iteration cap before meeting the tolerance.
    convergence_warnings: Vec<(Tissue, Tissue)>,
}

impl SvmModel {
    pub fn machines(&self) -> &[BinarySvm] {
        &self.machines
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn skipped_pairs(&self) -> &[(Tissue, Tissue)] {
        &self.skipped_pairs
    }

    pub fn convergence_warnings(&self) -> &[(Tissue, Tissue)] {
        &self.convergence_warnings
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ModelLoad(msg));
        if self.dim == 0 {
            return bad("SVM dimension is zero".into());
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("SVM C must be positive, got {}", self.c));
        }
        self.kernel
            .validate()
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        let mut seen = [[false; NUM_TISSUES]; NUM_TISSUES];
        let pairs = self
            .machines
            .iter()
            .map(|m| (m.positive, m.negative))
            .chain(self.skipped_pairs.iter().copied());
        for (p, n) in pairs {
            if p >= n {
                return bad(format!("pair ({p}, {n}) is not ordered by code"));
            }
            if std::mem::replace(&mut seen[p.index()][n.index()], true) {
                return bad(format!("pair ({p}, {n}) appears twice"));
            }
        }
        for p in Tissue::ALL {
            for n in Tissue::ALL.into_iter().filter(|n| *n > p) {
                if !seen[p.index()][n.index()] {
                    return bad(format!("pair ({p}, {n}) is missing"));
                }
            }
        }
        if self.machines.is_empty() {
            return bad("SVM has no trained pairs".into());
        }
        for m in &self.machines {
            let name = format!("pair ({}, {})", m.positive, m.negative);
            if m.alpha.len() != m.y.len() || m.support_vectors.len() != m.alpha.len() * self.dim {
                return bad(format!("{name}: array lengths disagree"));
            }
            if m.alpha.iter().any(|a| !(0.0..=self.c).contains(a)) {
                return bad(format!("{name}: multiplier outside [0, C]"));
            }
            if m.y.iter().any(|y| *y != 1.0 && *y != -1.0) {
                return bad(format!("{name}: labels must be +1 or -1"));
            }
            if !m.bias.is_finite() || m.support_vectors.iter().any(|v| !v.is_finite()) {
                return bad(format!("{name}: non-finite parameters"));
            }
            if m.alpha_y_sum().abs() > BALANCE_TOLERANCE {
                return bad(format!("{name}: sum of alpha*y is {}", m.alpha_y_sum()));
            }
        }
        Ok(())
    }

    /// Decision values of every machine, in pair order.
    pub fn decisions(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        Ok(self
            .machines
            .iter()
            .map(|m| m.decision(&self.kernel, self.dim, x))
            .collect())
    }
}

impl Classifier for SvmModel {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Svm
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// Pairwise vote. A non-negative decision counts for the lower code.
    /// Vote ties go to the larger accumulated |decision|, then the lower code.
    fn predict(&self, x: &[f64]) -> Result<Tissue> {
        let mut votes = [0usize; NUM_TISSUES];
        let mut strength = [0.0f64; NUM_TISSUES];
        for (m, d) in self.machines.iter().zip(self.decisions(x)?) {
            let winner = if d >= 0.0 { m.positive } else { m.negative };
            votes[winner.index()] += 1;
            strength[winner.index()] += d.abs();
        }
        let best = Tissue::ALL
            .into_iter()
            .filter(|t| votes[t.index()] > 0)
            .min_by(|a, b| {
                votes[b.index()]
                    .cmp(&votes[a.index()])
                    .then(strength[b.index()].total_cmp(&strength[a.index()]))
                    .then(a.cmp(b))
            })
            .expect("a trained SVM has at least one machine");
        Ok(best)
    }
}

/// Trains one binary machine on the given rows; `y` holds +1/-1.
pub fn train_binary(
    rows: &[&[f64]],
    y: &[f64],
    config: &SvmConfig,
) -> (smo::SmoSolution, Gram) {
    let gram = Gram::from_fn(rows.len(), |i, j| config.kernel.eval(rows[i], rows[j]));
    let sol = smo::solve(&gram, y, config.c, config.tol, iteration_cap(rows.len()));
    (sol, gram)
}

pub fn train_svm(ts: &TrainingSet, config: &SvmConfig) -> Result<SvmModel> {
    train_svm_with_diagnostics(ts, config).map(|(m, _)| m)
}

pub fn train_svm_with_diagnostics(
    ts: &TrainingSet,
    config: &SvmConfig,
) -> Result<(SvmModel, Vec<PairDiagnostics>)> {
    config.validate()?;
    let counts = ts.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::InvalidConfig(format!(
            "SVM needs at least two classes, found {present}"
        )));
    }
    let dim = crate::FEATURE_DIM;
    let mut machines = Vec::new();
    let mut skipped_pairs = Vec::new();
    let mut convergence_warnings = Vec::new();
    let mut diagnostics = Vec::new();

    for p in Tissue::ALL {
        for n in Tissue::ALL.into_iter().filter(|n| *n > p) {
            if counts[p.index()] == 0 || counts[n.index()] == 0 {
                skipped_pairs.push((p, n));
                continue;
            }
            let (rows, y): (Vec<&[f64]>, Vec<f64>) = ts
                .features
                .iter()
                .zip(&ts.labels)
                .filter(|(_, l)| **l == p || **l == n)
                .map(|(f, l)| (f.as_slice(), if *l == p { 1.0 } else { -1.0 }))
                .unzip();
            let (sol, gram) = train_binary(&rows, &y, config);
            if !sol.converged {
                convergence_warnings.push((p, n));
            }
            diagnostics.push(PairDiagnostics {
                positive: p,
                negative: n,
                size: rows.len(),
                iterations: sol.iterations,
                converged: sol.converged,
                kkt_violation: smo::kkt_violation(&gram, &y, &sol.alpha, sol.bias, config.c),
                alpha_y_sum: sol.alpha_y_sum(&y),
                dual_objective: sol.dual_objective(&gram, &y),
            });
            let mut machine = BinarySvm {
                positive: p,
                negative: n,
                support_vectors: Vec::new(),
                alpha: Vec::new(),
                y: Vec::new(),
                bias: sol.bias,
            };
            for (i, &a) in sol.alpha.iter().enumerate() {
                if a > SUPPORT_THRESHOLD {
                    machine.support_vectors.extend_from_slice(rows[i]);
                    machine.alpha.push(a);
                    machine.y.push(y[i]);
                }
            }
            machines.push(machine);
        }
    }

    let model = SvmModel {
        dim,
        c: config.c,
        kernel: config.kernel,
        machines,
        skipped_pairs,
        convergence_warnings,
    };
    Ok((model, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FeatureVector;

    fn v(x: f64, y: f64) -> FeatureVector {
        let mut a = [0.0; 9];
        a[0] = x;
        a[1] = y;
        a
    }

    fn linear() -> SvmConfig {
        SvmConfig {
            kernel: Kernel::Linear,
            c: 10.0,
            ..SvmConfig::default()
        }
    }

    #[test]
    fn separable_line_is_split_between_points() {
        let ts = TrainingSet::from_rows(vec![
            (v(-1.0, 0.0), Tissue::Skull),
            (v(1.0, 0.0), Tissue::Csf),
        ]);
        let (model, diag) = train_svm_with_diagnostics(&ts, &linear()).unwrap();
        assert_eq!(model.machines().len(), 1);
        assert_eq!(model.skipped_pairs().len(), 9);
        assert!(diag[0].converged);
        let m = &model.machines()[0];
        assert!(m.decision(&model.kernel(), 9, &v(-1.0, 0.0)) > 0.0);
        assert!(m.decision(&model.kernel(), 9, &v(1.0, 0.0)) < 0.0);
        assert_eq!(model.predict(&v(-0.3, 5.0)).unwrap(), Tissue::Skull);
        assert_eq!(model.predict(&v(0.3, -5.0)).unwrap(), Tissue::Csf);
        model.validate().unwrap();
    }

    #[test]
    fn midpoint_tie_goes_to_lower_code() {
        let ts = TrainingSet::from_rows(vec![
            (v(-1.0, 0.0), Tissue::GrayMatter),
            (v(1.0, 0.0), Tissue::Skull),
        ]);
        let model = train_svm(&ts, &linear()).unwrap();
        let d = model.decisions(&v(0.0, 0.0)).unwrap();
        assert_eq!(d, vec![0.0]);
        assert_eq!(model.predict(&v(0.0, 0.0)).unwrap(), Tissue::Skull);
    }

    #[test]
    fn five_clusters_are_recovered() {
        let mut rows = Vec::new();
        for t in Tissue::ALL {
            let cx = t.code() as f64 * 3.0;
            for k in 0..4 {
                rows.push((v(cx + 0.1 * k as f64, (k % 2) as f64 * 0.2), t));
            }
        }
        let ts = TrainingSet::from_rows(rows);
        let (model, diag) = train_svm_with_diagnostics(&ts, &SvmConfig::default()).unwrap();
        assert_eq!(model.machines().len(), 10);
        for d in &diag {
            assert!(d.converged);
            assert!(d.kkt_violation < 1e-3, "{d:?}");
            assert!(d.alpha_y_sum.abs() < 1e-6);
        }
        for t in Tissue::ALL {
            assert_eq!(model.predict(&v(t.code() as f64 * 3.0 + 0.15, 0.1)).unwrap(), t);
        }
    }

    #[test]
    fn rejects_bad_config_and_single_class() {
        let ts = TrainingSet::from_rows(vec![(v(0.0, 0.0), Tissue::Skull)]);
        assert_eq!(train_svm(&ts, &SvmConfig::default()).unwrap_err().code(), "InvalidConfig");
        let two = TrainingSet::from_rows(vec![
            (v(0.0, 0.0), Tissue::Skull),
            (v(1.0, 0.0), Tissue::Csf),
        ]);
        let bad = SvmConfig { c: 0.0, ..SvmConfig::default() };
        assert_eq!(train_svm(&two, &bad).unwrap_err().code(), "InvalidConfig");
        let bad = SvmConfig { kernel: Kernel::Rbf { gamma: -1.0 }, ..SvmConfig::default() };
        assert_eq!(train_svm(&two, &bad).unwrap_err().code(), "InvalidConfig");
    }

    #[test]
    fn validation_catches_tampering() {
        let ts = TrainingSet::from_rows(vec![
            (v(-1.0, 0.0), Tissue::Skull),
            (v(1.0, 0.0), Tissue::Csf),
        ]);
        let model = train_svm(&ts, &linear()).unwrap();
        let mut m = model.clone();
        m.machines[0].alpha[0] = 11.0;
        assert_eq!(m.validate().unwrap_err().code(), "ModelLoadError");
        let mut m = model.clone();
        m.machines[0].alpha[0] *= 0.5;
        assert_eq!(m.validate().unwrap_err().code(), "ModelLoadError");
        let mut m = model;
        m.skipped_pairs.pop();
        assert_eq!(m.validate().unwrap_err().code(), "ModelLoadError");
    }
}
