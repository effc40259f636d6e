//! L2-regularized logistic regression fitted by accelerated full-batch
//! gradient descent. The objective is the mean log-loss plus `‖w‖²/(2CN)`,
//! matching the usual `C`-parameterization; the intercept is unpenalized.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result, RtoError};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iter: usize,
    /// Stop once every gradient coordinate is below this.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 500,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScorer {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

impl LinearScorer {
    fn margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(RtoError::Mismatch(format!(
                "{} features for a scorer of dimension {}",
                x.len(),
                self.weights.len()
            )));
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    /// `2σ(w·x + b) − 1`, computed as `tanh((w·x + b)/2)`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok((self.margin(x)? / 2.0).tanh())
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.margin(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.margin(x)? > 0.0)
    }

    pub fn accuracy(&self, features: &[Vec<f64>], labels: &[bool]) -> Result<f64> {
        if features.is_empty() {
            return Err(RtoError::EmptyDataset);
        }
        let mut hits = 0usize;
        for (x, &y) in features.iter().zip(labels) {
            hits += usize::from(self.predict(x)? == y);
        }
        Ok(hits as f64 / features.len() as f64)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_inputs(features: &[Vec<f64>], labels: &[bool]) -> Result<usize> {
    if features.is_empty() {
        return Err(RtoError::EmptyDataset);
    }
    if features.len() != labels.len() {
        return Err(RtoError::Mismatch(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let d = features[0].len();
    for (i, row) in features.iter().enumerate() {
        if row.len() != d {
            return Err(RtoError::Data(format!("row {i} has {} features, expected {d}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(RtoError::Data(format!("row {i} has a non-finite feature")));
        }
    }
    Ok(d)
}

/// Gradient of the objective at `(w, b)`, written into `gw`; returns `gb`.
fn gradient(features: &[Vec<f64>], labels: &[bool], w: &[f64], b: f64, c: f64, gw: &mut [f64]) -> f64 {
    let n = features.len() as f64;
    gw.iter_mut().for_each(|g| *g = 0.0);
    let mut gb = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let r = sigmoid(dot(w, x) + b) - f64::from(u8::from(y));
        gb += r;
        for (g, v) in gw.iter_mut().zip(x) {
            *g += r * v;
        }
    }
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + wj / (c * n);
    }
    gb / n
}

pub fn linear_scorer_fit(
    features: &[Vec<f64>],
    labels: &[bool],
    config: &LogisticConfig,
) -> Result<LinearScorer> {
    let d = check_inputs(features, labels)?;
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(invalid(format!("C must be positive, got {}", config.c)));
    }
    let n = features.len() as f64;
    // Lipschitz constant of the gradient, bounded through the trace of XᵀX/N.
    let trace = features.iter().map(|x| dot(x, x)).sum::<f64>() / n;
    let lipschitz = 0.25 * (trace + 1.0) + 1.0 / (config.c * n);
    let step = 1.0 / lipschitz;

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut w_prev = w.clone();
    let mut yw = w.clone();
    let mut yb = b;
    let mut gw = vec![0.0; d];
    let mut t = 1.0f64;
    for _ in 0..config.max_iter {
        let gb = gradient(features, labels, &yw, yb, config.c, &mut gw);
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < config.tolerance {
            w.clone_from(&yw);
            b = yb;
            break;
        }
        w_prev.clone_from(&w);
        let b_prev = b;
        for ((wj, yj), g) in w.iter_mut().zip(&yw).zip(&gw) {
            *wj = yj - step * g;
        }
        b = yb - step * gb;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        for ((yj, wj), pj) in yw.iter_mut().zip(&w).zip(&w_prev) {
            *yj = wj + momentum * (wj - pj);
        }
        yb = b + momentum * (b - b_prev);
        t = t_next;
    }
    Ok(LinearScorer { weights: w, bias: b, c: config.c })
}

/// `{10⁻⁴, 10⁻³, …, 10⁴}`.
pub fn default_c_grid() -> Vec<f64> {
    (-4..=4).map(|e| 10f64.powi(e)).collect()
}

/// Picks the `C` with the best mean `folds`-fold cross-validated accuracy;
/// ties go to the smaller `C`.
pub fn select_c(
    features: &[Vec<f64>],
    labels: &[bool],
    grid: &[f64],
    folds: usize,
    seed: u64,
    base: &LogisticConfig,
) -> Result<f64> {
    check_inputs(features, labels)?;
    if grid.is_empty() {
        return Err(invalid("C grid is empty"));
    }
    if folds < 2 || folds > features.len() {
        return Err(invalid(format!("need 2..={} folds, got {folds}", features.len())));
    }
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &c in grid {
        let config = LogisticConfig { c, ..base.clone() };
        let mut total = 0.0;
        for f in 0..folds {
            let (mut tx, mut ty, mut vx, mut vy) = (vec![], vec![], vec![], vec![]);
            for (pos, &i) in order.iter().enumerate() {
                if pos % folds == f {
                    vx.push(features[i].clone());
                    vy.push(labels[i]);
                } else {
                    tx.push(features[i].clone());
                    ty.push(labels[i]);
                }
            }
            total += linear_scorer_fit(&tx, &ty, &config)?.accuracy(&vx, &vy)?;
        }
        let acc = total / folds as f64;
        if acc > best.0 || (acc == best.0 && c < best.1) {
            best = (acc, c);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        while xs.len() < n {
            let x: Vec<f64> = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let m = x[0] + 0.5 * x[1] - 0.1;
            if m.abs() < 0.05 {
                continue;
            }
            ys.push(m > 0.0);
            xs.push(x);
        }
        (xs, ys)
    }

    #[test]
    fn separable_data_is_fitted() {
        let (x, y) = separable(400, 1);
        let config = LogisticConfig { c: 1e4, max_iter: 2000, ..Default::default() };
        let s = linear_scorer_fit(&x, &y, &config).unwrap();
        assert!(s.accuracy(&x, &y).unwrap() >= 0.99);
        for row in &x {
            let f = s.score(row).unwrap();
            assert!((-1.0..=1.0).contains(&f));
            assert!((f - (2.0 * s.probability(row).unwrap() - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_labels_predict_that_label() {
        let (x, _) = separable(100, 2);
        for label in [true, false] {
            let y = vec![label; x.len()];
            let s = linear_scorer_fit(&x, &y, &LogisticConfig::default()).unwrap();
            assert!(x.iter().all(|r| s.predict(r).unwrap() == label));
        }
    }

    #[test]
    fn matches_a_known_optimum() {
        // One feature, x ∈ {−1, 1}, half the labels flipped on each side.
        // With no penalty the optimum is w = ln 3 / 1 when p(y=1|x=1) = 3/4.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (v, pos, neg) in [(1.0, 3, 1), (-1.0, 1, 3)] {
            for _ in 0..pos * 100 {
                x.push(vec![v]);
                y.push(true);
            }
            for _ in 0..neg * 100 {
                x.push(vec![v]);
                y.push(false);
            }
        }
        let config = LogisticConfig { c: 1e12, max_iter: 5000, tolerance: 1e-12 };
        let s = linear_scorer_fit(&x, &y, &config).unwrap();
        assert!((s.weights[0] - 3f64.ln()).abs() < 1e-6, "{}", s.weights[0]);
        assert!(s.bias.abs() < 1e-6);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            linear_scorer_fit(&[vec![f64::NAN]], &[true], &LogisticConfig::default()),
            Err(RtoError::Data(_))
        ));
        assert!(matches!(
            linear_scorer_fit(&[vec![1.0], vec![1.0, 2.0]], &[true, false], &LogisticConfig::default()),
            Err(RtoError::Data(_))
        ));
        assert!(linear_scorer_fit(&[], &[], &LogisticConfig::default()).is_err());
        let s = linear_scorer_fit(&[vec![1.0]], &[true], &LogisticConfig::default()).unwrap();
        assert!(matches!(s.score(&[1.0, 2.0]), Err(RtoError::Mismatch(_))));
    }

    #[test]
    fn cross_validation_picks_from_grid() {
        let (x, y) = separable(200, 3);
        let grid = [1e-4, 1.0, 1e4];
        let c = select_c(&x, &y, &grid, 3, 0, &LogisticConfig::default()).unwrap();
        assert!(grid.contains(&c));
        assert!(c > 1e-4);
        assert_eq!(default_c_grid().len(), 9);
    }
}
