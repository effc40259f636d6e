use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, SplitTag};
use crate::error::{invalid, Result, RtoError};
use crate::model::{bernoulli, ScoredExample};

/// One point mass of a discrete distribution over `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub probability: f64,
    /// `η(x) = p(y=1|x)`.
    pub eta: f64,
    /// `p(s=1|x)`.
    pub sensitive_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub atoms: Vec<Atom>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(invalid("synthetic spec has no atoms"));
        }
        let total: f64 = self.atoms.iter().map(|a| a.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("atom probabilities sum to {total}, not 1")));
        }
        for a in &self.atoms {
            let unit = |v: f64| (0.0..=1.0).contains(&v);
            if !unit(a.probability) || !unit(a.eta) || !unit(a.sensitive_prob) {
                return Err(invalid(format!("atom {a:?} has a value outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// The three-point distribution showing that deterministic thresholds cannot
/// be optimal under parity.
pub fn example1_spec(seed: u64) -> SyntheticSpec {
    let atom = |x, probability, eta, sensitive_prob| Atom {
        x,
        probability,
        eta,
        sensitive_prob,
    };
    SyntheticSpec {
        atoms: vec![
            atom(-1.0, 0.5, 0.0, 0.5),
            atom(0.0, 1.0 / 3.0, 0.5, 1.0),
            atom(1.0, 1.0 / 6.0, 1.0, 0.0),
        ],
        seed,
    }
}

/// Draws `n` i.i.d. examples. The score is the calibrated `2η(x) − 1`, the
/// sensitive bit is `s`, and the group is 1 when `s = 1` and 2 otherwise.
pub fn generate(spec: &SyntheticSpec, n: usize) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut examples = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut atom = spec.atoms.last().unwrap();
        for a in &spec.atoms {
            acc += a.probability;
            if u < acc {
                atom = a;
                break;
            }
        }
        let s = bernoulli(atom.sensitive_prob, &mut rng);
        let y = bernoulli(atom.eta, &mut rng);
        let group = if s { 1 } else { 2 };
        examples.push(ScoredExample::new(
            format!("x{i}"),
            2.0 * atom.eta - 1.0,
            group,
            Some(s),
            Some(y),
        )?);
        eta.push(atom.eta);
    }
    let mut d = Dataset::new(examples, 2, format!("synthetic(seed={})", spec.seed));
    d.bayes_regressor = Some(eta);
    Ok(d)
}

pub fn generate_example1(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    generate(&example1_spec(seed), n)
}

/// Calibrated continuous scores: groups drawn uniformly from `1..=K` with
/// `K = logit_means.len()`, `η = σ(N(m_k, 1))`, score `2η − 1`, `y ~ η`.
/// The sensitive bit marks group 1.
pub fn generate_calibrated(n: usize, logit_means: &[f64], seed: u64) -> Result<Dataset> {
    if logit_means.is_empty() {
        return Err(invalid("need at least one group"));
    }
    let k = logit_means.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for i in 0..n {
        let group = rng.gen_range(1..=k);
        let normal = Normal::new(logit_means[group - 1], 1.0)
            .map_err(|e| invalid(e.to_string()))?;
        let p = 1.0 / (1.0 + (-normal.sample(&mut rng)).exp());
        let y = bernoulli(p, &mut rng);
        let score = (2.0 * p - 1.0).clamp(-1.0, 1.0);
        examples.push(ScoredExample::new(
            format!("c{i}"),
            score,
            group,
            Some(group == 1),
            Some(y),
        )?);
        eta.push(p);
    }
    let mut d = Dataset::new(examples, k, format!("calibrated(seed={seed})"));
    d.bayes_regressor = Some(eta);
    Ok(d)
}

/// Scores saturated at ±1: group `k` (uniform over `1..=K`) gets `+1` with
/// probability `positive_rates[k-1]`. Labels agree with the score's sign
/// except for flips at rate `label_noise`.
pub fn generate_saturated(
    n: usize,
    positive_rates: &[f64],
    label_noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if positive_rates.is_empty() {
        return Err(invalid("need at least one group"));
    }
    if !(0.0..=1.0).contains(&label_noise) || positive_rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(invalid("rates must lie in [0,1]"));
    }
    let k = positive_rates.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for i in 0..n {
        let group = rng.gen_range(1..=k);
        let positive = bernoulli(positive_rates[group - 1], &mut rng);
        let flip = bernoulli(label_noise, &mut rng);
        let score = if positive { 1.0 } else { -1.0 };
        examples.push(ScoredExample::new(
            format!("s{i}"),
            score,
            group,
            Some(group == 1),
            Some(positive != flip),
        )?);
        eta.push(if positive { 1.0 - label_noise } else { label_noise });
    }
    let mut d = Dataset::new(examples, k, format!("saturated(seed={seed})"));
    d.bayes_regressor = Some(eta);
    Ok(d)
}

/// Keeps every example whose sensitive bit equals its label and drops the
/// others independently with probability 1/2.
pub fn dccc_bias_injection(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(dataset.len());
    for (i, e) in dataset.examples.iter().enumerate() {
        let s = e
            .sensitive
            .ok_or_else(|| RtoError::MissingField(format!("sensitive bit of {}", e.id)))?;
        let y = e
            .label
            .ok_or_else(|| RtoError::MissingField(format!("label of {}", e.id)))?;
        if s == y || !bernoulli(0.5, &mut rng) {
            keep.push(i);
        }
    }
    let mut out = dataset.subset(&keep, SplitTag::TrainPost);
    out.split = dataset.split;
    out.provenance = format!("{} + dccc(seed={seed})", dataset.provenance);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_frequencies() {
        let d = generate_example1(60_000, 7).unwrap();
        let n = d.len() as f64;
        let zero = d.examples.iter().filter(|e| e.score == 0.0).count() as f64;
        assert!((zero / n - 1.0 / 3.0).abs() < 0.01);
        assert!(d
            .examples
            .iter()
            .filter(|e| e.score == 1.0)
            .all(|e| e.sensitive == Some(false) && e.group == 2));
        let g1: Vec<_> = d.examples.iter().filter(|e| e.sensitive == Some(true)).collect();
        let frac0 = g1.iter().filter(|e| e.score == 0.0).count() as f64 / g1.len() as f64;
        assert!((frac0 - 4.0 / 7.0).abs() < 0.01);
        assert!(g1.iter().all(|e| e.group == 1));
    }

    #[test]
    fn example1_converges_at_large_n() {
        let d = generate_example1(100_000, 3).unwrap();
        let n = d.len() as f64;
        for (score, p) in [(-1.0, 0.5), (0.0, 1.0 / 3.0), (1.0, 1.0 / 6.0)] {
            let f = d.examples.iter().filter(|e| e.score == score).count() as f64 / n;
            assert!((f - p).abs() < 0.01, "{score}: {f}");
        }
        let eta = d.bayes_regressor.as_ref().unwrap();
        assert!(d.examples.iter().zip(eta).all(|(e, h)| e.score == 2.0 * h - 1.0));
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_example1(500, 1).unwrap(), generate_example1(500, 1).unwrap());
        assert_eq!(
            generate_calibrated(300, &[0.0, 1.0], 4).unwrap(),
            generate_calibrated(300, &[0.0, 1.0], 4).unwrap()
        );
        assert!(generate_example1(0, 1).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = example1_spec(0);
        spec.atoms[0].probability = 0.6;
        assert!(generate(&spec, 10).is_err());
        let mut spec = example1_spec(0);
        spec.atoms[1].eta = 1.5;
        spec.atoms[0].probability = 0.5;
        assert!(generate(&spec, 10).is_err());
    }

    #[test]
    fn saturated_scores() {
        let d = generate_saturated(20_000, &[0.6, 0.3], 0.1, 5).unwrap();
        assert!(d.examples.iter().all(|e| e.score.abs() == 1.0));
        for (g, rate) in [(1, 0.6), (2, 0.3)] {
            let members: Vec<_> = d.examples.iter().filter(|e| e.group == g).collect();
            let pos = members.iter().filter(|e| e.score > 0.0).count() as f64 / members.len() as f64;
            assert!((pos - rate).abs() < 0.02);
        }
    }

    fn labelled(pairs: &[(bool, bool)]) -> Dataset {
        let ex = pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, y))| ScoredExample::new(format!("e{i}"), 0.0, 1, Some(s), Some(y)).unwrap())
            .collect();
        Dataset::new(ex, 1, "test")
    }

    #[test]
    fn dccc_keeps_agreeing_examples() {
        let d = labelled(&[(true, true), (false, false), (true, true)]);
        assert_eq!(dccc_bias_injection(&d, 3).unwrap().examples, d.examples);
    }

    #[test]
    fn dccc_drops_half_of_disagreeing() {
        let d = labelled(&vec![(true, false); 10_000]);
        let kept = dccc_bias_injection(&d, 11).unwrap();
        // binomial(10^4, 1/2): sd = 50
        assert!((kept.len() as f64 - 5000.0).abs() <= 150.0);
        assert_eq!(kept, dccc_bias_injection(&d, 11).unwrap());
    }

    #[test]
    fn dccc_requires_fields() {
        let ex = vec![ScoredExample::new("a", 0.0, 1, None, Some(true)).unwrap()];
        assert!(matches!(
            dccc_bias_injection(&Dataset::new(ex, 1, "t"), 0),
            Err(RtoError::MissingField(_))
        ));
    }
}
