//! Finite problem instances: loss tables paired with data distributions,
//! deterministic sampling, contamination mixtures, and the builtin catalogue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::risk::{Dataset, DiscreteDistribution, LossTable};

/// A finite learning problem: a loss table, the clean data distribution μ,
/// and optionally a shifted distribution μ̃ used by the robustness bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub loss: LossTable,
    pub mu: DiscreteDistribution,
    pub mu_tilde: Option<DiscreteDistribution>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        loss: LossTable,
        mu: DiscreteDistribution,
        mu_tilde: Option<DiscreteDistribution>,
    ) -> Result<Self> {
        if mu.len() != loss.alphabet_len() {
            return Err(RiskError::invalid(format!(
                "mu has {} atoms, loss table has {} columns",
                mu.len(),
                loss.alphabet_len()
            )));
        }
        if let Some(mt) = &mu_tilde {
            if mt.len() != loss.alphabet_len() {
                return Err(RiskError::invalid(format!(
                    "mu_tilde has {} atoms, loss table has {} columns",
                    mt.len(),
                    loss.alphabet_len()
                )));
            }
        }
        Ok(Instance { name: name.into(), loss, mu, mu_tilde })
    }

    /// Parses the instance file format: `name`, row-major `loss`, `mu`,
    /// optional `mu_tilde` and `M`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: InstanceFile = toml::from_str(text)
            .map_err(|e| RiskError::invalid(format!("instance file: {e}")))?;
        raw.build()
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RiskError::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let raw = InstanceFile {
            name: self.name.clone(),
            loss: self.loss.rows().map(|r| r.to_vec()).collect(),
            mu: self.mu.weights().to_vec(),
            mu_tilde: self.mu_tilde.as_ref().map(|d| d.weights().to_vec()),
            m: self.loss.upper_bound_m(),
        };
        toml::to_string(&raw).expect("instance serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    loss: Vec<Vec<f64>>,
    mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_tilde: Option<Vec<f64>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
}

impl InstanceFile {
    fn build(self) -> Result<Instance> {
        let loss = LossTable::new(self.loss, self.m)?;
        let mu = DiscreteDistribution::new(self.mu)?;
        let mu_tilde = self.mu_tilde.map(DiscreteDistribution::new).transpose()?;
        Instance::new(self.name, loss, mu, mu_tilde)
    }
}

/// Key for a deterministic random stream: distinct `(base, stream)` pairs
/// yield independent streams, reproducible across runs and thread schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed {
    pub base: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(base: u64, stream: u64) -> Self {
        Seed { base, stream }
    }

    /// The ChaCha stream keyed by this seed.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws `n` i.i.d. samples from `mu` by inverse CDF over the cumulative
/// weights. Deterministic given the seed.
pub fn sample_dataset(mu: &DiscreteDistribution, n: usize, seed: Seed) -> Result<Dataset> {
    if n == 0 {
        return Err(RiskError::invalid("cannot sample an empty dataset"));
    }
    let mut cdf = Vec::with_capacity(mu.len());
    let mut acc = 0.0;
    for &w in mu.weights() {
        acc += w;
        cdf.push(acc);
    }
    // guard the final bin against rounding below 1
    if let Some(last) = cdf.last_mut() {
        *last = last.max(1.0);
    }
    let mut rng = seed.rng();
    let samples = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            cdf.partition_point(|&c| c <= u)
        })
        .collect();
    Ok(Dataset::new_unchecked(samples))
}

/// ε-mixture `(1−ε)·μ + ε·outlier`.
pub fn contaminate(
    mu: &DiscreteDistribution,
    outlier: &DiscreteDistribution,
    epsilon: f64,
) -> Result<DiscreteDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(RiskError::invalid(format!("epsilon = {epsilon} outside [0, 1]")));
    }
    if mu.len() != outlier.len() {
        return Err(RiskError::invalid(format!(
            "mixture components have different support sizes: {} vs {}",
            mu.len(),
            outlier.len()
        )));
    }
    let weights = mu
        .weights()
        .iter()
        .zip(outlier.weights())
        .map(|(&a, &b)| (1.0 - epsilon) * a + epsilon * b)
        .collect();
    DiscreteDistribution::new(weights)
}

/// Deterministic catalogue of named instances used throughout the tests and
/// the experiment harness.
///
/// - `bernoulli-2h`: two complementary 0/1-loss hypotheses on two symbols.
/// - `threshold-k`: five threshold classifiers on a four-symbol line with
///   0-1 loss against the labelling `y(z) = 1{z ≥ 2}`.
/// - `squared-small`: squared loss clipped at M = 2 for three constant
///   predictors.
/// - `outlier-mix`: unbounded-style losses with a heavy-tailed outlier
///   distribution stored in `mu_tilde`.
pub fn builtin_instances() -> Vec<Instance> {
    let bernoulli = Instance::new(
        "bernoulli-2h",
        LossTable::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], Some(1.0)).unwrap(),
        DiscreteDistribution::new(vec![0.5, 0.5]).unwrap(),
        None,
    )
    .unwrap();

    // thresholds t = 0..4 predicting 1{z ≥ t}; loss is disagreement with 1{z ≥ 2}
    let mut threshold_rows = Vec::new();
    for t in 0..=4usize {
        let row = (0..4usize)
            .map(|z| {
                let pred = (z >= t) as i32;
                let truth = (z >= 2) as i32;
                (pred - truth).abs() as f64
            })
            .collect();
        threshold_rows.push(row);
    }
    let threshold = Instance::new(
        "threshold-k",
        LossTable::new(threshold_rows, Some(1.0)).unwrap(),
        DiscreteDistribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
        None,
    )
    .unwrap();

    // constant predictors a ∈ {0, 0.5, 1} against values v ∈ {0, 1, 2}
    let preds = [0.0f64, 0.5, 1.0];
    let vals = [0.0f64, 1.0, 2.0];
    let squared_rows = preds
        .iter()
        .map(|&a| vals.iter().map(|&v| ((a - v) * (a - v)).min(2.0)).collect())
        .collect();
    let squared = Instance::new(
        "squared-small",
        LossTable::new(squared_rows, Some(2.0)).unwrap(),
        DiscreteDistribution::new(vec![0.5, 0.3, 0.2]).unwrap(),
        None,
    )
    .unwrap();

    let outlier = Instance::new(
        "outlier-mix",
        LossTable::new(vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.5, 2.0]], None).unwrap(),
        DiscreteDistribution::new(vec![0.6, 0.3, 0.1]).unwrap(),
        Some(DiscreteDistribution::new(vec![0.1, 0.2, 0.7]).unwrap()),
    )
    .unwrap();

    vec![bernoulli, threshold, squared, outlier]
}

/// Looks up a builtin instance by name.
pub fn builtin(name: &str) -> Option<Instance> {
    builtin_instances().into_iter().find(|i| i.name == name)
}

/// Resolves an instance reference: builtin name first, then a file path.
pub fn resolve_instance(name_or_path: &str) -> Result<Instance> {
    if let Some(instance) = builtin(name_or_path) {
        return Ok(instance);
    }
    let path = std::path::Path::new(name_or_path);
    if path.exists() {
        return Instance::from_path(path);
    }
    Err(RiskError::config(format!(
        "unknown instance '{name_or_path}': not a builtin ({}) and not a file",
        builtin_instances().iter().map(|i| i.name.clone()).collect::<Vec<_>>().join(", ")
    )))
}
