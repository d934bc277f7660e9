//! Exact information measures on finite instances.
//!
//! Conventions: all logarithms are natural, and the total variation distance
//! is the *unhalved* L1 distance `Σ_z |p(z) − q(z)|` with range [0, 2]. The
//! robustness bounds consume exactly this quantity; halve it externally if
//! the [0, 1] convention is needed.
//!
//! Mutual information between a hypothesis and a dataset is computed by full
//! enumeration of `Zⁿ`, capped at 10⁶ joint states. Enumeration is chunked
//! and the chunk partials are combined by a fixed pairwise tree, so results
//! are bit-identical at any thread count.

use rayon::prelude::*;

use crate::error::{Result, RiskError};
use crate::gibbs;
use crate::risk::{minimize_ter, Dataset, DiscreteDistribution, LossTable, Tilt};
use crate::spaces::Instance;

/// Maximum number of joint dataset states `|Z|ⁿ` for exact enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;

const CHUNK: u64 = 4096;

/// Kullback–Leibler divergence `Σ p·log(p/q)` in nats, with `0·log(0/q) = 0`.
///
/// Requires absolute continuity: `q(z) = 0 ⇒ p(z) = 0`.
pub fn kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(RiskError::invalid(format!(
            "kl: support sizes differ ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    let mut acc = 0.0;
    for i in 0..p.len() {
        let (pi, qi) = (p.get(i), q.get(i));
        if pi > 0.0 {
            if qi == 0.0 {
                return Err(RiskError::AbsoluteContinuity { index: i, p_mass: pi });
            }
            acc += pi * (pi / qi).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// Total variation distance `Σ_z |p(z) − q(z)|` (unhalved; range [0, 2]).
pub fn tv(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(RiskError::invalid(format!(
            "tv: support sizes differ ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    Ok(p.weights().iter().zip(q.weights()).map(|(&a, &b)| (a - b).abs()).sum())
}

/// A learning algorithm as a Markov kernel from datasets to distributions
/// over hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub enum LearningKernel {
    /// Prior reweighted by `exp(−α·TER(h, S))`.
    TiltedGibbs { alpha: f64, tilt: Tilt, prior: DiscreteDistribution },
    /// Prior reweighted by `exp(−α·R̂(h, S))` (linear empirical risk).
    PlainGibbs { alpha: f64, prior: DiscreteDistribution },
    /// Point mass at the tie-broken TER argmin.
    ArgminTer { tilt: Tilt },
    /// Ignores the dataset and returns a fixed posterior.
    Independent { posterior: DiscreteDistribution },
}

impl LearningKernel {
    /// Posterior over hypotheses for one dataset.
    pub fn posterior(&self, loss: &LossTable, dataset: &Dataset) -> Result<DiscreteDistribution> {
        match self {
            LearningKernel::TiltedGibbs { alpha, tilt, prior } => {
                let cfg = gibbs::GibbsConfig::new(*alpha, *tilt, prior.clone())?;
                gibbs::tilted_gibbs_posterior(dataset, loss, &cfg)
            }
            LearningKernel::PlainGibbs { alpha, prior } => {
                gibbs::plain_gibbs_posterior(dataset, loss, *alpha, prior)
            }
            LearningKernel::ArgminTer { tilt } => {
                let h = minimize_ter(dataset, loss, *tilt)?;
                DiscreteDistribution::point_mass(h, loss.card_h())
            }
            LearningKernel::Independent { posterior } => {
                if posterior.len() != loss.card_h() {
                    return Err(RiskError::invalid(format!(
                        "independent kernel posterior has {} atoms, loss table has {} rows",
                        posterior.len(),
                        loss.card_h()
                    )));
                }
                Ok(posterior.clone())
            }
        }
    }
}

/// Exact information measures of a (kernel, instance, n) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    /// `I(H; S)` in nats.
    pub mutual_information: f64,
    /// `I_SKL(H; S)` in nats; `+∞` when the product of marginals is not
    /// absolutely continuous w.r.t. the joint (e.g. deterministic kernels).
    pub symmetrized_kl_information: f64,
    /// Marginal hypothesis distribution `P_H = Σ_S μ^⊗n(S)·P_{H|S}`.
    pub marginal_posterior: DiscreteDistribution,
    /// Number of joint dataset states enumerated.
    pub enumerated_datasets: u64,
}

/// `|Z|ⁿ` with the enumeration cap enforced.
pub(crate) fn checked_state_count(alphabet: usize, n: usize) -> Result<u64> {
    if n == 0 {
        return Err(RiskError::invalid("dataset size n must be at least 1"));
    }
    let mut states: u128 = 1;
    for _ in 0..n {
        states = states.saturating_mul(alphabet as u128);
        if states > ENUMERATION_CAP as u128 {
            return Err(RiskError::EnumerationTooLarge { states, cap: ENUMERATION_CAP });
        }
    }
    Ok(states as u64)
}

/// Writes the dataset with linear index `idx` (little-endian base-`alphabet`
/// digits) into `out`.
pub(crate) fn decode_dataset(idx: u64, alphabet: usize, out: &mut [usize]) {
    let mut rest = idx;
    for slot in out.iter_mut() {
        *slot = (rest % alphabet as u64) as usize;
        rest /= alphabet as u64;
    }
}

/// Combines per-chunk partial sums with a fixed pairwise tree, independent of
/// how the chunks were scheduled across threads.
fn pairwise_tree<T, F: Fn(&T, &T) -> T>(items: &[T], combine: &F) -> T
where
    T: Clone,
{
    match items.len() {
        0 => unreachable!("no partials"),
        1 => items[0].clone(),
        k => {
            let mid = k / 2;
            let left = pairwise_tree(&items[..mid], combine);
            let right = pairwise_tree(&items[mid..], combine);
            combine(&left, &right)
        }
    }
}

/// Exact `I(H; S)` and `I_SKL(H; S)` for a learning kernel on a finite
/// instance with `S ∼ μ^⊗n`, by full enumeration of `Zⁿ`.
pub fn mutual_information_exact(
    kernel: &LearningKernel,
    instance: &Instance,
    n: usize,
) -> Result<InfoReport> {
    let alphabet = instance.mu.len();
    let card_h = instance.loss.card_h();
    let states = checked_state_count(alphabet, n)?;
    let chunks: Vec<(u64, u64)> = (0..states)
        .step_by(CHUNK as usize)
        .map(|start| (start, (start + CHUNK).min(states)))
        .collect();

    // pass 1: marginal P_H
    let partials: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = vec![0.0f64; card_h];
            let mut symbols = vec![0usize; n];
            for idx in start..end {
                decode_dataset(idx, alphabet, &mut symbols);
                let w: f64 = symbols.iter().map(|&z| instance.mu.get(z)).product();
                if w == 0.0 {
                    continue;
                }
                let ds = Dataset::new_unchecked(symbols.clone());
                let post = kernel.posterior(&instance.loss, &ds)?;
                for (slot, &p) in acc.iter_mut().zip(post.weights()) {
                    *slot += w * p;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let p_h = pairwise_tree(&partials, &|a: &Vec<f64>, b: &Vec<f64>| {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    });

    // pass 2: I = Σ_S w·KL(P_{H|S} ∥ P_H), reverse = Σ_S w·KL(P_H ∥ P_{H|S})
    let partials: Vec<(f64, f64)> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut mi = 0.0f64;
            let mut rkl = 0.0f64;
            let mut symbols = vec![0usize; n];
            for idx in start..end {
                decode_dataset(idx, alphabet, &mut symbols);
                let w: f64 = symbols.iter().map(|&z| instance.mu.get(z)).product();
                if w == 0.0 {
                    continue;
                }
                let ds = Dataset::new_unchecked(symbols.clone());
                let post = kernel.posterior(&instance.loss, &ds)?;
                for (&p, &q) in post.weights().iter().zip(&p_h) {
                    if p > 0.0 {
                        mi += w * p * (p / q).ln();
                    }
                    if q > 0.0 {
                        if p == 0.0 {
                            rkl = f64::INFINITY;
                        } else if rkl.is_finite() {
                            rkl += w * q * (q / p).ln();
                        }
                    }
                }
            }
            Ok((mi, rkl))
        })
        .collect::<Result<_>>()?;
    let (mi, rkl) = pairwise_tree(&partials, &|a: &(f64, f64), b: &(f64, f64)| {
        (a.0 + b.0, a.1 + b.1)
    });

    let mi = mi.max(0.0);
    let rkl = if rkl.is_finite() { rkl.max(0.0) } else { rkl };
    Ok(InfoReport {
        mutual_information: mi,
        symmetrized_kl_information: mi + rkl,
        marginal_posterior: DiscreteDistribution::new(p_h)?,
        enumerated_datasets: states,
    })
}
