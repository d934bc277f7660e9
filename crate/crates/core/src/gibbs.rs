//! Tilted and plain Gibbs posteriors over finite hypothesis spaces, plus the
//! exact symmetrized-KL identity check for the tilted Gibbs kernel.
//!
//! The tilted Gibbs posterior reweights a prior by `exp(−α·TER(h, S))`:
//! algebraically, `((1/n)·Σᵢ exp(γ·ℓ(h, Zᵢ)))^{−α/γ} = exp(−α·R̂_γ(h, S))`,
//! so the posterior is always computed in log space with a max shift — the
//! power form overflows once `α/|γ|` gets large. In the zero-limit tilt
//! regime the TER degrades to the empirical mean and the tilted posterior
//! coincides with the plain Gibbs posterior.

use crate::error::{Result, RiskError};
use crate::info::{mutual_information_exact, LearningKernel};
use crate::risk::{empirical_tilted_risk, Dataset, DiscreteDistribution, LossTable, Tilt};
use crate::spaces::Instance;

/// Parameters of the tilted Gibbs posterior: inverse temperature α > 0, tilt,
/// and a prior over hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub alpha: f64,
    pub tilt: Tilt,
    pub prior: DiscreteDistribution,
}

impl GibbsConfig {
    pub fn new(alpha: f64, tilt: Tilt, prior: DiscreteDistribution) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(RiskError::invalid(format!("alpha = {alpha} must be positive and finite")));
        }
        Ok(GibbsConfig { alpha, tilt, prior })
    }

    /// Uniform prior over `card_h` hypotheses.
    pub fn with_uniform_prior(alpha: f64, tilt: Tilt, card_h: usize) -> Result<Self> {
        Self::new(alpha, tilt, DiscreteDistribution::uniform(card_h)?)
    }
}

fn gibbs_reweight(
    prior: &DiscreteDistribution,
    energies: &[f64],
    alpha: f64,
) -> Result<DiscreteDistribution> {
    // shift by the minimum energy carried by the prior's support, so the
    // exponentials stay in (0, 1] and a constant energy reproduces the prior
    // bit for bit
    let shift = prior
        .weights()
        .iter()
        .zip(energies)
        .filter(|&(&p, _)| p > 0.0)
        .map(|(_, &e)| e)
        .fold(f64::INFINITY, f64::min);
    if !shift.is_finite() {
        return Err(RiskError::invalid("prior assigns no mass to any hypothesis"));
    }
    let weights: Vec<f64> = prior
        .weights()
        .iter()
        .zip(energies)
        .map(|(&p, &e)| if p > 0.0 { p * (-alpha * (e - shift)).exp() } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    DiscreteDistribution::new(weights.iter().map(|w| w / total).collect())
}

/// Tilted Gibbs posterior `P(h) ∝ π(h)·exp(−α·TER(h, S))`.
pub fn tilted_gibbs_posterior(
    dataset: &Dataset,
    loss: &LossTable,
    config: &GibbsConfig,
) -> Result<DiscreteDistribution> {
    if config.prior.len() != loss.card_h() {
        return Err(RiskError::invalid(format!(
            "prior has {} atoms, loss table has {} rows",
            config.prior.len(),
            loss.card_h()
        )));
    }
    let energies: Vec<f64> = (0..loss.card_h())
        .map(|h| empirical_tilted_risk(loss, h, dataset, config.tilt))
        .collect::<Result<_>>()?;
    gibbs_reweight(&config.prior, &energies, config.alpha)
}

/// Plain Gibbs posterior `P(h) ∝ π(h)·exp(−α·R̂(h, S))` with the linear
/// empirical risk.
pub fn plain_gibbs_posterior(
    dataset: &Dataset,
    loss: &LossTable,
    alpha: f64,
    prior: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(RiskError::invalid(format!("alpha = {alpha} must be positive and finite")));
    }
    if prior.len() != loss.card_h() {
        return Err(RiskError::invalid(format!(
            "prior has {} atoms, loss table has {} rows",
            prior.len(),
            loss.card_h()
        )));
    }
    let energies: Vec<f64> = (0..loss.card_h())
        .map(|h| {
            let row = loss.row(h)?;
            Ok(dataset.samples().iter().map(|&z| row[z]).sum::<f64>() / dataset.len() as f64)
        })
        .collect::<Result<_>>()?;
    gibbs_reweight(prior, &energies, alpha)
}

/// Both sides of the symmetrized-KL identity for the tilted Gibbs kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsklIdentity {
    /// Expected TER under the product of marginals minus under the joint.
    pub lhs: f64,
    /// `I_SKL(H; S) / α`.
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub gap: f64,
}

/// Checks the exact identity between the expected-TER difference and the
/// symmetrized KL information of the tilted Gibbs kernel.
///
/// The left side enumerates all datasets `S ∈ Zⁿ` with weights `μ^⊗n(S)` and
/// computes `E_{P_H⊗μ^⊗n}[TER(H, S)] − E_{P_{H,S}}[TER(H, S)]` directly; the
/// right side comes from the independent KL-based enumeration in
/// [`mutual_information_exact`].
pub fn check_iskl_identity(instance: &Instance, config: &GibbsConfig, n: usize) -> Result<IsklIdentity> {
    let card_h = instance.loss.card_h();
    if config.prior.len() != card_h {
        return Err(RiskError::invalid(format!(
            "prior has {} atoms, loss table has {} rows",
            config.prior.len(),
            card_h
        )));
    }
    let states = crate::info::checked_state_count(instance.mu.len(), n)?;

    let mut p_h = vec![0.0f64; card_h];
    let mut ter_sums = vec![0.0f64; card_h]; // Σ_s w_s·TER(h, s)
    let mut e_joint = 0.0f64;
    let mut symbols = vec![0usize; n];
    for idx in 0..states {
        crate::info::decode_dataset(idx, instance.mu.len(), &mut symbols);
        let w: f64 = symbols.iter().map(|&z| instance.mu.get(z)).product();
        if w == 0.0 {
            continue;
        }
        let ds = Dataset::new_unchecked(symbols.clone());
        let posterior = tilted_gibbs_posterior(&ds, &instance.loss, config)?;
        for h in 0..card_h {
            let t = empirical_tilted_risk(&instance.loss, h, &ds, config.tilt)?;
            ter_sums[h] += w * t;
            e_joint += w * posterior.get(h) * t;
            p_h[h] += w * posterior.get(h);
        }
    }
    let e_prod: f64 = p_h.iter().zip(&ter_sums).map(|(&p, &t)| p * t).sum();
    let lhs = e_prod - e_joint;

    let kernel = LearningKernel::TiltedGibbs {
        alpha: config.alpha,
        tilt: config.tilt,
        prior: config.prior.clone(),
    };
    let report = mutual_information_exact(&kernel, instance, n)?;
    let rhs = report.symmetrized_kl_information / config.alpha;
    Ok(IsklIdentity { lhs, rhs, gap: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::builtin;
    use proptest::prelude::*;

    fn tilt(g: f64) -> Tilt {
        Tilt::new(g).unwrap()
    }

    fn uniform(k: usize) -> DiscreteDistribution {
        DiscreteDistribution::uniform(k).unwrap()
    }

    #[test]
    fn tiny_alpha_returns_prior() {
        let inst = builtin("bernoulli-2h").unwrap();
        let ds = Dataset::new(vec![1, 1], 2).unwrap();
        let prior = DiscreteDistribution::new(vec![0.3, 0.7]).unwrap();
        let cfg = GibbsConfig::new(1e-12, tilt(-1.0), prior.clone()).unwrap();
        let post = tilted_gibbs_posterior(&ds, &inst.loss, &cfg).unwrap();
        for h in 0..2 {
            assert!((post.get(h) - prior.get(h)).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_loss_returns_prior_exactly() {
        let loss = LossTable::new(vec![vec![0.4, 0.4], vec![0.4, 0.4]], None).unwrap();
        let ds = Dataset::new(vec![0, 1], 2).unwrap();
        let prior = DiscreteDistribution::new(vec![0.25, 0.75]).unwrap();
        let cfg = GibbsConfig::new(3.0, tilt(-2.0), prior.clone()).unwrap();
        let post = tilted_gibbs_posterior(&ds, &loss, &cfg).unwrap();
        assert_eq!(post.get(0), prior.get(0));
        assert_eq!(post.get(1), prior.get(1));
    }

    #[test]
    fn bernoulli_posterior_hand_enumeration() {
        // S = [1,1]: TER(h0) = 1, TER(h1) = 0, so the posterior is
        // [e^{-2}, 1] / (1 + e^{-2}); frozen from direct two-term arithmetic.
        let inst = builtin("bernoulli-2h").unwrap();
        let ds = Dataset::new(vec![1, 1], 2).unwrap();
        let cfg = GibbsConfig::new(2.0, tilt(-1.0), uniform(2)).unwrap();
        let post = tilted_gibbs_posterior(&ds, &inst.loss, &cfg).unwrap();
        assert!((post.get(0) - 0.11920292202211756).abs() < 1e-14);
        assert!((post.get(1) - 0.880_797_077_977_882_4).abs() < 1e-14);
    }

    #[test]
    fn plain_gibbs_examples() {
        let loss = LossTable::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], None).unwrap();
        let ds = Dataset::new(vec![0, 1], 2).unwrap();
        // mean losses 0 and 1, α = ln 3 → posterior [3/4, 1/4]
        let post = plain_gibbs_posterior(&ds, &loss, 3.0f64.ln(), &uniform(2)).unwrap();
        assert!((post.get(0) - 0.75).abs() < 1e-14);
        assert!((post.get(1) - 0.25).abs() < 1e-14);
        // α → 0⁺ returns the prior
        let post = plain_gibbs_posterior(&ds, &loss, 1e-12, &uniform(2)).unwrap();
        assert!((post.get(0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_limit_tilt_matches_plain_gibbs() {
        let inst = builtin("squared-small").unwrap();
        let ds = Dataset::new(vec![0, 2, 1, 2], 3).unwrap();
        let prior = DiscreteDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let cfg = GibbsConfig::new(1.7, tilt(1e-9), prior.clone()).unwrap();
        let tilted = tilted_gibbs_posterior(&ds, &inst.loss, &cfg).unwrap();
        let plain = plain_gibbs_posterior(&ds, &inst.loss, 1.7, &prior).unwrap();
        for h in 0..3 {
            assert_eq!(tilted.get(h), plain.get(h));
        }
    }

    #[test]
    fn identity_constant_loss_is_zero() {
        let loss = LossTable::new(vec![vec![0.3, 0.3], vec![0.3, 0.3]], Some(1.0)).unwrap();
        let mu = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        let inst = Instance::new("const", loss, mu, None).unwrap();
        let cfg = GibbsConfig::new(2.0, tilt(-1.0), uniform(2)).unwrap();
        let id = check_iskl_identity(&inst, &cfg, 2).unwrap();
        assert!(id.lhs.abs() < 1e-14);
        assert!(id.rhs.abs() < 1e-14);
        assert!(id.gap < 1e-14);
    }

    #[test]
    fn identity_bernoulli_small() {
        let inst = builtin("bernoulli-2h").unwrap();
        let cfg = GibbsConfig::new(2.0, tilt(-1.0), uniform(2)).unwrap();
        let id = check_iskl_identity(&inst, &cfg, 2).unwrap();
        assert!(id.gap <= 1e-9, "gap = {}", id.gap);
        // frozen from the extended-precision enumeration of both sides
        assert!((id.lhs - 0.190_398_538_988_941_2).abs() < 1e-12, "lhs = {}", id.lhs);
    }

    #[test]
    fn identity_across_parameter_grid() {
        for name in ["bernoulli-2h", "threshold-k", "squared-small", "outlier-mix"] {
            let inst = builtin(name).unwrap();
            let k = inst.loss.card_h();
            for alpha in [0.5, 1.0, 2.0, 4.0] {
                for g in [-2.0, -1.0, -0.1, 0.1, 1.0] {
                    for n in 1..=3usize {
                        let cfg = GibbsConfig::new(alpha, tilt(g), uniform(k)).unwrap();
                        let id = check_iskl_identity(&inst, &cfg, n).unwrap();
                        assert!(
                            id.gap <= 1e-9,
                            "{name} alpha={alpha} gamma={g} n={n} gap={}",
                            id.gap
                        );
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn posterior_normalizes(
            rows in proptest::collection::vec(proptest::collection::vec(0.0..5.0f64, 3), 2..5),
            alpha in 0.1..20.0f64,
            g in -3.0..3.0f64,
        ) {
            let loss = LossTable::new(rows, None).unwrap();
            let ds = Dataset::new(vec![0, 2, 1], 3).unwrap();
            let cfg = GibbsConfig::new(alpha, tilt(g), uniform(loss.card_h())).unwrap();
            let post = tilted_gibbs_posterior(&ds, &loss, &cfg).unwrap();
            let sum: f64 = post.weights().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn power_form_equivalence(
            rows in proptest::collection::vec(proptest::collection::vec(0.0..3.0f64, 2), 2..4),
            alpha in 0.1..4.0f64,
            g in proptest::sample::select(vec![-1.5f64, -0.5, 0.5, 1.5]),
        ) {
            // ((1/n)Σ e^{γℓ})^{−α/γ} normalizes to the same posterior as
            // exp(−α·TER)
            let loss = LossTable::new(rows, None).unwrap();
            let ds = Dataset::new(vec![0, 1], 2).unwrap();
            let cfg = GibbsConfig::new(alpha, tilt(g), uniform(loss.card_h())).unwrap();
            let post = tilted_gibbs_posterior(&ds, &loss, &cfg).unwrap();
            let mut powers = Vec::new();
            for h in 0..loss.card_h() {
                let row = loss.row(h).unwrap();
                let mean_exp = ds.samples().iter().map(|&z| (g * row[z]).exp()).sum::<f64>()
                    / ds.len() as f64;
                powers.push(mean_exp.powf(-alpha / g));
            }
            let total: f64 = powers.iter().sum();
            for (h, &power) in powers.iter().enumerate() {
                prop_assert!((post.get(h) - power / total).abs() <= 1e-12);
            }
        }

        #[test]
        fn alpha_concentrates_on_argmin(
            alpha in 0.5..8.0f64,
            g in -2.0..2.0f64,
        ) {
            let inst = builtin("threshold-k").unwrap();
            let ds = Dataset::new(vec![0, 3, 2, 1], 4).unwrap();
            let k = inst.loss.card_h();
            let t = tilt(g);
            let hstar = crate::risk::minimize_ter(&ds, &inst.loss, t).unwrap();
            let lo = tilted_gibbs_posterior(&ds, &inst.loss, &GibbsConfig::new(alpha, t, uniform(k)).unwrap()).unwrap();
            let hi = tilted_gibbs_posterior(&ds, &inst.loss, &GibbsConfig::new(alpha * 1.5, t, uniform(k)).unwrap()).unwrap();
            prop_assert!(hi.get(hstar) >= lo.get(hstar) - 1e-12);
        }
    }
}
