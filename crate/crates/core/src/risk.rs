//! Risk functionals over finite instances.
//!
//! The tilted empirical risk of a loss vector `l` with tilt `γ ≠ 0` is
//! `(1/γ)·log((1/n)·Σ exp(γ·lᵢ))`. It interpolates between the minimum
//! (γ → −∞), the arithmetic mean (γ → 0) and the maximum (γ → +∞) of the
//! losses, and is nondecreasing in γ. Population counterparts take the
//! expectation under a discrete distribution instead of the empirical mean.
//!
//! All quantities here are computed exactly from discrete distributions,
//! never estimated, so identities and sandwich inequalities can be tested
//! to floating-point accuracy.

use crate::error::{Result, RiskError};

/// Tilt magnitude below which the γ → 0 limit (the arithmetic mean) is used
/// instead of the exact formula.
pub const ZERO_LIMIT_THRESHOLD: f64 = 1e-7;

/// Evaluation regime of a [`Tilt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiltRegime {
    /// |γ| ≥ 1e-7: evaluate the exact tilted formula.
    Exact,
    /// |γ| < 1e-7: evaluate the γ → 0 limit.
    ZeroLimit,
}

/// The exponential tilting parameter γ together with its evaluation regime.
///
/// The regime is derived, not stored: `ZeroLimit ⇔ |γ| < 1e-7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilt {
    gamma: f64,
}

impl Tilt {
    /// Wraps a finite tilt parameter.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(RiskError::invalid(format!("tilt must be finite, got {gamma}")));
        }
        Ok(Tilt { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn regime(&self) -> TiltRegime {
        if self.gamma.abs() < ZERO_LIMIT_THRESHOLD {
            TiltRegime::ZeroLimit
        } else {
            TiltRegime::Exact
        }
    }

    pub fn is_zero_limit(&self) -> bool {
        self.regime() == TiltRegime::ZeroLimit
    }

    /// True for a strictly negative tilt (the robustness-oriented regime).
    pub fn is_negative(&self) -> bool {
        self.gamma < 0.0
    }
}

impl Default for Tilt {
    fn default() -> Self {
        Tilt { gamma: 0.0 }
    }
}

/// Loss matrix ℓ(h, z) ≥ 0 over hypotheses × data symbols, with an optional
/// uniform upper bound M.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    values: Vec<f64>,
    hypotheses: usize,
    symbols: usize,
    upper_bound_m: Option<f64>,
}

impl LossTable {
    /// Builds a table from row-major rows (one row per hypothesis).
    pub fn new(rows: Vec<Vec<f64>>, upper_bound_m: Option<f64>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(RiskError::invalid("loss table must have at least one row and one column"));
        }
        let symbols = rows[0].len();
        let mut values = Vec::with_capacity(rows.len() * symbols);
        for (h, row) in rows.iter().enumerate() {
            if row.len() != symbols {
                return Err(RiskError::invalid(format!(
                    "loss row {h} has {} entries, expected {symbols}",
                    row.len()
                )));
            }
            for (z, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(RiskError::invalid(format!(
                        "loss({h},{z}) = {v} must be finite and nonnegative"
                    )));
                }
                if let Some(m) = upper_bound_m {
                    if v > m {
                        return Err(RiskError::invalid(format!(
                            "loss({h},{z}) = {v} exceeds the stated bound M = {m}"
                        )));
                    }
                }
                values.push(v);
            }
        }
        if let Some(m) = upper_bound_m {
            if !m.is_finite() || m < 0.0 {
                return Err(RiskError::invalid(format!("upper bound M = {m} must be finite and nonnegative")));
            }
        }
        Ok(LossTable { values, hypotheses: rows.len(), symbols, upper_bound_m })
    }

    pub fn card_h(&self) -> usize {
        self.hypotheses
    }

    pub fn alphabet_len(&self) -> usize {
        self.symbols
    }

    pub fn upper_bound_m(&self) -> Option<f64> {
        self.upper_bound_m
    }

    /// Loss row of hypothesis `h`.
    pub fn row(&self, h: usize) -> Result<&[f64]> {
        if h >= self.hypotheses {
            return Err(RiskError::invalid(format!(
                "hypothesis index {h} out of range (card(H) = {})",
                self.hypotheses
            )));
        }
        Ok(&self.values[h * self.symbols..(h + 1) * self.symbols])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.symbols)
    }
}

/// Probability vector over the data alphabet (plays both μ and μ̃).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Sum tolerance for a valid probability vector.
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(RiskError::invalid("distribution must have at least one atom"));
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(RiskError::invalid(format!(
                    "weight {i} = {w} must be finite and nonnegative"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(RiskError::invalid(format!(
                "weights sum to {total}, expected 1 within {}",
                Self::SUM_TOLERANCE
            )));
        }
        Ok(DiscreteDistribution { weights })
    }

    /// Uniform distribution over `k` atoms.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(RiskError::invalid("uniform distribution needs at least one atom"));
        }
        Ok(DiscreteDistribution { weights: vec![1.0 / k as f64; k] })
    }

    /// Point mass at `index`.
    pub fn point_mass(index: usize, len: usize) -> Result<Self> {
        if index >= len {
            return Err(RiskError::invalid(format!("point mass index {index} out of range {len}")));
        }
        let mut w = vec![0.0; len];
        w[index] = 1.0;
        Ok(DiscreteDistribution { weights: w })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// A training set of data-symbol indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    samples: Vec<usize>,
}

impl Dataset {
    pub fn new(samples: Vec<usize>, alphabet_len: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(RiskError::invalid("dataset must contain at least one sample"));
        }
        for (i, &z) in samples.iter().enumerate() {
            if z >= alphabet_len {
                return Err(RiskError::invalid(format!(
                    "sample {i} has symbol {z}, alphabet size is {alphabet_len}"
                )));
            }
        }
        Ok(Dataset { samples })
    }

    /// Internal constructor for indices already known to be in range.
    pub(crate) fn new_unchecked(samples: Vec<usize>) -> Self {
        Dataset { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[usize] {
        &self.samples
    }
}

/// Uniform second-moment bounds: κ_u under μ, κ_s under μ̃, κ_t under a
/// hypothesis prior ⊗ μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBounds {
    pub kappa_u: f64,
    pub kappa_s: f64,
    pub kappa_t: f64,
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Tilted mean of `n` equally weighted values accessed through `get`.
///
/// The evaluation shifts every value by the dominant end of the range (the
/// minimum for γ < 0, the maximum for γ > 0), so all `expm1(γ·(lᵢ − ref))`
/// terms share one sign and the reference term pins the shifted mean to at
/// least 1/n. That keeps the relative error of
/// `ref + log1p(mean expm1)/γ` at the machine-precision scale for every
/// finite γ, with no overflow (the shifted exponents are ≤ 0).
fn tilted_mean_uniform(n: usize, gamma: f64, get: impl Fn(usize) -> f64) -> f64 {
    let mut reference = get(0);
    for i in 1..n {
        let v = get(i);
        if (gamma < 0.0 && v < reference) || (gamma > 0.0 && v > reference) {
            reference = v;
        }
    }
    let u = neumaier_sum((0..n).map(|i| (gamma * (get(i) - reference)).exp_m1())) / n as f64;
    reference + u.ln_1p() / gamma
}

/// Tilted mean under arbitrary nonnegative weights summing to one.
///
/// Two routes: the `expm1`/`log1p` form when `|γ|·max|l|` is small (no
/// cancellation near γ → 0), and a max-shifted log-sum-exp otherwise (no
/// overflow for large `|γ|·l`). Zero-weight atoms are skipped entirely.
fn tilted_mean_weighted(
    n: usize,
    gamma: f64,
    get: impl Fn(usize) -> f64,
    weight: impl Fn(usize) -> f64,
) -> f64 {
    let mut max_abs: f64 = 0.0;
    for i in 0..n {
        if weight(i) > 0.0 {
            max_abs = max_abs.max(get(i).abs());
        }
    }
    if gamma.abs() * max_abs <= 1.0 {
        let u = neumaier_sum((0..n).filter(|&i| weight(i) > 0.0).map(|i| {
            weight(i) * (gamma * get(i)).exp_m1()
        }));
        u.ln_1p() / gamma
    } else {
        let mut shift = f64::NEG_INFINITY;
        for i in 0..n {
            if weight(i) > 0.0 {
                shift = shift.max(gamma * get(i));
            }
        }
        let s = neumaier_sum((0..n).filter(|&i| weight(i) > 0.0).map(|i| {
            weight(i) * (gamma * get(i) - shift).exp()
        }));
        (shift + s.ln()) / gamma
    }
}

fn check_losses(losses: &[f64]) -> Result<()> {
    if losses.is_empty() {
        return Err(RiskError::invalid("loss vector must be nonempty"));
    }
    if let Some(bad) = losses.iter().find(|v| !v.is_finite()) {
        return Err(RiskError::invalid(format!("loss vector contains non-finite entry {bad}")));
    }
    Ok(())
}

/// Tilted empirical risk of a loss vector.
///
/// Exact regime: `(1/γ)·(logsumexp(γ·losses) − log n)`; zero-limit regime:
/// the arithmetic mean.
pub fn ter(losses: &[f64], tilt: Tilt) -> Result<f64> {
    check_losses(losses)?;
    let n = losses.len();
    match tilt.regime() {
        TiltRegime::ZeroLimit => Ok(neumaier_sum(losses.iter().copied()) / n as f64),
        TiltRegime::Exact => Ok(tilted_mean_uniform(n, tilt.gamma(), |i| losses[i])),
    }
}

/// Tilted empirical risk of hypothesis `h` on a dataset, without
/// materializing the loss vector.
pub fn empirical_tilted_risk(loss: &LossTable, h: usize, dataset: &Dataset, tilt: Tilt) -> Result<f64> {
    let row = loss.row(h)?;
    for &z in dataset.samples() {
        if z >= row.len() {
            return Err(RiskError::invalid(format!(
                "dataset symbol {z} out of range for alphabet {}",
                row.len()
            )));
        }
    }
    let n = dataset.len();
    match tilt.regime() {
        TiltRegime::ZeroLimit => {
            Ok(neumaier_sum(dataset.samples().iter().map(|&z| row[z])) / n as f64)
        }
        TiltRegime::Exact => {
            Ok(tilted_mean_uniform(n, tilt.gamma(), |i| row[dataset.samples()[i]]))
        }
    }
}

fn check_instance_dims(loss: &LossTable, mu: &DiscreteDistribution) -> Result<()> {
    if mu.len() != loss.alphabet_len() {
        return Err(RiskError::invalid(format!(
            "distribution has {} atoms, loss table has {} columns",
            mu.len(),
            loss.alphabet_len()
        )));
    }
    Ok(())
}

/// Population risk `R(h, μ) = Σ_z μ(z)·ℓ(h, z)`.
pub fn population_risk(h: usize, loss: &LossTable, mu: &DiscreteDistribution) -> Result<f64> {
    check_instance_dims(loss, mu)?;
    let row = loss.row(h)?;
    Ok(neumaier_sum(row.iter().zip(mu.weights()).map(|(&l, &w)| w * l)))
}

/// Tilted population risk `(1/γ)·log Σ_z μ(z)·exp(γ·ℓ(h, z))`; the zero-limit
/// regime returns the population risk.
pub fn tilted_population_risk(
    h: usize,
    loss: &LossTable,
    mu: &DiscreteDistribution,
    tilt: Tilt,
) -> Result<f64> {
    check_instance_dims(loss, mu)?;
    let row = loss.row(h)?;
    match tilt.regime() {
        TiltRegime::ZeroLimit => population_risk(h, loss, mu),
        TiltRegime::Exact => {
            Ok(tilted_mean_weighted(row.len(), tilt.gamma(), |z| row[z], |z| mu.get(z)))
        }
    }
}

/// Tilted generalization error `R(h, μ) − TER(h, S)`.
pub fn tilted_gen_error(
    h: usize,
    dataset: &Dataset,
    loss: &LossTable,
    mu: &DiscreteDistribution,
    tilt: Tilt,
) -> Result<f64> {
    Ok(population_risk(h, loss, mu)? - empirical_tilted_risk(loss, h, dataset, tilt)?)
}

/// Non-linear generalization error `R_γ(h, μ) − TER(h, S)`.
pub fn nonlinear_gen_error(
    h: usize,
    dataset: &Dataset,
    loss: &LossTable,
    mu: &DiscreteDistribution,
    tilt: Tilt,
) -> Result<f64> {
    Ok(tilted_population_risk(h, loss, mu, tilt)? - empirical_tilted_risk(loss, h, dataset, tilt)?)
}

/// Index of the hypothesis minimizing the TER on `dataset`; ties break to the
/// lowest index.
pub fn minimize_ter(dataset: &Dataset, loss: &LossTable, tilt: Tilt) -> Result<usize> {
    let mut best = 0usize;
    let mut best_val = f64::INFINITY;
    for h in 0..loss.card_h() {
        let v = empirical_tilted_risk(loss, h, dataset, tilt)?;
        if v < best_val {
            best_val = v;
            best = h;
        }
    }
    Ok(best)
}

/// Index of the hypothesis minimizing the population risk; same tie-break.
pub fn minimize_population_risk(loss: &LossTable, mu: &DiscreteDistribution) -> Result<usize> {
    let mut best = 0usize;
    let mut best_val = f64::INFINITY;
    for h in 0..loss.card_h() {
        let v = population_risk(h, loss, mu)?;
        if v < best_val {
            best_val = v;
            best = h;
        }
    }
    Ok(best)
}

/// Excess risk `R(h*_γ(S), μ) − R(h*(μ), μ)` of the TER minimizer; always ≥ 0.
pub fn excess_risk(
    dataset: &Dataset,
    loss: &LossTable,
    mu: &DiscreteDistribution,
    tilt: Tilt,
) -> Result<f64> {
    let h_ter = minimize_ter(dataset, loss, tilt)?;
    let h_pop = minimize_population_risk(loss, mu)?;
    Ok(population_risk(h_ter, loss, mu)? - population_risk(h_pop, loss, mu)?)
}

/// Second-moment bounds derived from a loss table:
/// `κ_u = sqrt(max_h E_μ[ℓ²])`, `κ_s` likewise under μ̃ (0 when μ̃ is absent),
/// and `κ_t = sqrt(E_{prior⊗μ}[ℓ²])` when a hypothesis prior is supplied,
/// else `κ_t = κ_u`.
pub fn compute_moment_bounds(
    loss: &LossTable,
    mu: &DiscreteDistribution,
    mu_tilde: Option<&DiscreteDistribution>,
    hypothesis_prior: Option<&DiscreteDistribution>,
) -> Result<MomentBounds> {
    check_instance_dims(loss, mu)?;
    let second_moment = |dist: &DiscreteDistribution, row: &[f64]| -> f64 {
        neumaier_sum(row.iter().zip(dist.weights()).map(|(&l, &w)| w * l * l))
    };
    let max_under = |dist: &DiscreteDistribution| -> f64 {
        loss.rows().map(|row| second_moment(dist, row)).fold(0.0, f64::max)
    };
    let kappa_u = max_under(mu).sqrt();
    let kappa_s = match mu_tilde {
        Some(mt) => {
            check_instance_dims(loss, mt)?;
            max_under(mt).sqrt()
        }
        None => 0.0,
    };
    let kappa_t = match hypothesis_prior {
        Some(prior) => {
            if prior.len() != loss.card_h() {
                return Err(RiskError::invalid(format!(
                    "hypothesis prior has {} atoms, loss table has {} rows",
                    prior.len(),
                    loss.card_h()
                )));
            }
            neumaier_sum(
                loss.rows()
                    .zip(prior.weights())
                    .map(|(row, &p)| p * second_moment(mu, row)),
            )
            .sqrt()
        }
        None => kappa_u,
    };
    Ok(MomentBounds { kappa_u, kappa_s, kappa_t })
}

/// `Var_μ(exp(γ·ℓ(h, Z)))`, computed with a shifted two-pass formula so the
/// result carries relative (not absolute) error even when `exp(γℓ)` spans
/// many orders of magnitude.
pub fn variance_exp_loss(
    loss: &LossTable,
    h: usize,
    mu: &DiscreteDistribution,
    tilt: Tilt,
) -> Result<f64> {
    check_instance_dims(loss, mu)?;
    let row = loss.row(h)?;
    let g = tilt.gamma();
    let mut lmax = f64::NEG_INFINITY;
    for (z, &l) in row.iter().enumerate() {
        if mu.get(z) > 0.0 {
            lmax = lmax.max(g * l);
        }
    }
    if !lmax.is_finite() {
        return Ok(0.0);
    }
    let mean = neumaier_sum(
        row.iter().enumerate().filter(|&(z, _)| mu.get(z) > 0.0).map(|(z, &l)| {
            mu.get(z) * (g * l - lmax).exp()
        }),
    );
    let var = neumaier_sum(
        row.iter().enumerate().filter(|&(z, _)| mu.get(z) > 0.0).map(|(z, &l)| {
            let d = (g * l - lmax).exp() - mean;
            mu.get(z) * d * d
        }),
    );
    Ok(((2.0 * lmax).exp() * var).max(0.0))
}

/// `Var_μ(ℓ(h, Z))`, two-pass.
pub fn variance_loss(loss: &LossTable, h: usize, mu: &DiscreteDistribution) -> Result<f64> {
    let mean = population_risk(h, loss, mu)?;
    let row = loss.row(h)?;
    let var = neumaier_sum(row.iter().zip(mu.weights()).map(|(&l, &w)| {
        let d = l - mean;
        w * d * d
    }));
    Ok(var.max(0.0))
}

/// `E_{P_H}[Var_μ(ℓ(H, Z))]` for a hypothesis distribution `p_h`.
pub fn expected_loss_variance(
    loss: &LossTable,
    mu: &DiscreteDistribution,
    p_h: &DiscreteDistribution,
) -> Result<f64> {
    if p_h.len() != loss.card_h() {
        return Err(RiskError::invalid(format!(
            "hypothesis distribution has {} atoms, loss table has {} rows",
            p_h.len(),
            loss.card_h()
        )));
    }
    let mut acc = 0.0;
    for h in 0..loss.card_h() {
        acc += p_h.get(h) * variance_loss(loss, h, mu)?;
    }
    Ok(acc)
}
