//! Wage distributions across identical workers.
//!
//! Because the wage next period depends only on the current wage and on
//! whether the worker is evaluated, the cross-section of wages is a Markov
//! chain on a finite support. [`propagate`] pushes probability mass forward
//! exactly, [`enumerate_histories`] sums over every evaluation history as an
//! independent check, and [`simulate`] samples histories for Monte Carlo
//! validation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::model::{ContractParams, Horizon};

/// A solved worker: effort and wage response for each period and previous wage.
///
/// Periods are numbered from 1.
pub trait WagePolicy: Sync {
    fn periods(&self) -> usize;

    fn effort(&self, period: usize, prev_wage: f64) -> f64;

    /// Wage carried forward when the worker is evaluated in `period`.
    fn evaluated_wage(&self, period: usize, prev_wage: f64) -> f64;

    /// Total pay in an evaluated period. Differs from the wage when the
    /// bonus is paid out separately.
    fn evaluated_pay(&self, period: usize, prev_wage: f64) -> f64 {
        self.evaluated_wage(period, prev_wage)
    }

    /// Wages closer than this are the same support point. Zero for grid wages.
    fn merge_tolerance(&self) -> f64;
}

/// Finite-support wage distribution, support sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WageDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl WageDistribution {
    pub const MASS_TOLERANCE: f64 = 1e-12;

    pub fn point(wage: f64) -> Self {
        Self {
            support: vec![wage],
            probs: vec![1.0],
        }
    }

    /// Builds a distribution from possibly repeated atoms, merging wages that
    /// lie within `tol` of the first wage of their cluster.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>, tol: f64) -> Result<Self> {
        if atoms.iter().any(|&(w, q)| !w.is_finite() || !(q >= 0.0)) {
            return Err(ModelError::Domain(
                "distribution atoms must have finite wages and nonnegative mass".into(),
            ));
        }
        atoms.retain(|&(_, q)| q > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (w, q) in atoms {
            match support.last() {
                Some(&rep) if w - rep <= tol => *probs.last_mut().unwrap() += q,
                _ => {
                    support.push(w);
                    probs.push(q);
                }
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::MASS_TOLERANCE {
            return Err(ModelError::Domain(format!(
                "distribution mass {total} differs from 1"
            )));
        }
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(w, q)| w * q).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(w, q)| q * (w - m) * (w - m)).sum()
    }

    /// Mass at `wage` (within `tol`).
    pub fn mass_at(&self, wage: f64, tol: f64) -> f64 {
        self.iter()
            .filter(|(w, _)| (w - wage).abs() <= tol)
            .map(|(_, q)| q)
            .sum()
    }

    /// Expectation of `f(wage)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(w, q)| q * f(w)).sum()
    }
}

/// One step of the chain: mass `1 − p` stays, mass `p` moves to the evaluated wage.
pub fn step<P: WagePolicy + ?Sized>(
    policy: &P,
    contract: &ContractParams,
    period: usize,
    dist: &WageDistribution,
) -> WageDistribution {
    let p = contract.p();
    let mut atoms = Vec::with_capacity(2 * dist.len());
    for (w, q) in dist.iter() {
        atoms.push((w, q * (1.0 - p)));
        atoms.push((policy.evaluated_wage(period, w), q * p));
    }
    WageDistribution::from_atoms(atoms, policy.merge_tolerance())
        .expect("mass is conserved by a Markov step")
}

/// Exact wage distributions `[w_0, w_1, …, w_T]` starting from `initial`.
pub fn propagate<P: WagePolicy + ?Sized>(
    policy: &P,
    contract: &ContractParams,
    horizon: Horizon,
    initial: &WageDistribution,
) -> Vec<WageDistribution> {
    let mut out = Vec::with_capacity(horizon.periods() + 1);
    out.push(initial.clone());
    for t in 1..=horizon.periods() {
        let next = step(policy, contract, t, out.last().unwrap());
        out.push(next);
    }
    out
}

/// Largest horizon accepted by [`enumerate_histories`].
pub const MAX_ENUMERATION_PERIODS: usize = 20;

/// Distribution of `w_T` by summing over all `2^T` evaluation histories.
pub fn enumerate_histories<P: WagePolicy + ?Sized>(
    policy: &P,
    contract: &ContractParams,
    horizon: Horizon,
) -> Result<WageDistribution> {
    let periods = horizon.periods();
    if periods > MAX_ENUMERATION_PERIODS {
        return Err(ModelError::HorizonTooLong {
            horizon: periods,
            limit: MAX_ENUMERATION_PERIODS,
        });
    }
    let p = contract.p();
    let atoms: Vec<(f64, f64)> = (0u32..(1u32 << periods))
        .map(|history| {
            let mut w = contract.w0();
            let mut prob = 1.0;
            for t in 1..=periods {
                if history >> (t - 1) & 1 == 1 {
                    w = policy.evaluated_wage(t, w);
                    prob *= p;
                } else {
                    prob *= 1.0 - p;
                }
            }
            (w, prob)
        })
        .collect();
    WageDistribution::from_atoms(atoms, policy.merge_tolerance())
}

/// Sum over histories of `f(period, prev_wage, evaluated) · probability`,
/// for every period. Used to cross-check expectations computed from
/// propagated distributions.
pub fn enumerate_expectation<P, F>(
    policy: &P,
    contract: &ContractParams,
    horizon: Horizon,
    mut f: F,
) -> Result<Vec<f64>>
where
    P: WagePolicy + ?Sized,
    F: FnMut(usize, f64, bool) -> f64,
{
    let periods = horizon.periods();
    if periods > MAX_ENUMERATION_PERIODS {
        return Err(ModelError::HorizonTooLong {
            horizon: periods,
            limit: MAX_ENUMERATION_PERIODS,
        });
    }
    let p = contract.p();
    let mut sums = vec![0.0; periods];
    for history in 0u32..(1u32 << periods) {
        let evaluated = |t: usize| history >> (t - 1) & 1 == 1;
        let prob: f64 = (1..=periods)
            .map(|t| if evaluated(t) { p } else { 1.0 - p })
            .product();
        let mut w = contract.w0();
        for t in 1..=periods {
            sums[t - 1] += prob * f(t, w, evaluated(t));
            if evaluated(t) {
                w = policy.evaluated_wage(t, w);
            }
        }
    }
    Ok(sums)
}

/// Empirical wage distributions `[w_0, …, w_T]` from `n_paths` sampled histories.
///
/// Path `i` draws its evaluation coin flips from a ChaCha stream keyed by
/// `(seed, i)`, one draw per period, so the result does not depend on how
/// paths are scheduled across threads.
pub fn simulate<P: WagePolicy + ?Sized>(
    policy: &P,
    contract: &ContractParams,
    horizon: Horizon,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<WageDistribution>> {
    if n_paths == 0 {
        return Err(ModelError::Domain("n_paths must be at least 1".into()));
    }
    const CHUNK: usize = 4096;
    let periods = horizon.periods();
    let p = contract.p();
    let n_chunks = n_paths.div_ceil(CHUNK);
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut counts: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); periods + 1];
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n_paths);
            for path in start..end {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(path as u64);
                let mut w = contract.w0();
                *counts[0].entry(w.to_bits()).or_default() += 1;
                for t in 1..=periods {
                    let u: f64 = rng.gen();
                    if u < p {
                        w = policy.evaluated_wage(t, w);
                    }
                    *counts[t].entry(w.to_bits()).or_default() += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![BTreeMap::new(); periods + 1],
            |mut acc, part| {
                for (a, b) in acc.iter_mut().zip(part) {
                    for (k, v) in b {
                        *a.entry(k).or_default() += v;
                    }
                }
                acc
            },
        );
    let n = n_paths as f64;
    counts
        .into_iter()
        .map(|per_period| {
            let atoms = per_period
                .into_iter()
                .map(|(bits, count)| (f64::from_bits(bits), count as f64 / n))
                .collect();
            WageDistribution::from_atoms(atoms, policy.merge_tolerance())
        })
        .collect()
}

/// Total variation distance `½ Σ |a − b|`, matching support points within `tol`.
pub fn total_variation(a: &WageDistribution, b: &WageDistribution, tol: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = a.iter().collect();
    atoms.extend(b.iter().map(|(w, q)| (w, -q)));
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut rep = f64::NAN;
    let mut acc = 0.0;
    for (w, q) in atoms {
        if rep.is_nan() || w - rep > tol {
            total += f64::abs(acc);
            rep = w;
            acc = 0.0;
        }
        acc += q;
    }
    total += f64::abs(acc);
    0.5 * total
}

/// Per-period mean, variance and coefficient of variation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSeries {
    pub expectancy: Vec<f64>,
    pub variance: Vec<f64>,
    /// `std / mean`; `None` where the mean is zero.
    pub std_over_mean: Vec<Option<f64>>,
}

impl ProfileSeries {
    pub fn len(&self) -> usize {
        self.expectancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expectancy.is_empty()
    }
}

pub fn profile(distributions: &[WageDistribution]) -> ProfileSeries {
    let expectancy: Vec<f64> = distributions.iter().map(WageDistribution::mean).collect();
    let variance: Vec<f64> = distributions
        .iter()
        .map(|d| d.variance().max(0.0))
        .collect();
    let std_over_mean = expectancy
        .iter()
        .zip(&variance)
        .map(|(&m, &v)| (m != 0.0).then(|| v.sqrt() / m))
        .collect();
    ProfileSeries {
        expectancy,
        variance,
        std_over_mean,
    }
}

/// A wage bracket `(low, high]`, or the degenerate bracket holding wage 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Bracket {
    Zero,
    /// `(i·width, (i+1)·width]`
    Interval(u32),
}

impl Bracket {
    pub fn label(&self, width: f64) -> String {
        match *self {
            Bracket::Zero => "0".to_string(),
            Bracket::Interval(i) => {
                let low = round_label(f64::from(i) * width);
                let high = round_label(f64::from(i + 1) * width);
                format!("{low}-{high}")
            }
        }
    }
}

fn round_label(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Bracket masses of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub width: f64,
    pub masses: BTreeMap<Bracket, f64>,
}

impl Histogram {
    pub fn mass(&self, bracket: Bracket) -> f64 {
        self.masses.get(&bracket).copied().unwrap_or(0.0)
    }
}

/// Bracket of a single wage; multiples of `width` (within 1e-9 relative)
/// belong to the bracket they close.
pub fn bracket_of(wage: f64, width: f64) -> Bracket {
    if wage <= 0.0 {
        return Bracket::Zero;
    }
    let mut q = wage / width;
    if (q - q.round()).abs() < 1e-9 * q.max(1.0) {
        q = q.round();
    }
    Bracket::Interval((q.ceil() as u32).saturating_sub(1))
}

/// Sums distribution mass over half-open brackets `(low, high]` of `width`.
pub fn bracketize(dist: &WageDistribution, width: f64) -> Result<Histogram> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(ModelError::Domain(format!(
            "bracket width must be positive, got {width}"
        )));
    }
    let mut masses = BTreeMap::new();
    for (w, q) in dist.iter() {
        *masses.entry(bracket_of(w, width)).or_insert(0.0) += q;
    }
    Ok(Histogram { width, masses })
}
