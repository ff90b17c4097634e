//! Aggregation/segregation energies: total k-hostility of discrete and
//! semi-discrete arrangements, and exhaustive verification that the
//! nondecreasing rearrangement minimizes them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcs1d::StepFunction;
use crate::rng::{random_nonincreasing_weights, task_rng};

/// Species indices at positions 1..=n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteArrangement {
    species: Vec<i64>,
}

impl DiscreteArrangement {
    pub fn new(species: Vec<i64>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::NonPositive {
                name: "arrangement length",
                value: 0.0,
            });
        }
        Ok(Self { species })
    }

    pub fn species(&self) -> &[i64] {
        &self.species
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }
}

/// Non-increasing weights h(1), ..., h(n-1); h(0) never enters because equal
/// positions carry no hostility.
#[derive(Debug, Clone, PartialEq)]
pub struct HostilityWeights {
    weights: Vec<f64>,
}

impl HostilityWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::WeightsNotMonotone);
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// h(distance) for distance >= 1.
    pub fn at(&self, distance: usize) -> f64 {
        self.weights[distance - 1]
    }
}

/// Interaction kernel for the semi-discrete energy, described through its
/// second antiderivative W (with W'' = c), which is all the exact pair
/// integrals need.
#[derive(Clone)]
pub enum KernelSpec {
    /// c(sigma) = delta^p sigma^{-1-p}.
    Power { exponent: f64, delta: f64 },
    /// General non-increasing kernel, given directly by W.
    Tabulated {
        second_antiderivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl KernelSpec {
    pub fn power(exponent: f64, delta: f64) -> Result<Self> {
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return Err(Error::NonFinite {
                name: "kernel exponent (need p >= 1)",
                value: exponent,
            });
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::NonPositive {
                name: "delta",
                value: delta,
            });
        }
        Ok(Self::Power { exponent, delta })
    }

    /// The closure must be a second antiderivative of a non-negative,
    /// non-increasing kernel; both properties are spot-checked through second
    /// differences before acceptance.
    pub fn tabulated(w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let h = 1e-4;
        let mut previous = f64::INFINITY;
        for i in 1..=40 {
            let sigma = 0.05 * i as f64;
            let c = (w(sigma + h) - 2.0 * w(sigma) + w(sigma - h)) / (h * h);
            if !c.is_finite() || c < -1e-6 * previous.abs().max(1.0) {
                return Err(Error::InvalidKernel(format!(
                    "second derivative {c} at sigma = {sigma} is negative"
                )));
            }
            if c > previous + 1e-5 * previous.abs().max(1.0) {
                return Err(Error::InvalidKernel(format!(
                    "second derivative increases at sigma = {sigma}: {c} > {previous}"
                )));
            }
            previous = c;
        }
        Ok(Self::Tabulated {
            second_antiderivative: Arc::new(w),
        })
    }
}

/// Second antiderivative of sigma^{-1-p}: -log for p = 1, a power otherwise.
pub(crate) fn w_power(p: f64, s: f64) -> f64 {
    if p == 1.0 {
        -s.ln()
    } else {
        s.powf(1.0 - p) / (p * (p - 1.0))
    }
}

/// Exact integral of sigma^{-1-p} over the rectangle spanned by two disjoint
/// intervals of lengths `len1`, `len2` separated by `gap` (one orientation).
/// Infinite when the intervals touch.
pub(crate) fn power_rect_integral(p: f64, gap: f64, len1: f64, len2: f64) -> f64 {
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    if p == 1.0 {
        // W-combination rewritten through ln(1 + x) to avoid cancellation
        (len1 * len2 / (gap * (gap + len1 + len2))).ln_1p()
    } else {
        w_power(p, gap) + w_power(p, gap + len1 + len2)
            - w_power(p, gap + len1)
            - w_power(p, gap + len2)
    }
}

/// Total k-hostility of a discrete arrangement: pairs whose species differ by
/// more than k are charged the weight of their distance.
pub fn discrete_hostility(
    u: &DiscreteArrangement,
    h: &HostilityWeights,
    k: u32,
) -> Result<f64> {
    let n = u.len();
    if h.weights().len() + 1 < n {
        return Err(Error::WeightsTooShort {
            needed: n - 1,
            got: h.weights().len(),
        });
    }
    let species = u.species();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if (species[j] - species[i]).unsigned_abs() > k as u64 {
                total += h.at(j - i);
            }
        }
    }
    Ok(total)
}

/// Nondecreasing rearrangement: the sorted species sequence.
pub fn discrete_rearrange(u: &DiscreteArrangement) -> DiscreteArrangement {
    let mut species = u.species().to_vec();
    species.sort_unstable();
    DiscreteArrangement { species }
}

/// Outcome of the exhaustive minimality check.
#[derive(Debug, Clone)]
pub struct RearrangementReport {
    pub n: usize,
    pub species_range: u32,
    pub k: u32,
    pub arrangements: u64,
    pub tables: usize,
    pub counterexamples: u64,
    /// Smallest observed H(u) - H(Mu); non-negative when the inequality holds.
    pub min_gap: f64,
    pub seed: u64,
    pub pass: bool,
}

impl std::fmt::Display for RearrangementReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "rearrangement minimality: n={} range={} k={}",
            self.n, self.species_range, self.k
        )?;
        writeln!(f, "arrangements enumerated: {}", self.arrangements)?;
        writeln!(f, "weight tables: {}", self.tables)?;
        writeln!(f, "counterexamples: {}", self.counterexamples)?;
        writeln!(f, "extremal gap: {:e}", self.min_gap)?;
        writeln!(f, "seed: {}", self.seed)?;
        write!(f, "result: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

const EXHAUSTIVE_MAX_N: usize = 8;
const EXHAUSTIVE_MAX_RANGE: u32 = 4;

/// Enumerate every arrangement of n positions over species 0..=species_range
/// against random non-increasing weight tables and check that sorting never
/// increases the total k-hostility.
pub fn verify_rearrangement_minimality(
    n: usize,
    species_range: u32,
    k: u32,
    trials: usize,
    seed: u64,
) -> Result<RearrangementReport> {
    if n == 0 || trials == 0 || k == 0 {
        return Err(Error::NonPositive {
            name: "n, k and trials",
            value: 0.0,
        });
    }
    let states = (species_range as u128 + 1).pow(n as u32);
    if n > EXHAUSTIVE_MAX_N || species_range > EXHAUSTIVE_MAX_RANGE {
        return Err(Error::StateSpaceTooLarge {
            arrangements: states,
            max_n: EXHAUSTIVE_MAX_N,
            max_range: EXHAUSTIVE_MAX_RANGE,
        });
    }

    let tables: Vec<Vec<f64>> = (0..trials)
        .map(|t| {
            let mut rng = task_rng(seed, t as u64);
            random_nonincreasing_weights(&mut rng, n.saturating_sub(1))
        })
        .collect();

    // distance-indexed activation counts for u and its rearrangement
    let mut active_u = vec![0u32; n];
    let mut active_sorted = vec![0u32; n];
    let mut digits = vec![0i64; n];
    let mut sorted = vec![0i64; n];
    let mut min_gap = f64::INFINITY;
    let mut counterexamples = 0u64;
    let mut arrangements = 0u64;

    loop {
        arrangements += 1;
        sorted.copy_from_slice(&digits);
        sorted.sort_unstable();
        active_u.iter_mut().for_each(|c| *c = 0);
        active_sorted.iter_mut().for_each(|c| *c = 0);
        for i in 0..n {
            for j in i + 1..n {
                if (digits[j] - digits[i]).unsigned_abs() > k as u64 {
                    active_u[j - i] += 1;
                }
                if (sorted[j] - sorted[i]).unsigned_abs() > k as u64 {
                    active_sorted[j - i] += 1;
                }
            }
        }
        if active_u != active_sorted {
            for table in &tables {
                let gap: f64 = (1..n)
                    .map(|d| (active_u[d] as f64 - active_sorted[d] as f64) * table[d - 1])
                    .sum();
                min_gap = min_gap.min(gap);
                if gap < -1e-10 {
                    counterexamples += 1;
                }
            }
        } else {
            min_gap = min_gap.min(0.0);
        }

        // odometer step
        let mut pos = 0;
        loop {
            if pos == n {
                let pass = counterexamples == 0;
                return Ok(RearrangementReport {
                    n,
                    species_range,
                    k,
                    arrangements,
                    tables: trials,
                    counterexamples,
                    min_gap,
                    seed,
                    pass,
                });
            }
            if digits[pos] < species_range as i64 {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Total k-hostility of an integer-valued step function under `kernel`,
/// evaluated exactly per ordered piece pair through the second antiderivative;
/// +infinity as soon as an active pair touches and W blows up at 0.
pub fn semidiscrete_hostility(
    u: &StepFunction,
    kernel: &KernelSpec,
    k: u32,
) -> Result<f64> {
    let mut levels = Vec::with_capacity(u.num_pieces());
    for &v in u.values() {
        let rounded = v.round();
        if (v - rounded).abs() > 1e-9 {
            return Err(Error::NonIntegerLevels(v));
        }
        levels.push(rounded as i64);
    }

    let mut total = 0.0;
    for i in 0..u.num_pieces() {
        for j in i + 1..u.num_pieces() {
            if (levels[j] - levels[i]).unsigned_abs() <= k as u64 {
                continue;
            }
            let (lo1, hi1, _) = u.piece(i);
            let (lo2, hi2, _) = u.piece(j);
            let gap = lo2 - hi1;
            let contribution = match kernel {
                KernelSpec::Power { exponent, delta } => {
                    delta.powf(*exponent) * power_rect_integral(*exponent, gap, hi1 - lo1, hi2 - lo2)
                }
                KernelSpec::Tabulated {
                    second_antiderivative: w,
                } => {
                    let (l1, l2) = (hi1 - lo1, hi2 - lo2);
                    w(gap) + w(gap + l1 + l2) - w(gap + l1) - w(gap + l2)
                }
            };
            if !contribution.is_finite() {
                return Ok(f64::INFINITY);
            }
            // both orientations of the ordered double integral
            total += 2.0 * contribution;
        }
    }
    Ok(total)
}
