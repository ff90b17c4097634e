//! Minimum problems on the probability simplex: the multi-variable energy of
//! step lengths, its exact gradient, multi-start minimization in softmax
//! coordinates, extrapolation of the minima in n, and the resulting limit
//! constants.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laws::{self, InteractionLaw};
use crate::nonlocal;
use crate::rng::task_rng;
use rand::Rng;

/// Strictly positive lengths summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexLengths {
    lengths: Vec<f64>,
}

impl SimplexLengths {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::NonPositive {
                name: "simplex length",
                value: *lengths
                    .iter()
                    .find(|l| !(**l > 0.0) || !l.is_finite())
                    .unwrap_or(&0.0),
            });
        }
        let sum: f64 = lengths.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidStepFunction(format!(
                "simplex lengths sum to {sum}, need 1"
            )));
        }
        Ok(Self { lengths })
    }

    /// Normalize arbitrary positive weights onto the simplex.
    pub fn from_unnormalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() || raw.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::NonPositive {
                name: "simplex length",
                value: *raw.first().unwrap_or(&0.0),
            });
        }
        let sum: f64 = raw.iter().sum();
        Ok(Self {
            lengths: raw.iter().map(|l| l / sum).collect(),
        })
    }

    pub fn equal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonPositive {
                name: "n",
                value: 0.0,
            });
        }
        Ok(Self {
            lengths: vec![1.0 / n as f64; n],
        })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn variance(&self) -> f64 {
        let mean = 1.0 / self.lengths.len() as f64;
        self.lengths.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>()
            / self.lengths.len() as f64
    }

    pub fn max_deviation_from_equal(&self) -> f64 {
        let mean = 1.0 / self.lengths.len() as f64;
        self.lengths
            .iter()
            .map(|l| (l - mean).abs())
            .fold(0.0, f64::max)
    }
}

/// Running sums S(i, h) = l_i + ... + l_{i+h-1} (1-based), backed by a prefix
/// table.
#[derive(Debug, Clone)]
pub struct PartialSums {
    prefix: Vec<f64>,
}

impl PartialSums {
    pub fn new(lengths: &[f64]) -> Self {
        let mut prefix = Vec::with_capacity(lengths.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for l in lengths {
            acc += l;
            prefix.push(acc);
        }
        Self { prefix }
    }

    /// S(i, h) for 1 <= i, 1 <= h, i + h - 1 <= n.
    pub fn s(&self, i: usize, h: usize) -> f64 {
        self.prefix[i + h - 1] - self.prefix[i - 1]
    }
}

/// int_A^B sigma^{-p} d sigma in closed form.
fn power_integral(p: f64, a: f64, b: f64) -> f64 {
    if p == 1.0 {
        (b / a).ln()
    } else {
        (a.powf(1.0 - p) - b.powf(1.0 - p)) / (p - 1.0)
    }
}

/// d/dA and d/dB scale like A^{-p}; used by the gradient accumulation.
fn power_density(p: f64, s: f64) -> f64 {
    s.powf(-p)
}

fn validate_inputs(lambdas: &[f64], p: f64, lengths: &[f64]) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::NonFinite {
            name: "exponent p (need p >= 1)",
            value: p,
        });
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| *l < 0.0 || !l.is_finite()) {
        return Err(Error::InvalidCoefficients);
    }
    if lengths.len() <= lambdas.len() {
        return Err(Error::TooFewSteps {
            n: lengths.len(),
            m: lambdas.len(),
        });
    }
    if lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::NonPositive {
            name: "length",
            value: *lengths.iter().find(|l| !(**l > 0.0)).unwrap_or(&0.0),
        });
    }
    Ok(())
}

/// The simplex energy on raw positive lengths (no unit-sum requirement),
/// which is what homogeneity checks and finite differences need.
pub fn p_value_on_lengths(lambdas: &[f64], p: f64, lengths: &[f64]) -> Result<f64> {
    validate_inputs(lambdas, p, lengths)?;
    let n = lengths.len();
    let sums = PartialSums::new(lengths);
    let mut total = 0.0;
    for (idx, lambda) in lambdas.iter().enumerate() {
        if *lambda == 0.0 {
            continue;
        }
        let k = idx + 1;
        for i in 1..=n - k {
            let s_ik = sums.s(i, k);
            let s_ik1 = sums.s(i, k + 1);
            let s_i1k = sums.s(i + 1, k);
            total += lambda * (power_integral(p, s_ik, s_ik1) + power_integral(p, s_i1k, s_ik1));
        }
    }
    Ok(total)
}

/// The simplex energy at a simplex point.
pub fn p_value(lambdas: &[f64], p: f64, l: &SimplexLengths) -> Result<f64> {
    p_value_on_lengths(lambdas, p, l.lengths())
}

/// Exact partial derivatives of the energy; each partial-sum endpoint
/// contributes a sigma^{-p} density over the index range it covers, so the
/// gradient assembles through a difference array in O(n m).
pub fn p_gradient_on_lengths(lambdas: &[f64], p: f64, lengths: &[f64]) -> Result<Vec<f64>> {
    validate_inputs(lambdas, p, lengths)?;
    let n = lengths.len();
    let sums = PartialSums::new(lengths);
    let mut diff = vec![0.0_f64; n + 1];
    let mut add = |lo: usize, hi: usize, c: f64| {
        // inclusive 1-based range
        diff[lo - 1] += c;
        diff[hi] -= c;
    };
    for (idx, lambda) in lambdas.iter().enumerate() {
        if *lambda == 0.0 {
            continue;
        }
        let k = idx + 1;
        for i in 1..=n - k {
            let s_ik = sums.s(i, k);
            let s_ik1 = sums.s(i, k + 1);
            let s_i1k = sums.s(i + 1, k);
            // lower endpoints enter negatively, the shared upper endpoint twice
            add(i, i + k - 1, -lambda * power_density(p, s_ik));
            add(i, i + k, 2.0 * lambda * power_density(p, s_ik1));
            add(i + 1, i + k, -lambda * power_density(p, s_i1k));
        }
    }
    let mut grad = Vec::with_capacity(n);
    let mut acc = 0.0;
    for d in diff.iter().take(n) {
        acc += d;
        grad.push(acc);
    }
    Ok(grad)
}

pub fn p_gradient(lambdas: &[f64], p: f64, l: &SimplexLengths) -> Result<Vec<f64>> {
    p_gradient_on_lengths(lambdas, p, l.lengths())
}

/// Energy at the equal-length point, in closed form.
pub fn equal_length_value(n: usize, lambdas: &[f64], p: f64) -> Result<f64> {
    let lengths = vec![1.0 / n.max(1) as f64; n];
    validate_inputs(lambdas, p, &lengths)?;
    let nf = n as f64;
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(idx, lambda)| {
            let k = (idx + 1) as f64;
            lambda * (nf - k) * 2.0 * power_integral(p, k / nf, (k + 1.0) / nf)
        })
        .sum())
}

/// Result of one simplex minimization.
#[derive(Debug, Clone)]
pub struct MinimizationReport {
    pub minimizer: SimplexLengths,
    pub value: f64,
    pub iterations: usize,
    pub first_order_residual: f64,
    pub restarts: usize,
}

struct LocalRun {
    value: f64,
    lengths: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn softmax(xi: &[f64]) -> Vec<f64> {
    let max = xi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut exp: Vec<f64> = xi.iter().map(|x| (x - max).max(-700.0).exp()).collect();
    let sum: f64 = exp.iter().sum();
    for e in &mut exp {
        *e /= sum;
    }
    exp
}

/// Objective and gradient in softmax coordinates; the chain rule contracts
/// the length gradient against the softmax Jacobian.
fn eval_softmax_objective(lambdas: &[f64], p: f64, xi: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let lengths = softmax(xi);
    let value = p_value_on_lengths(lambdas, p, &lengths).unwrap_or(f64::INFINITY);
    if !value.is_finite() {
        return (f64::INFINITY, vec![0.0; xi.len()], lengths);
    }
    let grad_l = p_gradient_on_lengths(lambdas, p, &lengths).expect("validated above");
    let weighted: f64 = lengths.iter().zip(&grad_l).map(|(l, g)| l * g).sum();
    let grad_xi = lengths
        .iter()
        .zip(&grad_l)
        .map(|(l, g)| l * (g - weighted))
        .collect();
    (value, grad_xi, lengths)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

const LBFGS_HISTORY: usize = 10;
const MAX_ITERATIONS: usize = 2000;

fn lbfgs_minimize(lambdas: &[f64], p: f64, mut xi: Vec<f64>, tolerance: f64) -> LocalRun {
    let (mut value, mut grad, mut lengths) = eval_softmax_objective(lambdas, p, &xi);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let gnorm = norm(&grad);
        if gnorm <= tolerance {
            return LocalRun {
                value,
                lengths,
                iterations,
                residual: gnorm,
                converged: true,
            };
        }
        iterations += 1;

        // two-loop recursion
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = vec![0.0; s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            let alpha = rho_hist[i] * dot(&s_hist[i], &d);
            alphas[i] = alpha;
            for (dj, yj) in d.iter_mut().zip(&y_hist[i]) {
                *dj -= alpha * yj;
            }
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            for dj in &mut d {
                *dj *= gamma;
            }
        }
        for i in 0..s_hist.len() {
            let beta = rho_hist[i] * dot(&y_hist[i], &d);
            for (dj, sj) in d.iter_mut().zip(&s_hist[i]) {
                *dj += (alphas[i] - beta) * sj;
            }
        }

        let mut slope = dot(&grad, &d);
        if slope >= 0.0 {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
        }

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = false;
        let mut new_xi = xi.clone();
        let mut new_state = (f64::INFINITY, Vec::new(), Vec::new());
        for _ in 0..60 {
            for ((nx, x), dj) in new_xi.iter_mut().zip(&xi).zip(&d) {
                *nx = x + step * dj;
            }
            let state = eval_softmax_objective(lambdas, p, &new_xi);
            if state.0 <= value + 1e-4 * step * slope {
                new_state = state;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return LocalRun {
                value,
                lengths,
                iterations,
                residual: gnorm,
                converged: gnorm <= tolerance,
            };
        }

        let (new_value, new_grad, new_lengths) = new_state;
        let s: Vec<f64> = new_xi.iter().zip(&xi).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > LBFGS_HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }
        xi = new_xi;
        value = new_value;
        grad = new_grad;
        lengths = new_lengths;
    }

    let residual = norm(&grad);
    LocalRun {
        value,
        lengths,
        iterations,
        residual,
        converged: residual <= tolerance,
    }
}

/// Minimize the simplex energy over the open simplex: softmax
/// reparametrization, L-BFGS with backtracking, the equal-length start plus
/// `restarts` random starts; ties between equal-value minima resolve toward
/// the smallest length variance.
pub fn minimize_energy(
    n: usize,
    lambdas: &[f64],
    p: f64,
    restarts: usize,
    tolerance: f64,
    seed: u64,
) -> Result<MinimizationReport> {
    let probe = vec![1.0 / n.max(1) as f64; n.max(1)];
    validate_inputs(lambdas, p, &probe)?;
    if !(tolerance > 0.0) {
        return Err(Error::NonPositive {
            name: "tolerance",
            value: tolerance,
        });
    }

    let runs: Vec<LocalRun> = (0..=restarts)
        .into_par_iter()
        .map(|start| {
            let xi = if start == 0 {
                vec![0.0; n]
            } else {
                let mut rng = task_rng(seed, start as u64);
                (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
            };
            lbfgs_minimize(lambdas, p, xi, tolerance)
        })
        .collect();

    let converged: Vec<&LocalRun> = runs.iter().filter(|r| r.converged).collect();
    if converged.is_empty() {
        let best = runs
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one start");
        return Err(Error::NoConvergence {
            value: best.value,
            residual: best.residual,
        });
    }

    let best_value = converged
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * (1.0 + best_value.abs());
    let winner = converged
        .iter()
        .filter(|r| r.value <= best_value + tie)
        .min_by(|a, b| {
            let va = SimplexLengths::from_unnormalized(&a.lengths)
                .map(|s| s.variance())
                .unwrap_or(f64::INFINITY);
            let vb = SimplexLengths::from_unnormalized(&b.lengths)
                .map(|s| s.variance())
                .unwrap_or(f64::INFINITY);
            va.total_cmp(&vb)
        })
        .expect("nonempty");

    Ok(MinimizationReport {
        minimizer: SimplexLengths::from_unnormalized(&winner.lengths)?,
        value: winner.value,
        iterations: winner.iterations,
        first_order_residual: winner.residual,
        restarts,
    })
}

/// Extrapolated asymptotic constant with its fit provenance.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    pub constant: f64,
    pub uncertainty: f64,
    pub model_used: String,
}

/// Fit I_n / n^p = c + a/n by least squares (the exact linear-in-1/n case is
/// reproduced exactly) and, with six or more points, cross-check against the
/// quadratic model c + a/n + b/n^2; the model disagreement feeds the
/// uncertainty.
pub fn extrapolate_limit(values: &[(usize, f64)], p: f64) -> Result<LimitEstimate> {
    if values.len() < 4 {
        return Err(Error::InsufficientData { needed: 4 });
    }
    for pair in values.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::InvalidSchedule(
                "n values must strictly increase".into(),
            ));
        }
    }
    let xs: Vec<f64> = values.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let ys: Vec<f64> = values
        .iter()
        .map(|(n, i)| i / (*n as f64).powf(p))
        .collect();
    let len = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = len * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::IllConditionedFit("degenerate 1/n design".into()));
    }
    let slope = (len * sxy - sx * sy) / denom;
    let constant = (sy - slope * sx) / len;
    let residual_sq: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - constant - slope * x;
            r * r
        })
        .sum();
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let se_constant = (residual_sq / dof * sxx / denom).sqrt();

    let mut uncertainty = se_constant;
    let mut model_used = String::from("c + a/n");
    if values.len() >= 6 {
        if let Some(c_quad) = quadratic_fit_constant(&xs, &ys) {
            uncertainty = uncertainty.max((constant - c_quad).abs());
            model_used = format!(
                "c + a/n (checked against c + a/n + b/n^2, constants differ by {:.3e})",
                (constant - c_quad).abs()
            );
        }
    }
    Ok(LimitEstimate {
        constant,
        uncertainty,
        model_used,
    })
}

/// Constant term of the best-fit quadratic in x = 1/n, by Cramer on the
/// normal equations; None when the design degenerates.
fn quadratic_fit_constant(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let s1: f64 = xs.iter().sum();
    let s2: f64 = xs.iter().map(|x| x.powi(2)).sum();
    let s3: f64 = xs.iter().map(|x| x.powi(3)).sum();
    let s4: f64 = xs.iter().map(|x| x.powi(4)).sum();
    let t0: f64 = ys.iter().sum();
    let t1: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let t2: f64 = xs.iter().zip(ys).map(|(x, y)| x * x * y).sum();
    let det3 = |a: [f64; 9]| -> f64 {
        a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
            + a[2] * (a[3] * a[7] - a[4] * a[6])
    };
    let det = det3([n, s1, s2, s1, s2, s3, s2, s3, s4]);
    if det.abs() < 1e-300 {
        return None;
    }
    let det_c = det3([t0, s1, s2, t1, s2, s3, t2, s3, s4]);
    Some(det_c / det)
}

/// Options shared by the limit-constant estimators.
#[derive(Debug, Clone)]
pub struct ShapeOptions {
    pub restarts: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Trials used to measure the window-to-simplex bookkeeping constant.
    pub identity_trials: usize,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            tolerance: 1e-10,
            seed: 1729,
            identity_trials: 24,
        }
    }
}

/// Estimated limit constant with the full audit trail of its computation.
#[derive(Debug, Clone)]
pub struct ShapeFactorReport {
    /// Measured bookkeeping constant between the window energy and the
    /// simplex energy.
    pub kappa: f64,
    /// Minima (n, I_n) along the schedule.
    pub rows: Vec<(usize, f64)>,
    /// Extrapolated limit of I_n / n^p.
    pub limit: LimitEstimate,
    pub k_hat: f64,
    pub k_hat_uncertainty: f64,
    /// True when the law has several active jumps, where the chain only
    /// certifies a lower-bound constant (conjecturally sharp).
    pub conjectural: bool,
    pub label: &'static str,
}

/// Estimate the limit constant of a piecewise-constant law: minimize the
/// simplex energy along the n schedule, extrapolate I_n / n^p, and normalize
/// by the measured bookkeeping constant, the geometric constant and the scale
/// factor.
pub fn shape_factor_estimate(
    lambdas: &[f64],
    p: f64,
    n_schedule: &[usize],
    options: &ShapeOptions,
) -> Result<ShapeFactorReport> {
    if n_schedule.is_empty() {
        return Err(Error::InvalidSchedule("empty n schedule".into()));
    }
    for pair in n_schedule.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidSchedule(
                "n schedule must strictly increase".into(),
            ));
        }
    }
    let law = InteractionLaw::pca(lambdas.to_vec())?;
    let m = law.pca_coefficients().expect("pca by construction").len();

    let kappa = nonlocal::verify_p_identity(m + 2, lambdas, p, options.identity_trials, options.seed)?;

    let rows: Result<Vec<(usize, f64)>> = n_schedule
        .par_iter()
        .map(|&n| {
            let report = minimize_energy(
                n,
                lambdas,
                p,
                options.restarts,
                options.tolerance,
                options.seed.wrapping_add(n as u64),
            )?;
            Ok((n, report.value))
        })
        .collect();
    let rows = rows?;

    let limit = extrapolate_limit(&rows, p)?;
    let geometric = laws::geometric_constant(1, p, 1e-12)?;
    let scale = law.scale_factor(1e-12)?;
    let normalization = geometric * scale;
    let k_hat = kappa * limit.constant / normalization;
    let k_hat_uncertainty = kappa * limit.uncertainty / normalization;
    let active_jumps = lambdas.iter().filter(|l| **l > 0.0).count();
    let conjectural = active_jumps > 1;
    Ok(ShapeFactorReport {
        kappa,
        rows,
        limit,
        k_hat,
        k_hat_uncertainty,
        conjectural,
        label: if conjectural {
            "lower-bound constant (conjecturally sharp)"
        } else {
            "shape factor"
        },
    })
}

/// Predicted limit of I_{n,1}/n for coefficients equal within dyadic
/// packages: the telescoping collapses each package onto its head.
pub fn pca2_telescopic_prediction(lambdas: &[f64]) -> Result<f64> {
    // validate as pca coefficients first
    let _ = InteractionLaw::pca(lambdas.to_vec())?;
    if !laws::dyadic_packages_equal(lambdas) {
        return Err(Error::NotDyadicPackaged);
    }
    let mut head = 1usize;
    let mut sum = 0.0;
    while head <= lambdas.len() {
        sum += lambdas[head - 1];
        head *= 2;
    }
    Ok(2.0 * std::f64::consts::LN_2 * sum)
}

/// One row of the supremum demonstration.
#[derive(Debug, Clone)]
pub struct SupDemoRow {
    pub packages: u32,
    pub k_hat: f64,
    /// Closed-form prediction m log2 / H_{2^m - 1}.
    pub predicted: f64,
}

/// For each package count m, estimate the limit constant of the
/// equal-coefficient dyadic law with 2^m - 1 unit jumps (p = 1). The
/// resulting constants increase toward one.
pub fn sup_demo(
    m_schedule: &[u32],
    n_schedule: &[usize],
    options: &ShapeOptions,
) -> Result<Vec<SupDemoRow>> {
    if m_schedule.is_empty() {
        return Err(Error::InvalidSchedule("empty package schedule".into()));
    }
    let mut rows = Vec::with_capacity(m_schedule.len());
    for &m in m_schedule {
        if m == 0 || m > 6 {
            return Err(Error::InvalidSchedule(format!(
                "package count {m} outside 1..=6"
            )));
        }
        let coefficient_count = (1usize << m) - 1;
        let lambdas = vec![1.0; coefficient_count];
        let report = shape_factor_estimate(&lambdas, 1.0, n_schedule, options)?;
        let harmonic: f64 = (1..=coefficient_count).map(|k| 1.0 / k as f64).sum();
        rows.push(SupDemoRow {
            packages: m,
            k_hat: report.k_hat,
            predicted: m as f64 * std::f64::consts::LN_2 / harmonic,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_simplex, task_rng};
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn ln4() -> f64 {
        4.0_f64.ln()
    }

    #[test]
    fn partial_sums_recurrence() {
        let lengths = [0.1, 0.2, 0.3, 0.4];
        let sums = PartialSums::new(&lengths);
        for i in 1..=4usize {
            assert_relative_eq!(sums.s(i, 1), lengths[i - 1], epsilon = 1e-15);
        }
        for i in 1..=3usize {
            for h in 1..=(4 - i) {
                assert_relative_eq!(
                    sums.s(i, h + 1),
                    sums.s(i, h) + lengths[i + h - 1],
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn two_step_values_match_the_log_formula() {
        let l = SimplexLengths::new(vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(p_value(&[1.0], 1.0, &l).unwrap(), ln4(), epsilon = 1e-14);

        let l = SimplexLengths::new(vec![0.25, 0.75]).unwrap();
        assert_relative_eq!(
            p_value(&[1.0], 1.0, &l).unwrap(),
            (16.0_f64 / 3.0).ln(),
            epsilon = 1e-14
        );

        // independent closed form for arbitrary pairs
        let mut rng = task_rng(41, 0);
        for _ in 0..200 {
            let l = random_simplex(&mut rng, 2);
            let expected = ((l[0] + l[1]).powi(2) / (l[0] * l[1])).ln();
            assert_relative_eq!(
                p_value_on_lengths(&[1.0], 1.0, &l).unwrap(),
                expected,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn equal_lengths_reproduce_closed_forms() {
        for n in [2usize, 5, 9, 16] {
            let nf = n as f64;
            assert_relative_eq!(
                equal_length_value(n, &[1.0], 1.0).unwrap(),
                (nf - 1.0) * ln4(),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                equal_length_value(n, &[1.0], 2.0).unwrap(),
                nf * (nf - 1.0),
                max_relative = 1e-13
            );
            for p in [1.5, 3.0] {
                let formula = 2.0 * (nf - 1.0) * nf.powf(p - 1.0) * (1.0 - 2.0_f64.powf(1.0 - p))
                    / (p - 1.0);
                assert_relative_eq!(
                    equal_length_value(n, &[1.0], p).unwrap(),
                    formula,
                    max_relative = 1e-12
                );
            }
            // matches the direct evaluation
            let l = SimplexLengths::equal(n).unwrap();
            assert_relative_eq!(
                equal_length_value(n, &[1.0], 1.0).unwrap(),
                p_value(&[1.0], 1.0, &l).unwrap(),
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(
            p_value(&[1.0], 1.0, &SimplexLengths::equal(5).unwrap()).unwrap(),
            4.0 * ln4(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn energy_is_reversal_symmetric() {
        let mut rng = task_rng(42, 0);
        for _ in 0..100 {
            let l = random_simplex(&mut rng, 7);
            let mut rev = l.clone();
            rev.reverse();
            for (lambdas, p) in [(vec![1.0], 1.0), (vec![0.5, 2.0], 2.5)] {
                assert_relative_eq!(
                    p_value_on_lengths(&lambdas, p, &l).unwrap(),
                    p_value_on_lengths(&lambdas, p, &rev).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn energy_homogeneity_in_total_length() {
        let mut rng = task_rng(43, 0);
        for _ in 0..50 {
            let l = random_simplex(&mut rng, 6);
            let scale = 2.75;
            let scaled: Vec<f64> = l.iter().map(|x| x * scale).collect();
            // p = 1: pure log ratios, unchanged
            assert_relative_eq!(
                p_value_on_lengths(&[1.0, 1.0], 1.0, &scaled).unwrap(),
                p_value_on_lengths(&[1.0, 1.0], 1.0, &l).unwrap(),
                max_relative = 1e-12
            );
            // p > 1: scales by L^{1-p}
            for p in [1.5, 2.0, 3.0] {
                assert_relative_eq!(
                    p_value_on_lengths(&[1.0], p, &scaled).unwrap(),
                    scale.powf(1.0 - p) * p_value_on_lengths(&[1.0], p, &l).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = task_rng(44, 0);
        for (lambdas, p, n) in [
            (vec![1.0], 1.0, 6),
            (vec![1.0], 2.0, 9),
            (vec![0.4, 1.3, 0.0, 0.9], 1.5, 8),
            (vec![1.0, 1.0, 1.0], 3.0, 7),
        ] {
            for _ in 0..25 {
                let l = random_simplex(&mut rng, n);
                let grad = p_gradient_on_lengths(&lambdas, p, &l).unwrap();
                let scale = grad.iter().map(|g| g.abs()).fold(1.0, f64::max);
                for j in 0..n {
                    let h = 1e-4 * l[j];
                    let mut up = l.clone();
                    up[j] += h;
                    let mut down = l.clone();
                    down[j] -= h;
                    let fd = (p_value_on_lengths(&lambdas, p, &up).unwrap()
                        - p_value_on_lengths(&lambdas, p, &down).unwrap())
                        / (2.0 * h);
                    assert!(
                        (fd - grad[j]).abs() <= 1e-6 * grad[j].abs().max(1e-3 * scale),
                        "lambda={lambdas:?} p={p} j={j}: fd {fd} vs {g}",
                        g = grad[j]
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_is_linear_in_the_coefficients() {
        let mut rng = task_rng(45, 0);
        let l = random_simplex(&mut rng, 8);
        let combined = p_gradient_on_lengths(&[0.7, 1.9], 2.0, &l).unwrap();
        let g1 = p_gradient_on_lengths(&[1.0], 2.0, &l).unwrap();
        let g2 = p_gradient_on_lengths(&[0.0, 1.0], 2.0, &l).unwrap();
        for j in 0..8 {
            assert_relative_eq!(
                combined[j],
                0.7 * g1[j] + 1.9 * g2[j],
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn projected_gradient_vanishes_at_equal_lengths_for_the_single_jump_law() {
        let n = 12;
        let l = SimplexLengths::equal(n).unwrap();
        let grad = p_gradient(&[1.0], 1.0, &l).unwrap();
        let mean: f64 = grad.iter().sum::<f64>() / n as f64;
        for g in &grad {
            assert!((g - mean).abs() < 1e-10, "asymmetric gradient {g} vs {mean}");
        }
    }

    #[test]
    fn minimum_matches_the_exact_identity() {
        let report = minimize_energy(2, &[1.0], 1.0, 4, 1e-11, 7).unwrap();
        assert_relative_eq!(report.value, ln4(), epsilon = 1e-9);

        let report = minimize_energy(5, &[1.0], 1.0, 4, 1e-11, 7).unwrap();
        assert_relative_eq!(report.value, 4.0 * ln4(), epsilon = 1e-8);
        assert!(report.minimizer.max_deviation_from_equal() < 1e-6);
        assert!(report.first_order_residual <= 1e-11);
    }

    #[test]
    fn optimizer_beats_the_equal_point_for_p_two() {
        let n = 16;
        let report = minimize_energy(n, &[1.0], 2.0, 8, 1e-10, 11).unwrap();
        let equal = equal_length_value(n, &[1.0], 2.0).unwrap();
        assert!(
            report.value < equal,
            "minimum {} not below equal value {equal}",
            report.value
        );
    }

    #[test]
    fn extrapolation_is_exact_on_linear_data() {
        let data: Vec<(usize, f64)> = [4usize, 8, 16, 32, 64]
            .iter()
            .map(|&n| (n, (n as f64 - 1.0) * ln4()))
            .collect();
        let est = extrapolate_limit(&data, 1.0).unwrap();
        assert_relative_eq!(est.constant, ln4(), epsilon = 1e-10);
        assert!(est.uncertainty < 1e-10);

        let flat: Vec<(usize, f64)> = [4usize, 8, 16, 32]
            .iter()
            .map(|&n| (n, 2.5 * (n as f64).powi(2)))
            .collect();
        let est = extrapolate_limit(&flat, 2.0).unwrap();
        assert_relative_eq!(est.constant, 2.5, epsilon = 1e-10);

        assert!(matches!(
            extrapolate_limit(&data[..3], 1.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn telescopic_predictions() {
        assert_relative_eq!(
            pca2_telescopic_prediction(&[1.0]).unwrap(),
            2.0 * LN_2,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            pca2_telescopic_prediction(&[1.0, 1.0, 1.0]).unwrap(),
            4.0 * LN_2,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            pca2_telescopic_prediction(&[0.0, 1.0, 1.0]).unwrap(),
            2.0 * LN_2,
            epsilon = 1e-15
        );
        assert!(matches!(
            pca2_telescopic_prediction(&[1.0, 2.0, 3.0]),
            Err(Error::NotDyadicPackaged)
        ));
    }

    #[test]
    fn shape_factor_of_the_unit_jump_law() {
        let options = ShapeOptions {
            restarts: 3,
            ..Default::default()
        };
        let report =
            shape_factor_estimate(&[1.0], 1.0, &[8, 12, 16, 24, 32], &options).unwrap();
        assert_relative_eq!(report.kappa, 1.0, max_relative = 1e-9);
        assert_relative_eq!(report.k_hat, LN_2, max_relative = 1e-6);
        assert!(!report.conjectural);
    }
}
