//! The non-local energies themselves: exact evaluation on step functions,
//! the window-extended variant, the identity tying the extended energy to the
//! simplex function, and iterated adaptive quadrature for continuous profiles.

use crate::error::{Error, Result};
use crate::funcs1d::{PiecewiseAffine, Profile1D, StepFunction};
use crate::hostility::{power_rect_integral, w_power};
use crate::laws::{self, InteractionLaw};
use crate::quad;
use crate::rng::{random_simplex, task_rng};
use rand::Rng;

/// Knobs for the quadrature-based evaluator.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationOptions {
    pub quadrature_tolerance: f64,
    /// Safety factor (at most 1) on the analytically inactive band near the
    /// diagonal; 1 uses the full band.
    pub band_width_factor: f64,
    pub max_subdivisions: usize,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            quadrature_tolerance: 1e-6,
            band_width_factor: 1.0,
            max_subdivisions: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Exact,
    Quadrature,
    MonteCarlo,
}

/// Pair of touching pieces whose activation makes the energy blow up.
#[derive(Debug, Clone, Copy)]
pub struct AdjacentActivation {
    pub left_piece: usize,
    pub right_piece: usize,
    pub jump: f64,
}

/// Evaluated energy with its method and error bookkeeping; the value may be
/// +infinity, in which case `divergence` names the offending pair.
#[derive(Debug, Clone)]
pub struct FunctionalValue {
    pub value: f64,
    pub method: EvalMethod,
    pub error_estimate: f64,
    pub divergence: Option<AdjacentActivation>,
}

impl FunctionalValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            method: EvalMethod::Exact,
            error_estimate: 0.0,
            divergence: None,
        }
    }

    fn diverged(pair: AdjacentActivation) -> Self {
        Self {
            value: f64::INFINITY,
            method: EvalMethod::Exact,
            error_estimate: 0.0,
            divergence: Some(pair),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::NonPositive { name, value });
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::NonFinite {
            name: "exponent p (need p >= 1)",
            value: p,
        });
    }
    Ok(())
}

/// Exact evaluation is restricted to laws that are piecewise constant (or
/// rescalings of such), mirroring the advertised contract.
fn check_exact_law(law: &InteractionLaw, operation: &'static str) -> Result<()> {
    match law {
        InteractionLaw::Step { .. } | InteractionLaw::PiecewiseConstant { .. } => Ok(()),
        InteractionLaw::Rescaled { base, .. } => check_exact_law(base, operation),
        other => Err(Error::UnsupportedLawVariant {
            operation,
            found: other.variant_name(),
        }),
    }
}

/// Difference quotient |jump| / delta with float dust removed: ratios within
/// 1e-9 (relative) of an integer are treated as that integer, so grid-aligned
/// step functions keep their jumps on exact thresholds.
fn snapped_ratio(jump_abs: f64, delta: f64) -> f64 {
    let r = jump_abs / delta;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * r.abs().max(1.0) {
        k
    } else {
        r
    }
}

/// Energy of a step function over its own domain, one exact closed-form
/// rectangle integral per active piece pair.
pub fn lambda_exact(
    law: &InteractionLaw,
    u: &StepFunction,
    delta: f64,
    p: f64,
) -> Result<FunctionalValue> {
    check_positive("delta", delta)?;
    check_exponent(p)?;
    check_exact_law(law, "lambda_exact")?;

    let delta_pow = delta.powf(p);
    let mut total = 0.0;
    for i in 0..u.num_pieces() {
        let (lo1, hi1, v1) = u.piece(i);
        for j in i + 1..u.num_pieces() {
            let (lo2, hi2, v2) = u.piece(j);
            let weight = law.evaluate(snapped_ratio((v2 - v1).abs(), delta))?;
            if weight == 0.0 {
                continue;
            }
            let gap = lo2 - hi1;
            if gap <= 0.0 {
                return Ok(FunctionalValue::diverged(AdjacentActivation {
                    left_piece: i,
                    right_piece: j,
                    jump: v2 - v1,
                }));
            }
            total += 2.0 * weight * delta_pow * power_rect_integral(p, gap, hi1 - lo1, hi2 - lo2);
        }
    }
    Ok(FunctionalValue::exact(total))
}

/// Energy with the inner point ranging over the whole line. Outside the
/// window the function is continued one delta-level past each end value and
/// held constant from there, so the window boundary behaves like one more
/// transition of the staircase rather than a wall.
pub fn lambda_hat_exact(
    law: &InteractionLaw,
    u: &StepFunction,
    delta: f64,
    p: f64,
) -> Result<FunctionalValue> {
    let interior = lambda_exact(law, u, delta, p)?;
    if !interior.is_finite() {
        return Ok(interior);
    }

    let a = u.domain().lower();
    let b = u.domain().upper();
    let n = u.num_pieces();
    let ext_left = u.values()[0] - delta;
    let ext_right = u.values()[n - 1] + delta;
    let delta_pow = delta.powf(p);

    let mut tails = 0.0;
    for i in 0..n {
        let (lo, hi, v) = u.piece(i);
        let w_left = law.evaluate(snapped_ratio((v - ext_left).abs(), delta))?;
        if w_left > 0.0 {
            if lo <= a {
                return Ok(FunctionalValue::diverged(AdjacentActivation {
                    left_piece: 0,
                    right_piece: i,
                    jump: v - ext_left,
                }));
            }
            tails += delta_pow * (w_power(p, lo - a) - w_power(p, hi - a)) * w_left;
        }
        let w_right = law.evaluate(snapped_ratio((v - ext_right).abs(), delta))?;
        if w_right > 0.0 {
            if hi >= b {
                return Ok(FunctionalValue::diverged(AdjacentActivation {
                    left_piece: i,
                    right_piece: n - 1,
                    jump: ext_right - v,
                }));
            }
            tails += delta_pow * (w_power(p, b - hi) - w_power(p, b - lo)) * w_right;
        }
    }
    Ok(FunctionalValue::exact(interior.value + tails))
}

/// Measure the bookkeeping constant between the window-extended energy of a
/// unit-spaced nondecreasing staircase and the simplex energy of its step
/// lengths: for random simplex points (and random window, level offset and
/// delta) the ratio must be a single constant, which is returned.
pub fn verify_p_identity(
    n: usize,
    lambdas: &[f64],
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_exponent(p)?;
    if n < 2 {
        return Err(Error::TooFewSteps { n, m: 1 });
    }
    if trials == 0 {
        return Err(Error::NonPositive {
            name: "trials",
            value: 0.0,
        });
    }
    let law = InteractionLaw::pca(lambdas.to_vec())?;

    let mut ratios = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = task_rng(seed, t as u64);
        let lengths = random_simplex(&mut rng, n);
        let delta = 10.0_f64.powf(rng.random_range(-2.0..0.0));
        let a = rng.random_range(-1.0..1.0);
        let width = rng.random_range(0.5..2.5);
        let base_level: i64 = rng.random_range(-3..4);

        let mut breakpoints = Vec::with_capacity(n - 1);
        let mut cursor = a;
        for len in lengths.iter().take(n - 1) {
            cursor += len * width;
            breakpoints.push(cursor);
        }
        let values: Vec<f64> = (0..n).map(|i| (base_level + i as i64) as f64 * delta).collect();
        let u = StepFunction::new(
            crate::funcs1d::Interval::new(a, a + width)?,
            breakpoints,
            values,
        )?;

        let hat = lambda_hat_exact(&law, &u, delta, p)?;
        let simplex_energy = crate::shape::p_value_on_lengths(lambdas, p, &lengths)?;
        ratios.push(hat.value * width.powf(p - 1.0) / (delta.powf(p) * simplex_energy));
    }

    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if (max - min).abs() > 1e-8 * mean.abs().max(1e-300) {
        return Err(Error::RatioNotConstant { min, max, trials });
    }
    Ok(mean)
}

/// Energy of a compactly supported continuous profile over the whole line,
/// via 2 delta^p int_0^inf t^{-1-p} [ int law(|u(x+t)-u(x)|/delta) dx ] dt.
///
/// The outer variable runs on a log grid starting at the first distance the
/// Lipschitz bound allows to be active; the constant far field beyond the
/// support diameter is integrated in closed form.
pub fn lambda_quadrature(
    law: &InteractionLaw,
    u: &dyn Profile1D,
    delta: f64,
    p: f64,
    opts: &EvaluationOptions,
) -> Result<FunctionalValue> {
    check_positive("delta", delta)?;
    check_exponent(p)?;
    check_positive("quadrature tolerance", opts.quadrature_tolerance)?;
    if !(opts.band_width_factor > 0.0 && opts.band_width_factor <= 1.0) {
        return Err(Error::NonPositive {
            name: "band width factor (need 0 < factor <= 1)",
            value: opts.band_width_factor,
        });
    }

    let first_growth = law.first_growth_point();
    if first_growth <= 0.0 && p >= 2.0 {
        return Err(Error::UnsupportedExponent { p, first_growth });
    }

    let support = u.support();
    let (s_lo, s_hi) = (support.lower(), support.upper());
    for boundary in [s_lo, s_hi] {
        let v = u.eval(boundary);
        if v.abs() > 1e-9 {
            return Err(Error::NotCompactlySupported { boundary_value: v });
        }
    }

    let lipschitz = u.lipschitz_bound();
    if lipschitz == 0.0 {
        return Ok(FunctionalValue {
            value: 0.0,
            method: EvalMethod::Quadrature,
            error_estimate: 0.0,
            divergence: None,
        });
    }

    let t_far = s_hi - s_lo;
    let inner_budget = (opts.max_subdivisions / 10).max(500);
    let inner_tol = opts.quadrature_tolerance * 0.1;
    let inner = |t: f64| {
        quad::integrate_split(
            |x| law.eval_nonneg((u.eval(x + t) - u.eval(x)).abs() / delta),
            s_lo - t,
            s_hi,
            1e-14 * t_far.max(1.0),
            inner_tol,
            inner_budget,
            16,
        )
        .value
    };

    // far field: once the shifted copies cannot overlap, the inner integral
    // freezes at twice the self interaction
    let self_interaction = quad::integrate_split(
        |x| law.eval_nonneg(u.eval(x).abs() / delta),
        s_lo,
        s_hi,
        1e-14 * t_far.max(1.0),
        inner_tol,
        inner_budget,
        16,
    );
    let far_field = 2.0 * self_interaction.value * t_far.powf(-p) / p;

    let t_min = opts.band_width_factor * first_growth * delta / lipschitz;
    let outer = if t_min > 0.0 && t_min < t_far {
        // log substitution: t = e^s
        quad::integrate_split(
            |s| {
                let t = s.exp();
                (-p * s).exp() * inner(t)
            },
            t_min.ln(),
            t_far.ln(),
            1e-14,
            opts.quadrature_tolerance,
            opts.max_subdivisions,
            8,
        )
    } else if t_min >= t_far {
        quad::QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        }
    } else {
        // law active near zero: t = tau^2 softens the endpoint
        quad::integrate_split(
            |tau| 2.0 * tau.powf(-1.0 - 2.0 * p) * inner(tau * tau),
            0.0,
            t_far.sqrt(),
            1e-14,
            opts.quadrature_tolerance,
            opts.max_subdivisions,
            8,
        )
    };

    let scale = 2.0 * delta.powf(p);
    let value = scale * (outer.value + far_field);
    let error_estimate =
        scale * outer.abs_error + value.abs() * inner_tol + scale * self_interaction.abs_error;
    if !outer.converged {
        return Err(Error::SubdivisionCap {
            partial: value,
            error_estimate,
            max_intervals: opts.max_subdivisions,
        });
    }
    Ok(FunctionalValue {
        value,
        method: EvalMethod::Quadrature,
        error_estimate,
        divergence: None,
    })
}

/// One row of a delta-schedule experiment.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub delta: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub target: f64,
    /// None when the limit target degenerates to zero.
    pub ratio: Option<f64>,
}

fn check_schedule(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::InvalidSchedule("empty delta schedule".into()));
    }
    for pair in deltas.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::InvalidSchedule(format!(
                "deltas must decrease: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidSchedule("deltas must be positive".into()));
    }
    Ok(())
}

/// Evaluate the energy along a decreasing delta schedule and report each
/// value against the small-delta limit prediction.
pub fn pointwise_limit_study(
    law: &InteractionLaw,
    u: &dyn Profile1D,
    p: f64,
    deltas: &[f64],
    opts: &EvaluationOptions,
) -> Result<Vec<StudyRow>> {
    check_schedule(deltas)?;
    let geometric = laws::geometric_constant(1, p, 1e-12)?;
    let scale = law.scale_factor(1e-10)?;
    let energy = u.limit_energy(p);
    let target = geometric * scale * energy;

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let fv = lambda_quadrature(law, u, delta, p, opts)?;
        let ratio = (target.is_finite() && target > 0.0).then(|| fv.value / target);
        rows.push(StudyRow {
            delta,
            value: fv.value,
            error_estimate: fv.error_estimate,
            target,
            ratio,
        });
    }
    Ok(rows)
}

/// Segment the profile at each delta and evaluate the segmented function
/// exactly over a padded window standing in for the whole line; the target
/// column still carries the pointwise-limit prediction, so the ratio exposes
/// the recovery-family constant.
pub fn recovery_study(
    law: &InteractionLaw,
    u: &PiecewiseAffine,
    p: f64,
    deltas: &[f64],
) -> Result<Vec<StudyRow>> {
    check_schedule(deltas)?;
    if !u.compact_support() {
        return Err(Error::NotCompactlySupported {
            boundary_value: u.node_values()[0],
        });
    }
    let geometric = laws::geometric_constant(1, p, 1e-12)?;
    let scale = law.scale_factor(1e-10)?;
    let target = geometric * scale * u.limit_energy(p);

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let segmented = u.segment_vertical(delta)?;
        let padded = pad_with_zero_tails(&segmented, 500.0)?;
        let fv = lambda_exact(law, &padded, delta, p)?;
        let ratio = (target.is_finite() && target > 0.0).then(|| fv.value / target);
        rows.push(StudyRow {
            delta,
            value: fv.value,
            error_estimate: fv.error_estimate,
            target,
            ratio,
        });
    }
    Ok(rows)
}

/// Embed a step function in a much wider window, extending by zero; the far
/// cutoff only discards O(pad^-p) of the line energy.
pub fn pad_with_zero_tails(u: &StepFunction, pad_factor: f64) -> Result<StepFunction> {
    let (a, b) = (u.domain().lower(), u.domain().upper());
    let pad = pad_factor * (b - a);
    let domain = crate::funcs1d::Interval::new(a - pad, b + pad)?;
    let mut breakpoints = Vec::with_capacity(u.breakpoints().len() + 2);
    breakpoints.push(a);
    breakpoints.extend_from_slice(u.breakpoints());
    breakpoints.push(b);
    let mut values = Vec::with_capacity(u.values().len() + 2);
    values.push(0.0);
    values.extend_from_slice(u.values());
    values.push(0.0);
    StepFunction::new(domain, breakpoints, values)
}
