//! One-dimensional function calculus: step functions with finite image,
//! piecewise affine approximants, smooth profiles, vertical segmentation,
//! monotone rearrangement, essential oscillation, limit energies and
//! mollification.
//!
//! Step functions are normalized on construction: adjacent pieces with equal
//! values are merged, so every function has a unique representation and
//! equality is meaningful.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Open bounded interval (lower, upper) with positive length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub struct Interval {
    lower: f64,
    upper: f64,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
struct RawInterval {
    lower: f64,
    upper: f64,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;
    fn try_from(raw: RawInterval) -> Result<Self> {
        Interval::new(raw.lower, raw.upper)
    }
}

impl From<Interval> for RawInterval {
    fn from(i: Interval) -> Self {
        RawInterval {
            lower: i.lower,
            upper: i.upper,
        }
    }
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Overlap with `other`, when it has positive length.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lower.max(other.lower);
        let hi = self.upper.min(other.upper);
        (lo < hi).then(|| Interval { lower: lo, upper: hi })
    }
}

/// Measurable function with finite image: constant values between
/// breakpoints interior to the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction", into = "RawStepFunction")]
pub struct StepFunction {
    domain: Interval,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct RawStepFunction {
    domain: Interval,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStepFunction> for StepFunction {
    type Error = Error;
    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction::new(raw.domain, raw.breakpoints, raw.values)
    }
}

impl From<StepFunction> for RawStepFunction {
    fn from(u: StepFunction) -> Self {
        RawStepFunction {
            domain: u.domain,
            breakpoints: u.breakpoints,
            values: u.values,
        }
    }
}

impl StepFunction {
    pub fn new(domain: Interval, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("non-finite value".into()));
        }
        for pair in breakpoints.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidStepFunction(format!(
                    "breakpoints not strictly increasing: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let (Some(first), Some(last)) = (breakpoints.first(), breakpoints.last()) {
            if *first <= domain.lower() || *last >= domain.upper() {
                return Err(Error::InvalidStepFunction(
                    "breakpoints must be interior to the domain".into(),
                ));
            }
        }
        // normalization: merge adjacent pieces carrying the same value
        let mut merged_bp = Vec::with_capacity(breakpoints.len());
        let mut merged_vals = Vec::with_capacity(values.len());
        merged_vals.push(values[0]);
        for (bp, v) in breakpoints.iter().zip(values.iter().skip(1)) {
            if *v == *merged_vals.last().expect("nonempty") {
                continue;
            }
            merged_bp.push(*bp);
            merged_vals.push(*v);
        }
        Ok(Self {
            domain,
            breakpoints: merged_bp,
            values: merged_vals,
        })
    }

    pub fn constant(domain: Interval, value: f64) -> Result<Self> {
        Self::new(domain, Vec::new(), vec![value])
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    /// Bounds and value of piece `i` (pieces are indexed left to right).
    pub fn piece(&self, i: usize) -> (f64, f64, f64) {
        let lo = if i == 0 {
            self.domain.lower()
        } else {
            self.breakpoints[i - 1]
        };
        let hi = if i == self.values.len() - 1 {
            self.domain.upper()
        } else {
            self.breakpoints[i]
        };
        (lo, hi, self.values[i])
    }

    pub fn min_piece_length(&self) -> f64 {
        (0..self.num_pieces())
            .map(|i| {
                let (lo, hi, _) = self.piece(i);
                hi - lo
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Value at `x`, extended constantly outside the domain; at a breakpoint
    /// the piece on the right wins.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        self.values[idx]
    }

    /// Pointwise flooring to the grid delta * Z.
    pub fn segment_vertical(&self, delta: f64) -> Result<StepFunction> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::NonPositive {
                name: "delta",
                value: delta,
            });
        }
        let values = self
            .values
            .iter()
            .map(|v| delta * (v / delta).floor())
            .collect();
        Self::new(self.domain, self.breakpoints.clone(), values)
    }

    /// Nondecreasing function on the same domain whose level sets keep their
    /// measures.
    pub fn rearrange_nondecreasing(&self) -> StepFunction {
        let mut pieces: Vec<(f64, f64)> = (0..self.num_pieces())
            .map(|i| {
                let (lo, hi, v) = self.piece(i);
                (v, hi - lo)
            })
            .collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut breakpoints = Vec::with_capacity(pieces.len().saturating_sub(1));
        let mut values = Vec::with_capacity(pieces.len());
        let mut cursor = self.domain.lower();
        for (idx, (v, len)) in pieces.iter().enumerate() {
            values.push(*v);
            if idx + 1 < pieces.len() {
                cursor += len;
                breakpoints.push(cursor);
            }
        }
        Self::new(self.domain, breakpoints, values)
            .expect("rearranged pieces keep positive lengths")
    }

    /// Essential sup minus essential inf over `window` (intersected with the
    /// domain); only pieces meeting the window in positive measure count.
    pub fn essential_oscillation(&self, window: Interval) -> Result<f64> {
        let overlap = self
            .domain
            .intersect(&window)
            .ok_or(Error::EmptyWindow {
                lower: window.lower(),
                upper: window.upper(),
            })?;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.num_pieces() {
            let (lo, hi, v) = self.piece(i);
            if lo.max(overlap.lower()) < hi.min(overlap.upper()) {
                min = min.min(v);
                max = max.max(v);
            }
        }
        Ok(max - min)
    }

    /// Total variation for p = 1; for p > 1 a non-constant step function has
    /// infinite energy.
    pub fn limit_energy(&self, p: f64) -> f64 {
        debug_assert!(p >= 1.0);
        if p == 1.0 {
            self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
        } else if self.num_pieces() == 1 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Multiply every value by `factor`.
    pub fn scale_values(&self, factor: f64) -> StepFunction {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::new(self.domain, self.breakpoints.clone(), values)
            .expect("scaling preserves the piece structure")
    }

    /// Convolution with the standard compactly supported bump kernel of
    /// radius `epsilon`, the function being extended constantly outside its
    /// domain. Requires `epsilon` below half the minimal piece length, so
    /// each transition is resolved separately.
    pub fn mollify(&self, epsilon: f64) -> Result<SmoothFunction> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::NonPositive {
                name: "epsilon",
                value: epsilon,
            });
        }
        let min_piece = self.min_piece_length();
        if epsilon >= 0.5 * min_piece {
            return Err(Error::MollifierTooWide {
                epsilon,
                min_piece,
            });
        }
        let kernel = mollifier_table();
        let base = self.values[0];
        let jumps: Arc<Vec<(f64, f64)>> = Arc::new(
            self.breakpoints
                .iter()
                .zip(self.values.windows(2))
                .map(|(t, vs)| (*t, vs[1] - vs[0]))
                .collect(),
        );
        let jumps_d = Arc::clone(&jumps);
        let eval = move |x: f64| {
            base + jumps
                .iter()
                .map(|(t, jump)| jump * kernel.cdf((x - t) / epsilon))
                .sum::<f64>()
        };
        let derivative = move |x: f64| {
            jumps_d
                .iter()
                .map(|(t, jump)| jump * kernel.pdf((x - t) / epsilon) / epsilon)
                .sum::<f64>()
        };
        let support = Interval::new(self.domain.lower() - epsilon, self.domain.upper() + epsilon)?;
        Ok(SmoothFunction::new(eval, derivative, support))
    }
}

/// Continuous function given by straight segments between nodes, extended
/// constantly outside; `compact_support` pins both end values to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    nodes: Vec<f64>,
    node_values: Vec<f64>,
    compact_support: bool,
}

impl PiecewiseAffine {
    pub fn new(nodes: Vec<f64>, node_values: Vec<f64>, compact_support: bool) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != node_values.len() {
            return Err(Error::InvalidPiecewiseAffine(format!(
                "need matching nodes/values with at least two nodes, got {}/{}",
                nodes.len(),
                node_values.len()
            )));
        }
        if nodes.iter().chain(node_values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidPiecewiseAffine("non-finite data".into()));
        }
        for pair in nodes.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidPiecewiseAffine(
                    "nodes not strictly increasing".into(),
                ));
            }
        }
        if compact_support
            && (node_values[0] != 0.0 || *node_values.last().expect("nonempty") != 0.0)
        {
            return Err(Error::InvalidPiecewiseAffine(
                "compact support requires zero end values".into(),
            ));
        }
        Ok(Self {
            nodes,
            node_values,
            compact_support,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn compact_support(&self) -> bool {
        self.compact_support
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.nodes[0], *self.nodes.last().expect("nonempty"))
            .expect("nodes are strictly increasing")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.nodes[0] {
            return self.node_values[0];
        }
        let last = self.nodes.len() - 1;
        if x >= self.nodes[last] {
            return self.node_values[last];
        }
        let seg = self.nodes.partition_point(|n| *n <= x) - 1;
        let t = (x - self.nodes[seg]) / (self.nodes[seg + 1] - self.nodes[seg]);
        self.node_values[seg] + t * (self.node_values[seg + 1] - self.node_values[seg])
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.segment_slopes()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    fn segment_slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).zip(self.node_values.windows(2)).map(
            |(xs, ys)| (ys[1] - ys[0]) / (xs[1] - xs[0]),
        )
    }

    /// Sup minus inf over the window (the function is continuous, so the
    /// essential bounds are attained at nodes or window endpoints).
    pub fn essential_oscillation(&self, window: Interval) -> Result<f64> {
        let overlap = self
            .domain()
            .intersect(&window)
            .ok_or(Error::EmptyWindow {
                lower: window.lower(),
                upper: window.upper(),
            })?;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut consider = |v: f64| {
            min = min.min(v);
            max = max.max(v);
        };
        consider(self.eval(overlap.lower()));
        consider(self.eval(overlap.upper()));
        for (n, v) in self.nodes.iter().zip(self.node_values.iter()) {
            if *n > overlap.lower() && *n < overlap.upper() {
                consider(*v);
            }
        }
        Ok(max - min)
    }

    /// Integral of |u'|^p: total variation at p = 1.
    pub fn limit_energy(&self, p: f64) -> f64 {
        debug_assert!(p >= 1.0);
        self.nodes
            .windows(2)
            .zip(self.node_values.windows(2))
            .map(|(xs, ys)| {
                let len = xs[1] - xs[0];
                let slope = (ys[1] - ys[0]) / len;
                slope.abs().powf(p) * len
            })
            .sum()
    }

    /// Vertical segmentation with exact level-crossing solves, so every jump
    /// of the result has magnitude exactly delta.
    pub fn segment_vertical(&self, delta: f64) -> Result<StepFunction> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::NonPositive {
                name: "delta",
                value: delta,
            });
        }
        let mut cuts: Vec<f64> = Vec::new();
        for (xs, ys) in self.nodes.windows(2).zip(self.node_values.windows(2)) {
            let (x0, x1, y0, y1) = (xs[0], xs[1], ys[0], ys[1]);
            if y0 == y1 {
                continue;
            }
            let slope = (y1 - y0) / (x1 - x0);
            let (lo_level, hi_level) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            let k_min = (lo_level / delta).floor() as i64 + 1;
            let k_max = (hi_level / delta).floor() as i64;
            for k in k_min..=k_max {
                let x = x0 + (k as f64 * delta - y0) / slope;
                if x > x0 && x < x1 {
                    cuts.push(x);
                }
            }
        }
        let domain = self.domain();
        let mut boundaries = Vec::with_capacity(cuts.len() + self.nodes.len());
        boundaries.extend_from_slice(&self.nodes);
        boundaries.extend_from_slice(&cuts);
        boundaries.sort_by(f64::total_cmp);
        boundaries.dedup();
        build_floor_step(domain, &boundaries, delta, |x| self.eval(x))
    }
}

/// Continuously differentiable profile given by evaluator and derivative
/// closures on a bounded support interval.
#[derive(Clone)]
pub struct SmoothFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Interval,
}

impl SmoothFunction {
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Interval,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            derivative: Arc::new(derivative),
            support,
        }
    }

    /// The C^1 profile (1 - x^2)^2 on [-1, 1], zero outside.
    pub fn quartic_bump() -> Self {
        Self::new(
            |x: f64| {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    let s = 1.0 - x * x;
                    s * s
                }
            },
            |x: f64| {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    -4.0 * x * (1.0 - x * x)
                }
            },
            Interval::new(-1.0, 1.0).expect("static bounds"),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    /// Sampled bound on |u'| over the support, padded by 1%.
    pub fn lipschitz_bound(&self) -> f64 {
        let n = 4096;
        let (a, b) = (self.support.lower(), self.support.upper());
        let mut max = 0.0_f64;
        for i in 0..=n {
            let x = a + (b - a) * i as f64 / n as f64;
            max = max.max(self.derivative(x).abs());
        }
        max * 1.01
    }

    /// Integral of |u'|^p over the support.
    pub fn limit_energy(&self, p: f64) -> f64 {
        debug_assert!(p >= 1.0);
        let d = Arc::clone(&self.derivative);
        quad::integrate_auto(
            move |x| d(x).abs().powf(p),
            self.support.lower(),
            self.support.upper(),
            1e-11,
        )
        .value
    }

    /// Vertical segmentation: monotone spans are located through derivative
    /// sign changes and each level crossing is solved by bisection.
    pub fn segment_vertical(&self, delta: f64) -> Result<StepFunction> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::NonPositive {
                name: "delta",
                value: delta,
            });
        }
        let (a, b) = (self.support.lower(), self.support.upper());
        let n = 4096;
        let grid: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        for &x in &grid {
            let v = self.eval(x);
            if !v.is_finite() || v.abs() > 1e12 {
                return Err(Error::UnboundedImage { x, value: v });
            }
        }

        // critical points from derivative sign changes
        let mut marks = vec![a];
        for w in grid.windows(2) {
            let (d0, d1) = (self.derivative(w[0]), self.derivative(w[1]));
            if d0 == 0.0 || d0.signum() == d1.signum() {
                continue;
            }
            let root = bisect(|x| self.derivative(x), w[0], w[1]);
            marks.push(root);
        }
        marks.push(b);
        marks.sort_by(f64::total_cmp);
        marks.dedup();

        // level crossings inside each monotone span
        let mut boundaries = marks.clone();
        for w in marks.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let (y0, y1) = (self.eval(x0), self.eval(x1));
            if y0 == y1 {
                continue;
            }
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            let k_min = (lo / delta).floor() as i64 + 1;
            let k_max = (hi / delta).floor() as i64;
            for k in k_min..=k_max {
                let level = k as f64 * delta;
                let x = bisect(|x| self.eval(x) - level, x0, x1);
                if x > x0 && x < x1 {
                    boundaries.push(x);
                }
            }
        }
        boundaries.sort_by(f64::total_cmp);
        boundaries.dedup();
        let domain = Interval::new(a, b)?;
        build_floor_step(domain, &boundaries, delta, |x| self.eval(x))
    }
}

impl std::fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothFunction(support [{}, {}])", self.support.lower(), self.support.upper())
    }
}

/// Step function whose value on each cell is the floored midpoint value.
fn build_floor_step(
    domain: Interval,
    boundaries: &[f64],
    delta: f64,
    eval: impl Fn(f64) -> f64,
) -> Result<StepFunction> {
    let mut edges: Vec<f64> = boundaries
        .iter()
        .copied()
        .filter(|x| *x > domain.lower() && *x < domain.upper())
        .collect();
    edges.dedup();
    let mut values = Vec::with_capacity(edges.len() + 1);
    let mut lo = domain.lower();
    for idx in 0..=edges.len() {
        let hi = if idx < edges.len() {
            edges[idx]
        } else {
            domain.upper()
        };
        let mid = 0.5 * (lo + hi);
        values.push(delta * (eval(mid) / delta).floor());
        lo = hi;
    }
    StepFunction::new(domain, edges, values)
}

/// Root of a continuous function with a sign change on [lo, hi].
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Compactly supported profile usable by the singular-kernel quadrature:
/// pointwise values, a support interval outside which the function vanishes,
/// a Lipschitz bound and the limit energy.
pub trait Profile1D: Sync {
    fn eval(&self, x: f64) -> f64;
    fn support(&self) -> Interval;
    fn lipschitz_bound(&self) -> f64;
    fn limit_energy(&self, p: f64) -> f64;
}

impl Profile1D for SmoothFunction {
    fn eval(&self, x: f64) -> f64 {
        SmoothFunction::eval(self, x)
    }
    fn support(&self) -> Interval {
        self.support
    }
    fn lipschitz_bound(&self) -> f64 {
        SmoothFunction::lipschitz_bound(self)
    }
    fn limit_energy(&self, p: f64) -> f64 {
        SmoothFunction::limit_energy(self, p)
    }
}

impl Profile1D for PiecewiseAffine {
    fn eval(&self, x: f64) -> f64 {
        PiecewiseAffine::eval(self, x)
    }
    fn support(&self) -> Interval {
        self.domain()
    }
    fn lipschitz_bound(&self) -> f64 {
        PiecewiseAffine::lipschitz_bound(self)
    }
    fn limit_energy(&self, p: f64) -> f64 {
        PiecewiseAffine::limit_energy(self, p)
    }
}

/// Normalized bump kernel exp(-1/(1-s^2)) on (-1, 1) with its cumulative
/// integral tabulated once; values in between come from cubic Hermite
/// interpolation, whose derivative stays consistent with the density.
struct MollifierTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    density: Vec<f64>,
    normalization: f64,
}

fn bump_raw(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl MollifierTable {
    fn build() -> Self {
        let n = 2048;
        let nodes: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let mut raw_cdf = vec![0.0_f64; n + 1];
        for i in 0..n {
            let panel = quad::integrate(bump_raw, nodes[i], nodes[i + 1], 1e-16, 1e-13, 64);
            raw_cdf[i + 1] = raw_cdf[i] + panel.value;
        }
        let total = raw_cdf[n];
        let normalization = 1.0 / total;
        let cdf = raw_cdf.iter().map(|c| c / total).collect();
        let density = nodes.iter().map(|s| bump_raw(*s) / total).collect();
        Self {
            nodes,
            cdf,
            density,
            normalization,
        }
    }

    fn pdf(&self, s: f64) -> f64 {
        bump_raw(s) * self.normalization
    }

    fn cdf(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let n = self.nodes.len() - 1;
        let pos = (s + 1.0) * 0.5 * n as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let h = self.nodes[i + 1] - self.nodes[i];
        let t = (s - self.nodes[i]) / h;
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.density[i] * h, self.density[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        c0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + c1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }
}

fn mollifier_table() -> &'static MollifierTable {
    static TABLE: OnceLock<MollifierTable> = OnceLock::new();
    TABLE.get_or_init(MollifierTable::build)
}
