//! Adaptive Gauss–Kronrod integration in one and two dimensions.
//!
//! Every analytic formula in the crate reduces to 1-D integrals over
//! `[0, ∞)` with a kink at the reference distance and a tail that decays
//! either exponentially (blockage) or like a power law (NLoS path loss).
//! The building blocks here are:
//!
//! * [`integrate`] / [`integrate_pieces`]: globally adaptive G10/K21 on a
//!   finite interval, optionally pre-split at breakpoints.
//! * [`integrate_semi_inf`]: `[a, ∞)` either by doubling windows that stop
//!   once the contributions become negligible, or by the algebraic map
//!   `x = a + s·u/(1-u)`.
//! * [`integrate_geometric`]: a finite interval walked in doubling windows,
//!   for integrands whose mass may sit anywhere on a very long interval.
//! * [`integrate_2d`]: iterated rule on a rectangle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae (positive half, descending), 21-point rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], …, XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Windows walked by the truncating tail rule before giving up.
const MAX_WINDOWS: usize = 400;

/// How `[a, ∞)` is reduced to finite work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailPolicy {
    /// Integrate `[a, a+w]`, `[a+w, a+3w]`, … (each window twice the last)
    /// until three consecutive windows are negligible against the running
    /// sum; the geometric remainder of the last windows is added to the
    /// error estimate.
    Truncate { initial_width: f64 },
    /// Map `x = a + scale·u/(1-u)` onto `u ∈ [0, 1)`.
    Transform { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Interval budget of one adaptive run.
    pub max_subdivisions: usize,
    /// Uniform pieces a finite interval is cut into before adapting.
    pub initial_pieces: usize,
    pub tail: TailPolicy,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 2000,
            initial_pieces: 1,
            tail: TailPolicy::Truncate { initial_width: 1.0 },
        }
    }
}

impl QuadSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_initial_pieces(mut self, n: usize) -> Self {
        self.initial_pieces = n.max(1);
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            err_estimate: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    fn absorb(&mut self, other: &QuadResult) {
        self.value += other.value;
        self.err_estimate += other.err_estimate;
        self.evaluations += other.evaluations;
        self.converged &= other.converged;
    }

    /// Converts a non-converged result into [`crate::Error::Quadrature`].
    pub fn require(self, what: &'static str) -> crate::Result<f64> {
        if self.converged && self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(crate::Error::Quadrature {
                what,
                value: self.value,
                err_estimate: self.err_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Ties broken on position keep the bisection order deterministic.
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Segment { a, b, value, err }
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// On return `converged` says whether the error estimate met
/// `max(abs_tol, rel_tol·|value|)` within `max_subdivisions` intervals;
/// the best estimate is returned either way.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> QuadResult {
    integrate_pieces(f, &[a, b], spec)
}

/// Like [`integrate`], with the interval pre-split at `points`
/// (ascending; the first and last are the integration limits). Each
/// piece is further cut into `spec.initial_pieces` uniform parts.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadSpec,
) -> QuadResult {
    assert!(points.len() >= 2, "need at least two points");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let n = spec.initial_pieces.max(1);
        let step = (hi - lo) / n as f64;
        for i in 0..n {
            let a = lo + step * i as f64;
            let b = if i + 1 == n { hi } else { lo + step * (i + 1) as f64 };
            heap.push(kronrod21(&mut f, a, b));
            evaluations += 21;
        }
    }
    if heap.is_empty() {
        return QuadResult::zero();
    }

    let mut value: f64 = heap.iter().map(|s| s.value).sum();
    let mut err: f64 = heap.iter().map(|s| s.err).sum();
    let mut converged = err <= spec.target(value);
    while !converged && heap.len() < spec.max_subdivisions {
        let worst = heap.pop().expect("heap not empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if err <= spec.target(value) {
            // Recompute from scratch to remove drift before accepting.
            value = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.err).sum();
            converged = err <= spec.target(value);
        }
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = neumaier_sum(segs.iter().map(|s| s.value));
    let err: f64 = segs.iter().map(|s| s.err).sum();
    QuadResult {
        value,
        err_estimate: err,
        evaluations,
        converged: err <= spec.target(value) && value.is_finite(),
    }
}

/// Integral over `[a, ∞)`, tail handled per `spec.tail`.
pub fn integrate_semi_inf<F: FnMut(f64) -> f64>(f: F, a: f64, spec: &QuadSpec) -> QuadResult {
    match spec.tail {
        TailPolicy::Truncate { initial_width } => windows(f, a, f64::INFINITY, initial_width, spec, true),
        TailPolicy::Transform { scale } => {
            let mut f = f;
            integrate(
                |u| {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let om = 1.0 - u;
                    let x = a + scale * u / om;
                    let v = f(x);
                    if v == 0.0 {
                        0.0
                    } else {
                        v * scale / (om * om)
                    }
                },
                0.0,
                1.0,
                spec,
            )
        }
    }
}

/// Integral over `[a, ∞)` with breakpoints. The finite part up to the
/// largest breakpoint is integrated piecewise, the remainder as a tail.
pub fn integrate_semi_inf_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    breaks: &[f64],
    spec: &QuadSpec,
) -> QuadResult {
    let mut pts = vec![a];
    let mut bs: Vec<f64> = breaks.iter().copied().filter(|&b| b > a && b.is_finite()).collect();
    bs.sort_by(f64::total_cmp);
    bs.dedup();
    pts.extend(bs);
    let last = *pts.last().unwrap();
    let mut total = QuadResult::zero();
    if pts.len() >= 2 {
        total.absorb(&integrate_pieces(&mut f, &pts, spec));
    }
    let tail = integrate_semi_inf(&mut f, last, spec);
    // The tail runs to a relative target of its own; the combined
    // convergence is judged against the whole integral.
    total.value += tail.value;
    total.err_estimate += tail.err_estimate;
    total.evaluations += tail.evaluations;
    total.converged = total.converged && tail.converged;
    total
}

/// Finite `[a, b]` walked in windows of doubling width starting at
/// `initial_width`, each integrated adaptively. Useful when `b - a` spans
/// many orders of magnitude more than the region carrying the mass.
pub fn integrate_geometric<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_width: f64,
    spec: &QuadSpec,
) -> QuadResult {
    if b <= a {
        return QuadResult::zero();
    }
    windows(f, a, b, initial_width, spec, false)
}

fn windows<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    end: f64,
    initial_width: f64,
    spec: &QuadSpec,
    may_stop_early: bool,
) -> QuadResult {
    let mut total = QuadResult::zero();
    let mut lo = a;
    let mut width = if initial_width > 0.0 { initial_width } else { 1.0 };
    let mut quiet = 0;
    let mut prev_abs = f64::NAN;
    let mut last_abs = 0.0;
    let mut ratio = 1.0;
    let mut values = Vec::new();
    for k in 0..MAX_WINDOWS {
        let hi = (lo + width).min(end);
        if !hi.is_finite() || hi <= lo {
            total.converged = false;
            break;
        }
        let r = integrate(&mut f, lo, hi, spec);
        values.push(r.value);
        total.err_estimate += r.err_estimate;
        total.evaluations += r.evaluations;
        total.converged &= r.converged;
        let running = neumaier_sum(values.iter().copied());
        last_abs = r.value.abs();
        if prev_abs.is_finite() && prev_abs > 0.0 {
            ratio = last_abs / prev_abs;
        }
        prev_abs = last_abs;
        if hi >= end {
            total.value = running;
            return total;
        }
        if may_stop_early {
            let negligible = last_abs <= 0.1 * spec.target(running);
            quiet = if negligible { quiet + 1 } else { 0 };
            if quiet >= 3 && (running != 0.0 || k >= 64) {
                total.value = running;
                let remainder = if ratio < 1.0 {
                    last_abs * ratio / (1.0 - ratio)
                } else {
                    last_abs
                };
                total.err_estimate += remainder;
                total.converged &= total.err_estimate <= spec.target(running).max(10.0 * spec.abs_tol);
                return total;
            }
        }
        lo = hi;
        width *= 2.0;
    }
    total.value = neumaier_sum(values.iter().copied());
    total.err_estimate += last_abs;
    total.converged = false;
    total
}

/// Iterated integral of `f(x, y)` over `[x0, x1] × [y0, y1]`. Inner
/// integrals run at a tenth of the outer relative tolerance.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    spec: &QuadSpec,
) -> QuadResult {
    let inner_spec = spec.with_rel_tol(spec.rel_tol * 0.1);
    let mut inner_evals = 0usize;
    let mut inner_ok = true;
    let mut inner_err_max: f64 = 0.0;
    let outer = integrate(
        |x| {
            let r = integrate(|y| f(x, y), y_range.0, y_range.1, &inner_spec);
            inner_evals += r.evaluations;
            inner_ok &= r.converged;
            inner_err_max = inner_err_max.max(r.err_estimate);
            r.value
        },
        x_range.0,
        x_range.1,
        spec,
    );
    let err = outer.err_estimate + inner_err_max * (x_range.1 - x_range.0).abs();
    QuadResult {
        value: outer.value,
        err_estimate: err,
        evaluations: inner_evals,
        converged: outer.converged && inner_ok,
    }
}

/// Compensated (Neumaier) summation; the result does not depend on how
/// large and small terms interleave, up to one rounding.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
