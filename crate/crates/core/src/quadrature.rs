//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate falls below `max(abs_tol, rel_tol * |I|)`.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae on [0, 1], descending; odd indices are the
// 10-point Gauss nodes.
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
    0.123_491_976_262_065_851_077_208_034_176_739,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0, max_intervals: 20_000 }
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::absolute(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss–Kronrod 10/21 pass over `[a, b]`: (Kronrod value, error estimate).
fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fvals = [(0.0, 0.0); 10];
    for (j, x) in XGK.iter().take(10).enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        fvals[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in fvals.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_pieces(f, &[a, b], 1, tol)
}

/// Integral over `[points[0], points.last()]`, with each segment between
/// consecutive breakpoints split into `pieces` equal panels before adapting.
pub fn integrate_pieces(
    f: impl Fn(f64) -> f64,
    points: &[f64],
    pieces: usize,
    tol: Tolerance,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let step = (hi - lo) / pieces.max(1) as f64;
        for k in 0..pieces.max(1) {
            let a = lo + step * k as f64;
            let b = if k + 1 == pieces.max(1) { hi } else { a + step };
            let (value, error) = gk21(&f, a, b);
            total += value;
            total_err += error;
            heap.push(Panel { a, b, value, error });
        }
    }
    while total_err > tol.target(total) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                estimate: total_err,
                tolerance: tol.target(total),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            return Err(Error::QuadratureNonConvergence {
                estimate: total_err,
                tolerance: tol.target(total),
            });
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated rounding from the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Estimate { value, error, intervals: heap.len() })
}

/// Integral over `[a, ∞)` via the map `x = a + t / (1 − t)`.
///
/// Suited to integrands that decay at least exponentially without strong
/// oscillation.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: Tolerance) -> Result<Estimate> {
    let mapped = |t: f64| {
        let s = 1.0 - t;
        let x = a + t / s;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (s * s)
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}

/// Cauchy principal value of `∫_lower^∞ g(ω) / (pole − ω) dω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalValue {
    pub value: f64,
    /// Difference between the results at excision `δ` and `δ/2`.
    pub halving_change: f64,
    pub excision: f64,
}

/// Principal value by symmetric excision around the pole.
///
/// On `[lower, 2·pole − lower]` the constant `g(pole)` is subtracted so the
/// integrand is bounded; the excised core `[pole − δ, pole + δ]` contributes
/// `−2δ g'(pole)` to third order in `δ`. The computation is repeated at `δ/2`
/// and must agree within `tol.abs` (or `tol.rel` relative).
pub fn principal_value(
    g: impl Fn(f64) -> f64,
    pole: f64,
    lower: f64,
    excision: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<PrincipalValue> {
    let reach = pole - lower;
    if reach <= 0.0 || excision <= 0.0 || excision >= reach {
        return Err(crate::error::invalid(
            "excision",
            format!("need 0 < excision < pole - lower, got {excision} for reach {reach}"),
        ));
    }
    let upper = pole + reach;
    let g0 = g(pole);
    let inner_tol = Tolerance { abs: tol.abs * 1e-2, rel: tol.rel * 1e-2, ..tol };

    let eval = |delta: f64| -> Result<f64> {
        let subtracted = |w: f64| (g(w) - g0) / (pole - w);
        let mut left = vec![lower];
        let mut right = vec![pole + delta];
        for &p in breakpoints {
            if p > lower && p < pole - delta {
                left.push(p);
            } else if p > pole + delta && p < upper {
                right.push(p);
            }
        }
        left.push(pole - delta);
        right.push(upper);
        left.sort_by(f64::total_cmp);
        right.sort_by(f64::total_cmp);
        let near = integrate_pieces(&subtracted, &left, 4, inner_tol)?.value
            + integrate_pieces(&subtracted, &right, 4, inner_tol)?.value;
        let h = 0.5 * delta;
        let slope = (g(pole + h) - g(pole - h)) / (2.0 * h);
        Ok(near - 2.0 * delta * slope)
    };

    let coarse = eval(excision)?;
    let fine = eval(0.5 * excision)?;
    let change = (fine - coarse).abs();
    let target = tol.target(fine);
    if change > target {
        return Err(Error::QuadratureNonConvergence { estimate: change, tolerance: target });
    }

    let mut tail_points = vec![upper];
    tail_points.extend(breakpoints.iter().copied().filter(|&p| p > upper));
    tail_points.sort_by(f64::total_cmp);
    let far = |w: f64| g(w) / (pole - w);
    let last = *tail_points.last().unwrap_or(&upper);
    let bounded = if tail_points.len() > 1 {
        integrate_pieces(&far, &tail_points, 4, inner_tol)?.value
    } else {
        0.0
    };
    let tail = integrate_to_infinity(&far, last, inner_tol)?.value;

    Ok(PrincipalValue { value: fine + bounded + tail, halving_change: change, excision })
}
