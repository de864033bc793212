//! Numerical integration: globally adaptive Gauss–Kronrod (7/15) for complex
//! integrands and composite rules on uniform samples.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
    /// ∫|f|, the scale against which cancellation is judged.
    pub l1: f64,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
    l1: f64,
}

fn gk15(f: &mut impl FnMut(f64) -> C64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        l1 += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
        l1: l1 * half.abs(),
    }
}

/// Adaptive integration of a complex integrand on `[a, b]`.
///
/// Converges when the summed error estimate is below
/// `max(rel_tol·|I|, abs_tol·∫|f|)`; the second term keeps strongly
/// oscillating integrals with near-zero value from being unattainable.
pub fn integrate(
    mut f: impl FnMut(f64) -> C64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Integral> {
    const MAX_SEGMENTS: usize = 2000;
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(gk15(&mut f, a, b));
    loop {
        let value: C64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let l1: f64 = segments.iter().map(|s| s.l1).sum();
        if error <= (rel_tol * value.norm()).max(abs_tol * l1) || error == 0.0 {
            return Ok(Integral { value, error, l1 });
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNonConvergence { a, b, error });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::QuadratureNonConvergence { a, b, error });
        }
        segments.push(gk15(&mut f, seg.a, mid));
        segments.push(gk15(&mut f, mid, seg.b));
    }
}

/// Composite Simpson rule on uniformly spaced samples; falls back to a
/// trapezoid on the last interval when the interval count is odd.
pub fn simpson(samples: &[C64], h: f64) -> C64 {
    let n = samples.len();
    match n {
        0 | 1 => C64::zero(),
        2 => (samples[0] + samples[1]) * (0.5 * h),
        _ => {
            let intervals = n - 1;
            let even = intervals - intervals % 2;
            let mut acc = samples[0] + samples[even];
            for (k, &s) in samples.iter().enumerate().take(even).skip(1) {
                acc += s * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let mut total = acc * (h / 3.0);
            if even < intervals {
                total += (samples[even] + samples[even + 1]) * (0.5 * h);
            }
            total
        }
    }
}

/// Trapezoid rule on uniformly spaced real samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (samples[0] + samples[n - 1]) + samples[1..n - 1].iter().sum::<f64>()),
    }
}

/// Trapezoid rule on uniformly spaced complex samples.
pub fn trapezoid_complex(samples: &[C64], h: f64) -> C64 {
    match samples.len() {
        0 | 1 => C64::zero(),
        n => (samples[0] * 0.5 + samples[n - 1] * 0.5 + samples[1..n - 1].iter().sum::<C64>()) * h,
    }
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid(samples: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in samples.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(samples.len());
    out
}
