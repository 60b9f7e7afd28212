//! Scalar numerics backing the valuation solver: adaptive Gauss-Kronrod
//! quadrature and bracketed bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_7,
    0.949_107_912_342_758_524_526_189_7,
    0.864_864_423_359_769_072_789_712_8,
    0.741_531_185_599_394_439_863_864_8,
    0.586_087_235_467_691_130_294_144_8,
    0.405_845_151_377_397_166_906_606_4,
    0.207_784_955_007_898_467_600_689_4,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_0,
    0.063_092_092_629_978_553_290_700_7,
    0.104_790_010_322_250_183_839_876_3,
    0.140_653_259_715_525_918_745_189_6,
    0.169_004_726_639_267_902_826_583_4,
    0.190_350_578_064_785_409_913_256_4,
    0.204_432_940_075_298_892_414_162_0,
    0.209_482_141_084_727_828_012_999_2,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_4,
    0.279_705_391_489_276_667_901_467_8,
    0.381_830_050_505_118_944_950_369_8,
    0.417_959_183_673_469_387_755_102_0,
];

/// One Gauss-Kronrod pass over [a, b]: returns (kronrod estimate, |k - g|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let fs = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fs;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fs;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

struct Segment {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
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
        self.err.total_cmp(&other.err)
    }
}

pub(crate) const MAX_REFINEMENTS: usize = 2_000;

/// Adaptive Gauss-Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`. Splits the worst segment until the summed error estimate
/// drops below `tol`, erroring out once the refinement budget is spent.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_budget(f, a, b, tol, MAX_REFINEMENTS)
}

pub(crate) fn integrate_with_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }

    let (value, err) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { err, a, b, value });
    let mut total_err = err;

    for _ in 0..budget {
        if total_err <= tol {
            break;
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        // Midpoint degenerate at f64 resolution: no further progress possible.
        if mid <= worst.a || mid >= worst.b {
            total_err += worst.err;
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total_err += le + re;
        heap.push(Segment {
            err: le,
            a: worst.a,
            b: mid,
            value: lv,
        });
        heap.push(Segment {
            err: re,
            a: mid,
            b: worst.b,
            value: rv,
        });
    }

    if total_err > tol {
        return Err(Error::QuadratureFailure {
            tolerance: tol,
            achieved: total_err,
            refinements: heap.len(),
        });
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Bisection for a nonincreasing function with f(lo) >= 0 >= f(hi).
///
/// Returns the lower bracket end once the bracket narrows to `xtol`, so the
/// result always satisfies f(result) >= 0.
pub(crate) fn bisect_nonincreasing<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(lo <= hi);
    for _ in 0..max_iter {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
