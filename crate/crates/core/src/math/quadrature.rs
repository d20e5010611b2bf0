//! Adaptive Gauss–Kronrod (7/15) quadrature with graded subdivision towards 0
//! for integrands that are singular at the origin.

use std::cell::RefCell;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss
// weights (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Default relative tolerance of every integral in the crate.
pub const REL_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 4000;
const MAX_PANELS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: REL_TOL }
    }
}

impl Tolerance {
    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod panel on `[a, b]`; the error estimate comes from the
/// embedded 7-point Gauss rule.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Estimate {
    gk15_with_l1(f, a, b).0
}

/// [`gk15`] plus the Kronrod estimate of `∫|f|`, which sets the roundoff floor.
fn gk15_with_l1(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (Estimate, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let abs_half = half.abs();
    let est = Estimate {
        value: res_k * half,
        abs_err: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
    };
    (est, res_abs * abs_half)
}

/// Globally adaptive integration of `f` over `[a, b]`: the panel with the
/// largest error estimate is bisected until the summed estimate meets `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, abs_err: 0.0 });
    }
    let (first, l1) = gk15_with_l1(&f, a, b);
    // Errors below this are indistinguishable from cancellation roundoff.
    let floor = 100.0 * f64::EPSILON * l1;
    let mut panels = vec![(a, b, first)];
    let mut value = first.value;
    let mut err = first.abs_err;
    while err > tol.target(value).max(floor) {
        if !value.is_finite() || panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { a, b, abs_err: err });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.abs_err.total_cmp(&y.1 .2.abs_err))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, est) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            // Interval exhausted at machine precision; accept what we have.
            panels.push((lo, hi, est));
            break;
        }
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        value += left.value + right.value - est.value;
        err += left.abs_err + right.abs_err - est.abs_err;
        panels.push((lo, mid, left));
        panels.push((mid, hi, right));
        // The running sums drift; resum occasionally.
        if panels.len() % 64 == 0 {
            value = panels.iter().map(|p| p.2.value).sum();
            err = panels.iter().map(|p| p.2.abs_err).sum();
        }
    }
    let value = panels.iter().map(|p| p.2.value).sum();
    let abs_err = panels.iter().map(|p| p.2.abs_err).sum();
    Ok(Estimate { value, abs_err })
}

/// [`integrate`] for integrands that can fail; the first error wins.
pub fn try_integrate(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    let err = RefCell::new(None);
    let est = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => est,
    }
}

/// Integrates over `[0, b]` on geometric panels `[b 2^{-k-1}, b 2^{-k}]`,
/// which resolves integrable singularities at 0 such as `s^{-1/2}`.
///
/// Panel contributions of an integrable `f` eventually decay geometrically;
/// the series is truncated once a geometric tail estimate drops below the
/// tolerance. Contributions that stop decaying signal a non-integrable
/// singularity and yield [`Error::NonIntegrableModulus`].
pub fn integrate_from_zero(f: impl Fn(f64) -> f64, b: f64, tol: Tolerance, name: &str) -> Result<Estimate> {
    if b == 0.0 {
        return Ok(Estimate { value: 0.0, abs_err: 0.0 });
    }
    let mut value = 0.0;
    let mut abs_err = 0.0;
    let mut hi = b;
    let mut prev: Option<f64> = None;
    let mut stalled = 0usize;
    for _ in 0..MAX_PANELS {
        let lo = 0.5 * hi;
        let panel = integrate(&f, lo, hi, tol)?;
        value += panel.value;
        abs_err += panel.abs_err;
        let c = panel.value.abs();
        if let Some(p) = prev {
            if c == 0.0 && p == 0.0 {
                return Ok(Estimate { value, abs_err });
            }
            let ratio = if p > 0.0 { c / p } else { 0.0 };
            if ratio >= 1.0 - 1e-3 {
                stalled += 1;
                if stalled >= 20 {
                    return Err(Error::NonIntegrableModulus(name.to_string()));
                }
            } else {
                stalled = 0;
                let tail = c * ratio / (1.0 - ratio);
                if tail <= tol.target(value) {
                    abs_err += tail;
                    return Ok(Estimate { value: value + tail, abs_err });
                }
            }
        }
        if !value.is_finite() {
            return Err(Error::NonIntegrableModulus(name.to_string()));
        }
        prev = Some(c);
        hi = lo;
        if hi < f64::MIN_POSITIVE {
            break;
        }
    }
    Err(Error::NonIntegrableModulus(name.to_string()))
}
