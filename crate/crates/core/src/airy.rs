//! Real-argument Airy functions and the caustic recovery factor.
//!
//! Values on `|x| <= 100` are produced from three ingredients:
//!
//! * exact initial data at the origin, propagated with Taylor steps of the
//!   Airy equation `y'' = x y` on `[-10, 0]` (both solutions) and on
//!   `[0, 8]` for `Bi` (forward, the growing direction);
//! * the large-argument asymptotic series for `x >= 8` and `x <= -10`;
//! * backward Taylor steps from `x = 8` for `Ai` on `(0, 8)`, which is the
//!   stable direction for the recessive solution.
//!
//! For `x > 0` the exponentially scaled functions `e^{ζ} Ai(x)` and
//! `e^{-ζ} Bi(x)`, `ζ = (2/3) x^{3/2}`, are available without range limit.

use core::f64::consts::PI;

use crate::error::{CausticaError, Result};
// inherent f64 math is std-only; under no_std it comes from libm
#[allow(unused_imports)]
use num_traits::Float;

const AI0: f64 = 0.355_028_053_887_817_239_26;
const AIP0: f64 = -0.258_819_403_792_806_798_41;
const BI0: f64 = 0.614_926_627_446_000_735_15;
const BIP0: f64 = 0.448_288_357_353_826_357_91;

const POS_ASYMPTOTIC: f64 = 8.0;
const NEG_ASYMPTOTIC: f64 = -10.0;
const MAX_ABS_ARG: f64 = 100.0;
const TAYLOR_STEP: f64 = 0.5;

/// The Airy-type solution selected by an integration contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AirySolution {
    /// Standard `Ai`, decaying for positive argument.
    Recessive,
    /// Standard `Bi`, growing for positive argument.
    Dominant,
}

/// Which solution a formula should use.
///
/// `ContourSelected` stands for "whatever the original contour selects"; it has
/// to be pinned to a concrete solution before it can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AiryKind {
    #[default]
    Recessive,
    Dominant,
    ContourSelected(Option<AirySolution>),
}

impl AiryKind {
    pub fn resolve(self) -> Result<AirySolution> {
        match self {
            AiryKind::Recessive | AiryKind::ContourSelected(Some(AirySolution::Recessive)) => {
                Ok(AirySolution::Recessive)
            }
            AiryKind::Dominant | AiryKind::ContourSelected(Some(AirySolution::Dominant)) => {
                Ok(AirySolution::Dominant)
            }
            AiryKind::ContourSelected(None) => Err(CausticaError::BadParameter(
                "ContourSelected airy kind must be resolved to Recessive or Dominant".into(),
            )),
        }
    }
}

impl From<AirySolution> for AiryKind {
    fn from(s: AirySolution) -> Self {
        match s {
            AirySolution::Recessive => AiryKind::Recessive,
            AirySolution::Dominant => AiryKind::Dominant,
        }
    }
}

/// Function values and first derivatives of both solutions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

#[inline]
fn zeta_of(x: f64) -> f64 {
    2.0 / 3.0 * x.abs().powf(1.5)
}

/// One Taylor step of `y'' = x y` from `x0` to `x0 + h`.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // a_{k+2} (k+2)(k+1) = x0 a_k + a_{k-1}
    let mut a_km1 = y;
    let mut a_k = yp;
    let mut a_kp1 = 0.5 * x0 * y;
    let mut val = y + yp * h + a_kp1 * h * h;
    let mut der = yp + 2.0 * a_kp1 * h;
    let mut hp = h * h; // h^(k+1) for the current a_kp1 with k = 1
    let scale = y.abs() + yp.abs() + f64::MIN_POSITIVE;
    for k in 1..120 {
        let next = (x0 * a_k + a_km1) / (((k + 2) * (k + 1)) as f64);
        let hk = hp * h;
        let term = next * hk;
        val += term;
        der += ((k + 2) as f64) * next * hp;
        a_km1 = a_k;
        a_k = a_kp1;
        a_kp1 = next;
        hp = hk;
        if k > 4 && term.abs() < 1e-18 * scale && (a_k * hp / h).abs() < 1e-18 * scale {
            break;
        }
    }
    (val, der)
}

fn propagate(mut x: f64, mut y: f64, mut yp: f64, target: f64) -> (f64, f64) {
    while (target - x).abs() > 0.0 {
        let remaining = target - x;
        let h = if remaining.abs() > TAYLOR_STEP {
            TAYLOR_STEP.copysign(remaining)
        } else {
            remaining
        };
        let (ny, nyp) = taylor_step(x, y, yp, h);
        y = ny;
        yp = nyp;
        x = if remaining.abs() > TAYLOR_STEP { x + h } else { target };
    }
    (y, yp)
}

/// Sums `Σ sign^k c_k / ζ^k` for the coefficient stream `c`, stopping at the
/// smallest term. Returns the sum and the magnitude of the first omitted term.
fn asymptotic_sum(coeffs: &[f64], zeta: f64, alternate: bool, stride: usize, offset: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = offset;
    while k < coeffs.len() {
        let term = sign * coeffs[k] / zeta.powi(k as i32);
        if term.abs() > last {
            return (sum, last);
        }
        sum += term;
        last = term.abs();
        if last < 1e-18 * sum.abs() {
            return (sum, last);
        }
        if alternate {
            sign = -sign;
        }
        k += stride;
    }
    (sum, last)
}

const N_COEFF: usize = 40;

fn u_coeffs() -> [f64; N_COEFF] {
    let mut u = [0.0; N_COEFF];
    u[0] = 1.0;
    for k in 1..N_COEFF {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
    }
    u
}

fn v_coeffs(u: &[f64; N_COEFF]) -> [f64; N_COEFF] {
    let mut v = [0.0; N_COEFF];
    for k in 0..N_COEFF {
        let kf = k as f64;
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    v
}

/// Exponentially scaled values for `x >= POS_ASYMPTOTIC`:
/// `e^{ζ}Ai, e^{ζ}Ai', e^{-ζ}Bi, e^{-ζ}Bi'`.
fn positive_asymptotic(x: f64) -> AiryValues {
    let u = u_coeffs();
    let v = v_coeffs(&u);
    let z = zeta_of(x);
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    let (sa, _) = asymptotic_sum(&u, z, true, 1, 0);
    let (ta, _) = asymptotic_sum(&v, z, true, 1, 0);
    let (sb, _) = asymptotic_sum(&u, z, false, 1, 0);
    let (tb, _) = asymptotic_sum(&v, z, false, 1, 0);
    AiryValues {
        ai: sa / (2.0 * sp * q),
        aip: -q * ta / (2.0 * sp),
        bi: sb / (sp * q),
        bip: q * tb / sp,
    }
}

fn negative_asymptotic(x: f64) -> AiryValues {
    let u = u_coeffs();
    let v = v_coeffs(&u);
    let y = -x;
    let z = zeta_of(y);
    let q = y.powf(0.25);
    let sp = PI.sqrt();
    let phase = z - PI / 4.0;
    let (c, s) = (phase.cos(), phase.sin());
    let (ue, _) = asymptotic_sum(&u, z, true, 2, 0);
    let (uo, _) = asymptotic_sum(&u, z, true, 2, 1);
    let (ve, _) = asymptotic_sum(&v, z, true, 2, 0);
    let (vo, _) = asymptotic_sum(&v, z, true, 2, 1);
    // odd-index sums start at ζ^{-1}; asymptotic_sum alternates per stride step
    AiryValues {
        ai: (c * ue + s * uo) / (sp * q),
        aip: q * (s * ve - c * vo) / sp,
        bi: (-s * ue + c * uo) / (sp * q),
        bip: q * (c * ve + s * vo) / sp,
    }
}

/// Unscaled values of both solutions and their derivatives, `|x| <= 100`.
pub fn airy_values(x: f64) -> Result<AiryValues> {
    if !x.is_finite() || x.abs() > MAX_ABS_ARG {
        return Err(CausticaError::OutOfRange(x));
    }
    if x >= POS_ASYMPTOTIC {
        let s = positive_asymptotic(x);
        let e = zeta_of(x).exp();
        return Ok(AiryValues {
            ai: s.ai / e,
            aip: s.aip / e,
            bi: s.bi * e,
            bip: s.bip * e,
        });
    }
    if x <= NEG_ASYMPTOTIC {
        return Ok(negative_asymptotic(x));
    }
    if x <= 0.0 {
        let (ai, aip) = propagate(0.0, AI0, AIP0, x);
        let (bi, bip) = propagate(0.0, BI0, BIP0, x);
        return Ok(AiryValues { ai, aip, bi, bip });
    }
    let s = scaled_positive(x);
    let e = zeta_of(x).exp();
    Ok(AiryValues {
        ai: s.ai / e,
        aip: s.aip / e,
        bi: s.bi * e,
        bip: s.bip * e,
    })
}

/// Scaled values on `x > 0`: `e^{ζ}Ai, e^{ζ}Ai', e^{-ζ}Bi, e^{-ζ}Bi'`.
fn scaled_positive(x: f64) -> AiryValues {
    if x >= POS_ASYMPTOTIC {
        return positive_asymptotic(x);
    }
    let start = positive_asymptotic(POS_ASYMPTOTIC);
    let e8 = zeta_of(POS_ASYMPTOTIC).exp();
    let (ai, aip) = propagate(POS_ASYMPTOTIC, start.ai / e8, start.aip / e8, x);
    let (bi, bip) = propagate(0.0, BI0, BIP0, x);
    let e = zeta_of(x).exp();
    AiryValues {
        ai: ai * e,
        aip: aip * e,
        bi: bi / e,
        bip: bip / e,
    }
}

/// Standard recessive Airy function `Ai(x)`, `|x| <= 100`.
pub fn airy_ai(x: f64) -> Result<f64> {
    airy_values(x).map(|v| v.ai)
}

/// Standard dominant Airy function `Bi(x)`, `|x| <= 100`.
pub fn airy_bi(x: f64) -> Result<f64> {
    airy_values(x).map(|v| v.bi)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    airy_values(x).map(|v| v.aip)
}

pub fn airy_bi_prime(x: f64) -> Result<f64> {
    airy_values(x).map(|v| v.bip)
}

/// `e^{(2/3)x^{3/2}} Ai(x)` for `x >= 0`.
pub fn airy_ai_scaled(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(CausticaError::OutOfRange(x));
    }
    if x == 0.0 {
        return Ok(AI0);
    }
    Ok(scaled_positive(x).ai)
}

/// `e^{-(2/3)x^{3/2}} Bi(x)` for `x >= 0`.
pub fn airy_bi_scaled(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(CausticaError::OutOfRange(x));
    }
    if x == 0.0 {
        return Ok(BI0);
    }
    Ok(scaled_positive(x).bi)
}

/// Evaluates the chosen solution as `mantissa * e^{log_scale}`.
///
/// For positive arguments the exponential `e^{∓(2/3)x^{3/2}}` is split off
/// into `log_scale`, so callers can fold it into other exponents.
pub fn airy_log_split(solution: AirySolution, x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        let e = zeta_of(x);
        match solution {
            AirySolution::Recessive => Ok((airy_ai_scaled(x)?, -e)),
            AirySolution::Dominant => Ok((airy_bi_scaled(x)?, e)),
        }
    } else {
        let v = airy_values(x)?;
        match solution {
            AirySolution::Recessive => Ok((v.ai, 0.0)),
            AirySolution::Dominant => Ok((v.bi, 0.0)),
        }
    }
}

/// Multiplier that turns the Gaussian saddle term into the Airy-corrected value.
///
/// `R(ζ') = 2√π ζ'^{1/4} e^{+(2/3)ζ'^{3/2}} Ai(ζ')` for the recessive solution and
/// `R(ζ') = √π ζ'^{1/4} e^{-(2/3)ζ'^{3/2}} Bi(ζ')` for the dominant one. Both tend
/// to 1 as `ζ' → ∞` and vanish at `ζ' = 0`.
pub fn recovery_factor(zeta_prime: f64, kind: AiryKind) -> Result<f64> {
    if zeta_prime.is_nan() {
        return Err(CausticaError::OutOfRange(zeta_prime));
    }
    if zeta_prime < 0.0 {
        return Err(CausticaError::NegativeArgument(zeta_prime));
    }
    if zeta_prime == 0.0 {
        return Ok(0.0);
    }
    let q = zeta_prime.powf(0.25);
    let sp = PI.sqrt();
    match kind.resolve()? {
        AirySolution::Recessive => Ok(2.0 * sp * q * airy_ai_scaled(zeta_prime)?),
        AirySolution::Dominant => Ok(sp * q * airy_bi_scaled(zeta_prime)?),
    }
}
