//! Multivariable Gaussian term, the soft-mode Airy correction and the mean-field comparison.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::airy::{AiryKind, AirySolution};
use crate::asym1d::{
    approx_tilde_with, approx_wkb_with, descent_phase, saddle_form_core, ApproxOptions, Regime,
    RegimeThresholds, SaddleFormInput, CURVATURE_THRESHOLD,
};
use crate::error::{CausticaError, Result};
use crate::integrand::{ContourPath, Integrand1D, IntegrandND};
use crate::linalg::dot;
use crate::saddle::{
    find_caustic, find_saddle, find_saddle_nd, fold_pair_seeds, CausticInfo, NdSaddleInfo, DEGENERACY_THRESHOLD,
};
use crate::ComplexScalar;
#[allow(unused_imports)]
use num_traits::Float;

/// Dropped mixed third derivatives above this relative size are reported.
pub const DROPPED_TERM_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NdMethod {
    WkbNd,
    CorrectedNd,
}

impl NdMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NdMethod::WkbNd => "wkb-nd",
            NdMethod::CorrectedNd => "corrected-nd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdApproxValue {
    pub value: ComplexScalar,
    pub method: NdMethod,
    pub zeta_prime: f64,
    /// `∏(−λᵢ)` over all eigenvalues.
    pub det_neg_hessian: f64,
    pub soft_lambda: f64,
    /// `max_i |a_i11 λ₁² / (λᵢ a111²)|`.
    pub dropped_term_metric: f64,
    pub regime: Regime,
    pub warnings: Vec<String>,
}

fn soft_tangent(intg: &IntegrandND, s: &NdSaddleInfo) -> ComplexScalar {
    let coord = dot(&s.x0, s.soft_vector());
    intg.soft_contour
        .as_ref()
        .unwrap_or(&ContourPath::real_line())
        .tangent_near(ComplexScalar::new(coord, 0.0))
}

fn check_stiff(s: &NdSaddleInfo) -> Result<()> {
    match s.eigenvalues[1..].iter().find(|l| **l >= 0.0) {
        Some(bad) => Err(CausticaError::WrongRegime(format!("stiff eigenvalue {bad:.6e} is not negative"))),
        None => Ok(()),
    }
}

fn stiff_gaussian(n: f64, s: &NdSaddleInfo) -> f64 {
    s.eigenvalues[1..].iter().map(|l| (2.0 * PI / (n * -l)).sqrt()).product()
}

fn dropped_metric(s: &NdSaddleInfo) -> f64 {
    let l1 = s.soft_eigenvalue();
    s.a_i11
        .iter()
        .zip(&s.eigenvalues[1..])
        .map(|(a, l)| (a * l1 * l1 / (l * s.a111 * s.a111)).abs())
        .fold(0.0, f64::max)
}

fn soft_zeta_prime(n: f64, s: &NdSaddleInfo) -> f64 {
    let l1 = s.soft_eigenvalue().abs();
    if l1 == 0.0 || s.a111 == 0.0 {
        return 0.0;
    }
    n.powf(2.0 / 3.0) * (l1.powi(3) / (2.0 * s.a111 * s.a111)).powf(2.0 / 3.0)
}

/// `e^{N F(x₀)} (2π/N)^{n/2} det(−F'')^{−1/2}`, soft factor in its descent frame.
pub fn approx_wkb_nd(intg: &IntegrandND, alpha: f64, n: f64, s: &NdSaddleInfo) -> Result<NdApproxValue> {
    approx_wkb_nd_with(intg, alpha, n, s, &RegimeThresholds::default())
}

pub fn approx_wkb_nd_with(
    intg: &IntegrandND,
    _alpha: f64,
    n: f64,
    s: &NdSaddleInfo,
    thresholds: &RegimeThresholds,
) -> Result<NdApproxValue> {
    check_stiff(s)?;
    let l1 = s.soft_eigenvalue();
    if l1.abs() < CURVATURE_THRESHOLD * s.a111.abs().max(1.0) {
        return Err(CausticaError::CausticDivergence { curvature: l1.abs() });
    }
    let phase = descent_phase(ComplexScalar::new(l1, 0.0), soft_tangent(intg, s));
    let soft = (2.0 * PI / (n * l1.abs())).sqrt();
    let value = (ComplexScalar::new(s.f0 * n, 0.0)).exp() * phase * soft * stiff_gaussian(n, s);
    let zeta_prime = soft_zeta_prime(n, s);
    Ok(NdApproxValue {
        value,
        method: NdMethod::WkbNd,
        zeta_prime,
        det_neg_hessian: s.eigenvalues.iter().map(|l| -l).product(),
        soft_lambda: l1,
        dropped_term_metric: dropped_metric(s),
        regime: thresholds.classify(zeta_prime),
        warnings: Vec::new(),
    })
}

/// Soft-mode Airy correction built from saddle-anchored data; the fold point is never located.
pub fn approx_corrected_nd(intg: &IntegrandND, alpha: f64, n: f64, s: &NdSaddleInfo) -> Result<NdApproxValue> {
    approx_corrected_nd_with(intg, alpha, n, s, &ApproxOptions::default())
}

pub fn approx_corrected_nd_with(
    intg: &IntegrandND,
    alpha: f64,
    n: f64,
    s: &NdSaddleInfo,
    opts: &ApproxOptions,
) -> Result<NdApproxValue> {
    check_stiff(s)?;
    let l1 = s.soft_eigenvalue();
    if s.a111.abs() < DEGENERACY_THRESHOLD {
        return Err(CausticaError::DegenerateCubic {
            z: ComplexScalar::new(dot(&s.x0, s.soft_vector()), 0.0),
            alpha,
            f3: ComplexScalar::new(s.a111, 0.0),
        });
    }
    let solution = opts.kind.resolve()?;
    // F(x̃) ≈ F(x₀) − (1/3)(−λ₁)³/a111²
    let f_tilde = s.f0 - (-l1).powi(3) / (3.0 * s.a111 * s.a111);
    let input = SaddleFormInput {
        f0: ComplexScalar::new(s.f0, 0.0),
        f2: ComplexScalar::new(l1, 0.0),
        f3: ComplexScalar::new(s.a111, 0.0),
        g: ComplexScalar::new(1.0, 0.0),
        tangent: soft_tangent(intg, s),
        f_tilde: Some(ComplexScalar::new(f_tilde, 0.0)),
    };
    let out = saddle_form_core(&input, n, solution)?;
    let mut warnings = out.warnings;
    let metric = dropped_metric(s);
    if metric > DROPPED_TERM_WARNING {
        warnings.push(format!("dropped mixed third derivatives are {metric:.3e} of the kept term"));
    }
    Ok(NdApproxValue {
        value: out.value * stiff_gaussian(n, s),
        method: NdMethod::CorrectedNd,
        zeta_prime: out.zeta.zeta_prime,
        det_neg_hessian: s.eigenvalues.iter().map(|l| -l).product(),
        soft_lambda: l1,
        dropped_term_metric: metric,
        regime: opts.thresholds.classify(out.zeta.zeta_prime),
        warnings,
    })
}

/// One `(α, N)` line of the mean-field comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldRow {
    pub alpha: f64,
    pub n: f64,
    /// Mean-field exponent `F(x₀)` of the dominant saddle.
    pub leading: f64,
    /// `None` when the Gaussian prefactor diverges.
    pub wkb: Option<ComplexScalar>,
    pub corrected: Option<ComplexScalar>,
    /// `(1/N) log|WKB|`.
    pub wkb_exponent: Option<f64>,
    /// `(1/N) log|Corrected|`.
    pub corrected_exponent: Option<f64>,
    /// `|WKB| / |Corrected|`, the prefactor ratio since the exponents coincide.
    pub prefactor_ratio: Option<f64>,
    pub warnings: Vec<String>,
}

impl MeanFieldRow {
    pub fn exponent_gap(&self) -> Option<f64> {
        Some((self.wkb_exponent? - self.corrected_exponent?).abs())
    }
}

fn exponent(v: ComplexScalar, n: f64) -> Option<f64> {
    (v.norm() > 0.0 && v.norm().is_finite()).then(|| v.norm().ln() / n)
}

fn finish_row(alpha: f64, n: f64, leading: f64, wkb: Option<ComplexScalar>, corrected: Option<ComplexScalar>, warnings: Vec<String>) -> MeanFieldRow {
    let wkb_exponent = wkb.and_then(|v| exponent(v, n));
    let corrected_exponent = corrected.and_then(|v| exponent(v, n));
    let prefactor_ratio = match (wkb, corrected) {
        (Some(w), Some(c)) if c.norm() > 0.0 => Some(w.norm() / c.norm()),
        _ => None,
    };
    MeanFieldRow {
        alpha,
        n,
        leading,
        wkb,
        corrected,
        wkb_exponent,
        corrected_exponent,
        prefactor_ratio,
        warnings,
    }
}

/// Dominant-saddle Gaussian plus the fold contribution, for a real-line integrand.
///
/// WKB adds the Gaussian term of the fold maximum (divergent at the fold, absent before
/// it); Corrected adds the dominant-solution Airy term anchored at `z̃(α)`.
pub fn mean_field_compare(intg: &Integrand1D, alphas: &[f64], ns: &[f64]) -> Result<Vec<MeanFieldRow>> {
    let (a0, z0) = intg
        .caustic_guess()
        .ok_or_else(|| CausticaError::BadParameter(format!("{} has no caustic guess", intg.name)))?;
    let caustic = find_caustic(intg, a0, z0)?;
    let mut rows = Vec::with_capacity(alphas.len() * ns.len());
    for &alpha in alphas {
        for &n in ns {
            rows.push(mean_field_point(intg, &caustic, alpha, n)?);
        }
    }
    Ok(rows)
}

fn mean_field_point(intg: &Integrand1D, caustic: &CausticInfo, alpha: f64, n: f64) -> Result<MeanFieldRow> {
    let mut warnings = Vec::new();
    let guess = intg
        .saddle_guess(alpha)
        .ok_or_else(|| CausticaError::BadParameter(format!("{} has no saddle guess", intg.name)))?;
    let global = find_saddle(intg, alpha, guess)?;
    let recessive = ApproxOptions::default();
    let gauss = approx_wkb_with(intg, alpha, n, &global, &recessive)?.value;

    let tilde = caustic.at(alpha).ok().filter(|t| t.z.im.abs() <= 1e-12 * t.z.norm().max(1.0));
    let (wkb, corrected) = match tilde {
        None => {
            warnings.push(format!("no real inflection point at alpha = {alpha}: fold term omitted"));
            (Some(gauss), Some(gauss))
        }
        Some(t) => {
            let dominant = ApproxOptions {
                kind: AiryKind::Dominant,
                ..Default::default()
            };
            let fold = approx_tilde_with(intg, alpha, n, caustic, &dominant)?;
            warnings.extend(fold.warnings.iter().cloned());
            let corrected = gauss + fold.value;

            // the fold maximum is the seed on the side where f'' < 0
            let merged = t.f1.norm() <= CURVATURE_THRESHOLD * t.f3.norm().max(1.0);
            let fold_max = fold_pair_seeds(&t)
                .and_then(|seeds| seeds.into_iter().find(|z| (t.f3 * (z - t.z)).re < 0.0))
                .filter(|z| z.im.abs() <= 1e-12 * z.norm().max(1.0));
            let wkb = match fold_max {
                _ if merged => {
                    warnings.push(format!("Gaussian prefactor of the fold maximum diverges at alpha = {alpha}"));
                    None
                }
                None => Some(gauss),
                Some(seed) => match find_saddle(intg, alpha, seed) {
                    Ok(m) if (m.z0 - global.z0).norm() > 1e-8 && m.z0.im.abs() <= 1e-10 => {
                        match approx_wkb_with(intg, alpha, n, &m, &recessive) {
                            Ok(w) => Some(gauss + w.value),
                            Err(CausticaError::CausticDivergence { .. }) => {
                                warnings.push(format!("Gaussian prefactor of the fold maximum diverges at alpha = {alpha}"));
                                None
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    _ => Some(gauss),
                },
            };
            (wkb, Some(corrected))
        }
    };
    Ok(finish_row(alpha, n, global.f0.re, wkb, corrected, warnings))
}

/// n-D comparison of the Gaussian term and the corrected formula.
pub fn mean_field_compare_nd(intg: &IntegrandND, alphas: &[f64], ns: &[f64]) -> Result<Vec<MeanFieldRow>> {
    let mut rows = Vec::with_capacity(alphas.len() * ns.len());
    for &alpha in alphas {
        let guess = intg
            .saddle_guess(alpha)
            .ok_or_else(|| CausticaError::BadParameter(format!("{} has no saddle guess", intg.name)))?;
        let s = find_saddle_nd(intg, alpha, &guess)?;
        for &n in ns {
            let mut warnings = Vec::new();
            let wkb = match approx_wkb_nd(intg, alpha, n, &s) {
                Ok(v) => Some(v.value),
                Err(CausticaError::CausticDivergence { .. }) => {
                    warnings.push(format!("Gaussian prefactor diverges at alpha = {alpha}"));
                    None
                }
                Err(e) => return Err(e),
            };
            let corrected = approx_corrected_nd(intg, alpha, n, &s)?;
            warnings.extend(corrected.warnings.iter().cloned());
            rows.push(finish_row(alpha, n, s.f0, wkb, Some(corrected.value), warnings));
        }
    }
    Ok(rows)
}

/// The Airy solution a saddle of the given soft curvature feeds on its contour.
pub fn solution_for_soft_curvature(lambda1: f64) -> AirySolution {
    if lambda1 < 0.0 {
        AirySolution::Dominant
    } else {
        AirySolution::Recessive
    }
}
