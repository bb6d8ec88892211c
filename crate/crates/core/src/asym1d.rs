//! One-variable approximations near a fold: WKB, tilde form, saddle form and CFU.
//!
//! All values include the integrand's prefactor. Exponentials are combined with
//! the split-off Airy scale before exponentiation, so the Airy-corrected forms
//! stay finite where `e^{N f}` and `Ai` separately over- or underflow.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::airy::{airy_log_split, recovery_factor, AiryKind, AirySolution};
use crate::error::{CausticaError, Result};
use crate::integrand::Integrand1D;
use crate::saddle::{find_caustic, find_saddle, CausticInfo, SaddleInfo, DEGENERACY_THRESHOLD};
use crate::ComplexScalar;
// inherent f64 math is std-only; under no_std it comes from libm
#[allow(unused_imports)]
use num_traits::Float;

/// `|f''|` below this fraction of `max(1, |f'''|)` makes the Gaussian term divergent.
pub const CURVATURE_THRESHOLD: f64 = 1e-10;
/// Relative size of an imaginary part that still counts as real.
pub const REALNESS_TOLERANCE: f64 = 1e-6;
/// Required agreement between the cancelled and product evaluations of the saddle form.
pub const CROSS_FORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Wkb,
    Tilde,
    SaddleForm,
    Cfu,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Wkb, Method::Tilde, Method::SaddleForm, Method::Cfu];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Wkb => "wkb",
            Method::Tilde => "tilde",
            Method::SaddleForm => "saddle",
            Method::Cfu => "cfu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    CausticWindow,
    Transition,
    WkbSafe,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::CausticWindow => "caustic-window",
            Regime::Transition => "transition",
            Regime::WkbSafe => "wkb-safe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// `ζ' <` this is the caustic window.
    pub caustic_window: f64,
    /// `ζ' >` this is safe for plain WKB.
    pub wkb_safe: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            caustic_window: 2.0,
            wkb_safe: 10.0,
        }
    }
}

impl RegimeThresholds {
    pub fn classify(&self, zeta_prime: f64) -> Regime {
        if zeta_prime < self.caustic_window {
            Regime::CausticWindow
        } else if zeta_prime > self.wkb_safe {
            Regime::WkbSafe
        } else {
            Regime::Transition
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaParams {
    pub zeta: f64,
    pub zeta_prime: f64,
    /// Branch `b` of `(2/f''')^{1/3} = |2/f'''|^{1/3} e^{i(arg(2/f''') + 2πb)/3}`.
    pub branch_index: u8,
    /// `(2/3) ζ'^{3/2}` (zero for `ζ' ≤ 0`).
    pub exp_shift: f64,
}

impl ZetaParams {
    pub fn new(zeta: f64, n: f64, branch_index: u8) -> Self {
        let zeta_prime = n.powf(2.0 / 3.0) * zeta;
        Self {
            zeta,
            zeta_prime,
            branch_index,
            exp_shift: if zeta_prime > 0.0 {
                2.0 / 3.0 * zeta_prime.powf(1.5)
            } else {
                0.0
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxValue {
    pub value: ComplexScalar,
    pub method: Method,
    pub zeta: ZetaParams,
    pub regime: Regime,
    pub warnings: Vec<String>,
}

impl ApproxValue {
    pub fn zeta_prime(&self) -> f64 {
        self.zeta.zeta_prime
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ApproxOptions {
    pub kind: AiryKind,
    pub thresholds: RegimeThresholds,
    /// Pins the tilde-form cube-root branch (sweeps hold one branch fixed).
    pub branch: Option<u8>,
}

fn finite(z: ComplexScalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn i() -> ComplexScalar {
    ComplexScalar::new(0.0, 1.0)
}

/// Leading factor `K` of the Airy-type forms: `2πi` with `Ai`, `π` with `Bi`.
fn airy_constant(solution: AirySolution) -> ComplexScalar {
    match solution {
        AirySolution::Recessive => ComplexScalar::new(0.0, 2.0 * PI),
        AirySolution::Dominant => ComplexScalar::new(PI, 0.0),
    }
}

/// `Airy(x) · e^{exponent}` with the Airy growth folded into the exponent.
fn airy_term(solution: AirySolution, x: f64, exponent: ComplexScalar) -> Result<ComplexScalar> {
    let (mantissa, log_scale) = airy_log_split(solution, x)?;
    Ok((exponent + log_scale).exp() * mantissa)
}

/// Unit factor `e^{iθ}` of the steepest-descent direction through a saddle with curvature
/// `f2`, taking the one of the two opposite directions that agrees with `tangent`.
pub fn descent_phase(f2: ComplexScalar, tangent: ComplexScalar) -> ComplexScalar {
    let theta = (PI - f2.arg()) / 2.0;
    let e = ComplexScalar::from_polar(1.0, theta);
    if (e * tangent.conj()).re >= 0.0 {
        e
    } else {
        -e
    }
}

/// The three cube roots `(2/f3)^{1/3}`, indexed by branch.
pub fn cube_root_branches(f3: ComplexScalar) -> [ComplexScalar; 3] {
    let q = ComplexScalar::new(2.0, 0.0) / f3;
    let (r, a) = (q.norm().cbrt(), q.arg());
    [0, 1, 2].map(|b| ComplexScalar::from_polar(r, (a + 2.0 * PI * b as f64) / 3.0))
}

/// Phase that the Airy contour through the fold induces on the original contour.
fn airy_phase(solution: AirySolution, c: ComplexScalar) -> ComplexScalar {
    let u = c / c.norm();
    match solution {
        AirySolution::Recessive => i() * u,
        AirySolution::Dominant => u,
    }
}

fn nearest_branch(f3: ComplexScalar, phase: ComplexScalar, solution: AirySolution) -> u8 {
    let roots = cube_root_branches(f3);
    (0..3u8)
        .max_by(|&a, &b| {
            let sa = (airy_phase(solution, roots[a as usize]) * phase.conj()).re;
            let sb = (airy_phase(solution, roots[b as usize]) * phase.conj()).re;
            sa.total_cmp(&sb)
        })
        .unwrap_or(0)
}

fn apply_regime(
    value: ComplexScalar,
    method: Method,
    zeta: ZetaParams,
    warnings: Vec<String>,
    opts: &ApproxOptions,
) -> ApproxValue {
    ApproxValue {
        value,
        method,
        zeta,
        regime: opts.thresholds.classify(zeta.zeta_prime),
        warnings,
    }
}

/// `ζ` of the saddle form, `[|f''|³ / (2|f'''|²)]^{2/3}`.
pub fn saddle_zeta(f2: ComplexScalar, f3: ComplexScalar) -> f64 {
    let f2 = f2.norm();
    let f3 = f3.norm();
    if f2 == 0.0 {
        return 0.0;
    }
    (f2.powi(3) / (2.0 * f3 * f3)).powf(2.0 / 3.0)
}

fn curvature_scale(f3: ComplexScalar) -> f64 {
    f3.norm().max(1.0)
}

/// The Gaussian saddle term with its descent-frame phase.
pub fn approx_wkb(intg: &Integrand1D, alpha: f64, n: f64, s: &SaddleInfo) -> Result<ApproxValue> {
    approx_wkb_with(intg, alpha, n, s, &ApproxOptions::default())
}

pub fn approx_wkb_with(
    intg: &Integrand1D,
    _alpha: f64,
    n: f64,
    s: &SaddleInfo,
    opts: &ApproxOptions,
) -> Result<ApproxValue> {
    let curvature = s.f2.norm();
    if curvature < CURVATURE_THRESHOLD * curvature_scale(s.f3) {
        return Err(CausticaError::CausticDivergence { curvature });
    }
    let phase = descent_phase(s.f2, intg.contour.tangent_near(s.z0));
    let value = intg.prefactor * intg.g(s.z0) * (s.f0 * n).exp() * (2.0 * PI / (n * curvature)).sqrt() * phase;
    let solution = opts.kind.resolve()?;
    let zeta = ZetaParams::new(saddle_zeta(s.f2, s.f3), n, nearest_branch(s.f3, phase, solution));
    Ok(apply_regime(value, Method::Wkb, zeta, Vec::new(), opts))
}

/// Candidate tilde-form evaluation on one cube-root branch.
struct TildeCandidate {
    branch: u8,
    zeta: f64,
    value: ComplexScalar,
}

fn tilde_candidates(
    intg: &Integrand1D,
    alpha: f64,
    n: f64,
    c: &CausticInfo,
    solution: AirySolution,
) -> Result<(Vec<TildeCandidate>, ComplexScalar)> {
    let t = c.at(alpha)?;
    if t.f3.norm() < DEGENERACY_THRESHOLD * c.f3_tilde.norm().max(1.0) {
        return Err(CausticaError::DegenerateCubic { z: t.z, alpha, f3: t.f3 });
    }
    let mut out = Vec::new();
    for (b, cb) in cube_root_branches(t.f3).into_iter().enumerate() {
        let zeta = -cb * t.f1;
        let real = zeta.norm() == 0.0 || zeta.im.abs() <= REALNESS_TOLERANCE * zeta.norm();
        if !real {
            continue;
        }
        let zp = n.powf(2.0 / 3.0) * zeta.re;
        let value = airy_constant(solution)
            * intg.g(t.z)
            * cb
            * n.powf(-1.0 / 3.0)
            * airy_term(solution, zp, t.f0 * n)?
            * intg.prefactor;
        out.push(TildeCandidate {
            branch: b as u8,
            zeta: zeta.re,
            value,
        });
    }
    Ok((out, intg.contour.tangent_near(t.z)))
}

/// Cube-root branch for the tilde form at `alpha`.
///
/// With `real_result_hint` the branch minimizing `|Im v|/|v|` wins; otherwise (and on
/// ties) the branch whose Airy contour runs along the integration contour.
pub fn select_tilde_branch(intg: &Integrand1D, alpha: f64, n: f64, c: &CausticInfo, kind: AiryKind) -> Result<u8> {
    let solution = kind.resolve()?;
    let (cands, tangent) = tilde_candidates(intg, alpha, n, c, solution)?;
    let t = c.at(alpha)?;
    let roots = cube_root_branches(t.f3);
    let alignment = |b: u8| (airy_phase(solution, roots[b as usize]) * tangent.conj()).re;
    let imag_ratio = |v: ComplexScalar| if v.norm() == 0.0 { 0.0 } else { v.im.abs() / v.norm() };
    cands
        .iter()
        .max_by(|a, b| {
            if intg.real_result_hint {
                let (ra, rb) = (imag_ratio(a.value), imag_ratio(b.value));
                if (ra - rb).abs() > 1e-12 {
                    return rb.total_cmp(&ra);
                }
            }
            alignment(a.branch).total_cmp(&alignment(b.branch))
        })
        .map(|cand| cand.branch)
        .ok_or_else(|| {
            CausticaError::WrongRegime(format!(
                "zeta is complex on every branch at alpha = {alpha} (oscillatory side of the fold)"
            ))
        })
}

/// The fold-anchored Airy form around `z̃(α)`.
pub fn approx_tilde(intg: &Integrand1D, alpha: f64, n: f64, c: &CausticInfo) -> Result<ApproxValue> {
    approx_tilde_with(intg, alpha, n, c, &ApproxOptions::default())
}

pub fn approx_tilde_with(
    intg: &Integrand1D,
    alpha: f64,
    n: f64,
    c: &CausticInfo,
    opts: &ApproxOptions,
) -> Result<ApproxValue> {
    let solution = opts.kind.resolve()?;
    let branch = match opts.branch {
        Some(b) if b < 3 => b,
        Some(b) => return Err(CausticaError::BadParameter(format!("branch index {b} not in 0..3"))),
        None => select_tilde_branch(intg, alpha, n, c, opts.kind)?,
    };
    let (cands, _) = tilde_candidates(intg, alpha, n, c, solution)?;
    let cand = cands.into_iter().find(|cand| cand.branch == branch).ok_or_else(|| {
        CausticaError::WrongRegime(format!("zeta is complex on branch {branch} at alpha = {alpha}"))
    })?;
    let mut warnings = Vec::new();
    if cand.zeta < 0.0 {
        warnings.push(format!("negative zeta' = {:.3e}: oscillatory side of the fold", n.powf(2.0 / 3.0) * cand.zeta));
    }
    Ok(apply_regime(
        cand.value,
        Method::Tilde,
        ZetaParams::new(cand.zeta, n, branch),
        warnings,
        opts,
    ))
}

/// Saddle data consumed by the cancelled saddle form; shared with the n-D formula.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SaddleFormInput {
    pub f0: ComplexScalar,
    pub f2: ComplexScalar,
    pub f3: ComplexScalar,
    pub g: ComplexScalar,
    pub tangent: ComplexScalar,
    /// `f(z̃)` when available, for the exponent-sign check.
    pub f_tilde: Option<ComplexScalar>,
}

pub(crate) struct SaddleFormOutput {
    pub value: ComplexScalar,
    pub zeta: ZetaParams,
    pub warnings: Vec<String>,
    /// Gaussian term times the recovery factor, when the Gaussian term is finite.
    pub product_form: Option<ComplexScalar>,
}

fn expected_sign(solution: AirySolution) -> f64 {
    match solution {
        AirySolution::Recessive => -1.0,
        AirySolution::Dominant => 1.0,
    }
}

pub(crate) fn saddle_form_core(input: &SaddleFormInput, n: f64, solution: AirySolution) -> Result<SaddleFormOutput> {
    let mut warnings = Vec::new();
    let zeta = saddle_zeta(input.f2, input.f3);
    let well_conditioned = input.f2.norm() >= CURVATURE_THRESHOLD * curvature_scale(input.f3);
    let roots = cube_root_branches(input.f3);
    let phase = if well_conditioned {
        descent_phase(input.f2, input.tangent)
    } else {
        let b = (0..3)
            .max_by(|&a, &b| {
                let sa = (airy_phase(solution, roots[a]) * input.tangent.conj()).re;
                let sb = (airy_phase(solution, roots[b]) * input.tangent.conj()).re;
                sa.total_cmp(&sb)
            })
            .unwrap_or(0);
        airy_phase(solution, roots[b])
    };
    let branch = nearest_branch(input.f3, phase, solution);
    let zp = ZetaParams::new(zeta, n, branch);

    let sgn = match input.f_tilde {
        Some(ft) => {
            let delta = input.f0 - ft;
            if delta.im.abs() > REALNESS_TOLERANCE * delta.norm().max(1e-300) && delta.im.abs() > 1e-14 {
                return Err(CausticaError::WrongRegime(format!(
                    "f(z0) - f(z~) = {delta} is not real: saddles are complex conjugates"
                )));
            }
            let s = if delta.re > 0.0 {
                1.0
            } else if delta.re < 0.0 {
                -1.0
            } else {
                expected_sign(solution)
            };
            if s != expected_sign(solution) && zp.zeta_prime > 0.0 {
                warnings.push(format!(
                    "exponent sign from f(z0) - f(z~) is {s:+}, inconsistent with the {solution:?} Airy solution"
                ));
            }
            s
        }
        None => {
            warnings.push(String::from("expansion point unavailable: exponent sign taken from the Airy kind"));
            expected_sign(solution)
        }
    };

    let modulus = match solution {
        AirySolution::Recessive => 2.0 * PI,
        AirySolution::Dominant => PI,
    };
    let exponent = input.f0 * n - sgn * zp.exp_shift;
    let value = input.g
        * phase
        * modulus
        * (2.0 / input.f3.norm()).cbrt()
        * n.powf(-1.0 / 3.0)
        * airy_term(solution, zp.zeta_prime, exponent)?;

    let product_form = if well_conditioned && zp.zeta_prime > 0.0 {
        let gauss = input.g * (input.f0 * n).exp() * (2.0 * PI / (n * input.f2.norm())).sqrt() * phase;
        let r = recovery_factor(zp.zeta_prime, solution.into())?;
        let p = gauss * r;
        finite(p).then_some(p)
    } else {
        None
    };
    if let Some(p) = product_form {
        if p.norm() > 0.0 && finite(value) && value.norm() > 0.0 {
            let rel = (p - value).norm() / value.norm();
            if rel > CROSS_FORM_TOLERANCE {
                warnings.push(format!("cancelled and product saddle forms differ by {rel:.3e} relative"));
            }
        }
    }
    Ok(SaddleFormOutput {
        value,
        zeta: zp,
        warnings,
        product_form,
    })
}

fn saddle_form_input(intg: &Integrand1D, alpha: f64, s: &SaddleInfo, c: &CausticInfo) -> (SaddleFormInput, Option<String>) {
    let (f_tilde, note) = match c.at(alpha) {
        Ok(t) => (Some(t.f0), None),
        Err(e) => (None, Some(format!("expansion point not served at alpha = {alpha}: {e}"))),
    };
    (
        SaddleFormInput {
            f0: s.f0,
            f2: s.f2,
            f3: s.f3,
            g: intg.g(s.z0),
            tangent: intg.contour.tangent_near(s.z0),
            f_tilde,
        },
        note,
    )
}

/// The saddle-anchored Airy form in its cancelled, caustic-safe evaluation.
pub fn approx_saddle_form(
    intg: &Integrand1D,
    alpha: f64,
    n: f64,
    s: &SaddleInfo,
    c: &CausticInfo,
) -> Result<ApproxValue> {
    approx_saddle_form_with(intg, alpha, n, s, c, &ApproxOptions::default())
}

pub fn approx_saddle_form_with(
    intg: &Integrand1D,
    alpha: f64,
    n: f64,
    s: &SaddleInfo,
    c: &CausticInfo,
    opts: &ApproxOptions,
) -> Result<ApproxValue> {
    if s.f3.norm() < DEGENERACY_THRESHOLD * c.f3_tilde.norm().max(1.0) {
        return Err(CausticaError::DegenerateCubic { z: s.z0, alpha, f3: s.f3 });
    }
    let solution = opts.kind.resolve()?;
    let (input, note) = saddle_form_input(intg, alpha, s, c);
    let mut out = saddle_form_core(&input, n, solution)?;
    if let Some(note) = note {
        out.warnings.insert(0, note);
    }
    Ok(apply_regime(
        out.value * intg.prefactor,
        Method::SaddleForm,
        out.zeta,
        out.warnings,
        opts,
    ))
}

/// The uncancelled product `WKB · R(ζ')` of the saddle form.
pub fn approx_saddle_form_product(
    intg: &Integrand1D,
    alpha: f64,
    n: f64,
    s: &SaddleInfo,
    c: &CausticInfo,
    kind: AiryKind,
) -> Result<ComplexScalar> {
    let (input, _) = saddle_form_input(intg, alpha, s, c);
    let out = saddle_form_core(&input, n, kind.resolve()?)?;
    out.product_form
        .map(|p| p * intg.prefactor)
        .ok_or(CausticaError::CausticDivergence { curvature: s.f2.norm() })
}

/// Two-saddle uniform (leading-order CFU) form.
pub fn approx_cfu(intg: &Integrand1D, alpha: f64, n: f64, s: &SaddleInfo, p: &SaddleInfo) -> Result<ApproxValue> {
    approx_cfu_with(intg, alpha, n, s, p, &ApproxOptions::default())
}

pub fn approx_cfu_with(
    intg: &Integrand1D,
    _alpha: f64,
    n: f64,
    s: &SaddleInfo,
    p: &SaddleInfo,
    opts: &ApproxOptions,
) -> Result<ApproxValue> {
    let solution = opts.kind.resolve()?;
    if (s.z0 - p.z0).norm() <= 1e-10 * s.z0.norm().max(1.0) {
        return Err(CausticaError::PartnerNotFound(String::from("the two saddles coincide")));
    }
    // `minus` maps to t = -√ζ (larger Re f), `plus` to t = +√ζ
    let (minus, plus) = if s.f0.re >= p.f0.re { (s, p) } else { (p, s) };
    let delta = minus.f0 - plus.f0;
    if delta.im.abs() > REALNESS_TOLERANCE * delta.norm() {
        return Err(CausticaError::BranchAmbiguous);
    }
    let zeta = (0.75 * delta.re).powf(2.0 / 3.0);
    let root_zeta = zeta.sqrt();
    let a = (minus.f0 + plus.f0) * 0.5;

    let aligned = |w: ComplexScalar, target: ComplexScalar| if (w * target.conj()).re >= 0.0 { w } else { -w };
    let raw_plus = (ComplexScalar::new(2.0 * root_zeta, 0.0) / plus.f2).sqrt();
    let raw_minus = (ComplexScalar::new(-2.0 * root_zeta, 0.0) / minus.f2).sqrt();
    let (d_minus, d_plus) = match solution {
        AirySolution::Recessive => {
            let theta = descent_phase(plus.f2, intg.contour.tangent_near(plus.z0));
            let d_plus = aligned(raw_plus, theta * -i());
            (aligned(raw_minus, d_plus), d_plus)
        }
        AirySolution::Dominant => {
            let theta = descent_phase(minus.f2, intg.contour.tangent_near(minus.z0));
            let d_minus = aligned(raw_minus, theta);
            (d_minus, aligned(raw_plus, d_minus))
        }
    };
    let a0 = (intg.g(minus.z0) * d_minus + intg.g(plus.z0) * d_plus) * 0.5;
    let zp = ZetaParams::new(zeta, n, 0);
    let value =
        airy_constant(solution) * a0 * n.powf(-1.0 / 3.0) * airy_term(solution, zp.zeta_prime, a * n)? * intg.prefactor;
    let zp = ZetaParams {
        branch_index: nearest_branch(s.f3, d_plus * i(), solution),
        ..zp
    };
    Ok(apply_regime(value, Method::Cfu, zp, Vec::new(), opts))
}

/// Scale diagnostics of one `(α, N)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub alpha: f64,
    pub n: f64,
    pub zeta_prime: Option<f64>,
    /// `N^{2/3} |f'(z̃)| |2/f'''(z̃)|^{1/3}`.
    pub scaled_f1_tilde: Option<f64>,
    /// `N^{1/3} |f''(z₀)|`.
    pub scaled_f2_saddle: Option<f64>,
    /// `|z̃ − z₀|`.
    pub separation: Option<f64>,
    pub regime: Option<Regime>,
    pub notes: Vec<String>,
}

/// Best-effort regime diagnostics using the integrand's own guesses.
pub fn regime_report(intg: &Integrand1D, alpha: f64, n: f64) -> RegimeReport {
    regime_report_with(intg, alpha, n, &RegimeThresholds::default())
}

pub fn regime_report_with(intg: &Integrand1D, alpha: f64, n: f64, thresholds: &RegimeThresholds) -> RegimeReport {
    let mut report = RegimeReport {
        alpha,
        n,
        zeta_prime: None,
        scaled_f1_tilde: None,
        scaled_f2_saddle: None,
        separation: None,
        regime: None,
        notes: Vec::new(),
    };
    let caustic = match intg.caustic_guess() {
        Some((a, z)) => find_caustic(intg, a, z).map_err(|e| report.notes.push(format!("caustic: {e}"))).ok(),
        None => {
            report.notes.push(String::from("no caustic guess"));
            None
        }
    };
    let tilde = caustic
        .as_ref()
        .and_then(|c| c.at(alpha).map_err(|e| report.notes.push(format!("expansion point: {e}"))).ok());
    if let Some(t) = &tilde {
        let c3 = (2.0 / t.f3.norm()).cbrt();
        report.scaled_f1_tilde = Some(n.powf(2.0 / 3.0) * t.f1.norm() * c3);
        if let Some(c) = &caustic {
            if let Ok(b) = select_tilde_branch(intg, alpha, n, c, AiryKind::Recessive) {
                let zeta = -cube_root_branches(t.f3)[b as usize] * t.f1;
                report.zeta_prime = Some(n.powf(2.0 / 3.0) * zeta.re);
            }
        }
    }
    let guess = intg.saddle_guess(alpha).or(tilde.map(|t| t.z));
    match guess.map(|g| find_saddle(intg, alpha, g)) {
        Some(Ok(s)) => {
            report.scaled_f2_saddle = Some(n.powf(1.0 / 3.0) * s.f2.norm());
            if let Some(t) = &tilde {
                report.separation = Some((t.z - s.z0).norm());
            }
            if report.zeta_prime.is_none() {
                report.zeta_prime = Some(n.powf(2.0 / 3.0) * saddle_zeta(s.f2, s.f3));
            }
        }
        Some(Err(e)) => report.notes.push(format!("saddle: {e}")),
        None => report.notes.push(String::from("no saddle guess")),
    }
    report.regime = report.zeta_prime.map(|z| thresholds.classify(z));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::{airy_ai, airy_bi};
    use crate::integrand::{registry_get, Params};
    use crate::saddle::find_partner;
    use proptest::prelude::*;

    fn c(re: f64) -> ComplexScalar {
        ComplexScalar::new(re, 0.0)
    }

    fn one_d(name: &str, kv: &[(&str, f64)]) -> Integrand1D {
        let p: Params = kv.iter().map(|(k, v)| ((*k).into(), *v)).collect();
        registry_get(name, &p).unwrap().one_d().unwrap()
    }

    fn caustic(intg: &Integrand1D) -> CausticInfo {
        let (a, z) = intg.caustic_guess().unwrap();
        find_caustic(intg, a, z).unwrap()
    }

    fn rel(a: ComplexScalar, b: ComplexScalar) -> f64 {
        (a - b).norm() / b.norm()
    }

    /// Independent `J_n(x)` by the ascending series summed in log space.
    fn bessel_series(n: u32, x: f64) -> f64 {
        let mut term = (0..n).fold(1.0f64, |t, k| t * (x / 2.0) / (k + 1) as f64);
        let mut sum = term;
        for k in 1..200 {
            term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    #[test]
    fn wkb_matches_debye() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 0.8, c(0.5)).unwrap();
        let w = approx_wkb(&b, 0.8, 30.0, &s).unwrap();
        let beta = (1.0f64 / 0.8).acosh();
        let debye = (30.0 * (beta.tanh() - beta)).exp() / (2.0 * PI * 30.0 * beta.tanh()).sqrt();
        assert!(rel(w.value, c(debye)) < 1e-10, "{} vs {debye}", w.value);
    }

    #[test]
    fn wkb_diverges_at_caustic() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 1.0, c(0.1)).unwrap();
        assert!(matches!(approx_wkb(&b, 1.0, 30.0, &s), Err(CausticaError::CausticDivergence { .. })));
    }

    #[test]
    fn wkb_cubic_closed_form() {
        let cubic = one_d("cubic", &[]);
        let (a, n) = (0.25f64, 100.0);
        let s = find_saddle(&cubic, a, c(0.5)).unwrap();
        let w = approx_wkb(&cubic, a, n, &s).unwrap();
        let expect = (-n * 2.0 / 3.0 * a.powf(1.5)).exp() * (2.0 * PI / (2.0 * n * a.sqrt())).sqrt();
        assert!(rel(w.value, ComplexScalar::new(0.0, expect)) < 1e-12);
    }

    #[test]
    fn tilde_is_exact_on_cubic() {
        let cubic = one_d("cubic", &[]);
        let k = caustic(&cubic);
        for n in [10.0f64, 100.0, 1000.0] {
            for a in [0.0, 0.01, 0.1, 0.5] {
                let v = approx_tilde(&cubic, a, n, &k).unwrap();
                let expect = ComplexScalar::new(0.0, 2.0 * PI) * n.powf(-1.0 / 3.0) * airy_ai(n.powf(2.0 / 3.0) * a).unwrap();
                assert!(rel(v.value, expect) < 1e-10, "N={n} a={a}");
                assert_eq!(v.zeta.branch_index, 0);
            }
        }
    }

    #[test]
    fn tilde_bessel_against_series() {
        let b = one_d("bessel-sinh", &[]);
        let k = caustic(&b);
        let exact = bessel_series(30, 30.0);
        let v = approx_tilde(&b, 1.0, 30.0, &k).unwrap();
        assert!(v.value.im.abs() < 1e-15 && (v.value.re / exact - 1.0).abs() < 0.05);
        let exact = bessel_series(30, 29.7);
        let t = approx_tilde(&b, 0.99, 30.0, &k).unwrap();
        let s = find_saddle(&b, 0.99, b.saddle_guess(0.99).unwrap()).unwrap();
        let w = approx_wkb(&b, 0.99, 30.0, &s).unwrap();
        assert!((t.value.re / exact - 1.0).abs() < (w.value.re / exact - 1.0).abs());
    }

    #[test]
    fn tilde_rejects_oscillatory_side_and_degenerate() {
        let cubic = one_d("cubic", &[]);
        let k = caustic(&cubic);
        // alpha < 0 gives negative real zeta, still admissible
        assert!(approx_tilde(&cubic, -0.1, 10.0, &k).unwrap().zeta.zeta < 0.0);
        let bad = ApproxOptions { branch: Some(1), ..Default::default() };
        assert!(matches!(approx_tilde_with(&cubic, 0.2, 10.0, &k, &bad), Err(CausticaError::WrongRegime(_))));
    }

    #[test]
    fn saddle_form_cancelled_equals_product() {
        let pc = one_d("perturbed-cubic", &[]);
        let k = caustic(&pc);
        let n = 100.0f64;
        for target in [0.1f64, 0.5, 1.0, 3.0, 10.0] {
            // the saddle-form zeta' of the cubic part is N^{2/3} alpha; perturbations shift it slightly
            let a = target / n.powf(2.0 / 3.0);
            let s = find_saddle(&pc, a, c(a.sqrt())).unwrap();
            let v = approx_saddle_form(&pc, a, n, &s, &k).unwrap();
            let p = approx_saddle_form_product(&pc, a, n, &s, &k, AiryKind::Recessive).unwrap();
            assert!(rel(v.value, p) < 1e-9, "target {target}: {}", rel(v.value, p));
            assert!(v.warnings.is_empty(), "{:?}", v.warnings);
        }
    }

    #[test]
    fn saddle_form_close_to_tilde() {
        let pc = one_d("perturbed-cubic", &[]);
        let k = caustic(&pc);
        for n in [30.0f64, 100.0] {
            for frac in [0.05, 0.1, 0.2] {
                let a = frac * n.powf(-1.0 / 3.0);
                let s = find_saddle(&pc, a, c(a.sqrt())).unwrap();
                let sf = approx_saddle_form(&pc, a, n, &s, &k).unwrap();
                let t = approx_tilde(&pc, a, n, &k).unwrap();
                assert!(rel(sf.value, t.value) <= 5.0 * n.powf(-2.0 / 3.0));
            }
        }
    }

    #[test]
    fn saddle_form_at_caustic_is_finite() {
        let b = one_d("bessel-sinh", &[]);
        let k = caustic(&b);
        let s = find_saddle(&b, 1.0, c(0.1)).unwrap();
        let v = approx_saddle_form(&b, 1.0, 30.0, &s, &k).unwrap();
        let t = approx_tilde(&b, 1.0, 30.0, &k).unwrap();
        assert!(rel(v.value, t.value) < 1e-12);
        assert_eq!(v.regime, Regime::CausticWindow);
    }

    #[test]
    fn saddle_form_wrong_regime_for_complex_saddles() {
        let cubic = one_d("cubic", &[]);
        let k = caustic(&cubic);
        let s = find_saddle(&cubic, -0.2, ComplexScalar::new(0.0, 0.4)).unwrap();
        assert!(matches!(approx_saddle_form(&cubic, -0.2, 50.0, &s, &k), Err(CausticaError::WrongRegime(_))));
    }

    #[test]
    fn cfu_bessel_within_two_percent() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 0.9, b.saddle_guess(0.9).unwrap()).unwrap();
        let p = find_partner(&b, 0.9, &s).unwrap();
        let v = approx_cfu(&b, 0.9, 30.0, &s, &p).unwrap();
        let exact = bessel_series(30, 27.0);
        assert!(v.value.im.abs() < 1e-12 * v.value.norm());
        assert!((v.value.re / exact - 1.0).abs() < 0.02);
    }

    #[test]
    fn cfu_reduces_to_tilde_near_coalescence() {
        let pc = one_d("perturbed-cubic", &[]);
        let k = caustic(&pc);
        let mut last = f64::INFINITY;
        for a in [1e-2, 1e-3, 1e-4] {
            let s = find_saddle(&pc, a, c(a.sqrt())).unwrap();
            let p = find_partner(&pc, a, &s).unwrap();
            let v = approx_cfu(&pc, a, 30.0, &s, &p).unwrap();
            let t = approx_tilde(&pc, a, 30.0, &k).unwrap();
            let r = rel(v.value, t.value);
            assert!(r < last);
            last = r;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn cfu_label_order_irrelevant() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 0.95, c(0.3)).unwrap();
        let p = find_partner(&b, 0.95, &s).unwrap();
        let v1 = approx_cfu(&b, 0.95, 30.0, &s, &p).unwrap();
        let v2 = approx_cfu(&b, 0.95, 30.0, &p, &s).unwrap();
        assert!(rel(v1.value, v2.value) < 1e-14);
    }

    #[test]
    fn dominant_tilde_matches_bi() {
        let cubic = one_d("cubic", &[]);
        let k = caustic(&cubic);
        let opts = ApproxOptions { kind: AiryKind::Dominant, ..Default::default() };
        let v = approx_tilde_with(&cubic, 0.3, 20.0, &k, &opts).unwrap();
        let n = 20.0f64;
        let expect = PI * n.powf(-1.0 / 3.0) * airy_bi(n.powf(2.0 / 3.0) * 0.3).unwrap();
        assert!(rel(v.value, c(expect)) < 1e-12);
        let unresolved = ApproxOptions { kind: AiryKind::ContourSelected(None), ..Default::default() };
        assert!(approx_tilde_with(&cubic, 0.3, 20.0, &k, &unresolved).is_err());
    }

    #[test]
    fn regime_report_examples() {
        let b = one_d("bessel-sinh", &[]);
        let r = regime_report(&b, 1.0, 30.0);
        assert_eq!(r.zeta_prime, Some(0.0));
        assert_eq!(r.regime, Some(Regime::CausticWindow));
        let r = regime_report(&b, 0.5, 100.0);
        assert_eq!(r.regime, Some(Regime::WkbSafe));
        let cubic = one_d("cubic", &[]);
        let n = 64.0f64;
        let r = regime_report(&cubic, n.powf(-2.0 / 3.0), n);
        assert!((r.zeta_prime.unwrap() - 1.0).abs() < 1e-14);
        assert!(r.separation.is_some() && r.scaled_f2_saddle.is_some());
    }

    #[test]
    fn thresholds_classify() {
        let t = RegimeThresholds::default();
        assert_eq!(t.classify(1.999), Regime::CausticWindow);
        assert_eq!(t.classify(2.0), Regime::Transition);
        assert_eq!(t.classify(10.0), Regime::Transition);
        assert_eq!(t.classify(10.001), Regime::WkbSafe);
    }

    proptest! {
        #[test]
        fn zeta_prime_scaling(zeta in 0.0f64..5.0, n in 1.0f64..1e4) {
            let z = ZetaParams::new(zeta, n, 0);
            prop_assert!((z.zeta_prime - n.powf(2.0 / 3.0) * zeta).abs() <= 1e-15 * z.zeta_prime.max(1.0));
        }

        #[test]
        fn bessel_branch_stable_and_real(alpha in 0.3f64..1.0, n in 10.0f64..200.0) {
            let b = one_d("bessel-sinh", &[]);
            let k = caustic(&b);
            let opts = ApproxOptions::default();
            let t = approx_tilde_with(&b, alpha, n, &k, &opts).unwrap();
            prop_assert_eq!(t.zeta.branch_index, 0);
            prop_assert!(t.value.im.abs() <= 1e-6 * t.value.norm());
            let s = find_saddle(&b, alpha, b.saddle_guess(alpha).unwrap()).unwrap();
            if t.regime == Regime::WkbSafe {
                for v in [approx_wkb(&b, alpha, n, &s).unwrap(), approx_saddle_form(&b, alpha, n, &s, &k).unwrap()] {
                    prop_assert!(v.value.im.abs() <= 1e-6 * v.value.norm());
                }
                let p = find_partner(&b, alpha, &s).unwrap();
                let v = approx_cfu(&b, alpha, n, &s, &p).unwrap();
                prop_assert!(v.value.im.abs() <= 1e-6 * v.value.norm());
            }
        }

        #[test]
        fn cross_form_identity(alpha in 0.01f64..0.5, n in 20.0f64..300.0) {
            let pc = one_d("perturbed-cubic", &[]);
            let k = caustic(&pc);
            let s = find_saddle(&pc, alpha, c(alpha.sqrt())).unwrap();
            let v = approx_saddle_form(&pc, alpha, n, &s, &k).unwrap();
            if let Ok(p) = approx_saddle_form_product(&pc, alpha, n, &s, &k, AiryKind::Recessive) {
                if p.norm() > 1e-280 {
                    prop_assert!(rel(v.value, p) <= 1e-9);
                }
            }
        }
    }
}
