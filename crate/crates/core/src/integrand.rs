//! Integrands, integration contours, derivative providers and the built-in registry.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{CausticaError, Result};
use crate::ComplexScalar;
// inherent f64 math is std-only; under no_std it comes from libm
#[allow(unused_imports)]
use num_traits::Float;

pub type ScalarFn = Arc<dyn Fn(ComplexScalar, f64) -> ComplexScalar + Send + Sync>;
pub type AmplitudeFn = Arc<dyn Fn(ComplexScalar) -> ComplexScalar + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// Writes the gradient into the output slice.
pub type GradFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;
/// Writes the row-major Hessian into the output slice.
pub type HessFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;
/// Symmetric third-derivative form `F'''[a, b, c]`.
pub type TrilinearFn = Arc<dyn Fn(&[f64], f64, &[f64], &[f64], &[f64]) -> f64 + Send + Sync>;
/// `F` with a complex first coordinate and real remaining coordinates.
pub type SoftEvalFn = Arc<dyn Fn(ComplexScalar, &[f64], f64) -> ComplexScalar + Send + Sync>;

pub type Params = BTreeMap<String, f64>;

type VectorMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Default acceptance threshold for numeric derivative error estimates.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;

/// A polyline with an infinite ray at each end.
///
/// The head ray is traversed from `∞·e^{i head_angle}` into the first node,
/// the tail ray from the last node out to `∞·e^{i tail_angle}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPath {
    nodes: Vec<ComplexScalar>,
    head_angle: f64,
    tail_angle: f64,
    orientation: i8,
}

/// One straight piece of a contour, in traversal order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourPiece {
    /// Traversed from `origin + ∞·dir` toward `origin`.
    InRay { origin: ComplexScalar, dir: ComplexScalar },
    Segment { from: ComplexScalar, to: ComplexScalar },
    /// Traversed from `origin` toward `origin + ∞·dir`.
    OutRay { origin: ComplexScalar, dir: ComplexScalar },
}

fn angle_ok(a: f64) -> bool {
    a.is_finite() && a > -PI && a <= PI
}

impl ContourPath {
    pub fn new(
        nodes: Vec<ComplexScalar>,
        head_angle: f64,
        tail_angle: f64,
        orientation: i8,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(CausticaError::InvalidContour("no nodes".into()));
        }
        if nodes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CausticaError::InvalidContour("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(CausticaError::InvalidContour("repeated consecutive node".into()));
        }
        if !angle_ok(head_angle) || !angle_ok(tail_angle) {
            return Err(CausticaError::InvalidContour("ray angle outside (-pi, pi]".into()));
        }
        if orientation != 1 && orientation != -1 {
            return Err(CausticaError::InvalidContour("orientation must be +1 or -1".into()));
        }
        Ok(Self {
            nodes,
            head_angle,
            tail_angle,
            orientation,
        })
    }

    /// The real axis, left to right.
    pub fn real_line() -> Self {
        Self::new(vec![ComplexScalar::new(0.0, 0.0)], PI, 0.0, 1).expect("valid")
    }

    /// Standard Airy contour from `∞e^{-iπ/3}` to `∞e^{iπ/3}` through `center`.
    pub fn airy(center: ComplexScalar) -> Self {
        Self::new(vec![center], -PI / 3.0, PI / 3.0, 1).expect("valid")
    }

    pub fn nodes(&self) -> &[ComplexScalar] {
        &self.nodes
    }

    pub fn head_angle(&self) -> f64 {
        self.head_angle
    }

    pub fn tail_angle(&self) -> f64 {
        self.tail_angle
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn pieces(&self) -> Vec<ContourPiece> {
        let mut out = Vec::with_capacity(self.nodes.len() + 1);
        out.push(ContourPiece::InRay {
            origin: self.nodes[0],
            dir: ComplexScalar::from_polar(1.0, self.head_angle),
        });
        for w in self.nodes.windows(2) {
            out.push(ContourPiece::Segment { from: w[0], to: w[1] });
        }
        out.push(ContourPiece::OutRay {
            origin: *self.nodes.last().expect("non-empty"),
            dir: ComplexScalar::from_polar(1.0, self.tail_angle),
        });
        out
    }

    /// Unit traversal direction of the piece closest to `z`, including orientation.
    pub fn tangent_near(&self, z: ComplexScalar) -> ComplexScalar {
        let mut best = (f64::INFINITY, ComplexScalar::new(1.0, 0.0));
        for piece in self.pieces() {
            let (dist, dir) = match piece {
                ContourPiece::InRay { origin, dir } => (ray_distance(origin, dir, z), -dir),
                ContourPiece::OutRay { origin, dir } => (ray_distance(origin, dir, z), dir),
                ContourPiece::Segment { from, to } => {
                    let d = to - from;
                    let len = d.norm();
                    let u = d / len;
                    let t = ((z - from) * u.conj()).re.clamp(0.0, len);
                    ((from + u * t - z).norm(), u)
                }
            };
            // ties at a shared node: average the two directions
            if dist < best.0 - 1e-14 {
                best = (dist, dir);
            } else if (dist - best.0).abs() <= 1e-14 {
                let avg = best.1 + dir;
                if avg.norm() > 1e-12 {
                    best.1 = avg / avg.norm();
                }
            }
        }
        best.1 * f64::from(self.orientation)
    }

    /// Point on a piece at parameter `t` (`[0, 1]` for segments, distance for rays).
    pub fn point_on(piece: &ContourPiece, t: f64) -> ComplexScalar {
        match *piece {
            ContourPiece::InRay { origin, dir } | ContourPiece::OutRay { origin, dir } => origin + dir * t,
            ContourPiece::Segment { from, to } => from + (to - from) * t,
        }
    }
}

fn ray_distance(origin: ComplexScalar, dir: ComplexScalar, z: ComplexScalar) -> f64 {
    let t = ((z - origin) * dir.conj()).re.max(0.0);
    (origin + dir * t - z).norm()
}

/// A one-variable integrand `prefactor · ∫_c g(z) e^{N f(z, α)} dz`.
#[derive(Clone)]
pub struct Integrand1D {
    pub name: String,
    f: ScalarFn,
    g: AmplitudeFn,
    derivs: Option<[ScalarFn; 4]>,
    pub contour: ContourPath,
    pub alpha_hat_hint: Option<f64>,
    pub real_result_hint: bool,
    pub prefactor: ComplexScalar,
    /// Documented parameter range for which the contour converges and the
    /// saddle data are real.
    pub alpha_range: (f64, f64),
    saddle_guess: Option<Arc<dyn Fn(f64) -> ComplexScalar + Send + Sync>>,
    caustic_guess: Option<(f64, ComplexScalar)>,
}

impl core::fmt::Debug for Integrand1D {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Integrand1D")
            .field("name", &self.name)
            .field("contour", &self.contour)
            .field("alpha_hat_hint", &self.alpha_hat_hint)
            .field("real_result_hint", &self.real_result_hint)
            .field("prefactor", &self.prefactor)
            .finish_non_exhaustive()
    }
}

impl Integrand1D {
    pub fn new(name: impl Into<String>, f: ScalarFn, g: AmplitudeFn, contour: ContourPath) -> Self {
        Self {
            name: name.into(),
            f,
            g,
            derivs: None,
            contour,
            alpha_hat_hint: None,
            real_result_hint: false,
            prefactor: ComplexScalar::new(1.0, 0.0),
            alpha_range: (f64::NEG_INFINITY, f64::INFINITY),
            saddle_guess: None,
            caustic_guess: None,
        }
    }

    pub fn with_derivatives(mut self, derivs: [ScalarFn; 4]) -> Self {
        self.derivs = Some(derivs);
        self
    }

    pub fn without_derivatives(mut self) -> Self {
        self.derivs = None;
        self
    }

    pub fn with_prefactor(mut self, p: ComplexScalar) -> Self {
        self.prefactor = p;
        self
    }

    pub fn with_saddle_guess(mut self, guess: Arc<dyn Fn(f64) -> ComplexScalar + Send + Sync>) -> Self {
        self.saddle_guess = Some(guess);
        self
    }

    pub fn with_caustic_guess(mut self, alpha: f64, z: ComplexScalar) -> Self {
        self.caustic_guess = Some((alpha, z));
        self
    }

    #[inline]
    pub fn f(&self, z: ComplexScalar, alpha: f64) -> ComplexScalar {
        (self.f)(z, alpha)
    }

    #[inline]
    pub fn g(&self, z: ComplexScalar) -> ComplexScalar {
        (self.g)(z)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivs.is_some()
    }

    pub fn analytic_derivative(&self, order: usize, z: ComplexScalar, alpha: f64) -> Option<ComplexScalar> {
        let d = self.derivs.as_ref()?;
        (1..=4).contains(&order).then(|| (d[order - 1])(z, alpha))
    }

    pub fn saddle_guess(&self, alpha: f64) -> Option<ComplexScalar> {
        self.saddle_guess.as_ref().map(|g| g(alpha))
    }

    pub fn caustic_guess(&self) -> Option<(f64, ComplexScalar)> {
        self.caustic_guess
    }

    /// Integrand value `g(z) e^{N f(z, α)}` without the prefactor.
    #[inline]
    pub fn integrand(&self, z: ComplexScalar, alpha: f64, n: f64) -> ComplexScalar {
        self.g(z) * (self.f(z, alpha) * n).exp()
    }

    /// Checks numerically that `Re f` falls without bound along both rays.
    pub fn check_rays(&self, alphas: &[f64]) -> Result<()> {
        let pieces = self.contour.pieces();
        for &alpha in alphas {
            for piece in [pieces[0], pieces[pieces.len() - 1]] {
                let (origin, dir) = match piece {
                    ContourPiece::InRay { origin, dir } | ContourPiece::OutRay { origin, dir } => (origin, dir),
                    ContourPiece::Segment { .. } => unreachable!(),
                };
                let base = self.f(origin, alpha).re;
                let mut prev = f64::INFINITY;
                let mut last = 0.0;
                for r in [4.0, 8.0, 16.0, 32.0] {
                    let v = self.f(origin + dir * r, alpha).re;
                    if !(v < prev) {
                        return Err(CausticaError::RayDivergence);
                    }
                    prev = v;
                    last = v;
                }
                if !(last < base - 20.0) {
                    return Err(CausticaError::RayDivergence);
                }
            }
        }
        Ok(())
    }
}

/// An `n`-variable integrand `∫_D e^{N F(x, α)} dⁿx`.
#[derive(Clone)]
pub struct IntegrandND {
    pub name: String,
    field: FieldFn,
    pub dim: usize,
    grad: Option<GradFn>,
    hessian: Option<HessFn>,
    third: Option<TrilinearFn>,
    /// Complex deformation of the soft coordinate (measured along the soft eigenvector).
    pub soft_contour: Option<ContourPath>,
    soft_eval: Option<SoftEvalFn>,
    pub domain_note: String,
    pub alpha_hat_hint: Option<f64>,
    saddle_guess: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl core::fmt::Debug for IntegrandND {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("IntegrandND")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("soft_contour", &self.soft_contour)
            .field("domain_note", &self.domain_note)
            .finish_non_exhaustive()
    }
}

impl IntegrandND {
    pub fn new(name: impl Into<String>, field: FieldFn, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(CausticaError::BadParameter(format!("dimension {dim} < 2")));
        }
        Ok(Self {
            name: name.into(),
            field,
            dim,
            grad: None,
            hessian: None,
            third: None,
            soft_contour: None,
            soft_eval: None,
            domain_note: String::from("R^n"),
            alpha_hat_hint: None,
            saddle_guess: None,
        })
    }

    pub fn with_analytic(mut self, grad: GradFn, hessian: HessFn, third: TrilinearFn) -> Self {
        self.grad = Some(grad);
        self.hessian = Some(hessian);
        self.third = Some(third);
        self
    }

    pub fn without_analytic(mut self) -> Self {
        self.grad = None;
        self.hessian = None;
        self.third = None;
        self
    }

    pub fn with_soft_contour(mut self, contour: ContourPath, eval: SoftEvalFn) -> Self {
        self.soft_contour = Some(contour);
        self.soft_eval = Some(eval);
        self
    }

    pub fn with_saddle_guess(mut self, g: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>) -> Self {
        self.saddle_guess = Some(g);
        self
    }

    #[inline]
    pub fn value(&self, x: &[f64], alpha: f64) -> f64 {
        (self.field)(x, alpha)
    }

    pub fn soft_eval(&self) -> Option<&SoftEvalFn> {
        self.soft_eval.as_ref()
    }

    pub fn saddle_guess(&self, alpha: f64) -> Option<Vec<f64>> {
        self.saddle_guess.as_ref().map(|g| g(alpha))
    }

    pub fn gradient(&self, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        if let Some(g) = &self.grad {
            g(x, alpha, &mut out);
            return Ok(out);
        }
        let mut e = vec![0.0; self.dim];
        for i in 0..self.dim {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[i] = 1.0;
            out[i] = fd_directional(&self.field, x, alpha, &e, 1)?;
        }
        Ok(out)
    }

    /// Row-major Hessian.
    pub fn hessian(&self, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        if let Some(h) = &self.hessian {
            h(x, alpha, &mut out);
            return Ok(out);
        }
        let mut e = vec![0.0; n];
        for i in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[i] = 1.0;
            out[i * n + i] = fd_directional(&self.field, x, alpha, &e, 2)?;
        }
        let s = core::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in (i + 1)..n {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[i] = s;
                e[j] = s;
                let plus = fd_directional(&self.field, x, alpha, &e, 2)?;
                e[j] = -s;
                let minus = fd_directional(&self.field, x, alpha, &e, 2)?;
                let v = 0.5 * (plus - minus);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }

    /// `F'''[a, b, c]`; numeric fallback uses polarization of directional third derivatives.
    pub fn trilinear(&self, x: &[f64], alpha: f64, a: &[f64], b: &[f64], c: &[f64]) -> Result<f64> {
        if let Some(t) = &self.third {
            return Ok(t(x, alpha, a, b, c));
        }
        let cube = |w: &[f64]| -> Result<f64> {
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(0.0);
            }
            let u: Vec<f64> = w.iter().map(|v| v / norm).collect();
            Ok(norm.powi(3) * fd_directional(&self.field, x, alpha, &u, 3)?)
        };
        if a == b && b == c {
            return cube(a);
        }
        if b == c {
            // T(a,b,b) = [D3(b+a) - D3(b-a) - 2 D3(a)] / 6
            let plus: Vec<f64> = b.iter().zip(a).map(|(p, q)| p + q).collect();
            let minus: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
            return Ok((cube(&plus)? - cube(&minus)? - 2.0 * cube(a)?) / 6.0);
        }
        // T(a,b,c) = Σ s_b s_c D3(a + s_b b + s_c c) / 24
        let comb = |sb: f64, sc: f64| -> Vec<f64> {
            a.iter().zip(b).zip(c).map(|((p, q), r)| p + sb * q + sc * r).collect()
        };
        let t = cube(&comb(1.0, 1.0))? - cube(&comb(1.0, -1.0))? - cube(&comb(-1.0, 1.0))?
            + cube(&comb(-1.0, -1.0))?;
        Ok(t / 24.0)
    }

    /// Symmetry check of the Hessian at a point (relative tolerance 1e-10).
    pub fn hessian_is_symmetric(&self, x: &[f64], alpha: f64) -> Result<bool> {
        let h = self.hessian(x, alpha)?;
        let n = self.dim;
        let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        Ok((0..n).all(|i| (0..n).all(|j| (h[i * n + j] - h[j * n + i]).abs() <= 1e-10 * scale)))
    }

    /// The integrand in rotated coordinates, `F'(y) = F(Q y)` for an orthogonal row-major `Q`.
    pub fn rotated(&self, q: &[f64]) -> Result<Self> {
        let n = self.dim;
        if q.len() != n * n {
            return Err(CausticaError::BadParameter("rotation has wrong shape".into()));
        }
        let q: Arc<Vec<f64>> = Arc::new(q.to_vec());
        let apply = {
            let q = q.clone();
            move |y: &[f64]| -> Vec<f64> {
                (0..n).map(|i| (0..n).map(|j| q[i * n + j] * y[j]).sum()).collect()
            }
        };
        let apply: VectorMap = Arc::new(apply);
        let base = self.clone();
        let field: FieldFn = {
            let base = base.clone();
            let apply = apply.clone();
            Arc::new(move |y, a| base.value(&apply(y), a))
        };
        let mut out = Self::new(format!("{}-rotated", self.name), field, n)?;
        if self.grad.is_some() && self.hessian.is_some() && self.third.is_some() {
            let grad: GradFn = {
                let base = base.clone();
                let apply = apply.clone();
                let q = q.clone();
                Arc::new(move |y, a, out| {
                    let g = base.gradient(&apply(y), a).expect("analytic");
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = (0..n).map(|i| q[i * n + j] * g[i]).sum();
                    }
                })
            };
            let hess: HessFn = {
                let base = base.clone();
                let apply = apply.clone();
                let q = q.clone();
                Arc::new(move |y, a, out| {
                    let h = base.hessian(&apply(y), a).expect("analytic");
                    for r in 0..n {
                        for c in 0..n {
                            let mut s = 0.0;
                            for i in 0..n {
                                for j in 0..n {
                                    s += q[i * n + r] * h[i * n + j] * q[j * n + c];
                                }
                            }
                            out[r * n + c] = s;
                        }
                    }
                })
            };
            let third: TrilinearFn = {
                let base = base.clone();
                let apply = apply.clone();
                Arc::new(move |y, al, a, b, c| {
                    base.trilinear(&apply(y), al, &apply(a), &apply(b), &apply(c))
                        .expect("analytic")
                })
            };
            out = out.with_analytic(grad, hess, third);
        }
        out.soft_contour = self.soft_contour.clone();
        out.alpha_hat_hint = self.alpha_hat_hint;
        out.domain_note = format!("rotation of {}", self.domain_note);
        if let Some(g) = self.saddle_guess.clone() {
            let q = q.clone();
            out.saddle_guess = Some(Arc::new(move |a| {
                let x = g(a);
                (0..n).map(|j| (0..n).map(|i| q[i * n + j] * x[i]).sum()).collect()
            }));
        }
        Ok(out)
    }
}

/// A derivative value with its error estimate (zero for analytic providers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: ComplexScalar,
    pub error: f64,
}

/// `f^{(order)}(z, α)`, analytic when available, otherwise numeric.
pub fn derive(intg: &Integrand1D, z: ComplexScalar, alpha: f64, order: usize) -> Result<Derivative> {
    if !(1..=4).contains(&order) {
        return Err(CausticaError::BadParameter(format!("derivative order {order} not in 1..=4")));
    }
    if let Some(v) = intg.analytic_derivative(order, z, alpha) {
        return Ok(Derivative { value: v, error: 0.0 });
    }
    derive_numeric(intg, z, alpha, order, DERIVATIVE_TOLERANCE)
}

/// Numeric derivative from symmetric complex-plane stencils.
///
/// The stencil samples `f` at 32 equally spaced points on a circle of radius
/// `r` around `z`, two of them on the contour tangent. Radii `r` and `r/2`
/// are compared for the error estimate.
pub fn derive_numeric(
    intg: &Integrand1D,
    z: ComplexScalar,
    alpha: f64,
    order: usize,
    tolerance: f64,
) -> Result<Derivative> {
    const M: usize = 32;
    let radius = 0.2 * z.norm().max(1.0);
    let tangent = intg.contour.tangent_near(z);
    let stencil = |r: f64| -> ComplexScalar {
        let mut acc = ComplexScalar::new(0.0, 0.0);
        for j in 0..M {
            // rotate the stencil so that two nodes lie on the tangent line
            let w = tangent * ComplexScalar::from_polar(1.0, 2.0 * PI * j as f64 / M as f64);
            acc += intg.f(z + w * r, alpha) * w.powi(-(order as i32));
        }
        let fact = (1..=order).product::<usize>() as f64;
        acc * fact / (M as f64 * r.powi(order as i32))
    };
    let coarse = stencil(radius);
    let fine = stencil(0.5 * radius);
    let error = (coarse - fine).norm();
    if !error.is_finite() || error > tolerance * coarse.norm().max(1.0) {
        return Err(CausticaError::StepUnderflow { estimate: error });
    }
    Ok(Derivative { value: coarse, error })
}

/// Real finite difference of `order` along the unit vector `dir`, two Richardson levels.
fn fd_directional(field: &FieldFn, x: &[f64], alpha: f64, dir: &[f64], order: usize) -> Result<f64> {
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h0 = f64::EPSILON.powf(1.0 / (order as f64 + 6.0)) * scale;
    let mut buf = vec![0.0; x.len()];
    let mut eval = |s: f64| -> f64 {
        for ((b, xi), di) in buf.iter_mut().zip(x).zip(dir) {
            *b = xi + s * di;
        }
        field(&buf, alpha)
    };
    let mut stencil = |h: f64| -> f64 {
        match order {
            1 => (eval(h) - eval(-h)) / (2.0 * h),
            2 => (eval(h) - 2.0 * eval(0.0) + eval(-h)) / (h * h),
            _ => (eval(2.0 * h) - 2.0 * eval(h) + 2.0 * eval(-h) - eval(-2.0 * h)) / (2.0 * h * h * h),
        }
    };
    let d0 = stencil(h0);
    let d1 = stencil(0.5 * h0);
    let d2 = stencil(0.25 * h0);
    let r01 = (4.0 * d1 - d0) / 3.0;
    let r12 = (4.0 * d2 - d1) / 3.0;
    let r = (16.0 * r12 - r01) / 15.0;
    let error = (r - r12).abs();
    if !error.is_finite() || error > DERIVATIVE_TOLERANCE * r.abs().max(1.0) {
        return Err(CausticaError::StepUnderflow { estimate: error });
    }
    Ok(r)
}

/// Directional derivative of order 1..=3 along a unit vector.
pub fn derive_nd(intg: &IntegrandND, x: &[f64], alpha: f64, direction: &[f64], order: usize) -> Result<f64> {
    if x.len() != intg.dim || direction.len() != intg.dim {
        return Err(CausticaError::BadParameter("dimension mismatch".into()));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(CausticaError::BadParameter(format!("direction norm {norm} is not 1")));
    }
    match order {
        1 => match &intg.grad {
            Some(_) => Ok(intg.gradient(x, alpha)?.iter().zip(direction).map(|(g, d)| g * d).sum()),
            None => fd_directional(&intg.field, x, alpha, direction, 1),
        },
        2 => match &intg.hessian {
            Some(_) => {
                let h = intg.hessian(x, alpha)?;
                let n = intg.dim;
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += direction[i] * h[i * n + j] * direction[j];
                    }
                }
                Ok(s)
            }
            None => fd_directional(&intg.field, x, alpha, direction, 2),
        },
        3 => match &intg.third {
            Some(t) => Ok(t(x, alpha, direction, direction, direction)),
            None => fd_directional(&intg.field, x, alpha, direction, 3),
        },
        _ => Err(CausticaError::BadParameter(format!("derivative order {order} not in 1..=3"))),
    }
}

/// `log cosh(u)` in the overflow-safe form `|u| + log(1 + e^{-2|u|}) - log 2`
/// (sign taken from the real part for complex `u`).
pub fn log_cosh(u: ComplexScalar) -> ComplexScalar {
    let s = if u.re >= 0.0 { u } else { -u };
    s + (ComplexScalar::new(1.0, 0.0) + (-2.0 * s).exp()).ln() - core::f64::consts::LN_2
}

/// Fold point of the mean-field toy, `(γ̂, σ̃)`, from the reduced condition
/// `u - sinh(2u)/2 = m` with `u = σ + m < 0`, solved by bisection.
pub fn mean_field_fold(m: f64) -> (f64, f64) {
    if m == 0.0 {
        return (1.0, 0.0);
    }
    let h = |u: f64| u - (2.0 * u).sinh() / 2.0 - m;
    let (mut lo, mut hi) = (-1.0f64, 0.0f64);
    while h(lo) < 0.0 {
        lo *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    (u.cosh().powi(2), u - m)
}

/// Either kind of registry integrand.
#[derive(Debug, Clone)]
pub enum RegistryIntegrand {
    OneD(Integrand1D),
    ND(IntegrandND),
}

impl RegistryIntegrand {
    pub fn one_d(self) -> Option<Integrand1D> {
        match self {
            Self::OneD(i) => Some(i),
            Self::ND(_) => None,
        }
    }

    pub fn nd(self) -> Option<IntegrandND> {
        match self {
            Self::ND(i) => Some(i),
            Self::OneD(_) => None,
        }
    }
}

/// A named built-in family.
pub struct RegistryEntry {
    pub name: &'static str,
    /// `(key, default, description)`; a NaN default marks an optional key.
    pub parameters: &'static [(&'static str, f64, &'static str)],
    pub summary: &'static str,
    pub builder: fn(&Params) -> Result<RegistryIntegrand>,
}

pub const REGISTRY: &[RegistryEntry] = &[
    RegistryEntry {
        name: "cubic",
        parameters: &[],
        summary: "f = z^3/3 - alpha z, g = 1, Airy contour; alpha >= 0",
        builder: build_cubic,
    },
    RegistryEntry {
        name: "perturbed-cubic",
        parameters: &[("eps", 0.05, "quartic coefficient, > 0")],
        summary: "f = z^3/3 - alpha z + eps z^4, g = 1, Airy contour; alpha >= 0",
        builder: build_perturbed_cubic,
    },
    RegistryEntry {
        name: "bessel-sinh",
        parameters: &[("shift", 0.4, "real part of the vertical contour segment")],
        summary: "J_N(N alpha) = (1/2 pi i) int exp(N(alpha sinh z - z)) dz; 0 < alpha <= 1",
        builder: build_bessel_sinh,
    },
    RegistryEntry {
        name: "mean-field-toy",
        parameters: &[("m", 0.1, "explicit symmetry breaking (current mass), >= 0")],
        summary: "f = -sigma^2/(2 gamma) + log cosh(sigma + m) on the real line; alpha = gamma",
        builder: build_mean_field,
    },
    RegistryEntry {
        name: "nd-perturbed-cubic",
        parameters: &[
            ("eps", 0.05, "quartic coefficient of x1, > 0"),
            ("c", 0.1, "coupling c x1 x2^2"),
            ("lambda2", -1.0, "stiff curvature, < 0"),
            ("lambda3", f64::NAN, "optional, < 0"),
            ("lambda4", f64::NAN, "optional, < 0"),
        ],
        summary: "F = x1^3/3 - alpha x1 + eps x1^4 + sum lambda_i x_i^2/2 + c x1 x2^2",
        builder: build_nd_perturbed,
    },
    RegistryEntry {
        name: "nd-separable",
        parameters: &[
            ("eps", 0.05, "quartic coefficient of x1, > 0"),
            ("lambda2", -1.0, "stiff curvature, < 0"),
            ("lambda3", f64::NAN, "optional, < 0"),
            ("lambda4", f64::NAN, "optional, < 0"),
        ],
        summary: "nd-perturbed-cubic with c = 0",
        builder: build_nd_separable,
    },
];

/// Builds a registry integrand by name.
pub fn registry_get(name: &str, params: &Params) -> Result<RegistryIntegrand> {
    let entry = REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CausticaError::UnknownIntegrand(name.to_string()))?;
    for key in params.keys() {
        if !entry.parameters.iter().any(|(k, _, _)| k == key) {
            return Err(CausticaError::BadParameter(format!("`{key}` is not a parameter of {name}")));
        }
    }
    (entry.builder)(params)
}

fn param(params: &Params, key: &str, default: f64) -> Result<f64> {
    let v = params.get(key).copied().unwrap_or(default);
    if v.is_nan() && !default.is_nan() {
        return Err(CausticaError::BadParameter(format!("{key} is NaN")));
    }
    Ok(v)
}

fn c(re: f64) -> ComplexScalar {
    ComplexScalar::new(re, 0.0)
}

fn unit_amplitude() -> AmplitudeFn {
    Arc::new(|_| c(1.0))
}

fn cubic_like(name: &str, eps: f64) -> Integrand1D {
    let f: ScalarFn = Arc::new(move |z, a| z * z * z / 3.0 - z * a + z.powi(4) * eps);
    let d1: ScalarFn = Arc::new(move |z, a| z * z - a + z.powi(3) * (4.0 * eps));
    let d2: ScalarFn = Arc::new(move |z, _| z * 2.0 + z * z * (12.0 * eps));
    let d3: ScalarFn = Arc::new(move |z, _| c(2.0) + z * (24.0 * eps));
    let d4: ScalarFn = Arc::new(move |_, _| c(24.0 * eps));
    let mut intg = Integrand1D::new(name, f, unit_amplitude(), ContourPath::airy(c(0.0)))
        .with_derivatives([d1, d2, d3, d4])
        .with_saddle_guess(Arc::new(|a: f64| c(a.max(0.0).sqrt())))
        .with_caustic_guess(0.0, c(0.0));
    intg.alpha_hat_hint = Some(0.0);
    intg.alpha_range = (0.0, 2.0);
    intg
}

fn build_cubic(_: &Params) -> Result<RegistryIntegrand> {
    Ok(RegistryIntegrand::OneD(cubic_like("cubic", 0.0)))
}

fn build_perturbed_cubic(p: &Params) -> Result<RegistryIntegrand> {
    let eps = param(p, "eps", 0.05)?;
    if !(eps > 0.0) {
        return Err(CausticaError::BadParameter(format!(
            "perturbed-cubic needs eps > 0 for ray convergence, got {eps}"
        )));
    }
    Ok(RegistryIntegrand::OneD(cubic_like("perturbed-cubic", eps)))
}

fn build_bessel_sinh(p: &Params) -> Result<RegistryIntegrand> {
    let shift = param(p, "shift", 0.4)?;
    if !(shift >= 0.0) {
        return Err(CausticaError::BadParameter(format!("shift must be >= 0, got {shift}")));
    }
    let f: ScalarFn = Arc::new(|z, a| z.sinh() * a - z);
    let d1: ScalarFn = Arc::new(|z, a| z.cosh() * a - 1.0);
    let d2: ScalarFn = Arc::new(|z, a| z.sinh() * a);
    let d3: ScalarFn = Arc::new(|z, a| z.cosh() * a);
    let d4: ScalarFn = Arc::new(|z, a| z.sinh() * a);
    let contour = ContourPath::new(
        vec![ComplexScalar::new(shift, -PI), ComplexScalar::new(shift, PI)],
        0.0,
        0.0,
        1,
    )?;
    let mut intg = Integrand1D::new("bessel-sinh", f, unit_amplitude(), contour)
        .with_derivatives([d1, d2, d3, d4])
        .with_prefactor(ComplexScalar::new(0.0, -1.0 / (2.0 * PI)))
        .with_saddle_guess(Arc::new(|a: f64| {
            if a < 1.0 && a > 0.0 {
                c((1.0 / a).acosh())
            } else {
                c(0.0)
            }
        }))
        .with_caustic_guess(1.0, c(0.0));
    intg.alpha_hat_hint = Some(1.0);
    intg.real_result_hint = true;
    intg.alpha_range = (0.3, 1.0);
    Ok(RegistryIntegrand::OneD(intg))
}

fn build_mean_field(p: &Params) -> Result<RegistryIntegrand> {
    let m = param(p, "m", 0.1)?;
    if !(m >= 0.0) {
        return Err(CausticaError::BadParameter(format!("m must be >= 0, got {m}")));
    }
    let f: ScalarFn = Arc::new(move |s, g| -s * s / (2.0 * g) + log_cosh(s + m));
    let d1: ScalarFn = Arc::new(move |s, g| -s / g + (s + m).tanh());
    let d2: ScalarFn = Arc::new(move |s, g| {
        let sech = (s + m).cosh().inv();
        sech * sech - 1.0 / g
    });
    let d3: ScalarFn = Arc::new(move |s, _| {
        let u = s + m;
        let sech = u.cosh().inv();
        sech * sech * u.tanh() * -2.0
    });
    let d4: ScalarFn = Arc::new(move |s, _| {
        let u = s + m;
        let sech2 = u.cosh().inv().powi(2);
        let t = u.tanh();
        sech2 * t * t * 4.0 - sech2 * sech2 * 2.0
    });
    let (gamma_hat, sigma_tilde) = mean_field_fold(m);
    let mut intg = Integrand1D::new("mean-field-toy", f, unit_amplitude(), ContourPath::real_line())
        .with_derivatives([d1, d2, d3, d4])
        .with_saddle_guess(Arc::new(move |g: f64| {
            // global maximum on the sigma > 0 side
            let mut s = g.max(0.1);
            for _ in 0..200 {
                s = g * (s + m).tanh();
            }
            c(s)
        }))
        .with_caustic_guess(gamma_hat, c(sigma_tilde));
    intg.alpha_hat_hint = Some(gamma_hat);
    intg.real_result_hint = true;
    intg.alpha_range = (0.2, 3.0);
    Ok(RegistryIntegrand::OneD(intg))
}

fn stiff_lambdas(p: &Params) -> Result<Vec<f64>> {
    let mut lambdas = vec![param(p, "lambda2", -1.0)?];
    for key in ["lambda3", "lambda4"] {
        if let Some(&v) = p.get(key) {
            lambdas.push(v);
        }
    }
    if p.contains_key("lambda4") && !p.contains_key("lambda3") {
        return Err(CausticaError::BadParameter("lambda4 given without lambda3".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l < 0.0)) {
        return Err(CausticaError::BadParameter(format!("stiff curvatures must be < 0, got {bad}")));
    }
    Ok(lambdas)
}

fn nd_cubic(name: &str, eps: f64, coupling: f64, lambdas: Vec<f64>) -> Result<IntegrandND> {
    let n = lambdas.len() + 1;
    let lam = Arc::new(lambdas);
    let field: FieldFn = {
        let lam = lam.clone();
        Arc::new(move |x, a| {
            let x1 = x[0];
            let mut v = x1 * x1 * x1 / 3.0 - a * x1 + eps * x1.powi(4) + coupling * x1 * x[1] * x[1];
            for (l, xi) in lam.iter().zip(&x[1..]) {
                v += 0.5 * l * xi * xi;
            }
            v
        })
    };
    let grad: GradFn = {
        let lam = lam.clone();
        Arc::new(move |x, a, out| {
            let x1 = x[0];
            out[0] = x1 * x1 - a + 4.0 * eps * x1.powi(3) + coupling * x[1] * x[1];
            for (i, l) in lam.iter().enumerate() {
                out[i + 1] = l * x[i + 1];
            }
            out[1] += 2.0 * coupling * x1 * x[1];
        })
    };
    let hess: HessFn = {
        let lam = lam.clone();
        Arc::new(move |x, _, out| {
            out.iter_mut().for_each(|v| *v = 0.0);
            let x1 = x[0];
            out[0] = 2.0 * x1 + 12.0 * eps * x1 * x1;
            out[1] = 2.0 * coupling * x[1];
            out[n] = 2.0 * coupling * x[1];
            for (i, l) in lam.iter().enumerate() {
                out[(i + 1) * n + i + 1] = *l;
            }
            out[n + 1] += 2.0 * coupling * x1;
        })
    };
    let third: TrilinearFn = Arc::new(move |x, _, a, b, cc| {
        (2.0 + 24.0 * eps * x[0]) * a[0] * b[0] * cc[0]
            + 2.0 * coupling * (a[0] * b[1] * cc[1] + a[1] * b[0] * cc[1] + a[1] * b[1] * cc[0])
    });
    let soft: SoftEvalFn = {
        let lam = lam.clone();
        Arc::new(move |z, rest, a| {
            let mut v = z * z * z / 3.0 - z * a + z.powi(4) * eps + z * (coupling * rest[0] * rest[0]);
            for (l, xi) in lam.iter().zip(rest) {
                v += 0.5 * l * xi * xi;
            }
            v
        })
    };
    let mut intg = IntegrandND::new(name, field, n)?
        .with_analytic(grad, hess, third)
        .with_soft_contour(ContourPath::airy(c(0.0)), soft)
        .with_saddle_guess(Arc::new(move |a: f64| {
            let mut x = vec![0.0; n];
            x[0] = a.max(0.0).sqrt();
            x
        }));
    intg.alpha_hat_hint = Some(0.0);
    intg.domain_note = String::from(
        "x1 on the Airy contour through 0 (rays at -pi/3, pi/3); remaining coordinates on the real \
         line, truncated where the Gaussian envelope is negligible",
    );
    Ok(intg)
}

fn build_nd_perturbed(p: &Params) -> Result<RegistryIntegrand> {
    let eps = param(p, "eps", 0.05)?;
    if !(eps > 0.0) {
        return Err(CausticaError::BadParameter(format!("eps must be > 0, got {eps}")));
    }
    let coupling = param(p, "c", 0.1)?;
    let lambdas = stiff_lambdas(p)?;
    Ok(RegistryIntegrand::ND(nd_cubic("nd-perturbed-cubic", eps, coupling, lambdas)?))
}

fn build_nd_separable(p: &Params) -> Result<RegistryIntegrand> {
    let eps = param(p, "eps", 0.05)?;
    if !(eps > 0.0) {
        return Err(CausticaError::BadParameter(format!("eps must be > 0, got {eps}")));
    }
    let lambdas = stiff_lambdas(p)?;
    Ok(RegistryIntegrand::ND(nd_cubic("nd-separable", eps, 0.0, lambdas)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn one_d(name: &str, kv: &[(&str, f64)]) -> Integrand1D {
        registry_get(name, &params(kv)).unwrap().one_d().unwrap()
    }

    fn nd(name: &str, kv: &[(&str, f64)]) -> IntegrandND {
        registry_get(name, &params(kv)).unwrap().nd().unwrap()
    }

    #[test]
    fn cubic_third_derivative_is_two() {
        let cubic = one_d("cubic", &[]);
        for z in [c(0.0), ComplexScalar::new(1.3, -0.7), c(-4.0)] {
            assert_eq!(derive(&cubic, z, 0.3, 3).unwrap().value, c(2.0));
            let num = derive_numeric(&cubic, z, 0.3, 3, 1e-6).unwrap();
            assert!((num.value - c(2.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn bessel_derivatives_at_caustic() {
        let b = one_d("bessel-sinh", &[]);
        assert_eq!(derive(&b, c(0.0), 1.0, 2).unwrap().value, c(0.0));
        assert_eq!(derive(&b, c(0.0), 1.0, 3).unwrap().value, c(1.0));
        let num = derive_numeric(&b, c(0.0), 1.0, 2, 1e-6).unwrap();
        assert!(num.value.norm() < 1e-10);
    }

    #[test]
    fn derive_rejects_bad_order() {
        let b = one_d("bessel-sinh", &[]);
        assert!(derive(&b, c(0.0), 1.0, 5).is_err());
        assert!(derive(&b, c(0.0), 1.0, 0).is_err());
    }

    #[test]
    fn numeric_and_analytic_derivatives_agree_on_contours() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut unif = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for (name, alpha) in [
            ("cubic", 0.3),
            ("perturbed-cubic", 0.2),
            ("bessel-sinh", 0.9),
            ("mean-field-toy", 1.2),
        ] {
            let intg = one_d(name, &[]);
            let pieces = intg.contour.pieces();
            for _ in 0..20 {
                let piece = &pieces[(unif() * pieces.len() as f64) as usize % pieces.len()];
                let t = match piece {
                    ContourPiece::Segment { .. } => unif(),
                    _ => 2.0 * unif(),
                };
                let z = ContourPath::point_on(piece, t);
                for order in 1..=4 {
                    let exact = intg.analytic_derivative(order, z, alpha).unwrap();
                    let num = derive_numeric(&intg, z, alpha, order, 1e-6).unwrap().value;
                    let scale = exact.norm().max(1e-3);
                    assert!(
                        (num - exact).norm() <= 1e-7 * scale,
                        "{name} order {order} at {z}: {num} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn numeric_fallback_through_derive() {
        let intg = one_d("bessel-sinh", &[]).without_derivatives();
        let d = derive(&intg, c(0.5), 0.8, 2).unwrap();
        assert!((d.value - c(0.8 * 0.5f64.sinh())).norm() < 1e-10);
        assert!(d.error > 0.0);
    }

    #[test]
    fn rays_converge_for_registry() {
        one_d("cubic", &[]).check_rays(&[0.0, 0.5, 2.0]).unwrap();
        one_d("perturbed-cubic", &[]).check_rays(&[0.0, 0.5, 2.0]).unwrap();
        one_d("bessel-sinh", &[]).check_rays(&[0.3, 0.8, 1.0]).unwrap();
        one_d("mean-field-toy", &[]).check_rays(&[0.2, 1.3, 3.0]).unwrap();
    }

    #[test]
    fn ray_check_catches_wrong_direction() {
        let mut intg = one_d("cubic", &[]);
        intg.contour = ContourPath::new(vec![c(0.0)], PI, 0.0, 1).unwrap();
        assert_eq!(intg.check_rays(&[0.1]), Err(CausticaError::RayDivergence));
    }

    #[test]
    fn registry_examples() {
        let b = one_d("bessel-sinh", &[]);
        assert_eq!(b.alpha_hat_hint, Some(1.0));
        assert!(b.real_result_hint);
        let sep = nd("nd-separable", &[("lambda2", -1.0)]);
        assert_eq!(sep.dim, 2);
        let three = nd("nd-separable", &[("lambda2", -1.0), ("lambda3", -2.0)]);
        assert_eq!(three.dim, 3);
    }

    #[test]
    fn registry_errors() {
        assert!(matches!(
            registry_get("airy-squared", &Params::new()),
            Err(CausticaError::UnknownIntegrand(_))
        ));
        assert!(matches!(
            registry_get("perturbed-cubic", &params(&[("eps", 0.0)])),
            Err(CausticaError::BadParameter(_))
        ));
        assert!(matches!(
            registry_get("perturbed-cubic", &params(&[("eps", -0.1)])),
            Err(CausticaError::BadParameter(_))
        ));
        assert!(matches!(
            registry_get("nd-separable", &params(&[("c", 0.1)])),
            Err(CausticaError::BadParameter(_))
        ));
        assert!(matches!(
            registry_get("nd-perturbed-cubic", &params(&[("lambda2", 0.5)])),
            Err(CausticaError::BadParameter(_))
        ));
        assert!(matches!(
            registry_get("mean-field-toy", &params(&[("m", -0.1)])),
            Err(CausticaError::BadParameter(_))
        ));
    }

    #[test]
    fn contour_validation() {
        assert!(ContourPath::new(vec![], 0.0, 0.0, 1).is_err());
        assert!(ContourPath::new(vec![c(1.0), c(1.0)], 0.0, 0.0, 1).is_err());
        assert!(ContourPath::new(vec![c(1.0)], -PI, 0.0, 1).is_err());
        assert!(ContourPath::new(vec![c(1.0)], 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn tangents() {
        let b = one_d("bessel-sinh", &[]);
        let t = b.contour.tangent_near(c(0.6));
        assert!((t - ComplexScalar::new(0.0, 1.0)).norm() < 1e-12);
        let airy = ContourPath::airy(c(0.0));
        let t0 = airy.tangent_near(c(0.0));
        assert!((t0 - ComplexScalar::new(0.0, 1.0)).norm() < 1e-12);
        assert!(airy.tangent_near(c(0.3)).im > 0.0);
        assert!((ContourPath::real_line().tangent_near(c(-2.0)) - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn separable_second_derivative_along_e2() {
        let sep = nd("nd-separable", &[("lambda2", -1.7)]);
        let v = derive_nd(&sep, &[0.3, 0.2], 0.09, &[0.0, 1.0], 2).unwrap();
        assert!((v + 1.7).abs() < 1e-14);
        let numeric = sep.clone().without_analytic();
        let v = derive_nd(&numeric, &[0.3, 0.2], 0.09, &[0.0, 1.0], 2).unwrap();
        assert!((v + 1.7).abs() < 1e-8);
    }

    #[test]
    fn nd_third_derivative_at_origin() {
        let intg = nd("nd-perturbed-cubic", &[("eps", 0.05)]);
        let v = derive_nd(&intg, &[0.0, 0.0], 0.0, &[1.0, 0.0], 3).unwrap();
        assert_eq!(v, 2.0);
        let numeric = intg.clone().without_analytic();
        let v = derive_nd(&numeric, &[0.0, 0.0], 0.0, &[1.0, 0.0], 3).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
        // nd-perturbed-cubic with eps -> 0 limit of the cubic term
        let tiny = nd("nd-perturbed-cubic", &[("eps", 1e-300)]);
        assert_eq!(derive_nd(&tiny, &[0.0, 0.0], 0.0, &[1.0, 0.0], 3).unwrap(), 2.0);
    }

    #[test]
    fn derive_nd_rejects_non_unit_direction() {
        let intg = nd("nd-separable", &[]);
        assert!(derive_nd(&intg, &[0.0, 0.0], 0.0, &[1.0, 1.0], 2).is_err());
    }

    #[test]
    fn numeric_hessian_and_trilinear_match_analytic() {
        let intg = nd("nd-perturbed-cubic", &[("lambda3", -2.5)]);
        let numeric = intg.clone().without_analytic();
        let x = [0.31, -0.2, 0.4];
        let h = intg.hessian(&x, 0.1).unwrap();
        let hn = numeric.hessian(&x, 0.1).unwrap();
        for (a, b) in h.iter().zip(&hn) {
            assert!((a - b).abs() < 1e-7 * a.abs().max(1.0));
        }
        assert!(intg.hessian_is_symmetric(&x, 0.1).unwrap());
        let a = [0.6, 0.8, 0.0];
        let b = [0.0, 0.6, 0.8];
        let c3 = [1.0, 0.0, 0.0];
        let exact = intg.trilinear(&x, 0.1, &a, &b, &b).unwrap();
        let num = numeric.trilinear(&x, 0.1, &a, &b, &b).unwrap();
        assert!((exact - num).abs() < 1e-6, "{exact} vs {num}");
        let exact = intg.trilinear(&x, 0.1, &a, &b, &c3).unwrap();
        let num = numeric.trilinear(&x, 0.1, &a, &b, &c3).unwrap();
        assert!((exact - num).abs() < 1e-6, "{exact} vs {num}");
    }

    #[test]
    fn mean_field_fold_satisfies_conditions() {
        for m in [0.05, 0.1, 0.3] {
            let (g, s) = mean_field_fold(m);
            let intg = one_d("mean-field-toy", &[("m", m)]);
            assert!(intg.analytic_derivative(1, c(s), g).unwrap().norm() < 1e-12);
            assert!(intg.analytic_derivative(2, c(s), g).unwrap().norm() < 1e-12);
        }
        assert_eq!(mean_field_fold(0.0), (1.0, 0.0));
    }

    #[test]
    fn log_cosh_is_overflow_safe() {
        let v = log_cosh(c(800.0));
        assert!((v.re - (800.0 - core::f64::consts::LN_2)).abs() < 1e-12);
        let v = log_cosh(c(-0.3));
        assert!((v.re - 0.3f64.cosh().ln()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hessian_quadratic_forms_along_eigendirections(x1 in -0.5f64..0.8, x2 in -0.5f64..0.5, theta in 0.0f64..core::f64::consts::TAU) {
            let intg = nd("nd-perturbed-cubic", &[]);
            let numeric = intg.clone().without_analytic();
            let d = [theta.cos(), theta.sin()];
            let exact = derive_nd(&intg, &[x1, x2], 0.2, &d, 2).unwrap();
            let num = derive_nd(&numeric, &[x1, x2], 0.2, &d, 2).unwrap();
            prop_assert!((exact - num).abs() <= 1e-7 * exact.abs().max(1.0));
        }
    }
}
