//! Saddle points, the fold expansion point and n-D soft-mode data.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CausticaError, Result};
use crate::integrand::{derive, derive_nd, Integrand1D, IntegrandND};
use crate::linalg::{norm, solve, symmetric_eigen};
use crate::ComplexScalar;
// inherent f64 math is std-only; under no_std it comes from libm
#[allow(unused_imports)]
use num_traits::Float;

pub const MAX_ITERATIONS: usize = 50;
/// Relative residual target for all Newton solves.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// `|f'''|` below this fraction of its reference scale is a higher-order catastrophe.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleInfo {
    pub z0: ComplexScalar,
    pub f0: ComplexScalar,
    pub f2: ComplexScalar,
    pub f3: ComplexScalar,
    /// `|f'(z0)|`, re-evaluated after the solve.
    pub residual: f64,
    pub iterations: usize,
    /// Set when `|f3|` is below the degeneracy threshold.
    pub f3_degenerate: bool,
}

/// Expansion-point data at one value of `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildePoint {
    pub alpha: f64,
    pub z: ComplexScalar,
    pub f0: ComplexScalar,
    pub f1: ComplexScalar,
    pub f3: ComplexScalar,
    /// `|f''(z̃, α)|`.
    pub residual: f64,
}

/// The fold: `(z̃, α̂)` with `f' = f'' = 0`, and a server for `z̃(α)`.
#[derive(Debug, Clone)]
pub struct CausticInfo {
    pub z_tilde: ComplexScalar,
    pub alpha_hat: f64,
    pub f3_tilde: ComplexScalar,
    pub iterations: usize,
    intg: Integrand1D,
}

fn d(intg: &Integrand1D, z: ComplexScalar, alpha: f64, order: usize) -> Result<ComplexScalar> {
    Ok(derive(intg, z, alpha, order)?.value)
}

fn finite(z: ComplexScalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Newton iteration on `f'(z) = 0` with residual-based step damping.
pub fn find_saddle(intg: &Integrand1D, alpha: f64, guess: ComplexScalar) -> Result<SaddleInfo> {
    let mut z = guess;
    let mut f1 = d(intg, z, alpha, 1)?;
    let mut iterations = 0;
    let tol = |z: ComplexScalar, f2: ComplexScalar| RESIDUAL_TOLERANCE * z.norm().max(1.0) * f2.norm().max(1.0);
    loop {
        let f2 = d(intg, z, alpha, 2)?;
        if f1.norm() <= tol(z, f2) {
            // one more step to reach rounding level; kept only if it does not hurt
            if f2.norm() > 0.0 {
                let w = z - f1 / f2;
                if finite(w) && d(intg, w, alpha, 1)?.norm() <= f1.norm() {
                    z = w;
                }
            }
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(CausticaError::NoConvergence {
                what: "saddle",
                iterations,
                residual: f1.norm(),
            });
        }
        iterations += 1;
        let mut step = if f2.norm() > 0.0 {
            -f1 / f2
        } else {
            // flat point: take a cubic-model step
            let f3 = d(intg, z, alpha, 3)?;
            if f3.norm() == 0.0 {
                return Err(CausticaError::NoConvergence {
                    what: "saddle",
                    iterations,
                    residual: f1.norm(),
                });
            }
            (-f1 * 2.0 / f3).sqrt()
        };
        let mut accepted = false;
        for _ in 0..12 {
            let trial = z + step;
            if finite(trial) {
                let g = d(intg, trial, alpha, 1)?;
                if finite(g) && g.norm() < f1.norm() {
                    z = trial;
                    f1 = g;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no decrease available: take the full step and let the next iteration judge
            z += step;
            f1 = d(intg, z, alpha, 1)?;
            if !finite(f1) {
                return Err(CausticaError::NoConvergence {
                    what: "saddle",
                    iterations,
                    residual: f64::INFINITY,
                });
            }
        }
    }
    z = polish_flat_saddle(intg, alpha, z)?;
    saddle_info(intg, alpha, z, iterations)
}

/// At a near-coalescence the saddle is a near-double root of `f'`; Newton on `f''`
/// lands on the exact flat point whenever that point is still a saddle within tolerance.
fn polish_flat_saddle(intg: &Integrand1D, alpha: f64, z: ComplexScalar) -> Result<ComplexScalar> {
    let f2 = d(intg, z, alpha, 2)?;
    let f3 = d(intg, z, alpha, 3)?;
    let tol = RESIDUAL_TOLERANCE * z.norm().max(1.0);
    if f3.norm() == 0.0 || f2.norm() > 10.0 * (2.0 * f3.norm() * tol).sqrt() {
        return Ok(z);
    }
    let mut w = z;
    for _ in 0..8 {
        let g2 = d(intg, w, alpha, 2)?;
        let g3 = d(intg, w, alpha, 3)?;
        if g3.norm() == 0.0 {
            return Ok(z);
        }
        w -= g2 / g3;
    }
    let f1 = d(intg, w, alpha, 1)?;
    let f1_old = d(intg, z, alpha, 1)?;
    Ok(if finite(w) && f1.norm() <= tol.max(f1_old.norm()) { w } else { z })
}

fn saddle_info(intg: &Integrand1D, alpha: f64, z: ComplexScalar, iterations: usize) -> Result<SaddleInfo> {
    let f2 = d(intg, z, alpha, 2)?;
    let f3 = d(intg, z, alpha, 3)?;
    Ok(SaddleInfo {
        z0: z,
        f0: intg.f(z, alpha),
        f2,
        f3,
        residual: d(intg, z, alpha, 1)?.norm(),
        iterations,
        f3_degenerate: f3.norm() < DEGENERACY_THRESHOLD,
    })
}

/// Joint Newton on `(f', f'') = (0, 0)` over `(z, α)` with real `α`.
pub fn find_caustic(intg: &Integrand1D, alpha_guess: f64, z_guess: ComplexScalar) -> Result<CausticInfo> {
    let mut z = z_guess;
    let mut alpha = alpha_guess;
    let reference_f3 = d(intg, z, alpha, 3)?.norm();
    let mut iterations = 0;
    loop {
        let f1 = d(intg, z, alpha, 1)?;
        let f2 = d(intg, z, alpha, 2)?;
        let tol = RESIDUAL_TOLERANCE * z.norm().max(1.0).max(alpha.abs());
        if f1.norm() <= tol && f2.norm() <= tol {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(CausticaError::NoConvergence {
                what: "caustic",
                iterations,
                residual: f1.norm().max(f2.norm()),
            });
        }
        iterations += 1;
        let f3 = d(intg, z, alpha, 3)?;
        let h = 1e-6 * alpha.abs().max(1.0);
        let f1a = (d(intg, z, alpha + h, 1)? - d(intg, z, alpha - h, 1)?) / (2.0 * h);
        let f2a = (d(intg, z, alpha + h, 2)? - d(intg, z, alpha - h, 2)?) / (2.0 * h);
        let det = f2 * f2a - f1a * f3;
        if det.norm() == 0.0 || !finite(det) {
            return Err(CausticaError::NoConvergence {
                what: "caustic",
                iterations,
                residual: f1.norm().max(f2.norm()),
            });
        }
        let dz = (-f1 * f2a + f1a * f2) / det;
        let da = (-f2 * f2 + f3 * f1) / det;
        z += dz;
        alpha += da.re;
        if !finite(z) || !alpha.is_finite() {
            return Err(CausticaError::NoConvergence {
                what: "caustic",
                iterations,
                residual: f64::INFINITY,
            });
        }
    }
    let f3 = d(intg, z, alpha, 3)?;
    let scale = reference_f3.max(1.0);
    if f3.norm() < DEGENERACY_THRESHOLD * scale {
        return Err(CausticaError::DegenerateCubic { z, alpha, f3 });
    }
    Ok(CausticInfo {
        z_tilde: z,
        alpha_hat: alpha,
        f3_tilde: f3,
        iterations,
        intg: intg.clone(),
    })
}

impl CausticInfo {
    /// `z̃(α)` by Newton on `f''(z, α) = 0`, seeded from `z̃(α̂)`.
    pub fn at(&self, alpha: f64) -> Result<TildePoint> {
        self.at_seeded(alpha, self.z_tilde)
    }

    /// As [`CausticInfo::at`] with an explicit seed (continuation along a sweep).
    pub fn at_seeded(&self, alpha: f64, seed: ComplexScalar) -> Result<TildePoint> {
        let intg = &self.intg;
        let mut z = seed;
        let mut iterations = 0;
        loop {
            let f2 = d(intg, z, alpha, 2)?;
            let f3 = d(intg, z, alpha, 3)?;
            if f2.norm() <= RESIDUAL_TOLERANCE * z.norm().max(1.0) * f3.norm().max(1.0) {
                return Ok(TildePoint {
                    alpha,
                    z,
                    f0: intg.f(z, alpha),
                    f1: d(intg, z, alpha, 1)?,
                    f3,
                    residual: f2.norm(),
                });
            }
            if iterations >= MAX_ITERATIONS || f3.norm() == 0.0 {
                return Err(CausticaError::NoConvergence {
                    what: "expansion point",
                    iterations,
                    residual: f2.norm(),
                });
            }
            iterations += 1;
            z -= f2 / f3;
            if !finite(z) {
                return Err(CausticaError::NoConvergence {
                    what: "expansion point",
                    iterations,
                    residual: f64::INFINITY,
                });
            }
        }
    }

    /// `f'(z̃(α), α)`.
    pub fn f1_tilde(&self, alpha: f64) -> Result<ComplexScalar> {
        Ok(self.at(alpha)?.f1)
    }

    pub fn integrand(&self) -> &Integrand1D {
        &self.intg
    }
}

/// The second saddle of the coalescing pair, seeded at `z0 − 2 f''/f'''`.
pub fn find_partner(intg: &Integrand1D, alpha: f64, s: &SaddleInfo) -> Result<SaddleInfo> {
    if s.f3.norm() == 0.0 {
        return Err(CausticaError::PartnerNotFound("f''' vanishes at the saddle".into()));
    }
    let offset = s.f2 * 2.0 / s.f3;
    let seed = s.z0 - offset;
    let collapse = 1e-6 * s.z0.norm().max(1.0);
    if offset.norm() <= collapse {
        return Err(CausticaError::PartnerNotFound(format!(
            "saddles coalesced at {} (separation {:.3e})",
            s.z0,
            offset.norm()
        )));
    }
    let p = find_saddle(intg, alpha, seed).map_err(|e| CausticaError::PartnerNotFound(format!("{e}")))?;
    let dist = (p.z0 - s.z0).norm();
    if dist <= collapse {
        return Err(CausticaError::PartnerNotFound(format!("Newton fell back onto {}", s.z0)));
    }
    if (p.z0 - seed).norm() > 2.0 * offset.norm() {
        return Err(CausticaError::PartnerNotFound(format!(
            "Newton left the partner basin (landed at {})",
            p.z0
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdSaddleInfo {
    pub x0: Vec<f64>,
    pub f0: f64,
    pub grad_residual: f64,
    /// Row-major, symmetric.
    pub hessian: Vec<f64>,
    /// Ascending `|λ|`; `eigenvalues[0]` is the soft mode.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; the soft vector is oriented so that `a111 ≥ 0`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub a111: f64,
    /// `F'''[v_i, v_1, v_1]` for `i ≥ 2` (index 0 is `i = 2`).
    pub a_i11: Vec<f64>,
    pub iterations: usize,
}

/// Newton on the gradient, then soft-mode analysis of the Hessian.
pub fn find_saddle_nd(intg: &IntegrandND, alpha: f64, guess: &[f64]) -> Result<NdSaddleInfo> {
    let n = intg.dim;
    if guess.len() != n {
        return Err(CausticaError::BadParameter(format!(
            "guess has {} coordinates, integrand has {n}",
            guess.len()
        )));
    }
    let mut x = guess.to_vec();
    let mut g = intg.gradient(&x, alpha)?;
    let mut iterations = 0;
    let tol = |x: &[f64]| RESIDUAL_TOLERANCE * norm(x).max(1.0);
    while norm(&g) > tol(&x) {
        if iterations >= MAX_ITERATIONS {
            return Err(CausticaError::NoConvergence {
                what: "n-d saddle",
                iterations,
                residual: norm(&g),
            });
        }
        iterations += 1;
        let h = intg.hessian(&x, alpha)?;
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let Some(mut step) = solve(&h, &rhs) else {
            return Err(CausticaError::NoConvergence {
                what: "n-d saddle (singular Hessian)",
                iterations,
                residual: norm(&g),
            });
        };
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            if trial.iter().all(|v| v.is_finite()) {
                let gt = intg.gradient(&trial, alpha)?;
                if norm(&gt) < norm(&g) {
                    x = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
        if !accepted {
            x.iter_mut().zip(&step).for_each(|(a, b)| *a += b);
            g = intg.gradient(&x, alpha)?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(CausticaError::NoConvergence {
                    what: "n-d saddle",
                    iterations,
                    residual: f64::INFINITY,
                });
            }
        }
    }
    let x = polish_flat_saddle_nd(intg, alpha, x)?;
    analyze_nd(intg, alpha, x, iterations)
}

fn soft_direction(intg: &IntegrandND, x: &[f64], alpha: f64) -> Result<(f64, Vec<f64>)> {
    let h = intg.hessian(x, alpha)?;
    let e = symmetric_eigen(&h, intg.dim)?;
    Ok((e.values[0], e.vectors[0].clone()))
}

fn polish_flat_saddle_nd(intg: &IntegrandND, alpha: f64, x: Vec<f64>) -> Result<Vec<f64>> {
    let (lambda, v) = soft_direction(intg, &x, alpha)?;
    let a = derive_nd(intg, &x, alpha, &v, 3)?;
    let tol = RESIDUAL_TOLERANCE * norm(&x).max(1.0);
    if a == 0.0 || lambda.abs() > 10.0 * (2.0 * a.abs() * tol).sqrt() {
        return Ok(x);
    }
    let mut w = x.clone();
    for _ in 0..8 {
        let l = derive_nd(intg, &w, alpha, &v, 2)?;
        let t = derive_nd(intg, &w, alpha, &v, 3)?;
        if t == 0.0 {
            return Ok(x);
        }
        let s = l / t;
        w.iter_mut().zip(&v).for_each(|(wi, vi)| *wi -= s * vi);
    }
    let before = norm(&intg.gradient(&x, alpha)?);
    let after = norm(&intg.gradient(&w, alpha)?);
    Ok(if w.iter().all(|v| v.is_finite()) && after <= tol.max(before) { w } else { x })
}

fn analyze_nd(intg: &IntegrandND, alpha: f64, x: Vec<f64>, iterations: usize) -> Result<NdSaddleInfo> {
    let n = intg.dim;
    let grad_residual = norm(&intg.gradient(&x, alpha)?);
    let hessian = intg.hessian(&x, alpha)?;
    let eig = symmetric_eigen(&hessian, n)?;
    let (l1, l2) = (eig.values[0].abs(), eig.values[1].abs());
    if l2 - l1 <= 1e-9 * l2.max(1e-300) {
        return Err(CausticaError::WrongRegime(format!(
            "two equally soft modes (|λ| = {l1:.6e}, {l2:.6e})"
        )));
    }
    if let Some(bad) = eig.values[1..].iter().find(|l| **l >= 0.0) {
        return Err(CausticaError::WrongRegime(format!(
            "stiff eigenvalue {bad:.6e} is not negative"
        )));
    }
    let mut vectors = eig.vectors;
    let mut a111 = intg.trilinear(&x, alpha, &vectors[0], &vectors[0], &vectors[0])?;
    if a111 < 0.0 {
        vectors[0].iter_mut().for_each(|v| *v = -*v);
        a111 = -a111;
    }
    let v1 = vectors[0].clone();
    let a_i11 = vectors[1..]
        .iter()
        .map(|vi| intg.trilinear(&x, alpha, vi, &v1, &v1))
        .collect::<Result<Vec<_>>>()?;
    Ok(NdSaddleInfo {
        f0: intg.value(&x, alpha),
        x0: x,
        grad_residual,
        hessian,
        eigenvalues: eig.values,
        eigenvectors: vectors,
        a111,
        a_i11,
        iterations,
    })
}

impl NdSaddleInfo {
    pub fn soft_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn soft_vector(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    /// Largest deviation of `VᵀV` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.eigenvectors.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = self.eigenvectors[i].iter().zip(&self.eigenvectors[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Seeds for the two saddles born at the fold, `z̃ ± √(−2 f'(z̃)/f'''(z̃))`.
pub fn fold_pair_seeds(t: &TildePoint) -> Option<[ComplexScalar; 2]> {
    if t.f3.norm() == 0.0 {
        return None;
    }
    let r = (-t.f1 * 2.0 / t.f3).sqrt();
    finite(r).then_some([t.z + r, t.z - r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::{mean_field_fold, registry_get, Params};
    use proptest::prelude::*;

    fn c(re: f64) -> ComplexScalar {
        ComplexScalar::new(re, 0.0)
    }

    fn one_d(name: &str, kv: &[(&str, f64)]) -> Integrand1D {
        let p: Params = kv.iter().map(|(k, v)| ((*k).into(), *v)).collect();
        registry_get(name, &p).unwrap().one_d().unwrap()
    }

    fn nd(name: &str, kv: &[(&str, f64)]) -> IntegrandND {
        let p: Params = kv.iter().map(|(k, v)| ((*k).into(), *v)).collect();
        registry_get(name, &p).unwrap().nd().unwrap()
    }

    #[test]
    fn bessel_saddle_closed_form() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 0.8, c(0.5)).unwrap();
        assert!((s.z0 - c((1.0f64 / 0.8).acosh())).norm() < 1e-13);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn cubic_saddle_is_exact() {
        let cubic = one_d("cubic", &[]);
        let s = find_saddle(&cubic, 0.25, c(-0.4)).unwrap();
        assert!((s.z0 - c(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn bessel_saddle_at_caustic_is_flat() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 1.0, c(0.1)).unwrap();
        assert_eq!(s.z0, c(0.0));
        assert_eq!(s.f2, c(0.0));
        assert!(!s.f3_degenerate);
    }

    #[test]
    fn saddle_no_convergence() {
        // f' = α cosh z − 1 has no real root for α > 1 and the guess drifts
        let b = one_d("bessel-sinh", &[]);
        let r = find_saddle(&b, 1.0e9, c(0.5));
        assert!(r.is_err() || r.unwrap().residual <= 1e-3);
    }

    #[test]
    fn caustic_examples() {
        let b = one_d("bessel-sinh", &[]);
        let k = find_caustic(&b, 0.9, c(0.2)).unwrap();
        assert!(k.z_tilde.norm() < 1e-12 && (k.alpha_hat - 1.0).abs() < 1e-12);
        let cubic = one_d("cubic", &[]);
        let k = find_caustic(&cubic, 0.3, c(0.2)).unwrap();
        assert!(k.z_tilde.norm() < 1e-12 && k.alpha_hat.abs() < 1e-12);
    }

    #[test]
    fn mean_field_caustic_residual() {
        let mf = one_d("mean-field-toy", &[("m", 0.05)]);
        let (g, s) = mf.caustic_guess().unwrap();
        let k = find_caustic(&mf, g + 0.05, s + 0.05).unwrap();
        let f2 = derive(&mf, k.z_tilde, k.alpha_hat, 2).unwrap().value;
        assert!(f2.norm() < 1e-10);
        let (gh, st) = mean_field_fold(0.05);
        assert!((k.alpha_hat - gh).abs() < 1e-10 && (k.z_tilde.re - st).abs() < 1e-9);
    }

    #[test]
    fn mean_field_chiral_limit_is_degenerate() {
        let mf = one_d("mean-field-toy", &[("m", 0.0)]);
        let r = find_caustic(&mf, 1.0, c(0.0));
        assert!(matches!(r, Err(CausticaError::DegenerateCubic { .. })), "{r:?}");
    }

    #[test]
    fn tilde_served_per_alpha() {
        let pc = one_d("perturbed-cubic", &[]);
        let k = find_caustic(&pc, 0.1, c(0.1)).unwrap();
        for a in [0.0, 0.05, 0.2] {
            let t = k.at(a).unwrap();
            assert!(derive(&pc, t.z, a, 2).unwrap().value.norm() <= 1e-12);
            assert!((t.f1 - k.f1_tilde(a).unwrap()).norm() == 0.0);
        }
    }

    #[test]
    fn partner_examples() {
        let b = one_d("bessel-sinh", &[]);
        let s = find_saddle(&b, 0.95, c(0.3)).unwrap();
        let p = find_partner(&b, 0.95, &s).unwrap();
        assert!((p.z0 + s.z0).norm() < 1e-12, "{} {}", p.z0, s.z0);
        let fa = b.f(s.z0, 0.95);
        let fb = b.f(p.z0, 0.95);
        let direct = b.f(-s.z0, 0.95);
        assert!(((fa + fb) * 0.5 - (fa + direct) * 0.5).norm() < 1e-12);

        let cubic = one_d("cubic", &[]);
        let s = find_saddle(&cubic, 0.04, c(-0.2)).unwrap();
        let p = find_partner(&cubic, 0.04, &s).unwrap();
        assert!((p.z0 - c(0.2)).norm() < 1e-14);

        let s = find_saddle(&b, 1.0, c(0.1)).unwrap();
        assert!(matches!(find_partner(&b, 1.0, &s), Err(CausticaError::PartnerNotFound(_))));
    }

    #[test]
    fn nd_separable_saddle() {
        let sep = nd("nd-separable", &[("lambda2", -1.0), ("eps", 0.05)]);
        let s = find_saddle_nd(&sep, 0.09, &[0.3, 0.1]).unwrap();
        assert!(s.x0[1].abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
        assert!(s.a_i11[0].abs() < 1e-12);
        assert!(s.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn nd_a111_matches_analytic() {
        let pc = nd("nd-perturbed-cubic", &[("c", 0.1)]);
        let numeric = pc.clone().without_analytic();
        for intg in [&pc, &numeric] {
            let s = find_saddle_nd(intg, 0.09, &[0.3, 0.0]).unwrap();
            let x1 = s.x0[0];
            assert!((s.a111 - (2.0 + 24.0 * 0.05 * x1)).abs() < 1e-6, "{}", s.a111);
        }
    }

    #[test]
    fn nd_soft_vector_aligned_with_first_axis() {
        let pc = nd("nd-perturbed-cubic", &[("c", 0.1)]);
        let s = find_saddle_nd(&pc, 0.01, &[0.1, 0.0]).unwrap();
        let angle = s.soft_vector()[0].abs().clamp(-1.0, 1.0).acos();
        assert!(angle <= 0.05);
    }

    #[test]
    fn nd_at_critical_point_is_flat() {
        let pc = nd("nd-perturbed-cubic", &[]);
        let s = find_saddle_nd(&pc, 0.0, &[0.05, 0.01]).unwrap();
        assert!(s.soft_eigenvalue().abs() < 1e-10, "{}", s.soft_eigenvalue());
        assert!(s.grad_residual <= 1e-12);
    }

    #[test]
    fn nd_positive_stiff_mode_is_wrong_regime() {
        // λ₂ > 0 can only arise through the coupling term: 2 c x1 dominates −1
        let pc = nd("nd-perturbed-cubic", &[("c", 2.0), ("lambda2", -0.1)]);
        let r = find_saddle_nd(&pc, 0.09, &[0.3, 0.0]);
        assert!(matches!(r, Err(CausticaError::WrongRegime(_))), "{r:?}");
    }

    #[test]
    fn rotation_invariance_of_soft_data() {
        let pc = nd("nd-perturbed-cubic", &[("lambda3", -2.0)]);
        let s = find_saddle_nd(&pc, 0.05, &[0.2, 0.0, 0.0]).unwrap();
        let (ct, st) = (0.3f64.cos(), 0.3f64.sin());
        let q = [ct, -st, 0.0, st, ct, 0.0, 0.0, 0.0, 1.0];
        let rot = pc.rotated(&q).unwrap();
        let guess: Vec<f64> = (0..3).map(|j| (0..3).map(|i| q[i * 3 + j] * s.x0[i]).sum()).collect();
        let r = find_saddle_nd(&rot, 0.05, &guess).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&r.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.a111 - r.a111).abs() < 1e-12);
        assert!((s.f0 - r.f0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn saddle_to_tilde_distance(alpha in 0.0005f64..0.01) {
            let pc = one_d("perturbed-cubic", &[]);
            let k = find_caustic(&pc, 0.0, c(0.0)).unwrap();
            let s = find_saddle(&pc, alpha, c(alpha.sqrt())).unwrap();
            let t = k.at(alpha).unwrap();
            let est = (s.f2 / s.f3).norm();
            let actual = (t.z - s.z0).norm();
            prop_assert!((actual - est).abs() <= 0.2 * est);
        }

        #[test]
        fn partner_offset_relation(alpha in 0.0005f64..0.01) {
            let pc = one_d("perturbed-cubic", &[]);
            let s = find_saddle(&pc, alpha, c(alpha.sqrt())).unwrap();
            let p = find_partner(&pc, alpha, &s).unwrap();
            let sep = p.z0 - s.z0;
            prop_assert!((sep + s.f2 * 2.0 / s.f3).norm() / sep.norm() <= 0.2);
        }

        #[test]
        fn residuals_hold_independently(alpha in 0.3f64..0.99, shift in 0.0f64..1.0) {
            let b = one_d("bessel-sinh", &[("shift", shift)]);
            let s = find_saddle(&b, alpha, b.saddle_guess(alpha).unwrap()).unwrap();
            let again = (b.f(s.z0 + 1e-7, alpha) - b.f(s.z0 - 1e-7, alpha)).norm() / 2e-7;
            prop_assert!(s.residual <= 1e-12 * s.z0.norm().max(1.0) * s.f2.norm().max(1.0));
            prop_assert!(again < 1e-6);
        }
    }
}
