//! `critical` and `demo-meanfield`.

use std::fmt::Write as _;

use caustica_core::asymnd::{mean_field_compare, MeanFieldRow};
use caustica_core::integrand::{registry_get, Params, RegistryIntegrand};
use caustica_core::saddle::{find_caustic, find_saddle_nd, DEGENERACY_THRESHOLD};
use caustica_core::{CausticaError, ComplexScalar};
use serde_json::json;

use crate::config::AlphaSpec;
use crate::{fmt_f64, Failure};

/// Location of the fold of a registered integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalReport {
    pub name: String,
    pub alpha_hat: f64,
    /// `z̃` for one-variable integrands, the saddle point for n-variable ones.
    pub point: Vec<ComplexScalar>,
    /// `f'''(z̃, α̂)`, or `a111` along the soft mode.
    pub third: ComplexScalar,
    pub degenerate: bool,
    pub iterations: usize,
}

impl CriticalReport {
    pub fn to_text(&self) -> String {
        let point: Vec<String> = self.point.iter().map(|z| format!("{:.12} {:+.12}i", z.re, z.im)).collect();
        let mut s = String::new();
        let _ = writeln!(s, "integrand:  {}", self.name);
        let _ = writeln!(s, "alpha_hat:  {:.6}", self.alpha_hat);
        let _ = writeln!(s, "z_tilde:    {}", point.join(", "));
        let _ = writeln!(s, "f3_tilde:   {:.12} {:+.12}i", self.third.re, self.third.im);
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let _ = writeln!(
            s,
            "degenerate: {}",
            if self.degenerate { "yes (third derivative vanishes; no fold)" } else { "no" }
        );
        s
    }

    pub fn to_json(&self) -> String {
        let point: Vec<[f64; 2]> = self.point.iter().map(|z| [z.re, z.im]).collect();
        json!({
            "integrand": self.name,
            "alpha_hat": self.alpha_hat,
            "z_tilde": point,
            "f3_tilde": [self.third.re, self.third.im],
            "iterations": self.iterations,
            "degenerate": self.degenerate,
        })
        .to_string()
    }
}

/// Runs the fold search; a vanishing third derivative is reported, not raised.
pub fn critical(name: &str, params: &Params, alpha_guess: Option<f64>, z_guess: Option<f64>) -> Result<CriticalReport, Failure> {
    match registry_get(name, params).map_err(Failure::from_core)? {
        RegistryIntegrand::OneD(intg) => {
            let (a0, z0) = intg.caustic_guess().unwrap_or((intg.alpha_hat_hint.unwrap_or(0.0), ComplexScalar::new(0.0, 0.0)));
            let a0 = alpha_guess.unwrap_or(a0);
            let z0 = z_guess.map_or(z0, |z| ComplexScalar::new(z, 0.0));
            match find_caustic(&intg, a0, z0) {
                Ok(c) => Ok(CriticalReport {
                    name: intg.name.clone(),
                    alpha_hat: c.alpha_hat,
                    point: vec![c.z_tilde],
                    third: c.f3_tilde,
                    degenerate: false,
                    iterations: c.iterations,
                }),
                Err(CausticaError::DegenerateCubic { z, alpha, f3 }) => Ok(CriticalReport {
                    name: intg.name.clone(),
                    alpha_hat: alpha,
                    point: vec![z],
                    third: f3,
                    degenerate: true,
                    iterations: 0,
                }),
                Err(e) => Err(Failure::Solver(e)),
            }
        }
        RegistryIntegrand::ND(intg) => {
            let alpha = alpha_guess.or(intg.alpha_hat_hint).unwrap_or(0.0);
            let mut guess = intg.saddle_guess(alpha).unwrap_or_else(|| vec![0.0; intg.dim]);
            if let Some(z) = z_guess {
                guess[0] = z;
            }
            let s = find_saddle_nd(&intg, alpha, &guess).map_err(Failure::Solver)?;
            Ok(CriticalReport {
                name: intg.name.clone(),
                alpha_hat: alpha,
                point: s.x0.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect(),
                third: ComplexScalar::new(s.a111, 0.0),
                degenerate: s.a111.abs() < DEGENERACY_THRESHOLD,
                iterations: s.iterations,
            })
        }
    }
}

#[derive(Debug)]
pub struct DemoOutput {
    pub rows: Vec<MeanFieldRow>,
    pub gamma_hat: f64,
    pub summary: String,
}

/// Mean-field toy comparison over a `γ` grid.
pub fn demo_meanfield(m: f64, gamma: &str, ns: &[u32]) -> Result<DemoOutput, Failure> {
    if m == 0.0 {
        return Err(Failure::Config(
            "m = 0 is the chiral limit: the cubic coefficient vanishes by symmetry, so there is no fold to expand around"
                .into(),
        ));
    }
    if !(m > 0.0) {
        return Err(Failure::Config(format!("m must be positive, got {m}")));
    }
    if ns.is_empty() || ns.iter().any(|&n| n < 2) {
        return Err(Failure::Config("every N must be an integer >= 2".into()));
    }
    let gammas = AlphaSpec::parse(gamma).map_err(Failure::Config)?.values();
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0)) {
        return Err(Failure::Config(format!("gamma {g} must be positive")));
    }
    let params: Params = [("m".to_owned(), m)].into_iter().collect();
    let intg = registry_get("mean-field-toy", &params).map_err(Failure::from_core)?.one_d().expect("one-variable");
    let gamma_hat = intg.alpha_hat_hint.expect("fold hint");
    let nf: Vec<f64> = ns.iter().map(|&n| f64::from(n)).collect();
    let rows = mean_field_compare(&intg, &gammas, &nf).map_err(Failure::from_core)?;
    let summary = summarize(&rows, gamma_hat);
    Ok(DemoOutput { rows, gamma_hat, summary })
}

fn summarize(rows: &[MeanFieldRow], gamma_hat: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "critical coupling gamma_hat = {gamma_hat:.10}");
    let worst = rows
        .iter()
        .filter_map(|r| r.exponent_gap().map(|g| (g, r)))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match worst {
        Some((g, r)) => {
            let _ = writeln!(
                s,
                "max leading-exponent discrepancy {g:.3e} at gamma = {:.6}, N = {} (10/N = {:.3e})",
                r.alpha,
                r.n,
                10.0 / r.n
            );
        }
        None => {
            let _ = writeln!(s, "no row has both exponents");
        }
    }
    // the finite-WKB row nearest the fold measures the prefactor mismatch in the caustic window
    let nearest = rows
        .iter()
        .filter(|r| r.prefactor_ratio.is_some())
        .min_by(|a, b| (a.alpha - gamma_hat).abs().total_cmp(&(b.alpha - gamma_hat).abs()));
    if let Some(r) = nearest {
        let _ = writeln!(
            s,
            "caustic-window prefactor ratio |WKB|/|corrected| = {:.6} at gamma = {:.6}, N = {}",
            r.prefactor_ratio.unwrap(),
            r.alpha,
            r.n
        );
    }
    for r in rows.iter().filter(|r| r.wkb.is_none()) {
        let finite = r.corrected.is_some_and(|v| v.norm().is_finite());
        let _ = writeln!(
            s,
            "WKB divergent at gamma = {:.6}, N = {}; corrected {}",
            r.alpha,
            r.n,
            if finite { "finite" } else { "not finite" }
        );
    }
    s
}

pub fn demo_csv(rows: &[MeanFieldRow]) -> std::io::Result<Vec<u8>> {
    let mut out = b"# caustica-csv v1\n".to_vec();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
        w.write_record([
            "gamma",
            "N",
            "leading",
            "wkb_re",
            "wkb_im",
            "corrected_re",
            "corrected_im",
            "wkb_exponent",
            "corrected_exponent",
            "exponent_gap",
            "prefactor_ratio",
            "warnings",
        ])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
        for r in rows {
            let (wr, wi) = r.wkb.map_or(("divergent".into(), "divergent".into()), |v| (fmt_f64(v.re), fmt_f64(v.im)));
            let (cr, ci) = r.corrected.map_or((String::new(), String::new()), |v| (fmt_f64(v.re), fmt_f64(v.im)));
            w.write_record([
                fmt_f64(r.alpha),
                format!("{}", r.n as u32),
                fmt_f64(r.leading),
                wr,
                wi,
                cr,
                ci,
                opt(r.wkb_exponent),
                opt(r.corrected_exponent),
                opt(r.exponent_gap()),
                opt(r.prefactor_ratio),
                r.warnings.join("; "),
            ])?;
        }
        w.flush()?;
    }
    Ok(out)
}
