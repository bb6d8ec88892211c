//! Sweep execution and the versioned CSV format.

use std::io::Write;

use caustica_core::asym1d::{
    approx_cfu_with, approx_saddle_form_with, approx_tilde_with, approx_wkb_with, select_tilde_branch,
    ApproxOptions, ApproxValue, Method, Regime, RegimeThresholds,
};
use caustica_core::asymnd::{approx_corrected_nd_with, approx_wkb_nd_with};
use caustica_core::integrand::{registry_get, Integrand1D, IntegrandND, RegistryIntegrand};
use caustica_core::oracle::{cubature_nd, quad_contour_checked};
use caustica_core::saddle::{find_caustic, find_partner, find_saddle, find_saddle_nd, CausticInfo, SaddleInfo};
use caustica_core::{CausticaError, ComplexScalar};
use rayon::prelude::*;

use crate::config::{MethodSel, SweepConfig};
use crate::{fmt_f64, Failure};

pub const CSV_VERSION_LINE: &str = "# caustica-csv v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(ComplexScalar),
    /// Gaussian prefactor blew up at a vanishing curvature.
    Divergent,
    /// The method does not apply here; the reason is in the warnings.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub n: u32,
    pub zeta_prime: Option<f64>,
    pub regime: Option<Regime>,
    /// One cell per configured method, in configuration order.
    pub cells: Vec<Cell>,
    pub oracle: Option<ComplexScalar>,
    pub warnings: Vec<String>,
}

impl SweepRow {
    pub fn rel_err(&self, k: usize) -> Option<f64> {
        match (self.cells[k], self.oracle) {
            (Cell::Value(v), Some(o)) if o.norm() > 0.0 => Some((v - o).norm() / o.norm()),
            _ => None,
        }
    }
}

/// Completed rows in `(α, N)` order, cut at the first failing row.
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub error: Option<Failure>,
}

// built once per sweep, so the size gap between variants is irrelevant
#[allow(clippy::large_enum_variant)]
enum Target {
    OneD { intg: Integrand1D, caustic: Option<CausticInfo>, opts: ApproxOptions },
    Nd { intg: IntegrandND, opts: ApproxOptions },
}

/// Validates the configuration against the registry and pins the tilde branch.
fn prepare(cfg: &SweepConfig) -> Result<Target, Failure> {
    let mut opts = ApproxOptions::default();
    if let Some(kind) = cfg.airy_kind {
        opts.kind = kind;
    }
    let alphas = cfg.alpha.values();
    match registry_get(&cfg.integrand, &cfg.params).map_err(Failure::from_core)? {
        RegistryIntegrand::OneD(intg) => {
            if cfg.methods.iter().any(|m| m.is_nd()) {
                return Err(Failure::Config(format!("{} is one-variable; n-variable methods do not apply", intg.name)));
            }
            let (lo, hi) = intg.alpha_range;
            if let Some(a) = alphas.iter().find(|a| !(lo..=hi).contains(*a)) {
                return Err(Failure::Config(format!("alpha {a} outside the documented range [{lo}, {hi}] of {}", intg.name)));
            }
            let caustic = match intg.caustic_guess() {
                Some((a, z)) => Some(find_caustic(&intg, a, z).map_err(Failure::from_core)?),
                None => None,
            };
            if let Some(c) = &caustic {
                // the branch of largest zeta' is the least ambiguous one
                let n0 = f64::from(cfg.ns[0]);
                let best = alphas
                    .iter()
                    .filter_map(|&a| approx_tilde_with(&intg, a, n0, c, &opts).ok().map(|v| (a, v.zeta.zeta_prime)))
                    .max_by(|x, y| x.1.total_cmp(&y.1));
                if let Some((a, _)) = best {
                    opts.branch = select_tilde_branch(&intg, a, n0, c, opts.kind).ok();
                }
            }
            Ok(Target::OneD { intg, caustic, opts })
        }
        RegistryIntegrand::ND(intg) => {
            if cfg.methods.iter().any(|m| !m.is_nd()) {
                return Err(Failure::Config(format!("{} is n-variable; use wkb-nd or corrected-nd", intg.name)));
            }
            Ok(Target::Nd { intg, opts })
        }
    }
}

fn solver(e: CausticaError) -> Failure {
    Failure::from_core(e)
}

/// Keeps a method result, or records why it does not apply. Non-convergence aborts.
fn cell(result: Result<ApproxValue, CausticaError>, method: &str, warnings: &mut Vec<String>) -> Result<(Cell, Option<f64>), Failure> {
    match result {
        Ok(v) => {
            warnings.extend(v.warnings.iter().cloned());
            Ok((Cell::Value(v.value), Some(v.zeta.zeta_prime)))
        }
        Err(CausticaError::CausticDivergence { .. }) => Ok((Cell::Divergent, None)),
        Err(e @ CausticaError::NoConvergence { .. }) => Err(Failure::Solver(e)),
        Err(e) => {
            warnings.push(format!("{method}: {e}"));
            Ok((Cell::Failed, None))
        }
    }
}

fn row_1d(
    cfg: &SweepConfig,
    intg: &Integrand1D,
    caustic: Option<&CausticInfo>,
    opts: &ApproxOptions,
    alpha: f64,
    n: u32,
) -> Result<SweepRow, Failure> {
    let nf = f64::from(n);
    let mut warnings = Vec::new();
    let needs_saddle = cfg
        .methods
        .iter()
        .any(|m| matches!(m, MethodSel::OneD(Method::Wkb | Method::SaddleForm | Method::Cfu)));
    let saddle: Option<SaddleInfo> = if needs_saddle {
        let guess = intg
            .saddle_guess(alpha)
            .or_else(|| caustic.map(|c| c.z_tilde + 0.1))
            .unwrap_or(ComplexScalar::new(0.1, 0.0));
        Some(find_saddle(intg, alpha, guess).map_err(solver)?)
    } else {
        None
    };
    let tilde_zeta = caustic.and_then(|c| approx_tilde_with(intg, alpha, nf, c, opts).ok()).map(|v| v.zeta.zeta_prime);
    let mut zeta_prime = tilde_zeta;
    let mut cells = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let MethodSel::OneD(method) = *m else { unreachable!("validated in prepare") };
        let missing = || CausticaError::BadParameter(format!("{} has no fold", intg.name));
        let result = match method {
            Method::Wkb => approx_wkb_with(intg, alpha, nf, saddle.as_ref().expect("saddle"), opts),
            Method::Tilde => caustic.ok_or_else(missing).and_then(|c| approx_tilde_with(intg, alpha, nf, c, opts)),
            Method::SaddleForm => caustic
                .ok_or_else(missing)
                .and_then(|c| approx_saddle_form_with(intg, alpha, nf, saddle.as_ref().expect("saddle"), c, opts)),
            Method::Cfu => {
                let s = saddle.as_ref().expect("saddle");
                find_partner(intg, alpha, s).and_then(|p| approx_cfu_with(intg, alpha, nf, s, &p, opts))
            }
        };
        let (c, z) = cell(result, method.as_str(), &mut warnings)?;
        zeta_prime = zeta_prime.or(z);
        cells.push(c);
    }
    let oracle = if cfg.oracle {
        Some(quad_contour_checked(intg, alpha, nf, cfg.tol).map_err(Failure::Oracle)?.value)
    } else {
        None
    };
    Ok(SweepRow {
        alpha,
        n,
        zeta_prime,
        regime: zeta_prime.map(|z| opts.thresholds.classify(z)),
        cells,
        oracle,
        warnings,
    })
}

fn row_nd(cfg: &SweepConfig, intg: &IntegrandND, opts: &ApproxOptions, alpha: f64, n: u32) -> Result<SweepRow, Failure> {
    let nf = f64::from(n);
    let guess = intg.saddle_guess(alpha).unwrap_or_else(|| vec![0.0; intg.dim]);
    let s = find_saddle_nd(intg, alpha, &guess).map_err(solver)?;
    let mut warnings = Vec::new();
    let mut zeta_prime = None;
    let mut cells = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let result = match m {
            MethodSel::WkbNd => approx_wkb_nd_with(intg, alpha, nf, &s, &RegimeThresholds::default()),
            _ => approx_corrected_nd_with(intg, alpha, nf, &s, opts),
        };
        let c = match result {
            Ok(v) => {
                warnings.extend(v.warnings.iter().cloned());
                zeta_prime = zeta_prime.or(Some(v.zeta_prime));
                Cell::Value(v.value)
            }
            Err(CausticaError::CausticDivergence { .. }) => Cell::Divergent,
            Err(e @ CausticaError::NoConvergence { .. }) => return Err(Failure::Solver(e)),
            Err(e) => {
                warnings.push(format!("{}: {e}", m.as_str()));
                Cell::Failed
            }
        };
        cells.push(c);
    }
    let oracle = if cfg.oracle {
        Some(cubature_nd(intg, alpha, nf, cfg.tol).map_err(Failure::Oracle)?.value)
    } else {
        None
    };
    Ok(SweepRow {
        alpha,
        n,
        zeta_prime,
        regime: zeta_prime.map(|z| opts.thresholds.classify(z)),
        cells,
        oracle,
        warnings,
    })
}

/// Runs every `(α, N)` pair in parallel; rows come back α-major, N-minor.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome, Failure> {
    let target = prepare(cfg)?;
    let pairs: Vec<(f64, u32)> = cfg
        .alpha
        .values()
        .into_iter()
        .flat_map(|a| cfg.ns.iter().map(move |&n| (a, n)))
        .collect();
    let results: Vec<Result<SweepRow, Failure>> = pairs
        .par_iter()
        .map(|&(a, n)| match &target {
            Target::OneD { intg, caustic, opts } => row_1d(cfg, intg, caustic.as_ref(), opts, a, n),
            Target::Nd { intg, opts } => row_nd(cfg, intg, opts, a, n),
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => return Ok(SweepOutcome { rows, error: Some(e) }),
        }
    }
    Ok(SweepOutcome { rows, error: None })
}

pub fn header(cfg: &SweepConfig) -> Vec<String> {
    let mut h: Vec<String> = ["alpha", "N", "zeta_prime", "regime"].map(String::from).to_vec();
    for m in &cfg.methods {
        h.push(format!("{}_re", m.as_str()));
        h.push(format!("{}_im", m.as_str()));
    }
    if cfg.oracle {
        h.push("oracle_re".into());
        h.push("oracle_im".into());
        for m in &cfg.methods {
            h.push(format!("{}_rel_err", m.as_str()));
        }
    }
    h.push("warnings".into());
    h
}

fn record(cfg: &SweepConfig, row: &SweepRow) -> Vec<String> {
    let mut r = vec![
        fmt_f64(row.alpha),
        row.n.to_string(),
        row.zeta_prime.map_or(String::new(), fmt_f64),
        row.regime.map_or("", |g| g.as_str()).to_owned(),
    ];
    for c in &row.cells {
        let (re, im) = match c {
            Cell::Value(v) => (fmt_f64(v.re), fmt_f64(v.im)),
            Cell::Divergent => ("divergent".into(), "divergent".into()),
            Cell::Failed => (String::new(), String::new()),
        };
        r.push(re);
        r.push(im);
    }
    if cfg.oracle {
        let o = row.oracle.expect("oracle enabled");
        r.push(fmt_f64(o.re));
        r.push(fmt_f64(o.im));
        for (k, c) in row.cells.iter().enumerate() {
            r.push(match (c, row.rel_err(k)) {
                (Cell::Divergent, _) => "divergent".into(),
                (_, Some(e)) => fmt_f64(e),
                _ => String::new(),
            });
        }
    }
    r.push(row.warnings.join("; "));
    r
}

/// Writes the version line, header, rows and, after a failure, an error trailer.
pub fn write_csv<W: Write>(cfg: &SweepConfig, outcome: &SweepOutcome, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
    w.write_record(header(cfg))?;
    for row in &outcome.rows {
        w.write_record(record(cfg, row))?;
    }
    w.flush()?;
    drop(w);
    if let Some(e) = &outcome.error {
        writeln!(out, "# error (exit {}): {e}", e.exit_code())?;
    }
    out.flush()
}

/// A matplotlib script that plots every method (and the oracle) against alpha, one panel per N.
pub fn plot_script(cfg: &SweepConfig, csv_path: &str) -> String {
    let methods: Vec<String> = cfg.methods.iter().map(|m| format!("{:?}", m.as_str())).collect();
    format!(
        r##"# plots {csv_path}; run with python3
import csv
import matplotlib.pyplot as plt

METHODS = [{methods}]
ORACLE = {oracle}

def num(s):
    try:
        return float(s)
    except ValueError:
        return float("nan")

with open({csv_path:?}) as fh:
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))

ns = sorted({{int(r["N"]) for r in rows}})
fig, axes = plt.subplots(len(ns), 1, figsize=(7, 3.5 * len(ns)), squeeze=False)
for ax, n in zip(axes[:, 0], ns):
    sub = [r for r in rows if int(r["N"]) == n]
    alpha = [num(r["alpha"]) for r in sub]
    for m in METHODS:
        if ORACLE:
            ax.semilogy(alpha, [num(r[m + "_rel_err"]) for r in sub], "o-", label=m)
        else:
            ax.plot(alpha, [num(r[m + "_re"]) for r in sub], "o-", label=m)
    ax.set_title("{name}, N = %d" % n)
    ax.set_xlabel("alpha")
    ax.set_ylabel("relative error" if ORACLE else "Re value")
    ax.legend()
fig.tight_layout()
fig.savefig({png:?})
"##,
        methods = methods.join(", "),
        oracle = if cfg.oracle { "True" } else { "False" },
        name = cfg.integrand,
        png = format!("{}.png", csv_path.trim_end_matches(".csv")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::parse(text).unwrap()
    }

    #[test]
    fn cubic_tilde_is_exact_against_oracle() {
        let c = cfg("[integrand]\nname = cubic\n[sweep]\nalpha = 0, 0.1\nN = 100\nmethods = tilde\noracle = true\n");
        let out = run_sweep(&c).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.rows.len(), 2);
        for r in &out.rows {
            assert!(r.rel_err(0).unwrap() <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn bessel_rows_and_divergence() {
        let c = cfg("[integrand]\nname = bessel-sinh\n[sweep]\nalpha = 0.8:1.0:21\nN = 30\nmethods = wkb, tilde, saddle, cfu\n");
        let out = run_sweep(&c).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.rows.len(), 21);
        let last = out.rows.last().unwrap();
        assert_eq!(last.alpha, 1.0);
        assert_eq!(last.cells[0], Cell::Divergent);
        assert!(matches!(last.cells[1], Cell::Value(v) if v.norm().is_finite()));
        let mut buf = Vec::new();
        write_csv(&c, &out, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# caustica-csv v1\nalpha,N,zeta_prime,regime,wkb_re,wkb_im,"));
        assert_eq!(text.lines().count(), 23);
        assert!(text.lines().last().unwrap().contains("divergent"));
    }

    #[test]
    fn wrong_family_and_range_are_config_errors() {
        let c = cfg("[integrand]\nname = cubic\n[sweep]\nalpha = 0\nN = 10\nmethods = wkb-nd\n");
        assert_eq!(run_sweep(&c).unwrap_err().exit_code(), 2);
        let c = cfg("[integrand]\nname = cubic\n[sweep]\nalpha = 5\nN = 10\nmethods = tilde\n");
        assert_eq!(run_sweep(&c).unwrap_err().exit_code(), 2);
        let c = cfg("[integrand]\nname = nope\n[sweep]\nalpha = 0\nN = 10\nmethods = tilde\n");
        assert_eq!(run_sweep(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn nd_sweep_with_oracle() {
        let c = cfg("[integrand]\nname = nd-perturbed-cubic\n[params]\nc = 0.1\n[sweep]\nalpha = 0, 0.1\nN = 50\nmethods = wkb-nd, corrected-nd\noracle = true\ntol = 1e-8\n");
        let out = run_sweep(&c).unwrap();
        assert!(out.error.is_none(), "{:?}", out.error);
        assert_eq!(out.rows[0].cells[0], Cell::Divergent);
        assert!(out.rows[0].rel_err(1).unwrap() < 0.05);
    }

    #[test]
    fn oracle_failure_keeps_earlier_rows() {
        // at the second alpha the contour misses the saddle and cancellation defeats 1e-10
        let c = cfg("[integrand]\nname = perturbed-cubic\n[sweep]\nalpha = 0.05, 0.757\nN = 35\nmethods = tilde\noracle = true\n");
        let out = run_sweep(&c).unwrap();
        let e = out.error.as_ref().expect("oracle must fail");
        assert_eq!(e.exit_code(), 4);
        let mut buf = Vec::new();
        write_csv(&c, &out, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().starts_with("# error (exit 4)"));
        assert_eq!(out.rows.len(), 1);
    }

    #[test]
    fn csv_is_deterministic() {
        let c = cfg("[integrand]\nname = perturbed-cubic\n[sweep]\nalpha = 0.0:0.5:6\nN = 20, 40\nmethods = wkb, tilde, saddle\n");
        let render = || {
            let mut buf = Vec::new();
            write_csv(&c, &run_sweep(&c).unwrap(), &mut buf).unwrap();
            buf
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn plot_script_mentions_methods() {
        let c = cfg("[integrand]\nname = cubic\n[sweep]\nalpha = 0\nN = 10\nmethods = tilde, wkb\noracle = true\n");
        let s = plot_script(&c, "out.csv");
        assert!(s.contains("METHODS = [\"tilde\", \"wkb\"]") && s.contains("out.png"));
    }
}
