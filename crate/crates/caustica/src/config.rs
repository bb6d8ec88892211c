//! Sweep configuration: flat `key = value` lines grouped under `[integrand]`,
//! `[params]` and `[sweep]` headers. `#` starts a comment.
//!
//! ```text
//! [integrand]
//! name = bessel-sinh
//!
//! [params]
//! shift = 0.4
//!
//! [sweep]
//! alpha = 0.8:1.0:21      # start:stop:steps, or a comma list
//! N = 30, 60
//! methods = wkb, tilde, saddle, cfu
//! oracle = true
//! tol = 1e-10
//! airy_kind = recessive   # or dominant
//! output = bessel.csv
//! plot = bessel_plot.py
//! ```

use std::path::PathBuf;

use caustica_core::airy::AiryKind;
use caustica_core::asym1d::Method;
use caustica_core::integrand::Params;
use caustica_core::oracle::DEFAULT_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSel {
    OneD(Method),
    WkbNd,
    CorrectedNd,
}

impl MethodSel {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "wkb" => Self::OneD(Method::Wkb),
            "tilde" => Self::OneD(Method::Tilde),
            "saddle" => Self::OneD(Method::SaddleForm),
            "cfu" => Self::OneD(Method::Cfu),
            "wkb-nd" => Self::WkbNd,
            "corrected-nd" => Self::CorrectedNd,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::OneD(m) => m.as_str(),
            Self::WkbNd => "wkb-nd",
            Self::CorrectedNd => "corrected-nd",
        }
    }

    pub fn is_nd(self) -> bool {
        !matches!(self, Self::OneD(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    Range { start: f64, stop: f64, steps: usize },
    List(Vec<f64>),
}

impl AlphaSpec {
    /// `start:stop:steps` or a comma list.
    pub fn parse(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            let [a, b, n] = parts[..] else {
                return Err(format!("range '{s}' must be start:stop:steps"));
            };
            let steps: usize = n.parse().map_err(|_| format!("steps '{n}' is not a positive integer"))?;
            if steps < 1 {
                return Err("steps must be at least 1".into());
            }
            Ok(Self::Range { start: parse_f64(a)?, stop: parse_f64(b)?, steps })
        } else {
            let list = split_list(s).map(parse_f64).collect::<Result<Vec<_>, _>>()?;
            if list.is_empty() {
                return Err("empty alpha list".into());
            }
            Ok(Self::List(list))
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            Self::List(ref v) => v.clone(),
            Self::Range { start, steps: 1, .. } => vec![start],
            Self::Range { start, stop, steps } => (0..steps)
                .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub integrand: String,
    pub params: Params,
    pub alpha: AlphaSpec,
    pub ns: Vec<u32>,
    pub methods: Vec<MethodSel>,
    pub oracle: bool,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub airy_kind: Option<AiryKind>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_airy_kind(s: &str) -> Result<AiryKind, String> {
    match s {
        "recessive" | "ai" => Ok(AiryKind::Recessive),
        "dominant" | "bi" => Ok(AiryKind::Dominant),
        _ => Err(format!("airy_kind '{s}' must be recessive or dominant")),
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut section = String::new();
        let mut name = None;
        let mut params = Params::new();
        let mut alpha = None;
        let mut ns = None;
        let mut methods = None;
        let mut oracle = false;
        let mut tol = DEFAULT_TOLERANCE;
        let mut output = None;
        let mut plot = None;
        let mut airy_kind = None;

        for (lineno, raw) in text.lines().enumerate() {
            let at = |msg: String| format!("line {}: {msg}", lineno + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('[') {
                let h = h.strip_suffix(']').ok_or_else(|| at(format!("malformed header '{line}'")))?;
                if !matches!(h, "integrand" | "params" | "sweep") {
                    return Err(at(format!("unknown section [{h}]")));
                }
                section = h.to_owned();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| at(format!("expected key = value, got '{line}'")))?;
            match (section.as_str(), key) {
                ("integrand", "name") => name = Some(value.to_owned()),
                ("params", k) => {
                    params.insert(k.to_owned(), parse_f64(value).map_err(at)?);
                }
                ("sweep", "alpha") => alpha = Some(AlphaSpec::parse(value).map_err(at)?),
                ("sweep", "N") => {
                    let list = split_list(value)
                        .map(|t| t.parse::<u32>().map_err(|_| format!("N '{t}' is not an integer")))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at)?;
                    if list.is_empty() || list.iter().any(|&n| n < 2) {
                        return Err(at("every N must be an integer >= 2".into()));
                    }
                    ns = Some(list);
                }
                ("sweep", "methods") => {
                    let list = split_list(value)
                        .map(|t| MethodSel::parse(t).ok_or_else(|| format!("unknown method '{t}'")))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at)?;
                    if list.is_empty() {
                        return Err(at("no methods given".into()));
                    }
                    methods = Some(list);
                }
                ("sweep", "oracle") => {
                    oracle = match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(at(format!("oracle '{value}' must be true or false"))),
                    }
                }
                ("sweep", "tol") => {
                    tol = parse_f64(value).map_err(at)?;
                    // below this, rounding in the integrand dominates any certificate
                    if !(1e-14..1.0).contains(&tol) {
                        return Err(at(format!("tol {tol} must lie in [1e-14, 1)")));
                    }
                }
                ("sweep", "output") => output = Some(PathBuf::from(value)),
                ("sweep", "plot") => plot = Some(PathBuf::from(value)),
                ("sweep", "airy_kind") => airy_kind = Some(parse_airy_kind(value).map_err(at)?),
                ("", _) => return Err(at(format!("key '{key}' outside any section"))),
                (s, _) => return Err(at(format!("unknown key '{key}' in [{s}]"))),
            }
        }

        let methods: Vec<MethodSel> = methods.ok_or("missing [sweep] methods")?;
        if methods.iter().any(|m| m.is_nd()) && methods.iter().any(|m| !m.is_nd()) {
            return Err("one-variable and n-variable methods cannot be mixed".into());
        }
        Ok(Self {
            integrand: name.ok_or("missing [integrand] name")?,
            params,
            alpha: alpha.ok_or("missing [sweep] alpha")?,
            ns: ns.ok_or("missing [sweep] N")?,
            methods,
            oracle,
            tol,
            output,
            plot,
            airy_kind,
        })
    }
}
