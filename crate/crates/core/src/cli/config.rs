use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::CommonArgs;
use crate::error::{Error, Result};
use crate::model::WeightFunction;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Constant,
    Gaussian,
    Table(WeightFunction),
}

impl WeightKind {
    pub fn label(&self) -> &'static str {
        match self {
            WeightKind::Constant => "constant",
            WeightKind::Gaussian => "gaussian",
            WeightKind::Table(_) => "table",
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub weight: WeightKind,
    pub weight_source: String,
    pub u: Vec<f64>,
    pub veff: Vec<f64>,
    pub big_v: Option<f64>,
    pub big_b: Option<f64>,
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub phase_n: Option<usize>,
    pub out: Option<PathBuf>,
    pub include_cl: bool,
    pub include_wehrl: bool,
    pub include_large_u: bool,
}

const KEYS: &[&str] = &[
    "weight", "u", "veff", "V", "B", "grid-n", "grid-l", "phase-n", "out", "no-cl", "wehrl",
];

impl RunConfig {
    pub fn fig1() -> BTreeMap<String, String> {
        [("weight", "gaussian"), ("u", "1,8"), ("veff", "0:8:33")]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    /// Merges defaults, then the config file, then command-line flags.
    pub fn resolve(args: &CommonArgs, defaults: Option<BTreeMap<String, String>>) -> Result<Self> {
        let mut kv = defaults.unwrap_or_default();
        if let Some(path) = &args.config {
            kv.extend(read_config(path)?);
        }
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.insert(k.to_string(), v);
            }
        };
        set("weight", args.weight.clone());
        set("u", args.u.clone());
        set("veff", args.veff.clone());
        set("V", args.big_v.map(|x| x.to_string()));
        set("B", args.big_b.map(|x| x.to_string()));
        set("grid-n", args.grid_n.map(|x| x.to_string()));
        set("grid-l", args.grid_l.map(|x| x.to_string()));
        set("phase-n", args.phase_n.map(|x| x.to_string()));
        set("out", args.out.as_ref().map(|p| p.display().to_string()));
        if args.no_cl {
            set("no-cl", Some("true".into()));
        }
        if args.wehrl {
            set("wehrl", Some("true".into()));
        }
        Self::from_map(&kv)
    }

    pub fn from_map(kv: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| kv.get(k).map(|s| s.trim());
        let weight_source = get("weight").unwrap_or("gaussian").to_string();
        let weight = parse_weight(&weight_source)?;
        let u = get("u").map(parse_range).transpose()?.unwrap_or_default();
        let veff = get("veff").map(parse_range).transpose()?.unwrap_or_default();
        if let Some(x) = u.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::InvalidConfig(format!("u must be >= 0, got {x}")));
        }
        if let Some(x) = veff.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::InvalidConfig(format!("v_eff must be >= 0, got {x}")));
        }
        let num = |k: &str| -> Result<Option<f64>> {
            get(k)
                .map(|s| s.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("{k}: not a number: {s}"))))
                .transpose()
        };
        let count = |k: &str| -> Result<Option<usize>> {
            get(k)
                .map(|s| s.parse::<usize>().map_err(|_| Error::InvalidConfig(format!("{k}: not a count: {s}"))))
                .transpose()
        };
        let flag = |k: &str| -> Result<bool> {
            match get(k) {
                None | Some("false") | Some("0") | Some("no") => Ok(false),
                Some("true") | Some("1") | Some("yes") => Ok(true),
                Some(s) => Err(Error::InvalidConfig(format!("{k}: expected true/false, got {s}"))),
            }
        };
        let is_gaussian = weight == WeightKind::Gaussian;
        Ok(Self {
            weight,
            weight_source,
            u,
            veff,
            big_v: num("V")?,
            big_b: num("B")?,
            grid_n: count("grid-n")?,
            grid_l: num("grid-l")?,
            phase_n: count("phase-n")?,
            out: get("out").map(PathBuf::from),
            include_cl: !flag("no-cl")?,
            include_wehrl: flag("wehrl")?,
            include_large_u: is_gaussian,
        })
    }
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
    let mut kv = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("{}:{}: expected `key = value`", path.display(), lineno + 1))
        })?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::InvalidConfig(format!("{}:{}: unknown key `{k}`", path.display(), lineno + 1)));
        }
        kv.insert(k, v.trim().to_string());
    }
    Ok(kv)
}

/// `a,b,c` or `lo:hi:count` (inclusive, evenly spaced).
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidConfig(format!("bad value list `{s}`: {what}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let values = match parts.as_slice() {
        [lo, hi, n] => {
            let lo: f64 = lo.parse().map_err(|_| bad("lo"))?;
            let hi: f64 = hi.parse().map_err(|_| bad("hi"))?;
            let n: usize = n.parse().map_err(|_| bad("count"))?;
            match n {
                0 => return Err(bad("count must be >= 1")),
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad(t)))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(bad("expected a list or lo:hi:count")),
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    Ok(values)
}

fn parse_weight(s: &str) -> Result<WeightKind> {
    match s {
        "constant" => Ok(WeightKind::Constant),
        "gaussian" => Ok(WeightKind::Gaussian),
        _ => match s.strip_prefix("table:") {
            Some(path) => Ok(WeightKind::Table(read_table(Path::new(path))?)),
            None => Err(Error::InvalidConfig(format!(
                "unknown weight `{s}` (expected constant, gaussian or table:<path>)"
            ))),
        },
    }
}

/// Whitespace-separated `R re [im]` lines; `#` starts a comment.
pub fn read_table(path: &Path) -> Result<WeightFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read weight table {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidConfig(format!("{}:{}: not numeric", path.display(), lineno + 1)))?;
        match cols.as_slice() {
            [r, re] => samples.push((*r, Complex64::new(*re, 0.0))),
            [r, re, im] => samples.push((*r, Complex64::new(*re, *im))),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "{}:{}: expected 2 or 3 columns",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    WeightFunction::tabulated(samples).map_err(|e| Error::InvalidConfig(e.to_string()))
}
