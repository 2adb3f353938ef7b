//! Text formats: OPZ process files, precedence DAG files and model
//! configurations.
//!
//! OPZ is line oriented. The first meaningful line is the header `opz 1`,
//! every further line is an edge `e j k t` giving the switching time of the
//! pair `(j, k)`. `#` starts a comment; blank lines are ignored. Pairs not
//! listed never switch on.
//!
//! ```text
//! opz 1
//! # two jobs finishing at 0.5
//! e 0 1 0.5
//! e 1 0 0.5
//! ```
//!
//! DAG files list precedences as `d j k` (job `j` must finish before `k`
//! starts). Model configurations are flat `key=value` lines, see
//! [`parse_model_config`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::measures::{BaseRelation, Durations, MeasureError, MeasureModel};
use crate::process::{OrderProcess, ProcessError};
use crate::relation::{Element, Pair, PartialOrder};

pub const OPZ_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] ProcessError),
    #[error(transparent)]
    Model(#[from] MeasureError),
}

impl FormatError {
    fn parse(line: usize, msg: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

/// How [`parse_opz`] treats edge sets that violate the max-triangle rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    /// Reject them.
    Strict,
    /// Replace the edges by their minimax closure.
    Close,
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Meaningful lines with their 1-based numbers and comments stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let fields: Vec<&str> = l.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_element(line: usize, s: &str) -> Result<Element, FormatError> {
    s.parse()
        .map_err(|_| FormatError::parse(line, format!("bad element `{s}`")))
}

fn parse_time(line: usize, s: &str) -> Result<f64, FormatError> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(FormatError::parse(
            line,
            format!("bad switching time `{s}`: need a finite nonnegative decimal"),
        )),
    }
}

pub fn parse_opz(text: &str, mode: LoadMode) -> Result<OrderProcess, FormatError> {
    let mut it = lines(text);
    match it.next() {
        Some((_, f)) if f == ["opz", "1"] => {}
        Some((line, f)) if f.first() == Some(&"opz") => {
            return Err(FormatError::parse(
                line,
                format!("unsupported version `{}`", f[1..].join(" ")),
            ))
        }
        Some((line, _)) => return Err(FormatError::parse(line, "missing `opz 1` header")),
        None => return Err(FormatError::parse(1, "missing `opz 1` header")),
    }
    let mut times: BTreeMap<Pair, f64> = BTreeMap::new();
    for (line, f) in it {
        let [tag, j, k, t] = f[..] else {
            return Err(FormatError::parse(line, "expected `e j k t`"));
        };
        if tag != "e" {
            return Err(FormatError::parse(line, format!("unknown record `{tag}`")));
        }
        let (j, k) = (parse_element(line, j)?, parse_element(line, k)?);
        if j == k {
            return Err(FormatError::parse(line, format!("diagonal pair ({j},{j})")));
        }
        let t = parse_time(line, t)?;
        if times.insert((j, k), t).is_some() {
            return Err(FormatError::parse(
                line,
                format!("duplicate pair ({j},{k})"),
            ));
        }
    }
    Ok(match mode {
        LoadMode::Strict => OrderProcess::new(times)?,
        LoadMode::Close => OrderProcess::closure(times)?,
    })
}

pub fn load_opz(path: impl AsRef<Path>, mode: LoadMode) -> Result<OrderProcess, FormatError> {
    parse_opz(&read(path.as_ref())?, mode)
}

/// OPZ text with edges sorted by pair and shortest round-trip decimals.
pub fn to_opz_string(z: &OrderProcess) -> String {
    let mut out = format!("opz {OPZ_VERSION}\n");
    for ((j, k), t) in z.iter() {
        writeln!(out, "e {j} {k} {t}").expect("write to string");
    }
    out
}

pub fn save_opz(z: &OrderProcess, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, to_opz_string(z)).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses `d j k` precedence lines into their transitive closure.
pub fn parse_dag(text: &str) -> Result<PartialOrder, FormatError> {
    let mut raw = Vec::new();
    for (line, f) in lines(text) {
        let ["d", j, k] = f[..] else {
            return Err(FormatError::parse(line, "expected `d j k`"));
        };
        let (j, k) = (parse_element(line, j)?, parse_element(line, k)?);
        if j == k {
            return Err(FormatError::parse(
                line,
                format!("job {j} cannot precede itself"),
            ));
        }
        raw.push((j, k));
    }
    Ok(PartialOrder::closure(raw))
}

pub fn load_dag(path: impl AsRef<Path>) -> Result<PartialOrder, FormatError> {
    parse_dag(&read(path.as_ref())?)
}

fn parse_durations(line: usize, s: &str) -> Result<Durations, FormatError> {
    let bad = || FormatError::parse(line, format!("bad dist `{s}`: use uniform:a,b or exp:rate"));
    let (kind, args) = s.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match (kind, &nums[..]) {
        ("uniform", &[lo, hi]) => Ok(Durations::Uniform { lo, hi }),
        ("exp", &[rate]) => Ok(Durations::Exponential { rate }),
        _ => Err(bad()),
    }
}

/// Parses a model configuration. Relative paths (`z=`, `base=dag:`, `mix=`)
/// resolve against `base_dir`.
///
/// | key       | kinds                    | value                          |
/// |-----------|--------------------------|--------------------------------|
/// | `model`   | all                      | `dirac`, `completion`, `edge_minimax`, `mixture` |
/// | `n`       | all (optional for mixture) | window size                  |
/// | `dist`    | completion, edge_minimax | `uniform:a,b` or `exp:rate`    |
/// | `base`    | completion               | `full` (default) or `dag:<path>` |
/// | `permute` | completion               | `on` or `off` (default)        |
/// | `z`       | dirac                    | path of an OPZ file            |
/// | `mix`     | mixture                  | `w:path,w:path,...`            |
pub fn parse_model_config(text: &str, base_dir: &Path) -> Result<MeasureModel, FormatError> {
    let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| FormatError::parse(line, "expected key=value"))?;
        if kv.insert(k.trim(), (line, v.trim())).is_some() {
            return Err(FormatError::parse(
                line,
                format!("duplicate key `{}`", k.trim()),
            ));
        }
    }
    let (mline, kind) = kv
        .get("model")
        .copied()
        .ok_or_else(|| FormatError::parse(1, "missing `model`"))?;
    let allowed: &[&str] = match kind {
        "dirac" => &["model", "n", "z"],
        "completion" => &["model", "n", "dist", "base", "permute"],
        "edge_minimax" => &["model", "n", "dist"],
        "mixture" => &["model", "n", "mix"],
        other => {
            return Err(FormatError::parse(
                mline,
                format!("unknown model `{other}`"),
            ))
        }
    };
    if let Some((k, (line, _))) = kv.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(FormatError::parse(
            *line,
            format!("key `{k}` not valid for model {kind}"),
        ));
    }
    let need = |key: &str| {
        kv.get(key)
            .copied()
            .ok_or_else(|| FormatError::parse(mline, format!("model {kind} needs `{key}`")))
    };
    let window = |required: bool| -> Result<Option<u32>, FormatError> {
        match kv.get("n") {
            Some(&(line, v)) => v
                .parse::<u32>()
                .map(Some)
                .map_err(|_| FormatError::parse(line, format!("bad window `{v}`"))),
            None if required => Err(FormatError::parse(mline, format!("model {kind} needs `n`"))),
            None => Ok(None),
        }
    };
    let resolve = |p: &str| base_dir.join(p);

    let model = match kind {
        "dirac" => {
            let n = window(true)?.expect("required");
            let (_, path) = need("z")?;
            MeasureModel::dirac(n, load_opz(resolve(path), LoadMode::Strict)?)?
        }
        "completion" => {
            let n = window(true)?.expect("required");
            let (dline, dist) = need("dist")?;
            let durations = parse_durations(dline, dist)?;
            let base = match kv.get("base") {
                None | Some((_, "full")) => BaseRelation::Full,
                Some(&(line, b)) => match b.strip_prefix("dag:") {
                    Some(path) => BaseRelation::Dag(load_dag(resolve(path.trim()))?),
                    None => return Err(FormatError::parse(line, format!("bad base `{b}`"))),
                },
            };
            let permute = match kv.get("permute") {
                None | Some((_, "off")) => false,
                Some((_, "on")) => true,
                Some(&(line, v)) => {
                    return Err(FormatError::parse(
                        line,
                        format!("permute must be on|off, got `{v}`"),
                    ))
                }
            };
            MeasureModel::completion(n, durations, base, permute)?
        }
        "edge_minimax" => {
            let n = window(true)?.expect("required");
            let (dline, dist) = need("dist")?;
            MeasureModel::edge_minimax_with(n, parse_durations(dline, dist)?)?
        }
        _ => {
            let (line, mix) = need("mix")?;
            let mut parts = Vec::new();
            for item in mix.split(',') {
                let (w, path) = item
                    .split_once(':')
                    .ok_or_else(|| FormatError::parse(line, format!("bad mix item `{item}`")))?;
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| FormatError::parse(line, format!("bad weight `{w}`")))?;
                parts.push((w, load_model_config(resolve(path.trim()))?));
            }
            let model = MeasureModel::mixture(parts)?;
            if let Some(n) = window(false)? {
                if n != model.window() {
                    return Err(FormatError::parse(
                        line,
                        format!(
                            "mixture window {n} differs from component window {}",
                            model.window()
                        ),
                    ));
                }
            }
            model
        }
    };
    Ok(model)
}

pub fn load_model_config(path: impl AsRef<Path>) -> Result<MeasureModel, FormatError> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    parse_model_config(&read(path)?, dir)
}
