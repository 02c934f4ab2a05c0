//! Plain-text experiment configuration.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, section
//! headers sit in square brackets. Sections: `[dataset]` (at most one),
//! `[method]` (repeatable), `[output]`, `[run]`. Unknown sections and
//! keys are rejected with the offending line number.

use crate::adaptive::{AdmdConfig, FullRankFilter, SketchSpec};
use crate::datasets::{DoubleGyreParams, HiddenDynamicsParams, SurrogateParams};
use crate::error::{AdmdError, Result};
use crate::filters::{DftFilterPolicy, RpcaParams};

/// Which generator to run, with its grid parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    HiddenDynamics(HiddenDynamicsParams),
    DoubleGyre(DoubleGyreParams),
    Surrogate(SurrogateParams),
}

impl DatasetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetSpec::HiddenDynamics(_) => "hidden_dynamics",
            DatasetSpec::DoubleGyre(_) => "double_gyre",
            DatasetSpec::Surrogate(_) => "surrogate",
        }
    }
}

/// A fitting method to run: the plain fit (optionally delay-embedded) or
/// the adaptive pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    Standard { eps_rank: f64, q: usize },
    Adaptive(AdmdConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetSpec>,
    pub methods: Vec<MethodSpec>,
    pub output_dir: Option<String>,
    pub input: Option<String>,
    pub seed: Option<u64>,
    pub strict: Option<bool>,
}

fn cfg_err(line: usize, what: impl Into<String>) -> AdmdError {
    AdmdError::Config {
        line,
        what: what.into(),
    }
}

struct Section {
    name: String,
    header_line: usize,
    entries: Vec<(String, String, usize)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(lineno, "unterminated section header"))?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(cfg_err(lineno, "empty section name"));
            }
            sections.push(Section {
                name,
                header_line: lineno,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(lineno, format!("expected `key = value`, got `{line}`")))?;
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(cfg_err(lineno, "empty key"));
        }
        match sections.last_mut() {
            Some(s) => s.entries.push((key, value, lineno)),
            None => return Err(cfg_err(lineno, "key/value before any [section] header")),
        }
    }
    Ok(sections)
}

fn parse_num<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| cfg_err(line, format!("cannot parse `{value}` for key `{key}`")))
}

fn parse_bool(value: &str, line: usize, key: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(cfg_err(line, format!("cannot parse `{other}` for key `{key}`"))),
    }
}

fn parse_dataset(section: &Section) -> Result<DatasetSpec> {
    let mut name: Option<(String, usize)> = None;
    for (k, v, line) in &section.entries {
        if k == "name" {
            name = Some((v.clone(), *line));
        }
    }
    let (name, name_line) = name.ok_or_else(|| {
        cfg_err(section.header_line, "[dataset] requires a `name` key")
    })?;
    match name.as_str() {
        "hidden_dynamics" => {
            let mut p = HiddenDynamicsParams::default();
            for (k, v, line) in &section.entries {
                match k.as_str() {
                    "name" => {}
                    "nx" => p.nx = parse_num(v, *line, k)?,
                    "nt" => p.nt = parse_num(v, *line, k)?,
                    other => return Err(cfg_err(*line, format!("unknown dataset key `{other}`"))),
                }
            }
            Ok(DatasetSpec::HiddenDynamics(p))
        }
        "double_gyre" => {
            let mut p = DoubleGyreParams::default();
            for (k, v, line) in &section.entries {
                match k.as_str() {
                    "name" => {}
                    "nx" => p.nx = parse_num(v, *line, k)?,
                    "ny" => p.ny = parse_num(v, *line, k)?,
                    "nt" => p.nt = parse_num(v, *line, k)?,
                    "dt" => p.dt = parse_num(v, *line, k)?,
                    other => return Err(cfg_err(*line, format!("unknown dataset key `{other}`"))),
                }
            }
            Ok(DatasetSpec::DoubleGyre(p))
        }
        "surrogate" => {
            let mut p = SurrogateParams::default();
            for (k, v, line) in &section.entries {
                match k.as_str() {
                    "name" => {}
                    "m" => p.m = parse_num(v, *line, k)?,
                    "n" => p.n = parse_num(v, *line, k)?,
                    "waves" => p.waves = parse_num(v, *line, k)?,
                    "noise_std" => p.noise_std = parse_num(v, *line, k)?,
                    "outlier_frac" => p.outlier_frac = parse_num(v, *line, k)?,
                    "outlier_mag" => p.outlier_mag = parse_num(v, *line, k)?,
                    "dt" => p.dt = parse_num(v, *line, k)?,
                    other => return Err(cfg_err(*line, format!("unknown dataset key `{other}`"))),
                }
            }
            Ok(DatasetSpec::Surrogate(p))
        }
        other => Err(cfg_err(name_line, format!("unknown dataset `{other}`"))),
    }
}

fn parse_method(section: &Section) -> Result<MethodSpec> {
    let mut kind = "standard".to_string();
    let mut kind_line = section.header_line;
    let mut label: Option<String> = None;
    for (k, v, line) in &section.entries {
        match k.as_str() {
            "kind" => {
                kind = v.clone();
                kind_line = *line;
            }
            "name" => label = Some(v.clone()),
            _ => {}
        }
    }
    let known_common = ["kind", "name"];
    match kind.as_str() {
        "standard" => {
            let mut eps_rank = crate::dmd::DEFAULT_RANK_EPS;
            let mut q = 1usize;
            for (k, v, line) in &section.entries {
                if known_common.contains(&k.as_str()) {
                    continue;
                }
                match k.as_str() {
                    "eps_rank" => eps_rank = parse_num(v, *line, k)?,
                    "q" => q = parse_num(v, *line, k)?,
                    other => return Err(cfg_err(*line, format!("unknown method key `{other}`"))),
                }
            }
            Ok(MethodSpec {
                name: label.unwrap_or_else(|| "standard".into()),
                kind: MethodKind::Standard { eps_rank, q },
            })
        }
        "admd" => {
            let mut cfg = AdmdConfig::default();
            let mut sketch_kind = "none".to_string();
            let mut sketch_line = section.header_line;
            let mut a: Option<usize> = None;
            let mut s: u32 = 3;
            let mut filter = "auto".to_string();
            let mut filter_line = section.header_line;
            let mut tau_rel: Option<f64> = None;
            let mut lambda: Option<f64> = None;
            for (k, v, line) in &section.entries {
                if known_common.contains(&k.as_str()) {
                    continue;
                }
                match k.as_str() {
                    "eps_rank" => cfg.eps_rank = parse_num(v, *line, k)?,
                    "rho_lowrank" => cfg.rho_lowrank = parse_num(v, *line, k)?,
                    "q" => cfg.q = parse_num(v, *line, k)?,
                    "sketch" => {
                        sketch_kind = v.clone();
                        sketch_line = *line;
                    }
                    "a" => a = Some(parse_num(v, *line, k)?),
                    "s" => s = parse_num(v, *line, k)?,
                    "filter" => {
                        filter = v.clone();
                        filter_line = *line;
                    }
                    "tau_rel" => tau_rel = Some(parse_num(v, *line, k)?),
                    "lambda" => lambda = Some(parse_num(v, *line, k)?),
                    other => return Err(cfg_err(*line, format!("unknown method key `{other}`"))),
                }
            }
            cfg.sketch = match sketch_kind.as_str() {
                "none" => SketchSpec::None,
                "gaussian" => SketchSpec::Gaussian {
                    a: a.ok_or_else(|| cfg_err(sketch_line, "sketch needs `a`"))?,
                },
                "achlioptas" => SketchSpec::Achlioptas {
                    a: a.ok_or_else(|| cfg_err(sketch_line, "sketch needs `a`"))?,
                    s,
                },
                "rowsample" => SketchSpec::RowSample {
                    a: a.ok_or_else(|| cfg_err(sketch_line, "sketch needs `a`"))?,
                },
                other => {
                    return Err(cfg_err(sketch_line, format!("unknown sketch `{other}`")))
                }
            };
            cfg.fullrank_filter = match filter.as_str() {
                "auto" => FullRankFilter::Auto,
                "dft" => FullRankFilter::Dft(match tau_rel {
                    Some(t) => DftFilterPolicy::new(t)
                        .map_err(|e| cfg_err(filter_line, e.to_string()))?,
                    None => DftFilterPolicy::default(),
                }),
                "ialm" => {
                    let mut params = RpcaParams::default();
                    if let Some(l) = lambda {
                        params.lambda = l;
                    }
                    FullRankFilter::Ialm(params)
                }
                other => {
                    return Err(cfg_err(filter_line, format!("unknown filter `{other}`")))
                }
            };
            Ok(MethodSpec {
                name: label.unwrap_or_else(|| "admd".into()),
                kind: MethodKind::Adaptive(cfg),
            })
        }
        other => Err(cfg_err(kind_line, format!("unknown method kind `{other}`"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sections = split_sections(text)?;
        let mut out = ExperimentConfig::default();
        for section in &sections {
            match section.name.as_str() {
                "dataset" => {
                    if out.dataset.is_some() {
                        return Err(cfg_err(
                            section.header_line,
                            "duplicate [dataset] section",
                        ));
                    }
                    out.dataset = Some(parse_dataset(section)?);
                }
                "method" => out.methods.push(parse_method(section)?),
                "output" => {
                    for (k, v, line) in &section.entries {
                        match k.as_str() {
                            "dir" => out.output_dir = Some(v.clone()),
                            other => {
                                return Err(cfg_err(*line, format!("unknown output key `{other}`")))
                            }
                        }
                    }
                }
                "input" => {
                    for (k, v, line) in &section.entries {
                        match k.as_str() {
                            "path" => out.input = Some(v.clone()),
                            other => {
                                return Err(cfg_err(*line, format!("unknown input key `{other}`")))
                            }
                        }
                    }
                }
                "run" => {
                    for (k, v, line) in &section.entries {
                        match k.as_str() {
                            "seed" => out.seed = Some(parse_num(v, *line, k)?),
                            "strict" => out.strict = Some(parse_bool(v, *line, k)?),
                            other => {
                                return Err(cfg_err(*line, format!("unknown run key `{other}`")))
                            }
                        }
                    }
                }
                other => {
                    return Err(cfg_err(
                        section.header_line,
                        format!("unknown section `[{other}]`"),
                    ))
                }
            }
        }
        Ok(out)
    }
}
