//! Experiment configuration: a flat `key = value` file, with command-line
//! flags overriding file entries.
//!
//! Keys: `code`, `check_rank`, `delta`, `grid`, `f_eff`, `frames`, `seed`,
//! `t`, `h_min`, `out`, `fer_target`, `ceiling`, `max_iter`, `length`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use recon_core::channel::{CalibrationPoint, EfficiencySource};
use recon_core::decoder::DEFAULT_MAX_ITERATIONS;
use recon_core::ldpc::{self, LoadOptions};
use recon_core::ParityCheckCode;

#[derive(Debug, Clone, PartialEq)]
pub enum CodeSource {
    Alist(PathBuf),
    Gallager {
        n: usize,
        col_degree: usize,
        row_degree: usize,
        seed: u64,
    },
}

impl CodeSource {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("alist:") {
            return Ok(CodeSource::Alist(path.into()));
        }
        if let Some(spec) = s.strip_prefix("gallager:") {
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                bail!("expected gallager:<n>,<col_degree>,<row_degree>,<seed>, got {s:?}");
            }
            return Ok(CodeSource::Gallager {
                n: parts[0].parse().context("gallager n")?,
                col_degree: parts[1].parse().context("gallager column degree")?,
                row_degree: parts[2].parse().context("gallager row degree")?,
                seed: parts[3].parse().context("gallager seed")?,
            });
        }
        bail!("code source must start with \"alist:\" or \"gallager:\", got {s:?}")
    }

    pub fn load(&self, check_rank: bool) -> Result<ParityCheckCode> {
        Ok(match self {
            CodeSource::Alist(path) => {
                let bytes =
                    std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                ldpc::load_alist_with(&bytes, LoadOptions { check_rank })
                    .with_context(|| format!("loading {}", path.display()))?
            }
            CodeSource::Gallager {
                n,
                col_degree,
                row_degree,
                seed,
            } => ldpc::generate_gallager(*n, *col_degree, *row_degree, *seed)?,
        })
    }
}

impl fmt::Display for CodeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSource::Alist(p) => write!(f, "alist:{}", p.display()),
            CodeSource::Gallager {
                n,
                col_degree,
                row_degree,
                seed,
            } => write!(f, "gallager:{n},{col_degree},{row_degree},{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EfficiencySpec {
    Constant(f64),
    Table(PathBuf),
}

impl EfficiencySpec {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("table:") {
            return Ok(EfficiencySpec::Table(path.into()));
        }
        let f: f64 = s.parse().with_context(|| format!("f_eff {s:?}"))?;
        if !(f >= 1.0) {
            bail!("f_eff must be at least 1, got {f}");
        }
        Ok(EfficiencySpec::Constant(f))
    }

    pub fn load(&self) -> Result<EfficiencySource> {
        match self {
            EfficiencySpec::Constant(f) => Ok(EfficiencySource::Constant(*f)),
            EfficiencySpec::Table(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(EfficiencySource::Table(parse_table(&text)?))
            }
        }
    }
}

/// Reads calibration lines `p_err f`, where `f` may be `inf`.
pub fn parse_table(text: &str) -> Result<Vec<CalibrationPoint>> {
    let mut points: Vec<CalibrationPoint> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(p), Some(f), None) = (it.next(), it.next(), it.next()) else {
            bail!("calibration table line {}: expected \"p_err f\"", i + 1);
        };
        let p_err: f64 = p
            .parse()
            .with_context(|| format!("calibration table line {}", i + 1))?;
        let f_eff = if f == "inf" {
            None
        } else {
            Some(
                f.parse()
                    .with_context(|| format!("calibration table line {}", i + 1))?,
            )
        };
        if points.last().is_some_and(|last| last.p_err >= p_err) {
            bail!(
                "calibration table line {}: p_err must be strictly increasing",
                i + 1
            );
        }
        points.push(CalibrationPoint { p_err, f_eff });
    }
    Ok(points)
}

pub fn format_table(points: &[CalibrationPoint]) -> String {
    points
        .iter()
        .map(|pt| match pt.f_eff {
            Some(f) => format!("{:.6} {:.2}\n", pt.p_err, f),
            None => format!("{:.6} inf\n", pt.p_err),
        })
        .collect()
}

/// Grid syntax: `a,b,c` or an inclusive range `start:stop:step`. Empty means no points.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .with_context(|| format!("grid {s:?}"))
            })
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            bail!("grid range must be start:stop:step, got {s:?}");
        };
        if !(step > 0.0) {
            bail!("grid step must be positive");
        }
        let count = ((stop - start) / step + 1e-9).floor() as i64 + 1;
        (0..count.max(0))
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .with_context(|| format!("grid {s:?}"))
            })
            .collect::<Result<_>>()?
    };
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 0.5)) {
        bail!("grid point {p} outside (0, 0.5)");
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("grid must be strictly increasing");
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: Option<CodeSource>,
    pub check_rank: bool,
    pub delta: f64,
    pub grid: Vec<f64>,
    pub f_eff: EfficiencySpec,
    pub frames: usize,
    pub seed: u64,
    pub t: f64,
    /// Eve's prior min-entropy on the payload; defaults to its length.
    pub h_min: Option<f64>,
    pub out: Option<PathBuf>,
    pub fer_target: f64,
    pub ceiling: f64,
    pub max_iter: usize,
    /// String length for Cascade runs.
    pub length: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            code: None,
            check_rank: true,
            delta: 0.05,
            grid: Vec::new(),
            f_eff: EfficiencySpec::Constant(1.1),
            frames: 100,
            seed: 0,
            t: 80.0,
            h_min: None,
            out: None,
            fer_target: 0.05,
            ceiling: 3.0,
            max_iter: DEFAULT_MAX_ITERATIONS,
            length: 10_000,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key = value", i + 1))?;
        out.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        for (key, value) in entries {
            let ctx = || format!("config key {key:?}");
            match key.as_str() {
                "code" => cfg.code = Some(CodeSource::parse(value)?),
                "check_rank" => cfg.check_rank = value.parse().with_context(ctx)?,
                "delta" => cfg.delta = value.parse().with_context(ctx)?,
                "grid" => cfg.grid = parse_grid(value)?,
                "f_eff" => cfg.f_eff = EfficiencySpec::parse(value)?,
                "frames" => cfg.frames = value.parse().with_context(ctx)?,
                "seed" => cfg.seed = value.parse().with_context(ctx)?,
                "t" => cfg.t = value.parse().with_context(ctx)?,
                "h_min" => cfg.h_min = Some(value.parse().with_context(ctx)?),
                "out" => cfg.out = Some(value.into()),
                "fer_target" => cfg.fer_target = value.parse().with_context(ctx)?,
                "ceiling" => cfg.ceiling = value.parse().with_context(ctx)?,
                "max_iter" => cfg.max_iter = value.parse().with_context(ctx)?,
                "length" => cfg.length = value.parse().with_context(ctx)?,
                other => bail!("unknown config key {other:?}"),
            }
        }
        if cfg.frames == 0 {
            bail!("frames must be at least 1");
        }
        if !(0.0..=1.0).contains(&cfg.delta) {
            bail!("delta must lie in [0, 1]");
        }
        if !(cfg.t >= 0.0) {
            bail!("security parameter t must be nonnegative");
        }
        Ok(cfg)
    }

    pub fn code(&self) -> Result<ParityCheckCode> {
        self.code
            .as_ref()
            .ok_or_else(|| anyhow!("no code configured (set code = alist:<path> or gallager:<n>,<col>,<row>,<seed>)"))?
            .load(self.check_rank)
    }
}
