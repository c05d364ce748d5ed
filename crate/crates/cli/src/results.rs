use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => bail!("unknown format {s:?} (expected csv or json)"),
        }
    }
}

/// One results-table line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub observable: String,
    pub mean_re: f64,
    pub mean_im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub engine: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diverged {
    pub index: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub mode: String,
    pub model_sha256: Option<String>,
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    pub dt: Option<f64>,
    pub n_traj: Option<usize>,
    pub diverged: Vec<Diverged>,
    /// `(t, observable)` points where the ratio estimator's denominator is
    /// statistically indistinguishable from zero.
    pub unreliable_ratio: Vec<(f64, String)>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Metadata {
    pub fn new(mode: &str) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
            model_sha256: None,
            seed: None,
            scheme: None,
            dt: None,
            n_traj: None,
            diverged: Vec::new(),
            unreliable_ratio: Vec::new(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

pub const HEADER: &str = "t,observable,mean_re,mean_im,se_re,se_im,engine";

/// Lossless scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "none".into())
}

impl ResultTable {
    pub fn check_finite(&self) -> Result<()> {
        for r in &self.rows {
            for x in [r.t, r.mean_re, r.mean_im, r.se_re, r.se_im] {
                if !x.is_finite() {
                    bail!("non-finite value for {} at t={} ({})", r.observable, r.t, r.engine);
                }
            }
        }
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        self.check_finite()?;
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => Ok(self.to_csv()),
        }
    }

    fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut s = String::new();
        let diverged = if m.diverged.is_empty() {
            "none".to_string()
        } else {
            m.diverged.iter().map(|d| format!("{}@{}", d.index, sci(d.t))).collect::<Vec<_>>().join(" ")
        };
        let unreliable = if m.unreliable_ratio.is_empty() {
            "none".to_string()
        } else {
            m.unreliable_ratio.iter().map(|(t, o)| format!("{o}@{}", sci(*t))).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(s, "# version: {}", m.version);
        let _ = writeln!(s, "# mode: {}", m.mode);
        let _ = writeln!(s, "# model_sha256: {}", opt(&m.model_sha256));
        let _ = writeln!(s, "# seed: {}", opt(&m.seed));
        let _ = writeln!(s, "# scheme: {}", opt(&m.scheme));
        let _ = writeln!(s, "# dt: {}", m.dt.map(sci).unwrap_or_else(|| "none".into()));
        let _ = writeln!(s, "# n_traj: {}", opt(&m.n_traj));
        let _ = writeln!(s, "# diverged: {diverged}");
        let _ = writeln!(s, "# unreliable_ratio: {unreliable}");
        let _ = writeln!(s, "# timestamp: {}", m.timestamp);
        let _ = writeln!(s, "{HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                sci(r.t),
                r.observable,
                sci(r.mean_re),
                sci(r.mean_im),
                sci(r.se_re),
                sci(r.se_im),
                r.engine
            );
        }
        s
    }

    /// Read back a table written by [`ResultTable::render`] in either format.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).context("malformed JSON results");
        }
        let mut meta = Metadata::new("unknown");
        meta.timestamp = 0;
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once(':') {
                    parse_meta(&mut meta, k.trim(), v.trim()).with_context(|| format!("line {}", n + 1))?;
                }
                continue;
            }
            if !seen_header {
                if line != HEADER {
                    bail!("line {}: expected header `{HEADER}`", n + 1);
                }
                seen_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                bail!("line {}: expected 7 fields, found {}", n + 1, f.len());
            }
            let num = |i: usize| -> Result<f64> {
                f[i].parse().map_err(|_| anyhow!("line {}: bad number {:?}", n + 1, f[i]))
            };
            rows.push(Row {
                t: num(0)?,
                observable: f[1].to_string(),
                mean_re: num(2)?,
                mean_im: num(3)?,
                se_re: num(4)?,
                se_im: num(5)?,
                engine: f[6].to_string(),
            });
        }
        if !seen_header {
            bail!("no results header found");
        }
        Ok(Self { metadata: meta, rows })
    }
}

fn parse_meta(m: &mut Metadata, key: &str, v: &str) -> Result<()> {
    let none = v == "none";
    match key {
        "version" => m.version = v.into(),
        "mode" => m.mode = v.into(),
        "model_sha256" => m.model_sha256 = (!none).then(|| v.to_string()),
        "seed" => m.seed = if none { None } else { Some(v.parse()?) },
        "scheme" => m.scheme = (!none).then(|| v.to_string()),
        "dt" => m.dt = if none { None } else { Some(v.parse()?) },
        "n_traj" => m.n_traj = if none { None } else { Some(v.parse()?) },
        "timestamp" => m.timestamp = v.parse()?,
        "diverged" if !none => {
            for item in v.split_whitespace() {
                let (i, t) = item.split_once('@').ok_or_else(|| anyhow!("bad diverged entry {item:?}"))?;
                m.diverged.push(Diverged { index: i.parse()?, t: t.parse()? });
            }
        }
        "unreliable_ratio" if !none => {
            for item in v.split_whitespace() {
                let (o, t) = item.rsplit_once('@').ok_or_else(|| anyhow!("bad entry {item:?}"))?;
                m.unreliable_ratio.push((t.parse()?, o.to_string()));
            }
        }
        _ => {}
    }
    Ok(())
}
