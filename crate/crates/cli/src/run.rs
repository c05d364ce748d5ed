use crate::compare::compare_report;
use crate::results::{Diverged, Format, Metadata, ResultTable, Row};
use anyhow::{anyhow, bail, Context, Result};
use grassb::brep::{propagate_b, Reconstruction};
use grassb::fock::{evolve_exact, expectation, FockOperator};
use grassb::model::{MatrixFile, ModelSpec};
use grassb::sde::{run_streaming, EnsembleConfig, Scheme};
use grassb::validate::run_validation;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    BMaster,
    Sde,
    Validate,
    Compare,
}

impl FromStr for Mode {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Mode::Exact,
            "b-master" => Mode::BMaster,
            "sde" => Mode::Sde,
            "validate" => Mode::Validate,
            "compare" => Mode::Compare,
            _ => bail!("unknown mode {s:?}"),
        })
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::BMaster => "b-master",
            Mode::Sde => "sde",
            Mode::Validate => "validate",
            Mode::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: Option<PathBuf>,
    /// Empty means `n1..nM`.
    pub observables: Vec<String>,
    pub n_traj: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Result files for compare mode.
    pub inputs: Vec<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            model: None,
            observables: Vec::new(),
            n_traj: 10_000,
            dt: 1e-3,
            scheme: Scheme::StratonovichHeun,
            seed: None,
            out: None,
            format: Format::Csv,
            inputs: Vec::new(),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.mode {
            Mode::Exact | Mode::BMaster | Mode::Sde if self.model.is_none() => {
                bail!("--model is required in {} mode", self.mode.name())
            }
            Mode::Sde if self.seed.is_none() => bail!("--seed is required in sde mode"),
            Mode::Sde if self.n_traj == 0 => bail!("--n-traj must be positive"),
            Mode::Sde if !(self.dt.is_finite() && self.dt > 0.0) => bail!("--dt must be positive"),
            Mode::Compare if self.inputs.len() != 2 => {
                bail!("compare mode takes exactly two result files, got {}", self.inputs.len())
            }
            _ => Ok(()),
        }
    }
}

/// Named observables: `n3` is `a+_3 a_3`, `ad1a2` is `a+_1 a_2` (1-based),
/// and a path to a JSON matrix file holds either an `M x M` one-body matrix
/// `O` (meaning `sum O_ij a+_i a_j`) or a full Fock-space operator.
pub fn parse_observable(name: &str, modes: usize) -> Result<(String, FockOperator)> {
    let index = |s: &str| -> Result<usize> {
        let i: usize = s.parse().map_err(|_| anyhow!("observable {name:?}: bad mode index {s:?}"))?;
        if i == 0 || i > modes {
            bail!("observable {name:?}: mode {i} outside 1..={modes}");
        }
        Ok(i - 1)
    };
    if let Some(rest) = name.strip_prefix("ad") {
        if let Some((i, j)) = rest.split_once('a') {
            let op = &FockOperator::creation(modes, index(i)?) * &FockOperator::annihilation(modes, index(j)?);
            return Ok((name.to_string(), op));
        }
    }
    if let Some(i) = name.strip_prefix('n') {
        if !i.is_empty() && i.chars().all(|c| c.is_ascii_digit()) {
            return Ok((name.to_string(), FockOperator::number(modes, index(i)?)));
        }
    }
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).with_context(|| format!("observable file {name}"))?;
        let file: MatrixFile = serde_json::from_str(&text).with_context(|| format!("observable file {name}"))?;
        let mat = file.to_matrix("observable")?;
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name).replace(',', "_");
        let op = if mat.nrows() == modes {
            one_body(&mat)
        } else if mat.nrows() == 1 << modes {
            FockOperator::new(modes, mat)?
        } else {
            bail!("observable file {name}: {}x{} matches neither {modes} modes nor the Fock space", mat.nrows(), mat.ncols());
        };
        return Ok((id, op));
    }
    bail!("unknown observable {name:?} (expected nJ, adIaJ or a .json matrix file)")
}

/// `sum_ij O_ij a+_i a_j`
fn one_body(o: &nalgebra::DMatrix<grassb::C64>) -> FockOperator {
    let m = o.nrows();
    let mut op = FockOperator::zeros(m);
    for i in 0..m {
        for j in 0..m {
            if o[(i, j)] != grassb::C64::new(0.0, 0.0) {
                let term = &FockOperator::creation(m, i) * &FockOperator::annihilation(m, j);
                op = &op + &term.scale(o[(i, j)]);
            }
        }
    }
    op
}

fn observables(cfg: &RunConfig, modes: usize) -> Result<Vec<(String, FockOperator)>> {
    if cfg.observables.is_empty() {
        return Ok((0..modes).map(|j| (format!("n{}", j + 1), FockOperator::number(modes, j))).collect());
    }
    cfg.observables.iter().map(|o| parse_observable(o, modes)).collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn rows_from_densities(
    times: &[f64],
    rhos: &[FockOperator],
    obs: &[(String, FockOperator)],
    engine: &str,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (t, rho) in times.iter().zip(rhos) {
        for (id, op) in obs {
            let v = expectation(rho, op)?;
            rows.push(Row {
                t: *t,
                observable: id.clone(),
                mean_re: v.re,
                mean_im: v.im,
                se_re: 0.0,
                se_im: 0.0,
                engine: engine.into(),
            });
        }
    }
    Ok(rows)
}

/// Run one of the evolution engines and collect the results table.
pub fn simulate(cfg: &RunConfig) -> Result<ResultTable> {
    cfg.check()?;
    let path = cfg.model.as_ref().ok_or_else(|| anyhow!("no model"))?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = ModelSpec::from_file(path).with_context(|| format!("model {}", path.display()))?;
    let m = spec.modes();
    let obs = observables(cfg, m)?;
    let rho0 = spec.initial_density();
    let times = spec.times().to_vec();
    let mut meta = Metadata::new(cfg.mode.name());
    meta.model_sha256 = Some(sha256_hex(&bytes));
    let rows = match cfg.mode {
        Mode::Exact => rows_from_densities(&times, &evolve_exact(&spec, &rho0)?, &obs, "exact")?,
        Mode::BMaster => {
            let rec = Reconstruction::new(m)?;
            let bs = propagate_b(&rec.b_from_rho(&rho0)?, &spec)?;
            let rhos = bs.iter().map(|b| rec.rho_from_b(b)).collect::<grassb::Result<Vec<_>>>()?;
            rows_from_densities(&times, &rhos, &obs, "b-master")?
        }
        Mode::Sde => {
            let seed = cfg.seed.expect("checked");
            let ens = EnsembleConfig {
                n_traj: cfg.n_traj,
                dt: cfg.dt,
                scheme: cfg.scheme,
                seed,
            };
            let ops: Vec<FockOperator> = obs.iter().map(|(_, o)| o.clone()).collect();
            let stats = run_streaming(&spec, &rho0, &ops, ens, &[])?;
            meta.seed = Some(seed);
            meta.scheme = Some(cfg.scheme.name().into());
            meta.dt = Some(cfg.dt);
            meta.n_traj = Some(cfg.n_traj);
            meta.diverged = stats.diverged.iter().map(|d| Diverged { index: d.index, t: d.time }).collect();
            let mut rows = Vec::new();
            for (k, &t) in times.iter().enumerate() {
                for (i, (id, _)) in obs.iter().enumerate() {
                    let e = stats.observable(k, i)?;
                    let row = |v: grassb::C64, se: grassb::C64, engine: &str| Row {
                        t,
                        observable: id.clone(),
                        mean_re: v.re,
                        mean_im: v.im,
                        se_re: se.re,
                        se_im: se.im,
                        engine: engine.into(),
                    };
                    rows.push(row(e.raw, e.raw_se, "sde"));
                    if e.ratio.re.is_finite() && e.ratio.im.is_finite() && e.ratio_se.re.is_finite() && e.ratio_se.im.is_finite() {
                        rows.push(row(e.ratio, e.ratio_se, "sde-ratio"));
                    }
                    if e.ratio_unreliable {
                        meta.unreliable_ratio.push((t, id.clone()));
                    }
                }
            }
            rows
        }
        _ => bail!("{} mode does not simulate", cfg.mode.name()),
    };
    let table = ResultTable { metadata: meta, rows };
    table.check_finite()?;
    Ok(table)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Execute a run; the returned value is the process exit status.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    cfg.check()?;
    match cfg.mode {
        Mode::Exact | Mode::BMaster | Mode::Sde => {
            let table = simulate(cfg)?;
            emit(cfg, &table.render(cfg.format)?)?;
            for d in &table.metadata.diverged {
                eprintln!("warning: trajectory {} diverged at t={}", d.index, d.t);
            }
            Ok(0)
        }
        Mode::Compare => {
            let load = |p: &PathBuf| -> Result<ResultTable> {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ResultTable::parse(&text).with_context(|| format!("parsing {}", p.display()))
            };
            let report = compare_report(&load(&cfg.inputs[0])?, &load(&cfg.inputs[1])?)?;
            emit(cfg, &report.render(cfg.format)?)?;
            if cfg.out.is_some() {
                println!("{}", report.summary());
            }
            Ok(0)
        }
        Mode::Validate => {
            let checks = run_validation();
            let mut text = String::new();
            let mut failed = 0;
            for c in &checks {
                let status = match (c.passed, c.informational) {
                    (true, _) => "PASS",
                    (false, true) => "INFO",
                    (false, false) => {
                        failed += 1;
                        "FAIL"
                    }
                };
                text += &format!("{status} {:<26} {:>7.2}s  {}\n", c.name, c.seconds, c.detail);
            }
            text += &format!("{} checks, {failed} failed\n", checks.len());
            emit(cfg, &text)?;
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}
