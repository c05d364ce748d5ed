//! Model description shared by every engine, and its text file format.
//!
//! A model file is TOML:
//!
//! ```toml
//! modes = 2
//!
//! [hopping]
//! # sparse triplets: p q re im (1-based); or `real`/`imag` dense rows
//! entries = [[1, 2, -1.0, 0.0], [2, 1, -1.0, 0.0]]
//!
//! [interaction]
//! # p q r s re im (1-based), for -1/4 V_pqrs a+_p a+_q a_r a_s
//! entries = [[1, 2, 2, 1, -4.0, 0.0]]
//!
//! [initial]
//! occupation = "10"        # or: density = "rho.json"
//!
//! [time]
//! t_max = 2.0
//! n_points = 11            # or: times = [0.0, 0.5, 1.0]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::fock::{basis, FockOperator};
use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// Two-body interaction tensor `V_pqrs`, 0-based, row-major in `(p,q,r,s)`.
///
/// Construction antisymmetrizes over `p<->q` and `r<->s`; only that
/// component survives the contraction with `a+_p a+_q a_r a_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    modes: usize,
    data: Vec<C64>,
}

impl Interaction {
    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            data: vec![C64::new(0.0, 0.0); modes.pow(4)],
        }
    }

    /// From raw (not yet antisymmetrized) entries, 0-based.
    pub fn from_entries(
        modes: usize,
        entries: impl IntoIterator<Item = ([usize; 4], C64)>,
    ) -> Result<Self> {
        let mut raw = Self::zero(modes);
        for (idx, v) in entries {
            if idx.iter().any(|&i| i >= modes) {
                return Err(Error::InvalidModel {
                    field: "interaction.entries".into(),
                    reason: format!("index {idx:?} out of range for {modes} modes"),
                });
            }
            let k = raw.offset(idx[0], idx[1], idx[2], idx[3]);
            raw.data[k] += v;
        }
        Ok(raw.antisymmetrized())
    }

    fn offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let m = self.modes;
        ((p * m + q) * m + r) * m + s
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        self.data[self.offset(p, q, r, s)]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == C64::new(0.0, 0.0))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn antisymmetrized(&self) -> Self {
        let m = self.modes;
        let mut out = Self::zero(m);
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        let v = self.get(p, q, r, s) - self.get(q, p, r, s)
                            - self.get(p, q, s, r)
                            + self.get(q, p, s, r);
                        let k = out.offset(p, q, r, s);
                        out.data[k] = v * 0.25;
                    }
                }
            }
        }
        out
    }

    /// Largest deviation from `V*_pqrs = V_srqp`, relative to the tensor norm.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.modes;
        let mut worst = 0.0f64;
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        let d = (self.get(p, q, r, s).conj() - self.get(s, r, q, p)).norm();
                        worst = worst.max(d);
                    }
                }
            }
        }
        worst / self.frobenius().max(1e-300)
    }
}

/// Initial condition of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Fock state given by occupations of modes `1..=M`.
    Occupation(Vec<bool>),
    Density(FockOperator),
}

/// Mode count, one-body hopping, two-body interaction, initial state and
/// output time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    modes: usize,
    hopping: DMatrix<C64>,
    interaction: Interaction,
    initial: InitialState,
    times: Vec<f64>,
}

impl ModelSpec {
    pub fn new(
        hopping: DMatrix<C64>,
        interaction: Interaction,
        initial: InitialState,
        times: Vec<f64>,
    ) -> Result<Self> {
        let modes = hopping.nrows();
        let invalid = |field: &str, reason: String| Error::InvalidModel {
            field: field.into(),
            reason,
        };
        if modes == 0 || hopping.ncols() != modes {
            return Err(invalid("hopping", "must be a nonempty square matrix".into()));
        }
        if modes > 8 {
            return Err(invalid("modes", format!("{modes} modes exceeds the supported 8")));
        }
        let t_norm = hopping.norm().max(1.0);
        let t_defect = (&hopping - hopping.adjoint()).norm() / t_norm;
        if t_defect > HERMITIAN_TOL {
            return Err(invalid(
                "hopping",
                format!("not Hermitian (relative deviation {t_defect:.3e})"),
            ));
        }
        if interaction.modes() != modes {
            return Err(invalid(
                "interaction",
                format!("built for {} modes, model has {modes}", interaction.modes()),
            ));
        }
        if !interaction.is_zero() {
            let d = interaction.hermiticity_defect();
            if d > HERMITIAN_TOL {
                return Err(invalid(
                    "interaction",
                    format!("V*_pqrs != V_srqp, relative deviation {d:.3e}"),
                ));
            }
        }
        match &initial {
            InitialState::Occupation(occ) if occ.len() != modes => {
                return Err(invalid(
                    "initial.occupation",
                    format!("has {} entries for {modes} modes", occ.len()),
                ));
            }
            InitialState::Density(rho) => validate_density(rho, modes)?,
            _ => {}
        }
        if times.is_empty() || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("time", "grid must be nonempty, finite and nonnegative".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("time", "grid must be nondecreasing".into()));
        }
        Ok(Self {
            modes,
            hopping,
            interaction,
            initial,
            times,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn hopping(&self) -> &DMatrix<C64> {
        &self.hopping
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn with_times(mut self, times: Vec<f64>) -> Result<Self> {
        self.times = times;
        Self::new(self.hopping, self.interaction, self.initial, self.times)
    }

    pub fn with_initial(self, initial: InitialState) -> Result<Self> {
        Self::new(self.hopping, self.interaction, initial, self.times)
    }

    /// Initial density matrix.
    pub fn initial_density(&self) -> FockOperator {
        match &self.initial {
            InitialState::Occupation(occ) => FockOperator::projector(self.modes, basis::index_of(occ)),
            InitialState::Density(rho) => rho.clone(),
        }
    }

    /// Spectral norm of the hopping matrix.
    pub fn hopping_norm(&self) -> f64 {
        let svd = self.hopping.clone().svd(false, false);
        svd.singular_values.iter().cloned().fold(0.0, f64::max)
    }

    /// Two spinless modes with hopping `T_12 = tau`, starting in `|10>`.
    pub fn free_dimer(tau: C64, times: Vec<f64>) -> Self {
        let z = C64::new(0.0, 0.0);
        let hopping = DMatrix::from_row_slice(2, 2, &[z, tau, tau.conj(), z]);
        Self::new(
            hopping,
            Interaction::zero(2),
            InitialState::Occupation(vec![true, false]),
            times,
        )
        .expect("free dimer is a valid model")
    }

    /// Two-site Hubbard model with spin. Modes are `1 = site1 up`,
    /// `2 = site2 up`, `3 = site1 down`, `4 = site2 down`; hopping `-t`
    /// between sites, on-site repulsion `u`. Starts with both particles on
    /// site 1 (`|1010>`).
    pub fn hubbard_dimer(t: f64, u: f64, times: Vec<f64>) -> Self {
        let mut hopping = DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
        for (a, b) in [(0, 1), (2, 3)] {
            hopping[(a, b)] = C64::new(-t, 0.0);
            hopping[(b, a)] = C64::new(-t, 0.0);
        }
        let interaction = Interaction::from_entries(
            4,
            hubbard_onsite_pairs()
                .into_iter()
                .map(|(a, b)| ([a, b, b, a], C64::new(-4.0 * u, 0.0))),
        )
        .expect("indices in range");
        Self::new(
            hopping,
            interaction,
            InitialState::Occupation(vec![true, false, true, false]),
            times,
        )
        .expect("Hubbard dimer is a valid model")
    }

    /// Parse a model file; relative density paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawModel = toml::from_str(text).map_err(|e| Error::InvalidModel {
            field: e
                .span()
                .map(|s| format!("byte {}..{}", s.start, s.end))
                .unwrap_or_else(|| "document".into()),
            reason: e.message().to_string(),
        })?;
        raw.into_spec(base_dir)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidModel {
            field: "file".into(),
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_toml_str(&text, path.parent())
    }
}

fn hubbard_onsite_pairs() -> [(usize, usize); 2] {
    [(0, 2), (1, 3)]
}

fn validate_density(rho: &FockOperator, modes: usize) -> Result<()> {
    let invalid = |reason: String| Error::InvalidModel {
        field: "initial.density".into(),
        reason,
    };
    if rho.modes() != modes {
        return Err(invalid(format!("acts on {} modes, model has {modes}", rho.modes())));
    }
    let m = rho.matrix();
    let herm = (m - m.adjoint()).norm();
    if herm > 1e-10 {
        return Err(invalid(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let tr = m.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(invalid(format!("trace is {tr}, expected 1")));
    }
    let off = rho.off_sector_weight();
    if off > 1e-12 {
        return Err(invalid(format!("not number conserving (off-sector weight {off:.3e})")));
    }
    let eig = m.clone().symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(invalid(format!("not positive semidefinite (eigenvalue {min:.3e})")));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    modes: usize,
    hopping: RawHopping,
    #[serde(default)]
    interaction: Option<RawInteraction>,
    initial: RawInitial,
    time: RawTime,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHopping {
    #[serde(default)]
    entries: Option<Vec<(usize, usize, f64, f64)>>,
    #[serde(default)]
    real: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    imag: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    #[serde(default)]
    entries: Vec<(usize, usize, usize, usize, f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    occupation: Option<String>,
    #[serde(default)]
    density: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    #[serde(default)]
    t_max: Option<f64>,
    #[serde(default)]
    n_points: Option<usize>,
    #[serde(default)]
    times: Option<Vec<f64>>,
}

/// Dense complex matrix file: `{"real": [[..]], "imag": [[..]]}`.
#[derive(Debug, Deserialize, serde::Serialize)]
pub struct MatrixFile {
    pub real: Vec<Vec<f64>>,
    #[serde(default)]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn to_matrix(&self, field: &str) -> Result<DMatrix<C64>> {
        dense_from_rows(field, &self.real, self.imag.as_deref())
    }
}

fn dense_from_rows(field: &str, re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<DMatrix<C64>> {
    let n = re.len();
    let bad = |reason: String| Error::InvalidModel {
        field: field.into(),
        reason,
    };
    if re.iter().any(|row| row.len() != n) {
        return Err(bad("real part is not square".into()));
    }
    if let Some(im) = im {
        if im.len() != n || im.iter().any(|row| row.len() != n) {
            return Err(bad("imaginary part does not match the real part".into()));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        C64::new(re[i][j], im.map(|m| m[i][j]).unwrap_or(0.0))
    }))
}

impl RawModel {
    fn into_spec(self, base_dir: Option<&Path>) -> Result<ModelSpec> {
        let m = self.modes;
        let bad = |field: &str, reason: String| Error::InvalidModel {
            field: field.into(),
            reason,
        };
        if m == 0 {
            return Err(bad("modes", "must be at least 1".into()));
        }
        let hopping = match (&self.hopping.entries, &self.hopping.real) {
            (Some(_), Some(_)) => {
                return Err(bad("hopping", "give either `entries` or `real`/`imag`, not both".into()))
            }
            (Some(entries), None) => {
                let mut t = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
                for &(p, q, re, im) in entries {
                    if p == 0 || q == 0 || p > m || q > m {
                        return Err(bad(
                            "hopping.entries",
                            format!("index ({p},{q}) outside 1..={m}"),
                        ));
                    }
                    t[(p - 1, q - 1)] += C64::new(re, im);
                }
                t
            }
            (None, Some(real)) => {
                let t = dense_from_rows("hopping.real", real, self.hopping.imag.as_deref())?;
                if t.nrows() != m {
                    return Err(bad("hopping.real", format!("is {}x{}, expected {m}x{m}", t.nrows(), t.ncols())));
                }
                t
            }
            (None, None) => return Err(bad("hopping", "missing `entries` or `real`".into())),
        };
        let mut entries = Vec::new();
        if let Some(int) = &self.interaction {
            for &(p, q, r, s, re, im) in &int.entries {
                let idx = [p, q, r, s];
                if idx.iter().any(|&i| i == 0 || i > m) {
                    return Err(bad(
                        "interaction.entries",
                        format!("index {idx:?} outside 1..={m}"),
                    ));
                }
                entries.push(([p - 1, q - 1, r - 1, s - 1], C64::new(re, im)));
            }
        }
        let interaction = Interaction::from_entries(m, entries)?;
        let initial = match (self.initial.occupation, self.initial.density) {
            (Some(occ), None) => {
                let bits: Vec<bool> = occ
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(bad("initial.occupation", format!("unexpected character {other:?}"))),
                    })
                    .collect::<Result<_>>()?;
                InitialState::Occupation(bits)
            }
            (None, Some(path)) => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(&path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| bad("initial.density", format!("{}: {e}", full.display())))?;
                let file: MatrixFile = serde_json::from_str(&text)
                    .map_err(|e| bad("initial.density", format!("{}: {e}", full.display())))?;
                let mat = file.to_matrix("initial.density")?;
                if mat.nrows() != 1 << m {
                    return Err(bad(
                        "initial.density",
                        format!("is {}x{}, expected {}x{}", mat.nrows(), mat.ncols(), 1 << m, 1 << m),
                    ));
                }
                InitialState::Density(FockOperator::new(m, mat)?)
            }
            _ => {
                return Err(bad(
                    "initial",
                    "give exactly one of `occupation` or `density`".into(),
                ))
            }
        };
        let times = match (self.time.times, self.time.t_max, self.time.n_points) {
            (Some(t), None, None) => t,
            (None, Some(t_max), Some(n)) => {
                if n < 1 {
                    return Err(bad("time.n_points", "must be at least 1".into()));
                }
                if n == 1 {
                    vec![0.0]
                } else {
                    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
                }
            }
            _ => {
                return Err(bad(
                    "time",
                    "give either `times` or both `t_max` and `n_points`".into(),
                ))
            }
        };
        ModelSpec::new(hopping, interaction, initial, times)
    }
}
