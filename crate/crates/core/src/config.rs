//! TOML descriptions of systems, supply rates and analysis settings.
//!
//! A *system file* has a top-level `type` key:
//!
//! ```toml
//! type = "tf"                      # entrywise num/den, ascending coefficients
//! num = [[[0.3, 1.0]]]
//! den = [[[-1.0, 1.0]]]
//! outputs = [{ name = "u", dim = 1 }]   # optional, default scalar channels
//! inputs = [{ name = "e", dim = 1 }]
//! ```
//!
//! `type = "ss"` takes row-major `A`, `B`, `C`, `D`, `time = "dt" | "ct"` and
//! an optional sampling time `h` (continuous models are discretized with a
//! zero-order hold at load time). `type = "io"` takes `D` and `N` as lists of
//! ascending coefficient matrices plus `outputs` and `inputs`.
//!
//! A *bundle* groups optional `[plant]`, `[interconnection]`, `[controller]`,
//! `[supply]` and `[analysis]` tables.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::dissipativity::{SupplyRate, Tolerances};
use crate::error::{Error, Result};
use crate::lti::{discretize_zoh, StateSpace, TimeDomain};
use crate::polymat::{
    rational_to_io, Channel, IoRepresentation, Poly, PolyMatrix, RationalFn, RationalMatrix,
};

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ChannelDesc {
    pub name: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDesc {
    Dt,
    Ct,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemDesc {
    Tf {
        num: Vec<Vec<Vec<f64>>>,
        den: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        outputs: Option<Vec<ChannelDesc>>,
        #[serde(default)]
        inputs: Option<Vec<ChannelDesc>>,
    },
    Ss {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        #[serde(rename = "D")]
        d: Vec<Vec<f64>>,
        time: TimeDesc,
        #[serde(default)]
        h: Option<f64>,
    },
    Io {
        #[serde(rename = "D")]
        d: Vec<Vec<Vec<f64>>>,
        #[serde(rename = "N")]
        n: Vec<Vec<Vec<f64>>>,
        outputs: Vec<ChannelDesc>,
        inputs: Vec<ChannelDesc>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupplyKind {
    L2,
    Passivity,
    IffPassivity,
    Shortage,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyDesc {
    pub supply: SupplyKind,
    pub gamma: Option<f64>,
    pub nu_param: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "S")]
    pub s: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R")]
    pub r: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisDesc {
    #[serde(rename = "L")]
    pub horizon: Option<usize>,
    #[serde(rename = "L_range")]
    pub horizon_range: Option<[usize; 2]>,
    pub nu: Option<usize>,
    pub lag_bound: Option<usize>,
    pub rank_tol: Option<f64>,
    pub psd_tol: Option<f64>,
    pub bisect_tol: Option<f64>,
    pub seed: Option<u64>,
    #[serde(rename = "N")]
    pub n_samples: Option<usize>,
}

impl AnalysisDesc {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            rank_tol: self.rank_tol.unwrap_or(d.rank_tol),
            psd_tol: self.psd_tol.unwrap_or(d.psd_tol),
            bisect_tol: self.bisect_tol.unwrap_or(d.bisect_tol),
            max_bisect: d.max_bisect,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub plant: Option<SystemDesc>,
    pub interconnection: Option<SystemDesc>,
    pub controller: Option<SystemDesc>,
    pub supply: Option<SupplyDesc>,
    #[serde(default)]
    pub analysis: AnalysisDesc,
}

fn parse_error(path: &Path, text: &str, err: toml::de::Error) -> Error {
    let (line, column) = err
        .span()
        .map(|s| {
            let before = &text[..s.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before
                .rfind('\n')
                .map_or(before.len(), |i| before.len() - i - 1)
                + 1;
            (line, column)
        })
        .unwrap_or((0, 0));
    Error::Parse {
        path: PathBuf::from(path),
        line,
        column,
        msg: err.message().to_string(),
    }
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| parse_error(path, text, e))
}

/// Parse either a system file or a bundle; a bare system becomes the
/// bundle's `interconnection`.
pub fn parse_bundle(text: &str, path: &Path) -> Result<Bundle> {
    let value: toml::Table = parse_toml(text, path)?;
    if value.contains_key("type") {
        Ok(Bundle {
            interconnection: Some(parse_toml(text, path)?),
            ..Bundle::default()
        })
    } else {
        parse_toml(text, path)
    }
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<Bundle> {
    let path = path.as_ref();
    parse_bundle(&std::fs::read_to_string(path)?, path)
}

pub fn parse_system(text: &str, path: &Path) -> Result<SystemDesc> {
    parse_toml(text, path)
}

pub fn load_system(path: impl AsRef<Path>) -> Result<SystemDesc> {
    let path = path.as_ref();
    parse_system(&std::fs::read_to_string(path)?, path)
}

pub fn load_supply(path: impl AsRef<Path>) -> Result<SupplyDesc> {
    let path = path.as_ref();
    parse_supply(&std::fs::read_to_string(path)?, path)
}

pub fn parse_supply(text: &str, path: &Path) -> Result<SupplyDesc> {
    let table: toml::Table = parse_toml(text, path)?;
    if table.get("supply").is_some_and(|v| v.is_table()) {
        #[derive(Deserialize)]
        struct Wrapper {
            supply: SupplyDesc,
        }
        Ok(parse_toml::<Wrapper>(text, path)?.supply)
    } else {
        parse_toml(text, path)
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err(Error::Config(format!(
            "{what}: rows have different lengths"
        )));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn channels(desc: &Option<Vec<ChannelDesc>>, count: usize, prefix: &str) -> Vec<Channel> {
    match desc {
        Some(cs) => cs
            .iter()
            .map(|c| Channel::new(c.name.clone(), c.dim))
            .collect(),
        None => (0..count)
            .map(|i| Channel::new(format!("{prefix}{i}"), 1))
            .collect(),
    }
}

fn poly_matrix(coeffs: &[Vec<Vec<f64>>], what: &str) -> Result<PolyMatrix> {
    let mats = coeffs
        .iter()
        .map(|m| matrix(m, what))
        .collect::<Result<Vec<_>>>()?;
    let (r, c) = mats.first().map_or((0, 0), |m| m.shape());
    PolyMatrix::new(r, c, mats)
}

impl SystemDesc {
    pub fn to_rational(&self) -> Result<RationalMatrix> {
        match self {
            SystemDesc::Tf { num, den, .. } => {
                if num.len() != den.len() || num.iter().zip(den).any(|(a, b)| a.len() != b.len()) {
                    return Err(Error::Config(
                        "tf: num and den grids differ in shape".into(),
                    ));
                }
                let rows = num.len();
                let cols = num.first().map_or(0, |r| r.len());
                if num.iter().any(|r| r.len() != cols) {
                    return Err(Error::Config("tf: ragged num grid".into()));
                }
                let mut entries = Vec::with_capacity(rows * cols);
                for i in 0..rows {
                    for j in 0..cols {
                        entries.push(RationalFn::new(
                            Poly::new(num[i][j].clone()),
                            Poly::new(den[i][j].clone()),
                        )?);
                    }
                }
                RationalMatrix::new(rows, cols, entries)
            }
            SystemDesc::Io { .. } => self.to_io()?.to_rational(),
            SystemDesc::Ss { .. } => Err(Error::Config(
                "state-space descriptions cannot be used where a transfer matrix is required"
                    .into(),
            )),
        }
    }

    pub fn to_io(&self) -> Result<IoRepresentation> {
        match self {
            SystemDesc::Tf { outputs, inputs, .. } => {
                let m = self.to_rational()?;
                rational_to_io(&m, channels(outputs, m.nrows(), "out"), channels(inputs, m.ncols(), "in"))
            }
            SystemDesc::Io { d, n, outputs, inputs } => IoRepresentation::new(
                poly_matrix(d, "D")?,
                poly_matrix(n, "N")?,
                channels(&Some(outputs.clone()), 0, ""),
                channels(&Some(inputs.clone()), 0, ""),
            ),
            SystemDesc::Ss { .. } => Err(Error::Config(
                "state-space descriptions cannot be converted to an input-output representation; use type \"tf\" or \"io\"".into(),
            )),
        }
    }

    /// Discrete-time realization; continuous models need `h`.
    pub fn to_state_space(&self) -> Result<StateSpace> {
        match self {
            SystemDesc::Ss {
                a,
                b,
                c,
                d,
                time,
                h,
            } => {
                let time_domain = match time {
                    TimeDesc::Dt => TimeDomain::Discrete,
                    TimeDesc::Ct => TimeDomain::Continuous,
                };
                let a = matrix(a, "A")?;
                let n = a.nrows();
                let mut bm = matrix(b, "B")?;
                let mut cm = matrix(c, "C")?;
                let dm = matrix(d, "D")?;
                if n == 0 {
                    bm = DMatrix::zeros(0, dm.ncols());
                    cm = DMatrix::zeros(dm.nrows(), 0);
                }
                let sys = StateSpace::new(a, bm, cm, dm, time_domain)?;
                match (time_domain, h) {
                    (TimeDomain::Continuous, Some(h)) => discretize_zoh(&sys, *h),
                    (TimeDomain::Continuous, None) => Err(Error::Config(
                        "continuous-time model needs a sampling time h".into(),
                    )),
                    (TimeDomain::Discrete, _) => Ok(sys),
                }
            }
            _ => StateSpace::from_io(&self.to_io()?),
        }
    }
}

impl SupplyDesc {
    /// Supply over `(n_w, n_z)` channels.
    pub fn to_supply(&self, n_w: usize, n_z: usize) -> Result<SupplyRate> {
        let square = |what: &str| {
            if n_w != n_z {
                Err(Error::Config(format!(
                    "{what} supply needs equal input and output dimensions"
                )))
            } else {
                Ok(())
            }
        };
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("supply needs `{name}`")))
        };
        match self.supply {
            SupplyKind::L2 => Ok(SupplyRate::l2_gain(need(self.gamma, "gamma")?, n_w, n_z)),
            SupplyKind::Passivity => {
                square("passivity")?;
                Ok(SupplyRate::passivity(n_w))
            }
            SupplyKind::IffPassivity => {
                square("input-feedforward passivity")?;
                Ok(SupplyRate::input_feedforward_passivity(
                    need(self.nu_param, "nu_param")?,
                    n_w,
                ))
            }
            SupplyKind::Shortage => {
                square("passivity shortage")?;
                Ok(SupplyRate::passivity_shortage(
                    need(self.beta, "beta")?,
                    n_w,
                ))
            }
            SupplyKind::Custom => {
                let get = |m: &Option<Vec<Vec<f64>>>, name: &str| {
                    m.as_ref()
                        .ok_or_else(|| Error::Config(format!("custom supply needs `{name}`")))
                        .and_then(|rows| matrix(rows, name))
                };
                let pi =
                    SupplyRate::new(get(&self.q, "Q")?, get(&self.s, "S")?, get(&self.r, "R")?)?;
                if pi.n_w() != n_w || pi.n_z() != n_z {
                    return Err(Error::dims(
                        "supply rate",
                        format!(
                            "custom supply is over ({}, {}), expected ({n_w}, {n_z})",
                            pi.n_w(),
                            pi.n_z()
                        ),
                    ));
                }
                Ok(pi)
            }
        }
    }
}
