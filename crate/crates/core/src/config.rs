//! TOML configuration and serialisation formats.
//!
//! A channel is either a built-in selected by `kind` plus its parameters, or a
//! custom matrix given by `q`, `outputs` and `rows`. Probabilities may be
//! written as TOML floats or as decimal strings. An optional `witness` table
//! (`witness[y][x] = T(y, x)`) overrides the bundled symmetry witness.
//!
//! ```toml
//! [channel]
//! kind = "erasure"
//! q = 4
//! p = 0.1
//! ```

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, SymmetryWitness};
use crate::error::{Error, Result};
use crate::inner_code::LinearCode;
use crate::outer_code::OuterCodebook;

fn parse<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// A probability written either as a number or as a decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probability {
    Number(f64),
    Text(String),
}

impl From<f64> for Probability {
    fn from(v: f64) -> Self {
        Probability::Number(v)
    }
}

impl Probability {
    fn value(&self) -> Result<f64> {
        match self {
            Probability::Number(v) => Ok(*v),
            Probability::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse probability {s:?}"))),
        }
    }
}

/// Channel section of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// `erasure`, `typewriter`, `identity`, `qary_symmetric` or `custom`.
    pub kind: Option<String>,
    pub q: Option<usize>,
    pub p: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub outputs: Option<usize>,
    pub rows: Option<Vec<Vec<Probability>>>,
    pub witness: Option<Vec<Vec<usize>>>,
}

/// Built-in channel family named by a [`ChannelSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Erasure { q: usize, p: f64 },
    Typewriter { eps: f64 },
    Identity { q: usize },
    QarySymmetric { q: usize, delta: f64 },
    Custom,
}

impl ChannelSpec {
    pub fn erasure(q: usize, p: f64) -> Self {
        ChannelSpec {
            kind: Some("erasure".into()),
            q: Some(q),
            p: Some(p),
            ..Default::default()
        }
    }

    pub fn typewriter(eps: f64) -> Self {
        ChannelSpec {
            kind: Some("typewriter".into()),
            eps: Some(eps),
            ..Default::default()
        }
    }

    pub fn identity(q: usize) -> Self {
        ChannelSpec {
            kind: Some("identity".into()),
            q: Some(q),
            ..Default::default()
        }
    }

    pub fn kind(&self) -> Result<ChannelKind> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("channel field `{name}` is required")))
        };
        let need_q = || self.q.ok_or_else(|| Error::Config("channel field `q` is required".into()));
        let kind = self
            .kind
            .as_deref()
            .unwrap_or(if self.rows.is_some() { "custom" } else { "" });
        Ok(match kind {
            "erasure" => ChannelKind::Erasure {
                q: need_q()?,
                p: need(self.p, "p")?,
            },
            "typewriter" => ChannelKind::Typewriter {
                eps: need(self.eps, "eps")?,
            },
            "identity" => ChannelKind::Identity { q: need_q()? },
            "qary_symmetric" => ChannelKind::QarySymmetric {
                q: need_q()?,
                delta: need(self.delta, "delta")?,
            },
            "custom" => ChannelKind::Custom,
            "" => return Err(Error::Config("channel needs `kind` or `rows`".into())),
            other => return Err(Error::Config(format!("unknown channel kind {other:?}"))),
        })
    }

    /// Construct the channel, attaching any configured witness.
    pub fn build(&self) -> Result<Channel> {
        let ch = match self.kind()? {
            ChannelKind::Erasure { q, p } => Channel::erasure(q, p)?,
            ChannelKind::Typewriter { eps } => Channel::typewriter(eps)?,
            ChannelKind::Identity { q } => Channel::identity(q)?,
            ChannelKind::QarySymmetric { q, delta } => Channel::qary_symmetric(q, delta)?,
            ChannelKind::Custom => {
                let rows = self
                    .rows
                    .as_ref()
                    .ok_or_else(|| Error::Config("custom channel needs `rows`".into()))?;
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(Probability::value).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                if let Some(q) = self.q {
                    if q != rows.len() {
                        return Err(Error::Config(format!("`q` = {q} but {} rows given", rows.len())));
                    }
                }
                if let Some(outputs) = self.outputs {
                    if rows.iter().any(|r| r.len() != outputs) {
                        return Err(Error::Config(format!("every row must have `outputs` = {outputs} entries")));
                    }
                }
                Channel::new("custom", &rows)?
            }
        };
        match &self.witness {
            Some(w) => ch.with_witness(SymmetryWitness::from_rows(w)?),
            None => Ok(ch),
        }
    }
}

/// Any file with a `[channel]` table; other tables are ignored, so every
/// command configuration is also a valid channel file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub channel: ChannelSpec,
    pub seed: Option<u64>,
}

impl ChannelFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        parse(text)
    }
}

/// Serialised inner code: `q`, `K`, `L` and a row-major `generator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub q: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub generator: Option<Vec<usize>>,
}

impl CodeSpec {
    pub fn from_code(code: &LinearCode) -> Self {
        CodeSpec {
            q: code.alphabet(),
            k: code.dimension(),
            l: code.length(),
            generator: Some(code.generator().to_vec()),
        }
    }

    pub fn to_code(&self) -> Result<Option<LinearCode>> {
        self.generator
            .as_ref()
            .map(|g| LinearCode::new(self.q, self.k, self.l, g.clone()))
            .transpose()
    }
}

pub fn code_to_toml(code: &LinearCode) -> String {
    toml::to_string(&CodeSpec::from_code(code)).expect("code spec serialises")
}

pub fn code_from_toml(text: &str) -> Result<LinearCode> {
    let spec: CodeSpec = parse(text)?;
    spec.to_code()?
        .ok_or_else(|| Error::Config("code file has no `generator`".into()))
}

/// Serialised outer codebook: `M`, `T`, `seed` and per-codeword counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    pub codewords: Vec<Vec<u64>>,
}

pub fn codebook_to_toml(cb: &OuterCodebook) -> String {
    let spec = CodebookSpec {
        m: cb.pool_bound(),
        t: cb.types(),
        seed: cb.seed(),
        codewords: cb.codewords().iter().map(|c| c.counts().to_vec()).collect(),
    };
    toml::to_string(&spec).expect("codebook spec serialises")
}

pub fn codebook_from_toml(text: &str) -> Result<OuterCodebook> {
    let spec: CodebookSpec = parse(text)?;
    OuterCodebook::from_counts(spec.m, spec.t, spec.seed, spec.codewords)
}

/// Rate grid of an exponent sweep: explicit `rates`, or `points` evenly
/// spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub rates: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub rho_hi: Option<f64>,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(r) = &self.rates {
            return Ok(r.clone());
        }
        match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) if n >= 2 => {
                Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
            }
            (Some(a), _, Some(1)) => Ok(vec![a]),
            _ => Err(Error::Config("sweep needs `rates` or `start`, `stop` and `points`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSweepConfig {
    pub channel: ChannelSpec,
    pub sweep: SweepSpec,
    pub seed: Option<u64>,
}

impl ExponentSweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        parse(text)
    }
}

/// Grid of `(L, K)` points for the inner-code erasure experiment. `K` is
/// either listed per length in `dims`, or derived as
/// `max(1, floor(rate_fraction * R_max * L / ln q))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSpec {
    pub lengths: Vec<usize>,
    pub dims: Option<Vec<usize>>,
    pub rate_fraction: Option<f64>,
    pub codes: u64,
    pub trials: u64,
    #[serde(default)]
    pub full_rank: bool,
    #[serde(default)]
    pub exact: bool,
    pub rho_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerErasureConfig {
    pub channel: ChannelSpec,
    pub inner: InnerSpec,
    pub seed: Option<u64>,
}

impl InnerErasureConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        parse(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Grid of pool size bounds.
    #[serde(rename = "M")]
    pub m: Vec<u64>,
    pub xi: f64,
    pub codebook_size: usize,
    pub trials: u64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndToEndConfig {
    pub channel: ChannelSpec,
    pub code: CodeSpec,
    pub experiment: ExperimentSpec,
    pub seed: Option<u64>,
}

impl EndToEndConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        parse(text)
    }
}
