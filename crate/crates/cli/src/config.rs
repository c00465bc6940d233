//! Run configuration: a TOML file with `weight`, `system`, `query`,
//! `oracle`, `verify`, `scan` and `output` blocks.

use std::fmt;
use std::path::Path;

use charpoly_ratios::{DomainSpec, Family, MuGroup, OracleConfig, RatioQuery, WeightSpec};
use num_complex::Complex64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// Complex number written as `"re+imi"` or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C(pub Complex64);

impl Serialize for C {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for C {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct CVisitor;

        impl<'de> Visitor<'de> for CVisitor {
            type Value = C;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a complex number as \"re+imi\", a real number or [re, im]")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<C, E> {
                parse_complex(v).map(C).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<C, E> {
                Ok(C(Complex64::new(v, 0.0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<C, E> {
                Ok(C(Complex64::new(v as f64, 0.0)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<C, E> {
                Ok(C(Complex64::new(v as f64, 0.0)))
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<C, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(C(Complex64::new(re, im)))
            }
        }

        d.deserialize_any(CVisitor)
    }
}

/// Parses `"1.5"`, `"2i"`, `"-i"`, `"1-2.5i"`, `"3e-2+1e1i"`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number {text:?}");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().map_err(|_| bad())? };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Gaussian,
    DiskFlat,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Gaussian,
    DiskFlat,
    EllipticGaussian,
    ShiftedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainName {
    Disk,
    FullPlane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub kind: WeightKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<C>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub value: C,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub n: usize,
    #[serde(default)]
    pub mus: Vec<C>,
    #[serde(default)]
    pub epsbars: Vec<C>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confluent: Option<Vec<GroupConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: Vec<usize>,
    pub l: Vec<usize>,
    pub m: Vec<usize>,
    /// Distance of the variables outside the eigenvalue support.
    pub gap: f64,
    pub tolerance: f64,
    /// Multiplies the formula's prefactor; only for testing the harness.
    pub corrupt_prefactor: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n: vec![1, 2],
            l: vec![0, 1, 2],
            m: vec![0, 1, 2],
            gap: 0.6,
            tolerance: 1e-6,
            corrupt_prefactor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVariable {
    Mu,
    Epsbar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub variable: ScanVariable,
    #[serde(default)]
    pub index: usize,
    pub start: C,
    pub end: C,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub weight: WeightConfig,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<QueryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn weight_spec(&self) -> Result<WeightSpec, CliError> {
        let w = &self.weight;
        let field = |name: &str| CliError::Config(format!("weight.{name} is required for this weight"));
        let spec = match w.kind {
            WeightKind::Gaussian => WeightSpec::gaussian_with_scale(w.scale.unwrap_or(1.0))?,
            WeightKind::DiskFlat => WeightSpec::disk_flat(w.radius.unwrap_or(1.0))?,
            WeightKind::Custom => {
                let family = match w.family.ok_or_else(|| field("family"))? {
                    FamilyName::Gaussian => Family::Gaussian {
                        scale: w.scale.unwrap_or(1.0),
                    },
                    FamilyName::DiskFlat => Family::DiskFlat {
                        radius: w.radius.ok_or_else(|| field("radius"))?,
                    },
                    FamilyName::EllipticGaussian => Family::EllipticGaussian {
                        tau: w.tau.ok_or_else(|| field("tau"))?,
                    },
                    FamilyName::ShiftedGaussian => Family::ShiftedGaussian {
                        center: w.center.ok_or_else(|| field("center"))?.0,
                        scale: w.scale.unwrap_or(1.0),
                    },
                };
                let domain = match w.domain.ok_or_else(|| field("domain"))? {
                    DomainName::Disk => DomainSpec::Disk {
                        radius: w.radius.ok_or_else(|| field("radius"))?,
                    },
                    DomainName::FullPlane => DomainSpec::FullPlane { cutoff: w.cutoff },
                };
                WeightSpec::custom(family, domain)?
            }
        };
        let spec = match w.prefactor {
            Some(c) => spec.scaled(c)?,
            None => spec,
        };
        Ok(match w.tolerance {
            Some(t) => spec.with_tolerance(t)?,
            None => spec,
        })
    }

    pub fn query_config(&self) -> Result<&QueryConfig, CliError> {
        self.query
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [query] block".into()))
    }

    /// The query, validated against the system depth before any computation.
    pub fn ratio_query(&self) -> Result<RatioQuery, CliError> {
        let q = self.query_config()?;
        let epsbars: Vec<Complex64> = q.epsbars.iter().map(|c| c.0).collect();
        let query = match &q.confluent {
            Some(groups) => {
                if !q.mus.is_empty() {
                    return Err(CliError::Config(
                        "query.mus and query.confluent are mutually exclusive".into(),
                    ));
                }
                let groups = groups
                    .iter()
                    .map(|g| MuGroup {
                        value: g.value.0,
                        multiplicity: g.multiplicity,
                    })
                    .collect();
                RatioQuery::confluent(q.n, groups, epsbars)?
            }
            None => RatioQuery::new(q.n, q.mus.iter().map(|c| c.0).collect(), epsbars)?,
        };
        let needed = query.n + query.l();
        if let Some(d) = self.system.max_degree {
            if d + 1 < needed {
                return Err(charpoly_ratios::Error::InsufficientDepth {
                    required: needed - 1,
                    available: d,
                }
                .into());
            }
        }
        Ok(query)
    }

    /// Degree of the orthogonal system: the configured depth, or what the
    /// query needs.
    pub fn max_degree(&self, needed: usize) -> usize {
        self.system.max_degree.unwrap_or(needed)
    }
}
