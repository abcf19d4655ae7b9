//! Flat `key=value` text form of [`LossSpec`].
//!
//! ```text
//! family=exponential      lambda=<rate>
//! family=pareto           a=<shape> c=<scale>
//! family=lognormal        mu=<mu> sigma_sq=<sigma^2>
//! family=compound_poisson lambda=<freq> sev_family=exponential sev_lambda=<rate>
//! family=compound_poisson lambda=<freq> sev_family=lognormal sev_mu=<mu> sev_sigma_sq=<sigma^2>
//! family=compound_general freq_mean= freq_var= freq_skew= freq_exkurt=
//!                         sev_mean= sev_var= sev_skew= sev_exkurt=
//! ```
//!
//! Pairs are whitespace separated. A key given twice keeps its last value,
//! so command-line pairs can override a config file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{ComponentMoments, LossSpec, Severity};
use crate::error::{Error, Result};

const COMPONENT_KEYS: [&str; 4] = ["mean", "var", "skew", "exkurt"];

/// Reads `key=value` pairs from config-file text: one or more pairs per
/// line, `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            pairs.push(split_pair(token)?);
        }
    }
    Ok(pairs)
}

fn split_pair(token: &str) -> Result<(String, String)> {
    match token.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(Error::parse(token, "expected key=value")),
    }
}

struct Pairs {
    map: BTreeMap<String, String>,
}

impl Pairs {
    fn take_str(&mut self, key: &str) -> Result<String> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::parse(key, "missing"))
    }

    fn take(&mut self, key: &str) -> Result<f64> {
        let raw = self.take_str(key)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::parse(key, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::parse(key, "must be finite"));
        }
        Ok(v)
    }

    fn component(&mut self, prefix: &str) -> Result<ComponentMoments> {
        let mut v = [0.0; 4];
        for (slot, name) in v.iter_mut().zip(COMPONENT_KEYS) {
            *slot = self.take(&format!("{prefix}_{name}"))?;
        }
        Ok(ComponentMoments {
            mean: v[0],
            variance: v[1],
            skewness: v[2],
            excess_kurtosis: v[3],
        })
    }

    fn finish(self, family: &str) -> Result<()> {
        match self.map.into_keys().next() {
            Some(key) => Err(Error::parse(key, format!("not a parameter of family {family}"))),
            None => Ok(()),
        }
    }
}

impl LossSpec {
    /// Builds a spec from `key=value` pairs and validates it.
    pub fn from_pairs<K, V>(pairs: impl IntoIterator<Item = (K, V)>) -> Result<LossSpec>
    where
        K: Into<String>,
        V: Into<String>,
    {
        let mut p = Pairs {
            map: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        };
        let family = p.take_str("family")?;
        let spec = match family.as_str() {
            "exponential" => LossSpec::Exponential { rate: p.take("lambda")? },
            "pareto" | "pareto_i" => LossSpec::ParetoI {
                shape: p.take("a")?,
                scale: p.take("c")?,
            },
            "lognormal" => LossSpec::Lognormal {
                mu: p.take("mu")?,
                sigma_sq: p.take("sigma_sq")?,
            },
            "compound_poisson" => {
                let lambda = p.take("lambda")?;
                let sev_family = p.take_str("sev_family")?;
                let severity = match sev_family.as_str() {
                    "exponential" => Severity::Exponential { rate: p.take("sev_lambda")? },
                    "lognormal" => Severity::Lognormal {
                        mu: p.take("sev_mu")?,
                        sigma_sq: p.take("sev_sigma_sq")?,
                    },
                    other => {
                        return Err(Error::parse(
                            "sev_family",
                            format!("unknown severity `{other}` (exponential|lognormal)"),
                        ))
                    }
                };
                LossSpec::CompoundPoisson { lambda, severity }
            }
            "compound_general" => LossSpec::CompoundGeneral {
                frequency: p.component("freq")?,
                severity: p.component("sev")?,
            },
            other => {
                return Err(Error::parse(
                    "family",
                    format!(
                        "unknown family `{other}` \
                         (exponential|pareto|lognormal|compound_poisson|compound_general)"
                    ),
                ))
            }
        };
        p.finish(&family)?;
        spec.validate()?;
        Ok(spec)
    }
}

impl FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pairs = s
            .split_whitespace()
            .map(split_pair)
            .collect::<Result<Vec<_>>>()?;
        LossSpec::from_pairs(pairs)
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={}", self.family_name())?;
        match self {
            LossSpec::Exponential { rate } => write!(f, " lambda={rate}"),
            LossSpec::ParetoI { shape, scale } => write!(f, " a={shape} c={scale}"),
            LossSpec::Lognormal { mu, sigma_sq } => write!(f, " mu={mu} sigma_sq={sigma_sq}"),
            LossSpec::CompoundPoisson { lambda, severity } => {
                write!(f, " lambda={lambda}")?;
                match severity {
                    Severity::Exponential { rate } => {
                        write!(f, " sev_family=exponential sev_lambda={rate}")
                    }
                    Severity::Lognormal { mu, sigma_sq } => write!(
                        f,
                        " sev_family=lognormal sev_mu={mu} sev_sigma_sq={sigma_sq}"
                    ),
                }
            }
            LossSpec::CompoundGeneral {
                frequency,
                severity,
            } => {
                for (prefix, c) in [("freq", frequency), ("sev", severity)] {
                    let values = [c.mean, c.variance, c.skewness, c.excess_kurtosis];
                    for (name, v) in COMPONENT_KEYS.iter().zip(values) {
                        write!(f, " {prefix}_{name}={v}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_compound_poisson() {
        let spec: LossSpec = "family=compound_poisson lambda=4 sev_family=lognormal sev_mu=3 sev_sigma_sq=1.21"
            .parse()
            .unwrap();
        assert_eq!(
            spec,
            LossSpec::CompoundPoisson {
                lambda: 4.0,
                severity: Severity::Lognormal { mu: 3.0, sigma_sq: 1.21 },
            }
        );
    }

    #[test]
    fn round_trips() {
        let specs = [
            "family=exponential lambda=1",
            "family=pareto a=5 c=10",
            "family=lognormal mu=5 sigma_sq=1.21",
            "family=compound_poisson lambda=0.5 sev_family=exponential sev_lambda=2",
            "family=compound_general freq_mean=3 freq_var=5 freq_skew=1.2 freq_exkurt=2.1 \
             sev_mean=2 sev_var=0.7 sev_skew=0.4 sev_exkurt=0.3",
        ];
        for text in specs {
            let spec: LossSpec = text.parse().unwrap();
            let again: LossSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        assert_eq!("family=pareto a=5 c=10".parse::<LossSpec>().unwrap().to_string(), "family=pareto a=5 c=10");
    }

    #[test]
    fn reports_offending_key() {
        let key_of = |text: &str| match text.parse::<LossSpec>() {
            Err(Error::Parse { key, .. }) => key,
            other => panic!("{text}: {other:?}"),
        };
        assert_eq!(key_of("family=exponential"), "lambda");
        assert_eq!(key_of("family=exponential lambda=x"), "lambda");
        assert_eq!(key_of("family=exponential lambda=1 mu=2"), "mu");
        assert_eq!(key_of("family=gamma"), "family");
        assert_eq!(key_of("family=compound_poisson lambda=1 sev_family=pareto"), "sev_family");
        assert_eq!(key_of("lambda"), "lambda");
    }

    #[test]
    fn validates_after_parsing() {
        assert!(matches!("family=pareto a=3 c=1".parse::<LossSpec>(), Err(Error::Domain(_))));
        assert!(matches!("family=exponential lambda=-1".parse::<LossSpec>(), Err(Error::Domain(_))));
    }

    #[test]
    fn config_text_with_comments_and_overrides() {
        let text = "# severity\nfamily=compound_poisson  lambda=4\nsev_family=lognormal\n\
                    sev_mu=3 sev_sigma_sq=1.21 # underlying normal\n";
        let mut pairs = parse_config(text).unwrap();
        assert_eq!(pairs.len(), 5);
        pairs.push(("lambda".into(), "60".into()));
        match LossSpec::from_pairs(pairs).unwrap() {
            LossSpec::CompoundPoisson { lambda, .. } => assert_eq!(lambda, 60.0),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("family exponential").is_err());
    }
}
