//! `--sweep key=v1,v2,...` over one scenario parameter.
//!
//! Keys: `T` and `N` (collision), `gamma` (lindblad), `bloch` with values
//! written `x:y:z` (any scenario).

use std::str::FromStr;

use crate::config::{ScenarioConfig, ScenarioName};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Interval(Vec<f64>),
    Collisions(Vec<usize>),
    Gamma(Vec<f64>),
    Bloch(Vec<[f64; 3]>),
}

fn parse_list<T: FromStr>(key: &str, values: &str) -> Result<Vec<T>, CliError> {
    values
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("sweep {key}: cannot parse {v:?}")))
        })
        .collect()
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let (key, values) = text
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("sweep {text:?}: expected key=v1,v2,...")))?;
        if values.trim().is_empty() {
            return Err(CliError::Config(format!("sweep {key}: no values")));
        }
        match key.trim() {
            "T" => Ok(Self::Interval(parse_list(key, values)?)),
            "N" => Ok(Self::Collisions(parse_list(key, values)?)),
            "gamma" => Ok(Self::Gamma(parse_list(key, values)?)),
            "bloch" => values
                .split(',')
                .map(|v| {
                    let parts: Vec<f64> = parse_list(key, &v.replace(':', ","))?;
                    <[f64; 3]>::try_from(parts).map_err(|_| {
                        CliError::Config(format!("sweep bloch: {v:?} is not x:y:z"))
                    })
                })
                .collect::<Result<_, _>>()
                .map(Self::Bloch),
            other => Err(CliError::Config(format!(
                "unknown sweep key {other:?} (expected T, N, gamma or bloch)"
            ))),
        }
    }
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Self::Interval(v) | Self::Gamma(v) => v.len(),
            Self::Collisions(v) => v.len(),
            Self::Bloch(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One configuration per swept value, in sweep order.
    pub fn expand(&self, base: &ScenarioConfig) -> Result<Vec<ScenarioConfig>, CliError> {
        let needs = |scenario: ScenarioName, key: &str| {
            if base.scenario == scenario {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "sweep key {key} applies to the {} scenario, not {}",
                    scenario.as_str(),
                    base.scenario.as_str()
                )))
            }
        };
        let with = |f: &dyn Fn(&mut ScenarioConfig, usize)| {
            (0..self.len())
                .map(|i| {
                    let mut cfg = base.clone();
                    f(&mut cfg, i);
                    cfg
                })
                .collect()
        };
        Ok(match self {
            Self::Interval(v) => {
                needs(ScenarioName::Collision, "T")?;
                with(&|c, i| c.interval = Some(v[i]))
            }
            Self::Collisions(v) => {
                needs(ScenarioName::Collision, "N")?;
                with(&|c, i| c.collisions = Some(v[i]))
            }
            Self::Gamma(v) => {
                needs(ScenarioName::Lindblad, "gamma")?;
                with(&|c, i| c.gamma = Some(v[i]))
            }
            Self::Bloch(v) => with(&|c, i| c.bloch = Some(v[i])),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sweep_arguments() {
        assert_eq!("T=0.1,0.2".parse::<Sweep>().unwrap(), Sweep::Interval(vec![0.1, 0.2]));
        assert_eq!("N=3".parse::<Sweep>().unwrap(), Sweep::Collisions(vec![3]));
        assert_eq!(
            "bloch=1:0:0,0:0.5:0".parse::<Sweep>().unwrap(),
            Sweep::Bloch(vec![[1.0, 0.0, 0.0], [0.0, 0.5, 0.0]])
        );
        for bad in ["T", "T=", "x=1", "N=1.5", "bloch=1:0", "gamma=a"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }

    #[test]
    fn expansion_checks_scenario() {
        let base = ScenarioConfig::named(ScenarioName::Lindblad);
        let cfgs = Sweep::Gamma(vec![0.5, 1.0]).expand(&base).unwrap();
        assert_eq!(cfgs[1].gamma, Some(1.0));
        assert!(Sweep::Interval(vec![0.1]).expand(&base).is_err());
        assert_eq!(Sweep::Bloch(vec![[0.0; 3]; 3]).expand(&base).unwrap().len(), 3);
    }
}
