//! Plain-text `key = value` run configuration.
//!
//! ```text
//! # comment
//! n_atoms = 5
//! xi_over_pi = 1
//! gamma_left = 0.9
//! gamma_right = 1
//! disorder.mode = single_site
//! disorder.site = 3
//! disorder.shift_fraction = 0.05
//! ```

use std::f64::consts::PI;
use std::str::FromStr;

use crate::chain::{ChainConfig, DisorderSpec, Fluctuation};
use crate::error::{Error, Result};

pub const DEFAULT_N_ATOMS: usize = 5;
pub const DEFAULT_XI_OVER_PI: f64 = 1.0;
pub const DEFAULT_GAMMA_LEFT: f64 = 0.9;
pub const DEFAULT_GAMMA_RIGHT: f64 = 1.0;
pub const DEFAULT_SEED: u64 = 0;

/// Every recognised key.
pub const KEYS: [&str; 11] = [
    "n_atoms",
    "xi_over_pi",
    "gamma_left",
    "gamma_right",
    "disorder.mode",
    "disorder.site",
    "disorder.shift_fraction",
    "disorder.fluctuation_fraction",
    "disorder.n_realizations",
    "disorder.seed",
    "disorder.distribution",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisorderMode {
    None,
    SingleSite,
    Ensemble,
}

impl FromStr for DisorderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(DisorderMode::None),
            "single_site" => Ok(DisorderMode::SingleSite),
            "ensemble" => Ok(DisorderMode::Ensemble),
            _ => Err(format!(
                "unknown disorder mode '{s}' (none, single_site, ensemble)"
            )),
        }
    }
}

fn parse_distribution(s: &str) -> std::result::Result<Fluctuation, String> {
    match s {
        "gaussian" => Ok(Fluctuation::Gaussian),
        "uniform" => Ok(Fluctuation::Uniform),
        _ => Err(format!("unknown distribution '{s}' (gaussian, uniform)")),
    }
}

/// Partially specified run settings; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub n_atoms: Option<usize>,
    pub xi_over_pi: Option<f64>,
    pub gamma_left: Option<f64>,
    pub gamma_right: Option<f64>,
    pub mode: Option<DisorderMode>,
    pub site: Option<usize>,
    pub shift_fraction: Option<f64>,
    pub fluctuation_fraction: Option<f64>,
    pub n_realizations: Option<usize>,
    pub seed: Option<u64>,
    pub distribution: Option<Fluctuation>,
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| Error::Config(format!("line {line}: bad value '{raw}' for {key}: {e}")))
}

impl Settings {
    pub fn parse(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        let mut seen = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, raw) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected 'key = value'")))?;
            let (key, raw) = (key.trim(), raw.trim());
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {line}: duplicate key {key}")));
            }
            match key {
                "n_atoms" => s.n_atoms = Some(value(key, raw, line)?),
                "xi_over_pi" => s.xi_over_pi = Some(value(key, raw, line)?),
                "gamma_left" => s.gamma_left = Some(value(key, raw, line)?),
                "gamma_right" => s.gamma_right = Some(value(key, raw, line)?),
                "disorder.mode" => s.mode = Some(value(key, raw, line)?),
                "disorder.site" => s.site = Some(value(key, raw, line)?),
                "disorder.shift_fraction" => s.shift_fraction = Some(value(key, raw, line)?),
                "disorder.fluctuation_fraction" => {
                    s.fluctuation_fraction = Some(value(key, raw, line)?)
                }
                "disorder.n_realizations" => s.n_realizations = Some(value(key, raw, line)?),
                "disorder.seed" => s.seed = Some(value(key, raw, line)?),
                "disorder.distribution" => {
                    s.distribution = Some(
                        parse_distribution(raw)
                            .map_err(|e| Error::Config(format!("line {line}: {e}")))?,
                    )
                }
                _ => {
                    return Err(Error::Config(format!(
                        "line {line}: unknown key '{key}' (known: {})",
                        KEYS.join(", ")
                    )))
                }
            }
            seen.push(key);
        }
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Settings> {
        Settings::parse(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: Settings) -> Settings {
        Settings {
            n_atoms: top.n_atoms.or(self.n_atoms),
            xi_over_pi: top.xi_over_pi.or(self.xi_over_pi),
            gamma_left: top.gamma_left.or(self.gamma_left),
            gamma_right: top.gamma_right.or(self.gamma_right),
            mode: top.mode.or(self.mode),
            site: top.site.or(self.site),
            shift_fraction: top.shift_fraction.or(self.shift_fraction),
            fluctuation_fraction: top.fluctuation_fraction.or(self.fluctuation_fraction),
            n_realizations: top.n_realizations.or(self.n_realizations),
            seed: top.seed.or(self.seed),
            distribution: top.distribution.or(self.distribution),
        }
    }

    fn inferred_mode(&self) -> DisorderMode {
        self.mode
            .unwrap_or(if self.site.is_some() || self.shift_fraction.is_some() {
                DisorderMode::SingleSite
            } else if self.fluctuation_fraction.is_some() {
                DisorderMode::Ensemble
            } else {
                DisorderMode::None
            })
    }

    pub fn chain(&self) -> Result<ChainConfig> {
        let cfg = ChainConfig::uniform(
            self.n_atoms.unwrap_or(DEFAULT_N_ATOMS),
            xi_from_multiple_of_pi(self.xi_over_pi.unwrap_or(DEFAULT_XI_OVER_PI))?,
            self.gamma_left.unwrap_or(DEFAULT_GAMMA_LEFT),
            self.gamma_right.unwrap_or(DEFAULT_GAMMA_RIGHT),
        );
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn disorder(&self, n_atoms: usize) -> Result<DisorderSpec> {
        let spec = match self.inferred_mode() {
            DisorderMode::None => DisorderSpec::None,
            DisorderMode::SingleSite => DisorderSpec::SingleSite {
                site: self
                    .site
                    .ok_or_else(|| Error::Config("single-site disorder needs a site".into()))?,
                shift_fraction: self.shift_fraction.ok_or_else(|| {
                    Error::Config("single-site disorder needs a shift fraction".into())
                })?,
            },
            DisorderMode::Ensemble => DisorderSpec::Ensemble {
                fluctuation_fraction: self.fluctuation_fraction.ok_or_else(|| {
                    Error::Config("ensemble disorder needs a fluctuation fraction".into())
                })?,
                n_realizations: self
                    .n_realizations
                    .unwrap_or(crate::analysis::DEFAULT_REALIZATIONS),
                seed: self.seed.unwrap_or(DEFAULT_SEED),
                distribution: self.distribution.unwrap_or_default(),
            },
        };
        spec.validate(n_atoms)?;
        Ok(spec)
    }

    pub fn disorder_mode(&self) -> DisorderMode {
        self.inferred_mode()
    }
}

/// Spacing phase for `ξ/π = x`. A spacing of zero is represented by a full
/// period, which leaves every coupling phase unchanged but keeps the atoms
/// strictly ordered.
pub fn xi_from_multiple_of_pi(x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Config(format!(
            "xi_over_pi must be finite and >= 0, got {x}"
        )));
    }
    Ok(if x == 0.0 { 2.0 * PI } else { x * PI })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "\
# full example
n_atoms = 4
xi_over_pi = 0.75   # trailing comment
gamma_left = 0.5
gamma_right = 1
disorder.mode = ensemble
disorder.site = 2
disorder.shift_fraction = 0.1
disorder.fluctuation_fraction = 0.01
disorder.n_realizations = 50
disorder.seed = 9
disorder.distribution = uniform
";
        let s = Settings::parse(text).unwrap();
        assert_eq!(s.n_atoms, Some(4));
        assert_eq!(s.xi_over_pi, Some(0.75));
        assert_eq!(s.mode, Some(DisorderMode::Ensemble));
        assert_eq!(s.distribution, Some(Fluctuation::Uniform));
        let d = s.disorder(4).unwrap();
        assert_eq!(
            d,
            DisorderSpec::Ensemble {
                fluctuation_fraction: 0.01,
                n_realizations: 50,
                seed: 9,
                distribution: Fluctuation::Uniform
            }
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "n_atoms 4",
            "n_atoms = four",
            "colour = red",
            "n_atoms = 2\nn_atoms = 3",
        ] {
            assert!(
                matches!(Settings::parse(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn overlay_prefers_top_layer() {
        let file = Settings::parse("n_atoms = 3\ngamma_left = 0.2").unwrap();
        let flags = Settings {
            n_atoms: Some(7),
            ..Settings::default()
        };
        let s = file.overlay(flags);
        assert_eq!(s.n_atoms, Some(7));
        assert_eq!(s.gamma_left, Some(0.2));
    }

    #[test]
    fn mode_is_inferred() {
        let s = Settings {
            site: Some(2),
            shift_fraction: Some(0.05),
            ..Settings::default()
        };
        assert_eq!(s.disorder_mode(), DisorderMode::SingleSite);
        assert_eq!(Settings::default().disorder(3).unwrap(), DisorderSpec::None);
        let missing = Settings {
            site: Some(2),
            ..Settings::default()
        };
        assert!(missing.disorder(3).is_err());
    }

    #[test]
    fn zero_spacing_maps_to_full_period() {
        assert_eq!(xi_from_multiple_of_pi(0.0).unwrap(), 2.0 * PI);
        assert_eq!(xi_from_multiple_of_pi(0.75).unwrap(), 0.75 * PI);
        assert!(xi_from_multiple_of_pi(-1.0).is_err());
    }
}
