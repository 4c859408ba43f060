//! Experiment configuration: a flat TOML file whose keys mirror the CLI
//! flags, overridden field by field by whatever flags were given.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use risgroup_core::{Geometry, PathLossModel, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

/// Where the closed form takes `zeta` and `c` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsMode {
    /// zeta = 2.08 beta_l, c = 0.7671 beta_l
    Published,
    /// c = kappa^2 and zeta = e c from a fresh sqrt(B) fit of z
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    GroupSize,
    Subgroups,
    Power,
    Coherence,
}

impl SweepVar {
    pub fn column(self) -> &'static str {
        match self {
            SweepVar::GroupSize => "B",
            SweepVar::Subgroups => "K_prime",
            SweepVar::Power => "P_dbm",
            SweepVar::Coherence => "T_c",
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, SweepVar::Power)
    }

    fn parse(name: &str) -> Result<Self> {
        Ok(match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "b" => SweepVar::GroupSize,
            "k_prime" | "kprime" | "kp" | "k'" => SweepVar::Subgroups,
            "p" | "p_dbm" => SweepVar::Power,
            "tc" | "t_c" => SweepVar::Coherence,
            other => bail!("unknown sweep variable `{other}` (expected B, K_prime, P_dbm or T_c)"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// `VAR=START:STOP:STEP` (inclusive) or `VAR=V1,V2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, grid) = text
            .split_once('=')
            .ok_or_else(|| anyhow!("sweep `{text}` is not of the form VAR=START:STOP:STEP"))?;
        let var = SweepVar::parse(name)?;
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("sweep `{text}`: `{s}` is not a number"))
        };
        let values = if grid.contains(':') {
            let parts: Vec<&str> = grid.split(':').collect();
            let [start, stop, step] = parts[..] else {
                bail!("sweep `{text}`: range needs exactly START:STOP:STEP");
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || !step.is_finite() {
                bail!("sweep `{text}`: step must be positive");
            }
            if start.is_nan() || stop.is_nan() || start > stop {
                bail!("sweep `{text}`: start must not exceed stop");
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + step * i as f64).collect()
        } else {
            grid.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        if values.is_empty() {
            bail!("sweep `{text}`: empty grid");
        }
        for v in &values {
            if !v.is_finite() {
                bail!("sweep `{text}`: non-finite grid value");
            }
            if var.is_integer() && (v.fract() != 0.0 || *v < 1.0) {
                bail!("sweep `{text}`: {} must be a positive integer, got {v}", var.column());
            }
        }
        Ok(SweepSpec { var, values })
    }
}

/// Every setting that may come from the config file or a flag.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub k: Option<usize>,
    pub b: Option<usize>,
    pub tc: Option<usize>,
    pub p_dbm: Option<f64>,
    pub ptr_dbm: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub d0: Option<f64>,
    pub d: Option<f64>,
    pub dv: Option<f64>,
    pub c0_db: Option<f64>,
    pub alpha_direct: Option<f64>,
    pub alpha_cascaded: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub sweep: Option<String>,
    pub onoff: Option<bool>,
    pub perfect_csi: Option<bool>,
    pub constants: Option<ConstantsMode>,
    pub b_max: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow!("{e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(self, other: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            k, b, tc, p_dbm, ptr_dbm, noise_dbm, d0, d, dv, c0_db, alpha_direct, alpha_cascaded,
            trials, seed, sweep, onoff, perfect_csi, constants, b_max, workers, out, format
        )
    }
}

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_FIT_RANGE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub b: usize,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<SweepSpec>,
    pub onoff: bool,
    pub perfect_csi: bool,
    pub constants: ConstantsMode,
    pub b_max: usize,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::resolve(Settings::default()).expect("defaults are valid")
    }
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("invalid value for `{key}` (--{key}): {reason}")
}

impl ExperimentConfig {
    /// Fills unset fields with the default scenario and checks ranges.
    pub fn resolve(s: Settings) -> Result<Self> {
        let base = Scenario::default();
        let geometry = Geometry {
            d0: s.d0.unwrap_or(base.geometry.d0),
            d: s.d.unwrap_or(base.geometry.d),
            dv: s.dv.unwrap_or(base.geometry.dv),
        };
        let pathloss = PathLossModel {
            c0_db: s.c0_db.unwrap_or(base.pathloss.c0_db),
            alpha_direct: s.alpha_direct.unwrap_or(base.pathloss.alpha_direct),
            alpha_cascaded: s.alpha_cascaded.unwrap_or(base.pathloss.alpha_cascaded),
        };
        let scenario = Scenario {
            geometry,
            pathloss,
            k: s.k.unwrap_or(base.k),
            tc: s.tc.unwrap_or(base.tc),
            p_dbm: s.p_dbm.unwrap_or(base.p_dbm),
            p_tr_dbm: s.ptr_dbm.unwrap_or(base.p_tr_dbm),
            noise_dbm: s.noise_dbm.unwrap_or(base.noise_dbm),
        };

        if scenario.k == 0 {
            return Err(invalid("k", "need at least one RIS element"));
        }
        if scenario.tc == 0 {
            return Err(invalid("tc", "coherence block must be at least one symbol"));
        }
        for (key, value) in [
            ("d0", geometry.d0),
            ("d", geometry.d),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(key, format!("distance must be positive, got {value}")));
            }
        }
        if !(geometry.dv.is_finite() && geometry.dv >= 0.0) {
            return Err(invalid("dv", format!("offset must be non-negative, got {}", geometry.dv)));
        }
        geometry.validate().map_err(|e| invalid("dv", e))?;
        for (key, value) in [
            ("alpha-direct", pathloss.alpha_direct),
            ("alpha-cascaded", pathloss.alpha_cascaded),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(invalid(key, format!("exponent must be non-negative, got {value}")));
            }
        }
        for (key, value) in [
            ("c0-db", pathloss.c0_db),
            ("p-dbm", scenario.p_dbm),
            ("ptr-dbm", scenario.p_tr_dbm),
            ("noise-dbm", scenario.noise_dbm),
        ] {
            if !value.is_finite() {
                return Err(invalid(key, format!("must be finite, got {value}")));
            }
        }

        let b = s.b.unwrap_or(1);
        if b == 0 || b > scenario.k {
            return Err(invalid("b", format!("group size must lie in 1..={}, got {b}", scenario.k)));
        }
        let trials = s.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(invalid("trials", "need at least one trial"));
        }
        let b_max = s.b_max.unwrap_or(DEFAULT_FIT_RANGE);
        if b_max < 8 {
            return Err(invalid("b-max", format!("fit range must reach at least 8, got {b_max}")));
        }
        if s.workers == Some(0) {
            return Err(invalid("workers", "need at least one worker"));
        }

        let sweep = match &s.sweep {
            Some(text) => {
                let spec = SweepSpec::parse(text).map_err(|e| invalid("sweep", e))?;
                let too_big = |v: f64| v as usize > scenario.k;
                if matches!(spec.var, SweepVar::GroupSize | SweepVar::Subgroups)
                    && spec.values.iter().any(|v| too_big(*v))
                {
                    return Err(invalid(
                        "sweep",
                        format!("{} grid exceeds K = {}", spec.var.column(), scenario.k),
                    ));
                }
                Some(spec)
            }
            None => None,
        };

        Ok(ExperimentConfig {
            scenario,
            b,
            trials,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            sweep,
            onoff: s.onoff.unwrap_or(false),
            perfect_csi: s.perfect_csi.unwrap_or(false),
            constants: s.constants.unwrap_or(ConstantsMode::Published),
            b_max,
            workers: s.workers,
            out: s.out,
            format: s.format.unwrap_or(Format::Csv),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_default_scenario() {
        let cfg = ExperimentConfig::resolve(Settings::from_toml("").unwrap()).unwrap();
        assert_eq!(cfg.scenario, Scenario::default());
        assert_eq!(cfg.scenario.k, 360);
        assert_eq!(cfg.scenario.tc, 900);
        assert_eq!(cfg.scenario.p_dbm, 0.0);
        assert_eq!(cfg.scenario.noise_dbm, -80.0);
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::from_toml("tc = 900\nk = 120\np-dbm = 5.0\n").unwrap();
        let flags = Settings {
            tc: Some(500),
            ..Settings::default()
        };
        let cfg = ExperimentConfig::resolve(file.overlay(flags)).unwrap();
        assert_eq!(cfg.scenario.tc, 500);
        assert_eq!(cfg.scenario.k, 120);
        assert_eq!(cfg.scenario.p_dbm, 5.0);
    }

    #[test]
    fn unknown_key_reports_location() {
        let err = Settings::from_toml("k = 10\nbogus = 3\n").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn out_of_range_values_name_the_key() {
        let bad = |s: Settings| ExperimentConfig::resolve(s).unwrap_err().to_string();
        assert!(bad(Settings { k: Some(0), ..Default::default() }).contains("`k`"));
        assert!(bad(Settings { b: Some(400), ..Default::default() }).contains("`b`"));
        assert!(bad(Settings { d0: Some(-1.0), ..Default::default() }).contains("`d0`"));
        assert!(bad(Settings { trials: Some(0), ..Default::default() }).contains("`trials`"));
        let zero_b = bad(Settings {
            sweep: Some("b=0:4:1".into()),
            ..Default::default()
        });
        assert!(zero_b.contains("`sweep`") && zero_b.contains("positive integer"), "{zero_b}");
        assert!(bad(Settings { sweep: Some("b=1,500".into()), ..Default::default() }).contains("exceeds K"));
    }

    #[test]
    fn sweep_grammar() {
        let s = SweepSpec::parse("B=1:5:2").unwrap();
        assert_eq!(s.var, SweepVar::GroupSize);
        assert_eq!(s.values, vec![1.0, 3.0, 5.0]);
        let p = SweepSpec::parse("p_dbm=-10:20:5").unwrap();
        assert_eq!(p.var, SweepVar::Power);
        assert_eq!(p.values.len(), 7);
        assert_eq!(p.values[6], 20.0);
        let tc = SweepSpec::parse("T_c=300,500,2000").unwrap();
        assert_eq!(tc.values, vec![300.0, 500.0, 2000.0]);
        assert_eq!(SweepSpec::parse("kprime=45").unwrap().var, SweepVar::Subgroups);
        assert!(SweepSpec::parse("x=1:2:1").is_err());
        assert!(SweepSpec::parse("b=1:2").is_err());
        assert!(SweepSpec::parse("b=1:5:0").is_err());
        assert!(SweepSpec::parse("b=2.5").is_err());
        assert!(SweepSpec::parse("b").is_err());
    }
}
