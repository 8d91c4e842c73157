use std::path::Path;

use anyhow::{bail, Context, Result};
use theseus::OptimizerConfig;

/// Environment variable that replaces the default seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "THESEUS_SEED";

/// Values given on the command line. `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub f_limit: Option<f64>,
    pub omega_limit: Option<f64>,
    pub c_limit: Option<usize>,
    pub max_iterations: Option<usize>,
    pub seed: Option<u64>,
}

/// Builds the optimizer settings. Flags beat the config file, which beats
/// `THESEUS_SEED`, which beats the built-in defaults.
pub fn resolve(
    file: Option<&Path>,
    env_seed: Option<&str>,
    flags: &Overrides,
) -> Result<OptimizerConfig> {
    let mut cfg = OptimizerConfig::default();
    if let Some(s) = env_seed {
        cfg.seed = s
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer"))?;
    }
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        cfg = merge_file(cfg, &text).with_context(|| format!("in {}", path.display()))?;
    }
    let Overrides {
        alpha,
        f_limit,
        omega_limit,
        c_limit,
        max_iterations,
        seed,
    } = flags.clone();
    cfg.alpha = alpha.unwrap_or(cfg.alpha);
    cfg.f_limit = f_limit.unwrap_or(cfg.f_limit);
    cfg.omega_limit = omega_limit.unwrap_or(cfg.omega_limit);
    cfg.c_limit = c_limit.unwrap_or(cfg.c_limit);
    cfg.max_iterations = max_iterations.unwrap_or(cfg.max_iterations);
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    Ok(cfg)
}

fn merge_file(base: OptimizerConfig, text: &str) -> Result<OptimizerConfig> {
    let file: toml::Table = text.parse().context("config is not valid TOML")?;
    // Seeds are u64 but TOML integers are i64, so the seed travels separately.
    let seed = match file.get("seed") {
        None => base.seed,
        Some(v) => match v.as_integer() {
            Some(i) if i >= 0 => i as u64,
            _ => bail!("seed must be a non-negative integer"),
        },
    };
    let mut table = toml::Table::try_from(OptimizerConfig { seed: 0, ..base })?;
    for (k, v) in file {
        if k != "seed" {
            table.insert(k, v);
        }
    }
    let mut cfg: OptimizerConfig = table.try_into().context("invalid config")?;
    cfg.seed = seed;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn config_file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn defaults_without_inputs() {
        let cfg = resolve(None, None, &Overrides::default()).unwrap();
        assert_eq!(cfg, OptimizerConfig::default());
    }

    #[test]
    fn precedence_chain() {
        let f = config_file("seed = 7\nalpha = 0.1\n");
        let from_env = resolve(None, Some("3"), &Overrides::default()).unwrap();
        assert_eq!(from_env.seed, 3);
        let from_file = resolve(Some(f.path()), Some("3"), &Overrides::default()).unwrap();
        assert_eq!((from_file.seed, from_file.alpha), (7, 0.1));
        let flags = Overrides {
            seed: Some(11),
            ..Default::default()
        };
        let from_flag = resolve(Some(f.path()), Some("3"), &flags).unwrap();
        assert_eq!((from_flag.seed, from_flag.alpha), (11, 0.1));
    }

    #[test]
    fn env_seed_survives_a_file_without_seed() {
        let f = config_file("c_limit = 4\n");
        let cfg = resolve(Some(f.path()), Some("5"), &Overrides::default()).unwrap();
        assert_eq!((cfg.seed, cfg.c_limit), (5, 4));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(resolve(None, Some("minus one"), &Overrides::default()).is_err());
        let typo = config_file("alpah = 0.1\n");
        assert!(resolve(Some(typo.path()), None, &Overrides::default()).is_err());
        let range = config_file("alpha = 1.5\n");
        assert!(resolve(Some(range.path()), None, &Overrides::default()).is_err());
        let neg = config_file("seed = -2\n");
        assert!(resolve(Some(neg.path()), None, &Overrides::default()).is_err());
    }
}
