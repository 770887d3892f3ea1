//! Optional `key=value` defaults file and the `LP_PC_SITE` override.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use lattice_pressure::models::DEFAULT_P_C_SITE;

pub const PC_SITE_ENV: &str = "LP_PC_SITE";

/// Values read from a config file, keyed by flag name without dashes.
#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(format!("config line {}: expected key=value", i + 1));
            };
            let key = k.trim().trim_start_matches("--").to_string();
            values.insert(key, v.trim().to_string());
        }
        Ok(Config { values })
    }

    /// The flag value if given, else the config value parsed as `T`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("config value for `{key}` cannot be parsed: {v}")),
        }
    }

    /// Site-percolation threshold: environment, then config, then the
    /// built-in default.
    pub fn p_c_site(&self) -> Result<f64, String> {
        let raw = match std::env::var(PC_SITE_ENV) {
            Ok(v) => Some(v),
            Err(_) => self.values.get("p_c_site").cloned(),
        };
        let Some(raw) = raw else { return Ok(DEFAULT_P_C_SITE) };
        let v: f64 = raw.trim().parse().map_err(|_| format!("p_c_site is not a number: {raw}"))?;
        if !(v > 0.0 && v < 1.0) {
            return Err(format!("p_c_site must lie in (0, 1), got {v}"));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prefers_flags() {
        let c = Config::parse("# defaults\nmodel = potts\nq=3\n--beta=0.5 # inline\n").unwrap();
        assert_eq!(c.pick::<usize>(None, "q").unwrap(), Some(3));
        assert_eq!(c.pick(Some(4usize), "q").unwrap(), Some(4));
        assert_eq!(c.pick::<f64>(None, "beta").unwrap(), Some(0.5));
        assert_eq!(c.pick::<f64>(None, "gamma").unwrap(), None);
        assert!(c.pick::<usize>(None, "model").is_err());
        assert!(Config::parse("nonsense").is_err());
    }
}
