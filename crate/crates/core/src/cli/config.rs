//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// Keys accepted in configuration files; they mirror the long flag names.
pub const KNOWN_KEYS: &[&str] = &[
    "model",
    "h",
    "ecenter",
    "energy",
    "d",
    "n",
    "box",
    "fd",
    "obs",
    "quantization",
    "h-from",
    "h-to",
    "h-steps",
    "law",
    "target",
    "ratio",
    "in",
    "out",
    "threads",
    "allow-critical",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("config line {}: expected key = value, got '{line}'", i + 1)))?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::config(format!("config line {}: unknown key '{}'", i + 1, k.trim())));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::config(format!("config line {}: duplicate key '{key}'", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The flag value if given, otherwise the parsed config entry.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::config(format!("config key '{key}': cannot parse '{v}'"))))
            .transpose()
    }

    /// Like [`ConfigFile::resolve`] but the value must be present.
    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.resolve(flag, key)?.ok_or_else(|| Error::config(format!("missing required option --{key}")))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.resolve::<bool>(None, key)?.unwrap_or(false))
    }
}

/// `A,B` pairs such as `--box -2,2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval(pub f64, pub f64);

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(',').ok_or_else(|| Error::config(format!("expected A,B, got '{s}'")))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::config(format!("bad number '{t}' in '{s}'")));
        let (a, b) = (parse(a)?, parse(b)?);
        if !(a < b) {
            return Err(Error::config(format!("interval '{s}' must satisfy A < B")));
        }
        Ok(Interval(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let c = ConfigFile::parse("# comment\nmodel = deg-max\nh = 0.01\nh_steps = 4\n").unwrap();
        assert_eq!(c.require::<String>(None, "model").unwrap(), "deg-max");
        assert_eq!(c.require(Some(0.5), "h").unwrap(), 0.5);
        assert_eq!(c.require::<f64>(None, "h").unwrap(), 0.01);
        assert_eq!(c.resolve::<usize>(None, "h-steps").unwrap(), Some(4));
        assert_eq!(c.resolve::<f64>(None, "d").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(matches!(ConfigFile::parse("colour = red"), Err(Error::Config(_))));
        assert!(ConfigFile::parse("h = 1\nh = 2").is_err());
        assert!(ConfigFile::parse("just words").is_err());
        let c = ConfigFile::parse("h = abc").unwrap();
        assert!(c.resolve::<f64>(None, "h").is_err());
    }

    #[test]
    fn intervals() {
        assert_eq!("-2, 3".parse::<Interval>().unwrap(), Interval(-2.0, 3.0));
        assert!("3,2".parse::<Interval>().is_err());
        assert!("3".parse::<Interval>().is_err());
    }
}
