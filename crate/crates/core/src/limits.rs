//! Size guards for exponential-time operations.

use crate::error::{Error, Result};

pub const LIMITS_ENV: &str = "PITCHFORGE_LIMITS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Largest n for which the 2^n hypercube may be enumerated.
    pub hypercube: usize,
    /// Largest number of instance rows.
    pub rows: usize,
    /// Largest pitch parameter.
    pub pitch: usize,
    /// Largest number of moment generators (|S| * (n + 1)).
    pub generators: usize,
    /// Largest n for full interpolation certificates.
    pub interpolation: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            hypercube: 16,
            rows: 12,
            pitch: 4,
            generators: 2_000_000,
            interpolation: 10,
        }
    }
}

impl Limits {
    /// Parses overrides of the form `n=12,m=10,pi=3,gen=100000,interp=8`.
    pub fn parse_overrides(&self, spec: &str) -> Result<Limits> {
        let mut out = self.clone();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("limit override {part:?} lacks '='")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("limit value in {part:?} is not a count")))?;
            match key.trim() {
                "n" | "hypercube" => out.hypercube = value.min(crate::varset::MAX_VARS),
                "m" | "rows" => out.rows = value,
                "pi" | "pitch" => out.pitch = value,
                "gen" | "generators" => out.generators = value,
                "interp" | "interpolation" => out.interpolation = value,
                other => return Err(Error::Parse(format!("unknown limit {other:?}"))),
            }
        }
        Ok(out)
    }

    /// Defaults, overridden by the environment variable when it is set.
    pub fn from_env() -> Result<Limits> {
        match std::env::var(LIMITS_ENV) {
            Ok(spec) => Limits::default().parse_overrides(&spec),
            Err(_) => Ok(Limits::default()),
        }
    }

    pub fn check_hypercube(&self, n: usize) -> Result<()> {
        if n > self.hypercube {
            return Err(Error::SizeGuard(format!(
                "{n} variables exceeds the hypercube limit {} (raise it with {LIMITS_ENV}=n=<k> or --limit-n)",
                self.hypercube
            )));
        }
        Ok(())
    }

    pub fn check_rows(&self, m: usize) -> Result<()> {
        if m > self.rows {
            return Err(Error::SizeGuard(format!(
                "{m} rows exceeds the row limit {} (raise it with {LIMITS_ENV}=m=<k>)",
                self.rows
            )));
        }
        Ok(())
    }

    pub fn check_pitch(&self, pi: usize) -> Result<()> {
        if pi > self.pitch {
            return Err(Error::SizeGuard(format!(
                "pitch parameter {pi} exceeds the limit {} (raise it with {LIMITS_ENV}=pi=<k>)",
                self.pitch
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let l = Limits::default().parse_overrides("n=8, pi=2").unwrap();
        assert_eq!(l.hypercube, 8);
        assert_eq!(l.pitch, 2);
        assert_eq!(l.rows, 12);
        assert!(Limits::default().parse_overrides("q=1").is_err());
        assert!(Limits::default().parse_overrides("n").is_err());
        assert!(l.check_hypercube(9).is_err());
    }
}
