//! Working precision and truncation degrees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::PadicField;

/// `N` p-adic digits, π-degree `D`, X-degree `DX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionProfile {
    pub n: u32,
    pub d: usize,
    pub dx: usize,
}

impl Default for PrecisionProfile {
    fn default() -> Self {
        PrecisionProfile { n: 20, d: 200, dx: 32 }
    }
}

impl PrecisionProfile {
    /// Validated profile.
    pub fn new(n: u32, d: usize, dx: usize) -> Result<Self> {
        if n == 0 || d == 0 || dx == 0 {
            return Err(Error::Usage("profile entries must be positive".into()));
        }
        if d < dx {
            return Err(Error::Usage(format!("π-degree {d} is below X-degree {dx}")));
        }
        Ok(PrecisionProfile { n, d, dx })
    }

    /// Parses `"N,D,DX"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Usage(format!("malformed profile {s:?}, expected N,D,DX")));
        }
        let bad = |_| Error::Usage(format!("malformed profile {s:?}"));
        Self::new(
            parts[0].parse().map_err(bad)?,
            parts[1].parse().map_err(bad)?,
            parts[2].parse().map_err(bad)?,
        )
    }

    /// Checks that the scalar type carries at least `N` digits.
    pub fn check_scalar<S: PadicField>(&self) -> Result<()> {
        if self.n > S::cap() {
            return Err(Error::Usage(format!(
                "{} digits requested but at most {} are available for p = {}",
                self.n,
                S::cap(),
                S::PRIME
            )));
        }
        Ok(())
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"N": self.n, "D": self.d, "DX": self.dx})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Padic3, Padic5};

    #[test]
    fn parse_and_validate() {
        assert_eq!(
            PrecisionProfile::parse("20,200,32").unwrap(),
            PrecisionProfile::default()
        );
        assert!(PrecisionProfile::parse("20,10,32").is_err());
        assert!(PrecisionProfile::parse("20,x,32").is_err());
        assert!(PrecisionProfile::parse("0,10,3").is_err());
        let p = PrecisionProfile::parse("30,100,10").unwrap();
        assert!(p.check_scalar::<Padic3>().is_ok());
        assert!(p.check_scalar::<Padic5>().is_err());
    }
}
