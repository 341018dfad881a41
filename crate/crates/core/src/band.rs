use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// HAPS-to-ground RAN frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    /// S-band, served to handheld devices.
    S,
    /// Ka-band, served to VSAT dishes.
    Ka,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::S => "s",
            Band::Ka => "ka",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(Band::S),
            "ka" => Ok(Band::Ka),
            other => Err(format!("unknown band `{other}` (expected s or ka)")),
        }
    }
}
