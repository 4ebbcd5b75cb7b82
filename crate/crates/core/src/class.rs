use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Binary EEG class. `Focal` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Normal,
    Focal,
}

impl Class {
    pub const ALL: [Class; 2] = [Class::Normal, Class::Focal];

    /// Output index of the class in a two-unit softmax layer.
    pub fn index(self) -> usize {
        match self {
            Class::Normal => 0,
            Class::Focal => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Class> {
        match index {
            0 => Some(Class::Normal),
            1 => Some(Class::Focal),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Normal => "normal",
            Class::Focal => "focal",
        }
    }

    pub fn other(self) -> Class {
        match self {
            Class::Normal => Class::Focal,
            Class::Focal => Class::Normal,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "n" | "0" => Ok(Class::Normal),
            "focal" | "f" | "1" => Ok(Class::Focal),
            other => Err(crate::Error::InvalidParameter(format!("unknown class label `{other}`"))),
        }
    }
}
