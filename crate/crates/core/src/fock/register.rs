use std::fmt;
use std::str::FromStr;

use crate::error::{FockError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// One optical mode: a spatial path together with a polarization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mode {
    pub spatial: String,
    pub polarization: Polarization,
}

impl Mode {
    pub fn new(spatial: impl Into<String>, polarization: Polarization) -> Self {
        Self {
            spatial: spatial.into(),
            polarization,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.spatial, self.polarization)
    }
}

impl FromStr for Mode {
    type Err = FockError;

    /// Parses labels such as `aH` or `c1V`: the last character is the
    /// polarization, everything before it the spatial name.
    fn from_str(label: &str) -> Result<Self> {
        let mut chars = label.chars();
        let pol = match chars.next_back() {
            Some('H') => Polarization::H,
            Some('V') => Polarization::V,
            _ => {
                return Err(FockError::InvalidInput(format!(
                    "mode label `{label}` must end in H or V"
                )))
            }
        };
        let spatial = chars.as_str();
        if spatial.is_empty() || spatial.chars().any(char::is_whitespace) {
            return Err(FockError::InvalidInput(format!(
                "mode label `{label}` has an empty or malformed spatial name"
            )));
        }
        Ok(Mode::new(spatial, pol))
    }
}

/// Ordered list of modes with unique labels. The position of a mode in the
/// register is its index in every occupation vector over that register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeRegister {
    modes: Vec<Mode>,
}

impl ModeRegister {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(FockError::InvalidInput(format!(
                    "duplicate mode label `{m}`"
                )));
            }
        }
        Ok(Self { modes })
    }

    /// Register with an H and a V mode for each spatial name, in the order
    /// `s0H s0V s1H s1V ...`.
    pub fn from_spatial<S: AsRef<str>>(spatial: &[S]) -> Result<Self> {
        let modes = spatial
            .iter()
            .flat_map(|s| {
                [
                    Mode::new(s.as_ref(), Polarization::H),
                    Mode::new(s.as_ref(), Polarization::V),
                ]
            })
            .collect();
        Self::new(modes)
    }

    pub fn parse_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let modes = labels
            .iter()
            .map(|l| l.as_ref().parse())
            .collect::<Result<Vec<Mode>>>()?;
        Self::new(modes)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> Option<&Mode> {
        self.modes.get(index)
    }

    pub fn index_of(&self, spatial: &str, polarization: Polarization) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.spatial == spatial && m.polarization == polarization)
    }

    /// Like [`index_of`](Self::index_of) but reports a missing mode as an error.
    pub fn require(&self, spatial: &str, polarization: Polarization) -> Result<usize> {
        self.index_of(spatial, polarization).ok_or_else(|| {
            FockError::InvalidInput(format!(
                "mode `{spatial}{polarization}` is not in the register"
            ))
        })
    }

    /// Indices of every mode on the given spatial path, in register order.
    pub fn spatial_indices(&self, spatial: &str) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.spatial == spatial)
            .map(|(i, _)| i)
            .collect()
    }

    /// Concatenation `self ⊕ other`; fails if any label would repeat.
    pub fn concat(&self, other: &ModeRegister) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        Self::new(modes)
    }

    pub fn labels(&self) -> Vec<String> {
        self.modes.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ModeRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels().join(" "))
    }
}
