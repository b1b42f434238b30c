//! Region-of-interest symbols `yK` and observation sets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A region-of-interest symbol, written `yK`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom(pub u32);

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}", self.0)
    }
}

impl FromStr for Atom {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('y')
            .ok_or_else(|| format!("unknown ROI symbol `{s}`"))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("unknown ROI symbol `{s}`"));
        }
        digits
            .parse()
            .map(Atom)
            .map_err(|_| format!("ROI index out of range in `{s}`"))
    }
}

/// Set of active observations.
pub type ObsSet = BTreeSet<Atom>;

/// Ordered ROI alphabet `Y`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    atoms: Vec<Atom>,
}

impl Alphabet {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let set: BTreeSet<Atom> = atoms.into_iter().collect();
        Alphabet {
            atoms: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn contains(&self, atom: Atom) -> bool {
        self.atoms.binary_search(&atom).is_ok()
    }

    pub fn index_of(&self, atom: Atom) -> Option<usize> {
        self.atoms.binary_search(&atom).ok()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.atoms.iter().chain(other.atoms.iter()).copied())
    }

    /// Every subset of the alphabet, as a bitmask-ordered list. Intended for `|Y| <= 16`.
    pub fn power_set(&self) -> Vec<ObsSet> {
        let n = self.atoms.len();
        assert!(n <= 16, "power set of {n} atoms is too large");
        (0u32..1 << n)
            .map(|mask| {
                self.atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &a)| a)
                    .collect()
            })
            .collect()
    }
}

pub fn format_obs(obs: &ObsSet) -> String {
    if obs.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = obs.iter().map(Atom::to_string).collect();
    format!("{{{}}}", parts.join(","))
}
