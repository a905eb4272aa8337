use crate::classical::PeriodicOrbit;
use crate::{Error, Result};

/// `ħ(n) = S/(n + ν/4)`: the ħ values at which the n-th excitation along
/// an orbit of reduced action `S = ∮p·dq/2π` lands on the orbit's energy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BSLadder {
    pub action: f64,
    pub maslov: u32,
    pub entries: Vec<(usize, f64)>,
}

impl BSLadder {
    /// `n + ν/4`.
    pub fn quantum_number(&self, n: usize) -> f64 {
        n as f64 + self.maslov as f64 / 4.0
    }

    pub fn hbar(&self, n: usize) -> Option<f64> {
        self.entries.iter().find(|(m, _)| *m == n).map(|e| e.1)
    }

    pub fn from_orbit(po: &PeriodicOrbit, n_range: impl IntoIterator<Item = usize>) -> Result<Self> {
        bs_ladder(po.reduced_action(), po.maslov, n_range)
    }
}

pub fn bs_ladder(action: f64, maslov: u32, n_range: impl IntoIterator<Item = usize>) -> Result<BSLadder> {
    if !(action > 0.0 && action.is_finite()) {
        return Err(Error::Contract(format!("action must be positive, got {action}")));
    }
    let mut ns: Vec<usize> = n_range.into_iter().collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(Error::Contract("empty n range".into()));
    }
    if maslov == 0 && ns[0] == 0 {
        return Err(Error::Contract("n = 0 with ν = 0 gives an infinite ħ".into()));
    }
    let entries = ns.into_iter().map(|n| (n, action / (n as f64 + maslov as f64 / 4.0))).collect();
    Ok(BSLadder { action, maslov, entries })
}
