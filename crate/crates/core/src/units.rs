//! Unit conventions.
//!
//! All computations use atomic units (hartree, bohr, electron mass, ħ in
//! a.u.). Energies in cm⁻¹ are converted at the I/O boundary with
//! [`HARTREE_TO_CM1`] = 219474.6313632 cm⁻¹/hartree. Masses are given in
//! unified atomic mass units and converted with [`AMU_TO_ME`].

pub const HARTREE_TO_CM1: f64 = 219_474.631_363_2;
pub const AMU_TO_ME: f64 = 1_822.888_486_209;

pub fn cm1_to_hartree(e: f64) -> f64 {
    e / HARTREE_TO_CM1
}

pub fn hartree_to_cm1(e: f64) -> f64 {
    e * HARTREE_TO_CM1
}

/// Energy unit accepted at file and config boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EnergyUnit {
    #[serde(rename = "hartree")]
    Hartree,
    #[serde(rename = "cm-1")]
    Cm1,
}

impl EnergyUnit {
    /// Factor converting a value in this unit to hartree.
    pub fn to_hartree(self) -> f64 {
        match self {
            EnergyUnit::Hartree => 1.0,
            EnergyUnit::Cm1 => 1.0 / HARTREE_TO_CM1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnergyUnit::Hartree => "hartree",
            EnergyUnit::Cm1 => "cm-1",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cm1_roundtrip() {
        let e = 3440.64;
        assert!((hartree_to_cm1(cm1_to_hartree(e)) - e).abs() < 1e-9);
        assert!((EnergyUnit::Cm1.to_hartree() * HARTREE_TO_CM1 - 1.0).abs() < 1e-15);
    }
}
