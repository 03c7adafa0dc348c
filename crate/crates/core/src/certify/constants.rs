//! The versioned constants file.
//!
//! Asymptotic copy-complexity statements hide multiplicative constants; an
//! artifact has to fix them. Planner constants are calibrated once (by a
//! worst-case Chebyshev solve, or by a seeded Monte Carlo sweep for the
//! sampling tester) and recorded here; experiments pin the file so results
//! stay reproducible. The built-in table ships with the crate and the
//! `calibrate` command regenerates it.

use super::CertifyError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// One calibrated planner constant.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlannerConstant {
    /// The multiplicative constant `C` in the copy-count formula.
    pub c: f64,
    /// The guarantee ratio the constant was calibrated at.
    pub gamma: f64,
    /// `certified` (worst-case Chebyshev solve) or `montecarlo`.
    pub method: String,
    /// Error probability the calibration targeted.
    pub target_error: f64,
}

/// All pinned numerical constants.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Constants {
    pub schema: u32,
    /// Planner constants keyed by profile name.
    pub profiles: BTreeMap<String, PlannerConstant>,
    /// Second-order coefficient of the squared-Hilbert-Schmidt envelope.
    pub hs_bound_k1: f64,
    /// First-order coefficient of the same envelope (times the mean).
    pub hs_bound_v_coeff: f64,
    /// Second-order coefficient of the purity-estimator envelope.
    pub mixedness_b: f64,
    /// First-order coefficient of the purity-estimator envelope.
    pub mixedness_v_coeff: f64,
    /// Depolarizing strength per unit eps used by the fidelity certifier,
    /// `((sqrt(.5) - sqrt(.495))/2)^2 / 2`: the largest strength keeping the
    /// triangle-inequality budget between the `.495` and `.5` thresholds.
    pub depolarize_c: f64,
    /// Conditioning requirement for the chi-squared tester: the reference
    /// needs smallest eigenvalue at least `chisq_min_eig_c * theta / d`.
    pub chisq_min_eig_c: f64,
    /// Seed the Monte Carlo calibration entries were produced with.
    pub calibration_seed: u64,
}

impl Constants {
    /// The constants table shipped with the crate.
    pub fn builtin() -> Self {
        serde_json::from_str(include_str!("default_constants.json"))
            .expect("built-in constants parse")
    }

    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        let k: Constants =
            serde_json::from_str(text).map_err(|e| CertifyError::Constants(e.to_string()))?;
        if k.schema != 1 {
            return Err(CertifyError::Constants(format!("unsupported schema {}", k.schema)));
        }
        Ok(k)
    }

    pub fn from_file(path: &Path) -> Result<Self, CertifyError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CertifyError::Constants(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("constants serialize");
        s.push('\n');
        s
    }

    /// Planner constant for a profile name.
    pub fn profile_c(&self, name: &str) -> Result<f64, CertifyError> {
        self.profiles
            .get(name)
            .map(|p| p.c)
            .ok_or_else(|| CertifyError::UnknownProfile { name: name.into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses_and_roundtrips() {
        let k = Constants::builtin();
        assert_eq!(k.schema, 1);
        assert!(k.profile_c("mixedness").unwrap() > 1.0);
        assert!(k.profile_c("hs").unwrap() > 1.0);
        assert!(k.profile_c("chisq").unwrap() > 1.0);
        assert!(matches!(k.profile_c("nope"), Err(CertifyError::UnknownProfile { .. })));
        let round = Constants::from_json(&k.to_json()).unwrap();
        assert_eq!(k, round);
    }

    #[test]
    fn certified_entries_meet_their_targets() {
        let k = Constants::builtin();
        for (name, p) in &k.profiles {
            if p.method == "certified" {
                let need = super::super::planner::certified_c(p.gamma, p.target_error).unwrap();
                assert!(p.c >= need, "{name}: {} < {need}", p.c);
            }
        }
    }

    #[test]
    fn depolarize_constant_matches_its_formula() {
        let k = Constants::builtin();
        let expect = ((0.5f64.sqrt() - 0.495f64.sqrt()) / 2.0).powi(2) / 2.0;
        assert!((k.depolarize_c - expect).abs() < 1e-18);
        // The depolarized reference stays conditioned enough for the
        // chi-squared stage at threshold .495 eps.
        assert!(k.depolarize_c >= 0.495 * k.chisq_min_eig_c);
    }
}
