//! Error-budget arithmetic for the hybrid gate across molecular species.
//!
//! The budget is anchored: one calibrated column of per-channel errors for
//! the CaF+Rb pair, plus scaling exponents in the molecular rotational
//! frequency f and transition dipole d. Every other species is obtained by
//! multiplying the anchor values by (f/f_anchor)^a (d/d_anchor)^b per
//! channel. Absolute prefactors are deliberately out of scope; the anchor's
//! f and d are external configuration shipped in the species file, not
//! derived here.
//!
//! Channels and exponents (a, b):
//!   decay        (3/2, -1)   Rydberg lifetime against the slower gate
//!   adiabaticity (0, 0)      held constant; the pulse can be rescaled
//!   leakage      (-10/3, 2)  exchange coupling vs Rydberg level spacing
//!   field        (10/3, -2)  differential Stark sensitivity
//!
//! The Rydberg principal quantum number is matched to the rotational
//! frequency through the n^-3 level spacing: n = round(n_anchor (f/f_a)^-1/3)
//! and has no physical solution outside [10, 150].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BudgetError {
    #[error("invalid species {name}: {reason}")]
    InvalidSpecies { name: String, reason: String },
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error(
        "no Rydberg match for {name}: n = {n} outside [{lo}, {hi}] \
         (rotational frequency too far from the anchor)"
    )]
    NoRydbergMatch {
        name: String,
        n: i64,
        lo: i64,
        hi: i64,
    },
    #[error("GHZ projection needs N >= 2, got {0}")]
    BadGhzSize(usize),
    #[error("probability out of range: {0}")]
    BadProbability(f64),
}

/// One molecular species: rotational transition frequency in Hz and the
/// transition dipole moment in Debye.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSpecies {
    pub name: String,
    pub f_hz: f64,
    pub d_debye: f64,
}

impl MoleculeSpecies {
    pub fn validate(&self) -> Result<(), BudgetError> {
        if !(self.f_hz > 0.0) || !self.f_hz.is_finite() {
            return Err(BudgetError::InvalidSpecies {
                name: self.name.clone(),
                reason: format!("rotational frequency must be positive, got {}", self.f_hz),
            });
        }
        if !(self.d_debye > 0.0) || !self.d_debye.is_finite() {
            return Err(BudgetError::InvalidSpecies {
                name: self.name.clone(),
                reason: format!("dipole moment must be positive, got {}", self.d_debye),
            });
        }
        Ok(())
    }
}

/// Per-channel error probabilities of the calibrated anchor column.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelErrors {
    pub decay: f64,
    pub adiabaticity: f64,
    pub leakage: f64,
    pub field: f64,
}

/// The calibrated reference point all budgets scale from. The error column
/// and n are calibration data; f and d of the anchor species are external
/// measured values carried by the species file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorCalibration {
    pub name: String,
    pub errors: ChannelErrors,
    pub n: i64,
    pub f_hz: f64,
    pub d_debye: f64,
    /// Rescales the assumed electric-field noise amplitude; the field error
    /// grows with its square.
    #[serde(default = "default_multiplier")]
    pub field_noise_multiplier: f64,
}

fn default_multiplier() -> f64 {
    1.0
}

/// Calibrated error column for the CaF + Rb(59s) anchor. The caller supplies
/// the anchor species' measured f and d.
pub fn caf_rb_anchor(f_hz: f64, d_debye: f64) -> AnchorCalibration {
    AnchorCalibration {
        name: "CaF+Rb".into(),
        errors: ChannelErrors {
            decay: 7e-4,
            adiabaticity: 2.5e-4,
            leakage: 5e-8,
            field: 8e-5,
        },
        n: 59,
        f_hz,
        d_debye,
        field_noise_multiplier: 1.0,
    }
}

impl AnchorCalibration {
    pub fn validate(&self) -> Result<(), BudgetError> {
        let e = &self.errors;
        for (label, v) in [
            ("decay", e.decay),
            ("adiabaticity", e.adiabaticity),
            ("leakage", e.leakage),
            ("field", e.field),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(BudgetError::InvalidCalibration(format!(
                    "{label} anchor error must be non-negative, got {v}"
                )));
            }
        }
        if !(self.f_hz > 0.0) || !(self.d_debye > 0.0) {
            return Err(BudgetError::InvalidCalibration(
                "anchor f and d must be positive".into(),
            ));
        }
        if self.n <= 0 {
            return Err(BudgetError::InvalidCalibration(format!(
                "anchor n must be positive, got {}",
                self.n
            )));
        }
        if !(self.field_noise_multiplier > 0.0) {
            return Err(BudgetError::InvalidCalibration(
                "field_noise_multiplier must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Scaled error budget for one species, all channels plus their sum and the
/// matched Rydberg principal quantum number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub species: String,
    pub decay: f64,
    pub adiabaticity: f64,
    pub leakage: f64,
    pub field: f64,
    pub total: f64,
    pub matched_n: i64,
}

impl ErrorBudget {
    /// The headline number rounded to one significant figure, as quoted in
    /// summary tables.
    pub fn total_one_sig_fig(&self) -> f64 {
        round_one_sig_fig(self.total)
    }
}

pub fn round_one_sig_fig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    // decimal rounding via the formatter so 9.6e-6 carries to 1e-5 exactly
    format!("{x:.0e}").parse().expect("well-formed float")
}

pub const RYDBERG_N_MIN: i64 = 10;
pub const RYDBERG_N_MAX: i64 = 150;

/// Principal quantum number whose Rydberg level spacing (~ n^-3) matches the
/// species' rotational frequency, scaled from the anchor.
pub fn match_rydberg_n(
    species: &MoleculeSpecies,
    calib: &AnchorCalibration,
) -> Result<i64, BudgetError> {
    species.validate()?;
    calib.validate()?;
    let n = calib.n as f64 * (species.f_hz / calib.f_hz).powf(-1.0 / 3.0);
    let n = n.round() as i64;
    if !(RYDBERG_N_MIN..=RYDBERG_N_MAX).contains(&n) {
        return Err(BudgetError::NoRydbergMatch {
            name: species.name.clone(),
            n,
            lo: RYDBERG_N_MIN,
            hi: RYDBERG_N_MAX,
        });
    }
    Ok(n)
}

/// Exponents (a, b) in error = anchor * (f/f_a)^a * (d/d_a)^b, per channel.
pub const SCALING_EXPONENTS: [(&str, f64, f64); 4] = [
    ("decay", 1.5, -1.0),
    ("adiabaticity", 0.0, 0.0),
    ("leakage", -10.0 / 3.0, 2.0),
    ("field", 10.0 / 3.0, -2.0),
];

pub fn compute_budget(
    species: &MoleculeSpecies,
    calib: &AnchorCalibration,
) -> Result<ErrorBudget, BudgetError> {
    species.validate()?;
    calib.validate()?;
    let matched_n = match_rydberg_n(species, calib)?;
    let rf = species.f_hz / calib.f_hz;
    let rd = species.d_debye / calib.d_debye;
    let scale = |a: f64, b: f64| rf.powf(a) * rd.powf(b);
    let m2 = calib.field_noise_multiplier * calib.field_noise_multiplier;
    let decay = calib.errors.decay * scale(1.5, -1.0);
    let adiabaticity = calib.errors.adiabaticity;
    let leakage = calib.errors.leakage * scale(-10.0 / 3.0, 2.0);
    let field = calib.errors.field * scale(10.0 / 3.0, -2.0) * m2;
    Ok(ErrorBudget {
        species: species.name.clone(),
        decay,
        adiabaticity,
        leakage,
        field,
        total: decay + adiabaticity + leakage + field,
        matched_n,
    })
}

/// Entanglement-distribution layouts the fidelity projection covers: a
/// nearest-neighbor CZ chain, the same chain counted at tree depth, and the
/// measurement-based ancilla pattern (two CZs and one readout per fused
/// neighbor pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzScheme {
    GateOnlyLinear,
    GateOnlyLog,
    MeasurementBased,
}

pub const DEFAULT_READOUT_ERROR: f64 = 0.03;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhzProjection {
    pub scheme: GhzScheme,
    pub n: usize,
    pub fidelity: f64,
    pub gate_count: usize,
    /// Circuit depth in entangling layers.
    pub depth: usize,
}

/// First-order independent-error projection of the N-particle GHZ fidelity.
/// This is bookkeeping over per-operation success probabilities, not a
/// simulation.
pub fn project_ghz_fidelity(
    gate_error: f64,
    readout_error: f64,
    n: usize,
    scheme: GhzScheme,
) -> Result<GhzProjection, BudgetError> {
    if n < 2 {
        return Err(BudgetError::BadGhzSize(n));
    }
    for p in [gate_error, readout_error] {
        if !(0.0..1.0).contains(&p) {
            return Err(BudgetError::BadProbability(p));
        }
    }
    let g = 1.0 - gate_error;
    let r = 1.0 - readout_error;
    let (fidelity, gate_count, depth) = match scheme {
        GhzScheme::GateOnlyLinear => (g.powi(n as i32 - 1), n - 1, n - 1),
        GhzScheme::GateOnlyLog => (
            g.powi(n as i32 - 1),
            n - 1,
            (n as f64).log2().ceil() as usize,
        ),
        GhzScheme::MeasurementBased => (
            g.powi(2 * (n as i32 - 1)) * r.powi(n as i32 - 1),
            2 * (n - 1),
            2,
        ),
    };
    Ok(GhzProjection {
        scheme,
        n,
        fidelity,
        gate_count,
        depth,
    })
}

/// Species database file: a list of molecules plus the anchor calibration
/// under its own key.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesDb {
    pub anchor: AnchorCalibration,
    #[serde(default)]
    pub species: Vec<MoleculeSpecies>,
}

impl SpeciesDb {
    pub fn find(&self, name: &str) -> Option<&MoleculeSpecies> {
        self.species.iter().find(|s| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // externally measured CaF X-state values: f = 2B, d = mu / sqrt(3)
    const CAF_F: f64 = 20.5e9;
    const CAF_D: f64 = 1.77;

    fn caf() -> MoleculeSpecies {
        MoleculeSpecies {
            name: "CaF".into(),
            f_hz: CAF_F,
            d_debye: CAF_D,
        }
    }

    fn anchor() -> AnchorCalibration {
        caf_rb_anchor(CAF_F, CAF_D)
    }

    #[test]
    fn anchor_budget_reproduces_calibration_column() {
        let b = compute_budget(&caf(), &anchor()).unwrap();
        assert_eq!(b.decay, 7e-4);
        assert_eq!(b.adiabaticity, 2.5e-4);
        assert_eq!(b.leakage, 5e-8);
        assert_eq!(b.field, 8e-5);
        assert!((b.total - 1.03005e-3).abs() < 1e-12);
        assert_eq!(b.total_one_sig_fig(), 1e-3);
        assert_eq!(b.matched_n, 59);
    }

    #[test]
    fn doubled_dipole_example() {
        let mut s = caf();
        s.d_debye = 2.0 * CAF_D;
        let b = compute_budget(&s, &anchor()).unwrap();
        assert!((b.decay - 3.5e-4).abs() < 1e-18);
        assert!((b.leakage - 2e-7).abs() < 1e-20);
        assert!((b.field - 2e-5).abs() < 1e-18);
        assert_eq!(b.adiabaticity, 2.5e-4);
    }

    #[test]
    fn additivity_with_zeroed_channel() {
        let mut calib = anchor();
        calib.errors.decay = 0.0;
        let b = compute_budget(&caf(), &calib).unwrap();
        assert!((b.total - (2.5e-4 + 5e-8 + 8e-5)).abs() < 1e-18);
    }

    #[test]
    fn scaling_is_exactly_multiplicative_over_grid() {
        let calib = anchor();
        let fs: Vec<f64> = (0..5).map(|k| CAF_F * 2f64.powi(k - 2)).collect();
        let ds: Vec<f64> = (0..5).map(|k| CAF_D * 1.5f64.powi(k - 2)).collect();
        for &f in &fs {
            for &d in &ds {
                let s = MoleculeSpecies {
                    name: "probe".into(),
                    f_hz: f,
                    d_debye: d,
                };
                let b = match compute_budget(&s, &calib) {
                    Ok(b) => b,
                    // far corners of the grid can fall off the Rydberg range
                    Err(BudgetError::NoRydbergMatch { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let rf = f / CAF_F;
                let rd = d / CAF_D;
                for (channel, got, a, bexp) in [
                    ("decay", b.decay, 1.5, -1.0),
                    ("adiabaticity", b.adiabaticity, 0.0, 0.0),
                    ("leakage", b.leakage, -10.0 / 3.0, 2.0),
                    ("field", b.field, 10.0 / 3.0, -2.0),
                ] {
                    let want = match channel {
                        "decay" => 7e-4,
                        "adiabaticity" => 2.5e-4,
                        "leakage" => 5e-8,
                        _ => 8e-5,
                    } * rf.powf(a)
                        * rd.powf(bexp);
                    assert!(
                        (got - want).abs() <= 1e-12 * want.abs().max(1e-300),
                        "{channel} at f/fa={rf}, d/da={rd}: {got:e} vs {want:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn rydberg_match_cube_root_examples() {
        let calib = anchor();
        assert_eq!(match_rydberg_n(&caf(), &calib).unwrap(), 59);
        let mut fast = caf();
        fast.f_hz = 8.0 * CAF_F;
        // 59/2 = 29.5 rounds away from zero
        assert_eq!(match_rydberg_n(&fast, &calib).unwrap(), 30);
        let mut slow = caf();
        slow.f_hz = CAF_F / 8.0;
        assert_eq!(match_rydberg_n(&slow, &calib).unwrap(), 118);
    }

    #[test]
    fn rydberg_match_rejects_out_of_range() {
        let calib = anchor();
        let mut glacial = caf();
        glacial.f_hz = CAF_F / 1000.0; // n would be 590
        match match_rydberg_n(&glacial, &calib) {
            Err(BudgetError::NoRydbergMatch { n, .. }) => assert_eq!(n, 590),
            other => panic!("expected range error, got {other:?}"),
        }
        let mut thz = caf();
        thz.f_hz = CAF_F * 1000.0;
        assert!(matches!(
            match_rydberg_n(&thz, &calib),
            Err(BudgetError::NoRydbergMatch { n: 6, .. })
        ));
    }

    #[test]
    fn field_noise_multiplier_is_quadratic() {
        let mut calib = anchor();
        calib.field_noise_multiplier = 3.0;
        let b = compute_budget(&caf(), &calib).unwrap();
        assert!((b.field - 9.0 * 8e-5).abs() < 1e-18);
        assert_eq!(b.decay, 7e-4);
    }

    #[test]
    fn ghz_projection_examples() {
        let p = project_ghz_fidelity(0.0, 0.0, 7, GhzScheme::MeasurementBased).unwrap();
        assert_eq!(p.fidelity, 1.0);
        let p = project_ghz_fidelity(1e-3, 1e-3, 20, GhzScheme::MeasurementBased).unwrap();
        let want = 0.999f64.powi(38) * 0.999f64.powi(19);
        assert!((p.fidelity - want).abs() < 1e-15);
        assert!((p.fidelity - 0.9446).abs() < 5e-4);
        assert_eq!(p.gate_count, 38);
        assert_eq!(p.depth, 2);
        let p = project_ghz_fidelity(1e-2, 0.0, 20, GhzScheme::GateOnlyLinear).unwrap();
        assert!((p.fidelity - 0.99f64.powi(19)).abs() < 1e-15);
        assert!((p.fidelity - 0.826).abs() < 5e-4);
    }

    #[test]
    fn log_scheme_same_fidelity_shallower_depth() {
        let lin = project_ghz_fidelity(2e-3, 0.0, 33, GhzScheme::GateOnlyLinear).unwrap();
        let log = project_ghz_fidelity(2e-3, 0.0, 33, GhzScheme::GateOnlyLog).unwrap();
        assert_eq!(lin.fidelity, log.fidelity);
        assert_eq!(lin.depth, 32);
        assert_eq!(log.depth, 6); // ceil(log2 33)
    }

    #[test]
    fn ghz_projection_monotonicity() {
        for scheme in [
            GhzScheme::GateOnlyLinear,
            GhzScheme::GateOnlyLog,
            GhzScheme::MeasurementBased,
        ] {
            let mut prev = 1.0 + 1e-9;
            for n in 2..40 {
                let f = project_ghz_fidelity(1e-3, 0.02, n, scheme).unwrap().fidelity;
                assert!(f < prev, "not decreasing in N for {scheme:?}");
                prev = f;
            }
            for k in 1..10 {
                let low = project_ghz_fidelity(1e-4 * k as f64, 0.02, 10, scheme)
                    .unwrap()
                    .fidelity;
                let high = project_ghz_fidelity(1e-4 * (k + 1) as f64, 0.02, 10, scheme)
                    .unwrap()
                    .fidelity;
                assert!(high < low, "not decreasing in gate error for {scheme:?}");
            }
        }
        let a = project_ghz_fidelity(1e-3, 0.01, 10, GhzScheme::MeasurementBased).unwrap();
        let b = project_ghz_fidelity(1e-3, 0.02, 10, GhzScheme::MeasurementBased).unwrap();
        assert!(b.fidelity < a.fidelity);
    }

    #[test]
    fn ghz_projection_rejects_bad_input() {
        assert!(matches!(
            project_ghz_fidelity(1e-3, 0.0, 1, GhzScheme::GateOnlyLinear),
            Err(BudgetError::BadGhzSize(1))
        ));
        assert!(matches!(
            project_ghz_fidelity(1.5, 0.0, 5, GhzScheme::GateOnlyLinear),
            Err(BudgetError::BadProbability(_))
        ));
    }

    #[test]
    fn one_sig_fig_rounding() {
        assert_eq!(round_one_sig_fig(1.03e-3), 1e-3);
        assert_eq!(round_one_sig_fig(9.4e-6), 9e-6);
        assert_eq!(round_one_sig_fig(9.6e-6), 1e-5);
        assert_eq!(round_one_sig_fig(0.0), 0.0);
        assert_eq!(round_one_sig_fig(-2.7e2), -3e2);
    }

    #[test]
    fn rejects_invalid_species_and_calibration() {
        let bad = MoleculeSpecies {
            name: "x".into(),
            f_hz: -1.0,
            d_debye: 1.0,
        };
        assert!(matches!(
            compute_budget(&bad, &anchor()),
            Err(BudgetError::InvalidSpecies { .. })
        ));
        let mut calib = anchor();
        calib.errors.leakage = -1e-9;
        assert!(matches!(
            compute_budget(&caf(), &calib),
            Err(BudgetError::InvalidCalibration(_))
        ));
    }
}
