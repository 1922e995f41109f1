//! Classification of measurement-powered engine cycles.
//!
//! Temperatures are in energy units (`k_B = 1`). `W_extr ≤ 0` means work is
//! extracted. The measurement constraint `Q_meas ≤ −T_meas J_S` assumes no
//! residual system–meter correlations; cycles with `⟨I_{S:A}⟩ > 0` need a
//! looser constraint that is not modelled here.

use std::fmt;

use crate::error::{invalid, Result};

/// Tolerance on every law residual.
pub const LAW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineCycleSpec {
    pub w_meas: f64,
    pub q_meas: f64,
    pub q_bath: f64,
    pub w_extr: f64,
    pub t_meas: f64,
    pub t_bath: f64,
    pub j_s: f64,
}

impl EngineCycleSpec {
    /// `E_meas = W_meas + Q_meas`.
    pub fn e_meas(&self) -> f64 {
        self.w_meas + self.q_meas
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawResiduals {
    /// `W_extr + Q_bath + E_meas`, must vanish.
    pub first_law: f64,
    /// `Q_bath/T_bath + Q_meas/T_meas`, must be `≤ 0`.
    pub second_law_clausius: f64,
    /// `Q_meas + T_meas J_S`, must be `≤ 0`.
    pub measurement_constraint: f64,
}

impl LawResiduals {
    /// Name of the first violated law, if any.
    pub fn violation(&self) -> Option<&'static str> {
        if self.first_law.abs() > LAW_TOL {
            Some("first_law")
        } else if self.second_law_clausius > LAW_TOL {
            Some("second_law_clausius")
        } else if self.measurement_constraint > LAW_TOL {
            Some("measurement_constraint")
        } else {
            None
        }
    }
}

pub fn cycle_consistency(spec: &EngineCycleSpec) -> Result<LawResiduals> {
    if !(spec.t_meas > 0.0 && spec.t_bath > 0.0) {
        return Err(invalid(format!(
            "temperatures must be positive, got T_meas = {}, T_bath = {}",
            spec.t_meas, spec.t_bath
        )));
    }
    Ok(LawResiduals {
        first_law: spec.w_extr + spec.q_bath + spec.e_meas(),
        second_law_clausius: spec.q_bath / spec.t_bath + spec.q_meas / spec.t_meas,
        measurement_constraint: spec.q_meas + spec.t_meas * spec.j_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Transducer,
    MaxwellDemon,
    HybridOrHeat,
    Invalid,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::Transducer => "transducer",
            Regime::MaxwellDemon => "maxwell_demon",
            Regime::HybridOrHeat => "hybrid_or_heat",
            Regime::Invalid => "invalid",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyMetric {
    pub name: &'static str,
    pub value: f64,
    /// Upper bound the metric must respect in its regime.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub efficiency_metric: Option<EfficiencyMetric>,
    pub law_residuals: LawResiduals,
    /// Set when the cycle sits on a regime boundary resolved by priority.
    pub tie: bool,
    pub notes: Vec<String>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn work_split(spec: &EngineCycleSpec, notes: &mut Vec<String>, tie: &mut bool) -> (Regime, EfficiencyMetric) {
    let net = spec.w_meas + spec.w_extr;
    if net.abs() <= LAW_TOL {
        *tie = true;
        notes.push("W_meas + W_extr on the transducer/demon boundary".into());
    }
    if net >= 0.0 {
        let eta = ratio(-spec.w_extr, spec.w_meas);
        (Regime::Transducer, EfficiencyMetric { name: "eta_transducer", value: eta, bound: 1.0 })
    } else {
        let eta = ratio(-net, spec.q_bath);
        let carnot = 1.0 - spec.t_meas / spec.t_bath;
        (Regime::MaxwellDemon, EfficiencyMetric { name: "eta_demon", value: eta, bound: carnot })
    }
}

/// Assign exactly one regime. Boundaries resolve in the order transducer,
/// demon, hybrid and are flagged.
pub fn classify_cycle(spec: &EngineCycleSpec) -> Result<RegimeReport> {
    let law_residuals = cycle_consistency(spec)?;
    let mut notes = Vec::new();
    let mut tie = false;
    if let Some(law) = law_residuals.violation() {
        notes.push(format!("violates {law}"));
        return Ok(RegimeReport { regime: Regime::Invalid, efficiency_metric: None, law_residuals, tie, notes });
    }
    if spec.w_extr > LAW_TOL {
        notes.push("no work extracted (W_extr > 0)".into());
        return Ok(RegimeReport { regime: Regime::Invalid, efficiency_metric: None, law_residuals, tie, notes });
    }
    if spec.j_s.abs() <= LAW_TOL {
        tie = true;
        notes.push("J_S on the information/heat boundary".into());
    }
    let (regime, metric) = if spec.j_s >= 0.0 {
        work_split(spec, &mut notes, &mut tie)
    } else if spec.q_meas >= 0.0 {
        if spec.q_meas <= LAW_TOL {
            tie = true;
            notes.push("Q_meas on the hybrid boundary".into());
        }
        let den = spec.w_meas + spec.q_meas * (1.0 - spec.t_bath / spec.t_meas);
        let eps = ratio(-spec.w_extr, den);
        (Regime::HybridOrHeat, EfficiencyMetric { name: "epsilon_hybrid", value: eps, bound: 1.0 })
    } else {
        notes.push("J_S < 0 with Q_meas < 0: classified by the work balance".into());
        work_split(spec, &mut notes, &mut tie)
    };
    Ok(RegimeReport { regime, efficiency_metric: Some(metric), law_residuals, tie, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn spec(w_meas: f64, q_meas: f64, q_bath: f64, w_extr: f64, t_meas: f64, t_bath: f64, j_s: f64) -> EngineCycleSpec {
        EngineCycleSpec { w_meas, q_meas, q_bath, w_extr, t_meas, t_bath, j_s }
    }

    #[test]
    fn residual_examples() {
        let r = cycle_consistency(&spec(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!((r.first_law, r.second_law_clausius, r.measurement_constraint), (0.0, 0.0, 0.0));
        let r = cycle_consistency(&spec(2.0, -1.0, 0.0, -1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(r.first_law, 0.0);
        let r = cycle_consistency(&spec(1.0, -2.0, 1.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(r.second_law_clausius, -1.0);
        assert!(cycle_consistency(&spec(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn transducer_example() {
        let rep = classify_cycle(&spec(1.0, -0.7, 0.2, -0.5, 1.0, 1.0, LN2)).unwrap();
        assert_eq!(rep.regime, Regime::Transducer);
        assert!((rep.efficiency_metric.unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn demon_example() {
        let rep = classify_cycle(&spec(0.1, -0.2, 0.5, -0.4, 0.2, 1.0, LN2)).unwrap();
        assert_eq!(rep.regime, Regime::MaxwellDemon);
        let m = rep.efficiency_metric.unwrap();
        assert!((m.value - 0.6).abs() < 1e-12 && (m.bound - 0.8).abs() < 1e-12);
    }

    #[test]
    fn hybrid_example() {
        let rep = classify_cycle(&spec(0.0, 0.5, -0.3, -0.2, 5.0, 1.0, -0.1)).unwrap();
        assert_eq!(rep.regime, Regime::HybridOrHeat);
        let m = rep.efficiency_metric.unwrap();
        assert!((m.value - 0.5).abs() < 1e-12 && m.value <= m.bound);
    }

    #[test]
    fn invalid_cycles() {
        let rep = classify_cycle(&spec(1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(rep.regime, Regime::Invalid);
        assert!(rep.notes[0].contains("first_law"));
        let rep = classify_cycle(&spec(-1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(rep.regime, Regime::Invalid);
        let rep = classify_cycle(&spec(1.0, 0.5, -0.5, -1.0, 1.0, 1.0, 0.2)).unwrap();
        assert!(rep.notes[0].contains("measurement_constraint"));
    }

    #[test]
    fn boundary_is_flagged() {
        let rep = classify_cycle(&spec(0.5, -1.0, 1.0, -0.5, 1.0, 2.0, 0.5)).unwrap();
        assert_eq!(rep.regime, Regime::Transducer);
        assert!(rep.tie);
    }

    prop_compose! {
        fn consistent_cycle()(
            t_meas in 0.05f64..5.0,
            t_bath in 0.05f64..5.0,
            j_s in -1.0f64..1.0,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
            c in 0.0f64..1.0,
        ) -> EngineCycleSpec {
            let q_meas = -t_meas * j_s - a;
            let q_bath = -q_meas * t_bath / t_meas - b;
            let w_extr = -c;
            let w_meas = -w_extr - q_bath - q_meas;
            spec(w_meas, q_meas, q_bath, w_extr, t_meas, t_bath, j_s)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn consistent_cycles_respect_bounds(s in consistent_cycle()) {
            let rep = classify_cycle(&s).unwrap();
            prop_assert_ne!(rep.regime, Regime::Invalid);
            let m = rep.efficiency_metric.unwrap();
            prop_assert!(m.value <= m.bound + 1e-9, "{:?}", rep);
            if s.j_s >= 0.0 {
                prop_assert_ne!(rep.regime, Regime::HybridOrHeat);
            }
            if s.t_meas >= s.t_bath {
                prop_assert_ne!(rep.regime, Regime::MaxwellDemon);
            }
        }
    }
}
