//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::time::{Duration, Instant};

use measthermo::dynamics::{self, Branching};
use measthermo::model::{
    branch_thermal_state, choose_truncation, BathSpec, Branch, ModelConfig, OscillatorSpec, QubitSpec, RampSchedule,
    ReadoutPartition,
};
use measthermo::mpe::{classify_cycle, EngineCycleSpec, Regime};
use measthermo::operator::{trace_distance, von_neumann_entropy, Operator, C64};
use measthermo::thermo::{
    self, avg_mutual_info, build_outcomes, efficiency, efficiency_point, entropy_production_terms, holevo_xi,
    info_gain_js, rotated_protocol, sigma_a_oracle, MeasurementOutcomeSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn model(beta: f64, chi: f64, n_s: usize, qubit: QubitSpec, n_max: usize) -> ModelConfig {
    ModelConfig {
        qubit,
        oscillator: OscillatorSpec { omega_c: 1.0, n_max },
        bath: BathSpec { beta, kappa: 1.0 },
        schedule: RampSchedule { chi_max: chi, ramp_rate: 0.01, hold_time: 40.0 },
        partition: ReadoutPartition::two_outcome(n_s),
    }
}

fn auto_n_max(beta: f64, chi: f64, eps: f64) -> usize {
    choose_truncation(&BathSpec { beta, kappa: 1.0 }, 1.0 - chi, eps).expect("positive frequency")
}

fn random_qubit(rng: &mut ChaCha8Rng, omega_s: f64) -> QubitSpec {
    let p: f64 = rng.gen_range(0.05..0.95);
    let r = (p * (1.0 - p)).sqrt() * rng.gen_range(0.0..1.0f64);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    QubitSpec { omega_s, p_e0: p, coherence: C64::from_polar(r, phase) }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let elapsed = start.elapsed();
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:.2?} exceeds {limit:?}"))
    }
}

fn chi_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
    g.push(0.99);
    g
}

fn efficiency_collapse() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for chi in chi_grid() {
        let hot = efficiency_point(&model(0.03, chi, 100, QubitSpec::plus_state(2.0), 4096)).map_err(|e| e.to_string())?;
        let cold = efficiency_point(&model(3.0, chi, 0, QubitSpec::plus_state(2.0), 4096)).map_err(|e| e.to_string())?;
        worst = worst.max((hot.eta - cold.eta).abs());
    }
    within(Duration::from_secs(10), start)?;
    if worst <= 0.02 {
        Ok(format!("max |Δη| = {worst:.5}"))
    } else {
        Err(format!("max |Δη| = {worst:.5} > 0.02"))
    }
}

fn efficiency_endpoint() -> Outcome {
    let eta = |chi: f64| {
        efficiency_point(&model(3.0, chi, 0, QubitSpec::plus_state(2.0), 4096)).map(|p| p.eta).map_err(|e| e.to_string())
    };
    let (a, b) = (eta(0.99)?, eta(0.999)?);
    if (a - 0.891).abs() <= 0.005 && b > a {
        Ok(format!("η(0.99) = {a:.5}, η(0.999) = {b:.5}"))
    } else {
        Err(format!("η(0.99) = {a:.5}, η(0.999) = {b:.5}"))
    }
}

fn ramp_config(beta: f64, r_over_kappa: f64) -> ModelConfig {
    let mut cfg = model(beta, 0.5, 0, QubitSpec { omega_s: 2.0, p_e0: 0.5, coherence: C64::new(0.0, 0.0) }, 10);
    cfg.schedule.ramp_rate = r_over_kappa * cfg.bath.kappa;
    cfg
}

fn quasi_static_limit() -> Outcome {
    let start = Instant::now();
    let w = |r: f64| dynamics::work_linear_ramp(&ramp_config(1.0, r)).map(|w| w.w_dr).map_err(|e| e.to_string());
    let (w4, w3, w2) = (w(1e-4)?, w(1e-3)?, w(1e-2)?);
    within(Duration::from_secs(1), start)?;
    let ratio = w3 / w2;
    if (ratio - 0.10).abs() <= 0.02 && w4 < w3 {
        Ok(format!("W(1e-3)/W(1e-2) = {ratio:.5}, W(1e-4) = {w4:.4e} < W(1e-3) = {w3:.4e}"))
    } else {
        Err(format!("ratio {ratio:.5}, W(1e-4) = {w4:.4e}, W(1e-3) = {w3:.4e}"))
    }
}

fn work_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for beta in [0.5, 1.0, 3.0] {
        for r in [0.01, 0.1, 0.5, 1.0] {
            let cfg = ramp_config(beta, r);
            let closed = dynamics::work_linear_ramp(&cfg).map_err(|e| e.to_string())?;
            let numeric = dynamics::work_numeric(&cfg, Branching::Unread).map_err(|e| e.to_string())?;
            worst = worst.max(((numeric.w_dr - closed.w_dr) / closed.w_dr).abs());
        }
    }
    within(Duration::from_secs(60), start)?;
    if worst <= 0.02 {
        Ok(format!("max relative deviation {worst:.3e}"))
    } else {
        Err(format!("max relative deviation {worst:.3e} > 0.02"))
    }
}

fn sigma_a_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let beta = rng.gen_range(0.5..3.0);
        let chi = rng.gen_range(0.0..0.8);
        let n_s = rng.gen_range(0..4);
        let n_max = auto_n_max(beta, chi, 1e-12).min(60);
        let cfg = model(beta, chi, n_s, random_qubit(&mut rng, 2.0), n_max);
        let set = build_outcomes(&cfg, chi).map_err(|e| e.to_string())?;
        let closed = set.statistics().meter_entropy_production().map_err(|e| e.to_string())?;
        let oracle = sigma_a_oracle(&set).map_err(|e| e.to_string())?;
        worst = worst.max((closed - oracle).abs());
    }
    within(Duration::from_secs(30), start)?;
    if worst <= 1e-8 {
        Ok(format!("max |closed − oracle| = {worst:.3e}"))
    } else {
        Err(format!("max |closed − oracle| = {worst:.3e} > 1e-8"))
    }
}

fn second_law_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_bound = f64::INFINITY;
    let mut worst_identity: f64 = 0.0;
    for _ in 0..100 {
        let beta = rng.gen_range(0.3..3.0);
        let chi = rng.gen_range(0.0..0.8);
        let n_s = rng.gen_range(0..4);
        let mut cfg = model(beta, chi, n_s, random_qubit(&mut rng, 2.0), auto_n_max(beta, chi, 1e-10).min(200));
        cfg.schedule.ramp_rate = 10f64.powf(rng.gen_range(-3.0..0.0));
        let w_dr = dynamics::work_linear_ramp(&cfg).map_err(|e| e.to_string())?.w_dr;
        let rho0 = cfg.qubit.initial_state().map_err(|e| e.to_string())?;
        let set = build_outcomes(&cfg, chi).map_err(|e| e.to_string())?;
        let bound = thermo::work_lower_bound(&set, &rho0, &cfg.qubit.hamiltonian(), beta).map_err(|e| e.to_string())?;
        let ep = entropy_production_terms(&cfg, &set, &rho0, w_dr).map_err(|e| e.to_string())?;
        let lhs = beta * (w_dr + ep.w_reset_rev - bound.delta_e_s) - bound.j_s - bound.i_sa;
        worst_bound = worst_bound.min(lhs);
        let identity = beta * (w_dr + ep.w_reset_rev) - (ep.sigma_drive + ep.sigma_s + ep.sigma_a + bound.j_s);
        worst_identity = worst_identity.max(identity.abs());
    }
    if worst_bound >= -1e-9 && worst_identity <= 1e-9 {
        Ok(format!("min bound slack {worst_bound:.3e}, max identity residual {worst_identity:.3e}"))
    } else {
        Err(format!("min bound slack {worst_bound:.3e}, max identity residual {worst_identity:.3e}"))
    }
}

fn relaxation() -> Outcome {
    let beta = 2.0;
    let mut worst_distance: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for chi in [0.3, 0.7] {
        let cfg = model(beta, chi, 0, QubitSpec::plus_state(2.0), auto_n_max(beta, chi, 1e-10));
        let rho0 = branch_thermal_state(&cfg, Branch::Excited, 0.0).map_err(|e| e.to_string())?;
        for k in Branch::ALL {
            let tr = dynamics::integrate_density_with(&rho0, 0.0, 20.0, k, &cfg, |_| chi).map_err(|e| e.to_string())?;
            let target = branch_thermal_state(&cfg, k, chi).map_err(|e| e.to_string())?;
            let d = trace_distance(&tr.final_state(), target.as_operator()).map_err(|e| e.to_string())?;
            worst_distance = worst_distance.max(d);
            worst_drift = worst_drift.max(tr.trace_drift);
        }
    }
    if worst_distance <= 1e-4 && worst_drift <= 1e-8 {
        Ok(format!("max trace distance {worst_distance:.3e}, max trace drift {worst_drift:.3e}"))
    } else {
        Err(format!("max trace distance {worst_distance:.3e}, max trace drift {worst_drift:.3e}"))
    }
}

fn rotated() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let sx = Operator::from_rows(&[&[z, o], &[o, z]]).map_err(|e| e.to_string())?;
    let mut worst_identity: f64 = 0.0;
    let mut worst_gap = f64::INFINITY;
    for _ in 0..20 {
        let q = random_qubit(&mut rng, 2.0);
        let rho0 = q.initial_state().map_err(|e| e.to_string())?;
        let cfg = model(1.5, 0.6, 0, q, 40);
        let rot = rotated_protocol(&cfg, &rho0, &sx).map_err(|e| e.to_string())?;
        worst_identity = worst_identity.max((rot.w1 + rot.w3 - rot.delta_e_s).abs());
        worst_gap = worst_gap.min(rot.report.bound_gap);
    }
    if worst_identity <= 1e-12 && worst_gap >= -1e-9 {
        Ok(format!("max |W1 + W3 − ΔE_S| = {worst_identity:.3e}, min bound gap {worst_gap:.3e}"))
    } else {
        Err(format!("max |W1 + W3 − ΔE_S| = {worst_identity:.3e}, min bound gap {worst_gap:.3e}"))
    }
}

fn perfect_discrimination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let q = if i == 0 { QubitSpec::plus_state(2.0) } else { random_qubit(&mut rng, 2.0) };
        let cfg = model(1.0, 0.5, 0, q, 30);
        let rho0 = cfg.qubit.initial_state().map_err(|e| e.to_string())?;
        let set = MeasurementOutcomeSet::perfect_discrimination(&cfg, 0.5).map_err(|e| e.to_string())?;
        let j = info_gain_js(&set, &rho0).map_err(|e| e.to_string())?;
        let xi = holevo_xi(&set).map_err(|e| e.to_string())?;
        let h_r = set.statistics().h_r().map_err(|e| e.to_string())?;
        let ep = entropy_production_terms(&cfg, &set, &rho0, 0.0).map_err(|e| e.to_string())?;
        let oracle = sigma_a_oracle(&set).map_err(|e| e.to_string())?;
        let eta = efficiency(&set, &rho0, 2).map_err(|e| e.to_string())?;
        let i_sa = avg_mutual_info(&set).map_err(|e| e.to_string())?;
        let deviations = [
            j - von_neumann_entropy(&rho0),
            xi - h_r,
            ep.sigma_a,
            oracle,
            eta - 1.0,
            i_sa,
        ];
        worst = deviations.iter().fold(worst, |m, d| m.max(d.abs()));
    }
    if worst <= 1e-10 {
        Ok(format!("max deviation {worst:.3e}"))
    } else {
        Err(format!("max deviation {worst:.3e} > 1e-10"))
    }
}

fn consistent_cycle(rng: &mut ChaCha8Rng) -> EngineCycleSpec {
    let t_meas = rng.gen_range(0.05..5.0);
    let t_bath = rng.gen_range(0.05..5.0);
    let j_s: f64 = rng.gen_range(-1.0..1.0);
    let q_meas = -t_meas * j_s - rng.gen_range(0.0..1.0);
    let q_bath = -q_meas * t_bath / t_meas - rng.gen_range(0.0..1.0);
    let w_extr = -rng.gen_range(0.0..1.0);
    let w_meas = -w_extr - q_bath - q_meas;
    EngineCycleSpec { w_meas, q_meas, q_bath, w_extr, t_meas, t_bath, j_s }
}

fn mpe_classifier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut counts = [0usize; 3];
    for _ in 0..1000 {
        let spec = consistent_cycle(&mut rng);
        let rep = classify_cycle(&spec).map_err(|e| e.to_string())?;
        let metric = rep.efficiency_metric.ok_or_else(|| format!("no metric for {spec:?}"))?;
        if metric.value > metric.bound + 1e-9 {
            return Err(format!("{} = {} exceeds {} for {spec:?}", metric.name, metric.value, metric.bound));
        }
        match rep.regime {
            Regime::Transducer => counts[0] += 1,
            Regime::MaxwellDemon => {
                if spec.t_meas >= spec.t_bath {
                    return Err(format!("demon with T_meas >= T_bath: {spec:?}"));
                }
                counts[1] += 1
            }
            Regime::HybridOrHeat => counts[2] += 1,
            Regime::Invalid => return Err(format!("consistent cycle classified invalid: {spec:?}")),
        }
    }
    Ok(format!("transducer {}, demon {}, hybrid/heat {}", counts[0], counts[1], counts[2]))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("efficiency curve collapse", efficiency_collapse),
        ("efficiency endpoint", efficiency_endpoint),
        ("quasi-static limit", quasi_static_limit),
        ("analytic-numeric work equivalence", work_equivalence),
        ("sigma_A oracle equivalence", sigma_a_equivalence),
        ("second-law fuzz", second_law_fuzz),
        ("steady-state relaxation", relaxation),
        ("rotated protocol", rotated),
        ("perfect-discrimination limit", perfect_discrimination),
        ("MPE classifier", mpe_classifier),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
