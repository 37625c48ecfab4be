//! Self-check suite: golden formula values, closed-form-vs-numeric
//! allocation cross-checks, dual-vs-oracle agreement, KKT conditions at
//! convergence, and the zero-secrecy short-circuit. The CLI `validate`
//! subcommand runs these and reports one pass/fail line per check.
//!
//! Oracle and KKT instances use order-one synthetic noise scales: the
//! checks probe the solver's optimality conditions, which are scale
//! invariant, and order-one scales keep the finite-difference marginals
//! well inside f64 precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::f64::consts::LN_2;

use crate::acoustics::{absorption_db_per_km, noise_psd_db, path_loss_db, PropagationParams};
use crate::optimizer::{self, solve_hop, solve_profiles, SolveStatus, SolverConfig};
use crate::secrecy::{subcarrier_secrecy_rate, LinkNoiseProfile};
use crate::topology::{NetworkTopology, Node, NodeId, NodeKind, Region};

/// Tolerance on the absorption-coefficient golden values, dB/km.
pub const ABSORPTION_TOL: f64 = 1e-5;
/// Tolerance on the path-loss golden value, dB.
pub const PATH_LOSS_TOL: f64 = 1e-4;
/// Relative tolerance of the dual-vs-oracle secrecy comparison.
pub const ORACLE_REL_TOL: f64 = 0.01;
/// Relative budget tolerance checked on converged allocations.
pub const BUDGET_REL_TOL: f64 = 1e-3;
/// Relative tolerance of the finite-difference stationarity check.
pub const KKT_REL_TOL: f64 = 1e-5;

/// Outcome of one self-check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Run every check with instance streams derived from `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        formula_golden_values(),
        closed_form_matches_numeric_search(seed),
        oracle_equivalence(seed, 50),
        kkt_conditions(seed, 100),
        zero_secrecy_short_circuit(seed, 100),
    ]
}

/// Golden values of the absorption, noise, and path-loss formulas,
/// hand-evaluated independently of the implementation.
pub fn formula_golden_values() -> CheckOutcome {
    let params = PropagationParams::default();
    let a10 = absorption_db_per_km(10.0).unwrap();
    let a1 = absorption_db_per_km(1.0).unwrap();
    let n1 = noise_psd_db(1.0, &params).unwrap();
    let pl = path_loss_db(1000.0, 10.0, &params).unwrap();

    let passed = (a10 - 1.18703).abs() < ABSORPTION_TOL
        && (a1 - 0.069004).abs() < ABSORPTION_TOL
        && n1 == 50.0
        && (pl - 46.18703).abs() < PATH_LOSS_TOL;
    CheckOutcome {
        name: "formula golden values",
        passed,
        detail: format!(
            "a(10)={a10:.6} dB/km, a(1)={a1:.6} dB/km, N(1)={n1} dB, PL(1000 m, 10 kHz)={pl:.6} dB"
        ),
    }
}

fn random_profile(rng: &mut ChaCha8Rng, n: usize) -> LinkNoiseProfile {
    let orx: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
    let oeve: Vec<f64> = orx.iter().map(|&o| o * rng.gen_range(1.05..8.0)).collect();
    LinkNoiseProfile::new(NodeId(0), NodeId(1), orx, oeve).unwrap()
}

/// Cross-check the closed-form per-subcarrier power against a
/// golden-section search on the surplus `secrecy(p) - lambda p`.
pub fn closed_form_matches_numeric_search(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC105_ED);
    let mut max_err: f64 = 0.0;
    for _ in 0..50 {
        let orx = rng.gen_range(0.1..5.0);
        let oeve = orx * rng.gen_range(1.05..8.0);
        let lambda = rng.gen_range(1e-3..0.5);
        let profile = LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![orx], vec![oeve]).unwrap();
        let closed = optimizer::inner_power_allocation(&profile, lambda).unwrap()[0];

        let g = |p: f64| subcarrier_secrecy_rate(p, orx, oeve) - lambda * p;
        let (mut lo, mut hi) = (0.0f64, 1e4f64);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if g(a) < g(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        let numeric = 0.5 * (lo + hi);
        max_err = max_err.max((closed - numeric).abs() / numeric.abs().max(1.0));
    }
    CheckOutcome {
        name: "closed-form allocation vs numeric search",
        passed: max_err < 1e-5,
        detail: format!("max relative deviation {max_err:.2e} over 50 instances"),
    }
}

/// Dual solution vs the exhaustive grid oracle at 4 subcarriers: the
/// secrecy capacities must agree within `max(1% relative, the oracle's
/// grid-resolution bound)`, and converged allocations must meet the budget
/// within `BUDGET_REL_TOL`.
pub fn oracle_equivalence(seed: u64, instances: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04AC_1E);
    let cfg = SolverConfig::default();
    let steps = 40;
    let mut max_gap_ratio: f64 = 0.0;
    let mut max_budget_err: f64 = 0.0;
    let mut failures = 0usize;

    for _ in 0..instances {
        let profile = random_profile(&mut rng, 4);
        let p_t = rng.gen_range(2.0..20.0);
        let dual = solve_profiles(std::slice::from_ref(&profile), p_t, &cfg).unwrap();
        if dual.status != SolveStatus::Converged {
            failures += 1;
            continue;
        }
        let total: f64 = dual.powers.iter().sum();
        max_budget_err = max_budget_err.max((total - p_t).abs() / p_t);

        let (_, oracle_sc) = optimizer::oracle_allocation(&profile, p_t, steps).unwrap();

        // The oracle undershoots the continuum optimum by at most the
        // objective's slope near the optimum times one grid cell per
        // subcarrier (rounding the optimum down to the grid stays feasible
        // and the per-subcarrier terms are concave).
        let delta = p_t / steps as f64;
        let grid_bound: f64 = dual
            .powers
            .iter()
            .zip(profile.omega_rx())
            .zip(profile.omega_eve())
            .map(|((&p, &orx), &oeve)| {
                let at = (p - delta).max(0.0);
                let slope = (oeve - orx) / ((orx + at) * (oeve + at) * LN_2);
                slope * delta
            })
            .sum();

        let tol = (ORACLE_REL_TOL * oracle_sc.max(dual.secrecy_capacity)).max(grid_bound);
        let gap = (dual.secrecy_capacity - oracle_sc).abs();
        if gap > tol {
            failures += 1;
        }
        max_gap_ratio = max_gap_ratio.max(gap / tol);
    }

    CheckOutcome {
        name: "dual solution vs grid oracle (4 subcarriers)",
        passed: failures == 0 && max_budget_err <= BUDGET_REL_TOL,
        detail: format!(
            "{instances} instances, worst gap at {:.0}% of tolerance, worst budget error {max_budget_err:.2e}",
            100.0 * max_gap_ratio
        ),
    }
}

/// Central-difference marginal of one subcarrier's secrecy rate at `p`.
pub fn fd_marginal(p: f64, omega_rx: f64, omega_eve: f64) -> f64 {
    let h = p * 1e-4;
    (subcarrier_secrecy_rate(p + h, omega_rx, omega_eve)
        - subcarrier_secrecy_rate(p - h, omega_rx, omega_eve))
        / (2.0 * h)
}

/// Stationarity and complementary slackness at convergence, on 64-subcarrier
/// instances: every active subcarrier's finite-difference marginal equals
/// the converged multiplier within `KKT_REL_TOL`, and every inactive
/// subcarrier's marginal at zero is at most the multiplier.
pub fn kkt_conditions(seed: u64, instances: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6B6B_74);
    let cfg = SolverConfig::default();
    let mut converged = 0usize;
    let mut max_stat_err: f64 = 0.0;
    let mut slackness_violations = 0usize;

    while converged < instances {
        let profile = random_profile(&mut rng, 64);
        let p_t = rng.gen_range(5.0..200.0);
        let res = solve_profiles(std::slice::from_ref(&profile), p_t, &cfg).unwrap();
        if res.status != SolveStatus::Converged {
            continue;
        }
        converged += 1;
        let lambda = res.lambda;
        for ((&p, &orx), &oeve) in res
            .powers
            .iter()
            .zip(profile.omega_rx())
            .zip(profile.omega_eve())
        {
            if p > 0.0 {
                let fd = fd_marginal(p, orx, oeve);
                max_stat_err = max_stat_err.max((fd - lambda).abs() / lambda);
            } else {
                let marginal_at_zero = (oeve - orx) / (orx * oeve * LN_2);
                if marginal_at_zero > lambda * (1.0 + 1e-9) {
                    slackness_violations += 1;
                }
            }
        }
    }

    CheckOutcome {
        name: "KKT stationarity and slackness (64 subcarriers)",
        passed: max_stat_err <= KKT_REL_TOL && slackness_violations == 0,
        detail: format!(
            "{instances} converged instances, max stationarity error {max_stat_err:.2e}, {slackness_violations} slackness violations"
        ),
    }
}

/// A deployment in which the eavesdropper sits strictly closer to the
/// source than every forwarding candidate, so no candidate can earn
/// positive secrecy on the first hop. The sink is out of range.
pub fn eve_dominant_scenario(seed: u64) -> NetworkTopology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = 2500.0;
    let d0 = rng.gen_range(2600.0..4800.0);
    let eve_r = rng.gen_range(50.0..200.0);
    let eve_angle = rng.gen_range(0.0..std::f64::consts::TAU);

    let n_candidates = rng.gen_range(2..5usize);
    let mut nodes = vec![Node {
        id: NodeId(0),
        kind: NodeKind::Sensor,
        x: x0,
        depth: d0,
    }];
    for i in 0..n_candidates {
        let r = rng.gen_range(eve_r + 100.0..1900.0);
        let angle = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
        nodes.push(Node {
            id: NodeId(1 + i),
            kind: NodeKind::Sensor,
            x: x0 + r * angle.cos(),
            depth: d0 - r * angle.sin(),
        });
    }
    nodes.push(Node {
        id: NodeId(1 + n_candidates),
        kind: NodeKind::Sink,
        x: 2500.0,
        depth: 0.0,
    });
    nodes.push(Node {
        id: NodeId(2 + n_candidates),
        kind: NodeKind::Eve,
        x: x0 + eve_r * eve_angle.cos(),
        depth: d0 + eve_r * eve_angle.sin(),
    });

    NetworkTopology::from_nodes(nodes, Region::square(5000.0), seed, 500.0)
        .expect("constructed scenario is valid")
}

/// The zero-secrecy short-circuit: with the eavesdropper dominant, the hop
/// solver must return immediately (no iterations), with zero powers and
/// zero secrecy, still naming the forward-progress relay nearest the sink.
pub fn zero_secrecy_short_circuit(seed: u64, cases: usize) -> CheckOutcome {
    let params = PropagationParams::default();
    let band = crate::acoustics::BandProfile::new(32, 9.0, 15.0, &params, 4).unwrap();
    let cfg = SolverConfig::default();
    let mut failures = 0usize;

    for k in 0..cases {
        let topo = eve_dominant_scenario(seed ^ (k as u64).wrapping_mul(0x9E37_79B9));
        let source = topo.source();
        let candidates = topo.candidates(source, 2000.0, &[source]).unwrap();
        if candidates.is_empty() {
            failures += 1;
            continue;
        }
        let res = solve_hop(source, &candidates, &topo, &band, &params, 1e11, &cfg).unwrap();

        let nearest = candidates
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = topo.distance(a, topo.sink()).unwrap();
                let db = topo.distance(b, topo.sink()).unwrap();
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .unwrap();

        let ok = res.status == SolveStatus::ZeroSecrecy
            && res.iterations == 0
            && res.secrecy_capacity == 0.0
            && res.powers.iter().all(|&p| p == 0.0)
            && res.selected == Some(nearest);
        if !ok {
            failures += 1;
        }
    }

    CheckOutcome {
        name: "zero-secrecy short-circuit",
        passed: failures == 0,
        detail: format!("{cases} constructed deployments, {failures} failures"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for outcome in run_all(7) {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }
}
