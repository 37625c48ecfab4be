//! Per-hop joint relay selection and subcarrier power allocation via dual
//! decomposition.
//!
//! For a sender with power budget `P_T` and a set of candidate relays, the
//! hop problem is to pick one relay and a per-subcarrier power vector
//! maximizing the hop secrecy capacity subject to `sum_j p_j <= P_T`.
//! Relaxing the budget with a multiplier `lambda` decouples the problem:
//!
//! - for fixed `lambda`, each subcarrier's optimal power has the closed
//!   form `p_j* = ((-b_j + sqrt(b_j^2 - 4 a_j c_j)) / (2 a_j))^+` with
//!   `a_j = Or Oe`, `b_j = Or^2 Oe + Or Oe^2`,
//!   `c_j = (Or Oe)^2 - Or Oe^2 / (lambda ln 2) + Or^2 Oe / (lambda ln 2)`
//!   (`Or`, `Oe` the receiver/eavesdropper net noise powers),
//! - the relay is the candidate maximizing the Lagrangian at those powers,
//! - the multiplier follows the subgradient control law
//!   `lambda <- lambda + delta_m * (P_alloc - P_T)` until the selected
//!   candidate's allocation meets the budget.
//!
//! The step is normalized by the current multiplier,
//! `delta_m = step * lambda / P_T`, so the update is multiplicative and
//! covers the orders of magnitude the channel scales span; the relative
//! step shrinks whenever the budget residual changes sign.
//!
//! [`oracle_allocation`] is an exhaustive grid search over the power
//! simplex, independent of the dual machinery, used to validate it at
//! small subcarrier counts.

use serde::{Deserialize, Serialize};

use std::f64::consts::LN_2;

use crate::acoustics::{BandProfile, PropagationParams};
use crate::error::{Error, Result};
use crate::secrecy::{secrecy_capacity, subcarrier_secrecy_rate, LinkNoiseProfile};
use crate::topology::{NetworkTopology, NodeId};

/// Largest subcarrier count the grid oracle accepts (the grid is
/// exponential in the subcarrier count).
pub const ORACLE_MAX_SUBCARRIERS: usize = 6;

/// Tuning of the dual solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Initial value of the dual variable.
    pub lambda0: f64,
    /// Relative gain of the normalized subgradient step.
    pub delta0: f64,
    /// Cap on the per-iteration multiplicative change of the dual variable.
    pub growth_cap: f64,
    /// Relative budget tolerance: converged when
    /// `|P_alloc - P_T| <= budget_tol * P_T`.
    pub budget_tol: f64,
    /// Iteration cap of the outer loop.
    pub max_iter: usize,
    /// Projection floor keeping the dual variable positive.
    pub lambda_min: f64,
    /// Record the multiplier/allocation trajectory for diagnostics.
    pub record_trajectory: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda0: 1e-3,
            delta0: 0.5,
            growth_cap: 4.0,
            budget_tol: 1e-3,
            max_iter: 10_000,
            lambda_min: 1e-300,
            record_trajectory: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("solver: {what}")));
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return bad("lambda0 must be positive and finite");
        }
        if !(self.delta0 > 0.0) || !self.delta0.is_finite() {
            return bad("delta0 must be positive and finite");
        }
        if !(self.growth_cap > 1.0) || !self.growth_cap.is_finite() {
            return bad("growth_cap must exceed 1");
        }
        if !(self.budget_tol > 0.0 && self.budget_tol < 1.0) {
            return bad("budget_tol must lie in (0, 1)");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.lambda_min > 0.0) || self.lambda_min > self.lambda0 {
            return bad("lambda_min must be positive and no larger than lambda0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Budget met within tolerance.
    Converged,
    /// No candidate can earn positive secrecy; powers are zero.
    ZeroSecrecy,
    /// The candidate set was empty.
    NoCandidate,
    /// Iteration cap hit; the best iterate is returned.
    MaxIterations,
}

/// Final per-candidate numbers of a solve, for diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub node: NodeId,
    pub lagrangian: f64,
    pub p_alloc: f64,
}

/// Multiplier and allocation trajectories of the outer loop.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveTrajectory {
    pub lambda: Vec<f64>,
    pub p_alloc: Vec<f64>,
}

/// Outcome of one hop solve.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationResult {
    /// Chosen relay. `None` only when the candidate set was empty, or at
    /// the profile level when no candidate has positive secrecy (the hop
    /// solver then substitutes the forward-progress relay).
    pub selected: Option<NodeId>,
    /// Per-subcarrier powers of the selected candidate, linear units.
    pub powers: Vec<f64>,
    /// Final value of the dual variable.
    pub lambda: f64,
    /// Secrecy capacity achieved by `powers` on the selected link.
    pub secrecy_capacity: f64,
    /// Outer-loop iterations used.
    pub iterations: usize,
    pub status: SolveStatus,
    /// Final Lagrangian and allocation per candidate.
    pub candidates: Vec<CandidateReport>,
    /// Present when trajectory recording was requested.
    pub trajectory: Option<SolveTrajectory>,
}

/// Closed-form optimal power of one subcarrier at multiplier `lambda`.
/// Zero whenever the eavesdropper's channel is as good as the receiver's
/// or the marginal secrecy cannot pay the power price.
fn optimal_power(omega_rx: f64, omega_eve: f64, lambda: f64) -> f64 {
    if omega_eve <= omega_rx {
        return 0.0;
    }
    let a = omega_rx * omega_eve;
    let b = omega_rx * omega_rx * omega_eve + omega_rx * omega_eve * omega_eve;
    let c = a * a - a * (omega_eve - omega_rx) / (lambda * LN_2);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return 0.0;
    }
    ((-b + disc.sqrt()) / (2.0 * a)).max(0.0)
}

/// Closed-form inner power allocation for every subcarrier of a link at a
/// fixed multiplier.
pub fn inner_power_allocation(profile: &LinkNoiseProfile, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidDualVariable(lambda));
    }
    Ok(profile
        .omega_rx()
        .iter()
        .zip(profile.omega_eve())
        .map(|(&orx, &oeve)| optimal_power(orx, oeve, lambda))
        .collect())
}

/// Lagrangian of one candidate link at powers `powers`:
/// `sum_j [ log2((Or Oe + p_j Oe) / (Or Oe + p_j Or)) + lambda P_T - lambda p_j ]`.
pub fn evaluate_lagrangian(
    profile: &LinkNoiseProfile,
    powers: &[f64],
    lambda: f64,
    p_t: f64,
) -> Result<f64> {
    if powers.len() != profile.len() {
        return Err(Error::LengthMismatch {
            expected: profile.len(),
            got: powers.len(),
        });
    }
    if let Some(&bad) = powers.iter().find(|&&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidPower(bad));
    }
    Ok(lagrangian_value(profile, powers, lambda, p_t))
}

fn lagrangian_value(profile: &LinkNoiseProfile, powers: &[f64], lambda: f64, p_t: f64) -> f64 {
    powers
        .iter()
        .zip(profile.omega_rx())
        .zip(profile.omega_eve())
        .map(|((&p, &orx), &oeve)| {
            subcarrier_secrecy_rate(p, orx, oeve) + lambda * p_t - lambda * p
        })
        .sum()
}

struct CandidateEval {
    powers: Vec<f64>,
    p_alloc: f64,
    lagrangian: f64,
}

fn evaluate_all(profiles: &[LinkNoiseProfile], lambda: f64, p_t: f64) -> Vec<CandidateEval> {
    profiles
        .iter()
        .map(|pr| {
            let powers: Vec<f64> = pr
                .omega_rx()
                .iter()
                .zip(pr.omega_eve())
                .map(|(&orx, &oeve)| optimal_power(orx, oeve, lambda))
                .collect();
            let p_alloc = powers.iter().sum();
            let lagrangian = lagrangian_value(pr, &powers, lambda, p_t);
            CandidateEval {
                powers,
                p_alloc,
                lagrangian,
            }
        })
        .collect()
}

// Strict comparison keeps the smallest index on ties.
fn argmax_lagrangian(evals: &[CandidateEval]) -> usize {
    let mut best = 0;
    for (i, e) in evals.iter().enumerate().skip(1) {
        if e.lagrangian > evals[best].lagrangian {
            best = i;
        }
    }
    best
}

/// Noise profiles of every candidate link of one hop. The eavesdropper's
/// path-loss integrals depend on the sender only and are computed once.
pub fn hop_profiles(
    sender: NodeId,
    candidates: &[NodeId],
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
) -> Result<Vec<LinkNoiseProfile>> {
    let eve_pl = band.pathloss_integrals(topo.propagation_distance(sender, topo.eve())?, params)?;
    candidates
        .iter()
        .map(|&rx| LinkNoiseProfile::compute_with_eve_integrals(sender, rx, topo, band, params, &eve_pl))
        .collect()
}

/// One node-selection round at a fixed multiplier: allocate powers for
/// every candidate, return the Lagrangian argmax (`None` on an empty set)
/// and the per-candidate numbers.
pub fn select_node(
    sender: NodeId,
    candidates: &[NodeId],
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    lambda: f64,
    p_t: f64,
) -> Result<(Option<NodeId>, Vec<CandidateReport>)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidDualVariable(lambda));
    }
    if !(p_t > 0.0) || !p_t.is_finite() {
        return Err(Error::NonPositiveBudget(p_t));
    }
    let profiles = hop_profiles(sender, candidates, topo, band, params)?;
    let evals = evaluate_all(&profiles, lambda, p_t);
    let reports = reports_from(&profiles, &evals);
    if evals.is_empty() {
        return Ok((None, reports));
    }
    let best = argmax_lagrangian(&evals);
    Ok((Some(candidates[best]), reports))
}

fn reports_from(profiles: &[LinkNoiseProfile], evals: &[CandidateEval]) -> Vec<CandidateReport> {
    profiles
        .iter()
        .zip(evals)
        .map(|(pr, ev)| CandidateReport {
            node: pr.rx(),
            lagrangian: ev.lagrangian,
            p_alloc: ev.p_alloc,
        })
        .collect()
}

/// Solve the joint selection/allocation problem over precomputed candidate
/// profiles. See [`solve_hop`] for the topology-level entry point.
pub fn solve_profiles(
    profiles: &[LinkNoiseProfile],
    p_t: f64,
    cfg: &SolverConfig,
) -> Result<AllocationResult> {
    cfg.validate()?;
    if !(p_t > 0.0) || !p_t.is_finite() {
        return Err(Error::NonPositiveBudget(p_t));
    }
    if profiles.is_empty() {
        return Ok(AllocationResult {
            selected: None,
            powers: Vec::new(),
            lambda: cfg.lambda0,
            secrecy_capacity: 0.0,
            iterations: 0,
            status: SolveStatus::NoCandidate,
            candidates: Vec::new(),
            trajectory: None,
        });
    }
    let n = profiles[0].len();
    for p in profiles {
        if p.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: p.len(),
            });
        }
    }

    // With the eavesdropper dominant on every candidate, the optimal
    // allocation is zero regardless of the multiplier and the control law
    // can never reach the budget; detect and short-circuit.
    if profiles.iter().all(|p| p.zero_secrecy()) {
        let evals = evaluate_all(profiles, cfg.lambda0, p_t);
        return Ok(AllocationResult {
            selected: None,
            powers: vec![0.0; n],
            lambda: cfg.lambda0,
            secrecy_capacity: 0.0,
            iterations: 0,
            status: SolveStatus::ZeroSecrecy,
            candidates: reports_from(profiles, &evals),
            trajectory: None,
        });
    }

    let mut lambda = cfg.lambda0;
    let mut step = cfg.delta0;
    let mut prev_sign: Option<bool> = None;
    let mut trajectory = cfg.record_trajectory.then(SolveTrajectory::default);
    let mut best: Option<(f64, f64)> = None; // (|residual|, lambda)

    for m in 1..=cfg.max_iter {
        let evals = evaluate_all(profiles, lambda, p_t);
        let sel = argmax_lagrangian(&evals);
        let p_alloc = evals[sel].p_alloc;
        let residual = (p_alloc - p_t) / p_t;

        if let Some(t) = trajectory.as_mut() {
            t.lambda.push(lambda);
            t.p_alloc.push(p_alloc);
        }
        if best.map_or(true, |(r, _)| residual.abs() < r) {
            best = Some((residual.abs(), lambda));
        }

        if residual.abs() <= cfg.budget_tol {
            return Ok(finish(
                profiles,
                evals,
                sel,
                lambda,
                m,
                SolveStatus::Converged,
                trajectory,
            ));
        }

        let positive = residual > 0.0;
        if prev_sign.is_some_and(|s| s != positive) {
            step *= 0.5;
        }
        prev_sign = Some(positive);

        let factor = (1.0 + step * residual).clamp(1.0 / cfg.growth_cap, cfg.growth_cap);
        lambda = (lambda * factor).max(cfg.lambda_min);
    }

    let (_, best_lambda) = best.expect("at least one iteration ran");
    let evals = evaluate_all(profiles, best_lambda, p_t);
    let sel = argmax_lagrangian(&evals);
    Ok(finish(
        profiles,
        evals,
        sel,
        best_lambda,
        cfg.max_iter,
        SolveStatus::MaxIterations,
        trajectory,
    ))
}

fn finish(
    profiles: &[LinkNoiseProfile],
    mut evals: Vec<CandidateEval>,
    sel: usize,
    lambda: f64,
    iterations: usize,
    status: SolveStatus,
    trajectory: Option<SolveTrajectory>,
) -> AllocationResult {
    let candidates = reports_from(profiles, &evals);
    let powers = std::mem::take(&mut evals[sel].powers);
    let sc = secrecy_capacity(&profiles[sel], &powers).expect("solver powers are valid");
    AllocationResult {
        selected: Some(profiles[sel].rx()),
        powers,
        lambda,
        secrecy_capacity: sc,
        iterations,
        status,
        candidates,
        trajectory,
    }
}

/// Candidate nearest to the sink, ties broken by the smaller id. Used as
/// the forward-progress relay when no candidate has positive secrecy.
pub(crate) fn nearest_to_sink(
    candidates: &[NodeId],
    topo: &NetworkTopology,
) -> Result<Option<NodeId>> {
    let sink = topo.sink();
    let mut best: Option<(f64, NodeId)> = None;
    for &c in candidates {
        let d = topo.distance(c, sink)?;
        if best.map_or(true, |(bd, bid)| d < bd || (d == bd && c < bid)) {
            best = Some((d, c));
        }
    }
    Ok(best.map(|(_, id)| id))
}

/// Solve one hop of the given topology: build the candidate profiles, run
/// the dual solver, and on a zero-secrecy hop forward to the candidate
/// nearest the sink so the route still makes progress (the hop then
/// carries zero secrecy capacity).
pub fn solve_hop(
    sender: NodeId,
    candidates: &[NodeId],
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    p_t: f64,
    cfg: &SolverConfig,
) -> Result<AllocationResult> {
    let profiles = hop_profiles(sender, candidates, topo, band, params)?;
    let mut result = solve_profiles(&profiles, p_t, cfg)?;
    if result.status == SolveStatus::ZeroSecrecy {
        result.selected = nearest_to_sink(candidates, topo)?;
    }
    Ok(result)
}

/// Exhaustive grid search over the simplex `{p >= 0, sum p <= P_T}` with
/// `steps` grid units per budget, maximizing the hop secrecy capacity.
/// Returns the best power vector and its capacity. Independent of the dual
/// solver; exponential in the subcarrier count, so capped at
/// [`ORACLE_MAX_SUBCARRIERS`].
pub fn oracle_allocation(
    profile: &LinkNoiseProfile,
    p_t: f64,
    steps: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = profile.len();
    if n > ORACLE_MAX_SUBCARRIERS {
        return Err(Error::OracleTooLarge {
            max: ORACLE_MAX_SUBCARRIERS,
            got: n,
        });
    }
    if !(p_t > 0.0) || !p_t.is_finite() {
        return Err(Error::NonPositiveBudget(p_t));
    }
    if steps == 0 {
        return Err(Error::InvalidConfig(
            "oracle needs at least one grid step".into(),
        ));
    }

    let delta = p_t / steps as f64;
    let mut units = vec![0usize; n];
    let mut best_units = vec![0usize; n];
    let mut best_sum = f64::NEG_INFINITY;

    fn search(
        j: usize,
        remaining: usize,
        partial: f64,
        delta: f64,
        profile: &LinkNoiseProfile,
        units: &mut [usize],
        best_sum: &mut f64,
        best_units: &mut [usize],
    ) {
        if j == units.len() {
            if partial > *best_sum {
                *best_sum = partial;
                best_units.copy_from_slice(units);
            }
            return;
        }
        let orx = profile.omega_rx()[j];
        let oeve = profile.omega_eve()[j];
        for u in 0..=remaining {
            units[j] = u;
            let term = subcarrier_secrecy_rate(u as f64 * delta, orx, oeve);
            search(
                j + 1,
                remaining - u,
                partial + term,
                delta,
                profile,
                units,
                best_sum,
                best_units,
            );
        }
        units[j] = 0;
    }

    search(
        0,
        steps,
        0.0,
        delta,
        profile,
        &mut units,
        &mut best_sum,
        &mut best_units,
    );

    let powers: Vec<f64> = best_units.iter().map(|&u| u as f64 * delta).collect();
    Ok((powers, best_sum.max(0.0)))
}
