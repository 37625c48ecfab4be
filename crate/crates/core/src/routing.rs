//! Multi-hop route construction.
//!
//! Starting at the source, each hop picks the next relay among the
//! in-range, strictly shallower, unvisited candidates and carries the data
//! until the sink is reached (`Delivered`) or no candidate exists (`Void`).
//! Two relay-selection schemes, each with two power-loading modes:
//!
//! - secure: joint relay selection and power allocation maximizing the hop
//!   secrecy capacity (optimal loading runs the dual solver; equal loading
//!   splits the budget uniformly and picks the capacity argmax directly),
//! - depth-based (DBR): the security-oblivious baseline that forwards
//!   greedily toward the surface; the eavesdropper plays no role in its
//!   relay choice, only in the achieved secrecy capacity.
//!
//! The end-to-end secrecy capacity of a route is the minimum over its
//! hops. The eavesdropper's distance is recomputed from each hop's current
//! sender.

use serde::{Deserialize, Serialize};

use crate::acoustics::{BandProfile, PropagationParams};
use crate::error::Result;
use crate::optimizer::{
    self, hop_profiles, solve_hop, AllocationResult, SolverConfig,
};
use crate::secrecy::secrecy_capacity;
use crate::topology::{NetworkTopology, NodeId};

/// The four simulated schemes: selection rule x power loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SecureOptimal,
    SecureEqualPower,
    DbrOptimal,
    DbrEqualPower,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::SecureOptimal,
        Scheme::SecureEqualPower,
        Scheme::DbrOptimal,
        Scheme::DbrEqualPower,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::SecureOptimal => "secure_optimal",
            Scheme::SecureEqualPower => "secure_equal_power",
            Scheme::DbrOptimal => "dbr_optimal",
            Scheme::DbrEqualPower => "dbr_equal_power",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Scheme::ALL.iter().copied().find(|sch| sch.label() == s)
    }

    pub fn power_mode(self) -> PowerMode {
        match self {
            Scheme::SecureOptimal | Scheme::DbrOptimal => PowerMode::Optimal,
            Scheme::SecureEqualPower | Scheme::DbrEqualPower => PowerMode::Equal,
        }
    }

    pub fn is_dbr(self) -> bool {
        matches!(self, Scheme::DbrOptimal | Scheme::DbrEqualPower)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    Optimal,
    Equal,
}

/// Reading of the depth-based forwarding rule. `MinDepth` is the canonical
/// behavior (greatest progress toward the surface wins); `MaxDepth` keeps
/// the smallest-progress alternative selectable for sensitivity checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbrRule {
    #[default]
    MinDepth,
    MaxDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteStatus {
    Delivered,
    Void,
}

/// A constructed route and its per-hop secrecy capacities.
#[derive(Debug, Clone, Serialize)]
pub struct RouteResult {
    pub scheme: Scheme,
    /// Node sequence starting at the source; ends at the sink when
    /// `Delivered`.
    pub hops: Vec<NodeId>,
    /// One secrecy capacity per traversed hop.
    pub per_hop_sc: Vec<f64>,
    /// Minimum over the per-hop capacities (0 when no hop was made).
    pub end_to_end_sc: f64,
    pub status: RouteStatus,
    /// The node left without a forwarding candidate, on `Void`.
    pub stranded: Option<NodeId>,
}

/// Per-hop detail kept alongside a route: the chosen relay, the powers it
/// was served with, and the dual-solver record for optimal loading.
#[derive(Debug, Clone, Serialize)]
pub struct RoutedHop {
    pub sender: NodeId,
    pub relay: NodeId,
    pub secrecy_capacity: f64,
    pub powers: Vec<f64>,
    /// Present for optimal power loading; equal loading runs no solver.
    pub solve: Option<AllocationResult>,
}

/// Common routing knobs. The budget `p_t` is in linear units.
#[derive(Debug, Clone, Copy)]
pub struct RouteOptions {
    pub max_range_m: f64,
    pub p_t: f64,
    pub solver: SolverConfig,
    pub dbr_rule: DbrRule,
}

impl RouteOptions {
    pub fn new(p_t: f64) -> Self {
        Self {
            max_range_m: crate::topology::DEFAULT_MAX_RANGE_M,
            p_t,
            solver: SolverConfig::default(),
            dbr_rule: DbrRule::default(),
        }
    }
}

/// Route one scheme.
pub fn route(
    scheme: Scheme,
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
) -> Result<RouteResult> {
    Ok(route_detailed(scheme, topo, band, params, opts)?.0)
}

/// Route one scheme, also returning the per-hop details.
pub fn route_detailed(
    scheme: Scheme,
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
) -> Result<(RouteResult, Vec<RoutedHop>)> {
    route_impl(scheme, topo, band, params, opts)
}

/// Secure routing with the given power loading.
pub fn route_secure(
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
    mode: PowerMode,
) -> Result<RouteResult> {
    let scheme = match mode {
        PowerMode::Optimal => Scheme::SecureOptimal,
        PowerMode::Equal => Scheme::SecureEqualPower,
    };
    route(scheme, topo, band, params, opts)
}

/// Depth-based routing with the given power loading.
pub fn route_dbr(
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
    mode: PowerMode,
) -> Result<RouteResult> {
    let scheme = match mode {
        PowerMode::Optimal => Scheme::DbrOptimal,
        PowerMode::Equal => Scheme::DbrEqualPower,
    };
    route(scheme, topo, band, params, opts)
}

fn route_impl(
    scheme: Scheme,
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
) -> Result<(RouteResult, Vec<RoutedHop>)> {
    let source = topo.source();
    let sink = topo.sink();
    let mut hops = vec![source];
    let mut per_hop_sc: Vec<f64> = Vec::new();
    let mut details: Vec<RoutedHop> = Vec::new();
    let mut visited = vec![source];
    let mut current = source;

    let status = loop {
        let candidates = topo.candidates(current, opts.max_range_m, &visited)?;
        if candidates.is_empty() {
            break RouteStatus::Void;
        }

        let hop = if scheme.is_dbr() {
            let relay = dbr_relay(&candidates, topo, opts.dbr_rule)?;
            match scheme.power_mode() {
                PowerMode::Optimal => optimal_hop(current, &[relay], topo, band, params, opts)?,
                PowerMode::Equal => equal_hop(current, &[relay], topo, band, params, opts)?,
            }
        } else {
            match scheme.power_mode() {
                PowerMode::Optimal => optimal_hop(current, &candidates, topo, band, params, opts)?,
                PowerMode::Equal => equal_hop(current, &candidates, topo, band, params, opts)?,
            }
        };

        let relay = hop.relay;
        hops.push(relay);
        per_hop_sc.push(hop.secrecy_capacity);
        visited.push(relay);
        details.push(hop);

        if relay == sink {
            break RouteStatus::Delivered;
        }
        current = relay;
    };

    let end_to_end_sc = per_hop_sc.iter().copied().fold(f64::INFINITY, f64::min);
    let end_to_end_sc = if per_hop_sc.is_empty() {
        0.0
    } else {
        end_to_end_sc
    };
    let stranded = (status == RouteStatus::Void).then_some(current);

    Ok((
        RouteResult {
            scheme,
            hops,
            per_hop_sc,
            end_to_end_sc,
            status,
            stranded,
        },
        details,
    ))
}

fn optimal_hop(
    sender: NodeId,
    candidates: &[NodeId],
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
) -> Result<RoutedHop> {
    let solve = solve_hop(sender, candidates, topo, band, params, opts.p_t, &opts.solver)?;
    let relay = solve
        .selected
        .expect("a non-empty candidate set always yields a relay");
    Ok(RoutedHop {
        sender,
        relay,
        secrecy_capacity: solve.secrecy_capacity,
        powers: solve.powers.clone(),
        solve: Some(solve),
    })
}

/// Equal loading: split the budget uniformly over the subcarriers and pick
/// the candidate with the largest hop secrecy capacity. When every
/// candidate is at zero, forward to the candidate nearest the sink, the
/// same progress rule the dual solver applies on zero-secrecy hops.
fn equal_hop(
    sender: NodeId,
    candidates: &[NodeId],
    topo: &NetworkTopology,
    band: &BandProfile,
    params: &PropagationParams,
    opts: &RouteOptions,
) -> Result<RoutedHop> {
    let n = band.n_subcarriers();
    let powers = vec![opts.p_t / n as f64; n];
    let profiles = hop_profiles(sender, candidates, topo, band, params)?;

    let mut best: usize = 0;
    let mut best_sc = f64::NEG_INFINITY;
    let mut scs = Vec::with_capacity(profiles.len());
    for (i, profile) in profiles.iter().enumerate() {
        let sc = secrecy_capacity(profile, &powers)?;
        scs.push(sc);
        if sc > best_sc {
            best_sc = sc;
            best = i;
        }
    }

    let relay = if best_sc <= 0.0 {
        optimizer::nearest_to_sink(candidates, topo)?
            .expect("a non-empty candidate set always yields a relay")
    } else {
        candidates[best]
    };
    let sc = scs[candidates.iter().position(|&c| c == relay).unwrap()];

    Ok(RoutedHop {
        sender,
        relay,
        secrecy_capacity: sc,
        powers,
        solve: None,
    })
}

/// Depth-based relay choice among already-filtered candidates; ties break
/// toward the smaller id.
fn dbr_relay(candidates: &[NodeId], topo: &NetworkTopology, rule: DbrRule) -> Result<NodeId> {
    debug_assert!(!candidates.is_empty());
    let mut best = candidates[0];
    let mut best_depth = topo.depth(best)?;
    for &c in &candidates[1..] {
        let depth = topo.depth(c)?;
        let better = match rule {
            DbrRule::MinDepth => depth < best_depth,
            DbrRule::MaxDepth => depth > best_depth,
        };
        if better {
            best = c;
            best_depth = depth;
        }
    }
    Ok(best)
}
