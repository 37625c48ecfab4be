//! Monte Carlo experiment driver: configuration, paired sweeps over the
//! power budget and the node density, CSV emission, and aggregation.
//!
//! A sweep crosses every `(m_plus_1, pt_db)` point with `trials` trials.
//! The topology seed of a trial depends on the node count and the trial
//! index only, so every budget point and every scheme of a sweep sees the
//! identical deployment and comparisons are paired. Trials are independent
//! and run in parallel; records are emitted in the deterministic
//! `(m_plus_1, pt_db, trial, scheme)` configuration order regardless of
//! scheduling, so rerunning a configuration reproduces the output byte for
//! byte.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{db_to_linear, BandProfile, PropagationParams, DEFAULT_QUADRATURE_PANELS};
use crate::error::{Error, Result};
use crate::optimizer::SolverConfig;
use crate::routing::{self, DbrRule, RouteOptions, RouteResult, RouteStatus, Scheme};
use crate::topology::{
    NetworkTopology, Region, DEFAULT_EVE_EXCLUSION_M, DEFAULT_MAX_RANGE_M,
};

/// Column order of the sweep CSV.
pub const CSV_HEADER: &str = "scheme,m_plus_1,pt_db,trial,seed,sc,hops,status";

/// Full experiment description. Every field has a default mirroring the
/// reference setup (1024 subcarriers over 9-15 kHz, a 5000 x 5000 m
/// region, spreading factor 1.5, noise constants 50 dB and 18); unknown
/// keys in a config file are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Schemes to run on each topology.
    pub schemes: Vec<Scheme>,
    /// Node-count sweep (sensor nodes per deployment).
    pub m_plus_1: Vec<usize>,
    /// Power-budget sweep, in dB (re 1 uPa).
    pub pt_db: Vec<f64>,
    /// Trials per sweep point.
    pub trials: u32,
    /// Base seed the per-trial topology seeds are derived from.
    pub base_seed: u64,
    pub n_subcarriers: usize,
    pub f_low_khz: f64,
    pub f_high_khz: f64,
    pub region_width_m: f64,
    pub region_height_m: f64,
    pub spreading_factor: f64,
    pub noise_level_db: f64,
    pub noise_decay: f64,
    pub max_range_m: f64,
    pub eve_exclusion_radius_m: f64,
    pub quadrature_panels: usize,
    pub solver: SolverConfig,
    pub dbr_rule: DbrRule,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            m_plus_1: vec![10],
            pt_db: (0..=8).map(|i| 100.0 + 5.0 * i as f64).collect(),
            trials: 200,
            base_seed: 1,
            n_subcarriers: 1024,
            f_low_khz: 9.0,
            f_high_khz: 15.0,
            region_width_m: 5000.0,
            region_height_m: 5000.0,
            spreading_factor: 1.5,
            noise_level_db: 50.0,
            noise_decay: 18.0,
            max_range_m: DEFAULT_MAX_RANGE_M,
            eve_exclusion_radius_m: DEFAULT_EVE_EXCLUSION_M,
            quadrature_panels: DEFAULT_QUADRATURE_PANELS,
            solver: SolverConfig::default(),
            dbr_rule: DbrRule::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.schemes.is_empty() {
            return bad("schemes must not be empty");
        }
        if self.m_plus_1.is_empty() || self.pt_db.is_empty() {
            return bad("sweep lists must not be empty");
        }
        if self.m_plus_1.iter().any(|&m| m < 2) {
            return bad("every m_plus_1 value must be at least 2");
        }
        if self.pt_db.iter().any(|p| !p.is_finite()) {
            return bad("pt_db values must be finite");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.max_range_m > 0.0) {
            return bad("max_range_m must be positive");
        }
        if !(self.region_width_m > 0.0) || !(self.region_height_m > 0.0) {
            return bad("region dimensions must be positive");
        }
        self.solver.validate()?;
        // Band plan errors (subcarrier count, edges, validity range,
        // quadrature panels) surface with their specific messages.
        self.band_profile()?;
        Ok(())
    }

    pub fn propagation(&self) -> PropagationParams {
        PropagationParams {
            spreading_factor: self.spreading_factor,
            noise_level_db: self.noise_level_db,
            noise_decay: self.noise_decay,
        }
    }

    pub fn band_profile(&self) -> Result<BandProfile> {
        BandProfile::new(
            self.n_subcarriers,
            self.f_low_khz,
            self.f_high_khz,
            &self.propagation(),
            self.quadrature_panels,
        )
    }

    pub fn region(&self) -> Region {
        Region {
            width_m: self.region_width_m,
            height_m: self.region_height_m,
        }
    }

    pub fn route_options(&self, pt_db: f64) -> RouteOptions {
        RouteOptions {
            max_range_m: self.max_range_m,
            p_t: db_to_linear(pt_db),
            solver: self.solver,
            dbr_rule: self.dbr_rule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Delivered,
    Void,
    /// The trial could not be evaluated (kept so a single failure never
    /// aborts a sweep).
    Error,
}

impl TrialStatus {
    fn label(self) -> &'static str {
        match self {
            TrialStatus::Delivered => "delivered",
            TrialStatus::Void => "void",
            TrialStatus::Error => "error",
        }
    }
}

/// One CSV row: a scheme evaluated on one topology at one sweep point.
/// Void and error trials carry `sc = 0` (an incomplete route delivers no
/// secret bits).
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub scheme: Scheme,
    pub m_plus_1: usize,
    pub pt_db: f64,
    pub trial: u32,
    pub seed: u64,
    pub sc: f64,
    pub hops: usize,
    pub status: TrialStatus,
}

/// A record together with the route it came from.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub route: Option<RouteResult>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Topology seed of one trial: a splitmix64 chain over the base seed, the
/// node count, and the trial index. Deliberately independent of the power
/// budget and the scheme, so a sweep pairs those comparisons on identical
/// deployments.
pub fn derive_seed(base_seed: u64, m_plus_1: usize, trial: u32) -> u64 {
    let mut h = splitmix64(base_seed);
    h = splitmix64(h ^ m_plus_1 as u64);
    h = splitmix64(h ^ u64::from(trial));
    h
}

/// Run the full sweep, returning records together with their routes.
pub fn run_sweep_detailed(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let params = cfg.propagation();
    let band = cfg.band_profile()?;
    let region = cfg.region();

    let mut units: Vec<(usize, f64, u32)> = Vec::new();
    for &m in &cfg.m_plus_1 {
        for &pt in &cfg.pt_db {
            for trial in 0..cfg.trials {
                units.push((m, pt, trial));
            }
        }
    }

    let nested: Vec<Vec<TrialOutcome>> = units
        .par_iter()
        .map(|&(m, pt, trial)| {
            let seed = derive_seed(cfg.base_seed, m, trial);
            let opts = cfg.route_options(pt);
            let topo = NetworkTopology::generate(m, region, seed, cfg.eve_exclusion_radius_m);
            cfg.schemes
                .iter()
                .map(|&scheme| {
                    let route = topo
                        .as_ref()
                        .ok()
                        .and_then(|t| routing::route(scheme, t, &band, &params, &opts).ok());
                    match route {
                        Some(route) => {
                            let (sc, status) = match route.status {
                                RouteStatus::Delivered => {
                                    (route.end_to_end_sc, TrialStatus::Delivered)
                                }
                                RouteStatus::Void => (0.0, TrialStatus::Void),
                            };
                            TrialOutcome {
                                record: TrialRecord {
                                    scheme,
                                    m_plus_1: m,
                                    pt_db: pt,
                                    trial,
                                    seed,
                                    sc,
                                    hops: route.hops.len() - 1,
                                    status,
                                },
                                route: Some(route),
                            }
                        }
                        None => TrialOutcome {
                            record: TrialRecord {
                                scheme,
                                m_plus_1: m,
                                pt_db: pt,
                                trial,
                                seed,
                                sc: 0.0,
                                hops: 0,
                                status: TrialStatus::Error,
                            },
                            route: None,
                        },
                    }
                })
                .collect()
        })
        .collect();

    Ok(nested.into_iter().flatten().collect())
}

/// Run the full sweep, keeping only the records.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    Ok(run_sweep_detailed(cfg)?
        .into_iter()
        .map(|o| o.record)
        .collect())
}

/// Render records as CSV, header first, in record order.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scheme.label(),
            r.m_plus_1,
            r.pt_db,
            r.trial,
            r.seed,
            r.sc,
            r.hops,
            r.status.label()
        ));
    }
    out
}

/// Per-(scheme, sweep point) aggregate of a record set.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub m_plus_1: usize,
    pub pt_db: f64,
    pub trials: usize,
    pub mean_sc: f64,
    pub median_sc: f64,
    pub zero_sc_fraction: f64,
    pub void_fraction: f64,
}

/// Aggregate records by (scheme, m_plus_1, pt_db), in order of first
/// appearance. Errors on an empty input.
pub fn summarize(records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut keys: Vec<(Scheme, usize, u64)> = Vec::new();
    let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
    for r in records {
        let key = (r.scheme, r.m_plus_1, r.pt_db.to_bits());
        match keys.iter().position(|&k| k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }

    Ok(groups
        .iter()
        .map(|group| {
            let n = group.len();
            let mut scs: Vec<f64> = group.iter().map(|r| r.sc).collect();
            scs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mean = scs.iter().sum::<f64>() / n as f64;
            let median = if n % 2 == 1 {
                scs[n / 2]
            } else {
                0.5 * (scs[n / 2 - 1] + scs[n / 2])
            };
            let zero = group.iter().filter(|r| r.sc <= 0.0).count() as f64 / n as f64;
            let void = group
                .iter()
                .filter(|r| r.status == TrialStatus::Void)
                .count() as f64
                / n as f64;
            let first = group[0];
            SummaryRow {
                scheme: first.scheme,
                m_plus_1: first.m_plus_1,
                pt_db: first.pt_db,
                trials: n,
                mean_sc: mean,
                median_sc: median,
                zero_sc_fraction: zero,
                void_fraction: void,
            }
        })
        .collect())
}

/// Render summary rows as CSV.
pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "scheme,m_plus_1,pt_db,trials,mean_sc,median_sc,zero_sc_fraction,void_fraction\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scheme.label(),
            r.m_plus_1,
            r.pt_db,
            r.trials,
            r.mean_sc,
            r.median_sc,
            r.zero_sc_fraction,
            r.void_fraction
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            schemes: vec![Scheme::SecureOptimal, Scheme::DbrOptimal],
            m_plus_1: vec![6],
            pt_db: vec![110.0],
            trials: 2,
            n_subcarriers: 16,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn db_to_linear_definition() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(110.0) - 1e11).abs() / 1e11 < 1e-12);
        assert!((db_to_linear(120.0) - 1e12).abs() / 1e12 < 1e-12);
        assert!((db_to_linear(120.0) / db_to_linear(110.0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn schemes_of_one_trial_share_the_topology_seed() {
        let records = run_sweep(&tiny_config()).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records[0].seed, records[1].seed);
        assert_eq!(records[0].trial, records[1].trial);
        assert_ne!(records[0].seed, records[2].seed);
    }

    #[test]
    fn seeds_are_paired_across_budgets_but_not_node_counts() {
        assert_eq!(derive_seed(1, 10, 3), derive_seed(1, 10, 3));
        assert_ne!(derive_seed(1, 10, 3), derive_seed(1, 10, 4));
        assert_ne!(derive_seed(1, 10, 3), derive_seed(1, 12, 3));
        assert_ne!(derive_seed(1, 10, 3), derive_seed(2, 10, 3));
    }

    #[test]
    fn rerunning_a_sweep_is_byte_identical() {
        let cfg = tiny_config();
        let a = records_to_csv(&run_sweep(&cfg).unwrap());
        let b = records_to_csv(&run_sweep(&cfg).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
    }

    #[test]
    fn csv_rows_follow_the_documented_schema() {
        let records = run_sweep(&tiny_config()).unwrap();
        let csv = records_to_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        let cols: Vec<&str> = first.split(',').collect();
        assert_eq!(cols.len(), 8);
        assert_eq!(cols[0], "secure_optimal");
        assert_eq!(cols[1], "6");
        assert_eq!(cols[2], "110");
        assert_eq!(cols[3], "0");
    }

    #[test]
    fn per_seed_secrecy_is_monotone_across_budgets() {
        let cfg = ExperimentConfig {
            schemes: vec![Scheme::SecureOptimal],
            m_plus_1: vec![8],
            pt_db: vec![100.0, 120.0, 140.0],
            trials: 4,
            n_subcarriers: 32,
            ..ExperimentConfig::default()
        };
        let records = run_sweep(&cfg).unwrap();
        for trial in 0..cfg.trials {
            let mut prev = -1.0f64;
            for &pt in &cfg.pt_db {
                let r = records
                    .iter()
                    .find(|r| r.trial == trial && r.pt_db == pt)
                    .unwrap();
                assert!(
                    r.sc >= prev - 1e-9 * prev.abs().max(1.0),
                    "trial {trial}: sc fell from {prev} to {} at {pt} dB",
                    r.sc
                );
                prev = r.sc;
            }
        }
    }

    #[test]
    fn config_json_defaults_and_unknown_keys() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.n_subcarriers, 1024);
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.m_plus_1, vec![10]);
        assert_eq!(cfg.pt_db.len(), 9);

        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"trials": 3, "pt_db": [105.0]}"#).unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.pt_db, vec![105.0]);

        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"no_such_knob": 1}"#).is_err());
        assert!(
            serde_json::from_str::<ExperimentConfig>(r#"{"solver": {"bogus": 1}}"#).is_err()
        );
    }

    #[test]
    fn config_validation_rejects_degenerate_setups() {
        let mut cfg = tiny_config();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.pt_db.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.m_plus_1 = vec![1];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.f_high_khz = 120.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn summarize_basics() {
        let rec = |sc: f64, trial: u32, status: TrialStatus| TrialRecord {
            scheme: Scheme::SecureOptimal,
            m_plus_1: 10,
            pt_db: 110.0,
            trial,
            seed: 1,
            sc,
            hops: 2,
            status,
        };

        let single = summarize(&[rec(2.5, 0, TrialStatus::Delivered)]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].mean_sc, 2.5);
        assert_eq!(single[0].median_sc, 2.5);
        assert_eq!(single[0].zero_sc_fraction, 0.0);

        let zeros = summarize(&[
            rec(0.0, 0, TrialStatus::Void),
            rec(0.0, 1, TrialStatus::Delivered),
        ])
        .unwrap();
        assert_eq!(zeros[0].mean_sc, 0.0);
        assert_eq!(zeros[0].zero_sc_fraction, 1.0);
        assert_eq!(zeros[0].void_fraction, 0.5);

        let known = summarize(&[
            rec(1.0, 0, TrialStatus::Delivered),
            rec(2.0, 1, TrialStatus::Delivered),
            rec(3.0, 2, TrialStatus::Delivered),
        ])
        .unwrap();
        assert_eq!(known[0].mean_sc, 2.0);
        assert_eq!(known[0].median_sc, 2.0);

        assert!(matches!(summarize(&[]), Err(Error::NoRecords)));
    }
}
