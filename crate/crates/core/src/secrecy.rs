//! Per-subcarrier SNR, link noise profiles, and secrecy capacity.
//!
//! For a transmission from `tx` heard by receiver `rx` and by the
//! eavesdropper, the net noise power on subcarrier `j` is
//!
//! `Omega_j = (int_{B_j} 10^(PL(d, f)/10) df) * (int_{B_j} 10^(N(f)/10) df)`
//!
//! with `d` the tx-to-listener distance. The per-subcarrier SNR is
//! `p_j / Omega_j`, and the hop secrecy capacity is
//!
//! `SC = ( sum_j log2(1 + p_j / Omega_j^rx) - log2(1 + p_j / Omega_j^eve) )^+`
//!
//! where the positive part applies to the whole sum. Everything here is on
//! the linear scale.

use crate::acoustics::{BandProfile, PropagationParams};
use crate::error::{Error, Result};
use crate::topology::{NetworkTopology, NodeId, NodeKind};

use std::f64::consts::LN_2;

/// Net noise powers seen by the receiver and by the eavesdropper for one
/// tx -> rx link, one entry per subcarrier.
#[derive(Debug, Clone)]
pub struct LinkNoiseProfile {
    tx: NodeId,
    rx: NodeId,
    omega_rx: Vec<f64>,
    omega_eve: Vec<f64>,
}

impl LinkNoiseProfile {
    /// Build a profile from precomputed noise vectors. Both vectors must
    /// have the same length and strictly positive, finite entries.
    pub fn new(tx: NodeId, rx: NodeId, omega_rx: Vec<f64>, omega_eve: Vec<f64>) -> Result<Self> {
        if omega_rx.len() != omega_eve.len() || omega_rx.is_empty() {
            return Err(Error::LengthMismatch {
                expected: omega_rx.len().max(1),
                got: omega_eve.len(),
            });
        }
        let ok = |v: &[f64]| v.iter().all(|&w| w.is_finite() && w > 0.0);
        if !ok(&omega_rx) || !ok(&omega_eve) {
            return Err(Error::InvalidNoiseProfile);
        }
        Ok(Self {
            tx,
            rx,
            omega_rx,
            omega_eve,
        })
    }

    /// Compute the profile for a link of the given topology: the receiver
    /// side uses the tx -> rx distance, the eavesdropper side the tx -> eve
    /// distance, both clamped to the 1 m reference.
    pub fn compute(
        tx: NodeId,
        rx: NodeId,
        topo: &NetworkTopology,
        band: &BandProfile,
        params: &PropagationParams,
    ) -> Result<Self> {
        if tx == rx {
            return Err(Error::InvalidTopology(format!(
                "link endpoints must differ, got {tx} -> {rx}"
            )));
        }
        if topo.node(rx)?.kind == NodeKind::Eve {
            return Err(Error::InvalidTopology(
                "the eavesdropper cannot be a link receiver".into(),
            ));
        }
        let eve_pl = band.pathloss_integrals(topo.propagation_distance(tx, topo.eve())?, params)?;
        Self::compute_with_eve_integrals(tx, rx, topo, band, params, &eve_pl)
    }

    /// Like [`LinkNoiseProfile::compute`], but reusing the eavesdropper's
    /// path-loss integrals, which depend on the sender only and are shared
    /// by every candidate receiver of one hop.
    pub fn compute_with_eve_integrals(
        tx: NodeId,
        rx: NodeId,
        topo: &NetworkTopology,
        band: &BandProfile,
        params: &PropagationParams,
        eve_pathloss: &[f64],
    ) -> Result<Self> {
        let n = band.n_subcarriers();
        if eve_pathloss.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: eve_pathloss.len(),
            });
        }
        let rx_pl = band.pathloss_integrals(topo.propagation_distance(tx, rx)?, params)?;
        let noise = band.noise_integrals();
        let omega_rx = rx_pl.iter().zip(noise).map(|(pl, ni)| pl * ni).collect();
        let omega_eve = eve_pathloss
            .iter()
            .zip(noise)
            .map(|(pl, ni)| pl * ni)
            .collect();
        Self::new(tx, rx, omega_rx, omega_eve)
    }

    pub fn tx(&self) -> NodeId {
        self.tx
    }

    pub fn rx(&self) -> NodeId {
        self.rx
    }

    /// Number of subcarriers.
    pub fn len(&self) -> usize {
        self.omega_rx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_rx.is_empty()
    }

    pub fn omega_rx(&self) -> &[f64] {
        &self.omega_rx
    }

    pub fn omega_eve(&self) -> &[f64] {
        &self.omega_eve
    }

    /// True when the eavesdropper's channel is at least as good as the
    /// receiver's on every subcarrier; no power vector then earns positive
    /// secrecy on this link.
    pub fn zero_secrecy(&self) -> bool {
        self.omega_rx
            .iter()
            .zip(&self.omega_eve)
            .all(|(rx, eve)| rx >= eve)
    }
}

/// Per-subcarrier SNR `p / omega`.
pub fn snr(power: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::NonPositiveNoise(omega));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::InvalidPower(power));
    }
    Ok(power / omega)
}

/// Secrecy rate of one subcarrier at power `p`:
/// `log2(1 + p/omega_rx) - log2(1 + p/omega_eve)`, evaluated in the
/// quotient form `log2((a + p*omega_eve) / (a + p*omega_rx))` with
/// `a = omega_rx * omega_eve`, which stays accurate when the two channel
/// gains are nearly equal.
pub fn subcarrier_secrecy_rate(p: f64, omega_rx: f64, omega_eve: f64) -> f64 {
    let a = omega_rx * omega_eve;
    ((p * (omega_eve - omega_rx)) / (a + p * omega_rx)).ln_1p() / LN_2
}

/// Hop secrecy capacity for a power vector: the per-subcarrier rates are
/// summed and the positive part is applied to the sum.
pub fn secrecy_capacity(profile: &LinkNoiseProfile, powers: &[f64]) -> Result<f64> {
    if powers.len() != profile.len() {
        return Err(Error::LengthMismatch {
            expected: profile.len(),
            got: powers.len(),
        });
    }
    if let Some(&bad) = powers.iter().find(|&&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidPower(bad));
    }
    let sum: f64 = powers
        .iter()
        .zip(profile.omega_rx())
        .zip(profile.omega_eve())
        .map(|((&p, &orx), &oeve)| subcarrier_secrecy_rate(p, orx, oeve))
        .sum();
    Ok(sum.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Node, Region};
    use proptest::prelude::*;

    fn params() -> PropagationParams {
        PropagationParams::default()
    }

    /// Sender, a receiver at 500 m, the eavesdropper mirrored on the other
    /// side at the same 500 m, and a second receiver farther out.
    fn symmetric_topology() -> NetworkTopology {
        let nodes = vec![
            Node { id: NodeId(0), kind: NodeKind::Sensor, x: 1000.0, depth: 1000.0 },
            Node { id: NodeId(1), kind: NodeKind::Sensor, x: 1500.0, depth: 1000.0 },
            Node { id: NodeId(2), kind: NodeKind::Sensor, x: 1000.0, depth: 300.0 },
            Node { id: NodeId(3), kind: NodeKind::Sink, x: 2500.0, depth: 0.0 },
            Node { id: NodeId(4), kind: NodeKind::Eve, x: 500.0, depth: 1000.0 },
        ];
        NetworkTopology::from_nodes(nodes, Region::square(5000.0), 0, 100.0).unwrap()
    }

    #[test]
    fn equal_distances_give_equal_profiles() {
        let topo = symmetric_topology();
        let band = BandProfile::new(8, 9.0, 15.0, &params(), 4).unwrap();
        let p = LinkNoiseProfile::compute(NodeId(0), NodeId(1), &topo, &band, &params()).unwrap();
        assert_eq!(p.len(), 8);
        for j in 0..8 {
            assert_eq!(p.omega_rx()[j], p.omega_eve()[j]);
        }
        assert!(p.zero_secrecy());
    }

    #[test]
    fn closer_receiver_sees_less_noise_elementwise() {
        let topo = symmetric_topology();
        let band = BandProfile::new(16, 9.0, 15.0, &params(), 4).unwrap();
        // Receiver 2 is 700 m away, the eavesdropper 500 m: rx noise is
        // strictly larger on every subcarrier.
        let p = LinkNoiseProfile::compute(NodeId(0), NodeId(2), &topo, &band, &params()).unwrap();
        for j in 0..16 {
            assert!(p.omega_rx()[j] > p.omega_eve()[j]);
        }
        // And the reverse once the eavesdropper is the farther listener:
        // compare against a single-band profile of the sink link.
        let band1 = BandProfile::new(1, 9.0, 15.0, &params(), 4).unwrap();
        let p = LinkNoiseProfile::compute(NodeId(0), NodeId(1), &topo, &band1, &params()).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn profile_rejects_eve_receiver_and_self_links() {
        let topo = symmetric_topology();
        let band = BandProfile::new(4, 9.0, 15.0, &params(), 4).unwrap();
        assert!(LinkNoiseProfile::compute(NodeId(0), NodeId(4), &topo, &band, &params()).is_err());
        assert!(LinkNoiseProfile::compute(NodeId(0), NodeId(0), &topo, &band, &params()).is_err());
    }

    #[test]
    fn snr_basics() {
        assert_eq!(snr(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(snr(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(snr(10.0, 2.0).unwrap(), 5.0);
        assert!(snr(1.0, 0.0).is_err());
        assert!(snr(1.0, -2.0).is_err());
        assert!(snr(-1.0, 2.0).is_err());
    }

    #[test]
    fn secrecy_capacity_golden_single_subcarrier() {
        let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![1.0], vec![2.0]).unwrap();
        // log2(1 + 2/1) - log2(1 + 2/2) = log2(3) - 1
        let sc = secrecy_capacity(&p, &[2.0]).unwrap();
        assert!((sc - 0.584962500721156).abs() < 1e-12);
    }

    #[test]
    fn secrecy_capacity_zero_cases() {
        let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(secrecy_capacity(&p, &[5.0, 7.0]).unwrap(), 0.0);
        let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![1.0, 2.0], vec![3.0, 5.0]).unwrap();
        assert_eq!(secrecy_capacity(&p, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn secrecy_capacity_contract_errors() {
        let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![1.0, 2.0], vec![3.0, 5.0]).unwrap();
        assert!(secrecy_capacity(&p, &[1.0]).is_err());
        assert!(secrecy_capacity(&p, &[1.0, -0.5]).is_err());
        assert!(LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(LinkNoiseProfile::new(NodeId(0), NodeId(1), vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn secrecy_capacity_is_non_negative(
            seed in 0u64..1000,
            n in 1usize..12,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let orx: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
            let oeve: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
            let powers: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..20.0)).collect();
            let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), orx, oeve).unwrap();
            prop_assert!(secrecy_capacity(&p, &powers).unwrap() >= 0.0);
        }

        #[test]
        fn dominated_eavesdropper_bounds_and_monotonicity(
            seed in 0u64..1000,
            n in 1usize..8,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let orx: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
            let oeve: Vec<f64> = orx.iter().map(|&o| o * rng.gen_range(1.2..6.0)).collect();
            let sat: f64 = orx.iter().zip(&oeve).map(|(&r, &e)| (e / r).log2()).sum();
            let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), orx, oeve).unwrap();

            let base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
            let sc0 = secrecy_capacity(&p, &base).unwrap();
            // Strictly increasing in each coordinate, bounded by the
            // saturation sum.
            for j in 0..n {
                let mut bumped = base.clone();
                bumped[j] += 1.0;
                let sc1 = secrecy_capacity(&p, &bumped).unwrap();
                prop_assert!(sc1 > sc0);
                prop_assert!(sc1 < sat + 1e-12);
            }
            // Large powers approach but never exceed the saturation sum.
            let huge: Vec<f64> = vec![1e12; n];
            let sc_huge = secrecy_capacity(&p, &huge).unwrap();
            prop_assert!(sc_huge <= sat + 1e-9 && sc_huge > 0.9 * sat);
        }

        #[test]
        fn dominated_receiver_earns_nothing(
            seed in 0u64..1000,
            n in 1usize..8,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let oeve: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
            let orx: Vec<f64> = oeve.iter().map(|&o| o * rng.gen_range(1.0..4.0)).collect();
            let powers: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..50.0)).collect();
            let p = LinkNoiseProfile::new(NodeId(0), NodeId(1), orx, oeve).unwrap();
            prop_assert_eq!(secrecy_capacity(&p, &powers).unwrap(), 0.0);
        }

        #[test]
        fn common_scaling_leaves_capacity_unchanged(
            seed in 0u64..1000,
            n in 1usize..8,
            scale in 0.01f64..100.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let orx: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
            let oeve: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
            let powers: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();

            let p1 = LinkNoiseProfile::new(NodeId(0), NodeId(1), orx.clone(), oeve.clone()).unwrap();
            let sc1 = secrecy_capacity(&p1, &powers).unwrap();

            let p2 = LinkNoiseProfile::new(
                NodeId(0),
                NodeId(1),
                orx.iter().map(|o| o * scale).collect(),
                oeve.iter().map(|o| o * scale).collect(),
            ).unwrap();
            let scaled: Vec<f64> = powers.iter().map(|p| p * scale).collect();
            let sc2 = secrecy_capacity(&p2, &scaled).unwrap();
            prop_assert!((sc1 - sc2).abs() <= 1e-9 * sc1.abs().max(1.0));
        }
    }
}
