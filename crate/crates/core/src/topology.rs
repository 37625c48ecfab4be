//! Network geometry: seeded deployment of the sensor nodes, the surface
//! sink, and the eavesdropper in a vertical plane, plus the distance and
//! candidate queries routing needs.
//!
//! Coordinates are `(x, depth)` in meters; depth grows downward from the
//! surface. Generation is a pure function of the parameters and the seed,
//! so topologies are reproducible and serializable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default communication range of a sensor node, in meters.
pub const DEFAULT_MAX_RANGE_M: f64 = 2000.0;
/// Default radius of the eavesdropper-free zone around the sink, in meters.
pub const DEFAULT_EVE_EXCLUSION_M: f64 = 500.0;
/// Distances are clamped to this floor before entering the propagation
/// model (the 1 m reference distance of the spreading term).
pub const MIN_PROPAGATION_DISTANCE_M: f64 = 1.0;

const EVE_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Sensor,
    Sink,
    Eve,
}

/// Index of a node inside its topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Horizontal position in meters.
    pub x: f64,
    /// Depth below the surface in meters (non-negative).
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Region {
    pub width_m: f64,
    pub height_m: f64,
}

impl Region {
    pub fn square(side_m: f64) -> Self {
        Self {
            width_m: side_m,
            height_m: side_m,
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.width_m.hypot(self.height_m)
    }
}

/// A generated deployment: sensor nodes `0..m_plus_1` (node 0 is the
/// source), followed by the sink and the eavesdropper.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkTopology {
    seed: u64,
    region: Region,
    eve_exclusion_radius_m: f64,
    nodes: Vec<Node>,
}

impl NetworkTopology {
    /// Deploy `m_plus_1` sensor nodes and the eavesdropper uniformly at
    /// random over the region; the sink sits on the surface at the
    /// horizontal center. The eavesdropper is resampled until it falls
    /// outside the exclusion ball around the sink.
    pub fn generate(
        m_plus_1: usize,
        region: Region,
        seed: u64,
        eve_exclusion_radius_m: f64,
    ) -> Result<Self> {
        if m_plus_1 < 2 {
            return Err(Error::TooFewNodes(m_plus_1));
        }
        if !(region.width_m > 0.0) || !(region.height_m > 0.0) {
            return Err(Error::InvalidTopology(format!(
                "region must have positive dimensions, got {} x {}",
                region.width_m, region.height_m
            )));
        }
        if !(eve_exclusion_radius_m >= 0.0) || eve_exclusion_radius_m >= region.diagonal() {
            return Err(Error::ExclusionTooLarge {
                radius: eve_exclusion_radius_m,
                width: region.width_m,
                height: region.height_m,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(m_plus_1 + 2);
        for i in 0..m_plus_1 {
            nodes.push(Node {
                id: NodeId(i),
                kind: NodeKind::Sensor,
                x: rng.gen_range(0.0..region.width_m),
                depth: rng.gen_range(0.0..region.height_m),
            });
        }

        let sink = Node {
            id: NodeId(m_plus_1),
            kind: NodeKind::Sink,
            x: region.width_m / 2.0,
            depth: 0.0,
        };

        let mut eve = None;
        for _ in 0..EVE_PLACEMENT_ATTEMPTS {
            let x = rng.gen_range(0.0..region.width_m);
            let depth = rng.gen_range(0.0..region.height_m);
            if (x - sink.x).hypot(depth - sink.depth) >= eve_exclusion_radius_m {
                eve = Some(Node {
                    id: NodeId(m_plus_1 + 1),
                    kind: NodeKind::Eve,
                    x,
                    depth,
                });
                break;
            }
        }
        let eve = eve.ok_or(Error::EvePlacementFailed(EVE_PLACEMENT_ATTEMPTS))?;

        nodes.push(sink);
        nodes.push(eve);

        Ok(Self {
            seed,
            region,
            eve_exclusion_radius_m,
            nodes,
        })
    }

    /// Build a topology from explicit nodes, validating the structural
    /// invariants (used for handcrafted scenarios and loaded files).
    pub fn from_nodes(
        nodes: Vec<Node>,
        region: Region,
        seed: u64,
        eve_exclusion_radius_m: f64,
    ) -> Result<Self> {
        let topo = Self {
            seed,
            region,
            eve_exclusion_radius_m,
            nodes,
        };
        topo.validate()?;
        Ok(topo)
    }

    /// Check the structural invariants: ids are contiguous and match the
    /// layout `sensors.., sink, eve`, positions are inside the region,
    /// depths are non-negative, the sink sits on the surface, and the
    /// eavesdropper respects the sink exclusion zone.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 4 {
            return Err(Error::TooFewNodes(n.saturating_sub(2)));
        }
        let m_plus_1 = n - 2;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.0 != i {
                return Err(Error::InvalidTopology(format!(
                    "node at position {i} has id {}",
                    node.id
                )));
            }
            let expected = if i < m_plus_1 {
                NodeKind::Sensor
            } else if i == m_plus_1 {
                NodeKind::Sink
            } else {
                NodeKind::Eve
            };
            if node.kind != expected {
                return Err(Error::InvalidTopology(format!(
                    "node {i} has kind {:?}, expected {:?}",
                    node.kind, expected
                )));
            }
            if !node.x.is_finite()
                || !node.depth.is_finite()
                || node.x < 0.0
                || node.x > self.region.width_m
                || node.depth < 0.0
                || node.depth > self.region.height_m
            {
                return Err(Error::InvalidTopology(format!(
                    "node {i} at ({}, {}) is outside the {} x {} region",
                    node.x, node.depth, self.region.width_m, self.region.height_m
                )));
            }
        }
        let sink = &self.nodes[m_plus_1];
        if sink.depth != 0.0 {
            return Err(Error::InvalidTopology(format!(
                "sink must sit on the surface, got depth {}",
                sink.depth
            )));
        }
        let eve = &self.nodes[m_plus_1 + 1];
        let d = (eve.x - sink.x).hypot(eve.depth - sink.depth);
        if d < self.eve_exclusion_radius_m {
            return Err(Error::InvalidTopology(format!(
                "eavesdropper is {d:.1} m from the sink, inside the {} m exclusion zone",
                self.eve_exclusion_radius_m
            )));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn eve_exclusion_radius_m(&self) -> f64 {
        self.eve_exclusion_radius_m
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.0).ok_or(Error::UnknownNode(id.0))
    }

    /// Number of sensor nodes (M + 1).
    pub fn sensor_count(&self) -> usize {
        self.nodes.len() - 2
    }

    /// The source node that has data to report.
    pub fn source(&self) -> NodeId {
        NodeId(0)
    }

    pub fn sink(&self) -> NodeId {
        NodeId(self.nodes.len() - 2)
    }

    pub fn eve(&self) -> NodeId {
        NodeId(self.nodes.len() - 1)
    }

    pub fn depth(&self, id: NodeId) -> Result<f64> {
        Ok(self.node(id)?.depth)
    }

    /// Euclidean distance between two nodes in the vertical plane.
    pub fn distance(&self, a: NodeId, b: NodeId) -> Result<f64> {
        let na = self.node(a)?;
        let nb = self.node(b)?;
        Ok((na.x - nb.x).hypot(na.depth - nb.depth))
    }

    /// Distance clamped to the 1 m reference, for use in the propagation
    /// model (a node is never closer than the reference distance).
    pub fn propagation_distance(&self, a: NodeId, b: NodeId) -> Result<f64> {
        Ok(self.distance(a, b)?.max(MIN_PROPAGATION_DISTANCE_M))
    }

    /// Forwarding candidates of `sender`: every non-eavesdropper node other
    /// than the sender that is within `max_range_m`, strictly shallower
    /// than the sender, and not in `visited`. Returned in id order.
    ///
    /// The strict depth decrease bounds every route at `M + 1` hops; the
    /// visited filter is redundant under that rule but kept as an
    /// invariant.
    pub fn candidates(
        &self,
        sender: NodeId,
        max_range_m: f64,
        visited: &[NodeId],
    ) -> Result<Vec<NodeId>> {
        let sender_node = self.node(sender)?;
        let own_depth = sender_node.depth;
        Ok(self
            .nodes
            .iter()
            .filter(|n| {
                n.kind != NodeKind::Eve
                    && n.id != sender
                    && !visited.contains(&n.id)
                    && n.depth < own_depth
                    && (n.x - sender_node.x).hypot(n.depth - sender_node.depth) <= max_range_m
            })
            .map(|n| n.id)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn region() -> Region {
        Region::square(5000.0)
    }

    #[test]
    fn generation_is_deterministic() {
        let a = NetworkTopology::generate(10, region(), 42, 500.0).unwrap();
        let b = NetworkTopology::generate(10, region(), 42, 500.0).unwrap();
        assert_eq!(a.nodes().len(), b.nodes().len());
        for (na, nb) in a.nodes().iter().zip(b.nodes()) {
            assert_eq!(na.x, nb.x);
            assert_eq!(na.depth, nb.depth);
            assert_eq!(na.kind, nb.kind);
        }
    }

    #[test]
    fn generated_nodes_are_inside_region_and_validate() {
        for seed in 0..20 {
            let t = NetworkTopology::generate(2, Region::square(10.0), seed, 1.0).unwrap();
            t.validate().unwrap();
            for n in t.nodes() {
                assert!(n.x >= 0.0 && n.x <= 10.0);
                assert!(n.depth >= 0.0 && n.depth <= 10.0);
            }
        }
    }

    #[test]
    fn sink_is_centered_on_surface() {
        let t = NetworkTopology::generate(5, region(), 7, 500.0).unwrap();
        let sink = t.node(t.sink()).unwrap();
        assert_eq!(sink.kind, NodeKind::Sink);
        assert_eq!(sink.depth, 0.0);
        assert_eq!(sink.x, 2500.0);
        assert_eq!(t.sensor_count(), 5);
        assert_eq!(t.source(), NodeId(0));
    }

    #[test]
    fn eve_respects_exclusion_zone() {
        for seed in 0..50 {
            let t = NetworkTopology::generate(5, region(), seed, 2000.0).unwrap();
            let d = t.distance(t.eve(), t.sink()).unwrap();
            assert!(d >= 2000.0, "seed {seed}: eve at {d} m from sink");
        }
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        assert!(matches!(
            NetworkTopology::generate(1, region(), 0, 500.0),
            Err(Error::TooFewNodes(1))
        ));
        // Radius above the diagonal fails the precondition.
        assert!(NetworkTopology::generate(5, region(), 0, 8000.0).is_err());
        // Radius below the diagonal but covering the whole region: every
        // sample is rejected and placement gives up.
        assert!(matches!(
            NetworkTopology::generate(5, region(), 0, 7000.0),
            Err(Error::EvePlacementFailed(_))
        ));
    }

    #[test]
    fn coordinate_means_match_uniform_distribution() {
        // 1e4 uniform samples per coordinate: the sample mean must fall
        // within 3 sigma = 3 * (W / sqrt(12)) / 100 of W / 2.
        let t = NetworkTopology::generate(10_000, region(), 9, 0.0).unwrap();
        let sensors = &t.nodes()[..10_000];
        let mean_x: f64 = sensors.iter().map(|n| n.x).sum::<f64>() / 10_000.0;
        let mean_d: f64 = sensors.iter().map(|n| n.depth).sum::<f64>() / 10_000.0;
        let three_sigma = 3.0 * (5000.0 / 12f64.sqrt()) / 100.0;
        assert!((mean_x - 2500.0).abs() < three_sigma, "mean x = {mean_x}");
        assert!((mean_d - 2500.0).abs() < three_sigma, "mean depth = {mean_d}");
    }

    #[test]
    fn distance_golden_triangle() {
        let nodes = vec![
            Node { id: NodeId(0), kind: NodeKind::Sensor, x: 0.0, depth: 0.0 },
            Node { id: NodeId(1), kind: NodeKind::Sensor, x: 3000.0, depth: 4000.0 },
            Node { id: NodeId(2), kind: NodeKind::Sink, x: 2500.0, depth: 0.0 },
            Node { id: NodeId(3), kind: NodeKind::Eve, x: 4000.0, depth: 4000.0 },
        ];
        let t = NetworkTopology::from_nodes(nodes, region(), 0, 500.0).unwrap();
        assert_eq!(t.distance(NodeId(0), NodeId(1)).unwrap(), 5000.0);
        assert_eq!(t.distance(NodeId(0), NodeId(0)).unwrap(), 0.0);
        assert_eq!(t.propagation_distance(NodeId(0), NodeId(0)).unwrap(), 1.0);
        assert!(t.distance(NodeId(9), NodeId(0)).is_err());
    }

    #[test]
    fn candidates_follow_depth_range_and_visited_rules() {
        let nodes = vec![
            Node { id: NodeId(0), kind: NodeKind::Sensor, x: 2500.0, depth: 3000.0 },
            Node { id: NodeId(1), kind: NodeKind::Sensor, x: 2500.0, depth: 2000.0 },
            Node { id: NodeId(2), kind: NodeKind::Sensor, x: 2500.0, depth: 3500.0 },
            Node { id: NodeId(3), kind: NodeKind::Sensor, x: 200.0, depth: 0.0 },
            Node { id: NodeId(4), kind: NodeKind::Sink, x: 2500.0, depth: 0.0 },
            Node { id: NodeId(5), kind: NodeKind::Eve, x: 2600.0, depth: 2500.0 },
        ];
        let t = NetworkTopology::from_nodes(nodes, region(), 0, 500.0).unwrap();

        // Node 1 is shallower and in range; node 2 is deeper; node 3 is out
        // of range; the eavesdropper is never a candidate.
        let c = t.candidates(NodeId(0), 2000.0, &[]).unwrap();
        assert_eq!(c, vec![NodeId(1)]);

        // The sink is 3000 m up: within a 3500 m range it qualifies.
        let c = t.candidates(NodeId(0), 3500.0, &[]).unwrap();
        assert_eq!(c, vec![NodeId(1), NodeId(4)]);

        // Visited nodes are excluded.
        let c = t.candidates(NodeId(0), 3500.0, &[NodeId(1)]).unwrap();
        assert_eq!(c, vec![NodeId(4)]);

        // Zero range admits nobody.
        assert!(t.candidates(NodeId(0), 0.0, &[]).unwrap().is_empty());

        // A surface sender has no strictly shallower neighbor.
        assert!(t.candidates(NodeId(3), 10_000.0, &[]).unwrap().is_empty());
        assert!(t.candidates(t.sink(), 10_000.0, &[]).unwrap().is_empty());
    }

    #[test]
    fn topology_json_round_trip() {
        let t = NetworkTopology::generate(6, region(), 11, 500.0).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: NetworkTopology = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back.seed(), 11);
        assert_eq!(back.nodes().len(), t.nodes().len());
        for (a, b) in t.nodes().iter().zip(back.nodes()) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.depth, b.depth);
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(seed in 0u64..500, i in 0usize..7, j in 0usize..7) {
            let t = NetworkTopology::generate(5, Region::square(5000.0), seed, 500.0).unwrap();
            let a = NodeId(i);
            let b = NodeId(j);
            let dab = t.distance(a, b).unwrap();
            let dba = t.distance(b, a).unwrap();
            prop_assert_eq!(dab, dba);
        }

        #[test]
        fn candidate_sets_exclude_eve_and_decrease_depth(
            seed in 0u64..500,
            sender in 0usize..8,
            range in 100.0f64..7000.0,
        ) {
            let t = NetworkTopology::generate(8, Region::square(5000.0), seed, 500.0).unwrap();
            let sender = NodeId(sender);
            let own_depth = t.depth(sender).unwrap();
            for c in t.candidates(sender, range, &[]).unwrap() {
                prop_assert!(c != t.eve());
                prop_assert!(t.depth(c).unwrap() < own_depth);
                prop_assert!(t.distance(sender, c).unwrap() <= range);
            }
        }
    }
}
