//! Parametric noisy object detection at a node.
//!
//! Stands in for a vision detector: each truly-placed object in the node's
//! room is seen with probability `p_detect`, and every other catalog object
//! is hallucinated there with probability `p_false` (the "a TV in the
//! hallway" class of errors). Detections are keyed by `(seed, node, step)`
//! so exploration order never perturbs unrelated detections.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{HouseGraph, NodeId, ObjectId, RoomId};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseParams {
    /// True-positive probability per placed object.
    pub p_detect: f64,
    /// False-positive probability per absent catalog object.
    pub p_false: f64,
    pub seed: u64,
}

impl NoiseParams {
    /// Perfect sensor: sees exactly the room's placements.
    pub fn noiseless() -> Self {
        NoiseParams {
            p_detect: 1.0,
            p_false: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_detect", self.p_detect), ("p_false", self.p_false)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} out of [0,1]")));
            }
        }
        Ok(())
    }
}

/// One noisy look around `node` at timestep `step`.
///
/// Every detection is tagged with the node's (true) room; errors show up as
/// wrong objects, not wrong rooms. Deterministic given `(seed, node, step)`.
pub fn detect_at_node(
    house: &HouseGraph,
    node: NodeId,
    params: &NoiseParams,
    step: usize,
) -> Result<BTreeSet<(RoomId, ObjectId)>> {
    params.validate()?;
    let room = house.room_of(node)?;
    let placed = house.placements.get(&room).cloned().unwrap_or_default();

    let mut draws = rng::stream(params.seed, &[0x6465_7465, node as u64, step as u64]);
    let mut out = BTreeSet::new();
    // Catalog order fixes the draw sequence.
    for object in house.object_ids() {
        let p = if placed.contains(&object) {
            params.p_detect
        } else {
            params.p_false
        };
        if p > 0.0 && draws.gen_bool(p) {
            out.insert((room, object));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_house, GenConfig, PriorTable};

    fn house() -> HouseGraph {
        let mut prior = PriorTable::uniform(0.0);
        prior.set("kitchen", "mug", 1.0);
        prior.set("kitchen", "sink", 1.0);
        prior.set("office", "desk", 1.0);
        generate_house(&GenConfig {
            num_rooms: 2,
            nodes_per_room: (1, 1),
            room_type_mix: vec!["kitchen".into(), "office".into()],
            prior_table: prior,
            extra_objects: vec![],
            seed: 5,
        })
        .unwrap()
    }

    #[test]
    fn noiseless_sensor_sees_exact_contents() {
        let h = house();
        let kitchen = h.room_id("kitchen").unwrap();
        let node = h.nodes_in_room(kitchen)[0];
        let got = detect_at_node(&h, node, &NoiseParams::noiseless(), 0).unwrap();
        let want: BTreeSet<_> = [
            (kitchen, h.object_id("mug").unwrap()),
            (kitchen, h.object_id("sink").unwrap()),
        ]
        .into();
        assert_eq!(got, want);
    }

    #[test]
    fn blind_sensor_sees_nothing() {
        let h = house();
        let params = NoiseParams {
            p_detect: 0.0,
            p_false: 0.0,
            seed: 1,
        };
        assert!(detect_at_node(&h, 0, &params, 0).unwrap().is_empty());
    }

    #[test]
    fn true_positive_rate_matches_binomial_oracle() {
        // Monte-Carlo oracle: TP indicator per (placed object, step) is
        // Bernoulli(p_detect); 10_000 seeded calls bound the empirical rate.
        let h = house();
        let kitchen = h.room_id("kitchen").unwrap();
        let node = h.nodes_in_room(kitchen)[0];
        let params = NoiseParams {
            p_detect: 0.8,
            p_false: 0.01,
            seed: 42,
        };
        let calls = 10_000usize;
        let placed = h.placements[&kitchen].len();
        let mut hits = 0usize;
        for step in 0..calls {
            let got = detect_at_node(&h, node, &params, step).unwrap();
            hits += h.placements[&kitchen]
                .iter()
                .filter(|&&o| got.contains(&(kitchen, o)))
                .count();
        }
        let n = (calls * placed) as f64;
        let mean = 0.8 * n;
        let sigma = (n * 0.8 * 0.2).sqrt();
        assert!(
            (hits as f64 - mean).abs() <= 3.0 * sigma,
            "hits {hits} outside {mean} +- 3*{sigma}"
        );
    }

    #[test]
    fn output_is_subset_of_room_cross_catalog() {
        let h = house();
        let params = NoiseParams {
            p_detect: 0.5,
            p_false: 0.3,
            seed: 9,
        };
        for node in 0..h.num_nodes() {
            let room = h.room_of(node).unwrap();
            for step in 0..20 {
                let got = detect_at_node(&h, node, &params, step).unwrap();
                for (r, o) in got {
                    assert_eq!(r, room);
                    assert!(h.object_name(o).is_ok());
                }
            }
        }
    }

    #[test]
    fn no_false_positive_means_subset_of_placements() {
        let h = house();
        let params = NoiseParams {
            p_detect: 0.6,
            p_false: 0.0,
            seed: 13,
        };
        for step in 0..50 {
            let got = detect_at_node(&h, 0, &params, step).unwrap();
            let room = h.room_of(0).unwrap();
            for (_, o) in got {
                assert!(h.placements[&room].contains(&o));
            }
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let h = house();
        let params = NoiseParams {
            p_detect: 0.7,
            p_false: 0.05,
            seed: 77,
        };
        for step in [0usize, 3, 9] {
            let a = detect_at_node(&h, 1, &params, step).unwrap();
            let b = detect_at_node(&h, 1, &params, step).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unknown_node_is_an_error() {
        let h = house();
        assert!(detect_at_node(&h, 999, &NoiseParams::noiseless(), 0).is_err());
    }
}
