//! Exploration: each agent walks the house under a policy and accumulates
//! an observation dictionary, its only evidence for later answering.
//!
//! Agents are independent; they differ by start node, seed, and policy, and
//! that difference is exactly what makes their answers disagree downstream.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{HouseGraph, NodeId, ObjectId, RoomId};
use crate::error::{Error, Result};
use crate::llm::{ChatClient, ChatMessage};
use crate::percept::{detect_at_node, NoiseParams};
use crate::prompts;
use crate::rng;

/// One agent's accumulated memory: room -> items seen there, plus the walk
/// that produced it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationDict {
    pub room_items: BTreeMap<RoomId, BTreeSet<ObjectId>>,
    pub trajectory: Vec<(usize, NodeId)>,
}

impl ObservationDict {
    /// Oracle memory: the exact ground-truth contents of `rooms`.
    pub fn oracle(house: &HouseGraph, rooms: &[RoomId]) -> Result<Self> {
        let mut room_items = BTreeMap::new();
        for &r in rooms {
            house.room_info(r)?;
            room_items.insert(r, house.placements.get(&r).cloned().unwrap_or_default());
        }
        Ok(ObservationDict {
            room_items,
            trajectory: Vec::new(),
        })
    }

    pub fn merge_detections(&mut self, detections: BTreeSet<(RoomId, ObjectId)>) {
        for (room, object) in detections {
            self.room_items.entry(room).or_default().insert(object);
        }
    }

    pub fn has(&self, room: RoomId, object: ObjectId) -> bool {
        self.room_items
            .get(&room)
            .map(|s| s.contains(&object))
            .unwrap_or(false)
    }

    /// Renders `{"room": ["item", ...], ...}` with rooms and items sorted by
    /// name — the dictionary form quoted in prompts and files.
    pub fn to_dict_string(&self, house: &HouseGraph) -> Result<String> {
        let mut map: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (&room, objects) in &self.room_items {
            let mut names: Vec<&str> = objects
                .iter()
                .map(|&o| house.object_name(o))
                .collect::<Result<_>>()?;
            names.sort_unstable();
            map.insert(house.room_name(room)?, names);
        }
        Ok(serde_json::to_string(&map)?)
    }
}

/// How an agent chooses its next node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Uniform neighbor choice.
    RandomWalk { seed: u64 },
    /// Moves toward the neighbor whose room holds the most unvisited nodes;
    /// unvisited neighbors break secondary ties, then lowest node id.
    GreedyNovelty,
    /// Asks the chat backend to pick the next room from neighbor room names;
    /// falls back to greedy novelty after one failed reprompt.
    LlmGuided,
    /// Replays a fixed node list (must start at `start` and stay graph-valid).
    Scripted { nodes: Vec<NodeId> },
}

fn greedy_next(house: &HouseGraph, current: NodeId, visited: &BTreeSet<NodeId>) -> NodeId {
    let neighbors = &house.edges[current];
    if neighbors.is_empty() {
        return current;
    }
    let mut best: Option<(usize, usize, std::cmp::Reverse<NodeId>)> = None;
    let mut best_node = current;
    for &nbr in neighbors {
        let room = house.node_room[nbr];
        let unvisited_in_room = house
            .nodes_in_room(room)
            .into_iter()
            .filter(|n| !visited.contains(n))
            .count();
        let bonus = usize::from(!visited.contains(&nbr));
        let key = (unvisited_in_room, bonus, std::cmp::Reverse(nbr));
        if best.map(|b| key > b).unwrap_or(true) {
            best = Some(key);
            best_node = nbr;
        }
    }
    best_node
}

fn llm_next(
    house: &HouseGraph,
    current: NodeId,
    visited: &BTreeSet<NodeId>,
    client: &dyn ChatClient,
) -> Result<NodeId> {
    let neighbors = &house.edges[current];
    if neighbors.is_empty() {
        return Ok(current);
    }
    let mut rooms: Vec<RoomId> = neighbors.iter().map(|&n| house.node_room[n]).collect();
    rooms.sort_unstable();
    rooms.dedup();
    let names: Vec<&str> = rooms
        .iter()
        .map(|&r| house.room_name(r))
        .collect::<Result<_>>()?;
    let here = house.room_name(house.node_room[current])?;

    let mut messages = vec![
        ChatMessage::system(prompts::EXPLORE_SYSTEM),
        ChatMessage::user(prompts::explore_choose(here, &names)),
    ];
    for attempt in 0..2 {
        let reply = client.chat(&messages)?;
        let lowered = reply.to_lowercase();
        let chosen: Vec<RoomId> = rooms
            .iter()
            .zip(&names)
            .filter(|(_, name)| lowered.contains(&name.to_lowercase()))
            .map(|(&r, _)| r)
            .collect();
        if chosen.len() == 1 {
            // Lowest-id node of the chosen room among the neighbors.
            let target = chosen[0];
            return Ok(*neighbors
                .iter()
                .find(|&&n| house.node_room[n] == target)
                .expect("room came from the neighbor set"));
        }
        if attempt == 0 {
            messages.push(ChatMessage::assistant(reply));
            messages.push(ChatMessage::user(prompts::explore_reprompt(&names)));
        }
    }
    Ok(greedy_next(house, current, visited))
}

/// Walks `steps` moves from `start`, detecting at every visited node
/// (including the start) and merging into the observation dictionary.
///
/// `client` is only consulted for [`Policy::LlmGuided`].
pub fn explore_run(
    house: &HouseGraph,
    start: NodeId,
    policy: &Policy,
    steps: usize,
    noise: &NoiseParams,
    client: Option<&dyn ChatClient>,
) -> Result<ObservationDict> {
    if start >= house.num_nodes() {
        return Err(Error::UnknownId {
            kind: "node",
            id: start.to_string(),
        });
    }
    if let Policy::Scripted { nodes } = policy {
        if nodes.first() != Some(&start) {
            return Err(Error::InvalidConfig(format!(
                "scripted trajectory must begin at start node {start}"
            )));
        }
        if nodes.len() != steps + 1 {
            return Err(Error::InvalidConfig(format!(
                "scripted trajectory has {} nodes for {steps} steps",
                nodes.len()
            )));
        }
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b >= house.num_nodes() || (a != b && !house.edges[a].contains(&b)) {
                return Err(Error::InvalidConfig(format!(
                    "scripted move {a} -> {b} is not graph-valid"
                )));
            }
        }
    }

    let mut walk_rng = match policy {
        Policy::RandomWalk { seed } => Some(rng::stream(*seed, &[0x7761_6c6b])),
        _ => None,
    };

    let mut obs = ObservationDict::default();
    let mut visited: BTreeSet<NodeId> = BTreeSet::new();
    let mut current = start;
    for step in 0..=steps {
        visited.insert(current);
        obs.trajectory.push((step, current));
        obs.merge_detections(detect_at_node(house, current, noise, step)?);
        if step == steps {
            break;
        }
        current = match policy {
            Policy::RandomWalk { .. } => {
                let neighbors = &house.edges[current];
                if neighbors.is_empty() {
                    current
                } else {
                    neighbors[walk_rng.as_mut().unwrap().gen_range(0..neighbors.len())]
                }
            }
            Policy::GreedyNovelty => greedy_next(house, current, &visited),
            Policy::LlmGuided => {
                let client = client.ok_or_else(|| {
                    Error::InvalidConfig("llm_guided policy requires a chat client".into())
                })?;
                llm_next(house, current, &visited, client)?
            }
            Policy::Scripted { nodes } => nodes[step + 1],
        };
    }
    Ok(obs)
}

// ---------------------------------------------------------------------------
// Observation files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ObservationFile {
    observations: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    trajectory: Vec<(usize, NodeId)>,
}

pub fn observation_to_json(obs: &ObservationDict, house: &HouseGraph) -> Result<String> {
    let mut observations = BTreeMap::new();
    for (&room, objects) in &obs.room_items {
        let mut names: Vec<String> = objects
            .iter()
            .map(|&o| house.object_name(o).map(str::to_string))
            .collect::<Result<_>>()?;
        names.sort_unstable();
        observations.insert(house.room_name(room)?.to_string(), names);
    }
    Ok(serde_json::to_string_pretty(&ObservationFile {
        observations,
        trajectory: obs.trajectory.clone(),
    })?)
}

/// Parses an observation file. Accepts either the full schema (observations
/// plus trajectory) or a bare `{room: [items]}` dictionary, so externally
/// collected observation dumps can be fed straight in.
pub fn observation_from_json(text: &str, house: &HouseGraph) -> Result<ObservationDict> {
    let file: ObservationFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(_) => ObservationFile {
            observations: serde_json::from_str(text)?,
            trajectory: Vec::new(),
        },
    };
    let mut room_items = BTreeMap::new();
    for (room_name, items) in file.observations {
        let room = house.room_id(&room_name)?;
        let objects = items
            .iter()
            .map(|name| house.object_id(name))
            .collect::<Result<BTreeSet<_>>>()?;
        room_items.insert(room, objects);
    }
    Ok(ObservationDict {
        room_items,
        trajectory: file.trajectory,
    })
}

pub fn save_observation(
    obs: &ObservationDict,
    house: &HouseGraph,
    path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(path, observation_to_json(obs, house)?)?;
    Ok(())
}

pub fn load_observation(path: impl AsRef<Path>, house: &HouseGraph) -> Result<ObservationDict> {
    observation_from_json(&std::fs::read_to_string(path)?, house)
}
