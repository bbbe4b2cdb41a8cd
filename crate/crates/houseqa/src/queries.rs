//! Balanced binary query datasets with ground truth.
//!
//! Every ground-truth placement (object o in room r) yields a "Yes" query,
//! paired with a "No" query asking about the same object in a room that does
//! not contain it. The set is exactly balanced by construction.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{containing_rooms, HouseGraph, ObjectId, RoomId};
use crate::error::{Error, Result};
use crate::rng;

/// "Is there an `object` in the `room`?" with its ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub object: ObjectId,
    pub room: RoomId,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    pub queries: Vec<Query>,
    pub split: Option<Split>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.queries.iter().map(|q| q.label).collect()
    }

    pub fn split(&self) -> Result<&Split> {
        self.split
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("query set has no train/test split".into()))
    }
}

/// Emits one positive query per ground-truth placement and one paired
/// negative with a seeded non-containing room. Negative rooms are redrawn on
/// duplicate (object, room) collisions; if a unique negative cannot be found
/// the whole pair is dropped (with a warning on stderr) so the set stays
/// balanced.
///
/// Errors if any placed object occupies every room (no negative exists).
pub fn generate_queries(house: &HouseGraph, seed: u64) -> Result<QuerySet> {
    if house.rooms.len() < 2 {
        return Err(Error::InvalidConfig(
            "query generation needs at least 2 rooms".into(),
        ));
    }
    let total_placements: usize = house.placements.values().map(|s| s.len()).sum();
    if total_placements == 0 {
        return Err(Error::InvalidConfig(
            "query generation needs at least one placement".into(),
        ));
    }

    let all_rooms: Vec<RoomId> = house.room_ids().collect();
    let everywhere: Vec<String> = house
        .object_ids()
        .filter(|&o| {
            let rooms = containing_rooms(house, o).expect("catalog object");
            !rooms.is_empty() && rooms.len() == all_rooms.len()
        })
        .map(|o| house.object_name(o).unwrap_or_default().to_string())
        .collect();
    if !everywhere.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no negative room exists for objects present in every room: {}",
            everywhere.join(", ")
        )));
    }

    let mut draws = rng::stream(seed, &[0x7175_6572]);
    let mut queries = Vec::new();
    let mut used_negatives: BTreeSet<(ObjectId, RoomId)> = BTreeSet::new();
    // Room-major, object-minor order fixes the draw sequence.
    for &room in &all_rooms {
        let Some(objects) = house.placements.get(&room) else {
            continue;
        };
        for &object in objects {
            let holders = containing_rooms(house, object)?;
            let candidates: Vec<RoomId> = all_rooms
                .iter()
                .copied()
                .filter(|r| !holders.contains(r))
                .collect();
            let mut negative = None;
            for _ in 0..all_rooms.len() {
                let pick = candidates[draws.gen_range(0..candidates.len())];
                if used_negatives.insert((object, pick)) {
                    negative = Some(pick);
                    break;
                }
            }
            match negative {
                Some(neg) => {
                    queries.push(Query {
                        object,
                        room,
                        label: 1,
                    });
                    queries.push(Query {
                        object,
                        room: neg,
                        label: 0,
                    });
                }
                None => {
                    eprintln!(
                        "warning: dropping query pair for object {:?} in room {:?}: no unused negative room",
                        house.object_name(object).unwrap_or("?"),
                        house.room_name(room).unwrap_or("?"),
                    );
                }
            }
        }
    }
    Ok(QuerySet {
        queries,
        split: None,
    })
}

/// Seeded uniform shuffle; test size = round(fraction * N) clamped to
/// [1, N-1] so both sides stay nonempty.
pub fn train_test_split(mut qs: QuerySet, test_fraction: f64, seed: u64) -> Result<QuerySet> {
    if qs.is_empty() {
        return Err(Error::EmptyInput("query set"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction {test_fraction} out of (0,1)"
        )));
    }
    let n = qs.len();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "need at least 2 queries to split".into(),
        ));
    }
    let test_size = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut draws = rng::stream(seed, &[0x7370_6c69]);
    // Fisher-Yates.
    for i in (1..n).rev() {
        let j = draws.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut test_indices: Vec<usize> = order[..test_size].to_vec();
    let mut train_indices: Vec<usize> = order[test_size..].to_vec();
    test_indices.sort_unstable();
    train_indices.sort_unstable();
    qs.split = Some(Split {
        seed,
        train_indices,
        test_indices,
    });
    Ok(qs)
}

// ---------------------------------------------------------------------------
// Files: JSON Lines dataset plus a split sidecar
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct QueryRow {
    object: String,
    room: String,
    label: u8,
}

#[derive(Serialize, Deserialize)]
struct SplitSidecar {
    seed: u64,
    test_indices: Vec<usize>,
}

pub fn queries_to_jsonl(qs: &QuerySet, house: &HouseGraph) -> Result<String> {
    let mut out = String::new();
    for q in &qs.queries {
        let row = QueryRow {
            object: house.object_name(q.object)?.to_string(),
            room: house.room_name(q.room)?.to_string(),
            label: q.label,
        };
        out.push_str(&serde_json::to_string(&row)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn queries_from_jsonl(text: &str, house: &HouseGraph) -> Result<QuerySet> {
    let mut queries = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row: QueryRow = serde_json::from_str(line)?;
        if row.label > 1 {
            return Err(Error::Validation(format!(
                "label {} is not binary",
                row.label
            )));
        }
        queries.push(Query {
            object: house.object_id(&row.object)?,
            room: house.room_id(&row.room)?,
            label: row.label,
        });
    }
    Ok(QuerySet {
        queries,
        split: None,
    })
}

pub fn save_queries(qs: &QuerySet, house: &HouseGraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(&path, queries_to_jsonl(qs, house)?)?;
    if let Some(split) = &qs.split {
        let sidecar = SplitSidecar {
            seed: split.seed,
            test_indices: split.test_indices.clone(),
        };
        let sidecar_path = path.as_ref().with_extension("split.json");
        std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
    }
    Ok(())
}

pub fn load_queries(path: impl AsRef<Path>, house: &HouseGraph) -> Result<QuerySet> {
    let mut qs = queries_from_jsonl(&std::fs::read_to_string(&path)?, house)?;
    let sidecar_path = path.as_ref().with_extension("split.json");
    if sidecar_path.exists() {
        let sidecar: SplitSidecar =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        let test: BTreeSet<usize> = sidecar.test_indices.iter().copied().collect();
        if test.iter().any(|&i| i >= qs.len()) {
            return Err(Error::Validation("split index out of range".into()));
        }
        qs.split = Some(Split {
            seed: sidecar.seed,
            train_indices: (0..qs.len()).filter(|i| !test.contains(i)).collect(),
            test_indices: sidecar.test_indices,
        });
    }
    Ok(qs)
}
