//! Independent per-agent answering.
//!
//! Each agent answers every query on its own, using only its observation
//! dictionary: a deterministic heuristic stand-in, a live chat backend with
//! the pinned prompts, or a malicious wrapper that inverts whatever the
//! wrapped backend believes.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::HouseGraph;
use crate::error::{Error, Result};
use crate::explore::ObservationDict;
use crate::llm::{ChatClient, ChatMessage};
use crate::prompts;
use crate::queries::{Query, QuerySet};
use crate::rng;

/// Provenance of one agent's answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendTag {
    Heuristic,
    Llm,
    Malicious(Box<BackendTag>),
}

impl std::fmt::Display for BackendTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendTag::Heuristic => write!(f, "heuristic"),
            BackendTag::Llm => write!(f, "llm"),
            BackendTag::Malicious(inner) => write!(f, "malicious({inner})"),
        }
    }
}

/// One agent's answers over a query set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub agent_id: usize,
    pub backend: BackendTag,
    /// Indexed by query position; always 0 or 1.
    pub answers: Vec<u8>,
    /// Raw chat transcripts, present for LLM backends only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcripts: Option<Vec<QueryTranscript>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTranscript {
    pub query_index: usize,
    pub messages: Vec<ChatMessage>,
    pub reply: String,
}

/// Deterministic stand-in for a chat model doing common-sense reasoning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeuristicParams {
    /// Common-sense placement beliefs: room type -> object -> probability.
    pub prior: crate::env::PriorTable,
    /// Believe "yes" when the prior reaches this threshold.
    pub threshold: f64,
    /// Per-query probability of flipping the final answer.
    pub flip_noise: f64,
    pub seed: u64,
}

impl HeuristicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("threshold", self.threshold), ("flip_noise", self.flip_noise)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} out of [0,1]")));
            }
        }
        self.prior.validate()
    }
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            prior: crate::env::PriorTable::uniform(0.0),
            threshold: 0.5,
            flip_noise: 0.1,
            seed: 0,
        }
    }
}

pub fn invert(answer: u8) -> u8 {
    1 - answer
}

/// Answers one query from the observation dictionary: a direct sighting is a
/// "yes"; otherwise the prior for (room type, object) against the threshold
/// decides; finally the answer flips with probability `flip_noise`, seeded
/// per (agent seed, query identity).
pub fn heuristic_answer(
    house: &HouseGraph,
    obs: &ObservationDict,
    query: &Query,
    params: &HeuristicParams,
) -> Result<u8> {
    let object_name = house.object_name(query.object)?;
    let room_type = house.room_type(query.room)?;
    let mut answer = if obs.has(query.room, query.object) {
        1
    } else if params.prior.get(room_type, object_name) >= params.threshold {
        1
    } else {
        0
    };
    if params.flip_noise > 0.0 {
        let mut draws = rng::stream(
            params.seed,
            &[0x666c_6970, query.object.0 as u64, query.room.0 as u64],
        );
        if draws.gen_bool(params.flip_noise) {
            answer = invert(answer);
        }
    }
    Ok(answer)
}

/// Scans for the first standalone YES or NO token, case-insensitively.
pub fn parse_yes_no(reply: &str) -> Option<u8> {
    let lowered = reply.to_lowercase();
    for token in lowered.split(|c: char| !c.is_alphanumeric()) {
        match token {
            "yes" => return Some(1),
            "no" => return Some(0),
            _ => {}
        }
    }
    None
}

/// Asks the chat backend one query with the pinned prompts; reprompts once
/// on an unparseable reply, then errors. Returns the answer with the full
/// transcript.
pub fn llm_answer(
    client: &dyn ChatClient,
    observation_dict: &str,
    item: &str,
    room: &str,
) -> Result<(u8, Vec<ChatMessage>, String)> {
    let mut messages = vec![
        ChatMessage::system(prompts::qa_system(observation_dict)),
        ChatMessage::user(prompts::qa_question(item, room)),
    ];
    let reply = client.chat(&messages)?;
    if let Some(answer) = parse_yes_no(&reply) {
        return Ok((answer, messages, reply));
    }
    messages.push(ChatMessage::assistant(reply));
    messages.push(ChatMessage::user(prompts::QA_REPROMPT));
    let second = client.chat(&messages)?;
    match parse_yes_no(&second) {
        Some(answer) => Ok((answer, messages, second)),
        None => Err(Error::AnswerUnparseable(second)),
    }
}

/// A configured agent backend, ready to answer queries one at a time.
pub enum Answerer {
    Heuristic {
        obs: ObservationDict,
        params: HeuristicParams,
    },
    Llm {
        client: Arc<dyn ChatClient>,
        /// Pre-rendered observation dictionary string.
        observation_dict: String,
    },
    Malicious(Box<Answerer>),
}

impl Answerer {
    pub fn heuristic(obs: ObservationDict, params: HeuristicParams) -> Self {
        Answerer::Heuristic { obs, params }
    }

    pub fn llm(client: Arc<dyn ChatClient>, house: &HouseGraph, obs: &ObservationDict) -> Result<Self> {
        Ok(Answerer::Llm {
            client,
            observation_dict: obs.to_dict_string(house)?,
        })
    }

    pub fn malicious(inner: Answerer) -> Self {
        Answerer::Malicious(Box::new(inner))
    }

    pub fn tag(&self) -> BackendTag {
        match self {
            Answerer::Heuristic { .. } => BackendTag::Heuristic,
            Answerer::Llm { .. } => BackendTag::Llm,
            Answerer::Malicious(inner) => BackendTag::Malicious(Box::new(inner.tag())),
        }
    }

    fn answer_one(
        &self,
        house: &HouseGraph,
        query: &Query,
    ) -> Result<(u8, Option<(Vec<ChatMessage>, String)>)> {
        match self {
            Answerer::Heuristic { obs, params } => {
                Ok((heuristic_answer(house, obs, query, params)?, None))
            }
            Answerer::Llm {
                client,
                observation_dict,
            } => {
                let item = house.object_name(query.object)?;
                let room = house.room_name(query.room)?;
                let (answer, messages, reply) =
                    llm_answer(client.as_ref(), observation_dict, item, room)?;
                Ok((answer, Some((messages, reply))))
            }
            Answerer::Malicious(inner) => {
                let (answer, transcript) = inner.answer_one(house, query)?;
                Ok((invert(answer), transcript))
            }
        }
    }
}

/// Applies the backend to every query independently. Errors carry the
/// failing query index; no partial record is returned.
pub fn answer_all(
    agent_id: usize,
    backend: &Answerer,
    house: &HouseGraph,
    qs: &QuerySet,
) -> Result<AnswerRecord> {
    let mut answers = Vec::with_capacity(qs.len());
    let mut transcripts = Vec::new();
    for (index, query) in qs.queries.iter().enumerate() {
        let (answer, transcript) = backend
            .answer_one(house, query)
            .map_err(|e| e.at_query(index))?;
        answers.push(answer);
        if let Some((messages, reply)) = transcript {
            transcripts.push(QueryTranscript {
                query_index: index,
                messages,
                reply,
            });
        }
    }
    Ok(AnswerRecord {
        agent_id,
        backend: backend.tag(),
        answers,
        transcripts: (!transcripts.is_empty()).then_some(transcripts),
    })
}

/// Like [`answer_all`] but with at most `max_in_flight` queries in flight,
/// for live chat backends. Results are assembled in query order.
pub fn answer_all_bounded(
    agent_id: usize,
    backend: &Answerer,
    house: &HouseGraph,
    qs: &QuerySet,
    max_in_flight: usize,
) -> Result<AnswerRecord> {
    let width = max_in_flight.max(1);
    if width == 1 {
        return answer_all(agent_id, backend, house, qs);
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let n = qs.len();
    let slots: Vec<std::sync::Mutex<Option<Result<(u8, Option<(Vec<ChatMessage>, String)>)>>>> =
        (0..n).map(|_| std::sync::Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..width.min(n.max(1)) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if index >= n {
                    break;
                }
                let outcome = backend.answer_one(house, &qs.queries[index]);
                *slots[index].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut answers = Vec::with_capacity(n);
    let mut transcripts = Vec::new();
    for (index, slot) in slots.into_iter().enumerate() {
        let outcome = slot
            .into_inner()
            .unwrap()
            .expect("every index was claimed by a worker");
        let (answer, transcript) = outcome.map_err(|e| e.at_query(index))?;
        answers.push(answer);
        if let Some((messages, reply)) = transcript {
            transcripts.push(QueryTranscript {
                query_index: index,
                messages,
                reply,
            });
        }
    }
    Ok(AnswerRecord {
        agent_id,
        backend: backend.tag(),
        answers,
        transcripts: (!transcripts.is_empty()).then_some(transcripts),
    })
}

// ---------------------------------------------------------------------------
// Files: JSON Lines answers, JSON transcripts
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct AnswerRow {
    agent: usize,
    query_index: usize,
    answer: u8,
}

pub fn answers_to_jsonl(record: &AnswerRecord) -> Result<String> {
    let mut out = String::new();
    for (query_index, &answer) in record.answers.iter().enumerate() {
        out.push_str(&serde_json::to_string(&AnswerRow {
            agent: record.agent_id,
            query_index,
            answer,
        })?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses answer rows for a single agent; rows must cover 0..n contiguously.
pub fn answers_from_jsonl(text: &str) -> Result<AnswerRecord> {
    let mut rows: Vec<AnswerRow> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("answers file"));
    }
    let agent_id = rows[0].agent;
    if rows.iter().any(|r| r.agent != agent_id) {
        return Err(Error::Validation(
            "answers file mixes multiple agents".into(),
        ));
    }
    rows.sort_by_key(|r| r.query_index);
    for (i, row) in rows.iter().enumerate() {
        if row.query_index != i {
            return Err(Error::Validation(format!(
                "answers file is missing query index {i}"
            )));
        }
        if row.answer > 1 {
            return Err(Error::Validation(format!(
                "answer {} is not binary",
                row.answer
            )));
        }
    }
    Ok(AnswerRecord {
        agent_id,
        backend: BackendTag::Heuristic,
        answers: rows.into_iter().map(|r| r.answer).collect(),
        transcripts: None,
    })
}

pub fn save_answers(record: &AnswerRecord, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(&path, answers_to_jsonl(record)?)?;
    if let Some(transcripts) = &record.transcripts {
        let tp = path.as_ref().with_extension("transcripts.json");
        std::fs::write(tp, serde_json::to_string_pretty(transcripts)?)?;
    }
    Ok(())
}

pub fn load_answers(path: impl AsRef<Path>) -> Result<AnswerRecord> {
    answers_from_jsonl(&std::fs::read_to_string(path)?)
}
