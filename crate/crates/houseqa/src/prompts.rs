//! The prompt catalog.
//!
//! Every string sent to a chat backend lives here, with its placeholders,
//! so transcripts are auditable and the wording is pinned in one place.

/// System prompt for independent question answering.
pub const QA_SYSTEM: &str = "You are an embodied agent that has explored a house. I prefer definite answers to questions. The observations are: [OBSERVATION DICTIONARY]";

/// Question template for one query.
pub const QA_QUESTION: &str = "Do you think there is a [ITEM] in the [ROOM]? Use both common-sense reasoning about the object and room and the observation list given. Even if the relevant information is not in your observations, the answer can still be YES. Respond with YES or NO.";

/// Reprompt when a reply contains no standalone YES/NO.
pub const QA_REPROMPT: &str = "Respond with YES or NO only.";

/// Debate system prompt; the history clause is swapped for
/// [`DEBATE_NO_HISTORY`] on the opening turn.
pub const DEBATE_SYSTEM: &str = "You are an embodied agent in a house. Your id is [INDEX]. Here are your observations from exploring the house: [OBSERVATION DICTIONARY].  Your initial answer to whether or not there was a [OBJECT] in the [ROOM] was [INITIAL ANSWER]. Other agents may have different answers. Please debate with the other agents to come to a consensus. Here is the conversation history: [CONVERSATION HISTORY]";

/// Replaces the final sentence of [`DEBATE_SYSTEM`] when no one has spoken.
pub const DEBATE_NO_HISTORY: &str = "This is the beginning of the conversation.";

/// User prompt for an agent's turn within a debate round.
pub const DEBATE_TURN: &str = "It is your turn to speak. Use your observation and conversation history to help.";

/// User prompt requesting the post-debate final answer.
pub const DEBATE_FINAL: &str = "Please give your final \"Yes/No\" answer. Give a definite answer.";

/// System prompt for coverage-maximizing exploration.
pub const EXPLORE_SYSTEM: &str = "You are an embodied agent in a house. You want to aggressively explore the house and you want to find as many unique objects as you can.";

/// User prompt asking the explorer to pick its next room.
pub const EXPLORE_CHOOSE: &str = "You are currently in the [ROOM]. You can move to these rooms next: [NEIGHBOR ROOMS]. Which room do you move to? Respond with the room name only.";

/// Reprompt when the explorer's reply names no reachable room.
pub const EXPLORE_REPROMPT: &str = "That is not a reachable room. Choose one of: [NEIGHBOR ROOMS]. Respond with the room name only.";

pub fn qa_system(observation_dict: &str) -> String {
    QA_SYSTEM.replace("[OBSERVATION DICTIONARY]", observation_dict)
}

pub fn qa_question(item: &str, room: &str) -> String {
    QA_QUESTION.replace("[ITEM]", item).replace("[ROOM]", room)
}

pub fn debate_system(
    index: usize,
    observation_dict: &str,
    object: &str,
    room: &str,
    initial_answer: &str,
    history: Option<&str>,
) -> String {
    let base = DEBATE_SYSTEM
        .replace("[INDEX]", &index.to_string())
        .replace("[OBSERVATION DICTIONARY]", observation_dict)
        .replace("[OBJECT]", object)
        .replace("[ROOM]", room)
        .replace("[INITIAL ANSWER]", initial_answer);
    match history {
        Some(h) => base.replace("[CONVERSATION HISTORY]", h),
        None => {
            let clause_start = base
                .find("Here is the conversation history:")
                .expect("history clause present in template");
            format!("{}{}", &base[..clause_start], DEBATE_NO_HISTORY)
        }
    }
}

pub fn explore_choose(room: &str, neighbor_rooms: &[&str]) -> String {
    EXPLORE_CHOOSE
        .replace("[ROOM]", room)
        .replace("[NEIGHBOR ROOMS]", &neighbor_rooms.join(", "))
}

pub fn explore_reprompt(neighbor_rooms: &[&str]) -> String {
    EXPLORE_REPROMPT.replace("[NEIGHBOR ROOMS]", &neighbor_rooms.join(", "))
}
