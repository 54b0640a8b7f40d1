use std::collections::BTreeSet;

use super::{ActorClass, ScenarioConfig};
use crate::filter::{tokenize, FilteredDescription, TokenKind};

const ACCIDENT_WORDS: &[&str] = &[
    "accident", "accidents", "collision", "collisions", "crash", "crashes", "crashed", "collide",
    "collides", "collided", "hurt", "injured", "injury", "injuries", "hit", "struck",
];

const NEGATORS: &[&str] = &["no", "not", "without", "never", "nobody", "avoid", "avoided", "avoids", "none"];

/// How many words back a negator may sit and still cancel an accident word.
const NEGATION_WINDOW: usize = 3;

const SAFETY_PHRASES: &[&[&str]] = &[
    &["obeyed", "the", "traffic", "rules"],
    &["obey", "the", "traffic", "rules"],
    &["obeys", "the", "traffic", "rules"],
    &["safely"],
    &["safe"],
];

fn contains_phrase(words: &[String], phrase: &[&str]) -> bool {
    words.windows(phrase.len()).any(|w| w.iter().zip(phrase).all(|(a, b)| a == b))
}

/// Scenario tags derived from the description and the validated config.
///
/// "accident" requires an accident word that is not negated ("no accident
/// happened" does not count). "safe" is assigned only when no accident tag
/// applies and either a negated accident word or a safety phrase appears.
pub fn categorize(desc: &FilteredDescription, cfg: &ScenarioConfig) -> Vec<String> {
    let words: Vec<String> = tokenize(&desc.text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.text.to_lowercase())
        .collect();

    let mut tags = BTreeSet::new();
    tags.insert(cfg.weather.as_str().to_string());
    tags.insert(cfg.time_of_day.as_str().to_string());
    if cfg.actor_groups.iter().any(|g| !g.malfunction.is_empty()) {
        tags.insert("malfunction".to_string());
    }

    let mut accident = false;
    let mut negated_accident = false;
    for (i, w) in words.iter().enumerate() {
        if !ACCIDENT_WORDS.contains(&w.as_str()) {
            continue;
        }
        let from = i.saturating_sub(NEGATION_WINDOW);
        if words[from..i].iter().any(|p| NEGATORS.contains(&p.as_str())) {
            negated_accident = true;
        } else {
            accident = true;
        }
    }
    if accident {
        tags.insert("accident".to_string());
    } else if negated_accident || SAFETY_PHRASES.iter().any(|p| contains_phrase(&words, p)) {
        tags.insert("safe".to_string());
    }

    for class in ActorClass::ALL {
        if cfg.count(*class) > 0 {
            tags.insert(class.as_str().to_string());
        }
    }
    tags.into_iter().collect()
}
