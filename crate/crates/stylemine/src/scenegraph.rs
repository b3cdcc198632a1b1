//! Scene-entity profiles.
//!
//! The preferred input is externally parsed subject-relation-object triplets
//! (a json-lines sidecar `{id, triplets: [[subj, rel, obj], ...]}`); only the
//! end nodes of each triplet become entities. When no parser output exists, a
//! stopword-based heuristic extractor approximates the profile from content
//! tokens.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize, normalize_token, Corpus, Sentence};
use crate::{Error, Result};

/// A parsed subject-relation-object triplet. Spans are token lists; the
/// object may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub subject: Vec<String>,
    pub relation: Vec<String>,
    pub object: Vec<String>,
}

impl Triplet {
    pub fn new(subject: Vec<String>, relation: Vec<String>, object: Vec<String>) -> Result<Self> {
        if subject.is_empty() {
            return Err(Error::InvalidInput("triplet subject is empty".into()));
        }
        Ok(Triplet {
            subject,
            relation,
            object,
        })
    }
}

/// Ordered scene-entity sequence for one sentence: normalized strings in
/// first-appearance order with duplicates removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityProfile {
    pub sentence_id: String,
    pub entity_seq: Vec<String>,
}

impl EntityProfile {
    pub fn new(sentence_id: impl Into<String>, entity_seq: Vec<String>) -> Self {
        EntityProfile {
            sentence_id: sentence_id.into(),
            entity_seq,
        }
    }

    /// Distinct members of `entity_seq`. The sequence is already
    /// deduplicated, so this is just a set view of it.
    pub fn entity_set(&self) -> HashSet<&str> {
        self.entity_seq.iter().map(|s| s.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entity_seq.is_empty()
    }
}

/// Normalize a multi-token span into one entity string (token-wise
/// normalization, joined by a single space).
fn normalize_span(span: &[String]) -> String {
    normalize(span).join(" ")
}

/// Build a profile from parsed triplets. Entities are the subject and object
/// spans (relations are discarded), ordered by first appearance in the
/// sentence; spans not locatable in the sentence sort after locatable ones,
/// alphabetically, so the result does not depend on triplet order.
pub fn profile_from_triplets(sentence: &Sentence, triplets: &[Triplet]) -> EntityProfile {
    let lemmas = sentence.normalized_tokens();
    // (first position in sentence, entity string), deduplicated by string.
    let mut best: HashMap<String, usize> = HashMap::new();
    for t in triplets {
        for span in [&t.subject, &t.object] {
            if span.is_empty() {
                continue;
            }
            let entity = normalize_span(span);
            if entity.is_empty() {
                continue;
            }
            let pos = find_span(&lemmas, &normalize(span));
            let slot = best.entry(entity).or_insert(pos);
            if pos < *slot {
                *slot = pos;
            }
        }
    }
    let mut ordered: Vec<(usize, String)> = best.into_iter().map(|(e, p)| (p, e)).collect();
    ordered.sort();
    EntityProfile::new(
        sentence.id.clone(),
        ordered.into_iter().map(|(_, e)| e).collect(),
    )
}

/// First index where `needle` occurs as a contiguous subsequence of
/// `haystack`, or `usize::MAX` if absent.
fn find_span(haystack: &[String], needle: &[String]) -> usize {
    if needle.is_empty() || needle.len() > haystack.len() {
        return usize::MAX;
    }
    for i in 0..=haystack.len() - needle.len() {
        if haystack[i..i + needle.len()] == *needle {
            return i;
        }
    }
    usize::MAX
}

/// Approximate fallback when no parser output is available: content tokens
/// that are not stopwords and not purely punctuation or numeric, normalized,
/// in first-appearance order.
pub fn extract_entities_heuristic(
    sentence: &Sentence,
    stopwords: &HashSet<String>,
) -> EntityProfile {
    let mut seen = HashSet::new();
    let mut seq = Vec::new();
    for token in &sentence.tokens {
        if !token.chars().any(|c| c.is_alphabetic()) {
            continue;
        }
        let lower = token.to_lowercase();
        let lemma = normalize_token(token);
        if stopwords.contains(&lower) || stopwords.contains(&lemma) {
            continue;
        }
        if seen.insert(lemma.clone()) {
            seq.push(lemma);
        }
    }
    EntityProfile::new(sentence.id.clone(), seq)
}

/// Profile built from an explicit entity list (the `entities` field of the
/// corpus interchange format). List order is taken as appearance order.
pub fn profile_from_entities(sentence_id: &str, entities: &[String]) -> EntityProfile {
    let mut seen = HashSet::new();
    let mut seq = Vec::new();
    for raw in entities {
        let entity = normalize_span(&raw.split_whitespace().map(str::to_string).collect::<Vec<_>>());
        if entity.is_empty() {
            continue;
        }
        if seen.insert(entity.clone()) {
            seq.push(entity);
        }
    }
    EntityProfile::new(sentence_id, seq)
}

#[derive(Deserialize)]
struct SidecarRecord {
    id: String,
    triplets: Vec<Vec<String>>,
}

/// Load a triplet sidecar file: json-lines `{id, triplets: [[subj, rel, obj], ...]}`.
/// Span strings are whitespace-split into token lists.
pub fn load_triplet_sidecar(path: &Path) -> Result<HashMap<String, Vec<Triplet>>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out: HashMap<String, Vec<Triplet>> = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SidecarRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            path: path.display().to_string(),
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        let mut triplets = Vec::new();
        for (i, t) in rec.triplets.iter().enumerate() {
            if t.len() != 3 {
                return Err(Error::MalformedLine {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    detail: format!("triplet {i} has {} fields, expected 3", t.len()),
                });
            }
            let split = |s: &String| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
            triplets.push(Triplet::new(split(&t[0]), split(&t[1]), split(&t[2])).map_err(
                |e| Error::MalformedLine {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    detail: e.to_string(),
                },
            )?);
        }
        out.insert(rec.id, triplets);
    }
    Ok(out)
}

/// Build profiles for a whole corpus. Per sentence, explicit `entities`
/// win, then sidecar triplets, then the heuristic extractor.
pub fn build_profiles(
    corpus: &Corpus,
    sidecar: Option<&HashMap<String, Vec<Triplet>>>,
    stopwords: &HashSet<String>,
) -> HashMap<String, EntityProfile> {
    corpus
        .sentences
        .iter()
        .map(|s| {
            let profile = if let Some(entities) = &s.entities {
                profile_from_entities(&s.id, entities)
            } else if let Some(triplets) = sidecar.and_then(|m| m.get(&s.id)) {
                profile_from_triplets(s, triplets)
            } else {
                extract_entities_heuristic(s, stopwords)
            };
            (s.id.clone(), profile)
        })
        .collect()
}

/// Load a stopword list from a plain-lines file (one word per line, `#`
/// comments and blank lines skipped).
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut set = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let word = line.trim();
        if word.is_empty() || word.starts_with('#') {
            continue;
        }
        set.insert(word.to_lowercase());
    }
    Ok(set)
}

/// Built-in English stopword list for the heuristic extractor.
pub fn default_stopwords() -> HashSet<String> {
    DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren't", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "cannot", "could", "couldn't", "did", "didn't", "do", "does", "doesn't",
    "doing", "don't", "down", "each", "few", "for", "from", "further", "had", "hadn't", "has",
    "hasn't", "have", "haven't", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "isn't", "it", "its", "itself",
    "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "quite", "rather",
    "really", "same", "she", "should", "shouldn't", "so", "some", "such", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "very", "was", "wasn't", "we", "were",
    "weren't", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
    "won't", "would", "wouldn't", "you", "your", "yours", "yourself", "yourselves", "'s", "'t",
    "'re", "'ve", "'ll", "'d", "'m", "n't",
];
