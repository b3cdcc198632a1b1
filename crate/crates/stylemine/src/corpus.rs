//! Style-labeled sentence corpora and the interchange formats they travel in.
//!
//! The canonical on-disk form is json-lines with one object per sentence:
//! `{id, style, text, tokens?, lemmas?, entities?}`. Two simpler ingest
//! formats exist for raw data: tsv (`id<TAB>text`) and plain lines (text
//! only, ids auto-assigned as `<style>-<line number>`).

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Free-form style name ("negative", "formal", "liberal", ...). Whether a
/// corpus acts as source or target is decided by argument position at the
/// mining call site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StyleLabel(pub String);

impl StyleLabel {
    pub fn new(name: impl Into<String>) -> Self {
        StyleLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StyleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One corpus unit. `tokens` is always populated after load; `lemmas` and
/// `entities` are optional enrichments carried through the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub style: StyleLabel,
    pub text: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<Vec<String>>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, style: StyleLabel, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Sentence {
            id: id.into(),
            style,
            text,
            tokens,
            lemmas: None,
            entities: None,
        }
    }

    /// Normalized token view: supplied lemmas win, otherwise computed.
    pub fn normalized_tokens(&self) -> Vec<String> {
        match &self.lemmas {
            Some(l) => l.clone(),
            None => normalize(&self.tokens),
        }
    }
}

/// An ordered, immutable collection of same-style sentences.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub style: StyleLabel,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(style: StyleLabel, sentences: Vec<Sentence>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &sentences {
            if s.style != style {
                return Err(Error::InvalidInput(format!(
                    "sentence {} has style {} in a {} corpus",
                    s.id, s.style, style
                )));
            }
            if !seen.insert(s.id.clone()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
        }
        Ok(Corpus { style, sentences })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Sentence> {
        // Corpora are read far more than constructed; linear scan is fine for
        // tests but mining-scale callers should use `index()`.
        self.sentences.iter().find(|s| s.id == id)
    }

    /// id -> position map for repeated lookups.
    pub fn index(&self) -> std::collections::HashMap<&str, usize> {
        self.sentences
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }
}

/// Supported corpus file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Tsv,
    JsonLines,
    PlainLines,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "json-lines" | "jsonl" => Ok(CorpusFormat::JsonLines),
            "plain-lines" | "plain" => Ok(CorpusFormat::PlainLines),
            other => Err(Error::InvalidParam(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<String>,
    style: Option<String>,
    text: String,
    tokens: Option<Vec<String>>,
    lemmas: Option<Vec<String>>,
    entities: Option<Vec<String>>,
}

/// Load a corpus from `path`, assigning `style` to every sentence.
///
/// Sentence order equals file order. Missing ids are auto-assigned as
/// `<style>-<line number>` with 0-based line numbers.
pub fn load_corpus(path: &Path, style: &StyleLabel, format: CorpusFormat) -> Result<Corpus> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let path_str = path.display().to_string();

    let mut sentences = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path_str.clone(),
            source,
        })?;
        let sentence = match format {
            CorpusFormat::PlainLines => {
                Sentence::new(format!("{style}-{lineno}"), style.clone(), line)
            }
            CorpusFormat::Tsv => {
                let (id, text) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
                    path: path_str.clone(),
                    line: lineno + 1,
                    detail: "expected id<TAB>text".into(),
                })?;
                if id.is_empty() {
                    return Err(Error::MalformedLine {
                        path: path_str.clone(),
                        line: lineno + 1,
                        detail: "empty id".into(),
                    });
                }
                Sentence::new(id, style.clone(), text)
            }
            CorpusFormat::JsonLines => {
                let rec: JsonRecord =
                    serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                        path: path_str.clone(),
                        line: lineno + 1,
                        detail: e.to_string(),
                    })?;
                if let Some(file_style) = &rec.style {
                    if file_style != style.as_str() {
                        return Err(Error::MalformedLine {
                            path: path_str.clone(),
                            line: lineno + 1,
                            detail: format!(
                                "style {file_style:?} does not match declared {:?}",
                                style.as_str()
                            ),
                        });
                    }
                }
                let id = rec.id.unwrap_or_else(|| format!("{style}-{lineno}"));
                let tokens = rec.tokens.unwrap_or_else(|| tokenize(&rec.text));
                Sentence {
                    id,
                    style: style.clone(),
                    text: rec.text,
                    tokens,
                    lemmas: rec.lemmas,
                    entities: rec.entities,
                }
            }
        };
        if !seen.insert(sentence.id.clone()) {
            return Err(Error::DuplicateId(sentence.id.clone()));
        }
        sentences.push(sentence);
    }

    Ok(Corpus {
        style: style.clone(),
        sentences,
    })
}

/// Write a corpus in json-lines form. `load_corpus` on the result reproduces
/// ids, styles, and tokens exactly.
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for s in &corpus.sentences {
        serde_json::to_writer(&mut w, s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        writeln!(w).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Whitespace-and-punctuation segmentation. Alphanumeric runs form tokens,
/// punctuation marks become single-char tokens, and an intra-word apostrophe
/// attaches to the following run so contractions split as `It` + `'s`.
/// Lowercasing is off; normalization is a separate step.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
            continue;
        }
        let is_apostrophe = c == '\'' || c == '\u{2019}';
        if is_apostrophe
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && i + 1 < chars.len()
            && chars[i + 1].is_alphanumeric()
        {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
            continue;
        }
        out.push(c.to_string());
        i += 1;
    }
    out
}

/// Words the stemmer must leave alone.
const STEM_EXCEPTIONS: &[&str] = &[
    "is",
    "his",
    "this",
    "was",
    "has",
    "does",
    "goes",
    "yes",
    "news",
    "during",
    "nothing",
    "something",
    "anything",
    "everything",
];

/// Lowercase + lightweight suffix stripping (s/es/ies/ed/ing), iterated to a
/// fixed point so the function is idempotent. Callers with real lemmatizer
/// output should bypass this by supplying `Sentence::lemmas`.
pub fn normalize(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| normalize_token(t)).collect()
}

pub fn normalize_token(token: &str) -> String {
    let mut cur = token.to_lowercase();
    loop {
        let next = strip_suffix_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn strip_suffix_once(w: &str) -> String {
    if STEM_EXCEPTIONS.contains(&w) {
        return w.to_string();
    }
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    let ends = |suffix: &str| w.ends_with(suffix);

    if ends("ies") && n >= 5 {
        let mut stem: String = chars[..n - 3].iter().collect();
        stem.push('y');
        return stem;
    }
    if ends("sses") {
        return chars[..n - 2].iter().collect();
    }
    if ends("es") && n >= 5 {
        // boxes -> box, dishes -> dish, heroes -> hero; "hates" falls through
        // to the plain "s" rule below.
        let before = chars[n - 3];
        if matches!(before, 'x' | 'z' | 'h' | 'o') {
            return chars[..n - 2].iter().collect();
        }
    }
    if ends("s") && !ends("ss") && !ends("us") && !ends("is") && n >= 4 {
        return chars[..n - 1].iter().collect();
    }
    if ends("ing") && n >= 6 {
        return undouble(&chars[..n - 3]);
    }
    if ends("ed") && n >= 5 {
        return undouble(&chars[..n - 2]);
    }
    w.to_string()
}

fn undouble(stem: &[char]) -> String {
    let n = stem.len();
    if n >= 2
        && stem[n - 1] == stem[n - 2]
        && matches!(
            stem[n - 1],
            'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't'
        )
    {
        return stem[..n - 1].iter().collect();
    }
    stem.iter().collect()
}
