//! Sentence embeddings behind a uniform provider abstraction, plus exact
//! cosine retrieval.
//!
//! The engine itself never runs a neural encoder. Real embeddings arrive
//! through a file (`{id, vector}` json-lines) or a remote HTTP service; the
//! deterministic-test provider exists so every downstream property can be
//! tested hermetically.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::{Error, Result};

/// Env var consulted for the remote provider URL when no flag is given.
pub const EMBED_URL_ENV: &str = "STYLEMINE_EMBED_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub dim: usize,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl EmbeddingVector {
    /// Validate finiteness and record the dimension.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite embedding value".into()));
        }
        Ok(EmbeddingVector {
            dim: values.len(),
            values,
            normalized: false,
        })
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scale to unit Euclidean norm. Zero vectors have no direction.
    pub fn into_normalized(mut self) -> Result<Self> {
        if self.normalized {
            return Ok(self);
        }
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        for v in &mut self.values {
            *v /= n;
        }
        self.normalized = true;
        Ok(self)
    }
}

/// Configuration for the remote HTTP provider.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub url: String,
    pub dim: usize,
    /// Request timeout in seconds.
    pub timeout_secs: u64,
    /// Total attempts per sentence (>= 1).
    pub retries: usize,
}

pub struct RemoteProvider {
    config: RemoteConfig,
    cache: Mutex<HashMap<String, EmbeddingVector>>,
}

/// Uniform access to sentence embeddings. All variants are shareable across
/// worker threads; the remote cache synchronizes internally.
pub enum EmbeddingProvider {
    /// Pre-computed vectors keyed by sentence id, L2-normalized on load.
    File { dim: usize, vectors: HashMap<String, EmbeddingVector> },
    /// Hashed bag-of-normalized-tokens projection; stable across runs and
    /// platforms, for hermetic tests and benchmarks.
    DeterministicTest { dim: usize },
    /// HTTP POST `{texts: [...]}` -> `{vectors: [[...]]}` with retry and an
    /// internal text-keyed cache.
    Remote(RemoteProvider),
}

impl EmbeddingProvider {
    pub fn deterministic_test(dim: usize) -> Self {
        EmbeddingProvider::DeterministicTest { dim }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let vectors = load_embedding_file(path)?;
        let dim = vectors.values().next().map(|v| v.dim).unwrap_or(0);
        Ok(EmbeddingProvider::File { dim, vectors })
    }

    pub fn remote(config: RemoteConfig) -> Self {
        EmbeddingProvider::Remote(RemoteProvider {
            config,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            EmbeddingProvider::File { dim, .. } => *dim,
            EmbeddingProvider::DeterministicTest { dim } => *dim,
            EmbeddingProvider::Remote(r) => r.config.dim,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EmbeddingProvider::File { .. } => "file",
            EmbeddingProvider::DeterministicTest { .. } => "deterministic-test",
            EmbeddingProvider::Remote(_) => "remote",
        }
    }
}

/// Fetch the embedding for one sentence. Vectors are always returned
/// L2-normalized.
pub fn get_embedding(provider: &EmbeddingProvider, sentence: &Sentence) -> Result<EmbeddingVector> {
    match provider {
        EmbeddingProvider::File { vectors, .. } => vectors
            .get(&sentence.id)
            .cloned()
            .ok_or_else(|| Error::MissingEmbedding(sentence.id.clone())),
        EmbeddingProvider::DeterministicTest { dim } => {
            let tokens = sentence.normalized_tokens();
            if tokens.is_empty() {
                return Err(Error::EmptySentence(sentence.id.clone()));
            }
            deterministic_embedding(&tokens, *dim)
        }
        EmbeddingProvider::Remote(r) => r.get(&sentence.text),
    }
}

/// Embed an arbitrary token list with the deterministic hash projection.
/// Each token seeds a splitmix64 stream via FNV-1a; token streams are summed
/// (bag semantics) and the result is L2-normalized.
pub fn deterministic_embedding(normalized_tokens: &[String], dim: usize) -> Result<EmbeddingVector> {
    let mut values = vec![0.0f64; dim];
    for token in normalized_tokens {
        let mut state = fnv1a64(token.as_bytes());
        for slot in values.iter_mut() {
            state = splitmix64(state);
            // Top 53 bits to a uniform [0,1), then shift to [-1,1).
            let unit = (state >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            *slot += unit * 2.0 - 1.0;
        }
    }
    EmbeddingVector::new(values)?.into_normalized()
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RemoteProvider {
    fn get(&self, text: &str) -> Result<EmbeddingVector> {
        if let Some(hit) = self.cache.lock().unwrap().get(text) {
            return Ok(hit.clone());
        }
        let vector = self.fetch(text)?;
        self.cache
            .lock()
            .unwrap()
            .insert(text.to_string(), vector.clone());
        Ok(vector)
    }

    fn fetch(&self, text: &str) -> Result<EmbeddingVector> {
        let body = serde_json::json!({ "texts": [text] });
        let mut last_err = String::new();
        let attempts = self.config.retries.max(1);
        for _ in 0..attempts {
            let response = ureq::post(&self.config.url)
                .timeout(Duration::from_secs(self.config.timeout_secs))
                .send_json(body.clone());
            match response {
                Ok(resp) => {
                    let parsed: RemoteResponse = resp.into_json().map_err(|e| Error::Remote {
                        attempts,
                        detail: format!("bad response body: {e}"),
                    })?;
                    let values = parsed.vectors.into_iter().next().ok_or(Error::Remote {
                        attempts,
                        detail: "response carried no vectors".into(),
                    })?;
                    let v = EmbeddingVector::new(values)?;
                    if v.dim != self.config.dim {
                        return Err(Error::DimMismatch(v.dim, self.config.dim));
                    }
                    return v.into_normalized();
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(Error::Remote {
            attempts,
            detail: last_err,
        })
    }
}

#[derive(Deserialize)]
struct RemoteResponse {
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRecord {
    id: String,
    vector: Vec<f64>,
}

/// Load `{id, vector}` json-lines; every vector is validated to one shared
/// dimension and L2-normalized.
pub fn load_embedding_file(path: &Path) -> Result<HashMap<String, EmbeddingVector>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = HashMap::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EmbeddingRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            path: path.display().to_string(),
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        let v = EmbeddingVector::new(rec.vector)?;
        match dim {
            None => dim = Some(v.dim),
            Some(d) if d != v.dim => return Err(Error::DimMismatch(v.dim, d)),
            _ => {}
        }
        if out.contains_key(&rec.id) {
            return Err(Error::DuplicateId(rec.id));
        }
        out.insert(rec.id, v.into_normalized()?);
    }
    Ok(out)
}

/// Write embeddings as `{id, vector}` json-lines (ids sorted for stable output).
pub fn save_embedding_file(path: &Path, vectors: &[(String, EmbeddingVector)]) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for (id, v) in vectors {
        let rec = EmbeddingRecord {
            id: id.clone(),
            vector: v.values.clone(),
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::InvalidInput(e.to_string()))?;
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

/// Cosine similarity, clamped to `[-1, 1]`. Errors on dimension mismatch or
/// a zero vector.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch(a.dim, b.dim));
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    let na = if a.normalized { 1.0 } else { a.norm() };
    let nb = if b.normalized { 1.0 } else { b.norm() };
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Exact top-k by cosine, descending, ties broken by ascending id. The
/// result is a prefix of the full sort for every k, so it is independent of
/// any internal partitioning.
pub fn top_k(
    query: &EmbeddingVector,
    pool: &[(String, EmbeddingVector)],
    k: usize,
) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let mut scored = Vec::with_capacity(pool.len());
    for (id, v) in pool {
        scored.push((id.clone(), cosine(query, v)?));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}
