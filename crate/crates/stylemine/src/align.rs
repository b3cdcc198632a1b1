//! Mining roughly parallel sentence pairs.
//!
//! Three strategies: `rd` draws k random targets per source (ablation
//! baseline), `semb` keeps the k nearest targets by embedding cosine, and
//! `semb-sas` additionally filters those candidates by the scene alignment
//! score. Each surviving source becomes a [`ParallelGroup`] with one expert
//! demonstration and the remaining candidates as amateurs.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::embed::{get_embedding, EmbeddingProvider};
use crate::scenegraph::EntityProfile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Rd,
    Semb,
    SembSas,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rd" => Ok(Strategy::Rd),
            "semb" => Ok(Strategy::Semb),
            "semb-sas" => Ok(Strategy::SembSas),
            other => Err(Error::InvalidParam(format!("unknown strategy {other:?}"))),
        }
    }
}

/// How the raw F-score is normalized into the final SAS value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    /// Divide by the target sentence's token count.
    Tokens,
    /// Divide by the target's entity count.
    Entities,
    /// No normalization.
    None,
}

impl std::str::FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tokens" => Ok(NormMode::Tokens),
            "entities" => Ok(NormMode::Entities),
            "none" => Ok(NormMode::None),
            other => Err(Error::InvalidParam(format!("unknown norm mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    pub strategy: Strategy,
    pub k: usize,
    /// SAS acceptance threshold (semb-sas only).
    pub p: f64,
    /// Recall weight in the F-measure.
    pub beta: f64,
    pub norm_mode: NormMode,
    /// Generator seed (rd only).
    pub seed: u64,
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::InvalidParam("beta must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParam("p must be in [0, 1]".into()));
        }
        Ok(())
    }
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            strategy: Strategy::SembSas,
            k: 8,
            p: 0.05,
            beta: 1.0,
            norm_mode: NormMode::Tokens,
            seed: 0,
        }
    }
}

/// All intermediate quantities behind one SAS value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SasBreakdown {
    pub overlap: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub norm_len: usize,
    pub sas: f64,
}

/// Scene alignment score of a candidate target against a source.
///
/// `overlap = |e(src) ∩ e(tgt)|`, precision is the target-side fraction,
/// recall the source-side fraction, and `f_beta` their beta-weighted
/// F-measure. Degenerate inputs (either entity set empty, or zero overlap)
/// yield 0 rather than an error. The final score divides `f_beta` by the
/// target token count, the target entity count, or nothing, per `norm_mode`.
pub fn sas(
    src_profile: &EntityProfile,
    tgt_profile: &EntityProfile,
    tgt_len: usize,
    params: &AlignmentParams,
) -> SasBreakdown {
    let src_set = src_profile.entity_set();
    let tgt_set = tgt_profile.entity_set();
    let overlap = src_set.intersection(&tgt_set).count();

    let precision = if tgt_set.is_empty() {
        0.0
    } else {
        overlap as f64 / tgt_set.len() as f64
    };
    let recall = if src_set.is_empty() {
        0.0
    } else {
        overlap as f64 / src_set.len() as f64
    };
    let b2 = params.beta * params.beta;
    let denom = b2 * precision + recall;
    let f_beta = if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    };
    let norm_len = match params.norm_mode {
        NormMode::Tokens => tgt_len.max(1),
        NormMode::Entities => tgt_set.len().max(1),
        NormMode::None => 1,
    };
    SasBreakdown {
        overlap,
        precision,
        recall,
        f_beta,
        norm_len,
        sas: f_beta / norm_len as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub target_id: String,
    pub cosine: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sas: Option<f64>,
}

/// One source sentence with its ranked target candidates. `expert_id` is
/// always a member of `candidates`; `amateur_ids` are the rest, in candidate
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelGroup {
    pub source_id: String,
    pub candidates: Vec<Candidate>,
    pub expert_id: String,
    pub amateur_ids: Vec<String>,
    pub params: AlignmentParams,
}

/// Mining result: groups sorted by source id, plus how many sources were
/// dropped because no candidate passed the SAS threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MineOutput {
    pub groups: Vec<ParallelGroup>,
    pub dropped_sources: usize,
}

/// Mine parallel groups from a source and a target corpus.
///
/// Work parallelizes over source sentences on the current rayon pool; the
/// output is sorted by source id, so the result does not depend on worker
/// count or scheduling. `provider` is required for `semb` and `semb-sas`;
/// `profiles` must cover both corpora for `semb-sas`.
pub fn mine(
    src: &Corpus,
    tgt: &Corpus,
    profiles: &HashMap<String, EntityProfile>,
    provider: Option<&EmbeddingProvider>,
    params: &AlignmentParams,
) -> Result<MineOutput> {
    params.validate()?;
    if src.is_empty() {
        return Ok(MineOutput {
            groups: Vec::new(),
            dropped_sources: 0,
        });
    }
    if tgt.is_empty() {
        return Err(Error::InvalidInput("target corpus is empty".into()));
    }

    let groups: Vec<Option<ParallelGroup>> = match params.strategy {
        Strategy::Rd => mine_rd(src, tgt, params),
        Strategy::Semb | Strategy::SembSas => {
            let provider = provider.ok_or_else(|| {
                Error::InvalidParam(format!(
                    "strategy {:?} needs an embedding provider",
                    params.strategy
                ))
            })?;
            if params.strategy == Strategy::SembSas {
                for s in src.sentences.iter().chain(&tgt.sentences) {
                    if !profiles.contains_key(&s.id) {
                        return Err(Error::MissingProfile(s.id.clone()));
                    }
                }
            }
            mine_embedding(src, tgt, profiles, provider, params)?
        }
    };

    let dropped_sources = groups.iter().filter(|g| g.is_none()).count();
    let mut groups: Vec<ParallelGroup> = groups.into_iter().flatten().collect();
    groups.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    Ok(MineOutput {
        groups,
        dropped_sources,
    })
}

fn mine_rd(src: &Corpus, tgt: &Corpus, params: &AlignmentParams) -> Vec<Option<ParallelGroup>> {
    let k = params.k.min(tgt.len());
    src.sentences
        .par_iter()
        .enumerate()
        .map(|(idx, s)| {
            // Per-source derived seed keeps draws independent of scheduling.
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, idx as u64));
            let draw = rand::seq::index::sample(&mut rng, tgt.len(), k);
            let candidates: Vec<Candidate> = draw
                .iter()
                .map(|t| Candidate {
                    target_id: tgt.sentences[t].id.clone(),
                    // rd never consults embeddings; cosine is a placeholder.
                    cosine: 0.0,
                    sas: None,
                })
                .collect();
            let expert_id = candidates[0].target_id.clone();
            let amateur_ids = candidates[1..]
                .iter()
                .map(|c| c.target_id.clone())
                .collect();
            Some(ParallelGroup {
                source_id: s.id.clone(),
                candidates,
                expert_id,
                amateur_ids,
                params: *params,
            })
        })
        .collect()
}

fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix-style mix so consecutive indices get unrelated streams.
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn mine_embedding(
    src: &Corpus,
    tgt: &Corpus,
    profiles: &HashMap<String, EntityProfile>,
    provider: &EmbeddingProvider,
    params: &AlignmentParams,
) -> Result<Vec<Option<ParallelGroup>>> {
    // Embed the target corpus once into a flat matrix of unit vectors.
    let tgt_vectors: Vec<Vec<f64>> = tgt
        .sentences
        .par_iter()
        .map(|s| Ok(get_embedding(provider, s)?.values))
        .collect::<Result<_>>()?;
    let dim = tgt_vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut matrix = Vec::with_capacity(tgt.len() * dim);
    for v in &tgt_vectors {
        matrix.extend_from_slice(v);
    }
    drop(tgt_vectors);

    src.sentences
        .par_iter()
        .map(|s| {
            let query = get_embedding(provider, s)?.values;
            let top = top_k_by_dot(&query, &matrix, dim, tgt, params.k);

            let candidates: Vec<Candidate> = match params.strategy {
                Strategy::Semb => top
                    .into_iter()
                    .map(|(t, cos)| Candidate {
                        target_id: tgt.sentences[t].id.clone(),
                        cosine: cos,
                        sas: None,
                    })
                    .collect(),
                Strategy::SembSas => {
                    let src_profile = &profiles[&s.id];
                    top.into_iter()
                        .filter_map(|(t, cos)| {
                            let target = &tgt.sentences[t];
                            let breakdown =
                                sas(src_profile, &profiles[&target.id], target.tokens.len(), params);
                            (breakdown.sas >= params.p).then(|| Candidate {
                                target_id: target.id.clone(),
                                cosine: cos,
                                sas: Some(breakdown.sas),
                            })
                        })
                        .collect()
                }
                Strategy::Rd => unreachable!(),
            };

            if candidates.is_empty() {
                return Ok(None);
            }

            let expert_id = match params.strategy {
                // Candidates are already (cosine desc, id asc); the first one
                // maximizes cosine.
                Strategy::Semb => candidates[0].target_id.clone(),
                Strategy::SembSas => {
                    candidates
                        .iter()
                        .max_by(|a, b| {
                            a.sas
                                .unwrap()
                                .total_cmp(&b.sas.unwrap())
                                .then_with(|| a.cosine.total_cmp(&b.cosine))
                                .then_with(|| b.target_id.cmp(&a.target_id))
                        })
                        .unwrap()
                        .target_id
                        .clone()
                }
                Strategy::Rd => unreachable!(),
            };
            // Keep candidate order (cosine desc); amateurs = candidates minus expert.
            let amateur_ids = candidates
                .iter()
                .filter(|c| c.target_id != expert_id)
                .map(|c| c.target_id.clone())
                .collect();
            Ok(Some(ParallelGroup {
                source_id: s.id.clone(),
                candidates,
                expert_id,
                amateur_ids,
                params: *params,
            }))
        })
        .collect()
}

/// Unrolled dot product with a fixed reduction order, so results are
/// byte-identical regardless of scheduling.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut chunks_a = a.chunks_exact(4);
    let mut chunks_b = b.chunks_exact(4);
    for (ca, cb) in (&mut chunks_a).zip(&mut chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Exact top-k over a flat matrix of unit vectors, keyed by
/// (dot desc, target id asc). Returns (row index, cosine) pairs.
fn top_k_by_dot(
    query: &[f64],
    matrix: &[f64],
    dim: usize,
    tgt: &Corpus,
    k: usize,
) -> Vec<(usize, f64)> {
    // Small sorted buffer: cheap for the k values in scope.
    let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
    let beats = |cand: &(usize, f64), inc: &(usize, f64), tgt: &Corpus| -> bool {
        match cand.1.total_cmp(&inc.1) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => tgt.sentences[cand.0].id < tgt.sentences[inc.0].id,
        }
    };
    for (row, chunk) in matrix.chunks_exact(dim).enumerate() {
        let cand = (row, dot(chunk, query).clamp(-1.0, 1.0));
        if best.len() == k && !beats(&cand, best.last().unwrap(), tgt) {
            continue;
        }
        let pos = best.partition_point(|e| beats(e, &cand, tgt));
        best.insert(pos, cand);
        if best.len() > k {
            best.pop();
        }
    }
    best
}

/// One exported training pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub source_id: String,
    pub target_id: String,
    pub source_text: String,
    pub target_text: String,
    pub concatenated: String,
    pub is_expert: bool,
    pub cosine: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sas: Option<f64>,
}

/// Flatten groups into (source, candidate) training records. Within each
/// group the expert record comes first; the concatenated field is
/// `source + sep_close + sep_open + target`.
pub fn export_pairs(
    groups: &[ParallelGroup],
    src: &Corpus,
    tgt: &Corpus,
    sep_open: &str,
    sep_close: &str,
) -> Result<Vec<PairRecord>> {
    let src_index = src.index();
    let tgt_index = tgt.index();
    let mut out = Vec::new();
    for group in groups {
        let s = *src_index
            .get(group.source_id.as_str())
            .ok_or_else(|| Error::DanglingId(group.source_id.clone()))?;
        let source = &src.sentences[s];
        let mut ordered: Vec<&Candidate> = Vec::with_capacity(group.candidates.len());
        for c in &group.candidates {
            if c.target_id == group.expert_id {
                ordered.insert(0, c);
            } else {
                ordered.push(c);
            }
        }
        for candidate in ordered {
            let t = *tgt_index
                .get(candidate.target_id.as_str())
                .ok_or_else(|| Error::DanglingId(candidate.target_id.clone()))?;
            let target = &tgt.sentences[t];
            out.push(PairRecord {
                source_id: source.id.clone(),
                target_id: target.id.clone(),
                source_text: source.text.clone(),
                target_text: target.text.clone(),
                concatenated: format!("{}{}{}{}", source.text, sep_close, sep_open, target.text),
                is_expert: candidate.target_id == group.expert_id,
                cosine: candidate.cosine,
                sas: candidate.sas,
            });
        }
    }
    Ok(out)
}

/// Per-side aggregates over the sentences that participate in mined pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub distinct_sentences: usize,
    pub entities: usize,
    pub avg_sent_len: f64,
    pub avg_entities_per_sent: f64,
}

/// The dataset statistics column set: pair count, per-side entity totals and
/// averages, mean entity overlap per pair, mean SAS per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub pair_count: usize,
    pub source: SideStats,
    pub target: SideStats,
    pub avg_overlap: f64,
    pub avg_sas: f64,
    pub norm_mode: NormMode,
}

/// Compute dataset statistics for mined groups. Stored per-candidate SAS
/// values are reused; otherwise SAS is recomputed from the profiles with the
/// group's own parameters.
pub fn dataset_stats(
    groups: &[ParallelGroup],
    src: &Corpus,
    tgt: &Corpus,
    profiles: &HashMap<String, EntityProfile>,
) -> Result<StatsReport> {
    let src_index = src.index();
    let tgt_index = tgt.index();

    let mut pair_count = 0usize;
    let mut overlap_sum = 0.0;
    let mut sas_sum = 0.0;
    let mut src_ids: HashSet<&str> = HashSet::new();
    let mut tgt_ids: HashSet<&str> = HashSet::new();
    let norm_mode = groups
        .first()
        .map(|g| g.params.norm_mode)
        .unwrap_or(NormMode::Tokens);

    for group in groups {
        if !src_index.contains_key(group.source_id.as_str()) {
            return Err(Error::DanglingId(group.source_id.clone()));
        }
        src_ids.insert(group.source_id.as_str());
        let src_profile = profiles
            .get(&group.source_id)
            .ok_or_else(|| Error::MissingProfile(group.source_id.clone()))?;
        for candidate in &group.candidates {
            let t = *tgt_index
                .get(candidate.target_id.as_str())
                .ok_or_else(|| Error::DanglingId(candidate.target_id.clone()))?;
            tgt_ids.insert(tgt.sentences[t].id.as_str());
            let tgt_profile = profiles
                .get(&candidate.target_id)
                .ok_or_else(|| Error::MissingProfile(candidate.target_id.clone()))?;
            let breakdown = sas(
                src_profile,
                tgt_profile,
                tgt.sentences[t].tokens.len(),
                &group.params,
            );
            overlap_sum += breakdown.overlap as f64;
            sas_sum += candidate.sas.unwrap_or(breakdown.sas);
            pair_count += 1;
        }
    }

    let side = |ids: &HashSet<&str>, corpus: &Corpus, index: &HashMap<&str, usize>| -> Result<SideStats> {
        let mut entities = 0usize;
        let mut tokens = 0usize;
        for id in ids {
            let profile = profiles
                .get(*id)
                .ok_or_else(|| Error::MissingProfile(id.to_string()))?;
            entities += profile.entity_seq.len();
            tokens += corpus.sentences[index[*id]].tokens.len();
        }
        let n = ids.len();
        Ok(SideStats {
            distinct_sentences: n,
            entities,
            avg_sent_len: if n == 0 { 0.0 } else { tokens as f64 / n as f64 },
            avg_entities_per_sent: if n == 0 {
                0.0
            } else {
                entities as f64 / n as f64
            },
        })
    };

    Ok(StatsReport {
        pair_count,
        source: side(&src_ids, src, &src_index)?,
        target: side(&tgt_ids, tgt, &tgt_index)?,
        avg_overlap: if pair_count == 0 {
            0.0
        } else {
            overlap_sum / pair_count as f64
        },
        avg_sas: if pair_count == 0 {
            0.0
        } else {
            sas_sum / pair_count as f64
        },
        norm_mode,
    })
}

/// Aligned-column text rendering of a stats report.
pub fn render_stats_table(report: &StatsReport) -> String {
    let norm = match report.norm_mode {
        NormMode::Tokens => "tokens",
        NormMode::Entities => "entities",
        NormMode::None => "none",
    };
    let rows: Vec<(String, String, String)> = vec![
        (
            "# Sent Pairs".into(),
            report.pair_count.to_string(),
            String::new(),
        ),
        (
            "# Scene Entities".into(),
            report.source.entities.to_string(),
            report.target.entities.to_string(),
        ),
        (
            "Avg. Sent Len".into(),
            format!("{:.2}", report.source.avg_sent_len),
            format!("{:.2}", report.target.avg_sent_len),
        ),
        (
            "Avg. # Scene Ent. / Sent".into(),
            format!("{:.2}", report.source.avg_entities_per_sent),
            format!("{:.2}", report.target.avg_entities_per_sent),
        ),
        (
            "Avg. # Scene Ent. overlap".into(),
            format!("{:.2}", report.avg_overlap),
            String::new(),
        ),
        (
            format!("Avg. SAS (norm={norm})"),
            format!("{:.4}", report.avg_sas),
            String::new(),
        ),
    ];
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let src_w = rows
        .iter()
        .map(|r| r.1.len())
        .max()
        .unwrap_or(0)
        .max("source".len());
    let mut out = format!(
        "{:label_w$}  {:>src_w$}  {}\n",
        "", "source", "target"
    );
    for (label, s, t) in rows {
        out.push_str(&format!("{label:label_w$}  {s:>src_w$}  {t}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, StyleLabel};
    use crate::scenegraph::profile_from_entities;

    fn profile(id: &str, entities: &[&str]) -> EntityProfile {
        EntityProfile::new(id, entities.iter().map(|e| e.to_string()).collect())
    }

    fn params(strategy: Strategy, k: usize, p: f64) -> AlignmentParams {
        AlignmentParams {
            strategy,
            k,
            p,
            beta: 1.0,
            norm_mode: NormMode::Tokens,
            seed: 7,
        }
    }

    fn corpus(style: &str, rows: &[(&str, &str, &[&str])]) -> Corpus {
        let label = StyleLabel::new(style);
        let sentences = rows
            .iter()
            .map(|(id, text, entities)| {
                let mut s = Sentence::new(*id, label.clone(), *text);
                s.entities = Some(entities.iter().map(|e| e.to_string()).collect());
                s
            })
            .collect();
        Corpus::new(label, sentences).unwrap()
    }

    fn profiles_of(corpora: &[&Corpus]) -> HashMap<String, EntityProfile> {
        let mut map = HashMap::new();
        for c in corpora {
            for s in &c.sentences {
                map.insert(
                    s.id.clone(),
                    profile_from_entities(&s.id, s.entities.as_ref().unwrap()),
                );
            }
        }
        map
    }

    #[test]
    fn sas_hand_example() {
        let p = params(Strategy::SembSas, 2, 0.0);
        let b = sas(
            &profile("s", &["food", "service"]),
            &profile("t", &["food", "staff"]),
            8,
            &p,
        );
        assert_eq!(b.overlap, 1);
        assert!((b.precision - 0.5).abs() < 1e-15);
        assert!((b.recall - 0.5).abs() < 1e-15);
        assert!((b.f_beta - 0.5).abs() < 1e-15);
        assert_eq!(b.norm_len, 8);
        assert!((b.sas - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn sas_identity_entities() {
        let p = params(Strategy::SembSas, 2, 0.0);
        let b = sas(&profile("s", &["food"]), &profile("t", &["food"]), 5, &p);
        assert!((b.f_beta - 1.0).abs() < 1e-15);
        assert!((b.sas - 0.2).abs() < 1e-15);
    }

    #[test]
    fn sas_unnormalized_f1_is_symmetric() {
        let mut p = params(Strategy::SembSas, 2, 0.0);
        p.norm_mode = NormMode::None;
        let a = profile("a", &["food", "staff", "price"]);
        let b = profile("b", &["staff", "patio"]);
        let ab = sas(&a, &b, 7, &p);
        let ba = sas(&b, &a, 3, &p);
        // Swapping roles swaps P and R; F1 and the unnormalized score match.
        assert!((ab.precision - ba.recall).abs() < 1e-15);
        assert!((ab.recall - ba.precision).abs() < 1e-15);
        assert!((ab.sas - ba.sas).abs() < 1e-15);
    }

    #[test]
    fn sas_disjoint_and_degenerate() {
        let p = params(Strategy::SembSas, 2, 0.0);
        assert_eq!(
            sas(&profile("s", &["a"]), &profile("t", &["b"]), 4, &p).sas,
            0.0
        );
        assert_eq!(sas(&profile("s", &[]), &profile("t", &["b"]), 4, &p).sas, 0.0);
        assert_eq!(sas(&profile("s", &["a"]), &profile("t", &[]), 4, &p).sas, 0.0);
    }

    fn small_corpora() -> (Corpus, Corpus) {
        let src = corpus(
            "neg",
            &[
                ("neg-0", "the food was bad", &["food"]),
                ("neg-1", "the staff was rude to us", &["staff"]),
                ("neg-2", "awful prices and service", &["price", "service"]),
            ],
        );
        let tgt = corpus(
            "pos",
            &[
                ("pos-0", "the food was great", &["food"]),
                ("pos-1", "lovely staff and food", &["staff", "food"]),
                ("pos-2", "prices are fair", &["price"]),
                ("pos-3", "sunny patio seating", &["patio", "seating"]),
            ],
        );
        (src, tgt)
    }

    #[test]
    fn rd_is_reproducible_and_k_bounded() {
        let (src, tgt) = small_corpora();
        let profiles = profiles_of(&[&src, &tgt]);
        let p = params(Strategy::Rd, 2, 0.0);
        let a = mine(&src, &tgt, &profiles, None, &p).unwrap();
        let b = mine(&src, &tgt, &profiles, None, &p).unwrap();
        assert_eq!(a.groups, b.groups);
        assert!(a.groups.iter().all(|g| g.candidates.len() == 2));
        for g in &a.groups {
            assert_eq!(g.expert_id, g.candidates[0].target_id);
        }
    }

    #[test]
    fn semb_keeps_top_k_and_picks_highest_cosine() {
        let (src, tgt) = small_corpora();
        let profiles = profiles_of(&[&src, &tgt]);
        let provider = EmbeddingProvider::deterministic_test(32);
        let p = params(Strategy::Semb, 2, 0.0);
        let out = mine(&src, &tgt, &profiles, Some(&provider), &p).unwrap();
        assert_eq!(out.groups.len(), 3);
        assert_eq!(out.dropped_sources, 0);
        for g in &out.groups {
            assert_eq!(g.candidates.len(), 2);
            assert!(g.candidates[0].cosine >= g.candidates[1].cosine);
            assert_eq!(g.expert_id, g.candidates[0].target_id);
            assert_eq!(g.amateur_ids, vec![g.candidates[1].target_id.clone()]);
        }
    }

    #[test]
    fn semb_sas_threshold_extremes() {
        let (src, tgt) = small_corpora();
        let profiles = profiles_of(&[&src, &tgt]);
        let provider = EmbeddingProvider::deterministic_test(32);

        let loose = mine(
            &src,
            &tgt,
            &profiles,
            Some(&provider),
            &params(Strategy::SembSas, 3, 0.0),
        )
        .unwrap();
        let strict = mine(
            &src,
            &tgt,
            &profiles,
            Some(&provider),
            &params(Strategy::SembSas, 3, 1.0),
        )
        .unwrap();

        // p=1.0 is stricter than any normalized score once tgt_len >= 2.
        let loose_pairs: HashSet<(String, String)> = loose
            .groups
            .iter()
            .flat_map(|g| {
                g.candidates
                    .iter()
                    .map(|c| (g.source_id.clone(), c.target_id.clone()))
            })
            .collect();
        let strict_pairs: HashSet<(String, String)> = strict
            .groups
            .iter()
            .flat_map(|g| {
                g.candidates
                    .iter()
                    .map(|c| (g.source_id.clone(), c.target_id.clone()))
            })
            .collect();
        assert!(strict_pairs.is_subset(&loose_pairs));
        assert!(strict_pairs.is_empty());
        assert_eq!(strict.dropped_sources, 3);
    }

    #[test]
    fn semb_sas_expert_maximizes_sas() {
        let (src, tgt) = small_corpora();
        let profiles = profiles_of(&[&src, &tgt]);
        let provider = EmbeddingProvider::deterministic_test(32);
        let out = mine(
            &src,
            &tgt,
            &profiles,
            Some(&provider),
            &params(Strategy::SembSas, 4, 0.0),
        )
        .unwrap();
        for g in &out.groups {
            let expert_sas = g
                .candidates
                .iter()
                .find(|c| c.target_id == g.expert_id)
                .unwrap()
                .sas
                .unwrap();
            assert!(g.candidates.iter().all(|c| c.sas.unwrap() <= expert_sas));
        }
    }

    #[test]
    fn mine_missing_profile_errors() {
        let (src, tgt) = small_corpora();
        let mut profiles = profiles_of(&[&src, &tgt]);
        profiles.remove("pos-2");
        let provider = EmbeddingProvider::deterministic_test(16);
        let err = mine(
            &src,
            &tgt,
            &profiles,
            Some(&provider),
            &params(Strategy::SembSas, 2, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingProfile(id) if id == "pos-2"));
    }

    #[test]
    fn export_pairs_expert_first_and_separators() {
        let (src, tgt) = small_corpora();
        let profiles = profiles_of(&[&src, &tgt]);
        let provider = EmbeddingProvider::deterministic_test(32);
        let out = mine(
            &src,
            &tgt,
            &profiles,
            Some(&provider),
            &params(Strategy::Semb, 2, 0.0),
        )
        .unwrap();
        let pairs = export_pairs(&out.groups, &src, &tgt, "<s>", "</s>").unwrap();
        assert_eq!(pairs.len(), 6);
        for chunk in pairs.chunks(2) {
            assert!(chunk[0].is_expert);
            assert!(!chunk[1].is_expert);
        }
        let first = &pairs[0];
        assert_eq!(
            first.concatenated.matches("</s><s>").count(),
            1,
            "exactly one separator pair"
        );
        assert!(first
            .concatenated
            .starts_with(&format!("{}</s><s>", first.source_text)));
    }

    #[test]
    fn export_pairs_dangling_id() {
        let (src, tgt) = small_corpora();
        let group = ParallelGroup {
            source_id: "nope".into(),
            candidates: vec![],
            expert_id: "pos-0".into(),
            amateur_ids: vec![],
            params: params(Strategy::Semb, 1, 0.0),
        };
        let err = export_pairs(&[group], &src, &tgt, "<s>", "</s>").unwrap_err();
        assert_eq!(err.to_string(), "dangling id nope");
    }

    #[test]
    fn export_pairs_empty() {
        let (src, tgt) = small_corpora();
        assert!(export_pairs(&[], &src, &tgt, "<s>", "</s>")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn stats_average_sas() {
        let (src, tgt) = small_corpora();
        let profiles = profiles_of(&[&src, &tgt]);
        let p = params(Strategy::SembSas, 1, 0.0);
        let mk = |source_id: &str, target_id: &str, s: f64| ParallelGroup {
            source_id: source_id.into(),
            candidates: vec![Candidate {
                target_id: target_id.into(),
                cosine: 0.9,
                sas: Some(s),
            }],
            expert_id: target_id.into(),
            amateur_ids: vec![],
            params: p,
        };
        let one = dataset_stats(&[mk("neg-0", "pos-0", 0.0625)], &src, &tgt, &profiles).unwrap();
        assert!((one.avg_sas - 0.0625).abs() < 1e-15);
        assert_eq!(one.pair_count, 1);

        let two = dataset_stats(
            &[mk("neg-0", "pos-0", 0.1), mk("neg-1", "pos-1", 0.3)],
            &src,
            &tgt,
            &profiles,
        )
        .unwrap();
        assert!((two.avg_sas - 0.2).abs() < 1e-15);
    }
}
