//! Imitation-learning distances, contrastive loss, and self-critic
//! advantage.
//!
//! A candidate generation is scored against the expert demonstration and the
//! amateur demonstrations through `psi = d_sem + d_psv`, where `d_sem` is
//! negative embedding cosine and `d_psv = alpha * d_order + (1 - alpha) *
//! d_exist` over scene-entity profiles. The contrastive loss is the hinge
//! `max(psi_expert - psi_amateur + delta, 0)`; the advantage compares a
//! sampled generation's loss against the greedy baseline, skipping updates
//! whose greedy loss is already below a safety threshold. Everything here is
//! pure; model parameters and decoding live with the caller.

pub mod serve;

use serde::{Deserialize, Serialize};

use crate::embed::{cosine, EmbeddingVector};
use crate::scenegraph::EntityProfile;
use crate::Result;

/// Aggregation of per-amateur distances into one scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AmateurAggregation {
    #[default]
    Mean,
    Max,
    Min,
}

/// Which entity-existence distance to use. The symmetric difference is the
/// default; the asymmetric variant counts only demonstration entities
/// missing from the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExistVariant {
    #[default]
    Symmetric,
    MissingFromCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Weight of the order distance within scene preservation.
    pub alpha: f64,
    /// Contrastive margin.
    pub delta: f64,
    /// Greedy losses at or below this skip the update entirely.
    pub j_safe: f64,
    #[serde(default)]
    pub amateur_aggregation: AmateurAggregation,
    #[serde(default)]
    pub exist_variant: ExistVariant,
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(crate::Error::InvalidParam(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.delta < 0.0 {
            return Err(crate::Error::InvalidParam(format!(
                "delta must be >= 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            alpha: 0.4,
            delta: 1.0,
            j_safe: 0.8,
            amateur_aggregation: AmateurAggregation::Mean,
            exist_variant: ExistVariant::Symmetric,
        }
    }
}

/// Semantic coherence distance: negative cosine of the two sentence
/// embeddings, in `[-1, 1]`.
pub fn d_sem(candidate_emb: &EmbeddingVector, demo_emb: &EmbeddingVector) -> Result<f64> {
    Ok(-cosine(candidate_emb, demo_emb)?)
}

/// Entity-order distance: Levenshtein over whole entity strings with
/// unit-cost insert/delete/substitute.
pub fn d_order(a: &EntityProfile, b: &EntityProfile) -> usize {
    let xs = &a.entity_seq;
    let ys = &b.entity_seq;
    if xs.is_empty() {
        return ys.len();
    }
    if ys.is_empty() {
        return xs.len();
    }
    let mut row: Vec<usize> = (0..=ys.len()).collect();
    for (i, x) in xs.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in ys.iter().enumerate() {
            let cost = if x == y { diag } else { diag + 1 };
            let next = cost.min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[ys.len()]
}

/// Entity-existence distance: Hamming distance between one-hot membership
/// vectors over the sorted union of both entity sets, which equals the
/// cardinality of the symmetric difference.
pub fn d_exist(a: &EntityProfile, b: &EntityProfile) -> usize {
    d_exist_with(a, b, ExistVariant::Symmetric)
}

pub fn d_exist_with(a: &EntityProfile, b: &EntityProfile, variant: ExistVariant) -> usize {
    let sa = a.entity_set();
    let sb = b.entity_set();
    let mut union: Vec<&str> = sa.union(&sb).copied().collect();
    union.sort_unstable();
    let mut dist = 0usize;
    for e in union {
        let in_a = sa.contains(e);
        let in_b = sb.contains(e);
        match variant {
            ExistVariant::Symmetric => {
                if in_a != in_b {
                    dist += 1;
                }
            }
            ExistVariant::MissingFromCandidate => {
                if in_b && !in_a {
                    dist += 1;
                }
            }
        }
    }
    dist
}

/// A candidate/demonstration ready for distance computation.
#[derive(Debug, Clone)]
pub struct RewardPayload {
    pub emb: EmbeddingVector,
    pub profile: EntityProfile,
}

/// Distance components of one candidate-demonstration comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBreakdown {
    pub d_sem: f64,
    pub d_order: usize,
    pub d_exist: usize,
    pub d_psv: f64,
    pub psi: f64,
}

fn components(
    candidate: &RewardPayload,
    demo: &RewardPayload,
    params: &RewardParams,
) -> Result<ComponentBreakdown> {
    let sem = d_sem(&candidate.emb, &demo.emb)?;
    let order = d_order(&candidate.profile, &demo.profile);
    let exist = d_exist_with(&candidate.profile, &demo.profile, params.exist_variant);
    let psv = params.alpha * order as f64 + (1.0 - params.alpha) * exist as f64;
    Ok(ComponentBreakdown {
        d_sem: sem,
        d_order: order,
        d_exist: exist,
        d_psv: psv,
        psi: sem + psv,
    })
}

/// Everything behind one contrastive-loss evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Candidate-vs-expert components.
    pub d_sem: f64,
    pub d_order: usize,
    pub d_exist: usize,
    pub d_psv: f64,
    /// psi+ (candidate vs expert).
    pub psi: f64,
    /// Candidate-vs-amateur components, one per amateur.
    pub amateurs: Vec<ComponentBreakdown>,
    /// Aggregated psi- over amateurs (0 when there are none).
    pub psi_amateur: f64,
    /// Set when the amateur list was empty and psi- fell back to 0.
    pub amateurs_empty: bool,
    pub j_il: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advantage: Option<f64>,
    pub skipped: bool,
}

/// Contrastive imitation loss `max(psi+ - psi_bar- + delta, 0)` with the
/// full component breakdown.
///
/// An empty amateur list is accepted: `psi_bar-` is then 0 and the result is
/// flagged via `amateurs_empty`.
pub fn j_il(
    candidate: &RewardPayload,
    expert: &RewardPayload,
    amateurs: &[RewardPayload],
    params: &RewardParams,
) -> Result<RewardBreakdown> {
    params.validate()?;
    let plus = components(candidate, expert, params)?;
    let minus: Vec<ComponentBreakdown> = amateurs
        .iter()
        .map(|a| components(candidate, a, params))
        .collect::<Result<_>>()?;
    let psi_amateur = if minus.is_empty() {
        0.0
    } else {
        let psis = minus.iter().map(|c| c.psi);
        match params.amateur_aggregation {
            AmateurAggregation::Mean => psis.sum::<f64>() / minus.len() as f64,
            AmateurAggregation::Max => psis.fold(f64::NEG_INFINITY, f64::max),
            AmateurAggregation::Min => psis.fold(f64::INFINITY, f64::min),
        }
    };
    Ok(RewardBreakdown {
        d_sem: plus.d_sem,
        d_order: plus.d_order,
        d_exist: plus.d_exist,
        d_psv: plus.d_psv,
        psi: plus.psi,
        amateurs_empty: minus.is_empty(),
        amateurs: minus,
        psi_amateur,
        j_il: (plus.psi - psi_amateur + params.delta).max(0.0),
        advantage: None,
        skipped: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advantage: Option<f64>,
    pub skipped: bool,
}

/// Self-critic advantage with the safe-skip rule: when the greedy loss is
/// already at or below `j_safe` the step is skipped and no advantage is
/// produced; otherwise the advantage is `sample_j - greedy_j`. The policy
/// gradient itself is the caller's business.
pub fn advantage(sample_j: f64, greedy_j: f64, params: &RewardParams) -> AdvantageResult {
    assert!(
        sample_j >= 0.0 && greedy_j >= 0.0,
        "contrastive losses are non-negative"
    );
    if greedy_j <= params.j_safe {
        AdvantageResult {
            advantage: None,
            skipped: true,
        }
    } else {
        AdvantageResult {
            advantage: Some(sample_j - greedy_j),
            skipped: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::deterministic_embedding;
    use proptest::prelude::*;

    fn profile(entities: &[&str]) -> EntityProfile {
        EntityProfile::new("p", entities.iter().map(|e| e.to_string()).collect())
    }

    fn unit(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec())
            .unwrap()
            .into_normalized()
            .unwrap()
    }

    fn payload(values: &[f64], entities: &[&str]) -> RewardPayload {
        RewardPayload {
            emb: unit(values),
            profile: profile(entities),
        }
    }

    #[test]
    fn d_sem_extremes() {
        let v = unit(&[0.6, 0.8]);
        let opposite = unit(&[-0.6, -0.8]);
        let orthogonal = unit(&[0.8, -0.6]);
        assert!((d_sem(&v, &v).unwrap() + 1.0).abs() < 1e-12);
        assert!((d_sem(&v, &opposite).unwrap() - 1.0).abs() < 1e-12);
        assert!(d_sem(&v, &orthogonal).unwrap().abs() < 1e-12);
    }

    #[test]
    fn d_order_reference_traces() {
        assert_eq!(d_order(&profile(&["a", "b"]), &profile(&["a", "b"])), 0);
        assert_eq!(
            d_order(
                &profile(&["food", "service", "price"]),
                &profile(&["service", "price"])
            ),
            1
        );
        assert_eq!(d_order(&profile(&["a", "b"]), &profile(&["b", "a"])), 2);
        assert_eq!(d_order(&profile(&[]), &profile(&["x", "y", "z"])), 3);
    }

    #[test]
    fn d_exist_symmetric_difference() {
        assert_eq!(d_exist(&profile(&["a", "b"]), &profile(&["a", "b"])), 0);
        assert_eq!(d_exist(&profile(&["a", "b"]), &profile(&["b", "c"])), 2);
        assert_eq!(d_exist(&profile(&[]), &profile(&["x", "y"])), 2);
    }

    #[test]
    fn d_exist_asymmetric_variant() {
        let a = profile(&["a", "b"]);
        let b = profile(&["b", "c", "d"]);
        assert_eq!(d_exist_with(&a, &b, ExistVariant::MissingFromCandidate), 2);
        assert_eq!(d_exist_with(&b, &a, ExistVariant::MissingFromCandidate), 1);
    }

    fn margin_params(delta: f64) -> RewardParams {
        RewardParams {
            alpha: 0.4,
            delta,
            j_safe: 0.6,
            amateur_aggregation: AmateurAggregation::Mean,
            exist_variant: ExistVariant::Symmetric,
        }
    }

    #[test]
    fn j_il_margin_only_when_expert_equals_amateur() {
        let candidate = payload(&[1.0, 0.0, 0.2], &["food"]);
        let demo = payload(&[0.4, 0.3, 0.1], &["food", "staff"]);
        let breakdown = j_il(&candidate, &demo, std::slice::from_ref(&demo), &margin_params(0.5)).unwrap();
        assert!((breakdown.j_il - 0.5).abs() < 1e-12);
        assert_eq!(breakdown.amateurs.len(), 1);
        assert!(!breakdown.amateurs_empty);
    }

    #[test]
    fn j_il_direct_arithmetic() {
        // psi+ = -0.7, psi- = 1.3, delta = 0.5 -> max(-1.5, 0) = 0.
        let p = margin_params(0.5);
        assert_eq!((-0.7f64 - 1.3 + 0.5).max(0.0), 0.0);
        // psi+ = 0.8, psi- = 0.5, delta = 0.2 -> 0.5.
        assert!(((0.8f64 - 0.5 + 0.2).max(0.0) - 0.5).abs() < 1e-12);
        // End-to-end with constructed payloads: candidate aligned with the
        // expert embedding, orthogonal to the amateur, shared entities with
        // the expert only.
        let candidate = payload(&[1.0, 0.0, 0.0], &["food"]);
        let expert = payload(&[1.0, 0.0, 0.0], &["food"]);
        let amateur = payload(&[0.0, 1.0, 0.0], &["patio", "menu"]);
        let b = j_il(&candidate, &expert, &[amateur], &p).unwrap();
        // psi+ = -1; psi- = 0 + 0.4*2 + 0.6*3 = 2.6; j = max(-1 - 2.6 + .5, 0) = 0
        assert!((b.psi + 1.0).abs() < 1e-12);
        assert!((b.psi_amateur - 2.6).abs() < 1e-12);
        assert_eq!(b.j_il, 0.0);
    }

    #[test]
    fn j_il_empty_amateurs_flagged() {
        let candidate = payload(&[1.0, 0.0, 0.0], &["food"]);
        let expert = payload(&[0.0, 1.0, 0.0], &["food"]);
        let b = j_il(&candidate, &expert, &[], &margin_params(0.5)).unwrap();
        assert!(b.amateurs_empty);
        assert_eq!(b.psi_amateur, 0.0);
        assert!((b.j_il - (b.psi + 0.5).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn amateur_aggregation_modes() {
        let candidate = payload(&[1.0, 0.0, 0.0], &["a"]);
        let expert = payload(&[1.0, 0.1, 0.0], &["a"]);
        let amateurs = vec![
            payload(&[0.0, 1.0, 0.0], &["a"]),
            payload(&[1.0, 0.0, 0.0], &["b", "c"]),
        ];
        let mut p = margin_params(0.0);
        let psis: Vec<f64> = amateurs
            .iter()
            .map(|a| components(&candidate, a, &p).unwrap().psi)
            .collect();
        for (agg, want) in [
            (AmateurAggregation::Mean, (psis[0] + psis[1]) / 2.0),
            (AmateurAggregation::Max, psis[0].max(psis[1])),
            (AmateurAggregation::Min, psis[0].min(psis[1])),
        ] {
            p.amateur_aggregation = agg;
            let b = j_il(&candidate, &expert, &amateurs, &p).unwrap();
            assert!((b.psi_amateur - want).abs() < 1e-12);
        }
    }

    #[test]
    fn advantage_cases() {
        let p = margin_params(0.5); // j_safe = 0.6
        let skip = advantage(0.9, 0.3, &p);
        assert!(skip.skipped);
        assert!(skip.advantage.is_none());

        let run = advantage(0.3, 0.7, &p);
        assert!(!run.skipped);
        assert!((run.advantage.unwrap() + 0.4).abs() < 1e-12);

        let flat = advantage(0.9, 0.9, &p);
        assert_eq!(flat.advantage, Some(0.0));
    }

    proptest! {
        #[test]
        fn j_il_nonnegative_and_monotone_in_delta(
            seed in 0u64..300,
            delta1 in 0.0f64..2.0,
            bump in 0.0f64..2.0,
        ) {
            let words = |n: u64| -> Vec<String> {
                (0..(n % 4 + 1)).map(|i| format!("w{}", (seed + i * 7) % 11)).collect()
            };
            let emb = |salt: u64| deterministic_embedding(&words(seed + salt), 16).unwrap();
            let prof = |salt: u64| EntityProfile::new("p", words(seed * 3 + salt));
            let candidate = RewardPayload { emb: emb(1), profile: prof(1) };
            let expert = RewardPayload { emb: emb(2), profile: prof(2) };
            let amateurs = vec![
                RewardPayload { emb: emb(3), profile: prof(3) },
                RewardPayload { emb: emb(4), profile: prof(4) },
            ];
            let mut p = margin_params(delta1);
            let lo = j_il(&candidate, &expert, &amateurs, &p).unwrap();
            prop_assert!(lo.j_il >= 0.0);
            p.delta = delta1 + bump;
            let hi = j_il(&candidate, &expert, &amateurs, &p).unwrap();
            prop_assert!(hi.j_il + 1e-12 >= lo.j_il);
        }

        #[test]
        fn advantage_invariant_to_shift(
            sample in 0.0f64..3.0,
            greedy in 0.0f64..3.0,
            shift in 0.0f64..2.0,
        ) {
            let p = RewardParams { j_safe: -1.0, ..Default::default() };
            // j_safe below every loss: never skipped, so the difference is exact.
            let a = advantage(sample, greedy, &p).advantage.unwrap();
            let b = advantage(sample + shift, greedy + shift, &p).advantage.unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
