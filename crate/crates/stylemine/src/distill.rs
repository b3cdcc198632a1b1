//! Stance-salient sentence selection under a length budget.
//!
//! Per article: every sentence gets a saliency (LCS length against the title
//! plus already-selected sentences) and a cost (its token count); an exact
//! 0/1 knapsack picks the best affordable subset, the budget estimate grows
//! with the selection, and the loop repeats until the budget cap or a fixed
//! point is reached.

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::{Error, Result};

/// Length of the longest common subsequence between two token lists.
/// Quadratic DP over a rolling row.
pub fn lcs_len<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackSolution {
    /// Chosen item indices, ascending.
    pub selected: Vec<usize>,
    pub total_value: u64,
    pub total_weight: u64,
}

/// Exact 0/1 knapsack via dynamic programming with backtracking.
///
/// Ties between equal-value solutions prefer lower total weight, then the
/// lexicographically smallest index set. Weights must be >= 1.
pub fn knapsack(values: &[u64], weights: &[u64], budget: u64) -> KnapsackSolution {
    assert_eq!(values.len(), weights.len(), "values/weights length mismatch");
    assert!(weights.iter().all(|&w| w >= 1), "weights must be >= 1");

    let n = values.len();
    let w_cap = budget as usize;
    // best[i][c]: (max value, min weight at that value) over items i.., capacity c.
    // Stored flat, built from the last item backwards so reconstruction can
    // walk forward and greedily include the earliest usable item.
    let width = w_cap + 1;
    let mut best = vec![(0u64, 0u64); (n + 1) * width];
    for i in (0..n).rev() {
        for c in 0..=w_cap {
            let skip = best[(i + 1) * width + c];
            let mut entry = skip;
            if weights[i] as usize <= c {
                let sub = best[(i + 1) * width + (c - weights[i] as usize)];
                let take = (sub.0 + values[i], sub.1 + weights[i]);
                if take.0 > entry.0 || (take.0 == entry.0 && take.1 < entry.1) {
                    entry = take;
                }
            }
            best[i * width + c] = entry;
        }
    }

    let target = best[w_cap];
    let mut selected = Vec::new();
    let mut remaining = target;
    let mut c = w_cap;
    for i in 0..n {
        if remaining.0 == 0 {
            break;
        }
        if weights[i] as usize <= c {
            let sub = best[(i + 1) * width + (c - weights[i] as usize)];
            if (sub.0 + values[i], sub.1 + weights[i]) == remaining {
                selected.push(i);
                remaining = sub;
                c -= weights[i] as usize;
            }
        }
    }
    KnapsackSolution {
        selected,
        total_value: target.0,
        total_weight: target.1,
    }
}

/// Saliency/cost of one sentence in one distillation round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillItem {
    pub sentence_id: String,
    pub saliency: u64,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillPlan {
    /// Selected sentences in original article order.
    pub selected_ids: Vec<String>,
    /// Sum of saliency values at the round each sentence was selected.
    pub total_value: u64,
    pub total_cost: u64,
    /// The cap `W_max = floor(lambda * sum of costs)`.
    pub budget: u64,
    /// Number of rounds that selected at least one sentence.
    pub rounds: usize,
}

/// One round of the selection loop, for traceability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillRound {
    pub round: usize,
    /// Knapsack capacity used this round.
    pub capacity: u64,
    /// Saliency/cost of every unselected sentence entering the round.
    pub items: Vec<DistillItem>,
    /// Ids newly picked this round, ascending article order.
    pub picked_ids: Vec<String>,
    pub selected_cost_after: u64,
    pub w_distill_after: u64,
}

pub fn distill_article(title: &Sentence, article: &[Sentence], lambda: f64) -> Result<DistillPlan> {
    distill_article_with_trace(title, article, lambda).map(|(plan, _)| plan)
}

/// Full distillation loop, returning the per-round trace alongside the plan.
///
/// Saliency is recomputed every round against the title tokens concatenated
/// with already-selected sentences in selection order. The knapsack capacity
/// is the running estimate `W_distill`, clamped to the remaining budget so
/// the selection can never exceed `W_max`.
pub fn distill_article_with_trace(
    title: &Sentence,
    article: &[Sentence],
    lambda: f64,
) -> Result<(DistillPlan, Vec<DistillRound>)> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "lambda must be in (0, 1], got {lambda}"
        )));
    }
    if article.is_empty() {
        return Err(Error::InvalidInput("article has no sentences".into()));
    }

    let title_tokens = title.normalized_tokens();
    let sent_tokens: Vec<Vec<String>> = article.iter().map(|s| s.normalized_tokens()).collect();
    for (s, toks) in article.iter().zip(&sent_tokens) {
        if toks.is_empty() {
            return Err(Error::InvalidInput(format!(
                "sentence {} has no tokens",
                s.id
            )));
        }
    }
    let costs: Vec<u64> = sent_tokens.iter().map(|t| t.len() as u64).collect();
    let total_cost: u64 = costs.iter().sum();
    let budget = (lambda * total_cost as f64).floor() as u64;

    let mut selected: Vec<usize> = Vec::new(); // selection order
    let mut in_set = vec![false; article.len()];
    let mut selected_cost = 0u64;
    let mut total_value = 0u64;
    let mut w_distill = title_tokens.len() as u64;
    let mut trace = Vec::new();
    let mut rounds = 0usize;

    while w_distill <= budget {
        let mut reference = title_tokens.clone();
        for &i in &selected {
            reference.extend_from_slice(&sent_tokens[i]);
        }

        let unselected: Vec<usize> = (0..article.len()).filter(|&i| !in_set[i]).collect();
        let items: Vec<DistillItem> = unselected
            .iter()
            .map(|&i| DistillItem {
                sentence_id: article[i].id.clone(),
                saliency: lcs_len(&sent_tokens[i], &reference) as u64,
                cost: costs[i],
            })
            .collect();

        let capacity = w_distill.min(budget - selected_cost);
        let solution = knapsack(
            &items.iter().map(|it| it.saliency).collect::<Vec<_>>(),
            &items.iter().map(|it| it.cost).collect::<Vec<_>>(),
            capacity,
        );
        if solution.selected.is_empty() {
            break; // fixed point: nothing affordable or nothing salient
        }

        let picked: Vec<usize> = solution.selected.iter().map(|&j| unselected[j]).collect();
        for &i in &picked {
            in_set[i] = true;
            selected.push(i);
        }
        selected_cost += solution.total_weight;
        total_value += solution.total_value;
        w_distill = title_tokens.len() as u64 + selected_cost;
        rounds += 1;
        trace.push(DistillRound {
            round: rounds,
            capacity,
            items,
            picked_ids: picked.iter().map(|&i| article[i].id.clone()).collect(),
            selected_cost_after: selected_cost,
            w_distill_after: w_distill,
        });
    }

    let mut ordered: Vec<usize> = selected.clone();
    ordered.sort_unstable();
    Ok((
        DistillPlan {
            selected_ids: ordered.iter().map(|&i| article[i].id.clone()).collect(),
            total_value,
            total_cost: selected_cost,
            budget,
            rounds,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::StyleLabel;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn sent(id: &str, text: &str) -> Sentence {
        Sentence::new(id, StyleLabel::new("x"), text)
    }

    #[test]
    fn lcs_examples() {
        let a = toks(&["the", "cat", "sat"]);
        let b = toks(&["the", "dog", "sat", "here"]);
        assert_eq!(lcs_len(&a, &b), 2);
        assert_eq!(lcs_len(&a, &a), 3);
        assert_eq!(lcs_len(&a, &toks(&["x", "y"])), 0);
        assert_eq!(lcs_len::<String, String>(&[], &[]), 0);
    }

    #[test]
    fn knapsack_hand_example() {
        let sol = knapsack(&[3, 4, 5], &[2, 3, 4], 5);
        assert_eq!(sol.selected, vec![0, 1]);
        assert_eq!(sol.total_value, 7);
        assert_eq!(sol.total_weight, 5);
    }

    #[test]
    fn knapsack_degenerate() {
        assert_eq!(knapsack(&[5], &[3], 0).selected, Vec::<usize>::new());
        assert_eq!(knapsack(&[5], &[10], 4).total_value, 0);
        assert_eq!(knapsack(&[], &[], 9).total_value, 0);
    }

    #[test]
    fn knapsack_prefers_lower_weight_then_lex() {
        // Items 0 and 1 both give value 5; weight 2 beats weight 3.
        let sol = knapsack(&[5, 5], &[3, 2], 3);
        assert_eq!(sol.selected, vec![1]);
        // Same value, same weight: lexicographically smallest index set.
        let sol = knapsack(&[5, 5], &[2, 2], 2);
        assert_eq!(sol.selected, vec![0]);
        // Zero-value items are never picked (min-weight tie-break).
        let sol = knapsack(&[4, 0], &[2, 1], 5);
        assert_eq!(sol.selected, vec![0]);
    }

    /// Exhaustive oracle used by the property test: scan all subsets,
    /// pick by (value desc, weight asc, index set lex asc).
    fn brute_force(values: &[u64], weights: &[u64], budget: u64) -> KnapsackSolution {
        let n = values.len();
        let mut best: Option<(u64, u64, Vec<usize>)> = None;
        for mask in 0u32..(1 << n) {
            let mut v = 0;
            let mut w = 0;
            let mut idx = Vec::new();
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    v += values[i];
                    w += weights[i];
                    idx.push(i);
                }
            }
            if w > budget {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bv, bw, bidx)) => {
                    v > *bv || (v == *bv && (w < *bw || (w == *bw && idx < *bidx)))
                }
            };
            if better {
                best = Some((v, w, idx));
            }
        }
        let (total_value, total_weight, selected) = best.unwrap();
        KnapsackSolution {
            selected,
            total_value,
            total_weight,
        }
    }

    proptest! {
        #[test]
        fn knapsack_matches_enumeration(
            items in proptest::collection::vec((0u64..20, 1u64..12), 1..10),
            budget in 0u64..40,
        ) {
            let values: Vec<u64> = items.iter().map(|(v, _)| *v).collect();
            let weights: Vec<u64> = items.iter().map(|(_, w)| *w).collect();
            let got = knapsack(&values, &weights, budget);
            let want = brute_force(&values, &weights, budget);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn lcs_properties(
            a in proptest::collection::vec("[a-c]", 0..10),
            b in proptest::collection::vec("[a-c]", 0..10),
            extra in "[a-c]",
        ) {
            let base = lcs_len(&a, &b);
            prop_assert_eq!(base, lcs_len(&b, &a));
            prop_assert_eq!(lcs_len(&a, &a), a.len());
            let mut longer = a.clone();
            longer.push(extra);
            prop_assert!(lcs_len(&longer, &b) >= base);
        }
    }

    #[test]
    fn single_sentence_identical_to_title() {
        let title = sent("t", "senate passes budget bill");
        let article = vec![sent("a0", "senate passes budget bill")];
        let plan = distill_article(&title, &article, 1.0).unwrap();
        assert_eq!(plan.selected_ids, vec!["a0"]);
        assert_eq!(plan.rounds, 1);
        assert_eq!(plan.total_cost, 4);
        assert!(plan.total_cost <= plan.budget);
    }

    #[test]
    fn tiny_lambda_never_enters_loop() {
        let title = sent("t", "a very long headline about events");
        let article = vec![sent("a0", "short line"), sent("a1", "another line")];
        // W_max = floor(0.25 * 4) = 1 < |title| = 6.
        let plan = distill_article(&title, &article, 0.25).unwrap();
        assert!(plan.selected_ids.is_empty());
        assert_eq!(plan.rounds, 0);
        assert_eq!(plan.total_value, 0);
    }

    #[test]
    fn lambda_out_of_range_errors() {
        let title = sent("t", "x");
        let article = vec![sent("a0", "y")];
        assert!(distill_article(&title, &article, 0.0).is_err());
        assert!(distill_article(&title, &article, 1.5).is_err());
    }

    #[test]
    fn selection_grows_and_budget_holds() {
        let title = sent("t", "city council approves new park funding");
        let article = vec![
            sent("a0", "the council approves park funding for the city"),
            sent("a1", "local residents welcomed the new park"),
            sent("a2", "funding comes from the city budget"),
            sent("a3", "weather stayed dry all week"),
            sent("a4", "council members debated for hours"),
        ];
        let (plan, trace) = distill_article_with_trace(&title, &article, 0.6).unwrap();
        assert!(plan.rounds <= article.len());
        let mut prev = 0;
        for round in &trace {
            assert!(round.selected_cost_after <= plan.budget);
            assert!(!round.picked_ids.is_empty());
            assert!(round.selected_cost_after >= prev);
            prev = round.selected_cost_after;
        }
        assert!(plan.total_cost <= plan.budget);
        // selected_ids are in article order
        let positions: Vec<usize> = plan
            .selected_ids
            .iter()
            .map(|id| article.iter().position(|s| &s.id == id).unwrap())
            .collect();
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        assert_eq!(positions, sorted);
    }

    proptest! {
        // Random articles: cost cap and round bound hold everywhere.
        #[test]
        fn distill_invariants(
            sentences in proptest::collection::vec(
                proptest::collection::vec("[a-e]{1,4}", 1..8), 1..7),
            title_words in proptest::collection::vec("[a-e]{1,4}", 1..6),
            lambda_pct in 1u32..=100,
        ) {
            let style = StyleLabel::new("x");
            let title = Sentence::new("t", style.clone(), title_words.join(" "));
            let article: Vec<Sentence> = sentences
                .iter()
                .enumerate()
                .map(|(i, words)| Sentence::new(format!("a{i}"), style.clone(), words.join(" ")))
                .collect();
            let lambda = lambda_pct as f64 / 100.0;
            let (plan, trace) = distill_article_with_trace(&title, &article, lambda).unwrap();
            prop_assert!(plan.total_cost <= plan.budget);
            prop_assert!(plan.rounds <= article.len());
            let mut seen = std::collections::HashSet::new();
            for id in &plan.selected_ids {
                prop_assert!(seen.insert(id.clone()), "duplicate selection");
            }
            for round in &trace {
                prop_assert!(round.selected_cost_after <= plan.budget);
            }
        }
    }
}
