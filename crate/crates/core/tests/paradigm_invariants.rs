use proptest::prelude::*;

use mnemos::paradigms::{run_paradigm, BudgetGuard, EngineRun, Paradigm};
use mnemos::simenv::{gen_corpus, Corpus};
use mnemos::store::Memory;

fn corpus_and_order() -> impl Strategy<Value = (Corpus, Vec<usize>)> {
    (1usize..12, 1usize..8, any::<u64>())
        .prop_flat_map(|(docs, facts, seed)| (Just((docs, facts, seed)), 1..=facts))
        .prop_flat_map(|((docs, facts, seed), qpd)| {
            let corpus = gen_corpus(docs, facts, qpd, seed).unwrap();
            let n = corpus.questions.len();
            (Just(corpus), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
}

fn both(corpus: &Corpus, order: &[usize], budget: u32, guard: BudgetGuard) -> (EngineRun, EngineRun) {
    (
        run_paradigm(Paradigm::Stone, corpus, order, budget, guard).unwrap(),
        run_paradigm(Paradigm::ExtractThenStore, corpus, order, budget, guard).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stone_never_needs_more_retrievals((corpus, order) in corpus_and_order(), strict in any::<bool>()) {
        // With a budget that never binds, both engines answer everything and
        // STONE retrieves at most as often.
        let guard = if strict { BudgetGuard::Strict } else { BudgetGuard::Literal };
        let (stone, ets) = both(&corpus, &order, order.len() as u32 + 1, guard);
        prop_assert_eq!(stone.metrics.correct(), order.len());
        prop_assert_eq!(ets.metrics.correct(), order.len());
        prop_assert!(stone.metrics.retrievals() <= ets.metrics.retrievals());
        prop_assert_eq!(stone.metrics.retrievals() as usize, corpus.docs.len());
        prop_assert_eq!(ets.metrics.retrievals() as usize, order.len());
    }

    #[test]
    fn prefix_dominance_under_any_budget((corpus, order) in corpus_and_order(), budget in 0u32..40) {
        let (stone, ets) = both(&corpus, &order, budget, BudgetGuard::Literal);
        for (s, e) in stone.metrics.records.iter().zip(&ets.metrics.records) {
            prop_assert!(s.cumulative_correct >= e.cumulative_correct);
        }
    }

    #[test]
    fn storage_and_budget_accounting((corpus, order) in corpus_and_order(), budget in 0u32..40, strict in any::<bool>()) {
        let guard = if strict { BudgetGuard::Strict } else { BudgetGuard::Literal };
        let (stone, ets) = both(&corpus, &order, budget, guard);
        // Raw storage keeps exactly what was retrieved.
        prop_assert_eq!(stone.store.len(), stone.retrieved.len());
        for (entry, exp) in stone.store.entries().iter().zip(&stone.retrieved) {
            prop_assert!(matches!(entry.memory(), Memory::Raw(e) if e == exp));
        }
        // Extracts are subsets of what was retrieved for them.
        for (entry, exp) in ets.store.entries().iter().zip(&ets.retrieved) {
            prop_assert!(matches!(entry.memory(), Memory::Extracted(f) if f.is_subset_of(exp)));
        }
        for run in [&stone, &ets] {
            let cap = if strict { budget } else { budget + 1 };
            prop_assert!(run.metrics.retrievals() <= u64::from(cap));
            for r in &run.metrics.records {
                prop_assert_eq!(r.budget_remaining, i64::from(budget) - r.retrievals as i64);
                prop_assert_eq!(r.store_size_units, run.store.entries()[..r.retrievals as usize].iter().map(|e| e.size_units()).sum::<u64>());
            }
        }
    }
}
