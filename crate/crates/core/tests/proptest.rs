use std::collections::{BTreeMap, BTreeSet};

use mcsma::analysis::*;
use mcsma::model::{resolve_slot, ChannelId, SuId};
use proptest::prelude::*;

/// Columns of raw weights; the last entry of each column is the silence share.
fn matrix() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(n, m)| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, n + 1), m),
        )
    })
}

fn normalise(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    raw.iter()
        .map(|w| {
            let total: f64 = w.iter().sum::<f64>().max(1e-12);
            w[..w.len() - 1].iter().map(|x| x / total).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_enumeration((n, raw) in matrix()) {
        let p = AccessMatrix::from_rows(n, normalise(&raw)).unwrap();
        let formula = expected_successes(&p);
        let brute = enumerate_expected_successes(&p).unwrap();
        prop_assert!((formula - brute).abs() <= 1e-12 * formula.abs().max(1.0), "{formula} vs {brute}");
        let (exact, _) = exact_expected_successes(&p).unwrap();
        prop_assert!((formula - exact).abs() <= 1e-12 * formula.abs().max(1.0));
    }

    #[test]
    fn successes_never_exceed_users_or_channels((n, raw) in matrix()) {
        let p = AccessMatrix::from_rows(n, normalise(&raw)).unwrap();
        let y = expected_successes(&p);
        prop_assert!(y >= -1e-15);
        prop_assert!(y <= (p.users().min(n)) as f64 + 1e-12);
    }

    #[test]
    fn slot_resolution_conserves_transmitters(
        picks in prop::collection::vec(prop::option::of(1u32..=6), 0..12),
    ) {
        let mut tx: BTreeMap<ChannelId, BTreeSet<SuId>> = BTreeMap::new();
        for (i, ch) in picks.iter().enumerate() {
            if let Some(c) = ch {
                tx.entry(ChannelId(*c)).or_default().insert(SuId(i as u32 + 1));
            }
        }
        let out = resolve_slot(&tx, 3).unwrap();
        let transmitting = picks.iter().flatten().count();
        let collided: usize = out
            .collided_channels()
            .map(|c| out.transmissions[&c].len())
            .sum();
        prop_assert_eq!(out.successes.len() + collided, transmitting);
        for (su, ch) in &out.successes {
            prop_assert_eq!(picks[(su.0 - 1) as usize], Some(ch.0));
            prop_assert_eq!(out.transmissions[ch].len(), 1);
        }
        prop_assert!(out.successes.len() <= 6);
    }

    #[test]
    fn symmetric_optimum_is_a_maximum(m in 1u32..=8, n in 1u32..=8, p in 0.0f64..1.0) {
        let q = p / n as f64;
        let y = symmetric_expected_successes(&vec![q; n as usize], m).unwrap();
        let best = max_expected_successes(m, n).unwrap();
        prop_assert!(y <= best + 1e-12, "{y} > {best}");
    }
}

#[test]
fn one_su_on_two_channels_is_rejected() {
    let mut tx = BTreeMap::new();
    tx.insert(ChannelId(1), BTreeSet::from([SuId(1)]));
    tx.insert(ChannelId(2), BTreeSet::from([SuId(1)]));
    assert!(resolve_slot(&tx, 0).is_err());
}
