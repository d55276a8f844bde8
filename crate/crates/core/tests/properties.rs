//! Property tests: invariants under change of basis, report round trips and
//! seeded determinism.

use proptest::prelude::*;

use prosite::linalg::{IntMatrix, PresentedGroup};
use prosite::workbench::{load_site, parse_report, run_suite, Report};
use prosite::{Check, Verdict};

/// A unimodular matrix as a product of elementary row operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        let mut e = IntMatrix::identity(n);
        e.set(i, j, k.into());
        m = e.mul(&m);
    }
    m
}

fn relation_matrix() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
    (1usize..4, 0usize..4).prop_flat_map(|(g, r)| (Just(g), Just(r), prop::collection::vec(-6i64..7, g * r)))
}

fn check_strategy() -> impl Strategy<Value = Check> {
    (
        "[a-z][a-z0-9.]{0,12}",
        prop_oneof![Just(Verdict::Pass), Just(Verdict::Fail), Just(Verdict::Unverified)],
        "[ -~]{0,30}",
    )
        .prop_map(|(id, v, d)| Check::new(id, v, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_survive_unimodular_change_of_basis(
        (g, r, entries) in relation_matrix(),
        left in prop::collection::vec((0usize..4, 0usize..4, -3i64..4), 0..6),
        right in prop::collection::vec((0usize..4, 0usize..4, -3i64..4), 0..6),
    ) {
        let rows: Vec<Vec<i64>> = (0..g).map(|i| entries[i * r..(i + 1) * r].to_vec()).collect();
        let rel = if r == 0 { IntMatrix::zeros(g, 0) } else { IntMatrix::from_rows(&rows) };
        let base = PresentedGroup { gens: g, relations: rel.clone() }.invariants();
        let mut moved = unimodular(g, &left).mul(&rel);
        if r > 0 {
            moved = moved.mul(&unimodular(r, &right));
        }
        prop_assert_eq!(PresentedGroup { gens: g, relations: moved }.invariants(), base);
    }

    #[test]
    fn reports_round_trip(checks in prop::collection::vec(check_strategy(), 0..12), seed in any::<u64>(), budget in 0usize..100) {
        let r = Report::new("towers", "fixture:b2", seed, budget, "00".repeat(32), checks);
        let text = r.render();
        prop_assert_eq!(parse_report(&text).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn seeded_suites_are_deterministic(seed in any::<u64>()) {
        let site = load_site("bz3").unwrap();
        let a = run_suite(&site, "towers", seed, 3).unwrap().render();
        let b = run_suite(&site, "towers", seed, 3).unwrap().render();
        prop_assert_eq!(a, b);
    }
}
