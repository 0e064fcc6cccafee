//! The three vector preorders under both sort conventions.

use eoc_core::majorization::{relates, Convention, RealVector, Relation};
use proptest::prelude::*;

const RELATIONS: [Relation; 3] = [Relation::Majorization, Relation::WeakSub, Relation::WeakSuper];
const CONVENTIONS: [Convention; 2] = [Convention::Ascending, Convention::Descending];

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

/// `d` and a vector with the same total obtained by averaging towards the
/// mean, so `c ⪯^m d` in the ascending sense.
fn majorized_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6)
        .prop_flat_map(|n| (vector(n), 0.0f64..=1.0))
        .prop_map(|(d, s)| {
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let c = d.iter().map(|v| (1.0 - s) * v + s * mean).collect();
            (d, c)
        })
}

fn rv(v: &[f64]) -> RealVector {
    RealVector::new(v.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relations_are_reflexive(v in (1usize..6).prop_flat_map(vector)) {
        for rel in RELATIONS {
            for conv in CONVENTIONS {
                prop_assert!(relates(rel, conv, &rv(&v), &rv(&v)).unwrap());
            }
        }
    }

    #[test]
    fn relations_ignore_order(
        (d, c) in (1usize..6).prop_flat_map(|n| (vector(n), vector(n))),
        seed in any::<u64>(),
    ) {
        let mut shuffled = c.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        for rel in RELATIONS {
            for conv in CONVENTIONS {
                prop_assert_eq!(
                    relates(rel, conv, &rv(&d), &rv(&c)).unwrap(),
                    relates(rel, conv, &rv(&d), &rv(&shuffled)).unwrap()
                );
            }
        }
    }

    #[test]
    fn majorization_implies_both_weak_relations((d, c) in majorized_pair()) {
        for conv in CONVENTIONS {
            if relates(Relation::Majorization, conv, &rv(&d), &rv(&c)).unwrap() {
                prop_assert!(relates(Relation::WeakSub, conv, &rv(&d), &rv(&c)).unwrap());
                prop_assert!(relates(Relation::WeakSuper, conv, &rv(&d), &rv(&c)).unwrap());
            }
        }
        prop_assert!(relates(Relation::Majorization, Convention::Ascending, &rv(&d), &rv(&c)).unwrap());
    }

    #[test]
    fn majorization_is_scale_invariant((d, c) in majorized_pair(), t in 0.01f64..100.0) {
        let scale = |v: &[f64]| v.iter().map(|x| x * t).collect::<Vec<_>>();
        for conv in CONVENTIONS {
            prop_assert_eq!(
                relates(Relation::Majorization, conv, &rv(&d), &rv(&c)).unwrap(),
                relates(Relation::Majorization, conv, &rv(&scale(&d)), &rv(&scale(&c))).unwrap()
            );
        }
    }
}
