use std::cmp::Ordering;

use proptest::prelude::*;

use mst_core::datagen::generate::substream;
use mst_core::measure_text::{annotate, assign_scale_indices, ScaleIndexedText};
use mst_core::model::train::candidate_loss;
use mst_core::numerics::{
    convert_notation, parse_number, render, sample_number, ExactDecimal, Notation, NumberRange, MAX_FRACTION_DIGITS,
};
use mst_core::units::{
    canonicalize, compare_measurements, quantities_equal, render_measurement, Measurement, UnitInventory,
};

fn decimal() -> impl Strategy<Value = ExactDecimal> {
    (1u64..10_000_000_000, -6i64..3).prop_map(|(c, e)| ExactDecimal::from_parts(c, e))
}

fn family_pair() -> impl Strategy<Value = (usize, usize, usize)> {
    let n = UnitInventory::builtin().families().len();
    (0..n, 0usize..16, 0usize..16)
}

proptest! {
    #[test]
    fn notation_round_trip(d in decimal()) {
        let dec = render(&d, Notation::Decimal).unwrap();
        let sci = convert_notation(&dec, Notation::Scientific).unwrap();
        let back = convert_notation(&sci, Notation::Decimal).unwrap();
        prop_assert_eq!(&back, &dec);
        prop_assert_eq!(parse_number(&sci).unwrap().cmp_value(&d), Ordering::Equal);
    }

    #[test]
    fn canonical_form_is_the_same_quantity(d in decimal(), (f, i, _) in family_pair()) {
        let fam = &UnitInventory::builtin().families()[f];
        let m = Measurement::new(d, fam.variants[i % fam.variants.len()]);
        prop_assert!(quantities_equal(&m, &canonicalize(&m)).unwrap());
        let text = render_measurement(&m, Notation::Scientific).unwrap();
        prop_assert!(quantities_equal(&m, &Measurement::parse(&text).unwrap()).unwrap());
    }

    #[test]
    fn comparison_is_antisymmetric(a in decimal(), b in decimal(), (f, i, j) in family_pair()) {
        let fam = &UnitInventory::builtin().families()[f];
        let x = Measurement::new(a, fam.variants[i % fam.variants.len()]);
        let y = Measurement::new(b, fam.variants[j % fam.variants.len()]);
        prop_assert_eq!(compare_measurements(&x, &y).unwrap(), compare_measurements(&y, &x).unwrap().reverse());
    }

    #[test]
    fn sampled_numbers_respect_range(seed in any::<u64>(), extrap in any::<bool>()) {
        let range = if extrap { NumberRange::EXTRAPOLATION } else { NumberRange::INTERPOLATION };
        let mut rng = substream(seed, &[5]);
        for _ in 0..50 {
            let n = sample_number(range, &mut rng);
            prop_assert!(n.in_range(range));
            prop_assert!(n.fraction_digits() <= MAX_FRACTION_DIGITS);
        }
    }

    #[test]
    fn scale_indices_count_digits_to_the_right(flags in prop::collection::vec(any::<bool>(), 0..40), cap in 1usize..20) {
        let idx = assign_scale_indices(&flags, cap);
        for i in 0..flags.len() {
            if !flags[i] {
                prop_assert_eq!(idx[i], 0);
            } else {
                let right = if i + 1 < flags.len() && flags[i + 1] { idx[i + 1] } else { 0 };
                let run = flags[i..].iter().take_while(|&&f| f).count();
                prop_assert_eq!(idx[i], run.min(cap));
                prop_assert!(idx[i] == (right + 1).min(cap));
            }
        }
    }

    #[test]
    fn annotation_dump_round_trip(d in decimal(), words in "[a-z]{1,6}( [a-z]{1,6}){0,3}") {
        let text = format!("{}mg {words} [MASK]", render(&d, Notation::Decimal).unwrap());
        let ann = annotate(&text, 16);
        prop_assert_eq!(ScaleIndexedText::from_dump(&ann.to_dump()).unwrap(), ann);
    }

    #[test]
    fn candidate_loss_gradient_sums_to_zero(scores in prop::collection::vec(-5.0f64..5.0, 2..7), gold in 0usize..2) {
        let classes: Vec<usize> = (0..scores.len()).map(|i| i % 2).collect();
        let (loss, grad) = candidate_loss(&scores, &classes, gold);
        prop_assert!(loss >= -1e-12);
        prop_assert!(grad.iter().sum::<f64>().abs() < 1e-9);
        for (g, c) in grad.iter().zip(&classes) {
            if *c != gold {
                prop_assert!(*g >= 0.0);
            }
        }
    }
}
