use holant::classify::{classify_eight_vertex, EightVertexParams};
use holant::field::{zeta8_pow, FieldElem};
use holant::grid::{brute_holant, random_grid, Mediator};
use holant::holo::verify_valiant;
use holant::sample::{random_eight_vertex, random_transform, rng_from_seed};
use holant::signature::Sig4;
use proptest::prelude::*;

fn elem() -> impl Strategy<Value = FieldElem> {
    (-3i64..=3, 0i64..8, 1i64..=2).prop_map(|(n, k, d)| FieldElem::frac(n, d) * zeta8_pow(k))
}

fn nonzero() -> impl Strategy<Value = FieldElem> {
    elem().prop_filter("nonzero", |e| !e.is_zero())
}

fn sample_value() -> impl Strategy<Value = FieldElem> {
    prop::sample::select(vec!["0", "1", "-1", "I", "-I", "2", "Z8", "1/2"])
        .prop_map(|s| s.parse::<FieldElem>().unwrap())
}

fn params() -> impl Strategy<Value = EightVertexParams> {
    prop::array::uniform8(sample_value()).prop_map(EightVertexParams::new)
}

fn sig4() -> impl Strategy<Value = Sig4> {
    prop::array::uniform16(elem()).prop_map(|v| Sig4::new(v.to_vec()).unwrap())
}

proptest! {
    #[test]
    fn field_ring_laws(a in elem(), b in elem(), c in elem()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).galois(3), &a.galois(3) * &b.galois(3));
    }

    #[test]
    fn field_inverse(a in nonzero()) {
        prop_assert!((&a * &a.inv().unwrap()).is_one());
    }

    #[test]
    fn rotation_has_order_four(f in sig4()) {
        prop_assert_eq!(f.rotate(4), f.clone());
        prop_assert_eq!(f.rotate(1).rotate(1).rotate(1).rotate(1), f.clone());
        prop_assert_eq!(f.rotate(-1), f.rotate(3));
    }

    #[test]
    fn eight_vertex_rotation_stays_in_form(p in params()) {
        prop_assert!(p.to_sig4().rotate(1).is_eight_vertex_form());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valiant_holant_theorem(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let f = random_eight_vertex(&mut rng).into_signature();
        let g = random_grid(&mut rng, 12, &f, Mediator::Neq);
        let t = random_transform(&mut rng);
        prop_assert!(verify_valiant(&g, &t).unwrap());
    }

    #[test]
    fn holant_depends_on_outer_product(seed in any::<u64>(), s in nonzero()) {
        let mut rng = rng_from_seed(seed);
        let p = EightVertexParams::from_sig4(&random_eight_vertex(&mut rng)).unwrap();
        let [a, _, _, _, _, x, _, _] = p.to_array();
        let q = p.with_outer(&a * &s, &x * &s.inv().unwrap());
        let g = random_grid(&mut rng, 12, p.to_sig4().as_signature(), Mediator::Neq);
        let h = g.relabel(q.to_sig4().as_signature(), Mediator::Neq);
        prop_assert_eq!(brute_holant(&g).unwrap(), brute_holant(&h).unwrap());
    }

    #[test]
    fn classifier_scale_invariant(p in params(), s in nonzero()) {
        prop_assert_eq!(classify_eight_vertex(&p).label, classify_eight_vertex(&p.scale(&s)).label);
    }

    #[test]
    fn classifier_rotation_invariant(p in params()) {
        prop_assert_eq!(classify_eight_vertex(&p).label, classify_eight_vertex(&p.rotate(1)).label);
    }

    #[test]
    fn classifier_outer_product_invariant(p in params(), s in nonzero()) {
        let [a, _, _, _, _, x, _, _] = p.to_array();
        let q = p.with_outer(&a * &s, &x * &s.inv().unwrap());
        prop_assert_eq!(classify_eight_vertex(&p).label, classify_eight_vertex(&q).label);
    }
}
