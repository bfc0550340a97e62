use holant::field::FieldElem;
use holant::lattice::{lattice_basis, lattice_subset, monomial};
use num_bigint::BigInt;

fn parse(xs: &[&str]) -> Vec<FieldElem> {
    xs.iter().map(|s| s.parse().unwrap()).collect()
}

fn boxed(k: usize, r: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| (-r..=r).map(move |e| {
                let mut w = v.clone();
                w.push(BigInt::from(e));
                w
            }))
            .collect();
    }
    out
}

#[test]
fn basis_matches_enumerated_relations() {
    let cases: &[&[&str]] = &[
        &["1", "1", "-1"],
        &["I", "-1"],
        &["2", "1/2", "4"],
        &["Z8", "I", "-1"],
        &["2", "3"],
        &["1+I", "1-I", "2"],
        &["Z8", "2", "-I"],
    ];
    for xs in cases {
        let xs = parse(xs);
        let basis = lattice_basis(&xs).unwrap();
        for v in boxed(xs.len(), 4) {
            let relation = monomial(&xs, &v).map_or(false, |m| m.is_one());
            assert_eq!(basis.contains(&v), relation, "xs {xs:?} v {v:?}");
        }
    }
}

#[test]
fn subset_matches_enumerated_relations() {
    let cases: &[(&[&str], &[&str])] = &[
        (&["1", "1", "-1"], &["1", "1", "I"]),
        (&["1", "1", "I"], &["1", "1", "-1"]),
        (&["2", "4"], &["3", "9"]),
        (&["2", "3"], &["4", "9"]),
        (&["I", "Z8"], &["-1", "I"]),
    ];
    for (xs, ys) in cases {
        let (xs, ys) = (parse(xs), parse(ys));
        let oracle = boxed(xs.len(), 8).iter().all(|v| {
            let rx = monomial(&xs, v).map_or(false, |m| m.is_one());
            let ry = monomial(&ys, v).map_or(false, |m| m.is_one());
            !rx || ry
        });
        assert_eq!(lattice_subset(&xs, &ys).unwrap(), oracle, "{xs:?} vs {ys:?}");
    }
}
