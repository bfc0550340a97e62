use std::time::Instant;

use holant::eval::{count_pm, brute_pm, eval_affine_instance, eval_matchgate_instance, eval_product_instance, pfaffian, MatchGraph};
use holant::field::FieldElem;
use holant::grid::brute_holant;
use holant::sample::{random_instance, random_skew, rng_from_seed, InstanceKind};
use rand::Rng;

fn engine_agrees(kind: InstanceKind, seed: u64, count: usize) {
    let mut rng = rng_from_seed(seed);
    let start = Instant::now();
    for n in 0..count {
        let g = random_instance(&mut rng, kind, 24);
        assert!(g.edges().len() <= 24);
        let fast = match kind {
            InstanceKind::Matchgate => eval_matchgate_instance(&g),
            InstanceKind::Affine => eval_affine_instance(&g),
            InstanceKind::Product => eval_product_instance(&g),
            InstanceKind::Generic => unreachable!(),
        };
        let fast = fast.unwrap_or_else(|e| panic!("{kind:?} instance {n}: {e}"));
        assert_eq!(fast, brute_holant(&g).unwrap(), "{kind:?} instance {n}");
    }
    eprintln!("{kind:?}: {count} instances in {:?}", start.elapsed());
}

#[test]
fn matchgate_engine_matches_brute_force() {
    engine_agrees(InstanceKind::Matchgate, 11, 100);
}

#[test]
fn affine_engine_matches_brute_force() {
    engine_agrees(InstanceKind::Affine, 12, 100);
}

#[test]
fn product_engine_matches_brute_force() {
    engine_agrees(InstanceKind::Product, 13, 100);
}

#[test]
fn pfaffian_squares_to_determinant() {
    let mut rng = rng_from_seed(5);
    for _ in 0..30 {
        let n = 2 * rng.gen_range(1..=5);
        let m = random_skew(&mut rng, n);
        let pf = pfaffian(&m).unwrap();
        assert_eq!(&pf * &pf, m.det());
    }
}

#[test]
fn kasteleyn_counts_random_plane_graphs() {
    let mut rng = rng_from_seed(9);
    for _ in 0..40 {
        // random subgraph of the 3x4 lattice with diagonals in some cells
        let (rows, cols) = (3usize, 4usize);
        let pos: Vec<(i64, i64)> = (0..rows * cols).map(|i| ((i % cols) as i64, (i / cols) as i64)).collect();
        let mut edges = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let id = i * cols + j;
                let w = |rng: &mut rand_chacha::ChaCha8Rng| FieldElem::from_int(rng.gen_range(1..4));
                if j + 1 < cols && rng.gen_bool(0.8) {
                    edges.push((id, id + 1, w(&mut rng)));
                }
                if i + 1 < rows && rng.gen_bool(0.8) {
                    edges.push((id, id + cols, w(&mut rng)));
                }
                if i + 1 < rows && j + 1 < cols && rng.gen_bool(0.3) {
                    edges.push((id, id + cols + 1, w(&mut rng)));
                }
            }
        }
        let g = MatchGraph::from_plane(&pos, &edges);
        assert_eq!(count_pm(&g).unwrap(), brute_pm(&g));
    }
}
