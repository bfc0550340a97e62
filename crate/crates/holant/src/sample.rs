//! Seeded generators for random signatures, transforms and instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;

use crate::field::{zeta8_pow, FieldElem};
use crate::grid::{random_grid, Mediator, PlanarGrid};
use crate::holo::Transform2;
use crate::linalg::Matrix;
use crate::signature::{AffineForm, ProductBlock, ProductForm, Sig2, Sig4, Signature};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_int<R: Rng>(rng: &mut R, bound: i64) -> FieldElem {
    FieldElem::from_int(rng.gen_range(-bound..=bound))
}

pub fn nonzero_int<R: Rng>(rng: &mut R, bound: i64) -> FieldElem {
    loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return FieldElem::from_int(v);
        }
    }
}

/// a + b i with small integer parts.
pub fn small_gaussian<R: Rng>(rng: &mut R, bound: i64) -> FieldElem {
    &small_int(rng, bound) + &(&small_int(rng, bound) * &FieldElem::i())
}

/// Eight-vertex matchgate: seven free entries, x fixed by a x - b y = c z - d w.
pub fn random_matchgate<R: Rng>(rng: &mut R) -> Sig4 {
    let a = nonzero_int(rng, 3);
    let [b, c, d, w, y, z] = std::array::from_fn(|_| small_int(rng, 3));
    let rhs = &(&(&c * &z) - &(&d * &w)) + &(&b * &y);
    let x = rhs.try_div(&a).expect("a is nonzero");
    Sig4::eight_vertex(a, b, c, d, w, x, y, z)
}

/// Mediator for matchgate instances: a disequality or a parity-pure binary.
pub fn random_matchgate_mediator<R: Rng>(rng: &mut R) -> Mediator {
    match rng.gen_range(0..6) {
        0 => Mediator::Sig(Sig2::new(FieldElem::zero(), nonzero_int(rng, 3), nonzero_int(rng, 3), FieldElem::zero())),
        1 => Mediator::Sig(Sig2::new(nonzero_int(rng, 3), FieldElem::zero(), FieldElem::zero(), nonzero_int(rng, 3))),
        _ => Mediator::Neq,
    }
}

pub fn random_affine<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    loop {
        let ncons = rng.gen_range(0..=arity / 2);
        let constraints = (0..ncons).map(|_| (rng.gen_range(1..1u32 << arity), rng.gen_range(0..2u8))).collect();
        let cross = (0..arity)
            .flat_map(|j| (j + 1..arity).map(move |k| (j, k)))
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        let form = AffineForm {
            arity,
            lambda: nonzero_int(rng, 2),
            constraints,
            q0: rng.gen_range(0..4),
            lin: (0..arity).map(|_| rng.gen_range(0..4)).collect(),
            cross,
        };
        let sig = Signature::new(arity, (0..1 << arity).map(|i| form.eval(i)).collect()).expect("length");
        if !sig.is_zero() {
            return sig;
        }
    }
}

pub fn random_product<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    let mut vars: Vec<usize> = (0..arity).collect();
    vars.shuffle(rng);
    let mut blocks = Vec::new();
    let mut rest = &vars[..];
    while !rest.is_empty() {
        let take = rng.gen_range(1..=rest.len().min(3));
        let (head, tail) = rest.split_at(take);
        blocks.push(ProductBlock {
            vars: head.to_vec(),
            alpha: head.iter().map(|_| rng.gen_range(0..2)).collect(),
            w0: small_int(rng, 3),
            w1: small_int(rng, 3),
        });
        rest = tail;
    }
    let form = ProductForm { arity, scale: nonzero_int(rng, 2), blocks };
    Signature::new(arity, (0..1 << arity).map(|i| form.eval(i)).collect()).expect("length")
}

/// Invertible 2x2 transform with Gaussian-integer entries.
pub fn random_transform<R: Rng>(rng: &mut R) -> Transform2 {
    loop {
        let [a, b, c, d] = std::array::from_fn(|_| small_gaussian(rng, 2));
        if let Ok(t) = Transform2::from_entries(a, b, c, d) {
            return t;
        }
    }
}

pub fn random_skew<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = if rng.gen_bool(0.3) { FieldElem::zero() } else { small_gaussian(rng, 3) };
            m[(i, j)] = v.clone();
            m[(j, i)] = -v;
        }
    }
    m
}

/// Symmetric eight-vertex parameters (a = x, b = y, c = z, d = w) with
/// entries from a small set including roots of unity.
pub fn random_symmetric<R: Rng>(rng: &mut R) -> Sig4 {
    let pick = |rng: &mut R| match rng.gen_range(0..4) {
        0 => small_int(rng, 3),
        1 => zeta8_pow(rng.gen_range(0..8)),
        _ => small_gaussian(rng, 2),
    };
    let a = pick(rng);
    let b = pick(rng);
    let c = pick(rng);
    let d = pick(rng);
    Sig4::symmetric(&a, &b, &c, &d)
}

/// Random generic eight-vertex signature with small Gaussian entries.
pub fn random_eight_vertex<R: Rng>(rng: &mut R) -> Sig4 {
    let [a, b, c, d, w, x, y, z] = std::array::from_fn(|_| small_gaussian(rng, 2));
    Sig4::eight_vertex(a, b, c, d, w, x, y, z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Matchgate,
    Affine,
    Product,
    Generic,
}

/// Random closed grid with per-vertex signatures of the given kind.
pub fn random_instance<R: Rng>(rng: &mut R, kind: InstanceKind, max_edges: usize) -> PlanarGrid {
    let base = random_grid(rng, max_edges, &Signature::named("EQ4").expect("named"), Mediator::Neq);
    let mut g = base.clone();
    for v in 0..base.num_vertices() {
        let f = match kind {
            InstanceKind::Matchgate => random_matchgate(rng).into_signature(),
            InstanceKind::Affine => random_affine(rng, 4),
            InstanceKind::Product => random_product(rng, 4),
            InstanceKind::Generic => random_eight_vertex(rng).into_signature(),
        };
        g = g.with_vertex_signature(v, &format!("f{v}"), f);
    }
    for e in 0..base.edges().len() {
        let med = match kind {
            InstanceKind::Matchgate => random_matchgate_mediator(rng),
            InstanceKind::Affine if rng.gen_bool(0.3) => Mediator::Sig(Sig2::try_from(random_affine(rng, 2)).expect("binary")),
            InstanceKind::Product if rng.gen_bool(0.3) => Mediator::Sig(Sig2::try_from(random_product(rng, 2)).expect("binary")),
            _ => Mediator::Neq,
        };
        g = g.with_edge_mediator(e, med);
    }
    g
}
