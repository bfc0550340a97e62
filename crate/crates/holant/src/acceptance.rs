//! The acceptance checks, shared by the `acceptance` test target and the
//! CLI `selftest` subcommand. Each check returns one report line.

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::Rng;

use crate::classify::{
    check_witness, classify_eight_vertex, is_tan_point, regression_corpus, CheckOutcome, EightVertexParams, Label,
};
use crate::eval::{brute_pm, count_pm, eval_affine_instance, eval_matchgate_instance, eval_product_instance, pfaffian, MatchGraph};
use crate::field::{zeta8_pow, FieldElem, Value};
use crate::gadget::{even_coloring_sig, lemma_table, EvenColoringMap};
use crate::grid::{
    brute_holant, even_coloring_partner, grid_medial, octahedron, random_grid, xor_bijection_check, Mediator, PlanarGrid,
};
use crate::holo::verify_valiant;
use crate::lattice::{
    approx_roots, conformal_interpolate, evaluate_at, lattice_basis, mobius_orbit, simplex, unit_circle_necessary,
    InterpolationSystem, MobiusMap,
};
use crate::sample::{random_eight_vertex, random_instance, random_skew, random_symmetric, random_transform, rng_from_seed, InstanceKind};
use crate::signature::{Sig4, Signature};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "engines agree with brute force"),
    (2, "FKT perfect matchings and Pfaffians"),
    (3, "holographic invariance"),
    (4, "gadget table against brute-force contraction"),
    (5, "Even-Coloring equivalence"),
    (6, "Holant depends on (a, x) only through ax"),
    (7, "lattice rank and conformal interpolation"),
    (8, "classifier regression and soundness sweep"),
    (9, "Mobius orbits on the unit circle"),
    (10, "unit-circle root condition"),
];

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} ({:.2?}): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed,
            self.detail
        )
    }
}

type Outcome = Result<(bool, String), String>;

pub fn run(id: u8, seed: u64) -> CriterionReport {
    let title = CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, t)| *t).unwrap_or("unknown criterion");
    let start = Instant::now();
    let out = match id {
        1 => engines(seed),
        2 => fkt(seed),
        3 => valiant(seed),
        4 => gadgets(),
        5 => even_coloring(seed),
        6 => ax_product(seed),
        7 => lattice(seed),
        8 => classifier(seed),
        9 => mobius(),
        10 => unit_circle(),
        _ => Err(format!("no criterion {id}")),
    };
    let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport { id, title, passed, detail, elapsed: start.elapsed() }
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(id, _)| run(*id, seed)).collect()
}

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn engines(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [InstanceKind::Matchgate, InstanceKind::Affine, InstanceKind::Product] {
        let mut agree = 0;
        for _ in 0..100 {
            let g = random_instance(&mut rng, kind, 24);
            let fast = match kind {
                InstanceKind::Matchgate => eval_matchgate_instance(&g),
                InstanceKind::Affine => eval_affine_instance(&g),
                _ => eval_product_instance(&g),
            }
            .map_err(err)?;
            if fast == brute_holant(&g).map_err(err)? {
                agree += 1;
            }
        }
        ok &= agree == 100;
        parts.push(format!("{kind:?} {agree}/100"));
    }
    Ok((ok, parts.join(", ")))
}

fn grid_graph(rows: i64, cols: i64) -> MatchGraph {
    let pos: Vec<(i64, i64)> = (0..rows * cols).map(|i| (i % cols, i / cols)).collect();
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let id = (i * cols + j) as usize;
            if j + 1 < cols {
                edges.push((id, id + 1, FieldElem::one()));
            }
            if i + 1 < rows {
                edges.push((id, id + cols as usize, FieldElem::one()));
            }
        }
    }
    MatchGraph::from_plane(&pos, &edges)
}

fn fkt(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let g23 = count_pm(&grid_graph(2, 3)).map_err(err)?;
    let c4 = count_pm(&grid_graph(2, 2)).map_err(err)?;
    let mut ok = g23 == FieldElem::from_int(3) && c4 == FieldElem::from_int(2);
    let mut graphs = 0;
    for (rows, cols) in [(2, 7), (3, 4), (3, 3), (2, 5)] {
        for _ in 0..10 {
            let pos: Vec<(i64, i64)> = (0..rows * cols).map(|i| (i % cols, i / cols)).collect();
            let mut edges = Vec::new();
            for i in 0..rows {
                for j in 0..cols {
                    let id = (i * cols + j) as usize;
                    let w = |rng: &mut rand_chacha::ChaCha8Rng| FieldElem::from_int(rng.gen_range(1..4));
                    if j + 1 < cols && rng.gen_bool(0.85) {
                        edges.push((id, id + 1, w(&mut rng)));
                    }
                    if i + 1 < rows && rng.gen_bool(0.85) {
                        edges.push((id, id + cols as usize, w(&mut rng)));
                    }
                    if i + 1 < rows && j + 1 < cols && rng.gen_bool(0.3) {
                        edges.push((id, id + cols as usize + 1, w(&mut rng)));
                    }
                }
            }
            let g = MatchGraph::from_plane(&pos, &edges);
            ok &= count_pm(&g).map_err(err)? == brute_pm(&g);
            graphs += 1;
        }
    }
    let mut pf_ok = 0;
    for _ in 0..50 {
        let n = 2 * rng.gen_range(1..=5);
        let m = random_skew(&mut rng, n);
        let pf = pfaffian(&m).map_err(err)?;
        if &pf * &pf == m.det() {
            pf_ok += 1;
        }
    }
    ok &= pf_ok == 50;
    Ok((ok, format!("2x3 grid {g23}, 4-cycle {c4}, {graphs} plane graphs, Pf^2 = det on {pf_ok}/50")))
}

fn valiant(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let mut good = 0;
    for _ in 0..50 {
        let f = random_eight_vertex(&mut rng).into_signature();
        let g = random_grid(&mut rng, 12, &f, Mediator::Neq);
        for _ in 0..5 {
            let t = random_transform(&mut rng);
            if verify_valiant(&g, &t).map_err(err)? {
                good += 1;
            }
        }
    }
    Ok((good == 250, format!("{good}/250 grid-transform pairs invariant")))
}

fn gadgets() -> Outcome {
    let table = lemma_table();
    let mut good = 0;
    let mut bad = Vec::new();
    for g in &table {
        let sym = g.expr.eval().map_err(err)?;
        let mut ok = g.expected.as_ref().is_none_or(|want| *want == sym);
        ok &= g.expr.brute().map_err(err)? == *sym.signature();
        if let Some(src) = &g.holant_source {
            let oct = octahedron(src.as_signature(), Mediator::Neq);
            ok &= brute_holant(&oct).map_err(err)? == brute_holant(&oct.relabel(sym.signature(), Mediator::Neq)).map_err(err)?;
        }
        if ok {
            good += 1;
        } else {
            bad.push(g.name);
        }
    }
    let pass = bad.is_empty() && table.len() >= 15;
    Ok((pass, format!("{good}/{} constructions match{}", table.len(), if bad.is_empty() { String::new() } else { format!("; failing {bad:?}") })))
}

fn symmetric_params(f: &Sig4) -> [FieldElem; 4] {
    let p = f.params().expect("even");
    [p[0].clone(), p[1].clone(), p[2].clone(), p[3].clone()]
}

fn even_coloring(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let eq4 = Signature::named("EQ4").map_err(err)?;
    let grids = [octahedron(&eq4, Mediator::Neq), grid_medial(2, 2, &eq4, Mediator::Neq)];
    let (mut xor_ok, mut map_ok, mut total) = (0, 0, 0);
    for _ in 0..20 {
        let f = random_symmetric(&mut rng);
        let [a, b, c, d] = symmetric_params(&f);
        for g in &grids {
            total += 1;
            if xor_bijection_check(g, &f, &even_coloring_partner(&f)).map_err(err)? {
                xor_ok += 1;
            }
            let lhs = brute_holant(&g.relabel(f.as_signature(), Mediator::Neq)).map_err(err)?;
            let mut both = true;
            for which in [EvenColoringMap::Z, EvenColoringMap::HZ] {
                let f2 = even_coloring_sig(&a, &b, &c, &d, which);
                both &= lhs == brute_holant(&g.relabel(f2.as_signature(), Mediator::Neq)).map_err(err)?;
            }
            if both {
                map_ok += 1;
            }
        }
    }
    Ok((xor_ok == total && map_ok == total, format!("xor bijection {xor_ok}/{total}, parameter maps {map_ok}/{total}")))
}

fn ax_product(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let factors = ["2", "-3", "I", "1/2", "1+I"].map(|s| s.parse::<FieldElem>().expect("literal"));
    let mut good = 0;
    for _ in 0..20 {
        let p = EightVertexParams::from_sig4(&random_eight_vertex(&mut rng)).expect("even");
        let g = random_grid(&mut rng, 14, p.to_sig4().as_signature(), Mediator::Neq);
        let base = brute_holant(&g).map_err(err)?;
        for u in &factors {
            let q = p.with_outer(&p.a * u, p.x.try_div(u).map_err(err)?);
            if brute_holant(&g.relabel(q.to_sig4().as_signature(), Mediator::Neq)).map_err(err)? == base {
                good += 1;
            }
        }
    }
    Ok((good == 100, format!("{good}/100 refactorizations leave the Holant unchanged")))
}

fn lattice(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let mut pool: Vec<FieldElem> = (0..8).map(zeta8_pow).collect();
    pool.extend(["2", "3", "1+I"].map(|s| s.parse::<FieldElem>().expect("literal")));
    let roots = 8;
    let mut tuples = 0;
    let mut agree = 0;
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            for k in 0..pool.len() {
                let xs = [pool[i].clone(), pool[j].clone(), pool[k].clone()];
                let full = lattice_basis(&xs).map_err(err)?.rank() == 3;
                let all_roots = i < roots && j < roots && k < roots;
                tuples += 1;
                if full == all_roots {
                    agree += 1;
                }
            }
        }
    }
    let base: Vec<FieldElem> = ["2", "3", "Z8", "I", "-1", "1+I", "5"].map(|s| s.parse().expect("literal")).to_vec();
    let (mut trips, mut trip_ok) = (0, 0);
    for k in 1..=3 {
        for m in 1..=4 {
            for _ in 0..3 {
                let xs: Vec<FieldElem> = (0..k).map(|_| base[rng.gen_range(0..base.len())].clone()).collect();
                // y = x^2 is constant on every coset of the lattice of x
                let ys: Vec<FieldElem> = xs.iter().map(|x| x.square()).collect();
                let z: Vec<FieldElem> =
                    (0..simplex(k, m).len()).map(|_| FieldElem::from_int(rng.gen_range(-5..=5))).collect();
                let sys = InterpolationSystem::forward(m, xs, ys.clone(), &z);
                trips += 1;
                if conformal_interpolate(&sys).map_err(err)? == evaluate_at(m, &ys, &z) {
                    trip_ok += 1;
                }
            }
        }
    }
    Ok((
        agree == tuples && trip_ok == trips,
        format!("rank 3 iff roots of unity on {agree}/{tuples} tuples, round trips {trip_ok}/{trips}"),
    ))
}

fn classifier(seed: u64) -> Outcome {
    let topo = octahedron(&Signature::named("EQ4").map_err(err)?, Mediator::Neq);
    let corpus = regression_corpus();
    let mut mislabeled = Vec::new();
    let mut unchecked = Vec::new();
    let mut checked = 0;
    let mut disagree = Vec::new();
    for pt in &corpus {
        let l = classify_eight_vertex(&pt.params);
        if l.label != pt.expected {
            mislabeled.push(pt.name.clone());
            continue;
        }
        if !l.label.is_tractable() {
            continue;
        }
        match l.engine_witness() {
            Some(w) => match check_witness(&pt.params.to_sig4(), w, &topo).map_err(err)? {
                CheckOutcome::Agrees => checked += 1,
                CheckOutcome::Disagrees { .. } => disagree.push(pt.name.clone()),
                CheckOutcome::NoEngine(_) => unchecked.push(pt.name.clone()),
            },
            None => unchecked.push(pt.name.clone()),
        }
    }
    let tan_exact = corpus.iter().filter(|p| is_tan_point(&p.params).is_some()).count();

    let sweep = soundness_sweep(seed, 10_000, &topo).map_err(err)?;
    let pass = mislabeled.is_empty() && disagree.is_empty() && unchecked.is_empty() && sweep.failures == 0 && sweep.tan_hits == 0 && tan_exact == 8;
    let mut detail = format!(
        "{} points, {} mislabeled, {checked} engine-checked, {} engine disagreements, {} tractable without engine witness{}; tan detector fires on {tan_exact} corpus points; sweep {}",
        corpus.len(),
        mislabeled.len(),
        disagree.len(),
        unchecked.len(),
        if unchecked.is_empty() { String::new() } else { format!(" {unchecked:?}") },
        sweep,
    );
    if !mislabeled.is_empty() {
        detail.push_str(&format!("; mislabeled {mislabeled:?}"));
    }
    Ok((pass, detail))
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub points: usize,
    pub counts: [usize; 4],
    pub engine_checked: usize,
    pub no_engine: usize,
    pub failures: usize,
    pub tan_hits: usize,
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [g, p, h, u] = self.counts;
        write!(
            f,
            "{} points: {g} general, {p} planar, {h} hard, {u} unresolved ({:.1}%); {} engine-checked, {} without engine, {} failures",
            self.points,
            100.0 * u as f64 / self.points.max(1) as f64,
            self.engine_checked,
            self.no_engine,
            self.failures
        )
    }
}

/// Random points with entries from a small value set; every tractable label
/// with an engine witness is replayed on `topo`.
pub fn soundness_sweep(seed: u64, points: usize, topo: &PlanarGrid) -> Result<SweepReport, String> {
    let mut rng = rng_from_seed(seed);
    let values: Vec<FieldElem> =
        ["0", "1", "-1", "I", "-I", "2", "Z8", "1/2", "0", "1"].map(|s| s.parse().expect("literal")).to_vec();
    let mut rep = SweepReport { points, ..Default::default() };
    for _ in 0..points {
        let p = EightVertexParams::new(std::array::from_fn(|_| values[rng.gen_range(0..values.len())].clone()));
        let l = classify_eight_vertex(&p);
        let slot = match l.label {
            Label::GeneralTractable => 0,
            Label::PlanarTractable => 1,
            Label::PlanarHard => 2,
            Label::Unresolved => 3,
        };
        rep.counts[slot] += 1;
        if is_tan_point(&p).is_some() {
            rep.tan_hits += 1;
        }
        if !l.label.is_tractable() {
            continue;
        }
        match l.engine_witness() {
            Some(w) => match check_witness(&p.to_sig4(), w, topo).map_err(err)? {
                CheckOutcome::Agrees => rep.engine_checked += 1,
                CheckOutcome::Disagrees { .. } => rep.failures += 1,
                CheckOutcome::NoEngine(_) => rep.no_engine += 1,
            },
            None => rep.no_engine += 1,
        }
    }
    Ok(rep)
}

fn mobius() -> Outcome {
    let ex = |s: &str| Value::Exact(s.parse().expect("literal"));
    let lambdas = ["1/2", "1/3", "2/3", "1/5", "3/4", "1/2*I", "1/3+1/3*I", "-1/2", "2/5*I", "1/4-1/2*I"];
    let one = ex("1");
    let mut good = 0;
    for l in lambdas {
        let lam = ex(l);
        let map = MobiusMap::unit_circle_form(one.clone(), lam.clone()).map_err(err)?;
        // fixed points satisfy z^2 = lambda / conj(lambda); pick a start that avoids them
        let fixed = lam.div(&lam.conj()).map_err(err)?;
        let t0 = ["I", "Z8", "-1", "Z8^3"]
            .iter()
            .map(|s| ex(s))
            .find(|t| !t.mul(t).and_then(|t2| t2.same(&fixed)).unwrap_or(true))
            .ok_or("no start point")?;
        let orbit = mobius_orbit(&map, &t0, 50).map_err(err)?;
        if orbit.all_distinct && orbit.all_on_circle {
            good += 1;
        }
    }
    let flip = MobiusMap::unit_circle_form(ex("-1"), ex("1/2")).map_err(err)?;
    let order = flip.projective_order(10).map_err(err)?;
    let period = mobius_orbit(&flip, &ex("I"), 6).map_err(err)?.period;
    let pass = good == 10 && order == Some(2) && period == Some(2);
    Ok((pass, format!("{good}/10 orbits distinct on the circle; involution order {order:?}, orbit period {period:?}")))
}

/// Cyclotomic polynomial coefficients, lowest power first, for n <= 8.
pub fn cyclotomic(n: usize) -> Vec<i64> {
    match n {
        1 => vec![-1, 1],
        2 => vec![1, 1],
        3 => vec![1, 1, 1],
        4 => vec![1, 0, 1],
        5 => vec![1, 1, 1, 1, 1],
        6 => vec![1, -1, 1],
        7 => vec![1, 1, 1, 1, 1, 1, 1],
        8 => vec![1, 0, 0, 0, 1],
        _ => panic!("n <= 8"),
    }
}

fn unit_circle() -> Outcome {
    let poly = |c: &[i64]| c.iter().map(|&v| FieldElem::from_int(v)).collect::<Vec<_>>();
    let mut accepted = Vec::new();
    let mut ok = true;
    for (name, c) in [("z^2-1", vec![-1, 0, 1]), ("z^2+z+1", vec![1, 1, 1])]
        .into_iter()
        .map(|(n, c)| (n.to_string(), c))
        .chain((1..=8).map(|n| (format!("Phi_{n}"), cyclotomic(n))))
    {
        let acc = unit_circle_necessary(&poly(&c)).map_err(err)?;
        ok &= acc;
        if acc {
            accepted.push(name);
        }
    }
    let mut rejected = Vec::new();
    for (name, c) in [("z-2", vec![-2, 1]), ("z^2-z-1", vec![-1, -1, 1])] {
        let p = poly(&c);
        let acc = unit_circle_necessary(&p).map_err(err)?;
        let off = approx_roots(&p).into_iter().map(|r| r.norm()).find(|m| (m - 1.0).abs() > 1e-6);
        ok &= !acc && off.is_some();
        if let Some(m) = off {
            rejected.push(format!("{name} (root of modulus {m:.6})"));
        }
    }
    Ok((ok, format!("accepted {} polynomials; rejected {}", accepted.len(), rejected.join(", "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_criteria() {
        for id in [4, 9, 10] {
            let r = run(id, 1);
            assert!(r.passed, "{r}");
        }
    }
}
