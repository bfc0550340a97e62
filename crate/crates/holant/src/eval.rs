//! Polynomial-time Holant engines: FKT perfect-matching counts with a
//! matchgate realization table, the affine Gauss-sum evaluator and the
//! product-type propagator.

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::{zeta8_pow, FieldElem};
use crate::grid::{GridError, Mediator, PlanarGrid};
use crate::linalg::Matrix;
use crate::signature::{is_affine, is_matchgate, is_product, Parity, Sig2, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no matchgate realization for {0}")]
    NoRealization(String),
    #[error("{0} is not affine")]
    NotAffine(String),
    #[error("{0} is not of product type")]
    NotProduct(String),
    #[error("Pfaffian of an odd-dimensional matrix")]
    OddDimension,
    #[error("matrix is not skew-symmetric")]
    NotSkew,
    #[error("rotation system is not a planar embedding")]
    NotPlanar,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Weighted graph with a rotation system (incident edge ids, counterclockwise).
#[derive(Clone, Debug, Default)]
pub struct MatchGraph {
    n: usize,
    edges: Vec<(usize, usize, FieldElem)>,
    rot: Vec<Vec<usize>>,
}

impl MatchGraph {
    pub fn new(n: usize) -> MatchGraph {
        MatchGraph { n, edges: Vec::new(), rot: vec![Vec::new(); n] }
    }

    pub fn add_node(&mut self) -> usize {
        self.n += 1;
        self.rot.push(Vec::new());
        self.n - 1
    }

    /// Adds an edge without touching the rotation system.
    pub fn add_edge_unplaced(&mut self, u: usize, v: usize, w: FieldElem) -> usize {
        assert!(u != v, "loops never occur in a matching graph");
        self.edges.push((u, v, w));
        self.edges.len() - 1
    }

    /// Adds an edge at the end of both rotations.
    pub fn add_edge(&mut self, u: usize, v: usize, w: FieldElem) -> usize {
        let e = self.add_edge_unplaced(u, v, w);
        self.rot[u].push(e);
        self.rot[v].push(e);
        e
    }

    pub fn set_rotation(&mut self, node: usize, order: Vec<usize>) {
        self.rot[node] = order;
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, FieldElem)] {
        &self.edges
    }

    /// Straight-line drawing: rotations sorted by angle.
    pub fn from_plane(pos: &[(i64, i64)], edges: &[(usize, usize, FieldElem)]) -> MatchGraph {
        let mut g = MatchGraph::new(pos.len());
        for (u, v, w) in edges {
            g.add_edge_unplaced(*u, *v, w.clone());
        }
        for x in 0..pos.len() {
            let mut inc: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].0 == x || g.edges[e].1 == x).collect();
            let angle = |e: usize| {
                let (a, b, _) = &g.edges[e];
                let y = if *a == x { *b } else { *a };
                ((pos[y].1 - pos[x].1) as f64).atan2((pos[y].0 - pos[x].0) as f64)
            };
            inc.sort_by(|&a, &b| angle(a).partial_cmp(&angle(b)).expect("finite"));
            g.rot[x] = inc;
        }
        g
    }

    fn check_rotation(&self) -> Result<(), EvalError> {
        let mut count = vec![0usize; self.edges.len()];
        for (x, r) in self.rot.iter().enumerate() {
            for &e in r {
                let (a, b, _) = &self.edges[e];
                if *a != x && *b != x {
                    return Err(EvalError::NotPlanar);
                }
                count[e] += 1;
            }
        }
        if count.iter().any(|&c| c != 2) {
            return Err(EvalError::NotPlanar);
        }
        Ok(())
    }

    /// Dart 2e goes u -> v, dart 2e+1 goes v -> u.
    fn tail(&self, d: usize) -> usize {
        let (u, v, _) = &self.edges[d / 2];
        if d % 2 == 0 {
            *u
        } else {
            *v
        }
    }

    fn dart_at(&self, e: usize, x: usize) -> usize {
        if self.edges[e].0 == x {
            2 * e
        } else {
            2 * e + 1
        }
    }

    /// Faces traversed with the face on the left; returns (faces, face of each dart).
    fn faces(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let nd = 2 * self.edges.len();
        let mut pos_in_rot = vec![0usize; nd];
        for (x, r) in self.rot.iter().enumerate() {
            for (i, &e) in r.iter().enumerate() {
                pos_in_rot[self.dart_at(e, x)] = i;
            }
        }
        let prev = |d: usize| {
            let x = self.tail(d);
            let r = &self.rot[x];
            let i = (pos_in_rot[d] + r.len() - 1) % r.len();
            self.dart_at(r[i], x)
        };
        let mut face_of = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        for s in 0..nd {
            if face_of[s] != usize::MAX {
                continue;
            }
            let mut f = Vec::new();
            let mut d = s;
            while face_of[d] == usize::MAX {
                face_of[d] = faces.len();
                f.push(d);
                d = prev(d ^ 1);
            }
            faces.push(f);
        }
        (faces, face_of)
    }

    fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut c = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = c;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &e in &self.rot[x] {
                    let (a, b, _) = &self.edges[e];
                    let y = if *a == x { *b } else { *a };
                    if comp[y] == usize::MAX {
                        comp[y] = c;
                        q.push_back(y);
                    }
                }
            }
            c += 1;
        }
        comp
    }

    /// Faces whose boundary has an even number of clockwise edges. A
    /// Kasteleyn orientation leaves at most one such face per component.
    pub fn kasteleyn_violations(&self, orient: &[bool]) -> Vec<usize> {
        let (faces, _) = self.faces();
        faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.iter().filter(|&&d| orient[d / 2] != (d % 2 == 0)).count() % 2 == 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Orientation per edge (`true`: u -> v) with an odd number of clockwise
/// edges on every face except one outer face per component.
pub fn kasteleyn_orient(g: &MatchGraph) -> Result<Vec<bool>, EvalError> {
    g.check_rotation()?;
    let m = g.edges.len();
    let comp = g.components();
    let (faces, face_of) = g.faces();
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    // Euler check per component
    let mut v = vec![0i64; ncomp];
    let mut e = vec![0i64; ncomp];
    let mut f = vec![0i64; ncomp];
    for &c in &comp {
        v[c] += 1;
    }
    for &(a, _, _) in &g.edges {
        e[comp[a]] += 1;
    }
    let mut outer = vec![usize::MAX; ncomp];
    for (i, face) in faces.iter().enumerate() {
        let c = comp[g.tail(face[0])];
        f[c] += 1;
        if outer[c] == usize::MAX {
            outer[c] = i;
        }
    }
    for c in 0..ncomp {
        // isolated nodes have no faces
        if e[c] > 0 && v[c] - e[c] + f[c] != 2 {
            return Err(EvalError::NotPlanar);
        }
    }
    // spanning forest
    let mut orient = vec![true; m];
    let mut assigned = vec![false; m];
    let mut seen = vec![false; g.n];
    for s in 0..g.n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &ed in &g.rot[x] {
                let (a, b, _) = &g.edges[ed];
                let y = if *a == x { *b } else { *a };
                if !seen[y] {
                    seen[y] = true;
                    assigned[ed] = true;
                    q.push_back(y);
                }
            }
        }
    }
    let mut open = vec![0usize; faces.len()];
    for ed in 0..m {
        if !assigned[ed] {
            open[face_of[2 * ed]] += 1;
            open[face_of[2 * ed + 1]] += 1;
        }
    }
    let is_outer = |fi: usize| outer.contains(&fi);
    let mut queue: VecDeque<usize> = (0..faces.len()).filter(|&fi| !is_outer(fi) && open[fi] == 1).collect();
    while let Some(fi) = queue.pop_front() {
        if open[fi] != 1 {
            continue;
        }
        let face = &faces[fi];
        let Some(&dfree) = face.iter().find(|&&d| !assigned[d / 2]) else { continue };
        let cw = face.iter().filter(|&&d| assigned[d / 2] && orient[d / 2] != (d % 2 == 0)).count();
        let ed = dfree / 2;
        // along the dart is counterclockwise for this face
        let along = dfree % 2 == 0;
        orient[ed] = if cw % 2 == 0 { !along } else { along };
        assigned[ed] = true;
        open[fi] -= 1;
        let other = face_of[dfree ^ 1];
        open[other] -= 1;
        if !is_outer(other) && open[other] == 1 {
            queue.push_back(other);
        }
    }
    if assigned.iter().any(|a| !a) {
        return Err(EvalError::NotPlanar);
    }
    Ok(orient)
}

fn skew_matrix(g: &MatchGraph, orient: &[bool], unit: bool) -> Matrix {
    let mut k = Matrix::zeros(g.n, g.n);
    for (ed, (u, v, w)) in g.edges.iter().enumerate() {
        let w = if unit { FieldElem::one() } else { w.clone() };
        let (a, b) = if orient[ed] { (*u, *v) } else { (*v, *u) };
        k[(a, b)] += &w;
        k[(b, a)] -= &w;
    }
    k
}

/// Pfaffian by recursive expansion along the first row.
pub fn pfaffian_expand(m: &Matrix) -> Result<FieldElem, EvalError> {
    if !m.is_skew() {
        return Err(EvalError::NotSkew);
    }
    if m.rows() % 2 == 1 {
        return Err(EvalError::OddDimension);
    }
    fn rec(m: &Matrix, idx: &[usize]) -> FieldElem {
        if idx.is_empty() {
            return FieldElem::one();
        }
        let mut total = FieldElem::zero();
        for j in 1..idx.len() {
            let a = &m[(idx[0], idx[j])];
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[j]).collect();
            let term = a * &rec(m, &rest);
            if j % 2 == 1 {
                total += &term;
            } else {
                total -= &term;
            }
        }
        total
    }
    let idx: Vec<usize> = (0..m.rows()).collect();
    Ok(rec(m, &idx))
}

/// Pfaffian of a skew-symmetric matrix: expansion up to 8x8, elimination above.
pub fn pfaffian(m: &Matrix) -> Result<FieldElem, EvalError> {
    if m.rows() <= 8 {
        return pfaffian_expand(m);
    }
    pfaffian_eliminate(m)
}

/// Pf(A) = a01 * Pf(B), B_ij = a_ij + (a_0j a_1i - a_0i a_1j) / a01 on indices >= 2.
pub fn pfaffian_eliminate(m: &Matrix) -> Result<FieldElem, EvalError> {
    if !m.is_skew() {
        return Err(EvalError::NotSkew);
    }
    let n = m.rows();
    if n % 2 == 1 {
        return Err(EvalError::OddDimension);
    }
    let mut a: Vec<Vec<FieldElem>> = (0..n).map(|r| m.row(r).to_vec()).collect();
    let mut result = FieldElem::one();
    let mut size = n;
    while size > 0 {
        // rows/cols 0..size are live; work on index 0
        let Some(j) = (1..size).find(|&j| !a[0][j].is_zero()) else { return Ok(FieldElem::zero()) };
        if j != 1 {
            a.swap(1, j);
            for row in a.iter_mut() {
                row.swap(1, j);
            }
            result = -result;
        }
        let p = a[0][1].clone();
        result *= &p;
        let pinv = p.inv().expect("nonzero pivot");
        let a0: Vec<FieldElem> = a[0][..size].to_vec();
        let a1: Vec<FieldElem> = a[1][..size].to_vec();
        let mut next: Vec<Vec<FieldElem>> = vec![vec![FieldElem::zero(); size - 2]; size - 2];
        for i in 2..size {
            for jj in (i + 1)..size {
                let mut v = a[i][jj].clone();
                let t1 = &a0[jj] * &a1[i];
                let t2 = &a0[i] * &a1[jj];
                if !(t1.is_zero() && t2.is_zero()) {
                    v += &(&(&t1 - &t2) * &pinv);
                }
                next[i - 2][jj - 2] = v.clone();
                next[jj - 2][i - 2] = -v;
            }
        }
        a = next;
        size -= 2;
    }
    Ok(result)
}

/// Weighted sum over perfect matchings via a Kasteleyn-signed Pfaffian. The
/// common sign of all matchings is read from the unit-weight Pfaffian.
pub fn count_pm(g: &MatchGraph) -> Result<FieldElem, EvalError> {
    if g.n % 2 == 1 {
        return Ok(FieldElem::zero());
    }
    if g.n == 0 {
        return Ok(FieldElem::one());
    }
    let orient = kasteleyn_orient(g)?;
    let unit = pfaffian(&skew_matrix(g, &orient, true))?;
    if unit.is_zero() {
        return Ok(FieldElem::zero());
    }
    let count = unit.as_rational().expect("integer count");
    let w = pfaffian(&skew_matrix(g, &orient, false))?;
    Ok(if count.is_negative() { -w } else { w })
}

/// Exhaustive weighted perfect-matching sum.
pub fn brute_pm(g: &MatchGraph) -> FieldElem {
    fn rec(g: &MatchGraph, used: &mut Vec<bool>) -> FieldElem {
        let Some(x) = (0..g.n).find(|&x| !used[x]) else { return FieldElem::one() };
        used[x] = true;
        let mut total = FieldElem::zero();
        for (u, v, w) in &g.edges {
            let y = if *u == x {
                *v
            } else if *v == x {
                *u
            } else {
                continue;
            };
            if used[y] {
                continue;
            }
            used[y] = true;
            total += &(w * &rec(g, used));
            used[y] = false;
        }
        used[x] = false;
        total
    }
    rec(g, &mut vec![false; g.n])
}

/// Matchgate signature of `g` with the given external nodes: entry x is the
/// matching sum after deleting external node k whenever x_k = 1.
pub fn matchgate_signature(g: &MatchGraph, external: &[usize]) -> Signature {
    let k = external.len();
    let values = (0..1usize << k)
        .map(|x| {
            let removed: Vec<usize> = (0..k).filter(|&j| (x >> (k - 1 - j)) & 1 == 1).map(|j| external[j]).collect();
            let keep: Vec<usize> = (0..g.n).filter(|v| !removed.contains(v)).collect();
            let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let mut h = MatchGraph::new(keep.len());
            for (u, v, w) in &g.edges {
                if let (Some(&a), Some(&b)) = (remap.get(u), remap.get(v)) {
                    h.add_edge(a, b, w.clone());
                }
            }
            brute_pm(&h)
        })
        .collect();
    Signature::new(k, values).expect("length matches")
}

fn flip_all(s: &Signature) -> Signature {
    let full = (1usize << s.arity()) - 1;
    s.map_values(|idx, _| s.get(idx ^ full).clone())
}

/// Ring arcs of each gadget node, before splicing.
struct Splice {
    g: MatchGraph,
    arcs: Vec<Vec<Vec<usize>>>,
}

impl Splice {
    fn node(&mut self) -> usize {
        self.arcs.push(Vec::new());
        self.g.add_node()
    }

    fn edge(&mut self, u: usize, v: usize, w: FieldElem) -> usize {
        self.g.add_edge_unplaced(u, v, w)
    }

    fn arc(&mut self, node: usize, edges: Vec<usize>) {
        self.arcs[node].push(edges);
    }
}

/// Planar matching graph realizing a closed grid, plus the scalar factor.
pub fn realize_matchgate(grid: &PlanarGrid) -> Result<(MatchGraph, FieldElem), EvalError> {
    if !grid.is_closed() {
        return Err(EvalError::Grid(GridError::Open));
    }
    let nv = grid.num_vertices();
    let all_ones = |s: &Signature| s.get((1 << s.arity()) - 1).clone();
    let needs = |s: &Signature| s.parity() != Parity::Odd || s.arity() != 2;
    let ok_plain = (0..nv).all(|v| {
        let s = grid.vertex_signature(v);
        !needs(s) || !all_ones(s).is_zero()
    });
    let ok_flipped = (0..nv).all(|v| {
        let s = grid.vertex_signature(v);
        !needs(s) || !s.get(0).is_zero()
    });
    let flip = if ok_plain {
        false
    } else if ok_flipped {
        true
    } else {
        let v = (0..nv)
            .find(|&v| {
                let s = grid.vertex_signature(v);
                needs(s) && all_ones(s).is_zero() && s.get(0).is_zero()
            })
            .unwrap_or(0);
        return Err(EvalError::NoRealization(format!("vertex {v} (both extreme entries vanish)")));
    };
    let sig_of = |v: usize| {
        let s = grid.vertex_signature(v);
        if flip {
            flip_all(s)
        } else {
            s.clone()
        }
    };
    let mut sp = Splice { g: MatchGraph::new(0), arcs: Vec::new() };
    // dart nodes; a plain disequality shares one node between its two darts
    let mut dart_node: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mediators = Vec::new();
    for e in grid.edges() {
        let med = e.med.signature();
        let med_sig = if flip { flip_all(med.as_signature()) } else { med.as_signature().clone() };
        // a self-loop keeps its darts apart so no gadget edge closes on itself
        if e.med == Mediator::Neq && e.a.vertex != e.b.vertex {
            let x = sp.node();
            dart_node.insert((e.a.vertex, e.a.slot), x);
            dart_node.insert((e.b.vertex, e.b.slot), x);
        } else {
            let xa = sp.node();
            let xb = sp.node();
            dart_node.insert((e.a.vertex, e.a.slot), xa);
            dart_node.insert((e.b.vertex, e.b.slot), xb);
            mediators.push((xa, xb, med_sig));
        }
    }
    let mut factor = FieldElem::one();
    for v in 0..nv {
        let f = sig_of(v);
        let d = |k: usize| dart_node[&(v, k)];
        match (f.arity(), f.parity()) {
            (4, Parity::Even) if is_matchgate(&f) => {
                let top = all_ones(&f);
                let inv = top.inv().expect("checked nonzero");
                // h(y) = f(!y) / f(1111): node i_k takes part iff x_k = 0
                let h = |bits: usize| &f.get(bits ^ 0b1111).clone() * &inv;
                let (i1, i2, i3, i4) = (d(0), d(1), d(2), d(3));
                let m = sp.node();
                let n = sp.node();
                let s12 = sp.edge(i1, i2, h(0b1100));
                let s23 = sp.edge(i2, i3, &h(0b0110) - &h(0b1010));
                let s34 = sp.edge(i3, i4, h(0b0011));
                let s41 = sp.edge(i4, i1, &h(0b1001) - &h(0b0101));
                let m1 = sp.edge(m, i1, FieldElem::one());
                let m2 = sp.edge(m, i2, FieldElem::one());
                let m3 = sp.edge(m, i3, FieldElem::zero());
                let n1 = sp.edge(n, i1, FieldElem::zero());
                let n3 = sp.edge(n, i3, h(0b1010));
                let n4 = sp.edge(n, i4, h(0b0101));
                let mn = sp.edge(m, n, FieldElem::one());
                // i1 east, i2 north, i3 west, i4 south, m above centre, n below
                sp.arc(i1, vec![s12, m1, n1, s41]);
                sp.arc(i2, vec![s23, m2, s12]);
                sp.arc(i3, vec![s34, n3, m3, s23]);
                sp.arc(i4, vec![s41, n4, s34]);
                sp.arc(m, vec![m2, m3, mn, m1]);
                sp.arc(n, vec![n1, mn, n3, n4]);
                factor *= &top;
            }
            (2, Parity::Even) => {
                let top = all_ones(&f);
                let e = sp.edge(d(0), d(1), f.get(0).try_div(&top).expect("checked nonzero"));
                sp.arc(d(0), vec![e]);
                sp.arc(d(1), vec![e]);
                factor *= &top;
            }
            (2, Parity::Odd) => {
                let c = sp.node();
                let e0 = sp.edge(c, d(0), f.get(0b01).clone());
                let e1 = sp.edge(c, d(1), f.get(0b10).clone());
                sp.arc(d(0), vec![e0]);
                sp.arc(d(1), vec![e1]);
                sp.arc(c, vec![e1, e0]);
            }
            _ => return Err(EvalError::NoRealization(format!("vertex {v} signature {f}"))),
        }
    }
    for (xa, xb, g) in mediators {
        match g.parity() {
            Parity::Odd => {
                let c = sp.node();
                let ea = sp.edge(c, xa, g.get(0b10).clone());
                let eb = sp.edge(c, xb, g.get(0b01).clone());
                sp.arc(xa, vec![ea]);
                sp.arc(xb, vec![eb]);
                sp.arc(c, vec![ea, eb]);
            }
            Parity::Even => {
                let p = sp.node();
                let q = sp.node();
                let ea = sp.edge(xa, p, g.get(0b11).clone());
                let pq = sp.edge(p, q, g.get(0b00).clone());
                let eb = sp.edge(q, xb, FieldElem::one());
                sp.arc(xa, vec![ea]);
                sp.arc(p, vec![ea, pq]);
                sp.arc(q, vec![pq, eb]);
                sp.arc(xb, vec![eb]);
            }
            Parity::Mixed => return Err(EvalError::NoRealization(format!("mediator {g}"))),
        }
    }
    let Splice { mut g, arcs } = sp;
    for (x, a) in arcs.into_iter().enumerate() {
        g.set_rotation(x, a.into_iter().flatten().collect());
    }
    Ok((g, factor))
}

/// Flip the first input of every odd 4-ary vertex, pushing the NOT onto the
/// mediator at that dart. An odd matchgate becomes an even one.
fn even_vertices(grid: &PlanarGrid) -> PlanarGrid {
    let mut g = grid.clone();
    for v in 0..grid.num_vertices() {
        let f = grid.vertex_signature(v);
        if f.arity() != 4 || f.parity() != Parity::Odd {
            continue;
        }
        let entries = (0..16).map(|i| f.get(i ^ 0b1000).clone()).collect();
        g = g.with_vertex_signature(v, &format!("f{v}'"), Signature::new(4, entries).expect("arity 4"));
        for (e, edge) in g.edges().to_vec().into_iter().enumerate() {
            let mask = if edge.a.vertex == v && edge.a.slot == 0 {
                0b10
            } else if edge.b.vertex == v && edge.b.slot == 0 {
                0b01
            } else {
                continue;
            };
            let m = edge.med.signature();
            let at = |i: usize| m.get(i ^ mask).clone();
            g = g.with_edge_mediator(e, Mediator::Sig(Sig2::new(at(0), at(1), at(2), at(3))));
            break;
        }
    }
    g
}

pub fn eval_matchgate_instance(grid: &PlanarGrid) -> Result<FieldElem, EvalError> {
    let grid = &even_vertices(grid);
    let dead: Vec<usize> = (0..grid.num_vertices())
        .filter(|&v| {
            let s = grid.vertex_signature(v);
            s.parity() == Parity::Even && s.get(0).is_zero() && s.get((1 << s.arity()) - 1).is_zero()
        })
        .collect();
    if dead.is_empty() {
        let (g, factor) = realize_matchgate(grid)?;
        return Ok(&factor * &count_pm(&g)?);
    }
    // Setting f(1..1) = s keeps an even matchgate a matchgate (f(0..0) stays 0),
    // and the Holant is a polynomial in s of degree <= dead.len(); interpolate at 0.
    let pts: Vec<FieldElem> = (1..=dead.len() as i64 + 1).map(FieldElem::from_int).collect();
    let mut vals = Vec::with_capacity(pts.len());
    for s in &pts {
        let mut g = grid.clone();
        for &v in &dead {
            let f = grid.vertex_signature(v);
            let mut entries = f.values().to_vec();
            let top = entries.len() - 1;
            entries[top] = s.clone();
            let f = Signature::new(f.arity(), entries).expect("same arity");
            g = g.with_vertex_signature(v, &format!("f{v}"), f);
        }
        let (m, factor) = realize_matchgate(&g)?;
        vals.push(&factor * &count_pm(&m)?);
    }
    let mut at_zero = FieldElem::zero();
    for (i, (xi, yi)) in pts.iter().zip(&vals).enumerate() {
        let mut w = yi.clone();
        for (j, xj) in pts.iter().enumerate() {
            if i != j {
                w = &w * &xj.try_div(&(xj - xi)).expect("distinct nodes");
            }
        }
        at_zero = &at_zero + &w;
    }
    Ok(at_zero)
}

/// Quadratic form over Z4 with even cross terms: c + sum lin_a t_a + 2 sum_{a<b} quad_ab t_a t_b.
struct QuadForm {
    c: u8,
    lin: Vec<u8>,
    quad: Vec<Vec<bool>>,
    alive: Vec<bool>,
}

impl QuadForm {
    fn new(r: usize) -> QuadForm {
        QuadForm { c: 0, lin: vec![0; r], quad: vec![vec![false; r]; r], alive: vec![true; r] }
    }

    fn toggle(&mut self, a: usize, b: usize) {
        if a == b {
            self.lin[a] = (self.lin[a] + 2) % 4;
        } else {
            self.quad[a][b] ^= true;
            self.quad[b][a] ^= true;
        }
    }

    /// Adds a * (c xor t_S) mod 4, using xor = sum t - 2 sum pairs (mod 4).
    fn add_xor(&mut self, a: u8, c: u8, s: &[usize]) {
        let a = a % 4;
        if a == 0 {
            return;
        }
        self.c = (self.c + a * c) % 4;
        let coef = if c == 1 { (4 - a) % 4 } else { a };
        for &x in s {
            self.lin[x] = (self.lin[x] + coef) % 4;
        }
        if a % 2 == 1 {
            for i in 0..s.len() {
                for j in i + 1..s.len() {
                    self.toggle(s[i], s[j]);
                }
            }
        }
    }

    /// Adds 2 * (c1 xor t_S1)(c2 xor t_S2); only the product mod 2 matters.
    fn add_cross(&mut self, c1: u8, s1: &[usize], c2: u8, s2: &[usize]) {
        self.c = (self.c + 2 * (c1 & c2)) % 4;
        if c1 == 1 {
            for &b in s2 {
                self.lin[b] = (self.lin[b] + 2) % 4;
            }
        }
        if c2 == 1 {
            for &a in s1 {
                self.lin[a] = (self.lin[a] + 2) % 4;
            }
        }
        for &a in s1 {
            for &b in s2 {
                self.toggle(a, b);
            }
        }
    }

    /// Sum over all 0-1 assignments of i^Q by eliminating the lowest variable first.
    fn gauss_sum(mut self) -> FieldElem {
        let r = self.lin.len();
        let mut factor = FieldElem::one();
        let two = FieldElem::from_int(2);
        while let Some(a) = (0..r).find(|&a| self.alive[a]) {
            let l = self.lin[a] % 4;
            let nb: Vec<usize> = (0..r).filter(|&b| b != a && self.alive[b] && self.quad[a][b]).collect();
            self.alive[a] = false;
            for &b in &nb {
                self.quad[a][b] = false;
                self.quad[b][a] = false;
            }
            if l % 2 == 0 {
                factor *= &two;
                let rhs = l / 2;
                let Some((&b, rest)) = nb.split_first() else {
                    if rhs == 1 {
                        return FieldElem::zero();
                    }
                    continue;
                };
                // t_b = rhs xor t_rest
                let lb = self.lin[b];
                let nbb: Vec<usize> = (0..r).filter(|&j| j != b && self.alive[j] && self.quad[b][j]).collect();
                self.alive[b] = false;
                self.lin[b] = 0;
                for &j in &nbb {
                    self.quad[b][j] = false;
                    self.quad[j][b] = false;
                }
                self.add_xor(lb, rhs, rest);
                for &j in &nbb {
                    self.add_cross(rhs, rest, 0, &[j]);
                }
            } else {
                factor *= &(&FieldElem::one() + &zeta8_pow(2 * l as i64));
                self.add_xor(4 - l, 0, &nb);
            }
        }
        &factor * &zeta8_pow(2 * self.c as i64)
    }
}

/// Dart value as (constant, free-variable set) after solving the constraints.
type XorExpr = (u8, Vec<usize>);

fn solve_gf2(nvars: usize, rows: Vec<(Vec<usize>, u8)>) -> Option<(Vec<XorExpr>, usize)> {
    let words = nvars.div_ceil(64).max(1);
    let mut mat: Vec<(Vec<u64>, u8)> = rows
        .into_iter()
        .map(|(vars, rhs)| {
            let mut w = vec![0u64; words];
            for v in vars {
                w[v / 64] ^= 1 << (v % 64);
            }
            (w, rhs)
        })
        .collect();
    let get = |w: &[u64], v: usize| (w[v / 64] >> (v % 64)) & 1 == 1;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..nvars {
        let Some(p) = (r..mat.len()).find(|&i| get(&mat[i].0, col)) else { continue };
        mat.swap(r, p);
        let (pw, prhs) = mat[r].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i != r && get(&row.0, col) {
                for k in 0..words {
                    row.0[k] ^= pw[k];
                }
                row.1 ^= prhs;
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    if mat[r..].iter().any(|(_, rhs)| *rhs == 1) {
        return None;
    }
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; nvars];
        for &(_, c) in &pivots {
            v[c] = true;
        }
        v
    };
    let free: Vec<usize> = (0..nvars).filter(|&v| !is_pivot[v]).collect();
    let free_idx: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut expr: Vec<XorExpr> = vec![(0, Vec::new()); nvars];
    for &v in &free {
        expr[v] = (0, vec![free_idx[&v]]);
    }
    for &(row, col) in &pivots {
        let (w, rhs) = &mat[row];
        let set: Vec<usize> = free.iter().filter(|&&f| get(w, f)).map(|f| free_idx[f]).collect();
        expr[col] = (*rhs, set);
    }
    Some((expr, free.len()))
}

/// Affine instance: lambda products times a quadratic Gauss sum over the
/// solution space of all support constraints.
pub fn eval_affine_instance(grid: &PlanarGrid) -> Result<FieldElem, EvalError> {
    if !grid.is_closed() {
        return Err(EvalError::Grid(GridError::Open));
    }
    let nv = grid.num_vertices();
    let mut off = vec![0usize; nv + 1];
    for v in 0..nv {
        off[v + 1] = off[v] + grid.degree(v);
    }
    let mut forms = Vec::new();
    for v in 0..nv {
        let f = grid.vertex_signature(v);
        let form = is_affine(f).ok_or_else(|| EvalError::NotAffine(format!("vertex {v}")))?;
        forms.push((form, (off[v]..off[v + 1]).collect::<Vec<_>>()));
    }
    for (i, e) in grid.edges().iter().enumerate() {
        let g = e.med.signature();
        let form = is_affine(g.as_signature()).ok_or_else(|| EvalError::NotAffine(format!("mediator of edge {i}")))?;
        forms.push((form, vec![off[e.a.vertex] + e.a.slot, off[e.b.vertex] + e.b.slot]));
    }
    let mut lambda = FieldElem::one();
    let mut rows = Vec::new();
    for (form, vars) in &forms {
        if form.lambda.is_zero() {
            return Ok(FieldElem::zero());
        }
        lambda *= &form.lambda;
        for (mask, rhs) in &form.constraints {
            let vs: Vec<usize> = (0..vars.len()).filter(|k| mask >> k & 1 == 1).map(|k| vars[k]).collect();
            rows.push((vs, *rhs));
        }
    }
    let Some((expr, r)) = solve_gf2(off[nv], rows) else { return Ok(FieldElem::zero()) };
    let mut q = QuadForm::new(r);
    for (form, vars) in &forms {
        q.c = (q.c + form.q0) % 4;
        for (k, &a) in form.lin.iter().enumerate() {
            let (c, s) = &expr[vars[k]];
            q.add_xor(a, *c, s);
        }
        for &(j, k) in &form.cross {
            let (c1, s1) = &expr[vars[j]];
            let (c2, s2) = &expr[vars[k]];
            q.add_cross(*c1, s1, *c2, s2);
        }
    }
    Ok(&lambda * &q.gauss_sum())
}

struct ParityUnionFind {
    parent: Vec<usize>,
    /// parity relative to the parent
    par: Vec<u8>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        ParityUnionFind { parent: (0..n).collect(), par: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, u8) {
        if self.parent[x] == x {
            return (x, 0);
        }
        let (r, p) = self.find(self.parent[x]);
        self.parent[x] = r;
        self.par[x] ^= p;
        (r, self.par[x])
    }

    /// Record value(x) xor value(y) = p; false on contradiction.
    fn union(&mut self, x: usize, y: usize, p: u8) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == p;
        }
        self.parent[rx] = ry;
        self.par[rx] = px ^ py ^ p;
        true
    }
}

/// Product instance: every factor is a weighted equality block; blocks and
/// darts are merged with parities and each component is summed over its two values.
pub fn eval_product_instance(grid: &PlanarGrid) -> Result<FieldElem, EvalError> {
    if !grid.is_closed() {
        return Err(EvalError::Grid(GridError::Open));
    }
    let nv = grid.num_vertices();
    let mut off = vec![0usize; nv + 1];
    for v in 0..nv {
        off[v + 1] = off[v] + grid.degree(v);
    }
    let mut forms = Vec::new();
    for v in 0..nv {
        let form = is_product(grid.vertex_signature(v)).ok_or_else(|| EvalError::NotProduct(format!("vertex {v}")))?;
        forms.push((form, (off[v]..off[v + 1]).collect::<Vec<_>>()));
    }
    for (i, e) in grid.edges().iter().enumerate() {
        let form = is_product(e.med.signature().as_signature())
            .ok_or_else(|| EvalError::NotProduct(format!("mediator of edge {i}")))?;
        forms.push((form, vec![off[e.a.vertex] + e.a.slot, off[e.b.vertex] + e.b.slot]));
    }
    let ndarts = off[nv];
    let nblocks: usize = forms.iter().map(|(f, _)| f.blocks.len()).sum();
    let mut uf = ParityUnionFind::new(ndarts + nblocks);
    let mut scale = FieldElem::one();
    let mut weights = Vec::with_capacity(nblocks);
    let mut node = ndarts;
    for (form, vars) in &forms {
        if form.scale.is_zero() {
            return Ok(FieldElem::zero());
        }
        scale *= &form.scale;
        for b in &form.blocks {
            for (&k, &al) in b.vars.iter().zip(&b.alpha) {
                if !uf.union(vars[k], node, al) {
                    return Ok(FieldElem::zero());
                }
            }
            weights.push((node, b.w0.clone(), b.w1.clone()));
            node += 1;
        }
    }
    let mut comp: HashMap<usize, [FieldElem; 2]> = HashMap::new();
    for (nd, w0, w1) in weights {
        let (root, p) = uf.find(nd);
        let entry = comp.entry(root).or_insert_with(|| [FieldElem::one(), FieldElem::one()]);
        for (r, slot) in entry.iter_mut().enumerate() {
            *slot *= if (r as u8) ^ p == 0 { &w0 } else { &w1 };
        }
    }
    // darts never touched by a block would be free; every variable lies in a block
    let mut total = scale;
    for [s0, s1] in comp.into_values() {
        total *= &(&s0 + &s1);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{brute_holant, octahedron, parallel_multi};
    use crate::signature::Sig4;

    fn q(n: i64) -> FieldElem {
        FieldElem::from_int(n)
    }

    fn lattice_graph(rows: usize, cols: usize) -> MatchGraph {
        let mut pos = Vec::new();
        let mut edges = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                pos.push((j as i64, i as i64));
                let id = i * cols + j;
                if j + 1 < cols {
                    edges.push((id, id + 1, FieldElem::one()));
                }
                if i + 1 < rows {
                    edges.push((id, id + cols, FieldElem::one()));
                }
            }
        }
        MatchGraph::from_plane(&pos, &edges)
    }

    #[test]
    fn small_matching_counts() {
        let mut single = MatchGraph::new(2);
        single.add_edge(0, 1, q(7));
        assert_eq!(count_pm(&single).unwrap(), q(7));
        let square = lattice_graph(2, 2);
        let o = kasteleyn_orient(&square).unwrap();
        assert!(square.kasteleyn_violations(&o).len() <= 1);
        assert_eq!(count_pm(&square).unwrap(), q(2));
        assert_eq!(count_pm(&lattice_graph(2, 3)).unwrap(), q(3));
        assert_eq!(count_pm(&lattice_graph(4, 4)).unwrap(), q(36));
    }

    #[test]
    fn pfaffian_small() {
        let a = Matrix::from_ints(&[&[0, 5], &[-5, 0]]);
        assert_eq!(pfaffian(&a).unwrap(), q(5));
        let (a, b, c, d, e, f) = (2, 3, 5, 7, 11, 13);
        let m = Matrix::from_ints(&[&[0, a, b, c], &[-a, 0, d, e], &[-b, -d, 0, f], &[-c, -e, -f, 0]]);
        assert_eq!(pfaffian(&m).unwrap(), q(a * f - b * e + c * d));
        assert_eq!(pfaffian_eliminate(&m).unwrap(), q(a * f - b * e + c * d));
        assert_eq!(pfaffian(&Matrix::from_ints(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]])), Err(EvalError::OddDimension));
    }

    #[test]
    fn realization_gadget_signature() {
        // x chosen so that a*x - b*y = c*z - d*w
        let x = (&(&q(5) - &q(28)) + &q(18)).try_div(&q(2)).unwrap();
        let f = Sig4::eight_vertex(q(2), q(3), q(5), q(7), q(4), x, q(6), q(1));
        assert!(is_matchgate(f.as_signature()));
        let grid = parallel_multi(2, f.as_signature(), Mediator::Neq);
        assert_eq!(eval_matchgate_instance(&grid).unwrap(), brute_holant(&grid).unwrap());
        let oct = octahedron(f.as_signature(), Mediator::Neq);
        assert_eq!(eval_matchgate_instance(&oct).unwrap(), brute_holant(&oct).unwrap());
    }

    #[test]
    fn matchgate_flip_and_fallback() {
        // x = 0 forces the global flip: 0 - 2 = 18 - 20
        let g = Sig4::eight_vertex(q(1), q(2), q(3), q(4), q(5), q(0), q(1), q(6));
        assert!(is_matchgate(g.as_signature()));
        let oct = octahedron(g.as_signature(), Mediator::Neq);
        assert_eq!(eval_matchgate_instance(&oct).unwrap(), brute_holant(&oct).unwrap());
        let bad = Sig4::eight_vertex_ints([1, 2, 3, 5, 7, 11, 13, 17]);
        assert!(matches!(
            eval_matchgate_instance(&octahedron(bad.as_signature(), Mediator::Neq)),
            Err(EvalError::NoRealization(_))
        ));
    }

    #[test]
    fn mediated_matchings() {
        // perfect matchings of the 4-cycle through equality mediators
        let g = Signature::from_ints(&[0, 1, 1, 0]);
        let grid = PlanarGrid::new(
            vec![("n".into(), g)],
            vec![0, 0, 0, 0],
            (0..4)
                .map(|i| crate::grid::Edge {
                    a: crate::grid::Dart::new(i, 1),
                    b: crate::grid::Dart::new((i + 1) % 4, 0),
                    med: Mediator::Eq,
                })
                .collect(),
            vec![],
        )
        .unwrap();
        assert_eq!(eval_matchgate_instance(&grid).unwrap(), q(2));
        assert_eq!(brute_holant(&grid).unwrap(), q(2));
    }

    #[test]
    fn affine_examples() {
        // equalities only: a cycle of EQ2 vertices joined by EQ2 has 2 assignments
        let eq = Signature::named("EQ2").unwrap();
        let grid = PlanarGrid::new(
            vec![("e".into(), eq)],
            vec![0, 0, 0],
            (0..3)
                .map(|i| crate::grid::Edge {
                    a: crate::grid::Dart::new(i, 1),
                    b: crate::grid::Dart::new((i + 1) % 3, 0),
                    med: Mediator::Eq,
                })
                .collect(),
            vec![],
        )
        .unwrap();
        assert_eq!(eval_affine_instance(&grid).unwrap(), q(2));
        assert_eq!(eval_product_instance(&grid).unwrap(), q(2));
        // EQ4 with both self-loops through disequalities: no consistent assignment
        let eq4 = Signature::named("EQ4").unwrap();
        let g = PlanarGrid::new(
            vec![("e".into(), eq4)],
            vec![0],
            vec![
                crate::grid::Edge { a: crate::grid::Dart::new(0, 0), b: crate::grid::Dart::new(0, 3), med: Mediator::Neq },
                crate::grid::Edge { a: crate::grid::Dart::new(0, 1), b: crate::grid::Dart::new(0, 2), med: Mediator::Neq },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(eval_affine_instance(&g).unwrap(), q(0));
        // an affine eight-vertex signature on the octahedron
        let i = FieldElem::i();
        let f = Sig4::eight_vertex(q(1), i.clone(), q(1), -&i, q(1), q(1), i.clone(), q(-1));
        if is_affine(f.as_signature()).is_some() {
            let oct = octahedron(f.as_signature(), Mediator::Neq);
            assert_eq!(eval_affine_instance(&oct).unwrap(), brute_holant(&oct).unwrap());
        }
    }

    #[test]
    fn product_examples() {
        let mut vals = vec![q(0); 16];
        vals[0] = q(2);
        vals[15] = q(3);
        let f = Signature::new(4, vals).unwrap();
        let oct = octahedron(&f, Mediator::Neq);
        assert_eq!(eval_product_instance(&oct).unwrap(), brute_holant(&oct).unwrap());
        // odd cycle of disequalities through EQ2 vertices
        let eq = Signature::named("EQ2").unwrap();
        let grid = PlanarGrid::new(
            vec![("e".into(), eq)],
            vec![0, 0, 0],
            (0..3)
                .map(|i| crate::grid::Edge {
                    a: crate::grid::Dart::new(i, 1),
                    b: crate::grid::Dart::new((i + 1) % 3, 0),
                    med: Mediator::Neq,
                })
                .collect(),
            vec![],
        )
        .unwrap();
        assert_eq!(eval_product_instance(&grid).unwrap(), q(0));
    }

    #[test]
    fn matchgate_with_vanishing_extremes() {
        let f = Sig4::eight_vertex_ints([0, 1, 1, 1, 2, 0, 1, 1]);
        assert!(is_matchgate(f.as_signature()));
        let mut rng = crate::sample::rng_from_seed(3);
        for _ in 0..10 {
            let g = crate::grid::random_grid(&mut rng, 14, f.as_signature(), Mediator::Neq);
            assert_eq!(eval_matchgate_instance(&g).unwrap(), brute_holant(&g).unwrap());
        }
    }

    #[test]
    fn odd_matchgate_vertices() {
        // odd parity, first-order identity f(0010)f(1101) - f(0001)f(1110) = f(0100)f(1011) - f(0111)f(1000)
        let mut vals = vec![q(0); 16];
        for (idx, v) in [(0b0001, 2), (0b0010, 1), (0b0100, 3), (0b1000, 1), (0b1110, 5), (0b1011, 1), (0b0111, -1)] {
            vals[idx] = q(v);
        }
        // 1 * f(1101) - 2 * 5 = 3 * 1 - (-1) * 1
        vals[0b1101] = q(14);
        let f = Signature::new(4, vals).unwrap();
        assert!(is_matchgate(&f));
        let mut rng = crate::sample::rng_from_seed(4);
        for _ in 0..10 {
            let g = crate::grid::random_grid(&mut rng, 14, &f, Mediator::Neq);
            assert_eq!(eval_matchgate_instance(&g).unwrap(), brute_holant(&g).unwrap());
        }
    }
}
