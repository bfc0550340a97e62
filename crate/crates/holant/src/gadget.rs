//! Gadget calculus: connection through a double disequality, looping,
//! binary modification and chains, each with a symbolic evaluation and a
//! planar gadget graph for the brute-force oracle.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::FieldElem;
use crate::grid::{brute_signature, Dart, Edge, GridError, Mediator, PlanarGrid};
use crate::linalg::Matrix;
use crate::signature::{double_neq_matrix, Sig2, Sig4, Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("expected a {expected}-ary gadget, got arity {got}")]
    TypeMismatch { expected: usize, got: usize },
    #[error("variable index {0} out of range 1..=4")]
    BadVariable(usize),
    #[error("direct looping needs g00 = g11")]
    PreconditionViolated,
    #[error("gadget syntax error at token {pos}: {reason}")]
    Syntax { pos: usize, reason: String },
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Which pair of adjacent variables a loop closes off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopPair {
    /// x4, x3 joined to g; the result is indexed by (x1, x2).
    X3X4,
    /// x2, x1 joined to g; the result is indexed by (x4, x3).
    X1X2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GadgetExpr {
    Leaf(Sig4),
    Rotate(Box<GadgetExpr>, i64),
    Connect(Box<GadgetExpr>, Box<GadgetExpr>),
    Loop(Box<GadgetExpr>, LoopPair, Sig2),
    BinaryModify(Box<GadgetExpr>, usize, Sig2),
    Chain(Box<GadgetExpr>, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GadgetValue {
    Four(Sig4),
    Two(Sig2),
}

impl GadgetValue {
    pub fn signature(&self) -> &Signature {
        match self {
            GadgetValue::Four(f) => f.as_signature(),
            GadgetValue::Two(g) => g.as_signature(),
        }
    }

    pub fn four(self) -> Result<Sig4, GadgetError> {
        match self {
            GadgetValue::Four(f) => Ok(f),
            GadgetValue::Two(_) => Err(GadgetError::TypeMismatch { expected: 4, got: 2 }),
        }
    }

    pub fn two(self) -> Result<Sig2, GadgetError> {
        match self {
            GadgetValue::Two(g) => Ok(g),
            GadgetValue::Four(_) => Err(GadgetError::TypeMismatch { expected: 2, got: 4 }),
        }
    }
}

impl fmt::Display for GadgetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.signature().fmt(f)
    }
}

/// M(f1) N M(f2): x4, x3 of f1 meet x1, x2 of f2 through disequalities.
pub fn connect(f1: &Sig4, f2: &Sig4) -> Sig4 {
    Sig4::from_matrix(&(&(&f1.matrix() * &double_neq_matrix()) * &f2.matrix()))
}

fn vec4(g: &Sig2) -> Matrix {
    Matrix::from_rows(g.as_signature().values().iter().map(|v| vec![v.clone()]).collect())
}

/// Close two adjacent variables of f with the binary g, honest contraction through N.
pub fn loop_binary(f: &Sig4, pair: LoopPair, g: &Sig2) -> Sig2 {
    match pair {
        LoopPair::X3X4 => {
            let h = &(&f.matrix() * &double_neq_matrix()) * &vec4(g);
            Sig2::new(h[(0, 0)].clone(), h[(1, 0)].clone(), h[(2, 0)].clone(), h[(3, 0)].clone())
        }
        LoopPair::X1X2 => {
            // h(x4, x3) = sum f(x1,x2,x3,x4) g(!x2, !x1)
            let mut h = vec![FieldElem::zero(); 4];
            for idx in 0..16usize {
                let (x1, x2, x3, x4) = ((idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
                let gv = g.g((1 - x2) as u8, (1 - x1) as u8);
                if gv.is_zero() {
                    continue;
                }
                h[2 * x4 + x3] += &(f.get(idx) * gv);
            }
            let [h0, h1, h2, h3] = <[FieldElem; 4]>::try_from(h).expect("four values");
            Sig2::new(h0, h1, h2, h3)
        }
    }
}

/// Looping without the double disequality, valid only when g00 = g11.
pub fn loop_direct(f: &Sig4, pair: LoopPair, g: &Sig2) -> Result<Sig2, GadgetError> {
    if g.g(0, 0) != g.g(1, 1) {
        return Err(GadgetError::PreconditionViolated);
    }
    let rev = g.reversed();
    match pair {
        LoopPair::X3X4 => {
            let h = &f.matrix() * &vec4(&rev);
            Ok(Sig2::new(h[(0, 0)].clone(), h[(1, 0)].clone(), h[(2, 0)].clone(), h[(3, 0)].clone()))
        }
        LoopPair::X1X2 => Ok(loop_binary(f, pair, g)),
    }
}

/// f'(..x'..) = sum_x g(x', 1 - x) f(..x..) on variable `var` (1-based).
pub fn binary_modify(f: &Sig4, var: usize, g: &Sig2) -> Result<Sig4, GadgetError> {
    if !(1..=4).contains(&var) {
        return Err(GadgetError::BadVariable(var));
    }
    let shift = 4 - var;
    let values = (0..16usize)
        .map(|idx| {
            let xp = ((idx >> shift) & 1) as u8;
            let mut acc = FieldElem::zero();
            for x in 0..2u8 {
                let gv = g.g(xp, 1 - x);
                if !gv.is_zero() {
                    let src = (idx & !(1 << shift)) | ((x as usize) << shift);
                    acc += &(gv * f.get(src));
                }
            }
            acc
        })
        .collect();
    Ok(Sig4::new(values)?)
}

/// 2s+1 copies alternating rot(f) and f, joined by N.
pub fn chain(f: &Sig4, s: usize) -> Sig4 {
    let r = f.rotate(1);
    let mut acc = r.clone();
    for _ in 0..s {
        acc = connect(&connect(&acc, f), &r);
    }
    acc
}

/// `copies` unrotated copies of f joined by N.
pub fn path(f: &Sig4, copies: usize) -> Sig4 {
    assert!(copies >= 1);
    let mut acc = f.clone();
    for _ in 1..copies {
        acc = connect(&acc, f);
    }
    acc
}

impl GadgetExpr {
    pub fn leaf(f: Sig4) -> GadgetExpr {
        GadgetExpr::Leaf(f)
    }

    pub fn rotate(self, k: i64) -> GadgetExpr {
        GadgetExpr::Rotate(Box::new(self), k)
    }

    pub fn connect(self, other: GadgetExpr) -> GadgetExpr {
        GadgetExpr::Connect(Box::new(self), Box::new(other))
    }

    pub fn looped(self, pair: LoopPair, g: Sig2) -> GadgetExpr {
        GadgetExpr::Loop(Box::new(self), pair, g)
    }

    pub fn modify(self, var: usize, g: Sig2) -> GadgetExpr {
        GadgetExpr::BinaryModify(Box::new(self), var, g)
    }

    pub fn chain(self, s: usize) -> GadgetExpr {
        GadgetExpr::Chain(Box::new(self), s)
    }

    /// Nested connections of `copies` copies.
    pub fn path(self, copies: usize) -> GadgetExpr {
        assert!(copies >= 1);
        let mut acc = self.clone();
        for _ in 1..copies {
            acc = acc.connect(self.clone());
        }
        acc
    }

    pub fn leaves(&self) -> usize {
        match self {
            GadgetExpr::Leaf(_) => 1,
            GadgetExpr::Rotate(e, _) | GadgetExpr::Loop(e, _, _) => e.leaves(),
            GadgetExpr::BinaryModify(e, _, _) => e.leaves() + 1,
            GadgetExpr::Connect(a, b) => a.leaves() + b.leaves(),
            GadgetExpr::Chain(e, s) => e.leaves() * (2 * s + 1),
        }
    }

    /// Symbolic evaluation by matrix products.
    pub fn eval(&self) -> Result<GadgetValue, GadgetError> {
        Ok(match self {
            GadgetExpr::Leaf(f) => GadgetValue::Four(f.clone()),
            GadgetExpr::Rotate(e, k) => GadgetValue::Four(e.eval()?.four()?.rotate(*k)),
            GadgetExpr::Connect(a, b) => GadgetValue::Four(connect(&a.eval()?.four()?, &b.eval()?.four()?)),
            GadgetExpr::Loop(e, pair, g) => GadgetValue::Two(loop_binary(&e.eval()?.four()?, *pair, g)),
            GadgetExpr::BinaryModify(e, var, g) => GadgetValue::Four(binary_modify(&e.eval()?.four()?, *var, g)?),
            GadgetExpr::Chain(e, s) => GadgetValue::Four(chain(&e.eval()?.four()?, *s)),
        })
    }

    /// The planar gadget graph; external darts in variable order.
    pub fn build_grid(&self) -> Result<PlanarGrid, GadgetError> {
        let mut b = Builder::default();
        let ext = b.build(self)?;
        Ok(PlanarGrid::new(b.sigs, b.vertices, b.edges, ext)?)
    }

    /// Brute-force contraction of the gadget graph.
    pub fn brute(&self) -> Result<Signature, GadgetError> {
        Ok(brute_signature(&self.build_grid()?)?)
    }

    pub fn parse(src: &str) -> Result<GadgetExpr, GadgetError> {
        parse_gadget(src)
    }
}

#[derive(Default)]
struct Builder {
    sigs: Vec<(String, Signature)>,
    vertices: Vec<usize>,
    edges: Vec<Edge>,
}

impl Builder {
    fn vertex(&mut self, sig: Signature) -> usize {
        let v = self.vertices.len();
        self.sigs.push((format!("g{v}"), sig));
        self.vertices.push(self.sigs.len() - 1);
        v
    }

    fn neq(&mut self, a: Dart, b: Dart) {
        self.edges.push(Edge { a, b, med: Mediator::Neq });
    }

    fn build(&mut self, e: &GadgetExpr) -> Result<Vec<Dart>, GadgetError> {
        Ok(match e {
            GadgetExpr::Leaf(f) => {
                let v = self.vertex(f.as_signature().clone());
                (0..4).map(|k| Dart::new(v, k)).collect()
            }
            GadgetExpr::Rotate(inner, k) => {
                let mut d = self.build4(inner)?;
                // one turn reads x1 from the old x2 dart
                d.rotate_left(k.rem_euclid(4) as usize);
                d
            }
            GadgetExpr::Connect(a, b) => {
                let da = self.build4(a)?;
                let db = self.build4(b)?;
                self.neq(da[3], db[0]);
                self.neq(da[2], db[1]);
                vec![da[0], da[1], db[2], db[3]]
            }
            GadgetExpr::Loop(inner, pair, g) => {
                let d = self.build4(inner)?;
                let w = self.vertex(g.as_signature().clone());
                match pair {
                    LoopPair::X3X4 => {
                        self.neq(d[3], Dart::new(w, 0));
                        self.neq(d[2], Dart::new(w, 1));
                        vec![d[0], d[1]]
                    }
                    LoopPair::X1X2 => {
                        self.neq(d[1], Dart::new(w, 0));
                        self.neq(d[0], Dart::new(w, 1));
                        vec![d[3], d[2]]
                    }
                }
            }
            GadgetExpr::BinaryModify(inner, var, g) => {
                if !(1..=4).contains(var) {
                    return Err(GadgetError::BadVariable(*var));
                }
                let mut d = self.build4(inner)?;
                let w = self.vertex(g.as_signature().clone());
                self.neq(d[var - 1], Dart::new(w, 1));
                d[var - 1] = Dart::new(w, 0);
                d
            }
            GadgetExpr::Chain(inner, s) => {
                let r = GadgetExpr::Rotate(inner.clone(), 1);
                let mut acc = r.clone();
                for _ in 0..*s {
                    acc = acc.connect((**inner).clone()).connect(r.clone());
                }
                self.build(&acc)?
            }
        })
    }

    fn build4(&mut self, e: &GadgetExpr) -> Result<Vec<Dart>, GadgetError> {
        let d = self.build(e)?;
        if d.len() != 4 {
            return Err(GadgetError::TypeMismatch { expected: 4, got: d.len() });
        }
        Ok(d)
    }
}

/// Even-Coloring parameter maps acting on (b, c, d, a).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvenColoringMap {
    Z,
    HZ,
}

pub fn even_coloring_matrix(which: EvenColoringMap) -> Matrix {
    let m = match which {
        EvenColoringMap::Z => Matrix::from_ints(&[&[1, -1, 1, -1], &[-1, 1, 1, -1], &[1, 1, 1, 1], &[1, 1, -1, -1]]),
        EvenColoringMap::HZ => Matrix::from_ints(&[&[1, -1, 1, 1], &[-1, 1, 1, 1], &[1, 1, 1, -1], &[1, 1, -1, 1]]),
    };
    m.scale(&FieldElem::frac(1, 2))
}

/// (b, c, d, a) -> (b', c', d', a').
pub fn even_coloring_map(p: [FieldElem; 4], which: EvenColoringMap) -> [FieldElem; 4] {
    let m = even_coloring_matrix(which);
    let v = Matrix::from_rows(p.into_iter().map(|x| vec![x]).collect());
    let r = &m * &v;
    [r[(0, 0)].clone(), r[(1, 0)].clone(), r[(2, 0)].clone(), r[(3, 0)].clone()]
}

/// The symmetric signature [[a,0,0,b],[0,c,d,0],[0,d,c,0],[b,0,0,a]] after the map.
pub fn even_coloring_sig(a: &FieldElem, b: &FieldElem, c: &FieldElem, d: &FieldElem, which: EvenColoringMap) -> Sig4 {
    let [b2, c2, d2, a2] = even_coloring_map([b.clone(), c.clone(), d.clone(), a.clone()], which);
    Sig4::symmetric(&a2, &b2, &c2, &d2)
}

/// A named construction, with its expected closed form when one is known.
#[derive(Clone, Debug)]
pub struct NamedGadget {
    pub name: &'static str,
    pub expr: GadgetExpr,
    pub expected: Option<GadgetValue>,
    /// For leaves produced by a parameter map: Pl-Holant(NEQ2 | source) must equal Pl-Holant(NEQ2 | result).
    pub holant_source: Option<Sig4>,
}

fn q(n: i64) -> FieldElem {
    FieldElem::from_int(n)
}

fn mat4(rows: [[FieldElem; 4]; 4]) -> Sig4 {
    Sig4::from_matrix(&Matrix::from_rows(rows.into_iter().map(|r| r.to_vec()).collect()))
}

/// The lemma table.
pub fn lemma_table() -> Vec<NamedGadget> {
    let z = FieldElem::zero;
    let one = FieldElem::one;
    let mut t = Vec::new();
    let mut push = |name, expr: GadgetExpr, expected: Option<GadgetValue>| {
        t.push(NamedGadget { name, expr, expected, holant_source: None })
    };

    // f = [[1,0,0,b],[0,c,d,0],[0,w,0,0],[0,0,0,1]] with b=2, c=3, d=5, w=7
    let (b, c, d, w) = (q(2), q(3), q(5), q(7));
    let f54 = Sig4::eight_vertex(one(), b.clone(), c.clone(), d.clone(), w.clone(), one(), z(), z());
    push(
        "two_zero_pair_connect_pi",
        GadgetExpr::leaf(f54.clone()).connect(GadgetExpr::leaf(f54.clone()).rotate(2)),
        Some(GadgetValue::Four(mat4([
            [&b + &b, z(), z(), one()],
            [z(), &c * &w, &(&c * &c) + &(&d * &d), z()],
            [z(), &w * &w, &c * &w, z()],
            [one(), z(), z(), z()],
        ]))),
    );

    // chain of 2s+1 copies for [[1,0,0,k],[0,k,1,0],[0,1,0,0],[0,0,0,1]], k = 3
    let k = q(3);
    let fk = mat4([[one(), z(), z(), k.clone()], [z(), k.clone(), one(), z()], [z(), one(), z(), z()], [z(), z(), z(), one()]]);
    for (s, name) in [(0usize, "chain_s0"), (1, "chain_s1"), (2, "chain_s2"), (3, "chain_s3")] {
        let m = &q(2 * s as i64 + 1) * &k;
        push(
            name,
            GadgetExpr::leaf(fk.clone()).chain(s),
            Some(GadgetValue::Four(mat4([
                [one(), z(), z(), z()],
                [z(), m.clone(), one(), z()],
                [z(), one(), z(), z()],
                [m, z(), z(), one()],
            ]))),
        );
    }

    // path of 2s+1 copies of [[1,0,0,0],[0,0,d,0],[0,d,0,0],[0,0,0,1]], d = 2
    let dd = q(2);
    let fd = Sig4::eight_vertex(one(), z(), z(), dd.clone(), dd.clone(), one(), z(), z());
    for (s, name) in [(1usize, "crossover_path_s1"), (2, "crossover_path_s2")] {
        let p = dd.pow(2 * s as i64 + 1).expect("nonzero");
        push(
            name,
            GadgetExpr::leaf(fd.clone()).path(2 * s + 1),
            Some(GadgetValue::Four(Sig4::eight_vertex(one(), z(), z(), p.clone(), p, one(), z(), z()))),
        );
    }

    // loops of a generic eight-vertex signature
    let gen = Sig4::eight_vertex_ints([1, 2, 3, 5, 7, 11, 13, 17]);
    let (gc, gd, gw, gz) = (q(3), q(5), q(7), q(17));
    push(
        "binary_trigger_loop_x3x4",
        GadgetExpr::leaf(gen.clone()).looped(LoopPair::X3X4, Sig2::neq()),
        Some(GadgetValue::Two(Sig2::new(z(), &gc + &gd, &gw + &gz, z()))),
    );
    push(
        "binary_trigger_loop_x1x2",
        GadgetExpr::leaf(gen.clone()).looped(LoopPair::X1X2, Sig2::neq()),
        Some(GadgetValue::Two(Sig2::new(z(), &gc + &gw, &gd + &gz, z()))),
    );

    // symmetric disequality family: loop gives (c+d)(0,1,-1,0)
    let sd = crate::holo::sym_neq_sig(&q(2), &q(3), &q(4));
    push(
        "sym_neq_loop",
        GadgetExpr::leaf(sd).looped(LoopPair::X3X4, Sig2::neq()),
        Some(GadgetValue::Two(Sig2::from_ints([0, 7, -7, 0]))),
    );

    // binary modification by (0,1,t,0) on each variable
    let tt = q(5);
    let gt = Sig2::weighted_neq(tt.clone());
    for (var, name) in [(1usize, "modify_x1"), (2, "modify_x2"), (3, "modify_x3"), (4, "modify_x4")] {
        let want = gen.as_signature().map_values(|idx, v| if (idx >> (4 - var)) & 1 == 1 { v * &tt } else { v.clone() });
        push(
            name,
            GadgetExpr::leaf(gen.clone()).modify(var, gt.clone()),
            Some(GadgetValue::Four(Sig4::try_from(want).expect("arity 4"))),
        );
    }

    // outer full, inner degenerate: [[a,0,0,b],[0,c,d,0],[0,ck,dk,0],[y,0,0,a]]
    let (oa, ob, oc, od, oy, ok) = (q(1), q(2), q(3), q(5), q(7), q(2));
    let fo = Sig4::eight_vertex(oa.clone(), ob.clone(), oc.clone(), od.clone(), &oc * &ok, oa.clone(), oy.clone(), &od * &ok);
    push(
        "inner_degenerate_loop",
        GadgetExpr::leaf(fo.clone()).looped(LoopPair::X3X4, Sig2::neq()),
        Some(GadgetValue::Two(Sig2::new(z(), &oc + &od, &(&oc + &od) * &ok, z()))),
    );
    let kinv = ok.inv().expect("nonzero");
    let f1 = GadgetExpr::leaf(fo.clone()).modify(1, Sig2::weighted_neq(kinv.clone()));
    push(
        "inner_degenerate_modify_x1",
        f1.clone(),
        Some(GadgetValue::Four(Sig4::eight_vertex(
            oa.clone(),
            ob.clone(),
            oc.clone(),
            od.clone(),
            oc.clone(),
            &oa * &kinv,
            &oy * &kinv,
            od.clone(),
        ))),
    );
    push(
        "inner_degenerate_loop_x1x2",
        f1.clone().looped(LoopPair::X1X2, Sig2::neq()),
        Some(GadgetValue::Two(Sig2::new(z(), &oc + &oc, &od + &od, z()))),
    );
    let dc = od.try_div(&oc).expect("nonzero");
    push(
        "inner_degenerate_redundant",
        f1.modify(3, Sig2::weighted_neq(dc.clone())),
        Some(GadgetValue::Four(Sig4::eight_vertex(
            oa.clone(),
            &ob * &dc,
            od.clone(),
            od.clone(),
            od.clone(),
            &(&oa * &kinv) * &dc,
            &oy * &kinv,
            od.clone(),
        ))),
    );

    // crossover identities
    let s = Sig4::crossover();
    let sp = Sig4::crossover_neq();
    push(
        "crossover_connect_left",
        GadgetExpr::leaf(s.clone()).connect(GadgetExpr::leaf(gen.clone())),
        Some(GadgetValue::Four(Sig4::from_matrix(&(&sp.matrix() * &gen.matrix())))),
    );
    push(
        "crossover_connect_right",
        GadgetExpr::leaf(gen.clone()).connect(GadgetExpr::leaf(sp)),
        Some(GadgetValue::Four(Sig4::from_matrix(&(&gen.matrix() * &s.matrix())))),
    );

    // the redundant signature produced by the Z parameter map at b = -1
    let (rc, rd) = (q(3), q(5));
    let src = Sig4::symmetric(&one(), &q(-1), &rc, &rd);
    let fprime = even_coloring_sig(&one(), &q(-1), &rc, &rd, EvenColoringMap::Z);
    t.push(NamedGadget {
        name: "even_coloring_redundant",
        expr: GadgetExpr::leaf(fprime),
        // the proof displays the map without its factor 1/2
        expected: Some(GadgetValue::Four(
            mat4([
                [&(&q(-2) + &rc) - &rd, z(), z(), &(&q(-2) - &rc) + &rd],
                [z(), &rc + &rd, &rc + &rd, z()],
                [z(), &rc + &rd, &rc + &rd, z()],
                [&(&q(-2) - &rc) + &rd, z(), z(), &(&q(-2) + &rc) - &rd],
            ])
            .scale(&FieldElem::frac(1, 2)),
        )),
        holant_source: Some(src),
    });
    t
}

fn tokenize(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&ch) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch == '(' || ch == ')' {
            out.push(ch.to_string());
            chars.next();
        } else if ch == '[' {
            let mut s = String::new();
            for c in chars.by_ref() {
                s.push(c);
                if c == ']' {
                    break;
                }
            }
            out.push(s);
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                s.push(c);
                chars.next();
            }
            out.push(s);
        }
    }
    out
}

/// Syntax: optional `name = <signature>` lines, then one expression
/// `(rot E k) (connect E E) (loop34 E g) (loop12 E g) (modify E i g) (chain E s) (path E n)`
/// where leaves are signature literals, built-in names or defined names.
fn parse_gadget(src: &str) -> Result<GadgetExpr, GadgetError> {
    let mut defs: Vec<(String, Signature)> = Vec::new();
    let mut body = String::new();
    for line in src.lines() {
        let l = line.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let (Some((name, lit)), false) = (l.split_once('='), l.starts_with('(')) {
            let sig: Signature = lit.trim().parse()?;
            defs.push((name.trim().to_string(), sig));
        } else {
            body.push_str(l);
            body.push(' ');
        }
    }
    let toks = tokenize(&body);
    let mut pos = 0;
    let e = parse_expr(&toks, &mut pos, &defs)?;
    if pos != toks.len() {
        return Err(GadgetError::Syntax { pos, reason: "trailing tokens".into() });
    }
    Ok(e)
}

fn lookup(tok: &str, defs: &[(String, Signature)]) -> Result<Signature, GadgetError> {
    if let Some((_, s)) = defs.iter().find(|(n, _)| n == tok) {
        return Ok(s.clone());
    }
    Ok(tok.parse::<Signature>()?)
}

fn parse_expr(toks: &[String], pos: &mut usize, defs: &[(String, Signature)]) -> Result<GadgetExpr, GadgetError> {
    let err = |p: usize, r: &str| GadgetError::Syntax { pos: p, reason: r.to_string() };
    let tok = toks.get(*pos).ok_or_else(|| err(*pos, "unexpected end"))?;
    if tok != "(" {
        *pos += 1;
        let sig = lookup(tok, defs)?;
        return Ok(GadgetExpr::Leaf(Sig4::try_from(sig)?));
    }
    *pos += 1;
    let op = toks.get(*pos).ok_or_else(|| err(*pos, "missing operator"))?.clone();
    *pos += 1;
    let inner = parse_expr(toks, pos, defs)?;
    let atom = |pos: &mut usize| -> Result<String, GadgetError> {
        let t = toks.get(*pos).ok_or_else(|| err(*pos, "missing argument"))?.clone();
        *pos += 1;
        Ok(t)
    };
    let int = |s: String, p: usize| s.parse::<i64>().map_err(|_| err(p, "expected an integer"));
    let sig2 = |s: String| -> Result<Sig2, GadgetError> { Ok(Sig2::try_from(lookup(&s, defs)?)?) };
    let e = match op.as_str() {
        "rot" => {
            let p = *pos;
            inner.rotate(int(atom(pos)?, p)?)
        }
        "connect" => {
            let other = parse_expr(toks, pos, defs)?;
            inner.connect(other)
        }
        "loop34" => inner.looped(LoopPair::X3X4, sig2(atom(pos)?)?),
        "loop12" => inner.looped(LoopPair::X1X2, sig2(atom(pos)?)?),
        "modify" => {
            let p = *pos;
            let var = int(atom(pos)?, p)? as usize;
            inner.modify(var, sig2(atom(pos)?)?)
        }
        "chain" => {
            let p = *pos;
            inner.chain(int(atom(pos)?, p)? as usize)
        }
        "path" => {
            let p = *pos;
            let n = int(atom(pos)?, p)?;
            if n < 1 {
                return Err(err(p, "path needs at least one copy"));
            }
            inner.path(n as usize)
        }
        other => return Err(err(*pos - 1, &format!("unknown operator {other:?}"))),
    };
    if toks.get(*pos).map(String::as_str) != Some(")") {
        return Err(err(*pos, "expected )"));
    }
    *pos += 1;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_displayed_and_brute() {
        let table = lemma_table();
        assert!(table.len() >= 15);
        for g in &table {
            let sym = g.expr.eval().unwrap();
            if let Some(want) = &g.expected {
                assert_eq!(&sym, want, "{}", g.name);
            }
            assert_eq!(&g.expr.brute().unwrap(), sym.signature(), "{}", g.name);
            g.expr.build_grid().unwrap().check_planar().unwrap();
            if let Some(src) = &g.holant_source {
                let oct = crate::grid::octahedron(src.as_signature(), Mediator::Neq);
                let lhs = crate::grid::brute_holant(&oct).unwrap();
                let rhs = crate::grid::brute_holant(&oct.relabel(sym.signature(), Mediator::Neq)).unwrap();
                assert_eq!(lhs, rhs, "{}", g.name);
            }
        }
    }

    #[test]
    fn parameter_maps() {
        let (c, d) = (FieldElem::from_int(3), FieldElem::from_int(5));
        let one = FieldElem::one();
        let r = even_coloring_map([-&one, c.clone(), d.clone(), one.clone()], EvenColoringMap::Z);
        let two = FieldElem::from_int(2);
        // displayed without the factor 1/2
        let r = r.map(|x| &x * &two);
        assert_eq!(r, [&(&-&two - &c) + &d, &c + &d, &c + &d, &(&-&two + &c) - &d]);
        let b = FieldElem::from_int(7);
        let r = even_coloring_map([b.clone(), b.clone(), one.clone(), one.clone()], EvenColoringMap::Z);
        assert_eq!(r, [FieldElem::zero(), FieldElem::zero(), &one + &b, &-&one + &b]);
        let r = even_coloring_map([b.clone(), -&b, one.clone(), one.clone()], EvenColoringMap::HZ);
        assert_eq!(r, [&one + &b, &one - &b, FieldElem::zero(), FieldElem::zero()]);
    }

    #[test]
    fn direct_loop_matches_honest() {
        let f = Sig4::eight_vertex_ints([1, 2, 3, 5, 7, 11, 13, 17]);
        let g = Sig2::from_ints([2, 3, 5, 2]);
        for pair in [LoopPair::X3X4, LoopPair::X1X2] {
            assert_eq!(loop_direct(&f, pair, &g).unwrap(), loop_binary(&f, pair, &g));
        }
        assert_eq!(loop_direct(&f, LoopPair::X3X4, &Sig2::from_ints([1, 0, 0, 2])), Err(GadgetError::PreconditionViolated));
    }

    #[test]
    fn modification_round_trip() {
        let f = Sig4::eight_vertex_ints([1, 2, 3, 5, 7, 11, 13, 17]);
        let t = FieldElem::from_int(3);
        for var in 1..=4 {
            let g = binary_modify(&f, var, &Sig2::weighted_neq(t.clone())).unwrap();
            let back = binary_modify(&g, var, &Sig2::weighted_neq(t.inv().unwrap())).unwrap();
            assert_eq!(back, f);
        }
        assert_eq!(binary_modify(&f, 2, &Sig2::neq()).unwrap(), f);
    }

    #[test]
    fn inner_determinant_bookkeeping() {
        let f1 = Sig4::eight_vertex_ints([1, 2, 3, 5, 7, 11, 13, 17]);
        let f2 = Sig4::eight_vertex_ints([2, 1, -1, 4, 3, 1, 6, 2]);
        let det_in = |f: &Sig4| f.inner().det();
        assert_eq!(det_in(&connect(&f1, &f2)), -&(&det_in(&f1) * &det_in(&f2)));
    }

    #[test]
    fn parse_expression() {
        let src = "f = [1,0,0,3, 0,0,0,0, 0,0,0,0, 0,0,0,0]\n(chain (connect f (rot f 2)) 1)";
        let e = GadgetExpr::parse(src).unwrap();
        assert_eq!(e.leaves(), 6);
        let e2 = GadgetExpr::parse("(loop34 [1,0,0,2,0,3,5,0,0,7,11,0,13,0,0,17] NEQ2)").unwrap();
        assert!(matches!(e2.eval().unwrap(), GadgetValue::Two(_)));
        assert!(matches!(GadgetExpr::parse("(spin S 1)"), Err(GadgetError::Syntax { .. })));
    }
}
