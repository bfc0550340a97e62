//! Complexity classifier for Pl-Holant(NEQ2 | f) on eight-vertex signatures,
//! with certificates that can be replayed against the engines.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::eval::{eval_affine_instance, eval_matchgate_instance, eval_product_instance, EvalError};
use crate::field::{FieldElem, FieldError};
use crate::gadget::{loop_binary, GadgetExpr, LoopPair};
use crate::grid::{brute_holant, GridError, Mediator, PlanarGrid};
use crate::holo::{
    diagonal_search, m_transformable_sym_eq, m_transformable_sym_neq, transformable_search, transformable_search_any, transformed_grid,
    weight_scaled, SymCriterion, TractableClass, Transform2,
};
use crate::signature::{is_affine, is_local_affine, is_matchgate, is_matchgate_hat, is_product, Sig2, Sig4};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("expected 8 comma-separated parameters, got {0}")]
    BadParams(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Entries of M(f) = [[a,0,0,b],[0,c,d,0],[0,w,z,0],[y,0,0,x]].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EightVertexParams {
    pub a: FieldElem,
    pub b: FieldElem,
    pub c: FieldElem,
    pub d: FieldElem,
    pub w: FieldElem,
    pub x: FieldElem,
    pub y: FieldElem,
    pub z: FieldElem,
}

impl EightVertexParams {
    pub fn new(p: [FieldElem; 8]) -> Self {
        let [a, b, c, d, w, x, y, z] = p;
        EightVertexParams { a, b, c, d, w, x, y, z }
    }

    pub fn from_ints(p: [i64; 8]) -> Self {
        Self::new(p.map(FieldElem::from_int))
    }

    pub fn from_sig4(f: &Sig4) -> Option<Self> {
        f.params().map(Self::new)
    }

    pub fn to_array(&self) -> [FieldElem; 8] {
        [
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.w.clone(),
            self.x.clone(),
            self.y.clone(),
            self.z.clone(),
        ]
    }

    pub fn to_sig4(&self) -> Sig4 {
        let [a, b, c, d, w, x, y, z] = self.to_array();
        Sig4::eight_vertex(a, b, c, d, w, x, y, z)
    }

    pub fn rotate(&self, k: i64) -> Self {
        Self::from_sig4(&self.to_sig4().rotate(k)).expect("rotation keeps even parity")
    }

    pub fn scale(&self, s: &FieldElem) -> Self {
        Self::new(self.to_array().map(|v| &v * s))
    }

    /// Same parameters with (a, x) replaced by another factorization of ax.
    pub fn with_outer(&self, a: FieldElem, x: FieldElem) -> Self {
        EightVertexParams { a, x, ..self.clone() }
    }

    fn pairs(&self) -> [(&FieldElem, &FieldElem); 3] {
        [(&self.b, &self.y), (&self.c, &self.z), (&self.d, &self.w)]
    }

    fn eps_symmetric(&self, eps: i64) -> bool {
        let e = FieldElem::from_int(eps);
        self.pairs().iter().all(|(u, v)| **u == &e * *v)
    }
}

impl FromStr for EightVertexParams {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, ClassifyError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 8 {
            return Err(ClassifyError::BadParams(parts.len()));
        }
        let vals = parts.iter().map(|p| p.parse::<FieldElem>()).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(<[FieldElem; 8]>::try_from(vals).expect("eight values")))
    }
}

impl fmt::Display for EightVertexParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.to_array().iter().map(|e| e.to_string()).collect();
        write!(f, "{}", v.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    GeneralTractable,
    PlanarTractable,
    PlanarHard,
    Unresolved,
}

impl Label {
    pub fn is_tractable(self) -> bool {
        matches!(self, Label::GeneralTractable | Label::PlanarTractable)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Replayable recipe: put `base` on every vertex, optionally rescale weight-w
/// entries by mu^(w/2), optionally apply T, then evaluate with the engine of `class`.
#[derive(Clone, Debug)]
pub struct EngineWitness {
    pub class: TractableClass,
    pub base: Sig4,
    pub mu: Option<FieldElem>,
    pub transform: Option<(String, Transform2)>,
}

impl EngineWitness {
    fn member(class: TractableClass, base: &Sig4) -> Self {
        EngineWitness { class, base: base.clone(), mu: None, transform: None }
    }

    pub fn describe(&self) -> String {
        let mut s = format!("{:?}", self.class);
        if let Some(mu) = &self.mu {
            s.push_str(&format!(" after diag(1, sqrt({mu}))"));
        }
        if let Some((name, _)) = &self.transform {
            s.push_str(&format!(" via T={name}"));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub enum Witness {
    Engine(EngineWitness),
    Values(Vec<(String, FieldElem)>),
    None,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Engine(e) => write!(f, "{}", e.describe()),
            Witness::Values(v) => {
                let parts: Vec<String> = v.iter().map(|(k, x)| format!("{k}={x}")).collect();
                write!(f, "{}", parts.join(", "))
            }
            Witness::None => write!(f, "-"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertStep {
    pub rule: &'static str,
    pub condition: String,
    pub witness: Witness,
}

impl CertStep {
    fn new(rule: &'static str, condition: impl Into<String>, witness: Witness) -> Self {
        CertStep { rule, condition: condition.into(), witness }
    }
}

#[derive(Clone, Debug)]
pub struct ClassLabel {
    pub label: Label,
    pub certificate: Vec<CertStep>,
    /// The condition left unchecked when the label is Unresolved.
    pub residual: Option<String>,
}

impl ClassLabel {
    fn new(label: Label, certificate: Vec<CertStep>) -> Self {
        ClassLabel { label, certificate, residual: None }
    }

    fn unresolved(certificate: Vec<CertStep>, residual: &str) -> Self {
        ClassLabel { label: Label::Unresolved, certificate, residual: Some(residual.to_string()) }
    }

    /// The first engine-checkable witness in the certificate.
    pub fn engine_witness(&self) -> Option<&EngineWitness> {
        self.certificate.iter().find_map(|s| match &s.witness {
            Witness::Engine(e) => Some(e),
            _ => None,
        })
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        for s in &self.certificate {
            write!(f, "\n  [{}] {} ({})", s.rule, s.condition, s.witness)?;
        }
        if let Some(r) = &self.residual {
            write!(f, "\n  residual: {r}")?;
        }
        Ok(())
    }
}

fn fe(n: i64) -> FieldElem {
    FieldElem::from_int(n)
}

/// Planar six-vertex model with M(f) = [[0,0,0,b],[0,c,d,0],[0,w,z,0],[y,0,0,0]].
pub fn classify_six_vertex(
    b: &FieldElem,
    c: &FieldElem,
    d: &FieldElem,
    w: &FieldElem,
    y: &FieldElem,
    z: &FieldElem,
) -> ClassLabel {
    let zero = FieldElem::zero();
    let f = Sig4::eight_vertex(zero.clone(), b.clone(), c.clone(), d.clone(), w.clone(), zero, y.clone(), z.clone());
    if is_product(&f).is_some() {
        let w = Witness::Engine(EngineWitness::member(TractableClass::Product, &f));
        return ClassLabel::new(Label::GeneralTractable, vec![CertStep::new("six-vertex/product", "f' in P", w)]);
    }
    if is_affine(&f).is_some() {
        let w = Witness::Engine(EngineWitness::member(TractableClass::Affine, &f));
        return ClassLabel::new(Label::GeneralTractable, vec![CertStep::new("six-vertex/affine", "f' in A", w)]);
    }
    let pairs = [(b, y), (c, z), (d, w)];
    if pairs.iter().all(|(u, v)| u.is_zero() || v.is_zero()) {
        let step = CertStep::new("six-vertex/zero-in-each-pair", "a zero in each pair (b,y), (c,z), (d,w)", Witness::None);
        return ClassLabel::new(Label::GeneralTractable, vec![step]);
    }
    if is_matchgate(&f) {
        let w = Witness::Engine(EngineWitness::member(TractableClass::Matchgate, &f));
        return ClassLabel::new(Label::PlanarTractable, vec![CertStep::new("six-vertex/matchgate", "f' in M", w)]);
    }
    if is_matchgate_hat(&f) {
        let w = match transformable_search(&f, TractableClass::Matchgate) {
            Some((name, t)) => Witness::Engine(EngineWitness {
                class: TractableClass::Matchgate,
                base: f.clone(),
                mu: None,
                transform: Some((name, t)),
            }),
            None => Witness::None,
        };
        return ClassLabel::new(Label::PlanarTractable, vec![CertStep::new("six-vertex/matchgate-hat", "f' in H M", w)]);
    }
    if d.is_zero() && w.is_zero() {
        let by = b * y;
        let cz = c * z;
        if by.square() == cz.square() {
            let step = CertStep::new(
                "six-vertex/d=w=0,(by)^2=(cz)^2",
                "d = w = 0 and (by)^2 = (cz)^2",
                Witness::Values(vec![("by".into(), by), ("cz".into(), cz)]),
            );
            return ClassLabel::new(Label::PlanarTractable, vec![step]);
        }
        if let Some(vals) = zeta_powers(b, c, y, z) {
            let step = CertStep::new(
                "six-vertex/d=w=0,zeta-powers",
                "d = w = 0, y = b i^alpha, c = b zeta8^beta, z = b zeta8^gamma, beta = gamma mod 2",
                Witness::Values(vals),
            );
            return ClassLabel::new(Label::PlanarTractable, vec![step]);
        }
    }
    let step = CertStep::new("six-vertex/hard", "none of the six-vertex tractable conditions holds", Witness::None);
    ClassLabel::new(Label::PlanarHard, vec![step])
}

fn zeta_powers(b: &FieldElem, c: &FieldElem, y: &FieldElem, z: &FieldElem) -> Option<Vec<(String, FieldElem)>> {
    if b.is_zero() {
        return None;
    }
    let alpha = y.try_div(b).ok()?.i_log()?;
    let beta = c.try_div(b).ok()?.zeta8_log()?;
    let gamma = z.try_div(b).ok()?.zeta8_log()?;
    if beta % 2 != gamma % 2 {
        return None;
    }
    Some(vec![
        ("alpha".into(), fe(alpha as i64)),
        ("beta".into(), fe(beta as i64)),
        ("gamma".into(), fe(gamma as i64)),
    ])
}

/// sqrt(ax) if it lies in the field, and mu0 = sqrt(ax)/x so that
/// weight_scaled(f, mu0) = a * (normalized f with a = x = 1).
struct Normal {
    s: FieldElem,
    mu0: FieldElem,
}

impl Normal {
    fn new(p: &EightVertexParams) -> Option<Normal> {
        let s = (&p.a * &p.x).sqrt()?;
        let mu0 = s.try_div(&p.x).ok()?;
        Some(Normal { s, mu0 })
    }

    fn normalized(&self, p: &EightVertexParams) -> EightVertexParams {
        let n = |v: &FieldElem| v.try_div(&self.s).expect("s is nonzero");
        EightVertexParams {
            a: FieldElem::one(),
            x: FieldElem::one(),
            b: n(&p.b),
            c: n(&p.c),
            d: n(&p.d),
            w: n(&p.w),
            y: n(&p.y),
            z: n(&p.z),
        }
    }

    fn witness(&self, class: TractableClass, f: &Sig4, t: Option<(String, Transform2)>) -> EngineWitness {
        let mu = if self.mu0.is_one() { None } else { Some(self.mu0.clone()) };
        EngineWitness { class, base: f.clone(), mu, transform: t }
    }
}

/// Certificates for tractability without the planarity restriction.
fn general_certificate(f: &Sig4, norm: Option<&Normal>) -> Option<CertStep> {
    if is_product(f).is_some() {
        let w = Witness::Engine(EngineWitness::member(TractableClass::Product, f));
        return Some(CertStep::new("general/product", "f in P", w));
    }
    if is_affine(f).is_some() {
        let w = Witness::Engine(EngineWitness::member(TractableClass::Affine, f));
        return Some(CertStep::new("general/affine", "f in A", w));
    }
    for class in [TractableClass::Affine, TractableClass::LocalAffine] {
        if let Some(mu) = diagonal_search(f, class) {
            let w = EngineWitness { class, base: f.clone(), mu: Some(mu), transform: None };
            return Some(CertStep::new("general/diagonal", format!("{class:?}-transformable by a diagonal transform"), Witness::Engine(w)));
        }
    }
    // curated transforms only after normalizing a = x, so the search depends on (a, x) only through ax
    let norm = norm?;
    let ftil = weight_scaled(f, &norm.mu0);
    let classes = [TractableClass::Product, TractableClass::Affine, TractableClass::LocalAffine];
    let (class, name, t) = transformable_search_any(&ftil, &classes)?;
    let w = norm.witness(class, f, Some((name, t)));
    Some(CertStep::new("general/curated", format!("{class:?}-transformable"), Witness::Engine(w)))
}

fn affine_certificate(f: &Sig4, norm: Option<&Normal>) -> Option<CertStep> {
    if is_affine(f).is_some() {
        let w = Witness::Engine(EngineWitness::member(TractableClass::Affine, f));
        return Some(CertStep::new("general/affine", "f in A", w));
    }
    if let Some(mu) = diagonal_search(f, TractableClass::Affine) {
        let w = EngineWitness { class: TractableClass::Affine, base: f.clone(), mu: Some(mu), transform: None };
        return Some(CertStep::new("general/diagonal", "A-transformable by a diagonal transform", Witness::Engine(w)));
    }
    let norm = norm?;
    let t = transformable_search(&weight_scaled(f, &norm.mu0), TractableClass::Affine)?;
    let w = norm.witness(TractableClass::Affine, f, Some(t));
    Some(CertStep::new("general/curated", "A-transformable", Witness::Engine(w)))
}

fn matchgate_witness(f: &Sig4, norm: Option<&Normal>) -> Witness {
    if is_matchgate(f) {
        return Witness::Engine(EngineWitness::member(TractableClass::Matchgate, f));
    }
    if let Some(norm) = norm {
        if let Some(t) = transformable_search(&weight_scaled(f, &norm.mu0), TractableClass::Matchgate) {
            return Witness::Engine(norm.witness(TractableClass::Matchgate, f, Some(t)));
        }
    }
    Witness::None
}

/// A planar-tractable step, upgraded when a general certificate exists.
fn planar_or_general(f: &Sig4, norm: Option<&Normal>, step: CertStep) -> ClassLabel {
    match general_certificate(f, norm) {
        Some(g) => ClassLabel::new(Label::GeneralTractable, vec![g, step]),
        None => ClassLabel::new(Label::PlanarTractable, vec![step]),
    }
}

fn hard(rule: &'static str, condition: &str) -> ClassLabel {
    ClassLabel::new(Label::PlanarHard, vec![CertStep::new(rule, condition, Witness::None)])
}

/// The tan(beta pi/8) family: d = w = +-sqrt(ax), b = y = -c = -z, b^2 = -tan^2(beta pi/8) ax.
pub fn is_tan_point(p: &EightVertexParams) -> Option<Vec<(String, FieldElem)>> {
    let ax = &p.a * &p.x;
    if ax.is_zero() || p.d != p.w || p.b != p.y || p.c != p.z || p.b != -&p.c || p.d.square() != ax {
        return None;
    }
    let sqrt2 = FieldElem::sqrt2();
    let t_small = &fe(3) - &(&fe(2) * &sqrt2);
    let t_large = &fe(3) + &(&fe(2) * &sqrt2);
    let b2 = p.b.square();
    let tan2 = if b2 == -&(&t_small * &ax) {
        t_small
    } else if b2 == -&(&t_large * &ax) {
        t_large
    } else {
        return None;
    };
    Some(vec![("tan^2".into(), tan2), ("d^2/ax".into(), FieldElem::one())])
}

pub fn classify_eight_vertex(p: &EightVertexParams) -> ClassLabel {
    let ax = &p.a * &p.x;
    if ax.is_zero() {
        let mut out = classify_six_vertex(&p.b, &p.c, &p.d, &p.w, &p.y, &p.z);
        out.certificate.insert(0, CertStep::new("ax=0", "ax = 0: equivalent to the six-vertex model f' (a = x = 0)", Witness::None));
        return out;
    }
    let f = p.to_sig4();
    let norm = Normal::new(p);
    let norm = norm.as_ref();

    if let Some(vals) = is_tan_point(p) {
        let step = CertStep::new(
            "tan-point",
            "d = w = +-sqrt(ax), b = y = -c = -z = i tan(beta pi/8) sqrt(ax), beta odd",
            Witness::Values(vals),
        );
        return ClassLabel::new(Label::PlanarTractable, vec![step]);
    }

    let pairs = p.pairs();
    let zero_pairs: Vec<bool> = pairs.iter().map(|(u, v)| u.is_zero() && v.is_zero()).collect();
    let n_zero_pairs = zero_pairs.iter().filter(|&&z| z).count();
    let any_zero = pairs.iter().any(|(u, v)| u.is_zero() || v.is_zero());

    if n_zero_pairs == 3 {
        let g = general_certificate(&f, norm).unwrap_or_else(|| CertStep::new("general/product", "f in P", Witness::None));
        return ClassLabel::new(Label::GeneralTractable, vec![g]);
    }
    if n_zero_pairs == 2 {
        if !zero_pairs[2] {
            return two_zero_pairs_inner(p, &f, norm, &ax);
        }
        let (u, v) = if zero_pairs[1] { (&p.b, &p.y) } else { (&p.c, &p.z) };
        return two_zero_pairs_outer(u, v, &f, norm, &ax);
    }
    if any_zero {
        if is_matchgate(&f) {
            let step = CertStep::new("one-zero/matchgate", "f in M", matchgate_witness(&f, norm));
            return planar_or_general(&f, norm, step);
        }
        return hard("one-zero/hard", "some zero entry, at most one zero pair, f not in M");
    }

    // all of b, c, d, w, y, z nonzero
    if p.eps_symmetric(1) {
        return three_pairs(p, &f, norm, &ax, 1);
    }
    if p.eps_symmetric(-1) {
        return three_pairs(p, &f, norm, &ax, -1);
    }
    let by = &p.b * &p.y;
    if by == &p.c * &p.z && by == &p.d * &p.w {
        let case = degenerate_inner_case(p).expect("preconditions hold here");
        return match case {
            InnerCase::InM => {
                let step = CertStep::new("degenerate-inner/matchgate", "by = cz = dw = ax, f in M", matchgate_witness(&f, norm));
                planar_or_general(&f, norm, step)
            }
            InnerCase::Hard => hard("degenerate-inner/hard", "by = cz = dw != ax with full-rank outer and degenerate inner matrix after rotation"),
            InnerCase::ArrowReversal => ClassLabel::unresolved(vec![], "arrow reversal without three equal pairs"),
        };
    }
    if is_matchgate(&f) {
        let step = CertStep::new("generic/matchgate", "f in M", matchgate_witness(&f, norm));
        return planar_or_general(&f, norm, step);
    }
    if let Some(step) = affine_certificate(&f, norm) {
        return ClassLabel::new(Label::GeneralTractable, vec![step]);
    }
    ClassLabel::unresolved(
        vec![CertStep::new("generic/not-matchgate", "no zero entry, no sign symmetry, f not in M", Witness::None)],
        "f is not A-transformable (only curated and diagonal transforms were excluded)",
    )
}

/// (b,y) = (c,z) = (0,0): hard unless d = w = 0 or dw = +-ax.
fn two_zero_pairs_inner(p: &EightVertexParams, f: &Sig4, norm: Option<&Normal>, ax: &FieldElem) -> ClassLabel {
    let dw = &p.d * &p.w;
    if dw == *ax {
        let g = general_certificate(f, norm).unwrap_or_else(|| CertStep::new("general/product", "f in P", Witness::None));
        let step = CertStep::new("two-zero-pairs/dw=ax", "dw = ax", Witness::None);
        return ClassLabel::new(Label::GeneralTractable, vec![g, step]);
    }
    if dw == -ax {
        let step = CertStep::new("two-zero-pairs/dw=-ax", "dw = -ax, f in M", matchgate_witness(f, norm));
        return planar_or_general(f, norm, step);
    }
    hard("two-zero-pairs/dw", "b = y = c = z = 0 and dw not in {0, ax, -ax}")
}

/// d = w = 0 and one outer pair zero; (u, v) is the other outer pair.
fn two_zero_pairs_outer(u: &FieldElem, v: &FieldElem, f: &Sig4, norm: Option<&Normal>, ax: &FieldElem) -> ClassLabel {
    let uv = u * v;
    if uv == *ax {
        let g = general_certificate(f, norm).unwrap_or_else(|| CertStep::new("general/product", "f in P", Witness::None));
        let step = CertStep::new("two-zero-pairs/cz=ax", "cz = ax", Witness::None);
        return ClassLabel::new(Label::GeneralTractable, vec![g, step]);
    }
    if uv == -ax && u.pow(4).ok() == v.pow(4).ok() {
        let step = CertStep::new("two-zero-pairs/cz=-ax", "cz = -ax and c^4 = z^4", Witness::None);
        let mut cert = vec![step];
        if let Some(g) = affine_certificate(f, norm) {
            cert.insert(0, g);
        }
        return ClassLabel::new(Label::GeneralTractable, cert);
    }
    if u == v || *u == -v {
        let step = CertStep::new("two-zero-pairs/c=+-z", "c = +-z", matchgate_witness(f, norm));
        return planar_or_general(f, norm, step);
    }
    hard("two-zero-pairs/cz", "d = w = 0, one outer pair zero, and none of cz = ax, (cz = -ax and c^4 = z^4), c = +-z")
}

/// b = eps y, c = eps z, d = eps w with all entries nonzero.
fn three_pairs(p: &EightVertexParams, f: &Sig4, norm: Option<&Normal>, ax: &FieldElem, eps: i64) -> ClassLabel {
    let (rule, cond) = if eps == 1 {
        ("equal-pairs/matchgate-transformable", "f in M or d^2 ax = b^2 c^2")
    } else {
        ("opposite-pairs/matchgate-transformable", "f in M or d^2 ax = -b^2 c^2")
    };
    let bc2 = (&p.b * &p.c).square();
    let target = if eps == 1 { bc2 } else { -bc2 };
    if is_matchgate(f) || &p.d.square() * ax == target {
        let mut witness = matchgate_witness(f, norm);
        if let (Witness::None, Some(nm)) = (&witness, norm) {
            let q = nm.normalized(p);
            let crit = if eps == 1 { m_transformable_sym_eq(&q.b, &q.c, &q.d) } else { m_transformable_sym_neq(&q.b, &q.c, &q.d) };
            if let SymCriterion::Criterion { sign, imaginary, witness: t } = crit {
                let name = format!("d = {}{}bc", if sign > 0 { "" } else { "-" }, if imaginary { "i" } else { "" });
                witness = Witness::Engine(nm.witness(TractableClass::Matchgate, f, Some((name, t))));
            }
        }
        return planar_or_general(f, norm, CertStep::new(rule, cond, witness));
    }
    if let Some(g) = general_certificate(f, norm) {
        return ClassLabel::new(Label::GeneralTractable, vec![g]);
    }
    let residual = if eps == 1 {
        "f is not P-, A- or L-transformable (only curated and diagonal transforms were excluded)"
    } else {
        "f is not P-, A- or L-transformable (only curated and diagonal transforms were excluded)"
    };
    let rule = if eps == 1 { "equal-pairs/not-matchgate-transformable" } else { "opposite-pairs/not-matchgate-transformable" };
    ClassLabel::unresolved(vec![CertStep::new(rule, "f not M-transformable and not a tan-point", Witness::None)], residual)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerCase {
    InM,
    Hard,
    ArrowReversal,
}

/// All of b, c, d, w, y, z nonzero with by = cz = dw; tests are phrased
/// on ax so the normalization a = x = 1 is implicit.
pub fn degenerate_inner_case(p: &EightVertexParams) -> Result<InnerCase, ClassifyError> {
    let ax = &p.a * &p.x;
    if ax.is_zero() || p.pairs().iter().any(|(u, v)| u.is_zero() || v.is_zero()) {
        return Err(ClassifyError::PreconditionViolated("all entries must be nonzero".into()));
    }
    let by = &p.b * &p.y;
    if by != &p.c * &p.z || by != &p.d * &p.w {
        return Err(ClassifyError::PreconditionViolated("need by = cz = dw".into()));
    }
    if by == ax {
        return Ok(InnerCase::InM);
    }
    let full_outer = |q: &EightVertexParams| !(&q.c + &q.d).is_zero() || !(&q.z + &q.d).is_zero();
    if full_outer(p) || full_outer(&p.rotate(1)) {
        return Ok(InnerCase::Hard);
    }
    Ok(InnerCase::ArrowReversal)
}

/// A realized (0, 1, t, 0) with t != +-1 and the loop gadgets producing it.
#[derive(Clone, Debug)]
pub struct TriggerBinary {
    pub t: FieldElem,
    pub binary: Sig2,
    /// Earlier gadgets whose outputs are used as loop binaries, in order.
    pub steps: Vec<GadgetExpr>,
    /// Evaluates to `scale` times `binary`, reversed if `reversed`.
    pub gadget: GadgetExpr,
    pub scale: FieldElem,
    pub reversed: bool,
}

/// Loops of rotations of f through NEQ2 and through already realized binaries,
/// searched breadth first; absent exactly under the sign symmetry hypothesis.
pub fn trigger_binary(p: &EightVertexParams) -> Option<TriggerBinary> {
    if p.eps_symmetric(1) || p.eps_symmetric(-1) {
        return None;
    }
    let f = p.to_sig4();
    let minus = Sig2::new(FieldElem::zero(), FieldElem::one(), -FieldElem::one(), FieldElem::zero());
    let mut known: Vec<(Sig2, Vec<GadgetExpr>)> = vec![(Sig2::neq(), vec![])];
    for _round in 0..3 {
        let mut fresh = Vec::new();
        for (g, prior) in &known {
            for k in 0..4 {
                for pair in [LoopPair::X3X4, LoopPair::X1X2] {
                    let h = loop_binary(&f.rotate(k), pair, g);
                    if !h.g(0, 0).is_zero() || !h.g(1, 1).is_zero() {
                        continue;
                    }
                    let (u, v) = (h.g(0, 1).clone(), h.g(1, 0).clone());
                    let expr = GadgetExpr::leaf(f.clone()).rotate(k).looped(pair, g.clone());
                    for (reversed, (s, r)) in [(false, (&u, &v)), (true, (&v, &u))] {
                        if s.is_zero() {
                            continue;
                        }
                        let t = r.try_div(s).expect("nonzero");
                        if t != FieldElem::one() && t != -FieldElem::one() {
                            return Some(TriggerBinary {
                                binary: Sig2::weighted_neq(t.clone()),
                                t,
                                steps: prior.clone(),
                                gadget: expr,
                                scale: s.clone(),
                                reversed,
                            });
                        }
                        if t == -FieldElem::one() && !known.iter().chain(fresh.iter()).any(|(k, _)| *k == minus) {
                            let mut steps = prior.clone();
                            steps.push(expr.clone());
                            fresh.push((minus.clone(), steps));
                        }
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        known.extend(fresh);
    }
    None
}

/// A parameter point with the label its defining criterion assigns.
#[derive(Clone, Debug)]
pub struct RegressionPoint {
    pub name: String,
    pub params: EightVertexParams,
    pub expected: Label,
}

/// Points read off the criteria: two-zero-pair boundaries, the d = +-w
/// families, one-zero matchgates, the symmetric criteria, tan-points,
/// degenerate inner matrices and the six-vertex cases.
pub fn regression_corpus() -> Vec<RegressionPoint> {
    use Label::*;
    let v: Vec<(String, String, Label)> = [
        ("cz=1", "1,0,2,0,0,1,0,1/2", GeneralTractable),
        ("cz=-1,c=z=i", "1,0,I,0,0,1,0,I", GeneralTractable),
        ("cz=-1,c^4=z^4", "1,0,Z8,0,0,1,0,Z8^3", GeneralTractable),
        ("cz=-1,c=-z=1", "1,0,1,0,0,1,0,-1", GeneralTractable),
        ("c=z", "1,0,2,0,0,1,0,2", PlanarTractable),
        ("c=-z", "1,0,2,0,0,1,0,-2", PlanarTractable),
        ("b=y rotated", "1,3,0,0,0,1,3,0", PlanarTractable),
        ("c,z generic", "1,0,2,0,0,1,0,3", PlanarHard),
        ("cz=-1,c^4!=z^4", "1,0,2,0,0,1,0,-1/2", PlanarHard),
        ("dw=1", "1,0,0,2,1/2,1,0,0", GeneralTractable),
        ("dw=-1", "1,0,0,2,-1/2,1,0,0", PlanarTractable),
        ("dw=6", "1,0,0,2,3,1,0,0", PlanarHard),
        ("d=w=0", "1,0,0,0,0,1,0,0", GeneralTractable),
        ("d=w=1", "1,0,0,1,1,1,0,0", GeneralTractable),
        ("d=w=-1", "1,0,0,-1,-1,1,0,0", GeneralTractable),
        ("d=w=i", "1,0,0,I,I,1,0,0", GeneralTractable),
        ("d=w=-i", "1,0,0,-I,-I,1,0,0", GeneralTractable),
        ("d=w=2", "1,0,0,2,2,1,0,0", PlanarHard),
        ("d=w=1+i", "1,0,0,1+I,1+I,1,0,0", PlanarHard),
        ("d=-w=1", "1,0,0,1,-1,1,0,0", GeneralTractable),
        ("d=-w=i", "1,0,0,I,-I,1,0,0", GeneralTractable),
        ("d=-w=3", "1,0,0,3,-3,1,0,0", PlanarHard),
        ("one zero, in M", "1,2,3,2,1,1,0,1", PlanarTractable),
        ("one zero, not in M", "1,2,3,1,1,1,0,1", PlanarHard),
        ("one zero pair, in M", "1,0,2,5,1,1,0,3", PlanarTractable),
        ("one zero pair, not in M", "1,0,2,5,2,1,0,3", PlanarHard),
        ("equal pairs d=bc", "1,2,3,6,6,1,2,3", PlanarTractable),
        ("equal pairs d=-bc", "1,2,3,-6,-6,1,2,3", PlanarTractable),
        ("equal pairs in M", "1,3,1,3,3,1,3,1", PlanarTractable),
        ("opposite pairs d=ibc", "1,2,3,6*I,-6*I,1,-2,-3", PlanarTractable),
        ("opposite pairs d=-ibc", "1,2,3,-6*I,6*I,1,-2,-3", PlanarTractable),
        ("degenerate by=1", "1,2,1,-1,-1,1,1/2,1", PlanarTractable),
        ("degenerate c+d!=0", "1,1,1,1,2,1,2,2", PlanarHard),
        ("generic in M", "1,2,3,5,7,26,11,13", PlanarTractable),
        ("six-vertex zero in each pair", "0,0,0,0,5,0,0,3", GeneralTractable),
        ("six-vertex zeta powers", "0,1,Z8,0,0,0,I,Z8^3", PlanarTractable),
        ("six-vertex matchgate", "0,1,1,1,2,0,1,1", PlanarTractable),
        ("six-vertex hard", "0,1,2,3,5,0,7,11", PlanarHard),
    ]
    .into_iter()
    .map(|(n, p, l)| (n.to_string(), p.to_string(), l))
    .collect();
    let mut out: Vec<RegressionPoint> = v
        .into_iter()
        .map(|(name, p, expected)| RegressionPoint { name, params: p.parse().expect("corpus literal"), expected })
        .collect();
    let tans = [(1, "I*R2-I"), (3, "I*R2+I"), (5, "-I*R2-I"), (7, "-I*R2+I")];
    for (beta, b) in tans {
        let b: FieldElem = b.parse().expect("literal");
        for d in [1, -1] {
            let params = EightVertexParams::new([fe(1), b.clone(), -&b, fe(d), fe(d), fe(1), b.clone(), -&b]);
            out.push(RegressionPoint { name: format!("tan-point beta={beta} d={d}"), params, expected: PlanarTractable });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Agrees,
    Disagrees { engine: FieldElem, brute: FieldElem },
    NoEngine(String),
}

/// Replay a witness on a closed grid whose vertices carry f and edges NEQ2.
pub fn check_witness(f: &Sig4, wit: &EngineWitness, topology: &PlanarGrid) -> Result<CheckOutcome, ClassifyError> {
    let original = topology.relabel(f.as_signature(), Mediator::Neq);
    let brute = brute_holant(&original)?;
    let base = match &wit.mu {
        Some(mu) => weight_scaled(&wit.base, mu),
        None => wit.base.clone(),
    };
    let mut g = topology.relabel(base.as_signature(), Mediator::Neq);
    if let Some((_, t)) = &wit.transform {
        g = transformed_grid(&g, &t.inverse());
    }
    let engine = match wit.class {
        TractableClass::Affine => eval_affine_instance(&g),
        TractableClass::Product => eval_product_instance(&g),
        TractableClass::Matchgate => eval_matchgate_instance(&g),
        TractableClass::LocalAffine => {
            let member = is_local_affine(g.vertex_signature(0));
            return Ok(CheckOutcome::NoEngine(format!("local affine membership {member}; evaluation left to brute force")));
        }
    };
    let engine = match engine {
        Ok(v) => v,
        Err(EvalError::NoRealization(why)) => return Ok(CheckOutcome::NoEngine(why)),
        Err(e) => return Err(e.into()),
    };
    let agrees = match &wit.mu {
        Some(mu) => engine.square() == &brute.square() * &mu.pow(topology.edges().len() as i64)?,
        None => engine == brute,
    };
    Ok(if agrees { CheckOutcome::Agrees } else { CheckOutcome::Disagrees { engine, brute } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::zeta8_pow;
    use crate::grid::octahedron;
    use crate::signature::Signature;

    fn params(s: &str) -> EightVertexParams {
        s.parse().unwrap()
    }

    fn label(s: &str) -> Label {
        classify_eight_vertex(&params(s)).label
    }

    #[test]
    fn six_vertex_examples() {
        let z = FieldElem::zero;
        let l = classify_six_vertex(&z(), &z(), &z(), &fe(5), &z(), &fe(3));
        assert_eq!(l.label, Label::GeneralTractable);
        // (by)^2 = (cz)^2 splits into by = cz (product type) and by = -cz (matchgate)
        let l = classify_six_vertex(&fe(1), &fe(2), &z(), &z(), &fe(4), &fe(2));
        assert_eq!(l.label, Label::GeneralTractable);
        assert_eq!(l.certificate[0].rule, "six-vertex/product");
        let l = classify_six_vertex(&fe(1), &fe(2), &z(), &z(), &fe(4), &fe(-2));
        assert_eq!(l.label, Label::PlanarTractable);
        assert_eq!(l.certificate[0].rule, "six-vertex/matchgate");
        let l = classify_six_vertex(&fe(1), &zeta8_pow(1), &z(), &z(), &FieldElem::i(), &zeta8_pow(3));
        assert_eq!(l.label, Label::PlanarTractable);
        assert_eq!(l.certificate[0].rule, "six-vertex/d=w=0,zeta-powers");
        let l = classify_six_vertex(&fe(1), &fe(2), &fe(3), &fe(5), &fe(7), &fe(11));
        assert_eq!(l.label, Label::PlanarHard);
    }

    #[test]
    fn eight_vertex_examples() {
        assert_eq!(label("1,0,0,2,-1/2,1,0,0"), Label::PlanarTractable);
        assert_eq!(label("1,0,0,i,i,1,0,0"), Label::GeneralTractable);
        assert_eq!(label("1,0,0,2,3,1,0,0"), Label::PlanarHard);
        assert_eq!(label("1,0,0,0,0,1,0,0"), Label::GeneralTractable);
        let b = &FieldElem::i() * &(&FieldElem::sqrt2() - &fe(1));
        let p = EightVertexParams::new([fe(1), b.clone(), -&b, fe(1), fe(1), fe(1), b.clone(), -&b]);
        let l = classify_eight_vertex(&p);
        assert_eq!(l.label, Label::PlanarTractable);
        assert_eq!(l.certificate[0].rule, "tan-point");
    }

    #[test]
    fn degenerate_inner_examples() {
        let half = FieldElem::frac(1, 2);
        let p = EightVertexParams::new([fe(1), fe(2), fe(1), fe(-1), fe(-1), fe(1), half, fe(1)]);
        assert_eq!(degenerate_inner_case(&p).unwrap(), InnerCase::InM);
        let p = EightVertexParams::from_ints([1, 1, 1, 1, 2, 1, 2, 2]);
        assert_eq!(degenerate_inner_case(&p).unwrap(), InnerCase::Hard);
        let p = EightVertexParams::from_ints([1, 3, 3, -3, -3, 1, 3, 3]);
        assert_eq!(degenerate_inner_case(&p).unwrap(), InnerCase::ArrowReversal);
        let p = EightVertexParams::from_ints([1, 0, 3, -3, -3, 1, 3, 3]);
        assert!(degenerate_inner_case(&p).is_err());
    }

    #[test]
    fn trigger_examples() {
        let p = EightVertexParams::from_ints([1, 0, 1, 2, 3, 1, 0, 4]);
        let tb = trigger_binary(&p).expect("generic point has a trigger");
        assert!(tb.t != fe(1) && tb.t != fe(-1));
        let got = tb.gadget.eval().unwrap().two().unwrap();
        let got = if tb.reversed { got.reversed() } else { got };
        assert_eq!(got, tb.binary.scale(&tb.scale));
        assert!(trigger_binary(&EightVertexParams::from_ints([1, 2, 3, 5, 5, 1, 2, 3])).is_none());
        assert!(trigger_binary(&EightVertexParams::from_ints([1, 2, 3, 5, -5, 1, -2, -3])).is_none());
    }

    #[test]
    fn certificates_replay() {
        let topo = octahedron(&Signature::named("EQ4").unwrap(), Mediator::Neq);
        for s in ["1,0,0,2,-1/2,1,0,0", "1,0,0,i,i,1,0,0", "1,0,0,0,0,1,0,0", "2,0,0,1,6,3,0,0", "1,0,3,0,0,1,0,3"] {
            let p = params(s);
            let l = classify_eight_vertex(&p);
            let w = l.engine_witness().unwrap_or_else(|| panic!("{s}: {l}"));
            assert_eq!(check_witness(&p.to_sig4(), w, &topo).unwrap(), CheckOutcome::Agrees, "{s}: {l}");
        }
    }

    #[test]
    fn corpus_labels() {
        let corpus = regression_corpus();
        assert!(corpus.len() >= 30);
        let mut bad = Vec::new();
        for pt in &corpus {
            let l = classify_eight_vertex(&pt.params);
            if l.label != pt.expected {
                bad.push(format!("{}: got {l}", pt.name));
            }
        }
        assert!(bad.is_empty(), "{}", bad.join("\n"));
    }

    #[test]
    fn scalar_and_rotation_invariance() {
        for s in ["1,0,0,2,-1/2,1,0,0", "1,2,0,3,0,1,5,0", "1,1,2,3,4,1,5,6", "2,0,1,0,0,3,0,-6"] {
            let p = params(s);
            let base = label(s);
            for k in 0..4 {
                assert_eq!(classify_eight_vertex(&p.rotate(k)).label, base, "{s} rotated {k}");
            }
            assert_eq!(classify_eight_vertex(&p.scale(&FieldElem::i())).label, base);
        }
    }
}
