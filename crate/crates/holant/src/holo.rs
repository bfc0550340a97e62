//! Holographic transformations, the constant transforms and the explicit
//! matchgate-transformability criteria for the symmetric families.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{zeta8_pow, FieldElem};
use crate::grid::{GridError, Mediator, PlanarGrid};
use crate::linalg::Matrix;
use crate::signature::{is_affine, is_local_affine, is_matchgate, is_product, Sig2, Sig4, Signature};

#[derive(Debug, Error)]
pub enum HoloError {
    #[error("transform is singular")]
    Singular,
    #[error("transform must be 2x2")]
    BadShape,
    #[error("unknown transform name {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Invertible 2x2 matrix acting by tensor powers.
#[derive(Clone, PartialEq, Eq)]
pub struct Transform2 {
    m: Matrix,
    inv: Matrix,
}

impl Transform2 {
    pub fn new(m: Matrix) -> Result<Self, HoloError> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(HoloError::BadShape);
        }
        if m.det().is_zero() {
            return Err(HoloError::Singular);
        }
        let inv = m.inverse().map_err(|_| HoloError::Singular)?;
        Ok(Transform2 { m, inv })
    }

    pub fn from_entries(a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> Result<Self, HoloError> {
        Transform2::new(Matrix::from_rows(vec![vec![a, b], vec![c, d]]))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn inverse_matrix(&self) -> &Matrix {
        &self.inv
    }

    pub fn inverse(&self) -> Transform2 {
        Transform2 { m: self.inv.clone(), inv: self.m.clone() }
    }

    pub fn compose(&self, o: &Transform2) -> Transform2 {
        Transform2 { m: &self.m * &o.m, inv: &o.inv * &self.inv }
    }

    pub fn identity() -> Transform2 {
        Transform2::new(Matrix::identity(2)).expect("identity")
    }

    /// [[1,1],[1,-1]] / sqrt2
    pub fn h() -> Transform2 {
        Transform2::new(crate::signature::hadamard()).expect("H")
    }

    /// [[1,1],[i,-i]] / sqrt2
    pub fn z() -> Transform2 {
        let s = FieldElem::sqrt2().inv().expect("nonzero");
        let i = FieldElem::i();
        Transform2::new(
            Matrix::from_rows(vec![vec![FieldElem::one(), FieldElem::one()], vec![i.clone(), -i]]).scale(&s),
        )
        .expect("Z")
    }

    pub fn hz() -> Transform2 {
        Transform2::h().compose(&Transform2::z())
    }

    pub fn diag(lambda: FieldElem) -> Result<Transform2, HoloError> {
        Transform2::from_entries(FieldElem::one(), FieldElem::zero(), FieldElem::zero(), lambda)
    }

    /// [[1, s], [1, -s]]
    pub fn split(s: FieldElem) -> Result<Transform2, HoloError> {
        Transform2::from_entries(FieldElem::one(), s.clone(), FieldElem::one(), -s)
    }

    /// [[alpha, 1], [1, i*alpha]] with alpha = zeta8.
    pub fn alpha_form() -> Transform2 {
        let a = zeta8_pow(1);
        Transform2::from_entries(a.clone(), FieldElem::one(), FieldElem::one(), &FieldElem::i() * &a).expect("nonsingular")
    }

    pub fn named(name: &str) -> Result<Transform2, HoloError> {
        match name {
            "I" | "ID" => Ok(Transform2::identity()),
            "H" => Ok(Transform2::h()),
            "Z" => Ok(Transform2::z()),
            "HZ" => Ok(Transform2::hz()),
            "ZINV" => Ok(Transform2::z().inverse()),
            _ => Err(HoloError::UnknownName(name.to_string())),
        }
    }

    /// Parse a name or a literal `[a, b; c, d]`.
    pub fn parse(s: &str) -> Result<Transform2, HoloError> {
        let t = s.trim();
        if let Ok(tr) = Transform2::named(t) {
            return Ok(tr);
        }
        let body = t
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| HoloError::UnknownName(s.to_string()))?;
        let rows: Vec<Vec<FieldElem>> = body
            .split(';')
            .map(|r| r.split(',').map(|v| v.trim().parse::<FieldElem>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()
            .map_err(|_| HoloError::UnknownName(s.to_string()))?;
        if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
            return Err(HoloError::BadShape);
        }
        Transform2::new(Matrix::from_rows(rows))
    }
}

impl fmt::Debug for Transform2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Transform2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.m;
        write!(f, "[{}, {}; {}, {}]", m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    }
}

/// T^{(x)4} f, i.e. M(g) = T^{(x)2} M(f) (T^t)^{(x)2}.
pub fn transform_sig4(t: &Transform2, f: &Sig4) -> Sig4 {
    f.transform(t.matrix())
}

/// Row action g T^{(x)2}.
pub fn transform_sig2_row(g: &Sig2, t: &Transform2) -> Sig2 {
    Sig2::try_from(g.as_signature().transform_row(t.matrix())).expect("arity 2")
}

/// Column action on any signature.
pub fn transform_column(t: &Transform2, f: &Signature) -> Signature {
    f.transform(t.matrix())
}

/// The grid after a basis change: every vertex signature f becomes T^{-1} f
/// and every mediator g becomes g T.
pub fn transformed_grid(grid: &PlanarGrid, t: &Transform2) -> PlanarGrid {
    let tinv = t.inverse();
    grid.map_signatures(
        |sig| sig.transform(tinv.matrix()),
        |med| Mediator::Sig(Sig2::try_from(med.signature().transform_row(t.matrix())).expect("arity 2")),
    )
}

/// Both sides of Valiant's identity by brute force.
pub fn verify_valiant(grid: &PlanarGrid, t: &Transform2) -> Result<bool, HoloError> {
    let lhs = crate::grid::brute_holant(grid)?;
    let rhs = crate::grid::brute_holant(&transformed_grid(grid, t))?;
    Ok(lhs == rhs)
}

/// Outcome of the explicit matchgate-transformability criteria.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymCriterion {
    InM,
    /// d = sign * unit * b * c with the witnessing transform.
    Criterion { sign: i8, imaginary: bool, witness: Transform2 },
    No,
}

/// Symmetric equality family [[1,0,0,b],[0,c,d,0],[0,d,c,0],[b,0,0,1]].
pub fn m_transformable_sym_eq(b: &FieldElem, c: &FieldElem, d: &FieldElem) -> SymCriterion {
    let f = Sig4::symmetric(&FieldElem::one(), b, c, d);
    if is_matchgate(&f) {
        return SymCriterion::InM;
    }
    let bc = b * c;
    if *d == bc {
        SymCriterion::Criterion { sign: 1, imaginary: false, witness: Transform2::split(FieldElem::i()).expect("nonsingular") }
    } else if *d == -&bc {
        SymCriterion::Criterion { sign: -1, imaginary: false, witness: Transform2::split(FieldElem::one()).expect("nonsingular") }
    } else {
        SymCriterion::No
    }
}

/// Symmetric disequality family [[1,0,0,b],[0,c,d,0],[0,-d,-c,0],[-b,0,0,1]].
pub fn m_transformable_sym_neq(b: &FieldElem, c: &FieldElem, d: &FieldElem) -> SymCriterion {
    let f = sym_neq_sig(b, c, d);
    if is_matchgate(&f) {
        return SymCriterion::InM;
    }
    let ibc = &(b * c) * &FieldElem::i();
    let sqrt_i = zeta8_pow(1);
    if *d == ibc {
        let s = &FieldElem::i() * &sqrt_i;
        SymCriterion::Criterion { sign: 1, imaginary: true, witness: Transform2::split(s).expect("nonsingular") }
    } else if *d == -&ibc {
        SymCriterion::Criterion { sign: -1, imaginary: true, witness: Transform2::split(sqrt_i).expect("nonsingular") }
    } else {
        SymCriterion::No
    }
}

pub fn sym_neq_sig(b: &FieldElem, c: &FieldElem, d: &FieldElem) -> Sig4 {
    Sig4::eight_vertex(FieldElem::one(), b.clone(), c.clone(), d.clone(), -d, FieldElem::one(), -b, -c)
}

/// Tractable families reachable by a basis change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TractableClass {
    Affine,
    Product,
    Matchgate,
    LocalAffine,
}

impl TractableClass {
    pub fn contains(&self, f: &Signature) -> bool {
        match self {
            TractableClass::Affine => is_affine(f).is_some(),
            TractableClass::Product => is_product(f).is_some(),
            TractableClass::Matchgate => is_matchgate(f),
            TractableClass::LocalAffine => is_local_affine(f),
        }
    }
}

/// True if T makes both sides of Pl-Holant(NEQ2 | f) land in `class`:
/// T^{(x)4} f and NEQ2 (T^{-1})^{(x)2}.
pub fn transform_certifies(f: &Sig4, t: &Transform2, class: TractableClass) -> bool {
    let med = Sig2::neq().as_signature().transform_row(t.inverse_matrix());
    class.contains(&med) && class.contains(&transform_sig4(t, f))
}

/// The curated transform set before composition.
pub fn curated_transforms() -> Vec<(String, Transform2)> {
    let mut v = vec![
        ("I".to_string(), Transform2::identity()),
        ("H".to_string(), Transform2::h()),
        ("Z".to_string(), Transform2::z()),
        ("HZ".to_string(), Transform2::hz()),
    ];
    for k in 1..8 {
        v.push((format!("diag(1,Z8^{k})"), Transform2::diag(zeta8_pow(k)).expect("nonsingular")));
    }
    let i = FieldElem::i();
    let sqrt_i = zeta8_pow(1);
    v.push(("[1,I;1,-I]".into(), Transform2::split(i.clone()).expect("nonsingular")));
    v.push(("[1,1;1,-1]".into(), Transform2::split(FieldElem::one()).expect("nonsingular")));
    v.push(("[1,Z8;1,-Z8]".into(), Transform2::split(sqrt_i.clone()).expect("nonsingular")));
    v.push(("[1,I*Z8;1,-I*Z8]".into(), Transform2::split(&i * &sqrt_i).expect("nonsingular")));
    v.push(("[Z8,1;1,I*Z8]".into(), Transform2::alpha_form()));
    v
}

struct Curated {
    name: String,
    t: Transform2,
    /// whether the transformed mediator lies in each class, indexed by `class_slot`
    med_ok: [bool; 4],
}

fn class_slot(class: TractableClass) -> usize {
    match class {
        TractableClass::Affine => 0,
        TractableClass::Product => 1,
        TractableClass::Matchgate => 2,
        TractableClass::LocalAffine => 3,
    }
}

/// The curated set followed by its depth-two compositions, with the
/// f-independent mediator tests done once.
fn curated_closure() -> &'static [Curated] {
    static CLOSURE: OnceLock<Vec<Curated>> = OnceLock::new();
    CLOSURE.get_or_init(|| {
        let base = curated_transforms();
        let mut all: Vec<(String, Transform2)> = base.clone();
        for (n1, t1) in &base[1..] {
            for (n2, t2) in &base[1..] {
                all.push((format!("{n1}*{n2}"), t1.compose(t2)));
            }
        }
        // every class is closed under scalars, so keep one matrix per projective class
        let mut seen: Vec<[FieldElem; 4]> = Vec::new();
        all.retain(|(_, t)| {
            let m = t.matrix();
            let e = [m[(0, 0)].clone(), m[(0, 1)].clone(), m[(1, 0)].clone(), m[(1, 1)].clone()];
            let lead = e.iter().find(|x| !x.is_zero()).expect("nonsingular").clone();
            let key = e.map(|x| x.try_div(&lead).expect("nonzero"));
            if seen.contains(&key) {
                return false;
            }
            seen.push(key);
            true
        });
        let classes = [TractableClass::Affine, TractableClass::Product, TractableClass::Matchgate, TractableClass::LocalAffine];
        all.into_iter()
            .map(|(name, t)| {
                let med = Sig2::neq().as_signature().transform_row(t.inverse_matrix());
                let med_ok = classes.map(|c| c.contains(&med));
                Curated { name, t, med_ok }
            })
            .collect()
    })
}

/// Search the curated set, composed up to depth two, for a transform
/// certifying `class`. Absence means "not found", never "impossible".
pub fn transformable_search(f: &Sig4, class: TractableClass) -> Option<(String, Transform2)> {
    transformable_search_any(f, &[class]).map(|(_, name, t)| (name, t))
}

/// The first class in `classes` (in order) with a certifying curated
/// transform; each T^{(x)4} f is computed at most once.
pub fn transformable_search_any(f: &Sig4, classes: &[TractableClass]) -> Option<(TractableClass, String, Transform2)> {
    let set = curated_closure();
    let mut images: Vec<Option<Signature>> = vec![None; set.len()];
    for &class in classes {
        let slot = class_slot(class);
        for (k, c) in set.iter().enumerate() {
            if !c.med_ok[slot] {
                continue;
            }
            let img = images[k].get_or_insert_with(|| transform_sig4(&c.t, f).into_signature());
            if class.contains(img) {
                return Some((class, c.name.clone(), c.t.clone()));
            }
        }
    }
    None
}

/// Even-parity f scaled by mu^(w/2) on weight-w inputs, i.e. diag(1, sqrt(mu))^{(x)4} f.
pub fn weight_scaled(f: &Sig4, mu: &FieldElem) -> Sig4 {
    let mu2 = mu.square();
    Sig4::try_from(f.as_signature().map_values(|idx, v| match idx.count_ones() {
        0 | 1 => v.clone(),
        2 | 3 => v * mu,
        _ => v * &mu2,
    }))
    .expect("arity 4")
}

/// Complete search for a diagonal transform diag(1, lambda) sending an
/// even-parity f into `class` (Affine or LocalAffine). Returns mu = lambda^2.
/// The mediator becomes lambda^{-1} NEQ2, which lies in every class.
pub fn diagonal_search(f: &Sig4, class: TractableClass) -> Option<FieldElem> {
    if !f.is_eight_vertex_form() {
        return None;
    }
    let supp = f.support();
    let w0: Vec<&FieldElem> = supp.iter().filter(|i| i.count_ones() == 0).map(|&i| f.get(i)).collect();
    let w2: Vec<&FieldElem> = supp.iter().filter(|i| i.count_ones() == 2).map(|&i| f.get(i)).collect();
    let w4: Vec<&FieldElem> = supp.iter().filter(|i| i.count_ones() == 4).map(|&i| f.get(i)).collect();
    let units: Vec<FieldElem> = match class {
        TractableClass::LocalAffine => (0..8).map(zeta8_pow).collect(),
        _ => (0..4).map(|k| zeta8_pow(2 * k)).collect(),
    };
    let mut bases: Vec<FieldElem> = Vec::new();
    if let (Some(a), Some(e)) = (w0.first(), w2.first()) {
        bases.push(a.try_div(e).ok()?);
    } else if let (Some(e), Some(x)) = (w2.first(), w4.first()) {
        bases.push(e.try_div(x).ok()?);
    } else if let (Some(a), Some(x)) = (w0.first(), w4.first()) {
        // only mu^2 is constrained; any square root of (a/x)*unit will do
        for u in &units {
            if let Some(m) = (&a.try_div(x).ok()? * u).sqrt() {
                bases.push(m);
            }
        }
        if bases.is_empty() {
            return None;
        }
        let cand: Vec<FieldElem> = bases;
        return cand.into_iter().find(|mu| class.contains(weight_scaled(f, mu).as_signature()));
    } else {
        return if class.contains(f.as_signature()) { Some(FieldElem::one()) } else { None };
    }
    let base = bases.pop()?;
    units
        .iter()
        .map(|u| &base * u)
        .find(|mu| class.contains(weight_scaled(f, mu).as_signature()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    #[test]
    fn z_transform_of_symmetric_family() {
        let (b, c, d) = (fe("2"), fe("3"), fe("5"));
        let f = Sig4::symmetric(&FieldElem::one(), &b, &c, &d);
        let g = transform_sig4(&Transform2::z(), &f);
        let one = FieldElem::one();
        let h = FieldElem::frac(1, 2);
        let p = |v: FieldElem| &v * &h;
        let o = FieldElem::zero;
        let want = Matrix::from_rows(vec![
            vec![p(&(&(&one + &b) + &c) + &d), o(), o(), p(&(&(&-&one - &b) + &c) + &d)],
            vec![o(), p(&(&(&-&one + &b) - &c) + &d), p(&(&(&-&one + &b) + &c) - &d), o()],
            vec![o(), p(&(&(&-&one + &b) + &c) - &d), p(&(&(&-&one + &b) - &c) + &d), o()],
            vec![p(&(&(&-&one - &b) + &c) + &d), o(), o(), p(&(&(&one + &b) + &c) + &d)],
        ]);
        assert_eq!(g.matrix(), want);
        // matrix form of the same action
        let t = Transform2::z();
        let t2 = t.matrix().kron(t.matrix());
        let tt2 = t.matrix().transpose().kron(&t.matrix().transpose());
        assert_eq!(g.matrix(), &(&t2 * &f.matrix()) * &tt2);
    }

    #[test]
    fn row_actions() {
        let neq = Sig2::neq();
        assert_eq!(transform_sig2_row(&neq, &Transform2::z().inverse()), Sig2::eq());
        let l = fe("3");
        let d = Transform2::diag(l.clone()).unwrap();
        assert_eq!(transform_sig2_row(&neq, &d), Sig2::neq().scale(&l));
        assert_eq!(transform_sig2_row(&Sig2::eq(), &Transform2::h()), Sig2::eq());
    }

    #[test]
    fn identity_transform_fixes() {
        let f = Sig4::eight_vertex_ints([1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(transform_sig4(&Transform2::identity(), &f), f);
        let d = Transform2::diag(fe("5")).unwrap();
        assert!(transform_sig4(&d, &f).is_eight_vertex_form());
    }

    #[test]
    fn symmetric_equality_criteria() {
        let r = m_transformable_sym_eq(&fe("2"), &fe("3"), &fe("6"));
        let SymCriterion::Criterion { sign: 1, witness, .. } = r else { panic!("{r:?}") };
        assert_eq!(witness, Transform2::split(FieldElem::i()).unwrap());
        let f = Sig4::symmetric(&FieldElem::one(), &fe("2"), &fe("3"), &fe("6"));
        assert!(transform_certifies(&f, &witness, TractableClass::Matchgate));
        assert!(matches!(m_transformable_sym_eq(&fe("2"), &fe("3"), &fe("-6")), SymCriterion::Criterion { sign: -1, .. }));
        assert_eq!(m_transformable_sym_eq(&fe("1"), &fe("7"), &fe("7")), SymCriterion::InM);
        assert_eq!(m_transformable_sym_eq(&fe("2"), &fe("3"), &fe("5")), SymCriterion::No);
    }

    #[test]
    fn symmetric_disequality_criteria() {
        for (d, sign) in [("6*I", 1), ("-6*I", -1)] {
            let r = m_transformable_sym_neq(&fe("2"), &fe("3"), &fe(d));
            let SymCriterion::Criterion { sign: s, witness, .. } = r else { panic!() };
            assert_eq!(s, sign);
            let f = sym_neq_sig(&fe("2"), &fe("3"), &fe(d));
            assert!(transform_certifies(&f, &witness, TractableClass::Matchgate));
        }
        // b = c = d = 0 is EQ4, which fails the determinant test but meets d = ibc
        let r = m_transformable_sym_neq(&fe("0"), &fe("0"), &fe("0"));
        let SymCriterion::Criterion { witness, .. } = r else { panic!("{r:?}") };
        assert!(transform_certifies(&sym_neq_sig(&fe("0"), &fe("0"), &fe("0")), &witness, TractableClass::Matchgate));
    }

    #[test]
    fn alpha_form_witness() {
        // c = -z with a = x = 1, everything else zero
        let f = Sig4::eight_vertex_ints([1, 0, 3, 0, 0, 1, 0, -3]);
        assert!(transform_certifies(&f, &Transform2::alpha_form(), TractableClass::Matchgate));
        let (_, t) = transformable_search(&f, TractableClass::Matchgate).unwrap();
        assert!(transform_certifies(&f, &t, TractableClass::Matchgate));
    }

    #[test]
    fn search_identity_and_absent() {
        let f = Sig4::eight_vertex_ints([1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(transformable_search(&f, TractableClass::Matchgate).unwrap().0, "I");
        let g = Sig4::eight_vertex_ints([1, 2, 3, 5, 7, 11, 13, 17]);
        assert!(transformable_search(&g, TractableClass::Matchgate).is_none());
        assert!(transformable_search(&g, TractableClass::Affine).is_none());
    }

    #[test]
    fn diagonal_search_normalizes() {
        // a = 1, x = 4, d = w = 2i: affine after scaling by 1/2
        let f = Sig4::eight_vertex(fe("1"), fe("0"), fe("0"), fe("2*I"), fe("2*I"), fe("4"), fe("0"), fe("0"));
        assert!(is_affine(&f).is_none());
        let mu = diagonal_search(&f, TractableClass::Affine).unwrap();
        assert!(is_affine(weight_scaled(&f, &mu).as_signature()).is_some());
    }

    #[test]
    fn parse_transforms() {
        assert_eq!(Transform2::parse("Z").unwrap(), Transform2::z());
        let t = Transform2::parse("[1, I; 1, -I]").unwrap();
        assert_eq!(t, Transform2::split(FieldElem::i()).unwrap());
        assert!(matches!(Transform2::parse("[1,1;1,1]"), Err(HoloError::Singular)));
    }
}
