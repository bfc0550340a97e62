//! Signatures of arity at most four, their matrices, rotations and the
//! membership tests for the tractable families.
//!
//! Index convention: the value of `f(x1, ..., xn)` is stored at
//! `x1*2^(n-1) + ... + xn`, so `x1` is the most significant bit.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{zeta8_pow, FieldElem, FieldError};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("signature of arity {arity} needs {expected} values, got {got}")]
    WrongLength { arity: usize, expected: usize, got: usize },
    #[error("expected arity {expected}, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("cannot infer arity from {0} values")]
    BadLength(usize),
    #[error("unknown signature name {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub const MAX_ARITY: usize = 4;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    arity: usize,
    values: Vec<FieldElem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Value of variable `k` (0-based, x1 = 0) in assignment `idx` of arity `n`.
#[inline]
pub fn bit(idx: usize, k: usize, n: usize) -> u8 {
    ((idx >> (n - 1 - k)) & 1) as u8
}

impl Signature {
    pub fn new(arity: usize, values: Vec<FieldElem>) -> Result<Self, SignatureError> {
        let expected = 1usize << arity;
        if values.len() != expected {
            return Err(SignatureError::WrongLength { arity, expected, got: values.len() });
        }
        Ok(Signature { arity, values })
    }

    pub fn from_values(values: Vec<FieldElem>) -> Result<Self, SignatureError> {
        let n = values.len();
        if !n.is_power_of_two() || n < 2 {
            return Err(SignatureError::BadLength(n));
        }
        Signature::new(n.trailing_zeros() as usize, values)
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Signature::from_values(values.iter().map(|&v| FieldElem::from_int(v)).collect()).expect("power-of-two length")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[FieldElem] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> &FieldElem {
        &self.values[idx]
    }

    pub fn at(&self, bits: &[u8]) -> &FieldElem {
        debug_assert_eq!(bits.len(), self.arity);
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        &self.values[idx]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| !self.values[i].is_zero()).collect()
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for i in self.support() {
            if i.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn scale(&self, s: &FieldElem) -> Signature {
        Signature { arity: self.arity, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn map_values<F: Fn(usize, &FieldElem) -> FieldElem>(&self, f: F) -> Signature {
        Signature { arity: self.arity, values: self.values.iter().enumerate().map(|(i, v)| f(i, v)).collect() }
    }

    /// T^{(x)n} f with f read as a column vector.
    pub fn transform(&self, t: &Matrix) -> Signature {
        assert!(t.rows() == 2 && t.cols() == 2, "transform must be 2x2");
        let n = self.arity;
        let mut cur = self.values.clone();
        // Apply T on one tensor factor at a time.
        for k in 0..n {
            let mut next = vec![FieldElem::zero(); cur.len()];
            let shift = n - 1 - k;
            for (idx, slot) in next.iter_mut().enumerate() {
                let y = (idx >> shift) & 1;
                let base = idx & !(1 << shift);
                let mut acc = FieldElem::zero();
                for x in 0..2 {
                    let tv = &t[(y, x)];
                    let v = &cur[base | (x << shift)];
                    if !tv.is_zero() && !v.is_zero() {
                        acc += &(tv * v);
                    }
                }
                *slot = acc;
            }
            cur = next;
        }
        Signature { arity: n, values: cur }
    }

    /// Row-vector action g * T^{(x)n}.
    pub fn transform_row(&self, t: &Matrix) -> Signature {
        self.transform(&t.transpose())
    }

    pub fn named(name: &str) -> Result<Signature, SignatureError> {
        Ok(match name {
            "EQ2" => Signature::from_ints(&[1, 0, 0, 1]),
            "NEQ2" => Signature::from_ints(&[0, 1, 1, 0]),
            "EQ4" => {
                let mut v = vec![0; 16];
                v[0] = 1;
                v[15] = 1;
                Signature::from_ints(&v)
            }
            "S" => Sig4::crossover().into_signature(),
            "SPRIME" => Sig4::crossover_neq().into_signature(),
            "N" => Sig4::from_matrix(&double_neq_matrix()).into_signature(),
            _ => return Err(SignatureError::UnknownName(name.to_string())),
        })
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Signature {
    type Err = SignatureError;
    fn from_str(s: &str) -> Result<Self, SignatureError> {
        let t = s.trim();
        if t.chars().all(|c| c.is_ascii_alphanumeric()) && t.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
            if let Ok(sig) = Signature::named(t) {
                return Ok(sig);
            }
        }
        let body = t.strip_prefix('[').and_then(|b| b.strip_suffix(']')).unwrap_or(t);
        let values = body
            .split(',')
            .map(|p| p.trim().parse::<FieldElem>())
            .collect::<Result<Vec<_>, _>>()?;
        Signature::from_values(values)
    }
}

/// N = X (x) X, the signature matrix of two disequalities side by side.
pub fn double_neq_matrix() -> Matrix {
    Matrix::from_ints(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]])
}

/// Arity-4 signature.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sig4(Signature);

/// Arity-2 signature (g00, g01, g10, g11).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sig2(Signature);

impl Sig4 {
    pub fn new(values: Vec<FieldElem>) -> Result<Self, SignatureError> {
        Ok(Sig4(Signature::new(4, values)?))
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Sig4(Signature::from_ints(values))
    }

    pub fn as_signature(&self) -> &Signature {
        &self.0
    }

    pub fn into_signature(self) -> Signature {
        self.0
    }

    pub fn entry(&self, x1: u8, x2: u8, x3: u8, x4: u8) -> &FieldElem {
        self.0.at(&[x1, x2, x3, x4])
    }

    /// Signature matrix with rows x1x2 and columns x4x3.
    pub fn matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(4, 4);
        for idx in 0..16 {
            let (x1, x2, x3, x4) = (bit(idx, 0, 4), bit(idx, 1, 4), bit(idx, 2, 4), bit(idx, 3, 4));
            m[((2 * x1 + x2) as usize, (2 * x4 + x3) as usize)] = self.0.values[idx].clone();
        }
        m
    }

    pub fn from_matrix(m: &Matrix) -> Sig4 {
        assert!(m.rows() == 4 && m.cols() == 4);
        let values = (0..16)
            .map(|idx| {
                let (x1, x2, x3, x4) = (bit(idx, 0, 4), bit(idx, 1, 4), bit(idx, 2, 4), bit(idx, 3, 4));
                m[((2 * x1 + x2) as usize, (2 * x4 + x3) as usize)].clone()
            })
            .collect();
        Sig4(Signature { arity: 4, values })
    }

    /// [[a,0,0,b],[0,c,d,0],[0,w,z,0],[y,0,0,x]]
    #[allow(clippy::too_many_arguments)]
    pub fn eight_vertex(
        a: FieldElem,
        b: FieldElem,
        c: FieldElem,
        d: FieldElem,
        w: FieldElem,
        x: FieldElem,
        y: FieldElem,
        z: FieldElem,
    ) -> Sig4 {
        let o = FieldElem::zero;
        Sig4::from_matrix(&Matrix::from_rows(vec![
            vec![a, o(), o(), b],
            vec![o(), c, d, o()],
            vec![o(), w, z, o()],
            vec![y, o(), o(), x],
        ]))
    }

    pub fn eight_vertex_ints(p: [i64; 8]) -> Sig4 {
        let f = |k: usize| FieldElem::from_int(p[k]);
        Sig4::eight_vertex(f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7))
    }

    /// Symmetric family [[a,0,0,b],[0,c,d,0],[0,d,c,0],[b,0,0,a]].
    pub fn symmetric(a: &FieldElem, b: &FieldElem, c: &FieldElem, d: &FieldElem) -> Sig4 {
        Sig4::eight_vertex(a.clone(), b.clone(), c.clone(), d.clone(), d.clone(), a.clone(), b.clone(), c.clone())
    }

    pub fn is_eight_vertex_form(&self) -> bool {
        self.0.parity() == Parity::Even
    }

    /// (a, b, c, d, w, x, y, z) if the support has even weight.
    pub fn params(&self) -> Option<[FieldElem; 8]> {
        if !self.is_eight_vertex_form() {
            return None;
        }
        let m = self.matrix();
        Some([
            m[(0, 0)].clone(),
            m[(0, 3)].clone(),
            m[(1, 1)].clone(),
            m[(1, 2)].clone(),
            m[(2, 1)].clone(),
            m[(3, 3)].clone(),
            m[(3, 0)].clone(),
            m[(2, 2)].clone(),
        ])
    }

    /// Quarter-turn rotation: rotating once maps f to g(y1,y2,y3,y4) = f(y4,y1,y2,y3).
    pub fn rotate(&self, quarter_turns: i64) -> Sig4 {
        let k = quarter_turns.rem_euclid(4) as usize;
        let mut cur = self.clone();
        for _ in 0..k {
            let values = (0..16)
                .map(|idx| {
                    let y: Vec<u8> = (0..4).map(|j| bit(idx, j, 4)).collect();
                    cur.0.at(&[y[3], y[0], y[1], y[2]]).clone()
                })
                .collect();
            cur = Sig4(Signature { arity: 4, values });
        }
        cur
    }

    pub fn outer(&self) -> Matrix {
        let m = self.matrix();
        Matrix::from_rows(vec![vec![m[(0, 0)].clone(), m[(0, 3)].clone()], vec![m[(3, 0)].clone(), m[(3, 3)].clone()]])
    }

    pub fn inner(&self) -> Matrix {
        let m = self.matrix();
        Matrix::from_rows(vec![vec![m[(1, 1)].clone(), m[(1, 2)].clone()], vec![m[(2, 1)].clone(), m[(2, 2)].clone()]])
    }

    /// Indicator of (x1 = x3) and (x2 = x4).
    pub fn crossover() -> Sig4 {
        Sig4::from_matrix(&Matrix::from_ints(&[&[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]]))
    }

    /// Indicator of (x1 != x3) and (x2 != x4).
    pub fn crossover_neq() -> Sig4 {
        Sig4::from_matrix(&Matrix::from_ints(&[&[0, 0, 0, 1], &[0, 1, 0, 0], &[0, 0, 1, 0], &[1, 0, 0, 0]]))
    }

    pub fn transform(&self, t: &Matrix) -> Sig4 {
        Sig4(self.0.transform(t))
    }

    pub fn scale(&self, s: &FieldElem) -> Sig4 {
        Sig4(self.0.scale(s))
    }
}

impl TryFrom<Signature> for Sig4 {
    type Error = SignatureError;
    fn try_from(s: Signature) -> Result<Self, SignatureError> {
        if s.arity != 4 {
            return Err(SignatureError::WrongArity { expected: 4, got: s.arity });
        }
        Ok(Sig4(s))
    }
}

impl From<Sig4> for Signature {
    fn from(s: Sig4) -> Signature {
        s.0
    }
}

impl std::ops::Deref for Sig4 {
    type Target = Signature;
    fn deref(&self) -> &Signature {
        &self.0
    }
}

impl fmt::Display for Sig4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Sig4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sig4{:?}", self.matrix())
    }
}

impl Sig2 {
    pub fn new(g00: FieldElem, g01: FieldElem, g10: FieldElem, g11: FieldElem) -> Sig2 {
        Sig2(Signature { arity: 2, values: vec![g00, g01, g10, g11] })
    }

    pub fn from_ints(v: [i64; 4]) -> Sig2 {
        Sig2(Signature::from_ints(&v))
    }

    pub fn neq() -> Sig2 {
        Sig2::from_ints([0, 1, 1, 0])
    }

    pub fn eq() -> Sig2 {
        Sig2::from_ints([1, 0, 0, 1])
    }

    /// (0, 1, t, 0)
    pub fn weighted_neq(t: FieldElem) -> Sig2 {
        Sig2::new(FieldElem::zero(), FieldElem::one(), t, FieldElem::zero())
    }

    pub fn g(&self, x1: u8, x2: u8) -> &FieldElem {
        &self.0.values[(2 * x1 + x2) as usize]
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_rows(vec![
            vec![self.0.values[0].clone(), self.0.values[1].clone()],
            vec![self.0.values[2].clone(), self.0.values[3].clone()],
        ])
    }

    pub fn from_matrix(m: &Matrix) -> Sig2 {
        Sig2::new(m[(0, 0)].clone(), m[(0, 1)].clone(), m[(1, 0)].clone(), m[(1, 1)].clone())
    }

    pub fn as_signature(&self) -> &Signature {
        &self.0
    }

    pub fn into_signature(self) -> Signature {
        self.0
    }

    pub fn scale(&self, s: &FieldElem) -> Sig2 {
        Sig2(self.0.scale(s))
    }

    /// The same function with its two variables swapped.
    pub fn reversed(&self) -> Sig2 {
        Sig2::new(self.g(0, 0).clone(), self.g(1, 0).clone(), self.g(0, 1).clone(), self.g(1, 1).clone())
    }
}

impl TryFrom<Signature> for Sig2 {
    type Error = SignatureError;
    fn try_from(s: Signature) -> Result<Self, SignatureError> {
        if s.arity != 2 {
            return Err(SignatureError::WrongArity { expected: 2, got: s.arity });
        }
        Ok(Sig2(s))
    }
}

impl From<Sig2> for Signature {
    fn from(s: Sig2) -> Signature {
        s.0
    }
}

impl std::ops::Deref for Sig2 {
    type Target = Signature;
    fn deref(&self) -> &Signature {
        &self.0
    }
}

impl fmt::Display for Sig2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Sig2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sig2{}", self.0)
    }
}

/// lambda * chi[A x = c] * i^Q(x) with Q(x) = q0 + sum lin_k x_k + 2 sum_{(j,k) in cross} x_j x_k (mod 4).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub arity: usize,
    pub lambda: FieldElem,
    /// Each row is (variable mask, right-hand side); bit k of the mask is variable k.
    pub constraints: Vec<(u32, u8)>,
    pub q0: u8,
    pub lin: Vec<u8>,
    pub cross: Vec<(usize, usize)>,
}

impl AffineForm {
    pub fn eval(&self, idx: usize) -> FieldElem {
        let n = self.arity;
        let x: Vec<u8> = (0..n).map(|k| bit(idx, k, n)).collect();
        for (mask, rhs) in &self.constraints {
            let s: u8 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| x[k]).sum::<u8>() % 2;
            if s != *rhs {
                return FieldElem::zero();
            }
        }
        let mut q = self.q0 as u32;
        for k in 0..n {
            q += self.lin[k] as u32 * x[k] as u32;
        }
        for &(j, k) in &self.cross {
            q += 2 * (x[j] * x[k]) as u32;
        }
        &self.lambda * &zeta8_pow(2 * (q % 4) as i64)
    }
}

/// Exponent e with v = i^e.
fn i_exponent(v: &FieldElem) -> Option<u8> {
    v.i_log().map(|k| k as u8)
}

/// GF(2) row reduction of bit vectors; returns reduced basis with pivot bits.
fn gf2_basis(vectors: &[u32]) -> Vec<(u32, usize)> {
    let mut basis: Vec<(u32, usize)> = Vec::new();
    for &v in vectors {
        let mut v = v;
        for &(b, p) in &basis {
            if v >> p & 1 == 1 {
                v ^= b;
            }
        }
        if v == 0 {
            continue;
        }
        let p = v.trailing_zeros() as usize;
        for e in basis.iter_mut() {
            if e.0 >> p & 1 == 1 {
                e.0 ^= v;
            }
        }
        basis.push((v, p));
    }
    basis
}

/// Membership in the affine class with a witness.
pub fn is_affine(f: &Signature) -> Option<AffineForm> {
    let n = f.arity();
    let supp = f.support();
    if supp.is_empty() {
        return Some(AffineForm {
            arity: n,
            lambda: FieldElem::zero(),
            constraints: vec![],
            q0: 0,
            lin: vec![0; n],
            cross: vec![],
        });
    }
    // Work with variable masks: bit k <-> variable k.
    let to_mask = |idx: usize| -> u32 { (0..n).map(|k| (bit(idx, k, n) as u32) << k).sum() };
    let from_mask = |m: u32| -> usize { (0..n).fold(0usize, |acc, k| (acc << 1) | (m >> k & 1) as usize) };
    let masks: Vec<u32> = supp.iter().map(|&i| to_mask(i)).collect();
    if !masks.len().is_power_of_two() {
        return None;
    }
    let p0 = masks[0];
    let diffs: Vec<u32> = masks.iter().map(|m| m ^ p0).collect();
    let basis = gf2_basis(&diffs);
    if 1usize << basis.len() != masks.len() {
        return None;
    }
    let lambda = f.get(supp[0]).clone();
    let inv_l = lambda.inv().ok()?;
    let point = |t: u32| -> u32 {
        let mut m = p0;
        for (j, (b, _)) in basis.iter().enumerate() {
            if t >> j & 1 == 1 {
                m ^= b;
            }
        }
        m
    };
    let k = basis.len();
    let expo = |t: u32| -> Option<u8> { i_exponent(&(f.get(from_mask(point(t))) * &inv_l)) };
    let mut a = vec![0u8; k];
    for j in 0..k {
        a[j] = expo(1 << j)?;
    }
    let mut b = vec![vec![0u8; k]; k];
    for j in 0..k {
        for l in j + 1..k {
            let e = (expo((1 << j) | (1 << l))? + 8 - a[j] - a[l]) % 4;
            if e % 2 == 1 {
                return None;
            }
            b[j][l] = e / 2;
        }
    }
    for t in 0..(1u32 << k) {
        let mut q = 0u32;
        for j in 0..k {
            if t >> j & 1 == 1 {
                q += a[j] as u32;
                for l in j + 1..k {
                    if t >> l & 1 == 1 {
                        q += 2 * b[j][l] as u32;
                    }
                }
            }
        }
        if expo(t)? as u32 != q % 4 {
            return None;
        }
    }
    // Rewrite in the original variables: t_j = c_j + s_j x_{p_j}.
    let mut q0 = 0u32;
    let mut lin = vec![0u32; n];
    let mut cross = Vec::new();
    let c: Vec<u32> = basis.iter().map(|&(_, p)| p0 >> p & 1).collect();
    for j in 0..k {
        let pj = basis[j].1;
        let s = if c[j] == 1 { 3 } else { 1 };
        q0 += a[j] as u32 * c[j];
        lin[pj] += a[j] as u32 * s;
        for l in 0..k {
            if l == j {
                continue;
            }
            let bjl = if j < l { b[j][l] } else { b[l][j] } as u32;
            if bjl == 0 {
                continue;
            }
            if j < l {
                q0 += 2 * c[j] * c[l];
                let pl = basis[l].1;
                cross.push((pj.min(pl), pj.max(pl)));
            }
            lin[pj] += 2 * c[l];
        }
    }
    // Constraints: the orthogonal complement of the difference space.
    let span_mask: Vec<u32> = basis.iter().map(|&(v, _)| v).collect();
    let mut constraints = Vec::new();
    let perp: Vec<u32> = (0..(1u32 << n))
        .filter(|h| span_mask.iter().all(|v| (h & v).count_ones() % 2 == 0))
        .filter(|&h| h != 0)
        .collect();
    for (h, _) in gf2_basis(&perp) {
        constraints.push((h, ((h & p0).count_ones() % 2) as u8));
    }
    let form = AffineForm {
        arity: n,
        lambda,
        constraints,
        q0: (q0 % 4) as u8,
        lin: lin.into_iter().map(|v| (v % 4) as u8).collect(),
        cross,
    };
    debug_assert!((0..f.values().len()).all(|i| form.eval(i) == *f.get(i)));
    Some(form)
}

/// One factor of a product-type signature: the variables in `vars` take
/// values alpha xor s, weighted by w0 (s = 0) and w1 (s = 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductBlock {
    pub vars: Vec<usize>,
    pub alpha: Vec<u8>,
    pub w0: FieldElem,
    pub w1: FieldElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductForm {
    pub arity: usize,
    pub scale: FieldElem,
    pub blocks: Vec<ProductBlock>,
}

impl ProductForm {
    pub fn eval(&self, idx: usize) -> FieldElem {
        let n = self.arity;
        let mut v = self.scale.clone();
        for b in &self.blocks {
            let x0 = bit(idx, b.vars[0], n) ^ b.alpha[0];
            if b.vars.iter().zip(&b.alpha).any(|(&k, &al)| bit(idx, k, n) ^ al != x0) {
                return FieldElem::zero();
            }
            v = &v * if x0 == 0 { &b.w0 } else { &b.w1 };
        }
        v
    }
}

fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(k);
            rec(k + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![k]);
        rec(k + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    // finest partitions first
    out.sort_by_key(|p| std::cmp::Reverse(p.len()));
    out
}

/// Membership in the product class with a factorization witness.
pub fn is_product(f: &Signature) -> Option<ProductForm> {
    let n = f.arity();
    let supp = f.support();
    let Some(&p) = supp.first() else {
        return Some(ProductForm { arity: n, scale: FieldElem::zero(), blocks: vec![] });
    };
    let fp = f.get(p).clone();
    let fp_inv = fp.inv().ok()?;
    'partition: for part in set_partitions(n) {
        // Candidate factor tables f_B(y) = f(p with x_B := y).
        let mut tables: Vec<Vec<FieldElem>> = Vec::new();
        for block in &part {
            let m = block.len();
            let mut t = Vec::with_capacity(1 << m);
            for y in 0..(1usize << m) {
                let mut idx = p;
                for (j, &k) in block.iter().enumerate() {
                    let shift = n - 1 - k;
                    idx = (idx & !(1 << shift)) | ((bit(y, j, m) as usize) << shift);
                }
                t.push(f.get(idx).clone());
            }
            let s: Vec<usize> = (0..t.len()).filter(|&i| !t[i].is_zero()).collect();
            let full = (1usize << m) - 1;
            if s.len() > 2 || (s.len() == 2 && s[0] ^ s[1] != full) {
                continue 'partition;
            }
            tables.push(t);
        }
        let scale = fp_inv.pow(part.len() as i64 - 1).ok()?;
        for idx in 0..(1usize << n) {
            let mut prod = scale.clone();
            for (block, t) in part.iter().zip(&tables) {
                let y = block.iter().fold(0usize, |acc, &k| (acc << 1) | bit(idx, k, n) as usize);
                prod = &prod * &t[y];
            }
            if prod != *f.get(idx) {
                continue 'partition;
            }
        }
        let mut blocks = Vec::new();
        for (block, t) in part.iter().zip(&tables) {
            let m = block.len();
            let full = (1usize << m) - 1;
            let alpha_idx = (0..t.len()).find(|&i| !t[i].is_zero()).unwrap_or(0);
            let alpha = if m == 1 { 0 } else { alpha_idx };
            blocks.push(ProductBlock {
                vars: block.clone(),
                alpha: (0..m).map(|j| bit(alpha, j, m)).collect(),
                w0: t[alpha].clone(),
                w1: t[alpha ^ full].clone(),
            });
        }
        let form = ProductForm { arity: n, scale, blocks };
        debug_assert!((0..f.values().len()).all(|i| form.eval(i) == *f.get(i)));
        return Some(form);
    }
    None
}

/// Matchgate test: parity condition for arity at most 3, plus the
/// determinant identities at arity 4.
pub fn is_matchgate(f: &Signature) -> bool {
    let parity = f.parity();
    if parity == Parity::Mixed {
        return false;
    }
    if f.arity() <= 3 {
        return true;
    }
    if f.arity() > 4 {
        return false;
    }
    let v = |s: &str| f.get(usize::from_str_radix(s, 2).unwrap()).clone();
    match parity {
        Parity::Even => {
            let det_out = &v("0000") * &v("1111") - &v("0011") * &v("1100");
            let det_in = &v("0110") * &v("1001") - &v("0101") * &v("1010");
            det_out == det_in
        }
        _ => {
            let lhs = &v("0010") * &v("1101") - &v("0001") * &v("1110");
            let rhs = &v("0100") * &v("1011") - &v("0111") * &v("1000");
            lhs == rhs
        }
    }
}

/// H = [[1,1],[1,-1]] / sqrt2.
pub fn hadamard() -> Matrix {
    let h = FieldElem::sqrt2().inv().expect("nonzero");
    Matrix::from_ints(&[&[1, 1], &[1, -1]]).scale(&h)
}

pub fn is_matchgate_hat(f: &Sig4) -> bool {
    is_matchgate(&f.as_signature().transform(&hadamard()))
}

/// Local affine test: every support-indexed zeta8 translate is affine.
pub fn is_local_affine(f: &Signature) -> bool {
    let n = f.arity();
    f.support().into_iter().all(|sigma| {
        let t = f.map_values(|idx, v| {
            let dot = (0..n).filter(|&k| bit(sigma, k, n) == 1 && bit(idx, k, n) == 1).count();
            v * &zeta8_pow(dot as i64)
        });
        is_affine(&t).is_some()
    })
}

/// Rotation k in 0..4 under which f is redundant with a nonsingular compressed matrix.
pub fn is_redundant_nonsingular(f: &Sig4) -> Option<usize> {
    (0..4).find(|&k| {
        let m = f.rotate(k as i64).matrix();
        let rows_eq = (0..4).all(|c| m[(1, c)] == m[(2, c)]);
        let cols_eq = (0..4).all(|r| m[(r, 1)] == m[(r, 2)]);
        if !rows_eq || !cols_eq {
            return false;
        }
        let idx = [0usize, 1, 3];
        let compressed =
            Matrix::from_rows(idx.iter().map(|&r| idx.iter().map(|&c| m[(r, c)].clone()).collect()).collect());
        !compressed.det().is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(s: &str) -> FieldElem {
        s.parse().unwrap()
    }

    fn ev(a: &str, b: &str, c: &str, d: &str, w: &str, x: &str, y: &str, z: &str) -> Sig4 {
        Sig4::eight_vertex(fe(a), fe(b), fe(c), fe(d), fe(w), fe(x), fe(y), fe(z))
    }

    #[test]
    fn crossover_matrices() {
        let s = Sig4::crossover();
        // S is the indicator of x1 = x3 and x2 = x4
        for idx in 0..16 {
            let want = bit(idx, 0, 4) == bit(idx, 2, 4) && bit(idx, 1, 4) == bit(idx, 3, 4);
            assert_eq!(s.get(idx).is_one(), want);
        }
        let sp = Sig4::crossover_neq();
        for idx in 0..16 {
            let want = bit(idx, 0, 4) != bit(idx, 2, 4) && bit(idx, 1, 4) != bit(idx, 3, 4);
            assert_eq!(sp.get(idx).is_one(), want);
        }
        assert_eq!(s.matrix(), &sp.matrix() * &double_neq_matrix());
    }

    #[test]
    fn rotations_match_displayed_forms() {
        let f = ev("1", "2", "3", "5", "7", "11", "13", "17");
        let [a, b, c, d, w, x, y, z] = f.params().unwrap();
        let o = FieldElem::zero;
        let r1 = Matrix::from_rows(vec![
            vec![a.clone(), o(), o(), z.clone()],
            vec![o(), b.clone(), w.clone(), o()],
            vec![o(), d.clone(), y.clone(), o()],
            vec![c.clone(), o(), o(), x.clone()],
        ]);
        assert_eq!(f.rotate(1).matrix(), r1);
        let r2 = Matrix::from_rows(vec![
            vec![a.clone(), o(), o(), y.clone()],
            vec![o(), z.clone(), d.clone(), o()],
            vec![o(), w.clone(), c.clone(), o()],
            vec![b.clone(), o(), o(), x.clone()],
        ]);
        assert_eq!(f.rotate(2).matrix(), r2);
        let r3 = Matrix::from_rows(vec![
            vec![a.clone(), o(), o(), c.clone()],
            vec![o(), y.clone(), w.clone(), o()],
            vec![o(), d.clone(), b.clone(), o()],
            vec![z.clone(), o(), o(), x.clone()],
        ]);
        assert_eq!(f.rotate(3).matrix(), r3);
        assert_eq!(f.rotate(4), f);
    }

    #[test]
    fn affine_examples() {
        assert!(is_affine(&Signature::from_ints(&[1, 1, 1, -1])).is_some());
        let g = Signature::from_values(vec![fe("1"), fe("1"), fe("1"), fe("I")]).unwrap();
        assert!(is_affine(&g).is_none());
        assert!(is_affine(&Sig4::crossover_neq()).is_some());
        assert!(is_affine(&Signature::from_ints(&[1, 2, 0, 0])).is_none());
        assert!(is_affine(&Signature::from_ints(&[0, 0, 0, 0])).is_some());
        // support not affine
        assert!(is_affine(&Signature::from_ints(&[1, 1, 1, 0])).is_none());
    }

    #[test]
    fn affine_witness_reproduces_values() {
        let f = Signature::from_values(
            ["1", "I", "-1", "I", "0", "0", "0", "0"].iter().map(|s| fe(s)).collect(),
        )
        .unwrap();
        let form = is_affine(&f).unwrap();
        for i in 0..8 {
            assert_eq!(form.eval(i), *f.get(i));
        }
    }

    #[test]
    fn product_examples() {
        assert!(is_product(&ev("1", "0", "2", "0", "0", "1", "0", "1/2")).is_some());
        assert!(is_product(&ev("1", "0", "2", "0", "0", "1", "0", "1")).is_none());
        assert!(is_product(&Signature::from_ints(&[1, 2, 3, 6])).is_some());
        assert!(is_product(&Signature::named("EQ4").unwrap()).is_some());
        assert!(is_product(&Sig4::crossover()).is_some());
        assert!(is_product(&Signature::from_ints(&[1, 1, 1, 0])).is_none());
    }

    #[test]
    fn matchgate_examples() {
        assert!(is_matchgate(&Signature::named("NEQ2").unwrap()));
        assert!(is_matchgate(&ev("1", "1", "1", "1", "1", "1", "1", "1")));
        assert!(!is_matchgate(&ev("1", "2", "3", "1", "1", "1", "1", "1")));
        assert!(!is_matchgate(&Signature::from_ints(&[1, 1, 0, 0])));
    }

    #[test]
    fn matchgate_hat_examples() {
        assert!(is_matchgate_hat(&ev("0", "0", "3", "5", "5", "0", "0", "3")));
        assert!(is_matchgate_hat(&ev("0", "0", "3", "5", "-5", "0", "0", "-3")));
        assert!(!is_matchgate_hat(&ev("0", "0", "3", "0", "0", "0", "0", "4")));
    }

    #[test]
    fn local_affine_examples() {
        assert!(is_local_affine(&Signature::from_ints(&[0; 16])));
        assert!(is_local_affine(&Signature::named("EQ4").unwrap()));
        let mut v = vec![0i64; 16];
        v[0] = 1;
        v[3] = 2;
        assert!(!is_local_affine(&Signature::from_ints(&v)));
    }

    #[test]
    fn redundant_examples() {
        let f = Sig4::symmetric(&fe("1"), &fe("2"), &fe("1"), &fe("1"));
        assert_eq!(is_redundant_nonsingular(&f), Some(0));
        let g = Sig4::symmetric(&fe("-2"), &fe("-2"), &fe("6"), &fe("6"));
        assert_eq!(is_redundant_nonsingular(&g), None);
        let h = Sig4::from_ints(&(1..=16).collect::<Vec<_>>());
        assert_eq!(is_redundant_nonsingular(&h), None);
    }

    #[test]
    fn parity_and_support() {
        let eq4 = Signature::named("EQ4").unwrap();
        assert_eq!(eq4.support(), vec![0, 15]);
        assert_eq!(eq4.parity(), Parity::Even);
        assert_eq!(Signature::named("NEQ2").unwrap().parity(), Parity::Odd);
        assert_eq!(Signature::from_ints(&[1, 1, 0, 0]).parity(), Parity::Mixed);
        assert_eq!(Signature::from_ints(&[0, 0, 0, 0]).parity(), Parity::Even);
    }

    #[test]
    fn literal_parsing() {
        let s: Signature = "[1, 1/2*I, 0, R2]".parse().unwrap();
        assert_eq!(s.arity(), 2);
        assert_eq!(s.get(3), &FieldElem::sqrt2());
        let t: Signature = s.to_string().parse().unwrap();
        assert_eq!(s, t);
        assert_eq!("NEQ2".parse::<Signature>().unwrap(), Sig2::neq().into_signature());
        assert!("[1,2,3]".parse::<Signature>().is_err());
    }
}
