//! Multiplicative relation lattices, conformal lattice interpolation,
//! Möbius orbits of the unit circle and the unit-circle root condition.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{mag_phase, FieldElem, FieldError, Value, APPROX_EPS};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("x and y must have the same length")]
    LengthMismatch,
    #[error("L_x is not contained in L_y")]
    NotConformal,
    #[error("interpolation system is rank deficient")]
    RankDeficient,
    #[error("need {needed} samples, got {got}")]
    MissingSamples { needed: usize, got: usize },
    #[error("interpolation nodes are not pairwise distinct")]
    DuplicateNodes,
    #[error("orbit hit the pole of the map")]
    PoleHit,
    #[error("Möbius map is degenerate (ad - bc = 0)")]
    Degenerate,
    #[error("leading or trailing coefficient is zero")]
    ZeroLeadingCoefficient,
}

/// Row basis of L_x in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    pub k: usize,
    pub rows: Vec<Vec<BigInt>>,
}

impl LatticeBasis {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Membership of an integer vector, by solving against the echelon rows.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        let mut r: Vec<BigInt> = v.to_vec();
        for row in &self.rows {
            let p = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            let (q, rem) = r[p].div_rem(&row[p]);
            if !rem.is_zero() {
                return false;
            }
            for (a, b) in r.iter_mut().zip(row) {
                *a -= &q * b;
            }
        }
        r.iter().all(|x| x.is_zero())
    }
}

/// prod x_i^v_i with 0^0 = 1; None when a zero is raised to a nonzero power.
pub fn monomial(xs: &[FieldElem], v: &[BigInt]) -> Option<FieldElem> {
    let mut acc = FieldElem::one();
    for (x, e) in xs.iter().zip(v) {
        if e.is_zero() {
            continue;
        }
        if x.is_zero() {
            return None;
        }
        let e = e.to_i64().expect("exponent fits in i64");
        acc = &acc * &x.pow(e).expect("nonzero base");
    }
    Some(acc)
}

/// Row-style Hermite normal form; zero rows dropped.
pub fn hnf(mut rows: Vec<Vec<BigInt>>, k: usize) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut r = 0;
    for col in 0..k {
        // gcd-combine all rows at or below r into one pivot row for this column
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).expect("nonempty");
            for &i in &nz {
                if i == piv {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[piv][col]);
                let pr = rows[piv].clone();
                for (a, b) in rows[i].iter_mut().zip(&pr) {
                    *a -= &q * b;
                }
            }
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        if rows[r][col].is_negative() {
            for a in rows[r].iter_mut() {
                *a = -a.clone();
            }
        }
        // reduce the rows above
        let pr = rows[r].clone();
        for row in rows.iter_mut().take(r) {
            let q = row[col].div_floor(&pr[col]);
            if !q.is_zero() {
                for (a, b) in row.iter_mut().zip(&pr) {
                    *a -= &q * b;
                }
            }
        }
        r += 1;
    }
    for row in rows.into_iter().take(r) {
        if row.iter().any(|x| !x.is_zero()) {
            out.push(row);
        }
    }
    out
}

/// Basis of the integer kernel {v : A v = 0} by unimodular column operations.
pub fn integer_kernel(a: &[Vec<BigInt>], k: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = a.to_vec();
    // u holds the column operations; column j of u is a vector in Z^k
    let mut u: Vec<Vec<BigInt>> = (0..k).map(|i| (0..k).map(|j| BigInt::from((i == j) as i64)).collect()).collect();
    let col_op = |m: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for row in m.iter_mut() {
            let s = row[src].clone();
            row[dst] -= q * s;
        }
    };
    let swap_cols = |m: &mut Vec<Vec<BigInt>>, x: usize, y: usize| {
        for row in m.iter_mut() {
            row.swap(x, y);
        }
    };
    let mut p = 0;
    for i in 0..a.len() {
        if p >= k {
            break;
        }
        loop {
            let nz: Vec<usize> = (p..k).filter(|&j| !a[i][j].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    swap_cols(&mut a, p, j);
                    swap_cols(&mut u, p, j);
                    p += 1;
                }
                break;
            }
            let piv = *nz.iter().min_by_key(|&&j| a[i][j].abs()).expect("nonempty");
            for &j in &nz {
                if j != piv {
                    let q = a[i][j].div_floor(&a[i][piv]);
                    col_op(&mut a, j, piv, &q);
                    col_op(&mut u, j, piv, &q);
                }
            }
        }
    }
    (p..k).map(|j| (0..k).map(|i| u[i][j].clone()).collect()).collect()
}

/// L_x = {j : prod x_i^j_i = 1}: magnitude kernel intersected with the phase congruence mod 8.
pub fn lattice_basis(xs: &[FieldElem]) -> Result<LatticeBasis, LatticeError> {
    let k = xs.len();
    let mut primes: Vec<num_bigint::BigUint> = Vec::new();
    let mut exps: Vec<HashMap<usize, i64>> = Vec::new();
    let mut phases = vec![0i64; k];
    let mut zero_rows = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if x.is_zero() {
            let mut row = vec![BigInt::zero(); k];
            row[i] = BigInt::one();
            zero_rows.push(row);
            continue;
        }
        let mp = mag_phase(x)?;
        phases[i] = (mp.phase16 / 2) as i64;
        for (p, e) in mp.twice_exponents {
            let idx = match primes.iter().position(|q| *q == p) {
                Some(idx) => idx,
                None => {
                    primes.push(p);
                    exps.push(HashMap::new());
                    primes.len() - 1
                }
            };
            exps[idx].insert(i, e);
        }
    }
    let mut a: Vec<Vec<BigInt>> =
        exps.iter().map(|m| (0..k).map(|i| BigInt::from(*m.get(&i).unwrap_or(&0))).collect()).collect();
    a.extend(zero_rows);
    let kernel = integer_kernel(&a, k);
    // phase congruence on kernel coordinates: sum c_t g_t = 0 mod 8
    let r = kernel.len();
    let g: Vec<BigInt> = kernel
        .iter()
        .map(|v| v.iter().zip(&phases).map(|(a, p)| a * BigInt::from(*p)).sum::<BigInt>().mod_floor(&BigInt::from(8)))
        .collect();
    let mut cong = g.clone();
    cong.push(BigInt::from(8));
    let coeffs = integer_kernel(&[cong], r + 1);
    let gens: Vec<Vec<BigInt>> = coeffs
        .iter()
        .map(|c| (0..k).map(|col| (0..r).map(|t| &c[t] * &kernel[t][col]).sum::<BigInt>()).collect())
        .collect();
    Ok(LatticeBasis { k, rows: hnf(gens, k) })
}

/// L_x subset of L_y: every basis row of L_x is a relation of y.
pub fn lattice_subset(xs: &[FieldElem], ys: &[FieldElem]) -> Result<bool, LatticeError> {
    if xs.len() != ys.len() {
        return Err(LatticeError::LengthMismatch);
    }
    let basis = lattice_basis(xs)?;
    Ok(basis.rows.iter().all(|v| monomial(ys, v).is_some_and(|m| m.is_one())))
}

/// Exponent tuples j >= 0 with |j| <= m, in lexicographic order.
pub fn simplex(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..=left {
            cur.push(j);
            rec(k, left - j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, m, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// N_l(x) = sum_{j in C} (x^j)^l z_j with samples for l = 1..C(m+k, k).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationSystem {
    pub m: usize,
    pub xs: Vec<FieldElem>,
    pub ys: Vec<FieldElem>,
    pub samples: Vec<FieldElem>,
}

impl InterpolationSystem {
    /// Forward-generate the samples from chosen coefficients z_j (simplex order).
    pub fn forward(m: usize, xs: Vec<FieldElem>, ys: Vec<FieldElem>, z: &[FieldElem]) -> InterpolationSystem {
        let cells = simplex(xs.len(), m);
        assert_eq!(cells.len(), z.len(), "one coefficient per simplex cell");
        let vals: Vec<FieldElem> = cells.iter().map(|j| pow_tuple(&xs, j)).collect();
        let samples = (1..=cells.len())
            .map(|l| {
                vals.iter().zip(z).fold(FieldElem::zero(), |acc, (v, zj)| {
                    &acc + &(&v.pow(l as i64).expect("positive power") * zj)
                })
            })
            .collect();
        InterpolationSystem { m, xs, ys, samples }
    }

    pub fn coset_count(&self) -> usize {
        let cells = simplex(self.xs.len(), self.m);
        let mut seen: Vec<FieldElem> = Vec::new();
        for j in &cells {
            let v = pow_tuple(&self.xs, j);
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen.len()
    }
}

fn pow_tuple(xs: &[FieldElem], j: &[usize]) -> FieldElem {
    xs.iter().zip(j).fold(FieldElem::one(), |acc, (x, &e)| &acc * &x.pow(e as i64).expect("nonnegative power"))
}

/// Direct evaluation of N_1 at y from known coefficients.
pub fn evaluate_at(m: usize, ys: &[FieldElem], z: &[FieldElem]) -> FieldElem {
    simplex(ys.len(), m).iter().zip(z).fold(FieldElem::zero(), |acc, (j, zj)| &acc + &(&pow_tuple(ys, j) * zj))
}

/// Recover N_1(y): collapse identical columns (cosets of L_x), solve the
/// Vandermonde system for the coset sums, re-expand with y-monomials.
pub fn conformal_interpolate(sys: &InterpolationSystem) -> Result<FieldElem, LatticeError> {
    if sys.xs.len() != sys.ys.len() {
        return Err(LatticeError::LengthMismatch);
    }
    let k = sys.xs.len();
    let needed = binomial(sys.m + k, k);
    if sys.samples.len() < needed {
        return Err(LatticeError::MissingSamples { needed, got: sys.samples.len() });
    }
    let cells = simplex(k, sys.m);
    // coset value x_T -> y_T
    let mut nodes: Vec<FieldElem> = Vec::new();
    let mut yvals: Vec<FieldElem> = Vec::new();
    for j in &cells {
        let xv = pow_tuple(&sys.xs, j);
        let yv = pow_tuple(&sys.ys, j);
        match nodes.iter().position(|n| *n == xv) {
            Some(t) if yvals[t] != yv => return Err(LatticeError::NotConformal),
            Some(_) => {}
            None => {
                nodes.push(xv);
                yvals.push(yv);
            }
        }
    }
    // a zero node never shows up in N_l; its coset must vanish at y too
    let mut result = FieldElem::zero();
    if let Some(t) = nodes.iter().position(|n| n.is_zero()) {
        if !yvals[t].is_zero() {
            return Err(LatticeError::RankDeficient);
        }
        nodes.remove(t);
        yvals.remove(t);
    }
    let g = nodes.len();
    if g == 0 {
        return Ok(result);
    }
    let rows: Vec<Vec<FieldElem>> =
        (1..=g).map(|l| nodes.iter().map(|x| x.pow(l as i64).expect("positive power")).collect()).collect();
    let sums = Matrix::from_rows(rows).solve(&sys.samples[..g]).map_err(|_| LatticeError::RankDeficient)?;
    for (y, s) in yvals.iter().zip(&sums) {
        result = &result + &(y * s);
    }
    Ok(result)
}

/// Coefficients c with sum_j c_j node_i^j = value_i.
pub fn vandermonde_solve(values: &[FieldElem], nodes: &[FieldElem]) -> Result<Vec<FieldElem>, LatticeError> {
    assert_eq!(values.len(), nodes.len());
    for i in 0..nodes.len() {
        if nodes[i + 1..].contains(&nodes[i]) {
            return Err(LatticeError::DuplicateNodes);
        }
    }
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    let rows = nodes.iter().map(|t| (0..nodes.len()).map(|j| t.pow(j as i64).expect("nonnegative")).collect()).collect();
    Matrix::from_rows(rows).solve(values).map_err(|_| LatticeError::DuplicateNodes)
}

/// z -> (a z + b) / (c z + d).
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusMap {
    pub a: Value,
    pub b: Value,
    pub c: Value,
    pub d: Value,
}

impl MobiusMap {
    pub fn new(a: Value, b: Value, c: Value, d: Value) -> Result<MobiusMap, LatticeError> {
        let m = MobiusMap { a, b, c, d };
        if m.det()?.is_zero() {
            return Err(LatticeError::Degenerate);
        }
        Ok(m)
    }

    /// e^{i theta} (z + lambda) / (1 + conj(lambda) z), given phase = e^{i theta}.
    pub fn unit_circle_form(phase: Value, lambda: Value) -> Result<MobiusMap, LatticeError> {
        let one = match &phase {
            Value::Exact(_) => Value::Exact(FieldElem::one()),
            Value::Approx(_) => Value::Approx(Complex64::new(1.0, 0.0)),
        };
        let b = phase.mul(&lambda)?;
        MobiusMap::new(phase, b, lambda.conj(), one)
    }

    pub fn det(&self) -> Result<Value, LatticeError> {
        Ok(self.a.mul(&self.d)?.sub(&self.b.mul(&self.c)?)?)
    }

    pub fn apply(&self, z: &Value) -> Result<Value, LatticeError> {
        let den = self.c.mul(z)?.add(&self.d)?;
        if den.is_zero() {
            return Err(LatticeError::PoleHit);
        }
        Ok(self.a.mul(z)?.add(&self.b)?.div(&den)?)
    }

    pub fn compose(&self, o: &MobiusMap) -> Result<MobiusMap, LatticeError> {
        let mul = |p: &Value, q: &Value, r: &Value, s: &Value| -> Result<Value, LatticeError> {
            Ok(p.mul(q)?.add(&r.mul(s)?)?)
        };
        Ok(MobiusMap {
            a: mul(&self.a, &o.a, &self.b, &o.c)?,
            b: mul(&self.a, &o.b, &self.b, &o.d)?,
            c: mul(&self.c, &o.a, &self.d, &o.c)?,
            d: mul(&self.c, &o.b, &self.d, &o.d)?,
        })
    }

    fn is_scalar(&self) -> Result<bool, LatticeError> {
        Ok(self.b.is_zero() && self.c.is_zero() && self.a.same(&self.d)?)
    }

    /// Smallest k <= max with the k-th power a scalar matrix.
    pub fn projective_order(&self, max: usize) -> Result<Option<usize>, LatticeError> {
        let mut p = self.clone();
        for k in 1..=max {
            if p.is_scalar()? {
                return Ok(Some(k));
            }
            p = p.compose(self)?;
        }
        Ok(None)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport {
    pub values: Vec<Value>,
    pub all_distinct: bool,
    pub all_on_circle: bool,
    /// smallest p with psi^p(t0) = t0 among the computed iterates
    pub period: Option<usize>,
}

/// Iterates psi^k(t0) for k = 1..n.
pub fn mobius_orbit(map: &MobiusMap, t0: &Value, n: usize) -> Result<OrbitReport, LatticeError> {
    let mut values = Vec::with_capacity(n);
    let mut z = t0.clone();
    for _ in 0..n {
        z = map.apply(&z)?;
        values.push(z.clone());
    }
    let mut all_distinct = true;
    'outer: for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i].same(&values[j])? {
                all_distinct = false;
                break 'outer;
            }
        }
    }
    let all_on_circle = values.iter().all(|v| v.on_unit_circle());
    let mut period = None;
    for (k, v) in values.iter().enumerate() {
        if v.same(t0)? {
            period = Some(k + 1);
            break;
        }
    }
    Ok(OrbitReport { values, all_distinct, all_on_circle, period })
}

/// Necessary condition for all zeros of sum a_k z^k (coefficients listed from
/// the lowest power) to lie on the unit circle: a_k = mu conj(a_{N-k}) with |mu| = 1.
pub fn unit_circle_necessary(coeffs: &[FieldElem]) -> Result<bool, LatticeError> {
    let n = coeffs.len().checked_sub(1).ok_or(LatticeError::ZeroLeadingCoefficient)?;
    if coeffs[0].is_zero() || coeffs[n].is_zero() {
        return Err(LatticeError::ZeroLeadingCoefficient);
    }
    let mu = coeffs[0].try_div(&coeffs[n].conj())?;
    if !mu.is_unimodular() {
        return Ok(false);
    }
    Ok((0..=n).all(|k| coeffs[k] == &mu * &coeffs[n - k].conj()))
}

/// Numerical roots (Durand-Kerner), used to exhibit a zero off the circle.
pub fn approx_roots(coeffs: &[FieldElem]) -> Vec<Complex64> {
    let c: Vec<Complex64> = coeffs.iter().map(|x| x.to_complex()).collect();
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < APPROX_EPS * 1e-3 {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::zeta8_pow;

    fn q(n: i64) -> FieldElem {
        FieldElem::from_int(n)
    }

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn basis_examples() {
        let b = lattice_basis(&[q(1), q(1), q(-1)]).unwrap();
        assert_eq!(b.rows, vec![bi(&[1, 0, 0]), bi(&[0, 1, 0]), bi(&[0, 0, 2])]);
        assert_eq!(lattice_basis(&[q(2)]).unwrap().rank(), 0);
        assert_eq!(lattice_basis(&[zeta8_pow(1), FieldElem::i(), q(-1)]).unwrap().rank(), 3);
        // 2 and 4 are dependent; 1+i has magnitude 2^(1/2)
        let b = lattice_basis(&[q(2), q(4)]).unwrap();
        assert_eq!(b.rows, vec![bi(&[2, -1])]);
        let one_i = &q(1) + &FieldElem::i();
        let b = lattice_basis(&[one_i, q(2)]).unwrap();
        // (1+i)^8 = 16 -> (8, -4)
        assert_eq!(b.rows, vec![bi(&[8, -4])]);
        for row in &b.rows {
            assert!(monomial(&[&q(1) + &FieldElem::i(), q(2)], row).unwrap().is_one());
        }
    }

    #[test]
    fn zero_entries() {
        let b = lattice_basis(&[q(0), q(-1)]).unwrap();
        assert_eq!(b.rows, vec![bi(&[0, 2])]);
    }

    #[test]
    fn subset_examples() {
        assert!(lattice_subset(&[q(1), q(1), q(-1)], &[q(1), q(1), q(-1)]).unwrap());
        assert!(lattice_subset(&[q(2)], &[q(7)]).unwrap());
        assert!(!lattice_subset(&[q(1), q(1), q(-1)], &[q(1), q(1), FieldElem::i()]).unwrap());
    }

    #[test]
    fn interpolation_examples() {
        let z = [q(3), q(-1), q(2)];
        let sys = InterpolationSystem::forward(2, vec![q(2)], vec![q(3)], &z);
        assert_eq!(conformal_interpolate(&sys).unwrap(), evaluate_at(2, &[q(3)], &z));
        let sys = InterpolationSystem::forward(2, vec![q(2)], vec![q(2)], &z);
        assert_eq!(conformal_interpolate(&sys).unwrap(), sys.samples[0]);
        // x = -1 collapses even and odd exponents; y = 1 asks for the plain sum
        let sys = InterpolationSystem::forward(2, vec![q(-1)], vec![q(1)], &z);
        assert_eq!(sys.coset_count(), 2);
        assert_eq!(conformal_interpolate(&sys).unwrap(), q(4));
        // y = -2 would need to separate the collapsed columns
        let sys = InterpolationSystem::forward(2, vec![q(-1)], vec![q(-2)], &z);
        assert_eq!(conformal_interpolate(&sys), Err(LatticeError::NotConformal));
    }

    #[test]
    fn vandermonde_examples() {
        let nodes = [q(1), q(2), q(3)];
        let vals: Vec<FieldElem> = nodes.iter().map(|t| t * t).collect();
        assert_eq!(vandermonde_solve(&vals, &nodes).unwrap(), vec![q(0), q(0), q(1)]);
        assert_eq!(vandermonde_solve(&[q(5)], &[q(9)]).unwrap(), vec![q(5)]);
        assert_eq!(vandermonde_solve(&[q(1), q(2)], &[q(3), q(3)]), Err(LatticeError::DuplicateNodes));
    }

    #[test]
    fn mobius_examples() {
        let e = |x: FieldElem| Value::Exact(x);
        let psi = MobiusMap::unit_circle_form(e(q(1)), e(FieldElem::frac(1, 2))).unwrap();
        let rep = mobius_orbit(&psi, &e(FieldElem::i()), 10).unwrap();
        assert!(rep.all_on_circle && rep.all_distinct);
        let id = MobiusMap::unit_circle_form(e(q(1)), e(q(0))).unwrap();
        let rep = mobius_orbit(&id, &e(FieldElem::i()), 4).unwrap();
        assert!(rep.values.iter().all(|v| *v == e(FieldElem::i())));
        assert_eq!(rep.period, Some(1));
        let half_i = &FieldElem::i() * &FieldElem::frac(1, 2);
        let inv = MobiusMap::new(e(q(1)), e(half_i.clone()), e(half_i), e(q(-1))).unwrap();
        assert_eq!(inv.projective_order(10).unwrap(), Some(2));
        let rep = mobius_orbit(&inv, &e(q(3)), 6).unwrap();
        assert_eq!(rep.period, Some(2));
    }

    #[test]
    fn unit_circle_examples() {
        assert!(unit_circle_necessary(&[q(-1), q(0), q(1)]).unwrap());
        assert!(!unit_circle_necessary(&[q(-2), q(1)]).unwrap());
        assert!(unit_circle_necessary(&[q(1), q(1), q(1)]).unwrap());
        assert!(!unit_circle_necessary(&[q(-1), q(-1), q(1)]).unwrap());
        let roots = approx_roots(&[q(-1), q(-1), q(1)]);
        assert!(roots.iter().any(|r| (r.norm() - 1.0).abs() > 0.5));
        assert_eq!(unit_circle_necessary(&[q(0), q(1)]), Err(LatticeError::ZeroLeadingCoefficient));
    }
}
