//! Matrices over Z[ζ_N] and K-valued operators built from them.
//!
//! Every operator in this crate is a K-scalar times a matrix whose entries are
//! sums of roots of unity, so products run in machine integers and only the
//! scalar parts use arbitrary-precision rationals.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::lcm;
use crate::cyclo::{field, CycField, CycNum};
use crate::error::{Error, Result};

/// Monomial matrix: row `i` has the single entry ζ_order^{phase[i]} in column `col[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub order: u64,
    pub col: Vec<usize>,
    pub phase: Vec<u64>,
}

impl Monomial {
    pub fn identity(order: u64, dim: usize) -> Monomial {
        Monomial {
            order,
            col: (0..dim).collect(),
            phase: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.col.len()
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.order, other.order);
        let col = self.col.iter().map(|&k| other.col[k]).collect();
        let phase = self
            .col
            .iter()
            .zip(&self.phase)
            .map(|(&k, &a)| (a + other.phase[k]) % self.order)
            .collect();
        Monomial {
            order: self.order,
            col,
            phase,
        }
    }

    pub fn inverse(&self) -> Monomial {
        let d = self.dim();
        let mut col = vec![0; d];
        let mut phase = vec![0; d];
        for i in 0..d {
            col[self.col[i]] = i;
            phase[self.col[i]] = (self.order - self.phase[i] % self.order) % self.order;
        }
        Monomial {
            order: self.order,
            col,
            phase,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.col.iter().enumerate().all(|(i, &c)| c == i) && self.phase.iter().all(|&a| a == 0)
    }

    pub fn trace(&self) -> CycNum {
        CycNum::from_exponents(
            self.order,
            self.col
                .iter()
                .enumerate()
                .filter(|(i, c)| i == *c)
                .map(|(i, _)| (self.phase[i] as i64, 1)),
        )
    }

    pub fn to_zmat(&self) -> ZMat {
        let d = self.dim();
        let mut m = ZMat::zeros(self.order, d, d);
        for i in 0..d {
            m.set_root(i, self.col[i], self.phase[i] as i64);
        }
        m
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Monomial) -> Monomial {
        let order = lcm(self.order, other.order);
        let (sa, sb) = (order / self.order, order / other.order);
        let d = self.dim();
        let mut col = self.col.clone();
        col.extend(other.col.iter().map(|c| c + d));
        let mut phase: Vec<u64> = self.phase.iter().map(|a| a * sa).collect();
        phase.extend(other.phase.iter().map(|a| a * sb));
        Monomial { order, col, phase }
    }

    /// Kronecker product; rows are indexed by (i, j) ↦ i·dim(other) + j.
    pub fn kron(&self, other: &Monomial) -> Monomial {
        let order = lcm(self.order, other.order);
        let (sa, sb) = (order / self.order, order / other.order);
        let db = other.dim();
        let mut col = Vec::with_capacity(self.dim() * db);
        let mut phase = Vec::with_capacity(self.dim() * db);
        for i in 0..self.dim() {
            for j in 0..db {
                col.push(self.col[i] * db + other.col[j]);
                phase.push((self.phase[i] * sa + other.phase[j] * sb) % order);
            }
        }
        Monomial { order, col, phase }
    }
}

/// Dense matrix with entries in Z[ζ_N], stored as power-basis integer coordinates.
#[derive(Clone)]
pub struct ZMat {
    field: Arc<CycField>,
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl ZMat {
    pub fn zeros(conductor: u64, rows: usize, cols: usize) -> ZMat {
        let field = field(conductor);
        let phi = field.degree();
        ZMat {
            field,
            rows,
            cols,
            data: vec![0; rows * cols * phi],
        }
    }

    pub fn identity(conductor: u64, dim: usize) -> ZMat {
        let mut m = ZMat::zeros(conductor, dim, dim);
        for i in 0..dim {
            m.set_root(i, i, 0);
        }
        m
    }

    pub fn conductor(&self) -> u64 {
        self.field.conductor()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn phi(&self) -> usize {
        self.field.degree()
    }

    fn slot(&self, i: usize, j: usize) -> &[i64] {
        let phi = self.phi();
        let o = (i * self.cols + j) * phi;
        &self.data[o..o + phi]
    }

    fn slot_mut(&mut self, i: usize, j: usize) -> &mut [i64] {
        let phi = self.phi();
        let o = (i * self.cols + j) * phi;
        &mut self.data[o..o + phi]
    }

    /// Add ζ^k to entry (i, j).
    pub fn add_root(&mut self, i: usize, j: usize, k: i64) {
        let f = self.field.clone();
        for (s, p) in self.slot_mut(i, j).iter_mut().zip(f.power(k)) {
            *s += p;
        }
    }

    pub fn set_root(&mut self, i: usize, j: usize, k: i64) {
        self.slot_mut(i, j).iter_mut().for_each(|s| *s = 0);
        self.add_root(i, j, k);
    }

    pub fn entry_is_zero(&self, i: usize, j: usize) -> bool {
        self.slot(i, j).iter().all(|&c| c == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    pub fn entry(&self, i: usize, j: usize) -> CycNum {
        CycNum::from_int_coeffs(self.conductor(), self.slot(i, j))
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: &CycNum) -> Result<()> {
        let v = v.lift(self.conductor())?;
        let c = v
            .int_coeffs()
            .ok_or_else(|| Error::Invalid(format!("entry {v} is not integral")))?;
        self.slot_mut(i, j).copy_from_slice(&c);
        Ok(())
    }

    /// First nonzero entry in row-major order.
    pub fn first_nonzero(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| !self.entry_is_zero(i, j))
    }

    fn mul_into(&self, a: &[i64], b: &[i64], acc: &mut [i64]) {
        for (x, &u) in a.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (y, &v) in b.iter().enumerate() {
                if v != 0 {
                    acc[x + y] += u * v;
                }
            }
        }
    }

    fn reduce_into(&self, acc: &[i64], out: &mut [i64]) {
        let phi = self.phi();
        for (k, &c) in acc.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if k < phi {
                out[k] += c;
            } else {
                for (o, &p) in out.iter_mut().zip(self.field.power(k as i64)) {
                    *o += c * p;
                }
            }
        }
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let (a, b) = ZMat::common(self, other);
        let phi = a.phi();
        let mut out = ZMat::zeros(a.conductor(), a.rows, b.cols);
        let mut acc = vec![0i64; 2 * phi - 1];
        for i in 0..a.rows {
            for j in 0..b.cols {
                acc.iter_mut().for_each(|x| *x = 0);
                let mut any = false;
                for k in 0..a.cols {
                    let x = a.slot(i, k);
                    if x.iter().all(|&c| c == 0) {
                        continue;
                    }
                    let y = b.slot(k, j);
                    if y.iter().all(|&c| c == 0) {
                        continue;
                    }
                    any = true;
                    a.mul_into(x, y, &mut acc);
                }
                if any {
                    let mut tmp = vec![0i64; phi];
                    a.reduce_into(&acc, &mut tmp);
                    out.slot_mut(i, j).copy_from_slice(&tmp);
                }
            }
        }
        out
    }

    /// Re-express over Z[ζ_m] for a multiple m of the conductor.
    pub fn lift(&self, m: u64) -> ZMat {
        let n = self.conductor();
        if m == n {
            return self.clone();
        }
        assert_eq!(m % n, 0, "lift target must be a multiple of the conductor");
        let scale = (m / n) as i64;
        let mut out = ZMat::zeros(m, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let src: Vec<i64> = self.slot(i, j).to_vec();
                for (k, &c) in src.iter().enumerate() {
                    if c != 0 {
                        let f = out.field.clone();
                        for (s, p) in out.slot_mut(i, j).iter_mut().zip(f.power(k as i64 * scale)) {
                            *s += c * p;
                        }
                    }
                }
            }
        }
        out
    }

    fn common(a: &ZMat, b: &ZMat) -> (ZMat, ZMat) {
        if a.conductor() == b.conductor() {
            return (a.clone(), b.clone());
        }
        let m = lcm(a.conductor(), b.conductor());
        (a.lift(m), b.lift(m))
    }

    fn shifted(&self, src: &[i64], shift: i64) -> Vec<i64> {
        let mut out = vec![0i64; self.phi()];
        for (t, &c) in src.iter().enumerate() {
            if c != 0 {
                for (o, &p) in out.iter_mut().zip(self.field.power(t as i64 + shift)) {
                    *o += c * p;
                }
            }
        }
        out
    }

    /// `mono · self`.
    pub fn left_monomial(&self, mono: &Monomial) -> ZMat {
        assert_eq!(mono.dim(), self.rows);
        let m = lcm(self.conductor(), mono.order);
        let src = self.lift(m);
        let scale = (m / mono.order) as i64;
        let mut out = ZMat::zeros(m, self.rows, self.cols);
        for i in 0..self.rows {
            let k = mono.col[i];
            let shift = mono.phase[i] as i64 * scale;
            for j in 0..self.cols {
                let v = src.shifted(src.slot(k, j), shift);
                out.slot_mut(i, j).copy_from_slice(&v);
            }
        }
        out
    }

    /// `self · mono`.
    pub fn right_monomial(&self, mono: &Monomial) -> ZMat {
        assert_eq!(mono.dim(), self.cols);
        let m = lcm(self.conductor(), mono.order);
        let src = self.lift(m);
        let scale = (m / mono.order) as i64;
        let mut out = ZMat::zeros(m, self.rows, self.cols);
        for k in 0..self.cols {
            let j = mono.col[k];
            let shift = mono.phase[k] as i64 * scale;
            for i in 0..self.rows {
                let v = src.shifted(src.slot(i, k), shift);
                out.slot_mut(i, j).copy_from_slice(&v);
            }
        }
        out
    }

    pub fn kron(&self, other: &ZMat) -> ZMat {
        let (a, b) = ZMat::common(self, other);
        let mut out = ZMat::zeros(a.conductor(), a.rows * b.rows, a.cols * b.cols);
        for i in 0..a.rows {
            for k in 0..a.cols {
                if a.entry_is_zero(i, k) {
                    continue;
                }
                let x = a.entry(i, k);
                for j in 0..b.rows {
                    for l in 0..b.cols {
                        if b.entry_is_zero(j, l) {
                            continue;
                        }
                        let v = &x * &b.entry(j, l);
                        out.set_entry(i * b.rows + j, k * b.cols + l, &v).unwrap();
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> CycNum {
        let mut t = CycNum::zero(self.conductor());
        for i in 0..self.rows.min(self.cols) {
            t = &t + &self.entry(i, i);
        }
        t
    }

    /// Column `j` as a vector of entries.
    pub fn column(&self, j: usize) -> Vec<CycNum> {
        (0..self.rows).map(|i| self.entry(i, j)).collect()
    }

    /// Whether `self = c · other` for some scalar c, decided by integral
    /// cross-multiplication against a pivot entry of `other`. Returns the pivot.
    pub fn proportional_pivot(&self, other: &ZMat) -> Option<(usize, usize)> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        let (a, b) = ZMat::common(self, other);
        let (k, l) = match b.first_nonzero() {
            Some(p) => p,
            None => return if a.is_zero() { Some((0, 0)) } else { None },
        };
        let phi = a.phi();
        let a_kl = a.slot(k, l).to_vec();
        let b_kl = b.slot(k, l).to_vec();
        let mut lhs_acc = vec![0i64; 2 * phi - 1];
        let mut rhs_acc = vec![0i64; 2 * phi - 1];
        for i in 0..a.rows {
            for j in 0..a.cols {
                lhs_acc.iter_mut().for_each(|x| *x = 0);
                rhs_acc.iter_mut().for_each(|x| *x = 0);
                a.mul_into(a.slot(i, j), &b_kl, &mut lhs_acc);
                a.mul_into(&a_kl, b.slot(i, j), &mut rhs_acc);
                let mut l1 = vec![0i64; phi];
                let mut r1 = vec![0i64; phi];
                a.reduce_into(&lhs_acc, &mut l1);
                a.reduce_into(&rhs_acc, &mut r1);
                if l1 != r1 {
                    return None;
                }
            }
        }
        Some((k, l))
    }

    /// Scalar c with `self = c · other`, if one exists (`other` nonzero).
    pub fn ratio_to(&self, other: &ZMat) -> Option<CycNum> {
        let (k, l) = self.proportional_pivot(other)?;
        if other.entry_is_zero(k, l) {
            return None;
        }
        self.entry(k, l).checked_div(&other.entry(k, l)).ok()
    }

    pub fn to_entries(&self) -> Vec<Vec<CycNum>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

impl PartialEq for ZMat {
    fn eq(&self, other: &ZMat) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let (a, b) = ZMat::common(self, other);
        a.data == b.data
    }
}

impl Eq for ZMat {}

impl std::fmt::Debug for ZMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ZMat[{}] {}x{}", self.conductor(), self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.entry(i, j).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A K-valued matrix written as `scalar · mat` with `mat` integral.
#[derive(Clone, Debug)]
pub struct ScaledMat {
    pub scalar: CycNum,
    pub mat: ZMat,
}

impl ScaledMat {
    pub fn new(scalar: CycNum, mat: ZMat) -> ScaledMat {
        ScaledMat { scalar, mat }
    }

    pub fn identity(conductor: u64, dim: usize) -> ScaledMat {
        ScaledMat::new(CycNum::one(1), ZMat::identity(conductor, dim))
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn mul(&self, other: &ScaledMat) -> ScaledMat {
        ScaledMat::new(&self.scalar * &other.scalar, self.mat.mul(&other.mat))
    }

    pub fn left_monomial(&self, m: &Monomial) -> ScaledMat {
        ScaledMat::new(self.scalar.clone(), self.mat.left_monomial(m))
    }

    pub fn right_monomial(&self, m: &Monomial) -> ScaledMat {
        ScaledMat::new(self.scalar.clone(), self.mat.right_monomial(m))
    }

    pub fn scaled(&self, c: &CycNum) -> ScaledMat {
        ScaledMat::new(&self.scalar * c, self.mat.clone())
    }

    pub fn kron(&self, other: &ScaledMat) -> ScaledMat {
        ScaledMat::new(&self.scalar * &other.scalar, self.mat.kron(&other.mat))
    }

    pub fn entry(&self, i: usize, j: usize) -> CycNum {
        &self.scalar * &self.mat.entry(i, j)
    }

    pub fn trace(&self) -> CycNum {
        &self.scalar * &self.mat.trace()
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.is_zero() || self.mat.is_zero()
    }

    pub fn to_entries(&self) -> Vec<Vec<CycNum>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows() == self.cols()
            && *self == ScaledMat::identity(self.mat.conductor(), self.rows())
    }
}

/// Exact entrywise equality of the represented K-matrices.
impl PartialEq for ScaledMat {
    fn eq(&self, other: &ScaledMat) -> bool {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return false;
        }
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        match self.mat.proportional_pivot(&other.mat) {
            Some((k, l)) => self.entry(k, l) == other.entry(k, l),
            None => false,
        }
    }
}

/// Dense K-matrix serialization: rows of CycNum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseMatrix(pub Vec<Vec<CycNum>>);

impl From<&ScaledMat> for DenseMatrix {
    fn from(m: &ScaledMat) -> DenseMatrix {
        DenseMatrix(m.to_entries())
    }
}

impl From<&ZMat> for DenseMatrix {
    fn from(m: &ZMat) -> DenseMatrix {
        DenseMatrix(m.to_entries())
    }
}

impl From<&Monomial> for DenseMatrix {
    fn from(m: &Monomial) -> DenseMatrix {
        DenseMatrix(m.to_zmat().to_entries())
    }
}
