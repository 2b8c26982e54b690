//! Exact arithmetic in cyclotomic fields Q(ζ_N).
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(N)-1}` modulo the
//! cyclotomic polynomial Φ_N, as integer numerators over one positive common
//! denominator. Mixed-conductor operations lift both operands to the lcm.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{gcd, is_prime, lcm};
use crate::error::{Error, Result};

/// Precomputed data for Q(ζ_N).
#[derive(Debug)]
pub struct CycField {
    conductor: u64,
    phi: usize,
    /// Φ_N, lowest degree first, monic.
    poly: Vec<i64>,
    /// Power-basis coordinates of ζ^k for 0 <= k < N.
    powers: Vec<Vec<i64>>,
}

impl CycField {
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn degree(&self) -> usize {
        self.phi
    }

    pub fn minimal_polynomial(&self) -> &[i64] {
        &self.poly
    }

    /// Coordinates of ζ^k (k taken mod N).
    pub fn power(&self, k: i64) -> &[i64] {
        &self.powers[k.rem_euclid(self.conductor as i64) as usize]
    }

    fn build(n: u64) -> CycField {
        let poly = cyclotomic_polynomial(n);
        let phi = poly.len() - 1;
        let mut powers = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        if phi > 0 {
            cur[0] = 1;
        }
        for _ in 0..n {
            powers.push(cur.clone());
            // multiply by ζ and reduce x^phi = -sum poly[i] x^i
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for (i, c) in cur.iter_mut().enumerate() {
                    *c -= top * poly[i];
                }
            }
        }
        CycField {
            conductor: n,
            phi,
            poly,
            powers,
        }
    }
}

/// Shared, lazily built table of cyclotomic fields.
pub fn field(n: u64) -> Arc<CycField> {
    assert!(n >= 1, "conductor must be positive");
    static FIELDS: OnceLock<Mutex<HashMap<u64, Arc<CycField>>>> = OnceLock::new();
    let table = FIELDS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = table.lock().unwrap().get(&n) {
        return f.clone();
    }
    let built = Arc::new(CycField::build(n));
    table.lock().unwrap().entry(n).or_insert(built).clone()
}

/// Φ_n by exact division of x^n - 1 by Φ_d for the proper divisors d of n.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    static POLYS: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    let table = POLYS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = table.lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = exact_div_monic(&num, &cyclotomic_polynomial(d));
        }
    }
    table.lock().unwrap().insert(n, num.clone());
    num
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let nn = num.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i64; nn - dn + 1];
    for i in (0..=nn - dn).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    q
}

/// An element of Q(ζ_N).
#[derive(Clone)]
pub struct CycNum {
    field: Arc<CycField>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycNum {
    pub fn zero(n: u64) -> CycNum {
        let field = field(n);
        let num = vec![BigInt::zero(); field.phi];
        CycNum {
            field,
            num,
            den: BigInt::one(),
        }
    }

    pub fn one(n: u64) -> CycNum {
        CycNum::from_integer(n, 1)
    }

    pub fn from_integer(n: u64, v: i64) -> CycNum {
        CycNum::from_rational(n, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(n: u64, v: BigRational) -> CycNum {
        let mut z = CycNum::zero(n);
        z.num[0] = v.numer().clone();
        z.den = v.denom().clone();
        z.normalized()
    }

    /// Integer coordinates in the power basis.
    pub fn from_int_coeffs(n: u64, coeffs: &[i64]) -> CycNum {
        let field = field(n);
        assert_eq!(
            coeffs.len(),
            field.phi,
            "coefficient vector has wrong length"
        );
        CycNum {
            field,
            num: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }

    /// Rational coordinates in the power basis (length must be φ(N)).
    pub fn from_coeffs(n: u64, coeffs: &[BigRational]) -> Result<CycNum> {
        let field = field(n);
        if coeffs.len() != field.phi {
            return Err(Error::Invalid(format!(
                "conductor {n} needs {} coefficients, got {}",
                field.phi,
                coeffs.len()
            )));
        }
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Ok(CycNum { field, num, den }.normalized())
    }

    /// Σ_k coeff_k ζ_N^{exp_k}.
    pub fn from_exponents<I>(n: u64, terms: I) -> CycNum
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let field = field(n);
        let mut acc = vec![0i64; field.phi];
        for (e, c) in terms {
            if c == 0 {
                continue;
            }
            for (a, p) in acc.iter_mut().zip(field.power(e)) {
                *a += c * p;
            }
        }
        CycNum {
            field,
            num: acc.into_iter().map(BigInt::from).collect(),
            den: BigInt::one(),
        }
    }

    pub fn conductor(&self) -> u64 {
        self.field.conductor
    }

    pub fn field(&self) -> &Arc<CycField> {
        &self.field
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    /// Integer coordinates, if the element lies in Z[ζ_N].
    pub fn int_coeffs(&self) -> Option<Vec<i64>> {
        if !self.den.is_one() {
            return None;
        }
        self.num.iter().map(|c| c.to_i64()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn normalized(mut self) -> CycNum {
        if self.den.is_negative() {
            self.den = -self.den;
            for c in self.num.iter_mut() {
                *c = -c.clone();
            }
        }
        if self.is_zero() {
            self.den = BigInt::one();
            return self;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            self.den /= &g;
            for c in self.num.iter_mut() {
                *c /= &g;
            }
        }
        self
    }

    /// Reduce an exponent-indexed vector Σ e_k ζ^k into the power basis.
    fn reduce_exponent_vector(field: &Arc<CycField>, e: &[BigInt], den: BigInt) -> CycNum {
        let phi = field.phi;
        let n = field.conductor as usize;
        let mut out = vec![BigInt::zero(); phi];
        for (k, c) in e.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < phi {
                out[k] += c;
            } else {
                for (o, &p) in out.iter_mut().zip(&field.powers[k % n]) {
                    if p != 0 {
                        *o += c * p;
                    }
                }
            }
        }
        CycNum {
            field: field.clone(),
            num: out,
            den,
        }
        .normalized()
    }

    /// Re-express at conductor `m`, a multiple of the current conductor.
    pub fn lift(&self, m: u64) -> Result<CycNum> {
        let n = self.conductor();
        if m == n {
            return Ok(self.clone());
        }
        if m == 0 || m % n != 0 {
            return Err(Error::BadConductor {
                sub: n,
                conductor: m,
            });
        }
        let scale = (m / n) as usize;
        let target = field(m);
        let mut e = vec![BigInt::zero(); m as usize];
        for (j, c) in self.num.iter().enumerate() {
            e[(j * scale) % m as usize] += c;
        }
        Ok(CycNum::reduce_exponent_vector(
            &target,
            &e,
            self.den.clone(),
        ))
    }

    fn lift_pair(a: &CycNum, b: &CycNum) -> (CycNum, CycNum) {
        if a.conductor() == b.conductor() {
            return (a.clone(), b.clone());
        }
        let m = lcm(a.conductor(), b.conductor());
        (a.lift(m).unwrap(), b.lift(m).unwrap())
    }

    fn add_same(&self, other: &CycNum, sign: i8) -> CycNum {
        let num = if self.den == other.den {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(x, y)| if sign > 0 { x + y } else { x - y })
                .collect()
        } else {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(x, y)| {
                    let a = x * &other.den;
                    let b = y * &self.den;
                    if sign > 0 {
                        a + b
                    } else {
                        a - b
                    }
                })
                .collect()
        };
        let den = if self.den == other.den {
            self.den.clone()
        } else {
            &self.den * &other.den
        };
        CycNum {
            field: self.field.clone(),
            num,
            den,
        }
        .normalized()
    }

    fn mul_same(&self, other: &CycNum) -> CycNum {
        let phi = self.field.phi;
        let mut e = vec![BigInt::zero(); 2 * phi - 1];
        for (i, x) in self.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.num.iter().enumerate() {
                if !y.is_zero() {
                    e[i + j] += x * y;
                }
            }
        }
        CycNum::reduce_exponent_vector(&self.field, &e, &self.den * &other.den)
    }

    /// Multiply by ζ_N^k.
    pub fn mul_root(&self, k: i64) -> CycNum {
        let n = self.conductor() as i64;
        let phi = self.field.phi;
        let mut e = vec![BigInt::zero(); self.conductor() as usize];
        for (j, c) in self.num.iter().enumerate().take(phi) {
            e[(j as i64 + k).rem_euclid(n) as usize] += c;
        }
        CycNum::reduce_exponent_vector(&self.field, &e, self.den.clone())
    }

    /// self · ζ_n^k, lifting to a common conductor.
    pub fn mul_root_of(&self, n: u64, k: i64) -> CycNum {
        self * &root_of_unity(n, k)
    }

    pub fn scale(&self, r: &BigRational) -> CycNum {
        CycNum {
            field: self.field.clone(),
            num: self.num.iter().map(|c| c * r.numer()).collect(),
            den: &self.den * r.denom(),
        }
        .normalized()
    }

    pub fn checked_div(&self, other: &CycNum) -> Result<CycNum> {
        Ok(self * &other.inverse()?)
    }

    /// Multiplicative inverse, by solving a·x = 1 in the power basis.
    pub fn inverse(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(CycNum::from_rational(self.conductor(), r.recip()));
        }
        let phi = self.field.phi;
        let int_self = CycNum {
            field: self.field.clone(),
            num: self.num.clone(),
            den: BigInt::one(),
        };
        // columns: int_self * ζ^j
        let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); phi + 1]; phi];
        for j in 0..phi {
            let col = int_self.mul_root(j as i64);
            for (i, c) in col.num.iter().enumerate() {
                a[i][j] = BigRational::new(c.clone(), col.den.clone());
            }
        }
        a[0][phi] = BigRational::one();
        let x = solve_square(a).ok_or(Error::DivisionByZero)?;
        let x = CycNum::from_coeffs(self.conductor(), &x)?;
        Ok(x.scale(&BigRational::from_integer(self.den.clone())))
    }

    pub fn pow(&self, e: i64) -> Result<CycNum> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = CycNum::one(self.conductor());
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        Ok(acc)
    }

    /// The automorphism ζ ↦ ζ^k, for k coprime to the conductor.
    pub fn galois(&self, k: i64) -> CycNum {
        let n = self.conductor();
        debug_assert_eq!(gcd(k.rem_euclid(n as i64) as u64, n), 1);
        let mut e = vec![BigInt::zero(); n as usize];
        for (j, c) in self.num.iter().enumerate() {
            e[(j as i64 * k).rem_euclid(n as i64) as usize] += c;
        }
        CycNum::reduce_exponent_vector(&self.field, &e, self.den.clone())
    }

    /// ζ ↦ ζ^{-1}; complex conjugation under any embedding.
    pub fn conj(&self) -> CycNum {
        self.galois(-1)
    }

    /// Representation in Q(ζ_m) if the element lies there, `None` otherwise.
    ///
    /// Membership is decided by invariance under the Galois automorphisms
    /// σ_k with k ≡ 1 (mod m); coordinates are then recovered by a linear solve.
    pub fn descend(&self, m: u64) -> Result<Option<CycNum>> {
        if m == 0 {
            return Err(Error::BadConductor {
                sub: m,
                conductor: self.conductor(),
            });
        }
        let n = self.conductor();
        if n % m != 0 {
            return self.lift(lcm(n, m))?.descend(m);
        }
        if !self.fixed_by_all(&galois_stabilizer_of_subfield(n, m)) {
            return Ok(None);
        }
        let sub = field(m);
        let phi_m = sub.phi;
        let phi = self.field.phi;
        let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); phi_m + 1]; phi];
        for j in 0..phi_m {
            let b = CycNum::from_exponents(m, [(j as i64, 1)]).lift(n)?;
            for (i, c) in b.num.iter().enumerate() {
                a[i][j] = BigRational::from_integer(c.clone());
            }
        }
        for (i, c) in self.num.iter().enumerate() {
            a[i][phi_m] = BigRational::new(c.clone(), self.den.clone());
        }
        let x = solve_consistent(a, phi_m)
            .ok_or_else(|| Error::Defect("Galois-invariant element failed to descend".into()))?;
        Ok(Some(CycNum::from_coeffs(m, &x)?))
    }

    fn fixed_by_all(&self, ks: &[i64]) -> bool {
        ks.iter().all(|&k| k == 1 || &self.galois(k) == self)
    }

    /// Smallest conductor m | N such that the element lies in Q(ζ_m).
    pub fn min_conductor(&self) -> u64 {
        let n = self.conductor();
        for m in 1..=n {
            if n % m == 0 {
                if let Ok(Some(_)) = self.descend(m) {
                    return m;
                }
            }
        }
        n
    }

    /// Whether the element lies in the subfield generated over Q by `gens`.
    pub fn in_field_generated_by(&self, gens: &[CycNum]) -> bool {
        let n = gens
            .iter()
            .fold(self.conductor(), |acc, g| lcm(acc, g.conductor()));
        let me = self.lift(n).unwrap();
        let lifted: Vec<CycNum> = gens.iter().map(|g| g.lift(n).unwrap()).collect();
        (1..n as i64)
            .filter(|&k| gcd(k as u64, n) == 1)
            .filter(|&k| lifted.iter().all(|g| &g.galois(k) == g))
            .all(|k| me.galois(k) == me)
    }
}

/// A subfield of a cyclotomic field, prepared for repeated membership tests.
#[derive(Clone, Debug)]
pub struct Subfield {
    gens: Vec<CycNum>,
    conductor: u64,
    fixing: Vec<i64>,
}

impl Subfield {
    /// The subfield generated by `gens`, tested inside Q(ζ_conductor).
    pub fn generated_by(gens: &[CycNum], conductor: u64) -> Subfield {
        let n = gens
            .iter()
            .fold(conductor, |acc, g| lcm(acc, g.conductor()));
        let lifted: Vec<CycNum> = gens.iter().map(|g| g.lift(n).unwrap()).collect();
        let fixing = (1..n as i64)
            .filter(|&k| gcd(k as u64, n) == 1)
            .filter(|&k| lifted.iter().all(|g| &g.galois(k) == g))
            .collect();
        Subfield {
            gens: gens.to_vec(),
            conductor: n,
            fixing,
        }
    }

    pub fn contains(&self, x: &CycNum) -> bool {
        if self.conductor % x.conductor() != 0 {
            return x.in_field_generated_by(&self.gens);
        }
        let y = x.lift(self.conductor).unwrap();
        y.fixed_by_all(&self.fixing)
    }
}

/// Exponents k in (Z/N)^* with k ≡ 1 mod m: the group fixing Q(ζ_m).
pub fn galois_stabilizer_of_subfield(n: u64, m: u64) -> Vec<i64> {
    (1..=n as i64)
        .filter(|&k| gcd(k as u64, n) == 1 && (k as u64) % m == 1 % m)
        .collect()
}

/// Gaussian elimination on an augmented square system; `None` if singular.
fn solve_square(mut a: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for c in col..=n {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Solve an overdetermined consistent system with `k` unknowns (full column rank).
fn solve_consistent(mut a: Vec<Vec<BigRational>>, k: usize) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let mut r = 0;
    for col in 0..k {
        let piv = (r..rows).find(|&i| !a[i][col].is_zero())?;
        a.swap(r, piv);
        let inv = a[r][col].recip();
        for c in col..=k {
            a[r][c] = &a[r][c] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for c in col..=k {
                    let t = &f * &a[r][c];
                    a[i][c] -= t;
                }
            }
        }
        r += 1;
    }
    if a[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| a[i][k].clone()).collect())
}

impl PartialEq for CycNum {
    fn eq(&self, other: &CycNum) -> bool {
        if self.conductor() == other.conductor() {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = CycNum::lift_pair(self, other);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for CycNum {}

impl<'a> Add<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        if self.conductor() == rhs.conductor() {
            return self.add_same(rhs, 1);
        }
        let (a, b) = CycNum::lift_pair(self, rhs);
        a.add_same(&b, 1)
    }
}

impl<'a> Sub<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        if self.conductor() == rhs.conductor() {
            return self.add_same(rhs, -1);
        }
        let (a, b) = CycNum::lift_pair(self, rhs);
        a.add_same(&b, -1)
    }
}

impl<'a> Mul<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        if self.conductor() == rhs.conductor() {
            return self.mul_same(rhs);
        }
        let (a, b) = CycNum::lift_pair(self, rhs);
        a.mul_same(&b)
    }
}

impl Add for CycNum {
    type Output = CycNum;
    fn add(self, rhs: CycNum) -> CycNum {
        &self + &rhs
    }
}

impl Sub for CycNum {
    type Output = CycNum;
    fn sub(self, rhs: CycNum) -> CycNum {
        &self - &rhs
    }
}

impl Mul for CycNum {
    type Output = CycNum;
    fn mul(self, rhs: CycNum) -> CycNum {
        &self * &rhs
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

/// ζ_N^k.
pub fn root_of_unity(n: u64, k: i64) -> CycNum {
    CycNum::from_exponents(n, [(k, 1)])
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(())
}

/// g_p = Σ_{x mod p} ζ_p^{x²}.
pub fn gauss_sum_quadratic(p: u64) -> Result<CycNum> {
    check_odd_prime(p)?;
    Ok(CycNum::from_exponents(
        p,
        (0..p as i64).map(|x| ((x * x) % p as i64, 1)),
    ))
}

/// The fixed square root of p: g_p when p ≡ 1 (mod 4), ζ_4^{-1} g_p otherwise.
pub fn sqrt_prime(p: u64) -> Result<CycNum> {
    let g = gauss_sum_quadratic(p)?;
    if p % 4 == 1 {
        Ok(g)
    } else {
        Ok(&root_of_unity(4, -1) * &g)
    }
}

pub(crate) fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Invalid(format!("malformed rational {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.conductor();
        let mut terms = Vec::new();
        for (j, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coef = if c.is_integer() {
                c.numer().to_string()
            } else {
                format!("({c})")
            };
            terms.push(match j {
                0 => coef,
                1 => format!("{coef}*z{n}"),
                _ => format!("{coef}*z{n}^{j}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum[{}]({})", self.conductor(), self)
    }
}

#[derive(Serialize, Deserialize)]
struct CycNumRepr {
    conductor: u64,
    coeffs: Vec<String>,
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycNumRepr {
            conductor: self.conductor(),
            coeffs: self.coeffs().iter().map(format_rational).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<CycNum, D::Error> {
        use serde::de::Error as _;
        let r = CycNumRepr::deserialize(d)?;
        if r.conductor == 0 {
            return Err(D::Error::custom("conductor must be positive"));
        }
        let coeffs = r
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        CycNum::from_coeffs(r.conductor, &coeffs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: u64, v: i64) -> CycNum {
        CycNum::from_integer(n, v)
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(9), vec![1, 0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn arithmetic_examples() {
        let z3 = root_of_unity(3, 1);
        assert_eq!(&z3 + &root_of_unity(3, 2), int(3, -1));
        assert_eq!(&root_of_unity(12, 1) * &root_of_unity(12, 11), int(12, 1));
        let w = &int(3, 1) + &(&int(3, 2) * &z3);
        assert_eq!(&w * &w, int(3, -3));
    }

    #[test]
    fn roots_of_unity() {
        let z = root_of_unity(3, 1);
        assert_eq!(z.pow(3).unwrap(), int(3, 1));
        let i = root_of_unity(12, 3);
        assert_eq!(&i * &i, int(12, -1));
        assert_eq!(root_of_unity(1, 5), int(1, 1));
        assert_eq!(root_of_unity(12, 3), root_of_unity(4, 1));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(
            int(5, 1).checked_div(&CycNum::zero(5)),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn inverse_of_gauss_sum() {
        let g = gauss_sum_quadratic(7).unwrap();
        let inv = g.inverse().unwrap();
        assert!((&g * &inv).is_one());
    }

    #[test]
    fn sqrt_prime_examples() {
        let s5 = sqrt_prime(5).unwrap();
        assert_eq!(&s5 * &s5, int(5, 5));
        let s3 = sqrt_prime(3).unwrap();
        assert_eq!(&s3 * &s3, int(3, 3));
        let expected = &root_of_unity(12, 1) + &root_of_unity(12, -1);
        assert_eq!(s3, expected);
        assert!(sqrt_prime(9).is_err());
        assert!(sqrt_prime(2).is_err());
    }

    #[test]
    fn gauss_sum_examples() {
        let g3 = gauss_sum_quadratic(3).unwrap();
        assert_eq!(g3, CycNum::from_int_coeffs(3, &[1, 2]));
        assert_eq!(&g3 * &g3, int(3, -3));
        let g5 = gauss_sum_quadratic(5).unwrap();
        let expected = CycNum::from_exponents(5, [(0, 1), (1, 2), (4, 2)]);
        assert_eq!(g5, expected);
        assert_eq!(&g5 * &g5, int(5, 5));
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(root_of_unity(3, 1).conj(), root_of_unity(3, 2));
        let s5 = sqrt_prime(5).unwrap();
        assert_eq!(s5.conj(), s5);
    }

    #[test]
    fn descend_examples() {
        let z = root_of_unity(12, 4);
        assert_eq!(z.descend(3).unwrap(), Some(root_of_unity(3, 1)));
        assert_eq!(z.descend(3).unwrap().unwrap().conductor(), 3);
        assert_eq!(sqrt_prime(3).unwrap().descend(3).unwrap(), None);
        let q = CycNum::from_rational(12, BigRational::new(7.into(), 3.into()));
        assert_eq!(q.descend(1).unwrap().unwrap().conductor(), 1);
        assert!(q.descend(0).is_err());
    }

    #[test]
    fn min_conductor_and_subfields() {
        assert_eq!(sqrt_prime(3).unwrap().min_conductor(), 12);
        assert_eq!(
            gauss_sum_quadratic(3)
                .unwrap()
                .lift(12)
                .unwrap()
                .min_conductor(),
            3
        );
        let k = [root_of_unity(3, 1), sqrt_prime(3).unwrap()];
        assert!(root_of_unity(12, 1).in_field_generated_by(&k));
        assert!(!root_of_unity(9, 1).in_field_generated_by(&k));
    }

    #[test]
    fn serde_shape() {
        let z =
            &root_of_unity(5, 2) + &CycNum::from_rational(5, BigRational::new(1.into(), 2.into()));
        let js = serde_json::to_value(&z).unwrap();
        assert_eq!(js["conductor"], 5);
        assert_eq!(js["coeffs"].as_array().unwrap().len(), 4);
        assert_eq!(js["coeffs"][0], "1/2");
        let back: CycNum = serde_json::from_value(js).unwrap();
        assert_eq!(back, z);
        let bad = serde_json::json!({"conductor": 5, "coeffs": ["1/1"]});
        assert!(serde_json::from_value::<CycNum>(bad).is_err());
    }
}
