//! Symplectic modules (M, ⟨,⟩) of odd exponent, lagrangians, Sp(M) and
//! enhanced lagrangians.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::abgroup::{hom_kernel, AbGroup, Elem, Subgroup};
use crate::arith::{factorize, is_prime, legendre};
use crate::cyclo::CycNum;
use crate::error::{invalid, Error, Result};

/// Default cap on |M| for exhaustive lagrangian enumeration.
pub const LAGRANGIAN_BUDGET: u64 = 6561;
/// Default cap on |M| for exhaustive enumeration of Sp(M).
pub const SP_BUDGET: u64 = 81;

pub type Lagrangian = Subgroup;

/// A finite abelian group with an additive alternating nondegenerate pairing
/// ⟨,⟩: M × M → Z/n, n the exponent. ω(m, m') = ζ_n^{⟨m, m'⟩}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SympMod {
    group: AbGroup,
    n: u64,
    gram: Vec<Vec<i64>>,
}

impl SympMod {
    pub fn new(orders: Vec<u64>, gram: Vec<Vec<i64>>) -> Result<SympMod> {
        let group = AbGroup::new(orders)?;
        let n = group.exponent();
        let m = group.rank();
        if n % 2 == 0 {
            return Err(Error::EvenOrder(format!("exponent {n} is even")));
        }
        if gram.len() != m || gram.iter().any(|r| r.len() != m) {
            return invalid(format!("gram matrix must be {m}x{m}"));
        }
        let gram: Vec<Vec<i64>> = gram
            .iter()
            .map(|r| r.iter().map(|&x| x.rem_euclid(n as i64)).collect())
            .collect();
        let d = group.orders();
        for i in 0..m {
            if gram[i][i] != 0 {
                return invalid(format!(
                    "pairing is not alternating: <e{i},e{i}> = {}",
                    gram[i][i]
                ));
            }
            for j in 0..m {
                if (gram[i][j] + gram[j][i]) % n as i64 != 0 {
                    return invalid(format!("pairing is not alternating at ({i},{j})"));
                }
                if (gram[i][j] as i128 * d[i] as i128) % n as i128 != 0 {
                    return invalid(format!(
                        "pairing is not well defined: <e{i},e{j}> = {} is not killed by {}",
                        gram[i][j], d[i]
                    ));
                }
            }
        }
        let sm = SympMod { group, n, gram };
        if sm.radical().order() != 1 {
            return invalid("pairing is degenerate");
        }
        let order = sm.group.order();
        let root = (order as f64).sqrt().round() as u64;
        if root * root != order || root % n != 0 {
            return invalid("exponent must divide the square root of |M|");
        }
        Ok(sm)
    }

    pub fn zero() -> SympMod {
        SympMod {
            group: AbGroup::trivial(),
            n: 1,
            gram: vec![],
        }
    }

    pub fn group(&self) -> &AbGroup {
        &self.group
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn order(&self) -> u64 {
        self.group.order()
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    /// √|M|, the dimension of every induced module.
    pub fn half_order(&self) -> u64 {
        (self.order() as f64).sqrt().round() as u64
    }

    pub fn primes(&self) -> Vec<u64> {
        factorize(self.n).into_iter().map(|(p, _)| p).collect()
    }

    /// Some(p) when M is a nonzero F_p-vector space.
    pub fn elementary_prime(&self) -> Option<u64> {
        if self.rank() > 0 && is_prime(self.n) && self.group.is_elementary(self.n) {
            Some(self.n)
        } else {
            None
        }
    }

    pub fn pair(&self, a: &[i64], b: &[i64]) -> i64 {
        let n = self.n as i128;
        let mut s: i128 = 0;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let mut t: i128 = 0;
            for (j, &bj) in b.iter().enumerate() {
                t += self.gram[i][j] as i128 * bj as i128;
            }
            s = (s + ai as i128 * (t % n)) % n;
        }
        s.rem_euclid(n) as i64
    }

    /// β = ((n+1)/2)·⟨,⟩, the alternating half of the pairing.
    pub fn beta(&self, a: &[i64], b: &[i64]) -> i64 {
        let h = (self.n as i64 + 1) / 2;
        (h as i128 * self.pair(a, b) as i128).rem_euclid(self.n as i128) as i64
    }

    fn radical(&self) -> Subgroup {
        let m = self.rank();
        let images: Vec<Elem> = (0..m).map(|i| self.gram[i].clone()).collect();
        hom_kernel(&self.group, &vec![self.n; m], &images)
    }

    pub fn orth_complement(&self, s: &Subgroup) -> Subgroup {
        let gens = s.gens();
        let images: Vec<Elem> = (0..self.rank())
            .map(|i| {
                let e = self.group.basis(i);
                gens.iter().map(|g| self.pair(&e, g)).collect()
            })
            .collect();
        hom_kernel(&self.group, &vec![self.n; gens.len()], &images)
    }

    pub fn is_isotropic(&self, s: &Subgroup) -> bool {
        let gens = s.gens();
        gens.iter()
            .all(|a| gens.iter().all(|b| self.pair(a, b) == 0))
    }

    pub fn is_lagrangian(&self, s: &Subgroup) -> bool {
        self.is_isotropic(s) && s.order() * s.order() == self.order()
    }

    /// All lagrangian subgroups, sorted by canonical form.
    pub fn enumerate_lagrangians(&self, budget: Option<u64>) -> Result<Vec<Lagrangian>> {
        let budget = budget.unwrap_or(LAGRANGIAN_BUDGET);
        if self.order() > budget {
            return Err(Error::Budget {
                what: "lagrangian enumeration over |M|".into(),
                size: self.order(),
                budget,
            });
        }
        let primes = self.primes();
        let target = self.half_order();
        let mut level: BTreeSet<Subgroup> = BTreeSet::new();
        level.insert(Subgroup::zero(&self.group));
        while level.iter().next().map_or(false, |s| s.order() < target) {
            let mut next = BTreeSet::new();
            for s in &level {
                let perp = self.orth_complement(s);
                let mut seen: HashSet<Elem> = HashSet::new();
                for x in perp.elements() {
                    let rep = s.reduce_coset(&x);
                    if rep.iter().all(|&c| c == 0) || !seen.insert(rep.clone()) {
                        continue;
                    }
                    if !primes
                        .iter()
                        .any(|&p| s.contains(&self.group.scale(p as i64, &rep)))
                    {
                        continue;
                    }
                    let mut gens = s.gens();
                    gens.push(rep);
                    next.insert(Subgroup::from_gens(&self.group, &gens)?);
                }
            }
            level = next;
        }
        Ok(level.into_iter().collect())
    }

    /// The module S^⊥/S with the induced pairing, scaled to its own exponent.
    pub fn induced_form(&self, s: &Subgroup) -> Result<Reduced> {
        if !self.is_isotropic(s) {
            return invalid("subgroup is not isotropic");
        }
        let perp = self.orth_complement(s);
        let quot = crate::abgroup::SubQuotient::new(&perp, s)?;
        let q = quot.group.clone();
        let e = q.exponent();
        let scale = (self.n / e) as i64;
        let lifts: Vec<Elem> = (0..q.rank()).map(|i| quot.sec(&q.basis(i))).collect();
        let mut gram = vec![vec![0i64; q.rank()]; q.rank()];
        for i in 0..q.rank() {
            for j in 0..q.rank() {
                let v = self.pair(&lifts[i], &lifts[j]);
                if v % scale != 0 {
                    return Err(Error::Defect("induced pairing is not divisible".into()));
                }
                gram[i][j] = v / scale;
            }
        }
        let module = if q.rank() == 0 {
            SympMod::zero()
        } else {
            SympMod::new(q.orders().to_vec(), gram)?
        };
        Ok(Reduced {
            module,
            scale,
            quotient: quot,
        })
    }

    fn aut_from_images(&self, images: Vec<Elem>) -> SympAut {
        SympAut {
            group: self.group.clone(),
            images,
        }
    }

    pub fn identity(&self) -> SympAut {
        self.aut_from_images((0..self.rank()).map(|i| self.group.basis(i)).collect())
    }

    /// Build an automorphism from the images of the basis vectors, validating it.
    pub fn aut(&self, images: Vec<Elem>) -> Result<SympAut> {
        if images.len() != self.rank() {
            return invalid("automorphism needs one image per basis vector");
        }
        for (i, x) in images.iter().enumerate() {
            self.group.check(x)?;
            if self
                .group
                .scale(self.group.orders()[i] as i64, x)
                .iter()
                .any(|&c| c != 0)
            {
                return invalid(format!("image of e{i} has the wrong order"));
            }
        }
        let g = self.aut_from_images(images);
        if !self.preserves_form(&g) {
            return invalid("map does not preserve the pairing");
        }
        if Subgroup::from_gens(&self.group, &g.images)? != Subgroup::whole(&self.group) {
            return invalid("map is not surjective");
        }
        Ok(g)
    }

    pub fn preserves_form(&self, g: &SympAut) -> bool {
        let m = self.rank();
        (0..m).all(|i| (0..m).all(|j| self.pair(&g.images[i], &g.images[j]) == self.gram[i][j]))
    }

    /// t_{v,λ}(m) = m + λ⟨m,v⟩v.
    pub fn transvection(&self, v: &[i64], lambda: i64) -> SympAut {
        let images = (0..self.rank())
            .map(|i| {
                let e = self.group.basis(i);
                let c = lambda * self.pair(&e, v);
                self.group.add(&e, &self.group.scale(c, v))
            })
            .collect();
        self.aut_from_images(images)
    }

    /// Distinct transvections t_{v,λ} over all v ∈ M, λ ∈ Z/n.
    pub fn transvections(&self) -> Vec<SympAut> {
        let mut seen = BTreeSet::new();
        for v in self.group.elements() {
            for lambda in 0..self.n as i64 {
                seen.insert(self.transvection(&v, lambda));
            }
        }
        seen.into_iter().collect()
    }

    /// Generators t_{v,1}, one per distinct map.
    pub fn transvection_generators(&self) -> Vec<SympAut> {
        let id = self.identity();
        let mut seen = BTreeSet::new();
        for v in self.group.elements() {
            let t = self.transvection(&v, 1);
            if t != id {
                seen.insert(t);
            }
        }
        seen.into_iter().collect()
    }

    /// Deterministic pseudorandom products of transvections.
    pub fn sample_sp(&self, seed: u64, count: usize) -> Vec<SympAut> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elems: Vec<Elem> = self.group.elements().collect();
        let len = 2 * self.rank() + 2;
        (0..count)
            .map(|_| {
                let mut g = self.identity();
                for _ in 0..len {
                    let v = &elems[rng.gen_range(0..elems.len())];
                    let lambda = rng.gen_range(0..self.n.max(1) as i64);
                    g = g.compose(&self.transvection(v, lambda));
                }
                g
            })
            .collect()
    }

    /// Every element of Sp(M), by backtracking over basis images.
    pub fn enumerate_sp(&self, budget: Option<u64>) -> Result<Vec<SympAut>> {
        let budget = budget.unwrap_or(SP_BUDGET);
        if self.order() > budget {
            return Err(Error::Budget {
                what: "Sp(M) enumeration over |M|".into(),
                size: self.order(),
                budget,
            });
        }
        let elems: Vec<Elem> = self.group.elements().collect();
        let m = self.rank();
        let candidates: Vec<Vec<&Elem>> = (0..m)
            .map(|i| {
                let d = self.group.orders()[i] as i64;
                elems
                    .iter()
                    .filter(|x| self.group.scale(d, x).iter().all(|&c| c == 0))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut chosen: Vec<Elem> = Vec::with_capacity(m);
        self.sp_search(&candidates, &mut chosen, &mut out);
        out.sort();
        Ok(out)
    }

    fn sp_search(&self, cand: &[Vec<&Elem>], chosen: &mut Vec<Elem>, out: &mut Vec<SympAut>) {
        let i = chosen.len();
        if i == cand.len() {
            let g = self.aut_from_images(chosen.clone());
            if Subgroup::from_gens(&self.group, &g.images).unwrap() == Subgroup::whole(&self.group)
            {
                out.push(g);
            }
            return;
        }
        for x in &cand[i] {
            if (0..i).all(|j| self.pair(&chosen[j], x) == self.gram[j][i]) {
                chosen.push((*x).clone());
                self.sp_search(cand, chosen, out);
                chosen.pop();
            }
        }
    }

    /// Elements of Sp(M): all of them within budget, otherwise a seeded sample.
    pub fn sp_elements(&self, mode: SpMode) -> Result<Vec<SympAut>> {
        match mode {
            SpMode::Enumerate { budget } => self.enumerate_sp(budget),
            SpMode::Sample { seed, count } => Ok(self.sample_sp(seed, count)),
            SpMode::Transvections => Ok(self.transvections()),
        }
    }

    /// The two enhanced points over a lagrangian.
    pub fn enhanced_points(&self, l: &Lagrangian) -> Result<(EnhLag, EnhLag)> {
        self.require_elementary()?;
        Ok((
            EnhLag {
                lag: l.clone(),
                eps: 1,
            },
            EnhLag {
                lag: l.clone(),
                eps: -1,
            },
        ))
    }

    fn require_elementary(&self) -> Result<u64> {
        if self.rank() == 0 {
            return Ok(1);
        }
        self.elementary_prime()
            .ok_or_else(|| Error::Invalid("enhanced lagrangians need an F_p-vector space".into()))
    }

    /// (gL, ε·(u/p)) where g(b_L) = u·b_{gL} on the reduced-echelon wedge bases.
    pub fn act_enhanced(&self, g: &SympAut, l0: &EnhLag) -> Result<EnhLag> {
        let p = self.require_elementary()?;
        let (gl, u) = self.det_ratio(g, &l0.lag);
        let s = if p == 1 { 1 } else { legendre(u, p) };
        Ok(EnhLag {
            lag: gl,
            eps: l0.eps * s,
        })
    }

    /// The image gL and the scalar u ∈ F_p^* with g(b_L) = u·b_{gL}.
    fn det_ratio(&self, g: &SympAut, l: &Lagrangian) -> (Lagrangian, i64) {
        let gl = l.image(|x| g.apply(x));
        let rows = l.gens();
        let target = gl.gens();
        let pivots: Vec<usize> = target
            .iter()
            .map(|r| r.iter().position(|&c| c != 0).unwrap())
            .collect();
        let p = self.n as i64;
        let a: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| {
                let img = g.apply(r);
                pivots.iter().map(|&c| img[c]).collect()
            })
            .collect();
        (gl, det_mod_p(a, p))
    }

    pub fn flip(&self, l0: &EnhLag) -> EnhLag {
        EnhLag {
            lag: l0.lag.clone(),
            eps: -l0.eps,
        }
    }
}

fn det_mod_p(mut a: Vec<Vec<i64>>, p: i64) -> i64 {
    let n = a.len();
    let mut det = 1i64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| a[r][c].rem_euclid(p) != 0) else {
            return 0;
        };
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        let inv = crate::arith::mod_inverse(a[c][c], p as u64).unwrap() as i64;
        det = (det * a[c][c]).rem_euclid(p);
        for r in c + 1..n {
            let f = (a[r][c] * inv).rem_euclid(p);
            if f != 0 {
                for k in c..n {
                    a[r][k] = (a[r][k] - f * a[c][k]).rem_euclid(p);
                }
            }
        }
    }
    det.rem_euclid(p.max(1))
}

/// Standard module ⊕ (Z/q)^d ⊕ (Z/q)^d, q odd, with hyperbolic pairs (e_i, f_i)
/// laid out consecutively: ⟨e_i, f_i⟩ = n/q.
pub fn standard_module(blocks: &[(u64, u64)]) -> Result<SympMod> {
    let mut orders = Vec::new();
    for &(q, d) in blocks {
        if q < 2 {
            return invalid(format!("block order {q} is trivial"));
        }
        if q % 2 == 0 {
            return Err(Error::EvenOrder(format!("block Z/{q} has even order")));
        }
        for _ in 0..d {
            orders.push(q);
            orders.push(q);
        }
    }
    if orders.is_empty() {
        return Ok(SympMod::zero());
    }
    let n = orders.iter().fold(1, |a, &q| crate::arith::lcm(a, q));
    let m = orders.len();
    let mut gram = vec![vec![0i64; m]; m];
    for k in (0..m).step_by(2) {
        let v = (n / orders[k]) as i64;
        gram[k][k + 1] = v;
        gram[k + 1][k] = n as i64 - v;
    }
    SympMod::new(orders, gram)
}

/// The quotient module S^⊥/S together with the data relating it to M.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub module: SympMod,
    /// ⟨x̃, ỹ⟩_M = scale · ⟨x, y⟩_quotient.
    pub scale: i64,
    pub quotient: crate::abgroup::SubQuotient,
}

#[derive(Clone, Copy, Debug)]
pub enum SpMode {
    Enumerate { budget: Option<u64> },
    Sample { seed: u64, count: usize },
    Transvections,
}

/// A group automorphism of M, stored by the images of the basis vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SympAut {
    group: AbGroup,
    /// Row i is the image of e_i.
    images: Vec<Elem>,
}

impl SympAut {
    pub fn images(&self) -> &[Elem] {
        &self.images
    }

    pub fn group(&self) -> &AbGroup {
        &self.group
    }

    pub fn apply(&self, x: &[i64]) -> Elem {
        let mut v = vec![0i128; self.group.rank()];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (k, y) in v.iter_mut().enumerate() {
                *y += xi as i128 * self.images[i][k] as i128;
            }
        }
        self.group
            .orders()
            .iter()
            .zip(v)
            .map(|(&d, y)| y.rem_euclid(d as i128) as i64)
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SympAut) -> SympAut {
        SympAut {
            group: self.group.clone(),
            images: other.images.iter().map(|x| self.apply(x)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.group.rank()).all(|i| self.images[i] == self.group.basis(i))
    }

    pub fn inverse(&self) -> SympAut {
        let mut prev = SympAut {
            group: self.group.clone(),
            images: (0..self.group.rank())
                .map(|i| self.group.basis(i))
                .collect(),
        };
        let mut cur = self.clone();
        while !cur.is_identity() {
            prev = cur.clone();
            cur = cur.compose(self);
        }
        prev
    }
}

/// A lagrangian together with one of its two lift data.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnhLag {
    pub lag: Lagrangian,
    pub eps: i8,
}

impl EnhLag {
    /// Canonical identifier: generator rows followed by the sign.
    pub fn key(&self) -> String {
        let rows: Vec<String> = self
            .lag
            .gens()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        format!(
            "[{}]{}",
            rows.join(";"),
            if self.eps > 0 { "+" } else { "-" }
        )
    }
}

#[derive(Serialize, Deserialize)]
struct EnhLagRepr {
    lagrangian: Subgroup,
    eps: i8,
}

impl Serialize for EnhLag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnhLagRepr {
            lagrangian: self.lag.clone(),
            eps: self.eps,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnhLag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<EnhLag, D::Error> {
        use serde::de::Error as _;
        let r = EnhLagRepr::deserialize(d)?;
        if r.eps != 1 && r.eps != -1 {
            return Err(D::Error::custom("eps must be +1 or -1"));
        }
        Ok(EnhLag {
            lag: r.lagrangian,
            eps: r.eps,
        })
    }
}

impl EnhLag {
    /// Parse and check that the subgroup is a lagrangian of `module`.
    pub fn from_json(module: &SympMod, v: serde_json::Value) -> Result<EnhLag> {
        let l: EnhLag = serde_json::from_value(v)?;
        if l.lag.ambient() != module.group() || !module.is_lagrangian(&l.lag) {
            return invalid("subgroup is not a lagrangian of the module");
        }
        Ok(l)
    }
}

#[derive(Serialize, Deserialize)]
struct SympModRepr {
    orders: Vec<u64>,
    gram: Vec<Vec<i64>>,
}

impl Serialize for SympMod {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SympModRepr {
            orders: self.group.orders().to_vec(),
            gram: self.gram.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SympMod {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<SympMod, D::Error> {
        use serde::de::Error as _;
        let r = SympModRepr::deserialize(d)?;
        if r.orders.is_empty() && r.gram.is_empty() {
            return Ok(SympMod::zero());
        }
        SympMod::new(r.orders, r.gram).map_err(D::Error::custom)
    }
}

/// G(L, b) = Σ_l ζ_e^{b(l,l)} for a symmetric nondegenerate Z/e-valued form.
pub fn gauss_sum(l: &AbGroup, b: &[Vec<i64>]) -> Result<CycNum> {
    let e = l.exponent();
    let m = l.rank();
    if l.order() % 2 == 0 {
        return Err(Error::EvenOrder(format!("|L| = {} is even", l.order())));
    }
    if b.len() != m || b.iter().any(|r| r.len() != m) {
        return invalid(format!("form must be {m}x{m}"));
    }
    let ei = e as i64;
    for i in 0..m {
        for j in 0..m {
            if (b[i][j] - b[j][i]).rem_euclid(ei) != 0 {
                return invalid("form is not symmetric");
            }
            if (b[i][j] as i128 * l.orders()[i] as i128).rem_euclid(e as i128) != 0 {
                return invalid("form is not well defined on the group");
            }
        }
    }
    let images: Vec<Elem> = b
        .iter()
        .map(|r| r.iter().map(|x| x.rem_euclid(ei)).collect())
        .collect();
    if hom_kernel(l, &vec![e; m], &images).order() != 1 {
        return invalid("form is degenerate");
    }
    let terms = l.elements().map(|x| {
        let mut q: i128 = 0;
        for i in 0..m {
            for j in 0..m {
                q += x[i] as i128 * x[j] as i128 * b[i][j] as i128;
            }
        }
        (q.rem_euclid(e as i128) as i64, 1)
    });
    Ok(CycNum::from_exponents(e, terms))
}

/// A random symmetric nondegenerate Z/e-valued form on L, e = exp(L).
///
/// Entry (i, j) is a multiple of e / gcd(d_i, d_j); draws repeat until the form
/// is nondegenerate.
pub fn random_symmetric_form<R: Rng>(l: &AbGroup, rng: &mut R) -> Result<Vec<Vec<i64>>> {
    if l.order() % 2 == 0 {
        return Err(Error::EvenOrder(format!("|L| = {} is even", l.order())));
    }
    let e = l.exponent() as i64;
    let d = l.orders();
    let m = l.rank();
    loop {
        let mut b = vec![vec![0i64; m]; m];
        for i in 0..m {
            for j in i..m {
                let step = e / num_integer::gcd(d[i], d[j]) as i64;
                let v = step * rng.gen_range(0..e / step);
                b[i][j] = v;
                b[j][i] = v;
            }
        }
        let images: Vec<Elem> = b.clone();
        if hom_kernel(l, &vec![e as u64; m], &images).order() == 1 {
            return Ok(b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::gauss_sum_quadratic;

    #[test]
    fn standard_examples() {
        let m = standard_module(&[(3, 1)]).unwrap();
        assert_eq!(m.gram(), &[vec![0, 1], vec![2, 0]]);
        assert_eq!(m.n(), 3);
        let m = standard_module(&[(9, 1)]).unwrap();
        assert_eq!(m.n(), 9);
        assert_eq!(m.order(), 81);
        let m = standard_module(&[(3, 2)]).unwrap();
        assert_eq!(m.order(), 81);
        assert!(matches!(
            standard_module(&[(2, 1)]),
            Err(Error::EvenOrder(_))
        ));
        assert!(standard_module(&[(6, 1)]).is_err());
    }

    #[test]
    fn rejects_bad_forms() {
        assert!(SympMod::new(vec![3, 3], vec![vec![1, 1], vec![2, 0]]).is_err());
        assert!(SympMod::new(vec![3, 3], vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(SympMod::new(vec![3, 3], vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn orth_complement_examples() {
        let m = standard_module(&[(9, 1)]).unwrap();
        let g = m.group();
        assert_eq!(m.orth_complement(&Subgroup::zero(g)), Subgroup::whole(g));
        let s = Subgroup::whole(g).scaled(3);
        assert_eq!(m.orth_complement(&s), s);
    }

    #[test]
    fn lagrangian_counts() {
        for (blocks, count) in [
            (vec![(3, 1)], 4),
            (vec![(3, 2)], 40),
            (vec![(5, 1)], 6),
            (vec![(7, 1)], 8),
        ] {
            let m = standard_module(&blocks).unwrap();
            let ls = m.enumerate_lagrangians(None).unwrap();
            assert_eq!(ls.len(), count, "{blocks:?}");
            for l in &ls {
                assert_eq!(&m.orth_complement(l), l);
            }
        }
    }

    #[test]
    fn lagrangian_budget() {
        let m = standard_module(&[(3, 1)]).unwrap();
        assert!(matches!(
            m.enumerate_lagrangians(Some(8)),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn sp_of_plane_over_f3() {
        let m = standard_module(&[(3, 1)]).unwrap();
        let g = m.enumerate_sp(None).unwrap();
        assert_eq!(g.len(), 24);
        assert!(g.contains(&m.identity()));
    }

    #[test]
    fn enhanced_flip_by_non_residue() {
        let m = standard_module(&[(3, 1)]).unwrap();
        let g = m.aut(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let l = Subgroup::from_gens(m.group(), &[vec![1, 0]]).unwrap();
        let (plus, minus) = m.enhanced_points(&l).unwrap();
        let img = m.act_enhanced(&g, &plus).unwrap();
        assert_eq!(img.lag, l);
        assert_eq!(img.eps, -1);
        assert_eq!(m.act_enhanced(&g, &minus).unwrap(), m.flip(&img));
        assert_eq!(m.act_enhanced(&m.identity(), &plus).unwrap(), plus);
    }

    #[test]
    fn induced_form_examples() {
        let m = standard_module(&[(9, 1), (3, 1)]).unwrap();
        let s = Subgroup::from_gens(m.group(), &[vec![3, 0, 0, 0], vec![0, 3, 0, 0]]).unwrap();
        let r = m.induced_form(&s).unwrap();
        assert_eq!(r.module.group().orders(), &[3, 3]);
        assert_eq!(r.module.n(), 3);
        let m = standard_module(&[(9, 1)]).unwrap();
        let r = m
            .induced_form(&Subgroup::whole(m.group()).scaled(3))
            .unwrap();
        assert_eq!(r.module.order(), 1);
    }

    #[test]
    fn gauss_sum_examples() {
        let z3 = AbGroup::new(vec![3]).unwrap();
        let g = gauss_sum(&z3, &[vec![1]]).unwrap();
        assert_eq!(g, gauss_sum_quadratic(3).unwrap());
        let z33 = AbGroup::new(vec![3, 3]).unwrap();
        let g2 = gauss_sum(&z33, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g2, &g * &g);
        assert_eq!(g2.pow(4).unwrap(), CycNum::from_integer(1, 81));
        assert!(gauss_sum(&z3, &[vec![0]]).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let m = standard_module(&[(9, 1)]).unwrap();
        for g in m.sample_sp(7, 5) {
            assert!(m.preserves_form(&g));
            assert!(g.compose(&g.inverse()).is_identity());
        }
    }
}
