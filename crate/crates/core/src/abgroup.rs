//! Finite abelian groups Z/d_1 × … × Z/d_m, subgroups in Hermite normal form,
//! quotients in invariant-factor form, and the ρ_k invariants.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{ext_gcd, lcm};
use crate::error::{invalid, Error, Result};

/// Residue vector; coordinate i lives in Z/d_i and is kept in [0, d_i).
pub type Elem = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbGroup {
    orders: Vec<u64>,
}

impl AbGroup {
    pub fn new(orders: Vec<u64>) -> Result<AbGroup> {
        if orders.iter().any(|&d| d == 0) {
            return invalid("cyclic factor orders must be positive");
        }
        Ok(AbGroup { orders })
    }

    pub fn trivial() -> AbGroup {
        AbGroup { orders: vec![] }
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1, |a, &d| lcm(a, d))
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.rank()]
    }

    pub fn basis(&self, i: usize) -> Elem {
        let mut e = self.zero();
        e[i] = 1 % self.orders[i] as i64;
        e
    }

    pub fn reduce(&self, v: &[i64]) -> Elem {
        v.iter()
            .zip(&self.orders)
            .map(|(&x, &d)| x.rem_euclid(d as i64))
            .collect()
    }

    pub fn is_valid(&self, v: &[i64]) -> bool {
        v.len() == self.rank()
            && v.iter()
                .zip(&self.orders)
                .all(|(&x, &d)| x >= 0 && (x as u64) < d)
    }

    pub fn check(&self, v: &[i64]) -> Result<()> {
        if self.is_valid(v) {
            Ok(())
        } else {
            invalid(format!(
                "{v:?} is not a reduced element of Z/{:?}",
                self.orders
            ))
        }
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Elem {
        self.reduce(&a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    pub fn sub(&self, a: &[i64], b: &[i64]) -> Elem {
        self.reduce(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: &[i64]) -> Elem {
        self.reduce(&a.iter().map(|x| -x).collect::<Vec<_>>())
    }

    pub fn scale(&self, k: i64, a: &[i64]) -> Elem {
        self.reduce(
            &a.iter()
                .zip(&self.orders)
                .map(|(&x, &d)| ((x as i128 * k as i128).rem_euclid(d as i128)) as i64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn element_order(&self, a: &[i64]) -> u64 {
        a.iter()
            .zip(&self.orders)
            .map(|(&x, &d)| d / num_integer::gcd(x as u64, d))
            .fold(1, lcm)
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        BoxIter::new(self.orders.iter().map(|&d| d as i64).collect())
    }

    pub fn is_elementary(&self, p: u64) -> bool {
        self.orders.iter().all(|&d| d == p)
    }
}

/// Lexicographic enumeration of the integer box Π [0, bound_i).
pub(crate) struct BoxIter {
    bounds: Vec<i64>,
    cur: Option<Vec<i64>>,
}

impl BoxIter {
    pub(crate) fn new(bounds: Vec<i64>) -> BoxIter {
        let cur = if bounds.iter().all(|&b| b > 0) {
            Some(vec![0; bounds.len()])
        } else {
            None
        };
        BoxIter { bounds, cur }
    }
}

impl Iterator for BoxIter {
    type Item = Vec<i64>;
    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.cur.clone()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < self.bounds[i] {
                self.cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    }
}

/// A subgroup, stored as the Hermite normal form of its preimage lattice in Z^m.
///
/// The lattice always contains d_i e_i, so the form is square upper triangular
/// with positive pivots h_ii dividing d_i and entries above each pivot in [0, h_jj).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    ambient: AbGroup,
    hnf: Vec<Vec<i64>>,
}

impl Subgroup {
    pub fn from_gens(ambient: &AbGroup, gens: &[Elem]) -> Result<Subgroup> {
        for g in gens {
            if g.len() != ambient.rank() {
                return invalid(format!(
                    "generator {g:?} has length {} but the group has rank {}",
                    g.len(),
                    ambient.rank()
                ));
            }
        }
        let m = ambient.rank();
        let d: Vec<i64> = ambient.orders.iter().map(|&x| x as i64).collect();
        let mut rows: Vec<Vec<i64>> = gens.iter().map(|g| ambient.reduce(g)).collect();
        let mut hnf = vec![vec![0i64; m]; m];
        for col in 0..m {
            let mut pivot = vec![0i64; m];
            pivot[col] = d[col];
            let mut rest = Vec::with_capacity(rows.len());
            for mut r in rows.into_iter() {
                if r[col] == 0 {
                    rest.push(r);
                    continue;
                }
                // combine (pivot, r) on column col by an extended-gcd step
                let (g, x, y) = ext_gcd(pivot[col] as i128, r[col] as i128);
                let (a, b) = (pivot[col] as i128 / g, r[col] as i128 / g);
                let mut new_pivot = vec![0i64; m];
                for j in col..m {
                    let v = x * pivot[j] as i128 + y * r[j] as i128;
                    let w = -(b) * pivot[j] as i128 + a * r[j] as i128;
                    new_pivot[j] =
                        v.rem_euclid(if j == col { i128::MAX } else { d[j] as i128 }) as i64;
                    r[j] = if j == col {
                        0
                    } else {
                        w.rem_euclid(d[j] as i128) as i64
                    };
                }
                new_pivot[col] = g as i64;
                pivot = new_pivot;
                rest.push(r);
            }
            hnf[col] = pivot;
            rows = rest;
        }
        // back-reduce entries above pivots into [0, h_jj)
        for i in (0..m).rev() {
            for j in i + 1..m {
                let h = hnf[j][j];
                let q = hnf[i][j].div_euclid(h);
                if q != 0 {
                    let rj = hnf[j].clone();
                    for (k, rjk) in rj.iter().enumerate().skip(j) {
                        hnf[i][k] -= q * rjk;
                    }
                }
            }
        }
        Ok(Subgroup {
            ambient: ambient.clone(),
            hnf,
        })
    }

    pub fn zero(ambient: &AbGroup) -> Subgroup {
        Subgroup::from_gens(ambient, &[]).unwrap()
    }

    pub fn whole(ambient: &AbGroup) -> Subgroup {
        let gens: Vec<Elem> = (0..ambient.rank()).map(|i| ambient.basis(i)).collect();
        Subgroup::from_gens(ambient, &gens).unwrap()
    }

    pub fn ambient(&self) -> &AbGroup {
        &self.ambient
    }

    pub fn hnf(&self) -> &[Vec<i64>] {
        &self.hnf
    }

    pub fn pivots(&self) -> Vec<i64> {
        (0..self.hnf.len()).map(|i| self.hnf[i][i]).collect()
    }

    /// Canonical generators: the normal-form rows, reduced, zero rows dropped.
    pub fn gens(&self) -> Vec<Elem> {
        self.hnf
            .iter()
            .map(|r| self.ambient.reduce(r))
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect()
    }

    pub fn order(&self) -> u64 {
        self.ambient
            .orders
            .iter()
            .zip(self.pivots())
            .map(|(&d, h)| d / h as u64)
            .product()
    }

    pub fn index(&self) -> u64 {
        self.pivots().iter().map(|&h| h as u64).product()
    }

    /// Lexicographically smallest element of the coset v + S.
    pub fn reduce_coset(&self, v: &[i64]) -> Elem {
        let mut v = self.ambient.reduce(v);
        for i in 0..v.len() {
            let h = self.hnf[i][i];
            let q = v[i].div_euclid(h);
            if q != 0 {
                for (k, x) in v.iter_mut().enumerate().skip(i) {
                    *x -= q * self.hnf[i][k];
                }
                v = self.ambient.reduce(&v);
            }
        }
        v
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce_coset(v).iter().all(|&x| x == 0)
    }

    pub fn contains_subgroup(&self, other: &Subgroup) -> bool {
        other.gens().iter().all(|g| self.contains(g))
    }

    /// Elements, enumerated through the triangular normal form.
    pub fn elements(&self) -> Vec<Elem> {
        let bounds: Vec<i64> = self
            .ambient
            .orders
            .iter()
            .zip(self.pivots())
            .map(|(&d, h)| d as i64 / h)
            .collect();
        BoxIter::new(bounds)
            .map(|c| {
                let mut v = vec![0i64; self.ambient.rank()];
                for (i, &ci) in c.iter().enumerate() {
                    if ci != 0 {
                        for (k, x) in v.iter_mut().enumerate() {
                            *x += ci * self.hnf[i][k];
                        }
                    }
                }
                self.ambient.reduce(&v)
            })
            .collect()
    }

    /// Lexicographically minimal coset representatives of G/S, in lexicographic order.
    pub fn coset_reps(&self) -> Vec<Elem> {
        BoxIter::new(self.pivots()).collect()
    }

    /// Position of a reduced coset representative in `coset_reps()`.
    pub fn coset_index(&self, rep: &[i64]) -> usize {
        let mut idx = 0usize;
        for (i, &x) in rep.iter().enumerate() {
            idx = idx * self.hnf[i][i] as usize + x as usize;
        }
        idx
    }

    pub fn sum(&self, other: &Subgroup) -> Subgroup {
        let mut gens = self.gens();
        gens.extend(other.gens());
        Subgroup::from_gens(&self.ambient, &gens).unwrap()
    }

    pub fn scaled(&self, k: i64) -> Subgroup {
        let gens: Vec<Elem> = self
            .gens()
            .iter()
            .map(|g| self.ambient.scale(k, g))
            .collect();
        Subgroup::from_gens(&self.ambient, &gens).unwrap()
    }

    /// Image under an endomorphism of the ambient group.
    pub fn image<F: Fn(&[i64]) -> Elem>(&self, f: F) -> Subgroup {
        let gens: Vec<Elem> = self.gens().iter().map(|g| f(g)).collect();
        Subgroup::from_gens(&self.ambient, &gens).unwrap()
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        let iso = SubgroupIso::new(self);
        let q = SubQuotient::new(&Subgroup::whole(&self.ambient), other).unwrap();
        let images: Vec<Elem> = (0..iso.group.rank())
            .map(|i| q.proj(&iso.from_abstract(&iso.group.basis(i))))
            .collect();
        let ker = hom_kernel(&iso.group, q.group.orders(), &images);
        let gens: Vec<Elem> = ker.gens().iter().map(|g| iso.from_abstract(g)).collect();
        Subgroup::from_gens(&self.ambient, &gens).unwrap()
    }

    /// Invariant-factor type of the subgroup as an abstract group.
    pub fn as_group(&self) -> AbGroup {
        SubgroupIso::new(self).group
    }
}

#[derive(Serialize, Deserialize)]
struct SubgroupRepr {
    ambient: AbGroup,
    gens: Vec<Elem>,
}

impl Serialize for Subgroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubgroupRepr {
            ambient: self.ambient.clone(),
            gens: self.gens(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subgroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Subgroup, D::Error> {
        use serde::de::Error as _;
        let r = SubgroupRepr::deserialize(d)?;
        for g in &r.gens {
            r.ambient.check(g).map_err(D::Error::custom)?;
        }
        Subgroup::from_gens(&r.ambient, &r.gens).map_err(D::Error::custom)
    }
}

/// Row-style Hermite normal form over i128; returns the nonzero rows.
fn hnf_rows(mut rows: Vec<Vec<i128>>, ncols: usize) -> Vec<Vec<i128>> {
    let mut r = 0;
    for col in 0..ncols {
        loop {
            let piv = (r..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| rows[i][col].abs());
            let Some(piv) = piv else { break };
            rows.swap(r, piv);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col] != 0 {
                    let q = rows[i][col].div_euclid(rows[r][col]);
                    let pr = rows[r].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pr) {
                        *x -= q * y;
                    }
                    if rows[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if r >= rows.len() || rows[r][col] == 0 {
            continue;
        }
        if rows[r][col] < 0 {
            rows[r].iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..r {
            let q = rows[i][col].div_euclid(rows[r][col]);
            if q != 0 {
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= q * y;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

/// Kernel of the homomorphism G → ⊕ Z/t_j sending e_i to `images[i]`.
pub fn hom_kernel(g: &AbGroup, target: &[u64], images: &[Elem]) -> Subgroup {
    let basis = free_kernel(g, target, images);
    let gens: Vec<Elem> = basis
        .iter()
        .map(|r| g.reduce(&r.iter().map(|&x| x as i64).collect::<Vec<_>>()))
        .collect();
    Subgroup::from_gens(g, &gens).unwrap()
}

/// Lattice {c ∈ Z^m : Σ c_i images[i] ≡ 0 in ⊕ Z/t_j}, ignoring the relations of `g`.
fn free_kernel(g: &AbGroup, target: &[u64], images: &[Elem]) -> Vec<Vec<i128>> {
    let m = g.rank();
    let k = target.len();
    let mut rows = Vec::with_capacity(m + k);
    for (i, img) in images.iter().enumerate() {
        let mut r = vec![0i128; k + m];
        for j in 0..k {
            r[j] = img[j] as i128;
        }
        r[k + i] = 1;
        rows.push(r);
    }
    for (j, &t) in target.iter().enumerate() {
        let mut r = vec![0i128; k + m];
        r[j] = t as i128;
        rows.push(r);
    }
    hnf_rows(rows, k + m)
        .into_iter()
        .filter(|r| r[..k].iter().all(|&x| x == 0))
        .map(|r| r[k..].to_vec())
        .collect()
}

/// Z^k / rowspace(rel) in Smith form, with the column transform and its inverse.
#[derive(Clone, Debug)]
struct Presentation {
    diag: Vec<i128>,
    v: Vec<Vec<i128>>,
    v_inv: Vec<Vec<i128>>,
    kept: Vec<usize>,
}

impl Presentation {
    fn new(rel: Vec<Vec<i128>>, k: usize) -> Presentation {
        let mut a = rel;
        let rows = a.len();
        let mut v: Vec<Vec<i128>> = (0..k)
            .map(|i| (0..k).map(|j| i128::from(i == j)).collect())
            .collect();
        let mut v_inv = v.clone();
        let mut t = 0;
        while t < k.min(rows) {
            // pick the smallest nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..k {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            if bj != t {
                for row in a.iter_mut() {
                    row.swap(t, bj);
                }
                for row in v.iter_mut() {
                    row.swap(t, bj);
                }
                v_inv.swap(t, bj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    let pr = a[t].clone();
                    for (x, y) in a[i].iter_mut().zip(&pr) {
                        *x -= q * y;
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..k {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    let vj = v_inv[j].clone();
                    for (x, y) in v_inv[t].iter_mut().zip(&vj) {
                        *x += q * y;
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold any offending row into row t and retry
            let piv = a[t][t];
            let bad = (t + 1..rows).find(|&i| (t + 1..k).any(|j| a[i][j] % piv != 0));
            if let Some(i) = bad {
                let ri = a[i].clone();
                for (x, y) in a[t].iter_mut().zip(&ri) {
                    *x += y;
                }
                continue;
            }
            t += 1;
        }
        let diag: Vec<i128> = (0..k)
            .map(|i| if i < rows { a[i][i].abs() } else { 0 })
            .collect();
        assert!(
            diag.iter().all(|&x| x != 0),
            "relation lattice must have full rank"
        );
        let kept = (0..k).filter(|&i| diag[i] != 1).collect();
        Presentation {
            diag,
            v,
            v_inv,
            kept,
        }
    }

    fn factors(&self) -> Vec<u64> {
        self.kept.iter().map(|&i| self.diag[i] as u64).collect()
    }

    fn coords(&self, x: &[i64]) -> Elem {
        self.kept
            .iter()
            .map(|&j| {
                let s: i128 = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| xi as i128 * self.v[i][j])
                    .sum();
                s.rem_euclid(self.diag[j]) as i64
            })
            .collect()
    }

    fn lift(&self, q: &[i64]) -> Vec<i128> {
        let k = self.v.len();
        let mut y = vec![0i128; k];
        for (t, &j) in self.kept.iter().enumerate() {
            y[j] = q[t] as i128;
        }
        (0..k)
            .map(|c| (0..k).map(|r| y[r] * self.v_inv[r][c]).sum())
            .collect()
    }
}

/// A subgroup X ⊂ G together with an isomorphism to an invariant-factor group.
#[derive(Clone, Debug)]
pub struct SubgroupIso {
    pub sub: Subgroup,
    pub group: AbGroup,
    pres: Presentation,
}

impl SubgroupIso {
    pub fn new(sub: &Subgroup) -> SubgroupIso {
        let g = &sub.ambient;
        let m = g.rank();
        // c ↦ Σ c_i row_i as a map Z^m → G
        let images: Vec<Elem> = sub.hnf.iter().map(|r| g.reduce(r)).collect();
        let rel = free_kernel(&AbGroup { orders: vec![1; m] }, &g.orders, &images);
        let pres = Presentation::new(rel, m);
        let group = AbGroup {
            orders: pres.factors(),
        };
        SubgroupIso {
            sub: sub.clone(),
            group,
            pres,
        }
    }

    pub fn to_abstract(&self, x: &[i64]) -> Result<Elem> {
        let g = &self.sub.ambient;
        let mut v = g.reduce(x);
        let mut c = vec![0i64; g.rank()];
        for i in 0..v.len() {
            let h = self.sub.hnf[i][i];
            if v[i] % h != 0 {
                return Err(Error::Invalid(format!("{x:?} is not in the subgroup")));
            }
            c[i] = v[i] / h;
            if c[i] != 0 {
                for (k, y) in v.iter_mut().enumerate() {
                    *y -= c[i] * self.sub.hnf[i][k];
                }
                v = g.reduce(&v);
            }
        }
        Ok(self.pres.coords(&c))
    }

    pub fn from_abstract(&self, q: &[i64]) -> Elem {
        let c = self.pres.lift(q);
        let g = &self.sub.ambient;
        let mut v = vec![0i128; g.rank()];
        for (i, ci) in c.iter().enumerate() {
            for (k, x) in v.iter_mut().enumerate() {
                *x += ci * self.sub.hnf[i][k] as i128;
            }
        }
        g.orders
            .iter()
            .zip(v)
            .map(|(&d, x)| x.rem_euclid(d as i128) as i64)
            .collect()
    }
}

/// A/B for subgroups B ⊂ A ⊂ G, with projection and a lexicographically
/// minimal section back into G.
#[derive(Clone, Debug)]
pub struct SubQuotient {
    pub group: AbGroup,
    pub numerator: Subgroup,
    pub denominator: Subgroup,
    a_iso: SubgroupIso,
    q_pres: Presentation,
    b_abs: Subgroup,
}

impl SubQuotient {
    pub fn new(a: &Subgroup, b: &Subgroup) -> Result<SubQuotient> {
        if a.ambient != b.ambient || !a.contains_subgroup(b) {
            return invalid("quotient requires the denominator to be a subgroup of the numerator");
        }
        let a_iso = SubgroupIso::new(a);
        let b_gens: Vec<Elem> = b
            .gens()
            .iter()
            .map(|g| a_iso.to_abstract(g))
            .collect::<Result<_>>()?;
        let b_abs = Subgroup::from_gens(&a_iso.group, &b_gens)?;
        let k = a_iso.group.rank();
        let rel: Vec<Vec<i128>> = b_abs
            .hnf
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let q_pres = Presentation::new(rel, k);
        Ok(SubQuotient {
            group: AbGroup {
                orders: q_pres.factors(),
            },
            numerator: a.clone(),
            denominator: b.clone(),
            a_iso,
            q_pres,
            b_abs,
        })
    }

    /// Image of x ∈ A in A/B.
    pub fn proj(&self, x: &[i64]) -> Elem {
        let c = self
            .a_iso
            .to_abstract(x)
            .expect("projection applied outside the numerator");
        self.q_pres.coords(&c)
    }

    /// Lexicographically smallest preimage in G of a quotient element.
    pub fn sec(&self, q: &[i64]) -> Elem {
        let y: Vec<i64> = self
            .q_pres
            .lift(q)
            .iter()
            .zip(self.a_iso.group.orders())
            .map(|(&x, &d)| x.rem_euclid(d as i128) as i64)
            .collect();
        let y = self.b_abs.ambient.reduce(&y);
        self.denominator.reduce_coset(&self.a_iso.from_abstract(&y))
    }
}

/// G/S as (quotient group, projection, section).
pub fn quotient(g: &AbGroup, s: &Subgroup) -> Result<SubQuotient> {
    if s.ambient() != g {
        return invalid("subgroup lives in a different group");
    }
    SubQuotient::new(&Subgroup::whole(g), s)
}

/// G[p^k] = {x : p^k x = 0}.
pub fn torsion(g: &AbGroup, p: u64, k: u32) -> Subgroup {
    let pk = (p as i64).pow(k);
    let images: Vec<Elem> = (0..g.rank()).map(|i| g.scale(pk, &g.basis(i))).collect();
    hom_kernel(g, g.orders(), &images)
}

/// (G[p^k], p^k G).
pub fn torsion_and_scale(g: &AbGroup, p: u64, k: u32) -> (Subgroup, Subgroup) {
    let pk = (p as i64).pow(k);
    (torsion(g, p, k), Subgroup::whole(g).scaled(pk))
}

/// ρ_k(G) = G[p^k] / (G[p^{k-1}] + p·G[p^{k+1}]), an F_p-vector space.
pub fn rho_k(g: &AbGroup, p: u64, k: u32) -> AbGroup {
    assert!(k >= 1, "rho_k needs k >= 1");
    let top = torsion(g, p, k);
    let below = torsion(g, p, k - 1).sum(&torsion(g, p, k + 1).scaled(p as i64));
    SubQuotient::new(&top, &below)
        .expect("G[p^{k-1}] + pG[p^{k+1}] lies in G[p^k]")
        .group
}

/// The p-primary part of G.
pub fn primary_component(g: &AbGroup, p: u64) -> Subgroup {
    let mut e = g.exponent();
    while e % p == 0 {
        e /= p;
    }
    Subgroup::whole(g).scaled(e as i64)
}

/// A random group automorphism of G, as images of the basis vectors: a product
/// of `steps` shears e_i ↦ e_i + c·e_j and unit scalings e_i ↦ u·e_i.
pub fn random_automorphism<R: rand::Rng>(g: &AbGroup, rng: &mut R, steps: usize) -> Vec<Elem> {
    let m = g.rank();
    let d = g.orders();
    let mut images: Vec<Elem> = (0..m).map(|i| g.basis(i)).collect();
    if m == 0 {
        return images;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        if i != j {
            let step = (d[j] / num_integer::gcd(d[i], d[j])) as i64;
            let c = step * rng.gen_range(0..d[j] as i64);
            images[i] = g.add(&images[i], &g.scale(c, &images[j]));
        } else {
            let u = loop {
                let u = rng.gen_range(1..d[i].max(2) as i64);
                if num_integer::gcd(u as u64, d[i]) == 1 {
                    break u;
                }
            };
            images[i] = g.scale(u, &images[i]);
        }
    }
    images
}

/// Apply the homomorphism with the given basis images.
pub fn apply_images(g: &AbGroup, images: &[Elem], x: &[i64]) -> Elem {
    let mut out = g.zero();
    for (xi, img) in x.iter().zip(images) {
        out = g.add(&out, &g.scale(*xi, img));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(o: &[u64]) -> AbGroup {
        AbGroup::new(o.to_vec()).unwrap()
    }

    #[test]
    fn subgroup_from_gens_examples() {
        let g = grp(&[9]);
        assert_eq!(Subgroup::from_gens(&g, &[vec![3]]).unwrap().order(), 3);
        let g = grp(&[3, 3]);
        let s = Subgroup::from_gens(&g, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(s.order(), 9);
        assert_eq!(s, Subgroup::whole(&g));
        let g = grp(&[9, 3]);
        let s = Subgroup::from_gens(&g, &[vec![3, 1]]).unwrap();
        assert_eq!(s.order(), 3);
        let mut els = s.elements();
        els.sort();
        assert_eq!(els, vec![vec![0, 0], vec![3, 1], vec![6, 2]]);
    }

    #[test]
    fn malformed_generators_rejected() {
        let g = grp(&[3, 3]);
        assert!(Subgroup::from_gens(&g, &[vec![1]]).is_err());
    }

    #[test]
    fn quotient_examples() {
        let g = grp(&[9]);
        let s = Subgroup::from_gens(&g, &[vec![3]]).unwrap();
        let q = quotient(&g, &s).unwrap();
        assert_eq!(q.group.orders(), &[3]);
        let g = grp(&[3, 3]);
        let diag = Subgroup::from_gens(&g, &[vec![1, 1]]).unwrap();
        let q = quotient(&g, &diag).unwrap();
        assert_eq!(q.group.order(), 3);
        let q = quotient(&g, &Subgroup::whole(&g)).unwrap();
        assert_eq!(q.group.order(), 1);
        assert_eq!(q.sec(&[]), vec![0, 0]);
    }

    #[test]
    fn section_is_lexicographically_minimal() {
        let g = grp(&[9, 3]);
        let s = Subgroup::from_gens(&g, &[vec![3, 1]]).unwrap();
        let q = quotient(&g, &s).unwrap();
        for x in g.elements() {
            let y = q.sec(&q.proj(&x));
            let coset: Vec<Elem> = s.elements().iter().map(|e| g.add(&x, e)).collect();
            assert_eq!(&y, coset.iter().min().unwrap());
            assert_eq!(q.proj(&y), q.proj(&x));
        }
    }

    #[test]
    fn torsion_examples() {
        let g = grp(&[9]);
        let (t, s) = torsion_and_scale(&g, 3, 1);
        let three = Subgroup::from_gens(&g, &[vec![3]]).unwrap();
        assert_eq!(t, three);
        assert_eq!(s, three);
        let g = grp(&[9, 3]);
        let (t, s) = torsion_and_scale(&g, 3, 1);
        assert_eq!(t.as_group().orders(), &[3, 3]);
        assert_eq!(s.as_group().orders(), &[3]);
        let g = grp(&[5, 25]);
        let (t, s) = torsion_and_scale(&g, 3, 1);
        assert_eq!(t.order(), 1);
        assert_eq!(s, Subgroup::whole(&g));
        let (t0, s0) = torsion_and_scale(&g, 5, 0);
        assert_eq!(t0.order(), 1);
        assert_eq!(s0, Subgroup::whole(&g));
    }

    #[test]
    fn rho_examples() {
        for m in 1..4u32 {
            for k in 1..5u32 {
                let g = grp(&[3u64.pow(m)]);
                let expected = if m == k { 3 } else { 1 };
                assert_eq!(rho_k(&g, 3, k).order(), expected, "m={m} k={k}");
            }
        }
        assert_eq!(rho_k(&grp(&[9, 3]), 3, 1).orders(), &[3]);
    }

    #[test]
    fn primary_examples() {
        let g = grp(&[15]);
        assert_eq!(primary_component(&g, 3).order(), 3);
        assert_eq!(primary_component(&g, 7).order(), 1);
        let g = grp(&[45, 5]);
        assert_eq!(primary_component(&g, 5).as_group().orders(), &[5, 5]);
    }

    #[test]
    fn intersection() {
        let g = grp(&[9, 9]);
        let a = Subgroup::from_gens(&g, &[vec![1, 0]]).unwrap();
        let b = Subgroup::from_gens(&g, &[vec![3, 3], vec![0, 3]]).unwrap();
        let i = a.intersect(&b);
        assert_eq!(i, Subgroup::from_gens(&g, &[vec![3, 0]]).unwrap());
    }

    #[test]
    fn subgroup_iso_roundtrip() {
        let g = grp(&[9, 27, 3]);
        let s = Subgroup::from_gens(&g, &[vec![3, 9, 1], vec![0, 3, 0]]).unwrap();
        let iso = SubgroupIso::new(&s);
        assert_eq!(iso.group.order(), s.order());
        for x in s.elements() {
            let a = iso.to_abstract(&x).unwrap();
            assert_eq!(iso.from_abstract(&a), x);
        }
    }
}
