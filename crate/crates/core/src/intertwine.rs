//! Averaging intertwiners T_{N,L}, commutant dimensions, kernels, and the
//! canonical system {F_{N⁰,L⁰}} pinned down by identity, transitivity,
//! genuineness and Sp-equivariance.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abgroup::Elem;
use crate::cyclo::{root_of_unity, sqrt_prime, CycNum, Subfield};
use crate::cycmat::{DenseMatrix, Monomial, ScaledMat, ZMat};
use crate::error::{invalid, Error, Result};
use crate::heisenberg::{HElem, HeisGrp, InducedModule};
use crate::symplectic::{EnhLag, Lagrangian, SympAut, SympMod};
use crate::verify::IntertwinerFamily;

/// (T f)(h) = Σ_{n̄ ∈ N̄/(N̄∩L̄)} χ_N(n̄)^{-1} f(n̄h), as a matrix ℋ_L → ℋ_N.
pub fn standard_t(target: &InducedModule, source: &InducedModule) -> ZMat {
    let grp = target.grp();
    let g = grp.base().group();
    let mut reps: Vec<Elem> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for n in target.lag().elements() {
        if seen.insert(source.lag().reduce_coset(&n)) {
            reps.push(n);
        }
    }
    let mut t = ZMat::zeros(grp.center(), target.dim(), source.dim());
    for (i, r) in target.reps().iter().enumerate() {
        for n in &reps {
            let (j, e) = source.evaluate(&g.add(n, r), grp.beta(n, r));
            t.add_root(i, j, e);
        }
    }
    assert!(!t.is_zero(), "averaging intertwiner vanished");
    t
}

/// Dimension of {X : X ρ_V(h) = ρ_W(h) X for all listed h}, for monomial
/// actions given on the same list of group elements.
pub fn hom_dim(v: &[Monomial], w: &[Monomial]) -> usize {
    assert_eq!(v.len(), w.len());
    let (dv, dw) = match (v.first(), w.first()) {
        (Some(a), Some(b)) => (a.dim(), b.dim()),
        _ => return 0,
    };
    let order = v
        .iter()
        .chain(w)
        .fold(1u64, |acc, m| crate::arith::lcm(acc, m.order)) as i64;
    let size = dv * dw;
    let mut uf = PhaseUnionFind::new(size, order);
    for (a, b) in v.iter().zip(w) {
        let (sa, sb) = (order / a.order as i64, order / b.order as i64);
        for i in 0..dw {
            for k in 0..dv {
                // X[b.col[i]][a.col[k]] = ζ^{pa_k − pb_i} X[i][k]
                let u = i * dv + k;
                let t = b.col[i] * dv + a.col[k];
                let ph = a.phase[k] as i64 * sa - b.phase[i] as i64 * sb;
                uf.relate(u, t, ph);
            }
        }
    }
    uf.free_components()
}

/// Union–find over unknowns x_u with relations x_v = ζ^t x_u.
struct PhaseUnionFind {
    parent: Vec<usize>,
    /// x_u = ζ^{pot[u]} x_{parent[u]}
    pot: Vec<i64>,
    dead: Vec<bool>,
    order: i64,
}

impl PhaseUnionFind {
    fn new(n: usize, order: i64) -> PhaseUnionFind {
        PhaseUnionFind {
            parent: (0..n).collect(),
            pot: vec![0; n],
            dead: vec![false; n],
            order,
        }
    }

    fn find(&mut self, u: usize) -> (usize, i64) {
        let mut path = Vec::new();
        let mut x = u;
        while self.parent[x] != x {
            path.push(x);
            x = self.parent[x];
        }
        let root = x;
        // compress from the top down
        let mut acc = 0;
        for &y in path.iter().rev() {
            acc = (acc + self.pot[y]).rem_euclid(self.order);
            self.pot[y] = acc;
            self.parent[y] = root;
        }
        (root, if u == root { 0 } else { self.pot[u] })
    }

    fn relate(&mut self, u: usize, v: usize, t: i64) {
        let (ru, pu) = self.find(u);
        let (rv, pv) = self.find(v);
        // x_v = ζ^t x_u, x_u = ζ^pu x_ru, x_v = ζ^pv x_rv
        if ru == rv {
            if (pv - pu - t).rem_euclid(self.order) != 0 {
                self.dead[ru] = true;
            }
            return;
        }
        // attach rv below ru: x_rv = ζ^{t + pu − pv} x_ru
        self.parent[rv] = ru;
        self.pot[rv] = (t + pu - pv).rem_euclid(self.order);
        if self.dead[rv] {
            self.dead[ru] = true;
        }
    }

    fn free_components(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&u| self.parent[u] == u && !self.dead[u])
            .count()
    }
}

/// ρ on the standard generators of H.
pub fn generator_action(v: &InducedModule) -> Vec<Monomial> {
    v.grp().generators().iter().map(|h| v.rho(h)).collect()
}

/// δ with T_{L,N} T_{N,L} = δ·id.
pub fn composition_scalar(n: &InducedModule, l: &InducedModule) -> CycNum {
    let prod = standard_t(l, n).mul(&standard_t(n, l));
    prod.ratio_to(&ZMat::identity(prod.conductor(), prod.rows()))
        .expect("T_{L,N} T_{N,L} is scalar")
}

/// κ with T_{R,N} T_{N,L} = κ·T_{R,L}.
pub fn composition_ratio(t_rn: &ZMat, t_nl: &ZMat, t_rl: &ZMat) -> Result<CycNum> {
    t_rn.mul(t_nl)
        .ratio_to(t_rl)
        .ok_or_else(|| Error::Defect("composite of averaging operators is not proportional".into()))
}

/// Kernel k: H → K of an intertwiner ℋ_L → ℋ_N, tabulated over `grp.elements()`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub values: Vec<CycNum>,
}

fn element_index(grp: &HeisGrp, h: &HElem) -> usize {
    let mut idx = 0usize;
    for (&x, &d) in h.m.iter().zip(grp.base().group().orders()) {
        idx = idx * d as usize + x as usize;
    }
    idx * grp.center() as usize + h.a as usize
}

fn l_bar_order(v: &InducedModule) -> i64 {
    (v.lag().order() * v.grp().center()) as i64
}

/// k(m, a) = ζ^{a − β(m, r)} F[r][0] / |L̄| with r the representative of m + N.
///
/// The operator is then (F f)(h₁) = Σ_{h₂ ∈ H} k(h₁h₂⁻¹) f(h₂), and k satisfies
/// k(n̄ x l̄) = χ_N(n̄) k(x) χ_L(l̄).
pub fn kernel_of(f: &ScaledMat, target: &InducedModule, source: &InducedModule) -> Kernel {
    let grp = target.grp();
    let inv = BigRational::new(BigInt::from(1), BigInt::from(l_bar_order(source)));
    let col0: Vec<CycNum> = (0..f.rows()).map(|i| f.entry(i, 0).scale(&inv)).collect();
    let values = grp
        .elements()
        .map(|h| {
            let (i, e) = target.evaluate(&h.m, h.a);
            col0[i].mul_root_of(grp.center(), e)
        })
        .collect();
    Kernel { values }
}

/// F[r'][r] = |L̄| · k((r',0)(r,0)⁻¹), after checking bicovariance on generators.
pub fn operator_from_kernel(
    k: &Kernel,
    target: &InducedModule,
    source: &InducedModule,
) -> Result<ScaledMat> {
    let grp = target.grp();
    let g = grp.base().group();
    let elems: Vec<HElem> = grp.elements().collect();
    if k.values.len() != elems.len() {
        return invalid("kernel table has the wrong size");
    }
    let at = |h: &HElem| &k.values[element_index(grp, h)];
    let c = grp.center();
    let mut checks: Vec<(HElem, bool)> = target
        .lag()
        .gens()
        .into_iter()
        .map(|n| (grp.elem(n, 0), true))
        .collect();
    checks.extend(
        source
            .lag()
            .gens()
            .into_iter()
            .map(|l| (grp.elem(l, 0), false)),
    );
    checks.push((grp.elem(g.zero(), 1), true));
    checks.push((grp.elem(g.zero(), 1), false));
    for x in &elems {
        for (y, left) in &checks {
            // χ(y) = ζ^a for y = (l, a) with θ trivial
            let (prod, chi) = if *left {
                (grp.product(y, x), y.a)
            } else {
                (grp.product(x, y), y.a)
            };
            if at(&prod) != &at(x).mul_root_of(c, chi) {
                return invalid("kernel is not bicovariant");
            }
        }
    }
    let scale = CycNum::from_integer(1, l_bar_order(source));
    let mut rows: Vec<Vec<CycNum>> = Vec::with_capacity(target.dim());
    for rp in target.reps() {
        let mut row = Vec::with_capacity(source.dim());
        for r in source.reps() {
            let h = grp.product(
                &grp.elem(rp.clone(), 0),
                &grp.inverse(&grp.elem(r.clone(), 0)),
            );
            row.push(&scale * at(&h));
        }
        rows.push(row);
    }
    scaled_from_entries(c, &rows)
}

/// Write a K-matrix as scalar · integral matrix, clearing denominators.
pub fn scaled_from_entries(conductor: u64, rows: &[Vec<CycNum>]) -> Result<ScaledMat> {
    let n = rows
        .iter()
        .flatten()
        .fold(conductor, |acc, x| crate::arith::lcm(acc, x.conductor()));
    let mut den = BigInt::from(1);
    for x in rows.iter().flatten() {
        for c in x.coeffs() {
            den = num_integer::Integer::lcm(&den, c.denom());
        }
    }
    let dr = BigRational::from_integer(den.clone());
    let mut m = ZMat::zeros(n, rows.len(), rows.first().map_or(0, |r| r.len()));
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            m.set_entry(i, j, &x.scale(&dr))?;
        }
    }
    Ok(ScaledMat::new(
        CycNum::from_rational(1, BigRational::new(BigInt::from(1), den)),
        m,
    ))
}

/// Monomial c·t^v over formal symbols t.
#[derive(Clone, Debug)]
struct SymVal {
    k: CycNum,
    v: Vec<i64>,
}

impl SymVal {
    fn mul(&self, o: &SymVal, sign: i64) -> Result<SymVal> {
        let k = if sign > 0 {
            &self.k * &o.k
        } else {
            self.k.checked_div(&o.k)?
        };
        let len = self.v.len().max(o.v.len());
        let v = (0..len)
            .map(|i| self.v.get(i).copied().unwrap_or(0) + sign * o.v.get(i).copied().unwrap_or(0))
            .collect();
        Ok(SymVal { k, v })
    }

    fn is_constant(&self) -> bool {
        self.v.iter().all(|&x| x == 0)
    }
}

/// Row-echelon store for relations t^v = k, maintained by integer row operations.
struct RelationLattice {
    rows: Vec<(Vec<i64>, CycNum)>,
    nsym: usize,
}

impl RelationLattice {
    fn new(nsym: usize) -> RelationLattice {
        RelationLattice {
            rows: Vec::new(),
            nsym,
        }
    }

    fn pivot(v: &[i64]) -> Option<usize> {
        v.iter().position(|&x| x != 0)
    }

    fn insert(&mut self, mut v: Vec<i64>, mut k: CycNum) -> Result<()> {
        v.resize(self.nsym, 0);
        loop {
            let Some(c) = Self::pivot(&v) else {
                if !k.is_one() {
                    return Err(Error::Inconsistent(format!(
                        "equivariance forces 1 = {k} around a cycle of lagrangians"
                    )));
                }
                return Ok(());
            };
            let pos = self
                .rows
                .iter()
                .position(|(r, _)| Self::pivot(r) == Some(c));
            let Some(pos) = pos else {
                self.rows.push((v, k));
                self.rows.sort_by_key(|(r, _)| Self::pivot(r));
                return Ok(());
            };
            // Euclid on column c between the stored row and v
            let (mut a, mut ka) = self.rows[pos].clone();
            while v[c] != 0 {
                let q = a[c].div_euclid(v[c]);
                for i in 0..self.nsym {
                    a[i] -= q * v[i];
                }
                ka = ka.checked_div(&k.pow(q)?)?;
                std::mem::swap(&mut a, &mut v);
                std::mem::swap(&mut ka, &mut k);
            }
            self.rows[pos] = (a, ka);
        }
    }

    /// Values of the symbols, if the lattice is all of Z^s.
    fn solve(mut self) -> Result<Vec<CycNum>> {
        let s = self.nsym;
        if self.rows.len() < s {
            return Err(Error::Underdetermined(format!(
                "{} free parameter(s) survive the equivariance equations",
                s - self.rows.len()
            )));
        }
        for (r, k) in self.rows.iter_mut() {
            let c = Self::pivot(r).unwrap();
            if r[c].abs() != 1 {
                return Err(Error::Underdetermined(format!(
                    "only the {}-th power of a normalizing scalar is fixed",
                    r[c].abs()
                )));
            }
            if r[c] < 0 {
                r.iter_mut().for_each(|x| *x = -*x);
                *k = k.inverse()?;
            }
        }
        let mut t: Vec<Option<CycNum>> = vec![None; s];
        for (r, k) in self.rows.iter().rev() {
            let c = Self::pivot(r).unwrap();
            let mut val = k.clone();
            for j in c + 1..s {
                if r[j] != 0 {
                    val = val.checked_div(&t[j].as_ref().unwrap().pow(r[j])?)?;
                }
            }
            t[c] = Some(val);
        }
        Ok(t.into_iter().map(|x| x.unwrap()).collect())
    }
}

/// Diagnostics of the solver run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub lagrangians: usize,
    pub generators: usize,
    pub equations: usize,
    pub symbols: usize,
    pub relations: usize,
}

/// The canonical system over an F_p-symplectic module: F_{N⁰,L⁰} = a(N⁰,L⁰)·T_{N,L}.
pub struct CanonicalSystem {
    grp: HeisGrp,
    basepoint: EnhLag,
    lags: Vec<Lagrangian>,
    index: HashMap<Lagrangian, usize>,
    modules: Vec<InducedModule>,
    /// c(L, +1); F_{L⁰,B⁰} = c(L⁰) T_{L,B} and c(L, −1) = −c(L, +1).
    c: Vec<CycNum>,
    base: usize,
    t_cache: Vec<OnceLock<ZMat>>,
    kappa_cache: Mutex<HashMap<(usize, usize, usize), CycNum>>,
    pub stats: SolveStats,
}

impl std::fmt::Debug for CanonicalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CanonicalSystem")
            .field("basepoint", &self.basepoint.key())
            .field("lagrangians", &self.lags.len())
            .finish()
    }
}

impl CanonicalSystem {
    /// Solve for the normalizing scalars from the equivariance equations.
    ///
    /// `grp` must have an F_p-vector space (or zero) as base; its center may
    /// be any multiple of p.
    pub fn solve(
        grp: &HeisGrp,
        basepoint: &EnhLag,
        budget: Option<u64>,
    ) -> Result<CanonicalSystem> {
        let m = grp.base();
        if m.rank() > 0 && m.elementary_prime().is_none() {
            return invalid("the canonical system is solved over F_p-vector spaces only");
        }
        let lags = m.enumerate_lagrangians(budget)?;
        let index: HashMap<Lagrangian, usize> = lags
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        let base = *index
            .get(&basepoint.lag)
            .ok_or_else(|| Error::Invalid("basepoint is not a lagrangian of the module".into()))?;
        let modules: Vec<InducedModule> =
            lags.iter().map(|l| grp.induce(l)).collect::<Result<_>>()?;
        let nl = lags.len();
        let mut sys = CanonicalSystem {
            grp: grp.clone(),
            basepoint: basepoint.clone(),
            lags,
            index,
            modules,
            c: Vec::new(),
            base,
            t_cache: (0..nl * nl).map(|_| OnceLock::new()).collect(),
            kappa_cache: Mutex::new(HashMap::new()),
            stats: SolveStats::default(),
        };
        sys.c = sys.solve_scalars()?;
        Ok(sys)
    }

    fn solve_scalars(&mut self) -> Result<Vec<CycNum>> {
        let m = self.grp.base().clone();
        let gens = m.transvection_generators();
        let nl = self.lags.len();
        let b = self.base;
        let eb = self.basepoint.eps as i64;

        // x_{gN} = s · x_N · x_{gB} · κ(gN, gB, B), one equation per (g, N)
        struct Eq {
            gn: usize,
            n: usize,
            gb: usize,
            k: CycNum,
        }
        let mut eqs = Vec::with_capacity(gens.len() * nl);
        for g in &gens {
            let (gb, sb) = self.act_plus(g, b)?;
            for n in 0..nl {
                let (gn, sn) = self.act_plus(g, n)?;
                let kappa = self.kappa(gn, gb, b)?;
                let sign = sn * sb * eb;
                eqs.push(Eq {
                    gn,
                    n,
                    gb,
                    k: kappa.scale(&BigRational::from_integer(BigInt::from(sign))),
                });
            }
        }
        self.stats.lagrangians = nl;
        self.stats.generators = gens.len();
        self.stats.equations = eqs.len();

        let mut val: Vec<Option<SymVal>> = vec![None; nl];
        val[b] = Some(SymVal {
            k: CycNum::from_integer(1, eb),
            v: vec![],
        });
        let mut done = vec![false; eqs.len()];
        let mut nsym = 0usize;
        let mut relations: Vec<SymVal> = Vec::new();
        loop {
            let mut progress = true;
            while progress {
                progress = false;
                for (ei, e) in eqs.iter().enumerate() {
                    if done[ei] {
                        continue;
                    }
                    // log form: [gn] − [n] − [gb] = log k
                    let mut coef: Vec<(usize, i64)> = Vec::new();
                    for (u, s) in [(e.gn, 1i64), (e.n, -1), (e.gb, -1)] {
                        match coef.iter_mut().find(|(w, _)| *w == u) {
                            Some((_, c)) => *c += s,
                            None => coef.push((u, s)),
                        }
                    }
                    coef.retain(|&(_, c)| c != 0);
                    let unknown: Vec<(usize, i64)> = coef
                        .iter()
                        .copied()
                        .filter(|(u, _)| val[*u].is_none())
                        .collect();
                    match unknown.len() {
                        0 => {
                            // Π x_u^{c_u} / k = 1
                            let mut acc = SymVal {
                                k: CycNum::one(1),
                                v: vec![],
                            };
                            for &(u, c) in &coef {
                                for _ in 0..c.abs() {
                                    acc = acc.mul(val[u].as_ref().unwrap(), c.signum())?;
                                }
                            }
                            acc = acc.mul(
                                &SymVal {
                                    k: e.k.clone(),
                                    v: vec![],
                                },
                                -1,
                            )?;
                            if acc.is_constant() {
                                if !acc.k.is_one() {
                                    return Err(Error::Inconsistent(format!(
                                        "equation for lagrangians ({}, {}, {}) gives 1 = {}",
                                        e.gn, e.n, e.gb, acc.k
                                    )));
                                }
                            } else {
                                relations.push(acc);
                            }
                            done[ei] = true;
                            progress = true;
                        }
                        1 if unknown[0].1.abs() == 1 => {
                            let (u, cu) = unknown[0];
                            // x_u^{cu} = k · Π_{w≠u} x_w^{−c_w}
                            let mut acc = SymVal {
                                k: e.k.clone(),
                                v: vec![],
                            };
                            for &(w, c) in &coef {
                                if w != u {
                                    for _ in 0..c.abs() {
                                        acc = acc.mul(val[w].as_ref().unwrap(), -c.signum())?;
                                    }
                                }
                            }
                            if cu < 0 {
                                acc = SymVal {
                                    k: acc.k.inverse()?,
                                    v: acc.v.iter().map(|x| -x).collect(),
                                };
                            }
                            val[u] = Some(acc);
                            done[ei] = true;
                            progress = true;
                        }
                        _ => {}
                    }
                }
            }
            match (0..nl).find(|&u| val[u].is_none()) {
                Some(u) => {
                    let mut v = vec![0; nsym + 1];
                    v[nsym] = 1;
                    nsym += 1;
                    val[u] = Some(SymVal {
                        k: CycNum::one(1),
                        v,
                    });
                }
                None => break,
            }
        }
        self.stats.symbols = nsym;
        self.stats.relations = relations.len();
        let mut lattice = RelationLattice::new(nsym);
        for r in relations {
            // t^v · k = 1  ⇔  t^v = 1/k
            lattice.insert(r.v, r.k.inverse()?)?;
        }
        let t = lattice.solve()?;
        val.into_iter()
            .map(|x| {
                let x = x.unwrap();
                let mut k = x.k;
                for (j, &e) in x.v.iter().enumerate() {
                    if e != 0 {
                        k = &k * &t[j].pow(e)?;
                    }
                }
                Ok(k)
            })
            .collect()
    }

    /// g(L_i, +1) = (L_j, s).
    fn act_plus(&self, g: &SympAut, i: usize) -> Result<(usize, i64)> {
        let img = self.grp.base().act_enhanced(
            g,
            &EnhLag {
                lag: self.lags[i].clone(),
                eps: 1,
            },
        )?;
        let j = self.index[&img.lag];
        Ok((j, img.eps as i64))
    }

    pub fn grp(&self) -> &HeisGrp {
        &self.grp
    }

    pub fn module(&self) -> &SympMod {
        self.grp.base()
    }

    pub fn basepoint(&self) -> &EnhLag {
        &self.basepoint
    }

    pub fn lagrangians(&self) -> &[Lagrangian] {
        &self.lags
    }

    pub fn index_of(&self, l: &Lagrangian) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn induced(&self, i: usize) -> &InducedModule {
        &self.modules[i]
    }

    /// T_{L_i, L_j}.
    pub fn t(&self, i: usize, j: usize) -> &ZMat {
        let nl = self.lags.len();
        self.t_cache[i * nl + j].get_or_init(|| standard_t(&self.modules[i], &self.modules[j]))
    }

    /// κ(i, j, k) with T_{ij} T_{jk} = κ T_{ik}.
    pub fn kappa(&self, i: usize, j: usize, k: usize) -> Result<CycNum> {
        if let Some(v) = self.kappa_cache.lock().unwrap().get(&(i, j, k)) {
            return Ok(v.clone());
        }
        let v = composition_ratio(self.t(i, j), self.t(j, k), self.t(i, k))?;
        self.kappa_cache
            .lock()
            .unwrap()
            .insert((i, j, k), v.clone());
        Ok(v)
    }

    /// c(L⁰) with F_{L⁰,B⁰} = c(L⁰) T_{L,B}.
    pub fn normalizer(&self, l0: &EnhLag) -> CycNum {
        let i = self.index[&l0.lag];
        if l0.eps > 0 {
            self.c[i].clone()
        } else {
            -&self.c[i]
        }
    }

    /// a(N⁰, L⁰) with F_{N⁰,L⁰} = a · T_{N,L}.
    pub fn scalar(&self, n0: &EnhLag, l0: &EnhLag) -> CycNum {
        let (n, l, b) = (self.index[&n0.lag], self.index[&l0.lag], self.base);
        let ratio = self
            .normalizer(n0)
            .checked_div(&self.normalizer(l0))
            .unwrap();
        let num = self.kappa(n, b, l).unwrap();
        let den = self.kappa(b, l, b).unwrap();
        &ratio * &num.checked_div(&den).unwrap()
    }

    pub fn field(&self) -> Subfield {
        let p = self.grp.base().n();
        let mut gens = vec![root_of_unity(self.grp.center(), 1)];
        if p > 1 {
            gens.push(sqrt_prime(p).unwrap());
        }
        Subfield::generated_by(&gens, self.grp.center())
    }

    /// The table as JSON, keyed by canonical enhanced-lagrangian identifiers;
    /// independent of the basepoint.
    pub fn table(&self) -> Vec<TableEntry> {
        family_table(self)
    }

    pub fn export(&self) -> CanonicalSystemExport {
        CanonicalSystemExport {
            module: self.grp.base().clone(),
            module_hash: module_hash(self.grp.base()),
            basepoint: self.basepoint.clone(),
            enhanced: self.enhanced(),
            table: self.table(),
        }
    }
}

impl IntertwinerFamily for CanonicalSystem {
    fn grp(&self) -> &HeisGrp {
        &self.grp
    }

    fn enhanced(&self) -> Vec<EnhLag> {
        self.lags
            .iter()
            .flat_map(|l| {
                [1i8, -1].map(|eps| EnhLag {
                    lag: l.clone(),
                    eps,
                })
            })
            .collect()
    }

    fn lag_index(&self, l0: &EnhLag) -> usize {
        self.index[&l0.lag]
    }

    fn module(&self, i: usize) -> &InducedModule {
        &self.modules[i]
    }

    fn operator(&self, n0: &EnhLag, l0: &EnhLag) -> ScaledMat {
        let (n, l) = (self.index[&n0.lag], self.index[&l0.lag]);
        ScaledMat::new(self.scalar(n0, l0), self.t(n, l).clone())
    }

    fn act(&self, g: &SympAut, l0: &EnhLag) -> EnhLag {
        self.grp.base().act_enhanced(g, l0).unwrap()
    }

    fn transport(&self, g: &SympAut, g_inv: &SympAut, i: usize) -> (usize, Monomial) {
        let gl = self.lags[i].image(|x| g.apply(x));
        let j = self.index[&gl];
        (j, self.modules[i].transport_into(&self.modules[j], g_inv))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub target: String,
    pub source: String,
    pub matrix: DenseMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSystemExport {
    pub module: SympMod,
    pub module_hash: String,
    pub basepoint: EnhLag,
    pub enhanced: Vec<EnhLag>,
    pub table: Vec<TableEntry>,
}

/// Every operator of a family, in the order of its enhanced points.
pub fn family_table<F: IntertwinerFamily>(fam: &F) -> Vec<TableEntry> {
    let pts = fam.enhanced();
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for n0 in &pts {
        for l0 in &pts {
            out.push(TableEntry {
                target: n0.key(),
                source: l0.key(),
                matrix: DenseMatrix::from(&fam.operator(n0, l0)),
            });
        }
    }
    out
}

/// SHA-256 of the module's canonical JSON.
pub fn module_hash(m: &SympMod) -> String {
    let bytes = serde_json::to_vec(m).expect("module serializes");
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abgroup::Subgroup;
    use crate::symplectic::standard_module;

    fn plane(p: u64) -> (HeisGrp, Vec<Lagrangian>) {
        let m = standard_module(&[(p, 1)]).unwrap();
        let ls = m.enumerate_lagrangians(None).unwrap();
        (HeisGrp::new(m), ls)
    }

    #[test]
    fn t_is_identity_on_the_diagonal() {
        let (h, ls) = plane(3);
        for l in &ls {
            let v = h.induce(l).unwrap();
            assert_eq!(standard_t(&v, &v), ZMat::identity(3, 3));
        }
    }

    #[test]
    fn transverse_t_is_fourier() {
        let (h, _) = plane(3);
        let g = h.base().group();
        let l = h
            .induce(&Subgroup::from_gens(g, &[vec![1, 0]]).unwrap())
            .unwrap();
        let n = h
            .induce(&Subgroup::from_gens(g, &[vec![0, 1]]).unwrap())
            .unwrap();
        let t = standard_t(&n, &l);
        // rows: reps of M/N are (x, 0); columns: reps of M/L are (0, t)
        for x in 0..3i64 {
            for s in 0..3i64 {
                assert_eq!(t.entry(x as usize, s as usize), root_of_unity(3, -x * s));
            }
        }
        for v in h.elements() {
            assert_eq!(t.left_monomial(&n.rho(&v)), t.right_monomial(&l.rho(&v)));
        }
    }

    #[test]
    fn composition_scalar_is_p_for_transverse_planes() {
        for p in [3u64, 5] {
            let (h, _) = plane(p);
            let g = h.base().group();
            let l = h
                .induce(&Subgroup::from_gens(g, &[vec![1, 0]]).unwrap())
                .unwrap();
            let n = h
                .induce(&Subgroup::from_gens(g, &[vec![0, 1]]).unwrap())
                .unwrap();
            assert_eq!(
                composition_scalar(&n, &l),
                CycNum::from_integer(1, p as i64)
            );
            assert_eq!(composition_scalar(&l, &l), CycNum::one(1));
        }
    }

    #[test]
    fn hom_dims() {
        let (h, ls) = plane(3);
        let mods: Vec<InducedModule> = ls.iter().map(|l| h.induce(l).unwrap()).collect();
        for a in &mods {
            for b in &mods {
                assert_eq!(hom_dim(&generator_action(a), &generator_action(b)), 1);
            }
            let doubled: Vec<Monomial> = generator_action(a)
                .iter()
                .map(|m| m.direct_sum(m))
                .collect();
            assert_eq!(hom_dim(&generator_action(a), &doubled), 2);
        }
    }

    #[test]
    fn kernel_round_trip() {
        let (h, _) = plane(3);
        let g = h.base().group();
        let l = h
            .induce(&Subgroup::from_gens(g, &[vec![1, 0]]).unwrap())
            .unwrap();
        let n = h
            .induce(&Subgroup::from_gens(g, &[vec![0, 1]]).unwrap())
            .unwrap();
        let f = ScaledMat::new(CycNum::one(1), standard_t(&n, &l));
        let k = kernel_of(&f, &n, &l);
        assert_eq!(k.values.len(), 27);
        assert_eq!(operator_from_kernel(&k, &n, &l).unwrap(), f);
        let id = ScaledMat::identity(3, 3);
        let k = kernel_of(&id, &l, &l);
        for (x, v) in h.elements().zip(&k.values) {
            let on_l = l.lag().contains(&x.m);
            assert_eq!(v.is_zero(), !on_l);
        }
        let mut bad = k.clone();
        bad.values[1] = CycNum::from_integer(1, 5);
        assert!(operator_from_kernel(&bad, &l, &l).is_err());
    }

    #[test]
    fn solves_the_plane() {
        let (h, ls) = plane(3);
        let b = EnhLag {
            lag: ls[0].clone(),
            eps: 1,
        };
        let sys = CanonicalSystem::solve(&h, &b, None).unwrap();
        assert_eq!(sys.enhanced().len(), 8);
        let gs = h.base().enumerate_sp(None).unwrap();
        for r in crate::verify::axiom_suite(&sys, &gs, None) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn zero_module_system() {
        let h = HeisGrp::new(SympMod::zero());
        let l = Subgroup::zero(h.base().group());
        let b = EnhLag {
            lag: l.clone(),
            eps: 1,
        };
        let sys = CanonicalSystem::solve(&h, &b, None).unwrap();
        let minus = EnhLag { lag: l, eps: -1 };
        assert!(sys.operator(&b, &b).is_identity());
        assert_eq!(
            sys.operator(&minus, &b),
            ScaledMat::identity(1, 1).scaled(&CycNum::from_integer(1, -1))
        );
    }
}
