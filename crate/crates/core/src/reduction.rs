//! Reduction of a p-primary module to an F_p-symplectic space.
//!
//! The canonical isotropic subgroup S is built by the recursion S_1 = p^{r'}M,
//! r' = ⌈r/2⌉, on S_1^⊥/S_1. Then M_c = S^⊥/S has exponent p, and canonical
//! intertwiners on M_c lift to M through the S-invariants of the induced modules.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::abgroup::{Elem, SubQuotient, Subgroup};
use crate::cyclo::CycNum;
use crate::cycmat::{Monomial, ScaledMat, ZMat};
use crate::error::{invalid, Error, Result};
use crate::heisenberg::{HElem, HeisGrp, InducedModule};
use crate::intertwine::{standard_t, CanonicalSystem};
use crate::symplectic::{EnhLag, Lagrangian, SympAut, SympMod};
use crate::verify::IntertwinerFamily;

/// The unique prime dividing |M|, if M is a nontrivial p-group for odd p.
fn odd_prime_of(m: &SympMod) -> Result<Option<u64>> {
    let primes = m.primes();
    match primes.as_slice() {
        [] => Ok(None),
        [p] if *p == 2 => Err(Error::EvenOrder("the module has even order".into())),
        [p] => Ok(Some(*p)),
        _ => invalid("module is not p-primary"),
    }
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut r = 0;
    while n % p == 0 {
        n /= p;
        r += 1;
    }
    r
}

/// S together with the exponents r_s met along the recursion.
pub fn canonical_isotropic(m: &SympMod) -> Result<(Subgroup, Vec<u32>)> {
    let g = m.group();
    let Some(p) = odd_prime_of(m)? else {
        return Ok((Subgroup::zero(g), vec![0]));
    };
    let r = valuation(g.exponent(), p);
    if r <= 1 {
        return Ok((Subgroup::zero(g), vec![r]));
    }
    let r1 = r.div_ceil(2);
    let s1 = Subgroup::whole(g).scaled((p as i64).pow(r1));
    let red = m.induced_form(&s1)?;
    let (s_prime, rest) = canonical_isotropic(&red.module)?;
    let mut gens = s1.gens();
    gens.extend(s_prime.gens().iter().map(|x| red.quotient.sec(x)));
    let s = Subgroup::from_gens(g, &gens)?;
    let mut chain = vec![r];
    chain.extend(rest);
    Ok((s, chain))
}

/// JSON output of `reduce`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceExport {
    #[serde(rename = "S")]
    pub s: Subgroup,
    #[serde(rename = "Mc")]
    pub mc: SympMod,
    pub exponent_chain: Vec<u32>,
}

/// S, S^⊥, M_c = S^⊥/S and the reduced Heisenberg group.
///
/// H_c is M_c × μ_n with cocycle (n/p)β_c, so that α_S(m, a) = (m mod S, a)
/// is a homomorphism S^⊥ × μ_n → H_c.
#[derive(Clone, Debug)]
pub struct ReductionData {
    grp: HeisGrp,
    p: u64,
    s: Subgroup,
    perp: Subgroup,
    quotient: SubQuotient,
    mc: SympMod,
    hc: HeisGrp,
    chain: Vec<u32>,
}

impl ReductionData {
    /// `grp` must have a p-primary base (or zero base) and center its exponent.
    pub fn new(grp: &HeisGrp) -> Result<ReductionData> {
        let m = grp.base();
        let p = odd_prime_of(m)?.unwrap_or(1);
        if grp.center() != m.n() {
            return invalid("reduction expects the center to equal the exponent");
        }
        let (s, chain) = canonical_isotropic(m)?;
        let red = m.induced_form(&s)?;
        if red.module.rank() > 0 && red.module.elementary_prime() != Some(p) {
            return Err(Error::Defect("S^⊥/S is not an F_p-vector space".into()));
        }
        let hc = HeisGrp::with_center(red.module.clone(), grp.center())?;
        Ok(ReductionData {
            grp: grp.clone(),
            p,
            perp: m.orth_complement(&s),
            s,
            quotient: red.quotient,
            mc: red.module,
            hc,
            chain,
        })
    }

    pub fn grp(&self) -> &HeisGrp {
        &self.grp
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> &Subgroup {
        &self.s
    }

    pub fn perp(&self) -> &Subgroup {
        &self.perp
    }

    pub fn mc(&self) -> &SympMod {
        &self.mc
    }

    pub fn hc(&self) -> &HeisGrp {
        &self.hc
    }

    pub fn exponent_chain(&self) -> &[u32] {
        &self.chain
    }

    /// m mod S in M_c coordinates; m must lie in S^⊥.
    pub fn project(&self, m: &[i64]) -> Result<Elem> {
        if !self.perp.contains(m) {
            return invalid("element does not lie in S^⊥");
        }
        Ok(self.quotient.proj(m))
    }

    /// The lex-minimal lift in S^⊥ of an element of M_c.
    pub fn section(&self, x: &[i64]) -> Elem {
        self.quotient.sec(x)
    }

    /// α_S on H^S = S^⊥ × μ_n.
    pub fn alpha(&self, h: &HElem) -> Result<HElem> {
        Ok(self.hc.elem(self.project(&h.m)?, h.a))
    }

    /// The preimage of L_c in S^⊥.
    pub fn lag_lift(&self, lc: &Lagrangian) -> Lagrangian {
        let mut gens = self.s.gens();
        gens.extend(lc.gens().iter().map(|x| self.section(x)));
        Subgroup::from_gens(self.grp.base().group(), &gens).expect("lift of a subgroup")
    }

    /// L/S for S ⊂ L ⊂ S^⊥.
    pub fn lag_project(&self, l: &Lagrangian) -> Result<Lagrangian> {
        if !l.contains_subgroup(&self.s) || !self.perp.contains_subgroup(l) {
            return invalid("lagrangian does not lie between S and S^⊥");
        }
        let gens: Vec<Elem> = l.gens().iter().map(|x| self.quotient.proj(x)).collect();
        Subgroup::from_gens(self.mc.group(), &gens)
    }

    /// The automorphism of M_c induced by g.
    pub fn g_to_gc(&self, g: &SympAut) -> Result<SympAut> {
        if self.s.image(|x| g.apply(x)) != self.s {
            return Err(Error::Defect("automorphism does not preserve S".into()));
        }
        let images = (0..self.mc.rank())
            .map(|i| {
                self.quotient
                    .proj(&g.apply(&self.section(&self.mc.group().basis(i))))
            })
            .collect();
        self.mc.aut(images)
    }

    /// τ: ℋ_{L_c} → ℋ_L, f ↦ f∘α_S extended by zero, with L = lag_lift(L_c).
    ///
    /// Returns the module ℋ_L (over H) and the matrix of τ.
    pub fn tau(&self, lc: &Lagrangian) -> Result<(InducedModule, ZMat)> {
        let hl = self.grp.induce(&self.lag_lift(lc))?;
        let hlc = self.hc.induce(lc)?;
        let mut t = ZMat::zeros(self.grp.center(), hl.dim(), hlc.dim());
        for (i, r) in hl.reps().iter().enumerate() {
            if !self.perp.contains(r) {
                continue;
            }
            let (j, e) = hlc.evaluate(&self.quotient.proj(r), 0);
            t.set_root(i, j, e);
        }
        Ok((hl, t))
    }

    pub fn export(&self) -> ReduceExport {
        ReduceExport {
            s: self.s.clone(),
            mc: self.mc.clone(),
            exponent_chain: self.chain.clone(),
        }
    }
}

/// The canonical system of M_c lifted to M: ℱ_{N⁰,L⁰} = λ(N⁰,L⁰)·T_{N,L}, the
/// unique intertwiner with ℱ∘τ_L = τ_N∘F_{N⁰,L⁰}. Indexed by enhanced
/// lagrangians of M_c.
pub struct LiftedSystem {
    red: Arc<ReductionData>,
    sys: CanonicalSystem,
    modules: Vec<InducedModule>,
    taus: Vec<ZMat>,
    t_cache: Vec<OnceLock<ZMat>>,
    nu_cache: Vec<OnceLock<CycNum>>,
}

impl std::fmt::Debug for LiftedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiftedSystem")
            .field("system", &self.sys)
            .field("lifted", &self.modules.len())
            .finish()
    }
}

impl LiftedSystem {
    pub fn new(
        red: Arc<ReductionData>,
        basepoint: &EnhLag,
        budget: Option<u64>,
    ) -> Result<LiftedSystem> {
        let sys = CanonicalSystem::solve(red.hc(), basepoint, budget)?;
        let mut modules = Vec::new();
        let mut taus = Vec::new();
        for lc in sys.lagrangians() {
            let (hl, t) = red.tau(lc)?;
            modules.push(hl);
            taus.push(t);
        }
        let nl = modules.len();
        Ok(LiftedSystem {
            red,
            sys,
            modules,
            taus,
            t_cache: (0..nl * nl).map(|_| OnceLock::new()).collect(),
            nu_cache: (0..nl * nl).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn reduction(&self) -> &ReductionData {
        &self.red
    }

    pub fn reduced_system(&self) -> &CanonicalSystem {
        &self.sys
    }

    pub fn tau(&self, i: usize) -> &ZMat {
        &self.taus[i]
    }

    /// T_{N,L} on the lifted lagrangians.
    pub fn t(&self, i: usize, j: usize) -> &ZMat {
        let nl = self.modules.len();
        self.t_cache[i * nl + j].get_or_init(|| standard_t(&self.modules[i], &self.modules[j]))
    }

    /// ν with τ_N T^c_{N,L} = ν · T_{N,L} τ_L.
    pub fn nu(&self, i: usize, j: usize) -> Result<CycNum> {
        let nl = self.modules.len();
        if let Some(v) = self.nu_cache[i * nl + j].get() {
            return Ok(v.clone());
        }
        let lhs = self.taus[i].mul(self.sys.t(i, j));
        let rhs = self.t(i, j).mul(&self.taus[j]);
        if rhs.is_zero() {
            return Err(Error::Defect(
                "lifted intertwiner vanishes on S-invariants".into(),
            ));
        }
        let v = lhs
            .ratio_to(&rhs)
            .ok_or_else(|| Error::Defect("S-invariants do not determine the lift".into()))?;
        Ok(self.nu_cache[i * nl + j].get_or_init(|| v).clone())
    }

    /// λ(N⁰, L⁰) with ℱ = λ T_{N,L}.
    pub fn scalar(&self, n0: &EnhLag, l0: &EnhLag) -> Result<CycNum> {
        let (i, j) = (self.lag_index(n0), self.lag_index(l0));
        Ok(&self.sys.scalar(n0, l0) * &self.nu(i, j)?)
    }

    /// All ν, computed eagerly; surfaces any defect as an error.
    pub fn check_lifts(&self) -> Result<()> {
        use rayon::prelude::*;
        let nl = self.modules.len();
        (0..nl * nl)
            .into_par_iter()
            .try_for_each(|k| self.nu(k / nl, k % nl).map(|_| ()))
    }
}

impl IntertwinerFamily for LiftedSystem {
    fn grp(&self) -> &HeisGrp {
        self.red.grp()
    }

    fn enhanced(&self) -> Vec<EnhLag> {
        self.sys.enhanced()
    }

    fn lag_index(&self, l0: &EnhLag) -> usize {
        self.sys.lag_index(l0)
    }

    fn module(&self, i: usize) -> &InducedModule {
        &self.modules[i]
    }

    fn operator(&self, n0: &EnhLag, l0: &EnhLag) -> ScaledMat {
        let (i, j) = (self.lag_index(n0), self.lag_index(l0));
        ScaledMat::new(
            self.scalar(n0, l0).expect("lift defect"),
            self.t(i, j).clone(),
        )
    }

    /// g acts on the enhanced points of M_c through g_c.
    fn act(&self, g: &SympAut, l0: &EnhLag) -> EnhLag {
        let gc = self.red.g_to_gc(g).expect("g preserves S");
        self.sys.act(&gc, l0)
    }

    fn transport(&self, g: &SympAut, g_inv: &SympAut, i: usize) -> (usize, Monomial) {
        let gl = self.modules[i].lag().image(|x| g.apply(x));
        let glc = self.red.lag_project(&gl).expect("g preserves S^⊥");
        let j = self.sys.index_of(&glc).expect("image lagrangian");
        (j, self.modules[i].transport_into(&self.modules[j], g_inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::standard_module;

    fn red(blocks: &[(u64, u64)]) -> ReductionData {
        ReductionData::new(&HeisGrp::new(standard_module(blocks).unwrap())).unwrap()
    }

    #[test]
    fn elementary_module_has_trivial_s() {
        let r = red(&[(3, 2)]);
        assert_eq!(r.s().order(), 1);
        assert_eq!(r.mc().order(), 81);
        assert_eq!(r.exponent_chain(), &[1]);
    }

    #[test]
    fn z27_squared() {
        let r = red(&[(27, 1)]);
        let g = r.grp().base().group();
        assert_eq!(r.s(), &Subgroup::whole(g).scaled(9));
        assert_eq!(r.mc().order(), 9);
        assert_eq!(r.mc().elementary_prime(), Some(3));
        assert_eq!(r.exponent_chain(), &[3, 1]);
    }

    #[test]
    fn alpha_is_a_homomorphism() {
        let r = red(&[(9, 1), (3, 1)]);
        let h = r.grp();
        let pts: Vec<HElem> = h
            .elements()
            .filter(|x| r.perp().contains(&x.m))
            .step_by(7)
            .collect();
        for x in &pts {
            for y in pts.iter().step_by(5) {
                let lhs = r.alpha(&h.product(x, y)).unwrap();
                let rhs = r.hc().product(&r.alpha(x).unwrap(), &r.alpha(y).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn lag_lift_round_trips() {
        let r = red(&[(9, 1), (3, 1)]);
        for lc in r.mc().enumerate_lagrangians(None).unwrap() {
            let l = r.lag_lift(&lc);
            assert!(r.grp().base().is_lagrangian(&l));
            assert_eq!(r.lag_project(&l).unwrap(), lc);
        }
    }
}
