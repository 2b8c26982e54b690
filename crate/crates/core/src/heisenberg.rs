//! The Heisenberg group H = M × μ_c and its induced modules ℋ_L.

use serde::{Deserialize, Serialize};

use crate::abgroup::{primary_component, Elem, Subgroup, SubgroupIso};
use crate::cyclo::{root_of_unity, CycNum};
use crate::cycmat::{DenseMatrix, Monomial};
use crate::error::{invalid, Result};
use crate::symplectic::{Lagrangian, SympAut, SympMod};

/// (m, a) with a the exponent of ζ_c; serialized as `[m, a]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(Elem, i64)", into = "(Elem, i64)")]
pub struct HElem {
    pub m: Elem,
    pub a: i64,
}

impl From<(Elem, i64)> for HElem {
    fn from((m, a): (Elem, i64)) -> HElem {
        HElem { m, a }
    }
}

impl From<HElem> for (Elem, i64) {
    fn from(h: HElem) -> (Elem, i64) {
        (h.m, h.a)
    }
}

/// Central extension of M by μ_c with cocycle (c/n)·β; c is a multiple of n.
///
/// c = n is the Heisenberg group of the module; a larger c arises when a
/// subquotient of M keeps the center of M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeisGrp {
    base: SympMod,
    center: u64,
}

impl HeisGrp {
    pub fn new(base: SympMod) -> HeisGrp {
        let center = base.n();
        HeisGrp { base, center }
    }

    pub fn with_center(base: SympMod, center: u64) -> Result<HeisGrp> {
        if center == 0 || center % base.n() != 0 {
            return invalid("center order must be a multiple of the exponent");
        }
        Ok(HeisGrp { base, center })
    }

    pub fn base(&self) -> &SympMod {
        &self.base
    }

    pub fn center(&self) -> u64 {
        self.center
    }

    pub fn order(&self) -> u64 {
        self.base.order() * self.center
    }

    fn lift_scale(&self) -> i64 {
        (self.center / self.base.n()) as i64
    }

    /// The cocycle, as an exponent of ζ_c.
    pub fn beta(&self, a: &[i64], b: &[i64]) -> i64 {
        (self.lift_scale() * self.base.beta(a, b)).rem_euclid(self.center as i64)
    }

    /// The commutator pairing, as an exponent of ζ_c.
    pub fn pair(&self, a: &[i64], b: &[i64]) -> i64 {
        (self.lift_scale() * self.base.pair(a, b)).rem_euclid(self.center as i64)
    }

    pub fn elem(&self, m: Elem, a: i64) -> HElem {
        HElem {
            m: self.base.group().reduce(&m),
            a: a.rem_euclid(self.center as i64),
        }
    }

    pub fn check(&self, h: &HElem) -> Result<()> {
        self.base.group().check(&h.m)?;
        if h.a < 0 || h.a as u64 >= self.center {
            return invalid(format!("central part {} out of range", h.a));
        }
        Ok(())
    }

    pub fn identity(&self) -> HElem {
        self.elem(self.base.group().zero(), 0)
    }

    pub fn product(&self, x: &HElem, y: &HElem) -> HElem {
        let g = self.base.group();
        self.elem(g.add(&x.m, &y.m), x.a + y.a + self.beta(&x.m, &y.m))
    }

    pub fn inverse(&self, x: &HElem) -> HElem {
        self.elem(self.base.group().neg(&x.m), -x.a)
    }

    pub fn sigma(&self, x: &HElem) -> HElem {
        self.elem(self.base.group().neg(&x.m), x.a)
    }

    pub fn commutator(&self, x: &HElem, y: &HElem) -> HElem {
        let xy = self.product(x, y);
        let xi = self.inverse(x);
        let yi = self.inverse(y);
        self.product(&self.product(&xy, &xi), &yi)
    }

    pub fn act(&self, g: &SympAut, x: &HElem) -> HElem {
        self.elem(g.apply(&x.m), x.a)
    }

    pub fn elements(&self) -> impl Iterator<Item = HElem> + '_ {
        self.base
            .group()
            .elements()
            .flat_map(move |m| (0..self.center as i64).map(move |a| HElem { m: m.clone(), a }))
    }

    /// (e_i, 0) for each basis vector, then (0, 1).
    pub fn generators(&self) -> Vec<HElem> {
        let g = self.base.group();
        let mut out: Vec<HElem> = (0..g.rank()).map(|i| self.elem(g.basis(i), 0)).collect();
        out.push(self.elem(g.zero(), 1));
        out
    }

    pub fn induce(&self, l: &Lagrangian) -> Result<InducedModule> {
        InducedModule::new(self, l)
    }
}

/// The p-primary factor H_p, with the embedding of its base into M.
#[derive(Clone, Debug)]
pub struct PrimaryPart {
    pub p: u64,
    pub grp: HeisGrp,
    iso: SubgroupIso,
    /// n / p^r.
    cofactor: u64,
    /// Idempotent multiplier projecting M onto M_p.
    idem: i64,
    /// Inverse of the cofactor modulo p^r.
    cofactor_inv: i64,
}

impl PrimaryPart {
    pub fn embed(&self, x: &HElem) -> HElem {
        HElem {
            m: self.iso.from_abstract(&x.m),
            a: x.a * self.cofactor as i64,
        }
    }

    /// The M_p-coordinates of the p-part of m.
    pub fn project_base(&self, m: &[i64]) -> Elem {
        let g = self.iso.sub.ambient();
        self.iso.to_abstract(&g.scale(self.idem, m)).unwrap()
    }

    /// The H_p-component of h ∈ H; H is the direct product of these.
    pub fn component(&self, h: &HElem) -> HElem {
        let pr = self.grp.center as i64;
        self.grp.elem(
            self.project_base(&h.m),
            (h.a.rem_euclid(pr) * self.cofactor_inv).rem_euclid(pr),
        )
    }

    /// Restriction of g to M_p, in M_p-coordinates.
    pub fn restrict(&self, g: &SympAut) -> SympAut {
        let base = &self.grp.base;
        let images = (0..base.rank())
            .map(|i| self.project_base(&g.apply(&self.iso.from_abstract(&base.group().basis(i)))))
            .collect();
        base.aut(images).expect("restriction of a symplectic map")
    }
}

/// H_p = the p-primary part of H, realized on M_p in invariant-factor coordinates.
pub fn heis_primary(h: &HeisGrp, p: u64) -> PrimaryPart {
    let base = &h.base;
    let sub = primary_component(base.group(), p);
    let iso = SubgroupIso::new(&sub);
    let mut pr = 1u64;
    while h.center % (pr * p) == 0 {
        pr *= p;
    }
    let n = h.center;
    let cofactor = n / pr;
    // idempotent: ≡ 1 mod p^r, ≡ 0 mod n/p^r
    let inv = crate::arith::mod_inverse(cofactor as i64, pr).unwrap_or(0) as i64;
    let idem = ((cofactor as i128 * inv as i128) % n as i128) as i64;
    let m = iso.group.rank();
    let images: Vec<Elem> = (0..m)
        .map(|i| iso.from_abstract(&iso.group.basis(i)))
        .collect();
    let gram: Vec<Vec<i64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| h.pair(&images[i], &images[j]) / cofactor as i64)
                .collect()
        })
        .collect();
    let pbase = if m == 0 {
        SympMod::zero()
    } else {
        SympMod::new(iso.group.orders().to_vec(), gram).expect("primary part is symplectic")
    };
    let grp = HeisGrp::with_center(pbase, pr).expect("primary center");
    PrimaryPart {
        p,
        grp,
        iso,
        cofactor,
        idem,
        cofactor_inv: inv,
    }
}

/// A character of a lagrangian L with values in Z/c, given on the invariant-factor
/// basis of L.
#[derive(Clone, Debug)]
pub struct LagCharacter {
    iso: SubgroupIso,
    values: Vec<i64>,
    center: u64,
}

impl LagCharacter {
    pub fn trivial(grp: &HeisGrp, l: &Lagrangian) -> LagCharacter {
        let iso = SubgroupIso::new(l);
        let values = vec![0; iso.group.rank()];
        LagCharacter {
            iso,
            values,
            center: grp.center,
        }
    }

    pub fn new(grp: &HeisGrp, l: &Lagrangian, values: Vec<i64>) -> Result<LagCharacter> {
        let iso = SubgroupIso::new(l);
        if values.len() != iso.group.rank() {
            return invalid("one value per invariant factor of L is required");
        }
        let c = grp.center as i64;
        for (v, &d) in values.iter().zip(iso.group.orders()) {
            if (v * d as i64).rem_euclid(c) != 0 {
                return invalid("theta is not a homomorphism");
            }
        }
        Ok(LagCharacter {
            iso,
            values,
            center: grp.center,
        })
    }

    pub fn theta(&self, l: &[i64]) -> Result<i64> {
        let x = self.iso.to_abstract(l)?;
        let s: i64 = x.iter().zip(&self.values).map(|(a, b)| a * b).sum();
        Ok(s.rem_euclid(self.center as i64))
    }

    /// χ_L(l, a) = ζ_c^a · θ(l), as an exponent of ζ_c.
    pub fn chi_exponent(&self, x: &HElem) -> Result<i64> {
        Ok((x.a + self.theta(&x.m)?).rem_euclid(self.center as i64))
    }

    pub fn chi(&self, x: &HElem) -> Result<CycNum> {
        Ok(root_of_unity(self.center, self.chi_exponent(x)?))
    }
}

/// ℋ_L = {f : H → K | f(l̄h) = χ_L(l̄) f(h)} with θ trivial, in the basis of
/// functions supported on L̄·(r, 0) for the lexicographic coset representatives r.
#[derive(Clone, Debug)]
pub struct InducedModule {
    grp: HeisGrp,
    lag: Lagrangian,
    reps: Vec<Elem>,
}

impl InducedModule {
    pub fn new(grp: &HeisGrp, l: &Lagrangian) -> Result<InducedModule> {
        if !grp.base.is_lagrangian(l) {
            return invalid("subgroup is not lagrangian");
        }
        Ok(InducedModule {
            grp: grp.clone(),
            lag: l.clone(),
            reps: l.coset_reps(),
        })
    }

    pub fn grp(&self) -> &HeisGrp {
        &self.grp
    }

    pub fn lag(&self) -> &Lagrangian {
        &self.lag
    }

    pub fn reps(&self) -> &[Elem] {
        &self.reps
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Index of the basis vector attached to the coset of m.
    pub fn index_of(&self, m: &[i64]) -> usize {
        self.lag.coset_index(&self.lag.reduce_coset(m))
    }

    /// Value f(m, a) of the basis-coordinate vector φ, as (index, exponent of ζ_c):
    /// f(m, a) = ζ_c^{a − β(m, r)} φ(r) with r the representative of m + L.
    pub fn evaluate(&self, m: &[i64], a: i64) -> (usize, i64) {
        let r = self.lag.reduce_coset(m);
        let e = (a - self.grp.beta(m, &r)).rem_euclid(self.grp.center as i64);
        (self.lag.coset_index(&r), e)
    }

    /// ρ(h) for right translation (ρ(h)f)(x) = f(xh).
    pub fn rho(&self, h: &HElem) -> Monomial {
        let c = self.grp.center as i64;
        let g = self.grp.base.group();
        let mut col = Vec::with_capacity(self.dim());
        let mut phase = Vec::with_capacity(self.dim());
        for r in &self.reps {
            let x = g.add(r, &h.m);
            let (j, e) = self.evaluate(&x, h.a + self.grp.beta(r, &h.m));
            col.push(j);
            phase.push(e.rem_euclid(c) as u64);
        }
        Monomial {
            order: self.grp.center,
            col,
            phase,
        }
    }

    /// Transport f ↦ (h ↦ f(g^{-1}h)) from ℋ_L to ℋ_{gL}; returns ℋ_{gL} as well.
    pub fn transport(&self, g: &SympAut) -> (InducedModule, Monomial) {
        self.transport_with_inverse(g, &g.inverse())
    }

    pub fn transport_with_inverse(
        &self,
        g: &SympAut,
        g_inv: &SympAut,
    ) -> (InducedModule, Monomial) {
        let gl = self.lag.image(|x| g.apply(x));
        let target = InducedModule {
            grp: self.grp.clone(),
            reps: gl.coset_reps(),
            lag: gl,
        };
        let mono = self.transport_into(&target, g_inv);
        (target, mono)
    }

    /// Transport matrix into a module over gL, given g^{-1}.
    pub fn transport_into(&self, target: &InducedModule, g_inv: &SympAut) -> Monomial {
        let c = self.grp.center;
        let mut col = Vec::with_capacity(self.dim());
        let mut phase = Vec::with_capacity(self.dim());
        for s in &target.reps {
            let x = g_inv.apply(s);
            let (j, e) = self.evaluate(&x, 0);
            col.push(j);
            phase.push(e as u64);
        }
        Monomial {
            order: c,
            col,
            phase,
        }
    }

    pub fn export(&self) -> InducedExport {
        InducedExport {
            lagrangian: self.lag.clone(),
            dim: self.dim(),
            generators: self
                .grp
                .generators()
                .into_iter()
                .map(|h| GeneratorMatrix {
                    matrix: DenseMatrix::from(&self.rho(&h)),
                    element: h,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub element: HElem,
    pub matrix: DenseMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedExport {
    pub lagrangian: Subgroup,
    pub dim: usize,
    pub generators: Vec<GeneratorMatrix>,
}
