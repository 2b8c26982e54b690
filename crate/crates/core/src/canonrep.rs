//! The canonical representation π of H ⋊ Sp(M).
//!
//! π is realized on ℋ_{L_B} for a basepoint B⁰: ρ(h) is right translation and
//! ρ(g) = g_* ∘ ℱ_{g⁻¹B⁰, B⁰}. For composite n it is the tensor product of the
//! primary factors.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo::{root_of_unity, CycNum, Subfield};
use crate::cycmat::{DenseMatrix, Monomial, ScaledMat};
use crate::error::{invalid, Error, Result};
use crate::heisenberg::{heis_primary, GeneratorMatrix, HElem, HeisGrp, PrimaryPart};
use crate::intertwine::{family_table, generator_action, hom_dim, TableEntry};
use crate::reduction::{LiftedSystem, ReductionData};
use crate::symplectic::{EnhLag, SympAut, SympMod};
use crate::verify::{some_entry_outside, IntertwinerFamily, SuiteReport};

/// One primary factor π_p.
#[derive(Debug)]
pub struct Factor {
    /// None when M is already p-primary.
    part: Option<PrimaryPart>,
    fam: LiftedSystem,
    base: EnhLag,
    base_index: usize,
}

impl Factor {
    fn build(
        grp: &HeisGrp,
        part: Option<PrimaryPart>,
        base: usize,
        budget: Option<u64>,
    ) -> Result<Factor> {
        let local = part.as_ref().map_or(grp, |pp| &pp.grp);
        let red = Arc::new(ReductionData::new(local)?);
        let lags = red.mc().enumerate_lagrangians(budget)?;
        let count = 2 * lags.len();
        if base >= count {
            return invalid(format!("basepoint index {base} out of range (0..{count})"));
        }
        let b = EnhLag {
            lag: lags[base / 2].clone(),
            eps: if base % 2 == 0 { 1 } else { -1 },
        };
        let fam = LiftedSystem::new(red, &b, budget)?;
        fam.check_lifts()?;
        let base_index = fam.lag_index(&b);
        Ok(Factor {
            part,
            fam,
            base: b,
            base_index,
        })
    }

    pub fn prime(&self) -> u64 {
        self.fam.reduction().prime()
    }

    pub fn family(&self) -> &LiftedSystem {
        &self.fam
    }

    pub fn basepoint(&self) -> &EnhLag {
        &self.base
    }

    pub fn grp(&self) -> &HeisGrp {
        self.fam.grp()
    }

    fn local_h(&self, h: &HElem) -> HElem {
        match &self.part {
            Some(pp) => pp.component(h),
            None => h.clone(),
        }
    }

    fn local_g(&self, g: &SympAut) -> SympAut {
        match &self.part {
            Some(pp) => pp.restrict(g),
            None => g.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.fam.module(self.base_index).dim()
    }

    /// ρ_p on H_p.
    pub fn rho_h(&self, h: &HElem) -> Monomial {
        self.fam.module(self.base_index).rho(h)
    }

    /// ρ_p on Sp(M_p).
    pub fn rho_g(&self, g: &SympAut) -> ScaledMat {
        let g_inv = g.inverse();
        let pre = self.fam.act(&g_inv, &self.base);
        let i = self.fam.lag_index(&pre);
        let (j, push) = self.fam.transport(g, &g_inv, i);
        debug_assert_eq!(j, self.base_index);
        self.fam.operator(&pre, &self.base).left_monomial(&push)
    }
}

/// π together with the data that makes it canonical.
#[derive(Debug)]
pub struct CanonicalRep {
    grp: HeisGrp,
    factors: Vec<Factor>,
}

impl CanonicalRep {
    /// Build π; `base` selects the enhanced basepoint of every factor by index
    /// in canonical order ((L_0,+), (L_0,−), (L_1,+), …).
    pub fn build(grp: &HeisGrp, base: usize, budget: Option<u64>) -> Result<CanonicalRep> {
        let m = grp.base();
        if m.rank() > 0 && grp.center() != m.n() {
            return invalid("π is built for the Heisenberg group with center μ_n");
        }
        if grp.center() % 2 == 0 {
            return Err(Error::EvenOrder(
                "the central character has even order".into(),
            ));
        }
        let primes = m.primes();
        let factors = if primes.len() == 1 {
            vec![Factor::build(grp, None, base, budget)?]
        } else {
            primes
                .iter()
                .map(|&p| Factor::build(grp, Some(heis_primary(grp, p)), base, budget))
                .collect::<Result<_>>()?
        };
        Ok(CanonicalRep {
            grp: grp.clone(),
            factors,
        })
    }

    pub fn grp(&self) -> &HeisGrp {
        &self.grp
    }

    pub fn module(&self) -> &SympMod {
        self.grp.base()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn rho_h(&self, h: &HElem) -> Monomial {
        let c = self.grp.center();
        let start = Monomial {
            order: c,
            col: vec![0],
            phase: vec![if self.factors.is_empty() {
                h.a.rem_euclid(c as i64) as u64
            } else {
                0
            }],
        };
        self.factors
            .iter()
            .fold(start, |acc, f| acc.kron(&f.rho_h(&f.local_h(h))))
    }

    pub fn rho_g(&self, g: &SympAut) -> ScaledMat {
        let start = ScaledMat::identity(1, 1);
        self.factors
            .iter()
            .fold(start, |acc, f| acc.kron(&f.rho_g(&f.local_g(g))))
    }

    /// ρ(h)ρ(g), the action of (h, g) ∈ H ⋊ G.
    pub fn rho_pair(&self, h: &HElem, g: &SympAut) -> ScaledMat {
        self.rho_g(g).left_monomial(&self.rho_h(h))
    }

    pub fn character_h(&self, h: &HElem) -> CycNum {
        self.rho_h(h).trace()
    }

    pub fn character_g(&self, g: &SympAut) -> CycNum {
        self.rho_g(g).trace()
    }

    pub fn character_pair(&self, h: &HElem, g: &SympAut) -> CycNum {
        self.rho_pair(h, g).trace()
    }

    /// χ_{π_p}(h_p) for the i-th factor.
    pub fn factor_character(&self, i: usize, h: &HElem) -> CycNum {
        let f = &self.factors[i];
        f.rho_h(&f.local_h(h)).trace()
    }

    /// The H_p-component of h for the i-th factor.
    pub fn factor_component(&self, i: usize, h: &HElem) -> HElem {
        self.factors[i].local_h(h)
    }

    pub fn generator_action(&self) -> Vec<Monomial> {
        self.grp
            .generators()
            .iter()
            .map(|h| self.rho_h(h))
            .collect()
    }

    /// Coherence tables of all factors.
    pub fn tables(&self) -> Vec<Vec<TableEntry>> {
        self.factors.iter().map(|f| family_table(&f.fam)).collect()
    }

    /// Whether χ(x) lies in Q(μ_n).
    pub fn descends(&self, x: &CycNum) -> bool {
        matches!(x.descend(self.grp.center().max(1)), Ok(Some(_)))
    }

    /// For each factor, an operator entry outside Q(μ_{p^r}) if there is one.
    pub fn descent_probe(&self) -> Vec<Option<String>> {
        self.factors
            .iter()
            .map(|f| {
                let c = f.grp().center();
                let k_prime = Subfield::generated_by(&[root_of_unity(c, 1)], 4 * c);
                some_entry_outside(&f.fam, &k_prime)
            })
            .collect()
    }

    pub fn export(&self, gs: &[SympAut]) -> PiExport {
        let mut conductors: HashMap<String, u64> = HashMap::new();
        let mut min_cond = |x: &CycNum| -> u64 {
            if x.is_zero() {
                return 1;
            }
            *conductors
                .entry(x.to_string())
                .or_insert_with(|| x.min_conductor())
        };
        let heisenberg = self
            .grp
            .generators()
            .into_iter()
            .map(|h| GeneratorMatrix {
                matrix: DenseMatrix::from(&self.rho_h(&h)),
                element: h,
            })
            .collect();
        let mut symplectic = Vec::new();
        let mut g_chars = Vec::new();
        for g in gs {
            let mat = self.rho_g(g);
            let entries = mat.to_entries();
            let conds = entries
                .iter()
                .map(|row| row.iter().map(&mut min_cond).collect())
                .collect();
            g_chars.push(self.character_g(g));
            symplectic.push(SymplecticMatrix {
                element: g.clone(),
                matrix: DenseMatrix(entries),
                min_conductors: conds,
            });
        }
        let central: Vec<CharacterValue> = (0..self.grp.center() as i64)
            .map(|a| {
                let h = self.grp.elem(self.module().group().zero(), a);
                CharacterValue {
                    value: self.character_h(&h),
                    element: h,
                }
            })
            .collect();
        let noncentral: Vec<CharacterValue> = self
            .module()
            .group()
            .elements()
            .filter(|m| m.iter().any(|&x| x != 0))
            .map(|m| {
                let h = self.grp.elem(m, 0);
                CharacterValue {
                    value: self.character_h(&h),
                    element: h,
                }
            })
            .collect();
        let all_chars = central
            .iter()
            .chain(&noncentral)
            .map(|c| &c.value)
            .chain(&g_chars);
        let character_conductor = all_chars
            .clone()
            .map(&mut min_cond)
            .fold(1, crate::arith::lcm);
        let character_descends = all_chars.clone().all(|x| self.descends(x));
        let matrix_conductor = symplectic
            .iter()
            .flat_map(|s: &SymplecticMatrix| s.min_conductors.iter().flatten().copied())
            .fold(1, crate::arith::lcm);
        PiExport {
            module: self.module().clone(),
            center: self.grp.center(),
            dim: self.dim(),
            basepoint: self.factors.iter().map(|f| f.base.clone()).collect(),
            heisenberg,
            symplectic,
            characters: CharacterTable {
                central,
                noncentral,
                symplectic: g_chars,
            },
            field: FieldDiagnostics {
                matrix_conductor,
                character_conductor,
                character_descends,
                entry_outside_character_field: self.descent_probe(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    pub element: SympAut,
    pub matrix: DenseMatrix,
    pub min_conductors: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterValue {
    pub element: HElem,
    pub value: CycNum,
}

/// χ_π on the classes of H: the central elements (0, a) and one element (m, 0)
/// for each m ≠ 0; and on the exported elements of G.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterTable {
    pub central: Vec<CharacterValue>,
    pub noncentral: Vec<CharacterValue>,
    pub symplectic: Vec<CycNum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    /// lcm of the minimal conductors of the exported G-matrix entries.
    pub matrix_conductor: u64,
    pub character_conductor: u64,
    /// Every exported character value lies in Q(μ_n).
    pub character_descends: bool,
    /// Per primary factor: an operator entry outside Q(μ_{p^r}), if any.
    pub entry_outside_character_field: Vec<Option<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiExport {
    pub module: SympMod,
    pub center: u64,
    pub dim: usize,
    pub basepoint: Vec<EnhLag>,
    pub heisenberg: Vec<GeneratorMatrix>,
    pub symplectic: Vec<SymplecticMatrix>,
    pub characters: CharacterTable,
    pub field: FieldDiagnostics,
}

/// (1/|H|) Σ_h χ(h)·conj χ(h), exactly.
pub fn character_norm(pi: &CanonicalRep) -> CycNum {
    let grp = pi.grp();
    let elems: Vec<HElem> = grp.elements().collect();
    let c = grp.center();
    let sum = elems
        .par_iter()
        .map(|h| {
            let x = pi.character_h(h);
            &x * &x.conj()
        })
        .reduce(|| CycNum::zero(c), |a, b| &a + &b);
    let order = num_rational::BigRational::from_integer((elems.len() as i64).into());
    sum.scale(&order.recip())
}

/// The Stone–von Neumann checks for π and all ℋ_L.
pub fn verify_svn(pi: &CanonicalRep, budget: Option<u64>) -> Result<Vec<SuiteReport>> {
    let grp = pi.grp();
    let m = grp.base();
    let lags = m.enumerate_lagrangians(budget)?;
    let actions: Vec<Vec<Monomial>> = lags
        .par_iter()
        .map(|l| grp.induce(l).map(|v| generator_action(&v)))
        .collect::<Result<_>>()?;
    let pi_action = pi.generator_action();
    let root = (m.order() as f64).sqrt().round() as usize;
    let mut out = vec![SuiteReport::single(
        "dimension",
        if pi.dim() == root && root * root == m.order() as usize {
            Ok(())
        } else {
            Err(format!("dim π = {} but |M| = {}", pi.dim(), m.order()))
        },
    )];
    let z = pi.rho_h(&grp.elem(m.group().zero(), 1));
    let central_ok = z.col.iter().enumerate().all(|(i, &c)| c == i)
        && z.phase
            .iter()
            .all(|&e| e * grp.center() / z.order == 1 % grp.center());
    out.push(SuiteReport::single(
        "central character",
        if central_ok {
            Ok(())
        } else {
            Err("ρ(0,1) is not ζ_n·I".into())
        },
    ));
    let pairs: Vec<(usize, usize)> = (0..lags.len())
        .flat_map(|a| (0..lags.len()).map(move |b| (a, b)))
        .collect();
    let res: Vec<std::result::Result<(), String>> = pairs
        .par_iter()
        .map(|&(a, b)| match hom_dim(&actions[a], &actions[b]) {
            1 => Ok(()),
            d => Err(format!("dim Hom(H_L{a}, H_L{b}) = {d}")),
        })
        .collect();
    let (diag, off): (Vec<_>, Vec<_>) = pairs.iter().zip(res).partition(|((a, b), _)| a == b);
    out.push(SuiteReport::collect(
        "induced modules irreducible",
        diag.into_iter().map(|(_, r)| r),
    ));
    out.push(SuiteReport::collect(
        "induced modules pairwise isomorphic",
        off.into_iter().map(|(_, r)| r),
    ));
    let res: Vec<std::result::Result<(), String>> = actions
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let (x, y) = (hom_dim(&pi_action, w), hom_dim(w, &pi_action));
            if x == 1 && y == 1 && w[0].dim() == pi.dim() {
                Ok(())
            } else {
                Err(format!("π vs H_L{i}: hom dims {x}, {y}"))
            }
        })
        .collect();
    out.push(SuiteReport::collect("π isomorphic to every H_L", res));
    let norm = character_norm(pi);
    out.push(SuiteReport::single(
        "character orthogonality",
        if norm.is_one() {
            Ok(())
        } else {
            Err(format!("(1/|H|) Σ |χ|² = {norm}"))
        },
    ));
    Ok(out)
}

/// Which basepoints to rebuild from in the uniqueness probe.
#[derive(Clone, Copy, Debug)]
pub enum Basepoints {
    All,
    Sample { seed: u64, count: usize },
}

/// Rebuild π from other basepoints and compare coherence tables byte for byte;
/// also check that the H-endomorphisms of π are the scalars.
pub fn uniqueness_probe(
    grp: &HeisGrp,
    which: Basepoints,
    budget: Option<u64>,
) -> Result<Vec<SuiteReport>> {
    let reference = CanonicalRep::build(grp, 0, budget)?;
    let ref_bytes: Vec<Vec<u8>> = reference
        .tables()
        .iter()
        .map(|t| serde_json::to_vec(t).expect("table serializes"))
        .collect();
    let count = reference
        .factors
        .iter()
        .map(|f| f.fam.enhanced().len())
        .min()
        .unwrap_or(1);
    let bases: Vec<usize> = match which {
        Basepoints::All => (0..count).collect(),
        Basepoints::Sample { seed, count: k } => {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut idx: Vec<usize> = (0..count).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            idx.truncate(k);
            idx.sort_unstable();
            idx
        }
    };
    let res: Vec<std::result::Result<(), String>> = bases
        .par_iter()
        .map(|&b| {
            let pi = CanonicalRep::build(grp, b, budget).map_err(|e| e.to_string())?;
            for (i, t) in pi.tables().iter().enumerate() {
                if serde_json::to_vec(t).expect("table serializes") != ref_bytes[i] {
                    return Err(format!(
                        "basepoint #{b} gives a different table for factor {i}"
                    ));
                }
            }
            Ok(())
        })
        .collect();
    let action = reference.generator_action();
    let endo = hom_dim(&action, &action);
    Ok(vec![
        SuiteReport::collect("coherence tables independent of basepoint", res),
        SuiteReport::single(
            "H-endomorphisms of π are scalars",
            if endo == 1 {
                Ok(())
            } else {
                Err(format!("dim End_H(π) = {endo}"))
            },
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::standard_module;

    fn pi(blocks: &[(u64, u64)]) -> CanonicalRep {
        CanonicalRep::build(&HeisGrp::new(standard_module(blocks).unwrap()), 0, None).unwrap()
    }

    #[test]
    fn zero_module_is_the_central_character() {
        let grp = HeisGrp::with_center(SympMod::zero(), 1).unwrap();
        let p = CanonicalRep::build(&grp, 0, None).unwrap();
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn dimensions() {
        assert_eq!(pi(&[(3, 1)]).dim(), 3);
        assert_eq!(pi(&[(9, 1)]).dim(), 9);
        assert_eq!(pi(&[(15, 1)]).dim(), 15);
    }

    #[test]
    fn weil_representation_is_genuine_on_the_plane() {
        let p = pi(&[(3, 1)]);
        let gs = p.module().enumerate_sp(None).unwrap();
        assert_eq!(gs.len(), 24);
        let mats: Vec<ScaledMat> = gs.iter().map(|g| p.rho_g(g)).collect();
        for (a, g1) in gs.iter().enumerate() {
            for (b, g2) in gs.iter().enumerate() {
                assert_eq!(mats[a].mul(&mats[b]), p.rho_g(&g1.compose(g2)));
            }
        }
    }

    #[test]
    fn plane_character_vanishes_off_center() {
        let p = pi(&[(3, 1)]);
        for h in p.grp().elements() {
            let x = p.character_h(&h);
            if h.m.iter().any(|&c| c != 0) {
                assert!(x.is_zero());
            } else {
                assert_eq!(x, CycNum::from_integer(3, 3).mul_root(h.a));
            }
        }
        assert!(character_norm(&p).is_one());
    }
}
