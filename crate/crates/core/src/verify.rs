//! Exhaustive and sampled checks of the axioms for families of intertwiners.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo::Subfield;
use crate::cycmat::{Monomial, ScaledMat};
use crate::heisenberg::{HeisGrp, InducedModule};
use crate::symplectic::{EnhLag, SympAut};

/// Outcome of one property suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checked: u64,
    pub failed: u64,
    pub first_counterexample: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    /// Aggregate results in order; the first failure is kept as counterexample.
    pub fn collect<I: IntoIterator<Item = Result<(), String>>>(
        suite: &str,
        results: I,
    ) -> SuiteReport {
        let mut r = SuiteReport {
            suite: suite.to_string(),
            checked: 0,
            failed: 0,
            first_counterexample: None,
        };
        for x in results {
            r.checked += 1;
            if let Err(e) = x {
                r.failed += 1;
                if r.first_counterexample.is_none() {
                    r.first_counterexample = Some(e);
                }
            }
        }
        r
    }

    pub fn single(suite: &str, result: Result<(), String>) -> SuiteReport {
        SuiteReport::collect(suite, [result])
    }
}

/// A table of operators F_{N⁰,L⁰}: ℋ_L → ℋ_N indexed by enhanced lagrangians,
/// together with the symplectic action needed to state equivariance.
pub trait IntertwinerFamily: Sync {
    fn grp(&self) -> &HeisGrp;
    /// Enhanced points in canonical order: (L_0,+), (L_0,−), (L_1,+), …
    fn enhanced(&self) -> Vec<EnhLag>;
    fn lag_index(&self, l0: &EnhLag) -> usize;
    fn module(&self, i: usize) -> &InducedModule;
    fn operator(&self, n0: &EnhLag, l0: &EnhLag) -> ScaledMat;
    fn act(&self, g: &SympAut, l0: &EnhLag) -> EnhLag;
    /// Transport ℋ_{L_i} → ℋ_{gL_i}: the index of gL_i and the matrix.
    fn transport(&self, g: &SympAut, g_inv: &SympAut, i: usize) -> (usize, Monomial);
}

fn flip(l0: &EnhLag) -> EnhLag {
    EnhLag {
        lag: l0.lag.clone(),
        eps: -l0.eps,
    }
}

pub fn check_identity<F: IntertwinerFamily>(fam: &F) -> SuiteReport {
    let pts = fam.enhanced();
    let res: Vec<Result<(), String>> = pts
        .par_iter()
        .map(|l0| {
            if fam.operator(l0, l0).is_identity() {
                Ok(())
            } else {
                Err(format!("F({0},{0}) is not the identity", l0.key()))
            }
        })
        .collect();
    SuiteReport::collect("identity", res)
}

/// Every ordered triple of enhanced points, or `sample` random ones.
pub fn triples(n: usize, sample: Option<(u64, usize)>) -> Vec<(usize, usize, usize)> {
    match sample {
        None => (0..n)
            .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))))
            .collect(),
        Some((seed, count)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    (
                        rng.gen_range(0..n),
                        rng.gen_range(0..n),
                        rng.gen_range(0..n),
                    )
                })
                .collect()
        }
    }
}

pub fn check_transitivity<F: IntertwinerFamily>(
    fam: &F,
    sample: Option<(u64, usize)>,
) -> SuiteReport {
    let pts = fam.enhanced();
    let res: Vec<Result<(), String>> = triples(pts.len(), sample)
        .par_iter()
        .map(|&(r, n, l)| {
            let lhs = fam
                .operator(&pts[r], &pts[n])
                .mul(&fam.operator(&pts[n], &pts[l]));
            if lhs == fam.operator(&pts[r], &pts[l]) {
                Ok(())
            } else {
                Err(format!(
                    "F({r0},{n0})F({n0},{l0}) != F({r0},{l0})",
                    r0 = pts[r].key(),
                    n0 = pts[n].key(),
                    l0 = pts[l].key()
                ))
            }
        })
        .collect();
    SuiteReport::collect("transitivity", res)
}

pub fn check_genuineness<F: IntertwinerFamily>(fam: &F) -> SuiteReport {
    let pts = fam.enhanced();
    let pairs: Vec<(usize, usize)> = (0..pts.len())
        .flat_map(|a| (0..pts.len()).map(move |b| (a, b)))
        .collect();
    let res: Vec<Result<(), String>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (n0, l0) = (&pts[a], &pts[b]);
            let f = fam.operator(n0, l0);
            let minus = f.scaled(&crate::cyclo::CycNum::from_integer(1, -1));
            let ok = fam.operator(&flip(n0), l0) == minus
                && fam.operator(n0, &flip(l0)) == minus
                && fam.operator(&flip(n0), &flip(l0)) == f;
            if ok {
                Ok(())
            } else {
                Err(format!(
                    "flipping a lift of ({},{}) does not negate",
                    n0.key(),
                    l0.key()
                ))
            }
        })
        .collect();
    SuiteReport::collect("genuineness", res)
}

pub fn check_equivariance<F: IntertwinerFamily>(fam: &F, gs: &[SympAut]) -> SuiteReport {
    let pts = fam.enhanced();
    let nlag = pts
        .iter()
        .map(|p| fam.lag_index(p))
        .max()
        .map_or(0, |m| m + 1);
    let res: Vec<Result<(), String>> = gs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(gi, g)| {
            let g_inv = g.inverse();
            let trans: Vec<(usize, Monomial)> =
                (0..nlag).map(|i| fam.transport(g, &g_inv, i)).collect();
            let images: Vec<EnhLag> = pts.iter().map(|p| fam.act(g, p)).collect();
            let mut out = Vec::with_capacity(pts.len() * pts.len());
            for (a, n0) in pts.iter().enumerate() {
                for (b, l0) in pts.iter().enumerate() {
                    let tn = &trans[fam.lag_index(n0)].1;
                    let tl = &trans[fam.lag_index(l0)].1;
                    let lhs = fam
                        .operator(n0, l0)
                        .left_monomial(tn)
                        .right_monomial(&tl.inverse());
                    let rhs = fam.operator(&images[a], &images[b]);
                    out.push(if lhs == rhs {
                        Ok(())
                    } else {
                        Err(format!(
                            "g#{gi}: g F({},{}) g^-1 != F(gN,gL)",
                            n0.key(),
                            l0.key()
                        ))
                    });
                }
            }
            out
        })
        .collect();
    SuiteReport::collect("equivariance", res)
}

/// Every matrix entry of every operator lies in the given subfield.
pub fn check_field<F: IntertwinerFamily>(fam: &F, field: &Subfield, name: &str) -> SuiteReport {
    let pts = fam.enhanced();
    let pairs: Vec<(usize, usize)> = (0..pts.len())
        .flat_map(|a| (0..pts.len()).map(move |b| (a, b)))
        .collect();
    let res: Vec<Result<(), String>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let f = fam.operator(&pts[a], &pts[b]);
            for i in 0..f.rows() {
                for j in 0..f.cols() {
                    if f.mat.entry_is_zero(i, j) {
                        continue;
                    }
                    let e = f.entry(i, j);
                    if !field.contains(&e) {
                        return Err(format!(
                            "entry ({i},{j}) of F({},{}) = {e} is outside {name}",
                            pts[a].key(),
                            pts[b].key()
                        ));
                    }
                }
            }
            Ok(())
        })
        .collect();
    SuiteReport::collect(&format!("entries in {name}"), res)
}

/// Whether some entry of some operator lies outside the given subfield.
pub fn some_entry_outside<F: IntertwinerFamily>(fam: &F, field: &Subfield) -> Option<String> {
    let pts = fam.enhanced();
    for a in &pts {
        for b in &pts {
            let f = fam.operator(a, b);
            for i in 0..f.rows() {
                for j in 0..f.cols() {
                    if !f.mat.entry_is_zero(i, j) && !field.contains(&f.entry(i, j)) {
                        return Some(format!("entry ({i},{j}) of F({},{})", a.key(), b.key()));
                    }
                }
            }
        }
    }
    None
}

/// The full axiom suite for a family.
pub fn axiom_suite<F: IntertwinerFamily>(
    fam: &F,
    gs: &[SympAut],
    triple_sample: Option<(u64, usize)>,
) -> Vec<SuiteReport> {
    vec![
        check_identity(fam),
        check_transitivity(fam, triple_sample),
        check_genuineness(fam),
        check_equivariance(fam, gs),
    ]
}
