//! The verification matrix run by `heisrep verify`.
//!
//! Seeds select sampled inputs only; every comparison is exact. Suites appear
//! in a fixed order regardless of thread count.

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::abgroup::AbGroup;
use crate::canonrep::{uniqueness_probe, verify_svn, Basepoints, CanonicalRep, PiExport};
use crate::cyclo::{root_of_unity, sqrt_prime, CycNum, Subfield};
use crate::error::{Error, Result};
use crate::heisenberg::{HElem, HeisGrp};
use crate::intertwine::{module_hash, CanonicalSystemExport};
use crate::reduction::ReduceExport;
use crate::symplectic::{gauss_sum, random_symmetric_form, SympAut, SympMod};
use crate::verify::{axiom_suite, check_field, IntertwinerFamily, SuiteReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub level: Level,
    pub seed: u64,
    pub budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub module: SympMod,
    pub module_hash: String,
    pub level: Level,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

struct Depth {
    sp_enumerate: Option<u64>,
    sp_sample: usize,
    triple_limit: usize,
    triple_sample: usize,
    pair_sample: usize,
    unique_all_up_to: usize,
    unique_sample: usize,
    weil_enumerate: Option<u64>,
    weil_sample: usize,
    h_limit: u64,
    gauss_forms: usize,
}

impl Depth {
    fn of(level: Level) -> Depth {
        match level {
            Level::Quick => Depth {
                sp_enumerate: None,
                sp_sample: 8,
                triple_limit: 0,
                triple_sample: 300,
                pair_sample: 200,
                unique_all_up_to: 0,
                unique_sample: 2,
                weil_enumerate: None,
                weil_sample: 6,
                h_limit: 0,
                gauss_forms: 10,
            },
            Level::Full => Depth {
                sp_enumerate: Some(10_000),
                sp_sample: 100,
                triple_limit: 100_000,
                triple_sample: 10_000,
                pair_sample: 2_000,
                unique_all_up_to: 16,
                unique_sample: 4,
                weil_enumerate: Some(2_000),
                weil_sample: 30,
                h_limit: 243,
                gauss_forms: 50,
            },
        }
    }
}

/// Sp(M) elements: all of them when the group fits `limit`, else a seeded sample.
fn sp_set(m: &SympMod, limit: Option<u64>, seed: u64, count: usize) -> Result<Vec<SympAut>> {
    if let Some(b) = limit {
        match m.enumerate_sp(Some(b)) {
            Ok(gs) => return Ok(gs),
            Err(Error::Budget { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(m.sample_sp(seed, count))
}

/// Run every suite on M at the configured depth.
pub fn run_verify(m: &SympMod, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let depth = Depth::of(cfg.level);
    let seed = cfg.seed;
    let grp = HeisGrp::new(m.clone());
    let mut suites = vec![
        half_form_suite(m, seed, depth.pair_sample),
        lagrangian_suite(m, cfg.budget)?,
    ];

    let pi = CanonicalRep::build(&grp, 0, cfg.budget)?;
    for f in pi.factors() {
        let fam = f.family();
        let p = f.prime();
        let c = f.grp().center();
        let gs = sp_set(f.grp().base(), depth.sp_enumerate, seed, depth.sp_sample)?;
        let e = fam.enhanced().len();
        let sample = if e.pow(3) <= depth.triple_limit {
            None
        } else {
            Some((seed, depth.triple_sample))
        };
        let k = Subfield::generated_by(&[root_of_unity(c, 1), sqrt_prime(p)?], 4 * c);
        let mut local = axiom_suite(fam, &gs, sample);
        local.push(check_field(fam, &k, &format!("Q(μ_{c}, √{p})")));
        let red = fam.reduced_system();
        let kc = Subfield::generated_by(&[root_of_unity(p, 1), sqrt_prime(p)?], 4 * p);
        local.push(check_field(red, &kc, &format!("Q(μ_{p}, √{p}) on M_c")));
        for mut r in local {
            r.suite = format!("p={p}: {}", r.suite);
            suites.push(r);
        }
    }

    suites.extend(verify_svn(&pi, cfg.budget)?);
    let enhanced = pi
        .factors()
        .iter()
        .map(|f| f.family().enhanced().len())
        .min()
        .unwrap_or(1);
    let which = if enhanced <= depth.unique_all_up_to {
        Basepoints::All
    } else {
        Basepoints::Sample {
            seed,
            count: depth.unique_sample,
        }
    };
    suites.extend(uniqueness_probe(&grp, which, cfg.budget)?);

    let gs = sp_set(m, depth.weil_enumerate, seed, depth.weil_sample)?;
    let hs: Vec<HElem> = if grp.order() <= depth.h_limit {
        grp.elements().collect()
    } else {
        grp.generators()
    };
    suites.push(weil_suite(&pi, &gs));
    suites.push(semidirect_suite(&pi, &gs, &hs));
    suites.push(character_suite(&pi, &gs, &hs));
    suites.push(gauss_suite(seed, depth.gauss_forms));
    suites.push(round_trip_suite(m, &pi, &gs, cfg.budget));

    let passed = suites.iter().all(SuiteReport::passed);
    Ok(VerifyReport {
        module: m.clone(),
        module_hash: module_hash(m),
        level: cfg.level,
        seed,
        suites,
        passed,
    })
}

fn half_form_suite(m: &SympMod, seed: u64, count: usize) -> SuiteReport {
    let n = m.n().max(1) as i64;
    let g = m.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        g.orders()
            .iter()
            .map(|&d| rng.gen_range(0..d as i64))
            .collect()
    };
    let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
    for i in 0..g.rank() {
        for j in 0..g.rank() {
            pairs.push((g.basis(i), g.basis(j)));
        }
    }
    for _ in 0..count {
        let a = random(&mut rng);
        let b = random(&mut rng);
        pairs.push((a, b));
    }
    SuiteReport::collect(
        "half form β² = ω",
        pairs.iter().map(|(a, b)| {
            let beta = m.beta(a, b);
            if (2 * beta - m.pair(a, b)).rem_euclid(n) == 0
                && (beta + m.beta(b, a)).rem_euclid(n) == 0
                && m.beta(a, a) == 0
            {
                Ok(())
            } else {
                Err(format!("β({a:?}, {b:?}) = {beta}"))
            }
        }),
    )
}

fn lagrangian_suite(m: &SympMod, budget: Option<u64>) -> Result<SuiteReport> {
    let lags = m.enumerate_lagrangians(budget)?;
    Ok(SuiteReport::collect(
        "lagrangians self-orthogonal of order √|M|",
        lags.iter().map(|l| {
            if l.order() == m.half_order() && m.orth_complement(l) == *l {
                Ok(())
            } else {
                Err(format!("{:?}", l.gens()))
            }
        }),
    ))
}

fn weil_suite(pi: &CanonicalRep, gs: &[SympAut]) -> SuiteReport {
    let mats: Vec<_> = gs.par_iter().map(|g| pi.rho_g(g)).collect();
    let pairs: Vec<(usize, usize)> = (0..gs.len())
        .flat_map(|a| (0..gs.len()).map(move |b| (a, b)))
        .collect();
    let res: Vec<std::result::Result<(), String>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            if mats[a].mul(&mats[b]) == pi.rho_g(&gs[a].compose(&gs[b])) {
                Ok(())
            } else {
                Err(format!("ρ(g{a})ρ(g{b}) ≠ ρ(g{a}g{b})"))
            }
        })
        .collect();
    SuiteReport::collect("Weil representation multiplicative", res)
}

fn semidirect_suite(pi: &CanonicalRep, gs: &[SympAut], hs: &[HElem]) -> SuiteReport {
    let grp = pi.grp();
    let res: Vec<std::result::Result<(), String>> = gs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(a, g)| {
            let rg = pi.rho_g(g);
            hs.iter().map(move |h| {
                let lhs = rg.right_monomial(&pi.rho_h(h));
                let rhs = rg.left_monomial(&pi.rho_h(&grp.act(g, h)));
                if lhs == rhs {
                    Ok(())
                } else {
                    Err(format!("ρ(g{a})ρ(h)ρ(g{a})⁻¹ ≠ ρ(g{a}·h) at h = {h:?}"))
                }
            })
        })
        .collect();
    SuiteReport::collect("semidirect relation", res)
}

fn character_suite(pi: &CanonicalRep, gs: &[SympAut], hs: &[HElem]) -> SuiteReport {
    let mut res: Vec<std::result::Result<(), String>> = hs
        .par_iter()
        .map(|h| {
            let x = pi.character_h(h);
            if pi.descends(&x) {
                Ok(())
            } else {
                Err(format!("χ({h:?}) = {x}"))
            }
        })
        .collect();
    res.extend(
        gs.par_iter()
            .enumerate()
            .map(|(a, g)| {
                let x = pi.character_g(g);
                if pi.descends(&x) {
                    Ok(())
                } else {
                    Err(format!("χ(g{a}) = {x}"))
                }
            })
            .collect::<Vec<_>>(),
    );
    SuiteReport::collect("character values in Q(μ_n)", res)
}

/// Invariant-factor lists d_1 | d_2 | … of odd groups with 1 < |L| ≤ limit.
pub fn odd_groups_up_to(limit: u64) -> Vec<Vec<u64>> {
    fn extend(prefix: &mut Vec<u64>, order: u64, limit: u64, out: &mut Vec<Vec<u64>>) {
        let start = prefix.last().copied().unwrap_or(3);
        let mut d = start;
        while order * d <= limit {
            if d % 2 == 1 && prefix.last().map_or(true, |&l| d % l == 0) {
                prefix.push(d);
                out.push(prefix.clone());
                extend(prefix, order * d, limit, out);
                prefix.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, limit, &mut out);
    out
}

/// G(L, b)⁴ = |L|² on `count` seeded random forms over odd groups of order ≤ 81.
pub fn gauss_suite(seed: u64, count: usize) -> SuiteReport {
    let groups = odd_groups_up_to(81);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6761_7573_73);
    let cases: Vec<(AbGroup, Vec<Vec<i64>>)> = (0..count)
        .map(|_| {
            let orders = groups.choose(&mut rng).expect("nonempty").clone();
            let l = AbGroup::new(orders).expect("valid orders");
            let b = random_symmetric_form(&l, &mut rng).expect("odd order");
            (l, b)
        })
        .collect();
    let res: Vec<std::result::Result<(), String>> = cases
        .par_iter()
        .map(|(l, b)| {
            let g = gauss_sum(l, b).map_err(|e| e.to_string())?;
            let sq = &g * &g;
            let fourth = &sq * &sq;
            let target = CycNum::from_integer(1, (l.order() * l.order()) as i64);
            if fourth == target {
                Ok(())
            } else {
                Err(format!("L = {:?}, b = {b:?}: G⁴ = {fourth}", l.orders()))
            }
        })
        .collect();
    SuiteReport::collect("Gauss sum fourth power", res)
}

fn round_trip<T: Serialize + DeserializeOwned + PartialEq>(
    what: &str,
    x: &T,
) -> std::result::Result<(), String> {
    let s = serde_json::to_string(x).map_err(|e| format!("{what}: {e}"))?;
    let back: T = serde_json::from_str(&s).map_err(|e| format!("{what}: {e}"))?;
    if back == *x {
        Ok(())
    } else {
        Err(format!("{what} changed after a round trip"))
    }
}

fn round_trip_suite(
    m: &SympMod,
    pi: &CanonicalRep,
    gs: &[SympAut],
    budget: Option<u64>,
) -> SuiteReport {
    let mut res = vec![
        round_trip("module", m),
        round_trip::<PiExport>("π export", &pi.export(gs)),
    ];
    for f in pi.factors() {
        let fam = f.family();
        res.push(round_trip::<ReduceExport>(
            "reduction",
            &fam.reduction().export(),
        ));
        res.push(round_trip::<CanonicalSystemExport>(
            "canonical system",
            &fam.reduced_system().export(),
        ));
    }
    let lags = m.enumerate_lagrangians(budget);
    res.push(match lags {
        Ok(l) => round_trip("lagrangians", &l),
        Err(e) => Err(e.to_string()),
    });
    SuiteReport::collect("JSON round trips", res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::standard_module;

    #[test]
    fn odd_group_list() {
        let g = odd_groups_up_to(27);
        assert!(g.contains(&vec![3, 3, 3]));
        assert!(g.contains(&vec![3, 9]));
        assert!(g.contains(&vec![25]));
        assert!(!g.contains(&vec![9, 3]));
        assert!(g.iter().all(|o| o.iter().product::<u64>() <= 27));
    }

    #[test]
    fn plane_quick_passes() {
        let m = standard_module(&[(3, 1)]).unwrap();
        let cfg = VerifyConfig {
            level: Level::Quick,
            seed: 1,
            budget: None,
        };
        let r = run_verify(&m, &cfg).unwrap();
        for s in &r.suites {
            assert!(s.passed(), "{s:?}");
        }
        assert!(r.passed);
    }
}
