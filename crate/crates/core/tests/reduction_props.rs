use std::sync::Arc;

use heisrep::abgroup::{apply_images, random_automorphism, Subgroup};
use heisrep::cyclo::CycNum;
use heisrep::heisenberg::HeisGrp;
use heisrep::reduction::{canonical_isotropic, LiftedSystem, ReductionData};
use heisrep::symplectic::{standard_module, SympMod};
use heisrep::verify::{axiom_suite, IntertwinerFamily};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn twisted(m: &SympMod, seed: u64) -> SympMod {
    let g = m.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = random_automorphism(g, &mut rng, 12);
    let r = g.rank();
    let gram = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    m.pair(
                        &apply_images(g, &images, &g.basis(i)),
                        &apply_images(g, &images, &g.basis(j)),
                    )
                })
                .collect()
        })
        .collect();
    SympMod::new(g.orders().to_vec(), gram).unwrap()
}

fn corpus() -> Vec<SympMod> {
    let blocks: [&[(u64, u64)]; 7] = [
        &[(9, 1)],
        &[(27, 1)],
        &[(9, 1), (3, 1)],
        &[(3, 1), (9, 1)],
        &[(25, 1)],
        &[(9, 2)],
        &[(3, 1)],
    ];
    let mut out: Vec<SympMod> = blocks.iter().map(|b| standard_module(b).unwrap()).collect();
    for seed in 0..3 {
        out.push(twisted(&standard_module(&[(9, 1), (3, 1)]).unwrap(), seed));
        out.push(twisted(&standard_module(&[(27, 1)]).unwrap(), seed));
    }
    out
}

fn exponent_of_p(mut e: u64, p: u64) -> u32 {
    let mut r = 0;
    while e % p == 0 {
        e /= p;
        r += 1;
    }
    r
}

#[test]
fn hand_derived_examples() {
    // (Z/9)²: S = 3M is lagrangian, so M_c = 0.
    let m = standard_module(&[(9, 1)]).unwrap();
    let (s, chain) = canonical_isotropic(&m).unwrap();
    assert_eq!(s, Subgroup::whole(m.group()).scaled(3));
    assert_eq!(s.order(), 9);
    assert_eq!(chain, vec![2, 0]);
    assert_eq!(m.induced_form(&s).unwrap().module.order(), 1);

    // (Z/27)²: S = 9M, S^⊥ = 3M, M_c = 3M/9M ≅ (Z/3)².
    let m = standard_module(&[(27, 1)]).unwrap();
    let (s, _) = canonical_isotropic(&m).unwrap();
    assert_eq!(s, Subgroup::whole(m.group()).scaled(9));
    assert_eq!(m.orth_complement(&s), Subgroup::whole(m.group()).scaled(3));
    assert_eq!(m.induced_form(&s).unwrap().module.group().orders(), &[3, 3]);

    // (Z/9)² ⊕ (Z/3)²: S = 3·(Z/9)², M_c ≅ (Z/3)² from the second block.
    let m = standard_module(&[(9, 1), (3, 1)]).unwrap();
    let (s, _) = canonical_isotropic(&m).unwrap();
    let expected = Subgroup::from_gens(m.group(), &[vec![3, 0, 0, 0], vec![0, 3, 0, 0]]).unwrap();
    assert_eq!(s, expected);
    let red = m.induced_form(&s).unwrap();
    assert_eq!(red.module.group().orders(), &[3, 3]);
}

#[test]
fn recursion_shrinks_the_exponent() {
    for m in corpus() {
        let p = m.primes()[0];
        let r = exponent_of_p(m.n(), p);
        let (s, chain) = canonical_isotropic(&m).unwrap();
        assert!(m.is_isotropic(&s));
        let red = m.induced_form(&s).unwrap();
        let mc = &red.module;
        assert!(mc.order() == 1 || mc.elementary_prime() == Some(p), "{m:?}");
        assert_eq!(s.order() * s.order() * mc.order(), m.order());
        assert!(chain.windows(2).all(|w| w[0] > w[1]), "{chain:?}");
        if r >= 2 {
            let s1 = Subgroup::whole(m.group()).scaled(p.pow(r.div_ceil(2)) as i64);
            assert!(m.is_isotropic(&s1));
            assert!(s.contains_subgroup(&s1));
            let q = m.induced_form(&s1).unwrap();
            assert!(exponent_of_p(q.module.n(), p) < r);
        }
    }
}

#[test]
fn s_is_characteristic() {
    for m in corpus() {
        let (s, _) = canonical_isotropic(&m).unwrap();
        for g in m.sample_sp(5, 100) {
            assert_eq!(s.image(|x| g.apply(x)), s);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let images = random_automorphism(m.group(), &mut rng, 10);
            assert_eq!(s.image(|x| apply_images(m.group(), &images, x)), s, "{m:?}");
        }
    }
}

#[test]
fn lifted_lagrangians_and_invariants() {
    for m in corpus() {
        let grp = HeisGrp::new(m.clone());
        let red = ReductionData::new(&grp).unwrap();
        let s = red.s();
        let mc = red.mc();
        let root_mc = (mc.order() as f64).sqrt().round() as i64;
        for lc in mc.enumerate_lagrangians(None).unwrap() {
            let l = red.lag_lift(&lc);
            assert_eq!(m.orth_complement(&l), l);
            assert_eq!(l.order(), s.order() * lc.order());
            assert_eq!(l.order() * l.order(), m.order());
            assert_eq!(red.lag_project(&l).unwrap(), lc);

            let v = grp.induce(&l).unwrap();
            let total = s.elements().iter().fold(CycNum::zero(1), |acc, x| {
                &acc + &v.rho(&grp.elem(x.clone(), 0)).trace()
            });
            let avg = total.scale(&BigRational::new(1.into(), (s.order() as i64).into()));
            assert_eq!(avg, CycNum::from_integer(1, root_mc), "{m:?}");
        }
    }
}

#[test]
fn alpha_needs_the_full_center() {
    // With H_c = M_c × μ_p, no homomorphism μ_n → μ_p makes (m, a) ↦ (m mod S, φ(a))
    // multiplicative on S^⊥ × μ_n.
    for blocks in [&[(27u64, 1u64)][..], &[(9, 1), (3, 1)]] {
        let m = standard_module(blocks).unwrap();
        let grp = HeisGrp::new(m.clone());
        let red = ReductionData::new(&grp).unwrap();
        let p = red.prime();
        let hp = HeisGrp::new(red.mc().clone());
        assert_eq!(hp.center(), p);
        let perp = red.perp().elements();
        for c in 0..p as i64 {
            let alpha =
                |x: &heisrep::heisenberg::HElem| hp.elem(red.project(&x.m).unwrap(), c * x.a);
            let fails = perp.iter().any(|x| {
                perp.iter().any(|y| {
                    let (hx, hy) = (grp.elem(x.clone(), 0), grp.elem(y.clone(), 0));
                    alpha(&grp.product(&hx, &hy)) != hp.product(&alpha(&hx), &alpha(&hy))
                })
            });
            assert!(fails, "φ(a) = {c}a would be a homomorphism for {blocks:?}");
        }
        for x in &perp {
            for y in perp.iter().step_by(5) {
                let (hx, hy) = (grp.elem(x.clone(), 1), grp.elem(y.clone(), 2));
                let lhs = red.alpha(&grp.product(&hx, &hy)).unwrap();
                let rhs = red
                    .hc()
                    .product(&red.alpha(&hx).unwrap(), &red.alpha(&hy).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn lifted_family_on_a_twisted_module() {
    let m = twisted(&standard_module(&[(9, 1), (3, 1)]).unwrap(), 2);
    let grp = HeisGrp::new(m.clone());
    let red = Arc::new(ReductionData::new(&grp).unwrap());
    let (b0, _) = red
        .mc()
        .enhanced_points(&red.mc().enumerate_lagrangians(None).unwrap()[0])
        .unwrap();
    let fam = LiftedSystem::new(red, &b0, None).unwrap();
    fam.check_lifts().unwrap();
    let gs = m.sample_sp(3, 10);
    for r in axiom_suite(&fam, &gs, None) {
        assert!(r.passed(), "{r:?}");
    }
    assert_eq!(fam.enhanced().len(), 8);
}
