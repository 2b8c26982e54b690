use heisrep::canonrep::{verify_svn, CanonicalRep};
use heisrep::cyclo::{root_of_unity, sqrt_prime, CycNum, Subfield};
use heisrep::heisenberg::{HElem, HeisGrp};
use heisrep::symplectic::standard_module;
use heisrep::verify::{check_field, some_entry_outside};

fn build(blocks: &[(u64, u64)]) -> CanonicalRep {
    let grp = HeisGrp::new(standard_module(blocks).unwrap());
    CanonicalRep::build(&grp, 0, None).unwrap()
}

const INSTANCES: [&[(u64, u64)]; 6] = [
    &[(3, 1)],
    &[(5, 1)],
    &[(7, 1)],
    &[(9, 1)],
    &[(3, 2)],
    &[(15, 1)],
];

#[test]
fn dimension_is_the_square_root_of_the_order() {
    for blocks in INSTANCES {
        let pi = build(blocks);
        assert_eq!(
            (pi.dim() * pi.dim()) as u64,
            pi.module().order(),
            "{blocks:?}"
        );
    }
}

#[test]
fn stone_von_neumann_on_small_instances() {
    for blocks in INSTANCES {
        let pi = build(blocks);
        for r in verify_svn(&pi, None).unwrap() {
            assert!(r.passed(), "{blocks:?}: {r:?}");
        }
    }
}

#[test]
fn heisenberg_and_symplectic_actions_are_exact() {
    for blocks in INSTANCES {
        let pi = build(blocks);
        let grp = pi.grp();
        let hs = grp.generators();
        for x in &hs {
            for y in &hs {
                assert_eq!(
                    pi.rho_h(x).compose(&pi.rho_h(y)),
                    pi.rho_h(&grp.product(x, y))
                );
            }
        }
        let z = pi.rho_h(&grp.elem(grp.base().group().zero(), 1));
        assert_eq!(
            z.trace(),
            CycNum::from_integer(1, pi.dim() as i64).mul_root_of(grp.center(), 1)
        );

        let gs = pi.module().transvection_generators();
        let mats: Vec<_> = gs.iter().map(|g| pi.rho_g(g)).collect();
        for (a, g) in gs.iter().enumerate() {
            for (b, h) in gs.iter().enumerate() {
                assert_eq!(mats[a].mul(&mats[b]), pi.rho_g(&g.compose(h)));
            }
            for h in &hs {
                let lhs = mats[a].right_monomial(&pi.rho_h(h));
                let rhs = mats[a].left_monomial(&pi.rho_h(&grp.act(g, h)));
                assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn characters_descend_and_entries_lie_in_k() {
    for blocks in INSTANCES {
        let pi = build(blocks);
        let grp = pi.grp();
        for h in grp.elements().step_by(5) {
            assert!(pi.descends(&pi.character_h(&h)));
        }
        for g in pi.module().sample_sp(1, 6) {
            assert!(pi.descends(&pi.character_g(&g)));
        }
        for f in pi.factors() {
            let (p, c) = (f.prime(), f.grp().center());
            let k = Subfield::generated_by(&[root_of_unity(c, 1), sqrt_prime(p).unwrap()], 4 * c);
            assert!(check_field(f.family(), &k, "K").passed());
        }
    }
}

/// The operator entries solve linear equations with coefficients in Q(μ_p)
/// whose solution is unique, so they are fixed by Gal(Q(μ_{4p})/Q(μ_p)).
#[test]
fn prime_plane_operators_are_defined_over_the_cyclotomic_field() {
    for p in [3u64, 5, 7] {
        let pi = build(&[(p, 1)]);
        let kp = Subfield::generated_by(&[root_of_unity(p, 1)], 4 * p);
        let fam = pi.factors()[0].family();
        assert_eq!(some_entry_outside(fam, &kp), None, "p = {p}");
        assert_eq!(pi.descent_probe(), vec![None]);
        let s = sqrt_prime(p).unwrap();
        assert!(!kp.contains(&s) || p % 4 == 1);
        let signed = if p % 4 == 1 {
            s.clone()
        } else {
            &s * &root_of_unity(4, 1)
        };
        assert!(kp.contains(&signed));
    }
}

#[test]
fn composite_character_is_the_product_of_factors() {
    let pi = build(&[(15, 1)]);
    assert_eq!(pi.dim(), 15);
    assert_eq!(pi.factors().len(), 2);
    let standalone: Vec<CanonicalRep> = pi
        .factors()
        .iter()
        .map(|f| CanonicalRep::build(f.grp(), 0, None).unwrap())
        .collect();
    let grp = pi.grp();
    let elems: Vec<HElem> = grp.elements().step_by(7).collect();
    for h in &elems {
        let whole = pi.character_h(h);
        let product = (0..2).fold(CycNum::one(1), |acc, i| &acc * &pi.factor_character(i, h));
        assert_eq!(whole, product);
        let separate = (0..2).fold(CycNum::one(1), |acc, i| {
            &acc * &standalone[i].character_h(&pi.factor_component(i, h))
        });
        assert_eq!(whole, separate);
    }
    let z = pi.rho_h(&grp.elem(grp.base().group().zero(), 1));
    assert_eq!(z.trace(), CycNum::from_integer(1, 15).mul_root_of(15, 1));
}
