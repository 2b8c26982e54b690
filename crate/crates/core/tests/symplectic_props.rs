use heisrep::abgroup::{apply_images, random_automorphism, AbGroup};
use heisrep::cyclo::{root_of_unity, CycNum};
use heisrep::harness::odd_groups_up_to;
use heisrep::reduction::canonical_isotropic;
use heisrep::symplectic::{gauss_sum, random_symmetric_form, standard_module, SympMod};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// M with its Gram matrix moved by a random group automorphism.
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

fn small_modules() -> Vec<SympMod> {
    let mut out: Vec<SympMod> = [&[(3, 1)][..], &[(5, 1)], &[(7, 1)], &[(9, 1)], &[(3, 2)]]
        .iter()
        .map(|b| standard_module(b).unwrap())
        .collect();
    for seed in 0..4 {
        out.push(twisted(&standard_module(&[(3, 2)]).unwrap(), seed));
        out.push(twisted(&standard_module(&[(9, 1)]).unwrap(), seed));
    }
    out
}

/// Every alternating biadditive Z/n-valued form on the basis, by exhaustion.
fn alternating_forms(g: &AbGroup, n: u64) -> Vec<Vec<Vec<i64>>> {
    let r = g.rank();
    let slots: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
        .collect();
    let steps: Vec<i64> = slots
        .iter()
        .map(|&(i, j)| (n / gcd(g.orders()[i], g.orders()[j])) as i64)
        .collect();
    let mut out = vec![vec![vec![0i64; r]; r]];
    for (k, &(i, j)) in slots.iter().enumerate() {
        let mut next = Vec::new();
        for b in &out {
            let mut v = 0;
            while v < n as i64 {
                let mut c = b.clone();
                c[i][j] = v;
                c[j][i] = (n as i64 - v) % n as i64;
                next.push(c);
                v += steps[k];
            }
        }
        out = next;
    }
    out
}

#[test]
fn half_form_is_the_unique_square_root() {
    for m in small_modules() {
        let g = m.group();
        let n = m.n();
        let solutions: Vec<_> = alternating_forms(g, n)
            .into_iter()
            .filter(|b| {
                (0..g.rank()).all(|i| {
                    (0..g.rank()).all(|j| {
                        (2 * b[i][j] - m.pair(&g.basis(i), &g.basis(j))).rem_euclid(n as i64) == 0
                    })
                })
            })
            .collect();
        assert_eq!(solutions.len(), 1, "{m:?}");
        for i in 0..g.rank() {
            for j in 0..g.rank() {
                assert_eq!(
                    m.beta(&g.basis(i), &g.basis(j)).rem_euclid(n as i64),
                    solutions[0][i][j]
                );
            }
        }
        for x in g.elements() {
            for y in g.elements().step_by(7) {
                let b = m.beta(&x, &y);
                assert_eq!((2 * b - m.pair(&x, &y)).rem_euclid(n as i64), 0);
                assert_eq!((b + m.beta(&y, &x)).rem_euclid(n as i64), 0);
            }
            assert_eq!(m.beta(&x, &x).rem_euclid(n as i64), 0);
        }
    }
}

#[test]
fn lagrangians_are_self_orthogonal_of_half_order() {
    for m in small_modules() {
        let lags = m.enumerate_lagrangians(None).unwrap();
        assert!(!lags.is_empty());
        for l in &lags {
            assert_eq!(l.order() * l.order(), m.order());
            assert_eq!(&m.orth_complement(l), l);
        }
    }
}

#[test]
fn elementary_lagrangian_counts() {
    for (p, d) in [(3u64, 1u32), (3, 2), (5, 1), (7, 1)] {
        let m = standard_module(&[(p, d as u64)]).unwrap();
        let expected: u64 = (1..=d).map(|i| p.pow(i) + 1).product();
        assert_eq!(
            m.enumerate_lagrangians(None).unwrap().len() as u64,
            expected,
            "p = {p}, d = {d}"
        );
    }
}

#[test]
fn sp_action_on_lagrangians_and_enhanced_points() {
    for blocks in [&[(3u64, 1u64)][..], &[(5, 1)], &[(3, 2)]] {
        let m = standard_module(blocks).unwrap();
        let lags = m.enumerate_lagrangians(None).unwrap();
        let gs = m.sample_sp(11, 12);
        for g in &gs {
            assert!(m.preserves_form(g));
        }
        for (a, g) in gs.iter().enumerate() {
            let h = &gs[(a + 5) % gs.len()];
            for l in lags.iter().step_by(3) {
                let gl = l.image(|x| g.apply(x));
                assert!(m.is_lagrangian(&gl));
                let (plus, minus) = m.enhanced_points(l).unwrap();
                for l0 in [plus, minus] {
                    let lhs = m.act_enhanced(&g.compose(h), &l0).unwrap();
                    let rhs = m.act_enhanced(g, &m.act_enhanced(h, &l0).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                    assert_eq!(
                        m.act_enhanced(g, &m.flip(&l0)).unwrap(),
                        m.flip(&m.act_enhanced(g, &l0).unwrap())
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_sum_fourth_power(seed in any::<u64>()) {
        let groups = odd_groups_up_to(81);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = AbGroup::new(groups[rng.gen_range(0..groups.len())].clone()).unwrap();
        let b = random_symmetric_form(&l, &mut rng).unwrap();
        let g = gauss_sum(&l, &b).unwrap();
        let sq = &g * &g;
        prop_assert_eq!(&sq * &sq, CycNum::from_integer(1, (l.order() * l.order()) as i64));
    }

    #[test]
    fn induced_pairing_is_independent_of_lifts(seed in any::<u64>(), which in 0usize..4) {
        let blocks: [&[(u64, u64)]; 4] = [&[(9, 1)], &[(27, 1)], &[(9, 1), (3, 1)], &[(25, 1)]];
        let m = standard_module(blocks[which]).unwrap();
        let (s, _) = canonical_isotropic(&m).unwrap();
        let red = m.induced_form(&s).unwrap();
        let perp = m.orth_complement(&s);
        let (pe, se) = (perp.elements(), s.elements());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m.n() as i64;
        let mc = &red.module;
        for _ in 0..20 {
            let x = &pe[rng.gen_range(0..pe.len())];
            let y = &pe[rng.gen_range(0..pe.len())];
            let sx = &se[rng.gen_range(0..se.len())];
            let sy = &se[rng.gen_range(0..se.len())];
            let g = m.group();
            let base = m.pair(x, y);
            prop_assert_eq!((m.pair(&g.add(x, sx), &g.add(y, sy)) - base).rem_euclid(n), 0);
            let (xc, yc) = (red.quotient.proj(x), red.quotient.proj(y));
            prop_assert_eq!((red.scale * mc.pair(&xc, &yc) - base).rem_euclid(n), 0);
            if mc.rank() > 0 {
                let nc = mc.n() as i64;
                let bc = mc.beta(&xc, &yc);
                prop_assert_eq!((2 * bc - mc.pair(&xc, &yc)).rem_euclid(nc), 0);
                prop_assert_eq!((bc + mc.beta(&yc, &xc)).rem_euclid(nc), 0);
            }
        }
    }
}

#[test]
fn gauss_sum_examples() {
    let z3 = AbGroup::new(vec![3]).unwrap();
    let g3 = gauss_sum(&z3, &[vec![1]]).unwrap();
    assert_eq!(g3, CycNum::from_int_coeffs(3, &[1, 2]));
    let z33 = AbGroup::new(vec![3, 3]).unwrap();
    let g33 = gauss_sum(&z33, &[vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(g33, &g3 * &g3);
    let sq = &g33 * &g33;
    assert_eq!(&sq * &sq, CycNum::from_integer(1, 81));
    assert!(gauss_sum(&z33, &[vec![1, 0], vec![0, 0]]).is_err());
    assert!(gauss_sum(&z33, &[vec![1, 1], vec![0, 1]]).is_err());
}

/// For a diagonal form the sum factors over the cyclic summands.
#[test]
fn gauss_sum_of_diagonal_forms_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for orders in [vec![3, 9], vec![5, 5], vec![3, 3, 3], vec![27], vec![3, 15]] {
        let l = AbGroup::new(orders.clone()).unwrap();
        let e = l.exponent();
        let coeffs: Vec<i64> = orders
            .iter()
            .map(|&d| loop {
                let a = rng.gen_range(1..d as i64);
                if gcd(a as u64, d) == 1 {
                    break a;
                }
            })
            .collect();
        let form: Vec<Vec<i64>> = (0..orders.len())
            .map(|i| {
                (0..orders.len())
                    .map(|j| {
                        if i == j {
                            coeffs[i] * (e / orders[i]) as i64
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let direct = gauss_sum(&l, &form).unwrap();
        let product = orders
            .iter()
            .zip(&coeffs)
            .fold(CycNum::one(1), |acc, (&d, &a)| {
                let term =
                    (0..d as i64).fold(CycNum::zero(d), |s, x| &s + &root_of_unity(d, a * x * x));
                &acc * &term
            });
        assert_eq!(direct, product, "{orders:?}");
    }
}

#[test]
fn corrupted_forms_are_rejected() {
    assert!(SympMod::new(vec![3, 3], vec![vec![0, 1], vec![1, 0]]).is_err());
    assert!(SympMod::new(vec![3, 3], vec![vec![0, 0], vec![0, 0]]).is_err());
    assert!(SympMod::new(vec![3, 3], vec![vec![1, 1], vec![2, 0]]).is_err());
    assert!(SympMod::new(vec![9, 3], vec![vec![0, 1], vec![8, 0]]).is_err());
}
