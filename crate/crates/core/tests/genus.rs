mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selorder::arith::{is_fundamental_negative, kronecker, Primes};
use selorder::building::vertex_from_coords;
use selorder::classgroup::{class_group, prime_of_k};
use selorder::genus::{
    choose_generators, genus_group, parametrization, rho, standard_frames, DeviationData, FpSpan,
    GenusGroup, Hyperplane, DEFAULT_GENERATOR_BOUND,
};
use selorder::relext::{OkElement, QuadField};
use selorder::{ApartmentFrame, ClassGroup, PrimeOfK, QuadForm};

/// Elements of `C^p·⟨ram⟩`, by closure.
fn kernel(cg: &ClassGroup, p: u64, ram: &[PrimeOfK]) -> HashSet<QuadForm> {
    let mut gens: Vec<QuadForm> = cg
        .elements()
        .iter()
        .map(|f| cg.pow(f, p as i64).unwrap())
        .collect();
    gens.extend(ram.iter().map(|nu| nu.class_or_principal()));
    let mut set: HashSet<QuadForm> = HashSet::from([cg.identity()]);
    loop {
        let mut grew = false;
        for a in set.clone() {
            for g in &gens {
                grew |= set.insert(cg.compose(&a, g).unwrap());
            }
        }
        if !grew {
            return set;
        }
    }
}

fn split_primes(d: i64, count: usize) -> Vec<PrimeOfK> {
    Primes::new()
        .filter(|&l| kronecker(d, l) == 1)
        .flat_map(|l| [prime_of_k(l, d, 0).unwrap(), prime_of_k(l, d, 1).unwrap()])
        .take(count)
        .collect()
}

fn discs_with(p: u64) -> Vec<i64> {
    (3..3000)
        .map(|x| -x)
        .filter(|&d| is_fundamental_negative(d))
        .filter(|&d| (class_group(d).unwrap().order() as u64).is_multiple_of(p))
        .take(20)
        .collect()
}

#[test]
fn genus_law_matches_quotient() {
    for p in [3u64, 5] {
        for d in discs_with(p) {
            let cg = class_group(d).unwrap();
            let ram_choices = [vec![], split_primes(d, 1), split_primes(d, 3)];
            for ram in ram_choices {
                let g = genus_group(&cg, p, &ram).unwrap();
                let ker = kernel(&cg, p, &ram);
                assert_eq!(g.order() as usize * ker.len(), cg.order(), "d = {d}");
                assert_eq!(g.order(), p.pow(g.rank() as u32));
                for f in cg.elements() {
                    let c = g.class_of_form(f).unwrap();
                    assert_eq!(c.is_identity(), ker.contains(f));
                    assert!(g.pow(&c, p as i64).is_identity());
                }
                let els = g.elements();
                assert_eq!(els.len() as u64, g.order());
                assert!(els.iter().all(|x| g.pow(x, p as i64).is_identity()));
            }
        }
    }
}

#[test]
fn class_of_form_is_a_homomorphism() {
    for d in [-23, -87, -199, -283, -331, -1399] {
        let cg = class_group(d).unwrap();
        let g = genus_group(&cg, 3, &[]).unwrap();
        for a in cg.elements() {
            for b in cg.elements() {
                let lhs = g.class_of_form(&cg.compose(a, b).unwrap()).unwrap();
                let rhs = g.compose(&g.class_of_form(a).unwrap(), &g.class_of_form(b).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn fp_span_basics() {
    let mut s = FpSpan::new(3, 3);
    assert!(s.insert(&[1, 2, 0]));
    assert!(!s.insert(&[2, 1, 0]));
    assert!(s.insert(&[0, 1, 1]));
    assert_eq!(s.rank(), 2);
    let phi = s.annihilator().unwrap();
    let h = Hyperplane::new(3, phi).unwrap();
    assert_eq!(h.eval(&[1, 2, 0]), 0);
    assert_eq!(h.eval(&[0, 1, 1]), 0);
    assert_ne!(h.eval(&[1, 0, 0]), 0);
    assert!(Hyperplane::new(3, vec![0, 0, 0]).is_err());
}

fn random_lattice_dev<R: Rng>(rng: &mut R, g: &GenusGroup, primes: &[PrimeOfK]) -> DeviationData {
    let p = g.p() as usize;
    let mut dev = DeviationData::empty(p);
    for nu in primes {
        if rng.gen_bool(0.3) {
            continue;
        }
        let basis = common::random_basis(rng, p, nu.ell());
        let frame = ApartmentFrame::new(basis).unwrap();
        let a: Vec<i64> = (0..p).map(|_| rng.gen_range(-2..=2)).collect();
        dev.insert(nu.clone(), vertex_from_coords(&frame, &a).unwrap())
            .unwrap();
    }
    dev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rho_is_a_cocycle(di in 0usize..3, seed in any::<u64>()) {
        let d = [-23i64, -31, -87][di];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = genus_group(&class_group(d).unwrap(), 3, &[]).unwrap();
        let primes = split_primes(d, 4);
        let devs: Vec<DeviationData> = (0..3).map(|_| random_lattice_dev(&mut rng, &g, &primes)).collect();
        let r12 = rho(&devs[0], &devs[1], &g).unwrap();
        let r23 = rho(&devs[1], &devs[2], &g).unwrap();
        let r13 = rho(&devs[0], &devs[2], &g).unwrap();
        prop_assert_eq!(g.compose(&r12, &r23), r13);
        prop_assert!(g.compose(&r12, &rho(&devs[1], &devs[0], &g).unwrap()).is_identity());
        prop_assert!(rho(&devs[0], &devs[0], &g).unwrap().is_identity());
    }

    /// A global diagonal conjugation `diag(x_1, .., x_p)` moves the standard
    /// lattice at `ν` to the vertex `[v_ν(x_1), .., v_ν(x_p)]`.
    #[test]
    fn rho_trivial_on_global_conjugation(di in 0usize..2, seed in any::<u64>()) {
        let d = [-23i64, -31][di];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = QuadField::new(d).unwrap();
        let g = genus_group(&class_group(d).unwrap(), 3, &[]).unwrap();
        let xs: Vec<OkElement> = (0..3).map(|_| common::split_supported(&mut rng, &k, d)).collect();
        let dev = common::global_diagonal_dev(&xs, d, 3);
        let r = rho(&DeviationData::empty(3), &dev, &g).unwrap();
        prop_assert!(r.is_identity());
    }
}

#[test]
fn parametrization_is_a_bijection() {
    for (d, p) in [(-23i64, 3u64), (-31, 3), (-47, 5), (-3299, 3)] {
        let g = genus_group(&class_group(d).unwrap(), p, &[]).unwrap();
        let gens = choose_generators(&g, None, None, &[], DEFAULT_GENERATOR_BOUND).unwrap();
        let frames = standard_frames(&g, &gens);
        let m = g.rank();
        let mut seen = HashSet::new();
        for idx in 0..p.pow(m as u32) {
            let gamma: Vec<u64> = (0..m).map(|i| idx / p.pow(i as u32) % p).collect();
            let dev = parametrization(&g, &gens, &frames, &gamma).unwrap();
            let r = rho(&DeviationData::empty(p as usize), &dev, &g).unwrap();
            assert!(seen.insert(r.coords.clone()), "d = {d}: repeated class");
        }
        assert_eq!(seen.len() as u64, g.order());
    }
}

#[test]
fn generators_respect_hyperplane() {
    let d = -3299;
    let g = genus_group(&class_group(d).unwrap(), 3, &[]).unwrap();
    assert!(g.rank() >= 2, "rank {}", g.rank());
    let h = Hyperplane::new(3, vec![1; g.rank()]).unwrap();
    let gens = choose_generators(&g, None, Some(&h), &[], DEFAULT_GENERATOR_BOUND).unwrap();
    assert!(!h.contains(&g.class_of_prime(&gens[0]).unwrap()));
    for nu in &gens[1..] {
        assert!(h.contains(&g.class_of_prime(nu).unwrap()));
    }
}

#[test]
fn deviation_rules() {
    let g = genus_group(&class_group(-23).unwrap(), 3, &[]).unwrap();
    let mut dev = DeviationData::empty(3);
    let inert = prime_of_k(5, -23, 0).unwrap();
    let ramified = prime_of_k(23, -23, 0).unwrap();
    let split = prime_of_k(2, -23, 0).unwrap();
    let v5 = vertex_from_coords(&ApartmentFrame::standard(3, 5), &[1, 0, 0]).unwrap();
    let v23 = vertex_from_coords(&ApartmentFrame::standard(3, 23), &[1, 0, 0]).unwrap();
    let v2 = vertex_from_coords(&ApartmentFrame::standard(3, 2), &[1, 0, 0]).unwrap();
    assert!(dev.insert(inert, v5).is_err());
    assert!(dev.insert(ramified, v23).is_err());
    assert!(dev.insert(split.clone(), v2.clone()).is_ok());
    assert!(dev.insert(prime_of_k(3, -23, 0).unwrap(), v2).is_err());
    let r = rho(&DeviationData::empty(3), &dev, &g).unwrap();
    assert_eq!(r, g.class_of_prime(&split).unwrap());
    // The standard lattice is not recorded.
    let mut dev = DeviationData::empty(3);
    dev.insert(split, selorder::LatticeClass::standard(3, 2))
        .unwrap();
    assert!(dev.is_empty());
}

#[test]
fn frames_off_reference_rejected() {
    let g = genus_group(&class_group(-23).unwrap(), 3, &[]).unwrap();
    let gens = choose_generators(&g, None, None, &[], DEFAULT_GENERATOR_BOUND).unwrap();
    let shifted = selorder::LocalMatrix::prime_power_diagonal(gens[0].ell(), &[1, 0, 0]);
    let frames = vec![ApartmentFrame::new(shifted).unwrap()];
    assert!(parametrization(&g, &gens, &frames, &[1]).is_err());
}
