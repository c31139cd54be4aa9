use std::collections::BTreeMap;
use std::sync::LazyLock;

use endo_dga::arith::{index_exponent, int_valuation, root_exponent};
use endo_dga::complex::{differential, is_cycle, window};
use endo_dga::homology::{random_boundary, random_cycle, second_component_divisible};
use endo_dga::products::{massey_from_witnesses, representative, scalar_p};
use endo_dga::theta::{mul_linear_factor, mul_theta1, psi_post, psi_pre, q_post, seq_product};
use endo_dga::{
    boundary_witness, class_of, class_order, cohomology_product, Body, BoundaryCheck, ClassInvariant,
    ClassOrder, Cochain, Context, Error, HomologyClass, PadicFraction, RepresentativeMode, ThetaSeq,
    Valuation,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static P5: LazyLock<Context> = LazyLock::new(|| Context::new(5, 3).unwrap());
static P7: LazyLock<Context> = LazyLock::new(|| Context::new(7, 3).unwrap());

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn step(ctx: &Context) -> i64 {
    2 * ctx.p() as i64 - 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn valuation_is_additive(x in 1i64..125, y in 1i64..125) {
        let c = &*P5;
        let (a, b) = (c.int(x), c.int(y));
        if let (Valuation::Finite(va), Valuation::Finite(vb)) = (a.valuation(), b.valuation()) {
            if va + vb < c.precision() {
                prop_assert_eq!((a * b).valuation(), Valuation::Finite(va + vb));
            }
        }
    }

    #[test]
    fn fraction_classes_are_additive(x in -5000i64..5000, ex in 0u32..4, y in -5000i64..5000, ey in 0u32..4) {
        let c = &*P5;
        let a = c.fraction(x, ex).unwrap();
        let b = c.fraction(y, ey).unwrap();
        prop_assert_eq!(
            (a + b).fractional_part(),
            (a.fractional_part() + b.fractional_part()).fractional_part()
        );
        let again = PadicFraction::from_parts(a.mantissa(), a.exponent(), a.base());
        prop_assert_eq!(again, a);
    }

    #[test]
    fn differential_is_linear(seed in any::<u64>(), offset in 0i64..4, k in -3i64..=3, s in 0i64..125) {
        let c = &*P5;
        let n = step(c) * k - 1 + offset;
        let mut r = rng(seed);
        let x = Cochain::random(c, n, c.length(), 2, &mut r);
        let y = Cochain::random(c, n, c.length(), 2, &mut r);
        let dx = differential(&x).unwrap();
        let dy = differential(&y).unwrap();
        prop_assert_eq!(differential(&x.add(&y)).unwrap(), dx.add(&dy));
        // Scalars act on sequence components only; rational parts are kept at zero here.
        let xs = match x.body() {
            Body::SeqSeqRat(a, b, _) => Cochain::new(c, n, Body::SeqSeqRat(a.clone(), b.clone(), c.fraction_zero())).unwrap(),
            Body::SeqRat(a, _) => Cochain::new(c, n, Body::SeqRat(a.clone(), c.fraction_zero())).unwrap(),
            Body::Rat(_) => Cochain::zero(c, n),
            _ => x.clone(),
        };
        let s = c.int(s);
        prop_assert_eq!(differential(&xs.scale(s)).unwrap(), differential(&xs).unwrap().scale(s));
    }

    #[test]
    fn index_zero_is_multiplicative(seed in any::<u64>(), k in -2i64..=2, l in -2i64..=2) {
        let c = &*P5;
        let mut r = rng(seed);
        let a = ThetaSeq::random(c, k, 6, &mut r);
        let b = ThetaSeq::random(c, l, 6, &mut r);
        match seq_product(&a, &b) {
            Ok(prod) => prop_assert_eq!(prod[0], a[0] * b[0]),
            Err(Error::UndefinedTwistExponent { .. } | Error::NegativeTwistExponent { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn witnesses_map_onto_boundaries(seed in any::<u64>(), k in -3i64..=3, offset in 0i64..4) {
        let c = &*P5;
        let n = step(c) * k - 1 + offset;
        let mut r = rng(seed);
        let x = random_boundary(c, n, c.trusted_limit(), &mut r).unwrap();
        match boundary_witness(&x).unwrap() {
            BoundaryCheck::Boundary(w) => prop_assert_eq!(differential(&w).unwrap(), x),
            BoundaryCheck::NotBoundary(o) => prop_assert!(false, "boundary rejected: {o}"),
        }
    }

    #[test]
    fn odd_degree_boundary_criterion(seed in any::<u64>(), k in prop::sample::select(vec![1i64, -1, 2, 3, 5, -5, 10])) {
        let c = &*P5;
        let n = step(c) * k + 1;
        let mut r = rng(seed);
        let x = random_cycle(c, n, c.trusted_limit(), false, &mut r).unwrap();
        let Body::SeqRat(seq, _) = x.body() else { unreachable!() };
        let v = c.twist_valuation(k).unwrap();
        let divisible = seq[0].div_p_power(v).is_some();
        prop_assert_eq!(boundary_witness(&x).unwrap().is_boundary(), divisible);
    }

    #[test]
    fn second_components_are_divisible(seed in any::<u64>(), k in prop::sample::select(vec![1i64, -1, 2, 5, -5])) {
        let c = &*P5;
        let mut r = rng(seed);
        let x = random_cycle(c, step(c) * k, c.trusted_limit(), true, &mut r).unwrap();
        prop_assert!(is_cycle(&x).unwrap());
        prop_assert!(second_component_divisible(&x).unwrap());
    }

    #[test]
    fn classes_are_additive_and_vanish_on_boundaries(seed in any::<u64>(), k in prop::sample::select(vec![0i64, 1, -2, 5])) {
        let c = &*P5;
        let mut r = rng(seed);
        let degrees: Vec<i64> = if k == 0 { vec![0, 2] } else { vec![step(c) * k + 1] };
        for n in degrees {
            let x = random_cycle(c, n, c.trusted_limit(), false, &mut r).unwrap();
            let y = random_cycle(c, n, c.trusted_limit(), false, &mut r).unwrap();
            let b = random_boundary(c, n, c.trusted_limit(), &mut r).unwrap();
            let sum = class_of(&x.add(&y)).unwrap();
            prop_assert_eq!(&sum, &add_classes(c, &class_of(&x).unwrap(), &class_of(&y).unwrap()));
            prop_assert_eq!(class_of(&x.add(&b)).unwrap(), class_of(&x).unwrap());
            prop_assert_eq!(class_of(&b).unwrap().invariant, ClassInvariant::Zero);
            let zero = class_of(&x).unwrap().invariant == ClassInvariant::Zero;
            prop_assert_eq!(boundary_witness(&x).unwrap().is_boundary(), zero);
        }
    }

    #[test]
    fn pairing_vanishes_exactly_on_divisible_products(k in prop::sample::select(vec![1i64, -1, 5]), a in 0u64..25, b in 0u64..25) {
        let c = &*P5;
        let e = c.twist_valuation(k).unwrap();
        let m = c.p().pow(e);
        let (a, b) = (a % m, b % m);
        let class = |deg: i64, v: u64| HomologyClass {
            p: c.p(),
            degree: deg,
            invariant: if v == 0 { ClassInvariant::Zero } else { ClassInvariant::Torsion { value: v, exponent: e } },
        };
        let prod = cohomology_product(c, &class(-step(c) * k + 1, a), &class(step(c) * k + 1, b)).unwrap();
        let divisible = (a * b) % c.p().pow(2 * e) == 0;
        prop_assert_eq!(prod.invariant == ClassInvariant::Zero, divisible);
    }
}

fn add_classes(ctx: &Context, x: &HomologyClass, y: &HomologyClass) -> HomologyClass {
    use ClassInvariant::*;
    let invariant = match (&x.invariant, &y.invariant) {
        (Zero, other) | (other, Zero) => other.clone(),
        (Local(a), Local(b)) => Local(*a + *b),
        (Torsion { value: a, exponent }, Torsion { value: b, .. }) => Torsion {
            value: (a + b) % ctx.p().pow(*exponent),
            exponent: *exponent,
        },
        (RationalModLocal(a), RationalModLocal(b)) => RationalModLocal((*a + *b).fractional_part()),
        _ => panic!("mismatched classes"),
    };
    let invariant = match invariant {
        Local(v) if v.is_zero() => Zero,
        Torsion { value: 0, .. } => Zero,
        RationalModLocal(f) if f.is_zero() => Zero,
        other => other,
    };
    HomologyClass {
        p: x.p,
        degree: x.degree,
        invariant,
    }
}

#[test]
fn rpow_is_one_exactly_on_multiples_of_the_period() {
    for ctx in [&*P5, &*P7] {
        let period = ctx.period() as i64;
        for e in -3 * period..=3 * period {
            assert_eq!(ctx.rpow(e).residue() == 1, e % period == 0, "p = {} e = {e}", ctx.p());
        }
    }
}

#[test]
fn twist_scalar_valuations() {
    for ctx in [&*P5, &*P7] {
        let p = ctx.p() as i64;
        for k in (-p * p * 4..=p * p * 4).filter(|k| *k != 0) {
            let v = int_valuation(ctx.p(), k) + 1;
            if v >= ctx.precision() {
                continue;
            }
            let x = ctx.rpow(k * (p - 1)) - ctx.int(1);
            assert_eq!(x.valuation(), Valuation::Finite(v), "p = {p} k = {k}");
        }
    }
}

#[test]
fn root_exponent_image() {
    for t in 0..60i64 {
        let mut hits: BTreeMap<i64, usize> = BTreeMap::new();
        for j in 0..=(2 * t + 1) as u64 {
            *hits.entry(root_exponent(j)).or_default() += 1;
        }
        let expected: Vec<i64> = (-t..=t).collect();
        assert_eq!(hits.keys().copied().collect::<Vec<_>>(), expected);
        assert_eq!(hits[&0], 2);
        assert!(hits.iter().filter(|(k, _)| **k != 0).all(|(_, n)| *n == 1));
    }
    assert_eq!((1..=3).map(index_exponent).collect::<Vec<_>>(), vec![1, -1, 2]);
}

#[test]
fn structure_maps_commute() {
    for ctx in [&*P5, &*P7] {
        for k in -3..=3 {
            let mut r = rng(1000u64.wrapping_add(k as u64));
            for _ in 0..200 {
                let a = ThetaSeq::random(ctx, k, ctx.length(), &mut r);
                let lhs = psi_pre(&psi_post(&a).unwrap()).unwrap();
                let rhs = psi_post(&psi_pre(&a).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "p = {} k = {k}", ctx.p());
            }
        }
    }
}

#[test]
fn untwisted_psi_pre_is_theta1_and_kills_index_zero() {
    let mut r = rng(5);
    for ctx in [&*P5, &*P7] {
        for _ in 0..100 {
            let a = ThetaSeq::random(ctx, 0, ctx.length(), &mut r);
            let b = psi_pre(&a).unwrap();
            assert!(q_post(&b).is_zero());
            assert_eq!(b, mul_theta1(&a));
        }
    }
}

#[test]
fn untwisted_products_are_commutative_and_associative() {
    let c = &*P5;
    let quarter = c.length() / 4;
    let mut r = rng(17);
    for _ in 0..4 {
        let a = ThetaSeq::random(c, 0, quarter, &mut r);
        let b = ThetaSeq::random(c, 0, quarter, &mut r);
        let d = ThetaSeq::random(c, 0, quarter, &mut r);
        let ab = seq_product(&a, &b).unwrap();
        assert_eq!(ab, seq_product(&b, &a).unwrap());
        assert_eq!(
            seq_product(&ab, &d).unwrap(),
            seq_product(&a, &seq_product(&b, &d).unwrap()).unwrap()
        );
    }
}

#[test]
fn linear_factors_build_the_basis() {
    let c = &*P5;
    let mut t = ThetaSeq::basis(c, 0, 0);
    for m in 1..=40usize {
        t = mul_linear_factor(&t, root_exponent(m as u64));
        assert_eq!(t, ThetaSeq::basis(c, 0, m));
    }
}

#[test]
fn displayed_zero_entries() {
    let mut r = rng(9);
    for ctx in [&*P5, &*P7] {
        for k in -3..=3 {
            let w = window(ctx, k);
            for _ in 0..50 {
                let x = Cochain::random(ctx, w.degrees[0], ctx.length(), 0, &mut r);
                let dx = differential(&x).unwrap();
                if k == 0 {
                    let Body::SeqSeqRat(a, _, q) = dx.body() else { unreachable!() };
                    assert!(a[0].is_zero() && q.is_zero());
                }
                let y = Cochain::random(ctx, w.degrees[1], ctx.length(), 2, &mut r);
                if k != 0 {
                    let Body::SeqRat(_, q) = differential(&y).unwrap().into_body() else { unreachable!() };
                    assert!(q.is_zero());
                }
            }
        }
    }
}

#[test]
fn generator_orders() {
    for ctx in [&*P5, &*P7] {
        let p = ctx.p() as i64;
        for k in [1, -1, 2, 3, p, -p, 2 * p] {
            let n = step(ctx) * k + 1;
            let g = Cochain::new(ctx, n, Body::SeqRat(ThetaSeq::basis(ctx, k, 0), ctx.fraction_zero())).unwrap();
            let e = ctx.twist_valuation(k).unwrap();
            assert_eq!(class_order(&class_of(&g).unwrap()), ClassOrder::PPower(e));
        }
    }
}

fn perturbed_massey(ctx: &Context, i: i64, j: i64, w: &ThetaSeq) -> (HomologyClass, HomologyClass) {
    let a = representative(ctx, i, RepresentativeMode::OrderP, 1).unwrap();
    let c = representative(ctx, j, RepresentativeMode::OrderP, 1).unwrap();
    let b = scalar_p(ctx);
    let base = endo_dga::massey(ctx, i, j, RepresentativeMode::OrderP).unwrap();
    let shift = Cochain::new(ctx, step(ctx) * i - 1, Body::Seq(w.clone())).unwrap();
    let u2 = base.u.add(&differential(&shift).unwrap());
    let other = massey_from_witnesses(i, j, &a, &b, &c, &u2, &base.v).unwrap();
    (base.class, other.class)
}

/// Changing u by a boundary d(w) moves the result by -d(w)c, whose index-zero entry is
/// -lambda_i w_0 c_0. That is a boundary exactly when v(i) + v(j) + 1 > v(i + j).
#[test]
fn massey_witness_dependence_follows_valuations() {
    let c = &*P5;
    let mut r = rng(23);
    for (i, j) in [(1, 1), (1, 2), (2, 3), (1, 4), (2, 8), (3, 1), (4, 6)] {
        let invariant = c.nu(i) + c.nu(j) + 1 > c.nu(i + j);
        for _ in 0..8 {
            let w = ThetaSeq::from_ints(c, i, &[r.gen_range(1..125)]);
            let (x, y) = perturbed_massey(c, i, j, &w);
            let unit = w[0].is_unit();
            if invariant {
                assert_eq!(x, y, "({i}, {j})");
            } else if unit {
                assert_ne!(x, y, "({i}, {j})");
            }
        }
    }
}

#[test]
fn random_witness_choices_agree_when_valuations_allow() {
    let c = &*P5;
    let mut r = rng(29);
    for (i, j) in [(1, 1), (1, 2), (3, 1), (2, 2)] {
        for _ in 0..16 {
            let w = ThetaSeq::random(c, i, 1, &mut r);
            let (x, y) = perturbed_massey(c, i, j, &w);
            assert_eq!(x, y, "({i}, {j})");
        }
    }
}
