use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffg::coalgebra::{behavioral_equiv, is_coalg_hom, FfgCoalgebra};
use ffg::dsl::{
    coalgebra_from_json, coalgebra_to_json, format_coalgebra, format_equation, parse_coalgebra, parse_free_equation,
};
use ffg::elgot::{check_solution, kleene_solve, ElgotAlgebra, KleeneAlgebra, PointedPoset, Trivial};
use ffg::equation::{random_equation, reparameterize, sequence, FfgEquation};
use ffg::functor::{builtin_law, DistributiveLaw, FNode, Law, Moore, Shape};
use ffg::phi::{ep_equiv, BisimBackend, BisimPhi, EpStream, StreamPhi};
use ffg::variety::{eval_free, Algebra, Free};
use ffg::{FreeElem, Term, Variety};

fn law(variety: Variety, shape: Shape) -> Law {
    builtin_law(variety, shape).unwrap()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn term_strategy(variety: Variety, n: usize) -> BoxedStrategy<Term<usize>> {
    match variety {
        Variety::Set => (0..n).prop_map(Term::Var).boxed(),
        Variety::Unary => (0..6u64, 0..n).prop_map(|(k, x)| Term::Iter(k, x)).boxed(),
        Variety::Jsl => proptest::collection::btree_set(0..n, 0..=n).prop_map(Term::Join).boxed(),
    }
}

fn nested_strategy(variety: Variety, n: usize) -> BoxedStrategy<Term<Term<Term<usize>>>> {
    let inner = term_strategy(variety, n);
    let mid = match variety {
        Variety::Set => inner.prop_map(Term::Var).boxed(),
        Variety::Unary => (0..4u64, inner).prop_map(|(k, t)| Term::Iter(k, t)).boxed(),
        Variety::Jsl => proptest::collection::btree_set(inner, 0..3).prop_map(Term::Join).boxed(),
    };
    match variety {
        Variety::Set => mid.prop_map(Term::Var).boxed(),
        Variety::Unary => (0..4u64, mid).prop_map(|(k, t)| Term::Iter(k, t)).boxed(),
        Variety::Jsl => proptest::collection::btree_set(mid, 0..3).prop_map(Term::Join).boxed(),
    }
}

fn variety_strategy() -> impl Strategy<Value = Variety> {
    prop_oneof![Just(Variety::Set), Just(Variety::Unary), Just(Variety::Jsl)]
}

fn stream_strategy() -> impl Strategy<Value = EpStream> {
    (proptest::collection::vec(0..5u64, 0..4), proptest::collection::vec(0..5u64, 1..4))
        .prop_map(|(p, q)| EpStream::new(p, q).unwrap())
}

fn random_nfa(law: &Law, n: usize, rng: &mut ChaCha8Rng) -> FfgCoalgebra {
    let shape = law.shape();
    let step = (0..n)
        .map(|_| {
            let label = rng.gen_range(0..shape.label_count());
            let kids = (0..shape.arity(label))
                .map(|_| Term::Join((0..n).filter(|_| rng.gen_bool(0.4)).collect()))
                .collect();
            FNode::new(label, kids)
        })
        .collect();
    FfgCoalgebra::new(law.clone(), names("q", n), step).unwrap()
}

fn random_unary(law: &Law, n: usize, rng: &mut ChaCha8Rng) -> FfgCoalgebra {
    let step = (0..n)
        .map(|_| FNode::new(0, vec![Term::Iter(rng.gen_range(0..4), rng.gen_range(0..n))]))
        .collect();
    FfgCoalgebra::new(law.clone(), names("x", n), step).unwrap()
}

fn nfa_law() -> Law {
    law(Variety::Jsl, Shape::Moore(Moore::binary(2)))
}

fn stream_law() -> Law {
    law(Variety::Unary, Shape::Id)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unit_is_neutral_for_flatten(v in variety_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..4);
        let t = ffg::equation::random_term(v, n, 5, &mut rng);
        prop_assert_eq!(Term::flatten(&v.unit(t.clone())), t.clone());
        prop_assert_eq!(Term::flatten(&t.map(|x| v.unit(*x))), t);
    }

    #[test]
    fn flatten_is_associative(t in variety_strategy().prop_flat_map(|v| nested_strategy(v, 3))) {
        let outer_first = Term::flatten(&Term::flatten(&t));
        let inner_first = Term::flatten(&t.map(Term::flatten));
        prop_assert_eq!(outer_first, inner_first);
    }

    #[test]
    fn normalization_is_idempotent_and_keeps_values(s in stream_strategy()) {
        let n = s.normalize();
        prop_assert_eq!(n.normalize(), n.clone());
        let k = 3 * (s.prefix().len() + s.period().len());
        prop_assert_eq!(n.take(k), s.take(k));
        prop_assert_eq!(n.mean(), s.mean());
    }

    #[test]
    fn equivalence_ignores_presentation(
        s in stream_strategy(),
        prefix in proptest::collection::vec(0..7u64, 0..4),
        rot in 0..3usize,
        reps in 1..4usize,
    ) {
        let mut period = s.period().to_vec();
        let r = rot % period.len();
        period.rotate_left(r);
        let t = EpStream::new(prefix, period.repeat(reps)).unwrap();
        prop_assert!(ep_equiv(&s, &t));
        prop_assert!(ep_equiv(&t, &s));
        prop_assert_eq!(s.mean(), t.mean());
    }

    #[test]
    fn equivalence_is_mean_equality(s in stream_strategy(), t in stream_strategy()) {
        prop_assert_eq!(ep_equiv(&s, &t), s.mean() == t.mean());
    }

    #[test]
    fn stream_literals_round_trip(s in stream_strategy()) {
        let back: EpStream = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn coalgebra_text_round_trips(seed in any::<u64>(), jsl in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..5);
        let (l, c) = if jsl {
            let l = nfa_law();
            let c = random_nfa(&l, n, &mut rng);
            (l, c)
        } else {
            let l = stream_law();
            let c = random_unary(&l, n, &mut rng);
            (l, c)
        };
        let text = format_coalgebra(&c);
        let back = parse_coalgebra(&text, &l).unwrap();
        prop_assert_eq!(back.step(), c.step());
        prop_assert_eq!(format_coalgebra(&back), text);
        let json = coalgebra_from_json(&coalgebra_to_json(&c)).unwrap();
        prop_assert_eq!(json.step(), c.step());
    }

    #[test]
    fn equation_text_round_trips(seed in any::<u64>(), which in 0..3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = match which {
            0 => law(Variety::Set, Shape::Poly(vec![("f".into(), 2), ("c".into(), 0)])),
            1 => law(Variety::Unary, Shape::Moore(Moore::binary(2))),
            _ => nfa_law(),
        };
        let params = Free::numbered(l.variety(), "z", 2);
        let pool: Vec<FreeElem> = (0..3).map(|_| ffg::equation::random_term(l.variety(), 2, 3, &mut rng)).collect();
        let e = random_equation(&l, rng.gen_range(1..4), &params, &pool, 3, &mut rng);
        let text = format_equation(&e, |p| params.display(p));
        let back = parse_free_equation(&text, &l, params.clone()).unwrap();
        prop_assert!(back.same_as(&e), "{} reparsed differently", text);
    }

    #[test]
    fn identity_reparameterization_is_identity(seed in any::<u64>(), which in 0..3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = match which {
            0 => law(Variety::Set, Shape::Id),
            1 => stream_law(),
            _ => nfa_law(),
        };
        let params = Free::numbered(l.variety(), "z", 2);
        let pool: Vec<FreeElem> = (0..3).map(|_| ffg::equation::random_term(l.variety(), 2, 3, &mut rng)).collect();
        let e = random_equation(&l, rng.gen_range(1..4), &params, &pool, 3, &mut rng);
        let same = reparameterize(|p: &FreeElem| p.clone(), params.clone(), &e).unwrap();
        prop_assert!(same.same_as(&e));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn behavioral_equivalence_is_an_equivalence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = nfa_law();
        let c = random_nfa(&l, rng.gen_range(1..4), &mut rng);
        let states: Vec<FreeElem> = (0..4)
            .map(|_| Term::Join((0..c.len()).filter(|_| rng.gen_bool(0.5)).collect()))
            .collect();
        for a in &states {
            prop_assert!(behavioral_equiv(&c, a, &c, a).unwrap());
            for b in &states {
                let ab = behavioral_equiv(&c, a, &c, b).unwrap();
                prop_assert_eq!(ab, behavioral_equiv(&c, b, &c, a).unwrap());
                for d in &states {
                    if ab && behavioral_equiv(&c, b, &c, d).unwrap() {
                        prop_assert!(behavioral_equiv(&c, a, &c, d).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn homomorphisms_preserve_behavior(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = nfa_law();
        let c = random_nfa(&l, rng.gen_range(1..4), &mut rng);
        let d = random_nfa(&l, rng.gen_range(1..4), &mut rng);
        let (sum, inl, inr) = c.coproduct(&d).unwrap();
        prop_assert!(is_coalg_hom(&c, &sum, &inl).is_ok());
        prop_assert!(is_coalg_hom(&d, &sum, &inr).is_ok());
        for (x, t) in inl.iter().enumerate() {
            prop_assert!(behavioral_equiv(&c, &c.eta(x), &sum, t).unwrap());
        }
    }

    #[test]
    fn classes_form_a_cocone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bis = BisimPhi::new(BisimBackend::binary(2));
        let c = random_nfa(bis.law(), rng.gen_range(1..4), &mut rng);
        let d = random_nfa(bis.law(), rng.gen_range(1..4), &mut rng);
        let (sum, inl, _) = c.coproduct(&d).unwrap();
        for (x, t) in inl.iter().enumerate() {
            prop_assert_eq!(bis.class_of(&c, &c.eta(x)).unwrap(), bis.class_of(&sum, t).unwrap());
        }

        let phi = StreamPhi::streams();
        let l = phi.law().clone();
        let c = random_unary(&l, rng.gen_range(1..4), &mut rng);
        let d = random_unary(&l, rng.gen_range(1..4), &mut rng);
        let (sum, inl, _) = c.coproduct(&d).unwrap();
        for (x, t) in inl.iter().enumerate() {
            prop_assert_eq!(phi.class_of(&c, &c.eta(x)).unwrap(), phi.class_of(&sum, t).unwrap());
        }
    }

    #[test]
    fn solutions_ignore_the_choice_of_representative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = StreamPhi::streams();
        let s = EpStream::new(
            (0..rng.gen_range(0..3)).map(|_| rng.gen_range(0..4)).collect(),
            (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..4)).collect(),
        ).unwrap();
        let mut period = s.period().to_vec();
        period.rotate_left(1);
        let t = EpStream::new(vec![rng.gen_range(0..9)], period.repeat(2)).unwrap();
        let (cs, xs) = s.realize();
        let (ct, xt) = t.realize();
        let a = phi.class_of(&cs, &xs).unwrap();
        let b = phi.class_of(&ct, &xt).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(!a.same_rep(&b) || s == t);

        let e = random_equation(phi.law(), rng.gen_range(1..4), &phi, std::slice::from_ref(&a), 3, &mut rng);
        let swapped = reparameterize(|_| b.clone(), phi.clone(), &e).unwrap();
        let sa = phi.solve(&e).unwrap();
        let sb = phi.solve(&swapped).unwrap();
        prop_assert_eq!(&sa.values, &sb.values);
        prop_assert!(check_solution(&phi, &e, &sa));
    }

    #[test]
    fn sequencing_with_a_trivial_tail_keeps_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = StreamPhi::streams();
        let l = phi.law().clone();
        let ny = rng.gen_range(1..3);
        let params = Free::numbered(l.variety(), "y", ny);
        let pool: Vec<FreeElem> = (0..ny).map(|y| Term::Iter(0, y)).collect();
        let e = random_equation(&l, rng.gen_range(1..3), &params, &pool, 2, &mut rng);
        let tail: Vec<_> = (0..ny).map(|_| phi.mean(rng.gen_range(0..5), rng.gen_range(1..3))).collect();
        let f = FfgEquation::new(l.clone(), names("y", ny), phi.clone(), tail.iter().cloned().map(ffg::variety::Sum::Inr).collect()).unwrap();
        let direct = reparameterize(|p: &FreeElem| eval_free(&phi, &tail, p), phi.clone(), &e).unwrap();
        let composed = phi.solve(&sequence(&e, &f).unwrap()).unwrap();
        let expected = phi.solve(&direct).unwrap();
        prop_assert_eq!(&composed.values[..e.len()], &expected.values[..]);
    }

    #[test]
    fn kleene_solutions_are_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let posets = PointedPoset::all_with_bottom(n);
        let p = posets[rng.gen_range(0..posets.len())].clone();
        let maps = p.monotone_maps();
        let k = KleeneAlgebra::unary_map(p, maps[rng.gen_range(0..maps.len())].clone()).unwrap();
        let elems: Vec<usize> = (0..n).collect();
        let e = random_equation(k.law(), rng.gen_range(1..4), &k, &elems, 0, &mut rng);
        let s = kleene_solve(&k, &e).unwrap();
        prop_assert!(check_solution(&k, &e, &s));
    }
}

/// A one-state coalgebra `x ↦ +1 x` admits a homomorphism into the stream
/// fixed point for every class, so the fixed point is not final.
#[test]
fn stream_fixed_point_is_not_final() {
    let phi = StreamPhi::streams();
    let c = parse_coalgebra("x -> +1 x", phi.law()).unwrap();
    let mut homs = BTreeSet::new();
    for (a, b) in [(0, 1), (1, 1), (3, 2), (7, 3)] {
        let q = phi.mean(a, b);
        let h = |t: &FreeElem| eval_free(&phi, std::slice::from_ref(&q), t);
        let lhs = phi.unfold(&h(&c.eta(0)));
        let rhs = c.structure(&c.eta(0)).map(h);
        assert_eq!(lhs, rhs);
        homs.insert(q);
    }
    assert_eq!(homs.len(), 4);
}

/// The map from the stream fixed point to the one-point coalgebra commutes
/// with the transition structures.
#[test]
fn stream_fixed_point_collapses_to_a_point() {
    let phi = StreamPhi::streams();
    let point = Trivial::new(phi.law().clone());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let q = phi.mean(rng.gen_range(0..9), rng.gen_range(1..5));
        let image = phi.unfold(&q).map(|_| ());
        assert_eq!(point.structure(&image), ());
        assert_eq!(image, FNode::new(0, vec![()]));
    }
}

#[test]
fn free_algebra_homomorphisms_commute_with_operations() {
    let v = Variety::Jsl;
    let target = Free::numbered(v, "g", 2);
    let images = vec![Term::Join(BTreeSet::from([0])), Term::Join(BTreeSet::from([0, 1]))];
    let xs = Free::numbered(v, "x", 2);
    let elems = xs.elements(None).unwrap();
    for a in &elems {
        for b in &elems {
            let joined = xs.join(a, b);
            let lhs = eval_free(&target, &images, &joined);
            let rhs = target.join(&eval_free(&target, &images, a), &eval_free(&target, &images, b));
            assert_eq!(lhs, rhs);
        }
    }
    assert_eq!(eval_free(&target, &images, &xs.bottom()), target.bottom());
}
