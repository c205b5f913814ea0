//! Recursive equations `e: X → F(TX) ⊕ A` with finitely many variables.
//!
//! Right-hand sides live in the coproduct of the lifted free algebra
//! `F(TX)` with the parameter algebra `A`. For `JSL` the coproduct is the
//! product, so every right-hand side is a pair (behavior, parameter); for the
//! other varieties it is a tagged union.

use std::collections::BTreeSet;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::functor::{random_node, DistributiveLaw, FNode, Law, Lifted};
use crate::variety::{display_term, Algebra, Coproduct, Free, FreeElem, Sum, Term, Variety};

pub type Rhs<E> = Sum<FNode<FreeElem>, E>;

#[derive(Clone, Debug)]
pub struct FfgEquation<A: Algebra> {
    law: Law,
    vars: Vec<String>,
    params: A,
    step: Vec<Rhs<A::Elem>>,
}

impl<A: Algebra + Clone> FfgEquation<A> {
    /// Validates the right-hand sides and brings them into the coproduct's
    /// canonical form (pairs for `JSL`).
    pub fn new(law: Law, vars: Vec<String>, params: A, step: Vec<Rhs<A::Elem>>) -> Result<Self> {
        if params.variety() != law.variety() {
            return Err(Error::VarietyMismatch {
                expected: law.variety(),
                found: params.variety(),
            });
        }
        if step.len() != vars.len() {
            return Err(Error::InvalidTerm(format!(
                "{} variables but {} right-hand sides",
                vars.len(),
                step.len()
            )));
        }
        let free = Free::new(law.variety(), vars.clone());
        let jsl = law.variety() == Variety::Jsl;
        let mut canonical = Vec::with_capacity(step.len());
        for rhs in step {
            if let Some(node) = rhs.left() {
                law.shape().validate(node)?;
                for child in &node.children {
                    free.validate(child)?;
                }
            }
            canonical.push(match rhs {
                Sum::Inl(n) if jsl => Sum::Pair(n, params.bottom()),
                Sum::Inr(a) if jsl => Sum::Pair(law.bottom_node(Term::Join(BTreeSet::new())), a),
                Sum::Pair(..) if !jsl => {
                    return Err(Error::InvalidTerm(format!(
                        "pairs only occur in {} coproducts",
                        Variety::Jsl
                    )))
                }
                other => other,
            });
        }
        Ok(FfgEquation {
            law,
            vars,
            params,
            step: canonical,
        })
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn variety(&self) -> Variety {
        self.law.variety()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn params(&self) -> &A {
        &self.params
    }

    pub fn step(&self) -> &[Rhs<A::Elem>] {
        &self.step
    }

    pub fn free(&self) -> Free {
        Free::new(self.variety(), self.vars.clone())
    }

    /// The algebra `F(TX) ⊕ A` the right-hand sides live in.
    pub fn target(&self) -> Coproduct<Lifted<Free>, A> {
        let lifted = Lifted::new(self.free(), self.law.clone()).expect("variety checked");
        Coproduct::new(lifted, self.params.clone()).expect("variety checked")
    }

    /// The extension `e*: TX → F(TX) ⊕ A`.
    pub fn extend(&self, t: &FreeElem) -> Rhs<A::Elem> {
        self.target().eval(&t.map(|x| self.step[*x].clone()))
    }

    /// Equations with the same law, variables and right-hand sides.
    pub fn same_as(&self, other: &FfgEquation<A>) -> bool {
        self.law == other.law && self.step == other.step
    }

    pub fn display_rhs(&self, x: usize, param: impl Fn(&A::Elem) -> String) -> String {
        let node = |n: &FNode<FreeElem>| {
            let show = |c: &FreeElem| display_term(c, |g| self.vars[*g].clone());
            format!("F[{}]", crate::dsl::format_node(self.law.shape(), n, show, false))
        };
        match &self.step[x] {
            Sum::Inl(n) => node(n),
            Sum::Inr(a) => format!("param {}", param(a)),
            Sum::Pair(n, a) => format!("{} + param {}", node(n), param(a)),
        }
    }

    pub fn to_json_with(&self, param: impl Fn(&A::Elem) -> Value) -> Value {
        let free = self.free();
        let node = |n: &FNode<FreeElem>| {
            json!({
                "label": self.law.shape().label_name(n.label),
                "children": n.children.iter().map(|c| free.to_json(c)).collect::<Vec<_>>(),
            })
        };
        let step: Vec<Value> = self
            .step
            .iter()
            .map(|rhs| match rhs {
                Sum::Inl(n) => json!({ "node": node(n) }),
                Sum::Inr(a) => json!({ "param": param(a) }),
                Sum::Pair(n, a) => json!({ "node": node(n), "param": param(a) }),
            })
            .collect();
        json!({
            "variety": self.variety(),
            "shape": self.law.shape().to_json(),
            "vars": self.vars,
            "step": step,
        })
    }

    pub fn from_json_with(
        v: &Value,
        law: Law,
        params: A,
        param: impl Fn(&Value) -> Result<A::Elem>,
    ) -> Result<Self> {
        let bad = |m: &str| Error::InvalidTerm(format!("equation: {m}"));
        let vars: Vec<String> =
            serde_json::from_value(v["vars"].clone()).map_err(|e| bad(&e.to_string()))?;
        let free = Free::new(law.variety(), vars.clone());
        let steps = v["step"].as_array().ok_or_else(|| bad("`step` must be an array"))?;
        let mut step = Vec::new();
        for s in steps {
            let node = match s.get("node") {
                Some(n) => {
                    let label_name = n["label"].as_str().ok_or_else(|| bad("label must be a string"))?;
                    let label = law
                        .shape()
                        .label_index(label_name)
                        .ok_or_else(|| bad(&format!("unknown label `{label_name}`")))?;
                    let children = n["children"]
                        .as_array()
                        .ok_or_else(|| bad("children must be an array"))?
                        .iter()
                        .map(|c| free.from_json(c))
                        .collect::<Result<Vec<_>>>()?;
                    Some(FNode::new(label, children))
                }
                None => None,
            };
            let p = s.get("param").map(&param).transpose()?;
            step.push(match (node, p) {
                (Some(n), Some(a)) if law.variety() == Variety::Jsl => Sum::Pair(n, a),
                (Some(n), None) => Sum::Inl(n),
                (None, Some(a)) => Sum::Inr(a),
                _ => return Err(bad("each right-hand side needs a node or a parameter")),
            });
        }
        FfgEquation::new(law, vars, params, step)
    }
}

impl FfgEquation<Free> {
    pub fn to_json(&self) -> Value {
        let mut v = self.to_json_with(|t| self.params.to_json(t));
        v["params"] = json!(self.params.gens());
        v
    }

    pub fn from_json(v: &Value, law: Law) -> Result<Self> {
        let names: Vec<String> = serde_json::from_value(v["params"].clone())
            .map_err(|e| Error::InvalidTerm(format!("equation params: {e}")))?;
        let params = Free::new(law.variety(), names);
        let p = params.clone();
        FfgEquation::from_json_with(v, law, params, move |x| p.from_json(x))
    }
}

/// Reparameterization `h • e = (FX + h) ∘ e`; `h` must be an algebra
/// homomorphism into `target`.
pub fn reparameterize<A, B>(h: impl Fn(&A::Elem) -> B::Elem, target: B, e: &FfgEquation<A>) -> Result<FfgEquation<B>>
where
    A: Algebra + Clone,
    B: Algebra + Clone,
{
    let step = e
        .step
        .iter()
        .map(|rhs| match rhs {
            Sum::Inl(n) => Sum::Inl(n.clone()),
            Sum::Inr(a) => Sum::Inr(h(a)),
            Sum::Pair(n, a) => Sum::Pair(n.clone(), h(a)),
        })
        .collect();
    FfgEquation::new(e.law.clone(), e.vars.clone(), target, step)
}

/// Reparameterization along the homomorphism out of a free parameter
/// algebra determined by generator images.
pub fn reparameterize_free<B: Algebra + Clone>(images: &[B::Elem], target: B, e: &FfgEquation<Free>) -> Result<FfgEquation<B>> {
    if images.len() != e.params.len() {
        return Err(Error::InvalidTerm(format!(
            "{} images for {} parameter generators",
            images.len(),
            e.params.len()
        )));
    }
    let t = target.clone();
    reparameterize(move |p: &FreeElem| t.eval(&p.map(|g| images[*g].clone())), target, e)
}

/// Sequencing `e □ f` on variables `X + Y`: parameters of `e`, which are
/// terms over `f`'s variables, are unfolded through `f`.
pub fn sequence<A: Algebra + Clone>(e: &FfgEquation<Free>, f: &FfgEquation<A>) -> Result<FfgEquation<A>> {
    if e.params.variety() != f.variety() || e.params.len() != f.vars.len() || e.law != f.law {
        return Err(Error::ParamsNotFree);
    }
    let offset = e.len();
    let mut vars = e.vars.clone();
    for y in &f.vars {
        let mut name = y.clone();
        while vars.contains(&name) {
            name.push('\'');
        }
        vars.push(name);
    }
    let free = Free::new(e.variety(), vars.clone());
    let lifted = Lifted::new(free, e.law.clone())?;
    let target = Coproduct::new(lifted, f.params.clone())?;
    let shift = |n: &FNode<FreeElem>| n.map(|t| t.map(|g| g + offset));
    // [F inr, inr] on f's coproduct, landing in the coproduct over X + Y.
    let right_of = |s: &Rhs<A::Elem>| match s {
        Sum::Inl(n) => Sum::Inl(shift(n)),
        Sum::Inr(a) => Sum::Inr(a.clone()),
        Sum::Pair(n, a) => Sum::Pair(shift(n), a.clone()),
    };
    let mut step = Vec::with_capacity(vars.len());
    let source = e.target();
    for rhs in &e.step {
        step.push(source.copair(
            rhs,
            &target,
            |n| target.inl(n.clone()),
            |t| right_of(&f.extend(t)),
        ));
    }
    for rhs in &f.step {
        step.push(right_of(rhs));
    }
    FfgEquation::new(e.law.clone(), vars, f.params.clone(), step)
}

/// An effectful right-hand side: a term over behavior layers and parameters.
pub type EffectfulRhs<E> = Term<Sum<FNode<usize>, E>>;

/// Turns `e0: X → T(F₀X + A)` into an ffg-equation by splitting each term
/// into its behavior and parameter parts and applying the law and the
/// parameter structure.
pub fn from_effectful<A: Algebra + Clone>(
    law: &Law,
    vars: Vec<String>,
    params: A,
    e0: &[EffectfulRhs<A::Elem>],
) -> Result<FfgEquation<A>> {
    let mut step = Vec::with_capacity(e0.len());
    for t in e0 {
        if t.variety() != law.variety() {
            return Err(Error::VarietyMismatch {
                expected: law.variety(),
                found: t.variety(),
            });
        }
        step.push(match t {
            Term::Var(Sum::Inl(node)) => Sum::Inl(law.distribute(&Term::Var(node.clone()))),
            Term::Var(Sum::Inr(a)) => Sum::Inr(params.eval(&Term::Var(a.clone()))),
            Term::Iter(n, Sum::Inl(node)) => Sum::Inl(law.distribute(&Term::Iter(*n, node.clone()))),
            Term::Iter(n, Sum::Inr(a)) => Sum::Inr(params.eval(&Term::Iter(*n, a.clone()))),
            Term::Var(Sum::Pair(..)) | Term::Iter(_, Sum::Pair(..)) => {
                return Err(Error::InvalidTerm("pairs only occur in semilattice terms".into()))
            }
            Term::Join(items) => {
                let mut nodes = BTreeSet::new();
                let mut ps = BTreeSet::new();
                for item in items {
                    if let Some(n) = item.left() {
                        nodes.insert(n.clone());
                    }
                    if let Some(a) = item.right() {
                        ps.insert(a.clone());
                    }
                }
                Sum::Pair(law.distribute(&Term::Join(nodes)), params.eval(&Term::Join(ps)))
            }
        });
    }
    FfgEquation::new(law.clone(), vars, params, step)
}

/// An assignment of parameter values to the variables of an equation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Solution<E> {
    pub values: Vec<E>,
}

impl<E: Clone + Ord> Solution<E> {
    pub fn new(values: Vec<E>) -> Self {
        Solution { values }
    }

    /// The solution extended to terms over the variables.
    pub fn at<A: Algebra<Elem = E>>(&self, algebra: &A, t: &FreeElem) -> E {
        algebra.eval(&t.map(|x| self.values[*x].clone()))
    }
}

/// A random element of `T{0..n}`: counters up to `max_counter`, joins of at
/// most three generators.
pub fn random_term<R: Rng>(variety: Variety, n: usize, max_counter: u64, rng: &mut R) -> FreeElem {
    match variety {
        Variety::Set => Term::Var(rng.gen_range(0..n)),
        Variety::Unary => Term::Iter(rng.gen_range(0..=max_counter), rng.gen_range(0..n)),
        Variety::Jsl => {
            let k = if n == 0 { 0 } else { rng.gen_range(0..=3.min(n)) };
            Term::Join((0..k).map(|_| rng.gen_range(0..n)).collect())
        }
    }
}

/// A random equation over `n` variables whose parameters are drawn from
/// `pool`.
pub fn random_equation<A: Algebra + Clone, R: Rng>(
    law: &Law,
    n: usize,
    params: &A,
    pool: &[A::Elem],
    max_counter: u64,
    rng: &mut R,
) -> FfgEquation<A> {
    let variety = law.variety();
    let can_node = n > 0 || variety == Variety::Jsl;
    let step = (0..n)
        .map(|_| {
            let terms: Vec<FreeElem> = (0..4).map(|_| random_term(variety, n, max_counter, rng)).collect();
            let node = if can_node {
                Some(random_node(law.shape(), &terms, rng))
            } else {
                None
            };
            let param = (!pool.is_empty()).then(|| pool[rng.gen_range(0..pool.len())].clone());
            match (variety, node, param) {
                (Variety::Jsl, Some(n), Some(a)) => Sum::Pair(n, a),
                (_, Some(n), Some(a)) => {
                    if rng.gen_bool(0.6) {
                        Sum::Inl(n)
                    } else {
                        Sum::Inr(a)
                    }
                }
                (_, Some(n), None) => Sum::Inl(n),
                (_, None, Some(a)) => Sum::Inr(a),
                (_, None, None) => unreachable!("variables exist, so a node can be built"),
            }
        })
        .collect();
    let vars = (0..n).map(|i| format!("x{i}")).collect();
    FfgEquation::new(law.clone(), vars, params.clone(), step).expect("generated equations are valid")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::functor::{builtin_law, Moore, Shape};

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn jsl() -> Law {
        builtin_law(Variety::Jsl, Shape::Moore(Moore::binary(1))).unwrap()
    }

    fn unary() -> Law {
        builtin_law(Variety::Unary, Shape::Id).unwrap()
    }

    #[test]
    fn identity_reparameterization_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = Free::new(Variety::Jsl, names("p", 2));
        let pool = params.elements(None).unwrap();
        let e = random_equation(&jsl(), 3, &params, &pool, 0, &mut rng);
        let id = reparameterize(|a: &FreeElem| a.clone(), params.clone(), &e).unwrap();
        assert!(id.same_as(&e));
    }

    #[test]
    fn reparameterization_acts_on_parameters_only() {
        let params = Free::new(Variety::Unary, names("p", 1));
        let e = FfgEquation::new(
            unary(),
            names("x", 1),
            params.clone(),
            vec![Sum::Inr(Term::Iter(1, 0))],
        )
        .unwrap();
        let target = Free::new(Variety::Unary, names("q", 1));
        let h = reparameterize_free(&[Term::Iter(2, 0)], target, &e).unwrap();
        assert_eq!(h.step()[0], Sum::Inr(Term::Iter(3, 0)));
    }

    #[test]
    fn sequencing_without_parameters_ignores_the_second_equation() {
        let law = unary();
        let e = FfgEquation::new(
            law.clone(),
            names("x", 1),
            Free::new(Variety::Unary, names("y", 1)),
            vec![Sum::Inl(FNode::new(0, vec![Term::Iter(2, 0)]))],
        )
        .unwrap();
        let f = FfgEquation::new(
            law,
            names("y", 1),
            Free::new(Variety::Unary, names("z", 1)),
            vec![Sum::Inr(Term::Iter(1, 0))],
        )
        .unwrap();
        let ef = sequence(&e, &f).unwrap();
        assert_eq!(ef.len(), 2);
        assert_eq!(ef.step()[0], e.step()[0]);
        assert_eq!(ef.step()[1], Sum::Inr(Term::Iter(1, 0)));
    }

    #[test]
    fn sequencing_unfolds_parameters_through_the_second_equation() {
        let law = unary();
        let e = FfgEquation::new(
            law.clone(),
            names("x", 1),
            Free::new(Variety::Unary, names("y", 1)),
            vec![Sum::Inr(Term::Iter(3, 0))],
        )
        .unwrap();
        let f = FfgEquation::new(
            law,
            names("y", 1),
            Free::new(Variety::Unary, names("z", 1)),
            vec![Sum::Inl(FNode::new(0, vec![Term::Iter(1, 0)]))],
        )
        .unwrap();
        let ef = sequence(&e, &f).unwrap();
        // u³(y) unfolds to F[(4) y] with y now the second variable.
        assert_eq!(ef.step()[0], Sum::Inl(FNode::new(0, vec![Term::Iter(4, 1)])));
    }

    #[test]
    fn sequencing_rejects_mismatched_parameters() {
        let law = unary();
        let e = FfgEquation::new(
            law.clone(),
            names("x", 1),
            Free::new(Variety::Unary, names("y", 2)),
            vec![Sum::Inr(Term::Iter(0, 0))],
        )
        .unwrap();
        let f = FfgEquation::new(
            law,
            names("y", 1),
            Free::new(Variety::Unary, names("z", 1)),
            vec![Sum::Inr(Term::Iter(0, 0))],
        )
        .unwrap();
        assert_eq!(sequence(&e, &f).unwrap_err(), Error::ParamsNotFree);
    }

    #[test]
    fn effectful_unary_pushes_the_counter_into_the_node() {
        let params = Free::new(Variety::Unary, names("a", 1));
        let e0 = vec![Term::Iter(2, Sum::Inl(FNode::new(0, vec![0])))];
        let e = from_effectful(&unary(), names("x", 1), params.clone(), &e0).unwrap();
        assert_eq!(e.step()[0], Sum::Inl(FNode::new(0, vec![Term::Iter(2, 0)])));
        let e0 = vec![Term::Iter(0, Sum::Inr(Term::Iter(0, 0)))];
        let e = from_effectful(&unary(), names("x", 1), params, &e0).unwrap();
        assert_eq!(e.step()[0], Sum::Inr(Term::Iter(0, 0)));
    }

    #[test]
    fn effectful_jsl_splits_into_a_pair() {
        let params = Free::new(Variety::Jsl, names("a", 1));
        let a = Term::Join(BTreeSet::from([0]));
        let e0 = vec![Term::Join(BTreeSet::from([
            Sum::Inl(FNode::new(0, vec![0])),
            Sum::Inr(a.clone()),
        ]))];
        let e = from_effectful(&jsl(), names("x", 1), params, &e0).unwrap();
        assert_eq!(
            e.step()[0],
            Sum::Pair(FNode::new(0, vec![Term::Join(BTreeSet::from([0]))]), a)
        );
    }

    #[test]
    fn effectful_agrees_with_generic_extension() {
        // Oracle: the homomorphic extension of [inl ∘ F₀η, inr] into the
        // coproduct F(TX) ⊕ A.
        let law = builtin_law(Variety::Jsl, Shape::Moore(Moore::binary(2))).unwrap();
        let params = Free::new(Variety::Jsl, names("a", 2));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let items: BTreeSet<Sum<FNode<usize>, FreeElem>> = (0..rng.gen_range(0..4))
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Sum::Inl(random_node(law.shape(), &[0, 1], &mut rng))
                    } else {
                        Sum::Inr(random_term(Variety::Jsl, 2, 0, &mut rng))
                    }
                })
                .collect();
            let t = Term::Join(items);
            let e = from_effectful(&law, names("x", 2), params.clone(), &[t.clone(), t.clone()]).unwrap();
            let probe = FfgEquation::new(
                law.clone(),
                names("x", 2),
                params.clone(),
                vec![Sum::Inr(params.bottom()), Sum::Inr(params.bottom())],
            )
            .unwrap()
            .target();
            let oracle = probe.eval(&t.map(|s| match s {
                Sum::Inl(n) => probe.inl(n.map(|x| Variety::Jsl.unit(*x))),
                Sum::Inr(a) => probe.inr(a.clone()),
                Sum::Pair(..) => unreachable!(),
            }));
            assert_eq!(e.step()[0], oracle);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for law in [jsl(), unary(), builtin_law(Variety::Set, Shape::Id).unwrap()] {
            let params = Free::new(law.variety(), names("p", 2));
            let pool = match law.variety() {
                Variety::Unary => params.elements(Some(2)).unwrap(),
                _ => params.elements(None).unwrap(),
            };
            let e = random_equation(&law, 3, &params, &pool, 2, &mut rng);
            let back = FfgEquation::from_json(&e.to_json(), law).unwrap();
            assert!(back.same_as(&e));
            assert_eq!(back.to_json(), e.to_json());
        }
    }
}
