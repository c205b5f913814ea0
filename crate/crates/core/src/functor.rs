//! Behavior functors, distributive laws and lifted algebras.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::variety::{Algebra, Carrier, FiniteAlgebra, Term, Variety};

/// Moore machine shape `O × X^Σ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Moore {
    outputs: Vec<String>,
    alphabet: Vec<String>,
    lattice: Option<FiniteAlgebra>,
}

impl Moore {
    /// Outputs `["0", "1"]` get the boolean lattice; other label sets are
    /// plain sets until [`Moore::with_lattice`] is used.
    pub fn new(outputs: Vec<String>, alphabet: Vec<String>) -> Self {
        let lattice = (outputs == ["0", "1"]).then(FiniteAlgebra::boolean);
        Moore {
            outputs,
            alphabet,
            lattice,
        }
    }

    pub fn with_lattice(lattice: FiniteAlgebra, alphabet: Vec<String>) -> Result<Self> {
        if lattice.variety() != Variety::Jsl {
            return Err(Error::NotSemilattice(format!(
                "{} algebra given as output lattice",
                lattice.variety()
            )));
        }
        Ok(Moore {
            outputs: lattice.names().to_vec(),
            alphabet,
            lattice: Some(lattice),
        })
    }

    /// Binary outputs over letters `a, b, …`.
    pub fn binary(letters: usize) -> Self {
        Moore::new(
            vec!["0".into(), "1".into()],
            (0..letters).map(letter_name).collect(),
        )
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn lattice(&self) -> Option<&FiniteAlgebra> {
        self.lattice.as_ref()
    }
}

pub(crate) fn letter_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("l{i}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Moore(Moore),
    /// Polynomial functor from `(symbol, arity)` pairs.
    Poly(Vec<(String, usize)>),
    /// The identity functor, with one label `next` of arity one.
    Id,
}

impl Shape {
    pub fn label_count(&self) -> usize {
        match self {
            Shape::Moore(m) => m.outputs.len(),
            Shape::Poly(ops) => ops.len(),
            Shape::Id => 1,
        }
    }

    pub fn label_name(&self, label: usize) -> &str {
        match self {
            Shape::Moore(m) => &m.outputs[label],
            Shape::Poly(ops) => &ops[label].0,
            Shape::Id => "next",
        }
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        (0..self.label_count()).find(|&l| self.label_name(l) == name)
    }

    pub fn arity(&self, label: usize) -> usize {
        match self {
            Shape::Moore(m) => m.alphabet.len(),
            Shape::Poly(ops) => ops[label].1,
            Shape::Id => 1,
        }
    }

    pub fn max_arity(&self) -> usize {
        (0..self.label_count()).map(|l| self.arity(l)).max().unwrap_or(0)
    }

    /// Checks that `node` is an element of `F₀X` for some `X`.
    pub fn validate<X>(&self, node: &FNode<X>) -> Result<()> {
        if node.label >= self.label_count() {
            return Err(Error::InvalidNode(format!("label index {} out of range", node.label)));
        }
        let arity = self.arity(node.label);
        if node.children.len() != arity {
            return Err(Error::InvalidNode(format!(
                "label `{}` expects {arity} children, got {}",
                self.label_name(node.label),
                node.children.len()
            )));
        }
        Ok(())
    }

    /// Every element of `F₀X` for the listed `X`.
    pub fn nodes<X: Clone>(&self, xs: &[X]) -> Vec<FNode<X>> {
        let mut out = Vec::new();
        for label in 0..self.label_count() {
            for children in tuples(xs, self.arity(label)) {
                out.push(FNode { label, children });
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        match self {
            Shape::Moore(m) => {
                let mut inner = json!({ "outputs": m.outputs, "alphabet": m.alphabet });
                if let Some(l) = &m.lattice {
                    if m.outputs != ["0", "1"] {
                        inner["lattice"] = l.to_json();
                    }
                }
                json!({ "moore": inner })
            }
            Shape::Poly(ops) => json!({ "poly": ops }),
            Shape::Id => json!({ "id": true }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Shape> {
        let bad = |m: String| Error::InvalidNode(format!("shape: {m}"));
        if let Some(m) = v.get("moore") {
            let alphabet: Vec<String> =
                serde_json::from_value(m["alphabet"].clone()).map_err(|e| bad(e.to_string()))?;
            if let Some(l) = m.get("lattice") {
                return Ok(Shape::Moore(Moore::with_lattice(FiniteAlgebra::from_json(l)?, alphabet)?));
            }
            let outputs: Vec<String> =
                serde_json::from_value(m["outputs"].clone()).map_err(|e| bad(e.to_string()))?;
            Ok(Shape::Moore(Moore::new(outputs, alphabet)))
        } else if let Some(p) = v.get("poly") {
            let ops: Vec<(String, usize)> =
                serde_json::from_value(p.clone()).map_err(|e| bad(e.to_string()))?;
            Ok(Shape::Poly(ops))
        } else if v.get("id").is_some() {
            Ok(Shape::Id)
        } else {
            Err(bad(format!("unrecognised shape {v}")))
        }
    }

    /// The same functor as a polynomial signature (used when the functor is
    /// extended by constants).
    pub fn as_poly(&self) -> Vec<(String, usize)> {
        (0..self.label_count())
            .map(|l| (self.label_name(l).to_string(), self.arity(l)))
            .collect()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Moore(m) => write!(
                f,
                "MOORE(O={{{}}}, Σ={{{}}})",
                m.outputs.join(","),
                m.alphabet.join(",")
            ),
            Shape::Poly(ops) => {
                let ops: Vec<String> = ops.iter().map(|(s, n)| format!("{s}/{n}")).collect();
                write!(f, "POLY({})", ops.join(","))
            }
            Shape::Id => f.write_str("ID"),
        }
    }
}

pub(crate) fn tuples<X: Clone>(xs: &[X], len: usize) -> Vec<Vec<X>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                xs.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// One layer of behavior: a label and its children.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FNode<X> {
    pub label: usize,
    pub children: Vec<X>,
}

impl<X> FNode<X> {
    pub fn new(label: usize, children: Vec<X>) -> Self {
        FNode { label, children }
    }

    /// `F₀f`.
    pub fn map<Y>(&self, f: impl FnMut(&X) -> Y) -> FNode<Y> {
        FNode {
            label: self.label,
            children: self.children.iter().map(f).collect(),
        }
    }

    pub fn try_map<Y, E>(&self, f: impl FnMut(&X) -> Result<Y, E>) -> Result<FNode<Y>, E> {
        Ok(FNode {
            label: self.label,
            children: self.children.iter().map(f).collect::<Result<_, E>>()?,
        })
    }
}

/// A natural transformation `TF₀ → F₀T`.
pub trait DistributiveLaw {
    fn variety(&self) -> Variety;
    fn shape(&self) -> &Shape;
    fn distribute<X: Carrier>(&self, t: &Term<FNode<X>>) -> FNode<Term<X>>;
}

/// A builtin distributive law of a variety over a shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Law {
    variety: Variety,
    shape: Arc<Shape>,
}

/// Looks up the law for a supported `(variety, shape)` pair:
///
/// * `SET` over any shape: the identity;
/// * `UNARY` over Moore or `ID`: the counter moves into every child;
/// * `JSL` over Moore with a lattice of outputs, or `ID`: outputs are
///   joined and children unioned letterwise.
pub fn builtin_law(variety: Variety, shape: Shape) -> Result<Law> {
    let unsupported = |shape: &Shape| Error::UnsupportedLaw {
        variety,
        shape: shape.to_string(),
    };
    match (variety, &shape) {
        (Variety::Set, _) => {}
        (Variety::Unary, Shape::Moore(_) | Shape::Id) => {}
        (Variety::Jsl, Shape::Id) => {}
        (Variety::Jsl, Shape::Moore(m)) => {
            if m.lattice.is_none() {
                return Err(Error::NotSemilattice(format!(
                    "no join structure given for outputs {{{}}}",
                    m.outputs.join(",")
                )));
            }
        }
        _ => return Err(unsupported(&shape)),
    }
    Ok(Law {
        variety,
        shape: Arc::new(shape),
    })
}

impl Law {
    pub fn shape_arc(&self) -> &Arc<Shape> {
        &self.shape
    }

    /// Join of two labels in the output lattice (`JSL` only).
    pub fn join_labels(&self, a: usize, b: usize) -> usize {
        match &*self.shape {
            Shape::Moore(m) => {
                let l = m.lattice.as_ref().expect("checked at construction");
                l.join(&a, &b)
            }
            _ => 0,
        }
    }

    pub fn bottom_label(&self) -> usize {
        match &*self.shape {
            Shape::Moore(m) => m.lattice.as_ref().map_or(0, |l| l.bottom()),
            _ => 0,
        }
    }

    /// The `JSL` bottom of `F A`: bottom label, every child `⊥_A`.
    pub fn bottom_node<X: Clone>(&self, bottom: X) -> FNode<X> {
        let label = self.bottom_label();
        FNode {
            label,
            children: vec![bottom; self.shape.arity(label)],
        }
    }
}

impl DistributiveLaw for Law {
    fn variety(&self) -> Variety {
        self.variety
    }

    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn distribute<X: Carrier>(&self, t: &Term<FNode<X>>) -> FNode<Term<X>> {
        match t {
            Term::Var(node) => node.map(|x| Term::Var(x.clone())),
            Term::Iter(n, node) => node.map(|x| Term::Iter(*n, x.clone())),
            Term::Join(nodes) => {
                let label = nodes
                    .iter()
                    .fold(self.bottom_label(), |acc, n| self.join_labels(acc, n.label));
                let arity = self.shape.arity(label);
                let children = (0..arity)
                    .map(|i| Term::Join(nodes.iter().map(|n| n.children[i].clone()).collect()))
                    .collect();
                FNode { label, children }
            }
        }
    }
}

/// The lifting `F A = (F₀A, F₀α ∘ λ_A)`.
#[derive(Clone, Debug)]
pub struct Lifted<A> {
    base: A,
    law: Law,
}

impl<A: Algebra> Lifted<A> {
    pub fn new(base: A, law: Law) -> Result<Self> {
        if base.variety() != law.variety() {
            return Err(Error::VarietyMismatch {
                expected: law.variety(),
                found: base.variety(),
            });
        }
        Ok(Lifted { base, law })
    }

    pub fn base(&self) -> &A {
        &self.base
    }

    pub fn law(&self) -> &Law {
        &self.law
    }
}

impl<A: Algebra> Algebra for Lifted<A> {
    type Elem = FNode<A::Elem>;

    fn variety(&self) -> Variety {
        self.base.variety()
    }

    fn eval(&self, t: &Term<FNode<A::Elem>>) -> FNode<A::Elem> {
        self.law.distribute(t).map(|term| self.base.eval(term))
    }

    fn elements(&self, max_counter: Option<u64>) -> Result<Vec<Self::Elem>> {
        Ok(self.law.shape().nodes(&self.base.elements(max_counter)?))
    }
}

/// `lift_apply`: the algebra `F A` for a law and a base algebra.
pub fn lift_apply<A: Algebra>(law: &Law, base: A) -> Result<Lifted<A>> {
    Lifted::new(base, law.clone())
}

/// Result of checking the two distributive-law axioms and naturality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub unit_instances: usize,
    pub multiplication_instances: usize,
    pub naturality_instances: usize,
    pub counterexamples: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn fail(&mut self, msg: String) {
        if self.counterexamples.len() < 8 {
            self.counterexamples.push(msg);
        }
    }
}

/// All elements of `TX` for `X = {0, …, n-1}` within `bound`.
pub(crate) fn terms_over<X: Carrier>(variety: Variety, xs: &[X], bound: u64) -> Vec<Term<X>> {
    match variety {
        Variety::Set => xs.iter().cloned().map(Term::Var).collect(),
        Variety::Unary => (0..=bound)
            .flat_map(|n| xs.iter().cloned().map(move |x| Term::Iter(n, x)))
            .collect(),
        Variety::Jsl => {
            assert!(xs.len() < 20, "refusing to enumerate 2^{} subsets", xs.len());
            (0u32..1 << xs.len())
                .map(|mask| {
                    Term::Join(
                        xs.iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, x)| x.clone())
                            .collect(),
                    )
                })
                .collect()
        }
    }
}

/// Outer terms of `T(TF₀X)`: exhaustive for `SET`/`UNARY`; for `JSL` every
/// join of at most two inner terms plus a seeded sample of three-fold joins.
fn outer_terms<X: Carrier>(variety: Variety, inner: &[Term<X>], bound: u64) -> Vec<Term<Term<X>>> {
    match variety {
        Variety::Set | Variety::Unary => terms_over(variety, inner, bound),
        Variety::Jsl => {
            let mut out = vec![Term::Join(BTreeSet::new())];
            for (i, a) in inner.iter().enumerate() {
                for b in &inner[i..] {
                    out.push(Term::Join(BTreeSet::from([a.clone(), b.clone()])));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..2000 {
                let picks: BTreeSet<Term<X>> =
                    inner.choose_multiple(&mut rng, 3.min(inner.len())).cloned().collect();
                out.push(Term::Join(picks));
            }
            out
        }
    }
}

/// Checks both distributive-law diagrams and naturality pointwise.
///
/// `bound` caps the generator count (and the `UNARY` counters); every node
/// over the sampled generator sets is tried.
pub fn check_dist_law<L: DistributiveLaw>(law: &L, bound: u64) -> LawReport {
    let mut report = LawReport::default();
    let variety = law.variety();
    let shape = law.shape();
    let max_gens = (bound as usize).clamp(1, 2);
    for n in 0..=max_gens {
        let xs: Vec<usize> = (0..n).collect();
        let nodes = shape.nodes(&xs);

        // λ ∘ ηF₀ = F₀η
        for node in &nodes {
            report.unit_instances += 1;
            let lhs = law.distribute(&variety.unit(node.clone()));
            let rhs = node.map(|x| variety.unit(*x));
            if lhs != rhs {
                report.fail(format!("unit axiom fails at {node:?}: {lhs:?} ≠ {rhs:?}"));
            }
        }

        // λ ∘ μF₀ = F₀μ ∘ λT ∘ Tλ
        let inner = terms_over(variety, &nodes, bound);
        for t in outer_terms(variety, &inner, bound) {
            report.multiplication_instances += 1;
            let lhs = law.distribute(&Term::flatten(&t));
            let t_lambda: Term<FNode<Term<usize>>> = t.map(|s| law.distribute(s));
            let rhs = law.distribute(&t_lambda).map(Term::flatten);
            if lhs != rhs {
                report.fail(format!("multiplication axiom fails at {t:?}: {lhs:?} ≠ {rhs:?}"));
            }
        }

        // F₀(Tf) ∘ λ_X = λ_Y ∘ T(F₀f) for every f: X → Y with |Y| ≤ 2
        for m in 1..=max_gens {
            for f in tuples(&(0..m).collect::<Vec<usize>>(), n) {
                for t in &inner {
                    report.naturality_instances += 1;
                    let lhs = law.distribute(t).map(|s| s.map(|x| f[*x]));
                    let rhs = law.distribute(&t.map(|node| node.map(|x| f[*x])));
                    if lhs != rhs {
                        report.fail(format!("naturality fails at {t:?} along {f:?}"));
                    }
                }
            }
        }
    }
    report
}

/// A seeded random node over `xs`.
pub fn random_node<X: Clone, R: Rng>(shape: &Shape, xs: &[X], rng: &mut R) -> FNode<X> {
    let label = rng.gen_range(0..shape.label_count());
    FNode {
        label,
        children: (0..shape.arity(label))
            .map(|_| xs[rng.gen_range(0..xs.len())].clone())
            .collect(),
    }
}
