//! Elgot algebras for ffg-equations: algebras with a chosen solution for
//! every equation, checked against the solution square and the two axioms
//! (weak functoriality, compositionality).

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::coalgebra::apply_free_map;
use crate::equation::{reparameterize, sequence, FfgEquation, Rhs, Solution};
use crate::error::{Error, Result};
use crate::functor::{builtin_law, terms_over, tuples, DistributiveLaw, FNode, Law, Moore, Shape};
use crate::phi::{Backend, BisimBackend, Phi, PhiElem, StreamBackend, StreamKey};
use crate::variety::{eval_free, Algebra, FiniteAlgebra, Free, FreeElem, Sum, Term, Variety};

/// An algebra for the lifted functor together with a solver.
pub trait ElgotAlgebra: Algebra + Clone {
    fn law(&self) -> &Law;

    /// The structure `a: F A → A`.
    fn structure(&self, node: &FNode<Self::Elem>) -> Self::Elem;

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<Self::Elem>>;

    fn describe(&self) -> String {
        format!("{} over {}", self.law().variety(), self.law().shape())
    }
}

impl<B: Backend> ElgotAlgebra for Phi<B> {
    fn law(&self) -> &Law {
        Phi::law(self)
    }

    fn structure(&self, node: &FNode<Self::Elem>) -> Self::Elem {
        Phi::structure(self, node)
    }

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<Self::Elem>> {
        Phi::solve(self, e)
    }
}

/// `[a, id] ∘ (F s + id) ∘ e` at one variable.
pub fn rhs_value<A: ElgotAlgebra>(alg: &A, e: &FfgEquation<A>, values: &[A::Elem], x: usize) -> A::Elem {
    let ext = |t: &FreeElem| eval_free(alg, values, t);
    match &e.step()[x] {
        Sum::Inl(n) => alg.structure(&n.map(ext)),
        Sum::Inr(a) => a.clone(),
        Sum::Pair(n, a) => alg.join(&alg.structure(&n.map(ext)), a),
    }
}

/// The first variable where `s` violates the solution square, with the
/// value the square demands.
pub fn solution_defect<A: ElgotAlgebra>(alg: &A, e: &FfgEquation<A>, s: &Solution<A::Elem>) -> Option<(usize, A::Elem)> {
    assert_eq!(s.values.len(), e.len(), "one value per variable");
    (0..e.len()).find_map(|x| {
        let want = rhs_value(alg, e, &s.values, x);
        (want != s.values[x]).then_some((x, want))
    })
}

/// Whether `s = [a, id] ∘ (F s + id) ∘ e` holds on every variable.
pub fn check_solution<A: ElgotAlgebra>(alg: &A, e: &FfgEquation<A>, s: &Solution<A::Elem>) -> bool {
    s.values.len() == e.len() && solution_defect(alg, e, s).is_none()
}

// ---------------------------------------------------------------------------
// Least solutions on finite pointed posets
// ---------------------------------------------------------------------------

/// A finite partial order with a least element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedPoset {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
    bottom: usize,
}

impl PointedPoset {
    pub fn new(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = names.len();
        let bad = |m: &str| Error::InvalidAlgebra(format!("poset: {m}"));
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(bad("order must be an n×n relation"));
        }
        for i in 0..n {
            if !leq[i][i] {
                return Err(bad("not reflexive"));
            }
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(bad("not antisymmetric"));
                }
                for k in 0..n {
                    if leq[i][j] && leq[j][k] && !leq[i][k] {
                        return Err(bad("not transitive"));
                    }
                }
            }
        }
        let bottom = (0..n)
            .find(|&b| (0..n).all(|x| leq[b][x]))
            .ok_or_else(|| bad("no least element"))?;
        Ok(PointedPoset { names, leq, bottom })
    }

    pub fn chain(n: usize) -> Self {
        PointedPoset::new(
            (0..n).map(|i| i.to_string()).collect(),
            (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect(),
        )
        .expect("chains are posets")
    }

    /// Every partial order on `{0, …, n-1}` in which `0` is least.
    pub fn all_with_bottom(n: usize) -> Vec<PointedPoset> {
        let pairs: Vec<(usize, usize)> = (1..n)
            .flat_map(|i| (1..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let mut out = Vec::new();
        for mask in 0u32..1 << pairs.len() {
            let mut leq = vec![vec![false; n]; n];
            for i in 0..n {
                leq[i][i] = true;
                leq[0][i] = true;
            }
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    leq[i][j] = true;
                }
            }
            if let Ok(p) = PointedPoset::new((0..n).map(|i| i.to_string()).collect(), leq) {
                out.push(p);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Every monotone self-map.
    pub fn monotone_maps(&self) -> Vec<Vec<usize>> {
        let elems: Vec<usize> = (0..self.len()).collect();
        tuples(&elems, self.len())
            .into_iter()
            .filter(|f| {
                (0..self.len()).all(|a| (0..self.len()).all(|b| !self.leq[a][b] || self.leq[f[a]][f[b]]))
            })
            .collect()
    }
}

/// A pointed poset with an algebra structure for a `SET` law, given as one
/// table per label indexed by the child tuple in mixed radix.
#[derive(Clone, Debug)]
pub struct KleeneAlgebra {
    poset: Arc<PointedPoset>,
    law: Law,
    tables: Arc<Vec<Vec<usize>>>,
}

impl KleeneAlgebra {
    pub fn new(poset: PointedPoset, law: Law, tables: Vec<Vec<usize>>) -> Result<Self> {
        if law.variety() != Variety::Set {
            return Err(Error::VarietyMismatch {
                expected: Variety::Set,
                found: law.variety(),
            });
        }
        let n = poset.len();
        let shape = law.shape();
        if tables.len() != shape.label_count() {
            return Err(Error::InvalidAlgebra("one table per label is required".into()));
        }
        for (l, table) in tables.iter().enumerate() {
            if table.len() != n.pow(shape.arity(l) as u32) || table.iter().any(|&v| v >= n) {
                return Err(Error::InvalidAlgebra(format!(
                    "table for `{}` must map all {}-tuples into the poset",
                    shape.label_name(l),
                    shape.arity(l)
                )));
            }
        }
        Ok(KleeneAlgebra {
            poset: Arc::new(poset),
            law,
            tables: Arc::new(tables),
        })
    }

    /// The identity functor with structure `a`.
    pub fn unary_map(poset: PointedPoset, a: Vec<usize>) -> Result<Self> {
        KleeneAlgebra::new(poset, builtin_law(Variety::Set, Shape::Id)?, vec![a])
    }

    pub fn poset(&self) -> &PointedPoset {
        &self.poset
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    fn index(&self, children: &[usize]) -> usize {
        children.iter().rev().fold(0, |acc, &c| acc * self.poset.len() + c)
    }

    /// Whether every table is monotone in each argument.
    pub fn is_monotone(&self) -> bool {
        let n = self.poset.len();
        let elems: Vec<usize> = (0..n).collect();
        (0..self.law.shape().label_count()).all(|l| {
            let arity = self.law.shape().arity(l);
            let all = tuples(&elems, arity);
            all.iter().all(|xs| {
                all.iter().all(|ys| {
                    !xs.iter().zip(ys).all(|(&x, &y)| self.poset.leq(x, y))
                        || self.poset.leq(self.tables[l][self.index(xs)], self.tables[l][self.index(ys)])
                })
            })
        })
    }
}

impl Algebra for KleeneAlgebra {
    type Elem = usize;

    fn variety(&self) -> Variety {
        Variety::Set
    }

    fn eval(&self, t: &Term<usize>) -> usize {
        match t {
            Term::Var(x) => *x,
            other => panic!("{} term in a {} algebra", other.variety(), Variety::Set),
        }
    }

    fn elements(&self, _max_counter: Option<u64>) -> Result<Vec<usize>> {
        Ok((0..self.poset.len()).collect())
    }
}

impl ElgotAlgebra for KleeneAlgebra {
    fn law(&self) -> &Law {
        &self.law
    }

    fn structure(&self, node: &FNode<usize>) -> usize {
        self.tables[node.label][self.index(&node.children)]
    }

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<usize>> {
        kleene_solve(self, e)
    }
}

/// The least solution, by iterating from the constant-`⊥` assignment.
pub fn kleene_solve(p: &KleeneAlgebra, e: &FfgEquation<KleeneAlgebra>) -> Result<Solution<usize>> {
    let poset = &p.poset;
    let mut current = vec![poset.bottom(); e.len()];
    let limit = poset.len() * e.len() + 1;
    for _ in 0..=limit {
        let next: Vec<usize> = (0..e.len()).map(|x| rhs_value(p, e, &current, x)).collect();
        if let Some(x) = (0..e.len()).find(|&x| !poset.leq(current[x], next[x])) {
            return Err(Error::NonMonotone(format!(
                "iteration decreased {} from {} to {}",
                e.vars()[x],
                poset.names()[current[x]],
                poset.names()[next[x]]
            )));
        }
        if next == current {
            return Ok(Solution::new(current));
        }
        current = next;
    }
    Err(Error::NonMonotone("iteration did not stabilize".into()))
}

// ---------------------------------------------------------------------------
// Passages between F and F(−) + TY
// ---------------------------------------------------------------------------

/// How the labels of `F(−) + TY` are laid out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamShape {
    /// Moore outputs `O × P(Y)`, label `o · 2^|Y| + mask`.
    Jsl { ys: usize },
    /// The signature of `F` followed by one constant per `y`.
    Set { base_labels: usize, ys: usize },
}

/// The law for `F(−) + TY` and its layout.
pub fn param_law(base: &Law, ys: &[String]) -> Result<(Law, ParamShape)> {
    match base.variety() {
        Variety::Jsl => {
            let Shape::Moore(m) = base.shape() else {
                return Err(Error::UnsupportedLaw {
                    variety: Variety::Jsl,
                    shape: format!("{} with parameters", base.shape()),
                });
            };
            let lattice = m.lattice().expect("JSL Moore shapes carry a lattice");
            let product = lattice.product(&FiniteAlgebra::powerset(ys)?)?;
            let shape = Shape::Moore(Moore::with_lattice(product, m.alphabet().to_vec())?);
            Ok((builtin_law(Variety::Jsl, shape)?, ParamShape::Jsl { ys: ys.len() }))
        }
        Variety::Set => {
            let mut ops = base.shape().as_poly();
            let base_labels = ops.len();
            ops.extend(ys.iter().map(|y| (y.clone(), 0)));
            Ok((
                builtin_law(Variety::Set, Shape::Poly(ops))?,
                ParamShape::Set {
                    base_labels,
                    ys: ys.len(),
                },
            ))
        }
        Variety::Unary => Err(Error::Unsupported(
            "parameterized functors over UNARY have no finite label set".into(),
        )),
    }
}

impl ParamShape {
    pub fn ys(&self) -> usize {
        match self {
            ParamShape::Jsl { ys } | ParamShape::Set { ys, .. } => *ys,
        }
    }

    /// Splits a layer of `F(−) + TY` into its `F` part and its `TY` part.
    pub fn split<X: Clone>(&self, node: &FNode<X>) -> (Option<FNode<X>>, Option<FreeElem>) {
        match self {
            ParamShape::Jsl { ys } => {
                let o = node.label >> ys;
                let mask = node.label & ((1 << ys) - 1);
                let part = Term::Join((0..*ys).filter(|y| mask >> y & 1 == 1).collect());
                (Some(FNode::new(o, node.children.clone())), Some(part))
            }
            ParamShape::Set { base_labels, .. } => {
                if node.label < *base_labels {
                    (Some(node.clone()), None)
                } else {
                    (None, Some(Term::Var(node.label - base_labels)))
                }
            }
        }
    }

    /// The `F` layer seen in `F(−) + TY` with empty `TY` part.
    pub fn embed<X: Clone>(&self, node: &FNode<X>) -> FNode<X> {
        match self {
            ParamShape::Jsl { ys } => FNode::new(node.label << ys, node.children.clone()),
            ParamShape::Set { .. } => node.clone(),
        }
    }

    /// The layer that is just the generator `y`.
    pub fn constant<X: Clone>(&self, base: &Law, y: usize, bottom: Option<X>) -> FNode<X> {
        match self {
            ParamShape::Jsl { ys } => {
                let label = (base.bottom_label() << ys) + (1 << y);
                let arity = base.shape().arity(base.bottom_label());
                FNode::new(label, vec![bottom.expect("semilattices have a bottom"); arity])
            }
            ParamShape::Set { base_labels, .. } => FNode::new(base_labels + y, Vec::new()),
        }
    }
}

/// `ē`: an `F`-equation read as an `F(−) + TY`-equation.
pub fn embed_equation<A, B>(e: &FfgEquation<A>, target: B, g_law: &Law, ps: &ParamShape) -> Result<FfgEquation<B>>
where
    A: Algebra + Clone,
    B: Algebra<Elem = A::Elem> + Clone,
{
    let step = e
        .step()
        .iter()
        .map(|rhs| match rhs {
            Sum::Inl(n) => Sum::Inl(ps.embed(n)),
            Sum::Inr(a) => Sum::Inr(a.clone()),
            Sum::Pair(n, a) => Sum::Pair(ps.embed(n), a.clone()),
        })
        .collect();
    FfgEquation::new(g_law.clone(), e.vars().to_vec(), target, step)
}

/// `e_h`: an `F(−) + TY`-equation with its `TY` part pushed into the
/// parameters along `h`.
pub fn collapse_equation<A, B>(
    e: &FfgEquation<B>,
    target: A,
    h: &[A::Elem],
    f_law: &Law,
    ps: &ParamShape,
) -> Result<FfgEquation<A>>
where
    A: Algebra + Clone,
    B: Algebra<Elem = A::Elem> + Clone,
{
    let mut step = Vec::with_capacity(e.len());
    for rhs in e.step() {
        step.push(match rhs {
            Sum::Inr(a) => Sum::Inr(a.clone()),
            Sum::Inl(n) => match ps.split(n) {
                (Some(f), None) => Sum::Inl(f),
                (None, Some(y)) => Sum::Inr(eval_free(&target, h, &y)),
                _ => unreachable!("non-semilattice layers are either F or a constant"),
            },
            Sum::Pair(n, a) => {
                let (f, y) = ps.split(n);
                let y = eval_free(&target, h, &y.expect("semilattice layers carry a TY part"));
                Sum::Pair(f.expect("semilattice layers carry an F part"), target.join(&y, a))
            }
        });
    }
    FfgEquation::new(f_law.clone(), e.vars().to_vec(), target, step)
}

/// An algebra for `F` turned into one for `F(−) + TY` by `h: Y → A`.
#[derive(Clone, Debug)]
pub struct ParamElgot<A: ElgotAlgebra> {
    base: A,
    h: Vec<A::Elem>,
    law: Law,
    layout: ParamShape,
}

/// Structure `[a, h]`, solutions `e ↦ (e_h)†`.
pub fn passage_to_param<A: ElgotAlgebra>(base: A, ys: &[String], h: Vec<A::Elem>) -> Result<ParamElgot<A>> {
    if h.len() != ys.len() {
        return Err(Error::InvalidTerm(format!("{} images for {} parameters", h.len(), ys.len())));
    }
    let (law, layout) = param_law(base.law(), ys)?;
    Ok(ParamElgot { base, h, law, layout })
}

impl<A: ElgotAlgebra> ParamElgot<A> {
    pub fn base(&self) -> &A {
        &self.base
    }

    pub fn h(&self) -> &[A::Elem] {
        &self.h
    }

    pub fn layout(&self) -> &ParamShape {
        &self.layout
    }

    /// `e_h` for an equation over this algebra.
    pub fn collapse(&self, e: &FfgEquation<Self>) -> Result<FfgEquation<A>> {
        collapse_equation(e, self.base.clone(), &self.h, self.base.law(), &self.layout)
    }
}

impl<A: ElgotAlgebra> Algebra for ParamElgot<A> {
    type Elem = A::Elem;

    fn variety(&self) -> Variety {
        self.base.variety()
    }

    fn eval(&self, t: &Term<A::Elem>) -> A::Elem {
        self.base.eval(t)
    }

    fn elements(&self, max_counter: Option<u64>) -> Result<Vec<A::Elem>> {
        self.base.elements(max_counter)
    }
}

impl<A: ElgotAlgebra> ElgotAlgebra for ParamElgot<A> {
    fn law(&self) -> &Law {
        &self.law
    }

    fn structure(&self, node: &FNode<A::Elem>) -> A::Elem {
        match self.layout.split(node) {
            (Some(f), None) => self.base.structure(&f),
            (None, Some(y)) => eval_free(&self.base, &self.h, &y),
            (Some(f), Some(y)) => self
                .base
                .join(&self.base.structure(&f), &eval_free(&self.base, &self.h, &y)),
            (None, None) => unreachable!("every layer has a part"),
        }
    }

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<A::Elem>> {
        self.base.solve(&self.collapse(e)?)
    }

    fn describe(&self) -> String {
        format!("{} with {} parameters", self.base.describe(), self.h.len())
    }
}

/// An algebra for `F(−) + TY` whose structure splits as `[a, h]`, read as
/// an algebra for `F`.
#[derive(Clone, Debug)]
pub struct UnparamElgot<B: ElgotAlgebra> {
    inner: B,
    law: Law,
    layout: ParamShape,
    h: Vec<B::Elem>,
}

/// Solutions `e ↦ ē‡`. The split is checked on layers over `sample`.
pub fn passage_from_param<B: ElgotAlgebra>(inner: B, base_law: &Law, ys: &[String], sample: &[B::Elem]) -> Result<UnparamElgot<B>> {
    let (g_law, layout) = param_law(base_law, ys)?;
    if &g_law != inner.law() {
        return Err(Error::LawMismatch("algebra is not for the parameterized functor".into()));
    }
    let bottom = (inner.variety() == Variety::Jsl).then(|| inner.bottom());
    let h: Vec<B::Elem> = (0..ys.len())
        .map(|y| inner.structure(&layout.constant(base_law, y, bottom.clone())))
        .collect();
    for node in g_law.shape().nodes(sample) {
        let whole = inner.structure(&node);
        let parts = match layout.split(&node) {
            (Some(f), None) => inner.structure(&layout.embed(&f)),
            (None, Some(y)) => eval_free(&inner, &h, &y),
            (Some(f), Some(y)) => inner.join(&inner.structure(&layout.embed(&f)), &eval_free(&inner, &h, &y)),
            (None, None) => unreachable!("every layer has a part"),
        };
        if whole != parts {
            return Err(Error::StructureNotSplit(format!(
                "layer with label `{}`",
                g_law.shape().label_name(node.label)
            )));
        }
    }
    Ok(UnparamElgot {
        inner,
        law: base_law.clone(),
        layout,
        h,
    })
}

impl<B: ElgotAlgebra> UnparamElgot<B> {
    pub fn inner(&self) -> &B {
        &self.inner
    }

    /// The restriction `h` of the structure to the parameters.
    pub fn h(&self) -> &[B::Elem] {
        &self.h
    }

    /// `ē` for an equation over this algebra.
    pub fn embed(&self, e: &FfgEquation<Self>) -> Result<FfgEquation<B>> {
        embed_equation(e, self.inner.clone(), self.inner.law(), &self.layout)
    }
}

impl<B: ElgotAlgebra> Algebra for UnparamElgot<B> {
    type Elem = B::Elem;

    fn variety(&self) -> Variety {
        self.inner.variety()
    }

    fn eval(&self, t: &Term<B::Elem>) -> B::Elem {
        self.inner.eval(t)
    }

    fn elements(&self, max_counter: Option<u64>) -> Result<Vec<B::Elem>> {
        self.inner.elements(max_counter)
    }
}

impl<B: ElgotAlgebra> ElgotAlgebra for UnparamElgot<B> {
    fn law(&self) -> &Law {
        &self.law
    }

    fn structure(&self, node: &FNode<B::Elem>) -> B::Elem {
        self.inner.structure(&self.layout.embed(node))
    }

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<B::Elem>> {
        self.inner.solve(&self.embed(e)?)
    }

    fn describe(&self) -> String {
        format!("{} without parameters", self.inner.describe())
    }
}

// ---------------------------------------------------------------------------
// Initial morphism
// ---------------------------------------------------------------------------

/// The image of a class under the unique solution-preserving map: solve the
/// representative coalgebra, read as a parameter-free equation, in `target`.
pub fn initial_morphism<Bk: Backend, A: ElgotAlgebra>(phi: &Phi<Bk>, target: &A, cls: &PhiElem<Bk>) -> Result<A::Elem> {
    if phi.law() != target.law() {
        return Err(Error::LawMismatch("target algebra is for a different functor".into()));
    }
    let rep = cls.representative();
    let step = rep.coalgebra.step().iter().map(|n| Sum::Inl(n.clone())).collect();
    let e = FfgEquation::new(target.law().clone(), rep.coalgebra.gens().to_vec(), target.clone(), step)?;
    let s = target.solve(&e)?;
    Ok(s.at(target, &rep.state))
}

// ---------------------------------------------------------------------------
// Further Elgot algebras
// ---------------------------------------------------------------------------

/// The one-point Elgot algebra for any law.
#[derive(Clone, Debug)]
pub struct Trivial {
    law: Law,
}

impl Trivial {
    pub fn new(law: Law) -> Self {
        Trivial { law }
    }
}

impl Algebra for Trivial {
    type Elem = ();

    fn variety(&self) -> Variety {
        self.law.variety()
    }

    fn eval(&self, _t: &Term<()>) {}

    fn elements(&self, _max_counter: Option<u64>) -> Result<Vec<()>> {
        Ok(vec![()])
    }
}

impl ElgotAlgebra for Trivial {
    fn law(&self) -> &Law {
        &self.law
    }

    fn structure(&self, _node: &FNode<()>) {}

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<()>> {
        Ok(Solution::new(vec![(); e.len()]))
    }
}

/// Stream classes collapsed to the integer part of their mean. Unary
/// operation and structure are identities, as on the stream classes.
#[derive(Clone, Debug, Default)]
pub struct FloorMean {
    phi: Phi<StreamBackend>,
}

impl FloorMean {
    pub fn new() -> Self {
        FloorMean {
            phi: Phi::new(StreamBackend::default()),
        }
    }
}

impl Default for Phi<StreamBackend> {
    fn default() -> Self {
        Phi::new(StreamBackend::default())
    }
}

impl Algebra for FloorMean {
    type Elem = u64;

    fn variety(&self) -> Variety {
        Variety::Unary
    }

    fn eval(&self, t: &Term<u64>) -> u64 {
        match t {
            Term::Iter(_, a) => *a,
            other => panic!("{} term in a {} algebra", other.variety(), Variety::Unary),
        }
    }
}

impl ElgotAlgebra for FloorMean {
    fn law(&self) -> &Law {
        self.phi.law()
    }

    fn structure(&self, node: &FNode<u64>) -> u64 {
        node.children[0]
    }

    /// Lifts parameters along `k ↦ k/1`, solves among stream classes and
    /// rounds down.
    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<u64>> {
        let phi = self.phi.clone();
        let lifted = reparameterize(|k: &u64| phi.from_key(StreamKey::new(*k, 1)), phi.clone(), e)?;
        let s = self.phi.solve(&lifted)?;
        Ok(Solution::new(s.values.iter().map(|c| c.key().floor()).collect()))
    }
}

/// Output functions on words of length at most `depth`, for `JSL` over a
/// Moore shape; solutions are unique and computed layer by layer.
#[derive(Clone, Debug)]
pub struct Truncated {
    law: Law,
    depth: usize,
    words: Arc<Vec<Vec<usize>>>,
}

impl Truncated {
    pub fn new(law: Law, depth: usize) -> Result<Self> {
        let Shape::Moore(m) = law.shape() else {
            return Err(Error::UnsupportedLaw {
                variety: law.variety(),
                shape: format!("{} (truncated behaviors)", law.shape()),
            });
        };
        if law.variety() != Variety::Jsl {
            return Err(Error::VarietyMismatch {
                expected: Variety::Jsl,
                found: law.variety(),
            });
        }
        let k = m.alphabet().len();
        let mut words = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..depth {
            layer = layer
                .into_iter()
                .flat_map(|w: Vec<usize>| {
                    (0..k).map(move |a| {
                        let mut w = w.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
            words.extend(layer.iter().cloned());
        }
        Ok(Truncated {
            law,
            depth,
            words: Arc::new(words),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn word_index(&self, w: &[usize]) -> usize {
        self.words.iter().position(|v| v == w).expect("word within depth")
    }

    /// The truncated behavior of a class of the bisimilarity backend.
    pub fn of_class(&self, cls: &PhiElem<BisimBackend>) -> Vec<usize> {
        let m = &cls.key().0;
        self.words
            .iter()
            .map(|w| m[w.iter().fold(0, |s, &a| m[s].children[a])].label)
            .collect()
    }
}

impl Algebra for Truncated {
    type Elem = Vec<usize>;

    fn variety(&self) -> Variety {
        Variety::Jsl
    }

    fn eval(&self, t: &Term<Vec<usize>>) -> Vec<usize> {
        match t {
            Term::Join(xs) => {
                let mut out = vec![self.law.bottom_label(); self.words.len()];
                for x in xs {
                    for (o, v) in out.iter_mut().zip(x) {
                        *o = self.law.join_labels(*o, *v);
                    }
                }
                out
            }
            other => panic!("{} term in a {} algebra", other.variety(), Variety::Jsl),
        }
    }
}

impl ElgotAlgebra for Truncated {
    fn law(&self) -> &Law {
        &self.law
    }

    fn structure(&self, node: &FNode<Vec<usize>>) -> Vec<usize> {
        self.words
            .iter()
            .map(|w| match w.split_first() {
                None => node.label,
                Some((&a, rest)) => node.children[a][self.word_index(rest)],
            })
            .collect()
    }

    /// Guardedness makes `depth + 1` rounds from `⊥` exact.
    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<Vec<usize>>> {
        let mut values = vec![self.bottom(); e.len()];
        for _ in 0..=self.depth {
            values = (0..e.len()).map(|x| rhs_value(self, e, &values, x)).collect();
        }
        Ok(Solution::new(values))
    }
}

/// A solver for stream classes that is only correct where parameters are
/// reachable: elsewhere it answers the class with mean `|X|`, which still
/// satisfies the solution square but depends on the size of the system.
#[derive(Clone, Debug, Default)]
pub struct BrokenStreamSolver {
    phi: Phi<StreamBackend>,
}

impl BrokenStreamSolver {
    pub fn new() -> Self {
        BrokenStreamSolver::default()
    }

    fn lift(&self, e: &FfgEquation<Self>) -> Result<FfgEquation<Phi<StreamBackend>>> {
        reparameterize(|a: &PhiElem<StreamBackend>| a.clone(), self.phi.clone(), e)
    }
}

impl Algebra for BrokenStreamSolver {
    type Elem = PhiElem<StreamBackend>;

    fn variety(&self) -> Variety {
        Variety::Unary
    }

    fn eval(&self, t: &Term<Self::Elem>) -> Self::Elem {
        self.phi.eval(t)
    }
}

impl ElgotAlgebra for BrokenStreamSolver {
    fn law(&self) -> &Law {
        self.phi.law()
    }

    fn structure(&self, node: &FNode<Self::Elem>) -> Self::Elem {
        self.phi.structure(node)
    }

    fn solve(&self, e: &FfgEquation<Self>) -> Result<Solution<Self::Elem>> {
        let mut s = self.phi.solve(&self.lift(e)?)?;
        let n = e.len();
        for x in 0..n {
            let mut seen = vec![false; n];
            let mut cur = x;
            let reaches_param = loop {
                match &e.step()[cur] {
                    Sum::Inl(node) => match &node.children[0] {
                        Term::Iter(_, y) if !seen[*y] => {
                            seen[*y] = true;
                            cur = *y;
                        }
                        _ => break false,
                    },
                    _ => break true,
                }
            };
            if !reaches_param {
                s.values[x] = self.phi.mean(n as u64, 1);
            }
        }
        Ok(s)
    }

    fn describe(&self) -> String {
        "stream classes with a size-dependent solver".into()
    }
}

// ---------------------------------------------------------------------------
// Axiom harness
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub instances: usize,
    pub failures: Vec<String>,
    pub seed: u64,
}

impl AxiomReport {
    fn new(axiom: &str, seed: u64) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            instances: 0,
            failures: Vec::new(),
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < 5 {
            self.failures.push(msg);
        }
    }
}

/// Enumeration limits for the axiom harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxiomBounds {
    /// Largest variable sets `|X|`, `|Y|`.
    pub vars: usize,
    /// Largest parameter generator set `|Z|`.
    pub params: usize,
    /// Largest `UNARY` counter in right-hand sides and maps.
    pub counter: u64,
    /// When set, at most this many `(X, Y)`-instances are drawn per size
    /// combination, seeded by `seed`.
    pub sample: Option<usize>,
    pub seed: u64,
}

impl Default for AxiomBounds {
    fn default() -> Self {
        AxiomBounds {
            vars: 2,
            params: 1,
            counter: 2,
            sample: None,
            seed: 0,
        }
    }
}

/// All right-hand sides over `n` variables and `z` parameter generators.
pub fn rhs_candidates(law: &Law, n: usize, z: usize, counter: u64) -> Vec<Rhs<FreeElem>> {
    let variety = law.variety();
    let vars: Vec<usize> = (0..n).collect();
    let nodes = law.shape().nodes(&terms_over(variety, &vars, counter));
    let params = terms_over(variety, &(0..z).collect::<Vec<_>>(), counter);
    match variety {
        Variety::Jsl => nodes
            .iter()
            .flat_map(|n| params.iter().map(move |p| Sum::Pair(n.clone(), p.clone())))
            .collect(),
        _ => nodes
            .into_iter()
            .map(Sum::Inl)
            .chain(params.into_iter().map(Sum::Inr))
            .collect(),
    }
}

fn free_equation(law: &Law, prefix: &str, z: usize, step: Vec<Rhs<FreeElem>>) -> FfgEquation<Free> {
    let vars = (0..step.len()).map(|i| format!("{prefix}{i}")).collect();
    let params = Free::numbered(law.variety(), "z", z);
    FfgEquation::new(law.clone(), vars, params, step).expect("enumerated equations are valid")
}

/// `(F m + Z)` on a right-hand side, for `m` given by generator images.
fn push_rhs(m: &[FreeElem], rhs: &Rhs<FreeElem>) -> Rhs<FreeElem> {
    match rhs {
        Sum::Inl(n) => Sum::Inl(n.map(|t| apply_free_map(m, t))),
        Sum::Inr(p) => Sum::Inr(p.clone()),
        Sum::Pair(n, p) => Sum::Pair(n.map(|t| apply_free_map(m, t)), p.clone()),
    }
}

struct Solver<'a, A: ElgotAlgebra> {
    alg: &'a A,
    memo: HashMap<(Vec<Rhs<FreeElem>>, usize), Vec<A::Elem>>,
}

impl<'a, A: ElgotAlgebra> Solver<'a, A> {
    fn solve_free(&mut self, e: &FfgEquation<Free>, h_index: usize, h: &[A::Elem]) -> Result<Vec<A::Elem>> {
        let key = (e.step().to_vec(), h_index);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let alg = self.alg.clone();
        let he = reparameterize(|p: &FreeElem| eval_free(&alg, h, p), alg.clone(), e)?;
        let s = self.alg.solve(&he)?.values;
        self.memo.insert(key, s.clone());
        Ok(s)
    }
}

fn sizes(bounds: &AxiomBounds, min_x: usize) -> Vec<(usize, usize)> {
    (min_x..=bounds.vars)
        .flat_map(|x| (0..=bounds.vars).map(move |y| (x, y)))
        .collect()
}

/// For every homomorphism `m: (X, e) → (Y, f)` of `F(−) + TZ`-coalgebras in
/// the pool and every `h: Z → A` in `h_pool`, checks
/// `(h • f)† ∘ m = (h • e)†`.
pub fn check_weak_functoriality<A: ElgotAlgebra>(alg: &A, bounds: &AxiomBounds, h_pool: &[Vec<A::Elem>]) -> AxiomReport {
    let mut report = AxiomReport::new("weak-functoriality", bounds.seed);
    let law = alg.law().clone();
    let variety = law.variety();
    let mut solver = Solver {
        alg,
        memo: HashMap::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(bounds.seed);
    let z = bounds.params;
    let hs: Vec<(usize, &Vec<A::Elem>)> = h_pool.iter().filter(|h| h.len() == z).enumerate().collect();
    for (nx, ny) in sizes(bounds, 1) {
        let cands_x = rhs_candidates(&law, nx, z, bounds.counter);
        let cands_y = rhs_candidates(&law, ny, z, bounds.counter);
        let mut fs = tuples(&cands_y, ny);
        let ys: Vec<usize> = (0..ny).collect();
        let mut ms = tuples(&terms_over(variety, &ys, bounds.counter), nx);
        if let Some(k) = bounds.sample {
            fs.shuffle(&mut rng);
            fs.truncate(k);
            ms.shuffle(&mut rng);
            ms.truncate(k);
        }
        for f_step in &fs {
            let f = free_equation(&law, "y", z, f_step.clone());
            for m in &ms {
                // e(x) must satisfy (F m + Z)(e(x)) = f*(m(x)).
                let per_x: Vec<Vec<Rhs<FreeElem>>> = (0..nx)
                    .map(|x| {
                        let want = f.extend(&m[x]);
                        cands_x.iter().filter(|r| push_rhs(m, r) == want).cloned().collect()
                    })
                    .collect();
                if per_x.iter().any(Vec::is_empty) {
                    continue;
                }
                for e_step in cartesian(&per_x) {
                    let e = free_equation(&law, "x", z, e_step);
                    for &(hi, h) in &hs {
                        report.instances += 1;
                        let result = (|| -> Result<bool> {
                            let sf = solver.solve_free(&f, hi, h)?;
                            let se = solver.solve_free(&e, hi, h)?;
                            Ok((0..nx).all(|x| eval_free(alg, &sf, &m[x]) == se[x]))
                        })();
                        match result {
                            Ok(true) => {}
                            Ok(false) => report.fail(format!(
                                "e = {}, f = {}, m = {:?}, h #{hi}",
                                show_free(&e),
                                show_free(&f),
                                m
                            )),
                            Err(err) => report.fail(format!("solver error: {err}")),
                        }
                    }
                }
            }
        }
    }
    report
}

/// For every `e: X → F(TX) ⊕ TY` and `f: Y → F(TY) ⊕ A` in the pool,
/// checks `(f† • e)† = (e □ f)† ∘ inl`. Parameters of `f` come from `pool`.
pub fn check_compositionality<A: ElgotAlgebra>(alg: &A, bounds: &AxiomBounds, pool: &[A::Elem]) -> AxiomReport {
    let mut report = AxiomReport::new("compositionality", bounds.seed);
    let law = alg.law().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(bounds.seed);
    let z = bounds.params.min(1);
    for (nx, ny) in sizes(bounds, 1) {
        let mut es = tuples(&rhs_candidates(&law, nx, ny, bounds.counter), nx);
        let mut fs = tuples(&rhs_candidates(&law, ny, z, bounds.counter), ny);
        if let Some(k) = bounds.sample {
            es.shuffle(&mut rng);
            es.truncate(k);
            fs.shuffle(&mut rng);
            fs.truncate(k);
        }
        for f_step in &fs {
            let f0 = free_equation(&law, "y", z, f_step.clone());
            for a in pool {
                let images = vec![a.clone(); z];
                let alg_c = alg.clone();
                let f = match reparameterize(|p: &FreeElem| eval_free(&alg_c, &images, p), alg.clone(), &f0) {
                    Ok(f) => f,
                    Err(err) => {
                        report.fail(format!("reparameterization failed: {err}"));
                        continue;
                    }
                };
                let f_dagger = match alg.solve(&f) {
                    Ok(s) => s.values,
                    Err(err) => {
                        report.fail(format!("solver error: {err}"));
                        continue;
                    }
                };
                for e_step in &es {
                    report.instances += 1;
                    let vars = (0..nx).map(|i| format!("x{i}")).collect();
                    let params = Free::new(law.variety(), f.vars().to_vec());
                    let e = FfgEquation::new(law.clone(), vars, params, e_step.clone())
                        .expect("enumerated equations are valid");
                    let result = (|| -> Result<bool> {
                        let fe = reparameterize(|p: &FreeElem| eval_free(alg, &f_dagger, p), alg.clone(), &e)?;
                        let lhs = alg.solve(&fe)?.values;
                        let rhs = alg.solve(&sequence(&e, &f)?)?.values;
                        Ok(lhs[..] == rhs[..nx])
                    })();
                    match result {
                        Ok(true) => {}
                        Ok(false) => report.fail(format!("e = {}, f = {}", show_free(&e), show_free(&f0))),
                        Err(err) => report.fail(format!("solver error: {err}")),
                    }
                }
            }
        }
    }
    report
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// One line per variable, `x = F[...] + param ...`.
pub fn show_free(e: &FfgEquation<Free>) -> String {
    let params = e.params().clone();
    (0..e.len())
        .map(|x| format!("{} = {}", e.vars()[x], e.display_rhs(x, |p| params.display(p))))
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::coalgebra::FfgCoalgebra;
    use crate::phi::{realize_mean, BisimPhi, StreamPhi};

    fn set_id() -> Law {
        builtin_law(Variety::Set, Shape::Id).unwrap()
    }

    fn id_eq(p: &KleeneAlgebra, step: Vec<Rhs<usize>>) -> FfgEquation<KleeneAlgebra> {
        let vars = (0..step.len()).map(|i| format!("x{i}")).collect();
        FfgEquation::new(set_id(), vars, p.clone(), step).unwrap()
    }

    fn next(x: usize) -> Rhs<usize> {
        Sum::Inl(FNode::new(0, vec![Term::Var(x)]))
    }

    #[test]
    fn least_fixed_point_of_identity_is_bottom() {
        let p = KleeneAlgebra::unary_map(PointedPoset::chain(3), vec![0, 1, 2]).unwrap();
        let e = id_eq(&p, vec![next(0)]);
        let s = kleene_solve(&p, &e).unwrap();
        assert_eq!(s.values, vec![0]);
        assert!(check_solution(&p, &e, &s));
    }

    #[test]
    fn parameters_are_their_own_solution() {
        let p = KleeneAlgebra::unary_map(PointedPoset::chain(3), vec![1, 2, 2]).unwrap();
        let e = id_eq(&p, vec![Sum::Inr(2), next(0)]);
        let s = kleene_solve(&p, &e).unwrap();
        assert_eq!(s.values, vec![2, 2]);
    }

    #[test]
    fn kleene_climbs_an_inflationary_map() {
        let p = KleeneAlgebra::unary_map(PointedPoset::chain(4), vec![1, 2, 3, 3]).unwrap();
        let e = id_eq(&p, vec![next(1), next(0)]);
        assert_eq!(kleene_solve(&p, &e).unwrap().values, vec![3, 3]);
    }

    #[test]
    fn non_monotone_structure_is_detected() {
        let p = KleeneAlgebra::unary_map(PointedPoset::chain(2), vec![1, 0]).unwrap();
        assert!(!p.is_monotone());
        let e = id_eq(&p, vec![next(0)]);
        assert!(matches!(kleene_solve(&p, &e), Err(Error::NonMonotone(_))));
    }

    #[test]
    fn poset_enumeration_counts() {
        // Posets on {1,2,3} number 19; with a bottom adjoined they stay 19.
        assert_eq!(PointedPoset::all_with_bottom(4).len(), 19);
        assert_eq!(PointedPoset::all_with_bottom(3).len(), 3);
        assert_eq!(PointedPoset::all_with_bottom(1).len(), 1);
    }

    #[test]
    fn perturbed_solution_is_rejected() {
        let phi = StreamPhi::streams();
        let e = FfgEquation::new(
            phi.law().clone(),
            vec!["x".into()],
            phi.clone(),
            vec![Sum::Inr(phi.mean(3, 2))],
        )
        .unwrap();
        let s = phi.solve(&e).unwrap();
        assert!(check_solution(&phi, &e, &s));
        let bad = Solution::new(vec![phi.mean(1, 1)]);
        assert!(!check_solution(&phi, &e, &bad));
        assert_eq!(solution_defect(&phi, &e, &bad).unwrap().0, 0);
    }

    #[test]
    fn stream_solution_of_a_constant_loop() {
        let phi = StreamPhi::streams();
        let e = FfgEquation::new(
            phi.law().clone(),
            vec!["x".into()],
            phi.clone(),
            vec![Sum::Inl(FNode::new(0, vec![Term::Iter(2, 0)]))],
        )
        .unwrap();
        let s = phi.solve(&e).unwrap();
        assert_eq!(s.values[0].key().to_string(), "2/1");
    }

    #[test]
    fn representatives_do_not_matter() {
        let phi = StreamPhi::streams();
        let (c1, s1) = realize_mean(3, 2);
        let (c2, s2) = "(7)(2,1,2,1)^w".parse::<crate::phi::EpStream>().unwrap().realize();
        let p1 = phi.class_of(&c1, &s1).unwrap();
        let p2 = phi.class_of(&c2, &s2).unwrap();
        assert_eq!(p1, p2);
        let mk = |p: PhiElem<StreamBackend>| {
            FfgEquation::new(
                phi.law().clone(),
                vec!["x".into(), "y".into()],
                phi.clone(),
                vec![Sum::Inl(FNode::new(0, vec![Term::Iter(1, 1)])), Sum::Inr(p)],
            )
            .unwrap()
        };
        assert_eq!(phi.solve(&mk(p1)).unwrap(), phi.solve(&mk(p2)).unwrap());
    }

    #[test]
    fn stream_axioms_hold_on_a_small_pool() {
        let phi = StreamPhi::streams();
        let bounds = AxiomBounds {
            vars: 1,
            ..AxiomBounds::default()
        };
        let hs = vec![vec![phi.mean(0, 1)], vec![phi.mean(3, 2)]];
        let wf = check_weak_functoriality(&phi, &bounds, &hs);
        assert!(wf.passed(), "{:?}", wf.failures);
        assert!(wf.instances > 0);
        let comp = check_compositionality(&phi, &bounds, &[phi.mean(1, 1)]);
        assert!(comp.passed(), "{:?}", comp.failures);
    }

    #[test]
    fn broken_solver_fails_compositionality() {
        let broken = BrokenStreamSolver::new();
        let bounds = AxiomBounds {
            vars: 1,
            ..AxiomBounds::default()
        };
        let phi = StreamPhi::streams();
        let report = check_compositionality(&broken, &bounds, &[phi.mean(1, 1)]);
        assert!(!report.passed());
        assert!(report.failures[0].contains("e = "));
    }

    #[test]
    fn passages_round_trip_on_kleene() {
        let p = KleeneAlgebra::unary_map(PointedPoset::chain(3), vec![1, 2, 2]).unwrap();
        let ys = vec!["y0".to_string()];
        let g = passage_to_param(p.clone(), &ys, vec![2]).unwrap();
        // x = y0 as a constant layer solves to h(y0).
        let e = FfgEquation::new(g.law().clone(), vec!["x".into()], g.clone(), vec![Sum::Inl(FNode::new(1, vec![]))]).unwrap();
        assert_eq!(g.solve(&e).unwrap().values, vec![2]);
        let back = passage_from_param(g.clone(), &set_id(), &ys, &[0, 1, 2]).unwrap();
        assert_eq!(back.h(), &[2]);
        let f = id_eq(&p, vec![next(0)]);
        let fb = reparameterize(|a: &usize| *a, back.clone(), &f).unwrap();
        assert_eq!(back.solve(&fb).unwrap(), p.solve(&f).unwrap());
    }

    #[test]
    fn jsl_free_unit_solves_to_h() {
        let base = BisimBackend::binary(1);
        let ys = vec!["y0".to_string(), "y1".to_string()];
        let g = BisimPhi::new(base.with_parameters(&ys).unwrap());
        let eps = Truncated::new(base.law().clone(), 1).unwrap();
        let h = vec![vec![1, 0], vec![0, 1]];
        let target = passage_to_param(eps, &ys, h.clone()).unwrap();
        for y in 0..2 {
            let unit = g.free_unit(2, y).unwrap();
            assert_eq!(initial_morphism(&g, &target, &unit).unwrap(), h[y]);
        }
    }

    #[test]
    fn initial_morphism_into_the_backend_is_identity() {
        let phi = StreamPhi::streams();
        for (a, b) in [(0, 1), (3, 2), (5, 4)] {
            let cls = phi.mean(a, b);
            assert_eq!(initial_morphism(&phi, &phi, &cls).unwrap(), cls);
            assert_eq!(initial_morphism(&phi, &FloorMean::new(), &cls).unwrap(), a / b);
        }
        let bis = BisimPhi::new(BisimBackend::binary(1));
        let law = bis.law().clone();
        let c = FfgCoalgebra::new(
            law,
            vec!["p".into()],
            vec![FNode::new(1, vec![Term::Join(BTreeSet::from([0]))])],
        )
        .unwrap();
        let cls = bis.class_of(&c, &c.eta(0)).unwrap();
        assert_eq!(initial_morphism(&bis, &bis, &cls).unwrap(), cls);
    }

    #[test]
    fn truncated_solutions_are_solutions() {
        let law = builtin_law(Variety::Jsl, Shape::Moore(Moore::binary(2))).unwrap();
        let t = Truncated::new(law.clone(), 2).unwrap();
        let e = FfgEquation::new(
            law,
            vec!["x".into()],
            t.clone(),
            vec![Sum::Inl(FNode::new(
                1,
                vec![Term::Join(BTreeSet::from([0])), Term::Join(BTreeSet::new())],
            ))],
        )
        .unwrap();
        let s = t.solve(&e).unwrap();
        assert!(check_solution(&t, &e, &s));
        // words ε, a, b, aa, ab, ba, bb: accepted are a* only
        assert_eq!(s.values[0], vec![1, 1, 0, 1, 0, 0, 0]);
    }
}
