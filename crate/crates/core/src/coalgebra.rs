//! Coalgebras on free finitely generated algebras.
//!
//! An [`FfgCoalgebra`] is given by a transition map on generators
//! `X → F₀(TX)`; its structure on the whole carrier `TX` is the unique
//! T-homomorphic extension (generalized determinization). For `JSL` over a
//! Moore shape this is the subset construction.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functor::{DistributiveLaw, FNode, Law, Lifted, Shape};
use crate::variety::{
    display_term, eval_free, is_homomorphism, Algebra, FiniteAlgebra, Free, FreeElem, Term,
    Variety,
};

/// Default cap on generators when the whole carrier of a `JSL` coalgebra is
/// materialized.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 12;

/// Cap on reachable states explored from a single element.
pub const REACHABLE_LIMIT: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FfgCoalgebra {
    law: Law,
    gens: Vec<String>,
    step: Vec<FNode<FreeElem>>,
}

impl FfgCoalgebra {
    pub fn new(law: Law, gens: Vec<String>, step: Vec<FNode<FreeElem>>) -> Result<Self> {
        if gens.len() != step.len() {
            return Err(Error::InvalidNode(format!(
                "{} generators but {} transitions",
                gens.len(),
                step.len()
            )));
        }
        let free = Free::new(law.variety(), gens.clone());
        for node in &step {
            law.shape().validate(node)?;
            for child in &node.children {
                free.validate(child)?;
            }
        }
        Ok(FfgCoalgebra { law, gens, step })
    }

    /// The coalgebra on no generators.
    pub fn empty(law: Law) -> Self {
        FfgCoalgebra {
            law,
            gens: Vec::new(),
            step: Vec::new(),
        }
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn variety(&self) -> Variety {
        self.law.variety()
    }

    pub fn shape(&self) -> &Shape {
        self.law.shape()
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn step(&self) -> &[FNode<FreeElem>] {
        &self.step
    }

    pub fn free(&self) -> Free {
        Free::new(self.variety(), self.gens.clone())
    }

    pub fn eta(&self, g: usize) -> FreeElem {
        self.variety().unit(g)
    }

    pub fn lifted(&self) -> Lifted<Free> {
        Lifted::new(self.free(), self.law.clone()).expect("law and carrier share a variety")
    }

    /// The extended structure `c*: TX → F(TX)`.
    pub fn structure(&self, t: &FreeElem) -> FNode<FreeElem> {
        self.lifted().eval(&t.map(|g| self.step[*g].clone()))
    }

    pub fn display(&self, t: &FreeElem) -> String {
        display_term(t, |g| self.gens[*g].clone())
    }

    pub fn display_node(&self, node: &FNode<FreeElem>) -> String {
        crate::dsl::format_node(self.shape(), node, |c| self.display(c), true)
    }

    /// Coproduct `c ⊕ d` with the images of both generator sets.
    pub fn coproduct(&self, other: &FfgCoalgebra) -> Result<(FfgCoalgebra, Vec<FreeElem>, Vec<FreeElem>)> {
        if self.law != other.law {
            return Err(Error::LawMismatch("coproduct of coalgebras over different laws".into()));
        }
        let offset = self.len();
        let mut gens = self.gens.clone();
        for g in &other.gens {
            let mut name = g.clone();
            while gens.contains(&name) {
                name.push('\'');
            }
            gens.push(name);
        }
        let mut step = self.step.clone();
        step.extend(other.step.iter().map(|n| n.map(|t| shift(t, offset))));
        let inl = (0..offset).map(|g| self.eta(g)).collect();
        let inr = (0..other.len()).map(|g| self.eta(g + offset)).collect();
        Ok((FfgCoalgebra { law: self.law.clone(), gens, step }, inl, inr))
    }

    /// Appends one generator with the given transition (children over the
    /// extended generator set).
    pub fn with_generator(&self, name: &str, node: FNode<FreeElem>) -> Result<FfgCoalgebra> {
        let mut gens = self.gens.clone();
        let mut name = name.to_string();
        while gens.contains(&name) {
            name.push('\'');
        }
        gens.push(name);
        let mut step = self.step.clone();
        step.push(node);
        FfgCoalgebra::new(self.law.clone(), gens, step)
    }
}

/// Renames every generator `g` to `g + offset`.
pub fn shift(t: &FreeElem, offset: usize) -> FreeElem {
    t.map(|g| g + offset)
}

/// Generalized determinization: the ffg-coalgebra whose structure extends
/// `c0: X → F₀(TX)`.
pub fn determinize(gens: Vec<String>, c0: Vec<FNode<FreeElem>>, law: &Law) -> Result<FfgCoalgebra> {
    FfgCoalgebra::new(law.clone(), gens, c0)
}

/// `h*` on a free element, for `h` given on generators into another free
/// algebra.
pub fn apply_free_map(images: &[FreeElem], t: &FreeElem) -> FreeElem {
    Term::flatten(&t.map(|g| images[*g].clone()))
}

/// A coalgebra on a finite explicit state set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteCoalgebra {
    shape: Arc<Shape>,
    names: Vec<String>,
    nodes: Vec<FNode<usize>>,
}

impl FiniteCoalgebra {
    pub fn new(shape: Arc<Shape>, names: Vec<String>, nodes: Vec<FNode<usize>>) -> Result<Self> {
        for node in &nodes {
            shape.validate(node)?;
            if node.children.iter().any(|&c| c >= nodes.len()) {
                return Err(Error::InvalidNode("successor out of range".into()));
            }
        }
        Ok(FiniteCoalgebra { shape, names, nodes })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nodes(&self) -> &[FNode<usize>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Behavioral equivalence classes by signature refinement: two states
    /// share a block iff their labels agree and, letterwise, their successors
    /// share blocks.
    pub fn partition(&self) -> Vec<usize> {
        let mut blocks: Vec<usize> = self.nodes.iter().map(|n| n.label).collect();
        let mut count = usize::MAX;
        loop {
            let mut ids: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = self
                .nodes
                .iter()
                .enumerate()
                .map(|(s, n)| {
                    let sig = (blocks[s], n.label, n.children.iter().map(|&c| blocks[c]).collect());
                    let fresh = ids.len();
                    *ids.entry(sig).or_insert(fresh)
                })
                .collect();
            if ids.len() == count {
                return next;
            }
            count = ids.len();
            blocks = next;
        }
    }

    /// The minimal machine reachable from `start`, numbered in breadth-first
    /// order so that equal behaviors give identical node lists.
    pub fn minimize_from(&self, start: usize) -> Vec<FNode<usize>> {
        self.minimize_with(&self.partition(), start)
    }

    /// [`FiniteCoalgebra::minimize_from`] with a precomputed partition.
    pub fn minimize_with(&self, blocks: &[usize], start: usize) -> Vec<FNode<usize>> {
        let mut rep: HashMap<usize, usize> = HashMap::new();
        for (s, &b) in blocks.iter().enumerate() {
            rep.entry(b).or_insert(s);
        }
        let mut number: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![blocks[start]];
        number.insert(blocks[start], 0);
        let mut out = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let node = &self.nodes[rep[&order[i]]];
            let children = node
                .children
                .iter()
                .map(|&c| {
                    let b = blocks[c];
                    let fresh = number.len();
                    *number.entry(b).or_insert_with(|| {
                        order.push(b);
                        fresh
                    })
                })
                .collect();
            out.push(FNode::new(node.label, children));
            i += 1;
        }
        out
    }

    /// Disjoint union; states of `other` are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &FiniteCoalgebra) -> Result<FiniteCoalgebra> {
        if self.shape != other.shape {
            return Err(Error::LawMismatch("disjoint union of different shapes".into()));
        }
        let offset = self.len();
        let mut names = self.names.clone();
        names.extend(other.names.iter().map(|n| format!("{n}'")));
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().map(|n| n.map(|c| c + offset)));
        Ok(FiniteCoalgebra {
            shape: self.shape.clone(),
            names,
            nodes,
        })
    }

    /// Graphviz rendering; every edge is labelled by its letter.
    pub fn to_dot(&self, title: &str) -> String {
        let mut out = format!("digraph \"{title}\" {{\n  rankdir=LR;\n");
        for (s, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "  s{s} [label=\"{} / {}\"];",
                escape(&self.names[s]),
                escape(self.shape.label_name(node.label))
            );
        }
        for (s, node) in self.nodes.iter().enumerate() {
            for (i, &c) in node.children.iter().enumerate() {
                let letter = match &*self.shape {
                    Shape::Moore(m) => m.alphabet()[i].clone(),
                    _ => i.to_string(),
                };
                let _ = writeln!(out, "  s{s} -> s{c} [label=\"{}\"];", escape(&letter));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The part of `c` reachable from `starts` as an explicit machine, with the
/// index of each explored element.
///
/// `UNARY` carriers are infinite and the counter grows along every run, so
/// they are rejected.
pub fn reachable(c: &FfgCoalgebra, starts: &[FreeElem]) -> Result<(FiniteCoalgebra, BTreeMap<FreeElem, usize>)> {
    if c.variety() == Variety::Unary {
        return Err(Error::InfiniteCarrier(Variety::Unary));
    }
    let free = c.free();
    let mut index: BTreeMap<FreeElem, usize> = BTreeMap::new();
    let mut states: Vec<FreeElem> = Vec::new();
    let mut queue = VecDeque::new();
    for s in starts {
        free.validate(s)?;
        if !index.contains_key(s) {
            index.insert(s.clone(), states.len());
            states.push(s.clone());
            queue.push_back(s.clone());
        }
    }
    let mut nodes = Vec::new();
    while let Some(s) = queue.pop_front() {
        let node = c.structure(&s);
        let children = node
            .children
            .iter()
            .map(|t| {
                if let Some(&i) = index.get(t) {
                    i
                } else {
                    let i = states.len();
                    index.insert(t.clone(), i);
                    states.push(t.clone());
                    queue.push_back(t.clone());
                    i
                }
            })
            .collect();
        nodes.push(FNode::new(node.label, children));
        if states.len() > REACHABLE_LIMIT {
            return Err(Error::CarrierTooLarge {
                size: states.len(),
                limit: REACHABLE_LIMIT,
            });
        }
    }
    let names = states.iter().map(|s| c.display(s)).collect();
    Ok((
        FiniteCoalgebra {
            shape: c.law().shape_arc().clone(),
            names,
            nodes,
        },
        index,
    ))
}

/// Every element of `TX` with its transition, for `JSL` and `SET`
/// coalgebras with at most `limit` generators.
pub fn materialize(c: &FfgCoalgebra, limit: usize) -> Result<(FiniteCoalgebra, Vec<FreeElem>)> {
    if c.variety() == Variety::Unary {
        return Err(Error::InfiniteCarrier(Variety::Unary));
    }
    if c.len() > limit {
        return Err(Error::CarrierTooLarge {
            size: c.len(),
            limit,
        });
    }
    let elems = c.free().elements(None)?;
    let index: HashMap<&FreeElem, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let nodes = elems
        .iter()
        .map(|e| c.structure(e).map(|t| index[t]))
        .collect();
    let names = elems.iter().map(|e| c.display(e)).collect();
    Ok((
        FiniteCoalgebra {
            shape: c.law().shape_arc().clone(),
            names,
            nodes,
        },
        elems,
    ))
}

/// Decides whether `a` in `c` and `b` in `d` are behaviorally equivalent.
pub fn behavioral_equiv(c: &FfgCoalgebra, a: &FreeElem, d: &FfgCoalgebra, b: &FreeElem) -> Result<bool> {
    if c.law() != d.law() {
        return Err(Error::LawMismatch("states of coalgebras over different laws".into()));
    }
    let (left, li) = reachable(c, std::slice::from_ref(a))?;
    let (right, ri) = reachable(d, std::slice::from_ref(b))?;
    let union = left.disjoint_union(&right)?;
    let blocks = union.partition();
    Ok(blocks[li[a]] == blocks[left.len() + ri[b]])
}

/// Where a map fails to commute with the coalgebra structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomViolation {
    pub generator: String,
    pub via_source: String,
    pub via_target: String,
}

/// Checks `F h ∘ c = d ∘ h` on every generator of `src`, for `h` given by
/// its generator images in `dst`'s carrier.
pub fn is_coalg_hom(src: &FfgCoalgebra, dst: &FfgCoalgebra, images: &[FreeElem]) -> Result<(), HomViolation> {
    let violation = |g: usize, msg: String| HomViolation {
        generator: src.gens.get(g).cloned().unwrap_or_default(),
        via_source: msg,
        via_target: String::new(),
    };
    if src.law != dst.law {
        return Err(violation(0, "laws differ".into()));
    }
    if images.len() != src.len() {
        return Err(violation(0, "wrong number of generator images".into()));
    }
    let free = dst.free();
    for (g, img) in images.iter().enumerate() {
        if free.validate(img).is_err() {
            return Err(violation(g, "image is not an element of the target".into()));
        }
    }
    for g in 0..src.len() {
        let lhs = src.step[g].map(|t| apply_free_map(images, t));
        let rhs = dst.structure(&images[g]);
        if lhs != rhs {
            return Err(HomViolation {
                generator: src.gens[g].clone(),
                via_source: dst.display_node(&lhs),
                via_target: dst.display_node(&rhs),
            });
        }
    }
    Ok(())
}

/// Coproduct of two ffg-coalgebras together with its injections.
pub fn coproduct_coalg(c: &FfgCoalgebra, d: &FfgCoalgebra) -> Result<(FfgCoalgebra, Vec<FreeElem>, Vec<FreeElem>)> {
    c.coproduct(d)
}

/// A coalgebra whose carrier is a finite algebra and whose structure is an
/// algebra homomorphism into the lifted algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraCoalgebra {
    algebra: FiniteAlgebra,
    law: Law,
    map: Vec<FNode<usize>>,
}

impl AlgebraCoalgebra {
    pub fn new(algebra: FiniteAlgebra, law: Law, map: Vec<FNode<usize>>) -> Result<Self> {
        if algebra.variety() != law.variety() {
            return Err(Error::VarietyMismatch {
                expected: law.variety(),
                found: algebra.variety(),
            });
        }
        if map.len() != algebra.len() {
            return Err(Error::InvalidNode("structure must be total".into()));
        }
        for node in &map {
            law.shape().validate(node)?;
            if node.children.iter().any(|&c| c >= algebra.len()) {
                return Err(Error::InvalidNode("successor out of range".into()));
            }
        }
        let lifted = Lifted::new(algebra.clone(), law.clone())?;
        let elems: Vec<usize> = (0..algebra.len()).collect();
        if !is_homomorphism(&algebra, &lifted, |x| map[*x].clone(), &elems) {
            return Err(Error::NotHomomorphism(
                "coalgebra structure does not preserve the algebra operations".into(),
            ));
        }
        Ok(AlgebraCoalgebra { algebra, law, map })
    }

    /// The whole carrier of a `JSL` ffg-coalgebra as an explicit algebra.
    pub fn from_ffg(c: &FfgCoalgebra) -> Result<(AlgebraCoalgebra, Vec<FreeElem>)> {
        if c.variety() != Variety::Jsl {
            return Err(Error::VarietyMismatch {
                expected: Variety::Jsl,
                found: c.variety(),
            });
        }
        let (machine, elems) = materialize(c, DEFAULT_MATERIALIZE_LIMIT)?;
        let free = c.free();
        let index: HashMap<&FreeElem, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let join = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&free.join(a, b)]).collect())
            .collect();
        let algebra = FiniteAlgebra::jsl(machine.names.clone(), join)?;
        let coalg = AlgebraCoalgebra::new(algebra, c.law().clone(), machine.nodes)?;
        Ok((coalg, elems))
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn map(&self) -> &[FNode<usize>] {
        &self.map
    }

    pub fn as_machine(&self) -> FiniteCoalgebra {
        FiniteCoalgebra {
            shape: self.law.shape_arc().clone(),
            names: self.algebra.names().to_vec(),
            nodes: self.map.clone(),
        }
    }

    /// Quotient by behavioral equivalence together with the quotient map.
    pub fn quotient_by_behavior(&self) -> Result<(AlgebraCoalgebra, Vec<usize>)> {
        let blocks = self.as_machine().partition();
        let count = blocks.iter().max().map_or(0, |b| b + 1);
        let mut rep = vec![usize::MAX; count];
        for (x, &b) in blocks.iter().enumerate() {
            if rep[b] == usize::MAX {
                rep[b] = x;
            }
        }
        let names = rep.iter().map(|&r| self.algebra.names()[r].clone()).collect();
        let algebra = match self.algebra.variety() {
            Variety::Jsl => FiniteAlgebra::jsl(
                names,
                rep.iter()
                    .map(|&a| rep.iter().map(|&b| blocks[self.algebra.join(&a, &b)]).collect())
                    .collect(),
            )?,
            Variety::Set => FiniteAlgebra::set(names),
            Variety::Unary => FiniteAlgebra::unary(
                names,
                rep.iter().map(|&a| blocks[self.algebra.succ(&a)]).collect(),
            )?,
        };
        let map = rep.iter().map(|&r| self.map[r].map(|c| blocks[*c])).collect();
        let quotient = AlgebraCoalgebra::new(algebra, self.law.clone(), map)?;
        is_alg_coalg_hom(self, &quotient, &blocks)?;
        Ok((quotient, blocks))
    }
}

/// Checks that `h` is both an algebra and a coalgebra homomorphism between
/// finite algebra-coalgebras.
pub fn is_alg_coalg_hom(src: &AlgebraCoalgebra, dst: &AlgebraCoalgebra, h: &[usize]) -> Result<()> {
    if h.len() != src.algebra.len() || h.iter().any(|&y| y >= dst.algebra.len()) {
        return Err(Error::NotHomomorphism("map is not total into the target".into()));
    }
    let elems: Vec<usize> = (0..src.algebra.len()).collect();
    if !is_homomorphism(&src.algebra, &dst.algebra, |x| h[*x], &elems) {
        return Err(Error::NotHomomorphism("map does not preserve the algebra operations".into()));
    }
    for x in elems {
        let lhs = src.map[x].map(|c| h[*c]);
        let rhs = &dst.map[h[x]];
        if &lhs != rhs {
            return Err(Error::NotHomomorphism(format!(
                "transition of {} is not preserved",
                src.algebra.names()[x]
            )));
        }
    }
    Ok(())
}

/// Checks `F m ∘ c = w* ∘ m` for a map from a finite algebra-coalgebra into
/// an ffg-coalgebra.
pub fn is_hom_into_ffg(src: &AlgebraCoalgebra, dst: &FfgCoalgebra, m: &[FreeElem]) -> Result<()> {
    let free = dst.free();
    let elems: Vec<usize> = (0..src.algebra.len()).collect();
    if !is_homomorphism(&src.algebra, &free, |x| m[*x].clone(), &elems) {
        return Err(Error::NotHomomorphism("section does not preserve the algebra operations".into()));
    }
    for x in elems {
        let lhs = src.map[x].map(|c| m[*c].clone());
        let rhs = dst.structure(&m[x]);
        if lhs != rhs {
            return Err(Error::NotHomomorphism(format!(
                "transition of {} is not preserved",
                src.algebra.names()[x]
            )));
        }
    }
    Ok(())
}

/// Checks `F e* ∘ w = c ∘ e` on generators, for a map out of an
/// ffg-coalgebra given on generators.
pub fn is_hom_from_ffg(src: &FfgCoalgebra, dst: &AlgebraCoalgebra, e: &[usize]) -> Result<()> {
    if e.len() != src.len() {
        return Err(Error::NotHomomorphism("wrong number of generator images".into()));
    }
    for g in 0..src.len() {
        let lhs = src.step[g].map(|t| eval_free(&dst.algebra, e, t));
        if lhs != dst.map[e[g]] {
            return Err(Error::NotHomomorphism(format!(
                "transition of generator {} is not preserved",
                src.gens[g]
            )));
        }
    }
    Ok(())
}

/// A coalgebra on a retract of a free algebra, re-presented on the free
/// algebra itself.
#[derive(Clone, Debug)]
pub struct SplitQuotient {
    pub coalgebra: FfgCoalgebra,
    /// Images of the generators of the free algebra in the retract.
    pub e: Vec<usize>,
    /// Image of every element of the retract in the free algebra.
    pub m: Vec<FreeElem>,
}

/// Given `e: TW ↠ X` (on generators) and `m: X ↣ TW` with `e ∘ m = id`,
/// builds `w = F m ∘ c ∘ e` on `W` and verifies that `m` and `e` are
/// coalgebra homomorphisms.
pub fn split_quotient_to_ffg(
    x: &AlgebraCoalgebra,
    w_gens: Vec<String>,
    e: Vec<usize>,
    m: Vec<FreeElem>,
) -> Result<SplitQuotient> {
    let free = Free::new(x.law.variety(), w_gens.clone());
    if e.len() != w_gens.len() || e.iter().any(|&a| a >= x.algebra.len()) {
        return Err(Error::NotSplit("e must send every generator into the carrier".into()));
    }
    if m.len() != x.algebra.len() {
        return Err(Error::NotSplit("m must be total on the carrier".into()));
    }
    for t in &m {
        free.validate(t)?;
    }
    for (a, t) in m.iter().enumerate() {
        if eval_free(&x.algebra, &e, t) != a {
            return Err(Error::NotSplit(format!(
                "e(m({})) ≠ {}",
                x.algebra.names()[a],
                x.algebra.names()[a]
            )));
        }
    }
    let elems: Vec<usize> = (0..x.algebra.len()).collect();
    if !is_homomorphism(&x.algebra, &free, |a| m[*a].clone(), &elems) {
        return Err(Error::NotSplit("m is not an algebra homomorphism".into()));
    }
    let step = e.iter().map(|&a| x.map[a].map(|c| m[*c].clone())).collect();
    let coalgebra = FfgCoalgebra::new(x.law.clone(), w_gens, step)?;
    is_hom_into_ffg(x, &coalgebra, &m)?;
    is_hom_from_ffg(&coalgebra, x, &e)?;
    Ok(SplitQuotient { coalgebra, e, m })
}

/// The two legs out of the free presentation of a span's apex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigZag {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Replaces the apex of a span `Y ← X → Z` by its free presentation `W`,
/// giving legs `f ∘ e` and `g ∘ e`, both checked as homomorphisms.
pub fn zigzag_from_span(
    x: &AlgebraCoalgebra,
    split: &SplitQuotient,
    (y, f): (&AlgebraCoalgebra, &[usize]),
    (z, g): (&AlgebraCoalgebra, &[usize]),
) -> Result<ZigZag> {
    is_alg_coalg_hom(x, y, f)?;
    is_alg_coalg_hom(x, z, g)?;
    let left: Vec<usize> = split.e.iter().map(|&a| f[a]).collect();
    let right: Vec<usize> = split.e.iter().map(|&a| g[a]).collect();
    is_hom_from_ffg(&split.coalgebra, y, &left)?;
    is_hom_from_ffg(&split.coalgebra, z, &right)?;
    Ok(ZigZag { left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::{builtin_law, Moore};

    fn set(xs: &[usize]) -> FreeElem {
        Term::Join(xs.iter().copied().collect())
    }

    fn nfa_law() -> Law {
        builtin_law(Variety::Jsl, Shape::Moore(Moore::binary(1))).unwrap()
    }

    /// c0(p) = (0, {p,q}), c0(q) = (1, ∅)
    fn nfa() -> FfgCoalgebra {
        determinize(
            vec!["p".into(), "q".into()],
            vec![FNode::new(0, vec![set(&[0, 1])]), FNode::new(1, vec![set(&[])])],
            &nfa_law(),
        )
        .unwrap()
    }

    #[test]
    fn subset_construction_matches_hand_computation() {
        let c = nfa();
        assert_eq!(c.structure(&set(&[0])), FNode::new(0, vec![set(&[0, 1])]));
        assert_eq!(c.structure(&set(&[0, 1])), FNode::new(1, vec![set(&[0, 1])]));
        assert_eq!(c.structure(&set(&[1])), FNode::new(1, vec![set(&[])]));
        assert_eq!(c.structure(&set(&[])), FNode::new(0, vec![set(&[])]));
    }

    #[test]
    fn unary_determinization_adds_counters() {
        let law = builtin_law(Variety::Unary, Shape::Id).unwrap();
        let c = determinize(vec!["x".into()], vec![FNode::new(0, vec![Term::Iter(1, 0)])], &law).unwrap();
        for n in 0..5 {
            assert_eq!(c.structure(&Term::Iter(n, 0)), FNode::new(0, vec![Term::Iter(n + 1, 0)]));
        }
    }

    #[test]
    fn set_determinization_is_the_coalgebra() {
        let law = builtin_law(Variety::Set, Shape::Id).unwrap();
        let c = determinize(
            vec!["x".into(), "y".into()],
            vec![FNode::new(0, vec![Term::Var(1)]), FNode::new(0, vec![Term::Var(0)])],
            &law,
        )
        .unwrap();
        assert_eq!(c.structure(&Term::Var(0)), c.step()[0]);
    }

    #[test]
    fn identity_is_a_homomorphism() {
        let c = nfa();
        let id: Vec<FreeElem> = (0..c.len()).map(|g| c.eta(g)).collect();
        assert!(is_coalg_hom(&c, &c, &id).is_ok());
    }

    #[test]
    fn looping_state_to_dead_state_is_not_a_homomorphism() {
        let c = nfa();
        let bad = vec![set(&[]), set(&[1])];
        let err = is_coalg_hom(&c, &c, &bad).unwrap_err();
        assert_eq!(err.generator, "p");
    }

    #[test]
    fn behavioral_equivalence_in_the_nfa() {
        let c = nfa();
        let (copy, _, inr) = c.coproduct(&nfa()).unwrap();
        let pq_copy = apply_free_map(&inr, &set(&[0, 1]));
        assert!(behavioral_equiv(&copy, &set(&[0, 1]), &copy, &pq_copy).unwrap());
        assert!(!behavioral_equiv(&c, &set(&[1]), &c, &set(&[])).unwrap());
        assert!(behavioral_equiv(&c, &set(&[0]), &c, &set(&[0])).unwrap());
    }

    #[test]
    fn unary_equivalence_is_refused() {
        let law = builtin_law(Variety::Unary, Shape::Id).unwrap();
        let c = determinize(vec!["x".into()], vec![FNode::new(0, vec![Term::Iter(1, 0)])], &law).unwrap();
        assert_eq!(
            behavioral_equiv(&c, &Term::Iter(0, 0), &c, &Term::Iter(0, 0)),
            Err(Error::InfiniteCarrier(Variety::Unary))
        );
    }

    #[test]
    fn coproduct_with_empty_is_identity_and_injections_are_homs() {
        let c = nfa();
        let (sum, inl, inr) = c.coproduct(&FfgCoalgebra::empty(nfa_law())).unwrap();
        assert_eq!(sum, c);
        assert!(inr.is_empty());
        assert!(is_coalg_hom(&c, &sum, &inl).is_ok());
        let (sum, inl, inr) = c.coproduct(&c).unwrap();
        assert_eq!(sum.len(), 4);
        assert!(is_coalg_hom(&c, &sum, &inl).is_ok());
        assert!(is_coalg_hom(&c, &sum, &inr).is_ok());
    }

    #[test]
    fn minimization_is_canonical() {
        let c = nfa();
        let (m, idx) = reachable(&c, &[set(&[0])]).unwrap();
        let (sum, _, inr) = c.coproduct(&c).unwrap();
        let start = apply_free_map(&inr, &set(&[0]));
        let (m2, idx2) = reachable(&sum, &[set(&[0, 1]), start.clone()]).unwrap();
        assert_eq!(m.minimize_from(idx[&set(&[0])]), m2.minimize_from(idx2[&start]));
    }

    /// The three-element chain ⊥ < a < ⊤ with a coalgebra structure, as a
    /// retract of the free semilattice on {p, q}.
    fn chain_split() -> (AlgebraCoalgebra, Vec<usize>, Vec<FreeElem>) {
        let chain = FiniteAlgebra::jsl(
            vec!["⊥".into(), "a".into(), "⊤".into()],
            (0..3).map(|i| (0..3).map(|j| usize::max(i, j)).collect()).collect(),
        )
        .unwrap();
        // ⊥ ↦ (0, ⊥), a ↦ (0, ⊤), ⊤ ↦ (1, ⊤): monotone and join-preserving.
        let map = vec![FNode::new(0, vec![0]), FNode::new(0, vec![2]), FNode::new(1, vec![2])];
        let x = AlgebraCoalgebra::new(chain, nfa_law(), map).unwrap();
        let e = vec![1, 2];
        let m = vec![set(&[]), set(&[0]), set(&[0, 1])];
        (x, e, m)
    }

    #[test]
    fn split_quotient_yields_homomorphisms() {
        let (x, e, m) = chain_split();
        let sq = split_quotient_to_ffg(&x, vec!["p".into(), "q".into()], e, m).unwrap();
        assert_eq!(sq.coalgebra.len(), 2);
        assert!(is_hom_into_ffg(&x, &sq.coalgebra, &sq.m).is_ok());
        assert!(is_hom_from_ffg(&sq.coalgebra, &x, &sq.e).is_ok());
    }

    #[test]
    fn split_quotient_rejects_non_sections() {
        let (x, _, m) = chain_split();
        let err = split_quotient_to_ffg(&x, vec!["p".into(), "q".into()], vec![2, 2], m).unwrap_err();
        assert!(matches!(err, Error::NotSplit(_)));
    }

    #[test]
    fn zigzag_legs_are_homomorphisms() {
        let (x, e, m) = chain_split();
        let sq = split_quotient_to_ffg(&x, vec!["p".into(), "q".into()], e, m).unwrap();
        let (q, quot) = x.quotient_by_behavior().unwrap();
        let id: Vec<usize> = (0..x.algebra().len()).collect();
        let zz = zigzag_from_span(&x, &sq, (&x, &id), (&q, &quot)).unwrap();
        assert_eq!(zz.left, sq.e);
        for (a, img) in sq.m.iter().enumerate() {
            assert_eq!(eval_free(q.algebra(), &zz.right, img), quot[a]);
        }
    }

    #[test]
    fn whole_carrier_materializes_as_algebra_coalgebra() {
        let (ac, elems) = AlgebraCoalgebra::from_ffg(&nfa()).unwrap();
        assert_eq!(elems.len(), 4);
        assert_eq!(ac.algebra().len(), 4);
        let (q, _) = ac.quotient_by_behavior().unwrap();
        // {p} and {p,q} differ, as do {q} and ∅: four behaviors.
        assert_eq!(q.algebra().len(), 4);
    }

    #[test]
    fn dot_export_mentions_every_state() {
        let (m, _) = reachable(&nfa(), &[set(&[0])]).unwrap();
        let dot = m.to_dot("nfa");
        assert!(dot.contains("{p}"));
        assert!(dot.contains("{p,q}"));
        assert!(dot.starts_with("digraph"));
    }
}
