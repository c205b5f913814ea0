//! Single-sorted finitary monads presented as varieties.
//!
//! Three monads are built in:
//!
//! * `SET`, the identity monad (`TX = X`);
//! * `UNARY`, algebras with one unary operation and no equations
//!   (`TX = ℕ × X`, `u(n, x) = (n + 1, x)`);
//! * `JSL`, join-semilattices with bottom (`TX` = finite subsets of `X`).
//!
//! Elements of `TX` are [`Term`]s; a term's variant always matches its
//! variety, which keeps every free algebra in canonical form: unary terms are
//! stored as counter/generator pairs and semilattice terms as sorted,
//! deduplicated sets.

use std::collections::BTreeSet;
use std::fmt::{self, Debug};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Bounds every carrier element in this crate.
pub trait Carrier: Clone + Ord + Hash + Debug + Send + Sync {}

impl<T: Clone + Ord + Hash + Debug + Send + Sync> Carrier for T {}

/// Largest generator set whose semilattice carrier we are willing to list.
pub const MAX_ENUMERATED_GENERATORS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variety {
    Set,
    Unary,
    Jsl,
}

impl Variety {
    /// The unit `η_X(x)`.
    pub fn unit<X: Ord>(self, x: X) -> Term<X> {
        match self {
            Variety::Set => Term::Var(x),
            Variety::Unary => Term::Iter(0, x),
            Variety::Jsl => Term::Join(BTreeSet::from([x])),
        }
    }

    pub fn parse(s: &str) -> Result<Variety> {
        match s.trim().to_ascii_lowercase().as_str() {
            "set" => Ok(Variety::Set),
            "unary" => Ok(Variety::Unary),
            "jsl" => Ok(Variety::Jsl),
            other => Err(Error::Unsupported(format!("unknown variety `{other}`"))),
        }
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variety::Set => "SET",
            Variety::Unary => "UNARY",
            Variety::Jsl => "JSL",
        })
    }
}

/// An element of `TX` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term<X> {
    /// `SET`: a bare element.
    Var(X),
    /// `UNARY`: the term `uⁿ(x)`.
    Iter(u64, X),
    /// `JSL`: a finite join; the empty set is `⊥`.
    Join(BTreeSet<X>),
}

/// An element of a free algebra over generators addressed by index.
pub type FreeElem = Term<usize>;

impl<X> Term<X> {
    pub fn variety(&self) -> Variety {
        match self {
            Term::Var(_) => Variety::Set,
            Term::Iter(..) => Variety::Unary,
            Term::Join(_) => Variety::Jsl,
        }
    }

    /// The elements of `X` occurring in the term.
    pub fn support(&self) -> Box<dyn Iterator<Item = &X> + '_> {
        match self {
            Term::Var(x) | Term::Iter(_, x) => Box::new(std::iter::once(x)),
            Term::Join(xs) => Box::new(xs.iter()),
        }
    }

    /// The functor action `Tf`.
    pub fn map<Y: Ord>(&self, mut f: impl FnMut(&X) -> Y) -> Term<Y> {
        match self {
            Term::Var(x) => Term::Var(f(x)),
            Term::Iter(n, x) => Term::Iter(*n, f(x)),
            Term::Join(xs) => Term::Join(xs.iter().map(f).collect()),
        }
    }

    pub fn try_map<Y: Ord, E>(&self, mut f: impl FnMut(&X) -> Result<Y, E>) -> Result<Term<Y>, E> {
        Ok(match self {
            Term::Var(x) => Term::Var(f(x)?),
            Term::Iter(n, x) => Term::Iter(*n, f(x)?),
            Term::Join(xs) => Term::Join(xs.iter().map(f).collect::<Result<_, E>>()?),
        })
    }
}

impl<X: Ord + Clone> Term<X> {
    /// The multiplication `μ_X: TTX → TX`.
    ///
    /// Panics when the nested terms belong to different varieties; terms are
    /// only ever built through a single variety, so that is a logic error.
    pub fn flatten(t: &Term<Term<X>>) -> Term<X> {
        match t {
            Term::Var(inner) => match inner {
                Term::Var(x) => Term::Var(x.clone()),
                other => panic!("mixed varieties in flatten: SET over {}", other.variety()),
            },
            Term::Iter(n, inner) => match inner {
                Term::Iter(m, x) => Term::Iter(n + m, x.clone()),
                other => panic!("mixed varieties in flatten: UNARY over {}", other.variety()),
            },
            Term::Join(sets) => {
                let mut out = BTreeSet::new();
                for inner in sets {
                    match inner {
                        Term::Join(xs) => out.extend(xs.iter().cloned()),
                        other => panic!("mixed varieties in flatten: JSL over {}", other.variety()),
                    }
                }
                Term::Join(out)
            }
        }
    }
}

/// A T-algebra `(A, α: TA → A)`.
///
/// Implementations only need the structure map; the basic operations of each
/// variety are derived from it.
pub trait Algebra {
    type Elem: Carrier;

    fn variety(&self) -> Variety;

    /// The Eilenberg–Moore structure `α: TA → A`.
    fn eval(&self, t: &Term<Self::Elem>) -> Self::Elem;

    /// `u(a)` for unary algebras.
    fn succ(&self, a: &Self::Elem) -> Self::Elem {
        debug_assert_eq!(self.variety(), Variety::Unary);
        self.eval(&Term::Iter(1, a.clone()))
    }

    /// `a ∨ b` for semilattices.
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        debug_assert_eq!(self.variety(), Variety::Jsl);
        self.eval(&Term::Join(BTreeSet::from([a.clone(), b.clone()])))
    }

    /// `⊥` for semilattices.
    fn bottom(&self) -> Self::Elem {
        debug_assert_eq!(self.variety(), Variety::Jsl);
        self.eval(&Term::Join(BTreeSet::new()))
    }

    /// Lists the carrier. Unary free algebras need `max_counter`; opaque
    /// carriers are not enumerable.
    fn elements(&self, max_counter: Option<u64>) -> Result<Vec<Self::Elem>> {
        let _ = max_counter;
        Err(Error::Unsupported("carrier is not enumerable".into()))
    }
}

/// The free algebra `TX` on a finite generator set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Free {
    variety: Variety,
    gens: Vec<String>,
}

impl Free {
    pub fn new(variety: Variety, gens: Vec<String>) -> Self {
        Free { variety, gens }
    }

    /// Free algebra on generators named `prefix0, prefix1, …`.
    pub fn numbered(variety: Variety, prefix: &str, count: usize) -> Self {
        Free::new(variety, (0..count).map(|i| format!("{prefix}{i}")).collect())
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

    pub fn eta(&self, g: usize) -> FreeElem {
        self.variety.unit(g)
    }

    pub fn generator(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    /// Checks that `t` is a term of this algebra.
    pub fn validate(&self, t: &FreeElem) -> Result<()> {
        if t.variety() != self.variety {
            return Err(Error::VarietyMismatch {
                expected: self.variety,
                found: t.variety(),
            });
        }
        if let Some(g) = t.support().find(|&&g| g >= self.gens.len()) {
            return Err(Error::InvalidTerm(format!(
                "generator index {g} out of range for {} generators",
                self.gens.len()
            )));
        }
        Ok(())
    }

    pub fn display(&self, t: &FreeElem) -> String {
        display_term(t, |g| self.gens.get(*g).cloned().unwrap_or_else(|| format!("#{g}")))
    }

    pub fn to_json(&self, t: &FreeElem) -> Value {
        let name = |g: &usize| self.gens[*g].clone();
        match t {
            Term::Var(g) => json!({ "gen": name(g) }),
            Term::Iter(n, g) => json!({ "n": n, "gen": name(g) }),
            Term::Join(gs) => json!({ "set": gs.iter().map(name).collect::<Vec<_>>() }),
        }
    }

    pub fn from_json(&self, v: &Value) -> Result<FreeElem> {
        let lookup = |name: &Value| -> Result<usize> {
            let name = name
                .as_str()
                .ok_or_else(|| Error::InvalidTerm(format!("generator name expected, got {name}")))?;
            self.generator(name)
                .ok_or_else(|| Error::InvalidTerm(format!("unknown generator `{name}`")))
        };
        let t = if let Some(set) = v.get("set") {
            let names = set
                .as_array()
                .ok_or_else(|| Error::InvalidTerm("`set` must be an array".into()))?;
            Term::Join(names.iter().map(lookup).collect::<Result<_>>()?)
        } else if let Some(g) = v.get("gen") {
            match v.get("n") {
                Some(n) => Term::Iter(
                    n.as_u64()
                        .ok_or_else(|| Error::InvalidTerm("`n` must be a natural number".into()))?,
                    lookup(g)?,
                ),
                None => Term::Var(lookup(g)?),
            }
        } else {
            return Err(Error::InvalidTerm(format!("not a free element: {v}")));
        };
        self.validate(&t)?;
        Ok(t)
    }
}

impl Algebra for Free {
    type Elem = FreeElem;

    fn variety(&self) -> Variety {
        self.variety
    }

    fn eval(&self, t: &Term<FreeElem>) -> FreeElem {
        Term::flatten(t)
    }

    fn elements(&self, max_counter: Option<u64>) -> Result<Vec<FreeElem>> {
        let n = self.gens.len();
        match self.variety {
            Variety::Set => Ok((0..n).map(Term::Var).collect()),
            Variety::Unary => {
                let bound = max_counter.ok_or(Error::InfiniteCarrier(Variety::Unary))?;
                Ok((0..=bound)
                    .flat_map(|k| (0..n).map(move |g| Term::Iter(k, g)))
                    .collect())
            }
            Variety::Jsl => {
                if n > MAX_ENUMERATED_GENERATORS {
                    return Err(Error::CarrierTooLarge {
                        size: n,
                        limit: MAX_ENUMERATED_GENERATORS,
                    });
                }
                Ok((0u32..1 << n)
                    .map(|mask| Term::Join((0..n).filter(|g| mask >> g & 1 == 1).collect()))
                    .collect())
            }
        }
    }
}

pub(crate) fn display_term<X>(t: &Term<X>, mut name: impl FnMut(&X) -> String) -> String {
    match t {
        Term::Var(x) => name(x),
        Term::Iter(0, x) => name(x),
        Term::Iter(n, x) => format!("+{n} {}", name(x)),
        Term::Join(xs) => format!("{{{}}}", xs.iter().map(name).collect::<Vec<_>>().join(",")),
    }
}

/// The unique homomorphism `f*: TX → A` with `f* ∘ η = f`.
#[derive(Clone, Debug)]
pub struct Extension<'a, A: Algebra> {
    target: &'a A,
    images: Vec<A::Elem>,
}

impl<'a, A: Algebra> Extension<'a, A> {
    pub fn apply(&self, t: &FreeElem) -> A::Elem {
        self.target.eval(&t.map(|g| self.images[*g].clone()))
    }

    pub fn images(&self) -> &[A::Elem] {
        &self.images
    }
}

/// Extends a map on generators to a T-algebra homomorphism out of `free`.
pub fn extend_hom<'a, A: Algebra>(
    free: &Free,
    images: Vec<A::Elem>,
    target: &'a A,
) -> Result<Extension<'a, A>> {
    if free.variety() != target.variety() {
        return Err(Error::VarietyMismatch {
            expected: free.variety(),
            found: target.variety(),
        });
    }
    if images.len() != free.len() {
        return Err(Error::InvalidTerm(format!(
            "{} generator images for {} generators",
            images.len(),
            free.len()
        )));
    }
    Ok(Extension { target, images })
}

/// Evaluates the extension of `images` at `t` without building an
/// [`Extension`]; callers guarantee varieties agree.
pub fn eval_free<A: Algebra>(target: &A, images: &[A::Elem], t: &FreeElem) -> A::Elem {
    target.eval(&t.map(|g| images[*g].clone()))
}

/// Checks that `h` commutes with the operations of the variety on `sample`.
pub fn is_homomorphism<A: Algebra, B: Algebra>(
    source: &A,
    target: &B,
    h: impl Fn(&A::Elem) -> B::Elem,
    sample: &[A::Elem],
) -> bool {
    match source.variety() {
        Variety::Set => true,
        Variety::Unary => sample
            .iter()
            .all(|a| h(&source.succ(a)) == target.succ(&h(a))),
        Variety::Jsl => {
            h(&source.bottom()) == target.bottom()
                && sample.iter().all(|a| {
                    sample
                        .iter()
                        .all(|b| h(&source.join(a, b)) == target.join(&h(a), &h(b)))
                })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Table {
    None,
    Succ(Vec<usize>),
    Join { join: Vec<Vec<usize>>, bottom: usize },
}

/// A finite algebra given by explicit operation tables; elements are indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAlgebra {
    variety: Variety,
    names: Vec<String>,
    table: Table,
}

impl FiniteAlgebra {
    pub fn set(names: Vec<String>) -> Self {
        FiniteAlgebra {
            variety: Variety::Set,
            names,
            table: Table::None,
        }
    }

    pub fn unary(names: Vec<String>, succ: Vec<usize>) -> Result<Self> {
        if succ.len() != names.len() || succ.iter().any(|&s| s >= names.len()) {
            return Err(Error::InvalidAlgebra(
                "successor table must be a total map on the carrier".into(),
            ));
        }
        Ok(FiniteAlgebra {
            variety: Variety::Unary,
            names,
            table: Table::Succ(succ),
        })
    }

    /// A join-semilattice from its full join table; checks the semilattice
    /// equations and finds the bottom element.
    pub fn jsl(names: Vec<String>, join: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidAlgebra("a semilattice needs a bottom element".into()));
        }
        if join.len() != n || join.iter().any(|row| row.len() != n || row.iter().any(|&k| k >= n)) {
            return Err(Error::InvalidAlgebra(format!("join table must be {n}×{n}")));
        }
        for i in 0..n {
            if join[i][i] != i {
                return Err(Error::InvalidAlgebra(format!("join not idempotent at {}", names[i])));
            }
            for j in 0..n {
                if join[i][j] != join[j][i] {
                    return Err(Error::InvalidAlgebra(format!(
                        "join not commutative at ({}, {})",
                        names[i], names[j]
                    )));
                }
                for k in 0..n {
                    if join[join[i][j]][k] != join[i][join[j][k]] {
                        return Err(Error::InvalidAlgebra(format!(
                            "join not associative at ({}, {}, {})",
                            names[i], names[j], names[k]
                        )));
                    }
                }
            }
        }
        let bottom = (0..n)
            .find(|&b| (0..n).all(|x| join[b][x] == x))
            .ok_or_else(|| Error::InvalidAlgebra("no bottom element".into()))?;
        Ok(FiniteAlgebra {
            variety: Variety::Jsl,
            names,
            table: Table::Join { join, bottom },
        })
    }

    /// The two-element lattice `0 < 1`.
    pub fn boolean() -> Self {
        FiniteAlgebra::jsl(
            vec!["0".into(), "1".into()],
            vec![vec![0, 1], vec![1, 1]],
        )
        .expect("boolean lattice")
    }

    /// The chain `0 < 1 < … < n-1`.
    pub fn chain(n: usize) -> Result<Self> {
        FiniteAlgebra::jsl(
            (0..n).map(|i| i.to_string()).collect(),
            (0..n).map(|i| (0..n).map(|j| i.max(j)).collect()).collect(),
        )
    }

    /// Subsets of `gens` under union; the subset with bit mask `k` has index
    /// `k`.
    pub fn powerset(gens: &[String]) -> Result<Self> {
        let n = gens.len();
        if n > MAX_ENUMERATED_GENERATORS / 2 {
            return Err(Error::CarrierTooLarge {
                size: n,
                limit: MAX_ENUMERATED_GENERATORS / 2,
            });
        }
        let names = (0usize..1 << n)
            .map(|mask| {
                let members: Vec<&str> = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| gens[i].as_str())
                    .collect();
                format!("{{{}}}", members.join(","))
            })
            .collect();
        let join = (0usize..1 << n)
            .map(|a| (0usize..1 << n).map(|b| a | b).collect())
            .collect();
        FiniteAlgebra::jsl(names, join)
    }

    /// The product semilattice with componentwise join; element `(i, j)` has
    /// index `i * other.len() + j`.
    pub fn product(&self, other: &FiniteAlgebra) -> Result<Self> {
        let (Table::Join { join: a, .. }, Table::Join { join: b, .. }) = (&self.table, &other.table)
        else {
            return Err(Error::VarietyMismatch {
                expected: Variety::Jsl,
                found: if self.variety == Variety::Jsl { other.variety } else { self.variety },
            });
        };
        let (n, m) = (self.len(), other.len());
        let names = (0..n * m)
            .map(|k| format!("{}|{}", self.names[k / m], other.names[k % m]))
            .collect();
        let join = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| a[x / m][y / m] * m + b[x % m][y % m])
                    .collect()
            })
            .collect();
        FiniteAlgebra::jsl(names, join)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `a ≤ b` in the induced order of a semilattice.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        match &self.table {
            Table::Join { join, .. } => join[a][b] == b,
            _ => a == b,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "variety": self.variety, "elements": self.names });
        match &self.table {
            Table::None => {}
            Table::Succ(succ) => {
                v["succ"] = json!(succ.iter().enumerate().map(|(i, j)| [i, *j]).collect::<Vec<_>>());
            }
            Table::Join { join, .. } => {
                let n = self.len();
                let triples: Vec<[usize; 3]> = (0..n)
                    .flat_map(|i| (i..n).map(move |j| (i, j)))
                    .map(|(i, j)| [i, j, join[i][j]])
                    .collect();
                v["join"] = json!(triples);
            }
        }
        v
    }

    /// Parses `{"variety": "JSL", "elements": [...], "join": [[i,j,k],...]}`;
    /// each triple states `i ∨ j = k` and the table is closed under symmetry.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidAlgebra(m.to_string());
        let variety: Variety = serde_json::from_value(v["variety"].clone())
            .map_err(|e| bad(&format!("variety: {e}")))?;
        let names: Vec<String> = serde_json::from_value(v["elements"].clone())
            .map_err(|e| bad(&format!("elements: {e}")))?;
        let n = names.len();
        match variety {
            Variety::Set => Ok(FiniteAlgebra::set(names)),
            Variety::Unary => {
                let pairs: Vec<[usize; 2]> = serde_json::from_value(v["succ"].clone())
                    .map_err(|e| bad(&format!("succ: {e}")))?;
                let mut succ = vec![usize::MAX; n];
                for [i, j] in pairs {
                    if i >= n {
                        return Err(bad("succ index out of range"));
                    }
                    succ[i] = j;
                }
                FiniteAlgebra::unary(names, succ)
            }
            Variety::Jsl => {
                let triples: Vec<[usize; 3]> = serde_json::from_value(v["join"].clone())
                    .map_err(|e| bad(&format!("join: {e}")))?;
                let mut join = vec![vec![usize::MAX; n]; n];
                for [i, j, k] in triples {
                    if i >= n || j >= n {
                        return Err(bad("join index out of range"));
                    }
                    join[i][j] = k;
                    join[j][i] = k;
                }
                FiniteAlgebra::jsl(names, join)
            }
        }
    }
}

impl Algebra for FiniteAlgebra {
    type Elem = usize;

    fn variety(&self) -> Variety {
        self.variety
    }

    fn eval(&self, t: &Term<usize>) -> usize {
        match (&self.table, t) {
            (Table::None, Term::Var(a)) => *a,
            (Table::Succ(succ), Term::Iter(n, a)) => {
                // Orbits of a finite map are eventually periodic, so large
                // counters reduce modulo the cycle.
                let mut seen = vec![usize::MAX; succ.len()];
                let mut cur = *a;
                let mut step = 0u64;
                while step < *n {
                    if seen[cur] != usize::MAX {
                        let cycle = step - seen[cur] as u64;
                        let remaining = (*n - step) % cycle;
                        for _ in 0..remaining {
                            cur = succ[cur];
                        }
                        return cur;
                    }
                    seen[cur] = step as usize;
                    cur = succ[cur];
                    step += 1;
                }
                cur
            }
            (Table::Join { join, bottom }, Term::Join(xs)) => {
                xs.iter().fold(*bottom, |acc, &x| join[acc][x])
            }
            (_, t) => panic!("{} term evaluated in a {} algebra", t.variety(), self.variety),
        }
    }

    fn elements(&self, _max_counter: Option<u64>) -> Result<Vec<usize>> {
        Ok((0..self.len()).collect())
    }
}

/// An element of a binary coproduct `B ⊕ A`.
///
/// `SET` and `UNARY` coproducts are disjoint unions and use `Inl`/`Inr`;
/// `JSL` coproducts are products and always use `Pair`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sum<B, A> {
    Inl(B),
    Inr(A),
    Pair(B, A),
}

impl<B, A> Sum<B, A> {
    pub fn left(&self) -> Option<&B> {
        match self {
            Sum::Inl(b) | Sum::Pair(b, _) => Some(b),
            Sum::Inr(_) => None,
        }
    }

    pub fn right(&self) -> Option<&A> {
        match self {
            Sum::Inr(a) | Sum::Pair(_, a) => Some(a),
            Sum::Inl(_) => None,
        }
    }
}

/// The coproduct of two algebras of the same variety.
#[derive(Clone, Debug)]
pub struct Coproduct<B, A> {
    left: B,
    right: A,
}

impl<B: Algebra, A: Algebra> Coproduct<B, A> {
    pub fn new(left: B, right: A) -> Result<Self> {
        if left.variety() != right.variety() {
            return Err(Error::VarietyMismatch {
                expected: left.variety(),
                found: right.variety(),
            });
        }
        Ok(Coproduct { left, right })
    }

    pub fn left(&self) -> &B {
        &self.left
    }

    pub fn right(&self) -> &A {
        &self.right
    }

    pub fn inl(&self, b: B::Elem) -> Sum<B::Elem, A::Elem> {
        match self.left.variety() {
            Variety::Jsl => Sum::Pair(b, self.right.bottom()),
            _ => Sum::Inl(b),
        }
    }

    pub fn inr(&self, a: A::Elem) -> Sum<B::Elem, A::Elem> {
        match self.left.variety() {
            Variety::Jsl => Sum::Pair(self.left.bottom(), a),
            _ => Sum::Inr(a),
        }
    }

    /// `[f, g]`, the unique homomorphism restricting to `f` and `g`.
    /// Both maps must be homomorphisms into `target`.
    pub fn copair<C: Algebra>(
        &self,
        s: &Sum<B::Elem, A::Elem>,
        target: &C,
        f: impl Fn(&B::Elem) -> C::Elem,
        g: impl Fn(&A::Elem) -> C::Elem,
    ) -> C::Elem {
        match s {
            Sum::Inl(b) => f(b),
            Sum::Inr(a) => g(a),
            Sum::Pair(b, a) => target.join(&f(b), &g(a)),
        }
    }
}

impl<B: Algebra, A: Algebra> Algebra for Coproduct<B, A> {
    type Elem = Sum<B::Elem, A::Elem>;

    fn variety(&self) -> Variety {
        self.left.variety()
    }

    fn eval(&self, t: &Term<Self::Elem>) -> Self::Elem {
        match t {
            Term::Var(s) => s.clone(),
            Term::Iter(n, Sum::Inl(b)) => Sum::Inl(self.left.eval(&Term::Iter(*n, b.clone()))),
            Term::Iter(n, Sum::Inr(a)) => Sum::Inr(self.right.eval(&Term::Iter(*n, a.clone()))),
            Term::Iter(_, Sum::Pair(..)) => panic!("pair in a unary coproduct"),
            Term::Join(xs) => {
                let mut bs = BTreeSet::new();
                let mut as_ = BTreeSet::new();
                for s in xs {
                    match s {
                        Sum::Pair(b, a) => {
                            bs.insert(b.clone());
                            as_.insert(a.clone());
                        }
                        Sum::Inl(b) => {
                            bs.insert(b.clone());
                        }
                        Sum::Inr(a) => {
                            as_.insert(a.clone());
                        }
                    }
                }
                Sum::Pair(self.left.eval(&Term::Join(bs)), self.right.eval(&Term::Join(as_)))
            }
        }
    }

    fn elements(&self, max_counter: Option<u64>) -> Result<Vec<Self::Elem>> {
        let bs = self.left.elements(max_counter)?;
        let as_ = self.right.elements(max_counter)?;
        Ok(match self.variety() {
            Variety::Jsl => bs
                .iter()
                .flat_map(|b| as_.iter().map(move |a| Sum::Pair(b.clone(), a.clone())))
                .collect(),
            _ => bs
                .into_iter()
                .map(Sum::Inl)
                .chain(as_.into_iter().map(Sum::Inr))
                .collect(),
        })
    }
}
