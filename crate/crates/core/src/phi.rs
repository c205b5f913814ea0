//! Executable fixed points assembled from ffg-coalgebras.
//!
//! Every element of [`Phi`] is a class of pairs (ffg-coalgebra, state); a
//! backend decides when two pairs name the same class by computing a
//! canonical key. Two backends are provided:
//!
//! * [`StreamBackend`] for `UNARY` over `ID`: a state generates an eventually
//!   periodic stream of increments and its key is the mean of the period;
//! * [`BisimBackend`] for `JSL` over Moore shapes: the key is the minimal
//!   machine reachable from the state, so equal keys mean equal behavior.

use std::collections::HashMap;
use std::fmt::{self, Debug, Display};
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::coalgebra::{is_coalg_hom, reachable, FfgCoalgebra, HomViolation};
use crate::equation::{sequence, FfgEquation, Solution};
use crate::error::{Error, Result};
use crate::functor::{builtin_law, DistributiveLaw, FNode, Law, Moore, Shape};
use crate::variety::{Algebra, Carrier, FiniteAlgebra, Free, FreeElem, Sum, Term, Variety};

/// A coalgebra together with one of its states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representative {
    pub coalgebra: FfgCoalgebra,
    pub state: FreeElem,
}

/// An element of the fixed point: a canonical key plus a representative.
///
/// Equality, order and hashing only look at the key.
#[derive(Clone, Debug)]
pub struct PhiClass<K> {
    key: K,
    rep: Arc<Representative>,
}

impl<K> PhiClass<K> {
    pub fn key(&self) -> &K {
        &self.key
    }

    pub fn representative(&self) -> &Representative {
        &self.rep
    }

    pub fn same_rep(&self, other: &PhiClass<K>) -> bool {
        Arc::ptr_eq(&self.rep, &other.rep)
    }
}

impl<K: PartialEq> PartialEq for PhiClass<K> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl<K: Eq> Eq for PhiClass<K> {}

impl<K: Ord> PartialOrd for PhiClass<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: Ord> Ord for PhiClass<K> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

impl<K: Hash> Hash for PhiClass<K> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl<K: Display> Display for PhiClass<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.key.fmt(f)
    }
}

/// A decision procedure for class equality on one instance.
pub trait Backend: Clone + Debug + Send + Sync {
    type Key: Carrier + Display;

    fn law(&self) -> &Law;

    /// The canonical key of `t` in `c`.
    fn key_of(&self, c: &FfgCoalgebra, t: &FreeElem) -> Result<Self::Key>;

    /// Keys of several states of one coalgebra.
    fn keys_of(&self, c: &FfgCoalgebra, ts: &[FreeElem]) -> Result<Vec<Self::Key>> {
        ts.iter().map(|t| self.key_of(c, t)).collect()
    }

    /// A small representative of the class with this key.
    fn canonical(&self, key: &Self::Key) -> Representative;
}

/// The fixed point of a backend, as an algebra.
#[derive(Clone, Debug)]
pub struct Phi<B> {
    backend: B,
}

pub type PhiElem<B> = PhiClass<<B as Backend>::Key>;

impl<B: Backend> Phi<B> {
    pub fn new(backend: B) -> Self {
        Phi { backend }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn law(&self) -> &Law {
        self.backend.law()
    }

    /// The class of `t` in `c`, keeping `(c, t)` as its representative.
    pub fn class_of(&self, c: &FfgCoalgebra, t: &FreeElem) -> Result<PhiElem<B>> {
        if c.law() != self.law() {
            return Err(Error::LawMismatch(format!(
                "{} coalgebra over {} given to a backend for {} over {}",
                c.variety(),
                c.shape(),
                self.law().variety(),
                self.law().shape()
            )));
        }
        c.free().validate(t)?;
        Ok(PhiClass {
            key: self.backend.key_of(c, t)?,
            rep: Arc::new(Representative {
                coalgebra: c.clone(),
                state: t.clone(),
            }),
        })
    }

    /// The class with a given key and its canonical representative.
    pub fn from_key(&self, key: B::Key) -> PhiElem<B> {
        let rep = self.backend.canonical(&key);
        PhiClass {
            key,
            rep: Arc::new(rep),
        }
    }

    fn normalized(&self, key: B::Key) -> PhiElem<B> {
        self.from_key(key)
    }

    /// Coproduct of the distinct representatives of `classes`, and the
    /// injected state of each class.
    pub fn gather(&self, classes: &[&PhiElem<B>]) -> (FfgCoalgebra, Vec<FreeElem>) {
        let mut coalg = FfgCoalgebra::empty(self.law().clone());
        let mut seen: Vec<(&PhiElem<B>, Vec<FreeElem>)> = Vec::new();
        let mut states = Vec::with_capacity(classes.len());
        for cls in classes {
            let images = match seen.iter().find(|(c, _)| c.same_rep(cls)) {
                Some((_, images)) => images.clone(),
                None => {
                    let (sum, _, inr) = coalg
                        .coproduct(&cls.rep.coalgebra)
                        .expect("representatives share the backend law");
                    coalg = sum;
                    seen.push((cls, inr.clone()));
                    inr
                }
            };
            states.push(Term::flatten(&cls.rep.state.map(|g| images[*g].clone())));
        }
        (coalg, states)
    }

    /// The algebra structure `F(φ) → φ`: a fresh generator whose transition
    /// is the given layer.
    pub fn structure(&self, node: &FNode<PhiElem<B>>) -> PhiElem<B> {
        let kids: Vec<&PhiElem<B>> = node.children.iter().collect();
        let (c, states) = self.gather(&kids);
        let fresh = c.len();
        let c = c
            .with_generator("ν", FNode::new(node.label, states))
            .expect("children are states of the coproduct");
        let key = self
            .backend
            .key_of(&c, &c.eta(fresh))
            .expect("backend accepts its own coalgebras");
        self.normalized(key)
    }

    /// The inverse of [`Phi::structure`]: one step of the representative.
    pub fn unfold(&self, cls: &PhiElem<B>) -> FNode<PhiElem<B>> {
        let rep = &cls.rep;
        rep.coalgebra.structure(&rep.state).map(|t| {
            let key = self
                .backend
                .key_of(&rep.coalgebra, t)
                .expect("backend accepts its own coalgebras");
            self.normalized(key)
        })
    }

    /// Solves `e` by gathering the representatives of its parameters into a
    /// coalgebra `C`, rewriting `e` over `TC` and sequencing with `C`.
    pub fn solve(&self, e: &FfgEquation<Phi<B>>) -> Result<Solution<PhiElem<B>>> {
        if e.law() != self.law() {
            return Err(Error::LawMismatch("equation law differs from the backend law".into()));
        }
        let (w, c) = self.factor(e)?;
        let solved = run_sequenced(&w, &c)?;
        let starts: Vec<FreeElem> = (0..e.len()).map(|x| solved.eta(x)).collect();
        let keys = self.backend.keys_of(&solved, &starts)?;
        Ok(Solution::new(keys.into_iter().map(|k| self.normalized(k)).collect()))
    }

    /// The factorization `w: X → F(TX) ⊕ TC` of `e` through the coproduct of
    /// its parameter representatives.
    pub fn factor(&self, e: &FfgEquation<Phi<B>>) -> Result<(FfgEquation<Free>, FfgCoalgebra)> {
        let params: Vec<&PhiElem<B>> = e.step().iter().filter_map(|r| r.right()).collect();
        let (c, states) = self.gather(&params);
        let mut next = states.into_iter();
        let step = e
            .step()
            .iter()
            .map(|rhs| match rhs {
                Sum::Inl(n) => Sum::Inl(n.clone()),
                Sum::Inr(_) => Sum::Inr(next.next().expect("one state per parameter")),
                Sum::Pair(n, _) => Sum::Pair(n.clone(), next.next().expect("one state per parameter")),
            })
            .collect();
        let w = FfgEquation::new(self.law().clone(), e.vars().to_vec(), c.free(), step)?;
        Ok((w, c))
    }
}

/// The ffg-coalgebra `w □ c` on `X + C`.
pub fn run_sequenced(w: &FfgEquation<Free>, c: &FfgCoalgebra) -> Result<FfgCoalgebra> {
    let none = Free::new(c.variety(), Vec::new());
    let c_eq = coalgebra_as_equation(c, none)?;
    let wc = sequence(w, &c_eq)?;
    equation_as_coalgebra(&wc)
}

/// A coalgebra as an equation whose parameters are the initial algebra.
pub fn coalgebra_as_equation(c: &FfgCoalgebra, initial: Free) -> Result<FfgEquation<Free>> {
    let step = c.step().iter().map(|n| Sum::Inl(n.clone())).collect();
    FfgEquation::new(c.law().clone(), c.gens().to_vec(), initial, step)
}

/// Drops the parameter part of an equation over the initial algebra.
pub fn equation_as_coalgebra(e: &FfgEquation<Free>) -> Result<FfgCoalgebra> {
    if !e.params().is_empty() {
        return Err(Error::InvalidTerm("equation still has parameters".into()));
    }
    let step = e
        .step()
        .iter()
        .map(|rhs| match rhs {
            Sum::Inl(n) | Sum::Pair(n, _) => Ok(n.clone()),
            Sum::Inr(_) => Err(Error::InvalidTerm("the initial algebra has no elements".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    FfgCoalgebra::new(e.law().clone(), e.vars().to_vec(), step)
}

impl<B: Backend> Algebra for Phi<B> {
    type Elem = PhiElem<B>;

    fn variety(&self) -> Variety {
        self.law().variety()
    }

    fn eval(&self, t: &Term<PhiElem<B>>) -> PhiElem<B> {
        let support: Vec<&PhiElem<B>> = t.support().collect();
        let (c, states) = self.gather(&support);
        let mut by_class: Vec<(&PhiElem<B>, FreeElem)> = Vec::new();
        for (cls, s) in support.iter().zip(states) {
            by_class.push((cls, s));
        }
        let inner: Term<FreeElem> = t.map(|cls| {
            by_class
                .iter()
                .find(|(c, _)| c.same_rep(cls) && c.key == cls.key)
                .map(|(_, s)| s.clone())
                .expect("every class of the term was gathered")
        });
        let state = Term::flatten(&inner);
        let key = self
            .backend
            .key_of(&c, &state)
            .expect("backend accepts its own coalgebras");
        self.normalized(key)
    }
}

// ---------------------------------------------------------------------------
// Eventually periodic streams
// ---------------------------------------------------------------------------

/// A stream `prefix · period^ω` of natural numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EpStream {
    prefix: Vec<u64>,
    period: Vec<u64>,
}

impl EpStream {
    pub fn new(prefix: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidTerm("the period of a stream must be nonempty".into()));
        }
        Ok(EpStream { prefix, period })
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    pub fn nth(&self, i: usize) -> u64 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<u64> {
        (0..n).map(|i| self.nth(i)).collect()
    }

    /// The shortest presentation of the same stream: the period becomes its
    /// primitive root, then the prefix loses every trailing element that
    /// already belongs to the cycle.
    pub fn normalize(&self) -> EpStream {
        let n = self.period.len();
        let root = (1..=n)
            .find(|&d| n % d == 0 && (d..n).all(|i| self.period[i] == self.period[i - d]))
            .unwrap_or(n);
        let mut period = self.period[..root].to_vec();
        let mut prefix = self.prefix.clone();
        while prefix.last() == period.last() {
            prefix.pop();
            period.rotate_right(1);
        }
        EpStream { prefix, period }
    }

    /// The arithmetic mean of the period as an exact fraction.
    pub fn mean(&self) -> StreamKey {
        StreamKey(Ratio::new(self.period.iter().sum(), self.period.len() as u64))
    }

    /// A coalgebra with one generator per position generating this stream
    /// from its first generator.
    pub fn realize(&self) -> (FfgCoalgebra, FreeElem) {
        let k = self.prefix.len();
        let total = k + self.period.len();
        let step = (0..total)
            .map(|i| {
                let next = if i + 1 < total { i + 1 } else { k };
                FNode::new(0, vec![Term::Iter(self.nth(i), next)])
            })
            .collect();
        let gens = (0..total).map(|i| format!("s{i}")).collect();
        let c = FfgCoalgebra::new(StreamBackend::default().law.clone(), gens, step)
            .expect("positions form a valid coalgebra");
        (c, Term::Iter(0, 0))
    }
}

impl Display for EpStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "({})({})^w", join(&self.prefix), join(&self.period))
    }
}

impl FromStr for EpStream {
    type Err = Error;

    /// Parses `(1,2,7,4)(1,3,2)^w`; `^ω` is accepted as well and the prefix
    /// may be `()`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::parse(1, 1, format!("stream literal `{s}`: {m}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact
            .strip_suffix("^w")
            .or_else(|| compact.strip_suffix("^ω"))
            .ok_or_else(|| bad("missing `^w`"))?;
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| bad("expected `(prefix)(period)^w`"))?;
        let parse_list = |g: &str| -> Result<Vec<u64>> {
            if g.is_empty() {
                return Ok(Vec::new());
            }
            g.split(',')
                .map(|x| x.parse::<u64>().map_err(|_| bad("expected natural numbers")))
                .collect()
        };
        let parts: Vec<&str> = inner.split(")(").collect();
        let (prefix, period) = match parts.as_slice() {
            [period] => (Vec::new(), parse_list(period)?),
            [prefix, period] => (parse_list(prefix)?, parse_list(period)?),
            _ => return Err(bad("expected `(prefix)(period)^w`")),
        };
        EpStream::new(prefix, period).map_err(|_| bad("empty period"))
    }
}

/// The sides `q·Σ period(s)` and `p·Σ period(t)` of the mean comparison,
/// where `p` and `q` are the period lengths of `s` and `t`.
pub fn ep_sides(s: &EpStream, t: &EpStream) -> (u64, u64) {
    let p = s.period.len() as u64;
    let q = t.period.len() as u64;
    (q * s.period.iter().sum::<u64>(), p * t.period.iter().sum::<u64>())
}

/// Two eventually periodic streams are identified iff their periods have
/// the same mean.
pub fn ep_equiv(s: &EpStream, t: &EpStream) -> bool {
    let (l, r) = ep_sides(s, t);
    l == r
}

/// A reduced nonnegative fraction, printed as `a/b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StreamKey(pub Ratio<u64>);

impl StreamKey {
    pub fn new(numer: u64, denom: u64) -> Self {
        StreamKey(Ratio::new(numer, denom))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn floor(&self) -> u64 {
        self.numer() / self.denom()
    }
}

impl Display for StreamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for StreamKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse(1, 1, format!("`{s}` is not a fraction a/b"));
        let (a, b) = match s.trim().split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let a: u64 = a.parse().map_err(|_| bad())?;
        let b: u64 = b.parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        Ok(StreamKey::new(a, b))
    }
}

impl Serialize for StreamKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Mean-equivalence classes of eventually periodic streams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamBackend {
    law: Law,
}

impl Default for StreamBackend {
    fn default() -> Self {
        StreamBackend {
            law: builtin_law(Variety::Unary, Shape::Id).expect("builtin law"),
        }
    }
}

/// One simulated step: the increment emitted and the next generator.
fn stream_step(c: &FfgCoalgebra, x: usize) -> (u64, usize) {
    match &c.step()[x].children[0] {
        Term::Iter(d, y) => (*d, *y),
        other => unreachable!("unary coalgebra with {} child", other.variety()),
    }
}

fn check_stream_coalgebra(c: &FfgCoalgebra) -> Result<()> {
    if c.law() != &StreamBackend::default().law {
        return Err(Error::LawMismatch(format!(
            "stream backend needs {} over ID, got {} over {}",
            Variety::Unary,
            c.variety(),
            c.shape()
        )));
    }
    Ok(())
}

fn unary_state(t: &FreeElem) -> Result<(u64, usize)> {
    match t {
        Term::Iter(m, x) => Ok((*m, *x)),
        other => Err(Error::VarietyMismatch {
            expected: Variety::Unary,
            found: other.variety(),
        }),
    }
}

/// The stream of increments generated by `(m, x)`; the counter `m` does not
/// contribute.
pub fn stream_of(c: &FfgCoalgebra, t: &FreeElem) -> Result<EpStream> {
    check_stream_coalgebra(c)?;
    let (_, x) = unary_state(t)?;
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut outputs = Vec::new();
    let mut cur = x;
    while let std::collections::hash_map::Entry::Vacant(v) = seen.entry(cur) {
        v.insert(outputs.len());
        let (d, next) = stream_step(c, cur);
        outputs.push(d);
        cur = next;
    }
    let k = seen[&cur];
    let period = outputs.split_off(k);
    Ok(EpStream::new(outputs, period)?.normalize())
}

impl Backend for StreamBackend {
    type Key = StreamKey;

    fn law(&self) -> &Law {
        &self.law
    }

    fn key_of(&self, c: &FfgCoalgebra, t: &FreeElem) -> Result<StreamKey> {
        Ok(stream_of(c, t)?.mean())
    }

    fn canonical(&self, key: &StreamKey) -> Representative {
        let (coalgebra, state) = realize_mean(key.numer(), key.denom());
        Representative { coalgebra, state }
    }
}

/// A `b`-cycle whose increments sum to `a`, so its mean is `a/b`.
pub fn realize_mean(a: u64, b: u64) -> (FfgCoalgebra, FreeElem) {
    assert!(b > 0, "the period of a stream is nonempty");
    let b = b as usize;
    let step = (0..b)
        .map(|i| FNode::new(0, vec![Term::Iter(if i == 0 { a } else { 0 }, (i + 1) % b)]))
        .collect();
    let gens = (0..b).map(|i| format!("z{i}")).collect();
    let c = FfgCoalgebra::new(StreamBackend::default().law, gens, step).expect("cycle is valid");
    (c, Term::Iter(0, 0))
}

pub type StreamPhi = Phi<StreamBackend>;

impl Phi<StreamBackend> {
    pub fn streams() -> Self {
        Phi::new(StreamBackend::default())
    }

    /// The class whose period mean is `a/b`.
    pub fn mean(&self, a: u64, b: u64) -> PhiClass<StreamKey> {
        self.from_key(StreamKey::new(a, b))
    }
}

/// A coalgebra `Z` and homomorphisms into both sides whose images of the
/// first generator are the two given states.
#[derive(Clone, Debug)]
pub struct StreamZigZag {
    pub apex: FfgCoalgebra,
    pub left: Vec<FreeElem>,
    pub right: Vec<FreeElem>,
    pub prefix_len: usize,
    pub period_len: usize,
}

impl StreamZigZag {
    /// Both legs checked as coalgebra homomorphisms.
    pub fn verify(&self, cx: &FfgCoalgebra, cy: &FfgCoalgebra) -> Result<(), HomViolation> {
        is_coalg_hom(&self.apex, cx, &self.left)?;
        is_coalg_hom(&self.apex, cy, &self.right)
    }
}

/// Builds the apex `Z = {z₀, …, z_{k+p-1}}` connecting `(m, x)` and `(n, y)`
/// when their streams are mean-equivalent; `k` and `p` come from the first
/// repetition of the joint orbit.
pub fn zigzag_witness(
    cx: &FfgCoalgebra,
    sx: &FreeElem,
    cy: &FfgCoalgebra,
    sy: &FreeElem,
) -> Result<Option<StreamZigZag>> {
    check_stream_coalgebra(cx)?;
    check_stream_coalgebra(cy)?;
    if !ep_equiv(&stream_of(cx, sx)?, &stream_of(cy, sy)?) {
        return Ok(None);
    }
    let (m0, x0) = unary_state(sx)?;
    let (n0, y0) = unary_state(sy)?;
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut orbit: Vec<(u64, usize, u64, usize)> = Vec::new();
    let (mut m, mut x, mut n, mut y) = (m0, x0, n0, y0);
    while let std::collections::hash_map::Entry::Vacant(v) = seen.entry((x, y)) {
        v.insert(orbit.len());
        orbit.push((m, x, n, y));
        let (dx, x1) = stream_step(cx, x);
        let (dy, y1) = stream_step(cy, y);
        m += dx;
        n += dy;
        x = x1;
        y = y1;
    }
    let k = seen[&(x, y)];
    let len = orbit.len();
    let (mk, _, nk, _) = orbit[k];
    let (loop_x, loop_y) = (m - mk, n - nk);
    if loop_x != loop_y {
        return Err(Error::Unsupported(format!(
            "joint period sums differ ({loop_x} vs {loop_y}) although the means agree"
        )));
    }
    let step = (0..len)
        .map(|j| {
            if j + 1 < len {
                FNode::new(0, vec![Term::Iter(0, j + 1)])
            } else {
                FNode::new(0, vec![Term::Iter(loop_x, k)])
            }
        })
        .collect();
    let gens = (0..len).map(|j| format!("z{j}")).collect();
    let apex = FfgCoalgebra::new(cx.law().clone(), gens, step)?;
    let left = orbit.iter().map(|&(m, x, _, _)| Term::Iter(m, x)).collect();
    let right = orbit.iter().map(|&(_, _, n, y)| Term::Iter(n, y)).collect();
    Ok(Some(StreamZigZag {
        apex,
        left,
        right,
        prefix_len: k,
        period_len: len - k,
    }))
}

// ---------------------------------------------------------------------------
// Bisimilarity backend
// ---------------------------------------------------------------------------

/// Canonical minimal machine: state 0 is the start, states are numbered in
/// breadth-first order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineKey(pub Vec<FNode<usize>>);

impl Display for MachineKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let states: Vec<String> = self
            .0
            .iter()
            .map(|n| {
                let kids: Vec<String> = n.children.iter().map(usize::to_string).collect();
                format!("{}>{}", n.label, kids.join(","))
            })
            .collect();
        write!(f, "[{}]", states.join(" | "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimBackend {
    law: Law,
}

impl BisimBackend {
    /// Requires `JSL` over a Moore shape with an output lattice.
    pub fn new(law: Law) -> Result<Self> {
        match (law.variety(), law.shape()) {
            (Variety::Jsl, Shape::Moore(_)) => Ok(BisimBackend { law }),
            (v, s) => Err(Error::UnsupportedLaw {
                variety: v,
                shape: format!("{s} (bisimilarity backend)"),
            }),
        }
    }

    /// Binary outputs over the first `letters` letters of the alphabet.
    pub fn binary(letters: usize) -> Self {
        BisimBackend::new(builtin_law(Variety::Jsl, Shape::Moore(Moore::binary(letters))).expect("builtin law"))
            .expect("JSL over Moore")
    }

    /// The backend for `F(−) + TY`: outputs become pairs of an output and a
    /// subset of `Y`, with label index `o · 2^|Y| + mask`.
    pub fn with_parameters(&self, ys: &[String]) -> Result<Self> {
        let Shape::Moore(m) = self.law.shape() else {
            unreachable!("checked at construction")
        };
        let lattice = m.lattice().expect("JSL Moore shapes carry a lattice");
        let product = lattice.product(&FiniteAlgebra::powerset(ys)?)?;
        let shape = Shape::Moore(Moore::with_lattice(product, m.alphabet().to_vec())?);
        BisimBackend::new(builtin_law(Variety::Jsl, shape)?)
    }

    pub fn moore(&self) -> &Moore {
        match self.law.shape() {
            Shape::Moore(m) => m,
            _ => unreachable!("checked at construction"),
        }
    }
}

impl Backend for BisimBackend {
    type Key = MachineKey;

    fn law(&self) -> &Law {
        &self.law
    }

    fn key_of(&self, c: &FfgCoalgebra, t: &FreeElem) -> Result<MachineKey> {
        let (machine, index) = reachable(c, std::slice::from_ref(t))?;
        Ok(MachineKey(machine.minimize_from(index[t])))
    }

    /// One exploration and one refinement for all states.
    fn keys_of(&self, c: &FfgCoalgebra, ts: &[FreeElem]) -> Result<Vec<MachineKey>> {
        let (machine, index) = reachable(c, ts)?;
        let blocks = machine.partition();
        Ok(ts
            .iter()
            .map(|t| MachineKey(machine.minimize_with(&blocks, index[t])))
            .collect())
    }

    /// The minimal machine itself, with singleton successors.
    fn canonical(&self, key: &MachineKey) -> Representative {
        let step = key
            .0
            .iter()
            .map(|n| n.map(|&s| Variety::Jsl.unit(s)))
            .collect();
        let gens = (0..key.0.len()).map(|i| format!("m{i}")).collect();
        let coalgebra = FfgCoalgebra::new(self.law.clone(), gens, step).expect("minimal machine is valid");
        Representative {
            coalgebra,
            state: Variety::Jsl.unit(0),
        }
    }
}

pub type BisimPhi = Phi<BisimBackend>;

/// A regular language as its minimal automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub machine: MachineKey,
    pub alphabet: Vec<String>,
}

impl Language {
    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut s = 0;
        for &a in word {
            s = self.machine.0[s].children[a];
        }
        self.machine.0[s].label == 1
    }

    pub fn is_empty(&self) -> bool {
        self.machine.0.iter().all(|n| n.label == 0)
    }

    /// Accepted words up to `max_len`, in length-lexicographic order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<usize>> {
        let k = self.alphabet.len();
        let mut out = Vec::new();
        let mut layer = vec![Vec::new()];
        for len in 0..=max_len {
            out.extend(layer.iter().filter(|w| self.accepts(w)).cloned());
            if len < max_len {
                layer = layer
                    .into_iter()
                    .flat_map(|w| {
                        (0..k).map(move |a| {
                            let mut w = w.clone();
                            w.push(a);
                            w
                        })
                    })
                    .collect();
            }
        }
        out
    }

    pub fn show_word(&self, w: &[usize]) -> String {
        if w.is_empty() {
            "ε".into()
        } else {
            w.iter().map(|&a| self.alphabet[a].as_str()).collect()
        }
    }
}

impl Phi<BisimBackend> {
    /// The language of a class; outputs must be `{0, 1}`.
    pub fn language_of(&self, cls: &PhiClass<MachineKey>) -> Result<Language> {
        let m = self.backend.moore();
        if m.outputs() != ["0", "1"] {
            return Err(Error::Unsupported(format!(
                "languages need outputs {{0,1}}, found {{{}}}",
                m.outputs().join(",")
            )));
        }
        Ok(Language {
            machine: cls.key.clone(),
            alphabet: m.alphabet().to_vec(),
        })
    }

    /// The class of the one-generator coalgebra that outputs `y` and then
    /// stops (parameterized backends only).
    pub fn free_unit(&self, ys: usize, y: usize) -> Result<PhiClass<MachineKey>> {
        let m = self.backend.moore();
        let lattice = m.lattice().expect("JSL Moore shapes carry a lattice");
        if y >= ys || lattice.len() % (1 << ys) != 0 {
            return Err(Error::Unsupported("backend is not parameterized by that many generators".into()));
        }
        let base_bottom = lattice.bottom() >> ys;
        let label = (base_bottom << ys) + (1 << y);
        let node = FNode::new(label, vec![Term::Join(Default::default()); m.alphabet().len()]);
        let c = FfgCoalgebra::new(self.law().clone(), vec!["η".into()], vec![node])?;
        self.class_of(&c, &c.eta(0))
    }
}

/// Rational `a/b` with `gcd(a, b) = 1`.
pub fn is_reduced(a: u64, b: u64) -> bool {
    b > 0 && a.gcd(&b) == 1
}
