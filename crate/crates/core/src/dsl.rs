//! Line-oriented text syntax for coalgebras and equations.
//!
//! ```text
//! # coalgebra: one line per generator
//! p -> out 0 via a:{p,q} b:{}
//! x -> +1 x
//! # equations
//! param P = (1)(2)^w
//! x = F[out 0; a:{x,y}]
//! y = F[next +2 x] + param P
//! z = param 3/2
//! w = eff {2}( next x )
//! ```
//!
//! Children are terms over the generators: `x`, `+n x` (unary), `{x,y}`
//! (semilattice). Parameters are opaque text handed to a resolver; names
//! bound by `param NAME = ...` are substituted first.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::coalgebra::FfgCoalgebra;
use crate::equation::{from_effectful, EffectfulRhs, FfgEquation, Rhs};
use crate::error::{Error, Result};
use crate::functor::{DistributiveLaw, FNode, Law, Shape};
use crate::phi::{EpStream, Phi, PhiElem, StreamBackend, StreamKey};
use crate::variety::{display_term, Algebra, Free, FreeElem, Sum, Term, Variety};

const SPECIAL: &[char] = &['{', '}', '[', ']', '(', ')', ',', ';', ':', '=', '+', '#'];

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    offset: usize,
}

impl Cursor {
    fn new(src: &str, line: usize, offset: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            offset,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.line, self.offset + self.pos + 1, msg))
    }

    fn ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.chars.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        matches!(self.peek(), None | Some('#'))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of line".to_string(), |c| format!("`{c}`"));
            self.err(format!("expected `{c}`, found {found}"))
        }
    }

    fn word(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| !c.is_whitespace() && !SPECIAL.contains(c) && !(*c == '-' && self.chars.get(self.pos + 1) == Some(&'>')))
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.word() {
            Some(w) => Ok(w),
            None => self.err(format!("expected {what}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        let save = self.pos;
        if self.word().as_deref() == Some(kw) {
            true
        } else {
            self.pos = save;
            false
        }
    }

    fn number(&mut self) -> Result<u64> {
        let w = self.name("a natural number")?;
        match w.parse() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos -= w.chars().count();
                self.err(format!("`{w}` is not a natural number"))
            }
        }
    }

    fn column(&mut self) -> usize {
        self.ws();
        self.offset + self.pos + 1
    }

    fn rest(&mut self) -> String {
        self.ws();
        let s: String = self.chars[self.pos..].iter().collect();
        self.pos = self.chars.len();
        match s.find('#') {
            Some(i) => s[..i].trim_end().to_string(),
            None => s.trim_end().to_string(),
        }
    }

    fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            let rest: String = self.chars[self.pos..].iter().collect();
            self.err(format!("unexpected `{}`", rest.trim()))
        }
    }
}

fn lookup(cur: &Cursor, names: &[String], name: &str) -> Result<usize> {
    match names.iter().position(|n| n == name) {
        Some(i) => Ok(i),
        None => {
            let column = cur.offset + cur.pos - name.chars().count() + 1;
            Err(Error::parse(cur.line, column, format!("unknown generator `{name}`")))
        }
    }
}

fn parse_term_at(cur: &mut Cursor, variety: Variety, names: &[String]) -> Result<FreeElem> {
    if cur.peek() == Some('{') {
        if variety != Variety::Jsl {
            return cur.err(format!("sets of generators need JSL, not {variety}"));
        }
        cur.pos += 1;
        let mut items = BTreeSet::new();
        if !cur.eat('}') {
            loop {
                let n = cur.name("a generator")?;
                items.insert(lookup(cur, names, &n)?);
                if cur.eat('}') {
                    break;
                }
                cur.expect(',')?;
            }
        }
        return Ok(Term::Join(items));
    }
    if cur.peek() == Some('+') {
        if variety != Variety::Unary {
            return cur.err(format!("counters need UNARY, not {variety}"));
        }
        cur.pos += 1;
        let k = cur.number()?;
        let n = cur.name("a generator")?;
        return Ok(Term::Iter(k, lookup(cur, names, &n)?));
    }
    let n = cur.name("a generator")?;
    Ok(variety.unit(lookup(cur, names, &n)?))
}

/// Parses a term over `names` such as `x`, `+2 x` or `{x,y}`.
pub fn parse_term(src: &str, variety: Variety, names: &[String]) -> Result<FreeElem> {
    let mut cur = Cursor::new(src, 1, 0);
    let t = parse_term_at(&mut cur, variety, names)?;
    cur.finish()?;
    Ok(t)
}

/// Layer syntax. Moore: `out o via a:t b:t` (coalgebras) or `out o; a:t`
/// (equations); letters left out default to `{}` under JSL. Identity:
/// `[(k)] [next] t`. Polynomial: `op(t, …)` or `op`.
fn parse_node<X: Clone>(
    cur: &mut Cursor,
    law: &Law,
    mut child: impl FnMut(&mut Cursor, u64) -> Result<X>,
    empty: Option<X>,
) -> Result<FNode<X>> {
    let shape = law.shape();
    match shape {
        Shape::Moore(m) => {
            if !cur.keyword("out") {
                return cur.err("expected `out`");
            }
            let o = cur.name("an output")?;
            let Some(label) = shape.label_index(&o) else {
                return cur.err(format!("unknown output `{o}`"));
            };
            let _ = cur.eat(';') || cur.keyword("via");
            let mut children: Vec<Option<X>> = vec![None; m.alphabet().len()];
            while !cur.at_end() && cur.peek() != Some(']') {
                let a = cur.name("a letter")?;
                let Some(i) = m.alphabet().iter().position(|l| *l == a) else {
                    return cur.err(format!("unknown letter `{a}`"));
                };
                cur.expect(':')?;
                if children[i].is_some() {
                    return cur.err(format!("letter `{a}` given twice"));
                }
                children[i] = Some(child(cur, 0)?);
                let _ = cur.eat(';') || cur.eat(',');
            }
            let mut out = Vec::with_capacity(children.len());
            for (i, c) in children.into_iter().enumerate() {
                match c.or_else(|| empty.clone()) {
                    Some(c) => out.push(c),
                    None => return cur.err(format!("no successor for letter `{}`", m.alphabet()[i])),
                }
            }
            Ok(FNode::new(label, out))
        }
        Shape::Id => {
            let mut k = 0;
            if cur.eat('(') {
                k = cur.number()?;
                cur.expect(')')?;
            }
            cur.keyword("next");
            Ok(FNode::new(0, vec![child(cur, k)?]))
        }
        Shape::Poly(_) => {
            let op = cur.name("an operation")?;
            let Some(label) = shape.label_index(&op) else {
                return cur.err(format!("unknown operation `{op}`"));
            };
            let mut children = Vec::new();
            if cur.eat('(') && !cur.eat(')') {
                loop {
                    children.push(child(cur, 0)?);
                    if cur.eat(')') {
                        break;
                    }
                    cur.expect(',')?;
                }
            }
            if children.len() != shape.arity(label) {
                return cur.err(format!("`{op}` takes {} arguments", shape.arity(label)));
            }
            Ok(FNode::new(label, children))
        }
    }
}

fn term_child(variety: Variety, names: &[String]) -> impl FnMut(&mut Cursor, u64) -> Result<FreeElem> + '_ {
    move |cur, k| {
        let t = parse_term_at(cur, variety, names)?;
        match (k, t) {
            (0, t) => Ok(t),
            (k, Term::Iter(n, x)) => Ok(Term::Iter(n + k, x)),
            (_, _) => cur.err(format!("counters need UNARY, not {variety}")),
        }
    }
}

fn empty_child(variety: Variety) -> Option<FreeElem> {
    (variety == Variety::Jsl).then(|| Term::Join(BTreeSet::new()))
}

/// Prints a layer in coalgebra syntax (`via`) or equation syntax (`;`).
pub fn format_node<X>(shape: &Shape, node: &FNode<X>, mut child: impl FnMut(&X) -> String, via: bool) -> String {
    let children: Vec<String> = node.children.iter().map(&mut child).collect();
    match shape {
        Shape::Moore(m) => {
            let letters: Vec<String> = m
                .alphabet()
                .iter()
                .zip(&children)
                .map(|(a, c)| format!("{a}:{c}"))
                .collect();
            let sep = if via { " via" } else { ";" };
            format!("out {}{sep} {}", shape.label_name(node.label), letters.join(" "))
        }
        Shape::Id if via => children[0].clone(),
        Shape::Id => format!("next {}", children[0]),
        Shape::Poly(_) if children.is_empty() => shape.label_name(node.label).to_string(),
        Shape::Poly(_) => format!("{}({})", shape.label_name(node.label), children.join(", ")),
    }
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

fn lines(src: &str) -> impl Iterator<Item = Line<'_>> {
    src.lines().enumerate().filter_map(|(i, text)| {
        let t = text.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some(Line { number: i + 1, text })
    })
}

fn split_lhs(line: &Line, arrow: &str) -> Option<(String, Cursor)> {
    let i = line.text.find(arrow)?;
    let lhs = line.text[..i].trim();
    if lhs.is_empty() || lhs.starts_with("param ") || lhs.chars().any(|c| c.is_whitespace()) {
        return None;
    }
    let start = i + arrow.len();
    let col = line.text[..start].chars().count();
    Some((lhs.to_string(), Cursor::new(&line.text[start..], line.number, col)))
}

fn is_transition(line: &Line) -> bool {
    let arrow = line.text.find("->");
    let eq = line.text.find('=');
    match (arrow, eq) {
        (Some(a), Some(e)) => a < e,
        (Some(_), None) => true,
        _ => false,
    }
}

fn duplicate(names: &[String], line: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::parse(line, 1, format!("`{n}` defined twice")));
        }
    }
    Ok(())
}

fn parse_transitions(law: &Law, ls: &[Line]) -> Result<FfgCoalgebra> {
    let mut gens = Vec::new();
    for l in ls {
        let (lhs, _) = split_lhs(l, "->").ok_or_else(|| Error::parse(l.number, 1, "expected `name -> layer`"))?;
        gens.push(lhs);
        duplicate(&gens, l.number)?;
    }
    let variety = law.variety();
    let mut step = Vec::new();
    for l in ls {
        let (_, mut cur) = split_lhs(l, "->").expect("checked above");
        let node = parse_node(&mut cur, law, term_child(variety, &gens), empty_child(variety))?;
        cur.finish()?;
        step.push(node);
    }
    FfgCoalgebra::new(law.clone(), gens, step)
}

/// Parses one `name -> layer` line per generator.
pub fn parse_coalgebra(src: &str, law: &Law) -> Result<FfgCoalgebra> {
    let ls: Vec<Line> = lines(src).collect();
    if let Some(l) = ls.iter().find(|l| !is_transition(l)) {
        return Err(Error::parse(l.number, 1, "expected `name -> layer`"));
    }
    parse_transitions(law, &ls)
}

/// Prints a coalgebra so that [`parse_coalgebra`] reads it back.
pub fn format_coalgebra(c: &FfgCoalgebra) -> String {
    c.step()
        .iter()
        .zip(c.gens())
        .map(|(node, g)| format!("{g} -> {}\n", format_node(c.shape(), node, |t| c.display(t), true)))
        .collect()
}

/// A parameter occurrence: its text (after substituting named
/// definitions) and where it was written.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamText {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsSyntax {
    Node(FNode<FreeElem>),
    Param(ParamText),
    NodeParam(FNode<FreeElem>, ParamText),
    Effect(EffectfulRhs<ParamText>),
}

/// A parsed equation document whose parameters are not yet interpreted.
#[derive(Clone, Debug)]
pub struct EquationSource {
    pub law: Law,
    pub vars: Vec<String>,
    pub rhs: Vec<RhsSyntax>,
    /// Coalgebra lines in the same document, for parameters that name
    /// its states.
    pub coalgebra: Option<FfgCoalgebra>,
}

fn param_text(cur: &mut Cursor, defs: &BTreeMap<String, String>, to_end: bool) -> Result<ParamText> {
    let line = cur.line;
    let column = cur.column();
    let raw = if to_end { cur.rest() } else { cur.name("a parameter")? };
    if raw.is_empty() {
        return cur.err("expected a parameter");
    }
    let text = defs.get(&raw).cloned().unwrap_or(raw);
    Ok(ParamText { text, line, column })
}

fn parse_rhs(cur: &mut Cursor, law: &Law, vars: &[String], defs: &BTreeMap<String, String>) -> Result<RhsSyntax> {
    let variety = law.variety();
    if cur.keyword("param") {
        return Ok(RhsSyntax::Param(param_text(cur, defs, true)?));
    }
    if cur.keyword("eff") {
        let t = parse_effect(cur, law, vars, defs)?;
        cur.finish()?;
        return Ok(RhsSyntax::Effect(t));
    }
    if !cur.keyword("F") {
        return cur.err("expected `F[...]`, `param` or `eff`");
    }
    cur.expect('[')?;
    let node = parse_node(cur, law, term_child(variety, vars), empty_child(variety))?;
    cur.expect(']')?;
    if cur.eat('+') {
        if !cur.keyword("param") {
            return cur.err("expected `param` after `+`");
        }
        let p = param_text(cur, defs, true)?;
        if variety != Variety::Jsl {
            return Err(Error::parse(p.line, p.column, format!("`F[..] + param` needs JSL, not {variety}")));
        }
        return Ok(RhsSyntax::NodeParam(node, p));
    }
    cur.finish()?;
    Ok(RhsSyntax::Node(node))
}

fn parse_effect_item(
    cur: &mut Cursor,
    law: &Law,
    vars: &[String],
    defs: &BTreeMap<String, String>,
) -> Result<Sum<FNode<usize>, ParamText>> {
    if cur.keyword("param") {
        return Ok(Sum::Inr(param_text(cur, defs, false)?));
    }
    let var_child = |cur: &mut Cursor, k: u64| -> Result<usize> {
        if k != 0 {
            return cur.err("counters go outside the effect body");
        }
        let n = cur.name("a variable")?;
        lookup(cur, vars, &n)
    };
    let bracket = cur.keyword("F");
    if bracket {
        cur.expect('[')?;
    }
    let node = parse_node(cur, law, var_child, None)?;
    if bracket {
        cur.expect(']')?;
    }
    Ok(Sum::Inl(node))
}

/// `eff {k}( item )` (UNARY), `eff { item, … }` (JSL), `eff ( item )` (SET),
/// with items `next x`, `F[...]` over variables, or `param P`.
fn parse_effect(
    cur: &mut Cursor,
    law: &Law,
    vars: &[String],
    defs: &BTreeMap<String, String>,
) -> Result<EffectfulRhs<ParamText>> {
    match law.variety() {
        Variety::Unary => {
            cur.expect('{')?;
            let k = cur.number()?;
            cur.expect('}')?;
            cur.expect('(')?;
            let item = parse_effect_item(cur, law, vars, defs)?;
            cur.expect(')')?;
            Ok(Term::Iter(k, item))
        }
        Variety::Jsl => {
            cur.expect('{')?;
            let mut items = BTreeSet::new();
            if !cur.eat('}') {
                loop {
                    items.insert(parse_effect_item(cur, law, vars, defs)?);
                    if cur.eat('}') {
                        break;
                    }
                    cur.expect(',')?;
                }
            }
            Ok(Term::Join(items))
        }
        Variety::Set => {
            cur.expect('(')?;
            let item = parse_effect_item(cur, law, vars, defs)?;
            cur.expect(')')?;
            Ok(Term::Var(item))
        }
    }
}

/// Parses equation lines `x = ...`, `param NAME = ...` definitions and
/// optional coalgebra lines.
pub fn parse_equation_source(src: &str, law: &Law) -> Result<EquationSource> {
    let mut defs = BTreeMap::new();
    let mut transitions = Vec::new();
    let mut eqs = Vec::new();
    for l in lines(src) {
        let t = l.text.trim_start();
        if let Some(def) = t.strip_prefix("param ") {
            let Some((name, value)) = def.split_once('=') else {
                return Err(Error::parse(l.number, 1, "expected `param NAME = value`"));
            };
            let value = value.split('#').next().unwrap_or("").trim();
            if value.is_empty() {
                return Err(Error::parse(l.number, 1, "empty parameter definition"));
            }
            if defs.insert(name.trim().to_string(), value.to_string()).is_some() {
                return Err(Error::parse(l.number, 1, format!("parameter `{}` defined twice", name.trim())));
            }
        } else if is_transition(&l) {
            transitions.push(l);
        } else {
            eqs.push(l);
        }
    }
    let mut vars = Vec::new();
    for l in &eqs {
        let (lhs, _) = split_lhs(l, "=").ok_or_else(|| Error::parse(l.number, 1, "expected `name = right-hand side`"))?;
        vars.push(lhs);
        duplicate(&vars, l.number)?;
    }
    let mut rhs = Vec::new();
    for l in &eqs {
        let (_, mut cur) = split_lhs(l, "=").expect("checked above");
        rhs.push(parse_rhs(&mut cur, law, &vars, &defs)?);
    }
    let coalgebra = if transitions.is_empty() {
        None
    } else {
        Some(parse_transitions(law, &transitions)?)
    };
    Ok(EquationSource {
        law: law.clone(),
        vars,
        rhs,
        coalgebra,
    })
}

impl EquationSource {
    /// Interprets the parameters in `target`; resolver messages are
    /// reported at the parameter's position.
    pub fn build<A: Algebra + Clone>(
        &self,
        target: A,
        mut resolve: impl FnMut(&str) -> std::result::Result<A::Elem, String>,
    ) -> Result<FfgEquation<A>> {
        let mut res = |p: &ParamText| resolve(&p.text).map_err(|m| Error::parse(p.line, p.column, m));
        let effectful = self.rhs.iter().any(|r| matches!(r, RhsSyntax::Effect(_)));
        if effectful {
            let mut e0 = Vec::new();
            for r in &self.rhs {
                e0.push(match r {
                    RhsSyntax::Effect(t) => t.try_map(|s| -> Result<_> {
                        Ok(match s {
                            Sum::Inl(n) => Sum::Inl(n.clone()),
                            Sum::Inr(p) => Sum::Inr(res(p)?),
                            Sum::Pair(..) => unreachable!("effect items are never pairs"),
                        })
                    })?,
                    _ => {
                        return Err(Error::Unsupported(
                            "mixing `eff` lines with other right-hand sides".into(),
                        ))
                    }
                });
            }
            return from_effectful(&self.law, self.vars.clone(), target, &e0);
        }
        let mut step: Vec<Rhs<A::Elem>> = Vec::new();
        for r in &self.rhs {
            step.push(match r {
                RhsSyntax::Node(n) => Sum::Inl(n.clone()),
                RhsSyntax::Param(p) => Sum::Inr(res(p)?),
                RhsSyntax::NodeParam(n, p) => Sum::Pair(n.clone(), res(p)?),
                RhsSyntax::Effect(_) => unreachable!("handled above"),
            });
        }
        FfgEquation::new(self.law.clone(), self.vars.clone(), target, step)
    }
}

/// Parses an equation whose parameters are terms over `params`' generators.
pub fn parse_free_equation(src: &str, law: &Law, params: Free) -> Result<FfgEquation<Free>> {
    let source = parse_equation_source(src, law)?;
    let variety = law.variety();
    let gens = params.gens().to_vec();
    source.build(params, |text| parse_term(text, variety, &gens).map_err(|e| e.to_string()))
}

/// Prints an equation so that the parsers read it back, given a printer
/// for parameters.
pub fn format_equation<A: Algebra + Clone>(e: &FfgEquation<A>, mut param: impl FnMut(&A::Elem) -> String) -> String {
    let shape = e.law().shape();
    let show = |t: &FreeElem| display_term(t, |g| e.vars()[*g].clone());
    let mut out = String::new();
    for (x, rhs) in e.step().iter().enumerate() {
        let line = match rhs {
            Sum::Inl(n) => format!("F[{}]", format_node(shape, n, show, false)),
            Sum::Inr(a) => format!("param {}", param(a)),
            Sum::Pair(n, a) if *a == e.params().bottom() => format!("F[{}]", format_node(shape, n, show, false)),
            Sum::Pair(n, a) => format!("F[{}] + param {}", format_node(shape, n, show, false), param(a)),
        };
        out.push_str(&format!("{} = {line}\n", e.vars()[x]));
    }
    out
}

/// Stream parameters: an eventually periodic literal `(..)(..)^w` or a
/// mean `a/b`.
pub fn resolve_stream(phi: &Phi<StreamBackend>, text: &str) -> std::result::Result<PhiElem<StreamBackend>, String> {
    if text.trim_start().starts_with('(') {
        let s: EpStream = text.parse().map_err(|e: Error| e.to_string())?;
        let (c, t) = s.realize();
        phi.class_of(&c, &t).map_err(|e| e.to_string())
    } else {
        let k: StreamKey = text.parse().map_err(|e: Error| e.to_string())?;
        Ok(phi.from_key(k))
    }
}

/// Parameters that name states (terms) of the document's coalgebra.
pub fn resolve_state<B: crate::phi::Backend>(
    phi: &Phi<B>,
    coalgebra: Option<&FfgCoalgebra>,
    text: &str,
) -> std::result::Result<PhiElem<B>, String> {
    let c = coalgebra.ok_or_else(|| format!("parameter `{text}` names a state, but the document has no coalgebra lines"))?;
    let t = parse_term(text, c.variety(), c.gens()).map_err(|e| e.to_string())?;
    phi.class_of(c, &t).map_err(|e| e.to_string())
}

/// `{"variety", "shape", "gens", "step": [{"label", "children"}]}`.
pub fn coalgebra_to_json(c: &FfgCoalgebra) -> Value {
    let free = c.free();
    let step: Vec<Value> = c
        .step()
        .iter()
        .map(|n| {
            json!({
                "label": c.shape().label_name(n.label),
                "children": n.children.iter().map(|t| free.to_json(t)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "variety": c.variety(),
        "shape": c.shape().to_json(),
        "gens": c.gens(),
        "step": step,
    })
}

pub fn coalgebra_from_json(v: &Value) -> Result<FfgCoalgebra> {
    let bad = |m: &str| Error::parse(1, 1, format!("coalgebra JSON: {m}"));
    let variety: Variety = serde_json::from_value(v["variety"].clone()).map_err(|_| bad("bad `variety`"))?;
    let shape = Shape::from_json(&v["shape"])?;
    let law = crate::functor::builtin_law(variety, shape)?;
    let gens: Vec<String> = serde_json::from_value(v["gens"].clone()).map_err(|_| bad("bad `gens`"))?;
    let free = Free::new(variety, gens.clone());
    let steps = v["step"].as_array().ok_or_else(|| bad("missing `step`"))?;
    let mut step = Vec::new();
    for s in steps {
        let label_name = s["label"].as_str().ok_or_else(|| bad("missing `label`"))?;
        let label = law
            .shape()
            .label_index(label_name)
            .ok_or_else(|| bad(&format!("unknown label `{label_name}`")))?;
        let children = s["children"]
            .as_array()
            .ok_or_else(|| bad("missing `children`"))?
            .iter()
            .map(|c| free.from_json(c))
            .collect::<Result<Vec<_>>>()?;
        step.push(FNode::new(label, children));
    }
    FfgCoalgebra::new(law, gens, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::{builtin_law, Moore};
    use crate::phi::StreamPhi;

    fn nfa_law() -> Law {
        builtin_law(Variety::Jsl, Shape::Moore(Moore::binary(2))).unwrap()
    }

    fn stream_law() -> Law {
        builtin_law(Variety::Unary, Shape::Id).unwrap()
    }

    #[test]
    fn coalgebra_round_trip() {
        let src = "p -> out 0 via a:{p,q} b:{}\nq -> out 1 via a:{} b:{q}\n";
        let c = parse_coalgebra(src, &nfa_law()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(format_coalgebra(&c), src);
        let back = coalgebra_from_json(&coalgebra_to_json(&c)).unwrap();
        assert_eq!(back.step(), c.step());
    }

    #[test]
    fn unknown_generators_are_reported_where_they_start() {
        let err = parse_coalgebra("p -> out 0 via a:{p,zz}", &nfa_law()).unwrap_err();
        assert_eq!(err, Error::parse(1, 21, "unknown generator `zz`"));
    }

    #[test]
    fn missing_letters_default_to_empty() {
        let c = parse_coalgebra("p -> out 1 via a:{p}", &nfa_law()).unwrap();
        assert_eq!(c.step()[0].children[1], Term::Join(BTreeSet::new()));
    }

    #[test]
    fn unary_transitions() {
        let c = parse_coalgebra("x -> +1 x\ny -> x  # comment", &stream_law()).unwrap();
        assert_eq!(c.step()[0].children[0], Term::Iter(1, 0));
        assert_eq!(c.step()[1].children[0], Term::Iter(0, 0));
        assert_eq!(format_coalgebra(&c), "x -> +1 x\ny -> x\n");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_coalgebra("p -> out 0 via a:{p}\nq -> out 0 via a:{r}", &nfa_law()).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 15, "column {column}");
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_coalgebra("x -> +1", &stream_law()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_coalgebra("x -> {x}", &stream_law()),
            Err(Error::Parse { line: 1, column: 6, .. })
        ));
    }

    #[test]
    fn stream_equation_solves() {
        let phi = StreamPhi::streams();
        let src = parse_equation_source("x = F[(2) next x]", phi.law()).unwrap();
        let e = src.build(phi.clone(), |t| resolve_stream(&phi, t)).unwrap();
        assert_eq!(e.step()[0], Sum::Inl(FNode::new(0, vec![Term::Iter(2, 0)])));
        let s = phi.solve(&e).unwrap();
        assert_eq!(s.values[0].key().to_string(), "2/1");
    }

    #[test]
    fn named_and_literal_parameters() {
        let phi = StreamPhi::streams();
        let text = "param P3 = (1,2,7,4)(1,3,2)^w\nx = param P3\ny = param 3/2\nz = F[next +1 y]";
        let src = parse_equation_source(text, phi.law()).unwrap();
        let e = src.build(phi.clone(), |t| resolve_stream(&phi, t)).unwrap();
        let s = phi.solve(&e).unwrap();
        let keys: Vec<String> = s.values.iter().map(|c| c.key().to_string()).collect();
        assert_eq!(keys, ["2/1", "3/2", "3/2"]);
        let printed = format_equation(&e, |c| c.key().to_string());
        let again = parse_equation_source(&printed, phi.law())
            .unwrap()
            .build(phi.clone(), |t| resolve_stream(&phi, t))
            .unwrap();
        assert!(again.same_as(&e));
    }

    #[test]
    fn resolver_errors_point_at_the_parameter() {
        let phi = StreamPhi::streams();
        let src = parse_equation_source("x = param 3/0", phi.law()).unwrap();
        match src.build(phi.clone(), |t| resolve_stream(&phi, t)) {
            Err(Error::Parse { line: 1, column: 11, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn effectful_line() {
        let phi = StreamPhi::streams();
        let src = parse_equation_source("w = eff {2}( next w )", phi.law()).unwrap();
        let e = src.build(phi.clone(), |t| resolve_stream(&phi, t)).unwrap();
        assert_eq!(e.step()[0], Sum::Inl(FNode::new(0, vec![Term::Iter(2, 0)])));
    }

    #[test]
    fn jsl_equation_with_state_parameters() {
        let law = nfa_law();
        let phi = Phi::new(crate::phi::BisimBackend::new(law.clone()).unwrap());
        let text = "q -> out 1 via a:{q}\nx = F[out 0; a:{x,y}] + param q\ny = F[out 1; b:{x}]";
        let src = parse_equation_source(text, &law).unwrap();
        assert_eq!(src.coalgebra.as_ref().unwrap().len(), 1);
        let coalg = src.coalgebra.clone();
        let e = src.build(phi.clone(), |t| resolve_state(&phi, coalg.as_ref(), t)).unwrap();
        assert!(matches!(e.step()[0], Sum::Pair(..)));
        let s = phi.solve(&e).unwrap();
        assert!(crate::elgot::check_solution(&phi, &e, &s));
    }

    #[test]
    fn free_equations_round_trip() {
        let law = nfa_law();
        let params = Free::new(Variety::Jsl, vec!["z".into()]);
        let e = parse_free_equation("x = F[out 1; a:{x}] + param {z}\ny = F[out 0]", &law, params).unwrap();
        let printed = format_equation(&e, |p| e.params().display(p));
        assert_eq!(printed, "x = F[out 1; a:{x} b:{}] + param {z}\ny = F[out 0; a:{} b:{}]\n");
        let again = parse_free_equation(&printed, &law, e.params().clone()).unwrap();
        assert!(again.same_as(&e));
    }

    #[test]
    fn poly_layers() {
        let law = builtin_law(Variety::Set, Shape::Poly(vec![("cons".into(), 2), ("nil".into(), 0)])).unwrap();
        let c = parse_coalgebra("x -> cons(x, y)\ny -> nil", &law).unwrap();
        assert_eq!(format_coalgebra(&c), "x -> cons(x, y)\ny -> nil\n");
    }
}
