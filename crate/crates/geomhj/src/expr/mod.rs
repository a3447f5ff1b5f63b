//! Symbolic scalar expressions over named symbols.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Construction always goes
//! through the smart constructors in this module, which fold constants, flatten
//! sums and products, merge like terms and drop trivial factors. Subtraction is
//! stored as `a + (-1)*b`, division as `a * b^-1` and `sqrt(x)` as `x^(1/2)`.

mod canon;
mod eval;
mod parse;
mod print;
mod sample;

pub use canon::{canonical_eq, expand, is_zero_symbolic};
pub use eval::{Compiled, EvalError};
pub use parse::{parse, ParseError};
pub use sample::{check_zero, Chart, Params, Point, Probe, SampleBox, Verdict, ZeroReport};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Rat = Ratio<i64>;

/// Numeric constant: exact rational when possible, otherwise a float.
#[derive(Clone, Copy, Debug)]
pub enum Num {
    Rat(Rat),
    Float(f64),
}

impl Num {
    pub fn int(n: i64) -> Num {
        Num::Rat(Rat::from_integer(n))
    }

    /// Floats with an exact small-integer value are stored as rationals.
    pub fn from_f64(x: f64) -> Num {
        if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15 {
            Num::int(x as i64)
        } else {
            Num::Float(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Rat(r) => *r.numer() as f64 / *r.denom() as f64,
            Num::Float(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Num::Rat(r) => r.is_zero(),
            Num::Float(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Num::Rat(r) => r.is_one(),
            Num::Float(x) => x == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Num::Rat(r) => r.is_negative(),
            Num::Float(x) => x < 0.0,
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Num::Rat(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    pub fn add(self, o: Num) -> Num {
        if let (Num::Rat(a), Num::Rat(b)) = (self, o) {
            if let Some(c) = num_traits::CheckedAdd::checked_add(&a, &b) {
                return Num::Rat(c);
            }
        }
        Num::from_f64(self.to_f64() + o.to_f64())
    }

    pub fn mul(self, o: Num) -> Num {
        if let (Num::Rat(a), Num::Rat(b)) = (self, o) {
            if let Some(c) = num_traits::CheckedMul::checked_mul(&a, &b) {
                return Num::Rat(c);
            }
        }
        Num::from_f64(self.to_f64() * o.to_f64())
    }

    pub fn neg(self) -> Num {
        match self {
            Num::Rat(r) => Num::Rat(-r),
            Num::Float(x) => Num::Float(-x),
        }
    }

    pub fn recip(self) -> Option<Num> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Num::Rat(r) => Num::Rat(r.recip()),
            Num::Float(x) => Num::from_f64(1.0 / x),
        })
    }

    /// `self^e`, exact when both are rational and the result is rational.
    pub fn pow(self, e: Num) -> Option<Num> {
        if let (Num::Rat(b), Some(k)) = (self, e.as_integer()) {
            if b.is_zero() && k < 0 {
                return None;
            }
            if k.unsigned_abs() <= 64 {
                let mut acc = Some(Rat::one());
                let base = if k < 0 { b.recip() } else { b };
                for _ in 0..k.unsigned_abs() {
                    acc = acc.and_then(|a| num_traits::CheckedMul::checked_mul(&a, &base));
                }
                if let Some(r) = acc {
                    return Some(Num::Rat(r));
                }
            }
        }
        if let (Num::Rat(b), Num::Rat(h)) = (self, e) {
            if *h.denom() == 2 && !b.is_negative() {
                if let (Some(n), Some(d)) = (isqrt(*b.numer()), isqrt(*b.denom())) {
                    return Num::Rat(Rat::new(n, d)).pow(Num::int(*h.numer()));
                }
            }
        }
        let v = self.to_f64().powf(e.to_f64());
        if v.is_finite() {
            Some(Num::from_f64(v))
        } else {
            None
        }
    }
}

fn isqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r.checked_mul(r) == Some(n)).then_some(r)
}

impl PartialEq for Num {
    fn eq(&self, o: &Num) -> bool {
        match (self, o) {
            (Num::Rat(a), Num::Rat(b)) => a == b,
            (Num::Float(a), Num::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}
impl Eq for Num {}

impl Hash for Num {
    fn hash<H: Hasher>(&self, h: &mut H) {
        match self {
            Num::Rat(r) => {
                0u8.hash(h);
                r.numer().hash(h);
                r.denom().hash(h);
            }
            Num::Float(x) => {
                1u8.hash(h);
                x.to_bits().hash(h);
            }
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rat(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Num::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Num::Float(x) => write!(f, "{:?}", x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Num(Num),
    Sym(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Num),
    Fun(Func, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
    size: usize,
}

/// Immutable symbolic expression.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, o: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &o.0) {
            return true;
        }
        if self.0.hash != o.0.hash || self.0.size != o.0.size {
            return false;
        }
        match (self.node(), o.node()) {
            (Node::Num(a), Node::Num(b)) => a == b,
            (Node::Sym(a), Node::Sym(b)) => a == b,
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a == b,
            (Node::Pow(a, e), Node::Pow(b, f)) => e == f && a == b,
            (Node::Fun(f, a), Node::Fun(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}
impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.hash.hash(h);
    }
}

fn rank(n: &Node) -> u8 {
    match n {
        Node::Num(_) => 0,
        Node::Sym(_) => 1,
        Node::Pow(..) => 2,
        Node::Mul(_) => 3,
        Node::Fun(..) => 4,
        Node::Add(_) => 5,
    }
}

impl Ord for Expr {
    fn cmp(&self, o: &Expr) -> Ordering {
        if self == o {
            return Ordering::Equal;
        }
        let (ga, na, ea) = self.sort_head();
        let (gb, nb, eb) = o.sort_head();
        ga.cmp(&gb)
            .then_with(|| na.cmp(nb))
            .then_with(|| ea.total_cmp(&eb))
            .then_with(|| rank(self.node()).cmp(&rank(o.node())))
            .then(self.0.size.cmp(&o.0.size))
            .then(self.0.hash.cmp(&o.0.hash))
    }
}
impl PartialOrd for Expr {
    fn partial_cmp(&self, o: &Expr) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Expr {
    fn make(node: Node) -> Expr {
        let mut h = DefaultHasher::new();
        let size = match &node {
            Node::Num(n) => {
                0u8.hash(&mut h);
                n.hash(&mut h);
                1
            }
            Node::Sym(s) => {
                1u8.hash(&mut h);
                s.hash(&mut h);
                1
            }
            Node::Add(v) | Node::Mul(v) => {
                (if matches!(node, Node::Add(_)) { 2u8 } else { 3u8 }).hash(&mut h);
                for e in v {
                    e.0.hash.hash(&mut h);
                }
                1 + v.iter().map(|e| e.0.size).sum::<usize>()
            }
            Node::Pow(b, e) => {
                4u8.hash(&mut h);
                b.0.hash.hash(&mut h);
                e.hash(&mut h);
                1 + b.0.size
            }
            Node::Fun(f, a) => {
                5u8.hash(&mut h);
                f.hash(&mut h);
                a.0.hash.hash(&mut h);
                1 + a.0.size
            }
        };
        Expr(Arc::new(Inner { node, hash: h.finish(), size }))
    }

    /// Leading sort key: numbers, then symbols and their powers by name, then the rest.
    fn sort_head(&self) -> (u8, &str, f64) {
        match self.node() {
            Node::Num(n) => (0, "", n.to_f64()),
            Node::Sym(s) => (1, s, 1.0),
            Node::Pow(b, e) => match b.node() {
                Node::Sym(s) => (1, s, e.to_f64()),
                _ => (2, "", 0.0),
            },
            Node::Mul(v) => match v.iter().find(|f| f.as_num().is_none()) {
                Some(f) => {
                    let (g, n, _) = f.sort_head();
                    (g, n, f64::INFINITY)
                }
                None => (2, "", 0.0),
            },
            _ => (2, "", 0.0),
        }
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn number(n: Num) -> Expr {
        Expr::make(Node::Num(n))
    }

    pub fn int(n: i64) -> Expr {
        Expr::number(Num::int(n))
    }

    pub fn rat(n: i64, d: i64) -> Expr {
        Expr::number(Num::Rat(Rat::new(n, d)))
    }

    pub fn float(x: f64) -> Expr {
        Expr::number(Num::from_f64(x))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::make(Node::Sym(Arc::from(name)))
    }

    pub fn as_num(&self) -> Option<Num> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.as_num().map(Num::to_f64)
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(Num::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_num().is_some_and(Num::is_one)
    }

    /// Sum with flattening, constant folding and like-term collection.
    pub fn add_all(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = Num::int(0);
        let mut order: Vec<Expr> = Vec::new();
        let mut coeffs: HashMap<Expr, Num> = HashMap::new();
        let mut push = |t: Expr, constant: &mut Num| match t.node() {
            Node::Num(n) => *constant = constant.add(*n),
            _ => {
                let (c, rest) = t.split_coeff();
                match coeffs.get_mut(&rest) {
                    Some(acc) => *acc = acc.add(c),
                    None => {
                        coeffs.insert(rest.clone(), c);
                        order.push(rest);
                    }
                }
            }
        };
        for t in terms {
            if let Node::Add(v) = t.node() {
                for s in v {
                    push(s.clone(), &mut constant);
                }
            } else {
                push(t, &mut constant);
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(order.len() + 1);
        for rest in order {
            let c = coeffs[&rest];
            if !c.is_zero() {
                out.push(rest.scaled(c));
            }
        }
        out.sort_by(|a, b| a.split_coeff().1.cmp(&b.split_coeff().1));
        if !constant.is_zero() {
            out.insert(0, Expr::number(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::make(Node::Add(out)),
        }
    }

    /// Product with flattening, constant folding and exponent collection.
    pub fn mul_all(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coef = Num::int(1);
        let mut order: Vec<Expr> = Vec::new();
        let mut exps: HashMap<Expr, Num> = HashMap::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        stack.reverse();
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Num(n) => coef = coef.mul(*n),
                Node::Mul(v) => {
                    for s in v.iter().rev() {
                        stack.push(s.clone());
                    }
                }
                _ => {
                    let (base, e) = f.split_pow();
                    match exps.get_mut(&base) {
                        Some(acc) => *acc = acc.add(e),
                        None => {
                            exps.insert(base.clone(), e);
                            order.push(base);
                        }
                    }
                }
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = Vec::new();
        for base in order {
            let e = exps[&base];
            if e.is_zero() {
                continue;
            }
            let p = base.pow(e);
            match p.node() {
                Node::Num(n) => coef = coef.mul(*n),
                Node::Mul(v) => {
                    for s in v {
                        match s.node() {
                            Node::Num(n) => coef = coef.mul(*n),
                            _ => out.push(s.clone()),
                        }
                    }
                }
                _ => out.push(p),
            }
        }
        out.sort();
        if out.is_empty() {
            return Expr::number(coef);
        }
        if !coef.is_one() {
            out.insert(0, Expr::number(coef));
        }
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        Expr::make(Node::Mul(out))
    }

    /// Split `c * rest` with `c` numeric.
    fn split_coeff(&self) -> (Num, Expr) {
        if let Node::Mul(v) = self.node() {
            if let Node::Num(c) = v[0].node() {
                let rest = if v.len() == 2 {
                    v[1].clone()
                } else {
                    Expr::make(Node::Mul(v[1..].to_vec()))
                };
                return (*c, rest);
            }
        }
        (Num::int(1), self.clone())
    }

    fn scaled(&self, c: Num) -> Expr {
        if c.is_one() {
            return self.clone();
        }
        let mut v = vec![Expr::number(c)];
        match self.node() {
            Node::Mul(fs) => v.extend(fs.iter().cloned()),
            _ => v.push(self.clone()),
        }
        Expr::make(Node::Mul(v))
    }

    fn split_pow(&self) -> (Expr, Num) {
        match self.node() {
            Node::Pow(b, e) => (b.clone(), *e),
            _ => (self.clone(), Num::int(1)),
        }
    }

    /// Power with a constant exponent.
    pub fn pow(&self, e: Num) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return self.clone();
        }
        match self.node() {
            Node::Num(b) => match b.pow(e) {
                Some(v) => Expr::number(v),
                None => Expr::make(Node::Pow(self.clone(), e)),
            },
            Node::Pow(b, f) if e.as_integer().is_some() => b.pow(f.mul(e)),
            Node::Mul(v) if e.as_integer().is_some() => Expr::mul_all(v.iter().map(|x| x.pow(e))),
            _ => Expr::make(Node::Pow(self.clone(), e)),
        }
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(Num::int(k))
    }

    pub fn sqrt(&self) -> Expr {
        self.pow(Num::Rat(Rat::new(1, 2)))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn apply(f: Func, a: Expr) -> Expr {
        if let Some(x) = a.as_num() {
            let x = x.to_f64();
            let v = match f {
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
            };
            if v.is_finite() {
                return Expr::float(v);
            }
        }
        if f == Func::Log {
            if let Node::Fun(Func::Exp, inner) = a.node() {
                return inner.clone();
            }
        }
        Expr::make(Node::Fun(f, a))
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Log, self.clone())
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self.clone())
    }

    /// Exact partial derivative with respect to the symbol `x`.
    pub fn diff(&self, x: &str) -> Expr {
        if !self.contains(x) {
            return Expr::zero();
        }
        match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Sym(s) => Expr::int((&**s == x) as i64),
            Node::Add(v) => Expr::add_all(v.iter().map(|t| t.diff(x))),
            Node::Mul(v) => {
                let mut terms = Vec::new();
                for (i, f) in v.iter().enumerate() {
                    let df = f.diff(x);
                    if df.is_zero() {
                        continue;
                    }
                    let mut fs: Vec<Expr> = v.clone();
                    fs[i] = df;
                    terms.push(Expr::mul_all(fs));
                }
                Expr::add_all(terms)
            }
            Node::Pow(b, e) => Expr::mul_all([
                Expr::number(*e),
                b.pow(e.add(Num::int(-1))),
                b.diff(x),
            ]),
            Node::Fun(f, u) => {
                let du = u.diff(x);
                match f {
                    Func::Exp => Expr::mul_all([self.clone(), du]),
                    Func::Log => Expr::mul_all([du, u.recip()]),
                    Func::Sin => Expr::mul_all([u.cos(), du]),
                    Func::Cos => Expr::mul_all([Expr::int(-1), u.sin(), du]),
                }
            }
        }
    }

    /// Whether the symbol `x` occurs in the tree.
    pub fn contains(&self, x: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(s) => &**s == x,
            Node::Add(v) | Node::Mul(v) => v.iter().any(|t| t.contains(x)),
            Node::Pow(b, _) => b.contains(x),
            Node::Fun(_, a) => a.contains(x),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.to_string());
            }
            Node::Add(v) | Node::Mul(v) => v.iter().for_each(|t| t.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Fun(_, a) => a.collect_symbols(out),
        }
    }

    /// Simultaneous substitution of symbols by expressions.
    pub fn substitute(&self, b: &HashMap<String, Expr>) -> Expr {
        if b.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Sym(s) => b.get(&**s).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(v) => Expr::add_all(v.iter().map(|t| t.substitute(b))),
            Node::Mul(v) => Expr::mul_all(v.iter().map(|t| t.substitute(b))),
            Node::Pow(x, e) => x.substitute(b).pow(*e),
            Node::Fun(f, a) => Expr::apply(*f, a.substitute(b)),
        }
    }

    /// Substitute one symbol.
    pub fn subs(&self, name: &str, value: &Expr) -> Expr {
        let mut m = HashMap::new();
        m.insert(name.to_string(), value.clone());
        self.substitute(&m)
    }

    /// Replace parameters by numeric values.
    pub fn bind(&self, params: &Params) -> Expr {
        let m: HashMap<String, Expr> = params
            .iter()
            .filter(|(k, _)| self.contains(k))
            .map(|(k, v)| (k.clone(), Expr::float(*v)))
            .collect();
        self.substitute(&m)
    }

    /// Expanded canonical form for polynomial and rational inputs.
    pub fn expanded(&self) -> Expr {
        expand(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Expr {
        Expr::float(x)
    }
}

impl From<&str> for Expr {
    fn from(s: &str) -> Expr {
        Expr::sym(s)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, o.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), o)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), o.clone())
            }
        }
        impl std::ops::$tr<i64> for Expr {
            type Output = Expr;
            fn $m(self, o: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::int(o))
            }
        }
        impl std::ops::$tr<i64> for &Expr {
            type Output = Expr;
            fn $m(self, o: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), Expr::int(o))
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, o: f64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::float(o))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, o: f64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), Expr::float(o))
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add_all([a, b]));
binop!(Sub, sub, |a, b| Expr::add_all([a, -b]));
binop!(Mul, mul, |a, b| Expr::mul_all([a, b]));
binop!(Div, div, |a, b| Expr::mul_all([a, b.recip()]));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all([Expr::int(-1), self])
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(it: I) -> Expr {
        Expr::add_all(it)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(it: I) -> Expr {
        Expr::mul_all(it)
    }
}

/// Convenience for numeric literals in tests and constructors.
pub fn num_to_i64(n: Num) -> Option<i64> {
    match n {
        Num::Rat(r) if r.is_integer() => r.numer().to_i64(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Expr {
        Expr::sym(x)
    }

    #[test]
    fn like_terms_collect() {
        let x = s("x");
        assert_eq!(&x + &x, Expr::int(2) * &x);
        assert!((&x - &x).is_zero());
        assert_eq!(&x * &x, x.powi(2));
        assert!((&x / &x).is_one());
    }

    #[test]
    fn derivative_rules() {
        let (p, q) = (s("p"), s("q"));
        let e = p.powi(2) * &q;
        assert_eq!(e.diff("q"), p.powi(2));
        let l = s("l");
        let f = (Expr::int(2) * &l * &q).exp();
        assert_eq!(f.diff("q"), Expr::int(2) * &l * &f);
    }

    #[test]
    fn sqrt_folds_on_perfect_squares() {
        assert_eq!(Expr::rat(9, 4).sqrt(), Expr::rat(3, 2));
        assert!(Expr::int(2).sqrt().as_num().is_some());
    }

    #[test]
    fn substitution_is_simultaneous() {
        let (x, y) = (s("x"), s("y"));
        let mut m = HashMap::new();
        m.insert("x".to_string(), y.clone());
        m.insert("y".to_string(), x.clone());
        let e = &x - Expr::int(2) * &y;
        assert_eq!(e.substitute(&m), &y - Expr::int(2) * &x);
    }
}
