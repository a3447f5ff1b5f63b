//! Expanded rational canonical form used for exact zero recognition.
//!
//! Symbols and non-polynomial subterms (transcendental functions, fractional
//! powers) become variables of a multivariate polynomial ring. Denominators
//! are kept as products of interned polynomial factors, so sums of fractions
//! never need polynomial gcds.

use super::{Expr, Node, Num};
use std::collections::{BTreeMap, HashMap};

const TERM_LIMIT: usize = 4000;

type Mono = Vec<(u32, u32)>;

#[derive(Clone, Debug, PartialEq)]
struct Poly(BTreeMap<Mono, Num>);

#[derive(Clone, Debug)]
struct RatFn {
    num: Poly,
    den: BTreeMap<u32, u32>,
}

struct Ctx {
    vars: Vec<Expr>,
    var_index: HashMap<String, u32>,
    factors: Vec<Poly>,
    factor_index: HashMap<String, u32>,
}

struct TooBig;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Poly {
    fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    fn constant(c: Num) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Vec::new(), c);
        }
        Poly(m)
    }

    fn var(id: u32) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(vec![(id, 1)], Num::int(1));
        Poly(m)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_assign(&mut self, o: &Poly, scale: Num) {
        for (m, c) in &o.0 {
            let c = c.mul(scale);
            let e = self.0.entry(m.clone()).or_insert(Num::int(0));
            *e = e.add(c);
            if e.is_zero() {
                self.0.remove(m);
            }
        }
    }

    fn mul(&self, o: &Poly) -> Result<Poly, TooBig> {
        if self.0.len() * o.0.len() > TERM_LIMIT * 8 {
            return Err(TooBig);
        }
        let mut out: BTreeMap<Mono, Num> = BTreeMap::new();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &o.0 {
                let m = mono_mul(ma, mb);
                let c = ca.mul(*cb);
                let e = out.entry(m).or_insert(Num::int(0));
                *e = e.add(c);
            }
        }
        out.retain(|_, c| !c.is_zero());
        if out.len() > TERM_LIMIT {
            return Err(TooBig);
        }
        Ok(Poly(out))
    }

    fn pow(&self, k: u32) -> Result<Poly, TooBig> {
        let mut acc = Poly::constant(Num::int(1));
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn scale(&self, c: Num) -> Poly {
        let mut out = Poly::zero();
        out.add_assign(self, c);
        out
    }

    fn key(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.0 {
            s.push_str(&format!("{}", c));
            for (v, e) in m {
                s.push_str(&format!("*v{}^{}", v, e));
            }
            s.push(';');
        }
        s
    }

    fn is_exact(&self) -> bool {
        self.0.values().all(|c| matches!(c, Num::Rat(_)))
    }
}

impl RatFn {
    fn poly(p: Poly) -> RatFn {
        RatFn { num: p, den: BTreeMap::new() }
    }
}

impl Ctx {
    fn new() -> Ctx {
        Ctx { vars: Vec::new(), var_index: HashMap::new(), factors: Vec::new(), factor_index: HashMap::new() }
    }

    fn var(&mut self, key: String, e: &Expr) -> u32 {
        if let Some(&i) = self.var_index.get(&key) {
            return i;
        }
        let i = self.vars.len() as u32;
        self.vars.push(e.clone());
        self.var_index.insert(key, i);
        i
    }

    fn factor(&mut self, p: Poly) -> u32 {
        let key = p.key();
        if let Some(&i) = self.factor_index.get(&key) {
            return i;
        }
        let i = self.factors.len() as u32;
        self.factors.push(p);
        self.factor_index.insert(key, i);
        i
    }

    fn expand_den(&self, den: &BTreeMap<u32, u32>) -> Result<Poly, TooBig> {
        let mut acc = Poly::constant(Num::int(1));
        for (f, k) in den {
            acc = acc.mul(&self.factors[*f as usize].pow(*k)?)?;
        }
        Ok(acc)
    }

    fn add(&self, a: &RatFn, b: &RatFn) -> Result<RatFn, TooBig> {
        if a.den == b.den {
            let mut num = a.num.clone();
            num.add_assign(&b.num, Num::int(1));
            return Ok(RatFn { num, den: a.den.clone() });
        }
        let mut den = a.den.clone();
        for (f, k) in &b.den {
            let e = den.entry(*f).or_insert(0);
            *e = (*e).max(*k);
        }
        let lift = |r: &RatFn| -> Result<Poly, TooBig> {
            let mut extra = BTreeMap::new();
            for (f, k) in &den {
                let have = r.den.get(f).copied().unwrap_or(0);
                if *k > have {
                    extra.insert(*f, *k - have);
                }
            }
            r.num.mul(&self.expand_den(&extra)?)
        };
        let mut num = lift(a)?;
        num.add_assign(&lift(b)?, Num::int(1));
        Ok(RatFn { num, den })
    }

    fn mul(&self, a: &RatFn, b: &RatFn) -> Result<RatFn, TooBig> {
        let mut den = a.den.clone();
        for (f, k) in &b.den {
            *den.entry(*f).or_insert(0) += *k;
        }
        Ok(RatFn { num: a.num.mul(&b.num)?, den })
    }

    fn invert(&mut self, a: &RatFn) -> Result<Option<RatFn>, TooBig> {
        let Some((_, lead)) = a.num.0.iter().next() else {
            return Ok(None);
        };
        let lead = *lead;
        let inv = lead.recip().unwrap();
        let num = self.expand_den(&a.den)?.scale(inv);
        let mut den = BTreeMap::new();
        if a.num.0.len() > 1 || !a.num.0.keys().next().unwrap().is_empty() {
            let f = self.factor(a.num.scale(inv));
            den.insert(f, 1);
        }
        Ok(Some(RatFn { num, den }))
    }

    fn pow(&mut self, a: &RatFn, k: i64) -> Result<Option<RatFn>, TooBig> {
        let base = if k < 0 {
            match self.invert(a)? {
                Some(b) => b,
                None => return Ok(None),
            }
        } else {
            a.clone()
        };
        let n = k.unsigned_abs() as u32;
        let num = base.num.pow(n)?;
        let den = base.den.iter().map(|(f, e)| (*f, e * n)).collect();
        Ok(Some(RatFn { num, den }))
    }

    fn key_of(&self, r: &RatFn) -> String {
        let mut s = r.num.key();
        for (f, k) in &r.den {
            s.push_str(&format!("/f{}^{}", f, k));
        }
        s
    }

    fn convert(&mut self, e: &Expr) -> Result<Option<RatFn>, TooBig> {
        Ok(Some(match e.node() {
            Node::Num(n) => RatFn::poly(Poly::constant(*n)),
            Node::Sym(s) => {
                let id = self.var(format!("s:{}", s), e);
                RatFn::poly(Poly::var(id))
            }
            Node::Add(v) => {
                let mut acc = RatFn::poly(Poly::zero());
                for t in v {
                    let Some(r) = self.convert(t)? else { return Ok(None) };
                    acc = self.add(&acc, &r)?;
                }
                acc
            }
            Node::Mul(v) => {
                let mut acc = RatFn::poly(Poly::constant(Num::int(1)));
                for t in v {
                    let Some(r) = self.convert(t)? else { return Ok(None) };
                    acc = self.mul(&acc, &r)?;
                }
                acc
            }
            Node::Pow(b, n) => {
                let Some(rb) = self.convert(b)? else { return Ok(None) };
                match n.as_integer() {
                    Some(k) if k.abs() <= 32 => match self.pow(&rb, k)? {
                        Some(r) => r,
                        None => return Ok(None),
                    },
                    _ => {
                        let key = format!("pow({})^{}", self.key_of(&rb), n);
                        RatFn::poly(Poly::var(self.var(key, e)))
                    }
                }
            }
            Node::Fun(f, a) => {
                let Some(ra) = self.convert(a)? else { return Ok(None) };
                let key = format!("{}({})", f.name(), self.key_of(&ra));
                RatFn::poly(Poly::var(self.var(key, e)))
            }
        }))
    }

    fn poly_to_expr(&self, p: &Poly) -> Expr {
        Expr::add_all(p.0.iter().map(|(m, c)| {
            let mut fs = vec![Expr::number(*c)];
            for (v, k) in m {
                fs.push(self.vars[*v as usize].powi(*k as i64));
            }
            Expr::mul_all(fs)
        }))
    }
}

fn canonical(e: &Expr) -> Option<(Ctx, RatFn)> {
    let mut ctx = Ctx::new();
    match ctx.convert(e) {
        Ok(Some(r)) => Some((ctx, r)),
        _ => None,
    }
}

/// `Some(true)` when `e` is provably zero, `Some(false)` when `e` is a nonzero
/// polynomial with exact coefficients, `None` when undecided.
pub fn is_zero_symbolic(e: &Expr) -> Option<bool> {
    if e.is_zero() {
        return Some(true);
    }
    let (ctx, r) = canonical(e)?;
    if r.num.is_zero() {
        return Some(true);
    }
    let polynomial = r.den.is_empty()
        && r.num.is_exact()
        && ctx.vars.iter().all(|v| matches!(v.node(), Node::Sym(_)));
    polynomial.then_some(false)
}

/// Exact equality after canonicalization, when decidable.
pub fn canonical_eq(a: &Expr, b: &Expr) -> Option<bool> {
    if a == b {
        return Some(true);
    }
    is_zero_symbolic(&(a - b))
}

/// Expanded form: a sum of monomials over a product of polynomial factors.
/// Returns the input unchanged when the expansion is too large.
pub fn expand(e: &Expr) -> Expr {
    let Some((ctx, r)) = canonical(e) else { return e.clone() };
    let num = ctx.poly_to_expr(&r.num);
    if r.den.is_empty() {
        return num;
    }
    let den = Expr::mul_all(r.den.iter().map(|(f, k)| ctx.poly_to_expr(&ctx.factors[*f as usize]).powi(*k as i64)));
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s, &["x", "y", "z", "q", "p"], &[] as &[&str]).unwrap()
    }

    #[test]
    fn polynomial_identities() {
        assert_eq!(is_zero_symbolic(&p("(x+y)^2 - x^2 - 2*x*y - y^2")), Some(true));
        assert_eq!(is_zero_symbolic(&p("(x+y)^3 - x^3")), Some(false));
    }

    #[test]
    fn rational_identities() {
        assert_eq!(is_zero_symbolic(&p("(1+y^2)/(1+y^2) - 1")), Some(true));
        assert_eq!(is_zero_symbolic(&p("1/(1+y^2) + y^2/(1+y^2) - 1")), Some(true));
        assert_eq!(is_zero_symbolic(&p("x/(x*y) - 1/y")), Some(true));
        assert_eq!(is_zero_symbolic(&p("1/(1+y)^2 - 1/(1 + 2*y + y^2)")), Some(true));
    }

    #[test]
    fn atoms_are_opaque_but_consistent() {
        assert_eq!(is_zero_symbolic(&p("exp(2*q)*(p+1) - p*exp(q*2) - exp(2*q)")), Some(true));
        assert_eq!(is_zero_symbolic(&p("sqrt(1+y^2)^2 - 1 - y^2")), Some(true));
        assert_eq!(is_zero_symbolic(&p("exp(q)^2 - exp(2*q)")), None);
    }

    #[test]
    fn expansion_is_canonical() {
        assert_eq!(expand(&p("(x+1)*(x-1)")), expand(&p("x^2 - 1")));
        assert_eq!(canonical_eq(&p("x*(y+z)"), &p("x*z + y*x")), Some(true));
    }
}
