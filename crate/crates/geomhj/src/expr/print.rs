use super::{Expr, Node, Num, Rat};
use std::fmt;

const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const POWER_BASE: u8 = 3;

fn wrap(s: String, yes: bool) -> String {
    if yes {
        format!("({})", s)
    } else {
        s
    }
}

fn num(n: Num, prec: u8) -> String {
    let s = n.to_string();
    let compound = matches!(n, Num::Rat(r) if !r.is_integer());
    wrap(s, (n.is_negative() && prec > SUM) || (compound && prec > PRODUCT))
}

fn is_negative_term(e: &Expr) -> bool {
    match e.node() {
        Node::Num(n) => n.is_negative(),
        Node::Mul(v) => v[0].as_num().is_some_and(Num::is_negative),
        _ => false,
    }
}

fn render(e: &Expr, prec: u8) -> String {
    match e.node() {
        Node::Num(n) => num(*n, prec),
        Node::Sym(s) => s.to_string(),
        Node::Add(v) => {
            let mut out = render(&v[0], SUM);
            for t in &v[1..] {
                if is_negative_term(t) {
                    out.push_str(" - ");
                    out.push_str(&render(&-t, PRODUCT));
                } else {
                    out.push_str(" + ");
                    out.push_str(&render(t, PRODUCT));
                }
            }
            wrap(out, prec > SUM)
        }
        Node::Mul(_) | Node::Pow(..) => product(e, prec),
        Node::Fun(f, a) => format!("{}({})", f.name(), render(a, SUM)),
    }
}

fn exponent(e: Num) -> String {
    match e {
        Num::Rat(r) if r.is_integer() && !e.is_negative() => e.to_string(),
        _ => format!("({})", e),
    }
}

fn power(base: &Expr, e: Num) -> String {
    if e.is_one() {
        return render(base, POWER_BASE);
    }
    if e == Num::Rat(Rat::new(1, 2)) {
        return format!("sqrt({})", render(base, SUM));
    }
    format!("{}^{}", render(base, POWER_BASE), exponent(e))
}

fn product(e: &Expr, prec: u8) -> String {
    let factors: Vec<Expr> = match e.node() {
        Node::Mul(v) => v.clone(),
        _ => vec![e.clone()],
    };
    let mut coef = Num::int(1);
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for f in &factors {
        match f.node() {
            Node::Num(n) => coef = *n,
            Node::Pow(b, x) if x.is_negative() => denom.push(power(b, x.neg())),
            Node::Pow(b, x) => numer.push(power(b, *x)),
            _ => numer.push(render(f, POWER_BASE - 1)),
        }
    }
    let negative = coef.is_negative();
    let mag = if negative { coef.neg() } else { coef };
    if !mag.is_one() || numer.is_empty() {
        numer.insert(0, num(mag, PRODUCT));
    }
    let mut out = numer.join("*");
    match denom.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&denom[0]);
        }
        _ => {
            out.push_str("/(");
            out.push_str(&denom.join("*"));
            out.push(')');
        }
    }
    let plain = factors.len() == 1 && denom.is_empty() && !negative;
    if negative {
        out.insert(0, '-');
        return wrap(out, prec > SUM);
    }
    wrap(out, !plain && prec >= POWER_BASE)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, SUM))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn round(src: &str, syms: &[&str]) -> String {
        parse(src, syms, &[] as &[&str]).unwrap().to_string()
    }

    #[test]
    fn prints_readably() {
        assert_eq!(round("p^2/2 + q^2/2", &["q", "p"]), "1/2*p^2 + 1/2*q^2");
        assert_eq!(round("-a/y - b*log(y) - d/x", &["a", "b", "d", "x", "y"]), "-a/y - b*log(y) - d/x");
        assert_eq!(round("sqrt(1 + y^2)", &["y"]), "sqrt(1 + y^2)");
        assert_eq!(round("1/(1+y^2)", &["y"]), "1/(1 + y^2)");
    }

    #[test]
    fn round_trips() {
        let srcs = [
            "(p + 2*l*z)^2/(2*m) + m*g/(2*l)*(exp(2*l*q) - 1)",
            "-x^2*y^(-3) + (x - y)^(3/2)",
            "exp(-x)*cos(y)/sqrt(x)",
            "1.5e-12*x - 3/(x*y)",
        ];
        let syms = ["x", "y", "p", "q", "z", "l", "m", "g"];
        for s in srcs {
            let e = parse(s, &syms, &[] as &[&str]).unwrap();
            let back = parse(&e.to_string(), &syms, &[] as &[&str]).unwrap();
            assert_eq!(e, back, "{} -> {}", s, e);
        }
    }
}
