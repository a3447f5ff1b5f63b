use super::{Expr, Func, Node, Num};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
}

fn domain(e: &Expr, reason: &str) -> EvalError {
    let mut text = e.to_string();
    if text.len() > 160 {
        text.truncate(157);
        text.push_str("...");
    }
    EvalError::Domain { expr: text, reason: reason.to_string() }
}

fn pow_value(b: f64, e: Num) -> Result<f64, &'static str> {
    if b == 0.0 && e.is_negative() {
        return Err("division by zero");
    }
    match e.as_integer() {
        Some(k) if k.unsigned_abs() <= i32::MAX as u64 => Ok(b.powi(k as i32)),
        _ => {
            if b < 0.0 {
                Err("fractional power of a negative number")
            } else {
                Ok(b.powf(e.to_f64()))
            }
        }
    }
}

fn fun_value(f: Func, x: f64) -> Result<f64, &'static str> {
    match f {
        Func::Exp => Ok(x.exp()),
        Func::Log if x <= 0.0 => Err("logarithm of a non-positive number"),
        Func::Log => Ok(x.ln()),
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
    }
}

impl Expr {
    /// Evaluate with a symbol lookup. Non-finite results are errors.
    pub fn eval_with(&self, look: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Num(n) => n.to_f64(),
            Node::Sym(s) => look(s).ok_or_else(|| EvalError::Unbound(s.to_string()))?,
            Node::Add(v) => {
                let mut acc = 0.0;
                for t in v {
                    acc += t.eval_with(look)?;
                }
                acc
            }
            Node::Mul(v) => {
                let mut acc = 1.0;
                for t in v {
                    acc *= t.eval_with(look)?;
                }
                acc
            }
            Node::Pow(b, e) => {
                let x = b.eval_with(look)?;
                pow_value(x, *e).map_err(|r| domain(self, r))?
            }
            Node::Fun(f, a) => {
                let x = a.eval_with(look)?;
                fun_value(*f, x).map_err(|r| domain(self, r))?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(self, "non-finite value"))
        }
    }

    /// Evaluate at a point with parameter values.
    pub fn evaluate(&self, pt: &super::Point, params: &super::Params) -> Result<f64, EvalError> {
        self.eval_with(&|s| pt.get(s).or_else(|| params.get(s).copied()))
    }

    /// Evaluate against a single map of symbol values.
    pub fn eval_map(&self, vals: &super::Params) -> Result<f64, EvalError> {
        self.eval_with(&|s| vals.get(s).copied())
    }

    /// Compile for repeated evaluation with positional symbol slots.
    pub fn compile(&self, slots: &[&str]) -> Result<Compiled, EvalError> {
        Compiled::new(std::slice::from_ref(self), slots)
    }
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Load(usize),
    Add(usize),
    Mul(usize),
    Pow(Num),
    Fun(Func),
    /// Marks the end of one output expression.
    Emit,
}

/// Stack-machine form of one or more expressions sharing symbol slots.
#[derive(Clone, Debug)]
pub struct Compiled {
    code: Vec<Op>,
    outputs: usize,
}

impl Compiled {
    pub fn new(exprs: &[Expr], slots: &[&str]) -> Result<Compiled, EvalError> {
        let mut code = Vec::new();
        for e in exprs {
            emit(e, slots, &mut code)?;
            code.push(Op::Emit);
        }
        Ok(Compiled { code, outputs: exprs.len() })
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Evaluate every output into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        let mut k = 0;
        for op in &self.code {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Load(i) => stack.push(x[*i]),
                Op::Add(n) => {
                    let at = stack.len() - n;
                    let s: f64 = stack[at..].iter().sum();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let at = stack.len() - n;
                    let s: f64 = stack[at..].iter().product();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Pow(e) => {
                    let b = stack.pop().unwrap();
                    let v = pow_value(b, *e).map_err(|r| EvalError::Domain {
                        expr: format!("x^{}", e),
                        reason: format!("{} (x = {})", r, b),
                    })?;
                    stack.push(v);
                }
                Op::Fun(f) => {
                    let a = stack.pop().unwrap();
                    let v = fun_value(*f, a).map_err(|r| EvalError::Domain {
                        expr: format!("{}(x)", f.name()),
                        reason: format!("{} (x = {})", r, a),
                    })?;
                    stack.push(v);
                }
                Op::Emit => {
                    let v = stack.pop().unwrap();
                    if !v.is_finite() {
                        return Err(EvalError::Domain {
                            expr: format!("output {}", k),
                            reason: "non-finite value".into(),
                        });
                    }
                    out[k] = v;
                    k += 1;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.outputs];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

fn emit(e: &Expr, slots: &[&str], code: &mut Vec<Op>) -> Result<(), EvalError> {
    match e.node() {
        Node::Num(n) => code.push(Op::Const(n.to_f64())),
        Node::Sym(s) => {
            let i = slots
                .iter()
                .position(|t| *t == &**s)
                .ok_or_else(|| EvalError::Unbound(s.to_string()))?;
            code.push(Op::Load(i));
        }
        Node::Add(v) => {
            for t in v {
                emit(t, slots, code)?;
            }
            code.push(Op::Add(v.len()));
        }
        Node::Mul(v) => {
            for t in v {
                emit(t, slots, code)?;
            }
            code.push(Op::Mul(v.len()));
        }
        Node::Pow(b, n) => {
            emit(b, slots, code)?;
            code.push(Op::Pow(*n));
        }
        Node::Fun(f, a) => {
            emit(a, slots, code)?;
            code.push(Op::Fun(*f));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn compiled_matches_tree_walk() {
        let e = parse("exp(2*l*q) + p^2/(2*m) - sqrt(q + 3)", &["q", "p"], &["l", "m"]).unwrap();
        let c = e.compile(&["q", "p", "l", "m"]).unwrap();
        let x = [0.3, -1.2, 0.7, 2.0];
        let mut vals = Params::new();
        for (k, v) in ["q", "p", "l", "m"].iter().zip(x) {
            vals.insert(k.to_string(), v);
        }
        let a = e.eval_map(&vals).unwrap();
        let b = c.eval(&x).unwrap()[0];
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        let e = parse("1/x", &["x"], &[] as &[&str]).unwrap();
        let mut vals = Params::new();
        vals.insert("x".into(), 0.0);
        assert!(matches!(e.eval_map(&vals), Err(EvalError::Domain { .. })));
        let l = parse("log(x)", &["x"], &[] as &[&str]).unwrap();
        vals.insert("x".into(), -1.0);
        assert!(matches!(l.eval_map(&vals), Err(EvalError::Domain { .. })));
        assert!(matches!(l.eval_map(&Params::new()), Err(EvalError::Unbound(_))));
    }
}
