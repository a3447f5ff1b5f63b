use super::{is_zero_symbolic, EvalError, Expr, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

/// Parameter values by name.
pub type Params = BTreeMap<String, f64>;

/// Ordered coordinate names of a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    coords: Vec<String>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Chart {
        Chart { coords: coords.iter().map(|s| s.as_ref().to_string()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn symbols(&self) -> Vec<Expr> {
        self.coords.iter().map(|c| Expr::sym(c)).collect()
    }

    /// Point from coordinate values in chart order.
    pub fn point(&self, x: &[f64]) -> Point {
        Point(self.coords.iter().cloned().zip(x.iter().copied()).collect())
    }

    /// Coordinate values of `p` in chart order; missing entries are zero.
    pub fn values(&self, p: &Point) -> Vec<f64> {
        self.coords.iter().map(|c| p.get(c).unwrap_or(0.0)).collect()
    }
}

/// Named coordinate values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point(pub BTreeMap<String, f64>);

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.0.insert(name.to_string(), v);
    }

    pub fn with(mut self, name: &str, v: f64) -> Point {
        self.set(name, v);
        self
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", k, v)?;
        }
        f.write_str(")")
    }
}

/// Axis-aligned sampling region; coordinates without a range use [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl SampleBox {
    pub fn new() -> SampleBox {
        SampleBox { ranges: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> SampleBox {
        self.ranges.insert(name.to_string(), (lo, hi));
        self
    }

    pub fn range(&self, name: &str) -> (f64, f64) {
        self.ranges.get(name).copied().unwrap_or((-1.0, 1.0))
    }

    /// `n` seeded uniform points over the given coordinates.
    pub fn points<S: AsRef<str>>(&self, coords: &[S], n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut p = Point::new();
                for c in coords {
                    let (lo, hi) = self.range(c.as_ref());
                    let v = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
                    p.set(c.as_ref(), v);
                }
                p
            })
            .collect()
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::new()
    }
}

/// Where and how to test an identity numerically.
#[derive(Clone, Debug)]
pub struct Probe {
    pub chart: Chart,
    pub sbox: SampleBox,
    pub params: Params,
    pub count: usize,
    pub seed: u64,
    pub rel_tol: f64,
}

impl Probe {
    pub fn new(chart: Chart) -> Probe {
        Probe { chart, sbox: SampleBox::new(), params: Params::new(), count: 20, seed: 0x5eed, rel_tol: 1e-9 }
    }

    pub fn with_box(mut self, sbox: SampleBox) -> Probe {
        self.sbox = sbox;
        self
    }

    pub fn with_params(mut self, params: Params) -> Probe {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Probe {
        self.seed = seed;
        self
    }

    /// Seeded sample points where every expression in `exprs` evaluates.
    pub fn points_for(&self, exprs: &[&Expr]) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.count);
        let mut round = 0;
        while out.len() < self.count && round < 10 {
            let seed = self.seed.wrapping_add(round * 0x9e37_79b9);
            for p in self.sbox.points(self.chart.coords(), self.count, seed) {
                if out.len() == self.count {
                    break;
                }
                if exprs.iter().all(|e| e.evaluate(&p, &self.params).is_ok()) {
                    out.push(p);
                }
            }
            round += 1;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Proved by canonicalization.
    Pass,
    /// Within tolerance at every sample point.
    PointwisePass,
    Fail,
}

impl Verdict {
    pub fn ok(self) -> bool {
        self != Verdict::Fail
    }

    /// Weaker of two verdicts.
    pub fn and(self, o: Verdict) -> Verdict {
        match (self, o) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::PointwisePass, _) | (_, Verdict::PointwisePass) => Verdict::PointwisePass,
            _ => Verdict::Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::PointwisePass => "pointwise-pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ZeroReport {
    pub verdict: Verdict,
    /// Largest |value| / scale seen at the sample points.
    pub max_rel: f64,
    /// Largest |value| seen at the sample points.
    pub max_abs: f64,
    /// Point with the largest relative value.
    pub witness: Option<Point>,
    pub samples: usize,
    pub error: Option<EvalError>,
}

fn magnitude(e: &Expr, p: &Point, params: &Params) -> Result<f64, EvalError> {
    match e.node() {
        Node::Add(v) => {
            let mut s = 0.0;
            for t in v {
                s += t.evaluate(p, params)?.abs();
            }
            Ok(s)
        }
        _ => Ok(e.evaluate(p, params)?.abs()),
    }
}

/// Decide whether `e` vanishes: symbolically when possible, otherwise at seeded
/// sample points against `rel_tol * (1 + sum of |terms|)`.
pub fn check_zero(e: &Expr, probe: &Probe) -> ZeroReport {
    let pass = |verdict| ZeroReport { verdict, max_rel: 0.0, max_abs: 0.0, witness: None, samples: 0, error: None };
    if is_zero_symbolic(e) == Some(true) {
        return pass(Verdict::Pass);
    }
    let bound = e.bind(&probe.params);
    let symbolic = is_zero_symbolic(&bound);
    if symbolic == Some(true) {
        return pass(Verdict::Pass);
    }
    let pts = probe.points_for(&[&bound]);
    let mut rep = ZeroReport { verdict: Verdict::PointwisePass, max_rel: 0.0, max_abs: 0.0, witness: None, samples: 0, error: None };
    if pts.is_empty() {
        rep.verdict = Verdict::Fail;
        rep.error = probe.sbox.points(probe.chart.coords(), 1, probe.seed).first().and_then(|p| bound.evaluate(p, &probe.params).err());
        return rep;
    }
    for p in pts {
        let (v, m) = match (bound.evaluate(&p, &probe.params), magnitude(&bound, &p, &probe.params)) {
            (Ok(v), Ok(m)) => (v, m),
            (Err(err), _) | (_, Err(err)) => {
                rep.verdict = Verdict::Fail;
                rep.error = Some(err);
                rep.witness = Some(p);
                return rep;
            }
        };
        rep.samples += 1;
        let rel = v.abs() / (1.0 + m);
        if rel >= rep.max_rel {
            rep.max_rel = rel;
            rep.witness = Some(p);
        }
        rep.max_abs = rep.max_abs.max(v.abs());
    }
    if symbolic == Some(false) || rep.max_rel > probe.rel_tol {
        rep.verdict = Verdict::Fail;
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn symbolic_and_pointwise() {
        let chart = Chart::new(&["x", "y"]);
        let probe = Probe::new(chart).with_box(SampleBox::new().with("x", 0.1, 2.0));
        let p = |s: &str| parse(s, &["x", "y"], &["a"]).unwrap();
        assert_eq!(check_zero(&p("x*(x+y) - x^2 - x*y"), &probe).verdict, Verdict::Pass);
        let r = check_zero(&p("exp(x)^2 - exp(2*x)"), &probe);
        assert_eq!(r.verdict, Verdict::PointwisePass);
        assert_eq!(r.samples, 20);
        let r = check_zero(&p("x*y"), &probe);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn parameters_bind_before_deciding() {
        let chart = Chart::new(&["x"]);
        let mut params = Params::new();
        params.insert("a".into(), 1.0);
        let probe = Probe::new(chart).with_params(params);
        let e = parse("(a - 1)*x", &["x"], &["a"]).unwrap();
        assert!(check_zero(&e, &probe).verdict.ok());
    }

    #[test]
    fn points_are_reproducible() {
        let b = SampleBox::new().with("q", -2.0, 2.0);
        assert_eq!(b.points(&["q", "p"], 5, 7), b.points(&["q", "p"], 5, 7));
        for p in b.points(&["q", "p"], 50, 1) {
            let q = p.get("q").unwrap();
            assert!((-2.0..=2.0).contains(&q));
        }
    }
}
