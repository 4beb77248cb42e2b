//! Record syntax of catalog files and the expression language for algebra elements.
//!
//! A record is a header line `kind name` followed by indented `key: value` lines; `#` starts a comment.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::CatalogError;
use crate::exact::{cq, cq_real, parse_cq, CQMatrix, CQ, Q};
use crate::liealg::{Element, LieAlgebra};

#[derive(Clone, Debug)]
pub struct Record {
    pub kind: String,
    pub name: String,
    pub line: usize,
    pub fields: Vec<(String, String, usize)>,
}

impl Record {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (&'a str, usize)> + 'a {
        self.fields.iter().filter(move |(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.fields.iter().find(|(k, _, _)| k == key).map_or(self.line, |f| f.2)
    }
}

fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(i) => &raw[..i],
        None => raw,
    }
}

pub fn parse_records(file: &str, text: &str) -> Result<Vec<Record>, CatalogError> {
    let mut out: Vec<Record> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let err = |msg: String| CatalogError::Parse { file: file.into(), line, msg };
        if body.starts_with(char::is_whitespace) {
            let rec = out.last_mut().ok_or_else(|| err("field before any record header".into()))?;
            let (k, v) = body.trim().split_once(':').ok_or_else(|| err(format!("expected `key: value`, got `{}`", body.trim())))?;
            rec.fields.push((k.trim().to_string(), v.trim().to_string(), line));
        } else {
            let mut it = body.split_whitespace();
            let kind = it.next().unwrap_or_default().to_string();
            let name = it.next().ok_or_else(|| err(format!("record `{kind}` has no name")))?.to_string();
            if it.next().is_some() {
                return Err(err("record header must be `kind name`".into()));
            }
            out.push(Record { kind, name, line, fields: Vec::new() });
        }
    }
    Ok(out)
}

/// Parameter values substituted into expressions.
pub type Env = BTreeMap<String, Q>;

#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    Free,
    Positive,
    Nonzero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub constraint: Constraint,
}

/// `a>0, b, c!=0`
pub fn parse_params(s: &str) -> Result<Vec<Param>, String> {
    let mut out = Vec::new();
    for p in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, constraint) = if let Some(n) = p.strip_suffix(">0") {
            (n.trim(), Constraint::Positive)
        } else if let Some(n) = p.strip_suffix("!=0") {
            (n.trim(), Constraint::Nonzero)
        } else {
            (p, Constraint::Free)
        };
        if name.is_empty() || name == "i" || !name.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(format!("bad parameter `{p}`"));
        }
        out.push(Param { name: name.into(), constraint });
    }
    Ok(out)
}

/// Cartesian product of the sample values {-2, -1, 0, 1, 2} allowed for each parameter.
pub fn param_samples(params: &[Param]) -> Vec<Env> {
    let mut envs = vec![Env::new()];
    for p in params {
        let vals: Vec<i64> = (-2..=2)
            .filter(|v| match p.constraint {
                Constraint::Free => true,
                Constraint::Positive => *v > 0,
                Constraint::Nonzero => *v != 0,
            })
            .collect();
        envs = envs
            .into_iter()
            .flat_map(|e| {
                vals.iter().map(move |v| {
                    let mut e = e.clone();
                    e.insert(p.name.clone(), Q::from_integer((*v).into()));
                    e
                })
            })
            .collect();
    }
    envs
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let n: String = cs[st..i].iter().collect();
            out.push(Tok::Num(Q::from_integer(n.parse().map_err(|_| format!("bad number `{n}`"))?)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Ast {
    Num(Q),
    Ident(String),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Tuple(Vec<Ast>),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

fn is_number(a: &Ast) -> bool {
    match a {
        Ast::Num(_) => true,
        Ast::Neg(x) => is_number(x),
        _ => false,
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ast, String> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Bin('+', Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Bin('-', Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, String> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Bin('*', Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Ast::Bin('/', Box::new(lhs), Box::new(self.unary()?));
            } else if is_number(&lhs) && matches!(self.toks.get(self.pos), Some(Tok::Ident(_))) {
                // `3 e2`, as elements print themselves
                lhs = Ast::Bin('*', Box::new(lhs), Box::new(self.atom()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, String> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ast, String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Ast::Num(q))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Ast::Ident(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let first = self.expr()?;
                let mut items = vec![first];
                while self.eat(',') {
                    items.push(self.expr()?);
                }
                if !self.eat(')') {
                    return Err("missing `)`".into());
                }
                Ok(if items.len() == 1 { items.pop().unwrap() } else { Ast::Tuple(items) })
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn parse_ast(s: &str) -> Result<Ast, String> {
    let mut p = Parser { toks: tokenize(s)?, pos: 0 };
    let a = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input in `{s}`"));
    }
    Ok(a)
}

#[derive(Clone, Debug)]
enum Val {
    Scalar(CQ),
    Vector(Vec<Q>),
}

/// Evaluation context: an algebra, with multiplication by i on coordinates where the labels allow it.
struct Ctx<'a> {
    alg: &'a Arc<LieAlgebra>,
    env: &'a Env,
}

/// `i * e_j = sign * e_k` from the labels `X` / `iX`.
fn i_map(alg: &LieAlgebra) -> Vec<Option<(usize, bool)>> {
    alg.labels()
        .iter()
        .map(|l| {
            if let Some(k) = alg.label_index(&format!("i{l}")) {
                Some((k, true))
            } else {
                l.strip_prefix('i').and_then(|r| alg.label_index(r)).map(|k| (k, false))
            }
        })
        .collect()
}

fn times_i(alg: &LieAlgebra, v: &[Q]) -> Result<Vec<Q>, String> {
    let map = i_map(alg);
    let mut out = vec![Q::zero(); v.len()];
    for (j, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (k, plus) = map[j].ok_or_else(|| format!("`i * {}` is not a basis label", alg.labels()[j]))?;
        out[k] += if plus { c.clone() } else { -c.clone() };
    }
    Ok(out)
}

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.alg.dim()
    }

    fn vector(&self, v: Val) -> Result<Vec<Q>, String> {
        match v {
            Val::Vector(v) => Ok(v),
            Val::Scalar(z) if z.is_zero() => Ok(vec![Q::zero(); self.dim()]),
            Val::Scalar(_) => Err("expected an algebra element, got a nonzero scalar".into()),
        }
    }

    fn scale(&self, z: &CQ, v: &[Q]) -> Result<Vec<Q>, String> {
        let mut out: Vec<Q> = v.iter().map(|c| c * &z.re).collect();
        if !z.im.is_zero() {
            for (o, c) in out.iter_mut().zip(times_i(self.alg, v)?) {
                *o += c * &z.im;
            }
        }
        Ok(out)
    }

    fn eval(&self, a: &Ast) -> Result<Val, String> {
        Ok(match a {
            Ast::Num(q) => Val::Scalar(cq_real(q.clone())),
            Ast::Ident(s) if s == "i" => Val::Scalar(cq(Q::zero(), Q::one())),
            Ast::Ident(s) => {
                if let Some(q) = self.env.get(s) {
                    Val::Scalar(cq_real(q.clone()))
                } else if self.alg.factor_count() > 1 {
                    return Err(format!("label `{s}` in a direct sum; use tuple notation"));
                } else {
                    let k = self.alg.label_index(s).ok_or_else(|| format!("unknown label or parameter `{s}`"))?;
                    let mut v = vec![Q::zero(); self.dim()];
                    v[k] = Q::one();
                    Val::Vector(v)
                }
            }
            Ast::Neg(x) => match self.eval(x)? {
                Val::Scalar(z) => Val::Scalar(-z),
                Val::Vector(v) => Val::Vector(v.into_iter().map(|c| -c).collect()),
            },
            Ast::Tuple(items) => {
                let factors = self.alg.factors();
                if factors.len() != items.len() || factors.len() < 2 {
                    return Err(format!("tuple of {} entries for an algebra with {} summands", items.len(), factors.len()));
                }
                let mut v = Vec::with_capacity(self.dim());
                for ((_, f), it) in factors.iter().zip(items) {
                    let sub = Ctx { alg: f, env: self.env };
                    let x = sub.eval(it)?;
                    v.extend(sub.vector(x)?);
                }
                Val::Vector(v)
            }
            Ast::Bin(op, l, r) => {
                let (l, r) = (self.eval(l)?, self.eval(r)?);
                match (op, l, r) {
                    ('+', Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(a + b),
                    ('-', Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(a - b),
                    ('*', Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(a * b),
                    ('/', Val::Scalar(a), Val::Scalar(b)) => {
                        if b.is_zero() {
                            return Err("division by zero".into());
                        }
                        Val::Scalar(a / b)
                    }
                    ('*', Val::Scalar(z), Val::Vector(v)) | ('*', Val::Vector(v), Val::Scalar(z)) => Val::Vector(self.scale(&z, &v)?),
                    ('/', Val::Vector(v), Val::Scalar(z)) => {
                        if z.is_zero() {
                            return Err("division by zero".into());
                        }
                        Val::Vector(self.scale(&(cq_real(Q::one()) / z), &v)?)
                    }
                    (op @ ('+' | '-'), a, b) => {
                        let (a, b) = (self.vector(a)?, self.vector(b)?);
                        let s = if *op == '+' { Q::one() } else { -Q::one() };
                        Val::Vector(a.into_iter().zip(b).map(|(x, y)| x + y * &s).collect())
                    }
                    (op, _, _) => return Err(format!("operator `{op}` not defined for these operands")),
                }
            }
        })
    }
}

/// Evaluates one element expression.
pub fn eval_element(alg: &Arc<LieAlgebra>, env: &Env, s: &str) -> Result<Element, String> {
    let ast = parse_ast(s)?;
    let ctx = Ctx { alg, env };
    let v = ctx.eval(&ast)?;
    let v = ctx.vector(v)?;
    alg.element(v).map_err(|e| e.to_string())
}

/// Splits on commas outside parentheses.
pub fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Names used in an expression that are not labels of `alg` or its summands.
pub fn free_names(alg: &Arc<LieAlgebra>, s: &str) -> Vec<String> {
    let labels: Vec<String> = alg.factors().iter().flat_map(|(_, f)| f.labels().to_vec()).collect();
    tokenize(s)
        .unwrap_or_default()
        .into_iter()
        .filter_map(|t| match t {
            Tok::Ident(n) if n != "i" && !labels.contains(&n) => Some(n),
            _ => None,
        })
        .collect()
}

/// One matrix `a b ; c d`, or `I` for the identity of size `n`.
pub fn parse_matrix(s: &str, n: usize) -> Result<CQMatrix, String> {
    if s.trim() == "I" {
        return Ok(CQMatrix::identity(n));
    }
    let rows: Vec<Vec<CQ>> = s
        .split(';')
        .map(|r| r.split_whitespace().map(parse_cq).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()
        .ok_or_else(|| format!("bad matrix entry in `{s}`"))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("matrix `{s}` is not {n}x{n}"));
    }
    Ok(CQMatrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;
    use crate::liealg::{direct_sum, parse_algebra_text};

    fn sl2c() -> Arc<LieAlgebra> {
        Arc::new(parse_algebra_text(include_str!("../../catalog/algebras/sl2c.alg")).unwrap())
    }

    fn sl2r() -> Arc<LieAlgebra> {
        Arc::new(parse_algebra_text(include_str!("../../catalog/algebras/sl2r.alg")).unwrap())
    }

    #[test]
    fn complex_scalars_use_i_labels() {
        let a = sl2c();
        let env = Env::new();
        let x = eval_element(&a, &env, "i*(e2+e3)").unwrap();
        assert_eq!(x, eval_element(&a, &env, "ie2 + ie3").unwrap());
        let y = eval_element(&a, &env, "i*ie1").unwrap();
        assert_eq!(y, eval_element(&a, &env, "-e1").unwrap());
        let mut env = Env::new();
        env.insert("r".into(), qi(2));
        let z = eval_element(&a, &env, "(r*i - 1)*e1").unwrap();
        assert_eq!(z.coeffs(), &[qi(-1), qi(0), qi(0), qi(2), qi(0), qi(0)]);
    }

    #[test]
    fn tuples_in_direct_sums() {
        let s = direct_sum(&[sl2c(), sl2r()]);
        let x = eval_element(&s, &Env::new(), "(e2+e3, 0) + 2*(0, e1)").unwrap();
        assert_eq!(x.coeffs()[1], qi(1));
        assert_eq!(x.coeffs()[6], qi(2));
        assert!(eval_element(&s, &Env::new(), "e1").is_err());
        assert!(eval_element(&sl2r(), &Env::new(), "i*e1").is_err());
    }

    #[test]
    fn records_and_samples() {
        let r = parse_records("t", "# c\nwitness w1\n  g: 1 0 ; 0 1 # x\n  cite: Lemma 9\n").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].get("cite"), Some("Lemma 9"));
        assert_eq!(r[0].get("g"), Some("1 0 ; 0 1"));
        let ps = parse_params("a>0, b").unwrap();
        assert_eq!(param_samples(&ps).len(), 10);
        assert_eq!(split_top("(a, b), c"), vec!["(a, b)", "c"]);
    }

    proptest::proptest! {
        #[test]
        fn complex_coefficients_evaluate_linearly(re in proptest::collection::vec(-5i64..5, 3), im in proptest::collection::vec(-5i64..5, 3)) {
            let a = sl2c();
            let env = Env::new();
            let text: Vec<String> =
                (0..3).map(|k| format!("({} + {}*i)*e{}", re[k], im[k], k + 1)).collect();
            let x = eval_element(&a, &env, &text.join(" + ")).unwrap();
            let want: Vec<Q> = re.iter().chain(&im).map(|&c| qi(c)).collect();
            proptest::prop_assert_eq!(x.coeffs(), &want[..]);
        }

        #[test]
        fn display_round_trips(c in proptest::collection::vec(-7i64..7, 6)) {
            let a = sl2c();
            let x = a.element(c.iter().map(|&v| qi(v)).collect()).unwrap();
            let text = if x.is_zero() { "0".to_string() } else { x.to_string() };
            proptest::prop_assert_eq!(eval_element(&a, &Env::new(), &text).unwrap(), x);
        }
    }
}
