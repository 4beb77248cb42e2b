//! Real Lie algebras given by exact structure constants, their elements and subspaces.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::{fmt_q, parse_q, QMatrix, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("basis index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("structure constant for ({i},{j}) must have i < j")]
    NotUpperTriangle { i: usize, j: usize },
    #[error("duplicate structure constant for ({i},{j},{k})")]
    Duplicate { i: usize, j: usize, k: usize },
    #[error("elements belong to different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),
    #[error("coefficient vector has length {got}, algebra has dimension {want}")]
    WrongLength { got: usize, want: usize },
    #[error("operation needs sl2(R), got {0}")]
    NotSl2(String),
    #[error("unknown basis label {0}")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, LieError>;

/// Finite-dimensional real Lie algebra with basis e_1..e_n and rational structure constants.
pub struct LieAlgebra {
    name: String,
    labels: Vec<String>,
    /// `table[i * dim + j]` is [e_i, e_j] in coordinates.
    table: Vec<Vec<Q>>,
    /// Summands with their coordinate offsets; empty for an algebra not built as a direct sum.
    factors: Vec<(usize, Arc<LieAlgebra>)>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra({}, dim {})", self.name, self.dim())
    }
}

impl LieAlgebra {
    /// Builds from entries `(i, j, k, c)` meaning [e_i, e_j] has coefficient c on e_k,
    /// zero-based, i < j. Omitted entries are zero; [e_j, e_i] follows by antisymmetry.
    pub fn from_entries(
        name: &str,
        labels: Vec<String>,
        entries: &[(usize, usize, usize, Q)],
    ) -> Result<Self> {
        let n = labels.len();
        let mut table = vec![vec![Q::zero(); n]; n * n];
        let mut seen = std::collections::HashSet::new();
        for (i, j, k, c) in entries {
            let (i, j, k) = (*i, *j, *k);
            for idx in [i, j, k] {
                if idx >= n {
                    return Err(LieError::IndexOutOfRange(idx));
                }
            }
            if i >= j {
                return Err(LieError::NotUpperTriangle { i, j });
            }
            if !seen.insert((i, j, k)) {
                return Err(LieError::Duplicate { i, j, k });
            }
            table[i * n + j][k] = c.clone();
            table[j * n + i][k] = -c.clone();
        }
        Ok(LieAlgebra { name: name.to_string(), labels, table, factors: Vec::new() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// [e_i, e_j] as a coordinate vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[Q] {
        &self.table[i * self.dim() + j]
    }

    /// Nonzero structure constants with i < j, in lexicographic order.
    pub fn structure_entries(&self) -> Vec<(usize, usize, usize, Q)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for (k, c) in self.bracket_basis(i, j).iter().enumerate() {
                    if !c.is_zero() {
                        out.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn bracket_coords(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() || i == j {
                    continue;
                }
                let c = xi * yj;
                for (k, t) in self.table[i * n + j].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &c * t;
                    }
                }
            }
        }
        out
    }

    /// Checks the Jacobi identity on every basis triple i < j < k.
    pub fn verify_jacobi(&self) -> JacobiReport {
        let n = self.dim();
        let mut violations = Vec::new();
        let mut checked = 0;
        let unit = |i: usize| {
            let mut v = vec![Q::zero(); n];
            v[i] = Q::one();
            v
        };
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    checked += 1;
                    let (ei, ej, ek) = (unit(i), unit(j), unit(k));
                    let a = self.bracket_coords(&ei, self.bracket_basis(j, k));
                    let b = self.bracket_coords(&ej, self.bracket_basis(k, i));
                    let c = self.bracket_coords(&ek, self.bracket_basis(i, j));
                    if a.iter().zip(&b).zip(&c).any(|((a, b), c)| !(a + b + c).is_zero()) {
                        violations.push((i, j, k));
                    }
                }
            }
        }
        JacobiReport { triples_checked: checked, violations }
    }

    /// Matrix of ad(x) in the basis (columns are images of basis vectors).
    pub fn ad_matrix_coords(&self, x: &[Q]) -> QMatrix {
        let n = self.dim();
        let cols: Vec<Vec<Q>> = (0..n)
            .map(|j| {
                let mut e = vec![Q::zero(); n];
                e[j] = Q::one();
                self.bracket_coords(x, &e)
            })
            .collect();
        QMatrix::from_columns(&cols, n)
    }

    /// Serializes to the line format accepted by [`parse_algebra_text`].
    pub fn to_text(&self) -> String {
        let mut s = format!("name {}\ndim {}\nlabels {}\n", self.name, self.dim(), self.labels.join(" "));
        for (i, j, k, c) in self.structure_entries() {
            s.push_str(&format!("{} {} {} {}\n", i + 1, j + 1, k + 1, fmt_q(&c)));
        }
        s
    }

    /// Direct summands (the algebra itself when it is not a sum).
    pub fn factors(self: &Arc<Self>) -> Vec<(usize, Arc<LieAlgebra>)> {
        if self.factors.is_empty() {
            vec![(0, self.clone())]
        } else {
            self.factors.clone()
        }
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len().max(1)
    }

    pub fn zero(self: &Arc<Self>) -> Element {
        Element { alg: self.clone(), coeffs: vec![Q::zero(); self.dim()] }
    }

    pub fn basis(self: &Arc<Self>, i: usize) -> Element {
        let mut e = self.zero();
        e.coeffs[i] = Q::one();
        e
    }

    pub fn element(self: &Arc<Self>, coeffs: Vec<Q>) -> Result<Element> {
        if coeffs.len() != self.dim() {
            return Err(LieError::WrongLength { got: coeffs.len(), want: self.dim() });
        }
        Ok(Element { alg: self.clone(), coeffs })
    }

    pub fn by_label(self: &Arc<Self>, label: &str) -> Result<Element> {
        let i = self.label_index(label).ok_or_else(|| LieError::UnknownLabel(label.to_string()))?;
        Ok(self.basis(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiReport {
    pub triples_checked: usize,
    /// Zero-based basis triples where the Jacobi sum is nonzero.
    pub violations: Vec<(usize, usize, usize)>,
}

impl JacobiReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Parses the structure-constant file format:
///
/// ```text
/// name sl2r
/// dim 3
/// labels e1 e2 e3
/// 1 2 3 2
/// ```
///
/// Bracket lines are `i j k c` (one-based, i < j) meaning [e_i, e_j] has coefficient c on e_k.
pub fn parse_algebra_text(text: &str) -> Result<LieAlgebra> {
    let mut name = None;
    let mut dim = None;
    let mut labels: Option<Vec<String>> = None;
    let mut entries = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let perr = |msg: String| LieError::Parse { line, msg };
        match toks[0] {
            "name" => name = Some(toks.get(1).ok_or_else(|| perr("missing name".into()))?.to_string()),
            "dim" => {
                let d: usize = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr("bad dim".into()))?;
                dim = Some(d);
            }
            "labels" => labels = Some(toks[1..].iter().map(|s| s.to_string()).collect()),
            _ => {
                if toks.len() != 4 {
                    return Err(perr(format!("expected `i j k c`, got `{body}`")));
                }
                let idx = |t: &str| -> Result<usize> {
                    let v: usize = t.parse().map_err(|_| perr(format!("bad index `{t}`")))?;
                    if v == 0 {
                        return Err(perr("indices are one-based".into()));
                    }
                    Ok(v - 1)
                };
                let c = parse_q(toks[3]).ok_or_else(|| perr(format!("bad coefficient `{}`", toks[3])))?;
                let (i, j, k) = (idx(toks[0])?, idx(toks[1])?, idx(toks[2])?);
                if i >= j {
                    return Err(LieError::NotUpperTriangle { i, j });
                }
                entries.push((i, j, k, c));
            }
        }
    }
    let name = name.ok_or(LieError::Parse { line: 0, msg: "missing `name`".into() })?;
    let dim = dim.ok_or(LieError::Parse { line: 0, msg: "missing `dim`".into() })?;
    let labels = labels.unwrap_or_else(|| (1..=dim).map(|i| format!("e{i}")).collect());
    if labels.len() != dim {
        return Err(LieError::Parse { line: 0, msg: format!("{} labels for dim {dim}", labels.len()) });
    }
    LieAlgebra::from_entries(&name, labels, &entries)
}

/// Direct sum; nested sums are flattened so labels read `k:label` with k the summand position.
pub fn direct_sum(parts: &[Arc<LieAlgebra>]) -> Arc<LieAlgebra> {
    let mut flat: Vec<Arc<LieAlgebra>> = Vec::new();
    for p in parts {
        for (_, f) in p.factors() {
            flat.push(f);
        }
    }
    let n: usize = flat.iter().map(|f| f.dim()).sum();
    let mut table = vec![vec![Q::zero(); n]; n * n];
    let mut labels = Vec::with_capacity(n);
    let mut factors = Vec::new();
    let mut off = 0;
    for (fi, f) in flat.iter().enumerate() {
        let d = f.dim();
        for i in 0..d {
            labels.push(format!("{}:{}", fi + 1, f.labels[i]));
            for j in 0..d {
                for (k, c) in f.bracket_basis(i, j).iter().enumerate() {
                    table[(off + i) * n + off + j][off + k] = c.clone();
                }
            }
        }
        factors.push((off, f.clone()));
        off += d;
    }
    let name = flat.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join("+");
    Arc::new(LieAlgebra { name, labels, table, factors })
}

/// Same algebra: identical handle, or equal name, labels and structure constants.
pub fn same_algebra(a: &Arc<LieAlgebra>, b: &Arc<LieAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || (a.name == b.name && a.labels == b.labels && a.table == b.table)
}

fn same_alg(a: &Arc<LieAlgebra>, b: &Arc<LieAlgebra>) -> Result<()> {
    if same_algebra(a, b) {
        Ok(())
    } else {
        Err(LieError::AlgebraMismatch(a.name.clone(), b.name.clone()))
    }
}

#[derive(Clone)]
pub struct Element {
    alg: Arc<LieAlgebra>,
    coeffs: Vec<Q>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.alg, &other.alg) && self.coeffs == other.coeffs
    }
}

impl Element {
    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn bracket(&self, other: &Element) -> Result<Element> {
        same_alg(&self.alg, &other.alg)?;
        Ok(Element { alg: self.alg.clone(), coeffs: self.alg.bracket_coords(&self.coeffs, &other.coeffs) })
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        same_alg(&self.alg, &other.alg)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Element { alg: self.alg.clone(), coeffs })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        same_alg(&self.alg, &other.alg)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Element { alg: self.alg.clone(), coeffs })
    }

    pub fn scale(&self, s: &Q) -> Element {
        Element { alg: self.alg.clone(), coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn neg(&self) -> Element {
        Element { alg: self.alg.clone(), coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn ad_matrix(&self) -> QMatrix {
        self.alg.ad_matrix_coords(&self.coeffs)
    }

    /// Component in summand `k` of a direct sum.
    pub fn project(&self, k: usize) -> Element {
        let (off, f) = self.alg.factors()[k].clone();
        let coeffs = self.coeffs[off..off + f.dim()].to_vec();
        Element { alg: f, coeffs }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, l) in self.coeffs.iter().zip(&self.alg.labels) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            let sign = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            if a.is_one() {
                write!(f, "{sign}{l}")?;
            } else {
                write!(f, "{sign}{} {l}", fmt_q(&a))?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Embeds an element of summand `k` into the direct sum `sum`.
pub fn embed(sum: &Arc<LieAlgebra>, k: usize, x: &Element) -> Result<Element> {
    let (off, f) = sum.factors()[k].clone();
    same_alg(&f, &x.alg)?;
    let mut e = sum.zero();
    e.coeffs[off..off + f.dim()].clone_from_slice(&x.coeffs);
    Ok(e)
}

/// Trace form tr(ad x ad y).
pub fn killing_form(x: &Element, y: &Element) -> Result<Q> {
    same_alg(&x.alg, &y.alg)?;
    Ok(x.ad_matrix().mul(&y.ad_matrix()).trace())
}

fn require_sl2r(x: &Element) -> Result<()> {
    if x.alg.name() == "sl2r" && x.alg.dim() == 3 {
        Ok(())
    } else {
        Err(LieError::NotSl2(x.alg.name().to_string()))
    }
}

/// Trace form on sl2(R) divided by 8: lambda1^2 + lambda2^2 - lambda3^2.
pub fn normalized_sl2_form(x: &Element) -> Result<Q> {
    require_sl2r(x)?;
    Ok(killing_form(x, x)? / Q::from_integer(8.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sl2Class {
    Zero,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Conjugacy type of a nonzero sl2(R) element from the sign of the normalized form.
pub fn classify_sl2(x: &Element) -> Result<Sl2Class> {
    let v = normalized_sl2_form(x)?;
    Ok(if x.is_zero() {
        Sl2Class::Zero
    } else if v.is_negative() {
        Sl2Class::Elliptic
    } else if v.is_zero() {
        Sl2Class::Parabolic
    } else {
        Sl2Class::Hyperbolic
    })
}

/// Linear subspace in canonical form (RREF basis rows).
#[derive(Clone)]
pub struct Subspace {
    alg: Arc<LieAlgebra>,
    rref: QMatrix,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.basis().iter().map(|e| e.to_string()).collect();
        write!(f, "<{}>", b.join(", "))
    }
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.alg, &other.alg) && self.rref == other.rref
    }
}

impl Subspace {
    pub fn from_vectors(alg: &Arc<LieAlgebra>, vecs: &[Vec<Q>]) -> Result<Subspace> {
        let n = alg.dim();
        for v in vecs {
            if v.len() != n {
                return Err(LieError::WrongLength { got: v.len(), want: n });
            }
        }
        let m = if vecs.is_empty() { QMatrix::zeros(0, n) } else { QMatrix::from_rows(vecs) };
        let (r, pivots) = m.rref();
        let rows: Vec<Vec<Q>> = (0..pivots.len()).map(|i| r.row(i)).collect();
        let rref = if rows.is_empty() { QMatrix::zeros(0, n) } else { QMatrix::from_rows(&rows) };
        Ok(Subspace { alg: alg.clone(), rref, pivots })
    }

    pub fn span(alg: &Arc<LieAlgebra>, gens: &[Element]) -> Result<Subspace> {
        for g in gens {
            same_alg(alg, &g.alg)?;
        }
        let vecs: Vec<Vec<Q>> = gens.iter().map(|g| g.coeffs.clone()).collect();
        Subspace::from_vectors(alg, &vecs)
    }

    pub fn zero(alg: &Arc<LieAlgebra>) -> Subspace {
        Subspace { alg: alg.clone(), rref: QMatrix::zeros(0, alg.dim()), pivots: Vec::new() }
    }

    pub fn full(alg: &Arc<LieAlgebra>) -> Subspace {
        let vecs: Vec<Vec<Q>> = (0..alg.dim()).map(|i| alg.basis(i).coeffs).collect();
        Subspace::from_vectors(alg, &vecs).expect("lengths match")
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis(&self) -> Vec<Element> {
        (0..self.dim()).map(|i| Element { alg: self.alg.clone(), coeffs: self.rref.row(i) }).collect()
    }

    pub fn contains_coords(&self, v: &[Q]) -> bool {
        let mut r = v.to_vec();
        for (row, &p) in self.pivots.iter().enumerate() {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for j in 0..r.len() {
                let b = &self.rref[(row, j)];
                if !b.is_zero() {
                    r[j] -= &f * b;
                }
            }
        }
        r.iter().all(Zero::is_zero)
    }

    pub fn contains(&self, x: &Element) -> Result<bool> {
        same_alg(&self.alg, &x.alg)?;
        Ok(self.contains_coords(&x.coeffs))
    }

    pub fn contains_space(&self, other: &Subspace) -> Result<bool> {
        same_alg(&self.alg, &other.alg)?;
        Ok(other.basis().iter().all(|b| self.contains_coords(&b.coeffs)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        same_alg(&self.alg, &other.alg)?;
        let mut v: Vec<Vec<Q>> = (0..self.dim()).map(|i| self.rref.row(i)).collect();
        v.extend((0..other.dim()).map(|i| other.rref.row(i)));
        Subspace::from_vectors(&self.alg, &v)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        same_alg(&self.alg, &other.alg)?;
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return Ok(Subspace::zero(&self.alg));
        }
        let n = self.alg.dim();
        // Solve sum_i s_i A_i = sum_j t_j B_j.
        let mut m = QMatrix::zeros(n, a + b);
        for i in 0..a {
            for r in 0..n {
                m[(r, i)] = self.rref[(i, r)].clone();
            }
        }
        for j in 0..b {
            for r in 0..n {
                m[(r, a + j)] = -other.rref[(j, r)].clone();
            }
        }
        let vecs: Vec<Vec<Q>> = m
            .nullspace()
            .iter()
            .map(|s| {
                let mut v = vec![Q::zero(); n];
                for (i, si) in s[..a].iter().enumerate() {
                    if si.is_zero() {
                        continue;
                    }
                    for (r, vr) in v.iter_mut().enumerate() {
                        *vr += si * &self.rref[(i, r)];
                    }
                }
                v
            })
            .collect();
        Subspace::from_vectors(&self.alg, &vecs)
    }

    /// Span of all brackets [a, b] with a in self, b in other.
    pub fn bracket_span(&self, other: &Subspace) -> Result<Subspace> {
        same_alg(&self.alg, &other.alg)?;
        let mut v = Vec::new();
        for x in self.basis() {
            for y in other.basis() {
                v.push(self.alg.bracket_coords(&x.coeffs, &y.coeffs));
            }
        }
        Subspace::from_vectors(&self.alg, &v)
    }

    pub fn is_subalgebra(&self) -> bool {
        let b = self.basis();
        for (i, x) in b.iter().enumerate() {
            for y in &b[i + 1..] {
                if !self.contains_coords(&self.alg.bracket_coords(&x.coeffs, &y.coeffs)) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether self is an ideal of the subalgebra `parent` (self contained in parent, [parent, self] in self).
    pub fn is_ideal_of(&self, parent: &Subspace) -> Result<bool> {
        if !parent.contains_space(self)? {
            return Ok(false);
        }
        Ok(self.contains_space(&parent.bracket_span(self)?)?)
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Lie subalgebra generated by self.
    pub fn closure(&self) -> Subspace {
        let mut cur = self.clone();
        loop {
            let next = cur.sum(&cur.bracket_span(&cur).expect("same algebra")).expect("same algebra");
            if next.dim() == cur.dim() {
                return cur;
            }
            cur = next;
        }
    }

    /// Image under the projection onto summand `k`.
    pub fn project(&self, k: usize) -> Subspace {
        let (_, f) = self.alg.factors()[k].clone();
        let v: Vec<Vec<Q>> = self.basis().iter().map(|e| e.project(k).coeffs).collect();
        Subspace::from_vectors(&f, &v).expect("lengths match")
    }
}

/// Lie subalgebra generated by the given elements.
pub fn span_closure(alg: &Arc<LieAlgebra>, gens: &[Element]) -> Result<Subspace> {
    Ok(Subspace::span(alg, gens)?.closure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    pub(crate) fn sl2r() -> Arc<LieAlgebra> {
        let e = |s: &str| s.to_string();
        Arc::new(
            LieAlgebra::from_entries(
                "sl2r",
                vec![e("e1"), e("e2"), e("e3")],
                &[(0, 1, 2, qi(2)), (0, 2, 1, qi(2)), (1, 2, 0, qi(-2))],
            )
            .unwrap(),
        )
    }

    #[test]
    fn sl2_brackets_and_form() {
        let g = sl2r();
        let (e1, e2, e3) = (g.basis(0), g.basis(1), g.basis(2));
        assert_eq!(e1.bracket(&e2).unwrap(), e3.scale(&qi(2)));
        assert_eq!(e2.bracket(&e1).unwrap(), e3.scale(&qi(-2)));
        assert_eq!(killing_form(&e1, &e1).unwrap(), qi(8));
        assert_eq!(killing_form(&e3, &e3).unwrap(), qi(-8));
        assert_eq!(normalized_sl2_form(&e3).unwrap(), qi(-1));
        let p = e2.add(&e3).unwrap();
        assert_eq!(classify_sl2(&p).unwrap(), Sl2Class::Parabolic);
        assert_eq!(classify_sl2(&e1).unwrap(), Sl2Class::Hyperbolic);
        assert_eq!(classify_sl2(&e3).unwrap(), Sl2Class::Elliptic);
        assert!(g.verify_jacobi().ok());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let g = sl2r();
        let back = parse_algebra_text(&g.to_text()).unwrap();
        assert_eq!(back.structure_entries(), g.structure_entries());
        assert_eq!(
            parse_algebra_text("name x\ndim 2\n2 1 1 1\n").unwrap_err(),
            LieError::NotUpperTriangle { i: 1, j: 0 }
        );
        assert!(matches!(parse_algebra_text("name x\ndim 2\n1 3 1 1\n"), Err(LieError::IndexOutOfRange(2))));
        assert!(matches!(parse_algebra_text("dim 2\n"), Err(LieError::Parse { .. })));
    }

    #[test]
    fn jacobi_catches_corruption() {
        let e = |s: &str| s.to_string();
        let bad = LieAlgebra::from_entries(
            "bad",
            vec![e("e1"), e("e2"), e("e3")],
            &[(0, 1, 2, qi(2)), (0, 1, 0, qi(1)), (0, 2, 1, qi(2)), (1, 2, 0, qi(-2))],
        )
        .unwrap();
        assert!(!bad.verify_jacobi().ok());
    }

    #[test]
    fn subspace_ops() {
        let g = sl2r();
        let (e1, e2, e3) = (g.basis(0), g.basis(1), g.basis(2));
        let a = Subspace::span(&g, &[e1.clone(), e2.clone()]).unwrap();
        let b = Subspace::span(&g, &[e2.add(&e3).unwrap()]).unwrap();
        assert!(a.intersect(&b).unwrap().is_zero());
        assert_eq!(a.sum(&b).unwrap().dim(), 3);
        let c = Subspace::span(&g, &[e1.clone(), e2.add(&e3).unwrap()]).unwrap();
        assert_eq!(c.intersect(&a).unwrap(), Subspace::span(&g, &[e1.clone()]).unwrap());
        assert!(c.is_subalgebra());
        assert!(!a.is_subalgebra());
        assert_eq!(a.closure().dim(), 3);
        assert!(b.is_ideal_of(&c).unwrap());
        assert_eq!(span_closure(&g, &[e1, e2]).unwrap(), Subspace::full(&g));
    }

    #[test]
    fn direct_sum_is_block_diagonal() {
        let g = sl2r();
        let s = direct_sum(&[g.clone(), g.clone()]);
        let s3 = direct_sum(&[s.clone(), g.clone()]);
        assert_eq!(s3.dim(), 9);
        assert_eq!(s3.factor_count(), 3);
        assert_eq!(s3.labels()[4], "2:e2");
        let x = embed(&s, 0, &g.basis(0)).unwrap();
        let y = embed(&s, 1, &g.basis(1)).unwrap();
        assert!(x.bracket(&y).unwrap().is_zero());
        assert!(s3.verify_jacobi().ok());
        assert!(matches!(g.basis(0).bracket(&x), Err(LieError::AlgebraMismatch(..))));
    }
}
