//! Exact scalars and small dense matrices over Q and Q(i).

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
/// Gaussian rational.
pub type CQ = Complex<Q>;
pub type CMat = DMatrix<Complex64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn cq(re: Q, im: Q) -> CQ {
    Complex::new(re, im)
}

pub fn cq_real(re: Q) -> CQ {
    Complex::new(re, Q::zero())
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn cq_to_c64(z: &CQ) -> Complex64 {
    Complex64::new(q_to_f64(&z.re), q_to_f64(&z.im))
}

/// Parses `n`, `-n`, `p/q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Q::new(num, den))
}

/// Parses a Gaussian rational: a rational `p/q`, or a pair `(re,im)` of rationals.
pub fn parse_cq(s: &str) -> Option<CQ> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (a, b) = inner.split_once(',')?;
        return Some(cq(parse_q(a)?, parse_q(b)?));
    }
    Some(cq_real(parse_q(s)?))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_cq(z: &CQ) -> String {
    if z.im.is_zero() {
        fmt_q(&z.re)
    } else {
        format!("({},{})", fmt_q(&z.re), fmt_q(&z.im))
    }
}

/// Best rational approximation with denominator at most `max_den` (continued fractions).
pub fn snap_f64(x: f64, max_den: u64) -> Q {
    if !x.is_finite() {
        return Q::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    // Convergents h/k.
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let max_den = max_den as i128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den {
            // Semiconvergent check: the largest admissible t.
            let t = (max_den - k0) / k1.max(1);
            let hs = t * h1 + h0;
            let ks = t * k1 + k0;
            if ks > 0 && t > 0 {
                let cand = hs as f64 / ks as f64;
                let conv = h1 as f64 / k1 as f64;
                if (cand - x.abs()).abs() < (conv - x.abs()).abs() {
                    h1 = hs;
                    k1 = ks;
                }
            }
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return Q::zero();
    }
    let r = Q::new(BigInt::from(h1), BigInt::from(k1));
    if neg {
        -r
    } else {
        r
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Q>], nrows: usize) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !x.is_zero() {
                        s += a * x;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        QMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        QMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in 0..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(fmt_q).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Dense square-or-rectangular matrix over Q(i).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CQMatrix {
    rows: usize,
    cols: usize,
    data: Vec<CQ>,
}

impl CQMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CQMatrix { rows, cols, data: vec![CQ::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = CQ::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<CQ>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        CQMatrix { rows: r, cols: c, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[CQ] {
        &self.data
    }

    pub fn mul(&self, other: &CQMatrix) -> CQMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let p = a * b;
                        out[(i, j)] += p;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CQMatrix) -> CQMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CQMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &CQMatrix) -> CQMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CQMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &CQ) -> CQMatrix {
        let data = self.data.iter().map(|a| a * s).collect();
        CQMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_q(&self, s: &Q) -> CQMatrix {
        self.scale(&cq_real(s.clone()))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CQMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn transpose(&self) -> CQMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn conj(&self) -> CQMatrix {
        let data = self.data.iter().map(|a| a.conj()).collect();
        CQMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn trace(&self) -> CQ {
        (0..self.rows.min(self.cols)).fold(CQ::zero(), |acc, i| acc + &self[(i, i)])
    }

    /// Largest |re|,|im| over entries, as a rational (used for exact residual reports).
    pub fn max_abs_component(&self) -> Q {
        self.data
            .iter()
            .flat_map(|z| [z.re.abs(), z.im.abs()])
            .max()
            .unwrap_or_else(Q::zero)
    }

    /// Inverse by Gauss-Jordan over Q(i); `None` if singular or non-square.
    pub fn inverse(&self) -> Option<CQMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&i| !a[(i, c)].is_zero())?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let piv = CQ::one() / a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = &a[(c, j)] * &piv;
                inv[(c, j)] = &inv[(c, j)] * &piv;
            }
            for i in 0..n {
                if i != c && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    for j in 0..n {
                        let va = &a[(c, j)] * &f;
                        a[(i, j)] -= va;
                        let vi = &inv[(c, j)] * &f;
                        inv[(i, j)] -= vi;
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn det(&self) -> Option<CQ> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = CQ::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return Some(CQ::zero());
            };
            if p != c {
                a.swap_rows(c, p);
                det = -det;
            }
            let piv = a[(c, c)].clone();
            det = &det * &piv;
            let inv = CQ::one() / piv;
            for i in c + 1..n {
                if !a[(i, c)].is_zero() {
                    let f = &a[(i, c)] * &inv;
                    for j in c..n {
                        let v = &a[(c, j)] * &f;
                        a[(i, j)] -= v;
                    }
                }
            }
        }
        Some(det)
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| cq_to_c64(&self[(i, j)]))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for CQMatrix {
    type Output = CQ;
    fn index(&self, (i, j): (usize, usize)) -> &CQ {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CQMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CQ {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for CQMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_cq(&self[(i, j)])).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["0", "-3", "5/7", "-1/2"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(parse_q("4/2").unwrap(), qi(2));
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("x").is_none());
        assert_eq!(parse_cq("(1/2,-1)").unwrap(), cq(q(1, 2), qi(-1)));
        assert_eq!(fmt_cq(&cq(qi(0), qi(1))), "(0,1)");
    }

    #[test]
    fn snap_recovers_small_fractions() {
        assert_eq!(snap_f64(1.0 / 3.0, 1_000_000), q(1, 3));
        assert_eq!(snap_f64(-2.5, 1_000_000), q(-5, 2));
        assert_eq!(snap_f64(1e-14, 1_000_000), qi(0));
        assert_eq!(snap_f64(355.0 / 113.0 + 1e-13, 1000), q(355, 113));
        assert_eq!(snap_f64(std::f64::consts::PI, 10), q(22, 7));
    }

    #[test]
    fn rref_rank_and_nullspace() {
        let m = QMatrix::from_rows(&[
            vec![qi(1), qi(2), qi(3)],
            vec![qi(2), qi(4), qi(6)],
            vec![qi(0), qi(1), qi(1)],
        ]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn gaussian_inverse_and_det() {
        let i = cq(qi(0), qi(1));
        let one = CQ::one();
        let g = CQMatrix::from_rows(vec![vec![one.clone(), i.scale(q(1, 2))], vec![i.clone(), cq_real(q(1, 2))]]);
        assert_eq!(g.det().unwrap(), one);
        let inv = g.inverse().unwrap();
        assert_eq!(g.mul(&inv), CQMatrix::identity(2));
        let sing = CQMatrix::from_rows(vec![vec![one.clone(), one.clone()], vec![one.clone(), one]]);
        assert!(sing.inverse().is_none());
        assert_eq!(sing.det().unwrap(), CQ::zero());
    }
}
