//! Faithful matrix representations, pullback of matrices to coordinates, and group-level tools.

mod expm;
mod group;
mod stabilizer;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

pub use expm::{expm, logm_hpd, max_abs, polar, polar_svd, sqrtm_hpd};
pub use group::{format_complex, format_matrix, GroupElement, GroupKind};
pub use stabilizer::{coset_equal, BorelVariant, StabilizerFamily};

use crate::exact::{parse_cq, q_to_f64, CMat, CQMatrix, QMatrix, Q};
use crate::liealg::{direct_sum, Element, LieAlgebra, LieError};

/// Default bound on the pullback residual.
pub const PULLBACK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("representation is for `{got}`, expected `{want}`")]
    AlgebraMismatch { got: String, want: String },
    #[error("no matrix given for basis element {0}")]
    MissingLabel(String),
    #[error("matrix is not in the image of the representation (residual {residual:e})")]
    PullbackResidual { residual: f64 },
    #[error("block shape does not match the representation")]
    Shape,
    #[error(transparent)]
    Lie(#[from] LieError),
}

#[derive(Clone, Debug)]
pub struct RepBlock {
    pub kind: GroupKind,
    /// First coordinate of this block's summand.
    pub offset: usize,
    /// Matrices of the summand's basis elements.
    pub mats: Vec<CQMatrix>,
}

impl RepBlock {
    pub fn size(&self) -> usize {
        self.kind.size()
    }
}

/// Representation of a (possibly direct-sum) algebra as block-diagonal complex matrices.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    alg: Arc<LieAlgebra>,
    blocks: Vec<RepBlock>,
    float_mats: Vec<Vec<CMat>>,
    /// Least-squares inverse of the coordinate map into stacked real/imaginary entries.
    pinv: DMatrix<f64>,
    design: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepReport {
    pub pairs_checked: usize,
    /// Largest |re|, |im| of rho([x,y]) - [rho x, rho y] over basis pairs; exact.
    pub max_residual: Q,
    pub violations: Vec<(usize, usize)>,
    pub injective: bool,
}

impl RepReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.injective
    }
}

/// Order of conjugation in Ad.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Convention {
    /// x -> g x g^{-1}
    Forward,
    /// x -> g^{-1} x g
    Inverse,
}

impl MatrixRep {
    pub fn new(alg: &Arc<LieAlgebra>, blocks: Vec<RepBlock>) -> Result<MatrixRep, RepError> {
        let mut covered = 0;
        for b in &blocks {
            if b.offset != covered {
                return Err(RepError::Shape);
            }
            for m in &b.mats {
                if m.nrows() != b.size() || m.ncols() != b.size() {
                    return Err(RepError::Shape);
                }
            }
            covered += b.mats.len();
        }
        if covered != alg.dim() {
            return Err(RepError::Shape);
        }
        let float_mats: Vec<Vec<CMat>> = blocks.iter().map(|b| b.mats.iter().map(|m| m.to_cmat()).collect()).collect();
        let rows: usize = blocks.iter().map(|b| 2 * b.size() * b.size()).sum();
        let mut design = DMatrix::<f64>::zeros(rows, alg.dim());
        let mut r0 = 0;
        for (b, fm) in blocks.iter().zip(&float_mats) {
            let n = b.size();
            for (k, m) in fm.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        design[(r0 + 2 * (i * n + j), b.offset + k)] = m[(i, j)].re;
                        design[(r0 + 2 * (i * n + j) + 1, b.offset + k)] = m[(i, j)].im;
                    }
                }
            }
            r0 += 2 * n * n;
        }
        let pinv = design.clone().pseudo_inverse(1e-12).map_err(|_| RepError::Shape)?;
        Ok(MatrixRep { alg: alg.clone(), blocks, float_mats, pinv, design })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn blocks(&self) -> &[RepBlock] {
        &self.blocks
    }

    pub fn kinds(&self) -> Vec<GroupKind> {
        self.blocks.iter().map(|b| b.kind).collect()
    }

    /// Representation of a direct sum, built from representations of the summands.
    pub fn direct_sum(parts: &[&MatrixRep]) -> Result<MatrixRep, RepError> {
        let algs: Vec<Arc<LieAlgebra>> = parts.iter().map(|p| p.alg.clone()).collect();
        let sum = direct_sum(&algs);
        let mut blocks = Vec::new();
        let mut off = 0;
        for p in parts {
            for b in &p.blocks {
                blocks.push(RepBlock { kind: b.kind, offset: off, mats: b.mats.clone() });
                off += b.mats.len();
            }
        }
        MatrixRep::new(&sum, blocks)
    }

    /// Exact homomorphism check on all basis pairs plus injectivity.
    pub fn rep_verify(&self) -> RepReport {
        let n = self.alg.dim();
        let mut max_residual = Q::zero();
        let mut violations = Vec::new();
        let mut pairs = 0;
        let basis: Vec<Element> = (0..n).map(|i| self.alg.basis(i)).collect();
        let reps: Vec<Vec<CQMatrix>> = basis.iter().map(|e| self.rep_exact(e)).collect();
        for i in 0..n {
            for j in i + 1..n {
                pairs += 1;
                let br = self.rep_exact(&basis[i].bracket(&basis[j]).expect("same algebra"));
                let mut bad = false;
                for b in 0..self.blocks.len() {
                    let (x, y) = (&reps[i][b], &reps[j][b]);
                    let comm = x.mul(y).sub(&y.mul(x));
                    let d = comm.sub(&br[b]);
                    let r = d.max_abs_component();
                    if !r.is_zero() {
                        bad = true;
                    }
                    if r > max_residual {
                        max_residual = r;
                    }
                }
                if bad {
                    violations.push((i, j));
                }
            }
        }
        let injective = self.exact_design().rank() == n;
        RepReport { pairs_checked: pairs, max_residual, violations, injective }
    }

    fn exact_design(&self) -> QMatrix {
        let rows: usize = self.blocks.iter().map(|b| 2 * b.size() * b.size()).sum();
        let mut a = QMatrix::zeros(rows, self.alg.dim());
        let mut r0 = 0;
        for b in &self.blocks {
            let n = b.size();
            for (k, m) in b.mats.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        a[(r0 + 2 * (i * n + j), b.offset + k)] = m[(i, j)].re.clone();
                        a[(r0 + 2 * (i * n + j) + 1, b.offset + k)] = m[(i, j)].im.clone();
                    }
                }
            }
            r0 += 2 * n * n;
        }
        a
    }

    pub fn rep_exact(&self, x: &Element) -> Vec<CQMatrix> {
        let c = x.coeffs();
        self.blocks
            .iter()
            .map(|b| {
                let n = b.size();
                let mut acc = CQMatrix::zeros(n, n);
                for (k, m) in b.mats.iter().enumerate() {
                    let ck = &c[b.offset + k];
                    if !ck.is_zero() {
                        acc = acc.add(&m.scale_q(ck));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn rep_float(&self, coords: &[f64]) -> Vec<CMat> {
        assert_eq!(coords.len(), self.alg.dim());
        self.blocks
            .iter()
            .zip(&self.float_mats)
            .map(|(b, fm)| {
                let n = b.size();
                let mut acc = CMat::zeros(n, n);
                for (k, m) in fm.iter().enumerate() {
                    let ck = coords[b.offset + k];
                    if ck != 0.0 {
                        acc += m * Complex64::new(ck, 0.0);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn rep_element_float(&self, x: &Element) -> Vec<CMat> {
        let c: Vec<f64> = x.coeffs().iter().map(q_to_f64).collect();
        self.rep_float(&c)
    }

    /// Coordinates of a block matrix tuple together with the representation residual.
    pub fn pullback_with_residual(&self, blocks: &[CMat]) -> Result<(Vec<f64>, f64), RepError> {
        if blocks.len() != self.blocks.len() {
            return Err(RepError::Shape);
        }
        let rows = self.design.nrows();
        let mut v = nalgebra::DVector::<f64>::zeros(rows);
        let mut r0 = 0;
        for (b, m) in self.blocks.iter().zip(blocks) {
            let n = b.size();
            if m.nrows() != n || m.ncols() != n {
                return Err(RepError::Shape);
            }
            for i in 0..n {
                for j in 0..n {
                    v[r0 + 2 * (i * n + j)] = m[(i, j)].re;
                    v[r0 + 2 * (i * n + j) + 1] = m[(i, j)].im;
                }
            }
            r0 += 2 * n * n;
        }
        let x = &self.pinv * &v;
        let resid = (&self.design * &x - &v).amax();
        Ok((x.iter().copied().collect(), resid))
    }

    /// Coordinates of a matrix tuple in the image; errors if the residual exceeds `PULLBACK_TOL`.
    pub fn pullback(&self, blocks: &[CMat]) -> Result<Vec<f64>, RepError> {
        let (x, residual) = self.pullback_with_residual(blocks)?;
        let scale = blocks.iter().map(max_abs).fold(1.0, f64::max);
        if residual > PULLBACK_TOL * scale {
            return Err(RepError::PullbackResidual { residual });
        }
        Ok(x)
    }

    /// Exact pullback of Gaussian-rational block matrices; `None` if not in the image.
    pub fn pullback_exact(&self, blocks: &[CQMatrix]) -> Option<Element> {
        if blocks.len() != self.blocks.len() {
            return None;
        }
        let a = self.exact_design();
        let n = self.alg.dim();
        let mut aug = QMatrix::zeros(a.nrows(), n + 1);
        for i in 0..a.nrows() {
            for j in 0..n {
                aug[(i, j)] = a[(i, j)].clone();
            }
        }
        let mut r0 = 0;
        for (b, m) in self.blocks.iter().zip(blocks) {
            let s = b.size();
            if m.nrows() != s || m.ncols() != s {
                return None;
            }
            for i in 0..s {
                for j in 0..s {
                    aug[(r0 + 2 * (i * s + j), n)] = m[(i, j)].re.clone();
                    aug[(r0 + 2 * (i * s + j) + 1, n)] = m[(i, j)].im.clone();
                }
            }
            r0 += 2 * s * s;
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&n) {
            return None;
        }
        let mut x = vec![Q::zero(); n];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, n)].clone();
        }
        self.alg.element(x).ok()
    }

    /// Ad_g on coordinates, through the matrices.
    pub fn ad_conjugate(&self, g: &GroupElement, x: &[f64], conv: Convention) -> Result<Vec<f64>, RepError> {
        if g.kinds() != self.kinds().as_slice() {
            return Err(RepError::Shape);
        }
        let xs = self.rep_float(x);
        let gi = g.inverse();
        let ys: Vec<CMat> = xs
            .iter()
            .enumerate()
            .map(|(b, xm)| match conv {
                Convention::Forward => g.block(b) * xm * gi.block(b),
                Convention::Inverse => gi.block(b) * xm * g.block(b),
            })
            .collect();
        self.pullback(&ys)
    }

    /// exp of a Lie algebra element (coordinates) as a group element.
    pub fn exp(&self, coords: &[f64]) -> GroupElement {
        let blocks: Vec<CMat> = self.rep_float(coords).iter().map(expm).collect();
        GroupElement::new(self.kinds(), blocks).expect("block shapes match kinds")
    }
}

/// Parses a representation file:
///
/// ```text
/// algebra sl2r
/// group sl2r
/// size 2
/// e1 = 1 0 ; 0 -1
/// ```
///
/// Entries are rationals `p/q` or Gaussian rationals `(re,im)`; rows are separated by `;`.
pub fn parse_rep_text(text: &str, alg: &Arc<LieAlgebra>) -> Result<MatrixRep, RepError> {
    let mut kind = None;
    let mut size = None;
    let mut mats: Vec<Option<CQMatrix>> = vec![None; alg.dim()];
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let perr = |msg: String| RepError::Parse { line, msg };
        if let Some((lhs, rhs)) = body.split_once('=') {
            let label = lhs.trim();
            let idx = alg.label_index(label).ok_or_else(|| perr(format!("unknown label `{label}`")))?;
            let n: usize = size.ok_or_else(|| perr("`size` must precede matrices".into()))?;
            let rows: Vec<Vec<_>> = rhs
                .split(';')
                .map(|r| r.split_whitespace().map(parse_cq).collect::<Option<Vec<_>>>())
                .collect::<Option<_>>()
                .ok_or_else(|| perr("bad matrix entry".into()))?;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(perr(format!("matrix for `{label}` is not {n}x{n}")));
            }
            mats[idx] = Some(CQMatrix::from_rows(rows));
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match (toks[0], toks.get(1)) {
            ("algebra", Some(name)) => {
                if *name != alg.name() {
                    return Err(RepError::AlgebraMismatch { got: name.to_string(), want: alg.name().to_string() });
                }
            }
            ("group", Some(tag)) => {
                kind = Some(GroupKind::from_tag(tag).ok_or_else(|| perr(format!("unknown group `{tag}`")))?)
            }
            ("size", Some(s)) => size = Some(s.parse().map_err(|_| perr("bad size".into()))?),
            _ => return Err(perr(format!("unrecognized line `{body}`"))),
        }
    }
    let kind = kind.ok_or(RepError::Parse { line: 0, msg: "missing `group`".into() })?;
    if size != Some(kind.size()) {
        return Err(RepError::Parse { line: 0, msg: format!("size must be {} for {}", kind.size(), kind.tag()) });
    }
    let mats: Vec<CQMatrix> = mats
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| RepError::MissingLabel(alg.labels()[i].clone())))
        .collect::<Result<_, _>>()?;
    MatrixRep::new(alg, vec![RepBlock { kind, offset: 0, mats }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;
    use crate::liealg::parse_algebra_text;

    const SL2R: &str = include_str!("../../catalog/algebras/sl2r.alg");
    const SL2R_REP: &str = include_str!("../../catalog/reps/sl2r.rep");

    fn sl2() -> MatrixRep {
        let alg = Arc::new(parse_algebra_text(SL2R).unwrap());
        parse_rep_text(SL2R_REP, &alg).unwrap()
    }

    #[test]
    fn sl2_rep_is_exact_homomorphism() {
        let r = sl2();
        let rep = r.rep_verify();
        assert!(rep.ok());
        assert!(rep.max_residual.is_zero());
        assert_eq!(rep.pairs_checked, 3);
    }

    #[test]
    fn pullback_roundtrip_and_rejection() {
        let r = sl2();
        let x = [0.3, -1.5, 2.25];
        let back = r.pullback(&r.rep_float(&x)).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let id = CMat::identity(2, 2);
        assert!(matches!(r.pullback(&[id]), Err(RepError::PullbackResidual { .. })));
        let e = r.algebra().basis(2).scale(&qi(3));
        assert_eq!(r.pullback_exact(&r.rep_exact(&e)).unwrap(), e);
        assert!(r.pullback_exact(&[CQMatrix::identity(2)]).is_none());
    }

    #[test]
    fn missing_label_and_wrong_algebra() {
        let alg = Arc::new(parse_algebra_text(SL2R).unwrap());
        let truncated: String = SL2R_REP.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_rep_text(&truncated, &alg), Err(RepError::MissingLabel(_))));
        let renamed = SL2R_REP.replace("algebra sl2r", "algebra so3r");
        assert!(matches!(parse_rep_text(&renamed, &alg), Err(RepError::AlgebraMismatch { .. })));
    }

    #[test]
    fn ad_conjugate_by_rotation() {
        let r = sl2();
        // Quarter turn exchanges e1 and -e1 direction: R e1 R^{-1} = -e1, R e2 R^{-1} = -e2.
        let rot = r.exp(&[0.0, 0.0, std::f64::consts::FRAC_PI_4]);
        let y = r.ad_conjugate(&rot, &[1.0, 0.0, 0.0], Convention::Forward).unwrap();
        assert!((y[0].abs() + (y[1].abs() - 1.0).abs() + y[2].abs()) < 1e-12);
    }
}
