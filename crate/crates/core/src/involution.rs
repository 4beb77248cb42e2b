//! Involutory automorphisms, their eigenspace splittings, and exclusion witnesses.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::{cq_real, q_to_f64, snap_f64, CQMatrix, QMatrix, Q};
use crate::liealg::{same_algebra, Element, LieAlgebra, LieError, Subspace};
use crate::matrixrep::{Convention, GroupElement, MatrixRep, RepError};

/// Numeric acceptance bound for witnesses whose matrix has irrational entries.
pub const NUMERIC_WITNESS_TOL: f64 = 1e-12;
/// Denominator bound when snapping numerically conjugated coordinates.
pub const SNAP_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvolutionError {
    #[error("matrix is {0}x{1}, algebra has dimension {2}")]
    Shape(usize, usize, usize),
    #[error("matrix does not square to the identity")]
    NotInvolutive,
    #[error("map does not preserve the bracket of basis elements {0} and {1}")]
    NotAutomorphism(usize, usize),
    #[error("witness element is not in h")]
    ElementNotInH,
    #[error("witness needs a matrix representation and a group element")]
    MissingGroupData,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// Involutory automorphism given by its coefficient matrix (column k is the image of e_k).
#[derive(Clone, Debug)]
pub struct Involution {
    alg: Arc<LieAlgebra>,
    matrix: QMatrix,
}

/// Validates that `matrix` is an involutory automorphism of `alg`.
pub fn check_involution(alg: &Arc<LieAlgebra>, matrix: QMatrix) -> Result<Involution, InvolutionError> {
    let n = alg.dim();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(InvolutionError::Shape(matrix.nrows(), matrix.ncols(), n));
    }
    if matrix.mul(&matrix) != QMatrix::identity(n) {
        return Err(InvolutionError::NotInvolutive);
    }
    let cols: Vec<Vec<Q>> = (0..n).map(|j| matrix.column(j)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let lhs = matrix.mul_vec(alg.bracket_basis(i, j));
            let rhs = alg.bracket_coords(&cols[i], &cols[j]);
            if lhs != rhs {
                return Err(InvolutionError::NotAutomorphism(i, j));
            }
        }
    }
    Ok(Involution { alg: alg.clone(), matrix })
}

impl Involution {
    /// From the images of the basis vectors.
    pub fn from_images(alg: &Arc<LieAlgebra>, images: &[Element]) -> Result<Involution, InvolutionError> {
        if images.len() != alg.dim() {
            return Err(InvolutionError::Shape(images.len(), images.len(), alg.dim()));
        }
        for x in images {
            if !same_algebra(x.algebra(), alg) {
                return Err(LieError::AlgebraMismatch(x.algebra().name().into(), alg.name().into()).into());
            }
        }
        let cols: Vec<Vec<Q>> = images.iter().map(|x| x.coeffs().to_vec()).collect();
        check_involution(alg, QMatrix::from_columns(&cols, alg.dim()))
    }

    /// Pulls back a map on matrices (e.g. X -> -X^t) through an exact representation.
    pub fn from_matrix_map(
        rep: &MatrixRep,
        f: impl Fn(usize, &CQMatrix) -> CQMatrix,
    ) -> Result<Involution, InvolutionError> {
        let alg = rep.algebra().clone();
        let mut images = Vec::with_capacity(alg.dim());
        for k in 0..alg.dim() {
            let blocks: Vec<CQMatrix> = rep.rep_exact(&alg.basis(k)).iter().enumerate().map(|(b, m)| f(b, m)).collect();
            let img = rep.pullback_exact(&blocks).ok_or(RepError::PullbackResidual { residual: f64::NAN })?;
            images.push(img);
        }
        Involution::from_images(&alg, &images)
    }

    /// Block-diagonal product of involutions of the summands of a direct sum.
    pub fn product(sum: &Arc<LieAlgebra>, parts: &[&Involution]) -> Result<Involution, InvolutionError> {
        let factors = sum.factors();
        if factors.len() != parts.len() {
            return Err(InvolutionError::Shape(parts.len(), parts.len(), factors.len()));
        }
        let n = sum.dim();
        let mut m = QMatrix::zeros(n, n);
        for ((off, f), p) in factors.iter().zip(parts) {
            if f.name() != p.alg.name() || f.dim() != p.alg.dim() {
                return Err(LieError::AlgebraMismatch(f.name().into(), p.alg.name().into()).into());
            }
            for i in 0..f.dim() {
                for j in 0..f.dim() {
                    m[(off + i, off + j)] = p.matrix[(i, j)].clone();
                }
            }
        }
        check_involution(sum, m)
    }

    /// Identity automorphism.
    pub fn identity(alg: &Arc<LieAlgebra>) -> Involution {
        Involution { alg: alg.clone(), matrix: QMatrix::identity(alg.dim()) }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.alg
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &Element) -> Element {
        self.alg.element(self.matrix.mul_vec(x.coeffs())).expect("dimension matches")
    }

    pub fn eigensplit(&self) -> EigenSplit {
        let n = self.alg.dim();
        let id = QMatrix::identity(n);
        let plus = Subspace::from_vectors(&self.alg, &self.matrix.sub(&id).nullspace()).expect("dims");
        let minus = Subspace::from_vectors(&self.alg, &self.matrix.add(&id).nullspace())
            .expect("dims");
        EigenSplit { plus, minus }
    }
}

/// +-1 eigenspaces of an involution: h (fixed) and m (negated).
#[derive(Clone, Debug)]
pub struct EigenSplit {
    pub plus: Subspace,
    pub minus: Subspace,
}

impl EigenSplit {
    /// [h,h] in h, [h,m] in m, [m,m] in h.
    pub fn graded_ok(&self) -> bool {
        let (h, m) = (&self.plus, &self.minus);
        h.contains_space(&h.bracket_span(h).expect("same")).expect("same")
            && m.contains_space(&h.bracket_span(m).expect("same")).expect("same")
            && h.contains_space(&m.bracket_span(m).expect("same")).expect("same")
    }
}

/// [[m,m],m] contained in m.
pub fn is_lie_triple_system(m: &Subspace) -> bool {
    let mm = m.bracket_span(m).expect("same algebra");
    m.contains_space(&mm.bracket_span(m).expect("same algebra")).expect("same algebra")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BolTripleReport {
    pub h_subalgebra: bool,
    /// h and m are complementary subspaces.
    pub complement: bool,
    /// m is a Lie triple system.
    pub triple: bool,
    /// m generates g as a Lie algebra.
    pub generates: bool,
    /// For eigenspace splittings: g = m + [m,m].
    pub reductive: Option<bool>,
}

impl BolTripleReport {
    pub fn ok(&self) -> bool {
        self.h_subalgebra && self.complement && self.triple && self.generates && self.reductive.unwrap_or(true)
    }
}

pub fn bol_triple_check(h: &Subspace, m: &Subspace) -> Result<BolTripleReport, InvolutionError> {
    let alg = h.algebra();
    if !same_algebra(alg, m.algebra()) {
        return Err(LieError::AlgebraMismatch(alg.name().into(), m.algebra().name().into()).into());
    }
    let complement = h.intersect(m)?.is_zero() && h.dim() + m.dim() == alg.dim();
    Ok(BolTripleReport {
        h_subalgebra: h.is_subalgebra(),
        complement,
        triple: is_lie_triple_system(m),
        generates: m.closure().dim() == alg.dim(),
        reductive: None,
    })
}

pub fn bol_triple_check_split(split: &EigenSplit) -> BolTripleReport {
    let mut r = bol_triple_check(&split.plus, &split.minus).expect("same algebra");
    let m = &split.minus;
    let red = m.sum(&m.bracket_span(m).expect("same")).expect("same").dim() == m.algebra().dim();
    r.reductive = Some(red);
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    /// A nonzero element lying in both h and m.
    DirectIntersection,
    /// An element of h conjugate into m by an explicit group element.
    ConjugacyWitness,
}

/// Group element of a witness: Gaussian-rational blocks, each optionally multiplied by sqrt(scale).
#[derive(Clone, Debug)]
pub struct WitnessMatrix {
    pub blocks: Vec<CQMatrix>,
    /// Per-block factor under the square root; empty or `None` entries mean no factor.
    pub sqrt_scale: Vec<Option<Q>>,
}

impl WitnessMatrix {
    pub fn exact(blocks: Vec<CQMatrix>) -> WitnessMatrix {
        WitnessMatrix { blocks, sqrt_scale: Vec::new() }
    }

    pub fn is_exact(&self) -> bool {
        self.sqrt_scale.iter().all(Option::is_none)
    }

    pub fn to_group(&self, rep: &MatrixRep) -> Option<GroupElement> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let s = self.sqrt_scale.get(i).and_then(|x| x.as_ref()).map_or(1.0, |q| q_to_f64(q).sqrt());
                b.to_cmat() * num_complex::Complex64::new(s, 0.0)
            })
            .collect();
        GroupElement::new(rep.kinds(), blocks)
    }
}

#[derive(Clone, Debug)]
pub struct ExclusionWitness {
    pub kind: WitnessKind,
    pub element: Element,
    pub target: Option<Element>,
    pub group_element: Option<WitnessMatrix>,
    pub convention: Convention,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    Exact,
    Numeric,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExclusionCheck {
    pub valid: bool,
    pub mode: CheckMode,
    /// Float residual of Ad_g(x) against the target (0 for intersections).
    pub residual: f64,
    pub message: String,
}

/// Verifies a witness that the triple (h, m) violates the complement condition up to conjugacy.
pub fn check_exclusion(
    w: &ExclusionWitness,
    h: &Subspace,
    m: &Subspace,
    rep: Option<&MatrixRep>,
) -> Result<ExclusionCheck, InvolutionError> {
    if w.element.is_zero() || !h.contains(&w.element)? {
        return Err(InvolutionError::ElementNotInH);
    }
    match w.kind {
        WitnessKind::DirectIntersection => {
            let valid = m.contains(&w.element)?;
            Ok(ExclusionCheck {
                valid,
                mode: CheckMode::Exact,
                residual: 0.0,
                message: if valid {
                    format!("{} lies in h and m", w.element)
                } else {
                    format!("{} is not in m", w.element)
                },
            })
        }
        WitnessKind::ConjugacyWitness => {
            let (Some(rep), Some(gm), Some(target)) = (rep, &w.group_element, &w.target) else {
                return Err(InvolutionError::MissingGroupData);
            };
            let fail = |mode, residual, message: String| Ok(ExclusionCheck { valid: false, mode, residual, message });
            let mode = if gm.is_exact() { CheckMode::Exact } else { CheckMode::Numeric };
            if target.is_zero() || !m.contains(target)? {
                return fail(mode, f64::NAN, format!("target {target} is not a nonzero element of m"));
            }
            let g = gm.to_group(rep).ok_or(RepError::Shape)?;
            if g.det_defect() > NUMERIC_WITNESS_TOL {
                return fail(mode, f64::NAN, format!("group element has det defect {:e}", g.det_defect()));
            }
            // g must normalize the algebra: every Ad_g(e_k) pulls back.
            let n = rep.algebra().dim();
            for k in 0..n {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                if let Err(err) = rep.ad_conjugate(&g, &e, w.convention) {
                    return fail(mode, f64::NAN, format!("Ad_g does not preserve the algebra: {err}"));
                }
            }
            let x: Vec<f64> = w.element.coeffs().iter().map(q_to_f64).collect();
            let img = rep.ad_conjugate(&g, &x, w.convention)?;
            let t: Vec<f64> = target.coeffs().iter().map(q_to_f64).collect();
            let residual = img.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            match mode {
                CheckMode::Numeric => {
                    let valid = residual <= NUMERIC_WITNESS_TOL;
                    Ok(ExclusionCheck {
                        valid,
                        mode,
                        residual,
                        message: format!("Ad_g({}) = {} up to {:.1e}", w.element, target, residual),
                    })
                }
                CheckMode::Exact => {
                    let snapped: Vec<Q> = img.iter().map(|&v| snap_f64(v, SNAP_DENOMINATOR)).collect();
                    let snapped = rep.algebra().element(snapped)?;
                    if &snapped != target {
                        return fail(mode, residual, format!("Ad_g({}) = {}, expected {}", w.element, snapped, target));
                    }
                    // Exact re-check without inverting g: g X = T g (forward) or X g = g T (inverse).
                    let xs = rep.rep_exact(&w.element);
                    let ts = rep.rep_exact(target);
                    let ok = gm.blocks.iter().zip(xs.iter().zip(&ts)).all(|(g, (x, t))| match w.convention {
                        Convention::Forward => g.mul(x) == t.mul(g),
                        Convention::Inverse => x.mul(g) == g.mul(t),
                    });
                    let det_ok = gm.blocks.iter().all(|b| b.det().is_some_and(|d| d == cq_real(Q::one()) || d == cq_real(-Q::one())));
                    Ok(ExclusionCheck {
                        valid: ok && det_ok,
                        mode,
                        residual,
                        message: if ok {
                            format!("Ad_g({}) = {} exactly", w.element, target)
                        } else {
                            format!("exact re-check of Ad_g({}) = {} failed", w.element, target)
                        },
                    })
                }
            }
        }
    }
}

/// Element with all coefficients zero except those given.
pub fn element_from_pairs(alg: &Arc<LieAlgebra>, pairs: &[(usize, Q)]) -> Element {
    let mut c = vec![Q::zero(); alg.dim()];
    for (i, v) in pairs {
        c[*i] = v.clone();
    }
    alg.element(c).expect("dimension matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;
    use crate::liealg::parse_algebra_text;
    use crate::matrixrep::parse_rep_text;

    fn sl2() -> (Arc<LieAlgebra>, MatrixRep) {
        let alg = Arc::new(parse_algebra_text(include_str!("../catalog/algebras/sl2r.alg")).unwrap());
        let rep = parse_rep_text(include_str!("../catalog/reps/sl2r.rep"), &alg).unwrap();
        (alg, rep)
    }

    #[test]
    fn cartan_involution_of_sl2_from_matrix_formula() {
        let (alg, rep) = sl2();
        let tau = Involution::from_matrix_map(&rep, |_, x| x.adjoint().scale_q(&qi(-1))).unwrap();
        let s = tau.eigensplit();
        assert_eq!(s.plus, Subspace::span(&alg, &[alg.basis(2)]).unwrap());
        assert_eq!(s.minus, Subspace::span(&alg, &[alg.basis(0), alg.basis(1)]).unwrap());
        assert!(s.graded_ok());
        assert!(bol_triple_check_split(&s).ok());
    }

    #[test]
    fn rejects_non_automorphism_and_non_involution() {
        let (alg, _) = sl2();
        // e1 -> -e1 alone breaks [e1,e2] = 2 e3.
        let mut m = QMatrix::identity(3);
        m[(0, 0)] = qi(-1);
        assert!(matches!(check_involution(&alg, m), Err(InvolutionError::NotAutomorphism(..))));
        let mut m = QMatrix::identity(3);
        m[(0, 1)] = qi(1);
        assert_eq!(check_involution(&alg, m).unwrap_err(), InvolutionError::NotInvolutive);
    }

    #[test]
    fn exact_conjugacy_witness() {
        let (alg, rep) = sl2();
        let h = Subspace::span(&alg, &[alg.basis(1).add(&alg.basis(2)).unwrap()]).unwrap();
        let m = Subspace::span(&alg, &[alg.basis(0), alg.basis(2)]).unwrap();
        let one = cq_real(qi(1));
        let g = CQMatrix::from_rows(vec![vec![one.clone(), cq_real(qi(0))], vec![cq_real(qi(-1)), one]]);
        let w = ExclusionWitness {
            kind: WitnessKind::ConjugacyWitness,
            element: alg.basis(1).add(&alg.basis(2)).unwrap().scale(&crate::exact::q(1, 2)),
            target: Some(alg.basis(0).add(&alg.basis(2)).unwrap()),
            group_element: Some(WitnessMatrix::exact(vec![g.clone()])),
            convention: Convention::Forward,
        };
        let c = check_exclusion(&w, &h, &m, Some(&rep)).unwrap();
        assert!(c.valid, "{}", c.message);
        assert_eq!(c.mode, CheckMode::Exact);
        // The opposite convention does not reach m with the same target.
        let w2 = ExclusionWitness { convention: Convention::Inverse, ..w };
        assert!(!check_exclusion(&w2, &h, &m, Some(&rep)).unwrap().valid);
    }

    #[test]
    fn lie_triple_system_detection() {
        let (alg, _) = sl2();
        let m = Subspace::span(&alg, &[alg.basis(0), alg.basis(1)]).unwrap();
        assert!(is_lie_triple_system(&m));
        let odd = Subspace::span(&alg, &[alg.basis(0), alg.basis(1).add(&alg.basis(2)).unwrap()]).unwrap();
        // A subalgebra is trivially a triple system.
        assert!(is_lie_triple_system(&odd));
        let r = bol_triple_check(&Subspace::span(&alg, &[alg.basis(2)]).unwrap(), &odd).unwrap();
        assert!(!r.generates);
    }
}
