//! Loops on coset spaces G/H realized through sections, with identity property suites.

mod reproduce;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use reproduce::{
    prop19_case, reproduce_lemma7, reproduce_prop12, reproduce_prop19, Lemma7Report, Lemma7Row, Prop12Report, Prop19Case,
    Prop19Report, PROP19_RADII,
};

use crate::exact::{q_to_f64, snap_f64, CMat, Q};
use crate::involution::{Involution, InvolutionError};
use crate::liealg::{LieAlgebra, Subspace};
use crate::matrixrep::{format_matrix, polar, GroupElement, GroupKind, MatrixRep, RepError, StabilizerFamily};

/// Tolerance for structural invariants of sections and homomorphisms.
pub const INVARIANT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("block {0} ({1}) is compact; hyperbolic sections need a noncompact simple factor")]
    NotHyperbolic(usize, &'static str),
    #[error("section failed: {0}")]
    Section(String),
    #[error("fiber map is not a homomorphism: {0}")]
    Hom(String),
    #[error("points belong to different loops")]
    Mismatch,
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
}

/// Homomorphism from the stabilizer of the base loop into one fiber group factor.
/// Block indices refer to the blocks of the base loop.
#[derive(Clone, Debug)]
pub enum FiberHom {
    /// Constant map to the identity.
    Trivial,
    /// SO2 of a PSL2(R) base block, onto SO2 in a PSL2(R) fiber or onto the torus diag(c + i s, c - i s)
    /// of an SU2-realized fiber.
    Rotation { base: usize },
    /// SU2 of a PSL2(C) base block, identically onto an SU2-realized fiber.
    Identity { base: usize },
    /// Arbitrary map given on the blocks of the base stabilizer element.
    Custom { name: &'static str, f: fn(&[CMat]) -> CMat },
}

impl FiberHom {
    fn apply(&self, ks: &[CMat], kind: GroupKind) -> CMat {
        let size = kind.size();
        match self {
            FiberHom::Trivial => CMat::identity(size, size),
            FiberHom::Rotation { base } => {
                let (c, s) = (ks[*base][(0, 0)].re, ks[*base][(0, 1)].re);
                if kind == GroupKind::Sl2R {
                    CMat::from_row_slice(2, 2, &[c.into(), s.into(), (-s).into(), c.into()])
                } else {
                    CMat::from_row_slice(2, 2, &[Complex64::new(c, s), 0.0.into(), 0.0.into(), Complex64::new(c, -s)])
                }
            }
            FiberHom::Identity { base } => ks[*base].clone(),
            FiberHom::Custom { f, .. } => f(ks),
        }
    }

    fn label(&self) -> String {
        match self {
            FiberHom::Trivial => "trivial".into(),
            FiberHom::Rotation { base } => format!("rotation(block {base})"),
            FiberHom::Identity { base } => format!("identity(block {base})"),
            FiberHom::Custom { name, .. } => (*name).into(),
        }
    }

    fn check_kinds(&self, base: &[GroupKind], fiber: GroupKind) -> Result<(), LoopError> {
        let ok = match self {
            FiberHom::Trivial | FiberHom::Custom { .. } => true,
            FiberHom::Rotation { base: b } => {
                base.get(*b) == Some(&GroupKind::Sl2R) && matches!(fiber, GroupKind::Sl2R | GroupKind::So3 | GroupKind::Sl2C)
            }
            FiberHom::Identity { base: b } => {
                base.get(*b) == Some(&GroupKind::Sl2C) && matches!(fiber, GroupKind::So3 | GroupKind::Sl2C)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(LoopError::Hom(format!("{} does not map into {}", self.label(), fiber.display_name())))
        }
    }
}

/// How one block of the group participates in the section.
#[derive(Clone, Debug)]
enum Part {
    /// Polar section of a noncompact simple factor: coset representative in exp m, stabilizer compact.
    Hyperbolic,
    /// Fiber factor: any element is a representative, twisted by the hom of the base stabilizer part;
    /// the base blocks start at `base_offset`.
    Fiber { hom: FiberHom, base_offset: usize },
}

fn fiber_image(hom: &FiberHom, base_offset: usize, ks: &[CMat], kind: GroupKind) -> CMat {
    hom.apply(&ks[base_offset..], kind)
}

/// A loop on G/H given by its canonical section. Points are stored as section values.
#[derive(Clone, Debug)]
pub struct LoopInstance {
    name: String,
    rep: MatrixRep,
    parts: Vec<Part>,
    m: Subspace,
    h: Subspace,
}

/// Point of a loop: the canonical coset representative.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopPoint {
    pub rep: GroupElement,
}

fn concat_subspace(alg: &Arc<LieAlgebra>, a: &Subspace, a_off: usize, b: &Subspace, b_off: usize) -> Subspace {
    let n = alg.dim();
    let lift = |s: &Subspace, off: usize| -> Vec<Vec<Q>> {
        s.basis()
            .iter()
            .map(|x| {
                let mut v = vec![Q::from_integer(0.into()); n];
                for (i, c) in x.coeffs().iter().enumerate() {
                    v[off + i] = c.clone();
                }
                v
            })
            .collect()
    };
    let mut vecs = lift(a, a_off);
    vecs.extend(lift(b, b_off));
    Subspace::from_vectors(alg, &vecs).expect("dimensions match")
}

impl LoopInstance {
    /// Bruck loop of hyperbolic type on G/K, K the unitary elements, section the polar factor.
    pub fn hyperbolic(name: &str, rep: MatrixRep) -> Result<LoopInstance, LoopError> {
        for (i, k) in rep.kinds().iter().enumerate() {
            if k.is_compact() {
                return Err(LoopError::NotHyperbolic(i, k.display_name()));
            }
        }
        let minus_one = Q::from_integer((-1).into());
        let cartan = Involution::from_matrix_map(&rep, |_, x| x.adjoint().scale_q(&minus_one))?;
        let split = cartan.eigensplit();
        let parts = vec![Part::Hyperbolic; rep.blocks().len()];
        Ok(LoopInstance { name: name.into(), rep, parts, m: split.minus, h: split.plus })
    }

    /// A Lie group viewed as a loop (trivial stabilizer).
    pub fn group(name: &str, rep: MatrixRep) -> LoopInstance {
        let alg = rep.algebra().clone();
        let parts = vec![Part::Fiber { hom: FiberHom::Trivial, base_offset: 0 }; rep.blocks().len()];
        LoopInstance { name: name.into(), parts, m: Subspace::full(&alg), h: Subspace::zero(&alg), rep }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group_tag(&self) -> String {
        self.rep.kinds().iter().map(|k| k.tag()).collect::<Vec<_>>().join("+")
    }

    pub fn rep(&self) -> &MatrixRep {
        &self.rep
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        self.rep.algebra()
    }

    /// Tangent space of the section image at the identity.
    pub fn m(&self) -> &Subspace {
        &self.m
    }

    /// Lie algebra of the stabilizer.
    pub fn h(&self) -> &Subspace {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn is_direct_product_of_hyperbolic(&self) -> bool {
        self.parts.iter().all(|p| matches!(p, Part::Hyperbolic))
    }

    /// Componentwise product loop on (G1 x G2)/(H1 x H2).
    pub fn direct_product(a: &LoopInstance, b: &LoopInstance) -> Result<LoopInstance, LoopError> {
        let rep = MatrixRep::direct_sum(&[&a.rep, &b.rep])?;
        let shift = a.parts.len();
        let mut parts = a.parts.clone();
        parts.extend(b.parts.iter().map(|p| match p {
            Part::Fiber { hom, base_offset } => Part::Fiber { hom: hom.clone(), base_offset: base_offset + shift },
            other => other.clone(),
        }));
        let alg = rep.algebra().clone();
        let n = a.algebra().dim();
        let m = concat_subspace(&alg, &a.m, 0, &b.m, n);
        let h = concat_subspace(&alg, &a.h, 0, &b.h, n);
        Ok(LoopInstance { name: format!("{} x {}", a.name, b.name), rep, parts, m, h })
    }

    /// Product with the one-point loop, which changes nothing.
    pub fn with_trivial(&self) -> LoopInstance {
        self.clone()
    }

    /// Loop on (G1 x G2)/{(x, hom(x)) : x in H1} with section image M1 x G2, one hom per fiber block.
    /// With `fiber_first` the group is ordered G2 x G1.
    pub fn scheerer_extension(
        base: &LoopInstance,
        fiber: &MatrixRep,
        homs: Vec<FiberHom>,
        fiber_first: bool,
        name: &str,
    ) -> Result<LoopInstance, LoopError> {
        if !base.is_direct_product_of_hyperbolic() {
            return Err(LoopError::Hom("the base loop must be a product of hyperbolic loops".into()));
        }
        let fkinds = fiber.kinds();
        if homs.len() != fkinds.len() {
            return Err(LoopError::Hom(format!("{} homs for {} fiber blocks", homs.len(), fkinds.len())));
        }
        let bkinds = base.rep.kinds();
        for (hom, k) in homs.iter().zip(&fkinds) {
            hom.check_kinds(&bkinds, *k)?;
            check_hom(base, hom, *k)?;
        }
        let (nb, nf) = (base.algebra().dim(), fiber.algebra().dim());
        let rep = if fiber_first {
            MatrixRep::direct_sum(&[fiber, &base.rep])?
        } else {
            MatrixRep::direct_sum(&[&base.rep, fiber])?
        };
        let alg = rep.algebra().clone();
        let (boff, foff) = if fiber_first { (nf, 0) } else { (0, nb) };
        let m = concat_subspace(&alg, &base.m, boff, &Subspace::full(fiber.algebra()), foff);
        let h = hom_graph(base, fiber, &homs, &alg, boff, foff)?;
        let base_offset = if fiber_first { fkinds.len() } else { 0 };
        let fparts: Vec<Part> = homs.into_iter().map(|hom| Part::Fiber { hom, base_offset }).collect();
        let parts = if fiber_first {
            fparts.into_iter().chain(base.parts.iter().cloned()).collect()
        } else {
            base.parts.iter().cloned().chain(fparts).collect()
        };
        Ok(LoopInstance { name: name.into(), rep, parts, m, h })
    }

    fn stabilizer_blocks(&self, x: &GroupElement) -> Vec<CMat> {
        // Compact part of each hyperbolic block; fibers contribute the identity.
        self.parts
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                Part::Hyperbolic => polar(x.block(i)).1,
                Part::Fiber { .. } => {
                    let n = x.block(i).nrows();
                    CMat::identity(n, n)
                }
            })
            .collect()
    }

    /// Canonical representative of the coset x H.
    pub fn section(&self, x: &GroupElement) -> Result<GroupElement, LoopError> {
        if x.kinds() != self.rep.kinds().as_slice() {
            return Err(LoopError::Mismatch);
        }
        let ks = self.stabilizer_blocks(x);
        let mut blocks = Vec::with_capacity(self.parts.len());
        for (i, p) in self.parts.iter().enumerate() {
            let b = match p {
                Part::Hyperbolic => polar(x.block(i)).0,
                Part::Fiber { hom, base_offset } => {
                    let phi = fiber_image(hom, *base_offset, &ks, x.kinds()[i]);
                    let inv = phi.try_inverse().ok_or_else(|| LoopError::Section("fiber image not invertible".into()))?;
                    x.block(i) * inv
                }
            };
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(LoopError::Section(format!("non-finite representative in block {i}")));
            }
            blocks.push(b);
        }
        Ok(GroupElement::new(x.kinds().to_vec(), blocks).expect("shapes").normalized())
    }

    /// Stabilizer element x with section(g) * x = g, i.e. the H-part of g.
    pub fn stabilizer_part(&self, g: &GroupElement) -> Result<GroupElement, LoopError> {
        Ok(self.section(g)?.inverse().mul(g))
    }

    pub fn in_stabilizer(&self, g: &GroupElement, tol: f64) -> bool {
        let ks = self.stabilizer_blocks(g);
        self.parts.iter().enumerate().all(|(i, p)| {
            let single = |m: &CMat| GroupElement::new(vec![g.kinds()[i]], vec![m.clone()]).expect("shape");
            match p {
                Part::Hyperbolic => StabilizerFamily::MaximalCompact.contains(&single(g.block(i)), tol),
                Part::Fiber { hom, base_offset } => {
                    let phi = fiber_image(hom, *base_offset, &ks, g.kinds()[i]);
                    single(g.block(i)).distance(&single(&phi)) <= tol
                }
            }
        })
    }

    /// Whether g lies in the section image: tau(g) = g^{-1} on hyperbolic blocks.
    pub fn in_section_image(&self, g: &GroupElement, tol: f64) -> bool {
        self.parts.iter().enumerate().all(|(i, p)| match p {
            Part::Hyperbolic => {
                let one = GroupElement::new(vec![g.kinds()[i]], vec![g.block(i).clone()]).expect("shape");
                one.cartan().distance(&one.inverse()) <= tol
                    && crate::matrixrep::sqrtm_hpd(g.block(i)).is_some()
                    && (0..g.block(i).nrows()).all(|j| g.block(i)[(j, j)].re > 0.0)
            }
            Part::Fiber { .. } => true,
        })
    }

    pub fn identity(&self) -> LoopPoint {
        LoopPoint { rep: GroupElement::identity(&self.rep.kinds()) }
    }

    pub fn point(&self, x: &GroupElement) -> Result<LoopPoint, LoopError> {
        Ok(LoopPoint { rep: self.section(x)? })
    }

    /// Point exp(X) for X in m, given in algebra coordinates.
    pub fn exp_point(&self, coords: &[f64]) -> Result<LoopPoint, LoopError> {
        self.point(&self.rep.exp(coords))
    }

    /// x H * y H = sigma(x H) y H.
    pub fn mul(&self, a: &LoopPoint, b: &LoopPoint) -> Result<LoopPoint, LoopError> {
        self.point(&a.rep.mul(&b.rep))
    }

    /// The y with a * y = b.
    pub fn left_divide(&self, a: &LoopPoint, b: &LoopPoint) -> Result<LoopPoint, LoopError> {
        self.point(&a.rep.inverse().mul(&b.rep))
    }

    /// The x with x * a = b, from the unique factorization of b H into (section) * (a H).
    pub fn right_divide(&self, b: &LoopPoint, a: &LoopPoint) -> Result<LoopPoint, LoopError> {
        let kinds = self.rep.kinds();
        let n = self.parts.len();
        let mut xs: Vec<CMat> = Vec::with_capacity(n);
        // Base: x a in b K with x Hermitian positive forces x = a^{-1} P a^{-1}, P the positive factor of a b.
        for (i, p) in self.parts.iter().enumerate() {
            xs.push(match p {
                Part::Hyperbolic => {
                    let (ai, bi) = (a.rep.block(i), b.rep.block(i));
                    let pa = polar(&(ai * bi)).0;
                    let inv = ai.clone().try_inverse().ok_or_else(|| LoopError::Section("singular point".into()))?;
                    &inv * pa * &inv
                }
                Part::Fiber { .. } => CMat::identity(kinds[i].size(), kinds[i].size()),
            });
        }
        // k' = b^{-1} x a on hyperbolic blocks; fibers: x_f = b_f hom(k') a_f^{-1}.
        let ks: Vec<CMat> = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                Part::Hyperbolic => {
                    let bi = b.rep.block(i).clone().try_inverse().expect("invertible");
                    bi * &xs[i] * a.rep.block(i)
                }
                Part::Fiber { .. } => xs[i].clone(),
            })
            .collect();
        for (i, p) in self.parts.iter().enumerate() {
            if let Part::Fiber { hom, base_offset } = p {
                let ainv = a.rep.block(i).clone().try_inverse().expect("invertible");
                xs[i] = b.rep.block(i) * fiber_image(hom, *base_offset, &ks, kinds[i]) * ainv;
            }
        }
        let x = GroupElement::new(kinds, xs).expect("shapes");
        let out = self.point(&x)?;
        let check = self.mul(&out, a)?;
        if check.rep.distance(&b.rep) > 1e-6 {
            return Err(LoopError::Section(format!(
                "right division did not converge (residual {:e})",
                check.rep.distance(&b.rep)
            )));
        }
        Ok(out)
    }

    /// x^{-1} = x \ e.
    pub fn inverse(&self, x: &LoopPoint) -> Result<LoopPoint, LoopError> {
        self.left_divide(x, &self.identity())
    }

    /// a(b(ac)) against (a(ba))c, as a relative distance.
    pub fn bol_residual(&self, a: &LoopPoint, b: &LoopPoint, c: &LoopPoint) -> Result<f64, LoopError> {
        let lhs = self.mul(a, &self.mul(b, &self.mul(a, c)?)?)?;
        let rhs = self.mul(&self.mul(a, &self.mul(b, a)?)?, c)?;
        Ok(lhs.rep.distance(&rhs.rep))
    }

    pub fn check_bol(&self, a: &LoopPoint, b: &LoopPoint, c: &LoopPoint, tol: f64) -> bool {
        self.bol_residual(a, b, c).is_ok_and(|r| r <= tol)
    }

    /// (xy)^{-1} against x^{-1} y^{-1}.
    pub fn bruck_residual(&self, x: &LoopPoint, y: &LoopPoint) -> Result<f64, LoopError> {
        let lhs = self.inverse(&self.mul(x, y)?)?;
        let rhs = self.mul(&self.inverse(x)?, &self.inverse(y)?)?;
        Ok(lhs.rep.distance(&rhs.rep))
    }

    pub fn check_bruck(&self, x: &LoopPoint, y: &LoopPoint, tol: f64) -> bool {
        self.bruck_residual(x, y).is_ok_and(|r| r <= tol)
    }

    fn float_basis(s: &Subspace) -> Vec<Vec<f64>> {
        s.basis().iter().map(|x| x.coeffs().iter().map(q_to_f64).collect()).collect()
    }

    /// Coordinates of a random element of m, coefficients uniform in [-1.5, 1.5]; beyond that the
    /// polar steps of a product lose more than 8 digits on the 3x3 factors.
    pub fn random_m_coords<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut v = vec![0.0; self.algebra().dim()];
        for b in Self::float_basis(&self.m) {
            let t = rng.gen_range(-1.5..1.5);
            for (vi, bi) in v.iter_mut().zip(&b) {
                *vi += t * bi;
            }
        }
        v
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Result<LoopPoint, LoopError> {
        let c = self.random_m_coords(rng);
        self.exp_point(&c)
    }

    /// exp(Y) exp(Z) for random Y, Z in the whole algebra.
    pub fn random_group_element<R: Rng>(&self, rng: &mut R) -> GroupElement {
        let n = self.algebra().dim();
        let mut y = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (a, b) = (y(), y());
        self.rep.exp(&a).mul(&self.rep.exp(&b))
    }

    pub fn random_stabilizer<R: Rng>(&self, rng: &mut R) -> GroupElement {
        let kinds = self.rep.kinds();
        let mut blocks: Vec<CMat> = kinds
            .iter()
            .map(|k| StabilizerFamily::MaximalCompact.sample(rng, &[*k]).block(0).clone())
            .collect();
        let ks = blocks.clone();
        for (i, p) in self.parts.iter().enumerate() {
            if let Part::Fiber { hom, base_offset } = p {
                blocks[i] = fiber_image(hom, *base_offset, &ks, kinds[i]);
            }
        }
        GroupElement::new(kinds, blocks).expect("shapes")
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .parts
            .iter()
            .zip(self.rep.kinds())
            .map(|(p, k)| match p {
                Part::Hyperbolic => format!("{}/K", k.display_name()),
                Part::Fiber { hom, .. } => format!("{} via {}", k.display_name(), hom.label()),
            })
            .collect();
        format!("{} on {}", self.name, parts.join(" x "))
    }
}

fn check_hom(base: &LoopInstance, hom: &FiberHom, fkind: GroupKind) -> Result<(), LoopError> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let single = |m: CMat| GroupElement::new(vec![fkind], vec![m]).expect("shape");
    for _ in 0..64 {
        let k1 = base.random_stabilizer(&mut rng);
        let k2 = base.random_stabilizer(&mut rng);
        let k12 = k1.mul(&k2);
        let lhs = single(hom.apply(k12.blocks(), fkind));
        let rhs = single(hom.apply(k1.blocks(), fkind) * hom.apply(k2.blocks(), fkind));
        let d = lhs.distance(&rhs);
        if d > INVARIANT_TOL {
            return Err(LoopError::Hom(format!("hom(k1 k2) differs from hom(k1) hom(k2) by {d:e}")));
        }
        // Well defined modulo the center of each base block.
        for (i, kind) in k1.kinds().iter().enumerate() {
            for c in kind.center() {
                let shifted = k1.with_block(i, k1.block(i) * c);
                let d = single(hom.apply(shifted.blocks(), fkind)).distance(&single(hom.apply(k1.blocks(), fkind)));
                if d > INVARIANT_TOL {
                    return Err(LoopError::Hom(format!("hom is not defined on the projective group ({d:e})")));
                }
            }
        }
    }
    Ok(())
}

/// Lie algebra {(x, d hom(x)) : x in h1}, differentiated numerically and snapped to rationals.
fn hom_graph(
    base: &LoopInstance,
    fiber: &MatrixRep,
    homs: &[FiberHom],
    alg: &Arc<LieAlgebra>,
    boff: usize,
    foff: usize,
) -> Result<Subspace, LoopError> {
    let n = alg.dim();
    let fkinds = fiber.kinds();
    let eps = 1e-5;
    let mut vecs = Vec::new();
    for x in LoopInstance::float_basis(&base.h) {
        let scaled = |s: f64| x.iter().map(|v| v * s).collect::<Vec<f64>>();
        let (kp, km) = (base.rep.exp(&scaled(eps)), base.rep.exp(&scaled(-eps)));
        let derivs: Vec<CMat> = homs
            .iter()
            .zip(&fkinds)
            .map(|(hom, k)| (hom.apply(kp.blocks(), *k) - hom.apply(km.blocks(), *k)) / Complex64::new(2.0 * eps, 0.0))
            .collect();
        let y = fiber.pullback(&derivs)?;
        let mut v = vec![Q::from_integer(0.into()); n];
        for (i, c) in x.iter().enumerate() {
            v[boff + i] = snap_f64(*c, 1000);
        }
        for (i, c) in y.iter().enumerate() {
            v[foff + i] = snap_f64(*c, 1000);
        }
        vecs.push(v);
    }
    Ok(Subspace::from_vectors(alg, &vecs).expect("dimensions match"))
}

/// Result of one property suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub group: String,
    pub samples: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub verdict: bool,
    pub witnesses: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, lp: &LoopInstance, samples: usize, tolerance: f64) -> SuiteReport {
        SuiteReport {
            suite: suite.into(),
            group: lp.group_tag(),
            samples,
            tolerance,
            max_residual: 0.0,
            verdict: true,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, residual: f64, witness: impl FnOnce() -> String) {
        let bad = !(residual <= self.tolerance);
        if residual > self.max_residual || residual.is_nan() {
            self.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
        }
        if bad {
            self.verdict = false;
            if self.witnesses.len() < 3 {
                self.witnesses.push(witness());
            }
        }
    }

    fn record_err(&mut self, e: LoopError) {
        self.verdict = false;
        self.max_residual = f64::INFINITY;
        if self.witnesses.len() < 3 {
            self.witnesses.push(e.to_string());
        }
    }
}

fn pts(xs: &[&LoopPoint]) -> String {
    xs.iter().map(|p| p.rep.to_string()).collect::<Vec<_>>().join("; ")
}

/// Left Bol identity on random triples.
pub fn bol_suite(lp: &LoopInstance, samples: usize, tol: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::new("bol", lp, samples, tol);
    for _ in 0..samples {
        let res = (|| {
            let (a, b, c) = (lp.random_point(&mut rng)?, lp.random_point(&mut rng)?, lp.random_point(&mut rng)?);
            let d = lp.bol_residual(&a, &b, &c)?;
            Ok::<_, LoopError>((d, a, b, c))
        })();
        match res {
            Ok((d, a, b, c)) => r.record(d, || format!("a, b, c = {}", pts(&[&a, &b, &c]))),
            Err(e) => r.record_err(e),
        }
    }
    r
}

/// Automorphic inverse property on random pairs.
pub fn bruck_suite(lp: &LoopInstance, samples: usize, tol: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::new("bruck", lp, samples, tol);
    for _ in 0..samples {
        let res = (|| {
            let (x, y) = (lp.random_point(&mut rng)?, lp.random_point(&mut rng)?);
            let d = lp.bruck_residual(&x, &y)?;
            Ok::<_, LoopError>((d, x, y))
        })();
        match res {
            Ok((d, x, y)) => r.record(d, || format!("x, y = {}", pts(&[&x, &y]))),
            Err(e) => r.record_err(e),
        }
    }
    r
}

/// Both divisions satisfy their defining equations.
pub fn division_suite(lp: &LoopInstance, samples: usize, tol: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::new("division", lp, samples, tol);
    for _ in 0..samples {
        let res = (|| {
            let (a, b) = (lp.random_point(&mut rng)?, lp.random_point(&mut rng)?);
            let y = lp.left_divide(&a, &b)?;
            let x = lp.right_divide(&b, &a)?;
            let d1 = lp.mul(&a, &y)?.rep.distance(&b.rep);
            let d2 = lp.mul(&x, &a)?.rep.distance(&b.rep);
            Ok::<_, LoopError>((d1.max(d2), a, b))
        })();
        match res {
            Ok((d, a, b)) => r.record(d, || format!("a, b = {}", pts(&[&a, &b]))),
            Err(e) => r.record_err(e),
        }
    }
    r
}

/// Every coset meets the section image once: section values are in exp m, differ from x by H,
/// are invariant under right multiplication by H, and canonicalization is idempotent.
pub fn section_suite(lp: &LoopInstance, samples: usize, tol: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::new("section", lp, samples, tol);
    for _ in 0..samples {
        let x = lp.random_group_element(&mut rng);
        let h = lp.random_stabilizer(&mut rng);
        let res = (|| {
            let p = lp.section(&x)?;
            let mut d: f64 = 0.0;
            if !lp.in_section_image(&p, tol) {
                d = f64::INFINITY;
            }
            let k = p.inverse().mul(&x);
            if !lp.in_stabilizer(&k, tol) {
                d = f64::INFINITY;
            }
            d = d.max(lp.section(&x.mul(&h))?.distance(&p));
            d = d.max(lp.section(&p)?.distance(&p));
            Ok::<_, LoopError>((d, p))
        })();
        match res {
            Ok((d, p)) => r.record(d, || format!("x = {x}; section = {p}")),
            Err(e) => r.record_err(e),
        }
    }
    // The identity coset is represented by the identity.
    if let Ok(e) = lp.section(&lp.random_stabilizer(&mut rng)) {
        let d = e.distance_to_identity();
        r.record(d, || format!("section(h) = {e}"));
    }
    r
}

/// exp(sX) * exp(tX) = exp((s+t)X) for X in m.
pub fn alternativity_suite(lp: &LoopInstance, samples: usize, tol: f64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport::new("left-alternative", lp, samples, tol);
    for _ in 0..samples {
        let x = lp.random_m_coords(&mut rng);
        let (s, t) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let sc = |f: f64| x.iter().map(|v| v * f).collect::<Vec<f64>>();
        let res = (|| {
            let lhs = lp.mul(&lp.exp_point(&sc(s))?, &lp.exp_point(&sc(t))?)?;
            let rhs = lp.exp_point(&sc(s + t))?;
            Ok::<_, LoopError>(lhs.rep.distance(&rhs.rep))
        })();
        match res {
            Ok(d) => r.record(d, || format!("X = {x:?}, s = {s}, t = {t}")),
            Err(e) => r.record_err(e),
        }
    }
    r
}

/// All suites in a fixed order, each with its own derived seed.
pub fn run_all_suites(lp: &LoopInstance, samples: usize, tol: f64, seed: u64) -> Vec<SuiteReport> {
    vec![
        bol_suite(lp, samples, tol, seed),
        bruck_suite(lp, samples, tol, seed.wrapping_add(1)),
        division_suite(lp, samples, tol, seed.wrapping_add(2)),
        section_suite(lp, samples, tol, seed.wrapping_add(3)),
        alternativity_suite(lp, samples, tol, seed.wrapping_add(4)),
    ]
}

/// Matrix list for counterexample output.
pub fn format_point(p: &LoopPoint) -> String {
    p.rep.blocks().iter().map(format_matrix).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests;
