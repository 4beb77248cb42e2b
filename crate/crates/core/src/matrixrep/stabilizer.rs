//! Explicit closed subgroups used as candidate stabilizers, as membership predicates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::expm::{expm, max_abs};
use super::group::{GroupElement, GroupKind};
use crate::exact::CMat;

/// Which generator pattern of the 4-dim Borel-type subgroups of PSL2(C) x PSL2(R).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BorelVariant {
    /// first diagonal exp((r i - 1) x + y), second rot(y)
    H5,
    /// first diagonal exp((r i - 1) x + i y), second rot(y)
    H6,
    /// first diagonal exp(i x + y), second rot(y)
    H8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StabilizerFamily {
    /// Unitary elements of the group (maximal compact subgroup for the realizations used here).
    MaximalCompact,
    /// Upper triangular [[l, b], [0, 1/l]] in PSL2(R); l = 1 when `unipotent`, else l > 0.
    Borel2 { unipotent: bool },
    /// Spiral group in SL3(R): diag block d^{-2t}, rotation block d^t R(t), free first row; t in R.
    Spiral { d: f64 },
    /// Upper unitriangular 3x3 real matrices.
    Unitriangular3,
    /// Subgroups of PSL2(C) x PSL2(R) with a triangular first component.
    Borel { variant: BorelVariant, r: f64 },
}

fn is_real(m: &CMat, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}

/// Distance of `a` to the lattice pi*Z.
fn dist_pi_z(a: f64) -> f64 {
    let k = (a / PI).round();
    (a - k * PI).abs()
}

fn rot(y: f64) -> CMat {
    let (s, c) = y.sin_cos();
    CMat::from_row_slice(2, 2, &[c.into(), s.into(), (-s).into(), c.into()])
}

impl StabilizerFamily {
    pub fn tag(&self) -> String {
        match self {
            StabilizerFamily::MaximalCompact => "maximal-compact".into(),
            StabilizerFamily::Borel2 { unipotent: true } => "upper-triangular-unipotent".into(),
            StabilizerFamily::Borel2 { unipotent: false } => "upper-triangular-positive".into(),
            StabilizerFamily::Spiral { d } => format!("spiral(d={d})"),
            StabilizerFamily::Unitriangular3 => "unitriangular".into(),
            StabilizerFamily::Borel { variant, r } => format!("{variant:?}(r={r})"),
        }
    }

    /// Group the family lives in, or `None` for families defined in any group.
    pub fn kinds(&self) -> Option<Vec<GroupKind>> {
        match self {
            StabilizerFamily::MaximalCompact => None,
            StabilizerFamily::Borel2 { .. } => Some(vec![GroupKind::Sl2R]),
            StabilizerFamily::Spiral { .. } | StabilizerFamily::Unitriangular3 => Some(vec![GroupKind::Sl3R]),
            StabilizerFamily::Borel { .. } => Some(vec![GroupKind::Sl2C, GroupKind::Sl2R]),
        }
    }

    pub fn dimension(&self, kinds: &[GroupKind]) -> usize {
        match self {
            StabilizerFamily::MaximalCompact => kinds
                .iter()
                .map(|k| match k {
                    GroupKind::Sl2R => 1,
                    GroupKind::So3 | GroupKind::Sl2C | GroupKind::Sl3R => 3,
                    GroupKind::Su21 => 4,
                })
                .sum(),
            StabilizerFamily::Borel2 { unipotent } => {
                if *unipotent {
                    1
                } else {
                    2
                }
            }
            StabilizerFamily::Spiral { .. } | StabilizerFamily::Unitriangular3 => 3,
            StabilizerFamily::Borel { .. } => 4,
        }
    }

    fn kinds_match(&self, g: &GroupElement) -> bool {
        self.kinds().map_or(true, |k| k == g.kinds())
    }

    pub fn contains(&self, g: &GroupElement, tol: f64) -> bool {
        if !self.kinds_match(g) {
            return false;
        }
        let tol = tol * g.max_entry().max(1.0);
        match self {
            StabilizerFamily::MaximalCompact => g.blocks().iter().all(|b| {
                let n = b.nrows();
                max_abs(&(b * b.adjoint() - CMat::identity(n, n))) <= tol
            }),
            StabilizerFamily::Borel2 { unipotent } => {
                let m = g.block(0);
                if !is_real(m, tol) || m[(1, 0)].norm() > tol || m[(0, 0)].re == 0.0 {
                    return false;
                }
                let s = m[(0, 0)].re.signum();
                let (a, d) = (s * m[(0, 0)].re, s * m[(1, 1)].re);
                if *unipotent {
                    (a - 1.0).abs() <= tol && (d - 1.0).abs() <= tol
                } else {
                    a > 0.0
                }
            }
            StabilizerFamily::Spiral { .. } => self.spiral_parameter(g, tol).is_some(),
            StabilizerFamily::Unitriangular3 => {
                let m = g.block(0);
                is_real(m, tol)
                    && (0..3).all(|i| (m[(i, i)].re - 1.0).abs() <= tol)
                    && [(1, 0), (2, 0), (2, 1)].iter().all(|&ij| m[ij].norm() <= tol)
            }
            StabilizerFamily::Borel { variant, r } => borel_member(*variant, *r, g, tol),
        }
    }

    /// For the spiral family: the parameter t with g in the family, if any.
    pub fn spiral_parameter(&self, g: &GroupElement, tol: f64) -> Option<f64> {
        let StabilizerFamily::Spiral { d } = self else { return None };
        if g.kinds() != [GroupKind::Sl3R] {
            return None;
        }
        let m = g.block(0);
        if !is_real(m, tol) || m[(1, 0)].norm() > tol || m[(2, 0)].norm() > tol {
            return None;
        }
        let (a, b, c, e) = (m[(1, 1)].re, m[(1, 2)].re, m[(2, 1)].re, m[(2, 2)].re);
        let rho2 = a * e - b * c;
        if rho2 <= 0.0 {
            return None;
        }
        let t = rho2.sqrt().ln() / d.ln();
        let rho = d.powf(t);
        let want = rot(t) * Complex64::new(rho, 0.0);
        let block_err = [(a, want[(0, 0)].re), (b, want[(0, 1)].re), (c, want[(1, 0)].re), (e, want[(1, 1)].re)]
            .iter()
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let corner_err = (m[(0, 0)].re - d.powf(-2.0 * t)).abs();
        (block_err <= tol && corner_err <= tol).then_some(t)
    }

    /// Random element, for closure checks.
    pub fn sample<R: Rng>(&self, rng: &mut R, kinds: &[GroupKind]) -> GroupElement {
        let mut u = |s: f64| rng.gen_range(-s..s);
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            StabilizerFamily::MaximalCompact => {
                let blocks = kinds.iter().map(|k| expm(&random_compact_generator(*k, &mut u))).collect();
                GroupElement::new(kinds.to_vec(), blocks).expect("shapes")
            }
            StabilizerFamily::Borel2 { unipotent } => {
                let l = if *unipotent { 1.0 } else { u(1.5).exp() };
                let b = u(2.0);
                let m = CMat::from_row_slice(2, 2, &[c(l), c(b), c(0.0), c(1.0 / l)]);
                GroupElement::new(vec![GroupKind::Sl2R], vec![m]).expect("shapes")
            }
            StabilizerFamily::Spiral { d } => {
                let (t, a, b) = (u(3.0), u(2.0), u(2.0));
                let rho = d.powf(t);
                let r = rot(t);
                let m = CMat::from_row_slice(
                    3,
                    3,
                    &[
                        c(d.powf(-2.0 * t)),
                        c(a),
                        c(b),
                        c(0.0),
                        r[(0, 0)] * rho,
                        r[(0, 1)] * rho,
                        c(0.0),
                        r[(1, 0)] * rho,
                        r[(1, 1)] * rho,
                    ],
                );
                GroupElement::new(vec![GroupKind::Sl3R], vec![m]).expect("shapes")
            }
            StabilizerFamily::Unitriangular3 => {
                let m = CMat::from_row_slice(
                    3,
                    3,
                    &[c(1.0), c(u(2.0)), c(u(2.0)), c(0.0), c(1.0), c(u(2.0)), c(0.0), c(0.0), c(1.0)],
                );
                GroupElement::new(vec![GroupKind::Sl3R], vec![m]).expect("shapes")
            }
            StabilizerFamily::Borel { variant, r } => {
                let (x, y) = (u(2.0), u(4.0));
                let z = Complex64::new(u(2.0), u(2.0));
                let v = borel_exponent(*variant, *r, x, y);
                let first = CMat::from_row_slice(2, 2, &[v.exp(), z, c(0.0), (-v).exp()]);
                GroupElement::new(vec![GroupKind::Sl2C, GroupKind::Sl2R], vec![first, rot(y)]).expect("shapes")
            }
        }
    }
}

fn borel_exponent(variant: BorelVariant, r: f64, x: f64, y: f64) -> Complex64 {
    match variant {
        BorelVariant::H5 => Complex64::new(-x + y, r * x),
        BorelVariant::H6 => Complex64::new(-x, r * x + y),
        BorelVariant::H8 => Complex64::new(y, x),
    }
}

/// Membership in the Borel-type families. The second component is +-rot(y), which fixes y
/// modulo pi; the first component fixes v = log(u_11) modulo i*pi. The remaining constraint is
/// a congruence modulo pi, searched over branches of y where it depends on the branch.
fn borel_member(variant: BorelVariant, r: f64, g: &GroupElement, tol: f64) -> bool {
    let (u, s) = (g.block(0), g.block(1));
    if u[(1, 0)].norm() > tol || u[(0, 0)].norm() == 0.0 {
        return false;
    }
    if !is_real(s, tol) || (s[(0, 0)].re - s[(1, 1)].re).abs() > tol || (s[(0, 1)].re + s[(1, 0)].re).abs() > tol {
        return false;
    }
    if (s[(0, 0)].re.powi(2) + s[(0, 1)].re.powi(2) - 1.0).abs() > tol {
        return false;
    }
    let y0 = s[(0, 1)].re.atan2(s[(0, 0)].re);
    let l = u[(0, 0)].norm().ln();
    let a = u[(0, 0)].arg();
    let ang_tol = tol.max(1e-12) * 10.0;
    match variant {
        BorelVariant::H5 => {
            if r == 0.0 {
                dist_pi_z(a) <= ang_tol
            } else {
                (-64..=64).any(|k| dist_pi_z(r * (y0 + k as f64 * PI - l) - a) <= ang_tol)
            }
        }
        BorelVariant::H6 => dist_pi_z(-r * l + y0 - a) <= ang_tol,
        BorelVariant::H8 => dist_pi_z(l - y0) <= ang_tol,
    }
}

fn random_compact_generator(kind: GroupKind, u: &mut impl FnMut(f64) -> f64) -> CMat {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match kind {
        GroupKind::Sl2R => {
            let t = u(3.0);
            CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(t, 0.0), c(-t, 0.0), c(0.0, 0.0)])
        }
        GroupKind::So3 | GroupKind::Sl2C => {
            let (a, b, t) = (u(2.0), u(2.0), u(2.0));
            CMat::from_row_slice(2, 2, &[c(0.0, a), c(t, b), c(-t, b), c(0.0, -a)])
        }
        GroupKind::Sl3R => {
            let (a, b, e) = (u(2.0), u(2.0), u(2.0));
            CMat::from_row_slice(
                3,
                3,
                &[c(0.0, 0.0), c(a, 0.0), c(b, 0.0), c(-a, 0.0), c(0.0, 0.0), c(e, 0.0), c(-b, 0.0), c(-e, 0.0), c(0.0, 0.0)],
            )
        }
        GroupKind::Su21 => {
            // s(u(2) + u(1)): anti-Hermitian upper 2x2 block and a compensating phase.
            let (a, b, t, p) = (u(2.0), u(2.0), u(2.0), u(2.0));
            CMat::from_row_slice(
                3,
                3,
                &[c(0.0, a + p), c(t, b), c(0.0, 0.0), c(-t, b), c(0.0, -a + p), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0 * p)],
            )
        }
    }
}

/// Whether x H = y H for the family H.
pub fn coset_equal(x: &GroupElement, y: &GroupElement, family: &StabilizerFamily, tol: f64) -> bool {
    family.contains(&y.inverse().mul(x), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(super) fn families() -> Vec<(StabilizerFamily, Vec<GroupKind>)> {
        let mut v = vec![
            (StabilizerFamily::Borel2 { unipotent: true }, vec![GroupKind::Sl2R]),
            (StabilizerFamily::Borel2 { unipotent: false }, vec![GroupKind::Sl2R]),
            (StabilizerFamily::Spiral { d: 2.0 }, vec![GroupKind::Sl3R]),
            (StabilizerFamily::Unitriangular3, vec![GroupKind::Sl3R]),
        ];
        for k in [GroupKind::Sl2R, GroupKind::So3, GroupKind::Sl2C, GroupKind::Su21, GroupKind::Sl3R] {
            v.push((StabilizerFamily::MaximalCompact, vec![k]));
        }
        for variant in [BorelVariant::H5, BorelVariant::H6, BorelVariant::H8] {
            for r in [0.0, 1.0, -1.0, 2.0] {
                v.push((StabilizerFamily::Borel { variant, r }, vec![GroupKind::Sl2C, GroupKind::Sl2R]));
            }
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn families_are_closed_under_products_and_inverses(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (f, kinds) in families() {
                let a = f.sample(&mut rng, &kinds);
                let b = f.sample(&mut rng, &kinds);
                prop_assert!(f.contains(&a, 1e-9), "{} sample", f.tag());
                prop_assert!(f.contains(&a.mul(&b), 1e-8), "{} product", f.tag());
                prop_assert!(f.contains(&a.inverse(), 1e-8), "{} inverse", f.tag());
                prop_assert!(a.det_defect() < 1e-9);
            }
        }
    }

    #[test]
    fn spiral_rejects_wrong_angle() {
        let f = StabilizerFamily::Spiral { d: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = f.sample(&mut rng, &[GroupKind::Sl3R]);
        let t = f.spiral_parameter(&g, 1e-9).unwrap();
        // Rotating the block by an extra quarter turn leaves the family.
        let mut m = g.block(0).clone();
        let r = rot(PI / 2.0);
        let lower = m.view((1, 1), (2, 2)) * r;
        m.view_mut((1, 1), (2, 2)).copy_from(&lower);
        let h = GroupElement::new(vec![GroupKind::Sl3R], vec![m]).unwrap();
        assert!(f.spiral_parameter(&h, 1e-9).is_none());
        assert!(t.is_finite());
    }

    #[test]
    fn borel_rejects_diagonal_mismatch() {
        // first diagonal 1/4, second component identity: only H5/H6 at r = 0 admit it.
        let c = |x: f64| Complex64::new(x, 0.0);
        let u = CMat::from_row_slice(2, 2, &[c(0.25), c(-0.6), c(0.0), c(4.0)]);
        let g = GroupElement::new(vec![GroupKind::Sl2C, GroupKind::Sl2R], vec![u, CMat::identity(2, 2)]).unwrap();
        let member = |v, r| StabilizerFamily::Borel { variant: v, r }.contains(&g, 1e-9);
        assert!(member(BorelVariant::H5, 0.0));
        assert!(member(BorelVariant::H6, 0.0));
        assert!(!member(BorelVariant::H8, 0.0));
        assert!(!member(BorelVariant::H5, 1.0));
        assert!(!member(BorelVariant::H6, 2.0));
    }
}
