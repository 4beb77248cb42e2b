//! Elements of matrix groups that are direct products of simple factors.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::expm::{max_abs, polar};
use crate::exact::CMat;

/// Simple factor of a group, with the matrix group it is realized in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub enum GroupKind {
    /// PSL2(R), realized by SL2(R) modulo +-1.
    Sl2R,
    /// SO3(R), realized by SU2 modulo +-1.
    So3,
    /// PSL2(C), realized by SL2(C) modulo +-1.
    Sl2C,
    /// PSU(2,1), realized by SU(2,1) modulo cube roots of unity.
    Su21,
    /// SL3(R) (trivial center).
    Sl3R,
}

impl GroupKind {
    pub fn from_tag(tag: &str) -> Option<GroupKind> {
        Some(match tag {
            "sl2r" => GroupKind::Sl2R,
            "so3r" => GroupKind::So3,
            "sl2c" => GroupKind::Sl2C,
            "su21" => GroupKind::Su21,
            "sl3r" => GroupKind::Sl3R,
            _ => return None,
        })
    }

    pub fn tag(self) -> &'static str {
        match self {
            GroupKind::Sl2R => "sl2r",
            GroupKind::So3 => "so3r",
            GroupKind::Sl2C => "sl2c",
            GroupKind::Su21 => "su21",
            GroupKind::Sl3R => "sl3r",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            GroupKind::Sl2R => "PSL2(R)",
            GroupKind::So3 => "SO3(R)",
            GroupKind::Sl2C => "PSL2(C)",
            GroupKind::Su21 => "PSU(2,1)",
            GroupKind::Sl3R => "SL3(R)",
        }
    }

    pub fn size(self) -> usize {
        match self {
            GroupKind::Sl2R | GroupKind::So3 | GroupKind::Sl2C => 2,
            GroupKind::Su21 | GroupKind::Sl3R => 3,
        }
    }

    pub fn is_compact(self) -> bool {
        self == GroupKind::So3
    }

    /// Scalars c with c*I in the matrix realization, i.e. the center that is divided out.
    pub fn center(self) -> Vec<Complex64> {
        match self {
            GroupKind::Sl2R | GroupKind::So3 | GroupKind::Sl2C => {
                vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
            }
            GroupKind::Su21 => (0..3).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect(),
            GroupKind::Sl3R => vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Canonical representative of the class of `m` modulo the center.
    pub fn normalize(self, m: &CMat) -> CMat {
        let scale = max_abs(m).max(1.0);
        let first = (0..m.ncols()).map(|j| m[(0, j)]).find(|z| z.norm() > 1e-12 * scale);
        let Some(z) = first else { return m.clone() };
        match self {
            GroupKind::Sl3R => m.clone(),
            GroupKind::Su21 => {
                // Rotate the leading entry's argument into (-pi/3, pi/3].
                let arg = z.arg();
                let k = ((arg + PI / 3.0) / (2.0 * PI / 3.0)).ceil() - 1.0;
                m * Complex64::from_polar(1.0, -k * 2.0 * PI / 3.0)
            }
            _ => {
                let tol = 1e-12 * scale;
                let flip = if z.re.abs() > tol { z.re < 0.0 } else { z.im < 0.0 };
                if flip {
                    -m
                } else {
                    m.clone()
                }
            }
        }
    }
}

/// Element of a product of simple matrix groups, one block per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    kinds: Vec<GroupKind>,
    blocks: Vec<CMat>,
}

impl GroupElement {
    pub fn new(kinds: Vec<GroupKind>, blocks: Vec<CMat>) -> Option<GroupElement> {
        if kinds.len() != blocks.len() {
            return None;
        }
        for (k, b) in kinds.iter().zip(&blocks) {
            if b.nrows() != k.size() || b.ncols() != k.size() {
                return None;
            }
        }
        Some(GroupElement { kinds, blocks })
    }

    pub fn identity(kinds: &[GroupKind]) -> GroupElement {
        let blocks = kinds.iter().map(|k| CMat::identity(k.size(), k.size())).collect();
        GroupElement { kinds: kinds.to_vec(), blocks }
    }

    pub fn kinds(&self) -> &[GroupKind] {
        &self.kinds
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn with_block(&self, i: usize, m: CMat) -> GroupElement {
        let mut g = self.clone();
        g.blocks[i] = m;
        g
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.kinds, other.kinds, "group mismatch");
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        GroupElement { kinds: self.kinds.clone(), blocks }
    }

    pub fn inverse(&self) -> GroupElement {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.clone().try_inverse().expect("group elements are invertible"))
            .collect();
        GroupElement { kinds: self.kinds.clone(), blocks }
    }

    pub fn adjoint(&self) -> GroupElement {
        GroupElement { kinds: self.kinds.clone(), blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    /// Cartan involution x -> (x^*)^{-1}, blockwise.
    pub fn cartan(&self) -> GroupElement {
        self.adjoint().inverse()
    }

    /// Polar factors (p, k), x = p k, blockwise.
    pub fn polar(&self) -> (GroupElement, GroupElement) {
        let (ps, ks): (Vec<CMat>, Vec<CMat>) = self.blocks.iter().map(polar).unzip();
        (GroupElement { kinds: self.kinds.clone(), blocks: ps }, GroupElement { kinds: self.kinds.clone(), blocks: ks })
    }

    pub fn normalized(&self) -> GroupElement {
        let blocks = self.kinds.iter().zip(&self.blocks).map(|(k, b)| k.normalize(b)).collect();
        GroupElement { kinds: self.kinds.clone(), blocks }
    }

    /// Entrywise distance modulo the center, relative to max(1, largest entry of self); max over blocks.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        assert_eq!(self.kinds, other.kinds, "group mismatch");
        self.kinds
            .iter()
            .zip(self.blocks.iter().zip(&other.blocks))
            .map(|(k, (a, b))| {
                let scale = max_abs(a).max(1.0);
                k.center().iter().map(|c| max_abs(&(a - b * *c))).fold(f64::INFINITY, f64::min) / scale
            })
            .fold(0.0, f64::max)
    }

    /// Distance from the identity, modulo the center.
    pub fn distance_to_identity(&self) -> f64 {
        self.distance(&GroupElement::identity(&self.kinds))
    }

    pub fn max_entry(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Departure of each block from SL: max |det - 1| (modulo the center for projective factors).
    pub fn det_defect(&self) -> f64 {
        self.kinds
            .iter()
            .zip(&self.blocks)
            .map(|(k, b)| {
                let d = b.determinant();
                let n = k.size() as i32;
                k.center().iter().map(|c| (d - c.powi(n)).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

/// Matrix entries with 12 significant digits, for counterexample reports.
pub fn format_matrix(m: &CMat) -> String {
    let mut rows = Vec::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        rows.push(format!("[{}]", row.join(", ")));
    }
    format!("[{}]", rows.join(", "))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.11e}", z.re)
    } else {
        format!("{:.11e}{:+.11e}i", z.re, z.im)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(format_matrix).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sign_normalization_identifies_plus_minus() {
        let m = CMat::from_row_slice(2, 2, &[c(-2.0), c(1.0), c(1.0), c(-1.0)]);
        let k = GroupKind::Sl2R;
        assert_eq!(k.normalize(&m), k.normalize(&-m.clone()));
        assert!(k.normalize(&m)[(0, 0)].re > 0.0);
        let g = GroupElement::new(vec![k], vec![m.clone()]).unwrap();
        let h = GroupElement::new(vec![k], vec![-m]).unwrap();
        assert!(g.distance(&h) < 1e-15);
        // Leading zero entry falls through to the next one.
        let z = CMat::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
        assert!(k.normalize(&z)[(0, 1)].re > 0.0);
    }

    #[test]
    fn cube_roots_are_identified_for_su21() {
        let k = GroupKind::Su21;
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let m = CMat::identity(3, 3) * Complex64::new(0.3, 0.2) + CMat::from_fn(3, 3, |i, j| c((i + 2 * j) as f64));
        let a = k.normalize(&m);
        let b = k.normalize(&(&m * w));
        assert!(max_abs(&(a - b)) < 1e-12);
    }

    #[test]
    fn cartan_involution_squares_to_identity() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0), c(3.0), c(1.0), c(2.0)]);
        let g = GroupElement::new(vec![GroupKind::Sl2R], vec![m]).unwrap();
        assert!(g.cartan().cartan().distance(&g) < 1e-14);
        assert!(g.det_defect() < 1e-14);
    }
}
