//! Matrix functions on small dense complex matrices.

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::DVector;
use num_complex::Complex64;

use crate::exact::CMat;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &CMat) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// exp(A) by degree-13 Pade approximation with scaling and squaring.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * Complex64::new(0.5f64.powi(s), 0.0);
    let id = CMat::identity(n, n);
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn hermitian_apply(a: &CMat, f: impl Fn(f64) -> Option<f64>) -> Option<CMat> {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| f(l)).collect::<Option<_>>()?;
    let d = DVector::from_iterator(vals.len(), vals.into_iter().map(|x| Complex64::new(x, 0.0)));
    let u = &eig.eigenvectors;
    Some(u * CMat::from_diagonal(&d) * u.adjoint())
}

/// Principal logarithm of a Hermitian positive-definite matrix.
pub fn logm_hpd(a: &CMat) -> Option<CMat> {
    hermitian_apply(a, |l| (l > 0.0).then(|| l.ln()))
}

/// Positive square root of a Hermitian positive-definite matrix.
pub fn sqrtm_hpd(a: &CMat) -> Option<CMat> {
    hermitian_apply(a, |l| (l > 0.0).then(|| l.sqrt()))
}

fn fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Polar decomposition x = p k, p Hermitian positive definite, k unitary.
/// Scaled Newton iteration k <- (z k + k^{-*} / z) / 2 on the unitary factor.
pub fn polar(x: &CMat) -> (CMat, CMat) {
    let mut k = x.clone();
    for _ in 0..100 {
        let Some(inv) = k.clone().try_inverse() else { break };
        let z = (fro(&inv) / fro(&k)).sqrt();
        let next = (&k * Complex64::new(z, 0.0) + inv.adjoint() * Complex64::new(1.0 / z, 0.0)) * Complex64::new(0.5, 0.0);
        let step = fro(&(&next - &k));
        k = next;
        if step <= 1e-15 * fro(&k) {
            break;
        }
    }
    let p = x * k.adjoint();
    let p = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);
    (p, k)
}

/// Polar decomposition through the SVD, kept as an independent cross-check.
pub fn polar_svd(x: &CMat) -> (CMat, CMat) {
    let svd = SVD::new(x.clone(), true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^*");
    let s = svd.singular_values.map(|v| Complex64::new(v, 0.0));
    let p = &u * CMat::from_diagonal(&s) * u.adjoint();
    let k = &u * &vt;
    (p, k)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
