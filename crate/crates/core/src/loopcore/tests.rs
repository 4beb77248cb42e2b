use super::*;
use crate::liealg::parse_algebra_text;
use crate::matrixrep::parse_rep_text;

fn rep(alg: &str, rep: &str) -> MatrixRep {
    let a = Arc::new(parse_algebra_text(alg).unwrap());
    parse_rep_text(rep, &a).unwrap()
}

fn sl2() -> MatrixRep {
    rep(include_str!("../../catalog/algebras/sl2r.alg"), include_str!("../../catalog/reps/sl2r.rep"))
}

fn so3() -> MatrixRep {
    rep(include_str!("../../catalog/algebras/so3r.alg"), include_str!("../../catalog/reps/so3r.rep"))
}

fn sl3() -> MatrixRep {
    rep(include_str!("../../catalog/algebras/sl3r.alg"), include_str!("../../catalog/reps/sl3r.rep"))
}

fn h2() -> LoopInstance {
    LoopInstance::hyperbolic("H2", sl2()).unwrap()
}

#[test]
fn hyperbolic_plane_product_is_closed_form_polar_factor() {
    let lp = h2();
    let a = lp.exp_point(&[1.0, 0.0, 0.0]).unwrap();
    let b = lp.exp_point(&[0.0, 1.0, 0.0]).unwrap();
    let ab = lp.mul(&a, &b).unwrap();
    // sqrt of a 2x2 positive matrix A with det 1 is (A + I) / sqrt(tr A + 2).
    let x = lp.rep().exp(&[1.0, 0.0, 0.0]).mul(&lp.rep().exp(&[0.0, 1.0, 0.0]));
    let aa = x.block(0) * x.block(0).adjoint();
    let tr = aa.trace().re;
    let want = (aa + CMat::identity(2, 2)) / Complex64::new((tr + 2.0).sqrt(), 0.0);
    assert!(crate::matrixrep::max_abs(&(ab.rep.block(0) - want)) < 1e-12);
}

#[test]
fn identity_is_two_sided() {
    let lp = h2();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e = lp.identity();
    for _ in 0..20 {
        let x = lp.random_point(&mut rng).unwrap();
        assert!(lp.mul(&e, &x).unwrap().rep.distance(&x.rep) < 1e-12);
        assert!(lp.mul(&x, &e).unwrap().rep.distance(&x.rep) < 1e-12);
        assert!(lp.left_divide(&x, &x).unwrap().rep.distance_to_identity() < 1e-12);
        assert!(lp.check_bol(&e, &e, &x, 1e-13));
    }
}

#[test]
fn sl3_one_parameter_powers() {
    let lp = LoopInstance::hyperbolic("5-dim", sl3()).unwrap();
    assert_eq!(lp.dim(), 5);
    let mut x = vec![0.0; 8];
    x[4] = 0.7;
    let a = lp.exp_point(&x).unwrap();
    let aa = lp.mul(&a, &a).unwrap();
    x[4] = 1.4;
    assert!(aa.rep.distance(&lp.exp_point(&x).unwrap().rep) < 1e-12);
}

#[test]
fn compact_factor_is_not_hyperbolic() {
    assert!(matches!(LoopInstance::hyperbolic("x", so3()), Err(LoopError::NotHyperbolic(0, _))));
}

#[test]
fn trivial_hom_extension_equals_direct_product() {
    let base = h2();
    let ext = LoopInstance::scheerer_extension(&base, &so3(), vec![FiberHom::Trivial], false, "ext").unwrap();
    let prod = LoopInstance::direct_product(&base, &LoopInstance::group("SO3", so3())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x = ext.random_group_element(&mut rng);
        let y = ext.random_group_element(&mut rng);
        let (a, b) = (ext.point(&x).unwrap(), ext.point(&y).unwrap());
        let (c, d) = (prod.point(&x).unwrap(), prod.point(&y).unwrap());
        assert_eq!(ext.mul(&a, &b).unwrap(), prod.mul(&c, &d).unwrap());
    }
    assert_eq!(ext.m(), prod.m());
    assert_eq!(ext.h(), prod.h());
}

#[test]
fn product_with_trivial_loop_is_unchanged() {
    let lp = h2();
    let t = lp.with_trivial();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (a, b) = (lp.random_point(&mut rng).unwrap(), lp.random_point(&mut rng).unwrap());
    assert_eq!(lp.mul(&a, &b).unwrap(), t.mul(&a, &b).unwrap());
}

#[test]
fn rotation_extension_has_graph_stabilizer() {
    let ext = LoopInstance::scheerer_extension(&h2(), &so3(), vec![FiberHom::Rotation { base: 0 }], false, "ext").unwrap();
    assert_eq!(ext.dim(), 5);
    assert_eq!(ext.h().dim(), 1);
    let x = &ext.h().basis()[0];
    // (e3, c * e3-of-so3) with the torus generator diag(i, -i) = ie1.
    assert_eq!(x.coeffs()[2], Q::from_integer(1.into()));
    assert_eq!(x.coeffs()[3], Q::from_integer(1.into()));
    let rep = crate::involution::bol_triple_check(ext.h(), ext.m()).unwrap();
    assert!(rep.ok(), "{rep:?}");
    assert!(bol_suite(&ext, 200, 1e-8, 3).verdict);
    // Non-abelian fiber: the automorphic inverse property fails on fiber points.
    assert!(!bruck_suite(&ext, 200, 1e-8, 3).verdict);
}

fn not_a_hom(ks: &[CMat]) -> CMat {
    let (c, s) = (ks[0][(0, 0)].re, ks[0][(0, 1)].re);
    let t = s.atan2(c) * 0.5 + 0.3;
    CMat::from_row_slice(2, 2, &[Complex64::from_polar(1.0, t), 0.0.into(), 0.0.into(), Complex64::from_polar(1.0, -t)])
}

#[test]
fn non_homomorphism_rejected() {
    let hom = FiberHom::Custom { name: "half-angle", f: not_a_hom };
    assert!(matches!(LoopInstance::scheerer_extension(&h2(), &so3(), vec![hom], false, "bad"), Err(LoopError::Hom(_))));
}

#[test]
fn suites_pass_on_hyperbolic_plane() {
    for r in run_all_suites(&h2(), 300, 1e-9, 0) {
        assert!(r.verdict, "{r:?}");
    }
}

#[test]
fn direct_product_h2_h2() {
    let lp = LoopInstance::direct_product(&h2(), &h2()).unwrap();
    assert_eq!(lp.dim(), 4);
    for r in run_all_suites(&lp, 200, 1e-8, 9) {
        assert!(r.verdict, "{r:?}");
    }
}


fn sl2c() -> MatrixRep {
    rep(include_str!("../../catalog/algebras/sl2c.alg"), include_str!("../../catalog/reps/sl2c.rep"))
}

#[test]
fn fiber_first_extension_matches_reordered_blocks() {
    let a = LoopInstance::scheerer_extension(&h2(), &sl2c(), vec![FiberHom::Rotation { base: 0 }], false, "a").unwrap();
    let b = LoopInstance::scheerer_extension(&h2(), &sl2c(), vec![FiberHom::Rotation { base: 0 }], true, "b").unwrap();
    assert_eq!(b.group_tag(), "sl2c+sl2r");
    assert_eq!(a.dim(), b.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let swap = |g: &GroupElement| {
        let ks = g.kinds();
        GroupElement::new(vec![ks[1], ks[0]], vec![g.block(1).clone(), g.block(0).clone()]).unwrap()
    };
    for _ in 0..50 {
        let x = a.random_group_element(&mut rng);
        let y = a.random_group_element(&mut rng);
        let ab = a.mul(&a.point(&x).unwrap(), &a.point(&y).unwrap()).unwrap();
        let ba = b.mul(&b.point(&swap(&x)).unwrap(), &b.point(&swap(&y)).unwrap()).unwrap();
        assert!(swap(&ab.rep).distance(&ba.rep) < 1e-10);
    }
    assert!(bol_suite(&b, 200, 1e-8, 4).verdict);
    assert!(section_suite(&b, 200, 1e-8, 4).verdict);
}

#[test]
fn two_block_fiber_and_identity_hom() {
    let fiber = MatrixRep::direct_sum(&[&so3(), &sl2()]).unwrap();
    let homs = vec![FiberHom::Rotation { base: 0 }, FiberHom::Rotation { base: 0 }];
    let ext = LoopInstance::scheerer_extension(&h2(), &fiber, homs, false, "e").unwrap();
    assert_eq!(ext.dim(), 8);
    assert_eq!(ext.h().dim(), 1);
    assert!(bol_suite(&ext, 200, 1e-8, 2).verdict);
    let h3 = LoopInstance::hyperbolic("H3", sl2c()).unwrap();
    let ext = LoopInstance::scheerer_extension(&h3, &so3(), vec![FiberHom::Identity { base: 0 }], false, "f").unwrap();
    assert_eq!((ext.dim(), ext.h().dim()), (6, 3));
    assert!(crate::involution::bol_triple_check(ext.h(), ext.m()).unwrap().ok());
    for r in [bol_suite(&ext, 200, 1e-8, 1), division_suite(&ext, 200, 1e-8, 1), section_suite(&ext, 200, 1e-8, 1)] {
        assert!(r.verdict, "{r:?}");
    }
    // SU2 has no nontrivial image in PSL2(R).
    assert!(LoopInstance::scheerer_extension(&h3, &sl2(), vec![FiberHom::Identity { base: 0 }], false, "g").is_err());
}
