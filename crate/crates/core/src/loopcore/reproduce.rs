//! Coset computations showing that certain stabilizers admit no continuous section into exp m.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::exact::{fmt_q, q, q_to_f64, qi, CMat, QMatrix, Q};
use crate::matrixrep::{format_matrix, max_abs, BorelVariant, GroupElement, GroupKind, StabilizerFamily};

const MEMBER_TOL: f64 = 1e-9;

/// r values at which the Borel-type families are examined.
pub const PROP19_RADII: [f64; 4] = [0.0, 1.0, -1.0, 2.0];

fn qm(rows: &[&[Q]]) -> QMatrix {
    QMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn to_cmat(m: &QMatrix) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(q_to_f64(&m[(i, j)]), 0.0))
}

fn real_cmat(n: usize, v: &[f64]) -> CMat {
    CMat::from_iterator(n, n, v.iter().map(|&x| Complex64::new(x, 0.0))).transpose()
}

fn single(kind: GroupKind, m: CMat) -> GroupElement {
    GroupElement::new(vec![kind], vec![m]).expect("shape")
}

fn det2(m: &QMatrix) -> Q {
    &m[(0, 0)] * &m[(1, 1)] - &m[(0, 1)] * &m[(1, 0)]
}

fn det3(m: &QMatrix) -> Q {
    let e = |i: usize, j: usize| m[(i, j)].clone();
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

fn is_symmetric(m: &QMatrix) -> bool {
    m.transpose() == *m
}

/// Leading principal minors positive (Sylvester), for real symmetric float matrices.
fn positive_definite(m: &CMat) -> bool {
    let n = m.nrows();
    (1..=n).all(|k| m.view((0, 0), (k, k)).map(|z| z.re).determinant() > 0.0)
}

fn float_symmetric_det1(m: &CMat, tol: f64) -> bool {
    let scale = max_abs(m).max(1.0);
    let sym = (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol * scale));
    let det = m.determinant();
    sym && (det - Complex64::new(1.0, 0.0)).norm() <= tol * scale.powi(m.nrows() as i32)
}

/// The one-parameter coset family whose canonical representatives leave every compact set.
#[derive(Clone, Debug, Serialize)]
pub struct Lemma7Row {
    pub k: u32,
    pub c: String,
    /// max |entry| of s(c).
    pub s_norm: f64,
    /// Entries of g(c), row-major.
    pub g: Vec<f64>,
    pub s_in_m: bool,
    /// g(c)^{-1} s(c) upper unitriangular, exactly.
    pub coset_exact: bool,
    /// Same membership through the float predicates of both admissible stabilizers.
    pub coset_family: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma7Report {
    pub rows: Vec<Lemma7Row>,
    pub base_cases: bool,
    pub norm_monotone: bool,
    pub final_norm: f64,
    /// Entrywise distance of g(c) over the last two grid steps.
    pub g_cauchy: f64,
    pub verdict: bool,
    pub messages: Vec<String>,
}

fn s_of(c: &Q) -> QMatrix {
    let one = Q::one();
    qm(&[&[&one + c, c.clone()], &[c.clone(), (c * c + &one) / (&one + c)]])
}

fn g_of(c: &Q) -> QMatrix {
    let one = Q::one();
    qm(&[&[&one + c, one.clone()], &[c.clone(), one.clone()]])
}

fn inv2(m: &QMatrix) -> QMatrix {
    let d = det2(m);
    qm(&[&[&m[(1, 1)] / &d, -&m[(0, 1)] / &d], &[-&m[(1, 0)] / &d, &m[(0, 0)] / &d]])
}

fn unitriangular(m: &QMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..=i).all(|j| if i == j { m[(i, j)].is_one() } else { m[(i, j)].is_zero() }))
}

/// Membership of s in M = {[[x+y, z], [z, x-y]] : x >= 1, x^2 - y^2 - z^2 = 1}.
fn in_hyperboloid(s: &QMatrix) -> bool {
    let two = qi(2);
    let x = (&s[(0, 0)] + &s[(1, 1)]) / &two;
    is_symmetric(s) && det2(s).is_one() && x >= Q::one()
}

fn lemma7_row(k: u32, c: &Q) -> Lemma7Row {
    let s = s_of(c);
    let g = g_of(c);
    let h = inv2(&g).mul(&s);
    let hf = single(GroupKind::Sl2R, to_cmat(&h));
    let coset_family = StabilizerFamily::Borel2 { unipotent: true }.contains(&hf, MEMBER_TOL)
        && StabilizerFamily::Borel2 { unipotent: false }.contains(&hf, MEMBER_TOL);
    Lemma7Row {
        k,
        c: fmt_q(c),
        s_norm: max_abs(&to_cmat(&s)),
        g: (0..4).map(|i| q_to_f64(&g[(i / 2, i % 2)])).collect(),
        s_in_m: in_hyperboloid(&s),
        coset_exact: unitriangular(&h) && det2(&g).is_one(),
        coset_family,
    }
}

fn grid(k: u32) -> Q {
    Q::from_integer((-1).into()) + Q::new(1.into(), num_bigint::BigInt::from(10).pow(k))
}

pub fn reproduce_lemma7() -> Lemma7Report {
    let mut messages = Vec::new();
    let base0 = lemma7_row(0, &Q::zero());
    let base1 = lemma7_row(0, &Q::one());
    let s0_identity = s_of(&Q::zero()) == QMatrix::identity(2);
    let s1 = s_of(&Q::one()) == qm(&[&[qi(2), qi(1)], &[qi(1), qi(1)]]);
    let base_cases = s0_identity && s1 && base0.coset_exact && base1.coset_exact && base1.s_in_m;
    if !base_cases {
        messages.push("base cases c = 0, 1 failed".into());
    }
    let rows: Vec<Lemma7Row> = (1..=8).map(|k| lemma7_row(k, &grid(k))).collect();
    for r in &rows {
        if !(r.s_in_m && r.coset_exact && r.coset_family) {
            messages.push(format!("k = {}: membership failed", r.k));
        }
    }
    let norm_monotone = rows.windows(2).all(|w| w[1].s_norm > w[0].s_norm);
    let final_norm = rows.last().map_or(0.0, |r| r.s_norm);
    let n = rows.len();
    let g_cauchy = rows[n - 1].g.iter().zip(&rows[n - 2].g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if final_norm <= 1e6 {
        messages.push(format!("|s(c)| = {final_norm:e} at the last grid point"));
    }
    if g_cauchy >= 1e-4 {
        messages.push(format!("g(c) not Cauchy: {g_cauchy:e}"));
    }
    let verdict = messages.is_empty() && norm_monotone;
    Lemma7Report { rows, base_cases, norm_monotone, final_norm, g_cauchy, verdict, messages }
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop12Report {
    pub d: f64,
    pub m1: String,
    pub m2: String,
    pub m1_valid: bool,
    pub m2_valid: bool,
    /// Spiral parameters of g1^{-1} m1 and g1^{-1} m2.
    pub t_values: Vec<Option<f64>>,
    pub distinct_t: usize,
    pub distance: f64,
    /// The unitriangular family mirrors the hyperbolic plane divergence.
    pub h3_rows: Vec<Lemma7Row>,
    pub h3_base_case: bool,
    pub verdict: bool,
    pub messages: Vec<String>,
}

fn g3_of(c: &Q) -> QMatrix {
    let (o, z) = (Q::one(), Q::zero());
    qm(&[&[&o + c, o.clone(), z.clone()], &[c.clone(), o.clone(), z.clone()], &[z.clone(), z.clone(), o.clone()]])
}

fn s3_of(c: &Q) -> QMatrix {
    let (o, z) = (Q::one(), Q::zero());
    qm(&[
        &[&o + c, c.clone(), z.clone()],
        &[c.clone(), (c * c + &o) / (c + &o), z.clone()],
        &[z.clone(), z.clone(), o.clone()],
    ])
}

fn inv3(m: &QMatrix) -> QMatrix {
    let d = det3(m);
    let e = |i: usize, j: usize| m[(i, j)].clone();
    let cof = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let c: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        let minor = e(r[0], c[0]) * e(r[1], c[1]) - e(r[0], c[1]) * e(r[1], c[0]);
        if (i + j) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    let rows: Vec<Vec<Q>> = (0..3).map(|i| (0..3).map(|j| cof(j, i) / &d).collect()).collect();
    QMatrix::from_rows(&rows)
}

fn h3_row(k: u32, c: &Q) -> Lemma7Row {
    let s = s3_of(c);
    let g = g3_of(c);
    let h = inv3(&g).mul(&s);
    let hf = single(GroupKind::Sl3R, to_cmat(&h));
    let sf = to_cmat(&s);
    Lemma7Row {
        k,
        c: fmt_q(c),
        s_norm: max_abs(&sf),
        g: (0..9).map(|i| q_to_f64(&g[(i / 3, i % 3)])).collect(),
        s_in_m: is_symmetric(&s) && det3(&s).is_one() && positive_definite(&sf),
        coset_exact: unitriangular(&h) && det3(&g).is_one(),
        coset_family: StabilizerFamily::Unitriangular3.contains(&hf, MEMBER_TOL),
    }
}

/// Two representatives of one spiral-group coset in exp m1, plus the unitriangular divergence.
pub fn reproduce_prop12(d: f64) -> Prop12Report {
    let mut messages = Vec::new();
    let pi = std::f64::consts::PI;
    let (dd, ee) = (d.powf(-4.0 * pi), d.powf(2.0 * pi));
    let m1 = real_cmat(3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let m2 = real_cmat(3, &[2.0 * dd, dd, 0.0, dd, (dd + ee) / 2.0, 0.0, 0.0, 0.0, ee]);
    let g1 = g3_of(&Q::one());
    let g1_inv = to_cmat(&inv3(&g1));
    let fam = StabilizerFamily::Spiral { d };
    let check = |m: &CMat| {
        let valid = float_symmetric_det1(m, 1e-12) && positive_definite(m);
        let t = fam.spiral_parameter(&single(GroupKind::Sl3R, &g1_inv * m), MEMBER_TOL);
        (valid, t)
    };
    let (m1_valid, t1) = check(&m1);
    let (m2_valid, t2) = check(&m2);
    if !(d > 1.0) {
        messages.push(format!("d = {d} must exceed 1"));
    }
    if !m1_valid || !m2_valid {
        messages.push("a representative is not in exp m1".into());
    }
    let mut ts: Vec<f64> = [t1, t2].iter().flatten().copied().collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let distinct_t = ts.len();
    if t1.is_none() || t2.is_none() {
        messages.push("a representative is not in g1 H2".into());
    }
    let distance = max_abs(&(&m1 - &m2));
    if distance <= 0.1 {
        messages.push(format!("representatives coincide (distance {distance:e})"));
    }
    let h3_base_case = s3_of(&Q::zero()) == QMatrix::identity(3);
    let h3_rows: Vec<Lemma7Row> = (1..=8).map(|k| h3_row(k, &grid(k))).collect();
    for r in &h3_rows {
        if !(r.s_in_m && r.coset_exact && r.coset_family) {
            messages.push(format!("unitriangular family, k = {}: membership failed", r.k));
        }
    }
    let monotone = h3_rows.windows(2).all(|w| w[1].s_norm > w[0].s_norm);
    let last = h3_rows.last().map_or(0.0, |r| r.s_norm);
    if !monotone || last <= 1e6 || !h3_base_case {
        messages.push("unitriangular family does not diverge".into());
    }
    let verdict = messages.is_empty() && distinct_t >= 2;
    Prop12Report {
        d,
        m1: format_matrix(&m1),
        m2: format_matrix(&m2),
        m1_valid,
        m2_valid,
        t_values: vec![t1, t2],
        distinct_t,
        distance,
        h3_rows,
        h3_base_case,
        verdict,
        messages,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop19Case {
    pub variant: String,
    pub r: f64,
    /// Printed pair: both in exp m5, both in (g,1) H, distinct.
    pub printed_m1_in_coset: bool,
    pub printed_m2_in_coset: bool,
    pub printed_ok: bool,
    /// Constructed second representative g U_a, with its diagonal parameter.
    pub constructed_a: String,
    pub constructed: String,
    pub constructed_valid: bool,
    pub constructed_in_coset: bool,
    pub constructed_distance: f64,
    pub constructed_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop19Report {
    pub g: String,
    pub m1: String,
    pub m2: String,
    pub printed_in_exp_m: bool,
    pub printed_distance: f64,
    pub cases: Vec<Prop19Case>,
    /// All printed-pair checks hold.
    pub printed_verdict: bool,
    /// Every (variant, r) has a verified pair of distinct representatives of one coset.
    pub constructed_verdict: bool,
    pub messages: Vec<String>,
}

fn variants() -> [(BorelVariant, &'static str); 3] {
    [(BorelVariant::H5, "H5"), (BorelVariant::H6, "H6"), (BorelVariant::H8, "H8")]
}

/// (M, 1) in PSL2(C) x PSL2(R) from a real 2x2 first component.
fn pair(first: CMat) -> GroupElement {
    GroupElement::new(vec![GroupKind::Sl2C, GroupKind::Sl2R], vec![first, CMat::identity(2, 2)]).expect("shapes")
}

/// First component real symmetric positive definite with det 1, second the identity.
fn prop19_exact_member(m: &QMatrix) -> bool {
    in_hyperboloid(m)
}

/// Diagonal parameter a such that g U_a, U_a = [[a, (4a - 1/a)/5], [0, 1/a]], lies in (g,1) H.
fn constructed_parameter(variant: BorelVariant, r: f64) -> (f64, String) {
    let pi = std::f64::consts::PI;
    match variant {
        BorelVariant::H5 | BorelVariant::H6 if r == 0.0 => (0.25, "1/4".into()),
        BorelVariant::H6 => ((-pi / r).exp(), format!("exp(-pi/{r})")),
        BorelVariant::H5 | BorelVariant::H8 => (pi.exp(), "exp(pi)".into()),
    }
}

struct Prop19Data {
    g: QMatrix,
    m1: QMatrix,
    m2: QMatrix,
    g_ok: bool,
    printed_in_exp_m: bool,
}

fn prop19_data() -> Prop19Data {
    let g = qm(&[&[qi(5), qi(1)], &[qi(4), qi(1)]]);
    let m1 = qm(&[&[q(5, 4), qi(1)], &[qi(1), q(8, 5)]]);
    let m2 = qm(&[&[qi(5), qi(4)], &[qi(4), q(17, 5)]]);
    let g_ok = det2(&g).is_one();
    let printed_in_exp_m = prop19_exact_member(&m1) && prop19_exact_member(&m2);
    Prop19Data { g, m1, m2, g_ok, printed_in_exp_m }
}

fn variant_name(variant: BorelVariant) -> &'static str {
    variants().iter().find(|(v, _)| *v == variant).map_or("?", |(_, n)| n)
}

fn prop19_case_with(data: &Prop19Data, variant: BorelVariant, r: f64) -> Prop19Case {
    let (gf, m1f, m2f) = (to_cmat(&data.g), to_cmat(&data.m1), to_cmat(&data.m2));
    let g_inv = pair(to_cmat(&inv2(&data.g)));
    let printed_distance = max_abs(&(&m1f - &m2f));
    let fam = StabilizerFamily::Borel { variant, r };
    let in_coset = |m: &CMat| fam.contains(&g_inv.mul(&pair(m.clone())), MEMBER_TOL);
    let p1 = in_coset(&m1f);
    let p2 = in_coset(&m2f);
    let printed_ok = p1 && p2 && data.printed_in_exp_m && printed_distance > 1.0;
    let (a, a_label) = constructed_parameter(variant, r);
    let u = real_cmat(2, &[a, (4.0 * a - 1.0 / a) / 5.0, 0.0, 1.0 / a]);
    let cm = &gf * &u;
    let constructed_valid = float_symmetric_det1(&cm, 1e-12) && positive_definite(&cm);
    let constructed_in_coset = in_coset(&cm);
    let constructed_distance = max_abs(&(&cm - &m2f));
    let constructed_ok = data.g_ok && constructed_valid && constructed_in_coset && p2 && constructed_distance > 1.0;
    Prop19Case {
        variant: variant_name(variant).into(),
        r,
        printed_m1_in_coset: p1,
        printed_m2_in_coset: p2,
        printed_ok,
        constructed_a: a_label,
        constructed: format_matrix(&cm),
        constructed_valid,
        constructed_in_coset,
        constructed_distance,
        constructed_ok,
    }
}

/// Printed and constructed duplicate representatives for one Borel-type family at one r.
pub fn prop19_case(variant: BorelVariant, r: f64) -> Prop19Case {
    prop19_case_with(&prop19_data(), variant, r)
}

pub fn reproduce_prop19() -> Prop19Report {
    let mut messages = Vec::new();
    let data = prop19_data();
    if !data.g_ok || !data.printed_in_exp_m {
        messages.push("printed data does not lie in the stated sets".into());
    }
    let (gf, m1f, m2f) = (to_cmat(&data.g), to_cmat(&data.m1), to_cmat(&data.m2));
    let printed_distance = max_abs(&(&m1f - &m2f));
    let mut cases = Vec::new();
    for (variant, vname) in variants() {
        for r in PROP19_RADII {
            let c = prop19_case_with(&data, variant, r);
            if !c.printed_ok {
                messages.push(format!(
                    "{vname}, r = {r}: printed pair is not in one coset (m1: {}, m2: {})",
                    c.printed_m1_in_coset, c.printed_m2_in_coset
                ));
            }
            if !c.constructed_ok {
                messages.push(format!("{vname}, r = {r}: constructed pair failed"));
            }
            cases.push(c);
        }
    }
    let printed_verdict = cases.iter().all(|c| c.printed_ok);
    let constructed_verdict = data.g_ok && cases.iter().all(|c| c.constructed_ok);
    Prop19Report {
        g: format_matrix(&gf),
        m1: format_matrix(&m1f),
        m2: format_matrix(&m2f),
        printed_in_exp_m: data.printed_in_exp_m,
        printed_distance,
        cases,
        printed_verdict,
        constructed_verdict,
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma7_grid_diverges_while_cosets_converge() {
        let r = reproduce_lemma7();
        assert!(r.verdict, "{:?}", r.messages);
        assert!(r.final_norm > 1e6);
        // (c^2+1)/(1+c) at c = -1 + 1e-8 is about 2e8.
        assert!((r.final_norm / 2e8 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn prop12_two_representatives() {
        for d in [2.0, 3.0] {
            let r = reproduce_prop12(d);
            assert!(r.verdict, "{:?}", r.messages);
            let t2 = r.t_values[1].unwrap();
            assert!((t2 - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn prop19_constructed_pairs_hold_and_printed_pair_only_at_r0() {
        let r = reproduce_prop19();
        assert!(r.constructed_verdict, "{:?}", r.messages);
        for c in &r.cases {
            let expect = c.r == 0.0 && c.variant != "H8";
            assert_eq!(c.printed_ok, expect, "{} r={}", c.variant, c.r);
        }
    }
}
