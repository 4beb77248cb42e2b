//! One line per acceptance criterion. Exits nonzero when a criterion fails that is not listed
//! in `UNATTAINABLE`, or when a listed one unexpectedly passes.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use bolsec::catalog::{
    compare_golden, default_catalog_dir, emit_report, eval_element, golden_path, load_catalog, param_samples,
    run_classification, Catalog, ClassifyOptions, Env, Evidence, Group, Status,
};
use bolsec::involution::{check_exclusion, CheckMode, ExclusionWitness, WitnessKind};
use bolsec::liealg::{LieAlgebra, Subspace};
use bolsec::loopcore::{bol_suite, bruck_suite, reproduce_lemma7, reproduce_prop12, reproduce_prop19, section_suite};
use num_traits::Zero;

/// Criteria that cannot hold as stated, with the reason.
const UNATTAINABLE: &[(usize, &str)] = &[
    (4, "a Scheerer extension contains its nonabelian fiber group as a subloop, so (xy)^-1 = x^-1 y^-1 fails there"),
    (5, "the printed second representative of the PSL2(C) x PSL2(R) coset is not in the coset for most (Hi, r)"),
];

struct Outcome {
    ok: bool,
    detail: String,
}

fn span(alg: &Arc<LieAlgebra>, gens: &[&str]) -> Subspace {
    let v: Vec<_> = gens.iter().map(|g| eval_element(alg, &Env::new(), g).unwrap()).collect();
    Subspace::span(alg, &v).unwrap()
}

fn envs(g: &Group, spaces: &[&str]) -> Vec<Env> {
    let mut ps = Vec::new();
    for s in spaces {
        for p in &g.space(s).unwrap().params {
            if !ps.iter().any(|q: &bolsec::catalog::Param| q.name == p.name) {
                ps.push(p.clone());
            }
        }
    }
    param_samples(&ps)
}

fn at(g: &Group, name: &str, env: &Env) -> Subspace {
    g.space(name).unwrap().at(g.algebra().unwrap(), env).unwrap()
}

fn exact_tables(cat: &Catalog) -> Outcome {
    let t = Instant::now();
    let mut algebras = 0;
    let mut bad = Vec::new();
    let mut reps = 0;
    for g in &cat.groups {
        let Some(rep) = &g.rep else { continue };
        let alg = rep.algebra();
        algebras += 1;
        let jac = alg.verify_jacobi();
        if !jac.violations.is_empty() {
            bad.push(format!("{}: Jacobi violations {:?}", g.tag, jac.violations));
        }
        let r = rep.rep_verify();
        reps += 1;
        if !r.ok() || !r.max_residual.is_zero() {
            bad.push(format!("{}: representation residual {}", g.tag, r.max_residual));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 1.0 {
        bad.push(format!("took {secs:.2} s"));
    }
    Outcome {
        ok: bad.is_empty() && algebras >= 14,
        detail: if bad.is_empty() {
            format!("Jacobi on {algebras} algebras and exact rep residual 0 on {reps} reps in {:.0} ms", secs * 1e3)
        } else {
            bad.join("; ")
        },
    }
}

fn eigensplits(cat: &Catalog) -> Outcome {
    let mut bad = Vec::new();
    let sl3 = cat.group("sl3r").unwrap();
    let a = sl3.algebra().unwrap();
    let split = |g: &Group, inv: &str| g.involution(inv).unwrap().inv.eigensplit();
    let s1 = split(sl3, "tau1");
    if s1.plus != span(a, &["e1 - e3", "e2 - e4", "e7 - e6"]) {
        bad.push(format!("tau1 fixes {}", s1.plus));
    }
    if s1.minus != span(a, &["e5", "e8", "e1 + e3", "e2 + e4", "e6 + e7"]) {
        bad.push(format!("tau1 negates {}", s1.minus));
    }
    let s3 = split(sl3, "tau3");
    if s3.plus != span(a, &["e5", "e6", "e7", "e8"]) || s3.minus != span(a, &["e1", "e2", "e3", "e4"]) {
        bad.push(format!("tau3 splits as {} + {}", s3.plus, s3.minus));
    }
    let c = cat.group("sl2c").unwrap();
    let b = c.algebra().unwrap();
    let st = split(c, "tau");
    if st.plus != span(b, &["e3", "ie3"]) || st.minus != span(b, &["e1", "e2", "ie1", "ie2"]) {
        bad.push(format!("sl2c tau splits as {} + {}", st.plus, st.minus));
    }
    Outcome {
        ok: bad.is_empty(),
        detail: if bad.is_empty() { "tau1, tau3 on sl3(R) and tau on sl2(C) match exactly".into() } else { bad.join("; ") },
    }
}

fn exclusion_ledger(cat: &Catalog) -> Outcome {
    let mut bad = Vec::new();
    let sl3 = cat.group("sl3r").unwrap();
    let mut listed = vec![("h1", "m2")];
    for h in ["h4", "h7", "h8", "h9", "h10", "h11"] {
        listed.push((h, "m1"));
        listed.push((h, "m2"));
    }
    for h in ["hbar1", "hbar2", "hbar3", "hbar4"] {
        listed.push((h, "m3"));
    }
    let mut meets = 0;
    let mut check_meet = |g: &Group, h: &str, m: &str, bad: &mut Vec<String>| {
        for env in envs(g, &[h, m]) {
            meets += 1;
            if at(g, h, &env).intersect(&at(g, m, &env)).unwrap().dim() == 0 {
                bad.push(format!("{}: {h} meets {m} trivially at {env:?}", g.tag));
            }
        }
    };
    for (h, m) in &listed {
        check_meet(sl3, h, m, &mut bad);
    }
    // Every intersection claim recorded in the catalog, at every parameter sample.
    for g in &cat.groups {
        for t in &g.triples {
            if let (Some(h), Some(m), true) =
                (&t.h, &t.m, t.evidence.iter().any(|e| matches!(e, Evidence::Intersection(_))))
            {
                check_meet(g, h, m, &mut bad);
            }
        }
    }
    let (mut witnesses, mut worst) = (0, 0.0f64);
    for g in &cat.groups {
        let Some(rep) = &g.rep else { continue };
        for w in &g.witnesses {
            for m in &w.m {
                for env in envs(g, &[&w.h, m]) {
                    let alg = g.algebra().unwrap();
                    let ew = ExclusionWitness {
                        kind: WitnessKind::ConjugacyWitness,
                        element: eval_element(alg, &env, &w.element).unwrap(),
                        target: Some(eval_element(alg, &env, &w.target).unwrap()),
                        group_element: Some(w.g.clone()),
                        convention: w.convention,
                    };
                    witnesses += 1;
                    match check_exclusion(&ew, &at(g, &w.h, &env), &at(g, m, &env), Some(rep)) {
                        Ok(c) if c.valid && (c.mode == CheckMode::Exact || c.residual <= 1e-12) => {
                            worst = worst.max(c.residual)
                        }
                        Ok(c) => bad.push(format!("{}/{}: {}", g.tag, w.name, c.message)),
                        Err(e) => bad.push(format!("{}/{}: {e}", g.tag, w.name)),
                    }
                }
            }
        }
    }
    for name in ["w1", "w2", "w3"] {
        if !sl3.witness(name).unwrap().g.is_exact() {
            bad.push(format!("sl3r/{name} is not exact"));
        }
    }
    for name in ["g1", "g2", "g3"] {
        if cat.group("sl2c").unwrap().witness(name).is_none() {
            bad.push(format!("sl2c/{name} missing"));
        }
    }
    Outcome {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{meets} intersections exact, {witnesses} witness checks (worst numeric residual {worst:.1e})")
        } else {
            bad.join("; ")
        },
    }
}

fn loop_suites(cat: &Catalog) -> Outcome {
    let t = Instant::now();
    let cases = [
        ("sl2r", "H2"),
        ("sl3r", "L5"),
        ("su21", "chp"),
        ("sl2c", "H3"),
        ("sl2r+sl2r", "H2xH2"),
        ("sl2c+sl2r", "H2xH3"),
        ("sl2r+so3r", "ext"),
    ];
    let (n, tol) = (1000, 1e-8);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (tag, name) in cases {
        let g = cat.group(tag).unwrap();
        let lp = g.build_loop(g.loop_spec(name).unwrap()).unwrap();
        for s in [bol_suite(&lp, n, tol, 0), bruck_suite(&lp, n, tol, 1), section_suite(&lp, n, tol, 3)] {
            if s.verdict {
                worst = worst.max(s.max_residual);
            } else {
                bad.push(format!("{tag}/{name} {} max residual {:.2e}", s.suite, s.max_residual));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 30.0 {
        bad.push(format!("took {secs:.1} s"));
    }
    Outcome {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("7 loops x bol/bruck/section at {n} samples, worst residual {worst:.1e}, {secs:.1} s")
        } else {
            format!("{}; others pass (worst {worst:.1e}) in {secs:.1} s", bad.join("; "))
        },
    }
}

fn reproducers() -> Outcome {
    let mut bad = Vec::new();
    let l7 = reproduce_lemma7();
    let last = l7.rows.iter().find(|r| r.k == 8);
    if !last.is_some_and(|r| r.s_norm > 1e6) || l7.g_cauchy > 1e-4 || !l7.verdict {
        bad.push(format!("lemma7: final norm {:.2e}, g Cauchy {:.1e}", l7.final_norm, l7.g_cauchy));
    }
    let p12 = reproduce_prop12(2.0);
    let s3 = p12.h3_rows.iter().map(|r| r.s_norm).fold(0.0, f64::max);
    if !(p12.m1_valid && p12.m2_valid && p12.distinct_t >= 2 && p12.distance > 0.1 && s3 > 1e6) {
        bad.push(format!("prop12: distance {:.3}, max s3 {:.2e}", p12.distance, s3));
    }
    let p19 = reproduce_prop19();
    let printed = p19.cases.iter().filter(|c| c.printed_ok).count();
    let built = p19.cases.iter().filter(|c| c.constructed_ok).count();
    if !p19.printed_verdict {
        bad.push(format!(
            "prop19: printed pair in one coset for {printed}/{} (Hi, r); a constructed pair works for {built}/{}",
            p19.cases.len(),
            p19.cases.len()
        ));
    }
    Outcome {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("lemma7 norm {:.1e}, prop12 distance {:.2}, prop19 {printed} cases", l7.final_norm, p12.distance)
        } else {
            format!("{}; lemma7 and prop12 reproduced", bad.join("; "))
        },
    }
}

fn golden_table(cat: &Catalog) -> Outcome {
    let c = run_classification(cat, 9, &ClassifyOptions::default()).unwrap();
    let json = emit_report(&c, "json").unwrap();
    let golden = std::fs::read_to_string(golden_path(&default_catalog_dir())).unwrap_or_default();
    let mut bad = Vec::new();
    if let Err(e) = compare_golden(&json, &golden) {
        bad.push(e);
    }
    let fams = |band: &str| -> Vec<String> {
        c.survivors.iter().filter(|b| b.dim_g == band).flat_map(|b| b.families.iter().map(|f| f.family.clone())).collect()
    };
    let want: [(&str, &[&str]); 4] = [
        ("<=5", &["H2"]),
        ("6", &["H2xH2", "H3", "Scheerer(G1; H2)"]),
        ("7-8", &["5-dim", "complex-hyperbolic-plane"]),
        ("9", &["H2xH2xH2", "H2xH3", "Scheerer(G1; H2xH2 | H3)", "Scheerer(G2; H2)"]),
    ];
    for (band, w) in want {
        if fams(band) != w {
            bad.push(format!("dim {band}: {:?}", fams(band)));
        }
    }
    if !c.unresolved().is_empty() {
        bad.push(format!("{} unresolved", c.unresolved().len()));
    }
    let facts: Vec<_> = c.verdicts.iter().filter(|v| v.status == Status::ExcludedByMetadataFact).collect();
    if facts.iter().any(|v| v.citation.is_empty()) {
        bad.push("metadata verdict without citation".into());
    }
    Outcome {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} verdicts byte-identical to golden, 10 families, {} cited facts", c.verdicts.len(), facts.len())
        } else {
            bad.join("; ")
        },
    }
}

fn main() -> ExitCode {
    let t = Instant::now();
    let cat = load_catalog(&default_catalog_dir()).expect("shipped catalog loads");
    let load = t.elapsed().as_secs_f64();
    let results = [
        ("exact table verification", exact_tables(&cat)),
        ("eigensplit golden facts", eigensplits(&cat)),
        ("exclusion ledger", exclusion_ledger(&cat)),
        ("Bol/Bruck property suites", loop_suites(&cat)),
        ("counterexample reproducers", reproducers()),
        ("classification golden table", golden_table(&cat)),
    ];
    let mut unexpected = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let k = i + 1;
        let known = UNATTAINABLE.iter().find(|(c, _)| *c == k);
        let tag = match (o.ok, known) {
            (true, None) => "PASS",
            (false, Some(_)) => "FAIL (unattainable)",
            (false, None) => {
                unexpected += 1;
                "FAIL"
            }
            (true, Some(_)) => {
                unexpected += 1;
                "PASS (listed as unattainable)"
            }
        };
        println!("{tag} {k}. {name}: {}", o.detail);
        if let (false, Some((_, why))) = (o.ok, known) {
            println!("     reason: {why}");
        }
    }
    println!("catalog loaded in {:.2} s, total {:.1} s", load, t.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
