use std::fs;

use super::*;

fn catalog() -> Catalog {
    load_catalog(&default_catalog_dir()).unwrap_or_else(|e| panic!("{e}"))
}

fn copy_catalog() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["algebras", "reps", "groups"] {
        fs::create_dir_all(dir.path().join(sub)).unwrap();
        for e in fs::read_dir(default_catalog_dir().join(sub)).unwrap() {
            let p = e.unwrap().path();
            fs::copy(&p, dir.path().join(sub).join(p.file_name().unwrap())).unwrap();
        }
    }
    dir
}

fn names<'a>(it: impl Iterator<Item = &'a String>) -> Vec<&'a str> {
    it.map(|s| s.as_str()).collect()
}

#[test]
fn shipped_catalog_has_every_group() {
    let c = catalog();
    let tags: Vec<_> = c.groups.iter().map(|g| g.tag.as_str()).collect();
    let mut want = vec![
        "sl2r", "so3r", "sl2c", "su21", "su3", "sl3r", "sl2r+sl2r", "sl2r+so3r", "so3r+so3r", "sl2r+sl2r+sl2r",
        "sl2r+sl2r+so3r", "sl2r+so3r+so3r", "so3r+so3r+so3r", "sl2c+so3r", "sl2c+sl2r",
    ];
    want.sort();
    assert_eq!(tags, want);
    let dims: Vec<_> = c.groups.iter().map(|g| (g.tag.as_str(), g.dim)).collect();
    for (t, d) in dims {
        let expect = match t.matches('+').count() {
            0 if t == "sl2c" => 6,
            0 if t == "su21" || t == "su3" || t == "sl3r" => 8,
            0 => 3,
            1 if t.starts_with("sl2c") => 9,
            1 => 6,
            _ => 9,
        };
        assert_eq!(d, expect, "{t}");
    }
}

#[test]
fn coverage_of_named_subalgebras_and_witnesses() {
    let c = catalog();
    let want: &[(&str, &[&str], &[&str])] = &[
        ("sl2r", &["so2", "m", "k3", "m3", "hyp", "par"], &["par-m3", "k3-m3"]),
        ("sl2c", &["h1", "m", "h2", "h3", "v", "w", "u1", "su2", "m-cartan", "sl2r", "m-bar"], &["g1", "g2", "g3"]),
        (
            "sl3r",
            &[
                "h1", "m1", "m2", "m3", "h2", "h3", "h4", "h5", "h6", "h7", "h8", "h9", "h10", "h11", "hbar1", "hbar2",
                "hbar3", "hbar4",
            ],
            &["w1", "w2", "w3"],
        ),
        (
            "su21",
            &["4d-h1", "4d-m1", "4d-h2", "4d-m2", "4d-h3", "h21", "m", "h1", "h22", "h3", "h4", "h5", "h6"],
            &["compact", "compact-21", "nil"],
        ),
        ("sl2c+sl2r", &["m1", "m2", "m3", "m4", "m5", "m6", "h1", "h2", "h3", "h4", "h5", "h6", "h7", "h8"], &[]),
        ("sl2r+sl2r+sl2r", &["m1", "m2", "m3", "m4"], &["par"]),
        ("sl2r+sl2r+so3r", &["h", "m1", "m2", "m3", "m4"], &["rot"]),
    ];
    for (tag, spaces, witnesses) in want {
        let g = c.group(tag).unwrap();
        let have = names(g.spaces.iter().map(|s| &s.name));
        for s in *spaces {
            assert_eq!(have.iter().filter(|x| *x == s).count(), 1, "{tag}: space {s}");
        }
        let have = names(g.witnesses.iter().map(|w| &w.name));
        for w in *witnesses {
            assert!(have.contains(w), "{tag}: witness {w}");
        }
    }
}

#[test]
fn sl2r_has_two_involution_classes() {
    let c = catalog();
    let g = c.group("sl2r").unwrap();
    assert_eq!(g.dim, 3);
    assert_eq!(names(g.involutions.iter().map(|i| &i.name)), ["C2", "C3"]);
}

#[test]
fn printed_su21_leaves_are_flagged_and_reconstructed() {
    let c = catalog();
    let g = c.group("su21").unwrap();
    for n in ["printed-4d-h2", "printed-4d-m2"] {
        assert!(g.space(n).unwrap().printed_invalid, "{n}");
    }
    for n in ["4d-h2", "4d-m2"] {
        assert!(!g.space(n).unwrap().printed_invalid, "{n}");
    }
}

#[test]
fn every_triple_splits_g() {
    let c = catalog();
    for g in &c.groups {
        for t in &g.triples {
            if let (Some(h), Some(m)) = (&t.h, &t.m) {
                let (h, m) = (g.space(h).unwrap(), g.space(m).unwrap());
                assert_eq!(h.basis.len() + m.basis.len(), g.dim, "{}/{}", g.tag, t.name);
            }
        }
    }
}

#[test]
fn full_classification_has_no_unresolved_triple() {
    let c = run_classification(&catalog(), 9, &ClassifyOptions::default()).unwrap();
    assert!(c.unresolved().is_empty(), "{:?}", c.unresolved());
    let bands: Vec<_> = c.survivors.iter().map(|b| (b.dim_g.as_str(), b.families.len())).collect();
    assert_eq!(bands, [("<=5", 1), ("6", 3), ("7-8", 2), ("9", 4)]);
}

#[test]
fn classification_matches_golden_json() {
    let c = run_classification(&catalog(), 9, &ClassifyOptions::default()).unwrap();
    let json = emit_report(&c, "json").unwrap();
    let path = golden_path(&default_catalog_dir());
    if std::env::var_os("BOLSEC_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &json).unwrap();
    }
    let golden = fs::read_to_string(&path).unwrap();
    compare_golden(&json, &golden).unwrap();
}

#[test]
fn dim_5_leaves_only_the_hyperbolic_plane() {
    let c = run_classification(&catalog(), 5, &ClassifyOptions::default()).unwrap();
    let loops: Vec<_> = c.verdicts.iter().filter(|v| v.status == Status::GlobalBruckLoop).collect();
    assert_eq!(loops.len(), 1);
    assert_eq!((loops[0].group.as_str(), loops[0].triple.as_str()), ("sl2r", "so2-m"));
    let three = run_classification(&catalog(), 3, &ClassifyOptions::default()).unwrap();
    assert_eq!(emit_report(&three, "json").unwrap().replace("\"max_dim\": 3", "\"max_dim\": 5"), emit_report(&c, "json").unwrap());
}

#[test]
fn dim_8_survivors() {
    let c = run_classification(&catalog(), 8, &ClassifyOptions::default()).unwrap();
    let fams: Vec<_> = c.survivors.iter().flat_map(|b| b.families.iter().map(|f| f.family.as_str())).collect();
    assert!(fams.contains(&"complex-hyperbolic-plane") && fams.contains(&"5-dim"), "{fams:?}");
}

#[test]
fn out_of_range_and_empty_classifications() {
    assert_eq!(run_classification(&catalog(), 10, &ClassifyOptions::default()).unwrap_err(), CatalogError::MaxDim(10));
    let c = run_classification(&catalog(), 0, &ClassifyOptions::default()).unwrap();
    assert!(c.verdicts.is_empty() && c.survivors.is_empty());
    let v: serde_json::Value = serde_json::from_str(&emit_report(&c, "json").unwrap()).unwrap();
    assert_eq!(v["verdicts"], serde_json::json!([]));
    assert!(emit_report(&c, "xml").is_err());
}

#[test]
fn classification_is_deterministic() {
    let cat = catalog();
    let a = emit_report(&run_classification(&cat, 6, &ClassifyOptions::default()).unwrap(), "json").unwrap();
    let b = emit_report(&run_classification(&cat, 6, &ClassifyOptions::default()).unwrap(), "json").unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_or_missing_catalog_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_catalog(dir.path()), Err(CatalogError::Io { .. })));
    fs::create_dir_all(dir.path().join("groups")).unwrap();
    assert!(load_catalog(dir.path()).is_err());
}

#[test]
fn corrupted_structure_constant_is_rejected() {
    let dir = copy_catalog();
    let p = dir.path().join("algebras/sl2r.alg");
    let text = fs::read_to_string(&p).unwrap().replace("2 3 1 -2", "2 3 1 -3");
    fs::write(&p, text).unwrap();
    let err = load_catalog(dir.path()).unwrap_err();
    assert!(matches!(err, CatalogError::Invalid { .. }), "{err}");
}

#[test]
fn wrong_witness_target_is_rejected() {
    let dir = copy_catalog();
    let p = dir.path().join("groups/sl2r.cat");
    let text = fs::read_to_string(&p).unwrap().replace("target: 2*e1 + 2*e3", "target: 2*e1 + 3*e3");
    fs::write(&p, text).unwrap();
    let err = load_catalog(dir.path()).unwrap_err().to_string();
    assert!(err.contains("sl2r.cat") && err.contains("par-m3"), "{err}");
}

#[test]
fn non_subalgebra_is_rejected() {
    let dir = copy_catalog();
    let p = dir.path().join("groups/sl2r+sl2r.cat");
    let text = fs::read_to_string(&p).unwrap().replace("basis: (e1, e1), (0, e2 + e3)", "basis: (e1, e2), (0, e2 + e3)");
    fs::write(&p, text).unwrap();
    assert!(load_catalog(dir.path()).is_err());
}

#[test]
#[ignore]
fn print_report() {
    let c = catalog();
    let r = run_classification(&c, 9, &ClassifyOptions::default()).unwrap();
    println!("{}", emit_report(&r, "text").unwrap());
}
