//! Machine-readable tables of groups, involutions, subalgebras, witnesses and candidate loops,
//! loaded with exact validation, plus the classification driver over them.

mod classify;
pub mod syntax;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::exact::{parse_q, CQMatrix, QMatrix, Q};
use crate::involution::{check_exclusion, bol_triple_check, is_lie_triple_system, ExclusionWitness, Involution, WitnessKind, WitnessMatrix};
use crate::liealg::{parse_algebra_text, LieAlgebra, Subspace};
use crate::loopcore::{FiberHom, LoopInstance};
use crate::matrixrep::{parse_rep_text, BorelVariant, Convention, MatrixRep};
use syntax::{parse_matrix, parse_params, parse_records, split_top, Record};
pub use syntax::{eval_element, param_samples, Env, Param};

pub use classify::{
    compare_golden, emit_report, golden_path, run_classification, Band, Classification, ClassifyOptions, FamilyRow, Status,
    Verdict, MAX_CLASSIFY_DIM,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("{file}:{line}: {msg}")]
    Invalid { file: String, line: usize, msg: String },
    #[error("classification is only available up to dimension {MAX_CLASSIFY_DIM}, got {0}")]
    MaxDim(usize),
}

#[derive(Clone, Debug)]
pub struct Fact {
    pub name: String,
    pub statement: String,
    pub cite: String,
}

#[derive(Clone, Debug)]
pub struct NamedInvolution {
    pub name: String,
    pub map: String,
    pub inv: Involution,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    Eigenspace { of: String, plus: bool },
    Subalgebra,
    /// A plain linear subspace, such as the tangent space of a Scheerer extension.
    Subspace,
}

/// A named subspace given by basis expressions, possibly depending on parameters.
#[derive(Clone, Debug)]
pub struct Space {
    pub name: String,
    pub kind: SpaceKind,
    pub basis: Vec<String>,
    pub params: Vec<Param>,
    pub printed_invalid: bool,
    pub line: usize,
}

impl Space {
    pub fn at(&self, alg: &Arc<LieAlgebra>, env: &Env) -> Result<Subspace, String> {
        let v: Vec<_> = self.basis.iter().map(|b| eval_element(alg, env, b)).collect::<Result<_, _>>()?;
        let s = Subspace::span(alg, &v).map_err(|e| e.to_string())?;
        if s.dim() != v.len() {
            return Err(format!("basis of `{}` is linearly dependent", self.name));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub name: String,
    pub h: String,
    pub m: Vec<String>,
    pub element: String,
    pub target: String,
    pub g: WitnessMatrix,
    pub convention: Convention,
    pub cite: Option<String>,
}

#[derive(Clone, Debug)]
pub enum LoopBuild {
    Hyperbolic,
    /// Base and fiber factor positions (0-based) and one hom per fiber factor.
    Scheerer { base: Vec<usize>, fiber: Vec<usize>, homs: Vec<FiberHom> },
}

#[derive(Clone, Debug)]
pub struct LoopSpec {
    pub name: String,
    pub family: String,
    pub build: LoopBuild,
    pub cite: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    Intersection(Option<String>),
    Witness(String),
    Lemma7(usize),
    Prop12Spiral,
    Prop12Unitriangular,
    Prop19(BorelVariant),
    Fact(String),
    Loop(String),
}

#[derive(Clone, Debug)]
pub struct Triple {
    pub name: String,
    pub h: Option<String>,
    pub m: Option<String>,
    pub evidence: Vec<Evidence>,
    pub cite: Option<String>,
    pub note: Option<String>,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct Group {
    pub tag: String,
    pub name: String,
    pub dim: usize,
    pub file: String,
    pub factor_tags: Vec<String>,
    pub rep: Option<MatrixRep>,
    pub factor_reps: Vec<MatrixRep>,
    pub involutions: Vec<NamedInvolution>,
    pub spaces: Vec<Space>,
    pub witnesses: Vec<Witness>,
    pub loops: Vec<LoopSpec>,
    pub triples: Vec<Triple>,
    /// One line per validation performed at load time.
    pub checks: Vec<String>,
}

impl Group {
    pub fn algebra(&self) -> Option<&Arc<LieAlgebra>> {
        self.rep.as_ref().map(|r| r.algebra())
    }

    pub fn space(&self, name: &str) -> Option<&Space> {
        self.spaces.iter().find(|s| s.name == name)
    }

    pub fn involution(&self, name: &str) -> Option<&NamedInvolution> {
        self.involutions.iter().find(|s| s.name == name)
    }

    pub fn witness(&self, name: &str) -> Option<&Witness> {
        self.witnesses.iter().find(|s| s.name == name)
    }

    pub fn loop_spec(&self, name: &str) -> Option<&LoopSpec> {
        self.loops.iter().find(|s| s.name == name)
    }

    /// Parameters of a triple: those of h followed by those of m.
    pub fn triple_params(&self, t: &Triple) -> Vec<Param> {
        let mut ps: Vec<Param> = Vec::new();
        for n in [&t.h, &t.m].into_iter().flatten() {
            if let Some(s) = self.space(n) {
                for p in &s.params {
                    if !ps.iter().any(|q| q.name == p.name) {
                        ps.push(p.clone());
                    }
                }
            }
        }
        ps
    }

    pub fn build_loop(&self, spec: &LoopSpec) -> Result<LoopInstance, String> {
        let rep = self.rep.as_ref().ok_or("group has no matrix representation")?;
        match &spec.build {
            LoopBuild::Hyperbolic => LoopInstance::hyperbolic(&spec.family, rep.clone()).map_err(|e| e.to_string()),
            LoopBuild::Scheerer { base, fiber, homs } => {
                let pick = |ix: &[usize]| -> Result<MatrixRep, String> {
                    let parts: Vec<&MatrixRep> = ix.iter().map(|&i| &self.factor_reps[i]).collect();
                    if parts.len() == 1 {
                        Ok(parts[0].clone())
                    } else {
                        MatrixRep::direct_sum(&parts).map_err(|e| e.to_string())
                    }
                };
                let b = LoopInstance::hyperbolic("base", pick(base)?).map_err(|e| e.to_string())?;
                let fiber_first = fiber[0] == 0;
                LoopInstance::scheerer_extension(&b, &pick(fiber)?, homs.clone(), fiber_first, &spec.family)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub root: PathBuf,
    pub groups: Vec<Group>,
    pub facts: BTreeMap<String, Fact>,
}

impl Catalog {
    pub fn group(&self, tag: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.tag == tag)
    }

    pub fn checks_performed(&self) -> usize {
        self.groups.iter().map(|g| g.checks.len()).sum()
    }
}

/// Directory of the catalog shipped with this crate.
pub fn default_catalog_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("catalog")
}

fn read(path: &Path) -> Result<String, CatalogError> {
    fs::read_to_string(path).map_err(|e| CatalogError::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// Loads and validates every group file under `root/groups` and the facts in `root/groups/facts.cat`.
pub fn load_catalog(root: &Path) -> Result<Catalog, CatalogError> {
    let gdir = root.join("groups");
    let mut files: Vec<PathBuf> = fs::read_dir(&gdir)
        .map_err(|e| CatalogError::Io { path: gdir.display().to_string(), msg: e.to_string() })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cat"))
        .collect();
    files.sort();
    let mut facts = BTreeMap::new();
    let mut pending = Vec::new();
    for path in files {
        let fname = path.file_name().unwrap_or_default().to_string_lossy().to_string();
        let recs = parse_records(&fname, &read(&path)?)?;
        if fname == "facts.cat" {
            for r in recs {
                let inv = |msg: String| CatalogError::Invalid { file: fname.clone(), line: r.line, msg };
                if r.kind != "fact" {
                    return Err(inv(format!("only `fact` records belong in facts.cat, got `{}`", r.kind)));
                }
                let statement = r.get("statement").ok_or_else(|| inv("fact needs `statement`".into()))?.to_string();
                let cite = r.get("cite").ok_or_else(|| inv("fact needs `cite`".into()))?.to_string();
                facts.insert(r.name.clone(), Fact { name: r.name.clone(), statement, cite });
            }
        } else {
            pending.push((fname, recs));
        }
    }
    if pending.is_empty() {
        return Err(CatalogError::Io { path: gdir.display().to_string(), msg: "no group files".into() });
    }
    // Simple groups first, so products can refer to their involutions.
    pending.sort_by_key(|(_, recs)| recs.first().and_then(|r| r.get("factors")).map_or(0, |f| f.split_whitespace().count()));
    let mut groups: Vec<Group> = Vec::new();
    for (fname, recs) in pending {
        let g = GroupLoader { file: &fname, root, loaded: &groups, facts: &facts }.load(&recs)?;
        if groups.iter().any(|o| o.tag == g.tag) {
            return Err(CatalogError::Invalid { file: fname, line: 1, msg: format!("duplicate group `{}`", g.tag) });
        }
        groups.push(g);
    }
    groups.sort_by(|a, b| a.tag.cmp(&b.tag));
    Ok(Catalog { root: root.to_path_buf(), groups, facts })
}

struct GroupLoader<'a> {
    file: &'a str,
    root: &'a Path,
    loaded: &'a [Group],
    facts: &'a BTreeMap<String, Fact>,
}

fn same_space(a: &Subspace, b: &Subspace) -> bool {
    a.dim() == b.dim() && a.contains_space(b).unwrap_or(false)
}

fn parse_convention(s: &str) -> Option<Convention> {
    match s {
        "forward" => Some(Convention::Forward),
        "inverse" => Some(Convention::Inverse),
        _ => None,
    }
}

impl GroupLoader<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> CatalogError {
        CatalogError::Invalid { file: self.file.into(), line, msg: msg.into() }
    }

    fn load(&self, recs: &[Record]) -> Result<Group, CatalogError> {
        let head = recs.first().filter(|r| r.kind == "group").ok_or_else(|| self.err(1, "file must start with a `group` record"))?;
        let mut g = Group {
            tag: head.name.clone(),
            name: head.get("name").unwrap_or(&head.name).to_string(),
            dim: 0,
            file: self.file.into(),
            factor_tags: head.get("factors").unwrap_or("").split_whitespace().map(String::from).collect(),
            rep: None,
            factor_reps: Vec::new(),
            involutions: Vec::new(),
            spaces: Vec::new(),
            witnesses: Vec::new(),
            loops: Vec::new(),
            triples: Vec::new(),
            checks: Vec::new(),
        };
        self.load_rep(head, &mut g)?;
        for r in &recs[1..] {
            match r.kind.as_str() {
                "involution" => self.load_involution(r, &mut g)?,
                "eigenspace" | "subalgebra" | "subspace" => self.load_space(r, &mut g)?,
                "witness" => self.load_witness(r, &mut g)?,
                "loop" => self.load_loop(r, &mut g)?,
                "triple" => self.load_triple(r, &mut g)?,
                "iwasawa" => self.check_iwasawa(r, &mut g)?,
                "hermitian-form" => self.check_form(r, &mut g)?,
                "group" => return Err(self.err(r.line, "one group per file")),
                k => return Err(self.err(r.line, format!("unknown record kind `{k}`"))),
            }
        }
        Ok(g)
    }

    fn load_rep(&self, head: &Record, g: &mut Group) -> Result<(), CatalogError> {
        if g.factor_tags.is_empty() {
            let d = head.get("dim").and_then(|d| d.parse().ok()).ok_or_else(|| self.err(head.line, "group without factors needs `dim`"))?;
            g.dim = d;
            return Ok(());
        }
        for f in &g.factor_tags {
            let atext = read(&self.root.join("algebras").join(format!("{f}.alg")))?;
            let alg = Arc::new(parse_algebra_text(&atext).map_err(|e| self.err(head.line, format!("algebra {f}: {e}")))?);
            let jac = alg.verify_jacobi();
            if !jac.ok() {
                let l = alg.labels();
                let bad: Vec<String> =
                    jac.violations.iter().map(|&(i, j, k)| format!("({}, {}, {})", l[i], l[j], l[k])).collect();
                return Err(self.err(head.line, format!("algebra {f} fails the Jacobi identity at {}", bad.join(", "))));
            }
            let rtext = read(&self.root.join("reps").join(format!("{f}.rep")))?;
            let rep = parse_rep_text(&rtext, &alg).map_err(|e| self.err(head.line, format!("representation {f}: {e}")))?;
            let rv = rep.rep_verify();
            if !rv.ok() {
                return Err(self.err(head.line, format!("representation {f} is not a faithful homomorphism: {rv:?}")));
            }
            g.checks.push(format!("{f}: Jacobi identity and faithful representation"));
            g.factor_reps.push(rep);
        }
        let rep = if g.factor_reps.len() == 1 {
            g.factor_reps[0].clone()
        } else {
            let parts: Vec<&MatrixRep> = g.factor_reps.iter().collect();
            MatrixRep::direct_sum(&parts).map_err(|e| self.err(head.line, e.to_string()))?
        };
        g.dim = rep.algebra().dim();
        if let Some(d) = head.get("dim").and_then(|d| d.parse::<usize>().ok()) {
            if d != g.dim {
                return Err(self.err(head.line, format!("declared dim {d}, algebra has {}", g.dim)));
            }
        }
        g.rep = Some(rep);
        Ok(())
    }

    fn simple_map(&self, rep: &MatrixRep, spec: &str, line: usize) -> Result<Involution, CatalogError> {
        let n = rep.blocks()[0].size();
        let (head, rest) = spec.split_once(char::is_whitespace).unwrap_or((spec, ""));
        let mat = || parse_matrix(rest, n).map_err(|e| self.err(line, e));
        let minus = Q::from_integer((-1).into());
        let r = match head {
            "neg-transpose" => Involution::from_matrix_map(rep, |_, x| x.transpose().scale_q(&minus)),
            "neg-adjoint" => Involution::from_matrix_map(rep, |_, x| x.adjoint().scale_q(&minus)),
            "complex-conj" => Involution::from_matrix_map(rep, |_, x| x.conj()),
            "conj" | "conj-inverse" | "neg-transpose-by" => {
                let m = mat()?;
                let mi = m.inverse().ok_or_else(|| self.err(line, "matrix is singular"))?;
                match head {
                    "conj" => Involution::from_matrix_map(rep, |_, x| m.mul(x).mul(&mi)),
                    "conj-inverse" => Involution::from_matrix_map(rep, |_, x| mi.mul(x).mul(&m)),
                    _ => Involution::from_matrix_map(rep, |_, x| m.mul(&x.transpose()).mul(&mi).scale_q(&minus)),
                }
            }
            _ => return Err(self.err(line, format!("unknown involution map `{head}`"))),
        };
        r.map_err(|e| self.err(line, format!("`{spec}` is not an involutory automorphism: {e}")))
    }

    fn load_involution(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let line = r.line_of("map");
        let rep = g.rep.as_ref().ok_or_else(|| self.err(r.line, "involution needs a representation"))?;
        let alg = rep.algebra().clone();
        let spec = r.get("map").ok_or_else(|| self.err(r.line, "involution needs `map`"))?;
        let inv = if let Some(rest) = spec.strip_prefix("product ") {
            let mut parts = Vec::new();
            for q in rest.split_whitespace() {
                let (gt, iname) = q.split_once('.').ok_or_else(|| self.err(line, format!("expected `group.involution`, got `{q}`")))?;
                let og = self.loaded.iter().find(|o| o.tag == gt).ok_or_else(|| self.err(line, format!("unknown group `{gt}`")))?;
                let oi = og.involution(iname).ok_or_else(|| self.err(line, format!("group `{gt}` has no involution `{iname}`")))?;
                parts.push(oi.inv.clone());
            }
            let refs: Vec<&Involution> = parts.iter().collect();
            Involution::product(&alg, &refs).map_err(|e| self.err(line, e.to_string()))?
        } else if let Some(rest) = spec.strip_prefix("swap ") {
            let ix: Vec<usize> = rest.split_whitespace().filter_map(|s| s.parse::<usize>().ok()).collect();
            let fs = alg.factors();
            let [a, b] = ix[..] else { return Err(self.err(line, "swap takes two factor positions")) };
            if a == 0 || b == 0 || a > fs.len() || b > fs.len() || fs[a - 1].1.name() != fs[b - 1].1.name() {
                return Err(self.err(line, "swap needs two equal factors"));
            }
            let n = alg.dim();
            let mut m = QMatrix::zeros(n, n);
            let mut perm: Vec<usize> = (0..fs.len()).collect();
            perm.swap(a - 1, b - 1);
            for (i, &j) in perm.iter().enumerate() {
                let (oi, f) = &fs[i];
                let oj = fs[j].0;
                for k in 0..f.dim() {
                    m[(oj + k, oi + k)] = Q::from_integer(1.into());
                }
            }
            crate::involution::check_involution(&alg, m).map_err(|e| self.err(line, e.to_string()))?
        } else {
            if g.factor_reps.len() != 1 {
                return Err(self.err(line, "matrix maps apply to simple groups; use `product` or `swap`"));
            }
            self.simple_map(rep, spec, line)?
        };
        let split = inv.eigensplit();
        if !split.graded_ok() || !is_lie_triple_system(&split.minus) {
            return Err(self.err(line, "eigenspaces are not graded"));
        }
        g.checks.push(format!("involution {}: automorphism of order 2, fixed algebra dim {}", r.name, split.plus.dim()));
        g.involutions.push(NamedInvolution { name: r.name.clone(), map: spec.into(), inv });
        Ok(())
    }

    fn load_space(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let alg = g.algebra().ok_or_else(|| self.err(r.line, "subspace needs an algebra"))?.clone();
        let basis = split_top(r.get("basis").ok_or_else(|| self.err(r.line, "needs `basis`"))?);
        let params = parse_params(r.get("params").unwrap_or("")).map_err(|e| self.err(r.line_of("params"), e))?;
        let printed_invalid = match r.get("status") {
            None => false,
            Some("printed-invalid") => true,
            Some(s) => return Err(self.err(r.line_of("status"), format!("unknown status `{s}`"))),
        };
        let kind = if r.kind == "eigenspace" {
            let of = r.get("of").ok_or_else(|| self.err(r.line, "eigenspace needs `of: <involution> plus|minus`"))?;
            let (iname, sign) = of.split_once(' ').ok_or_else(|| self.err(r.line_of("of"), "expected `<involution> plus|minus`"))?;
            let plus = match sign.trim() {
                "plus" => true,
                "minus" => false,
                s => return Err(self.err(r.line_of("of"), format!("expected plus or minus, got `{s}`"))),
            };
            SpaceKind::Eigenspace { of: iname.into(), plus }
        } else if r.kind == "subalgebra" {
            SpaceKind::Subalgebra
        } else {
            SpaceKind::Subspace
        };
        let sp = Space { name: r.name.clone(), kind: kind.clone(), basis, params, printed_invalid, line: r.line };
        if g.space(&sp.name).is_some() {
            return Err(self.err(r.line, format!("duplicate subspace `{}`", sp.name)));
        }
        let mut all_ok = true;
        for env in param_samples(&sp.params) {
            let s = sp.at(&alg, &env).map_err(|e| self.err(r.line_of("basis"), e))?;
            let ok = match &kind {
                SpaceKind::Eigenspace { of, plus } => {
                    let inv = g.involution(of).ok_or_else(|| self.err(r.line_of("of"), format!("unknown involution `{of}`")))?;
                    let split = inv.inv.eigensplit();
                    same_space(&s, if *plus { &split.plus } else { &split.minus })
                }
                SpaceKind::Subalgebra => s.is_subalgebra(),
                SpaceKind::Subspace => true,
            };
            if !ok && !printed_invalid {
                return Err(self.err(r.line, format!("`{}` fails its {} check at {env:?}", sp.name, r.kind)));
            }
            all_ok &= ok;
        }
        if printed_invalid && all_ok {
            return Err(self.err(r.line, format!("`{}` is marked printed-invalid but passes its check", sp.name)));
        }
        g.checks.push(format!(
            "{} {}: {}",
            r.kind,
            sp.name,
            if printed_invalid { "printed form confirmed invalid" } else { "verified" }
        ));
        g.spaces.push(sp);
        Ok(())
    }

    fn load_witness(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let rep = g.rep.as_ref().ok_or_else(|| self.err(r.line, "witness needs a representation"))?;
        let need = |k: &str| r.get(k).ok_or_else(|| self.err(r.line, format!("witness needs `{k}`")));
        let gtext = need("g")?;
        let blocks: Vec<&str> = gtext.split('|').collect();
        if blocks.len() != rep.blocks().len() {
            return Err(self.err(r.line_of("g"), format!("{} blocks for {} group factors", blocks.len(), rep.blocks().len())));
        }
        let mats: Vec<CQMatrix> = blocks
            .iter()
            .zip(rep.blocks())
            .map(|(s, b)| parse_matrix(s, b.size()))
            .collect::<Result<_, _>>()
            .map_err(|e| self.err(r.line_of("g"), e))?;
        let sqrt_scale: Vec<Option<Q>> = match r.get("sqrt-scale") {
            None => vec![None; mats.len()],
            Some(s) => s
                .split('|')
                .map(|t| match t.trim() {
                    "-" => Ok(None),
                    t => parse_q(t).map(Some).ok_or_else(|| self.err(r.line_of("sqrt-scale"), format!("bad scale `{t}`"))),
                })
                .collect::<Result<_, _>>()?,
        };
        if sqrt_scale.len() != mats.len() {
            return Err(self.err(r.line_of("sqrt-scale"), "one scale per block"));
        }
        let convention = parse_convention(need("convention")?).ok_or_else(|| self.err(r.line_of("convention"), "forward or inverse"))?;
        let w = Witness {
            name: r.name.clone(),
            h: need("h")?.into(),
            m: need("m")?.split_whitespace().map(String::from).collect(),
            element: need("element")?.into(),
            target: need("target")?.into(),
            g: WitnessMatrix { blocks: mats, sqrt_scale },
            convention,
            cite: r.get("cite").map(String::from),
        };
        let h = g.space(&w.h).ok_or_else(|| self.err(r.line_of("h"), format!("unknown subspace `{}`", w.h)))?;
        let alg = rep.algebra().clone();
        for env in param_samples(&h.params) {
            let hs = h.at(&alg, &env).map_err(|e| self.err(r.line, e))?;
            for mname in &w.m {
                let ms = g.space(mname).ok_or_else(|| self.err(r.line_of("m"), format!("unknown subspace `{mname}`")))?;
                let ms = ms.at(&alg, &env).map_err(|e| self.err(r.line, e))?;
                let chk = check_witness(&w, &hs, &ms, rep, &env).map_err(|e| self.err(r.line, e))?;
                if !chk.0 {
                    return Err(self.err(r.line, format!("witness `{}` against {mname} at {env:?}: {}", w.name, chk.1)));
                }
            }
        }
        g.checks.push(format!("witness {}: conjugates an element of {} into {}", w.name, w.h, w.m.join(", ")));
        g.witnesses.push(w);
        Ok(())
    }

    fn load_loop(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let family = r.get("family").ok_or_else(|| self.err(r.line, "loop needs `family`"))?.to_string();
        let b = r.get("build").ok_or_else(|| self.err(r.line, "loop needs `build`"))?;
        let line = r.line_of("build");
        let build = if b == "hyperbolic" {
            LoopBuild::Hyperbolic
        } else if let Some(rest) = b.strip_prefix("scheerer") {
            let mut kv: BTreeMap<&str, String> = BTreeMap::new();
            let mut key = "";
            for tok in rest.split_whitespace() {
                if let Some((k, v)) = tok.split_once('=') {
                    key = k;
                    kv.insert(k, v.to_string());
                } else if let Some(v) = kv.get_mut(key) {
                    // List values such as `fiber=2 3`.
                    v.push(' ');
                    v.push_str(tok);
                }
            }
            let ix = |k: &str| -> Result<Vec<usize>, CatalogError> {
                kv.get(k)
                    .ok_or_else(|| self.err(line, format!("scheerer needs `{k}=`")))?
                    .split_whitespace()
                    .map(|s| s.parse::<usize>().ok().filter(|&i| i >= 1 && i <= g.factor_reps.len()).map(|i| i - 1))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| self.err(line, format!("bad factor positions in `{k}`")))
            };
            let (base, fiber) = (ix("base")?, ix("fiber")?);
            let mut all: Vec<usize> = base.iter().chain(&fiber).copied().collect();
            all.sort();
            let contiguous = |v: &[usize]| v.windows(2).all(|w| w[1] == w[0] + 1);
            if all != (0..g.factor_reps.len()).collect::<Vec<_>>() || !contiguous(&base) || !contiguous(&fiber) {
                return Err(self.err(line, "base and fiber must split the factors into two contiguous runs"));
            }
            let homs = kv
                .get("homs")
                .ok_or_else(|| self.err(line, "scheerer needs `homs=`"))?
                .split(',')
                .map(|h| parse_hom(h.trim(), &base))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| self.err(line, e))?;
            LoopBuild::Scheerer { base, fiber, homs }
        } else {
            return Err(self.err(line, format!("unknown loop construction `{b}`")));
        };
        let spec = LoopSpec { name: r.name.clone(), family, build, cite: r.get("cite").map(String::from) };
        let lp = g.build_loop(&spec).map_err(|e| self.err(line, e))?;
        let rep = bol_triple_check(lp.h(), lp.m()).map_err(|e| self.err(line, e.to_string()))?;
        if !rep.ok() {
            return Err(self.err(line, format!("loop `{}` does not come from a Bol triple: {rep:?}", spec.name)));
        }
        g.checks.push(format!("loop {}: {} of dimension {}", spec.name, spec.family, lp.dim()));
        g.loops.push(spec);
        Ok(())
    }

    fn load_triple(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let h = r.get("h").map(String::from);
        let m = r.get("m").map(String::from);
        for n in [&h, &m].into_iter().flatten() {
            if g.space(n).is_none() {
                return Err(self.err(r.line, format!("unknown subspace `{n}`")));
            }
        }
        let mut evidence = Vec::new();
        for (e, line) in r.all("evidence") {
            let (k, rest) = e.split_once(char::is_whitespace).map_or((e, ""), |(a, b)| (a, b.trim()));
            let ev = match k {
                "intersection" => Evidence::Intersection((!rest.is_empty()).then(|| rest.to_string())),
                "witness" => {
                    g.witness(rest).ok_or_else(|| self.err(line, format!("unknown witness `{rest}`")))?;
                    Evidence::Witness(rest.into())
                }
                "lemma7" => {
                    let k: usize = rest.parse().ok().filter(|&k| k >= 1 && k <= g.factor_reps.len()).ok_or_else(|| self.err(line, "lemma7 needs a factor position"))?;
                    Evidence::Lemma7(k - 1)
                }
                "prop12-spiral" => Evidence::Prop12Spiral,
                "prop12-unitriangular" => Evidence::Prop12Unitriangular,
                "prop19" => Evidence::Prop19(match rest {
                    "H5" => BorelVariant::H5,
                    "H6" => BorelVariant::H6,
                    "H8" => BorelVariant::H8,
                    _ => return Err(self.err(line, "prop19 takes H5, H6 or H8")),
                }),
                "fact" => {
                    if !self.facts.contains_key(rest) {
                        return Err(self.err(line, format!("unknown fact `{rest}`")));
                    }
                    Evidence::Fact(rest.into())
                }
                "loop" => {
                    g.loop_spec(rest).ok_or_else(|| self.err(line, format!("unknown loop `{rest}`")))?;
                    Evidence::Loop(rest.into())
                }
                _ => return Err(self.err(line, format!("unknown evidence `{k}`"))),
            };
            evidence.push(ev);
        }
        let fact_only = !evidence.is_empty() && evidence.iter().all(|e| matches!(e, Evidence::Fact(_)));
        if (h.is_none() || m.is_none()) && !fact_only {
            return Err(self.err(r.line, "a triple without h and m can only cite facts"));
        }
        if let (Some(hn), Some(mn), Some(alg)) = (&h, &m, g.algebra()) {
            let t = Triple { name: r.name.clone(), h: h.clone(), m: m.clone(), evidence: vec![], cite: None, note: None, line: r.line };
            for env in param_samples(&g.triple_params(&t)) {
                let hs = g.space(hn).unwrap().at(alg, &env).map_err(|e| self.err(r.line, e))?;
                let ms = g.space(mn).unwrap().at(alg, &env).map_err(|e| self.err(r.line, e))?;
                if hs.dim() + ms.dim() != g.dim {
                    return Err(self.err(r.line, format!("dim h + dim m = {} + {} differs from dim g = {}", hs.dim(), ms.dim(), g.dim)));
                }
            }
        }
        if g.triples.iter().any(|t| t.name == r.name) {
            return Err(self.err(r.line, format!("duplicate triple `{}`", r.name)));
        }
        g.triples.push(Triple {
            name: r.name.clone(),
            h,
            m,
            evidence,
            cite: r.get("cite").map(String::from),
            note: r.get("note").map(String::from),
            line: r.line,
        });
        Ok(())
    }

    fn check_iwasawa(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let alg = g.algebra().ok_or_else(|| self.err(r.line, "iwasawa needs an algebra"))?.clone();
        let get = |k: &str| -> Result<Subspace, CatalogError> {
            let b = split_top(r.get(k).ok_or_else(|| self.err(r.line, format!("iwasawa needs `{k}`")))?);
            let sp = Space { name: k.into(), kind: SpaceKind::Subalgebra, basis: b, params: vec![], printed_invalid: false, line: r.line };
            sp.at(&alg, &Env::new()).map_err(|e| self.err(r.line_of(k), e))
        };
        let (k, a, n) = (get("k")?, get("a")?, get("n")?);
        let bad = |msg: &str| Err(self.err(r.line, format!("iwasawa decomposition: {msg}")));
        if !k.is_subalgebra() {
            return bad("k is not a subalgebra");
        }
        if !a.bracket_span(&a).expect("same").is_zero() {
            return bad("a is not abelian");
        }
        if !n.is_subalgebra() || !n.basis().iter().all(|x| is_nilpotent(&x.ad_matrix())) {
            return bad("n is not an ad-nilpotent subalgebra");
        }
        if !n.contains_space(&a.bracket_span(&n).expect("same")).expect("same") {
            return bad("[a, n] is not contained in n");
        }
        let total = k.sum(&a).and_then(|s| s.sum(&n)).expect("same");
        if k.dim() + a.dim() + n.dim() != g.dim || total.dim() != g.dim {
            return bad("k + a + n is not a direct sum equal to g");
        }
        g.checks.push("iwasawa decomposition k + a + n verified".into());
        Ok(())
    }

    fn check_form(&self, r: &Record, g: &mut Group) -> Result<(), CatalogError> {
        let rep = g.rep.as_ref().ok_or_else(|| self.err(r.line, "hermitian-form needs a representation"))?;
        if rep.blocks().len() != 1 {
            return Err(self.err(r.line, "hermitian-form applies to simple groups"));
        }
        let n = rep.blocks()[0].size();
        let j = parse_matrix(r.get("matrix").ok_or_else(|| self.err(r.line, "needs `matrix`"))?, n).map_err(|e| self.err(r.line, e))?;
        let sol = hermitian_forms(rep);
        let jv = complex_to_real(&j);
        let sol_space = QMatrix::from_columns(&sol, 2 * n * n);
        let with_j = QMatrix::from_columns(&[sol.clone(), vec![jv]].concat(), 2 * n * n);
        if sol.len() != 1 || with_j.rank() != sol_space.rank() {
            return Err(self.err(r.line, format!("invariant hermitian forms span dimension {}, not the declared form", sol.len())));
        }
        g.checks.push(format!("invariant hermitian form {} recovered up to scale", r.name));
        Ok(())
    }
}

fn is_nilpotent(m: &QMatrix) -> bool {
    let mut p = m.clone();
    for _ in 0..m.nrows() {
        p = p.mul(m);
    }
    p.is_zero()
}

fn complex_to_real(m: &CQMatrix) -> Vec<Q> {
    m.entries().iter().flat_map(|z| [z.re.clone(), z.im.clone()]).collect()
}

/// Real basis of the Hermitian J with X* J + J X = 0 for the whole representation.
fn hermitian_forms(rep: &MatrixRep) -> Vec<Vec<Q>> {
    let n = rep.blocks()[0].size();
    let unknowns = 2 * n * n;
    let alg = rep.algebra();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let unit = |u: usize| {
        let mut e = vec![Q::zero(); unknowns];
        e[u] = Q::from_integer(1.into());
        let rows: Vec<Vec<crate::exact::CQ>> =
            (0..n).map(|i| (0..n).map(|k| crate::exact::cq(e[2 * (i * n + k)].clone(), e[2 * (i * n + k) + 1].clone())).collect()).collect();
        CQMatrix::from_rows(rows)
    };
    let basis_j: Vec<CQMatrix> = (0..unknowns).map(unit).collect();
    let mut constraint = |f: &dyn Fn(&CQMatrix) -> CQMatrix| {
        let cols: Vec<Vec<Q>> = basis_j.iter().map(|b| complex_to_real(&f(b))).collect();
        let m = QMatrix::from_columns(&cols, unknowns);
        for i in 0..m.nrows() {
            rows.push(m.row(i));
        }
    };
    for k in 0..alg.dim() {
        let x = &rep.rep_exact(&alg.basis(k))[0];
        constraint(&|j: &CQMatrix| x.adjoint().mul(j).add(&j.mul(x)));
    }
    constraint(&|j: &CQMatrix| j.sub(&j.adjoint()));
    QMatrix::from_rows(&rows).nullspace()
}

pub(crate) fn parse_hom(s: &str, base: &[usize]) -> Result<FiberHom, String> {
    let (k, pos) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
    let block = |p: Option<&str>| -> Result<usize, String> {
        let p: usize = p.and_then(|p| p.parse().ok()).ok_or_else(|| format!("hom `{s}` needs a base position"))?;
        base.iter().position(|&b| b + 1 == p).ok_or_else(|| format!("position {p} is not a base factor"))
    };
    match k {
        "trivial" => Ok(FiberHom::Trivial),
        "rotation" => Ok(FiberHom::Rotation { base: block(pos)? }),
        "identity" => Ok(FiberHom::Identity { base: block(pos)? }),
        _ => Err(format!("unknown hom `{k}`")),
    }
}

/// Runs the exclusion check of a witness against a concrete (h, m); returns validity and a message.
pub(crate) fn check_witness(w: &Witness, h: &Subspace, m: &Subspace, rep: &MatrixRep, env: &Env) -> Result<(bool, String), String> {
    let alg = rep.algebra();
    let element = eval_element(alg, env, &w.element)?;
    let target = eval_element(alg, env, &w.target)?;
    let ew = ExclusionWitness {
        kind: WitnessKind::ConjugacyWitness,
        element,
        target: Some(target),
        group_element: Some(w.g.clone()),
        convention: w.convention,
    };
    match check_exclusion(&ew, h, m, Some(rep)) {
        Ok(c) => Ok((c.valid, c.message)),
        Err(e) => Ok((false, e.to_string())),
    }
}

#[cfg(test)]
mod tests;
