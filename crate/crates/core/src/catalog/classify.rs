//! Runs every triple of the catalog through its evidence and assembles the survivor table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::syntax::{eval_element, param_samples, Env};
use super::{check_witness, same_space, Catalog, CatalogError, Evidence, Group, Triple};
use crate::exact::q_to_f64;
use crate::involution::bol_triple_check;
use crate::liealg::Subspace;
use crate::loopcore::{
    alternativity_suite, bol_suite, bruck_suite, division_suite, prop19_case, reproduce_lemma7, reproduce_prop12,
    section_suite, LoopInstance,
};
use crate::matrixrep::{MatrixRep, StabilizerFamily};

pub const MAX_CLASSIFY_DIM: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Status {
    ExcludedByIntersection,
    ExcludedByConjugacy,
    ExcludedByCosetDoubling,
    ExcludedByDivergence,
    ExcludedByMetadataFact,
    GlobalBruckLoop,
    Unresolved,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { samples: 200, tol: 1e-8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupRow {
    pub tag: String,
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub group: String,
    pub triple: String,
    pub h: Option<String>,
    pub m: Option<String>,
    pub loop_dim: Option<usize>,
    pub status: Status,
    pub evidence: String,
    pub citation: String,
    /// Listed evidence that did not verify.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unverified: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyRow {
    pub family: String,
    pub realizations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub dim_g: String,
    pub families: Vec<FamilyRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub max_dim: usize,
    pub groups: Vec<GroupRow>,
    pub verdicts: Vec<Verdict>,
    pub survivors: Vec<Band>,
}

impl Classification {
    pub fn unresolved(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| v.status == Status::Unresolved).collect()
    }
}

fn band_of(dim: usize) -> &'static str {
    match dim {
        0..=5 => "<=5",
        6 => "6",
        7 | 8 => "7-8",
        _ => "9",
    }
}

struct Outcome {
    status: Status,
    verified: bool,
    summary: String,
    cite: String,
}

struct Ctx<'a> {
    cat: &'a Catalog,
    g: &'a Group,
    t: &'a Triple,
    envs: Vec<Env>,
    opts: &'a ClassifyOptions,
}

const TANGENT_STEPS: [f64; 4] = [0.5, -0.5, 1.5, -1.5];

/// The one-parameter subgroups through a basis of `h` all lie in `family`, of the same dimension.
fn tangent_to(rep: &MatrixRep, family: &StabilizerFamily, h: &Subspace) -> bool {
    if family.dimension(&rep.kinds()) != h.dim() {
        return false;
    }
    h.basis().iter().all(|x| {
        let c: Vec<f64> = x.coeffs().iter().map(q_to_f64).collect();
        TANGENT_STEPS.iter().all(|s| {
            let v: Vec<f64> = c.iter().map(|a| a * s).collect();
            family.contains(&rep.exp(&v), 1e-9)
        })
    })
}

fn fmt_env(env: &Env) -> String {
    env.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

impl Ctx<'_> {
    fn rep(&self) -> &MatrixRep {
        self.g.rep.as_ref().expect("triples with h and m have a representation")
    }

    fn hm(&self, env: &Env) -> (Subspace, Subspace) {
        let alg = self.rep().algebra();
        let get = |n: &Option<String>| self.g.space(n.as_ref().expect("checked")).expect("checked").at(alg, env).expect("checked at load");
        (get(&self.t.h), get(&self.t.m))
    }

    /// Runs `f` at every parameter sample; verified only when all pass.
    fn all_samples(&self, mut f: impl FnMut(&Env, &Subspace, &Subspace) -> Result<(), String>) -> Result<(), String> {
        for env in &self.envs {
            let (h, m) = self.hm(env);
            f(env, &h, &m).map_err(|e| if env.is_empty() { e } else { format!("{e} at {}", fmt_env(env)) })?;
        }
        Ok(())
    }

    fn outcome(&self, ev: &Evidence) -> Outcome {
        let (status, res, cite) = match ev {
            Evidence::Intersection(x) => (Status::ExcludedByIntersection, self.intersection(x.as_deref()), String::new()),
            Evidence::Witness(w) => {
                let w = self.g.witness(w).expect("checked at load");
                let r = self.all_samples(|env, h, m| match check_witness(w, h, m, self.rep(), env)? {
                    (true, _) => Ok(()),
                    (false, msg) => Err(msg),
                });
                let summary = r.map(|_| {
                    let mode = if w.g.is_exact() { "exactly" } else { "numerically" };
                    format!("witness {}: Ad_g({}) = {} {mode}", w.name, w.element, w.target)
                });
                (Status::ExcludedByConjugacy, summary, w.cite.clone().unwrap_or_default())
            }
            Evidence::Lemma7(k) => (Status::ExcludedByDivergence, self.lemma7(*k), "Lemma 7".into()),
            Evidence::Prop12Spiral => (Status::ExcludedByCosetDoubling, self.prop12_spiral(), "Proposition 12".into()),
            Evidence::Prop12Unitriangular => {
                let r = self.all_samples(|_, h, m| {
                    self.cartan_m(m)?;
                    if !tangent_to(self.rep(), &StabilizerFamily::Unitriangular3, h) {
                        return Err("h is not the unitriangular algebra".into());
                    }
                    let rep = reproduce_prop12(2.0);
                    if rep.messages.iter().any(|m| m.contains("unitriangular")) || !rep.h3_base_case {
                        return Err("unitriangular coset family does not diverge".into());
                    }
                    Ok(())
                });
                let s = r.map(|_| "unitriangular coset representatives leave every compact set".to_string());
                (Status::ExcludedByDivergence, s, "Proposition 12".into())
            }
            Evidence::Prop19(v) => {
                let r = self.all_samples(|env, h, m| {
                    self.cartan_m(m)?;
                    let r = env.get("r").map_or(0.0, q_to_f64);
                    let fam = StabilizerFamily::Borel { variant: *v, r };
                    if !tangent_to(self.rep(), &fam, h) {
                        return Err(format!("h is not tangent to the {v:?} family"));
                    }
                    let c = prop19_case(*v, r);
                    if !c.constructed_ok {
                        return Err(format!("no duplicate coset pair for {v:?}"));
                    }
                    Ok(())
                });
                let s = r.map(|_| format!("two distinct points of exp m in one {v:?} coset"));
                (Status::ExcludedByCosetDoubling, s, "Proposition 19".into())
            }
            Evidence::Fact(f) => {
                let fact = &self.cat.facts[f];
                (Status::ExcludedByMetadataFact, Ok(format!("fact {}: {}", fact.name, fact.statement)), fact.cite.clone())
            }
            Evidence::Loop(name) => {
                let spec = self.g.loop_spec(name).expect("checked at load");
                let r = self.g.build_loop(spec).and_then(|lp| self.loop_check(&lp));
                (Status::GlobalBruckLoop, r, spec.cite.clone().unwrap_or_default())
            }
        };
        match res {
            Ok(summary) => Outcome { status, verified: true, summary, cite },
            Err(e) => Outcome { status, verified: false, summary: e, cite },
        }
    }

    fn intersection(&self, x: Option<&str>) -> Result<String, String> {
        let mut last = String::new();
        self.all_samples(|env, h, m| {
            let i = h.intersect(m).map_err(|e| e.to_string())?;
            if i.is_zero() {
                return Err("h and m intersect trivially".into());
            }
            if let Some(x) = x {
                let e = eval_element(h.algebra(), env, x)?;
                if e.is_zero() || !i.contains(&e).map_err(|e| e.to_string())? {
                    return Err(format!("{x} is not a nonzero element of h and m"));
                }
            }
            last = i.to_string();
            Ok(())
        })?;
        Ok(match x {
            Some(x) => format!("{x} lies in h and m"),
            None if self.envs.len() == 1 => format!("h and m meet in {last}"),
            None => "h and m meet nontrivially for every sampled parameter".into(),
        })
    }

    fn cartan_m(&self, m: &Subspace) -> Result<(), String> {
        let lp = LoopInstance::hyperbolic("cartan", self.rep().clone()).map_err(|e| e.to_string())?;
        if !same_space(lp.m(), m) {
            return Err("m is not the Cartan complement".into());
        }
        Ok(())
    }

    fn lemma7(&self, k: usize) -> Result<String, String> {
        let frep = &self.g.factor_reps[k];
        self.all_samples(|_, h, m| {
            let (hk, mk) = (h.project(k), m.project(k));
            let lp = LoopInstance::hyperbolic("factor", frep.clone()).map_err(|e| e.to_string())?;
            if !same_space(lp.m(), &mk) {
                return Err(format!("m does not project onto the Cartan complement of factor {}", k + 1));
            }
            let fam = StabilizerFamily::Borel2 { unipotent: hk.dim() == 1 };
            if !tangent_to(frep, &fam, &hk) {
                return Err(format!("projection of h to factor {} is not triangular", k + 1));
            }
            Ok(())
        })?;
        let rep = reproduce_lemma7();
        if !rep.verdict {
            return Err(format!("divergent coset family not reproduced: {}", rep.messages.join("; ")));
        }
        Ok(format!("factor {}: triangular stabilizer, coset representatives in exp m diverge", k + 1))
    }

    fn prop12_spiral(&self) -> Result<String, String> {
        self.all_samples(|env, h, m| {
            self.cartan_m(m)?;
            let a = env.get("a").map(q_to_f64).ok_or("the spiral algebra needs parameter a")?;
            let d = a.exp();
            if !tangent_to(self.rep(), &StabilizerFamily::Spiral { d }, h) {
                return Err("h is not the spiral algebra".into());
            }
            let rep = reproduce_prop12(d);
            if !rep.verdict || rep.distinct_t < 2 {
                return Err(format!("no duplicate coset pair: {}", rep.messages.join("; ")));
            }
            Ok(())
        })?;
        Ok("two distinct points of exp m in one spiral coset".into())
    }

    fn loop_check(&self, lp: &LoopInstance) -> Result<String, String> {
        let (h, m) = self.hm(&Env::new());
        if !same_space(lp.h(), &h) || !same_space(lp.m(), &m) {
            return Err(format!("loop has h = {}, m = {}", lp.h(), lp.m()));
        }
        let bt = bol_triple_check(&h, &m).map_err(|e| e.to_string())?;
        if !bt.ok() {
            return Err(format!("not a Bol triple: {bt:?}"));
        }
        let (n, tol, seed) = (self.opts.samples, self.opts.tol, self.opts.seed);
        let mut suites = vec![bol_suite(lp, n, tol, seed), division_suite(lp, n, tol, seed), section_suite(lp, n, tol, seed)];
        if lp.is_direct_product_of_hyperbolic() {
            suites.push(bruck_suite(lp, n, tol, seed));
            suites.push(alternativity_suite(lp, n, tol, seed));
        }
        if let Some(bad) = suites.iter().find(|s| !s.verdict) {
            return Err(format!("{} suite failed", bad.suite));
        }
        let names: Vec<&str> = suites.iter().map(|s| s.suite.as_str()).collect();
        Ok(format!("{}: {} suites pass", lp.name(), names.join(", ")))
    }
}

fn classify_triple(cat: &Catalog, g: &Group, t: &Triple, opts: &ClassifyOptions) -> Verdict {
    let has_hm = t.h.is_some() && t.m.is_some() && g.rep.is_some();
    let envs = param_samples(&g.triple_params(t));
    let ctx = Ctx { cat, g, t, envs, opts };
    let mut outcomes: Vec<Outcome> = t.evidence.iter().map(|e| ctx.outcome(e)).collect();
    if has_hm && !t.evidence.iter().any(|e| matches!(e, Evidence::Intersection(_))) {
        let o = ctx.outcome(&Evidence::Intersection(None));
        if o.verified {
            outcomes.push(o);
        }
    }
    let loop_dim = has_hm.then(|| ctx.hm(&ctx.envs[0]).1.dim());
    let unverified: Vec<String> = outcomes.iter().filter(|o| !o.verified).map(|o| o.summary.clone()).collect();
    let best = outcomes.iter().filter(|o| o.verified).min_by_key(|o| o.status);
    let cite = |o: &Outcome| {
        let mut c: Vec<String> = [Some(o.cite.clone()), t.cite.clone()].into_iter().flatten().filter(|s| !s.is_empty()).collect();
        c.dedup();
        c.join("; ")
    };
    let (status, evidence, citation) = match best {
        Some(o) => (o.status, o.summary.clone(), cite(o)),
        None => (Status::Unresolved, "no listed evidence verified".into(), t.cite.clone().unwrap_or_default()),
    };
    Verdict {
        group: g.tag.clone(),
        triple: t.name.clone(),
        h: t.h.clone(),
        m: t.m.clone(),
        loop_dim,
        status,
        evidence,
        citation,
        unverified,
    }
}

/// Classifies every triple of every catalog group of dimension at most `max_dim`.
pub fn run_classification(cat: &Catalog, max_dim: usize, opts: &ClassifyOptions) -> Result<Classification, CatalogError> {
    if max_dim > MAX_CLASSIFY_DIM {
        return Err(CatalogError::MaxDim(max_dim));
    }
    let groups: Vec<&Group> = cat.groups.iter().filter(|g| g.dim <= max_dim).collect();
    let mut verdicts = Vec::new();
    let mut fam: BTreeMap<(usize, String), Vec<String>> = BTreeMap::new();
    let band_rank = |d: usize| match band_of(d) {
        "<=5" => 0,
        "6" => 1,
        "7-8" => 2,
        _ => 3,
    };
    for g in &groups {
        for t in &g.triples {
            let v = classify_triple(cat, g, t, opts);
            if v.status == Status::GlobalBruckLoop {
                let family = t
                    .evidence
                    .iter()
                    .find_map(|e| match e {
                        Evidence::Loop(l) => g.loop_spec(l).map(|s| s.family.clone()),
                        _ => None,
                    })
                    .unwrap_or_default();
                fam.entry((band_rank(g.dim), family)).or_default().push(format!("{}/{}", g.tag, t.name));
            }
            verdicts.push(v);
        }
    }
    let mut survivors: Vec<Band> = Vec::new();
    for ((rank, family), mut realizations) in fam {
        realizations.sort();
        let label = ["<=5", "6", "7-8", "9"][rank].to_string();
        match survivors.last_mut() {
            Some(b) if b.dim_g == label => b.families.push(FamilyRow { family, realizations }),
            _ => survivors.push(Band { dim_g: label, families: vec![FamilyRow { family, realizations }] }),
        }
    }
    Ok(Classification {
        max_dim,
        groups: groups.iter().map(|g| GroupRow { tag: g.tag.clone(), name: g.name.clone(), dim: g.dim }).collect(),
        verdicts,
        survivors,
    })
}

/// `text` is a human-readable table; `json` is the canonical, float-free serialization.
pub fn emit_report(c: &Classification, format: &str) -> Result<String, String> {
    match format {
        "json" => serde_json::to_string_pretty(c).map(|s| s + "\n").map_err(|e| e.to_string()),
        "text" => {
            let mut s = format!("classification up to dim G = {}\n\n", c.max_dim);
            for v in &c.verdicts {
                s.push_str(&format!(
                    "{:<14} {:<22} {:<24} {}\n",
                    v.group,
                    v.triple,
                    format!("{:?}", v.status),
                    v.evidence
                ));
                for u in &v.unverified {
                    s.push_str(&format!("{:<14} {:<22} {:<24} unverified: {u}\n", "", "", ""));
                }
            }
            s.push_str("\nsurvivors\n");
            for b in &c.survivors {
                s.push_str(&format!("  dim G {}\n", b.dim_g));
                for f in &b.families {
                    s.push_str(&format!("    {:<32} {}\n", f.family, f.realizations.join(", ")));
                }
            }
            let unresolved = c.unresolved().len();
            s.push_str(&format!("\n{} triples, {} unresolved\n", c.verdicts.len(), unresolved));
            Ok(s)
        }
        f => Err(format!("unknown format `{f}` (text or json)")),
    }
}

/// Shipped golden JSON for the full classification up to dimension 9.
pub fn golden_path(root: &Path) -> PathBuf {
    root.join("golden").join("classify9.json")
}

/// Byte comparison of a report against the golden file, naming the first differing line.
pub fn compare_golden(actual: &str, expected: &str) -> Result<(), String> {
    if actual == expected {
        return Ok(());
    }
    let (a, e): (Vec<_>, Vec<_>) = (actual.lines().collect(), expected.lines().collect());
    let i = a.iter().zip(&e).position(|(x, y)| x != y).unwrap_or(a.len().min(e.len()));
    Err(format!(
        "report differs from golden at line {}: got `{}`, expected `{}`",
        i + 1,
        a.get(i).unwrap_or(&"<eof>").trim(),
        e.get(i).unwrap_or(&"<eof>").trim()
    ))
}
