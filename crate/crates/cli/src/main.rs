use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use bolsec::catalog::{
    compare_golden, default_catalog_dir, emit_report, golden_path, load_catalog, run_classification, Catalog,
    CatalogError, ClassifyOptions, LoopBuild, MAX_CLASSIFY_DIM,
};
use bolsec::loopcore::{
    prop19_case, reproduce_lemma7, reproduce_prop12, reproduce_prop19, run_all_suites, SuiteReport, PROP19_RADII,
};
use bolsec::matrixrep::BorelVariant;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bolsec", version, about = "Verify the Lie algebra tables, loop suites, counterexamples and classification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Catalog directory [default: the catalog shipped with the library]
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Only this group tag, e.g. sl3r or sl2r+so3r
    #[arg(long, global = true)]
    group: Option<String>,
    /// Random samples per suite [default: 1000 for loop-suite, 200 for classify]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    /// Residual tolerance of the numeric suites
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    tol: f64,
    /// Seed of the sampling RNG
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load the catalog, running all exact checks (Jacobi, representations, eigensplits, witnesses)
    VerifyTables,
    /// Run the Bol, Bruck, division, section and alternativity suites on catalog loops
    LoopSuite,
    /// Reproduce one of the coset counterexamples
    Reproduce {
        #[arg(value_enum)]
        which: Which,
        /// Spiral parameter d of the prop12 reproducer
        #[arg(long, default_value_t = 2.0, value_parser = positive)]
        d: f64,
        /// Only this r for the prop19 reproducer [default: 0, 1, -1, 2]
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,
    },
    /// Classify every catalog triple; at --max-dim 9 the JSON report must match the golden file
    Classify {
        #[arg(long, default_value_t = MAX_CLASSIFY_DIM)]
        max_dim: usize,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Lemma7,
    Prop12,
    Prop19,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Exit status and report text.
struct Run {
    ok: bool,
    report: String,
}

enum Failure {
    Config(String),
    Verification(String),
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Io { .. } | CatalogError::MaxDim(_) => Failure::Config(e.to_string()),
            CatalogError::Parse { .. } | CatalogError::Invalid { .. } => Failure::Verification(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::VerifyTables => verify_tables(&cli),
        Cmd::LoopSuite => loop_suite(&cli),
        Cmd::Reproduce { which, d, r } => Ok(reproduce(&cli, *which, *d, *r)),
        Cmd::Classify { max_dim } => classify(&cli, *max_dim),
    };
    match res {
        Ok(run) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &run.report) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", run.report);
            }
            ExitCode::from(if run.ok { 0 } else { 1 })
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(e)) => {
            eprintln!("verification failed: {e}");
            ExitCode::from(1)
        }
    }
}

fn catalog_dir(cli: &Cli) -> PathBuf {
    cli.catalog.clone().unwrap_or_else(default_catalog_dir)
}

fn load(cli: &Cli) -> Result<Catalog, Failure> {
    let cat = load_catalog(&catalog_dir(cli))?;
    if let Some(g) = &cli.group {
        if cat.group(g).is_none() {
            return Err(Failure::Config(format!("no group `{g}` in the catalog")));
        }
    }
    Ok(cat)
}

fn selected<'a>(cli: &Cli, cat: &'a Catalog) -> impl Iterator<Item = &'a bolsec::catalog::Group> {
    let want = cli.group.clone();
    cat.groups.iter().filter(move |g| want.as_ref().map_or(true, |w| &g.tag == w))
}

fn verify_tables(cli: &Cli) -> Result<Run, Failure> {
    let cat = load(cli)?;
    let groups: Vec<_> = selected(cli, &cat).collect();
    let report = match cli.format {
        Format::Json => {
            let rows: Vec<_> =
                groups.iter().map(|g| json!({ "group": g.tag, "dim": g.dim, "checks": g.checks })).collect();
            to_json(&json!({ "groups": rows, "facts": cat.facts.len() }))
        }
        Format::Text => {
            let mut s = String::new();
            for g in &groups {
                s.push_str(&format!("{:<16} dim {}  {} checks\n", g.tag, g.dim, g.checks.len()));
                for c in &g.checks {
                    s.push_str(&format!("    {c}\n"));
                }
            }
            let n: usize = groups.iter().map(|g| g.checks.len()).sum();
            s.push_str(&format!("{} groups, {n} checks, {} facts, all pass\n", groups.len(), cat.facts.len()));
            s
        }
    };
    Ok(Run { ok: true, report })
}

/// Suites that must pass; the Bruck and alternativity identities are only claimed for
/// direct products of hyperbolic loops.
fn required(s: &SuiteReport, hyperbolic: bool) -> bool {
    hyperbolic || matches!(s.suite.as_str(), "bol" | "division" | "section")
}

fn loop_suite(cli: &Cli) -> Result<Run, Failure> {
    let cat = load(cli)?;
    let samples = cli.samples.unwrap_or(1000) as usize;
    let mut ok = true;
    let mut rows = Vec::new();
    let mut text = String::new();
    for g in selected(cli, &cat) {
        for spec in &g.loops {
            let lp = g.build_loop(spec).map_err(Failure::Verification)?;
            let hyperbolic = matches!(spec.build, LoopBuild::Hyperbolic);
            let suites = run_all_suites(&lp, samples, cli.tol, cli.seed);
            text.push_str(&format!("{} / {} ({}), dim {}\n", g.tag, spec.name, spec.family, lp.dim()));
            for s in &suites {
                let req = required(s, hyperbolic);
                let mark = match (s.verdict, req) {
                    (true, _) => "pass",
                    (false, true) => "FAIL",
                    (false, false) => "fails (not claimed)",
                };
                ok &= s.verdict || !req;
                text.push_str(&format!(
                    "    {:<17} {:>6} samples  max residual {:.3e}  {mark}\n",
                    s.suite, s.samples, s.max_residual
                ));
                for w in s.witnesses.iter().take(1) {
                    text.push_str(&format!("        {w}\n"));
                }
            }
            rows.push(json!({
                "group": g.tag,
                "loop": spec.name,
                "family": spec.family,
                "suites": suites.iter().map(|s| json!({
                    "suite": s.suite,
                    "required": required(s, hyperbolic),
                    "samples": s.samples,
                    "tolerance": s.tolerance,
                    "max_residual": s.max_residual,
                    "verdict": s.verdict,
                    "witnesses": s.witnesses,
                })).collect::<Vec<_>>(),
            }));
        }
    }
    if rows.is_empty() {
        return Err(Failure::Config("no loops in the selected groups".into()));
    }
    let report = match cli.format {
        Format::Json => to_json(&json!({ "ok": ok, "loops": rows })),
        Format::Text => text,
    };
    Ok(Run { ok, report })
}

fn reproduce(cli: &Cli, which: Which, d: f64, r: Option<f64>) -> Run {
    match which {
        Which::Lemma7 => {
            let rep = reproduce_lemma7();
            let report = match cli.format {
                Format::Json => to_json(&rep),
                Format::Text => {
                    let mut s = String::from("  k  c                      max|s(c)|     g(c)                                   s in M  coset\n");
                    for row in &rep.rows {
                        let g: Vec<String> = row.g.iter().map(|x| format!("{x:.6}")).collect();
                        s.push_str(&format!(
                            "{:>3}  {:<22} {:<12.4e}  [{}]  {:<6}  {}\n",
                            row.k,
                            short(&row.c, 22),
                            row.s_norm,
                            g.join(", "),
                            row.s_in_m,
                            row.coset_exact && row.coset_family
                        ));
                    }
                    s.push_str(&format!(
                        "final max|s(c)| = {:.4e}, g(c) Cauchy distance = {:.3e}\n",
                        rep.final_norm, rep.g_cauchy
                    ));
                    messages(&mut s, &rep.messages);
                    s.push_str(&verdict_line(rep.verdict, "coset representatives in exp m diverge while g(c) converges"));
                    s
                }
            };
            Run { ok: rep.verdict, report }
        }
        Which::Prop12 => {
            let rep = reproduce_prop12(d);
            let report = match cli.format {
                Format::Json => to_json(&rep),
                Format::Text => {
                    let mut s = format!("d = {}\nm1 = {}\nm2 = {}\n", rep.d, rep.m1, rep.m2);
                    s.push_str(&format!(
                        "m1 in exp m1: {}, m2 in exp m1: {}, spiral parameters {:?}, distance {:.4}\n",
                        rep.m1_valid, rep.m2_valid, rep.t_values, rep.distance
                    ));
                    s.push_str("unitriangular family:\n");
                    for row in &rep.h3_rows {
                        s.push_str(&format!("{:>5}  {:<22} max|s3(c)| = {:.4e}\n", row.k, short(&row.c, 22), row.s_norm));
                    }
                    messages(&mut s, &rep.messages);
                    s.push_str(&verdict_line(rep.verdict, "two representatives in one coset, and s3(c) diverges"));
                    s
                }
            };
            Run { ok: rep.verdict, report }
        }
        Which::Prop19 => {
            let variants = [BorelVariant::H5, BorelVariant::H6, BorelVariant::H8];
            let (cases, printed, constructed, msgs, head) = match r {
                Some(r) => {
                    let cases: Vec<_> = variants.iter().map(|v| prop19_case(*v, r)).collect();
                    let p = cases.iter().all(|c| c.printed_ok);
                    let k = cases.iter().all(|c| c.constructed_ok);
                    (cases, p, k, Vec::new(), None)
                }
                None => {
                    let rep = reproduce_prop19();
                    let head = format!("g = {}\nprinted m1 = {}\nprinted m2 = {}\n", rep.g, rep.m1, rep.m2);
                    (rep.cases, rep.printed_verdict, rep.constructed_verdict, rep.messages, Some(head))
                }
            };
            let report = match cli.format {
                Format::Json => to_json(&json!({
                    "radii": r.map_or(PROP19_RADII.to_vec(), |r| vec![r]),
                    "cases": cases,
                    "printed_verdict": printed,
                    "constructed_verdict": constructed,
                    "messages": msgs,
                })),
                Format::Text => {
                    let mut s = head.unwrap_or_default();
                    s.push_str("variant      r  printed pair  constructed a      distance  constructed pair\n");
                    for c in &cases {
                        s.push_str(&format!(
                            "{:<7} {:>6}  {:<12}  {:<17} {:>9.4}  {}\n",
                            c.variant,
                            c.r,
                            if c.printed_ok { "one coset" } else { "not one coset" },
                            c.constructed_a,
                            c.constructed_distance,
                            if c.constructed_ok { "one coset" } else { "FAIL" }
                        ));
                    }
                    messages(&mut s, &msgs);
                    s.push_str(&verdict_line(constructed, "every family has two distinct representatives in exp m of one coset"));
                    s
                }
            };
            Run { ok: constructed, report }
        }
    }
}

fn classify(cli: &Cli, max_dim: usize) -> Result<Run, Failure> {
    if max_dim > MAX_CLASSIFY_DIM {
        return Err(CatalogError::MaxDim(max_dim).into());
    }
    let cat = load(cli)?;
    let mut opts = ClassifyOptions { tol: cli.tol, seed: cli.seed, ..ClassifyOptions::default() };
    if let Some(n) = cli.samples {
        opts.samples = n as usize;
    }
    let c = run_classification(&cat, max_dim, &opts)?;
    let fmt = if cli.format == Format::Json { "json" } else { "text" };
    let report = emit_report(&c, fmt).map_err(Failure::Config)?;
    let mut ok = c.unresolved().is_empty();
    if !ok {
        eprintln!("{} unresolved triples", c.unresolved().len());
    }
    if max_dim == MAX_CLASSIFY_DIM {
        let path = golden_path(&catalog_dir(cli));
        let golden = fs::read_to_string(&path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let json = if fmt == "json" { report.clone() } else { emit_report(&c, "json").map_err(Failure::Config)? };
        if let Err(e) = compare_golden(&json, &golden) {
            eprintln!("{e}");
            ok = false;
        }
    }
    Ok(Run { ok, report })
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn short(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        format!("{}...", s.chars().take(n - 3).collect::<String>())
    }
}

fn messages(s: &mut String, msgs: &[String]) {
    for m in msgs {
        s.push_str(&format!("note: {m}\n"));
    }
}

fn verdict_line(ok: bool, claim: &str) -> String {
    format!("{}: {claim}\n", if ok { "reproduced" } else { "NOT reproduced" })
}
