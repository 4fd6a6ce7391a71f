//! `cobord`: load and validate site descriptions, evaluate element
//! expressions, build the stagewise quotients, run the axiom and duality
//! suites, and emit deterministic reports.
//!
//! Exit codes: 0 on success, 1 on a validation or axiom violation (with
//! witnesses printed), 2 on a usage error (with the synopsis). Machine
//! format output (`--format machine`) is line-oriented `key = value` with a
//! stable key order and no timestamps, so identical inputs produce
//! byte-identical reports.

use std::fmt::Write as _;
use std::process::ExitCode;

use cobord::analysis::{
    cap_product, duality_d_pi, resolution_compare_all, run_axiom_suite, transition_coherence,
    ResolutionSystem, SuiteConfig,
};
use cobord::cycles::Element;
use cobord::expr::{canonical_string, parse_element};
use cobord::lazard::{build_universal_fgl, series_compose_check};
use cobord::quotient::{Presentation, Stage, Universe};
use cobord::report::Report;
use cobord::site::{load_site, MorphId, Site};
use cobord::{Error, DEFAULT_RESOURCE_LIMIT};

const SYNOPSIS: &str = "\
usage: cobord <command> [options]

commands:
  validate <site> [--format text|machine]
  eval     --site F --arrow A --expr E [--format ...]
  quotient --site F --arrow A [--stages dim,sect,fgl] [--rmax K]
           [--degree-bound N] [--invariants true] [--query-zero E]...
           [--query-equal 'E1 == E2']... [--format ...]
  axioms   --site F [--bundle-cap K] [--max-gens N] [--max-instances N]
           [--format ...]
  fgl      [--degree N] [--format ...]
  cap      --site F --arrow A --alpha E --beta E [--format ...]
  duality  --site F --resolution P --arrow A --alpha E [--format ...]
  report   --site F [--format ...]

defaults: --format text, --rmax reldim(arrow)+2, --degree-bound 4,
          --stages dim,sect,fgl. The COBORD_RESOURCE_LIMIT environment
          variable caps lattice and universe sizes.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{SYNOPSIS}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    Usage(String),
    Failed(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failed(msg: impl ToString) -> CliError {
    CliError::Failed(msg.to_string())
}

struct Opts {
    positional: Vec<String>,
    flags: Vec<(String, String)>,
}

impl Opts {
    fn parse(args: &[String], allowed: &[&str]) -> Result<Opts, CliError> {
        let mut positional = Vec::new();
        let mut flags = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--") {
                if !allowed.contains(&name) {
                    return Err(usage(format!("unknown option `--{name}`")));
                }
                let value = it
                    .next()
                    .ok_or_else(|| usage(format!("option `--{name}` needs a value")))?;
                flags.push((name.to_string(), value.clone()));
            } else {
                positional.push(arg.clone());
            }
        }
        Ok(Opts { positional, flags })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.flags
            .iter()
            .rev()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn get_all(&self, name: &str) -> Vec<&str> {
        self.flags
            .iter()
            .filter(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| usage(format!("missing required option `--{name}`")))
    }

    fn format(&self) -> Result<Format, CliError> {
        match self.get("format").unwrap_or("text") {
            "text" => Ok(Format::Text),
            "machine" => Ok(Format::Machine),
            other => Err(usage(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Text,
    Machine,
}

fn resource_limit() -> Result<usize, CliError> {
    match std::env::var("COBORD_RESOURCE_LIMIT") {
        Ok(v) => v
            .parse()
            .map_err(|_| usage(format!("COBORD_RESOURCE_LIMIT must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_RESOURCE_LIMIT),
    }
}

fn load(path: &str) -> Result<Site, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read `{path}`: {e}")))?;
    load_site(&text).map_err(failed)
}

fn arrow_named(site: &Site, name: &str) -> Result<MorphId, CliError> {
    site.morphism_named(name)
        .map_err(|_| usage(format!("unknown morphism `{name}`")))
}

/// Expression problems are usage errors; everything downstream is a failure.
fn element(site: &Site, arrow: MorphId, text: &str) -> Result<Element, CliError> {
    parse_element(site, arrow, text).map_err(|e| match e {
        Error::Parse { .. } | Error::InvalidInput(_) => usage(e.to_string()),
        other => failed(other),
    })
}

fn emit(report: &Report, format: Format, text_head: &str) -> ExitCode {
    match format {
        Format::Machine => print!("{}", report.machine()),
        Format::Text => {
            if !text_head.is_empty() {
                println!("{text_head}");
            }
            for (k, v) in report.entries() {
                println!("  {k} = {v}");
            }
        }
    }
    ExitCode::SUCCESS
}

fn run(args: &[String]) -> Result<ExitCode, CliError> {
    let (verb, rest) = args
        .split_first()
        .ok_or_else(|| usage("missing command"))?;
    match verb.as_str() {
        "validate" => cmd_validate(rest),
        "eval" => cmd_eval(rest),
        "quotient" => cmd_quotient(rest),
        "axioms" => cmd_axioms(rest),
        "fgl" => cmd_fgl(rest),
        "cap" => cmd_cap(rest),
        "duality" => cmd_duality(rest),
        "report" => cmd_report(rest),
        other => Err(usage(format!("unknown command `{other}`"))),
    }
}

fn cmd_validate(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(args, &["format"])?;
    let path = opts
        .positional
        .first()
        .ok_or_else(|| usage("validate needs a site path"))?;
    let site = load(path)?;
    let mut report = Report::new();
    report.push("site", path);
    report.push("status", "ok");
    for (key, count) in site.summary() {
        report.push(key, count);
    }
    Ok(emit(&report, opts.format()?, &format!("{path}: valid site")))
}

fn cmd_eval(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(args, &["site", "arrow", "expr", "format"])?;
    let site = load(opts.require("site")?)?;
    let arrow = arrow_named(&site, opts.require("arrow")?)?;
    let e = element(&site, arrow, opts.require("expr")?)?;
    let mut report = Report::new();
    report.push("arrow", site.morph_name(arrow));
    report.push("canonical", canonical_string(&site, &e));
    let mut degrees = e.degrees(&site).map_err(failed)?;
    degrees.sort();
    report.push(
        "degrees",
        degrees
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok(emit(&report, opts.format()?, "evaluated element"))
}

fn parse_stages(text: &str) -> Result<Stage, CliError> {
    match text {
        "" | "free" => Ok(Stage::Free),
        "dim" => Ok(Stage::Dim),
        "dim,sect" => Ok(Stage::Sect),
        "dim,sect,fgl" => Ok(Stage::Fgl),
        other => Err(usage(format!(
            "stages must be a prefix chain of `dim,sect,fgl`, got `{other}`"
        ))),
    }
}

fn cmd_quotient(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(
        args,
        &[
            "site",
            "arrow",
            "stages",
            "rmax",
            "degree-bound",
            "invariants",
            "query-zero",
            "query-equal",
            "format",
        ],
    )?;
    let path = opts.require("site")?;
    let site = load(path)?;
    let arrow = arrow_named(&site, opts.require("arrow")?)?;
    let stage = parse_stages(opts.get("stages").unwrap_or("dim,sect,fgl"))?;
    let default_rmax = (site
        .rel_dim(arrow)
        .or_else(|| {
            // Fall back to the composite's relative dimension when the arrow
            // itself is not smooth.
            Some(0)
        })
        .unwrap_or(0)
        .max(0) as usize)
        + 2;
    let rmax: usize = match opts.get("rmax") {
        Some(v) => v.parse().map_err(|_| usage("rmax must be an integer"))?,
        None => default_rmax,
    };
    let degree_bound: u32 = match opts.get("degree-bound") {
        Some(v) => v
            .parse()
            .map_err(|_| usage("degree-bound must be an integer"))?,
        None => 4,
    };
    let limit = resource_limit()?;

    let universe = Universe::build(&site, arrow, rmax, limit).map_err(failed)?;
    let lazard = if stage >= Stage::Fgl {
        Some(build_universal_fgl(degree_bound, limit).map_err(failed)?)
    } else {
        None
    };
    let pres = Presentation::build(
        &site,
        universe,
        stage,
        lazard.as_ref().map(|(r, f)| (r, f)),
        limit,
    )
    .map_err(failed)?;

    let mut report = Report::new();
    report.push("site", path);
    report.push("arrow", site.morph_name(arrow));
    report.push("stage", stage.name());
    report.push("rmax", rmax);
    report.push("degree_bound", degree_bound);
    report.push(
        "note",
        "relation subgroups use the declared factorizations only; the computed lattice is a sub-approximation",
    );
    report.push("cycles", pres.universe.len());
    for (degree, rank) in pres.ranks() {
        report.push(format!("rank[{degree}]"), rank);
    }
    // Smith-style invariant factors are opt-in: ranks come from the HNF.
    if opts.get("invariants") == Some("true") {
        for (degree, factors) in pres.invariant_factors() {
            let nontrivial: Vec<String> = factors
                .iter()
                .filter(|f| f.to_string() != "1")
                .map(|f| f.to_string())
                .collect();
            if !nontrivial.is_empty() {
                report.push(format!("torsion[{degree}]"), nontrivial.join(","));
            }
        }
    }
    for (idx, q) in opts.get_all("query-zero").iter().enumerate() {
        let e = element(&site, arrow, q)?;
        let zero = pres.is_zero_class(&site, &e).map_err(failed)?;
        report.push(format!("query_zero[{idx}]"), zero);
    }
    for (idx, q) in opts.get_all("query-equal").iter().enumerate() {
        let (lhs, rhs) = q
            .split_once("==")
            .ok_or_else(|| usage("query-equal expects `EXPR == EXPR`"))?;
        let a = element(&site, arrow, lhs.trim())?;
        let b = element(&site, arrow, rhs.trim())?;
        let eq = pres.equal_in_quotient(&site, &a, &b).map_err(failed)?;
        report.push(format!("query_equal[{idx}]"), eq);
    }
    Ok(emit(
        &report,
        opts.format()?,
        &format!("quotient over {} at stage {}", site.morph_name(arrow), stage.name()),
    ))
}

fn suite_config(opts: &Opts) -> Result<SuiteConfig, CliError> {
    let mut cfg = SuiteConfig::default();
    if let Some(v) = opts.get("bundle-cap") {
        cfg.bundle_cap = v.parse().map_err(|_| usage("bundle-cap must be an integer"))?;
    }
    if let Some(v) = opts.get("max-gens") {
        cfg.max_gens_per_arrow = v.parse().map_err(|_| usage("max-gens must be an integer"))?;
    }
    if let Some(v) = opts.get("max-instances") {
        cfg.max_instances = v
            .parse()
            .map_err(|_| usage("max-instances must be an integer"))?;
    }
    Ok(cfg)
}

fn axiom_report(site: &Site, cfg: SuiteConfig, report: &mut Report) -> bool {
    let reports = run_axiom_suite(site, cfg);
    let mut ok = true;
    for rep in &reports {
        report.push(
            format!("axiom[{}]", rep.id),
            format!(
                "checked={} nontrivial={} skipped={} violations={}",
                rep.checked,
                rep.nontrivial,
                rep.skipped.len(),
                rep.violations.len()
            ),
        );
        for (idx, v) in rep.violations.iter().enumerate() {
            report.push(format!("violation[{}][{idx}]", rep.id), v);
            ok = false;
        }
    }
    ok
}

fn cmd_axioms(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(
        args,
        &["site", "bundle-cap", "max-gens", "max-instances", "format"],
    )?;
    let path = opts.require("site")?;
    let site = load(path)?;
    let cfg = suite_config(&opts)?;
    let mut report = Report::new();
    report.push("site", path);
    let ok = axiom_report(&site, cfg, &mut report);
    report.push("status", if ok { "pass" } else { "fail" });
    let code = emit(&report, opts.format()?, "axiom suite");
    if ok {
        Ok(code)
    } else {
        Err(failed("axiom violations reported above"))
    }
}

fn cmd_fgl(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(args, &["degree", "format"])?;
    let degree: u32 = match opts.get("degree") {
        Some(v) => v.parse().map_err(|_| usage("degree must be an integer"))?,
        None => 4,
    };
    let limit = resource_limit()?;
    let (ring, f) = build_universal_fgl(degree, limit).map_err(failed)?;
    let residual = series_compose_check(&ring, &f);
    let mut report = Report::new();
    report.push("degree_bound", degree);
    report.push("generators", ring.gens().len());
    report.push("associativity_residual_terms", residual.len());
    for d in 1..=degree {
        report.push(format!("rank[{d}]"), ring.graded_rank(d));
    }
    report.push("stable_through_degree", degree.saturating_sub(1));
    let mut coeff_table = String::new();
    for (&(p, q), c) in f.coeffs() {
        let _ = write!(coeff_table, "u^{p}v^{q}: {}; ", c.display(&ring));
    }
    report.push("coefficients", coeff_table.trim_end_matches("; "));
    Ok(emit(
        &report,
        opts.format()?,
        &format!("universal formal group law through degree {degree}"),
    ))
}

fn cmd_cap(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(args, &["site", "arrow", "alpha", "beta", "format"])?;
    let site = load(opts.require("site")?)?;
    let arrow = arrow_named(&site, opts.require("arrow")?)?;
    let x = site.morphism(arrow).source;
    let alpha = element(&site, site.identity(x), opts.require("alpha")?)?;
    let beta = element(&site, arrow, opts.require("beta")?)?;
    let capped = cap_product(&site, &alpha, &beta).map_err(failed)?;
    let mut report = Report::new();
    report.push("arrow", site.morph_name(arrow));
    report.push("result", canonical_string(&site, &capped));
    Ok(emit(&report, opts.format()?, "cap product"))
}

fn cmd_duality(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(args, &["site", "resolution", "arrow", "alpha", "format"])?;
    let site = load(opts.require("site")?)?;
    let arrow = arrow_named(&site, opts.require("arrow")?)?;
    let pi = arrow_named(&site, opts.require("resolution")?)?;
    let x = site.morphism(arrow).source;
    let alpha = element(&site, site.identity(x), opts.require("alpha")?)?;
    let result = duality_d_pi(&site, pi, arrow, &alpha).map_err(failed)?;
    let mut report = Report::new();
    report.push("resolution", site.morph_name(pi));
    report.push("arrow", site.morph_name(arrow));
    report.push("result", canonical_string(&site, &result));
    // Transition coherence along every related pair of the object's system.
    let sys = ResolutionSystem::for_object(&site, x);
    let transitions = transition_coherence(&site, &sys, arrow, &[alpha]).map_err(failed)?;
    report.push("transition_pairs", transitions.pairs);
    report.push("transition_instances", transitions.instances);
    report.push("transition_violations", transitions.violations.len());
    for (idx, v) in transitions.violations.iter().enumerate() {
        report.push(format!("transition_violation[{idx}]"), v);
    }
    for (p1, p2, cmp) in resolution_compare_all(&site, &sys) {
        report.push(
            format!("compare[{},{}]", site.morph_name(p1), site.morph_name(p2)),
            cmp.name(),
        );
    }
    let code = emit(&report, opts.format()?, "duality");
    if transitions.violations.is_empty() {
        Ok(code)
    } else {
        Err(failed("transition violations reported above"))
    }
}

fn cmd_report(args: &[String]) -> Result<ExitCode, CliError> {
    let opts = Opts::parse(
        args,
        &["site", "bundle-cap", "max-gens", "max-instances", "format"],
    )?;
    let path = opts.require("site")?;
    let site = load(path)?;
    let mut report = Report::new();
    report.push("site", path);
    for (key, count) in site.summary() {
        report.push(key, count);
    }
    let cfg = suite_config(&opts)?;
    let ok = axiom_report(&site, cfg, &mut report);
    for obj in site.objects() {
        let sys = ResolutionSystem::for_object(&site, obj);
        if sys.resolutions.len() > 1 {
            for (p1, p2, cmp) in resolution_compare_all(&site, &sys) {
                report.push(
                    format!(
                        "compare[{}][{},{}]",
                        site.obj_name(obj),
                        site.morph_name(p1),
                        site.morph_name(p2)
                    ),
                    cmp.name(),
                );
            }
        }
    }
    report.push("status", if ok { "pass" } else { "fail" });
    let code = emit(&report, opts.format()?, &format!("report for {path}"));
    if ok {
        Ok(code)
    } else {
        Err(failed("axiom violations reported above"))
    }
}
