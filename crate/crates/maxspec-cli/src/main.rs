//! Batch front door for the library: parses space, map, model, and colength
//! descriptions, runs the corresponding operations or property suites, and
//! emits text or line-delimited JSON reports.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 property
//! witness (a failed factorization, roundtrip, or suite case).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use maxspec::group::{glue, order_mismatch_demo, sigma_r_report, subgroup_basis, subgroup_member, unglue};
use maxspec::textform::{self, IdealRec, TextError};
use maxspec::zmatrix::CancelToken;
use maxspec::{
    colength, colength_stage, run_suite, ColengthModel, DefinableSet, DomainModel, GroupError,
    IdealError, IdealMap, Ordinal, SetCount, Space,
};

#[derive(Parser)]
#[command(name = "maxspec", version, about = "Exact computations on ordinal-indexed maximal-spectrum models")]
struct Cli {
    /// Report format: human-readable text or line-delimited JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Factor an integral continuous map into its decreasing level sets.
    Factor {
        /// Map description file.
        ideal: PathBuf,
    },
    /// Build a stage-chain model over a space and report its structure.
    Model {
        /// Space description file; required with --sharp or --sp.
        space: Option<PathBuf>,
        /// Iterate derived sets until they vanish.
        #[arg(long)]
        sharp: bool,
        /// Single-stage model over the same space.
        #[arg(long)]
        sp: bool,
        /// Validate an explicit model description instead.
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Report rank data of a model description.
    Rank {
        model: PathBuf,
    },
    /// Split a map into stratum components and verify the roundtrip.
    Decompose {
        model: PathBuf,
        ideal: PathBuf,
    },
    /// Decide whether a map is an integer combination of generators.
    Member {
        candidate: PathBuf,
        #[arg(required = true, num_args = 1..)]
        gens: Vec<PathBuf>,
    },
    /// First-stage restriction ranks of a generator family.
    SigmaR {
        model: PathBuf,
        #[arg(required = true, num_args = 1..)]
        gens: Vec<PathBuf>,
    },
    /// Colength of a map, optionally restricted to a chain stage.
    Colength {
        model: PathBuf,
        ideal: PathBuf,
        /// Also report the colength within stage N of the canonical chain.
        #[arg(long)]
        stage: Option<usize>,
    },
    /// Run a named property suite with seeded cases.
    Suite {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
    /// Exhibit incomparable tuples whose glued maps stay incomparable.
    DemoOrderMismatch {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
}

struct Report {
    text: String,
    records: Vec<Value>,
}

struct CmdFail {
    code: u8,
    kind: &'static str,
    message: String,
    witness: Option<Value>,
}

impl CmdFail {
    fn parse(message: String) -> CmdFail {
        CmdFail { code: 2, kind: "parse", message, witness: None }
    }

    fn validation(message: String) -> CmdFail {
        CmdFail { code: 3, kind: "validation", message, witness: None }
    }
}

fn text_fail(e: TextError) -> CmdFail {
    if e.is_parse() {
        CmdFail::parse(e.to_string())
    } else {
        CmdFail::validation(e.to_string())
    }
}

fn ideal_fail(e: IdealError) -> CmdFail {
    match e {
        IdealError::NotContinuous { least, witnesses } => CmdFail {
            code: 4,
            kind: "witness",
            message: format!("map is not continuous; least defect at {least}"),
            witness: Some(json!({
                "least": least.to_string(),
                "cells": textform::set_to_cells(&witnesses),
            })),
        },
        other => CmdFail::validation(other.to_string()),
    }
}

fn group_fail(e: GroupError) -> CmdFail {
    match e {
        GroupError::Unglue { stratum, witness } => CmdFail {
            code: 4,
            kind: "witness",
            message: format!("map does not split along stratum {stratum}; defect at {witness}"),
            witness: Some(json!({
                "stratum": stratum,
                "point": witness.to_string(),
            })),
        },
        other => CmdFail::validation(other.to_string()),
    }
}

fn read(path: &Path) -> Result<String, CmdFail> {
    fs::read_to_string(path).map_err(|e| CmdFail::parse(format!("{}: {e}", path.display())))
}

fn parse_ideal_file(path: &Path) -> Result<IdealMap, CmdFail> {
    textform::parse_ideal(&read(path)?).map_err(text_fail)
}

fn parse_model_file(path: &Path) -> Result<DomainModel, CmdFail> {
    textform::parse_model(&read(path)?).map_err(text_fail)
}

fn parse_colength_file(path: &Path) -> Result<ColengthModel, CmdFail> {
    textform::parse_colength(&read(path)?).map_err(text_fail)
}

fn render_set(s: &DefinableSet) -> String {
    let cells = s.normalized_cells();
    if cells.is_empty() {
        "(empty)".to_string()
    } else {
        cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
    }
}

fn render_map(nu: &IdealMap) -> String {
    let c = nu.canonical();
    let mut parts: Vec<String> = c
        .pieces()
        .iter()
        .map(|(cell, v)| format!("{v} on {cell}"))
        .collect();
    parts.extend(c.overrides().iter().map(|(x, v)| format!("{v} at {x}")));
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("; ")
    }
}

fn count_value(c: &SetCount) -> Value {
    match c {
        SetCount::Finite(n) => json!(n),
        SetCount::Infinite => json!("inf"),
    }
}

fn cmd_factor(ideal: &Path) -> Result<(Report, u8), CmdFail> {
    let nu = parse_ideal_file(ideal)?;
    let factors = nu.radical_factor().map_err(ideal_fail)?;
    let mut text = format!("factors: {}\n", factors.len());
    let mut recs = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        text.push_str(&format!("  {}: {}\n", i + 1, render_set(f)));
        recs.push(textform::set_to_cells(f));
    }
    let records = vec![json!({
        "record": "factors",
        "count": factors.len(),
        "factors": recs,
    })];
    Ok((Report { text, records }, 0))
}

fn model_report(m: &DomainModel, record: &str) -> Report {
    let mut text = format!("top: {}\n", m.space().top());
    text.push_str(&format!("terminal: {}\n", match m.terminal() {
        maxspec::Terminal::Empty => "empty",
        maxspec::Terminal::Stalled => "stalled",
    }));
    text.push_str(&format!("sp rank: {}\n", m.sp_rank()));
    text.push_str(&format!("scattered: {}\n", m.is_sp_scattered()));
    for (i, c) in m.chain().iter().enumerate() {
        text.push_str(&format!("stage {i}: {}\n", render_set(c)));
    }
    for (i, s) in m.strata().iter().enumerate() {
        text.push_str(&format!("stratum {i}: {}\n", render_set(s)));
    }
    let rec = textform::ModelRec::from_model(m);
    let records = vec![json!({
        "record": record,
        "model": rec,
        "sp_rank": m.sp_rank(),
        "scattered": m.is_sp_scattered(),
        "strata": m.strata().iter().map(textform::set_to_cells).collect::<Vec<_>>(),
    })];
    Report { text, records }
}

fn cmd_model(
    space: Option<&Path>,
    sharp: bool,
    sp: bool,
    chain: Option<&Path>,
) -> Result<(Report, u8), CmdFail> {
    let m = match (space, sharp, sp, chain) {
        (Some(p), true, false, None) => {
            let space = textform::parse_space(&read(p)?).map_err(text_fail)?;
            DomainModel::sharp(&space)
        }
        (Some(p), false, true, None) => {
            let space = textform::parse_space(&read(p)?).map_err(text_fail)?;
            DomainModel::sp(&space)
        }
        (None, false, false, Some(p)) => parse_model_file(p)?,
        _ => {
            return Err(CmdFail::parse(
                "give a space file with exactly one of --sharp/--sp, or --chain with a model file"
                    .to_string(),
            ))
        }
    };
    Ok((model_report(&m, "model"), 0))
}

fn cmd_rank(model: &Path) -> Result<(Report, u8), CmdFail> {
    let m = parse_model_file(model)?;
    let counts: Vec<SetCount> = m.chain().iter().map(|c| c.count()).collect();
    let mut text = format!("sp rank: {}\nscattered: {}\n", m.sp_rank(), m.is_sp_scattered());
    for (i, c) in counts.iter().enumerate() {
        let shown = match c {
            SetCount::Finite(n) => n.to_string(),
            SetCount::Infinite => "inf".to_string(),
        };
        text.push_str(&format!("stage {i} size: {shown}\n"));
    }
    let records = vec![json!({
        "record": "rank",
        "sp_rank": m.sp_rank(),
        "scattered": m.is_sp_scattered(),
        "stage_sizes": counts.iter().map(count_value).collect::<Vec<_>>(),
    })];
    Ok((Report { text, records }, 0))
}

fn cmd_decompose(model: &Path, ideal: &Path) -> Result<(Report, u8), CmdFail> {
    let m = parse_model_file(model)?;
    let nu = parse_ideal_file(ideal)?;
    let t = unglue(&m, &nu).map_err(group_fail)?;
    let glued = glue(&m, &t).map_err(group_fail)?;
    let roundtrip = glued.equal(&nu).map_err(ideal_fail)?;
    let token = CancelToken::new();
    let total = subgroup_basis(t.components(), &token).map_err(group_fail)?.rank;
    let mut text = format!("strata: {}\nroundtrip: {roundtrip}\ntotal rank: {total}\n", t.components().len());
    let mut comps = Vec::new();
    for (i, c) in t.components().iter().enumerate() {
        let rank = subgroup_basis(std::slice::from_ref(c), &token)
            .map_err(group_fail)?
            .rank;
        text.push_str(&format!("stratum {i} (rank {rank}): {}\n", render_map(c)));
        comps.push(json!({
            "stage": i,
            "rank": rank,
            "map": IdealRec::from_map(c),
        }));
    }
    let records = vec![json!({
        "record": "decomposition",
        "roundtrip": roundtrip,
        "total_rank": total,
        "components": comps,
    })];
    Ok((Report { text, records }, 0))
}

fn cmd_member(candidate: &Path, gens: &[PathBuf]) -> Result<(Report, u8), CmdFail> {
    let h = parse_ideal_file(candidate)?;
    let family = gens
        .iter()
        .map(|p| parse_ideal_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    let token = CancelToken::new();
    let m = subgroup_member(&family, &h, &token).map_err(group_fail)?;
    let mut text = format!("member: {}\n", m.member);
    if let Some(cert) = &m.certificate {
        text.push_str(&format!("certificate: {cert:?}\n"));
    }
    let records = vec![json!({
        "record": "membership",
        "member": m.member,
        "certificate": m.certificate,
    })];
    Ok((Report { text, records }, 0))
}

fn cmd_sigma_r(model: &Path, gens: &[PathBuf]) -> Result<(Report, u8), CmdFail> {
    let m = parse_model_file(model)?;
    let family = gens
        .iter()
        .map(|p| parse_ideal_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    let token = CancelToken::new();
    let rep = sigma_r_report(&m, &family, &token).map_err(group_fail)?;
    let mut text = format!(
        "total rank: {}\nkernel rank: {}\nimage rank: {}\nadditive: {}\ntorsion free: {}\ndivisors: {:?}\n",
        rep.total_rank, rep.kernel_rank, rep.image_rank, rep.additive, rep.torsion_free, rep.quotient_divisors,
    );
    let achievable = match &rep.achievable {
        None => {
            text.push_str("first stage: infinite\n");
            Value::Null
        }
        Some(a) => {
            text.push_str(&format!(
                "achievable rank: {} ({})\n",
                a.rank,
                if a.achieved { "attained by witnesses" } else { "not attained" },
            ));
            for (p, wmap) in &a.witnesses {
                text.push_str(&format!("  extension at {p}: {}\n", render_map(wmap)));
            }
            json!({
                "rank": a.rank,
                "achieved": a.achieved,
                "witnesses": a.witnesses.iter().map(|(p, wmap)| json!({
                    "point": p.to_string(),
                    "map": IdealRec::from_map(wmap),
                })).collect::<Vec<_>>(),
            })
        }
    };
    let records = vec![json!({
        "record": "sigma-r",
        "total_rank": rep.total_rank,
        "kernel_rank": rep.kernel_rank,
        "image_rank": rep.image_rank,
        "additive": rep.additive,
        "torsion_free": rep.torsion_free,
        "divisors": rep.quotient_divisors,
        "stage_size": count_value(&rep.stage_count),
        "achievable": achievable,
    })];
    Ok((Report { text, records }, 0))
}

fn colength_fail(e: maxspec::ColengthError) -> CmdFail {
    CmdFail::validation(e.to_string())
}

fn cmd_colength(model: &Path, ideal: &Path, stage: Option<usize>) -> Result<(Report, u8), CmdFail> {
    let cm = parse_colength_file(model)?;
    let nu = parse_ideal_file(ideal)?;
    let tau = colength(&cm, &nu).map_err(colength_fail)?;
    let mut text = format!("colength: {tau}\n");
    let mut rec = json!({
        "record": "colength",
        "value": tau.to_string(),
    });
    if let Some(i) = stage {
        let m = DomainModel::sharp(cm.space());
        let stage_tau = colength_stage(&cm, &m, i, &nu).map_err(colength_fail)?;
        text.push_str(&format!("stage {i} colength: {stage_tau}\n"));
        rec["stage"] = json!(i);
        rec["stage_value"] = json!(stage_tau.to_string());
    }
    Ok((Report { text, records: vec![rec] }, 0))
}

fn cmd_suite(name: &str, seed: u64, count: u64) -> Result<(Report, u8), CmdFail> {
    let rep = run_suite(name, seed, count).map_err(|e| CmdFail::parse(e.to_string()))?;
    let mut text = format!(
        "suite {}: {} cases, {} failures (seed {})\n",
        rep.suite,
        rep.cases,
        rep.failures.len(),
        rep.seed,
    );
    for f in &rep.failures {
        text.push_str(&format!("  case {}: {}\n", f.case, f.witness));
    }
    let code = if rep.passed() { 0 } else { 4 };
    let mut rec = serde_json::to_value(&rep).expect("report serializes");
    rec["record"] = json!("suite");
    Ok((Report { text, records: vec![rec] }, code))
}

fn cmd_demo(seed: u64, count: u64) -> Result<(Report, u8), CmdFail> {
    let space = Space::interval(Ordinal::omega());
    let m = DomainModel::sharp(&space);
    let ex = order_mismatch_demo(&m, seed, count as usize).map_err(group_fail)?;
    let ok = !ex.t1_le_t2 && !ex.t2_le_t1 && !ex.glue_dominates && ex.verified == ex.trials;
    let mut text = String::new();
    for (label, t) in [("t1", &ex.t1), ("t2", &ex.t2)] {
        for (i, c) in t.components().iter().enumerate() {
            text.push_str(&format!("{label} stratum {i}: {}\n", render_map(c)));
        }
    }
    text.push_str(&format!(
        "t1 <= t2: {}\nt2 <= t1: {}\nglued comparable: {}\ndomination verified: {} of {}\n",
        ex.t1_le_t2, ex.t2_le_t1, ex.glue_dominates, ex.verified, ex.trials,
    ));
    for w in ex.witnesses.iter().take(5) {
        text.push_str(&format!("  witness: {w}\n"));
    }
    let records = vec![json!({
        "record": "order-mismatch",
        "t1": ex.t1.components().iter().map(IdealRec::from_map).collect::<Vec<_>>(),
        "t2": ex.t2.components().iter().map(IdealRec::from_map).collect::<Vec<_>>(),
        "t1_le_t2": ex.t1_le_t2,
        "t2_le_t1": ex.t2_le_t1,
        "glue_dominates": ex.glue_dominates,
        "trials": ex.trials,
        "verified": ex.verified,
        "witnesses": ex.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })];
    Ok((Report { text, records }, if ok { 0 } else { 4 }))
}

fn run(cli: &Cli) -> Result<(Report, u8), CmdFail> {
    match &cli.command {
        Command::Factor { ideal } => cmd_factor(ideal),
        Command::Model { space, sharp, sp, chain } => {
            cmd_model(space.as_deref(), *sharp, *sp, chain.as_deref())
        }
        Command::Rank { model } => cmd_rank(model),
        Command::Decompose { model, ideal } => cmd_decompose(model, ideal),
        Command::Member { candidate, gens } => cmd_member(candidate, gens),
        Command::SigmaR { model, gens } => cmd_sigma_r(model, gens),
        Command::Colength { model, ideal, stage } => cmd_colength(model, ideal, *stage),
        Command::Suite { name, seed, count } => cmd_suite(name, *seed, *count),
        Command::DemoOrderMismatch { seed, count } => cmd_demo(*seed, *count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, code)) => {
            match cli.format {
                Format::Text => print!("{}", report.text),
                Format::Machine => {
                    for rec in &report.records {
                        println!("{}", serde_json::to_string(rec).expect("record serializes"));
                    }
                }
            }
            ExitCode::from(code)
        }
        Err(fail) => {
            match cli.format {
                Format::Text => {
                    eprintln!("error ({}): {}", fail.kind, fail.message);
                    if let Some(w) = &fail.witness {
                        eprintln!("witness: {w}");
                    }
                }
                Format::Machine => {
                    let mut rec = json!({
                        "record": "error",
                        "kind": fail.kind,
                        "message": fail.message,
                    });
                    if let Some(w) = fail.witness {
                        rec["witness"] = w;
                    }
                    println!("{}", serde_json::to_string(&rec).expect("record serializes"));
                }
            }
            ExitCode::from(fail.code)
        }
    }
}
