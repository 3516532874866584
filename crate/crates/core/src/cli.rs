//! `qrac` command-line frontend.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{
    asym_closed_form_n2, asym_optimize, symmetric_bound, werner_fidelity, AsymSpec, BoundResult, CloningParams,
    DEFAULT_RESTARTS,
};
use crate::codes::{builtin_table, generate_single_distance, search_tables, EncodingTable, Objective};
use crate::error::{QracError, Result};
use crate::qracse::{run_protocol, trivial_strategy, Credit, ProtocolReport, QracTask, TruthTable, Variant};
use crate::reproduce::{self, render_json, CriterionReport};
use crate::teleport::constrained_teleport_fidelity;

/// Environment variable holding the default `reproduce-all` output directory.
pub const OUT_DIR_ENV: &str = "QRAC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "qrac", version, about = "Entanglement-assisted random access codes and teleportation bounds")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Output file (a directory for reproduce-all).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Teleportation fidelity when Alice's measurement has only k outcomes.
    Teleport {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
    },
    /// QRAC-SE success probabilities next to the trivial strategy.
    Qracse(QracseArgs),
    /// Monogamy upper bounds.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Search single-distance tables for the best protocol score.
    Search {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::PMin)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute every published number and write one report per check group.
    ReproduceAll {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct QracseArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::TwoStrings)]
    pub variant: VariantArg,
    /// `builtin`, `generated`, or a JSON file holding a list of digit pairs.
    #[arg(long, default_value = "builtin")]
    pub table: String,
    /// Eight comma-separated 0/1 values, indexed by 4*x0 + 2*x1 + x2 (variant f).
    #[arg(long, value_delimiter = ',')]
    pub truth_table: Option<Vec<u8>>,
    #[arg(long, value_enum, default_value_t = CreditArg::PairOutcome)]
    pub credit: CreditArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    TwoStrings,
    Pairs,
    Single,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CreditArg {
    PairOutcome,
    Marginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    PMin,
    PAvg,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// (N + d − 1)/(dN).
    Symmetric {
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
    },
    /// Optimizer and (for two receivers) closed form for unequal probabilities.
    Asym {
        #[arg(long)]
        d: usize,
        #[arg(long, num_args = 1.., required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Optimal N1 → N2 cloning fidelity.
    Werner {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        d: usize,
    },
}

/// Rendered command output.
pub struct Output {
    pub json: Value,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    pub table: String,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(&self.json)? + "\n",
            Format::Table => self.table.clone(),
            Format::Csv => {
                let mut wr = csv::Writer::from_writer(Vec::new());
                wr.write_record(&self.csv_header)?;
                for row in &self.csv_rows {
                    wr.write_record(row)?;
                }
                String::from_utf8(wr.into_inner().map_err(|e| QracError::Io(e.into_error()))?)
                    .expect("csv output is utf-8")
            }
        })
    }
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn cmd_teleport(d: usize, k: usize) -> Result<Output> {
    let r = constrained_teleport_fidelity(d, k)?;
    let f = r.entanglement_fidelity_f.unwrap_or(f64::NAN);
    let t = r.transmission_fidelity_f.unwrap_or(f64::NAN);
    let exact = r.exact.clone().unwrap_or_default();
    let table = format!(
        "constrained teleportation d={d} k={k}\n  F exact      {exact}\n  F simulated  {}\n  f            {}\n",
        fmt6(f),
        fmt6(t)
    );
    Ok(Output {
        json: serde_json::to_value(&r)?,
        csv_header: header(&["d", "k", "F_exact", "F_simulated", "f"]),
        csv_rows: vec![vec![d.to_string(), k.to_string(), exact, f.to_string(), t.to_string()]],
        table,
    })
}

fn load_table(d: usize, source: &str) -> Result<EncodingTable> {
    match source {
        "builtin" => builtin_table(d),
        "generated" => generate_single_distance(d),
        path => {
            let text = fs::read_to_string(path)?;
            let t: EncodingTable = serde_json::from_str(&text)?;
            if t.d() != d {
                return Err(QracError::Shape(format!("table in {path} is for d = {}, not {d}", t.d())));
            }
            Ok(t)
        }
    }
}

pub fn cmd_qracse(args: &QracseArgs) -> Result<Output> {
    let d = args.d;
    let variant = match args.variant {
        VariantArg::TwoStrings => Variant::TwoStrings,
        VariantArg::Pairs => Variant::FourDitsPairs,
        VariantArg::Single => Variant::FourDitsSingle,
        VariantArg::F => {
            let entries = args
                .truth_table
                .as_ref()
                .ok_or_else(|| QracError::InvalidArgument("variant f needs --truth-table".into()))?;
            Variant::BooleanF(TruthTable::new(entries)?)
        }
    };
    let credit = match args.credit {
        CreditArg::PairOutcome => Credit::PairOutcome,
        CreditArg::Marginal => Credit::Marginal,
    };
    let table = if d <= 4 || args.table != "builtin" {
        load_table(d, &args.table)?
    } else {
        generate_single_distance(d)?
    };
    let task = QracTask::new(d, table, variant)?;
    let report = match (variant, credit) {
        (Variant::TwoStrings, _) | (_, Credit::PairOutcome) => run_protocol(&task)?,
        (Variant::BooleanF(tt), Credit::Marginal) => crate::qracse::f_qracse_with_credit(tt, credit)?,
        (_, Credit::Marginal) => {
            let (pairs, single) = crate::qracse::run_four_bit_variants(credit)?;
            if variant == Variant::FourDitsPairs { pairs } else { single }
        }
    };
    let trivial = trivial_strategy(d, variant)?;
    Ok(qracse_output(&report, &trivial))
}

fn qracse_output(report: &ProtocolReport, trivial: &ProtocolReport) -> Output {
    let mut table = format!("{}\n", report.label);
    table.push_str("  P_min     trivial P_min  P_avg     trivial P_avg\n");
    table.push_str(&format!(
        "  {}  {}       {}  {}\n",
        fmt6(report.p_min),
        fmt6(trivial.p_min),
        fmt6(report.p_avg),
        fmt6(trivial.p_avg)
    ));
    for (c, p) in &report.per_choice {
        table.push_str(&format!("  {c:<6} {}\n", fmt6(*p)));
    }
    let mut rows = Vec::new();
    for (c, m) in &report.per_string {
        for (s, p) in m {
            rows.push(vec![c.clone(), s.clone(), p.to_string()]);
        }
    }
    let json = json!({
        "report": report,
        "trivial": trivial,
        "row": { "p_min": report.p_min, "trivial_p_min": trivial.p_min, "p_avg": report.p_avg, "trivial_p_avg": trivial.p_avg },
    });
    Output { json, csv_header: header(&["choice", "string", "probability"]), csv_rows: rows, table }
}

fn bound_output(results: Vec<BoundResult>, title: &str) -> Output {
    let mut table = format!("{title}\n");
    let mut rows = Vec::new();
    for r in &results {
        let exact = match (r.numerator, r.denominator) {
            (Some(n), Some(d)) if d == 1 => n.to_string(),
            (Some(n), Some(d)) => format!("{n}/{d}"),
            _ => String::new(),
        };
        table.push_str(&format!("  {:<28} {}  {}\n", r.name, fmt6(r.value), exact));
        rows.push(vec![r.name.clone(), r.value.to_string(), exact]);
    }
    Output {
        json: serde_json::to_value(&results).expect("bound results serialize"),
        csv_header: header(&["bound", "value", "exact"]),
        csv_rows: rows,
        table,
    }
}

pub fn cmd_bounds(cmd: &BoundsCommand) -> Result<Output> {
    match cmd {
        BoundsCommand::Symmetric { d, n } => {
            let r = BoundResult::exact(format!("symmetric d={d} N={n}"), symmetric_bound(*d, *n)?);
            Ok(bound_output(vec![r], "symmetric bound"))
        }
        BoundsCommand::Werner { n1, n2, d } => {
            let r = BoundResult::exact(
                format!("werner {n1}->{n2} d={d}"),
                werner_fidelity(CloningParams::new(*n1, *n2, *d)?),
            );
            Ok(bound_output(vec![r], "cloning fidelity"))
        }
        BoundsCommand::Asym { d, p, restarts, seed } => {
            let spec = AsymSpec::new(*d, p.clone())?;
            let opt = asym_optimize(&spec, *restarts, *seed)?;
            let mut opt_result = BoundResult::approximate("optimizer", opt.value);
            opt_result.point = Some(opt.point);
            let mut out = vec![opt_result];
            if p.len() == 2 {
                out.push(BoundResult::approximate("closed form", asym_closed_form_n2(p[0], *d)?));
            }
            Ok(bound_output(out, "asymmetric bound"))
        }
    }
}

pub fn cmd_search(d: usize, objective: ObjectiveArg, budget: usize, seed: u64) -> Result<Output> {
    let objective = match objective {
        ObjectiveArg::PMin => Objective::PMin,
        ObjectiveArg::PAvg => Objective::PAvg,
    };
    let r = search_tables(d, objective, budget, seed)?;
    let pairs: Vec<String> = r.table.pairs().iter().map(|p| format!("{}{}", p[0], p[1])).collect();
    let table = format!(
        "table search d={d}\n  score  {}\n  evaluations  {}\n  table  {}\n",
        fmt6(r.score),
        r.evaluations,
        pairs.join(" ")
    );
    let rows = r.table.pairs().iter().enumerate().map(|(e, p)| vec![e.to_string(), p[0].to_string(), p[1].to_string()]).collect();
    Ok(Output { json: serde_json::to_value(&r)?, csv_header: header(&["index", "first", "second"]), csv_rows: rows, table })
}

/// Writes every criterion report plus `summary.json`/`summary.csv` into `dir`;
/// returns whether all hard checks passed.
pub fn cmd_reproduce_all(seed: u64, dir: &Path) -> Result<(bool, String)> {
    fs::create_dir_all(dir)?;
    let mut reports = reproduce::numeric_criteria(seed)?;
    let determinism = reproduce::criterion_11(seed, &reports)?;
    reports.push(determinism);
    for r in &reports {
        fs::write(dir.join(format!("criterion_{:02}.json", r.criterion)), render_json(r)?)?;
        r.write_csv(fs::File::create(dir.join(format!("criterion_{:02}.csv", r.criterion)))?)?;
    }
    let summary = reproduce::summarize(seed, &reports)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    let mut wr = csv::Writer::from_writer(fs::File::create(dir.join("summary.csv"))?);
    wr.write_record(["criterion", "title", "passed", "hard_checks", "hard_failures", "flagged"])?;
    for (id, c) in &summary.criteria {
        wr.write_record([
            id.to_string(),
            c.title.clone(),
            c.passed.to_string(),
            c.hard_checks.to_string(),
            c.hard_failures.to_string(),
            c.flagged.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok((summary.passed, summary_table(&reports, &summary)))
}

fn summary_table(reports: &[CriterionReport], summary: &reproduce::Summary) -> String {
    let mut s = String::new();
    for r in reports {
        let flag = match r.flagged() {
            0 => String::new(),
            n => format!("  ({n} {})", reproduce::DISCREPANCY),
        };
        s.push_str(&format!("{:>2} {:<4} {}{flag}\n", r.criterion, if r.passed { "PASS" } else { "FAIL" }, r.title));
    }
    s.push_str("\nd  P_min     trivial   P_avg     trivial\n");
    for row in &summary.table4 {
        s.push_str(&format!(
            "{}  {}  {}  {}  {}\n",
            row.d,
            fmt6(row.p_min),
            fmt6(row.trivial_p_min),
            fmt6(row.p_avg),
            fmt6(row.trivial_p_avg)
        ));
    }
    s.push_str(&format!("\ncomposite F  {}\n", fmt6(summary.composite_fidelity)));
    s
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs a parsed command line; `Ok(false)` means a hard check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let output = match &cli.command {
        Command::Teleport { d, k } => cmd_teleport(*d, *k)?,
        Command::Qracse(args) => cmd_qracse(args)?,
        Command::Bounds(b) => cmd_bounds(b)?,
        Command::Search { d, objective, budget, seed } => cmd_search(*d, *objective, *budget, *seed)?,
        Command::ReproduceAll { seed } => {
            let dir = cli
                .out
                .clone()
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("qrac-out"));
            let (passed, table) = cmd_reproduce_all(*seed, &dir)?;
            let text = match cli.format {
                Format::Table => table,
                Format::Json => fs::read_to_string(dir.join("summary.json"))?,
                Format::Csv => fs::read_to_string(dir.join("summary.csv"))?,
            };
            emit(&text, None)?;
            return Ok(passed);
        }
    };
    emit(&output.render(cli.format)?, cli.out.as_deref())?;
    Ok(true)
}
