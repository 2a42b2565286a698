//! The `erpsel` command line. Kept in the library so tests can drive it
//! without spawning processes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::demo::{demo_project, mixed_project};
use crate::macbeth::check_consistency;
use crate::model::{CandidateId, MatrixId};
use crate::project::{
    cached_plan, cached_ranking, cached_scale, cached_weights, gap_table, load_path, parse_project, plan_for,
    ranking, save_path, screening, validate_project, PipelineError, PlanRecord, ProjectFile, Stage, StoreError,
};
use crate::scoring::RankedResult;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "erpsel", version, about = "ERP package selection: gap analysis, adaptation planning and MACBETH scoring")]
pub struct Cli {
    /// Project file.
    #[arg(long, short, global = true, default_value = "project.json")]
    pub project: PathBuf,
    /// Print results as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Md,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project file.
    New {
        /// Start from the worked three-package example.
        #[arg(long)]
        demo: bool,
        /// With --demo: measure coverage and risk from adaptation plans.
        #[arg(long, requires = "demo")]
        measured: bool,
        #[arg(long)]
        name: Option<String>,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Check every project invariant.
    Validate,
    /// Apply the screening criteria.
    Screen,
    /// Classify every requirement for every screened candidate.
    Gap,
    /// Solve the adaptation plan of one candidate.
    Optimize {
        #[arg(long)]
        candidate: String,
        /// Use this budget instead of the stored one (not saved).
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Check a judgment matrix for consistency.
    Consistency {
        #[arg(long)]
        matrix: String,
    },
    /// Derive the value scale of a judgment matrix.
    Scale {
        #[arg(long)]
        matrix: String,
    },
    /// Derive criteria weights.
    Weights,
    /// Rank the screened candidates.
    Rank {
        /// Use this adaptation budget for every candidate (not saved).
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Compare the stored ranking with one under a different budget.
    Whatif {
        #[arg(long)]
        budget: f64,
    },
    /// Summary report.
    Report {
        #[arg(long, value_enum, default_value = "md")]
        format: ReportFormat,
    },
    /// Show the current stage or move to another.
    Stage {
        #[arg(long)]
        to: Option<Stage>,
    },
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok(Output { text, code }) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

struct Output {
    text: String,
    code: i32,
}

struct Failure {
    message: String,
    code: i32,
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let message = match &e {
            StoreError::Invalid(v) => {
                let mut m = String::from("project is invalid:");
                for x in v {
                    let _ = write!(m, "\n  {x}");
                }
                m
            }
            _ => e.to_string(),
        };
        Failure { message, code: EXIT_INVALID }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match e {
            PipelineError::Inconsistent { .. } => EXIT_INCONSISTENT,
            _ => EXIT_INVALID,
        };
        Failure { message: e.to_string(), code }
    }
}

fn ok(text: String) -> Result<Output, Failure> {
    Ok(Output { text, code: EXIT_OK })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Saves only when the command changed something.
fn write_back(path: &Path, before: &ProjectFile, after: &ProjectFile) -> Result<(), Failure> {
    if before != after {
        save_path(after, path)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let path = cli.project.as_path();
    match &cli.command {
        Command::New { demo, measured, name, force } => {
            if path.exists() && !force {
                return Err(Failure {
                    message: format!("{} already exists (use --force to overwrite)", path.display()),
                    code: EXIT_INVALID,
                });
            }
            let mut p = match (demo, measured) {
                (true, true) => mixed_project(),
                (true, false) => demo_project(),
                _ => ProjectFile::new(),
            };
            if let Some(n) = name {
                p.name = n.clone();
            }
            save_path(&p, path)?;
            ok(format!("created {}\n", path.display()))
        }
        Command::Validate => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| StoreError::Io { path: path.into(), source })?;
            let p = parse_project(&text)?;
            let violations = validate_project(&p);
            let text = if cli.json {
                json(&violations)
            } else if violations.is_empty() {
                "valid\n".to_owned()
            } else {
                violations.iter().map(|v| format!("{v}\n")).collect()
            };
            let code = if violations.is_empty() { EXIT_OK } else { EXIT_INVALID };
            Ok(Output { text, code })
        }
        Command::Stage { to } => {
            let mut p = load_path(path)?;
            let before = p.clone();
            if let Some(to) = to {
                p.move_to(*to)?;
            }
            write_back(path, &before, &p)?;
            ok(if cli.json { json(&serde_json::json!({ "stage": p.stage })) } else { format!("{}\n", p.stage) })
        }
        Command::Screen => {
            let p = load_path(path)?;
            let s = screening(&p);
            if cli.json {
                let survivors: Vec<_> = s.survivors.iter().map(|c| &c.id).collect();
                return ok(json(&serde_json::json!({ "survivors": survivors, "exclusions": s.exclusions })));
            }
            let mut t = String::new();
            for c in &s.survivors {
                let _ = writeln!(t, "pass    {}", c.id);
            }
            for (id, why) in &s.exclusions {
                let why: Vec<_> = why.iter().map(|w| w.to_string()).collect();
                let _ = writeln!(t, "exclude {id}: {}", why.join(", "));
            }
            ok(t)
        }
        Command::Gap => {
            let p = load_path(path)?;
            let rows = gap_table(&p)?;
            if cli.json {
                return ok(json(&rows));
            }
            let mut t = String::new();
            for r in rows {
                let _ = writeln!(t, "{}\t{}\t{:.4}\t{}", r.candidate, r.requirement, r.satisfaction, r.pattern);
            }
            ok(t)
        }
        Command::Optimize { candidate, budget } => {
            let mut p = load_path(path)?;
            let before = p.clone();
            let id = CandidateId::new(candidate.as_str());
            let record = match budget {
                Some(b) => plan_for(&p, &id, Some(*b))?,
                None => cached_plan(&mut p, &id)?,
            };
            write_back(path, &before, &p)?;
            ok(if cli.json { json(&record) } else { plan_text(&p, &id, &record) })
        }
        Command::Consistency { matrix } => {
            let p = load_path(path)?;
            let id = MatrixId::new(matrix.as_str());
            let m = p.matrices.get(&id).ok_or_else(|| PipelineError::NotFound { kind: "matrix", id: matrix.clone() })?;
            let report = check_consistency(m).map_err(|source| PipelineError::Macbeth { matrix: id, source })?;
            let text = if cli.json {
                json(&report)
            } else if report.consistent {
                "consistent\n".to_owned()
            } else {
                let refs: Vec<_> = report.conflicts.iter().map(|r| r.to_string()).collect();
                format!("inconsistent; revise {}\n", refs.join(", "))
            };
            Ok(Output { text, code: if report.consistent { EXIT_OK } else { EXIT_INCONSISTENT } })
        }
        Command::Scale { matrix } => {
            let mut p = load_path(path)?;
            let before = p.clone();
            let scale = cached_scale(&mut p, &MatrixId::new(matrix.as_str()))?;
            write_back(path, &before, &p)?;
            if cli.json {
                return ok(json(&scale));
            }
            let mut t = String::new();
            for e in &scale.entries {
                let _ = writeln!(t, "{}\t{:.4}\t{:.4}", e.element, e.value, e.raw);
            }
            ok(t)
        }
        Command::Weights => {
            let mut p = load_path(path)?;
            let before = p.clone();
            let w = cached_weights(&mut p)?;
            write_back(path, &before, &p)?;
            if cli.json {
                return ok(json(&w));
            }
            ok(w.iter().map(|(c, x)| format!("{c}\t{x:.4}\n")).collect())
        }
        Command::Rank { budget } => {
            let mut p = load_path(path)?;
            let before = p.clone();
            let r = match budget {
                Some(b) => ranking(&p, Some(*b))?,
                None => cached_ranking(&mut p)?,
            };
            write_back(path, &before, &p)?;
            ok(if cli.json { json(&r) } else { ranking_text(&r) })
        }
        Command::Whatif { budget } => {
            let p = load_path(path)?;
            let base = ranking(&p, None)?;
            let alt = ranking(&p, Some(*budget))?;
            if cli.json {
                return ok(json(&serde_json::json!({ "baseline": base, "budget": budget, "alternative": alt })));
            }
            let mut t = String::new();
            let _ = writeln!(t, "candidate\tstored\tbudget {budget}");
            for e in &base.entries {
                let other = alt.entries.iter().find(|x| x.candidate == e.candidate).map(|x| x.overall);
                let _ = writeln!(t, "{}\t{:.4}\t{:.4}", e.candidate, e.overall, other.unwrap_or(f64::NAN));
            }
            let _ = writeln!(t, "order\t{}\t{}", base.order().join(" > "), alt.order().join(" > "));
            ok(t)
        }
        Command::Report { format } => {
            let p = load_path(path)?;
            ok(match format {
                ReportFormat::Md => markdown_report(&p),
                ReportFormat::Csv => csv_report(&p)?,
            })
        }
    }
}

fn plan_text(p: &ProjectFile, id: &CandidateId, r: &PlanRecord) -> String {
    let mut t = String::new();
    let inst = p.adaptation.get(id);
    for (j, c) in r.plan.chosen.iter().enumerate() {
        let what = match (c.strategy, inst) {
            (Some(k), Some(inst)) => {
                let s = &inst.mismatches[j].strategies[k];
                let label = if s.label.is_empty() { format!("{:?}", s.tailoring) } else { s.label.clone() };
                format!("strategy {k} ({label})")
            }
            (Some(k), None) => format!("strategy {k}"),
            (None, _) => "leave as is".to_owned(),
        };
        let _ = writeln!(t, "{}\t{what}", c.requirement);
    }
    let q = &r.performance;
    let _ = writeln!(t, "objective\t{:.6}", r.plan.objective);
    let _ = writeln!(t, "cost\t{:.2}", r.plan.total_cost);
    let _ = writeln!(t, "functional_coverage\t{:.4}", q.functional_coverage);
    let _ = writeln!(t, "adaptation_risk\t{:.4}", q.adaptation_risk);
    let _ = writeln!(t, "adaptation_cost\t{:.2}", q.adaptation_cost);
    let _ = writeln!(t, "adaptation_degree\t{:.4}", q.adaptation_degree);
    t
}

fn ranking_text(r: &RankedResult) -> String {
    let mut t = String::new();
    for (i, e) in r.entries.iter().enumerate() {
        let parts: Vec<_> = e.breakdown.iter().map(|(c, v)| format!("{c}={:.4}", v.value)).collect();
        let _ = writeln!(t, "{}\t{}\t{:.4}\t{}", i + 1, e.candidate, e.overall, parts.join(" "));
    }
    t
}

fn markdown_report(p: &ProjectFile) -> String {
    let mut t = String::new();
    let title = if p.name.is_empty() { "ERP selection" } else { &p.name };
    let _ = writeln!(t, "# {title}\n\nStage: {}\n", p.stage);

    let _ = writeln!(t, "## Requirements\n\n| id | label | area | weight |\n|---|---|---|---|");
    for r in p.requirements.iter() {
        let _ = writeln!(t, "| {} | {} | {} | {:.4} |", r.id, r.label, r.functional_area, r.weight);
    }

    let s = screening(p);
    let _ = writeln!(t, "\n## Screening\n");
    for c in &s.survivors {
        let _ = writeln!(t, "- {} ({}): pass", c.id, c.name);
    }
    for (id, why) in &s.exclusions {
        let why: Vec<_> = why.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(t, "- {id}: excluded by {}", why.join(", "));
    }

    let _ = writeln!(t, "\n## Gap analysis\n");
    match gap_table(p) {
        Ok(rows) => {
            let _ = writeln!(t, "| candidate | requirement | satisfaction | pattern |\n|---|---|---|---|");
            for r in rows {
                let _ = writeln!(t, "| {} | {} | {:.2} | {} |", r.candidate, r.requirement, r.satisfaction, r.pattern);
            }
            for c in &s.survivors {
                for x in &c.extensions {
                    let _ = writeln!(t, "\n{} extends: {} ({:?})", c.id, x.feature, x.impact);
                }
            }
        }
        Err(e) => {
            let _ = writeln!(t, "Not available: {e}");
        }
    }

    let _ = writeln!(t, "\n## Adaptation plans\n");
    for c in &s.survivors {
        match plan_for(p, &c.id, None) {
            Ok(r) => {
                let q = r.performance;
                let _ = writeln!(
                    t,
                    "- {}: objective {:.4}, cost {:.2}, coverage {:.4}, risk {:.4}, degree {:.4}",
                    c.id, r.plan.objective, r.plan.total_cost, q.functional_coverage, q.adaptation_risk, q.adaptation_degree
                );
            }
            Err(e) => {
                let _ = writeln!(t, "- {}: not available: {e}", c.id);
            }
        }
    }

    let _ = writeln!(t, "\n## Ranking\n");
    match ranking(p, None) {
        Ok(r) => {
            let crits: Vec<_> = r.weights.iter().map(|(c, w)| format!("{c} ({w:.4})")).collect();
            let _ = writeln!(t, "| rank | candidate | overall | {} |", crits.join(" | "));
            let _ = writeln!(t, "|---|---|---|{}", "---|".repeat(crits.len()));
            for (i, e) in r.entries.iter().enumerate() {
                let vals: Vec<_> = r.weights.iter().map(|(c, _)| format!("{:.2}", e.breakdown[c].value)).collect();
                let _ = writeln!(t, "| {} | {} | {:.4} | {} |", i + 1, e.candidate, e.overall, vals.join(" | "));
            }
        }
        Err(e) => {
            let _ = writeln!(t, "Not available: {e}");
        }
    }
    t
}

fn csv_report(p: &ProjectFile) -> Result<String, Failure> {
    let r = ranking(p, None)?;
    let mut t = String::from("rank,candidate,overall");
    for (c, _) in r.weights.iter() {
        let _ = write!(t, ",{c}");
    }
    t.push('\n');
    for (i, e) in r.entries.iter().enumerate() {
        let _ = write!(t, "{},{},{:.6}", i + 1, e.candidate, e.overall);
        for (c, _) in r.weights.iter() {
            let _ = write!(t, ",{:.6}", e.breakdown[c].value);
        }
        t.push('\n');
    }
    Ok(t)
}
