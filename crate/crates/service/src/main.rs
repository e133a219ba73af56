use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use techdoc_core::emit::Format;
use techdoc_core::kb::Kb;
use techdoc_core::pipeline::{generate, parse_languages, GenerationRequest, Mode, PipelineError};
use techdoc_core::plan::{applicable_plans, has_errors, validate_plan, Severity};
use techdoc_core::realize::lexicon::coverage_report;
use techdoc_core::realize::Resources;
use techdoc_core::simulate::simulate;
use techdoc_service::api::{router, AppState};
use techdoc_service::load::{assets_dir, load_kb, read_tells, FIXTURES_ENV};

#[derive(Parser)]
#[command(name = "techdoc", version, about = "Multilingual maintenance instructions from a knowledge base")]
struct Cli {
    /// Directory holding middle-model.json and the domain files (default: bundled fixtures).
    #[arg(long, global = true, env = FIXTURES_ENV)]
    fixtures: Option<PathBuf>,
    /// Domain models to load on top of the middle model.
    #[arg(long, global = true, value_delimiter = ',', default_value = "car")]
    domain: Vec<String>,
    /// JSON list of assertions to tell before running (a recorded device state).
    #[arg(long, global = true)]
    tell: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate documents for a plan, one file per language.
    Generate {
        #[arg(long)]
        plan: String,
        #[arg(long, default_value = "en,de,fr")]
        lang: String,
        #[arg(long, default_value = "plain")]
        format: Format,
        #[arg(long, default_value = "static")]
        mode: Mode,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Simulate a plan on a copy of the knowledge base and print the trace as JSON.
    Simulate {
        #[arg(long)]
        plan: String,
    },
    /// Check every plan and the lexicon's coverage of the knowledge base.
    Validate,
    /// List plans, optionally only those applicable to a device.
    ListPlans {
        #[arg(long)]
        device: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory where POST /save writes session workspaces.
        #[arg(long)]
        workspace: Option<PathBuf>,
    },
}

/// Exit code 2 marks an unknown plan; everything else failing exits with 1.
struct Failure {
    code: u8,
    message: String,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn unknown_plan(plan: &str) -> Failure {
    Failure { code: 2, message: format!("unknown plan `{plan}`") }
}

fn check_plan(kb: &Kb, plan: &str) -> Result<(), Failure> {
    kb.plan(plan).map(|_| ()).map_err(|_| unknown_plan(plan))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut kb = load_kb(cli.fixtures.as_deref(), &cli.domain)?;
    if let Some(path) = &cli.tell {
        kb.tell_all(&read_tells(path)?)?;
    }
    let resources = Resources::bundled();
    match cli.command {
        Command::Generate { plan, lang, format, mode, out } => {
            check_plan(&kb, &plan)?;
            let languages = parse_languages(&lang)?;
            let g = generate(&kb, GenerationRequest { plan: &plan, languages: &languages, mode }, resources)
                .map_err(|e| match e {
                    PipelineError::UnknownPlan(p) => unknown_plan(&p),
                    other => other.into(),
                })?;
            std::fs::create_dir_all(&out)?;
            for l in &languages {
                let doc = g.emit(*l, format).expect("requested language was generated");
                let path = out.join(format!("{plan}.{}.{}", l.code(), format.extension()));
                std::fs::write(&path, doc.body)?;
                println!("{}", path.display());
            }
        }
        Command::Simulate { plan } => {
            check_plan(&kb, &plan)?;
            let trace = simulate(&plan, &kb)?;
            println!("{}", serde_json::to_string_pretty(&trace)?);
        }
        Command::Validate => {
            let mut failed = false;
            for plan in kb.plans() {
                for d in validate_plan(&kb, &plan.id) {
                    let level = match d.severity {
                        Severity::Error => "error",
                        Severity::Warning => "warning",
                    };
                    eprintln!("{level}[{}] {}: {}", d.code, d.at.as_deref().unwrap_or(&plan.id), d.message);
                }
                failed |= has_errors(&validate_plan(&kb, &plan.id));
            }
            let plans: Vec<_> = kb.plans().collect();
            for gap in coverage_report(&resources.lexicon, &kb, &plans) {
                let missing: Vec<&str> = gap.missing.iter().map(|l| l.code()).collect();
                eprintln!("error[lexicon] `{}` has no entry for {}", gap.concept, missing.join(", "));
                failed = true;
            }
            if failed {
                return Err(Failure { code: 1, message: "validation failed".into() });
            }
            println!("ok: {} concepts, {} instances, {} plans", kb.concept_count(), kb.instance_count(), plans.len());
        }
        Command::ListPlans { device } => {
            let ids: Vec<String> = match device {
                Some(d) => applicable_plans(&kb, &d)?,
                None => kb.plans().map(|p| p.id.clone()).collect(),
            };
            for id in ids {
                println!("{id}");
            }
        }
        Command::Serve { addr, workspace } => {
            let mut state = AppState::new(kb, resources);
            if let Some(dir) = workspace {
                std::fs::create_dir_all(&dir)?;
                state = state.with_workspace_dir(dir);
            }
            let app = router(Arc::new(state), assets_dir(cli.fixtures.as_deref()));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app).await
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("techdoc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
