//! `eucgov` command line. Each subcommand parses its arguments, calls one
//! library operation and prints the result; exit status is 0 on success,
//! 1 on a domain or file error and 2 on a usage error.

pub mod interactive;
mod output;

use std::ffi::OsString;
use std::io::BufRead;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::api::{self, ServeOptions};
use crate::inventory::{
    export_csv, import_csv, write_csv, Disposition, EucaFilter, EucaMetadata, EucaRecord, InventoryError, Lifecycle,
    NewRisk, Store,
};
use crate::reporting::{self, Report, ReportError};
use crate::risk::{assess, triage, what_if, AssessmentInput, RatingBand, RiskError, TriageSubmission};
use crate::scanner::{self, ScanError};

#[derive(Debug, Parser)]
#[command(name = "eucgov", version, about = "End-user computing governance toolkit")]
struct Cli {
    /// Inventory store file.
    #[arg(long, global = true, env = "EUC_STORE")]
    store: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// Reference date for reports and default dates (YYYY-MM-DD).
    #[arg(long, global = true)]
    as_of: Option<NaiveDate>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Md => "md",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure complexity indicators of one or more workbooks.
    Scan {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Score an application on the risk cube.
    Assess(AssessArgs),
    /// Score a departmental triage return.
    Triage {
        #[arg(long)]
        input: PathBuf,
    },
    /// Register, list, review and retire applications.
    #[command(subcommand)]
    Inventory(InventoryCommand),
    /// Maintain the risk register.
    #[command(subcommand)]
    Risk(RiskCommand),
    /// Governance KPIs over the store.
    Kpi {
        #[arg(long, value_enum, default_value_t = KpiReport::Snapshot)]
        report: KpiReport,
        /// Departments counted by the concentration report.
        #[arg(long, default_value_t = 7)]
        top_k: usize,
        /// Count retired records too.
        #[arg(long)]
        include_retired: bool,
    },
    /// Compare a workbook against its baseline copy.
    Diff { baseline: PathBuf, current: PathBuf },
    /// Run the local HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Built UI assets to serve at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct AssessArgs {
    /// Answers file (JSON assessment input).
    #[arg(long, required_unless_present = "interactive", conflicts_with = "interactive")]
    input: Option<PathBuf>,
    /// Ask the questions on the terminal.
    #[arg(long)]
    interactive: bool,
    /// Take the complexity grade from scanning this workbook.
    #[arg(long)]
    from_scan: Option<PathBuf>,
    /// Record the assessment against this inventory id.
    #[arg(long, conflicts_with = "toggles")]
    euca: Option<String>,
    /// Save answers under this key as they are given, and offer to
    /// restore them next time.
    #[arg(long, requires = "interactive")]
    draft: Option<String>,
    /// Flip this control answer before scoring (what-if). Repeatable.
    #[arg(long = "toggle", value_name = "FIELD")]
    toggles: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum InventoryCommand {
    /// Create a record, or update one with --id.
    Add(Box<AddArgs>),
    /// List records matching every given filter.
    List {
        #[arg(long)]
        department: Option<String>,
        #[arg(long)]
        band: Option<RatingBand>,
        #[arg(long)]
        lifecycle: Option<Lifecycle>,
        #[arg(long)]
        due_before: Option<NaiveDate>,
    },
    /// Confirm the annual review; the next one falls a year later.
    Review {
        #[arg(long)]
        id: String,
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Mark a record retired.
    Retire {
        #[arg(long)]
        id: String,
        #[arg(long)]
        reason: Option<String>,
    },
    /// Return a retired record to live.
    Revive {
        #[arg(long)]
        id: String,
        #[arg(long)]
        reason: String,
    },
    /// Apply a CSV export back to the store. All rows or none.
    Import {
        #[arg(long)]
        file: PathBuf,
    },
    /// Write the inventory as CSV to --file, or to stdout.
    Export {
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct AddArgs {
    /// Metadata file (JSON); flags override its fields.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    department: Option<String>,
    #[arg(long)]
    manager: Option<String>,
    #[arg(long)]
    team: Option<String>,
    #[arg(long)]
    sme: Option<String>,
    #[arg(long)]
    data_owner: Option<String>,
    #[arg(long)]
    description: Option<String>,
    #[arg(long)]
    app_type: Option<String>,
    #[arg(long)]
    file_location: Option<String>,
    #[arg(long)]
    disposition: Option<Disposition>,
}

#[derive(Debug, Subcommand)]
enum RiskCommand {
    /// Open a register entry against an application.
    Link {
        #[arg(long)]
        euca: String,
        #[arg(long)]
        description: String,
        #[arg(long)]
        inherent_likelihood: u8,
        #[arg(long)]
        inherent_severity: u8,
        #[arg(long)]
        residual_likelihood: u8,
        #[arg(long)]
        residual_severity: u8,
        #[arg(long)]
        opened: Option<NaiveDate>,
    },
    /// Close an open register entry.
    Close {
        #[arg(long)]
        id: String,
        #[arg(long)]
        date: Option<NaiveDate>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KpiReport {
    Snapshot,
    Overdue,
    Unregistered,
    Concentration,
}

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain { code: String, message: String },
}

impl CliError {
    fn domain(code: &str, message: impl std::fmt::Display) -> Self {
        CliError::Domain {
            code: code.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<InventoryError> for CliError {
    fn from(e: InventoryError) -> Self {
        CliError::domain(e.code(), &e)
    }
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        let code = match e {
            RiskError::UnknownField(_) => "UnknownField",
            RiskError::OutOfRange { .. } => "OutOfRange",
            RiskError::MissingField(_) => "MissingField",
        };
        CliError::domain(code, &e)
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::UnsupportedFormat(_) => "UnsupportedFormat",
            ReportError::EmptyStore => "EmptyStore",
            ReportError::ZeroTopK => return CliError::Usage("--top-k must be at least 1".into()),
        };
        CliError::domain(code, &e)
    }
}

fn scan_code(e: &ScanError) -> &'static str {
    match e {
        ScanError::Io { .. } => "Io",
        ScanError::NotAWorkbook => "NotAWorkbook",
        ScanError::EncryptedWorkbook { .. } => "EncryptedWorkbook",
        ScanError::MalformedPart { .. } => "MalformedPart",
    }
}

fn scan_error(path: &Path, e: &ScanError) -> CliError {
    match e {
        ScanError::Io { .. } => CliError::domain("Io", e),
        _ => CliError::domain(scan_code(e), format!("{}: {e}", path.display())),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdin: &'a mut dyn BufRead,
    out: CliOutput,
}

impl Ctx<'_> {
    fn today(&self) -> NaiveDate {
        self.cli.as_of.unwrap_or_else(|| chrono::Local::now().date_naive())
    }

    fn store_path(&self) -> Result<&Path, CliError> {
        self.cli
            .store
            .as_deref()
            .ok_or_else(|| CliError::Usage("--store is required for this command (or set EUC_STORE)".into()))
    }

    fn store(&self) -> Result<Store, CliError> {
        Ok(Store::open(self.store_path()?)?)
    }

    fn format(&self) -> &'static str {
        self.cli.format.as_str()
    }

    fn print(&mut self, text: String) {
        self.out.stdout.push_str(&text);
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::domain("Io", format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read_file(path)?)
        .map_err(|e| CliError::domain("InvalidJson", format!("{}: {e}", path.display())))
}

/// Runs one invocation with stdin attached to `stdin`. `args` includes
/// the program name.
pub fn run_with_stdin<I, T>(args: I, stdin: &mut dyn BufRead) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliOutput {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CliOutput {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let mut ctx = Ctx {
        cli: &cli,
        stdin,
        out: CliOutput::default(),
    };
    match dispatch(&mut ctx) {
        Ok(()) => {}
        Err(CliError::Usage(message)) => {
            ctx.out.code = 2;
            ctx.out.stderr.push_str(&format!("error: {message}\n"));
        }
        Err(CliError::Domain { code, message }) => {
            ctx.out.code = 1;
            ctx.out.stderr.push_str(&format!("error: {code}: {message}\n"));
        }
    }
    ctx.out
}

/// Runs one invocation with an empty stdin.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_stdin(args, &mut std::io::empty())
}

fn dispatch(ctx: &mut Ctx<'_>) -> Result<(), CliError> {
    match &ctx.cli.command {
        Command::Scan { files } => scan(ctx, files),
        Command::Assess(args) => assess_cmd(ctx, args),
        Command::Triage { input } => {
            let sub: TriageSubmission = read_json(input)?;
            let result = triage(&sub)?;
            let text = output::value(&result, ctx.format());
            ctx.print(text);
            Ok(())
        }
        Command::Inventory(cmd) => inventory_cmd(ctx, cmd),
        Command::Risk(cmd) => risk_cmd(ctx, cmd),
        Command::Kpi {
            report,
            top_k,
            include_retired,
        } => {
            let store = ctx.store()?;
            let as_of = ctx.today();
            let text = match report {
                KpiReport::Snapshot => {
                    let k = reporting::kpi_snapshot_scoped(&store, as_of, *include_retired);
                    reporting::render_report(Report::Kpi(&k), ctx.format())?
                }
                KpiReport::Overdue => {
                    let list = reporting::overdue_reviews(&store, as_of);
                    reporting::render_report(Report::Overdue(&list), ctx.format())?
                }
                KpiReport::Unregistered => {
                    let list = reporting::unregistered_amber_red(&store);
                    reporting::render_report(Report::Records(&list), ctx.format())?
                }
                KpiReport::Concentration => {
                    let c = reporting::department_concentration(&store, *top_k)?;
                    reporting::render_report(Report::Concentration(&c), ctx.format())?
                }
            };
            ctx.print(text);
            Ok(())
        }
        Command::Diff { baseline, current } => {
            let a = scanner::parse_workbook(baseline).map_err(|e| scan_error(baseline, &e))?;
            let b = scanner::parse_workbook(current).map_err(|e| scan_error(current, &e))?;
            let diff = scanner::diff_against_baseline(&a, &b);
            let text = output::diff(&diff, ctx.format());
            ctx.print(text);
            Ok(())
        }
        Command::Serve { port, host, static_dir } => {
            let options = ServeOptions {
                store_path: ctx.store_path()?.to_path_buf(),
                host: *host,
                port: *port,
                static_dir: static_dir.clone(),
            };
            let handle = api::serve_with(options).map_err(|e| match e {
                api::ServeError::PortInUse(_) => CliError::domain("PortInUse", &e),
                api::ServeError::StoreUnreadable(_) => CliError::domain("StoreUnreadable", &e),
                api::ServeError::Io(_) => CliError::domain("Io", &e),
            })?;
            eprintln!("listening on {}", handle.url("/"));
            handle.wait().map_err(|e| CliError::domain("Io", e))
        }
    }
}

fn scan(ctx: &mut Ctx<'_>, files: &[PathBuf]) -> Result<(), CliError> {
    let results: Vec<_> = files.par_iter().map(scanner::scan_path).collect();
    let mut reports = Vec::new();
    let mut failed = None;
    for (path, result) in files.iter().zip(results) {
        match result {
            Ok(r) => reports.push(r),
            Err(e) => {
                let err = scan_error(path, &e);
                if let CliError::Domain { code, message } = &err {
                    ctx.out.stderr.push_str(&format!("error: {code}: {message}\n"));
                }
                failed = Some(err);
            }
        }
    }
    let text = output::scans(&reports, ctx.format());
    ctx.print(text);
    match failed {
        Some(CliError::Domain { .. }) => {
            ctx.out.code = 1;
            Ok(())
        }
        Some(other) => Err(other),
        None => Ok(()),
    }
}

fn scanned_complexity(path: &Path) -> Result<u8, CliError> {
    let report = scanner::scan_path(path).map_err(|e| scan_error(path, &e))?;
    report.complexity_grade.map(|g| g.value()).ok_or_else(|| {
        CliError::domain(
            "EncryptedWorkbook",
            format!("{}: cannot grade an encrypted workbook", path.display()),
        )
    })
}

fn assess_cmd(ctx: &mut Ctx<'_>, args: &AssessArgs) -> Result<(), CliError> {
    let scanned = args.from_scan.as_deref().map(scanned_complexity).transpose()?;
    let input: AssessmentInput = if let Some(path) = &args.input {
        let mut value: Value = read_json(path)?;
        if let (Some(grade), Some(obj)) = (scanned, value.as_object_mut()) {
            obj.entry("complexity").or_insert(grade.into());
        }
        serde_json::from_value(value)
            .map_err(|e| CliError::domain("InvalidJson", format!("{}: {e}", path.display())))?
    } else {
        interactive_input(ctx, args, scanned)?
    };
    let result = if args.toggles.is_empty() {
        assess(&input)
    } else {
        what_if(&input, &args.toggles)?
    };
    if let Some(id) = &args.euca {
        let mut store = ctx.store()?;
        let recorded = result.clone();
        store.transact(|s| s.record_assessment(id, input, recorded))?;
    }
    let text = output::value(&result, ctx.format());
    ctx.print(text);
    Ok(())
}

fn interactive_input(ctx: &mut Ctx<'_>, args: &AssessArgs, scanned: Option<u8>) -> Result<AssessmentInput, CliError> {
    let mut store = match &args.draft {
        Some(_) => Some(ctx.store()?),
        None => None,
    };
    let mut transcript = String::new();
    if let (Some(id), Some(path)) = (&args.euca, ctx.cli.store.as_deref()) {
        let record = Store::open(path)?.get(id)?.clone();
        transcript.push_str(&format!(
            "Assessing {} ({}, {})\n",
            record.name, record.id, record.department
        ));
    }
    let default_date = ctx.today();
    let mut partial = Map::new();
    let mut q = interactive::Questionnaire {
        input: &mut *ctx.stdin,
        transcript: &mut transcript,
        default_complexity: scanned,
        default_date,
    };
    let saved_draft = match (&store, &args.draft) {
        (Some(s), Some(key)) => s.draft(key).and_then(Value::as_object).cloned(),
        _ => None,
    };
    if let Some(draft) = saved_draft {
        let restore = q.confirm("A saved draft exists. Restore previous input?");
        match restore {
            Ok(true) => partial = draft,
            Ok(false) => {}
            Err(_) => {
                ctx.out.stderr.push_str(&transcript);
                return Err(CliError::domain(
                    "Incomplete",
                    "input ended before the questionnaire was finished",
                ));
            }
        }
    }
    let mut save_error = None;
    let outcome = q.run(&mut partial, |answers| {
        if let (Some(s), Some(key)) = (store.as_mut(), &args.draft) {
            let answers = Value::Object(answers.clone());
            if let Err(e) = s.transact(|s| {
                s.put_draft(key, answers);
                Ok(())
            }) {
                save_error.get_or_insert(e);
            }
        }
    });
    ctx.out.stderr.push_str(&transcript);
    if let Some(e) = save_error {
        return Err(e.into());
    }
    match outcome {
        Ok(()) => {}
        Err(interactive::Interrupted::EndOfInput) => {
            let hint = match &args.draft {
                Some(key) => format!("; answers so far are saved in draft `{key}`"),
                None => String::new(),
            };
            return Err(CliError::domain(
                "Incomplete",
                format!("input ended before the questionnaire was finished{hint}"),
            ));
        }
        Err(interactive::Interrupted::Io(e)) => return Err(CliError::domain("Io", e)),
    }
    let input = interactive::finish(partial)
        .map_err(|e| CliError::domain("InvalidJson", format!("draft does not form an assessment: {e}")))?;
    if let (Some(s), Some(key)) = (store.as_mut(), &args.draft) {
        s.transact(|s| {
            s.remove_draft(key);
            Ok(())
        })?;
    }
    Ok(input)
}

fn metadata_from_args(store: &Store, args: &AddArgs) -> Result<EucaMetadata, CliError> {
    let mut meta = match (&args.input, &args.id) {
        (Some(path), _) => read_json::<EucaMetadata>(path)?,
        (None, Some(id)) => store.get(id)?.metadata(),
        (None, None) => EucaMetadata::default(),
    };
    if args.id.is_some() {
        meta.id = args.id.clone();
    }
    let text_flags = [
        (&args.name, &mut meta.name),
        (&args.department, &mut meta.department),
        (&args.manager, &mut meta.manager),
        (&args.team, &mut meta.team),
        (&args.sme, &mut meta.sme),
        (&args.data_owner, &mut meta.data_owner),
        (&args.description, &mut meta.description),
        (&args.app_type, &mut meta.app_type),
        (&args.file_location, &mut meta.file_location),
    ];
    for (flag, field) in text_flags {
        if let Some(v) = flag {
            *field = v.clone();
        }
    }
    if let Some(d) = args.disposition {
        meta.disposition = d;
    }
    Ok(meta)
}

fn print_record(ctx: &mut Ctx<'_>, record: &EucaRecord) {
    let text = output::value(record, ctx.format());
    ctx.print(text);
}

fn inventory_cmd(ctx: &mut Ctx<'_>, cmd: &InventoryCommand) -> Result<(), CliError> {
    let mut store = ctx.store()?;
    match cmd {
        InventoryCommand::Add(args) => {
            let meta = metadata_from_args(&store, args)?;
            let record = store.transact(|s| s.upsert_euca(meta))?;
            print_record(ctx, &record);
        }
        InventoryCommand::List {
            department,
            band,
            lifecycle,
            due_before,
        } => {
            let filter = EucaFilter {
                department: department.clone(),
                band: *band,
                lifecycle: *lifecycle,
                due_before: *due_before,
            };
            let records: Vec<EucaRecord> = store.list_eucas(&filter).into_iter().cloned().collect();
            let text = reporting::render_report(Report::Records(&records), ctx.format())?;
            ctx.print(text);
        }
        InventoryCommand::Review { id, date } => {
            let on = date.unwrap_or_else(|| ctx.today());
            let record = store.transact(|s| s.confirm_review(id, on))?;
            print_record(ctx, &record);
        }
        InventoryCommand::Retire { id, reason } => {
            let record = store.transact(|s| s.set_lifecycle(id, Lifecycle::Retired, reason.as_deref()))?;
            print_record(ctx, &record);
        }
        InventoryCommand::Revive { id, reason } => {
            let record = store.transact(|s| s.set_lifecycle(id, Lifecycle::Live, Some(reason)))?;
            print_record(ctx, &record);
        }
        InventoryCommand::Import { file } => {
            let count = store.transact(|s| import_csv(s, file))?;
            let text = output::count("imported", count, ctx.format());
            ctx.print(text);
        }
        InventoryCommand::Export { file: Some(file) } => {
            let count = export_csv(&store, file)?;
            ctx.out
                .stderr
                .push_str(&format!("exported {count} records to {}\n", file.display()));
        }
        InventoryCommand::Export { file: None } => {
            let mut buf = Vec::new();
            write_csv(&store, &mut buf)?;
            ctx.print(String::from_utf8(buf).expect("CSV from UTF-8 fields"));
        }
    }
    Ok(())
}

fn risk_cmd(ctx: &mut Ctx<'_>, cmd: &RiskCommand) -> Result<(), CliError> {
    let mut store = ctx.store()?;
    let entry = match cmd {
        RiskCommand::Link {
            euca,
            description,
            inherent_likelihood,
            inherent_severity,
            residual_likelihood,
            residual_severity,
            opened,
        } => {
            let risk = NewRisk {
                description: description.clone(),
                inherent_likelihood: *inherent_likelihood,
                inherent_severity: *inherent_severity,
                residual_likelihood: *residual_likelihood,
                residual_severity: *residual_severity,
                opened: opened.unwrap_or_else(|| ctx.today()),
            };
            store.transact(|s| s.link_risk(euca, risk))?
        }
        RiskCommand::Close { id, date } => {
            let on = date.unwrap_or_else(|| ctx.today());
            store.transact(|s| s.close_risk(id, on))?
        }
    };
    let text = output::value(&entry, ctx.format());
    ctx.print(text);
    Ok(())
}
