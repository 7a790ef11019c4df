use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use overmark::analyzers::CoverageMode;
use overmark::commands::{self, CommandError};
use overmark::config::{self, ConfigLayer, ToolConfig, DEFAULT_CONFIG_FILE};
use overmark::manifest::MarkerStyle;
use overmark::vcs::{self, HookAction};

#[derive(Parser)]
#[command(name = "overmark", version, about = "Overlay analysis results on source code as removable markers")]
struct Cli {
    /// Config file (default: overmark.conf in the project root or the
    /// current directory, if present)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Project root (overrides project_root)
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    /// Worker threads
    #[arg(long, short = 'j', global = true)]
    jobs: Option<usize>,
    /// Marker style: comment or native
    #[arg(long, global = true)]
    style: Option<MarkerStyle>,
    /// Only files matching these globs (replaces `include`)
    #[arg(long, global = true, value_delimiter = ',')]
    only: Vec<String>,
    /// Restrict to these classes or methods, e.g. `Mat` or `Mat.square`
    #[arg(long, global = true, value_delimiter = ',')]
    target: Vec<String>,
    /// Active analyzers (replaces `analyzers`)
    #[arg(long, global = true, value_delimiter = ',')]
    analyzer: Vec<String>,
    /// LCOV report for the coverage analyzer
    #[arg(long, global = true)]
    coverage_report: Option<PathBuf>,
    /// Coverage mode: counts or full
    #[arg(long, global = true)]
    mode: Option<CoverageMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the active analyzers and insert their markers
    Label,
    /// Remove all markers
    Strip {
        /// Only strip files staged in git, then re-stage them
        #[arg(long)]
        staged: bool,
    },
    /// Check that label followed by strip restores every file
    Verify,
    /// Show markers present and manifest state
    Status,
    /// Install the git pre-commit hook that strips staged files
    InstallHook {
        /// Replace an existing hook (it is kept as a backup)
        #[arg(long)]
        force: bool,
    },
    /// Strip markers from stdin to stdout (for use as a git clean filter)
    Filter,
    /// List registered analyzers
    Analyzers,
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

impl Cli {
    fn config_path(&self) -> Option<PathBuf> {
        if let Some(c) = &self.config {
            return Some(absolute(c));
        }
        let dir = self.root.clone().unwrap_or_else(|| PathBuf::from("."));
        let candidate = absolute(&dir.join(DEFAULT_CONFIG_FILE));
        candidate.is_file().then_some(candidate)
    }

    fn flag_layer(&self) -> ConfigLayer {
        let list = |v: &Vec<String>| (!v.is_empty()).then(|| v.clone());
        ConfigLayer {
            project_root: self.root.as_deref().map(absolute),
            analyzers: list(&self.analyzer),
            include: list(&self.only),
            targets: list(&self.target),
            coverage_report: self.coverage_report.as_deref().map(absolute),
            coverage_mode: self.mode,
            marker_style: self.style,
            jobs: self.jobs,
            ..Default::default()
        }
    }

    fn resolve(&self) -> Result<(ToolConfig, Option<PathBuf>), CommandError> {
        let config_err = |e: config::ConfigError| CommandError::Config(e.to_string());
        let path = self.config_path();
        let file = match &path {
            Some(p) => config::load_layer(p).map_err(config_err)?,
            None => ConfigLayer::default(),
        };
        let defaults = ConfigLayer {
            project_root: Some(absolute(Path::new("."))),
            ..Default::default()
        };
        let config = ToolConfig::resolve(self.flag_layer().over(file).over(defaults)).map_err(config_err)?;
        Ok((config, path))
    }
}

/// Command line the hook uses to call back into this binary.
fn tool_invocation(config: &ToolConfig, config_path: Option<&Path>) -> Result<String, CommandError> {
    let exe = std::env::current_exe().map_err(|e| CommandError::Environment(e.to_string()))?;
    let mut cmd = vcs::shell_quote(&exe.to_string_lossy());
    match config_path {
        Some(p) => {
            cmd.push_str(" --config ");
            cmd.push_str(&vcs::shell_quote(&p.to_string_lossy()));
        }
        None => {
            cmd.push_str(" --root ");
            cmd.push_str(&vcs::shell_quote(&config.project_root.to_string_lossy()));
        }
    }
    Ok(cmd)
}

fn run(cli: &Cli) -> Result<ExitCode, CommandError> {
    let (config, config_path) = cli.resolve()?;
    match &cli.command {
        Command::Label => {
            print!("{}", commands::cmd_label(&config)?);
        }
        Command::Strip { staged } => {
            let summary = commands::cmd_strip(&config, *staged)?;
            print!("{summary}");
            if !summary.failures.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify => {
            let report = commands::cmd_verify(&config)?;
            print!("{report}");
            if !report.ok() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Status => print!("{}", commands::cmd_status(&config)?),
        Command::InstallHook { force } => {
            let invocation = tool_invocation(&config, config_path.as_deref())?;
            let report = commands::cmd_install_hook(&config.project_root, invocation, *force)?;
            let path = report.hook_path.display();
            match &report.action {
                HookAction::Created => println!("installed {path}"),
                HookAction::Unchanged => println!("{path} is already installed"),
                HookAction::Updated => println!("updated {path}"),
                HookAction::Replaced(backup) => println!("installed {path}; previous hook saved as {}", backup.display()),
            }
            println!("to use a clean filter instead of the hook, run:");
            for line in &report.filter_config {
                println!("  {line}");
            }
        }
        Command::Filter => {
            let registry = config.registry();
            let stdin = io::stdin().lock();
            let stdout = io::BufWriter::new(io::stdout().lock());
            vcs::filter_stream(BufReader::with_capacity(1 << 16, stdin), stdout, registry.syntax())
                .map_err(|e| CommandError::Environment(e.to_string()))?;
        }
        Command::Analyzers => {
            print!("{}", commands::describe_analyzers(&config.registry(), &config.active_analyzers));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("overmark: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
