use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hidwire::descriptor::ReportKind;
use hidwire::joycon::JoyConSide;
use hidwire::transport::load_replay;
use hidwire_cli::commands;
use hidwire_cli::config::Config;
use hidwire_cli::serve::{self, ServeOptions, Source};
use hidwire_cli::CliError;

#[derive(Parser)]
#[command(name = "hidwire", version, about = "HID descriptor tools and a Joy-Con event service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a report descriptor and print its collection tree as JSON.
    DumpDescriptor {
        file: PathBuf,
        /// The file holds raw bytes rather than hex text.
        #[arg(long)]
        raw: bool,
    },
    /// Decode one report body against a descriptor.
    Decode {
        #[arg(long)]
        descriptor: PathBuf,
        #[arg(long)]
        raw: bool,
        #[arg(long, value_parser = parse_u8)]
        report_id: u8,
        /// Report body as hex, without the report id byte.
        #[arg(long)]
        data: String,
        #[arg(long, value_enum, default_value_t = Kind::Input)]
        kind: Kind,
    },
    /// Replay a log through a simulated Joy-Con and print decoded events.
    Replay {
        log: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// One JSON message per line, IMU samples included.
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value_t = Side::Right)]
        side: Side,
    },
    /// Stream decoded events to WebSocket clients.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "stdin_sim")]
        replay: Option<PathBuf>,
        #[arg(long)]
        stdin_sim: bool,
        /// Pace replay by the log's timestamps.
        #[arg(long)]
        realtime: bool,
        /// Clients to wait for before replay starts.
        #[arg(long)]
        wait_clients: Option<usize>,
        #[arg(long, value_enum, default_value_t = Side::Right)]
        side: Side,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Input,
    Output,
    Feature,
}

impl From<Kind> for ReportKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Input => ReportKind::Input,
            Kind::Output => ReportKind::Output,
            Kind::Feature => ReportKind::Feature,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Left,
    Right,
}

impl From<Side> for JoyConSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => JoyConSide::Left,
            Side::Right => JoyConSide::Right,
        }
    }
}

fn parse_u8(s: &str) -> Result<u8, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u8::from_str_radix(h, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("{s:?}: {e}"))
}

fn load_log(path: &Path) -> Result<Vec<hidwire::transport::ReplayRecord>, CliError> {
    load_replay(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::DumpDescriptor { file, raw } => {
            println!("{}", commands::dump_descriptor(&file, raw)?);
        }
        Command::Decode {
            descriptor,
            raw,
            report_id,
            data,
            kind,
        } => {
            println!("{}", commands::decode(&descriptor, raw, kind.into(), report_id, &data)?);
        }
        Command::Replay {
            log,
            config,
            json,
            side,
        } => {
            let config = Config::load_or_default(config.as_deref())?;
            let records = load_log(&log)?;
            let messages = commands::replay_messages(&records, side.into(), config.jump)?;
            commands::write_messages(io::stdout().lock(), &messages, json)
                .map_err(|e| CliError::Failure(e.to_string()))?;
        }
        Command::Serve {
            port,
            config,
            replay,
            stdin_sim,
            realtime,
            wait_clients,
            side,
        } => {
            let config = Config::load_or_default(config.as_deref())?;
            let source = match (replay, stdin_sim) {
                (Some(path), _) => Source::Replay(load_log(&path)?),
                (None, true) => Source::StdinSim,
                (None, false) => Source::Idle,
            };
            let options = ServeOptions {
                source,
                realtime: realtime || config.serve.realtime,
                wait_clients: wait_clients.unwrap_or(config.serve.wait_clients),
                jump: config.jump,
                side: side.into(),
                permission_store: config.serve.permission_store,
            };
            let port = port.unwrap_or(config.serve.port);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Failure(e.to_string()))?;
            runtime.block_on(async move {
                let listener = serve::bind(port).await?;
                serve::run(listener, options, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
