use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use magicarpet::coding::{cohort_report, read_coded_records, reports_by_child, CodingScheme, HocReport};
use magicarpet::protocol::{StartRequest, WireMessage};
use magicarpet::replay::{replay, score_log};
use magicarpet::script::{run_script, Script};
use magicarpet::service::{serve, ServiceConfig};
use magicarpet::{Mode, SessionConfig};

#[derive(Parser)]
#[command(name = "magicarpet", version, about = "Interactive play-mat engine, session replay and behavior scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the line protocol over TCP, one controlling client at a time.
    Serve {
        #[arg(long, default_value_t = 7070)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Default mode for `start` messages that omit it: imitation | collab.
        #[arg(long, default_value = "imitation")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "collab-lights", default_value_t = 3)]
        collab_lights: u8,
        #[arg(long = "idle-flash-ms", default_value_t = 5000)]
        idle_flash_ms: u64,
        #[arg(long = "flash-period-ms", default_value_t = 500)]
        flash_period_ms: u64,
        /// Wall-clock tick interval for idle flashing (0 = client-driven ticks only).
        #[arg(long = "tick-ms", default_value_t = 100)]
        tick_ms: u64,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Replay a session log and report divergences from the recorded output.
    Replay {
        path: PathBuf,
        /// Print the regenerated frame/event stream.
        #[arg(long)]
        emit: bool,
    },
    /// Score session logs or coded-item files.
    Score {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Print reports as JSON lines.
        #[arg(long)]
        json: bool,
    },
    /// Run a scripted session headlessly and write its log.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Serve {
            port,
            host,
            mode,
            seed,
            collab_lights,
            idle_flash_ms,
            flash_period_ms,
            tick_ms,
            log,
        } => {
            let defaults = SessionConfig {
                mode,
                seed,
                collab_lights_n: collab_lights,
                idle_flash_ms,
                flash_period_ms,
                ..SessionConfig::default()
            };
            defaults.validate()?;
            let service = serve(ServiceConfig {
                addr: SocketAddr::new(host, port),
                defaults,
                log_path: log,
                tick_interval_ms: tick_ms,
            })
            .with_context(|| format!("binding {host}:{port}"))?;
            eprintln!("listening on {}", service.local_addr());
            service.join()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { path, emit } => {
            let outcome = replay(&path).with_context(|| format!("replaying {}", path.display()))?;
            if emit {
                for line in outcome.regenerated_lines() {
                    println!("{line}");
                }
            }
            if outcome.is_faithful() {
                eprintln!("replay ok: {} records regenerated, no divergence", outcome.regenerated.len());
                Ok(ExitCode::SUCCESS)
            } else {
                for d in &outcome.divergences {
                    println!("{}", serde_json::to_string(d)?);
                }
                eprintln!("replay diverged at {} record(s)", outcome.divergences.len());
                Ok(ExitCode::from(2))
            }
        }
        Command::Score { paths, scheme, json } => {
            let scheme = match scheme {
                Some(p) => CodingScheme::from_json(&fs::read_to_string(&p)?)
                    .with_context(|| format!("loading scheme {}", p.display()))?,
                None => CodingScheme::default(),
            };
            let mut reports = Vec::new();
            for path in &paths {
                let found = score_path(path, &scheme).with_context(|| format!("scoring {}", path.display()))?;
                reports.extend(found);
            }
            for r in &reports {
                if json {
                    println!("{}", serde_json::to_string(r)?);
                } else {
                    print!("{}", r.render());
                }
            }
            if reports.len() > 1 {
                let agg = cohort_report(&reports)?;
                if json {
                    println!("{}", serde_json::to_string(&agg)?);
                } else {
                    println!("{}", agg.render());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, script, out } => {
            let config = load_config(&config)?;
            let script = Script::parse(&fs::read_to_string(&script)?)
                .with_context(|| format!("parsing {}", script.display()))?;
            let summary = run_script(config, &script, &out)?;
            println!("{}", WireMessage::Summary(summary).to_line());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Session logs start with a `t` field; anything else is a coded-item file.
fn score_path(path: &Path, scheme: &CodingScheme) -> Result<Vec<HocReport>> {
    let first = BufReader::new(File::open(path)?)
        .lines()
        .map_while(|l| l.ok())
        .find(|l| !l.trim().is_empty());
    let Some(first) = first else {
        bail!("{} is empty", path.display());
    };
    let is_log = serde_json::from_str::<serde_json::Value>(&first)
        .map(|v| v.get("t").is_some())
        .unwrap_or(false);
    if is_log {
        let mut report = score_log(path, scheme)?;
        report.child_id = Some(path.display().to_string());
        Ok(vec![report])
    } else {
        let records = read_coded_records(BufReader::new(File::open(path)?))?;
        Ok(reports_by_child(&records, scheme)?)
    }
}

/// A config file is a JSON object with `start` fields, optionally tagged
/// `"t":"start"`.
fn load_config(path: &Path) -> Result<SessionConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let req: StartRequest = match WireMessage::parse(&text) {
        Ok(WireMessage::Start(req)) => req,
        _ => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
    };
    let config = req.resolve(&SessionConfig::default());
    config.validate()?;
    Ok(config)
}
