use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use haetae_core::keygen::{keygen, keygen_arena_bytes, keygen_random};
use haetae_core::params::{ConstantsFile, Level, ParamSet};
use haetae_core::sign::{sign, sign_arena_bytes};
use haetae_core::verify::{verify, verify_arena_bytes};
use haetae_core::{kat, selftest, ExecPath, WorkArena};

/// HAETAE key generation, signing and verification.
#[derive(Parser)]
#[command(name = "haetae", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Parameter set: 2, 3 or 5.
    #[arg(long)]
    level: Level,
    /// Implementation: streamed or reference.
    #[arg(long, default_value = "streamed")]
    path: ExecPath,
    /// Write the arena scope report as CSV.
    #[arg(long, value_name = "OUT_CSV")]
    mem_report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a key pair.
    Keygen {
        #[command(flatten)]
        common: Common,
        /// 32-byte seed in hex; without it the OS generator is used.
        #[arg(long)]
        seed_hex: Option<String>,
        #[arg(long)]
        out_pk: PathBuf,
        #[arg(long)]
        out_sk: PathBuf,
    },
    /// Sign a message file.
    Sign {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long)]
        out_sig: PathBuf,
    },
    /// Verify a signature. Exit status 0 accepts, 1 rejects, 2 on error.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Write known-answer records.
    Kat {
        #[arg(long)]
        level: Level,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the streamed-versus-reference differential suite.
    Selftest {
        #[arg(long)]
        level: Level,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, hide = true)]
        fixture_broken_table: bool,
    },
}

fn params(level: Level) -> anyhow::Result<ParamSet> {
    let file = match std::env::var_os("HAETAE_CONSTANTS") {
        Some(path) => ConstantsFile::read(Path::new(&path))?,
        None => ConstantsFile::parse(haetae_core::params::DEFAULT_CONSTANTS)?,
    };
    Ok(ParamSet::from_constants(level, &file)?)
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, data: &[u8]) -> anyhow::Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn mem_report(arena: &WorkArena, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => write(path, arena.report().to_csv().as_bytes()),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Keygen { common, seed_hex, out_pk, out_sk } => {
            let p = params(common.level)?;
            let arena = WorkArena::with_capacity(keygen_arena_bytes(&p));
            let kp = match seed_hex {
                Some(h) => keygen(&hex::decode(h.trim()).context("seed is not hex")?, &p, common.path, &arena)?,
                None => keygen_random(&p, common.path, &arena)?,
            };
            write(&out_pk, &kp.pk)?;
            write(&out_sk, &kp.sk)?;
            mem_report(&arena, &common.mem_report)?;
        }
        Cmd::Sign { common, sk, msg, out_sig } => {
            let p = params(common.level)?;
            let arena = WorkArena::with_capacity(sign_arena_bytes(&p));
            let sig = sign(&read(&sk)?, &read(&msg)?, &p, common.path, &arena)?;
            write(&out_sig, &sig)?;
            mem_report(&arena, &common.mem_report)?;
        }
        Cmd::Verify { common, pk, msg, sig } => {
            let p = params(common.level)?;
            let arena = WorkArena::with_capacity(verify_arena_bytes(&p));
            let decision = verify(&read(&pk)?, &read(&msg)?, &read(&sig)?, &p, common.path, &arena)?;
            mem_report(&arena, &common.mem_report)?;
            println!("{}", if decision.is_accept() { "accept" } else { "reject" });
            return Ok(if decision.is_accept() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Cmd::Kat { level, count, out } => {
            let p = params(level)?;
            let records = kat::generate(level, &p, count)?;
            write(&out, kat::render(&records).as_bytes())?;
        }
        Cmd::Selftest { level, trials, fixture_broken_table } => {
            let p = params(level)?;
            let checks = selftest::run(&p, selftest::Options { trials, broken_table: fixture_broken_table })?;
            for c in &checks {
                println!("{level} {c}");
            }
            if checks.iter().any(|c| !c.passed) {
                eprintln!("self-test failed");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
