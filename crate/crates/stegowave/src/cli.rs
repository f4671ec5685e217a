//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 pipeline error, 3 IO error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::RngCore;
use stegowave_core::aes::{Block, SBOX};
use stegowave_core::{selftest, EmbedParams, HaarMatrix, SecretKey};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::pgm::{self, ReadError};
use crate::sweep::{self, Grid, SweepConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PIPELINE: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "stegowave",
    version,
    about = "Hide data losslessly in the Haar wavelet coefficients of a grayscale image"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide a file inside a cover image.
    Embed(EmbedArgs),
    /// Recover a hidden file from a stego image.
    Extract(ExtractArgs),
    /// Measure capacity and distortion over a (bps, k) grid as CSV.
    Sweep(SweepArgs),
    /// Run built-in known-answer and round-trip checks.
    Selftest(SelftestArgs),
    /// Print the N x N Haar matrix as CSV.
    HaarDump(HaarDumpArgs),
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Hard-threshold level K.
    #[arg(long, value_parser = parse_k)]
    pub k: f64,
    /// Bits per symbol (1, 2 or 3).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub bps: u8,
    /// Require k >= max_level + 3 and verify the stego image (default).
    #[arg(long, conflicts_with = "permissive")]
    pub strict: bool,
    /// Allow any k above the largest symbol amplitude; only the frame CRC guards correctness.
    #[arg(long)]
    pub permissive: bool,
}

impl ParamArgs {
    pub fn params(&self) -> EmbedParams {
        if self.permissive {
            EmbedParams::permissive(self.k, self.bps)
        } else {
            EmbedParams::new(self.k, self.bps)
        }
    }
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Cover image (binary PGM, square, power-of-two side; 256 is typical).
    #[arg(long)]
    pub cover: PathBuf,
    /// File to hide.
    #[arg(long)]
    pub secret: PathBuf,
    /// Where to write the stego PGM.
    #[arg(long)]
    pub out: PathBuf,
    /// AES-128 key as 32 hex characters.
    #[arg(long, env = "STEGOWAVE_KEY", hide_env_values = true, value_parser = parse_key)]
    pub key: SecretKey,
    /// CBC initialization vector as 32 hex characters (random when omitted).
    #[arg(long, value_parser = parse_iv)]
    pub iv: Option<Block>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Stego image (binary PGM).
    #[arg(long)]
    pub stego: PathBuf,
    /// Where to write the recovered file.
    #[arg(long)]
    pub out: PathBuf,
    /// AES-128 key as 32 hex characters.
    #[arg(long, env = "STEGOWAVE_KEY", hide_env_values = true, value_parser = parse_key)]
    pub key: SecretKey,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Cover image (binary PGM).
    #[arg(long)]
    pub cover: PathBuf,
    /// Comma-separated <bps>:<k> points; defaults to the 18-point reference lattice.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// AES-128 key as 32 hex characters (all zeros when omitted).
    #[arg(long, env = "STEGOWAVE_KEY", hide_env_values = true, value_parser = parse_key)]
    pub key: Option<SecretKey>,
    /// Seed for the random payloads.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CBC initialization vector as 32 hex characters (all zeros when omitted).
    #[arg(long, value_parser = parse_iv)]
    pub iv: Option<Block>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    pub jobs: Option<NonZeroUsize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Flip one S-box bit to check that the cipher vector catches it.
    #[arg(long, hide = true)]
    pub corrupt_sbox: bool,
}

#[derive(Debug, Args)]
pub struct HaarDumpArgs {
    /// Matrix side (a power of two >= 2).
    #[arg(long)]
    pub n: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_hex16(s: &str) -> Result<[u8; 16], String> {
    let mut out = [0u8; 16];
    hex::decode_to_slice(s.trim(), &mut out)
        .map_err(|e| format!("expected 32 hex characters: {e}"))?;
    Ok(out)
}

fn parse_key(s: &str) -> Result<SecretKey, String> {
    parse_hex16(s).map(SecretKey::new)
}

fn parse_iv(s: &str) -> Result<Block, String> {
    parse_hex16(s)
}

fn parse_k(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(k) if k.is_finite() && k > 0.0 => Ok(k),
        _ => Err("k must be a finite number > 0".to_owned()),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Pipeline(#[from] stegowave_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("self-test failed: {0} check(s) failed")]
    SelfTest(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Pipeline(_) | CliError::SelfTest(_) => EXIT_PIPELINE,
            CliError::Io { .. } | CliError::Read(_) => EXIT_IO,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so a failure never leaves a partial file behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_embed(args: &EmbedArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cover = pgm::read_pgm(&args.cover)?;
    let secret = fs::read(&args.secret).map_err(|e| CliError::io(&args.secret, e))?;
    let iv = args.iv.unwrap_or_else(|| {
        let mut iv = [0u8; 16];
        rand::rng().fill_bytes(&mut iv);
        iv
    });
    let params = args.params.params();
    let embedded = stegowave_core::embed(&cover, &secret, &args.key, &params, &iv)?;
    write_atomic(&args.out, &pgm::save_pgm(&embedded.stego))?;

    let s = &embedded.stats;
    let text = format!(
        "slot_count={}\ncapacity_bytes={}\ncapacity_kb={:.2}\npayload_bytes={}\nused_bits={}\nmse={:.4}\npsnr_db={}\n",
        s.slot_count,
        s.capacity_bytes,
        s.capacity_kb(params.bps),
        secret.len(),
        s.used_bits,
        s.mse,
        if s.psnr_db.is_infinite() {
            "inf".to_owned()
        } else {
            format!("{:.2}", s.psnr_db)
        },
    );
    emit(None, &text, stdout)
}

fn cmd_extract(args: &ExtractArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let stego = pgm::read_pgm(&args.stego)?;
    let payload = stegowave_core::extract(&stego, &args.key, &args.params.params())?;
    write_atomic(&args.out, &payload)?;
    emit(None, &format!("payload_bytes={}\n", payload.len()), stdout)
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cover = pgm::read_pgm(&args.cover)?;
    let grid = args.grid.clone().map_or_else(sweep::default_grid, |g| g.0);
    let key = args.key.unwrap_or(SecretKey::new([0; 16]));
    let config = SweepConfig {
        seed: args.seed,
        iv: args.iv.unwrap_or([0; 16]),
        jobs: args.jobs,
    };
    let results = sweep::run_sweep(&cover, &key, &grid, &config);
    let mut csv = Vec::new();
    sweep::write_csv(&mut csv, &grid, &results).expect("writing to memory");
    emit(
        args.out.as_deref(),
        &String::from_utf8(csv).expect("ASCII CSV"),
        stdout,
    )
}

fn cmd_selftest(args: &SelftestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let checks = if args.corrupt_sbox {
        let mut sbox = SBOX;
        sbox[0] ^= 1;
        selftest::run_with_sbox(&sbox)
    } else {
        selftest::run()
    };
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!(
            "{} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name
        ));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    text.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    emit(None, &text, stdout)?;
    if passed == checks.len() {
        Ok(())
    } else {
        Err(CliError::SelfTest(checks.len() - passed))
    }
}

fn cmd_haar_dump(args: &HaarDumpArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let h = HaarMatrix::new(args.n).map_err(|e| CliError::Usage(format!("--n: {e}")))?;
    let mut text = String::new();
    for r in 0..args.n {
        let row: Vec<String> = (0..args.n).map(|c| h.get(r, c).to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    emit(args.out.as_deref(), &text, stdout)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Embed(a) => cmd_embed(a, stdout),
        Command::Extract(a) => cmd_extract(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Selftest(a) => cmd_selftest(a, stdout),
        Command::HaarDump(a) => cmd_haar_dump(a, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics go to `stderr` as a single `error:` line.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(parse_iv(&"00".repeat(16)).unwrap(), [0; 16]);
        assert_eq!(
            parse_key(&"0f".repeat(16)).unwrap(),
            SecretKey::new([0x0f; 16])
        );
        assert!(parse_key("abc").is_err());
        assert!(parse_key(&"zz".repeat(16)).is_err());
        assert!(parse_key(&"00".repeat(17)).is_err());
    }

    #[test]
    fn k_must_be_positive() {
        assert_eq!(parse_k("20"), Ok(20.0));
        assert!(parse_k("0").is_err());
        assert!(parse_k("-3").is_err());
        assert!(parse_k("inf").is_err());
    }

    #[test]
    fn bps_out_of_range_is_usage_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(
            [
                "stegowave",
                "embed",
                "--cover",
                "/nonexistent/c.pgm",
                "--secret",
                "s",
                "--out",
                "o",
                "--key",
                &"00".repeat(16),
                "--k",
                "20",
                "--bps",
                "4",
            ],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_USAGE);
        assert!(!String::from_utf8(err).unwrap().contains("nonexistent"));
    }

    #[test]
    fn help_exits_zero() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            main_with(["stegowave", "--help"], &mut out, &mut err),
            EXIT_OK
        );
        assert!(String::from_utf8(out).unwrap().contains("embed"));
    }
}
