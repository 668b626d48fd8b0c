mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use error::{CliError, Stage};
use rise_core::banksim::{compare_port_models, simulate_ntt, simulate_pipeline, BankConfig, BankTrace, PortModel, Reorder};
use rise_core::ckks::datapath::DatapathSchedule;
use rise_core::ckks::{
    decode_fixed, decrypt_with_mode, encode_fixed, encrypt, keygen, read_key_header, Ciphertext, DecryptMode, KeyPair,
    DEFAULT_SCALE_BITS,
};
use rise_core::keccak::KeccakSponge;
use rise_core::modarith::find_context;
use rise_core::ntt::NttPlan;
use rise_core::samplers::{sample_binomial, sample_ternary, sample_uniform_mod_q};
use rise_core::throughput::{fps_estimate, FrameSpec, BANDWIDTH_MAX_BPS, BANDWIDTH_MIN_BPS, DEFAULT_CLOCK_HZ};
use rise_core::Params64;

pub const REPORT_VERSION: u32 = 1;
const DEFAULT_SEED: &str = "rise";

#[derive(Parser)]
#[command(name = "rise", version, about = "CKKS edge encryption datapath tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a secret/public key pair.
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Encode and encrypt a message file.
    Encrypt {
        #[arg(long)]
        keys: PathBuf,
        /// JSON array or whitespace/comma separated numbers.
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Decrypt and decode a ciphertext file to a JSON array.
    Decrypt {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Decrypt every limb instead of the last one.
        #[arg(long)]
        all_limbs: bool,
        /// Keep only the first COUNT coefficients.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Draw one polynomial from a sampler.
    Sample {
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        limb_bits: u32,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Time the software transform and report its simulated latency.
    NttBench {
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        limb_bits: u32,
        #[arg(long, default_value_t = 1)]
        bfus: usize,
        #[arg(long, default_value_t = 100)]
        iters: u32,
    },
    /// Run the bank model and export a trace and summary.
    Simulate(SimulateArgs),
    /// Estimate sustainable frame rates.
    FpsEstimate {
        /// qqvga, qvga, WxH or WxHxBPP.
        #[arg(long, default_value = "qqvga")]
        frame: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = DEFAULT_CLOCK_HZ)]
        clock_hz: f64,
        /// Link rate in bits per second; overrides --bandwidth.
        #[arg(long)]
        bandwidth_bps: Option<f64>,
        #[arg(long, value_enum, default_value_t = Bandwidth::Max)]
        bandwidth: Bandwidth,
    },
    /// keygen, encrypt, write, read back, decrypt and check the error bound.
    Run(run::RunArgs),
}

#[derive(Args, Clone, Debug, Default)]
pub struct ParamArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    limbs: Option<usize>,
    #[arg(long)]
    limb_bits: Option<u32>,
    /// Explicit comma-separated moduli; replaces --limbs/--limb-bits.
    #[arg(long, value_delimiter = ',')]
    moduli: Vec<u64>,
    #[arg(long)]
    scale_bits: Option<u32>,
    #[arg(long)]
    bfus: Option<usize>,
}

impl ParamArgs {
    pub fn build(&self) -> Result<Params64, CliError> {
        let n = self.n.unwrap_or(4096);
        let scale = self.scale_bits.unwrap_or(DEFAULT_SCALE_BITS);
        let params = if self.moduli.is_empty() {
            Params64::generate(n, self.limb_bits.unwrap_or(30), self.limbs.unwrap_or(3), scale)
        } else {
            Params64::new(n, &self.moduli, scale)
        };
        params.and_then(|p| p.with_bfus(self.bfus.unwrap_or(1))).stage("params")
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Binomial,
    Ternary,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bandwidth {
    Min,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Ntt,
    Encrypt,
    Decrypt,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    bfus: usize,
    #[arg(long, default_value_t = 30)]
    word_bits: u32,
    /// 1rw, 1r1w or 2r2w.
    #[arg(long, default_value = "1rw")]
    port_model: PortModel,
    #[arg(long, value_enum, default_value_t = ReorderArg::Swap4)]
    reorder: ReorderArg,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Ntt)]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 1)]
    limbs: usize,
    #[arg(long)]
    write_buffer_depth: Option<usize>,
    /// Per-event CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary JSON; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also compare port models on the same transform.
    #[arg(long)]
    compare: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReorderArg {
    None,
    Swap2,
    Swap4,
}

impl From<ReorderArg> for Reorder {
    fn from(r: ReorderArg) -> Self {
        match r {
            ReorderArg::None => Reorder::None,
            ReorderArg::Swap2 => Reorder::Swap2,
            ReorderArg::Swap4 => Reorder::Swap4,
        }
    }
}

/// `RISE_SEED` wins over any flag or config value.
pub fn resolve_seed(seed: Option<&str>) -> String {
    std::env::var("RISE_SEED").ok().or(seed.map(str::to_owned)).unwrap_or_else(|| DEFAULT_SEED.to_owned())
}

pub fn params_from_keys(bytes: &[u8]) -> Result<Params64, CliError> {
    let h = read_key_header(bytes).stage("keys")?;
    Params64::new(h.n, &h.moduli, h.scale_bits).stage("keys")
}

pub fn parse_message(text: &str) -> Result<Vec<f64>, CliError> {
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(text) {
        return Ok(v);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Config(format!("bad number {t:?} in message"))))
        .collect()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn emit(value: &impl Serialize, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    match out {
        Some(path) => error::write(path, text + "\n"),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn params_json(p: &Params64) -> serde_json::Value {
    json!({
        "n": p.n(),
        "moduli": p.moduli(),
        "log_q": p.log_q(),
        "scale_bits": p.scale_bits(),
        "params_id": hex(&p.params_id()),
    })
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Keygen { params, seed, out } => {
            let p = params.build()?;
            let keys = keygen(&p, resolve_seed(seed.as_deref()).as_bytes()).stage("keygen")?;
            error::write(&out, keys.to_bytes(&p))?;
            emit(&json!({ "report_version": REPORT_VERSION, "params": params_json(&p), "keys": out }), None)
        }
        Command::Encrypt { keys, input, out, seed } => {
            let key_bytes = error::read(&keys)?;
            let p = params_from_keys(&key_bytes)?;
            let keys = KeyPair::from_bytes(&key_bytes, &p).stage("keys")?;
            let text = String::from_utf8_lossy(&error::read(&input)?).into_owned();
            let m = encode_fixed(&parse_message(&text)?, &p).stage("encode")?;
            let ct = encrypt(&m, &keys, &p, resolve_seed(seed.as_deref()).as_bytes()).stage("encrypt")?;
            let bytes = ct.to_bytes(&p).stage("encrypt")?;
            error::write(&out, &bytes)?;
            emit(&json!({ "report_version": REPORT_VERSION, "ciphertext": out, "bytes": bytes.len() }), None)
        }
        Command::Decrypt { keys, input, out, all_limbs, count } => {
            let key_bytes = error::read(&keys)?;
            let p = params_from_keys(&key_bytes)?;
            let keys = KeyPair::from_bytes(&key_bytes, &p).stage("keys")?;
            let ct = Ciphertext::from_bytes(&error::read(&input)?, &p).stage("ciphertext")?;
            let mode = if all_limbs { DecryptMode::AllLimbs } else { DecryptMode::LastLimb };
            let plain = decrypt_with_mode(&ct, &keys.s, &p, mode).stage("decrypt")?;
            let mut values = decode_fixed(&plain, &p).stage("decode")?;
            values.truncate(count.unwrap_or(values.len()));
            emit(&values, out.as_ref())
        }
        Command::Sample { dist, n, limb_bits, seed, out } => {
            let mut sponge = KeccakSponge::from_seed(resolve_seed(seed.as_deref()).as_bytes());
            let poly = match dist {
                Dist::Binomial => sample_binomial(&mut sponge, n),
                Dist::Ternary => sample_ternary(&mut sponge, n),
                Dist::Uniform => {
                    let ctx = find_context::<u64>(n, limb_bits).stage("sample")?;
                    sample_uniform_mod_q(&mut sponge, n, &ctx)
                }
            };
            let len = poly.coeffs.len().max(1) as f64;
            let mean = poly.coeffs.iter().map(|&c| c as f64).sum::<f64>() / len;
            let variance = poly.coeffs.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / len;
            emit(
                &json!({
                    "report_version": REPORT_VERSION,
                    "distribution": poly.distribution,
                    "n": n,
                    "mean": mean,
                    "variance": variance,
                    "coeffs": poly.coeffs,
                }),
                out.as_ref(),
            )
        }
        Command::NttBench { n, limb_bits, bfus, iters } => {
            let ctx = find_context::<u64>(n, limb_bits).stage("ntt-bench")?;
            let plan = NttPlan::new(ctx, bfus).stage("ntt-bench")?;
            let mut a: Vec<u64> = (0..n as u64).map(|i| i % ctx.q()).collect();
            let iters = iters.max(1);
            let t = Instant::now();
            for _ in 0..iters {
                a = plan.ntt_swap4(&a).stage("ntt-bench")?;
            }
            let forward = t.elapsed().as_nanos() as f64 / iters as f64;
            let t = Instant::now();
            for _ in 0..iters {
                a = plan.intt_swap4(&a).stage("ntt-bench")?;
            }
            let inverse = t.elapsed().as_nanos() as f64 / iters as f64;
            let trace = simulate_ntt(&plan, &BankConfig::for_plan(&plan)).stage("ntt-bench")?;
            emit(
                &json!({
                    "report_version": REPORT_VERSION,
                    "n": n,
                    "q": ctx.q(),
                    "bfus": bfus,
                    "iters": iters,
                    "ns_per_forward": forward,
                    "ns_per_inverse": inverse,
                    "simulated_cycles": trace.total_cycles,
                }),
                None,
            )
        }
        Command::Simulate(args) => simulate(args),
        Command::FpsEstimate { frame, params, clock_hz, bandwidth_bps, bandwidth } => {
            let frame: FrameSpec = frame.parse().stage("frame")?;
            let p = params.build()?;
            let bw = bandwidth_bps.unwrap_or(match bandwidth {
                Bandwidth::Min => BANDWIDTH_MIN_BPS,
                Bandwidth::Max => BANDWIDTH_MAX_BPS,
            });
            let report = fps_estimate(&frame, &p, clock_hz, bw).stage("fps-estimate")?;
            emit(&json!({ "report_version": REPORT_VERSION, "throughput": report }), None)
        }
        Command::Run(args) => run::run(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = BankConfig::new(args.n, args.bfus, args.word_bits)
        .with_port_model(args.port_model)
        .with_reorder(args.reorder.into())
        .with_trace(args.trace.is_some());
    if let Some(d) = args.write_buffer_depth {
        cfg = cfg.with_write_buffer_depth(d);
    }
    let plan = || -> Result<NttPlan<u64>, CliError> {
        let ctx = find_context::<u64>(args.n, args.word_bits).stage("simulate")?;
        NttPlan::new(ctx, args.bfus).stage("simulate")
    };
    let trace: BankTrace = match args.schedule {
        ScheduleArg::Ntt => simulate_ntt(&plan()?, &cfg),
        ScheduleArg::Encrypt => simulate_pipeline(&DatapathSchedule::encryption(args.n, args.limbs), &cfg),
        ScheduleArg::Decrypt => {
            let limbs: Vec<usize> = (0..args.limbs).collect();
            simulate_pipeline(&DatapathSchedule::decryption(args.n, &limbs), &cfg)
        }
    }
    .stage("simulate")?;

    if let Some(path) = &args.trace {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &trace.records {
            w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        error::write(path, bytes)?;
    }
    let ports = if args.compare { Some(compare_port_models(&plan()?).stage("simulate")?) } else { None };
    let report = json!({
        "report_version": REPORT_VERSION,
        "config": cfg,
        "summary": trace.summary(),
        "trace": trace,
        "port_models": ports,
    });
    emit(&report, args.summary.as_ref())
}
