use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{self, CliError, Stage};
use crate::{emit, params_json, parse_message, resolve_seed, ParamArgs, REPORT_VERSION};
use rise_core::banksim::{simulate_pipeline, BankConfig};
use rise_core::ckks::datapath::DatapathSchedule;
use rise_core::ckks::{
    decode_fixed, decrypt_with_mode, encode_fixed, encrypt, keygen, noise_bound, Ciphertext, DecryptMode,
};

#[derive(Args)]
pub struct RunArgs {
    /// JSON config; every flag below overrides the matching field.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    seed: Option<String>,
    /// Message file; a deterministic ramp is used when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    all_limbs: bool,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub limbs: Option<usize>,
    pub limb_bits: Option<u32>,
    pub moduli: Vec<u64>,
    pub scale_bits: Option<u32>,
    pub bfus: Option<usize>,
    pub seed: Option<String>,
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Write the ciphertext to disk and decrypt what is read back.
    pub network_hop: Option<bool>,
    pub decrypt_mode: Option<DecryptMode>,
}

impl RunConfig {
    fn merge(mut self, args: &RunArgs) -> Self {
        let p = &args.params;
        self.n = p.n.or(self.n);
        self.limbs = p.limbs.or(self.limbs);
        self.limb_bits = p.limb_bits.or(self.limb_bits);
        if !p.moduli.is_empty() {
            self.moduli = p.moduli.clone();
        }
        self.scale_bits = p.scale_bits.or(self.scale_bits);
        self.bfus = p.bfus.or(self.bfus);
        self.seed = args.seed.clone().or(self.seed);
        self.input = args.input.clone().or(self.input);
        self.out_dir = args.out_dir.clone().or(self.out_dir);
        if args.all_limbs {
            self.decrypt_mode = Some(DecryptMode::AllLimbs);
        }
        self
    }

    fn param_args(&self) -> ParamArgs {
        ParamArgs {
            n: self.n,
            limbs: self.limbs,
            limb_bits: self.limb_bits,
            moduli: self.moduli.clone(),
            scale_bits: self.scale_bits,
            bfus: self.bfus,
        }
    }
}

fn ramp(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i % 256) as f64 - 128.0) / 8.0).collect()
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let base = match &args.config {
        Some(path) => serde_json::from_slice(&error::read(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    let cfg = base.merge(&args);
    let params = cfg.param_args().build()?;
    let seed = resolve_seed(cfg.seed.as_deref());
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("rise-out"));
    let mode = cfg.decrypt_mode.unwrap_or_default();
    let mut timings = serde_json::Map::new();
    let mut lap = |name: &str, t: Instant| {
        timings.insert(name.to_owned(), json!(t.elapsed().as_secs_f64() * 1e3));
    };

    let values = match &cfg.input {
        Some(path) => parse_message(&String::from_utf8_lossy(&error::read(path)?))?,
        None => ramp(params.n()),
    };

    let t = Instant::now();
    let keys = keygen(&params, format!("{seed}/keygen").as_bytes()).stage("keygen")?;
    error::write(&out_dir.join("keys.bin"), keys.to_bytes(&params))?;
    lap("keygen_ms", t);

    let t = Instant::now();
    let m = encode_fixed(&values, &params).stage("encode")?;
    lap("encode_ms", t);

    let t = Instant::now();
    let ct = encrypt(&m, &keys, &params, format!("{seed}/encrypt").as_bytes()).stage("encrypt")?;
    lap("encrypt_ms", t);

    let ct_path = out_dir.join("ciphertext.bin");
    let bytes = ct.to_bytes(&params).stage("encrypt")?;
    error::write(&ct_path, &bytes)?;
    let received = if cfg.network_hop.unwrap_or(true) {
        Ciphertext::from_bytes(&error::read(&ct_path)?, &params).stage("network")?
    } else {
        ct
    };

    let t = Instant::now();
    let plain = decrypt_with_mode(&received, &keys.s, &params, mode).stage("decrypt")?;
    lap("decrypt_ms", t);
    let t = Instant::now();
    let decoded = decode_fixed(&plain, &params).stage("decode")?;
    lap("decode_ms", t);

    let max_error = values
        .iter()
        .chain(std::iter::repeat(&0.0))
        .zip(&decoded)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let bound = (noise_bound(params.n()) + 0.5) / (params.scale_bits() as f64).exp2();
    let decoded_path = out_dir.join("decoded.json");
    let decoded_text = serde_json::to_string(&decoded[..values.len()]).map_err(|e| CliError::Config(e.to_string()))?;
    error::write(&decoded_path, decoded_text + "\n")?;

    let bank = BankConfig::new(params.n(), params.bfus(), params.limbs().iter().map(|c| c.bits()).max().unwrap_or(0));
    let enc = simulate_pipeline(&DatapathSchedule::encryption(params.n(), params.limb_count()), &bank)
        .stage("simulate")?;
    let dec_limbs: Vec<usize> = match mode {
        DecryptMode::LastLimb => vec![params.limb_count() - 1],
        DecryptMode::AllLimbs => (0..params.limb_count()).collect(),
    };
    let dec = simulate_pipeline(&DatapathSchedule::decryption(params.n(), &dec_limbs), &bank).stage("simulate")?;

    let report = json!({
        "report_version": REPORT_VERSION,
        "params": params_json(&params),
        "bfus": params.bfus(),
        "decrypt_mode": mode,
        "values": values.len(),
        "ciphertext_bytes": bytes.len(),
        "max_error": max_error,
        "error_bound": bound,
        "within_bound": max_error <= bound,
        "timings": timings,
        "simulated": {
            "encrypt": enc.summary(),
            "decrypt": dec.summary(),
        },
        "artifacts": {
            "keys": out_dir.join("keys.bin"),
            "ciphertext": ct_path,
            "decoded": decoded_path,
        },
    });
    emit(&report, Some(&out_dir.join("report.json")))?;
    emit(&report, None)?;
    if max_error > bound {
        return Err(CliError::Bound { error: max_error, bound });
    }
    Ok(())
}
