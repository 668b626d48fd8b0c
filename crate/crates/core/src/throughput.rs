//! Frame-rate estimates for streaming encrypted video frames.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::banksim::{simulate_pipeline, BankConfig};
use crate::ckks::{encryption_schedule, SchemeParams};
use crate::error::{Error, Result};
use crate::word::Word;

pub const DEFAULT_CLOCK_HZ: f64 = 1e9;
/// Low end of the edge-to-cloud link, in bits per second.
pub const BANDWIDTH_MIN_BPS: f64 = 100e6;
/// High end of the edge-to-cloud link, in bits per second.
pub const BANDWIDTH_MAX_BPS: f64 = 900e6;
/// Frame rate a surveillance stream needs.
pub const REALTIME_FPS: f64 = 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Qqvga,
    Qvga,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrameSpec {
    pub width: u32,
    pub height: u32,
    pub bits_per_pixel: u32,
    pub resolution: Resolution,
}

impl FrameSpec {
    /// 160x120 grayscale.
    pub fn qqvga() -> Self {
        Self { width: 160, height: 120, bits_per_pixel: 8, resolution: Resolution::Qqvga }
    }

    /// 320x240 grayscale.
    pub fn qvga() -> Self {
        Self { width: 320, height: 240, bits_per_pixel: 8, resolution: Resolution::Qvga }
    }

    pub fn custom(width: u32, height: u32, bits_per_pixel: u32) -> Result<Self> {
        let f = Self { width, height, bits_per_pixel, resolution: Resolution::Custom };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {}x{}", self.width, self.height)));
        }
        if !(1..=64).contains(&self.bits_per_pixel) {
            return Err(Error::InvalidFrame(format!("{} bits per pixel", self.bits_per_pixel)));
        }
        Ok(())
    }

    pub fn frame_bits(&self) -> u64 {
        self.width as u64 * self.height as u64 * self.bits_per_pixel as u64
    }
}

impl fmt::Display for FrameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.bits_per_pixel)
    }
}

/// Accepts `qqvga`, `qvga`, `WxH` (8 bpp) or `WxHxBPP`.
impl FromStr for FrameSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qqvga" => return Ok(Self::qqvga()),
            "qvga" => return Ok(Self::qvga()),
            _ => {}
        }
        let parts = s
            .split(['x', 'X'])
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidFrame(format!("cannot parse frame {s:?}")))?;
        match parts[..] {
            [w, h] => Self::custom(w, h, 8),
            [w, h, b] => Self::custom(w, h, b),
            _ => Err(Error::InvalidFrame(format!("cannot parse frame {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Binding {
    Compute,
    Network,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub frame: FrameSpec,
    pub n: usize,
    pub limbs: usize,
    pub limb_bits: u32,
    pub bfus: usize,
    pub cts_per_frame: u64,
    pub ct_bytes: u64,
    pub frame_ct_bytes_total: u64,
    pub frame_ct_kib: f64,
    pub encrypt_cycles_per_ct: u64,
    pub clock_hz: f64,
    pub bandwidth_bps: f64,
    pub max_fps_compute: f64,
    pub max_fps_network: f64,
    pub max_fps: f64,
    pub binding: Binding,
    pub meets_realtime: bool,
}

/// Ciphertexts per frame, encrypted frame size and the compute- and
/// network-bound frame rates.
///
/// A ciphertext carries `(N/2) * log q` message bits, where `log q` is the
/// narrowest limb. It occupies `2 * N * sum_i log q_i` bits on the wire.
/// Compute time per ciphertext is the simulated encryption schedule.
pub fn fps_estimate<W: Word>(
    frame: &FrameSpec,
    params: &SchemeParams<W>,
    clock_hz: f64,
    bandwidth_bps: f64,
) -> Result<ThroughputReport> {
    frame.validate()?;
    if !(clock_hz > 0.0 && bandwidth_bps > 0.0) {
        return Err(Error::InvalidParams("clock and bandwidth must be positive".into()));
    }
    let n = params.n() as u64;
    let limb_bits = params.limbs().iter().map(|c| c.bits()).min().unwrap_or(0);
    let capacity = (n / 2) * limb_bits as u64;
    let cts = frame.frame_bits().div_ceil(capacity);
    let ct_bits = 2 * n * params.log_q() as u64;
    let total_bits = ct_bits * cts;

    let word_bits = params.limbs().iter().map(|c| c.bits()).max().unwrap_or(0);
    let cfg = BankConfig::new(params.n(), params.bfus(), word_bits);
    let cycles = simulate_pipeline(&encryption_schedule(params), &cfg)?.total_cycles;

    let max_fps_compute = clock_hz / (cycles * cts) as f64;
    let max_fps_network = bandwidth_bps / total_bits as f64;
    let (max_fps, binding) = if max_fps_compute < max_fps_network {
        (max_fps_compute, Binding::Compute)
    } else {
        (max_fps_network, Binding::Network)
    };
    Ok(ThroughputReport {
        frame: *frame,
        n: params.n(),
        limbs: params.limb_count(),
        limb_bits,
        bfus: params.bfus(),
        cts_per_frame: cts,
        ct_bytes: ct_bits / 8,
        frame_ct_bytes_total: total_bits / 8,
        frame_ct_kib: total_bits as f64 / 8.0 / 1024.0,
        encrypt_cycles_per_ct: cycles,
        clock_hz,
        bandwidth_bps,
        max_fps_compute,
        max_fps_network,
        max_fps,
        binding,
        meets_realtime: max_fps >= REALTIME_FPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_frames() {
        assert_eq!("QVGA".parse::<FrameSpec>().unwrap(), FrameSpec::qvga());
        assert_eq!("64x48".parse::<FrameSpec>().unwrap().frame_bits(), 64 * 48 * 8);
        assert_eq!("64x48x24".parse::<FrameSpec>().unwrap().bits_per_pixel, 24);
        for bad in ["0x10", "10", "axb", "10x10x0", "1x2x3x4"] {
            assert!(matches!(bad.parse::<FrameSpec>(), Err(Error::InvalidFrame(_))), "{bad}");
        }
    }

    #[test]
    fn qqvga_small_params() {
        let p = SchemeParams::<u32>::generate(4096, 30, 3, 20).unwrap();
        let r = fps_estimate(&FrameSpec::qqvga(), &p, DEFAULT_CLOCK_HZ, BANDWIDTH_MAX_BPS).unwrap();
        assert_eq!(r.cts_per_frame, 3);
        assert_eq!(r.frame_ct_kib, 270.0);
    }
}
