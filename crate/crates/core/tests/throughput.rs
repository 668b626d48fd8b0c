use proptest::prelude::*;
use rise_core::ckks::SchemeParams;
use rise_core::throughput::{
    fps_estimate, Binding, FrameSpec, BANDWIDTH_MAX_BPS, BANDWIDTH_MIN_BPS, DEFAULT_CLOCK_HZ,
};
use rise_core::Error;

fn params(n: usize, limbs: usize) -> SchemeParams<u32> {
    SchemeParams::generate(n, 30, limbs, 20).unwrap()
}

#[test]
fn frame_sizes_at_n4096() {
    let p = params(4096, 3);
    let qq = fps_estimate(&FrameSpec::qqvga(), &p, DEFAULT_CLOCK_HZ, BANDWIDTH_MAX_BPS).unwrap();
    assert_eq!((qq.cts_per_frame, qq.frame_ct_kib), (3, 270.0));
    let q = fps_estimate(&FrameSpec::qvga(), &p, DEFAULT_CLOCK_HZ, BANDWIDTH_MAX_BPS).unwrap();
    assert_eq!((q.cts_per_frame, q.frame_ct_kib), (10, 900.0));
    assert_eq!(q.ct_bytes, 4096 * 30 * 3 * 2 / 8);
}

#[test]
fn single_ciphertext_at_n16384() {
    let r = fps_estimate(&FrameSpec::qqvga(), &params(16384, 13), DEFAULT_CLOCK_HZ, BANDWIDTH_MAX_BPS).unwrap();
    assert_eq!(r.cts_per_frame, 1);
}

#[test]
fn network_ceilings_at_largest_degree() {
    let p = params(16384, 13);
    let fps = |frame: FrameSpec, bw: f64| fps_estimate(&frame, &p, DEFAULT_CLOCK_HZ, bw).unwrap().max_fps_network.floor();
    assert_eq!(fps(FrameSpec::qqvga(), BANDWIDTH_MAX_BPS), 70.0);
    assert_eq!(fps(FrameSpec::qvga(), BANDWIDTH_MAX_BPS), 23.0);
    assert_eq!(fps(FrameSpec::qqvga(), BANDWIDTH_MIN_BPS), 7.0);
    assert_eq!(fps(FrameSpec::qvga(), BANDWIDTH_MIN_BPS), 2.0);
}

#[test]
fn binding_constraint_is_the_minimum() {
    let p = params(1024, 2);
    let slow_clock = fps_estimate(&FrameSpec::qvga(), &p, 1e3, BANDWIDTH_MAX_BPS).unwrap();
    assert_eq!(slow_clock.binding, Binding::Compute);
    assert_eq!(slow_clock.max_fps, slow_clock.max_fps_compute);
    let slow_link = fps_estimate(&FrameSpec::qvga(), &p, 1e12, 1e3).unwrap();
    assert_eq!(slow_link.binding, Binding::Network);
    assert!(!slow_link.meets_realtime);
}

#[test]
fn invalid_frames() {
    let p = params(1024, 1);
    let bad = FrameSpec { width: 0, ..FrameSpec::qvga() };
    assert!(matches!(fps_estimate(&bad, &p, 1e9, 1e9), Err(Error::InvalidFrame(_))));
    assert!(matches!(FrameSpec::custom(10, 10, 0), Err(Error::InvalidFrame(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_in_bandwidth_and_degree(
        w in 1u32..700, h in 1u32..500, bpp in 1u32..=24,
        bw in 1e6f64..1e10, factor in 1.0f64..10.0,
        log_n in 10usize..14,
    ) {
        let frame = FrameSpec::custom(w, h, bpp).unwrap();
        let small = params(1 << log_n, 2);
        let big = params(1 << (log_n + 1), 2);
        let a = fps_estimate(&frame, &small, DEFAULT_CLOCK_HZ, bw).unwrap();
        let b = fps_estimate(&frame, &small, DEFAULT_CLOCK_HZ, bw * factor).unwrap();
        prop_assert!(b.max_fps_network >= a.max_fps_network);
        let c = fps_estimate(&frame, &big, DEFAULT_CLOCK_HZ, bw).unwrap();
        prop_assert!(c.cts_per_frame <= a.cts_per_frame);
    }
}
