use rise_core::banksim::{
    calibration_report, compare_port_models, simulate_ntt, simulate_pipeline, BankConfig, Op, PortModel, Reorder,
};
use rise_core::ckks::datapath::DatapathSchedule;
use rise_core::modarith::find_context;
use rise_core::ntt::{NttPlan, SUPPORTED_BFUS};
use rise_core::Error;

fn plans() -> impl Iterator<Item = NttPlan<u64>> {
    (5..=14).flat_map(|log_n| {
        let n = 1usize << log_n;
        let ctx = find_context::<u64>(n, 40).unwrap();
        SUPPORTED_BFUS.into_iter().filter(move |&b| n >= 32 * b).map(move |b| NttPlan::new(ctx, b).unwrap())
    })
}

#[test]
fn swap4_single_port_is_conflict_free() {
    for plan in plans() {
        let cfg = BankConfig::for_plan(&plan);
        let t = simulate_ntt(&plan, &cfg).unwrap();
        let (n, b) = (plan.n(), plan.bfus());
        assert_eq!(t.conflict_count, 0, "N={n} B={b}");
        assert_eq!(t.stall_count, 0, "N={n} B={b}");
        assert_eq!(t.peak_wb_occupancy, 1, "N={n} B={b}");
        assert_eq!(t.butterflies, (n as u64 / 2) * n.trailing_zeros() as u64);
        for s in &t.stages {
            assert_eq!(s.issue_cycles, (n / 2 / b) as u64, "N={n} B={b} stage {}", s.stage);
            assert_eq!(s.butterflies, (n / 2) as u64);
        }
    }
}

#[test]
fn unreordered_stream_conflicts() {
    for plan in plans() {
        let cfg = BankConfig::for_plan(&plan).with_reorder(Reorder::None);
        let t = simulate_ntt(&plan, &cfg).unwrap();
        assert!(t.conflict_count >= 1, "N={} B={}", plan.n(), plan.bfus());
    }
}

#[test]
fn trace_has_one_access_per_bank_cycle() {
    let ctx = find_context::<u32>(256, 30).unwrap();
    for b in [1, 2, 8] {
        let plan = NttPlan::new(ctx, b).unwrap();
        let t = simulate_ntt(&plan, &BankConfig::for_plan(&plan).with_trace(true)).unwrap();
        assert_eq!(t.max_ops_per_bank_cycle(), 1);
        let reads = t.records.iter().filter(|r| r.op == Op::Read).count();
        let writes = t.records.iter().filter(|r| r.op == Op::Write).count();
        assert_eq!(reads, 256 * 8);
        assert_eq!(writes, 256 * 8);
        assert!(t.records.iter().all(|r| (r.bank as usize) < 4 * b));
    }
}

#[test]
fn port_model_comparison() {
    let ctx = find_context::<u32>(1024, 30).unwrap();
    let plan = NttPlan::new(ctx, 2).unwrap();
    let report = compare_port_models(&plan).unwrap();
    let swap4 = report.row(PortModel::OneRw, Reorder::Swap4).unwrap();
    assert_eq!((swap4.conflicts, swap4.required_buffer_depth), (0, 1));
    let dual = report.row(PortModel::TwoReadTwoWrite, Reorder::None).unwrap();
    assert!(dual.area_proxy > swap4.area_proxy);
    assert!(report.row(PortModel::OneRw, Reorder::None).unwrap().conflicts > 0);
    // B consecutive in-place butterflies share a bank pair once 2h is a
    // multiple of 4B, so only a single BFU keeps dual ports conflict-free.
    assert!(dual.conflicts > 0);

    let single = compare_port_models(&NttPlan::new(ctx, 1).unwrap()).unwrap();
    assert_eq!(single.row(PortModel::TwoReadTwoWrite, Reorder::None).unwrap().conflicts, 0);
    assert_eq!(single.row(PortModel::OneReadOneWrite, Reorder::Swap2).unwrap().conflicts, 0);
    assert!(single.row(PortModel::OneRw, Reorder::Swap2).unwrap().required_buffer_depth > 1);
}

#[test]
fn pipeline_keeps_two_polynomials_resident() {
    for log_n in 5..=14 {
        let n = 1usize << log_n;
        let cfg = BankConfig::new(n, 1, 30);
        for schedule in [DatapathSchedule::encryption(n, 3), DatapathSchedule::decryption(n, &[0, 1, 2])] {
            let t = simulate_pipeline(&schedule, &cfg).unwrap();
            assert_eq!(t.peak_resident_polys, 2, "N={n} {:?}", schedule.kind);
            assert_eq!(t.conflict_count, 0);
            assert_eq!(t.timeline.len(), schedule.steps.len());
            assert!(t.timeline.windows(2).all(|w| w[0].start <= w[1].start || w[0].op != w[1].op));
        }
    }
}

#[test]
fn pipeline_rejects_mismatched_config() {
    let cfg = BankConfig::new(64, 1, 30);
    assert!(matches!(simulate_pipeline(&DatapathSchedule::encryption(128, 1), &cfg), Err(Error::ConfigMismatch(_))));
    let plan = NttPlan::new(find_context::<u32>(128, 30).unwrap(), 1).unwrap();
    assert!(matches!(simulate_ntt(&plan, &cfg), Err(Error::ConfigMismatch(_))));
}

#[test]
fn calibration_rows_are_reported() {
    let rows = calibration_report().unwrap();
    assert_eq!(rows.iter().filter(|r| r.bfus == 1).count(), 5);
    for r in &rows {
        assert!(r.simulated_cycles >= r.ideal_issue_cycles);
        assert!(r.ratio > 0.0);
    }
}
