mod common;

use primevm::attractors::TrainedRegister;
use primevm::substrate::{assert_topology_limits, NetworkTopology};
use primevm::switchbox::*;
use std::sync::OnceLock;

fn register() -> &'static TrainedRegister {
    static R: OnceLock<TrainedRegister> = OnceLock::new();
    R.get_or_init(|| common::desk_register(50, 41).0)
}

const EIGHT: [&str; 8] = ["r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7"];

fn sym(i: usize) -> String {
    format!("s{i}")
}

#[test]
fn four_registers_match_the_relay_figure() {
    let sb = Switchbox::build(register(), &["r1", "r2", "r3", "r4"], 2, Timing::default()).unwrap();
    let l = sb.layout();
    assert_eq!(l.o_relays.len(), 7);
    assert_eq!(l.i_relays.len(), 7);
    // r1 -> r4 climbs three outbound relays and descends three inbound ones.
    let path = l.path(0, 3);
    assert_eq!(path.len(), 6);
    assert_eq!(path[2], l.o_relays[6]);
    assert_eq!(path[3], l.i_relays[6]);
}

#[test]
fn two_registers_share_one_root() {
    let sb = Switchbox::build(register(), &["a", "b"], 2, Timing::default()).unwrap();
    assert_eq!(sb.layout().node_count(), 3);
    assert_eq!(sb.layout().path(0, 1).len(), 4);
    assert!(Switchbox::build(register(), &["a"], 2, Timing::default()).is_err());
}

#[test]
fn sixteen_registers_respect_limits() {
    let names: Vec<String> = (0..16).map(|i| format!("r{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut topo = NetworkTopology::new();
    let layout = build_switchbox(&mut topo, register().weights(), &refs, 2).unwrap();
    assert_eq!(layout.o_relays.len(), 31);
    assert_eq!(layout.i_relays.len(), 31);
    assert!(assert_topology_limits(&topo, common::KAPPA).is_empty());
}

#[test]
fn schedule_text() {
    let sb = Switchbox::build(register(), &["r1", "r2", "r3", "r4"], 2, Timing::default()).unwrap();
    let sched = transfer_schedule(sb.layout(), 0, 1, &sb.timing).unwrap();
    assert_eq!(sched.ticks(), 24);
    let text = sched.to_text(sb.network().topology());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "0 inhibit r2");
    assert!(lines[1].starts_with("12 release "));
    assert_eq!(lines.last(), Some(&"24 restore all"));
    assert!(transfer_schedule(sb.layout(), 2, 2, &sb.timing).is_err());
}

#[test]
fn transfer_walkthrough() {
    let mut sb = Switchbox::build(register(), &["r1", "r2", "r3", "r4"], 2, Timing::default()).unwrap();
    sb.load("r1", "s3").unwrap();
    sb.transfer("r1", "r4").unwrap();
    assert_eq!(sb.held("r4").unwrap().as_deref(), Some("s3"));
    assert_eq!(sb.held("r1").unwrap().as_deref(), Some("s3"));
    sb.transfer("r1", "r4").unwrap();
    assert_eq!(sb.held("r4").unwrap().as_deref(), Some("s3"));
    assert!(sb.is_empty("r2").unwrap());
    sb.transfer("r2", "r4").unwrap();
    assert!(sb.is_empty("r4").unwrap());
    assert!(sb.transfer("r1", "nope").is_err());
}

#[test]
fn clear_touches_only_its_register() {
    let mut sb = Switchbox::build(register(), &["r1", "r2", "r3", "r4"], 2, Timing::default()).unwrap();
    for (i, r) in ["r1", "r2", "r3", "r4"].iter().enumerate() {
        sb.load(r, &sym(i + 5)).unwrap();
    }
    sb.clear("r2").unwrap();
    assert!(sb.is_empty("r2").unwrap());
    sb.idle(30).unwrap();
    assert!(sb.is_empty("r2").unwrap());
    sb.clear("r2").unwrap();
    assert!(sb.is_empty("r2").unwrap());
    for (i, r) in ["r1", "r3", "r4"].iter().enumerate() {
        let k = [5, 7, 8][i];
        assert_eq!(sb.held(r).unwrap(), Some(sym(k)));
    }
}

#[test]
fn inhibited_relays_isolate_registers() {
    let mut sb = Switchbox::build(register(), &EIGHT, 2, Timing::default()).unwrap();
    for (i, r) in EIGHT.iter().enumerate() {
        sb.load(r, &sym(3 * i)).unwrap();
    }
    sb.idle(100).unwrap();
    for (i, r) in EIGHT.iter().enumerate() {
        assert_eq!(sb.held(r).unwrap(), Some(sym(3 * i)));
    }
}

/// Every ordered pair of eight registers, every one of 50 symbols; the
/// other six registers hold distinct symbols and must keep them.
#[test]
fn exhaustive_transfers() {
    let mut sb = Switchbox::build(register(), &EIGHT, 2, Timing::default()).unwrap();
    let mut failures = Vec::new();
    let mut count = 0;
    for s in 0..50 {
        for a in 0..8 {
            for b in 0..8 {
                if a == b {
                    continue;
                }
                for (i, r) in EIGHT.iter().enumerate() {
                    sb.load(r, &sym((s + 7 * i) % 50)).unwrap();
                }
                let moved = sym((s + 7 * a) % 50);
                sb.transfer(EIGHT[a], EIGHT[b]).unwrap();
                count += 1;
                for (i, r) in EIGHT.iter().enumerate() {
                    let want = if i == b { moved.clone() } else { sym((s + 7 * i) % 50) };
                    let got = sb.held(r).unwrap();
                    if got.as_deref() != Some(want.as_str()) {
                        failures.push((s, a, b, i, got));
                    }
                }
            }
        }
    }
    assert_eq!(count, 2800);
    assert!(failures.is_empty(), "{} failures, first {:?}", failures.len(), &failures[..failures.len().min(5)]);
}
