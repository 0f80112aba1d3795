use std::f64::consts::PI;

use stq_lru::exec::Execution;
use stq_lru::gates::{format_sequence, parse_sequence, sinl_longrange_sequence, GateDescriptor};
use stq_lru::lattice::{build_lattice, run, run_repetitions, LatticeParams, LruMode};
use stq_lru::lru::{assemble, verify, LruKind};
use stq_lru::search::{search, SearchOptions};
use stq_lru::spin::C64;
use stq_lru::templates::template;

#[test]
fn sequence_text_round_trip_keeps_verdict() {
    let seq = sinl_longrange_sequence();
    let text = format_sequence(&seq);
    let back = parse_sequence(&text).unwrap();
    assert_eq!(back, seq);
    assert!(verify(&assemble(&back), LruKind::Sinl, 1e-10).unwrap().pass);
}

#[test]
fn closed_form_sil_sequence() {
    // Rounded version of a synthesized SIL-5 solution; ψ = √15/4 makes the
    // outer rotations exactly 2π long.
    let e = 15f64.sqrt() / 4.0;
    let text = format!("U(-0.5,{e})\nX(D,0.5)\nX(A,0.75)\nU(0.5,0)\nX(D,0.5)\nX(A,0.25)\nU(0.5,{e})\n");
    let v = verify(&assemble(&parse_sequence(&text).unwrap()), LruKind::Sil, 1e-10).unwrap();
    assert!(v.pass);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let close = |z: C64, phase: f64| (z - C64::from_polar(h, phase)).norm() < 1e-9;
    assert!(close(v.alpha1, -3.0 * PI / 4.0));
    assert!(close(v.beta1, PI / 4.0));
    assert!(close(v.alpha2, -3.0 * PI / 4.0));
    assert!(close(v.beta2, -3.0 * PI / 4.0));
}

#[test]
fn searched_solution_survives_text_export() {
    let t = template("sinl-3").unwrap();
    let report = search(&t, LruKind::Sinl, &SearchOptions { restarts: 10, ..Default::default() }).unwrap();
    let sol = report.solutions.first().expect("a solution");
    let text = format_sequence(&t.instantiate(&sol.params).unwrap());
    let back = parse_sequence(&text).unwrap();
    assert!(verify(&assemble(&back), LruKind::Sinl, 1e-8).unwrap().pass);
    assert!(matches!(back[0], GateDescriptor::Entangle { .. }));
}

#[test]
fn stationary_fraction_independent_of_size() {
    let p = 2e-3;
    let mut means = Vec::new();
    for n in [3, 5, 7] {
        let cfg = build_lattice(LatticeParams { rounds: 4000, burn_in: 50, seed: n as u64, ..LatticeParams::new(n, p, LruMode::Sil) })
            .unwrap();
        let r = run(&cfg);
        assert!(r.z_score.unwrap().abs() < 4.0, "n = {n}: {:?}", r.pre_lru);
        means.push((r.pre_lru.mean, r.pre_lru.std_error));
    }
    for w in means.windows(2) {
        let (a, b) = (w[0], w[1]);
        assert!((a.0 - b.0).abs() < 4.0 * (a.1 * a.1 + b.1 * b.1).sqrt());
    }
}

#[test]
fn repetitions_match_between_execution_modes() {
    let cfg = build_lattice(LatticeParams { rounds: 200, ..LatticeParams::new(3, 0.01, LruMode::Sinl) }).unwrap();
    let a = run_repetitions(&cfg, 4, Execution::Parallel);
    let b = run_repetitions(&cfg, 4, Execution::Sequential);
    assert_eq!(a, b);
    assert_ne!(a[0].pre_lru, a[1].pre_lru);
}
