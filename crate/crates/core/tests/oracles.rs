//! Simulation-vs-analytic cross checks beyond the acceptance criteria.

use gwdiv_core::analytic::{
    db_to_lin, outage_curve, uplink_outage, uplink_outage_single, LinkScenario, SweepAxis,
};
use gwdiv_core::channel_model::{sample_pair, RainFadeParams};
use gwdiv_core::simulation::{run, stream_rng, sweep, SimConfig};
use gwdiv_core::switching::{
    step, switching_summary, transition_matrix, Gateway, SchemeKind, SwitchState,
};

fn base() -> LinkScenario {
    LinkScenario::illustrative(20.0).unwrap()
}

fn cfg(s: LinkScenario, scheme: SchemeKind, slots: u64, seed: u64) -> SimConfig {
    SimConfig {
        slots,
        seed,
        ..SimConfig::new(s, scheme)
    }
}

fn z_score(est: f64, p: f64, n: u64) -> f64 {
    (est - p) / (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn empirical_transitions_match_matrix() {
    let s = SweepAxis::MarginDb.apply(&base(), 6.0).unwrap();
    let summary = switching_summary(&s, 1.0).unwrap();
    let expected = transition_matrix(summary.p, summary.p12).unwrap();
    let cs = db_to_lin(s.cs_snr_ul_db);
    let theta = db_to_lin(s.switch_thresh_db);
    let mut rng = stream_rng(3, 0, 0);
    let mut counts = [[0u64; 6]; 6];
    let mut active = Gateway::One;
    let mut prev: Option<SwitchState> = None;
    let n = 2_000_000;
    for _ in 0..n {
        let f = sample_pair(&s.fade_ul, &mut rng);
        let (g1, g2) = (cs * f.g1_lin, cs * f.g2_lin);
        let state = SwitchState::classify(active, g1, g2, theta);
        let out = step(SchemeKind::Mssc, active, g1, g2, theta).unwrap();
        assert_eq!(out.active, state.active_gw());
        assert_eq!(out.switched, state.is_switch());
        if let Some(p) = prev {
            counts[(p.id() - 1) as usize][(state.id() - 1) as usize] += 1;
        }
        prev = Some(state);
        active = out.active;
    }
    for (i, row) in counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        for (j, &c) in row.iter().enumerate() {
            let p = expected[i][j];
            if p == 0.0 {
                assert_eq!(c, 0, "impossible transition {}->{}", i + 1, j + 1);
            } else {
                let z = z_score(c as f64 / total as f64, p, total);
                assert!(z.abs() < 4.0, "{}->{}: z = {z:.2}", i + 1, j + 1);
            }
        }
    }
}

#[test]
fn mssc_and_sc_share_outage_events_at_optimal_threshold() {
    let s = SweepAxis::MarginDb.apply(&base(), 7.0).unwrap();
    let sc = run(&cfg(s, SchemeKind::Sc, 500_000, 5)).unwrap();
    let mssc = run(&cfg(s, SchemeKind::Mssc, 500_000, 5)).unwrap();
    // Same stream, same slots: outage iff both branches are below threshold.
    assert_eq!(sc.outage_count, mssc.outage_count);
    assert!(mssc.switch_count < sc.switch_count);
}

#[test]
fn mssc_with_overestimated_threshold_matches_simulation() {
    let mut s = SweepAxis::MarginDb.apply(&base(), 10.0).unwrap();
    s.switch_thresh_db = s.outage_thresh_db + 3.0;
    let analytic = uplink_outage(&s, SchemeKind::Mssc).unwrap();
    let r = run(&cfg(s, SchemeKind::Mssc, 10_000_000, 17)).unwrap();
    assert!(
        r.outage_agrees(analytic, 3.0),
        "{} vs {analytic}",
        r.outage_est
    );
}

#[test]
fn ssc_outage_matches_simulation_off_optimum() {
    for offset in [-2.0, 2.0] {
        let mut s = SweepAxis::MarginDb.apply(&base(), 8.0).unwrap();
        s.switch_thresh_db = s.outage_thresh_db + offset;
        let analytic = uplink_outage(&s, SchemeKind::Ssc).unwrap();
        let r = run(&cfg(s, SchemeKind::Ssc, 4_000_000, 19)).unwrap();
        assert!(
            r.outage_agrees(analytic, 3.0),
            "offset {offset}: {} vs {analytic}",
            r.outage_est
        );
    }
}

#[test]
fn single_gateway_matches_simulation() {
    let s = SweepAxis::MarginDb.apply(&base(), 10.0).unwrap();
    let analytic = uplink_outage_single(&s).unwrap();
    let r = run(&cfg(s, SchemeKind::Single, 10_000_000, 23)).unwrap();
    let hw = r.outage_ci_halfwidth.unwrap();
    assert!((r.outage_est - analytic).abs() < 3.0 * hw);
}

#[test]
fn sc_switches_half_the_time() {
    let r = run(&cfg(base(), SchemeKind::Sc, 1_000_000, 29)).unwrap();
    assert!(r.switch_agrees(0.5, 3.0), "{}", r.switch_prob_est);
}

#[test]
fn asymmetric_margins_flagged_against_simulation() {
    // The MSSC decomposition assumes exchangeable branches; report how far it
    // drifts from the stationary simulation when the sites differ.
    let mut s = SweepAxis::MarginDb.apply(&base(), 8.0).unwrap();
    s.fade_ul = RainFadeParams::new(-0.2, 1.1, 0.3, 0.9, s.fade_ul.rho).unwrap();
    for offset in [0.0, 2.0, -2.0] {
        let mut t = s;
        t.switch_thresh_db = s.outage_thresh_db + offset;
        let analytic = uplink_outage(&t, SchemeKind::Mssc).unwrap();
        let r = run(&cfg(t, SchemeKind::Mssc, 2_000_000, 31)).unwrap();
        let z = z_score(r.outage_est, analytic, r.slots_used);
        println!("asymmetric margins, theta offset {offset:+}: analytic {analytic:.4e}, simulated {:.4e}, z = {z:.1}", r.outage_est);
        assert!((0.0..=1.0).contains(&analytic));
        if offset == 0.0 {
            // At theta = th the outage event is "both below" for any margins.
            assert!(z.abs() < 3.0);
        }
    }
}

#[test]
fn distance_sweep_non_increasing() {
    let distances = [20.0, 50.0, 100.0, 150.0];
    let s = SweepAxis::MarginDb.apply(&base(), 8.0).unwrap();
    let c = SimConfig {
        slots: 4_000_000,
        ..SimConfig::new(s, SchemeKind::Sc)
    };
    let mc = sweep(&c, SweepAxis::DistanceKm, &distances).unwrap();
    let an = outage_curve(&s, SchemeKind::Sc, SweepAxis::DistanceKm, &distances).unwrap();
    for w in mc.points.windows(2) {
        assert!(
            w[1].outage <= w[0].outage + w[1].ci_halfwidth.unwrap(),
            "{:?}",
            w
        );
    }
    for w in an.points.windows(2) {
        assert!(w[1].outage < w[0].outage);
    }
    for (m, a) in mc.points.iter().zip(&an.points) {
        assert!((m.outage - a.outage).abs() < 3.0 * (a.outage * (1.0 - a.outage) / 4e6).sqrt());
        assert_eq!(m.rho, a.rho);
    }
}

#[test]
fn theta_sweep_minimum_at_outage_threshold() {
    let s = SweepAxis::MarginDb.apply(&base(), 8.0).unwrap();
    let thetas: Vec<f64> = (-4..=4)
        .map(|k| s.outage_thresh_db + 1.5 * k as f64)
        .collect();
    let curve = sweep(
        &SimConfig {
            slots: 4_000_000,
            ..SimConfig::new(s, SchemeKind::Mssc)
        },
        SweepAxis::ThetaDb,
        &thetas,
    )
    .unwrap();
    let centre = curve.points[4];
    for p in &curve.points {
        // No other threshold beats theta = th by more than the combined CI.
        assert!(
            p.outage + p.ci_halfwidth.unwrap() + centre.ci_halfwidth.unwrap() >= centre.outage,
            "{p:?}"
        );
    }
    let best = curve
        .points
        .iter()
        .min_by(|a, b| a.outage.total_cmp(&b.outage))
        .unwrap();
    assert!((best.x - s.outage_thresh_db).abs() <= 1.5);
}

#[test]
fn worker_counts_agree() {
    let s = SweepAxis::MarginDb.apply(&base(), 6.0).unwrap();
    let one = run(&SimConfig {
        workers: 1,
        ..cfg(s, SchemeKind::Ssc, 1_000_000, 37)
    })
    .unwrap();
    let four = run(&SimConfig {
        workers: 4,
        ..cfg(s, SchemeKind::Ssc, 1_000_000, 37)
    })
    .unwrap();
    assert_ne!(one.outage_count, four.outage_count);
    let hw = one.outage_ci_halfwidth.unwrap() + four.outage_ci_halfwidth.unwrap();
    assert!((one.outage_est - four.outage_est).abs() <= hw);
}
