//! Slot-by-slot Monte Carlo of the diversity schemes.
//!
//! Each worker owns a ChaCha8 stream keyed by `(seed, point, worker)`; the
//! stream id packs `point` into the high 32 bits and `worker` into the low
//! 32, so every sweep point and worker draws from a disjoint 2^64-block
//! sequence of the same seeded generator. Workers share only the immutable
//! configuration and return integer counts, so a report is bit-identical
//! for a fixed `(seed, slots, workers)`.

use std::thread;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{
    db_to_lin, validate_sweep, CurvePoint, LinkScenario, Method, OutageCurve, SweepAxis,
};
use crate::channel_model::{attenuation_db_to_gain, sample_pair};
use crate::error::{Error, Result};
use crate::switching::{step_unchecked, Gateway, SchemeKind};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;
/// Below this many events a normal-approximation interval is not reported.
pub const MIN_EVENTS_FOR_CI: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Measured slots, summed over workers.
    pub slots: u64,
    pub seed: u64,
    pub workers: usize,
    /// Warm-up slots each worker discards before measuring.
    pub burn_in: u64,
    pub scheme: SchemeKind,
    pub scenario: LinkScenario,
    /// Measure the end-to-end equivalent SNR instead of the uplink SNR.
    pub e2e: bool,
}

impl SimConfig {
    pub fn new(scenario: LinkScenario, scheme: SchemeKind) -> Self {
        Self {
            slots: 1_000_000,
            seed: 0x5EED_CAFE,
            workers: 1,
            burn_in: 10_000,
            scheme,
            scenario,
            e2e: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots < 1_000 {
            return Err(Error::Config(format!(
                "at least 1000 slots required, got {}",
                self.slots
            )));
        }
        if self.burn_in >= self.slots {
            return Err(Error::Config(format!(
                "burn-in ({}) must be shorter than the run ({} slots)",
                self.burn_in, self.slots
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("at least one worker required".into()));
        }
        if self.workers as u64 > u32::MAX as u64 {
            return Err(Error::Config("too many workers".into()));
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub outage_est: f64,
    /// 95% half-width, `None` when fewer than ten outages were seen.
    pub outage_ci_halfwidth: Option<f64>,
    pub switch_prob_est: f64,
    pub switch_ci_halfwidth: Option<f64>,
    pub outage_count: u64,
    pub switch_count: u64,
    pub slots_used: u64,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_ms: u128,
}

impl SimReport {
    /// Binomial standard error of an estimate `p` over this run's slots.
    pub fn std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.slots_used as f64).sqrt()
    }

    /// Whether `analytic` lies within `k` binomial standard errors (taken at
    /// the analytic value) of the outage estimate.
    pub fn outage_agrees(&self, analytic: f64, k: f64) -> bool {
        (self.outage_est - analytic).abs() <= k * self.std_error(analytic)
    }

    pub fn switch_agrees(&self, analytic: f64, k: f64) -> bool {
        (self.switch_prob_est - analytic).abs() <= k * self.std_error(analytic)
    }
}

fn ci_halfwidth(count: u64, n: u64) -> Option<f64> {
    if count < MIN_EVENTS_FOR_CI {
        return None;
    }
    let p = count as f64 / n as f64;
    Some(Z_95 * (p * (1.0 - p) / n as f64).sqrt())
}

/// Generator for one worker of one sweep point.
pub fn stream_rng(seed: u64, point: u32, worker: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | worker as u64);
    rng
}

#[derive(Default, Clone, Copy)]
struct Counts {
    outages: u64,
    switches: u64,
}

fn run_worker(config: &SimConfig, mut rng: ChaCha8Rng, slots: u64) -> Counts {
    let s = &config.scenario;
    let cs_ul = db_to_lin(s.cs_snr_ul_db);
    let cs_dl = db_to_lin(s.cs_snr_dl_db);
    let th = db_to_lin(s.outage_thresh_db);
    let theta = db_to_lin(s.switch_thresh_db);
    let mut active = Gateway::One;
    let mut counts = Counts::default();
    for slot in 0..config.burn_in + slots {
        let fade = sample_pair(&s.fade_ul, &mut rng);
        let out = step_unchecked(
            config.scheme,
            active,
            cs_ul * fade.g1_lin,
            cs_ul * fade.g2_lin,
            theta,
        );
        active = out.active;
        let snr = if config.e2e {
            let g = cs_dl * attenuation_db_to_gain(s.fade_dl.sample(&mut rng));
            let h = out.selected_snr;
            g * h / (g + h + 1.0)
        } else {
            out.selected_snr
        };
        if slot >= config.burn_in {
            counts.outages += u64::from(snr < th);
            counts.switches += u64::from(out.switched);
        }
    }
    counts
}

fn run_point(config: &SimConfig, point: u32) -> Result<SimReport> {
    config.validate()?;
    let start = Instant::now();
    let workers = config.workers as u64;
    let share = |w: u64| config.slots / workers + u64::from(w < config.slots % workers);
    let counts: Vec<Counts> = if workers == 1 {
        vec![run_worker(
            config,
            stream_rng(config.seed, point, 0),
            config.slots,
        )]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let rng = stream_rng(config.seed, point, w as u32);
                    scope.spawn(move || run_worker(config, rng, share(w)))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation worker panicked"))
                .collect()
        })
    };
    let total = counts.iter().fold(Counts::default(), |acc, c| Counts {
        outages: acc.outages + c.outages,
        switches: acc.switches + c.switches,
    });
    let n = config.slots;
    Ok(SimReport {
        outage_est: total.outages as f64 / n as f64,
        outage_ci_halfwidth: ci_halfwidth(total.outages, n),
        switch_prob_est: total.switches as f64 / n as f64,
        switch_ci_halfwidth: ci_halfwidth(total.switches, n),
        outage_count: total.outages,
        switch_count: total.switches,
        slots_used: n,
        seed: config.seed,
        workers: config.workers,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

/// Simulate `config.slots` slots of the configured scheme.
pub fn run(config: &SimConfig) -> Result<SimReport> {
    run_point(config, 0)
}

/// One run per sweep value; point `k` uses stream block `k`, so a
/// single-point sweep reproduces [`run`].
pub fn sweep_reports(
    config: &SimConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<(LinkScenario, SimReport)>> {
    validate_sweep(values)?;
    if values.len() > u32::MAX as usize {
        return Err(Error::Config("too many sweep points".into()));
    }
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let scenario = axis.apply(&config.scenario, v)?;
            let report = run_point(
                &SimConfig {
                    scenario,
                    ..*config
                },
                k as u32,
            )?;
            Ok((scenario, report))
        })
        .collect()
}

pub fn sweep(config: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<OutageCurve> {
    let points = sweep_reports(config, axis, values)?
        .into_iter()
        .zip(values)
        .map(|((s, r), &x)| CurvePoint {
            x,
            outage: r.outage_est,
            ci_halfwidth: r.outage_ci_halfwidth,
            rho: s.fade_ul.rho,
        })
        .collect();
    OutageCurve::new(
        config.scheme,
        Method::MonteCarlo,
        axis,
        &config.scenario,
        points,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(scheme: SchemeKind, slots: u64) -> SimConfig {
        SimConfig {
            slots,
            burn_in: 1_000,
            ..SimConfig::new(LinkScenario::illustrative(20.0).unwrap(), scheme)
        }
    }

    #[test]
    fn no_margin_is_always_outage() {
        let mut c = config(SchemeKind::Mssc, 20_000);
        c.scenario.outage_thresh_db = c.scenario.cs_snr_ul_db + 0.5;
        let r = run(&c).unwrap();
        assert_eq!(r.outage_est, 1.0);
        assert_eq!(r.outage_ci_halfwidth, Some(0.0));
    }

    #[test]
    fn deterministic_for_fixed_triple() {
        for workers in [1, 3] {
            let c = SimConfig {
                workers,
                ..config(SchemeKind::Sc, 50_000)
            };
            let a = run(&c).unwrap();
            let b = run(&c).unwrap();
            assert_eq!(
                (a.outage_count, a.switch_count),
                (b.outage_count, b.switch_count)
            );
            assert_eq!(a.outage_est, b.outage_est);
        }
    }

    #[test]
    fn streams_are_distinct() {
        use rand::Rng;
        let draws = |p, w| -> Vec<u64> {
            let mut r = stream_rng(9, p, w);
            (0..4).map(|_| r.random()).collect()
        };
        assert_eq!(draws(0, 0), draws(0, 0));
        assert_ne!(draws(0, 0), draws(0, 1));
        assert_ne!(draws(0, 0), draws(1, 0));
        assert_ne!(draws(1, 0), draws(0, 1));
    }

    #[test]
    fn mrc_never_worse_than_sc_pathwise() {
        for margin in [4.0, 8.0, 12.0] {
            let mut sc = config(SchemeKind::Sc, 200_000);
            sc.scenario = SweepAxis::MarginDb.apply(&sc.scenario, margin).unwrap();
            let mrc = SimConfig {
                scheme: SchemeKind::Mrc,
                ..sc
            };
            let (a, b) = (run(&sc).unwrap(), run(&mrc).unwrap());
            assert!(b.outage_count <= a.outage_count, "margin {margin}");
            assert_eq!(b.switch_count, 0);
        }
    }

    #[test]
    fn single_never_switches() {
        let r = run(&config(SchemeKind::Single, 10_000)).unwrap();
        assert_eq!(r.switch_prob_est, 0.0);
        assert_eq!(r.switch_ci_halfwidth, None);
    }

    #[test]
    fn ci_formula_and_unreliable_flag() {
        assert_eq!(ci_halfwidth(9, 1000), None);
        let hw = ci_halfwidth(100, 10_000).unwrap();
        assert!((hw - 1.96 * (0.01f64 * 0.99 / 10_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_config() {
        let c = config(SchemeKind::Mssc, 10_000);
        assert!(run(&SimConfig {
            slots: 999,
            burn_in: 0,
            ..c
        })
        .is_err());
        assert!(run(&SimConfig {
            burn_in: 10_000,
            ..c
        })
        .is_err());
        assert!(run(&SimConfig { workers: 0, ..c }).is_err());
        let mut bad = c;
        bad.scenario.cs_snr_ul_db = f64::NAN;
        assert!(matches!(run(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn single_point_sweep_equals_run() {
        let c = config(SchemeKind::Mssc, 30_000);
        let curve = sweep(&c, SweepAxis::ThetaDb, &[c.scenario.switch_thresh_db]).unwrap();
        let r = run(&c).unwrap();
        assert_eq!(curve.points[0].outage, r.outage_est);
        assert_eq!(curve.points[0].ci_halfwidth, r.outage_ci_halfwidth);
        assert_eq!(curve.method, Method::MonteCarlo);
        assert!(sweep(&c, SweepAxis::ThetaDb, &[]).is_err());
    }

    #[test]
    fn partition_covers_all_slots() {
        let c = SimConfig {
            workers: 7,
            ..config(SchemeKind::Ssc, 10_003)
        };
        let r = run(&c).unwrap();
        assert_eq!(r.slots_used, 10_003);
        assert_eq!(r.workers, 7);
    }
}
