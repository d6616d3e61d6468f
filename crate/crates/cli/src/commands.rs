use gwdiv_core::analytic::{
    downlink_outage, e2e_breakdown, uplink_outage, LinkScenario, SweepAxis,
};
use gwdiv_core::link_budget::clear_sky_snr;
use gwdiv_core::link_budget::BudgetEntry;
use gwdiv_core::simulation::{sweep_reports, SimConfig, SimReport};
use gwdiv_core::switching::{switching_summary, SchemeKind};

use crate::error::CliError;
use crate::output::{num, opt_prob, prob, Report};
use crate::scenario::{BudgetBlock, LoadedScenario};
use crate::sweep::{axis_of, resolve};
use crate::{BudgetArgs, Common, E2eArgs, MethodArg, OutageArgs, SwitchingArgs, ValidateArgs};

const DEFAULT_SLOTS: u64 = 1_000_000;
const DEFAULT_BURN_IN: u64 = 10_000;
const DEFAULT_SEED: u64 = 20_261_014;

/// Everything a command needs once flags and the scenario file are merged.
struct Context {
    loaded: LoadedScenario,
    base: LinkScenario,
    separation_km: f64,
    slots: u64,
    seed: u64,
    workers: usize,
    burn_in: u64,
}

impl Context {
    fn new(common: &Common) -> Result<Self, CliError> {
        let loaded = LoadedScenario::load(&common.scenario)?;
        let overrides = common.overrides();
        let base = loaded.link_scenario_with(&overrides)?;
        let sim = &loaded.file.simulation;
        let slots = common.slots.or(sim.slots).unwrap_or(DEFAULT_SLOTS);
        Ok(Self {
            separation_km: loaded.separation_km(&overrides),
            slots,
            seed: common.seed.or(sim.seed).unwrap_or(DEFAULT_SEED),
            workers: common.workers.or(sim.workers).unwrap_or(1),
            burn_in: common
                .burn_in
                .or(sim.burn_in)
                .unwrap_or(DEFAULT_BURN_IN.min(slots / 10)),
            base,
            loaded,
        })
    }

    fn sim_config(&self, scheme: SchemeKind, e2e: bool) -> Result<SimConfig, CliError> {
        let mut cfg = SimConfig::new(self.base, scheme);
        cfg.slots = self.slots;
        cfg.seed = self.seed;
        cfg.workers = self.workers;
        cfg.burn_in = self.burn_in;
        cfg.e2e = e2e;
        cfg.validate()?;
        Ok(cfg)
    }

    fn report(&self, command: &str, columns: &[&'static str], simulated: bool) -> Report {
        let s = &self.base;
        let mut r = Report::new(command, columns);
        r.meta(format!(
            "scenario={} sha256={}",
            self.loaded.label, self.loaded.sha256
        ));
        r.meta(format!(
            "cs_snr_ul_db={} cs_snr_dl_db={} outage_thresh_db={} switch_thresh_db={} separation_km={} rho={}",
            s.cs_snr_ul_db,
            s.cs_snr_dl_db,
            s.outage_thresh_db,
            s.switch_thresh_db,
            self.separation_km,
            s.fade_ul.rho
        ));
        r.meta(format!(
            "uplink_fade m1={} s1={} m2={} s2={} downlink_fade m={} s={}",
            s.fade_ul.m1, s.fade_ul.s1, s.fade_ul.m2, s.fade_ul.s2, s.fade_dl.m, s.fade_dl.s
        ));
        if simulated {
            r.meta(format!(
                "seed={} slots={} workers={} burn_in={}",
                self.seed, self.slots, self.workers, self.burn_in
            ));
        }
        r
    }

    fn points(&self, axis: SweepAxis, values: &[f64]) -> Result<Vec<LinkScenario>, CliError> {
        values
            .iter()
            .map(|&v| Ok(axis.apply(&self.base, v)?))
            .collect()
    }
}

fn simulate(
    ctx: &Context,
    scheme: SchemeKind,
    e2e: bool,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SimReport>, CliError> {
    let cfg = ctx.sim_config(scheme, e2e)?;
    Ok(sweep_reports(&cfg, axis, values)?
        .into_iter()
        .map(|(_, r)| r)
        .collect())
}

fn check_schemes(schemes: &[SchemeKind], method: MethodArg) -> Result<(), CliError> {
    if schemes.is_empty() {
        return Err(CliError::Config("no schemes given".into()));
    }
    for &s in schemes {
        if s == SchemeKind::Mrc && method == MethodArg::Analytic {
            return Err(CliError::Config(
                "mrc has no analytic outage here; use --method mc or both".into(),
            ));
        }
    }
    Ok(())
}

fn scheme_list(schemes: &[SchemeKind]) -> String {
    schemes
        .iter()
        .map(|s| s.name())
        .collect::<Vec<_>>()
        .join(";")
}

fn or_none<T: Clone>(
    run: bool,
    n: usize,
    f: impl FnOnce() -> Result<Vec<T>, CliError>,
) -> Result<Vec<Option<T>>, CliError> {
    if run {
        Ok(f()?.into_iter().map(Some).collect())
    } else {
        Ok(vec![None; n])
    }
}

pub fn outage(a: &OutageArgs) -> Result<(), CliError> {
    let ctx = Context::new(&a.common)?;
    check_schemes(&a.schemes, a.method)?;
    let axis = match (a.theta_sweep, a.axis) {
        (true, _) => SweepAxis::ThetaDb,
        (false, Some(x)) => axis_of(x),
        (false, None) => SweepAxis::MarginDb,
    };
    let values = resolve(&a.range, axis, &ctx.base)?;
    let points = ctx.points(axis, &values)?;

    let mut report = ctx.report(
        "outage",
        &[
            "abscissa",
            "outage_analytic",
            "outage_mc",
            "ci_halfwidth",
            "scheme",
            "rho",
        ],
        a.method.mc(),
    );
    report.meta(format!(
        "axis={} scheme={} method={}",
        axis.label(),
        scheme_list(&a.schemes),
        a.method.name()
    ));
    for &scheme in &a.schemes {
        let analytic = or_none(
            a.method.analytic() && scheme != SchemeKind::Mrc,
            points.len(),
            || {
                points
                    .iter()
                    .map(|p| Ok(uplink_outage(p, scheme)?))
                    .collect()
            },
        )?;
        let mc = or_none(a.method.mc(), points.len(), || {
            simulate(&ctx, scheme, false, axis, &values)
        })?;
        for (((x, p), an), sim) in values.iter().zip(&points).zip(&analytic).zip(&mc) {
            report.row(vec![
                num(*x),
                opt_prob(*an),
                opt_prob(sim.as_ref().map(|r| r.outage_est)),
                opt_prob(sim.as_ref().and_then(|r| r.outage_ci_halfwidth)),
                scheme.to_string(),
                num(p.fade_ul.rho),
            ]);
        }
    }
    report.emit(a.common.out.as_deref(), !a.common.no_timestamp)
}

pub fn e2e(a: &E2eArgs) -> Result<(), CliError> {
    check_schemes(&a.schemes, a.method)?;
    let distances: Vec<Option<f64>> = match &a.distances {
        Some(d) if d.is_empty() => return Err(CliError::Config("--distances is empty".into())),
        Some(d) => d.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let axis = a.axis.map(axis_of).unwrap_or(SweepAxis::ClearSkySnrDb);
    let mut report: Option<Report> = None;

    for distance in distances {
        let mut common = a.common.clone();
        if distance.is_some() {
            common.distance_km = distance;
        }
        let ctx = Context::new(&common)?;
        let values = resolve(&a.range, axis, &ctx.base)?;
        let points = ctx.points(axis, &values)?;
        let report = report.get_or_insert_with(|| {
            let mut r = ctx.report(
                "e2e",
                &[
                    "abscissa",
                    "outage_analytic",
                    "outage_mc",
                    "ci_halfwidth",
                    "scheme",
                    "rho",
                    "downlink_outage",
                    "e2e_outage",
                    "regenerative_bound",
                    "e2e_mc",
                    "e2e_ci_halfwidth",
                ],
                a.method.mc(),
            );
            r.meta(format!(
                "axis={} schemes={} method={}",
                axis.label(),
                scheme_list(&a.schemes),
                a.method.name()
            ));
            if let Some(d) = &a.distances {
                let d: Vec<String> = d.iter().map(|x| num(*x)).collect();
                r.meta(format!("distances_km={}", d.join(";")));
            }
            r.meta("outage_* columns are the uplink; e2e_* columns the end-to-end link");
            r
        });

        for &scheme in &a.schemes {
            let uplink_mc = or_none(a.method.mc(), points.len(), || {
                simulate(&ctx, scheme, false, axis, &values)
            })?;
            let e2e_mc = or_none(a.method.mc(), points.len(), || {
                simulate(&ctx, scheme, true, axis, &values)
            })?;
            for (i, p) in points.iter().enumerate() {
                let (up, dl, e2e, bound) = if !a.method.analytic() {
                    (None, None, None, None)
                } else if scheme == SchemeKind::Mrc {
                    (None, Some(downlink_outage(p)?), None, None)
                } else {
                    let b = e2e_breakdown(p, scheme)?;
                    (
                        Some(b.uplink),
                        Some(b.downlink),
                        Some(b.e2e),
                        Some(b.regenerative_bound),
                    )
                };
                let (um, em) = (uplink_mc[i].as_ref(), e2e_mc[i].as_ref());
                report.row(vec![
                    num(values[i]),
                    opt_prob(up),
                    opt_prob(um.map(|r| r.outage_est)),
                    opt_prob(um.and_then(|r| r.outage_ci_halfwidth)),
                    scheme.to_string(),
                    num(p.fade_ul.rho),
                    opt_prob(dl),
                    opt_prob(e2e),
                    opt_prob(bound),
                    opt_prob(em.map(|r| r.outage_est)),
                    opt_prob(em.and_then(|r| r.outage_ci_halfwidth)),
                ]);
            }
        }
    }
    report
        .expect("at least one distance")
        .emit(a.common.out.as_deref(), !a.common.no_timestamp)
}

pub fn switching(a: &SwitchingArgs) -> Result<(), CliError> {
    let ctx = Context::new(&a.common)?;
    let slot_seconds = a.slot_seconds.unwrap_or_else(|| ctx.loaded.slot_seconds());
    let axis = SweepAxis::ThetaDb;
    let values = resolve(&a.range, axis, &ctx.base)?;
    let points = ctx.points(axis, &values)?;
    let summaries = points
        .iter()
        .map(|p| Ok(switching_summary(p, slot_seconds)?))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut sims: Vec<Vec<Option<SimReport>>> = Vec::new();
    for scheme in [SchemeKind::Mssc, SchemeKind::Ssc, SchemeKind::Sc] {
        sims.push(or_none(a.method.mc(), points.len(), || {
            simulate(&ctx, scheme, false, axis, &values)
        })?);
    }

    let mut report = ctx.report(
        "switching",
        &[
            "theta_db",
            "p",
            "p12",
            "p_sw_mssc",
            "p_sw_ssc",
            "p_sw_sc",
            "r_sw_mssc",
            "sim_mssc",
            "ci_mssc",
            "sim_ssc",
            "ci_ssc",
            "sim_sc",
            "ci_sc",
        ],
        a.method.mc(),
    );
    report.meta(format!(
        "axis=theta_db slot_seconds={slot_seconds} method={}",
        a.method.name()
    ));
    for (i, m) in summaries.iter().enumerate() {
        let mut row = vec![num(values[i]), prob(m.p), prob(m.p12)];
        if a.method.analytic() {
            row.extend([
                prob(m.switch_prob),
                prob(m.ssc_switch_prob),
                prob(m.sc_switch_prob),
                prob(m.switch_rate),
            ]);
        } else {
            row.extend(std::iter::repeat_n(String::new(), 4));
        }
        for sim in &sims {
            let r = sim[i].as_ref();
            row.push(opt_prob(r.map(|r| r.switch_prob_est)));
            row.push(opt_prob(r.and_then(|r| r.switch_ci_halfwidth)));
        }
        report.row(row);
    }
    report.emit(a.common.out.as_deref(), !a.common.no_timestamp)
}

pub fn budget(a: &BudgetArgs) -> Result<(), CliError> {
    let mut entries: Vec<(String, BudgetEntry, Option<f64>)> = Vec::new();
    let mut report = Report::new(
        "budget",
        &[
            "link",
            "eirp_dbw",
            "free_space_loss_db",
            "g_over_t_dbk",
            "bandwidth_hz",
            "boltzmann_dbw",
            "clear_sky_snr_db",
            "configured_snr_db",
        ],
    );
    match (a.eirp_dbw, a.fsl_db, a.gt_dbk, a.bandwidth_hz) {
        (Some(eirp), Some(fsl), Some(gt), Some(bw)) => {
            entries.push(("custom".into(), BudgetEntry::new(eirp, fsl, gt, bw), None));
        }
        _ => {
            let loaded = LoadedScenario::load(&a.scenario)?;
            report.meta(format!(
                "scenario={} sha256={}",
                loaded.label, loaded.sha256
            ));
            let f = &loaded.file;
            let blocks: [(&str, Option<BudgetBlock>, Option<f64>); 2] = [
                ("uplink", f.budget.uplink, f.link.cs_snr_ul_db),
                ("downlink", f.budget.downlink, f.link.cs_snr_dl_db),
            ];
            for (name, block, configured) in blocks {
                if let Some(b) = block {
                    entries.push((name.into(), b.entry(), configured));
                }
            }
            if entries.is_empty() {
                return Err(CliError::Config(format!(
                    "scenario {} has no [budget] blocks",
                    loaded.label
                )));
            }
        }
    }
    for (name, e, configured) in entries {
        let snr = clear_sky_snr(&e)?;
        report.row(vec![
            name,
            num(e.eirp_dbw),
            num(e.free_space_loss_db),
            num(e.g_over_t_dbk),
            num(e.bandwidth_hz),
            num(e.boltzmann_dbw),
            format!("{snr:.4}"),
            configured.map(num).unwrap_or_default(),
        ]);
    }
    report.emit(a.out.as_deref(), !a.no_timestamp)
}

/// Free text as a single CSV cell.
fn csv_text(t: &str) -> String {
    let t = t.trim_matches('"');
    if t.contains([',', '"', '\n']) {
        format!("\"{}\"", t.replace('"', "\"\""))
    } else {
        t.to_string()
    }
}

/// Standard-error multiple beyond which `validate --check` fails.
const CHECK_K: f64 = 3.0;

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let ctx = Context::new(&a.common)?;
    let s = ctx.base;
    let mut report = ctx.report(
        "validate",
        &["quantity", "value", "mc", "ci_halfwidth", "z"],
        a.check,
    );

    let kv = |name: &str, v: String| {
        vec![
            name.to_string(),
            v,
            String::new(),
            String::new(),
            String::new(),
        ]
    };
    let f = &ctx.loaded.file;
    for (key, text) in [("name", &f.name), ("description", &f.description)] {
        if let Some(t) = text {
            report.row(kv(key, csv_text(t)));
        }
    }
    if let Some(notes) = &f.propagation {
        for (link, table) in notes {
            match table.as_table() {
                Some(t) => {
                    for (k, v) in t {
                        report.row(kv(
                            &format!("propagation.{link}.{k}"),
                            csv_text(&v.to_string()),
                        ));
                    }
                }
                None => report.row(kv(
                    &format!("propagation.{link}"),
                    csv_text(&table.to_string()),
                )),
            }
        }
    }
    report.row(kv("uplink_margin_db", num(s.uplink_margin_db())));
    report.row(kv("downlink_margin_db", num(s.downlink_margin_db())));
    report.row(kv("rho", num(s.fade_ul.rho)));
    report.row(kv("downlink_outage", prob(downlink_outage(&s)?)));

    let mut failures = Vec::new();
    for scheme in [
        SchemeKind::Single,
        SchemeKind::Sc,
        SchemeKind::Mssc,
        SchemeKind::Ssc,
    ] {
        let analytic = uplink_outage(&s, scheme)?;
        let mut row = kv(&format!("uplink_outage_{scheme}"), prob(analytic));
        if a.check {
            let cfg = ctx.sim_config(scheme, false)?;
            let r = gwdiv_core::simulation::run(&cfg)?;
            let z = (r.outage_est - analytic) / r.std_error(analytic);
            if !r.outage_agrees(analytic, CHECK_K) {
                failures.push(format!("{scheme}: z = {z:.2}"));
            }
            row[2] = prob(r.outage_est);
            row[3] = opt_prob(r.outage_ci_halfwidth);
            row[4] = format!("{z:.3}");
        }
        report.row(row);
    }
    for scheme in [SchemeKind::Single, SchemeKind::Sc, SchemeKind::Mssc] {
        let b = e2e_breakdown(&s, scheme)?;
        report.row(kv(&format!("e2e_outage_{scheme}"), prob(b.e2e)));
    }
    report.emit(a.common.out.as_deref(), !a.common.no_timestamp)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "analytic and simulated outage disagree beyond {CHECK_K} standard errors ({})",
            failures.join(", ")
        )))
    }
}
