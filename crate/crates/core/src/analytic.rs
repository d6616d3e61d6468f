//! Outage probabilities by numerical integration.
//!
//! Uplink SNR of gateway `i` is `g_i = cs_ul * 10^(-A_i/10)`, so the event
//! `g_i <= u` is `A_i >= CS_ul - U` in dB. Every uplink probability below is
//! an orthant or rectangle probability of the bivariate lognormal and goes
//! through [`joint_exceed_prob`].

use std::cell::Cell;
use std::f64::consts::{LN_10, PI};

use crate::channel_model::{
    correlation_from_distance, joint_exceed_prob, LognormalParams, RainFadeParams, Site,
};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::switching::SchemeKind;

/// Relative width of the slice just above the outage threshold where the
/// conditional uplink outage is replaced by its bound of 1.
const E2E_SLICE: f64 = 1e-6;
const DOWNLINK_TAIL: f64 = 10.0;

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Operating point of a two-gateway forward link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkScenario {
    /// Clear-sky uplink SNR, dB.
    pub cs_snr_ul_db: f64,
    /// Clear-sky downlink SNR, dB.
    pub cs_snr_dl_db: f64,
    /// Outage threshold, dB.
    pub outage_thresh_db: f64,
    /// Switching threshold, dB.
    pub switch_thresh_db: f64,
    pub fade_ul: RainFadeParams,
    pub fade_dl: LognormalParams,
}

impl LinkScenario {
    /// Illustrative Q/V-band operating point with gateways `separation_km`
    /// apart. The lognormal parameters are not derived from a propagation
    /// model; the clear-sky SNRs are the 28.3 / 21.3 dB forward-link budget.
    pub fn illustrative(separation_km: f64) -> Result<Self> {
        let rho = correlation_from_distance(separation_km)?;
        Ok(Self {
            cs_snr_ul_db: 28.3,
            cs_snr_dl_db: 21.3,
            outage_thresh_db: 10.0,
            switch_thresh_db: 10.0,
            fade_ul: RainFadeParams::identical(-0.2, 1.1, rho)?,
            fade_dl: LognormalParams::new(-1.2, 0.9)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let snrs = [
            ("cs_snr_ul_db", self.cs_snr_ul_db),
            ("cs_snr_dl_db", self.cs_snr_dl_db),
            ("outage_thresh_db", self.outage_thresh_db),
            ("switch_thresh_db", self.switch_thresh_db),
        ];
        for (name, v) in snrs {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        let f = self.fade_ul;
        RainFadeParams::new(f.m1, f.s1, f.m2, f.s2, f.rho)?;
        LognormalParams::new(self.fade_dl.m, self.fade_dl.s)?;
        Ok(())
    }

    /// `CS_ul - TH`, the rain fade the uplink can absorb before outage.
    pub fn uplink_margin_db(&self) -> f64 {
        self.cs_snr_ul_db - self.outage_thresh_db
    }

    pub fn downlink_margin_db(&self) -> f64 {
        self.cs_snr_dl_db - self.outage_thresh_db
    }

    /// `Pr{g_site <= u}`.
    pub fn uplink_below(&self, site: Site, u_db: f64) -> Result<f64> {
        self.fade_ul
            .site(site)
            .exceed_prob(self.cs_snr_ul_db - u_db)
    }

    /// `Pr{g1 <= u1, g2 <= u2}`.
    pub fn uplink_joint_below(&self, u1_db: f64, u2_db: f64) -> Result<f64> {
        joint_exceed_prob(
            &self.fade_ul,
            self.cs_snr_ul_db - u1_db,
            self.cs_snr_ul_db - u2_db,
        )
    }
}

/// Single-gateway uplink outage `Pr{g1 < th}`.
pub fn uplink_outage_single(scenario: &LinkScenario) -> Result<f64> {
    scenario.uplink_below(Site::One, scenario.outage_thresh_db)
}

/// Selection-combining uplink outage `Pr{A1 > CS - TH, A2 > CS - TH}`.
pub fn uplink_outage_sc(scenario: &LinkScenario) -> Result<f64> {
    let th = scenario.outage_thresh_db;
    scenario.uplink_joint_below(th, th)
}

/// MSSC uplink outage at the scenario's switching threshold.
pub fn uplink_outage_mssc(scenario: &LinkScenario) -> Result<f64> {
    mssc_cdf(
        scenario,
        scenario.outage_thresh_db,
        scenario.switch_thresh_db,
    )
}

/// Stationary CDF `Pr{g_active <= u}` of the MSSC active-branch SNR with
/// switching threshold `theta`:
///
/// ```text
/// Pr{g1 <= min(theta, u), g2 <= theta}
///   + Pr{theta <= g1 <= u, g2 <= theta}
///   + Pr{theta <= g1 <= u}
/// ```
///
/// The last two terms vanish for `u <= theta`. Exact for exchangeable branches.
pub fn mssc_cdf(scenario: &LinkScenario, u_db: f64, theta_db: f64) -> Result<f64> {
    let both_low = scenario.uplink_joint_below(u_db.min(theta_db), theta_db)?;
    if u_db <= theta_db {
        return Ok(both_low);
    }
    let band_other_low = scenario.uplink_joint_below(u_db, theta_db)?
        - scenario.uplink_joint_below(theta_db, theta_db)?;
    let band =
        scenario.uplink_below(Site::One, u_db)? - scenario.uplink_below(Site::One, theta_db)?;
    Ok((both_low + band_other_low.max(0.0) + band.max(0.0)).clamp(0.0, 1.0))
}

/// Stationary CDF of the SSC active-branch SNR with threshold `theta`:
/// `Pr{theta <= g1 <= u} + Pr{g1 < theta, g2 <= u}` for exchangeable branches.
pub fn ssc_cdf(scenario: &LinkScenario, u_db: f64, theta_db: f64) -> Result<f64> {
    let band = if u_db > theta_db {
        scenario.uplink_below(Site::One, u_db)? - scenario.uplink_below(Site::One, theta_db)?
    } else {
        0.0
    };
    let fallback = scenario.uplink_joint_below(theta_db, u_db)?;
    Ok((band.max(0.0) + fallback).clamp(0.0, 1.0))
}

/// `Pr{g_h <= u}` for the SNR the scheme delivers to the satellite.
pub fn uplink_cdf(scenario: &LinkScenario, scheme: SchemeKind, u_db: f64) -> Result<f64> {
    match scheme {
        SchemeKind::Single => scenario.uplink_below(Site::One, u_db),
        SchemeKind::Sc => scenario.uplink_joint_below(u_db, u_db),
        SchemeKind::Mssc => mssc_cdf(scenario, u_db, scenario.switch_thresh_db),
        SchemeKind::Ssc => ssc_cdf(scenario, u_db, scenario.switch_thresh_db),
        SchemeKind::Mrc => domain("no analytic outage for MRC; use the simulation"),
    }
}

pub fn uplink_outage(scenario: &LinkScenario, scheme: SchemeKind) -> Result<f64> {
    uplink_cdf(scenario, scheme, scenario.outage_thresh_db)
}

/// Density of the downlink SNR `g_g = cs_dl * 10^(-A_g/10)` at linear `gamma_g`.
pub fn downlink_snr_pdf(scenario: &LinkScenario, gamma_g: f64) -> Result<f64> {
    if !(gamma_g.is_finite() && gamma_g > 0.0) {
        return domain(format!("downlink SNR must be positive, got {gamma_g}"));
    }
    if gamma_g >= db_to_lin(scenario.cs_snr_dl_db) {
        return Ok(0.0);
    }
    let a = scenario.cs_snr_dl_db - lin_to_db(gamma_g);
    Ok(scenario.fade_dl.pdf(a) * 10.0 / (gamma_g * LN_10))
}

/// Downlink outage `Pr{g_g < th}`.
pub fn downlink_outage(scenario: &LinkScenario) -> Result<f64> {
    scenario.fade_dl.exceed_prob(scenario.downlink_margin_db())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2eOutage {
    pub e2e: f64,
    pub uplink: f64,
    pub downlink: f64,
    /// Outage of a regenerative repeater, `P_DL (1 - P_UL) + P_UL`.
    pub regenerative_bound: f64,
}

/// End-to-end outage of the transparent link with selection on the uplink.
pub fn e2e_outage(scenario: &LinkScenario) -> Result<f64> {
    Ok(e2e_breakdown(scenario, SchemeKind::Sc)?.e2e)
}

pub fn e2e_outage_scheme(scenario: &LinkScenario, scheme: SchemeKind) -> Result<f64> {
    Ok(e2e_breakdown(scenario, scheme)?.e2e)
}

/// End-to-end outage `Pr{g_g g_h / (g_g + g_h + 1) <= th}` of a transparent
/// repeater whose uplink SNR `g_h` is delivered by `scheme`.
///
/// ```text
/// P_e2e = P_DL + Int_{th}^{cs_dl} P_UL(z(g)) f_g(g) dg,   z = th (g + 1) / (g - th)
/// ```
///
/// The integral is taken over the downlink log-attenuation. On the slice
/// `g in (th, th (1 + 1e-6)]` the conditional uplink outage is set to 1 and
/// the slice mass comes from the downlink CDF.
pub fn e2e_breakdown(scenario: &LinkScenario, scheme: SchemeKind) -> Result<E2eOutage> {
    scenario.validate()?;
    let uplink = uplink_outage(scenario, scheme)?;
    let downlink = downlink_outage(scenario)?;
    let regenerative_bound = downlink * (1.0 - uplink) + uplink;
    let th_db = scenario.outage_thresh_db;
    let every = |e2e| E2eOutage {
        e2e,
        uplink,
        downlink,
        regenerative_bound,
    };
    if th_db >= scenario.cs_snr_dl_db || th_db >= scenario.cs_snr_ul_db {
        return Ok(every(1.0));
    }

    let th = db_to_lin(th_db);
    let cs_ul = db_to_lin(scenario.cs_snr_ul_db);
    let dl = scenario.fade_dl;

    // Downlink attenuation at the upper edge of the near-threshold slice.
    let a_slice = scenario.cs_snr_dl_db - lin_to_db(th * (1.0 + E2E_SLICE));
    let slice_mass = if a_slice > 0.0 {
        dl.exceed_prob(a_slice)? - downlink
    } else {
        1.0 - downlink
    };

    let mut total = downlink + slice_mass.max(0.0);
    if a_slice > 0.0 {
        let t_lo = dl.m - DOWNLINK_TAIL * dl.s;
        let t_hi = a_slice.ln().min(dl.m + DOWNLINK_TAIL * dl.s);
        if t_hi > t_lo {
            let failure: Cell<Option<Error>> = Cell::new(None);
            let integrand = |t: f64| {
                let a = t.exp();
                let g = db_to_lin(scenario.cs_snr_dl_db - a);
                let z = th * (g + 1.0) / (g - th);
                let p_ul = if z >= cs_ul {
                    1.0
                } else {
                    match uplink_cdf(scenario, scheme, lin_to_db(z)) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.set(Some(e));
                            0.0
                        }
                    }
                };
                let u = (t - dl.m) / dl.s;
                p_ul * (-0.5 * u * u).exp() / (dl.s * (2.0 * PI).sqrt())
            };
            // Past this attenuation z exceeds cs_ul and P_UL is identically 1.
            let mut breaks = Vec::new();
            let g_sat = th * (cs_ul + 1.0) / (cs_ul - th);
            let a_sat = scenario.cs_snr_dl_db - lin_to_db(g_sat);
            if a_sat > 0.0 {
                breaks.push(a_sat.ln());
            }
            breaks.push(dl.m);
            let opts = QuadOptions {
                abs_tol: 1e-14,
                rel_tol: 1e-10,
                max_intervals: 2000,
            };
            let r = integrate(integrand, t_lo, t_hi, &breaks, opts)?;
            if let Some(e) = failure.take() {
                return Err(e);
            }
            total += r.value;
        }
    }
    Ok(every(total.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::MonteCarlo => "montecarlo",
        }
    }
}

/// Scenario parameter varied along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    /// Clear-sky uplink SNR, dB.
    ClearSkySnrDb,
    /// Uplink margin `CS_ul - TH`, dB. Moves the outage threshold and keeps
    /// the switching threshold at its offset from it.
    MarginDb,
    /// Gateway separation, km (sets `rho` from distance).
    DistanceKm,
    /// Switching threshold, dB.
    ThetaDb,
    Rho,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            Self::ClearSkySnrDb => "cs_snr_ul_db",
            Self::MarginDb => "margin_db",
            Self::DistanceKm => "distance_km",
            Self::ThetaDb => "theta_db",
            Self::Rho => "rho",
        }
    }

    pub fn apply(self, scenario: &LinkScenario, value: f64) -> Result<LinkScenario> {
        if !value.is_finite() {
            return Err(Error::Config(format!(
                "sweep value must be finite, got {value}"
            )));
        }
        let mut s = *scenario;
        match self {
            Self::ClearSkySnrDb => s.cs_snr_ul_db = value,
            Self::MarginDb => {
                let offset = s.switch_thresh_db - s.outage_thresh_db;
                s.outage_thresh_db = s.cs_snr_ul_db - value;
                s.switch_thresh_db = s.outage_thresh_db + offset;
            }
            Self::DistanceKm => {
                s.fade_ul = s.fade_ul.with_rho(correlation_from_distance(value)?)?
            }
            Self::ThetaDb => s.switch_thresh_db = value,
            Self::Rho => s.fade_ul = s.fade_ul.with_rho(value)?,
        }
        s.validate()?;
        Ok(s)
    }
}

/// Sweep values must be finite, non-empty and strictly monotone.
pub fn validate_sweep(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config("sweep has no points".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sweep values must be finite".into()));
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Config(
            "sweep values must be strictly monotone".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub outage: f64,
    /// 95% half-width; `None` for analytic points and for Monte Carlo points
    /// with too few outage events to trust the normal approximation.
    pub ci_halfwidth: Option<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub scheme: SchemeKind,
    pub method: Method,
    pub axis: SweepAxis,
    pub points: Vec<CurvePoint>,
    pub outage_thresh_db: f64,
    pub switch_thresh_db: f64,
    pub separation_km: Option<f64>,
}

impl OutageCurve {
    pub fn new(
        scheme: SchemeKind,
        method: Method,
        axis: SweepAxis,
        base: &LinkScenario,
        points: Vec<CurvePoint>,
    ) -> Result<Self> {
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        validate_sweep(&xs)?;
        if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p.outage)) {
            return Err(Error::Numerical {
                message: format!("outage {} at x = {} is not a probability", p.outage, p.x),
                achieved: p.outage,
            });
        }
        Ok(Self {
            scheme,
            method,
            axis,
            points,
            outage_thresh_db: base.outage_thresh_db,
            switch_thresh_db: base.switch_thresh_db,
            separation_km: None,
        })
    }

    pub fn with_separation(mut self, separation_km: f64) -> Self {
        self.separation_km = Some(separation_km);
        self
    }

    /// Abscissa where the curve crosses `target`, interpolating linearly in
    /// `log10(outage)`. Returns the first crossing.
    pub fn crossing(&self, target: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (p, q) = (w[0], w[1]);
            let (lp, lq, lt) = (p.outage.log10(), q.outage.log10(), target.log10());
            let brackets = (lp - lt) * (lq - lt) <= 0.0 && lp.is_finite() && lq.is_finite();
            if !brackets {
                return None;
            }
            if lp == lq {
                return Some(p.x);
            }
            Some(p.x + (lt - lp) / (lq - lp) * (q.x - p.x))
        })
    }
}

/// Analytic outage along `axis`.
pub fn outage_curve(
    scenario: &LinkScenario,
    scheme: SchemeKind,
    axis: SweepAxis,
    values: &[f64],
) -> Result<OutageCurve> {
    validate_sweep(values)?;
    let points = values
        .iter()
        .map(|&x| {
            let s = axis.apply(scenario, x)?;
            Ok(CurvePoint {
                x,
                outage: uplink_outage(&s, scheme)?,
                ci_halfwidth: None,
                rho: s.fade_ul.rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    OutageCurve::new(scheme, Method::Analytic, axis, scenario, points)
}
