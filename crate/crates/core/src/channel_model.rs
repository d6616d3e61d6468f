//! Rain-fade statistics for a pair of gateways.
//!
//! Rain attenuation `A` (dB) at each site is lognormal: `ln A ~ N(m, s²)`.
//! The two sites' log-attenuations are jointly Gaussian with correlation
//! `rho`, which depends on the ground separation of the gateways.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Gaussian tails beyond this many standard deviations are dropped.
const TAIL_CUTOFF: f64 = 10.0;

/// Standard normal upper tail `Q(x) = Pr{Z > x}`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Lognormal law of a single site's attenuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    /// Mean of `ln A`.
    pub m: f64,
    /// Standard deviation of `ln A`.
    pub s: f64,
}

impl LognormalParams {
    pub fn new(m: f64, s: f64) -> Result<Self> {
        if !m.is_finite() {
            return domain(format!("lognormal mean must be finite, got {m}"));
        }
        if !(s.is_finite() && s > 0.0) {
            return domain(format!("lognormal std-dev must be positive, got {s}"));
        }
        Ok(Self { m, s })
    }

    /// Standardized threshold `(ln a - m) / s`; `-inf` for `a <= 0`.
    pub fn standardize(&self, a_db: f64) -> f64 {
        if a_db <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (a_db.ln() - self.m) / self.s
        }
    }

    /// `Pr{A > a_db}`, which is 1 for non-positive thresholds.
    pub fn exceed_prob(&self, a_db: f64) -> Result<f64> {
        if !a_db.is_finite() {
            return domain(format!("attenuation threshold must be finite, got {a_db}"));
        }
        if a_db <= 0.0 {
            return Ok(1.0);
        }
        Ok(normal_tail(self.standardize(a_db)))
    }

    /// Density of `A` at `a_db` (zero for `a_db <= 0`).
    pub fn pdf(&self, a_db: f64) -> f64 {
        if a_db <= 0.0 {
            return 0.0;
        }
        let u = self.standardize(a_db);
        (-0.5 * u * u).exp() / (a_db * self.s * (2.0 * PI).sqrt())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.m + self.s * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    One,
    Two,
}

/// Joint lognormal law of the two feeder-link attenuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainFadeParams {
    pub m1: f64,
    pub m2: f64,
    pub s1: f64,
    pub s2: f64,
    /// Correlation of `ln A1` and `ln A2`, in `[0, 1]`. The value 1 is only
    /// usable by the sampler; probability routines reject it.
    pub rho: f64,
}

impl RainFadeParams {
    pub fn new(m1: f64, s1: f64, m2: f64, s2: f64, rho: f64) -> Result<Self> {
        LognormalParams::new(m1, s1)?;
        LognormalParams::new(m2, s2)?;
        if !(0.0..=1.0).contains(&rho) {
            return domain(format!("correlation must lie in [0, 1], got {rho}"));
        }
        Ok(Self {
            m1,
            m2,
            s1,
            s2,
            rho,
        })
    }

    /// Identical margins at both sites.
    pub fn identical(m: f64, s: f64, rho: f64) -> Result<Self> {
        Self::new(m, s, m, s, rho)
    }

    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::new(self.m1, self.s1, self.m2, self.s2, rho)
    }

    pub fn site(&self, site: Site) -> LognormalParams {
        match site {
            Site::One => LognormalParams {
                m: self.m1,
                s: self.s1,
            },
            Site::Two => LognormalParams {
                m: self.m2,
                s: self.s2,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteGeometry {
    pub separation_km: f64,
}

impl SiteGeometry {
    pub fn new(separation_km: f64) -> Result<Self> {
        if !(separation_km.is_finite() && separation_km >= 0.0) {
            return domain(format!(
                "gateway separation must be >= 0 km, got {separation_km}"
            ));
        }
        Ok(Self { separation_km })
    }

    pub fn correlation(&self) -> f64 {
        correlation_from_distance(self.separation_km).expect("validated separation")
    }
}

/// One slot's fading realisation for both gateways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub a1_db: f64,
    pub a2_db: f64,
    pub g1_lin: f64,
    pub g2_lin: f64,
}

/// Spatial correlation of log rain attenuation for sites `separation_km` apart.
pub fn correlation_from_distance(separation_km: f64) -> Result<f64> {
    if !(separation_km.is_finite() && separation_km >= 0.0) {
        return domain(format!(
            "gateway separation must be >= 0 km, got {separation_km}"
        ));
    }
    let d = separation_km;
    Ok(0.94 * (-d / 30.0).exp() + 0.06 * (-(d / 500.0).powi(2)).exp())
}

/// Linear power gain `10^(-a/10)` for an attenuation of `a_db`.
pub fn attenuation_db_to_gain(a_db: f64) -> f64 {
    10f64.powf(-a_db / 10.0)
}

pub fn gain_to_attenuation_db(gain: f64) -> f64 {
    -10.0 * gain.log10()
}

/// `Pr{A_site > a_db}`.
pub fn marginal_exceed_prob(params: &RainFadeParams, site: Site, a_db: f64) -> Result<f64> {
    params.site(site).exceed_prob(a_db)
}

/// `Pr{A1 > a1_db, A2 > a2_db}`.
///
/// With `b_i = (ln a_i - m_i) / s_i` this is
///
/// ```text
/// 1/(2 sqrt(2 pi)) * Int_{b2}^{inf} exp(-x^2/2) erfc((b1 - rho x) / sqrt(2 (1 - rho^2))) dx
/// ```
///
/// evaluated by adaptive Gauss-Kronrod on `x` truncated to ten standard
/// deviations. A non-positive threshold makes that site's event certain.
pub fn joint_exceed_prob(params: &RainFadeParams, a1_db: f64, a2_db: f64) -> Result<f64> {
    if !(a1_db.is_finite() && a2_db.is_finite()) {
        return domain(format!(
            "attenuation thresholds must be finite, got ({a1_db}, {a2_db})"
        ));
    }
    let rho = params.rho;
    if rho >= 1.0 {
        return domain("joint exceedance is singular at rho = 1");
    }
    match (a1_db <= 0.0, a2_db <= 0.0) {
        (true, true) => return Ok(1.0),
        (true, false) => return marginal_exceed_prob(params, Site::Two, a2_db),
        (false, true) => return marginal_exceed_prob(params, Site::One, a1_db),
        (false, false) => {}
    }
    let b1 = params.site(Site::One).standardize(a1_db);
    let b2 = params.site(Site::Two).standardize(a2_db);
    Ok(bivariate_upper_orthant(b1, b2, rho)?.clamp(0.0, 1.0))
}

/// `Pr{Z1 > b1, Z2 > b2}` for standard normals with correlation `rho` in `[0, 1)`.
pub(crate) fn bivariate_upper_orthant(b1: f64, b2: f64, rho: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(normal_tail(b1) * normal_tail(b2));
    }
    let lo = b2.max(-TAIL_CUTOFF);
    let hi = lo.max(0.0) + TAIL_CUTOFF;
    if lo >= hi {
        return Ok(0.0);
    }
    let scale = (2.0 * (1.0 - rho * rho)).sqrt();
    let integrand = |x: f64| (-0.5 * x * x).exp() * libm::erfc((b1 - rho * x) / scale);
    // erfc switches from 2 to 0 around x = b1 / rho.
    let knee = b1 / rho;
    let r = integrate(integrand, lo, hi, &[knee], QuadOptions::default())?;
    Ok(r.value / (2.0 * (2.0 * PI).sqrt()))
}

/// Draw one slot of correlated fading.
///
/// `(z1, z2)` is built from two independent standard normals through the
/// Cholesky factor of `[[1, rho], [rho, 1]]`; `rho = 1` gives `z2 = z1`.
pub fn sample_pair<R: Rng + ?Sized>(params: &RainFadeParams, rng: &mut R) -> ChannelSample {
    let n1: f64 = rng.sample(StandardNormal);
    let z2 = if params.rho >= 1.0 {
        n1
    } else {
        let n2: f64 = rng.sample(StandardNormal);
        params.rho * n1 + (1.0 - params.rho * params.rho).sqrt() * n2
    };
    let a1_db = (params.m1 + params.s1 * n1).exp();
    let a2_db = (params.m2 + params.s2 * z2).exp();
    ChannelSample {
        a1_db,
        a2_db,
        g1_lin: attenuation_db_to_gain(a1_db),
        g2_lin: attenuation_db_to_gain(a2_db),
    }
}
