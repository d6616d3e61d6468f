//! Gateway selection rules and the Markov-chain view of MSSC switching.
//!
//! The chain has six states (active gateway before and after the decision,
//! together with which branches are below the switching threshold):
//!
//! | state | active now | active before | condition             |
//! |-------|------------|---------------|-----------------------|
//! | 1     | GW1        | GW1           | g1 >= theta           |
//! | 2     | GW1        | GW1           | g1 < theta, g2 <= theta |
//! | 3     | GW2        | GW1           | g1 < theta, g2 > theta  |
//! | 4     | GW2        | GW2           | g2 >= theta           |
//! | 5     | GW2        | GW2           | g2 < theta, g1 <= theta |
//! | 6     | GW1        | GW2           | g2 < theta, g1 > theta  |
//!
//! States 3 and 6 are the switching states. "Below threshold" is strict.

use std::fmt;
use std::str::FromStr;

use crate::analytic::LinkScenario;
use crate::channel_model::{joint_exceed_prob, marginal_exceed_prob, Site};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Modified switch-and-stay: leave the active gateway only when it is
    /// below threshold and the idle one is above.
    Mssc,
    /// Switch-and-stay: leave the active gateway whenever it is below threshold.
    Ssc,
    /// Selection: always transmit from the stronger gateway.
    Sc,
    /// Gateway 1 only.
    Single,
    /// Both gateways, coherently combined.
    Mrc,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [Self::Mssc, Self::Ssc, Self::Sc, Self::Single, Self::Mrc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mssc => "mssc",
            Self::Ssc => "ssc",
            Self::Sc => "sc",
            Self::Single => "single",
            Self::Mrc => "mrc",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scheme '{s}' (expected mssc, ssc, sc, single or mrc)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gateway {
    One,
    Two,
}

impl Gateway {
    pub fn other(self) -> Self {
        match self {
            Self::One => Self::Two,
            Self::Two => Self::One,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub active: Gateway,
    pub switched: bool,
    /// SNR delivered to the satellite this slot (linear).
    pub selected_snr: f64,
}

/// One slot's gateway decision.
pub fn step(
    scheme: SchemeKind,
    prev_active: Gateway,
    snr1: f64,
    snr2: f64,
    theta: f64,
) -> Result<StepOutcome> {
    for (name, v) in [("snr1", snr1), ("snr2", snr2), ("theta", theta)] {
        if !(v.is_finite() && v > 0.0) {
            return domain(format!("{name} must be positive and finite, got {v}"));
        }
    }
    Ok(step_unchecked(scheme, prev_active, snr1, snr2, theta))
}

#[inline]
pub(crate) fn step_unchecked(
    scheme: SchemeKind,
    prev: Gateway,
    snr1: f64,
    snr2: f64,
    theta: f64,
) -> StepOutcome {
    let snr_of = |gw: Gateway| match gw {
        Gateway::One => snr1,
        Gateway::Two => snr2,
    };
    let active = match scheme {
        SchemeKind::Mssc => SwitchState::classify(prev, snr1, snr2, theta).active_gw(),
        SchemeKind::Ssc => {
            if snr_of(prev) < theta {
                prev.other()
            } else {
                prev
            }
        }
        SchemeKind::Sc => {
            if snr1 > snr2 {
                Gateway::One
            } else if snr2 > snr1 {
                Gateway::Two
            } else {
                prev
            }
        }
        SchemeKind::Single => Gateway::One,
        SchemeKind::Mrc => {
            return StepOutcome {
                active: Gateway::One,
                switched: false,
                selected_snr: snr1 + snr2,
            };
        }
    };
    StepOutcome {
        active,
        switched: active != prev,
        selected_snr: snr_of(active),
    }
}

/// A state of the six-state MSSC chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchState(u8);

impl SwitchState {
    pub fn from_id(state_id: u8) -> Result<Self> {
        if (1..=6).contains(&state_id) {
            Ok(Self(state_id))
        } else {
            domain(format!("switch state id must be in 1..=6, got {state_id}"))
        }
    }

    /// State entered from `prev_active` given this slot's branch SNRs.
    pub fn classify(prev_active: Gateway, snr1: f64, snr2: f64, theta: f64) -> Self {
        let (own, other) = match prev_active {
            Gateway::One => (snr1, snr2),
            Gateway::Two => (snr2, snr1),
        };
        let offset = match prev_active {
            Gateway::One => 0,
            Gateway::Two => 3,
        };
        let local = if own >= theta {
            1
        } else if other <= theta {
            2
        } else {
            3
        };
        Self(offset + local)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// Gateway transmitting in this state.
    pub fn active_gw(self) -> Gateway {
        match self.0 {
            1 | 2 | 6 => Gateway::One,
            _ => Gateway::Two,
        }
    }

    pub fn is_switch(self) -> bool {
        matches!(self.0, 3 | 6)
    }
}

pub type TransitionMatrix = [[f64; 6]; 6];

/// MSSC transition matrix for `p = Pr{g1 < theta}` and
/// `p12 = Pr{g1 < theta, g2 < theta}`.
pub fn transition_matrix(p: f64, p12: f64) -> Result<TransitionMatrix> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&p12) {
        return domain(format!(
            "probabilities must lie in [0, 1], got p = {p}, p12 = {p12}"
        ));
    }
    if p12 > p {
        return domain(format!(
            "joint probability p12 = {p12} exceeds marginal p = {p}"
        ));
    }
    let from_gw1 = [1.0 - p, p12, p - p12, 0.0, 0.0, 0.0];
    let from_gw2 = [0.0, 0.0, 0.0, 1.0 - p, p12, p - p12];
    Ok([from_gw1, from_gw1, from_gw2, from_gw2, from_gw2, from_gw1])
}

/// Stationary row vector of `matrix` by power iteration from the uniform
/// distribution, stopped once `|pi P - pi|_inf <= 1e-12`.
pub fn stationary_distribution(matrix: &TransitionMatrix) -> Result<[f64; 6]> {
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 100_000;
    let mut pi = [1.0 / 6.0; 6];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let mut next = [0.0; 6];
        for (i, row) in matrix.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                next[j] += pi[i] * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if residual <= TOL {
            return Ok(pi);
        }
    }
    Err(Error::Numerical {
        message: "power iteration did not reach a stationary distribution".into(),
        achieved: residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSummary {
    /// `Pr{g1 < theta}`.
    pub p: f64,
    /// `Pr{g1 < theta, g2 < theta}`.
    pub p12: f64,
    pub stationary: [f64; 6],
    /// MSSC switching probability per slot, `pi3 + pi6`.
    pub switch_prob: f64,
    /// MSSC switches per second.
    pub switch_rate: f64,
    pub ssc_switch_prob: f64,
    pub sc_switch_prob: f64,
    pub slot_seconds: f64,
}

impl MarkovSummary {
    pub fn switch_prob_of(&self, scheme: SchemeKind) -> f64 {
        match scheme {
            SchemeKind::Mssc => self.switch_prob,
            SchemeKind::Ssc => self.ssc_switch_prob,
            SchemeKind::Sc => self.sc_switch_prob,
            SchemeKind::Single | SchemeKind::Mrc => 0.0,
        }
    }

    pub fn switch_rate_of(&self, scheme: SchemeKind) -> f64 {
        self.switch_prob_of(scheme) / self.slot_seconds
    }
}

/// Switching statistics at the scenario's switching threshold.
///
/// The SC value of 0.5 assumes exchangeable branches; for asymmetric
/// margins only the simulated frequency is meaningful.
pub fn switching_summary(scenario: &LinkScenario, slot_seconds: f64) -> Result<MarkovSummary> {
    if !(slot_seconds.is_finite() && slot_seconds > 0.0) {
        return domain(format!(
            "slot length must be positive, got {slot_seconds} s"
        ));
    }
    scenario.validate()?;
    let margin = scenario.cs_snr_ul_db - scenario.switch_thresh_db;
    let p = marginal_exceed_prob(&scenario.fade_ul, Site::One, margin)?;
    let p12 = joint_exceed_prob(&scenario.fade_ul, margin, margin)?.min(p);
    let stationary = stationary_distribution(&transition_matrix(p, p12)?)?;
    let switch_prob = stationary[2] + stationary[5];
    Ok(MarkovSummary {
        p,
        p12,
        stationary,
        switch_prob,
        switch_rate: switch_prob / slot_seconds,
        ssc_switch_prob: p,
        sc_switch_prob: 0.5,
        slot_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix6, Vector6};
    use proptest::prelude::*;

    // Independent route: solve pi (P - I) = 0 with sum(pi) = 1 by LU.
    fn stationary_by_lu(m: &TransitionMatrix) -> [f64; 6] {
        let mut a = Matrix6::<f64>::zeros();
        for i in 0..6 {
            for j in 0..6 {
                a[(j, i)] = m[i][j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..6 {
            a[(5, j)] = 1.0;
        }
        let mut b = Vector6::zeros();
        b[5] = 1.0;
        let x = a.lu().solve(&b).expect("irreducible chain");
        [x[0], x[1], x[2], x[3], x[4], x[5]]
    }

    #[test]
    fn mssc_examples() {
        let theta = 2.0;
        let o = step(
            SchemeKind::Mssc,
            Gateway::One,
            0.5 * theta,
            0.8 * theta,
            theta,
        )
        .unwrap();
        assert_eq!(
            (o.active, o.switched, o.selected_snr),
            (Gateway::One, false, 0.5 * theta)
        );
        assert_eq!(
            SwitchState::classify(Gateway::One, 0.5 * theta, 0.8 * theta, theta).id(),
            2
        );

        let o = step(
            SchemeKind::Mssc,
            Gateway::One,
            0.5 * theta,
            2.0 * theta,
            theta,
        )
        .unwrap();
        assert_eq!(
            (o.active, o.switched, o.selected_snr),
            (Gateway::Two, true, 2.0 * theta)
        );
        assert_eq!(
            SwitchState::classify(Gateway::One, 0.5 * theta, 2.0 * theta, theta).id(),
            3
        );
    }

    #[test]
    fn ssc_ignores_idle_branch() {
        let o = step(SchemeKind::Ssc, Gateway::One, 0.5, 0.1, 1.0).unwrap();
        assert_eq!(
            (o.active, o.switched, o.selected_snr),
            (Gateway::Two, true, 0.1)
        );
        let o = step(SchemeKind::Ssc, Gateway::Two, 0.1, 1.5, 1.0).unwrap();
        assert!(!o.switched);
    }

    #[test]
    fn sc_picks_stronger_and_keeps_on_tie() {
        let o = step(SchemeKind::Sc, Gateway::One, 0.3, 0.4, 10.0).unwrap();
        assert_eq!(
            (o.active, o.switched, o.selected_snr),
            (Gateway::Two, true, 0.4)
        );
        let o = step(SchemeKind::Sc, Gateway::Two, 0.7, 0.7, 10.0).unwrap();
        assert_eq!((o.active, o.switched), (Gateway::Two, false));
    }

    #[test]
    fn single_and_mrc() {
        let o = step(SchemeKind::Single, Gateway::One, 0.1, 9.0, 1.0).unwrap();
        assert_eq!(
            (o.active, o.switched, o.selected_snr),
            (Gateway::One, false, 0.1)
        );
        let o = step(SchemeKind::Mrc, Gateway::One, 0.1, 9.0, 1.0).unwrap();
        assert!(!o.switched);
        assert_eq!(o.selected_snr, 9.1);
    }

    #[test]
    fn step_rejects_non_positive_inputs() {
        assert!(step(SchemeKind::Mssc, Gateway::One, 0.0, 1.0, 1.0).is_err());
        assert!(step(SchemeKind::Sc, Gateway::One, 1.0, -1.0, 1.0).is_err());
        assert!(step(SchemeKind::Ssc, Gateway::One, 1.0, 1.0, 0.0).is_err());
        assert!(step(SchemeKind::Ssc, Gateway::One, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn table_rows() {
        let th = 1.0;
        let cases = [
            (Gateway::One, 2.0, 0.1, 1),
            (Gateway::One, 0.5, 0.5, 2),
            (Gateway::One, 0.5, 1.0, 2),
            (Gateway::One, 0.5, 1.5, 3),
            (Gateway::Two, 0.1, 2.0, 4),
            (Gateway::Two, 0.5, 0.5, 5),
            (Gateway::Two, 1.0, 0.5, 5),
            (Gateway::Two, 1.5, 0.5, 6),
        ];
        for (prev, g1, g2, id) in cases {
            let s = SwitchState::classify(prev, g1, g2, th);
            assert_eq!(s.id(), id, "{prev:?} {g1} {g2}");
            assert_eq!(s.is_switch(), id == 3 || id == 6);
            let expected_gw = if matches!(id, 1 | 2 | 6) {
                Gateway::One
            } else {
                Gateway::Two
            };
            assert_eq!(s.active_gw(), expected_gw);
        }
        assert!(SwitchState::from_id(0).is_err());
        assert!(SwitchState::from_id(7).is_err());
        assert_eq!(SwitchState::from_id(6).unwrap().active_gw(), Gateway::One);
    }

    #[test]
    fn matrix_edge_cases() {
        let m = transition_matrix(0.0, 0.0).unwrap();
        assert_eq!(m[0], [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(m[3], [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let pi = stationary_distribution(&m).unwrap();
        assert_eq!(pi[2] + pi[5], 0.0);

        let m = transition_matrix(1.0, 1.0).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        assert!(pi[1] + pi[4] > 1.0 - 1e-15);
        assert_eq!(pi[2] + pi[5], 0.0);

        // Period-two chain 3 <-> 6.
        let pi = stationary_distribution(&transition_matrix(1.0, 0.0).unwrap()).unwrap();
        assert!((pi[2] - 0.5).abs() < 1e-15 && (pi[5] - 0.5).abs() < 1e-15);

        assert!(transition_matrix(0.2, 0.3).is_err());
        assert!(transition_matrix(1.2, 0.3).is_err());
        assert!(transition_matrix(0.2, -0.1).is_err());
    }

    #[test]
    fn switch_probability_example() {
        let m = transition_matrix(0.2, 0.05).unwrap();
        let oracle = stationary_by_lu(&m);
        assert!((oracle[2] + oracle[5] - 0.15).abs() < 1e-12);
        let pi = stationary_distribution(&m).unwrap();
        assert!((pi[2] + pi[5] - 0.15).abs() < 1e-12);
        for (a, b) in pi.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scheme_names_parse() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert_eq!("MSSC".parse::<SchemeKind>().unwrap(), SchemeKind::Mssc);
        assert!("egc".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn summary_limits() {
        let base = LinkScenario::illustrative(20.0).unwrap();
        let indep = LinkScenario {
            fade_ul: base.fade_ul.with_rho(0.0).unwrap(),
            ..base
        };
        let s = switching_summary(&indep, 1.0).unwrap();
        assert!((s.switch_prob - s.p * (1.0 - s.p)).abs() < 1e-14);

        let como = LinkScenario {
            fade_ul: base.fade_ul.with_rho(1.0 - 1e-10).unwrap(),
            ..base
        };
        let s = switching_summary(&como, 1.0).unwrap();
        assert!(s.switch_prob < 1e-4 * s.p, "{} vs p {}", s.switch_prob, s.p);

        let s = switching_summary(&base, 0.5).unwrap();
        assert!((s.switch_rate - 2.0 * s.switch_prob).abs() < 1e-15);
        assert!((s.switch_prob - (s.p - s.p12)).abs() < 1e-12);
        assert_eq!(s.sc_switch_prob, 0.5);
        assert_eq!(s.ssc_switch_prob, s.p);
        assert!(switching_summary(&base, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn matrix_rows_are_stochastic(p in 0.0f64..=1.0, frac in 0.0f64..=1.0) {
            let p12 = p * frac;
            let m = transition_matrix(p, p12).unwrap();
            for row in m {
                prop_assert!(row.iter().all(|&v| v >= 0.0));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }

        #[test]
        fn stationary_is_fixed_point(p in 0.001f64..=0.999, frac in 0.0f64..=1.0) {
            let m = transition_matrix(p, p * frac).unwrap();
            let pi = stationary_distribution(&m).unwrap();
            prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for j in 0..6 {
                let next: f64 = (0..6).map(|i| pi[i] * m[i][j]).sum();
                prop_assert!((next - pi[j]).abs() < 1e-12);
                prop_assert!(pi[j] >= 0.0);
            }
            prop_assert!((pi[2] + pi[5] - (p - p * frac)).abs() < 1e-10);
        }
    }
}
