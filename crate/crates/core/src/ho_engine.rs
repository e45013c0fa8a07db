//! BER-driven handover decisions and handover probability estimators.
//!
//! [`decide_handover`] runs the four-mode procedure in a fixed order,
//! with later assignments overriding earlier ones:
//!
//! 1. serving BER ≥ `T_hh`: any direct link with BER below the serving BER
//!    and at most `T_hh` selects HHO; a direct link below `T_hs` then
//!    selects SHO instead.
//! 2. serving BER in `(T_hh − ε, T_hh + ε]` and a non-direct link below
//!    `T_hh`: RIS_PP.
//! 3. active connections above the load threshold and a non-direct link
//!    below `T_hh`: RIS_CB.
//!
//! The probability estimators count events over paired realizations and
//! report the union both directly and through inclusion–exclusion, in
//! integer counts so the two agree exactly.

use std::collections::BTreeMap;

use crate::error::{invalid, Result};

pub type LinkId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    Direct,
    NonDirect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMeasurement {
    pub link_id: LinkId,
    pub kind: LinkKind,
    pub ber: f64,
}

impl LinkMeasurement {
    pub fn new(link_id: LinkId, kind: LinkKind, ber: f64) -> Result<Self> {
        check_ber(ber)?;
        Ok(Self { link_id, kind, ber })
    }

    pub fn direct(link_id: LinkId, ber: f64) -> Result<Self> {
        Self::new(link_id, LinkKind::Direct, ber)
    }

    pub fn non_direct(link_id: LinkId, ber: f64) -> Result<Self> {
        Self::new(link_id, LinkKind::NonDirect, ber)
    }
}

fn check_ber(ber: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&ber) {
        return Err(invalid(format!("BER must lie in [0, 0.5], got {ber}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoThresholds {
    pub t_hh: f64,
    pub t_hs: f64,
    pub epsilon: f64,
    /// Active-connection count above which cell breathing applies.
    pub load_threshold: u32,
}

impl HoThresholds {
    pub fn new(t_hh: f64, t_hs: f64, epsilon: f64, load_threshold: u32) -> Result<Self> {
        if !(t_hh < 0.5) || !(t_hs > 0.0) || !(t_hs < t_hh) {
            return Err(invalid(format!(
                "thresholds must satisfy 0 < t_hs < t_hh < 0.5, got t_hs={t_hs}, t_hh={t_hh}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < t_hh) {
            return Err(invalid(format!(
                "BER margin must satisfy 0 < epsilon < t_hh, got {epsilon}"
            )));
        }
        Ok(Self {
            t_hh,
            t_hs,
            epsilon,
            load_threshold,
        })
    }

    /// `T_hh − ε < ber ≤ T_hh + ε`.
    pub fn in_pp_margin(&self, ber: f64) -> bool {
        self.t_hh - self.epsilon < ber && ber <= self.t_hh + self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingState {
    pub serving_link: LinkMeasurement,
    pub active_connections: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HoMode {
    Hho,
    Sho,
    RisCb,
    RisPp,
    NoHandover,
}

impl HoMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HoMode::Hho => "HHO",
            HoMode::Sho => "SHO",
            HoMode::RisCb => "RIS_CB",
            HoMode::RisPp => "RIS_PP",
            HoMode::NoHandover => "NoHandover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoDecision {
    pub mode: HoMode,
    pub chosen_link: Option<LinkId>,
}

impl HoDecision {
    pub const NONE: HoDecision = HoDecision {
        mode: HoMode::NoHandover,
        chosen_link: None,
    };
}

// Lowest BER, ties to lowest id.
fn best_of<'a>(links: impl Iterator<Item = &'a LinkMeasurement>) -> Option<LinkId> {
    links
        .min_by(|a, b| a.ber.total_cmp(&b.ber).then(a.link_id.cmp(&b.link_id)))
        .map(|l| l.link_id)
}

fn check_list(links: &[LinkMeasurement], kind: LinkKind) -> Result<()> {
    for l in links {
        if l.kind != kind {
            return Err(invalid(format!("link {} has kind {:?}, expected {kind:?}", l.link_id, l.kind)));
        }
        check_ber(l.ber)?;
    }
    Ok(())
}

pub fn decide_handover(
    state: &ServingState,
    direct: &[LinkMeasurement],
    non_direct: &[LinkMeasurement],
    th: &HoThresholds,
) -> Result<HoDecision> {
    check_list(direct, LinkKind::Direct)?;
    check_list(non_direct, LinkKind::NonDirect)?;
    check_ber(state.serving_link.ber)?;
    let serving = state.serving_link.ber;
    let mut decision = HoDecision::NONE;
    let mut assign = |mode, link: Option<LinkId>| {
        if let Some(id) = link {
            decision = HoDecision {
                mode,
                chosen_link: Some(id),
            };
        }
    };

    if serving >= th.t_hh {
        assign(
            HoMode::Hho,
            best_of(direct.iter().filter(|l| l.ber < serving && l.ber <= th.t_hh)),
        );
        assign(HoMode::Sho, best_of(direct.iter().filter(|l| l.ber < th.t_hs)));
    }
    let ris_ok = || best_of(non_direct.iter().filter(|l| l.ber < th.t_hh));
    if th.in_pp_margin(serving) {
        assign(HoMode::RisPp, ris_ok());
    }
    if state.active_connections > th.load_threshold {
        assign(HoMode::RisCb, ris_ok());
    }
    Ok(decision)
}

/// One joint realization of the serving link, one candidate link and the
/// serving cell's load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerSample {
    pub serving_ber: f64,
    pub candidate_ber: f64,
    pub serving_load: u32,
}

/// Empirical probability of a union of events.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionEstimate {
    pub n_samples: usize,
    /// Samples where at least one event holds.
    pub union_count: u64,
    /// Samples where each single event holds.
    pub event_counts: Vec<u64>,
    /// Union count rebuilt from all intersection counts by
    /// inclusion–exclusion.
    pub inclusion_exclusion_count: i64,
    /// `union_count / n_samples`.
    pub probability: f64,
}

impl UnionEstimate {
    pub fn event_probability(&self, k: usize) -> f64 {
        self.event_counts[k] as f64 / self.n_samples as f64
    }
}

/// Counts the union of `events` over `samples`, directly and by
/// inclusion–exclusion over all `2^k − 1` intersections.
pub fn union_estimate<T>(samples: &[T], events: &[&dyn Fn(&T) -> bool]) -> Result<UnionEstimate> {
    if samples.is_empty() {
        return Err(invalid("probability estimate needs at least one sample"));
    }
    let k = events.len();
    if k == 0 || k > 16 {
        return Err(invalid(format!("need between 1 and 16 events, got {k}")));
    }
    let mut by_mask = vec![0u64; 1 << k];
    for s in samples {
        let mask = events
            .iter()
            .enumerate()
            .fold(0usize, |m, (i, e)| if e(s) { m | (1 << i) } else { m });
        by_mask[mask] += 1;
    }
    let union_count = samples.len() as u64 - by_mask[0];
    let mut ie: i64 = 0;
    for subset in 1usize..(1 << k) {
        let joint: u64 = (0..by_mask.len())
            .filter(|m| m & subset == subset)
            .map(|m| by_mask[m])
            .sum();
        let sign = if subset.count_ones() % 2 == 1 { 1 } else { -1 };
        ie += sign * joint as i64;
    }
    let event_counts = (0..k)
        .map(|i| {
            (0..by_mask.len())
                .filter(|m| m & (1 << i) != 0)
                .map(|m| by_mask[m])
                .sum()
        })
        .collect();
    Ok(UnionEstimate {
        n_samples: samples.len(),
        union_count,
        event_counts,
        inclusion_exclusion_count: ie,
        probability: union_count as f64 / samples.len() as f64,
    })
}

/// `P({BER_s ≥ T_hh} ∪ {BER_i < BER_s})`.
pub fn hho_probability(samples: &[BerSample], th: &HoThresholds) -> Result<UnionEstimate> {
    union_estimate(
        samples,
        &[
            &|s: &BerSample| s.serving_ber >= th.t_hh,
            &|s: &BerSample| s.candidate_ber < s.serving_ber,
        ],
    )
}

/// `P({T_hs ≤ BER_s < T_hh} ∪ {BER_i < T_hs})`.
pub fn sho_probability(samples: &[BerSample], th: &HoThresholds) -> Result<UnionEstimate> {
    union_estimate(
        samples,
        &[
            &|s: &BerSample| th.t_hs <= s.serving_ber && s.serving_ber < th.t_hh,
            &|s: &BerSample| s.candidate_ber < th.t_hs,
        ],
    )
}

/// `P({ρ_s > load threshold} ∪ {BER_j < T_hh})` with `candidate_ber` the
/// RIS link.
pub fn ris_cb_probability(samples: &[BerSample], th: &HoThresholds) -> Result<UnionEstimate> {
    union_estimate(
        samples,
        &[
            &|s: &BerSample| s.serving_load > th.load_threshold,
            &|s: &BerSample| s.candidate_ber < th.t_hh,
        ],
    )
}

/// Union of the serving BER in the margin, the RIS BER in the margin and
/// the RIS BER below `T_hh`.
pub fn ris_pp_probability(samples: &[BerSample], th: &HoThresholds) -> Result<UnionEstimate> {
    union_estimate(
        samples,
        &[
            &|s: &BerSample| th.in_pp_margin(s.serving_ber),
            &|s: &BerSample| th.in_pp_margin(s.candidate_ber),
            &|s: &BerSample| s.candidate_ber < th.t_hh,
        ],
    )
}

/// Link with the highest probability; ties go to the lowest id.
pub fn select_target(probabilities: &BTreeMap<LinkId, f64>) -> Result<LinkId> {
    let mut best: Option<(LinkId, f64)> = None;
    for (&id, &p) in probabilities {
        if p.is_nan() {
            return Err(invalid(format!("probability for link {id} is NaN")));
        }
        // ascending ids: only a strictly larger value displaces the current pick
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((id, p));
        }
    }
    best.map(|(id, _)| id)
        .ok_or_else(|| invalid("cannot select a target from an empty map"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th() -> HoThresholds {
        HoThresholds::new(1e-3, 1e-5, 1e-4, 50).unwrap()
    }

    #[test]
    fn threshold_validation() {
        assert!(HoThresholds::new(1e-3, 1e-3, 1e-4, 5).is_err());
        assert!(HoThresholds::new(0.5, 1e-3, 1e-4, 5).is_err());
        assert!(HoThresholds::new(1e-3, 0.0, 1e-4, 5).is_err());
        assert!(HoThresholds::new(1e-3, 1e-5, 0.0, 5).is_err());
        assert!(HoThresholds::new(1e-3, 1e-5, 1e-3, 5).is_err());
        assert!(HoThresholds::new(f64::NAN, 1e-5, 1e-4, 5).is_err());
    }

    #[test]
    fn pp_margin_is_open_left_closed_right() {
        let t = HoThresholds::new(0.25, 1e-5, 0.125, 50).unwrap();
        assert!(!t.in_pp_margin(0.125));
        assert!(t.in_pp_margin(0.375));
        assert!(!t.in_pp_margin(0.375 + 1e-12));
    }

    #[test]
    fn malformed_lists_rejected() {
        let s = ServingState {
            serving_link: LinkMeasurement::direct(0, 1e-2).unwrap(),
            active_connections: 0,
        };
        let wrong = [LinkMeasurement::non_direct(1, 1e-4).unwrap()];
        assert!(decide_handover(&s, &wrong, &[], &th()).is_err());
        assert!(decide_handover(&s, &[], &[LinkMeasurement::direct(2, 1e-4).unwrap()], &th()).is_err());
        assert!(LinkMeasurement::direct(1, 0.6).is_err());
        assert!(LinkMeasurement::direct(1, f64::NAN).is_err());
    }

    #[test]
    fn hho_requires_better_and_within_threshold() {
        let s = ServingState {
            serving_link: LinkMeasurement::direct(0, 2e-3).unwrap(),
            active_connections: 0,
        };
        // better than serving but above T_hh: not eligible
        let d = [LinkMeasurement::direct(1, 1.5e-3).unwrap()];
        assert_eq!(decide_handover(&s, &d, &[], &th()).unwrap(), HoDecision::NONE);
        let d = [LinkMeasurement::direct(1, 1e-3).unwrap()];
        assert_eq!(decide_handover(&s, &d, &[], &th()).unwrap().mode, HoMode::Hho);
    }

    #[test]
    fn chosen_link_ties_to_lowest_id() {
        let s = ServingState {
            serving_link: LinkMeasurement::direct(0, 1e-2).unwrap(),
            active_connections: 0,
        };
        let d = [
            LinkMeasurement::direct(7, 1e-4).unwrap(),
            LinkMeasurement::direct(3, 1e-4).unwrap(),
            LinkMeasurement::direct(5, 2e-4).unwrap(),
        ];
        let got = decide_handover(&s, &d, &[], &th()).unwrap();
        assert_eq!(got.chosen_link, Some(3));
    }

    #[test]
    fn union_estimate_edge_cases() {
        let samples: [u8; 0] = [];
        assert!(union_estimate(&samples, &[&|_: &u8| true]).is_err());
        assert!(union_estimate(&[1u8], &[]).is_err());
        let e = union_estimate(&[1u8, 2, 3, 4], &[&|x: &u8| *x > 2, &|x: &u8| x.is_multiple_of(2)]).unwrap();
        assert_eq!(e.union_count, 3);
        assert_eq!(e.inclusion_exclusion_count, 3);
        assert_eq!(e.event_counts, vec![2, 2]);
        assert_eq!(e.probability, 0.75);
    }

    #[test]
    fn select_target_examples() {
        let one = BTreeMap::from([(4, 0.1)]);
        assert_eq!(select_target(&one).unwrap(), 4);
        let two = BTreeMap::from([(1, 0.3), (2, 0.7)]);
        assert_eq!(select_target(&two).unwrap(), 2);
        let tie = BTreeMap::from([(1, 0.5), (2, 0.5)]);
        assert_eq!(select_target(&tie).unwrap(), 1);
        assert!(select_target(&BTreeMap::new()).is_err());
        assert!(select_target(&BTreeMap::from([(1, f64::NAN)])).is_err());
    }
}
