//! Least-cost task assignment: which executor wins each task, the partition
//! of `[0, 1]` into executor regions, and the labor demand it implies.
//!
//! The region map makes no single-crossing assumption. It scans a uniform
//! grid, refines every winner change by bisection on the cost gap of the two
//! adjacent winners, and re-checks each resulting region at its midpoint.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::AssignmentError;
use crate::model::{
    digital_unit_cost, labor_unit_cost, EconomyConfig, OccupationKind, TaskIndex,
};

/// Default number of grid points used by [`RegionMap::compute_default`].
pub const DEFAULT_SCAN_POINTS: usize = 4097;
/// Default boundary-refinement tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Either a human occupation or digital capital.
///
/// The derived order is the tie-breaking order: every labor executor
/// precedes digital, and labor executors follow the canonical kind order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Executor {
    Labor(OccupationKind),
    Digital,
}

impl Executor {
    pub fn label(&self) -> &'static str {
        match self {
            Executor::Labor(kind) => kind.label(),
            Executor::Digital => "digital",
        }
    }
}

impl std::fmt::Display for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One maximal interval of tasks assigned to a single executor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub z_lo: f64,
    pub z_hi: f64,
    pub executor: Executor,
}

impl Region {
    pub fn width(&self) -> f64 {
        self.z_hi - self.z_lo
    }
}

/// The partition of `[0, 1]` by cheapest executor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMap {
    pub regions: Vec<Region>,
    pub tolerance: f64,
}

/// Task mass assigned to each executor; masses sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaborDemand {
    pub mass: BTreeMap<Executor, f64>,
}

impl LaborDemand {
    pub fn mass_of(&self, executor: Executor) -> f64 {
        self.mass.get(&executor).copied().unwrap_or(0.0)
    }

    pub fn digital_mass(&self) -> f64 {
        self.mass_of(Executor::Digital)
    }

    /// Total mass assigned to human occupations.
    pub fn labor_mass(&self) -> f64 {
        self.mass
            .iter()
            .filter(|(e, _)| **e != Executor::Digital)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Unit cost of `executor` at task `z` under the economy's composition mode.
pub fn executor_cost(econ: &EconomyConfig, executor: Executor, z: TaskIndex) -> f64 {
    match executor {
        Executor::Digital => digital_unit_cost(&econ.digital, z),
        Executor::Labor(kind) => {
            let occ = econ
                .occupation(kind)
                .expect("executor kind is always drawn from the economy");
            labor_unit_cost(occ, z, econ.composition_mode)
        }
    }
}

/// All candidate executors of an economy in tie-breaking order.
fn candidates(econ: &EconomyConfig) -> Vec<Executor> {
    let mut list: Vec<Executor> = econ
        .occupations_ordered()
        .iter()
        .map(|o| Executor::Labor(o.kind))
        .collect();
    list.push(Executor::Digital);
    list
}

/// The cheapest executor for task `z`; ties go to the lower-ordered
/// executor (labor before digital, then canonical occupation order).
pub fn cheapest_executor(econ: &EconomyConfig, z: TaskIndex) -> Result<Executor, AssignmentError> {
    let mut best: Option<(Executor, f64)> = None;
    for executor in candidates(econ) {
        let cost = executor_cost(econ, executor, z);
        if !cost.is_finite() {
            continue;
        }
        match best {
            // A later executor must be strictly cheaper to displace the
            // incumbent, so exact ties keep the lower-ordered winner.
            Some((_, best_cost)) if best_cost <= cost => {}
            _ => best = Some((executor, cost)),
        }
    }
    best.map(|(e, _)| e)
        .ok_or(AssignmentError::InfeasibleTask(z.value()))
}

/// Bisects the cost gap of two executors on `[lo, hi]` down to `tol` and
/// returns the boundary point. Expects `a` weakly cheaper at `lo` and `b`
/// strictly cheaper at `hi`.
fn refine_boundary(econ: &EconomyConfig, a: Executor, b: Executor, lo: f64, hi: f64, tol: f64) -> f64 {
    let gap = |z: f64| {
        let z = TaskIndex::new(z).expect("bisection stays inside [0, 1]");
        executor_cost(econ, a, z) - executor_cost(econ, b, z)
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer splittable in f64
        }
        if gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Partitions `[0, 1]` by cheapest executor: uniform scan over
/// `scan_points`, bisection refinement of each winner change, then a
/// midpoint re-check with merging of equal neighbors.
pub fn compute_region_map(
    econ: &EconomyConfig,
    scan_points: usize,
    tol: f64,
) -> Result<RegionMap, AssignmentError> {
    econ.validate()?;
    if scan_points < 2 {
        return Err(AssignmentError::TooFewScanPoints(scan_points));
    }
    if !(tol > 0.0) {
        return Err(AssignmentError::NonPositiveTolerance(tol));
    }

    let n = scan_points;
    let grid_z = |i: usize| i as f64 / (n - 1) as f64;
    let mut winners = Vec::with_capacity(n);
    for i in 0..n {
        let z = TaskIndex::new(grid_z(i)).expect("grid point inside [0, 1]");
        winners.push(cheapest_executor(econ, z)?);
    }

    let mut boundaries = vec![0.0];
    for i in 0..n - 1 {
        if winners[i] != winners[i + 1] {
            let b = refine_boundary(econ, winners[i], winners[i + 1], grid_z(i), grid_z(i + 1), tol);
            if b > *boundaries.last().unwrap() && b < 1.0 {
                boundaries.push(b);
            }
        }
    }
    boundaries.push(1.0);

    let mut regions: Vec<Region> = Vec::new();
    for pair in boundaries.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= lo {
            continue;
        }
        let mid = TaskIndex::new(0.5 * (lo + hi)).expect("midpoint inside [0, 1]");
        let executor = cheapest_executor(econ, mid)?;
        match regions.last_mut() {
            Some(last) if last.executor == executor => last.z_hi = hi,
            _ => regions.push(Region {
                z_lo: lo,
                z_hi: hi,
                executor,
            }),
        }
    }

    Ok(RegionMap {
        regions,
        tolerance: tol,
    })
}

/// [`compute_region_map`] with the default grid density and tolerance.
pub fn compute_region_map_default(econ: &EconomyConfig) -> Result<RegionMap, AssignmentError> {
    compute_region_map(econ, DEFAULT_SCAN_POINTS, DEFAULT_TOLERANCE)
}

/// Integrates the region map: each executor's mass is the total length of
/// its regions.
pub fn labor_demand(rm: &RegionMap) -> LaborDemand {
    let mut mass: BTreeMap<Executor, f64> = BTreeMap::new();
    for region in &rm.regions {
        *mass.entry(region.executor).or_insert(0.0) += region.width();
    }
    LaborDemand { mass }
}

/// Each occupation's share of total human labor demand. Digital mass is
/// excluded from the denominator; an all-digital economy is an error.
pub fn hiring_shares(
    ld: &LaborDemand,
) -> Result<BTreeMap<OccupationKind, f64>, AssignmentError> {
    let total = ld.labor_mass();
    if total <= 0.0 {
        return Err(AssignmentError::AllDigital);
    }
    let mut shares = BTreeMap::new();
    for (executor, mass) in &ld.mass {
        if let Executor::Labor(kind) = executor {
            shares.insert(*kind, mass / total);
        }
    }
    Ok(shares)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capability, CompositionMode, DigitalCapitalSpec, OccupationSpec};

    fn z(v: f64) -> TaskIndex {
        TaskIndex::new(v).unwrap()
    }

    /// Single occupation with constant unit cost 1 and a digital executor
    /// that crosses it at z = 0.5 when theta = 4.
    fn flat_economy(theta: f64) -> EconomyConfig {
        EconomyConfig::new(
            vec![OccupationSpec::new(
                OccupationKind::Prof,
                Capability::new(1.0, 0.0, 1.0),
                1.0,
            )
            .unwrap()],
            DigitalCapitalSpec::new(1.0, theta, 2.0, 2.0).unwrap(),
            CompositionMode::Raw,
        )
        .unwrap()
    }

    #[test]
    fn cheapest_executor_crossing_example() {
        let econ = flat_economy(4.0);
        assert_eq!(
            cheapest_executor(&econ, z(0.25)).unwrap(),
            Executor::Labor(OccupationKind::Prof)
        );
        assert_eq!(cheapest_executor(&econ, z(0.75)).unwrap(), Executor::Digital);
    }

    #[test]
    fn dominated_digital_never_wins() {
        let econ = EconomyConfig::new(
            vec![OccupationSpec::new(
                OccupationKind::Prof,
                Capability::new(1.0, 0.0, 1.0),
                1.0,
            )
            .unwrap()],
            DigitalCapitalSpec::new(1.0, 0.0, 2.0, 10.0).unwrap(),
            CompositionMode::Raw,
        )
        .unwrap();
        for i in 0..=100 {
            let zi = z(i as f64 / 100.0);
            assert_eq!(
                cheapest_executor(&econ, zi).unwrap(),
                Executor::Labor(OccupationKind::Prof)
            );
        }
        let rm = compute_region_map_default(&econ).unwrap();
        assert_eq!(rm.regions.len(), 1);
        assert_eq!(rm.regions[0].executor, Executor::Labor(OccupationKind::Prof));
    }

    #[test]
    fn region_map_finds_closed_form_boundary() {
        // Crossing of cost 1 labor with 2/(1 + 4 z^2) sits at z = 0.5.
        let econ = flat_economy(4.0);
        let rm = compute_region_map_default(&econ).unwrap();
        assert_eq!(rm.regions.len(), 2);
        assert_eq!(rm.regions[0].executor, Executor::Labor(OccupationKind::Prof));
        assert_eq!(rm.regions[1].executor, Executor::Digital);
        assert!((rm.regions[0].z_hi - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn region_map_partition_invariants() {
        let econ = flat_economy(4.0);
        let rm = compute_region_map_default(&econ).unwrap();
        assert_eq!(rm.regions.first().unwrap().z_lo, 0.0);
        assert_eq!(rm.regions.last().unwrap().z_hi, 1.0);
        for pair in rm.regions.windows(2) {
            assert_eq!(pair[0].z_hi, pair[1].z_lo);
            assert_ne!(pair[0].executor, pair[1].executor);
        }
        for region in &rm.regions {
            assert!(region.z_lo < region.z_hi);
            let mid = z(0.5 * (region.z_lo + region.z_hi));
            assert_eq!(cheapest_executor(&econ, mid).unwrap(), region.executor);
        }
    }

    #[test]
    fn labor_demand_examples() {
        let econ = flat_economy(4.0);
        let ld = labor_demand(&compute_region_map_default(&econ).unwrap());
        assert!((ld.mass_of(Executor::Labor(OccupationKind::Prof)) - 0.5).abs() <= 1e-9);
        assert!((ld.digital_mass() - 0.5).abs() <= 1e-9);
        let total: f64 = ld.mass.values().sum();
        assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn hiring_shares_renormalize_over_labor() {
        let mut mass = BTreeMap::new();
        mass.insert(Executor::Labor(OccupationKind::Prof), 0.3);
        mass.insert(Executor::Labor(OccupationKind::Phys), 0.1);
        mass.insert(Executor::Digital, 0.6);
        let shares = hiring_shares(&LaborDemand { mass }).unwrap();
        assert!((shares[&OccupationKind::Prof] - 0.75).abs() <= 1e-12);
        assert!((shares[&OccupationKind::Phys] - 0.25).abs() <= 1e-12);

        let mut mass = BTreeMap::new();
        mass.insert(Executor::Labor(OccupationKind::Phys), 1.0);
        let shares = hiring_shares(&LaborDemand { mass }).unwrap();
        assert_eq!(shares[&OccupationKind::Phys], 1.0);
    }

    #[test]
    fn all_digital_is_an_error() {
        let mut mass = BTreeMap::new();
        mass.insert(Executor::Digital, 1.0);
        assert!(matches!(
            hiring_shares(&LaborDemand { mass }),
            Err(AssignmentError::AllDigital)
        ));
    }

    #[test]
    fn executor_order_prefers_labor_then_canonical_kinds() {
        assert!(Executor::Labor(OccupationKind::Phys) < Executor::Labor(OccupationKind::Aux));
        assert!(Executor::Labor(OccupationKind::Mgmt) < Executor::Digital);
    }

    #[test]
    fn exact_tie_resolves_to_lower_order() {
        // Two occupations with identical constant cost curves.
        let econ = EconomyConfig::new(
            vec![
                OccupationSpec::new(
                    OccupationKind::Prof,
                    Capability::new(1.0, 0.0, 1.0),
                    1.0,
                )
                .unwrap(),
                OccupationSpec::new(
                    OccupationKind::Phys,
                    Capability::new(1.0, 0.0, 1.0),
                    1.0,
                )
                .unwrap(),
            ],
            DigitalCapitalSpec::new(1.0, 0.0, 2.0, 10.0).unwrap(),
            CompositionMode::Raw,
        )
        .unwrap();
        let rm = compute_region_map_default(&econ).unwrap();
        assert_eq!(rm.regions.len(), 1);
        assert_eq!(rm.regions[0].executor, Executor::Labor(OccupationKind::Phys));
    }

    #[test]
    fn serialized_map_is_deterministic() {
        let econ = flat_economy(4.0);
        let a = serde_json::to_string(&compute_region_map_default(&econ).unwrap()).unwrap();
        let b = serde_json::to_string(&compute_region_map_default(&econ).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
