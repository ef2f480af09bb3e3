//! Model primitives: the task continuum, skill compositions, occupational
//! capabilities, digital capital, and the unit-cost functions of both
//! executor types.
//!
//! Every function here is pure and safe to call concurrently.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A point on the task continuum, guaranteed to lie in `[0, 1]`.
///
/// Higher values correspond to greater cognitive complexity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct TaskIndex(f64);

impl TaskIndex {
    /// Validates that `z` lies in `[0, 1]`.
    pub fn new(z: f64) -> Result<Self, ModelError> {
        if z.is_finite() && (0.0..=1.0).contains(&z) {
            Ok(Self(z))
        } else {
            Err(ModelError::TaskIndexOutOfRange(z))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Whether skill compositions are used as printed or rescaled to sum to one.
///
/// The raw functional forms sum to `1 + 4z(1 - z)`, not to one; `Normalized`
/// divides each component by that sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionMode {
    #[default]
    Raw,
    Normalized,
}

/// The (manual, routine, abstract) intensity mix of one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkillComposition {
    pub manual: f64,
    pub routine: f64,
    #[serde(rename = "abstract")]
    pub abstract_: f64,
    pub mode: CompositionMode,
}

impl SkillComposition {
    pub fn sum(&self) -> f64 {
        self.manual + self.routine + self.abstract_
    }
}

/// The five occupation types, in canonical order.
///
/// The declaration order is the tie-breaking and output order used across
/// the crate: `Phys < Aux < Tech < Prof < Mgmt`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum OccupationKind {
    Phys,
    Aux,
    Tech,
    Prof,
    Mgmt,
}

impl OccupationKind {
    pub const ALL: [OccupationKind; 5] = [
        OccupationKind::Phys,
        OccupationKind::Aux,
        OccupationKind::Tech,
        OccupationKind::Prof,
        OccupationKind::Mgmt,
    ];

    /// Short lowercase label used in CSV headers and config files.
    pub fn label(self) -> &'static str {
        match self {
            OccupationKind::Phys => "phys",
            OccupationKind::Aux => "aux",
            OccupationKind::Tech => "tech",
            OccupationKind::Prof => "prof",
            OccupationKind::Mgmt => "mgmt",
        }
    }
}

impl std::fmt::Display for OccupationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// An occupation's efficiency in executing manual, routine, and abstract
/// work. Components are nonnegative and not all zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capability {
    pub manual: f64,
    pub routine: f64,
    #[serde(rename = "abstract")]
    pub abstract_: f64,
}

impl Capability {
    pub fn new(manual: f64, routine: f64, abstract_: f64) -> Self {
        Self {
            manual,
            routine,
            abstract_,
        }
    }
}

/// One occupation: its kind, capability vector, and wage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupationSpec {
    pub kind: OccupationKind,
    pub capability: Capability,
    pub wage: f64,
}

impl OccupationSpec {
    pub fn new(kind: OccupationKind, capability: Capability, wage: f64) -> Result<Self, ModelError> {
        let spec = Self {
            kind,
            capability,
            wage,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let c = &self.capability;
        let components = [c.manual, c.routine, c.abstract_];
        if components.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::NegativeCapability(self.kind));
        }
        if components.iter().sum::<f64>() <= 0.0 {
            return Err(ModelError::ZeroCapability(self.kind));
        }
        if !self.wage.is_finite() || self.wage <= 0.0 {
            return Err(ModelError::NonPositiveWage {
                kind: self.kind,
                wage: self.wage,
            });
        }
        Ok(())
    }
}

/// Parameters of the digital executor.
///
/// Productivity at task `z` is `base_productivity + capability * z^exponent`
/// and unit cost is the rental price divided by that productivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitalCapitalSpec {
    /// Baseline productivity shared by all tasks; must be positive so the
    /// digital cost stays finite everywhere.
    pub base_productivity: f64,
    /// Digital capability scaling the complexity premium; nonnegative.
    pub capability: f64,
    /// Complexity exponent, strictly greater than one.
    pub complexity_exponent: f64,
    /// Rental price of one unit of digital capital; positive.
    pub rental_price: f64,
}

impl DigitalCapitalSpec {
    pub fn new(
        base_productivity: f64,
        capability: f64,
        complexity_exponent: f64,
        rental_price: f64,
    ) -> Result<Self, ModelError> {
        let spec = Self {
            base_productivity,
            capability,
            complexity_exponent,
            rental_price,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.base_productivity.is_finite() || self.base_productivity <= 0.0 {
            return Err(ModelError::NonPositiveBaseProductivity(self.base_productivity));
        }
        if !self.capability.is_finite() || self.capability < 0.0 {
            return Err(ModelError::NegativeDigitalCapability(self.capability));
        }
        if !self.complexity_exponent.is_finite() || self.complexity_exponent <= 1.0 {
            return Err(ModelError::ExponentNotAboveOne(self.complexity_exponent));
        }
        if !self.rental_price.is_finite() || self.rental_price <= 0.0 {
            return Err(ModelError::NonPositiveRental(self.rental_price));
        }
        Ok(())
    }

    /// Same digital parameters with the capability replaced; used by sweeps.
    pub fn with_capability(&self, capability: f64) -> Result<Self, ModelError> {
        Self::new(
            self.base_productivity,
            capability,
            self.complexity_exponent,
            self.rental_price,
        )
    }
}

/// A complete model instance: occupations, digital capital, and the
/// composition mode every cost evaluation uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyConfig {
    pub occupations: Vec<OccupationSpec>,
    pub digital: DigitalCapitalSpec,
    #[serde(default)]
    pub composition_mode: CompositionMode,
}

impl EconomyConfig {
    pub fn new(
        occupations: Vec<OccupationSpec>,
        digital: DigitalCapitalSpec,
        composition_mode: CompositionMode,
    ) -> Result<Self, ModelError> {
        let config = Self {
            occupations,
            digital,
            composition_mode,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.occupations.is_empty() {
            return Err(ModelError::NoOccupations);
        }
        let mut seen = std::collections::BTreeSet::new();
        for occ in &self.occupations {
            occ.validate()?;
            if !seen.insert(occ.kind) {
                return Err(ModelError::DuplicateOccupation(occ.kind));
            }
        }
        self.digital.validate()
    }

    pub fn occupation(&self, kind: OccupationKind) -> Option<&OccupationSpec> {
        self.occupations.iter().find(|o| o.kind == kind)
    }

    /// Occupations in canonical kind order, regardless of config order.
    pub fn occupations_ordered(&self) -> Vec<&OccupationSpec> {
        let mut ordered: Vec<&OccupationSpec> = self.occupations.iter().collect();
        ordered.sort_by_key(|o| o.kind);
        ordered
    }

    /// The same economy with the digital capability replaced.
    pub fn with_capability(&self, capability: f64) -> Result<Self, ModelError> {
        Ok(Self {
            occupations: self.occupations.clone(),
            digital: self.digital.with_capability(capability)?,
            composition_mode: self.composition_mode,
        })
    }
}

/// Skill composition of task `z`: raw components `(1 - z, 4z(1 - z), z)`,
/// optionally rescaled so the three components sum to one.
pub fn skill_composition(z: TaskIndex, mode: CompositionMode) -> SkillComposition {
    let z = z.value();
    let manual = 1.0 - z;
    let routine = 4.0 * z * (1.0 - z);
    let abstract_ = z;
    match mode {
        CompositionMode::Raw => SkillComposition {
            manual,
            routine,
            abstract_,
            mode,
        },
        CompositionMode::Normalized => {
            // Raw sum = 1 + 4z(1 - z) >= 1 on [0, 1], so the division is safe.
            let sum = manual + routine + abstract_;
            SkillComposition {
                manual: manual / sum,
                routine: routine / sum,
                abstract_: abstract_ / sum,
                mode,
            }
        }
    }
}

/// Effective productivity of an occupation at task `z`: the dot product of
/// its capability vector with the task's skill composition.
pub fn effective_productivity(occ: &OccupationSpec, z: TaskIndex, mode: CompositionMode) -> f64 {
    let s = skill_composition(z, mode);
    occ.capability.manual * s.manual
        + occ.capability.routine * s.routine
        + occ.capability.abstract_ * s.abstract_
}

/// Analytic derivative of [`effective_productivity`] with respect to `z`.
pub fn effective_productivity_derivative(
    occ: &OccupationSpec,
    z: TaskIndex,
    mode: CompositionMode,
) -> f64 {
    let zv = z.value();
    let c = &occ.capability;
    // d/dz of the raw dot product: -manual + routine*(4 - 8z) + abstract.
    let raw_deriv = -c.manual + c.routine * (4.0 - 8.0 * zv) + c.abstract_;
    match mode {
        CompositionMode::Raw => raw_deriv,
        CompositionMode::Normalized => {
            let raw = effective_productivity(occ, z, CompositionMode::Raw);
            let sum = 1.0 + 4.0 * zv * (1.0 - zv);
            let sum_deriv = 4.0 - 8.0 * zv;
            (raw_deriv * sum - raw * sum_deriv) / (sum * sum)
        }
    }
}

/// Unit cost of assigning task `z` to an occupation: wage over effective
/// productivity. Zero productivity yields `+inf` (the task is infeasible
/// for that occupation), never an error.
pub fn labor_unit_cost(occ: &OccupationSpec, z: TaskIndex, mode: CompositionMode) -> f64 {
    let productivity = effective_productivity(occ, z, mode);
    if productivity > 0.0 {
        occ.wage / productivity
    } else {
        f64::INFINITY
    }
}

/// Productivity of digital capital at task `z`.
pub fn digital_productivity(dc: &DigitalCapitalSpec, z: TaskIndex) -> f64 {
    dc.base_productivity + dc.capability * z.value().powf(dc.complexity_exponent)
}

/// Unit cost of assigning task `z` to digital capital; finite for all `z`
/// because the baseline productivity is positive.
pub fn digital_unit_cost(dc: &DigitalCapitalSpec, z: TaskIndex) -> f64 {
    dc.rental_price / digital_productivity(dc, z)
}
