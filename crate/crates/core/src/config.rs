//! Run-wide bounds. Every limit that gates an enumeration or a search has a
//! default here and can be overridden per run; reports echo the effective
//! values so a run can be replayed.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    /// Largest field order `p^k` accepted by public field construction.
    pub max_field_order: u64,
    /// Largest number of projective coefficient classes an exhaustive sweep
    /// will walk.
    pub max_sweep_classes: u64,
    /// Largest number of affine tuples `(q^e)^(n+1)` a projective point
    /// enumeration will walk.
    pub max_enum_points: u64,
    /// Total-degree bound for bivariate factorization.
    pub max_bivariate_degree: usize,
    /// Largest extension degree searched when testing whether a section meets
    /// a variety.
    pub meets_extension_max: usize,
    /// Projection attempts before a space-curve component count is declared
    /// indeterminate.
    pub projection_retries: usize,
    /// Largest extension step used when separating two curve components by
    /// their point sets.
    pub distinct_extension_max: usize,
    /// Random planes tried when certifying absolute irreducibility of a
    /// quaternary form by restriction.
    pub restriction_plane_budget: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_field_order: 1 << 20,
            max_sweep_classes: 1 << 22,
            max_enum_points: 1 << 24,
            max_bivariate_degree: 16,
            meets_extension_max: 6,
            projection_retries: 7,
            distinct_extension_max: 4,
            restriction_plane_budget: 20,
        }
    }
}

impl Config {
    /// Compact `key=value` echo used in report headers. Field order is fixed
    /// so reruns serialize identically.
    pub fn echo(&self) -> String {
        format!(
            "max_field_order={};max_sweep_classes={};max_enum_points={};max_bivariate_degree={};meets_extension_max={};projection_retries={};distinct_extension_max={};restriction_plane_budget={}",
            self.max_field_order,
            self.max_sweep_classes,
            self.max_enum_points,
            self.max_bivariate_degree,
            self.meets_extension_max,
            self.projection_retries,
            self.distinct_extension_max,
            self.restriction_plane_budget,
        )
    }
}
