//! Random-cluster measures and the exact identities relating them to the
//! spin models.

pub mod bond;
pub mod coupling;
pub mod dominance;
pub mod site;

pub use bond::{
    bond_rc, bond_set, cluster_counts, dual_bijection, dual_bond, duality_check, Bond, BondConfiguration,
    ClusterCount, Wiring,
};
pub use coupling::{edwards_sokal_check, CouplingDeviation};
pub use dominance::{dominance_check, dominance_report, increasing_events, DominanceReport};
pub use site::{
    amalgamation_check, amalgamation_hypothesis, amalgamation_sets, single_site_bounds, single_site_bounds_check,
    site_rc, wr_pushforward_check, AmalgamationSets, BoundsReport,
};
