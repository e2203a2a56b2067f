//! Integration, discrete iteration, equilibrium analysis and clique search.

pub mod clique;
pub mod discrete;
pub mod equilibrium;
pub mod integrate;

pub use clique::{
    brute_force_clique_number, motzkin_straus_clique, parse_edge_list, CliqueReport, GraphSpec,
};
pub use discrete::{discrete_growth_step, discrete_iterate};
pub use equilibrium::{
    classify_point, find_equilibria, find_equilibrium, interior_rest_point, stability_class,
    tangent_spectrum, AnalysisConfig, Eigenvalue, EquilibriumReport, EssVerdict, NashVerdict, StabilityClass,
};
pub use integrate::{integrate, integrate_field, IntegratorConfig, Observables, Sample, Trajectory};
