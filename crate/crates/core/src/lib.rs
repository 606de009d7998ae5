//! EFX allocations for fair-division instances on multi-graphs.
//!
//! Agents are vertices and goods are edges; every agent values only the goods incident
//! to it. The crate provides polynomial solvers for bipartite multi-graphs, multi-trees
//! and properly coloured multi-graphs with large girth, an exhaustive oracle, an EFX
//! verifier, and an auditor that replays solver traces against their step invariants.

pub mod allocation;
pub mod analyze;
pub mod audit;
pub mod error;
pub mod generate;
pub mod instance;
pub mod io;
pub mod multigraph;
pub mod oracle;
pub mod partition;
pub mod report;
pub mod solvers;
pub mod valuation;

pub use allocation::{
    envy_graph, find_source_with_path, is_efx, resolve_cycle, Allocation, EfxVerdict, EfxWitness,
    EnvyGraph,
};
pub use analyze::{analyze, AnalysisReport};
pub use audit::{audit, AuditReport, InvariantFamily};
pub use error::{Error, Result};
pub use generate::{generate, GenSpec, GraphFamily, ValuationFamily};
pub use instance::Instance;
pub use io::Labels;
pub use multigraph::{Agent, Coloring, ColoringVerdict, EdgeId, Girth, MultiGraph};
pub use oracle::{brute_force_efx, OracleReport};
pub use partition::{cac, cut_and_choose, Choice, CutResult};
pub use solvers::{
    bipartite_efx, chromatic_efx, solve, solve_with, tree_efx, Method, Solution, SolverOutput,
    TraceEvent,
};
pub use valuation::{Bundle, Table, Valuation};
