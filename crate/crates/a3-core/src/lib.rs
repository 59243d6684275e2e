//! Detection, localization, and minimum-step repair of link malfunctions
//! in FatTree data-center networks, plus the address auto-configuration
//! that falls out of the recovered device-to-role mapping.
//!
//! The physical network is a [`DeviceGraph`]; a [`blueprint`] describes
//! what a correct FatTree(k) looks like in terms of roles and connection
//! rules. Two detectors recover the device-to-role mapping from a
//! malfunctioning graph — [`algo1`], exact below k/2 undirected link
//! malfunctions in O(k^6), and [`algo2`], exact below k/4 in O(k^3) with
//! an explicit bound-exceeded escape. [`fixation`] turns a recovered
//! assignment into the minimal disconnect/connect plan and the logical
//! address table; [`injector`] fabricates seeded malfunctions for
//! experiments; [`oracle`] provides brute-force ground truth at toy scale.

pub mod algo1;
pub mod algo2;
pub mod blueprint;
pub mod detect;
mod error;
pub mod fixation;
pub mod graph;
pub mod injector;
pub mod oracle;

pub use blueprint::{FatTreeParams, Role, RoleAssignment};
pub use detect::{detect, AlgoChoice, DetectOutcome, Detection};
pub use error::{Error, Result};
pub use fixation::{AddressTable, FixAction, FixationPlan};
pub use graph::{BitRows, DeviceGraph, NodeRow};
pub use injector::{GroundTruthDiff, MalfunctionSpec, Scope};
