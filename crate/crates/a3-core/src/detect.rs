//! Detection front door: selects an algorithm, infers k from the node
//! count, and wires the bound-exceeded fallback.

use crate::algo1;
use crate::algo2::{self, Algo2Outcome};
use crate::blueprint::{self, FatTreeParams, RoleAssignment};
use crate::error::Result;
use crate::fixation::FixationPlan;
use crate::graph::DeviceGraph;

/// Which detection algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoChoice {
    /// The O(k^6) similarity greedy, exact below k/2 malfunctions.
    One,
    /// The O(k^3) row-hash pipeline, exact below k/4 malfunctions.
    Two,
    /// Row hashing first, similarity greedy on bound-exceeded.
    Auto,
    /// Both at once; an in-bound row-hash result wins.
    Race,
}

/// A completed detection.
#[derive(Debug, Clone)]
pub struct Detection {
    pub params: FatTreeParams,
    /// 1 or 2: the algorithm that produced the result.
    pub algo: u8,
    pub assignment: RoleAssignment,
    pub plan: FixationPlan,
    /// Raised when the plan is long enough that the input was outside the
    /// similarity greedy's k/2 exactness bound.
    pub beyond_bound: bool,
    /// The row-hash escape reason, when it ran and gave up.
    pub algo2_escape: Option<String>,
}

/// Result of a detection request: a detection, or — when only the
/// row-hash algorithm was asked for — its bound-exceeded escape.
#[derive(Debug, Clone)]
pub enum DetectOutcome {
    Detected(Detection),
    BoundOnly { params: FatTreeParams, reason: String },
}

fn from_algo1(params: FatTreeParams, r: algo1::Algo1Result, escape: Option<String>) -> Detection {
    Detection {
        params,
        algo: 1,
        assignment: r.assignment,
        plan: r.plan,
        beyond_bound: r.beyond_bound,
        algo2_escape: escape,
    }
}

fn from_algo2(params: FatTreeParams, assignment: RoleAssignment, plan: FixationPlan) -> Detection {
    Detection {
        params,
        algo: 2,
        assignment,
        plan,
        beyond_bound: false,
        algo2_escape: None,
    }
}

/// Runs detection on a physical graph, inferring k from the node count.
pub fn detect(g: &DeviceGraph, choice: AlgoChoice) -> Result<DetectOutcome> {
    let params = blueprint::infer_k(g.n())?;
    match choice {
        AlgoChoice::One => {
            let r = algo1::run_algo1(g, params)?;
            Ok(DetectOutcome::Detected(from_algo1(params, r, None)))
        }
        AlgoChoice::Two => match algo2::run_algo2(g, params)? {
            Algo2Outcome::Resolved { assignment, plan } => {
                Ok(DetectOutcome::Detected(from_algo2(params, assignment, plan)))
            }
            Algo2Outcome::BoundExceeded { reason } => {
                Ok(DetectOutcome::BoundOnly { params, reason })
            }
        },
        AlgoChoice::Auto => match algo2::run_algo2(g, params)? {
            Algo2Outcome::Resolved { assignment, plan } => {
                Ok(DetectOutcome::Detected(from_algo2(params, assignment, plan)))
            }
            Algo2Outcome::BoundExceeded { reason } => {
                let r = algo1::run_algo1(g, params)?;
                Ok(DetectOutcome::Detected(from_algo1(params, r, Some(reason))))
            }
        },
        AlgoChoice::Race => {
            let (two, one) = std::thread::scope(|scope| {
                let h2 = scope.spawn(|| algo2::run_algo2(g, params));
                let h1 = scope.spawn(|| algo1::run_algo1(g, params));
                (h2.join().expect("algo2 thread"), h1.join().expect("algo1 thread"))
            });
            match two? {
                Algo2Outcome::Resolved { assignment, plan } => {
                    Ok(DetectOutcome::Detected(from_algo2(params, assignment, plan)))
                }
                Algo2Outcome::BoundExceeded { reason } => {
                    Ok(DetectOutcome::Detected(from_algo1(params, one?, Some(reason))))
                }
            }
        }
    }
}
