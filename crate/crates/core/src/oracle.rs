//! Exact solver for small instances.
//!
//! The dual of each group's subproblem depends on `(λ, μ)` only through
//! `ν = λ − μ` and `λ + μ`, and the slack term is minimized with
//! `min(λ, μ) = 0`. Each group therefore reduces to the convex scalar problem
//!
//! ```text
//! D(ν) = Σ_i [ b·ν + ξ_γ(f_i − ν z_i) ] + ε_k·|ν|
//! ```
//!
//! solved here by golden-section search. The primal solution is recovered as
//! `h_i = clamp((f_i − ν z_i)/γ, 0, 1)`, which is unique even when `ν` is not.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, RtoError};
use crate::model::{check_group, ramp, xi, ConstraintSpec, ScoredExample};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSolution {
    pub nu: f64,
    /// `D(ν)` at the returned point.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub nu: Vec<f64>,
    /// Optimal primal `h_i`, in input order.
    pub h: Vec<f64>,
    /// `Σ (γ/2)h_i² − f_i h_i`.
    pub primal_objective: f64,
    /// `Σ_k D_k(ν_k)`; the Lagrange dual value is its negation.
    pub dual_objective: f64,
    /// `primal + dual`, zero under strong duality.
    pub duality_gap: f64,
    pub examples: usize,
}

impl OracleSolution {
    /// Dual optimum on the per-example scale used by the trainer.
    pub fn mean_dual_objective(&self) -> f64 {
        self.dual_objective / self.examples as f64
    }
}

/// `D(ν)` for one group.
pub fn group_dual(points: &[(f64, f64)], offset: f64, group_slack: f64, gamma: f64, nu: f64) -> f64 {
    let linear = offset * nu * points.len() as f64 + group_slack * nu.abs();
    linear
        + points
            .iter()
            .map(|&(f, z)| xi(f - nu * z, gamma))
            .sum::<f64>()
}

/// Half-width of a bracket outside of which every `ξ_γ` term is saturated.
pub fn bracket_radius(points: &[(f64, f64)], gamma: f64) -> Option<f64> {
    points
        .iter()
        .map(|&(_, z)| z.abs())
        .filter(|&z| z > 0.0)
        .fold(None, |acc: Option<f64>, z| Some(acc.map_or(z, |a| a.min(z))))
        .map(|zmin| (2.0 + gamma) / zmin)
}

fn check_inputs(points: &[(f64, f64)], group_slack: f64, gamma: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(RtoError::EmptyGroup(0));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    if !(group_slack >= 0.0) {
        return Err(invalid(format!("slack must be >= 0, got {group_slack}")));
    }
    bracket_radius(points, gamma).ok_or(RtoError::DegenerateConstraint(0))
}

/// Minimizes the group dual over `ν ∈ ℝ` to `|Δν| ≤ tolerance`.
pub fn solve_group(
    points: &[(f64, f64)],
    offset: f64,
    group_slack: f64,
    gamma: f64,
    tolerance: f64,
) -> Result<GroupSolution> {
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let radius = check_inputs(points, group_slack, gamma)?;
    let d = |nu: f64| group_dual(points, offset, group_slack, gamma, nu);

    let (mut lo, mut hi) = (-radius, radius);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut d1, mut d2) = (d(x1), d(x2));
    while hi - lo > tolerance {
        if d1 <= d2 {
            hi = x2;
            x2 = x1;
            d2 = d1;
            x1 = hi - INV_PHI * (hi - lo);
            d1 = d(x1);
        } else {
            lo = x1;
            x1 = x2;
            d1 = d2;
            x2 = lo + INV_PHI * (hi - lo);
            d2 = d(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let candidates = [(mid, d(mid)), (x1, d1), (x2, d2)];
    let (nu, objective) = candidates
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    Ok(GroupSolution { nu, objective })
}

/// Exhaustive scan of `ν` over the saturation bracket with the given step.
/// Meant only for certifying [`solve_group`] on small instances.
pub fn brute_force_grid(
    points: &[(f64, f64)],
    offset: f64,
    group_slack: f64,
    gamma: f64,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(invalid("step must be positive"));
    }
    let radius = check_inputs(points, group_slack, gamma)?;
    let n = (2.0 * radius / step).ceil() as usize;
    let mut best = (f64::NAN, f64::INFINITY);
    for j in 0..=n {
        let nu = (-radius + j as f64 * step).min(radius);
        let v = group_dual(points, offset, group_slack, gamma, nu);
        if v < best.1 {
            best = (nu, v);
        }
    }
    Ok(best.0)
}

/// Solves every group and recovers the primal solution.
pub fn solve_all(
    examples: &[ScoredExample],
    spec: &ConstraintSpec,
    gamma: f64,
    tolerance: f64,
) -> Result<OracleSolution> {
    if examples.is_empty() {
        return Err(RtoError::EmptyDataset);
    }
    let k = spec.groups();
    let coefs = spec.coefficients(examples)?;
    let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); k];
    for (e, &z) in examples.iter().zip(&coefs) {
        check_group(e.group, k)?;
        points[e.group_index()].push((e.score, z));
    }
    let slack = spec.per_sample_slack();
    let mut nu = Vec::with_capacity(k);
    let mut dual = 0.0;
    for (g, pts) in points.iter().enumerate() {
        let group_slack = slack * pts.len() as f64;
        let sol = solve_group(pts, spec.offset, group_slack, gamma, tolerance).map_err(|e| match e {
            RtoError::EmptyGroup(_) => RtoError::EmptyGroup(g + 1),
            RtoError::DegenerateConstraint(_) => RtoError::DegenerateConstraint(g + 1),
            other => other,
        })?;
        nu.push(sol.nu);
        dual += sol.objective;
    }
    let h: Vec<f64> = examples
        .iter()
        .zip(&coefs)
        .map(|(e, &z)| ramp(e.score, nu[e.group_index()], z, gamma))
        .collect();
    let primal: f64 = examples
        .iter()
        .zip(&h)
        .map(|(e, &hi)| 0.5 * gamma * hi * hi - e.score * hi)
        .sum();
    Ok(OracleSolution {
        nu,
        h,
        primal_objective: primal,
        dual_objective: dual,
        duality_gap: primal + dual,
        examples: examples.len(),
    })
}
