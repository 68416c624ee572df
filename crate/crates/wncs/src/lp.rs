//! Deterministic dense linear programming: two-phase primal simplex with
//! Bland's anti-cycling pivot rule.
//!
//! All variables are non-negative. Problems at the sizes this crate builds
//! (occupancy measures over a few thousand state-action pairs) are well within
//! dense-tableau range, and a fixed pivot order makes every solve bit-for-bit
//! reproducible, which the stability verdicts rely on.

use crate::error::Error;
use crate::Result;

/// Inequality direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// A linear program over `n_vars` non-negative variables. The optional
/// objective is maximized.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub n_vars: usize,
    /// Rows `coeffs . x = rhs`.
    pub equalities: Vec<(Vec<f64>, f64)>,
    /// Rows `coeffs . x <= rhs` or `>= rhs`.
    pub inequalities: Vec<(Vec<f64>, f64, Sense)>,
    /// Maximization coefficients; feasibility-only when absent.
    pub objective: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Variable values; empty unless `status == Feasible`.
    pub values: Vec<f64>,
    pub status: LpStatus,
    /// Largest residual of the returned point against the raw rows.
    pub max_violation: f64,
    /// Objective value when one was supplied and the solve succeeded.
    pub objective_value: Option<f64>,
}

/// Outcome of [`solve_with_margin`].
#[derive(Clone, Debug)]
pub struct MarginSolution {
    pub values: Vec<f64>,
    /// Maximized common slack added to the designated rows; negative when the
    /// designated system is infeasible as stated.
    pub margin: f64,
    pub status: LpStatus,
    pub max_violation: f64,
}

const RC_TOL: f64 = 1e-9; // reduced-cost threshold
const PIV_TOL: f64 = 1e-7; // minimum pivot magnitude
const PHASE1_TOL: f64 = 1e-8; // residual infeasibility after phase 1
const CERT_TOL: f64 = 1e-9; // certificate check on raw rows
const MAX_PIVOTS: usize = 500_000;
// Pivots between refactorizations. The tableau is rebuilt from the original
// rows and a verdict is only accepted when a freshly refactored tableau
// confirms it, so rounding drift in the incremental updates cannot leak into
// results.
const ROUND_PIVOTS: usize = 1_000;
const MAX_ROUNDS: usize = 500;

impl LpProblem {
    pub fn new(n_vars: usize) -> Self {
        LpProblem { n_vars, equalities: Vec::new(), inequalities: Vec::new(), objective: None }
    }

    fn check_shape(&self) -> Result<()> {
        let bad_len = self
            .equalities
            .iter()
            .map(|(c, _)| c.len())
            .chain(self.inequalities.iter().map(|(c, _, _)| c.len()))
            .any(|l| l != self.n_vars);
        let bad_rhs = self
            .equalities
            .iter()
            .map(|(_, r)| *r)
            .chain(self.inequalities.iter().map(|(_, r, _)| *r))
            .any(|r| !r.is_finite());
        if bad_len || bad_rhs {
            return Err(Error::SolverFailure("malformed problem rows".to_string()));
        }
        if let Some(obj) = &self.objective {
            if obj.len() != self.n_vars {
                return Err(Error::SolverFailure("objective length mismatch".to_string()));
            }
        }
        Ok(())
    }

    /// Plain-text row dump for external cross-checking.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.objective {
            Some(c) => {
                out.push_str("max:");
                for v in c {
                    out.push_str(&format!(" {v}"));
                }
                out.push('\n');
            }
            None => out.push_str("feasibility\n"),
        }
        for (c, r) in &self.equalities {
            out.push_str("eq:");
            for v in c {
                out.push_str(&format!(" {v}"));
            }
            out.push_str(&format!(" = {r}\n"));
        }
        for (c, r, s) in &self.inequalities {
            out.push_str(if *s == Sense::Le { "le:" } else { "ge:" });
            for v in c {
                out.push_str(&format!(" {v}"));
            }
            out.push_str(&format!(" {} {r}\n", if *s == Sense::Le { "<=" } else { ">=" }));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RoundOutcome {
    Optimal { pivots_done: usize },
    Unbounded { pivots_done: usize },
    Budget,
}

struct Tableau {
    /// Original standard-form rows `[coeffs..., rhs]`; never modified except
    /// for redundant-row removal.
    base: Vec<Vec<f64>>,
    /// Current `B^-1 [A | b]`.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
    art_start: usize, // columns >= art_start are artificial
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let piv = self.rows[r][c];
        let inv = 1.0 / piv;
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[c] = 0.0;
            }
        }
        let factor = cost[c];
        if factor != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Rebuilds `rows = B^-1 [A | b]` from the original rows by Gauss-Jordan
    /// elimination on the basis columns (largest available pivot per column;
    /// deterministic).
    fn refactor(&mut self) -> Result<()> {
        let m = self.base.len();
        self.rows = self.base.clone();
        let vars = self.basis.clone();
        let mut assigned = vec![usize::MAX; m];
        let mut row_used = vec![false; m];
        for (k, &c) in vars.iter().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row_used[i] {
                    continue;
                }
                let mag = row[c].abs();
                if best.is_none_or(|(_, b)| mag > b) {
                    best = Some((i, mag));
                }
            }
            let (r, mag) = best.expect("one unused row per basis variable");
            if mag < 1e-11 {
                return Err(Error::SolverFailure(format!(
                    "singular basis during refactorization (column {c})"
                )));
            }
            let inv = 1.0 / self.rows[r][c];
            for v in self.rows[r].iter_mut() {
                *v *= inv;
            }
            let pivot_row = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i == r {
                    continue;
                }
                let factor = row[c];
                if factor != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * pv;
                    }
                    row[c] = 0.0;
                }
            }
            row_used[r] = true;
            assigned[r] = c;
            let _ = k;
        }
        self.basis = assigned;
        if self
            .rows
            .iter()
            .any(|row| row.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::SolverFailure("non-finite entry after refactorization".to_string()));
        }
        Ok(())
    }

    /// Reduced-cost row `z - c` computed from scratch for cost vector `c`
    /// (length `ncols`); the last entry carries the objective value.
    fn fresh_cost(&self, c: &[f64]) -> Vec<f64> {
        let mut cost = vec![0.0; self.ncols + 1];
        for (j, &cj) in c.iter().enumerate() {
            cost[j] = -cj;
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (v, rv) in cost.iter_mut().zip(&self.rows[i]) {
                    *v += cb * rv;
                }
            }
        }
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        cost
    }

    /// One pivoting round on the given reduced-cost row (`z - c` convention
    /// for maximization: entering while some entry is `< -RC_TOL`). Columns
    /// `>= bar_from` never enter. Stops after `budget` pivots.
    ///
    /// Pivot selection starts with Dantzig's rule (most negative reduced
    /// cost, largest pivot element among exact ratio ties), which keeps the
    /// basis well conditioned; when the objective stalls on a degenerate
    /// vertex the round switches to Bland's rule (smallest indices, exact
    /// ties), whose anti-cycling guarantee breaks the stall.
    fn run_round(
        &mut self,
        cost: &mut [f64],
        bar_from: usize,
        budget: usize,
        total_pivots: &mut usize,
    ) -> Result<RoundOutcome> {
        let stall_limit = 4 * self.rows.len() + 16;
        let mut bland = false;
        let mut stalled = 0usize;
        let mut done = 0usize;
        loop {
            let limit = self.ncols.min(bar_from);
            let mut entering = None;
            if bland {
                for (j, &rc) in cost.iter().enumerate().take(limit) {
                    if rc < -RC_TOL {
                        entering = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = -RC_TOL;
                for (j, &rc) in cost.iter().enumerate().take(limit) {
                    if rc < best {
                        best = rc;
                        entering = Some(j);
                    }
                }
            }
            let Some(j) = entering else {
                return Ok(RoundOutcome::Optimal { pivots_done: done });
            };
            // Exact minimum-ratio test. Ties go to the largest pivot element
            // (numerical stability) under Dantzig mode, to the smallest basic
            // variable index (termination guarantee) under Bland mode.
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][j];
                if a > PIV_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr, la)) => {
                            ratio < lr
                                || (ratio == lr
                                    && if bland {
                                        self.basis[i] < self.basis[li]
                                    } else {
                                        a > la
                                    })
                        }
                    };
                    if better {
                        leave = Some((i, ratio, a));
                    }
                }
            }
            let Some((r, ratio, _)) = leave else {
                return Ok(RoundOutcome::Unbounded { pivots_done: done });
            };
            self.pivot(r, j, cost);
            done += 1;
            *total_pivots += 1;
            if ratio > 0.0 {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            }
            if *total_pivots > MAX_PIVOTS {
                return Err(Error::SolverFailure("pivot limit exceeded".to_string()));
            }
            if done >= budget {
                return Ok(RoundOutcome::Budget);
            }
            if cost.iter().any(|v| !v.is_finite()) {
                return Err(Error::SolverFailure("non-finite tableau entry".to_string()));
            }
        }
    }

    /// Runs Bland rounds with refactorization between them until a freshly
    /// rebuilt tableau confirms optimality or unboundedness.
    fn optimize(&mut self, c: &[f64], bar_from: usize, total_pivots: &mut usize) -> Result<LpStatus> {
        let mut fresh = false;
        for _ in 0..MAX_ROUNDS {
            let mut cost = self.fresh_cost(c);
            let outcome = self.run_round(&mut cost, bar_from, ROUND_PIVOTS, total_pivots)?;
            match outcome {
                RoundOutcome::Optimal { pivots_done } => {
                    if fresh && pivots_done == 0 {
                        return Ok(LpStatus::Feasible);
                    }
                }
                RoundOutcome::Unbounded { pivots_done } => {
                    if fresh && pivots_done == 0 {
                        return Ok(LpStatus::Unbounded);
                    }
                }
                RoundOutcome::Budget => {}
            }
            self.refactor()?;
            fresh = true;
        }
        Err(Error::SolverFailure("verification rounds exhausted".to_string()))
    }
}

/// Solves the program. Feasible solutions are re-verified against the raw
/// rows before being returned; a violation above tolerance is reported as a
/// solver failure rather than a silently wrong answer.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.check_shape()?;
    let n = problem.n_vars;
    let n_ineq = problem.inequalities.len();

    // Normalized rows: (coeffs over structural vars, rhs >= 0, slack sign)
    // slack sign: 0 none (equality), +1 Le slack, -1 Ge surplus.
    let mut rows: Vec<(Vec<f64>, f64, i8)> = Vec::with_capacity(problem.equalities.len() + n_ineq);
    for (c, r) in &problem.equalities {
        if *r < 0.0 {
            rows.push((c.iter().map(|v| -v).collect(), -r, 0));
        } else {
            rows.push((c.clone(), *r, 0));
        }
    }
    let mut slack_sign = vec![0i8; n_ineq];
    for (k, (c, r, s)) in problem.inequalities.iter().enumerate() {
        let (c, r, s) = if *r < 0.0 {
            (c.iter().map(|v| -v).collect::<Vec<_>>(), -r, if *s == Sense::Le { Sense::Ge } else { Sense::Le })
        } else {
            (c.clone(), *r, *s)
        };
        let sign = if s == Sense::Le { 1 } else { -1 };
        slack_sign[k] = sign;
        rows.push((c, r, sign));
    }

    let m = rows.len();
    // Column layout: structural | one slack per inequality | artificials.
    let needs_art: Vec<bool> = rows.iter().map(|(_, _, sign)| *sign != 1).collect();
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let art_start = n + n_ineq;
    let ncols = art_start + n_art;

    let mut tab = Tableau {
        base: Vec::new(),
        rows: vec![vec![0.0; ncols + 1]; m],
        basis: vec![usize::MAX; m],
        ncols,
        art_start,
    };
    let n_eq = problem.equalities.len();
    let mut next_art = art_start;
    // Home row of each artificial (its unit column); used to drop the right
    // original row when a redundancy surfaces.
    let mut art_home = Vec::with_capacity(n_art);
    for (i, (c, r, sign)) in rows.iter().enumerate() {
        tab.rows[i][..n].copy_from_slice(c);
        tab.rows[i][ncols] = *r;
        if i >= n_eq {
            let k = i - n_eq;
            tab.rows[i][n + k] = *sign as f64;
        }
        if *sign == 1 {
            tab.basis[i] = n + (i - n_eq);
        } else {
            tab.rows[i][next_art] = 1.0;
            tab.basis[i] = next_art;
            art_home.push(i);
            next_art += 1;
        }
    }
    tab.base = tab.rows.clone();

    let mut pivots = 0usize;

    // Phase 1: maximize -(sum of artificials).
    if n_art > 0 {
        let phase1: Vec<f64> = (0..ncols)
            .map(|j| if j >= art_start { -1.0 } else { 0.0 })
            .collect();
        let status = tab.optimize(&phase1, ncols, &mut pivots)?;
        if status == LpStatus::Unbounded {
            return Err(Error::SolverFailure("phase 1 unbounded".to_string()));
        }
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .map(|(i, _)| tab.rhs(i).max(0.0))
            .sum();
        if infeasibility > PHASE1_TOL {
            return Ok(LpSolution {
                values: Vec::new(),
                status: LpStatus::Infeasible,
                max_violation: infeasibility,
                objective_value: None,
            });
        }
        // Drive residual (zero-level) artificials out of the basis. A row
        // with no structural pivot marks a redundancy: the stuck artificial's
        // unit column certifies its home row as linearly dependent, so that
        // original row leaves the refactorization base.
        let mut cost = vec![0.0; ncols + 1];
        let mut drop_tab_rows = Vec::new();
        let mut drop_base_rows = Vec::new();
        for i in 0..tab.rows.len() {
            if tab.basis[i] < art_start {
                continue;
            }
            let col = (0..art_start).find(|&j| tab.rows[i][j].abs() > PIV_TOL);
            match col {
                Some(j) => tab.pivot(i, j, &mut cost),
                None => {
                    drop_tab_rows.push(i);
                    drop_base_rows.push(art_home[tab.basis[i] - art_start]);
                }
            }
        }
        for &i in drop_tab_rows.iter().rev() {
            tab.rows.remove(i);
            tab.basis.remove(i);
        }
        drop_base_rows.sort_unstable();
        for &i in drop_base_rows.iter().rev() {
            tab.base.remove(i);
        }
    }

    // Phase 2: the real objective (zeros for pure feasibility), artificial
    // columns barred from entering.
    let mut phase2 = vec![0.0; ncols];
    if let Some(obj) = &problem.objective {
        phase2[..n].copy_from_slice(obj);
    }
    let status = tab.optimize(&phase2, tab.art_start, &mut pivots)?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            values: Vec::new(),
            status: LpStatus::Unbounded,
            max_violation: f64::NAN,
            objective_value: None,
        });
    }

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i);
        }
    }
    for v in x.iter_mut() {
        if *v >= -1e-11 && (*v <= 0.0 || v.is_sign_negative()) {
            *v = 0.0; // snap tiny negatives and negative zero
        }
    }

    let max_violation = raw_violation(problem, &x);
    if !max_violation.is_finite() || max_violation > CERT_TOL {
        return Err(Error::SolverFailure(format!(
            "certificate check failed: violation {max_violation:.3e}"
        )));
    }
    let objective_value = problem
        .objective
        .as_ref()
        .map(|c| c.iter().zip(&x).map(|(a, b)| a * b).sum());
    Ok(LpSolution { values: x, status: LpStatus::Feasible, max_violation, objective_value })
}

/// Largest residual of `x` against the raw rows (and the sign constraints).
fn raw_violation(problem: &LpProblem, x: &[f64]) -> f64 {
    let dot = |c: &[f64]| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let mut worst = 0.0f64;
    for (c, r) in &problem.equalities {
        worst = worst.max((dot(c) - r).abs());
    }
    for (c, r, s) in &problem.inequalities {
        let v = dot(c);
        let viol = match s {
            Sense::Le => v - r,
            Sense::Ge => r - v,
        };
        worst = worst.max(viol.max(0.0));
    }
    for &v in x {
        worst = worst.max(-v);
    }
    worst
}

/// Feasibility-with-margin: maximizes one scalar slack `s` added to every
/// designated inequality (`>= rhs + s` for `Ge`, `<= rhs - s` for `Le`),
/// with `s <= cap` and `s` free in sign. Strict feasibility of the designated
/// rows holds exactly when the maximized margin is positive; callers compare
/// against their strictness knob.
pub fn solve_with_margin(problem: &LpProblem, strict_rows: &[usize], cap: f64) -> Result<MarginSolution> {
    let n = problem.n_vars;
    let sp = n; // margin positive part
    let sm = n + 1; // margin negative part
    let mut aug = LpProblem::new(n + 2);
    for (c, r) in &problem.equalities {
        let mut row = c.clone();
        row.extend_from_slice(&[0.0, 0.0]);
        aug.equalities.push((row, *r));
    }
    for (k, (c, r, s)) in problem.inequalities.iter().enumerate() {
        let mut row = c.clone();
        if strict_rows.contains(&k) {
            match s {
                Sense::Ge => row.extend_from_slice(&[-1.0, 1.0]),
                Sense::Le => row.extend_from_slice(&[1.0, -1.0]),
            }
        } else {
            row.extend_from_slice(&[0.0, 0.0]);
        }
        aug.inequalities.push((row, *r, *s));
    }
    let mut cap_row = vec![0.0; n + 2];
    cap_row[sp] = 1.0;
    cap_row[sm] = -1.0;
    aug.inequalities.push((cap_row, cap, Sense::Le));
    // Bound the negative part too: the split pair would otherwise admit an
    // objective-neutral unbounded ray (s+ and s- growing together).
    let mut neg_row = vec![0.0; n + 2];
    neg_row[sm] = 1.0;
    aug.inequalities.push((neg_row, cap.max(2.0), Sense::Le));
    let mut obj = vec![0.0; n + 2];
    obj[sp] = 1.0;
    obj[sm] = -1.0;
    aug.objective = Some(obj);

    let sol = solve(&aug)?;
    match sol.status {
        LpStatus::Feasible => {
            let margin = sol.values[sp] - sol.values[sm];
            Ok(MarginSolution {
                values: sol.values[..n].to_vec(),
                margin,
                status: LpStatus::Feasible,
                max_violation: sol.max_violation,
            })
        }
        status => Ok(MarginSolution { values: Vec::new(), margin: f64::NEG_INFINITY, status, max_violation: f64::NAN }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(c: Vec<f64>, r: f64) -> (Vec<f64>, f64, Sense) {
        (c, r, Sense::Le)
    }
    fn ge(c: Vec<f64>, r: f64) -> (Vec<f64>, f64, Sense) {
        (c, r, Sense::Ge)
    }

    #[test]
    fn maximize_single_variable() {
        let mut p = LpProblem::new(1);
        p.inequalities.push(le(vec![1.0], 1.0));
        p.objective = Some(vec![1.0]);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Feasible);
        assert!((sol.values[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective_value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_with_objective() {
        let mut p = LpProblem::new(2);
        p.equalities.push((vec![1.0, 1.0], 1.0));
        p.objective = Some(vec![1.0, 0.0]);
        let sol = solve(&p).unwrap();
        assert!((sol.values[0] - 1.0).abs() < 1e-12);
        assert!(sol.values[1].abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_bounds() {
        // x1 + x2 <= 0.5, x1 >= 0.4, x2 >= 0.3
        let mut p = LpProblem::new(2);
        p.inequalities.push(le(vec![1.0, 1.0], 0.5));
        p.inequalities.push(ge(vec![1.0, 0.0], 0.4));
        p.inequalities.push(ge(vec![0.0, 1.0], 0.3));
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut p = LpProblem::new(1);
        p.inequalities.push(ge(vec![1.0], 1.0));
        p.objective = Some(vec![1.0]);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn tolerates_redundant_equalities() {
        let mut p = LpProblem::new(2);
        p.equalities.push((vec![1.0, 1.0], 1.0));
        p.equalities.push((vec![1.0, 1.0], 1.0));
        p.equalities.push((vec![2.0, 2.0], 2.0));
        p.objective = Some(vec![0.0, 1.0]);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Feasible);
        assert!((sol.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Many degenerate vertices at the origin; Bland must not cycle.
        let mut p = LpProblem::new(3);
        p.inequalities.push(le(vec![1.0, -1.0, 0.0], 0.0));
        p.inequalities.push(le(vec![0.0, 1.0, -1.0], 0.0));
        p.inequalities.push(le(vec![-1.0, 0.0, 1.0], 0.0));
        p.inequalities.push(le(vec![1.0, 1.0, 1.0], 3.0));
        p.objective = Some(vec![1.0, 1.0, 1.0]);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Feasible);
        assert!((sol.objective_value.unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn solves_are_bit_identical() {
        let mut p = LpProblem::new(3);
        p.equalities.push((vec![1.0, 2.0, 0.5], 2.0));
        p.inequalities.push(le(vec![1.0, 1.0, 0.0], 1.5));
        p.inequalities.push(ge(vec![0.0, 0.3, 1.0], 0.2));
        p.objective = Some(vec![1.0, 0.7, -0.2]);
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        let bits = |s: &LpSolution| s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.objective_value.unwrap().to_bits(), b.objective_value.unwrap().to_bits());
    }

    #[test]
    fn margin_mode_measures_strict_feasibility() {
        // x <= 1, x >= 0.2 strict: margin should be (1 - 0.2) / 2 shared...
        // actually with s added to the Ge row only: x - s >= 0.2, max s with
        // x <= 1 gives s = 0.8.
        let mut p = LpProblem::new(1);
        p.inequalities.push(le(vec![1.0], 1.0));
        p.inequalities.push(ge(vec![1.0], 0.2));
        let m = solve_with_margin(&p, &[1], 10.0).unwrap();
        assert_eq!(m.status, LpStatus::Feasible);
        assert!((m.margin - 0.8).abs() < 1e-9);

        // Infeasible strict system: x <= 0.1, x >= 0.2 -> negative margin.
        let mut p = LpProblem::new(1);
        p.inequalities.push(le(vec![1.0], 0.1));
        p.inequalities.push(ge(vec![1.0], 0.2));
        let m = solve_with_margin(&p, &[1], 10.0).unwrap();
        assert!(m.margin < 0.0);
        assert!((m.margin + 0.1).abs() < 1e-9);
    }

    #[test]
    fn dump_lists_rows() {
        let mut p = LpProblem::new(2);
        p.equalities.push((vec![1.0, 1.0], 1.0));
        p.inequalities.push(ge(vec![0.0, 1.0], 0.25));
        p.objective = Some(vec![1.0, 0.0]);
        let text = p.dump();
        assert!(text.contains("max: 1 0"));
        assert!(text.contains("eq: 1 1 = 1"));
        assert!(text.contains("ge: 0 1 >= 0.25"));
    }
}
