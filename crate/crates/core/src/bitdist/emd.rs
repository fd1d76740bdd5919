use std::collections::VecDeque;

use num_rational::BigRational;
use serde::Serialize;

use super::scalar::{Real, Scalar};
use super::{BitString, DistError, DistributionSpec};

/// Optimal solution of a balanced transportation problem, with dual potentials.
///
/// Optimality certificate: `u[i] + v[j] <= cost[i][j]` for every cell, with
/// equality wherever `flow[i][j] > 0`.
#[derive(Clone, Debug)]
pub struct TransportSolution<T> {
    pub flow: Vec<Vec<T>>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferEntry {
    pub source: BitString,
    pub target: BitString,
    pub mass: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferPlan {
    pub entries: Vec<TransferEntry>,
}

impl TransferPlan {
    /// Expected normalized Hamming distance under the plan.
    pub fn cost_f64(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let d = e.source.hamming_count(&e.target).expect("plan strings share a length");
                e.mass.to_f64() * d as f64 / e.source.len() as f64
            })
            .sum()
    }

    /// Largest absolute deviation of the plan's marginals from `p` and `q`.
    pub fn marginal_error(&self, p: &DistributionSpec, q: &DistributionSpec) -> f64 {
        let mut worst: f64 = 0.0;
        for (atom, w) in p.iter_f64() {
            let s: f64 = self.entries.iter().filter(|e| &e.source == atom).map(|e| e.mass.to_f64()).sum();
            worst = worst.max((s - w).abs());
        }
        for (atom, w) in q.iter_f64() {
            let s: f64 = self.entries.iter().filter(|e| &e.target == atom).map(|e| e.mass.to_f64()).sum();
            worst = worst.max((s - w).abs());
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct EmdResult {
    pub value: Real,
    pub plan: TransferPlan,
}

/// Earth mover's distance under normalized Hamming cost, solved exactly.
///
/// Exact arithmetic is used when both distributions carry rational weights.
pub fn emd(p: &DistributionSpec, q: &DistributionSpec) -> Result<EmdResult, DistError> {
    if p.n() != q.n() {
        return Err(DistError::DimensionMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    let counts: Vec<Vec<usize>> = p
        .atoms()
        .iter()
        .map(|a| q.atoms().iter().map(|b| a.hamming_count(b).expect("same n")).collect())
        .collect();
    match (p.exact_weights(), q.exact_weights()) {
        (Some(pw), Some(qw)) => {
            let sol = solve_with_costs::<BigRational>(pw, qw, &counts, p.n());
            Ok(build_result(p, q, sol, Real::Exact))
        }
        _ => {
            let sol = solve_with_costs::<f64>(&p.float_weights(), &q.float_weights(), &counts, p.n());
            Ok(build_result(p, q, sol, Real::Float))
        }
    }
}

fn solve_with_costs<T: Scalar>(supply: &[T], demand: &[T], counts: &[Vec<usize>], n: usize) -> TransportSolution<T> {
    let scale = T::from_count(n);
    let cost: Vec<Vec<T>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| T::from_count(c) / scale.clone()).collect())
        .collect();
    solve_transport(supply, demand, &cost)
}

fn build_result<T: Scalar>(
    p: &DistributionSpec,
    q: &DistributionSpec,
    sol: TransportSolution<T>,
    wrap: fn(T) -> Real,
) -> EmdResult {
    let mut entries = Vec::new();
    for (i, row) in sol.flow.into_iter().enumerate() {
        for (j, x) in row.into_iter().enumerate() {
            if x > T::zero() {
                entries.push(TransferEntry {
                    source: p.atoms()[i].clone(),
                    target: q.atoms()[j].clone(),
                    mass: wrap(x),
                });
            }
        }
    }
    EmdResult {
        value: wrap(sol.value),
        plan: TransferPlan { entries },
    }
}

/// Transportation simplex for a balanced problem (total supply equals total demand).
///
/// Starts from the north-west corner basis and pivots with the smallest-index
/// entering and leaving rules, which rules out cycling on degenerate bases.
pub fn solve_transport<T: Scalar>(supply: &[T], demand: &[T], cost: &[Vec<T>]) -> TransportSolution<T> {
    let rows = supply.len();
    let cols = demand.len();
    assert!(rows > 0 && cols > 0, "empty transportation problem");
    assert!(cost.len() == rows && cost.iter().all(|r| r.len() == cols), "cost matrix shape");

    let mut flow = vec![vec![T::zero(); cols]; rows];
    let mut basic = vec![vec![false; cols]; rows];

    // North-west corner: a staircase of rows + cols - 1 basic cells.
    let mut s: Vec<T> = supply.to_vec();
    let mut d: Vec<T> = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        basic[i][j] = true;
        if i == rows - 1 && j == cols - 1 {
            // Absorb rounding slack in floating-point mode.
            flow[i][j] = s[i].clone().clamp_nonnegative();
            break;
        }
        let row_done = s[i] <= d[j];
        let x = if row_done { s[i].clone() } else { d[j].clone() };
        flow[i][j] = x.clone().clamp_nonnegative();
        s[i] = s[i].clone() - x.clone();
        d[j] = d[j].clone() - x;
        if (row_done && i < rows - 1) || j == cols - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    loop {
        let (u, v) = potentials(&basic, cost);
        let mut entering = None;
        'scan: for (r, row) in cost.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if basic[r][c] {
                    continue;
                }
                let reduced = cell.clone() - u[r].clone() - v[c].clone();
                if reduced.is_definitely_negative() {
                    entering = Some((r, c));
                    break 'scan;
                }
            }
        }
        let Some((er, ec)) = entering else {
            let mut value = T::zero();
            for r in 0..rows {
                for c in 0..cols {
                    if basic[r][c] {
                        value = value + flow[r][c].clone() * cost[r][c].clone();
                    }
                }
            }
            return TransportSolution { flow, u, v, value };
        };

        // Path in the basis tree from row `er` to column `ec`; cells alternate -,+,-,...
        let path = tree_path(&basic, er, ec);
        let mut theta: Option<T> = None;
        let mut leaving = (usize::MAX, usize::MAX);
        for (t, &(r, c)) in path.iter().enumerate() {
            if t % 2 == 0 {
                let x = flow[r][c].clone();
                let better = match &theta {
                    None => true,
                    Some(best) => x < *best || (!(*best < x) && (r, c) < leaving),
                };
                if better {
                    theta = Some(x);
                    leaving = (r, c);
                }
            }
        }
        let theta = theta.expect("a cycle has at least one decreasing cell");
        for (t, &(r, c)) in path.iter().enumerate() {
            if t % 2 == 0 {
                flow[r][c] = (flow[r][c].clone() - theta.clone()).clamp_nonnegative();
            } else {
                flow[r][c] = flow[r][c].clone() + theta.clone();
            }
        }
        flow[er][ec] = theta;
        basic[er][ec] = true;
        basic[leaving.0][leaving.1] = false;
        flow[leaving.0][leaving.1] = T::zero();
    }
}

/// Dual potentials with `u[0] = 0` and `u[i] + v[j] = cost[i][j]` on basic cells.
fn potentials<T: Scalar>(basic: &[Vec<bool>], cost: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let rows = basic.len();
    let cols = basic[0].len();
    let mut u: Vec<Option<T>> = vec![None; rows];
    let mut v: Vec<Option<T>> = vec![None; cols];
    u[0] = Some(T::zero());
    // Node ids: rows are 0..rows, columns are rows..rows+cols.
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        if node < rows {
            let ui = u[node].clone().expect("visited");
            for c in 0..cols {
                if basic[node][c] && v[c].is_none() {
                    v[c] = Some(cost[node][c].clone() - ui.clone());
                    queue.push_back(rows + c);
                }
            }
        } else {
            let c = node - rows;
            let vc = v[c].clone().expect("visited");
            for r in 0..rows {
                if basic[r][c] && u[r].is_none() {
                    u[r] = Some(cost[r][c].clone() - vc.clone());
                    queue.push_back(r);
                }
            }
        }
    }
    (
        u.into_iter().map(|x| x.expect("basis spans all rows")).collect(),
        v.into_iter().map(|x| x.expect("basis spans all columns")).collect(),
    )
}

/// Basic cells along the unique tree path from row `from_row` to column `to_col`.
fn tree_path(basic: &[Vec<bool>], from_row: usize, to_col: usize) -> Vec<(usize, usize)> {
    let rows = basic.len();
    let cols = basic[0].len();
    let mut parent = vec![usize::MAX; rows + cols];
    parent[from_row] = from_row;
    let mut queue = VecDeque::from([from_row]);
    let target = rows + to_col;
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        if node < rows {
            for c in 0..cols {
                if basic[node][c] && parent[rows + c] == usize::MAX {
                    parent[rows + c] = node;
                    queue.push_back(rows + c);
                }
            }
        } else {
            let c = node - rows;
            for r in 0..rows {
                if basic[r][c] && parent[r] == usize::MAX {
                    parent[r] = node;
                    queue.push_back(r);
                }
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = target;
    while node != from_row {
        let prev = parent[node];
        let cell = if node < rows { (node, prev - rows) } else { (prev, node - rows) };
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn identity_has_zero_cost() {
        let p = DistributionSpec::new_exact(2, vec![(bs("00"), q(1, 3)), (bs("11"), q(2, 3))]).unwrap();
        let r = emd(&p, &p).unwrap();
        assert!(r.value.is_zero());
    }

    #[test]
    fn complement_point_masses() {
        let p = DistributionSpec::point_mass(bs("0000"));
        let r = DistributionSpec::point_mass(bs("1111"));
        assert_eq!(emd(&p, &r).unwrap().value, Real::Exact(BigRational::one()));
    }

    #[test]
    fn forced_plan() {
        let p = DistributionSpec::point_mass(bs("00"));
        let r = DistributionSpec::new_exact(2, vec![(bs("00"), q(1, 2)), (bs("11"), q(1, 2))]).unwrap();
        let res = emd(&p, &r).unwrap();
        assert_eq!(res.value, Real::Exact(q(1, 2)));
        assert_eq!(res.plan.entries.len(), 2);
        assert!(res.plan.marginal_error(&p, &r) < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates_with_certificate() {
        let supply = vec![q(1, 2), q(1, 2), q(0, 1)];
        let demand = vec![q(1, 2), q(1, 2)];
        let cost = vec![
            vec![q(1, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1)],
            vec![q(0, 1), q(0, 1)],
        ];
        let sol = solve_transport(&supply, &demand, &cost);
        assert!(sol.value.is_zero());
        for r in 0..3 {
            for c in 0..2 {
                assert!(sol.u[r].clone() + sol.v[c].clone() <= cost[r][c]);
            }
        }
    }
}
