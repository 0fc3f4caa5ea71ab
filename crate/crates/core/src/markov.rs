//! Finite-state mark chains.
//!
//! States are 0-based in the API; file formats and error messages that name
//! states use 1-based indices to match the usual `{1, …, n}` labelling.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::par::{self, Rng};
use crate::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// Row-stochastic matrix `P(i, j) = P(X_{k+1} = j | X_k = i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    /// Validates shape and stochasticity. Ergodicity is checked separately
    /// by the operations that need it.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has entry {p} outside [0, 1]",
                    i + 1
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidMatrix(format!("row {} sums to {s}", i + 1)));
            }
        }
        Ok(TransitionMatrix { n, rows })
    }

    /// `[[p_dd, 1 − p_dd], [1 − p_uu, p_uu]]` with state 0 = down, 1 = up.
    pub fn two_state(p_dd: f64, p_uu: f64) -> Result<Self> {
        Self::new(vec![vec![p_dd, 1.0 - p_dd], vec![1.0 - p_uu, p_uu]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.rows[i][j])
    }

    #[allow(clippy::needless_range_loop)]
    fn reachable(&self, from: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                let p = if forward { self.rows[u][v] } else { self.rows[v][u] };
                if p > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn is_irreducible(&self) -> bool {
        self.reachable(0, true).iter().all(|&b| b) && self.reachable(0, false).iter().all(|&b| b)
    }

    /// Period of an irreducible chain: gcd of `level(u) + 1 − level(v)` over
    /// all edges, with BFS levels from state 0.
    pub fn period(&self) -> usize {
        let mut level = vec![usize::MAX; self.n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..self.n {
                if self.rows[u][v] > 0.0 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..self.n {
            for v in 0..self.n {
                if self.rows[u][v] > 0.0 && level[u] != usize::MAX && level[v] != usize::MAX {
                    let d = (level[u] + 1).abs_diff(level[v]);
                    g = gcd(g, d);
                }
            }
        }
        g.max(1)
    }

    pub fn require_irreducible(&self) -> Result<()> {
        if !self.is_irreducible() {
            return Err(Error::NotErgodic("chain is reducible".into()));
        }
        Ok(())
    }

    pub fn require_ergodic(&self) -> Result<()> {
        self.require_irreducible()?;
        let d = self.period();
        if d != 1 {
            return Err(Error::NotErgodic(format!("chain is periodic with period {d}")));
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Ergodic probabilities `π*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    /// The rank-one matrix `Π*` whose every row is `π`.
    pub fn projector(&self) -> DMatrix<f64> {
        let n = self.pi.len();
        DMatrix::from_fn(n, n, |_, j| self.pi[j])
    }

    pub fn expectation(&self, f: &[f64]) -> f64 {
        self.pi.iter().zip(f).map(|(p, x)| p * x).sum()
    }
}

/// Mark value `a(i)` for each state, in dollars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkTable {
    pub a: Vec<f64>,
}

impl MarkTable {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidParameter("empty mark table".into()));
        }
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("mark {x} is not finite")));
        }
        Ok(MarkTable { a })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Relative successor frequencies of a state sequence.
pub fn estimate_transitions(states: &[usize], n: usize) -> Result<TransitionMatrix> {
    if states.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two observations to estimate transitions".into(),
        ));
    }
    if let Some(s) = states.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParameter(format!(
            "state {} outside 1..={n}",
            s + 1
        )));
    }
    let mut counts = vec![vec![0u64; n]; n];
    for w in states.windows(2) {
        counts[w[0]][w[1]] += 1;
    }
    let empty: Vec<usize> = (0..n)
        .filter(|&i| counts[i].iter().all(|&c| c == 0))
        .map(|i| i + 1)
        .collect();
    if !empty.is_empty() {
        return Err(Error::UnvisitedStates(empty));
    }
    let rows = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter().map(|&c| c as f64 / total as f64).collect()
        })
        .collect();
    TransitionMatrix::new(rows)
}

/// Solves `π P = π`, `Σ π = 1` by replacing one equation of `(Pᵀ − I) π = 0`
/// with the normalisation row.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    p.require_ergodic()?;
    let n = p.n();
    let mut a = p.to_matrix().transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = a
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular { condition: f64::INFINITY })?;
    // Round-off can leave tiny negatives; clip and renormalise.
    let mut pi: Vec<f64> = sol.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Ok(StationaryDistribution { pi })
}

/// Solves `(P + Π* − I) g = b`.
pub fn fundamental_solve(
    p: &TransitionMatrix,
    pi: &StationaryDistribution,
    b: &[f64],
) -> Result<Vec<f64>> {
    let n = p.n();
    if pi.pi.len() != n || b.len() != n {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: P is {n}x{n}, pi has {}, b has {}",
            pi.pi.len(),
            b.len()
        )));
    }
    if let Some(x) = b.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("b contains {x}")));
    }
    let a = p.to_matrix() + pi.projector() - DMatrix::identity(n, n);
    let rhs = DVector::from_column_slice(b);
    let lu = a.clone().lu();
    let mut g = match lu.solve(&rhs) {
        Some(g) if g.iter().all(|x| x.is_finite()) => g,
        _ => {
            return Err(Error::Singular {
                condition: condition_estimate(&a),
            })
        }
    };
    // One step of iterative refinement.
    let r = &rhs - &a * &g;
    if let Some(dg) = lu.solve(&r) {
        g += dg;
    }
    let bnorm = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let resid = (&a * &g - &rhs).amax();
    if resid > 1e-10 * (1.0 + bnorm) {
        return Err(Error::Singular {
            condition: condition_estimate(&a),
        });
    }
    Ok(g.iter().copied().collect())
}

/// `‖A‖₁ ‖A⁻¹‖₁`, or infinity when `A` cannot be inverted.
fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match a.clone().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Draws the next state from row `i` by inversion of the cumulative row.
pub fn step(p: &TransitionMatrix, i: usize, rng: &mut Rng) -> usize {
    sample_from(&p.rows[i], rng)
}

pub fn sample_from(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &q) in probs.iter().enumerate() {
        acc += q;
        if u < acc {
            return j;
        }
    }
    // u landed in the round-off gap at the top; take the last positive entry.
    probs.iter().rposition(|&q| q > 0.0).unwrap_or(probs.len() - 1)
}

/// Simulates `steps` states, the first drawn from `pi0`.
pub fn simulate_chain(
    p: &TransitionMatrix,
    pi0: &[f64],
    steps: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut rng = par::rng(seed);
    simulate_chain_with(p, pi0, steps, &mut rng)
}

pub fn simulate_chain_with(
    p: &TransitionMatrix,
    pi0: &[f64],
    steps: usize,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    p.require_irreducible()?;
    if pi0.len() != p.n() || (pi0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "initial distribution must have n entries summing to 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(steps);
    let mut s = sample_from(pi0, rng);
    out.push(s);
    for _ in 1..steps {
        s = step(p, s, rng);
        out.push(s);
    }
    Ok(out)
}

/// Point mass on state `i`, for deterministic starts.
pub fn point_mass(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Chain plus marks; the JSON form is `{"n":…, "P":[[…]], "a":[…]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkModel {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub a: Vec<f64>,
}

impl MarkModel {
    pub fn new(p: &TransitionMatrix, marks: &MarkTable) -> Result<Self> {
        if p.n() != marks.len() {
            return Err(Error::InvalidParameter(format!(
                "{} states but {} marks",
                p.n(),
                marks.len()
            )));
        }
        Ok(MarkModel {
            n: p.n(),
            p: p.rows().to_vec(),
            a: marks.a.clone(),
        })
    }

    pub fn parts(&self) -> Result<(TransitionMatrix, MarkTable)> {
        let p = TransitionMatrix::new(self.p.clone())?;
        if p.n() != self.n || self.a.len() != self.n {
            return Err(Error::InvalidParameter("inconsistent mark model".into()));
        }
        Ok((p, MarkTable::new(self.a.clone())?))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let s = serde_json::to_string_pretty(self)?;
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alternation_estimates_flip_matrix() {
        let p = estimate_transitions(&[0, 1, 0, 1, 0], 2).unwrap();
        assert_eq!(p.rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn degenerate_sequence_names_empty_states() {
        match estimate_transitions(&[0, 0, 1], 3) {
            Err(Error::UnvisitedStates(s)) => assert_eq!(s, vec![2, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rows_must_be_stochastic() {
        assert!(TransitionMatrix::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1.0]]).is_ok());
    }

    #[test]
    fn symmetric_stationary() {
        for p in [0.5, 0.9] {
            let m = TransitionMatrix::two_state(p, p).unwrap();
            let pi = stationary_distribution(&m).unwrap();
            assert_relative_eq!(pi.pi[0], 0.5, epsilon = 1e-14);
            assert_relative_eq!(pi.pi[1], 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn aapl_stationary_matches_power_iteration() {
        let (pdd, puu) = (0.4956, 0.4933);
        let m = TransitionMatrix::two_state(pdd, puu).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        let closed = (1.0 - puu) / ((1.0 - puu) + (1.0 - pdd));
        assert_relative_eq!(pi.pi[0], closed, epsilon = 1e-14);
        assert!((pi.pi[0] - 0.50114).abs() < 5e-6);

        let mut v = [1.0, 0.0];
        for _ in 0..10_000 {
            let next = [
                v[0] * m.get(0, 0) + v[1] * m.get(1, 0),
                v[0] * m.get(0, 1) + v[1] * m.get(1, 1),
            ];
            if (next[0] - v[0]).abs() < 1e-15 {
                v = next;
                break;
            }
            v = next;
        }
        assert_relative_eq!(pi.pi[0], v[0], epsilon = 1e-12);
    }

    #[test]
    fn periodic_and_reducible_rejected() {
        let flip = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(flip.period(), 2);
        assert!(matches!(stationary_distribution(&flip), Err(Error::NotErgodic(_))));
        let id = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(!id.is_irreducible());
        assert!(stationary_distribution(&id).is_err());
        assert!(simulate_chain(&id, &[1.0, 0.0], 4, 1).is_err());
    }

    #[test]
    fn fundamental_solve_zero_rhs() {
        let m = TransitionMatrix::two_state(0.4956, 0.4933).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        assert_eq!(fundamental_solve(&m, &pi, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn fundamental_solve_iid_chain() {
        // P = Π* for the symmetric i.i.d. chain, so P + Π* − I = [[0, 1], [1, 0]]
        // and b = (−1, 1) is solved by g = (1, −1).
        let m = TransitionMatrix::two_state(0.5, 0.5).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        let g = fundamental_solve(&m, &pi, &[-1.0, 1.0]).unwrap();
        assert_relative_eq!(g[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn fundamental_solve_matches_explicit_two_state_inverse() {
        let (pdd, puu) = (0.4956, 0.4933);
        let m = TransitionMatrix::two_state(pdd, puu).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        let a_star = pi.expectation(&[-0.005, 0.005]);
        let b = [-0.005 - a_star, 0.005 - a_star];
        let g = fundamental_solve(&m, &pi, &b).unwrap();
        // Explicit 2x2 inverse.
        let a11 = pdd + pi.pi[0] - 1.0;
        let a12 = 1.0 - pdd + pi.pi[1];
        let a21 = 1.0 - puu + pi.pi[0];
        let a22 = puu + pi.pi[1] - 1.0;
        let det = a11 * a22 - a12 * a21;
        let g0 = (a22 * b[0] - a12 * b[1]) / det;
        let g1 = (-a21 * b[0] + a11 * b[1]) / det;
        assert_relative_eq!(g[0], g0, epsilon = 1e-14);
        assert_relative_eq!(g[1], g1, epsilon = 1e-14);
        let r0 = a11 * g[0] + a12 * g[1] - b[0];
        let r1 = a21 * g[0] + a22 * g[1] - b[1];
        assert!(r0.abs().max(r1.abs()) < 1e-10);
    }

    #[test]
    fn deterministic_flip_chain() {
        let flip = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = simulate_chain(&flip, &point_mass(2, 0), 4, 11).unwrap();
        assert_eq!(s, vec![0, 1, 0, 1]);
    }

    #[test]
    fn zero_steps_rejected() {
        let m = TransitionMatrix::two_state(0.5, 0.5).unwrap();
        assert!(simulate_chain(&m, &[0.5, 0.5], 0, 1).is_err());
    }

    #[test]
    fn mark_model_json_shape() {
        let m = TransitionMatrix::two_state(0.6, 0.7).unwrap();
        let model = MarkModel::new(&m, &MarkTable::new(vec![-0.005, 0.005]).unwrap()).unwrap();
        let s = serde_json::to_string(&model).unwrap();
        assert!(s.starts_with(r#"{"n":2,"P":[[0.6,0.4]"#), "{s}");
        let back: MarkModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, model);
    }
}
