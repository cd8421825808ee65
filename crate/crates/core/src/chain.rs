//! Finite chains: construction of benchmark families, stationary
//! distributions and validation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bad_params, Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::math::abs;
use crate::{CONSTRUCTION_TOL, VALIDATION_TOL};

/// Benchmark families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Simple random walk on the `n`-cycle.
    Cycle { n: usize },
    /// Simple random walk on the `n x m` torus, `m <= n`. Width 1 is the
    /// cycle; width 2 keeps the doubled vertical edge as probability 1/2.
    GridTorus { n: usize, m: usize },
    /// Simple random walk on `{0,1}^d`.
    Hypercube { d: usize },
    /// Simple random walk on the complete graph `K_n`.
    Complete { n: usize },
    /// `P = [[1-p, p], [q, 1-q]]`.
    TwoState { p: f64, q: f64 },
    /// Simple random walk on an undirected multigraph.
    SrwGraph { n: usize, edges: Vec<(usize, usize)> },
    /// Symmetric uniform(0,1) weights, 0.5 on the diagonal, rows normalized.
    RandomReversible { n: usize, seed: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cycle { .. } => "cycle",
            Family::GridTorus { .. } => "grid_torus",
            Family::Hypercube { .. } => "hypercube",
            Family::Complete { .. } => "complete",
            Family::TwoState { .. } => "two_state",
            Family::SrwGraph { .. } => "srw_graph",
            Family::RandomReversible { .. } => "random_reversible",
        }
    }

    /// Whether every member of the family is a transitive chain.
    pub fn is_transitive(&self) -> bool {
        match self {
            Family::Cycle { .. }
            | Family::GridTorus { .. }
            | Family::Hypercube { .. }
            | Family::Complete { .. } => true,
            Family::TwoState { p, q } => p == q,
            Family::SrwGraph { .. } | Family::RandomReversible { .. } => false,
        }
    }

    /// Number of states the family member will have.
    pub fn state_count(&self) -> Result<usize> {
        Ok(match *self {
            Family::Cycle { n } | Family::Complete { n } | Family::RandomReversible { n, .. } => n,
            Family::SrwGraph { n, .. } => n,
            Family::GridTorus { n, m } => n
                .checked_mul(m)
                .ok_or_else(|| bad_params("torus size overflows"))?,
            Family::Hypercube { d } => {
                if d >= usize::BITS as usize {
                    return Err(bad_params("hypercube dimension too large"));
                }
                1usize << d
            }
            Family::TwoState { .. } => 2,
        })
    }

    fn transition_matrix(&self) -> Result<Matrix> {
        match *self {
            Family::Cycle { n } => {
                if n == 0 {
                    return Err(bad_params("cycle needs n >= 1"));
                }
                let mut p = Matrix::zeros(n, n);
                for i in 0..n {
                    p[(i, (i + 1) % n)] += 0.5;
                    p[(i, (i + n - 1) % n)] += 0.5;
                }
                Ok(p)
            }
            Family::GridTorus { n, m } => {
                if n == 0 || m == 0 {
                    return Err(bad_params("grid_torus needs n, m >= 1"));
                }
                if m > n {
                    return Err(bad_params(format!("grid_torus needs m <= n (got n={n}, m={m})")));
                }
                if m == 1 {
                    return Family::Cycle { n }.transition_matrix();
                }
                let size = self.state_count()?;
                let mut p = Matrix::zeros(size, size);
                for i in 0..n {
                    for j in 0..m {
                        let x = i * m + j;
                        let nbrs = [
                            ((i + 1) % n, j),
                            ((i + n - 1) % n, j),
                            (i, (j + 1) % m),
                            (i, (j + m - 1) % m),
                        ];
                        for (a, b) in nbrs {
                            p[(x, a * m + b)] += 0.25;
                        }
                    }
                }
                Ok(p)
            }
            Family::Hypercube { d } => {
                if d == 0 {
                    return Err(bad_params("hypercube needs d >= 1"));
                }
                let size = self.state_count()?;
                let mut p = Matrix::zeros(size, size);
                let w = 1.0 / d as f64;
                for x in 0..size {
                    for bit in 0..d {
                        p[(x, x ^ (1 << bit))] += w;
                    }
                }
                Ok(p)
            }
            Family::Complete { n } => {
                if n < 2 {
                    return Err(bad_params("complete graph needs n >= 2"));
                }
                let w = 1.0 / (n - 1) as f64;
                Ok(Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w }))
            }
            Family::TwoState { p, q } => {
                let ok = |v: f64| v > 0.0 && v <= 1.0;
                if !ok(p) || !ok(q) {
                    return Err(bad_params(format!("two_state needs p, q in (0, 1] (got {p}, {q})")));
                }
                Matrix::from_rows(&[vec![1.0 - p, p], vec![q, 1.0 - q]])
            }
            Family::SrwGraph { n, ref edges } => {
                if n == 0 {
                    return Err(bad_params("srw_graph needs n >= 1"));
                }
                let mut w = Matrix::zeros(n, n);
                for &(u, v) in edges {
                    if u >= n || v >= n {
                        return Err(bad_params(format!("edge ({u}, {v}) out of range for n={n}")));
                    }
                    w[(u, v)] += 1.0;
                    w[(v, u)] += 1.0;
                }
                normalize_rows(w)
            }
            Family::RandomReversible { n, seed } => {
                if n == 0 {
                    return Err(bad_params("random_reversible needs n >= 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut w = Matrix::zeros(n, n);
                for i in 0..n {
                    w[(i, i)] = 0.5;
                    for j in i + 1..n {
                        let x: f64 = rng.random();
                        w[(i, j)] = x;
                        w[(j, i)] = x;
                    }
                }
                normalize_rows(w)
            }
        }
    }
}

fn normalize_rows(mut w: Matrix) -> Result<Matrix> {
    for i in 0..w.rows() {
        let row = w.row_mut(i);
        let s: f64 = row.iter().sum();
        if s <= 0.0 {
            return Err(Error::Disconnected(format!("state {i} has no edges")));
        }
        row.iter_mut().for_each(|x| *x /= s);
    }
    Ok(w)
}

/// A validated finite irreducible chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    p: Matrix,
    pi: Vec<f64>,
    labels: Option<Vec<String>>,
    is_reversible: bool,
    is_transitive_hint: bool,
    family: Option<Family>,
}

impl ChainSpec {
    /// Builds a member of a benchmark family.
    pub fn from_family(family: &Family) -> Result<Self> {
        let p = family.transition_matrix()?;
        let mut spec = Self::from_matrix(p, None)?;
        spec.is_transitive_hint = family.is_transitive();
        spec.family = Some(family.clone());
        Ok(spec)
    }

    /// Wraps an arbitrary transition matrix after checking it is square,
    /// row-stochastic and irreducible. Reversibility is detected, not assumed.
    pub fn from_matrix(p: Matrix, labels: Option<Vec<String>>) -> Result<Self> {
        let n = p.rows();
        if n == 0 || p.cols() != n {
            return Err(Error::NonStochastic(format!(
                "expected a non-empty square matrix, got {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(bad_params(format!("{} labels for {n} states", l.len())));
            }
        }
        check_stochastic(&p, CONSTRUCTION_TOL)?;
        let pi = stationary(&p)?;
        let violation = balance_violation(&p, &pi);
        Ok(ChainSpec {
            p,
            pi,
            labels,
            is_reversible: violation <= VALIDATION_TOL,
            is_transitive_hint: false,
            family: None,
        })
    }

    pub fn with_transitive_hint(mut self, hint: bool) -> Self {
        self.is_transitive_hint = hint;
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.rows()
    }

    #[inline]
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    #[inline]
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_reversible(&self) -> bool {
        self.is_reversible
    }

    pub fn is_transitive_hint(&self) -> bool {
        self.is_transitive_hint
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn pi_min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn pi_max(&self) -> f64 {
        self.pi.iter().copied().fold(0.0, f64::max)
    }

    pub fn require_reversible(&self) -> Result<()> {
        if self.is_reversible {
            Ok(())
        } else {
            Err(Error::NotReversible {
                violation: balance_violation(&self.p, &self.pi),
            })
        }
    }

    pub fn validate(&self) -> Diagnostics {
        Diagnostics::compute(&self.p, Some(&self.pi), VALIDATION_TOL)
    }

    /// Validation plus the a-posteriori check that the transitivity hint is
    /// consistent with symmetric hitting times.
    pub fn validate_with_hitting(&self, hd: &crate::hitting::HittingData) -> Diagnostics {
        let mut d = self.validate();
        let asym = hd.asymmetry();
        d.hitting_asymmetry = Some(asym);
        if self.is_transitive_hint {
            let ok = asym <= 1e-8 * hd.h.max(1.0);
            d.transitive_hint_consistent = Some(ok);
            d.passed &= ok;
        }
        d
    }
}

fn check_stochastic(p: &Matrix, tol: f64) -> Result<()> {
    for i in 0..p.rows() {
        let row = p.row(i);
        if let Some(j) = row.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::NonStochastic(format!(
                "entry ({i}, {j}) = {} is negative or not finite",
                row[j]
            )));
        }
        let s: f64 = row.iter().sum();
        if abs(s - 1.0) > tol {
            return Err(Error::NonStochastic(format!("row {i} sums to {s:.17e}")));
        }
    }
    Ok(())
}

/// `max_{x,y} |pi(x) P(x,y) - pi(y) P(y,x)|`
pub fn balance_violation(p: &Matrix, pi: &[f64]) -> f64 {
    let n = p.rows();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            worst = worst.max(abs(pi[x] * p[(x, y)] - pi[y] * p[(y, x)]));
        }
    }
    worst
}

/// Strongly connected components of the support graph of `p` restricted to
/// `subset` (Kosaraju, iterative). Components are listed in the order their
/// smallest element appears in `subset`.
pub fn components_within(p: &Matrix, subset: &[usize]) -> Vec<Vec<usize>> {
    let k = subset.len();
    let adj = |a: usize, b: usize| p[(subset[a], subset[b])] > 0.0;

    let mut order = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    for s in 0..k {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, next)) = stack.pop() {
            if let Some(w) = (next..k).find(|&w| adj(v, w) && !seen[w]) {
                stack.push((v, w + 1));
                seen[w] = true;
                stack.push((w, 0));
            } else {
                order.push(v);
            }
        }
    }

    let mut comp = vec![usize::MAX; k];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        comp[s] = id;
        let mut members = vec![s];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for w in 0..k {
                if comp[w] == usize::MAX && adj(w, v) {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        comps.push(members);
    }
    let mut out: Vec<Vec<usize>> = comps
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|i| subset[i]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

pub fn is_irreducible(p: &Matrix) -> bool {
    let all: Vec<usize> = (0..p.rows()).collect();
    components_within(p, &all).len() == 1
}

/// Stationary distribution of an irreducible stochastic matrix.
///
/// Solves `pi (I - P) = 0` with the last equation replaced by
/// `sum(pi) = 1`, then checks the residual.
pub fn stationary(p: &Matrix) -> Result<Vec<f64>> {
    let n = p.rows();
    let all: Vec<usize> = (0..n).collect();
    let comps = components_within(p, &all);
    if comps.len() != 1 {
        return Err(Error::Disconnected(format!(
            "{} strongly connected components: {:?}",
            comps.len(),
            comps
        )));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // Rows of `a` are the equations; equation y reads sum_x pi(x)(I-P)(x,y) = 0.
    let mut a = Matrix::from_fn(n, n, |y, x| {
        let ident = if x == y { 1.0 } else { 0.0 };
        ident - p[(x, y)]
    });
    a.row_mut(n - 1).iter_mut().for_each(|v| *v = 1.0);
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = Lu::new(a)?.solve(&b);
    let residual = stationarity_residual(p, &pi);
    if residual > VALIDATION_TOL {
        return Err(Error::SingularSolve(format!(
            "stationary residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(pi)
}

pub fn stationarity_residual(p: &Matrix, pi: &[f64]) -> f64 {
    let pp = p.vec_mul(pi);
    pp.iter()
        .zip(pi)
        .fold(0.0f64, |m, (a, b)| m.max(abs(a - b)))
}

/// Outcome of validating a transition matrix. Never an error: every check
/// is reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tolerance: f64,
    pub max_row_sum_deviation: f64,
    pub min_entry: f64,
    pub irreducible: bool,
    pub components: usize,
    pub stationarity_residual: Option<f64>,
    pub max_balance_violation: Option<f64>,
    pub hitting_asymmetry: Option<f64>,
    pub transitive_hint_consistent: Option<bool>,
    pub passed: bool,
}

impl Diagnostics {
    /// Validates a raw matrix; `pi` is computed when not supplied and the
    /// matrix is irreducible.
    pub fn compute(p: &Matrix, pi: Option<&[f64]>, tol: f64) -> Self {
        let n = p.rows();
        let mut max_dev = 0.0f64;
        let mut min_entry = f64::INFINITY;
        for i in 0..n {
            let row = p.row(i);
            let s: f64 = row.iter().sum();
            max_dev = max_dev.max(abs(s - 1.0));
            min_entry = row.iter().copied().fold(min_entry, f64::min);
        }
        let all: Vec<usize> = (0..n).collect();
        let components = components_within(p, &all).len();
        let irreducible = components == 1;
        let owned_pi;
        let pi = match pi {
            Some(pi) => Some(pi),
            None if irreducible && max_dev <= tol && min_entry >= 0.0 => {
                owned_pi = stationary(p).ok();
                owned_pi.as_deref()
            }
            None => None,
        };
        let stationarity_residual = pi.map(|pi| stationarity_residual(p, pi));
        let max_balance_violation = pi.map(|pi| balance_violation(p, pi));
        let passed = irreducible
            && max_dev <= tol
            && min_entry >= 0.0
            && stationarity_residual.is_some_and(|r| r <= tol)
            && max_balance_violation.is_some_and(|r| r <= tol);
        Diagnostics {
            tolerance: tol,
            max_row_sum_deviation: max_dev,
            min_entry,
            irreducible,
            components,
            stationarity_residual,
            max_balance_violation,
            hitting_asymmetry: None,
            transitive_hint_consistent: None,
            passed,
        }
    }
}
