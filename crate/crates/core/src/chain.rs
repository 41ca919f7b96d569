//! Exact analysis of the randomized game as an absorbing Markov chain.
//!
//! One step is one trick: player one starts with probability `p`, and a taken
//! pile of `k` cards goes under the taker's deck in one of its `k!` orders,
//! each with probability `1/k!`. With `Q` the transient-to-transient block
//! and `b` the expected cards placed per step, the expected number of moves
//! to absorption `t` solves `(I - Q) t = b`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::deck::{DeckError, Player, Split, SplitIndexer};
use crate::engine::{check_probability, EngineError, SinkId, Target};
use crate::graph::{check_absorbing, outcome, GraphError, Node, Outcome, Reached};
use crate::rules::RuleSpec;

/// Systems up to this many unknowns are solved by dense LU, larger ones by
/// Gauss-Seidel. Seven cards (5040 states) already take seconds with LU.
pub const DENSE_LIMIT: usize = 1_024;

/// Required bound on `‖(I - Q) t - b‖∞ / ‖b‖∞`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Deck(#[from] DeckError),
    #[error("chain is not absorbing: {} state(s) cannot reach the end of the game", states.len())]
    NotAbsorbing { states: Vec<Split> },
    #[error("chain not absorbing or numerically degenerate (relative residual {residual:e}): {detail}")]
    Degenerate { residual: f64, detail: String },
}

/// Exact one-step law from a split.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub source: Split,
    /// Distinct targets with their probabilities, sorted by target.
    pub entries: Vec<(Target, f64)>,
    /// Expected cards placed in this step.
    pub step_moves: f64,
}

impl TransitionRow {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn probability(&self, target: &Target) -> f64 {
        self.entries.iter().find(|(t, _)| t == target).map_or(0.0, |(_, w)| *w)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn starter_weights(p: f64) -> [(Player, f64); 2] {
    [(Player::One, p), (Player::Two, 1.0 - p)]
}

/// Exact distribution over successors of a non-absorbing split.
pub fn transitions(rules: &RuleSpec, state: &Split, p: f64) -> Result<TransitionRow, ChainError> {
    check_probability(p)?;
    let mut mass: BTreeMap<Target, f64> = BTreeMap::new();
    let mut step_moves = 0.0;
    for (starter, weight) in starter_weights(p) {
        let out = outcome(rules, state, starter)?;
        step_moves += weight * out.moves() as f64;
        let share = match &out {
            Outcome::Taken { pile, .. } => weight / factorial(pile.len()),
            Outcome::Sink { .. } => weight,
        };
        out.for_each_arrangement(|reached| {
            let target = match reached {
                Reached::Sink(loser) => Target::Sink(SinkId { loser }),
                Reached::Split(l, r) => Target::State(Split::new(l.to_vec(), r.to_vec())),
            };
            *mass.entry(target).or_insert(0.0) += share;
        })?;
    }
    Ok(TransitionRow { source: state.clone(), entries: mass.into_iter().collect(), step_moves })
}

/// Row of the chain over split indices, used to assemble the linear system.
fn indexed_row(
    rules: &RuleSpec,
    indexer: &SplitIndexer,
    state: &Split,
    p: f64,
) -> Result<(Vec<(Node, f64)>, f64), ChainError> {
    let mut entries: Vec<(Node, f64)> = Vec::new();
    let mut step_moves = 0.0;
    for (starter, weight) in starter_weights(p) {
        let out = outcome(rules, state, starter)?;
        step_moves += weight * out.moves() as f64;
        let share = match &out {
            Outcome::Taken { pile, .. } => weight / factorial(pile.len()),
            Outcome::Sink { .. } => weight,
        };
        out.for_each_target(indexer, |node| entries.push((node, share)))?;
    }
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<(Node, f64)> = Vec::with_capacity(entries.len());
    for (node, w) in entries {
        match merged.last_mut() {
            Some((last, acc)) if *last == node => *acc += w,
            _ => merged.push((node, w)),
        }
    }
    Ok((merged, step_moves))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    DenseLu,
    GaussSeidel,
}

/// Which solver to use; `Auto` picks dense LU up to [`DENSE_LIMIT`] unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub method: SolverMethod,
    pub unknowns: usize,
    pub nonzeros: usize,
    pub residual_inf: f64,
    pub rhs_inf: f64,
    pub relative_residual: f64,
    /// Gauss-Seidel sweeps; zero for the direct solve.
    pub iterations: usize,
}

/// Expected moves to absorption from every split of the deck.
#[derive(Debug, Clone)]
pub struct ExpectationTable {
    indexer: SplitIndexer,
    p: f64,
    /// Per split index; zero on absorbing splits.
    values: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl ExpectationTable {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn indexer(&self) -> &SplitIndexer {
        &self.indexer
    }

    /// Expected moves from `state`; zero when the game is already over.
    pub fn value(&self, state: &Split) -> f64 {
        self.values[self.indexer.index(state)]
    }

    /// Non-absorbing splits with their expectations, in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Split, f64)> + '_ {
        (0..self.values.len())
            .filter(|&i| !self.indexer.is_absorbing(i))
            .map(|i| (self.indexer.split(i), self.values[i]))
    }

    /// Average expectation over the uniform deal with `|left| = left_size`.
    pub fn deal_expectation(&self, left_size: usize) -> Result<f64, ChainError> {
        let n = self.indexer.cards();
        if left_size > n {
            return Err(DeckError::LeftSizeOutOfRange { left_size, cards: n }.into());
        }
        let (sum, count) = (0..self.values.len())
            .filter(|&i| self.indexer.left_len(i) == left_size)
            .fold((0.0, 0usize), |(s, c), i| (s + self.values[i], c + 1));
        Ok(sum / count as f64)
    }
}

/// Solves for expected moves after confirming that every split can reach
/// the end of the game.
pub fn expected_moves(rules: &RuleSpec, p: f64) -> Result<ExpectationTable, ChainError> {
    expected_moves_with(rules, p, SolverChoice::Auto)
}

pub fn expected_moves_with(rules: &RuleSpec, p: f64, solver: SolverChoice) -> Result<ExpectationTable, ChainError> {
    check_probability(p)?;
    let stuck = check_absorbing(rules)?;
    if !stuck.is_empty() {
        return Err(ChainError::NotAbsorbing { states: stuck });
    }
    solve_expected_moves(rules, p, solver)
}

/// The linear solve without the reachability precondition. On a chain that
/// is not absorbing this reports [`ChainError::Degenerate`].
pub fn solve_expected_moves(rules: &RuleSpec, p: f64, solver: SolverChoice) -> Result<ExpectationTable, ChainError> {
    check_probability(p)?;
    let indexer = SplitIndexer::new(rules.deck())?;
    let n = indexer.len();
    let transient: Vec<usize> = (0..n).filter(|&i| !indexer.is_absorbing(i)).collect();
    let mut unknown = vec![usize::MAX; n];
    for (k, &i) in transient.iter().enumerate() {
        unknown[i] = k;
    }

    let rows: Vec<(Vec<(usize, f64)>, f64)> = transient
        .par_iter()
        .map(|&i| {
            let (entries, b) = indexed_row(rules, &indexer, &indexer.split(i), p)?;
            let q = entries
                .into_iter()
                .filter_map(|(node, w)| match node {
                    Node::State(j) if unknown[j] != usize::MAX => Some((unknown[j], w)),
                    _ => None,
                })
                .collect();
            Ok((q, b))
        })
        .collect::<Result<_, ChainError>>()?;

    let m = transient.len();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let rhs_inf = b.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let nonzeros = rows.iter().map(|r| r.0.len()).sum();
    let method = match solver {
        SolverChoice::Dense => SolverMethod::DenseLu,
        SolverChoice::Iterative => SolverMethod::GaussSeidel,
        SolverChoice::Auto if m <= DENSE_LIMIT => SolverMethod::DenseLu,
        SolverChoice::Auto => SolverMethod::GaussSeidel,
    };

    let (t, iterations) = if m == 0 {
        (Vec::new(), 0)
    } else {
        match method {
            SolverMethod::DenseLu => (dense_solve(&rows, &b, rhs_inf)?, 0),
            SolverMethod::GaussSeidel => gauss_seidel(&rows, &b, rhs_inf)?,
        }
    };

    let residual_inf = residual(&rows, &b, &t);
    let relative_residual = if rhs_inf > 0.0 { residual_inf / rhs_inf } else { residual_inf };
    if !relative_residual.is_finite() || relative_residual > RESIDUAL_TOLERANCE || t.iter().any(|x| !x.is_finite()) {
        return Err(ChainError::Degenerate {
            residual: relative_residual,
            detail: "solution fails the residual check".into(),
        });
    }

    let mut values = vec![0.0; n];
    for (k, &i) in transient.iter().enumerate() {
        values[i] = t[k];
    }
    Ok(ExpectationTable {
        indexer,
        p,
        values,
        diagnostics: SolverDiagnostics {
            method,
            unknowns: m,
            nonzeros,
            residual_inf,
            rhs_inf,
            relative_residual,
            iterations,
        },
    })
}

fn residual(rows: &[(Vec<(usize, f64)>, f64)], b: &[f64], t: &[f64]) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(i, (q, _))| {
            let qt: f64 = q.iter().map(|&(j, w)| w * t[j]).sum();
            (t[i] - qt - b[i]).abs()
        })
        .fold(0.0, f64::max)
}

fn dense_solve(rows: &[(Vec<(usize, f64)>, f64)], b: &[f64], rhs_inf: f64) -> Result<Vec<f64>, ChainError> {
    let m = rows.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, (q, _)) in rows.iter().enumerate() {
        for &(j, w) in q {
            a[(i, j)] -= w;
        }
    }
    let lu = a.lu();
    match lu.solve(&DVector::from_column_slice(b)) {
        Some(t) => Ok(t.iter().copied().collect()),
        // A zero pivot: any t leaves the residual of the dependent rows at ‖b‖.
        None => Err(ChainError::Degenerate {
            residual: if rhs_inf > 0.0 { 1.0 } else { 0.0 },
            detail: "I - Q is singular (zero pivot in LU)".into(),
        }),
    }
}

fn gauss_seidel(rows: &[(Vec<(usize, f64)>, f64)], b: &[f64], rhs_inf: f64) -> Result<(Vec<f64>, usize), ChainError> {
    let m = rows.len();
    let mut diag = vec![0.0; m];
    for (i, (q, _)) in rows.iter().enumerate() {
        let d = 1.0 - q.iter().filter(|e| e.0 == i).map(|e| e.1).sum::<f64>();
        if d <= 1e-14 {
            return Err(ChainError::Degenerate {
                residual: if rhs_inf > 0.0 { 1.0 } else { 0.0 },
                detail: format!("row {i} has a self-loop of probability one"),
            });
        }
        diag[i] = d;
    }
    let target = 0.5 * RESIDUAL_TOLERANCE * rhs_inf.max(f64::MIN_POSITIVE);
    let mut t = vec![0.0; m];
    for sweep in 1..=MAX_SWEEPS {
        for (i, (q, _)) in rows.iter().enumerate() {
            let off: f64 = q.iter().filter(|e| e.0 != i).map(|&(j, w)| w * t[j]).sum();
            t[i] = (b[i] + off) / diag[i];
        }
        if sweep % 8 == 0 && residual(rows, b, &t) <= target {
            return Ok((t, sweep));
        }
    }
    Err(ChainError::Degenerate {
        residual: residual(rows, b, &t) / rhs_inf.max(f64::MIN_POSITIVE),
        detail: format!("Gauss-Seidel did not converge in {MAX_SWEEPS} sweeps"),
    })
}

/// Expected moves averaged over uniform deals with `|left| = left_size`.
pub fn deal_expectation(rules: &RuleSpec, p: f64, left_size: usize) -> Result<f64, ChainError> {
    expected_moves(rules, p)?.deal_expectation(left_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deck::Card;
    use crate::fixtures;

    #[test]
    fn mini1_rows() {
        let r = fixtures::mini1();
        let d = r.deck();
        let c = |s| d.parse_card(s).unwrap();
        let (p, n1, n2) = (c("P0"), c("N0"), c("N1"));

        let row = transitions(&r, &Split::new(vec![n1, p], vec![n2]), 0.5).unwrap();
        assert_eq!(row.entries, vec![(Target::Sink(SinkId { loser: Player::Two }), 1.0)]);
        assert_eq!(row.step_moves, 2.5);

        let row = transitions(&r, &Split::new(vec![p, n1], vec![n2]), 0.5).unwrap();
        assert!((row.total() - 1.0).abs() < 1e-12);
        assert_eq!(row.probability(&Target::State(Split::new(vec![n1, n2, p], vec![]))), 0.25);
        assert_eq!(row.probability(&Target::State(Split::new(vec![n1, p, n2], vec![]))), 0.25);
        assert_eq!(row.probability(&Target::Sink(SinkId { loser: Player::Two })), 0.5);
    }

    #[test]
    fn two_card_expectations() {
        let r = fixtures::pn();
        let cards: Vec<Card> = r.deck().cards();
        let t = expected_moves(&r, 0.5).unwrap();
        assert_eq!(t.value(&Split::new(vec![cards[0]], vec![cards[1]])), 2.0);
        assert_eq!(t.value(&Split::new(vec![cards[1]], vec![cards[0]])), 2.0);
        assert_eq!(t.deal_expectation(1).unwrap(), 2.0);
        assert_eq!(t.deal_expectation(0).unwrap(), 0.0);
        assert!(t.deal_expectation(3).is_err());
    }

    #[test]
    fn stuck_is_refused_or_singular() {
        let r = fixtures::stuck();
        match expected_moves(&r, 0.5).unwrap_err() {
            ChainError::NotAbsorbing { states } => assert_eq!(states.len(), 2),
            e => panic!("unexpected {e}"),
        }
        for solver in [SolverChoice::Dense, SolverChoice::Iterative] {
            match solve_expected_moves(&r, 0.5, solver).unwrap_err() {
                ChainError::Degenerate { residual, .. } => assert!(residual >= 1.0),
                e => panic!("unexpected {e}"),
            }
        }
    }

    #[test]
    fn dense_and_iterative_agree() {
        let r = fixtures::jacks5();
        let a = expected_moves_with(&r, 0.3, SolverChoice::Dense).unwrap();
        let b = expected_moves_with(&r, 0.3, SolverChoice::Iterative).unwrap();
        assert_eq!(b.diagnostics.method, SolverMethod::GaussSeidel);
        for ((s, x), (_, y)) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-8 * x.max(1.0), "{s:?}: {x} vs {y}");
        }
    }
}
