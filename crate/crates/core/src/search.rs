//! Exact small Folkman numbers.
//!
//! `decide(n, k)` asks whether some red/blue coloring of `[n]` avoids every
//! monochromatic `S(A)` with `|A| = k` and `ΣA <= n`. Each such sum set is a
//! constraint "not all red" plus "not all blue"; the search fixes element 1
//! red, branches on elements in increasing order and propagates through two
//! watched members per constraint and color. Instances also export to DIMACS
//! for external solvers, and solver models import back as colorings.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::coloring::{Color, Coloring, ColoringKind};
use crate::error::{Error, Result};
use crate::sumset::{finite_sums, KSet};

/// Note attached to colorings that come from a solver or the search.
pub const CERTIFICATE_NOTE: &str = "imported-certificate";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_constraints: usize,
    pub max_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_constraints: 10_000_000,
            max_nodes: 100_000_000,
        }
    }
}

/// Visits every ascending `k`-subset of `[n]` with sum at most `n`, in
/// lexicographic order.
pub fn for_each_bounded_kset(n: u64, k: usize, mut visit: impl FnMut(&[u64]) -> ControlFlow<()>) {
    fn rec(
        n: u64,
        k: usize,
        start: u64,
        partial: u64,
        cur: &mut Vec<u64>,
        visit: &mut impl FnMut(&[u64]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if cur.len() == k {
            return visit(cur);
        }
        let r = (k - cur.len()) as u64;
        let mut x = start;
        while r * x + r * (r - 1) / 2 <= n - partial {
            cur.push(x);
            rec(n, k, x + 1, partial + x, cur, visit)?;
            cur.pop();
            x += 1;
        }
        ControlFlow::Continue(())
    }
    if k == 0 {
        return;
    }
    let _ = rec(n, k, 1, 0, &mut Vec::with_capacity(k), &mut visit);
}

/// All distinct sum sets `S(A)`, `|A| = k`, `ΣA <= n`, in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolkmanInstance {
    pub n: u64,
    pub k: usize,
    pub constraints: Vec<Vec<u32>>,
}

impl FolkmanInstance {
    pub fn build(n: u64, k: usize, max_constraints: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "need n >= 1 and k >= 1, got n={n} k={k}"
            )));
        }
        if n > u64::from(u32::MAX) {
            return Err(Error::InvalidArgument(format!(
                "n = {n} exceeds 32-bit variables"
            )));
        }
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut constraints = Vec::new();
        let mut failure = None;
        for_each_bounded_kset(n, k, |a| {
            let sums = KSet::new(a.to_vec()).and_then(|a| finite_sums(&a));
            match sums {
                Ok(s) => {
                    let members: Vec<u32> = s.iter().map(|v| v as u32).collect();
                    if seen.insert(members.clone()) {
                        constraints.push(members);
                        if constraints.len() > max_constraints {
                            failure = Some(Error::BudgetExceeded(format!(
                                "more than {max_constraints} constraints for n={n} k={k}"
                            )));
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                }
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(Self { n, k, constraints }),
        }
    }

    /// DIMACS CNF: variable `i` true iff element `i` is blue.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "c folkman n={} k={}", self.n, self.k).unwrap();
        writeln!(out, "p cnf {} {}", self.n, 2 * self.constraints.len() + 1).unwrap();
        for c in &self.constraints {
            // forbid all-red, then all-blue
            for sign in ["", "-"] {
                for v in c {
                    write!(out, "{sign}{v} ").unwrap();
                }
                out.push_str("0\n");
            }
        }
        out.push_str("-1 0\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A witness-free coloring exists.
    Satisfiable,
    Unsatisfiable,
    /// Budget ran out first.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfiable => "sat",
            Verdict::Unsatisfiable => "unsat",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub n: u64,
    pub k: usize,
    pub verdict: Verdict,
    pub certificate: Option<Coloring>,
    pub nodes: u64,
    pub constraints: usize,
}

impl SearchOutcome {
    pub fn satisfiable(&self) -> bool {
        self.verdict == Verdict::Satisfiable
    }

    pub fn report_line(&self) -> String {
        format!(
            "n={} k={} verdict={} nodes={} constraints={}",
            self.n, self.k, self.verdict, self.nodes, self.constraints
        )
    }
}

const UNASSIGNED: u8 = 2;

struct Clause {
    members: Vec<u32>,
    /// The color that must not cover every member.
    forbidden: u8,
}

struct Solver {
    value: Vec<u8>,
    clauses: Vec<Clause>,
    /// `watches[2 * v + c]`: clauses watching `v` that forbid color `c`.
    watches: Vec<Vec<usize>>,
    trail: Vec<u32>,
    head: usize,
}

enum Propagation {
    Ok,
    Conflict,
}

impl Solver {
    /// `Err(())` when the unit constraints already clash.
    fn new(instance: &FolkmanInstance) -> std::result::Result<Self, ()> {
        let n = instance.n as usize;
        let mut solver = Self {
            value: vec![UNASSIGNED; n + 1],
            clauses: Vec::with_capacity(2 * instance.constraints.len()),
            watches: vec![Vec::new(); 2 * (n + 1)],
            trail: Vec::with_capacity(n),
            head: 0,
        };
        let mut units = Vec::new();
        for c in &instance.constraints {
            for forbidden in [0u8, 1] {
                if c.len() == 1 {
                    units.push((c[0], 1 - forbidden));
                    continue;
                }
                let id = solver.clauses.len();
                solver.watches[2 * c[0] as usize + forbidden as usize].push(id);
                solver.watches[2 * c[1] as usize + forbidden as usize].push(id);
                solver.clauses.push(Clause {
                    members: c.clone(),
                    forbidden,
                });
            }
        }
        // color(1) = red breaks the global swap symmetry.
        units.push((1, Color::Red as u8));
        for (v, col) in units {
            match solver.value[v as usize] {
                UNASSIGNED => solver.assign(v, col),
                existing if existing != col => return Err(()),
                _ => {}
            }
        }
        Ok(solver)
    }

    fn assign(&mut self, v: u32, col: u8) {
        self.value[v as usize] = col;
        self.trail.push(v);
    }

    fn undo_to(&mut self, len: usize) {
        for v in self.trail.drain(len..) {
            self.value[v as usize] = UNASSIGNED;
        }
        self.head = self.head.min(len);
    }

    fn propagate(&mut self) -> Propagation {
        while self.head < self.trail.len() {
            let v = self.trail[self.head];
            self.head += 1;
            let col = self.value[v as usize];
            let slot = 2 * v as usize + col as usize;
            let mut watching = std::mem::take(&mut self.watches[slot]);
            let mut i = 0;
            let mut conflict = false;
            while i < watching.len() {
                let id = watching[i];
                let clause = &mut self.clauses[id];
                let forbidden = clause.forbidden;
                if clause.members[0] == v {
                    clause.members.swap(0, 1);
                }
                // members[1] is v, now colored `forbidden`.
                let other = clause.members[0];
                let other_value = self.value[other as usize];
                if other_value != UNASSIGNED && other_value != forbidden {
                    i += 1;
                    continue;
                }
                let replacement = (2..clause.members.len())
                    .find(|&j| self.value[clause.members[j] as usize] != forbidden);
                if let Some(j) = replacement {
                    clause.members.swap(1, j);
                    let w = clause.members[1];
                    self.watches[2 * w as usize + forbidden as usize].push(id);
                    watching.swap_remove(i);
                    continue;
                }
                if other_value == UNASSIGNED {
                    self.assign(other, 1 - forbidden);
                    i += 1;
                } else {
                    conflict = true;
                    break;
                }
            }
            self.watches[slot].append(&mut watching);
            if conflict {
                return Propagation::Conflict;
            }
        }
        Propagation::Ok
    }

    fn next_unassigned(&self) -> Option<u32> {
        (1..self.value.len())
            .find(|&v| self.value[v] == UNASSIGNED)
            .map(|v| v as u32)
    }
}

/// Decides whether a witness-free 2-coloring of `[n]` exists.
pub fn decide(n: u64, k: usize, budget: SearchBudget) -> Result<SearchOutcome> {
    let instance = match FolkmanInstance::build(n, k, budget.max_constraints) {
        Ok(i) => i,
        Err(Error::BudgetExceeded(_)) => {
            return Ok(SearchOutcome {
                n,
                k,
                verdict: Verdict::Inconclusive,
                certificate: None,
                nodes: 0,
                constraints: budget.max_constraints,
            })
        }
        Err(e) => return Err(e),
    };
    decide_instance(&instance, budget.max_nodes)
}

pub fn decide_instance(instance: &FolkmanInstance, max_nodes: u64) -> Result<SearchOutcome> {
    let mut outcome = SearchOutcome {
        n: instance.n,
        k: instance.k,
        verdict: Verdict::Unsatisfiable,
        certificate: None,
        nodes: 0,
        constraints: instance.constraints.len(),
    };
    let Ok(mut solver) = Solver::new(instance) else {
        return Ok(outcome);
    };
    // (variable, trail length before the decision, both values tried)
    let mut decisions: Vec<(u32, usize, bool)> = Vec::new();
    loop {
        if let Propagation::Conflict = solver.propagate() {
            loop {
                let Some((v, mark, flipped)) = decisions.pop() else {
                    return Ok(outcome);
                };
                solver.undo_to(mark);
                if !flipped {
                    outcome.nodes += 1;
                    decisions.push((v, mark, true));
                    solver.assign(v, Color::Blue as u8);
                    break;
                }
            }
            continue;
        }
        let Some(v) = solver.next_unassigned() else {
            let colors: Vec<Color> = solver.value[1..]
                .iter()
                .map(|&c| if c == 1 { Color::Blue } else { Color::Red })
                .collect();
            outcome.verdict = Verdict::Satisfiable;
            outcome.certificate = Some(
                Coloring::from_colors(ColoringKind::Uniform, 0, &colors)?
                    .with_note(CERTIFICATE_NOTE),
            );
            return Ok(outcome);
        };
        if outcome.nodes >= max_nodes {
            outcome.verdict = Verdict::Inconclusive;
            return Ok(outcome);
        }
        outcome.nodes += 1;
        decisions.push((v, solver.trail.len(), false));
        solver.assign(v, Color::Red as u8);
    }
}

/// Outcome of a sweep `n = 1, 2, ...` for the least unsatisfiable `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSweep {
    pub k: usize,
    pub n_max: u64,
    /// Least unsatisfiable `n`, i.e. `F(k)`.
    pub value: Option<u64>,
    /// Outcomes in increasing `n`, ending at the first non-satisfiable one.
    pub steps: Vec<SearchOutcome>,
    pub inconclusive_at: Option<u64>,
}

impl ExactSweep {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&s.report_line());
            out.push('\n');
        }
        match (self.value, self.inconclusive_at) {
            (Some(f), _) => writeln!(out, "F({})={}", self.k, f),
            (None, Some(n)) => writeln!(out, "F({}) inconclusive at n={}", self.k, n),
            (None, None) => writeln!(out, "F({})>{}", self.k, self.n_max),
        }
        .unwrap();
        out
    }
}

/// Least `n <= n_max` with `decide(n, k)` unsatisfiable.
///
/// Unsatisfiability is inherited by larger `n`, so the sweep stops at the
/// first unsatisfiable (or inconclusive) `n`. Batches of consecutive `n` run
/// concurrently on the current rayon pool; the reported steps do not depend
/// on the batch size.
pub fn folkman_exact(k: usize, n_max: u64, budget: SearchBudget) -> Result<ExactSweep> {
    if k == 0 || n_max == 0 {
        return Err(Error::InvalidArgument("need k >= 1 and n_max >= 1".into()));
    }
    let batch = rayon::current_num_threads().max(1) as u64;
    let mut sweep = ExactSweep {
        k,
        n_max,
        value: None,
        steps: Vec::new(),
        inconclusive_at: None,
    };
    let mut start = 1;
    while start <= n_max {
        let end = (start + batch - 1).min(n_max);
        let outcomes = (start..=end)
            .into_par_iter()
            .map(|n| decide(n, k, budget))
            .collect::<Result<Vec<_>>>()?;
        for o in outcomes {
            let verdict = o.verdict;
            let n = o.n;
            sweep.steps.push(o);
            match verdict {
                Verdict::Satisfiable => {}
                Verdict::Unsatisfiable => {
                    sweep.value = Some(n);
                    return Ok(sweep);
                }
                Verdict::Inconclusive => {
                    sweep.inconclusive_at = Some(n);
                    return Ok(sweep);
                }
            }
        }
        start = end + 1;
    }
    Ok(sweep)
}

pub fn to_cnf(n: u64, k: usize, budget: SearchBudget) -> Result<String> {
    Ok(FolkmanInstance::build(n, k, budget.max_constraints)?.to_dimacs())
}

/// Reads solver output: signed integers, optionally on `v` lines, up to a `0`.
/// `c` and `s` lines are skipped.
pub fn parse_model(text: &str) -> Result<Vec<i64>> {
    let mut model = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('s') {
            continue;
        }
        let body = line.strip_prefix('v').unwrap_or(line);
        for tok in body.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad literal {tok:?}")))?;
            if lit == 0 {
                return Ok(model);
            }
            model.push(lit);
        }
    }
    Err(Error::Parse("model is not terminated by 0".into()))
}

/// Positive literal = blue. Every variable `1..=n` must appear exactly once.
pub fn import_model(model: &[i64], n: u64) -> Result<Coloring> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot import a model for n = 0".into(),
        ));
    }
    let mut colors: Vec<Option<Color>> = vec![None; n as usize];
    for &lit in model {
        let v = lit.unsigned_abs();
        if lit == 0 || v > n {
            return Err(Error::InvalidArgument(format!(
                "literal {lit} outside variables 1..={n}"
            )));
        }
        let color = if lit > 0 { Color::Blue } else { Color::Red };
        match colors[v as usize - 1] {
            None => colors[v as usize - 1] = Some(color),
            Some(c) if c == color => {}
            Some(_) => {
                return Err(Error::InvalidArgument(format!(
                    "variable {v} assigned both ways"
                )))
            }
        }
    }
    let colors = colors
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| {
                Error::InvalidArgument(format!("model leaves variable {} unassigned", i + 1))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Coloring::from_colors(ColoringKind::Uniform, 0, &colors)?.with_note(CERTIFICATE_NOTE))
}
