//! CDCL SAT solver: two watched literals, first-UIP clause learning,
//! activity-based branching with phase saving, Luby restarts.

use std::collections::BinaryHeap;
use std::time::Instant;

use super::Budget;

/// DIMACS-style clause set: variables are `1..=num_vars`, a literal is a
/// nonzero signed variable index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Clauses {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Model indexed by variable (`model[v]` for `v >= 1`; index 0 unused).
    Sat(Vec<bool>),
    Unsat,
    Unknown(String),
}

type Lit = u32; // 2*var + (negative as u32)

fn lit(d: i32) -> Lit {
    (d.unsigned_abs() << 1) | (d < 0) as u32
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

#[derive(Clone, Copy, PartialEq)]
struct Act(f64);
impl Eq for Act {}
impl PartialOrd for Act {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Act {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    /// Per variable: 0 unassigned, 1 true, -1 false.
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    order: BinaryHeap<(Act, std::cmp::Reverse<usize>)>,
    seen: Vec<bool>,
}

fn luby(mut i: u64) -> u64 {
    // Luby sequence 1 1 2 1 1 2 4 ..., 0-indexed.
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

impl Solver {
    fn new(n: usize) -> Self {
        let mut order = BinaryHeap::new();
        for v in 1..=n {
            order.push((Act(0.0), std::cmp::Reverse(v)));
        }
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * (n + 1)],
            value: vec![0; n + 1],
            level: vec![0; n + 1],
            reason: vec![None; n + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n + 1],
            var_inc: 1.0,
            phase: vec![false; n + 1],
            order,
            seen: vec![false; n + 1],
        }
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[var(l)];
        if l & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn assign(&mut self, l: Lit, reason: Option<usize>) {
        let v = var(l);
        self.value[v] = if l & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Add an input clause at level 0. Returns false on an immediate
    /// conflict.
    fn add_clause(&mut self, mut c: Vec<Lit>) -> bool {
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == neg(w[1])) {
            return true;
        }
        c.retain(|&l| self.lit_value(l) != -1);
        if c.iter().any(|&l| self.lit_value(l) == 1) {
            return true;
        }
        match c.len() {
            0 => false,
            1 => {
                self.assign(c[0], None);
                self.propagate().is_none()
            }
            _ => {
                let i = self.clauses.len();
                self.watches[neg(c[0]) as usize].push(i);
                self.watches[neg(c[1]) as usize].push(i);
                self.clauses.push(c);
                true
            }
        }
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            // Clauses watching ¬p are indexed under p.
            let mut ws = std::mem::take(&mut self.watches[p as usize]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let false_lit = neg(p);
                {
                    let c = &mut self.clauses[ci];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[ci][0];
                if self.lit_value(first) == 1 {
                    i += 1;
                    continue;
                }
                let len = self.clauses[ci].len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[ci][k];
                    if self.lit_value(l) != -1 {
                        self.clauses[ci].swap(1, k);
                        self.watches[neg(l) as usize].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if self.lit_value(first) == -1 {
                    conflict = Some(ci);
                    break;
                }
                self.assign(first, Some(ci));
                i += 1;
            }
            let rest = std::mem::take(&mut self.watches[p as usize]);
            ws.extend(rest);
            self.watches[p as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
            self.order = (1..self.value.len()).map(|v| (Act(self.activity[v]), std::cmp::Reverse(v))).collect();
        }
        self.order.push((Act(self.activity[v]), std::cmp::Reverse(v)));
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut counter = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            let c = self.clauses[confl].clone();
            for &q in c.iter().skip(if p.is_some() { 1 } else { 0 }) {
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= dl {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[var(pl)] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = neg(pl);
                break;
            }
            confl = self.reason[var(pl)].expect("implied literal has a reason");
        }
        for &l in &learnt[1..] {
            self.seen[var(l)] = false;
        }
        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[var(learnt[i])] > self.level[var(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[var(learnt[1])]
        };
        self.var_inc /= 0.95;
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl as usize];
        for i in (start..self.trail.len()).rev() {
            let v = var(self.trail[i]);
            self.phase[v] = self.trail[i] & 1 == 0;
            self.value[v] = 0;
            self.reason[v] = None;
            self.order.push((Act(self.activity[v]), std::cmp::Reverse(v)));
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
    }

    fn pick(&mut self) -> Option<Lit> {
        while let Some((_, std::cmp::Reverse(v))) = self.order.pop() {
            if self.value[v] == 0 {
                return Some(((v as u32) << 1) | (!self.phase[v]) as u32);
            }
        }
        None
    }

    fn solve(&mut self, budget: &Budget) -> SatResult {
        let start = Instant::now();
        let mut conflicts: u64 = 0;
        let mut restart_no = 0u64;
        let mut next_restart = 100 * luby(0);
        let mut since_restart = 0u64;
        if self.propagate().is_some() {
            return SatResult::Unsat;
        }
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    return SatResult::Unsat;
                }
                if conflicts >= budget.conflicts {
                    return SatResult::Unknown("conflict budget exhausted".into());
                }
                if conflicts.is_multiple_of(256) && start.elapsed() > budget.time {
                    return SatResult::Unknown("timeout".into());
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.assign(learnt[0], None);
                } else {
                    let i = self.clauses.len();
                    self.watches[neg(learnt[0]) as usize].push(i);
                    self.watches[neg(learnt[1]) as usize].push(i);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.assign(first, Some(i));
                }
            } else {
                if since_restart >= next_restart {
                    restart_no += 1;
                    next_restart = 100 * luby(restart_no);
                    since_restart = 0;
                    self.cancel_until(0);
                    continue;
                }
                match self.pick() {
                    None => {
                        let model = self.value.iter().map(|&v| v == 1).collect();
                        return SatResult::Sat(model);
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.assign(l, None);
                    }
                }
            }
        }
    }
}

/// Decide satisfiability of `cnf` within `budget`.
pub fn sat_solve(cnf: &Clauses, budget: &Budget) -> SatResult {
    let n = cnf.num_vars as usize;
    let mut s = Solver::new(n);
    for c in &cnf.clauses {
        if c.iter().any(|&l| l == 0 || l.unsigned_abs() as usize > n) {
            return SatResult::Unknown("malformed clause".into());
        }
        if !s.add_clause(c.iter().map(|&l| lit(l)).collect()) {
            return SatResult::Unsat;
        }
    }
    s.solve(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn solve(n: u32, cs: &[&[i32]]) -> SatResult {
        let cnf = Clauses { num_vars: n, clauses: cs.iter().map(|c| c.to_vec()).collect() };
        sat_solve(&cnf, &Budget::default())
    }

    #[test]
    fn contradiction_is_unsat() {
        assert_eq!(solve(1, &[&[1], &[-1]]), SatResult::Unsat);
    }

    #[test]
    fn single_clause_is_sat() {
        let SatResult::Sat(m) = solve(2, &[&[1, 2]]) else { panic!() };
        assert!(m[1] || m[2]);
    }

    #[test]
    fn pigeonhole_3_into_2_is_unsat() {
        // p(i,j): pigeon i in hole j -> var 2*i + j + 1
        let p = |i: i32, j: i32| 2 * i + j + 1;
        let mut cs: Vec<Vec<i32>> = (0..3).map(|i| vec![p(i, 0), p(i, 1)]).collect();
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cs.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let cnf = Clauses { num_vars: 6, clauses: cs };
        assert_eq!(sat_solve(&cnf, &Budget::default()), SatResult::Unsat);
    }

    #[test]
    fn luby_prefix() {
        let v: Vec<u64> = (0..7).map(luby).collect();
        assert_eq!(v, [1, 1, 2, 1, 1, 2, 4]);
    }

    proptest! {
        #[test]
        fn agrees_with_enumeration(cs in prop::collection::vec(prop::collection::vec((1i32..=6, any::<bool>()), 1..4), 0..30)) {
            let clauses: Vec<Vec<i32>> = cs.iter().map(|c| c.iter().map(|&(v, s)| if s { v } else { -v }).collect()).collect();
            let cnf = Clauses { num_vars: 6, clauses: clauses.clone() };
            let brute = (0u32..64).any(|m| clauses.iter().all(|c| c.iter().any(|&l| ((m >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0))));
            match sat_solve(&cnf, &Budget::default()) {
                SatResult::Sat(model) => {
                    prop_assert!(brute);
                    for c in &clauses {
                        prop_assert!(c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)));
                    }
                }
                SatResult::Unsat => prop_assert!(!brute),
                SatResult::Unknown(r) => prop_assert!(false, "{}", r),
            }
        }
    }
}
