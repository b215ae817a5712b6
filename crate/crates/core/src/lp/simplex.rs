//! Revised primal simplex for `min cᵀx  s.t.  Ax ≥ b, x ≥ 0`.
//!
//! Each row gets a surplus variable; rows with a positive right-hand side
//! start on an artificial variable and a phase-one pass removes them. The
//! basis inverse is stored densely and refreshed from scratch periodically.
//! Columns and rows can be appended between solves; the current basis is
//! kept, so column generation restarts from the previous vertex.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Reduced costs below `-optimality_tol` are improving.
    pub optimality_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    /// Residual accepted on `Ax ≥ b` and on phase-one infeasibility.
    pub feasibility_tol: f64,
    /// Non-improving pivots before switching to Bland's rule.
    pub stall_limit: usize,
    /// Pivots between two refactorizations of the basis inverse.
    pub refactor_interval: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            optimality_tol: 1e-9,
            pivot_tol: 1e-7,
            feasibility_tol: 1e-7,
            stall_limit: 50,
            refactor_interval: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexError {
    Infeasible { residual: f64 },
    Unbounded { column: usize },
    Singular,
    IterationLimit { pivots: usize },
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplexError::Infeasible { residual } => write!(f, "LP infeasible (phase-one residual {residual:.3e})"),
            SimplexError::Unbounded { column } => write!(f, "LP unbounded along column {column}"),
            SimplexError::Singular => f.write_str("basis matrix is singular"),
            SimplexError::IterationLimit { pivots } => write!(f, "simplex stopped after {pivots} pivots"),
        }
    }
}

impl std::error::Error for SimplexError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Col(usize),
    Surplus(usize),
    Art(usize),
}

#[derive(Debug, Clone)]
struct Column {
    cost: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct SimplexStats {
    pub pivots: usize,
    pub refactorizations: usize,
    pub bland_switches: usize,
    /// Restarts from the slack basis after a singular refactorization.
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    rhs: Vec<f64>,
    cols: Vec<Column>,
    basis: Vec<Var>,
    /// Basis position of every structural column, if basic.
    col_pos: Vec<Option<usize>>,
    surplus_pos: Vec<Option<usize>>,
    /// Row-major `m × m` inverse of the basis matrix.
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    options: SimplexOptions,
    pub stats: SimplexStats,
}

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new(SimplexOptions::default())
    }
}

impl LinearProgram {
    pub fn new(options: SimplexOptions) -> Self {
        LinearProgram {
            rhs: Vec::new(),
            cols: Vec::new(),
            basis: Vec::new(),
            col_pos: Vec::new(),
            surplus_pos: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            since_refactor: 0,
            options,
            stats: SimplexStats::default(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn rhs(&self, row: usize) -> f64 {
        self.rhs[row]
    }

    pub fn cost(&self, col: usize) -> f64 {
        self.cols[col].cost
    }

    pub fn column(&self, col: usize) -> &[(usize, f64)] {
        &self.cols[col].entries
    }

    /// Appends the row `(existing columns) ≥ rhs`. Existing columns have a
    /// zero coefficient in it; the new surplus (or artificial) becomes basic.
    pub fn add_row(&mut self, rhs: f64) -> usize {
        let m = self.rhs.len();
        self.rhs.push(rhs);
        self.surplus_pos.push(None);
        let mut binv = vec![0.0; (m + 1) * (m + 1)];
        for r in 0..m {
            binv[r * (m + 1)..r * (m + 1) + m].copy_from_slice(&self.binv[r * m..(r + 1) * m]);
        }
        if rhs > 0.0 {
            binv[m * (m + 1) + m] = 1.0;
            self.basis.push(Var::Art(m));
            self.xb.push(rhs);
        } else {
            binv[m * (m + 1) + m] = -1.0;
            self.basis.push(Var::Surplus(m));
            self.surplus_pos[m] = Some(m);
            self.xb.push(-rhs);
        }
        self.binv = binv;
        m
    }

    /// Appends a nonbasic column. Row indices must already exist.
    pub fn add_column(&mut self, cost: f64, mut entries: Vec<(usize, f64)>) -> usize {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(r, _)| r);
        debug_assert!(entries.iter().all(|&(r, _)| r < self.rhs.len()));
        self.cols.push(Column { cost, entries });
        self.col_pos.push(None);
        self.cols.len() - 1
    }

    /// Current value of structural column `j`.
    pub fn value(&self, j: usize) -> f64 {
        self.col_pos[j].map_or(0.0, |p| self.xb[p].max(0.0))
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.cols.len()).map(|j| self.value(j)).collect()
    }

    pub fn is_basic(&self, j: usize) -> bool {
        self.col_pos[j].is_some()
    }

    pub fn objective(&self) -> f64 {
        self.cols.iter().enumerate().map(|(j, c)| c.cost * self.value(j)).sum()
    }

    /// Row duals `y = c_Bᵀ B⁻¹`; non-negative at an optimum.
    pub fn duals(&self) -> Vec<f64> {
        self.dual_vector(false)
    }

    fn dual_vector(&self, phase_one: bool) -> Vec<f64> {
        let m = self.rhs.len();
        let mut y = vec![0.0; m];
        for (r, var) in self.basis.iter().enumerate() {
            let c = self.var_cost(*var, phase_one);
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    fn var_cost(&self, var: Var, phase_one: bool) -> f64 {
        match (var, phase_one) {
            (Var::Art(_), true) => 1.0,
            (Var::Col(j), false) => self.cols[j].cost,
            _ => 0.0,
        }
    }

    fn column_dense(&self, var: Var) -> Vec<f64> {
        let m = self.rhs.len();
        let mut alpha = vec![0.0; m];
        match var {
            Var::Col(j) => {
                for &(i, v) in &self.cols[j].entries {
                    for (r, a) in alpha.iter_mut().enumerate() {
                        *a += self.binv[r * m + i] * v;
                    }
                }
            }
            Var::Surplus(i) => {
                for (r, a) in alpha.iter_mut().enumerate() {
                    *a = -self.binv[r * m + i];
                }
            }
            Var::Art(i) => {
                for (r, a) in alpha.iter_mut().enumerate() {
                    *a = self.binv[r * m + i];
                }
            }
        }
        alpha
    }

    fn residual_artificial(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(v, _)| matches!(v, Var::Art(_)))
            .map(|(_, x)| x.max(0.0))
            .sum()
    }

    /// Solves from the current basis. Returns the optimal objective. A basis
    /// that turns numerically singular is dropped for the slack basis once.
    pub fn solve(&mut self) -> Result<f64, SimplexError> {
        match self.solve_from_basis() {
            Err(SimplexError::Singular) => {
                self.stats.restarts += 1;
                self.reset_to_slack_basis();
                self.solve_from_basis()
            }
            other => other,
        }
    }

    fn reset_to_slack_basis(&mut self) {
        let m = self.rhs.len();
        self.binv = vec![0.0; m * m];
        self.col_pos.iter_mut().for_each(|p| *p = None);
        self.surplus_pos.iter_mut().for_each(|p| *p = None);
        for i in 0..m {
            if self.rhs[i] > 0.0 {
                self.basis[i] = Var::Art(i);
                self.binv[i * m + i] = 1.0;
                self.xb[i] = self.rhs[i];
            } else {
                self.basis[i] = Var::Surplus(i);
                self.surplus_pos[i] = Some(i);
                self.binv[i * m + i] = -1.0;
                self.xb[i] = -self.rhs[i];
            }
        }
        self.since_refactor = 0;
    }

    fn solve_from_basis(&mut self) -> Result<f64, SimplexError> {
        if self.residual_artificial() > self.options.feasibility_tol {
            self.run_phase(true)?;
            let residual = self.residual_artificial();
            if residual > self.options.feasibility_tol {
                return Err(SimplexError::Infeasible { residual });
            }
        }
        self.drive_out_artificials();
        self.run_phase(false)?;
        if !self.check_feasible() {
            self.refactor()?;
            self.run_phase(false)?;
        }
        Ok(self.objective())
    }

    fn check_feasible(&self) -> bool {
        let tol = self.options.feasibility_tol;
        if self.xb.iter().any(|&x| x < -tol) {
            return false;
        }
        let mut lhs = vec![0.0; self.rhs.len()];
        for (j, col) in self.cols.iter().enumerate() {
            let x = self.value(j);
            if x != 0.0 {
                for &(i, v) in &col.entries {
                    lhs[i] += v * x;
                }
            }
        }
        lhs.iter().zip(&self.rhs).all(|(l, b)| *l >= b - tol * (1.0 + b.abs()))
    }

    /// Pivots zero-valued artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        let m = self.rhs.len();
        for r in 0..m {
            if !matches!(self.basis[r], Var::Art(_)) {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            let mut entering = None;
            for (j, col) in self.cols.iter().enumerate() {
                if self.col_pos[j].is_some() {
                    continue;
                }
                let a: f64 = col.entries.iter().map(|&(i, v)| row[i] * v).sum();
                if a.abs() > 1e-7 {
                    entering = Some(Var::Col(j));
                    break;
                }
            }
            if entering.is_none() {
                entering = (0..m)
                    .find(|&i| self.surplus_pos[i].is_none() && row[i].abs() > 1e-7)
                    .map(Var::Surplus);
            }
            if let Some(var) = entering {
                let alpha = self.column_dense(var);
                self.pivot(r, var, &alpha);
            }
        }
    }

    fn run_phase(&mut self, phase_one: bool) -> Result<(), SimplexError> {
        let m = self.rhs.len();
        let n = self.cols.len();
        let limit = 50 * (m + n) + 10_000;
        let mut stalled = 0usize;
        let mut bland = false;
        let mut iterations = 0usize;
        loop {
            if self.since_refactor >= self.options.refactor_interval {
                self.refactor()?;
            }
            iterations += 1;
            if iterations > limit {
                return Err(SimplexError::IterationLimit { pivots: self.stats.pivots });
            }
            let y = self.dual_vector(phase_one);
            let Some((entering, d)) = self.choose_entering(&y, phase_one, bland) else {
                return Ok(());
            };
            let alpha = self.column_dense(entering);
            let Some(leave) = self.choose_leaving(&alpha, bland) else {
                if phase_one {
                    // Phase one is bounded below by zero; a ray here is numerical noise.
                    self.refactor()?;
                    continue;
                }
                return Err(SimplexError::Unbounded { column: var_index(entering, n) });
            };
            let theta = self.xb[leave].max(0.0) / alpha[leave];
            if theta * d.abs() < 1e-12 {
                stalled += 1;
                if stalled > self.options.stall_limit && !bland {
                    bland = true;
                    self.stats.bland_switches += 1;
                }
            } else {
                stalled = 0;
                bland = false;
            }
            self.pivot(leave, entering, &alpha);
        }
    }

    fn choose_entering(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(Var, f64)> {
        let tol = self.options.optimality_tol;
        let mut best: Option<(Var, f64)> = None;
        for (j, col) in self.cols.iter().enumerate() {
            if self.col_pos[j].is_some() {
                continue;
            }
            let c = if phase_one { 0.0 } else { col.cost };
            let d = c - col.entries.iter().map(|&(i, v)| y[i] * v).sum::<f64>();
            if d < -tol {
                if bland {
                    return Some((Var::Col(j), d));
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((Var::Col(j), d));
                }
            }
        }
        for (i, pos) in self.surplus_pos.iter().enumerate() {
            if pos.is_some() {
                continue;
            }
            let d = y[i];
            if d < -tol {
                if bland {
                    return Some((Var::Surplus(i), d));
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((Var::Surplus(i), d));
                }
            }
        }
        best
    }

    fn choose_leaving(&self, alpha: &[f64], bland: bool) -> Option<usize> {
        let tol = self.options.pivot_tol;
        let mut best: Option<(usize, f64)> = None;
        let n = self.cols.len();
        for (r, &a) in alpha.iter().enumerate() {
            if a <= tol {
                continue;
            }
            let ratio = self.xb[r].max(0.0) / a;
            match best {
                None => best = Some((r, ratio)),
                Some((br, bratio)) => {
                    let better = if ratio < bratio - 1e-12 {
                        true
                    } else if ratio <= bratio + 1e-12 {
                        // Prefer leaving artificials, then Bland order or the larger pivot.
                        let art = matches!(self.basis[r], Var::Art(_));
                        let bart = matches!(self.basis[br], Var::Art(_));
                        if art != bart {
                            art
                        } else if bland {
                            var_index(self.basis[r], n) < var_index(self.basis[br], n)
                        } else {
                            a > alpha[br]
                        }
                    } else {
                        false
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, leave: usize, entering: Var, alpha: &[f64]) {
        let m = self.rhs.len();
        let piv = alpha[leave];
        let theta = self.xb[leave] / piv;
        for (r, x) in self.xb.iter_mut().enumerate() {
            if r != leave {
                *x -= theta * alpha[r];
            }
        }
        self.xb[leave] = theta;
        let pivot_row: Vec<f64> = self.binv[leave * m..(leave + 1) * m].iter().map(|v| v / piv).collect();
        for (r, &f) in alpha.iter().enumerate() {
            if r == leave || f == 0.0 {
                continue;
            }
            let row = &mut self.binv[r * m..(r + 1) * m];
            for (b, p) in row.iter_mut().zip(&pivot_row) {
                *b -= f * p;
            }
        }
        self.binv[leave * m..(leave + 1) * m].copy_from_slice(&pivot_row);
        match self.basis[leave] {
            Var::Col(j) => self.col_pos[j] = None,
            Var::Surplus(i) => self.surplus_pos[i] = None,
            Var::Art(_) => {}
        }
        match entering {
            Var::Col(j) => self.col_pos[j] = Some(leave),
            Var::Surplus(i) => self.surplus_pos[i] = Some(leave),
            Var::Art(_) => unreachable!("artificials never re-enter"),
        }
        self.basis[leave] = entering;
        self.since_refactor += 1;
        self.stats.pivots += 1;
    }

    /// Recomputes `B⁻¹` and the basic values from the basis columns.
    pub fn refactor(&mut self) -> Result<(), SimplexError> {
        let m = self.rhs.len();
        self.since_refactor = 0;
        self.stats.refactorizations += 1;
        if m == 0 {
            return Ok(());
        }
        // Augmented [B | I], Gauss-Jordan with partial pivoting.
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (p, var) in self.basis.iter().enumerate() {
            match *var {
                Var::Col(j) => {
                    for &(i, v) in &self.cols[j].entries {
                        a[i * w + p] = v;
                    }
                }
                Var::Surplus(i) => a[i * w + p] = -1.0,
                Var::Art(i) => a[i * w + p] = 1.0,
            }
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        for c in 0..m {
            let (piv_row, piv_val) = (c..m)
                .map(|r| (r, a[r * w + c].abs()))
                .fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if piv_val < 1e-12 {
                return Err(SimplexError::Singular);
            }
            if piv_row != c {
                for k in 0..w {
                    a.swap(c * w + k, piv_row * w + k);
                }
            }
            let p = a[c * w + c];
            for k in 0..w {
                a[c * w + k] /= p;
            }
            let pivot_row: Vec<f64> = a[c * w..(c + 1) * w].to_vec();
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * w + c];
                if f == 0.0 {
                    continue;
                }
                for k in c..w {
                    a[r * w + k] -= f * pivot_row[k];
                }
            }
        }
        // Row p of B⁻¹ is the solution row belonging to basis position p.
        for p in 0..m {
            self.binv[p * m..(p + 1) * m].copy_from_slice(&a[p * w + m..(p + 1) * w]);
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let x: f64 = row.iter().zip(&self.rhs).map(|(b, r)| b * r).sum();
            self.xb[p] = if x.abs() < 1e-12 { 0.0 } else { x };
        }
        Ok(())
    }

    /// Writes the LP in CPLEX LP text format.
    pub fn write_lp_format(&self, col_name: impl Fn(usize) -> String, row_name: impl Fn(usize) -> String) -> String {
        let mut out = String::from("\\ restricted master\nMinimize\n obj:");
        for (j, col) in self.cols.iter().enumerate() {
            if col.cost != 0.0 {
                out.push_str(&format!(" + {} {}", col.cost, col_name(j)));
            }
        }
        out.push_str("\nSubject To\n");
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.rhs.len()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in &col.entries {
                rows[i].push((j, v));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            out.push_str(&format!(" {}:", row_name(i)));
            if row.is_empty() {
                out.push_str(" 0");
            }
            for &(j, v) in row {
                let sign = if v < 0.0 { '-' } else { '+' };
                out.push_str(&format!(" {} {} {}", sign, v.abs(), col_name(j)));
            }
            out.push_str(&format!(" >= {}\n", self.rhs[i]));
        }
        out.push_str("End\n");
        out
    }
}

fn var_index(var: Var, n: usize) -> usize {
    match var {
        Var::Col(j) => j,
        Var::Surplus(i) => n + i,
        Var::Art(i) => usize::MAX - i,
    }
}
