//! Finite two-person zero-sum matrix games.
//!
//! The row player maximizes, the column player minimizes. Games are solved
//! exactly by a dense primal simplex on the classical minimax LP, after a
//! linear-time scan for a pure saddle point. The scan lets very large tables
//! given as closures (which never get materialized) be solved when they have
//! a saddle point, which is the case for the compact-action exhibit game.

use std::fmt;

use crate::error::{check_dim, invalid, Error, Result};
use crate::num::Scalar;

/// Which player a strategy or query refers to. Player one picks rows and
/// maximizes; player two picks columns and minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// Read access to a rectangular payoff table.
pub trait PayoffTable<T> {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> T;
}

/// Dense row-major matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        check_dim(rows * cols, data.len())?;
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend(row);
        }
        Self::new(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn min_entry(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_entry(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

impl<T: Scalar> PayoffTable<T> for Matrix<T> {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn entry(&self, i: usize, j: usize) -> T {
        self.get(i, j)
    }
}

/// A payoff table defined by a closure, evaluated lazily.
pub struct FnTable<F> {
    rows: usize,
    cols: usize,
    f: F,
}

impl<F> FnTable<F> {
    pub fn new(rows: usize, cols: usize, f: F) -> Self {
        Self { rows, cols, f }
    }
}

impl<T, F: Fn(usize, usize) -> T> PayoffTable<T> for FnTable<F> {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn entry(&self, i: usize, j: usize) -> T {
        (self.f)(i, j)
    }
}

/// Probability weights over a finite action set.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedAction<T> {
    weights: Vec<T>,
}

impl<T: Scalar> MixedAction<T> {
    /// Validates that `weights` lie in `[0, 1]` and sum to one.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("mixed action over an empty action set"));
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < T::zero() || w > T::one() {
                return Err(invalid(format!("weight {w} at index {k} outside [0, 1]")));
            }
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(T::SIMPLEX_TOL) {
            return Err(invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Rescales nonnegative weights with a positive total onto the simplex.
    pub fn normalized(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if total <= T::zero() {
            return Err(invalid("weights have zero total mass"));
        }
        Self::new(weights.into_iter().map(|w| (w / total).min(T::one())).collect())
    }

    pub fn pure(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(invalid(format!("pure action {index} out of range {len}")));
        }
        let mut w = vec![T::zero(); len];
        w[index] = T::one();
        Ok(Self { weights: w })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("mixed action over an empty action set"));
        }
        Ok(Self { weights: vec![T::one() / T::from_count(len); len] })
    }

    /// Convex combination `(1 - s) self + s other`.
    pub fn blend(&self, other: &Self, s: T) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        let w = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(&a, &b)| (T::one() - s) * a + s * b)
            .collect();
        Self::normalized(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn get(&self, k: usize) -> T {
        self.weights[k]
    }

    /// Actions with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.weights.iter().copied().enumerate().filter(|(_, w)| *w > T::zero())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T: Scalar> fmt::Display for MixedAction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(12);
        for (k, w) in self.weights.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{:.*}", prec, w)?;
        }
        Ok(())
    }
}

/// Value of a matrix game together with one optimal strategy per player.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGameSolution<T> {
    pub value: T,
    pub row_strategy: MixedAction<T>,
    pub col_strategy: MixedAction<T>,
}

/// Largest table the dense simplex will materialize.
const DENSE_LIMIT: usize = 1 << 22;

/// Solves the zero-sum game with payoff table `m` (row player maximizes).
///
/// Pure saddle points are detected first. Otherwise the LP
/// `max Σz  s.t.  A z ≤ 1, z ≥ 0` with `A = m + shift > 0` is solved by
/// primal simplex under Bland's rule; the column strategy is `z / Σz`, the
/// row strategy is read from the slack reduced costs. Among several optimal
/// strategies the returned one is the vertex where Bland's rule stops, so
/// the result is deterministic but basis-dependent.
///
/// The returned pair is re-certified against every pure reply at `tol`.
pub fn solve_matrix_game<T, M>(m: &M, tol: T) -> Result<MatrixGameSolution<T>>
where
    T: Scalar,
    M: PayoffTable<T> + ?Sized,
{
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return Err(invalid("matrix dimensions must be positive"));
    }
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    if let Some(sol) = pure_saddle(m)? {
        return Ok(sol);
    }
    if rows * cols > DENSE_LIMIT {
        return Err(Error::Solver(format!(
            "{rows}x{cols} game has no pure saddle point and is too large for the dense simplex"
        )));
    }
    let sol = simplex_solve(m)?;
    certify(m, &sol, tol)?;
    Ok(sol)
}

fn pure_saddle<T, M>(m: &M) -> Result<Option<MatrixGameSolution<T>>>
where
    T: Scalar,
    M: PayoffTable<T> + ?Sized,
{
    let (rows, cols) = (m.rows(), m.cols());
    let mut best_row = 0;
    let mut best_col = 0;
    let mut maxmin = T::neg_infinity();
    for i in 0..rows {
        let mut row_min = T::infinity();
        let mut arg = 0;
        for j in 0..cols {
            let v = m.entry(i, j);
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if v < row_min {
                row_min = v;
                arg = j;
            }
        }
        if row_min > maxmin {
            maxmin = row_min;
            best_row = i;
            best_col = arg;
        }
    }
    // Fast path: the column attaining the best row minimum is often the
    // saddle column itself.
    let col_max = |j: usize| (0..rows).map(|i| m.entry(i, j)).fold(T::neg_infinity(), T::max);
    let saddle_col = if col_max(best_col) <= maxmin {
        Some(best_col)
    } else {
        let mut minmax = T::infinity();
        let mut arg = 0;
        for j in 0..cols {
            let c = col_max(j);
            if c < minmax {
                minmax = c;
                arg = j;
            }
        }
        (minmax == maxmin).then_some(arg)
    };
    Ok(match saddle_col {
        Some(j) => Some(MatrixGameSolution {
            value: maxmin,
            row_strategy: MixedAction::pure(rows, best_row)?,
            col_strategy: MixedAction::pure(cols, j)?,
        }),
        None => None,
    })
}

fn simplex_solve<T, M>(m: &M) -> Result<MatrixGameSolution<T>>
where
    T: Scalar,
    M: PayoffTable<T> + ?Sized,
{
    let (rows, cols) = (m.rows(), m.cols());
    let mut min = T::infinity();
    for i in 0..rows {
        for j in 0..cols {
            min = min.min(m.entry(i, j));
        }
    }
    let shift = T::one() - min;
    let eps = T::lit(T::PIVOT_EPS);

    // Tableau: `rows` constraint rows then the objective row. Columns are
    // z_0..z_{cols-1}, slacks s_0..s_{rows-1}, right-hand side.
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut tab = vec![T::zero(); (rows + 1) * width];
    for i in 0..rows {
        for j in 0..cols {
            tab[i * width + j] = m.entry(i, j) + shift;
        }
        tab[i * width + cols + i] = T::one();
        tab[i * width + rhs] = T::one();
    }
    let obj = rows * width;
    for j in 0..cols {
        tab[obj + j] = -T::one();
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let max_pivots = 100 * (rows + cols) + 1000;
    let mut pivots = 0;
    loop {
        // Bland: lowest-index improving column.
        let Some(enter) = (0..cols + rows).find(|&c| tab[obj + c] < -eps) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = T::infinity();
        for r in 0..rows {
            let a = tab[r * width + enter];
            if a > eps {
                let ratio = tab[r * width + rhs] / a;
                let tie = (ratio - best).abs() <= eps * best.abs().max(T::one());
                match leave {
                    Some(l) if tie => {
                        if basis[r] < basis[l] {
                            leave = Some(r);
                            best = best.min(ratio);
                        }
                    }
                    _ if ratio < best => {
                        leave = Some(r);
                        best = ratio;
                    }
                    _ => {}
                }
            }
        }
        let Some(pr) = leave else {
            return Err(Error::Solver("minimax LP reported unbounded".into()));
        };
        pivot(&mut tab, width, rows + 1, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver("simplex pivot limit exceeded".into()));
        }
    }

    let total = tab[obj + rhs];
    if !(total > T::zero()) {
        return Err(Error::Solver("degenerate minimax LP optimum".into()));
    }
    let mut z = vec![T::zero(); cols];
    for (r, &b) in basis.iter().enumerate() {
        if b < cols {
            z[b] = tab[r * width + rhs].max(T::zero());
        }
    }
    let u: Vec<T> = (0..rows).map(|i| tab[obj + cols + i].max(T::zero())).collect();
    Ok(MatrixGameSolution {
        value: T::one() / total - shift,
        row_strategy: MixedAction::normalized(u)?,
        col_strategy: MixedAction::normalized(z)?,
    })
}

fn pivot<T: Scalar>(tab: &mut [T], width: usize, height: usize, pr: usize, pc: usize) {
    let p = tab[pr * width + pc];
    for c in 0..width {
        tab[pr * width + c] = tab[pr * width + c] / p;
    }
    for r in 0..height {
        if r == pr {
            continue;
        }
        let f = tab[r * width + pc];
        if f == T::zero() {
            continue;
        }
        for c in 0..width {
            let v = tab[pr * width + c];
            tab[r * width + c] = tab[r * width + c] - f * v;
        }
        tab[r * width + pc] = T::zero();
    }
}

fn certify<T, M>(m: &M, sol: &MatrixGameSolution<T>, tol: T) -> Result<()>
where
    T: Scalar,
    M: PayoffTable<T> + ?Sized,
{
    let (_, low) = best_pure_response(m, &sol.row_strategy, Player::One)?;
    let (_, high) = best_pure_response(m, &sol.col_strategy, Player::Two)?;
    if low < sol.value - tol || high > sol.value + tol {
        return Err(Error::Solver(format!(
            "certification failed: guarantees [{low}, {high}] vs value {}",
            sol.value
        )));
    }
    Ok(())
}

/// Best pure reply of the opponent of `side` against `strategy`.
///
/// With `side = One` the strategy is a row mixture and the column minimizing
/// the payoff is returned; with `side = Two` the row maximizing it. Ties go
/// to the lowest index.
pub fn best_pure_response<T, M>(m: &M, strategy: &MixedAction<T>, side: Player) -> Result<(usize, T)>
where
    T: Scalar,
    M: PayoffTable<T> + ?Sized,
{
    match side {
        Player::One => {
            check_dim(m.rows(), strategy.len())?;
            let mut best = (0, T::infinity());
            for j in 0..m.cols() {
                let v: T = strategy.support().map(|(i, w)| w * m.entry(i, j)).sum();
                if v < best.1 {
                    best = (j, v);
                }
            }
            Ok(best)
        }
        Player::Two => {
            check_dim(m.cols(), strategy.len())?;
            let mut best = (0, T::neg_infinity());
            for i in 0..m.rows() {
                let v: T = strategy.support().map(|(j, w)| w * m.entry(i, j)).sum();
                if v > best.1 {
                    best = (i, v);
                }
            }
            Ok(best)
        }
    }
}

/// `(min(a/c, b/d), (a+b)/(c+d), max(a/c, b/d))` for positive `c`, `d`.
///
/// The mediant always lies between the two ratios. This is why ratios of
/// linear forms over a simplex are extremal at vertices, which the
/// auxiliary-game guarantees rely on.
pub fn mediant_bounds<T: Scalar>(a: T, b: T, c: T, d: T) -> Result<(T, T, T)> {
    if !(c > T::zero() && d > T::zero()) {
        return Err(invalid("mediant denominators must be positive"));
    }
    let (r1, r2) = (a / c, b / d);
    Ok((r1.min(r2), (a + b) / (c + d), r1.max(r2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<f64>>) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_action_game() {
        let s = solve_matrix_game(&m(vec![vec![0.3]]), 1e-9).unwrap();
        assert_eq!(s.value, 0.3);
        assert_eq!(s.row_strategy.weights(), &[1.0]);
        assert_eq!(s.col_strategy.weights(), &[1.0]);
    }

    #[test]
    fn identity_game_is_uniform() {
        let s = solve_matrix_game(&m(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), 1e-9).unwrap();
        assert!((s.value - 0.5).abs() < 1e-12);
        for w in s.row_strategy.weights().iter().chain(s.col_strategy.weights()) {
            assert!((w - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_mixed() {
        let s = solve_matrix_game(&m(vec![vec![3.0, 1.0], vec![2.0, 4.0]]), 1e-9).unwrap();
        assert!((s.value - 2.5).abs() < 1e-12);
        assert!((s.row_strategy.get(0) - 0.5).abs() < 1e-12);
        assert!((s.col_strategy.get(0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            Matrix::from_rows(vec![vec![1.0, f64::NAN]]).unwrap_err(),
            Error::NonFinite { row: 0, col: 1 }
        );
        let t = FnTable::new(2, 2, |i, _| if i == 1 { f64::INFINITY } else { 0.0 });
        assert!(matches!(solve_matrix_game(&t, 1e-9), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn best_response_examples() {
        let id = m(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let top = MixedAction::pure(2, 0).unwrap();
        assert_eq!(best_pure_response(&id, &top, Player::One).unwrap(), (1, 0.0));
        let half = MixedAction::uniform(2).unwrap();
        assert_eq!(best_pure_response(&id, &half, Player::One).unwrap(), (0, 0.5));
        let g = m(vec![vec![3.0, 1.0], vec![2.0, 4.0]]);
        assert_eq!(best_pure_response(&g, &half, Player::One).unwrap(), (0, 2.5));
        let three = MixedAction::uniform(3).unwrap();
        assert!(matches!(
            best_pure_response(&g, &three, Player::One),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mediant_examples() {
        assert_eq!(mediant_bounds(1.0, 1.0, 1.0, 1.0).unwrap(), (1.0, 1.0, 1.0));
        assert_eq!(mediant_bounds(1.0, 0.0, 1.0, 1.0).unwrap(), (0.0, 0.5, 1.0));
        assert_eq!(mediant_bounds(2.0, 3.0, 4.0, 1.0).unwrap(), (0.5, 1.0, 3.0));
        assert!(mediant_bounds(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn mixed_action_validation() {
        assert!(MixedAction::new(vec![0.5, 0.6]).is_err());
        assert!(MixedAction::new(vec![-0.1, 1.1]).is_err());
        assert!(MixedAction::<f64>::new(vec![]).is_err());
        let x = MixedAction::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(x.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn huge_saddle_table_is_not_materialized() {
        // Beyond the dense limit, with a saddle at (0, 1).
        let t = FnTable::new(3_000, 3_000, |i: usize, j: usize| {
            if i == 0 {
                if j == 1 { 0.0 } else { 1.0 }
            } else if j == 1 {
                -1.0
            } else {
                2.0
            }
        });
        let s = solve_matrix_game(&t, 1e-9).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.row_strategy.get(0), 1.0);
        assert_eq!(s.col_strategy.get(1), 1.0);
    }

    #[test]
    fn f32_solver() {
        let g = Matrix::<f32>::from_rows(vec![vec![3.0, 1.0], vec![2.0, 4.0]]).unwrap();
        let s = solve_matrix_game(&g, 1e-4).unwrap();
        assert!((s.value - 2.5).abs() < 1e-5);
    }

    /// Closed-form value of a 2×2 game.
    fn two_by_two_oracle(a: f64, b: f64, c: f64, d: f64) -> f64 {
        let maxmin = a.min(b).max(c.min(d));
        let minmax = a.max(c).min(b.max(d));
        if maxmin == minmax {
            maxmin
        } else {
            (a * d - b * c) / (a + d - b - c)
        }
    }

    fn matrix_strategy() -> impl Strategy<Value = Matrix<f64>> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
            prop::collection::vec(-1.0f64..1.0, r * c)
                .prop_map(move |v| Matrix::new(r, c, v).unwrap())
        })
    }

    fn payoff(g: &Matrix<f64>, x: &MixedAction<f64>, y: &MixedAction<f64>) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.support() {
            for (j, yj) in y.support() {
                acc += xi * yj * g.get(i, j);
            }
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn two_by_two_matches_closed_form(
            a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
        ) {
            let s = solve_matrix_game(&m(vec![vec![a, b], vec![c, d]]), 1e-9).unwrap();
            prop_assert!((s.value - two_by_two_oracle(a, b, c, d)).abs() <= 1e-9);
        }

        #[test]
        fn duality_and_best_responses(g in matrix_strategy()) {
            let s = solve_matrix_game(&g, 1e-9).unwrap();
            let (_, low) = best_pure_response(&g, &s.row_strategy, Player::One).unwrap();
            let (_, high) = best_pure_response(&g, &s.col_strategy, Player::Two).unwrap();
            prop_assert!(low >= s.value - 1e-8);
            prop_assert!(high <= s.value + 1e-8);
            let at = payoff(&g, &s.row_strategy, &s.col_strategy);
            prop_assert!((at - s.value).abs() <= 1e-8);
        }

        #[test]
        fn shift_moves_value(g in matrix_strategy(), shift in -5.0f64..5.0) {
            let v = solve_matrix_game(&g, 1e-9).unwrap().value;
            let w = solve_matrix_game(&g.map(|x| x + shift), 1e-9).unwrap().value;
            prop_assert!((w - v - shift).abs() <= 1e-8);
        }
    }
}
