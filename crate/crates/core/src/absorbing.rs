//! Absorbing games and their λ-discounted analysis.
//!
//! An absorbing game is played in a single live state. At each stage the
//! pair of actions `(i, j)` pays `g(i, j)`; with probability `p*(i, j)` play
//! then freezes forever at payoff `g*(i, j)`. All functions here are generic
//! over [`AbsorbingModel`], so structured games with very many actions can
//! be analysed without storing their matrices.

use crate::error::{check_dim, check_lambda, invalid, Error, Result};
use crate::matgame::{solve_matrix_game, FnTable, Matrix, MatrixGameSolution, MixedAction, Player};
use crate::num::Scalar;

/// Payoff data of an absorbing game with finite action sets.
pub trait AbsorbingModel<T: Scalar> {
    /// `(|I|, |J|)`.
    fn actions(&self) -> (usize, usize);
    /// Non-absorbing stage payoff.
    fn g(&self, i: usize, j: usize) -> T;
    /// Payoff once absorbed.
    fn g_star(&self, i: usize, j: usize) -> T;
    /// Absorption probability.
    fn p_star(&self, i: usize, j: usize) -> T;

    /// Smallest interval containing every stage and absorbing payoff.
    fn payoff_bounds(&self) -> (T, T) {
        let (n, m) = self.actions();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            for j in 0..m {
                for v in [self.g(i, j), self.g_star(i, j)] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        (lo, hi)
    }
}

/// Absorbing game stored as three dense matrices over `I × J`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingGame<T> {
    g: Matrix<T>,
    g_star: Matrix<T>,
    p_star: Matrix<T>,
}

impl<T: Scalar> AbsorbingGame<T> {
    /// Payoffs are not required to lie in `[-1, 1]`; bounds used downstream
    /// adapt to the actual entries.
    pub fn new(g: Matrix<T>, g_star: Matrix<T>, p_star: Matrix<T>) -> Result<Self> {
        use crate::matgame::PayoffTable;
        for m in [&g_star, &p_star] {
            check_dim(g.rows(), m.rows())?;
            check_dim(g.cols(), m.cols())?;
        }
        if let Some(&p) = p_star.as_slice().iter().find(|&&p| p < T::zero() || p > T::one()) {
            return Err(invalid(format!("absorption probability {p} outside [0, 1]")));
        }
        Ok(Self { g, g_star, p_star })
    }

    /// Builds a game from a table of cells `(payoff, absorbing)`, the usual
    /// `1*` notation: an absorbing cell pays `payoff` now and forever, a
    /// plain cell pays `payoff` and play continues.
    pub fn from_cells(cells: &[Vec<(f64, bool)>]) -> Result<Self> {
        let pay = |f: &dyn Fn(&(f64, bool)) -> f64| {
            Matrix::from_rows(
                cells.iter().map(|r| r.iter().map(|c| T::lit(f(c))).collect()).collect(),
            )
        };
        Self::new(
            pay(&|c| c.0)?,
            pay(&|c| c.0)?,
            pay(&|c| if c.1 { 1.0 } else { 0.0 })?,
        )
    }

    pub fn g_matrix(&self) -> &Matrix<T> {
        &self.g
    }

    pub fn g_star_matrix(&self) -> &Matrix<T> {
        &self.g_star
    }

    pub fn p_star_matrix(&self) -> &Matrix<T> {
        &self.p_star
    }

    /// The same game seen from player two: payoffs negated and the roles
    /// of rows and columns swapped.
    pub fn dual(&self) -> Self {
        Self {
            g: self.g.transpose().map(|x| -x),
            g_star: self.g_star.transpose().map(|x| -x),
            p_star: self.p_star.transpose(),
        }
    }
}

impl<T: Scalar> AbsorbingModel<T> for AbsorbingGame<T> {
    fn actions(&self) -> (usize, usize) {
        use crate::matgame::PayoffTable;
        (self.g.rows(), self.g.cols())
    }
    fn g(&self, i: usize, j: usize) -> T {
        self.g.get(i, j)
    }
    fn g_star(&self, i: usize, j: usize) -> T {
        self.g_star.get(i, j)
    }
    fn p_star(&self, i: usize, j: usize) -> T {
        self.p_star.get(i, j)
    }
}

/// Finite truncation of the compact-action absorbing game with action set
/// `{0} ∪ {1/n : 1 ≤ n ≤ N}` for both players.
///
/// Action index `0` is the point `0`, index `k ≥ 1` is `1/k`. The stage
/// payoff is always 1. When the actions differ, play absorbs into `0*` with
/// probability `√y`; when they coincide it absorbs into `-1*` with
/// probability `y`.
#[derive(Clone, Debug)]
pub struct TruncatedCompactGame<T> {
    size: usize,
    points: Vec<T>,
    roots: Vec<T>,
}

impl<T: Scalar> TruncatedCompactGame<T> {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(invalid("truncation size must be at least 2"));
        }
        let points: Vec<T> = std::iter::once(T::zero())
            .chain((1..=size).map(|k| T::one() / T::from_count(k)))
            .collect();
        let roots = points.iter().map(|p| p.sqrt()).collect();
        Ok(Self { size, points, roots })
    }

    /// `N`, the largest denominator.
    pub fn size(&self) -> usize {
        self.size
    }

    /// The real number played by action `k`.
    pub fn point(&self, k: usize) -> T {
        self.points[k]
    }

    /// Index of `{λ} = 1/⌊1/λ⌋`. Rejects `λ < 1/N`, where `{λ}` falls
    /// outside the truncated action set.
    pub fn rounded_action(&self, lambda: T) -> Result<usize> {
        check_lambda(lambda)?;
        let inv = T::one() / lambda;
        let nearest = inv.round();
        // 1/0.001 is not exactly 1000 in binary; snap near-integers.
        let k = if (inv - nearest).abs() <= T::lit(1e-9) * nearest {
            nearest
        } else {
            inv.floor()
        };
        let k = k.to_usize().ok_or_else(|| invalid("1/λ does not fit an index"))?;
        if k > self.size {
            return Err(invalid(format!(
                "λ = {lambda} is below 1/N = 1/{}; {{λ}} is not an action",
                self.size
            )));
        }
        Ok(k)
    }

    /// Materializes the three matrices (only sensible for small `N`).
    pub fn to_dense(&self) -> Result<AbsorbingGame<T>> {
        let n = self.size + 1;
        AbsorbingGame::new(
            Matrix::from_fn(n, n, |i, j| self.g(i, j))?,
            Matrix::from_fn(n, n, |i, j| self.g_star(i, j))?,
            Matrix::from_fn(n, n, |i, j| self.p_star(i, j))?,
        )
    }
}

impl<T: Scalar> AbsorbingModel<T> for TruncatedCompactGame<T> {
    fn actions(&self) -> (usize, usize) {
        (self.size + 1, self.size + 1)
    }
    fn g(&self, _i: usize, _j: usize) -> T {
        T::one()
    }
    fn g_star(&self, i: usize, j: usize) -> T {
        if i == j {
            -T::one()
        } else {
            T::zero()
        }
    }
    fn p_star(&self, i: usize, j: usize) -> T {
        if i == j {
            self.points[j]
        } else {
            self.roots[j]
        }
    }
    fn payoff_bounds(&self) -> (T, T) {
        (-T::one(), T::one())
    }
}

/// A pair of stationary strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPair<T> {
    pub x: MixedAction<T>,
    pub y: MixedAction<T>,
}

impl<T: Scalar> StationaryPair<T> {
    pub fn new(x: MixedAction<T>, y: MixedAction<T>) -> Self {
        Self { x, y }
    }

    pub fn check<G: AbsorbingModel<T> + ?Sized>(&self, game: &G) -> Result<()> {
        let (n, m) = game.actions();
        check_dim(n, self.x.len())?;
        check_dim(m, self.y.len())
    }
}

/// The bilinear quantities of an absorbing game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// Stage payoff `g`.
    G,
    /// `G* = p*·g*`, the absorbing payoff weighted by its probability.
    GStarWeighted,
    /// Absorption probability `p*`.
    PStar,
}

pub(crate) fn entry<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    q: Quantity,
    i: usize,
    j: usize,
) -> T {
    match q {
        Quantity::G => game.g(i, j),
        Quantity::GStarWeighted => game.p_star(i, j) * game.g_star(i, j),
        Quantity::PStar => game.p_star(i, j),
    }
}

/// `Σ x(i) y(j) M(i, j)` over the supports, without dimension checks.
pub(crate) fn eval<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    q: Quantity,
    x: &MixedAction<T>,
    y: &MixedAction<T>,
) -> T {
    let mut acc = T::zero();
    for (i, xi) in x.support() {
        for (j, yj) in y.support() {
            acc = acc + xi * yj * entry(game, q, i, j);
        }
    }
    acc
}

/// Bilinear extension of `g`, `G*` or `p*` to a pair of mixed actions.
pub fn bilinear<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    quantity: Quantity,
    pair: &StationaryPair<T>,
) -> Result<T> {
    pair.check(game)?;
    Ok(eval(game, quantity, &pair.x, &pair.y))
}

fn ratio<T: Scalar>(lambda: T, g: T, g_star_w: T, p: T) -> T {
    (lambda * g + (T::one() - lambda) * g_star_w) / (lambda + (T::one() - lambda) * p)
}

/// Normalized discounted payoff of a stationary pair,
/// `(λg + (1-λ)G*) / (λ + (1-λ)p*)`.
pub fn r_lambda<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    pair: &StationaryPair<T>,
) -> Result<T> {
    check_lambda(lambda)?;
    pair.check(game)?;
    let g = eval(game, Quantity::G, &pair.x, &pair.y);
    let gs = eval(game, Quantity::GStarWeighted, &pair.x, &pair.y);
    let p = eval(game, Quantity::PStar, &pair.x, &pair.y);
    Ok(ratio(lambda, g, gs, p))
}

/// One application of the discounted Shapley operator: the matrix game
/// `λg(i,j) + (1-λ)(G*(i,j) + (1-p*(i,j)) w)`.
///
/// The operator is monotone and a `(1-λ)`-contraction in `w`.
pub fn shapley_operator<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    w: T,
) -> Result<MatrixGameSolution<T>> {
    check_lambda(lambda)?;
    let (n, m) = game.actions();
    let one = T::one();
    let table = FnTable::new(n, m, |i, j| {
        let p = game.p_star(i, j);
        lambda * game.g(i, j) + (one - lambda) * (p * game.g_star(i, j) + (one - p) * w)
    });
    solve_matrix_game(&table, certify_tol::<T>())
}

/// Certification slack for the local matrix games.
pub(crate) fn certify_tol<T: Scalar>() -> T {
    T::lit((T::SIMPLEX_TOL * 10.0).max(1e-9))
}

/// Discounted value with optimal stationary strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountedSolution<T> {
    pub lambda: T,
    pub value: T,
    pub x_opt: MixedAction<T>,
    pub y_opt: MixedAction<T>,
    /// `|Φ(value) - value|`.
    pub residual: T,
    /// Certified bound on `|value - v_λ|`.
    pub error_bound: T,
    /// Number of operator evaluations.
    pub evaluations: usize,
}

/// Computes `v_λ` as the root of `f(w) = Φ(w) - w`.
///
/// `f` is decreasing with slope in `[-1, -λ]`, so each evaluation at `w`
/// brackets the root in `[w + f, w + f/λ]` (ordered by the sign of `f`).
/// The iteration starts at `w = 0` with a plain fixed-point step, then
/// takes secant steps inside the bracket, falling back to bisection. It
/// stops once `|f(w)| ≤ tol·λ` or the bracket is narrower than `2·tol`;
/// either way `|value - v_λ| ≤ tol` up to rounding in `Φ`.
///
/// The strategies are the matrix-game solutions of `Φ` at the returned
/// value; use [`epsilon_optimality`] to certify them.
pub fn discounted_value<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    tol: T,
) -> Result<DiscountedSolution<T>> {
    check_lambda(lambda)?;
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    let (mut lo, mut hi) = game.payoff_bounds();
    let two = T::lit(2.0);
    let mut w = T::zero().max(lo).min(hi);
    let mut prev: Option<(T, T)> = None;
    let mut evaluations = 0;
    let mut widths: Vec<T> = Vec::new();

    loop {
        let sol = shapley_operator(game, lambda, w)?;
        evaluations += 1;
        let f = sol.value - w;
        if f > T::zero() {
            lo = lo.max(w + f);
            hi = hi.min(w + f / lambda);
        } else if f < T::zero() {
            hi = hi.min(w + f);
            lo = lo.max(w + f / lambda);
        }
        let done_residual = f.abs() <= tol * lambda;
        if done_residual || hi - lo <= two * tol || lo > hi {
            if done_residual {
                return Ok(DiscountedSolution {
                    lambda,
                    value: w,
                    x_opt: sol.row_strategy,
                    y_opt: sol.col_strategy,
                    residual: f.abs(),
                    error_bound: f.abs() / lambda,
                    evaluations,
                });
            }
            let mid = (lo + hi) / two;
            let fin = shapley_operator(game, lambda, mid)?;
            let residual = (fin.value - mid).abs();
            return Ok(DiscountedSolution {
                lambda,
                value: mid,
                x_opt: fin.row_strategy,
                y_opt: fin.col_strategy,
                residual,
                error_bound: ((hi - lo).abs() / two).min(residual / lambda),
                evaluations: evaluations + 1,
            });
        }
        widths.push(hi - lo);

        let mut next = match prev {
            None => w + f,
            Some((pw, pf)) if pf != f => w - f * (w - pw) / (f - pf),
            Some(_) => (lo + hi) / two,
        };
        // Bisect when the secant leaves the bracket or the bracket stalls.
        let stalled = widths.len() >= 4 && widths[widths.len() - 1] > widths[widths.len() - 4] / two;
        if !next.is_finite() || next < lo || next > hi || stalled {
            next = (lo + hi) / two;
            if stalled {
                widths.clear();
            }
        }
        prev = Some((w, f));
        w = next;
        if evaluations > 2000 {
            return Err(Error::Solver("discounted value iteration did not converge".into()));
        }
    }
}

/// Best pure reply to a fixed stationary strategy in `Γ_λ`.
///
/// With `side = One` the strategy `x` of player one is fixed and the result
/// is `min_j r_λ(x, j)`; with `side = Two`, `max_i r_λ(i, y)`. Pure replies
/// suffice because `r_λ` is a ratio of bilinear forms with positive
/// denominator, whose extremum over a simplex sits at a vertex. Ties go to
/// the lowest index. Returns `(payoff, action)`.
pub fn best_response_value<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    fixed: &MixedAction<T>,
    side: Player,
) -> Result<(T, usize)> {
    check_lambda(lambda)?;
    let (n, m) = game.actions();
    let mut g;
    let mut gs;
    let mut p;
    match side {
        Player::One => {
            check_dim(n, fixed.len())?;
            let mut best = (T::infinity(), 0);
            for j in 0..m {
                (g, gs, p) = (T::zero(), T::zero(), T::zero());
                for (i, xi) in fixed.support() {
                    let ps = game.p_star(i, j);
                    g = g + xi * game.g(i, j);
                    gs = gs + xi * ps * game.g_star(i, j);
                    p = p + xi * ps;
                }
                let r = ratio(lambda, g, gs, p);
                if r < best.0 {
                    best = (r, j);
                }
            }
            Ok(best)
        }
        Player::Two => {
            check_dim(m, fixed.len())?;
            let mut best = (T::neg_infinity(), 0);
            for i in 0..n {
                (g, gs, p) = (T::zero(), T::zero(), T::zero());
                for (j, yj) in fixed.support() {
                    let ps = game.p_star(i, j);
                    g = g + yj * game.g(i, j);
                    gs = gs + yj * ps * game.g_star(i, j);
                    p = p + yj * ps;
                }
                let r = ratio(lambda, g, gs, p);
                if r > best.0 {
                    best = (r, i);
                }
            }
            Ok(best)
        }
    }
}

/// How far each strategy of `pair` is from guaranteeing `v_lambda`:
/// `(max(0, v - min_j r(x, j)), max(0, max_i r(i, y) - v))`.
pub fn epsilon_optimality<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    pair: &StationaryPair<T>,
    v_lambda: T,
) -> Result<(T, T)> {
    let (low, _) = best_response_value(game, lambda, &pair.x, Player::One)?;
    let (high, _) = best_response_value(game, lambda, &pair.y, Player::Two)?;
    Ok(((v_lambda - low).max(T::zero()), (high - v_lambda).max(T::zero())))
}
