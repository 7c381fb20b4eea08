//! Finite zero-sum stochastic games with discounted evaluation.

use crate::absorbing::{certify_tol, AbsorbingGame, AbsorbingModel};
use crate::error::{check_dim, check_lambda, invalid, Error, Result};
use crate::matgame::{solve_matrix_game, Matrix, MixedAction, PayoffTable, Player};
use crate::num::{CompensatedSum, Scalar};
use crate::trajectory::{self, Trajectory, DEFAULT_MASS_TOL};

/// Tolerance on transition rows summing to one.
pub const TRANSITION_TOL: f64 = 1e-12;

/// A stochastic game with finitely many states.
///
/// Absorbing states must loop on themselves with probability one and pay
/// the same amount whatever the actions.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticGame<T> {
    names: Vec<String>,
    payoff: Vec<Matrix<T>>,
    /// `transitions[ω][i * cols + j]` is the next-state distribution.
    transitions: Vec<Vec<Vec<T>>>,
    absorbing: Vec<bool>,
}

impl<T: Scalar> StochasticGame<T> {
    pub fn new(
        names: Vec<String>,
        payoff: Vec<Matrix<T>>,
        transitions: Vec<Vec<Vec<T>>>,
        absorbing: Vec<bool>,
    ) -> Result<Self> {
        let s = names.len();
        if s == 0 {
            return Err(invalid("a stochastic game needs at least one state"));
        }
        check_dim(s, payoff.len())?;
        check_dim(s, transitions.len())?;
        check_dim(s, absorbing.len())?;
        for (w, name) in names.iter().enumerate() {
            if names[..w].contains(name) {
                return Err(invalid(format!("duplicate state name `{name}`")));
            }
        }
        for w in 0..s {
            let (n, m) = (payoff[w].rows(), payoff[w].cols());
            check_dim(n * m, transitions[w].len())?;
            for (cell, row) in transitions[w].iter().enumerate() {
                check_dim(s, row.len())?;
                if row.iter().any(|&p| !p.is_finite() || p < T::zero()) {
                    return Err(invalid(format!(
                        "state `{}`, cell ({}, {}): negative or non-finite probability",
                        names[w],
                        cell / m,
                        cell % m
                    )));
                }
                let total: T = row.iter().copied().sum();
                if (total - T::one()).abs() > T::lit(TRANSITION_TOL) {
                    return Err(invalid(format!(
                        "state `{}`, cell ({}, {}): transition sums to {total}",
                        names[w],
                        cell / m,
                        cell % m
                    )));
                }
                if absorbing[w] && row[w] != T::one() {
                    return Err(invalid(format!("absorbing state `{}` must loop on itself", names[w])));
                }
            }
            if absorbing[w] && payoff[w].min_entry() != payoff[w].max_entry() {
                return Err(invalid(format!("absorbing state `{}` must pay a constant", names[w])));
            }
        }
        Ok(Self { names, payoff, transitions, absorbing })
    }

    /// Writes an absorbing game as one live state followed by one sink per
    /// distinct absorbing payoff, in order of first appearance.
    pub fn from_absorbing(game: &AbsorbingGame<T>) -> Result<Self> {
        let (n, m) = game.actions();
        let mut sink_values: Vec<T> = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let v = game.g_star(i, j);
                if game.p_star(i, j) > T::zero() && !sink_values.contains(&v) {
                    sink_values.push(v);
                }
            }
        }
        let s = 1 + sink_values.len();
        let mut names = vec!["live".to_string()];
        names.extend(sink_values.iter().map(|v| format!("absorbed({v})")));
        let mut payoff = vec![game.g_matrix().clone()];
        let mut transitions = vec![Vec::with_capacity(n * m)];
        for i in 0..n {
            for j in 0..m {
                let p = game.p_star(i, j);
                let mut row = vec![T::zero(); s];
                row[0] = T::one() - p;
                if p > T::zero() {
                    let k = sink_values.iter().position(|&v| v == game.g_star(i, j)).unwrap();
                    row[1 + k] = p;
                }
                transitions[0].push(row);
            }
        }
        let mut absorbing = vec![false];
        for (k, &v) in sink_values.iter().enumerate() {
            payoff.push(Matrix::filled(1, 1, v)?);
            let mut row = vec![T::zero(); s];
            row[1 + k] = T::one();
            transitions.push(vec![row]);
            absorbing.push(true);
        }
        Self::new(names, payoff, transitions, absorbing)
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| invalid(format!("unknown state `{name}`")))
    }

    /// `(|I(ω)|, |J(ω)|)`.
    pub fn actions(&self, state: usize) -> (usize, usize) {
        (self.payoff[state].rows(), self.payoff[state].cols())
    }

    pub fn payoff(&self, state: usize) -> &Matrix<T> {
        &self.payoff[state]
    }

    pub fn transition(&self, state: usize, i: usize, j: usize) -> &[T] {
        &self.transitions[state][i * self.payoff[state].cols() + j]
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing[state]
    }

    pub fn absorbing_flags(&self) -> &[bool] {
        &self.absorbing
    }

    /// The game seen from player two: payoffs negated, players swapped.
    pub fn dual(&self) -> Self {
        let transitions = (0..self.num_states())
            .map(|w| {
                let (n, m) = self.actions(w);
                let mut cells = Vec::with_capacity(n * m);
                for j in 0..m {
                    for i in 0..n {
                        cells.push(self.transition(w, i, j).to_vec());
                    }
                }
                cells
            })
            .collect();
        Self {
            names: self.names.clone(),
            payoff: self.payoff.iter().map(|p| p.transpose().map(|v| -v)).collect(),
            transitions,
            absorbing: self.absorbing.clone(),
        }
    }
}

/// A stationary strategy for each player in each state.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryProfile<T> {
    pub x: Vec<MixedAction<T>>,
    pub y: Vec<MixedAction<T>>,
}

impl<T: Scalar> StationaryProfile<T> {
    pub fn new(game: &StochasticGame<T>, x: Vec<MixedAction<T>>, y: Vec<MixedAction<T>>) -> Result<Self> {
        check_strategies(game, &x, Player::One)?;
        check_strategies(game, &y, Player::Two)?;
        Ok(Self { x, y })
    }

    /// Uniform play everywhere.
    pub fn uniform(game: &StochasticGame<T>) -> Result<Self> {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for w in 0..game.num_states() {
            let (n, m) = game.actions(w);
            x.push(MixedAction::uniform(n)?);
            y.push(MixedAction::uniform(m)?);
        }
        Ok(Self { x, y })
    }

    fn check(&self, game: &StochasticGame<T>) -> Result<()> {
        check_strategies(game, &self.x, Player::One)?;
        check_strategies(game, &self.y, Player::Two)
    }
}

fn check_strategies<T: Scalar>(
    game: &StochasticGame<T>,
    strategies: &[MixedAction<T>],
    player: Player,
) -> Result<()> {
    check_dim(game.num_states(), strategies.len())?;
    for (w, s) in strategies.iter().enumerate() {
        let (n, m) = game.actions(w);
        check_dim(if player == Player::One { n } else { m }, s.len())?;
    }
    Ok(())
}

/// Expected stage payoff and transition of each state under a profile.
fn induced_chain<T: Scalar>(game: &StochasticGame<T>, profile: &StationaryProfile<T>) -> (Vec<T>, Vec<Vec<T>>) {
    let s = game.num_states();
    let mut reward = vec![T::zero(); s];
    let mut chain = vec![vec![T::zero(); s]; s];
    for w in 0..s {
        for (i, xi) in profile.x[w].support() {
            for (j, yj) in profile.y[w].support() {
                let q = xi * yj;
                reward[w] = reward[w] + q * game.payoff(w).get(i, j);
                for (z, &p) in game.transition(w, i, j).iter().enumerate() {
                    chain[w][z] = chain[w][z] + q * p;
                }
            }
        }
    }
    (reward, chain)
}

/// Solves `a · x = b` by Gaussian elimination with partial pivoting.
fn solve_linear<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &q| a[r][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= T::min_positive_value() {
            return Err(Error::Solver("singular policy evaluation system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != T::zero() {
                for c in col..n {
                    a[r][c] = a[r][c] - f * a[col][c];
                }
                b[r] = b[r] - f * b[col];
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc = acc - a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Ok(x)
}

/// Discounted values of a fixed stationary profile, solving
/// `v = λ r + (1-λ) P v` directly.
pub fn profile_values<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    profile: &StationaryProfile<T>,
) -> Result<Vec<T>> {
    check_lambda(lambda)?;
    profile.check(game)?;
    let (reward, chain) = induced_chain(game, profile);
    evaluate_chain(lambda, &reward, &chain)
}

fn evaluate_chain<T: Scalar>(lambda: T, reward: &[T], chain: &[Vec<T>]) -> Result<Vec<T>> {
    let s = reward.len();
    let keep = T::one() - lambda;
    let a = (0..s)
        .map(|w| {
            (0..s)
                .map(|z| if w == z { T::one() } else { T::zero() } - keep * chain[w][z])
                .collect()
        })
        .collect();
    solve_linear(a, reward.iter().map(|&r| lambda * r).collect())
}

/// Optimal values of the one-player problem left when one side is frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpSolution<T> {
    pub values: Vec<T>,
    /// Optimal pure action of the free player in each state.
    pub policy: Vec<usize>,
    pub iterations: usize,
}

/// Best reply to a frozen stationary strategy, by policy iteration.
///
/// `side` names the frozen player: with `Player::One` the strategies in
/// `fixed` belong to player one and player two minimizes; with
/// `Player::Two` player one maximizes against them. A policy is only
/// switched for an improvement above `tol·λ`, so the returned values are
/// optimal to within `tol`.
pub fn best_response_mdp<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    fixed: &[MixedAction<T>],
    side: Player,
    tol: T,
) -> Result<MdpSolution<T>> {
    check_lambda(lambda)?;
    check_strategies(game, fixed, side)?;
    let s = game.num_states();
    let maximize = side == Player::Two;
    // rewards[ω][a], moves[ω][a]: stage payoff and next-state law of free action a.
    let mut rewards: Vec<Vec<T>> = Vec::with_capacity(s);
    let mut moves: Vec<Vec<Vec<T>>> = Vec::with_capacity(s);
    for w in 0..s {
        let (n, m) = game.actions(w);
        let free = if maximize { n } else { m };
        let mut rw = Vec::with_capacity(free);
        let mut mv = Vec::with_capacity(free);
        for a in 0..free {
            let mut r = T::zero();
            let mut next = vec![T::zero(); s];
            for (k, q) in fixed[w].support() {
                let (i, j) = if maximize { (a, k) } else { (k, a) };
                r = r + q * game.payoff(w).get(i, j);
                for (z, &p) in game.transition(w, i, j).iter().enumerate() {
                    next[z] = next[z] + q * p;
                }
            }
            rw.push(r);
            mv.push(next);
        }
        rewards.push(rw);
        moves.push(mv);
    }
    let keep = T::one() - lambda;
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let q_value = |w: usize, a: usize, v: &[T]| {
        let mut acc = lambda * rewards[w][a];
        for (z, &p) in moves[w][a].iter().enumerate() {
            acc = acc + keep * p * v[z];
        }
        acc
    };
    let mut policy: Vec<usize> = (0..s)
        .map(|w| {
            let r = &rewards[w];
            (0..r.len()).fold(0, |best, a| if better(r[a], r[best]) { a } else { best })
        })
        .collect();
    let threshold = tol * lambda;
    for iterations in 1..=10_000 {
        let reward: Vec<T> = (0..s).map(|w| rewards[w][policy[w]]).collect();
        let chain: Vec<Vec<T>> = (0..s).map(|w| moves[w][policy[w]].clone()).collect();
        let values = evaluate_chain(lambda, &reward, &chain)?;
        let mut changed = false;
        for w in 0..s {
            let current = q_value(w, policy[w], &values);
            let mut best = (current, policy[w]);
            for a in 0..rewards[w].len() {
                let q = q_value(w, a, &values);
                let gain = if maximize { q - current } else { current - q };
                if gain > threshold && better(q, best.0) {
                    best = (q, a);
                }
            }
            if best.1 != policy[w] {
                policy[w] = best.1;
                changed = true;
            }
        }
        if !changed {
            return Ok(MdpSolution { values, policy, iterations });
        }
    }
    Err(Error::Solver("policy iteration did not stabilize".into()))
}

/// Discounted values and optimal stationary strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapleySolution<T> {
    pub lambda: T,
    pub values: Vec<T>,
    pub profile: StationaryProfile<T>,
    /// `‖Ψ(v) - v‖∞` at the returned values.
    pub residual: T,
    /// `residual / λ`, a certified bound on `‖v - v_λ‖∞`.
    pub error_bound: T,
    /// Largest amount by which either profile strategy falls short of the
    /// returned values against a best reply.
    pub profile_gap: T,
    pub iterations: usize,
}

/// One application of the Shapley operator
/// `Ψ(v)(ω) = val[λ g(ω,i,j) + (1-λ) Σ ρ(ζ|ω,i,j) v(ζ)]`, with the local
/// optimal strategies.
pub fn shapley_operator<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    v: &[T],
) -> Result<(Vec<T>, StationaryProfile<T>)> {
    check_lambda(lambda)?;
    check_dim(game.num_states(), v.len())?;
    let keep = T::one() - lambda;
    let mut out = Vec::with_capacity(v.len());
    let mut x = Vec::with_capacity(v.len());
    let mut y = Vec::with_capacity(v.len());
    for w in 0..game.num_states() {
        let (n, m) = game.actions(w);
        let local = Matrix::from_fn(n, m, |i, j| {
            let mut acc = CompensatedSum::new();
            for (z, &p) in game.transition(w, i, j).iter().enumerate() {
                if p > T::zero() {
                    acc.add(p * v[z]);
                }
            }
            lambda * game.payoff(w).get(i, j) + keep * acc.value()
        })?;
        let sol = solve_matrix_game(&local, certify_tol::<T>())?;
        out.push(sol.value);
        x.push(sol.row_strategy);
        y.push(sol.col_strategy);
    }
    Ok((out, StationaryProfile { x, y }))
}

fn sup_gap<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&p, &q)| (p - q).abs()).fold(T::zero(), T::max)
}

/// Discounted values of a stochastic game.
///
/// Strategy iteration: at the current estimate `v` the local games give
/// player one a stationary strategy, and `v` is replaced by the exact
/// value of player two's best reply to it. Starting from the value of
/// uniform play, the estimates increase to `v_λ`. Whenever the exact value
/// of the locally optimal profile has a smaller residual it is taken
/// instead, which gives Newton-like convergence near the solution. Iteration stops once `‖Ψ(v) - v‖∞ ≤ tol·λ`, or when rounding
/// prevents further progress, and the certified bound `residual/λ` is
/// reported either way.
pub fn shapley_value<T: Scalar>(game: &StochasticGame<T>, lambda: T, tol: T) -> Result<ShapleySolution<T>> {
    check_lambda(lambda)?;
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    // Switching threshold of the inner policy iterations: a few ulps of the
    // values, so rounding ties cannot make them cycle.
    let reply_tol = T::epsilon() * T::lit(64.0) / lambda;
    let uniform = StationaryProfile::uniform(game)?;
    let mut v = best_response_mdp(game, lambda, &uniform.x, Player::One, reply_tol)?.values;
    let mut best: Option<(T, Vec<T>, StationaryProfile<T>)> = None;
    let mut stalled = 0;
    let mut iterations = 0;
    while iterations < 500 {
        iterations += 1;
        let (psi, profile) = shapley_operator(game, lambda, &v)?;
        let residual = sup_gap(&psi, &v);
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, v.clone(), profile.clone()));
        }
        if residual <= tol * lambda || stalled >= 3 {
            break;
        }
        // Newton step: the exact value of the locally optimal profile.
        let newton = profile_values(game, lambda, &profile)?;
        let (psi_n, _) = shapley_operator(game, lambda, &newton)?;
        if sup_gap(&psi_n, &newton) < residual {
            v = newton;
            continue;
        }
        let mut next = best_response_mdp(game, lambda, &profile.x, Player::One, reply_tol)?.values;
        let gain = next.iter().zip(&v).map(|(&a, &b)| a - b).fold(T::neg_infinity(), T::max);
        if !(gain > T::zero()) {
            // No progress left at working precision; a contraction step
            // can still shave off rounding.
            stalled += 1;
            next = psi;
        }
        v = next;
    }
    let (residual, values, profile) = best.expect("at least one iteration");
    let low = best_response_mdp(game, lambda, &profile.x, Player::One, reply_tol)?.values;
    let high = best_response_mdp(game, lambda, &profile.y, Player::Two, reply_tol)?.values;
    let profile_gap = values
        .iter()
        .zip(low.iter().zip(&high))
        .map(|(&v, (&lo, &hi))| (v - lo).max(hi - v).max(T::zero()))
        .fold(T::zero(), T::max);
    Ok(ShapleySolution {
        lambda,
        values,
        profile,
        residual,
        error_bound: residual / lambda,
        profile_gap,
        iterations,
    })
}

/// Distribution of the state at stages `1..=horizon`; `q_1` is the point
/// mass at `start`.
pub fn state_distributions<T: Scalar>(
    game: &StochasticGame<T>,
    profile: &StationaryProfile<T>,
    start: usize,
    horizon: usize,
) -> Result<Vec<Vec<T>>> {
    profile.check(game)?;
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if start >= game.num_states() {
        return Err(invalid(format!("start state {start} out of range")));
    }
    let (_, chain) = induced_chain(game, profile);
    let mut out = Vec::with_capacity(horizon);
    let mut q = vec![T::zero(); game.num_states()];
    q[start] = T::one();
    out.push(q.clone());
    for _ in 1..horizon {
        q = step(&q, &chain);
        out.push(q.clone());
    }
    Ok(out)
}

fn step<T: Scalar>(q: &[T], chain: &[Vec<T>]) -> Vec<T> {
    let s = q.len();
    let mut next = vec![T::zero(); s];
    for (w, &mass) in q.iter().enumerate() {
        if mass > T::zero() {
            for z in 0..s {
                next[z] = next[z] + mass * chain[w][z];
            }
        }
    }
    let total: T = next.iter().copied().sum();
    next.iter_mut().for_each(|v| *v = *v / total);
    next
}

/// Cumulated discounted occupation measure at every breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationProfile<T> {
    pub lambda: T,
    pub start: usize,
    /// `t_0 = 0, t_1, ..., t_N`.
    pub times: Vec<T>,
    /// `measures[n][ω]`, cumulated up to `t_n`.
    pub measures: Vec<Vec<T>>,
    /// Discounted mass beyond `t_N`.
    pub tail_bound: T,
}

impl<T: Scalar> OccupationProfile<T> {
    /// Occupation trajectory of one state, flat after `t_N`.
    pub fn component(&self, state: usize) -> Trajectory<T> {
        let values = self.measures.iter().map(|m| m[state]).collect();
        trajectory::from_breakpoints(self.lambda, self.times.clone(), values, self.tail_bound)
    }
}

/// Runs the chain for `horizon` stages, calling `visit` with each stage
/// index `n` and the law `q_n`, for `n = 1..=horizon + 1`.
fn run_chain<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    profile: &StationaryProfile<T>,
    start: usize,
    horizon: usize,
    mut visit: impl FnMut(usize, &[T]),
) -> Result<()> {
    check_lambda(lambda)?;
    profile.check(game)?;
    if start >= game.num_states() {
        return Err(invalid(format!("start state {start} out of range")));
    }
    let (_, chain) = induced_chain(game, profile);
    let mut q = vec![T::zero(); game.num_states()];
    q[start] = T::one();
    for n in 1..=horizon {
        visit(n, &q);
        q = step(&q, &chain);
    }
    visit(horizon + 1, &q);
    Ok(())
}

/// `Q(t_n) = λ Σ_{i≤n} (1-λ)^{i-1} q_i`, state by state.
pub fn occupation_profile<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    profile: &StationaryProfile<T>,
    start: usize,
    mass_tol: T,
) -> Result<OccupationProfile<T>> {
    let s = game.num_states();
    let mut sums = vec![CompensatedSum::new(); s];
    let mut clock = CompensatedSum::new();
    let mut times = vec![T::zero()];
    let mut measures = vec![vec![T::zero(); s]];
    let horizon = trajectory::stage_horizon(lambda, mass_tol)?;
    run_chain(game, lambda, profile, start, horizon, |n, q| {
        if n > horizon {
            return;
        }
        let w = trajectory::stage_weight(lambda, n);
        clock.add(w);
        for (acc, &p) in sums.iter_mut().zip(q) {
            acc.add(w * p);
        }
        times.push(clock.value().min(T::one()));
        measures.push(sums.iter().map(|a| a.value()).collect());
    })?;
    let tail_bound = (T::one() - lambda).powf(T::from_count(horizon));
    Ok(OccupationProfile { lambda, start, times, measures, tail_bound })
}

/// Cumulated expected payoff, with stage payoff `⟨q_n, ḡ⟩`.
pub fn payoff_trajectory_multi<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    profile: &StationaryProfile<T>,
    start: usize,
    mass_tol: T,
) -> Result<Trajectory<T>> {
    let (reward, _) = induced_chain(game, profile);
    let mut clock = CompensatedSum::new();
    let mut acc = CompensatedSum::new();
    let mut times = vec![T::zero()];
    let mut values = vec![T::zero()];
    let horizon = trajectory::stage_horizon(lambda, mass_tol)?;
    run_chain(game, lambda, profile, start, horizon, |n, q| {
        if n > horizon {
            return;
        }
        let w = trajectory::stage_weight(lambda, n);
        clock.add(w);
        let mut c = CompensatedSum::new();
        for (&p, &r) in q.iter().zip(&reward) {
            c.add(p * r);
        }
        acc.add(w * c.value());
        times.push(clock.value().min(T::one()));
        values.push(acc.value());
    })?;
    let bound = reward.iter().fold(T::zero(), |m, r| m.max(r.abs()));
    let tail = (T::one() - lambda).powf(T::from_count(horizon)) * bound;
    Ok(trajectory::from_breakpoints(lambda, times, values, tail))
}

/// Probability of having been absorbed by stage `n`, placed at `t_n`.
pub fn absorption_cdf<T: Scalar>(
    game: &StochasticGame<T>,
    lambda: T,
    profile: &StationaryProfile<T>,
    start: usize,
) -> Result<Trajectory<T>> {
    let flags = game.absorbing_flags();
    let mut clock = CompensatedSum::<T>::new();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let horizon = trajectory::stage_horizon(lambda, T::lit(DEFAULT_MASS_TOL))?;
    run_chain(game, lambda, profile, start, horizon, |n, q| {
        let mass = q.iter().zip(flags).filter(|(_, &f)| f).map(|(&p, _)| p).sum::<T>();
        // q_n is the law after n-1 transitions, so it belongs to t_{n-1}.
        times.push(clock.value().min(T::one()));
        values.push(mass.min(T::one()));
        clock.add(trajectory::stage_weight(lambda, n));
    })?;
    times.truncate(horizon + 1);
    values.truncate(horizon + 1);
    Ok(trajectory::from_breakpoints(lambda, times, values, T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorbing::{self, discounted_value, StationaryPair};
    use crate::trajectory::{occupation_trajectory, payoff_trajectory};

    fn big_match() -> AbsorbingGame<f64> {
        AbsorbingGame::from_cells(&[
            vec![(1.0, true), (0.0, true)],
            vec![(0.0, false), (1.0, false)],
        ])
        .unwrap()
    }

    fn mixed(w: &[f64]) -> MixedAction<f64> {
        MixedAction::new(w.to_vec()).unwrap()
    }

    /// Two live states; `U` in `s2` absorbs, `R` after `U` in `s1` moves on.
    fn two_state() -> StochasticGame<f64> {
        let names = ["s1", "s2", "win", "lose"].map(String::from).to_vec();
        let pt = |k: usize| {
            let mut r = vec![0.0; 4];
            r[k] = 1.0;
            r
        };
        let payoff = vec![
            Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            Matrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap(),
            Matrix::filled(1, 1, 1.0).unwrap(),
            Matrix::filled(1, 1, -1.0).unwrap(),
        ];
        let transitions = vec![
            vec![pt(2), pt(1), pt(0), pt(0)],
            vec![pt(2), pt(3), pt(1), pt(1)],
            vec![pt(2)],
            vec![pt(3)],
        ];
        StochasticGame::new(names, payoff, transitions, vec![false, false, true, true]).unwrap()
    }

    #[test]
    fn validation() {
        let names = vec!["a".to_string()];
        let m = Matrix::filled(1, 1, 0.0).unwrap();
        assert!(StochasticGame::new(names.clone(), vec![m.clone()], vec![vec![vec![0.5]]], vec![false]).is_err());
        let m2 = Matrix::from_rows(vec![vec![0.0, 1.0]]).unwrap();
        let loops = vec![vec![vec![1.0], vec![1.0]]];
        assert!(StochasticGame::new(names.clone(), vec![m2], loops, vec![true]).is_err());
        assert!(StochasticGame::new(names, vec![m], vec![vec![vec![1.0]]], vec![true]).is_ok());
    }

    #[test]
    fn embedding_matches_absorbing_values() {
        let bm = big_match();
        let sg = StochasticGame::from_absorbing(&bm).unwrap();
        assert_eq!(sg.num_states(), 3);
        for lambda in [0.3, 0.05, 0.01] {
            let a = discounted_value(&bm, lambda, 1e-12).unwrap();
            let s = shapley_value(&sg, lambda, 1e-12).unwrap();
            assert!((a.value - s.values[0]).abs() <= 2e-9, "{} vs {}", a.value, s.values[0]);
            assert!(s.profile_gap <= 1e-8);
        }
    }

    #[test]
    fn best_response_examples() {
        let sg = StochasticGame::from_absorbing(&big_match()).unwrap();
        let ones = |k| MixedAction::pure(1, k).unwrap();
        let ys = vec![mixed(&[0.5, 0.5]), ones(0), ones(0)];
        let r = best_response_mdp(&sg, 0.05, &ys, Player::Two, 1e-12).unwrap();
        assert!((r.values[0] - 0.5).abs() < 1e-12);
        let xs = vec![mixed(&[0.0, 1.0]), ones(0), ones(0)];
        let r = best_response_mdp(&sg, 0.05, &xs, Player::One, 1e-12).unwrap();
        assert!(r.values[0].abs() < 1e-15);
        assert_eq!(r.policy[0], 0);
    }

    #[test]
    fn two_state_values() {
        let g = two_state();
        for lambda in [0.1, 0.01, 1e-3] {
            let s = shapley_value(&g, lambda, 1e-10).unwrap();
            assert!(s.values[1].abs() <= 1e-8);
            assert!(s.profile_gap <= 1e-8);
        }
        let s = shapley_value(&g, 1e-3, 1e-10).unwrap();
        assert!((s.values[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn distributions_follow_hand_recursion() {
        let g = two_state();
        let lambda: f64 = 1e-3;
        let x = mixed(&[lambda / (1.0 + lambda), 1.0 / (1.0 + lambda)]);
        let one = MixedAction::pure(1, 0).unwrap();
        let half = mixed(&[0.5, 0.5]);
        let prof = StationaryProfile::new(
            &g,
            vec![x.clone(), x.clone(), one.clone(), one.clone()],
            vec![half.clone(), half, one.clone(), one],
        )
        .unwrap();
        let q = state_distributions(&g, &prof, 0, 3).unwrap();
        let (u, d) = (x.get(0), x.get(1));
        assert_eq!(q[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert!((q[1][1] - u / 2.0).abs() < 1e-15);
        assert!((q[2][1] - u * d).abs() < 1e-15);
        for dist in &q {
            assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_alternates() {
        let names = vec!["a".to_string(), "b".to_string()];
        let m: Matrix<f64> = Matrix::filled(1, 1, 0.0).unwrap();
        let g = StochasticGame::new(
            names,
            vec![m.clone(), m],
            vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            vec![false, false],
        )
        .unwrap();
        let prof = StationaryProfile::uniform(&g).unwrap();
        let q = state_distributions(&g, &prof, 0, 4).unwrap();
        assert_eq!(q[1], vec![0.0, 1.0]);
        assert_eq!(q[2], vec![1.0, 0.0]);
        let occ = occupation_profile(&g, 0.1, &prof, 0, 1e-9).unwrap();
        for (t, m) in occ.times.iter().zip(&occ.measures) {
            assert!((m[0] + m[1] - t).abs() <= 1e-12);
        }
    }

    #[test]
    fn embedded_trajectories_agree() {
        let bm = big_match();
        let sg = StochasticGame::from_absorbing(&bm).unwrap();
        let lambda = 0.01;
        let x = mixed(&[0.02, 0.98]);
        let y = mixed(&[0.3, 0.7]);
        let ones = MixedAction::pure(1, 0).unwrap();
        let prof = StationaryProfile::new(
            &sg,
            vec![x.clone(), ones.clone(), ones.clone()],
            vec![y.clone(), ones.clone(), ones],
        )
        .unwrap();
        let pair = StationaryPair::new(x, y);
        let q = occupation_trajectory(&bm, lambda, &pair, 1e-9).unwrap();
        let occ = occupation_profile(&sg, lambda, &prof, 0, 1e-9).unwrap();
        let live = occ.component(0);
        let (qt, qv) = q.breakpoints();
        let (lt, lv) = live.breakpoints();
        assert_eq!(qt.len(), lt.len());
        for k in 0..qt.len() {
            assert!((qv[k] - lv[k]).abs() <= 1e-12);
        }
        let l = payoff_trajectory(&bm, lambda, &pair, 1e-9).unwrap();
        let lm = payoff_trajectory_multi(&sg, lambda, &prof, 0, 1e-9).unwrap();
        for (a, b) in l.breakpoints().1.iter().zip(lm.breakpoints().1) {
            assert!((a - b).abs() <= 1e-12);
        }
        let _ = absorbing::r_lambda(&bm, lambda, &pair).unwrap();
    }

    #[test]
    fn cdf_extremes() {
        let one = |v: f64, p: f64| {
            let m = |v| Matrix::filled(1, 1, v).unwrap();
            AbsorbingGame::new(m(0.2), m(v), m(p)).unwrap()
        };
        let never = StochasticGame::from_absorbing(&one(0.0, 0.0)).unwrap();
        let prof = StationaryProfile::uniform(&never).unwrap();
        let cdf = absorption_cdf(&never, 0.1, &prof, 0).unwrap();
        assert!(cdf.values().iter().all(|&v| v == 0.0));
        let at_once = StochasticGame::from_absorbing(&one(1.0, 1.0)).unwrap();
        let prof = StationaryProfile::uniform(&at_once).unwrap();
        let cdf = absorption_cdf(&at_once, 0.1, &prof, 0).unwrap();
        assert_eq!(cdf.values()[0], 0.0);
        assert!(cdf.values()[1..].iter().all(|&v| v == 1.0));
        assert!((cdf.times()[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn dual_negates_values() {
        let g = two_state();
        let a = shapley_value(&g, 0.05, 1e-12).unwrap();
        let b = shapley_value(&g.dual(), 0.05, 1e-12).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((p + q).abs() <= 2e-9);
        }
    }
}
