//! Cumulated payoff and occupation trajectories on the normalized time
//! axis `[0, 1]`.
//!
//! Stage `n` of the λ-discounted game occupies `[t_{n-1}, t_n)` with
//! `t_n = 1 - (1-λ)^n`. A trajectory records the cumulated quantity at
//! every breakpoint and is interpolated linearly in between.

use crate::absorbing::{eval, AbsorbingModel, Quantity, StationaryPair};
use crate::error::{check_lambda, invalid, Result};
use crate::num::{CompensatedSum, Extended, Scalar};

/// Intensity `γ ∈ [0, +∞]` of the limit occupation trajectory.
pub type Gamma<T> = Extended<T>;

/// Default truncation mass for trajectories.
pub const DEFAULT_MASS_TOL: f64 = 1e-9;

/// Below this `Q(1)` the fitted intensity is reported as `+∞`.
pub const GAMMA_FLOOR: f64 = 1e-9;

/// Upper limit on the number of simulated stages.
pub const MAX_STAGES: usize = 50_000_000;

/// Piecewise-linear curve through `(times[k], values[k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    lambda: T,
    times: Vec<T>,
    values: Vec<T>,
    tail_bound: T,
    stages: usize,
}

impl<T: Scalar> Trajectory<T> {
    /// Builds a trajectory from explicit samples. `times` must start at 0,
    /// end at 1 and increase strictly.
    pub fn from_points(lambda: T, times: Vec<T>, values: Vec<T>) -> Result<Self> {
        check_lambda(lambda)?;
        if times.len() != values.len() || times.len() < 2 {
            return Err(invalid("a trajectory needs at least two matching samples"));
        }
        if times[0] != T::zero() || *times.last().unwrap() != T::one() {
            return Err(invalid("trajectory samples must span [0, 1]"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("trajectory times must increase strictly"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("trajectory values must be finite"));
        }
        let stages = times.len() - 1;
        Ok(Self { lambda, times, values, tail_bound: T::zero(), stages })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Breakpoints, starting with `t_0 = 0`. When the stage sum was
    /// truncated a final point at `t = 1` carries the last value.
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of simulated stages `N`; `times()[..=N]` are the true
    /// breakpoints `t_0..t_N`.
    pub fn stages(&self) -> usize {
        self.stages
    }

    /// The breakpoint samples, without the flat tail point.
    pub fn breakpoints(&self) -> (&[T], &[T]) {
        (&self.times[..=self.stages], &self.values[..=self.stages])
    }

    /// Bound on the error caused by truncating the stage sum.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    /// Linear interpolation at `t`, clamped to `[0, 1]`.
    pub fn at(&self, t: T) -> T {
        let t = t.max(T::zero()).min(T::one());
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.values[0];
        }
        if k == self.times.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }

    /// Value at `t = 1`.
    pub fn terminal(&self) -> T {
        *self.values.last().unwrap()
    }
}

/// Anything that can be evaluated on `[0, 1]`.
pub trait Curve<T> {
    fn value_at(&self, t: T) -> T;
}

impl<T: Scalar> Curve<T> for Trajectory<T> {
    fn value_at(&self, t: T) -> T {
        self.at(t)
    }
}

impl<T, F: Fn(T) -> T> Curve<T> for F {
    fn value_at(&self, t: T) -> T {
        self(t)
    }
}

/// Smallest `N` with `(1-λ)^N ≤ mass_tol`.
pub fn stage_horizon<T: Scalar>(lambda: T, mass_tol: T) -> Result<usize> {
    check_lambda(lambda)?;
    if !(mass_tol > T::zero() && mass_tol < T::one()) {
        return Err(invalid(format!("mass tolerance {mass_tol} outside (0, 1)")));
    }
    if lambda == T::one() {
        return Ok(1);
    }
    let keep = T::one() - lambda;
    let guess = (mass_tol.ln() / lambda.neg().ln_1p()).ceil();
    let limit = T::from_count(MAX_STAGES);
    if !(guess <= limit) {
        return Err(invalid(format!(
            "λ = {lambda} needs more than {MAX_STAGES} stages at mass {mass_tol}"
        )));
    }
    let mut n = guess.to_usize().unwrap_or(1).max(1);
    while n > 1 && keep.powf(T::from_count(n - 1)) <= mass_tol {
        n -= 1;
    }
    while keep.powf(T::from_count(n)) > mass_tol {
        n += 1;
    }
    Ok(n)
}

/// Discount weight of stage `n ≥ 1`, `λ(1-λ)^{n-1}`.
pub fn stage_weight<T: Scalar>(lambda: T, n: usize) -> T {
    if n <= 1 {
        lambda
    } else {
        lambda * (T::from_count(n - 1) * lambda.neg().ln_1p()).exp()
    }
}

/// `t_n = 1 - (1-λ)^n`.
pub fn breakpoint<T: Scalar>(lambda: T, n: usize) -> T {
    if n == 0 {
        T::zero()
    } else {
        -(T::from_count(n) * lambda.neg().ln_1p()).exp_m1()
    }
}

/// The stage `n(t)` whose interval `[t_{n-1}, t_n)` contains `t`.
/// Returns `None` at `t = 1`, which no stage contains.
pub fn stage_index<T: Scalar>(lambda: T, t: T) -> Result<Option<usize>> {
    check_lambda(lambda)?;
    if !(t >= T::zero() && t <= T::one()) {
        return Err(invalid(format!("time {t} outside [0, 1]")));
    }
    if t == T::one() {
        return Ok(None);
    }
    if lambda == T::one() {
        return Ok(Some(1));
    }
    let guess = (t.neg().ln_1p() / lambda.neg().ln_1p()).floor();
    let mut n = guess.to_usize().unwrap_or(0) + 1;
    while n > 1 && breakpoint(lambda, n - 1) > t {
        n -= 1;
    }
    while breakpoint(lambda, n) <= t {
        n += 1;
    }
    Ok(Some(n))
}

/// Accumulates `λΣ_{i≤n}(1-λ)^{i-1} c_i` for `n = 1..=horizon`.
///
/// Times are the compensated partial sums of the stage weights, so a
/// unit stage term reproduces the time axis exactly.
pub(crate) fn accumulate<T: Scalar>(
    lambda: T,
    horizon: usize,
    tail_bound: T,
    mut term: impl FnMut(usize) -> T,
) -> Trajectory<T> {
    let mut times = Vec::with_capacity(horizon + 2);
    let mut values = Vec::with_capacity(horizon + 2);
    times.push(T::zero());
    values.push(T::zero());
    let mut clock = CompensatedSum::new();
    let mut acc = CompensatedSum::new();
    for n in 1..=horizon {
        let w = stage_weight(lambda, n);
        clock.add(w);
        acc.add(w * term(n));
        times.push(clock.value().min(T::one()));
        values.push(acc.value());
    }
    from_breakpoints(lambda, times, values, tail_bound)
}

/// Wraps samples at `t_0 = 0, ..., t_N`. When `t_N < 1` the curve is
/// continued to `t = 1` at the slope of its last stage; the continuation
/// covers discounted mass `1 - t_N`, so its error is within the tail bound.
pub(crate) fn from_breakpoints<T: Scalar>(
    lambda: T,
    mut times: Vec<T>,
    mut values: Vec<T>,
    tail_bound: T,
) -> Trajectory<T> {
    let mut stages = times.len() - 1;
    if *times.last().unwrap() < T::one() {
        let n = times.len() - 1;
        let last = values[n];
        let slope = if n > 0 && times[n] > times[n - 1] {
            (last - values[n - 1]) / (times[n] - times[n - 1])
        } else {
            T::zero()
        };
        values.push(last + slope * (T::one() - times[n]));
        times.push(T::one());
    } else {
        // Rounding may close the clock early; drop repeated endpoints.
        while times.len() > 2 && times[times.len() - 2] >= T::one() {
            times.remove(times.len() - 2);
            values.remove(values.len() - 2);
        }
        stages = times.len() - 1;
    }
    Trajectory { lambda, times, values, tail_bound, stages }
}

struct PairTotals<T> {
    g: T,
    g_star_w: T,
    p: T,
}

fn totals<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    pair: &StationaryPair<T>,
) -> Result<PairTotals<T>> {
    pair.check(game)?;
    Ok(PairTotals {
        g: eval(game, Quantity::G, &pair.x, &pair.y),
        g_star_w: eval(game, Quantity::GStarWeighted, &pair.x, &pair.y),
        p: eval(game, Quantity::PStar, &pair.x, &pair.y),
    })
}

/// Cumulated expected payoff `l_λ` of a stationary pair.
///
/// The expected payoff of stage `i` is `s^{i-1} g + (1 - s^{i-1}) ḡ*`,
/// where `s = 1 - p*` is the per-stage survival probability.
pub fn payoff_trajectory<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    pair: &StationaryPair<T>,
    mass_tol: T,
) -> Result<Trajectory<T>> {
    let horizon = stage_horizon(lambda, mass_tol)?;
    let PairTotals { g, g_star_w, p } = totals(game, pair)?;
    let absorbed = if p > T::zero() { g_star_w / p } else { T::zero() };
    let survive = T::one() - p;
    let bound = g.abs().max(absorbed.abs());
    let tail = (T::one() - lambda).powf(T::from_count(horizon)) * bound;
    let mut alive = T::one();
    Ok(accumulate(lambda, horizon, tail, |_| {
        let c = if p > T::zero() { alive * g + (T::one() - alive) * absorbed } else { g };
        alive = alive * survive;
        c
    }))
}

/// Cumulated discounted time `Q_λ` spent in the non-absorbing state,
/// computed by running the survival probability stage by stage.
pub fn occupation_trajectory<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    lambda: T,
    pair: &StationaryPair<T>,
    mass_tol: T,
) -> Result<Trajectory<T>> {
    let horizon = stage_horizon(lambda, mass_tol)?;
    let p = totals(game, pair)?.p;
    Ok(occupation_for_absorption(lambda, p, horizon))
}

/// Occupation trajectory for a constant per-stage absorption probability.
pub fn occupation_for_absorption<T: Scalar>(lambda: T, p: T, horizon: usize) -> Trajectory<T> {
    let survive = T::one() - p;
    let tail = (T::one() - lambda).powf(T::from_count(horizon));
    let mut alive = T::one();
    accumulate(lambda, horizon, tail, |_| {
        let a = alive;
        alive = alive * survive;
        a
    })
}

/// `Q_λ(t_n) = (1 - ((1-λ)(1-p))^n) / (1 + p/λ - p)`.
pub fn occupation_closed_form<T: Scalar>(lambda: T, p: T, n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let log_keep = lambda.neg().ln_1p() + p.neg().ln_1p();
    let num = -(T::from_count(n) * log_keep).exp_m1();
    num / (T::one() + p / lambda - p)
}

/// Limit occupation trajectory `(1 - (1-t)^{1+γ}) / (1+γ)`, zero for
/// `γ = +∞`.
pub fn closed_form_q<T: Scalar>(gamma: Gamma<T>, t: T) -> Result<T> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(invalid(format!("time {t} outside [0, 1]")));
    }
    match gamma {
        Extended::Infinity => Ok(T::zero()),
        Extended::Finite(g) if g < T::zero() => Err(invalid(format!("negative γ = {g}"))),
        Extended::Finite(g) => {
            let e = T::one() + g;
            Ok(-(e * t.neg().ln_1p()).exp_m1() / e)
        }
    }
}

/// Inverts `Q(1) = 1/(1+γ)`.
pub fn fit_gamma<T: Scalar>(q: &Trajectory<T>) -> Gamma<T> {
    let end = q.terminal();
    if end <= T::lit(GAMMA_FLOOR) {
        Extended::Infinity
    } else {
        Extended::Finite((T::one() / end - T::one()).max(T::zero()))
    }
}

/// `k / (points - 1)` for `k = 0..points`.
pub fn uniform_grid<T: Scalar>(points: usize) -> Result<Vec<T>> {
    if points < 2 {
        return Err(invalid("a grid needs at least two points"));
    }
    let last = T::from_count(points - 1);
    Ok((0..points).map(|k| T::from_count(k) / last).collect())
}

/// `max |a(t) - b(t)|` over the uniform grid with `points` points.
pub fn sup_distance<T: Scalar>(a: &dyn Curve<T>, b: &dyn Curve<T>, points: usize) -> Result<T> {
    sup_distance_within(a, b, points, T::zero(), T::one())
}

/// Like [`sup_distance`], restricted to grid points inside `[from, to]`.
pub fn sup_distance_within<T: Scalar>(
    a: &dyn Curve<T>,
    b: &dyn Curve<T>,
    points: usize,
    from: T,
    to: T,
) -> Result<T> {
    let mut worst = T::zero();
    for t in uniform_grid::<T>(points)? {
        if t >= from && t <= to {
            worst = worst.max((a.value_at(t) - b.value_at(t)).abs());
        }
    }
    Ok(worst)
}
