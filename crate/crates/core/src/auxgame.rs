//! The auxiliary limit game on perturbed strategy triples.
//!
//! A player-one triple `(x, x', a)` plays `x` and adds a perturbation `x'`
//! with intensity `a ∈ [0, +∞]`; dually `(y, y', b)` for player two. The
//! payoff is
//!
//! ```text
//!        g(x,y) + a G*(x',y) + b G*(x,y')
//! A  =  ----------------------------------
//!         1 + a p*(x',y) + b p*(x,y')
//! ```
//!
//! Both numerator and denominator are bilinear, so for a fixed triple of
//! one player the payoff is a ratio of linear forms in the opponent's
//! mixed actions. The mediant inequality
//! `min(a/c, b/d) ≤ (a+b)/(c+d) ≤ max(a/c, b/d)` (positive `c`, `d`) puts
//! the extrema of such ratios at pure actions, and makes `A` monotone
//! between its `b = 0` and `b = ∞` limits. The guarantees below are
//! therefore exact finite enumerations.

use crate::absorbing::{eval, AbsorbingModel, Quantity};
use crate::error::{check_dim, check_lambda, invalid, Result};
use crate::matgame::MixedAction;
use crate::num::{median3, Extended, Scalar};
use crate::trajectory::Gamma;

/// `(base, perturb, intensity)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxTriple<T> {
    pub base: MixedAction<T>,
    pub perturb: MixedAction<T>,
    pub intensity: Extended<T>,
}

impl<T: Scalar> AuxTriple<T> {
    pub fn new(base: MixedAction<T>, perturb: MixedAction<T>, intensity: Extended<T>) -> Result<Self> {
        check_dim(base.len(), perturb.len())?;
        if let Extended::Finite(a) = intensity {
            if !(a >= T::zero()) || !a.is_finite() {
                return Err(invalid(format!("intensity {a} must be a nonnegative number")));
            }
        }
        Ok(Self { base, perturb, intensity })
    }

    pub fn finite(base: MixedAction<T>, perturb: MixedAction<T>, intensity: T) -> Result<Self> {
        Self::new(base, perturb, Extended::Finite(intensity))
    }

    /// `(x, x, 0)`: play `x` unperturbed.
    pub fn plain(base: MixedAction<T>) -> Self {
        Self { perturb: base.clone(), base, intensity: Extended::Finite(T::zero()) }
    }
}

fn check_triples<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    s: &AuxTriple<T>,
    t: &AuxTriple<T>,
) -> Result<()> {
    let (n, m) = game.actions();
    check_dim(n, s.base.len())?;
    check_dim(m, t.base.len())
}

/// One perturbation channel: `(intensity, G*, p*)`.
type Channel<T> = (Extended<T>, T, T);

/// Limit of `(base_num + Σ k G) / (base_den + Σ k p)` over the channels,
/// where an infinite intensity with positive `p` dominates.
fn channel_ratio<T: Scalar>(base_num: T, base_den: T, channels: [Channel<T>; 2]) -> Result<T> {
    let mut num = base_num;
    let mut den = base_den;
    let mut dominant: Option<T> = None;
    for (k, big_g, p) in channels {
        match k {
            Extended::Finite(k) => {
                num = num + k * big_g;
                den = den + k * p;
            }
            Extended::Infinity if p > T::zero() => {
                if dominant.is_some() {
                    return Err(invalid(
                        "both intensities are infinite with positive absorption; the limit is ambiguous",
                    ));
                }
                dominant = Some(big_g / p);
            }
            Extended::Infinity if big_g != T::zero() => {
                return Err(invalid("weighted absorbing payoff is nonzero where absorption is zero"));
            }
            Extended::Infinity => {}
        }
    }
    Ok(dominant.unwrap_or(num / den))
}

/// Payoff of the auxiliary game.
///
/// An infinite intensity whose absorption term `p*(x',y)` is positive
/// turns the payoff into the absorbing average `ḡ*(x',y)`. When that
/// absorption term vanishes the intensity drops out.
pub fn aux_payoff<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    s: &AuxTriple<T>,
    t: &AuxTriple<T>,
) -> Result<T> {
    check_triples(game, s, t)?;
    let g = eval(game, Quantity::G, &s.base, &t.base);
    let a_chan = (
        s.intensity,
        eval(game, Quantity::GStarWeighted, &s.perturb, &t.base),
        eval(game, Quantity::PStar, &s.perturb, &t.base),
    );
    let b_chan = (
        t.intensity,
        eval(game, Quantity::GStarWeighted, &s.base, &t.perturb),
        eval(game, Quantity::PStar, &s.base, &t.perturb),
    );
    channel_ratio(g, T::one(), [a_chan, b_chan])
}

/// Absorption intensity: `+∞` if `p*(x,y) > 0`, else
/// `a p*(x',y) + b p*(x,y')` with `∞·0 = 0`.
pub fn gamma_of<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    s: &AuxTriple<T>,
    t: &AuxTriple<T>,
) -> Result<Gamma<T>> {
    check_triples(game, s, t)?;
    if eval(game, Quantity::PStar, &s.base, &t.base) > T::zero() {
        return Ok(Extended::Infinity);
    }
    let pa = eval(game, Quantity::PStar, &s.perturb, &t.base);
    let pb = eval(game, Quantity::PStar, &s.base, &t.perturb);
    Ok(s.intensity.scale(pa).add(t.intensity.scale(pb)))
}

/// The stationary strategy `(x + λa x') / (1 + λa)` of the discounted game.
pub fn hat_strategy<T: Scalar>(s: &AuxTriple<T>, lambda: T) -> Result<MixedAction<T>> {
    check_lambda(lambda)?;
    let a = s
        .intensity
        .as_finite()
        .ok_or_else(|| invalid("the discounted strategy needs a finite intensity"))?;
    let la = lambda * a;
    let den = T::one() + la;
    let w = s
        .base
        .weights()
        .iter()
        .zip(s.perturb.weights())
        .map(|(&x, &xp)| (x + la * xp) / den)
        .collect();
    MixedAction::normalized(w)
}

/// What `(x, x', a)` guarantees player one in the auxiliary game:
///
/// `min( min_j (g(x,j) + a G*(x',j)) / (1 + a p*(x',j)),
///       min_{j' : p*(x,j') > 0} ḡ*(x,j') )`.
///
/// For fixed `b` the payoff is a ratio of positive-denominator linear
/// forms in `(y, y')`, and by the mediant inequality it lies between its
/// `b = 0` and `b = ∞` limits. The first needs only `y`, the second only
/// `y'`, and each is minimized at a vertex.
pub fn aux_guarantee_p1<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    s: &AuxTriple<T>,
) -> Result<T> {
    let (n, m) = game.actions();
    check_dim(n, s.base.len())?;
    let a = s
        .intensity
        .as_finite()
        .ok_or_else(|| invalid("the guarantee needs a finite intensity"))?;
    let mut best = T::infinity();
    for j in 0..m {
        let mut g = T::zero();
        let mut ga = T::zero();
        let mut pa = T::zero();
        let mut gb = T::zero();
        let mut pb = T::zero();
        for (i, w) in s.base.support() {
            let p = game.p_star(i, j);
            g = g + w * game.g(i, j);
            gb = gb + w * p * game.g_star(i, j);
            pb = pb + w * p;
        }
        for (i, w) in s.perturb.support() {
            let p = game.p_star(i, j);
            ga = ga + w * p * game.g_star(i, j);
            pa = pa + w * p;
        }
        best = best.min((g + a * ga) / (T::one() + a * pa));
        if pb > T::zero() {
            best = best.min(gb / pb);
        }
    }
    Ok(best)
}

/// Dual of [`aux_guarantee_p1`]: what `(y, y', b)` holds player one to,
///
/// `max( max_i (g(i,y) + b G*(i,y')) / (1 + b p*(i,y')),
///       max_{i' : p*(i',y) > 0} ḡ*(i',y) )`.
pub fn aux_guarantee_p2<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    t: &AuxTriple<T>,
) -> Result<T> {
    let (n, m) = game.actions();
    check_dim(m, t.base.len())?;
    let b = t
        .intensity
        .as_finite()
        .ok_or_else(|| invalid("the guarantee needs a finite intensity"))?;
    let mut best = T::neg_infinity();
    for i in 0..n {
        let mut g = T::zero();
        let mut gb = T::zero();
        let mut pb = T::zero();
        let mut ga = T::zero();
        let mut pa = T::zero();
        for (j, w) in t.base.support() {
            let p = game.p_star(i, j);
            g = g + w * game.g(i, j);
            ga = ga + w * p * game.g_star(i, j);
            pa = pa + w * p;
        }
        for (j, w) in t.perturb.support() {
            let p = game.p_star(i, j);
            gb = gb + w * p * game.g_star(i, j);
            pb = pb + w * p;
        }
        best = best.max((g + b * gb) / (T::one() + b * pb));
        if pa > T::zero() {
            best = best.max(ga / pa);
        }
    }
    Ok(best)
}

/// The three terms of the median characterization and their median.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedReport<T> {
    /// `g(x, y)`.
    pub stage: T,
    /// Best absorbing average player one can trigger against `y`, or `-∞`.
    pub h_plus: T,
    /// Worst absorbing average player two can trigger against `x`, or `+∞`.
    pub h_minus: T,
    pub med: T,
}

/// `med(g(x,y), sup_{x''} ḡ*(x'',y), inf_{y''} ḡ*(x,y''))`, where the sup
/// and inf range over actions with positive absorption (empty sup `-∞`,
/// empty inf `+∞`) and are attained at pure actions.
pub fn med_objective<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    x: &MixedAction<T>,
    y: &MixedAction<T>,
) -> Result<MedReport<T>> {
    let (n, m) = game.actions();
    check_dim(n, x.len())?;
    check_dim(m, y.len())?;
    let stage = eval(game, Quantity::G, x, y);
    let mut h_plus = T::neg_infinity();
    for i in 0..n {
        let (mut gs, mut p) = (T::zero(), T::zero());
        for (j, w) in y.support() {
            let ps = game.p_star(i, j);
            gs = gs + w * ps * game.g_star(i, j);
            p = p + w * ps;
        }
        if p > T::zero() {
            h_plus = h_plus.max(gs / p);
        }
    }
    let mut h_minus = T::infinity();
    for j in 0..m {
        let (mut gs, mut p) = (T::zero(), T::zero());
        for (i, w) in x.support() {
            let ps = game.p_star(i, j);
            gs = gs + w * ps * game.g_star(i, j);
            p = p + w * ps;
        }
        if p > T::zero() {
            h_minus = h_minus.min(gs / p);
        }
    }
    Ok(MedReport { stage, h_plus, h_minus, med: median3(stage, h_plus, h_minus) })
}

/// One inequality of the error decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck<T> {
    pub holds: bool,
    /// `bound - lhs`; `+∞` for a vacuous or unbounded check.
    pub slack: T,
    pub vacuous: bool,
}

impl<T: Scalar> BoundCheck<T> {
    fn vacuous() -> Self {
        Self { holds: true, slack: T::infinity(), vacuous: true }
    }

    fn compare(lhs: T, bound: T) -> Self {
        Self { holds: lhs <= bound, slack: bound - lhs, vacuous: false }
    }
}

/// How far an ε-optimal profile of the auxiliary game can sit from `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionReport<T> {
    /// `p*(x,y) > 0 ⇒ |ḡ*(x,y) - v| ≤ ε`.
    pub absorbing: BoundCheck<T>,
    /// `|g(x,y) - v| ≤ 2(1 + a p*(x',y) + b p*(x,y'))ε`.
    pub stage: BoundCheck<T>,
    /// With `S = a p*(x',y) + b p*(x,y') > 0`:
    /// `|(a G*(x',y) + b G*(x,y')) / S - v| ≤ 3(1+S)/S · ε`.
    pub perturbation: BoundCheck<T>,
}

impl<T: Scalar> DecompositionReport<T> {
    pub fn all_hold(&self) -> bool {
        self.absorbing.holds && self.stage.holds && self.perturbation.holds
    }
}

/// Evaluates the three error-decomposition inequalities for triples
/// `s`, `t` assumed ε-optimal in the auxiliary game with value `v`.
pub fn propabc_check<T: Scalar, G: AbsorbingModel<T> + ?Sized>(
    game: &G,
    s: &AuxTriple<T>,
    t: &AuxTriple<T>,
    eps: T,
    v: T,
) -> Result<DecompositionReport<T>> {
    check_triples(game, s, t)?;
    if !(eps >= T::zero()) {
        return Err(invalid("ε must be nonnegative"));
    }
    let p = eval(game, Quantity::PStar, &s.base, &t.base);
    let absorbing = if p > T::zero() {
        let avg = eval(game, Quantity::GStarWeighted, &s.base, &t.base) / p;
        BoundCheck::compare((avg - v).abs(), eps)
    } else {
        BoundCheck::vacuous()
    };

    let pa = eval(game, Quantity::PStar, &s.perturb, &t.base);
    let pb = eval(game, Quantity::PStar, &s.base, &t.perturb);
    let ga = eval(game, Quantity::GStarWeighted, &s.perturb, &t.base);
    let gb = eval(game, Quantity::GStarWeighted, &s.base, &t.perturb);
    let total = s.intensity.scale(pa).add(t.intensity.scale(pb));
    let g = eval(game, Quantity::G, &s.base, &t.base);
    let two = T::lit(2.0);
    let three = T::lit(3.0);

    let (stage, perturbation) = match total {
        Extended::Finite(sum) => {
            let stage = BoundCheck::compare((g - v).abs(), two * (T::one() + sum) * eps);
            let pert = if sum > T::zero() {
                let k_a = s.intensity.as_finite().unwrap_or(T::zero());
                let k_b = t.intensity.as_finite().unwrap_or(T::zero());
                let avg = (k_a * ga + k_b * gb) / sum;
                BoundCheck::compare((avg - v).abs(), three * (T::one() + sum) / sum * eps)
            } else {
                BoundCheck::vacuous()
            };
            (stage, pert)
        }
        Extended::Infinity => {
            // Stage bound is infinite; the weighted average tends to the
            // dominant channel's absorbing average, with factor 3.
            let avg = channel_ratio(T::zero(), T::zero(), [(s.intensity, ga, pa), (t.intensity, gb, pb)])?;
            let stage = BoundCheck { holds: true, slack: T::infinity(), vacuous: false };
            (stage, BoundCheck::compare((avg - v).abs(), three * eps))
        }
    };
    Ok(DecompositionReport { absorbing, stage, perturbation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorbing::AbsorbingGame;
    use crate::matgame::Matrix;
    use proptest::prelude::*;

    fn big_match() -> AbsorbingGame<f64> {
        AbsorbingGame::from_cells(&[
            vec![(1.0, true), (0.0, true)],
            vec![(0.0, false), (1.0, false)],
        ])
        .unwrap()
    }

    fn example1() -> AbsorbingGame<f64> {
        AbsorbingGame::from_cells(&[
            vec![(1.0, true), (0.0, false)],
            vec![(0.0, false), (1.0, true)],
        ])
        .unwrap()
    }

    fn example2() -> AbsorbingGame<f64> {
        AbsorbingGame::from_cells(&[
            vec![(1.0, true), (0.0, false)],
            vec![(0.0, false), (1.0, false)],
        ])
        .unwrap()
    }

    fn pure(k: usize) -> MixedAction<f64> {
        MixedAction::pure(2, k).unwrap()
    }

    fn half() -> MixedAction<f64> {
        MixedAction::uniform(2).unwrap()
    }

    const T_ROW: usize = 0;
    const B_ROW: usize = 1;

    fn bt1() -> AuxTriple<f64> {
        AuxTriple::finite(pure(B_ROW), pure(T_ROW), 1.0).unwrap()
    }

    #[test]
    fn payoff_examples() {
        let bm = big_match();
        let y0 = AuxTriple::plain(half());
        assert_eq!(aux_payoff(&bm, &AuxTriple::plain(pure(B_ROW)), &y0).unwrap(), 0.5);
        assert_eq!(aux_payoff(&bm, &bt1(), &y0).unwrap(), 0.5);
        let y_inf = AuxTriple::new(half(), half(), Extended::Infinity).unwrap();
        assert_eq!(aux_payoff(&bm, &bt1(), &y_inf).unwrap(), 0.5);
        // Infinite intensity with positive absorption gives ḡ*.
        let x_inf = AuxTriple::new(pure(B_ROW), pure(T_ROW), Extended::Infinity).unwrap();
        let right = AuxTriple::plain(pure(1));
        assert_eq!(aux_payoff(&bm, &x_inf, &right).unwrap(), 0.0);
        let both = AuxTriple::new(pure(T_ROW), pure(T_ROW), Extended::Infinity).unwrap();
        let y_both = AuxTriple::new(half(), half(), Extended::Infinity).unwrap();
        assert!(aux_payoff(&bm, &both, &y_both).is_err());
    }

    #[test]
    fn gamma_examples() {
        let bm = big_match();
        let y0 = AuxTriple::plain(half());
        assert_eq!(gamma_of(&bm, &bt1(), &y0).unwrap(), Extended::Finite(1.0));
        let top = AuxTriple::plain(pure(T_ROW));
        assert!(gamma_of(&bm, &top, &y0).unwrap().is_infinite());
        let ex2 = example2();
        let s = AuxTriple::finite(pure(B_ROW), pure(T_ROW), 10.0).unwrap();
        let t = AuxTriple::finite(pure(1), half(), 0.0).unwrap();
        assert_eq!(gamma_of(&ex2, &s, &t).unwrap(), Extended::Finite(0.0));
        let x_inf = AuxTriple::new(pure(B_ROW), pure(B_ROW), Extended::Infinity).unwrap();
        assert_eq!(gamma_of(&bm, &x_inf, &y0).unwrap(), Extended::Finite(0.0));
    }

    #[test]
    fn hat_examples() {
        let x = hat_strategy(&bt1(), 0.01).unwrap();
        assert!((x.get(T_ROW) - 0.01 / 1.01).abs() < 1e-15);
        assert!((x.get(B_ROW) - 1.0 / 1.01).abs() < 1e-15);
        let plain = AuxTriple::plain(half());
        assert_eq!(hat_strategy(&plain, 0.3).unwrap(), half());
        let tiny = hat_strategy(&bt1(), 1e-12).unwrap();
        assert!(tiny.max_abs_diff(&pure(B_ROW)) < 1e-11);
        let inf = AuxTriple::new(pure(B_ROW), pure(T_ROW), Extended::Infinity).unwrap();
        assert!(hat_strategy(&inf, 0.1).is_err());
    }

    #[test]
    fn guarantee_examples() {
        let bm = big_match();
        assert_eq!(aux_guarantee_p1(&bm, &bt1()).unwrap(), 0.5);
        assert_eq!(aux_guarantee_p2(&bm, &AuxTriple::plain(half())).unwrap(), 0.5);

        let ex1 = example1();
        let mut last = 0.0;
        for n in [1.0, 10.0, 100.0, 1000.0] {
            let s = AuxTriple::finite(half(), half(), n).unwrap();
            let v = aux_guarantee_p1(&ex1, &s).unwrap();
            assert!(v > last && v <= 1.0);
            last = v;
        }
        assert!(last > 0.99);
        for t in [AuxTriple::plain(pure(0)), AuxTriple::finite(half(), pure(1), 3.0).unwrap()] {
            assert!(aux_guarantee_p2(&ex1, &t).unwrap() >= 1.0);
        }

        let g = Matrix::from_rows(vec![vec![0.3, -0.5], vec![0.9, 0.1]]).unwrap();
        let z = Matrix::filled(2, 2, 0.0).unwrap();
        let flat = AbsorbingGame::new(g, z.clone(), z).unwrap();
        let x = MixedAction::new(vec![0.25, 0.75]).unwrap();
        let s = AuxTriple::finite(x, half(), 4.0).unwrap();
        assert!((aux_guarantee_p1(&flat, &s).unwrap() - (0.25 * -0.5 + 0.75 * 0.1)).abs() < 1e-15);
        let y = AuxTriple::plain(MixedAction::new(vec![0.5, 0.5]).unwrap());
        assert!((aux_guarantee_p2(&flat, &y).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn med_examples() {
        let bm = big_match();
        let r = med_objective(&bm, &pure(B_ROW), &half()).unwrap();
        assert_eq!((r.stage, r.h_plus, r.h_minus, r.med), (0.5, 0.5, f64::INFINITY, 0.5));
        let r = med_objective(&bm, &pure(T_ROW), &half()).unwrap();
        assert_eq!((r.stage, r.h_plus, r.h_minus, r.med), (0.5, 0.5, 0.0, 0.5));
        let g = Matrix::from_rows(vec![vec![0.3, -0.5]]).unwrap();
        let z = Matrix::filled(1, 2, 0.0).unwrap();
        let flat = AbsorbingGame::new(g, z.clone(), z).unwrap();
        let r = med_objective(&flat, &MixedAction::pure(1, 0).unwrap(), &half()).unwrap();
        assert_eq!((r.h_plus, r.h_minus), (f64::NEG_INFINITY, f64::INFINITY));
        assert!((r.med + 0.1).abs() < 1e-15);
    }

    #[test]
    fn decomposition_examples() {
        let bm = big_match();
        let r = propabc_check(&bm, &bt1(), &AuxTriple::plain(half()), 0.0, 0.5).unwrap();
        assert!(r.all_hold());
        assert!(r.absorbing.vacuous);
        assert_eq!(r.stage.slack, 0.0);
        assert_eq!(r.perturbation.slack, 0.0);

        let g: Matrix<f64> = Matrix::from_rows(vec![vec![0.3]]).unwrap();
        let z = Matrix::filled(1, 1, 0.0).unwrap();
        let flat = AbsorbingGame::new(g, z.clone(), z).unwrap();
        let one = AuxTriple::plain(MixedAction::pure(1, 0).unwrap());
        let r = propabc_check(&flat, &one, &one, 0.05, 0.2).unwrap();
        assert!(r.absorbing.vacuous && r.perturbation.vacuous);
        assert!(r.stage.holds);
        assert!((r.stage.slack - 0.0).abs() < 1e-15);
        assert!(!propabc_check(&flat, &one, &one, 0.04, 0.2).unwrap().stage.holds);

        let ex1 = example1();
        for n in [2.0, 10.0] {
            let s = AuxTriple::finite(half(), half(), n).unwrap();
            for t in [AuxTriple::plain(pure(0)), AuxTriple::plain(half())] {
                let r = propabc_check(&ex1, &s, &t, 1.0 / n, 1.0).unwrap();
                assert!(!r.absorbing.vacuous && r.absorbing.holds);
            }
        }
    }

    fn simplex_grid(m: usize, steps: usize) -> Vec<Vec<f64>> {
        fn rec(m: usize, left: usize, steps: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
            if m == 1 {
                cur.push(left as f64 / steps as f64);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for k in 0..=left {
                cur.push(k as f64 / steps as f64);
                rec(m - 1, left - k, steps, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(m, steps, steps, &mut Vec::new(), &mut out);
        out
    }

    /// Minimum of the auxiliary payoff over a grid of `(y, y')` and
    /// `b ∈ {0, 1, 10, 100, ∞}`, computed from the opponent-linear forms.
    fn grid_guarantee(game: &AbsorbingGame<f64>, s: &AuxTriple<f64>) -> f64 {
        let (_, m) = game.actions();
        let a = s.intensity.as_finite().unwrap();
        let col = |q: Quantity, x: &MixedAction<f64>, j: usize| {
            eval(game, q, x, &MixedAction::pure(m, j).unwrap())
        };
        let grid = simplex_grid(m, 20);
        let lin = |w: &Vec<f64>, q: Quantity, x: &MixedAction<f64>| -> f64 {
            w.iter().enumerate().map(|(j, wj)| wj * col(q, x, j)).sum()
        };
        let ys: Vec<(f64, f64, f64)> = grid
            .iter()
            .map(|w| {
                (
                    lin(w, Quantity::G, &s.base),
                    lin(w, Quantity::GStarWeighted, &s.perturb),
                    lin(w, Quantity::PStar, &s.perturb),
                )
            })
            .collect();
        let yps: Vec<(f64, f64)> = grid
            .iter()
            .map(|w| (lin(w, Quantity::GStarWeighted, &s.base), lin(w, Quantity::PStar, &s.base)))
            .collect();
        let mut best = f64::INFINITY;
        for &(g, ga, pa) in &ys {
            for &(gb, pb) in &yps {
                for b in [0.0, 1.0, 10.0, 100.0] {
                    best = best.min((g + a * ga + b * gb) / (1.0 + a * pa + b * pb));
                }
                let inf = if pb > 0.0 { gb / pb } else { (g + a * ga) / (1.0 + a * pa) };
                best = best.min(inf);
            }
        }
        best
    }

    fn game_strategy() -> impl Strategy<Value = AbsorbingGame<f64>> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(-1.0f64..1.0, n * m),
                prop::collection::vec(-1.0f64..1.0, n * m),
                prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n * m),
            )
                .prop_map(move |(g, gs, p)| {
                    AbsorbingGame::new(
                        Matrix::new(n, m, g).unwrap(),
                        Matrix::new(n, m, gs).unwrap(),
                        Matrix::new(n, m, p).unwrap(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn vertex_attainment(
            game in game_strategy(),
            raw in prop::collection::vec(0.0f64..1.0, 8),
            a in prop_oneof![Just(0.0), 0.0f64..20.0],
        ) {
            let n = game.actions().0;
            let x = MixedAction::normalized(raw[..n].iter().map(|v| v + 1e-3).collect()).unwrap();
            let xp = MixedAction::normalized(raw[4..4 + n].iter().map(|v| v + 1e-3).collect()).unwrap();
            let s = AuxTriple::finite(x, xp, a).unwrap();
            let exact = aux_guarantee_p1(&game, &s).unwrap();
            let grid = grid_guarantee(&game, &s);
            prop_assert!(grid >= exact - 1e-6, "grid {} below exact {}", grid, exact);
            prop_assert!(grid <= exact + 1e-9, "grid {} above exact {}", grid, exact);
        }
    }
}
