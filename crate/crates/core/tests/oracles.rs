use limtraj::absorbing::{discounted_value, StationaryPair};
use limtraj::scenarios::{big_match_game, example2_game, jcr_game};
use limtraj::stochgame::{shapley_value, StochasticGame};
use limtraj::trajectory::{occupation_closed_form, occupation_trajectory, payoff_trajectory};
use limtraj::MixedAction64;

fn value_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let lower = a.min(b).max(c.min(d));
    let upper = a.max(c).min(b.max(d));
    if lower >= upper {
        return lower;
    }
    (a * d - b * c) / (a + d - b - c)
}

// By the a/b symmetry v(b) = -v(a); solve c = val(local game at a).
fn jcr_value_oracle(l: f64) -> f64 {
    let f = |c: f64| {
        let m = 1.0 - l;
        value_2x2(l + m * c, l - m * c, l - m * c, l + m) - c
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn jcr_matches_symmetric_fixed_point() {
    let g = jcr_game();
    for l in [1e-2, 1e-3, 1e-4, 1e-5] {
        let sol = shapley_value(&g, l, 1e-10).unwrap();
        let c = jcr_value_oracle(l);
        assert!((sol.values[0] - c).abs() < 1e-9, "λ={l}: {} vs {c}", sol.values[0]);
        assert!((sol.values[1] + c).abs() < 1e-9);
        assert!(c <= 2.0 * l.sqrt());
        if l <= 1e-3 {
            let r = l.sqrt();
            for w in 0..2 {
                for q in [sol.profile.x[w].get(1) / r, sol.profile.y[w].get(1) / r] {
                    assert!((0.5..=2.0).contains(&q), "λ={l} ratio {q}");
                }
            }
        }
    }
}

#[test]
fn example2_value_closed_form() {
    let g = example2_game();
    for l in [0.5, 0.1, 1e-2, 1e-3, 1e-5] {
        let sol = discounted_value(&g, l, 1e-13).unwrap();
        assert!((sol.value - 1.0 / (1.0 + l.sqrt())).abs() < 1e-9, "λ={l}");
        let w = l.sqrt() / (1.0 + l.sqrt());
        assert!((sol.x_opt.get(0) - w).abs() < 1e-8);
        assert!((sol.y_opt.get(0) - w).abs() < 1e-8);
    }
}

#[test]
fn embedded_big_match_agrees_with_absorbing_solver() {
    let g = big_match_game();
    let s = StochasticGame::from_absorbing(&g).unwrap();
    for l in [0.2, 1e-3] {
        let a = discounted_value(&g, l, 1e-12).unwrap();
        let b = shapley_value(&s, l, 1e-12).unwrap();
        assert!((a.value - b.values[0]).abs() < 1e-9);
    }
}

#[test]
fn constant_absorption_matches_closed_form() {
    // Against (1/2,1/2) every row of the Big Match absorbs with rate x_T.
    let g = big_match_game();
    let l = 1e-3;
    for xt in [0.0, 0.01, 0.3] {
        let pair = StationaryPair::new(
            MixedAction64::new(vec![xt, 1.0 - xt]).unwrap(),
            MixedAction64::uniform(2).unwrap(),
        );
        let q = occupation_trajectory(&g, l, &pair, 1e-9).unwrap();
        let (_, values) = q.breakpoints();
        for n in [1usize, 10, 500, 5000] {
            assert!((values[n] - occupation_closed_form(l, xt, n)).abs() < 1e-12);
        }
        let p = payoff_trajectory(&g, l, &pair, 1e-9).unwrap();
        assert!(p.terminal() <= 1.0 + 1e-12 && p.terminal() >= -1e-12);
    }
}
