//! TOML game files.
//!
//! ```toml
//! type = "absorbing"
//! rows = 2
//! cols = 2
//! g = [[1.0, 0.0], [0.0, 1.0]]
//! g_star = [[1.0, 0.0], [0.0, 1.0]]
//! p_star = [[1.0, 1.0], [0.0, 0.0]]
//! ```
//!
//! Stochastic games list one payoff matrix per state and, per state, one
//! next-state distribution per cell in row-major order.

use serde::{Deserialize, Serialize};

use limtraj::absorbing::AbsorbingGame;
use limtraj::matgame::{Matrix, PayoffTable};
use limtraj::stochgame::StochasticGame;
use limtraj::{AbsorbingGame64, Matrix64, StochasticGame64};

#[derive(Clone, Debug, PartialEq)]
pub enum GameFile {
    Absorbing {
        rows: usize,
        cols: usize,
        g: Vec<Vec<f64>>,
        g_star: Vec<Vec<f64>>,
        p_star: Vec<Vec<f64>>,
    },
    Stochastic {
        states: Vec<String>,
        absorbing_flags: Vec<bool>,
        payoff: Vec<Vec<Vec<f64>>>,
        transitions: Vec<Vec<Vec<f64>>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Absorbing,
    Stochastic,
}

// Flat layout so the TOML deserializer can attach line numbers to every field.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[serde(rename = "type")]
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_star: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_star: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    absorbing_flags: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payoff: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transitions: Option<Vec<Vec<Vec<f64>>>>,
}

fn required<T>(v: Option<T>, field: &str, kind: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("missing field `{field}` for a {kind} game"))
}

#[derive(Clone, Debug)]
pub enum Game {
    Absorbing(AbsorbingGame64),
    Stochastic(StochasticGame64),
}

fn matrix(field: &str, rows: Vec<Vec<f64>>) -> Result<Matrix64, String> {
    Matrix::from_rows(rows).map_err(|e| format!("field `{field}`: {e}"))
}

impl GameFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: Raw = toml::from_str(text).map_err(|e| e.to_string())?;
        Ok(match raw.kind {
            Kind::Absorbing => GameFile::Absorbing {
                rows: required(raw.rows, "rows", "absorbing")?,
                cols: required(raw.cols, "cols", "absorbing")?,
                g: required(raw.g, "g", "absorbing")?,
                g_star: required(raw.g_star, "g_star", "absorbing")?,
                p_star: required(raw.p_star, "p_star", "absorbing")?,
            },
            Kind::Stochastic => GameFile::Stochastic {
                states: required(raw.states, "states", "stochastic")?,
                absorbing_flags: required(raw.absorbing_flags, "absorbing_flags", "stochastic")?,
                payoff: required(raw.payoff, "payoff", "stochastic")?,
                transitions: required(raw.transitions, "transitions", "stochastic")?,
            },
        })
    }

    pub fn to_toml(&self) -> String {
        let mut raw = Raw {
            kind: Kind::Absorbing,
            rows: None,
            cols: None,
            g: None,
            g_star: None,
            p_star: None,
            states: None,
            absorbing_flags: None,
            payoff: None,
            transitions: None,
        };
        match self.clone() {
            GameFile::Absorbing { rows, cols, g, g_star, p_star } => {
                raw.rows = Some(rows);
                raw.cols = Some(cols);
                raw.g = Some(g);
                raw.g_star = Some(g_star);
                raw.p_star = Some(p_star);
            }
            GameFile::Stochastic { states, absorbing_flags, payoff, transitions } => {
                raw.kind = Kind::Stochastic;
                raw.states = Some(states);
                raw.absorbing_flags = Some(absorbing_flags);
                raw.payoff = Some(payoff);
                raw.transitions = Some(transitions);
            }
        }
        toml::to_string(&raw).expect("game files always serialize")
    }

    pub fn into_game(self) -> Result<Game, String> {
        match self {
            GameFile::Absorbing { rows, cols, g, g_star, p_star } => {
                let g = matrix("g", g)?;
                let g_star = matrix("g_star", g_star)?;
                let p_star = matrix("p_star", p_star)?;
                for (name, m) in [("g", &g), ("g_star", &g_star), ("p_star", &p_star)] {
                    if (m.rows(), m.cols()) != (rows, cols) {
                        return Err(format!(
                            "field `{name}`: expected {rows}x{cols}, found {}x{}",
                            m.rows(),
                            m.cols()
                        ));
                    }
                }
                AbsorbingGame::new(g, g_star, p_star).map(Game::Absorbing).map_err(|e| e.to_string())
            }
            GameFile::Stochastic { states, absorbing_flags, payoff, transitions } => {
                let payoff = payoff
                    .into_iter()
                    .enumerate()
                    .map(|(w, m)| matrix(&format!("payoff[{w}]"), m))
                    .collect::<Result<Vec<_>, _>>()?;
                StochasticGame::new(states, payoff, transitions, absorbing_flags)
                    .map(Game::Stochastic)
                    .map_err(|e| e.to_string())
            }
        }
    }

    pub fn from_absorbing(game: &AbsorbingGame64) -> Self {
        GameFile::Absorbing {
            rows: game.g_matrix().rows(),
            cols: game.g_matrix().cols(),
            g: game.g_matrix().to_rows(),
            g_star: game.g_star_matrix().to_rows(),
            p_star: game.p_star_matrix().to_rows(),
        }
    }

    pub fn from_stochastic(game: &StochasticGame64) -> Self {
        let n = game.num_states();
        let transitions = (0..n)
            .map(|w| {
                let (r, c) = game.actions(w);
                (0..r * c).map(|k| game.transition(w, k / c, k % c).to_vec()).collect()
            })
            .collect();
        GameFile::Stochastic {
            states: game.names().to_vec(),
            absorbing_flags: game.absorbing_flags().to_vec(),
            payoff: (0..n).map(|w| game.payoff(w).to_rows()).collect(),
            transitions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use limtraj::scenarios::{big_match_game, two_state_game};

    #[test]
    fn round_trip_is_bit_exact() {
        let mut odd = big_match_game();
        odd = AbsorbingGame::new(
            odd.g_matrix().map(|v| v / 3.0 + 1e-17),
            odd.g_star_matrix().map(|v| v * 0.1),
            odd.p_star_matrix().map(|v| v * (2.0f64).sqrt() / 2.0),
        )
        .unwrap();
        let text = GameFile::from_absorbing(&odd).to_toml();
        let Game::Absorbing(back) = GameFile::parse(&text).unwrap().into_game().unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(back.g_matrix(), odd.g_matrix());
        assert_eq!(back.g_star_matrix(), odd.g_star_matrix());
        assert_eq!(back.p_star_matrix(), odd.p_star_matrix());

        let s = two_state_game();
        let file = GameFile::from_stochastic(&s);
        assert_eq!(GameFile::parse(&file.to_toml()).unwrap(), file);
    }

    #[test]
    fn errors_name_the_field() {
        let e = GameFile::parse("type = \"absorbing\"\nrows = 1\ncols = 1\ng = [[1.0]]\ng_star = [[1.0]]\n").unwrap_err();
        assert!(e.contains("p_star"), "{e}");
        let e = GameFile::parse(
            "type = \"absorbing\"\nrows = 1\ncols = 2\ng = [[1.0]]\ng_star = [[1.0]]\np_star = [[0.5]]\n",
        )
        .unwrap()
        .into_game()
        .unwrap_err();
        assert!(e.contains("`g`"), "{e}");
        let e = GameFile::parse("type = \"absorbing\"\nrows = \"x\"\n").unwrap_err();
        assert!(e.contains("line"), "{e}");
    }
}
