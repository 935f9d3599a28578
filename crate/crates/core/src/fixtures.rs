//! Small hand-built models used throughout the tests, the CLI and the benches.

use crate::mdp::{ActionEntry, Mdp};

/// Six states, three MECs (`{1}`, `{2,3}`, `{4,5}`), transient initial state 0.
/// Optimal gain `1001/200`: MEC gains are 4, 5 and 10.
pub const THREE_MEC_TEXT: &str = "\
# three MECs: {1} gain 4, {2,3} gain 5, {4,5} gain 10; state 0 is transient
mdp
states: 6
init: 0
0 a 0 -> 2:0.999 4:0.001
0 b 0 -> 1:1
1 a 4 -> 1:1
1 b 5 -> 3:1
2 a 10 -> 2:0.5 3:0.5
3 a 0 -> 2:0.5 3:0.5
4 a 20 -> 4:0.5 5:0.5
5 a 0 -> 4:0.5 5:0.5
";

pub fn three_mec() -> Mdp {
    Mdp::new(
        0,
        vec![
            vec![
                ActionEntry::new("a", 0.0, vec![(2, 0.999), (4, 0.001)]),
                ActionEntry::new("b", 0.0, vec![(1, 1.0)]),
            ],
            vec![
                ActionEntry::new("a", 4.0, vec![(1, 1.0)]),
                ActionEntry::new("b", 5.0, vec![(3, 1.0)]),
            ],
            vec![ActionEntry::new("a", 10.0, vec![(2, 0.5), (3, 0.5)])],
            vec![ActionEntry::new("a", 0.0, vec![(2, 0.5), (3, 0.5)])],
            vec![ActionEntry::new("a", 20.0, vec![(4, 0.5), (5, 0.5)])],
            vec![ActionEntry::new("a", 0.0, vec![(4, 0.5), (5, 0.5)])],
        ],
    )
}

/// Two-state model on which the difference-based stopping criteria fire after
/// two steps with value `0.9·alpha` although the optimal gain is `alpha`.
pub fn span_trap(alpha: f64) -> Mdp {
    Mdp::new(
        0,
        vec![
            vec![
                ActionEntry::new("a", 0.0, vec![(0, 0.9), (1, 0.1)]),
                ActionEntry::new("b", 0.9 * alpha, vec![(0, 1.0)]),
            ],
            vec![
                ActionEntry::new("a", alpha, vec![(1, 1.0)]),
                ActionEntry::new("b", 0.0, vec![(0, 1.0)]),
            ],
        ],
    )
}

/// Model text of [`span_trap`].
pub fn span_trap_text(alpha: f64) -> String {
    format!(
        "# span trap, alpha = {alpha}\nmdp\nstates: 2\ninit: 0\n\
         0 a 0 -> 0:0.9 1:0.1\n0 b {} -> 0:1\n1 a {alpha} -> 1:1\n1 b 0 -> 0:1\n",
        0.9 * alpha
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_model;

    #[test]
    fn texts_match_builders() {
        assert_eq!(parse_model(THREE_MEC_TEXT).unwrap(), three_mec());
        for alpha in [10.0, 100.0, 1000.0, 2.5] {
            assert_eq!(parse_model(&span_trap_text(alpha)).unwrap(), span_trap(alpha));
        }
    }
}
