//! Line-oriented model format.
//!
//! ```text
//! mdp
//! states: 2
//! init: 0
//! # <state> <label> <reward> -> <succ>:<prob> ...
//! 0 a 0 -> 0:0.9 1:1/10
//! 0 b 9 -> 0:1
//! 1 a 10 -> 1:1
//! 1 b 0 -> 0:1
//! ```
//!
//! `#` starts a comment, blank lines are ignored, probabilities and rewards are
//! decimals or `p/q` fractions. Values are kept exact in [`ModelDocument`].

use std::fmt::{self, Write as _};

use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::exact::{parse_rational, to_f64};
use crate::mdp::{ActionEntry, Mdp, ModelError, StateId, SUM_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}{}", if token.is_empty() { String::new() } else { format!(" (at `{token}`)") })]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// 1-based character column.
    pub column: usize,
    pub message: String,
    pub token: String,
}

/// Every error found in one input, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

impl ParseErrors {
    pub fn iter(&self) -> std::slice::Iter<'_, ParseError> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLine {
    pub state: StateId,
    pub label: String,
    pub reward: BigRational,
    pub successors: Vec<(StateId, BigRational)>,
}

/// Parsed model file with exact numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub states: usize,
    pub initial: StateId,
    pub transitions: Vec<TransitionLine>,
    pub comments: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("distribution of state {state}, action `{label}` sums to {sum}, not exactly 1")]
    InexactSum { state: StateId, label: String, sum: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ModelDocument {
    fn grouped<W: Clone>(&self, convert: impl Fn(&BigRational) -> W) -> Vec<Vec<ActionEntry<W>>> {
        let mut actions: Vec<Vec<ActionEntry<W>>> = vec![Vec::new(); self.states];
        for t in &self.transitions {
            actions[t.state].push(ActionEntry::new(
                t.label.clone(),
                convert(&t.reward),
                t.successors.iter().map(|(s, p)| (*s, convert(p))).collect(),
            ));
        }
        actions
    }

    pub fn to_mdp(&self) -> Mdp<f64> {
        Mdp::new(self.initial, self.grouped(to_f64))
    }

    /// Exact model; fails if some distribution only sums to one within tolerance.
    pub fn to_exact_mdp(&self) -> Result<Mdp<BigRational>, DocumentError> {
        for t in &self.transitions {
            let sum: BigRational = t.successors.iter().map(|(_, p)| p.clone()).sum();
            if !sum.is_one() {
                return Err(DocumentError::InexactSum {
                    state: t.state,
                    label: t.label.clone(),
                    sum: sum.to_string(),
                });
            }
        }
        Ok(Mdp::checked(self.initial, self.grouped(Clone::clone))?)
    }
}

impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.comments {
            writeln!(f, "#{c}")?;
        }
        writeln!(f, "mdp\nstates: {}\ninit: {}", self.states, self.initial)?;
        for t in &self.transitions {
            write!(f, "{} {} {} ->", t.state, t.label, t.reward)?;
            for (s, p) in &t.successors {
                write!(f, " {s}:{p}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0;
    for (byte, ch) in line.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token {
                    text: &line[b..byte],
                    column: c,
                });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &line[b..],
            column: c,
        });
    }
    out
}

struct Parser {
    errors: Vec<ParseError>,
}

impl Parser {
    fn error(&mut self, line: usize, column: usize, message: impl Into<String>, token: &str) {
        self.errors.push(ParseError {
            line,
            column,
            message: message.into(),
            token: token.to_string(),
        });
    }

    fn header_value(&mut self, line: usize, tokens: &[Token<'_>], key: &str) -> Option<usize> {
        let joined: Vec<&str> = tokens.iter().map(|t| t.text).collect();
        let joined = joined.join(" ");
        let Some(rest) = joined.strip_prefix(key).and_then(|r| r.strip_prefix(':')) else {
            self.error(line, tokens[0].column, format!("expected `{key}: <int>`"), tokens[0].text);
            return None;
        };
        let rest = rest.trim();
        match rest.parse::<usize>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(line, tokens[0].column, format!("`{key}` needs a nonnegative integer"), rest);
                None
            }
        }
    }

    fn index(&mut self, line: usize, tok: &Token<'_>, states: usize, what: &str) -> Option<StateId> {
        match tok.text.parse::<usize>() {
            Ok(s) if s < states => Some(s),
            Ok(s) => {
                self.error(line, tok.column, format!("{what} {s} out of range (states: {states})"), tok.text);
                None
            }
            Err(_) => {
                self.error(line, tok.column, format!("expected {what} index"), tok.text);
                None
            }
        }
    }

    fn number(&mut self, line: usize, column: usize, text: &str, what: &str) -> Option<BigRational> {
        let v = parse_rational(text);
        if v.is_none() {
            self.error(line, column, format!("malformed {what}"), text);
        }
        v
    }

    fn transition(&mut self, line: usize, tokens: &[Token<'_>], states: usize, seen: &[Vec<String>]) -> Option<TransitionLine> {
        if tokens.len() < 5 || tokens[3].text != "->" {
            let at = tokens.get(3).unwrap_or(&tokens[tokens.len() - 1]);
            self.error(
                line,
                at.column,
                "expected `<state> <label> <reward> -> <succ>:<prob> ...`",
                at.text,
            );
            return None;
        }
        let before = self.errors.len();
        let state = self.index(line, &tokens[0], states, "state");
        let label = tokens[1].text.to_string();
        if let Some(s) = state {
            if seen[s].contains(&label) {
                self.error(line, tokens[1].column, format!("duplicate action label on state {s}"), &label);
            }
        }
        let reward = self.number(line, tokens[2].column, tokens[2].text, "reward");
        if let Some(r) = &reward {
            if r.is_negative() {
                self.error(line, tokens[2].column, format!("negative reward {}", tokens[2].text), tokens[2].text);
            }
        }
        let mut successors: Vec<(StateId, BigRational)> = Vec::new();
        for tok in &tokens[4..] {
            let Some((succ, prob)) = tok.text.split_once(':') else {
                self.error(line, tok.column, "expected `<succ>:<prob>`", tok.text);
                continue;
            };
            let succ_tok = Token {
                text: succ,
                column: tok.column,
            };
            let t = self.index(line, &succ_tok, states, "successor");
            let p = self.number(line, tok.column + succ.chars().count() + 1, prob, "probability");
            if let Some(p) = &p {
                if !p.is_positive() || *p > BigRational::one() {
                    self.error(line, tok.column, format!("probability {prob} outside (0, 1]"), tok.text);
                }
            }
            if let (Some(t), Some(p)) = (t, p) {
                if successors.iter().any(|(u, _)| *u == t) {
                    self.error(line, tok.column, format!("successor {t} listed twice"), tok.text);
                }
                successors.push((t, p));
            }
        }
        if self.errors.len() > before {
            return None;
        }
        let sum: BigRational = successors.iter().map(|(_, p)| p.clone()).sum();
        if (to_f64(&sum) - 1.0).abs() > SUM_TOLERANCE {
            self.error(line, tokens[4].column, format!("distribution sums to {}", to_f64(&sum)), tokens[4].text);
            return None;
        }
        Some(TransitionLine {
            state: state?,
            label,
            reward: reward?,
            successors,
        })
    }
}

/// Parses a model file, collecting every error found.
pub fn parse_document(text: &str) -> Result<ModelDocument, ParseErrors> {
    let mut p = Parser { errors: Vec::new() };
    let mut comments = Vec::new();
    let mut header: Vec<usize> = Vec::new();
    let mut states = None;
    let mut initial = None;
    let mut init_line = (1, 1);
    let mut states_line = 1;
    let mut transitions = Vec::new();
    let mut labels: Vec<Vec<String>> = Vec::new();
    // states named by some transition line, valid or not
    let mut mentioned: Vec<bool> = Vec::new();
    let mut last_line = 1;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = match raw.find('#') {
            Some(c) => {
                comments.push(raw[c + 1..].to_string());
                &raw[..c]
            }
            None => raw,
        };
        let tokens = tokenize(body);
        if tokens.is_empty() {
            continue;
        }
        match header.len() {
            0 => {
                if tokens.len() != 1 || tokens[0].text != "mdp" {
                    p.error(line, tokens[0].column, "expected `mdp` header", tokens[0].text);
                    return Err(ParseErrors(p.errors));
                }
                header.push(line);
            }
            1 => {
                states = p.header_value(line, &tokens, "states");
                states_line = line;
                header.push(line);
                match states {
                    Some(0) => p.error(line, tokens[0].column, "model needs at least one state", tokens[0].text),
                    Some(n) => {
                        labels = vec![Vec::new(); n];
                        mentioned = vec![false; n];
                    }
                    None => return Err(ParseErrors(p.errors)),
                }
            }
            2 => {
                initial = p.header_value(line, &tokens, "init");
                init_line = (line, tokens[0].column);
                header.push(line);
            }
            _ => {
                let Some(n) = states.filter(|&n| n > 0) else {
                    continue;
                };
                if let Some(m) = tokens[0].text.parse::<usize>().ok().and_then(|s| mentioned.get_mut(s)) {
                    *m = true;
                }
                if let Some(t) = p.transition(line, &tokens, n, &labels) {
                    labels[t.state].push(t.label.clone());
                    transitions.push(t);
                }
            }
        }
    }

    if header.len() < 3 {
        let expected = ["`mdp` header", "`states: <int>`", "`init: <int>`"][header.len()];
        p.error(last_line, 1, format!("missing {expected}"), "");
        return Err(ParseErrors(p.errors));
    }
    let n = states.unwrap_or(0);
    if let Some(init) = initial {
        if init >= n && n > 0 {
            p.error(init_line.0, init_line.1, format!("initial state {init} out of range (states: {n})"), "");
        }
    }
    for (s, &m) in mentioned.iter().enumerate() {
        if !m {
            p.error(states_line, 1, format!("state {s} has no transitions"), &s.to_string());
        }
    }
    if !p.errors.is_empty() {
        p.errors.sort_by_key(|e| (e.line, e.column));
        return Err(ParseErrors(p.errors));
    }
    Ok(ModelDocument {
        states: n,
        initial: initial.unwrap_or(0),
        transitions,
        comments,
    })
}

pub fn parse_model(text: &str) -> Result<Mdp<f64>, ParseErrors> {
    parse_document(text).map(|d| d.to_mdp())
}

pub fn parse_exact_model(text: &str) -> Result<Mdp<BigRational>, ParseErrors> {
    let doc = parse_document(text)?;
    doc.to_exact_mdp().map_err(|e| {
        ParseErrors(vec![ParseError {
            line: 1,
            column: 1,
            message: e.to_string(),
            token: String::new(),
        }])
    })
}

/// Writes `mdp` in the model format. Numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn serialize_model(mdp: &Mdp<f64>) -> String {
    serialize_with(mdp, |x, out| write!(out, "{x}"))
}

pub fn serialize_exact_model(mdp: &Mdp<BigRational>) -> String {
    serialize_with(mdp, |x, out| write!(out, "{x}"))
}

fn serialize_with<W: crate::mdp::Weight>(mdp: &Mdp<W>, num: impl Fn(&W, &mut String) -> fmt::Result) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mdp\nstates: {}\ninit: {}", mdp.num_states(), mdp.initial());
    for (s, _, e) in mdp.state_actions() {
        let _ = write!(out, "{s} {} ", e.label);
        let _ = num(&e.reward, &mut out);
        out.push_str(" ->");
        for (t, p) in &e.successors {
            let _ = write!(out, " {t}:");
            let _ = num(p, &mut out);
        }
        out.push('\n');
    }
    out
}

impl From<&Mdp<BigRational>> for ModelDocument {
    fn from(mdp: &Mdp<BigRational>) -> Self {
        ModelDocument {
            states: mdp.num_states(),
            initial: mdp.initial(),
            transitions: mdp
                .state_actions()
                .map(|(s, _, e)| TransitionLine {
                    state: s,
                    label: e.label.clone(),
                    reward: e.reward.clone(),
                    successors: e.successors.clone(),
                })
                .collect(),
            comments: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::random::{random_exact_mdp, random_mdp, RandomModelSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn errors(text: &str) -> Vec<ParseError> {
        parse_model(text).unwrap_err().0
    }

    #[test]
    fn parses_fixture() {
        let m = parse_model(fixtures::THREE_MEC_TEXT).unwrap();
        assert_eq!(m.num_states(), 6);
        assert_eq!(m.max_reward(), 20.0);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn parses_single_state() {
        let m = parse_model("mdp\nstates: 1\ninit: 0\n0 a 5 -> 0:1\n").unwrap();
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.action(0, 0).reward, 5.0);
        assert_eq!(m.action(0, 0).successors, vec![(0, 1.0)]);
    }

    #[test]
    fn short_distribution_is_rejected() {
        let errs = errors("mdp\nstates: 2\ninit: 0\n0 a 1 -> 0:0.3 1:0.3\n1 a 0 -> 1:1\n");
        assert_eq!(errs.len(), 1, "{errs:?}");
        assert_eq!(errs[0].message, "distribution sums to 0.6");
        assert_eq!(errs[0].line, 4);
        assert_eq!(errs[0].column, 10);
    }

    #[test]
    fn fractions_comments_and_crlf() {
        let text = "# header comment\r\nmdp\r\nstates: 2\r\n\r\ninit: 1 # trailing\r\n0 x 1/2 -> 0:1/3 1:2/3\r\n1 y 0.25 -> 1:1\r\n";
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.comments.len(), 2);
        let m = doc.to_mdp();
        assert_eq!(m.initial(), 1);
        assert_eq!(m.action(0, 0).reward, 0.5);
        assert_eq!(m.action(0, 0).successors[0], (0, 1.0 / 3.0));
        assert!(doc.to_exact_mdp().is_ok());
    }

    #[test]
    fn error_cases() {
        let cases = [
            ("states: 1\n", "expected `mdp` header"),
            ("mdp\nstates: 1\n", "missing `init: <int>`"),
            ("mdp\nstates: x\ninit: 0\n", "`states` needs a nonnegative integer"),
            ("mdp\nstates: 1\ninit: 0\n0 a 1 -> 0:1\n0 a 2 -> 0:1\n", "duplicate action label on state 0"),
            ("mdp\nstates: 2\ninit: 0\n0 a 1 -> 1:1\n", "state 1 has no transitions"),
            ("mdp\nstates: 1\ninit: 0\n0 a 1 -> 3:1\n", "successor 3 out of range (states: 1)"),
            ("mdp\nstates: 1\ninit: 0\n0 a 1 -> 0:1/2 0:1/2\n", "successor 0 listed twice"),
            ("mdp\nstates: 1\ninit: 0\n0 a -1 -> 0:1\n", "negative reward -1"),
            ("mdp\nstates: 1\ninit: 0\n0 a 1 0:1\n", "expected `<state> <label> <reward> -> <succ>:<prob> ...`"),
            ("mdp\nstates: 1\ninit: 0\n0 a q -> 0:1\n", "malformed reward"),
            ("mdp\nstates: 1\ninit: 0\n0 a 1 -> 0:1.5\n", "probability 1.5 outside (0, 1]"),
            ("mdp\nstates: 1\ninit: 4\n0 a 1 -> 0:1\n", "initial state 4 out of range (states: 1)"),
            ("", "missing `mdp` header"),
        ];
        for (text, message) in cases {
            let errs = errors(text);
            assert!(errs.iter().any(|e| e.message == message), "{text:?}: {errs:?}");
        }
    }

    #[test]
    fn several_errors_are_reported_together() {
        let errs = errors("mdp\nstates: 2\ninit: 0\n0 a -1 -> 0:1\n1 a 1 -> 5:1\n");
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert_eq!((errs[0].line, errs[1].line), (4, 5));
        assert_eq!(errs[1].token, "5");
    }

    #[test]
    fn fixture_serializes_to_one_line_per_action() {
        let text = serialize_model(&fixtures::three_mec());
        assert_eq!(text.lines().filter(|l| l.contains("->")).count(), 8);
        let single = Mdp::new(0, vec![vec![ActionEntry::new("a", 5.0, vec![(0, 1.0)])]]);
        assert_eq!(serialize_model(&single), "mdp\nstates: 1\ninit: 0\n0 a 5 -> 0:1\n");
    }

    #[test]
    fn random_models_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = RandomModelSpec::default();
        for _ in 0..100 {
            let m = random_mdp(&mut rng, &spec);
            assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
            let e = random_exact_mdp(&mut rng, &spec);
            assert_eq!(parse_exact_model(&serialize_exact_model(&e)).unwrap(), e);
            let doc = ModelDocument::from(&e);
            assert_eq!(parse_document(&doc.to_string()).unwrap(), doc);
        }
    }

    proptest! {
        #[test]
        fn parser_never_accepts_invalid_models(
            reward in -3i32..5,
            p in 0u32..12,
            q in 1u32..12,
            succ in 0usize..3,
        ) {
            let text = format!("mdp\nstates: 2\ninit: 0\n0 a {reward} -> {succ}:{p}/{q}\n1 a 0 -> 1:1\n");
            if let Ok(m) = parse_model(&text) {
                prop_assert!(m.validate().is_empty());
            }
        }
    }
}
