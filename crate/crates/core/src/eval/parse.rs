use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Result of reading a model's free-text reply against the option list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParsedAnswer {
    Index(usize),
    Unparseable,
}

impl ParsedAnswer {
    pub fn index(self) -> Option<usize> {
        match self {
            Self::Index(i) => Some(i),
            Self::Unparseable => None,
        }
    }
}

static LEADING_LETTER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\(?([A-Za-z])(?:[).:]|\s|$)").expect("valid regex"));
static ANSWER_IS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\banswer\s*(?:is\s*:?|:)\s*\(?([a-z])(?:[).:,;!?]|\s|$)").expect("valid regex"));

fn letter_index(c: char, n_options: usize) -> Option<usize> {
    let i = (c.to_ascii_uppercase() as u8).checked_sub(b'A')? as usize;
    (i < n_options).then_some(i)
}

/// Maps raw model output to an option index.
///
/// Rules, first match wins:
/// 1. a leading option letter, optionally parenthesised, followed by `)`,
///    `.`, `:`, whitespace or the end of the text;
/// 2. `answer is X` or `answer: X` anywhere in the text;
/// 3. the whole trimmed text equals an option, ignoring case;
/// 4. exactly one option occurs as a case-insensitive substring.
///
/// Letters outside the option range never match.
pub fn parse_answer(raw: &str, options: &[String]) -> ParsedAnswer {
    let n = options.len();
    let text = raw.trim();

    if let Some(i) = LEADING_LETTER
        .captures(text)
        .and_then(|c| c[1].chars().next())
        .and_then(|c| letter_index(c, n))
    {
        return ParsedAnswer::Index(i);
    }

    if let Some(i) = ANSWER_IS
        .captures_iter(text)
        .find_map(|c| c[1].chars().next().and_then(|ch| letter_index(ch, n)))
    {
        return ParsedAnswer::Index(i);
    }

    let lower = text.to_lowercase();
    let lowered: Vec<String> = options.iter().map(|o| o.trim().to_lowercase()).collect();
    if let Some(i) = lowered.iter().position(|o| *o == lower) {
        return ParsedAnswer::Index(i);
    }

    let mut hits = lowered
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.is_empty() && lower.contains(o.as_str()));
    match (hits.next(), hits.next()) {
        (Some((i, _)), None) => ParsedAnswer::Index(i),
        _ => ParsedAnswer::Unparseable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn documented_examples() {
        let four = opts(&["w", "x", "y", "z"]);
        assert_eq!(parse_answer("B", &four), ParsedAnswer::Index(1));
        assert_eq!(parse_answer("The answer is (C).", &four), ParsedAnswer::Index(2));
        let ba = opts(&["before", "after"]);
        assert_eq!(parse_answer("before", &ba), ParsedAnswer::Index(0));
        assert_eq!(
            parse_answer("it happens before and after", &ba),
            ParsedAnswer::Unparseable
        );
    }

    #[test]
    fn out_of_range_letter_falls_through() {
        let ba = opts(&["before", "after"]);
        assert_eq!(parse_answer("D", &ba), ParsedAnswer::Unparseable);
        assert_eq!(parse_answer("D. after", &ba), ParsedAnswer::Index(1));
    }

    #[test]
    fn words_starting_with_letters_are_not_letters() {
        let ba = opts(&["before", "after"]);
        assert_eq!(parse_answer("after", &ba), ParsedAnswer::Index(1));
        assert_eq!(parse_answer("The answer is before", &ba), ParsedAnswer::Index(0));
    }

    proptest! {
        #[test]
        fn never_out_of_range(raw in "\\PC{0,30}", n in 1usize..6) {
            let options: Vec<String> = (0..n).map(|i| format!("option {i}")).collect();
            if let ParsedAnswer::Index(i) = parse_answer(&raw, &options) {
                prop_assert!(i < n);
            }
        }
    }
}
