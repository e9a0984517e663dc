//! Synonyms the offline resolver uses to bridge everyday wording and
//! control names. Keys are matched against raw lowercase words and their
//! stems; expansions are stems.

/// `(word, [(expansion, weight)])`. Weights below 1 rank the expansion
/// behind a literal mention of the same control.
const SYNONYMS: &[(&str, &[(&str, f64)])] = &[
    ("erase", &[("delete", 0.9), ("cut", 0.85)]),
    ("remove", &[("delete", 0.9)]),
    ("trash", &[("delete", 0.9)]),
    ("discard", &[("delete", 0.9)]),
    ("highlight", &[("select", 0.5)]),
    ("mark", &[("select", 0.9)]),
    ("bigger", &[("grow", 0.9), ("increase", 0.9)]),
    ("larger", &[("grow", 0.9), ("increase", 0.9)]),
    ("enlarge", &[("grow", 0.9)]),
    ("increase", &[("grow", 0.9)]),
    ("smaller", &[("shrink", 0.9)]),
    ("decrease", &[("shrink", 0.9)]),
    ("reduce", &[("shrink", 0.9)]),
    ("create", &[("new", 0.9)]),
    ("make", &[("new", 0.8)]),
    ("launch", &[("open", 0.9)]),
    ("store", &[("save", 0.9)]),
    ("search", &[("find", 0.9)]),
    ("look", &[("find", 0.8)]),
    ("locate", &[("find", 0.9)]),
    ("substitute", &[("replace", 0.9)]),
    ("swap", &[("replace", 0.8)]),
    ("revert", &[("undo", 0.9)]),
    ("reverse", &[("undo", 0.8)]),
    ("duplicate", &[("copy", 0.9)]),
    ("strike", &[("strikethrough", 0.9)]),
    ("cross", &[("strikethrough", 0.9)]),
    ("embolden", &[("bold", 0.9)]),
    ("thick", &[("bold", 0.8)]),
    ("slant", &[("italic", 0.9)]),
    ("slanted", &[("italic", 0.9)]),
    ("underlined", &[("underline", 0.9)]),
    ("colour", &[("color", 1.0)]),
    ("typeface", &[("font", 0.9)]),
    ("centre", &[("center", 1.0)]),
    ("middle", &[("center", 0.8)]),
    ("magnify", &[("zoom", 0.9)]),
    ("spellcheck", &[("spelling", 0.9)]),
    ("spell", &[("spelling", 0.9)]),
    ("note", &[("comment", 0.8)]),
    ("compress", &[("zip", 0.9)]),
    ("archive", &[("zip", 0.8)]),
    ("mail", &[("email", 0.9)]),
    ("arrange", &[("sort", 0.9)]),
    ("order", &[("sort", 0.8)]),
    ("quit", &[("exit", 0.9)]),
    ("close", &[("exit", 0.8)]),
    ("sideway", &[("landscape", 0.8)]),
    ("image", &[("picture", 0.9)]),
    ("show", &[("display", 0.8)]),
];

/// Weighted expansions of one word, excluding the word itself.
pub fn expansions(word: &str) -> &'static [(&'static str, f64)] {
    let stem = crate::text::stem(word);
    SYNONYMS
        .iter()
        .find(|(key, _)| *key == word)
        .or_else(|| SYNONYMS.iter().find(|(key, _)| *key == stem))
        .map(|(_, exp)| *exp)
        .unwrap_or(&[])
}
