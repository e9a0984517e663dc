//! Tokenization shared by curation, retrieval and the offline resolver.

/// Words that carry no intent on their own.
const STOPWORDS: &[&str] = &[
    "a", "an", "the", "to", "of", "and", "or", "in", "on", "for", "with", "my", "me", "this", "that", "it", "its",
    "is", "be", "please", "i", "want", "would", "like", "can", "you", "could", "some", "all", "by", "as", "at", "from",
    "so", "into", "up", "do", "now", "then",
];

/// Tokens that join two instructions in one utterance.
pub const COORDINATORS: &[&str] = &["and", "then"];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

/// Lowercased alphanumeric runs.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Suffix-stripping stemmer. Deliberately tiny: it only has to make plural
/// and participle forms of control names meet.
pub fn stem(token: &str) -> String {
    let t = token;
    let n = t.len();
    if !t.is_ascii() {
        return t.to_string();
    }
    if n > 4 && t.ends_with("ies") {
        return format!("{}y", &t[..n - 3]);
    }
    if n > 4 && t.ends_with("ied") {
        return format!("{}y", &t[..n - 3]);
    }
    if t.ends_with("sses") {
        return t[..n - 2].to_string();
    }
    if n > 5 && t.ends_with("ing") {
        return undouble(&t[..n - 3]);
    }
    if n > 4 && t.ends_with("ed") {
        return undouble(&t[..n - 2]);
    }
    if n > 3 && t.ends_with('s') && !t.ends_with("ss") && !t.ends_with("us") {
        return t[..n - 1].to_string();
    }
    t.to_string()
}

// "zipped" -> "zipp" -> "zip"
fn undouble(s: &str) -> String {
    let b = s.as_bytes();
    if b.len() >= 3 && b[b.len() - 1] == b[b.len() - 2] && !matches!(b[b.len() - 1], b'l' | b's' | b'z') {
        s[..s.len() - 1].to_string()
    } else {
        s.to_string()
    }
}

/// Stemmed tokens, stopwords kept.
pub fn stems(text: &str) -> Vec<String> {
    tokens(text).iter().map(|t| stem(t)).collect()
}

/// Stemmed tokens with stopwords removed.
pub fn content_stems(text: &str) -> Vec<String> {
    tokens(text)
        .iter()
        .filter(|t| !is_stopword(t))
        .map(|t| stem(t))
        .collect()
}

/// Two stems match when equal, or when the shorter (at least four letters)
/// is a prefix of the longer ("strike" / "strikethrough").
pub fn stems_match(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    short.len() >= 4 && long.starts_with(short)
}
