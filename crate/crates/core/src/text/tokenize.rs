pub const HREF_TOKEN: &str = "href";
pub const REL_TOKEN: &str = "rel";

/// Splits `title . description` into lowercase tokens.
///
/// Leading and trailing punctuation characters become tokens of their own;
/// apostrophes and hyphens inside a word stay attached. Links (`scheme://…`,
/// `www.…`, `href=…`) collapse to `href` and `rel=…` attributes to `rel`.
pub fn tokenize(title: &str, description: &str) -> Vec<String> {
    let text = format!("{title} . {description}").to_lowercase();
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        push_word(word, &mut out);
    }
    out
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

fn is_url(s: &str) -> bool {
    if s.starts_with("www.") {
        return true;
    }
    match s.find("://") {
        Some(i) if i > 0 => s[..i]
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "+.-".contains(c)),
        _ => false,
    }
}

fn push_word(word: &str, out: &mut Vec<String>) {
    let start = word.find(|c: char| !is_punct(c)).unwrap_or(word.len());
    out.extend(word[..start].chars().map(String::from));
    let rest = &word[start..];
    if rest.is_empty() {
        return;
    }
    if rest.starts_with("href=") {
        out.push(HREF_TOKEN.into());
        return;
    }
    if rest.starts_with("rel=") {
        out.push(REL_TOKEN.into());
        return;
    }
    if is_url(rest) {
        // a link may legitimately end in '/', so only sentence punctuation
        // is split off behind it
        let core = rest.trim_end_matches(|c: char| ".,!?;:)]}\"'".contains(c));
        out.push(HREF_TOKEN.into());
        out.extend(rest[core.len()..].chars().map(String::from));
        return;
    }
    let core = rest.trim_end_matches(is_punct);
    out.push(core.to_string());
    out.extend(rest[core.len()..].chars().map(String::from));
}
