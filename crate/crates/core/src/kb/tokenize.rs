//! Tokenization shared by TF-IDF encoding and term comparison.

/// Split an alphanumeric word at CamelCase boundaries: `AVSession` -> `AV`, `Session`;
/// `getBatteryLevel` -> `get`, `Battery`, `Level`. Digits stay attached.
pub fn split_camel(word: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (pos, c) = chars[i];
        let prev = chars[i - 1].1;
        let next_lower = chars.get(i + 1).is_some_and(|(_, n)| n.is_lowercase());
        let boundary = c.is_uppercase()
            && (prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower));
        if boundary {
            parts.push(&word[start..pos]);
            start = pos;
        }
    }
    if start < word.len() {
        parts.push(&word[start..]);
    }
    parts
}

/// Lowercased tokens: split on non-alphanumerics, then on CamelCase boundaries.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .flat_map(split_camel)
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn camel_boundaries() {
        assert_eq!(split_camel("AVSession"), ["AV", "Session"]);
        assert_eq!(split_camel("getBatteryLevel"), ["get", "Battery", "Level"]);
        assert_eq!(split_camel("UIAbility"), ["UI", "Ability"]);
        assert_eq!(split_camel("RDBStore"), ["RDB", "Store"]);
        assert_eq!(split_camel("API9Level"), ["API9", "Level"]);
        assert_eq!(split_camel("media"), ["media"]);
        assert_eq!(split_camel("HTTP"), ["HTTP"]);
    }

    #[test]
    fn tokens() {
        assert_eq!(
            tokenize("Sets AVMetadata; STARTUP_HIDE."),
            ["sets", "av", "metadata", "startup", "hide"]
        );
        assert!(tokenize(" ,; ").is_empty());
    }
}
