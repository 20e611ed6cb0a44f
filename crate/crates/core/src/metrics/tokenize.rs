use crate::ByteSpan;

/// Splits code into tokens: identifier/number runs, string and character literals
/// (one token each, escapes honoured), and single punctuation characters.
/// Whitespace separates tokens and is dropped.
pub fn tokenize_code(text: &str) -> Vec<String> {
    token_spans(text)
        .into_iter()
        .map(|s| s.slice(text).to_string())
        .collect()
}

pub fn token_count(text: &str) -> usize {
    token_spans(text).len()
}

pub fn token_spans(text: &str) -> Vec<ByteSpan> {
    let mut out = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some((start, c)) = iter.next() {
        if c.is_whitespace() {
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut end = start + c.len_utf8();
            while let Some(&(i, n)) = iter.peek() {
                if n.is_alphanumeric() || n == '_' {
                    end = i + n.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            out.push(ByteSpan::new(start, end));
        } else if matches!(c, '"' | '\'' | '`') {
            let mut end = start + 1;
            let mut escaped = false;
            for (i, n) in iter.by_ref() {
                end = i + n.len_utf8();
                if c != '`' && n == '\n' {
                    // unterminated literal: stop at the line end
                    break;
                }
                if escaped {
                    escaped = false;
                } else if n == '\\' && c != '`' {
                    escaped = true;
                } else if n == c {
                    break;
                }
            }
            out.push(ByteSpan::new(start, end));
        } else {
            out.push(ByteSpan::new(start, start + c.len_utf8()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_punctuation() {
        assert_eq!(
            tokenize_code("a := b.C(1)"),
            vec!["a", ":", "=", "b", ".", "C", "(", "1", ")"]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize_code("").is_empty());
        assert!(tokenize_code(" \n\t").is_empty());
    }

    #[test]
    fn string_literals_stay_whole() {
        assert_eq!(
            tokenize_code(r#"c.JSON(200, "hello big \"world\"")"#),
            vec![
                "c",
                ".",
                "JSON",
                "(",
                "200",
                ",",
                r#""hello big \"world\"""#,
                ")"
            ]
        );
        assert_eq!(
            tokenize_code("x := `a b\nc`"),
            vec!["x", ":", "=", "`a b\nc`"]
        );
        assert_eq!(tokenize_code("'a' ' '"), vec!["'a'", "' '"]);
    }

    #[test]
    fn unterminated_literal_stops_at_newline() {
        assert_eq!(tokenize_code("\"abc\nx"), vec!["\"abc\n", "x"]);
    }
}
