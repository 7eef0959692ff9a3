use super::ParseError;

pub const DEFAULT_LANGUAGE: &str = "python";

const FENCE: &str = "```";

/// Contents of every fenced block tagged `language`, in order.
///
/// Fence lines are excluded and the inner text is returned byte for byte.
/// Blocks with other info strings are skipped.
pub fn extract_code_blocks(text: &str, language: &str) -> Result<Vec<String>, ParseError> {
    let mut blocks = Vec::new();
    let mut open: Option<(bool, usize, bool, String)> = None;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        match &mut open {
            None => {
                if let Some(info) = trimmed.strip_prefix(FENCE) {
                    open = Some((info.trim() == language, lineno + 1, line.ends_with("\r\n"), String::new()));
                }
            }
            Some((wanted, _, crlf, body)) => {
                if trimmed == FENCE {
                    if *wanted {
                        if body.ends_with('\n') {
                            body.pop();
                            if *crlf && body.ends_with('\r') {
                                body.pop();
                            }
                        }
                        blocks.push(std::mem::take(body));
                    }
                    open = None;
                } else {
                    body.push_str(line);
                }
            }
        }
    }
    match open {
        Some((true, line, _, _)) => Err(ParseError::UnterminatedFence(format!(
            "the ```{language} block opened on line {line} has no closing ``` line"
        ))),
        _ => Ok(blocks),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        assert_eq!(
            extract_code_blocks("a\n```python\nx=1\n```\nb", "python").unwrap(),
            vec!["x=1"]
        );
    }

    #[test]
    fn blocks_in_order_and_others_skipped() {
        let text = "```python\na=1\n```\n```text\nnot code\n```\nmid\n```python\nb=2\nc=3\n```";
        assert_eq!(extract_code_blocks(text, "python").unwrap(), vec!["a=1", "b=2\nc=3"]);
    }

    #[test]
    fn unterminated_block() {
        assert!(matches!(
            extract_code_blocks("```python\nx=1", "python"),
            Err(ParseError::UnterminatedFence(_))
        ));
    }

    #[test]
    fn indentation_is_preserved() {
        let text = "```python\nfor i in range(3):\n    print(i)\n```\n";
        assert_eq!(
            extract_code_blocks(text, "python").unwrap(),
            vec!["for i in range(3):\n    print(i)"]
        );
    }

    #[test]
    fn crlf_fences() {
        let text = "```python\r\nx=1\r\n```\r\n";
        assert_eq!(extract_code_blocks(text, "python").unwrap(), vec!["x=1"]);
    }
}
