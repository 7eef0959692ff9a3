use std::fmt::Write;

use super::{GripperMode, ParseError};
use crate::geometry::{GripperCommand, Pose, Step, Trajectory};

pub const OPEN_TAG: &str = "<trajectory>";
pub const CLOSE_TAG: &str = "</trajectory>";

const FORBIDDEN: &[&str] = &["def", "lambda"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Comma,
    Num(String),
    Word(String),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_whitespace() => i += 1,
            '[' => {
                out.push((start, Tok::Open));
                i += 1;
            }
            ']' => {
                out.push((start, Tok::Close));
                i += 1;
            }
            ',' => {
                out.push((start, Tok::Comma));
                i += 1;
            }
            c if c.is_ascii_digit() || matches!(c, '-' | '+' | '.') => {
                i += 1;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    let exp_sign = matches!(d, '-' | '+') && matches!(bytes[i - 1] as char, 'e' | 'E');
                    if d.is_ascii_alphanumeric() || d == '.' || d == '_' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push((start, Tok::Num(src[start..i].to_string())));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = src[start..i].to_string();
                // optional call parentheses after a gripper token
                let rest = &src[i..];
                let trimmed = rest.trim_start();
                if let Some(after) = trimmed.strip_prefix('(') {
                    let after = after.trim_start();
                    if after.starts_with(')') {
                        i = src.len() - after.len() + 1;
                    }
                }
                out.push((start, Tok::Word(word)));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax(start, format!("unexpected character {ch:?}")));
            }
        }
    }
    Ok(out)
}

fn number(row: usize, s: &str) -> Result<f64, ParseError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && !s.contains(['i', 'I', 'n', 'N']) => Ok(v),
        _ => Err(ParseError::BadNumber(row, s.to_string())),
    }
}

/// Parses the last `<trajectory>…</trajectory>` block in `text`.
///
/// Explicit mode takes `[x, y, z, yaw]` rows, optionally interleaved with
/// `open_gripper` / `close_gripper` tokens; binary mode takes
/// `[x, y, z, yaw, g]` rows where `g = 1` closes the gripper.
pub fn parse_numeric_trajectory(text: &str, mode: GripperMode) -> Result<Trajectory, ParseError> {
    let end = text.rfind(CLOSE_TAG).ok_or(ParseError::MissingTags)?;
    let start = text[..end].rfind(OPEN_TAG).ok_or(ParseError::MissingTags)? + OPEN_TAG.len();
    let body = &text[start..end];

    for tok in tokenize_words(body) {
        if FORBIDDEN.contains(&tok) {
            return Err(ParseError::ForbiddenCode(tok.to_string()));
        }
    }

    let toks = tokenize(body)?;
    let mut it = toks.into_iter().peekable();
    match it.next() {
        Some((_, Tok::Open)) => {}
        Some((p, t)) => return Err(ParseError::Syntax(p, format!("expected '[', found {}", describe(&t)))),
        None => return Err(ParseError::Empty),
    }
    let arity = match mode {
        GripperMode::Explicit => 4,
        GripperMode::Binary => 5,
    };
    let mut steps = Vec::new();
    let mut row = 0usize;
    loop {
        match it.next() {
            Some((_, Tok::Close)) => break,
            Some((_, Tok::Open)) => {
                let mut vals = Vec::with_capacity(arity);
                loop {
                    match it.next() {
                        Some((_, Tok::Num(s))) => vals.push(number(row, &s)?),
                        Some((_, Tok::Word(w))) => return Err(ParseError::BadNumber(row, w)),
                        Some((p, t)) => {
                            return Err(ParseError::Syntax(p, format!("expected a number, found {}", describe(&t))))
                        }
                        None => return Err(ParseError::Syntax(body.len(), "unclosed row".into())),
                    }
                    match it.next() {
                        Some((_, Tok::Comma)) => {
                            if matches!(it.peek(), Some((_, Tok::Close))) {
                                it.next();
                                break;
                            }
                        }
                        Some((_, Tok::Close)) => break,
                        Some((p, t)) => {
                            return Err(ParseError::Syntax(p, format!("expected ',' or ']', found {}", describe(&t))))
                        }
                        None => return Err(ParseError::Syntax(body.len(), "unclosed row".into())),
                    }
                }
                if vals.len() != arity {
                    return Err(ParseError::BadArity(row, arity, vals.len()));
                }
                let pose = Pose::new(vals[0], vals[1], vals[2], vals[3]);
                let step = if mode == GripperMode::Binary {
                    let g = vals[4];
                    if g != 0.0 && g != 1.0 {
                        return Err(ParseError::BadNumber(row, format!("{g} (gripper flag must be 0 or 1)")));
                    }
                    Step::MoveThen(pose, GripperCommand::from_flag(g == 1.0))
                } else {
                    Step::Move(pose)
                };
                steps.push(step);
                row += 1;
            }
            Some((p, Tok::Word(w))) => {
                let cmd = match (mode, w.as_str()) {
                    (GripperMode::Explicit, "open_gripper") => GripperCommand::Open,
                    (GripperMode::Explicit, "close_gripper") => GripperCommand::Close,
                    _ => return Err(ParseError::Syntax(p, format!("unexpected word `{w}`"))),
                };
                steps.push(Step::Gripper(cmd));
            }
            Some((p, t)) => {
                return Err(ParseError::Syntax(p, format!("expected a row, found {}", describe(&t))))
            }
            None => return Err(ParseError::Syntax(body.len(), "missing closing ']'".into())),
        }
        match it.next() {
            Some((_, Tok::Comma)) => {
                if matches!(it.peek(), Some((_, Tok::Close))) {
                    it.next();
                    break;
                }
            }
            Some((_, Tok::Close)) => break,
            Some((p, t)) => {
                return Err(ParseError::Syntax(p, format!("expected ',' or ']', found {}", describe(&t))))
            }
            None => return Err(ParseError::Syntax(body.len(), "missing closing ']'".into())),
        }
    }
    if let Some((p, t)) = it.next() {
        return Err(ParseError::Syntax(p, format!("unexpected {} after the list", describe(&t))));
    }
    if steps.iter().all(|s| s.pose().is_none()) {
        return Err(ParseError::Empty);
    }
    Ok(Trajectory::new(steps))
}

fn tokenize_words(body: &str) -> impl Iterator<Item = &str> {
    body.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty())
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Open => "'['".into(),
        Tok::Close => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Num(s) | Tok::Word(s) => format!("`{s}`"),
    }
}

/// Renders a trajectory in the tagged form accepted by [`parse_numeric_trajectory`].
pub fn format_trajectory(t: &Trajectory) -> String {
    let mut out = String::from(OPEN_TAG);
    out.push('[');
    for (i, step) in t.steps.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match step {
            Step::Move(p) => {
                let _ = write!(out, "[{}, {}, {}, {}]", p.x, p.y, p.z, p.yaw);
            }
            Step::MoveThen(p, g) => {
                let _ = write!(out, "[{}, {}, {}, {}, {}]", p.x, p.y, p.z, p.yaw, u8::from(g.is_close()));
            }
            Step::Gripper(GripperCommand::Open) => out.push_str("open_gripper"),
            Step::Gripper(GripperCommand::Close) => out.push_str("close_gripper"),
        }
    }
    out.push(']');
    out.push_str(CLOSE_TAG);
    out
}
