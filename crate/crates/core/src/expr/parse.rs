use super::{Expr, Func, Var};

/// Failure to turn text into an [`Expr`]. Offsets are byte offsets into the
/// input string.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                Some(*offset)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok<'a> {
    Num { value: f64, text: &'a str },
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Num { text, .. } => format!("number `{text}`"),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part: e, E, optionally signed, at least one digit
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{lit}`")))?;
                out.push((Tok::Num { value, text: lit }, start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(&text[start..i]), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok<'a> {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok<'a>, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        syntax(
            self.offset(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := ('-' | '+') unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    // power := primary ('^' integer)*
    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let at = self.offset();
            match self.bump().0 {
                Tok::Num { text, .. } if text.bytes().all(|b| b.is_ascii_digit()) => {
                    let n: u32 = text
                        .parse()
                        .map_err(|_| syntax(at, format!("exponent `{text}` too large")))?;
                    base = Expr::Pow(Box::new(base), n);
                }
                other => {
                    return Err(syntax(
                        at,
                        format!(
                            "exponent must be a nonnegative integer literal, found {}",
                            other.describe()
                        ),
                    ))
                }
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Expr::Const(value))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(var) = Var::from_name(name) {
                    return Ok(Expr::Var(var));
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(ParseError::UnknownIdentifier {
                        name: name.to_string(),
                        offset: at,
                    });
                };
                if *self.peek() != Tok::LParen {
                    return Err(self.unexpected(&format!("`(` after `{name}`")));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_close()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

/// Parses `text` into an expression tree.
///
/// Precedence from tightest: `^`, unary minus, `*` `/`, `+` `-`. Binary
/// operators associate to the left.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("-u^2").unwrap(),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Var(Var::U)), 2)))
        );
        // left associative subtraction and division
        let e = parse("u-v-x").unwrap();
        assert_eq!(
            e,
            Expr::Sub(
                Box::new(Expr::Sub(Box::new(Expr::Var(Var::U)), Box::new(Expr::Var(Var::V)))),
                Box::new(Expr::Var(Var::X))
            )
        );
        let e = parse("u/v*x").unwrap();
        assert!(matches!(e, Expr::Mul(ref a, _) if matches!(**a, Expr::Div(..))));
    }

    #[test]
    fn dangling_operator_reports_end_offset() {
        let err = parse("u +").unwrap_err();
        assert_eq!(err.offset(), Some(3));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn error_kinds() {
        assert_eq!(parse("   "), Err(ParseError::Empty));
        assert!(matches!(
            parse("u + w"),
            Err(ParseError::UnknownIdentifier { offset: 4, .. })
        ));
        assert!(matches!(parse("u^2.5"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("u^-1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("exp u"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("(u+v"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("u v"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("u # v"), Err(ParseError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse("2E2").unwrap(), Expr::Const(200.0));
        assert_eq!(parse(".5").unwrap(), Expr::Const(0.5));
    }
}
