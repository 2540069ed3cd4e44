use super::{ParseErrors, SourceSpan, MAX_NESTING};

#[derive(Clone, Debug)]
pub(crate) enum SExpr {
    Atom(String, SourceSpan),
    List(Vec<SExpr>, SourceSpan),
}

impl SExpr {
    pub(crate) fn span(&self) -> SourceSpan {
        match self {
            SExpr::Atom(_, s) | SExpr::List(_, s) => *s,
        }
    }
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn span_here(&self) -> SourceSpan {
        SourceSpan { start: self.pos, end: self.pos, line: self.line, column: self.col }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Reads a sequence of top-level s-expressions. The reader is iterative so
/// deeply nested input cannot overflow the stack; nesting beyond
/// [`MAX_NESTING`] is an error.
pub(crate) fn read_all(text: &str) -> Result<Vec<SExpr>, ParseErrors> {
    let mut cur = Cursor { text, pos: 0, line: 1, col: 1 };
    // Each frame holds the open-paren span and the items read so far.
    let mut stack: Vec<(SourceSpan, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == ';' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let start = cur.span_here();
        if c == '(' {
            cur.bump();
            if stack.len() >= MAX_NESTING {
                return Err(ParseErrors::single(format!("nesting deeper than {MAX_NESTING} levels"), start));
            }
            stack.push((start, Vec::new()));
            continue;
        }
        if c == ')' {
            cur.bump();
            let Some((open, items)) = stack.pop() else {
                return Err(ParseErrors::single("unbalanced `)`", start));
            };
            let span = SourceSpan { end: cur.pos, ..open };
            let e = SExpr::List(items, span);
            match stack.last_mut() {
                Some((_, parent)) => parent.push(e),
                None => top.push(e),
            }
            continue;
        }
        if !is_atom_char(c) {
            let mut span = start;
            span.end = start.start + c.len_utf8();
            return Err(ParseErrors::single(format!("unexpected character {c:?}"), span));
        }
        while let Some(c) = cur.peek() {
            if !is_atom_char(c) {
                break;
            }
            cur.bump();
        }
        let span = SourceSpan { end: cur.pos, ..start };
        let e = SExpr::Atom(text[start.start..cur.pos].to_string(), span);
        match stack.last_mut() {
            Some((_, parent)) => parent.push(e),
            None => top.push(e),
        }
    }
    if let Some((open, _)) = stack.last() {
        return Err(ParseErrors::single("unclosed `(`", *open));
    }
    Ok(top)
}
