use std::fmt;

/// A 1-based line/column position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub fn start() -> Self {
        Pos { line: 1, column: 1 }
    }

    pub(crate) fn advance(&mut self, c: char) {
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }

    /// Re-bases a position relative to a substring that starts at `origin`.
    pub(crate) fn offset_by(self, origin: Pos) -> Pos {
        if self.line == 1 {
            Pos {
                line: origin.line,
                column: origin.column + self.column - 1,
            }
        } else {
            Pos {
                line: origin.line + self.line - 1,
                column: self.column,
            }
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }

    pub(crate) fn offset_by(self, origin: Pos) -> Self {
        SyntaxError {
            pos: self.pos.offset_by(origin),
            message: self.message,
        }
    }
}
