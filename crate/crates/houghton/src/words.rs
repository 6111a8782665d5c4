//! Free words over the indexed loop alphabet `a^i_j`.
//!
//! A [`Word`] is always freely reduced; the empty word is the identity.
//! The text grammar is one whitespace-separated token per letter,
//! `a<ray>_<position>` with a trailing `'` for the inverse, e.g. `a1_2' a1_1`.

use std::fmt;

use thiserror::Error;

/// Identifies the loop `a^i_j` by ray `i` and position `j`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorIndex {
    pub ray: u32,
    pub position: u32,
}

impl GeneratorIndex {
    pub fn new(ray: u32, position: u32) -> Self {
        assert!(ray >= 1 && position >= 1, "generator indices are 1-based");
        GeneratorIndex { ray, position }
    }
}

impl fmt::Display for GeneratorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}_{}", self.ray, self.position)
    }
}

/// A signed basis letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub index: GeneratorIndex,
    pub inverse: bool,
}

impl Letter {
    pub fn positive(index: GeneratorIndex) -> Self {
        Letter {
            index,
            inverse: false,
        }
    }

    pub fn negative(index: GeneratorIndex) -> Self {
        Letter {
            index,
            inverse: true,
        }
    }

    pub fn inverted(self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.index, if self.inverse { "'" } else { "" })
    }
}

/// A freely reduced word in the loop basis. Construction reduces eagerly,
/// so equality is structural comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Errors from the basis-word parser.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordParseError {
    #[error("syntax error at byte {offset}: bad token `{token}`")]
    Syntax { offset: usize, token: String },
    #[error("ray {ray} out of range 1..{r} at byte {offset}")]
    RayOutOfRange { offset: usize, ray: u32, r: u32 },
    #[error("position must be >= 1 at byte {offset}")]
    PositionOutOfRange { offset: usize },
}

impl Word {
    /// The empty word.
    pub fn identity() -> Self {
        Word {
            letters: Vec::new(),
        }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn free_reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for letter in letters {
            match stack.last() {
                Some(&top) if top.cancels(letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        Word { letters: stack }
    }

    pub fn from_letter(letter: Letter) -> Self {
        Word {
            letters: vec![letter],
        }
    }

    /// The single positive letter `a^x`.
    pub fn generator(index: GeneratorIndex) -> Self {
        Word::from_letter(Letter::positive(index))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Freely reduced concatenation `self . other`.
    pub fn concat(&self, other: &Word) -> Word {
        // Only the seam can cancel; both sides are already reduced.
        let mut stack = self.letters.clone();
        for &letter in &other.letters {
            match stack.last() {
                Some(&top) if top.cancels(letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        Word { letters: stack }
    }

    /// The group inverse: reversed letters, each inverted.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// True if the word is the single positive letter `a^x`.
    pub fn as_single_positive(&self) -> Option<GeneratorIndex> {
        match self.letters.as_slice() {
            [l] if !l.inverse => Some(l.index),
            _ => None,
        }
    }

    /// Largest position appearing in the word, 0 if empty.
    pub fn max_position(&self) -> u32 {
        self.letters
            .iter()
            .map(|l| l.index.position)
            .max()
            .unwrap_or(0)
    }

    /// Parses the basis-word grammar with rays restricted to `1..=r`.
    pub fn parse(text: &str, r: u32) -> Result<Word, WordParseError> {
        let mut letters = Vec::new();
        let mut rest = text;
        let mut offset = 0;
        loop {
            let trimmed = rest.trim_start();
            offset += rest.len() - trimmed.len();
            if trimmed.is_empty() {
                break;
            }
            let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
            let token = &trimmed[..end];
            letters.push(parse_token(token, offset, r)?);
            offset += end;
            rest = &trimmed[end..];
        }
        Ok(Word::free_reduce(letters))
    }
}

fn parse_token(token: &str, offset: usize, r: u32) -> Result<Letter, WordParseError> {
    let syntax = || WordParseError::Syntax {
        offset,
        token: token.to_string(),
    };
    let body = token.strip_prefix('a').ok_or_else(syntax)?;
    let (body, inverse) = match body.strip_suffix('\'') {
        Some(stripped) => (stripped, true),
        None => (body, false),
    };
    let (ray_str, pos_str) = body.split_once('_').ok_or_else(syntax)?;
    let ray: u32 = ray_str.parse().map_err(|_| syntax())?;
    let position: u32 = pos_str.parse().map_err(|_| syntax())?;
    if ray < 1 || ray > r {
        return Err(WordParseError::RayOutOfRange { offset, ray, r });
    }
    if position < 1 {
        return Err(WordParseError::PositionOutOfRange { offset });
    }
    Ok(Letter {
        index: GeneratorIndex { ray, position },
        inverse,
    })
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}
