//! Words in the abstract generators of `B_r`, their evaluation into the
//! concrete group, and the word-problem pipeline.
//!
//! The surface grammar (`parse`) supports inversion `'`, integer powers,
//! conjugation `a^b = b a b'`, and commutators `[a,b] = a' b' a b`. Towers of
//! exponents are read top to bottom, so `t^s^h2` means `t^(s^h2)`.
//!
//! The pipeline rewrites a flux-zero word into a product of compactly
//! supported factors, counting applications of the relation `sigma = [h_i,h_j]`
//! as area. The identity test then reduces to the finite exception table of
//! the factor product.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::autom::{AutError, EventuallyRigidAut, GeneratorKind, DEFAULT_CEILING};

/// Guard against expansions like `h2^999999999` blowing up memory.
const MAX_EXPANDED_LETTERS: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupWordError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("generator out of range at byte {offset}: {message}")]
    OutOfRange { offset: usize, message: String },
    #[error("exponent overflow at byte {offset}")]
    ExponentOverflow { offset: usize },
    #[error("word contains a rho letter; operation requires the pure subgroup alphabet")]
    RhoLetter,
    #[error("word has nonzero flux {0:?}")]
    NonzeroFlux(Vec<i64>),
    #[error(transparent)]
    Eval(#[from] AutError),
}

/// An abstract generator letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupLetter {
    /// Loop shift `h_i`.
    Shift(u32),
    Sigma,
    Tau,
    Eta,
    /// Adjacent transposition `s^i_j`.
    SAt {
        ray: u32,
        index: u32,
    },
    /// Loop flip `tau^i_j`.
    TauAt {
        ray: u32,
        position: u32,
    },
    /// End exchange `rho_{ij}`.
    Rho(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedLetter {
    pub letter: GroupLetter,
    pub inverse: bool,
}

impl SignedLetter {
    pub fn new(letter: GroupLetter) -> Self {
        SignedLetter {
            letter,
            inverse: false,
        }
    }

    pub fn inverted(self) -> Self {
        SignedLetter {
            letter: self.letter,
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for SignedLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.letter {
            GroupLetter::Shift(i) => write!(f, "h{i}")?,
            GroupLetter::Sigma => write!(f, "s")?,
            GroupLetter::Tau => write!(f, "t")?,
            GroupLetter::Eta => write!(f, "e")?,
            GroupLetter::SAt { ray, index } => write!(f, "s{ray}_{index}")?,
            GroupLetter::TauAt { ray, position } => write!(f, "t{ray}_{position}")?,
            GroupLetter::Rho(i, j) => {
                if i <= 9 && j <= 9 {
                    write!(f, "rho{i}{j}")?
                } else {
                    write!(f, "rho{i}_{j}")?
                }
            }
        }
        if self.inverse {
            write!(f, "'")?;
        }
        Ok(())
    }
}

/// A flat signed word over the abstract generators, tied to an ambient rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupWord {
    r: u32,
    letters: Vec<SignedLetter>,
}

impl GroupWord {
    pub fn empty(r: u32) -> Self {
        GroupWord {
            r,
            letters: Vec::new(),
        }
    }

    pub fn from_letters(r: u32, letters: Vec<SignedLetter>) -> Result<Self, GroupWordError> {
        for l in &letters {
            validate_letter(l.letter, r, 0)?;
        }
        Ok(GroupWord { r, letters })
    }

    pub fn single(r: u32, letter: GroupLetter) -> Result<Self, GroupWordError> {
        Self::from_letters(r, vec![SignedLetter::new(letter)])
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn letters(&self) -> &[SignedLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        assert_eq!(self.r, other.r, "mixing ambient ranks");
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GroupWord { r: self.r, letters }
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            r: self.r,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> GroupWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::new();
        for _ in 0..n.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        GroupWord { r: self.r, letters }
    }

    /// `self^by = by . self . by'` per the conjugation convention.
    pub fn conjugate(&self, by: &GroupWord) -> GroupWord {
        by.concat(self).concat(&by.inverse())
    }

    /// `[a, b] = a' b' a b`.
    pub fn commutator(a: &GroupWord, b: &GroupWord) -> GroupWord {
        a.inverse().concat(&b.inverse()).concat(a).concat(b)
    }

    /// Parses the surface grammar with rays restricted by `r`.
    pub fn parse(text: &str, r: u32) -> Result<GroupWord, GroupWordError> {
        let tokens = lex(text)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            r,
            text_len: text.len(),
        };
        let letters = parser.word()?;
        parser.expect_end()?;
        Ok(GroupWord { r, letters })
    }

    /// Evaluates the word in the concrete group, rightmost letter acting first.
    pub fn evaluate(&self) -> Result<EventuallyRigidAut, GroupWordError> {
        self.evaluate_with_ceiling(DEFAULT_CEILING)
    }

    pub fn evaluate_with_ceiling(
        &self,
        ceiling: u32,
    ) -> Result<EventuallyRigidAut, GroupWordError> {
        let mut out = EventuallyRigidAut::identity(self.r)?;
        for l in &self.letters {
            out = out.compose_with_ceiling(&letter_element(*l, self.r)?, ceiling)?;
        }
        Ok(out)
    }

    /// Signed shift-letter counts `(n_2, ..., n_r)`; the image of the word in
    /// the abelianized shift coordinates. Rejects rho letters.
    pub fn syntactic_flux(&self) -> Result<Vec<i64>, GroupWordError> {
        let mut flux = vec![0i64; (self.r - 1) as usize];
        for l in &self.letters {
            match l.letter {
                GroupLetter::Shift(i) => {
                    flux[(i - 2) as usize] += if l.inverse { -1 } else { 1 };
                }
                GroupLetter::Rho(..) => return Err(GroupWordError::RhoLetter),
                _ => {}
            }
        }
        Ok(flux)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The concrete element of one abstract letter.
pub fn letter_element(l: SignedLetter, r: u32) -> Result<EventuallyRigidAut, GroupWordError> {
    let kind = match l.letter {
        GroupLetter::Shift(i) => GeneratorKind::Shift(i),
        GroupLetter::Sigma => GeneratorKind::Sigma,
        GroupLetter::Tau => GeneratorKind::Tau,
        GroupLetter::Eta => GeneratorKind::Eta,
        GroupLetter::SAt { ray, index } => GeneratorKind::Transposition { ray, index },
        GroupLetter::TauAt { ray, position } => GeneratorKind::Flip { ray, position },
        GroupLetter::Rho(i, j) => GeneratorKind::RayExchange(i, j),
    };
    let elem = EventuallyRigidAut::make_generator(kind, r)?;
    Ok(if l.inverse { elem.invert() } else { elem })
}

fn validate_letter(letter: GroupLetter, r: u32, offset: usize) -> Result<(), GroupWordError> {
    let err = |message: String| GroupWordError::OutOfRange { offset, message };
    match letter {
        GroupLetter::Shift(i) if i < 2 || i > r => Err(err(format!("h{i} needs 2 <= {i} <= {r}"))),
        GroupLetter::SAt { ray, index } => {
            if ray < 1 || ray > r {
                Err(err(format!("s{ray}_{index} ray out of range 1..={r}")))
            } else if ray == 1 && index == 0 {
                Err(err("s1_0 is not a generator".into()))
            } else {
                Ok(())
            }
        }
        GroupLetter::TauAt { ray, position } => {
            if ray < 1 || ray > r || position < 1 {
                Err(err(format!("t{ray}_{position} out of range")))
            } else {
                Ok(())
            }
        }
        GroupLetter::Rho(i, j) => {
            if i < 1 || i > r || j < 1 || j > r || i == j {
                Err(err(format!("rho({i},{j}) out of range")))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Lexing and parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Letter(GroupLetter),
    Int(i64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Caret,
    Prime,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, GroupWordError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |offset: usize, message: &str| GroupWordError::Syntax {
        offset,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            '[' | ']' | '(' | ')' | ',' | '^' | '\'' => {
                out.push(Spanned {
                    tok: match c {
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '^' => Tok::Caret,
                        _ => Tok::Prime,
                    },
                    offset: start,
                });
                i += 1;
            }
            '-' | '0'..='9' => {
                let negative = c == '-';
                if negative {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(syntax(start, "expected digits after '-'"));
                    }
                }
                let (value, next) = read_int(bytes, i, start)?;
                i = next;
                out.push(Spanned {
                    tok: Tok::Int(if negative { -value } else { value }),
                    offset: start,
                });
            }
            'a'..='z' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_lowercase() {
                    j += 1;
                }
                let ident = &text[i..j];
                i = j;
                let letter = match ident {
                    "e" => GroupLetter::Eta,
                    "h" => {
                        let (v, next) = read_int(bytes, i, start)?;
                        i = next;
                        GroupLetter::Shift(
                            u32::try_from(v).map_err(|_| syntax(start, "index too large"))?,
                        )
                    }
                    "s" | "t" => {
                        if i < bytes.len() && bytes[i].is_ascii_digit() {
                            let (ray, next) = read_int(bytes, i, start)?;
                            i = next;
                            if i >= bytes.len() || bytes[i] != b'_' {
                                return Err(syntax(start, "expected '_' in indexed generator"));
                            }
                            i += 1;
                            let (idx, next) = read_int(bytes, i, start)?;
                            i = next;
                            let ray =
                                u32::try_from(ray).map_err(|_| syntax(start, "index too large"))?;
                            let idx =
                                u32::try_from(idx).map_err(|_| syntax(start, "index too large"))?;
                            if ident == "s" {
                                GroupLetter::SAt { ray, index: idx }
                            } else {
                                GroupLetter::TauAt { ray, position: idx }
                            }
                        } else if ident == "s" {
                            GroupLetter::Sigma
                        } else {
                            GroupLetter::Tau
                        }
                    }
                    "rho" => {
                        let (first, next) = read_int(bytes, i, start)?;
                        i = next;
                        if i < bytes.len() && bytes[i] == b'_' {
                            i += 1;
                            let (second, next) = read_int(bytes, i, start)?;
                            i = next;
                            rho_letter(first, second, start)?
                        } else {
                            let digits = first.to_string();
                            if digits.len() == 2 {
                                let mut ch = digits.chars();
                                let a = ch.next().unwrap().to_digit(10).unwrap();
                                let b = ch.next().unwrap().to_digit(10).unwrap();
                                GroupLetter::Rho(a, b)
                            } else {
                                return Err(syntax(
                                    start,
                                    "rho needs two single digits or '_'-separated indices",
                                ));
                            }
                        }
                    }
                    other => return Err(syntax(start, &format!("unknown generator `{other}`"))),
                };
                out.push(Spanned {
                    tok: Tok::Letter(letter),
                    offset: start,
                });
            }
            other => return Err(syntax(start, &format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn rho_letter(i: i64, j: i64, offset: usize) -> Result<GroupLetter, GroupWordError> {
    let conv = |v: i64| {
        u32::try_from(v).map_err(|_| GroupWordError::Syntax {
            offset,
            message: "index too large".into(),
        })
    };
    Ok(GroupLetter::Rho(conv(i)?, conv(j)?))
}

fn read_int(
    bytes: &[u8],
    mut i: usize,
    token_start: usize,
) -> Result<(i64, usize), GroupWordError> {
    let start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if start == i {
        return Err(GroupWordError::Syntax {
            offset: token_start,
            message: "expected digits".into(),
        });
    }
    let text = std::str::from_utf8(&bytes[start..i]).unwrap();
    let value = text
        .parse::<i64>()
        .map_err(|_| GroupWordError::ExponentOverflow {
            offset: token_start,
        })?;
    Ok((value, i))
}

/// Value in a tower of exponents: either an integer power or a conjugator word.
enum Exp {
    Int(i64),
    Word(Vec<SignedLetter>),
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    r: u32,
    text_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.text_len)
    }

    fn syntax(&self, message: &str) -> GroupWordError {
        GroupWordError::Syntax {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn word(&mut self) -> Result<Vec<SignedLetter>, GroupWordError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None | Some(Tok::RBracket) | Some(Tok::RParen) | Some(Tok::Comma) => break,
                _ => {
                    let term = self.term()?;
                    if out.len() + term.len() > MAX_EXPANDED_LETTERS {
                        return Err(GroupWordError::ExponentOverflow {
                            offset: self.offset(),
                        });
                    }
                    out.extend(term);
                }
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<Vec<SignedLetter>, GroupWordError> {
        let mut value = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Prime) => {
                    self.pos += 1;
                    value = invert_flat(&value);
                }
                Some(Tok::Caret) => {
                    // Collect the whole tower `^e1^e2...`; it reads top to
                    // bottom, so fold from the right.
                    let mut ops = Vec::new();
                    let mut offsets = Vec::new();
                    while self.peek() == Some(&Tok::Caret) {
                        self.pos += 1;
                        offsets.push(self.offset());
                        ops.push(self.exponent_operand()?);
                    }
                    let mut acc = ops.pop().unwrap();
                    let mut acc_offset = offsets.pop().unwrap();
                    while let Some(op) = ops.pop() {
                        let offset = offsets.pop().unwrap();
                        acc = apply_exp(op, acc, offset)?;
                        acc_offset = offset;
                    }
                    value = match acc {
                        Exp::Int(n) => power_flat(&value, n, acc_offset)?,
                        Exp::Word(c) => conjugate_flat(&value, &c),
                    };
                }
                _ => break,
            }
            if value.len() > MAX_EXPANDED_LETTERS {
                return Err(GroupWordError::ExponentOverflow {
                    offset: self.offset(),
                });
            }
        }
        Ok(value)
    }

    fn exponent_operand(&mut self) -> Result<Exp, GroupWordError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(Exp::Int(n))
            }
            _ => Ok(Exp::Word(self.atom()?)),
        }
    }

    fn atom(&mut self) -> Result<Vec<SignedLetter>, GroupWordError> {
        match self.peek().cloned() {
            Some(Tok::Letter(letter)) => {
                validate_letter(letter, self.r, self.offset())?;
                self.pos += 1;
                Ok(vec![SignedLetter::new(letter)])
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let a = self.word()?;
                if self.peek() != Some(&Tok::Comma) {
                    return Err(self.syntax("expected ',' in commutator"));
                }
                self.pos += 1;
                let b = self.word()?;
                if self.peek() != Some(&Tok::RBracket) {
                    return Err(self.syntax("expected ']'"));
                }
                self.pos += 1;
                let mut out = invert_flat(&a);
                out.extend(invert_flat(&b));
                out.extend(a);
                out.extend(b);
                Ok(out)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let w = self.word()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.syntax("expected a generator, '[' or '('")),
        }
    }

    fn expect_end(&self) -> Result<(), GroupWordError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.syntax("unexpected trailing input"))
        }
    }
}

fn invert_flat(letters: &[SignedLetter]) -> Vec<SignedLetter> {
    letters.iter().rev().map(|l| l.inverted()).collect()
}

fn conjugate_flat(letters: &[SignedLetter], by: &[SignedLetter]) -> Vec<SignedLetter> {
    let mut out = by.to_vec();
    out.extend_from_slice(letters);
    out.extend(invert_flat(by));
    out
}

fn power_flat(
    letters: &[SignedLetter],
    n: i64,
    offset: usize,
) -> Result<Vec<SignedLetter>, GroupWordError> {
    let total = letters.len().checked_mul(n.unsigned_abs() as usize);
    match total {
        Some(t) if t <= MAX_EXPANDED_LETTERS => {}
        _ => return Err(GroupWordError::ExponentOverflow { offset }),
    }
    let base = if n < 0 {
        invert_flat(letters)
    } else {
        letters.to_vec()
    };
    let mut out = Vec::new();
    for _ in 0..n.unsigned_abs() {
        out.extend_from_slice(&base);
    }
    Ok(out)
}

fn apply_exp(base: Exp, exp: Exp, offset: usize) -> Result<Exp, GroupWordError> {
    match (base, exp) {
        (Exp::Int(a), Exp::Int(b)) => {
            if !(0..=32).contains(&b) {
                return Err(GroupWordError::ExponentOverflow { offset });
            }
            let v = a
                .checked_pow(b as u32)
                .ok_or(GroupWordError::ExponentOverflow { offset })?;
            Ok(Exp::Int(v))
        }
        (Exp::Int(_), Exp::Word(_)) => Err(GroupWordError::Syntax {
            offset,
            message: "cannot conjugate an integer exponent".into(),
        }),
        (Exp::Word(w), Exp::Int(n)) => Ok(Exp::Word(power_flat(&w, n, offset)?)),
        (Exp::Word(w), Exp::Word(c)) => Ok(Exp::Word(conjugate_flat(&w, &c))),
    }
}

// ---------------------------------------------------------------------------
// Rewriting into compactly supported factors
// ---------------------------------------------------------------------------

/// One compactly supported factor: a conjugate of a non-shift generator by a
/// word in the shifts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactFactor {
    pub base: SignedLetter,
    pub conjugator: GroupWord,
}

impl CompactFactor {
    pub fn as_group_word(&self) -> GroupWord {
        let base = GroupWord {
            r: self.conjugator.r,
            letters: vec![self.base],
        };
        base.conjugate(&self.conjugator)
    }

    /// Letter count of the factor written out: conjugator, base, conjugator'.
    pub fn expanded_len(&self) -> usize {
        2 * self.conjugator.len() + 1
    }
}

/// Product of compact factors plus residual shift exponents `(n_2, ..., n_r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactFactorization {
    r: u32,
    pub factors: Vec<CompactFactor>,
    pub residual: Vec<i64>,
}

impl CompactFactorization {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn expanded_len(&self) -> usize {
        self.factors.iter().map(|f| f.expanded_len()).sum()
    }

    /// The whole factorization as one group word.
    pub fn as_group_word(&self) -> GroupWord {
        let mut out = GroupWord::empty(self.r);
        for f in &self.factors {
            out = out.concat(&f.as_group_word());
        }
        for (i, &n) in self.residual.iter().enumerate() {
            let h = GroupWord::single(self.r, GroupLetter::Shift(i as u32 + 2)).unwrap();
            out = out.concat(&h.pow(n));
        }
        out
    }

    pub fn evaluate_with_ceiling(
        &self,
        ceiling: u32,
    ) -> Result<EventuallyRigidAut, GroupWordError> {
        self.as_group_word().evaluate_with_ceiling(ceiling)
    }
}

/// Counters from one run of [`rewrite_to_compact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteStats {
    pub input_len: usize,
    pub expanded_len: usize,
    /// Number of shuffle-identity applications, each one use of the relation
    /// `sigma = [h_i, h_j]`.
    pub area: usize,
    /// Number of sigma factors spawned by shuffles.
    pub sigma_factors: usize,
}

/// Rewrites a flux-zero word as a product of compactly supported factors.
///
/// Non-shift letters are peeled off the front conjugated by the shift prefix
/// they sat behind; the remaining shift word is then sorted by ray with the
/// four shuffle identities, each crossing spawning one sigma conjugate. The
/// scan is left-to-right for determinism.
pub fn rewrite_to_compact(
    word: &GroupWord,
) -> Result<(CompactFactorization, RewriteStats), GroupWordError> {
    let flux = word.syntactic_flux()?;
    if flux.iter().any(|&v| v != 0) {
        return Err(GroupWordError::NonzeroFlux(flux));
    }
    let r = word.r;
    let mut factors: Vec<CompactFactor> = Vec::new();
    let mut shifts: Vec<SignedLetter> = Vec::new();
    for &l in &word.letters {
        match l.letter {
            GroupLetter::Shift(_) => shifts.push(l),
            GroupLetter::Rho(..) => unreachable!("flux check rejects rho letters"),
            _ => factors.push(CompactFactor {
                base: l,
                conjugator: GroupWord {
                    r,
                    letters: shifts.clone(),
                },
            }),
        }
    }

    let shift_ray = |l: &SignedLetter| match l.letter {
        GroupLetter::Shift(i) => i,
        _ => unreachable!(),
    };
    let mut area = 0usize;
    let mut sigma_factors = 0usize;
    let mut sorted: Vec<SignedLetter> = Vec::new();
    for c in shifts {
        sorted.push(c);
        let mut k = sorted.len() - 1;
        while k > 0 {
            let left = sorted[k - 1];
            let cur = sorted[k];
            let (lr, cr) = (shift_ray(&left), shift_ray(&cur));
            if lr > cr {
                // One application of sigma = [h_i, h_j]; the spawned sigma
                // conjugate commutes out past the prefix to join the factors.
                let mut conj = sorted[..k - 1].to_vec();
                match (left.inverse, cur.inverse) {
                    (true, true) => {}
                    (true, false) => conj.push(cur),
                    (false, true) => conj.push(left),
                    (false, false) => {
                        conj.push(left);
                        conj.push(cur);
                    }
                }
                factors.push(CompactFactor {
                    base: SignedLetter::new(GroupLetter::Sigma),
                    conjugator: GroupWord { r, letters: conj },
                });
                area += 1;
                sigma_factors += 1;
                sorted.swap(k - 1, k);
                k -= 1;
            } else if lr == cr && left.inverse != cur.inverse {
                sorted.remove(k);
                sorted.remove(k - 1);
                break;
            } else {
                break;
            }
        }
    }
    assert!(
        sorted.is_empty(),
        "flux-zero shift word must cancel completely after sorting"
    );

    let x = word.len();
    assert!(area <= x * x, "area bound x^2 violated: {area} > {}", x * x);
    assert!(sigma_factors <= x * x, "sigma factor bound x^2 violated");
    for f in &factors {
        debug_assert!(
            f.as_group_word()
                .syntactic_flux()
                .unwrap()
                .iter()
                .all(|&v| v == 0),
            "factors must be flux-zero"
        );
    }

    let factorization = CompactFactorization {
        r,
        factors,
        residual: vec![0; (r - 1) as usize],
    };
    let stats = RewriteStats {
        input_len: x,
        expanded_len: factorization.expanded_len(),
        area,
        sigma_factors,
    };
    Ok((factorization, stats))
}

/// Which pipeline stage decided a word-problem query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionStage {
    Flux,
    CompactCheck,
    DirectEvaluation,
}

impl fmt::Display for DecisionStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionStage::Flux => write!(f, "flux"),
            DecisionStage::CompactCheck => write!(f, "compact-check"),
            DecisionStage::DirectEvaluation => write!(f, "direct-evaluation"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrivialDecision {
    pub trivial: bool,
    pub stage: DecisionStage,
}

/// Decides whether the word evaluates to the identity: flux precheck, then
/// the compact rewriting, falling back to direct evaluation if the pipeline
/// cannot run (for example on rho letters).
pub fn decide_trivial(word: &GroupWord) -> Result<TrivialDecision, GroupWordError> {
    match word.syntactic_flux() {
        Ok(flux) if flux.iter().any(|&v| v != 0) => {
            return Ok(TrivialDecision {
                trivial: false,
                stage: DecisionStage::Flux,
            });
        }
        Ok(_) => {
            if let Ok((factorization, _)) = rewrite_to_compact(word) {
                if let Ok(product) = factorization.evaluate_with_ceiling(DEFAULT_CEILING) {
                    return Ok(TrivialDecision {
                        trivial: product.is_identity(),
                        stage: DecisionStage::CompactCheck,
                    });
                }
            }
        }
        Err(GroupWordError::RhoLetter) => {}
        Err(e) => return Err(e),
    }
    let elem = word.evaluate()?;
    Ok(TrivialDecision {
        trivial: elem.is_identity(),
        stage: DecisionStage::DirectEvaluation,
    })
}

pub fn is_trivial(word: &GroupWord) -> Result<bool, GroupWordError> {
    decide_trivial(word).map(|d| d.trivial)
}

// ---------------------------------------------------------------------------
// Growth measurement
// ---------------------------------------------------------------------------

/// One row of the growth table for input length `x`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GrowthRow {
    pub x: usize,
    pub samples: usize,
    pub max_expanded_len: usize,
    pub mean_expanded_len: f64,
    pub max_area: usize,
    /// `max_expanded_len / x^6`.
    pub len_ratio: f64,
    /// `max_area / x^2`.
    pub area_ratio: f64,
}

/// Uniform random word over the pure generating alphabet
/// `{h_2..h_r, sigma, tau, eta}^{+-1}`.
pub fn random_word<R: Rng>(r: u32, len: usize, rng: &mut R) -> GroupWord {
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let choice = rng.gen_range(0..r + 2);
        let letter = match choice {
            0 => GroupLetter::Sigma,
            1 => GroupLetter::Tau,
            2 => GroupLetter::Eta,
            i => GroupLetter::Shift(i - 1),
        };
        letters.push(SignedLetter {
            letter,
            inverse: rng.gen_bool(0.5),
        });
    }
    GroupWord { r, letters }
}

/// Random word of the given length with zero syntactic flux, by rejection.
pub fn random_flux_zero_word<R: Rng>(r: u32, len: usize, rng: &mut R) -> GroupWord {
    for _ in 0..100_000 {
        let w = random_word(r, len, rng);
        if w.syntactic_flux().unwrap().iter().all(|&v| v == 0) {
            return w;
        }
    }
    panic!("rejection sampling failed to find a flux-zero word of length {len}");
}

/// Generous sanity tripwire on rewritten length relative to `x^6`.
pub const GROWTH_TRIPWIRE: usize = 64;

/// Measures rewritten length and area on random flux-zero words of each
/// length up to `max_len`. Deterministic for a fixed seed.
pub fn measure_growth(samples: usize, max_len: usize, seed: u64) -> Vec<GrowthRow> {
    measure_growth_with_tripwire(samples, max_len, seed, GROWTH_TRIPWIRE)
}

pub fn measure_growth_with_tripwire(
    samples: usize,
    max_len: usize,
    seed: u64,
    tripwire: usize,
) -> Vec<GrowthRow> {
    assert!(max_len >= 2, "max_len must be at least 2");
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let r = 3;
    let mut rows = Vec::new();
    for x in 0..=max_len {
        let mut max_expanded = 0usize;
        let mut sum_expanded = 0usize;
        let mut max_area = 0usize;
        let n = if x == 0 { 1 } else { samples };
        for _ in 0..n {
            let w = if x == 0 {
                GroupWord::empty(r)
            } else {
                random_flux_zero_word(r, x, &mut rng)
            };
            let (_, stats) = rewrite_to_compact(&w).expect("flux-zero by construction");
            if x > 0 {
                assert!(
                    stats.expanded_len <= tripwire * x.pow(6),
                    "rewritten length {} blows past the {tripwire} x^6 tripwire at x = {x}",
                    stats.expanded_len
                );
            }
            max_expanded = max_expanded.max(stats.expanded_len);
            sum_expanded += stats.expanded_len;
            max_area = max_area.max(stats.area);
        }
        let ratio = |v: usize, d: f64| if x == 0 { 0.0 } else { v as f64 / d };
        rows.push(GrowthRow {
            x,
            samples: n,
            max_expanded_len: max_expanded,
            mean_expanded_len: if x == 0 {
                0.0
            } else {
                sum_expanded as f64 / n as f64
            },
            max_area,
            len_ratio: ratio(max_expanded, (x as f64).powi(6)),
            area_ratio: ratio(max_area, (x as f64).powi(2)),
        });
    }
    rows
}
