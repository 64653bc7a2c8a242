//! Transform recipe strings.
//!
//! ```text
//! recipe  := wavmat | product | kron | blockdiag | similarity | adjoint
//! wavmat  := "wavmat(" filter "," "L=" int ["," "eps=" bits] ["," "shift=" int] ["," "n=" int] ")"
//! product := "product(" recipe ("," recipe)+ ")"
//! kron    := "kron(" recipe "," recipe ")"
//! blockdiag  := "blockdiag(" recipe ("," recipe)* ")"
//! similarity := "similarity(" recipe "," recipe ")"     // w^H a w
//! adjoint := "adjoint(" recipe ")"
//! ```
//!
//! Whitespace is ignored. `n=` pins a part's size; it is needed inside `kron`
//! and wherever `blockdiag` parts are not all the same size.

use std::fmt;
use std::str::FromStr;

use crate::composite;
use crate::error::{Error, Result};
use crate::filterbank::{get_filter, CATALOG};
use crate::scalar::Scalar;
use crate::wavmat::{build_wavmat, WaveletOperator};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipe {
    Wavmat {
        filter: String,
        levels: usize,
        eps: Option<Vec<u8>>,
        shift: Option<i64>,
        n: Option<usize>,
    },
    Product(Vec<Recipe>),
    Kron(Box<Recipe>, Box<Recipe>),
    BlockDiag(Vec<Recipe>),
    Similarity(Box<Recipe>, Box<Recipe>),
    Adjoint(Box<Recipe>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositeKind {
    Wavmat,
    Product,
    Kron,
    BlockDiag,
    Similarity,
    Adjoint,
}

pub fn parse_recipe(text: &str) -> Result<Recipe> {
    let chars: Vec<(usize, char)> = text
        .char_indices()
        .filter(|(_, c)| !c.is_whitespace())
        .collect();
    let mut p = Parser {
        chars,
        pos: 0,
        end: text.len(),
    };
    let r = p.recipe()?;
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(r)
}

impl FromStr for Recipe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_recipe(s)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|&(o, _)| o).unwrap_or(self.end)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        s
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    /// Consumes `,` or the `)` closing the paren opened at `open`; returns true on `)`.
    fn separator_or_close(&mut self, open: usize) -> Result<bool> {
        match self.peek() {
            Some(',') => {
                self.pos += 1;
                Ok(false)
            }
            Some(')') => {
                self.pos += 1;
                Ok(true)
            }
            Some(c) => Err(self.error(format!("expected `,` or `)`, found `{c}`"))),
            None => Err(Error::Syntax {
                pos: open,
                msg: "unclosed `(`".into(),
            }),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        let mut s = String::new();
        if self.peek() == Some('-') {
            s.push('-');
            self.pos += 1;
        }
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            s.push(c);
            self.pos += 1;
        }
        s.parse().map_err(|_| {
            self.pos = start;
            self.error("expected an integer")
        })
    }

    fn recipe(&mut self) -> Result<Recipe> {
        let name_at = self.offset();
        let name = self.ident();
        if name.is_empty() {
            return Err(self.error("expected a recipe name"));
        }
        let open = self.offset();
        self.expect('(')?;
        match name.as_str() {
            "wavmat" => self.wavmat(open),
            "product" | "blockdiag" => {
                let mut parts = Vec::new();
                loop {
                    parts.push(self.recipe()?);
                    if self.separator_or_close(open)? {
                        break;
                    }
                }
                if name == "product" {
                    if parts.len() < 2 {
                        return Err(Error::Syntax {
                            pos: name_at,
                            msg: "product needs at least two parts".into(),
                        });
                    }
                    Ok(Recipe::Product(parts))
                } else {
                    Ok(Recipe::BlockDiag(parts))
                }
            }
            "kron" | "similarity" => {
                let a = self.recipe()?;
                if self.separator_or_close(open)? {
                    return Err(Error::Syntax {
                        pos: name_at,
                        msg: format!("{name} needs exactly two parts"),
                    });
                }
                let b = self.recipe()?;
                if !self.separator_or_close(open)? {
                    return Err(self.error(format!("{name} takes exactly two parts")));
                }
                let (a, b) = (Box::new(a), Box::new(b));
                Ok(if name == "kron" {
                    Recipe::Kron(a, b)
                } else {
                    Recipe::Similarity(a, b)
                })
            }
            "adjoint" => {
                let a = self.recipe()?;
                if !self.separator_or_close(open)? {
                    return Err(self.error("adjoint takes one part"));
                }
                Ok(Recipe::Adjoint(Box::new(a)))
            }
            other => Err(Error::Syntax {
                pos: name_at,
                msg: format!("unknown recipe kind `{other}`"),
            }),
        }
    }

    fn wavmat(&mut self, open: usize) -> Result<Recipe> {
        let filter = self.ident();
        if filter.is_empty() {
            return Err(self.error("expected a filter name"));
        }
        if !CATALOG.contains(&filter.as_str()) {
            return Err(Error::UnknownFilter(filter));
        }
        let mut levels = None;
        let mut eps = None;
        let mut shift = None;
        let mut n = None;
        while !self.separator_or_close(open)? {
            let key_at = self.offset();
            let key = self.ident();
            self.expect('=')?;
            match key.as_str() {
                "L" => levels = Some(self.integer()?),
                "shift" => shift = Some(self.integer()?),
                "n" => n = Some(self.integer()?),
                "eps" => {
                    let mut bits = Vec::new();
                    while let Some(c) = self.peek().filter(|c| *c == '0' || *c == '1') {
                        bits.push(if c == '1' { 1 } else { 0 });
                        self.pos += 1;
                    }
                    if bits.is_empty() {
                        return Err(self.error("expected a bit string"));
                    }
                    eps = Some(bits);
                }
                _ => {
                    return Err(Error::Syntax {
                        pos: key_at,
                        msg: format!("unknown wavmat key `{key}`"),
                    })
                }
            }
        }
        let levels = match levels {
            Some(l) if l >= 1 => l as usize,
            Some(_) => return Err(Error::Syntax { pos: open, msg: "L must be positive".into() }),
            None => return Err(Error::Syntax { pos: open, msg: "wavmat needs L=".into() }),
        };
        let n = match n {
            Some(v) if v >= 1 => Some(v as usize),
            Some(_) => return Err(Error::Syntax { pos: open, msg: "n must be positive".into() }),
            None => None,
        };
        Ok(Recipe::Wavmat {
            filter,
            levels,
            eps,
            shift,
            n,
        })
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, parts: &[Recipe]) -> fmt::Result {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
            Ok(())
        }
        match self {
            Recipe::Wavmat {
                filter,
                levels,
                eps,
                shift,
                n,
            } => {
                write!(f, "wavmat({filter},L={levels}")?;
                if let Some(bits) = eps.as_ref().filter(|b| b.iter().any(|&x| x != 0)) {
                    f.write_str(",eps=")?;
                    for b in bits {
                        write!(f, "{b}")?;
                    }
                }
                if let Some(s) = shift.filter(|&s| s != 0) {
                    write!(f, ",shift={s}")?;
                }
                if let Some(n) = n {
                    write!(f, ",n={n}")?;
                }
                f.write_str(")")
            }
            Recipe::Product(parts) => {
                f.write_str("product(")?;
                list(f, parts)?;
                f.write_str(")")
            }
            Recipe::BlockDiag(parts) => {
                f.write_str("blockdiag(")?;
                list(f, parts)?;
                f.write_str(")")
            }
            Recipe::Kron(a, b) => write!(f, "kron({a},{b})"),
            Recipe::Similarity(a, b) => write!(f, "similarity({a},{b})"),
            Recipe::Adjoint(a) => write!(f, "adjoint({a})"),
        }
    }
}

impl Recipe {
    pub fn kind(&self) -> CompositeKind {
        match self {
            Recipe::Wavmat { .. } => CompositeKind::Wavmat,
            Recipe::Product(_) => CompositeKind::Product,
            Recipe::Kron(..) => CompositeKind::Kron,
            Recipe::BlockDiag(_) => CompositeKind::BlockDiag,
            Recipe::Similarity(..) => CompositeKind::Similarity,
            Recipe::Adjoint(_) => CompositeKind::Adjoint,
        }
    }

    /// Canonical text: whitespace removed, optional keys in fixed order, defaults dropped.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// Size implied by explicit `n=` annotations, if any.
    pub fn fixed_size(&self) -> Option<usize> {
        match self {
            Recipe::Wavmat { n, .. } => *n,
            Recipe::Product(parts) => parts.iter().find_map(Recipe::fixed_size),
            Recipe::Similarity(a, b) => a.fixed_size().or_else(|| b.fixed_size()),
            Recipe::Adjoint(a) => a.fixed_size(),
            Recipe::Kron(a, b) => Some(a.fixed_size()? * b.fixed_size()?),
            Recipe::BlockDiag(parts) => parts.iter().map(Recipe::fixed_size).sum(),
        }
    }

    /// Builds the operator at size `n`. The operator's `recipe` is the canonical text.
    pub fn build<T: Scalar>(&self, n: usize) -> Result<WaveletOperator<T>> {
        let mut op = self.build_inner::<T>(n)?;
        op.recipe = self.canonical();
        Ok(op)
    }

    fn build_inner<T: Scalar>(&self, n: usize) -> Result<WaveletOperator<T>> {
        if let Some(fixed) = self.fixed_size() {
            if fixed != n {
                return Err(Error::SizeMismatch(format!("`{self}` has size {fixed}, requested {n}")));
            }
        }
        match self {
            Recipe::Wavmat {
                filter,
                levels,
                eps,
                shift,
                ..
            } => {
                let mut spec = get_filter::<T>(filter)?;
                if let Some(s) = shift {
                    spec.shift_n = *s;
                }
                let bits = eps.clone().unwrap_or_else(|| vec![0; *levels]);
                build_wavmat(&spec, n, *levels, &bits)
            }
            Recipe::Product(parts) => {
                let ops = parts
                    .iter()
                    .map(|p| p.build_inner::<T>(n))
                    .collect::<Result<Vec<_>>>()?;
                composite::product(&ops.iter().collect::<Vec<_>>())
            }
            Recipe::Similarity(w, a) => {
                composite::similarity(&w.build_inner::<T>(n)?, &a.build_inner::<T>(n)?)
            }
            Recipe::Adjoint(a) => Ok(a.build_inner::<T>(n)?.adjoint()),
            Recipe::Kron(a, b) => {
                let (na, nb) = match (a.fixed_size(), b.fixed_size()) {
                    (Some(x), Some(y)) => (x, y),
                    (Some(x), None) if x > 0 && n.is_multiple_of(x) => (x, n / x),
                    (None, Some(y)) if y > 0 && n.is_multiple_of(y) => (n / y, y),
                    _ => {
                        return Err(Error::SizeMismatch(format!(
                            "cannot split size {n} between the parts of `{self}`; pin one with n="
                        )))
                    }
                };
                if na * nb != n {
                    return Err(Error::SizeMismatch(format!("kron sizes {na}x{nb} != {n}")));
                }
                composite::kron(&a.build_inner::<T>(na)?, &b.build_inner::<T>(nb)?)
            }
            Recipe::BlockDiag(parts) => {
                let fixed: usize = parts.iter().filter_map(Recipe::fixed_size).sum();
                let free = parts.iter().filter(|p| p.fixed_size().is_none()).count();
                let share = if free == 0 {
                    0
                } else if fixed < n && (n - fixed).is_multiple_of(free) {
                    (n - fixed) / free
                } else {
                    return Err(Error::SizeMismatch(format!(
                        "cannot split size {n} across {free} unsized blockdiag parts"
                    )));
                };
                if free == 0 && fixed != n {
                    return Err(Error::SizeMismatch(format!("blockdiag sizes sum to {fixed}, not {n}")));
                }
                let ops = parts
                    .iter()
                    .map(|p| p.build_inner::<T>(p.fixed_size().unwrap_or(share)))
                    .collect::<Result<Vec<_>>>()?;
                composite::block_diag(&ops.iter().collect::<Vec<_>>())
            }
        }
    }
}

/// Parses and builds in one step.
pub fn build_recipe<T: Scalar>(text: &str, n: usize) -> Result<WaveletOperator<T>> {
    parse_recipe(text)?.build(n)
}
