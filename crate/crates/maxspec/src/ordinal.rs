//! Ordinals below w^w in Cantor normal form.
//!
//! An ordinal is a finite sum of terms `w^e * c` with strictly decreasing
//! exponents and coefficients >= 1; the empty sum is 0. Literals follow the
//! same shape: `"w^2*3+w*2+5"`, `"w"`, `"0"`.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    /// `(exponent, coefficient)` pairs, exponents strictly decreasing, coefficients >= 1.
    terms: Vec<(u32, u64)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrdinalParseError {
    #[error("empty ordinal literal")]
    Empty,
    #[error("invalid ordinal term `{0}`")]
    BadTerm(String),
    #[error("coefficient must be >= 1 in term `{0}`")]
    ZeroCoefficient(String),
    #[error("exponents not strictly decreasing at term `{0}`")]
    ExponentOrder(String),
}

impl Ordinal {
    pub const fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(0, n)] }
        }
    }

    pub fn omega() -> Self {
        Self::w_pow(1)
    }

    pub fn w_pow(e: u32) -> Self {
        Ordinal { terms: vec![(e, 1)] }
    }

    pub fn w_pow_mul(e: u32, c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(e, c)] }
        }
    }

    /// Builds an ordinal from CNF terms, validating the normal-form invariants.
    pub fn from_terms(terms: Vec<(u32, u64)>) -> Result<Self, OrdinalParseError> {
        for window in terms.windows(2) {
            if window[0].0 <= window[1].0 {
                return Err(OrdinalParseError::ExponentOrder(format!(
                    "w^{}",
                    window[1].0
                )));
            }
        }
        if let Some(&(e, 0)) = terms.iter().find(|&&(_, c)| c == 0) {
            return Err(OrdinalParseError::ZeroCoefficient(format!("w^{e}*0")));
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Least exponent in the CNF; 0 for the zero ordinal.
    pub fn deg(&self) -> u32 {
        self.terms.last().map_or(0, |&(e, _)| e)
    }

    /// Largest exponent in the CNF; 0 for the zero ordinal.
    pub fn lead_exp(&self) -> u32 {
        self.terms.first().map_or(0, |&(e, _)| e)
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && self.deg() >= 1
    }

    pub fn is_successor(&self) -> bool {
        !self.is_zero() && self.deg() == 0
    }

    /// Ordinal addition. Terms of `self` below the leading exponent of `rhs`
    /// are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(&(lead, first_coeff)) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(u32, u64)> = self
            .terms
            .iter()
            .copied()
            .take_while(|&(e, _)| e > lead)
            .collect();
        let mut rest = rhs.terms.iter().copied();
        let merged = self
            .terms
            .iter()
            .find(|&&(e, _)| e == lead)
            .map(|&(_, c)| c + first_coeff);
        match merged {
            Some(c) => {
                terms.push((lead, c));
                rest.next();
            }
            None => {}
        }
        terms.extend(rest);
        Ordinal { terms }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::nat(1))
    }

    /// Predecessor of a successor ordinal.
    pub fn pred(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        if last.1 == 1 {
            terms.pop();
        } else {
            last.1 -= 1;
        }
        Some(Ordinal { terms })
    }

    /// For `x = d + w^e*c` (least term `w^e*c`) returns `d + w^e*(c-1)`:
    /// the greatest multiple of w^deg(x) strictly below x, the base of the
    /// final CNF block. None for 0.
    pub fn block_start(&self) -> Option<Ordinal> {
        if self.is_zero() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        if last.1 == 1 {
            terms.pop();
        } else {
            last.1 -= 1;
        }
        Some(Ordinal { terms })
    }

    /// Truncation to the terms with exponent >= `d`.
    fn truncate_at(&self, d: u32) -> Ordinal {
        Ordinal {
            terms: self
                .terms
                .iter()
                .copied()
                .take_while(|&(e, _)| e >= d)
                .collect(),
        }
    }

    /// Least ordinal of degree exactly `d` strictly above `after`
    /// (or >= 0 when `after` is None, the bottom marker).
    pub fn next_of_degree(after: Option<&Ordinal>, d: u32) -> Ordinal {
        match after {
            None => {
                if d == 0 {
                    Ordinal::zero()
                } else {
                    Ordinal::w_pow(d)
                }
            }
            Some(p) => p.truncate_at(d).add(&Ordinal::w_pow(d)),
        }
    }

    /// Unique `r` with `self + r = target`, when `self <= target`.
    pub fn left_sub(&self, target: &Ordinal) -> Option<Ordinal> {
        let a = &self.terms;
        let b = &target.terms;
        let mut i = 0;
        while i < a.len() && i < b.len() && a[i] == b[i] {
            i += 1;
        }
        if i == a.len() {
            return Some(Ordinal {
                terms: b[i..].to_vec(),
            });
        }
        if i == b.len() {
            return None; // self > target
        }
        let (ea, ca) = a[i];
        let (eb, cb) = b[i];
        if ea < eb {
            Some(Ordinal {
                terms: b[i..].to_vec(),
            })
        } else if ea == eb && ca < cb {
            let mut terms = vec![(eb, cb - ca)];
            terms.extend_from_slice(&b[i + 1..]);
            Some(Ordinal { terms })
        } else {
            None
        }
    }

    pub fn parse(s: &str) -> Result<Self, OrdinalParseError> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(OrdinalParseError::Empty);
        }
        if s == "0" {
            return Ok(Ordinal::zero());
        }
        let mut terms = Vec::new();
        for tok in s.split('+') {
            terms.push(parse_term(tok)?);
        }
        // Exponent-order violations are reported, not silently repaired.
        for k in 1..terms.len() {
            if terms[k - 1].0 <= terms[k].0 {
                let (e, c) = terms[k];
                return Err(OrdinalParseError::ExponentOrder(render_term(e, c)));
            }
        }
        Ok(Ordinal { terms })
    }
}

fn parse_term(tok: &str) -> Result<(u32, u64), OrdinalParseError> {
    if tok.is_empty() {
        return Err(OrdinalParseError::BadTerm(String::new()));
    }
    let bad = || OrdinalParseError::BadTerm(tok.to_string());
    if let Some(rest) = tok.strip_prefix('w') {
        let (exp_part, coeff_part) = match rest.split_once('*') {
            Some((e, c)) => (e, Some(c)),
            None => (rest, None),
        };
        let exp: u32 = if exp_part.is_empty() {
            1
        } else {
            let digits = exp_part.strip_prefix('^').ok_or_else(bad)?;
            parse_nat(digits).ok_or_else(bad)?
        };
        let coeff: u64 = match coeff_part {
            None => 1,
            Some(digits) => parse_nat(digits).ok_or_else(bad)?,
        };
        if coeff == 0 {
            return Err(OrdinalParseError::ZeroCoefficient(tok.to_string()));
        }
        Ok((exp, coeff))
    } else {
        let n: u64 = parse_nat(tok).ok_or_else(bad)?;
        if n == 0 {
            return Err(OrdinalParseError::ZeroCoefficient(tok.to_string()));
        }
        Ok((0, n))
    }
}

fn parse_nat<T: std::str::FromStr>(s: &str) -> Option<T> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn render_term(e: u32, c: u64) -> String {
    match (e, c) {
        (0, c) => c.to_string(),
        (1, 1) => "w".to_string(),
        (1, c) => format!("w*{c}"),
        (e, 1) => format!("w^{e}"),
        (e, c) => format!("w^{e}*{c}"),
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|&(e, c)| render_term(e, c))
            .collect();
        write!(f, "{}", rendered.join("+"))
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            match a.0.cmp(&b.0).then(a.1.cmp(&b.1)) {
                Ordering::Equal => continue,
                non_eq => return non_eq,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
