//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := ["-"] term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := coef | var ["^" uint]
//! coef   := int | int "/" uint | decimal
//! ```
//!
//! Whitespace is insignificant and products must be written with `*`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::exponent::Exponent;
use super::polynomial::{Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("variable name `{name}` shadows the canonical name of another variable")]
    ReservedName { name: String },
    #[error("duplicate variable name `{name}`")]
    DuplicateName { name: String },
}

impl ParseError {
    /// Character offset of the error, when it is tied to one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::NegativeExponent { pos } => Some(*pos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                out.push((start, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((start, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((start, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((start, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((start, Tok::Caret));
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut digits = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    digits.push(chars[i]);
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    let mut frac = String::new();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        frac.push(chars[i]);
                        i += 1;
                    }
                    if digits.is_empty() && frac.is_empty() {
                        return Err(ParseError::Syntax {
                            pos: start,
                            msg: "lone decimal point".into(),
                        });
                    }
                    let whole: BigInt = if digits.is_empty() {
                        BigInt::zero()
                    } else {
                        digits.parse().expect("digits")
                    };
                    let scale = BigInt::from(10u32).pow(frac.len() as u32);
                    let fracv: BigInt = if frac.is_empty() {
                        BigInt::zero()
                    } else {
                        frac.parse().expect("digits")
                    };
                    let v = Rational::new(whole * &scale + fracv, scale);
                    out.push((start, Tok::Decimal(v)));
                } else {
                    out.push((start, Tok::Int(digits.parse().expect("digits"))));
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                }
                out.push((start, Tok::Ident(s)));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Checks a variable-name list: unique, and no name of the form `x<k>`
/// unless it sits at position `k`.
pub fn validate_names(names: &[String]) -> Result<(), ParseError> {
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(ParseError::DuplicateName { name: name.clone() });
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(k) = rest.parse::<usize>() {
                if k != i + 1 {
                    return Err(ParseError::ReservedName { name: name.clone() });
                }
            }
        }
    }
    Ok(())
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let n = self.names.len();
        let mut acc = Polynomial::zero(n);
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            negate = true;
        }
        loop {
            let t = self.term()?;
            acc = if negate { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(Tok::Plus) => negate = false,
                Some(Tok::Minus) => negate = true,
                None => return Ok(acc),
                Some(_) => return self.syntax("expected `+`, `-` or `*`"),
            }
            self.bump();
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let n = self.names.len();
        let mut coef = Rational::one();
        let mut exp = vec![0u32; n];
        self.factor(&mut coef, &mut exp)?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            self.factor(&mut coef, &mut exp)?;
        }
        Ok(Polynomial::monomial(Exponent::new(exp), coef))
    }

    fn factor(&mut self, coef: &mut Rational, exp: &mut [u32]) -> Result<(), ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(v)) => {
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    let den_at = self.offset();
                    match self.bump() {
                        Some(Tok::Int(d)) if !d.is_zero() => {
                            *coef *= Rational::new(v, d);
                        }
                        Some(Tok::Int(_)) => {
                            return Err(ParseError::Syntax {
                                pos: den_at,
                                msg: "zero denominator".into(),
                            })
                        }
                        _ => {
                            return Err(ParseError::Syntax {
                                pos: den_at,
                                msg: "expected unsigned integer denominator".into(),
                            })
                        }
                    }
                } else {
                    *coef *= Rational::from_integer(v);
                }
            }
            Some(Tok::Decimal(v)) => *coef *= v,
            Some(Tok::Ident(name)) => {
                let Some(idx) = self.names.iter().position(|s| *s == name) else {
                    return Err(ParseError::UnknownIdentifier { pos: at, name });
                };
                let mut power = 1u32;
                if self.peek() == Some(&Tok::Caret) {
                    self.bump();
                    let p_at = self.offset();
                    match self.bump() {
                        Some(Tok::Int(v)) => {
                            power = u32::try_from(v).map_err(|_| ParseError::Syntax {
                                pos: p_at,
                                msg: "exponent too large".into(),
                            })?;
                        }
                        Some(Tok::Minus) => return Err(ParseError::NegativeExponent { pos: p_at }),
                        _ => {
                            return Err(ParseError::Syntax {
                                pos: p_at,
                                msg: "expected unsigned integer exponent".into(),
                            })
                        }
                    }
                }
                exp[idx] += power;
            }
            Some(Tok::Minus) => {
                return Err(ParseError::Syntax {
                    pos: at,
                    msg: "unexpected `-` (only a leading sign is allowed)".into(),
                })
            }
            None => {
                return Err(ParseError::Syntax {
                    pos: at,
                    msg: "unexpected end of input".into(),
                })
            }
            Some(_) => {
                return Err(ParseError::Syntax {
                    pos: at,
                    msg: "expected a coefficient or variable".into(),
                })
            }
        }
        Ok(())
    }
}

/// Parses `text` into an exact polynomial over the variables `names`.
pub fn parse_polynomial(text: &str, names: &[String]) -> Result<Polynomial, ParseError> {
    validate_names(names)?;
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        names,
    };
    if p.peek().is_none() {
        return p.syntax("empty expression");
    }
    p.expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::polynomial::{int, rational};

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn parses_example_one_fixture() {
        let p = parse_polynomial("1 - x1^4 - x2^4 - x1^2*x2^2", &names(2)).unwrap();
        let want =
            Polynomial::from_int_terms(2, &[(&[0, 0], 1), (&[4, 0], -1), (&[0, 4], -1), (&[2, 2], -1)]);
        assert_eq!(p, want);
    }

    #[test]
    fn parses_product_minus_one() {
        let p = parse_polynomial("x1*x2*x3 - 1", &names(3)).unwrap();
        let want = Polynomial::from_int_terms(3, &[(&[1, 1, 1], 1), (&[0, 0, 0], -1)]);
        assert_eq!(p, want);
    }

    #[test]
    fn parses_exact_rational() {
        let p = parse_polynomial("3/2*x1^2", &names(2)).unwrap();
        assert_eq!(p.coeff(&Exponent::from([2, 0])), rational(3, 2));
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_polynomial("0.25*x1 + 1.5", &names(1)).unwrap();
        assert_eq!(p.coeff(&Exponent::from([1])), rational(1, 4));
        assert_eq!(p.coeff(&Exponent::from([0])), rational(3, 2));
    }

    #[test]
    fn collects_like_terms() {
        let p = parse_polynomial("x1*x2 + x2*x1 - 2*x1*x2 + x1*x1", &names(2)).unwrap();
        assert_eq!(p, Polynomial::from_int_terms(2, &[(&[2, 0], 1)]));
    }

    #[test]
    fn custom_names() {
        let vars = vec!["a".to_string(), "b".to_string()];
        let p = parse_polynomial("a^2 - 2*a*b", &vars).unwrap();
        assert_eq!(p.coeff(&Exponent::from([1, 1])), int(-2));
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_polynomial("x1 + y", &names(1)).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                pos: 5,
                name: "y".into()
            }
        );
    }

    #[test]
    fn negative_exponent() {
        let err = parse_polynomial("x1^-2", &names(1)).unwrap_err();
        assert_eq!(err, ParseError::NegativeExponent { pos: 3 });
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_polynomial("2 x1", &names(1)).unwrap_err();
        assert_eq!(err.position(), Some(2));
        let err = parse_polynomial("x1 +", &names(1)).unwrap_err();
        assert_eq!(err.position(), Some(4));
        let err = parse_polynomial("x1 # 2", &names(1)).unwrap_err();
        assert_eq!(err.position(), Some(3));
        assert!(matches!(
            parse_polynomial("1/0", &names(1)),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_polynomial("x1 * -2", &names(1)),
            Err(ParseError::Syntax { pos: 5, .. })
        ));
        assert!(parse_polynomial("", &names(1)).is_err());
    }

    #[test]
    fn reserved_names_rejected() {
        let vars = vec!["x2".to_string(), "x1".to_string()];
        assert!(matches!(
            parse_polynomial("x1", &vars),
            Err(ParseError::ReservedName { .. })
        ));
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            parse_polynomial("a", &dup),
            Err(ParseError::DuplicateName { .. })
        ));
    }

    #[test]
    fn print_then_reparse_is_identity() {
        for text in [
            "1 - x1^4 - x2^4 - x1^2*x2^2",
            "1 - (x1^8)",
            "-3/2*x1^2 + 7*x1*x2 - 0.125",
            "x1*x2 - 1",
        ] {
            let text = text.replace(['(', ')'], "");
            let p = parse_polynomial(&text, &names(2)).unwrap();
            let again = parse_polynomial(&p.to_string(), &names(2)).unwrap();
            assert_eq!(p, again, "{text}");
        }
    }
}
