//! Expression parser for itineraries.
//!
//! Grammar (EBNF), lowest precedence first:
//!
//! ```text
//! union   = diff { "+" diff } ;
//! diff    = inter { "\" inter } ;
//! inter   = concat { "&" concat } ;
//! concat  = unary { unary } ;            (* juxtaposition *)
//! unary   = "!" unary | postfix ;
//! postfix = atom { "*" } ;
//! atom    = "(" union ")" | "WALKS" | "EPS" | "EMPTY"
//!         | "allcontaining" "(" EDGE ")" | EDGE ;
//! EDGE    = letter-or-underscore { letter | digit | "_" | "'" } ;
//! ```
//!
//! `WALKS` is the set of walks of the world graph, `EPS` the singleton empty
//! word, `EMPTY` the empty language, and `allcontaining(e)` sugar for
//! `!EMPTY e !EMPTY` (all words containing `e`). Binary operators are
//! left-associative; whitespace separates edge tokens.

use super::{ItineraryError, ItineraryExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Plus,
    Backslash,
    Amp,
    Star,
    Bang,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ItineraryError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'+' => Tok::Plus,
            b'\\' => Tok::Backslash,
            b'&' => Tok::Amp,
            b'*' => Tok::Star,
            b'!' => Tok::Bang,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii ident")
                    .to_string();
                return Ok(Some((start, Tok::Ident(ident))));
            }
            other => {
                return Err(ItineraryError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.cursor).map(|(_, t)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ItineraryError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.cursor += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn error(&self, msg: String) -> ItineraryError {
        ItineraryError::Syntax {
            pos: self.pos(),
            msg,
        }
    }

    fn union(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        let mut left = self.diff()?;
        while self.peek() == Some(&Tok::Plus) {
            self.bump();
            let right = self.diff()?;
            left = ItineraryExpr::Union(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn diff(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        let mut left = self.inter()?;
        while self.peek() == Some(&Tok::Backslash) {
            self.bump();
            let right = self.inter()?;
            left = ItineraryExpr::Difference(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn inter(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        let mut left = self.concat()?;
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            let right = self.concat()?;
            left = ItineraryExpr::Intersection(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn starts_unary(tok: &Tok) -> bool {
        matches!(tok, Tok::Ident(_) | Tok::LParen | Tok::Bang)
    }

    fn concat(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        let mut parts = vec![self.unary()?];
        while let Some(tok) = self.peek() {
            if Self::starts_unary(tok) {
                parts.push(self.unary()?);
            } else {
                break;
            }
        }
        Ok(ItineraryExpr::concat(parts))
    }

    fn unary(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        if self.peek() == Some(&Tok::Bang) {
            self.bump();
            let inner = self.unary()?;
            return Ok(ItineraryExpr::Complement(Box::new(inner)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        let mut expr = self.atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            expr = ItineraryExpr::Star(Box::new(expr));
        }
        Ok(expr)
    }

    fn atom(&mut self) -> Result<ItineraryExpr, ItineraryError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let inner = self.union()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "WALKS" => Ok(ItineraryExpr::Walks),
                "EPS" => Ok(ItineraryExpr::Epsilon),
                "EMPTY" => Ok(ItineraryExpr::EmptySet),
                "allcontaining" => {
                    self.expect(Tok::LParen, "`(` after allcontaining")?;
                    let edge = match self.bump() {
                        Some(Tok::Ident(e)) => e,
                        _ => return Err(self.error("expected edge id".into())),
                    };
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(ItineraryExpr::all_containing(edge))
                }
                _ => Ok(ItineraryExpr::Edge(name)),
            },
            _ => Err(self.error("expected expression".into())),
        }
    }
}

/// Parse an itinerary expression. Edge names are not resolved here; unknown
/// edges are reported when the expression is compiled against a world graph.
pub fn parse_itinerary(src: &str) -> Result<ItineraryExpr, ItineraryError> {
    let mut lexer = Lexer {
        src: src.as_bytes(),
        pos: 0,
    };
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    if tokens.is_empty() {
        return Err(ItineraryError::Syntax {
            pos: 0,
            msg: "empty itinerary expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end: src.len(),
    };
    let expr = parser.union()?;
    if parser.cursor != parser.tokens.len() {
        return Err(parser.error("trailing input after expression".into()));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ItineraryExpr as E;

    #[test]
    fn parses_table_style_expression() {
        let expr = parse_itinerary("e12 (e11 e12 + e20 e19)* e20 e21").unwrap();
        match &expr {
            E::Concat(parts) => {
                assert_eq!(parts.len(), 4);
                assert_eq!(parts[0], E::Edge("e12".into()));
                assert!(matches!(parts[1], E::Star(_)));
                match &parts[1] {
                    E::Star(inner) => assert!(matches!(**inner, E::Union(..))),
                    _ => unreachable!(),
                }
            }
            other => panic!("unexpected tree: {other:?}"),
        }
    }

    #[test]
    fn parses_walks_difference_with_sugar() {
        let expr = parse_itinerary("WALKS \\ allcontaining(e21)").unwrap();
        match expr {
            E::Difference(left, right) => {
                assert_eq!(*left, E::Walks);
                match *right {
                    E::Concat(parts) => {
                        assert_eq!(parts.len(), 3);
                        assert_eq!(parts[1], E::Edge("e21".into()));
                        assert_eq!(parts[0], E::all_words());
                    }
                    other => panic!("unexpected sugar expansion: {other:?}"),
                }
            }
            other => panic!("unexpected tree: {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_a_syntax_error() {
        assert!(matches!(
            parse_itinerary(""),
            Err(ItineraryError::Syntax { pos: 0, .. })
        ));
        assert!(matches!(
            parse_itinerary("   "),
            Err(ItineraryError::Syntax { .. })
        ));
    }

    #[test]
    fn reports_error_positions() {
        match parse_itinerary("e1 + ") {
            Err(ItineraryError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_itinerary("e1 ) e2") {
            Err(ItineraryError::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn precedence_layers() {
        // union is weakest, concat binds tighter than & \ +
        let expr = parse_itinerary("a b + c & d \\ e").unwrap();
        // = (a b) + ((c & d) \ e)  per Complement/Star > Concat > & > \ > +
        match expr {
            E::Union(left, right) => {
                assert!(matches!(*left, E::Concat(_)));
                assert!(matches!(*right, E::Difference(..)));
            }
            other => panic!("unexpected tree: {other:?}"),
        }
        // prefix ! and postfix * outrank concat
        let expr = parse_itinerary("!a b*").unwrap();
        match expr {
            E::Concat(parts) => {
                assert!(matches!(parts[0], E::Complement(_)));
                assert!(matches!(parts[1], E::Star(_)));
            }
            other => panic!("unexpected tree: {other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "e12 (e11 e12 + e20 e19)* e20 e21",
            "WALKS \\ allcontaining(e21)",
            "!(a b) & c + EPS",
            "a \\ b \\ c",
            "(a + b)* & !EMPTY",
        ] {
            let expr = parse_itinerary(src).unwrap();
            let printed = expr.to_string();
            let reparsed = parse_itinerary(&printed).unwrap();
            assert_eq!(expr, reparsed, "printing `{src}` as `{printed}` changed the tree");
        }
    }
}
