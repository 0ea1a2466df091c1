use std::fmt;

/// Abstract syntax of an itinerary expression.
///
/// Leaves name edges of the associated world graph; names are resolved when
/// the expression is compiled. `Walks` denotes the set of all walks of the
/// world graph and is the only world-dependent constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItineraryExpr {
    Edge(String),
    Epsilon,
    EmptySet,
    Walks,
    Concat(Vec<ItineraryExpr>),
    Union(Box<ItineraryExpr>, Box<ItineraryExpr>),
    Intersection(Box<ItineraryExpr>, Box<ItineraryExpr>),
    Difference(Box<ItineraryExpr>, Box<ItineraryExpr>),
    Star(Box<ItineraryExpr>),
    Complement(Box<ItineraryExpr>),
}

impl ItineraryExpr {
    pub fn concat(parts: Vec<ItineraryExpr>) -> ItineraryExpr {
        match parts.len() {
            0 => ItineraryExpr::Epsilon,
            1 => parts.into_iter().next().unwrap(),
            _ => ItineraryExpr::Concat(parts),
        }
    }

    /// E* over the alphabet: the complement of the empty language.
    pub fn all_words() -> ItineraryExpr {
        ItineraryExpr::Complement(Box::new(ItineraryExpr::EmptySet))
    }

    /// The `allcontaining(e)` sugar: E* e E*.
    pub fn all_containing(edge: impl Into<String>) -> ItineraryExpr {
        ItineraryExpr::Concat(vec![
            Self::all_words(),
            ItineraryExpr::Edge(edge.into()),
            Self::all_words(),
        ])
    }

    // Binding strength for printing; higher binds tighter.
    fn level(&self) -> u8 {
        match self {
            ItineraryExpr::Union(..) => 0,
            ItineraryExpr::Difference(..) => 1,
            ItineraryExpr::Intersection(..) => 2,
            ItineraryExpr::Concat(_) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        let level = self.level();
        let parens = level < min_level;
        if parens {
            write!(f, "(")?;
        }
        match self {
            ItineraryExpr::Edge(e) => write!(f, "{e}")?,
            ItineraryExpr::Epsilon => write!(f, "EPS")?,
            ItineraryExpr::EmptySet => write!(f, "EMPTY")?,
            ItineraryExpr::Walks => write!(f, "WALKS")?,
            ItineraryExpr::Concat(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    p.fmt_at(f, 4)?;
                }
            }
            ItineraryExpr::Union(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " + ")?;
                b.fmt_at(f, 1)?;
            }
            ItineraryExpr::Difference(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " \\ ")?;
                b.fmt_at(f, 2)?;
            }
            ItineraryExpr::Intersection(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " & ")?;
                b.fmt_at(f, 3)?;
            }
            ItineraryExpr::Star(inner) => {
                inner.fmt_at(f, 5)?;
                write!(f, "*")?;
            }
            ItineraryExpr::Complement(inner) => {
                write!(f, "!")?;
                inner.fmt_at(f, 5)?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ItineraryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
