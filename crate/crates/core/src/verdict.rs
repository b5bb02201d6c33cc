//! Three-valued answers for smoothness and membership questions.

use std::fmt;

use crate::pwpoly::{OrthantPoly, PlotMap};
use crate::rat::{fmt_rat, Rat};

/// Evidence attached to a negative verdict. Every field that is present can
/// be re-checked independently: `expression` is not ordinarily smooth.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Witness {
    pub generator: Option<usize>,
    pub component: Option<usize>,
    pub functional: Option<Vec<Rat>>,
    pub expression: Option<OrthantPoly>,
    pub note: String,
}

impl Witness {
    pub fn note(note: impl Into<String>) -> Self {
        Witness { note: note.into(), ..Default::default() }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(g) = self.generator {
            parts.push(format!("generator {}", g + 1));
        }
        if let Some(c) = self.component {
            parts.push(format!("component {}", c + 1));
        }
        if let Some(fun) = &self.functional {
            parts.push(format!("functional ({})", fun.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")));
        }
        if let Some(e) = &self.expression {
            parts.push(format!("non-smooth {e}"));
        }
        if !self.note.is_empty() {
            parts.push(self.note.clone());
        }
        f.write_str(&parts.join("; "))
    }
}

/// `p_j ∘ φ` with φ from the finite catalog: every target coordinate is
/// either zero or `±u_i` for a source coordinate `u_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CatalogMap {
    /// One entry per target coordinate: `(source index, negated)`.
    pub slots: Vec<Option<(usize, bool)>>,
    pub source_dim: usize,
}

impl CatalogMap {
    pub fn is_identity(&self) -> bool {
        self.slots.len() == self.source_dim && self.slots.iter().enumerate().all(|(i, s)| *s == Some((i, false)))
    }
}

impl fmt::Display for CatalogMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("id");
        }
        let parts: Vec<String> = self
            .slots
            .iter()
            .map(|s| match s {
                None => "0".to_string(),
                Some((i, false)) => format!("u{}", i + 1),
                Some((i, true)) => format!("-u{}", i + 1),
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// One summand `h · (p_j ∘ φ)` of a membership decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompTerm {
    pub generator: usize,
    pub map: CatalogMap,
    pub coefficient: OrthantPoly,
}

/// `q = smooth + Σ h_t (p_{j_t} ∘ φ_t)`, with `smooth` ordinarily smooth and
/// each `h_t` a polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub smooth: PlotMap,
    pub terms: Vec<DecompTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Ordinarily smooth, hence a plot of every vector space diffeology.
    Ordinary,
    /// The target is coarse.
    Coarse,
    Decomposition(Decomposition),
    /// Every generator image was certified separately.
    PerGenerator(Vec<Certificate>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Smooth(Certificate),
    NotSmooth(Witness),
    Unknown(String),
}

impl Verdict {
    pub fn is_smooth(&self) -> bool {
        matches!(self, Verdict::Smooth(_))
    }

    pub fn is_not_smooth(&self) -> bool {
        matches!(self, Verdict::NotSmooth(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Smooth(_) => "smooth",
            Verdict::NotSmooth(_) => "not_smooth",
            Verdict::Unknown(_) => "unknown",
        }
    }

    /// Conjunction: any refutation wins, then any unknown.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut certs = Vec::new();
        let mut unknown = None;
        for v in verdicts {
            match v {
                Verdict::NotSmooth(w) => return Verdict::NotSmooth(w),
                Verdict::Unknown(r) => {
                    unknown.get_or_insert(r);
                }
                Verdict::Smooth(c) => certs.push(c),
            }
        }
        match unknown {
            Some(r) => Verdict::Unknown(r),
            None => Verdict::Smooth(Certificate::PerGenerator(certs)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_prefers_refutation() {
        let v = Verdict::all([
            Verdict::Unknown("x".into()),
            Verdict::NotSmooth(Witness::note("w")),
            Verdict::Smooth(Certificate::Ordinary),
        ]);
        assert!(v.is_not_smooth());
        let v = Verdict::all([Verdict::Smooth(Certificate::Ordinary), Verdict::Unknown("r".into())]);
        assert_eq!(v, Verdict::Unknown("r".into()));
        assert!(Verdict::all([]).is_smooth());
    }
}
