//! Level-`m` functions: finite linear combinations of cylinder indicators
//! `1_f` over paths of one length, with exact rational coefficients.
//!
//! Every element of the span of all indicators lives at some finite level, by
//! repeatedly splitting `1_f` into the indicators of its one-edge extensions,
//! so a single level is enough to represent any element.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::Diagram;
use crate::dynamics::{enumerate_paths, iterate, Path, PathError};
use crate::Coeff;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionError {
    #[error("alpha_{n} is undefined on support paths {offending:?}")]
    DomainViolation { n: i64, offending: Vec<String> },
    #[error("support path `{path}` has length {len}, expected level {level}")]
    LevelMismatch {
        path: String,
        len: usize,
        level: usize,
    },
    #[error("bad coefficient `{0}`")]
    BadCoefficient(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("level must be at least 1")]
    ZeroLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelFunction {
    level: usize,
    coeffs: BTreeMap<Path, Coeff>,
}

impl LevelFunction {
    pub fn zero(level: usize) -> Self {
        assert!(level >= 1, "level functions live at level >= 1");
        Self {
            level,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn indicator(p: &Path) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(p.clone(), Coeff::one());
        Self {
            level: p.len(),
            coeffs,
        }
    }

    /// The constant function 1, written at `level`.
    pub fn one(d: &Diagram, level: usize) -> Self {
        Self {
            level,
            coeffs: enumerate_paths(d, level, None)
                .into_iter()
                .map(|p| (p, Coeff::one()))
                .collect(),
        }
    }

    /// Builds a function from explicit terms; zero coefficients are dropped
    /// and repeated paths are summed.
    pub fn from_terms(
        level: usize,
        terms: impl IntoIterator<Item = (Path, Coeff)>,
    ) -> Result<Self, FunctionError> {
        if level == 0 {
            return Err(FunctionError::ZeroLevel);
        }
        let mut out = Self::zero(level);
        for (p, c) in terms {
            if p.len() != level {
                return Err(FunctionError::LevelMismatch {
                    path: format!("{:?}", p.edges()),
                    len: p.len(),
                    level,
                });
            }
            out.add_term(p, c);
        }
        Ok(out)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &BTreeMap<Path, Coeff> {
        &self.coeffs
    }

    pub fn coeff(&self, p: &Path) -> Coeff {
        self.coeffs.get(p).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, p: Path, c: Coeff) {
        crate::add_coeff(&mut self.coeffs, p, c);
    }

    /// Pointwise sum; both sides are refined to the finer level first.
    pub fn add(&self, d: &Diagram, other: &Self) -> Self {
        let level = self.level.max(other.level);
        let mut out = refine_to(d, self, level);
        for (p, c) in refine_to(d, other, level).coeffs {
            out.add_term(p, c);
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero(self.level);
        }
        Self {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .map(|(p, v)| (p.clone(), v * c))
                .collect(),
        }
    }

    pub fn to_doc(&self, d: &Diagram) -> LevelFunctionDoc {
        LevelFunctionDoc {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .map(|(p, c)| (p.display(d).to_string(), c.to_string()))
                .collect(),
        }
    }

    pub fn from_doc(d: &Diagram, doc: &LevelFunctionDoc) -> Result<Self, FunctionError> {
        let terms = doc
            .coeffs
            .iter()
            .map(|(p, c)| {
                let path = Path::parse(d, p)?;
                let coeff = Coeff::from_str(c.trim())
                    .map_err(|_| FunctionError::BadCoefficient(c.clone()))?;
                Ok((path, coeff))
            })
            .collect::<Result<Vec<_>, FunctionError>>()?;
        Self::from_terms(doc.level, terms)
    }
}

/// JSON form: `{"level": 2, "coeffs": {"A1,A1": "3/2"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelFunctionDoc {
    pub level: usize,
    pub coeffs: BTreeMap<String, String>,
}

pub fn indicator(p: &Path) -> LevelFunction {
    LevelFunction::indicator(p)
}

/// Rewrites `a` one level down: the coefficient of `f` moves to every
/// one-edge extension `fe`.
pub fn refine(d: &Diagram, a: &LevelFunction) -> LevelFunction {
    let mut coeffs = BTreeMap::new();
    for (f, c) in &a.coeffs {
        for &e in d.outgoing(f.target(d)) {
            let fe = f.extend(d, e).expect("outgoing edges compose");
            coeffs.insert(fe, c.clone());
        }
    }
    LevelFunction {
        level: a.level + 1,
        coeffs,
    }
}

/// Refines `a` until it sits at `level`. Panics if `level < a.level()`.
pub fn refine_to(d: &Diagram, a: &LevelFunction, level: usize) -> LevelFunction {
    assert!(level >= a.level, "cannot coarsen a level function");
    let mut out = a.clone();
    while out.level < level {
        out = refine(d, &out);
    }
    out
}

/// Pointwise product, at the finer of the two levels.
pub fn multiply(d: &Diagram, a: &LevelFunction, b: &LevelFunction) -> LevelFunction {
    let level = a.level.max(b.level);
    let a = refine_to(d, a, level);
    let b = refine_to(d, b, level);
    let coeffs = a
        .coeffs
        .iter()
        .filter_map(|(p, x)| b.coeffs.get(p).map(|y| (p.clone(), x * y)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    LevelFunction { level, coeffs }
}

/// `alpha_n(a) = a ∘ λ^{-n}`: the coefficient of `f` moves to `λ^n(f)`.
/// Every support path must lie in the domain of `λ^n`.
pub fn alpha(d: &Diagram, a: &LevelFunction, n: i64) -> Result<LevelFunction, FunctionError> {
    let mut coeffs = BTreeMap::new();
    let mut offending = Vec::new();
    for (f, c) in &a.coeffs {
        match iterate(d, f, n) {
            Some(g) => {
                coeffs.insert(g, c.clone());
            }
            None => offending.push(f.display(d).to_string()),
        }
    }
    if offending.is_empty() {
        Ok(LevelFunction {
            level: a.level,
            coeffs,
        })
    } else {
        Err(FunctionError::DomainViolation { n, offending })
    }
}
