//! Solver-neutral mixed-integer linear models.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// Model symbol a variable belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Arc selection `x[o,d,i,j]`.
    X,
    /// Block design `y[p,q]`.
    Y,
    /// Train frequency `z[p,q]`.
    Z,
    /// Block sequence `u[o,d,p,q]`.
    U,
    /// Consolidation selection `v[d,p,q]`.
    V,
    /// Sort track usage `w[p,q]`.
    W,
    /// Linearization auxiliary `s[p,q,i,j] = x[p,q,i,j] * z[p,q]`.
    S,
    /// Anything else, e.g. columns read from an MPS file.
    Named(String),
}

impl Symbol {
    pub fn letter(&self) -> &str {
        match self {
            Symbol::X => "x",
            Symbol::Y => "y",
            Symbol::Z => "z",
            Symbol::U => "u",
            Symbol::V => "v",
            Symbol::W => "w",
            Symbol::S => "s",
            Symbol::Named(s) => s,
        }
    }
}

/// Symbolic identity of a variable: its symbol plus the yard-id index tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub symbol: Symbol,
    pub index: Vec<u32>,
}

impl Tag {
    pub fn new(symbol: Symbol, index: &[u32]) -> Tag {
        Tag {
            symbol,
            index: index.to_vec(),
        }
    }

    pub fn named(name: &str) -> Tag {
        Tag {
            symbol: Symbol::Named(name.into()),
            index: Vec::new(),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol.letter())?;
        if !self.index.is_empty() {
            f.write_str("[")?;
            for (k, i) in self.index.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{i}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: VarId,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub tag: Tag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Constraint family name plus index tuple, e.g. `Eq12-intree[5,2]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConstraintLabel {
    pub family: String,
    pub index: Vec<u32>,
}

impl ConstraintLabel {
    pub fn new(family: &str, index: &[u32]) -> Self {
        ConstraintLabel {
            family: family.into(),
            index: index.to_vec(),
        }
    }
}

impl fmt::Display for ConstraintLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family)?;
        if !self.index.is_empty() {
            f.write_str("[")?;
            for (k, i) in self.index.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{i}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    /// Sorted by variable id, no duplicates, no zero coefficients.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub label: ConstraintLabel,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate variable tag {0}")]
    DuplicateTag(String),
    #[error("variable {tag}: invalid bounds [{lower}, {upper}]")]
    Bounds { tag: String, lower: f64, upper: f64 },
    #[error("constraint {label}: unknown variable {var}")]
    UnknownVariable { label: String, var: VarId },
    #[error("constraint {label}: non-finite coefficient")]
    NonFinite { label: String },
}

/// Counts reported for model size comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
}

/// A minimization MILP.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<f64>,
    pub objective_constant: f64,
    tags: BTreeMap<Tag, VarId>,
}

impl MilpModel {
    pub fn new(name: &str) -> Self {
        MilpModel {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Adds a variable. Binary variables get bounds `[0, 1]` regardless of
    /// the bounds passed in.
    pub fn add_var(
        &mut self,
        tag: Tag,
        kind: VarKind,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> Result<VarId, ModelError> {
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        if lower > upper || lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(ModelError::Bounds {
                tag: format!("{tag}"),
                lower,
                upper,
            });
        }
        if self.tags.contains_key(&tag) {
            return Err(ModelError::DuplicateTag(format!("{tag}")));
        }
        let id = self.variables.len();
        self.tags.insert(tag.clone(), id);
        self.variables.push(Variable {
            id,
            kind,
            lower,
            upper,
            tag,
        });
        self.objective.push(cost);
        Ok(id)
    }

    /// Adds a constraint; duplicate terms are merged and zero terms dropped.
    pub fn add_constraint(
        &mut self,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
        label: ConstraintLabel,
    ) -> Result<usize, ModelError> {
        let mut terms: Vec<(VarId, f64)> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            if j >= self.variables.len() {
                return Err(ModelError::UnknownVariable {
                    label: format!("{label}"),
                    var: j,
                });
            }
            if !a.is_finite() {
                return Err(ModelError::NonFinite {
                    label: format!("{label}"),
                });
            }
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite {
                label: format!("{label}"),
            });
        }
        self.constraints.push(LinearConstraint {
            terms: merged,
            sense,
            rhs,
            label,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_cost(&mut self, var: VarId, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// Dense objective coefficients indexed by variable id.
    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn var(&self, tag: &Tag) -> Option<VarId> {
        self.tags.get(tag).copied()
    }

    /// Looks up `symbol[index]`.
    pub fn lookup(&self, symbol: Symbol, index: &[u32]) -> Option<VarId> {
        self.tags.get(&Tag::new(symbol, index)).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.kind.is_integer())
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        self.variables[var].lower = lower;
        self.variables[var].upper = upper;
    }

    /// Objective value including the constant.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// First constraint violated by more than `tol`, if any.
    pub fn first_violation(&self, values: &[f64], tol: f64) -> Option<&LinearConstraint> {
        self.constraints.iter().find(|c| c.violation(values) > tol)
    }

    /// Copy with every integer variable made continuous.
    pub fn relaxed(&self) -> MilpModel {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.kind = VarKind::Continuous;
        }
        m
    }
}

/// Exact size counts of a built model.
pub fn stats(model: &MilpModel) -> ModelStats {
    ModelStats {
        variables: model.num_vars(),
        constraints: model.num_constraints(),
        nonzeros: model.constraints.iter().map(|c| c.terms.len()).sum(),
    }
}

/// Which model a size estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Integrated,
    Path,
    Block,
}

/// Size estimates `(variables, constraints)` for complete enumeration over
/// `v` yards and `e` links.
///
/// * integrated: `v^4 + v^3 + 2v^2e + 3v^2` and
///   `v^4e + 2v^4 + 3v^2e + 2v^3 + 5v^2 + 2v`
/// * path: `v^2e` and `v^3 + v^2 + e`
/// * block: `v^4 + v^3 + 2v^2` and `2v^4 + v^3 + 3v^2 + 2v`
///
/// The integrated constraint estimate does not count the `e` link-capacity
/// rows; see [`integrated_row_accounting`].
pub fn predicted_size(v: u64, e: u64, family: ModelFamily) -> (u64, u64) {
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v3 * v;
    match family {
        ModelFamily::Integrated => (
            v4 + v3 + 2 * v2 * e + 3 * v2,
            v4 * e + 2 * v4 + 3 * v2 * e + 2 * v3 + 5 * v2 + 2 * v,
        ),
        ModelFamily::Path => (v2 * e, v3 + v2 + e),
        ModelFamily::Block => (v4 + v3 + 2 * v2, 2 * v4 + v3 + 3 * v2 + 2 * v),
    }
}

/// Row count per constraint family of the complete-enumeration integrated
/// model, paired with the polynomial term it is accounted under.
pub fn integrated_row_accounting(v: u64, e: u64) -> Vec<(&'static str, &'static str, u64)> {
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v3 * v;
    alloc::vec![
        ("Eq14-consistency", "v^4e", v4 * e),
        ("Eq11-consolidation", "2v^4", v4),
        ("Eq13-provided", "2v^4", v4),
        ("Eq22-linearize", "3v^2e", v2 * e),
        ("Eq23-linearize", "3v^2e", v2 * e),
        ("Eq24-linearize", "3v^2e", v2 * e),
        ("Eq2-flow", "2v^3", v3),
        ("Eq6-chain", "2v^3", v3),
        ("Eq4-detour", "5v^2", v2),
        ("Eq5-frequency", "5v^2", v2),
        ("Eq9-track-lower", "5v^2", v2),
        ("Eq10-track-upper", "5v^2", v2),
        ("Eq12-intree", "5v^2", v2),
        ("Eq7-yard", "2v", v),
        ("Eq8-tracks", "2v", v),
        ("Eq26-link", "(not in estimate)", e),
    ]
}
