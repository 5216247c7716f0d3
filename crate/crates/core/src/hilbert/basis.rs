use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tensor factor of a composite Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subsystem {
    /// Bosonic mode truncated at `cutoff` excitations (dimension `cutoff + 1`).
    Fock { cutoff: usize },
    /// Two-level system, levels `|0⟩` and `|1⟩`.
    Qubit,
    /// Symmetric Dicke manifold of `n_atoms` two-level atoms (spin `n_atoms / 2`).
    /// Index `k` counts excitations, so `J_z = k - n_atoms / 2`.
    Spin { n_atoms: usize },
}

impl Subsystem {
    pub fn fock(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::Domain("Fock cutoff must be at least 1".into()));
        }
        Ok(Subsystem::Fock { cutoff })
    }

    pub fn spin(n_atoms: usize) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::Domain(
                "collective spin needs at least one atom".into(),
            ));
        }
        Ok(Subsystem::Spin { n_atoms })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Subsystem::Fock { cutoff } => cutoff + 1,
            Subsystem::Qubit => 2,
            Subsystem::Spin { n_atoms } => n_atoms + 1,
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::Fock { cutoff } => write!(f, "Fock({cutoff})"),
            Subsystem::Qubit => write!(f, "Qubit"),
            Subsystem::Spin { n_atoms } => write!(f, "Spin({n_atoms})"),
        }
    }
}

/// Ordered list of tensor factors. Amplitudes are laid out row-major over the
/// factors as listed: the last factor varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    factors: Vec<Subsystem>,
}

impl Basis {
    pub fn new(factors: Vec<Subsystem>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Domain("basis needs at least one factor".into()));
        }
        for f in &factors {
            match *f {
                Subsystem::Fock { cutoff } if cutoff < 1 => {
                    return Err(Error::Domain("Fock cutoff must be at least 1".into()))
                }
                Subsystem::Spin { n_atoms } if n_atoms < 1 => {
                    return Err(Error::Domain(
                        "collective spin needs at least one atom".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(Basis { factors })
    }

    pub fn single(factor: Subsystem) -> Self {
        Basis {
            factors: vec![factor],
        }
    }

    pub fn factors(&self) -> &[Subsystem] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> Option<Subsystem> {
        self.factors.get(index).copied()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(Subsystem::dim).product()
    }

    /// Concatenation of factor lists, `self` first.
    pub fn product(&self, other: &Basis) -> Basis {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Basis { factors }
    }

    /// Stride of factor `index` in the flattened amplitude vector.
    pub fn stride(&self, index: usize) -> usize {
        self.factors[index + 1..]
            .iter()
            .map(Subsystem::dim)
            .product()
    }

    /// Level of factor `index` encoded in flat position `flat`.
    pub fn level(&self, flat: usize, index: usize) -> usize {
        (flat / self.stride(index)) % self.factors[index].dim()
    }

    /// Basis with factor `index` removed. `None` when it is the only factor.
    pub fn without(&self, index: usize) -> Option<Basis> {
        if self.factors.len() < 2 || index >= self.factors.len() {
            return None;
        }
        let mut factors = self.factors.clone();
        factors.remove(index);
        Some(Basis { factors })
    }

    pub(crate) fn ensure_same(&self, other: &Basis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl From<Subsystem> for Basis {
    fn from(factor: Subsystem) -> Self {
        Basis::single(factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product_of_factor_dims() {
        let b = Basis::new(vec![
            Subsystem::Qubit,
            Subsystem::Fock { cutoff: 40 },
            Subsystem::Spin { n_atoms: 3 },
        ])
        .unwrap();
        assert_eq!(b.total_dim(), 2 * 41 * 4);
    }

    #[test]
    fn rejects_degenerate_factors() {
        assert!(Subsystem::fock(0).is_err());
        assert!(Subsystem::spin(0).is_err());
        assert!(Basis::new(vec![Subsystem::Fock { cutoff: 0 }]).is_err());
        assert!(Basis::new(vec![]).is_err());
    }

    #[test]
    fn row_major_levels() {
        let b = Basis::new(vec![Subsystem::Qubit, Subsystem::Fock { cutoff: 2 }]).unwrap();
        assert_eq!(b.stride(0), 3);
        assert_eq!(b.stride(1), 1);
        // flat 4 = qubit 1, fock 1
        assert_eq!(b.level(4, 0), 1);
        assert_eq!(b.level(4, 1), 1);
    }
}
