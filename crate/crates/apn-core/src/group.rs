//! Cyclic abelian coefficient groups: the integers and the integers mod n.

use std::fmt;

use thiserror::Error;

/// A cyclic group: the integers, or the integers modulo a positive order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CyclicGroup {
    Int,
    Mod(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("elements of different groups combined: {0} vs {1}")]
    Mismatch(CyclicGroup, CyclicGroup),
    #[error("integer overflow in group arithmetic")]
    Overflow,
    #[error("modulus must be at least 1")]
    ZeroModulus,
}

impl fmt::Display for CyclicGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CyclicGroup::Int => write!(f, "Z"),
            CyclicGroup::Mod(n) => write!(f, "Z/{}Z", n),
        }
    }
}

impl CyclicGroup {
    pub fn modulo(order: u64) -> Result<CyclicGroup, GroupError> {
        if order == 0 {
            Err(GroupError::ZeroModulus)
        } else {
            Ok(CyclicGroup::Mod(order))
        }
    }

    /// Canonical representative: the value itself over the integers, the
    /// residue in 0..order over a finite group.
    pub fn canon(&self, value: i128) -> Result<i128, GroupError> {
        match self {
            CyclicGroup::Int => Ok(value),
            CyclicGroup::Mod(n) => {
                let n = *n as i128;
                Ok(value.rem_euclid(n))
            }
        }
    }

    pub fn element(&self, value: i128) -> Result<GroupElement, GroupError> {
        Ok(GroupElement {
            group: *self,
            value: self.canon(value)?,
        })
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            group: *self,
            value: 0,
        }
    }
}

/// An element of a cyclic group, stored in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: CyclicGroup,
    value: i128,
}

impl GroupElement {
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn value(&self) -> i128 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub fn g_add(a: GroupElement, b: GroupElement) -> Result<GroupElement, GroupError> {
    if a.group != b.group {
        return Err(GroupError::Mismatch(a.group, b.group));
    }
    let sum = a.value.checked_add(b.value).ok_or(GroupError::Overflow)?;
    a.group.element(sum)
}

pub fn g_neg(a: GroupElement) -> Result<GroupElement, GroupError> {
    let neg = a.value.checked_neg().ok_or(GroupError::Overflow)?;
    a.group.element(neg)
}

pub fn scalar_mul(z: i128, a: GroupElement) -> Result<GroupElement, GroupError> {
    let prod = z.checked_mul(a.value).ok_or(GroupError::Overflow)?;
    a.group.element(prod)
}

/// The sum over places of ν(p) copies of γ(p). Places missing from either
/// map contribute nothing.
pub fn weighted_coeff_sum<'a, I>(group: CyclicGroup, entries: I) -> Result<GroupElement, GroupError>
where
    I: IntoIterator<Item = (u64, &'a GroupElement)>,
{
    let mut acc = group.zero();
    for (count, coeff) in entries {
        acc = g_add(acc, scalar_mul(count as i128, *coeff)?)?;
    }
    Ok(acc)
}
