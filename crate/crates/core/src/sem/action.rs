use std::fmt;

use super::SemError;

/// Largest intervenable set whose power set is enumerated.
pub const ARM_SPACE_CAP_BITS: u32 = 20;

/// A set of intervened nodes (internal labels) packed into a bit set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InterventionAction(u64);

impl InterventionAction {
    pub const EMPTY: Self = Self(0);

    pub fn from_bits(bits: u64) -> Self {
        Self(bits)
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(nodes: I) -> Self {
        Self(nodes.into_iter().fold(0u64, |acc, i| acc | (1u64 << i)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, node: usize) -> bool {
        (self.0 >> node) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn nodes(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |&i| (bits >> i) & 1 == 1)
    }

    /// Zero-padded binary string of `width` digits, most significant node first.
    pub fn to_bit_string(self, width: usize) -> String {
        format!("{:0width$b}", self.0, width = width)
    }

    pub fn parse_bit_string(s: &str) -> Option<Self> {
        u64::from_str_radix(s, 2).ok().map(Self)
    }
}

impl fmt::Display for InterventionAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.nodes().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// All subsets of `intervenable`, ascending by bitmask.
pub fn enumerate_actions(intervenable: InterventionAction) -> Result<Vec<InterventionAction>, SemError> {
    let bits: Vec<usize> = intervenable.nodes().collect();
    if bits.len() as u32 > ARM_SPACE_CAP_BITS {
        return Err(SemError::ArmSpaceTooLarge { intervenable: bits.len(), cap: ARM_SPACE_CAP_BITS as usize });
    }
    // Depositing the counter's bits into the intervenable positions is
    // monotone, so counting up yields ascending bitmasks.
    let arms = (0u64..1 << bits.len())
        .map(|k| {
            let mask = bits
                .iter()
                .enumerate()
                .filter(|(j, _)| (k >> j) & 1 == 1)
                .fold(0u64, |acc, (_, &node)| acc | (1u64 << node));
            InterventionAction(mask)
        })
        .collect();
    Ok(arms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_intervenable_gives_single_arm() {
        assert_eq!(enumerate_actions(InterventionAction::EMPTY).unwrap(), vec![InterventionAction::EMPTY]);
    }

    #[test]
    fn ascending_and_complete() {
        let set = InterventionAction::from_nodes([1, 3, 4]);
        let arms = enumerate_actions(set).unwrap();
        assert_eq!(arms.len(), 8);
        assert!(arms.windows(2).all(|w| w[0] < w[1]));
        assert!(arms.iter().all(|a| a.is_subset_of(set)));
    }

    #[test]
    fn cap_enforced() {
        let set = InterventionAction::from_nodes(0..21);
        assert!(matches!(enumerate_actions(set), Err(SemError::ArmSpaceTooLarge { .. })));
        let set = InterventionAction::from_nodes(0..3);
        assert_eq!(enumerate_actions(set).unwrap().len(), 8);
    }

    #[test]
    fn bit_string_round_trip() {
        let a = InterventionAction::from_nodes([0, 2]);
        assert_eq!(a.to_bit_string(4), "0101");
        assert_eq!(InterventionAction::parse_bit_string("0101"), Some(a));
        assert_eq!(a.to_string(), "{0,2}");
    }
}
