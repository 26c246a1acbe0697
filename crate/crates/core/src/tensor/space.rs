use serde::{Deserialize, Serialize};

/// A single bosonic mode truncated at `n_max` photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpace {
    pub n_max: usize,
}

impl ModeSpace {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Tensor product of truncated modes.
///
/// Basis ordering: mode 0 is the slowest-varying index, so `|n0, n1, ..>` is
/// enumerated with `n0` outermost (row-major over the occupation tuple).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositeSpace {
    modes: Vec<ModeSpace>,
}

impl CompositeSpace {
    pub fn new(modes: Vec<ModeSpace>) -> Self {
        Self { modes }
    }

    pub fn uniform(n_modes: usize, n_max: usize) -> Self {
        Self::new(vec![ModeSpace::new(n_max); n_modes])
    }

    pub fn single(mode: ModeSpace) -> Self {
        Self::new(vec![mode])
    }

    pub fn modes(&self) -> &[ModeSpace] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.modes.iter().map(ModeSpace::dim).product()
    }

    /// Total dimension, or `None` on overflow.
    pub fn checked_total_dim(&self) -> Option<usize> {
        self.modes
            .iter()
            .try_fold(1usize, |acc, m| acc.checked_mul(m.dim()))
    }

    /// Distance in the flat index between consecutive occupations of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.modes[mode + 1..].iter().map(ModeSpace::dim).product()
    }

    /// Flat basis index of an occupation tuple, or `None` if any entry exceeds its truncation.
    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.modes.len() {
            return None;
        }
        let mut idx = 0;
        for (n, m) in occupation.iter().zip(&self.modes) {
            if *n > m.n_max {
                return None;
            }
            idx = idx * m.dim() + n;
        }
        Some(idx)
    }

    pub fn occupation(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes.len()];
        for (slot, m) in occ.iter_mut().zip(&self.modes).rev() {
            *slot = index % m.dim();
            index /= m.dim();
        }
        occ
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_multiply() {
        let s = CompositeSpace::new(vec![
            ModeSpace::new(1),
            ModeSpace::new(2),
            ModeSpace::new(0),
        ]);
        assert_eq!(s.total_dim(), 6);
        assert_eq!(s.stride(0), 3);
        assert_eq!(s.stride(1), 1);
        assert_eq!(s.stride(2), 1);
    }

    #[test]
    fn index_round_trip() {
        let s = CompositeSpace::new(vec![ModeSpace::new(2), ModeSpace::new(3)]);
        for i in 0..s.total_dim() {
            assert_eq!(s.index_of(&s.occupation(i)), Some(i));
        }
        // mode 0 outermost
        assert_eq!(s.index_of(&[1, 0]), Some(4));
        assert_eq!(s.index_of(&[0, 1]), Some(1));
        assert_eq!(s.index_of(&[3, 0]), None);
    }

    #[test]
    fn vacuum_only_mode_has_dim_one() {
        assert_eq!(ModeSpace::new(0).dim(), 1);
    }
}
