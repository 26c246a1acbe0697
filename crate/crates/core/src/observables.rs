//! Photon-number statistics and moments read off a density matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{monitor_invariants, InvariantRecord};
use crate::state::DensityMatrix;

/// `P(n_s, n_i) = <n_s n_i| rho |n_s n_i>` for a two-mode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointNumberTable {
    signal_levels: usize,
    idler_levels: usize,
    /// Row-major over `(n_s, n_i)`.
    probs: Vec<f64>,
}

impl JointNumberTable {
    pub fn signal_levels(&self) -> usize {
        self.signal_levels
    }

    pub fn idler_levels(&self) -> usize {
        self.idler_levels
    }

    pub fn get(&self, n_s: usize, n_i: usize) -> f64 {
        self.probs[n_s * self.idler_levels + n_i]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Iterates `(n_s, n_i, P)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, &p)| (k / self.idler_levels, k % self.idler_levels, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean_signal(&self) -> f64 {
        self.entries().map(|(s, _, p)| s as f64 * p).sum()
    }

    pub fn mean_idler(&self) -> f64 {
        self.entries().map(|(_, i, p)| i as f64 * p).sum()
    }
}

fn require_two_modes(rho: &DensityMatrix) -> Result<()> {
    let n = rho.space().n_modes();
    if n == 2 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: "two-mode observable",
            expected: 2,
            found: n,
        })
    }
}

pub fn joint_number_distribution(rho: &DensityMatrix) -> Result<JointNumberTable> {
    require_two_modes(rho)?;
    let modes = rho.space().modes();
    Ok(JointNumberTable {
        signal_levels: modes[0].dim(),
        idler_levels: modes[1].dim(),
        probs: rho.matrix().diag().iter().map(|z| z.re).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldingMetrics {
    /// `sum_{n >= 1} P(n, n)`
    pub p_coincidence: f64,
    /// `sum_{n_s != n_i} P(n_s, n_i)`
    pub p_mismatch: f64,
    /// Probability that exactly one arm fires: `P(n_s = 0, n_i >= 1) + P(n_s >= 1, n_i = 0)`.
    pub p_false_herald: f64,
}

pub fn heralding_metrics(table: &JointNumberTable) -> HeraldingMetrics {
    let mut m = HeraldingMetrics {
        p_coincidence: 0.0,
        p_mismatch: 0.0,
        p_false_herald: 0.0,
    };
    for (s, i, p) in table.entries() {
        if s == i {
            if s >= 1 {
                m.p_coincidence += p;
            }
        } else {
            m.p_mismatch += p;
            if s == 0 || i == 0 {
                m.p_false_herald += p;
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMoments {
    pub b_s: Complex64,
    pub b_i: Complex64,
    pub n_s: f64,
    pub n_i: f64,
}

pub fn first_moments(rho: &DensityMatrix) -> Result<FirstMoments> {
    require_two_modes(rho)?;
    Ok(FirstMoments {
        b_s: mode_field_mean(rho, 0),
        b_i: mode_field_mean(rho, 1),
        n_s: mode_number_mean(rho, 0),
        n_i: mode_number_mean(rho, 1),
    })
}

/// `Tr(a_k rho)`, summed directly over the one off-diagonal band `a_k` occupies.
pub fn mode_field_mean(rho: &DensityMatrix, mode: usize) -> Complex64 {
    let space = rho.space();
    let stride = space.stride(mode);
    let m = rho.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for col in 0..space.total_dim() {
        let n = space.occupation(col)[mode];
        if n > 0 {
            acc += m[(col, col - stride)] * (n as f64).sqrt();
        }
    }
    acc
}

/// `Tr(n_k rho)` from the diagonal.
pub fn mode_number_mean(rho: &DensityMatrix, mode: usize) -> f64 {
    let space = rho.space();
    let m = rho.matrix();
    (0..space.total_dim())
        .map(|k| space.occupation(k)[mode] as f64 * m[(k, k)].re)
        .sum()
}

/// Everything recorded at a trajectory sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    /// Present only for two-mode states.
    pub joint: Option<JointNumberTable>,
    pub mean_numbers: Vec<f64>,
    pub mean_fields: Vec<Complex64>,
    pub invariants: InvariantRecord,
}

impl ObservableRecord {
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.space().n_modes();
        let joint = if n == 2 {
            Some(joint_number_distribution(rho)?)
        } else {
            None
        };
        Ok(Self {
            joint,
            mean_numbers: (0..n).map(|k| mode_number_mean(rho, k)).collect(),
            mean_fields: (0..n).map(|k| mode_field_mean(rho, k)).collect(),
            invariants: monitor_invariants(rho),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{expectation, mode_annihilation, mode_number, CMatrix, CompositeSpace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_mode(n_max: usize) -> CompositeSpace {
        CompositeSpace::uniform(2, n_max)
    }

    #[test]
    fn vacuum_table_and_metrics() {
        let rho = DensityMatrix::vacuum(two_mode(3));
        let t = joint_number_distribution(&rho).unwrap();
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.total(), 1.0);
        let m = heralding_metrics(&t);
        assert_eq!(
            (m.p_coincidence, m.p_mismatch, m.p_false_herald),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn split_photon_table() {
        let s = two_mode(2);
        let rho = DensityMatrix::mixture(&[
            (0.5, DensityMatrix::fock(s.clone(), &[1, 0]).unwrap()),
            (0.5, DensityMatrix::fock(s, &[0, 1]).unwrap()),
        ])
        .unwrap();
        let t = joint_number_distribution(&rho).unwrap();
        assert_eq!(t.get(1, 0), 0.5);
        assert_eq!(t.get(0, 1), 0.5);
        let m = heralding_metrics(&t);
        assert_eq!(m.p_mismatch, 1.0);
        assert_eq!(m.p_false_herald, 1.0);
        assert!((m.p_coincidence + m.p_mismatch + t.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_mode_count_is_rejected() {
        let rho = DensityMatrix::vacuum(CompositeSpace::uniform(3, 1));
        assert!(joint_number_distribution(&rho).is_err());
        assert!(first_moments(&rho).is_err());
        // The per-sample record still works and just omits the table.
        let rec = ObservableRecord::from_state(&rho).unwrap();
        assert!(rec.joint.is_none());
        assert_eq!(rec.mean_numbers.len(), 3);
    }

    #[test]
    fn fock_moments() {
        let rho = DensityMatrix::fock(two_mode(2), &[1, 0]).unwrap();
        let m = first_moments(&rho).unwrap();
        assert_eq!((m.n_s, m.n_i), (1.0, 0.0));
        assert_eq!(m.b_s, Complex64::new(0.0, 0.0));
        assert_eq!(m.b_i, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coherent_amplitude_is_recovered() {
        let rho = DensityMatrix::coherent(
            two_mode(6),
            &[Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let m = first_moments(&rho).unwrap();
        assert!((m.b_s - Complex64::new(0.1, 0.0)).norm() < 1e-6);
        assert!(m.b_i.norm() < 1e-15);
    }

    #[test]
    fn two_mode_squeezed_vacuum_is_diagonal_correlated() {
        let r: f64 = 0.5;
        let space = two_mode(12);
        let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
        for n in 0..=12 {
            amps[space.index_of(&[n, n]).unwrap()] = Complex64::new(r.tanh().powi(n as i32), 0.0);
        }
        let rho = DensityMatrix::pure(space, &amps).unwrap();
        let t = joint_number_distribution(&rho).unwrap();
        let m = heralding_metrics(&t);
        assert_eq!(m.p_mismatch, 0.0);
        assert_eq!(m.p_false_herald, 0.0);
    }

    #[test]
    fn band_sums_match_operator_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let space = CompositeSpace::new(vec![
            crate::tensor::ModeSpace::new(2),
            crate::tensor::ModeSpace::new(3),
        ]);
        let d = space.total_dim();
        let a = CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut m = &a * &a.dagger();
        m = m.scale(m.trace().inv());
        m.hermitize();
        let rho = DensityMatrix::from_matrix(space.clone(), m).unwrap();
        let t = joint_number_distribution(&rho).unwrap();
        assert!((t.total() - rho.trace().re).abs() < 1e-12);
        let fm = first_moments(&rho).unwrap();
        for (k, (b, n)) in [(fm.b_s, fm.n_s), (fm.b_i, fm.n_i)].into_iter().enumerate() {
            let bo = expectation(&mode_annihilation(&space, k).unwrap(), &rho).unwrap();
            let no = expectation(&mode_number(&space, k).unwrap(), &rho).unwrap();
            assert!((b - bo).norm() < 1e-14);
            assert!((n - no.re).abs() < 1e-12);
        }
        assert!((t.mean_signal() - fm.n_s).abs() < 1e-12);
        assert!((t.mean_idler() - fm.n_i).abs() < 1e-12);
        assert!(t.probs().iter().all(|&p| p >= -1e-10));
    }
}
