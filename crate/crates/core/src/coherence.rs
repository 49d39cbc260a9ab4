//! Relative entropy of coherence and its decomposition across a qubit register.
//!
//! With `C(ρ) = S(ρ_d) - S(ρ)` in the computational basis, the coherence
//! carried by a partition `B1|B2|...` of the register is
//! `C(ρ) - C(ρ_B1 ⊗ ρ_B2 ⊗ ...)`. Because both von Neumann and Shannon
//! entropies are additive on product states, `C` of a product is the sum of
//! the block coherences, which is how every partition quantity below is
//! evaluated. The finest partition yields the global coherence `C_G`; the
//! remainder `C_L = Σ_j C(ρ_j)` is the local coherence.
//!
//! For three qubits the global coherence splits exactly as
//! `C_G = C_{1:23} + C_{2:3}` (chain rule), and the monogamy of coherence is
//! `M = C_{1:2} + C_{1:3} - C_{1:23}`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::qlinalg::{dephased_entropy, partial_trace, von_neumann_entropy, DensityMatrix};
use crate::reservoir::probe_all;
use crate::{Error, Result};

/// `|M|` below this is reported as [`MonogamyClass::Degenerate`].
pub const MONOGAMY_ZERO_TOL: f64 = 1e-9;

/// Ordered, disjoint blocks of qubit indices covering the whole register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n_qubits: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Validation("partition contains an empty block".into()));
            }
            for &q in block {
                if q == 0 || q > n_qubits {
                    return Err(Error::IndexOutOfRange { index: q, n_qubits });
                }
                if !seen.insert(q) {
                    return Err(Error::Validation(format!("qubit {q} appears in more than one block")));
                }
            }
        }
        if seen.len() != n_qubits {
            return Err(Error::Validation(format!("partition covers {} of {n_qubits} qubits", seen.len())));
        }
        Ok(Self { blocks })
    }

    /// `{1}{2}...{n}`.
    pub fn finest(n_qubits: usize) -> Self {
        Self { blocks: (1..=n_qubits).map(|q| vec![q]).collect() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_qubits(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

/// Total relative entropy of coherence `S(ρ_d) - S(ρ)`, in bits.
pub fn total_coherence(rho: &DensityMatrix) -> f64 {
    dephased_entropy(rho) - von_neumann_entropy(rho)
}

fn marginal_coherences(rho: &DensityMatrix) -> Result<Vec<f64>> {
    (1..=rho.n_qubits()).map(|q| Ok(total_coherence(&partial_trace(rho, &[q])?))).collect()
}

/// Local coherence: coherence of the product of single-qubit marginals.
pub fn local_coherence(rho: &DensityMatrix) -> f64 {
    if rho.n_qubits() == 1 {
        return total_coherence(rho);
    }
    marginal_coherences(rho).expect("marginal indices are in range").iter().sum()
}

/// Global coherence `C - C_L`.
pub fn global_coherence(rho: &DensityMatrix) -> f64 {
    total_coherence(rho) - local_coherence(rho)
}

/// Coherence shared between the blocks of `p`: `C(ρ) - Σ_blocks C(ρ_block)`.
pub fn partition_global(rho: &DensityMatrix, p: &Partition) -> Result<f64> {
    if p.n_qubits() != rho.n_qubits() {
        return Err(Error::Validation(format!(
            "partition covers {} qubits, state has {}",
            p.n_qubits(),
            rho.n_qubits()
        )));
    }
    let mut blocks = 0.0;
    for block in p.blocks() {
        blocks += total_coherence(&partial_trace(rho, block)?);
    }
    Ok(total_coherence(rho) - blocks)
}

/// Bipartite global coherence `C_{i:j} = C_G(ρ_ij)`.
pub fn pairwise_global(rho: &DensityMatrix, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::Validation(format!("pairwise coherence needs distinct qubits, got {i} twice")));
    }
    Ok(global_coherence(&partial_trace(rho, &[i, j])?))
}

fn require_three(rho: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != 3 {
        return Err(Error::Validation(format!("operation defined for 3 qubits, state has {}", rho.n_qubits())));
    }
    Ok(())
}

/// `C_{1:23}`.
pub fn one_vs_rest(rho: &DensityMatrix) -> Result<f64> {
    require_three(rho)?;
    partition_global(rho, &Partition { blocks: vec![vec![1], vec![2, 3]] })
}

/// Tripartite and bipartite aggregates `(C_TG, C_BG)` of a three-qubit state,
/// with `C_TG = C_{2:3} + C_{1:23}` and `C_BG = C_{1:2} + C_{1:3} + C_{2:3}`.
pub fn aggregates(rho: &DensityMatrix) -> Result<(f64, f64)> {
    require_three(rho)?;
    let c12 = pairwise_global(rho, 1, 2)?;
    let c13 = pairwise_global(rho, 1, 3)?;
    let c23 = pairwise_global(rho, 2, 3)?;
    Ok((c23 + one_vs_rest(rho)?, c12 + c13 + c23))
}

/// Monogamy of coherence about qubit `focus`:
/// `M = C_{f:a} + C_{f:b} - C_{f:ab}` where `a < b` are the other two qubits.
pub fn monogamy(rho: &DensityMatrix, focus: usize) -> Result<f64> {
    require_three(rho)?;
    if !(1..=3).contains(&focus) {
        return Err(Error::IndexOutOfRange { index: focus, n_qubits: 3 });
    }
    let others: Vec<usize> = (1..=3).filter(|&q| q != focus).collect();
    let split = Partition { blocks: vec![vec![focus], others.clone()] };
    Ok(pairwise_global(rho, focus, others[0])? + pairwise_global(rho, focus, others[1])?
        - partition_global(rho, &split)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonogamyClass {
    /// `M < 0`
    Monogamous,
    /// `M > 0`
    Polygamous,
    /// `|M|` below [`MONOGAMY_ZERO_TOL`].
    Degenerate,
}

pub fn classify_monogamy(m: f64) -> MonogamyClass {
    if m.abs() < MONOGAMY_ZERO_TOL {
        MonogamyClass::Degenerate
    } else if m < 0.0 {
        MonogamyClass::Monogamous
    } else {
        MonogamyClass::Polygamous
    }
}

/// Distribution of coherence over the seven groupings of a three-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceTuple {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    /// `C - Σ c_j - Σ c_ij`; may be negative.
    pub c123: f64,
    /// Largest inconsistency of the probe reconstruction (zero for the direct route).
    pub residual: f64,
}

impl CoherenceTuple {
    /// Components in the order `c1, c2, c3, c12, c13, c23, c123`.
    pub fn components(&self) -> [f64; 7] {
        [self.c1, self.c2, self.c3, self.c12, self.c13, self.c23, self.c123]
    }

    fn from_components(c: &[f64], residual: f64) -> Self {
        Self { c1: c[0], c2: c[1], c3: c[2], c12: c[3], c13: c[4], c23: c[5], c123: c[6], residual }
    }

    pub fn max_abs_diff(&self, other: &CoherenceTuple) -> f64 {
        self.components().iter().zip(other.components()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Seven-tuple evaluated from reduced states.
pub fn tuple_direct(rho: &DensityMatrix) -> Result<CoherenceTuple> {
    require_three(rho)?;
    let local = marginal_coherences(rho)?;
    let pairs = [pairwise_global(rho, 1, 2)?, pairwise_global(rho, 1, 3)?, pairwise_global(rho, 2, 3)?];
    let c123 = total_coherence(rho) - local.iter().sum::<f64>() - pairs.iter().sum::<f64>();
    Ok(CoherenceTuple::from_components(&[local[0], local[1], local[2], pairs[0], pairs[1], pairs[2], c123], 0.0))
}

/// Probe combinations used by [`tuple_probe`], starting with the unprobed state.
pub const PROBE_SETS: [&[usize]; 8] = [&[], &[1], &[2], &[3], &[1, 2], &[1, 3], &[2, 3], &[1, 2, 3]];

/// Qubits each tuple component depends on, in [`CoherenceTuple::components`] order.
const COMPONENT_SUPPORT: [&[usize]; 7] = [&[1], &[2], &[3], &[1, 2], &[1, 3], &[2, 3], &[1, 2, 3]];

/// Total coherence after each probe combination in [`PROBE_SETS`].
pub fn probe_observations(rho: &DensityMatrix) -> Result<[f64; 8]> {
    require_three(rho)?;
    let mut obs = [0.0; 8];
    for (o, sites) in obs.iter_mut().zip(PROBE_SETS) {
        *o = total_coherence(&probe_all(rho, sites)?);
    }
    Ok(obs)
}

/// Seven-tuple reconstructed from infinite-time probes.
///
/// Each observation is modelled as the sum of the components whose support
/// avoids every probed qubit; the over-determined system is solved by least
/// squares and `residual` holds the largest equation mismatch.
pub fn tuple_probe(rho: &DensityMatrix) -> Result<CoherenceTuple> {
    let obs = probe_observations(rho)?;
    let design = DMatrix::from_fn(PROBE_SETS.len(), COMPONENT_SUPPORT.len(), |r, c| {
        let untouched = COMPONENT_SUPPORT[c].iter().all(|q| !PROBE_SETS[r].contains(q));
        if untouched {
            1.0
        } else {
            0.0
        }
    });
    let rhs = DVector::from_column_slice(&obs);
    let x = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::NumericalContract(format!("probe least squares failed: {e}")))?;
    let residual = (&design * &x - &rhs).amax();
    Ok(CoherenceTuple::from_components(x.as_slice(), residual))
}

/// Quantities reported for the three-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripartiteRecord {
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    pub c1_23: f64,
    pub tg: f64,
    pub bg: f64,
    pub monogamy: f64,
}

/// Every coherence quantity at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceRecord {
    pub total: f64,
    pub local: f64,
    pub global: f64,
    /// Present only for three-qubit registers.
    pub tripartite: Option<TripartiteRecord>,
}

impl CoherenceRecord {
    pub fn evaluate(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.n_qubits();
        let total = total_coherence(rho);
        let marg = if n == 1 { vec![total] } else { marginal_coherences(rho)? };
        let local: f64 = marg.iter().sum();
        let global = total - local;
        let tripartite = if n == 3 {
            // Pair marginals share their single-qubit marginals with ρ.
            let pair = |i: usize, j: usize| -> Result<f64> {
                Ok(total_coherence(&partial_trace(rho, &[i, j])?) - marg[i - 1] - marg[j - 1])
            };
            let c23_total = total_coherence(&partial_trace(rho, &[2, 3])?);
            let c12 = pair(1, 2)?;
            let c13 = pair(1, 3)?;
            let c23 = c23_total - marg[1] - marg[2];
            let c1_23 = total - marg[0] - c23_total;
            Some(TripartiteRecord {
                c12,
                c13,
                c23,
                c1_23,
                tg: c23 + c1_23,
                bg: c12 + c13 + c23,
                monogamy: c12 + c13 - c1_23,
            })
        } else {
            None
        };
        Ok(Self { total, local, global, tripartite })
    }

    pub fn is_finite(&self) -> bool {
        let base = self.total.is_finite() && self.local.is_finite() && self.global.is_finite();
        base && self
            .tripartite
            .is_none_or(|t| [t.c12, t.c13, t.c23, t.c1_23, t.tg, t.bg, t.monogamy].iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{relative_entropy, tensor_product, ComplexMatrix};
    use crate::reservoir::probe;
    use crate::states::{
        density_of, named_state, product_density, product_state, random_mixed_state, random_pure_state, NamedState,
        PureState,
    };
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn named(name: NamedState) -> DensityMatrix {
        density_of(&named_state(name, 3).unwrap())
    }

    fn log2(x: f64) -> f64 {
        x.log2()
    }

    /// Binary entropy in bits.
    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn plus() -> PureState {
        PureState::normalized(vec![Complex64::new(1.0, 0.0); 2]).unwrap()
    }

    fn bell_psi_plus() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        PureState::new(vec![z, Complex64::new(s, 0.0), Complex64::new(s, 0.0), z]).unwrap()
    }

    fn random_product(seed: u64) -> DensityMatrix {
        let factors: Vec<DensityMatrix> =
            (0..3).map(|k| random_mixed_state(1, 1 + (k % 2) as usize, seed * 3 + k).unwrap()).collect();
        product_density(&factors).unwrap()
    }

    #[test]
    fn total_coherence_of_named_states() {
        assert!((total_coherence(&named(NamedState::Ghz)) - 1.0).abs() < 1e-12);
        assert!((total_coherence(&named(NamedState::W)) - log2(3.0)).abs() < 1e-12);
        assert!((total_coherence(&named(NamedState::WWBar)) - log2(6.0)).abs() < 1e-12);
    }

    #[test]
    fn local_and_global_of_named_states() {
        assert!(local_coherence(&named(NamedState::W)).abs() < 1e-12);
        assert!(local_coherence(&named(NamedState::Ghz)).abs() < 1e-12);
        // marginal [[1/2, 1/3], [1/3, 1/2]] has eigenvalues 5/6, 1/6
        let expected_local = 3.0 * (1.0 - h2(5.0 / 6.0));
        let ww = named(NamedState::WWBar);
        assert!((local_coherence(&ww) - expected_local).abs() < 1e-12);
        assert!((expected_local - 1.049_94).abs() < 1e-4);
        assert!((global_coherence(&ww) - (log2(6.0) - expected_local)).abs() < 1e-12);
        assert!((global_coherence(&named(NamedState::W)) - log2(3.0)).abs() < 1e-12);
        assert!(global_coherence(&random_product(4)).abs() < 1e-10);
    }

    #[test]
    fn local_coherence_equals_coherence_of_marginal_product() {
        for seed in 0..10 {
            let rho = density_of(&random_pure_state(3, seed).unwrap());
            let marg: Vec<DensityMatrix> = (1..=3).map(|q| partial_trace(&rho, &[q]).unwrap()).collect();
            let pi = product_density(&marg).unwrap();
            let via_product = relative_entropy(&pi, &pi.dephase()).unwrap();
            let via_sum: f64 = marg.iter().map(total_coherence).sum();
            assert!((via_product - via_sum).abs() < 1e-10);
            assert!((local_coherence(&rho) - via_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_examples() {
        let w = named(NamedState::W);
        let fine = partition_global(&w, &Partition::finest(3)).unwrap();
        assert!((fine - global_coherence(&w)).abs() < 1e-12);
        let split = Partition::new(3, vec![vec![1], vec![2, 3]]).unwrap();
        assert!((partition_global(&w, &split).unwrap() - (log2(3.0) - 2.0 / 3.0)).abs() < 1e-12);

        let rho1 = random_mixed_state(1, 2, 9).unwrap();
        let rho23 = random_mixed_state(2, 3, 10).unwrap();
        let prod = rho1.tensor(&rho23);
        assert!(partition_global(&prod, &split).unwrap().abs() < 1e-10);
    }

    #[test]
    fn partition_matches_explicit_product_for_contiguous_blocks() {
        let rho = random_mixed_state(3, 4, 77).unwrap();
        let split = Partition::new(3, vec![vec![1, 2], vec![3]]).unwrap();
        let r12 = partial_trace(&rho, &[1, 2]).unwrap();
        let r3 = partial_trace(&rho, &[3]).unwrap();
        let prod = DensityMatrix::new(tensor_product(r12.matrix(), r3.matrix())).unwrap();
        let expected = total_coherence(&rho) - total_coherence(&prod);
        assert!((partition_global(&rho, &split).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![1], vec![1, 2, 3]]).is_err());
        assert!(Partition::new(3, vec![vec![1], vec![2]]).is_err());
        assert!(Partition::new(3, vec![vec![1], vec![], vec![2, 3]]).is_err());
        assert!(matches!(Partition::new(3, vec![vec![4], vec![1, 2, 3]]), Err(Error::IndexOutOfRange { .. })));
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(partition_global(&rho, &Partition::finest(3)).is_err());
    }

    #[test]
    fn pairwise_examples() {
        let w = named(NamedState::W);
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            assert!((pairwise_global(&w, i, j).unwrap() - 2.0 / 3.0).abs() < 1e-12);
            assert!(pairwise_global(&named(NamedState::Ghz), i, j).unwrap().abs() < 1e-12);
            assert!(pairwise_global(&random_product(1), i, j).unwrap().abs() < 1e-10);
        }
        assert!(pairwise_global(&w, 2, 2).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let (tg, bg) = aggregates(&named(NamedState::Ghz)).unwrap();
        assert!((tg - 1.0).abs() < 1e-12 && bg.abs() < 1e-12);
        let (tg, bg) = aggregates(&named(NamedState::W)).unwrap();
        assert!((tg - log2(3.0)).abs() < 1e-12 && (bg - 2.0).abs() < 1e-12);
        let (tg, bg) = aggregates(&random_product(2)).unwrap();
        assert!(tg.abs() < 1e-10 && bg.abs() < 1e-10);
        assert!(aggregates(&DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn monogamy_examples() {
        let m_ghz = monogamy(&named(NamedState::Ghz), 1).unwrap();
        assert!((m_ghz + 1.0).abs() < 1e-12);
        assert_eq!(classify_monogamy(m_ghz), MonogamyClass::Monogamous);
        let m_w = monogamy(&named(NamedState::W), 1).unwrap();
        assert!((m_w - (2.0 - log2(3.0))).abs() < 1e-12);
        assert_eq!(classify_monogamy(m_w), MonogamyClass::Polygamous);

        let diag1 =
            DensityMatrix::new(ComplexMatrix::from_diagonal(&[Complex64::new(0.3, 0.0), Complex64::new(0.7, 0.0)]))
                .unwrap();
        let rho = diag1.tensor(&density_of(&bell_psi_plus()));
        let m = monogamy(&rho, 1).unwrap();
        assert!(m.abs() < 1e-12);
        assert_eq!(classify_monogamy(m), MonogamyClass::Degenerate);
        assert!(monogamy(&rho, 4).is_err());
        // permutation-symmetric: every focus agrees
        for f in 2..=3 {
            assert!((monogamy(&named(NamedState::W), f).unwrap() - m_w).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_tuple_examples() {
        let t = tuple_direct(&named(NamedState::Ghz)).unwrap();
        let expect = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!(t.components().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12));

        let t = tuple_direct(&named(NamedState::W)).unwrap();
        let third = 2.0 / 3.0;
        let expect = [0.0, 0.0, 0.0, third, third, third, log2(3.0) - 2.0];
        assert!(t.components().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(t.c123 < 0.0);

        let prod = random_product(5);
        let t = tuple_direct(&prod).unwrap();
        for q in 1..=3 {
            let cq = total_coherence(&partial_trace(&prod, &[q]).unwrap());
            assert!((t.components()[q - 1] - cq).abs() < 1e-12);
        }
        assert!(t.components()[3..].iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn probe_tuple_examples() {
        let pluses = density_of(&product_state(&[plus(), plus(), plus()]).unwrap());
        let t = tuple_probe(&pluses).unwrap();
        assert!(t.residual < 1e-9);
        let expect = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert!(t.components().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-9));

        let zero = PureState::basis("0").unwrap();
        let bell = density_of(&product_state(&[zero, bell_psi_plus()]).unwrap());
        let t = tuple_probe(&bell).unwrap();
        assert!(t.residual < 1e-9);
        let expect = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert!(t.components().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-9), "{t:?}");

        let w = named(NamedState::W);
        let t = tuple_probe(&w).unwrap();
        assert!(t.residual.is_finite() && t.residual >= 0.0);
        for c in [t.c12, t.c13, t.c23] {
            assert!((c - 2.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_observations_of_w() {
        let obs = probe_observations(&named(NamedState::W)).unwrap();
        let third = 2.0 / 3.0;
        let expect = [log2(3.0), third, third, third, 0.0, 0.0, 0.0, 0.0];
        assert!(obs.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12), "{obs:?}");
    }

    #[test]
    fn record_matches_individual_operations() {
        let rho = random_mixed_state(3, 3, 31).unwrap();
        let r = CoherenceRecord::evaluate(&rho).unwrap();
        let t = r.tripartite.unwrap();
        assert!((r.total - total_coherence(&rho)).abs() < 1e-14);
        assert!((r.local - local_coherence(&rho)).abs() < 1e-14);
        assert!((t.c12 - pairwise_global(&rho, 1, 2).unwrap()).abs() < 1e-12);
        assert!((t.c13 - pairwise_global(&rho, 1, 3).unwrap()).abs() < 1e-12);
        assert!((t.c23 - pairwise_global(&rho, 2, 3).unwrap()).abs() < 1e-12);
        assert!((t.c1_23 - one_vs_rest(&rho).unwrap()).abs() < 1e-12);
        let (tg, bg) = aggregates(&rho).unwrap();
        assert!((t.tg - tg).abs() < 1e-12 && (t.bg - bg).abs() < 1e-12);
        assert!((t.monogamy - monogamy(&rho, 1).unwrap()).abs() < 1e-12);
        assert!(r.is_finite());

        let r2 = CoherenceRecord::evaluate(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(r2.tripartite.is_none());
    }

    fn state_strategy() -> impl Strategy<Value = DensityMatrix> {
        prop_oneof![
            any::<u64>().prop_map(|s| density_of(&random_pure_state(3, s).unwrap())),
            (any::<u64>(), 2usize..=8).prop_map(|(s, r)| random_mixed_state(3, r, s).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn complementarity_and_nonnegativity(rho in state_strategy()) {
            let c = total_coherence(&rho);
            let l = local_coherence(&rho);
            let g = global_coherence(&rho);
            prop_assert!((l + g - c).abs() < 1e-12);
            prop_assert!(l >= -1e-9 && g >= -1e-9);
        }

        #[test]
        fn chain_rule(rho in state_strategy()) {
            let fine = partition_global(&rho, &Partition::finest(3)).unwrap();
            let split = one_vs_rest(&rho).unwrap() + pairwise_global(&rho, 2, 3).unwrap();
            prop_assert!((fine - split).abs() < 1e-9);
        }

        #[test]
        fn probes_never_increase_coherence(rho in state_strategy(), j in 1usize..=3) {
            prop_assert!(total_coherence(&probe(&rho, j).unwrap()) <= total_coherence(&rho) + 1e-9);
        }

        #[test]
        fn dephasing_never_lowers_entropy(rho in state_strategy()) {
            prop_assert!(total_coherence(&rho) >= -1e-12);
        }
    }

    #[test]
    fn direct_and_probe_tuples_agree_on_products_and_bell_pairs() {
        for seed in 0..20 {
            let prod = random_product(100 + seed);
            let d = tuple_direct(&prod).unwrap();
            let p = tuple_probe(&prod).unwrap();
            assert!(d.max_abs_diff(&p) < 1e-9 && p.residual < 1e-9);

            // random single-qubit state ⊗ Bell-like pure pair, in every placement
            let single = random_pure_state(1, 500 + seed).unwrap();
            let pair = random_pure_state(2, 600 + seed).unwrap();
            let a = density_of(&single.tensor(&pair));
            let b = density_of(&pair.tensor(&single));
            for rho in [a, b] {
                let d = tuple_direct(&rho).unwrap();
                let p = tuple_probe(&rho).unwrap();
                assert!(d.max_abs_diff(&p) < 1e-9 && p.residual < 1e-9);
            }
        }
    }

    #[test]
    fn symmetric_states_have_symmetric_tuples() {
        for name in [NamedState::W, NamedState::Ghz, NamedState::WWBar] {
            let t = tuple_direct(&named(name)).unwrap();
            assert!((t.c1 - t.c2).abs() < 1e-10 && (t.c2 - t.c3).abs() < 1e-10);
            assert!((t.c12 - t.c13).abs() < 1e-10 && (t.c13 - t.c23).abs() < 1e-10);
        }
    }
}
