//! Collective spin operators on a fixed-`J` Dicke manifold.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use crate::operator::{HilbertBasis, Operator};

/// Deliberate corruption of one ladder element, used to exercise the
/// invariant checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LadderFault {
    /// Multiply `coeff_plus[index]` by `factor`.
    Scale { index: usize, factor: f64 },
    /// Place `coeff_plus[index]` two rungs up instead of one.
    Misplace { index: usize },
}

/// Matrix elements `⟨J, M+1| J⁺ |J, M⟩ = √(J(J+1) − M(M+1))` for `M = −J … J−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeLadderTable {
    twice_j: usize,
    coeff_plus: Vec<f64>,
    fault: Option<LadderFault>,
}

impl DickeLadderTable {
    pub fn new(twice_j: usize) -> Self {
        let j = twice_j as f64 / 2.0;
        let coeff_plus = (0..twice_j)
            .map(|k| {
                let m = -j + k as f64;
                (j * (j + 1.0) - m * (m + 1.0)).sqrt()
            })
            .collect();
        Self {
            twice_j,
            coeff_plus,
            fault: None,
        }
    }

    pub fn with_fault(mut self, fault: LadderFault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn spin(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn coeff_plus(&self) -> &[f64] {
        &self.coeff_plus
    }

    pub fn fault(&self) -> Option<LadderFault> {
        self.fault
    }

    /// `(row, col, value)` entries of `J⁺` in ascending-`M` order.
    fn plus_triplets(&self) -> Vec<(usize, usize, C64)> {
        let dim = self.twice_j + 1;
        self.coeff_plus
            .iter()
            .enumerate()
            .filter_map(|(k, &c)| match self.fault {
                Some(LadderFault::Scale { index, factor }) if index == k => {
                    Some((k + 1, k, C64::new(c * factor, 0.0)))
                }
                Some(LadderFault::Misplace { index }) if index == k => {
                    (k + 2 < dim).then(|| (k + 2, k, C64::new(c, 0.0)))
                }
                _ => Some((k + 1, k, C64::new(c, 0.0))),
            })
            .collect()
    }
}

/// `Jx, Jy, Jz, J⁺, J⁻` on one basis.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
    pub jplus: Operator,
    pub jminus: Operator,
}

impl CollectiveOps {
    pub fn basis(&self) -> &Arc<HilbertBasis> {
        self.jz.basis()
    }

    pub fn emitters(&self) -> usize {
        self.jz.basis().emitters()
    }

    /// `cos θ Jx + sin θ Jy`.
    pub fn transverse(&self, theta: f64) -> Operator {
        &self.jx.scale(C64::new(theta.cos(), 0.0)) + &self.jy.scale(C64::new(theta.sin(), 0.0))
    }

    /// `n · J` for a real 3-vector `n`.
    pub fn along(&self, n: [f64; 3]) -> Operator {
        let x = self.jx.scale(C64::new(n[0], 0.0));
        let y = self.jy.scale(C64::new(n[1], 0.0));
        let z = self.jz.scale(C64::new(n[2], 0.0));
        &(&x + &y) + &z
    }

    /// `Jx² + Jy² + Jz²`.
    pub fn casimir(&self) -> Operator {
        &(&(&self.jx * &self.jx) + &(&self.jy * &self.jy)) + &(&self.jz * &self.jz)
    }

    /// Assembles the Cartesian components from `J⁺`, `J⁻` and `Jz`.
    pub fn from_ladder(jplus: Operator, jminus: Operator, jz: Operator) -> Result<Self> {
        let half = C64::new(0.5, 0.0);
        let jx = (&jplus + &jminus).scale(half).into_hermitian()?;
        let jy = (&jplus - &jminus).scale(-I * half).into_hermitian()?;
        Ok(Self {
            jx,
            jy,
            jz: jz.into_hermitian()?,
            jplus,
            jminus,
        })
    }
}

/// Collective operators on the Dicke manifold `(N, J)` with `2J = twice_j`.
pub fn collective_ops(emitters: usize, twice_j: usize) -> Result<CollectiveOps> {
    collective_ops_from_table(emitters, &DickeLadderTable::new(twice_j))
}

/// As [`collective_ops`], with the ladder elements taken from `table`.
pub fn collective_ops_from_table(
    emitters: usize,
    table: &DickeLadderTable,
) -> Result<CollectiveOps> {
    let basis = Arc::new(HilbertBasis::dicke(emitters, table.twice_j)?);
    let plus = table.plus_triplets();
    let jplus = Operator::from_triplets(basis.clone(), plus.iter().copied())?;
    let jminus = Operator::from_triplets(
        basis.clone(),
        plus.iter().map(|&(r, c, v)| (c, r, v.conj())),
    )?;
    let j = table.spin();
    let jz = Operator::from_triplets(
        basis,
        (0..=table.twice_j).map(|k| (k, k, C64::new(-j + k as f64, 0.0))),
    )?;
    // a faulty table may break Hermiticity only through J±, which are never hinted
    CollectiveOps::from_ladder(jplus, jminus, jz)
}

/// Collective operators on the symmetric manifold `J = N/2`.
pub fn symmetric_ops(emitters: usize) -> Result<CollectiveOps> {
    collective_ops(emitters, emitters)
}

/// `E(J, M) = (𝒥/N) J(J+1) + (𝒥z − 𝒥) M² / N`, the all-to-all XXZ energy of `|J, M⟩`.
pub fn dicke_xxz_energy(emitters: usize, j_perp: f64, j_z: f64, spin: f64, m: f64) -> Result<f64> {
    if m.abs() > spin + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "|M| = {} exceeds J = {spin}",
            m.abs()
        )));
    }
    let n = emitters as f64;
    Ok(j_perp / n * spin * (spin + 1.0) + (j_z - j_perp) / n * m * m)
}
