//! Error-rate boosting by gate folding.
//!
//! Every self-inverse two-qubit gate G is replaced by G^{2n+1}; with noise E
//! after each copy and E commuting with G the folded gate carries (2n+1)
//! copies of E. A fractional factor α is realised as a mixture of the two
//! neighbouring odd fold counts with mean 2⟨n⟩+1 = α.

use nalgebra::DMatrix;
use vqlab_core::{Circuit, DensityMatrix, GateOp, QuantumState, C64};

use crate::channel::{unitary_ptm, QuantumChannel};
use crate::error::{NoiseError, Result};
use crate::model::{run_noisy_circuit, NoiseModel};

/// A weighted mixture of folded circuits.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedProgram {
    pub alpha: f64,
    /// (probability, folds n, circuit with every eligible gate repeated 2n+1 times)
    pub variants: Vec<(f64, usize, Circuit)>,
}

impl BoostedProgram {
    /// Nominal factor 2⟨n⟩+1.
    pub fn nominal_factor(&self) -> f64 {
        self.variants
            .iter()
            .map(|(w, n, _)| w * (2 * n + 1) as f64)
            .sum()
    }

    /// Exact mixture output Σ_v w_v ρ_v.
    pub fn run(
        &self,
        params: &[f64],
        noise: &NoiseModel,
        input: &QuantumState,
    ) -> Result<DensityMatrix> {
        let mut acc: Option<DensityMatrix> = None;
        let mut total = 0.0;
        for (w, _, c) in &self.variants {
            let rho = run_noisy_circuit(c, params, noise, input)?;
            total += w;
            acc = Some(match acc {
                None => rho,
                Some(prev) => prev.mix(&rho, w / total),
            });
        }
        Ok(acc.expect("at least one variant"))
    }

    /// Realised boost factor of a folded gate `u` under `channel`: ratio of
    /// the depolarizing-equivalent error rate of the folded noise to that of
    /// a single noisy copy (exactly α when the noise commutes with `u`).
    pub fn realised_factor(&self, u: &DMatrix<C64>, channel: &QuantumChannel) -> f64 {
        let base = effective_error_rate(u, channel, 0);
        if base == 0.0 {
            return 1.0;
        }
        self.variants
            .iter()
            .map(|(w, n, _)| w * effective_error_rate(u, channel, *n))
            .sum::<f64>()
            / base
    }
}

fn is_self_inverse(m: &DMatrix<C64>) -> bool {
    let sq = m * m;
    let id = DMatrix::<C64>::identity(m.nrows(), m.ncols());
    (sq - id).iter().all(|z| z.norm() < 1e-12)
}

fn fold(circuit: &Circuit, n: usize) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.n_qubits())?.with_params(circuit.n_params());
    if circuit.has_custom_reference() {
        out = out.with_reference(circuit.reference())?;
    }
    for g in circuit.gates() {
        let copies = if g.arity() == 2 { 2 * n + 1 } else { 1 };
        if copies > 1 {
            match g {
                GateOp::Fixed { matrix, name, .. } if !is_self_inverse(matrix) => {
                    return Err(NoiseError::NotSelfInverse(name.clone()))
                }
                GateOp::Rotation { name, .. } => {
                    return Err(NoiseError::NotSelfInverse(name.clone()))
                }
                _ => {}
            }
        }
        for _ in 0..copies {
            out.push(g.clone())?;
        }
    }
    Ok(out)
}

/// Fold every two-qubit gate so that the expected noise per gate is α×.
pub fn boost_error_rate(circuit: &Circuit, alpha: f64) -> Result<BoostedProgram> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(NoiseError::InvalidBoost(alpha));
    }
    let half = (alpha - 1.0) / 2.0;
    let lo = half.floor() as usize;
    let frac = half - lo as f64;
    let mut variants = Vec::new();
    if frac < 1e-12 {
        variants.push((1.0, lo, fold(circuit, lo)?));
    } else {
        variants.push((1.0 - frac, lo, fold(circuit, lo)?));
        variants.push((frac, lo + 1, fold(circuit, lo + 1)?));
    }
    Ok(BoostedProgram { alpha, variants })
}

/// Depolarizing-equivalent rate 1 − mean non-identity PTM diagonal of the
/// noise carried by G^{2n+1} with `channel` after each copy, i.e. of
/// (E∘G)^{2n+1}∘G†.
pub fn effective_error_rate(u: &DMatrix<C64>, channel: &QuantumChannel, n: usize) -> f64 {
    let ru = unitary_ptm(u);
    let step = channel.ptm() * &ru;
    let mut acc = DMatrix::<f64>::identity(ru.nrows(), ru.ncols());
    for _ in 0..(2 * n + 1) {
        acc = &step * acc;
    }
    let eff = acc * ru.transpose();
    let m = eff.nrows();
    let mean = (1..m).map(|i| eff[(i, i)]).sum::<f64>() / (m - 1) as f64;
    1.0 - mean
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_below_one_rejected() {
        let c = Circuit::new(2).unwrap();
        assert_eq!(boost_error_rate(&c, 0.5), Err(NoiseError::InvalidBoost(0.5)));
    }

    #[test]
    fn fractional_alpha_mixes_neighbouring_folds() {
        let c = Circuit::new(2).unwrap().then(GateOp::cnot(0, 1)).unwrap();
        let b = boost_error_rate(&c, 2.0).unwrap();
        assert_eq!(b.variants.len(), 2);
        assert!((b.variants[0].0 - 0.5).abs() < 1e-15);
        assert_eq!(b.variants[1].2.gates().len(), 3);
        assert!((b.nominal_factor() - 2.0).abs() < 1e-15);
    }
}
