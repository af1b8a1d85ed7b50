//! Monte-Carlo estimates of Pauli-dressed layer infidelities.
//!
//! The infidelity of a dressed layer is the probability that the product of
//! all its gate errors, each carried forward to the end of the layer, is not
//! the identity. Writing that as `P(some gate errs) − P(errors occur but
//! cancel)`, the first term has a closed form (gates err independently) and
//! only the small cancellation term is sampled. The estimator stays unbiased
//! and its variance is second order in the error rates.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::GateNoise;
use super::model::ErrorModel;
use crate::clifford::Clifford1Q;
use crate::design::MrbDesign;
use crate::error::{Error, Result};
use crate::layer::Layer;
use crate::pauli::{Pauli, PauliString};
use crate::sampling::sample_layer;
use crate::seed::{derive_rng, domain};

pub const MIN_SAMPLES: usize = 100;

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// XORs one sampled error from each component of `noise` into `frame`.
/// Returns whether any component fired.
#[inline]
pub(crate) fn apply_noise<R: Rng + ?Sized>(noise: &GateNoise, frame: &mut PauliString, rng: &mut R) -> bool {
    let mut fired = false;
    for ch in &noise.components {
        if let Some(e) = ch.select(rng.random::<f64>()) {
            frame.compose_assign_unchecked(e);
            fired = true;
        }
    }
    fired
}

/// Entanglement infidelity of `layer` under `model`, preceded by a uniformly
/// random Pauli layer when `include_pauli_layer` is set.
pub fn epsilon_layer<R: Rng + ?Sized>(
    layer: &Layer,
    model: &ErrorModel,
    include_pauli_layer: bool,
    rng: &mut R,
    samples: usize,
) -> Result<Estimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    model.check_layers([layer])?;
    let n = layer.num_qubits();
    let paulis = Pauli::ALL.map(Clifford1Q::from_pauli);

    // P(no gate errs), averaged over the random Pauli layer: it factorizes over qubits.
    let mut p_clean: f64 = layer.ops().iter().map(|op| Ok(1.0 - model.noise(op)?.any_error_probability())).product::<Result<f64>>()?;
    if include_pauli_layer {
        for q in 0..n {
            let mut s = 0.0;
            for &g in &paulis {
                s += 1.0 - model.single(q, g)?.any_error_probability();
            }
            p_clean *= s / 4.0;
        }
    }
    let p_err = 1.0 - p_clean;

    let mut frame = PauliString::identity(n);
    let mut cancelled = 0usize;
    for _ in 0..samples {
        frame.clear();
        let mut fired = false;
        if include_pauli_layer {
            for q in 0..n {
                let g = paulis[rng.random_range(0..4)];
                fired |= apply_noise(model.single(q, g)?, &mut frame, rng);
            }
            if fired {
                layer.conjugate_in_place(&mut frame);
            }
        }
        for op in layer.ops() {
            fired |= apply_noise(model.noise(op)?, &mut frame, rng);
        }
        if fired && frame.is_identity() {
            cancelled += 1;
        }
    }
    let c = cancelled as f64 / samples as f64;
    let var = if samples > 1 { c * (1.0 - c) * samples as f64 / (samples - 1) as f64 } else { 0.0 };
    Ok(Estimate { value: p_err - c, stderr: (var / samples as f64).sqrt(), samples })
}

/// `ε_Ω` estimated over Ω-sampled layers, with the covariance diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub epsilon: f64,
    pub stderr: f64,
    /// `Σ_L Ω(L) ε(L⁻¹) ε(L) − ε_Ω²`.
    pub cov: f64,
    pub layer_samples: usize,
    pub per_layer_samples: usize,
}

impl OmegaEstimate {
    /// Whether `cov` lies inside `[−ε², ε(1 − ε)]`, widened by `slack`.
    pub fn cov_within_bounds(&self, slack: f64) -> bool {
        let e = self.epsilon;
        self.cov >= -e * e - slack && self.cov <= e * (1.0 - e) + slack
    }
}

/// Estimates `ε_Ω` for the design's layer distribution.
///
/// Each of `layer_samples` draws contributes both `ε(L)` and `ε(L⁻¹)`; both
/// are Ω-distributed since Ω is inversion symmetric. Layer `i` uses a stream
/// derived from a seed drawn once from `rng`, so the result does not depend on
/// the thread count.
pub fn epsilon_omega<R: Rng + ?Sized>(
    design: &MrbDesign,
    model: &ErrorModel,
    layer_samples: usize,
    per_layer_samples: usize,
    include_pauli_layer: bool,
    rng: &mut R,
) -> Result<OmegaEstimate> {
    if layer_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 layer samples, got {layer_samples}")));
    }
    let master: u64 = rng.random();
    let pairs: Vec<(f64, f64)> = (0..layer_samples)
        .into_par_iter()
        .map(|i| {
            let mut r = derive_rng(master, &[domain::EPSILON, i as u64]);
            let layer = sample_layer(&design.connectivity, &design.sampler, &mut r)?;
            let a = epsilon_layer(&layer, model, include_pauli_layer, &mut r, per_layer_samples)?;
            let b = epsilon_layer(&layer.inverse(), model, include_pauli_layer, &mut r, per_layer_samples)?;
            Ok((a.value, b.value))
        })
        .collect::<Result<_>>()?;
    let m = pairs.len() as f64;
    let means: Vec<f64> = pairs.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let eps = means.iter().sum::<f64>() / m;
    let var = means.iter().map(|x| (x - eps).powi(2)).sum::<f64>() / (m - 1.0);
    let cross = pairs.iter().map(|(a, b)| a * b).sum::<f64>() / m;
    Ok(OmegaEstimate {
        epsilon: eps,
        stderr: (var / m).sqrt(),
        cov: cross - eps * eps,
        layer_samples,
        per_layer_samples,
    })
}
