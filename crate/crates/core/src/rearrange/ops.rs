use super::Rearrangement;
use crate::error::{Error, Result};
use crate::haar::HaarVector;

/// `(|I|/|τ(I)|)^{1/p}` for `level(I) = from`, `level(τ(I)) = to`.
pub(crate) fn rearrangement_weight(from: u32, to: u32, p: f64) -> f64 {
    if from == to {
        1.0
    } else {
        ((to as f64 - from as f64) / p).exp2()
    }
}

/// `T_{τ,p} ⊗ Id_X (f) = Σ x_I (|I|/|τ(I)|)^{1/p} h_{τ(I)}`.
pub fn apply_t(f: &HaarVector, tau: &Rearrangement, p: f64) -> Result<HaarVector> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!(
            "exponent p must be positive, got {p}"
        )));
    }
    let mut out = HaarVector::zero(f.space(), f.depth().max(tau.depth()));
    for (i, x) in f.terms() {
        let j = tau.tau_checked(i)?;
        let w = rearrangement_weight(i.level(), j.level(), p);
        out.set(j, x.iter().map(|v| v * w).collect())?;
    }
    Ok(out)
}

/// `S_σ`: `h_J ↦ h_{σ(J)}` on `τ(D)`, `h_J ↦ 0` elsewhere.
pub fn apply_s_sigma(f: &HaarVector, tau: &Rearrangement) -> Result<HaarVector> {
    f.require_scalar("S_σ")?;
    let mut out = HaarVector::zero(f.space(), f.depth().max(tau.depth()));
    for (j, x) in f.terms() {
        if let Some(i) = tau.sigma(j) {
            out.set(i, x.clone())?;
        }
    }
    Ok(out)
}
