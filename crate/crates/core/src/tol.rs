//! Numerical tolerances shared by every validation routine.

use std::str::FromStr;

/// Thresholds used across the crate.
///
/// `unitary` governs unitarity, homomorphism, orthogonality and equality
/// residuals (max-entry norm). `psd` is the relative floor for minimum
/// eigenvalues, `rank` the relative Gram eigenvalue cutoff used to decide
/// the dimension of the reproducing kernel space, and `lift` the allowed
/// unitarity defect of the lifted subgroup representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub unitary: f64,
    pub psd: f64,
    pub rank: f64,
    pub lift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { unitary: 1e-9, psd: 1e-9, rank: 1e-8, lift: 1e-7 }
    }
}

impl Tolerances {
    /// PSD acceptance floor for a spectrum whose largest eigenvalue is `lmax`.
    pub fn psd_floor(&self, lmax: f64) -> f64 {
        -self.psd * (1.0 + lmax.max(0.0))
    }

    /// Residual acceptance threshold for data of magnitude `scale`.
    pub fn eq_threshold(&self, scale: f64) -> f64 {
        self.unitary * (1.0 + scale.abs())
    }
}

impl FromStr for Tolerances {
    type Err = String;

    /// Accepts either a bare number (sets `unitary` and `psd`) or a comma
    /// separated list of `key=value` pairs with keys `unitary`, `psd`,
    /// `rank`, `lift`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tol = Tolerances::default();
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance must be positive, got {v}"));
            }
            tol.unitary = v;
            tol.psd = v;
            return Ok(tol);
        }
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let v: f64 = value.trim().parse().map_err(|_| format!("bad number {value:?}"))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {key} must be positive, got {v}"));
            }
            match key.trim() {
                "unitary" => tol.unitary = v,
                "psd" => tol.psd = v,
                "rank" => tol.rank = v,
                "lift" => tol.lift = v,
                other => return Err(format!("unknown tolerance key {other:?}")),
            }
        }
        Ok(tol)
    }
}
