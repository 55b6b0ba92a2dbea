//! Analytic first- and second-order results for the benchmark models.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use crate::models::{DickeParams, TfiParams, XyzParams};

/// Closed form for models whose first-order correction lives on `|2⟩ = |−N/2+2⟩`:
/// `F(θ) = α e^{2iθ} / (β − iγ)` and `ξ²(θ) = 1 − (8/N) Re F(θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForm {
    pub emitters: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `⟨φ₂|H1|φ₀⟩`.
    pub h1_20: f64,
    /// Coefficient of `|2⟩` in `|ψ₁⟩`: `−⟨φ₂|H1|φ₀⟩ / (β − iγ)`.
    pub c2: C64,
}

impl ClosedForm {
    fn new(emitters: usize, alpha: f64, beta: f64, gamma: f64, h1_20: f64) -> Result<Self> {
        if emitters < 2 {
            return Err(Error::EmitterCountOutOfRange {
                emitters,
                min: 2,
                max: usize::MAX,
            });
        }
        let den = C64::new(beta, -gamma);
        if den.norm() < 1e-14 {
            return Err(Error::SingularPerturbation {
                index: 2,
                magnitude: den.norm(),
            });
        }
        Ok(Self {
            emitters,
            alpha,
            beta,
            gamma,
            h1_20,
            c2: -h1_20 / den,
        })
    }

    pub fn f(&self, theta: f64) -> C64 {
        self.alpha * (2.0 * I * theta).exp() / C64::new(self.beta, -self.gamma)
    }

    pub fn re_f(&self, theta: f64) -> f64 {
        let (s, c) = (2.0 * theta).sin_cos();
        self.alpha * (self.beta * c - self.gamma * s)
            / (self.beta * self.beta + self.gamma * self.gamma)
    }

    /// `max_θ Re F = |α| / √(β² + γ²)`.
    pub fn re_f_extremal(&self) -> f64 {
        self.alpha.abs() / self.beta.hypot(self.gamma)
    }

    /// Squeezing angle in `[0, π)`: the maximizer of `Re F`.
    pub fn theta_squeeze(&self) -> f64 {
        let phase = C64::new(self.alpha * self.beta, self.alpha * self.gamma).arg();
        (-0.5 * phase).rem_euclid(PI)
    }

    /// Stationary angles `½ tan⁻¹(−γ/β) + kπ/2` for `k = 0, 1`, reduced to `[0, π)`.
    pub fn theta_stationary(&self) -> [f64; 2] {
        let base = 0.5 * (-self.gamma / self.beta).atan();
        [base.rem_euclid(PI), (base + FRAC_PI_2).rem_euclid(PI)]
    }

    /// `1 − (8/N) Re F(θ)`.
    pub fn xi2_linear(&self, theta: f64) -> f64 {
        1.0 - 8.0 / self.emitters as f64 * self.re_f(theta)
    }

    pub fn xi2_linear_min(&self) -> f64 {
        1.0 - 8.0 / self.emitters as f64 * self.re_f_extremal()
    }

    /// Non-dissipative pair amplitude `ζ = −⟨φ₂|H1|φ₀⟩ / β`; `None` when `β = 0`.
    pub fn zeta(&self) -> Option<f64> {
        (self.beta != 0.0).then(|| -self.h1_20 / self.beta)
    }

    /// `ζ′ = ζ / √(2N(N−1))`, the predicted `⟨SᵢˣSⱼˣ⟩ = −⟨SᵢʸSⱼʸ⟩` for `γ = 0`.
    pub fn zeta_prime(&self) -> Option<f64> {
        self.zeta().map(|z| z / self.pair_norm())
    }

    /// `Re c₂ / √(2N(N−1))`: the same correlator with dissipation included.
    pub fn pair_correlation(&self) -> f64 {
        self.c2.re / self.pair_norm()
    }

    fn pair_norm(&self) -> f64 {
        let n = self.emitters as f64;
        (2.0 * n * (n - 1.0)).sqrt()
    }
}

/// `α = (N−1)δ𝒥/4`, `β = 2(𝒥−𝒥z)(N−2)/N`.
pub fn xyz_closed_form(p: &XyzParams) -> Result<ClosedForm> {
    let n = p.emitters as f64;
    let dj = p.delta_j();
    let alpha = (n - 1.0) * dj / 4.0;
    let beta = 2.0 * (p.j_mean() - p.jz) * (n - 2.0) / n;
    let h1_20 = dj / 2.0 * (2.0 * (n - 1.0) / n).sqrt();
    ClosedForm::new(p.emitters, alpha, beta, p.gamma, h1_20)
}

/// `α = 𝒥x(N−1)/8`, `β = 2Δ`.
pub fn tfi_closed_form(p: &TfiParams) -> Result<ClosedForm> {
    let n = p.emitters as f64;
    let alpha = p.jx * (n - 1.0) / 8.0;
    let beta = 2.0 * p.delta;
    let h1_20 = p.jx / 4.0 * (2.0 * (n - 1.0) / n).sqrt();
    ClosedForm::new(p.emitters, alpha, beta, p.gamma, h1_20)
}

/// Second-order expectation values for the driven Dicke model, exact through `O(Ω²/Γ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DickeObservables {
    pub emitters: usize,
    pub ratio: f64,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    /// `⟨Jz⟩²`.
    pub jz_mean_sq: f64,
    pub jx2: f64,
    pub jy2: f64,
    pub jz2: f64,
    /// `⟨{Jx, Jy}⟩`.
    pub jxjy: f64,
    pub jxjz: f64,
    pub jyjz: f64,
    /// `⟨(J^φ′)²⟩` with `J^φ′ = −sin φ Jy + cos φ Jz`.
    pub jphi2: f64,
}

impl DickeObservables {
    pub const NAMES: [&'static str; 11] = [
        "Jx",
        "Jy",
        "Jz",
        "Jz_mean_sq",
        "Jx2",
        "Jy2",
        "Jz2",
        "JxJy",
        "JxJz",
        "JyJz",
        "Jphi2",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.jx,
            self.jy,
            self.jz,
            self.jz_mean_sq,
            self.jx2,
            self.jy2,
            self.jz2,
            self.jxjy,
            self.jxjz,
            self.jyjz,
            self.jphi2,
        ]
    }

    /// `cos φ = −2Ω/Γ`.
    pub fn cos_phi(&self) -> f64 {
        -2.0 * self.ratio
    }

    /// `sin φ = −(1 − 2Ω²/Γ²)`.
    pub fn sin_phi(&self) -> f64 {
        -(1.0 - 2.0 * self.ratio * self.ratio)
    }

    /// Mean spin direction `(0, cos φ, sin φ)`.
    pub fn direction(&self) -> [f64; 3] {
        [0.0, self.cos_phi(), self.sin_phi()]
    }

    /// `ξ²(θ) = 1 + (2Ω²/Γ²)(sin²θ − cos²θ)` for `J^θ = cos θ Jx + sin θ J^φ′`.
    pub fn xi2(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        1.0 + 2.0 * self.ratio * self.ratio * (s * s - c * c)
    }

    pub fn xi2_min(&self) -> f64 {
        1.0 - 2.0 * self.ratio * self.ratio
    }

    /// Amplitudes on `|−N/2⟩`, `|−N/2+1⟩`, `|−N/2+2⟩`.
    pub fn state_coefficients(&self) -> [C64; 3] {
        let n = self.emitters as f64;
        let r = self.ratio;
        let c2 = if self.emitters >= 2 {
            -r * r * n * n / (2.0 * n * (n - 1.0)).sqrt()
        } else {
            0.0
        };
        [
            C64::new(1.0 - n * r * r / 2.0, 0.0),
            C64::new(0.0, r * n.sqrt()),
            C64::new(c2, 0.0),
        ]
    }
}

pub fn dicke_observables(p: &DickeParams) -> Result<DickeObservables> {
    if p.emitters < 1 {
        return Err(Error::EmitterCountOutOfRange {
            emitters: p.emitters,
            min: 1,
            max: usize::MAX,
        });
    }
    if !(p.big_gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Γ = {} must be positive",
            p.big_gamma
        )));
    }
    let n = p.emitters as f64;
    let r = p.omega / p.big_gamma;
    let r2 = r * r;
    Ok(DickeObservables {
        emitters: p.emitters,
        ratio: r,
        jx: 0.0,
        jy: -r * n,
        jz: -n / 2.0 + r2 * n,
        jz_mean_sq: n * n / 4.0 - r2 * n * n,
        jx2: n / 4.0 - r2 * n / 2.0,
        jy2: n / 4.0 + 0.5 * r2 * n * (2.0 * n - 1.0),
        jz2: n * n / 4.0 - r2 * n * (n - 1.0),
        jxjy: 0.0,
        jxjz: 0.0,
        jyjz: r * n * (n - 1.0),
        jphi2: n / 4.0 + n * r2 / 2.0,
    })
}
