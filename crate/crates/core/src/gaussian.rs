//! Centered Gaussian Wigner states.
//!
//! A state is fixed by a real symmetric matrix G = (A B; B C) through
//! `W(q,p) = (sqrt(det G)/pi) exp(-(q p) G (q p)^T)`.  Physicality is
//! `A + C > 0` and `0 < det G <= 1`; the upper bound is the uncertainty
//! relation.  Validation canonicalizes every state to the normal form
//! `(alpha, beta, theta)` with `G = R(theta) diag(1/alpha^2, 1/beta^2)
//! R(theta)^T`, `alpha >= beta` and `alpha*beta = 1/sqrt(det G) >= 1`.
//! All rotation-invariant quantities downstream consume only
//! `(alpha, beta)`.
//!
//! Classification here is two-valued: `beta >= 1` (no squeezing) gives a
//! classical state, `beta < 1` a strongly nonclassical one.  The weakly
//! nonclassical rung of the hierarchy is never realized by this family;
//! that is the point of the classification and it is enforced as a
//! property test, not assumed.

use crate::specfun::{bessel_i0_scaled, AccuracyBudget};
use crate::{Error, MarginalForm, Result, BOUNDARY_EPS};

/// Exponent matrix of a centered Gaussian Wigner function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GMatrix {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        GMatrix { a, b, c }
    }

    pub fn delta(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// Conjugation by a phase-space rotation: `R(theta) G R(theta)^T`.
    pub fn rotated(&self, theta: f64) -> GMatrix {
        let (s, c) = theta.sin_cos();
        GMatrix {
            a: c * c * self.a - 2.0 * s * c * self.b + s * s * self.c,
            b: s * c * (self.a - self.c) + (c * c - s * s) * self.b,
            c: s * s * self.a + 2.0 * s * c * self.b + c * c * self.c,
        }
    }
}

/// Rotation-reduced parameters: `alpha >= beta > 0`, `alpha*beta >= 1`,
/// `theta` in [0, pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForm {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

/// Variance matrix V = G^{-1}/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMatrix {
    pub var_q: f64,
    pub cov_qp: f64,
    pub var_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Classical,
    WeaklyNonclassical,
    StronglyNonclassical,
}

impl std::fmt::Display for StateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StateKind::Classical => "Classical",
            StateKind::WeaklyNonclassical => "WeaklyNonclassical",
            StateKind::StronglyNonclassical => "StronglyNonclassical",
        };
        f.write_str(s)
    }
}

/// Boundary cases flagged by `classify`.  `Vacuum` is the intersection of
/// the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalKind {
    NotMarginal,
    /// beta = 1: the squeezing boundary, where phi degenerates to a line delta.
    BetaOne,
    /// alpha*beta = 1: pure squeezed vacuum.
    SqueezedVacuum,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateClass {
    pub kind: StateKind,
    pub marginal: MarginalKind,
}

impl StateClass {
    pub fn is_marginal(&self) -> bool {
        self.marginal != MarginalKind::NotMarginal
    }
}

/// A validated centered Gaussian state.  Immutable; the normal form is
/// computed once at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalGaussianState {
    g: GMatrix,
    delta: f64,
    normal: NormalForm,
}

fn compute_normal_form(g: &GMatrix) -> NormalForm {
    let h = 0.5 * (g.a + g.c);
    let d = (0.5 * (g.a - g.c)).hypot(g.b);
    let lam_min = h - d;
    let lam_max = h + d;
    let theta = if d <= 1e-15 * h {
        0.0 // isotropic: any axis works, fix theta = 0
    } else {
        // The quadratic form along direction t is h + d cos(2t - phi);
        // the minimizing axis (the alpha axis) sits at phi/2 + pi/2.
        let phi = (2.0 * g.b).atan2(g.a - g.c);
        let mut t = (0.5 * phi + std::f64::consts::FRAC_PI_2).rem_euclid(std::f64::consts::PI);
        if std::f64::consts::PI - t < 1e-12 {
            t = 0.0;
        }
        t
    };
    NormalForm {
        alpha: 1.0 / lam_min.sqrt(),
        beta: 1.0 / lam_max.sqrt(),
        theta,
    }
}

impl PhysicalGaussianState {
    /// Check the physicality constraints and canonicalize.
    pub fn validate(g: GMatrix) -> Result<Self> {
        for v in [g.a, g.b, g.c] {
            if !v.is_finite() {
                return Err(Error::NonFinite("G matrix entry"));
            }
        }
        let delta = g.delta();
        if g.a + g.c <= 0.0 || delta <= 0.0 {
            return Err(Error::NotPositive);
        }
        // Rotating an exactly-saturating G can push det G an ulp past 1;
        // only a genuine excess is a violation.
        if delta > 1.0 + 1e-12 {
            return Err(Error::UncertaintyViolated(delta));
        }
        Ok(PhysicalGaussianState {
            g,
            delta: delta.min(1.0),
            normal: compute_normal_form(&g),
        })
    }

    /// Diagonal state with scales (alpha, beta), theta = 0 implied.
    pub fn from_alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite("alpha/beta"));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::NotPositive);
        }
        Self::validate(GMatrix::new(
            1.0 / (alpha * alpha),
            0.0,
            1.0 / (beta * beta),
        ))
    }

    pub fn g(&self) -> GMatrix {
        self.g
    }

    /// det G = alpha^{-2} beta^{-2}.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn normal(&self) -> NormalForm {
        self.normal
    }

    pub fn alpha(&self) -> f64 {
        self.normal.alpha
    }

    pub fn beta(&self) -> f64 {
        self.normal.beta
    }

    /// Two-valued classification with boundary flags.
    pub fn classify(&self) -> StateClass {
        let NormalForm { alpha, beta, .. } = self.normal;
        let kind = if beta >= 1.0 - BOUNDARY_EPS {
            StateKind::Classical
        } else {
            StateKind::StronglyNonclassical
        };
        let beta_one = (beta - 1.0).abs() <= BOUNDARY_EPS;
        let sq_vac = (alpha * beta - 1.0).abs() <= BOUNDARY_EPS;
        let marginal = match (beta_one, sq_vac) {
            (true, true) => MarginalKind::Vacuum,
            (true, false) => MarginalKind::BetaOne,
            (false, true) => MarginalKind::SqueezedVacuum,
            (false, false) => MarginalKind::NotMarginal,
        };
        StateClass { kind, marginal }
    }

    /// W(q,p); positive everywhere and normalized to 1 over the plane.
    pub fn wigner_eval(&self, q: f64, p: f64) -> f64 {
        let e = self.g.a * q * q + 2.0 * self.g.b * q * p + self.g.c * p * p;
        self.delta.sqrt() / std::f64::consts::PI * (-e).exp()
    }

    /// Fourier transform of W in the principal-axis frame:
    /// exp(-alpha^2 sigma^2/4 - beta^2 tau^2/4).
    pub fn wigner_ft(&self, sigma: f64, tau: f64) -> f64 {
        let NormalForm { alpha, beta, .. } = self.normal;
        (-0.25 * (alpha * alpha * sigma * sigma + beta * beta * tau * tau)).exp()
    }

    /// Angular integral of W over the circle q^2 + p^2 = 2L:
    /// (2/(alpha beta)) exp(-L(1/a^2 + 1/b^2)) I0(L(1/b^2 - 1/a^2)),
    /// assembled in scaled-I0 form so no factor overflows.
    pub fn angular_average(&self, l: f64, budget: &AccuracyBudget) -> Result<f64> {
        if !l.is_finite() {
            return Err(Error::NonFinite("angular_average radius"));
        }
        if l < 0.0 {
            return Err(Error::Precondition("angular_average requires L >= 0"));
        }
        let NormalForm { alpha, beta, .. } = self.normal;
        let ia = 1.0 / (alpha * alpha);
        let ib = 1.0 / (beta * beta);
        // exp(-L(ia+ib)) I0(L(ib-ia)) = exp(-2L ia) * [e^{-x} I0(x)], x = L(ib-ia) >= 0
        let scaled = bessel_i0_scaled(l * (ib - ia), budget)?;
        Ok(2.0 / (alpha * beta) * (-2.0 * l * ia).exp() * scaled)
    }

    /// Diagonal-weight density phi at the phase-space point x + iy, for
    /// strictly nonsqueezed nonmarginal states.  Normalized under the
    /// measure dx dy / (2 pi).
    pub fn phi_density(&self, x: f64, y: f64) -> Result<f64> {
        let NormalForm { alpha, beta, .. } = self.normal;
        if (beta - 1.0).abs() <= BOUNDARY_EPS {
            return Err(Error::Marginal(if (alpha - 1.0).abs() <= BOUNDARY_EPS {
                MarginalForm::DeltaPoint
            } else {
                MarginalForm::DeltaLine
            }));
        }
        if beta < 1.0 {
            return Err(Error::DistributionValued(beta));
        }
        let u = alpha * alpha - 1.0;
        let v = beta * beta - 1.0;
        Ok(2.0 / (u * v).sqrt() * (-x * x / u - y * y / v).exp())
    }

    /// V = G^{-1}/2.
    pub fn variance_matrix(&self) -> NoiseMatrix {
        let s = 0.5 / self.delta;
        NoiseMatrix {
            var_q: s * self.g.c,
            cov_qp: -s * self.g.b,
            var_p: s * self.g.a,
        }
    }

    /// <a^dagger a> = (var_q + var_p - 1)/2 = (alpha^2 + beta^2 - 2)/4.
    pub fn mean_photon(&self) -> f64 {
        let v = self.variance_matrix();
        (0.5 * (v.var_q + v.var_p - 1.0)).max(0.0)
    }
}
