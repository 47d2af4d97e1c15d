//! Truncated Fock-basis superpositions with coherent amplitude and a
//! nonlinear phase menu: the minimal family whose photon statistics are
//! exactly Poissonian while the Wigner function develops negativity.
//!
//! The Wigner function is evaluated in displaced-parity form,
//! W(q,p) = (1/pi) sum_m (-1)^m |<m|D(-z)|psi>|^2 with z = (q+ip)/sqrt 2,
//! which reduces to the familiar (-1)^n/pi e^{-(q^2+p^2)} L_n(2(q^2+p^2))
//! on number states.  Matrix elements of the displacement operator come
//! from associated Laguerre polynomials assembled in log space.

use num_complex::Complex64;

use crate::dd::Dd;
use crate::specfun::{laguerre_scaled, ln_factorial};
use crate::{Error, Result};

/// Phase profile beta(n) of the superposition.  Linear phases only rotate
/// the coherent amplitude and serve as a negative control; a quadratic
/// phase is the simplest genuinely nonlinear choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseSpec {
    Zero,
    Linear(f64),
    Quadratic(f64),
}

impl PhaseSpec {
    fn at(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            PhaseSpec::Zero => 0.0,
            PhaseSpec::Linear(s) => s * nf,
            PhaseSpec::Quadratic(g) => g * nf * nf,
        }
    }
}

/// A pure state truncated in the Fock basis, c_0..c_N.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coeffs: Vec<Complex64>,
}

impl FockVector {
    /// Wrap explicit coefficients; the truncated norm must sit in
    /// [1 - 1e-10, 1].
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("FockVector needs at least c_0"));
        }
        let mut norm = 0.0f64;
        for c in &coeffs {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite("Fock coefficient"));
            }
            norm += c.norm_sqr();
        }
        if !(1.0 - 1e-10..=1.0 + 1e-12).contains(&norm) {
            return Err(Error::Precondition(
                "FockVector norm must lie in [1 - 1e-10, 1]",
            ));
        }
        Ok(FockVector { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Build e^{-|A|^2/2} sum_n A^n/sqrt(n!) e^{i beta(n)} |n>, truncated
/// where the Poisson tail of |A|^2 drops below the square of tail_tol
/// (tail_tol itself is clamped into [1e-14, 1e-12]).  The square is not
/// paranoia: the omitted tail reenters the Wigner function through its
/// parity reflection at amplitude scale, i.e. as a halo of spurious
/// negativity of order sqrt(mass).  Truncating a coherent state at mass
/// 1e-13 plants a -1e-7 dip in an otherwise nonnegative W; mass tol^2
/// keeps the halo at the tolerance the caller asked for.
pub fn make_state(amplitude: Complex64, phase: PhaseSpec, tail_tol: f64) -> Result<FockVector> {
    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
        return Err(Error::NonFinite("amplitude"));
    }
    if tail_tol.is_nan() || tail_tol < 1e-14 {
        return Err(Error::Precondition("tail_tol must be >= 1e-14"));
    }
    if let PhaseSpec::Quadratic(g) = phase {
        if g == 0.0 {
            return Err(Error::Precondition(
                "Quadratic phase requires a nonzero coefficient",
            ));
        }
    }
    let lambda = amplitude.norm_sqr();
    if lambda > 25.0 {
        return Err(Error::Precondition("|amplitude|^2 must be <= 25"));
    }
    let tol = tail_tol.clamp(1e-14, 1e-12);
    let mass_tol = tol * tol;

    // cutoff from the Poisson tail: past the mode the term ratio
    // lambda/(n+1) only decreases, so the tail is geometrically bounded
    let mut cutoff = None;
    let mut pn = (-lambda).exp();
    for n in 0..=400usize {
        let r = lambda / (n as f64 + 1.0);
        if r < 1.0 && pn * r / (1.0 - r) < mass_tol {
            cutoff = Some(n);
            break;
        }
        pn *= r;
    }
    let Some(cutoff) = cutoff else {
        return Err(Error::CutoffExceeded(400));
    };

    let mut coeffs = Vec::with_capacity(cutoff + 1);
    let mut base = Complex64::new((-lambda / 2.0).exp(), 0.0);
    for n in 0..=cutoff {
        coeffs.push(base * Complex64::from_polar(1.0, phase.at(n)));
        base *= amplitude / (n as f64 + 1.0).sqrt();
    }
    FockVector::from_coeffs(coeffs)
}

/// p(n) = |c_n|^2; exactly phase-blind.
pub fn pnd(f: &FockVector, n: usize) -> Result<f64> {
    if n > f.cutoff() {
        return Err(Error::Precondition("pnd requires n <= cutoff"));
    }
    Ok(f.coeffs[n].norm_sqr())
}

/// <m|D(gamma)|n> through associated Laguerre polynomials, assembled in
/// log space so the factorial ratio, the power of |gamma| and the
/// polynomial growth cancel before exponentiation.  Standalone form of
/// the element evaluation inside `wigner_eval` (which shares the ln n!
/// table across elements); the tests march the ladder recurrence
/// against it.
#[allow(dead_code)]
fn displaced_element(m: usize, n: usize, gamma: Complex64) -> Result<Complex64> {
    let x = gamma.norm_sqr();
    let (lo, k, axis_arg) = if m >= n {
        (n, m - n, gamma.arg())
    } else {
        (m, n - m, (-gamma.conj()).arg())
    };
    let (mant, ln_scale) = laguerre_scaled(lo, k, x)?;
    if mant == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let power = if k == 0 {
        0.0
    } else {
        k as f64 * gamma.norm().ln()
    };
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(lo + k)) + power - x / 2.0
        + ln_scale
        + mant.abs().ln();
    let phase = Complex64::from_polar(mant.signum() * ln_mag.exp(), k as f64 * axis_arg);
    Ok(phase)
}

/// W(q,p) by displaced parity; the parity cutoff is set from the
/// displaced support and the discarded mass is certified below 1e-8.
///
/// Every element <m|D(gamma)|n> comes from the closed Laguerre form (as
/// in `displaced_element`, sharing one ln n! table).  The cheaper ladder
/// march sqrt(m+1) E(m+1, n) = sqrt(n) E(m, n-1) + gamma E(m, n) was
/// rejected for this role: its transient growth below m ~ |gamma|^2
/// amplifies seed rounding to ~1e-8, which shows up as spurious
/// negativity on coherent states.  It survives as the independent
/// cross-check in the tests.
pub fn wigner_eval(f: &FockVector, q: f64, p: f64) -> Result<f64> {
    if !q.is_finite() || !p.is_finite() {
        return Err(Error::NonFinite("phase-space point"));
    }
    let z = Complex64::new(q, p) / 2f64.sqrt();
    if z.norm() > 10.0 {
        return Err(Error::Precondition("wigner_eval requires |z| <= 10"));
    }
    let gamma = -z;
    let x = gamma.norm_sqr();
    let n_psi = f.cutoff() as f64;
    let mu = (z.norm() + n_psi.sqrt()).powi(2);
    let m_par = (mu + 12.0 * (mu + 1.0).sqrt() + 25.0).ceil() as usize;

    // ln j! prefix table, double-double accumulated: plain summation
    // noise here (~1e-11 by j ~ 400) would be the dominant error of the
    // whole evaluation
    let top = m_par + f.cutoff();
    let mut lnf = Vec::with_capacity(top + 1);
    let mut acc = Dd::from_f64(0.0);
    lnf.push(0.0f64);
    for j in 1..=top {
        acc = acc.add(Dd::from_f64((j as f64).ln()));
        lnf.push(acc.to_f64());
    }
    let ln_r = 0.5 * x.ln(); // -inf at the origin; k = 0 never touches it
    let arg_up = gamma.arg();
    let arg_dn = (-gamma.conj()).arg();

    let mut total = 0.0f64; // completeness check sum |A_m|^2
    let mut alt = 0.0f64;
    let (mut ct, mut ca) = (0.0f64, 0.0f64); // Kahan carries
    for m in 0..=m_par {
        let mut a = Complex64::new(0.0, 0.0);
        for (n, cn) in f.coeffs.iter().enumerate() {
            let (lo, k, axis) = if m >= n {
                (n, m - n, arg_up)
            } else {
                (m, n - m, arg_dn)
            };
            let (mant, ln_scale) = laguerre_scaled(lo, k, x)?;
            if mant == 0.0 {
                continue;
            }
            let power = if k == 0 { 0.0 } else { k as f64 * ln_r };
            let ln_mag =
                0.5 * (lnf[lo] - lnf[lo + k]) + power - 0.5 * x + ln_scale + mant.abs().ln();
            let e = Complex64::from_polar(mant.signum() * ln_mag.exp(), k as f64 * axis);
            a += cn * e;
        }
        let w = a.norm_sqr();
        let y = w - ct;
        let t = total + y;
        ct = (t - total) - y;
        total = t;
        let sgn = if m % 2 == 0 { w } else { -w };
        let y = sgn - ca;
        let t = alt + y;
        ca = (t - alt) - y;
        alt = t;
    }
    let deficit = 1.0 - total;
    if deficit.abs() > 1e-8 {
        return Err(Error::CutoffInsufficient);
    }
    Ok(alt / std::f64::consts::PI)
}

/// Grid minimum of W over [-half_width, half_width]^2 refined by 20
/// rounds of coordinate-wise pattern search.
pub fn min_wigner(
    f: &FockVector,
    half_width: f64,
    grid_points: usize,
) -> Result<(f64, (f64, f64))> {
    if !(half_width > 0.0 && half_width <= 10.0) {
        return Err(Error::Precondition("half_width must lie in (0, 10]"));
    }
    if grid_points < 51 {
        return Err(Error::Precondition("min_wigner requires >= 51 grid points"));
    }
    let h = 2.0 * half_width / (grid_points - 1) as f64;
    let mut best = (f64::INFINITY, (0.0f64, 0.0f64));
    for i in 0..grid_points {
        let q = -half_width + i as f64 * h;
        for j in 0..grid_points {
            let p = -half_width + j as f64 * h;
            let w = wigner_eval(f, q, p)?;
            if w < best.0 {
                best = (w, (q, p));
            }
        }
    }
    let (mut q, mut p) = best.1;
    let mut val = best.0;
    let mut step = h;
    for _ in 0..20 {
        let mut moved = false;
        for axis in 0..2 {
            for dir in [-1.0f64, 1.0] {
                let (cq, cp) = if axis == 0 {
                    (q + dir * step, p)
                } else {
                    (q, p + dir * step)
                };
                let cq = cq.clamp(-half_width, half_width);
                let cp = cp.clamp(-half_width, half_width);
                let w = wigner_eval(f, cq, cp)?;
                if w < val {
                    val = w;
                    q = cq;
                    p = cp;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((val, (q, p)))
}
