//! Brute-force integral routes, kept independent of the closed forms they
//! certify.
//!
//! The engine is a 15-point Gauss-Kronrod rule under global adaptive
//! bisection.  On top of it sit: the radial Laguerre-Bessel integral for
//! p(n), a Fourier-Bessel transform with oscillation-aware panels and
//! series acceleration, the K-integral form of P(I) with divergence
//! detection, and numeric certification of the two definite-integral
//! identities the closed forms rest on.
//!
//! Truncation points are always derived from analytic integrand envelopes
//! scaled by `truncation_margin`, never from fixed constants.

use crate::gaussian::PhysicalGaussianState;
use crate::specfun::{
    bessel_i0_scaled, bessel_j0, gauss_2f1, j0_zero, laguerre_scaled, ln_factorial, AccuracyBudget,
};
use crate::{Error, Result, BOUNDARY_EPS};

/// Controls for the adaptive quadrature and truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Multiplier on the analytic envelope truncation point.
    pub truncation_margin: f64,
}

impl QuadratureConfig {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        truncation_margin: f64,
    ) -> Result<Self> {
        for t in [abs_tol, rel_tol] {
            if !t.is_finite() || t <= 0.0 || t > 1e-4 {
                return Err(Error::Precondition(
                    "quadrature tolerances must lie in (0, 1e-4]",
                ));
            }
        }
        if max_subdivisions < 20 {
            return Err(Error::Precondition("max_subdivisions must be at least 20"));
        }
        if !truncation_margin.is_finite() || truncation_margin < 5.0 {
            return Err(Error::Precondition("truncation_margin must be at least 5"));
        }
        Ok(QuadratureConfig {
            abs_tol,
            rel_tol,
            max_subdivisions,
            truncation_margin,
        })
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1000,
            truncation_margin: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub diverged: bool,
}

impl IntegralResult {
    fn diverged() -> Self {
        IntegralResult {
            value: 0.0,
            error_estimate: f64::INFINITY,
            converged: false,
            diverged: true,
        }
    }
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights; the
// embedded 7-point Gauss rule uses the odd-index abscissae.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod panel: returns (integral, error estimate).
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    if !fc.is_finite() {
        return Err(Error::NonFinite("integrand value"));
    }
    let mut resg = WG[3] * fc;
    let mut resk = WGK[7] * fc;
    let mut resabs = WGK[7] * fc.abs();
    let mut fv = [[0.0f64; 2]; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFinite("integrand value"));
        }
        fv[j] = [f1, f2];
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0f64.min((200.0 * err / resasc).powf(1.5));
    }
    err = err.max(50.0 * f64::EPSILON * resabs);
    Ok((value, err))
}

struct Panel {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration over the segments defined by `breaks`
/// (sorted, at least two entries).  Final summation is ordered by interval
/// start, so results are deterministic regardless of refinement order.
pub(crate) fn adaptive<F>(
    mut f: F,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut heap = std::collections::BinaryHeap::new();
    let mut total_val = 0.0f64;
    let mut total_err = 0.0f64;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1])?;
        total_val += v;
        total_err += e;
        heap.push(Panel {
            err: e,
            a: w[0],
            b: w[1],
            val: v,
        });
    }
    let mut used = 0usize;
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total_val.abs()) && used < cfg.max_subdivisions
    {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        if worst.err == 0.0 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; cannot split further
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        total_val += v1 + v2 - worst.val;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            err: e1,
            a: worst.a,
            b: mid,
            val: v1,
        });
        heap.push(Panel {
            err: e2,
            a: mid,
            b: worst.b,
            val: v2,
        });
        used += 1;
    }
    // deterministic final reduction
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = 0.0f64;
    let mut comp = 0.0f64;
    let mut err = 0.0f64;
    for p in &panels {
        let y = p.val - comp;
        let t = value + y;
        comp = (t - value) - y;
        value = t;
        err += p.err;
    }
    let converged = err <= cfg.abs_tol.max(cfg.rel_tol * value.abs());
    Ok(IntegralResult {
        value,
        error_estimate: err,
        converged,
        diverged: false,
    })
}

/// Geometric breakpoints 0, t/2^k, ..., t/2, t for exponential-type decay.
fn geometric_breaks(t: f64, levels: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(levels + 2);
    v.push(0.0);
    for j in (0..=levels).rev() {
        v.push(t / 2f64.powi(j as i32));
    }
    v
}

/// Iterated averaging (Euler-style) of a partial-sum sequence.  Returns
/// the accelerated limit and a difference-based error estimate.
fn euler_limit(partials: &[f64]) -> (f64, f64) {
    debug_assert!(partials.len() >= 2);
    let mut row = partials.to_vec();
    let mut prev = *row.last().unwrap();
    let mut best = prev;
    let mut err = f64::INFINITY;
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
        let cand = *row.last().unwrap();
        let d = (cand - prev).abs();
        if d <= err {
            err = d;
            best = cand;
        }
        prev = cand;
    }
    (best, err.max(f64::EPSILON * best.abs()))
}

/// Fourier-Bessel transform g(K) = int_0^trunc f(x) J0(2 sqrt(xK)) dx.
///
/// The caller guarantees |f| is negligible beyond `trunc`.  The kernel's
/// zeros sit at x_m = j_{0,m}^2/(4K); the first eight delimit an adaptive
/// core, after which one panel per half-oscillation is summed, with
/// iterated averaging once the panel sequence alternates slowly.
pub fn fourier_bessel<F>(f: F, k: f64, trunc: f64, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !k.is_finite() || !trunc.is_finite() {
        return Err(Error::NonFinite("fourier_bessel parameter"));
    }
    if k < 0.0 || trunc <= 0.0 {
        return Err(Error::Precondition(
            "fourier_bessel requires K >= 0 and a positive truncation point",
        ));
    }
    let budget = AccuracyBudget::strict();
    let mut g = |x: f64| -> Result<f64> { Ok(f(x)? * bessel_j0(2.0 * (x * k).sqrt(), &budget)?) };

    let zero_at = |m: usize| -> f64 {
        let z = j0_zero(m);
        z * z / (4.0 * k)
    };
    // No kernel oscillation inside [0, trunc]: plain adaptive integration.
    if k == 0.0 || zero_at(1) >= trunc {
        let mut breaks = geometric_breaks(trunc, 10);
        breaks.dedup_by(|a, b| a == b);
        return adaptive(&mut g, &breaks, cfg);
    }

    // Core region up to the 8th zero (or trunc), split at the zeros.
    let mut core_breaks = vec![0.0f64];
    let mut m = 1usize;
    while m <= 8 {
        let z = zero_at(m);
        if z >= trunc {
            break;
        }
        core_breaks.push(z);
        m += 1;
    }
    let core_end = if m <= 8 {
        trunc.min(zero_at(m))
    } else {
        zero_at(8)
    };
    if *core_breaks.last().unwrap() < core_end {
        core_breaks.push(core_end);
    }
    let core = adaptive(&mut g, &core_breaks, cfg)?;
    if core_end >= trunc {
        return Ok(core);
    }

    // Half-oscillation tail panels with a per-panel budget.
    let panel_cfg = QuadratureConfig {
        abs_tol: (cfg.abs_tol * 0.02).max(1e-300),
        rel_tol: (cfg.rel_tol * 0.1).max(1e-14),
        max_subdivisions: 40,
        truncation_margin: cfg.truncation_margin,
    };
    let mut lo = core_end;
    let mut idx = m;
    let mut quad_err = core.error_estimate;
    let mut partials = Vec::new();
    let mut tail_sum = 0.0f64;
    let mut small_streak = 0usize;
    let mut reached_trunc = false;
    const PANEL_CAP: usize = 1024;
    for _ in 0..PANEL_CAP {
        idx += 1;
        let mut hi = zero_at(idx);
        if hi >= trunc {
            hi = trunc;
            reached_trunc = true;
        }
        let seg = adaptive(&mut g, &[lo, hi], &panel_cfg)?;
        quad_err += seg.error_estimate;
        tail_sum += seg.value;
        partials.push(tail_sum);
        lo = hi;
        if reached_trunc {
            break;
        }
        let scale = cfg.abs_tol.max(cfg.rel_tol * (core.value + tail_sum).abs());
        if seg.value.abs() < 0.05 * scale {
            small_streak += 1;
            if small_streak >= 2 {
                break;
            }
        } else {
            small_streak = 0;
        }
    }

    let (value, err) = if reached_trunc || small_streak >= 2 || partials.len() < 4 {
        let tail_cut = partials
            .last()
            .map(|_| {
                // bound the dropped remainder by the last panel magnitude
                let lastp = if partials.len() >= 2 {
                    (partials[partials.len() - 1] - partials[partials.len() - 2]).abs()
                } else {
                    partials[0].abs()
                };
                if reached_trunc {
                    0.0
                } else {
                    lastp
                }
            })
            .unwrap_or(0.0);
        (core.value + tail_sum, quad_err + tail_cut)
    } else {
        let (lim, acc_err) = euler_limit(&partials);
        (core.value + lim, quad_err + acc_err)
    };
    let converged = err <= cfg.abs_tol.max(cfg.rel_tol * value.abs());
    Ok(IntegralResult {
        value,
        error_estimate: err,
        converged,
        diverged: false,
    })
}

/// Radial route to the photon number distribution:
/// p(n) = (-1)^n (4/(alpha beta)) int_0^inf e^{-cL} L_n(4L) I0(bL) dL with
/// c = 2 + 1/alpha^2 + 1/beta^2 and b = |1/beta^2 - 1/alpha^2|.  Absolutely
/// convergent for every valid state, including the marginal lines where
/// the closed forms degenerate.
pub fn radial_pnd(
    s: &PhysicalGaussianState,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    if n > 200 {
        return Err(Error::Precondition("radial_pnd requires n <= 200"));
    }
    let alpha = s.alpha();
    let beta = s.beta();
    let ia = 1.0 / (alpha * alpha);
    let ib = 1.0 / (beta * beta);
    let b = (ib - ia).abs();
    let decay = 2.0 + 2.0 * ia.min(ib); // c - b
    let budget = AccuracyBudget::strict();

    // Envelope L^{n-1/2} e^{-decay L}: peak at (n-1/2)/decay, then the
    // exponential wins; margin-scaled analytic truncation point.
    let peak = if n == 0 {
        0.0
    } else {
        (n as f64 - 0.5) / decay
    };
    let l_max = cfg.truncation_margin * (peak + 32.0 / decay + 1.0);

    // Oscillations of L_n(4L) cluster quadratically near the origin, so
    // quadratic spacing keeps roughly one root per panel; beyond the last
    // root the integrand is monotone and geometric panels suffice.
    let l_osc = (n as f64 + 2.5).min(l_max);
    let m = 2 * n + 8;
    let mut breaks: Vec<f64> = (0..=m)
        .map(|j| l_osc * (j as f64 / m as f64).powi(2))
        .collect();
    let mut t = l_osc;
    while t < l_max {
        t *= 2.0;
        breaks.push(t.min(l_max));
    }

    let integrand = |l: f64| -> Result<f64> {
        let (mant, ln_scale) = laguerre_scaled(n, 0, 4.0 * l)?;
        let i0s = bessel_i0_scaled(b * l, &budget)?;
        Ok(mant * i0s * (ln_scale - decay * l).exp())
    };
    let raw = adaptive(integrand, &breaks, cfg)?;
    if !raw.converged {
        return Err(Error::QuadratureNotConverged("radial_pnd"));
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let scale = 4.0 / (alpha * beta);
    Ok(IntegralResult {
        value: sign * scale * raw.value,
        error_estimate: scale * raw.error_estimate,
        converged: true,
        diverged: false,
    })
}

/// ln of the K-integrand envelope for P(I):
/// e^{K(1-beta^2)/2} I0(K(alpha^2-beta^2)/4) in scaled form.
fn ln_k_envelope(alpha: f64, beta: f64, k: f64, budget: &AccuracyBudget) -> Result<f64> {
    let x = 0.25 * k * (alpha * alpha - beta * beta);
    Ok(0.5 * k * (1.0 - beta * beta) + bessel_i0_scaled(x, budget)?.ln())
}

/// Single-integral route to P(I):
/// int_0^inf dK J0(2 sqrt(IK)) e^{K/2} e^{-K(alpha^2+beta^2)/4}
/// I0(K(alpha^2-beta^2)/4).
///
/// For beta > 1 the integrand decays like e^{-K(beta^2-1)/2} and the
/// integral is evaluated; for beta < 1 it grows like e^{K(1-beta^2)/2}
/// and divergence is declared from the sampled log-envelope slope
/// (positive over two consecutive decades beyond K = 50).  Growth rates
/// too small for that test, like |beta - 1| within boundary_eps, are
/// reported as inconclusive rather than guessed.
pub fn p_of_i_kintegral(
    s: &PhysicalGaussianState,
    i: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    if !i.is_finite() {
        return Err(Error::NonFinite("intensity"));
    }
    if i < 0.0 {
        return Err(Error::Precondition("p_of_I_kintegral requires I >= 0"));
    }
    let alpha = s.alpha();
    let beta = s.beta();
    if (beta - 1.0).abs() <= BOUNDARY_EPS {
        return Err(Error::BoundaryInconclusive);
    }
    let budget = AccuracyBudget::strict();

    // Divergence scan on decades 50, 5e2, ..., 5e5.
    let lnw: Vec<f64> = (0..5)
        .map(|j| ln_k_envelope(alpha, beta, 50.0 * 10f64.powi(j), &budget))
        .collect::<Result<_>>()?;
    let mut consecutive = 0usize;
    for w in lnw.windows(2) {
        if w[1] > w[0] {
            consecutive += 1;
            if consecutive >= 2 {
                return Ok(IntegralResult::diverged());
            }
        } else {
            consecutive = 0;
        }
    }
    if beta < 1.0 {
        // grows, but too slowly for the slope test to certify
        return Err(Error::BoundaryInconclusive);
    }

    let rate = 0.5 * (beta * beta - 1.0);
    let trunc = cfg.truncation_margin * 32.0 / rate;
    // e^{K/2} e^{-K(alpha^2+beta^2)/4} I0(K(alpha^2-beta^2)/4): restoring
    // the scaling exponent x collapses the rates to K(1-beta^2)/2.
    let w = |k: f64| -> Result<f64> {
        let x = 0.25 * k * (alpha * alpha - beta * beta);
        Ok((0.5 * k * (1.0 - beta * beta)).exp() * bessel_i0_scaled(x, &budget)?)
    };
    fourier_bessel(w, i, trunc, cfg)
}

/// Numeric certificate for the Laplace-Bessel identity
/// int_0^inf e^{-ax} J0(2 sqrt(bx)) I0(cx) dx
///   = (a^2-c^2)^{-1/2} exp(-ab/(a^2-c^2)) I0(cb/(a^2-c^2)),
/// valid for a > |c| >= 0, b > 0.  Returns (quadrature lhs, closed rhs).
pub fn verify_laplace_bessel_i0(
    a: f64,
    b: f64,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<(IntegralResult, f64)> {
    for v in [a, b, c] {
        if !v.is_finite() {
            return Err(Error::NonFinite("identity parameter"));
        }
    }
    if a <= c.abs() || b <= 0.0 {
        return Err(Error::Precondition(
            "laplace-bessel identity requires a > |c| >= 0 and b > 0",
        ));
    }
    let budget = AccuracyBudget::strict();
    let decay = a - c.abs();
    let trunc = cfg.truncation_margin * 32.0 / decay;
    let f = |x: f64| -> Result<f64> { Ok((-decay * x).exp() * bessel_i0_scaled(c * x, &budget)?) };
    let lhs = fourier_bessel(f, b, trunc, cfg)?;
    let d = a * a - c * c;
    let rhs = (-b / (a + c.abs())).exp() * bessel_i0_scaled(c * b / d, &budget)? / d.sqrt();
    Ok((lhs, rhs))
}

/// Numeric certificate for the hypergeometric moment identity
/// int_0^inf e^{-ax} x^n I0(bx) dx
///   = (n!/a^{n+1}) F((n+1)/2, n/2+1; 1; b^2/a^2),
/// valid for a > |b| >= 0.  Returns (quadrature lhs, closed rhs).
pub fn verify_hypergeom_moment(
    a: f64,
    b: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<(IntegralResult, f64)> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("identity parameter"));
    }
    if a <= b.abs() {
        return Err(Error::Precondition(
            "hypergeometric moment identity requires a > |b| >= 0",
        ));
    }
    if n > 50 {
        return Err(Error::Precondition(
            "hypergeometric moment identity requires n <= 50",
        ));
    }
    let budget = AccuracyBudget::strict();
    let decay = a - b.abs();
    let peak = n as f64 / decay;
    let trunc = cfg.truncation_margin * (peak + 32.0 / decay);
    let nf = n as f64;
    let f = |x: f64| -> Result<f64> {
        if x <= 0.0 {
            return Ok(if n == 0 { 1.0 } else { 0.0 });
        }
        let i0s = bessel_i0_scaled(b * x, &budget)?;
        Ok((nf * x.ln() - decay * x).exp() * i0s)
    };
    let mut breaks = geometric_breaks(trunc, 14);
    breaks.dedup_by(|x, y| x == y);
    let lhs = adaptive(f, &breaks, cfg)?;
    let z = (b / a) * (b / a);
    let hyp = gauss_2f1(0.5 * (nf + 1.0), 0.5 * nf + 1.0, 1.0, z, &budget)?;
    let rhs = (ln_factorial(n) - (nf + 1.0) * a.ln()).exp() * hyp;
    Ok((lhs, rhs))
}
