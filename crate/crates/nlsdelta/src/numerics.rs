//! Scalar root-finding utilities behind the closure equations: exhaustive
//! positive-root scanning, the Kerr modulus cubic, and the real branches of
//! the Lambert W function.

use crate::model::DomainError;
use num_complex::Complex64;
use thiserror::Error;

/// Every grid evaluation of the scanned function returned NaN.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("all {n_scan} scan evaluations over [{r_min}, {r_max}] returned NaN")]
pub struct ScanError {
    pub r_min: f64,
    pub r_max: f64,
    pub n_scan: usize,
}

/// The endpoints handed to [`refine_root`] do not straddle a sign change.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("no sign change on bracket: h({a}) = {fa}, h({b}) = {fb}")]
pub struct BracketError {
    pub a: f64,
    pub fa: f64,
    pub b: f64,
    pub fb: f64,
}

/// Scan window and refinement tolerances for positive-root searches.
///
/// The grid is log-spaced over `[r_min, r_max]` (`r_min > 0`), which is why
/// widening decisions elsewhere speak in decades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootScanConfig {
    pub r_min: f64,
    pub r_max: f64,
    /// Number of grid points, at least 2.
    pub n_scan: usize,
    /// Bracket-width target for each refined root, and the merge distance for
    /// deduplication.
    pub refine_tol: f64,
    pub max_refine_iters: usize,
}

impl RootScanConfig {
    /// Scan window for a closure modulus given the incident amplitude and the
    /// largest coupling-to-wavenumber ratio in the problem. Focusing
    /// nonlinearities can push the center modulus well past `|A|`, so the
    /// ceiling stretches with `|z|/k`; the solver widens it further when roots
    /// crowd the top decade.
    pub fn for_amplitude(a_mod: f64, max_coupling_over_k: f64) -> Self {
        debug_assert!(a_mod > 0.0);
        let ceiling = 10.0f64.max(1.0 + max_coupling_over_k.max(0.0));
        Self {
            r_min: 1e-9 * a_mod,
            r_max: a_mod * ceiling,
            n_scan: 4096,
            refine_tol: 1e-12,
            max_refine_iters: 200,
        }
    }

    /// Same configuration with the ceiling doubled.
    pub fn widened(&self) -> Self {
        Self {
            r_max: self.r_max * 2.0,
            ..*self
        }
    }

    fn assert_valid(&self) {
        assert!(
            self.r_min > 0.0 && self.r_min < self.r_max,
            "scan window requires 0 < r_min < r_max"
        );
        assert!(self.n_scan >= 2, "scan grid needs at least 2 points");
        assert!(self.refine_tol > 0.0, "refine_tol must be positive");
    }
}

/// A refined root from a scan. `grazing` marks near-tangent double roots
/// (grid sign pattern `+0+` / `-0-`), which scanning reports once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRoot {
    pub value: f64,
    pub grazing: bool,
}

/// Finds all roots of `h` on the log grid, refining each sign-change bracket
/// and deduplicating within `refine_tol`. Grid points where `h` is NaN are
/// skipped as bracket endpoints (the NaN contract lets closure residuals
/// signal domain failures without aborting the scan).
pub fn find_all_positive_roots<F>(h: F, cfg: &RootScanConfig) -> Result<Vec<ScanRoot>, ScanError>
where
    F: Fn(f64) -> f64,
{
    cfg.assert_valid();
    let n = cfg.n_scan;
    let ratio = (cfg.r_max / cfg.r_min).powf(1.0 / (n as f64 - 1.0));
    let mut xs = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    let mut x = cfg.r_min;
    for i in 0..n {
        if i == n - 1 {
            x = cfg.r_max;
        }
        xs.push(x);
        vs.push(h(x));
        x *= ratio;
    }
    if vs.iter().all(|v| v.is_nan()) {
        return Err(ScanError {
            r_min: cfg.r_min,
            r_max: cfg.r_max,
            n_scan: n,
        });
    }

    let mut roots: Vec<ScanRoot> = Vec::new();

    // exact grid zeros; tangency shows as equal signs on both flanks
    for i in 0..n {
        if vs[i] == 0.0 {
            let left = (0..i).rev().map(|j| vs[j]).find(|v| v.is_finite() && *v != 0.0);
            let right = (i + 1..n).map(|j| vs[j]).find(|v| v.is_finite() && *v != 0.0);
            let grazing = match (left, right) {
                (Some(l), Some(r)) => l.signum() == r.signum(),
                _ => false,
            };
            roots.push(ScanRoot {
                value: xs[i],
                grazing,
            });
        }
    }

    for i in 0..n - 1 {
        let (fa, fb) = (vs[i], vs[i + 1]);
        if !fa.is_finite() || !fb.is_finite() {
            continue;
        }
        if fa * fb < 0.0 {
            let value = refine_bracketed(
                &h,
                xs[i],
                fa,
                xs[i + 1],
                fb,
                cfg.refine_tol,
                cfg.max_refine_iters,
            );
            roots.push(ScanRoot {
                value,
                grazing: false,
            });
        }
    }

    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    roots.dedup_by(|b, a| {
        if (b.value - a.value).abs() <= cfg.refine_tol {
            a.grazing = a.grazing || b.grazing;
            true
        } else {
            false
        }
    });
    Ok(roots)
}

/// Hybrid secant/bisection refinement of a sign-change bracket down to width
/// `tol`, polishing to the smallest attainable `|h|`.
pub fn refine_root<F>(h: F, bracket: (f64, f64), tol: f64) -> Result<f64, BracketError>
where
    F: Fn(f64) -> f64,
{
    let (a, b) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let fa = h(a);
    let fb = h(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !fa.is_finite() || !fb.is_finite() || fa.signum() == fb.signum() {
        return Err(BracketError { a, fa, b, fb });
    }
    Ok(refine_bracketed(&h, a, fa, b, fb, tol, 200))
}

fn refine_bracketed<F>(
    h: &F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    tol: f64,
    max_iters: usize,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    // >0 when the low side was kept, <0 for the high side; magnitude counts
    // consecutive keeps so stagnating secant steps get bisected away
    let mut side: i32 = 0;
    for _ in 0..max_iters {
        let width = b - a;
        if width <= tol || width <= f64::EPSILON * 4.0 * a.abs().max(b.abs()) {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let mut x = if side.abs() >= 2 || !secant.is_finite() || secant <= a || secant >= b {
            0.5 * (a + b)
        } else {
            secant
        };
        let mut fx = h(x);
        if fx.is_nan() {
            x = 0.5 * (a + b);
            fx = h(x);
        }
        if fx.is_nan() {
            // probe the quarters before giving up on this bracket
            let mut found = false;
            for frac in [0.25, 0.75, 0.1, 0.9] {
                x = a + frac * (b - a);
                fx = h(x);
                if !fx.is_nan() {
                    found = true;
                    break;
                }
            }
            if !found {
                break;
            }
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            return x;
        }
        if fa.signum() != fx.signum() {
            b = x;
            fb = fx;
            side = if side < 0 { side - 1 } else { -1 };
        } else {
            a = x;
            fa = fx;
            side = if side > 0 { side + 1 } else { 1 };
        }
    }
    if fa.abs() < best.1.abs() {
        best = (a, fa);
    }
    if fb.abs() < best.1.abs() {
        best = (b, fb);
    }
    best.0
}

/// Positive solutions `x = |psi|` of the Kerr modulus equation
/// `|zh|^2 x^6 - 2 Im(zh) x^4 + x^2 - a^2 = 0`, solved as a cubic in
/// `y = x^2` by closed-form resolution (trigonometric for three real roots,
/// Cardano otherwise), then Newton-polished. `zh = z/2k` is the reduced
/// coupling and `a = |A|` the incident modulus. Returns ascending moduli;
/// `zh = 0` falls back to the linear answer `x = a`.
pub fn solve_modulus_cubic(z_hat: Complex64, a_mod: f64) -> Vec<f64> {
    debug_assert!(a_mod > 0.0);
    let a2 = a_mod * a_mod;
    if z_hat == Complex64::new(0.0, 0.0) {
        return vec![a_mod];
    }
    // |zh|^2 y^3 - 2 Im(zh) y^2 + y - a^2 = 0
    let ca = z_hat.norm_sqr();
    let cb = -2.0 * z_hat.im;
    let cc = 1.0;
    let cd = -a2;

    // depressed form t^3 + p t + q, y = t - cb/(3 ca)
    let shift = cb / (3.0 * ca);
    let p = (3.0 * ca * cc - cb * cb) / (3.0 * ca * ca);
    let q = (2.0 * cb * cb * cb - 9.0 * ca * cb * cc + 27.0 * ca * ca * cd)
        / (27.0 * ca * ca * ca);

    let discriminant = -4.0 * p * p * p - 27.0 * q * q;
    let scale = (4.0 * p.abs().powi(3)).max(27.0 * q * q).max(f64::MIN_POSITIVE);
    let classified_real = p < 0.0 && discriminant / scale > -1e-14;

    let mut ys: Vec<f64> = Vec::with_capacity(3);
    if classified_real {
        // three real roots (possibly repeated) via the trigonometric form
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos();
        for j in 0..3 {
            let t = m * ((theta - 2.0 * std::f64::consts::PI * j as f64) / 3.0).cos();
            ys.push(t - shift);
        }
    } else {
        // one real root via Cardano
        let half_q = q / 2.0;
        let rad = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let t = (-half_q + rad).cbrt() + (-half_q - rad).cbrt();
        ys.push(t - shift);
    }

    // polish on the original cubic; closed forms lose digits when terms cancel
    for y in ys.iter_mut() {
        for _ in 0..3 {
            let f = ((ca * *y + cb) * *y + cc) * *y + cd;
            let df = (3.0 * ca * *y + 2.0 * cb) * *y + cc;
            if df != 0.0 {
                let step = f / df;
                if step.is_finite() {
                    *y -= step;
                }
            }
        }
    }

    ys.retain(|y| *y > 0.0 && y.is_finite());
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * (1.0 + a.abs()));
    ys.iter().map(|y| y.sqrt()).collect()
}

/// Real branch selector for [`lambert_w`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambertBranch {
    /// Principal branch `W_0`, defined for `y >= -1/e`, values `>= -1`.
    Zero,
    /// Lower branch `W_{-1}`, defined for `-1/e <= y < 0`, values `<= -1`.
    MinusOne,
}

const NEG_INV_E: f64 = -0.36787944117144233;

/// Solves `w e^w = y` on the requested real branch by Halley iteration from a
/// branch-appropriate seed, with a monotone-bisection fallback. Converges to
/// full double precision (round-trip relative error at the 1e-14 level).
pub fn lambert_w(branch: LambertBranch, y: f64) -> Result<f64, DomainError> {
    let domain_err = |branch_idx: i32, hi: f64| DomainError::LambertArgument {
        branch: branch_idx,
        argument: y,
        lo: NEG_INV_E,
        hi,
    };
    if y.is_nan() {
        return Err(domain_err(
            match branch {
                LambertBranch::Zero => 0,
                LambertBranch::MinusOne => -1,
            },
            match branch {
                LambertBranch::Zero => f64::INFINITY,
                LambertBranch::MinusOne => 0.0,
            },
        ));
    }
    // allow a couple of ulps of slack at the branch point
    let below_branch_point = y < NEG_INV_E && (NEG_INV_E - y) > 4.0 * f64::EPSILON;
    match branch {
        LambertBranch::Zero => {
            if below_branch_point {
                return Err(domain_err(0, f64::INFINITY));
            }
            if y == 0.0 {
                return Ok(0.0);
            }
        }
        LambertBranch::MinusOne => {
            if below_branch_point || y >= 0.0 {
                return Err(domain_err(-1, 0.0));
            }
        }
    }

    let pp = (2.0 * (std::f64::consts::E * y + 1.0)).max(0.0);
    let p = pp.sqrt();
    if p == 0.0 {
        return Ok(-1.0);
    }

    let seed = match branch {
        LambertBranch::Zero => {
            if y < -0.2 {
                -1.0 + p - pp / 3.0 + 11.0 / 72.0 * p * pp
            } else if y < 0.5 {
                y * (1.0 - y)
            } else if y < std::f64::consts::E {
                (1.0 + y).ln()
            } else {
                let l1 = y.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        LambertBranch::MinusOne => {
            if y <= -0.2 {
                -1.0 - p - pp / 3.0 - 11.0 / 72.0 * p * pp
            } else {
                let l = (-y).ln();
                l - (-l).ln()
            }
        }
    };

    if let Some(w) = halley_w(seed, y, branch) {
        return Ok(w);
    }
    Ok(bisect_w(y, branch))
}

fn halley_w(seed: f64, y: f64, branch: LambertBranch) -> Option<f64> {
    let mut w = seed;
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - y;
        if f.abs() <= 4.0 * f64::EPSILON * y.abs().max(f64::MIN_POSITIVE) {
            return branch_check(w, branch);
        }
        let w1 = w + 1.0;
        if w1.abs() < 1e-12 {
            return None;
        }
        let denom = ew * w1 - (w + 2.0) * f / (2.0 * w1);
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        let step = f / denom;
        let w_next = w - step;
        if !w_next.is_finite() {
            return None;
        }
        if (w_next - w).abs() <= f64::EPSILON * (1.0 + w.abs()) {
            return branch_check(w_next, branch);
        }
        w = w_next;
    }
    None
}

fn branch_check(w: f64, branch: LambertBranch) -> Option<f64> {
    match branch {
        LambertBranch::Zero if w >= -1.0 - 1e-10 => Some(w.max(-1.0)),
        LambertBranch::MinusOne if w <= -1.0 + 1e-10 => Some(w.min(-1.0)),
        _ => None,
    }
}

/// `w e^w` is monotone on each branch interval, so bisection cannot fail.
fn bisect_w(y: f64, branch: LambertBranch) -> f64 {
    let (mut lo, mut hi) = match branch {
        // increasing on [-1, inf)
        LambertBranch::Zero => {
            let hi = if y > 0.0 { 1.0 + (1.0 + y).ln() } else { 0.0 };
            (-1.0, hi)
        }
        // decreasing on (-inf, -1]; pick lo deep enough that w e^w > y
        LambertBranch::MinusOne => {
            let mut lo = -2.0f64;
            while lo * lo.exp() < y && lo > -746.0 {
                lo *= 2.0;
            }
            (lo, -1.0)
        }
    };
    let increasing = matches!(branch, LambertBranch::Zero);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let v = mid * mid.exp() - y;
        let go_right = if increasing { v < 0.0 } else { v > 0.0 };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    // two Halley polish steps recover the last bits
    halley_w(w, y, branch).unwrap_or(w)
}
