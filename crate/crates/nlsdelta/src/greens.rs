//! The consistency-matrix scattering solver.
//!
//! Evaluating the Lippmann-Schwinger solution at the delta centers turns the
//! differential equation into an algebraic system `Phi psi = A e^{ikc}`. The
//! matrix `Phi` depends on the unknown moduli `|psi(c_i)|` through the
//! effective couplings `g_i`, but its row-reduced form is upper triangular:
//! `psi(c_i)` depends only on centers to its right. Gauging the last center
//! to a trial modulus `r` therefore determines every other modulus, and the
//! remaining scalar closure equation `r |det Phi(r)| = |A|` has one root per
//! coexisting scattering branch.

use crate::linalg::complex_det;
use crate::model::{
    DomainError, Incidence, ScatteringProblem, ScatteringSolution,
};
use crate::numerics::{find_all_positive_roots, RootScanConfig, ScanError};
use num_complex::Complex64;
use thiserror::Error;

/// The closure scan found no scattering branch.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoBranchError {
    #[error(
        "no closure root in [{r_min:e}, {r_max:e}] after {widenings} widenings; \
         the branch modulus likely exceeds the window — raise RootScanConfig::r_max \
         (or lower r_min) and retry"
    )]
    NoRoot {
        r_min: f64,
        r_max: f64,
        widenings: usize,
    },
    #[error(transparent)]
    Scan(#[from] ScanError),
}

/// The consistency matrix at a fixed set of center moduli, with its
/// determinant cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    n: usize,
    entries: Vec<Complex64>,
    determinant: Complex64,
}

impl PhiMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn determinant(&self) -> Complex64 {
        self.determinant
    }

    /// Largest row residual `|sum_j Phi_ij psi_j - rhs_i|`.
    pub fn row_residual(&self, psi: &[Complex64], rhs: &[Complex64]) -> f64 {
        assert_eq!(psi.len(), self.n);
        assert_eq!(rhs.len(), self.n);
        let mut worst = 0.0f64;
        for (i, r) in rhs.iter().enumerate() {
            let mut acc = -r;
            for (j, p) in psi.iter().enumerate() {
                acc += self.entry(i, j) * p;
            }
            worst = worst.max(acc.norm());
        }
        worst
    }
}

/// Builds the consistency matrix for the given center moduli:
/// diagonal `1 + g_i`, off-diagonal `(i, j) = g_j e^{ik|c_i - c_j|}`, where
/// each `g_j` is the effective coupling at `moduli[j]`.
pub fn build_phi(problem: &ScatteringProblem, moduli: &[f64]) -> Result<PhiMatrix, DomainError> {
    let n = problem.num_centers();
    assert_eq!(moduli.len(), n, "one modulus per center");
    let k = problem.wavenumber();
    let centers = problem.centers();
    let gs: Vec<Complex64> = centers
        .iter()
        .zip(moduli)
        .map(|(c, &m)| c.nonlinearity().effective_g(m, k))
        .collect::<Result<_, _>>()?;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j {
                Complex64::new(1.0, 0.0) + gs[i]
            } else {
                let phase = k * (centers[i].position - centers[j].position).abs();
                gs[j] * Complex64::new(0.0, phase).exp()
            };
        }
    }
    let mut scratch = entries.clone();
    let determinant = complex_det(n, &mut scratch);
    Ok(PhiMatrix {
        n,
        entries,
        determinant,
    })
}

/// The gauge-fixed center values implied by a trial modulus at the last
/// center: `ratios[i] = psi(c_i) / psi(c_N)` (last entry exactly 1), the
/// moduli `|psi(c_i)|`, and the effective couplings at those moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterChain {
    pub ratios: Vec<Complex64>,
    pub moduli: Vec<f64>,
    pub g_values: Vec<Complex64>,
}

/// Back-substitution through the row-reduced consistency system, treating the
/// problem in its left-incident form (the rightmost center is the pivot
/// carrying the inhomogeneity).
///
/// With `psi_hat(c_N) = r_trial` fixed real-positive, rows `i < N` of the
/// reduced system give
///
/// ```text
/// psi_hat(c_i) = e^{ikc_i} [ e^{-ikc_N} (1 - g_N (e^{2ik(c_N-c_i)} - 1)) psi_hat(c_N)
///                - sum_{i<j<N} g_j e^{-ikc_j} (e^{2ik(c_j-c_i)} - 1) psi_hat(c_j) ]
/// ```
///
/// where each `g_j` is evaluated at the already-known `|psi_hat(c_j)|`; the
/// triangular structure guarantees every coupling is evaluable by the time it
/// is needed.
pub fn back_substitute(
    problem: &ScatteringProblem,
    r_trial: f64,
) -> Result<CenterChain, DomainError> {
    debug_assert!(r_trial > 0.0);
    let n = problem.num_centers();
    let k = problem.wavenumber();
    let centers = problem.centers();
    let last = n - 1;
    let c_last = centers[last].position;

    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    let mut moduli = vec![0.0f64; n];
    let mut gs = vec![Complex64::new(0.0, 0.0); n];

    psi[last] = Complex64::new(r_trial, 0.0);
    moduli[last] = r_trial;
    gs[last] = centers[last].nonlinearity().effective_g(r_trial, k)?;

    for i in (0..last).rev() {
        let ci = centers[i].position;
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, -k * c_last).exp()
            * (one - gs[last] * (Complex64::new(0.0, 2.0 * k * (c_last - ci)).exp() - one))
            * psi[last];
        for j in i + 1..last {
            let cj = centers[j].position;
            acc -= gs[j]
                * Complex64::new(0.0, -k * cj).exp()
                * (Complex64::new(0.0, 2.0 * k * (cj - ci)).exp() - one)
                * psi[j];
        }
        psi[i] = Complex64::new(0.0, k * ci).exp() * acc;
        moduli[i] = psi[i].norm();
        gs[i] = centers[i].nonlinearity().effective_g(moduli[i], k)?;
    }

    let ratios = psi.iter().map(|p| p / r_trial).collect();
    Ok(CenterChain {
        ratios,
        moduli,
        g_values: gs,
    })
}

/// The scalar closure equation: `r |det Phi(moduli(r))| - |A|`, whose positive
/// roots are the branch moduli at the last center. Domain failures (a modulus
/// hitting zero under a negative exponent) are reported as NaN so the scanner
/// can skip the point.
pub fn closure_residual(problem: &ScatteringProblem, r_trial: f64) -> f64 {
    let chain = match back_substitute(problem, r_trial) {
        Ok(chain) => chain,
        Err(_) => return f64::NAN,
    };
    match build_phi(problem, &chain.moduli) {
        Ok(phi) => r_trial * phi.determinant().norm() - problem.incident_amplitude().norm(),
        Err(_) => f64::NAN,
    }
}

/// Scan window matched to the problem: the ceiling stretches with the largest
/// `|z|/k` so focusing branches beyond `|A|` stay in range.
pub fn default_scan_config(problem: &ScatteringProblem) -> RootScanConfig {
    let k = problem.wavenumber();
    let max_ratio = problem
        .centers()
        .iter()
        .map(|c| c.coupling.norm() / k)
        .fold(0.0f64, f64::max);
    RootScanConfig::for_amplitude(problem.incident_amplitude().norm(), max_ratio)
}

/// Finds every coexisting scattering branch.
///
/// Each closure root fixes the moduli; the physical phase is restored through
/// `psi(c_N) = A e^{ikc_N} / det Phi`, and the amplitudes follow from the
/// asymptotics of the formal solution:
/// `T = 1 - (1/A) sum_j g_j psi(c_j) e^{-ikc_j}`,
/// `R = -(1/A) sum_j g_j psi(c_j) e^{+ikc_j}`.
/// Right incidence solves the mirrored problem and maps the center values
/// back; `R` and `T` are mirror-invariant as complex numbers.
///
/// Branches are indexed ascending in the closure modulus. The scan ceiling is
/// doubled (up to three times) while roots crowd its top decade.
pub fn solve_scattering(
    problem: &ScatteringProblem,
    cfg: &RootScanConfig,
) -> Result<Vec<ScatteringSolution>, NoBranchError> {
    match problem.incidence() {
        Incidence::Left => solve_left_incident(problem, cfg),
        Incidence::Right => {
            let mirrored = problem.mirrored();
            let mut solutions = solve_left_incident(&mirrored, cfg)?;
            for sol in solutions.iter_mut() {
                sol.psi_at_centers.reverse();
            }
            Ok(solutions)
        }
    }
}

/// [`solve_scattering`] with the default scan window.
pub fn solve_scattering_default(
    problem: &ScatteringProblem,
) -> Result<Vec<ScatteringSolution>, NoBranchError> {
    solve_scattering(problem, &default_scan_config(problem))
}

fn solve_left_incident(
    problem: &ScatteringProblem,
    cfg: &RootScanConfig,
) -> Result<Vec<ScatteringSolution>, NoBranchError> {
    debug_assert_eq!(problem.incidence(), Incidence::Left);
    let h = |r: f64| closure_residual(problem, r);

    let mut active = *cfg;
    let mut widenings = 0usize;
    let mut roots = find_all_positive_roots(h, &active)?;
    while widenings < 3 && roots.iter().any(|r| r.value > active.r_max / 10.0) {
        active = active.widened();
        widenings += 1;
        roots = find_all_positive_roots(h, &active)?;
    }

    let mut solutions = Vec::with_capacity(roots.len());
    for root in &roots {
        let chain = match back_substitute(problem, root.value) {
            Ok(chain) => chain,
            Err(_) => continue,
        };
        let phi = match build_phi(problem, &chain.moduli) {
            Ok(phi) => phi,
            Err(_) => continue,
        };
        let residual = (root.value * phi.determinant().norm()
            - problem.incident_amplitude().norm())
        .abs();
        solutions.push(assemble_solution(
            problem,
            &chain,
            phi.determinant(),
            solutions.len(),
            residual,
        ));
    }
    if solutions.is_empty() {
        return Err(NoBranchError::NoRoot {
            r_min: active.r_min,
            r_max: active.r_max,
            widenings,
        });
    }
    Ok(solutions)
}

fn assemble_solution(
    problem: &ScatteringProblem,
    chain: &CenterChain,
    det: Complex64,
    branch_index: usize,
    closure_residual: f64,
) -> ScatteringSolution {
    let k = problem.wavenumber();
    let a = problem.incident_amplitude();
    let centers = problem.centers();
    let c_last = centers[centers.len() - 1].position;

    let psi_last = a * Complex64::new(0.0, k * c_last).exp() / det;
    let psi: Vec<Complex64> = chain.ratios.iter().map(|ratio| ratio * psi_last).collect();

    let mut transmission = Complex64::new(1.0, 0.0);
    let mut reflection = Complex64::new(0.0, 0.0);
    for (j, center) in centers.iter().enumerate() {
        let term = chain.g_values[j] * psi[j] / a;
        transmission -= term * Complex64::new(0.0, -k * center.position).exp();
        reflection -= term * Complex64::new(0.0, k * center.position).exp();
    }

    ScatteringSolution {
        psi_at_centers: psi,
        reflection,
        transmission,
        branch_index,
        closure_residual,
    }
}

/// Evaluates the formal solution anywhere on the line:
/// `psi(x) = A e^{+-ikx} - sum_j g_j e^{ik|x - c_j|} psi(c_j)` (sign of the
/// incident phase set by the incidence side). The couplings are reevaluated
/// at the solution's center moduli.
pub fn evaluate_wavefunction(
    problem: &ScatteringProblem,
    solution: &ScatteringSolution,
    x: f64,
) -> Complex64 {
    let k = problem.wavenumber();
    let a = problem.incident_amplitude();
    let mut psi = match problem.incidence() {
        Incidence::Left => a * Complex64::new(0.0, k * x).exp(),
        Incidence::Right => a * Complex64::new(0.0, -k * x).exp(),
    };
    for (center, value) in problem.centers().iter().zip(&solution.psi_at_centers) {
        let g = center
            .nonlinearity()
            .effective_g(value.norm(), k)
            .expect("solution moduli are inside the nonlinearity domain");
        psi -= g * Complex64::new(0.0, k * (x - center.position).abs()).exp() * value;
    }
    psi
}

/// Largest row residual of the consistency system
/// `sum_j Phi_ij psi(c_j) = A e^{ikc_i}` for an accepted solution (mirrored
/// internally for right incidence).
pub fn consistency_residual(problem: &ScatteringProblem, solution: &ScatteringSolution) -> f64 {
    let (problem, psi): (ScatteringProblem, Vec<Complex64>) = match problem.incidence() {
        Incidence::Left => (problem.clone(), solution.psi_at_centers.clone()),
        Incidence::Right => {
            let mut psi = solution.psi_at_centers.clone();
            psi.reverse();
            (problem.mirrored(), psi)
        }
    };
    let moduli: Vec<f64> = psi.iter().map(|p| p.norm()).collect();
    let phi = match build_phi(&problem, &moduli) {
        Ok(phi) => phi,
        Err(_) => return f64::NAN,
    };
    let k = problem.wavenumber();
    let a = problem.incident_amplitude();
    let rhs: Vec<Complex64> = problem
        .centers()
        .iter()
        .map(|c| a * Complex64::new(0.0, k * c.position).exp())
        .collect();
    phi.row_residual(&psi, &rhs)
}

/// Single-center fast path: the closure collapses to the modulus equation
/// `x^2 |f(x)/2k|^2 - 2 x^2 Im(f(x)/2k) + x^2 = |A|^2`, solved by the Kerr
/// cubic for `alpha = 2`, in closed form for `alpha = 0`, and by scanning
/// otherwise. Then `R = -g e^{2ikc} / (1 + g)` and `T = 1 / (1 + g)`.
pub fn single_delta_closed_form(
    problem: &ScatteringProblem,
) -> Result<Vec<ScatteringSolution>, NoBranchError> {
    assert_eq!(
        problem.num_centers(),
        1,
        "closed form applies to a single delta center"
    );
    let center = problem.centers()[0];
    let k = problem.wavenumber();
    let a = problem.incident_amplitude();
    let a_mod = a.norm();
    let z_hat = center.coupling / (2.0 * k);
    let alpha = center.exponent;

    let moduli: Vec<f64> = if alpha == 2.0 {
        crate::numerics::solve_modulus_cubic(z_hat, a_mod)
    } else if alpha == 0.0 {
        let g = Complex64::new(0.0, 1.0) * z_hat;
        vec![a_mod / (Complex64::new(1.0, 0.0) + g).norm()]
    } else {
        let h = |x: f64| {
            let f_hat = z_hat * x.powf(alpha);
            x * x * (f_hat.norm_sqr() - 2.0 * f_hat.im + 1.0) - a_mod * a_mod
        };
        let cfg = RootScanConfig::for_amplitude(a_mod, center.coupling.norm() / k);
        find_all_positive_roots(h, &cfg)?
            .into_iter()
            .map(|r| r.value)
            .collect()
    };
    if moduli.is_empty() {
        let cfg = RootScanConfig::for_amplitude(a_mod, center.coupling.norm() / k);
        return Err(NoBranchError::NoRoot {
            r_min: cfg.r_min,
            r_max: cfg.r_max,
            widenings: 0,
        });
    }

    // mirror for right incidence is just c -> -c for a single center
    let c_eff = match problem.incidence() {
        Incidence::Left => center.position,
        Incidence::Right => -center.position,
    };

    let one = Complex64::new(1.0, 0.0);
    let solutions = moduli
        .iter()
        .enumerate()
        .map(|(branch_index, &x)| {
            let f = center
                .nonlinearity()
                .evaluate(x)
                .expect("scan keeps moduli positive");
            let g = Complex64::new(0.0, 1.0 / (2.0 * k)) * f;
            let denom = one + g;
            let psi = a * Complex64::new(0.0, k * c_eff).exp() / denom;
            ScatteringSolution {
                psi_at_centers: vec![psi],
                reflection: -g * Complex64::new(0.0, 2.0 * k * c_eff).exp() / denom,
                transmission: one / denom,
                branch_index,
                closure_residual: (x * denom.norm() - a_mod).abs(),
            }
        })
        .collect();
    Ok(solutions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeltaCenter;
    use approx::assert_relative_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn problem(
        centers: Vec<(f64, Complex64, f64)>,
        k: f64,
        a: Complex64,
        incidence: Incidence,
    ) -> ScatteringProblem {
        ScatteringProblem::new(
            centers
                .into_iter()
                .map(|(p, z, al)| DeltaCenter::new(p, z, al))
                .collect(),
            k,
            a,
            incidence,
        )
        .unwrap()
    }

    fn linear_three(z: Complex64, k: f64) -> ScatteringProblem {
        problem(
            vec![(0.0, z, 0.0), (1.0, z, 0.0), (2.0, z, 0.0)],
            k,
            c64(1.0, 0.0),
            Incidence::Left,
        )
    }

    #[test]
    fn phi_single_linear_center() {
        let p = problem(vec![(0.0, c64(2.0, 0.0), 0.0)], 1.0, c64(1.0, 0.0), Incidence::Left);
        let phi = build_phi(&p, &[1.0]).unwrap();
        assert_eq!(phi.size(), 1);
        assert_relative_eq!(phi.entry(0, 0).re, 1.0);
        assert_relative_eq!(phi.entry(0, 0).im, 1.0);
        assert_relative_eq!(phi.determinant().re, 1.0);
        assert_relative_eq!(phi.determinant().im, 1.0);
    }

    #[test]
    fn phi_free_particle_is_identity() {
        let p = problem(
            vec![(0.0, c64(0.0, 0.0), 0.0), (1.0, c64(0.0, 0.0), 0.0)],
            1.0,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let phi = build_phi(&p, &[1.0, 1.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(phi.entry(i, j).re, want);
                assert_relative_eq!(phi.entry(i, j).im, 0.0);
            }
        }
        assert_relative_eq!(phi.determinant().re, 1.0);
    }

    // Independent evaluation of the printed three-center determinant
    // expansion, used as the oracle for the LU path.
    fn det3_expansion(gs: [Complex64; 3], pos: [f64; 3], k: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let e = |d: f64| Complex64::new(0.0, 2.0 * k * d).exp();
        let (g1, g2, g3) = (gs[0], gs[1], gs[2]);
        let (d21, d31, d32) = (pos[1] - pos[0], pos[2] - pos[0], pos[2] - pos[1]);
        one + g1
            + g2
            + g3
            + g1 * g2 * (one - e(d21))
            + g1 * g3 * (one - e(d31))
            + g2 * g3 * (one - e(d32))
            + g1 * g2 * g3 * (one - e(d21) + e(d31) - e(d32))
    }

    #[test]
    fn phi_det_matches_printed_three_center_expansion() {
        let k = 0.9;
        // equal real couplings first, then an asymmetric complex set
        for (z, moduli) in [
            (c64(2.0, 0.0), [1.0, 1.0, 1.0]),
            (c64(3.0, -1.5), [0.3, 1.7, 0.9]),
        ] {
            let p = problem(
                vec![(0.0, z, 1.0), (1.0, z, 1.0), (2.0, z, 1.0)],
                k,
                c64(1.0, 0.0),
                Incidence::Left,
            );
            let phi = build_phi(&p, &moduli).unwrap();
            let gs: Vec<Complex64> = p
                .centers()
                .iter()
                .zip(&moduli)
                .map(|(c, &m)| c.nonlinearity().effective_g(m, k).unwrap())
                .collect();
            let want = det3_expansion([gs[0], gs[1], gs[2]], [0.0, 1.0, 2.0], k);
            assert_relative_eq!(phi.determinant().re, want.re, max_relative = 1e-12);
            assert_relative_eq!(phi.determinant().im, want.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn chain_free_wave_has_plane_wave_ratios() {
        let p = problem(
            vec![
                (0.0, c64(0.0, 0.0), 0.0),
                (0.7, c64(0.0, 0.0), 0.0),
                (2.0, c64(0.0, 0.0), 0.0),
            ],
            1.3,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let chain = back_substitute(&p, 0.8).unwrap();
        assert_eq!(chain.ratios[2], c64(1.0, 0.0));
        for (i, center) in p.centers().iter().enumerate() {
            let want = Complex64::new(0.0, 1.3 * (center.position - 2.0)).exp();
            assert_relative_eq!(chain.ratios[i].re, want.re, epsilon = 1e-14);
            assert_relative_eq!(chain.ratios[i].im, want.im, epsilon = 1e-14);
            assert_relative_eq!(chain.moduli[i], 0.8, epsilon = 1e-14);
        }
    }

    #[test]
    fn chain_two_center_modulus_relation() {
        // |psi(c_1)| = |psi(c_2)| |g_2 (1 - e^{2ik(c_2-c_1)}) + 1|
        let k = 1.1;
        let p = problem(
            vec![(0.2, c64(1.5, 0.4), 2.0), (1.4, c64(0.8, -0.2), 1.0)],
            k,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let r = 0.63;
        let chain = back_substitute(&p, r).unwrap();
        let g2 = chain.g_values[1];
        let factor = (g2 * (Complex64::new(1.0, 0.0)
            - Complex64::new(0.0, 2.0 * k * (1.4 - 0.2)).exp())
            + Complex64::new(1.0, 0.0))
        .norm();
        assert_relative_eq!(chain.moduli[0], r * factor, max_relative = 1e-12);
        assert_relative_eq!(chain.ratios[0].norm() * r, chain.moduli[0], max_relative = 1e-12);
    }

    #[test]
    fn chain_matches_derived_three_center_row_formula() {
        // The first-center value from the recursion must equal the expanded
        // row-reduction result, whose linear g_3 term carries e^{2ik(c_3-c_1)}
        // (the product term fixes the same sign choice).
        let k = 0.8;
        let p = problem(
            vec![
                (0.0, c64(2.0, 0.5), 2.0),
                (1.0, c64(1.0, -0.3), 1.0),
                (2.0, c64(0.7, 0.0), 2.0),
            ],
            k,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let chain = back_substitute(&p, 0.5).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let e = |d: f64| Complex64::new(0.0, 2.0 * k * d).exp();
        let (g2, g3) = (chain.g_values[1], chain.g_values[2]);
        let bracket = one
            + g2 * (one - e(1.0))
            + g3 * (one - e(2.0))
            + g2 * g3 * (one - e(1.0) + e(2.0) - e(1.0));
        // ratio_1 = e^{ik(c_1 - c_3)} * bracket with c_1 = 0, c_3 = 2
        let want = Complex64::new(0.0, k * (0.0 - 2.0)).exp() * bracket;
        assert_relative_eq!(chain.ratios[0].re, want.re, max_relative = 1e-12);
        assert_relative_eq!(chain.ratios[0].im, want.im, max_relative = 1e-12);
    }

    #[test]
    fn closure_free_problem_roots_at_incident_modulus() {
        let p = problem(
            vec![(0.0, c64(0.0, 0.0), 0.0), (1.0, c64(0.0, 0.0), 0.0)],
            1.0,
            c64(0.0, 2.0),
            Incidence::Left,
        );
        assert_relative_eq!(closure_residual(&p, 0.5), -1.5, epsilon = 1e-14);
        assert_relative_eq!(closure_residual(&p, 2.0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn closure_single_kerr_root_matches_cubic() {
        let p = problem(
            vec![(0.0, c64(2.0, 0.0), 2.0)],
            1.0,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let expected = crate::numerics::solve_modulus_cubic(c64(1.0, 0.0), 1.0)[0];
        let root = crate::numerics::refine_root(
            |r| closure_residual(&p, r),
            (0.1, 1.0),
            1e-13,
        )
        .unwrap();
        assert_relative_eq!(root, expected, epsilon = 1e-11);
        assert_relative_eq!(root, 0.826031357654187, epsilon = 1e-11);
    }

    #[test]
    fn closure_two_center_linear_matches_printed_equation() {
        // |psi(c_2)| |(1 - e^{2ik(c_2-c_1)}) g_1 g_2 + g_1 + g_2 + 1| = |A|
        let k = 1.3;
        let p = problem(
            vec![(0.0, c64(1.7, 0.0), 0.0), (0.9, c64(1.7, 0.0), 0.0)],
            k,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let sols = solve_scattering_default(&p).unwrap();
        assert_eq!(sols.len(), 1);
        let r = sols[0].psi_at_centers[1].norm();
        let g = c64(0.0, 1.7 / (2.0 * k));
        let one = Complex64::new(1.0, 0.0);
        let lhs = r
            * ((one - Complex64::new(0.0, 2.0 * k * 0.9).exp()) * g * g + g + g + one).norm();
        assert_relative_eq!(lhs, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn textbook_linear_delta() {
        let p = problem(
            vec![(0.0, c64(2.0, 0.0), 0.0)],
            1.0,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let sols = solve_scattering_default(&p).unwrap();
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        // T = 1/(1+i), R = -i/(1+i)
        assert_relative_eq!(s.transmission.norm_sqr(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(s.reflection.norm_sqr(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(s.transmission.re, 0.5, max_relative = 1e-10);
        assert_relative_eq!(s.transmission.im, -0.5, max_relative = 1e-10);
        assert_relative_eq!(s.reflection.re, -0.5, max_relative = 1e-10);
        assert_relative_eq!(s.reflection.im, -0.5, max_relative = 1e-10);
    }

    #[test]
    fn single_kerr_branch_transmission() {
        let p = problem(
            vec![(0.0, c64(2.0, 0.0), 2.0)],
            1.0,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let sols = solve_scattering_default(&p).unwrap();
        assert_eq!(sols.len(), 1);
        // |T|^2 = 1/(1+y^2) = y for the root of y^3 + y - 1
        let y = 0.6823278038280193;
        assert_relative_eq!(sols[0].transmission.norm_sqr(), y, max_relative = 1e-10);
    }

    #[test]
    fn transmission_is_inverse_determinant() {
        let p = problem(
            vec![
                (-0.5, c64(3.0, 0.7), 2.0),
                (0.4, c64(1.0, -0.4), 1.0),
                (1.1, c64(2.0, 0.0), 0.0),
            ],
            0.9,
            c64(0.0, 1.4),
            Incidence::Left,
        );
        let sols = solve_scattering_default(&p).unwrap();
        for s in &sols {
            let moduli: Vec<f64> = s.psi_at_centers.iter().map(|p| p.norm()).collect();
            let det = build_phi(&p, &moduli).unwrap().determinant();
            let prod = s.transmission * det;
            assert_relative_eq!(prod.re, 1.0, max_relative = 1e-10);
            assert!(prod.im.abs() < 1e-10);
        }
    }

    #[test]
    fn consistency_rows_hold_at_solutions() {
        let p = linear_three(c64(2.0, 0.0), 1.7);
        let sols = solve_scattering_default(&p).unwrap();
        for s in &sols {
            assert!(consistency_residual(&p, s) < 1e-10);
        }
    }

    // Cramer solve of the constant-g linear system, as an independent route
    // for the alpha = 0 limit.
    fn linear_cramer(p: &ScatteringProblem) -> Vec<Complex64> {
        let n = p.num_centers();
        let k = p.wavenumber();
        let a = p.incident_amplitude();
        let phi = build_phi(p, &vec![1.0; n]).unwrap();
        let rhs: Vec<Complex64> = p
            .centers()
            .iter()
            .map(|c| a * Complex64::new(0.0, k * c.position).exp())
            .collect();
        let det = phi.determinant();
        (0..n)
            .map(|col| {
                let mut m = vec![Complex64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = if j == col { rhs[i] } else { phi.entry(i, j) };
                    }
                }
                crate::linalg::complex_det(n, &mut m) / det
            })
            .collect()
    }

    #[test]
    fn linear_limit_matches_direct_solve() {
        let p = linear_three(c64(2.0, 0.0), 1.35);
        let sols = solve_scattering_default(&p).unwrap();
        assert_eq!(sols.len(), 1);
        let direct = linear_cramer(&p);
        for (got, want) in sols[0].psi_at_centers.iter().zip(&direct) {
            assert_relative_eq!(got.re, want.re, max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(got.im, want.im, max_relative = 1e-10, epsilon = 1e-12);
        }
        assert_relative_eq!(
            sols[0].reflection.norm_sqr() + sols[0].transmission.norm_sqr(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn wavefunction_consistent_at_centers_and_asymptotics() {
        let p = problem(
            vec![(0.0, c64(2.0, 0.0), 2.0), (1.0, c64(1.5, 0.0), 1.0)],
            1.2,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let sols = solve_scattering_default(&p).unwrap();
        let s = &sols[0];
        for (center, want) in p.centers().iter().zip(&s.psi_at_centers) {
            let got = evaluate_wavefunction(&p, s, center.position);
            assert_relative_eq!(got.re, want.re, max_relative = 1e-9, epsilon = 1e-10);
            assert_relative_eq!(got.im, want.im, max_relative = 1e-9, epsilon = 1e-10);
        }
        let k = p.wavenumber();
        let a = p.incident_amplitude();
        // transmitted side
        let x = 40.0;
        let out = evaluate_wavefunction(&p, s, x) * Complex64::new(0.0, -k * x).exp();
        let want = a * s.transmission;
        assert_relative_eq!(out.re, want.re, max_relative = 1e-10, epsilon = 1e-12);
        assert_relative_eq!(out.im, want.im, max_relative = 1e-10, epsilon = 1e-12);
        // incident side
        let x = -40.0;
        let back = evaluate_wavefunction(&p, s, x)
            - a * Complex64::new(0.0, k * x).exp()
            - a * s.reflection * Complex64::new(0.0, -k * x).exp();
        assert!(back.norm() < 1e-10);
    }

    #[test]
    fn jump_conditions_from_finite_differences() {
        let p = problem(
            vec![(0.0, c64(2.0, 0.0), 2.0), (1.0, c64(1.5, 0.5), 1.0)],
            1.2,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        let sols = solve_scattering_default(&p).unwrap();
        let s = &sols[0];
        let h = 1e-5;
        for (j, center) in p.centers().iter().enumerate() {
            let c = center.position;
            let psi_c = s.psi_at_centers[j];
            let d_right = (-3.0 * evaluate_wavefunction(&p, s, c)
                + 4.0 * evaluate_wavefunction(&p, s, c + h)
                - evaluate_wavefunction(&p, s, c + 2.0 * h))
                / (2.0 * h);
            let d_left = (3.0 * evaluate_wavefunction(&p, s, c)
                - 4.0 * evaluate_wavefunction(&p, s, c - h)
                + evaluate_wavefunction(&p, s, c - 2.0 * h))
                / (2.0 * h);
            let f = center.nonlinearity().evaluate(psi_c.norm()).unwrap();
            let want = f * psi_c;
            let got = d_right - d_left;
            assert!((got - want).norm() < 1e-6, "center {j}: {got} vs {want}");
        }
    }

    #[test]
    fn parity_symmetric_problem_same_left_right() {
        let centers = vec![
            (-1.0, c64(0.0, 1.0), 2.0),
            (0.0, c64(0.0, 1.0), 2.0),
            (1.0, c64(0.0, 1.0), 2.0),
        ];
        let left = problem(centers.clone(), 1.4, c64(1.0, 0.0), Incidence::Left);
        let right = problem(centers, 1.4, c64(1.0, 0.0), Incidence::Right);
        let ls = solve_scattering_default(&left).unwrap();
        let rs = solve_scattering_default(&right).unwrap();
        assert_eq!(ls.len(), rs.len());
        for (l, r) in ls.iter().zip(rs.iter()) {
            assert!((l.reflection - r.reflection).norm() < 1e-10);
            assert!((l.transmission - r.transmission).norm() < 1e-10);
        }
    }

    #[test]
    fn right_incidence_maps_center_values_back() {
        // asymmetric two-center problem: psi values must follow center order
        let centers = vec![(0.0, c64(2.0, 0.0), 0.0), (1.0, c64(0.5, 0.0), 0.0)];
        let right = problem(centers, 1.0, c64(1.0, 0.0), Incidence::Right);
        let sols = solve_scattering_default(&right).unwrap();
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        // row residual of the mirrored system must vanish with this ordering
        assert!(consistency_residual(&right, s) < 1e-10);
        // for right incidence the transmitted side is the left: psi(c_1) has
        // the closure modulus |A||T| in the linear case
        assert_relative_eq!(
            s.psi_at_centers[0].norm(),
            s.transmission.norm(),
            max_relative = 1e-10
        );
        // asymptotics: transmitted wave leaves to the left, incident +
        // reflected sit on the right
        let k = right.wavenumber();
        let a = right.incident_amplitude();
        let x = -35.0;
        let out = evaluate_wavefunction(&right, s, x) * Complex64::new(0.0, k * x).exp();
        assert!((out - a * s.transmission).norm() < 1e-10);
        let x = 35.0;
        let back = evaluate_wavefunction(&right, s, x)
            - a * Complex64::new(0.0, -k * x).exp()
            - a * s.reflection * Complex64::new(0.0, k * x).exp();
        assert!(back.norm() < 1e-10);
    }

    #[test]
    fn closed_form_matches_generic_path() {
        for (z, alpha) in [
            (c64(2.0, 0.0), 2.0),
            (c64(2.0, 0.0), 0.0),
            (c64(1.0, 2.0), 1.0),
            (c64(0.0, 2.0), 2.0),
        ] {
            let p = problem(vec![(0.3, z, alpha)], 1.0, c64(1.0, 0.0), Incidence::Left);
            let closed = single_delta_closed_form(&p).unwrap();
            let generic = solve_scattering_default(&p).unwrap();
            assert_eq!(closed.len(), generic.len(), "z={z}, alpha={alpha}");
            for (cf, gp) in closed.iter().zip(&generic) {
                assert!((cf.transmission - gp.transmission).norm() < 1e-10);
                assert!((cf.reflection - gp.reflection).norm() < 1e-10);
                assert!((cf.psi_at_centers[0] - gp.psi_at_centers[0]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_gain_branches_satisfy_modulus_equation() {
        // z = 2i, k = 1 puts Im(z/2k) = 1; small |A| gives three branches
        let p = problem(
            vec![(0.0, c64(0.0, 2.0), 2.0)],
            1.0,
            c64(0.1f64.sqrt(), 0.0),
            Incidence::Left,
        );
        let sols = single_delta_closed_form(&p).unwrap();
        assert_eq!(sols.len(), 3);
        for s in &sols {
            assert!(s.closure_residual < 1e-10);
        }
    }

    #[test]
    fn alpha_zero_closed_form_is_linear_for_any_coupling() {
        for z in [c64(5.0, 0.0), c64(0.0, 3.0), c64(-2.0, 1.0)] {
            let p = problem(vec![(0.0, z, 0.0)], 1.0, c64(1.0, 0.0), Incidence::Left);
            let sols = single_delta_closed_form(&p).unwrap();
            assert_eq!(sols.len(), 1);
            let g = Complex64::new(0.0, 1.0 / 2.0) * z;
            let want = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) + g);
            assert!((sols[0].transmission - want).norm() < 1e-12);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            // every real-coupling linear problem has exactly one branch that
            // conserves current and satisfies T = 1/det Phi
            #[test]
            fn linear_real_problems_conserve_current(
                n in 1usize..=3,
                base in -2.0f64..0.0,
                gap1 in 0.2f64..1.5,
                gap2 in 0.2f64..1.5,
                z1 in 0.5f64..10.0,
                z2 in 0.5f64..10.0,
                z3 in 0.5f64..10.0,
                k in 0.4f64..4.0,
            ) {
                let zs = [z1, z2, z3];
                let mut pos = base;
                let mut centers = Vec::new();
                for (i, gap) in [0.0, gap1, gap2].iter().enumerate().take(n) {
                    pos += gap;
                    centers.push((pos, c64(zs[i], 0.0), 0.0));
                }
                let p = problem(centers, k, c64(1.0, 0.0), Incidence::Left);
                let sols = solve_scattering_default(&p).unwrap();
                prop_assert_eq!(sols.len(), 1);
                let s = &sols[0];
                prop_assert!(
                    (s.reflection.norm_sqr() + s.transmission.norm_sqr() - 1.0).abs() < 1e-10
                );
                let moduli: Vec<f64> = s.psi_at_centers.iter().map(|p| p.norm()).collect();
                let det = build_phi(&p, &moduli).unwrap().determinant();
                prop_assert!((s.transmission * det - 1.0).norm() < 1e-10);
                prop_assert!(consistency_residual(&p, s) < 1e-10);
            }
        }
    }

    #[test]
    fn no_branch_error_instructs_widening() {
        let p = problem(
            vec![(0.0, c64(0.0, 0.0), 0.0)],
            1.0,
            c64(1.0, 0.0),
            Incidence::Left,
        );
        // window that cannot contain the root at r = |A| = 1
        let cfg = RootScanConfig {
            r_min: 1e-6,
            r_max: 0.5,
            n_scan: 128,
            refine_tol: 1e-12,
            max_refine_iters: 100,
        };
        let err = solve_scattering(&p, &cfg).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("r_max"), "{msg}");
    }
}
