//! Closed-form parameter algebra of the cavity-mediated qubit/ensemble coupling.
//!
//! All frequencies and couplings are angular frequencies in MHz (so that
//! `MHz * us` is a phase in radians) and `hbar = 1`.
//!
//! The chain is: Frohlich coefficients `eta1..eta3` from the bare detunings,
//! then the mixing amplitudes `alpha`, `beta` that define the bright mode
//! `B = alpha A + beta C` and the orthogonal mode `D = beta A - alpha C`, then
//! the dressed frequencies and couplings of the effective three-level problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators smaller than this are reported as [`Error::SingularDetuning`].
pub const DEFAULT_SINGULAR_EPSILON: f64 = 1e-9;

/// Default bound on `|eta_i|` for the perturbative elimination to be trusted.
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.2;

/// Physical constants of the hybrid circuit-QED / molecular-ensemble system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Qubit transition frequency.
    pub omega_g: f64,
    /// Cavity (transmission-line) mode frequency.
    pub omega: f64,
    /// Frequency of the excited molecular level |a>.
    pub omega_a: f64,
    /// Frequency of the metastable level |c>.
    pub omega_c: f64,
    /// Frequency of the classical control field.
    pub omega_f: f64,
    /// Qubit-cavity coupling.
    pub g: f64,
    /// Collective ensemble-cavity coupling, `xi * sqrt(N)`.
    pub zeta: f64,
    /// Single-molecule coupling; only the microscopic model reads it.
    #[serde(default)]
    pub xi: Option<f64>,
    /// Number of molecules; only the microscopic model reads it.
    #[serde(default)]
    pub n_molecules: Option<usize>,
}

impl SystemParams {
    /// Experimental point used throughout: g = zeta = 20 MHz, cavity at
    /// 6044 MHz, |a> at 5844 MHz. The qubit starts 198 MHz below the cavity;
    /// callers normally replace it with the resonance-tracked value.
    pub fn experimental() -> Self {
        SystemParams {
            omega_g: 6044.0 - 198.0,
            omega: 6044.0,
            omega_a: 5844.0,
            omega_c: 5744.0,
            omega_f: 100.0,
            g: 20.0,
            zeta: 20.0,
            xi: None,
            n_molecules: None,
        }
    }

    pub fn with_omega_g(mut self, omega_g: f64) -> Self {
        self.omega_g = omega_g;
        self
    }

    pub fn with_couplings(mut self, g: f64, zeta: f64) -> Self {
        self.g = g;
        self.zeta = zeta;
        self
    }

    /// `omega - omega_g`
    pub fn cavity_qubit_detuning(&self) -> f64 {
        self.omega - self.omega_g
    }

    /// `omega - omega_a`
    pub fn cavity_ensemble_detuning(&self) -> f64 {
        self.omega - self.omega_a
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_g", self.omega_g),
            ("omega", self.omega),
            ("omega_a", self.omega_a),
            ("omega_c", self.omega_c),
            ("omega_f", self.omega_f),
            ("g", self.g),
            ("zeta", self.zeta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter(format!("g must be >= 0, got {}", self.g)));
        }
        if self.zeta < 0.0 {
            return Err(Error::InvalidParameter(format!("zeta must be >= 0, got {}", self.zeta)));
        }
        if let Some(xi) = self.xi {
            if !xi.is_finite() {
                return Err(Error::InvalidParameter(format!("xi must be finite, got {xi}")));
            }
        }
        if self.n_molecules == Some(0) {
            return Err(Error::InvalidParameter("n_molecules must be positive".into()));
        }
        Ok(())
    }

    /// `omega_a = omega_c + omega_f`, required before moving to the frame
    /// co-rotating with the control field.
    pub fn check_frequency_matching(&self) -> Result<()> {
        let sum = self.omega_c + self.omega_f;
        let tol = 1e-9 * self.omega_a.abs().max(1.0);
        if (self.omega_a - sum).abs() > tol {
            return Err(Error::FrequencyMismatch {
                omega_a: self.omega_a,
                sum,
            });
        }
        Ok(())
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::experimental()
    }
}

/// Coefficients of the anti-Hermitian generator
/// `S = eta1 a sigma+ + eta2 a A^dag + eta3 a C^dag - h.c.`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrohlichCoefficients {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl FrohlichCoefficients {
    pub fn max_abs(&self) -> f64 {
        self.eta1.abs().max(self.eta2.abs()).max(self.eta3.abs())
    }
}

/// Frohlich coefficients at control Rabi frequency `rabi`.
pub fn frohlich_coefficients(p: &SystemParams, rabi: f64) -> Result<FrohlichCoefficients> {
    frohlich_coefficients_eps(p, rabi, DEFAULT_SINGULAR_EPSILON)
}

pub fn frohlich_coefficients_eps(
    p: &SystemParams,
    rabi: f64,
    epsilon: f64,
) -> Result<FrohlichCoefficients> {
    let dq = p.cavity_qubit_detuning();
    if dq.abs() < epsilon {
        return Err(Error::SingularDetuning {
            quantity: "omega - omega_g",
            value: dq,
            epsilon,
        });
    }
    let de = p.cavity_ensemble_detuning();
    let denom = de * de - rabi * rabi;
    if denom.abs() < epsilon {
        return Err(Error::SingularDetuning {
            quantity: "(omega - omega_a)^2 - Omega^2",
            value: denom,
            epsilon,
        });
    }
    Ok(raw_coefficients(p, rabi))
}

fn raw_coefficients(p: &SystemParams, rabi: f64) -> FrohlichCoefficients {
    let de = p.cavity_ensemble_detuning();
    let denom = de * de - rabi * rabi;
    FrohlichCoefficients {
        eta1: p.g / p.cavity_qubit_detuning(),
        eta2: p.zeta * de / denom,
        eta3: p.zeta * rabi / denom,
    }
}

/// Amplitudes `(alpha, beta)` of the bright mode `B = alpha A + beta C`.
pub fn mode_mixing(eta: &FrohlichCoefficients, p: &SystemParams) -> Result<(f64, f64)> {
    let x = eta.eta2 * p.g + eta.eta1 * p.zeta;
    let y = eta.eta3 * p.g;
    let norm = x.hypot(y);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateMixing);
    }
    Ok((x / norm, y / norm))
}

/// Derived constants of the effective qubit/ensemble Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub eta: FrohlichCoefficients,
    pub alpha: f64,
    pub beta: f64,
    /// Effective qubit-ensemble coupling `g_m` (negative for g, zeta > 0).
    pub g_m: f64,
    /// Qubit frequency after the dispersive shift.
    pub omega_g_prime: f64,
    pub omega_b: f64,
    pub omega_d: f64,
    /// Effective B-D drive `Omega_d`.
    pub drive: f64,
    /// Two-photon detuning `Delta = omega_b - omega_d`.
    pub detuning: f64,
    /// `Theta = sqrt(Delta^2 + 4 (g_m^2 + Omega_d^2))`.
    pub splitting: f64,
    /// Mixing angle in `[0, pi/2]`, `atan2(|g_m|, |Omega_d|)`.
    pub theta: f64,
}

impl EffectiveParams {
    /// Amplitude of the decaying |a> admixture in the quasi-dark state.
    pub fn leakage(&self) -> f64 {
        self.beta * self.theta.sin()
    }

    /// `omega_g' - omega_d`; zero on two-photon resonance.
    pub fn resonance_mismatch(&self) -> f64 {
        self.omega_g_prime - self.omega_d
    }

    /// Sign of `g_m * Omega_d` (`+1` when either vanishes). The quasi-dark
    /// state carries it on its D component.
    pub fn relative_sign(&self) -> f64 {
        if self.g_m * self.drive < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Sign of `g_m` (`+1` when zero).
    pub fn coupling_sign(&self) -> f64 {
        if self.g_m < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Effective constants at control Rabi frequency `rabi`.
///
/// For `g = 0` with `zeta > 0` the mixing amplitudes are taken from the
/// `g -> 0` limit of the coupling direction, `(eta2 + zeta / (omega - omega_g), eta3)`,
/// so that `omega_d` stays defined for a decoupled qubit.
pub fn effective_constants(p: &SystemParams, rabi: f64) -> Result<EffectiveParams> {
    let eta = frohlich_coefficients(p, rabi)?;
    let (alpha, beta) = match mode_mixing(&eta, p) {
        Ok(ab) => ab,
        Err(Error::DegenerateMixing) if p.g == 0.0 && p.zeta > 0.0 => {
            let x = eta.eta2 + p.zeta / p.cavity_qubit_detuning();
            let y = eta.eta3;
            let n = x.hypot(y);
            if n == 0.0 {
                return Err(Error::DegenerateMixing);
            }
            (x / n, y / n)
        }
        Err(e) => return Err(e),
    };

    let g_m = -0.5 * (eta.eta3 * p.g).hypot(eta.eta2 * p.g + eta.eta1 * p.zeta);
    let omega_g_prime = p.omega_g - eta.eta1 * p.g;
    let dressed_rabi = rabi - 0.5 * eta.eta3 * p.zeta;
    let omega_b = p.omega_a - eta.eta2 * p.zeta * alpha * alpha + 2.0 * dressed_rabi * alpha * beta;
    let omega_d = p.omega_a - eta.eta2 * p.zeta * beta * beta - 2.0 * dressed_rabi * alpha * beta;
    let drive = -eta.eta2 * p.zeta * alpha * beta + dressed_rabi * (beta * beta - alpha * alpha);
    let detuning = omega_b - omega_d;
    let splitting = (detuning * detuning + 4.0 * (g_m * g_m + drive * drive)).sqrt();
    let theta = g_m.abs().atan2(drive.abs());

    Ok(EffectiveParams {
        eta,
        alpha,
        beta,
        g_m,
        omega_g_prime,
        omega_b,
        omega_d,
        drive,
        detuning,
        splitting,
        theta,
    })
}

/// Two-photon resonance solver: finds `omega_g` with `omega_g' = omega_d`.
///
/// Works on the detuning `x = omega - omega_g` with the damped fixed-point map
/// `x <- omega - omega_d(x) - g^2 / x`, which contracts strongly on the
/// large-detuning branch. Falls back to bisection on
/// `[max(g, tiny), bracket_hi]` where `bracket_hi` is
/// `omega - omega_a + |Omega| + bracket_margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSolver {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub bracket_margin: f64,
}

impl Default for ResonanceSolver {
    fn default() -> Self {
        ResonanceSolver {
            tolerance: 1e-9,
            max_iterations: 200,
            damping: 1.0,
            bracket_margin: 50.0,
        }
    }
}

impl ResonanceSolver {
    fn bracket(&self, p: &SystemParams, rabi: f64) -> (f64, f64) {
        let hi = p.cavity_ensemble_detuning() + rabi.abs() + self.bracket_margin;
        (p.g.max(1e-6), hi)
    }

    /// `omega_g' - omega_d` as a function of the detuning `x`.
    fn mismatch(&self, p: &SystemParams, rabi: f64, x: f64) -> Result<f64> {
        let eff = effective_constants(&p.with_omega_g(p.omega - x), rabi)?;
        Ok(eff.resonance_mismatch())
    }

    /// Larger root of `x^2 - c x + g^2 = 0` with `c = omega - omega_d`
    /// evaluated at the cavity-ensemble detuning.
    fn large_root_seed(&self, p: &SystemParams, rabi: f64) -> Result<f64> {
        let x0 = p.cavity_ensemble_detuning() + rabi.abs();
        let eff = effective_constants(&p.with_omega_g(p.omega - x0), rabi)?;
        let c = p.omega - eff.omega_d;
        let disc = c * c - 4.0 * p.g * p.g;
        Ok(if disc > 0.0 { 0.5 * (c + disc.sqrt()) } else { c })
    }

    /// Resonant qubit frequency, seeded on the large-detuning root.
    pub fn solve(&self, p: &SystemParams, rabi: f64) -> Result<f64> {
        let seed = self.large_root_seed(p, rabi)?;
        self.solve_from(p, rabi, seed)
    }

    /// Resonant qubit frequency by continuation from a nearby detuning.
    pub fn solve_from(&self, p: &SystemParams, rabi: f64, seed_detuning: f64) -> Result<f64> {
        let (lo, hi) = self.bracket(p, rabi);
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(Error::RootOutOfBracket { lo, hi });
        }
        match self.fixed_point(p, rabi, seed_detuning) {
            Ok(x) if x > 0.0 && x < hi => Ok(p.omega - x),
            Ok(_) | Err(Error::NoConvergence { .. }) => self.bisect(p, rabi, lo, hi).map(|x| p.omega - x),
            Err(e) => Err(e),
        }
    }

    fn fixed_point(&self, p: &SystemParams, rabi: f64, seed: f64) -> Result<f64> {
        let g2 = p.g * p.g;
        let mut x = seed;
        let mut residual = f64::INFINITY;
        for _ in 0..self.max_iterations {
            if !(x.is_finite() && x > 0.0) {
                break;
            }
            let eff = effective_constants(&p.with_omega_g(p.omega - x), rabi)?;
            let mapped = p.omega - eff.omega_d - g2 / x;
            residual = mapped - x;
            if residual.abs() <= self.tolerance {
                return Ok(mapped);
            }
            x += self.damping * residual;
        }
        Err(Error::NoConvergence {
            iterations: self.max_iterations,
            residual: residual.abs(),
        })
    }

    fn bisect(&self, p: &SystemParams, rabi: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
        let bracket = (lo, hi);
        let mut f_lo = self.mismatch(p, rabi, lo)?;
        let f_hi = self.mismatch(p, rabi, hi)?;
        if f_lo.signum() == f_hi.signum() {
            return Err(Error::RootOutOfBracket {
                lo: bracket.0,
                hi: bracket.1,
            });
        }
        // enough halvings to reach the tolerance from any desk-scale bracket
        for _ in 0..self.max_iterations.max(200) {
            let mid = 0.5 * (lo + hi);
            let f_mid = self.mismatch(p, rabi, mid)?;
            if f_mid.abs() <= self.tolerance || 0.5 * (hi - lo) <= self.tolerance * 1e-3 {
                return Ok(mid);
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoConvergence {
            iterations: self.max_iterations,
            residual: f_lo.abs(),
        })
    }

    /// Resonance-tracked qubit frequencies along `grid`, each point seeded by
    /// the previous one.
    pub fn track(&self, p: &SystemParams, grid: &[f64]) -> Result<Vec<f64>> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut out = Vec::with_capacity(grid.len());
        let mut seed: Option<f64> = None;
        for &rabi in grid {
            let wg = match seed {
                Some(x) => self.solve_from(p, rabi, x)?,
                None => self.solve(p, rabi)?,
            };
            seed = Some(p.omega - wg);
            out.push(wg);
        }
        Ok(out)
    }
}

/// Resonant qubit frequency with the default solver settings.
pub fn solve_resonant_qubit_frequency(p: &SystemParams, rabi: f64) -> Result<f64> {
    ResonanceSolver::default().solve(p, rabi)
}

/// Effective constants with `omega_g` placed on two-photon resonance.
pub fn resonant_constants(p: &SystemParams, rabi: f64) -> Result<(SystemParams, EffectiveParams)> {
    let wg = solve_resonant_qubit_frequency(p, rabi)?;
    let tuned = p.with_omega_g(wg);
    Ok((tuned, effective_constants(&tuned, rabi)?))
}

/// Value of the printed adiabaticity expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityMetric {
    pub value: f64,
    /// `(|g_m| + |Omega_d|)^3` replaced `(g_m + Omega_d)^3` because the
    /// latter was not positive.
    pub magnitude_substituted: bool,
}

/// `|g_m| (Theta + |Delta|) |dOmega/dt| / sqrt(Theta (Theta - |Delta|) (g_m + Omega_d)^3)`.
///
/// `p.omega_g` is used as given; callers put it on resonance first.
pub fn adiabaticity_metric(p: &SystemParams, rabi: f64, rabi_rate: f64) -> Result<AdiabaticityMetric> {
    let eff = effective_constants(p, rabi)?;
    adiabaticity_from(&eff, rabi_rate)
}

pub fn adiabaticity_from(eff: &EffectiveParams, rabi_rate: f64) -> Result<AdiabaticityMetric> {
    let abs_delta = eff.detuning.abs();
    let gap = eff.splitting - abs_delta;
    if gap <= 0.0 {
        return Err(Error::UndefinedMetric("Theta equals |Delta|"));
    }
    let signed = eff.g_m + eff.drive;
    let (base, substituted) = if signed > 0.0 {
        (signed, false)
    } else {
        (eff.g_m.abs() + eff.drive.abs(), true)
    };
    if base <= 0.0 {
        return Err(Error::UndefinedMetric("g_m and Omega_d both vanish"));
    }
    let value = eff.g_m.abs() * (eff.splitting + abs_delta) * rabi_rate.abs()
        / (eff.splitting * gap * base.powi(3)).sqrt();
    Ok(AdiabaticityMetric {
        value,
        magnitude_substituted: substituted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub name: String,
    pub value: f64,
    pub magnitude: f64,
    pub pass: bool,
}

/// Perturbative-validity report for one control setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub rabi: f64,
    pub threshold: f64,
    pub coefficients: Vec<CoefficientCheck>,
    pub pass: bool,
    pub notes: Vec<String>,
}

pub fn validity_report(p: &SystemParams, rabi: f64) -> ValidityReport {
    validity_report_with(p, rabi, DEFAULT_VALIDITY_THRESHOLD)
}

pub fn validity_report_with(p: &SystemParams, rabi: f64, threshold: f64) -> ValidityReport {
    let eta = raw_coefficients(p, rabi);
    let coefficients: Vec<CoefficientCheck> = [("eta1", eta.eta1), ("eta2", eta.eta2), ("eta3", eta.eta3)]
        .into_iter()
        .map(|(name, value)| {
            // 0/0 from a fully decoupled system is a vanishing coefficient
            let value = if value.is_nan() { 0.0 } else { value };
            CoefficientCheck {
                name: name.to_string(),
                value,
                magnitude: value.abs(),
                pass: value.abs() <= threshold,
            }
        })
        .collect();
    let pass = coefficients.iter().all(|c| c.pass);
    let mut notes = Vec::new();
    if let Some(n) = p.n_molecules {
        notes.push(format!(
            "collective modes are bosonic only for N >> 1 with few excitations; N = {n}, single-excitation storage keeps at most one molecule out of |b>"
        ));
    }
    ValidityReport {
        rabi,
        threshold,
        coefficients,
        pass,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn at_detuning(x: f64) -> SystemParams {
        SystemParams::experimental().with_omega_g(6044.0 - x)
    }

    #[test]
    fn coefficients_at_zero_drive() {
        let e = frohlich_coefficients(&at_detuning(198.0), 0.0).unwrap();
        assert_abs_diff_eq!(e.eta1, 0.10101, epsilon = 1e-5);
        assert_abs_diff_eq!(e.eta2, 0.10000, epsilon = 1e-12);
        assert_eq!(e.eta3, 0.0);
    }

    #[test]
    fn coefficients_at_full_drive() {
        let e = frohlich_coefficients(&at_detuning(202.57), 30.0).unwrap();
        assert_abs_diff_eq!(e.eta1, 0.09873, epsilon = 1e-5);
        assert_abs_diff_eq!(e.eta2, 0.102302, epsilon = 1e-6);
        assert_abs_diff_eq!(e.eta3, 0.015345, epsilon = 1e-6);
    }

    #[test]
    fn decoupled_ensemble_only_keeps_eta1() {
        let p = at_detuning(150.0).with_couplings(20.0, 0.0);
        for rabi in [0.0, 7.0, 30.0] {
            let e = frohlich_coefficients(&p, rabi).unwrap();
            assert_eq!(e.eta1, 20.0 / 150.0);
            assert_eq!(e.eta2, 0.0);
            assert_eq!(e.eta3, 0.0);
        }
    }

    #[test]
    fn singular_detunings_rejected() {
        let p = at_detuning(0.0);
        assert!(matches!(frohlich_coefficients(&p, 0.0), Err(Error::SingularDetuning { .. })));
        let p = at_detuning(198.0);
        assert!(matches!(frohlich_coefficients(&p, 200.0), Err(Error::SingularDetuning { .. })));
    }

    #[test]
    fn mixing_examples() {
        let p = at_detuning(198.0);
        let e = frohlich_coefficients(&p, 0.0).unwrap();
        assert_eq!(mode_mixing(&e, &p).unwrap(), (1.0, 0.0));

        let p = at_detuning(202.57);
        let e = frohlich_coefficients(&p, 30.0).unwrap();
        let (a, b) = mode_mixing(&e, &p).unwrap();
        assert_abs_diff_eq!(a, 0.99710, epsilon = 1e-5);
        assert_abs_diff_eq!(b, 0.07612, epsilon = 1e-5);

        // eta2 g + eta1 zeta == eta3 g
        let p = SystemParams::experimental().with_couplings(1.0, 1.0);
        let e = FrohlichCoefficients { eta1: 0.1, eta2: 0.2, eta3: 0.3 };
        let (a, b) = mode_mixing(&e, &p).unwrap();
        assert_abs_diff_eq!(a, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(b, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn fully_decoupled_mixing_is_degenerate() {
        let p = at_detuning(198.0).with_couplings(0.0, 0.0);
        assert_eq!(effective_constants(&p, 10.0), Err(Error::DegenerateMixing));
    }

    #[test]
    fn effective_constants_at_endpoints() {
        let eff = effective_constants(&at_detuning(198.0), 0.0).unwrap();
        assert_abs_diff_eq!(eff.g_m, -2.0101, epsilon = 1e-4);
        assert_eq!(eff.drive.abs(), 0.0);
        assert_eq!(eff.theta, std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(eff.detuning, -2.000, epsilon = 1e-12);

        let eff = effective_constants(&at_detuning(202.57), 30.0).unwrap();
        assert_abs_diff_eq!(eff.g_m, -2.0162, epsilon = 1e-4);
        assert_abs_diff_eq!(eff.drive, -29.656, epsilon = 1e-3);
        assert_abs_diff_eq!(eff.theta, 0.0679, epsilon = 1e-4);
        assert_abs_diff_eq!(eff.detuning, 7.039, epsilon = 2e-3);
    }

    #[test]
    fn resonance_endpoints() {
        let p = SystemParams::experimental();
        // x^2 - 200 x + 400 = 0, large root
        let exact = 100.0 + (100.0f64 * 100.0 - 400.0).sqrt();
        let wg = solve_resonant_qubit_frequency(&p, 0.0).unwrap();
        assert_abs_diff_eq!(p.omega - wg, exact, epsilon = 1e-9);
        let wg = solve_resonant_qubit_frequency(&p, 30.0).unwrap();
        assert_abs_diff_eq!(p.omega - wg, 202.57, epsilon = 5e-3);
    }

    #[test]
    fn resonance_without_qubit_coupling_is_omega_d() {
        let p = SystemParams::experimental().with_couplings(0.0, 20.0);
        for rabi in [0.0, 12.0, 30.0] {
            let wg = solve_resonant_qubit_frequency(&p, rabi).unwrap();
            let eff = effective_constants(&p.with_omega_g(wg), rabi).unwrap();
            assert_abs_diff_eq!(wg, eff.omega_d, epsilon = 1e-9);
        }
    }

    #[test]
    fn resonance_bisection_fallback_matches_fixed_point() {
        let p = SystemParams::experimental();
        let solver = ResonanceSolver {
            max_iterations: 1,
            ..Default::default()
        };
        let wg = solver.solve(&p, 17.0).unwrap();
        let reference = solve_resonant_qubit_frequency(&p, 17.0).unwrap();
        assert_abs_diff_eq!(wg, reference, epsilon = 1e-8);
    }

    #[test]
    fn resonance_out_of_bracket() {
        // cavity below the excited level: no positive detuning bracket
        let mut p = SystemParams::experimental();
        p.omega = 5600.0;
        let solver = ResonanceSolver {
            bracket_margin: 0.0,
            ..Default::default()
        };
        assert!(matches!(solver.solve(&p, 0.0), Err(Error::RootOutOfBracket { .. })));
    }

    #[test]
    fn theta_decreases_along_tracked_sweep() {
        let p = SystemParams::experimental();
        let grid: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1).collect();
        let wgs = ResonanceSolver::default().track(&p, &grid).unwrap();
        let thetas: Vec<f64> = grid
            .iter()
            .zip(&wgs)
            .map(|(&r, &wg)| effective_constants(&p.with_omega_g(wg), r).unwrap().theta)
            .collect();
        assert_eq!(thetas[0], std::f64::consts::FRAC_PI_2);
        assert!(thetas.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn metric_zero_for_static_field_and_linear_in_rate() {
        let p = SystemParams::experimental();
        let (tuned, _) = resonant_constants(&p, 15.0).unwrap();
        assert_eq!(adiabaticity_metric(&tuned, 15.0, 0.0).unwrap().value, 0.0);
        let m1 = adiabaticity_metric(&tuned, 15.0, 1.0).unwrap();
        let m2 = adiabaticity_metric(&tuned, 15.0, 2.0).unwrap();
        assert!(m1.value.is_finite() && m1.value > 0.0);
        assert!(m1.magnitude_substituted);
        assert_eq!(m2.value, 2.0 * m1.value);
    }

    #[test]
    fn validity_sweep_and_pole() {
        let p = SystemParams::experimental();
        for i in 0..=30 {
            let rabi = i as f64;
            let wg = solve_resonant_qubit_frequency(&p, rabi).unwrap();
            let r = validity_report(&p.with_omega_g(wg), rabi);
            assert!(r.pass);
            assert!(r.coefficients.iter().all(|c| c.magnitude <= 0.11));
        }
        let near_pole = p.cavity_ensemble_detuning() - 0.1;
        let r = validity_report(&p, near_pole);
        assert!(!r.pass);
        assert!(!r.coefficients[1].pass);

        let r = validity_report(&p.with_couplings(0.0, 0.0), 10.0);
        assert!(r.pass);
        assert!(r.coefficients.iter().all(|c| c.value == 0.0));
    }

    proptest! {
        #[test]
        fn mixing_is_normalized(
            g in 0.5f64..50.0, zeta in 0.5f64..50.0,
            dq in 50.0f64..400.0, de in 50.0f64..400.0, frac in -0.9f64..0.9,
        ) {
            let mut p = SystemParams::experimental().with_couplings(g, zeta);
            p.omega_g = p.omega - dq;
            p.omega_a = p.omega - de;
            let e = frohlich_coefficients(&p, frac * de).unwrap();
            let (a, b) = mode_mixing(&e, &p).unwrap();
            prop_assert!((a * a + b * b - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn eta_parity_under_drive_reversal(
            g in 0.0f64..50.0, zeta in 0.0f64..50.0,
            de in 50.0f64..400.0, frac in 0.0f64..0.9,
        ) {
            let mut p = SystemParams::experimental().with_couplings(g, zeta);
            p.omega_a = p.omega - de;
            let plus = frohlich_coefficients(&p, frac * de).unwrap();
            let minus = frohlich_coefficients(&p, -frac * de).unwrap();
            prop_assert_eq!(plus.eta1, minus.eta1);
            prop_assert_eq!(plus.eta2, minus.eta2);
            prop_assert_eq!(plus.eta3, -minus.eta3);
        }

        #[test]
        fn solved_frequency_is_resonant(rabi in 0.0f64..60.0, g in 5.0f64..30.0, zeta in 5.0f64..30.0) {
            let p = SystemParams::experimental().with_couplings(g, zeta);
            let wg = solve_resonant_qubit_frequency(&p, rabi).unwrap();
            let eff = effective_constants(&p.with_omega_g(wg), rabi).unwrap();
            prop_assert!(eff.resonance_mismatch().abs() <= 1e-6);
        }

        #[test]
        fn effective_invariants(rabi in -60.0f64..60.0) {
            let (_, eff) = resonant_constants(&SystemParams::experimental(), rabi).unwrap();
            prop_assert!(eff.splitting >= eff.detuning.abs());
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&eff.theta));
            if eff.drive != 0.0 {
                prop_assert!((eff.theta.tan() * eff.drive.abs() - eff.g_m.abs()).abs() <= 1e-9);
            }
        }
    }
}
