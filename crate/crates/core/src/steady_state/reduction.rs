//! Closed-form elimination of fields and polarizations at a fixed point.
//!
//! Setting the field and polarization derivatives to zero gives, per mode,
//!
//! ```text
//! m = g·x·α / D,   D = γ + Γ − iΔ_A
//! α = η / (κ − iΔ_C − g²x/D)
//! n_e = −g²·x·|α|² / |D|² = −c·η²·x / Q(x),   c = g²/|D|²
//! Q(x) = (κ − a·x)² + (Δ_C + b·x)²,           a = c·(γ + Γ),  b = c·Δ_A
//! ```
//!
//! so the fixed points reduce to two equations in the inversions `x1`, `x2`:
//! balance of cross decay `Γ₁n_e1 = Γ₂n_e2` and normalization
//! `(2n_e1 − x1) + (2n_e2 − x2) = 1`. Combining them,
//! `Γ₂·Q₁·x2 = R(x1)` with `R = −2(Γ₁+Γ₂)c₁η₁²x1 − Γ₂(x1+1)Q₁` is linear in
//! `x2`; substituting into the cross-decay balance and clearing the positive
//! factor `(Γ₂Q₁)²` leaves a degree-7 polynomial in `x1`.

use super::SolverWarning;
use crate::error::{BistabError, Result};
use crate::model::{Mode, SystemParams};
use crate::poly::{self, Poly};
use num_complex::Complex64;

/// Denominator magnitude below which the closed forms are treated as singular.
pub const POLE_TOL: f64 = 1e-14;

/// Per-mode constants of the reduction.
#[derive(Debug, Clone)]
pub struct ModeReduction {
    pub mode: Mode,
    /// `g²/|D|²`
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    pub delta_c: f64,
    pub eta: f64,
    pub g: f64,
    pub decay: Complex64,
    /// `|κ − iΔ_C − g²x/D|²` as a polynomial in `x`.
    pub q: Poly,
}

impl ModeReduction {
    pub fn new(params: &SystemParams, mode: Mode) -> Self {
        let p = params.mode(mode);
        let decay = p.polarization_decay();
        let c = p.g * p.g / decay.norm_sqr();
        let a = c * (p.gamma + p.cross_decay);
        let b = c * p.delta_a;
        let q = &Poly::linear(p.kappa, -a).square() + &Poly::linear(p.delta_c, b).square();
        ModeReduction {
            mode,
            c,
            a,
            b,
            kappa: p.kappa,
            delta_c: p.delta_c,
            eta: p.eta,
            g: p.g,
            decay,
            q,
        }
    }

    fn denominator(&self, x: f64) -> Complex64 {
        Complex64::new(self.kappa - self.a * x, -(self.delta_c + self.b * x))
    }

    pub fn alpha(&self, x: f64) -> Result<Complex64> {
        let den = self.denominator(x);
        if den.norm() < POLE_TOL {
            return Err(BistabError::Singular { mode: self.mode.number(), x });
        }
        Ok(self.eta / den)
    }

    pub fn polarization(&self, x: f64, alpha: Complex64) -> Complex64 {
        self.g * x * alpha / self.decay
    }

    pub fn excited(&self, x: f64) -> Result<f64> {
        let den = self.denominator(x);
        if den.norm() < POLE_TOL {
            return Err(BistabError::Singular { mode: self.mode.number(), x });
        }
        Ok(-self.c * self.eta * self.eta * x / den.norm_sqr())
    }
}

/// Field amplitude at a fixed point with inversion `x` on transition `mode`.
pub fn alpha_of_x(x: f64, params: &SystemParams, mode: Mode) -> Result<Complex64> {
    ModeReduction::new(params, mode).alpha(x)
}

/// Polarization `m = g·x·α/D` matching [`alpha_of_x`].
pub fn polarization_of_x(x: f64, params: &SystemParams, mode: Mode) -> Result<Complex64> {
    let r = ModeReduction::new(params, mode);
    let alpha = r.alpha(x)?;
    Ok(r.polarization(x, alpha))
}

/// Excited-state population `n_e = −g²·x·|α(x)|²/|D|²` at a fixed point.
pub fn excited_population_of_x(x: f64, params: &SystemParams, mode: Mode) -> Result<f64> {
    ModeReduction::new(params, mode).excited(x)
}

/// `(Γ₁n_e1 − Γ₂n_e2, (2n_e1 − x1) + (2n_e2 − x2) − 1)`; both vanish at every
/// physical fixed point.
pub fn fixed_point_residuals(x1: f64, x2: f64, params: &SystemParams) -> Result<(f64, f64)> {
    let ne1 = excited_population_of_x(x1, params, Mode::One)?;
    let ne2 = excited_population_of_x(x2, params, Mode::Two)?;
    Ok((
        params.cross_decay1 * ne1 - params.cross_decay2 * ne2,
        (2.0 * ne1 - x1) + (2.0 * ne2 - x2) - 1.0,
    ))
}

/// The eliminated polynomial together with the pieces needed to lift roots.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub mode1: ModeReduction,
    pub mode2: ModeReduction,
    /// `P(x1)`, constant term first.
    pub polynomial: Poly,
    /// `R(x1)` and `S(x1) = Γ₂Q₁(x1)` with `x2 = R/S`.
    pub numerator: Poly,
    pub denominator: Poly,
}

impl Reduction {
    pub fn new(params: &SystemParams) -> Self {
        let m1 = ModeReduction::new(params, Mode::One);
        let m2 = ModeReduction::new(params, Mode::Two);
        let (g1, g2) = (params.cross_decay1, params.cross_decay2);
        let pump1 = m1.c * m1.eta * m1.eta;
        let pump2 = m2.c * m2.eta * m2.eta;

        let s = m1.q.scale(g2);
        let r = &Poly::linear(0.0, -2.0 * (g1 + g2) * pump1)
            - &(&Poly::linear(1.0, 1.0) * &m1.q).scale(g2);
        let h = &(&s.scale(m2.kappa) - &r.scale(m2.a)).square()
            + &(&s.scale(m2.delta_c) + &r.scale(m2.b)).square();
        let lhs = &Poly::linear(0.0, g1 * pump1) * &h;
        let rhs = (&r * &m1.q.square()).scale(g2 * g2 * pump2);
        Reduction {
            polynomial: &lhs - &rhs,
            numerator: r,
            denominator: s,
            mode1: m1,
            mode2: m2,
        }
    }

    /// Candidate `x2` values belonging to a root `x1`.
    ///
    /// With Γ₂ > 0 the lift is unique. With Γ₂ = 0 the balance forces
    /// `n_e1 = 0` and `x2` solves the closed two-level cubic of transition 2.
    pub fn lift(&self, x1: f64) -> Result<Vec<f64>> {
        let s = self.denominator.eval(x1);
        if s != 0.0 && s.abs() > 1e-300 {
            return Ok(vec![self.numerator.eval(x1) / s]);
        }
        let rest = 1.0 - (2.0 * self.mode1.excited(x1)? - x1);
        // 2n_e2(x2) − x2 = rest, times Q2
        let cubic = &Poly::linear(0.0, -2.0 * self.mode2.c * self.mode2.eta * self.mode2.eta)
            - &(&Poly::linear(rest, 1.0) * &self.mode2.q);
        Ok(real_roots_in(&cubic, -1.0, 1.0).0)
    }
}

/// Coefficients (constant term first) of the degree-7 polynomial whose roots
/// contain the inversion `x1` of every physical fixed point.
pub fn polynomial_in_x1(params: &SystemParams) -> Result<Vec<f64>> {
    crate::model::validate(params).into_result()?;
    let p = Reduction::new(params).polynomial;
    if p.max_abs_coeff() < 1e-300 {
        return Err(BistabError::Degenerate(
            "eliminated polynomial vanishes identically".to_string(),
        ));
    }
    Ok(p.0)
}

/// Relative imaginary-part tolerance for accepting an eigenvalue as a real root.
pub const IMAG_TOL: f64 = 1e-8;
/// Leading-coefficient trim threshold, relative to the largest coefficient.
pub const TRIM_TOL: f64 = 1e-15;

/// Real roots of `p` inside `[lo − tol, hi + tol]`, clamped and polished.
pub fn real_roots_in(p: &Poly, lo: f64, hi: f64) -> (Vec<f64>, Option<SolverWarning>) {
    let r = poly::roots(p, TRIM_TOL);
    let warning = (r.degree_drop > 0).then(|| SolverWarning::DegreeDrop(r.degree_drop));
    let mut out: Vec<f64> = r
        .roots
        .iter()
        .filter(|z| z.im.abs() < IMAG_TOL * (1.0 + z.re.abs()))
        .filter(|z| z.re >= lo - IMAG_TOL && z.re <= hi + IMAG_TOL)
        .map(|z| poly::polish_real_root(p, z.re, 30).clamp(lo, hi))
        .collect();
    out.sort_by(f64::total_cmp);
    (out, warning)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline(n: f64, e1: f64, e2: f64) -> SystemParams {
        SystemParams::baseline(n, e1, e2)
    }

    #[test]
    fn empty_inversion_gives_empty_cavity_field() {
        let p = baseline(5000.0, 0.8, 0.3);
        let a = alpha_of_x(0.0, &p, Mode::One).unwrap();
        assert!((a.norm_sqr() - 0.64 / (1.32 * 1.32)).abs() < 1e-15);
        let mut q = p;
        q.delta_c2 = 0.5;
        let a2 = alpha_of_x(0.0, &q, Mode::Two).unwrap();
        assert!((a2 - Complex64::new(0.3, 0.0) / Complex64::new(1.32, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn undriven_mode_has_no_field() {
        let p = baseline(1e5, 0.0, 1.0);
        for x in [-1.0, -0.4, 0.0, 0.3] {
            assert_eq!(alpha_of_x(x, &p, Mode::One).unwrap(), Complex64::new(0.0, 0.0));
            assert_eq!(excited_population_of_x(x, &p, Mode::One).unwrap(), 0.0);
        }
    }

    #[test]
    fn fully_inverted_ground_matches_exact_modulus() {
        // |α|²κ²/η² at x = −1 from the closed form, against the modulus
        // computed directly from g, D.
        let p = baseline(5000.0, 1.0, 0.0);
        let a = alpha_of_x(-1.0, &p, Mode::One).unwrap();
        let g2 = 50.0;
        let d = Complex64::new(2.0, 12.0);
        let exact = 1.32 * 1.32 / (Complex64::new(1.32, 0.0) + g2 / d).norm_sqr();
        let t = a.norm_sqr() * 1.32 * 1.32;
        assert!((t - exact).abs() < 1e-15);
        let c = crate::cooperativity(&p, Mode::One);
        assert!((t - 1.0 / (1.0 + c * c)).abs() < 0.05);
    }

    #[test]
    fn excited_population_zero_at_zero_inversion() {
        let p = baseline(5000.0, 2.0, 2.0);
        assert_eq!(excited_population_of_x(0.0, &p, Mode::One).unwrap(), 0.0);
        assert!(excited_population_of_x(-0.5, &p, Mode::One).unwrap() > 0.0);
    }

    #[test]
    fn pole_is_reported() {
        let mut p = baseline(5000.0, 1.0, 1.0);
        let r = ModeReduction::new(&p, Mode::One);
        // Δ_C chosen so that κ − a x and Δ_C + b x vanish together
        let x = 1.32 / r.a;
        p.delta_c1 = -r.b * x;
        assert!(matches!(
            alpha_of_x(x, &p, Mode::One),
            Err(BistabError::Singular { mode: 1, .. })
        ));
    }

    #[test]
    fn symmetric_residual_vanishes_on_diagonal() {
        let p = baseline(1e4, 1.3, 1.3);
        for x in [-0.9, -0.5, -0.1] {
            assert_eq!(fixed_point_residuals(x, x, &p).unwrap().0, 0.0);
        }
    }

    #[test]
    fn undriven_half_split_satisfies_normalization() {
        let p = baseline(5000.0, 0.0, 0.0);
        assert_eq!(fixed_point_residuals(-0.5, -0.5, &p).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn polynomial_is_degree_seven() {
        let p = polynomial_in_x1(&baseline(5000.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.len(), 8);
        assert!(p[7] != 0.0);
    }

    #[test]
    fn all_zero_cross_decay_is_degenerate() {
        let mut p = baseline(5000.0, 1.0, 1.0);
        p.cross_decay1 = 0.0;
        p.cross_decay2 = 0.0;
        assert!(matches!(polynomial_in_x1(&p), Err(BistabError::Degenerate(_))));
    }

    #[test]
    fn lift_satisfies_both_residuals() {
        let p = baseline(1e5, 0.9, 1.7);
        let red = Reduction::new(&p);
        let (xs, _) = real_roots_in(&red.polynomial, -1.0, 0.0);
        assert!(!xs.is_empty());
        for x1 in xs {
            for x2 in red.lift(x1).unwrap() {
                let (r1, r2) = fixed_point_residuals(x1, x2, &p).unwrap();
                assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "{r1} {r2}");
            }
        }
    }
}
