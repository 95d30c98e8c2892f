//! Parameters, state and the mean-field equations of motion of the two-mode,
//! four-level cavity model.
//!
//! All rates, detunings and drives are in units of the atomic linewidth γ
//! (γ ≡ 1 in the baseline). The collective coupling `g = g_single·√N` is derived,
//! never stored, so finite-size scans only touch `atom_number`.
//!
//! Real embedding used by every Jacobian and spectral routine:
//!
//! | index | component   | index | component   |
//! |-------|-------------|-------|-------------|
//! | 0     | Re α₁       | 6     | Re m₂       |
//! | 1     | Im α₁       | 7     | Im m₂       |
//! | 2     | Re α₂       | 8     | n_e1        |
//! | 3     | Im α₂       | 9     | n_g1        |
//! | 4     | Re m₁       | 10    | n_e2        |
//! | 5     | Im m₁       | 11    | n_g2        |

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dimension of the real state vector.
pub const DIM: usize = 12;

pub type RealStateVector = SVector<f64, DIM>;
pub type StateMatrix = SMatrix<f64, DIM, DIM>;

/// Indices of the population components in [`RealStateVector`].
pub const POPULATION_INDICES: [usize; 4] = [8, 9, 10, 11];

/// One of the two cavity-mode / atomic-transition pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    One,
    Two,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::One, Mode::Two];

    pub fn other(self) -> Mode {
        match self {
            Mode::One => Mode::Two,
            Mode::Two => Mode::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Mode::One => 1,
            Mode::Two => 2,
        }
    }
}

/// Control and material parameters of the model, in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Atomic linewidths γ₁, γ₂.
    pub gamma1: f64,
    pub gamma2: f64,
    /// Cross-decay rates Γ₁ (e₁ → g₂) and Γ₂ (e₂ → g₁).
    pub cross_decay1: f64,
    pub cross_decay2: f64,
    /// Cavity linewidths κ₁, κ₂.
    pub kappa1: f64,
    pub kappa2: f64,
    /// Single-atom coupling g(N = 1).
    pub g_single: f64,
    /// Atom number N ≥ 1.
    pub atom_number: f64,
    pub delta_a1: f64,
    pub delta_a2: f64,
    pub delta_c1: f64,
    pub delta_c2: f64,
    /// Scaled drive amplitudes η₁, η₂ (the physical drive is √N·η).
    pub eta1: f64,
    pub eta2: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::baseline(5000.0, 0.0, 0.0)
    }
}

/// Parameters of one transition/mode pair, including the cross decay out of
/// its excited state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub gamma: f64,
    pub cross_decay: f64,
    pub kappa: f64,
    pub g: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub eta: f64,
}

impl ModeParams {
    /// Complex polarization decay `D = γ + Γ − iΔ_A`.
    pub fn polarization_decay(&self) -> Complex64 {
        Complex64::new(self.gamma + self.cross_decay, -self.delta_a)
    }
}

impl SystemParams {
    /// Symmetric parameters used throughout the figures: κ = 1.32γ, Γ = γ,
    /// g(N=1) = 0.1γ, Δ_A = −12γ, Δ_C = 0.
    pub fn baseline(atom_number: f64, eta1: f64, eta2: f64) -> Self {
        SystemParams {
            gamma1: 1.0,
            gamma2: 1.0,
            cross_decay1: 1.0,
            cross_decay2: 1.0,
            kappa1: 1.32,
            kappa2: 1.32,
            g_single: 0.1,
            atom_number,
            delta_a1: -12.0,
            delta_a2: -12.0,
            delta_c1: 0.0,
            delta_c2: 0.0,
            eta1,
            eta2,
        }
    }

    pub fn with_drives(mut self, eta1: f64, eta2: f64) -> Self {
        self.eta1 = eta1;
        self.eta2 = eta2;
        self
    }

    pub fn with_atom_number(mut self, atom_number: f64) -> Self {
        self.atom_number = atom_number;
        self
    }

    /// Collective coupling `g = g_single·√N`, shared by both transitions.
    pub fn coupling(&self) -> f64 {
        self.g_single * self.atom_number.sqrt()
    }

    pub fn eta(&self, mode: Mode) -> f64 {
        match mode {
            Mode::One => self.eta1,
            Mode::Two => self.eta2,
        }
    }

    pub fn mode(&self, mode: Mode) -> ModeParams {
        let g = self.coupling();
        match mode {
            Mode::One => ModeParams {
                gamma: self.gamma1,
                cross_decay: self.cross_decay1,
                kappa: self.kappa1,
                g,
                delta_a: self.delta_a1,
                delta_c: self.delta_c1,
                eta: self.eta1,
            },
            Mode::Two => ModeParams {
                gamma: self.gamma2,
                cross_decay: self.cross_decay2,
                kappa: self.kappa2,
                g,
                delta_a: self.delta_a2,
                delta_c: self.delta_c2,
                eta: self.eta2,
            },
        }
    }

    /// Parameters with the roles of the two modes exchanged.
    pub fn swapped(&self) -> Self {
        SystemParams {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            cross_decay1: self.cross_decay2,
            cross_decay2: self.cross_decay1,
            kappa1: self.kappa2,
            kappa2: self.kappa1,
            g_single: self.g_single,
            atom_number: self.atom_number,
            delta_a1: self.delta_a2,
            delta_a2: self.delta_a1,
            delta_c1: self.delta_c2,
            delta_c2: self.delta_c1,
            eta1: self.eta2,
            eta2: self.eta1,
        }
    }

    /// True when every index-1 parameter equals its index-2 partner.
    pub fn is_symmetric(&self) -> bool {
        self.gamma1 == self.gamma2
            && self.cross_decay1 == self.cross_decay2
            && self.kappa1 == self.kappa2
            && self.delta_a1 == self.delta_a2
            && self.delta_c1 == self.delta_c2
    }
}

/// Outcome of [`validate`]; empty iff the parameters are admissible.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> crate::Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(crate::BistabError::InvalidParams(self.violations.join("; ")))
        }
    }
}

/// Checks the admissibility constraints on a parameter set.
///
/// Linewidths must be strictly positive. Cross-decay rates may be zero so that
/// the decoupled two-level limit stays reachable.
pub fn validate(params: &SystemParams) -> ValidationReport {
    let mut violations = Vec::new();
    let fields = [
        ("gamma1", params.gamma1),
        ("gamma2", params.gamma2),
        ("cross_decay1", params.cross_decay1),
        ("cross_decay2", params.cross_decay2),
        ("kappa1", params.kappa1),
        ("kappa2", params.kappa2),
        ("g_single", params.g_single),
        ("atom_number", params.atom_number),
        ("delta_a1", params.delta_a1),
        ("delta_a2", params.delta_a2),
        ("delta_c1", params.delta_c1),
        ("delta_c2", params.delta_c2),
        ("eta1", params.eta1),
        ("eta2", params.eta2),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            violations.push(format!("non-finite value: {name}"));
        }
    }
    for (name, value) in [
        ("gamma1", params.gamma1),
        ("gamma2", params.gamma2),
        ("kappa1", params.kappa1),
        ("kappa2", params.kappa2),
    ] {
        if value <= 0.0 {
            violations.push(format!("nonpositive linewidth: {name}"));
        }
    }
    for (name, value) in [
        ("cross_decay1", params.cross_decay1),
        ("cross_decay2", params.cross_decay2),
    ] {
        if value < 0.0 {
            violations.push(format!("negative cross-decay rate: {name}"));
        }
    }
    for (name, value) in [("eta1", params.eta1), ("eta2", params.eta2)] {
        if value < 0.0 {
            violations.push(format!("negative drive amplitude: {name}"));
        }
    }
    if params.g_single < 0.0 {
        violations.push("negative coupling: g_single".to_string());
    }
    if params.atom_number < 1.0 {
        violations.push("atom number below 1: atom_number".to_string());
    }
    ValidationReport { violations }
}

/// Cooperativity `C = g²/√((Δ_C² + κ²)(Δ_A² + γ²))` of one mode, with the
/// collective coupling.
pub fn cooperativity(params: &SystemParams, mode: Mode) -> f64 {
    let p = params.mode(mode);
    let g2 = p.g * p.g;
    g2 / ((p.delta_c * p.delta_c + p.kappa * p.kappa) * (p.delta_a * p.delta_a + p.gamma * p.gamma))
        .sqrt()
}

/// Mean-field state: field amplitudes (per √N), polarizations and the four
/// level populations per atom.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub m1: Complex64,
    pub m2: Complex64,
    pub ne1: f64,
    pub ng1: f64,
    pub ne2: f64,
    pub ng2: f64,
}

impl MeanFieldState {
    /// Empty cavity with every atom in the ground state of `mode`.
    pub fn ground(mode: Mode) -> Self {
        let mut s = MeanFieldState::default();
        match mode {
            Mode::One => s.ng1 = 1.0,
            Mode::Two => s.ng2 = 1.0,
        }
        s
    }

    pub fn alpha(&self, mode: Mode) -> Complex64 {
        match mode {
            Mode::One => self.alpha1,
            Mode::Two => self.alpha2,
        }
    }

    pub fn polarization(&self, mode: Mode) -> Complex64 {
        match mode {
            Mode::One => self.m1,
            Mode::Two => self.m2,
        }
    }

    pub fn excited(&self, mode: Mode) -> f64 {
        match mode {
            Mode::One => self.ne1,
            Mode::Two => self.ne2,
        }
    }

    pub fn ground_population(&self, mode: Mode) -> f64 {
        match mode {
            Mode::One => self.ng1,
            Mode::Two => self.ng2,
        }
    }

    /// Population inversion `n_e − n_g` of one transition.
    pub fn inversion(&self, mode: Mode) -> f64 {
        self.excited(mode) - self.ground_population(mode)
    }

    pub fn population_sum(&self) -> f64 {
        self.ne1 + self.ng1 + self.ne2 + self.ng2
    }

    /// Index swap 1 ↔ 2.
    pub fn swapped(&self) -> Self {
        MeanFieldState {
            alpha1: self.alpha2,
            alpha2: self.alpha1,
            m1: self.m2,
            m2: self.m1,
            ne1: self.ne2,
            ng1: self.ng2,
            ne2: self.ne1,
            ng2: self.ng1,
        }
    }

    pub fn to_real(&self) -> RealStateVector {
        RealStateVector::from([
            self.alpha1.re,
            self.alpha1.im,
            self.alpha2.re,
            self.alpha2.im,
            self.m1.re,
            self.m1.im,
            self.m2.re,
            self.m2.im,
            self.ne1,
            self.ng1,
            self.ne2,
            self.ng2,
        ])
    }

    pub fn from_real(v: &RealStateVector) -> Self {
        MeanFieldState {
            alpha1: Complex64::new(v[0], v[1]),
            alpha2: Complex64::new(v[2], v[3]),
            m1: Complex64::new(v[4], v[5]),
            m2: Complex64::new(v[6], v[7]),
            ne1: v[8],
            ng1: v[9],
            ne2: v[10],
            ng2: v[11],
        }
    }

    /// Max-norm distance in the real embedding.
    pub fn distance(&self, other: &MeanFieldState) -> f64 {
        (self.to_real() - other.to_real()).amax()
    }
}

/// Time derivative of every state component under the mean-field equations.
///
/// Populations exchange probability only through the terms below, so the four
/// population derivatives sum to zero up to rounding.
pub fn rhs(state: &MeanFieldState, params: &SystemParams) -> MeanFieldState {
    let p1 = params.mode(Mode::One);
    let p2 = params.mode(Mode::Two);
    let i = Complex64::i();

    let dalpha1 = (i * p1.delta_c - p1.kappa) * state.alpha1 + p1.g * state.m1 + p1.eta;
    let dalpha2 = (i * p2.delta_c - p2.kappa) * state.alpha2 + p2.g * state.m2 + p2.eta;
    let dm1 = (i * p1.delta_a - p1.gamma - p1.cross_decay) * state.m1
        + p1.g * (state.ne1 - state.ng1) * state.alpha1;
    let dm2 = (i * p2.delta_a - p2.gamma - p2.cross_decay) * state.m2
        + p2.g * (state.ne2 - state.ng2) * state.alpha2;

    // coherent de-excitation g(α*m + m*α) and the three decay channels
    let pump1 = 2.0 * p1.g * (state.alpha1.conj() * state.m1).re;
    let pump2 = 2.0 * p2.g * (state.alpha2.conj() * state.m2).re;
    let direct1 = 2.0 * p1.gamma * state.ne1;
    let direct2 = 2.0 * p2.gamma * state.ne2;
    let cross1 = 2.0 * p1.cross_decay * state.ne1;
    let cross2 = 2.0 * p2.cross_decay * state.ne2;

    MeanFieldState {
        alpha1: dalpha1,
        alpha2: dalpha2,
        m1: dm1,
        m2: dm2,
        ne1: -(pump1 + direct1) - cross1,
        ng1: (pump1 + direct1) + cross2,
        ne2: -(pump2 + direct2) - cross2,
        ng2: (pump2 + direct2) + cross1,
    }
}

/// [`rhs`] in the real embedding.
pub fn rhs_real(y: &RealStateVector, params: &SystemParams) -> RealStateVector {
    rhs(&MeanFieldState::from_real(y), params).to_real()
}

/// Analytic Jacobian `J[i][j] = ∂rhs_i/∂y_j` in the real embedding.
pub fn jacobian(state: &MeanFieldState, params: &SystemParams) -> StateMatrix {
    let mut jac = StateMatrix::zeros();
    let blocks = [
        (Mode::One, 0usize, 4usize, 8usize, 9usize, 11usize),
        (Mode::Two, 2, 6, 10, 11, 9),
    ];
    for (mode, ia, im, ie, ig, ig_other) in blocks {
        let p = params.mode(mode);
        let a = state.alpha(mode);
        let m = state.polarization(mode);
        let x = state.inversion(mode);
        let lam = p.gamma + p.cross_decay;

        // field
        jac[(ia, ia)] = -p.kappa;
        jac[(ia, ia + 1)] = -p.delta_c;
        jac[(ia, im)] = p.g;
        jac[(ia + 1, ia)] = p.delta_c;
        jac[(ia + 1, ia + 1)] = -p.kappa;
        jac[(ia + 1, im + 1)] = p.g;

        // polarization
        jac[(im, im)] = -lam;
        jac[(im, im + 1)] = -p.delta_a;
        jac[(im, ia)] = p.g * x;
        jac[(im, ie)] = p.g * a.re;
        jac[(im, ig)] = -p.g * a.re;
        jac[(im + 1, im)] = p.delta_a;
        jac[(im + 1, im + 1)] = -lam;
        jac[(im + 1, ia + 1)] = p.g * x;
        jac[(im + 1, ie)] = p.g * a.im;
        jac[(im + 1, ig)] = -p.g * a.im;

        // pump term 2g(a_r m_r + a_i m_i)
        let grad = [
            (ia, 2.0 * p.g * m.re),
            (ia + 1, 2.0 * p.g * m.im),
            (im, 2.0 * p.g * a.re),
            (im + 1, 2.0 * p.g * a.im),
        ];
        for (col, d) in grad {
            jac[(ie, col)] = -d;
            jac[(ig, col)] = d;
        }
        jac[(ie, ie)] = -2.0 * lam;
        jac[(ig, ie)] = 2.0 * p.gamma;
        jac[(ig_other, ie)] = 2.0 * p.cross_decay;
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng) -> MeanFieldState {
        let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (a1, a2, m1, m2) = (c(), c(), c(), c());
        MeanFieldState {
            alpha1: a1,
            alpha2: a2,
            m1,
            m2,
            ne1: rng.gen_range(0.0..0.5),
            ng1: rng.gen_range(0.0..0.5),
            ne2: rng.gen_range(0.0..0.5),
            ng2: rng.gen_range(0.0..0.5),
        }
    }

    fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
        SystemParams {
            gamma1: rng.gen_range(0.5..2.0),
            gamma2: rng.gen_range(0.5..2.0),
            cross_decay1: rng.gen_range(0.0..2.0),
            cross_decay2: rng.gen_range(0.0..2.0),
            kappa1: rng.gen_range(0.5..2.0),
            kappa2: rng.gen_range(0.5..2.0),
            g_single: rng.gen_range(0.0..0.2),
            atom_number: rng.gen_range(1.0..1e4),
            delta_a1: rng.gen_range(-15.0..15.0),
            delta_a2: rng.gen_range(-15.0..15.0),
            delta_c1: rng.gen_range(-2.0..2.0),
            delta_c2: rng.gen_range(-2.0..2.0),
            eta1: rng.gen_range(0.0..5.0),
            eta2: rng.gen_range(0.0..5.0),
        }
    }

    /// Second, component-wise transcription of the equations of motion used
    /// as an oracle for `rhs`. Works with explicit real and imaginary parts.
    fn rhs_oracle(s: &MeanFieldState, p: &SystemParams) -> [f64; 12] {
        let g = p.g_single * p.atom_number.sqrt();
        let (a1r, a1i, a2r, a2i) = (s.alpha1.re, s.alpha1.im, s.alpha2.re, s.alpha2.im);
        let (m1r, m1i, m2r, m2i) = (s.m1.re, s.m1.im, s.m2.re, s.m2.im);
        let x1 = s.ne1 - s.ng1;
        let x2 = s.ne2 - s.ng2;
        let l1 = p.gamma1 + p.cross_decay1;
        let l2 = p.gamma2 + p.cross_decay2;
        // α*m + m*α = 2 Re(α* m)
        let c1 = 2.0 * (a1r * m1r + a1i * m1i);
        let c2 = 2.0 * (a2r * m2r + a2i * m2i);
        [
            -p.kappa1 * a1r - p.delta_c1 * a1i + g * m1r + p.eta1,
            p.delta_c1 * a1r - p.kappa1 * a1i + g * m1i,
            -p.kappa2 * a2r - p.delta_c2 * a2i + g * m2r + p.eta2,
            p.delta_c2 * a2r - p.kappa2 * a2i + g * m2i,
            -l1 * m1r - p.delta_a1 * m1i + g * x1 * a1r,
            p.delta_a1 * m1r - l1 * m1i + g * x1 * a1i,
            -l2 * m2r - p.delta_a2 * m2i + g * x2 * a2r,
            p.delta_a2 * m2r - l2 * m2i + g * x2 * a2i,
            -g * c1 - 2.0 * l1 * s.ne1,
            g * c1 + 2.0 * p.gamma1 * s.ne1 + 2.0 * p.cross_decay2 * s.ne2,
            -g * c2 - 2.0 * l2 * s.ne2,
            g * c2 + 2.0 * p.gamma2 * s.ne2 + 2.0 * p.cross_decay1 * s.ne1,
        ]
    }

    #[test]
    fn baseline_is_valid() {
        assert!(validate(&SystemParams::baseline(5000.0, 1.0, 1.0)).is_valid());
    }

    #[test]
    fn zero_kappa_is_rejected() {
        let mut p = SystemParams::baseline(5000.0, 1.0, 1.0);
        p.kappa1 = 0.0;
        let report = validate(&p);
        assert!(!report.is_valid());
        assert!(report.violations[0].contains("nonpositive linewidth"));
    }

    #[test]
    fn negative_drive_is_rejected() {
        let p = SystemParams::baseline(5000.0, -1.0, 1.0);
        let report = validate(&p);
        assert_eq!(report.violations, vec!["negative drive amplitude: eta1".to_string()]);
    }

    #[test]
    fn undriven_ground_state_is_fixed() {
        let p = SystemParams::baseline(5000.0, 0.0, 0.0);
        let d = rhs(&MeanFieldState::ground(Mode::One), &p);
        assert_eq!(d.to_real(), RealStateVector::zeros());
    }

    #[test]
    fn rhs_matches_componentwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let p = random_params(&mut rng);
            let got = rhs(&s, &p).to_real();
            let want = rhs_oracle(&s, &p);
            let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for k in 0..DIM {
                assert!(
                    (got[k] - want[k]).abs() <= 1e-14 * scale,
                    "component {k}: {} vs {}",
                    got[k],
                    want[k]
                );
            }
        }
    }

    #[test]
    fn population_derivatives_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let s = random_state(&mut rng);
            let p = random_params(&mut rng);
            let d = rhs(&s, &p);
            // rounding only: scale by the largest population flux
            let scale = [d.ne1, d.ng1, d.ne2, d.ng2]
                .iter()
                .fold(1.0f64, |m, v| m.max(v.abs()));
            assert!((d.ne1 + d.ng1 + d.ne2 + d.ng2).abs() <= 1e-15 * 4.0 * scale);
        }
    }

    #[test]
    fn population_sum_exact_at_unit_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = SystemParams::baseline(50.0, 1.0, 0.7);
        for _ in 0..500 {
            let mut s = random_state(&mut rng);
            s.alpha1 *= 0.2;
            s.alpha2 *= 0.2;
            let d = rhs(&s, &p);
            assert!((d.ne1 + d.ng1 + d.ne2 + d.ng2).abs() <= 1e-15);
        }
    }

    #[test]
    fn index_swap_commutes_with_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let p = SystemParams::baseline(rng.gen_range(1.0..1e6), rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
            assert_eq!(rhs(&s.swapped(), &p.swapped()), rhs(&s, &p).swapped());
        }
    }

    #[test]
    fn decoupled_subsystems_do_not_talk() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let mut p = random_params(&mut rng);
            p.cross_decay1 = 0.0;
            p.cross_decay2 = 0.0;
            let s = random_state(&mut rng);
            let mut t = random_state(&mut rng);
            t.alpha1 = s.alpha1;
            t.m1 = s.m1;
            t.ne1 = s.ne1;
            t.ng1 = s.ng1;
            let (ds, dt) = (rhs(&s, &p), rhs(&t, &p));
            assert_eq!(ds.alpha1, dt.alpha1);
            assert_eq!(ds.m1, dt.m1);
            assert_eq!(ds.ne1.to_bits(), dt.ne1.to_bits());
            assert_eq!(ds.ng1.to_bits(), dt.ng1.to_bits());
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-6;
        for _ in 0..20 {
            let s = random_state(&mut rng);
            let p = random_params(&mut rng);
            let jac = jacobian(&s, &p);
            let y = s.to_real();
            let mut worst = 0.0f64;
            for j in 0..DIM {
                let mut yp = y;
                let mut ym = y;
                yp[j] += h;
                ym[j] -= h;
                let col = (rhs_real(&yp, &p) - rhs_real(&ym, &p)) / (2.0 * h);
                for i in 0..DIM {
                    worst = worst.max((jac[(i, j)] - col[i]).abs());
                }
            }
            assert!(worst < 1e-6, "max deviation {worst}");
        }
    }

    #[test]
    fn population_sum_is_left_null_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let jac = jacobian(&random_state(&mut rng), &random_params(&mut rng));
            for j in 0..DIM {
                let s: f64 = POPULATION_INDICES.iter().map(|&i| jac[(i, j)]).sum();
                assert!(s.abs() < 1e-12, "column {j}: {s}");
            }
        }
    }

    #[test]
    fn uncoupled_field_block_is_damped_oscillator() {
        let mut p = SystemParams::baseline(5000.0, 0.0, 0.0);
        p.g_single = 0.0;
        p.delta_c1 = 0.7;
        p.delta_c2 = -0.3;
        let jac = jacobian(&MeanFieldState::ground(Mode::One), &p);
        let block = jac.fixed_view::<2, 2>(0, 0).into_owned();
        let ev = block.complex_eigenvalues();
        let mut ims: Vec<f64> = ev.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!(ev.iter().all(|z| (z.re + 1.32).abs() < 1e-12));
        assert!((ims[0] + 0.7).abs() < 1e-12 && (ims[1] - 0.7).abs() < 1e-12);
        let block2 = jac.fixed_view::<2, 2>(2, 2).into_owned();
        assert!(block2.complex_eigenvalues().iter().all(|z| (z.im.abs() - 0.3).abs() < 1e-12));
    }

    #[test]
    fn cooperativity_baseline() {
        let p = SystemParams::baseline(5000.0, 0.0, 0.0);
        // 50 / sqrt(1.32² · 145)
        let oracle = 50.0 / (1.32f64 * 1.32 * 145.0).sqrt();
        assert!((cooperativity(&p, Mode::One) - oracle).abs() < 1e-14);
        assert!((cooperativity(&p, Mode::One) - 3.1457).abs() < 5e-5);
    }

    #[test]
    fn cooperativity_limits() {
        let mut p = SystemParams::baseline(5000.0, 0.0, 0.0);
        p.g_single = 0.0;
        assert_eq!(cooperativity(&p, Mode::Two), 0.0);
        let mut q = SystemParams::baseline(400.0, 0.0, 0.0);
        q.delta_a1 = 0.0;
        q.delta_c1 = 0.0;
        assert!((cooperativity(&q, Mode::One) - 4.0 / 1.32).abs() < 1e-14);
    }

    #[test]
    fn real_embedding_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let s = random_state(&mut rng);
            assert_eq!(MeanFieldState::from_real(&s.to_real()), s);
        }
    }
}
