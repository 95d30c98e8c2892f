//! Dense real polynomials (constant term first) and their roots via the
//! eigenvalues of a balanced companion matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// `c0 + c1·x`
    pub fn linear(c0: f64, c1: f64) -> Self {
        Poly(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Degree after ignoring exactly-zero leading coefficients.
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.0.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn square(&self) -> Poly {
        self * self
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let get = |p: &Poly, k: usize| p.0.get(k).copied().unwrap_or(0.0);
        Poly((0..n).map(|k| get(self, k) + get(rhs, k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// Result of [`roots`].
#[derive(Debug, Clone)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    /// Number of leading coefficients discarded as numerically zero.
    pub degree_drop: usize,
}

/// All complex roots of `p`.
///
/// Leading coefficients below `rel_trim·max|c|` are dropped (they only carry
/// roots of enormous modulus). Exact zero roots are split off before the
/// companion matrix is formed.
pub fn roots(p: &Poly, rel_trim: f64) -> Roots {
    let scale = p.max_abs_coeff();
    let mut c: Vec<f64> = p.0.clone();
    let full = c.len();
    while let Some(&last) = c.last() {
        if last.abs() <= rel_trim * scale || last == 0.0 {
            c.pop();
        } else {
            break;
        }
    }
    let degree_drop = full.saturating_sub(c.len().max(1));
    let mut out = Vec::new();
    let zeros = c.iter().take_while(|&&v| v == 0.0).count();
    out.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(zeros.min(c.len().saturating_sub(1))));
    let c = &c[zeros.min(c.len())..];
    if c.len() >= 2 {
        let n = c.len() - 1;
        let lead = c[n];
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -c[i] / lead;
        }
        balance(&mut comp);
        out.extend(comp.complex_eigenvalues().iter().copied());
    }
    Roots { roots: out, degree_drop }
}

/// Parlett–Reinsch diagonal similarity balancing with powers of two.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= inv;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Newton polish of a real root estimate of `p`; falls back to the input when
/// the iteration wanders off.
pub fn polish_real_root(p: &Poly, x0: f64, max_iter: usize) -> f64 {
    let mut x = x0;
    let mut best = (p.eval(x0).abs(), x0);
    for _ in 0..max_iter {
        let (v, dv) = p.eval_with_derivative(x);
        if v.abs() < best.0 {
            best = (v.abs(), x);
        }
        if v == 0.0 || dv == 0.0 || !dv.is_finite() {
            break;
        }
        let step = v / dv;
        let next = x - step;
        if !next.is_finite() || (next - x0).abs() > 1e-3 * (1.0 + x0.abs()) {
            break;
        }
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    let v = p.eval(x).abs();
    if v <= best.0 {
        x
    } else {
        best.1
    }
}
