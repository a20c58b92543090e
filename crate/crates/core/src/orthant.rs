//! Orthant calculus for `φ(x) = f(x) + μ‖x‖₁`: minimum-norm subgradient,
//! variable classification, orthant projection, soft-thresholding and the
//! local quadratic models.

use crate::numkit;
use crate::objective::HessianOperator;

/// `sgn` with `sgn(0) = 0`.
pub fn sgn(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Minimum-norm element of `∂φ(x)`, coordinate by coordinate.
pub fn min_norm_subgradient(grad_f: &[f64], x: &[f64], mu: f64) -> Vec<f64> {
    debug_assert_eq!(grad_f.len(), x.len());
    grad_f
        .iter()
        .zip(x)
        .map(|(&gi, &xi)| {
            if xi > 0.0 || (xi == 0.0 && gi + mu < 0.0) {
                gi + mu
            } else if xi < 0.0 || (xi == 0.0 && gi - mu > 0.0) {
                gi - mu
            } else {
                0.0
            }
        })
        .collect()
}

/// Role of a variable at the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarClass {
    /// `x_i = 0` and `|∇_i f| ≤ μ`: held at zero.
    Active,
    /// `x_i ≠ 0`.
    Free,
    /// `x_i = 0` and `|∇_i f| > μ`: may leave zero.
    Unsure,
}

/// Snapshot of the classification at one iterate.
#[derive(Debug, Clone)]
pub struct OrthantState {
    pub x: Vec<f64>,
    pub grad: Vec<f64>,
    /// minimum-norm subgradient
    pub g: Vec<f64>,
    /// orthant indicator: `sgn(x_i)` if `x_i ≠ 0`, else `sgn(−g_i)`
    pub zeta: Vec<i8>,
    pub class: Vec<VarClass>,
    pub mu: f64,
}

impl OrthantState {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn indices_of(&self, which: VarClass) -> Vec<usize> {
        self.class
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == which)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn active(&self) -> Vec<usize> {
        self.indices_of(VarClass::Active)
    }

    pub fn free(&self) -> Vec<usize> {
        self.indices_of(VarClass::Free)
    }

    pub fn unsure(&self) -> Vec<usize> {
        self.indices_of(VarClass::Unsure)
    }

    pub fn g_inf(&self) -> f64 {
        numkit::norm_inf(&self.g)
    }
}

/// Classifies every variable at `x` and fills in `g` and `ζ`.
pub fn identify_sets(x: &[f64], grad_f: &[f64], mu: f64) -> OrthantState {
    let g = min_norm_subgradient(grad_f, x, mu);
    let class = x
        .iter()
        .zip(grad_f)
        .map(|(&xi, &gi)| {
            if xi != 0.0 {
                VarClass::Free
            } else if gi.abs() <= mu {
                VarClass::Active
            } else {
                VarClass::Unsure
            }
        })
        .collect();
    let zeta = x
        .iter()
        .zip(&g)
        .map(|(&xi, &gi)| if xi != 0.0 { sgn(xi) } else { sgn(-gi) })
        .collect();
    OrthantState {
        x: x.to_vec(),
        grad: grad_f.to_vec(),
        g,
        zeta,
        class,
        mu,
    }
}

/// Keeps `x_i` where its sign matches `ζ_i`, zeroes it otherwise.
pub fn orthant_project(x: &[f64], zeta: &[i8]) -> Vec<f64> {
    debug_assert_eq!(x.len(), zeta.len());
    x.iter()
        .zip(zeta)
        .map(|(&xi, &zi)| if sgn(xi) == zi { xi } else { 0.0 })
        .collect()
}

/// `S_α(x)_i = max(|x_i| − α, 0)·sgn(x_i)`, the prox of `α‖·‖₁`.
pub fn soft_threshold(x: &[f64], alpha: f64) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let m = xi.abs() - alpha;
            if m > 0.0 {
                m.copysign(xi)
            } else {
                0.0
            }
        })
        .collect()
}

/// Second-order models of `φ` around a base point `x^k`:
/// `q(z) = f(x) + (z−x)ᵀ∇f + ½(z−x)ᵀH(z−x) + μ‖z‖₁`
/// and its smooth orthant-face counterpart with `μζᵀz` in place of `μ‖z‖₁`.
pub struct PiecewiseQuadModel<'a> {
    pub x: &'a [f64],
    pub f_x: f64,
    pub grad: &'a [f64],
    pub hess: &'a dyn HessianOperator,
    pub mu: f64,
}

impl<'a> PiecewiseQuadModel<'a> {
    /// `q(z) − q(x)`, accumulated in displacement form so that small model
    /// decreases are not lost against the size of `f(x)`.
    pub fn change(&self, z: &[f64]) -> f64 {
        let s: Vec<f64> = z.iter().zip(self.x).map(|(a, b)| a - b).collect();
        let mut hs = vec![0.0; s.len()];
        self.hess.apply(&s, &mut hs);
        let l1_change: f64 = z
            .iter()
            .zip(self.x)
            .map(|(zi, xi)| zi.abs() - xi.abs())
            .sum();
        numkit::dot(&s, self.grad) + 0.5 * numkit::dot(&s, &hs) + self.mu * l1_change
    }

    /// `q(z)`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.f_x + self.mu * numkit::norm1(self.x) + self.change(z)
    }

    /// Smooth model `q̄(z)` on the face selected by `zeta`.
    pub fn eval_smooth(&self, z: &[f64], zeta: &[i8]) -> f64 {
        let s: Vec<f64> = z.iter().zip(self.x).map(|(a, b)| a - b).collect();
        let mut hs = vec![0.0; s.len()];
        self.hess.apply(&s, &mut hs);
        let face: f64 = zeta.iter().zip(z).map(|(&zi, v)| zi as f64 * v).sum();
        self.f_x + numkit::dot(&s, self.grad) + 0.5 * numkit::dot(&s, &hs) + self.mu * face
    }
}
