//! The reduced two-variable free-energy surface
//!
//! ```text
//!     F(x, y) = c₁(x - √n₊)² + (v̂(0)/2)(x² + y²)² - (gap + d_v/η)(x² + y²)
//!               + δ y² - 2|λ| √n y
//! ```
//!
//! where `x` is the rescaled excited amplitude and `y` the rescaled
//! condensate amplitude, together with its minimizer, the three-case lower
//! bound and concavity brackets for difference quotients.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potentials::MeanField;

/// Default entropy coefficient of the surface.
pub const DEFAULT_C1: f64 = 2.0 / 27.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalPoint {
    pub x: f64,
    pub y: f64,
}

impl VariationalPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x >= 0.0 && y >= 0.0) {
            return Err(invalid(format!(
                "surface coordinates must be nonnegative, got ({x}, {y})"
            )));
        }
        Ok(VariationalPoint { x, y })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub c1: f64,
    pub vhat0: f64,
    /// `μ - μ̃`.
    pub gap: f64,
    /// `d_v / η`.
    pub dv_over_eta: f64,
    pub delta: f64,
    pub lambda: f64,
    /// `N₀(β, μ̃) / η`.
    pub n0: f64,
    /// `N₊(β, μ̃) / η`.
    pub n_plus: f64,
    /// `N(β, μ) / η`.
    pub n: f64,
    pub eta: f64,
}

impl SurfaceParams {
    /// Rescaled quantities of a solved mean-field problem, with the leading
    /// particle number standing in for `N(β, μ)`.
    pub fn from_mean_field(mf: &MeanField, lambda: f64, delta: f64) -> Self {
        let p = &mf.params;
        let s = &mf.solution;
        SurfaceParams {
            c1: DEFAULT_C1,
            vhat0: p.vhat0(),
            gap: s.gap,
            dv_over_eta: p.dv() / p.eta,
            delta,
            lambda,
            n0: s.n0 / p.eta,
            n_plus: s.n_plus / p.eta,
            n: mf.particles() / p.eta,
            eta: p.eta,
        }
    }

    pub fn with_perturbation(mut self, lambda: f64, delta: f64) -> Self {
        self.lambda = lambda;
        self.delta = delta;
        self
    }

    /// `gap + d_v/η`.
    fn shift(&self) -> f64 {
        self.gap + self.dv_over_eta
    }

    fn linear_pull(&self) -> f64 {
        self.lambda.abs() * self.n.sqrt()
    }

    /// `−gap² / (2 v̂(0))`.
    pub fn leading_value(&self) -> f64 {
        -self.gap * self.gap / (2.0 * self.vhat0)
    }

    /// `−gap²/(2v̂(0)) + δ n₀ − 2|λ| √(n n₀)`.
    pub fn bound_center(&self) -> f64 {
        self.leading_value() + self.delta * self.n0 - 2.0 * self.lambda.abs() * (self.n * self.n0).sqrt()
    }
}

pub fn surface_value(pt: VariationalPoint, sp: &SurfaceParams) -> f64 {
    let (x, y) = (pt.x, pt.y);
    let r2 = x * x + y * y;
    let dx = x - sp.n_plus.sqrt();
    sp.c1 * dx * dx + 0.5 * sp.vhat0 * r2 * r2 - sp.shift() * r2 + sp.delta * y * y - 2.0 * sp.linear_pull() * y
}

fn gradient(x: f64, y: f64, sp: &SurfaceParams) -> [f64; 2] {
    let r2 = x * x + y * y;
    let radial = 2.0 * sp.vhat0 * r2 - 2.0 * sp.shift();
    [
        2.0 * sp.c1 * (x - sp.n_plus.sqrt()) + radial * x,
        radial * y + 2.0 * sp.delta * y - 2.0 * sp.linear_pull(),
    ]
}

fn hessian(x: f64, y: f64, sp: &SurfaceParams) -> [[f64; 2]; 2] {
    let r2 = x * x + y * y;
    let v = sp.vhat0;
    let base = 2.0 * v * r2 - 2.0 * sp.shift();
    let xy = 4.0 * v * x * y;
    [
        [2.0 * sp.c1 + base + 4.0 * v * x * x, xy],
        [xy, base + 4.0 * v * y * y + 2.0 * sp.delta],
    ]
}

/// Gradient with the components pointing out of the quadrant removed at the
/// `x = 0` and `y = 0` edges.
fn projected_gradient(x: f64, y: f64, sp: &SurfaceParams) -> [f64; 2] {
    let mut g = gradient(x, y, sp);
    if x <= 0.0 && g[0] > 0.0 {
        g[0] = 0.0;
    }
    if y <= 0.0 && g[1] > 0.0 {
        g[1] = 0.0;
    }
    g
}

/// Search grid over `[0, x_max] × [0, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_max: f64,
    pub y_max: f64,
}

impl SurfaceGrid {
    /// `x_max = 2√(2 gap / v̂(0))`, `y_max = 2(√n₀ + 1)`.
    pub fn default_for(sp: &SurfaceParams) -> Self {
        SurfaceGrid {
            nx: 201,
            ny: 201,
            x_max: 2.0 * (2.0 * sp.gap.max(0.0) / sp.vhat0).sqrt(),
            y_max: 2.0 * (sp.n0.sqrt() + 1.0),
        }
    }

    pub fn with_resolution(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn dx(&self) -> f64 {
        self.x_max / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.y_max / (self.ny - 1) as f64
    }

    fn validate(&self, sp: &SurfaceParams) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(invalid("surface grid needs at least 3 points per axis"));
        }
        if !(self.x_max > 0.0 && self.y_max > 0.0) || !self.x_max.is_finite() || !self.y_max.is_finite() {
            return Err(invalid("surface box must have positive finite sides"));
        }
        if self.x_max * self.x_max < 4.0 * sp.gap / sp.vhat0 * (1.0 - 1e-12) {
            return Err(invalid(format!(
                "x_max² must be at least 4·gap/v̂(0) = {}",
                4.0 * sp.gap / sp.vhat0
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMinimum {
    pub point: VariationalPoint,
    pub value: f64,
    /// Grid point the refinement started from.
    pub grid_point: VariationalPoint,
    pub gradient_norm: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of a unimodal-looking `f` on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Grid search, coordinatewise golden-section sweeps inside the winning cell,
/// then Newton polishing until the projected gradient norm is at most 1e-8.
///
/// Ties on the grid go to the smaller `y`, then the smaller `x`.
pub fn minimize_surface(sp: &SurfaceParams, grid: &SurfaceGrid) -> Result<SurfaceMinimum> {
    grid.validate(sp)?;
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut best = (0usize, 0usize, f64::INFINITY);
    for j in 0..grid.ny {
        let y = j as f64 * dy;
        for i in 0..grid.nx {
            let v = surface_value(VariationalPoint { x: i as f64 * dx, y }, sp);
            if v < best.2 {
                best = (i, j, v);
            }
        }
    }
    let (bi, bj, _) = best;
    let grid_point = VariationalPoint {
        x: bi as f64 * dx,
        y: bj as f64 * dy,
    };
    if bi == grid.nx - 1 || bj == grid.ny - 1 {
        return Err(Error::BoxTooSmall {
            x: grid_point.x,
            y: grid_point.y,
        });
    }

    let f = |x: f64, y: f64| surface_value(VariationalPoint { x, y }, sp);
    let (x_lo, x_hi) = ((grid_point.x - dx).max(0.0), grid_point.x + dx);
    let (y_lo, y_hi) = ((grid_point.y - dy).max(0.0), grid_point.y + dy);
    let (mut x, mut y) = (grid_point.x, grid_point.y);
    for _ in 0..8 {
        x = golden_section(|t| f(t, y), x_lo, x_hi, 60);
        y = golden_section(|t| f(x, t), y_lo, y_hi, 60);
    }

    for _ in 0..100 {
        let g = projected_gradient(x, y, sp);
        if g[0].hypot(g[1]) <= 1e-8 {
            break;
        }
        let (nx, ny) = newton_step(x, y, sp);
        let (fx0, f_new) = (f(x, y), f(nx, ny));
        if f_new <= fx0 {
            x = nx;
            y = ny;
            continue;
        }
        // backtracking gradient step
        let mut t = 1.0 / (1.0 + hessian(x, y, sp).iter().flatten().map(|h| h.abs()).sum::<f64>());
        let mut moved = false;
        while t > 1e-20 {
            let (cx, cy) = ((x - t * g[0]).max(0.0), (y - t * g[1]).max(0.0));
            if f(cx, cy) < fx0 {
                x = cx;
                y = cy;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if x >= grid.x_max || y >= grid.y_max {
        return Err(Error::BoxTooSmall { x, y });
    }
    let g = projected_gradient(x, y, sp);
    Ok(SurfaceMinimum {
        point: VariationalPoint { x, y },
        value: f(x, y),
        grid_point,
        gradient_norm: g[0].hypot(g[1]),
    })
}

/// Newton step on the free coordinates, clamped to the quadrant.
fn newton_step(x: f64, y: f64, sp: &SurfaceParams) -> (f64, f64) {
    let g = gradient(x, y, sp);
    let h = hessian(x, y, sp);
    let x_fixed = x <= 0.0 && g[0] > 0.0;
    let y_fixed = y <= 0.0 && g[1] > 0.0;
    match (x_fixed, y_fixed) {
        (true, true) => (x, y),
        (true, false) if h[1][1] > 0.0 => (x, (y - g[1] / h[1][1]).max(0.0)),
        (false, true) if h[0][0] > 0.0 => ((x - g[0] / h[0][0]).max(0.0), y),
        (false, false) => {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if h[0][0] > 0.0 && det > 0.0 {
                let sx = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
                let sy = (h[0][0] * g[1] - h[1][0] * g[0]) / det;
                ((x - sx).max(0.0), (y - sy).max(0.0))
            } else {
                (x, y)
            }
        }
        _ => (x, y),
    }
}

/// `−gap²/(2v̂(0)) + δn₀ − 2|λ|√(n n₀) − K(δ² + |δ||λ|^{1/3} + |λ|^{4/3} + η^{-1})`.
pub fn analytic_lower_bound(sp: &SurfaceParams, k: f64) -> f64 {
    sp.bound_center() - k * bound_shape(sp)
}

/// The bracket multiplying `K` in [`analytic_lower_bound`].
pub fn bound_shape(sp: &SurfaceParams) -> f64 {
    let (d, l) = (sp.delta.abs(), sp.lambda.abs());
    d * d + d * l.cbrt() + l.powf(4.0 / 3.0) + 1.0 / sp.eta
}

/// Region of the quadrant used in the three-case lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceCase {
    /// `x² ≥ 2(gap + d_v/η)/v̂(0)`.
    LargeExcited,
    /// `y ≤ √n₀ + |λ|^{1/3}`.
    SmallCondensate,
    /// Neither of the above.
    LargeCondensate,
}

impl SurfaceCase {
    pub fn index(self) -> u8 {
        match self {
            SurfaceCase::LargeExcited => 1,
            SurfaceCase::SmallCondensate => 2,
            SurfaceCase::LargeCondensate => 3,
        }
    }
}

pub fn classify(pt: VariationalPoint, sp: &SurfaceParams) -> SurfaceCase {
    if pt.x * pt.x >= 2.0 * sp.shift() / sp.vhat0 {
        SurfaceCase::LargeExcited
    } else if pt.y <= sp.n0.sqrt() + sp.lambda.abs().cbrt() {
        SurfaceCase::SmallCondensate
    } else {
        SurfaceCase::LargeCondensate
    }
}

/// The bracket multiplying `K` in the lower bound valid on one case region.
pub fn case_shape(case: SurfaceCase, sp: &SurfaceParams) -> f64 {
    let (d, l) = (sp.delta.abs(), sp.lambda.abs());
    match case {
        SurfaceCase::LargeExcited => d * d + l.powf(4.0 / 3.0),
        SurfaceCase::SmallCondensate => d * l.cbrt() + d * l.powf(2.0 / 3.0) + l.powf(4.0 / 3.0) + 1.0 / sp.eta,
        SurfaceCase::LargeCondensate => 1.0 / sp.eta + d * d + l.powf(4.0 / 3.0),
    }
}

/// The case-specific lower bound. The large-excited region needs no
/// `λ`-linear term.
pub fn case_lower_bound(case: SurfaceCase, sp: &SurfaceParams, k: f64) -> f64 {
    let center = match case {
        SurfaceCase::LargeExcited => sp.leading_value() + sp.delta * sp.n0,
        _ => sp.bound_center(),
    };
    center - k * case_shape(case, sp)
}

/// One-sided difference quotients `((Φ(t+h) − Φ(t))/h, (Φ(t) − Φ(t−h))/h)`
/// of a concave function, which enclose every supergradient at `t`.
pub fn griffith_bracket(mut potential: impl FnMut(f64) -> f64, at: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    let (fm, f0, fp) = (potential(at - step), potential(at), potential(at + step));
    let lower = (fp - f0) / step;
    let upper = (f0 - fm) / step;
    // rounding in the three evaluations can flip an exactly affine input
    let rounding = 4.0 * f64::EPSILON * (fm.abs() + 2.0 * f0.abs() + fp.abs()) / step;
    if lower > upper + 1e-12 + rounding {
        return Err(Error::ConcavityViolated { lower, upper });
    }
    Ok((lower, upper))
}
