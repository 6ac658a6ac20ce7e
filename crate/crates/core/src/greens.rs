//! Dirichlet Green's function with pole at the origin.
//!
//! `G(x,0) = −(1/2π) ln|x| + H(x,0)` where the regular part `H(·,0)` is the
//! harmonic function equal to `(1/2π) ln|x|` on `∂Ω`. On a disk everything
//! is closed form. On a rectangle `H` comes from a five-point Laplace solve,
//! diagonalised by a sine transform in `x` with a tridiagonal sweep in `y`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::SymTridiag;

/// Default number of grid cells across the rectangle's width.
pub const DEFAULT_RECT_CELLS: usize = 128;
const DISK_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk {
        radius: f64,
    },
    /// `[−a, a] × [−b, b]`, discretised with `cells` intervals along `x`
    /// and a matching count along `y`.
    Rectangle {
        half_width: f64,
        half_height: f64,
        cells: usize,
    },
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self::unit_disk()
    }
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        Self::Disk { radius: 1.0 }
    }

    pub fn disk(radius: f64) -> Result<Self> {
        let d = Self::Disk { radius };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(half_width: f64, half_height: f64) -> Result<Self> {
        let d = Self::Rectangle {
            half_width,
            half_height,
            cells: DEFAULT_RECT_CELLS,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Disk { radius } => {
                ensure_finite("radius", radius)?;
                if radius <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "disk radius must be positive, got {radius}"
                    )));
                }
            }
            Self::Rectangle {
                half_width,
                half_height,
                cells,
            } => {
                ensure_finite("half_width", half_width)?;
                ensure_finite("half_height", half_height)?;
                if half_width <= 0.0 || half_height <= 0.0 {
                    return Err(Error::InvalidInput(
                        "rectangle half-widths must be positive".into(),
                    ));
                }
                if cells < 4 || cells % 2 != 0 {
                    return Err(Error::InvalidInput(format!(
                        "rectangle grid needs an even cell count of at least 4, got {cells}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, Self::Disk { .. })
    }

    /// Radius of the largest centred disk inside the domain.
    pub fn inradius(&self) -> f64 {
        match *self {
            Self::Disk { radius } => radius,
            Self::Rectangle {
                half_width,
                half_height,
                ..
            } => half_width.min(half_height),
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        match *self {
            Self::Disk { radius } => x[0].hypot(x[1]) <= radius * (1.0 + 1e-14),
            Self::Rectangle {
                half_width,
                half_height,
                ..
            } => {
                x[0].abs() <= half_width * (1.0 + 1e-14)
                    && x[1].abs() <= half_height * (1.0 + 1e-14)
            }
        }
    }

    /// Grid shape `(nx, ny)` of the rectangle, both even so the origin is a
    /// grid node.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        match *self {
            Self::Disk { .. } => None,
            Self::Rectangle {
                half_width,
                half_height,
                cells,
            } => {
                let ny =
                    ((cells as f64 * half_height / half_width / 2.0).round() as usize).max(2) * 2;
                Some((cells, ny))
            }
        }
    }

    fn with_cells(&self, cells: usize) -> Self {
        match *self {
            Self::Rectangle {
                half_width,
                half_height,
                ..
            } => Self::Rectangle {
                half_width,
                half_height,
                cells,
            },
            ref d => d.clone(),
        }
    }
}

/// Nodal values of a grid function on `[−a,a]×[−b,b]`, row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicGrid {
    pub half_width: f64,
    pub half_height: f64,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
}

impl HarmonicGrid {
    /// Samples `f` at every node of an `nx × ny` grid.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        half_width: f64,
        half_height: f64,
        nx: usize,
        ny: usize,
        f: F,
    ) -> Self {
        let mut grid = HarmonicGrid {
            half_width,
            half_height,
            nx,
            ny,
            values: vec![0.0; (nx + 1) * (ny + 1)],
        };
        for j in 0..=ny {
            for i in 0..=nx {
                let [x, y] = grid.node(i, j);
                grid.values[j * (nx + 1) + i] = f(x, y);
            }
        }
        grid
    }

    /// Largest magnitude over the boundary nodes.
    pub fn boundary_sup(&self) -> f64 {
        boundary_nodes(self.nx, self.ny).fold(0.0_f64, |m, (i, j)| m.max(self.at(i, j).abs()))
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        2.0 * self.half_height / self.ny as f64
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            -self.half_width + i as f64 * self.hx(),
            -self.half_height + j as f64 * self.hy(),
        ]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bilinear interpolation; `None` outside the rectangle.
    pub fn interpolate(&self, x: [f64; 2]) -> Option<f64> {
        let fx = (x[0] + self.half_width) / self.hx();
        let fy = (x[1] + self.half_height) / self.hy();
        let eps = 1e-12;
        if fx < -eps || fy < -eps || fx > self.nx as f64 + eps || fy > self.ny as f64 + eps {
            return None;
        }
        let fx = fx.clamp(0.0, self.nx as f64);
        let fy = fy.clamp(0.0, self.ny as f64);
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        Some(
            (1.0 - tx) * (1.0 - ty) * self.at(i, j)
                + tx * (1.0 - ty) * self.at(i + 1, j)
                + (1.0 - tx) * ty * self.at(i, j + 1)
                + tx * ty * self.at(i + 1, j + 1),
        )
    }

    /// Largest `|u(x) − u(−x)|` over the grid.
    pub fn reflection_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                worst = worst.max((self.at(i, j) - self.at(self.nx - i, self.ny - j)).abs());
            }
        }
        worst
    }

    /// Largest five-point residual at interior nodes.
    pub fn stencil_residual(&self) -> f64 {
        let (hx2, hy2) = (self.hx().powi(2), self.hy().powi(2));
        let mut worst = 0.0_f64;
        for j in 1..self.ny {
            for i in 1..self.nx {
                let c = self.at(i, j);
                let r = (2.0 * c - self.at(i - 1, j) - self.at(i + 1, j)) / hx2
                    + (2.0 * c - self.at(i, j - 1) - self.at(i, j + 1)) / hy2;
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}

/// Five-point discrete harmonic function on the rectangle grid with
/// boundary values `g`.
pub fn solve_rectangle_dirichlet<G: Fn(f64, f64) -> f64>(
    half_width: f64,
    half_height: f64,
    nx: usize,
    ny: usize,
    g: G,
) -> Result<HarmonicGrid> {
    let mut grid = HarmonicGrid {
        half_width,
        half_height,
        nx,
        ny,
        values: vec![0.0; (nx + 1) * (ny + 1)],
    };
    let (hx, hy) = (grid.hx(), grid.hy());
    let stride = nx + 1;
    for j in 0..=ny {
        for i in 0..=nx {
            if i == 0 || j == 0 || i == nx || j == ny {
                let [x, y] = grid.node(i, j);
                let v = g(x, y);
                ensure_finite("boundary data", v)?;
                grid.values[j * stride + i] = v;
            }
        }
    }
    let (mx, my) = (nx - 1, ny - 1);
    let (ihx2, ihy2) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    // boundary contributions moved to the right-hand side, rows indexed by j
    let mut rhs = vec![0.0; mx * my];
    for j in 1..ny {
        for i in 1..nx {
            let mut f = 0.0;
            if i == 1 {
                f += grid.values[j * stride] * ihx2;
            }
            if i == nx - 1 {
                f += grid.values[j * stride + nx] * ihx2;
            }
            if j == 1 {
                f += grid.values[i] * ihy2;
            }
            if j == ny - 1 {
                f += grid.values[ny * stride + i] * ihy2;
            }
            rhs[(j - 1) * mx + (i - 1)] = f;
        }
    }
    let sines: Vec<f64> = (1..nx)
        .flat_map(|p| (1..nx).map(move |i| (PI * (p * i) as f64 / nx as f64).sin()))
        .collect();
    let mut spectral = vec![0.0; mx * my];
    for j in 0..my {
        let row = &rhs[j * mx..(j + 1) * mx];
        for p in 0..mx {
            let s = &sines[p * mx..(p + 1) * mx];
            spectral[p * my + j] = s.iter().zip(row).map(|(a, b)| a * b).sum();
        }
    }
    for p in 0..mx {
        let mu = (2.0 - 2.0 * (PI * (p + 1) as f64 / nx as f64).cos()) * ihx2;
        let t = SymTridiag::new(vec![mu + 2.0 * ihy2; my], vec![-ihy2; my.saturating_sub(1)]);
        let sol = t.factor()?.solve(&spectral[p * my..(p + 1) * my]);
        spectral[p * my..(p + 1) * my].copy_from_slice(&sol);
    }
    let scale = 2.0 / nx as f64;
    for j in 0..my {
        for i in 0..mx {
            let mut acc = 0.0;
            for p in 0..mx {
                acc += sines[p * mx + i] * spectral[p * my + j];
            }
            grid.values[(j + 1) * stride + i + 1] = scale * acc;
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone)]
enum Regular {
    /// `H(x,0) = (1/2π) ln R`.
    Disk {
        radius: f64,
    },
    Grid(Arc<HarmonicGrid>),
}

/// Green's function with pole at the origin and its regular part.
#[derive(Debug, Clone)]
pub struct GreenData {
    pub domain: DomainSpec,
    /// `H(0,0)`; Richardson-extrapolated on rectangles.
    pub h00: f64,
    /// Estimated error of `h00` (zero on disks).
    pub h00_error: f64,
    regular: Regular,
}

impl GreenData {
    pub fn new(domain: &DomainSpec) -> Result<Self> {
        domain.validate()?;
        match *domain {
            DomainSpec::Disk { radius } => Ok(Self {
                domain: domain.clone(),
                h00: radius.ln() / (2.0 * PI),
                h00_error: 0.0,
                regular: Regular::Disk { radius },
            }),
            DomainSpec::Rectangle {
                half_width,
                half_height,
                cells,
            } => {
                let coarse = regular_grid(&domain.with_cells(cells))?;
                let fine = regular_grid(&domain.with_cells(2 * cells))?;
                let hc = coarse.at(coarse.nx / 2, coarse.ny / 2);
                let hf = fine.at(fine.nx / 2, fine.ny / 2);
                let _ = (half_width, half_height);
                Ok(Self {
                    domain: domain.clone(),
                    h00: (4.0 * hf - hc) / 3.0,
                    h00_error: (hf - hc).abs() / 3.0,
                    regular: Regular::Grid(Arc::new(fine)),
                })
            }
        }
    }

    /// `H(x,0)`.
    pub fn regular_part(&self, x: [f64; 2]) -> Result<f64> {
        self.check_inside(x)?;
        match &self.regular {
            Regular::Disk { radius } => Ok(radius.ln() / (2.0 * PI)),
            Regular::Grid(g) => g
                .interpolate(x)
                .ok_or(Error::OutsideDomain { x: x[0], y: x[1] }),
        }
    }

    /// `G(x,0)`.
    pub fn green(&self, x: [f64; 2]) -> Result<f64> {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return Err(Error::AtPole);
        }
        Ok(-r.ln() / (2.0 * PI) + self.regular_part(x)?)
    }

    pub fn grid(&self) -> Option<&HarmonicGrid> {
        match &self.regular {
            Regular::Grid(g) => Some(g),
            Regular::Disk { .. } => None,
        }
    }

    fn check_inside(&self, x: [f64; 2]) -> Result<()> {
        ensure_finite("x", x[0])?;
        ensure_finite("y", x[1])?;
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain { x: x[0], y: x[1] });
        }
        Ok(())
    }

    /// CSV `r,G,H` sampled along the positive `x` axis.
    pub fn profile_csv(&self, radii: &[f64]) -> Result<String> {
        let mut out = String::from("r,G,H\n");
        for &r in radii {
            let x = [r, 0.0];
            let _ = writeln!(out, "{r},{},{}", self.green(x)?, self.regular_part(x)?);
        }
        Ok(out)
    }
}

fn regular_grid(domain: &DomainSpec) -> Result<HarmonicGrid> {
    let DomainSpec::Rectangle {
        half_width,
        half_height,
        ..
    } = *domain
    else {
        return Err(Error::UnsupportedDomain(
            "grid solve needs a rectangle".into(),
        ));
    };
    let (nx, ny) = domain.grid_shape().expect("rectangle");
    solve_rectangle_dirichlet(half_width, half_height, nx, ny, |x, y| {
        x.hypot(y).ln() / (2.0 * PI)
    })
}

/// `G(x,0)` for a single point. Builds the Green's data on every call; keep
/// a [`GreenData`] around for repeated evaluation.
pub fn green_origin(domain: &DomainSpec, x: [f64; 2]) -> Result<f64> {
    GreenData::new(domain)?.green(x)
}

/// Robin value `H(0,0)`.
pub fn robin_at_origin(domain: &DomainSpec) -> Result<f64> {
    Ok(GreenData::new(domain)?.h00)
}

/// Harmonic function with prescribed boundary values.
#[derive(Debug, Clone)]
pub enum HarmonicExtension {
    /// Truncated Fourier series `Σ (r/R)^{|m|} ĝ_m e^{imθ}`.
    Disk {
        radius: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Grid(HarmonicGrid),
}

impl HarmonicExtension {
    pub fn eval(&self, x: [f64; 2]) -> Option<f64> {
        match self {
            Self::Disk { radius, cos, sin } => {
                let r = x[0].hypot(x[1]);
                if r > radius * (1.0 + 1e-12) {
                    return None;
                }
                let th = x[1].atan2(x[0]);
                let rho = r / radius;
                let mut acc = cos[0];
                let mut pow = 1.0;
                for m in 1..cos.len() {
                    pow *= rho;
                    let a = m as f64 * th;
                    acc += pow * (cos[m] * a.cos() + sin[m] * a.sin());
                }
                Some(acc)
            }
            Self::Grid(g) => g.interpolate(x),
        }
    }
}

/// Harmonic extension of boundary data given as a function of the boundary
/// point. The data must be even under `x ↦ −x`.
pub fn harmonic_extension<G: Fn(f64, f64) -> f64>(
    domain: &DomainSpec,
    g: G,
) -> Result<HarmonicExtension> {
    domain.validate()?;
    match *domain {
        DomainSpec::Disk { radius } => {
            let n = DISK_SAMPLES;
            let samples: Vec<f64> = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    g(radius * th.cos(), radius * th.sin())
                })
                .collect();
            check_even(&samples, |i| (i + n / 2) % n)?;
            let modes = n / 2;
            let mut cos = vec![0.0; modes];
            let mut sin = vec![0.0; modes];
            for m in 0..modes {
                let (mut c, mut s) = (0.0, 0.0);
                for (i, v) in samples.iter().enumerate() {
                    let a = 2.0 * PI * (m * i) as f64 / n as f64;
                    c += v * a.cos();
                    s += v * a.sin();
                }
                let scale = if m == 0 { 1.0 } else { 2.0 } / n as f64;
                cos[m] = c * scale;
                sin[m] = s * scale;
            }
            Ok(HarmonicExtension::Disk { radius, cos, sin })
        }
        DomainSpec::Rectangle {
            half_width,
            half_height,
            ..
        } => {
            let (nx, ny) = domain.grid_shape().expect("rectangle");
            let grid = solve_rectangle_dirichlet(half_width, half_height, nx, ny, &g)?;
            let boundary: Vec<f64> = boundary_nodes(nx, ny).map(|(i, j)| grid.at(i, j)).collect();
            let mirrored: Vec<f64> = boundary_nodes(nx, ny)
                .map(|(i, j)| grid.at(nx - i, ny - j))
                .collect();
            check_even_pairs(&boundary, &mirrored)?;
            Ok(HarmonicExtension::Grid(grid))
        }
    }
}

fn boundary_nodes(nx: usize, ny: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=ny).flat_map(move |j| {
        (0..=nx).filter_map(move |i| (i == 0 || j == 0 || i == nx || j == ny).then_some((i, j)))
    })
}

fn check_even<F: Fn(usize) -> usize>(samples: &[f64], mirror: F) -> Result<()> {
    let mirrored: Vec<f64> = (0..samples.len()).map(|i| samples[mirror(i)]).collect();
    check_even_pairs(samples, &mirrored)
}

fn check_even_pairs(a: &[f64], b: &[f64]) -> Result<()> {
    let scale = a.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let worst = a
        .iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    if worst > 1e-9 * scale {
        return Err(Error::InvalidInput(format!(
            "boundary data is not even under x -> -x (defect {worst:.3e})"
        )));
    }
    Ok(())
}
