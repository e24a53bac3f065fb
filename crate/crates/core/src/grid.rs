//! Periodic staggered grids.
//!
//! Two grid families share one Cartesian mesh:
//!
//! ```text
//!   R-grid: vertices (i, j)            and cell centers (i+½, j+½)
//!   J-grid: horizontal faces (i+½, j)  and vertical faces (i, j+½)
//! ```
//!
//! Each family is stored as two dense row-major planes of `nx × ny` values
//! (index `j * nx + i`). Plane index `(i, j)` always refers to the location
//! listed above, so e.g. `hface[(i, j)]` sits at `(x0 + (i+½)dx, y0 + j dy)`.
//! Index arithmetic wraps in both directions; there are no ghost cells.
//!
//! The four difference operators each connect exactly one plane pair:
//!
//! | operator    | vertex/hface                    | center/vface                      |
//! |-------------|---------------------------------|-----------------------------------|
//! | `dJx_at_R`  | `(h[i,j] − h[i−1,j]) / dx`      | `(v[i+1,j] − v[i,j]) / dx`        |
//! | `dJy_at_R`  | `(v[i,j] − v[i,j−1]) / dy`      | `(h[i,j+1] − h[i,j]) / dy`        |
//! | `dRx_at_J`  | `(vert[i+1,j] − vert[i,j]) / dx`| `(cent[i,j] − cent[i−1,j]) / dx`  |
//! | `dRy_at_J`  | `(cent[i,j] − cent[i,j−1]) / dy`| `(vert[i,j+1] − vert[i,j]) / dy`  |

use std::fmt;
use std::io::{self, BufRead, Write};

use crate::error::{invalid, Error, Result};

/// Uniform periodic mesh on `[x0, x0+lx) × [y0, y0+ly)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub lx: f64,
    pub ly: f64,
}

impl GridGeometry {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(invalid(format!("grid needs nx, ny >= 2 (got {nx} x {ny})")));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(invalid(format!("domain extents must be positive (got {lx} x {ly})")));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(invalid("domain origin must be finite"));
        }
        Ok(Self {
            nx,
            ny,
            x0,
            y0,
            lx,
            ly,
        })
    }

    /// Square `n × n` mesh.
    pub fn square(n: usize, x0: f64, y0: f64, side: f64) -> Result<Self> {
        Self::new(n, n, x0, y0, side, side)
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// `min(dx, dy)`, the mesh size entering the time-step and relaxation rules.
    pub fn h(&self) -> f64 {
        self.dx().min(self.dy())
    }

    /// Volume attributed to each R-grid (and J-grid) point: `½ dx dy`.
    pub fn point_volume(&self) -> f64 {
        0.5 * self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn coords(&self, plane: PlaneKind, i: usize, j: usize) -> (f64, f64) {
        let (ox, oy) = plane.offset();
        (
            self.x0 + (i as f64 + ox) * self.dx(),
            self.y0 + (j as f64 + oy) * self.dy(),
        )
    }
}

/// The four point families of the staggered mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneKind {
    Vertex,
    Center,
    HFace,
    VFace,
}

impl PlaneKind {
    /// Offset of plane index `(0, 0)` from the vertex `(0, 0)`, in cells.
    pub fn offset(self) -> (f64, f64) {
        match self {
            PlaneKind::Vertex => (0.0, 0.0),
            PlaneKind::Center => (0.5, 0.5),
            PlaneKind::HFace => (0.5, 0.0),
            PlaneKind::VFace => (0.0, 0.5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlaneKind::Vertex => "vertex",
            PlaneKind::Center => "center",
            PlaneKind::HFace => "hface",
            PlaneKind::VFace => "vface",
        }
    }
}

impl fmt::Display for PlaneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PlaneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(PlaneKind::Vertex),
            "center" => Ok(PlaneKind::Center),
            "hface" => Ok(PlaneKind::HFace),
            "vface" => Ok(PlaneKind::VFace),
            _ => Err(invalid(format!("unknown plane '{s}'"))),
        }
    }
}

/// One dense `nx × ny` plane of a staggered field.
pub(crate) type Plane = Vec<f64>;

#[inline]
pub(crate) fn idx(nx: usize, i: usize, j: usize) -> usize {
    j * nx + i
}

/// Values on the R-grid: vertices plus cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct RField {
    nx: usize,
    ny: usize,
    pub vertex: Plane,
    pub center: Plane,
}

/// Values on the J-grid: horizontal plus vertical face centers.
#[derive(Debug, Clone, PartialEq)]
pub struct JField {
    nx: usize,
    ny: usize,
    pub hface: Plane,
    pub vface: Plane,
}

macro_rules! field_common {
    ($ty:ident, $a:ident, $b:ident, $ka:expr, $kb:expr, $label:literal) => {
        impl $ty {
            pub fn zeros(nx: usize, ny: usize) -> Self {
                Self {
                    nx,
                    ny,
                    $a: vec![0.0; nx * ny],
                    $b: vec![0.0; nx * ny],
                }
            }

            /// Builds a field from two row-major planes.
            pub fn from_planes(nx: usize, ny: usize, $a: Vec<f64>, $b: Vec<f64>) -> Result<Self> {
                if $a.len() != nx * ny || $b.len() != nx * ny {
                    return Err(Error::ShapeMismatch(format!(
                        concat!($label, " planes of length {} / {} for {} x {} grid"),
                        $a.len(),
                        $b.len(),
                        nx,
                        ny
                    )));
                }
                Ok(Self { nx, ny, $a, $b })
            }

            pub fn nx(&self) -> usize {
                self.nx
            }

            pub fn ny(&self) -> usize {
                self.ny
            }

            pub fn fill(&mut self, v: f64) {
                self.$a.fill(v);
                self.$b.fill(v);
            }

            /// All values, first plane then second.
            pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
                self.$a.iter().chain(self.$b.iter()).copied()
            }

            pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
                self.$a.iter_mut().chain(self.$b.iter_mut())
            }

            pub fn plane(&self, kind: PlaneKind) -> Option<&[f64]> {
                if kind == $ka {
                    Some(&self.$a)
                } else if kind == $kb {
                    Some(&self.$b)
                } else {
                    None
                }
            }

            pub fn is_finite(&self) -> bool {
                self.iter().all(f64::is_finite)
            }

            pub fn max_abs(&self) -> f64 {
                self.iter().fold(0.0, |m, v| m.max(v.abs()))
            }

            pub fn check_geometry(&self, g: &GridGeometry) -> Result<()> {
                if self.nx != g.nx || self.ny != g.ny {
                    return Err(Error::ShapeMismatch(format!(
                        concat!($label, " is {} x {}, grid is {} x {}"),
                        self.nx, self.ny, g.nx, g.ny
                    )));
                }
                Ok(())
            }

            pub fn check_same_shape(&self, other: &Self) -> Result<()> {
                if self.nx != other.nx || self.ny != other.ny {
                    return Err(Error::ShapeMismatch(format!(
                        concat!($label, "s of shape {} x {} and {} x {}"),
                        self.nx, self.ny, other.nx, other.ny
                    )));
                }
                Ok(())
            }

            /// `self += w * (a + b)` pointwise.
            #[allow(dead_code)]
            pub(crate) fn axpy_pair(&mut self, w: f64, a: &Self, b: &Self) {
                for (s, (x, y)) in self.$a.iter_mut().zip(a.$a.iter().zip(&b.$a)) {
                    *s += w * (x + y);
                }
                for (s, (x, y)) in self.$b.iter_mut().zip(a.$b.iter().zip(&b.$b)) {
                    *s += w * (x + y);
                }
            }

            /// Applies `f` to every pair of corresponding entries.
            pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
                self.check_same_shape(other)?;
                let $a = self.$a.iter().zip(&other.$a).map(|(&x, &y)| f(x, y)).collect();
                let $b = self.$b.iter().zip(&other.$b).map(|(&x, &y)| f(x, y)).collect();
                Ok(Self {
                    nx: self.nx,
                    ny: self.ny,
                    $a,
                    $b,
                })
            }

            pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
                Self {
                    nx: self.nx,
                    ny: self.ny,
                    $a: self.$a.iter().map(|&x| f(x)).collect(),
                    $b: self.$b.iter().map(|&x| f(x)).collect(),
                }
            }

            /// Pairs each plane with its kind, for output.
            pub fn planes(&self) -> [(PlaneKind, &[f64]); 2] {
                [($ka, &self.$a[..]), ($kb, &self.$b[..])]
            }
        }
    };
}

field_common!(RField, vertex, center, PlaneKind::Vertex, PlaneKind::Center, "RField");
field_common!(JField, hface, vface, PlaneKind::HFace, PlaneKind::VFace, "JField");

impl RField {
    /// Sum over both planes (plain sum, no volume factor).
    pub fn sum(&self) -> f64 {
        self.vertex.iter().sum::<f64>() + self.center.iter().sum::<f64>()
    }
}

/// x-derivative of J-grid values at R-grid points.
#[allow(non_snake_case)]
pub fn dJx_at_R(j: &JField, g: &GridGeometry) -> Result<RField> {
    j.check_geometry(g)?;
    let mut out = RField::zeros(g.nx, g.ny);
    djx_into(j, g, 1.0, &mut out);
    Ok(out)
}

/// y-derivative of J-grid values at R-grid points.
#[allow(non_snake_case)]
pub fn dJy_at_R(j: &JField, g: &GridGeometry) -> Result<RField> {
    j.check_geometry(g)?;
    let mut out = RField::zeros(g.nx, g.ny);
    djy_into(j, g, 1.0, &mut out);
    Ok(out)
}

/// x-derivative of R-grid values at J-grid points.
#[allow(non_snake_case)]
pub fn dRx_at_J(r: &RField, g: &GridGeometry) -> Result<JField> {
    r.check_geometry(g)?;
    let mut out = JField::zeros(g.nx, g.ny);
    drx_into(r, g, 1.0, &mut out);
    Ok(out)
}

/// y-derivative of R-grid values at J-grid points.
#[allow(non_snake_case)]
pub fn dRy_at_J(r: &RField, g: &GridGeometry) -> Result<JField> {
    r.check_geometry(g)?;
    let mut out = JField::zeros(g.nx, g.ny);
    dry_into(r, g, 1.0, &mut out);
    Ok(out)
}

// The `*_into` kernels accumulate `out += scale * D(field)` without shape
// checks; callers have validated shapes.

pub(crate) fn djx_into(j: &JField, g: &GridGeometry, scale: f64, out: &mut RField) {
    let (nx, ny) = (g.nx, g.ny);
    let c = scale / g.dx();
    for row in 0..ny {
        let h = &j.hface[row * nx..(row + 1) * nx];
        let v = &j.vface[row * nx..(row + 1) * nx];
        let ov = &mut out.vertex[row * nx..(row + 1) * nx];
        ov[0] += c * (h[0] - h[nx - 1]);
        for i in 1..nx {
            ov[i] += c * (h[i] - h[i - 1]);
        }
        let oc = &mut out.center[row * nx..(row + 1) * nx];
        for i in 0..nx - 1 {
            oc[i] += c * (v[i + 1] - v[i]);
        }
        oc[nx - 1] += c * (v[0] - v[nx - 1]);
    }
}

pub(crate) fn djy_into(j: &JField, g: &GridGeometry, scale: f64, out: &mut RField) {
    let (nx, ny) = (g.nx, g.ny);
    let c = scale / g.dy();
    for row in 0..ny {
        let below = if row == 0 { ny - 1 } else { row - 1 };
        let above = if row + 1 == ny { 0 } else { row + 1 };
        let v = &j.vface[row * nx..(row + 1) * nx];
        let vb = &j.vface[below * nx..(below + 1) * nx];
        let h = &j.hface[row * nx..(row + 1) * nx];
        let ha = &j.hface[above * nx..(above + 1) * nx];
        let ov = &mut out.vertex[row * nx..(row + 1) * nx];
        for i in 0..nx {
            ov[i] += c * (v[i] - vb[i]);
        }
        let oc = &mut out.center[row * nx..(row + 1) * nx];
        for i in 0..nx {
            oc[i] += c * (ha[i] - h[i]);
        }
    }
}

pub(crate) fn drx_into(r: &RField, g: &GridGeometry, scale: f64, out: &mut JField) {
    let (nx, ny) = (g.nx, g.ny);
    let c = scale / g.dx();
    for row in 0..ny {
        let vert = &r.vertex[row * nx..(row + 1) * nx];
        let cent = &r.center[row * nx..(row + 1) * nx];
        let oh = &mut out.hface[row * nx..(row + 1) * nx];
        for i in 0..nx - 1 {
            oh[i] += c * (vert[i + 1] - vert[i]);
        }
        oh[nx - 1] += c * (vert[0] - vert[nx - 1]);
        let ov = &mut out.vface[row * nx..(row + 1) * nx];
        ov[0] += c * (cent[0] - cent[nx - 1]);
        for i in 1..nx {
            ov[i] += c * (cent[i] - cent[i - 1]);
        }
    }
}

pub(crate) fn dry_into(r: &RField, g: &GridGeometry, scale: f64, out: &mut JField) {
    let (nx, ny) = (g.nx, g.ny);
    let c = scale / g.dy();
    for row in 0..ny {
        let below = if row == 0 { ny - 1 } else { row - 1 };
        let above = if row + 1 == ny { 0 } else { row + 1 };
        let cent = &r.center[row * nx..(row + 1) * nx];
        let cb = &r.center[below * nx..(below + 1) * nx];
        let vert = &r.vertex[row * nx..(row + 1) * nx];
        let va = &r.vertex[above * nx..(above + 1) * nx];
        let oh = &mut out.hface[row * nx..(row + 1) * nx];
        for i in 0..nx {
            oh[i] += c * (cent[i] - cb[i]);
        }
        let ov = &mut out.vface[row * nx..(row + 1) * nx];
        for i in 0..nx {
            ov[i] += c * (va[i] - vert[i]);
        }
    }
}

/// `buf = ax ∂x j + ay ∂y j` along row `row` of the vertex or center plane.
pub(crate) fn div_j_row(
    j: &JField,
    g: &GridGeometry,
    ax: f64,
    ay: f64,
    plane: PlaneKind,
    row: usize,
    buf: &mut [f64],
) {
    let (nx, ny) = (g.nx, g.ny);
    let (cx, cy) = (ax / g.dx(), ay / g.dy());
    let rows = |r: usize| r * nx..(r + 1) * nx;
    match plane {
        PlaneKind::Vertex => {
            let below = if row == 0 { ny - 1 } else { row - 1 };
            let h = &j.hface[rows(row)];
            let v = &j.vface[rows(row)];
            let vb = &j.vface[rows(below)];
            buf[0] = cx * (h[0] - h[nx - 1]) + cy * (v[0] - vb[0]);
            for i in 1..nx {
                buf[i] = cx * (h[i] - h[i - 1]) + cy * (v[i] - vb[i]);
            }
        }
        PlaneKind::Center => {
            let above = if row + 1 == ny { 0 } else { row + 1 };
            let v = &j.vface[rows(row)];
            let h = &j.hface[rows(row)];
            let ha = &j.hface[rows(above)];
            for i in 0..nx - 1 {
                buf[i] = cx * (v[i + 1] - v[i]) + cy * (ha[i] - h[i]);
            }
            buf[nx - 1] = cx * (v[0] - v[nx - 1]) + cy * (ha[nx - 1] - h[nx - 1]);
        }
        _ => unreachable!("R rows are vertex or center rows"),
    }
}

/// `buf = ax ∂x r + ay ∂y r` along row `row` of the hface or vface plane.
pub(crate) fn grad_r_row(
    r: &RField,
    g: &GridGeometry,
    ax: f64,
    ay: f64,
    plane: PlaneKind,
    row: usize,
    buf: &mut [f64],
) {
    let (nx, ny) = (g.nx, g.ny);
    let (cx, cy) = (ax / g.dx(), ay / g.dy());
    let rows = |r: usize| r * nx..(r + 1) * nx;
    match plane {
        PlaneKind::HFace => {
            let below = if row == 0 { ny - 1 } else { row - 1 };
            let vert = &r.vertex[rows(row)];
            let cent = &r.center[rows(row)];
            let cb = &r.center[rows(below)];
            for i in 0..nx - 1 {
                buf[i] = cx * (vert[i + 1] - vert[i]) + cy * (cent[i] - cb[i]);
            }
            buf[nx - 1] = cx * (vert[0] - vert[nx - 1]) + cy * (cent[nx - 1] - cb[nx - 1]);
        }
        PlaneKind::VFace => {
            let above = if row + 1 == ny { 0 } else { row + 1 };
            let cent = &r.center[rows(row)];
            let vert = &r.vertex[rows(row)];
            let va = &r.vertex[rows(above)];
            buf[0] = cx * (cent[0] - cent[nx - 1]) + cy * (va[0] - vert[0]);
            for i in 1..nx {
                buf[i] = cx * (cent[i] - cent[i - 1]) + cy * (va[i] - vert[i]);
            }
        }
        _ => unreachable!("J rows are hface or vface rows"),
    }
}

fn sample_plane(g: &GridGeometry, kind: PlaneKind, f: &impl Fn(f64, f64) -> f64) -> Plane {
    let mut p = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (x, y) = g.coords(kind, i, j);
            p.push(f(x, y));
        }
    }
    p
}

/// Evaluates `f(x, y)` at every vertex and cell center.
pub fn sample_on_r(f: impl Fn(f64, f64) -> f64, g: &GridGeometry) -> RField {
    RField {
        nx: g.nx,
        ny: g.ny,
        vertex: sample_plane(g, PlaneKind::Vertex, &f),
        center: sample_plane(g, PlaneKind::Center, &f),
    }
}

/// Evaluates `f(x, y)` at every face center.
pub fn sample_on_j(f: impl Fn(f64, f64) -> f64, g: &GridGeometry) -> JField {
    JField {
        nx: g.nx,
        ny: g.ny,
        hface: sample_plane(g, PlaneKind::HFace, &f),
        vface: sample_plane(g, PlaneKind::VFace, &f),
    }
}

/// Writes one plane as CSV: a `# plane=...` header line, a column line,
/// then `i,j,x,y,value` rows in row-major order.
pub fn write_plane_csv<W: Write>(
    w: &mut W,
    g: &GridGeometry,
    kind: PlaneKind,
    values: &[f64],
) -> io::Result<()> {
    if values.len() != g.nx * g.ny {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("plane has {} values, grid has {}", values.len(), g.nx * g.ny),
        ));
    }
    writeln!(
        w,
        "# plane={} nx={} ny={} dx={:?} dy={:?}",
        kind,
        g.nx,
        g.ny,
        g.dx(),
        g.dy()
    )?;
    writeln!(w, "i,j,x,y,value")?;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (x, y) = g.coords(kind, i, j);
            writeln!(w, "{},{},{:?},{:?},{:?}", i, j, x, y, values[idx(g.nx, i, j)])?;
        }
    }
    Ok(())
}

/// A plane read back from [`write_plane_csv`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCsv {
    pub kind: PlaneKind,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub values: Vec<f64>,
}

pub fn read_plane_csv<R: BufRead>(r: R) -> Result<PlaneCsv> {
    let mut lines = r.lines();
    let bad = |m: &str| invalid(format!("plane csv: {m}"));
    let header = lines
        .next()
        .ok_or_else(|| bad("empty input"))?
        .map_err(|e| bad(&e.to_string()))?;
    let header = header.strip_prefix("# ").ok_or_else(|| bad("missing header"))?;
    let mut kind = None;
    let (mut nx, mut ny, mut dx, mut dy) = (None, None, None, None);
    for kv in header.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad("malformed header"))?;
        match k {
            "plane" => kind = Some(v.parse::<PlaneKind>()?),
            "nx" => nx = v.parse::<usize>().ok(),
            "ny" => ny = v.parse::<usize>().ok(),
            "dx" => dx = v.parse::<f64>().ok(),
            "dy" => dy = v.parse::<f64>().ok(),
            _ => {}
        }
    }
    let (kind, nx, ny, dx, dy) = match (kind, nx, ny, dx, dy) {
        (Some(k), Some(a), Some(b), Some(c), Some(d)) => (k, a, b, c, d),
        _ => return Err(bad("incomplete header")),
    };
    let mut values = vec![f64::NAN; nx * ny];
    let mut seen = 0usize;
    for line in lines {
        let line = line.map_err(|e| bad(&e.to_string()))?;
        if line.is_empty() || line.starts_with("i,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(bad("expected 5 columns"));
        }
        let i: usize = cols[0].parse().map_err(|_| bad("bad i"))?;
        let j: usize = cols[1].parse().map_err(|_| bad("bad j"))?;
        let v: f64 = cols[4].parse().map_err(|_| bad("bad value"))?;
        if i >= nx || j >= ny {
            return Err(bad("index out of range"));
        }
        values[idx(nx, i, j)] = v;
        seen += 1;
    }
    if seen != nx * ny {
        return Err(bad("row count does not match header"));
    }
    Ok(PlaneCsv {
        kind,
        nx,
        ny,
        dx,
        dy,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn geom(nx: usize, ny: usize) -> GridGeometry {
        GridGeometry::new(nx, ny, -0.3, 0.2, 1.7, 0.9).unwrap()
    }

    #[test]
    fn geometry_validation() {
        assert!(GridGeometry::new(1, 4, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(GridGeometry::new(4, 4, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(GridGeometry::new(4, 4, 0.0, 0.0, 1.0, -1.0).is_err());
        let g = GridGeometry::new(4, 8, 0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.dy(), 0.25);
        assert_eq!(g.point_volume(), 0.03125);
    }

    #[test]
    fn sampling_bookkeeping() {
        let g = GridGeometry::square(2, 0.0, 0.0, 1.0).unwrap();
        let ones = sample_on_r(|_, _| 1.0, &g);
        assert!(ones.iter().all(|v| v == 1.0));
        let xs = sample_on_r(|x, _| x, &g);
        assert_eq!(xs.vertex, vec![0.0, 0.5, 0.0, 0.5]);
        assert_eq!(xs.center, vec![0.25, 0.75, 0.25, 0.75]);
        let js = sample_on_j(|x, y| x + 10.0 * y, &g);
        assert_eq!(js.hface, vec![0.25, 0.75, 5.25, 5.75]);
        assert_eq!(js.vface, vec![2.5, 3.0, 7.5, 8.0]);
    }

    #[test]
    fn gauss_bump_peak() {
        let g = GridGeometry::square(8, -1.0, -1.0, 2.0).unwrap();
        let peak = 1.0 / (4.0 * PI * 1e-2);
        let f = sample_on_r(|x, y| peak * (-(x * x + y * y) / 4e-2).exp(), &g);
        // Vertex (4, 4) sits at the origin.
        assert_abs_diff_eq!(f.vertex[idx(8, 4, 4)], peak, epsilon = 1e-15);
        assert_abs_diff_eq!(peak, 7.957747154594767, epsilon = 1e-12);
    }

    #[test]
    fn constants_are_annihilated() {
        let g = geom(5, 7);
        let mut r = RField::zeros(5, 7);
        r.fill(3.25);
        let mut j = JField::zeros(5, 7);
        j.fill(-1.5);
        for f in [dJx_at_R(&j, &g).unwrap(), dJy_at_R(&j, &g).unwrap()] {
            assert!(f.iter().all(|v| v == 0.0));
        }
        for f in [dRx_at_J(&r, &g).unwrap(), dRy_at_J(&r, &g).unwrap()] {
            assert!(f.iter().all(|v| v == 0.0));
        }
    }

    // Linear ramps break periodicity at the seam; only stencils that do not
    // straddle it are checked.
    #[test]
    fn exact_on_linear_ramps_in_x() {
        let g = geom(8, 6);
        let dx = g.dx();
        let j = sample_on_j(|x, _| x, &g);
        let d = dJx_at_R(&j, &g).unwrap();
        for row in 0..6 {
            for i in 1..8 {
                assert_abs_diff_eq!(d.vertex[idx(8, i, row)], 1.0, epsilon = 1e-12);
            }
            for i in 0..7 {
                assert_abs_diff_eq!(d.center[idx(8, i, row)], 1.0, epsilon = 1e-12);
            }
        }
        let r = sample_on_r(|x, _| 2.0 * x + 1.0, &g);
        let d = dRx_at_J(&r, &g).unwrap();
        for row in 0..6 {
            for i in 0..7 {
                assert_abs_diff_eq!(d.hface[idx(8, i, row)], 2.0, epsilon = 1e-12);
            }
            for i in 1..8 {
                assert_abs_diff_eq!(d.vface[idx(8, i, row)], 2.0, epsilon = 1e-12);
            }
        }
        assert!(dx > 0.0);
    }

    #[test]
    fn exact_on_linear_ramps_in_y() {
        let g = geom(6, 8);
        let j = sample_on_j(|_, y| y, &g);
        let d = dJy_at_R(&j, &g).unwrap();
        for row in 1..8 {
            for i in 0..6 {
                assert_abs_diff_eq!(d.vertex[idx(6, i, row)], 1.0, epsilon = 1e-12);
            }
        }
        for row in 0..7 {
            for i in 0..6 {
                assert_abs_diff_eq!(d.center[idx(6, i, row)], 1.0, epsilon = 1e-12);
            }
        }
        let r = sample_on_r(|_, y| -y, &g);
        let d = dRy_at_J(&r, &g).unwrap();
        for row in 1..8 {
            for i in 0..6 {
                assert_abs_diff_eq!(d.hface[idx(6, i, row)], -1.0, epsilon = 1e-12);
            }
        }
        for row in 0..7 {
            for i in 0..6 {
                assert_abs_diff_eq!(d.vface[idx(6, i, row)], -1.0, epsilon = 1e-12);
            }
        }
    }

    /// Applying a half-grid difference to `sin(k x)` yields
    /// `(2/dx) sin(k dx / 2) cos(k x)` at the target points.
    fn symbol(k: f64, h: f64) -> f64 {
        2.0 / h * (0.5 * k * h).sin()
    }

    #[test]
    fn fourier_mode_in_x() {
        let g = geom(16, 5);
        for m in 1..8 {
            let k = 2.0 * PI * m as f64 / g.lx;
            let s = symbol(k, g.dx());
            let j = sample_on_j(|x, _| (k * x).sin(), &g);
            let d = dJx_at_R(&j, &g).unwrap();
            let want = sample_on_r(|x, _| s * (k * x).cos(), &g);
            for (a, b) in d.iter().zip(want.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * s.max(1.0));
            }
            let r = sample_on_r(|x, _| (k * x).sin(), &g);
            let d = dRx_at_J(&r, &g).unwrap();
            let want = sample_on_j(|x, _| s * (k * x).cos(), &g);
            for (a, b) in d.iter().zip(want.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * s.max(1.0));
            }
        }
    }

    #[test]
    fn fourier_mode_in_y() {
        let g = geom(5, 16);
        for m in 1..8 {
            let k = 2.0 * PI * m as f64 / g.ly;
            let s = symbol(k, g.dy());
            let j = sample_on_j(|_, y| (k * y).sin(), &g);
            let d = dJy_at_R(&j, &g).unwrap();
            let want = sample_on_r(|_, y| s * (k * y).cos(), &g);
            for (a, b) in d.iter().zip(want.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * s.max(1.0));
            }
            let r = sample_on_r(|_, y| (k * y).sin(), &g);
            let d = dRy_at_J(&r, &g).unwrap();
            let want = sample_on_j(|_, y| s * (k * y).cos(), &g);
            for (a, b) in d.iter().zip(want.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * s.max(1.0));
            }
        }
    }

    #[test]
    fn second_difference_symbol() {
        // dJx_at_R ∘ dRx_at_J multiplies a mode by -(4/h²) sin²(kh/2).
        let g = geom(32, 4);
        for m in 1..16 {
            let k = 2.0 * PI * m as f64 / g.lx;
            let lam = -4.0 / (g.dx() * g.dx()) * (0.5 * k * g.dx()).sin().powi(2);
            let r = sample_on_r(|x, _| (k * x).cos(), &g);
            let dd = dJx_at_R(&dRx_at_J(&r, &g).unwrap(), &g).unwrap();
            for (a, b) in dd.iter().zip(r.iter()) {
                assert_abs_diff_eq!(a, lam * b, epsilon = 1e-12 * lam.abs());
            }
        }
        let g = geom(4, 32);
        for m in 1..16 {
            let k = 2.0 * PI * m as f64 / g.ly;
            let lam = -4.0 / (g.dy() * g.dy()) * (0.5 * k * g.dy()).sin().powi(2);
            let r = sample_on_r(|_, y| (k * y).sin(), &g);
            let dd = dJy_at_R(&dRy_at_J(&r, &g).unwrap(), &g).unwrap();
            for (a, b) in dd.iter().zip(r.iter()) {
                assert_abs_diff_eq!(a, lam * b, epsilon = 1e-12 * lam.abs());
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = geom(4, 4);
        let j = JField::zeros(5, 4);
        assert!(matches!(dJx_at_R(&j, &g), Err(Error::ShapeMismatch(_))));
        let r = RField::zeros(4, 3);
        assert!(matches!(dRy_at_J(&r, &g), Err(Error::ShapeMismatch(_))));
        assert!(RField::from_planes(2, 2, vec![0.0; 4], vec![0.0; 3]).is_err());
    }

    fn dot(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
        a.zip(b).map(|(x, y)| x * y).sum()
    }

    proptest! {
        #[test]
        fn summation_by_parts(
            nx in 2usize..9, ny in 2usize..9,
            seed in proptest::collection::vec(-1.0f64..1.0, 4 * 81),
        ) {
            let g = GridGeometry::new(nx, ny, 0.0, 0.0, 1.3, 0.7).unwrap();
            let n = nx * ny;
            let r = RField::from_planes(nx, ny, seed[..n].to_vec(), seed[n..2 * n].to_vec()).unwrap();
            let j = JField::from_planes(nx, ny, seed[2 * n..3 * n].to_vec(), seed[3 * n..4 * n].to_vec()).unwrap();
            let vol = g.point_volume();
            let scale = 1.0 / g.h();
            let lx = dot(dJx_at_R(&j, &g).unwrap().iter(), r.iter()) * vol;
            let rx = -dot(j.iter(), dRx_at_J(&r, &g).unwrap().iter()) * vol;
            prop_assert!((lx - rx).abs() <= 1e-12 * scale * n as f64);
            let ly = dot(dJy_at_R(&j, &g).unwrap().iter(), r.iter()) * vol;
            let ry = -dot(j.iter(), dRy_at_J(&r, &g).unwrap().iter()) * vol;
            prop_assert!((ly - ry).abs() <= 1e-12 * scale * n as f64);
        }

        #[test]
        fn plane_csv_round_trips(
            nx in 2usize..6, ny in 2usize..6,
            vals in proptest::collection::vec(proptest::num::f64::NORMAL, 36),
        ) {
            let g = GridGeometry::new(nx, ny, -1.0, 0.5, 2.0, 3.0).unwrap();
            let values = vals[..nx * ny].to_vec();
            let mut buf = Vec::new();
            write_plane_csv(&mut buf, &g, PlaneKind::VFace, &values).unwrap();
            let back = read_plane_csv(&buf[..]).unwrap();
            prop_assert_eq!(back.kind, PlaneKind::VFace);
            prop_assert_eq!((back.nx, back.ny), (nx, ny));
            prop_assert_eq!(back.dx, g.dx());
            prop_assert_eq!(back.values, values);
        }
    }

    #[test]
    fn csv_header_format() {
        let g = GridGeometry::square(2, 0.0, 0.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_plane_csv(&mut buf, &g, PlaneKind::Center, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# plane=center nx=2 ny=2 dx=0.5 dy=0.5"));
        assert_eq!(lines.next(), Some("i,j,x,y,value"));
        assert_eq!(lines.next(), Some("0,0,0.25,0.25,1.0"));
        assert_eq!(lines.count(), 3);
    }
}
