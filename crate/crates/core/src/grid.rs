//! Grid-discretized domains and fields living on their interior cells.
//!
//! A [`GridDomain`] is a uniform Cartesian grid in two or three dimensions
//! together with a mask of interior cells. A cell is interior when its
//! center lies strictly inside the shape; all other cells (including one
//! padding layer around the bounding box) carry homogeneous Dirichlet data.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Sentinel for "no interior cell here".
pub const EXTERIOR: u32 = u32::MAX;

/// Minimum number of cells across the smallest feature of a built-in shape.
pub const MIN_CELLS_ACROSS: f64 = 8.0;

/// Volume of the unit ball in `n` dimensions, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // Γ(n/2 + 1) by the recurrence from Γ(1) = 1 or Γ(1/2) = √π.
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 + 1.0 - 1e-12 {
        gamma *= x;
        x += 1.0;
    }
    PI.powf(n as f64 / 2.0) / gamma
}

/// Built-in shapes and mask files accepted by [`make_domain`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { radius: f64 },
    Ball { radius: f64 },
    Square { side: f64 },
    Cube { side: f64 },
    Annulus { inner: f64, outer: f64 },
    LShape { side: f64 },
    MaskFile(PathBuf),
}

impl Shape {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Shape::Disk { .. } | Shape::Square { .. } | Shape::Annulus { .. } | Shape::LShape { .. } => {
                Some(2)
            }
            Shape::Ball { .. } | Shape::Cube { .. } => Some(3),
            Shape::MaskFile(_) => None,
        }
    }

    /// Exact Lebesgue measure of the continuum shape.
    pub fn exact_measure(&self) -> Option<f64> {
        match *self {
            Shape::Disk { radius } => Some(PI * radius * radius),
            Shape::Ball { radius } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            Shape::Square { side } => Some(side * side),
            Shape::Cube { side } => Some(side.powi(3)),
            Shape::Annulus { inner, outer } => Some(PI * (outer * outer - inner * inner)),
            Shape::LShape { side } => Some(0.75 * side * side),
            Shape::MaskFile(_) => None,
        }
    }

    fn smallest_feature(&self) -> Option<f64> {
        match *self {
            Shape::Disk { radius } | Shape::Ball { radius } => Some(2.0 * radius),
            Shape::Square { side } | Shape::Cube { side } => Some(side),
            Shape::Annulus { inner, outer } => Some(outer - inner),
            Shape::LShape { side } => Some(0.5 * side),
            Shape::MaskFile(_) => None,
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// Parses `disk:1.0`, `ball:1`, `square:1`, `cube:1`, `annulus:0.5,1`,
    /// `l_shape:1` and `mask:path/to/file`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidShape(s.to_string());
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let name = name.trim().to_ascii_lowercase();
        if name == "mask" || name == "mask_file" {
            return Ok(Shape::MaskFile(PathBuf::from(args.trim())));
        }
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        if nums.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(bad());
        }
        let shape = match (name.as_str(), nums.as_slice()) {
            ("disk", [r]) => Shape::Disk { radius: *r },
            ("ball", [r]) => Shape::Ball { radius: *r },
            ("square", [l]) => Shape::Square { side: *l },
            ("cube", [l]) => Shape::Cube { side: *l },
            ("annulus", [a, b]) if a < b => Shape::Annulus { inner: *a, outer: *b },
            ("l_shape" | "lshape", [l]) => Shape::LShape { side: *l },
            _ => return Err(bad()),
        };
        Ok(shape)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Disk { radius } => write!(f, "disk:{radius}"),
            Shape::Ball { radius } => write!(f, "ball:{radius}"),
            Shape::Square { side } => write!(f, "square:{side}"),
            Shape::Cube { side } => write!(f, "cube:{side}"),
            Shape::Annulus { inner, outer } => write!(f, "annulus:{inner},{outer}"),
            Shape::LShape { side } => write!(f, "l_shape:{side}"),
            Shape::MaskFile(p) => write!(f, "mask:{}", p.display()),
        }
    }
}

/// Uniform Cartesian grid with an interior-cell mask.
#[derive(Debug, Clone)]
pub struct GridDomain {
    dim: usize,
    spacing: f64,
    extent: [usize; 3],
    origin: [f64; 3],
    mask: Vec<bool>,
    cells: Vec<usize>,
    lookup: Vec<u32>,
    neighbors: Vec<u32>,
    exterior_faces: Vec<u8>,
}

impl PartialEq for GridDomain {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.spacing == other.spacing
            && self.extent == other.extent
            && self.origin == other.origin
            && self.mask == other.mask
    }
}

impl GridDomain {
    /// Builds a domain from an explicit mask in x-fastest order.
    ///
    /// `origin` is the physical position of the center of cell `(0, 0, 0)`.
    pub fn from_mask(
        dim: usize,
        spacing: f64,
        extent: [usize; 3],
        origin: [f64; 3],
        mask: Vec<bool>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("dimension {dim} not supported")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidArgument(format!("grid spacing {spacing} must be positive")));
        }
        let extent = if dim == 2 { [extent[0], extent[1], 1] } else { extent };
        let total = extent[0] * extent[1] * extent[2];
        if mask.len() != total {
            return Err(Error::InvalidArgument(format!(
                "mask has {} cells, extent implies {total}",
                mask.len()
            )));
        }
        let (nx, ny, nz) = (extent[0], extent[1], extent[2]);
        for (lin, &inside) in mask.iter().enumerate() {
            if !inside {
                continue;
            }
            let (i, j, k) = (lin % nx, (lin / nx) % ny, lin / (nx * ny));
            let on_edge = i == 0
                || i + 1 == nx
                || j == 0
                || j + 1 == ny
                || (dim == 3 && (k == 0 || k + 1 == nz));
            if on_edge {
                return Err(Error::DegenerateDomain(
                    "interior cell touches the bounding box; at least one exterior layer is required".into(),
                ));
            }
        }

        let cells: Vec<usize> = (0..total).filter(|&l| mask[l]).collect();
        if cells.is_empty() {
            return Err(Error::DegenerateDomain("no interior cells (resolution too coarse?)".into()));
        }
        let mut lookup = vec![EXTERIOR; total];
        for (idx, &lin) in cells.iter().enumerate() {
            lookup[lin] = idx as u32;
        }

        let stride = 2 * dim;
        let mut neighbors = Vec::with_capacity(cells.len() * stride);
        let steps = [1usize, nx, nx * ny];
        for &lin in &cells {
            for step in steps.iter().take(dim) {
                neighbors.push(lookup[lin - step]);
                neighbors.push(lookup[lin + step]);
            }
        }

        let exterior_faces = neighbors
            .chunks(stride)
            .map(|nb| nb.iter().filter(|&&n| n == EXTERIOR).count() as u8)
            .collect();
        let domain = GridDomain { dim, spacing, extent, origin, mask, cells, lookup, neighbors, exterior_faces };
        let components = domain.count_components();
        if components != 1 {
            return Err(Error::DisconnectedDomain { components });
        }
        Ok(domain)
    }

    fn count_components(&self) -> usize {
        let n = self.cells.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(c) = queue.pop_front() {
                for &nb in self.neighbors(c) {
                    if nb != EXTERIOR && !seen[nb as usize] {
                        seen[nb as usize] = true;
                        queue.push_back(nb as usize);
                    }
                }
            }
        }
        components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn extent(&self) -> [usize; 3] {
        self.extent
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Number of interior cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `|D|`: interior cell count times cell volume.
    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.cell_volume()
    }

    /// Radius of the ball with the same measure, `(|D|/ω_n)^{1/n}`.
    pub fn equivalent_ball_radius(&self) -> f64 {
        (self.measure() / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Linear grid index (x fastest) of an interior cell.
    pub fn linear_index(&self, cell: usize) -> usize {
        self.cells[cell]
    }

    /// Interior index at a linear grid index, if interior.
    pub fn interior_at_linear(&self, lin: usize) -> Option<usize> {
        match self.lookup.get(lin) {
            Some(&v) if v != EXTERIOR => Some(v as usize),
            _ => None,
        }
    }

    pub fn interior_at(&self, ijk: [usize; 3]) -> Option<usize> {
        let [nx, ny, nz] = self.extent;
        if ijk[0] >= nx || ijk[1] >= ny || ijk[2] >= nz {
            return None;
        }
        self.interior_at_linear(ijk[0] + nx * (ijk[1] + ny * ijk[2]))
    }

    pub fn grid_coords(&self, cell: usize) -> [usize; 3] {
        let lin = self.cells[cell];
        let [nx, ny, _] = self.extent;
        [lin % nx, (lin / nx) % ny, lin / (nx * ny)]
    }

    /// Physical coordinates of the center of an interior cell (z = 0 in 2D).
    pub fn center(&self, cell: usize) -> [f64; 3] {
        let ijk = self.grid_coords(cell);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + ijk[a] as f64 * self.spacing;
        }
        x
    }

    /// Face neighbors of an interior cell in the order `-x, +x, -y, +y[, -z, +z]`;
    /// [`EXTERIOR`] marks a Dirichlet neighbor.
    #[inline]
    pub fn neighbors(&self, cell: usize) -> &[u32] {
        let s = 2 * self.dim;
        &self.neighbors[cell * s..(cell + 1) * s]
    }

    /// Number of face neighbors of `cell` outside the domain.
    #[inline]
    pub fn exterior_faces(&self, cell: usize) -> usize {
        self.exterior_faces[cell] as usize
    }

    pub fn touches_boundary(&self, cell: usize) -> bool {
        self.exterior_faces[cell] > 0
    }

    /// Interior cell whose center is closest to the centroid of the interior
    /// (ties to the lowest index).
    pub fn centermost_cell(&self) -> usize {
        let c = self.centroid();
        let mut best = (f64::INFINITY, 0);
        for cell in 0..self.len() {
            let x = self.center(cell);
            let d2: f64 = (0..self.dim).map(|a| (x[a] - c[a]).powi(2)).sum();
            if d2 < best.0 - 1e-12 * self.spacing * self.spacing {
                best = (d2, cell);
            }
        }
        best.1
    }

    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for cell in 0..self.len() {
            let x = self.center(cell);
            for a in 0..self.dim {
                c[a] += x[a];
            }
        }
        let n = self.len() as f64;
        c.map(|v| v / n)
    }

    /// Same mask shifted by whole cells inside a larger bounding box.
    pub fn translated(&self, shift: [usize; 3]) -> Result<Self> {
        let [nx, ny, nz] = self.extent;
        let shift = if self.dim == 2 { [shift[0], shift[1], 0] } else { shift };
        let ext = [nx + shift[0], ny + shift[1], nz + shift[2]];
        let mut mask = vec![false; ext[0] * ext[1] * ext[2]];
        for &lin in &self.cells {
            let (i, j, k) = (lin % nx, (lin / nx) % ny, lin / (nx * ny));
            let (i, j, k) = (i + shift[0], j + shift[1], k + shift[2]);
            mask[i + ext[0] * (j + ext[1] * k)] = true;
        }
        let mut origin = self.origin;
        for a in 0..self.dim {
            origin[a] -= shift[a] as f64 * self.spacing;
        }
        GridDomain::from_mask(self.dim, self.spacing, ext, origin, mask)
    }

    /// Serializes the mask in the plain-text format read by [`read_mask_file`].
    pub fn to_mask_text(&self) -> String {
        let [nx, ny, nz] = self.extent;
        let mut out = if self.dim == 2 {
            format!("2 {} {} {}\n", self.spacing, nx, ny)
        } else {
            format!("3 {} {} {} {}\n", self.spacing, nx, ny, nz)
        };
        for k in 0..nz {
            if k > 0 {
                out.push('\n');
            }
            for j in 0..ny {
                for i in 0..nx {
                    out.push(if self.mask[i + nx * (j + ny * k)] { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Parses the mask-file format: a header `dim h nx ny [nz]`, then rows of
/// `0`/`1` characters, row `j = 0` first, x along each row, z-slabs in order.
/// Whitespace between digits and blank lines are ignored. One exterior layer
/// is added around the file's box.
pub fn parse_mask_text(text: &str, path: &Path) -> Result<GridDomain> {
    let fail = |reason: String| Error::MaskFormat { path: path.to_path_buf(), reason };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or_else(|| fail("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let dim: usize = fields.first().and_then(|s| s.parse().ok()).ok_or_else(|| fail("bad dim".into()))?;
    if !(dim == 2 || dim == 3) || fields.len() != dim + 2 {
        return Err(fail(format!("header `{header}` must be `dim h nx ny [nz]`")));
    }
    let h: f64 = fields[1].parse().map_err(|_| fail("bad spacing".into()))?;
    let mut n = [1usize; 3];
    for a in 0..dim {
        n[a] = fields[2 + a].parse().map_err(|_| fail("bad extent".into()))?;
    }
    let digits: Vec<bool> = lines
        .flat_map(|l| l.chars().filter(|c| !c.is_whitespace()))
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(fail(format!("unexpected character `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if digits.len() != n[0] * n[1] * n[2] {
        return Err(fail(format!("expected {} mask entries, found {}", n[0] * n[1] * n[2], digits.len())));
    }
    let pad = |a: usize| if a < dim { 1 } else { 0 };
    let ext = [n[0] + 2 * pad(0), n[1] + 2 * pad(1), n[2] + 2 * pad(2)];
    let mut mask = vec![false; ext[0] * ext[1] * ext[2]];
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                if digits[i + n[0] * (j + n[1] * k)] {
                    let (pi, pj, pk) = (i + pad(0), j + pad(1), k + pad(2));
                    mask[pi + ext[0] * (pj + ext[1] * pk)] = true;
                }
            }
        }
    }
    // File cell (0,0,0) has its center at (h/2, h/2, h/2).
    let mut origin = [0.0; 3];
    for o in origin.iter_mut().take(dim) {
        *o = 0.5 * h - h;
    }
    GridDomain::from_mask(dim, h, ext, origin, mask)
}

pub fn read_mask_file(path: &Path) -> Result<GridDomain> {
    let text = std::fs::read_to_string(path)?;
    parse_mask_text(&text, path)
}

/// Discretizes a shape with grid spacing `h`.
///
/// Disks, balls and annuli are centered on a cell center; squares, cubes and
/// the L-shape occupy `[0, L]^n` with cell faces on the box faces.
pub fn make_domain(shape: &Shape, h: f64) -> Result<Arc<GridDomain>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("grid spacing {h} must be positive")));
    }
    if let Shape::MaskFile(path) = shape {
        return read_mask_file(path).map(Arc::new);
    }
    let feature = shape.smallest_feature().expect("built-in shape");
    if feature / h < MIN_CELLS_ACROSS - 1e-9 {
        return Err(Error::DegenerateDomain(format!(
            "{shape} at h = {h} has {:.1} cells across its smallest feature (need {MIN_CELLS_ACROSS})",
            feature / h
        )));
    }
    let dim = shape.dim().expect("built-in shape");
    let centered = |radius: f64| {
        let m = (radius / h).ceil() as usize + 1;
        (2 * m + 1, -(m as f64) * h)
    };
    let aligned = |side: f64| {
        let n = (side / h - 1e-9).ceil() as usize;
        (n + 2, -0.5 * h)
    };
    let (n_axis, lo) = match *shape {
        Shape::Disk { radius } | Shape::Ball { radius } => centered(radius),
        Shape::Annulus { outer, .. } => centered(outer),
        Shape::Square { side } | Shape::Cube { side } | Shape::LShape { side } => aligned(side),
        Shape::MaskFile(_) => unreachable!(),
    };
    let inside = |x: [f64; 3]| -> bool {
        match *shape {
            Shape::Disk { radius } => x[0] * x[0] + x[1] * x[1] < radius * radius,
            Shape::Ball { radius } => x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < radius * radius,
            Shape::Annulus { inner, outer } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                r2 > inner * inner && r2 < outer * outer
            }
            Shape::Square { side } => (0..2).all(|a| x[a] > 0.0 && x[a] < side),
            Shape::Cube { side } => (0..3).all(|a| x[a] > 0.0 && x[a] < side),
            Shape::LShape { side } => {
                (0..2).all(|a| x[a] > 0.0 && x[a] < side) && !(x[0] > 0.5 * side && x[1] > 0.5 * side)
            }
            Shape::MaskFile(_) => unreachable!(),
        }
    };
    let extent = if dim == 2 { [n_axis, n_axis, 1] } else { [n_axis; 3] };
    let origin = if dim == 2 { [lo, lo, 0.0] } else { [lo; 3] };
    let mut mask = Vec::with_capacity(extent[0] * extent[1] * extent[2]);
    for k in 0..extent[2] {
        for j in 0..extent[1] {
            for i in 0..extent[0] {
                let x = [
                    origin[0] + i as f64 * h,
                    origin[1] + j as f64 * h,
                    if dim == 3 { origin[2] + k as f64 * h } else { 0.0 },
                ];
                mask.push(inside(x));
            }
        }
    }
    GridDomain::from_mask(dim, h, extent, origin, mask).map(Arc::new)
}

/// Rank-based ball grid: the `cells` lattice cells closest to a lattice
/// center (ties by linear index), with the same dimension and spacing.
pub fn rank_ball(dim: usize, spacing: f64, cells: usize) -> Result<Arc<GridDomain>> {
    if cells == 0 {
        return Err(Error::DegenerateDomain("rank ball with zero cells".into()));
    }
    let radius_cells = (cells as f64 / unit_ball_volume(dim)).powf(1.0 / dim as f64);
    let m = radius_cells.ceil() as usize + 2;
    let n_axis = 2 * m + 1;
    let extent = if dim == 2 { [n_axis, n_axis, 1] } else { [n_axis; 3] };
    let total = extent[0] * extent[1] * extent[2];
    let mut order: Vec<(i64, usize)> = (0..total)
        .map(|lin| {
            let i = (lin % n_axis) as i64 - m as i64;
            let j = ((lin / n_axis) % n_axis) as i64 - m as i64;
            let k = if dim == 3 { (lin / (n_axis * n_axis)) as i64 - m as i64 } else { 0 };
            (i * i + j * j + k * k, lin)
        })
        .collect();
    order.sort_unstable();
    let mut mask = vec![false; total];
    for &(_, lin) in order.iter().take(cells) {
        mask[lin] = true;
    }
    let lo = -(m as f64) * spacing;
    let origin = if dim == 2 { [lo, lo, 0.0] } else { [lo; 3] };
    GridDomain::from_mask(dim, spacing, extent, origin, mask).map(Arc::new)
}

/// Real values on the interior cells of a [`GridDomain`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DomainMismatch);
        }
        Ok(ScalarField { domain, values })
    }

    pub fn zeros(domain: &Arc<GridDomain>) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn constant(domain: &Arc<GridDomain>, value: f64) -> Self {
        ScalarField { values: vec![value; domain.len()], domain: Arc::clone(domain) }
    }

    /// Samples `f` at every interior cell center.
    pub fn from_fn(domain: &Arc<GridDomain>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..domain.len()).map(|c| f(domain.center(c))).collect();
        ScalarField { values, domain: Arc::clone(domain) }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_on(&self, domain: &GridDomain) -> bool {
        std::ptr::eq(self.domain.as_ref(), domain) || *self.domain == *domain
    }

    pub fn check_domain(&self, domain: &GridDomain) -> Result<()> {
        if self.is_on(domain) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { values: self.values.iter().map(|&v| f(v)).collect(), domain: Arc::clone(&self.domain) }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `max(f, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// `max(-f, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.domain.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.domain.cell_volume()).sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ f h^n` (signed).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.domain.cell_volume()
    }

    /// Largest value and its cell (ties to the lowest index).
    pub fn max_with_cell(&self) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Smallest value and its cell (ties to the lowest index).
    pub fn min_with_cell(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, &v) in self.values.iter().enumerate() {
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.max_with_cell().0
    }

    pub fn min(&self) -> f64 {
        self.min_with_cell().0
    }

    pub fn argmax(&self) -> usize {
        self.max_with_cell().1
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Shape statistics of a 2D cell set, used to recognize quasi-disks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellSetShape {
    pub area: f64,
    pub centroid: [f64; 2],
    /// `A² / (2π J)` with `J` the polar moment about the centroid; equals 1
    /// for a disk and is smaller for every other set of the same area.
    pub circularity: f64,
    /// Ratio of the smallest distance from the centroid to a cell just
    /// outside the set and the largest distance to a cell inside it (or its
    /// reciprocal, whichever is at most 1).
    pub roundness: f64,
}

/// Moment-based circularity of a set of interior cells of a 2D domain.
///
/// Each cell contributes its exact square polar moment, so a fine pixelated
/// disk scores close to 1 regardless of its staircase perimeter.
pub fn cell_set_shape(domain: &GridDomain, cells: &[usize]) -> CellSetShape {
    let h = domain.spacing();
    let a_cell = h * h;
    let area = cells.len() as f64 * a_cell;
    let mut c = [0.0; 2];
    for &cell in cells {
        let x = domain.center(cell);
        c[0] += x[0];
        c[1] += x[1];
    }
    let n = cells.len().max(1) as f64;
    c = [c[0] / n, c[1] / n];
    let mut polar = 0.0;
    for &cell in cells {
        let x = domain.center(cell);
        polar += ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) * a_cell + a_cell * a_cell / 6.0;
    }
    let circularity = if polar > 0.0 { area * area / (2.0 * PI * polar) } else { 0.0 };

    let mut member = vec![false; domain.len()];
    for &cell in cells {
        member[cell] = true;
    }
    let dist = |x: [f64; 3]| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
    let (mut r_in, mut r_out) = (f64::INFINITY, 0.0f64);
    for &cell in cells {
        let x = domain.center(cell);
        r_out = r_out.max(dist(x));
        let nbrs = domain.neighbors(cell);
        for (slot, &nb) in nbrs.iter().enumerate() {
            if nb != EXTERIOR && member[nb as usize] {
                continue;
            }
            let mut y = x;
            y[slot / 2] += if slot % 2 == 0 { -h } else { h };
            r_in = r_in.min(dist(y));
        }
    }
    let roundness = if r_in.is_finite() && r_out > 0.0 { r_in.min(r_out) / r_in.max(r_out) } else { 0.0 };
    CellSetShape { area, centroid: c, circularity, roundness }
}
