use std::fmt::Write as _;

use crate::binegativity::negative_decomposition_with;
use crate::certificates::nonpositivity_witness;
use crate::error::{Error, Result};
use crate::linalg::{BipartiteOperator, ComplexMatrix, Side};
use crate::normal_form::{filter_normal_form_with, rank3_regularize_with};
use crate::states::DensityMatrix;
use crate::tolerances::Tolerances;

use super::map_indexed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    PositiveAndPpt,
    PositiveOnly,
    PptOnly,
    Neither,
}

impl CellClass {
    fn from_flags(positive: bool, ppt: bool) -> Self {
        match (positive, ppt) {
            (true, true) => Self::PositiveAndPpt,
            (true, false) => Self::PositiveOnly,
            (false, true) => Self::PptOnly,
            (false, false) => Self::Neither,
        }
    }

    fn color(self) -> &'static str {
        match self {
            Self::PositiveAndPpt => "#4c9a5b",
            Self::PositiveOnly => "#4a78b5",
            Self::PptOnly => "#d59a3a",
            Self::Neither => "#e8e8e8",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Self::PositiveAndPpt => "positive and PPT",
            Self::PositiveOnly => "positive only",
            Self::PptOnly => "PPT only",
            Self::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    pub positive: bool,
    pub ppt: bool,
}

impl Cell {
    pub fn class(&self) -> CellClass {
        CellClass::from_flags(self.positive, self.ppt)
    }
}

/// A plane through `center` spanned by two directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub center: BipartiteOperator<f64>,
    pub dir1: ComplexMatrix<f64>,
    pub dir2: ComplexMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionGrid {
    pub center: BipartiteOperator<f64>,
    /// Orthonormal in the Hilbert–Schmidt inner product.
    pub dir1: ComplexMatrix<f64>,
    pub dir2: ComplexMatrix<f64>,
    pub radius: f64,
    pub resolution: usize,
    /// Row-major with y outer, x inner.
    pub cells: Vec<Cell>,
}

/// Positivity and PPT flags of an operator after trace normalization.
fn classify(op: &BipartiteOperator<f64>, tol: &Tolerances) -> Result<(bool, bool)> {
    let tr = op.trace();
    if !(tr > 0.0) {
        return Ok((false, false));
    }
    let op = op.scale(1.0 / tr);
    let slack = -tol.psd;
    let positive = op.eig_with(tol)?.min() >= slack;
    let ppt = op.partial_transpose(Side::B).eig_with(tol)?.min() >= slack;
    Ok((positive, ppt))
}

fn grid_coord(k: usize, resolution: usize, radius: f64) -> f64 {
    if resolution == 1 {
        0.0
    } else {
        -radius + 2.0 * radius * k as f64 / (resolution - 1) as f64
    }
}

/// Classifies center + x·e₁ + y·e₂ on a square grid of side 2·radius.
pub fn cross_section(
    center: &BipartiteOperator<f64>,
    dir1: &ComplexMatrix<f64>,
    dir2: &ComplexMatrix<f64>,
    radius: f64,
    resolution: usize,
    tol: &Tolerances,
) -> Result<SectionGrid> {
    let n = center.dim();
    if dir1.rows() != n || dir1.cols() != n || dir2.rows() != n || dir2.cols() != n {
        return Err(Error::Shape("directions must match the center".into()));
    }
    dir1.check_hermitian(tol.hermitian)?;
    dir2.check_hermitian(tol.hermitian)?;
    if !(radius > 0.0 && radius.is_finite()) || resolution == 0 {
        return Err(Error::InvalidArgument("radius must be positive and resolution at least 1".into()));
    }

    let n1 = dir1.frobenius_norm();
    let n2 = dir2.frobenius_norm();
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(Error::DegeneratePlane);
    }
    let e1 = dir1.scale(1.0 / n1);
    let rem = dir2 - &e1.scale(e1.hs_inner(dir2));
    let nr = rem.frobenius_norm();
    if nr <= tol.plane * n2 {
        return Err(Error::DegeneratePlane);
    }
    let e2 = rem.scale(1.0 / nr);
    let e2 = (&e2 - &e1.scale(e1.hs_inner(&e2))).hermitian_part();

    let (da, db) = center.dims();
    let cells = map_indexed(resolution * resolution, |k| -> Result<Cell> {
        let x = grid_coord(k % resolution, resolution, radius);
        let y = grid_coord(k / resolution, resolution, radius);
        let m = &(center.matrix() + &e1.scale(x)) + &e2.scale(y);
        let (positive, ppt) = classify(&BipartiteOperator::from_parts(da, db, m), tol)?;
        Ok(Cell { x, y, positive, ppt })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(SectionGrid { center: center.clone(), dir1: e1, dir2: e2, radius, resolution, cells })
}

/// Center P^{T_B}; e₁ along σ − P^{T_B}, so σ, P^{T_B} and the binegativity lie on
/// the x axis at +λ, 0 and −λ; e₂ from the witness projector |φ⟩⟨φ|.
pub fn default_plane(sigma: &DensityMatrix<f64>, tol: &Tolerances) -> Result<Plane> {
    if sigma.dims() != (2, 2) {
        return Err(Error::Shape("default plane is defined for two qubits".into()));
    }
    let d = negative_decomposition_with(sigma, tol)?;
    if !d.is_entangled(tol) {
        return Err(Error::NotEntangled);
    }
    let center = d.positive.partial_transpose(Side::B);
    let dir1 = (sigma.op() - &center).into_matrix();
    let psi = d.psi().expect("entangled input has a negative term");
    let p = if d.positive_rank(tol.rank) < 3 { rank3_regularize_with(&d.positive, psi, tol)? } else { d.positive.clone() };
    let nf = filter_normal_form_with(&p, tol)?;
    let (phi, _) = nonpositivity_witness(&nf)?;
    let dir2 = ComplexMatrix::projector(&phi);
    Ok(Plane { center, dir1, dir2 })
}

impl SectionGrid {
    pub fn center_cell(&self) -> Option<&Cell> {
        if self.resolution % 2 == 1 {
            let mid = self.resolution / 2;
            self.cells.get(mid * self.resolution + mid)
        } else {
            None
        }
    }

    /// Parameters (x, y) of an operator projected onto the plane.
    pub fn coordinates(&self, op: &BipartiteOperator<f64>) -> (f64, f64) {
        let rel = op.matrix() - self.center.matrix();
        (self.dir1.hs_inner(&rel), self.dir2.hs_inner(&rel))
    }

    /// `x,y,positive,ppt`, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,positive,ppt\n");
        for c in &self.cells {
            let _ = writeln!(out, "{:e},{:e},{},{}", c.x, c.y, c.positive as u8, c.ppt as u8);
        }
        out
    }

    /// Four-color raster with a legend.
    pub fn to_svg(&self) -> String {
        let cell = (600 / self.resolution).max(1);
        let side = cell * self.resolution;
        let legend = 24 * 4 + 8;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
            side,
            side + legend
        );
        for (k, c) in self.cells.iter().enumerate() {
            let i = k % self.resolution;
            let j = self.resolution - 1 - k / self.resolution;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="{}"/>"#,
                i * cell,
                j * cell,
                c.class().color()
            );
        }
        let classes = [CellClass::PositiveAndPpt, CellClass::PositiveOnly, CellClass::PptOnly, CellClass::Neither];
        for (k, class) in classes.iter().enumerate() {
            let y = side + 8 + 24 * k;
            let _ = writeln!(out, r#"<rect x="8" y="{y}" width="16" height="16" fill="{}" stroke="black"/>"#, class.color());
            let _ = writeln!(
                out,
                r#"<text x="32" y="{}" font-family="sans-serif" font-size="14">{}</text>"#,
                y + 13,
                class.label()
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
