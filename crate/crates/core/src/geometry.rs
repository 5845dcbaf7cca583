//! Parametric cross-sections used by the shipped scenarios.

use serde::Serialize;

use crate::mesh::{BoxExtent, BoxSide, DomainSpec, Point};

/// Axis-aligned box used to integrate fields over a sub-region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Probe {
    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }
}

/// One-dimensional-like column: a conductor slab under a coil sheet, with
/// symmetry cuts on both long sides and under the slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGeometry {
    pub width: f64,
    /// Conductor thickness below the surface `y = 0`.
    pub depth: f64,
    pub gap: f64,
    pub coil_thickness: f64,
    pub top_air: f64,
    pub h: f64,
}

impl StripGeometry {
    pub fn extent(&self) -> BoxExtent {
        BoxExtent { x0: 0.0, y0: -self.depth, x1: self.width, y1: self.gap + self.coil_thickness + self.top_air }
    }

    pub fn domain(&self) -> DomainSpec {
        let w = self.width;
        let (c0, c1) = (self.gap, self.gap + self.coil_thickness);
        DomainSpec {
            outer: self.extent(),
            workpiece: vec![[0.0, -self.depth], [w, -self.depth], [w, 0.0], [0.0, 0.0]],
            coils: vec![vec![[0.0, c0], [w, c0], [w, c1], [0.0, c1]]],
            h: self.h,
            symmetry: vec![BoxSide::Left, BoxSide::Right, BoxSide::Bottom],
        }
    }
}

/// Half of one tooth period of a toothed rim, cut along the tooth centerline
/// (`x = 0`) and the gap centerline (`x = half_pitch`). The root line is
/// `y = 0`, the tip is at `y = tooth_height`, the rim extends down to
/// `y = −body_depth`. The coil bar sits above the gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToothGeometry {
    pub half_pitch: f64,
    pub root_half_width: f64,
    pub tip_half_width: f64,
    pub tooth_height: f64,
    pub body_depth: f64,
    pub coil_half_width: f64,
    pub coil_bottom: f64,
    pub coil_height: f64,
    pub top: f64,
    pub h: f64,
}

impl ToothGeometry {
    pub fn extent(&self) -> BoxExtent {
        BoxExtent { x0: 0.0, y0: -self.body_depth, x1: self.half_pitch, y1: self.top }
    }

    pub fn workpiece(&self) -> Vec<Point> {
        let w = self.half_pitch;
        vec![
            [0.0, -self.body_depth],
            [w, -self.body_depth],
            [w, 0.0],
            [self.root_half_width, 0.0],
            [self.tip_half_width, self.tooth_height],
            [0.0, self.tooth_height],
        ]
    }

    pub fn domain(&self) -> DomainSpec {
        let w = self.half_pitch;
        let (c0, c1) = (self.coil_bottom, self.coil_bottom + self.coil_height);
        let cx = w - self.coil_half_width;
        DomainSpec {
            outer: self.extent(),
            workpiece: self.workpiece(),
            coils: vec![vec![[cx, c0], [w, c0], [w, c1], [cx, c1]]],
            h: self.h,
            symmetry: vec![BoxSide::Left, BoxSide::Right, BoxSide::Bottom],
        }
    }
}
