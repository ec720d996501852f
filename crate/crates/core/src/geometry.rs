//! Axis-aligned box arithmetic.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("box coordinates must be finite, got [{0}, {1}, {2}, {3}]")]
    NonFinite(f64, f64, f64, f64),
    #[error("degenerate box: need xmin < xmax and ymin < ymax, got [{0}, {1}, {2}, {3}]")]
    Degenerate(f64, f64, f64, f64),
    #[error("enlargement ratios must be finite and >= 1, got ({0}, {1})")]
    InvalidRatios(f64, f64),
}

/// An axis-aligned rectangle in image pixel coordinates with strictly
/// positive width and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    xmin: f64,
    ymin: f64,
    xmax: f64,
    ymax: f64,
}

impl BBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, GeometryError> {
        if !(xmin.is_finite() && ymin.is_finite() && xmax.is_finite() && ymax.is_finite()) {
            return Err(GeometryError::NonFinite(xmin, ymin, xmax, ymax));
        }
        if xmin >= xmax || ymin >= ymax {
            return Err(GeometryError::Degenerate(xmin, ymin, xmax, ymax));
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    #[inline]
    pub fn xmin(&self) -> f64 {
        self.xmin
    }
    #[inline]
    pub fn ymin(&self) -> f64 {
        self.ymin
    }
    #[inline]
    pub fn xmax(&self) -> f64 {
        self.xmax
    }
    #[inline]
    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.xmin, self.ymin, self.xmax, self.ymax]
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)
    }

    /// Area of the overlap with `other`; zero when the interiors are disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.xmax.min(other.xmax) - self.xmin.max(other.xmin);
        let h = self.ymax.min(other.ymax) - self.ymin.max(other.ymin);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.xmin, self.ymin, self.xmax, self.ymax
        )
    }
}

/// Per-axis multipliers applied around the box center. Both are `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnlargementRatios {
    rw: f64,
    rh: f64,
}

impl EnlargementRatios {
    pub const IDENTITY: EnlargementRatios = EnlargementRatios { rw: 1.0, rh: 1.0 };

    pub fn new(rw: f64, rh: f64) -> Result<Self, GeometryError> {
        if !(rw.is_finite() && rh.is_finite()) || rw < 1.0 || rh < 1.0 {
            return Err(GeometryError::InvalidRatios(rw, rh));
        }
        Ok(Self { rw, rh })
    }

    #[inline]
    pub fn rw(&self) -> f64 {
        self.rw
    }

    #[inline]
    pub fn rh(&self) -> f64 {
        self.rh
    }

    /// Componentwise maximum.
    pub fn max(self, other: EnlargementRatios) -> EnlargementRatios {
        EnlargementRatios {
            rw: self.rw.max(other.rw),
            rh: self.rh.max(other.rh),
        }
    }
}

impl Default for EnlargementRatios {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Intersection over union, in `[0, 1]`.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// The safety predicate: `outer` contains `inner` with at least `eps` margin
/// on every side. Boundaries are closed, so `cover(b, b, 0.0)` holds.
pub fn cover(outer: &BBox, inner: &BBox, eps: f64) -> bool {
    outer.xmin <= inner.xmin - eps
        && outer.ymin <= inner.ymin - eps
        && outer.xmax >= inner.xmax + eps
        && outer.ymax >= inner.ymax + eps
}

/// Scales `b` about its center. Coordinates are not clamped to the image.
///
/// Each edge moves outward by `(r - 1) * extent / 2`, so ratios of exactly 1
/// reproduce the input bit for bit and ratios `>= 1` never move an edge inward.
pub fn enlarge(b: &BBox, r: EnlargementRatios) -> BBox {
    let dx = grow(r.rw, b.width());
    let dy = grow(r.rh, b.height());
    BBox {
        xmin: b.xmin - dx,
        ymin: b.ymin - dy,
        xmax: b.xmax + dx,
        ymax: b.ymax + dy,
    }
}

// Per-side growth `(r - 1) * len / 2`, written as `r * half - half` so that
// r = 1 is exact and decimal ratios on round lengths stay exact too.
#[inline]
fn grow(r: f64, len: f64) -> f64 {
    let half = len / 2.0;
    r * half - half
}

/// Smallest ratios (each `>= 1`) such that `enlarge(pred, r)` covers `label`.
pub fn min_enlargement_ratio(pred: &BBox, label: &BBox) -> EnlargementRatios {
    let (cx, cy) = pred.center();
    let rw = axis_ratio(
        pred.xmin,
        pred.xmax,
        2.0 * (cx - label.xmin).max(label.xmax - cx) / pred.width(),
        label.xmin,
        label.xmax,
    );
    let rh = axis_ratio(
        pred.ymin,
        pred.ymax,
        2.0 * (cy - label.ymin).max(label.ymax - cy) / pred.height(),
        label.ymin,
        label.ymax,
    );
    EnlargementRatios { rw, rh }
}

// The closed form can land an ulp short of containment once `enlarge`
// rounds, so step up until the enlarged interval really contains the label.
fn axis_ratio(lo: f64, hi: f64, closed_form: f64, label_lo: f64, label_hi: f64) -> f64 {
    let mut r = closed_form.max(1.0);
    for _ in 0..64 {
        let d = grow(r, hi - lo);
        if lo - d <= label_lo && hi + d >= label_hi {
            return r;
        }
        r = r.next_up();
    }
    r
}
