//! Planar model domains and measurable sub-regions.
//!
//! Everything in this crate runs on four rotationally symmetric domains:
//! the unit disc, a disc of radius `R`, an annulus with outer radius 1, and
//! the punctured unit disc. Geometry queries (membership, boundary distance,
//! area, diameter) are exact closed forms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{PbergError, Result};

/// Relative floor separating "interior" points from the boundary (and from
/// the puncture): queries treat anything closer than this as outside.
pub const GEOMETRY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    UnitDisc,
    /// Disc of radius `R > 0` centred at the origin.
    Disc(f64),
    /// Annulus `r_in < |z| < 1` with `0 < r_in < 1`.
    Annulus(f64),
    /// Unit disc minus the origin.
    PuncturedDisc,
}

impl Domain {
    pub fn disc(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(PbergError::Parameter(format!(
                "disc radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Domain::Disc(radius))
    }

    pub fn annulus(r_in: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_in < 1.0) {
            return Err(PbergError::Parameter(format!(
                "annulus inner radius must lie in (0,1), got {r_in}"
            )));
        }
        Ok(Domain::Annulus(r_in))
    }

    /// Outer radius of the bounding circle.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            Domain::UnitDisc | Domain::Annulus(_) | Domain::PuncturedDisc => 1.0,
            Domain::Disc(r) => r,
        }
    }

    /// Inner radius (`0` except for the annulus).
    pub fn inner_radius(&self) -> f64 {
        match *self {
            Domain::Annulus(r_in) => r_in,
            _ => 0.0,
        }
    }

    /// Lebesgue measure of the domain. The puncture is null, so the
    /// punctured disc has the same area as the unit disc.
    pub fn area(&self) -> f64 {
        match *self {
            Domain::UnitDisc | Domain::PuncturedDisc => PI,
            Domain::Disc(r) => PI * r * r,
            Domain::Annulus(r_in) => PI * (1.0 - r_in * r_in),
        }
    }

    /// Euclidean diameter of the domain.
    pub fn diameter(&self) -> f64 {
        2.0 * self.outer_radius()
    }

    /// Distance from `z` to the boundary. For the punctured disc the origin
    /// is a boundary point.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let r = z.norm();
        match *self {
            Domain::UnitDisc => 1.0 - r,
            Domain::Disc(rad) => rad - r,
            Domain::Annulus(r_in) => (1.0 - r).min(r - r_in),
            Domain::PuncturedDisc => (1.0 - r).min(r),
        }
    }

    /// Strict interior membership with the numeric floor.
    pub fn contains(&self, z: Complex64) -> bool {
        self.boundary_distance(z) > GEOMETRY_FLOOR * self.outer_radius()
    }

    /// Errors out unless `z` is strictly inside.
    pub fn require_interior(&self, z: Complex64) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(PbergError::Geometry(format!("{z}")))
        }
    }
}

/// Descriptor of a measurable subset `E` of a domain, used for restricted
/// integrals and Schwarz contents.
#[derive(Clone)]
pub enum Region {
    /// Concentric disc `|z| <= r`.
    SubDisc(f64),
    /// Annular band `a <= |z| <= b`.
    AnnularBand(f64, f64),
    /// Complement (within the ambient domain) of another region.
    Complement(Box<Region>),
    /// Arbitrary membership predicate, decided at node level.
    Indicator(Arc<dyn Fn(Complex64) -> bool + Send + Sync>),
}

impl std::fmt::Debug for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::SubDisc(r) => write!(f, "SubDisc({r})"),
            Region::AnnularBand(a, b) => write!(f, "AnnularBand({a},{b})"),
            Region::Complement(r) => write!(f, "Complement({r:?})"),
            Region::Indicator(_) => write!(f, "Indicator(..)"),
        }
    }
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Region::SubDisc(r) => z.norm() <= *r,
            Region::AnnularBand(a, b) => {
                let r = z.norm();
                r >= *a && r <= *b
            }
            Region::Complement(inner) => !inner.contains(z),
            Region::Indicator(pred) => pred(z),
        }
    }

    /// Validates the region parameters against the ambient domain.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let outer = domain.outer_radius();
        match self {
            Region::SubDisc(r) => {
                if !(*r > 0.0 && *r <= outer) {
                    return Err(PbergError::Parameter(format!(
                        "sub-disc radius {r} outside (0, {outer}]"
                    )));
                }
            }
            Region::AnnularBand(a, b) => {
                if !(*a >= 0.0 && b >= a && *b <= outer) {
                    return Err(PbergError::Parameter(format!(
                        "annular band [{a},{b}] invalid for outer radius {outer}"
                    )));
                }
            }
            Region::Complement(inner) => inner.validate(domain)?,
            Region::Indicator(_) => {}
        }
        Ok(())
    }

    /// Area of the region intersected with the domain, when available in
    /// closed form (`None` for indicator regions).
    pub fn area(&self, domain: &Domain) -> Option<f64> {
        let clip = |r: f64| r.clamp(domain.inner_radius(), domain.outer_radius());
        match self {
            Region::SubDisc(r) => {
                let hi = clip(*r);
                let lo = domain.inner_radius();
                Some(PI * (hi * hi - lo * lo))
            }
            Region::AnnularBand(a, b) => {
                let lo = clip(*a);
                let hi = clip(*b);
                Some(PI * (hi * hi - lo * lo).max(0.0))
            }
            Region::Complement(inner) => inner.area(domain).map(|a| domain.area() - a),
            Region::Indicator(_) => None,
        }
    }
}
