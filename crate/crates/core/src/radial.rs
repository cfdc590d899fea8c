//! Radially symmetric problems on balls and annuli, reduced to one
//! dimension.
//!
//! A radial problem in dimension `n` becomes a weighted problem in the
//! radial variable with weight `t^(n-1)`. On a ball the center carries no
//! boundary condition; the reduced problem marks its left end as natural.

use crate::limit::{ball_core_component, LimitPiece};
use crate::piecewise::{PiecewisePoly, MERGE_TOL};
use crate::psolver::ProblemSpec;
use crate::{Error, Result};

/// Radially symmetric obstacle (or Dirichlet) problem with zero boundary
/// values on `r1 < |x| < r2` in dimension `n`.
#[derive(Clone, Debug)]
pub struct RadialSpec {
    pub n: u32,
    pub r1: f64,
    pub r2: f64,
    /// Radial datum.
    pub g: PiecewisePoly,
    /// Radial obstacle, if any.
    pub obstacle: Option<PiecewisePoly>,
    pub p: f64,
}

/// Reduce a radial problem to its weighted one-dimensional form.
pub fn reduce(spec: &RadialSpec) -> Result<ProblemSpec> {
    if spec.n < 1 {
        return Err(Error::BadSpec("dimension must be at least 1".into()));
    }
    if spec.r1 < 0.0 || spec.r2 - spec.r1 <= MERGE_TOL {
        return Err(Error::BadSpec(format!("bad radii ({}, {})", spec.r1, spec.r2)));
    }
    let (glo, ghi) = spec.g.domain();
    if (glo - spec.r1).abs() > 1e-9 || (ghi - spec.r2).abs() > 1e-9 {
        return Err(Error::DomainMismatch);
    }
    ProblemSpec::weighted(
        spec.r1,
        spec.r2,
        spec.g.clone(),
        spec.obstacle.clone(),
        (0.0, 0.0),
        spec.p,
        spec.n - 1,
        spec.r1 == 0.0,
    )
}

/// Limit pieces for the component of a ball that contains the center, with
/// contact (or the outer boundary) at radius `c` where the profile takes the
/// value `phi_c`.
pub fn ball_core_limit(
    g: &PiecewisePoly,
    n: u32,
    c: f64,
    phi_c: f64,
) -> Result<Vec<LimitPiece>> {
    if n < 1 {
        return Err(Error::BadSpec("dimension must be at least 1".into()));
    }
    let q = g.mul_monomial(n - 1)?;
    let (pieces, _) = ball_core_component(&q, c, phi_c)?;
    Ok(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::PieceKind;

    #[test]
    fn reduction_carries_the_weight_and_the_free_center() {
        let g = PiecewisePoly::constant(0.0, 2.0, -1.0).unwrap();
        let spec = RadialSpec { n: 3, r1: 0.0, r2: 2.0, g, obstacle: None, p: 4.0 };
        let flat = reduce(&spec).unwrap();
        assert_eq!(flat.weight_exponent, 2);
        assert!(flat.natural_left);
        assert_eq!(flat.bc, (0.0, 0.0));
        // annulus keeps both boundary conditions
        let g2 = PiecewisePoly::constant(1.0, 2.0, -1.0).unwrap();
        let spec2 = RadialSpec { n: 3, r1: 1.0, r2: 2.0, g: g2, obstacle: None, p: 4.0 };
        assert!(!reduce(&spec2).unwrap().natural_left);
    }

    #[test]
    fn reduction_rejects_mismatched_domains() {
        let g = PiecewisePoly::constant(0.0, 1.0, -1.0).unwrap();
        let spec = RadialSpec { n: 2, r1: 0.0, r2: 2.0, g, obstacle: None, p: 4.0 };
        assert!(reduce(&spec).is_err());
    }

    #[test]
    fn core_pieces_follow_the_sign_of_the_accumulated_datum() {
        // negative datum: the weighted accumulation is negative, the profile
        // climbs toward the contact radius with slope 1
        let g = PiecewisePoly::constant(0.0, 2.0, -1.0).unwrap();
        let pieces = ball_core_limit(&g, 2, 1.5, 0.25).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].kind, PieceKind::Slope(1.0));
        // pinned at (1.5, 0.25)
        assert!((pieces[0].poly.eval(1.5) - 0.25).abs() < 1e-12);
        assert!((pieces[0].poly.eval(0.5) - (0.25 - 1.0)).abs() < 1e-12);
    }
}
