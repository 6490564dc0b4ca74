//! Second security layer: level-1 orthonormal Haar transform and
//! per-coefficient alpha blending with a secret image.

use crate::error::{FlepError, Result};
use crate::image::{GrayImage, RealPlane};

/// The four level-1 subbands, each half the input resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DwtPlanes {
    pub ll: RealPlane,
    pub lh: RealPlane,
    pub hl: RealPlane,
    pub hh: RealPlane,
}

impl DwtPlanes {
    fn check_consistent(&self) -> Result<()> {
        let (w, h) = (self.ll.width(), self.ll.height());
        for (name, band) in [("LH", &self.lh), ("HL", &self.hl), ("HH", &self.hh)] {
            if band.width() != w || band.height() != h {
                return Err(FlepError::Dimension(format!(
                    "{name} subband is {}x{}, LL is {w}x{h}",
                    band.width(),
                    band.height()
                )));
            }
        }
        Ok(())
    }
}

/// Orthonormal level-1 Haar: each 2x2 cell [[a,b],[c,d]] maps to
/// LL=(a+b+c+d)/2, LH=(a-b+c-d)/2, HL=(a+b-c-d)/2, HH=(a-b-c+d)/2.
pub fn dwt2(plane: &RealPlane) -> Result<DwtPlanes> {
    let (w, h) = (plane.width(), plane.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(FlepError::Dimension(format!(
            "dwt2 needs even dimensions, got {w}x{h}"
        )));
    }
    let (hw, hh_dim) = (w / 2, h / 2);
    let n = hw * hh_dim;
    let (mut ll, mut lh, mut hl, mut hh) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for by in 0..hh_dim {
        for bx in 0..hw {
            let a = plane.get(2 * bx, 2 * by);
            let b = plane.get(2 * bx + 1, 2 * by);
            let c = plane.get(2 * bx, 2 * by + 1);
            let d = plane.get(2 * bx + 1, 2 * by + 1);
            let i = by * hw + bx;
            ll[i] = (a + b + c + d) / 2.0;
            lh[i] = (a - b + c - d) / 2.0;
            hl[i] = (a + b - c - d) / 2.0;
            hh[i] = (a - b - c + d) / 2.0;
        }
    }
    Ok(DwtPlanes {
        ll: RealPlane::new(hw, hh_dim, ll)?,
        lh: RealPlane::new(hw, hh_dim, lh)?,
        hl: RealPlane::new(hw, hh_dim, hl)?,
        hh: RealPlane::new(hw, hh_dim, hh)?,
    })
}

/// Exact inverse of [`dwt2`].
pub fn idwt2(planes: &DwtPlanes) -> Result<RealPlane> {
    planes.check_consistent()?;
    let (hw, hh_dim) = (planes.ll.width(), planes.ll.height());
    let (w, h) = (hw * 2, hh_dim * 2);
    let mut out = vec![0.0; w * h];
    for by in 0..hh_dim {
        for bx in 0..hw {
            let ll = planes.ll.get(bx, by);
            let lh = planes.lh.get(bx, by);
            let hl = planes.hl.get(bx, by);
            let hh = planes.hh.get(bx, by);
            out[2 * by * w + 2 * bx] = (ll + lh + hl + hh) / 2.0;
            out[2 * by * w + 2 * bx + 1] = (ll - lh + hl - hh) / 2.0;
            out[(2 * by + 1) * w + 2 * bx] = (ll + lh - hl - hh) / 2.0;
            out[(2 * by + 1) * w + 2 * bx + 1] = (ll - lh - hl + hh) / 2.0;
        }
    }
    RealPlane::new(w, h, out)
}

fn blend_planes(a: &DwtPlanes, b: &DwtPlanes, alpha: f64) -> Result<DwtPlanes> {
    let mix = |x: &RealPlane, y: &RealPlane| -> Result<RealPlane> {
        RealPlane::new(
            x.width(),
            x.height(),
            x.values()
                .iter()
                .zip(y.values())
                .map(|(&cx, &cy)| alpha * cx + (1.0 - alpha) * cy)
                .collect(),
        )
    };
    Ok(DwtPlanes {
        ll: mix(&a.ll, &b.ll)?,
        lh: mix(&a.lh, &b.lh)?,
        hl: mix(&a.hl, &b.hl)?,
        hh: mix(&a.hh, &b.hh)?,
    })
}

fn check_same_size(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(FlepError::Dimension(format!(
            "image is {}x{} but secret is {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// Transforms both images, blends every coefficient as
/// alpha*scrambled + (1-alpha)*secret, and inverse-transforms back to an
/// image-like real plane.
pub fn blend_encode(scrambled: &GrayImage, secret: &GrayImage, alpha: f64) -> Result<RealPlane> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FlepError::Config(format!("blend alpha {alpha} outside (0, 1]")));
    }
    check_same_size(
        (scrambled.width(), scrambled.height()),
        (secret.width(), secret.height()),
    )?;
    let blended = blend_planes(
        &dwt2(&scrambled.to_plane())?,
        &dwt2(&secret.to_plane())?,
        alpha,
    )?;
    idwt2(&blended)
}

/// Recovers the scrambled plane: subtract the secret's contribution in
/// coefficient space and divide by alpha.
pub fn blend_decode(encoded: &RealPlane, secret: &GrayImage, alpha: f64) -> Result<RealPlane> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FlepError::Config(format!("blend alpha {alpha} outside (0, 1]")));
    }
    check_same_size(
        (encoded.width(), encoded.height()),
        (secret.width(), secret.height()),
    )?;
    let enc = dwt2(encoded)?;
    let sec = dwt2(&secret.to_plane())?;
    let unmix = |x: &RealPlane, y: &RealPlane| -> Result<RealPlane> {
        RealPlane::new(
            x.width(),
            x.height(),
            x.values()
                .iter()
                .zip(y.values())
                .map(|(&cx, &cy)| (cx - (1.0 - alpha) * cy) / alpha)
                .collect(),
        )
    };
    idwt2(&DwtPlanes {
        ll: unmix(&enc.ll, &sec.ll)?,
        lh: unmix(&enc.lh, &sec.lh)?,
        hl: unmix(&enc.hl, &sec.hl)?,
        hh: unmix(&enc.hh, &sec.hh)?,
    })
}
