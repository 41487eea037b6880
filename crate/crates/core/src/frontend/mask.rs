use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square filter window with one coefficient per tap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskDef {
    radius: usize,
    coefficients: Vec<f32>,
}

impl MaskDef {
    /// Builds a mask from a square matrix with an odd side length.
    pub fn new(rows: &[Vec<f32>]) -> Result<Self> {
        let side = rows.len();
        if side == 0 || side.is_multiple_of(2) {
            return Err(Error::invalid(format!("mask side must be odd, got {side}")));
        }
        let mut coefficients = Vec::with_capacity(side * side);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != side {
                return Err(Error::invalid(format!(
                    "mask row {j} has {} entries, expected {side}",
                    row.len()
                )));
            }
            for (i, &c) in row.iter().enumerate() {
                if !c.is_finite() {
                    return Err(Error::invalid(format!("mask entry ({i},{j}) is not finite")));
                }
                coefficients.push(c);
            }
        }
        Ok(Self {
            radius: (side - 1) / 2,
            coefficients,
        })
    }

    pub fn from_array<const N: usize>(rows: [[f32; N]; N]) -> Result<Self> {
        let rows: Vec<Vec<f32>> = rows.iter().map(|r| r.to_vec()).collect();
        Self::new(&rows)
    }

    /// The 3x3 binomial mask used as the default generating kernel.
    pub fn gaussian3() -> Self {
        Self::from_array([
            [0.0625, 0.1250, 0.0625],
            [0.1250, 0.2500, 0.1250],
            [0.0625, 0.1250, 0.0625],
        ])
        .expect("constant mask is valid")
    }

    /// Full-weighting restriction stencil, `{{1,2,1},{2,4,2},{1,2,1}} / 16`.
    pub fn full_weighting() -> Self {
        Self::gaussian3()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Coefficient at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f32 {
        let r = self.radius as isize;
        let side = self.side();
        self.coefficients[((dy + r) as usize) * side + (dx + r) as usize]
    }

    pub fn coefficients(&self) -> &[f32] {
        &self.coefficients
    }

    pub fn sum(&self) -> f32 {
        self.coefficients.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_mask_has_radius_one_and_unit_sum() {
        let m = MaskDef::gaussian3();
        assert_eq!(m.radius(), 1);
        assert_eq!(m.sum(), 1.0);
        assert_eq!(m.at(0, 0), 0.25);
        assert_eq!(m.at(-1, 1), 0.0625);
    }

    #[test]
    fn identity_mask() {
        let m = MaskDef::new(&[vec![1.0]]).unwrap();
        assert_eq!(m.radius(), 0);
        assert_eq!(m.at(0, 0), 1.0);
    }

    #[test]
    fn rejects_even_and_non_finite() {
        assert!(MaskDef::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(MaskDef::new(&[vec![f32::INFINITY]]).is_err());
        assert!(MaskDef::new(&[]).is_err());
        assert!(MaskDef::new(&[vec![1.0, 2.0, 3.0], vec![1.0], vec![1.0, 2.0, 3.0]]).is_err());
    }
}
