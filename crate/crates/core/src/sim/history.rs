use crate::error::{Error, Result};
use crate::image::Plane;

/// The prefix of a raster stream an actor has consumed so far, viewed as a
/// plane. Reading a sample that has not arrived is a causality error.
pub struct HistoryPlane<'a> {
    data: &'a [f32],
    width: usize,
    height: usize,
}

impl<'a> HistoryPlane<'a> {
    pub fn new(data: &'a [f32], width: usize, height: usize) -> Self {
        Self { data, width, height }
    }
}

impl Plane for HistoryPlane<'_> {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn get(&self, x: usize, y: usize) -> Result<f32> {
        if x >= self.width {
            return Err(Error::OutOfBounds {
                index: x as isize,
                size: self.width,
            });
        }
        if y >= self.height {
            return Err(Error::OutOfBounds {
                index: y as isize,
                size: self.height,
            });
        }
        let i = y * self.width + x;
        self.data.get(i).copied().ok_or(Error::Causality {
            index: i,
            available: self.data.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_only_delivered_samples() {
        let d = [1.0, 2.0, 3.0];
        let p = HistoryPlane::new(&d, 2, 2);
        assert_eq!(p.get(0, 1).unwrap(), 3.0);
        assert_eq!(p.get(1, 1), Err(Error::Causality { index: 3, available: 3 }));
        assert!(matches!(p.get(2, 0), Err(Error::OutOfBounds { .. })));
    }
}
