use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How reads outside an image are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Clamp,
    /// Edge-inclusive reflection: -1 -> 0, -2 -> 1, size -> size - 1.
    Mirror,
    Repeat,
    /// Any out-of-range access is an error.
    Undefined,
}

impl BoundaryMode {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryMode::Clamp => "clamp",
            BoundaryMode::Mirror => "mirror",
            BoundaryMode::Repeat => "repeat",
            BoundaryMode::Undefined => "undefined",
        }
    }
}

/// Maps a possibly out-of-range coordinate on one axis into `[0, size)`.
pub fn map_boundary(index: isize, size: usize, mode: BoundaryMode) -> Result<usize> {
    if size == 0 {
        return Err(Error::invalid("extent must be >= 1"));
    }
    let n = size as isize;
    if (0..n).contains(&index) {
        return Ok(index as usize);
    }
    let mapped = match mode {
        BoundaryMode::Clamp => index.clamp(0, n - 1),
        BoundaryMode::Repeat => index.rem_euclid(n),
        BoundaryMode::Mirror => {
            let m = index.rem_euclid(2 * n);
            if m < n {
                m
            } else {
                2 * n - 1 - m
            }
        }
        BoundaryMode::Undefined => return Err(Error::OutOfBounds { index, size }),
    };
    Ok(mapped as usize)
}
