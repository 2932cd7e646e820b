//! Fourth-order first-derivative stencils on structured grids.
//!
//! Central 5-point differences are used in periodic directions and at
//! interior nodes. Within two nodes of a clamped edge the operator switches to
//! one-sided 5-point stencils of the same order. All weights are for unit
//! spacing and are divided by `12 h`.

use std::ops::{Add, Mul};

use rayon::prelude::*;

use crate::chart::{Boundary, Grid};
use crate::{Mat2, Vec3};

const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
/// Node 0, offsets 0..=4.
const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
/// Node 1, offsets -1..=3.
const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// Values that can be differentiated node-wise.
pub trait FieldValue: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl FieldValue for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
}

impl FieldValue for Mat2 {
    fn zero() -> Self {
        Mat2::zeros()
    }
}

/// Stencil for node `i` of `n`: (first offset, weights).
#[inline]
fn stencil(bc: Boundary, n: usize, i: usize) -> (isize, [f64; 5], f64) {
    match bc {
        Boundary::Periodic => (-2, CENTRAL, 1.0),
        Boundary::Clamped => {
            if i == 0 {
                (0, EDGE0, 1.0)
            } else if i == 1 {
                (-1, EDGE1, 1.0)
            } else if i == n - 1 {
                // mirrored stencil, opposite sign
                (-4, reversed(EDGE0), -1.0)
            } else if i == n - 2 {
                (-3, reversed(EDGE1), -1.0)
            } else {
                (-2, CENTRAL, 1.0)
            }
        }
    }
}

#[inline]
fn reversed(w: [f64; 5]) -> [f64; 5] {
    [w[4], w[3], w[2], w[1], w[0]]
}

/// Derivative of `field` along parameter direction `dir` (0 or 1).
pub fn partial<T: FieldValue>(grid: &Grid, field: &[T], dir: usize) -> Vec<T> {
    debug_assert_eq!(field.len(), grid.len());
    let n = grid.n[dir];
    let bc = grid.bc[dir];
    let scale = 1.0 / (12.0 * grid.h[dir]);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i1, i2) = grid.coords(idx);
            let i = if dir == 0 { i1 } else { i2 };
            let (start, w, sign) = stencil(bc, n, i);
            let mut acc = T::zero();
            for (k, &wk) in w.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let j = (i as isize + start + k as isize).rem_euclid(n as isize) as usize;
                let src = if dir == 0 { grid.index(j, i2) } else { grid.index(i1, j) };
                acc = acc + field[src] * (wk * sign);
            }
            acc * scale
        })
        .collect()
}

/// Both parameter derivatives.
pub fn gradient<T: FieldValue>(grid: &Grid, field: &[T]) -> [Vec<T>; 2] {
    [partial(grid, field, 0), partial(grid, field, 1)]
}
