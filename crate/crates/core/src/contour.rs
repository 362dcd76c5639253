//! Zero-level sets of sampled scalar fields by marching squares.
//!
//! Nodes with value `>= 0` count as inside. Ambiguous cells (diagonal corners
//! on the same side) are resolved with the cell-centre average. Segments are
//! joined through shared edge crossings, so output polylines are exact chains
//! of interpolated edge points, open ones starting on the grid boundary.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Values `values[i * ny + j]` sampled at `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub values: &'a [f64],
}

/// An edge of the grid: `(i, j, horizontal)` joins node `(i, j)` to `(i + 1, j)`
/// when horizontal and to `(i, j + 1)` otherwise.
type EdgeId = (usize, usize, bool);

impl ScalarGrid<'_> {
    fn check(&self) -> Result<()> {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParameter("contour grid needs at least 2x2 nodes".into()));
        }
        if self.values.len() != nx * ny {
            return Err(Error::InvalidParameter(format!(
                "contour grid has {} values for {nx}x{ny} nodes",
                self.values.len()
            )));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(self.xs) || !increasing(self.ys) {
            return Err(Error::InvalidParameter("contour coordinates must be strictly increasing".into()));
        }
        Ok(())
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    fn crossing(&self, e: EdgeId) -> [f64; 2] {
        let (i, j, horizontal) = e;
        let (i1, j1) = if horizontal { (i + 1, j) } else { (i, j + 1) };
        let (f0, f1) = (self.at(i, j), self.at(i1, j1));
        let t = if f0 == f1 { 0.5 } else { f0 / (f0 - f1) };
        [
            self.xs[i] + t * (self.xs[i1] - self.xs[i]),
            self.ys[j] + t * (self.ys[j1] - self.ys[j]),
        ]
    }
}

fn cell_segments(g: &ScalarGrid<'_>, i: usize, j: usize, out: &mut Vec<(EdgeId, EdgeId)>) {
    // corners counter-clockwise from (i, j); edges: bottom, right, top, left
    let v = [g.at(i, j), g.at(i + 1, j), g.at(i + 1, j + 1), g.at(i, j + 1)];
    if v.iter().any(|x| !x.is_finite()) {
        return;
    }
    let idx = v.iter().enumerate().fold(0u8, |acc, (k, x)| acc | (u8::from(*x >= 0.0) << k));
    let (b, r, t, l) = ((i, j, true), (i + 1, j, false), (i, j + 1, true), (i, j, false));
    let mut push = |a, c| out.push((a, c));
    match idx {
        0 | 15 => {}
        1 | 14 => push(l, b),
        2 | 13 => push(b, r),
        3 | 12 => push(l, r),
        4 | 11 => push(r, t),
        6 | 9 => push(b, t),
        7 | 8 => push(l, t),
        5 | 10 => {
            let centre_inside = v.iter().sum::<f64>() >= 0.0;
            // idx 5: corners 0 and 2 inside
            if (idx == 5) == centre_inside {
                push(l, t);
                push(b, r);
            } else {
                push(l, b);
                push(r, t);
            }
        }
        _ => unreachable!(),
    }
}

/// Extracts the zero-level polylines of a sampled field.
pub fn zero_contours(grid: &ScalarGrid<'_>) -> Result<Vec<Vec<[f64; 2]>>> {
    grid.check()?;
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let mut segs = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            cell_segments(grid, i, j, &mut segs);
        }
    }
    let mut touching: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segs.iter().enumerate() {
        touching.entry(*a).or_default().push(k);
        touching.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    // open chains first, starting from edges used by a single segment
    let starts: Vec<EdgeId> = touching.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    let walk = |start: EdgeId, first: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        let mut at = start;
        let mut seg = Some(first);
        while let Some(k) = seg {
            used[k] = true;
            let (a, b) = segs[k];
            at = if a == at { b } else { a };
            chain.push(at);
            seg = touching[&at].iter().copied().find(|&s| !used[s]);
        }
        chain.iter().map(|e| grid.crossing(*e)).collect::<Vec<_>>()
    };
    for e in starts {
        if let Some(&k) = touching[&e].iter().find(|&&k| !used[k]) {
            lines.push(walk(e, k, &mut used));
        }
    }
    for k in 0..segs.len() {
        if !used[k] {
            lines.push(walk(segs[k].0, k, &mut used));
        }
    }
    Ok(lines)
}
