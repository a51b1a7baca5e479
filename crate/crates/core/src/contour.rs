//! Marching squares isocontours with deterministic polyline stitching.
//!
//! Corner order inside a cell is counter-clockwise from the lower-left
//! vertex; edge `e` joins corner `e` and corner `e + 1`:
//!
//! ```text
//!  3 ---e2--- 2
//!  |          |
//!  e3         e1
//!  |          |
//!  0 ---e0--- 1
//! ```

use crate::grid::{ScalarField2, UniformGrid2};

/// Relative nudge applied to vertices that equal the isovalue exactly.
pub const TIE_EPSILON: f64 = 1e-12;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    pub isovalue: f64,
    /// Closed polylines repeat their first point at the end.
    pub polylines: Vec<Vec<Point>>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.polylines.iter().map(Vec::len).sum()
    }
}

pub fn is_closed(polyline: &[Point]) -> bool {
    polyline.len() > 2 && polyline.first() == polyline.last()
}

/// Edge ids: horizontal edges `(i, j)-(i+1, j)` first, then vertical
/// edges `(i, j)-(i, j+1)`.
struct EdgeIndex {
    nx: usize,
    horizontal: usize,
}

impl EdgeIndex {
    fn new(grid: &UniformGrid2) -> Self {
        Self {
            nx: grid.nx(),
            horizontal: (grid.nx() - 1) * grid.ny(),
        }
    }

    fn count(&self, grid: &UniformGrid2) -> usize {
        self.horizontal + grid.nx() * (grid.ny() - 1)
    }

    fn h(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + i
    }

    fn v(&self, i: usize, j: usize) -> usize {
        self.horizontal + j * self.nx + i
    }

    /// The two vertices `(i, j)` an edge joins.
    fn ends(&self, e: usize) -> [(usize, usize); 2] {
        if e < self.horizontal {
            let (i, j) = (e % (self.nx - 1), e / (self.nx - 1));
            [(i, j), (i + 1, j)]
        } else {
            let k = e - self.horizontal;
            let (i, j) = (k % self.nx, k / self.nx);
            [(i, j), (i, j + 1)]
        }
    }
}

pub fn marching_squares(field: &ScalarField2, isovalue: f64) -> ContourSet {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let nudge = TIE_EPSILON * (isovalue + 1.0).abs();
    let w: Vec<f64> = field
        .values()
        .iter()
        .map(|&v| if v == isovalue { isovalue + nudge } else { v })
        .collect();
    let edges = EdgeIndex::new(&grid);

    let mut segments: Vec<[usize; 2]> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corner = [
                w[j * nx + i],
                w[j * nx + i + 1],
                w[(j + 1) * nx + i + 1],
                w[(j + 1) * nx + i],
            ];
            let cell_edges = [
                edges.h(i, j),
                edges.v(i + 1, j),
                edges.h(i, j + 1),
                edges.v(i, j),
            ];
            let above = corner.map(|c| c > isovalue);
            let case = above
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &a)| acc | (u8::from(a) << k));
            match case {
                0 | 15 => {}
                5 | 10 => {
                    // Saddle: the corners on the centre's opposite side are
                    // cut off individually.
                    let centre = corner.iter().sum::<f64>() / 4.0;
                    let centre_above = centre > isovalue;
                    for k in 0..4 {
                        if above[k] != centre_above {
                            segments.push([cell_edges[(k + 3) % 4], cell_edges[k]]);
                        }
                    }
                }
                _ => {
                    let mut crossing = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]);
                    let a = crossing.next().expect("mixed case has two crossings");
                    let b = crossing.next().expect("mixed case has two crossings");
                    segments.push([cell_edges[a], cell_edges[b]]);
                }
            }
        }
    }

    let point = |e: usize| -> Point {
        let [(ia, ja), (ib, jb)] = edges.ends(e);
        let (wa, wb) = (w[ja * nx + ia], w[jb * nx + ib]);
        let t = ((isovalue - wa) / (wb - wa)).clamp(0.0, 1.0);
        let (xa, ya) = grid.position(ia, ja);
        let (xb, yb) = grid.position(ib, jb);
        [xa + t * (xb - xa), ya + t * (yb - ya)]
    };

    ContourSet {
        isovalue,
        polylines: stitch(&segments, edges.count(&grid))
            .into_iter()
            .map(|chain| chain.into_iter().map(point).collect())
            .collect(),
    }
}

/// Joins segments that share an edge into chains of edge ids. Open chains
/// come first (in order of their lowest segment), then closed loops, which
/// repeat their first edge at the end.
fn stitch(segments: &[[usize; 2]], n_edges: usize) -> Vec<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let mut incident = vec![[NONE; 2]; n_edges];
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            let slot = &mut incident[e];
            if slot[0] == NONE {
                slot[0] = s;
            } else {
                debug_assert_eq!(slot[1], NONE, "an edge borders at most two cells");
                slot[1] = s;
            }
        }
    }
    let degree = |e: usize| incident[e].iter().filter(|&&s| s != NONE).count();

    let mut used = vec![false; segments.len()];
    let walk = |start_seg: usize, start_edge: usize, used: &mut Vec<bool>| -> Vec<usize> {
        let mut chain = vec![start_edge];
        let (mut seg, mut edge) = (start_seg, start_edge);
        loop {
            used[seg] = true;
            let [a, b] = segments[seg];
            edge = if a == edge { b } else { a };
            chain.push(edge);
            match incident[edge].iter().find(|&&s| s != NONE && s != seg) {
                Some(&next) if !used[next] => seg = next,
                _ => break,
            }
        }
        chain
    };

    let mut chains = Vec::new();
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        for &e in &segments[s] {
            if degree(e) == 1 && !used[s] {
                chains.push(walk(s, e, &mut used));
            }
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            chains.push(walk(s, segments[s][0], &mut used));
        }
    }
    chains
}
