//! Zero contour and connected components of a function sampled on the
//! chart, for curvature regions on surfaces without symmetry.

use std::collections::HashMap;

use wagner_core::geom::{Coordinate, SurfaceChart};

pub struct Grid {
    u: Vec<f64>,
    v: Vec<f64>,
    /// `vals[i * v.len() + j]` at `(u[i], v[j])`.
    vals: Vec<f64>,
    periodic: [bool; 2],
    step: [f64; 2],
}

fn nodes(c: &Coordinate, n: usize) -> (Vec<f64>, f64) {
    let (lo, hi) = c.sample_range();
    if c.periodic {
        let h = (hi - lo) / n as f64;
        ((0..n).map(|i| lo + h * i as f64).collect(), h)
    } else {
        let inset = 1e-6 * (hi - lo);
        let (lo, hi) = (lo + inset, hi - inset);
        let h = (hi - lo) / (n - 1) as f64;
        ((0..n).map(|i| lo + h * i as f64).collect(), h)
    }
}

impl Grid {
    pub fn sample<E>(
        chart: &SurfaceChart,
        n: usize,
        f: impl Fn(f64, f64) -> Result<f64, E>,
    ) -> Result<Self, E> {
        let (u, du) = nodes(&chart.u1, n);
        let (v, dv) = nodes(&chart.u2, n);
        let mut vals = Vec::with_capacity(u.len() * v.len());
        for &a in &u {
            for &b in &v {
                vals.push(f(a, b)?);
            }
        }
        Ok(Grid {
            u,
            v,
            vals,
            periodic: [chart.u1.periodic, chart.u2.periodic],
            step: [du, dv],
        })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.v.len() + j]
    }

    /// Neighbour index along an axis, wrapping periodic axes.
    fn next(&self, axis: usize, i: usize) -> Option<usize> {
        let n = if axis == 0 {
            self.u.len()
        } else {
            self.v.len()
        };
        if i + 1 < n {
            Some(i + 1)
        } else if self.periodic[axis] {
            Some(0)
        } else {
            None
        }
    }

    fn prev(&self, axis: usize, i: usize) -> Option<usize> {
        let n = if axis == 0 {
            self.u.len()
        } else {
            self.v.len()
        };
        if i > 0 {
            Some(i - 1)
        } else if self.periodic[axis] {
            Some(n - 1)
        } else {
            None
        }
    }

    /// Polylines where the sampled function crosses zero (marching squares
    /// with linear interpolation along cell edges).
    pub fn zero_contour(&self) -> Vec<Vec<[f64; 2]>> {
        let mut segments: Vec<[[f64; 2]; 2]> = Vec::new();
        for i in 0..self.u.len() {
            let Some(i1) = self.next(0, i) else { continue };
            for j in 0..self.v.len() {
                let Some(j1) = self.next(1, j) else { continue };
                let (x0, y0) = (self.u[i], self.v[j]);
                let (x1, y1) = (x0 + self.step[0], y0 + self.step[1]);
                // Corners counter-clockwise from (x0, y0).
                let f = [
                    self.at(i, j),
                    self.at(i1, j),
                    self.at(i1, j1),
                    self.at(i, j1),
                ];
                let p = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
                let cross = |a: usize, b: usize| {
                    let s = f[a] / (f[a] - f[b]);
                    [
                        p[a][0] + s * (p[b][0] - p[a][0]),
                        p[a][1] + s * (p[b][1] - p[a][1]),
                    ]
                };
                let inside: Vec<bool> = f.iter().map(|&x| x <= 0.0).collect();
                let edges: Vec<usize> = (0..4)
                    .filter(|&e| inside[e] != inside[(e + 1) % 4])
                    .collect();
                match edges.len() {
                    2 => segments.push([
                        cross(edges[0], (edges[0] + 1) % 4),
                        cross(edges[1], (edges[1] + 1) % 4),
                    ]),
                    4 => {
                        // Saddle: pair edges according to the centre value.
                        let centre_inside = f.iter().sum::<f64>() <= 0.0;
                        let e = |k: usize| cross(k, (k + 1) % 4);
                        if centre_inside == inside[0] {
                            segments.push([e(0), e(1)]);
                            segments.push([e(2), e(3)]);
                        } else {
                            segments.push([e(3), e(0)]);
                            segments.push([e(1), e(2)]);
                        }
                    }
                    _ => {}
                }
            }
        }
        chain(segments)
    }

    /// Labels of the connected components of `{f ≤ 0}` on the nodes.
    fn components(&self) -> Vec<Option<usize>> {
        let (nu, nv) = (self.u.len(), self.v.len());
        let mut label = vec![None; nu * nv];
        let mut next_label = 0;
        for start in 0..nu * nv {
            if label[start].is_some() || self.vals[start] > 0.0 {
                continue;
            }
            let mut stack = vec![start];
            label[start] = Some(next_label);
            while let Some(k) = stack.pop() {
                let (i, j) = (k / nv, k % nv);
                let nbrs = [
                    self.next(0, i).map(|a| (a, j)),
                    self.prev(0, i).map(|a| (a, j)),
                    self.next(1, j).map(|b| (i, b)),
                    self.prev(1, j).map(|b| (i, b)),
                ];
                for (a, b) in nbrs.into_iter().flatten() {
                    let m = a * nv + b;
                    if label[m].is_none() && self.vals[m] <= 0.0 {
                        label[m] = Some(next_label);
                        stack.push(m);
                    }
                }
            }
            next_label += 1;
        }
        label
    }

    /// Component labels of the sublevel nodes around `p` (the nearest node
    /// and its eight neighbours).
    fn labels_near(&self, labels: &[Option<usize>], p: [f64; 2]) -> Vec<usize> {
        let index = |axis: usize, x: f64| -> Option<usize> {
            let (grid, n) = if axis == 0 {
                (&self.u, self.u.len())
            } else {
                (&self.v, self.v.len())
            };
            let k = ((x - grid[0]) / self.step[axis]).round();
            if self.periodic[axis] {
                Some(k.rem_euclid(n as f64) as usize)
            } else if k >= 0.0 && k < n as f64 {
                Some(k as usize)
            } else {
                None
            }
        };
        let (Some(i), Some(j)) = (index(0, p[0]), index(1, p[1])) else {
            return vec![];
        };
        let around = |axis: usize, k: usize| [self.prev(axis, k), Some(k), self.next(axis, k)];
        let mut out = Vec::new();
        for a in around(0, i).into_iter().flatten() {
            for b in around(1, j).into_iter().flatten() {
                if let Some(l) = labels[a * self.v.len() + b] {
                    if !out.contains(&l) {
                        out.push(l);
                    }
                }
            }
        }
        out
    }

    /// Whether every point lies next to the sublevel component that
    /// contains `points[0]`.
    pub fn same_component(&self, points: &[[f64; 2]]) -> bool {
        let labels = self.components();
        let Some(first) = points.first() else {
            return true;
        };
        let start = self.labels_near(&labels, *first);
        points.iter().all(|&p| {
            self.labels_near(&labels, p)
                .iter()
                .any(|l| start.contains(l))
        })
    }
}

/// Joins segments that share endpoints into polylines.
fn chain(segments: Vec<[[f64; 2]; 2]>) -> Vec<Vec<[f64; 2]>> {
    let key = |p: [f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
    let mut ends: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (n, s) in segments.iter().enumerate() {
        ends.entry(key(s[0])).or_default().push(n);
        ends.entry(key(s[1])).or_default().push(n);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for n in 0..segments.len() {
        if used[n] {
            continue;
        }
        used[n] = true;
        let mut line = vec![segments[n][0], segments[n][1]];
        // Grow forward from the tail, then backward from the head.
        for _ in 0..2 {
            loop {
                let tail = *line.last().unwrap();
                let next = ends
                    .get(&key(tail))
                    .and_then(|c| c.iter().copied().find(|&m| !used[m]));
                let Some(m) = next else { break };
                used[m] = true;
                let s = segments[m];
                line.push(if key(s[0]) == key(tail) { s[1] } else { s[0] });
            }
            line.reverse();
        }
        lines.push(line);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use wagner_core::catalog::custom_profile;
    use wagner_core::expr::parse;

    fn plane() -> SurfaceChart {
        // Flat metric on a square, u periodic.
        custom_profile(
            "flat",
            parse("1").unwrap(),
            Coordinate::interval(-2.0, 2.0),
            Some(4.0),
        )
        .unwrap()
    }

    #[test]
    fn circle_contour_is_one_closed_loop() {
        let chart = plane();
        let g = Grid::sample(&chart, 80, |u, v| {
            Ok::<_, ()>((u - 2.0).powi(2) + v * v - 1.0)
        })
        .unwrap();
        let lines = g.zero_contour();
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(l.len() > 100);
        let (a, b) = (l[0], l[l.len() - 1]);
        assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        for p in l {
            let r = ((p[0] - 2.0).powi(2) + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 2e-3, "{r}");
        }
    }

    #[test]
    fn components_separate_two_discs() {
        let chart = plane();
        let f = |u: f64, v: f64| {
            Ok::<_, ()>(((u - 1.0).powi(2) + v * v - 0.25).min((u - 3.0).powi(2) + v * v - 0.25))
        };
        let g = Grid::sample(&chart, 80, f).unwrap();
        assert!(g.same_component(&[[1.0, 0.0], [1.2, 0.1], [0.8, -0.2]]));
        assert!(!g.same_component(&[[1.0, 0.0], [3.0, 0.0]]));
    }

    #[test]
    fn components_wrap_across_the_seam() {
        let chart = plane();
        // Band around u = 0 ≡ 4: u = 1 and u = 3 connect only across the seam.
        let g = Grid::sample(&chart, 64, |u, _| Ok::<_, ()>(0.5 - (u - 2.0).abs())).unwrap();
        assert!(g.same_component(&[[1.0, 0.0], [3.0, 1.0], [0.1, -1.0], [3.9, 0.5]]));
        assert!(!g.same_component(&[[1.0, 0.0], [2.0, 0.0]]));
    }
}
