use crate::model::PhaseBox;

/// Node values of `f` on an `(n + 1) x (n + 1)` lattice covering a box,
/// shifted by an irrational fraction of a cell so that symmetric level sets
/// do not pass through nodes.
pub(crate) struct Lattice {
    n: usize,
    x0: f64,
    xi0: f64,
    dx: f64,
    dxi: f64,
    values: Vec<f64>,
}

const SHIFT: (f64, f64) = (std::f64::consts::FRAC_1_PI, 0.271_828_183);

pub(crate) fn phase_lattice(f: impl Fn(f64, f64) -> f64 + Sync, bx: PhaseBox, n: usize) -> Lattice {
    use rayon::prelude::*;
    let n = n.max(2);
    let dx = (bx.x.1 - bx.x.0) / n as f64;
    let dxi = (bx.xi.1 - bx.xi.0) / n as f64;
    let x0 = bx.x.0 - SHIFT.0 * dx;
    let xi0 = bx.xi.0 - SHIFT.1 * dxi;
    // one extra cell keeps the shifted lattice covering the box
    let n = n + 1;
    let values = (0..=n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let xi = xi0 + j as f64 * dxi;
            let f = &f;
            (0..=n).map(move |i| f(x0 + i as f64 * dx, xi))
        })
        .collect();
    Lattice { n, x0, xi0, dx, dxi, values }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Crossing {
    pub key: usize,
    pub point: (f64, f64),
}

impl Lattice {
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dx, self.dxi)
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.n + 1) + i]
    }

    fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.dx, self.xi0 + j as f64 * self.dxi)
    }

    fn crossing(&self, a: (usize, usize), b: (usize, usize), vertical: bool) -> Crossing {
        let (va, vb) = (self.value(a.0, a.1), self.value(b.0, b.1));
        let t = va / (va - vb);
        let (pa, pb) = (self.node(a.0, a.1), self.node(b.0, b.1));
        let key = 2 * (a.1 * (self.n + 1) + a.0) + vertical as usize;
        Crossing { key, point: (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)) }
    }

    /// Zero-level segments of cell `(i, j)`; saddle cells are resolved by
    /// the sign of the cell average.
    pub fn cell_segments(&self, i: usize, j: usize, mut emit: impl FnMut(Crossing, Crossing)) {
        let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let neg: Vec<bool> = corners.iter().map(|&(a, b)| self.value(a, b) < 0.0).collect();
        let edges = [(0usize, 1usize, false), (1, 2, true), (3, 2, false), (0, 3, true)];
        let mut found: [Option<Crossing>; 4] = [None; 4];
        for (slot, &(a, b, vertical)) in edges.iter().enumerate() {
            if neg[a] != neg[b] {
                found[slot] = Some(self.crossing(corners[a], corners[b], vertical));
            }
        }
        let count = found.iter().flatten().count();
        if count == 2 {
            let mut it = found.iter().flatten();
            let (p, q) = (*it.next().unwrap(), *it.next().unwrap());
            emit(p, q);
        } else if count == 4 {
            let centre: f64 = corners.iter().map(|&(a, b)| self.value(a, b)).sum::<f64>() / 4.0;
            let [e0, e1, e2, e3] = found.map(|c| c.unwrap());
            if (centre < 0.0) == neg[0] {
                emit(e0, e1);
                emit(e2, e3);
            } else {
                emit(e3, e0);
                emit(e1, e2);
            }
        }
    }

    pub fn row_segments(&self, j: usize, mut emit: impl FnMut((f64, f64), (f64, f64))) {
        if j >= self.n {
            return;
        }
        for i in 0..self.n {
            self.cell_segments(i, j, |p, q| emit(p.point, q.point));
        }
    }
}
