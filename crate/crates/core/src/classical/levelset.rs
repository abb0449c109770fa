use std::collections::HashMap;

use serde::Serialize;

use super::marching::phase_lattice;
use crate::model::{eval_symbol, Family, LeadingForm, PhaseBox, SymbolModel};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetTopology {
    pub energy: f64,
    pub components: usize,
    pub connected: bool,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn add(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Connected components of `{p = E}` traced by marching squares.
///
/// Crossings near a critical point on the level are joined: the lattice
/// cannot resolve branches meeting there.
pub fn levelset_connected(model: &SymbolModel, e: f64, resolution: usize) -> Result<LevelSetTopology> {
    let bx = level_box(model, e)?;
    let lattice = phase_lattice(|x, xi| eval_symbol(model, crate::model::PhasePoint::new(x, xi)) - e, bx, resolution);
    let (dx, dxi) = lattice.spacing();
    let cell = dx.hypot(dxi);
    let centres: Vec<(f64, f64, f64)> = model
        .critical_points_at(e)
        .iter()
        .map(|c| {
            // a maximum of order 2k pinches the level into cusps |xi| ~ sqrt(a) |x - x0|^k,
            // unresolved until the cusp is two cells wide
            let reach = match (&c.leading_form, c.potential_k()) {
                (LeadingForm::Potential(form), Some(k)) => {
                    let a = form.leading_coefficient().abs().max(f64::MIN_POSITIVE);
                    1.5 * (2.0 * dxi / a.sqrt()).powf(1.0 / k as f64)
                }
                _ => 0.0,
            };
            (c.x0, c.xi0, reach.max(3.0 * cell))
        })
        .collect();
    let mut uf = UnionFind::new();
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut hubs: Vec<Option<usize>> = vec![None; centres.len()];
    for j in 0..lattice.cells() {
        for i in 0..lattice.cells() {
            lattice.cell_segments(i, j, |p, q| {
                let mut node = |c: super::marching::Crossing, uf: &mut UnionFind| {
                    let id = *ids.entry(c.key).or_insert_with(|| uf.add());
                    for (k, z) in centres.iter().enumerate() {
                        if (c.point.0 - z.0).hypot(c.point.1 - z.1) <= z.2 {
                            let hub = *hubs[k].get_or_insert_with(|| uf.add());
                            uf.union(id, hub);
                        }
                    }
                    id
                };
                let a = node(p, &mut uf);
                let b = node(q, &mut uf);
                uf.union(a, b);
            });
        }
    }
    let mut roots: Vec<usize> = ids.values().map(|&id| uf.find(id)).collect();
    roots.sort_unstable();
    roots.dedup();
    let components = roots.len();
    Ok(LevelSetTopology { energy: e, components, connected: components == 1 })
}

fn level_box(model: &SymbolModel, e: f64) -> Result<PhaseBox> {
    let mut bx = model.sublevel_box(e)?.padded(0.1);
    if matches!(model.family, Family::Radial2d { .. }) {
        bx.x.0 = bx.x.0.max(0.0);
    }
    let w = (bx.x.1 - bx.x.0).max(bx.xi.1 - bx.xi.0).max(1e-6);
    let pad = |(a, b): (f64, f64)| if b - a < 1e-3 * w { (a - 1e-3 * w, b + 1e-3 * w) } else { (a, b) };
    Ok(PhaseBox { x: pad(bx.x), xi: pad(bx.xi) })
}
