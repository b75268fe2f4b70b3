//! Windows (finite subdivision trees of a CZ set) and step functions on
//! their cells.
//!
//! A [`Window`] is a rooted tree of admissible sets in which the children of
//! every node partition it; the leaves are the *cells*.  A [`StepFn`] assigns
//! one value per cell.  All integrals are exact sums of value × measure over
//! cells, with box clipping exact for dyadic coordinates, so identities like
//! additivity over subtrees hold to rounding error only.

use std::ops::Range;

use rand::Rng;

use crate::czset::{CzBox, CzSet};
use crate::geometry::Point;
use crate::grid::{Grid, GridError, SetId};

#[derive(Debug, thiserror::Error)]
pub enum WindowError {
    #[error("window tree is invalid: {0}")]
    Tree(String),
    #[error("subdivision failed: {0}")]
    Split(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One node of a window tree.  Children always carry larger indices than
/// their parent, and `cells` is the contiguous range of cell indices below.
#[derive(Clone, Debug)]
pub struct Node {
    pub set: CzSet,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub cells: Range<usize>,
    pub depth: u32,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A finite subdivision tree of a root set; leaves are the cells step
/// functions live on.
#[derive(Clone, Debug)]
pub struct Window {
    nodes: Vec<Node>,
    leaves: Vec<usize>,
}

/// Tree builder shared by the constructors: `expand` returns the child sets
/// of a node, or an empty vector to make it a leaf.
fn grow<E>(root: CzSet, expand: &mut dyn FnMut(&CzSet, u32) -> Result<Vec<CzSet>, E>) -> Result<Window, E> {
    let mut nodes = vec![Node { set: root, parent: None, children: Vec::new(), cells: 0..0, depth: 0 }];
    let mut leaves = Vec::new();
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        let kids = expand(&nodes[i].set, nodes[i].depth)?;
        if kids.is_empty() {
            leaves.push(i);
            continue;
        }
        let depth = nodes[i].depth + 1;
        // Push children in reverse so the DFS visits them in natural order.
        let mut idx: Vec<usize> = Vec::with_capacity(kids.len());
        for set in kids {
            idx.push(nodes.len());
            nodes.push(Node { set, parent: Some(i), children: Vec::new(), cells: 0..0, depth });
        }
        nodes[i].children = idx.clone();
        for &c in idx.iter().rev() {
            stack.push(c);
        }
    }
    Ok(finish(nodes))
}

/// Recomputes leaf order and per-node cell ranges from the tree shape.
fn finish(mut nodes: Vec<Node>) -> Window {
    fn assign(nodes: &mut Vec<Node>, i: usize, leaves: &mut Vec<usize>) {
        if nodes[i].children.is_empty() {
            nodes[i].cells = leaves.len()..leaves.len() + 1;
            leaves.push(i);
            return;
        }
        let start = leaves.len();
        let kids = nodes[i].children.clone();
        for c in kids {
            assign(nodes, c, leaves);
        }
        nodes[i].cells = start..leaves.len();
    }
    let mut leaves = Vec::new();
    assign(&mut nodes, 0, &mut leaves);
    Window { nodes, leaves }
}

impl Window {
    /// Uniform canonical-split tree of the given depth.
    pub fn from_splits(root: CzSet, depth: u32) -> Result<Window, WindowError> {
        grow(root, &mut |set, d| {
            if d >= depth {
                return Ok(Vec::new());
            }
            set.split()
                .map(|sp| sp.children)
                .map_err(|e| WindowError::Split(e.to_string()))
        })
    }

    /// Subtree of the grid below `root`, cut off `depth` levels down.  Unlike
    /// [`Window::from_splits`] this follows the grid through chain junctions.
    pub fn from_grid(grid: &Grid, root: &SetId, depth: u32) -> Result<Window, WindowError> {
        let mut nodes = vec![Node {
            set: grid.resolve(root)?,
            parent: None,
            children: Vec::new(),
            cells: 0..0,
            depth: 0,
        }];
        let mut ids = vec![root.clone()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if nodes[i].depth >= depth {
                continue;
            }
            let kids = grid.children(&ids[i])?;
            let d = nodes[i].depth + 1;
            let mut idx = Vec::with_capacity(kids.len());
            for k in kids {
                let set = grid.resolve(&k)?;
                idx.push(nodes.len());
                ids.push(k);
                nodes.push(Node { set, parent: Some(i), children: Vec::new(), cells: 0..0, depth: d });
            }
            nodes[i].children = idx.clone();
            for &c in idx.iter().rev() {
                stack.push(c);
            }
        }
        Ok(finish(nodes))
    }

    /// Re-roots `inner` below a strictly larger grid set.  `path` descends the
    /// grid from the new root to the old one (each entry the parent of the
    /// next); off-path siblings become unsplit leaves.  Returns the enlarged
    /// window, `f` extended by zero onto it, and the node index the old root
    /// landed on.
    pub fn enlarged(
        grid: &Grid,
        path: &[SetId],
        inner: &Window,
        f: &StepFn,
    ) -> Result<(Window, StepFn, usize), WindowError> {
        assert!(path.len() >= 2, "enlargement needs a strictly larger root");
        let mut nodes: Vec<Node> = Vec::new();
        let mut value_of: Vec<Option<f64>> = Vec::new();
        let mut graft = 0usize;
        // (id, parent index, depth, position in `path` if on it)
        let mut stack: Vec<(SetId, Option<usize>, u32, Option<usize>)> =
            vec![(path[0].clone(), None, 0, Some(0))];
        while let Some((id, parent, depth, pos)) = stack.pop() {
            if pos == Some(path.len() - 1) {
                // The old root: splice the whole inner tree in as a subtree.
                let base = nodes.len();
                if let Some(pi) = parent {
                    nodes[pi].children.push(base);
                }
                graft = base;
                for (j, nd) in inner.nodes.iter().enumerate() {
                    nodes.push(Node {
                        set: nd.set.clone(),
                        parent: if j == 0 { parent } else { nd.parent.map(|p| p + base) },
                        children: nd.children.iter().map(|c| c + base).collect(),
                        cells: 0..0,
                        depth: depth + nd.depth,
                    });
                    value_of.push(if nd.is_leaf() {
                        Some(f.values[nd.cells.start])
                    } else {
                        None
                    });
                }
                continue;
            }
            let idx = nodes.len();
            if let Some(pi) = parent {
                nodes[pi].children.push(idx);
            }
            let set = grid.resolve(&id)?;
            match pos {
                Some(k) => {
                    nodes.push(Node { set, parent, children: Vec::new(), cells: 0..0, depth });
                    value_of.push(None);
                    let kids = grid.children(&id)?;
                    for kid in kids.into_iter().rev() {
                        let kpos = (kid == path[k + 1]).then_some(k + 1);
                        stack.push((kid, Some(idx), depth + 1, kpos));
                    }
                }
                // Off the path: an unsplit zero-valued leaf.
                None => {
                    nodes.push(Node { set, parent, children: Vec::new(), cells: 0..0, depth });
                    value_of.push(Some(0.0));
                }
            }
        }
        let w = finish(nodes);
        let values = w.leaves.iter().map(|&i| value_of[i].expect("leaves carry values")).collect();
        Ok((w, StepFn { values }, graft))
    }

    /// Random non-uniform canonical-split tree: the root always splits, then
    /// each node splits with probability `p` until `max_depth`.  The DFS visit
    /// order is deterministic, so a seeded generator reproduces the tree.
    pub fn random<R: Rng>(rng: &mut R, root: CzSet, max_depth: u32, p: f64) -> Window {
        grow::<std::convert::Infallible>(root, &mut |set, d| {
            let split_now = d == 0 || (d < max_depth && rng.gen_bool(p));
            if !split_now {
                return Ok(Vec::new());
            }
            Ok(set.split().map(|sp| sp.children).unwrap_or_default())
        })
        .unwrap()
    }

    pub fn root(&self) -> &CzSet {
        &self.nodes[0].set
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn cell_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn cell_node(&self, cell: usize) -> usize {
        self.leaves[cell]
    }

    pub fn cell(&self, cell: usize) -> &CzSet {
        &self.nodes[self.leaves[cell]].set
    }

    pub fn cell_measure(&self, cell: usize) -> f64 {
        self.cell(cell).measure()
    }

    pub fn measure(&self) -> f64 {
        self.root().measure()
    }

    /// Cell containing `p`, or None outside the root.
    pub fn locate_cell(&self, p: &Point) -> Option<usize> {
        if !self.root().contains(p) {
            return None;
        }
        let mut i = 0usize;
        while !self.nodes[i].is_leaf() {
            i = *self.nodes[i]
                .children
                .iter()
                .find(|&&c| self.nodes[c].set.contains(p))
                .expect("children partition their parent");
        }
        Some(self.nodes[i].cells.start)
    }

    /// Node indices from the cell's leaf up to the root.
    pub fn ancestors_of_cell(&self, cell: usize) -> Vec<usize> {
        let mut out = vec![self.leaves[cell]];
        while let Some(p) = self.nodes[*out.last().unwrap()].parent {
            out.push(p);
        }
        out
    }

    /// ∫ f dρ over the whole window.
    pub fn integral(&self, f: &StepFn) -> f64 {
        (0..self.cell_count()).map(|c| f.values[c] * self.cell_measure(c)).sum()
    }

    /// ∫ over one node, by its cell range.
    pub fn node_integral(&self, f: &StepFn, node: usize) -> f64 {
        self.nodes[node]
            .cells
            .clone()
            .map(|c| f.values[c] * self.cell_measure(c))
            .sum()
    }

    pub fn average(&self, f: &StepFn, node: usize) -> f64 {
        self.node_integral(f, node) / self.nodes[node].set.measure()
    }

    /// One bottom-up pass of Σ map(v)·ρ(cell) per node; children precede
    /// nothing (indices increase downward), so a reverse sweep suffices.
    pub fn node_integrals(&self, f: &StepFn, map: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            if self.nodes[i].is_leaf() {
                out[i] = map(f.values[self.nodes[i].cells.start]) * self.nodes[i].set.measure();
            } else {
                out[i] = self.nodes[i].children.iter().map(|&c| out[c]).sum();
            }
        }
        out
    }

    /// Exact ∫_B f dρ for an arbitrary box B (cells clipped exactly).
    pub fn box_integral(&self, f: &StepFn, b: &CzBox) -> f64 {
        (0..self.cell_count())
            .map(|c| f.values[c] * self.cell(c).as_box().intersection_measure(b))
            .sum()
    }

    pub fn export_json(&self, f: &StepFn) -> String {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeJson { set: n.set.clone(), children: n.children.clone() })
            .collect();
        serde_json::to_string_pretty(&WindowJson { nodes, values: f.values.clone() })
            .expect("window serialization cannot fail")
    }

    pub fn import_json(s: &str) -> Result<(Window, StepFn), WindowError> {
        let raw: WindowJson = serde_json::from_str(s)?;
        let bad = |m: String| WindowError::Tree(m);
        if raw.nodes.is_empty() {
            return Err(bad("empty node list".into()));
        }
        let len = raw.nodes.len();
        let mut parent = vec![usize::MAX; len];
        for (i, n) in raw.nodes.iter().enumerate() {
            for &c in &n.children {
                if c <= i || c >= len {
                    return Err(bad(format!("child index {c} of node {i} out of order")));
                }
                if parent[c] != usize::MAX {
                    return Err(bad(format!("node {c} has two parents")));
                }
                parent[c] = i;
            }
        }
        if parent.iter().skip(1).any(|&p| p == usize::MAX) {
            return Err(bad("unreachable nodes present".into()));
        }
        for (i, n) in raw.nodes.iter().enumerate() {
            if !n.set.is_admissible() {
                return Err(bad(format!("node {i} is not admissible")));
            }
            if n.children.is_empty() {
                continue;
            }
            let pbox = n.set.as_box();
            let mut total = 0.0;
            for (a, &c) in n.children.iter().enumerate() {
                let cbox = raw.nodes[c].set.as_box();
                if !cbox.subset_of(&pbox) {
                    return Err(bad(format!("node {c} escapes its parent {i}")));
                }
                total += raw.nodes[c].set.measure();
                for &d in &n.children[a + 1..] {
                    if !cbox.disjoint_from(&raw.nodes[d].set.as_box()) {
                        return Err(bad(format!("children {c} and {d} of node {i} overlap")));
                    }
                }
            }
            let pm = n.set.measure();
            if (total - pm).abs() > 1e-12 * pm {
                return Err(bad(format!("children of node {i} do not fill it")));
            }
        }
        let mut nodes: Vec<Node> = raw
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| Node {
                set: n.set.clone(),
                parent: if i == 0 { None } else { Some(parent[i]) },
                children: n.children.clone(),
                cells: 0..0,
                depth: 0,
            })
            .collect();
        for i in 1..len {
            nodes[i].depth = nodes[parent[i]].depth + 1;
        }
        let w = finish(nodes);
        if raw.values.len() != w.cell_count() {
            return Err(bad(format!(
                "{} values for {} cells",
                raw.values.len(),
                w.cell_count()
            )));
        }
        if raw.values.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite cell value".into()));
        }
        let f = StepFn { values: raw.values };
        Ok((w, f))
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct NodeJson {
    set: CzSet,
    children: Vec<usize>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct WindowJson {
    nodes: Vec<NodeJson>,
    values: Vec<f64>,
}

/// A function constant on each window cell, stored as one value per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFn {
    pub values: Vec<f64>,
}

impl StepFn {
    pub fn from_values(w: &Window, values: Vec<f64>) -> StepFn {
        assert_eq!(values.len(), w.cell_count(), "one value per cell");
        StepFn { values }
    }

    pub fn constant(w: &Window, v: f64) -> StepFn {
        StepFn { values: vec![v; w.cell_count()] }
    }

    /// Indicator of the union of cells satisfying `pred`.
    pub fn indicator(w: &Window, pred: impl Fn(&CzSet) -> bool) -> StepFn {
        StepFn {
            values: (0..w.cell_count())
                .map(|c| if pred(w.cell(c)) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn random<R: Rng>(rng: &mut R, w: &Window, lo: f64, hi: f64) -> StepFn {
        StepFn { values: (0..w.cell_count()).map(|_| rng.gen_range(lo..hi)).collect() }
    }

    /// Values i.i.d. uniform on [lo, hi) masked by a Bernoulli(keep) sparsity
    /// draw per cell.
    pub fn random_sparse<R: Rng>(rng: &mut R, w: &Window, lo: f64, hi: f64, keep: f64) -> StepFn {
        StepFn {
            values: (0..w.cell_count())
                .map(|_| {
                    let v = rng.gen_range(lo..hi);
                    if rng.gen_bool(keep) { v } else { 0.0 }
                })
                .collect(),
        }
    }

    pub fn l1_norm(&self, w: &Window) -> f64 {
        (0..w.cell_count()).map(|c| self.values[c].abs() * w.cell_measure(c)).sum()
    }

    /// (Σ|v|^p ρ)^{1/p} for p ∈ (0, ∞); p = ∞ gives the sup norm.
    pub fn lp_norm(&self, w: &Window, p: f64) -> f64 {
        assert!(p > 0.0);
        if p.is_infinite() {
            return self.sup_norm();
        }
        (0..w.cell_count())
            .map(|c| self.values[c].abs().powf(p) * w.cell_measure(c))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// ρ{ |f| > α } within the window.
    pub fn distribution(&self, w: &Window, alpha: f64) -> f64 {
        (0..w.cell_count())
            .filter(|&c| self.values[c].abs() > alpha)
            .map(|c| w.cell_measure(c))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::czset::DyadicCube;
    use crate::grid::Half;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn root64() -> CzSet {
        CzSet::new(DyadicCube::new(6, vec![0]), 1.0, 1.0)
    }

    #[test]
    fn uniform_window_cells_in_dfs_order() {
        let w = Window::from_splits(root64(), 2).unwrap();
        assert_eq!(w.cell_count(), 4);
        let cells: Vec<String> = (0..4).map(|c| w.cell(c).canonical()).collect();
        assert_eq!(cells, vec![
            "1 5 0 0.5 0.5",
            "1 5 0 1.5 0.5",
            "1 5 1 0.5 0.5",
            "1 5 1 1.5 0.5",
        ]);
        let total: f64 = (0..4).map(|c| w.cell_measure(c)).sum();
        assert_eq!(total, w.measure());
    }

    #[test]
    fn node_cell_ranges_are_contiguous_subtrees() {
        let w = Window::from_splits(root64(), 3).unwrap();
        for (i, n) in w.nodes().iter().enumerate() {
            if n.is_leaf() {
                assert_eq!(n.cells.len(), 1);
            } else {
                assert_eq!(n.cells.start, w.nodes()[n.children[0]].cells.start);
                assert_eq!(n.cells.end, w.nodes()[*n.children.last().unwrap()].cells.end);
            }
            for &c in &n.children {
                assert_eq!(w.nodes()[c].parent, Some(i));
            }
        }
    }

    #[test]
    fn integrals_are_additive_over_children() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Window::from_splits(root64(), 3).unwrap();
        let f = StepFn::random(&mut rng, &w, -1.0, 1.0);
        let per_node = w.node_integrals(&f, |v| v);
        for (i, n) in w.nodes().iter().enumerate() {
            if !n.is_leaf() {
                let s: f64 = n.children.iter().map(|&c| per_node[c]).sum();
                assert!((per_node[i] - s).abs() <= 1e-12 * s.abs().max(1.0));
            }
            assert!((per_node[i] - w.node_integral(&f, i)).abs() <= 1e-12 * per_node[i].abs().max(1.0));
        }
        assert!((w.integral(&f) - per_node[0]).abs() <= 1e-12 * per_node[0].abs().max(1.0));
    }

    #[test]
    fn box_integral_clips_cells_exactly() {
        let w = Window::from_splits(root64(), 1).unwrap();
        // Cells [0,32)×[0,2) and [32,64)×[0,2) with values 1 and -1.
        let f = StepFn::from_values(&w, vec![1.0, -1.0]);
        let whole = w.root().as_box();
        assert_eq!(w.box_integral(&f, &whole), 0.0);
        let left = CzBox::new(vec![0.0], 32.0, 1.0, 1.0);
        assert_eq!(w.box_integral(&f, &left), 64.0);
        let straddle = CzBox::new(vec![16.0], 32.0, 1.0, 1.0);
        assert_eq!(w.box_integral(&f, &straddle), 0.0);
        let quarter = CzBox::new(vec![0.0], 32.0, 0.5, 0.5);
        assert_eq!(w.box_integral(&f, &quarter), 32.0);
    }

    #[test]
    fn locate_cell_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = Window::random(&mut rng, root64(), 4, 0.6);
        for _ in 0..200 {
            let x = rng.gen_range(0.0..64.0);
            let t = rng.gen_range(0.0..2.0);
            let p = Point::new(vec![x], t);
            let c = w.locate_cell(&p).expect("inside the root");
            assert!(w.cell(c).contains(&p));
        }
        assert_eq!(w.locate_cell(&Point::new(vec![-0.5], 1.0)), None);
    }

    #[test]
    fn ancestors_climb_to_the_root() {
        let w = Window::from_splits(root64(), 3).unwrap();
        for c in 0..w.cell_count() {
            let anc = w.ancestors_of_cell(c);
            assert_eq!(*anc.last().unwrap(), 0);
            for pair in anc.windows(2) {
                assert_eq!(w.nodes()[pair[0]].parent, Some(pair[1]));
                let inner = w.nodes()[pair[0]].set.as_box();
                assert!(inner.subset_of(&w.nodes()[pair[1]].set.as_box()));
            }
        }
    }

    #[test]
    fn grid_window_follows_junctions() {
        let g = Grid::build(1, 8);
        let w = Window::from_grid(&g, &SetId::chain(Half::Upper, 8), 1).unwrap();
        // E⁸ = [0,4096)×[0,4) splits at the junction into the two band halves.
        assert_eq!(w.cell_count(), 2);
        assert_eq!(w.cell(0).canonical(), "1 12 0 1 1");
        assert_eq!(w.cell(1).canonical(), "1 12 0 3 1");
    }

    #[test]
    fn grid_window_matches_split_window_away_from_junctions() {
        let g = Grid::build(1, 6);
        let wg = Window::from_grid(&g, &SetId::chain(Half::Upper, 0), 2).unwrap();
        let ws = Window::from_splits(root64().split().unwrap().children[0].clone(), 2).unwrap();
        assert_eq!(wg.cell_count(), ws.cell_count());
        for c in 0..wg.cell_count() {
            assert_eq!(wg.cell(c).canonical(), ws.cell(c).canonical());
        }
    }

    #[test]
    fn norms_and_levels() {
        // Depth-1 split of [0,64)×[0,2) is a cube split: two cells of measure 64.
        let w = Window::from_splits(root64(), 1).unwrap();
        let f = StepFn::from_values(&w, vec![1.0, 0.0]);
        assert_eq!(f.l1_norm(&w), 64.0);
        assert_eq!(f.lp_norm(&w, 2.0), 8.0);
        assert_eq!(f.sup_norm(), 1.0);
        assert_eq!(f.distribution(&w, 0.5), 64.0);
        assert_eq!(f.distribution(&w, 1.0), 0.0);
    }

    #[test]
    fn json_round_trip_preserves_cells_and_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = Window::random(&mut rng, root64(), 3, 0.5);
        let f = StepFn::random(&mut rng, &w, -2.0, 2.0);
        let s = w.export_json(&f);
        let (w2, f2) = Window::import_json(&s).unwrap();
        assert_eq!(w.cell_count(), w2.cell_count());
        for c in 0..w.cell_count() {
            assert_eq!(w.cell(c).canonical(), w2.cell(c).canonical());
        }
        assert_eq!(f.values, f2.values);
    }

    #[test]
    fn json_import_rejects_broken_trees() {
        let w = Window::from_splits(root64(), 1).unwrap();
        let f = StepFn::constant(&w, 1.0);
        let good = w.export_json(&f);
        // Drop one child: the remaining children no longer fill the root.
        let bad = good.replace("\"children\": [\n        1,\n        2\n      ]", "\"children\": [\n        1\n      ]");
        assert!(bad != good, "fixture must actually edit the tree");
        assert!(Window::import_json(&bad).is_err());
        assert!(Window::import_json("{").is_err());
    }
}
