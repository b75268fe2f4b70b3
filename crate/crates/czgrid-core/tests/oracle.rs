//! Cross-checks the tree-walk maximal and sharp operators against a
//! brute-force geometric oracle that never touches the window's node pointers:
//! for every base cell it rescans each built grid level with `locate`, keeps
//! the located set when it contains the cell as a box, and evaluates averages
//! and oscillations by box clipping alone.

use czgrid_core::czset::CzBox;
use czgrid_core::grid::{Grid, SetId};
use czgrid_core::maximal::{dyadic_maximal, dyadic_sharp, Anchor, WindowSampler};
use czgrid_core::stepfn::{StepFn, Window};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

/// The grid ancestors of a cell, found per level by point location and kept
/// by geometric containment.  With `above_root` the scan runs to the built
/// chain top, otherwise it stops at the window root's level.
fn ancestors(grid: &Grid, root: &SetId, w: &Window, cell: usize, above_root: bool) -> Vec<CzBox> {
    let max_depth = w.nodes().iter().map(|n| n.depth).max().unwrap() as i64;
    let hi = if above_root { grid.top(root.half) as i64 } else { root.level() };
    let cell_box = w.cell(cell).as_box();
    let center = w.cell(cell).center();
    let mut out = Vec::new();
    for level in (root.level() - max_depth)..=hi {
        let id = grid.locate(&center, level).unwrap();
        let b = grid.resolve(&id).unwrap().as_box();
        if cell_box.subset_of(&b) {
            out.push(b);
        }
    }
    out
}

fn oracle_maximal(grid: &Grid, root: &SetId, w: &Window, f: &StepFn, above_root: bool) -> Vec<f64> {
    let fabs = StepFn::from_values(w, f.values.iter().map(|v| v.abs()).collect());
    (0..w.cell_count())
        .map(|cell| {
            ancestors(grid, root, w, cell, above_root)
                .iter()
                .map(|b| w.box_integral(&fabs, b) / b.measure())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Mean oscillation of the zero-extended f over one box, cell by cell:
/// ∫_B |f − m| = Σ_cells ρ(cell ∩ B)·|v − m| + (ρ(B) − ρ(w ∩ B))·|m|.
fn box_oscillation(w: &Window, f: &StepFn, b: &CzBox) -> f64 {
    let rho = b.measure();
    let m = w.box_integral(f, b) / rho;
    let mut dev = 0.0;
    let mut covered = 0.0;
    for cell in 0..w.cell_count() {
        let inter = w.cell(cell).as_box().intersection_measure(b);
        dev += inter * (f.values[cell] - m).abs();
        covered += inter;
    }
    (dev + (rho - covered).max(0.0) * m.abs()) / rho
}

fn oracle_sharp(grid: &Grid, root: &SetId, w: &Window, f: &StepFn, above_root: bool) -> Vec<f64> {
    (0..w.cell_count())
        .map(|cell| {
            ancestors(grid, root, w, cell, above_root)
                .iter()
                .map(|b| box_oscillation(w, f, b))
                .fold(0.0, f64::max)
        })
        .collect()
}

fn compare(tag: &str, got: &StepFn, want: &[f64]) {
    for (cell, (&g, &o)) in got.values.iter().zip(want).enumerate() {
        assert!(close(g, o), "{tag}, cell {cell}: tree walk {g} vs oracle {o}");
    }
}

#[test]
fn tree_walk_matches_geometric_oracle() {
    let mut checked = 0u32;
    for (n, windows, seed) in [(1usize, 60u32, 11u64), (2, 40, 12)] {
        let grid = Grid::build(n, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = WindowSampler::default();
        for _ in 0..windows {
            let (root, w) = sampler.sample(&grid, &mut rng);
            assert!(w.cell_count() <= 64, "oracle budget assumes small windows");
            let f = sampler.sample_fn(&w, &mut rng);
            let anchor = Anchor::new(&grid, root.clone(), &w).unwrap();

            let m = dyadic_maximal(&w, &f, Some(&anchor)).unwrap();
            compare("anchored maximal", &m, &oracle_maximal(&grid, &root, &w, &f, true));
            let m0 = dyadic_maximal(&w, &f, None).unwrap();
            compare("in-window maximal", &m0, &oracle_maximal(&grid, &root, &w, &f, false));

            let s = dyadic_sharp(&w, &f, Some(&anchor)).unwrap();
            compare("anchored sharp", &s, &oracle_sharp(&grid, &root, &w, &f, true));
            let s0 = dyadic_sharp(&w, &f, None).unwrap();
            compare("in-window sharp", &s0, &oracle_sharp(&grid, &root, &w, &f, false));
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}
