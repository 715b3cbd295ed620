//! Random fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use gridsplit::merger::{Cell, CellSet, TextItem};
use gridsplit::metrics::{grits, GritsMode};
use gridsplit::numerics::sigmoid;
use gridsplit::structure::{grid_matrix_view, GridEntry, GridMatrixView, HtmlNode, HtmlTree, Tag};
use rand::seq::SliceRandom;
use rand::Rng;

const WORDS: [&str; 6] = ["", "a", "ab", "ba", "abc", "7"];

/// A random partition of an `m×n` grid into rectangles; about one cell in
/// three spans more than one slot.
pub fn random_cells<R: Rng>(m: usize, n: usize, rng: &mut R) -> CellSet {
    let mut taken = vec![false; m * n];
    let mut cells = Vec::new();
    let mut k = 0;
    for r in 0..m {
        for c in 0..n {
            if taken[r * n + c] {
                continue;
            }
            let (mut h, mut w) = (1, 1);
            if rng.gen_bool(0.3) {
                w = rng.gen_range(1..=n - c);
                // stop at the first slot already owned by an earlier cell
                w = (1..=w).take_while(|&d| !taken[r * n + c + d - 1]).last().unwrap_or(1);
                h = rng.gen_range(1..=m - r);
            }
            for dr in 0..h {
                for dc in 0..w {
                    taken[(r + dr) * n + c + dc] = true;
                }
            }
            let word = *WORDS.choose(rng).unwrap();
            let content = if word.is_empty() {
                Vec::new()
            } else {
                k += 1;
                vec![TextItem {
                    id: format!("t{k}"),
                    text: Some(word.to_string()),
                }]
            };
            cells.push(Cell {
                row_start: r,
                row_end: r + h - 1,
                col_start: c,
                col_end: c + w - 1,
                quad: None,
                content,
            });
        }
    }
    CellSet { m, n, cells }
}

/// Random ordered tree with `size` nodes: node `k` hangs under a random
/// earlier node, after that node's existing children.
pub fn random_tree<R: Rng>(size: usize, rng: &mut R) -> HtmlTree {
    let tags = [Tag::Table, Tag::Tr, Tag::Td];
    let mut nodes: Vec<HtmlNode> = Vec::new();
    let mut parent = Vec::new();
    for k in 0..size {
        let mut node = HtmlNode::new(*tags.choose(rng).unwrap());
        node.colspan = rng.gen_range(1..=2);
        let word = *WORDS.choose(rng).unwrap();
        node.content = (!word.is_empty()).then(|| word.to_string());
        nodes.push(node);
        parent.push(if k == 0 { None } else { Some(rng.gen_range(0..k)) });
    }
    for k in (1..size).rev() {
        let child = nodes[k].clone();
        nodes[parent[k].unwrap()].children.insert(0, child);
    }
    HtmlTree {
        root: nodes.into_iter().next(),
    }
}

/// Exhaustive edit-mapping search: the cheapest set of node pairs that
/// keeps ancestry and left-to-right order, with unmapped nodes costing 1.
pub fn ted_exhaustive(a: &HtmlTree, b: &HtmlTree, struct_only: bool) -> f64 {
    struct Flat {
        nodes: Vec<HtmlNode>,
        /// Preorder position and subtree size.
        pre: Vec<usize>,
        size: Vec<usize>,
    }
    fn flatten(t: &HtmlTree) -> Flat {
        fn walk(n: &HtmlNode, f: &mut Flat) -> usize {
            let at = f.nodes.len();
            f.nodes.push(HtmlNode {
                children: Vec::new(),
                ..n.clone()
            });
            f.pre.push(at);
            f.size.push(0);
            let mut s = 1;
            for ch in &n.children {
                s += walk(ch, f);
            }
            f.size[at] = s;
            s
        }
        let mut f = Flat {
            nodes: Vec::new(),
            pre: Vec::new(),
            size: Vec::new(),
        };
        if let Some(r) = &t.root {
            walk(r, &mut f);
        }
        f
    }
    fn is_anc(f: &Flat, x: usize, y: usize) -> bool {
        x < y && y < x + f.size[x]
    }
    // x precedes y: x comes first in preorder and is not an ancestor
    fn left_of(f: &Flat, x: usize, y: usize) -> bool {
        x < y && !is_anc(f, x, y)
    }
    #[allow(clippy::too_many_arguments)]
    fn search(i: usize, fa: &Flat, fb: &Flat, used: &mut Vec<bool>, pairs: &mut Vec<(usize, usize)>, cost: f64, best: &mut f64, so: bool) {
        if cost >= *best {
            return;
        }
        if i == fa.nodes.len() {
            *best = best.min(cost + used.iter().filter(|u| !**u).count() as f64);
            return;
        }
        search(i + 1, fa, fb, used, pairs, cost + 1.0, best, so);
        for j in 0..fb.nodes.len() {
            if used[j] {
                continue;
            }
            let fits = pairs.iter().all(|&(p, q)| {
                is_anc(fa, p, i) == is_anc(fb, q, j)
                    && is_anc(fa, i, p) == is_anc(fb, j, q)
                    && left_of(fa, p, i) == left_of(fb, q, j)
                    && left_of(fa, i, p) == left_of(fb, j, q)
            });
            if !fits {
                continue;
            }
            used[j] = true;
            pairs.push((i, j));
            let c = gridsplit::metrics::ted::rename_cost(&fa.nodes[i], &fb.nodes[j], so);
            search(i + 1, fa, fb, used, pairs, cost + c, best, so);
            pairs.pop();
            used[j] = false;
        }
    }
    let (fa, fb) = (flatten(a), flatten(b));
    let mut best = (fa.nodes.len() + fb.nodes.len()) as f64;
    let mut used = vec![false; fb.nodes.len()];
    search(0, &fa, &fb, &mut used, &mut Vec::new(), 0.0, &mut best, struct_only);
    best
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| (0..n).filter(|&i| s >> i & 1 == 1).collect())
        .collect()
}

fn entry_score(a: &GridEntry, b: &GridEntry, mode: GritsMode) -> f64 {
    match mode {
        GritsMode::Topology => {
            ((a.rowspan, a.colspan, a.row_offset, a.col_offset) == (b.rowspan, b.colspan, b.row_offset, b.col_offset)) as u8 as f64
        }
        GritsMode::Content => {
            let (x, y): (Vec<char>, Vec<char>) = (a.content.chars().collect(), b.content.chars().collect());
            if x.is_empty() && y.is_empty() {
                return 1.0;
            }
            // longest common subsequence by subset enumeration of `x`
            let mut lcs = 0;
            for s in 0u32..1 << x.len() {
                let sub: Vec<char> = (0..x.len()).filter(|&i| s >> i & 1 == 1).map(|i| x[i]).collect();
                let mut it = y.iter();
                if sub.iter().all(|c| it.any(|d| d == c)) {
                    lcs = lcs.max(sub.len());
                }
            }
            2.0 * lcs as f64 / (x.len() + y.len()) as f64
        }
    }
}

/// GriTS by trying every pair of equally sized row subsets against every
/// pair of equally sized column subsets.
pub fn grits_exhaustive(a: &GridMatrixView, b: &GridMatrixView, mode: GritsMode) -> f64 {
    if a.is_empty() || b.is_empty() {
        return (a.is_empty() && b.is_empty()) as u8 as f64;
    }
    let mut best = 0.0f64;
    for kr in 0..=a.m.min(b.m) {
        for ra in subsets(a.m, kr) {
            for rb in subsets(b.m, kr) {
                for kc in 0..=a.n.min(b.n) {
                    for ca in subsets(a.n, kc) {
                        for cb in subsets(b.n, kc) {
                            let s: f64 = ra
                                .iter()
                                .zip(&rb)
                                .flat_map(|(&ia, &ib)| ca.iter().zip(&cb).map(move |(&ja, &jb)| (ia, ja, ib, jb)))
                                .map(|(ia, ja, ib, jb)| entry_score(a.at(ia, ja), b.at(ib, jb), mode))
                                .sum();
                            best = best.max(s);
                        }
                    }
                }
            }
        }
    }
    2.0 * best / (a.entries.len() + b.entries.len()) as f64
}

/// Library GriTS on two cell sets.
pub fn grits_of(a: &CellSet, b: &CellSet, mode: GritsMode) -> (f64, f64) {
    let (va, vb) = (grid_matrix_view(a).unwrap(), grid_matrix_view(b).unwrap());
    (grits(&va, &vb, mode), grits_exhaustive(&va, &vb, mode))
}

/// Picks by definition: an index is kept when it is on and no on-neighbour
/// reachable without crossing an off index beats it; ties go left.
pub fn nms_brute_force(s: &[f64], threshold: f64) -> Vec<usize> {
    let on = |i: usize| sigmoid(s[i]) >= threshold;
    (0..s.len())
        .filter(|&i| on(i))
        .filter(|&i| {
            let (mut lo, mut hi) = (i, i);
            while lo > 0 && on(lo - 1) {
                lo -= 1;
            }
            while hi + 1 < s.len() && on(hi + 1) {
                hi += 1;
            }
            (lo..=hi).all(|j| {
                let (pj, pi) = (sigmoid(s[j]), sigmoid(s[i]));
                pj < pi || (pj == pi && j >= i)
            })
        })
        .collect()
}
