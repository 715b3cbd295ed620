//! Ordered tree edit distance (Zhang–Shasha) and TEDS.

use crate::structure::{HtmlNode, HtmlTree, Tag};

/// Postorder view of a tree with leftmost-leaf indices and key roots.
struct Flat<'a> {
    nodes: Vec<&'a HtmlNode>,
    lml: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Flat<'a> {
    fn new(root: Option<&'a HtmlNode>) -> Self {
        fn walk<'a>(n: &'a HtmlNode, nodes: &mut Vec<&'a HtmlNode>, lml: &mut Vec<usize>) -> usize {
            let mut first = None;
            for ch in &n.children {
                let i = walk(ch, nodes, lml);
                first.get_or_insert(lml[i]);
            }
            nodes.push(n);
            lml.push(first.unwrap_or(nodes.len() - 1));
            nodes.len() - 1
        }
        let (mut nodes, mut lml) = (Vec::new(), Vec::new());
        if let Some(r) = root {
            walk(r, &mut nodes, &mut lml);
        }
        let mut keyroots: Vec<usize> = (0..nodes.len())
            .filter(|&i| !(i + 1..nodes.len()).any(|j| lml[j] == lml[i]))
            .collect();
        keyroots.sort_unstable();
        Self { nodes, lml, keyroots }
    }
}

/// Substitution cost between two nodes.
///
/// Different tags cost 1. Cells with different spans cost 1; otherwise
/// their content costs the normalized Levenshtein distance, or nothing when
/// `struct_only` is set. Other equal-tag pairs are free.
pub fn rename_cost(a: &HtmlNode, b: &HtmlNode, struct_only: bool) -> f64 {
    if a.tag != b.tag {
        return 1.0;
    }
    if a.tag != Tag::Td {
        return 0.0;
    }
    if (a.rowspan, a.colspan) != (b.rowspan, b.colspan) {
        return 1.0;
    }
    if struct_only {
        return 0.0;
    }
    let (x, y) = (a.content.as_deref().unwrap_or(""), b.content.as_deref().unwrap_or(""));
    1.0 - strsim::normalized_levenshtein(x, y)
}

/// Edit distance with unit insert/delete and [`rename_cost`] substitutions.
pub fn tree_edit_distance(a: &HtmlTree, b: &HtmlTree, struct_only: bool) -> f64 {
    let (fa, fb) = (Flat::new(a.root.as_ref()), Flat::new(b.root.as_ref()));
    let (na, nb) = (fa.nodes.len(), fb.nodes.len());
    if na == 0 || nb == 0 {
        return (na + nb) as f64;
    }
    let mut td = vec![vec![0.0f64; nb]; na];
    for &i in &fa.keyroots {
        for &j in &fb.keyroots {
            let (li, lj) = (fa.lml[i], fb.lml[j]);
            let (w, h) = (i - li + 2, j - lj + 2);
            let mut fd = vec![vec![0.0f64; h]; w];
            for x in 1..w {
                fd[x][0] = fd[x - 1][0] + 1.0;
            }
            for y in 1..h {
                fd[0][y] = fd[0][y - 1] + 1.0;
            }
            for x in 1..w {
                let i1 = li + x - 1;
                for y in 1..h {
                    let j1 = lj + y - 1;
                    let edit = (fd[x - 1][y] + 1.0).min(fd[x][y - 1] + 1.0);
                    if fa.lml[i1] == li && fb.lml[j1] == lj {
                        let sub = fd[x - 1][y - 1] + rename_cost(fa.nodes[i1], fb.nodes[j1], struct_only);
                        fd[x][y] = edit.min(sub);
                        td[i1][j1] = fd[x][y];
                    } else {
                        let (p, q) = (fa.lml[i1] - li, fb.lml[j1] - lj);
                        fd[x][y] = edit.min(fd[p][q] + td[i1][j1]);
                    }
                }
            }
        }
    }
    td[na - 1][nb - 1]
}

/// `1 − dist / max(|a|, |b|)` on trees normalized to `table/tr/td`.
pub fn teds(a: &HtmlTree, b: &HtmlTree, struct_only: bool) -> f64 {
    let (a, b) = (a.normalized(), b.normalized());
    let size = a.size().max(b.size());
    if size == 0 {
        return 1.0;
    }
    (1.0 - tree_edit_distance(&a, &b, struct_only) / size as f64).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tr(cells: Vec<HtmlNode>) -> HtmlNode {
        HtmlNode::new(Tag::Tr).with_children(cells)
    }

    fn table(rows: Vec<HtmlNode>) -> HtmlTree {
        HtmlTree {
            root: Some(HtmlNode::new(Tag::Table).with_children(rows)),
        }
    }

    #[test]
    fn identity_and_empty() {
        let t = table(vec![tr(vec![HtmlNode::td(1, 2, Some("a"))]), tr(vec![HtmlNode::td(1, 1, None)])]);
        assert_eq!(tree_edit_distance(&t, &t, false), 0.0);
        assert_eq!(teds(&t, &t, false), 1.0);
        assert_eq!(tree_edit_distance(&t, &HtmlTree::empty(), false), t.size() as f64);
        assert_eq!(teds(&t, &HtmlTree::empty(), false), 0.0);
        assert_eq!(teds(&HtmlTree::empty(), &HtmlTree::empty(), true), 1.0);
    }

    #[test]
    fn span_error_fixture() {
        // ground truth: a header spanning both columns; prediction splits it
        // and leaves a blank cell. Cheapest script: delete the blank td and
        // fix the span of "x" (cost 2) over max(6, 7) nodes.
        let gt = table(vec![
            tr(vec![HtmlNode::td(1, 2, Some("x"))]),
            tr(vec![HtmlNode::td(1, 1, Some("y")), HtmlNode::td(1, 1, Some("z"))]),
        ]);
        let pred = table(vec![
            tr(vec![HtmlNode::td(1, 1, Some("x")), HtmlNode::td(1, 1, None)]),
            tr(vec![HtmlNode::td(1, 1, Some("y")), HtmlNode::td(1, 1, Some("z"))]),
        ]);
        assert_eq!(tree_edit_distance(&pred, &gt, true), 2.0);
        assert!((teds(&pred, &gt, true) - 5.0 / 7.0).abs() < 1e-12);
        assert!((teds(&pred, &gt, false) - 5.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn content_cost_is_normalized_levenshtein() {
        let a = table(vec![tr(vec![HtmlNode::td(1, 1, Some("abcd"))])]);
        let b = table(vec![tr(vec![HtmlNode::td(1, 1, Some("abxd"))])]);
        assert!((tree_edit_distance(&a, &b, false) - 0.25).abs() < 1e-12);
        assert_eq!(tree_edit_distance(&a, &b, true), 0.0);
    }

    /// Postorder nodes and the ancestor relation `anc[a][d]`.
    fn post(t: &HtmlTree) -> (Vec<HtmlNode>, Vec<Vec<bool>>) {
        // descendants of a node are exactly the postorder indices first..node
        fn walk(n: &HtmlNode, nodes: &mut Vec<HtmlNode>, first: &mut Vec<usize>) {
            let start = nodes.len();
            for ch in &n.children {
                walk(ch, nodes, first);
            }
            nodes.push(HtmlNode {
                children: Vec::new(),
                ..n.clone()
            });
            first.push(start);
        }
        let (mut nodes, mut first) = (Vec::new(), Vec::new());
        if let Some(r) = &t.root {
            walk(r, &mut nodes, &mut first);
        }
        let n = nodes.len();
        let anc = (0..n).map(|a| (0..n).map(|d| first[a] <= d && d < a).collect()).collect();
        (nodes, anc)
    }

    /// Minimum-cost valid ordered mapping by exhaustive search.
    fn brute_force(a: &HtmlTree, b: &HtmlTree, struct_only: bool) -> f64 {
        let (na, aa) = post(a);
        let (nb, ab) = post(b);
        fn go(
            i: usize,
            pairs: &mut Vec<(usize, usize)>,
            used: &mut Vec<bool>,
            cost: f64,
            best: &mut f64,
            ctx: &(&[HtmlNode], &[Vec<bool>], &[HtmlNode], &[Vec<bool>], bool),
        ) {
            let (na, aa, nb, ab, so) = *ctx;
            if cost >= *best {
                return;
            }
            if i == na.len() {
                let unmapped_b = used.iter().filter(|u| !**u).count() as f64;
                *best = best.min(cost + unmapped_b);
                return;
            }
            go(i + 1, pairs, used, cost + 1.0, best, ctx);
            for j in 0..nb.len() {
                if used[j] {
                    continue;
                }
                let ok = pairs
                    .iter()
                    .all(|&(p, q)| (p < i) == (q < j) && aa[p][i] == ab[q][j] && aa[i][p] == ab[j][q]);
                if !ok {
                    continue;
                }
                used[j] = true;
                pairs.push((i, j));
                go(i + 1, pairs, used, cost + rename_cost(&na[i], &nb[j], so), best, ctx);
                pairs.pop();
                used[j] = false;
            }
        }
        let mut best = (na.len() + nb.len()) as f64;
        let mut used = vec![false; nb.len()];
        go(0, &mut Vec::new(), &mut used, 0.0, &mut best, &(&na, &aa, &nb, &ab, struct_only));
        best
    }

    /// Random ordered trees: node `k` attaches to an earlier node, keeping
    /// children in insertion order.
    fn trees(max: usize) -> impl Strategy<Value = HtmlTree> {
        prop::collection::vec(
            (
                any::<prop::sample::Index>(),
                0usize..3,
                1usize..3,
                prop::sample::select(vec!["", "a", "ab", "ba", "abc"]),
            ),
            1..=max,
        )
        .prop_map(|spec| {
            let tags = [Tag::Table, Tag::Tr, Tag::Td];
            let mut parent = vec![None];
            let mut nodes = vec![HtmlNode::new(tags[spec[0].1])];
            for (k, s) in spec.iter().enumerate().skip(1) {
                parent.push(Some(s.0.index(k)));
                let mut n = HtmlNode::new(tags[s.1]);
                n.colspan = s.2;
                n.content = (!s.3.is_empty()).then(|| s.3.to_string());
                nodes.push(n);
            }
            for k in (1..nodes.len()).rev() {
                let n = nodes[k].clone();
                let p = parent[k].unwrap();
                nodes[p].children.insert(0, n);
            }
            HtmlTree {
                root: Some(nodes.swap_remove(0)),
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_exhaustive_mapping_search(a in trees(7), b in trees(7), so in any::<bool>()) {
            let d = tree_edit_distance(&a, &b, so);
            let bf = brute_force(&a, &b, so);
            prop_assert!((d - bf).abs() < 1e-9, "zs {} vs brute force {}", d, bf);
        }

        #[test]
        fn symmetric_and_triangular(a in trees(10), b in trees(10), c in trees(10)) {
            let ab = tree_edit_distance(&a, &b, false);
            prop_assert!((ab - tree_edit_distance(&b, &a, false)).abs() < 1e-9);
            prop_assert!((teds(&a, &b, false) - teds(&b, &a, false)).abs() < 1e-12);
            let ac = tree_edit_distance(&a, &c, false);
            let bc = tree_edit_distance(&b, &c, false);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert_eq!(tree_edit_distance(&a, &a, false), 0.0);
        }
    }
}
