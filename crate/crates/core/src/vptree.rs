//! Vantage-point tree over point ids, for an arbitrary metric supplied at
//! build and query time.

const LEAF_SIZE: usize = 8;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        vantage: u32,
        mu: f64,
        inside: u32,
        outside: u32,
    },
}

#[derive(Debug, Clone, Default)]
pub(crate) struct VpTree {
    nodes: Vec<Node>,
    order: Vec<u32>,
    root: Option<u32>,
}

impl VpTree {
    /// Builds over ids `0..n`. `metric(a, b)` must satisfy the triangle
    /// inequality for queries to be exact.
    pub(crate) fn build(n: usize, metric: impl Fn(u32, u32) -> f64) -> Self {
        let mut tree = VpTree {
            nodes: Vec::new(),
            order: (0..n as u32).collect(),
            root: None,
        };
        if n > 0 {
            let mut scratch = Vec::with_capacity(n);
            tree.root = Some(tree.build_range(0, n, &metric, &mut scratch));
        }
        tree
    }

    fn build_range(
        &mut self,
        lo: usize,
        hi: usize,
        metric: &impl Fn(u32, u32) -> f64,
        scratch: &mut Vec<(f64, u32)>,
    ) -> u32 {
        if hi - lo <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: lo as u32,
                end: hi as u32,
            });
            return (self.nodes.len() - 1) as u32;
        }
        let vantage = self.order[lo];
        scratch.clear();
        scratch.extend(
            self.order[lo + 1..hi]
                .iter()
                .map(|&id| (metric(vantage, id), id)),
        );
        let mid = scratch.len() / 2;
        scratch.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mu = scratch[mid].0;
        for (slot, &(_, id)) in self.order[lo + 1..hi].iter_mut().zip(scratch.iter()) {
            *slot = id;
        }
        let split = lo + 1 + mid + 1;
        let me = self.nodes.len();
        self.nodes.push(Node::Split {
            vantage,
            mu,
            inside: NONE,
            outside: NONE,
        });
        let inside = self.build_range(lo + 1, split, metric, scratch);
        let outside = if split < hi {
            self.build_range(split, hi, metric, scratch)
        } else {
            NONE
        };
        if let Node::Split {
            inside: i,
            outside: o,
            ..
        } = &mut self.nodes[me]
        {
            *i = inside;
            *o = outside;
        }
        me as u32
    }

    /// Visits every point that could lie within the current pruning radius of
    /// the query. `to_query(id)` is the tree metric from the query to `id`;
    /// `visit(id, d)` receives that distance and returns the (possibly
    /// shrunk) radius. Points farther than the radius may also be visited.
    pub(crate) fn search(
        &self,
        to_query: impl Fn(u32) -> f64,
        mut visit: impl FnMut(u32, f64) -> f64,
        radius: f64,
    ) {
        let Some(root) = self.root else { return };
        let mut radius = radius;
        let mut stack: Vec<(u32, f64)> = vec![(root, 0.0)];
        // Each stack entry carries a lower bound on the distance from the
        // query to any point of that subtree.
        while let Some((node, lower)) = stack.pop() {
            if lower > radius {
                continue;
            }
            match self.nodes[node as usize] {
                Node::Leaf { start, end } => {
                    for &id in &self.order[start as usize..end as usize] {
                        let d = to_query(id);
                        radius = visit(id, d);
                    }
                }
                Node::Split {
                    vantage,
                    mu,
                    inside,
                    outside,
                } => {
                    let x = to_query(vantage);
                    radius = visit(vantage, x);
                    let in_lower = (x - mu).max(0.0);
                    let out_lower = (mu - x).max(0.0);
                    // Push the far side first so the near side is explored first.
                    let (near, near_lb, far, far_lb) = if x <= mu {
                        (inside, in_lower, outside, out_lower)
                    } else {
                        (outside, out_lower, inside, in_lower)
                    };
                    if far != NONE && far_lb <= radius {
                        stack.push((far, far_lb));
                    }
                    if near != NONE && near_lb <= radius {
                        stack.push((near, near_lb));
                    }
                }
            }
        }
    }
}
