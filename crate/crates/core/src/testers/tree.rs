/// A binary decision tree whose leaves are distinct elements of a
/// distinguished set, referred to by their positions in that set.
///
/// Internal nodes hold a 1-based query index; an answer of 0 routes to the
/// left child and 1 to the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    leaf_of: Vec<Option<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Leaf(usize),
    Split { j: usize, zero: usize, one: usize },
}

const ROOT: usize = 0;

impl DecisionTree {
    /// A single leaf holding `element`.
    pub fn singleton(element: usize) -> Self {
        let mut leaf_of = vec![None; element + 1];
        leaf_of[element] = Some(ROOT);
        DecisionTree {
            nodes: vec![Node::Leaf(element)],
            leaf_of,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_of.iter().flatten().count()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.leaf_of.get(element).is_some_and(Option::is_some)
    }

    /// Number of internal nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        fn depth(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { zero, one, .. } => 1 + depth(nodes, zero).max(depth(nodes, one)),
            }
        }
        depth(&self.nodes, ROOT)
    }

    /// `(index, answer)` pairs along the path from the root to `element`'s leaf.
    pub fn path(&self, element: usize) -> Option<Vec<(usize, bool)>> {
        let target = self.leaf_of.get(element).copied().flatten()?;
        // Depth-first search; the tree is small.
        fn walk(nodes: &[Node], at: usize, target: usize, out: &mut Vec<(usize, bool)>) -> bool {
            if at == target {
                return true;
            }
            if let Node::Split { j, zero, one } = nodes[at] {
                for (child, a) in [(zero, false), (one, true)] {
                    out.push((j, a));
                    if walk(nodes, child, target, out) {
                        return true;
                    }
                    out.pop();
                }
            }
            false
        }
        let mut out = Vec::new();
        walk(&self.nodes, ROOT, target, &mut out).then_some(out)
    }

    /// Routes a string from the root, asking `ask(j)` for its bit at each
    /// node's index, and returns the element at the leaf reached. Asks at
    /// most `height()` times.
    pub fn locate<E>(&self, mut ask: impl FnMut(usize) -> Result<bool, E>) -> Result<usize, E> {
        let mut at = ROOT;
        loop {
            match self.nodes[at] {
                Node::Leaf(e) => return Ok(e),
                Node::Split { j, zero, one } => at = if ask(j)? { one } else { zero },
            }
        }
    }

    /// Replaces `existing`'s leaf by a node on `j` whose children are
    /// `existing` and `new`, placed by `new_answer`, the answer of `new` at `j`
    /// (the answer of `existing` at `j` must be the opposite).
    ///
    /// Panics if `existing` is not a leaf or `new` already is one.
    pub fn insert(&mut self, existing: usize, new: usize, j: usize, new_answer: bool) {
        let at = self.leaf_of.get(existing).copied().flatten().expect("existing element is a leaf");
        assert!(!self.contains(new), "element {new} is already in the tree");
        let old_leaf = self.nodes.len();
        let new_leaf = old_leaf + 1;
        self.nodes.push(Node::Leaf(existing));
        self.nodes.push(Node::Leaf(new));
        let (zero, one) = if new_answer { (old_leaf, new_leaf) } else { (new_leaf, old_leaf) };
        self.nodes[at] = Node::Split { j, zero, one };
        if self.leaf_of.len() <= new {
            self.leaf_of.resize(new + 1, None);
        }
        self.leaf_of[existing] = Some(old_leaf);
        self.leaf_of[new] = Some(new_leaf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ask(bits: &'static str) -> impl FnMut(usize) -> Result<bool, Infallible> {
        move |j| Ok(bits.as_bytes()[j - 1] == b'1')
    }

    #[test]
    fn singleton_locates_without_asking() {
        let t = DecisionTree::singleton(0);
        let mut asked = 0;
        let e = t
            .locate(|_| {
                asked += 1;
                Ok::<_, Infallible>(true)
            })
            .unwrap();
        assert_eq!((e, asked), (0, 0));
        assert_eq!(t.height(), 0);
    }

    #[test]
    fn insert_splits_leaf() {
        // element 0 = 000, element 1 = 010, element 2 = 011
        let mut t = DecisionTree::singleton(0);
        t.insert(0, 1, 2, true);
        assert_eq!(t.locate(ask("010")).unwrap(), 1);
        assert_eq!(t.locate(ask("000")).unwrap(), 0);
        t.insert(1, 2, 3, true);
        assert_eq!(t.locate(ask("011")).unwrap(), 2);
        assert_eq!(t.locate(ask("010")).unwrap(), 1);
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.height(), 2);
        assert_eq!(t.path(2).unwrap(), vec![(2, true), (3, true)]);
        assert_eq!(t.path(0).unwrap(), vec![(2, false)]);
    }

    #[test]
    fn zero_answer_goes_left() {
        let mut t = DecisionTree::singleton(0);
        t.insert(0, 1, 5, false);
        assert_eq!(t.nodes[ROOT], Node::Split { j: 5, zero: 2, one: 1 });
    }

    #[test]
    #[should_panic]
    fn duplicate_insert_panics() {
        let mut t = DecisionTree::singleton(0);
        t.insert(0, 1, 1, true);
        t.insert(0, 1, 2, true);
    }
}
