/// Isomorphism class of a rooted tree, as its canonical parenthesisation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeEnd {
    pub canonical: String,
    pub vertex_count: usize,
}

impl TreeEnd {
    pub fn from_canonical(canonical: String) -> TreeEnd {
        let vertex_count = canonical.bytes().filter(|&b| b == b'(').count();
        TreeEnd {
            canonical,
            vertex_count,
        }
    }

    /// The path with `k` vertices.
    pub fn path(k: usize) -> TreeEnd {
        TreeEnd::from_canonical(format!("{}{}", "(".repeat(k), ")".repeat(k)))
    }

    pub fn depth(&self) -> usize {
        let mut d: usize = 0;
        let mut best = 0;
        for b in self.canonical.bytes() {
            if b == b'(' {
                d += 1;
                best = best.max(d);
            } else {
                d = d.saturating_sub(1);
            }
        }
        best
    }
}

/// Canonical string of a vertex whose children have the given canonical strings.
pub fn canonical_of_children(mut children: Vec<String>) -> String {
    children.sort();
    let mut s = String::with_capacity(2 + children.iter().map(String::len).sum::<usize>());
    s.push('(');
    for c in &children {
        s.push_str(c);
    }
    s.push(')');
    s
}

/// Canonical string of the subtree rooted at domain `root`, computed without recursion.
pub(crate) fn canonical(root: usize, children: &[Vec<usize>], memo: &mut [Option<String>]) -> String {
    if let Some(s) = &memo[root] {
        return s.clone();
    }
    let mut stack = vec![(root, false)];
    while let Some((d, expanded)) = stack.pop() {
        if memo[d].is_some() {
            continue;
        }
        if expanded {
            let subs = children[d]
                .iter()
                .map(|&c| memo[c].clone().expect("child done"))
                .collect();
            memo[d] = Some(canonical_of_children(subs));
        } else {
            stack.push((d, true));
            for &c in &children[d] {
                if memo[c].is_none() {
                    stack.push((c, false));
                }
            }
        }
    }
    memo[root].clone().expect("root done")
}
