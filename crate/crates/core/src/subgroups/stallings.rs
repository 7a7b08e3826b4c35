//! Folded core graphs for finitely generated subgroups of free groups.
//! Reduced loops at the basepoint spell exactly the subgroup's elements.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::word::{alphabet, inv_letter, letter_key, Letter, Word};

/// A folded, core, based, labeled graph. Canonically numbered by
/// breadth-first search from the basepoint (vertex 0), so two graphs are
/// equal as values iff they are isomorphic as based labeled graphs.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct StallingsGraph {
    rank: usize,
    /// adj[v][letter_key(l)] = target of the l-edge at v, if present.
    adj: Vec<Vec<Option<usize>>>,
}

impl StallingsGraph {
    /// Wedge of loops over the given words, folded to a fixed point and
    /// pruned to the core. The empty list yields the trivial subgroup.
    pub fn from_words(rank: usize, words: &[Word]) -> StallingsGraph {
        let mut edges: Vec<(usize, Letter, usize)> = Vec::new();
        let mut nvertices = 1usize;
        for w in words {
            let ls = w.letters();
            if ls.is_empty() {
                continue;
            }
            let mut prev = 0usize;
            for (i, &l) in ls.iter().enumerate() {
                let next = if i + 1 == ls.len() {
                    0
                } else {
                    nvertices += 1;
                    nvertices - 1
                };
                // Store in positive orientation.
                if l > 0 {
                    edges.push((prev, l, next));
                } else {
                    edges.push((next, -l, prev));
                }
                prev = next;
            }
        }
        let mut uf = UnionFind::new(nvertices);
        // Fold: repeatedly merge targets of equally-labeled edges at a vertex.
        loop {
            let mut map: BTreeMap<(usize, Letter), usize> = BTreeMap::new();
            let mut merged = false;
            for &(u, l, v) in &edges {
                for (from, letter, to) in [(u, l, v), (v, -l, u)] {
                    let rf = uf.find(from);
                    let rt = uf.find(to);
                    match map.get(&(rf, letter)) {
                        Some(&prev) => {
                            let rp = uf.find(prev);
                            if rp != rt {
                                uf.union(rp, rt);
                                merged = true;
                            }
                        }
                        None => {
                            map.insert((rf, letter), rt);
                        }
                    }
                }
            }
            if !merged {
                break;
            }
        }
        // Compact to root representatives.
        let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
        let mut count = 0usize;
        for v in 0..nvertices {
            let r = uf.find(v);
            relabel.entry(r).or_insert_with(|| {
                count += 1;
                count - 1
            });
        }
        let mut adj: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * rank]; count];
        for &(u, l, v) in &edges {
            let cu = relabel[&uf.find(u)];
            let cv = relabel[&uf.find(v)];
            adj[cu][letter_key(l) as usize] = Some(cv);
            adj[cv][letter_key(-l) as usize] = Some(cu);
        }
        let base = relabel[&uf.find(0)];
        let mut g = StallingsGraph { rank, adj };
        g.prune_core(base);
        g
    }

    /// Remove non-basepoint vertices of degree <= 1, then renumber
    /// canonically so the basepoint is vertex 0.
    fn prune_core(&mut self, base: usize) {
        let mut alive: Vec<bool> = vec![true; self.adj.len()];
        loop {
            let mut removed = false;
            for v in 0..self.adj.len() {
                if !alive[v] || v == base {
                    continue;
                }
                let degree = self.adj[v].iter().filter(|s| s.is_some()).count();
                if degree <= 1 {
                    alive[v] = false;
                    removed = true;
                    for slot in 0..2 * self.rank {
                        if let Some(w) = self.adj[v][slot] {
                            let back = mirror_slot(slot);
                            self.adj[w][back] = None;
                            self.adj[v][slot] = None;
                        }
                    }
                }
            }
            if !removed {
                break;
            }
        }
        // Canonical BFS renumber over live vertices.
        let mut order: Vec<usize> = Vec::new();
        let mut seen: Vec<bool> = vec![false; self.adj.len()];
        let mut queue = VecDeque::from([base]);
        seen[base] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for slot in 0..2 * self.rank {
                if let Some(w) = self.adj[v][slot] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut relabel = vec![usize::MAX; self.adj.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new;
        }
        let mut adj = vec![vec![None; 2 * self.rank]; order.len()];
        for &old in &order {
            for slot in 0..2 * self.rank {
                if let Some(w) = self.adj[old][slot] {
                    adj[relabel[old]][slot] = Some(relabel[w]);
                }
            }
        }
        self.adj = adj;
    }

    /// Wrap an already-folded adjacency (e.g. a complete Schreier graph),
    /// pruning and renumbering canonically.
    pub(crate) fn from_raw(rank: usize, adj: Vec<Vec<Option<usize>>>, base: usize) -> StallingsGraph {
        let mut g = StallingsGraph { rank, adj };
        g.prune_core(base);
        g
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn states(&self) -> usize {
        self.adj.len()
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn step(&self, state: usize, letter: Letter) -> Option<usize> {
        self.adj[state][letter_key(letter) as usize]
    }

    /// Walk a reduced word from the basepoint; membership means the walk
    /// exists and closes up.
    pub fn accepts(&self, w: &Word) -> bool {
        let mut v = 0usize;
        for &l in w.letters() {
            match self.step(v, l) {
                Some(next) => v = next,
                None => return false,
            }
        }
        v == 0
    }

    /// Finite index iff the graph is complete; then the index is the vertex
    /// count.
    pub fn finite_index(&self) -> Option<usize> {
        let complete = self
            .adj
            .iter()
            .all(|row| row.iter().all(|s| s.is_some()));
        complete.then_some(self.adj.len())
    }

    /// Free generating set read off a spanning tree: one generator per
    /// non-tree edge, in deterministic order.
    pub fn subgroup_generators(&self) -> Vec<Word> {
        let n = self.adj.len();
        let mut path: Vec<Option<Word>> = vec![None; n];
        path[0] = Some(Word::identity());
        let mut tree_edge: Vec<Vec<bool>> = vec![vec![false; 2 * self.rank]; n];
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for slot in 0..2 * self.rank {
                if let Some(w) = self.adj[v][slot] {
                    if path[w].is_none() {
                        let l = slot_letter(slot);
                        path[w] = Some(
                            path[v]
                                .clone()
                                .unwrap()
                                .mul(&Word::from_letters([l])),
                        );
                        tree_edge[v][slot] = true;
                        tree_edge[w][mirror_slot(slot)] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut gens = Vec::new();
        for v in 0..n {
            for slot in 0..2 * self.rank {
                let l = slot_letter(slot);
                if l < 0 {
                    continue; // each edge once, in positive orientation
                }
                if let Some(w) = self.adj[v][slot] {
                    if tree_edge[v][slot] {
                        continue;
                    }
                    let gen = path[v]
                        .clone()
                        .unwrap()
                        .mul(&Word::from_letters([l]))
                        .mul(&path[w].clone().unwrap().inverse());
                    if !gen.is_identity() {
                        gens.push(gen);
                    }
                }
            }
        }
        gens
    }

    pub fn to_json(&self) -> StallingsJson {
        let mut edges = Vec::new();
        for v in 0..self.adj.len() {
            for slot in 0..2 * self.rank {
                let l = slot_letter(slot);
                if l < 0 {
                    continue;
                }
                if let Some(w) = self.adj[v][slot] {
                    edges.push((v, Word::from_letters([l]).to_string(), w));
                }
            }
        }
        StallingsJson {
            rank: self.rank,
            basepoint: 0,
            vertices: self.adj.len(),
            edges,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StallingsJson {
    pub rank: usize,
    pub basepoint: usize,
    pub vertices: usize,
    pub edges: Vec<(usize, String, usize)>,
}

fn mirror_slot(slot: usize) -> usize {
    if slot % 2 == 0 {
        slot + 1
    } else {
        slot - 1
    }
}

fn slot_letter(slot: usize) -> Letter {
    let l = (slot / 2 + 1) as Letter;
    if slot % 2 == 0 {
        l
    } else {
        -l
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// All reduced loops at the basepoint up to the given length, shortlex.
pub fn loops_up_to(g: &StallingsGraph, max_len: usize, cap: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let letters = alphabet(g.rank());
    // Iterative deepening over reduced paths.
    fn dfs(
        g: &StallingsGraph,
        v: usize,
        last: Letter,
        word: &mut Vec<Letter>,
        max_len: usize,
        cap: usize,
        letters: &[Letter],
        out: &mut Vec<Word>,
    ) {
        if out.len() >= cap {
            return;
        }
        if v == 0 && !word.is_empty() {
            out.push(Word::from_letters(word.iter().copied()));
        }
        if word.len() == max_len {
            return;
        }
        for &l in letters {
            if l == inv_letter(last) && last != 0 {
                continue;
            }
            if let Some(w) = g.step(v, l) {
                word.push(l);
                dfs(g, w, l, word, max_len, cap, letters, out);
                word.pop();
            }
        }
    }
    let mut word = Vec::new();
    dfs(g, 0, 0, &mut word, max_len, cap, &letters, &mut out);
    out.sort_by(|a, b| a.shortlex_cmp(b));
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn single_loop() {
        let g = StallingsGraph::from_words(2, &[w("a")]);
        assert_eq!(g.states(), 1);
        assert!(g.accepts(&w("aaa")));
        assert!(g.accepts(&w("A")));
        assert!(!g.accepts(&w("b")));
        assert!(!g.accepts(&w("ab")));
        assert_eq!(g.finite_index(), None);
    }

    #[test]
    fn commutator_cycle() {
        let g = StallingsGraph::from_words(2, &[w("abAB")]);
        assert_eq!(g.states(), 4);
        assert!(g.accepts(&w("abAB")));
        assert!(g.accepts(&w("baBA")));
        assert!(!g.accepts(&w("ab")));
    }

    #[test]
    fn folding_identifies_membership() {
        let g = StallingsGraph::from_words(2, &[w("aa"), w("ab")]);
        assert!(g.accepts(&w("aa")));
        assert!(g.accepts(&w("ab")));
        assert!(g.accepts(&w("BA")));
        // b⁻¹a²b = (ab)⁻¹·a²·(ab) is a member.
        assert!(g.accepts(&w("Baab")));
        assert!(!g.accepts(&w("a")));
        assert!(!g.accepts(&w("b")));
        assert!(!g.accepts(&w("aB")));
        assert!(!g.accepts(&w("bb")));
        assert_eq!(g.finite_index(), None);
    }

    #[test]
    fn conjugate_graph() {
        let g = StallingsGraph::from_words(2, &[w("bab").inverse()]);
        assert!(g.accepts(&w("BAB").pow(2)));
    }

    #[test]
    fn generators_regenerate_the_graph() {
        for gens in [vec![w("aa"), w("ab")], vec![w("a")], vec![w("abAB")]] {
            let g = StallingsGraph::from_words(2, &gens);
            let back = StallingsGraph::from_words(2, &g.subgroup_generators());
            assert_eq!(g, back);
        }
    }

    #[test]
    fn trivial_subgroup() {
        let g = StallingsGraph::from_words(2, &[]);
        assert_eq!(g.states(), 1);
        assert!(g.accepts(&Word::identity()));
        assert!(!g.accepts(&w("a")));
        assert_eq!(loops_up_to(&g, 6, 100), vec![Word::identity()]);
    }

    #[test]
    fn loops_enumeration() {
        let g = StallingsGraph::from_words(2, &[w("a")]);
        let loops = loops_up_to(&g, 3, 100);
        let mut expect = vec![w("1"), w("a"), w("A"), w("aa"), w("AA"), w("aaa"), w("AAA")];
        expect.sort_by(|a, b| a.shortlex_cmp(b));
        assert_eq!(loops, expect);
    }
}
