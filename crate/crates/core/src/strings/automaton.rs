//! Synchronous multi-track finite automata over padded word encodings.
//!
//! A `k`-track automaton reads columns of `k` letter-or-pad cells, one cell
//! per track. A tuple of words is encoded column-wise, shorter words padded
//! at the end; the canonical encoding has no trailing all-pad column (so no
//! all-pad column at all, since pads are closed under extension). All
//! operations keep languages inside the set of canonical encodings.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// A cell is `Some(letter)` or `None` for the pad.
pub type Cell = Option<u32>;
pub type Label = Vec<Cell>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncAutomaton {
    pub tracks: usize,
    /// Alphabet is `0..=max_letter`.
    pub max_letter: u32,
    pub states: usize,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub transitions: Vec<(usize, Label, usize)>,
}

impl SyncAutomaton {
    pub fn empty(tracks: usize, max_letter: u32) -> Self {
        SyncAutomaton {
            tracks,
            max_letter,
            states: 1,
            initial: 0,
            accepting: BTreeSet::new(),
            transitions: Vec::new(),
        }
    }

    /// Accepts every canonical encoding of a `tracks`-tuple.
    pub fn universal(tracks: usize, max_letter: u32) -> Self {
        let mut a = SyncAutomaton::empty(tracks, max_letter);
        a.accepting.insert(0);
        if tracks > 0 {
            for label in all_labels(tracks, max_letter) {
                a.transitions.push((0, label, 0));
            }
            a = a.intersect(&valid_enc(tracks, max_letter));
        }
        a
    }

    /// Successors of each state, grouped by label.
    fn adjacency(&self) -> HashMap<usize, HashMap<&Label, Vec<usize>>> {
        let mut adj: HashMap<usize, HashMap<&Label, Vec<usize>>> = HashMap::new();
        for (p, l, r) in &self.transitions {
            adj.entry(*p).or_default().entry(l).or_default().push(*r);
        }
        adj
    }

    pub fn is_empty(&self) -> bool {
        let mut succs: HashMap<usize, Vec<usize>> = HashMap::new();
        for (p, _, r) in &self.transitions {
            succs.entry(*p).or_default().push(*r);
        }
        let mut seen = vec![false; self.states];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            if self.accepting.contains(&q) {
                return false;
            }
            for r in succs.get(&q).map(|v| v.as_slice()).unwrap_or(&[]) {
                if !seen[*r] {
                    seen[*r] = true;
                    queue.push_back(*r);
                }
            }
        }
        true
    }

    /// Drops states that are unreachable from the initial state or cannot
    /// reach an accepting state, remapping the rest.
    pub fn trim(&self) -> SyncAutomaton {
        let mut fwd: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut bwd: HashMap<usize, Vec<usize>> = HashMap::new();
        for (p, _, r) in &self.transitions {
            fwd.entry(*p).or_default().push(*r);
            bwd.entry(*r).or_default().push(*p);
        }
        let reach = |starts: Vec<usize>, edges: &HashMap<usize, Vec<usize>>| {
            let mut seen = vec![false; self.states];
            let mut queue: VecDeque<usize> = starts.into();
            for q in &queue {
                seen[*q] = true;
            }
            while let Some(q) = queue.pop_front() {
                for r in edges.get(&q).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if !seen[*r] {
                        seen[*r] = true;
                        queue.push_back(*r);
                    }
                }
            }
            seen
        };
        let fw = reach(vec![self.initial], &fwd);
        let co = reach(self.accepting.iter().copied().collect(), &bwd);
        let mut remap: Vec<Option<usize>> = vec![None; self.states];
        let mut out = SyncAutomaton::empty(self.tracks, self.max_letter);
        out.states = 0;
        for q in 0..self.states {
            if fw[q] && co[q] {
                remap[q] = Some(out.states);
                out.states += 1;
            }
        }
        // keep at least the initial state so the automaton stays well-formed
        let initial = match remap[self.initial] {
            Some(i) => i,
            None => {
                remap[self.initial] = Some(out.states);
                out.states += 1;
                out.states - 1
            }
        };
        out.initial = initial;
        for q in &self.accepting {
            if let Some(i) = remap[*q] {
                out.accepting.insert(i);
            }
        }
        for (p, l, r) in &self.transitions {
            if let (Some(i), Some(j)) = (remap[*p], remap[*r]) {
                out.transitions.push((i, l.clone(), j));
            }
        }
        out
    }

    /// Merges language-equivalent states of a complete DFA by Moore
    /// partition refinement. The input must be deterministic and complete
    /// over `all_labels`; `determinize_complete` guarantees that.
    fn minimize_det(&self) -> SyncAutomaton {
        let labels = all_labels(self.tracks, self.max_letter);
        let mut label_id: HashMap<&Label, usize> = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            label_id.insert(l, i);
        }
        // successor table: state x label -> state
        let mut succ = vec![usize::MAX; self.states * labels.len()];
        for (p, l, r) in &self.transitions {
            succ[p * labels.len() + label_id[l]] = *r;
        }
        let mut class: Vec<usize> = (0..self.states)
            .map(|q| usize::from(self.accepting.contains(&q)))
            .collect();
        loop {
            let mut sig_map: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            let mut next = vec![0usize; self.states];
            for q in 0..self.states {
                let mut sig = Vec::with_capacity(labels.len() + 1);
                sig.push(class[q]);
                for li in 0..labels.len() {
                    sig.push(class[succ[q * labels.len() + li]]);
                }
                let n = sig_map.len();
                next[q] = *sig_map.entry(sig).or_insert(n);
            }
            if next == class {
                break;
            }
            class = next;
        }
        let n_classes = class.iter().max().map(|m| m + 1).unwrap_or(1);
        let mut out = SyncAutomaton::empty(self.tracks, self.max_letter);
        out.states = n_classes;
        out.initial = class[self.initial];
        for q in &self.accepting {
            out.accepting.insert(class[*q]);
        }
        let mut emitted: BTreeSet<usize> = BTreeSet::new();
        for q in 0..self.states {
            if !emitted.insert(class[q]) {
                continue;
            }
            for (li, l) in labels.iter().enumerate() {
                out.transitions.push((class[q], l.clone(), class[succ[q * labels.len() + li]]));
            }
        }
        out
    }

    pub fn intersect(&self, other: &SyncAutomaton) -> SyncAutomaton {
        assert_eq!(self.tracks, other.tracks);
        assert_eq!(self.max_letter, other.max_letter);
        let mut map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut out = SyncAutomaton::empty(self.tracks, self.max_letter);
        out.states = 0;
        let mut queue = VecDeque::new();
        let start = (self.initial, other.initial);
        map.insert(start, 0);
        out.states = 1;
        out.initial = 0;
        queue.push_back(start);
        let adj1 = self.adjacency();
        let adj2 = other.adjacency();
        let empty = HashMap::new();
        while let Some((q1, q2)) = queue.pop_front() {
            let id = map[&(q1, q2)];
            if self.accepting.contains(&q1) && other.accepting.contains(&q2) {
                out.accepting.insert(id);
            }
            let succ2 = adj2.get(&q2).unwrap_or(&empty);
            for (l1, r1s) in adj1.get(&q1).unwrap_or(&empty) {
                let Some(r2s) = succ2.get(l1) else { continue };
                for r1 in r1s {
                    for r2 in r2s {
                        let key = (*r1, *r2);
                        let rid = *map.entry(key).or_insert_with(|| {
                            out.states += 1;
                            queue.push_back(key);
                            out.states - 1
                        });
                        out.transitions.push((id, (*l1).clone(), rid));
                    }
                }
            }
        }
        out.trim()
    }

    pub fn union(&self, other: &SyncAutomaton) -> SyncAutomaton {
        assert_eq!(self.tracks, other.tracks);
        assert_eq!(self.max_letter, other.max_letter);
        // fresh initial state with copies of both initial states' behavior
        let offset = 1;
        let other_offset = offset + self.states;
        let mut out = SyncAutomaton::empty(self.tracks, self.max_letter);
        out.states = 1 + self.states + other.states;
        out.initial = 0;
        for (p, l, r) in &self.transitions {
            out.transitions.push((p + offset, l.clone(), r + offset));
            if *p == self.initial {
                out.transitions.push((0, l.clone(), r + offset));
            }
        }
        for (p, l, r) in &other.transitions {
            out.transitions.push((p + other_offset, l.clone(), r + other_offset));
            if *p == other.initial {
                out.transitions.push((0, l.clone(), r + other_offset));
            }
        }
        for q in &self.accepting {
            out.accepting.insert(q + offset);
        }
        for q in &other.accepting {
            out.accepting.insert(q + other_offset);
        }
        if self.accepting.contains(&self.initial) || other.accepting.contains(&other.initial) {
            out.accepting.insert(0);
        }
        out.trim()
    }

    /// Deterministic, complete automaton over all non-all-pad labels with the
    /// same language (restricted to canonical encodings elsewhere).
    fn determinize_complete(&self) -> SyncAutomaton {
        assert!(self.tracks > 0);
        let labels = all_labels(self.tracks, self.max_letter);
        let mut map: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut out = SyncAutomaton::empty(self.tracks, self.max_letter);
        out.states = 0;
        let start: BTreeSet<usize> = [self.initial].into();
        map.insert(start.clone(), 0);
        out.states = 1;
        let adj = self.adjacency();
        let empty = HashMap::new();
        let mut queue = VecDeque::from([start]);
        while let Some(set) = queue.pop_front() {
            let id = map[&set];
            if set.iter().any(|q| self.accepting.contains(q)) {
                out.accepting.insert(id);
            }
            let mut by_label: HashMap<&Label, BTreeSet<usize>> = HashMap::new();
            for q in &set {
                for (l, rs) in adj.get(q).unwrap_or(&empty) {
                    by_label.entry(l).or_default().extend(rs.iter().copied());
                }
            }
            for label in &labels {
                let next = by_label.get(label).cloned().unwrap_or_default();
                let rid = *map.entry(next.clone()).or_insert_with(|| {
                    out.states += 1;
                    queue.push_back(next);
                    out.states - 1
                });
                out.transitions.push((id, label.clone(), rid));
            }
        }
        out
    }

    /// Complement relative to the canonical encodings of all tuples.
    pub fn complement(&self) -> SyncAutomaton {
        if self.tracks == 0 {
            let mut out = SyncAutomaton::empty(0, self.max_letter);
            if !self.accepting.contains(&self.initial) {
                out.accepting.insert(0);
            }
            return out;
        }
        let mut det = self.trim().determinize_complete().minimize_det();
        det.accepting = (0..det.states).filter(|q| !det.accepting.contains(q)).collect();
        det.intersect(&valid_enc(self.tracks, self.max_letter))
    }

    /// Inserts a fresh unconstrained track at position `idx`.
    pub fn insert_track(&self, idx: usize) -> SyncAutomaton {
        assert!(idx <= self.tracks);
        let mut out = SyncAutomaton::empty(self.tracks + 1, self.max_letter);
        out.states = self.states + 1;
        out.initial = self.initial;
        out.accepting = self.accepting.clone();
        let tail = self.states; // absorbs columns after all old tracks ended
        out.accepting.insert(tail);
        let cells: Vec<Cell> =
            (0..=self.max_letter).map(Some).chain([None]).collect();
        for (p, l, r) in &self.transitions {
            for c in &cells {
                let mut label = l.clone();
                label.insert(idx, *c);
                out.transitions.push((*p, label, *r));
            }
        }
        // the new track may run longer than every old one
        let mut trail = vec![None; self.tracks];
        for a in 0..=self.max_letter {
            let mut label = trail.clone();
            label.insert(idx, Some(a));
            for q in &self.accepting {
                out.transitions.push((*q, label.clone(), tail));
            }
            out.transitions.push((tail, label, tail));
        }
        trail.insert(idx, None);
        out.intersect(&valid_enc(self.tracks + 1, self.max_letter))
    }

    /// Removes track `idx`, projecting the language onto the remaining tracks.
    pub fn project(&self, idx: usize) -> SyncAutomaton {
        assert!(idx < self.tracks);
        let mut out = SyncAutomaton::empty(self.tracks - 1, self.max_letter);
        out.states = self.states;
        out.initial = self.initial;
        out.accepting = self.accepting.clone();
        for (p, l, r) in &self.transitions {
            let mut label = l.clone();
            label.remove(idx);
            out.transitions.push((*p, label, *r));
        }
        // dropping the longest track can leave trailing all-pad columns:
        // saturate acceptance backward along all-pad transitions, then drop them
        let all_pad = vec![None; out.tracks];
        loop {
            let mut changed = false;
            for (p, l, r) in &out.transitions {
                if *l == all_pad && out.accepting.contains(r) && !out.accepting.contains(p) {
                    out.accepting.insert(*p);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        out.transitions.retain(|(_, l, _)| *l != all_pad);
        out = out.trim();
        if out.tracks == 0 {
            // a 0-track automaton encodes only the empty tuple
            let nonempty = !out.is_empty();
            out = SyncAutomaton::empty(0, self.max_letter);
            if nonempty {
                out.accepting.insert(0);
            }
        }
        out
    }

    /// Runs the automaton on the canonical encoding of the given words.
    pub fn accepts(&self, words: &[Vec<u32>]) -> bool {
        assert_eq!(words.len(), self.tracks);
        let len = words.iter().map(|w| w.len()).max().unwrap_or(0);
        let mut states: BTreeSet<usize> = [self.initial].into();
        for i in 0..len {
            let label: Label = words.iter().map(|w| w.get(i).copied()).collect();
            states = self
                .transitions
                .iter()
                .filter(|(p, l, _)| states.contains(p) && *l == label)
                .map(|(_, _, r)| *r)
                .collect();
            if states.is_empty() {
                return false;
            }
        }
        states.iter().any(|q| self.accepting.contains(q))
    }

    /// Enumerates up to `limit` accepted tuples, shortest encodings first.
    pub fn sample(&self, limit: usize) -> Vec<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        let mut queue: VecDeque<(usize, Vec<Vec<u32>>)> =
            VecDeque::from([(self.initial, vec![Vec::new(); self.tracks])]);
        let mut steps = 0usize;
        while let Some((q, words)) = queue.pop_front() {
            if self.accepting.contains(&q) {
                out.push(words.clone());
                if out.len() >= limit {
                    break;
                }
            }
            steps += 1;
            if steps > 100_000 {
                break;
            }
            for (p, l, r) in &self.transitions {
                if *p != q {
                    continue;
                }
                let mut next = words.clone();
                for (w, c) in next.iter_mut().zip(l) {
                    if let Some(a) = c {
                        w.push(*a);
                    }
                }
                queue.push_back((*r, next));
            }
        }
        out
    }
}

/// All non-all-pad labels over `tracks` cells.
pub fn all_labels(tracks: usize, max_letter: u32) -> Vec<Label> {
    let cells: Vec<Cell> = (0..=max_letter).map(Some).chain([None]).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..tracks {
        let mut next = Vec::new();
        for prefix in &out {
            for c in &cells {
                let mut l = prefix.clone();
                l.push(*c);
                next.push(l);
            }
        }
        out = next;
    }
    out.retain(|l| l.iter().any(|c| c.is_some()));
    out
}

/// Automaton of canonical encodings: pads only extend pads, no all-pad column.
pub fn valid_enc(tracks: usize, max_letter: u32) -> SyncAutomaton {
    assert!(tracks > 0);
    // state = bitmask of tracks already padded
    let mut out = SyncAutomaton::empty(tracks, max_letter);
    out.states = 1 << tracks;
    out.initial = 0;
    out.accepting = (0..out.states).collect();
    for mask in 0..out.states as u32 {
        for label in all_labels(tracks, max_letter) {
            let ok = (0..tracks).all(|i| mask & (1 << i) == 0 || label[i].is_none());
            if !ok {
                continue;
            }
            let next: u32 = (0..tracks)
                .filter(|i| label[*i].is_none())
                .fold(0, |m, i| m | (1 << i));
            out.transitions.push((mask as usize, label, next as usize));
        }
    }
    out
}
