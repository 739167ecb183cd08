//! Complete binary tree over squared weights.
//!
//! Leaves hold `u_i²` keyed by an external id; every internal node holds the
//! sum of its children, so the root is `L = Σ u_i²`. Insert, delete, update
//! and proportional sampling all walk one root-to-leaf path. Deletion swaps
//! the doomed leaf with the last one to keep the tree complete; the leaf
//! array doubles when full.

use std::collections::HashMap;

use rand::Rng;

use crate::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct WeightedTree {
    /// Leaf capacity; power of two. Nodes live in an implicit array of
    /// length `2*cap - 1` with children of `t` at `2t+1` and `2t+2`; leaf
    /// slot `i` sits at `cap - 1 + i`.
    cap: usize,
    leaf_count: usize,
    nodes: Vec<f64>,
    leaf_ids: Vec<usize>,
    id_to_leaf: HashMap<usize, usize>,
    updates_since_rebuild: usize,
    update_visits: u64,
    rebuilds: u64,
}

impl WeightedTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut t = Self::new();
        if n > 0 {
            t.grow(n.next_power_of_two());
        }
        t
    }

    pub fn len(&self) -> usize {
        self.leaf_count
    }

    pub fn is_empty(&self) -> bool {
        self.leaf_count == 0
    }

    /// Root weight `Σ u_i²`; zero for an empty tree.
    pub fn total(&self) -> f64 {
        if self.cap == 0 {
            0.0
        } else {
            self.nodes[0]
        }
    }

    /// Stored squared weight for `id`.
    pub fn weight(&self, id: usize) -> Option<f64> {
        self.id_to_leaf
            .get(&id)
            .map(|&leaf| self.nodes[self.leaf_node(leaf)])
    }

    pub fn contains(&self, id: usize) -> bool {
        self.id_to_leaf.contains_key(&id)
    }

    /// Cumulative count of node writes performed by path updates; rebuilds
    /// are tracked separately in [`WeightedTree::rebuilds`].
    pub fn update_visits(&self) -> u64 {
        self.update_visits
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.leaf_count).map(|leaf| (self.leaf_ids[leaf], self.nodes[self.leaf_node(leaf)]))
    }

    /// Sets the weight for `id` to `value²`, inserting a leaf if absent.
    pub fn upsert(&mut self, id: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        self.upsert_weight(id, value * value)
    }

    /// Sets the squared weight directly; `weight` must be finite and >= 0.
    pub fn upsert_weight(&mut self, id: usize, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::NonFinite);
        }
        let leaf = match self.id_to_leaf.get(&id) {
            Some(&leaf) => leaf,
            None => {
                if self.leaf_count == self.cap {
                    self.grow((self.cap * 2).max(1));
                }
                let leaf = self.leaf_count;
                self.leaf_count += 1;
                self.leaf_ids[leaf] = id;
                self.id_to_leaf.insert(id, leaf);
                leaf
            }
        };
        self.set_leaf(leaf, weight);
        self.note_update();
        Ok(())
    }

    /// Removes the leaf for `id`, swapping the last leaf into its slot.
    pub fn delete(&mut self, id: usize) -> Result<()> {
        let leaf = *self.id_to_leaf.get(&id).ok_or(Error::UnknownId(id))?;
        let last = self.leaf_count - 1;
        if leaf != last {
            let moved_id = self.leaf_ids[last];
            let moved_weight = self.nodes[self.leaf_node(last)];
            self.leaf_ids[leaf] = moved_id;
            self.id_to_leaf.insert(moved_id, leaf);
            self.set_leaf(leaf, moved_weight);
        }
        self.set_leaf(last, 0.0);
        self.leaf_ids[last] = usize::MAX;
        self.id_to_leaf.remove(&id);
        self.leaf_count -= 1;
        self.note_update();
        Ok(())
    }

    /// Draws an id with probability `u_id² / L` by walking from the root.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<usize> {
        let total = self.total();
        if self.leaf_count == 0 || total <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let mut x = rng.gen::<f64>() * total;
        let mut t = 0usize;
        let internal = self.cap - 1;
        while t < internal {
            let l = 2 * t + 1;
            let r = l + 1;
            if x < self.nodes[l] || self.nodes[r] <= 0.0 {
                // Clamp guards the rounding edge where x lands exactly on the
                // left subtree mass.
                x = x.min(self.nodes[l] * (1.0 - 1e-15));
                t = l;
            } else {
                x = (x - self.nodes[l]).max(0.0);
                t = r;
            }
        }
        Ok(self.leaf_ids[t - internal])
    }

    /// Exact root-to-leaf walk probabilities: for each id, the product of
    /// branch ratios the sampler would follow. Independent of any drawing.
    pub fn walk_probabilities(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.leaf_count);
        if self.cap == 0 || self.total() <= 0.0 {
            return out;
        }
        let internal = self.cap - 1;
        let mut stack = vec![(0usize, 1.0f64)];
        while let Some((t, prob)) = stack.pop() {
            if t >= internal {
                let leaf = t - internal;
                if leaf < self.leaf_count {
                    out.push((self.leaf_ids[leaf], prob));
                }
                continue;
            }
            let w = self.nodes[t];
            if w <= 0.0 {
                continue;
            }
            let l = 2 * t + 1;
            let r = l + 1;
            if self.nodes[l] > 0.0 {
                stack.push((l, prob * self.nodes[l] / w));
            }
            if self.nodes[r] > 0.0 {
                stack.push((r, prob * self.nodes[r] / w));
            }
        }
        out.sort_by_key(|&(id, _)| id);
        out
    }

    /// Heap-sum check over every internal node, for tests.
    pub fn check_heap_sums(&self, rel_tol: f64) -> bool {
        if self.cap == 0 {
            return true;
        }
        let internal = self.cap - 1;
        for t in 0..internal {
            let sum = self.nodes[2 * t + 1] + self.nodes[2 * t + 2];
            let diff = (self.nodes[t] - sum).abs();
            if diff > rel_tol * self.nodes[t].abs().max(1.0) {
                return false;
            }
        }
        true
    }

    #[inline]
    fn leaf_node(&self, leaf: usize) -> usize {
        self.cap - 1 + leaf
    }

    fn set_leaf(&mut self, leaf: usize, weight: f64) {
        let mut t = self.leaf_node(leaf);
        self.nodes[t] = weight;
        self.update_visits += 1;
        while t > 0 {
            t = (t - 1) / 2;
            self.nodes[t] = self.nodes[2 * t + 1] + self.nodes[2 * t + 2];
            self.update_visits += 1;
        }
    }

    fn note_update(&mut self) {
        self.updates_since_rebuild += 1;
        if self.updates_since_rebuild >= self.leaf_count.max(1) {
            self.rebuild();
        }
    }

    /// Bottom-up recompute of every internal sum; O(cap).
    fn rebuild(&mut self) {
        if self.cap > 0 {
            for t in (0..self.cap - 1).rev() {
                self.nodes[t] = self.nodes[2 * t + 1] + self.nodes[2 * t + 2];
            }
        }
        self.updates_since_rebuild = 0;
        self.rebuilds += 1;
    }

    fn grow(&mut self, new_cap: usize) {
        debug_assert!(new_cap.is_power_of_two() && new_cap >= self.leaf_count.max(1));
        let mut nodes = vec![0.0; 2 * new_cap - 1];
        let mut leaf_ids = vec![usize::MAX; new_cap];
        for leaf in 0..self.leaf_count {
            nodes[new_cap - 1 + leaf] = self.nodes[self.cap - 1 + leaf];
            leaf_ids[leaf] = self.leaf_ids[leaf];
        }
        self.cap = new_cap;
        self.nodes = nodes;
        self.leaf_ids = leaf_ids;
        self.rebuild();
    }
}
