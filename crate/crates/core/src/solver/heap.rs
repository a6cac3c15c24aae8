//! Indexed binary max-heap over variables, ordered by VSIDS activity.
//!
//! Ties are broken by a per-variable priority drawn from the solver's seed,
//! then by variable index, so decision order is a pure function of
//! (formula, config, seed).

/// Ordering keys: activity first, seeded tie-break priority second.
pub(super) struct HeapKeys<'a> {
    pub activity: &'a [f64],
    pub tie_break: &'a [u64],
}

impl HeapKeys<'_> {
    fn better(&self, a: usize, b: usize) -> bool {
        let (aa, ab) = (self.activity[a], self.activity[b]);
        if aa != ab {
            return aa > ab;
        }
        if self.tie_break[a] != self.tie_break[b] {
            return self.tie_break[a] < self.tie_break[b];
        }
        a < b
    }
}

pub(super) struct VarHeap {
    heap: Vec<u32>,
    /// Position of each variable in `heap`, or `NOT_IN_HEAP`.
    indices: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl VarHeap {
    pub fn new(num_vars: usize, keys: &HeapKeys) -> Self {
        let mut h = VarHeap {
            heap: Vec::with_capacity(num_vars),
            indices: vec![NOT_IN_HEAP; num_vars],
        };
        for v in 0..num_vars {
            h.insert(v, keys);
        }
        h
    }

    pub fn in_heap(&self, var: usize) -> bool {
        self.indices[var] != NOT_IN_HEAP
    }

    pub fn insert(&mut self, var: usize, keys: &HeapKeys) {
        debug_assert!(!self.in_heap(var));
        self.indices[var] = self.heap.len() as u32;
        self.heap.push(var as u32);
        self.percolate_up(self.heap.len() - 1, keys);
    }

    /// Restores heap order after `var`'s activity increased.
    pub fn decrease(&mut self, var: usize, keys: &HeapKeys) {
        if self.in_heap(var) {
            self.percolate_up(self.indices[var] as usize, keys);
        }
    }

    pub fn pop_max(&mut self, keys: &HeapKeys) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0] as usize;
        let last = self.heap.pop().expect("non-empty");
        self.indices[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.indices[last as usize] = 0;
            self.percolate_down(0, keys);
        }
        Some(top)
    }

    fn percolate_up(&mut self, mut pos: usize, keys: &HeapKeys) {
        let var = self.heap[pos];
        while pos > 0 {
            let parent = (pos - 1) >> 1;
            if !keys.better(var as usize, self.heap[parent] as usize) {
                break;
            }
            self.heap[pos] = self.heap[parent];
            self.indices[self.heap[pos] as usize] = pos as u32;
            pos = parent;
        }
        self.heap[pos] = var;
        self.indices[var as usize] = pos as u32;
    }

    fn percolate_down(&mut self, mut pos: usize, keys: &HeapKeys) {
        let var = self.heap[pos];
        loop {
            let left = 2 * pos + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && keys.better(self.heap[right] as usize, self.heap[left] as usize)
            {
                right
            } else {
                left
            };
            if !keys.better(self.heap[child] as usize, var as usize) {
                break;
            }
            self.heap[pos] = self.heap[child];
            self.indices[self.heap[pos] as usize] = pos as u32;
            pos = child;
        }
        self.heap[pos] = var;
        self.indices[var as usize] = pos as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_activity_order() {
        let activity = vec![0.5, 2.0, 1.0, 2.0];
        let tie_break = vec![9, 3, 7, 1];
        let keys = HeapKeys {
            activity: &activity,
            tie_break: &tie_break,
        };
        let mut heap = VarHeap::new(4, &keys);
        // equal activities 1 and 3: var 3 has the smaller tie priority
        assert_eq!(heap.pop_max(&keys), Some(3));
        assert_eq!(heap.pop_max(&keys), Some(1));
        assert_eq!(heap.pop_max(&keys), Some(2));
        assert_eq!(heap.pop_max(&keys), Some(0));
        assert_eq!(heap.pop_max(&keys), None);
    }

    #[test]
    fn reinsert_and_decrease() {
        let mut activity = vec![0.0; 3];
        let tie_break = vec![0, 1, 2];
        {
            let keys = HeapKeys {
                activity: &activity,
                tie_break: &tie_break,
            };
            let mut heap = VarHeap::new(3, &keys);
            assert_eq!(heap.pop_max(&keys), Some(0));
            assert!(!heap.in_heap(0));
            heap.insert(0, &keys);
            assert!(heap.in_heap(0));
        }
        activity[2] = 5.0;
        let keys = HeapKeys {
            activity: &activity,
            tie_break: &tie_break,
        };
        let mut heap = VarHeap::new(3, &keys);
        heap.decrease(2, &keys);
        assert_eq!(heap.pop_max(&keys), Some(2));
    }
}
