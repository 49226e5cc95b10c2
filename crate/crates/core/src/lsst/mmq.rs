use crate::error::{LaplaxError, Result};

const NIL: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Absent,
    Queued,
    Deleted,
}

/// Priority queue for keys of the form `current_min + l_j` with `l_j` drawn
/// from a fixed set of `k` lengths.
///
/// Each length class owns a FIFO queue whose keys are non-decreasing; an
/// indexed binary heap orders the non-empty queue heads. Insert and
/// decrease-key are O(1) plus one heap sift; delete-min is O(log k).
#[derive(Clone, Debug)]
pub struct MonotoneMultiQueue {
    lengths: Vec<f64>,
    head: Vec<usize>,
    tail: Vec<usize>,
    key: Vec<f64>,
    queue_of: Vec<usize>,
    prev: Vec<usize>,
    next: Vec<usize>,
    state: Vec<State>,
    heap: Vec<usize>,
    heap_pos: Vec<usize>,
    last_deleted: f64,
    len: usize,
}

impl MonotoneMultiQueue {
    /// `lengths` are the class lengths `l_1..l_k`; elements are ids in
    /// `0..capacity`. An extra internal class of length 0 receives sources.
    pub fn new(lengths: &[f64], capacity: usize) -> Result<Self> {
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(LaplaxError::Queue(format!("invalid class length {l}")));
        }
        let mut lengths = lengths.to_vec();
        lengths.push(0.0);
        let k = lengths.len();
        Ok(Self {
            lengths,
            head: vec![NIL; k],
            tail: vec![NIL; k],
            key: vec![f64::INFINITY; capacity],
            queue_of: vec![NIL; capacity],
            prev: vec![NIL; capacity],
            next: vec![NIL; capacity],
            state: vec![State::Absent; capacity],
            heap: Vec::with_capacity(k),
            heap_pos: vec![NIL; k],
            last_deleted: 0.0,
            len: 0,
        })
    }

    pub fn class_count(&self) -> usize {
        self.lengths.len() - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, id: usize) -> bool {
        self.state.get(id) == Some(&State::Queued)
    }

    pub fn is_deleted(&self, id: usize) -> bool {
        self.state.get(id) == Some(&State::Deleted)
    }

    pub fn key(&self, id: usize) -> Option<f64> {
        match self.state.get(id) {
            Some(State::Absent) | None => None,
            _ => Some(self.key[id]),
        }
    }

    /// Smallest queued key, or the most recently deleted key when empty.
    pub fn current_min(&self) -> f64 {
        match self.heap.first() {
            Some(&q) => self.key[self.head[q]],
            None => self.last_deleted,
        }
    }

    pub fn find_min(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|&q| {
            let id = self.head[q];
            (id, self.key[id])
        })
    }

    /// Inserts `id` with key `current_min()`; used for Dijkstra sources.
    pub fn insert_source(&mut self, id: usize) -> Result<f64> {
        let j = self.lengths.len() - 1;
        self.insert_class(id, j)
    }

    /// Inserts `id` with key `current_min() + l_j`.
    pub fn insert(&mut self, id: usize, j: usize) -> Result<f64> {
        self.check_class(j)?;
        self.insert_class(id, j)
    }

    /// Lowers the key of a queued `id` to `current_min() + l_j`.
    pub fn decrease_key(&mut self, id: usize, j: usize) -> Result<f64> {
        self.check_class(j)?;
        self.check_id(id)?;
        if self.state[id] != State::Queued {
            return Err(LaplaxError::Queue(format!("decrease_key on element {id} that is not queued")));
        }
        let new_key = self.current_min() + self.lengths[j];
        let old = self.key[id];
        if new_key > old {
            return Err(LaplaxError::Queue(format!("decrease_key would raise key of {id} from {old} to {new_key}")));
        }
        if new_key == old {
            return Ok(old);
        }
        let q = self.queue_of[id];
        if self.prev[id] != NIL {
            self.unlink(id);
            self.len -= 1;
            self.fix_queue(q);
            self.append(id, j, new_key);
        } else {
            self.key[id] = new_key;
            self.sift_up(self.heap_pos[q]);
        }
        Ok(new_key)
    }

    pub fn delete_min(&mut self) -> Result<(usize, f64)> {
        let &q = self.heap.first().ok_or_else(|| LaplaxError::Queue("delete_min on empty queue".into()))?;
        let id = self.head[q];
        let k = self.key[id];
        self.unlink(id);
        self.len -= 1;
        self.state[id] = State::Deleted;
        self.last_deleted = k;
        self.fix_queue(q);
        Ok((id, k))
    }

    fn check_class(&self, j: usize) -> Result<()> {
        if j >= self.lengths.len() - 1 {
            return Err(LaplaxError::Queue(format!("class {j} out of range (k = {})", self.lengths.len() - 1)));
        }
        Ok(())
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.state.len() {
            return Err(LaplaxError::Queue(format!("element {id} out of range")));
        }
        Ok(())
    }

    fn insert_class(&mut self, id: usize, j: usize) -> Result<f64> {
        self.check_id(id)?;
        match self.state[id] {
            State::Absent => {}
            State::Queued => return Err(LaplaxError::Queue(format!("element {id} already queued"))),
            State::Deleted => return Err(LaplaxError::Queue(format!("element {id} was deleted"))),
        }
        let k = self.current_min() + self.lengths[j];
        self.append(id, j, k);
        Ok(k)
    }

    fn append(&mut self, id: usize, j: usize, k: f64) {
        debug_assert!(self.tail[j] == NIL || self.key[self.tail[j]] <= k);
        self.key[id] = k;
        self.queue_of[id] = j;
        self.state[id] = State::Queued;
        self.next[id] = NIL;
        self.prev[id] = self.tail[j];
        if self.tail[j] == NIL {
            self.head[j] = id;
            self.tail[j] = id;
            self.heap_push(j);
        } else {
            self.next[self.tail[j]] = id;
            self.tail[j] = id;
        }
        self.len += 1;
    }

    /// Removes `id` from its queue's list without touching the heap.
    fn unlink(&mut self, id: usize) {
        let q = self.queue_of[id];
        let (p, n) = (self.prev[id], self.next[id]);
        if p == NIL {
            self.head[q] = n;
        } else {
            self.next[p] = n;
        }
        if n == NIL {
            self.tail[q] = p;
        } else {
            self.prev[n] = p;
        }
        self.prev[id] = NIL;
        self.next[id] = NIL;
    }

    /// Restores the heap entry for queue `q` after its head changed.
    fn fix_queue(&mut self, q: usize) {
        let pos = self.heap_pos[q];
        if self.head[q] == NIL {
            if pos != NIL {
                self.heap_remove(pos);
            }
        } else if pos != NIL {
            let pos = self.sift_up(pos);
            self.sift_down(pos);
        }
    }

    fn less(&self, a: usize, b: usize) -> bool {
        let (ka, kb) = (self.key[self.head[a]], self.key[self.head[b]]);
        ka < kb || (ka == kb && a < b)
    }

    fn heap_push(&mut self, q: usize) {
        self.heap.push(q);
        self.heap_pos[q] = self.heap.len() - 1;
        self.sift_up(self.heap.len() - 1);
    }

    fn heap_remove(&mut self, pos: usize) {
        let q = self.heap[pos];
        let last = self.heap.len() - 1;
        self.heap.swap(pos, last);
        self.heap_pos[self.heap[pos]] = pos;
        self.heap.pop();
        self.heap_pos[q] = NIL;
        if pos < self.heap.len() {
            let pos = self.sift_up(pos);
            self.sift_down(pos);
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.heap_pos[self.heap[a]] = a;
        self.heap_pos[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut pos: usize) -> usize {
        while pos > 0 {
            let parent = (pos - 1) / 2;
            if self.less(self.heap[pos], self.heap[parent]) {
                self.swap(pos, parent);
                pos = parent;
            } else {
                break;
            }
        }
        pos
    }

    fn sift_down(&mut self, mut pos: usize) {
        loop {
            let (l, r) = (2 * pos + 1, 2 * pos + 2);
            let mut best = pos;
            if l < self.heap.len() && self.less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == pos {
                break;
            }
            self.swap(pos, best);
            pos = best;
        }
    }
}
