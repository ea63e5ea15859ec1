//! Pending-event queue: a min-heap on (time, sequence). Equal timestamps
//! dequeue in push order, which makes replay deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Ev {
    Arrival { app: usize, epoch: u64 },
    BucketRelease { app: usize, epoch: u64 },
    CpuDone { app: usize, lane: usize, epoch: u64 },
    DevFcfsDone { dev: usize },
    DevQuantum { dev: usize, epoch: u64 },
    DevPsDone { dev: usize, lane: usize, epoch: u64 },
    DevBatchDone { dev: usize },
    StepChange { app: usize },
    MonitorTick,
    MigrateDone { app: usize },
}

#[derive(Debug)]
struct Entry {
    t: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.t == other.t && self.seq == other.seq
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the earliest event.
        // Simulation times are always finite.
        other
            .t
            .partial_cmp(&self.t)
            .expect("event times are not NaN")
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Entry>,
    seq: u64,
    processed: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        EventQueue::default()
    }

    pub fn push(&mut self, t: f64, ev: Ev) {
        let seq = self.seq;
        self.seq += 1;
        self.heap.push(Entry { t, seq, ev });
    }

    pub fn pop(&mut self) -> Option<(f64, Ev)> {
        let e = self.heap.pop()?;
        self.processed += 1;
        Some((e.t, e.ev))
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dequeues_in_time_then_push_order() {
        let mut q = EventQueue::new();
        q.push(2.0, Ev::MonitorTick);
        q.push(1.0, Ev::Arrival { app: 0, epoch: 0 });
        q.push(1.0, Ev::Arrival { app: 1, epoch: 0 });
        q.push(0.5, Ev::Arrival { app: 2, epoch: 0 });
        let order: Vec<(f64, Ev)> = std::iter::from_fn(|| q.pop()).collect();
        assert_eq!(order[0], (0.5, Ev::Arrival { app: 2, epoch: 0 }));
        assert_eq!(order[1], (1.0, Ev::Arrival { app: 0, epoch: 0 }));
        assert_eq!(order[2], (1.0, Ev::Arrival { app: 1, epoch: 0 }));
        assert_eq!(order[3], (2.0, Ev::MonitorTick));
    }
}
