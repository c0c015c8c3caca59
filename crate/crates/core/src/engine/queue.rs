use crate::riemann::Side;
use crate::solution::EventKind;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// What an event refers to; front slots carry the version they were scheduled with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Pair { a: usize, va: u32, b: usize, vb: u32 },
    Wall { a: usize, va: u32, side: Side },
    Data { side: Side },
    Split { j: usize },
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub target: Target,
}

fn rank(kind: EventKind) -> u8 {
    match kind {
        EventKind::FrontFront => 0,
        EventKind::LatticeCross => 1,
        EventKind::FrontBoundary => 2,
        EventKind::BoundaryDataJump => 3,
        EventKind::SplitLine => 4,
        EventKind::End | EventKind::Initial => 5,
    }
}

struct Entry {
    event: Event,
    key: (u8, u64, u64),
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed for a min-heap on (time, rank, lowest id, insertion order).
    fn cmp(&self, other: &Self) -> Ordering {
        other.event.time.total_cmp(&self.event.time).then_with(|| other.key.cmp(&self.key))
    }
}

#[derive(Default)]
pub struct Queue {
    heap: BinaryHeap<Entry>,
    seq: u64,
}

impl Queue {
    pub fn push(&mut self, event: Event) {
        let id = match event.target {
            Target::Pair { a, b, .. } => a.min(b) as u64,
            Target::Wall { a, .. } => a as u64,
            Target::Data { side } => side as u64,
            Target::Split { j } => j as u64,
            Target::End => 0,
        };
        self.seq += 1;
        self.heap.push(Entry { event, key: (rank(event.kind), id, self.seq) });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|e| e.event)
    }
}
