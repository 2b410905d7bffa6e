use std::collections::BTreeMap;

/// Virtual time in seconds.
pub type Seconds = u64;

/// Event queue ordered by `(time, insertion sequence)`. Time never decreases.
#[derive(Debug, Clone)]
pub struct VirtualClock<T> {
    now: Seconds,
    seq: u64,
    queue: BTreeMap<(Seconds, u64), T>,
}

impl<T> Default for VirtualClock<T> {
    fn default() -> Self {
        VirtualClock {
            now: 0,
            seq: 0,
            queue: BTreeMap::new(),
        }
    }
}

impl<T> VirtualClock<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    /// Panics if `at` is in the past.
    pub fn schedule_at(&mut self, at: Seconds, item: T) {
        assert!(
            at >= self.now,
            "cannot schedule at {at}, clock is at {}",
            self.now
        );
        self.queue.insert((at, self.seq), item);
        self.seq += 1;
    }

    pub fn schedule_in(&mut self, delay: Seconds, item: T) {
        self.schedule_at(self.now + delay, item);
    }

    pub fn peek_time(&self) -> Option<Seconds> {
        self.queue.keys().next().map(|&(t, _)| t)
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Pops the earliest item and moves the clock to its time.
    pub fn pop(&mut self) -> Option<(Seconds, T)> {
        let ((t, _), item) = self.queue.pop_first()?;
        self.now = t;
        Some((t, item))
    }

    /// Moves the clock forward without popping. Panics if that would skip a
    /// queued item or move backwards.
    pub fn advance_to(&mut self, t: Seconds) {
        assert!(t >= self.now, "clock cannot move backwards");
        if let Some(next) = self.peek_time() {
            assert!(
                t <= next,
                "advance_to({t}) would skip an item due at {next}"
            );
        }
        self.now = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_then_insertion_order() {
        let mut c = VirtualClock::new();
        c.schedule_at(10, "b");
        c.schedule_at(5, "a");
        c.schedule_at(10, "c");
        assert_eq!(c.pop(), Some((5, "a")));
        assert_eq!(c.now(), 5);
        assert_eq!(c.pop(), Some((10, "b")));
        assert_eq!(c.pop(), Some((10, "c")));
        assert_eq!(c.pop(), None);
        assert_eq!(c.now(), 10);
    }

    #[test]
    #[should_panic(expected = "cannot schedule")]
    fn refuses_the_past() {
        let mut c = VirtualClock::new();
        c.schedule_at(10, ());
        c.pop();
        c.schedule_at(9, ());
    }
}
