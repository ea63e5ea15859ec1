//! Exact processor-sharing lane: all resident jobs progress at
//! `speed / n`, with completions scheduled event-to-event (no quanta).

use super::engine::Req;

#[derive(Debug)]
pub(crate) struct PsJob {
    pub req: Req,
    pub remaining: f64,
}

#[derive(Debug)]
pub(crate) struct PsLane {
    pub speed: f64,
    pub jobs: Vec<PsJob>,
    pub last_t: f64,
    /// Bumped whenever the job set changes; stale completion events carry
    /// an older epoch and are ignored.
    pub epoch: u64,
}

impl PsLane {
    pub fn new(speed: f64) -> Self {
        PsLane {
            speed,
            jobs: Vec::new(),
            last_t: 0.0,
            epoch: 0,
        }
    }

    /// Advances every resident job's progress to `now`.
    pub fn advance(&mut self, now: f64) {
        let n = self.jobs.len();
        if n > 0 && now > self.last_t {
            let each = self.speed * (now - self.last_t) / n as f64;
            for j in &mut self.jobs {
                j.remaining -= each;
            }
        }
        self.last_t = now;
    }

    pub fn push(&mut self, now: f64, req: Req, work: f64) {
        self.advance(now);
        self.jobs.push(PsJob { req, remaining: work });
    }

    /// Time of the next completion if the job set stays as is.
    pub fn next_completion(&self) -> Option<f64> {
        let min = self
            .jobs
            .iter()
            .map(|j| j.remaining)
            .fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            Some(self.last_t + min.max(0.0) * self.jobs.len() as f64 / self.speed)
        } else {
            None
        }
    }

    /// Removes and returns the job with the least remaining work (the one
    /// the pending completion event refers to). Ties resolve to the
    /// earliest-added job.
    pub fn pop_min(&mut self, now: f64) -> Option<PsJob> {
        self.advance(now);
        if self.jobs.is_empty() {
            return None;
        }
        let mut idx = 0;
        for (i, j) in self.jobs.iter().enumerate() {
            if j.remaining < self.jobs[idx].remaining {
                idx = i;
            }
        }
        Some(self.jobs.remove(idx))
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }
}
