//! Token-bucket regulator: tokens accrue at the declared rate up to the
//! burst cap; each request consumes one or waits, in arrival order.

const TOKEN_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TokenBucket {
    rate_rps: f64,
    burst: f64,
    tokens: f64,
    last: f64,
}

impl TokenBucket {
    /// A bucket that starts full at t = 0.
    pub fn new(rate_rps: f64, burst: f64) -> Self {
        TokenBucket {
            rate_rps,
            burst,
            tokens: burst,
            last: 0.0,
        }
    }

    pub fn rate_rps(&self) -> f64 {
        self.rate_rps
    }

    fn refill(&mut self, now: f64) {
        if now > self.last {
            self.tokens = (self.tokens + (now - self.last) * self.rate_rps).min(self.burst);
            self.last = now;
        }
    }

    /// Consumes one token at `now` if available.
    pub fn try_take(&mut self, now: f64) -> bool {
        self.refill(now);
        if self.tokens >= 1.0 - TOKEN_EPS {
            self.tokens -= 1.0;
            true
        } else {
            false
        }
    }

    /// Earliest instant at or after `now` when one token will be available.
    pub fn next_token_time(&mut self, now: f64) -> f64 {
        self.refill(now);
        if self.tokens >= 1.0 - TOKEN_EPS {
            now
        } else {
            self.last + (1.0 - self.tokens) / self.rate_rps
        }
    }

    /// Re-rates the bucket, settling accrual at the old rate first.
    pub fn set_rate(&mut self, now: f64, rate_rps: f64) {
        self.refill(now);
        self.rate_rps = rate_rps;
    }

    /// Conforming release times for an ordered arrival sequence: each
    /// request departs at the first instant a token is available for it,
    /// preserving arrival order.
    pub fn release_times(&mut self, arrivals: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(arrivals.len());
        let mut ready = 0.0f64;
        for &a in arrivals {
            let t = self.next_token_time(a.max(ready));
            let took = self.try_take(t);
            debug_assert!(took);
            ready = t;
            out.push(t);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_passes_then_paces() {
        // burst 5, batch of 5 at t=0 -> all pass at 0; a 6th waits 1/rate.
        let mut b = TokenBucket::new(2.0, 5.0);
        let arrivals = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let out = b.release_times(&arrivals);
        assert_eq!(&out[..5], &[0.0; 5]);
        assert!((out[5] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn conforming_traffic_is_not_delayed_beyond_burst_recovery() {
        // Deterministic arrivals at exactly the bucket rate, after an
        // initial burst the size of the bucket.
        let rate = 10.0;
        let burst = 4.0;
        let mut arrivals: Vec<f64> = vec![0.0; burst as usize];
        for k in 1..=200 {
            arrivals.push(f64::from(k) / rate);
        }
        let mut b = TokenBucket::new(rate, burst);
        let out = b.release_times(&arrivals);
        let recovery = burst / rate;
        for (a, r) in arrivals.iter().zip(&out) {
            assert!(r - a <= recovery + 1e-9, "delay {}", r - a);
        }
        // Output rate equals input rate.
        assert_eq!(out.len(), arrivals.len());
        assert!((out.last().unwrap() - arrivals.last().unwrap()).abs() < recovery + 1e-9);
    }

    #[test]
    fn overload_is_clamped_to_the_token_rate() {
        // Offered 2x the rate for 10 s: output rate equals the token rate
        // plus the burst transient.
        let rate = 20.0;
        let burst = 5.0;
        let arrivals: Vec<f64> = (0..400).map(|k| f64::from(k) * 0.025).collect(); // 40/s
        let mut b = TokenBucket::new(rate, burst);
        let out = b.release_times(&arrivals);
        let released_in_10s = out.iter().filter(|t| **t <= 10.0).count() as f64;
        let expected = rate * 10.0 + burst;
        assert!(
            (released_in_10s - expected).abs() <= 1.0,
            "released {released_in_10s} vs {expected}"
        );
        // Order preserved.
        for w in out.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn tokens_cap_at_burst() {
        let mut b = TokenBucket::new(10.0, 3.0);
        // Long idle: still only 3 immediate tokens.
        let out = b.release_times(&[100.0, 100.0, 100.0, 100.0]);
        assert_eq!(&out[..3], &[100.0; 3]);
        assert!((out[3] - 100.1).abs() < 1e-9);
    }
}
