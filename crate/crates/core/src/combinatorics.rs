//! Binomials and factorials, exact where they fit and in log-space otherwise.

/// Exact `C(n, j)`, `None` on u128 overflow. `C(n, j) = 0` for `j > n`.
pub fn binomial_u128(n: u64, j: u64) -> Option<u128> {
    if j > n {
        return Some(0);
    }
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `ln C(n, j)`, `-inf` when `j > n`. Costs O(min(j, n - j)).
pub fn ln_binomial(n: u64, j: u64) -> f64 {
    if j > n {
        return f64::NEG_INFINITY;
    }
    let j = j.min(n - j);
    (0..j).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Table of `ln i!` for `i = 0..=n`.
#[derive(Clone, Debug)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).ln();
            table.push(acc);
        }
        LnFactorials { table }
    }

    pub fn ln_factorial(&self, i: usize) -> f64 {
        self.table[i]
    }

    pub fn ln_multinomial(&self, parts: &[usize]) -> f64 {
        let n: usize = parts.iter().sum();
        self.table[n] - parts.iter().map(|&p| self.table[p]).sum::<f64>()
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
