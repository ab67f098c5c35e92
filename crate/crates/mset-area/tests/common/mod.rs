//! Independent reference implementation of the backward recursion: plain
//! sequential order, full-range convolution sum (no parity split), no band
//! shortcut, `BigRational` arithmetic throughout.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub struct OracleTable {
    rows: Vec<Vec<BigRational>>,
    m_done: u64,
}

fn row_start(n: u32) -> u64 {
    (1u64 << (n + 1)) - 1
}

fn deepest_row(m: u64) -> u32 {
    (63 - (m + 1).leading_zeros()).saturating_sub(1)
}

impl OracleTable {
    pub fn beta(&self, n: u32, m: u64) -> BigRational {
        if m == 0 {
            return BigRational::one();
        }
        let start = row_start(n);
        if n >= 1 && m < start {
            return BigRational::zero();
        }
        self.rows[n as usize][(m - start) as usize].clone()
    }

    #[allow(dead_code)]
    pub fn b(&self, m: u64) -> BigRational {
        self.beta(0, m + 1)
    }

    #[allow(dead_code)]
    pub fn m_done(&self) -> u64 {
        self.m_done
    }

    pub fn compute(m_target: u64) -> Self {
        let mut table = OracleTable {
            rows: Vec::new(),
            m_done: 0,
        };
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        for m in 1..=m_target {
            for n in (0..=deepest_row(m)).rev() {
                let start = row_start(n);
                let up = table.beta(n + 1, m);
                // full-range sum k = 2^{n+1}-1 ..= m - 2^{n+1} + 1
                let mut conv = BigRational::zero();
                if m >= 2 * start {
                    for k in start..=(m - start) {
                        conv += table.beta(n, k) * table.beta(n, m - k);
                    }
                }
                let head = table.beta(0, m - start);
                let value = &half * (up - conv - head);
                while table.rows.len() <= n as usize {
                    table.rows.push(Vec::new());
                }
                assert_eq!(table.rows[n as usize].len() as u64, m - start);
                table.rows[n as usize].push(value);
            }
            table.m_done = m;
        }
        table
    }
}
