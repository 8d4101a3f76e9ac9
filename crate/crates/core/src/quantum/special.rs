//! Physicists' Hermite polynomials and Kummer's confluent hypergeometric series.

/// `Hₙ(y)` by `Hₙ₊₁ = 2yHₙ − 2nHₙ₋₁`.
pub fn hermite(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * y);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let next = 2.0 * y * cur - 2.0 * m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients of `Hₙ`, lowest power first.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for m in 1..n {
        let mut next = vec![0.0; m + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= 2.0 * m as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Partial sum `Σ_{j<terms} (a)_j/(b)_j x^j/j!` of `₁F₁(a; b; x)`.
pub fn kummer_series(a: f64, b: f64, x: f64, terms: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 0..terms {
        sum += term;
        let jf = j as f64;
        term *= (a + jf) / (b + jf) * x / (jf + 1.0);
    }
    sum
}

/// `₁F₁(−n; b; x)`, a polynomial of degree `n`.
pub fn kummer_terminating(n: usize, b: f64, x: f64) -> f64 {
    kummer_series(-(n as f64), b, x, n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hermite_low_orders() {
        let table: [fn(f64) -> f64; 5] = [
            |_| 1.0,
            |y| 2.0 * y,
            |y| 4.0 * y * y - 2.0,
            |y| 8.0 * y.powi(3) - 12.0 * y,
            |y| 16.0 * y.powi(4) - 48.0 * y * y + 12.0,
        ];
        for y in [-1.3, 0.0, 0.5, 2.0] {
            for (n, h) in table.iter().enumerate() {
                assert!((hermite(n, y) - h(y)).abs() < 1e-12);
                let c = hermite_coefficients(n);
                let v: f64 = c.iter().enumerate().map(|(i, c)| c * y.powi(i as i32)).sum();
                assert!((v - h(y)).abs() < 1e-12);
            }
        }
        assert!(hermite(2, 0.5f64.sqrt()).abs() < 1e-15);
        assert!(hermite(3, 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kummer_terminates() {
        for n in 0..8 {
            for x in [0.1, 1.0, 7.5, 30.0] {
                let b = 3.7;
                let exact = kummer_terminating(n, b, x);
                let longer = kummer_series(-(n as f64), b, x, n + 6);
                assert_eq!(exact, longer);
            }
        }
        assert_eq!(kummer_terminating(0, 2.0, 5.0), 1.0);
        assert!((kummer_terminating(1, 2.0, 5.0) - (1.0 - 2.5)).abs() < 1e-15);
        // ₁F₁(a; a; x) = eˣ.
        assert!((kummer_series(1.3, 1.3, 0.7, 40) - 0.7f64.exp()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hermite_parity(n in 0usize..12, y in -3.0f64..3.0) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let (a, b) = (hermite(n, -y), sign * hermite(n, y));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
