//! Small dense linear algebra over GF(p) for prime p (2 or 3 here).
//!
//! Matrices are Vec<Vec<u8>> with entries already reduced mod p. Row
//! operations are exact; everything is O(rows * cols * min) which is plenty
//! for tableau-sized systems.

/// x^{-1} mod p for x != 0, by Fermat (p is prime and tiny).
pub fn inv_mod(x: u8, p: u8) -> u8 {
    debug_assert!(x % p != 0);
    let mut acc = 1u32;
    for _ in 0..(p - 2) {
        acc = acc * x as u32 % p as u32;
    }
    acc as u8
}

pub fn add_mod(a: u8, b: u8, p: u8) -> u8 {
    ((a as u16 + b as u16) % p as u16) as u8
}

pub fn sub_mod(a: u8, b: u8, p: u8) -> u8 {
    ((a as i16 - b as i16).rem_euclid(p as i16)) as u8
}

pub fn mul_mod(a: u8, b: u8, p: u8) -> u8 {
    (a as u16 * b as u16 % p as u16) as u8
}

/// Reduced row echelon form in place; returns the pivot column of each
/// produced row (so the rank is the returned length).
pub fn rref(rows: &mut Vec<Vec<u8>>, p: u8) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot_row) = (r..rows.len()).find(|&i| rows[i][col] % p != 0) else {
            continue;
        };
        rows.swap(r, pivot_row);
        let inv = inv_mod(rows[r][col], p);
        for v in rows[r].iter_mut() {
            *v = mul_mod(*v, inv, p);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] % p != 0 {
                let factor = rows[i][col];
                for c in 0..ncols {
                    let sub = mul_mod(factor, rows[r][c], p);
                    rows[i][c] = sub_mod(rows[i][c], sub, p);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[Vec<u8>], p: u8) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    rref(&mut m, p).len()
}

/// Solve sum_j coeff_j * rows[j] = target over GF(p). Returns one solution's
/// coefficients, or None if the target is outside the row span.
pub fn solve_combination(rows: &[Vec<u8>], target: &[u8], p: u8) -> Option<Vec<u8>> {
    let n = rows.len();
    let ncols = target.len();
    // augment each row with an indicator so the elimination tracks the
    // combination that produced it
    let mut work: Vec<Vec<u8>> = rows
        .iter()
        .enumerate()
        .map(|(j, row)| {
            debug_assert_eq!(row.len(), ncols);
            let mut w = row.clone();
            w.extend(std::iter::repeat(0).take(n));
            w[ncols + j] = 1;
            w
        })
        .collect();
    let mut t: Vec<u8> = target.to_vec();
    let mut combo = vec![0u8; n];
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot_row) = (r..work.len()).find(|&i| work[i][col] % p != 0) else {
            continue;
        };
        work.swap(r, pivot_row);
        let inv = inv_mod(work[r][col], p);
        for v in work[r].iter_mut() {
            *v = mul_mod(*v, inv, p);
        }
        if t[col] % p != 0 {
            let factor = t[col];
            for c in 0..ncols {
                t[c] = sub_mod(t[c], mul_mod(factor, work[r][c], p), p);
            }
            for j in 0..n {
                combo[j] = add_mod(combo[j], mul_mod(factor, work[r][ncols + j], p), p);
            }
        }
        for i in 0..work.len() {
            if i != r && work[i][col] % p != 0 {
                let factor = work[i][col];
                for c in 0..(ncols + n) {
                    let sub = mul_mod(factor, work[r][c], p);
                    work[i][c] = sub_mod(work[i][c], sub, p);
                }
            }
        }
        r += 1;
        if r == work.len() {
            break;
        }
    }
    if t.iter().all(|&v| v % p == 0) {
        Some(combo)
    } else {
        None
    }
}

/// Solve the linear system M x = rhs over GF(p) (M given by rows). Returns
/// one solution, or None if inconsistent.
pub fn solve_system(m: &[Vec<u8>], rhs: &[u8], p: u8) -> Option<Vec<u8>> {
    let nrows = m.len();
    debug_assert_eq!(rhs.len(), nrows);
    let ncols = m.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<u8>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut w = row.clone();
            w.push(b);
            w
        })
        .collect();
    let pivots = rref(&mut aug, p);
    // inconsistent if any pivot landed in the augmented column
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![0u8; ncols];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = aug[row][ncols];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(1, 2), 1);
        assert_eq!(inv_mod(1, 3), 1);
        assert_eq!(inv_mod(2, 3), 2); // 2*2 = 4 = 1 mod 3
    }

    #[test]
    fn rref_rank_gf3() {
        let mut m = vec![vec![1, 2, 0], vec![0, 1, 2], vec![0, 0, 1]];
        let pivots = rref(&mut m, 3);
        assert_eq!(pivots.len(), 3);
        // [2, 1, 0] = 2 * [1, 2, 0] over GF(3)
        let dep = vec![vec![1, 2, 0], vec![2, 1, 0]];
        assert_eq!(rank(&dep, 3), 1);
    }

    #[test]
    fn combination_solver_finds_witness() {
        let rows = vec![vec![1, 0, 2], vec![0, 1, 1]];
        // 2*r0 + 2*r1 = (2, 2, 0) over GF(3)
        let target = vec![2u8, 2, 0];
        let combo = solve_combination(&rows, &target, 3).unwrap();
        let mut acc = vec![0u8; 3];
        for (j, row) in rows.iter().enumerate() {
            for c in 0..3 {
                acc[c] = add_mod(acc[c], mul_mod(combo[j], row[c], 3), 3);
            }
        }
        assert_eq!(acc, target);
        assert!(solve_combination(&rows, &[0, 0, 1], 3).is_none());
    }

    #[test]
    fn system_solver_gf2_and_gf3() {
        // x0 + x1 = 1, x1 = 1 over GF(2)
        let m = vec![vec![1, 1], vec![0, 1]];
        let x = solve_system(&m, &[1, 1], 2).unwrap();
        assert_eq!(x, vec![0, 1]);
        // inconsistent
        let m = vec![vec![1, 1], vec![1, 1]];
        assert!(solve_system(&m, &[1, 0], 2).is_none());
        // underdetermined GF(3): one valid solution accepted
        let m = vec![vec![1, 1, 1]];
        let x = solve_system(&m, &[2], 3).unwrap();
        let s: u16 = x.iter().map(|&v| v as u16).sum();
        assert_eq!(s % 3, 2);
    }
}
