use super::ParityCheckCode;
use crate::error::{Error, Result};
use crate::prng::Stream;

const MAX_REPAIR_ATTEMPTS: usize = 10_000;

/// Random regular code from a shuffled list of edge sockets.
///
/// Every variable node gets `col_degree` sockets; the sockets are shuffled
/// with a seeded Fisher–Yates pass and dealt to checks `row_degree` at a time.
/// Parallel edges are repaired by swapping sockets with a random partner
/// check, which keeps both degree sequences exact.
pub fn generate_gallager(
    n: usize,
    col_degree: usize,
    row_degree: usize,
    seed: u64,
) -> Result<ParityCheckCode> {
    if col_degree < 2 {
        return Err(Error::Construction(format!(
            "column degree must be at least 2, got {col_degree}"
        )));
    }
    if row_degree == 0 || row_degree > n || (n * col_degree) % row_degree != 0 {
        return Err(Error::Construction(format!(
            "n * col_degree = {} is not divisible by row_degree = {row_degree}",
            n * col_degree
        )));
    }
    let m = n * col_degree / row_degree;
    if m >= n {
        return Err(Error::Construction(format!(
            "degrees ({col_degree}, {row_degree}) give {m} checks for {n} symbols"
        )));
    }

    let mut rng = Stream::new(seed);
    let mut sockets: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat(v).take(col_degree))
        .collect();
    rng.shuffle(&mut sockets);

    let check_of = |socket: usize| socket / row_degree;
    let holds = |sockets: &[usize], check: usize, var: usize| {
        sockets[check * row_degree..(check + 1) * row_degree].contains(&var)
    };

    let mut attempts = 0;
    loop {
        let dup = (0..sockets.len()).find(|&a| {
            let c = check_of(a);
            sockets[c * row_degree..a].contains(&sockets[a])
        });
        let Some(a) = dup else { break };
        let ca = check_of(a);
        loop {
            attempts += 1;
            if attempts > MAX_REPAIR_ATTEMPTS {
                return Err(Error::Construction(format!(
                    "could not remove parallel edges after {MAX_REPAIR_ATTEMPTS} swaps"
                )));
            }
            let b = rng.below(sockets.len() as u64) as usize;
            let cb = check_of(b);
            if cb == ca || holds(&sockets, cb, sockets[a]) || holds(&sockets, ca, sockets[b]) {
                continue;
            }
            sockets.swap(a, b);
            break;
        }
    }

    let rows = sockets.chunks(row_degree).map(<[usize]>::to_vec).collect();
    ParityCheckCode::from_rows(n, rows)
}
