use super::partition::Partition;

/// Littlewood–Richardson coefficient `c^ν_{λ,μ}`: the number of semistandard
/// skew tableaux of shape `ν/λ` and content `μ` whose reverse reading word is
/// a lattice word. Returns 0 when sizes do not match or `λ ⊄ ν`.
pub fn lr_coeff(lambda: &Partition, mu: &Partition, nu: &Partition) -> u64 {
    if nu.size() != lambda.size() + mu.size() || !nu.contains(lambda) || !nu.contains(mu) {
        return 0;
    }
    if mu.is_empty() {
        return 1;
    }
    // Cells of ν/λ in reverse reading order: rows top to bottom, right to left.
    let mut cells = Vec::new();
    for r in 0..nu.length() {
        for c in (lambda.part(r)..nu.part(r)).rev() {
            cells.push((r, c));
        }
    }
    let mut state = Filler {
        lambda,
        nu,
        mu: mu.parts(),
        cells: &cells,
        grid: nu.parts().iter().map(|&l| vec![0usize; l]).collect(),
        counts: vec![0; mu.length() + 1],
    };
    state.fill(0)
}

struct Filler<'a> {
    lambda: &'a Partition,
    nu: &'a Partition,
    mu: &'a [usize],
    cells: &'a [(usize, usize)],
    grid: Vec<Vec<usize>>,
    counts: Vec<usize>,
}

impl Filler<'_> {
    fn fill(&mut self, idx: usize) -> u64 {
        let Some(&(r, c)) = self.cells.get(idx) else {
            return 1;
        };
        // Row weakly increases to the right; the right neighbour is filled already.
        let hi = if c + 1 < self.nu.part(r) { self.grid[r][c + 1] } else { self.mu.len() };
        // Column strictly increases downward.
        let lo = if r > 0 && c >= self.lambda.part(r - 1) { self.grid[r - 1][c] + 1 } else { 1 };
        let mut total = 0;
        for v in lo..=hi {
            if self.counts[v] >= self.mu[v - 1] {
                continue;
            }
            if v > 1 && self.counts[v] + 1 > self.counts[v - 1] {
                continue;
            }
            self.counts[v] += 1;
            self.grid[r][c] = v;
            total += self.fill(idx + 1);
            self.counts[v] -= 1;
        }
        self.grid[r][c] = 0;
        total
    }
}
