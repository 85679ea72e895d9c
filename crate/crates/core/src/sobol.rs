//! Sobol low-discrepancy points in up to eight dimensions, with a random
//! digital shift per replicate.

/// Joe–Kuo primitive polynomials and initial direction numbers for
/// dimensions 2..=8 as `(degree, a, m)`.
const JOE_KUO: [(u32, u32, &[u32]); 7] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
];

pub const MAX_DIM: usize = 8;
const BITS: usize = 32;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, x) in v.iter_mut().enumerate() {
            *x = 1 << (31 - i);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for i in 0..s.min(BITS) {
        v[i] = m[i] << (31 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// Gray-code Sobol generator producing digitally shifted points in `(0, 1)^d`.
#[derive(Debug, Clone)]
pub struct Sobol {
    dirs: Vec<[u32; BITS]>,
    shift: Vec<u32>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    /// `shift` is XOR-ed onto every coordinate; pass zeros for the raw net.
    pub fn new(dim: usize, shift: &[u32]) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "Sobol dimension must be in 1..=8"
        );
        assert_eq!(shift.len(), dim);
        Self {
            dirs: (0..dim).map(direction_numbers).collect(),
            shift: shift.to_vec(),
            state: vec![0; dim],
            index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// Writes the next point into `out`.
    pub fn next_into(&mut self, out: &mut [f64]) {
        if self.index > 0 {
            let c = self.index.trailing_zeros() as usize;
            assert!(c < BITS, "Sobol sequence exhausted");
            for (s, d) in self.state.iter_mut().zip(&self.dirs) {
                *s ^= d[c];
            }
        }
        self.index += 1;
        for ((o, s), sh) in out.iter_mut().zip(&self.state).zip(&self.shift) {
            *o = ((s ^ sh) as f64 + 0.5) / 4_294_967_296.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points_match_reference() {
        let mut s = Sobol::new(3, &[0, 0, 0]);
        let mut x = [0.0; 3];
        let mut pts = Vec::new();
        for _ in 0..4 {
            s.next_into(&mut x);
            pts.push(x.map(|v| (v * 8.0).floor() / 8.0));
        }
        assert_eq!(pts[0], [0.0, 0.0, 0.0]);
        assert_eq!(pts[1], [0.5, 0.5, 0.5]);
        assert_eq!(pts[2], [0.75, 0.25, 0.25]);
        assert_eq!(pts[3], [0.25, 0.75, 0.75]);
    }

    #[test]
    fn each_coordinate_is_stratified() {
        // the first 2^m points of every coordinate hit each dyadic cell once
        for d in 0..MAX_DIM {
            let mut s = Sobol::new(MAX_DIM, &[0; MAX_DIM]);
            let mut x = [0.0; MAX_DIM];
            let mut seen = [false; 64];
            for _ in 0..64 {
                s.next_into(&mut x);
                let cell = (x[d] * 64.0) as usize;
                assert!(!seen[cell], "dim {d} cell {cell} hit twice");
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn pairs_are_stratified() {
        // (0,m,2)-net property for the first two coordinates
        let mut s = Sobol::new(2, &[0, 0]);
        let mut x = [0.0; 2];
        let mut seen = [[false; 16]; 16];
        for _ in 0..256 {
            s.next_into(&mut x);
            let (i, j) = ((x[0] * 16.0) as usize, (x[1] * 16.0) as usize);
            assert!(!seen[i][j]);
            seen[i][j] = true;
        }
    }

    #[test]
    fn mean_converges() {
        let mut s = Sobol::new(8, &[0x1234_5678, 7, 99, 1, 2, 3, 4, 5]);
        let mut x = [0.0; 8];
        let n = 1 << 14;
        let mut acc = [0.0; 8];
        for _ in 0..n {
            s.next_into(&mut x);
            for (a, v) in acc.iter_mut().zip(&x) {
                *a += v;
            }
        }
        for a in acc {
            assert!((a / n as f64 - 0.5).abs() < 1e-3);
        }
    }
}
