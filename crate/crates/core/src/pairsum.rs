//! Pair sums Σ_{i,j} w(xᵢ − xⱼ)(…) over the cells of a grid with a
//! translation-invariant, even weight w.
//!
//! Two evaluation paths produce the same discrete sums: a direct O(n²) loop
//! over ordered pairs with compensated accumulation, and a zero-padded FFT
//! convolution (aperiodic, so no wrap-around terms). The direct path is the
//! reference; the FFT path serves large grids.

use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::quadrature::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Direct below `DIRECT_LIMIT` active cells, FFT above.
    #[default]
    Auto,
    Direct,
    Fft,
}

pub const DIRECT_LIMIT: usize = 512;

/// Even lattice weights w(|dx|, |dy|) stored on one quadrant.
#[derive(Debug, Clone)]
pub struct LatticeWeights {
    nx: usize,
    ny: usize,
    w: Vec<f64>,
}

impl LatticeWeights {
    /// `f(dx, dy)` with dx ∈ 0..nx, dy ∈ 0..ny; the value at (0,0) is used
    /// only by [`PairSum::convolve`].
    pub fn new(nx: usize, ny: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let w = (0..nx * ny)
            .into_par_iter()
            .map(|k| f(k % nx, k / nx))
            .collect();
        LatticeWeights { nx, ny, w }
    }

    #[inline]
    pub fn get(&self, dx: usize, dy: usize) -> f64 {
        self.w[dy * self.nx + dx]
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }
}

struct Fft2 {
    px: usize,
    py: usize,
    row_f: Arc<dyn Fft<f64>>,
    col_f: Arc<dyn Fft<f64>>,
    row_i: Arc<dyn Fft<f64>>,
    col_i: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(px: usize, py: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            px,
            py,
            row_f: planner.plan_fft_forward(px),
            col_f: planner.plan_fft_forward(py),
            row_i: planner.plan_fft_inverse(px),
            col_i: planner.plan_fft_inverse(py),
        }
    }

    fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                out[c * rows + r] = src[r * cols + c];
            }
        }
        out
    }

    /// Row-major (py × px) input → spectrum in transposed (px × py) layout.
    fn forward(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        self.row_f.process(&mut buf);
        let mut t = Self::transpose(&buf, self.py, self.px);
        self.col_f.process(&mut t);
        t
    }

    fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        self.col_i.process(&mut spec);
        let mut buf = Self::transpose(&spec, self.px, self.py);
        self.row_i.process(&mut buf);
        let s = 1.0 / (self.px * self.py) as f64;
        buf.iter_mut().for_each(|z| *z *= s);
        buf
    }
}

fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k.is_multiple_of(p) {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

type RowSumCache = (Vec<usize>, Arc<Vec<f64>>);

/// Pair-sum evaluator for a fixed grid and weight.
pub struct PairSum {
    weights: LatticeWeights,
    fft: Option<(Fft2, Vec<Complex64>)>,
    mode: PairMode,
    row_sums: Mutex<Option<RowSumCache>>,
}

impl std::fmt::Debug for PairSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PairSum")
            .field("nx", &self.weights.nx)
            .field("ny", &self.weights.ny)
            .field("mode", &self.mode)
            .finish()
    }
}

impl PairSum {
    pub fn new(weights: LatticeWeights, mode: PairMode, active_cells: usize) -> Self {
        let mode = match mode {
            PairMode::Auto if active_cells > DIRECT_LIMIT => PairMode::Fft,
            PairMode::Auto => PairMode::Direct,
            m => m,
        };
        let fft = (mode == PairMode::Fft).then(|| {
            let (nx, ny) = (weights.nx, weights.ny);
            let (px, py) = (smooth_size(2 * nx - 1), smooth_size(2 * ny - 1));
            let plan = Fft2::new(px, py);
            let mut k = vec![Complex64::default(); px * py];
            for q in 0..py {
                let dy = if q < ny {
                    q
                } else if q + ny > py {
                    py - q
                } else {
                    continue;
                };
                for p in 0..px {
                    let dx = if p < nx {
                        p
                    } else if p + nx > px {
                        px - p
                    } else {
                        continue;
                    };
                    k[q * px + p] = Complex64::new(weights.get(dx, dy), 0.0);
                }
            }
            let spec = plan.forward(k);
            (plan, spec)
        });
        PairSum {
            weights,
            fft,
            mode,
            row_sums: Mutex::new(None),
        }
    }

    pub fn mode(&self) -> PairMode {
        self.mode
    }

    pub fn weights(&self) -> &LatticeWeights {
        &self.weights
    }

    /// c_i = Σ_j w(xᵢ − xⱼ) a_j over all cells (including j = i with w(0,0)).
    pub fn convolve(&self, a: &[f64], sources: &[usize], targets: &[usize]) -> Vec<f64> {
        let nx = self.weights.nx;
        let mut out = vec![0.0; a.len()];
        match &self.fft {
            Some((plan, spec)) => {
                let mut buf = vec![Complex64::default(); plan.px * plan.py];
                for &j in sources {
                    buf[(j / nx) * plan.px + j % nx] = Complex64::new(a[j], 0.0);
                }
                let mut s = plan.forward(buf);
                s.iter_mut().zip(spec).for_each(|(x, k)| *x *= k);
                let r = plan.inverse(s);
                for &i in targets {
                    out[i] = r[(i / nx) * plan.px + i % nx].re;
                }
            }
            None => {
                let vals: Vec<f64> = targets
                    .par_iter()
                    .map(|&i| {
                        let (xi, yi) = (i % nx, i / nx);
                        let mut acc = KahanSum::default();
                        for &j in sources {
                            let (xj, yj) = (j % nx, j / nx);
                            acc.add(self.weights.get(xi.abs_diff(xj), yi.abs_diff(yj)) * a[j]);
                        }
                        acc.sum()
                    })
                    .collect();
                for (&i, v) in targets.iter().zip(vals) {
                    out[i] = v;
                }
            }
        }
        out
    }

    /// D = Σ_{i≠j} w_ij (a_i − a_j)² and lap_k = Σ_{j≠k} w_kj (a_k − a_j),
    /// both over `cells`. Note ∂D/∂a_k = 4·lap_k.
    pub fn difference_form(&self, a: &[f64], cells: &[usize]) -> (f64, Vec<f64>) {
        let nx = self.weights.nx;
        let mut lap = vec![0.0; a.len()];
        match &self.fft {
            Some(_) => {
                let s = self.row_sums(cells, a.len());
                let wa = self.convolve(a, cells, cells);
                let mut d = KahanSum::default();
                for &k in cells {
                    // the j = k terms of s and wa cancel
                    let l = a[k] * s[k] - wa[k];
                    lap[k] = l;
                    d.add(2.0 * a[k] * l);
                }
                (d.sum(), lap)
            }
            None => {
                let rows: Vec<(f64, f64)> = cells
                    .par_iter()
                    .map(|&i| {
                        let (xi, yi) = (i % nx, i / nx);
                        let ai = a[i];
                        let mut l = KahanSum::default();
                        let mut d = KahanSum::default();
                        for &j in cells {
                            if j == i {
                                continue;
                            }
                            let w = self.weights.get(xi.abs_diff(j % nx), yi.abs_diff(j / nx));
                            let diff = ai - a[j];
                            l.add(w * diff);
                            d.add(w * diff * diff);
                        }
                        (l.sum(), d.sum())
                    })
                    .collect();
                let mut d = KahanSum::default();
                for (&i, (l, dd)) in cells.iter().zip(rows) {
                    lap[i] = l;
                    d.add(dd);
                }
                (d.sum(), lap)
            }
        }
    }

    /// Σ_j w_ij over `cells`, cached for the last cell set.
    fn row_sums(&self, cells: &[usize], len: usize) -> Arc<Vec<f64>> {
        let mut guard = self.row_sums.lock().expect("row-sum cache poisoned");
        if let Some((c, s)) = guard.as_ref() {
            if c == cells {
                return s.clone();
            }
        }
        let mut ones = vec![0.0; len];
        cells.iter().for_each(|&k| ones[k] = 1.0);
        let s = Arc::new(self.convolve(&ones, cells, cells));
        *guard = Some((cells.to_vec(), s.clone()));
        s
    }

    /// Q = Σ_{i,j} w_ij a_i b_j over `cells` including the diagonal.
    pub fn bilinear(&self, a: &[f64], b: &[f64], cells: &[usize]) -> f64 {
        let wb = self.convolve(b, cells, cells);
        let mut q = KahanSum::default();
        for &i in cells {
            q.add(a[i] * wb[i]);
        }
        q.sum()
    }
}

/// Convolution out_i = Σ_j w(i − j) b_j on an nx × ny lattice with a kernel
/// defined on signed offsets (not necessarily even).
pub struct LatticeConvolution {
    nx: usize,
    ny: usize,
    table: Vec<f64>,
    fft: Option<(Fft2, Vec<Complex64>)>,
}

impl std::fmt::Debug for LatticeConvolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeConvolution")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

impl LatticeConvolution {
    pub fn new(
        nx: usize,
        ny: usize,
        f: impl Fn(isize, isize) -> f64 + Sync,
        mode: PairMode,
        active_cells: usize,
    ) -> Self {
        let (wx, wy) = (2 * nx - 1, 2 * ny - 1);
        let table: Vec<f64> = (0..wx * wy)
            .into_par_iter()
            .map(|k| {
                f(
                    (k % wx) as isize - (nx as isize - 1),
                    (k / wx) as isize - (ny as isize - 1),
                )
            })
            .collect();
        let use_fft = match mode {
            PairMode::Auto => active_cells > DIRECT_LIMIT,
            PairMode::Direct => false,
            PairMode::Fft => true,
        };
        let mut conv = LatticeConvolution {
            nx,
            ny,
            table,
            fft: None,
        };
        if use_fft {
            let (px, py) = (smooth_size(wx), smooth_size(wy));
            let plan = Fft2::new(px, py);
            let mut k = vec![Complex64::default(); px * py];
            for dy in -(ny as isize - 1)..ny as isize {
                let q = dy.rem_euclid(py as isize) as usize;
                for dx in -(nx as isize - 1)..nx as isize {
                    let p = dx.rem_euclid(px as isize) as usize;
                    k[q * px + p] = Complex64::new(conv.get(dx, dy), 0.0);
                }
            }
            let spec = plan.forward(k);
            conv.fft = Some((plan, spec));
        }
        conv
    }

    #[inline]
    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let wx = 2 * self.nx - 1;
        let i = (dx + self.nx as isize - 1) as usize;
        let j = (dy + self.ny as isize - 1) as usize;
        self.table[j * wx + i]
    }

    /// Output on `targets` (zero elsewhere) from the values of `b` on `sources`.
    pub fn apply(&self, b: &[f64], sources: &[usize], targets: &[usize]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; b.len()];
        match &self.fft {
            Some((plan, spec)) => {
                let mut buf = vec![Complex64::default(); plan.px * plan.py];
                for &j in sources {
                    buf[(j / nx) * plan.px + j % nx] = Complex64::new(b[j], 0.0);
                }
                let mut s = plan.forward(buf);
                s.iter_mut().zip(spec).for_each(|(x, k)| *x *= k);
                let r = plan.inverse(s);
                for &i in targets {
                    out[i] = r[(i / nx) * plan.px + i % nx].re;
                }
            }
            None => {
                let vals: Vec<f64> = targets
                    .par_iter()
                    .map(|&i| {
                        let (xi, yi) = ((i % nx) as isize, (i / nx) as isize);
                        let mut acc = KahanSum::default();
                        for &j in sources {
                            let (xj, yj) = ((j % nx) as isize, (j / nx) as isize);
                            acc.add(self.get(xi - xj, yi - yj) * b[j]);
                        }
                        acc.sum()
                    })
                    .collect();
                for (&i, v) in targets.iter().zip(vals) {
                    out[i] = v;
                }
            }
        }
        out
    }

    /// Σ_i a_i (w * b)_i with a supported on `a_cells` and b on `b_cells`.
    pub fn bilinear(&self, a: &[f64], a_cells: &[usize], b: &[f64], b_cells: &[usize]) -> f64 {
        let wb = self.apply(b, b_cells, a_cells);
        a_cells
            .iter()
            .map(|&i| a[i] * wb[i])
            .collect::<KahanSum>()
            .sum()
    }
}
