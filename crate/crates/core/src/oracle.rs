//! Dense small-instance models of the differential and a Howell-form solver over Z/p^K.
//!
//! Sequence coordinates live in Z/p^M; rational coordinates x with denominator at most p^E
//! are stored as p^E x in Z/p^(M+E). All arithmetic happens in Z/p^(M+E), and each sequence
//! row gets a slack column p^M so that its equation only holds mod p^M.

use crate::arith::{index_exponent, Context, Modulus, PadicFraction, PadicInt};
use crate::complex::{locate, shape_of, Body, Cochain, Shape};
use crate::error::{Error, Result};
use crate::theta::ThetaSeq;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Seq { component: usize, index: usize },
    Rat,
}

/// Coordinates of a degree at a given sequence length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub degree: i64,
    pub shape: Shape,
    pub seq_len: usize,
    pub coords: Vec<Coord>,
}

impl Layout {
    pub fn new(p: u64, degree: i64, seq_len: usize) -> Self {
        let shape = shape_of(p, degree);
        let (seqs, rat) = match shape {
            Shape::Zero => (0, false),
            Shape::Seq => (1, false),
            Shape::SeqSeq => (2, false),
            Shape::SeqSeqRat => (2, true),
            Shape::SeqRat => (1, true),
            Shape::Rat => (0, true),
        };
        let mut coords: Vec<Coord> = (0..seqs)
            .flat_map(|component| (0..seq_len).map(move |index| Coord::Seq { component, index }))
            .collect();
        if rat {
            coords.push(Coord::Rat);
        }
        Self {
            degree,
            shape,
            seq_len,
            coords,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn position(&self, coord: Coord) -> Option<usize> {
        match coord {
            Coord::Seq { component, index } if index < self.seq_len => {
                let pos = component * self.seq_len + index;
                (pos < self.len() && self.coords[pos] == coord).then_some(pos)
            }
            Coord::Rat => self.coords.last().filter(|c| **c == Coord::Rat).map(|_| self.len() - 1),
            _ => None,
        }
    }
}

/// The differential at degree n on sequences of length N0, as a matrix over Z/p^(M+E).
#[derive(Clone, Debug)]
pub struct DenseMap {
    ctx: Context,
    ring: Modulus,
    scale: u32,
    source: Layout,
    target: Layout,
    matrix: Vec<Vec<PadicInt>>,
}

/// d at degree n restricted to source indices below `n0`, with the default rational scale M + 2.
pub fn dense_matrix(ctx: &Context, n: i64, n0: usize) -> Result<DenseMap> {
    DenseMap::new(ctx, n, n0, ctx.precision() + 2)
}

impl DenseMap {
    pub fn new(ctx: &Context, n: i64, n0: usize, scale: u32) -> Result<Self> {
        if n0 == 0 || n0 >= ctx.length() {
            return Err(Error::InvalidInput(format!(
                "reduced length {n0} must lie in 1..{}",
                ctx.length()
            )));
        }
        let ring = ctx.modulus().with_precision(ctx.precision() + scale)?;
        let source = Layout::new(ctx.p(), n, n0);
        let target = Layout::new(ctx.p(), n + 1, n0 + 1);
        let mut map = Self {
            ctx: ctx.clone(),
            ring,
            scale,
            matrix: vec![vec![PadicInt::zero(ring); source.len()]; target.len()],
            source,
            target,
        };
        map.fill()?;
        Ok(map)
    }

    fn int(&self, x: i64) -> PadicInt {
        PadicInt::new(x, self.ring)
    }

    fn add(&mut self, row: Coord, col: Coord, value: PadicInt) {
        let (Some(r), Some(c)) = (self.target.position(row), self.source.position(col)) else {
            return;
        };
        self.matrix[r][c] += value;
    }

    fn fill(&mut self) -> Result<()> {
        let ctx = self.ctx.clone();
        let (k, j) = locate(ctx.p(), self.source.degree);
        let k_prec = ctx.precision() + self.scale;
        let lambda = ctx.twist_scalar_at(k, k_prec)?;
        if k != 0 {
            // Rejects twists whose scalar is already zero mod p^M.
            ctx.twist_scalar(k)?;
        }
        let p_e = self.int(1).mul_p_power(self.scale);
        let one = self.int(1);
        let n0 = self.source.seq_len;
        // Coefficient of a_t in (Theta_1 + lambda Theta_0) a at index t.
        let diag = |t: usize| -> Result<PadicInt> {
            if t == 0 {
                Ok(lambda)
            } else {
                Ok(ctx.rpow_at(index_exponent(t as u64), k_prec)? - one + lambda)
            }
        };
        let seq = |component, index| Coord::Seq { component, index };
        match (self.source.shape, j) {
            (Shape::Seq, _) => {
                for t in 0..n0 {
                    self.add(seq(0, t), seq(0, t), diag(t)?);
                    self.add(seq(0, t + 1), seq(0, t), one);
                    self.add(seq(1, t), seq(0, t), lambda);
                }
            }
            (Shape::SeqSeq | Shape::SeqSeqRat, _) => {
                for t in 0..n0 {
                    self.add(seq(0, t), seq(0, t), lambda);
                    self.add(seq(0, t), seq(1, t), -diag(t)?);
                    self.add(seq(0, t + 1), seq(1, t), -one);
                }
                if k == 0 {
                    self.add(Coord::Rat, seq(1, 0), p_e);
                    self.add(Coord::Rat, Coord::Rat, -one);
                }
            }
            (Shape::SeqRat, _) => {
                if k == 0 {
                    self.add(Coord::Rat, seq(0, 0), p_e);
                } else {
                    self.add(Coord::Rat, Coord::Rat, lambda);
                }
            }
            (Shape::Rat | Shape::Zero, _) => {}
        }
        Ok(())
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ring(&self) -> Modulus {
        self.ring
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn source(&self) -> &Layout {
        &self.source
    }

    pub fn target(&self) -> &Layout {
        &self.target
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.source.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> PadicInt {
        self.matrix[row][col]
    }

    pub fn entry_at(&self, row: Coord, col: Coord) -> Option<PadicInt> {
        Some(self.matrix[self.target.position(row)?][self.source.position(col)?])
    }

    /// Coordinates of a cochain in a layout; fails if its support does not fit.
    pub fn encode(&self, layout: &Layout, x: &Cochain) -> Result<Vec<PadicInt>> {
        if x.degree() != layout.degree {
            return Err(Error::DegreeMismatch(format!(
                "cochain of degree {} in layout of degree {}",
                x.degree(),
                layout.degree
            )));
        }
        if let Some(index) = x.top().filter(|t| *t >= layout.seq_len) {
            return Err(Error::UntrustedSupport {
                index,
                limit: layout.seq_len,
            });
        }
        let seqs = x.body().sequences();
        layout
            .coords
            .iter()
            .map(|c| match c {
                Coord::Seq { component, index } => {
                    Ok(PadicInt::new(seqs[*component][*index].residue() as i64, self.ring))
                }
                Coord::Rat => {
                    let y = x.body().rational().expect("layout has a rational slot");
                    y.scaled_numerator(self.scale).ok_or(Error::ExponentCap {
                        exponent: y.exponent(),
                        cap: self.scale,
                    })
                }
            })
            .collect()
    }

    /// Full-length cochain from coordinates in a layout.
    pub fn decode(&self, layout: &Layout, v: &[PadicInt]) -> Result<Cochain> {
        let ctx = &self.ctx;
        let (k, _) = locate(ctx.p(), layout.degree);
        let mut seqs = [ThetaSeq::zero(ctx, k), ThetaSeq::zero(ctx, k)];
        let mut q = ctx.fraction_zero();
        for (c, value) in layout.coords.iter().zip(v) {
            match c {
                Coord::Seq { component, index } => {
                    seqs[*component].set(*index, value.reduce_to(ctx.precision()));
                }
                Coord::Rat => q = PadicFraction::from_scaled(*value, self.scale, ctx.modulus())?,
            }
        }
        let [a, b] = seqs;
        let body = match layout.shape {
            Shape::Zero => Body::Zero,
            Shape::Seq => Body::Seq(a),
            Shape::SeqSeq => Body::SeqSeq(a, b),
            Shape::SeqSeqRat => Body::SeqSeqRat(a, b, q),
            Shape::SeqRat => Body::SeqRat(a, q),
            Shape::Rat => Body::Rat(q),
        };
        Cochain::new(ctx, layout.degree, body)
    }

    /// Matrix times coordinate vector, without reducing sequence rows mod p^M.
    pub fn apply(&self, x: &[PadicInt]) -> Vec<PadicInt> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(PadicInt::zero(self.ring), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Whether two target vectors agree (sequence rows mod p^M, rational rows exactly).
    pub fn same_target(&self, x: &[PadicInt], y: &[PadicInt]) -> bool {
        let m = self.ctx.precision();
        self.target.coords.iter().zip(x.iter().zip(y)).all(|(c, (a, b))| match c {
            Coord::Seq { .. } => (*a - *b).reduce_to(m).is_zero(),
            Coord::Rat => a == b,
        })
    }

    /// The matrix with one slack column p^M per sequence row appended.
    fn augmented(&self) -> Vec<Vec<PadicInt>> {
        let slack_rows: Vec<usize> = (0..self.rows())
            .filter(|r| matches!(self.target.coords[*r], Coord::Seq { .. }))
            .collect();
        let p_m = PadicInt::new(1, self.ring).mul_p_power(self.ctx.precision());
        self.matrix
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut out = row.clone();
                out.extend(slack_rows.iter().map(|s| {
                    if *s == r {
                        p_m
                    } else {
                        PadicInt::zero(self.ring)
                    }
                }));
                out
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Column {
    h: Vec<PadicInt>,
    u: Vec<PadicInt>,
}

impl Column {
    fn axpy(&mut self, q: PadicInt, other: &Column) {
        for (a, b) in self.h.iter_mut().zip(&other.h) {
            *a -= q * *b;
        }
        for (a, b) in self.u.iter_mut().zip(&other.u) {
            *a -= q * *b;
        }
    }

    fn scaled(&self, s: PadicInt) -> Column {
        Column {
            h: self.h.iter().map(|x| *x * s).collect(),
            u: self.u.iter().map(|x| *x * s).collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct Pivot {
    row: usize,
    valuation: u32,
    unit_inv: PadicInt,
    column: Column,
}

/// Column Howell form of B with tracked transforms: each pivot column h = B u.
#[derive(Clone, Debug)]
pub struct Howell {
    ring: Modulus,
    rows: usize,
    cols: usize,
    pivots: Vec<Pivot>,
    kernel: Vec<Vec<PadicInt>>,
}

impl Howell {
    /// `b` is given as rows.
    pub fn new(b: &[Vec<PadicInt>], cols: usize, ring: Modulus) -> Self {
        let rows = b.len();
        let zero = PadicInt::zero(ring);
        let mut work: Vec<Column> = (0..cols)
            .map(|c| {
                let mut u = vec![zero; cols];
                u[c] = PadicInt::one(ring);
                Column {
                    h: b.iter().map(|row| row[c]).collect(),
                    u,
                }
            })
            .collect();
        let k = ring.precision();
        let mut pivots = Vec::new();
        let mut kernel = Vec::new();
        for r in 0..rows {
            let best = work
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.h[r].valuation().finite().map(|v| (v, i)))
                .min();
            let Some((v, idx)) = best else { continue };
            let piv = work.swap_remove(idx);
            let unit_inv = piv.h[r]
                .div_p_power(v)
                .and_then(|x| x.inverse())
                .expect("unit part");
            for col in work.iter_mut() {
                if !col.h[r].is_zero() {
                    let q = col.h[r].div_p_power(v).expect("minimal valuation") * unit_inv;
                    col.axpy(q, &piv);
                }
            }
            if v > 0 {
                let extra = piv.scaled(PadicInt::one(ring).mul_p_power(k - v));
                if extra.h.iter().any(|x| !x.is_zero()) {
                    work.push(extra);
                } else if extra.u.iter().any(|x| !x.is_zero()) {
                    kernel.push(extra.u);
                }
            }
            pivots.push(Pivot {
                row: r,
                valuation: v,
                unit_inv,
                column: piv,
            });
        }
        for col in work {
            debug_assert!(col.h.iter().all(PadicInt::is_zero));
            if col.u.iter().any(|x| !x.is_zero()) {
                kernel.push(col.u);
            }
        }
        Self {
            ring,
            rows,
            cols,
            pivots,
            kernel,
        }
    }

    /// Some y with B y = t, or None.
    pub fn solve(&self, t: &[PadicInt]) -> Option<Vec<PadicInt>> {
        assert_eq!(t.len(), self.rows);
        let mut residual = t.to_vec();
        let mut y = vec![PadicInt::zero(self.ring); self.cols];
        for piv in &self.pivots {
            let r = residual[piv.row];
            if r.is_zero() {
                continue;
            }
            let q = r.div_p_power(piv.valuation)? * piv.unit_inv;
            let col = &piv.column;
            for (a, b) in residual.iter_mut().zip(&col.h) {
                *a -= q * *b;
            }
            for (a, b) in y.iter_mut().zip(&col.u) {
                *a += q * *b;
            }
        }
        residual.iter().all(PadicInt::is_zero).then_some(y)
    }

    /// Vectors u with B u = 0 collected during the reduction.
    pub fn kernel(&self) -> &[Vec<PadicInt>] {
        &self.kernel
    }
}

/// A functional on target coordinates that kills the image and pairs nonzero with the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub functional: Vec<PadicInt>,
    pub pairing: PadicInt,
}

#[derive(Clone, Debug)]
pub enum OracleAnswer {
    Witness(Cochain),
    NotMember(Option<Certificate>),
}

impl OracleAnswer {
    pub fn is_member(&self) -> bool {
        matches!(self, OracleAnswer::Witness(_))
    }
}

/// A dense map with its Howell forms, reusable across targets.
#[derive(Clone, Debug)]
pub struct Solver {
    map: DenseMap,
    augmented: Vec<Vec<PadicInt>>,
    columns: Howell,
    left_kernel: Vec<Vec<PadicInt>>,
}

impl Solver {
    pub fn new(map: DenseMap) -> Self {
        let augmented = map.augmented();
        let cols = augmented.first().map_or(0, Vec::len);
        let columns = Howell::new(&augmented, cols, map.ring());
        let transpose: Vec<Vec<PadicInt>> = (0..cols)
            .map(|c| augmented.iter().map(|row| row[c]).collect())
            .collect();
        let left_kernel = Howell::new(&transpose, augmented.len(), map.ring())
            .kernel()
            .to_vec();
        Self {
            map,
            augmented,
            columns,
            left_kernel,
        }
    }

    pub fn map(&self) -> &DenseMap {
        &self.map
    }

    /// Checks that a functional kills every column of the augmented matrix.
    pub fn annihilates(&self, functional: &[PadicInt]) -> bool {
        let cols = self.augmented.first().map_or(0, Vec::len);
        (0..cols).all(|c| {
            self.augmented
                .iter()
                .zip(functional)
                .fold(PadicInt::zero(self.map.ring()), |acc, (row, f)| acc + row[c] * *f)
                .is_zero()
        })
    }

    pub fn solve(&self, target: &Cochain) -> Result<OracleAnswer> {
        let t = self.map.encode(self.map.target(), target)?;
        if self.map.rows() == 0 {
            return Ok(if target.is_zero() {
                OracleAnswer::Witness(self.map.decode(self.map.source(), &[])?)
            } else {
                OracleAnswer::NotMember(None)
            });
        }
        match self.columns.solve(&t) {
            Some(y) => {
                let x = &y[..self.map.cols()];
                Ok(OracleAnswer::Witness(self.map.decode(self.map.source(), x)?))
            }
            None => {
                let cert = self.left_kernel.iter().find_map(|phi| {
                    let pairing = phi
                        .iter()
                        .zip(&t)
                        .fold(PadicInt::zero(self.map.ring()), |acc, (a, b)| acc + *a * *b);
                    (!pairing.is_zero()).then(|| Certificate {
                        functional: phi.clone(),
                        pairing,
                    })
                });
                Ok(OracleAnswer::NotMember(cert))
            }
        }
    }
}

/// One-shot membership query; build a [`Solver`] to reuse the reduction.
pub fn solve_boundary(map: &DenseMap, target: &Cochain) -> Result<OracleAnswer> {
    Solver::new(map.clone()).solve(target)
}
