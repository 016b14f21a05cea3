/// A point in the plane, coordinates in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::sqrt(self.distance_sq(other))
    }

    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// Uniform bucket grid over a point set for fixed-radius neighbor queries.
pub(crate) struct Grid<'a> {
    points: &'a [Point],
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: alloc::vec::Vec<alloc::vec::Vec<u32>>,
}

impl<'a> Grid<'a> {
    /// `cell` should be at least the largest query radius for efficient scans.
    pub(crate) fn new(points: &'a [Point], cell: f64) -> Self {
        let (mut lo, mut hi) = (Point::new(0.0, 0.0), Point::new(0.0, 0.0));
        if let Some(first) = points.first() {
            lo = *first;
            hi = *first;
        }
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        // keep the bucket count bounded for tiny radii
        let cell = cell.max(span / 1024.0).max(1e-9);
        let cols = libm::floor((hi.x - lo.x) / cell) as usize + 1;
        let rows = libm::floor((hi.y - lo.y) / cell) as usize + 1;
        let mut buckets = alloc::vec![alloc::vec::Vec::new(); cols * rows];
        let mut grid = Self {
            points,
            origin: lo,
            cell,
            cols,
            rows,
            buckets: alloc::vec::Vec::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            let (cx, cy) = grid.coords(p);
            buckets[cy * cols + cx].push(i as u32);
        }
        grid.buckets = buckets;
        grid
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let cx = libm::floor((p.x - self.origin.x) / self.cell).max(0.0) as usize;
        let cy = libm::floor((p.y - self.origin.y) / self.cell).max(0.0) as usize;
        (cx.min(self.cols - 1), cy.min(self.rows - 1))
    }

    /// Appends every index whose point lies within `radius` of `p` (inclusive), unordered.
    pub(crate) fn within(&self, p: Point, radius: f64, out: &mut alloc::vec::Vec<usize>) {
        let limit = self.cols.max(self.rows) as f64;
        let reach = libm::ceil(radius / self.cell).min(limit) as isize + 1;
        let (cx, cy) = self.coords(p);
        let x0 = (cx as isize - reach).max(0) as usize;
        let x1 = ((cx as isize + reach) as usize).min(self.cols - 1);
        let y0 = (cy as isize - reach).max(0) as usize;
        let y1 = ((cy as isize + reach) as usize).min(self.rows - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                for &j in &self.buckets[y * self.cols + x] {
                    if self.points[j as usize].distance(p) <= radius {
                        out.push(j as usize);
                    }
                }
            }
        }
    }
}
