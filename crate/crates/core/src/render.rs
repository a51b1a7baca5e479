//! Colormapped rasters, contour overlays and binary PPM output.
//!
//! Raster row 0 is the top of the image, i.e. the highest grid row.

use std::io::Write;
use std::path::Path;

use crate::contour::ContourSet;
use crate::error::{Error, Result};
use crate::grid::ScalarField2;
use crate::lcp::LcpField;

pub type Rgb = [u8; 3];

/// Piecewise-linear RGB lookup table over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colormap {
    stops: Vec<Rgb>,
}

/// Blue through pale yellow to red, 16 evenly spaced stops.
const DIVERGING: [Rgb; 16] = [
    [49, 54, 149],
    [59, 85, 164],
    [69, 117, 180],
    [94, 149, 197],
    [116, 173, 209],
    [145, 191, 219],
    [171, 217, 233],
    [204, 233, 242],
    [254, 240, 170],
    [254, 224, 144],
    [253, 190, 112],
    [253, 160, 91],
    [244, 109, 67],
    [230, 75, 53],
    [215, 48, 39],
    [165, 0, 38],
];

impl Default for Colormap {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Colormap {
    pub fn builtin() -> Self {
        Self {
            stops: DIVERGING.to_vec(),
        }
    }

    pub fn new(stops: Vec<Rgb>) -> Result<Self> {
        if stops.len() < 2 {
            return Err(Error::Data(format!(
                "colormap needs at least 2 stops, got {}",
                stops.len()
            )));
        }
        Ok(Self { stops })
    }

    /// Reads a CSV lookup table with an `r,g,b` header and one 0-255 integer
    /// triple per row, ordered from the low end of the range.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let stops = reader
            .deserialize::<(u8, u8, u8)>()
            .map(|row| row.map(|(r, g, b)| [r, g, b]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(stops)
    }

    pub fn stops(&self) -> &[Rgb] {
        &self.stops
    }

    /// Colour at normalised position `t`, clamped to `[0, 1]`.
    pub fn sample(&self, t: f64) -> Rgb {
        let last = self.stops.len() - 1;
        let pos = t.clamp(0.0, 1.0) * last as f64;
        let k = (pos.floor() as usize).min(last - 1);
        let frac = pos - k as f64;
        let (a, b) = (self.stops[k], self.stops[k + 1]);
        std::array::from_fn(|c| {
            let (a, b) = (f64::from(a[c]), f64::from(b[c]));
            (a + frac * (b - a)).round() as u8
        })
    }
}

/// Scalar data laid out as a raster, row-major from the bottom row.
pub trait RasterSource {
    fn raster_size(&self) -> (usize, usize);
    fn raster_values(&self) -> &[f64];
    /// World `(width, height)` covered by the raster.
    fn raster_extent(&self) -> (f64, f64);
    /// Whether pixels are cells (true) or vertices (false).
    fn cell_centred(&self) -> bool;
}

impl RasterSource for ScalarField2 {
    fn raster_size(&self) -> (usize, usize) {
        (self.grid().nx(), self.grid().ny())
    }

    fn raster_values(&self) -> &[f64] {
        self.values()
    }

    fn raster_extent(&self) -> (f64, f64) {
        self.grid().extent()
    }

    fn cell_centred(&self) -> bool {
        false
    }
}

impl RasterSource for LcpField {
    fn raster_size(&self) -> (usize, usize) {
        (self.grid.cells_x(), self.grid.cells_y())
    }

    fn raster_values(&self) -> &[f64] {
        &self.probabilities
    }

    fn raster_extent(&self) -> (f64, f64) {
        self.grid.extent()
    }

    fn cell_centred(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgbRaster {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
    extent: (f64, f64),
    cell_centred: bool,
}

impl RgbRaster {
    /// Blank raster covering `extent`; vertex-centred when `cell_centred` is false.
    pub fn filled(
        width: usize,
        height: usize,
        extent: (f64, f64),
        cell_centred: bool,
        color: Rgb,
    ) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width * height],
            extent,
            cell_centred,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixels from the top-left corner, row by row.
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    fn set(&mut self, x: i64, y: i64, color: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = color;
        }
    }

    pub fn count_color(&self, color: Rgb) -> usize {
        self.pixels.iter().filter(|&&p| p == color).count()
    }

    /// Pixel (column, row-from-top) containing world point `(x, y)`.
    pub fn world_to_pixel(&self, x: f64, y: f64) -> (i64, i64) {
        let (w, h) = self.extent;
        let map = |v: f64, extent: f64, n: usize| -> i64 {
            if extent <= 0.0 || n <= 1 {
                return 0;
            }
            let p = if self.cell_centred {
                (v / extent * n as f64).floor()
            } else {
                (v / extent * (n - 1) as f64).round()
            };
            (p as i64).clamp(0, n as i64 - 1)
        };
        let col = map(x, w, self.width);
        let row_from_bottom = map(y, h, self.height);
        (col, self.height as i64 - 1 - row_from_bottom)
    }

    /// Binary P6 encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + 3 * self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.to_ppm())
            .map_err(|e| Error::io(path, e))
    }
}

/// Clamps to `[lo, hi]`, normalises and maps through `colormap`; one pixel per
/// vertex for scalar fields, one per cell for crossing probabilities.
pub fn render_colormap<S: RasterSource + ?Sized>(
    source: &S,
    (lo, hi): (f64, f64),
    colormap: &Colormap,
) -> Result<RgbRaster> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Range { lo, hi });
    }
    let (width, height) = source.raster_size();
    let values = source.raster_values();
    let mut pixels = Vec::with_capacity(width * height);
    for row in (0..height).rev() {
        for col in 0..width {
            let v = values[row * width + col].clamp(lo, hi);
            pixels.push(colormap.sample((v - lo) / (hi - lo)));
        }
    }
    Ok(RgbRaster {
        width,
        height,
        pixels,
        extent: source.raster_extent(),
        cell_centred: source.cell_centred(),
    })
}

/// Draws every polyline as 1-pixel Bresenham segments.
pub fn overlay_contours(raster: &RgbRaster, contours: &ContourSet, color: Rgb) -> RgbRaster {
    let mut out = raster.clone();
    for line in &contours.polylines {
        let pixels: Vec<(i64, i64)> = line
            .iter()
            .map(|p| out.world_to_pixel(p[0], p[1]))
            .collect();
        if let [only] = pixels.as_slice() {
            out.set(only.0, only.1, color);
        }
        for pair in pixels.windows(2) {
            draw_line(&mut out, pair[0], pair[1], color);
        }
    }
    out
}

fn draw_line(
    raster: &mut RgbRaster,
    (mut x0, mut y0): (i64, i64),
    (x1, y1): (i64, i64),
    color: Rgb,
) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        raster.set(x0, y0, color);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}
