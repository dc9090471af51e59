//! Binary and CSV serialization of grid fields.
//!
//! Binary layout, little endian: `u32 nx, u32 ny, f64 hx, f64 hy, f64 ox, f64 oy`, then the
//! `(nx+1)·ny` vertical-face values and the `nx·(ny+1)` horizontal-face values, row-major.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

use super::{GridField, GridSpec, ScalarField};

pub fn write_binary<W: Write>(f: &GridField, mut w: W) -> Result<()> {
    let g = f.grid;
    let count = |n: usize| u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("grid size {n}")));
    w.write_u32::<LittleEndian>(count(g.nx)?)?;
    w.write_u32::<LittleEndian>(count(g.ny)?)?;
    for v in [g.hx, g.hy, g.origin[0], g.origin[1]] {
        w.write_f64::<LittleEndian>(v)?;
    }
    for v in f.fx.iter().chain(&f.fy) {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridField> {
    let nx = r.read_u32::<LittleEndian>()? as usize;
    let ny = r.read_u32::<LittleEndian>()? as usize;
    let mut head = [0.0; 4];
    for v in head.iter_mut() {
        *v = r.read_f64::<LittleEndian>()?;
    }
    let grid = GridSpec::new(nx, ny, head[0], head[1], [head[2], head[3]])?;
    let mut f = GridField::zeros(grid);
    for v in f.fx.iter_mut().chain(f.fy.iter_mut()) {
        *v = r.read_f64::<LittleEndian>()?;
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Parse(format!("{} trailing bytes in grid field", rest.len())));
    }
    Ok(f)
}

pub fn save(f: &GridField, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_binary(f, file)
}

pub fn load(path: &Path) -> Result<GridField> {
    read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One line per cell: indices, centre and face-averaged components.
pub fn field_csv(f: &GridField) -> String {
    let mut s = String::from("i,j,x,y,sx,sy\n");
    for j in 0..f.grid.ny {
        for i in 0..f.grid.nx {
            let (c, v) = (f.grid.cell_center(i, j), f.cell(i, j));
            let _ = writeln!(s, "{i},{j},{:?},{:?},{:?},{:?}", c[0], c[1], v[0], v[1]);
        }
    }
    s
}

pub fn scalar_csv(f: &ScalarField) -> String {
    let mut s = String::from("i,j,x,y,value\n");
    for j in 0..f.grid.ny {
        for i in 0..f.grid.nx {
            let c = f.grid.cell_center(i, j);
            let _ = writeln!(s, "{i},{j},{:?},{:?},{:?}", c[0], c[1], f.at(i, j));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    #[test]
    fn binary_roundtrip_and_layout() {
        let g = GridSpec::new(5, 4, 0.25, 0.5, [-1.0, 2.0]).unwrap();
        let f = GridField::from_fn(g, |p| Vec2::new(p[0] * p[1], p[0] - p[1]));
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 32 + 8 * (6 * 4 + 5 * 5));
        assert_eq!(&buf[..4], &5u32.to_le_bytes());
        assert_eq!(read_binary(&buf[..]).unwrap(), f);
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let g = GridSpec::square(4, 0.0, 1.0).unwrap();
        let f = GridField::zeros(g);
        assert_eq!(field_csv(&f).lines().count(), 17);
        assert_eq!(scalar_csv(&ScalarField::zeros(g)).lines().count(), 17);
    }
}
