use std::fmt::Write as _;
use std::path::Path;

use crate::error::{config, contract, Result};
use crate::fem::FemField;
use crate::mesh::RectMesh;
use crate::scalar::Real;

/// ASCII legacy VTK of the mesh with nodal fields: rank-1 fields become
/// `SCALARS`, rank-2 fields `VECTORS` padded with a zero third component.
pub fn vtk_string<T: Real>(mesh: &RectMesh<T>, fields: &[(&str, &FemField<T>)]) -> Result<String> {
    let n = mesh.vertex_count();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nshapeopt\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {n} double");
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e} 0", v[0].to_f64_lossy(), v[1].to_f64_lossy());
    }
    let nt = mesh.triangle_count();
    let _ = writeln!(out, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {n}");
    }
    for (name, f) in fields {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(config(format!("VTK field name {name:?} must be non-empty without whitespace")));
        }
        if f.len() != f.rank * n {
            return Err(contract(format!("field {name} has {} values for {n} points", f.len())));
        }
        match f.rank {
            1 => {
                let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in &f.values {
                    let _ = writeln!(out, "{:.16e}", v.to_f64_lossy());
                }
            }
            2 => {
                let _ = writeln!(out, "VECTORS {name} double");
                for k in 0..n {
                    let _ = writeln!(out, "{:.16e} {:.16e} 0", f.values[2 * k].to_f64_lossy(), f.values[2 * k + 1].to_f64_lossy());
                }
            }
            r => return Err(contract(format!("field {name} has unsupported rank {r}"))),
        }
    }
    Ok(out)
}

pub fn write_vtk<T: Real>(mesh: &RectMesh<T>, fields: &[(&str, &FemField<T>)], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, vtk_string(mesh, fields)?)?;
    Ok(())
}

/// Contents of a legacy VTK file as written by [`vtk_string`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkData {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// `(name, rank, values)`; vectors keep only the first two components.
    pub fields: Vec<(String, usize, Vec<f64>)>,
}

/// Parses the subset of legacy VTK produced by [`vtk_string`].
pub fn parse_vtk(text: &str) -> Result<VtkData> {
    let bad = |what: &str| config(format!("malformed VTK: {what}"));
    let mut tokens = text.lines().skip(4).flat_map(str::split_whitespace);
    let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number {s}")));
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad integer {s}")));
    let mut data = VtkData::default();
    let mut n = 0;
    loop {
        let Ok(key) = next() else { break };
        match key {
            "POINTS" => {
                n = int(next()?)?;
                next()?;
                for _ in 0..n {
                    let (x, y) = (num(next()?)?, num(next()?)?);
                    next()?;
                    data.points.push([x, y]);
                }
            }
            "CELLS" => {
                let nt = int(next()?)?;
                next()?;
                for _ in 0..nt {
                    if next()? != "3" {
                        return Err(bad("non-triangle cell"));
                    }
                    data.triangles.push([int(next()?)?, int(next()?)?, int(next()?)?]);
                }
            }
            "CELL_TYPES" => {
                let nt = int(next()?)?;
                for _ in 0..nt {
                    next()?;
                }
            }
            "POINT_DATA" => {
                if int(next()?)? != n {
                    return Err(bad("POINT_DATA count differs from POINTS"));
                }
            }
            "SCALARS" => {
                let name = next()?.to_string();
                next()?;
                next()?;
                if next()? != "LOOKUP_TABLE" {
                    return Err(bad("missing LOOKUP_TABLE"));
                }
                next()?;
                let vals = (0..n).map(|_| num(next()?)).collect::<Result<Vec<_>>>()?;
                data.fields.push((name, 1, vals));
            }
            "VECTORS" => {
                let name = next()?.to_string();
                next()?;
                let mut vals = Vec::with_capacity(2 * n);
                for _ in 0..n {
                    vals.push(num(next()?)?);
                    vals.push(num(next()?)?);
                    next()?;
                }
                data.fields.push((name, 2, vals));
            }
            other => return Err(bad(&format!("unexpected keyword {other}"))),
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangles() {
        let mesh = RectMesh::<f64>::build([0.0, 0.0, 1.0, 1.0], 1, 1).unwrap();
        let phi = FemField::scalar(vec![0.5, -0.25, 1.0, 2.0]);
        let text = vtk_string(&mesh, &[("phi", &phi)]).unwrap();
        assert!(text.contains("POINTS 4 double\n"));
        assert!(text.contains("CELLS 2 8\n"));
        assert_eq!(text.matches("SCALARS").count(), 1);
        let back = parse_vtk(&text).unwrap();
        assert_eq!(back.points.len(), 4);
        assert_eq!(back.triangles.len(), 2);
        assert_eq!(back.fields[0].2, phi.values);
    }

    #[test]
    fn vector_padding() {
        let mesh = RectMesh::<f64>::build([0.0, 0.0, 1.0, 1.0], 1, 1).unwrap();
        let th = FemField::vector(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let text = vtk_string(&mesh, &[("theta", &th)]).unwrap();
        assert!(text.contains("VECTORS theta double\n1.0000000000000000e0 2.0000000000000000e0 0\n"));
        assert_eq!(parse_vtk(&text).unwrap().fields[0].2, th.values);
    }

    #[test]
    fn rejects_mismatch() {
        let mesh = RectMesh::<f64>::build([0.0, 0.0, 1.0, 1.0], 1, 1).unwrap();
        assert!(vtk_string(&mesh, &[("phi", &FemField::scalar(vec![0.0; 3]))]).is_err());
        assert!(vtk_string(&mesh, &[("a b", &FemField::scalar(vec![0.0; 4]))]).is_err());
    }
}
