//! Deformed-surface export as a legacy ASCII VTK unstructured grid.
//!
//! Points are `(x₁ + s·u₁, x₂ + s·u₂, w)` for an in-plane scale `s`.
//! Point channels: `w`, `u_1`, `u_2` and the area-weighted vertex average of
//! the bending density. Cell channel: the elementwise bending density
//! `(|T|⁻¹ ∫_T |∇∇_h w − α I|²)^{1/2}`. Numbers are written in the shortest
//! form that parses back to the identical `f64`.

use std::io::{self, BufRead, Write};

use fvk_core::{Discretization, DktField, P1VectorField, ProblemSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub point_data: Vec<(String, Vec<f64>)>,
    pub cell_data: Vec<(String, Vec<f64>)>,
}

/// Elementwise `(|T|⁻¹ ∫_T |∇∇_h w − α I|²)^{1/2}`.
pub fn bending_density(disc: &Discretization, spec: &ProblemSpec, w: &DktField) -> Vec<f64> {
    let mesh = disc.mesh();
    (0..mesh.num_triangles())
        .map(|t| {
            // the Hessian is affine on T, so the edge-midpoint rule is exact
            let (op, dofs, a) = (disc.element(t), w.element_dofs(mesh, t), spec.alpha_on(mesh, t));
            let mean_sq: f64 = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
                .iter()
                .map(|&lambda| {
                    let h = op.hessian_at(&dofs, lambda);
                    (h[0][0] - a).powi(2) + h[0][1].powi(2) + h[1][0].powi(2) + (h[1][1] - a).powi(2)
                })
                .sum::<f64>()
                / 3.0;
            mean_sq.sqrt()
        })
        .collect()
}

impl Surface {
    pub fn from_state(
        title: &str,
        disc: &Discretization,
        spec: &ProblemSpec,
        u: &P1VectorField,
        w: &DktField,
        u_scale: f64,
    ) -> Self {
        let mesh = disc.mesh();
        let points = mesh
            .nodes()
            .iter()
            .zip(&u.values)
            .zip(&w.values)
            .map(|((x, d), &h)| [x[0] + u_scale * d[0], x[1] + u_scale * d[1], h])
            .collect();
        let density = bending_density(disc, spec, w);
        let mut acc = vec![0.0; mesh.num_nodes()];
        let mut weight = vec![0.0; mesh.num_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let a = mesh.area(t);
            for &v in tri {
                acc[v] += a * density[t];
                weight[v] += a;
            }
        }
        let nodal: Vec<f64> = acc.iter().zip(&weight).map(|(s, a)| s / a).collect();
        Surface {
            title: title.to_owned(),
            points,
            triangles: mesh.triangles().to_vec(),
            point_data: vec![
                ("w".into(), w.values.clone()),
                ("u_1".into(), u.values.iter().map(|d| d[0]).collect()),
                ("u_2".into(), u.values.iter().map(|d| d[1]).collect()),
                ("bending_density".into(), nodal),
            ],
            cell_data: vec![("bending_density".into(), density)],
        }
    }

    pub fn point_channel(&self, name: &str) -> Option<&[f64]> {
        self.point_data.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn cell_channel(&self, name: &str) -> Option<&[f64]> {
        self.cell_data.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn write_vtk<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "{}", self.title.replace('\n', " "))?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.points.len())?;
        for p in &self.points {
            writeln!(out, "{:?} {:?} {:?}", p[0], p[1], p[2])?;
        }
        let m = self.triangles.len();
        writeln!(out, "CELLS {} {}", m, 4 * m)?;
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(out, "CELL_TYPES {m}")?;
        for _ in 0..m {
            writeln!(out, "5")?;
        }
        let scalars = |out: &mut W, data: &[(String, Vec<f64>)]| -> io::Result<()> {
            for (name, values) in data {
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in values {
                    writeln!(out, "{v:?}")?;
                }
            }
            Ok(())
        };
        if !self.point_data.is_empty() {
            writeln!(out, "POINT_DATA {}", self.points.len())?;
            scalars(&mut out, &self.point_data)?;
        }
        if !self.cell_data.is_empty() {
            writeln!(out, "CELL_DATA {m}")?;
            scalars(&mut out, &self.cell_data)?;
        }
        Ok(())
    }

    /// Reads the subset of the legacy format written by [`Surface::write_vtk`].
    pub fn read_vtk<R: BufRead>(input: R) -> io::Result<Self> {
        let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        let mut lines = input.lines();
        let mut next = || -> io::Result<String> {
            lines
                .next()
                .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "truncated VTK file"))?
        };
        let header = next()?;
        if !header.starts_with("# vtk DataFile") {
            return Err(bad(format!("not a legacy VTK file: `{header}`")));
        }
        let title = next()?;
        if next()?.trim() != "ASCII" {
            return Err(bad("only ASCII files are supported".into()));
        }
        if next()?.trim() != "DATASET UNSTRUCTURED_GRID" {
            return Err(bad("expected an unstructured grid".into()));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad integer `{s}`")));
        let count = |line: &str, keyword: &str| -> io::Result<usize> {
            let mut it = line.split_whitespace();
            if it.next() != Some(keyword) {
                return Err(bad(format!("expected {keyword}, got `{line}`")));
            }
            int(it.next().unwrap_or(""))
        };
        let n = count(&next()?, "POINTS")?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let l = next()?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 3 {
                return Err(bad(format!("point line `{l}`")));
            }
            points.push([f(v[0])?, f(v[1])?, f(v[2])?]);
        }
        let m = count(&next()?, "CELLS")?;
        let mut triangles = Vec::with_capacity(m);
        for _ in 0..m {
            let l = next()?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 4 || v[0] != "3" {
                return Err(bad(format!("only triangles are supported: `{l}`")));
            }
            let t = [int(v[1])?, int(v[2])?, int(v[3])?];
            if t.iter().any(|&i| i >= n) {
                return Err(bad(format!("cell references missing point: `{l}`")));
            }
            triangles.push(t);
        }
        if count(&next()?, "CELL_TYPES")? != m {
            return Err(bad("cell type count mismatch".into()));
        }
        for _ in 0..m {
            if next()?.trim() != "5" {
                return Err(bad("only VTK_TRIANGLE cells are supported".into()));
            }
        }
        let mut point_data = Vec::new();
        let mut cell_data = Vec::new();
        let mut section: Option<(bool, usize)> = None;
        while let Some(line) = lines_next(&mut next)? {
            let line = line.trim().to_owned();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("POINT_DATA") => section = Some((true, int(it.next().unwrap_or(""))?)),
                Some("CELL_DATA") => section = Some((false, int(it.next().unwrap_or(""))?)),
                Some("SCALARS") => {
                    let name = it.next().ok_or_else(|| bad("unnamed scalar field".into()))?.to_owned();
                    let (is_point, len) = section.ok_or_else(|| bad("scalars outside a data section".into()))?;
                    if next()?.trim() != "LOOKUP_TABLE default" {
                        return Err(bad("expected LOOKUP_TABLE default".into()));
                    }
                    let values = (0..len).map(|_| f(next()?.trim())).collect::<io::Result<Vec<_>>>()?;
                    if is_point {
                        point_data.push((name, values));
                    } else {
                        cell_data.push((name, values));
                    }
                }
                _ => return Err(bad(format!("unexpected line `{line}`"))),
            }
        }
        if point_data.iter().any(|(_, v)| v.len() != n) || cell_data.iter().any(|(_, v)| v.len() != m) {
            return Err(bad("data section size mismatch".into()));
        }
        Ok(Surface {
            title,
            points,
            triangles,
            point_data,
            cell_data,
        })
    }
}

fn lines_next(next: &mut impl FnMut() -> io::Result<String>) -> io::Result<Option<String>> {
    match next() {
        Ok(l) => Ok(Some(l)),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fvk_core::mesh::make_disc_mesh;

    fn zero_surface() -> (Discretization, Surface) {
        let disc = Discretization::new(make_disc_mesh(1.0, 0.5).unwrap()).unwrap();
        let mesh = disc.mesh();
        let spec = ProblemSpec::new(mesh, 1.0, 0.0);
        let s = Surface::from_state(
            "zero",
            &disc,
            &spec,
            &P1VectorField::zeros(mesh.num_nodes()),
            &DktField::zeros(mesh),
            1.0,
        );
        (disc, s)
    }

    #[test]
    fn zero_state_is_flat_with_mesh_counts() {
        let (disc, s) = zero_surface();
        assert_eq!(s.points.len(), disc.mesh().num_nodes());
        assert_eq!(s.triangles.len(), disc.mesh().num_triangles());
        assert!(s.points.iter().all(|p| p[2] == 0.0));
        assert!(s.cell_channel("bending_density").unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn density_of_a_paraboloid_matches_alpha_mismatch() {
        // w = (x² + y²)/2 has D²w = I; with α = 0 the density is √2 everywhere
        let disc = Discretization::new(make_disc_mesh(1.0, 0.25).unwrap()).unwrap();
        let mesh = disc.mesh();
        let w = DktField::interpolate(mesh, |z| 0.5 * (z[0] * z[0] + z[1] * z[1]), |z| z);
        let spec = ProblemSpec::new(mesh, 1.0, 0.0);
        for d in bending_density(&disc, &spec, &w) {
            assert!((d - 2f64.sqrt()).abs() < 1e-10, "{d}");
        }
        let spec = ProblemSpec::new(mesh, 1.0, 1.0);
        let d = bending_density(&disc, &spec, &w);
        assert!(d.iter().all(|d| d.abs() < 1e-10), "{d:?}");
    }

    #[test]
    fn truncated_or_foreign_files_are_rejected() {
        let (_, s) = zero_surface();
        let mut buf = Vec::new();
        s.write_vtk(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(Surface::read_vtk(cut.as_bytes()).is_err());
        assert!(Surface::read_vtk("hello\n".as_bytes()).is_err());
    }
}
