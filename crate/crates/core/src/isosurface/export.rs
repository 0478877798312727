//! OBJ/MTL text export. JSON export is the serde form of
//! [`IsosurfaceMesh`](super::IsosurfaceMesh).

use std::fmt::Write;

use super::IsosurfaceMesh;

fn material_name(mesh: &IsosurfaceMesh) -> String {
    format!("surface_{}", mesh.surface_index)
}

/// All vertices first, then one face group per surface with 1-based
/// indices. Pass `mtllib` to reference a material library.
pub fn meshes_to_obj(meshes: &[IsosurfaceMesh], mtllib: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(lib) = mtllib {
        writeln!(out, "mtllib {lib}").unwrap();
    }
    for mesh in meshes {
        for v in &mesh.vertices {
            writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
        }
    }
    let mut base = 1usize;
    for mesh in meshes {
        writeln!(out, "g {}", material_name(mesh)).unwrap();
        if mtllib.is_some() {
            writeln!(out, "usemtl {}", material_name(mesh)).unwrap();
        }
        for t in &mesh.triangles {
            let [a, b, c] = t.map(|i| i as usize + base);
            writeln!(out, "f {a} {b} {c}").unwrap();
        }
        base += mesh.vertices.len();
    }
    out
}

/// One material per surface; opacity goes into the dissolve (`d`) term.
pub fn meshes_to_mtl(meshes: &[IsosurfaceMesh]) -> String {
    let mut out = String::new();
    for mesh in meshes {
        let [r, g, b] = mesh.color;
        writeln!(out, "newmtl {}", material_name(mesh)).unwrap();
        writeln!(out, "Kd {r} {g} {b}").unwrap();
        writeln!(out, "d {}", mesh.opacity).unwrap();
        writeln!(out).unwrap();
    }
    out
}
