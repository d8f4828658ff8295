//! Writes the meshes of the built-in problems in the neutral text format.
//!
//! `cargo run -p fgm-core --example generate_meshes -- <dir>` (default `meshes`).

use fgm_core::builtin;
use fgm_core::mesh::write_mesh;

fn main() -> fgm_core::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "meshes".into());
    std::fs::create_dir_all(&dir).expect("create output directory");
    for (file, problem) in [
        ("problem1.mesh", "problem1-case1"),
        ("problem2.mesh", "problem2"),
        ("problem3.mesh", "problem3-case1"),
    ] {
        let mesh = builtin(problem)?.mesh.build()?;
        let path = format!("{dir}/{file}");
        std::fs::write(&path, write_mesh(&mesh)).expect("write mesh");
        println!(
            "{path}: {} elements, {} nodes",
            mesh.element_count(),
            mesh.node_count()
        );
    }
    Ok(())
}
