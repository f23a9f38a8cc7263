// Own test binary: it sets a process-wide environment variable.

use icocnn::cache::{alpha_maps, alpha_set, cache_dir, mesh_dump, CACHE_ENV};
use icocnn_core::mesh::{build_mesh, compute_alpha_maps};

#[test]
fn cache_directory_is_filled_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(CACHE_ENV, dir.path());
    assert_eq!(cache_dir().as_deref(), Some(dir.path()));

    let fresh = compute_alpha_maps(&build_mesh(3).unwrap()).unwrap();
    let first = alpha_maps(3).unwrap();
    assert!(dir.path().join("alpha-r3.ten").exists());
    let second = alpha_maps(3).unwrap();
    assert!(first == second, "cache hit differs from miss");
    for (a, b) in fresh.values().iter().zip(second.values()) {
        assert_eq!(*a as f32, *b as f32);
    }

    let set = alpha_set(&[2, 3]).unwrap();
    assert_eq!(set.get(2).unwrap().level(), 2);

    let dump = mesh_dump(2).unwrap();
    assert!(dir.path().join("mesh-r2.icom").exists());
    assert!(mesh_dump(2).unwrap() == dump);

    std::env::set_var(CACHE_ENV, "");
    assert_eq!(cache_dir(), None);
}
