use std::ffi::c_char;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use relu_langevin::diagnostics::sliced_w1;
use relu_langevin::landscape::IdealLandscape;
use relu_langevin_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    let n = unsafe { rl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn generator_handle_round_trip() {
    let dims = [3usize, 10, 30];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { rl_generator_new(dims.as_ptr(), 3, 11, &mut g) }, RlStatus::Ok);
    let (mut i, mut o) = (0, 0);
    assert_eq!(unsafe { rl_generator_dims(g, &mut i, &mut o) }, RlStatus::Ok);
    assert_eq!((i, o), (3, 30));
    let z = [0.2, -0.4, 1.0];
    let mut out = vec![0.0; 30];
    assert_eq!(unsafe { rl_generator_apply(g, z.as_ptr(), 3, out.as_mut_ptr(), 30) }, RlStatus::Ok);
    let expected = relu_langevin::generator::build_generator(&dims, 11).unwrap().apply(&z).unwrap();
    assert_eq!(out, expected);

    let mut short = vec![0.0; 5];
    assert_eq!(unsafe { rl_generator_apply(g, z.as_ptr(), 3, short.as_mut_ptr(), 5) }, RlStatus::Shape);
    assert!(last_error().contains("30"));
    unsafe { rl_generator_free(g) };
    unsafe { rl_generator_free(ptr::null_mut()) };
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(unsafe { rl_generator_new(ptr::null(), 2, 0, ptr::null_mut()) }, RlStatus::NullPointer);
    assert!(last_error().contains("out"));
    let mut v = 0.0;
    assert_eq!(unsafe { rl_ideal_loss(ptr::null(), ptr::null(), 2, 2, &mut v) }, RlStatus::NullPointer);
}

#[test]
fn landscape_functions_match_library() {
    let zs = [0.0, 2.0, 0.5];
    let x = [-0.4, 0.3, 1.1];
    let land = IdealLandscape::new(&zs, 3).unwrap();
    let mut loss = 0.0;
    assert_eq!(unsafe { rl_ideal_loss(x.as_ptr(), zs.as_ptr(), 3, 3, &mut loss) }, RlStatus::Ok);
    assert_eq!(loss, land.loss(&x).unwrap());
    let mut g = [0.0; 3];
    assert_eq!(unsafe { rl_ideal_gradient(x.as_ptr(), zs.as_ptr(), 3, 3, g.as_mut_ptr()) }, RlStatus::Ok);
    assert_eq!(g.to_vec(), land.gradient(&x).unwrap());
    let mut eig = 0.0;
    assert_eq!(unsafe { rl_min_hessian_eig(zs.as_ptr(), zs.as_ptr(), 3, 3, &mut eig) }, RlStatus::Ok);
    assert!((eig - 1.0).abs() < 1e-12);
    let origin = [0.0; 3];
    assert_eq!(unsafe { rl_min_hessian_eig(origin.as_ptr(), zs.as_ptr(), 3, 3, &mut eig) }, RlStatus::Domain);
    assert!(last_error().contains("origin"));
}

#[test]
fn projection_and_transport() {
    let v = [3.0, -1.0, 0.0];
    let c = [0.0; 3];
    let mut p = [0.0; 3];
    assert_eq!(unsafe { rl_project_l1(v.as_ptr(), c.as_ptr(), 3, 1.0, p.as_mut_ptr()) }, RlStatus::Ok);
    assert_eq!(p, [1.0, 0.0, 0.0]);

    let a = [0.0, 0.0, 1.0, 1.0];
    let b = [0.5, 0.0, 1.5, 1.0];
    let mut w = 0.0;
    assert_eq!(unsafe { rl_sliced_w1(a.as_ptr(), b.as_ptr(), 2, 2, 32, 5, &mut w) }, RlStatus::Ok);
    let rows = |s: &[f64]| s.chunks(2).map(<[f64]>::to_vec).collect::<Vec<_>>();
    assert_eq!(w, sliced_w1(&rows(&a), &rows(&b), 32, 5).unwrap());
}

#[test]
fn mixture_and_langevin() {
    let w = [0.5, 0.5];
    let m = [-1.0, 0.0, 1.0, 0.0];
    let var = [0.5, 0.5];
    let mut gmm = ptr::null_mut();
    assert_eq!(unsafe { rl_gmm_new(2, 2, w.as_ptr(), m.as_ptr(), var.as_ptr(), &mut gmm) }, RlStatus::Ok);
    let (mut lp, mut score) = (0.0, [1.0; 2]);
    let z = [0.0, 0.0];
    assert_eq!(
        unsafe { rl_gmm_log_density_and_score(gmm, z.as_ptr(), 2, &mut lp, score.as_mut_ptr()) },
        RlStatus::Ok
    );
    assert!(score[0].abs() < 1e-12 && score[1].abs() < 1e-12);
    unsafe { rl_gmm_free(gmm) };
    let bad_var = [0.5, -1.0];
    assert_eq!(
        unsafe { rl_gmm_new(2, 2, w.as_ptr(), m.as_ptr(), bad_var.as_ptr(), &mut gmm) },
        RlStatus::InvalidArgument
    );

    let zs = [1.0, 0.0];
    let z0 = [-0.5, 0.2];
    let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
    assert_eq!(unsafe { rl_ideal_langevin(zs.as_ptr(), z0.as_ptr(), 2, 2, 0.01, 50.0, 2000, 3, a.as_mut_ptr()) }, RlStatus::Ok);
    assert_eq!(unsafe { rl_ideal_langevin(zs.as_ptr(), z0.as_ptr(), 2, 2, 0.01, 50.0, 2000, 3, b.as_mut_ptr()) }, RlStatus::Ok);
    assert_eq!(a, b);
    assert_eq!(
        unsafe { rl_ideal_langevin(zs.as_ptr(), z0.as_ptr(), 2, 2, -1.0, 50.0, 10, 3, a.as_mut_ptr()) },
        RlStatus::InvalidArgument
    );
}

/// Compiles a C program against the committed header and the static
/// library, then runs it.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("librelu_langevin_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler unavailable");
        return;
    }
    let bin = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("rl_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{:?}", out);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
