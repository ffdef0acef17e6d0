//! C interface to `relu_langevin`.
//!
//! Every function returns an [`RlStatus`]. On failure a message is stored
//! per thread and can be read with [`rl_last_error_message`]. Objects are
//! opaque handles created by `*_new` and released by the matching
//! `*_free`. Output buffers are caller-owned and their lengths are passed
//! explicitly.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use relu_langevin::diagnostics::{min_hessian_eig, sliced_w1};
use relu_langevin::generator::{build_generator, ReluGenerator};
use relu_langevin::landscape::IdealLandscape;
use relu_langevin::priors::GaussianMixturePrior;
use relu_langevin::samplers::{project_l1, run_langevin, L1ProjectionSpec, LangevinConfig};
use relu_langevin::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Shape = 4,
    NonFinite = 5,
    Size = 6,
    Internal = 7,
}

/// Random ReLU generator.
pub struct RlGenerator(ReluGenerator);

/// Isotropic Gaussian-mixture prior.
pub struct RlGmm(GaussianMixturePrior);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> RlStatus {
    match err {
        Error::Domain(_) | Error::Degenerate(_) => RlStatus::Domain,
        Error::Shape(_) | Error::CountMismatch(..) | Error::UnsupportedDimension(_) => RlStatus::Shape,
        Error::NonFinite { .. } => RlStatus::NonFinite,
        Error::Size { .. } => RlStatus::Size,
        Error::Config(_) => RlStatus::InvalidArgument,
        Error::Io(_) | Error::Json(_) => RlStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RlStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            RlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RlStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn input<'a, T>(ptr: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or point to `len` writable values.
unsafe fn output<'a, T>(ptr: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

/// # Safety
/// `ptr` must be null or a valid pointer.
unsafe fn out_value<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure::Null(what))
}

fn shape(msg: String) -> Failure {
    Failure::Lib(Error::Shape(msg))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `capacity` bytes, into `buffer`. Returns the full message
/// length excluding the terminator.
///
/// # Safety
/// `buffer` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rl_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buffer.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a generator with layer widths `dims[0..n_dims]` (latent first).
///
/// # Safety
/// `dims` must point to `n_dims` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_generator_new(
    dims: *const usize,
    n_dims: usize,
    seed: u64,
    out: *mut *mut RlGenerator,
) -> RlStatus {
    guard(|| {
        let out = out_value(out, "out")?;
        let dims = input(dims, n_dims, "dims")?;
        let g = build_generator(dims, seed)?;
        *out = Box::into_raw(Box::new(RlGenerator(g)));
        Ok(())
    })
}

/// Releases a generator; null is ignored.
///
/// # Safety
/// `generator` must come from [`rl_generator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_generator_free(generator: *mut RlGenerator) {
    if !generator.is_null() {
        drop(Box::from_raw(generator));
    }
}

/// Writes the latent and output dimensions.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_generator_dims(
    generator: *const RlGenerator,
    input_dim: *mut usize,
    output_dim: *mut usize,
) -> RlStatus {
    guard(|| {
        let g = &generator.as_ref().ok_or(Failure::Null("generator"))?.0;
        *out_value(input_dim, "input_dim")? = g.input_dim();
        *out_value(output_dim, "output_dim")? = g.output_dim();
        Ok(())
    })
}

/// Evaluates `G(z)` into `out[0..out_len]`.
///
/// # Safety
/// `z` must hold `z_len` values and `out` `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rl_generator_apply(
    generator: *const RlGenerator,
    z: *const f64,
    z_len: usize,
    out: *mut f64,
    out_len: usize,
) -> RlStatus {
    guard(|| {
        let g = &generator.as_ref().ok_or(Failure::Null("generator"))?.0;
        let z = input(z, z_len, "z")?;
        if out_len != g.output_dim() {
            return Err(shape(format!("output buffer holds {out_len}, generator emits {}", g.output_dim())));
        }
        let out = output(out, out_len, "out")?;
        out.copy_from_slice(&g.apply(z)?);
        Ok(())
    })
}

/// Creates a mixture of `components` isotropic Gaussians in `dim`
/// dimensions. `means` is row-major `components × dim`.
///
/// # Safety
/// Arrays must have the stated lengths and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_gmm_new(
    components: usize,
    dim: usize,
    weights: *const f64,
    means: *const f64,
    variances: *const f64,
    out: *mut *mut RlGmm,
) -> RlStatus {
    guard(|| {
        let out = out_value(out, "out")?;
        let w = input(weights, components, "weights")?.to_vec();
        let m = input(means, components * dim, "means")?;
        let v = input(variances, components, "variances")?.to_vec();
        let means = if dim == 0 { vec![Vec::new(); components] } else { m.chunks(dim).map(<[f64]>::to_vec).collect() };
        let prior = GaussianMixturePrior::new(w, means, v)?;
        *out = Box::into_raw(Box::new(RlGmm(prior)));
        Ok(())
    })
}

/// Releases a mixture; null is ignored.
///
/// # Safety
/// `gmm` must come from [`rl_gmm_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_gmm_free(gmm: *mut RlGmm) {
    if !gmm.is_null() {
        drop(Box::from_raw(gmm));
    }
}

/// Log-density and score of the mixture at `z`.
///
/// # Safety
/// `z` and `score` must hold `dim` values, `log_density` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_gmm_log_density_and_score(
    gmm: *const RlGmm,
    z: *const f64,
    dim: usize,
    log_density: *mut f64,
    score: *mut f64,
) -> RlStatus {
    guard(|| {
        let p = &gmm.as_ref().ok_or(Failure::Null("gmm"))?.0;
        let (lp, s) = p.log_density_and_score(input(z, dim, "z")?)?;
        *out_value(log_density, "log_density")? = lp;
        output(score, dim, "score")?.copy_from_slice(&s);
        Ok(())
    })
}

/// Idealized loss at `x` for target `z_star`, both of length `n`.
///
/// # Safety
/// `x` and `z_star` must hold `n` values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_ideal_loss(
    x: *const f64,
    z_star: *const f64,
    n: usize,
    depth: usize,
    out: *mut f64,
) -> RlStatus {
    guard(|| {
        let land = IdealLandscape::new(input(z_star, n, "z_star")?, depth)?;
        *out_value(out, "out")? = land.loss(input(x, n, "x")?)?;
        Ok(())
    })
}

/// Gradient of the idealized loss into `grad[0..n]`.
///
/// # Safety
/// `x`, `z_star` and `grad` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn rl_ideal_gradient(
    x: *const f64,
    z_star: *const f64,
    n: usize,
    depth: usize,
    grad: *mut f64,
) -> RlStatus {
    guard(|| {
        let land = IdealLandscape::new(input(z_star, n, "z_star")?, depth)?;
        let g = land.gradient(input(x, n, "x")?)?;
        output(grad, n, "grad")?.copy_from_slice(&g);
        Ok(())
    })
}

/// Smallest Hessian eigenvalue of the idealized loss at `x ≠ 0`.
///
/// # Safety
/// `x` and `z_star` must hold `n` values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_min_hessian_eig(
    x: *const f64,
    z_star: *const f64,
    n: usize,
    depth: usize,
    out: *mut f64,
) -> RlStatus {
    guard(|| {
        *out_value(out, "out")? = min_hessian_eig(input(x, n, "x")?, input(z_star, n, "z_star")?, depth, n)?;
        Ok(())
    })
}

/// Euclidean projection of `v` onto the ℓ1 ball of `radius` around `center`.
///
/// # Safety
/// `v`, `center` and `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn rl_project_l1(
    v: *const f64,
    center: *const f64,
    n: usize,
    radius: f64,
    out: *mut f64,
) -> RlStatus {
    guard(|| {
        let spec = L1ProjectionSpec::new(input(center, n, "center")?.to_vec(), radius)?;
        let p = project_l1(input(v, n, "v")?, &spec);
        output(out, n, "out")?.copy_from_slice(&p);
        Ok(())
    })
}

/// Sliced W1 between two row-major `count × dim` sample sets.
///
/// # Safety
/// `a` and `b` must hold `count·dim` values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_sliced_w1(
    a: *const f64,
    b: *const f64,
    count: usize,
    dim: usize,
    projections: usize,
    seed: u64,
    out: *mut f64,
) -> RlStatus {
    guard(|| {
        if dim == 0 {
            return Err(shape("dim must be positive".into()));
        }
        let rows = |p, what| -> Result<Vec<Vec<f64>>, Failure> {
            Ok(input(p, count * dim, what)?.chunks(dim).map(<[f64]>::to_vec).collect())
        };
        *out_value(out, "out")? = sliced_w1(&rows(a, "a")?, &rows(b, "b")?, projections, seed)?;
        Ok(())
    })
}

/// Runs `steps` Langevin steps on the idealized loss from `z0` and writes
/// the final state into `final_state[0..n]`.
///
/// # Safety
/// `z_star`, `z0` and `final_state` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn rl_ideal_langevin(
    z_star: *const f64,
    z0: *const f64,
    n: usize,
    depth: usize,
    eta: f64,
    beta: f64,
    steps: usize,
    seed: u64,
    final_state: *mut f64,
) -> RlStatus {
    guard(|| {
        let land = IdealLandscape::new(input(z_star, n, "z_star")?, depth)?;
        let cfg = LangevinConfig::new(eta, beta, steps, seed).recording_every(steps.max(1));
        let traj = run_langevin(&land, input(z0, n, "z0")?, &cfg)?;
        output(final_state, n, "final_state")?.copy_from_slice(traj.last_state());
        Ok(())
    })
}
