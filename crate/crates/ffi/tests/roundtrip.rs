//! Exercise the C ABI from Rust exactly as a foreign caller would: through
//! raw pointers and NUL-terminated strings.

use hgk_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut i8) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    hgk_string_free(p);
    s
}

#[test]
fn fixture_context_runs_commands() {
    unsafe {
        let mut ctx: *mut HgkContext = ptr::null_mut();
        let st = hgk_context_from_fixture(cstr("sl2").as_ptr(), &mut ctx);
        assert_eq!(st, HgkStatus::Ok);
        assert!(!ctx.is_null());

        // validate
        let mut out: *mut i8 = ptr::null_mut();
        let st = hgk_run(ctx, cstr("validate").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, HgkStatus::Ok, "error: {:?}", CStr::from_ptr(hgk_last_error()));
        let report = take_string(out);
        let v: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert_eq!(v["command"], "validate");
        assert_eq!(v["payload"]["validation"]["passed"], true);

        // member on a zero-set point [[0,1],[-1,0]]-ish: use identity
        let m = cstr("[[[1,0],[0,0]],[[0,0],[1,0]]]");
        let mut out: *mut i8 = ptr::null_mut();
        let st = hgk_run(ctx, cstr("member").as_ptr(), m.as_ptr(), &mut out);
        assert_eq!(st, HgkStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["payload"]["in_group"], true);
        assert_eq!(v["payload"]["in_x"], true);
        assert_eq!(v["payload"]["kempf_ness"]["member"], true);

        // closed on a hyperbola point: converges to a closed verdict
        let m = cstr("[[[1.8616970176379196,0],[0.5,0]],[[-0.5,0],[-0.7383029823620804,0]]]");
        let mut out: *mut i8 = ptr::null_mut();
        let st = hgk_run(ctx, cstr("closed").as_ptr(), m.as_ptr(), &mut out);
        assert_eq!(st, HgkStatus::Ok, "error: {:?}", CStr::from_ptr(hgk_last_error()));
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["payload"]["verdict"], "closed");

        hgk_context_free(ctx);
    }
}

#[test]
fn json_context_round_trips_config() {
    unsafe {
        let mut ctx: *mut HgkContext = ptr::null_mut();
        let json = hgk_core::fixtures::bundled_json("sl2").unwrap();
        let st = hgk_context_from_json(cstr(&json).as_ptr(), &mut ctx);
        assert_eq!(st, HgkStatus::Ok);
        let mut out: *mut i8 = ptr::null_mut();
        assert_eq!(hgk_context_config_json(ctx, &mut out), HgkStatus::Ok);
        assert_eq!(take_string(out), json);
        hgk_context_free(ctx);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut ctx: *mut HgkContext = ptr::null_mut();
        let st = hgk_context_from_json(cstr("{ not json").as_ptr(), &mut ctx);
        assert_eq!(st, HgkStatus::ParseError);
        assert!(ctx.is_null());
        let msg = CStr::from_ptr(hgk_last_error()).to_str().unwrap();
        assert!(!msg.is_empty());

        let st = hgk_context_from_fixture(cstr("sl3").as_ptr(), &mut ctx);
        assert_eq!(st, HgkStatus::InvalidArgument);

        // schema violation: drop a required block
        let mut v: serde_json::Value =
            serde_json::from_str(&hgk_core::fixtures::bundled_json("sl2").unwrap()).unwrap();
        v["group"].as_object_mut().unwrap().remove("delta");
        let st = hgk_context_from_json(cstr(&v.to_string()).as_ptr(), &mut ctx);
        assert_eq!(st, HgkStatus::SchemaError);

        // valid context, bad command / missing matrix
        let mut ctx: *mut HgkContext = ptr::null_mut();
        assert_eq!(hgk_context_from_fixture(cstr("sl2").as_ptr(), &mut ctx), HgkStatus::Ok);
        let mut out: *mut i8 = ptr::null_mut();
        assert_eq!(
            hgk_run(ctx, cstr("frobnicate").as_ptr(), ptr::null(), &mut out),
            HgkStatus::InvalidArgument
        );
        assert_eq!(
            hgk_run(ctx, cstr("member").as_ptr(), ptr::null(), &mut out),
            HgkStatus::InvalidArgument
        );
        // a matrix that is not on the coset manifold is a numeric error for flow
        let m = cstr("[[[2,0],[0,0]],[[0,0],[2,0]]]");
        assert_eq!(hgk_run(ctx, cstr("flow").as_ptr(), m.as_ptr(), &mut out), HgkStatus::NumericError);
        hgk_context_free(ctx);
    }
}

#[test]
fn version_is_exposed() {
    let v = unsafe { CStr::from_ptr(hgk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
