//! Exercises the C entry points exactly as a foreign caller would: raw
//! pointers, status codes, out-parameters, and explicit frees.

use std::ffi::CString;
use std::ptr;

use mpid_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe {
        let need = mpid_last_error(ptr::null_mut(), 0);
        let mut buf = vec![0u8; need + 1];
        mpid_last_error(buf.as_mut_ptr().cast(), buf.len());
        buf.truncate(need);
        String::from_utf8(buf).unwrap()
    }
}

#[test]
fn matrix_create_read_free_round_trips() {
    unsafe {
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut a: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(mpid_matrix_create(3, 2, data.as_ptr(), &mut a), MPID_STATUS_OK);
        assert_eq!(mpid_matrix_rows(a), 3);
        assert_eq!(mpid_matrix_cols(a), 2);

        let mut v = 0.0f64;
        assert_eq!(mpid_matrix_get(a, 2, 1, &mut v), MPID_STATUS_OK);
        assert_eq!(v.to_bits(), 6.0f64.to_bits());

        let mut back = [0.0f64; 6];
        assert_eq!(mpid_matrix_copy_data(a, back.as_mut_ptr(), 6), MPID_STATUS_OK);
        assert_eq!(back, data);

        assert_eq!(
            mpid_matrix_get(a, 3, 0, &mut v),
            MPID_STATUS_INVALID_ARGUMENT
        );
        assert!(last_error().contains("outside"));

        assert_eq!(
            mpid_matrix_copy_data(a, back.as_mut_ptr(), 5),
            MPID_STATUS_INVALID_ARGUMENT
        );

        mpid_matrix_free(a);
        mpid_matrix_free(ptr::null_mut());
    }
}

#[test]
fn null_and_bad_code_arguments_are_reported() {
    unsafe {
        let mut a: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(
            mpid_matrix_create(0, 4, ptr::null(), &mut a),
            MPID_STATUS_INVALID_ARGUMENT
        );
        assert_eq!(
            mpid_matrix_create(2, 2, ptr::null(), ptr::null_mut()),
            MPID_STATUS_NULL_POINTER
        );

        let mut out = 0.0f64;
        assert_eq!(mpid_unit_roundoff(99, &mut out), MPID_STATUS_INVALID_ARGUMENT);
        assert!(last_error().contains("99"));

        assert_eq!(mpid_round_scalar(1.0, 7, &mut out), MPID_STATUS_INVALID_ARGUMENT);
        assert_eq!(mpid_matrix_rows(ptr::null()), 0);
        assert_eq!(mpid_id_rank(ptr::null()), 0);

        // A successful call clears the pending message.
        assert_eq!(
            mpid_unit_roundoff(MPID_FORMAT_BINARY32, &mut out),
            MPID_STATUS_OK
        );
        assert_eq!(out, (-24f64).exp2());
        assert_eq!(last_error(), "");
    }
}

#[test]
fn rounding_and_gamma_match_library_semantics() {
    unsafe {
        let mut out = 0.0f64;
        assert_eq!(
            mpid_round_scalar(1.0 + 2.4e-4, MPID_FORMAT_BINARY16, &mut out),
            MPID_STATUS_OK
        );
        assert_eq!(out.to_bits(), 1.0f64.to_bits(), "below half ulp must round down");
        assert_eq!(
            mpid_round_scalar(70000.0, MPID_FORMAT_BINARY16, &mut out),
            MPID_STATUS_OK
        );
        assert!(out.is_infinite(), "beyond the overflow threshold rounds to inf");

        assert_eq!(mpid_gamma(4, 6.0e-8, &mut out), MPID_STATUS_OK);
        let closed: f64 = 4.0 * 6.0e-8 / (1.0 - 6.0e-8);
        assert_eq!(out.to_bits(), closed.to_bits());
        assert_eq!(mpid_gamma(4, 1.5, &mut out), MPID_STATUS_INVALID_ARGUMENT);

        // Matrix rounding fails loudly when an entry leaves the format.
        let data = [1.0, 2.0, 70000.0, 4.0];
        let mut a: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(mpid_matrix_create(2, 2, data.as_ptr(), &mut a), MPID_STATUS_OK);
        let mut rounded: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(
            mpid_round_matrix(a, MPID_FORMAT_BINARY16, &mut rounded),
            MPID_STATUS_OVERFLOW
        );
        assert_eq!(
            mpid_round_matrix(a, MPID_FORMAT_BINARY32, &mut rounded),
            MPID_STATUS_OK
        );
        let mut v = 0.0;
        assert_eq!(mpid_matrix_get(rounded, 0, 1, &mut v), MPID_STATUS_OK);
        assert_eq!(v, 70000.0f32 as f64);
        mpid_matrix_free(rounded);
        mpid_matrix_free(a);
    }
}

#[test]
fn decomposition_pipeline_works_through_the_abi() {
    unsafe {
        let name = c("medium");
        let mut a: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(
            mpid_gen_decay(name.as_ptr(), 60, 40, 7, &mut a),
            MPID_STATUS_OK
        );

        let mut id: *mut MpidId = ptr::null_mut();
        assert_eq!(
            mpid_id_compute(a, 8, MPID_CONTEXT_DOUBLE, MPID_VARIANT_DOUBLE, &mut id),
            MPID_STATUS_OK
        );
        assert_eq!(mpid_id_rank(id), 8);

        let mut indices = [0usize; 8];
        assert_eq!(mpid_id_indices(id, indices.as_mut_ptr(), 8), MPID_STATUS_OK);
        let mut seen = indices.to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 8, "skeleton indices must be distinct");
        assert!(indices.iter().all(|&j| j < 40));

        let mut p: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(mpid_id_coefficients(id, &mut p), MPID_STATUS_OK);
        assert_eq!(mpid_matrix_rows(p), 8);
        assert_eq!(mpid_matrix_cols(p), 40);
        // Identity block on the skeleton columns.
        for (row, &col) in indices.iter().enumerate() {
            for i in 0..8 {
                let mut v = 0.0;
                assert_eq!(mpid_matrix_get(p, i, col, &mut v), MPID_STATUS_OK);
                let want: f64 = if i == row { 1.0 } else { 0.0 };
                assert_eq!(v.to_bits(), want.to_bits());
            }
        }

        let mut recon: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(mpid_id_reconstruct(a, id, &mut recon), MPID_STATUS_OK);
        let mut err = f64::NAN;
        assert_eq!(mpid_rel_spectral_error(a, recon, &mut err), MPID_STATUS_OK);
        // Medium decay at rank 8: the tail starts at sigma_9 = 1/81.
        assert!(err > 1e-4 && err < 0.2, "unexpected rank-8 error {err:e}");

        // Rank beyond the column count is a caller error.
        let mut too_big: *mut MpidId = ptr::null_mut();
        assert_eq!(
            mpid_id_compute(a, 41, MPID_CONTEXT_DOUBLE, MPID_VARIANT_DOUBLE, &mut too_big),
            MPID_STATUS_INVALID_ARGUMENT
        );
        // The double variant refuses low-precision contexts.
        assert_eq!(
            mpid_id_compute(a, 8, MPID_CONTEXT_SINGLE, MPID_VARIANT_DOUBLE, &mut too_big),
            MPID_STATUS_INVALID_ARGUMENT
        );

        mpid_matrix_free(recon);
        mpid_matrix_free(p);
        mpid_id_free(id);
        mpid_id_free(ptr::null_mut());
        mpid_matrix_free(a);
    }
}

#[test]
fn underflow_reports_the_failing_step() {
    unsafe {
        // Every entry is far below half the smallest binary16 subnormal, so
        // the stored matrix is exactly zero and the first pivot dies.
        let tiny = [1e-9f64; 12];
        let mut a: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(mpid_matrix_create(4, 3, tiny.as_ptr(), &mut a), MPID_STATUS_OK);

        let mut id: *mut MpidId = ptr::null_mut();
        assert_eq!(
            mpid_id_compute(a, 2, MPID_CONTEXT_SIMULATED_HALF, MPID_VARIANT_LOW, &mut id),
            MPID_STATUS_UNDERFLOW
        );
        assert_eq!(mpid_last_underflow_step(), 0);
        assert!(last_error().contains("step 0"));

        // The marker resets on the next successful call.
        let mut out = 0.0;
        assert_eq!(
            mpid_unit_roundoff(MPID_FORMAT_BINARY16, &mut out),
            MPID_STATUS_OK
        );
        assert_eq!(mpid_last_underflow_step(), -1);

        mpid_matrix_free(a);
    }
}

#[test]
fn file_round_trip_preserves_bits() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let raw_path = c(dir.path().join("m.raw").to_str().unwrap());
        let csv_path = c(dir.path().join("m.csv").to_str().unwrap());

        let name = c("fast");
        let mut a: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(
            mpid_gen_decay(name.as_ptr(), 9, 7, 3, &mut a),
            MPID_STATUS_OK
        );
        assert_eq!(mpid_matrix_save(a, raw_path.as_ptr(), MPID_FILE_RAW), MPID_STATUS_OK);
        assert_eq!(mpid_matrix_save(a, csv_path.as_ptr(), MPID_FILE_CSV), MPID_STATUS_OK);

        let mut raw_back: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(
            mpid_matrix_load(raw_path.as_ptr(), MPID_FILE_RAW, 0, &mut raw_back),
            MPID_STATUS_OK
        );
        let n = 9 * 7;
        let mut want = vec![0.0f64; n];
        let mut got = vec![0.0f64; n];
        assert_eq!(mpid_matrix_copy_data(a, want.as_mut_ptr(), n), MPID_STATUS_OK);
        assert_eq!(mpid_matrix_copy_data(raw_back, got.as_mut_ptr(), n), MPID_STATUS_OK);
        for (w, g) in want.iter().zip(&got) {
            assert_eq!(w.to_bits(), g.to_bits(), "binary round-trip must be bitwise");
        }

        let missing = c(dir.path().join("absent.raw").to_str().unwrap());
        let mut nope: *mut MpidMatrix = ptr::null_mut();
        assert_eq!(
            mpid_matrix_load(missing.as_ptr(), MPID_FILE_RAW, 0, &mut nope),
            MPID_STATUS_IO
        );
        assert!(!last_error().is_empty());

        mpid_matrix_free(raw_back);
        mpid_matrix_free(a);
    }
}
