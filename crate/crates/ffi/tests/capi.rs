use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use quant_ffi::*;

fn last_error() -> String {
    let p = quant_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn stack_push_pop_and_pending_ticket() {
    unsafe {
        let s = quant_qstack_new(1, 8);
        assert!(!s.is_null());
        assert_eq!(quant_qstack_push(s, 1), QuantStatus::Ok);
        assert_eq!(quant_qstack_push(s, 2), QuantStatus::Ok);
        let mut t = ptr::null_mut();
        let mut v = 0;
        assert_eq!(quant_qstack_pop(s, &mut t), QuantStatus::Ok);
        assert_eq!(quant_ticket_poll(t, &mut v), QuantStatus::Ok);
        assert_eq!(v, 2);
        assert_eq!(quant_ticket_poll(t, &mut v), QuantStatus::Taken);
        quant_ticket_free(t);

        assert_eq!(quant_qstack_pop(s, &mut t), QuantStatus::Ok);
        assert_eq!(quant_ticket_wait(t, &mut v), QuantStatus::Ok);
        assert_eq!(v, 1);
        quant_ticket_free(t);

        assert_eq!(quant_qstack_pop(s, &mut t), QuantStatus::Ok);
        assert_eq!(quant_ticket_poll(t, &mut v), QuantStatus::Pending);
        assert_eq!(quant_qstack_push(s, 9), QuantStatus::Ok);
        assert_eq!(quant_ticket_cancel(t), QuantStatus::Fulfilled);
        assert_eq!(quant_ticket_poll(t, &mut v), QuantStatus::Ok);
        assert_eq!(v, 9);
        quant_ticket_free(t);
        quant_qstack_free(s);
    }
}

#[test]
fn queue_fifo_and_cancel() {
    unsafe {
        let q = quant_qqueue_new(1);
        let mut t = ptr::null_mut();
        let mut v = 0;
        assert_eq!(quant_qqueue_dequeue(q, &mut t), QuantStatus::Ok);
        assert_eq!(quant_ticket_cancel(t), QuantStatus::Ok);
        assert_eq!(quant_ticket_cancel(t), QuantStatus::Cancelled);
        assert_eq!(quant_ticket_poll(t, &mut v), QuantStatus::Cancelled);
        quant_ticket_free(t);
        for x in [5, 6] {
            assert_eq!(quant_qqueue_enqueue(q, x), QuantStatus::Ok);
        }
        for want in [5, 6] {
            assert_eq!(quant_qqueue_dequeue(q, &mut t), QuantStatus::Ok);
            assert_eq!(quant_ticket_wait(t, &mut v), QuantStatus::Ok);
            assert_eq!(v, want);
            quant_ticket_free(t);
        }
        quant_qqueue_free(q);
    }
}

#[test]
fn shared_across_threads() {
    struct Handle(*const QuantQQueue);
    unsafe impl Sync for Handle {}
    let q = Handle(quant_qqueue_new(4));
    let total: u64 = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4u64)
            .map(|k| {
                let q = &q;
                s.spawn(move || unsafe {
                    let mut sum = 0;
                    for i in 0..1000 {
                        assert_eq!(quant_qqueue_enqueue(q.0, k * 1000 + i), QuantStatus::Ok);
                        let mut t = ptr::null_mut();
                        let mut v = 0;
                        assert_eq!(quant_qqueue_dequeue(q.0, &mut t), QuantStatus::Ok);
                        assert_eq!(quant_ticket_wait(t, &mut v), QuantStatus::Ok);
                        quant_ticket_free(t);
                        sum += v;
                    }
                    sum
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).sum()
    });
    assert_eq!(total, (0..4000).sum::<u64>());
    unsafe { quant_qqueue_free(q.0 as *mut _) };
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        assert!(quant_qstack_new(0, 8).is_null());
        assert!(last_error().contains("width"));
        assert!(quant_qqueue_new(0).is_null());
        assert_eq!(quant_qstack_push(ptr::null(), 1), QuantStatus::NullArgument);
        assert!(last_error().contains("null"));
        let mut t = ptr::null_mut();
        assert_eq!(
            quant_qqueue_dequeue(ptr::null(), &mut t),
            QuantStatus::NullArgument
        );
        let mut h = ptr::null_mut();
        let missing = CString::new("/nonexistent/history.csv").unwrap();
        assert_eq!(
            quant_history_load(missing.as_ptr(), &mut h),
            QuantStatus::Io
        );
        assert!(last_error().contains("/nonexistent/history.csv"));
        let bad = CString::new("not a header\n").unwrap();
        assert_eq!(
            quant_history_parse(bad.as_ptr(), &mut h),
            QuantStatus::Parse
        );
        assert!(h.is_null());
        assert_eq!(quant_history_len(ptr::null()), 0);
        quant_qstack_free(ptr::null_mut());
        quant_ticket_free(ptr::null_mut());
        quant_history_free(ptr::null_mut());
    }
}

const H2: &str = "seq,thread,kind,object,item_in,item_out,prev,invoke_ns,response_ns
0,0,PROD,0,7,,,0,2
1,1,PROD,0,8,,,1,3
2,0,CONS,0,,3,,4,6
";

#[test]
fn verify_file_and_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h2.csv");
    std::fs::write(&path, H2).unwrap();
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let text = CString::new(H2.replace("CONS,0,,3", "CONS,0,,7")).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(quant_history_load(path.as_ptr(), &mut h), QuantStatus::Ok);
        assert_eq!(quant_history_len(h), 3);
        let mut v = QuantVerdict::default();
        assert_eq!(quant_history_verify(h, &mut v), QuantStatus::Ok);
        let want = QuantVerdict {
            quantifiable: false,
            calls: 3,
            pending: 0,
            configurations: 3,
            violations: 1,
        };
        assert_eq!(v, want);
        quant_history_free(h);

        assert_eq!(quant_history_parse(text.as_ptr(), &mut h), QuantStatus::Ok);
        assert_eq!(quant_history_verify(h, &mut v), QuantStatus::Ok);
        assert!(v.quantifiable);
        assert_eq!(v.configurations, 2);
        quant_history_free(h);
    }
}

/// The generated header is valid C and C++.
#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/quant.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "quant_qstack_pop",
        "quant_ticket_poll",
        "QUANT_STATUS_PENDING",
        "QuantVerdict",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(e) => eprintln!("skipping {compiler}: {e}"),
        }
    }
}
