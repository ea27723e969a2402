//! Scripted clients against a real TCP listener.

use std::net::{SocketAddr, TcpStream};
use std::thread;

use vwm_core::experiment::{build_session, parse_log, run_session, LogRecord, SessionOutput};
use vwm_core::SimConfig;
use vwm_service::protocol::{Hello, WireInput, WireRecord};
use vwm_service::{read_frame, write_frame, Body, Envelope, Outcome, Server, ServiceConfig, PROTOCOL};

const SEED: u64 = 17;

struct Client {
    stream: TcpStream,
    seq: u64,
}

impl Client {
    fn connect(addr: SocketAddr) -> Self {
        Self {
            stream: TcpStream::connect(addr).unwrap(),
            seq: 0,
        }
    }

    fn send(&mut self, body: Body) {
        self.seq += 1;
        write_frame(&mut self.stream, &Envelope { seq: self.seq, body }).unwrap();
    }

    fn send_with_seq(&mut self, seq: u64, body: Body) {
        write_frame(&mut self.stream, &Envelope { seq, body }).unwrap();
    }

    fn hello(&mut self, participant: u32) {
        self.send(Body::Hello(Hello {
            protocol: PROTOCOL.into(),
            participant: Some(participant),
            ..Hello::default()
        }));
    }

    fn recv(&mut self) -> Option<Body> {
        read_frame(&mut self.stream).unwrap().map(|e| e.body)
    }

    fn expect_trial_spec(&mut self) {
        loop {
            match self.recv() {
                Some(Body::TrialSpec(_)) => return,
                Some(Body::Hello(_) | Body::SessionStart(_)) => {}
                other => panic!("expected trial_spec, got {other:?}"),
            }
        }
    }
}

fn service(dir: &std::path::Path) -> Server {
    let config = ServiceConfig::new(SimConfig::default(), SEED, dir.to_path_buf()).unwrap();
    Server::bind("127.0.0.1:0", config).unwrap()
}

fn headless(participant: u32) -> SessionOutput {
    let cfg = SimConfig::default();
    let layout = vwm_core::experiment::session_layout(&cfg, SEED).unwrap();
    let plan = build_session(participant, participant as usize % 4, SEED, &layout).unwrap();
    run_session(&plan, &cfg, &layout).unwrap()
}

fn inputs(log: &str) -> Vec<WireInput> {
    parse_log(log)
        .unwrap()
        .into_iter()
        .filter_map(|l| match l.record {
            LogRecord::Input(e) => Some(e.into()),
            _ => None,
        })
        .collect()
}

#[test]
fn replayed_trace_yields_headless_records_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let server = service(dir.path());
    let reference = headless(6);
    let events: Vec<WireInput> = reference.runs.iter().flat_map(|r| inputs(&r.log)).collect();

    let mut client = Client::connect(server.local_addr().unwrap());
    let mut writer = Client {
        stream: client.stream.try_clone().unwrap(),
        seq: 0,
    };
    let handle = thread::spawn(move || server.serve_one().unwrap().unwrap());
    let sender = thread::spawn(move || {
        writer.hello(6);
        for e in events {
            writer.send(Body::InputEvent(e));
        }
    });
    let mut records = Vec::new();
    let mut updates = 0;
    let mut end = None;
    while let Some(body) = client.recv() {
        match body {
            Body::TrialComplete(r) => records.push(r),
            Body::StateUpdate(_) => updates += 1,
            Body::Error(e) => panic!("{e:?}"),
            Body::SessionEnd(e) => end = Some(e),
            _ => {}
        }
    }
    sender.join().unwrap();
    let summary = handle.join().unwrap();

    let want: Vec<WireRecord> = reference.records().map(WireRecord::from).collect();
    assert_eq!(records, want);
    assert_eq!(updates, reference.runs.iter().map(|r| inputs(&r.log).len()).sum::<usize>());
    assert_eq!(summary.outcome, Outcome::Completed);
    assert_eq!(end.unwrap().completed_trials, 240);
    for (run, path) in reference.runs.iter().zip(&summary.logs) {
        assert_eq!(std::fs::read_to_string(path).unwrap(), run.log);
    }
    assert!(dir.path().join("plans/p006.plan").exists());
}

#[test]
fn click_during_animation_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let server = service(dir.path());
    let addr = server.local_addr().unwrap();
    let reference = headless(0);
    // Inputs of the first trial up to the click that selects the thumbnail.
    let lines = parse_log(&reference.runs[0].log).unwrap();
    let select = lines
        .iter()
        .position(|l| {
            matches!(&l.record, LogRecord::Output { kind, payload }
                if kind == "thumbnail" && payload.ends_with(",1"))
        })
        .unwrap();
    let t_select = lines[select].t_ms;
    let prefix: Vec<WireInput> = lines[..select]
        .iter()
        .filter_map(|l| match l.record {
            LogRecord::Input(e) => Some(e.into()),
            _ => None,
        })
        .collect();

    let handle = thread::spawn(move || server.serve_one().unwrap().unwrap());
    let mut client = Client::connect(addr);
    client.hello(0);
    client.expect_trial_spec();
    for e in prefix {
        client.send(Body::InputEvent(e));
        assert!(matches!(client.recv(), Some(Body::StateUpdate(_))));
    }
    client.send(Body::InputEvent(WireInput::Click { t_ms: t_select + 10 }));
    match client.recv() {
        Some(Body::StateUpdate(s)) => {
            assert_eq!(s.phase, "press_button");
            assert_eq!(s.animation_remaining_ms, 290);
            assert!(s.emissions.iter().any(|e| e.starts_with("stray,")), "{:?}", s.emissions);
        }
        other => panic!("click during animation gave {other:?}"),
    }
    drop(client);
    let summary = handle.join().unwrap();
    assert_eq!(summary.outcome, Outcome::Disconnected);
    let log = std::fs::read_to_string(&summary.logs[0]).unwrap();
    assert!(log.ends_with(&format!("{},aborted\n", t_select + 10)), "{log}");
    assert_eq!(summary.logs.len(), 1);
}

#[test]
fn stale_seq_closes_the_connection() {
    let dir = tempfile::tempdir().unwrap();
    let server = service(dir.path());
    let addr = server.local_addr().unwrap();
    let handle = thread::spawn(move || server.serve_one().unwrap().unwrap());
    let mut client = Client::connect(addr);
    client.send_with_seq(5, Body::Hello(Hello {
        protocol: PROTOCOL.into(),
        participant: Some(1),
        ..Hello::default()
    }));
    client.expect_trial_spec();
    client.send_with_seq(5, Body::InputEvent(WireInput::Click { t_ms: 0 }));
    match client.recv() {
        Some(Body::Error(e)) => assert_eq!(e.code, "stale_seq"),
        other => panic!("{other:?}"),
    }
    assert_eq!(client.recv(), None);
    let summary = handle.join().unwrap();
    assert!(matches!(summary.outcome, Outcome::Closed(_)));
    // The voided trial is logged as aborted.
    let log = std::fs::read_to_string(&summary.logs[0]).unwrap();
    assert!(log.ends_with("0,aborted\n"));
}

#[test]
fn out_of_order_event_time_is_rejected_but_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let server = service(dir.path());
    let addr = server.local_addr().unwrap();
    let handle = thread::spawn(move || server.serve_one().unwrap().unwrap());
    let mut client = Client::connect(addr);
    client.hello(2);
    client.expect_trial_spec();
    client.send(Body::InputEvent(WireInput::Cursor { t_ms: 50, dx: 1.0, dy: 0.0 }));
    assert!(matches!(client.recv(), Some(Body::StateUpdate(_))));
    client.send(Body::InputEvent(WireInput::Cursor { t_ms: 40, dx: 1.0, dy: 0.0 }));
    match client.recv() {
        Some(Body::Error(e)) => assert_eq!(e.code, "rejected_event"),
        other => panic!("{other:?}"),
    }
    client.send(Body::InputEvent(WireInput::Cursor { t_ms: 60, dx: 1.0, dy: 0.0 }));
    assert!(matches!(client.recv(), Some(Body::StateUpdate(s)) if s.t_ms == 60));
    drop(client);
    let summary = handle.join().unwrap();
    let log = std::fs::read_to_string(&summary.logs[0]).unwrap();
    assert!(!log.contains("40,cursor"));
}

#[test]
fn handshake_errors() {
    let dir = tempfile::tempdir().unwrap();
    let server = service(dir.path());
    let addr = server.local_addr().unwrap();

    let mut wrong = Client::connect(addr);
    wrong.send(Body::Hello(Hello {
        protocol: "vwm/0".into(),
        participant: Some(1),
        ..Hello::default()
    }));
    let s = server.serve_one().unwrap().unwrap();
    assert!(matches!(s.outcome, Outcome::Closed(_)));
    assert!(matches!(wrong.recv(), Some(Body::Error(e)) if e.code == "protocol"));

    let mut early = Client::connect(addr);
    early.send(Body::InputEvent(WireInput::Click { t_ms: 0 }));
    server.serve_one().unwrap().unwrap();
    assert!(matches!(early.recv(), Some(Body::Error(e)) if e.code == "protocol"));

    let mut nobody = Client::connect(addr);
    nobody.send(Body::Hello(Hello { protocol: PROTOCOL.into(), ..Hello::default() }));
    server.serve_one().unwrap().unwrap();
    assert!(matches!(nobody.recv(), Some(Body::Error(e)) if e.code == "protocol"));
    assert!(!dir.path().join("logs").exists());
}

#[test]
fn one_live_session_per_participant() {
    let dir = tempfile::tempdir().unwrap();
    let server = std::sync::Arc::new(service(dir.path()));
    let addr = server.local_addr().unwrap();
    let s1 = std::sync::Arc::clone(&server);
    let first_handle = thread::spawn(move || s1.serve_one().unwrap().unwrap());
    let mut first = Client::connect(addr);
    first.hello(3);
    first.expect_trial_spec();

    let mut second = Client::connect(addr);
    second.hello(3);
    let s = server.serve_one().unwrap().unwrap();
    assert!(matches!(s.outcome, Outcome::Closed(_)));
    assert!(matches!(second.recv(), Some(Body::Error(e)) if e.code == "busy"));

    drop(first);
    first_handle.join().unwrap();
}

#[test]
fn smoke_session_with_short_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let server = service(dir.path());
    let addr = server.local_addr().unwrap();
    let reference = headless(1);
    let handle = thread::spawn(move || server.serve_one().unwrap().unwrap());
    let mut client = Client::connect(addr);
    client.send(Body::Hello(Hello {
        protocol: PROTOCOL.into(),
        participant: Some(1),
        max_trials_per_block: Some(2),
        ..Hello::default()
    }));
    let mut starts = 0;
    for run in &reference.runs {
        // The first two trials of each block replay the headless trace.
        let lines = parse_log(&run.log).unwrap();
        let third = lines
            .iter()
            .filter(|l| matches!(l.record, LogRecord::Trial { .. }))
            .nth(2)
            .map_or(usize::MAX, |l| l.line);
        for l in lines.iter().filter(|l| l.line < third) {
            if let LogRecord::Input(e) = l.record {
                client.send(Body::InputEvent(e.into()));
            }
        }
    }
    let mut complete = 0;
    while let Some(b) = client.recv() {
        match b {
            Body::SessionStart(s) => {
                assert_eq!(s.trials_per_block, 2);
                assert_eq!(s.windows.len(), 20);
            }
            Body::TrialSpec(t) => {
                starts += 1;
                assert_eq!(t.state.tiles.len(), 4);
                assert_eq!(t.state.bar_level, "categories");
            }
            Body::TrialComplete(_) => complete += 1,
            Body::Error(e) => panic!("{e:?}"),
            _ => {}
        }
    }
    assert_eq!((starts, complete), (8, 8));
    let summary = handle.join().unwrap();
    assert_eq!(summary.outcome, Outcome::Completed);
    for path in &summary.logs {
        let (records, issues) =
            vwm_core::experiment::extract_records(&std::fs::read_to_string(path).unwrap());
        assert!(issues.is_empty());
        assert_eq!(records.len(), 2);
    }
}
