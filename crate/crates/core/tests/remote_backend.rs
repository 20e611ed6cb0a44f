use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use domforge::generation::backend::{
    CompletionBackend, CompletionParams, RemoteBackend, WireFormat,
};
use domforge::generation::generate_plain;
use domforge::{Error, SubjectLanguage};

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    auth: Option<String>,
    body: serde_json::Value,
}

/// Serves the scripted `(status, body)` responses in order, one per connection,
/// repeating the last one when the script runs out.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    std::thread::spawn(move || {
        for (i, stream) in listener.incoming().enumerate() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut len = 0;
            let mut auth = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => len = value.trim().parse().unwrap(),
                    "authorization" => auth = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(Seen {
                path: request_line
                    .split_whitespace()
                    .nth(1)
                    .unwrap_or("")
                    .to_string(),
                auth,
                body: serde_json::from_slice(&body).unwrap_or_default(),
            });
            let (status, text) = script[i.min(script.len() - 1)].clone();
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    (format!("http://{addr}"), seen)
}

fn backend(url: String) -> RemoteBackend {
    let mut b = RemoteBackend::new(url);
    b.backoff = Duration::from_millis(1);
    b.timeout = Duration::from_secs(10);
    b
}

#[test]
fn completion_round_trip() {
    let (base, seen) = serve(vec![(200, r#"{"text": " {\n\treturn\n}"}"#.into())]);
    let mut b = backend(format!("{base}/v1/completions"));
    b.token = Some("secret".into());
    b.model = Some("tiny".into());
    let params = CompletionParams::default().with_stop(&["\nfunc"]);
    assert_eq!(
        b.complete("Complete this function: f()", &params).unwrap(),
        " {\n\treturn\n}"
    );
    let req = seen.lock().unwrap()[0].clone();
    assert_eq!(req.path, "/v1/completions");
    assert_eq!(req.auth.as_deref(), Some("Bearer secret"));
    assert_eq!(req.body["prompt"], "Complete this function: f()");
    assert_eq!(req.body["stop"][0], "\nfunc");
    assert_eq!(req.body["model"], "tiny");
}

#[test]
fn chat_endpoint_reads_message_content() {
    let (base, seen) = serve(vec![(
        200,
        r#"{"choices": [{"message": {"content": "{ x }"}}]}"#.into(),
    )]);
    let b = backend(format!("{base}/v1/chat/completions"));
    assert_eq!(b.format, WireFormat::Chat);
    assert_eq!(
        b.complete("hi", &CompletionParams::default()).unwrap(),
        "{ x }"
    );
    assert_eq!(seen.lock().unwrap()[0].body["messages"][0]["content"], "hi");
}

#[test]
fn server_errors_are_retried_then_reported() {
    let (base, seen) = serve(vec![(500, "boom".into())]);
    let b = backend(format!("{base}/complete"));
    match b.complete("p", &CompletionParams::default()) {
        Err(Error::BackendStatus { status, body }) => {
            assert_eq!((status, body.as_str()), (500, "boom"))
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn transient_failure_recovers() {
    let (base, seen) = serve(vec![
        (503, "busy".into()),
        (429, "slow down".into()),
        (200, r#"{"text": "ok"}"#.into()),
    ]);
    let b = backend(format!("{base}/complete"));
    assert_eq!(b.complete("p", &CompletionParams::default()).unwrap(), "ok");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (base, seen) = serve(vec![(400, "bad request".into())]);
    let b = backend(format!("{base}/complete"));
    assert!(matches!(
        b.complete("p", &CompletionParams::default()),
        Err(Error::BackendStatus { status: 400, .. })
    ));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let b = backend(format!("http://127.0.0.1:{port}/complete"));
    assert!(matches!(
        b.complete("p", &CompletionParams::default()),
        Err(Error::BackendTransport(_))
    ));
}

#[test]
fn plain_generation_over_http() {
    let (base, _) = serve(vec![(
        200,
        r#"{"text": " {\n\tc.String(200, \"ok\")\n}\n\nfunc extra() {}"}"#.into(),
    )]);
    let b = backend(format!("{base}/complete"));
    let r = generate_plain(
        "func H(c *gin.Context)",
        SubjectLanguage::Go,
        &b,
        &CompletionParams::default(),
    )
    .unwrap();
    assert_eq!(r.code, "{\n\tc.String(200, \"ok\")\n}");
    assert_eq!(
        r.prompt_used,
        "Complete this function: func H(c *gin.Context)"
    );
}
