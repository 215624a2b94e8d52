use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;

/// Minimal HTTP/1.1 server answering `n` requests from a route table.
pub(crate) fn serve(routes: Vec<(String, u16, String)>, n: usize) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut seen = Vec::new();
        for stream in listener.incoming().take(n) {
            let mut stream = stream.unwrap();
            let mut line = String::new();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            reader.read_line(&mut line).unwrap();
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                if h == "\r\n" || h.is_empty() {
                    break;
                }
            }
            let target = line.split_whitespace().nth(1).unwrap_or_default().to_string();
            let (code, body) = routes
                .iter()
                .find(|(p, _, _)| *p == target)
                .map(|(_, c, b)| (*c, b.clone()))
                .unwrap_or((404, String::new()));
            write!(
                stream,
                "HTTP/1.1 {code} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            seen.push(target);
        }
        seen
    });
    (base, handle)
}
