//! Client for an out-of-process probability server.
//!
//! The wire format is newline-delimited JSON, one request and one response
//! per line, over TCP or a child process's stdio:
//!
//! | request `kind` | request fields              | ok response fields          |
//! |----------------|-----------------------------|-----------------------------|
//! | `info`         | none                        | `vocab_size`, `eot_id`      |
//! | `tokenize`     | `text`                      | `ids`                       |
//! | `detokenize`   | `ids`                       | `text`                      |
//! | `next_dist`    | `context` (ids), `f_bits`   | `counts` (length τ)         |
//!
//! Every response carries `"status": "ok"` or `"status": "error"` with a
//! `message`. `next_dist` counts are quantized on the server with the same
//! largest-remainder rule as [`quantize_distribution`](super::quantize_distribution),
//! so only integers cross the boundary.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    FrequencyTable, ModelError, ProbabilityModel, ProbabilityVector, TokenId, Vocabulary,
    DEFAULT_F_BITS,
};

/// Environment variable naming a `host:port` bridge endpoint.
pub const BRIDGE_ENV: &str = "ICD_BRIDGE_ADDR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BridgeRequest {
    Info,
    Tokenize { text: String },
    Detokenize { ids: Vec<TokenId> },
    NextDist { context: Vec<TokenId>, f_bits: u32 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeResponse {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<TokenId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eot_id: Option<TokenId>,
}

impl BridgeResponse {
    pub fn ok() -> Self {
        Self {
            status: "ok".into(),
            ..Self::default()
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self {
            status: "error".into(),
            message: Some(message.into()),
            ..Self::default()
        }
    }
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Option<Box<dyn Write + Send>>,
    child: Option<Child>,
}

impl Drop for Connection {
    fn drop(&mut self) {
        // closing the write side is the server's shutdown signal
        self.writer.take();
        if let Some(mut child) = self.child.take() {
            let _ = child.wait();
        }
    }
}

/// A [`ProbabilityModel`] served by a remote process. Requests on one
/// connection are serialized.
pub struct RemoteModel {
    conn: Mutex<Connection>,
    vocab: Vocabulary,
}

impl std::fmt::Debug for RemoteModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteModel").field("vocab", &self.vocab).finish()
    }
}

impl RemoteModel {
    /// Wraps an established byte stream and performs the `info` handshake.
    pub fn from_streams<R, W>(reader: R, writer: W) -> Result<Self, ModelError>
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        Self::with_connection(Connection {
            reader: Box::new(reader),
            writer: Some(Box::new(writer)),
            child: None,
        })
    }

    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self, ModelError> {
        let stream = TcpStream::connect(addr)?;
        let reader = BufReader::new(stream.try_clone()?);
        Self::from_streams(reader, stream)
    }

    /// Connects to the endpoint named by [`BRIDGE_ENV`].
    pub fn from_env() -> Result<Self, ModelError> {
        let addr = std::env::var(BRIDGE_ENV)
            .map_err(|_| ModelError::Bridge(format!("{BRIDGE_ENV} is not set")))?;
        Self::connect(addr.as_str())
    }

    /// Launches `program` and talks to it over stdin/stdout.
    pub fn spawn(program: &str, args: &[&str]) -> Result<Self, ModelError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Self::with_connection(Connection {
            reader: Box::new(BufReader::new(stdout)),
            writer: Some(Box::new(stdin)),
            child: Some(child),
        })
    }

    fn with_connection(conn: Connection) -> Result<Self, ModelError> {
        let conn = Mutex::new(conn);
        let resp = roundtrip(&conn, &BridgeRequest::Info)?;
        let size = resp
            .vocab_size
            .ok_or_else(|| ModelError::Bridge("info response lacks vocab_size".into()))?;
        let eot = resp
            .eot_id
            .ok_or_else(|| ModelError::Bridge("info response lacks eot_id".into()))?;
        let vocab = Vocabulary::new(size, eot)?;
        Ok(Self { conn, vocab })
    }

    pub fn request(&self, req: &BridgeRequest) -> Result<BridgeResponse, ModelError> {
        roundtrip(&self.conn, req)
    }

    pub fn tokenize(&self, text: &str) -> Result<Vec<TokenId>, ModelError> {
        let resp = self.request(&BridgeRequest::Tokenize { text: text.into() })?;
        let ids = resp
            .ids
            .ok_or_else(|| ModelError::Bridge("tokenize response lacks ids".into()))?;
        self.vocab.validate_context(&ids)?;
        Ok(ids)
    }

    pub fn detokenize(&self, ids: &[TokenId]) -> Result<String, ModelError> {
        let resp = self.request(&BridgeRequest::Detokenize { ids: ids.to_vec() })?;
        resp.text
            .ok_or_else(|| ModelError::Bridge("detokenize response lacks text".into()))
    }
}

fn roundtrip(conn: &Mutex<Connection>, req: &BridgeRequest) -> Result<BridgeResponse, ModelError> {
    let mut guard = conn
        .lock()
        .map_err(|_| ModelError::Bridge("connection poisoned".into()))?;
    let mut line = serde_json::to_string(req).map_err(|e| ModelError::Bridge(e.to_string()))?;
    line.push('\n');
    {
        let writer = guard
            .writer
            .as_mut()
            .ok_or_else(|| ModelError::Bridge("connection closed".into()))?;
        writer.write_all(line.as_bytes())?;
        writer.flush()?;
    }
    let mut reply = String::new();
    if guard.reader.read_line(&mut reply)? == 0 {
        return Err(ModelError::Bridge("server closed the connection".into()));
    }
    let resp: BridgeResponse = serde_json::from_str(reply.trim_end())
        .map_err(|e| ModelError::Bridge(format!("malformed response: {e}")))?;
    match resp.status.as_str() {
        "ok" => Ok(resp),
        "error" => Err(ModelError::Bridge(
            resp.message.unwrap_or_else(|| "unspecified server error".into()),
        )),
        other => Err(ModelError::Bridge(format!("unknown status {other:?}"))),
    }
}

impl ProbabilityModel for RemoteModel {
    fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    /// Dequantized server counts at the default precision.
    fn next_distribution(&self, context: &[TokenId]) -> Result<ProbabilityVector, ModelError> {
        let table = self.next_frequencies(context, DEFAULT_F_BITS)?;
        let total = table.total() as f64;
        ProbabilityVector::new(table.counts().iter().map(|&c| c as f64 / total).collect())
    }

    fn next_frequencies(
        &self,
        context: &[TokenId],
        f_bits: u32,
    ) -> Result<FrequencyTable, ModelError> {
        self.vocab.validate_context(context)?;
        let resp = self.request(&BridgeRequest::NextDist {
            context: context.to_vec(),
            f_bits,
        })?;
        let counts = resp
            .counts
            .ok_or_else(|| ModelError::Bridge("next_dist response lacks counts".into()))?;
        if counts.len() != self.vocab.size() {
            return Err(ModelError::Bridge(format!(
                "next_dist returned {} counts for a vocabulary of {}",
                counts.len(),
                self.vocab.size()
            )));
        }
        FrequencyTable::from_counts(counts, f_bits)
    }
}
