//! Newline-delimited json request/response service for reward computation.
//!
//! One request per line, one response per line. Requests are independent and
//! may be answered out of order; callers correlate by `req_id`. A malformed
//! line produces an error response, never a crash. Transports: stdio or TCP
//! (one connection handler per client, requests fanned out to the rayon
//! pool).

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{Sentence, StyleLabel};
use crate::embed::{get_embedding, EmbeddingProvider, EmbeddingVector};
use crate::scenegraph::{extract_entities_heuristic, profile_from_entities};
use crate::{Error, Result};

use super::{advantage, j_il, AmateurAggregation, ExistVariant, RewardBreakdown, RewardParams, RewardPayload};

/// Protocol schema version emitted in every response.
pub const PROTOCOL_VERSION: u32 = 1;

/// A candidate or demonstration as it arrives on the wire: raw text, or
/// precomputed embedding/entities, or both (precomputed wins).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PayloadSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emb: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<Vec<String>>,
}

/// Per-request parameter overrides, merged over the service defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParamOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_safe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amateur_aggregation: Option<AmateurAggregation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exist_variant: Option<ExistVariant>,
}

#[derive(Debug, Deserialize)]
pub struct Request {
    #[serde(default)]
    pub v: Option<u32>,
    #[serde(default)]
    pub req_id: Option<Value>,
    pub mode: String,
    #[serde(default)]
    pub candidate: Option<PayloadSpec>,
    pub expert: PayloadSpec,
    #[serde(default)]
    pub amateurs: Vec<PayloadSpec>,
    #[serde(default)]
    pub sample: Option<PayloadSpec>,
    #[serde(default)]
    pub greedy: Option<PayloadSpec>,
    #[serde(default)]
    pub params: Option<ParamOverrides>,
}

#[derive(Debug, Serialize)]
struct OkResponse<'a> {
    v: u32,
    req_id: &'a Value,
    breakdown: &'a RewardBreakdown,
    #[serde(skip_serializing_if = "Option::is_none")]
    greedy_j_il: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ErrResponse<'a> {
    v: u32,
    req_id: &'a Value,
    error: String,
}

/// Shared, thread-safe state behind the service.
pub struct ServeContext {
    pub provider: EmbeddingProvider,
    pub defaults: RewardParams,
    pub stopwords: HashSet<String>,
}

impl ServeContext {
    pub fn new(provider: EmbeddingProvider, defaults: RewardParams) -> Self {
        ServeContext {
            provider,
            defaults,
            stopwords: crate::scenegraph::default_stopwords(),
        }
    }

    fn resolve(&self, spec: &PayloadSpec) -> Result<RewardPayload> {
        let emb = match &spec.emb {
            Some(values) => EmbeddingVector::new(values.clone())?.into_normalized()?,
            None => {
                let text = spec.text.as_deref().ok_or_else(|| {
                    Error::InvalidInput("payload needs text or emb".into())
                })?;
                let sentence = Sentence::new("payload", StyleLabel::new("payload"), text);
                get_embedding(&self.provider, &sentence)?
            }
        };
        let profile = match &spec.entities {
            Some(entities) => profile_from_entities("payload", entities),
            None => {
                let text = spec.text.as_deref().ok_or_else(|| {
                    Error::InvalidInput("payload needs entities or text".into())
                })?;
                let sentence = Sentence::new("payload", StyleLabel::new("payload"), text);
                extract_entities_heuristic(&sentence, &self.stopwords)
            }
        };
        Ok(RewardPayload { emb, profile })
    }

    fn merged_params(&self, overrides: &Option<ParamOverrides>) -> RewardParams {
        let mut p = self.defaults;
        if let Some(o) = overrides {
            if let Some(alpha) = o.alpha {
                p.alpha = alpha;
            }
            if let Some(delta) = o.delta {
                p.delta = delta;
            }
            if let Some(j_safe) = o.j_safe {
                p.j_safe = j_safe;
            }
            if let Some(agg) = o.amateur_aggregation {
                p.amateur_aggregation = agg;
            }
            if let Some(exist) = o.exist_variant {
                p.exist_variant = exist;
            }
        }
        p
    }
}

fn answer(ctx: &ServeContext, request: &Request) -> Result<(RewardBreakdown, Option<f64>)> {
    let params = ctx.merged_params(&request.params);
    let expert = ctx.resolve(&request.expert)?;
    let amateurs: Vec<RewardPayload> = request
        .amateurs
        .iter()
        .map(|a| ctx.resolve(a))
        .collect::<Result<_>>()?;

    match request.mode.as_str() {
        "j_il" => {
            let candidate = request
                .candidate
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("j_il mode needs a candidate".into()))?;
            let breakdown = j_il(&ctx.resolve(candidate)?, &expert, &amateurs, &params)?;
            Ok((breakdown, None))
        }
        "advantage" => {
            let sample = request
                .sample
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("advantage mode needs a sample".into()))?;
            let greedy = request
                .greedy
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("advantage mode needs a greedy".into()))?;
            let mut breakdown = j_il(&ctx.resolve(sample)?, &expert, &amateurs, &params)?;
            let greedy_breakdown = j_il(&ctx.resolve(greedy)?, &expert, &amateurs, &params)?;
            let adv = advantage(breakdown.j_il, greedy_breakdown.j_il, &params);
            breakdown.advantage = adv.advantage;
            breakdown.skipped = adv.skipped;
            Ok((breakdown, Some(greedy_breakdown.j_il)))
        }
        other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
    }
}

/// Handle one request line, returning exactly one response line (without the
/// trailing newline). Never panics on malformed input.
pub fn handle_line(ctx: &ServeContext, line: &str) -> String {
    let request: Request = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(_) => {
            return serde_json::to_string(&ErrResponse {
                v: PROTOCOL_VERSION,
                req_id: &Value::Null,
                error: "parse".into(),
            })
            .expect("error response serializes");
        }
    };
    let req_id = request.req_id.clone().unwrap_or(Value::Null);
    match answer(ctx, &request) {
        Ok((breakdown, greedy_j_il)) => serde_json::to_string(&OkResponse {
            v: PROTOCOL_VERSION,
            req_id: &req_id,
            breakdown: &breakdown,
            greedy_j_il,
        })
        .expect("response serializes"),
        Err(e) => serde_json::to_string(&ErrResponse {
            v: PROTOCOL_VERSION,
            req_id: &req_id,
            error: e.to_string(),
        })
        .expect("error response serializes"),
    }
}

/// Fan requests out to a small dedicated worker pool and funnel responses
/// through one locked writer. Blocking reads stay on the caller's thread, so
/// nothing here can starve a shared compute pool.
fn pump<R: BufRead, W: Write + Send>(ctx: &ServeContext, reader: R, writer: W) {
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(2)
        .max(2);
    let writer = Mutex::new(writer);
    let (tx, rx) = mpsc::channel::<String>();
    let rx = Mutex::new(rx);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = rx.lock().unwrap().recv();
                match next {
                    Ok(line) => {
                        let response = handle_line(ctx, &line);
                        let mut w = writer.lock().unwrap();
                        let _ = writeln!(w, "{response}");
                        let _ = w.flush();
                    }
                    Err(_) => break,
                }
            });
        }
        for line in reader.lines() {
            let line = match line {
                Ok(l) => l,
                Err(_) => break,
            };
            if line.trim().is_empty() {
                continue;
            }
            if tx.send(line).is_err() {
                break;
            }
        }
        drop(tx);
    });
}

/// Serve requests from stdin to stdout until EOF.
pub fn serve_stdio(ctx: Arc<ServeContext>) {
    pump(&ctx, BufReader::new(std::io::stdin()), std::io::stdout());
}

/// Serve requests over TCP. Each connection gets its own handler thread;
/// individual requests are processed on the rayon pool, so responses within
/// a connection may interleave.
pub fn serve_tcp<A: ToSocketAddrs>(ctx: Arc<ServeContext>, addr: A) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    serve_on_listener(ctx, listener)
}

/// Like [`serve_tcp`], for a listener the caller already bound (lets tests
/// pick port 0).
pub fn serve_on_listener(ctx: Arc<ServeContext>, listener: TcpListener) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let ctx = Arc::clone(&ctx);
        std::thread::spawn(move || {
            let reader = BufReader::new(match stream.try_clone() {
                Ok(s) => s,
                Err(_) => return,
            });
            pump(&ctx, reader, stream);
        });
    }
    Ok(())
}
