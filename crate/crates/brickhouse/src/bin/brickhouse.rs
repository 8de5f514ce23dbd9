//! Command-line surface: `serve` runs the HTTP service; every other
//! subcommand is a thin client over it. All output is JSON on stdout.
//!
//! Exit codes: 0 success, 2 validation/bad request, 3 authorization,
//! 4 transport failure, 1 anything else.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use brickhouse::api::{serve, ApiError, ServerConfig};

#[derive(Parser)]
#[command(name = "brickhouse", version, about = "Semantic building data platform")]
struct Cli {
    /// Service base URL (or BRICKHOUSE_SERVER).
    #[arg(long, global = true)]
    server: Option<String>,
    /// Bearer token (or BRICKHOUSE_TOKEN).
    #[arg(long, global = true)]
    token: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        /// TOML config file (bind, data_dir, tokens, limits).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    #[command(subcommand)]
    Org(OrgCmd),
    #[command(subcommand)]
    Site(SiteCmd),
    #[command(subcommand)]
    Building(BuildingCmd),
    #[command(subcommand)]
    Model(ModelCmd),
    #[command(subcommand)]
    Query(QueryCmd),
    #[command(subcommand)]
    Ingest(IngestCmd),
    #[command(subcommand)]
    Stream(StreamCmd),
    #[command(subcommand)]
    App(AppCmd),
}

#[derive(Subcommand)]
enum OrgCmd {
    Create {
        #[arg(long)]
        name: String,
    },
    List,
}

#[derive(Subcommand)]
enum SiteCmd {
    Create {
        #[arg(long)]
        org: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lat: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lon: f64,
        #[arg(long, default_value = "")]
        address: String,
        #[arg(long)]
        cadastral: Option<String>,
    },
    List,
}

#[derive(Subcommand)]
enum BuildingCmd {
    Create {
        #[arg(long)]
        site: String,
        #[arg(long)]
        name: String,
    },
    List,
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Upload a model document as a new draft version.
    Upload {
        #[arg(long)]
        target: String,
        #[arg(long)]
        file: PathBuf,
    },
    Validate {
        #[arg(long)]
        target: String,
        #[arg(long)]
        version: u32,
    },
    Publish {
        #[arg(long)]
        target: String,
        #[arg(long)]
        version: u32,
    },
    /// Describe one entity across the given models.
    Describe {
        #[arg(long)]
        entity: String,
        #[arg(long = "model", required = true)]
        models: Vec<String>,
    },
}

#[derive(Subcommand)]
enum QueryCmd {
    /// Store a query document for invocation by reference.
    Store {
        #[arg(long)]
        id: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Invoke a query document or a stored query against models.
    Invoke {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        query_version: Option<u32>,
        #[arg(long = "model", required = true)]
        models: Vec<String>,
        /// Variable bindings, `name=<iri>`.
        #[arg(long = "arg")]
        args: Vec<String>,
    },
}

#[derive(Subcommand)]
enum IngestCmd {
    /// Ingest a gateway JSON payload with mapping rules.
    DchJson {
        #[arg(long)]
        file: PathBuf,
        /// Rules file: JSON array of {gateway, source_point_name, stream_id}.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Ingest a NEM12 CSV document.
    Nem12 {
        #[arg(long)]
        file: PathBuf,
        /// Stream for the document's single NMI.
        #[arg(long)]
        stream: Option<String>,
        /// Per-NMI stream assignment, `<nmi>=<stream>`.
        #[arg(long = "map")]
        map: Vec<String>,
        /// Site UTC offset, `+10:00` style or seconds.
        #[arg(long, default_value = "+00:00", allow_hyphen_values = true)]
        offset: String,
        #[arg(long)]
        owner: Option<String>,
    },
}

#[derive(Subcommand)]
enum StreamCmd {
    Create {
        #[arg(long)]
        id: String,
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        unit: String,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        interval: Option<i64>,
        #[arg(long)]
        owner: Option<String>,
    },
    Read {
        #[arg(long)]
        stream: String,
        #[arg(long)]
        start: String,
        #[arg(long)]
        end: String,
    },
    /// Completeness and data-health findings over a window.
    Health {
        #[arg(long)]
        stream: String,
        #[arg(long)]
        start: String,
        #[arg(long)]
        end: String,
        #[arg(long)]
        interval: Option<i64>,
        /// Reference clock for future-timestamp checks.
        #[arg(long)]
        now: Option<String>,
    },
}

#[derive(Subcommand)]
enum AppCmd {
    /// Register an app package: a manifest file, or a directory holding
    /// manifest.json plus query.briql.json.
    Register {
        #[arg(long)]
        package: PathBuf,
    },
    Install {
        #[arg(long)]
        app: String,
        #[arg(long)]
        app_version: Option<u32>,
        #[arg(long)]
        target: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    Run {
        #[arg(long)]
        install: String,
        #[arg(long)]
        as_of: Option<String>,
    },
    Result {
        #[arg(long)]
        install: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Serve {
            config,
            bind,
            data_dir,
        } => run_server(config, bind, data_dir),
        other => {
            let client = Client::new(cli.server, cli.token);
            match run_client(&client, other) {
                Ok(value) => {
                    println!("{}", serde_json::to_string_pretty(&value).unwrap());
                    ExitCode::SUCCESS
                }
                Err(failure) => {
                    println!("{}", serde_json::to_string_pretty(&failure.body).unwrap());
                    ExitCode::from(failure.exit)
                }
            }
        }
    }
}

fn run_server(config: Option<PathBuf>, bind: Option<String>, data_dir: Option<PathBuf>) -> ExitCode {
    let mut server_config = match config {
        Some(path) => match std::fs::read_to_string(&path) {
            Ok(text) => match ServerConfig::from_toml(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("bad config {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            },
            Err(e) => {
                eprintln!("cannot read config {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => ServerConfig::from_toml("").expect("empty config is valid"),
    };
    server_config.apply_env();
    if let Some(bind) = bind {
        server_config.bind = bind;
    }
    if let Some(dir) = data_dir {
        server_config.data_dir = Some(dir);
    }
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime");
    match runtime.block_on(serve(server_config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("serve: {e}");
            ExitCode::FAILURE
        }
    }
}

struct Failure {
    body: Value,
    exit: u8,
}

struct Client {
    base: String,
    token: Option<String>,
    http: reqwest::blocking::Client,
}

impl Client {
    fn new(server: Option<String>, token: Option<String>) -> Self {
        let base = server
            .or_else(|| std::env::var("BRICKHOUSE_SERVER").ok())
            .unwrap_or_else(|| "http://127.0.0.1:8321".to_string());
        let token = token.or_else(|| std::env::var("BRICKHOUSE_TOKEN").ok());
        Client {
            base: base.trim_end_matches('/').to_string(),
            token,
            http: reqwest::blocking::Client::new(),
        }
    }

    fn request(
        &self,
        method: reqwest::Method,
        path: &str,
        body: Option<Body>,
    ) -> Result<Value, Failure> {
        let url = format!("{}{}", self.base, path);
        let mut req = self.http.request(method, &url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        req = match body {
            Some(Body::Json(v)) => req
                .header("Content-Type", "application/json")
                .body(v.to_string()),
            Some(Body::Text(t, content_type)) => {
                req.header("Content-Type", content_type).body(t)
            }
            None => req,
        };
        let response = req.send().map_err(|e| Failure {
            body: json!({ "code": "transport", "message": e.to_string() }),
            exit: 4,
        })?;
        let status = response.status();
        let text = response.text().map_err(|e| Failure {
            body: json!({ "code": "transport", "message": e.to_string() }),
            exit: 4,
        })?;
        let value: Value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        if status.is_success() {
            Ok(value)
        } else {
            let exit = match status.as_u16() {
                401 | 403 => 3,
                _ => {
                    // Prefer the machine code when the body carries one.
                    let code = serde_json::from_value::<ApiError>(value.clone())
                        .map(|e| e.code)
                        .unwrap_or_default();
                    if code == "auth_denied" {
                        3
                    } else {
                        2
                    }
                }
            };
            Err(Failure { body: value, exit })
        }
    }

    fn get(&self, path: &str) -> Result<Value, Failure> {
        self.request(reqwest::Method::GET, path, None)
    }

    fn post(&self, path: &str, body: Value) -> Result<Value, Failure> {
        self.request(reqwest::Method::POST, path, Some(Body::Json(body)))
    }

    fn put_text(&self, path: &str, text: String, content_type: &str) -> Result<Value, Failure> {
        self.request(
            reqwest::Method::PUT,
            path,
            Some(Body::Text(text, content_type.to_string())),
        )
    }

    fn post_text(&self, path: &str, text: String, content_type: &str) -> Result<Value, Failure> {
        self.request(
            reqwest::Method::POST,
            path,
            Some(Body::Text(text, content_type.to_string())),
        )
    }
}

enum Body {
    Json(Value),
    Text(String, String),
}

fn encode(raw: &str) -> String {
    let mut out = String::new();
    for b in raw.bytes() {
        match b {
            b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' => {
                out.push(b as char)
            }
            other => out.push_str(&format!("%{other:02X}")),
        }
    }
    out
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        body: json!({ "code": "io", "message": format!("{}: {e}", path.display()) }),
        exit: 2,
    })
}

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Failure {
        body: json!({ "code": "io", "message": format!("{}: {e}", path.display()) }),
        exit: 2,
    })
}

fn run_client(client: &Client, command: Command) -> Result<Value, Failure> {
    match command {
        Command::Serve { .. } => unreachable!("handled in main"),
        Command::Org(cmd) => match cmd {
            OrgCmd::Create { name } => client.post("/orgs", json!({ "display_name": name })),
            OrgCmd::List => client.get("/orgs"),
        },
        Command::Site(cmd) => match cmd {
            SiteCmd::Create {
                org,
                name,
                lat,
                lon,
                address,
                cadastral,
            } => client.post(
                &format!("/orgs/{}/sites", encode(&org)),
                json!({
                    "display_name": name,
                    "latitude": lat,
                    "longitude": lon,
                    "address": address,
                    "cadastral_ref": cadastral,
                }),
            ),
            SiteCmd::List => client.get("/sites"),
        },
        Command::Building(cmd) => match cmd {
            BuildingCmd::Create { site, name } => client.post(
                &format!("/sites/{}/buildings", encode(&site)),
                json!({ "display_name": name }),
            ),
            BuildingCmd::List => client.get("/buildings"),
        },
        Command::Model(cmd) => match cmd {
            ModelCmd::Upload { target, file } => {
                let document = read_file(&file)?;
                client.put_text(
                    &format!("/targets/{}/model/draft", encode(&target)),
                    document,
                    "text/turtle",
                )
            }
            ModelCmd::Validate { target, version } => client.post(
                &format!("/targets/{}/model/validate", encode(&target)),
                json!({ "version": version }),
            ),
            ModelCmd::Publish { target, version } => client.post(
                &format!("/targets/{}/model/publish", encode(&target)),
                json!({ "version": version }),
            ),
            ModelCmd::Describe { entity, models } => {
                let query: Vec<String> = models
                    .iter()
                    .map(|m| format!("model={}", encode(m)))
                    .collect();
                client.get(&format!(
                    "/entities/{}:describe?{}",
                    encode(&entity),
                    query.join("&")
                ))
            }
        },
        Command::Query(cmd) => match cmd {
            QueryCmd::Store { id, file } => {
                let body = read_json(&file)?;
                client.post("/queries", json!({ "query_id": id, "body": body }))
            }
            QueryCmd::Invoke {
                file,
                id,
                query_version,
                models,
                args,
            } => {
                let mut request = json!({ "models": models });
                match (file, id) {
                    (Some(file), None) => {
                        request["query"] = read_json(&file)?;
                    }
                    (None, Some(id)) => {
                        request["query_ref"] = json!({ "query_id": id, "version": query_version });
                    }
                    _ => {
                        return Err(Failure {
                            body: json!({
                                "code": "usage",
                                "message": "provide exactly one of --file or --id",
                            }),
                            exit: 2,
                        })
                    }
                }
                let mut arg_map = BTreeMap::new();
                for arg in args {
                    let Some((name, iri)) = arg.split_once('=') else {
                        return Err(Failure {
                            body: json!({ "code": "usage", "message": "--arg must be name=<iri>" }),
                            exit: 2,
                        });
                    };
                    arg_map.insert(name.to_string(), iri.to_string());
                }
                if !arg_map.is_empty() {
                    request["args"] = serde_json::to_value(arg_map).unwrap();
                }
                client.post("/queries:invoke", request)
            }
        },
        Command::Ingest(cmd) => match cmd {
            IngestCmd::DchJson { file, rules } => {
                let payload = read_json(&file)?;
                let rules = match rules {
                    Some(path) => read_json(&path)?,
                    None => json!([]),
                };
                client.post("/ingest/dch-json", json!({ "payload": payload, "rules": rules }))
            }
            IngestCmd::Nem12 {
                file,
                stream,
                map,
                offset,
                owner,
            } => {
                let text = read_file(&file)?;
                let mut params = vec![format!("offset={}", encode(&offset))];
                if let Some(stream) = stream {
                    params.push(format!("stream={}", encode(&stream)));
                }
                for entry in map {
                    params.push(format!("map={}", encode(&entry)));
                }
                if let Some(owner) = owner {
                    params.push(format!("owner={}", encode(&owner)));
                }
                client.post_text(
                    &format!("/ingest/nem12?{}", params.join("&")),
                    text,
                    "text/csv",
                )
            }
        },
        Command::Stream(cmd) => match cmd {
            StreamCmd::Create {
                id,
                quantity,
                unit,
                point,
                interval,
                owner,
            } => client.post(
                "/streams",
                json!({
                    "stream_id": id,
                    "quantity_kind": quantity,
                    "unit": unit,
                    "bound_point": point,
                    "expected_interval_seconds": interval,
                    "owner_target": owner,
                }),
            ),
            StreamCmd::Read { stream, start, end } => client.get(&format!(
                "/streams/{}/observations?start={}&end={}",
                encode(&stream),
                encode(&start),
                encode(&end)
            )),
            StreamCmd::Health {
                stream,
                start,
                end,
                interval,
                now,
            } => {
                let mut params = vec![
                    format!("start={}", encode(&start)),
                    format!("end={}", encode(&end)),
                ];
                if let Some(interval) = interval {
                    params.push(format!("interval={interval}"));
                }
                if let Some(now) = now {
                    params.push(format!("now={}", encode(&now)));
                }
                client.get(&format!(
                    "/streams/{}/health?{}",
                    encode(&stream),
                    params.join("&")
                ))
            }
        },
        Command::App(cmd) => match cmd {
            AppCmd::Register { package } => {
                let mut manifest = if package.is_dir() {
                    read_json(&package.join("manifest.json"))?
                } else {
                    read_json(&package)?
                };
                if package.is_dir() && manifest.get("discovery_query").is_none() {
                    let query_path = package.join("query.briql.json");
                    if query_path.exists() {
                        manifest["discovery_query"] = read_json(&query_path)?;
                    }
                }
                client.post("/apps", manifest)
            }
            AppCmd::Install {
                app,
                app_version,
                target,
                config,
            } => {
                let config = match config {
                    Some(path) => read_json(&path)?,
                    None => Value::Null,
                };
                client.post(
                    &format!("/apps/{}/installs", encode(&app)),
                    json!({ "version": app_version, "target": target, "config": config }),
                )
            }
            AppCmd::Run { install, as_of } => client.post(
                &format!("/installs/{}:run", encode(&install)),
                match as_of {
                    Some(t) => json!({ "as_of": t }),
                    None => json!({}),
                },
            ),
            AppCmd::Result { install } => {
                client.get(&format!("/installs/{}/result", encode(&install)))
            }
        },
    }
}
