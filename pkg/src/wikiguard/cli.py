"""Command-line interface.

Local commands: ``synth`` (fixture generation) and ``evaluate`` (offline
prequential runs). ``serve`` starts the HTTP service; the ``client``
group talks to a running service over HTTP.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

from .errors import WikiguardError
from .evaluation import export_results, run_prequential
from .events import ScenarioConfig, build_scenario, order_stream, read_events, write_events
from .pipeline import PipelineConfig, StreamPipeline
from .synth import generate_events


@click.group()
def main():
    """Stream-based disinformation detection for wiki revision events."""


@main.command()
@click.option("--n", default=1000, show_default=True, help="Number of events.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--disinfo-fraction", default=0.5, show_default=True)
@click.option("--label-noise", default=0.02, show_default=True)
def synth(n, seed, out, disinfo_fraction, label_noise):
    """Generate a planted-signal synthetic event stream (JSONL)."""
    events = generate_events(n, seed=seed, disinfo_fraction=disinfo_fraction, label_noise=label_noise)
    count = write_events(events, out)
    click.echo(f"wrote {count} events to {out}")


@main.command()
@click.option("--scenario", type=click.Choice(["1", "2", "3"]), required=True)
@click.option("--model", "model_id", type=click.Choice(["gnb", "alma", "hatc", "arfc"]), required=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--cold-start", default=0.005, show_default=True, help="Cold-start fraction.")
@click.option("--delay", default=100, show_default=True, help="Scenario-3 training delay.")
@click.option("--seed", default=0, show_default=True)
@click.option("--s", "s_override", default=None, type=int, help="Per-class sample budget (default: minority count).")
@click.option("--grid-search/--no-grid-search", default=False, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def evaluate(scenario, model_id, input_path, cold_start, delay, seed, s_override, grid_search, out):
    """Run a prequential evaluation over a labeled JSONL stream."""
    try:
        events = order_stream(read_events(input_path))
        counts = {0: sum(1 for e in events if e.label == 0), 1: sum(1 for e in events if e.label == 1)}
        s = s_override if s_override is not None else min(counts[0], counts[1])
        cfg = ScenarioConfig(scenario=int(scenario), s=s, delay_n=delay, rng_seed=seed)
        stream = build_scenario(events, cfg)

        cold_n = max(1, round(cold_start * len(stream)))
        cold, rest = stream[:cold_n], stream[cold_n:]
        pipeline = StreamPipeline(
            PipelineConfig(
                model_id=model_id,
                seed=seed,
                cold_start_fraction=cold_start,
                keep_records=False,
                track_quantiles=False,
            )
        )
        report = pipeline.calibrate(cold, grid_search=grid_search)
        click.echo(f"calibrated: cap={report['ngram_cap']} threshold={report['threshold']:.6g}")
        if grid_search:
            click.echo(f"grid best: {report['grid_best']} (cold accuracy {report['grid_accuracy']:.3f})")

        run = run_prequential(pipeline, rest, cfg, model_id=model_id)
        paths = export_results(run, out)
        pipeline.selector.export_csv(paths["summary"].parent / "selector_state.csv")
        final = run.curve[-1] if run.curve else None
        if final:
            click.echo(
                f"samples={len(run.records)} accuracy={final.accuracy:.4f} "
                f"f1_macro={final.f1_macro:.4f} rate={run.samples_per_second:.1f}/s"
            )
        click.echo(f"results in {paths['summary'].parent}")
    except WikiguardError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--model", "model_id", type=click.Choice(["gnb", "alma", "hatc", "arfc"]), default="arfc", show_default=True)
@click.option("--state", "state_dir", default=None, type=click.Path(file_okay=False), help="Persistence directory.")
@click.option("--replay", "replay_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Preload events from a JSONL file.")
@click.option("--cold-start-n", default=50, show_default=True, help="Live calibration window size.")
@click.option("--seed", default=0, show_default=True)
def serve(port, model_id, state_dir, replay_path, cold_start_n, seed):
    """Start the HTTP service (long-running)."""
    import uvicorn

    from .service import ServiceConfig, ServiceState, create_app

    config = ServiceConfig(
        port=port,
        model_id=model_id,
        state_dir=state_dir,
        live_cold_start_n=cold_start_n,
        seed=seed,
    )
    app = create_app(config)
    state: ServiceState = app.state.service
    if replay_path:
        for event in order_stream(read_events(replay_path)):
            state.ingest(event)
        click.echo(f"replayed {state.pipeline.samples_seen} events from {replay_path}")
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


@main.group()
def client():
    """Thin HTTP client for a running service."""


@client.command("post-events")
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--limit", default=None, type=int)
def client_post_events(url, input_path, limit):
    """POST events from a JSONL file in stream order."""
    events = order_stream(read_events(input_path))
    if limit:
        events = events[:limit]
    with httpx.Client(base_url=url, timeout=30.0) as http:
        for event in events:
            response = http.post("/events", json=event.to_record())
            if response.status_code != 200:
                click.echo(f"{event.event_id}: HTTP {response.status_code} {response.text}", err=True)
                continue
            body = response.json()
            click.echo(f"{body['event_id']}\t{body['predicted_name']}\t{body['confidence']:.3f}")


@client.command("feedback")
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--event-id", required=True)
@click.option("--label", required=True, type=click.IntRange(0, 1))
def client_feedback(url, event_id, label):
    """Submit an expert verdict for one event."""
    with httpx.Client(base_url=url, timeout=30.0) as http:
        response = http.post("/feedback", json={"event_id": event_id, "label": label})
    if response.status_code != 200:
        click.echo(f"HTTP {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    click.echo(json.dumps(response.json(), indent=2))


@client.command("metrics")
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
def client_metrics(url):
    """Fetch the live prequential metrics."""
    with httpx.Client(base_url=url, timeout=30.0) as http:
        response = http.get("/metrics")
    click.echo(json.dumps(response.json(), indent=2))


@client.command("explain")
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--event-id", required=True)
def client_explain(url, event_id):
    """Fetch the explanation for one event."""
    with httpx.Client(base_url=url, timeout=30.0) as http:
        response = http.get(f"/explanations/{event_id}")
    if response.status_code != 200:
        click.echo(f"HTTP {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    click.echo(json.dumps(response.json(), indent=2))


if __name__ == "__main__":
    main()
