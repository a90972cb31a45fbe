"""Command-line front end.

run executes an experiment (locally by default, or against a running service
with --server) and writes slots.csv, metrics.json and the config echo into
the output directory. summarize re-reads a metrics.json and prints the
aggregate table plus the scheme-ordering checks. selftest runs the quick
consistency battery. serve starts the HTTP service.

Output directory precedence: the UAVMEC_OUTPUT_DIR environment variable,
then --out, then output.dir from the configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import selftest
from .experiment import metrics_table, run_experiment, summarize_metrics, write_artifacts
from .scenario import ConfigError, load_config, load_config_text

ENV_OUTPUT_DIR = "UAVMEC_OUTPUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavmec", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run an experiment and write artifacts")
    run.add_argument("--config", help="configuration file path")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override one configuration key")
    run.add_argument("--out", help="output directory")
    run.add_argument("--server", help="base URL of a running service")

    summ = sub.add_parser("summarize", help="aggregate a metrics.json and check ordering")
    summ.add_argument("--metrics", help="metrics.json path")
    summ.add_argument("--out", help="output directory holding metrics.json")
    summ.add_argument("--server", help="base URL of a running service")

    st = sub.add_parser("selftest", help="run the quick consistency battery")
    st.add_argument("--server", help="base URL of a running service")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _output_dir(flag: Optional[str], cfg_dir: str) -> str:
    return os.environ.get(ENV_OUTPUT_DIR) or flag or cfg_dir


def _load(args) -> object:
    if args.config:
        return load_config(args.config, args.overrides)
    return load_config_text("", args.overrides)


def _run_local(args) -> int:
    cfg = _load(args)
    result = run_experiment(cfg)
    out_dir = _output_dir(args.out, cfg.output.directory)
    paths = write_artifacts(result, out_dir)
    from .experiment import metrics_payload

    print(metrics_table(list(metrics_payload(result).values())))
    for name, path in paths.items():
        print(f"{name}: {path}")
    failures = [ep for ep in result.episodes if ep.error]
    for ep in failures:
        print(f"episode {ep.scheme}/{ep.seed} failed: {ep.error}", file=sys.stderr)
    return 1 if failures else 0


def _run_remote(args) -> int:
    import httpx

    config_text = ""
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config_text = fh.read()
    body = {"config_text": config_text, "overrides": args.overrides}
    with httpx.Client(base_url=args.server, timeout=None) as client:
        resp = client.post("/experiments", params={"wait": "true"}, json=body)
        if resp.status_code == 422:
            print(resp.json().get("detail", "invalid configuration"), file=sys.stderr)
            return 2
        resp.raise_for_status()
        status = resp.json()
        if status["state"] != "done":
            print(f"experiment failed: {status.get('error')}", file=sys.stderr)
            return 1
        job = status["id"]
        slots = client.get(f"/experiments/{job}/slots.csv")
        slots.raise_for_status()
        metrics = client.get(f"/experiments/{job}/metrics.json")
        metrics.raise_for_status()
        echo = client.get(f"/experiments/{job}/config")
        echo.raise_for_status()
    out_dir = _output_dir(args.out, "runs")
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "slots.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(slots.text)
    payload = metrics.json()
    with open(os.path.join(out_dir, "metrics.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(echo.text)
    print(metrics_table(list(payload.values())))
    print(f"artifacts: {out_dir}")
    errors = [e for e in payload.values() if "error" in e]
    for e in errors:
        print(f"episode {e['scheme']}/{e['seed']} failed: {e['error']}", file=sys.stderr)
    return 1 if errors else 0


def _cmd_run(args) -> int:
    try:
        if args.server:
            return _run_remote(args)
        return _run_local(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2


def _cmd_summarize(args) -> int:
    path = args.metrics or os.path.join(_output_dir(args.out, "runs"), "metrics.json")
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if args.server:
        import httpx

        with httpx.Client(base_url=args.server, timeout=None) as client:
            resp = client.post("/summarize", json={"metrics": payload})
            resp.raise_for_status()
            body = resp.json()
            report, ok = body["report"], body["ok"]
    else:
        report, ok = summarize_metrics(list(payload.values()))
    print(report)
    return 0 if ok else 1


def _cmd_selftest(args) -> int:
    if args.server:
        import httpx

        with httpx.Client(base_url=args.server, timeout=None) as client:
            resp = client.post("/selftest")
            resp.raise_for_status()
            body = resp.json()
            for line in body["lines"]:
                print(line)
            return 0 if body["ok"] else 1
    results = selftest.run_checks()
    for line in selftest.format_lines(results):
        print(line)
    return 0 if all(ok for _, ok, _ in results) else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: Optional[list] = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "summarize": _cmd_summarize,
                "selftest": _cmd_selftest, "serve": _cmd_serve}
    return handlers[args.verb](args)


if __name__ == "__main__":
    sys.exit(main())
