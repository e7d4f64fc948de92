"""Command-line client.

Subcommands either run in-process or, with --server, against a running
service instance; both paths go through the same handlers. Sweeps write a
CSV plus a JSON manifest next to it and exit nonzero when more than 5% of
trials fail.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

from . import experiment
from .experiment import ScenarioConfig


def _load_config(args, method: str | None = None) -> ScenarioConfig:
    if args.config:
        with open(args.config) as fh:
            config = ScenarioConfig.from_json(fh.read())
    else:
        config = experiment.default_config()
    overrides = {}
    if method is not None:
        overrides["method"] = method
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "kl_samples", None) is not None:
        overrides["kl_samples"] = args.kl_samples
    return replace(config, **overrides) if overrides else config


def _out_path(args, config: ScenarioConfig, default: str) -> str:
    return args.out or config.output_path or default


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + route, json=payload, timeout=3600.0)
    resp.raise_for_status()
    return resp.json()


def _run_design(args, method: str) -> int:
    config = _load_config(args, method)
    seed = args.seed if args.seed is not None else config.master_seed
    if args.server:
        doc = _post(args.server, "/design", {"config": config.to_dict(), "seed": seed})
    else:
        from .service import design_solution

        doc = design_solution(config, seed).model_dump()
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if method.startswith("robust") and args.cdf_out and doc.get("kl_values"):
        with open(args.cdf_out, "w") as fh:
            fh.write(experiment.kl_cdf_csv(doc["kl_values"]))
    return 0


def _run_sweep(args, detect: bool) -> int:
    config = _load_config(args)
    started = time.perf_counter()
    if args.server:
        doc = _post(args.server, "/detect" if detect else "/sweep",
                    {"config": config.to_dict(), "jobs": args.jobs})
        csv_text, failed = doc["csv"], doc["failed_trials"]
    else:
        runner = experiment.run_detection_report if detect else experiment.run_sweep
        csv_text, failed = runner(config, jobs=args.jobs)
    path = _out_path(args, config, "detect.csv" if detect else "sweep.csv")
    experiment.write_outputs(csv_text, config, path, time.perf_counter() - started)
    total = len(config.grid()) * config.trials
    print(f"wrote {path} ({total} trials, {failed} failed)")
    if failed > 0.05 * total:
        print("error: more than 5% of trials failed", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="covertbeam",
                                     description="Covert beamforming designs for IRS-assisted links")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_jobs=False):
        p.add_argument("--config", help="scenario config JSON")
        p.add_argument("--out", help="output path")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--trials", type=int, default=None, help="trials override")
        p.add_argument("--server", help="run against a service at this URL")
        if with_jobs:
            p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    for name in ("perfect", "discrete", "no-irs"):
        p = sub.add_parser(name, help=f"single {name} design on one seeded channel draw")
        add_common(p)
        p.set_defaults(kl_samples=None, cdf_out=None)

    p = sub.add_parser("robust", help="single robust design on one seeded channel draw")
    add_common(p)
    p.add_argument("--kl-case", choices=["kl01", "kl10"], default="kl01")
    p.add_argument("--kl-samples", type=int, default=None,
                   help="sampled-ellipsoid divergence evaluations")
    p.add_argument("--cdf-out", help="write the sampled-divergence CDF CSV here")

    p = sub.add_parser("sweep", help="Monte Carlo sweep over the config grid")
    add_common(p, with_jobs=True)

    p = sub.add_parser("detect", help="detection-probability report over the epsilon grid")
    add_common(p, with_jobs=True)

    p = sub.add_parser("validate", help="run the built-in oracle suite")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)

    if args.command in ("perfect", "discrete"):
        return _run_design(args, args.command)
    if args.command == "no-irs":
        return _run_design(args, "no_irs")
    if args.command == "robust":
        return _run_design(args, f"robust_{args.kl_case}")
    if args.command == "sweep":
        return _run_sweep(args, detect=False)
    if args.command == "detect":
        return _run_sweep(args, detect=True)
    if args.command == "validate":
        from .validate import run_validation

        return 0 if run_validation() else 1
    if args.command == "serve":
        import uvicorn

        uvicorn.run("covertbeam.service:app", host=args.host, port=args.port)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
