"""Command-line entry points: gateway, registry, eval, sim, analyze."""

from __future__ import annotations

import argparse
import json
import sys

from .registry import FunctionEntry, append_function, load_registry, save_registry


def _cmd_gateway_serve(args) -> int:
    import uvicorn

    from .gateway import Gateway, GatewayConfig, create_app

    config = GatewayConfig.from_file(args.config)
    app = create_app(Gateway(config))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_gateway_replay(args) -> int:
    from .gateway import GatewayConfig, replay_session

    config = GatewayConfig.from_file(args.config)
    for input_text, command_class, payload in replay_session(config, args.session):
        print(json.dumps({"input": input_text, "class": command_class, "output": payload}))
    return 0


def _cmd_registry_add(args) -> int:
    reg = load_registry(args.registry)
    entry = FunctionEntry(
        id=args.id,
        input_phrase=args.input,
        output_code=args.output,
        command_class=args.command_class,
        unchecked=args.unchecked,
    )
    reg = append_function(reg, entry)
    save_registry(reg, args.registry)
    print(f"{entry.id} added; registry version {reg.version}")
    return 0


def _cmd_registry_list(args) -> int:
    reg = load_registry(args.registry)
    for entry in reg.entries:
        print(f"{entry.id}\t{entry.command_class}\t{entry.input_phrase}")
    return 0


def _cmd_eval_run(args) -> int:
    from .backends import ChatRequest, echo_backend, load_rules, scripted_backend, complete
    from .metrics import load_dataset, run_eval

    cases = load_dataset(args.dataset)
    backend = scripted_backend(load_rules(args.rules)) if args.rules else echo_backend()

    def cog(user_input: str):
        resp = complete(
            backend, ChatRequest(system_prompt="eval", user_prompt=user_input)
        )
        return resp.text, resp.latency_s

    report = run_eval(cases, cog, runs=args.runs)
    print(report.to_json())
    return 0


def _cmd_sim_run(args) -> int:
    from .sim import InstrumentState, execute, parse_program

    with open(args.file, encoding="utf-8") as fh:
        source = fh.read()
    state = InstrumentState()
    if args.state:
        with open(args.state, encoding="utf-8") as fh:
            state = InstrumentState(**json.load(fh))
    final, trace = execute(parse_program(source), state)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace.to_jsonl())
    print(
        json.dumps(
            {
                "events": len(trace.events),
                "final_time": trace.final_time,
                "temperature": final.temperature,
                "position": [final.x, final.y, final.th, final.phi],
            }
        )
    )
    return 0


def _cmd_analyze(args) -> int:
    from .analysis import dispatch_protocol, load_frame

    frame = load_frame(args.frame) if args.frame else None
    result = dispatch_protocol(args.protocol, args.arg, frame, args.out_dir)
    print(json.dumps(result))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlbeam", description="natural-language beamline assistant toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gw = sub.add_parser("gateway", help="run or replay the gateway service")
    gw_sub = gw.add_subparsers(dest="gateway_command", required=True)
    serve = gw_sub.add_parser("serve")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_gateway_serve)
    replay = gw_sub.add_parser("replay")
    replay.add_argument("session")
    replay.add_argument("--config", required=True)
    replay.set_defaults(func=_cmd_gateway_replay)

    reg = sub.add_parser("registry", help="inspect or extend a function registry")
    reg_sub = reg.add_subparsers(dest="registry_command", required=True)
    add = reg_sub.add_parser("add")
    add.add_argument("--registry", required=True)
    add.add_argument("--id", required=True)
    add.add_argument("--input", required=True)
    add.add_argument("--output", required=True)
    add.add_argument("--command-class", default="Op")
    add.add_argument("--unchecked", action="store_true")
    add.set_defaults(func=_cmd_registry_add)
    lst = reg_sub.add_parser("list")
    lst.add_argument("--registry", required=True)
    lst.set_defaults(func=_cmd_registry_list)

    ev = sub.add_parser("eval", help="run a JSONL evaluation dataset")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)
    run = ev_sub.add_parser("run")
    run.add_argument("dataset")
    run.add_argument("--rules", help="scripted backend rules JSONL")
    run.add_argument("--runs", type=int, default=5)
    run.set_defaults(func=_cmd_eval_run)

    sim = sub.add_parser("sim", help="execute a command-language program")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    sim_run = sim_sub.add_parser("run")
    sim_run.add_argument("file")
    sim_run.add_argument("--state")
    sim_run.add_argument("--trace")
    sim_run.set_defaults(func=_cmd_sim_run)

    an = sub.add_parser("analyze", help="run an analysis protocol")
    an.add_argument("protocol")
    an.add_argument("arg", nargs="?", type=float)
    an.add_argument("--frame")
    an.add_argument("--out-dir")
    an.set_defaults(func=_cmd_analyze)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
